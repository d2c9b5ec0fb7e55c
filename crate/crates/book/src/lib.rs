//! Doc-tests for the guide in `book/`. Each module includes one chapter, so
//! the snippets in the book compile and run with `cargo test`.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/point-clouds.md")]
pub mod point_clouds {}

#[doc = include_str!("../../../book/src/orbit-certificates.md")]
pub mod orbit_certificates {}

#[doc = include_str!("../../../book/src/tight-certificates.md")]
pub mod tight_certificates {}

#[doc = include_str!("../../../book/src/monte-carlo.md")]
pub mod monte_carlo {}

#[doc = include_str!("../../../book/src/pmin-grids.md")]
pub mod pmin_grids {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
