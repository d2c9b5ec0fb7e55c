use std::io::Write;
use std::path::Path;

use invariance_cert::geometry::parse_csv;
use invariance_cert::PointCloud;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{at, CliError, CliResult};

pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct InputDigest {
    pub flag: String,
    pub path: String,
    pub sha256: String,
}

/// Everything that determines a run's output.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: &'static str,
    pub version: &'static str,
    pub params: serde_json::Value,
    pub inputs: Vec<InputDigest>,
}

impl RunManifest {
    pub fn new(command: &'static str, params: &impl Serialize) -> CliResult<Self> {
        Ok(RunManifest {
            command,
            version: env!("CARGO_PKG_VERSION"),
            params: serde_json::to_value(params)
                .map_err(|e| CliError::input(format!("cannot record parameters: {e}")))?,
            inputs: Vec::new(),
        })
    }

    /// Read and parse a point-cloud file, recording its digest.
    pub fn read_cloud(&mut self, flag: &str, path: &Path) -> CliResult<PointCloud> {
        let bytes = std::fs::read(path)
            .map_err(|e| CliError::input(format!("{flag}: cannot read {}: {e}", path.display())))?;
        let text = String::from_utf8(bytes.clone())
            .map_err(|_| CliError::input(format!("{flag}: {} is not UTF-8", path.display())))?;
        let cloud = parse_csv(&text).map_err(at(flag))?;
        self.inputs.push(InputDigest {
            flag: flag.to_string(),
            path: path.display().to_string(),
            sha256: sha256_hex(&bytes),
        });
        Ok(cloud)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn print_json(value: &impl Serialize) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::input(format!("cannot serialize output: {e}")))?;
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{text}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
            Err(CliError::input(format!("cannot write output: {e}")))
        }
        _ => Ok(()),
    }
}

pub fn write_file(flag: &str, path: &Path, contents: &str) -> CliResult<InputDigest> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::input(format!("{flag}: cannot write {}: {e}", path.display())))?;
    Ok(InputDigest {
        flag: flag.to_string(),
        path: path.display().to_string(),
        sha256: sha256_hex(contents.as_bytes()),
    })
}
