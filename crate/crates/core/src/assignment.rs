//! Minimum-cost perfect matching on a square real cost matrix
//! (Hungarian method with row/column potentials, `O(n^3)`).

use nalgebra::DMatrix;

/// Returns `assign` with `assign[row] = col` minimizing the total cost, and
/// that total. Ties go to the first optimum found.
pub(crate) fn solve(cost: &DMatrix<f64>) -> (Vec<usize>, f64) {
    let n = cost.nrows();
    debug_assert_eq!(n, cost.ncols());
    if n == 0 {
        return (Vec::new(), 0.0);
    }
    // 1-indexed potentials; column 0 is a virtual source
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut matched_row = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];

    for i in 1..=n {
        matched_row[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = matched_row[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[(i0 - 1, j - 1)] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[matched_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if matched_row[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            matched_row[j0] = matched_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut assign = vec![0; n];
    for j in 1..=n {
        assign[matched_row[j] - 1] = j - 1;
    }
    let total = assign
        .iter()
        .enumerate()
        .map(|(r, &c)| cost[(r, c)])
        .sum();
    (assign, total)
}
