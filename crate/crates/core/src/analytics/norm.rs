//! The windowed max-plus matrix norm family.
//!
//! For a real `N x M` matrix `D` (requests on rows, links on columns) a state
//! vector is folded over the rows: entry `i` of the new state is the maximum
//! of `|state_x| + |D_jx|` over the window `max(1, i - r) <= x <= min(i + k - 1, M)`.
//! The norm is the largest entry of the final state. With nonnegative integer
//! `D`, `(r, k) = (M, k)` reproduces the k-opportunistic waiting time and
//! `(r, 1)` the search-depth waiting time.

use crate::{Error, Result};

/// One fold step: combines the previous state `a` with the row `b`.
pub fn theta(a: &[f64], b: &[f64], r: usize, k: usize) -> Vec<f64> {
    let m = a.len();
    (0..m)
        .map(|i| {
            let lo = i.saturating_sub(r);
            let hi = (i + k - 1).min(m - 1);
            (lo..=hi).map(|x| a[x].abs() + b[x].abs()).fold(0.0, f64::max)
        })
        .collect()
}

/// `Lambda_r^k(D)` for a matrix given as rows of equal length `M`.
pub fn matrix_norm(rows: &[Vec<f64>], r: usize, k: usize) -> Result<f64> {
    let m = rows.first().map_or(0, Vec::len);
    if m == 0 {
        return Err(Error::OutOfRange { name: "columns", value: 0, min: 1, max: usize::MAX });
    }
    if rows.iter().any(|row| row.len() != m) {
        return Err(Error::OutOfRange { name: "row length", value: m, min: m, max: m });
    }
    if r > m {
        return Err(Error::OutOfRange { name: "r", value: r, min: 0, max: m });
    }
    if k == 0 || k > m {
        return Err(Error::OutOfRange { name: "k", value: k, min: 1, max: m });
    }
    let mut state = vec![0.0; m];
    for row in rows {
        state = theta(&state, row, r, k);
    }
    Ok(state.into_iter().fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_matrix() {
        let z = vec![vec![0.0; 3]; 4];
        for r in 0..=3 {
            for k in 1..=3 {
                assert_eq!(matrix_norm(&z, r, k).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn reproduces_opportunistic_waiting_time() {
        // requests on rows: request 1 sees (1, 3), request 2 sees (2, 1)
        let d = vec![vec![1.0, 3.0], vec![2.0, 1.0]];
        assert_eq!(matrix_norm(&d, 2, 1).unwrap(), 4.0);
        assert_eq!(matrix_norm(&d, 2, 2).unwrap(), 5.0);
        assert_eq!(matrix_norm(&d, 0, 1).unwrap(), 4.0);
    }

    #[test]
    fn single_row_is_max_abs() {
        let d = vec![vec![-2.0, 0.5, 1.5]];
        assert_eq!(matrix_norm(&d, 3, 1).unwrap(), 2.0);
        assert_eq!(matrix_norm(&d, 0, 1).unwrap(), 2.0);
    }

    #[test]
    fn bad_parameters() {
        let d = vec![vec![1.0, 2.0]];
        assert!(matrix_norm(&d, 3, 1).is_err());
        assert!(matrix_norm(&d, 0, 0).is_err());
        assert!(matrix_norm(&d, 0, 3).is_err());
        assert!(matrix_norm(&[], 0, 1).is_err());
        assert!(matrix_norm(&[vec![1.0], vec![1.0, 2.0]], 0, 1).is_err());
    }
}
