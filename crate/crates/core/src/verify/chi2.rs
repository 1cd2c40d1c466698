//! Pearson chi-squared homogeneity test over contingency tables.

use statrs::distribution::{ChiSquared, ContinuousCDF};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Chi2Outcome {
    pub statistic: f64,
    pub dof: u64,
    pub p_value: f64,
}

/// Test whether the rows of a contingency table draw from one distribution.
///
/// Columns with zero total are dropped. Returns `None` when the table is
/// degenerate: fewer than two rows, fewer than two occupied columns, or an
/// empty row.
pub fn homogeneity(rows: &[Vec<u64>]) -> Option<Chi2Outcome> {
    if rows.len() < 2 {
        return None;
    }
    let cols = rows[0].len();
    if rows.iter().any(|r| r.len() != cols) {
        return None;
    }
    let col_totals: Vec<u64> = (0..cols).map(|c| rows.iter().map(|r| r[c]).sum()).collect();
    let occupied: Vec<usize> = (0..cols).filter(|&c| col_totals[c] > 0).collect();
    if occupied.len() < 2 {
        return None;
    }
    let row_totals: Vec<u64> = rows.iter().map(|r| r.iter().sum()).collect();
    if row_totals.iter().any(|&t| t == 0) {
        return None;
    }
    let grand: u64 = row_totals.iter().sum();

    let mut statistic = 0.0f64;
    for (i, row) in rows.iter().enumerate() {
        for &c in &occupied {
            let expected = row_totals[i] as f64 * col_totals[c] as f64 / grand as f64;
            let diff = row[c] as f64 - expected;
            statistic += diff * diff / expected;
        }
    }
    let dof = ((rows.len() - 1) * (occupied.len() - 1)) as u64;
    let dist = ChiSquared::new(dof as f64).ok()?;
    let p_value = (1.0 - dist.cdf(statistic)).clamp(0.0, 1.0);
    Some(Chi2Outcome {
        statistic,
        dof,
        p_value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_rows_score_zero() {
        let out = homogeneity(&[vec![10, 20, 30], vec![10, 20, 30]]).unwrap();
        assert_eq!(out.statistic, 0.0);
        assert_eq!(out.dof, 2);
        assert!((out.p_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn disjoint_rows_are_rejected_hard() {
        let out = homogeneity(&[vec![1000, 0], vec![0, 1000]]).unwrap();
        assert_eq!(out.dof, 1);
        assert!(out.statistic > 1000.0);
        assert!(out.p_value < 1e-12);
    }

    #[test]
    fn known_value() {
        // 2x2 table [[20, 30], [30, 20]]: statistic = 4, dof = 1,
        // p = erfc(sqrt(2)) ≈ 0.0455.
        let out = homogeneity(&[vec![20, 30], vec![30, 20]]).unwrap();
        assert!((out.statistic - 4.0).abs() < 1e-9);
        assert!((out.p_value - 0.04550026).abs() < 1e-6);
    }

    #[test]
    fn degenerate_tables() {
        assert_eq!(homogeneity(&[vec![5, 5]]), None);
        assert_eq!(homogeneity(&[vec![5, 0], vec![7, 0]]), None);
        assert_eq!(homogeneity(&[vec![5], vec![7]]), None);
        assert_eq!(homogeneity(&[vec![5, 5], vec![0, 0]]), None);
    }

    #[test]
    fn empty_columns_are_dropped() {
        let with_gap = homogeneity(&[vec![10, 0, 20], vec![12, 0, 18]]).unwrap();
        let without = homogeneity(&[vec![10, 20], vec![12, 18]]).unwrap();
        assert!((with_gap.statistic - without.statistic).abs() < 1e-12);
        assert_eq!(with_gap.dof, without.dof);
    }
}
