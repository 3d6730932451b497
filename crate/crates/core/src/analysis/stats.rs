use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::AnalysisError;

/// A correlation coefficient with its two-sided p-value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Correlation {
    pub r: f64,
    pub p_value: f64,
    pub n: usize,
}

fn check_lengths(x: &[f64], y: &[f64], needed: usize) -> Result<(), AnalysisError> {
    if x.len() != y.len() {
        return Err(AnalysisError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < needed {
        return Err(AnalysisError::TooFew {
            needed,
            found: x.len(),
        });
    }
    Ok(())
}

/// Centered two-pass product-moment correlation.
fn product_moment(x: &[f64], y: &[f64]) -> Result<f64, AnalysisError> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(AnalysisError::ZeroVariance);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Sample Pearson correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, AnalysisError> {
    check_lengths(x, y, 3)?;
    product_moment(x, y)
}

/// Pearson correlation with the t-test p-value on `n - 2` degrees of freedom.
pub fn pearson_test(x: &[f64], y: &[f64]) -> Result<Correlation, AnalysisError> {
    let r = pearson(x, y)?;
    let n = x.len();
    let df = (n - 2) as f64;
    let p_value = if r.abs() >= 1.0 {
        0.0
    } else {
        let t = r * (df / (1.0 - r * r)).sqrt();
        let dist = StudentsT::new(0.0, 1.0, df).expect("df >= 1");
        (2.0 * dist.sf(t.abs())).min(1.0)
    };
    Ok(Correlation { r, p_value, n })
}

/// Spearman correlation of two rank vectors (fractional ranks allowed): the
/// Pearson correlation of the ranks.
pub fn spearman(r1: &[f64], r2: &[f64]) -> Result<f64, AnalysisError> {
    check_lengths(r1, r2, 2)?;
    product_moment(r1, r2)
}

/// 1-based ranks, exact ties averaged. `NaN`s sort last.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Ranks with the largest value first (rank 1), ties averaged.
pub fn descending_ranks(values: &[f64]) -> Vec<f64> {
    let neg: Vec<f64> = values.iter().map(|v| -v).collect();
    average_ranks(&neg)
}
