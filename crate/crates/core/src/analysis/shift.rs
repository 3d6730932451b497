use serde::Serialize;

use crate::corpus::RankedPair;
use crate::error::{AnalysisError, LayoutError};
use crate::learn::WeightModel;
use crate::rules::{featurize, ConstraintSet};

/// Which soft rules a paper's designs exercise at all.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoverageVector {
    pub paper_id: String,
    pub bits: Vec<u8>,
}

/// A rule counts as covered when it matches either design of any pair.
pub fn coverage(paper_id: &str, pairs: &[RankedPair], set: &ConstraintSet) -> CoverageVector {
    let mut bits = vec![0u8; set.len()];
    for pair in pairs {
        for spec in [&pair.positive, &pair.negative] {
            for (b, &c) in bits.iter_mut().zip(&featurize(spec, set).counts) {
                if c > 0 {
                    *b = 1;
                }
            }
        }
    }
    CoverageVector {
        paper_id: paper_id.to_string(),
        bits,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftKind {
    /// Per-rule direction, `{-1, 0, 1}`.
    Sign,
    /// Shift divided by the experimental model's largest absolute weight.
    NormalizedExp,
    /// Shift divided by the rule's largest absolute weight across models.
    NormalizedMulti,
}

impl ShiftKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ShiftKind::Sign => "sign",
            ShiftKind::NormalizedExp => "normalized_exp",
            ShiftKind::NormalizedMulti => "normalized_multi",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShiftVector {
    pub paper_id: String,
    pub kind: ShiftKind,
    pub values: Vec<f64>,
    /// Set when the normalizer was zero and the vector was defined as zeros.
    pub degenerate: bool,
}

impl ShiftVector {
    pub fn labelled(mut self, paper_id: &str) -> Self {
        self.paper_id = paper_id.to_string();
        self
    }
}

/// `10⁻⁶ · max|b|`: shifts below this count as no shift.
pub fn default_eps(baseline: &WeightModel) -> f64 {
    1e-6 * baseline.max_abs_weight()
}

/// `s_i = sign(p_i − b_i)`, with `|p_i − b_i| < eps` mapped to 0.
pub fn sign_shift(
    baseline: &WeightModel,
    plusone: &WeightModel,
    eps: f64,
) -> Result<ShiftVector, LayoutError> {
    baseline.check_same_layout(plusone)?;
    let values = baseline
        .weights
        .iter()
        .zip(&plusone.weights)
        .map(|(b, p)| {
            let d = p - b;
            if d.abs() < eps || d == 0.0 {
                0.0
            } else {
                d.signum()
            }
        })
        .collect();
    Ok(ShiftVector {
        paper_id: String::new(),
        kind: ShiftKind::Sign,
        values,
        degenerate: false,
    })
}

/// `n_i = (e_i − b_i) / e_max`, with `e_max` the experimental model's largest
/// absolute weight. A zero `e_max` yields zeros and sets `degenerate`.
pub fn normalized_shift_exp(
    baseline: &WeightModel,
    experimental: &WeightModel,
) -> Result<ShiftVector, LayoutError> {
    baseline.check_same_layout(experimental)?;
    let e_max = experimental.max_abs_weight();
    let degenerate = e_max == 0.0;
    if degenerate {
        log::warn!("experimental model has all-zero weights; normalized shift defined as zero");
    }
    let values = baseline
        .weights
        .iter()
        .zip(&experimental.weights)
        .map(|(b, e)| if degenerate { 0.0 } else { (e - b) / e_max })
        .collect();
    Ok(ShiftVector {
        paper_id: String::new(),
        kind: ShiftKind::NormalizedExp,
        values,
        degenerate,
    })
}

/// Per-rule `max(|p¹_i|, …, |pᵏ_i|, |b_i|)`.
pub fn per_rule_max(
    baseline: &WeightModel,
    plusones: &[&WeightModel],
) -> Result<Vec<f64>, LayoutError> {
    let mut w_max: Vec<f64> = baseline.weights.iter().map(|w| w.abs()).collect();
    for m in plusones {
        baseline.check_same_layout(m)?;
        for (acc, w) in w_max.iter_mut().zip(&m.weights) {
            *acc = acc.max(w.abs());
        }
    }
    Ok(w_max)
}

/// `n_i = (p_i − b_i) / w_max,i` against a precomputed [`per_rule_max`];
/// rules with `w_max,i = 0` get 0.
pub fn normalized_shift_with(
    baseline: &WeightModel,
    plusone: &WeightModel,
    w_max: &[f64],
) -> Result<ShiftVector, LayoutError> {
    baseline.check_same_layout(plusone)?;
    if w_max.len() != baseline.len() {
        return Err(LayoutError::Length {
            expected: baseline.len(),
            found: w_max.len(),
        });
    }
    let values = baseline
        .weights
        .iter()
        .zip(&plusone.weights)
        .zip(w_max)
        .map(|((b, p), &m)| if m == 0.0 { 0.0 } else { (p - b) / m })
        .collect();
    Ok(ShiftVector {
        paper_id: String::new(),
        kind: ShiftKind::NormalizedMulti,
        values,
        degenerate: false,
    })
}

/// Normalized shift of `target` among all plus-one models.
pub fn normalized_shift_multi(
    baseline: &WeightModel,
    plusones: &[(String, WeightModel)],
    target: &str,
) -> Result<ShiftVector, AnalysisError> {
    if plusones.is_empty() {
        return Err(AnalysisError::TooFew {
            needed: 1,
            found: 0,
        });
    }
    let (_, model) = plusones
        .iter()
        .find(|(id, _)| id == target)
        .ok_or_else(|| AnalysisError::UnknownPaper(target.to_string()))?;
    let refs: Vec<&WeightModel> = plusones.iter().map(|(_, m)| m).collect();
    let w_max = per_rule_max(baseline, &refs)?;
    Ok(normalized_shift_with(baseline, model, &w_max)?.labelled(target))
}

/// L1 norm of a multi-model normalized shift.
pub fn influence(shift: &ShiftVector) -> Result<f64, AnalysisError> {
    if shift.kind != ShiftKind::NormalizedMulti {
        return Err(AnalysisError::WrongKind {
            expected: ShiftKind::NormalizedMulti.as_str(),
            found: shift.kind.as_str(),
        });
    }
    Ok(shift.values.iter().map(|v| v.abs()).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learn::TrainingMeta;

    fn model(w: &[f64]) -> WeightModel {
        WeightModel {
            constraint_names: (0..w.len()).map(|i| format!("r{i}")).collect(),
            weights: w.to_vec(),
            meta: TrainingMeta {
                pair_count: 0,
                trainer: "test".into(),
                seed: 0,
                config: None,
            },
        }
    }

    #[test]
    fn sign_examples() {
        let b = model(&[0.0, 0.0, 0.0]);
        let p = model(&[0.5, -0.2, 0.0]);
        assert_eq!(sign_shift(&b, &p, 1e-6).unwrap().values, vec![1.0, -1.0, 0.0]);
        assert_eq!(sign_shift(&b, &b, 1e-6).unwrap().values, vec![0.0; 3]);
    }

    #[test]
    fn exp_normalization() {
        let b = model(&[0.0, 0.0]);
        let e = model(&[2.0, -4.0]);
        let n = normalized_shift_exp(&b, &e).unwrap();
        assert_eq!(n.values, vec![0.5, -1.0]);
        assert!(!n.degenerate);
        let z = normalized_shift_exp(&e, &b).unwrap();
        assert!(z.degenerate);
        assert_eq!(z.values, vec![0.0, 0.0]);
    }

    #[test]
    fn multi_normalization() {
        let b = model(&[1.0, 0.0]);
        let ps = vec![
            ("p1".to_string(), model(&[3.0, 0.0])),
            ("p2".to_string(), model(&[-2.0, 0.0])),
        ];
        let n = normalized_shift_multi(&b, &ps, "p1").unwrap();
        assert_eq!(n.values, vec![2.0 / 3.0, 0.0]);
        assert!((influence(&n).unwrap() - 0.6667).abs() < 1e-4);
        assert!(matches!(
            normalized_shift_multi(&b, &ps, "p3"),
            Err(AnalysisError::UnknownPaper(_))
        ));
    }

    #[test]
    fn influence_needs_multi_kind() {
        let b = model(&[0.0, 0.0]);
        let s = sign_shift(&b, &model(&[0.5, -0.5]), 0.0).unwrap();
        assert!(matches!(influence(&s), Err(AnalysisError::WrongKind { .. })));
        let ps = vec![("p".to_string(), model(&[0.5, -0.5]))];
        assert_eq!(influence(&normalized_shift_multi(&b, &ps, "p").unwrap()).unwrap(), 2.0);
    }
}
