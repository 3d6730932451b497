//! Learning soft-rule weights from ranked pairs.
//!
//! Every pair contributes the difference vector `d = f(negative) - f(positive)`;
//! a model agrees with the pair when `w·d > 0`, i.e. the positive design is
//! cheaper. Training minimizes
//!
//! ```text
//! regularization·‖w‖² + Σ_pairs [hinge(margin − w·d) + hinge(margin + w·(−d))]
//! ```
//!
//! where the second hinge is the label-mirrored copy of each pair. The loss is
//! a plain sum over pairs: a pair set and its swap then contribute a constant
//! wherever `|w·d| ≤ margin`, so conflicting evidence cancels exactly.
//!
//! Solvers live behind [`Trainer`] and are looked up by name.

mod dual_cd;
mod subgradient;

pub use dual_cd::DualCoordinateDescent;
pub use subgradient::Subgradient;

use std::collections::BTreeMap;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::corpus::RankedPair;
use crate::error::{LayoutError, LearnError};
use crate::rules::{check_hard, cost, feature_delta, featurize, ConstraintSet};

pub const DEFAULT_TRAINER: &str = "dual-cd";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub trainer: String,
    pub regularization: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub margin: f64,
    pub seed: u64,
    /// Convergence threshold on the largest projected dual gradient.
    pub tolerance: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            trainer: DEFAULT_TRAINER.to_string(),
            // Small enough that the shipped APT pairs sit strictly inside
            // their dual box, so repeating them leaves the optimum unchanged.
            regularization: 0.1,
            learning_rate: 0.05,
            epochs: 2000,
            margin: 1.0,
            seed: 0,
            tolerance: 1e-12,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), LearnError> {
        let bad = |m: &str| Err(LearnError::Config(m.to_string()));
        if !(self.regularization > 0.0 && self.regularization.is_finite()) {
            return bad("regularization must be > 0");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be > 0");
        }
        if self.epochs == 0 {
            return bad("epochs must be positive");
        }
        if !(self.margin >= 0.0 && self.margin.is_finite()) {
            return bad("margin must be >= 0");
        }
        if self.tolerance.is_nan() || self.tolerance < 0.0 {
            return bad("tolerance must be >= 0");
        }
        Ok(())
    }
}

/// Provenance carried with a model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub pair_count: usize,
    pub trainer: String,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<TrainConfig>,
}

/// Soft-rule weights in feature-vector layout order.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightModel {
    pub constraint_names: Vec<String>,
    pub weights: Vec<f64>,
    pub meta: TrainingMeta,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    weights: IndexMap<String, f64>,
    meta: TrainingMeta,
}

impl WeightModel {
    /// The hand-tuned model: each soft rule's `default_weight`.
    pub fn defaults(set: &ConstraintSet) -> Self {
        WeightModel {
            constraint_names: set.soft_names(),
            weights: set.default_weights(),
            meta: TrainingMeta {
                pair_count: 0,
                trainer: "defaults".into(),
                seed: 0,
                config: None,
            },
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weight(&self, name: &str) -> Option<f64> {
        self.constraint_names
            .iter()
            .position(|n| n == name)
            .map(|i| self.weights[i])
    }

    pub fn max_abs_weight(&self) -> f64 {
        self.weights.iter().fold(0.0, |m, w| m.max(w.abs()))
    }

    /// Same length and names as `set`'s soft rules.
    pub fn check_layout(&self, set: &ConstraintSet) -> Result<(), LayoutError> {
        check_names(&self.constraint_names, &set.soft_names())
    }

    pub fn check_same_layout(&self, other: &WeightModel) -> Result<(), LayoutError> {
        check_names(&other.constraint_names, &self.constraint_names)
    }

    pub fn scaled(&self, factor: f64) -> WeightModel {
        WeightModel {
            weights: self.weights.iter().map(|w| w * factor).collect(),
            ..self.clone()
        }
    }

    pub fn to_json(&self) -> String {
        let file = ModelFile {
            weights: self
                .constraint_names
                .iter()
                .cloned()
                .zip(self.weights.iter().copied())
                .collect(),
            meta: self.meta.clone(),
        };
        let mut s = serde_json::to_string_pretty(&file).expect("model serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        let file: ModelFile = serde_json::from_str(text)?;
        Ok(WeightModel {
            constraint_names: file.weights.keys().cloned().collect(),
            weights: file.weights.values().copied().collect(),
            meta: file.meta,
        })
    }
}

fn check_names(found: &[String], expected: &[String]) -> Result<(), LayoutError> {
    if found.len() != expected.len() {
        return Err(LayoutError::Length {
            expected: expected.len(),
            found: found.len(),
        });
    }
    for (index, (f, e)) in found.iter().zip(expected).enumerate() {
        if f != e {
            return Err(LayoutError::Name {
                index,
                expected: e.clone(),
                found: f.clone(),
            });
        }
    }
    Ok(())
}

/// Distinct non-zero difference vectors with their multiplicities, sorted.
///
/// Pairs whose designs featurize identically contribute a constant to the
/// loss and are dropped. Identical difference vectors are merged: repeating a
/// pair `k` times is the same objective as one copy with `k` times the loss.
/// Opposite difference vectors cancel: `a` copies of `d` against `b` copies
/// of `-d` leave `a - b` copies of whichever side has more.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingProblem {
    pub dim: usize,
    pub deltas: Vec<Vec<i32>>,
    pub multiplicity: Vec<u32>,
    pub pair_count: usize,
}

impl TrainingProblem {
    pub fn build(pairs: &[RankedPair], set: &ConstraintSet) -> Result<Self, LearnError> {
        if pairs.is_empty() {
            return Err(LearnError::EmptyPairs);
        }
        // keyed by the orientation whose first non-zero entry is positive
        let mut net: BTreeMap<Vec<i32>, i64> = BTreeMap::new();
        for (index, pair) in pairs.iter().enumerate() {
            if !pair.significant {
                return Err(LearnError::NotSignificant { index });
            }
            let mut violations = check_hard(&pair.positive, set);
            violations.extend(check_hard(&pair.negative, set));
            if !violations.is_empty() {
                return Err(LearnError::HardInvalid { index, violations });
            }
            let d = feature_delta(pair, set);
            match d.iter().find(|&&x| x != 0) {
                Some(&first) if first > 0 => *net.entry(d).or_default() += 1,
                Some(_) => *net.entry(d.iter().map(|x| -x).collect()).or_default() -= 1,
                None => {}
            }
        }
        let mut merged: BTreeMap<Vec<i32>, u32> = BTreeMap::new();
        for (d, count) in net {
            if count > 0 {
                merged.insert(d, count as u32);
            } else if count < 0 {
                merged.insert(d.iter().map(|x| -x).collect(), (-count) as u32);
            }
        }
        let (deltas, multiplicity) = merged.into_iter().unzip();
        Ok(TrainingProblem {
            dim: set.len(),
            deltas,
            multiplicity,
            pair_count: pairs.len(),
        })
    }
}

/// A solver for the pairwise objective.
pub trait Trainer: Send + Sync {
    fn name(&self) -> &'static str;

    fn description(&self) -> &'static str;

    fn fit(&self, problem: &TrainingProblem, cfg: &TrainConfig) -> Vec<f64>;
}

/// Every trainer, default first.
pub fn trainers() -> Vec<Box<dyn Trainer>> {
    vec![Box::new(DualCoordinateDescent), Box::new(Subgradient)]
}

pub fn trainer(name: &str) -> Result<Box<dyn Trainer>, LearnError> {
    trainers()
        .into_iter()
        .find(|t| t.name() == name)
        .ok_or_else(|| LearnError::UnknownTrainer(name.to_string()))
}

pub fn train(
    pairs: &[RankedPair],
    set: &ConstraintSet,
    cfg: &TrainConfig,
) -> Result<WeightModel, LearnError> {
    cfg.validate()?;
    let solver = trainer(&cfg.trainer)?;
    let problem = TrainingProblem::build(pairs, set)?;
    let weights = solver.fit(&problem, cfg);
    if weights.len() != set.len() {
        return Err(LayoutError::Length {
            expected: set.len(),
            found: weights.len(),
        }
        .into());
    }
    if weights.iter().any(|w| !w.is_finite()) {
        return Err(LearnError::NonFinite);
    }
    Ok(WeightModel {
        constraint_names: set.soft_names(),
        weights,
        meta: TrainingMeta {
            pair_count: problem.pair_count,
            trainer: solver.name().to_string(),
            seed: cfg.seed,
            config: Some(cfg.clone()),
        },
    })
}

/// `cost(negative) - cost(positive)`; positive when the model agrees.
pub fn rank_margin(
    pair: &RankedPair,
    model: &WeightModel,
    set: &ConstraintSet,
) -> Result<f64, LayoutError> {
    model.check_layout(set)?;
    let pos = cost(&featurize(&pair.positive, set), model)?;
    let neg = cost(&featurize(&pair.negative, set), model)?;
    Ok(neg - pos)
}

/// Fraction of pairs the model ranks correctly.
pub fn agreement_rate(
    pairs: &[RankedPair],
    model: &WeightModel,
    set: &ConstraintSet,
) -> Result<f64, LearnError> {
    if pairs.is_empty() {
        return Err(LearnError::EmptyEvaluation);
    }
    let mut agree = 0usize;
    for pair in pairs {
        if rank_margin(pair, model, set)? > 0.0 {
            agree += 1;
        }
    }
    Ok(agree as f64 / pairs.len() as f64)
}

pub(crate) fn dot(w: &[f64], d: &[i32]) -> f64 {
    w.iter().zip(d).map(|(&w, &d)| w * d as f64).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::apt::default_apt_pairs;
    use crate::rules::shipped_rules;

    #[test]
    fn registry_lookup() {
        assert_eq!(trainer(DEFAULT_TRAINER).unwrap().name(), "dual-cd");
        assert_eq!(trainer("subgradient").unwrap().name(), "subgradient");
        assert!(matches!(trainer("adam"), Err(LearnError::UnknownTrainer(_))));
        let names: Vec<_> = trainers().iter().map(|t| t.name()).collect();
        assert_eq!(names[0], DEFAULT_TRAINER);
    }

    #[test]
    fn empty_pairs_rejected() {
        let set = shipped_rules();
        assert_eq!(
            train(&[], &set, &TrainConfig::default()),
            Err(LearnError::EmptyPairs)
        );
    }

    #[test]
    fn bad_config_rejected() {
        let set = shipped_rules();
        let cfg = TrainConfig {
            regularization: 0.0,
            ..Default::default()
        };
        assert!(matches!(
            train(&default_apt_pairs(), &set, &cfg),
            Err(LearnError::Config(_))
        ));
    }

    #[test]
    fn non_significant_pairs_rejected() {
        let set = shipped_rules();
        let mut pairs = default_apt_pairs();
        pairs[2].significant = false;
        assert_eq!(
            train(&pairs, &set, &TrainConfig::default()),
            Err(LearnError::NotSignificant { index: 2 })
        );
    }

    #[test]
    fn duplicates_merge() {
        let set = shipped_rules();
        let mut pairs = default_apt_pairs();
        let n = pairs.len();
        pairs.push(pairs[0].clone());
        let problem = TrainingProblem::build(&pairs, &set).unwrap();
        assert_eq!(problem.pair_count, n + 1);
        assert_eq!(problem.multiplicity.iter().sum::<u32>() as usize, n + 1);
        assert!(problem.multiplicity.contains(&2));
    }

    #[test]
    fn opposite_pairs_cancel() {
        let set = shipped_rules();
        let apt = default_apt_pairs();
        let p = apt[0].clone();
        let mut pairs = vec![p.clone(), p.swapped(), p.clone(), apt[1].clone()];
        let problem = TrainingProblem::build(&pairs, &set).unwrap();
        assert_eq!(problem.multiplicity, vec![1, 1]);
        assert!(problem.deltas.contains(&feature_delta(&p, &set)));
        pairs.push(p.swapped());
        pairs.push(p.swapped());
        let problem = TrainingProblem::build(&pairs, &set).unwrap();
        assert!(problem.deltas.contains(&feature_delta(&p.swapped(), &set)));
        assert_eq!(problem.pair_count, 6);
    }

    #[test]
    fn model_json_round_trip_keeps_order() {
        let set = shipped_rules();
        let model = train(&default_apt_pairs(), &set, &TrainConfig::default()).unwrap();
        let text = model.to_json();
        let back = WeightModel::from_json(&text).unwrap();
        assert_eq!(back, model);
        back.check_layout(&set).unwrap();
        let first_key = text.lines().nth(2).unwrap().trim();
        assert!(first_key.starts_with("\"aggregate\""), "{first_key}");
    }

    #[test]
    fn layout_mismatch_detected() {
        let set = shipped_rules();
        let mut model = WeightModel::defaults(&set);
        model.constraint_names.swap(0, 1);
        assert!(matches!(
            model.check_layout(&set),
            Err(LayoutError::Name { index: 0, .. })
        ));
        model.constraint_names.pop();
        assert!(matches!(model.check_layout(&set), Err(LayoutError::Length { .. })));
    }
}
