//! Controlled experiments adding hand-made pairs to the APT baseline.
//!
//! Pairs (a)-(d) share one skeleton (quantitative x, nominal y, value task)
//! and differ only in mark:
//!
//! * (a) tick ≻ point, (b) point ≻ tick
//! * (c) line ≻ tick, (d) tick ≻ line

use serde::Serialize;

use super::shift::normalized_shift_exp;
use crate::apt::apt_corpus;
use crate::corpus::RankedPair;
use crate::error::LearnError;
use crate::learn::{train, TrainConfig, WeightModel};
use crate::rules::{featurize, ConstraintSet};
use crate::spec::{Channel, Encoding, FieldDef, FieldType, Mark, ScaleType, Task, VizSpec};

pub const MINI_PAPER_ID: &str = "mini";

/// Duplicate counts swept in experiment F.
pub const SWEEP_COUNTS: [usize; 6] = [1, 2, 3, 5, 10, 20];

pub fn skeleton(mark: Mark) -> VizSpec {
    VizSpec::new(
        mark,
        Task::Value,
        vec![
            Encoding::field(
                Channel::X,
                FieldDef::number("value", 100, 0.0, 100.0),
                ScaleType::Linear,
            ),
            Encoding::field(
                Channel::Y,
                FieldDef::categorical("category", FieldType::String, 5),
                ScaleType::Categorical,
            ),
        ],
    )
}

fn pair(better: Mark, worse: Mark) -> RankedPair {
    let mut p = RankedPair::new(MINI_PAPER_ID, skeleton(better), skeleton(worse));
    p.task_label = format!("{better} over {worse}");
    p.metric = "constructed".into();
    p
}

pub fn pair_a() -> RankedPair {
    pair(Mark::Tick, Mark::Point)
}

pub fn pair_b() -> RankedPair {
    pair(Mark::Point, Mark::Tick)
}

pub fn pair_c() -> RankedPair {
    pair(Mark::Line, Mark::Tick)
}

pub fn pair_d() -> RankedPair {
    pair(Mark::Tick, Mark::Line)
}

/// Rules that fire on `mark`'s skeleton but not on every other skeleton among
/// tick, point and line.
pub fn mark_rules(mark: Mark, set: &ConstraintSet) -> Vec<usize> {
    let own = featurize(&skeleton(mark), set).counts;
    let others: Vec<Vec<u32>> = [Mark::Tick, Mark::Point, Mark::Line]
        .into_iter()
        .filter(|m| *m != mark)
        .map(|m| featurize(&skeleton(m), set).counts)
        .collect();
    (0..set.len())
        .filter(|&i| own[i] > 0 && others.iter().any(|o| o[i] != own[i]))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShiftRow {
    pub constraint: String,
    pub baseline: f64,
    pub experimental: f64,
    pub shift: f64,
    /// Shift over the experimental model's largest absolute weight.
    pub normalized: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Experiment {
    pub id: String,
    pub added: String,
    pub rows: Vec<ShiftRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub experiment: String,
    pub property: String,
    pub observed: String,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub copies: usize,
    /// Mean |normalized shift| over pair (a)'s rules.
    pub normalized: f64,
    /// Mean |raw shift| over the same rules.
    pub raw: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub tolerance: f64,
    pub experiments: Vec<Experiment>,
    pub sweep: Vec<SweepPoint>,
    pub checks: Vec<Check>,
    pub apt_corpus_hash: String,
    pub rules_hash: String,
    pub config: TrainConfig,
}

impl ExperimentReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

struct Ctx<'a> {
    set: &'a ConstraintSet,
    cfg: &'a TrainConfig,
    apt: Vec<RankedPair>,
    baseline: WeightModel,
}

impl Ctx<'_> {
    fn train_with(&self, extra: &[RankedPair]) -> Result<WeightModel, LearnError> {
        let mut pairs = self.apt.clone();
        pairs.extend_from_slice(extra);
        train(&pairs, self.set, self.cfg)
    }

    fn shifts(&self, exp: &WeightModel) -> Vec<f64> {
        exp.weights
            .iter()
            .zip(&self.baseline.weights)
            .map(|(e, b)| e - b)
            .collect()
    }
}

fn fmt_vals(idx: &[usize], shift: &[f64]) -> String {
    let parts: Vec<String> = idx.iter().map(|&i| format!("{:.6}", shift[i])).collect();
    format!("[{}]", parts.join(", "))
}

fn mean_abs(idx: &[usize], v: &[f64]) -> f64 {
    idx.iter().map(|&i| v[i].abs()).sum::<f64>() / idx.len().max(1) as f64
}

/// Runs experiments A-F against the APT baseline and checks each against
/// its expected behaviour.
pub fn run_mini_experiments(
    set: &ConstraintSet,
    cfg: &TrainConfig,
) -> Result<ExperimentReport, LearnError> {
    let apt = apt_corpus();
    let apt_pairs = apt.significant_pairs(crate::apt::APT_PAPER_ID);
    let baseline = train(&apt_pairs, set, cfg)?;
    let tau = 1e-6 * baseline.max_abs_weight();
    let ctx = Ctx {
        set,
        cfg,
        apt: apt_pairs,
        baseline,
    };
    let tick = mark_rules(Mark::Tick, set);
    let point = mark_rules(Mark::Point, set);
    let line = mark_rules(Mark::Line, set);
    let family: Vec<usize> = {
        let mut f: Vec<usize> = tick.iter().chain(&point).chain(&line).copied().collect();
        f.sort_unstable();
        f.dedup();
        f
    };

    let all_below = |idx: &[usize], s: &[f64]| idx.iter().all(|&i| s[i] < -tau);
    let all_above = |idx: &[usize], s: &[f64]| idx.iter().all(|&i| s[i] > tau);
    let all_flat = |idx: &[usize], s: &[f64]| idx.iter().all(|&i| s[i].abs() <= tau);

    let mut experiments = Vec::new();
    let mut checks = Vec::new();
    let mut record = |id: &str, added: &str, exp: &WeightModel| -> Result<Vec<f64>, LearnError> {
        let shift = ctx.shifts(exp);
        let norm = normalized_shift_exp(&ctx.baseline, exp)?.values;
        let rows = (0..set.len())
            .filter(|&i| family.contains(&i) || shift[i].abs() > tau)
            .map(|i| ShiftRow {
                constraint: set.soft[i].name.clone(),
                baseline: ctx.baseline.weights[i],
                experimental: exp.weights[i],
                shift: shift[i],
                normalized: norm[i],
            })
            .collect();
        experiments.push(Experiment {
            id: id.into(),
            added: added.into(),
            rows,
        });
        Ok(shift)
    };
    let mut check = |exp: &str, property: &str, observed: String, passed: bool| {
        checks.push(Check {
            experiment: exp.into(),
            property: property.into(),
            observed,
            passed,
        })
    };

    // A
    let s = record("A", "(a)", &ctx.train_with(&[pair_a()])?)?;
    check("A", "tick rules decrease", fmt_vals(&tick, &s), all_below(&tick, &s));
    check("A", "point rules increase", fmt_vals(&point, &s), all_above(&point, &s));

    // B
    let s = record("B", "(b)", &ctx.train_with(&[pair_b()])?)?;
    check("B", "tick rules increase", fmt_vals(&tick, &s), all_above(&tick, &s));
    check("B", "point rules decrease", fmt_vals(&point, &s), all_below(&point, &s));

    // C
    let s = record("C", "(a) + (b)", &ctx.train_with(&[pair_a(), pair_b()])?)?;
    let max_shift = s.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    check(
        "C",
        "every rule within tolerance of baseline",
        format!("max |shift| = {max_shift:.3e}"),
        max_shift <= tau,
    );

    // D
    let s = record("D", "(a) + (c)", &ctx.train_with(&[pair_a(), pair_c()])?)?;
    check("D", "tick rules unchanged", fmt_vals(&tick, &s), all_flat(&tick, &s));
    check("D", "point rules increase", fmt_vals(&point, &s), all_above(&point, &s));
    check("D", "line rules decrease", fmt_vals(&line, &s), all_below(&line, &s));

    // E
    let s = record("E", "(a) + (d)", &ctx.train_with(&[pair_a(), pair_d()])?)?;
    let t = mean_abs(&tick, &s);
    let others = (mean_abs(&point, &s) + mean_abs(&line, &s)) / 2.0;
    let ratio = if others > 0.0 { t / others } else { f64::INFINITY };
    check(
        "E",
        "|tick shift| / mean(|point|, |line|) in [1.5, 2.5]",
        format!("{ratio:.6}"),
        (1.5..=2.5).contains(&ratio),
    );
    check("E", "tick rules decrease", fmt_vals(&tick, &s), all_below(&tick, &s));
    check(
        "E",
        "point and line rules increase",
        format!("{} {}", fmt_vals(&point, &s), fmt_vals(&line, &s)),
        all_above(&point, &s) && all_above(&line, &s),
    );

    // F
    let a_rules: Vec<usize> = {
        let mut v: Vec<usize> = tick.iter().chain(&point).copied().collect();
        v.sort_unstable();
        v
    };
    let mut sweep = Vec::new();
    for &k in &SWEEP_COUNTS {
        let extra = vec![pair_a(); k];
        let exp = ctx.train_with(&extra)?;
        let norm = normalized_shift_exp(&ctx.baseline, &exp)?.values;
        let raw = ctx.shifts(&exp);
        sweep.push(SweepPoint {
            copies: k,
            normalized: mean_abs(&a_rules, &norm),
            raw: mean_abs(&a_rules, &raw),
        });
        if k == 20 {
            record("F", "(a) x 20", &exp)?;
        }
    }
    let curve: Vec<f64> = sweep.iter().map(|p| p.normalized).collect();
    let monotone = curve.windows(2).all(|w| w[1] >= w[0]);
    check(
        "F",
        "normalized shift non-decreasing in copies",
        format!("{curve:.6?}"),
        monotone,
    );
    let at = |k: usize| sweep.iter().find(|p| p.copies == k).map(|p| p.normalized).unwrap_or(0.0);
    let (n5, n20) = (at(5), at(20));
    let growth = if n5 > 0.0 { (n20 - n5) / n5 } else { f64::INFINITY };
    check(
        "F",
        "growth from 5 to 20 copies below 25%",
        format!("{:.3}%", growth * 100.0),
        growth < 0.25,
    );

    Ok(ExperimentReport {
        tolerance: tau,
        experiments,
        sweep,
        checks,
        apt_corpus_hash: apt.content_hash(),
        rules_hash: set.content_hash(),
        config: cfg.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::shipped_rules;

    #[test]
    fn mark_rule_families() {
        let set = shipped_rules();
        let names = |m| {
            mark_rules(m, &set)
                .into_iter()
                .map(|i| set.soft[i].name.clone())
                .collect::<Vec<_>>()
        };
        assert_eq!(names(Mark::Tick), vec!["c_d_no_overlap_tick", "value_tick"]);
        assert_eq!(names(Mark::Point), vec!["c_d_no_overlap_point", "value_point"]);
        assert_eq!(names(Mark::Line), vec!["c_d_no_overlap_line", "value_line"]);
    }
}
