use rayon::prelude::*;
use serde::Serialize;

use super::cluster::{hier_cluster, Dendrogram};
use super::shift::{
    coverage, default_eps, influence, normalized_shift_with, per_rule_max, sign_shift,
    CoverageVector, ShiftVector,
};
use super::stats::{descending_ranks, pearson_test, spearman, Correlation};
use crate::corpus::{RankedPair, StudyCorpus};
use crate::error::{AnalysisError, LearnError};
use crate::learn::{train, TrainConfig, WeightModel};
use crate::recommend::{
    attribute_combinations, candidates, fractional_ranks, rank_candidates, DatasetSchema,
};
use crate::rules::{cost_with, featurize, ConstraintSet};

/// Knobs for [`run_plus_one_study`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyOptions {
    /// Sign-shift clustering keeps rules shifted by at least this many papers.
    /// The default 1 drops rules no paper moves.
    pub min_papers_shifted: usize,
}

impl Default for StudyOptions {
    fn default() -> Self {
        StudyOptions {
            min_papers_shifted: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PaperOutcome {
    pub paper_id: String,
    /// Significant pairs contributed.
    pub pair_count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InfluenceEntry {
    pub paper_id: String,
    pub influence: f64,
    pub pair_count: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct PlusOneReport {
    pub constraint_names: Vec<String>,
    #[serde(skip)]
    pub baseline: WeightModel,
    /// Successful plus-one models, in paper-id order.
    #[serde(skip)]
    pub plusones: Vec<(String, WeightModel)>,
    pub outcomes: Vec<PaperOutcome>,
    pub coverage: Vec<CoverageVector>,
    pub eps: f64,
    pub sign_shifts: Vec<ShiftVector>,
    pub normalized_shifts: Vec<ShiftVector>,
    /// Descending by influence, ties by paper id.
    pub influence: Vec<InfluenceEntry>,
    pub coverage_dendrogram: Option<Dendrogram>,
    /// Rules kept for the sign-shift clustering.
    pub sign_columns: Vec<usize>,
    pub sign_dendrogram: Option<Dendrogram>,
    pub pair_count_correlation: Option<Correlation>,
}

impl PlusOneReport {
    pub fn failed(&self) -> impl Iterator<Item = &PaperOutcome> {
        self.outcomes.iter().filter(|o| o.error.is_some())
    }
}

/// Baseline plus one model per paper, trained in parallel, and everything
/// derived from their weight differences.
pub fn run_plus_one_study(
    corpus: &StudyCorpus,
    baseline_pairs: &[RankedPair],
    set: &ConstraintSet,
    cfg: &TrainConfig,
    opts: &StudyOptions,
) -> Result<PlusOneReport, LearnError> {
    let baseline = train(baseline_pairs, set, cfg)?;
    let ids: Vec<&str> = corpus.paper_ids().collect();

    let trained: Vec<(String, usize, Result<WeightModel, LearnError>)> = ids
        .par_iter()
        .map(|&id| {
            let extra = corpus.significant_pairs(id);
            let mut pairs = baseline_pairs.to_vec();
            pairs.extend(extra.iter().cloned());
            (id.to_string(), extra.len(), train(&pairs, set, cfg))
        })
        .collect();

    let mut outcomes = Vec::new();
    let mut plusones = Vec::new();
    for (id, n, result) in trained {
        match result {
            Ok(model) => {
                outcomes.push(PaperOutcome {
                    paper_id: id.clone(),
                    pair_count: n,
                    error: None,
                });
                plusones.push((id, model));
            }
            Err(e) => {
                log::warn!("paper {id}: training failed: {e}");
                outcomes.push(PaperOutcome {
                    paper_id: id,
                    pair_count: n,
                    error: Some(e.to_string()),
                });
            }
        }
    }

    let coverage: Vec<CoverageVector> = corpus
        .papers
        .iter()
        .map(|(id, pairs)| {
            let sig: Vec<RankedPair> = pairs.iter().filter(|p| p.significant).cloned().collect();
            coverage(id, &sig, set)
        })
        .collect();

    let eps = default_eps(&baseline);
    let refs: Vec<&WeightModel> = plusones.iter().map(|(_, m)| m).collect();
    let w_max = per_rule_max(&baseline, &refs)?;
    let mut sign_shifts = Vec::new();
    let mut normalized_shifts = Vec::new();
    for (id, m) in &plusones {
        sign_shifts.push(sign_shift(&baseline, m, eps)?.labelled(id));
        normalized_shifts.push(normalized_shift_with(&baseline, m, &w_max)?.labelled(id));
    }

    let pair_counts: Vec<usize> = outcomes
        .iter()
        .filter(|o| o.error.is_none())
        .map(|o| o.pair_count)
        .collect();
    let mut influence_rows: Vec<InfluenceEntry> = normalized_shifts
        .iter()
        .zip(&pair_counts)
        .map(|(s, &n)| InfluenceEntry {
            paper_id: s.paper_id.clone(),
            influence: influence(s).expect("normalized_multi kind"),
            pair_count: n,
        })
        .collect();
    let pair_count_correlation = {
        let x: Vec<f64> = influence_rows.iter().map(|r| r.pair_count as f64).collect();
        let y: Vec<f64> = influence_rows.iter().map(|r| r.influence).collect();
        pearson_test(&x, &y).ok()
    };
    influence_rows.sort_by(|a, b| {
        b.influence
            .total_cmp(&a.influence)
            .then_with(|| a.paper_id.cmp(&b.paper_id))
    });

    let coverage_dendrogram = {
        let vecs: Vec<Vec<f64>> = coverage
            .iter()
            .map(|c| c.bits.iter().map(|&b| b as f64).collect())
            .collect();
        let labels: Vec<String> = coverage.iter().map(|c| c.paper_id.clone()).collect();
        hier_cluster(&vecs, &labels).ok()
    };

    let sign_columns: Vec<usize> = (0..set.len())
        .filter(|&i| {
            let moved = sign_shifts.iter().filter(|s| s.values[i] != 0.0).count();
            moved >= opts.min_papers_shifted
        })
        .collect();
    let sign_dendrogram = {
        let vecs: Vec<Vec<f64>> = sign_shifts
            .iter()
            .map(|s| sign_columns.iter().map(|&i| s.values[i]).collect())
            .collect();
        let labels: Vec<String> = sign_shifts.iter().map(|s| s.paper_id.clone()).collect();
        hier_cluster(&vecs, &labels).ok()
    };

    Ok(PlusOneReport {
        constraint_names: set.soft_names(),
        baseline,
        plusones,
        outcomes,
        coverage,
        eps,
        sign_shifts,
        normalized_shifts,
        influence: influence_rows,
        coverage_dendrogram,
        sign_columns,
        sign_dendrogram,
        pair_count_correlation,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecShiftEntry {
    pub paper_id: String,
    pub mean_spearman: f64,
    /// Queries where the correlation was defined.
    pub queries: usize,
    /// Queries where one ranking had no spread and the other did.
    pub undefined: usize,
    pub influence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecShiftReport {
    pub k: usize,
    pub max_fields: usize,
    pub total_queries: usize,
    /// Queries with fewer than two candidates.
    pub skipped_queries: usize,
    /// In paper-id order.
    pub papers: Vec<RecShiftEntry>,
    /// Influence rank against recommendation-shift rank.
    pub rank_correlation: Option<Correlation>,
}

/// For every query: the default model's top `k`, reranked by the baseline and
/// by each plus-one model, compared with Spearman correlation.
pub fn run_rec_shift_study(
    default_model: &WeightModel,
    baseline: &WeightModel,
    plusones: &[(String, WeightModel)],
    schemas: &[DatasetSchema],
    set: &ConstraintSet,
    k: usize,
    max_fields: usize,
) -> Result<RecShiftReport, AnalysisError> {
    if k < 2 {
        return Err(AnalysisError::TooFew { needed: 2, found: k });
    }
    default_model.check_layout(set)?;
    baseline.check_layout(set)?;
    for (_, m) in plusones {
        m.check_layout(set)?;
    }
    let mut queries = Vec::new();
    for schema in schemas {
        for q in attribute_combinations(schema, max_fields)? {
            queries.push((schema, q));
        }
    }

    // Per query: None if skipped, else one Option<f64> per paper (None when
    // the correlation is undefined).
    let per_query: Vec<Option<Vec<Option<f64>>>> = queries
        .par_iter()
        .map(|(schema, q)| -> Result<_, AnalysisError> {
            let cands = candidates(q, schema, set)?;
            let top = rank_candidates(&cands, default_model, k)?;
            if top.len() < 2 {
                return Ok(None);
            }
            let feats: Vec<_> = top.iter().map(|r| featurize(&r.spec, set)).collect();
            let ranks = |m: &WeightModel| -> Result<Vec<f64>, AnalysisError> {
                let costs = feats
                    .iter()
                    .map(|f| cost_with(f, &m.weights))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(fractional_ranks(&costs))
            };
            let base = ranks(baseline)?;
            let mut out = Vec::with_capacity(plusones.len());
            for (_, m) in plusones {
                let r = ranks(m)?;
                out.push(if r == base {
                    Some(1.0)
                } else {
                    spearman(&base, &r).ok()
                });
            }
            Ok(Some(out))
        })
        .collect::<Result<_, _>>()?;

    let skipped_queries = per_query.iter().filter(|q| q.is_none()).count();
    let refs: Vec<&WeightModel> = plusones.iter().map(|(_, m)| m).collect();
    let w_max = per_rule_max(baseline, &refs)?;
    let mut papers = Vec::with_capacity(plusones.len());
    for (j, (id, m)) in plusones.iter().enumerate() {
        let vals: Vec<f64> = per_query.iter().flatten().filter_map(|q| q[j]).collect();
        let undefined = per_query.iter().flatten().filter(|q| q[j].is_none()).count();
        let mean = if vals.is_empty() {
            f64::NAN
        } else {
            vals.iter().sum::<f64>() / vals.len() as f64
        };
        papers.push(RecShiftEntry {
            paper_id: id.clone(),
            mean_spearman: mean,
            queries: vals.len(),
            undefined,
            influence: influence(&normalized_shift_with(baseline, m, &w_max)?)?,
        });
    }

    let rank_correlation = {
        let inf: Vec<f64> = papers.iter().map(|p| p.influence).collect();
        let shift: Vec<f64> = papers.iter().map(|p| 1.0 - p.mean_spearman).collect();
        pearson_test(&descending_ranks(&inf), &descending_ranks(&shift)).ok()
    };

    Ok(RecShiftReport {
        k,
        max_fields,
        total_queries: queries.len(),
        skipped_queries,
        papers,
        rank_correlation,
    })
}
