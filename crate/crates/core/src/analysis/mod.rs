//! Corpus-level analyses and the registry of named, runnable analyses.
//!
//! Each [`Analysis`] turns an [`AnalysisContext`] into a set of named report
//! files; the command-line tool only writes them out.

pub mod cluster;
pub mod mini;
pub mod shift;
pub mod stats;
pub mod study;
pub mod synthetic;

pub use cluster::{hier_cluster, Dendrogram, Merge};
pub use mini::{run_mini_experiments, ExperimentReport};
pub use shift::{
    coverage, default_eps, influence, normalized_shift_exp, normalized_shift_multi, sign_shift,
    CoverageVector, ShiftKind, ShiftVector,
};
pub use stats::{average_ranks, pearson, pearson_test, spearman, Correlation};
pub use study::{run_plus_one_study, run_rec_shift_study, PlusOneReport, RecShiftReport, StudyOptions};

use std::fmt::Write as _;

use crate::corpus::{RankedPair, StudyCorpus};
use crate::error::Error;
use crate::learn::{TrainConfig, WeightModel};
use crate::recommend::DatasetSchema;
use crate::report::{
    csv_document, fmt_f64, json_document, svg_dendrogram, svg_heatmap, text_document, RunManifest,
};
use crate::rules::ConstraintSet;

/// Everything an analysis may read.
pub struct AnalysisContext {
    pub corpus: StudyCorpus,
    pub baseline_pairs: Vec<RankedPair>,
    pub set: ConstraintSet,
    pub cfg: TrainConfig,
    pub options: StudyOptions,
    /// Flat-cluster counts to cut dendrograms at.
    pub cuts: Vec<usize>,
    /// Candidates per query in the recommendation-shift study.
    pub k: usize,
    pub max_fields: usize,
    pub schemas: Vec<DatasetSchema>,
    /// Model that picks the candidate lists; defaults to the rule weights.
    pub default_model: WeightModel,
    pub manifest: RunManifest,
}

/// A named report file.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportFile {
    pub name: String,
    pub contents: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisOutput {
    pub files: Vec<ReportFile>,
    /// Short human-readable summary for the terminal.
    pub summary: String,
    /// False when the analysis ran but its own checks failed.
    pub passed: bool,
}

pub trait Analysis: Send + Sync {
    fn name(&self) -> &'static str;

    fn description(&self) -> &'static str;

    fn run(&self, ctx: &AnalysisContext) -> Result<AnalysisOutput, Error>;
}

/// Every registered analysis, in the order `report` runs them.
pub fn analyses() -> Vec<Box<dyn Analysis>> {
    vec![
        Box::new(CoverageAnalysis),
        Box::new(ShiftsAnalysis),
        Box::new(InfluenceAnalysis),
        Box::new(RecShiftAnalysis),
        Box::new(MiniAnalysis),
    ]
}

pub fn analysis(name: &str) -> Result<Box<dyn Analysis>, Error> {
    analyses()
        .into_iter()
        .find(|a| a.name() == name)
        .ok_or_else(|| Error::UnknownAnalysis(name.to_string()))
}

fn file(name: &str, contents: String) -> ReportFile {
    ReportFile {
        name: name.to_string(),
        contents,
    }
}

fn plus_one(ctx: &AnalysisContext) -> Result<PlusOneReport, Error> {
    Ok(run_plus_one_study(
        &ctx.corpus,
        &ctx.baseline_pairs,
        &ctx.set,
        &ctx.cfg,
        &ctx.options,
    )?)
}

fn matrix_csv(
    manifest: &RunManifest,
    columns: &[String],
    rows: impl Iterator<Item = (String, Vec<String>)>,
) -> String {
    let mut header = vec!["paper_id"];
    header.extend(columns.iter().map(String::as_str));
    let body: Vec<Vec<String>> = rows
        .map(|(id, vals)| std::iter::once(id).chain(vals).collect())
        .collect();
    csv_document(manifest, &header, &body)
}

fn cluster_files(
    ctx: &AnalysisContext,
    stem: &str,
    d: &Option<Dendrogram>,
    out: &mut Vec<ReportFile>,
) {
    let Some(d) = d else { return };
    out.push(file(&format!("{stem}_dendrogram.json"), json_document(&ctx.manifest, d)));
    out.push(file(&format!("{stem}_dendrogram.svg"), svg_dendrogram(&ctx.manifest, d)));
    let mut header = vec!["paper_id".to_string()];
    header.extend(ctx.cuts.iter().map(|k| format!("k{k}")));
    let cuts: Vec<Vec<usize>> = ctx.cuts.iter().map(|&k| d.cut(k)).collect();
    let rows: Vec<Vec<String>> = d
        .leaf_labels
        .iter()
        .enumerate()
        .map(|(i, id)| {
            std::iter::once(id.clone())
                .chain(cuts.iter().map(|c| c[i].to_string()))
                .collect()
        })
        .collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    out.push(file(
        &format!("{stem}_clusters.csv"),
        csv_document(&ctx.manifest, &header, &rows),
    ));
}

struct CoverageAnalysis;

impl Analysis for CoverageAnalysis {
    fn name(&self) -> &'static str {
        "coverage"
    }

    fn description(&self) -> &'static str {
        "which soft rules each paper exercises, clustered"
    }

    fn run(&self, ctx: &AnalysisContext) -> Result<AnalysisOutput, Error> {
        let names = ctx.set.soft_names();
        let vectors: Vec<CoverageVector> = ctx
            .corpus
            .papers
            .keys()
            .map(|id| coverage(id, &ctx.corpus.significant_pairs(id), &ctx.set))
            .collect();
        let mut files = vec![file(
            "coverage.csv",
            matrix_csv(
                &ctx.manifest,
                &names,
                vectors
                    .iter()
                    .map(|c| (c.paper_id.clone(), c.bits.iter().map(|b| b.to_string()).collect())),
            ),
        )];
        let labels: Vec<String> = vectors.iter().map(|c| c.paper_id.clone()).collect();
        let values: Vec<Vec<f64>> = vectors
            .iter()
            .map(|c| c.bits.iter().map(|&b| b as f64).collect())
            .collect();
        files.push(file(
            "coverage_heatmap.svg",
            svg_heatmap(&ctx.manifest, &labels, &names, &values),
        ));
        let d = hier_cluster(&values, &labels).ok();
        cluster_files(ctx, "coverage", &d, &mut files);
        let covered = (0..names.len())
            .filter(|&i| vectors.iter().any(|c| c.bits[i] == 1))
            .count();
        Ok(AnalysisOutput {
            files,
            summary: format!(
                "{covered} of {} soft rules covered by {} papers",
                names.len(),
                vectors.len()
            ),
            passed: true,
        })
    }
}

struct ShiftsAnalysis;

impl Analysis for ShiftsAnalysis {
    fn name(&self) -> &'static str {
        "shifts"
    }

    fn description(&self) -> &'static str {
        "sign and normalized weight shifts of every plus-one model, clustered"
    }

    fn run(&self, ctx: &AnalysisContext) -> Result<AnalysisOutput, Error> {
        let r = plus_one(ctx)?;
        let names = &r.constraint_names;
        let mut files = vec![
            file(
                "sign_shifts.csv",
                matrix_csv(
                    &ctx.manifest,
                    names,
                    r.sign_shifts.iter().map(|s| {
                        (s.paper_id.clone(), s.values.iter().map(|v| format!("{}", *v as i32)).collect())
                    }),
                ),
            ),
            file(
                "normalized_shifts.csv",
                matrix_csv(
                    &ctx.manifest,
                    names,
                    r.normalized_shifts
                        .iter()
                        .map(|s| (s.paper_id.clone(), s.values.iter().map(|&v| fmt_f64(v)).collect())),
                ),
            ),
        ];
        let kept: Vec<String> = r.sign_columns.iter().map(|&i| names[i].clone()).collect();
        let labels: Vec<String> = r.sign_shifts.iter().map(|s| s.paper_id.clone()).collect();
        let values: Vec<Vec<f64>> = r
            .sign_shifts
            .iter()
            .map(|s| r.sign_columns.iter().map(|&i| s.values[i]).collect())
            .collect();
        files.push(file(
            "sign_heatmap.svg",
            svg_heatmap(&ctx.manifest, &labels, &kept, &values),
        ));
        cluster_files(ctx, "sign", &r.sign_dendrogram, &mut files);
        let failed: Vec<&str> = r.failed().map(|o| o.paper_id.as_str()).collect();
        let mut summary = format!(
            "{} plus-one models, {} rules shifted by at least {} paper(s)",
            r.plusones.len(),
            kept.len(),
            ctx.options.min_papers_shifted
        );
        if !failed.is_empty() {
            let _ = write!(summary, "; failed: {}", failed.join(", "));
        }
        Ok(AnalysisOutput {
            files,
            summary,
            passed: true,
        })
    }
}

struct InfluenceAnalysis;

impl Analysis for InfluenceAnalysis {
    fn name(&self) -> &'static str {
        "influence"
    }

    fn description(&self) -> &'static str {
        "L1 norm of each paper's normalized weight shift, ranked"
    }

    fn run(&self, ctx: &AnalysisContext) -> Result<AnalysisOutput, Error> {
        let r = plus_one(ctx)?;
        let rows: Vec<Vec<String>> = r
            .influence
            .iter()
            .enumerate()
            .map(|(i, e)| {
                vec![
                    (i + 1).to_string(),
                    e.paper_id.clone(),
                    fmt_f64(e.influence),
                    e.pair_count.to_string(),
                ]
            })
            .collect();
        let summary_data = serde_json::json!({
            "pair_count_correlation": r.pair_count_correlation,
            "eps": r.eps,
            "outcomes": r.outcomes,
        });
        let mut summary = String::new();
        for e in &r.influence {
            let _ = writeln!(summary, "{:>10.4}  {} ({} pairs)", e.influence, e.paper_id, e.pair_count);
        }
        match r.pair_count_correlation {
            Some(c) => {
                let _ = write!(summary, "pair count vs influence: r = {:.4}, p = {:.3e}", c.r, c.p_value);
            }
            None => summary.push_str("pair count vs influence: undefined"),
        }
        Ok(AnalysisOutput {
            files: vec![
                file(
                    "influence.csv",
                    csv_document(&ctx.manifest, &["rank", "paper_id", "influence", "pair_count"], &rows),
                ),
                file("influence_summary.json", json_document(&ctx.manifest, &summary_data)),
            ],
            summary,
            passed: true,
        })
    }
}

struct RecShiftAnalysis;

impl Analysis for RecShiftAnalysis {
    fn name(&self) -> &'static str {
        "recshift"
    }

    fn description(&self) -> &'static str {
        "how far each plus-one model reorders the default model's top-k designs"
    }

    fn run(&self, ctx: &AnalysisContext) -> Result<AnalysisOutput, Error> {
        let r = plus_one(ctx)?;
        let rec = run_rec_shift_study(
            &ctx.default_model,
            &r.baseline,
            &r.plusones,
            &ctx.schemas,
            &ctx.set,
            ctx.k,
            ctx.max_fields,
        )?;
        let rows: Vec<Vec<String>> = rec
            .papers
            .iter()
            .map(|p| {
                vec![
                    p.paper_id.clone(),
                    fmt_f64(p.mean_spearman),
                    p.queries.to_string(),
                    p.undefined.to_string(),
                    fmt_f64(p.influence),
                ]
            })
            .collect();
        let mut summary = format!(
            "{} queries ({} skipped), k = {}",
            rec.total_queries, rec.skipped_queries, rec.k
        );
        match rec.rank_correlation {
            Some(c) => {
                let _ = write!(
                    summary,
                    "; influence rank vs recommendation-shift rank: r = {:.4}, p = {:.3e}",
                    c.r, c.p_value
                );
            }
            None => summary.push_str("; rank correlation undefined"),
        }
        Ok(AnalysisOutput {
            files: vec![
                file(
                    "recshift.csv",
                    csv_document(
                        &ctx.manifest,
                        &["paper_id", "mean_spearman", "queries", "undefined", "influence"],
                        &rows,
                    ),
                ),
                file("recshift_summary.json", json_document(&ctx.manifest, &rec)),
            ],
            summary,
            passed: true,
        })
    }
}

struct MiniAnalysis;

impl Analysis for MiniAnalysis {
    fn name(&self) -> &'static str {
        "mini"
    }

    fn description(&self) -> &'static str {
        "experiments A-F: single, conflicting, overlapping and repeated pairs"
    }

    fn run(&self, ctx: &AnalysisContext) -> Result<AnalysisOutput, Error> {
        let rep = run_mini_experiments(&ctx.set, &ctx.cfg)?;
        let rows: Vec<Vec<String>> = rep
            .experiments
            .iter()
            .flat_map(|e| {
                e.rows.iter().map(move |r| {
                    vec![
                        e.id.clone(),
                        e.added.clone(),
                        r.constraint.clone(),
                        fmt_f64(r.baseline),
                        fmt_f64(r.experimental),
                        fmt_f64(r.shift),
                        fmt_f64(r.normalized),
                    ]
                })
            })
            .collect();
        let sweep: Vec<Vec<String>> = rep
            .sweep
            .iter()
            .map(|p| vec![p.copies.to_string(), fmt_f64(p.normalized), fmt_f64(p.raw)])
            .collect();
        let checks: Vec<Vec<String>> = rep
            .checks
            .iter()
            .map(|c| {
                vec![
                    c.experiment.clone(),
                    c.property.clone(),
                    c.observed.clone(),
                    if c.passed { "PASS" } else { "FAIL" }.to_string(),
                ]
            })
            .collect();
        let mut text = String::new();
        for c in &rep.checks {
            let _ = writeln!(
                text,
                "{} Exp {}: {} ({})",
                if c.passed { "PASS" } else { "FAIL" },
                c.experiment,
                c.property,
                c.observed
            );
        }
        let _ = writeln!(text, "tolerance: {:e}", rep.tolerance);
        Ok(AnalysisOutput {
            files: vec![
                file(
                    "mini_experiments.csv",
                    csv_document(
                        &ctx.manifest,
                        &["experiment", "added", "constraint", "baseline", "experimental", "shift", "normalized"],
                        &rows,
                    ),
                ),
                file(
                    "mini_sweep.csv",
                    csv_document(&ctx.manifest, &["copies", "normalized", "raw"], &sweep),
                ),
                file(
                    "mini_checks.csv",
                    csv_document(&ctx.manifest, &["experiment", "property", "observed", "result"], &checks),
                ),
                file("mini_summary.txt", text_document(&ctx.manifest, &text)),
            ],
            summary: text.trim_end().to_string(),
            passed: rep.all_passed(),
        })
    }
}
