//! Ranked pairs and the versioned study-corpus file format.
//!
//! ```json
//! {"schema_version": "1",
//!  "papers": {"Saket2018task": [
//!     {"positive": {...}, "negative": {...},
//!      "task_label": "retrieve value", "metric": "accuracy", "significant": true}]}}
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::CorpusError;
use crate::spec::{is_identifier, VizSpec};

pub const SCHEMA_VERSION: &str = "1";

/// A design comparison where `positive` performed better than `negative`.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedPair {
    pub positive: VizSpec,
    pub negative: VizSpec,
    pub paper_id: String,
    pub task_label: String,
    pub metric: String,
    pub significant: bool,
}

impl RankedPair {
    pub fn new(paper_id: &str, positive: VizSpec, negative: VizSpec) -> Self {
        RankedPair {
            positive,
            negative,
            paper_id: paper_id.to_string(),
            task_label: String::new(),
            metric: String::new(),
            significant: true,
        }
    }

    pub fn swapped(&self) -> Self {
        RankedPair {
            positive: self.negative.clone(),
            negative: self.positive.clone(),
            ..self.clone()
        }
    }

    pub fn with_paper(mut self, paper_id: &str) -> Self {
        self.paper_id = paper_id.to_string();
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct PairRecord {
    positive: VizSpec,
    negative: VizSpec,
    #[serde(default)]
    task_label: String,
    #[serde(default)]
    metric: String,
    significant: bool,
}

#[derive(Debug, Serialize, Deserialize)]
struct CorpusFile {
    schema_version: String,
    papers: BTreeMap<String, Vec<PairRecord>>,
}

/// Papers keyed by id, in id order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StudyCorpus {
    pub schema_version: String,
    pub papers: BTreeMap<String, Vec<RankedPair>>,
}

/// Per-paper ingest counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PaperSummary {
    pub paper_id: String,
    pub pairs: usize,
    pub significant: usize,
    pub excluded: usize,
}

impl StudyCorpus {
    pub fn new() -> Self {
        StudyCorpus {
            schema_version: SCHEMA_VERSION.to_string(),
            papers: BTreeMap::new(),
        }
    }

    /// Inserts a paper, rewriting each pair's `paper_id` to the key.
    pub fn insert_paper(&mut self, paper_id: &str, pairs: Vec<RankedPair>) {
        let pairs = pairs.into_iter().map(|p| p.with_paper(paper_id)).collect();
        self.papers.insert(paper_id.to_string(), pairs);
    }

    pub fn paper_ids(&self) -> impl Iterator<Item = &str> {
        self.papers.keys().map(String::as_str)
    }

    /// Pairs admitted to training.
    pub fn significant_pairs(&self, paper_id: &str) -> Vec<RankedPair> {
        self.papers
            .get(paper_id)
            .map(|ps| ps.iter().filter(|p| p.significant).cloned().collect())
            .unwrap_or_default()
    }

    pub fn summary(&self) -> Vec<PaperSummary> {
        self.papers
            .iter()
            .map(|(id, pairs)| {
                let significant = pairs.iter().filter(|p| p.significant).count();
                PaperSummary {
                    paper_id: id.clone(),
                    pairs: pairs.len(),
                    significant,
                    excluded: pairs.len() - significant,
                }
            })
            .collect()
    }

    /// Stable hex digest of the serialized corpus.
    pub fn content_hash(&self) -> String {
        crate::report::sha256_hex(serialize_corpus(self).as_bytes())
    }
}

pub fn parse_corpus(path: impl AsRef<Path>) -> Result<StudyCorpus, CorpusError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_corpus_str(&text)
}

pub fn parse_corpus_str(text: &str) -> Result<StudyCorpus, CorpusError> {
    let file: CorpusFile = serde_json::from_str(text).map_err(|e| CorpusError::Json {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if file.schema_version != SCHEMA_VERSION {
        return Err(CorpusError::Version(file.schema_version));
    }
    let mut corpus = StudyCorpus::new();
    for (paper_id, records) in file.papers {
        if !is_identifier(&paper_id) {
            return Err(CorpusError::PaperId(paper_id));
        }
        let mut pairs = Vec::with_capacity(records.len());
        for (index, rec) in records.into_iter().enumerate() {
            for (side, spec) in [("positive", &rec.positive), ("negative", &rec.negative)] {
                spec.validate().map_err(|source| CorpusError::InvalidSpec {
                    paper: paper_id.clone(),
                    index,
                    side,
                    source,
                })?;
            }
            if rec.positive.canonical_key() == rec.negative.canonical_key() {
                return Err(CorpusError::IdenticalPair {
                    paper: paper_id.clone(),
                    index,
                });
            }
            pairs.push(RankedPair {
                positive: rec.positive,
                negative: rec.negative,
                paper_id: paper_id.clone(),
                task_label: rec.task_label,
                metric: rec.metric,
                significant: rec.significant,
            });
        }
        corpus.papers.insert(paper_id, pairs);
    }
    Ok(corpus)
}

/// Pretty JSON in the corpus file format.
pub fn serialize_corpus(corpus: &StudyCorpus) -> String {
    let file = CorpusFile {
        schema_version: corpus.schema_version.clone(),
        papers: corpus
            .papers
            .iter()
            .map(|(id, pairs)| {
                let recs = pairs
                    .iter()
                    .map(|p| PairRecord {
                        positive: p.positive.clone(),
                        negative: p.negative.clone(),
                        task_label: p.task_label.clone(),
                        metric: p.metric.clone(),
                        significant: p.significant,
                    })
                    .collect();
                (id.clone(), recs)
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("corpus serializes");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAKET: &str = r#"{
      "schema_version": "1",
      "papers": {
        "Saket2018task": [{
          "positive": {"mark": "bar", "task": "value", "encodings": [
            {"channel": "x", "field": {"name": "category", "field_type": "string", "cardinality": 5},
             "scale_type": "categorical", "aggregate": null, "binned": false},
            {"channel": "y", "field": {"name": "value", "field_type": "number", "cardinality": 100,
             "min_value": 0, "max_value": 100}, "scale_type": "linear", "aggregate": null, "binned": false}]},
          "negative": {"mark": "line", "task": "value", "encodings": [
            {"channel": "x", "field": {"name": "category", "field_type": "string", "cardinality": 5},
             "scale_type": "categorical", "aggregate": null, "binned": false},
            {"channel": "y", "field": {"name": "value", "field_type": "number", "cardinality": 100,
             "min_value": 0, "max_value": 100}, "scale_type": "linear", "aggregate": null, "binned": false}]},
          "task_label": "retrieve value", "metric": "accuracy", "significant": true
        }]
      }
    }"#;

    #[test]
    fn parses_single_pair_paper() {
        let corpus = parse_corpus_str(SAKET).unwrap();
        assert_eq!(corpus.papers.len(), 1);
        let pairs = &corpus.papers["Saket2018task"];
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].paper_id, "Saket2018task");
        assert_eq!(pairs[0].metric, "accuracy");
        assert!(pairs[0].significant);
    }

    #[test]
    fn empty_papers_map() {
        let corpus = parse_corpus_str(r#"{"schema_version": "1", "papers": {}}"#).unwrap();
        assert!(corpus.papers.is_empty());
    }

    #[test]
    fn duplicate_channel_names_pair_index() {
        let text = SAKET.replacen(r#""channel": "y""#, r#""channel": "x""#, 1);
        match parse_corpus_str(&text) {
            Err(CorpusError::InvalidSpec { paper, index, side, .. }) => {
                assert_eq!(paper, "Saket2018task");
                assert_eq!(index, 0);
                assert_eq!(side, "positive");
            }
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn malformed_json_reports_location() {
        let err = parse_corpus_str("{\"schema_version\": \"1\",\n \"papers\": [}").unwrap_err();
        match err {
            CorpusError::Json { line, .. } => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn identical_sides_rejected() {
        let text = SAKET.replacen(r#""mark": "line""#, r#""mark": "bar""#, 1);
        assert!(matches!(
            parse_corpus_str(&text),
            Err(CorpusError::IdenticalPair { .. })
        ));
    }

    #[test]
    fn wrong_version_rejected() {
        let err = parse_corpus_str(r#"{"schema_version": "2", "papers": {}}"#).unwrap_err();
        assert!(matches!(err, CorpusError::Version(_)));
    }

    #[test]
    fn non_significant_pairs_are_kept_but_excluded() {
        let text = SAKET.replace(r#""significant": true"#, r#""significant": false"#);
        let corpus = parse_corpus_str(&text).unwrap();
        assert_eq!(corpus.papers["Saket2018task"].len(), 1);
        assert!(corpus.significant_pairs("Saket2018task").is_empty());
        assert_eq!(corpus.summary()[0].excluded, 1);
    }

    #[test]
    fn serialize_round_trips() {
        let corpus = parse_corpus_str(SAKET).unwrap();
        let again = parse_corpus_str(&serialize_corpus(&corpus)).unwrap();
        assert_eq!(corpus, again);
    }
}
