//! Channel-effectiveness rankings turned into training pairs.
//!
//! For every data type the ranking table lists channels from most to least
//! effective. Each adjacent step `a ≻ b` becomes one ranked pair whose two
//! designs differ only in the channel carrying the ranked field.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::corpus::{RankedPair, StudyCorpus};
use crate::spec::{Channel, Encoding, FieldDef, FieldType, Mark, ScaleType, Task, VizSpec};

pub const APT_PAPER_ID: &str = "apt";

const DEFAULT_TABLE: &str = include_str!("../data/apt_rankings.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataType {
    Quantitative,
    Ordinal,
    Nominal,
}

impl DataType {
    pub const ALL: [DataType; 3] = [DataType::Quantitative, DataType::Ordinal, DataType::Nominal];

    fn ranked_field(self) -> (FieldDef, ScaleType) {
        match self {
            DataType::Quantitative => (FieldDef::number("value", 100, 0.0, 100.0), ScaleType::Linear),
            DataType::Ordinal => (FieldDef::number("rank", 5, 1.0, 5.0), ScaleType::Ordinal),
            DataType::Nominal => (
                FieldDef::categorical("category", FieldType::String, 4),
                ScaleType::Categorical,
            ),
        }
    }
}

impl fmt::Display for DataType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DataType::Quantitative => "quantitative",
            DataType::Ordinal => "ordinal",
            DataType::Nominal => "nominal",
        })
    }
}

/// Editable ranking table, most effective channel first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelRankings {
    pub quantitative: Vec<Channel>,
    pub ordinal: Vec<Channel>,
    pub nominal: Vec<Channel>,
}

impl Default for ChannelRankings {
    fn default() -> Self {
        serde_json::from_str(DEFAULT_TABLE).expect("shipped ranking table parses")
    }
}

impl ChannelRankings {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn ranking(&self, data_type: DataType) -> &[Channel] {
        match data_type {
            DataType::Quantitative => &self.quantitative,
            DataType::Ordinal => &self.ordinal,
            DataType::Nominal => &self.nominal,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("at least one data type is required")]
pub struct EmptyDataTypes;

/// One pair per adjacent ranking step, for each requested data type.
pub fn translate_apt_baseline(
    data_types: &BTreeSet<DataType>,
    rankings: &ChannelRankings,
) -> Result<Vec<RankedPair>, EmptyDataTypes> {
    if data_types.is_empty() {
        return Err(EmptyDataTypes);
    }
    let mut pairs = Vec::new();
    for &dt in data_types {
        for step in rankings.ranking(dt).windows(2) {
            let (better, worse) = (step[0], step[1]);
            let mut pair = RankedPair::new(
                APT_PAPER_ID,
                step_spec(dt, better, worse, better),
                step_spec(dt, better, worse, worse),
            );
            pair.task_label = format!("{dt}: {better} over {worse}");
            pair.metric = "effectiveness ranking".into();
            pairs.push(pair);
        }
    }
    Ok(pairs)
}

/// All three data types with the shipped table.
pub fn default_apt_pairs() -> Vec<RankedPair> {
    let all: BTreeSet<_> = DataType::ALL.into_iter().collect();
    translate_apt_baseline(&all, &ChannelRankings::default()).expect("non-empty")
}

pub fn apt_corpus() -> StudyCorpus {
    let mut corpus = StudyCorpus::new();
    corpus.insert_paper(APT_PAPER_ID, default_apt_pairs());
    corpus
}

/// The companion encoding sits on a channel outside the step so that the only
/// difference between the two designs is where the ranked field goes.
fn step_spec(dt: DataType, a: Channel, b: Channel, placed: Channel) -> VizSpec {
    let (field, scale) = dt.ranked_field();
    let base_channel = [Channel::X, Channel::Y, Channel::Color]
        .into_iter()
        .find(|c| *c != a && *c != b)
        .expect("three candidates, two excluded");
    let companion = FieldDef::number("measure", 50, 0.0, 50.0);
    VizSpec::new(
        Mark::Bar,
        Task::Value,
        vec![
            Encoding::field(base_channel, companion, ScaleType::Linear),
            Encoding::field(placed, field, scale),
        ],
    )
}
