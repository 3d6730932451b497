//! Generated corpora for exercising the study runners.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::mini::skeleton;
use crate::apt::default_apt_pairs;
use crate::corpus::{RankedPair, StudyCorpus};
use crate::rules::{check_hard, feature_delta, ConstraintSet};
use crate::spec::{
    canonicalize, Aggregate, Channel, Encoding, FieldDef, FieldType, Mark, ScaleType, Task,
    VizSpec,
};

pub const REPLICA_PAPER: &str = "replica_apt";
pub const ENTROPY_PAPER: &str = "entropy_only";

/// Pair counts of the generated papers in the twelve-paper corpus.
const VARIED_COUNTS: [usize; 10] = [1, 2, 3, 4, 6, 8, 10, 12, 14, 16];

fn field_pool() -> Vec<(FieldDef, &'static [ScaleType])> {
    const NUM: &[ScaleType] = &[ScaleType::Linear, ScaleType::Log];
    const LIN: &[ScaleType] = &[ScaleType::Linear];
    const CAT: &[ScaleType] = &[ScaleType::Categorical, ScaleType::Ordinal];
    vec![
        (FieldDef::number("price", 200, 5.0, 900.0), NUM),
        (FieldDef::number("score", 60, 0.0, 10.0), LIN),
        (FieldDef::number("change", 80, -20.0, 20.0), LIN),
        (FieldDef::categorical("region", FieldType::String, 4), CAT),
        (FieldDef::categorical("product", FieldType::String, 14), CAT),
        (FieldDef::categorical("day", FieldType::Datetime, 30), LIN),
    ]
}

fn random_encoding(rng: &mut ChaCha8Rng, channel: Channel, pool: &[(FieldDef, &[ScaleType])]) -> Encoding {
    let (field, scales) = pool.choose(rng).expect("non-empty pool");
    let scale = *scales.choose(rng).expect("non-empty scales");
    let enc = Encoding::field(channel, field.clone(), scale);
    if field.field_type == FieldType::Number && rng.gen_bool(0.3) {
        enc.with_aggregate(Aggregate::Mean)
    } else {
        enc
    }
}

fn valid(spec: &VizSpec, set: &ConstraintSet) -> bool {
    spec.validate().is_ok()
        && check_hard(spec, set).is_empty()
        && {
            // one field per encoding, no field used twice
            let mut names: Vec<&str> = spec
                .encodings
                .iter()
                .filter_map(|e| e.field.as_ref().map(|f| f.name.as_str()))
                .collect();
            let n = names.len();
            names.sort_unstable();
            names.dedup();
            names.len() == n
        }
}

fn random_spec(rng: &mut ChaCha8Rng, set: &ConstraintSet) -> VizSpec {
    let pool = field_pool();
    loop {
        let mark = *Mark::ALL.choose(rng).expect("marks");
        let task = *Task::ALL.choose(rng).expect("tasks");
        let extra = rng.gen_range(0..=1);
        let mut channels = vec![Channel::X, Channel::Y];
        if extra == 1 {
            channels.push(*[Channel::Color, Channel::Size, Channel::Shape].choose(rng).expect("channels"));
        }
        let encodings = channels
            .into_iter()
            .map(|c| random_encoding(rng, c, &pool))
            .collect();
        let spec = canonicalize(&VizSpec::new(mark, task, encodings));
        if valid(&spec, set) {
            return spec;
        }
    }
}

/// One local edit: a new mark, a moved encoding, a new scale, or a toggled
/// aggregate.
fn mutate(rng: &mut ChaCha8Rng, spec: &VizSpec) -> VizSpec {
    let mut out = spec.clone();
    match rng.gen_range(0..4) {
        0 => out.mark = *Mark::ALL.choose(rng).expect("marks"),
        1 => {
            let i = rng.gen_range(0..out.encodings.len());
            let used: Vec<Channel> = out.encodings.iter().map(|e| e.channel).collect();
            let free: Vec<Channel> = [Channel::X, Channel::Y, Channel::Color, Channel::Size, Channel::Shape]
                .into_iter()
                .filter(|c| !used.contains(c))
                .collect();
            if let Some(&c) = free.choose(rng) {
                out.encodings[i].channel = c;
            }
        }
        2 => {
            let i = rng.gen_range(0..out.encodings.len());
            let enc = &mut out.encodings[i];
            let choices: &[ScaleType] = match enc.field.as_ref().map(|f| f.field_type) {
                Some(FieldType::Number) => &[ScaleType::Linear, ScaleType::Log],
                Some(FieldType::String) => &[ScaleType::Categorical, ScaleType::Ordinal],
                _ => &[ScaleType::Linear, ScaleType::Ordinal],
            };
            enc.scale_type = *choices.choose(rng).expect("scales");
        }
        _ => {
            let i = rng.gen_range(0..out.encodings.len());
            let enc = &mut out.encodings[i];
            if enc.field.as_ref().map(|f| f.field_type) == Some(FieldType::Number) {
                enc.aggregate = if enc.is_aggregated() {
                    None
                } else {
                    Some(Aggregate::Mean)
                };
            }
        }
    }
    canonicalize(&out)
}

/// A random ranked pair whose designs differ by one edit and featurize
/// differently.
pub fn random_pair(rng: &mut ChaCha8Rng, set: &ConstraintSet, paper_id: &str) -> RankedPair {
    loop {
        let a = random_spec(rng, set);
        let b = mutate(rng, &a);
        if !valid(&b, set) || a == b {
            continue;
        }
        let mut pair = if rng.gen_bool(0.5) {
            RankedPair::new(paper_id, a, b)
        } else {
            RankedPair::new(paper_id, b, a)
        };
        if feature_delta(&pair, set).iter().all(|&d| d == 0) {
            continue;
        }
        pair.task_label = "generated".into();
        pair.metric = "synthetic".into();
        return pair;
    }
}

/// Pairs that differ only in the field's entropy, which no rule reads.
fn entropy_pairs() -> Vec<RankedPair> {
    [Mark::Bar, Mark::Point, Mark::Tick]
        .into_iter()
        .map(|mark| {
            let mut low = skeleton(mark);
            let mut high = low.clone();
            low.encodings[1].field.as_mut().expect("field").entropy = Some(0.8);
            high.encodings[1].field.as_mut().expect("field").entropy = Some(2.3);
            let mut p = RankedPair::new(ENTROPY_PAPER, low, high);
            p.task_label = "low over high entropy".into();
            p.metric = "accuracy".into();
            p
        })
        .collect()
}

/// Twelve papers: one repeating the APT pairs, one whose pairs differ only
/// in entropy, and ten random papers with growing pair counts.
pub fn synthetic_corpus(set: &ConstraintSet, seed: u64) -> StudyCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut corpus = StudyCorpus::new();
    corpus.insert_paper(REPLICA_PAPER, default_apt_pairs());
    corpus.insert_paper(ENTROPY_PAPER, entropy_pairs());
    for (i, &n) in VARIED_COUNTS.iter().enumerate() {
        let id = format!("synthetic_{:02}", i + 1);
        let pairs = (0..n).map(|_| random_pair(&mut rng, set, &id)).collect();
        corpus.insert_paper(&id, pairs);
    }
    corpus
}

fn faction_pair(paper: &str, better: Mark, worse: Mark, cardinality: u32) -> RankedPair {
    let with_card = |m: Mark| {
        let mut s = skeleton(m);
        s.encodings[1].field.as_mut().expect("field").cardinality = cardinality;
        s
    };
    let mut p = RankedPair::new(paper, with_card(better), with_card(worse));
    p.task_label = format!("{better} over {worse}");
    p.metric = "accuracy".into();
    p
}

/// Six papers in two camps: three prefer ticks to points, three the reverse.
/// Each camp member also carries one camp-neutral pair.
pub fn faction_corpus() -> StudyCorpus {
    let extras: [Option<(Mark, Mark)>; 3] = [None, Some((Mark::Bar, Mark::Rect)), Some((Mark::Line, Mark::Area))];
    let mut corpus = StudyCorpus::new();
    for (camp, (better, worse)) in [("tick", (Mark::Tick, Mark::Point)), ("point", (Mark::Point, Mark::Tick))] {
        for (i, extra) in extras.iter().enumerate() {
            let id = format!("{camp}_camp_{}", i + 1);
            let mut pairs = vec![faction_pair(&id, better, worse, 3 + i as u32)];
            if let Some((b, w)) = extra {
                pairs.push(faction_pair(&id, *b, *w, 3 + i as u32));
            }
            corpus.insert_paper(&id, pairs);
        }
    }
    corpus
}

/// Small hand-written corpus: a bar-over-line result, a color-versus-position
/// result with one non-significant comparison, and a size result.
pub fn sample_corpus() -> StudyCorpus {
    let category = FieldDef::categorical("category", FieldType::String, 5);
    let value = FieldDef::number("value", 100, 0.0, 100.0);
    let xy = |mark: Mark| {
        VizSpec::new(
            mark,
            Task::Value,
            vec![
                Encoding::field(Channel::X, category.clone(), ScaleType::Categorical),
                Encoding::field(Channel::Y, value.clone(), ScaleType::Linear),
            ],
        )
    };
    let mut saket = RankedPair::new("Saket2018task", xy(Mark::Bar), xy(Mark::Line));
    saket.task_label = "retrieve value".into();
    saket.metric = "accuracy".into();

    let series = FieldDef::categorical("series", FieldType::String, 3);
    let with_third = |channel: Channel, mark: Mark| {
        let mut s = xy(mark);
        s.task = Task::Summary;
        s.encodings
            .push(Encoding::field(channel, series.clone(), ScaleType::Categorical));
        s
    };
    let mut color_shape = RankedPair::new(
        "Kim2018assessing",
        with_third(Channel::Color, Mark::Point),
        with_third(Channel::Shape, Mark::Point),
    );
    color_shape.task_label = "compare means".into();
    color_shape.metric = "accuracy".into();
    let mut not_sig = RankedPair::new(
        "Kim2018assessing",
        with_third(Channel::Color, Mark::Bar),
        with_third(Channel::Color, Mark::Point),
    );
    not_sig.task_label = "compare means".into();
    not_sig.metric = "response time".into();
    not_sig.significant = false;

    let weight = FieldDef::number("weight", 40, 1.0, 40.0);
    let scatter = |size_scale: ScaleType, mark: Mark| {
        VizSpec::new(
            mark,
            Task::Summary,
            vec![
                Encoding::field(Channel::X, value.clone(), ScaleType::Linear),
                Encoding::field(Channel::Y, FieldDef::number("other", 100, 0.0, 50.0), ScaleType::Linear),
                Encoding::field(Channel::Size, weight.clone(), size_scale),
            ],
        )
    };
    let mut size = RankedPair::new(
        "Heer2010crowdsourcing",
        scatter(ScaleType::Linear, Mark::Point),
        scatter(ScaleType::Log, Mark::Point),
    );
    size.task_label = "estimate proportion".into();
    size.metric = "log error".into();

    let mut corpus = StudyCorpus::new();
    corpus.insert_paper("Saket2018task", vec![saket]);
    corpus.insert_paper("Kim2018assessing", vec![color_shape, not_sig]);
    corpus.insert_paper("Heer2010crowdsourcing", vec![size]);
    corpus
}
