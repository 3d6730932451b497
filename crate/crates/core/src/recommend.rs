//! Design-space enumeration and cost ranking.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::RecommendError;
use crate::learn::WeightModel;
use crate::rules::{check_hard, cost_with, featurize, ConstraintSet, FeatureVector};
use crate::spec::{
    Aggregate, Channel, Encoding, FieldDef, FieldType, Mark, ScaleType, Task, VizSpec,
};

/// Largest number of data fields a query may bind.
pub const MAX_QUERY_FIELDS: usize = 3;

/// Channels data fields may be placed on during enumeration.
pub const DATA_CHANNELS: [Channel; 5] = [
    Channel::X,
    Channel::Y,
    Channel::Color,
    Channel::Size,
    Channel::Shape,
];

/// Costs closer than this fraction of the largest cost in a candidate list
/// count as ties. Keeps orderings stable under rescaled weights, where the
/// same sum can round differently.
pub const TIE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSchema {
    pub name: String,
    pub row_count: u64,
    pub fields: Vec<FieldDef>,
}

impl DatasetSchema {
    pub fn from_json(text: &str) -> Result<Self, RecommendError> {
        let schema: DatasetSchema = serde_json::from_str(text)
            .map_err(|e| RecommendError::InvalidSchema(e.to_string()))?;
        schema.validate()?;
        Ok(schema)
    }

    pub fn validate(&self) -> Result<(), RecommendError> {
        if self.row_count == 0 {
            return Err(RecommendError::InvalidSchema(format!(
                "{}: row_count must be positive",
                self.name
            )));
        }
        let mut seen = HashSet::new();
        for f in &self.fields {
            f.validate()
                .map_err(|e| RecommendError::InvalidSchema(format!("{}: {e}", self.name)))?;
            if !seen.insert(f.name.as_str()) {
                return Err(RecommendError::InvalidSchema(format!(
                    "{}: duplicate field {}",
                    self.name, f.name
                )));
            }
        }
        Ok(())
    }

    pub fn field(&self, name: &str) -> Option<&FieldDef> {
        self.fields.iter().find(|f| f.name == name)
    }
}

const CARS: &str = include_str!("../data/schemas/cars.json");
const MOVIES: &str = include_str!("../data/schemas/movies.json");
const WEATHER: &str = include_str!("../data/schemas/weather.json");

/// The three bundled dataset schemas: cars, movies, weather.
pub fn bundled_schemas() -> Vec<DatasetSchema> {
    [CARS, MOVIES, WEATHER]
        .iter()
        .map(|s| DatasetSchema::from_json(s).expect("bundled schema is valid"))
        .collect()
}

pub fn bundled_schema(name: &str) -> Option<DatasetSchema> {
    bundled_schemas().into_iter().find(|s| s.name == name)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Query {
    pub fields: Vec<String>,
    pub task: Task,
}

impl Query {
    pub fn new(fields: &[&str], task: Task) -> Self {
        Query {
            fields: fields.iter().map(|s| s.to_string()).collect(),
            task,
        }
    }

    /// Looks the fields up in `schema`, in query order.
    pub fn resolve(&self, schema: &DatasetSchema) -> Result<Vec<FieldDef>, RecommendError> {
        let n = self.fields.len();
        if n == 0 || n > MAX_QUERY_FIELDS {
            return Err(RecommendError::InvalidQuery(format!(
                "a query binds 1 to {MAX_QUERY_FIELDS} fields, found {n}"
            )));
        }
        let mut seen = HashSet::new();
        self.fields
            .iter()
            .map(|name| {
                if !seen.insert(name.as_str()) {
                    return Err(RecommendError::InvalidQuery(format!(
                        "field {name} appears twice"
                    )));
                }
                schema
                    .field(name)
                    .cloned()
                    .ok_or_else(|| RecommendError::UnknownField(name.clone()))
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub rank: usize,
    pub cost: f64,
    pub spec: VizSpec,
}

/// One JSON object per line.
pub fn to_json_lines(recs: &[Recommendation]) -> String {
    let mut out = String::new();
    for r in recs {
        out.push_str(&serde_json::to_string(r).expect("recommendation serializes"));
        out.push('\n');
    }
    out
}

fn scale_choices(field_type: FieldType) -> &'static [ScaleType] {
    match field_type {
        FieldType::Number => &[ScaleType::Linear, ScaleType::Log],
        FieldType::Datetime => &[ScaleType::Linear],
        FieldType::String => &[ScaleType::Categorical, ScaleType::Ordinal],
        FieldType::Boolean => &[ScaleType::Categorical],
    }
}

fn aggregate_choices(field_type: FieldType) -> &'static [Aggregate] {
    match field_type {
        FieldType::Number => &[Aggregate::None, Aggregate::Mean],
        _ => &[Aggregate::None],
    }
}

/// Every way to encode one field on one channel.
fn field_encodings(field: &FieldDef, channel: Channel) -> Vec<Encoding> {
    let mut out = Vec::new();
    for &scale in scale_choices(field.field_type) {
        for &agg in aggregate_choices(field.field_type) {
            let enc = Encoding::field(channel, field.clone(), scale);
            out.push(if agg == Aggregate::None {
                enc
            } else {
                enc.with_aggregate(agg)
            });
        }
    }
    out
}

/// Ordered channel assignments: distinct channels, one per field.
fn channel_assignments(n: usize) -> Vec<Vec<Channel>> {
    fn go(n: usize, used: &mut Vec<Channel>, out: &mut Vec<Vec<Channel>>) {
        if used.len() == n {
            out.push(used.clone());
            return;
        }
        for ch in DATA_CHANNELS {
            if !used.contains(&ch) {
                used.push(ch);
                go(n, used, out);
                used.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(n, &mut Vec::with_capacity(n), &mut out);
    out
}

/// All structurally valid designs for the query before hard filtering, in
/// no particular order.
fn raw_space(fields: &[FieldDef], task: Task) -> Vec<VizSpec> {
    let mut layouts: Vec<Vec<Encoding>> = Vec::new();
    for channels in channel_assignments(fields.len()) {
        let mut partial: Vec<Vec<Encoding>> = vec![Vec::new()];
        for (field, &ch) in fields.iter().zip(&channels) {
            let options = field_encodings(field, ch);
            partial = partial
                .into_iter()
                .flat_map(|p| {
                    options.iter().map(move |e| {
                        let mut next = p.clone();
                        next.push(e.clone());
                        next
                    })
                })
                .collect();
        }
        for encs in partial {
            if fields.len() == 1 {
                for ch in DATA_CHANNELS {
                    if ch != channels[0] {
                        let mut with_count = encs.clone();
                        with_count.push(Encoding::count(ch));
                        layouts.push(with_count);
                    }
                }
            }
            layouts.push(encs);
        }
    }
    let mut out = Vec::with_capacity(layouts.len() * Mark::ALL.len());
    for encs in layouts {
        for &mark in Mark::ALL {
            let spec = crate::spec::canonicalize(&VizSpec::new(mark, task, encs.clone()));
            if spec.validate().is_ok() {
                out.push(spec);
            }
        }
    }
    out
}

/// Hard-valid designs for the query, ordered by canonical serialization.
pub fn enumerate_space(
    query: &Query,
    schema: &DatasetSchema,
    set: &ConstraintSet,
) -> Result<Vec<VizSpec>, RecommendError> {
    Ok(candidates(query, schema, set)?
        .into_iter()
        .map(|c| c.spec)
        .collect())
}

/// An enumerated design with its features, ready to be scored by any model
/// sharing the rule layout.
#[derive(Debug, Clone)]
pub struct Candidate {
    pub spec: VizSpec,
    pub key: String,
    pub features: FeatureVector,
}

pub fn candidates(
    query: &Query,
    schema: &DatasetSchema,
    set: &ConstraintSet,
) -> Result<Vec<Candidate>, RecommendError> {
    let fields = query.resolve(schema)?;
    let mut out: Vec<Candidate> = raw_space(&fields, query.task)
        .into_iter()
        .filter(|s| check_hard(s, set).is_empty())
        .map(|spec| Candidate {
            key: spec.canonical_key(),
            features: featurize(&spec, set),
            spec,
        })
        .collect();
    out.sort_by(|a, b| a.key.cmp(&b.key));
    out.dedup_by(|a, b| a.key == b.key);
    Ok(out)
}

/// Top-`k` designs by ascending cost.
pub fn recommend(
    query: &Query,
    schema: &DatasetSchema,
    set: &ConstraintSet,
    model: &WeightModel,
    k: usize,
) -> Result<Vec<Recommendation>, RecommendError> {
    if k == 0 {
        return Err(RecommendError::InvalidQuery("k must be at least 1".into()));
    }
    model.check_layout(set)?;
    let cands = candidates(query, schema, set)?;
    rank_candidates(&cands, model, k)
}

/// Ranks pre-featurized candidates. `cands` must be in canonical-key order,
/// as [`candidates`] returns them.
pub fn rank_candidates(
    cands: &[Candidate],
    model: &WeightModel,
    k: usize,
) -> Result<Vec<Recommendation>, RecommendError> {
    let costs = cands
        .iter()
        .map(|c| cost_with(&c.features, &model.weights))
        .collect::<Result<Vec<_>, _>>()?;
    let groups = tie_groups(&costs);
    let mut out = Vec::with_capacity(k.min(cands.len()));
    'outer: for group in groups {
        // Indices come out in input order, which is canonical-key order.
        let floor = group.iter().map(|&i| costs[i]).fold(f64::INFINITY, f64::min);
        for i in group {
            if out.len() == k {
                break 'outer;
            }
            out.push(Recommendation {
                rank: out.len() + 1,
                cost: floor,
                spec: cands[i].spec.clone(),
            });
        }
    }
    Ok(out)
}

/// Rank of each candidate under `model` (1 = cheapest), ties averaged.
pub fn rerank(
    cands: &[VizSpec],
    set: &ConstraintSet,
    model: &WeightModel,
) -> Result<Vec<f64>, RecommendError> {
    model.check_layout(set)?;
    let costs = cands
        .iter()
        .map(|s| cost_with(&featurize(s, set), &model.weights))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(fractional_ranks(&costs))
}

/// Tie-averaged ranks of `costs`, using the relative tie tolerance.
pub fn fractional_ranks(costs: &[f64]) -> Vec<f64> {
    let mut ranks = vec![0.0; costs.len()];
    let mut start = 0usize;
    for group in tie_groups(costs) {
        // positions start+1 ..= start+len
        let len = group.len();
        let avg = start as f64 + (len as f64 + 1.0) / 2.0;
        for i in group {
            ranks[i] = avg;
        }
        start += len;
    }
    ranks
}

/// Indices grouped into runs of equal cost, cheapest run first; indices in
/// each run are ascending.
fn tie_groups(costs: &[f64]) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..costs.len()).collect();
    order.sort_by(|&a, &b| costs[a].total_cmp(&costs[b]).then(a.cmp(&b)));
    let scale = costs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let tol = TIE_TOLERANCE * scale;
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut prev: Option<f64> = None;
    for i in order {
        match prev {
            Some(p) if costs[i] - p <= tol => groups.last_mut().expect("open group").push(i),
            _ => groups.push(vec![i]),
        }
        prev = Some(costs[i]);
    }
    for g in &mut groups {
        g.sort_unstable();
    }
    groups
}

/// Every field subset of size 1..=`max_fields`, crossed with both tasks.
///
/// Subsets come in size order, then lexicographic by field position.
pub fn attribute_combinations(
    schema: &DatasetSchema,
    max_fields: usize,
) -> Result<Vec<Query>, RecommendError> {
    if !(1..=MAX_QUERY_FIELDS).contains(&max_fields) {
        return Err(RecommendError::InvalidQuery(format!(
            "max_fields must be 1 to {MAX_QUERY_FIELDS}, got {max_fields}"
        )));
    }
    let n = schema.fields.len();
    let mut out = Vec::new();
    for size in 1..=max_fields.min(n) {
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            for &task in Task::ALL {
                out.push(Query {
                    fields: idx.iter().map(|&i| schema.fields[i].name.clone()).collect(),
                    task,
                });
            }
            // next combination
            let mut i = size;
            while i > 0 && idx[i - 1] == n - size + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            idx[i - 1] += 1;
            for j in i..size {
                idx[j] = idx[j - 1] + 1;
            }
        }
    }
    Ok(out)
}
