use super::{Attribute, Condition, ConstraintDef, ConstraintSet, Literal, Op, Scope};
use crate::corpus::RankedPair;
use crate::error::LayoutError;
use crate::learn::WeightModel;
use crate::spec::{Aggregate, Channel, Encoding, FieldType, VizSpec};

/// Per-design match counts, one slot per soft rule in layout order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FeatureVector {
    pub counts: Vec<u32>,
}

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Value {
    Token(&'static str),
    Num(f64),
}

fn bool_token(b: bool) -> Value {
    Value::Token(if b { "true" } else { "false" })
}

fn axis_kind(enc: Option<&Encoding>) -> &'static str {
    match enc {
        None => "none",
        Some(e) if e.is_discrete() => "discrete",
        Some(_) => "continuous",
    }
}

/// Design-level attributes, computed once per design.
struct SpecFacts<'a> {
    spec: &'a VizSpec,
    x_kind: &'static str,
    y_kind: &'static str,
    xy_kind: &'static str,
    has_facet: bool,
    has_aggregate: bool,
}

impl<'a> SpecFacts<'a> {
    fn new(spec: &'a VizSpec) -> Self {
        let x_kind = axis_kind(spec.encoding(Channel::X));
        let y_kind = axis_kind(spec.encoding(Channel::Y));
        let xy_kind = match (x_kind, y_kind) {
            ("continuous", "continuous") => "c_c",
            ("discrete", "discrete") => "d_d",
            ("none", _) | (_, "none") => "single",
            _ => "c_d",
        };
        SpecFacts {
            spec,
            x_kind,
            y_kind,
            xy_kind,
            has_facet: spec.encodings.iter().any(|e| e.channel.is_facet()),
            has_aggregate: spec.encodings.iter().any(Encoding::is_aggregated),
        }
    }

    fn spec_value(&self, attr: Attribute) -> Option<Value> {
        use Attribute as A;
        Some(match attr {
            A::Mark => Value::Token(self.spec.mark.as_str()),
            A::Task => Value::Token(self.spec.task.as_str()),
            A::EncodingCount => Value::Num(self.spec.encodings.len() as f64),
            A::HasFacet => bool_token(self.has_facet),
            A::HasAggregate => bool_token(self.has_aggregate),
            A::XScaleKind => Value::Token(self.x_kind),
            A::YScaleKind => Value::Token(self.y_kind),
            A::XyKind => Value::Token(self.xy_kind),
            _ => return None,
        })
    }

    fn encoding_value(&self, enc: &Encoding, attr: Attribute) -> Option<Value> {
        use Attribute as A;
        if attr.is_spec_level() {
            return self.spec_value(attr);
        }
        let field = enc.field.as_ref();
        Some(match attr {
            A::Channel => Value::Token(enc.channel.as_str()),
            A::FieldType => Value::Token(field.map(|f| f.field_type.as_str()).unwrap_or("none")),
            A::ScaleType => Value::Token(enc.scale_type.as_str()),
            A::ScaleKind => Value::Token(if enc.is_discrete() {
                "discrete"
            } else {
                "continuous"
            }),
            A::Aggregate => Value::Token(enc.aggregate().as_str()),
            A::Binned => bool_token(enc.binned),
            A::Cardinality => Value::Num(field?.cardinality as f64),
            A::FieldMin => Value::Num(field?.min_value?),
            A::FieldMax => Value::Num(field?.max_value?),
            A::IncludesZero => bool_token(includes_zero(enc)),
            A::Interesting => bool_token(field.map(|f| f.interesting).unwrap_or(false)),
            _ => unreachable!("spec-level attributes handled above"),
        })
    }
}

/// Counts start at zero; otherwise the field's own range decides.
fn includes_zero(enc: &Encoding) -> bool {
    if enc.aggregate() == Aggregate::Count {
        return true;
    }
    match enc.field.as_ref() {
        Some(f) if f.field_type == FieldType::Number => {
            matches!((f.min_value, f.max_value), (Some(lo), Some(hi)) if lo <= 0.0 && 0.0 <= hi)
        }
        _ => false,
    }
}

/// Missing values (no field, no bounds) never satisfy a condition.
fn holds(cond: &Condition, value: Option<Value>) -> bool {
    match (value, cond.value) {
        (Some(Value::Token(a)), Literal::Token(b)) => match cond.op {
            Op::Eq => a == b,
            Op::Ne => a != b,
            _ => false,
        },
        (Some(Value::Num(a)), Literal::Number(b)) => match cond.op {
            Op::Eq => a == b,
            Op::Ne => a != b,
            Op::Lt => a < b,
            Op::Le => a <= b,
            Op::Gt => a > b,
            Op::Ge => a >= b,
        },
        _ => false,
    }
}

fn matches(def: &ConstraintDef, facts: &SpecFacts<'_>) -> u32 {
    match def.scope {
        Scope::Spec => def
            .conditions
            .iter()
            .all(|c| holds(c, facts.spec_value(c.attribute))) as u32,
        Scope::Encoding => facts
            .spec
            .encodings
            .iter()
            .filter(|enc| {
                def.conditions
                    .iter()
                    .all(|c| holds(c, facts.encoding_value(enc, c.attribute)))
            })
            .count() as u32,
    }
}

/// Names of violated hard rules, in rule-file order. Empty means valid.
pub fn check_hard(spec: &VizSpec, set: &ConstraintSet) -> Vec<String> {
    let facts = SpecFacts::new(spec);
    set.hard
        .iter()
        .filter(|def| matches(def, &facts) > 0)
        .map(|def| def.name.clone())
        .collect()
}

pub fn featurize(spec: &VizSpec, set: &ConstraintSet) -> FeatureVector {
    let facts = SpecFacts::new(spec);
    FeatureVector {
        counts: set.soft.iter().map(|def| matches(def, &facts)).collect(),
    }
}

/// Weighted violation cost.
pub fn cost(fv: &FeatureVector, model: &WeightModel) -> Result<f64, LayoutError> {
    cost_with(fv, &model.weights)
}

pub fn cost_with(fv: &FeatureVector, weights: &[f64]) -> Result<f64, LayoutError> {
    if fv.counts.len() != weights.len() {
        return Err(LayoutError::Length {
            expected: weights.len(),
            found: fv.counts.len(),
        });
    }
    Ok(fv
        .counts
        .iter()
        .zip(weights)
        .map(|(&c, &w)| c as f64 * w)
        .sum())
}

/// `featurize(negative) - featurize(positive)`.
pub fn feature_delta(pair: &RankedPair, set: &ConstraintSet) -> Vec<i32> {
    let pos = featurize(&pair.positive, set);
    let neg = featurize(&pair.negative, set);
    neg.counts
        .iter()
        .zip(&pos.counts)
        .map(|(&n, &p)| n as i32 - p as i32)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::parse_rules;
    use crate::spec::{FieldDef, Mark, ScaleType, Task};

    fn quant(min: f64) -> FieldDef {
        FieldDef::number("value", 100, min, 100.0)
    }

    fn nominal(card: u32) -> FieldDef {
        FieldDef::categorical("category", FieldType::String, card)
    }

    fn xy(mark: Mark, x_min: f64, x_scale: ScaleType) -> VizSpec {
        VizSpec::new(
            mark,
            Task::Value,
            vec![
                Encoding::field(Channel::X, quant(x_min), x_scale),
                Encoding::field(Channel::Y, nominal(5), ScaleType::Categorical),
            ],
        )
    }

    const HARD: &str = "\
        hard log_non_positive :- encoding: scale_type = log, field_min <= 0\n\
        hard bar_log :- encoding: mark = bar, scale_type = log\n";

    #[test]
    fn log_over_negative_values_is_invalid() {
        let set = parse_rules(HARD).unwrap();
        let spec = xy(Mark::Point, -3.0, ScaleType::Log);
        assert_eq!(check_hard(&spec, &set), vec!["log_non_positive"]);
    }

    #[test]
    fn plain_bar_is_valid() {
        let set = parse_rules(HARD).unwrap();
        assert!(check_hard(&xy(Mark::Bar, 0.0, ScaleType::Linear), &set).is_empty());
    }

    #[test]
    fn multiple_violations_in_file_order() {
        let set = parse_rules(HARD).unwrap();
        let spec = xy(Mark::Bar, -3.0, ScaleType::Log);
        let got = check_hard(&spec, &set);
        // each rule on its own
        let mut union = Vec::new();
        for def in &set.hard {
            let single = ConstraintSet {
                hard: vec![def.clone()],
                soft: vec![],
            };
            union.extend(check_hard(&spec, &single));
        }
        assert_eq!(got, union);
        assert_eq!(got, vec!["log_non_positive", "bar_log"]);
    }

    #[test]
    fn spec_scoped_counter() {
        let set = parse_rules("soft encoding_count_2 0 :- spec: encoding_count = 2").unwrap();
        let fv = featurize(&xy(Mark::Bar, 0.0, ScaleType::Linear), &set);
        assert_eq!(fv.counts, vec![1]);
    }

    #[test]
    fn shape_rule_counts() {
        let set = parse_rules(
            "soft high_cardinality_shape 10 :- encoding: channel = shape, cardinality > 8",
        )
        .unwrap();
        let spec = xy(Mark::Point, 0.0, ScaleType::Linear);
        assert_eq!(featurize(&spec, &set).counts, vec![0]);
        let mut with_shape = spec.clone();
        with_shape.encodings.push(Encoding::field(
            Channel::Shape,
            FieldDef::categorical("kind", FieldType::String, 12),
            ScaleType::Categorical,
        ));
        assert_eq!(featurize(&with_shape, &set).counts, vec![1]);
    }

    #[test]
    fn missing_values_never_match() {
        let set = parse_rules("soft s 1 :- encoding: field_min != 5").unwrap();
        let spec = VizSpec::new(
            Mark::Bar,
            Task::Value,
            vec![
                Encoding::field(Channel::X, nominal(4), ScaleType::Categorical),
                Encoding::count(Channel::Y),
            ],
        );
        assert_eq!(featurize(&spec, &set).counts, vec![0]);
    }

    #[test]
    fn xy_kind_classification() {
        let set = parse_rules(
            "soft cc 1 :- spec: xy_kind = c_c\n\
             soft cd 1 :- spec: xy_kind = c_d\n\
             soft dd 1 :- spec: xy_kind = d_d\n\
             soft single 1 :- spec: xy_kind = single\n",
        )
        .unwrap();
        assert_eq!(featurize(&xy(Mark::Tick, 0.0, ScaleType::Linear), &set).counts, vec![0, 1, 0, 0]);
        let mut binned = xy(Mark::Rect, 0.0, ScaleType::Linear);
        binned.encodings[0].binned = true;
        assert_eq!(featurize(&binned, &set).counts, vec![0, 0, 1, 0]);
    }

    #[test]
    fn cost_is_a_dot_product() {
        let fv = FeatureVector { counts: vec![1, 0, 2] };
        assert_eq!(cost_with(&fv, &[10.0, 5.0, -1.0]).unwrap(), 8.0);
        assert_eq!(cost_with(&FeatureVector { counts: vec![0, 0] }, &[3.0, 4.0]).unwrap(), 0.0);
        assert_eq!(cost_with(&FeatureVector { counts: vec![1] }, &[10.0]).unwrap(), 10.0);
        assert!(cost_with(&fv, &[1.0]).is_err());
    }
}
