use std::collections::BTreeSet;

use proptest::prelude::*;

use vizlearn::learn::WeightModel;
use vizlearn::recommend::{
    attribute_combinations, bundled_schema, bundled_schemas, enumerate_space, recommend, rerank,
    DatasetSchema, Query,
};
use vizlearn::rules::{check_hard, shipped_rules, ConstraintSet};
use vizlearn::spec::{
    Aggregate, Channel, Encoding, FieldDef, FieldType, Mark, ScaleType, Task, VizSpec,
};

fn random_query(schemas: &[DatasetSchema], pick: (usize, Vec<usize>, bool)) -> (usize, Query) {
    let (s, idx, summary) = pick;
    let schema = &schemas[s % schemas.len()];
    let mut names: Vec<&str> = Vec::new();
    for i in idx {
        let name = schema.fields[i % schema.fields.len()].name.as_str();
        if !names.contains(&name) {
            names.push(name);
        }
    }
    let task = if summary { Task::Summary } else { Task::Value };
    (s % schemas.len(), Query::new(&names, task))
}

fn query_strategy() -> impl Strategy<Value = (usize, Vec<usize>, bool)> {
    (0usize..3, prop::collection::vec(0usize..16, 1..=3), any::<bool>())
}

fn model_with(set: &ConstraintSet, weights: Vec<f64>) -> WeightModel {
    let mut m = WeightModel::defaults(set);
    m.weights = weights;
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn recommendation_contracts(
        pick in query_strategy(),
        raw in prop::collection::vec(-3i32..=3, 128),
        alpha in 0.05f64..40.0,
        k in 1usize..40,
    ) {
        let set = shipped_rules();
        let schemas = bundled_schemas();
        let (s, q) = random_query(&schemas, pick);
        let schema = &schemas[s];
        let model = model_with(&set, raw.iter().take(set.len()).map(|&w| w as f64).collect());

        let top = recommend(&q, schema, &set, &model, k).unwrap();
        let next = recommend(&q, schema, &set, &model, k + 1).unwrap();
        prop_assert!(top.len() <= k);
        prop_assert_eq!(&next[..top.len()], &top[..]);

        for (i, r) in top.iter().enumerate() {
            prop_assert_eq!(r.rank, i + 1);
            prop_assert!(r.spec.validate().is_ok());
            prop_assert!(check_hard(&r.spec, &set).is_empty());
        }
        prop_assert!(top.windows(2).all(|w| w[0].cost <= w[1].cost));

        let scaled = model.scaled(alpha);
        let top_s = recommend(&q, schema, &set, &scaled, k).unwrap();
        let specs: Vec<&VizSpec> = top.iter().map(|r| &r.spec).collect();
        let specs_s: Vec<&VizSpec> = top_s.iter().map(|r| &r.spec).collect();
        prop_assert_eq!(specs, specs_s);
    }
}

#[test]
fn zero_weights_keep_enumeration_order() {
    let set = shipped_rules();
    let schema = bundled_schema("cars").unwrap();
    let q = Query::new(&["Horsepower", "Origin"], Task::Value);
    let space = enumerate_space(&q, &schema, &set).unwrap();
    let zero = model_with(&set, vec![0.0; set.len()]);
    let all = recommend(&q, &schema, &set, &zero, space.len() + 50).unwrap();
    assert_eq!(all.len(), space.len());
    let specs: Vec<VizSpec> = all.into_iter().map(|r| r.spec).collect();
    assert_eq!(specs, space);
}

#[test]
fn enumeration_is_sorted_by_canonical_key() {
    let set = shipped_rules();
    let schema = bundled_schema("weather").unwrap();
    let q = Query::new(&["date", "temp_max"], Task::Summary);
    let keys: Vec<String> = enumerate_space(&q, &schema, &set)
        .unwrap()
        .iter()
        .map(|s| s.canonical_key())
        .collect();
    let mut sorted = keys.clone();
    sorted.sort();
    sorted.dedup();
    assert_eq!(keys, sorted);
}

#[test]
fn reranking_by_the_generating_model_is_the_identity() {
    let set = shipped_rules();
    let schema = bundled_schema("movies").unwrap();
    let model = WeightModel::defaults(&set);
    let q = Query::new(&["IMDB_Rating", "Major_Genre"], Task::Value);
    let top = recommend(&q, &schema, &set, &model, 30).unwrap();
    let specs: Vec<VizSpec> = top.iter().map(|r| r.spec.clone()).collect();
    let ranks = rerank(&specs, &set, &model).unwrap();
    // non-decreasing in list order; ties share their average rank
    assert!(ranks.windows(2).all(|w| w[0] <= w[1]));
    assert_eq!(ranks.iter().sum::<f64>(), (1..=30).sum::<usize>() as f64);
    assert_eq!(rerank(&specs[..1], &set, &model).unwrap(), vec![1.0]);
}

fn scales_for(t: FieldType) -> Vec<ScaleType> {
    match t {
        FieldType::Number => vec![ScaleType::Linear, ScaleType::Log],
        FieldType::Datetime => vec![ScaleType::Linear],
        FieldType::String => vec![ScaleType::Categorical, ScaleType::Ordinal],
        FieldType::Boolean => vec![ScaleType::Categorical],
    }
}

fn aggs_for(t: FieldType) -> Vec<Aggregate> {
    if t == FieldType::Number {
        vec![Aggregate::None, Aggregate::Mean]
    } else {
        vec![Aggregate::None]
    }
}

fn encodings_for(f: &FieldDef, ch: Channel) -> Vec<Encoding> {
    let mut out = Vec::new();
    for s in scales_for(f.field_type) {
        for a in aggs_for(f.field_type) {
            let e = Encoding::field(ch, f.clone(), s);
            out.push(if a == Aggregate::None { e } else { e.with_aggregate(a) });
        }
    }
    out
}

/// Independent product over every choice for a two-field query.
fn brute_force_two(f1: &FieldDef, f2: &FieldDef, task: Task, set: &ConstraintSet) -> BTreeSet<String> {
    let channels = [Channel::X, Channel::Y, Channel::Color, Channel::Size, Channel::Shape];
    let mut keys = BTreeSet::new();
    for &c1 in &channels {
        for &c2 in &channels {
            if c1 == c2 {
                continue;
            }
            for e1 in encodings_for(f1, c1) {
                for e2 in encodings_for(f2, c2) {
                    for &mark in Mark::ALL {
                        let spec = VizSpec::new(mark, task, vec![e1.clone(), e2.clone()]);
                        if spec.validate().is_ok() && check_hard(&spec, set).is_empty() {
                            keys.insert(spec.canonical_key());
                        }
                    }
                }
            }
        }
    }
    keys
}

#[test]
fn two_field_enumeration_matches_brute_force_count() {
    let set = shipped_rules();
    for (schema, a, b) in [
        ("cars", "Horsepower", "Origin"),
        ("cars", "Year", "Miles_per_Gallon"),
        ("weather", "precipitation", "weather"),
        ("movies", "Major_Genre", "MPAA_Rating"),
    ] {
        let schema = bundled_schema(schema).unwrap();
        for &task in Task::ALL {
            let q = Query::new(&[a, b], task);
            let got: Vec<String> = enumerate_space(&q, &schema, &set)
                .unwrap()
                .iter()
                .map(|s| s.canonical_key())
                .collect();
            let want = brute_force_two(
                schema.field(a).unwrap(),
                schema.field(b).unwrap(),
                task,
                &set,
            );
            assert!(!want.is_empty());
            assert_eq!(got, want.into_iter().collect::<Vec<_>>(), "{a}, {b}");
        }
    }
}

#[test]
fn single_nominal_field_space() {
    let set = shipped_rules();
    let schema = bundled_schema("cars").unwrap();
    let space = enumerate_space(&Query::new(&["Origin"], Task::Value), &schema, &set).unwrap();
    let count_bar = space.iter().any(|s| {
        s.mark == Mark::Bar && s.encodings.iter().any(|e| e.aggregate() == Aggregate::Count)
    });
    assert!(count_bar);
    assert!(space
        .iter()
        .all(|s| s.encodings.iter().all(|e| e.scale_type != ScaleType::Log)));
}

#[test]
fn non_positive_fields_never_get_log_scales() {
    let set = shipped_rules();
    let schema = bundled_schema("weather").unwrap();
    // temp_min dips below zero and precipitation starts at zero
    for f in ["temp_min", "precipitation"] {
        let space = enumerate_space(&Query::new(&[f], Task::Value), &schema, &set).unwrap();
        assert!(!space.is_empty());
        assert!(space
            .iter()
            .all(|s| s.encodings.iter().all(|e| e.scale_type != ScaleType::Log)));
    }
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

#[test]
fn attribute_combination_counts() {
    for schema in bundled_schemas() {
        let n = schema.fields.len();
        for max in 1..=3 {
            let expected: usize = (1..=max).map(|k| binomial(n, k)).sum::<usize>() * 2;
            assert_eq!(attribute_combinations(&schema, max).unwrap().len(), expected);
        }
    }
    let total: usize = bundled_schemas()
        .iter()
        .map(|s| attribute_combinations(s, 2).unwrap().len())
        .sum();
    assert_eq!(total, 404);
    let one = DatasetSchema {
        name: "one".into(),
        row_count: 3,
        fields: vec![FieldDef::number("v", 3, 1.0, 3.0)],
    };
    assert_eq!(attribute_combinations(&one, 1).unwrap().len(), 2);
    assert!(attribute_combinations(&one, 0).is_err());
    assert!(attribute_combinations(&one, 4).is_err());
}

#[test]
fn bad_queries_are_rejected() {
    let set = shipped_rules();
    let schema = bundled_schema("cars").unwrap();
    let model = WeightModel::defaults(&set);
    assert!(recommend(&Query::new(&["Nope"], Task::Value), &schema, &set, &model, 5).is_err());
    assert!(recommend(&Query::new(&[], Task::Value), &schema, &set, &model, 5).is_err());
    assert!(recommend(
        &Query::new(&["Origin", "Origin"], Task::Value),
        &schema,
        &set,
        &model,
        5
    )
    .is_err());
    assert!(recommend(&Query::new(&["Origin"], Task::Value), &schema, &set, &model, 0).is_err());
}
