//! A small conjunctive rule language for hard and soft design constraints.
//!
//! One rule per line:
//!
//! ```text
//! rules     = { line } ;
//! line      = [ rule ] [ comment ] "\n" ;
//! rule      = kind name [ weight ] ":-" scope ":" condition { "," condition } ;
//! kind      = "hard" | "soft" ;
//! name      = ident ;
//! weight    = [ "-" ] digit { digit } ;          (* soft rules only, required *)
//! scope     = "spec" | "encoding" ;
//! condition = attribute op value ;
//! op        = "=" | "!=" | "<" | "<=" | ">" | ">=" ;
//! value     = ident | number ;
//! comment   = "#" { any character } ;
//! ```
//!
//! A `spec` rule fires at most once per design. An `encoding` rule is tested
//! against every encoding and counts the ones where all conditions hold; its
//! conditions may also read design-level attributes.

mod eval;
mod parse;

pub use eval::{check_hard, cost, cost_with, feature_delta, featurize, FeatureVector};
pub use parse::{parse_rules, serialize_rules};

use std::fmt;

use crate::spec::{token_enum, Aggregate, Channel, FieldType, Mark, ScaleType, Task};

const SHIPPED_RULES: &str = include_str!("../../data/default.rules");

/// Source text of the rule file bundled with the crate.
pub fn shipped_rules_source() -> &'static str {
    SHIPPED_RULES
}

/// The bundled rule set.
pub fn shipped_rules() -> ConstraintSet {
    parse_rules(SHIPPED_RULES).expect("bundled rule file parses")
}

token_enum!(
    /// Everything a condition can test.
    Attribute {
        Mark => "mark",
        Task => "task",
        EncodingCount => "encoding_count",
        HasFacet => "has_facet",
        HasAggregate => "has_aggregate",
        XScaleKind => "x_scale_kind",
        YScaleKind => "y_scale_kind",
        XyKind => "xy_kind",
        Channel => "channel",
        FieldType => "field_type",
        ScaleType => "scale_type",
        ScaleKind => "scale_kind",
        Aggregate => "aggregate",
        Binned => "binned",
        Cardinality => "cardinality",
        FieldMin => "field_min",
        FieldMax => "field_max",
        IncludesZero => "includes_zero",
        Interesting => "interesting",
    }
);

const BOOL_TOKENS: &[&str] = &["true", "false"];
const SCALE_KIND_TOKENS: &[&str] = &["continuous", "discrete"];
const AXIS_KIND_TOKENS: &[&str] = &["continuous", "discrete", "none"];
const XY_KIND_TOKENS: &[&str] = &["c_c", "c_d", "d_d", "single"];
const FIELD_TYPE_TOKENS: &[&str] = &["number", "string", "datetime", "boolean", "none"];

/// The value domain of an attribute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttrType {
    Token(&'static [&'static str]),
    Integer,
    Real,
}

impl Attribute {
    pub fn value_type(self) -> AttrType {
        use Attribute as A;
        match self {
            A::Mark => AttrType::Token(Mark::TOKENS),
            A::Task => AttrType::Token(Task::TOKENS),
            A::Channel => AttrType::Token(Channel::TOKENS),
            A::FieldType => {
                debug_assert_eq!(&FIELD_TYPE_TOKENS[..4], FieldType::TOKENS);
                AttrType::Token(FIELD_TYPE_TOKENS)
            }
            A::ScaleType => AttrType::Token(ScaleType::TOKENS),
            A::Aggregate => AttrType::Token(Aggregate::TOKENS),
            A::ScaleKind => AttrType::Token(SCALE_KIND_TOKENS),
            A::XScaleKind | A::YScaleKind => AttrType::Token(AXIS_KIND_TOKENS),
            A::XyKind => AttrType::Token(XY_KIND_TOKENS),
            A::HasFacet | A::HasAggregate | A::Binned | A::IncludesZero | A::Interesting => {
                AttrType::Token(BOOL_TOKENS)
            }
            A::EncodingCount | A::Cardinality => AttrType::Integer,
            A::FieldMin | A::FieldMax => AttrType::Real,
        }
    }

    /// Design-level attributes are readable from both scopes.
    pub fn is_spec_level(self) -> bool {
        use Attribute as A;
        matches!(
            self,
            A::Mark
                | A::Task
                | A::EncodingCount
                | A::HasFacet
                | A::HasAggregate
                | A::XScaleKind
                | A::YScaleKind
                | A::XyKind
        )
    }
}

token_enum!(
    Op {
        Eq => "=",
        Ne => "!=",
        Lt => "<",
        Le => "<=",
        Gt => ">",
        Ge => ">=",
    }
);

impl Op {
    pub fn is_ordering(self) -> bool {
        matches!(self, Op::Lt | Op::Le | Op::Gt | Op::Ge)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Literal {
    /// Always one of the attribute's vocabulary tokens.
    Token(&'static str),
    Number(f64),
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Token(t) => f.write_str(t),
            Literal::Number(x) => write!(f, "{x}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Condition {
    pub attribute: Attribute,
    pub op: Op,
    pub value: Literal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintKind {
    Hard,
    Soft,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    Spec,
    Encoding,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintDef {
    pub name: String,
    pub kind: ConstraintKind,
    pub scope: Scope,
    pub conditions: Vec<Condition>,
    /// Present exactly for soft rules.
    pub default_weight: Option<i64>,
}

/// Parsed rules. The order of `soft` fixes the feature-vector layout.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConstraintSet {
    pub hard: Vec<ConstraintDef>,
    pub soft: Vec<ConstraintDef>,
}

impl ConstraintSet {
    pub fn soft_names(&self) -> Vec<String> {
        self.soft.iter().map(|c| c.name.clone()).collect()
    }

    pub fn soft_index(&self, name: &str) -> Option<usize> {
        self.soft.iter().position(|c| c.name == name)
    }

    pub fn default_weights(&self) -> Vec<f64> {
        self.soft
            .iter()
            .map(|c| c.default_weight.unwrap_or(0) as f64)
            .collect()
    }

    pub fn len(&self) -> usize {
        self.soft.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hard.is_empty() && self.soft.is_empty()
    }

    pub fn content_hash(&self) -> String {
        crate::report::sha256_hex(serialize_rules(self).as_bytes())
    }
}
