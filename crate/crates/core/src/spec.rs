//! Chart specification model: fields, encodings and whole designs.
//!
//! A [`VizSpec`] is the unit everything else works on. Specs are plain data;
//! validation checks the structural invariants only; anything that is
//! representable but undesirable (a log scale over non-positive values, say)
//! is left for the hard constraints to reject.

use serde::{Deserialize, Serialize};

use crate::error::SpecError;

/// Declares a closed vocabulary enum with a stable lowercase token per variant.
///
/// Variant declaration order is the canonical order used for sorting.
macro_rules! token_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $token:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, ::serde::Serialize, ::serde::Deserialize)]
        pub enum $name {
            $(#[serde(rename = $token)] $variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];
            pub const TOKENS: &'static [&'static str] = &[$($token),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $token),+
                }
            }
        }

        impl ::std::fmt::Display for $name {
            fn fmt(&self, f: &mut ::std::fmt::Formatter<'_>) -> ::std::fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl ::std::str::FromStr for $name {
            type Err = $crate::error::SpecError;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($token => Ok($name::$variant),)+
                    other => Err($crate::error::SpecError::UnknownToken {
                        kind: stringify!($name),
                        token: other.to_string(),
                    }),
                }
            }
        }
    };
}

pub(crate) use token_enum;

token_enum!(
    FieldType {
        Number => "number",
        String => "string",
        Datetime => "datetime",
        Boolean => "boolean",
    }
);

token_enum!(
    /// Encoding channels. Declaration order is the canonical encoding order.
    Channel {
        X => "x",
        Y => "y",
        Color => "color",
        Size => "size",
        Shape => "shape",
        FacetX => "facet_x",
        FacetY => "facet_y",
    }
);

token_enum!(
    ScaleType {
        Linear => "linear",
        Log => "log",
        Ordinal => "ordinal",
        Categorical => "categorical",
    }
);

token_enum!(
    Aggregate {
        None => "none",
        Count => "count",
        Mean => "mean",
        Sum => "sum",
        Median => "median",
    }
);

token_enum!(
    Mark {
        Bar => "bar",
        Line => "line",
        Point => "point",
        Tick => "tick",
        Area => "area",
        Rect => "rect",
    }
);

token_enum!(
    Task {
        Value => "value",
        Summary => "summary",
    }
);

impl Channel {
    pub fn is_position(self) -> bool {
        matches!(self, Channel::X | Channel::Y)
    }

    pub fn is_facet(self) -> bool {
        matches!(self, Channel::FacetX | Channel::FacetY)
    }
}

impl ScaleType {
    pub fn is_continuous(self) -> bool {
        matches!(self, ScaleType::Linear | ScaleType::Log)
    }
}

/// Maximum number of encodings a single design may carry.
pub const MAX_ENCODINGS: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldDef {
    pub name: String,
    pub field_type: FieldType,
    /// Distinct-value count.
    pub cardinality: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_value: Option<f64>,
    /// Shannon entropy in bits. Carried through but no shipped rule reads it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entropy: Option<f64>,
    /// Marks the field the analyst cares most about.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub interesting: bool,
}

impl FieldDef {
    pub fn number(name: &str, cardinality: u32, min: f64, max: f64) -> Self {
        FieldDef {
            name: name.to_string(),
            field_type: FieldType::Number,
            cardinality,
            min_value: Some(min),
            max_value: Some(max),
            entropy: None,
            interesting: false,
        }
    }

    pub fn categorical(name: &str, field_type: FieldType, cardinality: u32) -> Self {
        FieldDef {
            name: name.to_string(),
            field_type,
            cardinality,
            min_value: None,
            max_value: None,
            entropy: None,
            interesting: false,
        }
    }

    pub fn validate(&self) -> Result<(), SpecError> {
        if !is_identifier(&self.name) {
            return Err(SpecError::Invalid(format!(
                "field name {:?} is not an identifier",
                self.name
            )));
        }
        if self.cardinality == 0 {
            return Err(SpecError::Invalid(format!(
                "field {} has cardinality 0",
                self.name
            )));
        }
        if self.field_type == FieldType::Number {
            match (self.min_value, self.max_value) {
                (Some(lo), Some(hi)) if lo <= hi => {}
                (Some(_), Some(_)) => {
                    return Err(SpecError::Invalid(format!(
                        "field {} has min_value > max_value",
                        self.name
                    )))
                }
                _ => {
                    return Err(SpecError::Invalid(format!(
                        "number field {} needs min_value and max_value",
                        self.name
                    )))
                }
            }
        }
        for v in [self.min_value, self.max_value].into_iter().flatten() {
            if !v.is_finite() {
                return Err(SpecError::Invalid(format!(
                    "field {} has a non-finite bound",
                    self.name
                )));
            }
        }
        if let Some(h) = self.entropy {
            if !(h >= 0.0 && h.is_finite()) {
                return Err(SpecError::Invalid(format!(
                    "field {} has negative entropy",
                    self.name
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Encoding {
    pub channel: Channel,
    /// Absent only for a bare `count` encoding.
    pub field: Option<FieldDef>,
    pub scale_type: ScaleType,
    /// `null` and `"none"` mean the same thing.
    pub aggregate: Option<Aggregate>,
    #[serde(default)]
    pub binned: bool,
}

impl Encoding {
    pub fn field(channel: Channel, field: FieldDef, scale_type: ScaleType) -> Self {
        Encoding {
            channel,
            field: Some(field),
            scale_type,
            aggregate: None,
            binned: false,
        }
    }

    pub fn count(channel: Channel) -> Self {
        Encoding {
            channel,
            field: None,
            scale_type: ScaleType::Linear,
            aggregate: Some(Aggregate::Count),
            binned: false,
        }
    }

    pub fn with_aggregate(mut self, aggregate: Aggregate) -> Self {
        self.aggregate = Some(aggregate);
        self
    }

    pub fn aggregate(&self) -> Aggregate {
        self.aggregate.unwrap_or(Aggregate::None)
    }

    pub fn is_aggregated(&self) -> bool {
        self.aggregate() != Aggregate::None
    }

    /// Binned fields and ordinal/categorical scales are discrete.
    pub fn is_discrete(&self) -> bool {
        self.binned || !self.scale_type.is_continuous()
    }

    pub fn validate(&self) -> Result<(), SpecError> {
        match &self.field {
            Some(f) => f.validate()?,
            None if self.aggregate() == Aggregate::Count => {}
            None => {
                return Err(SpecError::Invalid(format!(
                    "encoding on {} has no field and is not a count",
                    self.channel
                )))
            }
        }
        if self.scale_type.is_continuous() {
            let numeric_field = self
                .field
                .as_ref()
                .map(|f| matches!(f.field_type, FieldType::Number | FieldType::Datetime))
                .unwrap_or(false);
            if !numeric_field && !self.is_aggregated() {
                return Err(SpecError::Invalid(format!(
                    "{} scale on {} needs a number/datetime field or an aggregate",
                    self.scale_type, self.channel
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VizSpec {
    pub mark: Mark,
    pub task: Task,
    pub encodings: Vec<Encoding>,
}

impl VizSpec {
    pub fn new(mark: Mark, task: Task, encodings: Vec<Encoding>) -> Self {
        VizSpec {
            mark,
            task,
            encodings,
        }
    }

    pub fn encoding(&self, channel: Channel) -> Option<&Encoding> {
        self.encodings.iter().find(|e| e.channel == channel)
    }

    pub fn validate(&self) -> Result<(), SpecError> {
        let n = self.encodings.len();
        if n == 0 || n > MAX_ENCODINGS {
            return Err(SpecError::Invalid(format!(
                "a spec needs 1 to {MAX_ENCODINGS} encodings, found {n}"
            )));
        }
        let mut seen = Vec::with_capacity(n);
        for enc in &self.encodings {
            if seen.contains(&enc.channel) {
                return Err(SpecError::Invalid(format!(
                    "duplicate channel {}",
                    enc.channel
                )));
            }
            seen.push(enc.channel);
            enc.validate()?;
        }
        if !seen.iter().any(|c| c.is_position()) {
            return Err(SpecError::Invalid("spec has neither x nor y".into()));
        }
        Ok(())
    }

    /// Serialization of the canonical form; equal keys mean structurally equal
    /// specs.
    pub fn canonical_key(&self) -> String {
        serde_json::to_string(&canonicalize(self)).expect("spec serializes")
    }
}

/// Sorts encodings by the fixed channel order. Idempotent.
pub fn canonicalize(spec: &VizSpec) -> VizSpec {
    let mut out = spec.clone();
    out.encodings.sort_by_key(|e| e.channel);
    out
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '.')
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quant() -> FieldDef {
        FieldDef::number("value", 100, 0.0, 100.0)
    }

    fn nominal() -> FieldDef {
        FieldDef::categorical("category", FieldType::String, 5)
    }

    #[test]
    fn canonicalize_orders_channels() {
        let spec = VizSpec::new(
            Mark::Point,
            Task::Value,
            vec![
                Encoding::field(Channel::Color, nominal(), ScaleType::Categorical),
                Encoding::field(Channel::X, quant(), ScaleType::Linear),
            ],
        );
        let canon = canonicalize(&spec);
        let channels: Vec<_> = canon.encodings.iter().map(|e| e.channel).collect();
        assert_eq!(channels, vec![Channel::X, Channel::Color]);
        assert_eq!(canonicalize(&canon), canon);
    }

    #[test]
    fn order_insensitive_key() {
        let a = VizSpec::new(
            Mark::Bar,
            Task::Summary,
            vec![
                Encoding::field(Channel::Y, quant(), ScaleType::Linear),
                Encoding::field(Channel::X, nominal(), ScaleType::Categorical),
            ],
        );
        let mut b = a.clone();
        b.encodings.reverse();
        assert_ne!(a, b);
        assert_eq!(a.canonical_key(), b.canonical_key());
    }

    #[test]
    fn duplicate_channel_is_invalid() {
        let spec = VizSpec::new(
            Mark::Point,
            Task::Value,
            vec![
                Encoding::field(Channel::X, quant(), ScaleType::Linear),
                Encoding::field(Channel::X, nominal(), ScaleType::Categorical),
            ],
        );
        assert!(spec.validate().is_err());
    }

    #[test]
    fn needs_a_position_channel() {
        let spec = VizSpec::new(
            Mark::Point,
            Task::Value,
            vec![Encoding::field(
                Channel::Color,
                nominal(),
                ScaleType::Categorical,
            )],
        );
        assert!(spec.validate().is_err());
    }

    #[test]
    fn linear_scale_on_string_needs_aggregate() {
        let bad = Encoding::field(Channel::X, nominal(), ScaleType::Linear);
        assert!(bad.validate().is_err());
        let ok = bad.clone().with_aggregate(Aggregate::Count);
        assert!(ok.validate().is_ok());
    }

    #[test]
    fn log_on_negative_domain_is_structurally_valid() {
        let field = FieldDef::number("delta", 10, -3.0, 5.0);
        let enc = Encoding::field(Channel::X, field, ScaleType::Log);
        assert!(enc.validate().is_ok());
    }

    #[test]
    fn number_field_needs_bounds() {
        let mut f = quant();
        f.max_value = None;
        assert!(f.validate().is_err());
        let mut f = quant();
        f.min_value = Some(200.0);
        assert!(f.validate().is_err());
        let mut f = quant();
        f.cardinality = 0;
        assert!(f.validate().is_err());
    }

    #[test]
    fn bare_field_encoding_requires_count() {
        let mut enc = Encoding::count(Channel::Y);
        assert!(enc.validate().is_ok());
        enc.aggregate = Some(Aggregate::Mean);
        assert!(enc.validate().is_err());
    }

    #[test]
    fn tokens_round_trip() {
        for c in Channel::ALL {
            assert_eq!(c.as_str().parse::<Channel>().unwrap(), *c);
        }
        assert!("z".parse::<Channel>().is_err());
    }
}
