use std::collections::HashSet;
use std::fmt::Write as _;

use super::{
    AttrType, Attribute, Condition, ConstraintDef, ConstraintKind, ConstraintSet, Literal, Op,
    Scope,
};
use crate::error::{RuleError, RuleErrorKind, RuleErrors};
use crate::spec::is_identifier;

/// Parses a rule source, collecting every error rather than stopping at the
/// first one.
pub fn parse_rules(text: &str) -> Result<ConstraintSet, RuleErrors> {
    let mut set = ConstraintSet::default();
    let mut errors = Vec::new();
    let mut names = HashSet::new();

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        match parse_line(line) {
            Ok(def) => {
                if !names.insert(def.name.clone()) {
                    errors.push(RuleError {
                        line: line_no,
                        kind: RuleErrorKind::DuplicateName(def.name),
                    });
                    continue;
                }
                match def.kind {
                    ConstraintKind::Hard => set.hard.push(def),
                    ConstraintKind::Soft => set.soft.push(def),
                }
            }
            Err(kind) => errors.push(RuleError {
                line: line_no,
                kind,
            }),
        }
    }

    if errors.is_empty() {
        Ok(set)
    } else {
        Err(RuleErrors(errors))
    }
}

fn syntax(msg: impl Into<String>) -> RuleErrorKind {
    RuleErrorKind::Syntax(msg.into())
}

fn parse_line(line: &str) -> Result<ConstraintDef, RuleErrorKind> {
    let (head, body) = line
        .split_once(":-")
        .ok_or_else(|| syntax("expected `:-`"))?;

    let mut head_parts = head.split_whitespace();
    let kind = match head_parts.next() {
        Some("hard") => ConstraintKind::Hard,
        Some("soft") => ConstraintKind::Soft,
        Some(other) => return Err(syntax(format!("expected `hard` or `soft`, found `{other}`"))),
        None => return Err(syntax("missing rule kind")),
    };
    let name = head_parts
        .next()
        .ok_or_else(|| syntax("missing rule name"))?;
    if !is_identifier(name) || name.contains(['-', '.']) {
        return Err(syntax(format!("`{name}` is not a valid rule name")));
    }
    let weight = match head_parts.next() {
        Some(w) => Some(
            w.parse::<i64>()
                .map_err(|_| syntax(format!("weight `{w}` is not an integer")))?,
        ),
        None => None,
    };
    if let Some(extra) = head_parts.next() {
        return Err(syntax(format!("unexpected `{extra}` before `:-`")));
    }
    match (kind, weight) {
        (ConstraintKind::Hard, Some(_)) => return Err(syntax("hard rules take no weight")),
        (ConstraintKind::Soft, None) => return Err(syntax("soft rules need an integer weight")),
        _ => {}
    }

    let (scope_txt, conds_txt) = body
        .split_once(':')
        .ok_or_else(|| syntax("expected `<scope>:` after `:-`"))?;
    let scope = match scope_txt.trim() {
        "spec" => Scope::Spec,
        "encoding" => Scope::Encoding,
        other => return Err(syntax(format!("unknown scope `{other}`"))),
    };

    let mut conditions = Vec::new();
    for part in conds_txt.split(',') {
        let part = part.trim();
        if part.is_empty() {
            return Err(syntax("empty condition"));
        }
        conditions.push(parse_condition(part, scope)?);
    }

    Ok(ConstraintDef {
        name: name.to_string(),
        kind,
        scope,
        conditions,
        default_weight: weight,
    })
}

fn parse_condition(text: &str, scope: Scope) -> Result<Condition, RuleErrorKind> {
    let op_start = text
        .find(['=', '!', '<', '>'])
        .ok_or_else(|| syntax(format!("no comparison operator in `{text}`")))?;
    let attr_txt = text[..op_start].trim();
    let rest = &text[op_start..];
    let (op, value_txt) = ["<=", ">=", "!=", "=", "<", ">"]
        .iter()
        .find_map(|tok| {
            rest.strip_prefix(tok)
                .map(|v| (tok.parse::<Op>().expect("known operator"), v.trim()))
        })
        .ok_or_else(|| syntax(format!("bad operator in `{text}`")))?;
    if value_txt.is_empty() {
        return Err(syntax(format!("missing value in `{text}`")));
    }

    let attribute: Attribute = attr_txt
        .parse()
        .map_err(|_| RuleErrorKind::UnknownAttribute(attr_txt.to_string()))?;
    if scope == Scope::Spec && !attribute.is_spec_level() {
        return Err(RuleErrorKind::UnknownAttribute(format!(
            "`{attr_txt}` is not available in spec scope"
        )));
    }

    let value = match attribute.value_type() {
        AttrType::Token(vocab) => {
            if op.is_ordering() {
                return Err(RuleErrorKind::TypeMismatch(format!(
                    "`{}` cannot be used with non-numeric attribute `{attr_txt}`",
                    op
                )));
            }
            let tok = vocab.iter().find(|t| **t == value_txt).ok_or_else(|| {
                RuleErrorKind::TypeMismatch(format!(
                    "`{value_txt}` is not a value of `{attr_txt}` (expected one of {})",
                    vocab.join(", ")
                ))
            })?;
            Literal::Token(tok)
        }
        ty @ (AttrType::Integer | AttrType::Real) => {
            let x: f64 = value_txt.parse().map_err(|_| {
                RuleErrorKind::TypeMismatch(format!(
                    "`{attr_txt}` is numeric but `{value_txt}` is not a number"
                ))
            })?;
            if !x.is_finite() || (ty == AttrType::Integer && x.fract() != 0.0) {
                return Err(RuleErrorKind::TypeMismatch(format!(
                    "`{value_txt}` is not a valid {} literal",
                    if ty == AttrType::Integer { "integer" } else { "real" }
                )));
            }
            Literal::Number(x)
        }
    };

    Ok(Condition {
        attribute,
        op,
        value,
    })
}

/// Writes a set back out: hard rules first, then soft rules in layout order.
pub fn serialize_rules(set: &ConstraintSet) -> String {
    let mut out = String::new();
    for def in set.hard.iter().chain(&set.soft) {
        let kind = match def.kind {
            ConstraintKind::Hard => "hard",
            ConstraintKind::Soft => "soft",
        };
        let scope = match def.scope {
            Scope::Spec => "spec",
            Scope::Encoding => "encoding",
        };
        let _ = write!(out, "{kind} {}", def.name);
        if let Some(w) = def.default_weight {
            let _ = write!(out, " {w}");
        }
        let _ = write!(out, " :- {scope}: ");
        for (i, c) in def.conditions.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            let _ = write!(out, "{} {} {}", c.attribute, c.op, c.value);
        }
        out.push('\n');
    }
    out
}
