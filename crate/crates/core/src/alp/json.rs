//! JSON encoding of [`AlpInstance`].
//!
//! A ratfun is `{"num": [...], "den": [...]}` with coefficients as `"p"` or
//! `"p/q"` strings in ascending powers of `K`; a linear form is
//! `{"terms": {name: ratfun}, "constant": ratfun}`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{AlpInstance, Constraint, LinearForm, RationalLinearTerm, Relation, TermSign, VarBounds, VarId};
use crate::kfield::{parse_rational, Poly, RatFn};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("at `{path}`: {message}")]
pub struct AlpParseError {
    pub path: String,
    pub message: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct RatFnDoc {
    num: Vec<String>,
    den: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LinearFormDoc {
    terms: BTreeMap<String, RatFnDoc>,
    constant: RatFnDoc,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstraintDoc {
    lhs: LinearFormDoc,
    rel: String,
    rhs: LinearFormDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    group: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermDoc {
    sign: i8,
    numerator: LinearFormDoc,
    denominator: LinearFormDoc,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoundsDoc {
    lower: Option<RatFnDoc>,
    upper: Option<RatFnDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AlpDoc {
    variables: Vec<String>,
    constraints: Vec<ConstraintDoc>,
    objective_scale: RatFnDoc,
    objective_terms: Vec<TermDoc>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    var_bounds: BTreeMap<String, BoundsDoc>,
}

pub(crate) fn ratfn_doc(f: &RatFn) -> RatFnDoc {
    let coeffs = |p: &Poly| p.coeffs().iter().map(ToString::to_string).collect();
    RatFnDoc { num: coeffs(f.numerator()), den: coeffs(f.denominator()) }
}

fn form_doc(f: &LinearForm) -> LinearFormDoc {
    LinearFormDoc {
        terms: f.terms().iter().map(|(v, c)| (v.as_str().to_owned(), ratfn_doc(c))).collect(),
        constant: ratfn_doc(f.constant_term()),
    }
}

/// Encodes an instance as pretty-printed JSON.
pub fn serialize(inst: &AlpInstance) -> String {
    let doc = AlpDoc {
        variables: inst.variables.iter().map(|v| v.as_str().to_owned()).collect(),
        constraints: inst
            .constraints
            .iter()
            .map(|c| ConstraintDoc {
                lhs: form_doc(&c.lhs),
                rel: c.rel.as_str().to_owned(),
                rhs: form_doc(&c.rhs),
                group: c.group.clone(),
            })
            .collect(),
        objective_scale: ratfn_doc(&inst.objective_scale),
        objective_terms: inst
            .objective_terms
            .iter()
            .map(|t| TermDoc {
                sign: t.sign.as_i8(),
                numerator: form_doc(&t.numerator),
                denominator: form_doc(&t.denominator),
            })
            .collect(),
        var_bounds: inst
            .var_bounds
            .iter()
            .map(|(v, b)| {
                (
                    v.as_str().to_owned(),
                    BoundsDoc { lower: b.lower.as_ref().map(ratfn_doc), upper: b.upper.as_ref().map(ratfn_doc) },
                )
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("in-memory JSON encoding cannot fail")
}

fn fail(path: &str, message: impl Into<String>) -> AlpParseError {
    AlpParseError { path: path.to_owned(), message: message.into() }
}

fn poly_from(coeffs: &[String], path: &str) -> Result<Poly, AlpParseError> {
    coeffs
        .iter()
        .enumerate()
        .map(|(i, s)| {
            parse_rational(s).ok_or_else(|| fail(&format!("{path}[{i}]"), format!("`{s}` is not a rational")))
        })
        .collect::<Result<Vec<_>, _>>()
        .map(Poly::new)
}

pub(crate) fn ratfn_from(doc: &RatFnDoc, path: &str) -> Result<RatFn, AlpParseError> {
    let num = poly_from(&doc.num, &format!("{path}.num"))?;
    let den = poly_from(&doc.den, &format!("{path}.den"))?;
    RatFn::new(num, den).map_err(|e| fail(&format!("{path}.den"), e.to_string()))
}

fn form_from(doc: &LinearFormDoc, path: &str) -> Result<LinearForm, AlpParseError> {
    let mut f = LinearForm::constant(ratfn_from(&doc.constant, &format!("{path}.constant"))?);
    for (name, c) in &doc.terms {
        f.add_term(VarId::new(name.clone()), ratfn_from(c, &format!("{path}.terms.{name}"))?);
    }
    Ok(f)
}

/// Decodes an instance; errors carry the path of the offending field.
pub fn deserialize(text: &str) -> Result<AlpInstance, AlpParseError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let doc: AlpDoc = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        fail(&path, e.into_inner().to_string())
    })?;

    let mut constraints = Vec::with_capacity(doc.constraints.len());
    for (i, c) in doc.constraints.iter().enumerate() {
        let p = format!("constraints[{i}]");
        let rel = Relation::parse(&c.rel)
            .ok_or_else(|| fail(&format!("{p}.rel"), format!("unknown relation `{}`", c.rel)))?;
        constraints.push(Constraint {
            lhs: form_from(&c.lhs, &format!("{p}.lhs"))?,
            rel,
            rhs: form_from(&c.rhs, &format!("{p}.rhs"))?,
            group: c.group.clone(),
        });
    }
    let mut objective_terms = Vec::with_capacity(doc.objective_terms.len());
    for (i, t) in doc.objective_terms.iter().enumerate() {
        let p = format!("objective_terms[{i}]");
        let sign = match t.sign {
            1 => TermSign::Plus,
            -1 => TermSign::Minus,
            s => return Err(fail(&format!("{p}.sign"), format!("sign must be 1 or -1, found {s}"))),
        };
        objective_terms.push(RationalLinearTerm {
            sign,
            numerator: form_from(&t.numerator, &format!("{p}.numerator"))?,
            denominator: form_from(&t.denominator, &format!("{p}.denominator"))?,
        });
    }
    let mut var_bounds = BTreeMap::new();
    for (name, b) in &doc.var_bounds {
        let p = format!("var_bounds.{name}");
        let lower = b.lower.as_ref().map(|d| ratfn_from(d, &format!("{p}.lower"))).transpose()?;
        let upper = b.upper.as_ref().map(|d| ratfn_from(d, &format!("{p}.upper"))).transpose()?;
        var_bounds.insert(VarId::new(name.clone()), VarBounds { lower, upper });
    }
    Ok(AlpInstance {
        variables: doc.variables.into_iter().map(VarId::new).collect(),
        constraints,
        objective_scale: ratfn_from(&doc.objective_scale, "objective_scale")?,
        objective_terms,
        var_bounds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kfield::rat;

    #[test]
    fn missing_scale_is_rejected() {
        let text = r#"{"variables": [], "constraints": [], "objective_terms": []}"#;
        let e = deserialize(text).unwrap_err();
        assert!(e.message.contains("objective_scale"), "{e}");
    }

    #[test]
    fn bad_coefficient_reports_path() {
        let text = r#"{"variables": ["x"], "constraints": [{"lhs": {"terms": {"x": {"num": ["1/0"], "den": ["1"]}}, "constant": {"num": [], "den": ["1"]}}, "rel": "eq", "rhs": {"terms": {}, "constant": {"num": ["1"], "den": ["1"]}}}], "objective_scale": {"num": ["1"], "den": ["1"]}, "objective_terms": []}"#;
        let e = deserialize(text).unwrap_err();
        assert_eq!(e.path, "constraints[0].lhs.terms.x.num[0]");
    }

    #[test]
    fn bad_relation_and_structure() {
        let text = r#"{"variables": [], "constraints": [{"lhs": {"terms": {}, "constant": {"num": [], "den": ["1"]}}, "rel": "lt", "rhs": {"terms": {}, "constant": {"num": [], "den": ["1"]}}}], "objective_scale": {"num": ["1"], "den": ["1"]}, "objective_terms": []}"#;
        assert_eq!(deserialize(text).unwrap_err().path, "constraints[0].rel");
        let e = deserialize(r#"{"variables": [1]}"#).unwrap_err();
        assert_eq!(e.path, "variables[0]");
        let zero_den = r#"{"variables": [], "constraints": [], "objective_scale": {"num": ["1"], "den": []}, "objective_terms": []}"#;
        assert_eq!(deserialize(zero_den).unwrap_err().path, "objective_scale.den");
    }

    #[test]
    fn fractional_coefficient_survives_round_trip() {
        let mut inst = AlpInstance::new(vec!["x".into()]);
        let third = RatFn::constant(rat(1, 3));
        inst.constraints.push(Constraint::new(
            LinearForm::term("x", third.clone()),
            Relation::Le,
            LinearForm::constant(RatFn::k()),
        ));
        inst.var_bounds.insert("x".into(), VarBounds { lower: Some(RatFn::zero()), upper: None });
        let text = serialize(&inst);
        assert!(text.contains("\"1/3\""));
        let back = deserialize(&text).unwrap();
        assert_eq!(back, inst);
        assert_eq!(back.constraints[0].lhs.coeff(&"x".into()), Some(&third));
    }
}
