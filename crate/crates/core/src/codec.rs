//! JSON forms of functions and solution bundles.
//!
//! Keys are emitted in a fixed order and every scalar is written in its text
//! form, so printing a parsed value reproduces it byte for byte.

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::families::{BundleFunctions, FamilyTag, SolutionBundle};
use crate::maps::{AdditiveMap, Exponent, IntervalFunction, Multiplicative};
use crate::residual::EquationId;
use crate::scalar::Scalar;

fn scalar_at(v: &Value, ptr: &str) -> Result<Scalar> {
    match v {
        Value::String(s) => s.parse().map_err(|e: Error| Error::schema(ptr, e.to_string())),
        Value::Number(n) if n.is_i64() => Ok(Scalar::int(n.as_i64().expect("checked"))),
        Value::Number(n) => Ok(Scalar::float(n.as_f64().expect("finite json number"))),
        _ => Err(Error::schema(ptr, "expected a scalar string")),
    }
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str, ptr: &str) -> Result<&'a Value> {
    obj.get(key)
        .ok_or_else(|| Error::schema(format!("{ptr}/{key}"), "missing field"))
}

fn object<'a>(v: &'a Value, ptr: &str) -> Result<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| Error::schema(ptr, "expected an object"))
}

fn array<'a>(v: &'a Value, ptr: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| Error::schema(ptr, "expected an array"))
}

fn additive_at(v: &Value, ptr: &str) -> Result<AdditiveMap> {
    let items = array(v, ptr)?;
    if items.len() != 4 {
        return Err(Error::schema(ptr, format!("expected 4 basis values, got {}", items.len())));
    }
    let vals: Vec<Scalar> = items
        .iter()
        .enumerate()
        .map(|(i, x)| scalar_at(x, &format!("{ptr}/{i}")))
        .collect::<Result<_>>()?;
    let vals: [Scalar; 4] = vals.try_into().expect("length checked");
    AdditiveMap::from_scalars(vals).map_err(|_| Error::schema(ptr, "additive map values must be exact"))
}

fn multiplicative_at(obj: &Map<String, Value>, ptr: &str) -> Result<Multiplicative> {
    match (obj.get("alpha"), obj.get("kind")) {
        (Some(_), Some(_)) => Err(Error::schema(ptr, "give either alpha or kind, not both")),
        (Some(Value::Number(n)), None) => {
            let alpha_ptr = format!("{ptr}/alpha");
            if let Some(k) = n.as_u64() {
                let k = u32::try_from(k).map_err(|_| Error::schema(&alpha_ptr, "exponent too large"))?;
                Multiplicative::power(k).map_err(|e| Error::schema(&alpha_ptr, e.to_string()))
            } else if n.is_i64() {
                Err(Error::schema(&alpha_ptr, "exponent must be positive"))
            } else {
                let a = n.as_f64().expect("json number");
                Multiplicative::real_power(a).map_err(|e| Error::schema(&alpha_ptr, e.to_string()))
            }
        }
        (Some(_), None) => Err(Error::schema(format!("{ptr}/alpha"), "expected a number")),
        (None, Some(Value::String(kind))) => match kind.as_str() {
            "support_indicator" => Ok(Multiplicative::SupportIndicator),
            "one_at_one" => Ok(Multiplicative::OneAtOne),
            "power" => Err(Error::schema(format!("{ptr}/kind"), "power maps take an alpha")),
            other => Err(Error::schema(format!("{ptr}/kind"), format!("unknown multiplicative kind {other:?}"))),
        },
        (None, Some(_)) => Err(Error::schema(format!("{ptr}/kind"), "expected a string")),
        (None, None) => Err(Error::schema(format!("{ptr}/alpha"), "missing field")),
    }
}

fn function_at(v: &Value, ptr: &str) -> Result<IntervalFunction> {
    let obj = object(v, ptr)?;
    let form = field(obj, "form", ptr)?
        .as_str()
        .ok_or_else(|| Error::schema(format!("{ptr}/form"), "expected a string"))?;
    let sub = |key: &str| format!("{ptr}/{key}");
    match form {
        "affine_additive" => {
            let map = additive_at(field(obj, "t", ptr)?, &sub("t"))?;
            let constant = scalar_at(field(obj, "const", ptr)?, &sub("const"))?;
            Ok(IntervalFunction::affine(map, constant))
        }
        "mult_combo" => {
            let scale = scalar_at(field(obj, "scale", ptr)?, &sub("scale"))?;
            let mult = multiplicative_at(obj, ptr)?;
            let additive = additive_at(field(obj, "B", ptr)?, &sub("B"))?;
            let constant = scalar_at(field(obj, "const", ptr)?, &sub("const"))?;
            Ok(IntervalFunction::mult_combo(scale, mult, additive, constant))
        }
        "transformed" => {
            let lambda = scalar_at(field(obj, "lambda", ptr)?, &sub("lambda"))?;
            let inner = function_at(field(obj, "inner", ptr)?, &sub("inner"))?;
            IntervalFunction::transformed(inner, lambda).map_err(|e| Error::schema(sub("lambda"), e.to_string()))
        }
        "table" => {
            let pts = array(field(obj, "points", ptr)?, &sub("points"))?;
            let points = pts
                .iter()
                .enumerate()
                .map(|(i, pair)| {
                    let at = format!("{ptr}/points/{i}");
                    match array(pair, &at)?.as_slice() {
                        [x, y] => Ok((scalar_at(x, &format!("{at}/0"))?, scalar_at(y, &format!("{at}/1"))?)),
                        _ => Err(Error::schema(at, "expected an [x, y] pair")),
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            IntervalFunction::table(points).map_err(|e| Error::schema(sub("points"), e.to_string()))
        }
        other => Err(Error::UnknownForm(other.to_string())),
    }
}

/// Parses a function spec from JSON text.
pub fn parse_function_spec(text: &str) -> Result<IntervalFunction> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::schema("", e.to_string()))?;
    function_from_json(&v)
}

pub fn function_from_json(v: &Value) -> Result<IntervalFunction> {
    function_at(v, "")
}

fn additive_json(a: &AdditiveMap) -> Value {
    Value::Array(a.basis_values().iter().map(|e| json!(e.to_string())).collect())
}

pub fn function_to_json(f: &IntervalFunction) -> Value {
    let mut out = Map::new();
    match f {
        IntervalFunction::AffineAdditive { map, constant } => {
            out.insert("form".into(), json!("affine_additive"));
            out.insert("t".into(), additive_json(map));
            out.insert("const".into(), json!(constant.to_string()));
        }
        IntervalFunction::MultCombo {
            scale,
            mult,
            additive,
            constant,
        } => {
            out.insert("form".into(), json!("mult_combo"));
            out.insert("scale".into(), json!(scale.to_string()));
            match mult {
                Multiplicative::Power(Exponent::Integer(k)) => {
                    out.insert("alpha".into(), json!(k));
                }
                Multiplicative::Power(Exponent::Real(a)) => {
                    out.insert("alpha".into(), json!(a));
                }
                Multiplicative::SupportIndicator => {
                    out.insert("kind".into(), json!("support_indicator"));
                }
                Multiplicative::OneAtOne => {
                    out.insert("kind".into(), json!("one_at_one"));
                }
            }
            out.insert("B".into(), additive_json(additive));
            out.insert("const".into(), json!(constant.to_string()));
        }
        IntervalFunction::Transformed { inner, lambda } => {
            out.insert("form".into(), json!("transformed"));
            out.insert("lambda".into(), json!(lambda.to_string()));
            out.insert("inner".into(), function_to_json(inner));
        }
        IntervalFunction::Table { points } => {
            out.insert("form".into(), json!("table"));
            let pts = points
                .iter()
                .map(|(x, y)| json!([x.to_string(), y.to_string()]))
                .collect();
            out.insert("points".into(), Value::Array(pts));
        }
    }
    Value::Object(out)
}

pub fn print_function_spec(f: &IntervalFunction) -> String {
    function_to_json(f).to_string()
}

pub fn bundle_to_json(b: &SolutionBundle) -> Value {
    let mut params = Map::new();
    if let Some(l) = &b.lambda {
        params.insert("lambda".into(), json!(l.to_string()));
    }
    if let Some(c) = &b.constant {
        params.insert("c".into(), json!(c.to_string()));
    }
    for (k, v) in &b.params {
        if !params.contains_key(k) {
            params.insert(k.clone(), v.clone());
        }
    }
    let list = |fs: &[IntervalFunction]| Value::Array(fs.iter().map(function_to_json).collect());
    let mut functions = Map::new();
    match &b.functions {
        BundleFunctions::Eq110 { f, g } => {
            functions.insert("f".into(), function_to_json(f));
            functions.insert("g".into(), list(g));
        }
        BundleFunctions::Eq18 { h, k } => {
            functions.insert("h".into(), function_to_json(h));
            functions.insert("k".into(), list(k));
        }
        BundleFunctions::Eq111 { phi } => {
            functions.insert("phi".into(), function_to_json(phi));
        }
        BundleFunctions::Eq21 { psi } => {
            functions.insert("psi".into(), function_to_json(psi));
        }
        BundleFunctions::Eq23 { psi } => {
            functions.insert("psi".into(), list(psi));
        }
    }
    let mut out = Map::new();
    out.insert("equation".into(), json!(b.equation().label()));
    out.insert("family".into(), json!(b.family.label()));
    out.insert("n".into(), json!(b.n));
    out.insert("m".into(), json!(b.m));
    out.insert("params".into(), Value::Object(params));
    out.insert("functions".into(), Value::Object(functions));
    Value::Object(out)
}

fn usize_at(obj: &Map<String, Value>, key: &str) -> Result<usize> {
    field(obj, key, "")?
        .as_u64()
        .map(|v| v as usize)
        .ok_or_else(|| Error::schema(format!("/{key}"), "expected a non-negative integer"))
}

pub fn bundle_from_json(v: &Value) -> Result<SolutionBundle> {
    let obj = object(v, "")?;
    let eq_text = field(obj, "equation", "")?
        .as_str()
        .ok_or_else(|| Error::schema("/equation", "expected a string"))?;
    let equation: EquationId = eq_text
        .parse()
        .map_err(|e: Error| Error::schema("/equation", e.to_string()))?;
    let family: FamilyTag = match obj.get("family") {
        None => FamilyTag::None,
        Some(Value::String(s)) => s.parse().map_err(|e: Error| Error::schema("/family", e.to_string()))?,
        Some(_) => return Err(Error::schema("/family", "expected a string")),
    };
    let n = usize_at(obj, "n")?;
    let m = match obj.get("m") {
        Some(_) => usize_at(obj, "m")?,
        None => n,
    };
    let params = match obj.get("params") {
        None => Map::new(),
        Some(p) => object(p, "/params")?.clone(),
    };
    let lambda = params
        .get("lambda")
        .map(|l| scalar_at(l, "/params/lambda"))
        .transpose()?;
    let constant = params.get("c").filter(|_| equation == EquationId::Eq21).map(|c| scalar_at(c, "/params/c")).transpose()?;
    let fobj = object(field(obj, "functions", "")?, "/functions")?;
    let one = |key: &str| function_at(field(fobj, key, "/functions")?, &format!("/functions/{key}"));
    let many = |key: &str, expected: usize| -> Result<Vec<IntervalFunction>> {
        let ptr = format!("/functions/{key}");
        let items = array(field(fobj, key, "/functions")?, &ptr)?;
        if items.len() != expected {
            return Err(Error::schema(&ptr, format!("expected {expected} functions, got {}", items.len())));
        }
        items
            .iter()
            .enumerate()
            .map(|(i, x)| function_at(x, &format!("{ptr}/{i}")))
            .collect()
    };
    let functions = match equation {
        EquationId::Eq110 => BundleFunctions::Eq110 { f: one("f")?, g: many("g", m)? },
        EquationId::Eq18 => {
            if lambda.as_ref().map_or(true, |l| l.is_zero()) {
                return Err(Error::schema("/params/lambda", "equation 1.8 needs a non-zero lambda"));
            }
            BundleFunctions::Eq18 { h: one("h")?, k: many("k", m)? }
        }
        EquationId::Eq15 => {
            let h = one("h")?;
            if lambda.as_ref().map_or(true, |l| l.is_zero()) {
                return Err(Error::schema("/params/lambda", "equation 1.5 needs a non-zero lambda"));
            }
            BundleFunctions::Eq18 { k: vec![h.clone(); m], h }
        }
        EquationId::Eq111 => BundleFunctions::Eq111 { phi: one("phi")? },
        EquationId::Eq21 => {
            if constant.is_none() {
                return Err(Error::schema("/params/c", "missing field"));
            }
            BundleFunctions::Eq21 { psi: one("psi")? }
        }
        EquationId::Eq23 => BundleFunctions::Eq23 { psi: many("psi", n)? },
        EquationId::Eq17 => {
            return Err(Error::UnsupportedEquation("equation 1.7 has no bundle form".into()));
        }
    };
    let lambda = if matches!(functions, BundleFunctions::Eq18 { .. }) { lambda } else { None };
    let mut params = params;
    params.shift_remove("lambda");
    if constant.is_some() {
        params.shift_remove("c");
    }
    Ok(SolutionBundle {
        family,
        n,
        m,
        lambda,
        constant,
        params,
        functions,
    })
}

pub fn parse_bundle(text: &str) -> Result<SolutionBundle> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::schema("", e.to_string()))?;
    bundle_from_json(&v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{draw_bundle, DrawVariant};
    use crate::maps::HamelTail;
    use proptest::prelude::*;

    fn s(text: &str) -> Scalar {
        text.parse().unwrap()
    }

    #[test]
    fn documented_examples() {
        let f = parse_function_spec(r#"{"form":"mult_combo","scale":"1","alpha":2,"B":["0","0","0","0"],"const":"0"}"#).unwrap();
        assert_eq!(f, IntervalFunction::power(2).unwrap());
        let h = parse_function_spec(
            r#"{"form":"transformed","lambda":"-1/2","inner":{"form":"mult_combo","scale":"1","alpha":2,"B":["0","0","0","0"],"const":"0"}}"#,
        )
        .unwrap();
        assert_eq!(h.eval(&s("1/2")).unwrap(), s("1/2"));
        assert_eq!(parse_function_spec(r#"{"form":"bogus"}"#).unwrap_err().code(), "unknown-form");
    }

    #[test]
    fn schema_pointers() {
        let err = parse_function_spec(r#"{"form":"affine_additive","t":["0","1","x","0"],"const":"0"}"#).unwrap_err();
        assert_eq!(err, Error::schema("/t/2", err_message(&err)));
        let err = parse_function_spec(r#"{"form":"transformed","lambda":"1","inner":{"form":"mult_combo","scale":"1","B":["0","0","0","0"],"const":"0"}}"#)
            .unwrap_err();
        assert!(matches!(&err, Error::SchemaViolation { pointer, .. } if pointer == "/inner/alpha"));
        let err = parse_function_spec(r#"{"form":"table","points":[["0","1"],["1"]]}"#).unwrap_err();
        assert!(matches!(&err, Error::SchemaViolation { pointer, .. } if pointer == "/points/1"));
        assert_eq!(parse_function_spec("[1").unwrap_err().code(), "schema-violation");
    }

    fn err_message(e: &Error) -> String {
        match e {
            Error::SchemaViolation { message, .. } => message.clone(),
            _ => String::new(),
        }
    }

    #[test]
    fn print_has_fixed_key_order() {
        let f = IntervalFunction::mult_combo(s("2"), Multiplicative::SupportIndicator, AdditiveMap::zero(), s("1/10"));
        assert_eq!(
            print_function_spec(&f),
            r#"{"form":"mult_combo","scale":"2","kind":"support_indicator","B":["0","0","0","0"],"const":"1/10"}"#
        );
        let real = IntervalFunction::multiplicative(Multiplicative::real_power(2.0).unwrap());
        let text = print_function_spec(&real);
        assert!(text.contains(r#""alpha":2.0"#));
        assert_eq!(parse_function_spec(&text).unwrap(), real);
    }

    #[test]
    fn bundles_round_trip() {
        for family in FamilyTag::ALL.iter().filter(|t| **t != FamilyTag::None) {
            for variant in [DrawVariant::Plain, DrawVariant::Hamel, DrawVariant::OneAtOne] {
                let b = draw_bundle(*family, 3, 4, 3, variant).unwrap();
                let text = bundle_to_json(&b).to_string();
                let back = parse_bundle(&text).unwrap();
                assert_eq!(bundle_to_json(&back).to_string(), text);
                assert_eq!(back.functions, b.functions);
                assert_eq!(back.lambda, b.lambda);
                assert_eq!(back.constant, b.constant);
            }
        }
    }

    fn small() -> impl Strategy<Value = Scalar> {
        (-20i64..=20, 1i64..=9).prop_map(|(a, b)| Scalar::ratio(a, b).unwrap())
    }

    fn any_function() -> impl Strategy<Value = IntervalFunction> {
        let tail = prop::array::uniform3(-5i64..=5).prop_map(HamelTail::from_ints);
        let affine = (small(), small(), tail.clone()).prop_map(|(a1, c, t)| {
            IntervalFunction::affine(AdditiveMap::with_tail(a1.as_exact().unwrap(), &t), c)
        });
        let mult = (small(), 1u32..6, small(), tail, 0usize..3).prop_map(|(sc, k, c, t, kind)| {
            let m = match kind {
                0 => Multiplicative::power(k).unwrap(),
                1 => Multiplicative::SupportIndicator,
                _ => Multiplicative::OneAtOne,
            };
            IntervalFunction::mult_combo(sc, m, AdditiveMap::with_tail(&Default::default(), &t), c)
        });
        let base = prop_oneof![affine, mult];
        base.prop_recursive(2, 4, 1, |inner| {
            (inner, small().prop_filter("non-zero", |l| !l.is_zero()))
                .prop_map(|(f, l)| IntervalFunction::transformed(f, l).unwrap())
        })
    }

    proptest! {
        #[test]
        fn function_specs_round_trip(f in any_function()) {
            let text = print_function_spec(&f);
            let back = parse_function_spec(&text).unwrap();
            prop_assert_eq!(&back, &f);
            prop_assert_eq!(print_function_spec(&back), text);
        }
    }
}
