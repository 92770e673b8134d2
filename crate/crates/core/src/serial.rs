//! JSON forms of elements, tuples and tables.
//!
//! A scalar is a JSON integer when it is integral and fits in `i64`, and a
//! string `"p/q"` otherwise. Both forms are accepted on input.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde_json::{json, Value};

use crate::carrier::{parse_scalar, Carrier, Coords, Element};
use crate::error::{Error, Result};
use crate::funcspace::FunctionHandle;

pub fn scalar_to_json(q: &BigRational) -> Value {
    match q.is_integer().then(|| q.to_integer().to_i64()).flatten() {
        Some(v) => json!(v),
        None => json!(q.to_string()),
    }
}

pub fn scalar_from_json(v: &Value) -> Result<BigRational> {
    match v {
        Value::Number(n) => match n.as_i64() {
            Some(i) => Ok(BigRational::from_integer(BigInt::from(i))),
            None => parse_scalar(&n.to_string()),
        },
        Value::String(s) => parse_scalar(s.trim()),
        other => Err(Error::InvalidArgument(format!("expected a scalar, got {other}"))),
    }
}

pub fn element_to_json(e: &Element) -> Value {
    match e.coords() {
        Coords::Residue(rs) => json!(rs),
        Coords::Rational(cs) => Value::Array(cs.iter().map(scalar_to_json).collect()),
    }
}

/// Reads an element from a coordinate array, or from a bare scalar for rank 1.
pub fn element_from_json(carrier: &Carrier, v: &Value) -> Result<Element> {
    let coords = match v {
        Value::Array(items) => items.iter().map(scalar_from_json).collect::<Result<Vec<_>>>()?,
        scalar => vec![scalar_from_json(scalar)?],
    };
    carrier.element(coords)
}

pub fn tuple_to_json(args: &[Element]) -> Value {
    Value::Array(args.iter().map(element_to_json).collect())
}

pub fn tuple_from_json(carriers: &[Carrier], v: &Value) -> Result<Vec<Element>> {
    let items = v
        .as_array()
        .ok_or_else(|| Error::InvalidArgument("expected an array of elements".into()))?;
    if items.len() != carriers.len() {
        return Err(Error::ArityMismatch {
            expected: carriers.len(),
            found: items.len(),
        });
    }
    carriers
        .iter()
        .zip(items)
        .map(|(c, item)| element_from_json(c, item))
        .collect()
}

/// Parses a JSON-lines table with one `{"in": [...], "out": [...]}` per line.
pub fn read_table(text: &str, domain: &Carrier, arity: usize, codomain: &Carrier) -> Result<FunctionHandle> {
    let slots = vec![domain.clone(); arity];
    let mut entries = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let v: Value = serde_json::from_str(line)
            .map_err(|e| Error::InvalidArgument(format!("table line {}: {e}", lineno + 1)))?;
        let input = v
            .get("in")
            .ok_or_else(|| Error::InvalidArgument(format!("table line {}: missing `in`", lineno + 1)))?;
        let output = v
            .get("out")
            .ok_or_else(|| Error::InvalidArgument(format!("table line {}: missing `out`", lineno + 1)))?;
        entries.push((tuple_from_json(&slots, input)?, element_from_json(codomain, output)?));
    }
    FunctionHandle::from_table(domain, arity, codomain, entries)
}

/// Inverse of [`read_table`] for table-backed handles.
pub fn write_table(f: &FunctionHandle) -> Option<String> {
    let entries = f.table_entries()?;
    let mut out = String::new();
    for (args, value) in entries {
        out.push_str(&json!({"in": tuple_to_json(&args), "out": element_to_json(&value)}).to_string());
        out.push('\n');
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspace::{tabulate, DEFAULT_TABLE_BUDGET};

    #[test]
    fn scalars_round_trip() {
        for text in ["0", "-7", "3/4", "-1/3", "123456789012345678901234567890"] {
            let q = parse_scalar(text).unwrap();
            assert_eq!(scalar_from_json(&scalar_to_json(&q)).unwrap(), q);
        }
        assert_eq!(scalar_to_json(&parse_scalar("5").unwrap()), json!(5));
        assert_eq!(scalar_to_json(&parse_scalar("1/2").unwrap()), json!("1/2"));
    }

    #[test]
    fn elements_round_trip() {
        let q2 = Carrier::rationals(2);
        let e = q2.parse_element("(1/2,-3)").unwrap();
        assert_eq!(element_to_json(&e), json!(["1/2", -3]));
        assert_eq!(element_from_json(&q2, &element_to_json(&e)).unwrap(), e);
        let c5 = Carrier::cyclic(&[5]);
        assert_eq!(element_from_json(&c5, &json!(7)).unwrap(), c5.element_i64(&[2]).unwrap());
        let qp = Carrier::positive_rationals(1);
        assert!(element_from_json(&qp, &json!([0])).is_err());
    }

    #[test]
    fn tables_round_trip() {
        let c5 = Carrier::cyclic(&[5]);
        let f = FunctionHandle::parse("x1*x2 + 1", &c5, 2, &c5).unwrap();
        let t = tabulate(&f, DEFAULT_TABLE_BUDGET).unwrap();
        let text = write_table(&t).unwrap();
        assert_eq!(text.lines().count(), 25);
        let back = read_table(&text, &c5, 2, &c5).unwrap();
        for x in c5.enumerate().unwrap() {
            for y in c5.enumerate().unwrap() {
                let args = [x.clone(), y];
                assert_eq!(back.evaluate(&args).unwrap(), f.evaluate(&args).unwrap());
            }
        }
        assert!(read_table("{\"in\": [[1]]}", &c5, 1, &c5).is_err());
    }
}
