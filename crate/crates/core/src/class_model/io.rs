//! JSON family files.
//!
//! ```text
//! {"domain_size": n, "value_kind": "real" | {"integer": p},
//!  "values": [[...], ...], "measure": [w_0, ..., w_{n-1}]}
//! ```
//!
//! Numbers are written as decimal strings (shortest round-trip form) and
//! read back from either strings or JSON numbers. `measure` is optional on
//! input and defaults to uniform.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{FamilyError, FunctionFamily, ProbabilityMeasure, ValueKind};
use crate::Scalar;

#[derive(Serialize, Deserialize)]
struct FamilyFile {
    domain_size: usize,
    value_kind: KindRepr,
    values: Vec<Vec<Number>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    measure: Option<Vec<Number>>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum KindRepr {
    Named(String),
    Integer { integer: u32 },
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Number {
    Text(String),
    Float(f64),
}

impl Number {
    fn parse<S: Scalar>(&self) -> Option<S> {
        match self {
            Number::Text(s) => S::from_str(s.trim()).ok(),
            Number::Float(x) => Some(S::of(*x)),
        }
    }

    fn text(&self) -> String {
        match self {
            Number::Text(s) => s.clone(),
            Number::Float(x) => x.to_string(),
        }
    }
}

pub fn family_from_json<S: Scalar>(
    text: &str,
) -> Result<(FunctionFamily<S>, ProbabilityMeasure<S>), FamilyError> {
    let file: FamilyFile = serde_json::from_str(text)?;
    let kind = match file.value_kind {
        KindRepr::Named(name) if name == "real" => ValueKind::RealBounded,
        KindRepr::Named(name) => return Err(FamilyError::UnknownKind(name)),
        KindRepr::Integer { integer } => ValueKind::IntegerGrid { range_max: integer },
    };
    let mut rows = Vec::with_capacity(file.values.len());
    for (r, row) in file.values.iter().enumerate() {
        if row.len() != file.domain_size {
            return Err(FamilyError::RaggedRow {
                row: r,
                len: row.len(),
                expected: file.domain_size,
            });
        }
        let parsed = row
            .iter()
            .enumerate()
            .map(|(c, num)| {
                num.parse::<S>().ok_or_else(|| FamilyError::Number {
                    row: r,
                    column: c,
                    text: num.text(),
                })
            })
            .collect::<Result<Vec<S>, _>>()?;
        rows.push(parsed);
    }
    let family = FunctionFamily::new(rows, kind)?;
    let measure = match file.measure {
        None => ProbabilityMeasure::uniform(file.domain_size),
        Some(ws) => {
            let weights = ws
                .iter()
                .enumerate()
                .map(|(index, num)| {
                    num.parse::<S>()
                        .ok_or_else(|| FamilyError::WeightNumber { index, text: num.text() })
                })
                .collect::<Result<Vec<S>, _>>()?;
            let measure = ProbabilityMeasure::new(weights)?;
            measure.check_domain(file.domain_size)?;
            measure
        }
    };
    Ok((family, measure))
}

pub fn family_to_json<S: Scalar>(
    family: &FunctionFamily<S>,
    measure: &ProbabilityMeasure<S>,
) -> Result<String, FamilyError> {
    measure.check_domain(family.domain_size())?;
    let file = FamilyFile {
        domain_size: family.domain_size(),
        value_kind: match family.kind() {
            ValueKind::RealBounded => KindRepr::Named("real".into()),
            ValueKind::IntegerGrid { range_max } => KindRepr::Integer { integer: range_max },
        },
        values: family
            .rows()
            .map(|row| row.iter().map(|v| Number::Text(v.to_string())).collect())
            .collect(),
        measure: Some(measure.weights().iter().map(|w| Number::Text(w.to_string())).collect()),
    };
    Ok(serde_json::to_string_pretty(&file)?)
}

pub fn load_family<S: Scalar>(
    path: impl AsRef<Path>,
) -> Result<(FunctionFamily<S>, ProbabilityMeasure<S>), FamilyError> {
    family_from_json(&fs::read_to_string(path)?)
}

pub fn save_family<S: Scalar>(
    path: impl AsRef<Path>,
    family: &FunctionFamily<S>,
    measure: &ProbabilityMeasure<S>,
) -> Result<(), FamilyError> {
    let mut text = family_to_json(family, measure)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}
