//! Accuracy matrices and capacity comparison exports.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use fncap_model::Family;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::EstimateError;

/// Families scoring below this are flagged as unreliable predictors.
pub const ACCURACY_FLAG_THRESHOLD: f64 = 0.75;

/// Test R^2 per model family per function, the shape accuracy comparisons
/// are reported in.
#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyReport {
    /// Column order; always the five families.
    pub families: Vec<Family>,
    /// Row order; function names sorted for stable output.
    pub functions: Vec<String>,
    /// `scores[row][column]`, `None` where a family failed to train.
    pub scores: Vec<Vec<Option<f64>>>,
}

impl AccuracyReport {
    pub fn from_scores(entries: impl IntoIterator<Item = (String, Family, f64)>) -> Self {
        let mut by_function: BTreeMap<String, Vec<Option<f64>>> = BTreeMap::new();
        for (function, family, r2) in entries {
            let row = by_function
                .entry(function)
                .or_insert_with(|| vec![None; Family::ALL.len()]);
            let col = Family::ALL.iter().position(|f| *f == family).expect("known family");
            row[col] = Some(r2);
        }
        let functions: Vec<String> = by_function.keys().cloned().collect();
        let scores = by_function.into_values().collect();
        AccuracyReport { families: Family::ALL.to_vec(), functions, scores }
    }

    pub fn score(&self, function: &str, family: Family) -> Option<f64> {
        let row = self.functions.iter().position(|f| f == function)?;
        let col = self.families.iter().position(|f| *f == family)?;
        self.scores[row][col]
    }

    /// Every (function, family) cell scoring under the 0.75 bar.
    pub fn flagged(&self) -> Vec<(String, Family, f64)> {
        let mut out = Vec::new();
        for (row, function) in self.functions.iter().enumerate() {
            for (col, family) in self.families.iter().enumerate() {
                if let Some(r2) = self.scores[row][col] {
                    if r2 < ACCURACY_FLAG_THRESHOLD {
                        out.push((function.clone(), *family, r2));
                    }
                }
            }
        }
        out
    }

    /// Aligned text table; flagged cells carry a `*` and a footer sums them.
    pub fn to_text(&self) -> String {
        let name_width = self
            .functions
            .iter()
            .map(String::len)
            .chain(["function".len()])
            .max()
            .unwrap_or(8);
        let mut out = String::new();
        write!(out, "{:name_width$}", "function").unwrap();
        for family in &self.families {
            write!(out, "  {:>7}", family.tag()).unwrap();
        }
        out.push('\n');

        for (row, function) in self.functions.iter().enumerate() {
            write!(out, "{function:name_width$}").unwrap();
            for cell in &self.scores[row] {
                match cell {
                    Some(r2) if *r2 < ACCURACY_FLAG_THRESHOLD => {
                        write!(out, "  {:>7}", format!("{r2:.3}*")).unwrap()
                    }
                    Some(r2) => write!(out, "  {:>7}", format!("{r2:.3}")).unwrap(),
                    None => write!(out, "  {:>7}", "-").unwrap(),
                }
            }
            out.push('\n');
        }

        let flagged = self.flagged();
        if !flagged.is_empty() {
            writeln!(
                out,
                "* {} cell(s) below the {ACCURACY_FLAG_THRESHOLD} reliability bar",
                flagged.len()
            )
            .unwrap();
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .functions
            .iter()
            .zip(&self.scores)
            .map(|(function, row)| {
                let mut scores = serde_json::Map::new();
                for (family, cell) in self.families.iter().zip(row) {
                    scores.insert(family.tag().to_string(), json!(cell));
                }
                json!({ "function": function, "r2": scores })
            })
            .collect();
        json!({
            "families": self.families.iter().map(|f| f.tag()).collect::<Vec<_>>(),
            "functions": rows,
            "flag_threshold": ACCURACY_FLAG_THRESHOLD,
        })
    }
}

/// One grid point compared across estimation methods, for external
/// plotting.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapacityTriple {
    pub function: String,
    pub memory_mib: u32,
    pub concurrency: u32,
    pub ideal_rps: f64,
    pub measured_rps: Option<f64>,
    pub model_rps: Option<f64>,
}

pub fn triples_to_csv(rows: &[CapacityTriple]) -> Result<String, EstimateError> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in rows {
        writer.serialize(row)?;
    }
    let bytes = writer.into_inner().map_err(|e| EstimateError::Setup(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}
