use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::snippets::Half;
use crate::annotations::Attribute;
use crate::{Error, Result};

/// What the cells of a table measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Rmse,
    Accuracy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellKey {
    pub model: String,
    pub attribute: Attribute,
    pub feature_set: String,
    pub snippet_s: Option<f64>,
    pub half: Option<Half>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CellValue {
    Ok {
        mean: f64,
        /// Sample standard deviation over runs; absent for a single run.
        sd: Option<f64>,
        sparsity: f64,
        runs: usize,
    },
    Failed { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub key: CellKey,
    pub value: CellValue,
}

/// Per-model results of an experiment, one cell per configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub metric: Metric,
    pub cells: Vec<Cell>,
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(String::new, |x| x.to_string())
}

impl ResultTable {
    pub fn new(metric: Metric) -> Self {
        ResultTable { metric, cells: Vec::new() }
    }

    pub fn get(&self, model: &str, attribute: Attribute) -> impl Iterator<Item = &Cell> + '_ {
        let model = model.to_string();
        self.cells
            .iter()
            .filter(move |c| c.key.model == model && c.key.attribute == attribute)
    }

    /// Mean of the first successful cell of `model`.
    pub fn mean_of(&self, model: &str) -> Option<f64> {
        self.cells.iter().find_map(|c| match (&c.value, c.key.model == model) {
            (CellValue::Ok { mean, .. }, true) => Some(*mean),
            _ => None,
        })
    }

    pub fn failed(&self) -> impl Iterator<Item = &Cell> + '_ {
        self.cells.iter().filter(|c| matches!(c.value, CellValue::Failed { .. }))
    }

    /// One row per cell:
    /// `model,attribute,feature_set,snippet_s,half,mean,sd,sparsity,status`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        let wrap = |e: csv::Error| Error::invalid(format!("writing result table: {e}"));
        out.write_record(["model", "attribute", "feature_set", "snippet_s", "half", "mean", "sd", "sparsity", "status"])
            .map_err(wrap)?;
        for cell in &self.cells {
            let k = &cell.key;
            let mut row = vec![
                k.model.clone(),
                k.attribute.to_string(),
                k.feature_set.clone(),
                opt(&k.snippet_s),
                opt(&k.half),
            ];
            match &cell.value {
                CellValue::Ok { mean, sd, sparsity, .. } => {
                    row.extend([mean.to_string(), opt(sd), sparsity.to_string(), "ok".into()]);
                }
                CellValue::Failed { reason } => {
                    row.extend([String::new(), String::new(), String::new(), format!("failed: {reason}")]);
                }
            }
            out.write_record(&row).map_err(wrap)?;
        }
        out.flush().map_err(|e| Error::invalid(format!("writing result table: {e}")))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    /// Aligned plain-text rendering, `mean ± sd (sparsity)` per cell.
    pub fn to_text(&self) -> String {
        let header = ["model", "attribute", "features", "snippet_s", "half", match self.metric {
            Metric::Rmse => "rmse",
            Metric::Accuracy => "accuracy",
        }];
        let mut rows: Vec<[String; 6]> = vec![header.map(String::from)];
        for cell in &self.cells {
            let k = &cell.key;
            let value = match &cell.value {
                CellValue::Ok { mean, sd, sparsity, .. } => match sd {
                    Some(sd) => format!("{mean:.4} ± {sd:.4} ({sparsity:.2})"),
                    None => format!("{mean:.4} ({sparsity:.2})"),
                },
                CellValue::Failed { reason } => format!("FAILED: {reason}"),
            };
            rows.push([
                k.model.clone(),
                k.attribute.to_string(),
                k.feature_set.clone(),
                k.snippet_s.map_or("-".into(), |s| s.to_string()),
                k.half.map_or("-".into(), |h| h.to_string()),
                value,
            ]);
        }
        let mut widths = [0usize; 6];
        for row in &rows {
            for (w, s) in widths.iter_mut().zip(row) {
                *w = (*w).max(s.chars().count());
            }
        }
        let mut text = String::new();
        for row in &rows {
            let line: Vec<String> = row
                .iter()
                .zip(&widths)
                .map(|(s, &w)| format!("{s:<w$}"))
                .collect();
            let _ = writeln!(text, "{}", line.join("  ").trim_end());
        }
        text
    }
}
