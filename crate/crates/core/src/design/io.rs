use std::collections::HashMap;
use std::path::Path;

use ndarray::Array2;
use serde::Serialize;

use super::{Dims, StackedDesign};
use crate::{Error, Result};

/// Per-second feature rows of one clip.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureBlock {
    pub clip_id: String,
    pub times: Vec<f64>,
    pub features: Array2<f64>,
}

fn parse_err(path: &Path, line: u64, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

fn open_csv(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file))
}

fn field_f64(path: &Path, line: u64, name: &str, raw: &str) -> Result<f64> {
    raw.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| parse_err(path, line, format!("bad {name} '{raw}'")))
}

/// Reads feature-CSV (`clip_id,time_s,f1..fD`), grouping rows by clip in
/// order of first appearance.
pub fn read_feature_csv(path: impl AsRef<Path>) -> Result<Vec<FeatureBlock>> {
    let path = path.as_ref();
    let mut rdr = open_csv(path)?;
    let headers = rdr.headers().map_err(|e| parse_err(path, 1, e.to_string()))?.clone();
    if headers.len() < 3 || &headers[0] != "clip_id" || &headers[1] != "time_s" {
        return Err(parse_err(path, 1, "expected header 'clip_id,time_s,f1,...,fD'"));
    }
    let d = headers.len() - 2;
    let mut order = Vec::new();
    let mut rows: HashMap<String, (Vec<f64>, Vec<f64>)> = HashMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| parse_err(path, e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != d + 2 {
            return Err(parse_err(path, line, format!("expected {} fields, found {}", d + 2, rec.len())));
        }
        let time = field_f64(path, line, "time_s", &rec[1])?;
        let entry = rows.entry(rec[0].to_string()).or_insert_with(|| {
            order.push(rec[0].to_string());
            (Vec::new(), Vec::new())
        });
        if entry.0.last().is_some_and(|&t| time <= t) {
            return Err(parse_err(path, line, format!("non-monotone time {time} for clip {}", &rec[0])));
        }
        entry.0.push(time);
        for k in 0..d {
            entry.1.push(field_f64(path, line, &headers[k + 2], &rec[k + 2])?);
        }
    }
    order
        .into_iter()
        .map(|clip_id| {
            let (times, flat) = rows.remove(&clip_id).expect("recorded on insert");
            let features = Array2::from_shape_vec((times.len(), d), flat)
                .map_err(|e| Error::dim(e.to_string()))?;
            Ok(FeatureBlock {
                clip_id,
                times,
                features,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabelRow {
    pub clip_id: String,
    /// `None` for static (per-clip) labels.
    pub time_s: Option<f64>,
    pub label: f64,
}

/// Reads label-CSV, either static `clip_id,label` or dynamic
/// `clip_id,time_s,label`.
pub fn read_label_csv(path: impl AsRef<Path>) -> Result<Vec<LabelRow>> {
    let path = path.as_ref();
    let mut rdr = open_csv(path)?;
    let headers = rdr.headers().map_err(|e| parse_err(path, 1, e.to_string()))?.clone();
    let cols: Vec<&str> = headers.iter().collect();
    let dynamic = match cols.as_slice() {
        ["clip_id", "label"] => false,
        ["clip_id", "time_s", "label"] => true,
        _ => return Err(parse_err(path, 1, "expected header 'clip_id,label' or 'clip_id,time_s,label'")),
    };
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| parse_err(path, e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != cols.len() {
            return Err(parse_err(path, line, format!("expected {} fields, found {}", cols.len(), rec.len())));
        }
        let (time_s, label) = if dynamic {
            (Some(field_f64(path, line, "time_s", &rec[1])?), field_f64(path, line, "label", &rec[2])?)
        } else {
            (None, field_f64(path, line, "label", &rec[1])?)
        };
        out.push(LabelRow {
            clip_id: rec[0].to_string(),
            time_s,
            label,
        });
    }
    Ok(out)
}

/// Dimensions and nonzero counts of a design, for debugging dumps.
#[derive(Debug, Clone, Serialize)]
pub struct DesignSummary {
    pub dims: Dims,
    pub nnz_y: usize,
    pub nnz_v: usize,
    pub incidence_rows: usize,
    pub nnz_e: usize,
    pub task_sizes: Vec<usize>,
}

fn nnz(a: &Array2<f64>) -> usize {
    a.iter().filter(|v| **v != 0.0).count()
}

impl DesignSummary {
    pub fn of(design: &StackedDesign) -> Self {
        DesignSummary {
            dims: design.dims(),
            nnz_y: nnz(&design.y),
            nnz_v: design.expert.as_ref().map_or(0, |e| nnz(&e.v)),
            incidence_rows: design.e.as_ref().map_or(0, |e| e.nrows()),
            nnz_e: design.e.as_ref().map_or(0, nnz),
            task_sizes: design.task_rows.iter().map(|r| r.len()).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn features_group_by_clip() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "clip_id,time_s,f1,f2\na,0,1,2\na,1,3,4\nb,0,5,6").unwrap();
        let blocks = read_feature_csv(f.path()).unwrap();
        assert_eq!(blocks.len(), 2);
        assert_eq!(blocks[0].features, ndarray::array![[1., 2.], [3., 4.]]);
        assert_eq!(blocks[1].times, vec![0.0]);
    }

    #[test]
    fn feature_parse_error_has_line() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "clip_id,time_s,f1\na,0,1\na,1,x").unwrap();
        match read_feature_csv(f.path()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn labels_static_and_dynamic() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "clip_id,label\na,1\nb,2").unwrap();
        let l = read_label_csv(f.path()).unwrap();
        assert_eq!(l[1].label, 2.0);
        assert!(l[0].time_s.is_none());
        let mut g = tempfile::NamedTempFile::new().unwrap();
        writeln!(g, "clip_id,time_s,label\na,0,0.5").unwrap();
        assert_eq!(read_label_csv(g.path()).unwrap()[0].time_s, Some(0.0));
    }
}
