use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::eval::{EvalRecord, Method};
use crate::error::{Error, Result};
use crate::synth::SplitTag;

/// Appends records as JSON lines, one `write` per record.
pub fn write_records(path: &Path, records: &[EvalRecord]) -> Result<()> {
    let mut f = std::fs::OpenOptions::new().create(true).append(true).open(path)?;
    for r in records {
        let mut line = serde_json::to_string(r)?;
        line.push('\n');
        f.write_all(line.as_bytes())?;
    }
    Ok(())
}

pub fn read_records(path: &Path) -> Result<Vec<EvalRecord>> {
    let reader = BufReader::new(std::fs::File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::format(path, format!("line {}: {e}", i + 1)))?);
    }
    Ok(out)
}

/// Means over the successful records of one (method, split) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub method: Method,
    /// `None` pools every split.
    pub split: Option<SplitTag>,
    pub count: usize,
    pub failures: usize,
    pub mean_jaccard: Option<f64>,
    pub mean_hausdorff_mm: Option<f64>,
    pub mean_time_s: Option<f64>,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (mut sum, mut n) = (0.0, 0usize);
    for v in values {
        sum += v;
        n += 1;
    }
    (n > 0).then(|| sum / n as f64)
}

/// One row per (method, split) present in `records`, plus a pooled row
/// per method, ordered by method then split.
pub fn aggregate(records: &[EvalRecord]) -> Vec<AggregateRow> {
    let mut cells: BTreeMap<(Method, Option<SplitTag>), Vec<&EvalRecord>> = BTreeMap::new();
    for r in records {
        cells.entry((r.method, Some(r.split))).or_default().push(r);
        cells.entry((r.method, None)).or_default().push(r);
    }
    cells
        .into_iter()
        .map(|((method, split), rs)| {
            let ok: Vec<&&EvalRecord> = rs.iter().filter(|r| !r.failed()).collect();
            AggregateRow {
                method,
                split,
                count: ok.len(),
                failures: rs.len() - ok.len(),
                mean_jaccard: mean(ok.iter().filter_map(|r| r.jaccard)),
                mean_hausdorff_mm: mean(ok.iter().filter_map(|r| r.hausdorff_mm)),
                mean_time_s: mean(ok.iter().filter_map(|r| r.time_s)),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaRow {
    pub split: SplitTag,
    /// Mean of `jaccard(with) − jaccard(without)` over samples scored by both.
    pub mean_delta: f64,
    pub pairs: usize,
}

/// Per-split Jaccard gain of `with` over `without`, in split order.
pub fn delta_report(records: &[EvalRecord], with: Method, without: Method) -> Result<Vec<DeltaRow>> {
    for m in [with, without] {
        if !records.iter().any(|r| r.method == m) {
            return Err(Error::MissingMethod(format!("no records for {m}")));
        }
    }
    let key = |r: &EvalRecord| (r.split, r.mesh_id.clone(), r.view_id);
    let base: BTreeMap<_, f64> = records
        .iter()
        .filter(|r| r.method == without && !r.failed())
        .filter_map(|r| r.jaccard.map(|j| (key(r), j)))
        .collect();
    let mut rows = Vec::new();
    for split in SplitTag::ALL {
        let deltas = records
            .iter()
            .filter(|r| r.method == with && r.split == split && !r.failed())
            .filter_map(|r| Some(r.jaccard? - base.get(&key(r))?));
        let (mut sum, mut n) = (0.0, 0);
        for d in deltas {
            sum += d;
            n += 1;
        }
        if n > 0 {
            rows.push(DeltaRow {
                split,
                mean_delta: sum / n as f64,
                pairs: n,
            });
        }
    }
    Ok(rows)
}

/// CSV renderings of the aggregate tables.
#[derive(Debug, Clone, PartialEq)]
pub struct Tables {
    /// Methods × splits, mean Jaccard.
    pub jaccard: String,
    /// Methods × splits, mean symmetric surface distance in mm.
    pub hausdorff: String,
    /// Method, mean completion time, record and failure counts.
    pub timing: String,
    pub delta: Option<String>,
}

impl Tables {
    pub fn build(records: &[EvalRecord]) -> Self {
        let rows = aggregate(records);
        let table = |pick: fn(&AggregateRow) -> Option<f64>| {
            let mut s = String::from("method");
            for split in SplitTag::ALL {
                write!(s, ",{split}").unwrap();
            }
            s.push_str(",all\n");
            let mut methods: Vec<Method> = rows.iter().map(|r| r.method).collect();
            methods.dedup();
            for m in methods {
                s.push_str(m.as_str());
                for split in SplitTag::ALL.map(Some).into_iter().chain([None]) {
                    let v = rows.iter().find(|r| r.method == m && r.split == split).and_then(pick);
                    match v {
                        Some(v) => write!(s, ",{v:.4}").unwrap(),
                        None => s.push(','),
                    }
                }
                s.push('\n');
            }
            s
        };
        let mut timing = String::from("method,mean_time_s,records,failures\n");
        for r in rows.iter().filter(|r| r.split.is_none()) {
            writeln!(timing, "{},{:.6},{},{}", r.method, r.mean_time_s.unwrap_or(f64::NAN), r.count, r.failures).unwrap();
        }
        let delta = delta_report(records, Method::CnnTactile, Method::CnnDepth).ok().map(|rows| {
            let mut s = String::from("split,mean_delta,pairs\n");
            for r in rows {
                writeln!(s, "{},{:.6},{}", r.split, r.mean_delta, r.pairs).unwrap();
            }
            s
        });
        Self {
            jaccard: table(|r| r.mean_jaccard),
            hausdorff: table(|r| r.mean_hausdorff_mm),
            timing,
            delta,
        }
    }

    /// Writes `jaccard.csv`, `hausdorff.csv`, `timing.csv` and, when both
    /// CNN methods are present, `delta.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("jaccard.csv"), &self.jaccard)?;
        std::fs::write(dir.join("hausdorff.csv"), &self.hausdorff)?;
        std::fs::write(dir.join("timing.csv"), &self.timing)?;
        if let Some(d) = &self.delta {
            std::fs::write(dir.join("delta.csv"), d)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(method: Method, split: SplitTag, mesh: &str, j: f64) -> EvalRecord {
        EvalRecord {
            method,
            split,
            mesh_id: mesh.into(),
            view_id: 0,
            jaccard: Some(j),
            hausdorff_mm: Some(10.0 * j),
            time_s: Some(0.1),
            watertight: Some(true),
            error: None,
        }
    }

    #[test]
    fn aggregates_are_means_and_skip_failures() {
        let mut rs = vec![
            rec(Method::Hull, SplitTag::TrainView, "a", 0.5),
            rec(Method::Hull, SplitTag::TrainView, "b", 0.7),
            rec(Method::Hull, SplitTag::HoldoutMesh, "c", 0.2),
        ];
        let mut bad = rec(Method::Hull, SplitTag::TrainView, "d", 0.0);
        bad.error = Some("boom".into());
        rs.push(bad);
        let agg = aggregate(&rs);
        let tv = agg.iter().find(|r| r.split == Some(SplitTag::TrainView)).unwrap();
        assert_eq!((tv.count, tv.failures), (2, 1));
        assert!((tv.mean_jaccard.unwrap() - 0.6).abs() < 1e-15);
        let all = agg.iter().find(|r| r.split.is_none()).unwrap();
        assert!((all.mean_jaccard.unwrap() - (0.5 + 0.7 + 0.2) / 3.0).abs() < 1e-15);
    }

    #[test]
    fn deltas_pair_samples() {
        let rs = vec![
            rec(Method::CnnDepth, SplitTag::TrainView, "a", 0.5),
            rec(Method::CnnTactile, SplitTag::TrainView, "a", 0.6),
            rec(Method::CnnDepth, SplitTag::HoldoutMesh, "b", 0.4),
            rec(Method::CnnTactile, SplitTag::HoldoutMesh, "b", 0.7),
        ];
        let d = delta_report(&rs, Method::CnnTactile, Method::CnnDepth).unwrap();
        assert_eq!(d.len(), 2);
        assert!((d[0].mean_delta - 0.1).abs() < 1e-12 && (d[1].mean_delta - 0.3).abs() < 1e-12);
        let same = delta_report(&rs, Method::CnnDepth, Method::CnnDepth).unwrap();
        assert!(same.iter().all(|r| r.mean_delta == 0.0));
        assert!(matches!(delta_report(&rs, Method::Gpis, Method::CnnDepth), Err(Error::MissingMethod(_))));
    }

    #[test]
    fn records_roundtrip_jsonl() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.jsonl");
        let rs = vec![rec(Method::Gpis, SplitTag::HoldoutView, "x", 0.25)];
        write_records(&p, &rs).unwrap();
        write_records(&p, &rs).unwrap();
        assert_eq!(read_records(&p).unwrap(), [rs.clone(), rs].concat());
        let t = Tables::build(&read_records(&p).unwrap());
        assert!(t.jaccard.contains("gpis,,0.2500,,0.2500"));
        assert!(t.delta.is_none());
    }
}
