//! Report assembly and CSV tables for external plotting.

use std::collections::BTreeMap;
use std::path::Path;

use anneal_core::ensemble::{build_report, build_reports_by_size, enhancement_values, paired_values, EnsembleReport};
use anneal_core::{DriverKind, RunRecord};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FullReport {
    pub pooled: EnsembleReport,
    pub by_size: BTreeMap<usize, EnsembleReport>,
}

pub fn full_report(records: &[RunRecord]) -> Result<FullReport> {
    Ok(FullReport {
        pooled: build_report(records)?,
        by_size: build_reports_by_size(records)?,
    })
}

fn cell(value: Option<f64>) -> String {
    value.map(|v| v.to_string()).unwrap_or_default()
}

fn write_table(path: &Path, header: &[&str], rows: Vec<Vec<String>>) -> Result<()> {
    let io = |e: csv::Error| HarnessError::Io {
        path: path.to_path_buf(),
        source: e.into(),
    };
    let mut out = csv::Writer::from_path(path).map_err(io)?;
    out.write_record(header).map_err(io)?;
    for row in rows {
        out.write_record(row).map_err(io)?;
    }
    out.flush().map_err(|e| HarnessError::io(path, e))
}

/// Per-size summary rows: one per (n, coupled driver).
pub fn size_sweep_rows(report: &FullReport) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for (n, r) in &report.by_size {
        for d in &r.drivers {
            rows.push(vec![
                n.to_string(),
                d.driver.to_string(),
                r.instances.to_string(),
                d.affected.len().to_string(),
                d.ratio.to_string(),
                cell(d.enhancement.map(|t| t.p1)),
                cell(d.enhancement.map(|t| t.p50)),
                cell(d.enhancement.map(|t| t.p99)),
                d.infinite_enhancements.to_string(),
                cell(d.median_p0),
                cell(d.median_p),
                cell(d.median_gap0),
                cell(d.median_gap),
                cell(d.mean_anticrossings0),
                cell(d.mean_anticrossings),
            ]);
        }
    }
    rows
}

/// Writes `report.json` and the CSV tables into `dir`.
pub fn write_report(records: &[RunRecord], report: &FullReport, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let json = serde_json::to_string_pretty(report).expect("report serializes") + "\n";
    let path = dir.join("report.json");
    std::fs::write(&path, json).map_err(|e| HarnessError::io(&path, e))?;

    write_table(
        &dir.join("size_sweep.csv"),
        &[
            "n", "driver", "instances", "affected", "ratio", "p_en_1", "p_en_50", "p_en_99", "infinite",
            "median_p0", "median_p", "median_gap0", "median_gap", "mean_anticrossings0", "mean_anticrossings",
        ],
        size_sweep_rows(report),
    )?;

    let mut enhancement = Vec::new();
    let mut probability = Vec::new();
    let mut gap = Vec::new();
    let mut anticrossings = Vec::new();
    for (n, r) in &report.by_size {
        let subset: Vec<RunRecord> = records.iter().filter(|x| x.n == *n).cloned().collect();
        for d in &r.drivers {
            let label = d.driver.to_string();
            let enh = enhancement_values(&subset, &d.affected, d.driver)?;
            for (id, v) in &enh.finite {
                enhancement.push(vec![label.clone(), id.n.to_string(), id.seed.to_string(), v.to_string()]);
            }
            for id in &enh.infinite {
                enhancement.push(vec![label.clone(), id.n.to_string(), id.seed.to_string(), "inf".into()]);
            }
            let tables: [(&mut Vec<Vec<String>>, fn(&RunRecord) -> Option<f64>); 3] = [
                (&mut probability, |x| x.success_probability),
                (&mut gap, |x| x.min_gap),
                (&mut anticrossings, |x| x.anticrossings.map(|c| c as f64)),
            ];
            for (table, field) in tables {
                for (id, base, value) in paired_values(&subset, &d.affected, d.driver, field)? {
                    table.push(vec![
                        label.clone(),
                        id.n.to_string(),
                        id.seed.to_string(),
                        base.to_string(),
                        value.to_string(),
                    ]);
                }
            }
        }
    }
    write_table(&dir.join("enhancement.csv"), &["driver", "n", "seed", "p_en"], enhancement)?;
    write_table(&dir.join("scatter_probability.csv"), &["driver", "n", "seed", "p0", "p"], probability)?;
    write_table(&dir.join("scatter_gap.csv"), &["driver", "n", "seed", "gap0", "gap"], gap)?;
    write_table(
        &dir.join("scatter_anticrossings.csv"),
        &["driver", "n", "seed", "anticrossings0", "anticrossings"],
        anticrossings,
    )?;
    Ok(())
}

/// Human-readable summary of the pooled and per-size ratios.
pub fn summary_text(report: &FullReport) -> String {
    let mut out = String::new();
    let mut line = |label: String, r: &EnsembleReport| {
        let ratio = |k: DriverKind| r.driver(k).map_or(0.0, |d| d.ratio);
        out.push_str(&format!(
            "{label:>6}  L={:<6} R_F={:.4}  R_A={:.4}  R_M={:.4}  excluded={}\n",
            r.instances,
            ratio(DriverKind::Ferro),
            ratio(DriverKind::Antiferro),
            ratio(DriverKind::Mixed),
            r.excluded.len()
        ));
    };
    for (n, r) in &report.by_size {
        line(format!("n={n}"), r);
    }
    line("all".into(), &report.pooled);
    out
}
