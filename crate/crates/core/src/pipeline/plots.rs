use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::StudyReport;
use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file: String,
    pub rows: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotManifest {
    pub files: Vec<ManifestEntry>,
}

struct Table {
    name: &'static str,
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(name: &'static str, header: &[&'static str]) -> Self {
        Self { name, header: header.to_vec(), rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    fn render(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.into_inner().map_err(|e| Error::Csv(e.to_string()))
    }
}

fn num(v: f64) -> String {
    v.to_string()
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn phase_pct(i: usize, ell: usize) -> String {
    num(100.0 * i as f64 / (ell - 1).max(1) as f64)
}

fn tables(report: &StudyReport) -> Vec<Table> {
    let mut out = Vec::new();

    let mut t = Table::new(
        "fatigue_bars.csv",
        &["condition", "muscle", "rms_mean", "rms_sd", "median_freq_mean", "median_freq_sd", "rms_change_pct", "median_freq_change_pct"],
    );
    for f in &report.fatigue.by_condition {
        let change = report.fatigue.change.as_ref().filter(|_| f.condition == crate::Condition::Fatigue);
        for (i, m) in report.muscles.iter().enumerate() {
            t.push(vec![
                f.condition.to_string(),
                m.clone(),
                num(f.rms_mean[i]),
                opt(f.rms_sd.as_ref().map(|v| v[i])),
                num(f.median_freq_mean[i]),
                opt(f.median_freq_sd.as_ref().map(|v| v[i])),
                opt(change.map(|c| c.rms_pct_mean[i])),
                opt(change.map(|c| c.median_freq_pct_mean[i])),
            ]);
        }
    }
    out.push(t);

    if let Some(sec) = &report.synergy {
        let mut t = Table::new("vaf_curves.csv", &["condition", "rank", "vaf_mean", "vaf_sd", "selected"]);
        for c in &sec.vaf_curves {
            for (k, &r) in c.ranks.iter().enumerate() {
                t.push(vec![
                    c.condition.to_string(),
                    r.to_string(),
                    num(c.mean[k]),
                    opt(c.sd.as_ref().map(|v| v[k])),
                    (r == c.selected_rank).to_string(),
                ]);
            }
        }
        out.push(t);

        let mut t =
            Table::new("synergy_weights.csv", &["condition", "synergy", "muscle", "weight_mean", "weight_sd", "significant"]);
        for c in &sec.conditions {
            for (k, label) in sec.labels.iter().enumerate() {
                for (i, m) in report.muscles.iter().enumerate() {
                    let flag = sec
                        .weight_flags
                        .iter()
                        .find(|f| &f.synergy == label && &f.muscle == m && c.condition == crate::Condition::Fatigue)
                        .map(|f| f.significant.to_string())
                        .unwrap_or_default();
                    t.push(vec![
                        c.condition.to_string(),
                        label.clone(),
                        m.clone(),
                        num(c.weights_mean[k][i]),
                        opt(c.weights_sd.as_ref().map(|v| v[k][i])),
                        flag,
                    ]);
                }
            }
        }
        out.push(t);

        let mut t = Table::new("activations.csv", &["condition", "synergy", "phase_pct", "mean", "se"]);
        for c in &sec.conditions {
            for (k, label) in sec.labels.iter().enumerate() {
                let ell = c.activation_mean[k].len();
                for p in 0..ell {
                    t.push(vec![
                        c.condition.to_string(),
                        label.clone(),
                        phase_pct(p, ell),
                        num(c.activation_mean[k][p]),
                        opt(c.activation_se.as_ref().map(|v| v[k][p])),
                    ]);
                }
            }
        }
        out.push(t);
    }

    let mut t = Table::new("joint_trajectories.csv", &["condition", "joint", "phase_pct", "mean", "se"]);
    for c in &report.kinematics.conditions {
        for (j, joint) in report.joints.iter().enumerate() {
            let ell = c.mean[j].len();
            for p in 0..ell {
                t.push(vec![
                    c.condition.to_string(),
                    joint.clone(),
                    phase_pct(p, ell),
                    num(c.mean[j][p]),
                    opt(c.se.as_ref().map(|v| v[j][p])),
                ]);
            }
        }
    }
    out.push(t);
    out
}

/// Writes one CSV per figure family plus a manifest of content hashes.
pub fn emit_plot_series(report: &StudyReport, dir: &Path) -> Result<PlotManifest> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = Vec::new();
    for t in tables(report) {
        let bytes = t.render()?;
        let path = dir.join(t.name);
        fs::write(&path, &bytes).map_err(|e| Error::io(&path, e))?;
        files.push(ManifestEntry { file: t.name.to_string(), rows: t.rows.len(), sha256: hex::encode(Sha256::digest(&bytes)) });
    }
    let manifest = PlotManifest { files };
    let path = dir.join(MANIFEST_FILE);
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}
