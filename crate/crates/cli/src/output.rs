//! Output files: header-embedded configs, atomic writes, and summary
//! statistics recomputed from the per-run rows they summarise.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

use crate::config::ExperimentConfig;

/// One row of the results table shared by every mode.
#[derive(Clone, Debug)]
pub struct ResultRow {
    pub material: String,
    pub task: String,
    pub grid_side: usize,
    pub temperature_k: f64,
    pub thickness_nm: f64,
    pub run: usize,
    pub val_nmse: f64,
    pub test_nmse: f64,
    pub kr: f64,
    pub mc: f64,
}

pub const RESULTS_HEADER: &str =
    "material,task,grid_side,temperature_k,thickness_nm,run,val_nmse,test_nmse,kr,mc";

impl ResultRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.material,
            self.task,
            self.grid_side,
            self.temperature_k,
            self.thickness_nm,
            self.run,
            self.val_nmse,
            self.test_nmse,
            self.kr,
            self.mc
        )
    }
}

/// Write a file atomically: temp file in the same directory, then rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

/// Standard header: embedded resolved config plus the seed fan-out, so any
/// output file is enough to reproduce the run.
pub fn file_header(cfg: &ExperimentConfig, run_seeds: &[u64]) -> String {
    let seeds: Vec<String> = run_seeds.iter().map(u64::to_string).collect();
    format!(
        "# config: {}\n# seeds: master={} runs=[{}]\n",
        cfg.to_json_line(),
        cfg.seed,
        seeds.join(",")
    )
}

pub fn write_results(
    dir: &Path,
    cfg: &ExperimentConfig,
    run_seeds: &[u64],
    rows: &[ResultRow],
) -> Result<PathBuf> {
    let mut body = file_header(cfg, run_seeds);
    body.push_str(RESULTS_HEADER);
    body.push('\n');
    for row in rows {
        body.push_str(&row.to_csv());
        body.push('\n');
    }
    let path = dir.join("results.csv");
    write_atomic(&path, &body)?;
    Ok(path)
}

/// Parse the data rows of a results CSV back out (skipping `#` comments
/// and the column header).
pub fn parse_results(path: &Path) -> Result<Vec<ResultRow>> {
    let text = fs::read_to_string(path)?;
    let mut rows = Vec::new();
    for line in text.lines() {
        if line.starts_with('#') || line.starts_with("material,") || line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        anyhow::ensure!(f.len() == 10, "bad results row: {line}");
        rows.push(ResultRow {
            material: f[0].to_string(),
            task: f[1].to_string(),
            grid_side: f[2].parse()?,
            temperature_k: f[3].parse()?,
            thickness_nm: f[4].parse()?,
            run: f[5].parse()?,
            val_nmse: f[6].parse()?,
            test_nmse: f[7].parse()?,
            kr: f[8].parse()?,
            mc: f[9].parse()?,
        });
    }
    Ok(rows)
}

/// Median and quartiles by linear interpolation.
pub fn quartiles(values: &[f64]) -> (f64, f64, f64) {
    assert!(!values.is_empty());
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite stats"));
    let q = |p: f64| -> f64 {
        let idx = p * (sorted.len() - 1) as f64;
        let lo = idx.floor() as usize;
        let hi = idx.ceil() as usize;
        if lo == hi {
            sorted[lo]
        } else {
            sorted[lo] + (idx - lo as f64) * (sorted[hi] - sorted[lo])
        }
    };
    (q(0.25), q(0.5), q(0.75))
}

/// Summary statistics across runs, recomputed from the results file
/// itself so the two can never drift apart.
pub fn write_summary(dir: &Path, cfg: &ExperimentConfig, run_seeds: &[u64]) -> Result<PathBuf> {
    let rows = parse_results(&dir.join("results.csv"))?;
    let mut body = file_header(cfg, run_seeds);
    body.push_str("stat,q1,median,q3\n");
    for (name, pick) in [
        (
            "val_nmse",
            &(|r: &ResultRow| r.val_nmse) as &dyn Fn(&ResultRow) -> f64,
        ),
        ("test_nmse", &|r: &ResultRow| r.test_nmse),
    ] {
        let values: Vec<f64> = rows.iter().map(pick).filter(|v| v.is_finite()).collect();
        if values.is_empty() {
            continue;
        }
        let (q1, median, q3) = quartiles(&values);
        body.push_str(&format!("{name},{q1},{median},{q3}\n"));
    }
    let path = dir.join("summary.csv");
    write_atomic(&path, &body)?;
    Ok(path)
}
