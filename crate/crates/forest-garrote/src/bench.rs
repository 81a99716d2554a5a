//! Desk-scale benchmark harness: unexplained variance, selected-variable
//! counts and relative solver timing across public regression datasets and
//! the Friedman #1 generator.
//!
//! Datasets are resolved from a cache directory (`FOREST_GARROTE_DATA` or
//! `./data`); `fetch` downloads and normalizes the public roster into that
//! cache. No dataset ships with the crate except the diabetes fixture.
//! Timings are wall-clock around the selection solves only - forest fitting
//! is shared by all methods and excluded, and only time ratios are
//! meaningful.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::data::{self, Dataset, SplitSpec};
use crate::error::{Error, Result};
use crate::forest::{self, ForestParams};
use crate::garrote;
use crate::numeric::compensated_sum;
use crate::ruleens;
use crate::ruleset;

/// One dataset x seed benchmark row.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchRow {
    pub dataset: String,
    pub seed: u64,
    pub n_train: usize,
    pub n_test: usize,
    /// Original (pre-dummy-expansion) predictor count.
    pub p: usize,
    pub mtry: usize,
    /// Test SSE / test variance of y, per method.
    pub rf_unexplained: f64,
    pub fg_unexplained: f64,
    pub fgcv_unexplained: f64,
    pub re_unexplained: f64,
    /// Selected original-variable counts.
    pub rf_vars: usize,
    pub fg_vars: usize,
    pub fgcv_vars: usize,
    pub re_vars: usize,
    /// Number of active non-intercept patterns (garrote design columns).
    pub group_count: usize,
    /// Number of canonical rules (rule-lasso dictionary size).
    pub rule_count: usize,
    pub fg_train_sse: f64,
    pub rf_train_sse: f64,
    pub fg_budget_used: f64,
    /// Smallest retained multiplier (infinity when the model is empty).
    pub fg_min_gamma: f64,
    pub fgcv_lambda: f64,
    /// Wall-clock seconds around the selection solves only.
    pub fg_solve_secs: f64,
    pub fgcv_solve_secs: f64,
    pub re_solve_secs: f64,
    pub dropped_empty_nodes: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchParams {
    pub trees: usize,
    pub min_node_size: usize,
    /// When set, min node size becomes `max(min_node_size, fraction * n_train)`.
    /// Keeping the active-pattern count below n_train keeps the lambda=1
    /// budget meaningful; around 1/8 works well at desk scale.
    #[serde(default)]
    pub min_node_fraction: Option<f64>,
    pub folds: usize,
    pub tune_mtry: bool,
}

impl Default for BenchParams {
    fn default() -> Self {
        BenchParams {
            trees: 100,
            min_node_size: 5,
            min_node_fraction: None,
            folds: 10,
            tune_mtry: true,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchReport {
    pub params: BenchParams,
    pub seeds: Vec<u64>,
    pub rows: Vec<BenchRow>,
    /// (dataset, message) for rows that could not run; the run continues.
    pub failures: Vec<(String, String)>,
}

/// A roster entry: where the raw data lives and how to turn it into the
/// canonical CSV the loader expects.
pub struct DatasetSpec {
    pub name: &'static str,
    pub url: Option<&'static str>,
    pub target: &'static str,
    /// SHA-256 of the canonical CSV, where it could be pinned.
    pub sha256: Option<&'static str>,
    pub normalize: fn(&str) -> Result<String>,
}

fn passthrough(raw: &str) -> Result<String> {
    Ok(raw.to_string())
}

fn normalize_abalone(raw: &str) -> Result<String> {
    let mut out = String::from("sex,length,diameter,height,whole_weight,shucked_weight,viscera_weight,shell_weight,rings\n");
    for line in raw.lines().filter(|l| !l.trim().is_empty()) {
        out.push_str(line.trim());
        out.push('\n');
    }
    Ok(out)
}

fn normalize_whitespace_table(raw: &str, header: &str, drop_marker: Option<&str>) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for line in raw.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(marker) = drop_marker {
            if line.split_whitespace().any(|f| f == marker) {
                continue;
            }
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

fn normalize_housing(raw: &str) -> Result<String> {
    Ok(normalize_whitespace_table(
        raw,
        "crim,zn,indus,chas,nox,rm,age,dis,rad,tax,ptratio,b,lstat,medv",
        None,
    ))
}

fn normalize_auto_mpg(raw: &str) -> Result<String> {
    // whitespace table with a quoted car-name tail and '?' horsepower rows
    let mut out = String::from(
        "mpg,cylinders,displacement,horsepower,weight,acceleration,model_year,origin\n",
    );
    for line in raw.lines() {
        let line = line.split('"').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() < 8 || fields.contains(&"?") {
            continue;
        }
        out.push_str(&fields[..8].join(","));
        out.push('\n');
    }
    Ok(out)
}

fn normalize_auto(raw: &str) -> Result<String> {
    // imports-85: price regression; rows with any missing field are dropped
    // and the symboling/normalized-losses insurance columns are skipped
    let header = [
        "symboling",
        "normalized_losses",
        "make",
        "fuel_type",
        "aspiration",
        "num_doors",
        "body_style",
        "drive_wheels",
        "engine_location",
        "wheel_base",
        "length",
        "width",
        "height",
        "curb_weight",
        "engine_type",
        "num_cylinders",
        "engine_size",
        "fuel_system",
        "bore",
        "stroke",
        "compression_ratio",
        "horsepower",
        "peak_rpm",
        "city_mpg",
        "highway_mpg",
        "price",
    ];
    let keep: Vec<usize> = (2..26).collect();
    let mut out = keep
        .iter()
        .map(|&i| header[i])
        .collect::<Vec<_>>()
        .join(",");
    out.push('\n');
    for line in raw.lines().filter(|l| !l.trim().is_empty()) {
        let fields: Vec<&str> = line.trim().split(',').collect();
        if fields.len() != header.len() || fields.contains(&"?") {
            continue;
        }
        out.push_str(
            &keep
                .iter()
                .map(|&i| fields[i])
                .collect::<Vec<_>>()
                .join(","),
        );
        out.push('\n');
    }
    Ok(out)
}

fn normalize_machine(raw: &str) -> Result<String> {
    // vendor and model are identifiers; ERP is the published linear fit
    let mut out = String::from("myct,mmin,mmax,cach,chmin,chmax,prp\n");
    for line in raw.lines().filter(|l| !l.trim().is_empty()) {
        let fields: Vec<&str> = line.trim().split(',').collect();
        if fields.len() != 10 {
            return Err(Error::InvalidData(format!(
                "machine row with {} fields",
                fields.len()
            )));
        }
        out.push_str(&fields[2..9].join(","));
        out.push('\n');
    }
    Ok(out)
}

fn normalize_tab_with_header(raw: &str) -> Result<String> {
    let mut lines = raw.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::InvalidData("empty file".into()))?;
    let mut out = header
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(",")
        .to_lowercase();
    out.push('\n');
    for line in lines {
        out.push_str(&line.split_whitespace().collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    Ok(out)
}

fn normalize_prostate(raw: &str) -> Result<String> {
    // leading row index and trailing train/test indicator are dropped
    let mut lines = raw.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| Error::InvalidData("empty file".into()))?
        .split_whitespace()
        .map(|s| s.to_lowercase())
        .collect();
    let keep: Vec<usize> = header
        .iter()
        .enumerate()
        .filter(|(_, h)| h.as_str() != "train")
        .map(|(i, _)| i)
        .collect();
    let mut out = keep
        .iter()
        .map(|&i| header[i].clone())
        .collect::<Vec<_>>()
        .join(",");
    out.push('\n');
    for line in lines {
        let fields: Vec<&str> = line.split_whitespace().collect();
        // data rows carry a leading row number not present in the header
        let offset = fields.len() - header.len();
        let row: Vec<&str> = keep.iter().map(|&i| fields[i + offset]).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    Ok(out)
}

fn normalize_bone(raw: &str) -> Result<String> {
    let csv = normalize_tab_with_header(raw)?;
    // drop the idnum column
    let mut out = String::new();
    for (i, line) in csv.lines().enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        let keep: Vec<&str> = fields
            .iter()
            .enumerate()
            .filter(|(j, _)| i != 0 || fields[*j] != "idnum")
            .filter(|(j, _)| *j != 0)
            .map(|(_, f)| *f)
            .collect();
        out.push_str(&keep.join(","));
        out.push('\n');
    }
    Ok(out)
}

fn normalize_marketing(raw: &str) -> Result<String> {
    // comma table with NA entries; rows with missing values are dropped
    let mut lines = raw.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::InvalidData("empty file".into()))?;
    let mut out = header.trim().to_lowercase();
    out.push('\n');
    for line in lines {
        if line
            .split(',')
            .any(|f| f.trim() == "NA" || f.trim().is_empty())
        {
            continue;
        }
        out.push_str(line.trim());
        out.push('\n');
    }
    Ok(out)
}

/// The public dataset roster covered by fetch.
/// `friedman` is generated, not fetched. `concrete` is published as an Excel
/// sheet; convert it to CSV by hand and place it in the cache as
/// `concrete.csv` with target column `strength`.
pub fn roster() -> Vec<DatasetSpec> {
    vec![
        DatasetSpec {
            name: "abalone",
            url: Some("https://archive.ics.uci.edu/ml/machine-learning-databases/abalone/abalone.data"),
            target: "rings",
            sha256: None,
            normalize: normalize_abalone,
        },
        DatasetSpec {
            name: "auto-mpg",
            url: Some("https://archive.ics.uci.edu/ml/machine-learning-databases/auto-mpg/auto-mpg.data"),
            target: "mpg",
            sha256: None,
            normalize: normalize_auto_mpg,
        },
        DatasetSpec {
            name: "auto",
            url: Some("https://archive.ics.uci.edu/ml/machine-learning-databases/autos/imports-85.data"),
            target: "price",
            sha256: None,
            normalize: normalize_auto,
        },
        DatasetSpec {
            name: "housing",
            url: Some("https://archive.ics.uci.edu/ml/machine-learning-databases/housing/housing.data"),
            target: "medv",
            sha256: None,
            normalize: normalize_housing,
        },
        DatasetSpec {
            name: "machine",
            url: Some("https://archive.ics.uci.edu/ml/machine-learning-databases/cpu-performance/machine.data"),
            target: "prp",
            sha256: None,
            normalize: normalize_machine,
        },
        DatasetSpec {
            name: "concrete",
            url: None,
            target: "strength",
            sha256: None,
            normalize: passthrough,
        },
        DatasetSpec {
            name: "diabetes",
            url: Some("https://web.stanford.edu/~hastie/Papers/LARS/diabetes.data"),
            target: "y",
            sha256: None,
            normalize: normalize_tab_with_header,
        },
        DatasetSpec {
            name: "prostate",
            url: Some("https://hastie.su.domains/ElemStatLearn/datasets/prostate.data"),
            target: "lpsa",
            sha256: None,
            normalize: normalize_prostate,
        },
        DatasetSpec {
            name: "ozone",
            url: Some("https://hastie.su.domains/ElemStatLearn/datasets/LAozone.data"),
            target: "ozone",
            sha256: None,
            normalize: passthrough,
        },
        DatasetSpec {
            name: "bone",
            url: Some("https://hastie.su.domains/ElemStatLearn/datasets/bone.data"),
            target: "spnbmd",
            sha256: None,
            normalize: normalize_bone,
        },
        DatasetSpec {
            name: "galaxy",
            url: Some("https://hastie.su.domains/ElemStatLearn/datasets/galaxy.data"),
            target: "velocity",
            sha256: None,
            normalize: normalize_marketing,
        },
        DatasetSpec {
            name: "marketing",
            url: Some("https://hastie.su.domains/ElemStatLearn/datasets/marketing.data"),
            target: "income",
            sha256: None,
            normalize: normalize_marketing,
        },
        DatasetSpec {
            name: "friedman",
            url: None,
            target: "y",
            sha256: None,
            normalize: passthrough,
        },
    ]
}

pub fn spec_for(name: &str) -> Option<DatasetSpec> {
    roster().into_iter().find(|s| s.name == name)
}

/// Cache directory: `FOREST_GARROTE_DATA` if set, else `./data`.
pub fn default_cache_dir() -> PathBuf {
    std::env::var_os("FOREST_GARROTE_DATA")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("data"))
}

fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let out = hasher.finalize();
    out.iter().map(|b| format!("{b:02x}")).collect()
}

/// Download and normalize one roster dataset into the cache. Checksums are
/// verified against the pinned value when one exists, otherwise the observed
/// checksum is recorded in `checksums.json` and verified on later fetches.
pub fn fetch(name: &str, cache_dir: &Path) -> Result<PathBuf> {
    let spec = spec_for(name).ok_or_else(|| Error::DatasetUnavailable(name.to_string()))?;
    let dest = cache_dir.join(format!("{name}.csv"));
    if dest.exists() {
        return Ok(dest);
    }
    let Some(url) = spec.url else {
        return Err(Error::DatasetUnavailable(format!(
            "{name} has no download URL (see the roster notes)"
        )));
    };
    std::fs::create_dir_all(cache_dir).map_err(|e| Error::io(cache_dir, e))?;
    let raw = ureq::get(url)
        .call()
        .map_err(|e| Error::Other(format!("download of {url} failed: {e}")))?
        .body_mut()
        .read_to_string()
        .map_err(|e| Error::Other(format!("reading {url} failed: {e}")))?;
    let canonical = (spec.normalize)(&raw)?;
    let digest = sha256_hex(canonical.as_bytes());
    verify_or_record_checksum(name, &digest, spec.sha256, cache_dir)?;
    std::fs::write(&dest, canonical).map_err(|e| Error::io(&dest, e))?;
    Ok(dest)
}

fn verify_or_record_checksum(
    name: &str,
    digest: &str,
    pinned: Option<&str>,
    cache_dir: &Path,
) -> Result<()> {
    if let Some(pin) = pinned {
        if digest != pin {
            return Err(Error::Other(format!(
                "checksum mismatch for {name}: expected {pin}, got {digest}"
            )));
        }
        return Ok(());
    }
    let manifest = cache_dir.join("checksums.json");
    let mut map: std::collections::BTreeMap<String, String> = if manifest.exists() {
        serde_json::from_slice(&std::fs::read(&manifest).map_err(|e| Error::io(&manifest, e))?)?
    } else {
        Default::default()
    };
    match map.get(name) {
        Some(prev) if prev != digest => Err(Error::Other(format!(
            "checksum changed for {name}: recorded {prev}, got {digest}"
        ))),
        Some(_) => Ok(()),
        None => {
            eprintln!("note: no pinned checksum for {name}; recording {digest}");
            map.insert(name.to_string(), digest.to_string());
            std::fs::write(&manifest, serde_json::to_vec_pretty(&map)?)
                .map_err(|e| Error::io(&manifest, e))?;
            Ok(())
        }
    }
}

/// Load a roster dataset from the cache, fetching it if absent (friedman is
/// generated: n=300, noise sd 1, canonical 10 predictors).
pub fn resolve(name: &str, cache_dir: &Path, seed: u64) -> Result<Dataset> {
    if name == "friedman" {
        return data::friedman1(300, 1.0, 5, seed ^ 0xF1ED);
    }
    let spec = spec_for(name).ok_or_else(|| Error::DatasetUnavailable(name.to_string()))?;
    let cached = cache_dir.join(format!("{name}.csv"));
    let path = if cached.exists() {
        cached
    } else {
        fetch(name, cache_dir)?
    };
    data::load_csv(path, spec.target)
}

/// Is the dataset runnable right now without network access?
pub fn available(name: &str, cache_dir: &Path) -> bool {
    name == "friedman" || cache_dir.join(format!("{name}.csv")).exists()
}

fn unexplained_variance(test_y: &[f64], preds: &[f64]) -> f64 {
    let n = test_y.len() as f64;
    let mean = compensated_sum(test_y.iter().copied()) / n;
    let tss = compensated_sum(test_y.iter().map(|y| (y - mean) * (y - mean)));
    let sse = compensated_sum(test_y.iter().zip(preds).map(|(y, p)| (y - p) * (y - p)));
    if tss == 0.0 {
        f64::NAN // constant test target; reported as-is with a diagnostic
    } else {
        sse / tss
    }
}

/// Run the full pipeline on one dataset and seed.
pub fn run_cell(name: &str, d: &Dataset, seed: u64, params: &BenchParams) -> Result<BenchRow> {
    let (train, test) = data::split(
        d,
        &SplitSpec {
            seed,
            train_fraction: 0.5,
        },
    )?;
    let mut min_node = params.min_node_size;
    if let Some(fraction) = params.min_node_fraction {
        min_node = min_node.max((fraction * train.n() as f64).round() as usize);
    }
    let mut fp = ForestParams {
        num_trees: params.trees,
        mtry: train.p().div_ceil(3).max(1),
        min_node_size: min_node.min(train.n() / 4).max(1),
        seed,
        bootstrap: true,
    };
    if params.tune_mtry {
        fp.mtry = forest::tune_mtry(&train, &forest::default_mtry_candidates(train.p()), &fp)?;
    }
    let f = forest::fit_forest(&train, &fp)?;
    let rf_train_preds = f.predict_rows(train.x.view())?;
    let rf_train_sse = compensated_sum(
        train
            .y
            .iter()
            .zip(rf_train_preds.iter())
            .map(|(y, p)| (y - p) * (y - p)),
    );

    let (groups, stats) = ruleset::build_groups(&f)?;
    let rules: Vec<_> = groups
        .iter()
        .flat_map(|g| g.rules.iter().cloned())
        .collect();
    let design = garrote::build_design(&groups, &train.x)?;

    let t0 = Instant::now();
    let (fg, _path) = garrote::solve_garrote(&design, train.y.view(), 1.0)?;
    let fg_solve_secs = t0.elapsed().as_secs_f64();

    let t1 = Instant::now();
    let fgcv = garrote::solve_garrote_cv(
        &design,
        train.y.view(),
        params.folds.min(train.n()),
        &garrote::default_lambda_grid(),
        seed,
    )?;
    let fgcv_solve_secs = t1.elapsed().as_secs_f64();

    let t2 = Instant::now();
    let re = ruleens::solve_rule_lasso(
        &rules,
        &train.x,
        train.y.view(),
        None,
        params.folds.min(train.n()),
        seed,
    )?;
    let re_solve_secs = t2.elapsed().as_secs_f64();

    let mut rf_preds = Vec::with_capacity(test.n());
    let mut fg_preds = Vec::with_capacity(test.n());
    let mut fgcv_preds = Vec::with_capacity(test.n());
    let mut re_preds = Vec::with_capacity(test.n());
    for i in 0..test.n() {
        let x = test.x.row(i);
        rf_preds.push(f.predict(x)?);
        fg_preds.push(garrote::predict_garrote(&fg, &groups, x)?);
        fgcv_preds.push(garrote::predict_garrote(&fgcv, &groups, x)?);
        re_preds.push(ruleens::predict_rule_lasso(&re, &rules, x)?);
    }
    let test_y: Vec<f64> = test.y.to_vec();

    let re_vars: BTreeSet<usize> = re
        .selected_rules()
        .iter()
        .flat_map(|&j| rules[j].region.constrained_vars())
        .map(|c| d.columns[c].original_index)
        .collect();

    Ok(BenchRow {
        dataset: name.to_string(),
        seed,
        n_train: train.n(),
        n_test: test.n(),
        p: d.original_count(),
        mtry: fp.mtry,
        rf_unexplained: unexplained_variance(&test_y, &rf_preds),
        fg_unexplained: unexplained_variance(&test_y, &fg_preds),
        fgcv_unexplained: unexplained_variance(&test_y, &fgcv_preds),
        re_unexplained: unexplained_variance(&test_y, &re_preds),
        rf_vars: f.used_original_variables().len(),
        fg_vars: fg.selected_variables(&d.columns).len(),
        fgcv_vars: fgcv.selected_variables(&d.columns).len(),
        re_vars: re_vars.len(),
        group_count: design.group_count(),
        rule_count: rules.len(),
        fg_train_sse: fg.training_sse,
        rf_train_sse,
        fg_budget_used: fg.budget_used,
        fg_min_gamma: fg.gamma.values().copied().fold(f64::INFINITY, f64::min),
        fgcv_lambda: fgcv.lambda,
        fg_solve_secs,
        fgcv_solve_secs,
        re_solve_secs,
        dropped_empty_nodes: stats.dropped_empty,
    })
}

/// Run dataset x seed cells; cells are independent and run concurrently,
/// load failures are reported per row and the run continues. The report
/// assembly is an ordered merge, so rows come out in (dataset, seed) order.
pub fn run_bench(
    datasets: &[String],
    seeds: &[u64],
    params: &BenchParams,
    cache_dir: &Path,
) -> Result<BenchReport> {
    if seeds.is_empty() {
        return Err(Error::InvalidParameter("need at least one seed".into()));
    }
    use rayon::prelude::*;
    let cells: Vec<(String, u64)> = datasets
        .iter()
        .flat_map(|name| seeds.iter().map(move |&s| (name.clone(), s)))
        .collect();
    let outcomes: Vec<std::result::Result<BenchRow, (String, String)>> = cells
        .par_iter()
        .map(|(name, seed)| {
            resolve(name, cache_dir, *seed)
                .and_then(|d| run_cell(name, &d, *seed, params))
                .map_err(|e| (name.clone(), e.to_string()))
        })
        .collect();
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for outcome in outcomes {
        match outcome {
            Ok(row) => rows.push(row),
            Err(f) => failures.push(f),
        }
    }
    Ok(BenchReport {
        params: params.clone(),
        seeds: seeds.to_vec(),
        rows,
        failures,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
    Markdown,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            other => Err(Error::InvalidParameter(format!(
                "unknown report format `{other}`"
            ))),
        }
    }
}

const REPORT_COLUMNS: &[&str] = &[
    "dataset",
    "seed",
    "n_train",
    "n_test",
    "p",
    "mtry",
    "rf_unexplained",
    "fg_unexplained",
    "fgcv_unexplained",
    "re_unexplained",
    "rf_vars",
    "fg_vars",
    "fgcv_vars",
    "re_vars",
    "group_count",
    "rule_count",
    "fg_train_sse",
    "rf_train_sse",
    "fg_budget_used",
    "fgcv_lambda",
    "fg_solve_secs",
    "fgcv_solve_rel",
    "re_solve_rel",
];

fn row_fields(r: &BenchRow) -> Vec<String> {
    let rel = |t: f64| {
        if r.fg_solve_secs > 0.0 {
            t / r.fg_solve_secs
        } else {
            f64::NAN
        }
    };
    vec![
        r.dataset.clone(),
        r.seed.to_string(),
        r.n_train.to_string(),
        r.n_test.to_string(),
        r.p.to_string(),
        r.mtry.to_string(),
        format!("{:.4}", r.rf_unexplained),
        format!("{:.4}", r.fg_unexplained),
        format!("{:.4}", r.fgcv_unexplained),
        format!("{:.4}", r.re_unexplained),
        r.rf_vars.to_string(),
        r.fg_vars.to_string(),
        r.fgcv_vars.to_string(),
        r.re_vars.to_string(),
        r.group_count.to_string(),
        r.rule_count.to_string(),
        format!("{:.4}", r.fg_train_sse),
        format!("{:.4}", r.rf_train_sse),
        format!("{:.6}", r.fg_budget_used),
        format!("{}", r.fgcv_lambda),
        format!("{:.4}", r.fg_solve_secs),
        format!("{:.2}", rel(r.fgcv_solve_secs)),
        format!("{:.2}", rel(r.re_solve_secs)),
    ]
}

/// Serialize the report in a stable column order.
pub fn emit_report(report: &BenchReport, format: ReportFormat, out: &mut dyn Write) -> Result<()> {
    if report.rows.is_empty() {
        return Err(Error::InvalidData(
            "empty report: no benchmark rows ran".into(),
        ));
    }
    let io_err = |e: std::io::Error| Error::io("<report>", e);
    match format {
        ReportFormat::Json => {
            serde_json::to_writer_pretty(&mut *out, report)?;
            out.write_all(b"\n").map_err(io_err)?;
        }
        ReportFormat::Csv => {
            writeln!(out, "{}", REPORT_COLUMNS.join(",")).map_err(io_err)?;
            for row in &report.rows {
                writeln!(out, "{}", row_fields(row).join(",")).map_err(io_err)?;
            }
        }
        ReportFormat::Markdown => {
            writeln!(out, "| {} |", REPORT_COLUMNS.join(" | ")).map_err(io_err)?;
            writeln!(out, "|{}|", vec!["---"; REPORT_COLUMNS.len()].join("|")).map_err(io_err)?;
            for row in &report.rows {
                writeln!(out, "| {} |", row_fields(row).join(" | ")).map_err(io_err)?;
            }
            for (name, msg) in &report.failures {
                writeln!(out, "\n- `{name}` failed: {msg}").map_err(io_err)?;
            }
        }
    }
    Ok(())
}
