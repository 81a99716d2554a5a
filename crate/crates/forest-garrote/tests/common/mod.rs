//! Shared helpers for the integration suites: independent oracles (projected
//! gradient for the garrote objective, probe-grid sup/inf for interaction
//! patterns) and the lazily computed benchmark fixture the acceptance
//! criteria share.

#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::OnceLock;

use ndarray::{Array1, Array2};

use forest_garrote::bench::{self, BenchParams, BenchRow};
use forest_garrote::data::{ColumnInfo, ColumnKind, Dataset};
use forest_garrote::ruleset::WeightedRule;

/// Euclidean projection onto `{x >= 0, sum(x) <= budget}`: clip, and if the
/// budget is still violated project onto the simplex face `sum(x) = budget`
/// by the sorted-threshold rule.
pub fn project_nonneg_l1(v: &[f64], budget: f64) -> Vec<f64> {
    let clipped: Vec<f64> = v.iter().map(|&x| x.max(0.0)).collect();
    if clipped.iter().sum::<f64>() <= budget {
        return clipped;
    }
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cumsum = 0.0;
    let mut tau = 0.0;
    for (k, &u) in sorted.iter().enumerate() {
        cumsum += u;
        let t = (cumsum - budget) / (k + 1) as f64;
        if u > t {
            tau = t;
        }
    }
    v.iter().map(|&x| (x - tau).max(0.0)).collect()
}

/// Projected-gradient oracle for
/// `min ||r - Z g||^2 s.t. g >= 0, sum(g) <= budget`,
/// capped at `max_iters` iterations with step halving on any objective
/// increase. Deliberately independent of the homotopy solver.
pub fn pgd_oracle(
    z: &Array2<f64>,
    r: &Array1<f64>,
    budget: f64,
    max_iters: usize,
) -> (Vec<f64>, f64) {
    let n = z.nrows();
    let g = z.ncols();
    let frob_sq: f64 = z.iter().map(|v| v * v).sum();
    let mut step = 1.0 / (2.0 * frob_sq.max(1e-12));
    let mut gamma = vec![0.0f64; g];

    let objective = |gamma: &[f64]| -> f64 {
        let mut sse = 0.0;
        for i in 0..n {
            let fit: f64 = (0..g).map(|j| gamma[j] * z[[i, j]]).sum();
            let e = r[i] - fit;
            sse += e * e;
        }
        sse
    };

    let mut obj = objective(&gamma);
    let mut stall = 0usize;
    for _ in 0..max_iters {
        // gradient of ||r - Z gamma||^2
        let mut resid = vec![0.0f64; n];
        for i in 0..n {
            let fit: f64 = (0..g).map(|j| gamma[j] * z[[i, j]]).sum();
            resid[i] = r[i] - fit;
        }
        let grad: Vec<f64> = (0..g)
            .map(|j| -2.0 * (0..n).map(|i| z[[i, j]] * resid[i]).sum::<f64>())
            .collect();
        let stepped: Vec<f64> = gamma.iter().zip(&grad).map(|(x, d)| x - step * d).collect();
        let cand = project_nonneg_l1(&stepped, budget);
        let cand_obj = objective(&cand);
        if cand_obj > obj {
            step *= 0.5;
            continue;
        }
        let change = gamma
            .iter()
            .zip(&cand)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        gamma = cand;
        obj = cand_obj;
        if change < 1e-15 * (1.0 + gamma.iter().fold(0.0f64, |m, &v| m.max(v))) {
            stall += 1;
            if stall > 32 {
                break;
            }
        } else {
            stall = 0;
        }
    }
    (gamma, obj)
}

fn probe_contains(rule: &WeightedRule, x: &[f64]) -> bool {
    rule.region.lower().iter().all(|(&k, &v)| x[k] >= v)
        && rule.region.upper().iter().all(|(&k, &v)| x[k] < v)
}

/// Brute-force interaction pattern by searching sup/inf of
/// `beta * (R(x) - R(x'))` over a finite probe grid, with x and x' differing
/// only in the probed coordinate.
pub fn pattern_by_probe(rule: &WeightedRule, p: usize) -> Vec<i8> {
    let grids: Vec<Vec<f64>> = (0..p)
        .map(|k| {
            let mut vals = Vec::new();
            for (&var, &t) in rule.region.lower().iter().chain(rule.region.upper().iter()) {
                if var == k {
                    let eps = 1e-6 * (1.0 + t.abs());
                    vals.extend_from_slice(&[t - eps, t, t + eps, t - 1.0, t + 1.0]);
                }
            }
            if vals.is_empty() {
                vals.push(0.0);
            }
            vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
            vals.dedup();
            vals
        })
        .collect();

    let mut signs = vec![0i8; p];
    for k in 0..p {
        // iterate the cartesian product of the other coordinates' grids
        let others: Vec<usize> = (0..p).filter(|&j| j != k).collect();
        let mut counters = vec![0usize; others.len()];
        let mut sup = f64::NEG_INFINITY;
        let mut inf = f64::INFINITY;
        loop {
            let mut base = vec![0.0; p];
            for (slot, &j) in others.iter().enumerate() {
                base[j] = grids[j][counters[slot]];
            }
            for (ai, &a) in grids[k].iter().enumerate() {
                for &b in &grids[k][..ai] {
                    // a > b by construction
                    let mut hi = base.clone();
                    hi[k] = a;
                    let mut lo = base.clone();
                    lo[k] = b;
                    let d = rule.beta
                        * ((probe_contains(rule, &hi) as i8 - probe_contains(rule, &lo) as i8)
                            as f64);
                    sup = sup.max(d);
                    inf = inf.min(d);
                }
            }
            // advance the odometer
            let mut slot = 0;
            loop {
                if slot == others.len() {
                    break;
                }
                counters[slot] += 1;
                if counters[slot] < grids[others[slot]].len() {
                    break;
                }
                counters[slot] = 0;
                slot += 1;
            }
            if slot == others.len() {
                break;
            }
        }
        signs[k] = if sup > 0.0 {
            1
        } else if inf < 0.0 {
            -1
        } else {
            0
        };
    }
    signs
}

pub fn repo_data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

/// A synthetic dataset with a 3-level factor (already one-hot) and three
/// numeric predictors, so the pipeline exercises dummy-encoded columns.
pub fn factor_dataset(n: usize, seed: u64) -> Dataset {
    use rand::RngExt;
    let mut rng = forest_garrote::rng::stream(seed, "factor-data", 0);
    let mut columns = Vec::new();
    for level in ["a", "b", "c"] {
        columns.push(ColumnInfo {
            name: format!("grade={level}"),
            kind: ColumnKind::Dummy {
                factor: "grade".into(),
                level: level.to_string(),
            },
            original_index: 0,
        });
    }
    for j in 0..3 {
        columns.push(ColumnInfo {
            name: format!("v{j}"),
            kind: ColumnKind::Numeric,
            original_index: 1 + j,
        });
    }
    let mut x = Array2::zeros((n, 6));
    let mut y = Array1::zeros(n);
    for i in 0..n {
        let level = rng.random_range(0..3usize);
        x[[i, level]] = 1.0;
        for j in 3..6 {
            x[[i, j]] = rng.random::<f64>();
        }
        let level_effect = [0.0, 1.5, -2.0][level];
        y[i] = level_effect
            + 3.0 * x[[i, 3]]
            + x[[i, 4]] * x[[i, 5]]
            + 0.3 * forest_garrote::rng::standard_normal(&mut rng);
    }
    Dataset::from_parts(columns, x, y).unwrap()
}

pub struct Fixture {
    /// Per dataset name: the 5-seed benchmark rows (only datasets that were
    /// resolvable offline appear).
    pub rows: Vec<BenchRow>,
    /// Friedman #1 rows over 10 seeds.
    pub friedman_rows: Vec<BenchRow>,
    /// Roster names that could not be resolved in this environment.
    pub missing: Vec<String>,
}

impl Fixture {
    pub fn rows_for(&self, dataset: &str) -> Vec<&BenchRow> {
        let source: &[BenchRow] = if dataset == "friedman" {
            &self.friedman_rows
        } else {
            &self.rows
        };
        source.iter().filter(|r| r.dataset == dataset).collect()
    }

    pub fn all_rows(&self) -> impl Iterator<Item = &BenchRow> {
        self.rows.iter().chain(self.friedman_rows.iter())
    }
}

pub const FIXTURE_SEEDS: [u64; 5] = [1, 2, 3, 4, 5];
pub const FRIEDMAN_SEEDS: [u64; 10] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10];

/// Datasets the named acceptance criteria reference, deduplicated.
const NAMED_DATASETS: [&str; 7] = [
    "abalone", "diabetes", "housing", "auto", "concrete", "auto-mpg", "machine",
];

static FIXTURE: OnceLock<Fixture> = OnceLock::new();

/// Benchmark runs shared by the acceptance criteria: every obtainable named
/// dataset over 5 seeds plus Friedman #1 over 10 seeds.
pub fn fixture() -> &'static Fixture {
    FIXTURE.get_or_init(|| {
        let cache = repo_data_dir();
        // min_node scaled to n/8 keeps the active-pattern count below n, the
        // regime in which the parameter-free budget actually binds per group
        let params = BenchParams {
            trees: 150,
            min_node_size: 5,
            min_node_fraction: Some(0.125),
            folds: 10,
            tune_mtry: true,
        };
        let (present, missing): (Vec<String>, Vec<String>) = NAMED_DATASETS
            .iter()
            .map(|n| n.to_string())
            .partition(|n| bench::available(n, &cache));
        let report =
            bench::run_bench(&present, &FIXTURE_SEEDS, &params, &cache).expect("benchmark cells");
        assert!(
            report.failures.is_empty(),
            "fixture failures: {:?}",
            report.failures
        );
        let friedman =
            bench::run_bench(&["friedman".to_string()], &FRIEDMAN_SEEDS, &params, &cache)
                .expect("friedman cells");
        assert!(
            friedman.failures.is_empty(),
            "friedman failures: {:?}",
            friedman.failures
        );
        Fixture {
            rows: report.rows,
            friedman_rows: friedman.rows,
            missing,
        }
    })
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}
