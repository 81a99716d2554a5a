//! Rule Ensembles baseline: lasso over individual rule indicators, used for
//! the accuracy/sparsity/timing comparison against the grouped garrote.
//!
//! The design has one {0,1} column per canonical rule (coefficients are refit
//! from scratch, not seeded with the tree betas). Root rules are excluded
//! from the penalized design; the intercept is the centered mean. The l1
//! budget is chosen by cross-validation over a multiplicative grid.

use std::collections::{BTreeMap, BTreeSet};

use ndarray::{Array1, Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{compensated_sum, Cholesky, NeumaierSum};
use crate::rng;
use crate::ruleset::WeightedRule;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LassoModel {
    /// Nonzero refit coefficients keyed by rule index.
    pub coefficients: BTreeMap<usize, f64>,
    /// Centered mean of the training response.
    pub intercept: f64,
    /// The l1 budget the model was solved at.
    pub budget: f64,
    pub training_sse: f64,
    pub dropped_zero_columns: usize,
    pub dropped_duplicate_columns: usize,
}

impl LassoModel {
    pub fn l1_norm(&self) -> f64 {
        self.coefficients.values().map(|v| v.abs()).sum()
    }

    /// Rule indices with nonzero coefficients.
    pub fn selected_rules(&self) -> Vec<usize> {
        self.coefficients.keys().copied().collect()
    }
}

struct LassoDesign {
    z: Array2<f64>,
    /// design column -> index into the caller's rule slice
    rule_of_col: Vec<usize>,
    dropped_zero: usize,
    dropped_dup: usize,
}

fn build_lasso_design(rules: &[WeightedRule], x: &Array2<f64>) -> LassoDesign {
    let n = x.nrows();
    let mut cols: Vec<Vec<f64>> = Vec::new();
    let mut rule_of_col = Vec::new();
    let mut seen: BTreeSet<Vec<u64>> = BTreeSet::new();
    let mut dropped_zero = 0usize;
    let mut dropped_dup = 0usize;
    for (j, rule) in rules.iter().enumerate() {
        if rule.region.is_unconstrained() {
            continue; // root rules live in the intercept
        }
        let col: Vec<f64> = (0..n)
            .map(|i| {
                if rule.region.contains(x.row(i)) {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        if col.iter().all(|&v| v == 0.0) {
            dropped_zero += 1;
            continue;
        }
        let key: Vec<u64> = col.iter().map(|v| v.to_bits()).collect();
        if !seen.insert(key) {
            dropped_dup += 1;
            continue;
        }
        cols.push(col);
        rule_of_col.push(j);
    }
    let z = Array2::from_shape_fn((n, cols.len()), |(i, j)| cols[j][i]);
    LassoDesign {
        z,
        rule_of_col,
        dropped_zero,
        dropped_dup,
    }
}

struct LassoPathPoint {
    l1: f64,
    beta: Vec<f64>,
}

/// Signed LARS-lasso homotopy in budget form, run until the budget cap is hit
/// (exact interpolation at the boundary) or the path reaches its
/// least-squares end.
fn lasso_path(z: &Array2<f64>, r: &Array1<f64>, budget_cap: f64) -> Result<Vec<LassoPathPoint>> {
    let n = z.nrows();
    let m = z.ncols();

    let mut beta = vec![0.0f64; m];
    let mut resid = r.clone();
    let mut points = vec![LassoPathPoint {
        l1: 0.0,
        beta: beta.clone(),
    }];
    if m == 0 || budget_cap == 0.0 {
        return Ok(points);
    }

    let mut corr: Vec<f64> = (0..m).map(|j| z.column(j).dot(&resid)).collect();
    let scale = corr.iter().fold(0.0f64, |acc, c| acc.max(c.abs())).max(1.0);
    let stop_tol = 1e-10 * scale;

    let mut active: Vec<usize> = Vec::new();
    let mut sign: Vec<f64> = Vec::new();
    let mut in_active = vec![false; m];
    let mut blocked = vec![false; m];
    let mut chol = Cholesky::new();
    let mut just_dropped: Option<usize> = None;

    let (mut first, mut mu) = (0usize, 0.0f64);
    for (j, &c) in corr.iter().enumerate() {
        if c.abs() > mu {
            mu = c.abs();
            first = j;
        }
    }
    if mu <= stop_tol {
        return Ok(points);
    }
    if !chol.try_append(&[], z.column(first).dot(&z.column(first))) {
        return Err(Error::NonFinite("lasso design column with zero norm"));
    }
    active.push(first);
    sign.push(corr[first].signum());
    in_active[first] = true;

    let gram_col = |a: usize, b: usize| z.column(a).dot(&z.column(b));

    let max_iters = 60 * m.min(n) + 2000;
    let mut since_refresh = 0usize;
    for _ in 0..max_iters {
        let w = chol.solve(&sign);
        let dl1: f64 = sign.iter().zip(&w).map(|(a, b)| a * b).sum();
        debug_assert!(dl1 > 0.0);

        let mut u = Array1::<f64>::zeros(n);
        for (k, &j) in active.iter().enumerate() {
            u.scaled_add(w[k], &z.column(j));
        }
        let a: Vec<f64> = (0..m).map(|j| z.column(j).dot(&u)).collect();

        let mut delta = mu; // active correlations reach zero
        let mut hit_budget = false;
        let mut join: Option<usize> = None;
        let mut drop: Option<usize> = None;

        let l1_now: f64 = beta.iter().map(|v| v.abs()).sum();
        if budget_cap.is_finite() {
            let to_budget = (budget_cap - l1_now) / dl1;
            if to_budget < delta {
                delta = to_budget.max(0.0);
                hit_budget = true;
            }
        }

        for j in 0..m {
            if in_active[j] || blocked[j] || Some(j) == just_dropped {
                continue;
            }
            for (numer, denom) in [(mu - corr[j], 1.0 - a[j]), (mu + corr[j], 1.0 + a[j])] {
                if denom > 1e-12 {
                    let d = (numer / denom).max(0.0);
                    if d < delta - 1e-14 * scale {
                        delta = d;
                        hit_budget = false;
                        join = Some(j);
                        drop = None;
                    }
                }
            }
        }

        for (k, &j) in active.iter().enumerate() {
            // coefficient heading toward a sign flip: drop at zero first
            if w[k] * sign[k] < 0.0 {
                let d = -beta[j] / w[k];
                if d >= 0.0 && d < delta - 1e-14 * scale {
                    delta = d;
                    hit_budget = false;
                    join = None;
                    drop = Some(k);
                }
            }
        }

        if delta > 0.0 {
            for (k, &j) in active.iter().enumerate() {
                beta[j] += delta * w[k];
            }
            resid.scaled_add(-delta, &u);
            mu -= delta;
            since_refresh += 1;
            if since_refresh >= 64 {
                corr = (0..m).map(|j| z.column(j).dot(&resid)).collect();
                since_refresh = 0;
            } else {
                for j in 0..m {
                    corr[j] -= delta * a[j];
                }
            }
            let l1: f64 = beta.iter().map(|v| v.abs()).sum();
            if l1 > points.last().unwrap().l1 {
                points.push(LassoPathPoint {
                    l1,
                    beta: beta.clone(),
                });
            }
        }

        if hit_budget || mu <= stop_tol {
            return Ok(points);
        }
        if join.is_none() && drop.is_none() {
            // active correlations reached zero: least-squares end of the path
            return Ok(points);
        }

        if let Some(j) = join {
            let cross: Vec<f64> = active.iter().map(|&i| gram_col(i, j)).collect();
            if chol.try_append(&cross, gram_col(j, j)) {
                active.push(j);
                sign.push(corr[j].signum());
                in_active[j] = true;
            } else {
                blocked[j] = true;
            }
            just_dropped = None;
        } else if let Some(k) = drop {
            let j = active.remove(k);
            sign.remove(k);
            in_active[j] = false;
            beta[j] = 0.0;
            just_dropped = Some(j);
            let gram_fn = |a: usize, b: usize| gram_col(a, b);
            chol = Cholesky::from_gram(&gram_fn, &active)
                .ok_or(Error::NonFinite("lasso active gram became singular"))?;
            if active.is_empty() {
                return Ok(points);
            }
        }
    }
    Err(Error::Other("lasso homotopy failed to terminate".into()))
}

fn beta_at_budget(points: &[LassoPathPoint], m: usize, budget: f64) -> Vec<f64> {
    if points.is_empty() {
        return vec![0.0; m];
    }
    if budget >= points.last().unwrap().l1 {
        return points.last().unwrap().beta.clone();
    }
    let mut prev = &points[0];
    for pt in &points[1..] {
        if pt.l1 >= budget {
            let span = pt.l1 - prev.l1;
            let t = if span > 0.0 {
                (budget - prev.l1) / span
            } else {
                0.0
            };
            return prev
                .beta
                .iter()
                .zip(&pt.beta)
                .map(|(a, b)| a + t * (b - a))
                .collect();
        }
        prev = pt;
    }
    points.last().unwrap().beta.clone()
}

fn model_from_beta(
    design: &LassoDesign,
    y: ArrayView1<f64>,
    intercept: f64,
    beta: &[f64],
    budget: f64,
) -> LassoModel {
    let n = y.len();
    let mut sse = NeumaierSum::new();
    for i in 0..n {
        let fit: f64 = intercept
            + beta
                .iter()
                .enumerate()
                .map(|(j, b)| b * design.z[[i, j]])
                .sum::<f64>();
        let e = y[i] - fit;
        sse.add(e * e);
    }
    let mut coefficients = BTreeMap::new();
    for (j, &b) in beta.iter().enumerate() {
        if b != 0.0 {
            coefficients.insert(design.rule_of_col[j], b);
        }
    }
    LassoModel {
        coefficients,
        intercept,
        budget,
        training_sse: sse.total(),
        dropped_zero_columns: design.dropped_zero,
        dropped_duplicate_columns: design.dropped_dup,
    }
}

/// Solve the rule lasso at a fixed l1 budget (no cross-validation).
/// `budget = f64::INFINITY` runs the path to its least-squares end.
pub fn solve_rule_lasso_at(
    rules: &[WeightedRule],
    x: &Array2<f64>,
    y: ArrayView1<f64>,
    budget: f64,
) -> Result<LassoModel> {
    if rules.is_empty() {
        return Err(Error::InvalidParameter("empty rule list".into()));
    }
    if budget.is_nan() || budget < 0.0 {
        return Err(Error::InvalidParameter("budget must be >= 0".into()));
    }
    let intercept = compensated_sum(y.iter().copied()) / y.len() as f64;
    let r: Array1<f64> = y.mapv(|v| v - intercept);
    let design = build_lasso_design(rules, x);
    let points = lasso_path(&design.z, &r, budget)?;
    let beta = points.last().map(|p| p.beta.clone()).unwrap_or_default();
    Ok(model_from_beta(&design, y, intercept, &beta, budget))
}

/// Default multiplicative budget grid: 50 points on [0.001 * l1_max, l1_max].
pub fn default_budget_grid(l1_max: f64) -> Vec<f64> {
    let lo = 0.001 * l1_max;
    (0..50)
        .map(|k| lo * 1000f64.powf(k as f64 / 49.0))
        .collect()
}

/// Rule lasso with the budget chosen by k-fold cross-validation.
///
/// `lambda_grid = None` uses the default 50-point multiplicative grid anchored
/// at the full-data path end; ties break toward the smaller budget.
pub fn solve_rule_lasso(
    rules: &[WeightedRule],
    x: &Array2<f64>,
    y: ArrayView1<f64>,
    lambda_grid: Option<&[f64]>,
    folds: usize,
    seed: u64,
) -> Result<LassoModel> {
    if rules.is_empty() {
        return Err(Error::InvalidParameter("empty rule list".into()));
    }
    if folds < 2 {
        return Err(Error::InvalidParameter(
            "cross-validation needs at least 2 folds".into(),
        ));
    }
    let n = y.len();
    if folds > n {
        return Err(Error::InvalidParameter(format!(
            "{folds} folds over {n} rows leaves empty folds"
        )));
    }
    let intercept = compensated_sum(y.iter().copied()) / n as f64;
    let r: Array1<f64> = y.mapv(|v| v - intercept);
    let design = build_lasso_design(rules, x);
    let m = design.z.ncols();
    if m == 0 {
        return Ok(model_from_beta(&design, y, intercept, &[], 0.0));
    }

    let full_path = lasso_path(&design.z, &r, f64::INFINITY)?;
    let l1_max = full_path.last().map(|p| p.l1).unwrap_or(0.0);
    if l1_max == 0.0 {
        return Ok(model_from_beta(&design, y, intercept, &vec![0.0; m], 0.0));
    }
    let grid: Vec<f64> = match lambda_grid {
        Some(g) => {
            let mut g: Vec<f64> = g.iter().copied().filter(|v| *v >= 0.0).collect();
            if g.is_empty() {
                return Err(Error::InvalidParameter("empty budget grid".into()));
            }
            g.sort_by(|a, b| a.partial_cmp(b).unwrap());
            g.dedup();
            g
        }
        None => default_budget_grid(l1_max),
    };
    let cap = grid.last().copied().unwrap();

    let mut order: Vec<usize> = (0..n).collect();
    use rand::seq::SliceRandom;
    order.shuffle(&mut rng::stream(seed, "rule-lasso-cv", 0));

    let mut cv_sse = vec![NeumaierSum::new(); grid.len()];
    for fold in 0..folds {
        let held: BTreeSet<usize> = order
            .iter()
            .enumerate()
            .filter(|(i, _)| i % folds == fold)
            .map(|(_, &row)| row)
            .collect();
        let train_rows: Vec<usize> = (0..n).filter(|i| !held.contains(i)).collect();
        let z_train =
            Array2::from_shape_fn((train_rows.len(), m), |(i, j)| design.z[[train_rows[i], j]]);
        let r_train = Array1::from_iter(train_rows.iter().map(|&i| r[i]));
        let path = lasso_path(&z_train, &r_train, cap)?;
        for (gi, &budget) in grid.iter().enumerate() {
            let beta = beta_at_budget(&path, m, budget);
            for &row in &held {
                let fit: f64 = intercept
                    + beta
                        .iter()
                        .enumerate()
                        .map(|(j, b)| b * design.z[[row, j]])
                        .sum::<f64>();
                let e = y[row] - fit;
                cv_sse[gi].add(e * e);
            }
        }
    }
    let mut best = 0usize;
    for gi in 1..grid.len() {
        if cv_sse[gi].total() < cv_sse[best].total() {
            best = gi;
        }
    }
    let beta = beta_at_budget(&full_path, m, grid[best]);
    Ok(model_from_beta(&design, y, intercept, &beta, grid[best]))
}

/// `intercept + sum_j coef_j R_j(x)` over the model's nonzero rules.
pub fn predict_rule_lasso(
    model: &LassoModel,
    rules: &[WeightedRule],
    x: ArrayView1<f64>,
) -> Result<f64> {
    let mut acc = NeumaierSum::new();
    acc.add(model.intercept);
    for (&rule_idx, &coef) in &model.coefficients {
        let rule = rules.get(rule_idx).ok_or_else(|| {
            Error::InvalidParameter(format!(
                "coefficient for rule {rule_idx} outside the rule list"
            ))
        })?;
        if rule.region.contains(x) {
            acc.add(coef);
        }
    }
    Ok(acc.total())
}
