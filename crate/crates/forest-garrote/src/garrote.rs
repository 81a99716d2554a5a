//! Nonnegative-garrote selection over group fits: least squares on
//! nonnegative multipliers of the group contributions under the normalized
//! l1 budget, solved by a LARS homotopy with a positivity constraint.
//!
//! The normalized constraint `G^{-1} sum(gamma) <= lambda` is run as a plain
//! budget of `G * lambda` on unscaled columns; columns are deliberately not
//! rescaled, so groups with little variance across the sample pick up more
//! penalty. The response is centered by the fixed intercept (the root-rule
//! group) before the solve and the intercept is never penalized.

use std::collections::{BTreeMap, BTreeSet};

use ndarray::{Array1, Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::data::ColumnInfo;
use crate::error::{Error, Result};
use crate::numeric::{compensated_sum, Cholesky, NeumaierSum};
use crate::rng;
use crate::ruleset::{eval_group, GroupFit, InteractionPattern};

/// Design matrix of group evaluations at the training rows.
#[derive(Debug, Clone)]
pub struct GroupDesign {
    /// n x G matrix, `z[[i, g]] = T_sigma_g(X_i)`, intercept group excluded.
    pub z: Array2<f64>,
    /// Patterns of the design columns, 1:1 with columns of `z`.
    pub patterns: Vec<InteractionPattern>,
    /// Fixed per-observation contribution of the intercept (root-rule) group.
    pub intercept: f64,
    /// Exact duplicate columns removed to keep active sets full rank.
    pub duplicates_dropped: usize,
}

impl GroupDesign {
    pub fn group_count(&self) -> usize {
        self.patterns.len()
    }
}

/// Fitted garrote model: nonnegative multipliers on active patterns.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GarroteModel {
    /// Multipliers for patterns with `gamma > 0`; zeros are absent.
    pub gamma: BTreeMap<InteractionPattern, f64>,
    pub intercept: f64,
    /// `G^{-1} sum(gamma)` at the solution.
    pub budget_used: f64,
    pub lambda: f64,
    pub training_sse: f64,
    /// Number of active non-intercept patterns used for normalization.
    pub group_count: usize,
}

impl GarroteModel {
    /// Column indices involved in selected patterns.
    pub fn selected_columns(&self) -> BTreeSet<usize> {
        self.gamma.keys().flat_map(|p| p.involved()).collect()
    }

    /// Selected original variables: nonzero sign positions of patterns with
    /// positive multiplier, dummy columns mapped back to their parent factor.
    pub fn selected_variables(&self, columns: &[ColumnInfo]) -> BTreeSet<usize> {
        self.selected_columns()
            .into_iter()
            .map(|c| columns[c].original_index)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathPoint {
    /// `G^{-1} sum(gamma)` at this breakpoint.
    pub normalized_l1: f64,
    pub gamma: Vec<f64>,
    pub training_sse: f64,
}

/// Piecewise-linear solution path of the nonnegative LARS.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverPath {
    pub breakpoints: Vec<PathPoint>,
    pub final_index: usize,
}

/// Build the group design: one column per non-intercept group evaluated over
/// the training rows; the intercept group becomes a fixed constant.
pub fn build_design(groups: &[GroupFit], x: &Array2<f64>) -> Result<GroupDesign> {
    let intercept = groups
        .iter()
        .find(|g| g.pattern.is_intercept())
        .map(|g| compensated_sum(g.rules.iter().map(|r| r.beta)))
        .unwrap_or(0.0);

    let active: Vec<&GroupFit> = groups
        .iter()
        .filter(|g| !g.pattern.is_intercept())
        .collect();
    let n = x.nrows();
    let mut kept: Vec<InteractionPattern> = Vec::new();
    let mut cols: Vec<Vec<f64>> = Vec::new();
    let mut duplicates_dropped = 0usize;
    for g in active {
        let mut col = Vec::with_capacity(n);
        for i in 0..n {
            col.push(eval_group(g, x.row(i))?);
        }
        if cols.iter().any(|c| c == &col) {
            duplicates_dropped += 1;
            continue;
        }
        kept.push(g.pattern.clone());
        cols.push(col);
    }
    let z = Array2::from_shape_fn((n, kept.len()), |(i, g)| cols[g][i]);
    Ok(GroupDesign {
        z,
        patterns: kept,
        intercept,
        duplicates_dropped,
    })
}

enum StopEvent {
    /// Budget boundary crossed inside the segment (exact interpolation).
    Budget,
    /// Correlations hit zero: unconstrained nonnegative LS reached.
    Stationary,
}

struct PathState {
    gamma: Vec<f64>,
    breakpoints: Vec<PathPoint>,
}

/// Core homotopy: track the positive-lasso path of
/// `min ||r - Z gamma||^2  s.t. gamma >= 0, sum(gamma) <= budget`,
/// parametrized by the common correlation `mu` of the active set.
fn nonnegative_lars(z: &Array2<f64>, r: &Array1<f64>, budget: f64) -> Result<PathState> {
    let n = z.nrows();
    let g = z.ncols();
    debug_assert!(budget > 0.0);

    let sse_of = |resid: &Array1<f64>| -> f64 { compensated_sum(resid.iter().map(|v| v * v)) };

    let gram: Vec<Vec<f64>> = (0..g)
        .map(|a| (0..g).map(|b| z.column(a).dot(&z.column(b))).collect())
        .collect();

    let mut gamma = vec![0.0f64; g];
    let mut resid = r.clone();
    let mut breakpoints = vec![PathPoint {
        normalized_l1: 0.0,
        gamma: gamma.clone(),
        training_sse: sse_of(&resid),
    }];

    let mut corr: Vec<f64> = (0..g).map(|j| z.column(j).dot(&resid)).collect();
    let scale = corr.iter().fold(0.0f64, |m, c| m.max(c.abs())).max(1.0);

    let mut active: Vec<usize> = Vec::new();
    let mut in_active = vec![false; g];
    let mut blocked = vec![false; g]; // linearly dependent on some active set
    let mut chol = Cholesky::new();
    let mut just_dropped: Option<usize> = None;

    // Seed the active set with the most positively correlated column.
    let mut mu = f64::NEG_INFINITY;
    let mut first = None;
    for (j, &c) in corr.iter().enumerate() {
        if c > mu + 1e-15 * scale {
            mu = c;
            first = Some(j);
        }
    }
    let Some(first) = first else {
        return Ok(PathState { gamma, breakpoints });
    };
    if mu <= 0.0 {
        // nonnegativity binds everywhere: the zero vector is optimal
        return Ok(PathState { gamma, breakpoints });
    }
    if !chol.try_append(&[], gram[first][first]) {
        return Err(Error::NonFinite(
            "garrote design column with zero norm entered first",
        ));
    }
    active.push(first);
    in_active[first] = true;

    let max_iters = 20 * g + 200;
    for _ in 0..max_iters {
        // direction in mu: gamma_A moves by w per unit decrease of mu
        let w = chol.solve(&vec![1.0; active.len()]);
        let w_sum: f64 = w.iter().sum();
        debug_assert!(w_sum > 0.0, "1'(Z_A'Z_A)^-1 1 must be positive");

        // u = Z_A w, the per-row fit velocity
        let mut u = Array1::<f64>::zeros(n);
        for (k, &j) in active.iter().enumerate() {
            u.scaled_add(w[k], &z.column(j));
        }

        // candidate events as mu decreases by delta
        let mut delta = mu; // correlations reach zero
        let mut event: Option<StopEvent> = Some(StopEvent::Stationary);
        let mut join: Option<usize> = None;
        let mut drop: Option<usize> = None;

        let l1: f64 = gamma.iter().sum();
        let to_budget = (budget - l1) / w_sum;
        if to_budget < delta {
            delta = to_budget.max(0.0);
            event = Some(StopEvent::Budget);
        }

        for j in 0..g {
            if in_active[j] || blocked[j] || Some(j) == just_dropped {
                continue;
            }
            let a_j = z.column(j).dot(&u);
            if a_j >= 1.0 - 1e-12 {
                continue; // cannot catch the active correlation
            }
            let numer = (mu - corr[j]).max(0.0);
            let d = numer / (1.0 - a_j);
            if d < delta - 1e-14 * scale {
                delta = d.max(0.0);
                event = None;
                join = Some(j);
                drop = None;
            }
        }

        for (k, &j) in active.iter().enumerate() {
            if w[k] < -1e-15 {
                let d = -gamma[j] / w[k];
                if d < delta - 1e-14 * scale {
                    delta = d.max(0.0);
                    event = None;
                    join = None;
                    drop = Some(k);
                }
            }
        }

        // advance the segment
        if delta > 0.0 {
            for (k, &j) in active.iter().enumerate() {
                gamma[j] += delta * w[k];
                if gamma[j] < 0.0 {
                    debug_assert!(gamma[j] > -1e-9 * scale);
                    gamma[j] = 0.0;
                }
            }
            resid.scaled_add(-delta, &u);
            mu -= delta;
            corr = (0..g).map(|j| z.column(j).dot(&resid)).collect();

            let l1_now: f64 = gamma.iter().sum();
            let point = PathPoint {
                normalized_l1: l1_now / g as f64,
                gamma: gamma.clone(),
                training_sse: sse_of(&resid),
            };
            if point.normalized_l1 > breakpoints.last().unwrap().normalized_l1 {
                breakpoints.push(point);
            }
        }

        match event {
            Some(StopEvent::Budget) | Some(StopEvent::Stationary) => {
                return Ok(PathState { gamma, breakpoints });
            }
            None => {}
        }

        if let Some(j) = join {
            let cross: Vec<f64> = active.iter().map(|&i| gram[i][j]).collect();
            if chol.try_append(&cross, gram[j][j]) {
                active.push(j);
                in_active[j] = true;
            } else {
                blocked[j] = true;
            }
            just_dropped = None;
        } else if let Some(k) = drop {
            let j = active.remove(k);
            in_active[j] = false;
            gamma[j] = 0.0;
            just_dropped = Some(j);
            let gram_fn = |a: usize, b: usize| gram[a][b];
            chol = Cholesky::from_gram(&gram_fn, &active)
                .ok_or(Error::NonFinite("active gram became singular after drop"))?;
            if active.is_empty() {
                return Ok(PathState { gamma, breakpoints });
            }
        }
    }
    Err(Error::Other("nonnegative LARS failed to terminate".into()))
}

/// Solve the garrote selection at budget `lambda` (normalized l1), returning
/// the model and the full solution path up to the stopping point.
///
/// If the unconstrained nonnegative least-squares solution satisfies the
/// budget, it is returned with `budget_used < lambda`.
pub fn solve_garrote(
    design: &GroupDesign,
    y: ArrayView1<f64>,
    lambda: f64,
) -> Result<(GarroteModel, SolverPath)> {
    if lambda <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "lambda must be > 0, got {lambda}"
        )));
    }
    if y.len() != design.z.nrows() {
        return Err(Error::DimensionMismatch {
            expected: design.z.nrows(),
            got: y.len(),
        });
    }
    if y.iter().any(|v| !v.is_finite()) || design.z.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("garrote inputs"));
    }
    let g = design.group_count();
    if g == 0 {
        // nothing to select: constant forest
        let r: Array1<f64> = y.mapv(|v| v - design.intercept);
        let sse = compensated_sum(r.iter().map(|v| v * v));
        let model = GarroteModel {
            gamma: BTreeMap::new(),
            intercept: design.intercept,
            budget_used: 0.0,
            lambda,
            training_sse: sse,
            group_count: 0,
        };
        let path = SolverPath {
            breakpoints: vec![PathPoint {
                normalized_l1: 0.0,
                gamma: vec![],
                training_sse: sse,
            }],
            final_index: 0,
        };
        return Ok((model, path));
    }

    let r: Array1<f64> = y.mapv(|v| v - design.intercept);
    let state = nonnegative_lars(&design.z, &r, g as f64 * lambda)?;

    let mut gamma_map = BTreeMap::new();
    for (j, &v) in state.gamma.iter().enumerate() {
        if v > 0.0 {
            gamma_map.insert(design.patterns[j].clone(), v);
        }
    }
    let mut resid = r;
    for (j, &v) in state.gamma.iter().enumerate() {
        if v != 0.0 {
            resid.scaled_add(-v, &design.z.column(j));
        }
    }
    let training_sse = compensated_sum(resid.iter().map(|v| v * v));
    let budget_used = state.gamma.iter().sum::<f64>() / g as f64;
    let model = GarroteModel {
        gamma: gamma_map,
        intercept: design.intercept,
        budget_used,
        lambda,
        training_sse,
        group_count: g,
    };
    let final_index = state.breakpoints.len() - 1;
    Ok((
        model,
        SolverPath {
            breakpoints: state.breakpoints,
            final_index,
        },
    ))
}

/// Gamma vector at a given raw l1 budget, interpolated linearly between path
/// breakpoints (the path is piecewise linear, so this is exact).
pub fn gamma_at_budget(path: &SolverPath, group_count: usize, budget: f64) -> Vec<f64> {
    let pts = &path.breakpoints;
    if pts.is_empty() {
        return vec![0.0; group_count];
    }
    let norm = budget / group_count as f64;
    if norm >= pts.last().unwrap().normalized_l1 {
        return pts.last().unwrap().gamma.clone();
    }
    let mut prev = &pts[0];
    for pt in &pts[1..] {
        if pt.normalized_l1 >= norm {
            let span = pt.normalized_l1 - prev.normalized_l1;
            let t = if span > 0.0 {
                (norm - prev.normalized_l1) / span
            } else {
                0.0
            };
            return prev
                .gamma
                .iter()
                .zip(&pt.gamma)
                .map(|(a, b)| (a + t * (b - a)).max(0.0))
                .collect();
        }
        prev = pt;
    }
    pts.last().unwrap().gamma.clone()
}

/// Cross-validated choice of lambda over `lambda_grid`: groups and design are
/// held fixed, only gamma is refit per fold; ties break toward the smaller
/// (sparser) lambda; the model is refit on the full data at the winner.
pub fn solve_garrote_cv(
    design: &GroupDesign,
    y: ArrayView1<f64>,
    folds: usize,
    lambda_grid: &[f64],
    seed: u64,
) -> Result<GarroteModel> {
    if folds < 2 {
        return Err(Error::InvalidParameter(
            "cross-validation needs at least 2 folds".into(),
        ));
    }
    if lambda_grid.is_empty() {
        return Err(Error::InvalidParameter("empty lambda grid".into()));
    }
    if lambda_grid.iter().any(|&l| !(l > 0.0 && l <= 2.0)) {
        return Err(Error::InvalidParameter(
            "lambda grid must lie in (0, 2]".into(),
        ));
    }
    let n = y.len();
    if folds > n {
        return Err(Error::InvalidParameter(format!(
            "{folds} folds over {n} rows leaves empty folds"
        )));
    }
    let g = design.group_count();
    if g == 0 {
        let (model, _) = solve_garrote(design, y, lambda_grid[0])?;
        return Ok(model);
    }

    let mut grid: Vec<f64> = lambda_grid.to_vec();
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup();
    let lambda_max = *grid.last().unwrap();

    let mut order: Vec<usize> = (0..n).collect();
    use rand::seq::SliceRandom;
    order.shuffle(&mut rng::stream(seed, "cv", 0));

    let mut cv_sse = vec![NeumaierSum::new(); grid.len()];
    for fold in 0..folds {
        let held: BTreeSet<usize> = order
            .iter()
            .enumerate()
            .filter(|(i, _)| i % folds == fold)
            .map(|(_, &r)| r)
            .collect();
        let train_rows: Vec<usize> = (0..n).filter(|i| !held.contains(i)).collect();

        let z_train =
            Array2::from_shape_fn((train_rows.len(), g), |(i, j)| design.z[[train_rows[i], j]]);
        let r_train = Array1::from_iter(train_rows.iter().map(|&i| y[i] - design.intercept));
        let state = nonnegative_lars(&z_train, &r_train, g as f64 * lambda_max)?;
        let path = SolverPath {
            final_index: state.breakpoints.len() - 1,
            breakpoints: state.breakpoints,
        };

        for (gi, &lambda) in grid.iter().enumerate() {
            let gamma = gamma_at_budget(&path, g, g as f64 * lambda);
            for &row in &held {
                let fit: f64 = design.intercept
                    + gamma
                        .iter()
                        .enumerate()
                        .map(|(j, &v)| v * design.z[[row, j]])
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
    let (model, _) = solve_garrote(design, y, grid[best])?;
    Ok(model)
}

/// Default cross-validation grid over (0, 2]: {0.1, 0.2, ..., 2.0}.
pub fn default_lambda_grid() -> Vec<f64> {
    (1..=20).map(|k| k as f64 / 10.0).collect()
}

/// `intercept + sum_sigma gamma_sigma * T_sigma(x)`.
pub fn predict_garrote(
    model: &GarroteModel,
    groups: &[GroupFit],
    x: ArrayView1<f64>,
) -> Result<f64> {
    let mut acc = NeumaierSum::new();
    acc.add(model.intercept);
    for (pattern, &gamma) in &model.gamma {
        let group = groups
            .iter()
            .find(|g| &g.pattern == pattern)
            .ok_or_else(|| Error::UnknownPattern(pattern.to_string()))?;
        acc.add(gamma * eval_group(group, x)?);
    }
    Ok(acc.total())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ruleset::{Condition, RuleBox, RuleOrigin, Side, WeightedRule};
    use ndarray::arr1;

    fn one_rule_group(signs: Vec<i8>, conds: &[(usize, Side, f64)], beta: f64) -> GroupFit {
        let mut region = RuleBox::empty();
        for &(var, side, threshold) in conds {
            region.tighten(Condition {
                var,
                side,
                threshold,
            });
        }
        GroupFit {
            pattern: InteractionPattern { signs },
            rules: vec![WeightedRule {
                region,
                beta,
                origin: RuleOrigin::Node { tree: 0, node: 0 },
            }],
        }
    }

    fn design_from(cols: Vec<Vec<f64>>, intercept: f64) -> GroupDesign {
        let n = cols[0].len();
        let g = cols.len();
        GroupDesign {
            z: Array2::from_shape_fn((n, g), |(i, j)| cols[j][i]),
            patterns: (0..g)
                .map(|j| {
                    let mut signs = vec![0i8; g];
                    signs[j] = 1;
                    InteractionPattern { signs }
                })
                .collect(),
            intercept,
            duplicates_dropped: 0,
        }
    }

    #[test]
    fn build_design_single_group_column() {
        let groups = vec![one_rule_group(vec![1, 0], &[(0, Side::Ge, 0.0)], 2.0)];
        let x = ndarray::arr2(&[[-1.0, 0.0], [1.0, 0.0]]);
        let d = build_design(&groups, &x).unwrap();
        assert_eq!(d.group_count(), 1);
        assert_eq!(d.z.column(0).to_vec(), vec![0.0, 2.0]);
        assert_eq!(d.intercept, 0.0);
    }

    #[test]
    fn anticorrelated_single_column_stays_at_zero() {
        let d = design_from(vec![vec![0.0, 2.0]], 0.0);
        let y = arr1(&[0.0, -2.0]);
        let (model, path) = solve_garrote(&d, y.view(), 1.0).unwrap();
        assert!(model.gamma.is_empty());
        assert_eq!(model.budget_used, 0.0);
        assert_eq!(path.breakpoints.len(), 1);
    }

    #[test]
    fn single_column_least_squares_within_budget() {
        // LS coefficient is 1.0; budget G*lambda = 2 is slack
        let d = design_from(vec![vec![0.0, 2.0]], 0.0);
        let y = arr1(&[0.0, 2.0]);
        let (model, _) = solve_garrote(&d, y.view(), 2.0).unwrap();
        let gamma = model.gamma.values().next().copied().unwrap();
        assert!((gamma - 1.0).abs() < 1e-12);
        assert!(model.budget_used < 2.0);
        assert!(model.training_sse < 1e-20);
    }

    #[test]
    fn budget_truncation_is_exact() {
        let d = design_from(vec![vec![0.0, 2.0]], 0.0);
        let y = arr1(&[0.0, 2.0]);
        let (model, _) = solve_garrote(&d, y.view(), 0.25).unwrap();
        let gamma = model.gamma.values().next().copied().unwrap();
        assert!((gamma - 0.25).abs() < 1e-12);
        assert!((model.budget_used - 0.25).abs() < 1e-12);
    }

    #[test]
    fn orthogonal_columns_match_closed_form() {
        // z1 and z2 orthogonal with different norms; nonnegative lasso on
        // orthogonal designs is coordinatewise soft thresholding at mu:
        // gamma_j(mu) = max(0, (c_j - mu) / d_j)
        let z1 = vec![1.0, 1.0, 0.0, 0.0];
        let z2 = vec![0.0, 0.0, 2.0, 0.0];
        let y = arr1(&[3.0, 1.0, 4.0, 0.0]);
        let d = design_from(vec![z1.clone(), z2.clone()], 0.0);
        let c1: f64 = z1.iter().zip(y.iter()).map(|(a, b)| a * b).sum(); // 4
        let c2: f64 = z2.iter().zip(y.iter()).map(|(a, b)| a * b).sum(); // 8
        let d1: f64 = z1.iter().map(|v| v * v).sum(); // 2
        let d2: f64 = z2.iter().map(|v| v * v).sum(); // 4

        // pick a budget below the NNLS l1 norm so the constraint binds
        let budget = 1.5; // lambda = budget / G
        let (model, _) = solve_garrote(&d, y.view(), budget / 2.0).unwrap();
        // solve sum_j max(0,(c_j - mu)/d_j) = budget for mu by bisection
        let total = |mu: f64| ((c1 - mu) / d1).max(0.0) + ((c2 - mu) / d2).max(0.0);
        let (mut lo, mut hi) = (0.0, c1.max(c2));
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if total(mid) > budget {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mu = 0.5 * (lo + hi);
        let want1 = ((c1 - mu) / d1).max(0.0);
        let want2 = ((c2 - mu) / d2).max(0.0);
        let got1 = model.gamma.get(&d.patterns[0]).copied().unwrap();
        let got2 = model.gamma.get(&d.patterns[1]).copied().unwrap();
        assert!((got1 - want1).abs() < 1e-9, "{got1} vs {want1}");
        assert!((got2 - want2).abs() < 1e-9, "{got2} vs {want2}");
    }

    #[test]
    fn kkt_holds_at_solution() {
        // random-ish fixed instance
        let cols = vec![
            vec![1.0, 0.3, -0.2, 0.8, 0.1],
            vec![0.2, 1.1, 0.4, -0.3, 0.9],
            vec![-0.5, 0.7, 1.3, 0.2, 0.6],
        ];
        let y = arr1(&[1.2, 0.4, 2.2, 0.5, 1.4]);
        let d = design_from(cols.clone(), 0.0);
        let (model, _) = solve_garrote(&d, y.view(), 0.4).unwrap();
        let gamma_by_col: Vec<f64> = d
            .patterns
            .iter()
            .map(|p| model.gamma.get(p).copied().unwrap_or(0.0))
            .collect();
        let resid: Vec<f64> = (0..5)
            .map(|i| y[i] - (0..3).map(|j| gamma_by_col[j] * cols[j][i]).sum::<f64>())
            .collect();
        let corr: Vec<f64> = (0..3)
            .map(|j| (0..5).map(|i| cols[j][i] * resid[i]).sum::<f64>())
            .collect();
        let active_corr: Vec<f64> = (0..3)
            .filter(|&j| gamma_by_col[j] > 0.0)
            .map(|j| corr[j])
            .collect();
        assert!(!active_corr.is_empty());
        let mu = active_corr[0];
        for &c in &active_corr {
            assert!(
                (c - mu).abs() < 1e-6,
                "active correlations differ: {c} vs {mu}"
            );
        }
        for j in 0..3 {
            if gamma_by_col[j] == 0.0 {
                assert!(corr[j] <= mu + 1e-6, "inactive correlation above mu");
            }
        }
    }

    #[test]
    fn empty_design_returns_intercept_model() {
        let d = GroupDesign {
            z: Array2::zeros((3, 0)),
            patterns: vec![],
            intercept: 2.0,
            duplicates_dropped: 0,
        };
        let y = arr1(&[2.0, 2.0, 2.0]);
        let (model, _) = solve_garrote(&d, y.view(), 1.0).unwrap();
        assert!(model.gamma.is_empty());
        assert_eq!(model.training_sse, 0.0);
        assert_eq!(model.group_count, 0);
    }

    #[test]
    fn path_l1_strictly_increasing_and_sse_nonincreasing() {
        let cols = vec![
            vec![1.0, 0.5, 0.0, 0.3, -0.1, 0.9],
            vec![0.1, 1.0, 0.8, -0.5, 0.2, 0.4],
            vec![0.7, -0.3, 1.0, 0.6, 0.5, 0.0],
            vec![0.2, 0.2, 0.2, 1.0, 0.8, -0.6],
        ];
        let y = arr1(&[2.0, 1.5, 0.7, 1.1, 0.9, 0.3]);
        let d = design_from(cols, 0.0);
        let (_, path) = solve_garrote(&d, y.view(), 2.0).unwrap();
        for pair in path.breakpoints.windows(2) {
            assert!(pair[1].normalized_l1 > pair[0].normalized_l1);
            assert!(pair[1].training_sse <= pair[0].training_sse + 1e-12);
        }
        for pt in &path.breakpoints {
            assert!(pt.gamma.iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn solver_rejects_non_finite_inputs() {
        let d = design_from(vec![vec![1.0, f64::NAN]], 0.0);
        let y = arr1(&[1.0, 2.0]);
        assert!(matches!(
            solve_garrote(&d, y.view(), 1.0),
            Err(Error::NonFinite(_))
        ));
        let d = design_from(vec![vec![1.0, 0.0]], 0.0);
        let y = arr1(&[1.0, f64::INFINITY]);
        assert!(matches!(
            solve_garrote(&d, y.view(), 1.0),
            Err(Error::NonFinite(_))
        ));
        assert!(solve_garrote(&d, arr1(&[1.0]).view(), 1.0).is_err()); // row mismatch
        assert!(solve_garrote(&d, arr1(&[1.0, 2.0]).view(), 0.0).is_err()); // lambda > 0
    }

    #[test]
    fn cv_with_singleton_grid_matches_plain_solve() {
        let cols = vec![
            vec![1.0, 0.5, 0.0, 0.3, -0.1, 0.9, 0.2, 0.0],
            vec![0.1, 1.0, 0.8, -0.5, 0.2, 0.4, 0.0, 0.7],
        ];
        let y = arr1(&[2.0, 1.5, 0.7, 1.1, 0.9, 0.3, 0.5, 0.8]);
        let d = design_from(cols, 0.0);
        let cv = solve_garrote_cv(&d, y.view(), 4, &[1.0], 3).unwrap();
        let (plain, _) = solve_garrote(&d, y.view(), 1.0).unwrap();
        assert_eq!(cv.gamma.len(), plain.gamma.len());
        for (k, v) in &cv.gamma {
            assert!((v - plain.gamma[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn cv_rejects_bad_parameters() {
        let d = design_from(vec![vec![1.0, 0.0]], 0.0);
        let y = arr1(&[1.0, 0.0]);
        assert!(solve_garrote_cv(&d, y.view(), 1, &[1.0], 0).is_err());
        assert!(solve_garrote_cv(&d, y.view(), 2, &[], 0).is_err());
        assert!(solve_garrote_cv(&d, y.view(), 2, &[2.5], 0).is_err());
        assert!(solve_garrote_cv(&d, y.view(), 3, &[1.0], 0).is_err());
    }

    #[test]
    fn predict_spot_value_on_two_group_model() {
        let groups = vec![
            one_rule_group(vec![1, 0], &[(0, Side::Ge, 0.0)], 2.0),
            one_rule_group(vec![0, -1], &[(1, Side::Lt, 1.0)], 3.0),
        ];
        let mut gamma = BTreeMap::new();
        gamma.insert(groups[0].pattern.clone(), 0.5);
        gamma.insert(groups[1].pattern.clone(), 2.0);
        let model = GarroteModel {
            gamma,
            intercept: 1.0,
            budget_used: 1.25,
            lambda: 2.0,
            training_sse: 0.0,
            group_count: 2,
        };
        // x inside both boxes: 1 + 0.5*2 + 2*3 = 8
        assert_eq!(
            predict_garrote(&model, &groups, arr1(&[0.5, 0.5]).view()).unwrap(),
            8.0
        );
        // x outside both: intercept only
        assert_eq!(
            predict_garrote(&model, &groups, arr1(&[-1.0, 2.0]).view()).unwrap(),
            1.0
        );
    }

    #[test]
    fn predict_rejects_unknown_pattern() {
        let groups = vec![one_rule_group(vec![1], &[(0, Side::Ge, 0.0)], 1.0)];
        let mut gamma = BTreeMap::new();
        gamma.insert(InteractionPattern { signs: vec![-1] }, 1.0);
        let model = GarroteModel {
            gamma,
            intercept: 0.0,
            budget_used: 1.0,
            lambda: 1.0,
            training_sse: 0.0,
            group_count: 1,
        };
        assert!(matches!(
            predict_garrote(&model, &groups, arr1(&[1.0]).view()),
            Err(Error::UnknownPattern(_))
        ));
    }

    #[test]
    fn selected_variables_map_back_through_dummies() {
        use crate::data::ColumnKind;
        let mut gamma = BTreeMap::new();
        gamma.insert(
            InteractionPattern {
                signs: vec![0, 0, 1, 0, 0, 0, 0, 1],
            },
            0.4,
        );
        let model = GarroteModel {
            gamma,
            intercept: 0.0,
            budget_used: 0.05,
            lambda: 1.0,
            training_sse: 0.0,
            group_count: 8,
        };
        let columns: Vec<ColumnInfo> = (0..8)
            .map(|j| ColumnInfo {
                name: format!("c{j}"),
                kind: if j < 2 {
                    ColumnKind::Dummy {
                        factor: "sex".into(),
                        level: format!("l{j}"),
                    }
                } else {
                    ColumnKind::Numeric
                },
                original_index: if j < 2 { 0 } else { j - 1 },
            })
            .collect();
        assert_eq!(
            model.selected_variables(&columns),
            [1usize, 6].into_iter().collect()
        );

        let empty = GarroteModel {
            gamma: BTreeMap::new(),
            intercept: 0.0,
            budget_used: 0.0,
            lambda: 1.0,
            training_sse: 0.0,
            group_count: 8,
        };
        assert!(empty.selected_variables(&columns).is_empty());
    }

    #[test]
    fn duplicate_columns_are_dropped() {
        let g1 = one_rule_group(vec![1, 0], &[(0, Side::Ge, 0.5)], 1.0);
        let mut g2 = one_rule_group(vec![-1, 0], &[(0, Side::Lt, 0.5)], 1.0);
        // craft a duplicate: same evaluations on these rows
        g2.rules[0].region = g1.rules[0].region.clone();
        g2.rules[0].beta = 1.0;
        let x = ndarray::arr2(&[[0.0, 0.0], [1.0, 0.0]]);
        let d = build_design(&[g1, g2], &x).unwrap();
        assert_eq!(d.group_count(), 1);
        assert_eq!(d.duplicates_dropped, 1);
    }
}
