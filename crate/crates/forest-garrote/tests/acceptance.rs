//! Acceptance suite: one test per acceptance criterion, each printing a
//! single PASS line with the measured quantities when it succeeds.
//!
//! Criteria that reference public datasets resolve them from the data cache
//! (`data/` at the repo root, or `FOREST_GARROTE_DATA`). Datasets that are
//! not present are reported per row as MISSING and the criterion runs at
//! full strength on every dataset that is present; at least one dataset must
//! run for the criterion to pass.

mod common;

use common::{
    factor_dataset, fixture, median, pattern_by_probe, pgd_oracle, repo_data_dir, FRIEDMAN_SEEDS,
};
use forest_garrote::data::{friedman1, Dataset};
use forest_garrote::forest::{fit_forest, ForestParams};
use forest_garrote::garrote::{build_design, solve_garrote, GroupDesign};
use forest_garrote::ruleset::{
    build_groups, decompose_intervals, eval_all_groups, pattern_of, Condition, InteractionPattern,
    RuleBox, RuleOrigin, Side, WeightedRule,
};
use ndarray::{Array1, Array2};
use rand::RngExt;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64, label: &str) -> ChaCha8Rng {
    forest_garrote::rng::stream(seed, label, 0)
}

fn make_rule(conds: &[(usize, Side, f64)], beta: f64) -> WeightedRule {
    let mut region = RuleBox::empty();
    for &(var, side, threshold) in conds {
        region.tighten(Condition {
            var,
            side,
            threshold,
        });
    }
    WeightedRule {
        region,
        beta,
        origin: RuleOrigin::Node { tree: 0, node: 0 },
    }
}

/// Criterion 1: the grouped rule decomposition reproduces forest predictions
/// to 1e-10 at 1000 random probe points and every training point, on 5
/// datasets x 3 seeds.
#[test]
fn criterion_01_exact_decomposition() {
    let cache = repo_data_dir();
    let mut datasets: Vec<(String, Dataset)> = vec![
        (
            "friedman-canonical".into(),
            friedman1(300, 1.0, 5, 11).unwrap(),
        ),
        ("friedman-wide".into(), friedman1(200, 0.5, 10, 12).unwrap()),
        (
            "friedman-narrow".into(),
            friedman1(150, 2.0, 0, 13).unwrap(),
        ),
        ("factor-synthetic".into(), factor_dataset(250, 14)),
    ];
    match forest_garrote::bench::resolve("diabetes", &cache, 0) {
        Ok(d) => datasets.push(("diabetes".into(), d)),
        Err(_) => datasets.push(("friedman-large".into(), friedman1(500, 1.0, 5, 15).unwrap())),
    }
    assert_eq!(datasets.len(), 5);

    let mut worst: f64 = 0.0;
    for (name, d) in &datasets {
        for seed in [1u64, 2, 3] {
            let params = ForestParams {
                num_trees: 30,
                mtry: d.p().div_ceil(3).max(1),
                min_node_size: 5,
                seed,
                bootstrap: true,
            };
            let f = fit_forest(d, &params).unwrap();
            let (groups, _) = build_groups(&f).unwrap();

            // column ranges expanded 10% for the probe cloud
            let mut lo = vec![f64::INFINITY; d.p()];
            let mut hi = vec![f64::NEG_INFINITY; d.p()];
            for i in 0..d.n() {
                for j in 0..d.p() {
                    lo[j] = lo[j].min(d.x[[i, j]]);
                    hi[j] = hi[j].max(d.x[[i, j]]);
                }
            }
            let mut r = rng(seed, "probe");
            let mut check = |x: ndarray::ArrayView1<f64>| {
                let via_groups = eval_all_groups(&groups, x).unwrap();
                let via_forest = f.predict(x).unwrap();
                let dev = (via_groups - via_forest).abs();
                worst = worst.max(dev);
                assert!(
                    dev <= 1e-10,
                    "{name} seed {seed}: |group sum - forest| = {dev:.3e} at {x:?}"
                );
            };
            for _ in 0..1000 {
                let x = Array1::from_iter((0..d.p()).map(|j| {
                    let span = (hi[j] - lo[j]).max(1e-9);
                    lo[j] - 0.05 * span + 1.1 * span * r.random::<f64>()
                }));
                check(x.view());
            }
            for i in 0..d.n() {
                check(d.x.row(i));
            }
        }
    }
    println!(
        "criterion 01 exact-decomposition: PASS (5 datasets x 3 seeds, max deviation {worst:.3e} <= 1e-10)"
    );
}

/// Criterion 2: closed-form patterns agree exactly with the brute-force
/// sup/inf probe-grid implementation on 500 random canonical rules, and the
/// worked example (0,0,+,0,0,0,0,+) is reproduced.
#[test]
fn criterion_02_pattern_correctness() {
    let worked = make_rule(&[(2, Side::Ge, 0.537), (7, Side::Ge, 0.135)], 0.0237);
    let sigma = pattern_of(&worked, 8).unwrap();
    assert_eq!(sigma.signs, vec![0, 0, 1, 0, 0, 0, 0, 1]);
    assert_eq!(sigma.to_string(), "(0,0,+,0,0,0,0,+)");

    let mut r = rng(2, "pattern");
    for case in 0..500 {
        let p = r.random_range(3..=8usize);
        let n_vars = r.random_range(1..=4usize.min(p));
        let mut vars: Vec<usize> = (0..p).collect();
        // draw a distinct variable subset
        for i in 0..n_vars {
            let j = r.random_range(i..p);
            vars.swap(i, j);
        }
        let conds: Vec<(usize, Side, f64)> = vars[..n_vars]
            .iter()
            .map(|&v| {
                let side = if r.random::<f64>() < 0.5 {
                    Side::Ge
                } else {
                    Side::Lt
                };
                let scale = 10f64.powi(r.random_range(-2..=2i32));
                (v, side, (r.random::<f64>() - 0.3) * scale)
            })
            .collect();
        let beta =
            (0.1 + 1.9 * r.random::<f64>()) * if r.random::<f64>() < 0.5 { 1.0 } else { -1.0 };
        let rule = make_rule(&conds, beta);
        let closed = pattern_of(&rule, p).unwrap();
        let probed = pattern_by_probe(&rule, p);
        assert_eq!(
            closed.signs, probed,
            "case {case}: closed form {closed} disagrees with probe grid {probed:?} for {rule:?}"
        );
    }
    println!(
        "criterion 02 pattern-correctness: PASS (500/500 random canonical rules, exact agreement)"
    );
}

/// Criterion 3: on 200 random small instances the nonnegative-LARS objective
/// matches an independently implemented projected-gradient oracle to 1e-6
/// relative.
#[test]
fn criterion_03_solver_oracle_equivalence() {
    let mut r = rng(3, "oracle");
    let mut worst_rel: f64 = 0.0;
    for case in 0..200 {
        let n = r.random_range(5..=50usize);
        let g = r.random_range(1..=5usize);
        let mut z = Array2::zeros((n, g));
        for j in 0..g {
            let indicator = r.random::<f64>() < 0.4;
            for i in 0..n {
                z[[i, j]] = if indicator {
                    f64::from(r.random::<f64>() < 0.5)
                } else {
                    forest_garrote::rng::standard_normal(&mut r)
                };
            }
        }
        let gamma_true: Vec<f64> = (0..g)
            .map(|_| {
                if r.random::<f64>() < 0.5 {
                    0.0
                } else {
                    2.0 * r.random::<f64>()
                }
            })
            .collect();
        let y = Array1::from_iter((0..n).map(|i| {
            let signal: f64 = (0..g).map(|j| gamma_true[j] * z[[i, j]]).sum();
            signal + 0.5 * forest_garrote::rng::standard_normal(&mut r)
        }));
        let lambda = 0.2 + 1.3 * r.random::<f64>();

        let design = GroupDesign {
            z: z.clone(),
            patterns: (0..g)
                .map(|j| {
                    let mut signs = vec![0i8; g];
                    signs[j] = 1;
                    InteractionPattern { signs }
                })
                .collect(),
            intercept: 0.0,
            duplicates_dropped: 0,
        };
        let (model, _) = solve_garrote(&design, y.view(), lambda).unwrap();
        let (_, pgd_obj) = pgd_oracle(&z, &y, g as f64 * lambda, 1_000_000);
        let rel = (model.training_sse - pgd_obj).abs() / pgd_obj.max(1e-9);
        worst_rel = worst_rel.max(rel);
        assert!(
            rel <= 1e-6,
            "case {case} (n={n}, G={g}, lambda={lambda:.3}): lars {} vs pgd {pgd_obj} (rel {rel:.3e})",
            model.training_sse
        );
    }
    println!("criterion 03 solver-oracle: PASS (200/200 instances, worst relative gap {worst_rel:.3e} <= 1e-6)");
}

/// Criterion 4: on every benchmark run, FG training SSE never exceeds the
/// forest's, the normalized budget respects lambda=1, and multipliers are
/// nonnegative with zero tolerance.
#[test]
fn criterion_04_feasibility_and_dominance() {
    let fx = fixture();
    let mut checked = 0usize;
    for row in fx.all_rows() {
        assert!(
            row.fg_train_sse <= row.rf_train_sse,
            "{} seed {}: FG train SSE {} > RF train SSE {}",
            row.dataset,
            row.seed,
            row.fg_train_sse,
            row.rf_train_sse
        );
        assert!(
            row.fg_budget_used <= 1.0 + 1e-9,
            "{} seed {}: budget {} above 1+1e-9",
            row.dataset,
            row.seed,
            row.fg_budget_used
        );
        assert!(
            row.fg_min_gamma >= 0.0,
            "{} seed {}: negative multiplier {}",
            row.dataset,
            row.seed,
            row.fg_min_gamma
        );
        checked += 1;
    }
    assert!(checked > 0);
    for name in &fx.missing {
        println!(
            "criterion 04 feasibility-dominance: MISSING dataset {name} (not in offline cache)"
        );
    }
    println!("criterion 04 feasibility-dominance: PASS ({checked} runs: SSE dominance, budget <= 1+1e-9, min gamma >= 0)");
}

/// Criterion 5: selected-variable sparsity direction on the named datasets:
/// FG never selects more variables than the forest uses (hard), and the
/// 5-seed medians are compared against the reported counts as a soft target.
#[test]
fn criterion_05_sparsity_direction() {
    let targets: [(&str, f64); 4] = [
        ("abalone", 5.0),
        ("diabetes", 7.0),
        ("housing", 9.0),
        ("auto", 16.0),
    ];
    let fx = fixture();
    let mut ran = 0usize;
    for (name, target) in targets {
        let rows = fx.rows_for(name);
        if rows.is_empty() {
            println!(
                "criterion 05 sparsity-direction: MISSING dataset {name} (not in offline cache)"
            );
            continue;
        }
        ran += 1;
        for row in &rows {
            assert!(
                row.fg_vars <= row.rf_vars,
                "{name} seed {}: FG selected {} > RF {}",
                row.seed,
                row.fg_vars,
                row.rf_vars
            );
        }
        let mut counts: Vec<f64> = rows.iter().map(|r| r.fg_vars as f64).collect();
        let med = median(&mut counts);
        let within = (med - target).abs() <= 2.0;
        println!(
            "criterion 05 sparsity-direction: {name} median FG vars {med} vs reported {target} ({})",
            if within { "within +/-2" } else { "SOFT MISS (seed variability)" }
        );
    }
    assert!(ran > 0, "no named dataset could run");
    println!("criterion 05 sparsity-direction: PASS ({ran} datasets, FG <= RF on every seed)");
}

/// Criterion 6: predictive parity: median test unexplained variance of FG is
/// within +0.05 of the forest's on each named dataset.
#[test]
fn criterion_06_predictive_parity() {
    let names = ["abalone", "concrete", "housing", "auto-mpg", "diabetes"];
    let fx = fixture();
    let mut ran = 0usize;
    for name in names {
        let rows = fx.rows_for(name);
        if rows.is_empty() {
            println!(
                "criterion 06 predictive-parity: MISSING dataset {name} (not in offline cache)"
            );
            continue;
        }
        ran += 1;
        let mut fg: Vec<f64> = rows.iter().map(|r| r.fg_unexplained).collect();
        let mut rf: Vec<f64> = rows.iter().map(|r| r.rf_unexplained).collect();
        let (fg_med, rf_med) = (median(&mut fg), median(&mut rf));
        assert!(
            fg_med <= rf_med + 0.05,
            "{name}: FG median unexplained {fg_med:.4} above RF {rf_med:.4} + 0.05"
        );
        println!(
            "criterion 06 predictive-parity: {name} FG median {fg_med:.4} vs RF {rf_med:.4} (within +0.05)"
        );
    }
    assert!(ran > 0, "no named dataset could run");
    println!("criterion 06 predictive-parity: PASS ({ran} datasets)");
}

/// Criterion 7: cross-validated lambda does not beat the parameter-free
/// default by more than 5% in median test error on Friedman #1.
#[test]
fn criterion_07_cv_non_superiority() {
    let fx = fixture();
    let rows = fx.rows_for("friedman");
    assert_eq!(rows.len(), FRIEDMAN_SEEDS.len());
    let mut fg: Vec<f64> = rows.iter().map(|r| r.fg_unexplained).collect();
    let mut cv: Vec<f64> = rows.iter().map(|r| r.fgcv_unexplained).collect();
    let (fg_med, cv_med) = (median(&mut fg), median(&mut cv));
    assert!(
        cv_med >= 0.95 * fg_med,
        "CV median test error {cv_med:.4} improves on default-lambda {fg_med:.4} by more than 5%"
    );
    println!(
        "criterion 07 cv-non-superiority: PASS (10 seeds: FG median {fg_med:.4}, FG-CV median {cv_med:.4})"
    );
}

/// Criterion 8: the garrote design is much smaller than the rule dictionary
/// and its solve is faster than the rule lasso's on every run; exercised on
/// abalone/concrete when present, else on the largest available rows with
/// J > 1000.
#[test]
fn criterion_08_relative_timing() {
    let fx = fixture();
    let named = ["abalone", "concrete"];
    let mut rows: Vec<&forest_garrote::bench::BenchRow> = Vec::new();
    for name in named {
        let found = fx.rows_for(name);
        if found.is_empty() {
            println!("criterion 08 relative-timing: MISSING dataset {name} (not in offline cache)");
        } else {
            rows.extend(found);
        }
    }
    if rows.is_empty() {
        println!(
            "criterion 08 relative-timing: falling back to diabetes + friedman rows at J > 1000"
        );
        rows = fx.all_rows().filter(|r| r.rule_count > 1000).collect();
    }
    assert!(!rows.is_empty(), "no rows with J > 1000 available");
    for row in &rows {
        assert!(
            row.group_count < row.rule_count,
            "{} seed {}: |G| = {} not below J = {}",
            row.dataset,
            row.seed,
            row.group_count,
            row.rule_count
        );
        assert!(
            row.fg_solve_secs < row.re_solve_secs,
            "{} seed {}: FG solve {:.4}s not faster than RuleEns {:.4}s",
            row.dataset,
            row.seed,
            row.fg_solve_secs,
            row.re_solve_secs
        );
    }
    // direction holds on every run regardless of size
    for row in fx.all_rows() {
        assert!(row.group_count < row.rule_count);
    }
    let speedups: Vec<f64> = rows
        .iter()
        .map(|r| r.re_solve_secs / r.fg_solve_secs)
        .collect();
    let min_speedup = speedups.iter().copied().fold(f64::INFINITY, f64::min);
    println!(
        "criterion 08 relative-timing: PASS ({} runs, FG solve faster on all; min RuleEns/FG time ratio {min_speedup:.1})",
        rows.len()
    );
}

/// Criterion 9: on Friedman #1 with 5 appended pure-noise columns, FG drops
/// all noise columns in >= 8/10 seeds and keeps all five signal variables in
/// >= 8/10 seeds.
///
/// Known red; see the "Known limitation" section of the README. The forest
/// configuration below is the best of a broad sweep (trees 20..500, min node
/// 5..40, mtry tuned/p/3/p, full-n and split-half training): no configuration
/// reaches both rates, because at lambda = 1 an exact solve keeps every
/// epsilon-useful group, so one straggler noise-touching pattern fails a seed
/// unless the trees are too shallow to retain the weak 20(x3-0.5)^2 and 5*x5
/// terms.
#[test]
fn criterion_09_variable_recovery() {
    let mut noise_clean = 0usize;
    let mut signal_kept = 0usize;
    for seed in FRIEDMAN_SEEDS {
        let d = friedman1(300, 1.0, 5, seed.wrapping_mul(7919)).unwrap();
        let params = ForestParams {
            num_trees: 200,
            mtry: d.p(),
            min_node_size: 34,
            seed,
            bootstrap: true,
        };
        let f = fit_forest(&d, &params).unwrap();
        let (groups, _) = build_groups(&f).unwrap();
        let design = build_design(&groups, &d.x).unwrap();
        let (model, _) = solve_garrote(&design, d.y.view(), 1.0).unwrap();
        let selected = model.selected_variables(&d.columns);
        if (5..10).all(|noise| !selected.contains(&noise)) {
            noise_clean += 1;
        }
        if (0..5).all(|signal| selected.contains(&signal)) {
            signal_kept += 1;
        }
    }
    let pass = noise_clean >= 8 && signal_kept >= 8;
    println!(
        "criterion 09 variable-recovery: {} (noise dropped {noise_clean}/10, signal kept {signal_kept}/10, both required >= 8/10)",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(
        pass,
        "variable recovery rates: noise discarded {noise_clean}/10, signal retained {signal_kept}/10; \
         the criterion requires >= 8/10 on both and no forest configuration attains it (known \
         limitation of the parameter-free budget on this instance; see README, Known limitation)"
    );
}

/// Criterion 10: interval decomposition is pointwise exact (1e-15) on
/// corner-adjacent grids for 1000 random boxes with up to 3 two-sided
/// variables.
#[test]
fn criterion_10_interval_decomposition() {
    let mut r = rng(10, "intervals");
    for case in 0..1000 {
        let p = r.random_range(2..=6usize);
        let mut vars: Vec<usize> = (0..p).collect();
        for i in 0..p {
            let j = r.random_range(i..p);
            vars.swap(i, j);
        }
        let two_sided = r.random_range(0..=3usize.min(p));
        let one_sided = r.random_range(0..=2usize.min(p - two_sided));

        let mut region = RuleBox::empty();
        let mut grid_axes: Vec<(usize, Vec<f64>)> = Vec::new();
        for (slot, &v) in vars[..two_sided + one_sided].iter().enumerate() {
            if slot < two_sided {
                let a = r.random::<f64>() * 2.0 - 1.0;
                let b = a + 0.05 + r.random::<f64>();
                region.tighten(Condition {
                    var: v,
                    side: Side::Ge,
                    threshold: a,
                });
                region.tighten(Condition {
                    var: v,
                    side: Side::Lt,
                    threshold: b,
                });
                let d = 1e-9 * (1.0 + a.abs().max(b.abs()));
                grid_axes.push((v, vec![a - d, a, a + d, 0.5 * (a + b), b - d, b, b + d]));
            } else {
                let t = r.random::<f64>() * 2.0 - 1.0;
                let side = if r.random::<f64>() < 0.5 {
                    Side::Ge
                } else {
                    Side::Lt
                };
                region.tighten(Condition {
                    var: v,
                    side,
                    threshold: t,
                });
                let d = 1e-9 * (1.0 + t.abs());
                grid_axes.push((v, vec![t - d, t, t + d]));
            }
        }
        let beta = (r.random::<f64>() - 0.5) * 4.0;
        if beta == 0.0 {
            continue;
        }
        let rule = WeightedRule {
            region,
            beta,
            origin: RuleOrigin::Node {
                tree: 0,
                node: case,
            },
        };
        let pieces = decompose_intervals(&rule);
        assert_eq!(pieces.len(), 1 << two_sided);
        assert!(pieces.iter().all(|piece| piece.region.is_canonical()));

        // walk the corner-adjacent grid
        let mut counters = vec![0usize; grid_axes.len()];
        loop {
            let mut x = vec![0.0; p];
            for (slot, (v, axis)) in grid_axes.iter().enumerate() {
                x[*v] = axis[counters[slot]];
            }
            let xv = Array1::from_vec(x);
            let direct = rule.eval(xv.view());
            let summed: f64 = pieces.iter().map(|piece| piece.eval(xv.view())).sum();
            assert!(
                (direct - summed).abs() <= 1e-15,
                "case {case}: {direct} vs {summed} at {xv:?}"
            );
            let mut slot = 0;
            loop {
                if slot == grid_axes.len() {
                    break;
                }
                counters[slot] += 1;
                if counters[slot] < grid_axes[slot].1.len() {
                    break;
                }
                counters[slot] = 0;
                slot += 1;
            }
            if slot == grid_axes.len() {
                break;
            }
        }
    }
    println!(
        "criterion 10 interval-decomposition: PASS (1000 random boxes, pointwise exact to 1e-15)"
    );
}
