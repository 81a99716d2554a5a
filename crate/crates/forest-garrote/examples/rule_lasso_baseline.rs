//! The Rule Ensembles baseline: lasso over every individual rule indicator,
//! against the grouped garrote. The garrote solves a problem that is orders
//! of magnitude smaller.
//!
//! ```text
//! cargo run --release --example rule_lasso_baseline
//! ```

use std::time::Instant;

use forest_garrote::data::{friedman1, split, SplitSpec};
use forest_garrote::forest::{fit_forest, ForestParams};
use forest_garrote::garrote::{build_design, predict_garrote, solve_garrote};
use forest_garrote::ruleens::{predict_rule_lasso, solve_rule_lasso};
use forest_garrote::ruleset::build_groups;

fn main() -> forest_garrote::Result<()> {
    let data = friedman1(300, 1.0, 5, 17)?;
    let (train, test) = split(
        &data,
        &SplitSpec {
            seed: 4,
            train_fraction: 0.5,
        },
    )?;
    let params = ForestParams {
        num_trees: 150,
        mtry: train.p(),
        min_node_size: train.n() / 8,
        seed: 13,
        bootstrap: true,
    };
    let forest = fit_forest(&train, &params)?;
    let (groups, _) = build_groups(&forest)?;
    let rules: Vec<_> = groups
        .iter()
        .flat_map(|g| g.rules.iter().cloned())
        .collect();
    let design = build_design(&groups, &train.x)?;
    println!(
        "dictionary sizes: {} rules (lasso columns) vs {} groups (garrote columns)",
        rules.len(),
        design.group_count()
    );

    let t0 = Instant::now();
    let (garrote, _) = solve_garrote(&design, train.y.view(), 1.0)?;
    let garrote_time = t0.elapsed();

    let t1 = Instant::now();
    let lasso = solve_rule_lasso(&rules, &train.x, train.y.view(), None, 10, 13)?;
    let lasso_time = t1.elapsed();

    println!(
        "garrote solve: {garrote_time:?} ({} groups kept)",
        garrote.gamma.len()
    );
    println!(
        "rule-lasso solve (with 10-fold CV): {lasso_time:?} ({} rules kept at budget {:.3})",
        lasso.coefficients.len(),
        lasso.budget
    );

    let mean = test.y.iter().sum::<f64>() / test.n() as f64;
    let (mut g_sse, mut l_sse, mut tss) = (0.0, 0.0, 0.0);
    for i in 0..test.n() {
        let x = test.x.row(i);
        let g = predict_garrote(&garrote, &groups, x)?;
        let l = predict_rule_lasso(&lasso, &rules, x)?;
        g_sse += (test.y[i] - g) * (test.y[i] - g);
        l_sse += (test.y[i] - l) * (test.y[i] - l);
        tss += (test.y[i] - mean) * (test.y[i] - mean);
    }
    println!(
        "test unexplained variance: garrote {:.3}, rule lasso {:.3}",
        g_sse / tss,
        l_sse / tss
    );
    Ok(())
}
