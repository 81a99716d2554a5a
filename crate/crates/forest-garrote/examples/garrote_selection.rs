//! The full pipeline: fit a forest, group its rules, and run the
//! parameter-free garrote selection. Shows the sparsity and the training-loss
//! dominance over the forest.
//!
//! ```text
//! cargo run --release --example garrote_selection
//! ```

use forest_garrote::data::{friedman1, split, SplitSpec};
use forest_garrote::forest::{fit_forest, ForestParams};
use forest_garrote::garrote::{build_design, predict_garrote, solve_garrote};
use forest_garrote::ruleset::build_groups;

fn main() -> forest_garrote::Result<()> {
    let data = friedman1(300, 1.0, 5, 21)?;
    let (train, test) = split(
        &data,
        &SplitSpec {
            seed: 2,
            train_fraction: 0.5,
        },
    )?;

    let params = ForestParams {
        num_trees: 150,
        mtry: train.p(),
        min_node_size: train.n() / 8,
        seed: 5,
        bootstrap: true,
    };
    let forest = fit_forest(&train, &params)?;
    let (groups, _) = build_groups(&forest)?;
    let design = build_design(&groups, &train.x)?;
    println!("{} active groups feed the selection", design.group_count());

    let (model, path) = solve_garrote(&design, train.y.view(), 1.0)?;
    println!(
        "kept {} of {} groups, budget used {:.3} of lambda=1, {} path breakpoints",
        model.gamma.len(),
        model.group_count,
        model.budget_used,
        path.breakpoints.len()
    );
    println!(
        "selected variables: {:?}",
        model.selected_variables(&train.columns)
    );
    println!(
        "variables in the forest: {:?}",
        forest.used_original_variables()
    );

    let mut rf_sse = 0.0;
    for i in 0..train.n() {
        let e = train.y[i] - forest.predict(train.x.row(i))?;
        rf_sse += e * e;
    }
    println!(
        "training SSE: forest {rf_sse:.2}, garrote {:.2} (never higher)",
        model.training_sse
    );

    let mean = test.y.iter().sum::<f64>() / test.n() as f64;
    let (mut rf_test, mut fg_test, mut tss) = (0.0, 0.0, 0.0);
    for i in 0..test.n() {
        let x = test.x.row(i);
        let rf = forest.predict(x)?;
        let fg = predict_garrote(&model, &groups, x)?;
        rf_test += (test.y[i] - rf) * (test.y[i] - rf);
        fg_test += (test.y[i] - fg) * (test.y[i] - fg);
        tss += (test.y[i] - mean) * (test.y[i] - mean);
    }
    println!(
        "test unexplained variance: forest {:.3}, garrote {:.3}",
        rf_test / tss,
        fg_test / tss
    );

    // the strongest kept groups
    let mut kept: Vec<_> = model.gamma.iter().collect();
    kept.sort_by(|a, b| b.1.partial_cmp(a.1).unwrap());
    println!("largest multipliers:");
    for (pattern, gamma) in kept.iter().take(5) {
        println!("  gamma = {gamma:.3} on {pattern}");
    }
    Ok(())
}
