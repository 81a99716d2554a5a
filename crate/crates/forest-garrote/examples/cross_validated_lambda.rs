//! Compare the parameter-free budget (lambda = 1) against a cross-validated
//! lambda over (0, 2]. Cross-validation rarely helps and costs a lot more.
//!
//! ```text
//! cargo run --release --example cross_validated_lambda
//! ```

use std::time::Instant;

use forest_garrote::data::{friedman1, split, SplitSpec};
use forest_garrote::forest::{fit_forest, ForestParams};
use forest_garrote::garrote::{
    build_design, default_lambda_grid, predict_garrote, solve_garrote, solve_garrote_cv,
};
use forest_garrote::ruleset::build_groups;

fn main() -> forest_garrote::Result<()> {
    let data = friedman1(300, 1.0, 5, 8)?;
    let (train, test) = split(
        &data,
        &SplitSpec {
            seed: 3,
            train_fraction: 0.5,
        },
    )?;
    let params = ForestParams {
        num_trees: 150,
        mtry: train.p(),
        min_node_size: train.n() / 8,
        seed: 9,
        bootstrap: true,
    };
    let forest = fit_forest(&train, &params)?;
    let (groups, _) = build_groups(&forest)?;
    let design = build_design(&groups, &train.x)?;

    let t0 = Instant::now();
    let (default_model, _) = solve_garrote(&design, train.y.view(), 1.0)?;
    let default_time = t0.elapsed();

    let t1 = Instant::now();
    let cv_model = solve_garrote_cv(&design, train.y.view(), 10, &default_lambda_grid(), 3)?;
    let cv_time = t1.elapsed();

    println!(
        "default:  lambda = 1.0 fixed, {} groups kept, solve took {default_time:?}",
        default_model.gamma.len()
    );
    println!(
        "CV:       lambda = {} chosen from (0,2], {} groups kept, solve took {cv_time:?}",
        cv_model.lambda,
        cv_model.gamma.len()
    );

    let mean = test.y.iter().sum::<f64>() / test.n() as f64;
    let (mut d_sse, mut c_sse, mut tss) = (0.0, 0.0, 0.0);
    for i in 0..test.n() {
        let x = test.x.row(i);
        let d = predict_garrote(&default_model, &groups, x)?;
        let c = predict_garrote(&cv_model, &groups, x)?;
        d_sse += (test.y[i] - d) * (test.y[i] - d);
        c_sse += (test.y[i] - c) * (test.y[i] - c);
        tss += (test.y[i] - mean) * (test.y[i] - mean);
    }
    println!(
        "test unexplained variance: default {:.3}, CV {:.3}",
        d_sse / tss,
        c_sse / tss
    );
    Ok(())
}
