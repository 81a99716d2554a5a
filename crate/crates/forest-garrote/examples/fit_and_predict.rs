//! Fit a random forest on synthetic data, tune mtry out-of-bag, and predict.
//!
//! ```text
//! cargo run --release --example fit_and_predict
//! ```

use forest_garrote::data::{friedman1, split, SplitSpec};
use forest_garrote::forest::{
    default_mtry_candidates, fit_forest, oob_error, tune_mtry, ForestParams,
};

fn main() -> forest_garrote::Result<()> {
    let data = friedman1(400, 1.0, 5, 42)?;
    let (train, test) = split(
        &data,
        &SplitSpec {
            seed: 1,
            train_fraction: 0.5,
        },
    )?;
    println!(
        "train: {} rows, test: {} rows, {} predictors",
        train.n(),
        test.n(),
        train.p()
    );

    let mut params = ForestParams {
        num_trees: 200,
        mtry: 1,
        min_node_size: 5,
        seed: 7,
        bootstrap: true,
    };
    let candidates = default_mtry_candidates(train.p());
    params.mtry = tune_mtry(&train, &candidates, &params)?;
    println!(
        "mtry candidates {candidates:?} -> tuned mtry = {}",
        params.mtry
    );

    let forest = fit_forest(&train, &params)?;
    println!(
        "fitted {} trees, max depth {}, out-of-bag MSE {:.3}",
        forest.trees.len(),
        forest.max_depth(),
        oob_error(&forest, &train)?
    );

    let mut sse = 0.0;
    let mut tss = 0.0;
    let mean = test.y.iter().sum::<f64>() / test.n() as f64;
    for i in 0..test.n() {
        let pred = forest.predict(test.x.row(i))?;
        sse += (test.y[i] - pred) * (test.y[i] - pred);
        tss += (test.y[i] - mean) * (test.y[i] - mean);
    }
    println!("test unexplained variance: {:.3}", sse / tss);
    println!(
        "variables used by the forest: {:?}",
        forest.used_original_variables()
    );
    Ok(())
}
