//! Desk-scale benchmark: split each dataset in half, tune mtry out-of-bag,
//! then compare the forest, the garrote (default and cross-validated), and
//! the rule-lasso baseline on the test half.
//!
//! Uses whatever datasets are present in the cache (`data/` or
//! `FOREST_GARROTE_DATA`) plus the generated Friedman data; fetch more with
//! `forest-garrote bench fetch`.
//!
//! ```text
//! cargo run --release --example benchmark
//! ```

use forest_garrote::bench::{self, emit_report, BenchParams, ReportFormat};

fn main() -> forest_garrote::Result<()> {
    let cache = bench::default_cache_dir();
    let mut names = vec!["friedman".to_string()];
    for spec in bench::roster() {
        if spec.name != "friedman" && bench::available(spec.name, &cache) {
            names.push(spec.name.to_string());
        }
    }
    println!("datasets: {names:?} (cache: {})", cache.display());

    let params = BenchParams {
        trees: 100,
        min_node_size: 5,
        min_node_fraction: Some(0.125),
        folds: 10,
        tune_mtry: true,
    };
    let report = bench::run_bench(&names, &[1, 2, 3], &params, &cache)?;
    for (name, err) in &report.failures {
        eprintln!("warning: {name}: {err}");
    }
    emit_report(
        &report,
        ReportFormat::Markdown,
        &mut std::io::stdout().lock(),
    )?;
    Ok(())
}
