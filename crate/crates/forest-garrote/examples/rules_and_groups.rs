//! Decompose a fitted forest into weighted rules and interaction-pattern
//! groups, and verify the decomposition reproduces the forest exactly.
//!
//! ```text
//! cargo run --release --example rules_and_groups
//! ```

use forest_garrote::data::friedman1;
use forest_garrote::forest::{fit_forest, ForestParams};
use forest_garrote::ruleset::{build_groups, eval_all_groups, extract_rules};

fn main() -> forest_garrote::Result<()> {
    let data = friedman1(300, 1.0, 5, 3)?;
    let params = ForestParams {
        num_trees: 100,
        mtry: data.p(),
        min_node_size: 20,
        seed: 11,
        bootstrap: true,
    };
    let forest = fit_forest(&data, &params)?;

    let (raw_rules, stats) = extract_rules(&forest);
    println!(
        "extracted {} node rules ({} empty nodes dropped, {} zero-beta dropped)",
        raw_rules.len(),
        stats.dropped_empty,
        stats.dropped_zero
    );

    let (groups, _) = build_groups(&forest)?;
    println!("{} active interaction patterns", groups.len());
    let mut by_degree = std::collections::BTreeMap::new();
    for g in &groups {
        *by_degree.entry(g.pattern.degree()).or_insert(0usize) += 1;
    }
    println!("pattern count by degree: {by_degree:?}");

    // the strongest few groups by total rule mass
    let mut ranked: Vec<_> = groups.iter().map(|g| (g.l1_mass(), g)).collect();
    ranked.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    println!("heaviest groups:");
    for (mass, g) in ranked.iter().take(6) {
        println!(
            "  {}  rules={:3}  l1 mass={:.3}",
            g.pattern,
            g.rules.len(),
            mass
        );
    }

    // the group sums reproduce the forest prediction pointwise
    let mut max_dev: f64 = 0.0;
    for i in 0..data.n() {
        let from_groups = eval_all_groups(&groups, data.x.row(i))?;
        let from_forest = forest.predict(data.x.row(i))?;
        max_dev = max_dev.max((from_groups - from_forest).abs());
    }
    println!("max |group sum - forest| over training rows: {max_dev:.2e}");
    Ok(())
}
