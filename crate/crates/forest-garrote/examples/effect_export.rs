//! Export plot-ready main-effect curves and pairwise interaction surfaces
//! for a forest and its garrote selection.
//!
//! ```text
//! cargo run --release --example effect_export
//! ```

use forest_garrote::data::friedman1;
use forest_garrote::effects::{
    export_effects, interaction_surface, main_effect, PairSelection, SurfacePart,
};
use forest_garrote::forest::{fit_forest, ForestParams};
use forest_garrote::garrote::{build_design, solve_garrote};
use forest_garrote::ruleset::build_groups;

fn main() -> forest_garrote::Result<()> {
    let data = friedman1(400, 0.5, 2, 6)?;
    // a small mtry diversifies the shallow splits, giving every variable its
    // own degree-1 and degree-2 groups to look at
    let params = ForestParams {
        num_trees: 150,
        mtry: 2,
        min_node_size: 40,
        seed: 1,
        bootstrap: true,
    };
    let forest = fit_forest(&data, &params)?;
    let (groups, _) = build_groups(&forest)?;
    let design = build_design(&groups, &data.x)?;
    let (model, _) = solve_garrote(&design, data.y.view(), 1.0)?;

    // main effects per variable; the garrote zeroes some of them exactly
    println!("main-effect range (max - min over the curve):");
    let mut richest = 0usize;
    let mut richest_range = f64::MIN;
    for k in 0..5 {
        let fc = main_effect(&groups, None, k)?;
        let gc = main_effect(&groups, Some(&model), k)?;
        let range = |c: &forest_garrote::effects::EffectCurve| {
            let lo = c.values.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = c.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            hi - lo
        };
        let (fr, gr) = (range(&fc), range(&gc));
        println!(
            "  x{}: forest {fr:.3}, garrote {gr:.3}{}",
            k + 1,
            if gr == 0.0 { "  (zeroed exactly)" } else { "" }
        );
        if gr > richest_range {
            richest_range = gr;
            richest = k;
        }
    }

    let forest_curve = main_effect(&groups, None, richest)?;
    let garrote_curve = main_effect(&groups, Some(&model), richest)?;
    println!(
        "x{} main effect ({} segments):",
        richest + 1,
        forest_curve.values.len()
    );
    for x in [0.1, 0.3, 0.5, 0.7, 0.9] {
        println!(
            "  x={x:.1}: forest {:+.3}, garrote {:+.3}",
            forest_curve.eval(x),
            garrote_curve.eval(x)
        );
    }

    // the x1:x2 interaction drives the sin term; look at its combined surface
    let surface = interaction_surface(&groups, Some(&model), 0, 1, SurfacePart::Combined)?;
    println!(
        "x1:x2 interaction surface: {}x{} cells",
        surface.values.len(),
        surface.values.first().map_or(0, Vec::len)
    );
    println!(
        "  corners: ll {:+.3}, lr {:+.3}, ul {:+.3}, ur {:+.3}",
        surface.eval(0.05, 0.05),
        surface.eval(0.95, 0.05),
        surface.eval(0.05, 0.95),
        surface.eval(0.95, 0.95),
    );

    let out = std::env::temp_dir().join("forest-garrote-effects");
    let manifest = export_effects(
        &out,
        &groups,
        Some(&model),
        &data.columns,
        &PairSelection::All,
    )?;
    println!(
        "wrote {} curves and {} surfaces across {} groups to {}",
        manifest.curves,
        manifest.surfaces,
        manifest.groups.len(),
        out.display()
    );
    Ok(())
}
