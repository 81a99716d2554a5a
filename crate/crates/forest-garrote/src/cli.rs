//! Subcommand driver behind the thin `forest-garrote` binary.
//!
//! Pipeline stages exchange versioned JSON artifacts: `fit` writes a forest,
//! `rules` decomposes it, `select` fits the garrote, `predict` scores new
//! rows, and `run` chains the whole thing in one process. Diagnostics go to
//! stderr; artifacts go to files only.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use ndarray::Array2;

use crate::artifact::{self, GarroteFile, LassoFile, RulesFile};
use crate::bench::{self, BenchParams, ReportFormat};
use crate::data::{self, ColumnInfo, ColumnKind};
use crate::effects::{export_effects, PairSelection};
use crate::error::{Error, Result};
use crate::forest::{self, ForestParams};
use crate::garrote;
use crate::ruleens;
use crate::ruleset;

#[derive(Debug, Parser)]
#[command(
    name = "forest-garrote",
    version,
    about = "Random-forest rule decomposition with nonnegative-garrote group selection"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
struct ForestFlags {
    /// Number of trees.
    #[arg(long, default_value_t = 500)]
    trees: usize,
    /// Minimum samples per node ("min node size").
    #[arg(long = "min-node", default_value_t = 5)]
    min_node: usize,
    /// Split candidates per node: `auto` tunes by out-of-bag error.
    #[arg(long, default_value = "auto")]
    mtry: String,
    /// Master seed; all randomness derives from it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Clone, Args)]
struct SelectFlags {
    /// Normalized l1 budget for the garrote.
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    /// Choose lambda by cross-validation over (0,2] instead.
    #[arg(long)]
    cv: bool,
    /// Cross-validation folds.
    #[arg(long, default_value_t = 10)]
    folds: usize,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit a random forest and write a forest artifact.
    Fit {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        target: String,
        #[command(flatten)]
        forest: ForestFlags,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rule-set operations on a fitted forest.
    Rules {
        #[command(subcommand)]
        action: RulesAction,
    },
    /// Nonnegative-garrote selection over rule groups.
    Select {
        #[arg(long)]
        rules: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        target: String,
        #[command(flatten)]
        select: SelectFlags,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score new rows with a garrote or forest artifact.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Export plot-ready effect curves and interaction surfaces.
    Effects {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        rules: PathBuf,
        /// `all` or a `k,l` pair (column index or name).
        #[arg(long, default_value = "all")]
        pairs: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Comparison baselines.
    Baseline {
        #[command(subcommand)]
        action: BaselineAction,
    },
    /// Benchmark harness over the public dataset roster.
    Bench {
        #[command(subcommand)]
        action: Option<BenchAction>,
        /// `all` or a comma-separated list of roster names.
        #[arg(long, default_value = "all")]
        datasets: String,
        /// `a..b` (inclusive) or comma-separated seeds.
        #[arg(long, default_value = "1..5")]
        seeds: String,
        #[arg(long, default_value_t = 100)]
        trees: usize,
        #[arg(long = "min-node", default_value_t = 5)]
        min_node: usize,
        /// Scale min node size to this fraction of the training half
        /// (keeps the pattern count below n so the default budget binds).
        #[arg(long = "min-node-frac")]
        min_node_frac: Option<f64>,
        #[arg(long, default_value_t = 10)]
        folds: usize,
        /// Skip out-of-bag mtry tuning.
        #[arg(long)]
        no_tune: bool,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "csv")]
        format: String,
    },
    /// Synthetic data generators.
    Datagen {
        #[command(subcommand)]
        action: DatagenAction,
    },
    /// Fit, decompose and select in one process.
    Run {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        target: String,
        #[command(flatten)]
        forest: ForestFlags,
        #[command(flatten)]
        select: SelectFlags,
        #[arg(long)]
        out: PathBuf,
        /// Optionally write the intermediate forest artifact.
        #[arg(long)]
        forest_out: Option<PathBuf>,
        /// Optionally write the intermediate rules artifact.
        #[arg(long)]
        rules_out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
enum RulesAction {
    /// Decompose a forest into canonical weighted rules and pattern groups.
    Extract {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
enum BaselineAction {
    /// Lasso over individual rule indicators.
    RuleLasso {
        #[arg(long)]
        rules: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        target: String,
        /// Choose the budget by cross-validation (default when no --budget).
        #[arg(long)]
        cv: bool,
        /// Fixed l1 budget instead of cross-validation.
        #[arg(long)]
        budget: Option<f64>,
        #[arg(long, default_value_t = 10)]
        folds: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
enum BenchAction {
    /// Download and normalize roster datasets into the cache.
    Fetch {
        #[arg(long, default_value = "all")]
        datasets: String,
    },
}

#[derive(Debug, Subcommand)]
enum DatagenAction {
    /// Friedman #1: 5 relevant uniform predictors plus pure-noise columns.
    Friedman1 {
        #[arg(long, default_value_t = 300)]
        n: usize,
        #[arg(long = "noise-sd", default_value_t = 1.0)]
        noise_sd: f64,
        #[arg(long = "extra-noise", default_value_t = 5)]
        extra_noise: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

pub fn parse() -> std::result::Result<Cli, clap::Error> {
    Cli::try_parse()
}

fn resolve_mtry(mtry: &str, d: &data::Dataset, params: &ForestParams) -> Result<usize> {
    if mtry == "auto" {
        forest::tune_mtry(d, &forest::default_mtry_candidates(d.p()), params)
    } else {
        mtry.parse::<usize>().map_err(|_| {
            Error::InvalidParameter(format!("--mtry must be `auto` or a count, got `{mtry}`"))
        })
    }
}

fn fit_stage(
    data_path: &PathBuf,
    target: &str,
    flags: &ForestFlags,
) -> Result<(data::Dataset, forest::Forest)> {
    let d = data::load_csv(data_path, target)?;
    let mut params = ForestParams {
        num_trees: flags.trees,
        mtry: d.p().div_ceil(3).max(1),
        min_node_size: flags.min_node,
        seed: flags.seed,
        bootstrap: true,
    };
    params.mtry = resolve_mtry(&flags.mtry, &d, &params)?;
    let f = forest::fit_forest(&d, &params)?;
    eprintln!(
        "fitted forest: {} trees, mtry {}, {} columns, max depth {}",
        params.num_trees,
        params.mtry,
        d.p(),
        f.max_depth()
    );
    Ok((d, f))
}

fn rules_stage(f: &forest::Forest) -> Result<RulesFile> {
    let (groups, stats) = ruleset::build_groups(f)?;
    eprintln!(
        "extracted {} rules into {} groups ({} empty nodes dropped, {} zero-beta rules dropped)",
        stats.rules_kept,
        groups.len(),
        stats.dropped_empty,
        stats.dropped_zero
    );
    Ok(RulesFile::from_groups(&f.columns, &groups, stats))
}

fn check_columns_match(expected: &[ColumnInfo], got: &[ColumnInfo]) -> Result<()> {
    if expected != got {
        return Err(Error::InvalidData(
            "data columns do not match the columns the model was built on".into(),
        ));
    }
    Ok(())
}

fn select_stage(
    rules_file: &RulesFile,
    d: &data::Dataset,
    select: &SelectFlags,
    seed: u64,
) -> Result<GarroteFile> {
    check_columns_match(&rules_file.columns, &d.columns)?;
    let groups = rules_file.to_groups()?;
    let design = garrote::build_design(&groups, &d.x)?;
    if design.group_count() == 0 {
        eprintln!("warning: no active groups (constant forest); the model is intercept-only");
    }
    if design.duplicates_dropped > 0 {
        eprintln!(
            "warning: dropped {} duplicate design columns",
            design.duplicates_dropped
        );
    }
    let model = if select.cv {
        garrote::solve_garrote_cv(
            &design,
            d.y.view(),
            select.folds,
            &garrote::default_lambda_grid(),
            seed,
        )?
    } else {
        garrote::solve_garrote(&design, d.y.view(), select.lambda)?.0
    };
    eprintln!(
        "garrote: {} of {} groups kept, budget used {:.4} (lambda {}), {} variables selected",
        model.gamma.len(),
        model.group_count,
        model.budget_used,
        model.lambda,
        model.selected_variables(&d.columns).len()
    );
    Ok(GarroteFile::new(&model, &groups, &d.columns))
}

fn write_predictions(path: &PathBuf, preds: &[f64]) -> Result<()> {
    let mut out = String::from("prediction\n");
    for p in preds {
        out.push_str(&format!("{p}\n"));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

fn parse_seeds(spec: &str) -> Result<Vec<u64>> {
    if let Some((a, b)) = spec.split_once("..") {
        let lo: u64 = a
            .trim()
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("bad seed range `{spec}`")))?;
        let hi: u64 = b
            .trim()
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("bad seed range `{spec}`")))?;
        if hi < lo {
            return Err(Error::InvalidParameter(format!(
                "empty seed range `{spec}`"
            )));
        }
        return Ok((lo..=hi).collect());
    }
    spec.split(',')
        .map(|s| {
            s.trim()
                .parse::<u64>()
                .map_err(|_| Error::InvalidParameter(format!("bad seed `{s}`")))
        })
        .collect()
}

fn parse_pairs(spec: &str, columns: &[ColumnInfo]) -> Result<PairSelection> {
    if spec == "all" {
        return Ok(PairSelection::All);
    }
    let (a, b) = spec.split_once(',').ok_or_else(|| {
        Error::InvalidParameter(format!("--pairs expects `all` or `k,l`, got `{spec}`"))
    })?;
    let lookup = |token: &str| -> Result<usize> {
        let token = token.trim();
        if let Ok(idx) = token.parse::<usize>() {
            if idx < columns.len() {
                return Ok(idx);
            }
        }
        columns
            .iter()
            .position(|c| c.name == token)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown variable `{token}`")))
    };
    Ok(PairSelection::One(lookup(a)?, lookup(b)?))
}

fn resolve_datasets(spec: &str) -> Vec<String> {
    if spec == "all" {
        bench::roster().iter().map(|s| s.name.to_string()).collect()
    } else {
        spec.split(',')
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect()
    }
}

/// Execute a parsed command. I/O and data errors bubble up as `Err` (exit 2);
/// flag parsing has already succeeded by the time this runs.
pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Fit {
            data,
            target,
            forest: flags,
            out,
        } => {
            let (_, f) = fit_stage(&data, &target, &flags)?;
            artifact::save_forest(&out, &f)?;
            Ok(())
        }
        Command::Rules {
            action: RulesAction::Extract { model, out },
        } => {
            let f = artifact::load_forest(&model)?;
            let rules_file = rules_stage(&f)?;
            artifact::save_rules(&out, &rules_file)?;
            Ok(())
        }
        Command::Select {
            rules,
            data,
            target,
            select,
            seed,
            out,
        } => {
            let rules_file = artifact::load_rules(&rules)?;
            let d = data::load_csv(&data, &target)?;
            let garrote_file = select_stage(&rules_file, &d, &select, seed)?;
            artifact::save_garrote(&out, &garrote_file)?;
            Ok(())
        }
        Command::Predict { model, data, out } => {
            let kind = artifact::peek_kind(&model)?;
            let preds = match kind.as_str() {
                "garrote" => {
                    let file = artifact::load_garrote(&model)?;
                    let x = load_matrix_for(&data, &file.columns)?;
                    let m = file.model();
                    let groups = file.group_fits();
                    let mut preds = Vec::with_capacity(x.nrows());
                    for row in x.rows() {
                        preds.push(garrote::predict_garrote(&m, &groups, row)?);
                    }
                    preds
                }
                "forest" => {
                    let f = artifact::load_forest(&model)?;
                    let x = load_matrix_for(&data, &f.columns)?;
                    f.predict_rows(x.view())?.to_vec()
                }
                other => {
                    return Err(Error::ArtifactKind {
                        expected: "garrote|forest".into(),
                        found: other.into(),
                    })
                }
            };
            write_predictions(&out, &preds)
        }
        Command::Effects {
            model,
            rules,
            pairs,
            out,
        } => {
            let garrote_file = artifact::load_garrote(&model)?;
            let rules_file = artifact::load_rules(&rules)?;
            let groups = rules_file.to_groups()?;
            let m = garrote_file.model();
            let selection = parse_pairs(&pairs, &rules_file.columns)?;
            let manifest =
                export_effects(&out, &groups, Some(&m), &rules_file.columns, &selection)?;
            eprintln!(
                "wrote {} curves and {} surfaces over {} groups to {}",
                manifest.curves,
                manifest.surfaces,
                manifest.groups.len(),
                out.display()
            );
            Ok(())
        }
        Command::Baseline {
            action:
                BaselineAction::RuleLasso {
                    rules,
                    data,
                    target,
                    cv,
                    budget,
                    folds,
                    seed,
                    out,
                },
        } => {
            let rules_file = artifact::load_rules(&rules)?;
            let d = data::load_csv(&data, &target)?;
            check_columns_match(&rules_file.columns, &d.columns)?;
            let model = match (budget, cv) {
                (Some(b), false) => {
                    ruleens::solve_rule_lasso_at(&rules_file.rules, &d.x, d.y.view(), b)?
                }
                (Some(_), true) => {
                    return Err(Error::InvalidParameter(
                        "--budget and --cv are mutually exclusive".into(),
                    ))
                }
                (None, _) => ruleens::solve_rule_lasso(
                    &rules_file.rules,
                    &d.x,
                    d.y.view(),
                    None,
                    folds,
                    seed,
                )?,
            };
            eprintln!(
                "rule lasso: {} of {} rules kept at budget {:.4} ({} zero, {} duplicate columns dropped)",
                model.coefficients.len(),
                rules_file.rules.len(),
                model.budget,
                model.dropped_zero_columns,
                model.dropped_duplicate_columns
            );
            let file = LassoFile {
                model,
                rules: rules_file.rules,
                columns: rules_file.columns,
            };
            artifact::save_lasso(&out, &file)?;
            Ok(())
        }
        Command::Bench {
            action,
            datasets,
            seeds,
            trees,
            min_node,
            min_node_frac,
            folds,
            no_tune,
            out,
            format,
        } => {
            let cache = bench::default_cache_dir();
            if let Some(BenchAction::Fetch { datasets }) = action {
                for name in resolve_datasets(&datasets) {
                    match bench::fetch(&name, &cache) {
                        Ok(path) => eprintln!("{name}: {}", path.display()),
                        Err(e) => eprintln!("{name}: {e}"),
                    }
                }
                return Ok(());
            }
            let names = resolve_datasets(&datasets);
            let seeds = parse_seeds(&seeds)?;
            let params = BenchParams {
                trees,
                min_node_size: min_node,
                min_node_fraction: min_node_frac,
                folds,
                tune_mtry: !no_tune,
            };
            let report = bench::run_bench(&names, &seeds, &params, &cache)?;
            for (name, msg) in &report.failures {
                eprintln!("warning: {name}: {msg}");
            }
            let format: ReportFormat = format.parse()?;
            let file = std::fs::File::create(&out).map_err(|e| Error::io(&out, e))?;
            let mut writer = std::io::BufWriter::new(file);
            bench::emit_report(&report, format, &mut writer)?;
            eprintln!("wrote {} rows to {}", report.rows.len(), out.display());
            Ok(())
        }
        Command::Datagen {
            action:
                DatagenAction::Friedman1 {
                    n,
                    noise_sd,
                    extra_noise,
                    seed,
                    out,
                },
        } => {
            let d = data::friedman1(n, noise_sd, extra_noise, seed)?;
            data::write_csv(&d, &out, "y")
        }
        Command::Run {
            data,
            target,
            forest: flags,
            select,
            out,
            forest_out,
            rules_out,
        } => {
            let (d, f) = fit_stage(&data, &target, &flags)?;
            if let Some(path) = forest_out {
                artifact::save_forest(&path, &f)?;
            }
            let rules_file = rules_stage(&f)?;
            if let Some(path) = rules_out {
                artifact::save_rules(&path, &rules_file)?;
            }
            let garrote_file = select_stage(&rules_file, &d, &select, flags.seed)?;
            artifact::save_garrote(&out, &garrote_file)?;
            Ok(())
        }
    }
}

/// Build a prediction matrix for the model's columns from a CSV that may
/// carry extra columns (such as the target) in any order. Factor columns are
/// re-encoded against the training levels; unseen levels produce all-zero
/// dummies.
fn load_matrix_for(path: &PathBuf, columns: &[ColumnInfo]) -> Result<Array2<f64>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(file);
    let headers: Vec<String> = reader
        .headers()?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();

    enum Source {
        Numeric(usize),
        Level(usize, String),
    }
    let mut sources = Vec::with_capacity(columns.len());
    for col in columns {
        let source = match &col.kind {
            ColumnKind::Numeric => {
                let idx = headers.iter().position(|h| h == &col.name).ok_or_else(|| {
                    Error::InvalidData(format!("prediction data lacks column `{}`", col.name))
                })?;
                Source::Numeric(idx)
            }
            ColumnKind::Dummy { factor, level } => {
                let idx = headers.iter().position(|h| h == factor).ok_or_else(|| {
                    Error::InvalidData(format!("prediction data lacks factor column `{factor}`"))
                })?;
                Source::Level(idx, level.clone())
            }
        };
        sources.push(source);
    }

    let mut rows: Vec<Vec<f64>> = Vec::new();
    for record in reader.records() {
        let record = record?;
        let mut row = Vec::with_capacity(columns.len());
        for source in &sources {
            match source {
                Source::Numeric(idx) => {
                    let field = record.get(*idx).unwrap_or("").trim();
                    let v: f64 = field.parse().map_err(|_| {
                        Error::InvalidData(format!(
                            "non-numeric value `{field}` in prediction data"
                        ))
                    })?;
                    row.push(v);
                }
                Source::Level(idx, level) => {
                    let field = record.get(*idx).unwrap_or("").trim();
                    row.push(if field == level { 1.0 } else { 0.0 });
                }
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::InvalidData("empty prediction data".into()));
    }
    Ok(Array2::from_shape_fn(
        (rows.len(), columns.len()),
        |(i, j)| rows[i][j],
    ))
}
