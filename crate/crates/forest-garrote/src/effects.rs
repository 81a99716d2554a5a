//! Plot-ready main-effect step functions and second-degree interaction
//! surfaces for forest and garrote fits.
//!
//! Nothing is rendered here: curves and surfaces are exact piecewise-constant
//! data exported as long-form CSV plus a JSON manifest, so any plotting tool
//! can draw them. Degree >= 3 groups are summarized in the manifest only.

use std::collections::BTreeSet;
use std::fmt;
use std::io::Write;
use std::path::Path;

use ndarray::Array1;
use serde::{Deserialize, Serialize};

use crate::data::ColumnInfo;
use crate::error::{Error, Result};
use crate::garrote::GarroteModel;
use crate::numeric::NeumaierSum;
use crate::ruleset::{eval_group, GroupFit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Forest,
    Garrote,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::Forest => "forest",
            Source::Garrote => "garrote",
        })
    }
}

/// Which monotone component of a main effect is requested.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurvePart {
    Increasing,
    Decreasing,
    Combined,
}

impl fmt::Display for CurvePart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CurvePart::Increasing => "+",
            CurvePart::Decreasing => "-",
            CurvePart::Combined => "combined",
        })
    }
}

/// One of the four second-degree sign categories, or their sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurfacePart {
    Category(i8, i8),
    Combined,
}

impl fmt::Display for SurfacePart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SurfacePart::Category(a, b) => {
                let s = |v: i8| if v > 0 { "+" } else { "-" };
                write!(f, "({},{})", s(*a), s(*b))
            }
            SurfacePart::Combined => f.write_str("combined"),
        }
    }
}

/// Exact piecewise-constant main-effect function of one variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectCurve {
    pub variable: usize,
    /// Sorted thresholds; values has one more entry than breakpoints.
    pub breakpoints: Vec<f64>,
    pub values: Vec<f64>,
    pub source: Source,
    pub part: CurvePart,
}

impl EffectCurve {
    pub fn eval(&self, x: f64) -> f64 {
        let idx = self.breakpoints.partition_point(|&b| b <= x);
        self.values[idx]
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }
}

/// Exact piecewise-constant interaction surface over a pair of variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectSurface {
    pub variables: (usize, usize),
    pub x_breakpoints: Vec<f64>,
    pub y_breakpoints: Vec<f64>,
    /// `values[i][j]` is the constant on x-segment i, y-segment j.
    pub values: Vec<Vec<f64>>,
    pub source: Source,
    pub part: SurfacePart,
}

impl EffectSurface {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let i = self.x_breakpoints.partition_point(|&b| b <= x);
        let j = self.y_breakpoints.partition_point(|&b| b <= y);
        self.values[i][j]
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().flatten().all(|&v| v == 0.0)
    }
}

fn gamma_of(model: Option<&GarroteModel>, group: &GroupFit) -> f64 {
    match model {
        None => 1.0,
        Some(m) => m.gamma.get(&group.pattern).copied().unwrap_or(0.0),
    }
}

fn thresholds_on(groups: &[&GroupFit], var: usize) -> Vec<f64> {
    let mut seen: BTreeSet<u64> = BTreeSet::new();
    let mut out = Vec::new();
    for g in groups {
        for rule in &g.rules {
            for (&k, &v) in rule.region.lower().iter().chain(rule.region.upper().iter()) {
                if k == var && seen.insert(v.to_bits()) {
                    out.push(v);
                }
            }
        }
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out
}

/// Representative probe coordinate for each segment: the left edge for
/// segments that have one (rules switch exactly at their thresholds), and
/// anything strictly below the first breakpoint for the leftmost segment.
fn segment_probes(breakpoints: &[f64]) -> Vec<f64> {
    let mut probes = Vec::with_capacity(breakpoints.len() + 1);
    probes.push(breakpoints.first().map_or(0.0, |b| b - 1.0));
    probes.extend_from_slice(breakpoints);
    probes
}

fn p_of(groups: &[GroupFit]) -> usize {
    groups.first().map_or(0, |g| g.pattern.signs.len())
}

/// Main effect of variable `k`: the degree-1 groups with `sigma_k = +1` and
/// `sigma_k = -1` combined, scaled by gamma when a garrote model is given.
/// Returns the zero curve when no degree-1 group touches `k`.
pub fn main_effect(
    groups: &[GroupFit],
    model: Option<&GarroteModel>,
    k: usize,
) -> Result<EffectCurve> {
    main_effect_part(groups, model, k, CurvePart::Combined)
}

pub fn main_effect_part(
    groups: &[GroupFit],
    model: Option<&GarroteModel>,
    k: usize,
    part: CurvePart,
) -> Result<EffectCurve> {
    let p = p_of(groups);
    if k >= p {
        return Err(Error::DimensionMismatch {
            expected: p,
            got: k,
        });
    }
    let source = if model.is_some() {
        Source::Garrote
    } else {
        Source::Forest
    };
    let wanted: Vec<&GroupFit> = groups
        .iter()
        .filter(|g| {
            g.pattern.degree() == 1
                && g.pattern.signs[k] != 0
                && match part {
                    CurvePart::Increasing => g.pattern.signs[k] > 0,
                    CurvePart::Decreasing => g.pattern.signs[k] < 0,
                    CurvePart::Combined => true,
                }
        })
        .collect();

    let breakpoints = thresholds_on(&wanted, k);
    let mut values = Vec::with_capacity(breakpoints.len() + 1);
    for probe in segment_probes(&breakpoints) {
        let mut x = Array1::zeros(p);
        x[k] = probe;
        let mut acc = NeumaierSum::new();
        for g in &wanted {
            acc.add(gamma_of(model, g) * eval_group(g, x.view())?);
        }
        values.push(acc.total());
    }
    if values.is_empty() {
        values.push(0.0);
    }
    Ok(EffectCurve {
        variable: k,
        breakpoints,
        values,
        source,
        part,
    })
}

/// Second-degree interaction surface of variables `k` and `l` for one sign
/// category or the combined sum of all four. Returns the zero surface when no
/// matching group exists.
pub fn interaction_surface(
    groups: &[GroupFit],
    model: Option<&GarroteModel>,
    k: usize,
    l: usize,
    part: SurfacePart,
) -> Result<EffectSurface> {
    let p = p_of(groups);
    if k >= p || l >= p {
        return Err(Error::DimensionMismatch {
            expected: p,
            got: k.max(l),
        });
    }
    if k == l {
        return Err(Error::InvalidParameter(
            "interaction surface needs two distinct variables".into(),
        ));
    }
    let source = if model.is_some() {
        Source::Garrote
    } else {
        Source::Forest
    };
    let wanted: Vec<&GroupFit> = groups
        .iter()
        .filter(|g| {
            g.pattern.degree() == 2
                && g.pattern.signs[k] != 0
                && g.pattern.signs[l] != 0
                && match part {
                    SurfacePart::Category(a, b) => {
                        g.pattern.signs[k] == a && g.pattern.signs[l] == b
                    }
                    SurfacePart::Combined => true,
                }
        })
        .collect();

    let x_breakpoints = thresholds_on(&wanted, k);
    let y_breakpoints = thresholds_on(&wanted, l);
    let x_probes = segment_probes(&x_breakpoints);
    let y_probes = segment_probes(&y_breakpoints);
    let mut values = vec![vec![0.0; y_probes.len()]; x_probes.len()];
    for (i, &xp) in x_probes.iter().enumerate() {
        for (j, &yp) in y_probes.iter().enumerate() {
            let mut x = Array1::zeros(p);
            x[k] = xp;
            x[l] = yp;
            let mut acc = NeumaierSum::new();
            for g in &wanted {
                acc.add(gamma_of(model, g) * eval_group(g, x.view())?);
            }
            values[i][j] = acc.total();
        }
    }
    Ok(EffectSurface {
        variables: (k, l),
        x_breakpoints,
        y_breakpoints,
        values,
        source,
        part,
    })
}

/// Aggregate manifest entry for groups of any degree.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupSummary {
    pub signs: String,
    pub degree: usize,
    pub rule_count: usize,
    pub l1_mass: f64,
    /// Garrote multiplier; 1 for the plain forest decomposition.
    pub gamma: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EffectsManifest {
    pub variables: Vec<String>,
    pub curves: usize,
    pub surfaces: usize,
    /// Degree >= 3 groups are not gridded, only summarized here.
    pub groups: Vec<GroupSummary>,
}

/// Which variable pairs to grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PairSelection {
    /// Every pair touched by some degree-2 group.
    All,
    One(usize, usize),
}

fn fmt_bound(v: f64) -> String {
    if v == f64::NEG_INFINITY {
        "-inf".to_string()
    } else if v == f64::INFINITY {
        "inf".to_string()
    } else {
        format!("{v}")
    }
}

fn curve_rows(out: &mut String, name: &str, curve: &EffectCurve) {
    let mut edges = vec![f64::NEG_INFINITY];
    edges.extend_from_slice(&curve.breakpoints);
    edges.push(f64::INFINITY);
    for (i, v) in curve.values.iter().enumerate() {
        out.push_str(&format!(
            "curve,{},{},{},{},{},,,,{}\n",
            curve.source,
            curve.part,
            name,
            fmt_bound(edges[i]),
            fmt_bound(edges[i + 1]),
            v
        ));
    }
}

fn surface_rows(out: &mut String, name_x: &str, name_y: &str, s: &EffectSurface) {
    let mut xe = vec![f64::NEG_INFINITY];
    xe.extend_from_slice(&s.x_breakpoints);
    xe.push(f64::INFINITY);
    let mut ye = vec![f64::NEG_INFINITY];
    ye.extend_from_slice(&s.y_breakpoints);
    ye.push(f64::INFINITY);
    for (i, row) in s.values.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            out.push_str(&format!(
                "surface,{},\"{}\",{name_x}:{name_y},{},{},{},{},{},{}\n",
                s.source,
                s.part,
                fmt_bound(xe[i]),
                fmt_bound(xe[i + 1]),
                fmt_bound(ye[j]),
                fmt_bound(ye[j + 1]),
                "",
                v
            ));
        }
    }
}

/// Write `effects.csv` (long form) and `manifest.json` under `out_dir`.
///
/// Forest-scale rows are always emitted; garrote-scaled rows are added when a
/// model is given. CSV columns:
/// `kind,source,part,variables,x_lo,x_hi,y_lo,y_hi,reserved,value`.
pub fn export_effects(
    out_dir: impl AsRef<Path>,
    groups: &[GroupFit],
    model: Option<&GarroteModel>,
    columns: &[ColumnInfo],
    pairs: &PairSelection,
) -> Result<EffectsManifest> {
    let out_dir = out_dir.as_ref();
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let p = p_of(groups);
    let name_of = |k: usize| -> String {
        columns
            .get(k)
            .map(|c| c.name.clone())
            .unwrap_or_else(|| format!("x{k}"))
    };

    let mut csv = String::from("kind,source,part,variables,x_lo,x_hi,y_lo,y_hi,reserved,value\n");
    let mut n_curves = 0usize;
    let mut n_surfaces = 0usize;

    let sources: Vec<Option<&GarroteModel>> = if model.is_some() {
        vec![None, model]
    } else {
        vec![None]
    };

    for source in &sources {
        for k in 0..p {
            for part in [
                CurvePart::Increasing,
                CurvePart::Decreasing,
                CurvePart::Combined,
            ] {
                let curve = main_effect_part(groups, *source, k, part)?;
                if part == CurvePart::Combined || !curve.is_zero() {
                    curve_rows(&mut csv, &name_of(k), &curve);
                    n_curves += 1;
                }
            }
        }
        let pair_list: Vec<(usize, usize)> = match pairs {
            PairSelection::One(k, l) => vec![(*k, *l)],
            PairSelection::All => {
                let mut set = BTreeSet::new();
                for g in groups {
                    if g.pattern.degree() == 2 {
                        let inv = g.pattern.involved();
                        set.insert((inv[0], inv[1]));
                    }
                }
                set.into_iter().collect()
            }
        };
        for (k, l) in pair_list {
            let mut parts = vec![SurfacePart::Combined];
            for a in [1i8, -1] {
                for b in [1i8, -1] {
                    parts.push(SurfacePart::Category(a, b));
                }
            }
            for part in parts {
                let surface = interaction_surface(groups, *source, k, l, part)?;
                if matches!(part, SurfacePart::Combined) || !surface.is_zero() {
                    surface_rows(&mut csv, &name_of(k), &name_of(l), &surface);
                    n_surfaces += 1;
                }
            }
        }
    }

    let summaries: Vec<GroupSummary> = groups
        .iter()
        .map(|g| GroupSummary {
            signs: g.pattern.to_string(),
            degree: g.pattern.degree(),
            rule_count: g.rules.len(),
            l1_mass: g.l1_mass(),
            gamma: gamma_of(model, g),
        })
        .collect();
    let manifest = EffectsManifest {
        variables: (0..p).map(name_of).collect(),
        curves: n_curves,
        surfaces: n_surfaces,
        groups: summaries,
    };

    let csv_path = out_dir.join("effects.csv");
    let mut f = std::fs::File::create(&csv_path).map_err(|e| Error::io(&csv_path, e))?;
    f.write_all(csv.as_bytes())
        .map_err(|e| Error::io(&csv_path, e))?;
    let manifest_path = out_dir.join("manifest.json");
    let mf = std::fs::File::create(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
    serde_json::to_writer_pretty(mf, &manifest)?;
    Ok(manifest)
}
