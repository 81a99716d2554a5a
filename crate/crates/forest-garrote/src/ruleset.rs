//! Exact decomposition of a fitted forest into weighted rules, interaction
//! patterns and per-pattern group fits.
//!
//! Every node of every tree contributes one rule: the indicator of the box of
//! split conditions on the root-to-node path, weighted by the change in
//! conditional mean from the parent to the node (scaled by 1/num_trees). The
//! sum of all rules reproduces the averaged forest prediction pointwise.
//! Rules are then put into canonical one-sided form and grouped by their
//! interaction pattern: the per-variable monotone direction of the
//! contribution.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use ndarray::ArrayView1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forest::Forest;
use crate::numeric::NeumaierSum;

/// Which side of a threshold a rule condition keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// `x[var] >= threshold`
    Ge,
    /// `x[var] < threshold`
    Lt,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub var: usize,
    pub side: Side,
    pub threshold: f64,
}

/// An axis-aligned box given by per-variable one-sided bounds.
///
/// Pre-decomposition a variable may carry both a lower and an upper bound; in
/// canonical form every variable appears on at most one side.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(into = "Vec<Condition>", try_from = "Vec<Condition>")]
pub struct RuleBox {
    lower: BTreeMap<usize, f64>,
    upper: BTreeMap<usize, f64>,
}

impl RuleBox {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn lower(&self) -> &BTreeMap<usize, f64> {
        &self.lower
    }

    pub fn upper(&self) -> &BTreeMap<usize, f64> {
        &self.upper
    }

    /// Keep the tightest bound when the same side of the same variable is
    /// constrained repeatedly along a path.
    pub fn tighten(&mut self, cond: Condition) {
        match cond.side {
            Side::Ge => {
                let e = self.lower.entry(cond.var).or_insert(f64::NEG_INFINITY);
                *e = e.max(cond.threshold);
            }
            Side::Lt => {
                let e = self.upper.entry(cond.var).or_insert(f64::INFINITY);
                *e = e.min(cond.threshold);
            }
        }
    }

    pub fn contains(&self, x: ArrayView1<f64>) -> bool {
        self.lower.iter().all(|(&k, &v)| x[k] >= v) && self.upper.iter().all(|(&k, &v)| x[k] < v)
    }

    pub fn is_unconstrained(&self) -> bool {
        self.lower.is_empty() && self.upper.is_empty()
    }

    /// Variables bounded on both sides (must be decomposed before grouping).
    pub fn two_sided_vars(&self) -> Vec<usize> {
        self.lower
            .keys()
            .filter(|k| self.upper.contains_key(k))
            .copied()
            .collect()
    }

    pub fn is_canonical(&self) -> bool {
        self.two_sided_vars().is_empty()
    }

    pub fn constrained_vars(&self) -> BTreeSet<usize> {
        self.lower
            .keys()
            .chain(self.upper.keys())
            .copied()
            .collect()
    }
}

impl From<RuleBox> for Vec<Condition> {
    fn from(b: RuleBox) -> Self {
        let mut conds: Vec<Condition> = b
            .lower
            .iter()
            .map(|(&var, &threshold)| Condition {
                var,
                side: Side::Ge,
                threshold,
            })
            .chain(b.upper.iter().map(|(&var, &threshold)| Condition {
                var,
                side: Side::Lt,
                threshold,
            }))
            .collect();
        conds.sort_by_key(|c| (c.var, matches!(c.side, Side::Lt)));
        conds
    }
}

impl TryFrom<Vec<Condition>> for RuleBox {
    type Error = String;

    fn try_from(conds: Vec<Condition>) -> std::result::Result<Self, String> {
        let mut b = RuleBox::empty();
        for c in conds {
            match c.side {
                Side::Ge if b.lower.contains_key(&c.var) => {
                    return Err(format!("duplicate lower bound on variable {}", c.var))
                }
                Side::Lt if b.upper.contains_key(&c.var) => {
                    return Err(format!("duplicate upper bound on variable {}", c.var))
                }
                _ => b.tighten(c),
            }
        }
        Ok(b)
    }
}

/// Where a rule came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleOrigin {
    Node {
        tree: usize,
        node: usize,
    },
    /// Produced by interval decomposition of a two-sided node rule.
    Decomposed {
        tree: usize,
        node: usize,
        piece: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedRule {
    #[serde(rename = "vars")]
    pub region: RuleBox,
    pub beta: f64,
    pub origin: RuleOrigin,
}

impl WeightedRule {
    /// `beta * 1{x in box}`
    pub fn eval(&self, x: ArrayView1<f64>) -> f64 {
        if self.region.contains(x) {
            self.beta
        } else {
            0.0
        }
    }
}

/// Sign vector over variables classifying a rule's monotone direction.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct InteractionPattern {
    pub signs: Vec<i8>,
}

impl InteractionPattern {
    pub fn zero(p: usize) -> Self {
        InteractionPattern { signs: vec![0; p] }
    }

    pub fn degree(&self) -> usize {
        self.signs.iter().filter(|&&s| s != 0).count()
    }

    pub fn is_intercept(&self) -> bool {
        self.degree() == 0
    }

    /// Indices of variables involved in the pattern.
    pub fn involved(&self) -> Vec<usize> {
        self.signs
            .iter()
            .enumerate()
            .filter_map(|(k, &s)| (s != 0).then_some(k))
            .collect()
    }
}

impl fmt::Display for InteractionPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, s) in self.signs.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(
                f,
                "{}",
                match s.cmp(&0) {
                    std::cmp::Ordering::Greater => "+",
                    std::cmp::Ordering::Less => "-",
                    std::cmp::Ordering::Equal => "0",
                }
            )?;
        }
        write!(f, ")")
    }
}

/// All rules sharing one interaction pattern; evaluates to the group fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupFit {
    pub pattern: InteractionPattern,
    pub rules: Vec<WeightedRule>,
}

impl GroupFit {
    /// Total absolute rule mass of the group.
    pub fn l1_mass(&self) -> f64 {
        self.rules.iter().map(|r| r.beta.abs()).sum()
    }
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct ExtractStats {
    pub rules_kept: usize,
    /// Nodes with no original-sample observations: beta undefined, dropped.
    pub dropped_empty: usize,
    /// Nodes whose conditional mean equals the parent's: beta exactly zero.
    pub dropped_zero: usize,
}

/// Extract one weighted rule per node per tree: the incremental change in
/// conditional mean from the parent to the node, computed over the original
/// training observations and scaled by 1/num_trees. Boxes collapse repeated
/// same-side conditions to the tightest bound and may still be two-sided;
/// see [`decompose_intervals`].
pub fn extract_rules(forest: &Forest) -> (Vec<WeightedRule>, ExtractStats) {
    let num_trees = forest.trees.len() as f64;
    let mut rules = Vec::new();
    let mut stats = ExtractStats::default();

    for (t, tree) in forest.trees.iter().enumerate() {
        // DFS from the root carrying the path box.
        let mut stack: Vec<(usize, RuleBox)> = vec![(0, RuleBox::empty())];
        while let Some((id, region)) = stack.pop() {
            let node = &tree.nodes[id];
            if node.n_train == 0 {
                stats.dropped_empty += 1;
            } else {
                let beta = match node.parent {
                    None => node.train_mean / num_trees,
                    Some(p) => (node.train_mean - tree.nodes[p].train_mean) / num_trees,
                };
                if beta == 0.0 {
                    stats.dropped_zero += 1;
                } else {
                    stats.rules_kept += 1;
                    rules.push(WeightedRule {
                        region: region.clone(),
                        beta,
                        origin: RuleOrigin::Node { tree: t, node: id },
                    });
                }
            }
            if let Some((l, r)) = node.children {
                let split = node.split.unwrap();
                let mut left = region.clone();
                left.tighten(Condition {
                    var: split.var,
                    side: Side::Lt,
                    threshold: split.threshold,
                });
                let mut right = region;
                right.tighten(Condition {
                    var: split.var,
                    side: Side::Ge,
                    threshold: split.threshold,
                });
                stack.push((r, right));
                stack.push((l, left));
            }
        }
    }
    (rules, stats)
}

/// Rewrite a rule so that every variable is bounded on at most one side,
/// preserving the weighted indicator pointwise:
/// `b*1{a <= x < u, C} = b*1{x >= a, C} + (-b)*1{x >= u, C}`.
/// A rule with m two-sided variables expands to 2^m rules.
pub fn decompose_intervals(rule: &WeightedRule) -> Vec<WeightedRule> {
    let two_sided = rule.region.two_sided_vars();
    if two_sided.is_empty() {
        return vec![rule.clone()];
    }
    let (tree, node) = match rule.origin {
        RuleOrigin::Node { tree, node } | RuleOrigin::Decomposed { tree, node, .. } => (tree, node),
    };
    let mut pieces = vec![rule.clone()];
    for var in two_sided {
        let mut next = Vec::with_capacity(pieces.len() * 2);
        for piece in pieces {
            let a = piece.region.lower[&var];
            let b = piece.region.upper[&var];
            let mut keep = piece.region.clone();
            keep.upper.remove(&var);
            let mut cancel = keep.clone();
            cancel.lower.insert(var, b);
            debug_assert!(a < b);
            next.push(WeightedRule {
                region: keep,
                beta: piece.beta,
                origin: piece.origin,
            });
            next.push(WeightedRule {
                region: cancel,
                beta: -piece.beta,
                origin: piece.origin,
            });
        }
        pieces = next;
    }
    for (i, piece) in pieces.iter_mut().enumerate() {
        piece.origin = RuleOrigin::Decomposed {
            tree,
            node,
            piece: i,
        };
    }
    pieces
}

/// Interaction pattern of a canonical rule (closed form equivalent to the
/// sup/inf definition for one-sided boxes): the contribution `beta * R` is
/// monotone nondecreasing in a lower-bounded variable when `beta > 0`, so
/// `sigma_k = sign(beta)` there, and `-sign(beta)` for an upper bound.
pub fn pattern_of(rule: &WeightedRule, p: usize) -> Result<InteractionPattern> {
    if rule.beta == 0.0 {
        return Err(Error::InvalidParameter(
            "pattern_of requires beta != 0".into(),
        ));
    }
    if let Some(&var) = rule.region.two_sided_vars().first() {
        return Err(Error::NonCanonicalRule(var));
    }
    let sign = if rule.beta > 0.0 { 1i8 } else { -1i8 };
    let mut signs = vec![0i8; p];
    for &k in rule.region.lower.keys() {
        signs[k] = sign;
    }
    for &k in rule.region.upper.keys() {
        signs[k] = -sign;
    }
    Ok(InteractionPattern { signs })
}

/// Partition canonical rules into group fits, one per active pattern, sorted
/// by (degree, lexicographic signs). The all-zero pattern collects the root
/// rules and is handled as the fixed intercept downstream.
pub fn group_rules(rules: &[WeightedRule], p: usize) -> Result<Vec<GroupFit>> {
    let mut map: BTreeMap<InteractionPattern, Vec<WeightedRule>> = BTreeMap::new();
    for rule in rules {
        if rule.beta == 0.0 {
            continue;
        }
        let pattern = pattern_of(rule, p)?;
        map.entry(pattern).or_default().push(rule.clone());
    }
    let mut groups: Vec<GroupFit> = map
        .into_iter()
        .map(|(pattern, rules)| GroupFit { pattern, rules })
        .collect();
    groups.sort_by(|a, b| {
        a.pattern
            .degree()
            .cmp(&b.pattern.degree())
            .then_with(|| a.pattern.signs.cmp(&b.pattern.signs))
    });
    Ok(groups)
}

/// `T_sigma(x)`: compensated sum of the group's weighted indicators.
pub fn eval_group(group: &GroupFit, x: ArrayView1<f64>) -> Result<f64> {
    if x.len() != group.pattern.signs.len() {
        return Err(Error::DimensionMismatch {
            expected: group.pattern.signs.len(),
            got: x.len(),
        });
    }
    let mut acc = NeumaierSum::new();
    for rule in &group.rules {
        acc.add(rule.eval(x));
    }
    Ok(acc.total())
}

/// Sum of all group fits at `x` (equals the forest prediction).
pub fn eval_all_groups(groups: &[GroupFit], x: ArrayView1<f64>) -> Result<f64> {
    let mut acc = NeumaierSum::new();
    for g in groups {
        acc.add(eval_group(g, x)?);
    }
    Ok(acc.total())
}

/// Full decomposition pipeline: extract node rules, put them in canonical
/// one-sided form, group by pattern.
pub fn build_groups(forest: &Forest) -> Result<(Vec<GroupFit>, ExtractStats)> {
    let (raw, stats) = extract_rules(forest);
    let canonical: Vec<WeightedRule> = raw.iter().flat_map(decompose_intervals).collect();
    let groups = group_rules(&canonical, forest.p())?;
    Ok((groups, stats))
}
