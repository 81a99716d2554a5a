//! Fit a random-forest regressor, decompose it exactly into weighted rules,
//! group the rules into functional interaction patterns, and run a
//! tuning-free nonnegative-garrote selection over the groups to get a sparse,
//! interpretable predictor whose training loss never exceeds the forest's.
//!
//! The pipeline has four steps:
//!
//! 1. fit a random forest ([`forest::fit_forest`], mtry tuned out-of-bag);
//! 2. extract one weighted rule per tree node and group rules by interaction
//!    pattern ([`ruleset::build_groups`]);
//! 3. solve the nonnegative garrote over the group fits with the
//!    parameter-free budget of 1 ([`garrote::solve_garrote`]);
//! 4. predict with the reweighted groups ([`garrote::predict_garrote`]).
//!
//! See the crate examples for runnable walkthroughs of each capability, and
//! [`ruleens`] for the rule-by-rule lasso baseline the grouping is compared
//! against.

pub mod artifact;
pub mod bench;
pub mod cli;
pub mod data;
pub mod effects;
pub mod error;
pub mod forest;
pub mod garrote;
pub mod numeric;
pub mod rng;
pub mod ruleens;
pub mod ruleset;

pub use error::{Error, Result};
