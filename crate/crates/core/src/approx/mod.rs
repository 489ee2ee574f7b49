//! Approximation functions and the search for psi-good level sums.

mod construct;
mod hits;
mod psi;

pub use construct::{construct_expansion, ExpansionResult, Milestone};
pub use hits::{hit_depths, scan_csv, scan_levels, HitMode, HitRecord, LevelScan};
pub use psi::{
    decay_constant, divergence_partial_sum, psi_eval, PartialSum, PsiFamily, PsiSpec, PsiTransform, SeriesBehaviour,
};
