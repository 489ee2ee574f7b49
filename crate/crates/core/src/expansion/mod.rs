//! Orbits of `T_0(y) = beta y` and `T_1(y) = beta y - 1`, n-prefixes and
//! best level-n approximations.

mod context;
mod digits;
mod mingap;
mod orbit;
mod table;

pub use context::{BetaContext, DEFAULT_NODE_BUDGET, DEFAULT_TAIL_DEPTH};
pub use digits::DigitString;
pub use mingap::{min_gap, min_gaps_in_range, LevelGap};
pub use orbit::{
    count_prefixes, enumerate_prefixes, extremal_expansion, is_prefix, orbit_step, unique_to_depth, ExtremalMode,
    PrefixCheck, PrefixEntry, PrefixSet, UniquenessVerdict,
};
pub use table::LevelSumTable;
