//! Slope structures on metric graphs: allowed slopes per oriented edge and
//! rank functions at vertices, compatibility of rational functions, and the
//! rank condition for crude linear series checked on a grid.

mod compat;
mod enumerate;
mod rankcheck;
mod search;
mod structure;

pub use compat::{check_compatible, in_rat_d_s, index_vector, is_compatible, satisfies_rank_condition, Incompatibility};
pub use enumerate::{default_cap, enumerate_slope_structures, slope_lists, EnumerationConfig};
pub use rankcheck::{
    check_divisors, crude_rank_check, effective_divisors, RankVerdict, RowOutcome, VerdictRow, VerdictStatus,
};
pub use search::{default_denominator, search_witness, Grid, SearchLimits, SearchOutcome};
pub use structure::{permute_axes, NonIncreasingViolation, SlopeError, SlopeStructure};
