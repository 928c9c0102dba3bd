//! Linearizations: the checker, the exhaustive oracle, the vector-register
//! write linearization, the single-writer one, and the refuter.

pub mod check;
pub mod f_star;
pub mod f_vector;
pub mod oracle;
pub mod refute;

pub use check::{check_linearization, check_linearization_with, Violation};
pub use f_star::{check_f_star_claims, f_star};
pub use f_vector::{check_batch_invariants, f_vector, f_vector_batches, Batch, FVectorError, FVectorOutput};
pub use oracle::{
    check_linearizable, check_linearizable_with, enumerate_linearizations, linearize_with_write_prefix,
    oracle_accepts, OracleError, PendingWrites, DEFAULT_MAX_OPS, HARD_MAX_OPS,
};
pub use refute::{refute_wsl, RefuteError, RefuteOutcome};

use crate::types::{History, Linearization, OpId};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("writes of member {shorter} ({short_writes:?}) are not a prefix of those of member {longer} ({long_writes:?})")]
pub struct WslViolation {
    /// Index into the family of the prefix history.
    pub shorter: usize,
    pub longer: usize,
    /// Event count of the prefix history.
    pub prefix_len: usize,
    pub short_writes: Vec<OpId>,
    pub long_writes: Vec<OpId>,
}

/// Checks that whenever one member's history is a prefix of another's, its
/// write sequence is a prefix of the other's write sequence.
///
/// Each member is compared against its longest prefix in the family; the
/// remaining pairs follow by transitivity.
pub fn check_wsl_prefixes(family: &[(History, Linearization)]) -> Result<(), WslViolation> {
    let mut order: Vec<usize> = (0..family.len()).collect();
    order.sort_by_key(|&i| family[i].0.len());
    for (k, &hi) in order.iter().enumerate() {
        let parent = order[..k]
            .iter()
            .rev()
            .copied()
            .find(|&gi| family[gi].0.is_prefix_of(&family[hi].0));
        let Some(gi) = parent else { continue };
        let short = family[gi].1.writes();
        let long = family[hi].1.writes();
        if !long.starts_with(&short) {
            return Err(WslViolation {
                shorter: gi,
                longer: hi,
                prefix_len: family[gi].0.len(),
                short_writes: short,
                long_writes: long,
            });
        }
    }
    Ok(())
}

/// `h` truncated after every event count from 0 to `h.len()`.
pub fn event_prefixes(h: &History) -> Vec<History> {
    (0..=h.len()).map(|k| h.truncate_events(k)).collect()
}
