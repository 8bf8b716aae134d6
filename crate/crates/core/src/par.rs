//! Deterministic chunked search over an index range.
//!
//! Chunks are evaluated in parallel and reduced by key, with ties going to
//! the smaller enumeration index, so the winner is the one a sequential scan
//! would have kept first regardless of thread count.

use std::ops::Range;

use rayon::prelude::*;

#[derive(Debug, Clone)]
pub(crate) struct Best<K> {
    pub key: K,
    pub index: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Goal {
    Max,
    Min,
}

impl Goal {
    /// Whether `candidate` strictly beats `incumbent` on key alone.
    pub fn beats<K: PartialOrd>(self, candidate: &K, incumbent: &K) -> bool {
        match self {
            Goal::Max => candidate > incumbent,
            Goal::Min => candidate < incumbent,
        }
    }

    fn pick<K: PartialOrd>(self, a: Option<Best<K>>, b: Option<Best<K>>) -> Option<Best<K>> {
        match (a, b) {
            (None, x) | (x, None) => x,
            (Some(a), Some(b)) => {
                let a_wins = if self.beats(&a.key, &b.key) {
                    true
                } else if self.beats(&b.key, &a.key) {
                    false
                } else {
                    a.index < b.index
                };
                Some(if a_wins { a } else { b })
            }
        }
    }
}

/// Splits `0..total` into chunks of `chunk` indices, runs `scan` on each and
/// reduces the per-chunk winners.
pub(crate) fn search_chunks<K, F>(total: u64, chunk: u64, goal: Goal, scan: F) -> Option<Best<K>>
where
    K: PartialOrd + Send,
    F: Fn(Range<u64>) -> Option<Best<K>> + Sync,
{
    let chunk = chunk.max(1);
    let chunks = total.div_ceil(chunk);
    if chunks <= 1 {
        return scan(0..total);
    }
    (0..chunks)
        .into_par_iter()
        .map(|c| scan(c * chunk..((c + 1) * chunk).min(total)))
        .reduce(|| None, |a, b| goal.pick(a, b))
}
