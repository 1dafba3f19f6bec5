use std::collections::BTreeSet;

use crate::error::Result;
use crate::rank::{column_elimination_test, RankConfig};
use crate::sym::ExprMatrix;

/// Columns among `unclassified` whose deletion lowers the generic rank of
/// `m` below `rank`. Each column is tested by literally deleting it and
/// re-ranking.
pub fn classify_variables(
    m: &ExprMatrix,
    rank: usize,
    unclassified: &BTreeSet<usize>,
    cfg: &RankConfig,
) -> Result<BTreeSet<usize>> {
    let mut out = BTreeSet::new();
    for &c in unclassified {
        if column_elimination_test(m, rank, c, cfg)? {
            out.insert(c);
        }
    }
    Ok(out)
}
