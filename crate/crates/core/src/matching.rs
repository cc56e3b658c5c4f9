//! Exact nearest-neighbour distance-ratio matching.

use rayon::prelude::*;

use crate::descriptor::{squared_distance, Descriptor};
use crate::error::{Error, Result};

/// Best match of one query: nearest neighbour in the reference set and the
/// ratio between the first and second nearest distances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchPair {
    pub index_a: usize,
    pub index_b: usize,
    pub distance: f64,
    pub distance_ratio: f64,
}

/// Nearest and second-nearest non-degenerate neighbours of every non-degenerate query.
///
/// Brute force; equal distances resolve to the lower reference index. When
/// both neighbours are at distance 0 the ratio is 1, so exact duplicates in
/// the reference set never match.
pub fn nearest_neighbors(queries: &[Descriptor], references: &[Descriptor]) -> Result<Vec<MatchPair>> {
    let candidates: Vec<(usize, &Descriptor)> = references
        .iter()
        .enumerate()
        .filter(|(_, d)| !d.is_degenerate())
        .collect();
    if candidates.len() < 2 {
        return Err(Error::Input(format!(
            "ratio matching needs at least 2 non-degenerate reference descriptors, got {}",
            candidates.len()
        )));
    }
    Ok(queries
        .par_iter()
        .enumerate()
        .filter(|(_, q)| !q.is_degenerate())
        .map(|(index_a, q)| {
            let mut best = (usize::MAX, f64::INFINITY);
            let mut second = f64::INFINITY;
            for &(j, r) in &candidates {
                let d = squared_distance(q.values(), r.values());
                if d < best.1 {
                    second = best.1;
                    best = (j, d);
                } else if d < second {
                    second = d;
                }
            }
            let d1 = best.1.sqrt();
            let d2 = second.sqrt();
            let distance_ratio = if d2 > 0.0 { d1 / d2 } else { 1.0 };
            MatchPair {
                index_a,
                index_b: best.0,
                distance: d1,
                distance_ratio,
            }
        })
        .collect())
}

/// Matches whose distance ratio is strictly below `ratio_threshold`.
pub fn match_ratio(
    queries: &[Descriptor],
    references: &[Descriptor],
    ratio_threshold: f64,
) -> Result<Vec<MatchPair>> {
    check_threshold(ratio_threshold)?;
    Ok(nearest_neighbors(queries, references)?
        .into_iter()
        .filter(|m| m.distance_ratio < ratio_threshold)
        .collect())
}

pub(crate) fn check_threshold(t: f64) -> Result<()> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::Input(format!("ratio threshold must lie in (0, 1], got {t}")));
    }
    Ok(())
}
