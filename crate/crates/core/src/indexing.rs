//! Combinatorial scaffolding for the synthesis: the partition of the
//! positive integers by binary popcount, the dense slope-ratio sequence
//! `r_m`, and the subscript set where equality is forced.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::frontier::{FrontierCurve, SlopeRatioImage};

/// Relative margin by which the open slope-ratio image is shrunk before the
/// Van der Corput points are mapped into it, so the inverse slope map is
/// never asked for an endpoint.
const IMAGE_MARGIN: f64 = 1e-3;

/// One subscript of the forced-equality set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndexEntry {
    pub j: u32,
    pub k: i64,
    /// Popcount class that owns scale `j`.
    pub m: u32,
    /// The slope-ratio value `r_m` used for this scale.
    pub r: f64,
}

/// The set of `(j, k)` subscripts carrying forced equality, both offset signs.
#[derive(Debug, Clone)]
pub struct IndexSet {
    pub x0: f64,
    pub j_max: u32,
    pub entries: Vec<IndexEntry>,
    members: HashSet<(u32, i64)>,
}

impl IndexSet {
    pub fn contains(&self, j: u32, k: i64) -> bool {
        self.members.contains(&(j, k))
    }
}

/// Number of ones in the binary expansion of `n >= 1`.
pub fn popcount_class(n: i64) -> Result<u32> {
    if n <= 0 {
        return Err(Error::NonPositive(n));
    }
    Ok(n.count_ones())
}

/// Base-2 Van der Corput radical inverse of `m >= 1`, in (0, 1).
pub fn van_der_corput(m: u64) -> f64 {
    let mut v = 0.0;
    let mut scale = 0.5;
    let mut n = m;
    while n > 0 {
        if n & 1 == 1 {
            v += scale;
        }
        scale *= 0.5;
        n >>= 1;
    }
    v
}

/// The m-th element of the dense sequence in the slope-ratio image.
///
/// Linear curves have a constant ratio, so `r_m = gamma` for every m. For
/// the strictly concave families the Van der Corput sequence is mapped
/// affinely onto the margins-shrunk open image interval.
pub fn r_sequence(curve: &FrontierCurve, m: u64) -> f64 {
    debug_assert!(m >= 1);
    match curve.slope_ratio_image() {
        SlopeRatioImage::Point(gamma) => gamma,
        SlopeRatioImage::OpenInterval(lo, hi) => {
            let delta = IMAGE_MARGIN * (hi - lo);
            (lo + delta) + van_der_corput(m) * ((hi - delta) - (lo + delta))
        }
    }
}

/// Build the forced-equality subscripts up to `j_max`.
///
/// Scale 0 has no binary ones and is assigned to class 1 by convention. For
/// each scale the two integers realizing `floor(|k - 2^j x0|) = floor(2^(j r))`
/// on either side of `2^j x0` are emitted when they are distinct and inside
/// the admissible cone `|k - 2^j x0| < 2^j`.
pub fn build_index_set(curve: &FrontierCurve, x0: f64, j_max: u32) -> IndexSet {
    let mut entries = Vec::new();
    let mut members = HashSet::new();
    for j in 0..=j_max {
        let m = if j == 0 { 1 } else { j.count_ones() };
        let r = r_sequence(curve, m as u64);
        let jr = j as f64 * r;
        if jr >= 62.0 {
            // offsets no longer representable as i64; scales this deep are
            // outside anything the synthesizers enumerate
            continue;
        }
        let t = jr.exp2().floor();
        let y = (j as f64).exp2() * x0;
        let cone = (j as f64).exp2();
        // unique integer in [y + t, y + t + 1) and in (y - t - 1, y - t]
        for k in [(y + t).ceil() as i64, (y - t).floor() as i64] {
            let off = (k as f64 - y).abs();
            if off.floor() == t && off < cone && members.insert((j, k)) {
                entries.push(IndexEntry { j, k, m, r });
            }
        }
    }
    IndexSet { x0, j_max, entries, members }
}
