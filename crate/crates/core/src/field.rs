//! Sparse dyadic coefficient fields.
//!
//! A field maps `(j, k)` subscripts to log2 coefficient magnitudes. Absent
//! entries are exact zeros, as is the `NEG_INFINITY` sentinel. Levels that
//! cover a contiguous range of `k` (the dense synthesizers) are stored as a
//! flat vector; everything else is a sorted sparse list.

/// A single stored coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entry {
    pub j: u32,
    pub k: i64,
    /// log2 of |c|; `NEG_INFINITY` means an exact zero.
    pub log2_mag: f64,
    /// +1 or -1. Synthesis always emits +1; parsed files may carry signs.
    pub sign: i8,
}

#[derive(Debug, Clone)]
enum Level {
    Empty,
    /// Sorted by k.
    Sparse(Vec<(i64, f64, i8)>),
    /// Contiguous k range starting at `k_lo`, all signs +1.
    Dense { k_lo: i64, vals: Vec<f64> },
}

/// Borrowed level storage; sparse tuples are `(k, log2_mag, sign)`.
#[derive(Debug, Clone, Copy)]
pub enum LevelView<'a> {
    Empty,
    Sparse(&'a [(i64, f64, i8)]),
    Dense { k_lo: i64, vals: &'a [f64] },
}

/// Coefficient field around `x0` with scales `0..=j_max`.
#[derive(Debug, Clone)]
pub struct CoefficientField {
    pub x0: f64,
    pub j_max: u32,
    levels: Vec<Level>,
    /// Descriptor of the curve this field was synthesized from, if any.
    pub curve_desc: String,
    /// Tag of the weight scheme used, if any.
    pub scheme_tag: String,
}

impl CoefficientField {
    pub fn new(x0: f64, j_max: u32) -> Self {
        CoefficientField {
            x0,
            j_max,
            levels: (0..=j_max).map(|_| Level::Empty).collect(),
            curve_desc: String::new(),
            scheme_tag: String::new(),
        }
    }

    /// Admissible cone check `|k - 2^j x0| < 2^j`.
    pub fn in_range(&self, j: u32, k: i64) -> bool {
        j <= self.j_max && {
            let y = (j as f64).exp2() * self.x0;
            (k as f64 - y).abs() < (j as f64).exp2()
        }
    }

    /// Insert one coefficient; panics outside the admissible cone.
    pub fn insert(&mut self, j: u32, k: i64, log2_mag: f64, sign: i8) {
        assert!(self.in_range(j, k), "({j}, {k}) outside the admissible cone");
        assert!(sign == 1 || sign == -1);
        match &mut self.levels[j as usize] {
            Level::Empty => {
                self.levels[j as usize] = Level::Sparse(vec![(k, log2_mag, sign)]);
            }
            Level::Sparse(v) => {
                match v.binary_search_by_key(&k, |e| e.0) {
                    Ok(i) => v[i] = (k, log2_mag, sign),
                    Err(i) => v.insert(i, (k, log2_mag, sign)),
                }
            }
            Level::Dense { k_lo, vals } => {
                let idx = k - *k_lo;
                assert!(
                    idx >= 0 && (idx as usize) < vals.len() && sign == 1,
                    "dense level only accepts in-range positive inserts"
                );
                vals[idx as usize] = log2_mag;
            }
        }
    }

    /// Install a whole dense level at once (used by the dense synthesizers).
    pub fn set_dense_level(&mut self, j: u32, k_lo: i64, vals: Vec<f64>) {
        assert!(j <= self.j_max);
        if let Some(last) = vals.len().checked_sub(1) {
            assert!(self.in_range(j, k_lo) && self.in_range(j, k_lo + last as i64));
        }
        self.levels[j as usize] = Level::Dense { k_lo, vals };
    }

    /// Value at `(j, k)`, `NEG_INFINITY` when absent.
    pub fn log2_mag(&self, j: u32, k: i64) -> f64 {
        self.get(j, k).map_or(f64::NEG_INFINITY, |e| e.log2_mag)
    }

    pub fn get(&self, j: u32, k: i64) -> Option<Entry> {
        if j > self.j_max {
            return None;
        }
        match &self.levels[j as usize] {
            Level::Empty => None,
            Level::Sparse(v) => v
                .binary_search_by_key(&k, |e| e.0)
                .ok()
                .map(|i| Entry { j, k, log2_mag: v[i].1, sign: v[i].2 }),
            Level::Dense { k_lo, vals } => {
                let idx = k - k_lo;
                if idx >= 0 && (idx as usize) < vals.len() {
                    Some(Entry { j, k, log2_mag: vals[idx as usize], sign: 1 })
                } else {
                    None
                }
            }
        }
    }

    /// Number of stored nonzero coefficients.
    pub fn nonzero_count(&self) -> usize {
        let mut n = 0;
        self.for_each_nonzero(|_| n += 1);
        n
    }

    /// Visit nonzero entries in ascending `(j, k)` order.
    pub fn for_each_nonzero<F: FnMut(Entry)>(&self, mut f: F) {
        for (j, level) in self.levels.iter().enumerate() {
            let j = j as u32;
            match level {
                Level::Empty => {}
                Level::Sparse(v) => {
                    for &(k, mag, sign) in v {
                        if mag != f64::NEG_INFINITY {
                            f(Entry { j, k, log2_mag: mag, sign });
                        }
                    }
                }
                Level::Dense { k_lo, vals } => {
                    for (i, &mag) in vals.iter().enumerate() {
                        if mag != f64::NEG_INFINITY {
                            f(Entry { j, k: k_lo + i as i64, log2_mag: mag, sign: 1 });
                        }
                    }
                }
            }
        }
    }

    /// Visit nonzero entries of one level.
    pub fn for_each_nonzero_at_level<F: FnMut(Entry)>(&self, j: u32, mut f: F) {
        if j > self.j_max {
            return;
        }
        match &self.levels[j as usize] {
            Level::Empty => {}
            Level::Sparse(v) => {
                for &(k, mag, sign) in v {
                    if mag != f64::NEG_INFINITY {
                        f(Entry { j, k, log2_mag: mag, sign });
                    }
                }
            }
            Level::Dense { k_lo, vals } => {
                for (i, &mag) in vals.iter().enumerate() {
                    if mag != f64::NEG_INFINITY {
                        f(Entry { j, k: k_lo + i as i64, log2_mag: mag, sign: 1 });
                    }
                }
            }
        }
    }

    /// Scale every coefficient by `factor` in log2 (i.e. multiply by
    /// `2^log2_factor`).
    pub fn scale_log2(&mut self, log2_factor: f64) {
        for level in &mut self.levels {
            match level {
                Level::Empty => {}
                Level::Sparse(v) => {
                    for e in v {
                        if e.1 != f64::NEG_INFINITY {
                            e.1 += log2_factor;
                        }
                    }
                }
                Level::Dense { vals, .. } => {
                    for v in vals {
                        if *v != f64::NEG_INFINITY {
                            *v += log2_factor;
                        }
                    }
                }
            }
        }
    }

    /// Borrowed view of one level's storage, for bulk scans.
    pub fn level_view(&self, j: u32) -> LevelView<'_> {
        if j > self.j_max {
            return LevelView::Empty;
        }
        match &self.levels[j as usize] {
            Level::Empty => LevelView::Empty,
            Level::Sparse(v) => LevelView::Sparse(v),
            Level::Dense { k_lo, vals } => LevelView::Dense { k_lo: *k_lo, vals },
        }
    }

    pub fn levels_with_entries(&self) -> Vec<u32> {
        (0..=self.j_max)
            .filter(|&j| {
                let mut any = false;
                self.for_each_nonzero_at_level(j, |_| any = true);
                any
            })
            .collect()
    }
}
