use crate::error::{Error, Result};

/// A closed uniform grid `lo, lo+step, ..., <= hi` used for sigma sweeps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaGrid {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl SigmaGrid {
    pub fn new(lo: f64, hi: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) || !lo.is_finite() || !hi.is_finite() || lo >= hi {
            return Err(Error::BadDescriptor(format!(
                "sigma grid wants lo < hi and step > 0, got {lo}:{hi}:{step}"
            )));
        }
        Ok(SigmaGrid { lo, hi, step })
    }

    /// Number of grid points, endpoints included.
    pub fn len(&self) -> usize {
        ((self.hi - self.lo) / self.step + 1.0 + 1e-9).floor() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.lo + i as f64 * self.step).collect()
    }

    /// Parse `lo:hi:step`.
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::BadDescriptor(format!(
                "sigma grid must be lo:hi:step, got {s:?}"
            )));
        }
        let v: Vec<f64> = parts
            .iter()
            .map(|p| {
                p.parse::<f64>()
                    .map_err(|_| Error::BadDescriptor(format!("sigma grid field {p:?} is not a number")))
            })
            .collect::<Result<_>>()?;
        SigmaGrid::new(v[0], v[1], v[2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_values_inclusive() {
        let g = SigmaGrid::new(-2.0, 2.0, 0.25).unwrap();
        let v = g.values();
        assert_eq!(v.len(), 17);
        assert_eq!(v[0], -2.0);
        assert!((v[16] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_nonpositive_step() {
        assert!(SigmaGrid::new(0.0, 1.0, 0.0).is_err());
        assert!(SigmaGrid::parse("0:1:-0.5").is_err());
        assert!(SigmaGrid::parse("0:1").is_err());
    }
}
