//! Admissible frontier curves.
//!
//! A frontier is a decreasing curve `S(sigma)` in the `(sigma, s)` plane that
//! is either a line or strictly concave (`S'' < 0`). Three closed-form
//! families are provided so that the slope `S'` and its inverse are exact,
//! which the synthesis machinery relies on. All quantities consumed elsewhere
//! (slope, slope ratio, regularity exponents) live here.

use crate::error::{Error, Result};

/// Absolute sigma tolerance for bisection root finding.
const BISECT_TOL: f64 = 1e-12;
const BISECT_MAX_ITER: u32 = 200;

/// A decreasing frontier curve, linear or strictly concave.
#[derive(Debug, Clone, PartialEq)]
pub enum FrontierCurve {
    /// `S(sigma) = alpha + gamma/(1-gamma) * (alpha - sigma)`, `gamma in [0,1)`.
    /// Passes through the fixed point `(alpha, alpha)`.
    Linear { alpha: f64, gamma: f64 },
    /// `S(sigma) = s_inf - exp(lam * sigma)`, `lam > 0`. Slope image `(-inf, 0)`.
    ExpConcave { s_inf: f64, lam: f64 },
    /// `S(sigma) = c - softplus(beta * sigma) / beta`, `beta > 0`.
    /// Slope image `(-1, 0)`, so it stays inside the Meyer admissible band.
    SoftplusConcave { c: f64, beta: f64 },
}

/// Image of the slope-ratio map `S'/(S'-1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SlopeRatioImage {
    /// Open interval `(lo, hi)`.
    OpenInterval(f64, f64),
    /// Linear curves: the single value `gamma`.
    Point(f64),
}

/// Classical regularity exponents read off a frontier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularityExponents {
    pub pointwise_holder: f64,
    pub local_holder: f64,
    pub chirp: f64,
    pub oscillation: f64,
    /// May be `+inf` for lines with positive gamma.
    pub weak_scaling: f64,
}

fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl FrontierCurve {
    pub fn linear(alpha: f64, gamma: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&gamma) || !gamma.is_finite() {
            return Err(Error::GammaOutOfRange(gamma));
        }
        if !alpha.is_finite() {
            return Err(Error::BadDescriptor("alpha must be finite".into()));
        }
        Ok(FrontierCurve::Linear { alpha, gamma })
    }

    pub fn exp_concave(s_inf: f64, lam: f64) -> Result<Self> {
        if !(lam > 0.0) || !lam.is_finite() {
            return Err(Error::BadDescriptor(format!("lam must be > 0, got {lam}")));
        }
        if !s_inf.is_finite() {
            return Err(Error::BadDescriptor("sinf must be finite".into()));
        }
        Ok(FrontierCurve::ExpConcave { s_inf, lam })
    }

    pub fn softplus_concave(c: f64, beta: f64) -> Result<Self> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::BadDescriptor(format!("beta must be > 0, got {beta}")));
        }
        if !c.is_finite() {
            return Err(Error::BadDescriptor("c must be finite".into()));
        }
        Ok(FrontierCurve::SoftplusConcave { c, beta })
    }

    pub fn is_linear(&self) -> bool {
        matches!(self, FrontierCurve::Linear { .. })
    }

    /// `S(sigma)` by closed form.
    pub fn eval(&self, sigma: f64) -> f64 {
        match *self {
            FrontierCurve::Linear { alpha, gamma } => alpha + gamma / (1.0 - gamma) * (alpha - sigma),
            FrontierCurve::ExpConcave { s_inf, lam } => s_inf - (lam * sigma).exp(),
            FrontierCurve::SoftplusConcave { c, beta } => c - softplus(beta * sigma) / beta,
        }
    }

    /// Exact `S'(sigma)`; constant for lines.
    pub fn slope(&self, sigma: f64) -> f64 {
        match *self {
            FrontierCurve::Linear { gamma, .. } => -gamma / (1.0 - gamma),
            FrontierCurve::ExpConcave { lam, .. } => -lam * (lam * sigma).exp(),
            FrontierCurve::SoftplusConcave { beta, .. } => -sigmoid(beta * sigma),
        }
    }

    /// The slope-ratio map `rho(sigma) = S'/(S'-1)`, always in `[0, 1)`.
    ///
    /// Computed per family to stay finite where `S'` overflows; strictly
    /// increasing in sigma for the strictly concave families.
    pub fn slope_ratio(&self, sigma: f64) -> f64 {
        match *self {
            // constant: S'/(S'-1) with S' = -g/(1-g) collapses to g exactly
            FrontierCurve::Linear { gamma, .. } => gamma,
            FrontierCurve::ExpConcave { lam, .. } => sigmoid(lam * sigma + lam.ln()),
            FrontierCurve::SoftplusConcave { beta, .. } => {
                let s = sigmoid(beta * sigma);
                s / (s + 1.0)
            }
        }
    }

    /// Exact image of the slope-ratio map.
    pub fn slope_ratio_image(&self) -> SlopeRatioImage {
        match *self {
            FrontierCurve::Linear { gamma, .. } => SlopeRatioImage::Point(gamma),
            FrontierCurve::ExpConcave { .. } => SlopeRatioImage::OpenInterval(0.0, 1.0),
            FrontierCurve::SoftplusConcave { .. } => SlopeRatioImage::OpenInterval(0.0, 0.5),
        }
    }

    /// Invert the slope-ratio map by bisection (tolerance 1e-12 in sigma).
    ///
    /// The ratio is strictly monotone for the concave families, so a
    /// geometrically grown bracket always pins the root.
    pub fn invert_slope_ratio(&self, rho: f64) -> Result<f64> {
        let (lo, hi) = match self.slope_ratio_image() {
            SlopeRatioImage::Point(_) => return Err(Error::LinearCurveNotInvertible),
            SlopeRatioImage::OpenInterval(lo, hi) => (lo, hi),
        };
        if !(rho > lo && rho < hi) {
            return Err(Error::RatioOutOfImage { rho, lo, hi });
        }
        let mut a = -1.0;
        let mut b = 1.0;
        let mut grow = 0;
        while self.slope_ratio(a) >= rho {
            a *= 2.0;
            grow += 1;
            if grow > 1100 {
                return Err(Error::RatioOutOfImage { rho, lo, hi });
            }
        }
        while self.slope_ratio(b) <= rho {
            b *= 2.0;
            grow += 1;
            if grow > 1100 {
                return Err(Error::RatioOutOfImage { rho, lo, hi });
            }
        }
        let mut iter = 0;
        while b - a > BISECT_TOL && iter < BISECT_MAX_ITER {
            let mid = 0.5 * (a + b);
            if self.slope_ratio(mid) < rho {
                a = mid;
            } else {
                b = mid;
            }
            iter += 1;
        }
        Ok(0.5 * (a + b))
    }

    /// Limit of `S` as sigma -> -inf (the weak scaling exponent).
    pub fn weak_scaling_limit(&self) -> f64 {
        match *self {
            FrontierCurve::Linear { alpha, gamma } => {
                if gamma == 0.0 {
                    alpha
                } else {
                    f64::INFINITY
                }
            }
            FrontierCurve::ExpConcave { s_inf, .. } => s_inf,
            FrontierCurve::SoftplusConcave { c, .. } => c,
        }
    }

    /// All classical exponents of the curve.
    pub fn exponents(&self) -> RegularityExponents {
        let pointwise = self.eval(0.0);
        // S(sigma) - sigma is strictly decreasing, so the fixed point is unique.
        let local = match *self {
            FrontierCurve::Linear { alpha, .. } => alpha,
            _ => {
                let f = |s: f64| self.eval(s) - s;
                bisect_decreasing(f)
            }
        };
        let chirp = match *self {
            FrontierCurve::Linear { gamma, .. } => gamma / (1.0 - gamma),
            _ => 0.0,
        };
        RegularityExponents {
            pointwise_holder: pointwise,
            local_holder: local,
            chirp,
            oscillation: -self.slope(0.0),
            weak_scaling: self.weak_scaling_limit(),
        }
    }

    /// Parse a CLI descriptor:
    /// `linear:alpha=<f>,gamma=<f>` | `exp:sinf=<f>,lam=<f>` | `softplus:c=<f>,beta=<f>`.
    pub fn parse_descriptor(s: &str) -> Result<Self> {
        let (family, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::BadDescriptor(format!("missing ':' in {s:?}")))?;
        let mut kv = std::collections::BTreeMap::new();
        for part in rest.split(',') {
            let (key, val) = part
                .split_once('=')
                .ok_or_else(|| Error::BadDescriptor(format!("field {part:?} is not key=value")))?;
            let f: f64 = val
                .parse()
                .map_err(|_| Error::BadDescriptor(format!("value for key {key:?} is not a number: {val:?}")))?;
            kv.insert(key.trim().to_string(), f);
        }
        let mut take = |key: &str| {
            kv.remove(key)
                .ok_or_else(|| Error::BadDescriptor(format!("missing key {key:?} for family {family:?}")))
        };
        let curve = match family {
            "linear" => FrontierCurve::linear(take("alpha")?, take("gamma")?)?,
            "exp" => FrontierCurve::exp_concave(take("sinf")?, take("lam")?)?,
            "softplus" => FrontierCurve::softplus_concave(take("c")?, take("beta")?)?,
            other => return Err(Error::BadDescriptor(format!("unknown family {other:?}"))),
        };
        if let Some(extra) = kv.keys().next() {
            return Err(Error::BadDescriptor(format!("unexpected key {extra:?}")));
        }
        Ok(curve)
    }

    /// Canonical descriptor string for file metadata.
    pub fn descriptor(&self) -> String {
        match *self {
            FrontierCurve::Linear { alpha, gamma } => format!("linear:alpha={alpha},gamma={gamma}"),
            FrontierCurve::ExpConcave { s_inf, lam } => format!("exp:sinf={s_inf},lam={lam}"),
            FrontierCurve::SoftplusConcave { c, beta } => format!("softplus:c={c},beta={beta}"),
        }
    }
}

/// Bisection root of a strictly decreasing function with a geometric bracket.
fn bisect_decreasing<F: Fn(f64) -> f64>(f: F) -> f64 {
    let mut a = -1.0;
    let mut b = 1.0;
    while f(a) <= 0.0 {
        a *= 2.0;
    }
    while f(b) >= 0.0 {
        b *= 2.0;
    }
    let tol = 1e-10;
    let mut iter = 0;
    while b - a > tol && iter < BISECT_MAX_ITER {
        let mid = 0.5 * (a + b);
        if f(mid) > 0.0 {
            a = mid;
        } else {
            b = mid;
        }
        iter += 1;
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn families() -> Vec<FrontierCurve> {
        vec![
            FrontierCurve::linear(0.5, 0.5).unwrap(),
            FrontierCurve::exp_concave(1.0, 1.0).unwrap(),
            FrontierCurve::exp_concave(2.0, 0.7).unwrap(),
            FrontierCurve::softplus_concave(2.0, 1.0).unwrap(),
            FrontierCurve::softplus_concave(0.5, 3.0).unwrap(),
        ]
    }

    #[test]
    fn eval_examples() {
        let c = FrontierCurve::linear(0.5, 0.0).unwrap();
        assert_eq!(c.eval(3.0), 0.5);
        let c = FrontierCurve::linear(0.5, 0.5).unwrap();
        // S(sigma) = 2*alpha - sigma when gamma = 1/2
        assert!((c.eval(0.0) - 1.0).abs() < 1e-15);
        assert!((c.eval(2.0) + 1.0).abs() < 1e-15);
        let c = FrontierCurve::exp_concave(1.0, 1.0).unwrap();
        assert_eq!(c.eval(0.0), 0.0);
    }

    #[test]
    fn slope_examples() {
        let c = FrontierCurve::linear(0.5, 0.5).unwrap();
        assert!((c.slope(-7.0) + 1.0).abs() < 1e-15);
        assert!((c.slope(4.0) + 1.0).abs() < 1e-15);
        let c = FrontierCurve::exp_concave(1.0, 1.0).unwrap();
        assert!((c.slope(0.0) + 1.0).abs() < 1e-15);
        let c = FrontierCurve::softplus_concave(2.0, 1.0).unwrap();
        let s = c.slope(-30.0);
        assert!(s < 0.0 && s > -1e-9, "softplus slope tends to 0-, got {s}");
    }

    #[test]
    fn slope_ratio_fixed_points() {
        // S' = -1 => 0.5; limits 0 and 1 approached from inside
        let c = FrontierCurve::exp_concave(1.0, 1.0).unwrap();
        assert!((c.slope_ratio(0.0) - 0.5).abs() < 1e-15);
        assert!(c.slope_ratio(-40.0) > 0.0 && c.slope_ratio(-40.0) < 1e-15_f64.max(1e-16));
        assert!(c.slope_ratio(40.0) < 1.0 && c.slope_ratio(40.0) > 1.0 - 1e-15);
    }

    #[test]
    fn slope_ratio_image_per_family() {
        assert_eq!(
            FrontierCurve::exp_concave(1.0, 1.0).unwrap().slope_ratio_image(),
            SlopeRatioImage::OpenInterval(0.0, 1.0)
        );
        assert_eq!(
            FrontierCurve::linear(0.1, 0.3).unwrap().slope_ratio_image(),
            SlopeRatioImage::Point(0.3)
        );
        assert_eq!(
            FrontierCurve::softplus_concave(0.0, 1.0).unwrap().slope_ratio_image(),
            SlopeRatioImage::OpenInterval(0.0, 0.5)
        );
    }

    #[test]
    fn invert_slope_ratio_examples() {
        let c = FrontierCurve::exp_concave(1.0, 1.0).unwrap();
        assert!(c.invert_slope_ratio(0.5).unwrap().abs() < 1e-10);

        let c = FrontierCurve::softplus_concave(0.0, 1.0).unwrap();
        assert!(matches!(
            c.invert_slope_ratio(0.6),
            Err(Error::RatioOutOfImage { .. })
        ));

        // -2 e^{2 sigma} / (-2 e^{2 sigma} - 1) = 2/3  =>  sigma = ln(2)/2
        let c = FrontierCurve::exp_concave(2.0, 2.0).unwrap();
        let s = c.invert_slope_ratio(2.0 / 3.0).unwrap();
        assert!((s - 0.5 * 2.0_f64.ln()).abs() < 1e-10, "got {s}");

        let lin = FrontierCurve::linear(0.5, 0.5).unwrap();
        assert!(matches!(
            lin.invert_slope_ratio(0.5),
            Err(Error::LinearCurveNotInvertible)
        ));
    }

    #[test]
    fn monotone_decreasing_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for curve in families() {
            for _ in 0..1000 {
                let s1 = rng.gen_range(-25.0..25.0);
                let s2 = s1 + rng.gen_range(1e-6..10.0);
                assert!(
                    curve.eval(s1) > curve.eval(s2),
                    "{curve:?} not decreasing at {s1}, {s2}"
                );
            }
        }
    }

    #[test]
    fn strictly_concave_second_difference_negative() {
        let h = 1e-4;
        for curve in families().into_iter().filter(|c| !c.is_linear()) {
            for i in 0..200 {
                let s = -20.0 + 0.2 * i as f64;
                let dd = curve.eval(s + h) - 2.0 * curve.eval(s) + curve.eval(s - h);
                assert!(dd < 0.0, "{curve:?} second difference {dd} at {s}");
            }
        }
    }

    #[test]
    fn slope_matches_finite_differences() {
        let h = 1e-5;
        for curve in families() {
            for i in 0..100 {
                let s = -10.0 + 0.2 * i as f64;
                let fd = (curve.eval(s + h) - curve.eval(s - h)) / (2.0 * h);
                let an = curve.slope(s);
                let denom = an.abs().max(1e-9);
                assert!(
                    ((fd - an) / denom).abs() < 1e-6,
                    "{curve:?} slope mismatch at {s}: fd={fd} an={an}"
                );
            }
        }
    }

    #[test]
    fn slope_ratio_in_unit_interval_and_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for curve in families() {
            for _ in 0..500 {
                let s = rng.gen_range(-20.0..20.0);
                let r = curve.slope_ratio(s);
                assert!((0.0..1.0).contains(&r), "ratio {r} out of [0,1)");
                if !curve.is_linear() {
                    let back = curve.invert_slope_ratio(r).unwrap();
                    assert!((back - s).abs() < 1e-9, "{curve:?} round trip {s} -> {back}");
                }
            }
        }
    }

    #[test]
    fn exponents_linear_constant() {
        let e = FrontierCurve::linear(0.7, 0.0).unwrap().exponents();
        assert_eq!(e.pointwise_holder, 0.7);
        assert_eq!(e.local_holder, 0.7);
        assert_eq!(e.weak_scaling, 0.7);
        assert_eq!(e.chirp, 0.0);
        assert_eq!(e.oscillation, 0.0);
    }

    #[test]
    fn exponents_exp_concave() {
        let e = FrontierCurve::exp_concave(1.0, 1.0).unwrap().exponents();
        assert!(e.pointwise_holder.abs() < 1e-15);
        assert_eq!(e.weak_scaling, 1.0);
        // root of 1 - e^sigma = sigma, via an independent bisection
        let mut a = 0.0f64;
        let mut b = 1.0f64;
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if 1.0 - m.exp() - m > 0.0 {
                a = m;
            } else {
                b = m;
            }
        }
        let oracle = 0.5 * (a + b);
        assert!((oracle - 0.4429).abs() < 1e-4);
        assert!((e.local_holder - oracle).abs() < 1e-8);
        assert_eq!(e.chirp, 0.0);
        assert!((e.oscillation - 1.0).abs() < 1e-15);
    }

    #[test]
    fn weak_scaling_at_least_pointwise() {
        for curve in families() {
            let e = curve.exponents();
            assert!(e.weak_scaling >= e.pointwise_holder);
        }
    }

    #[test]
    fn descriptor_parsing() {
        let c = FrontierCurve::parse_descriptor("linear:alpha=0.5,gamma=0.25").unwrap();
        assert_eq!(c, FrontierCurve::Linear { alpha: 0.5, gamma: 0.25 });
        let c = FrontierCurve::parse_descriptor("exp:sinf=1,lam=2").unwrap();
        assert_eq!(c, FrontierCurve::ExpConcave { s_inf: 1.0, lam: 2.0 });
        let c = FrontierCurve::parse_descriptor("softplus:c=1.5,beta=0.5").unwrap();
        assert_eq!(c, FrontierCurve::SoftplusConcave { c: 1.5, beta: 0.5 });

        let err = FrontierCurve::parse_descriptor("exp:sinf=1,lambda=2").unwrap_err();
        assert!(err.to_string().contains("lam"), "error names the key: {err}");
        let err = FrontierCurve::parse_descriptor("linear:alpha=0.5,gamma=oops").unwrap_err();
        assert!(err.to_string().contains("gamma"), "error names the key: {err}");
        assert!(FrontierCurve::parse_descriptor("linear:alpha=0.5,gamma=1.0").is_err());
        let round = FrontierCurve::parse_descriptor("exp:sinf=1,lam=2").unwrap();
        assert_eq!(FrontierCurve::parse_descriptor(&round.descriptor()).unwrap(), round);
    }
}
