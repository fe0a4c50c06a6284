//! The central infimum `inf_sigma { a^S(sigma) * b^(S(sigma)-sigma) }`.
//!
//! Everything is evaluated in the log2 domain: with `a = 2^-j` and
//! `L = log2(b)` the objective is
//!
//! ```text
//! F(sigma) = -j*S(sigma) + (S(sigma) - sigma)*L
//! ```
//!
//! whose stationary point satisfies `S'(sigma*) = L/(L - j)`, equivalently
//! `slope_ratio(sigma*) = L/j`. A coefficient value of exactly zero is
//! represented by the `NEG_INF` sentinel (`f64::NEG_INFINITY`), since
//! `2^(-j*S)` underflows long before the interesting scales run out.

use crate::error::{Error, Result};
use crate::frontier::{FrontierCurve, SlopeRatioImage};

/// Which branch of the case analysis produced the infimum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InfCase {
    /// `a = b = 1`: the infimum is 1.
    UnitPoint,
    /// Stationary point inside the slope image.
    Interior,
    /// One-sided limit as sigma -> +inf.
    LimitPlus,
    /// One-sided limit as sigma -> -inf.
    LimitMinus,
    /// The infimum is 0 (log2 = -inf).
    Zero,
}

/// Result of the log-domain infimum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfResult {
    /// log2 of the infimum; `NEG_INFINITY` encodes an exact zero.
    pub log2_value: f64,
    pub case: InfCase,
    /// The minimizer, present only for `Interior`.
    pub sigma_star: Option<f64>,
}

impl InfResult {
    fn zero() -> Self {
        InfResult { log2_value: f64::NEG_INFINITY, case: InfCase::Zero, sigma_star: None }
    }
}

/// Eq.-style infimum for a line `S(sigma) = M*sigma + d` with `M <= 0`:
/// `0` when `(ab)^M != b`, else `(ab)^d`. The equality is tested in the log
/// domain with absolute tolerance 1e-12; the mismatch branch returns an
/// exact `0.0`.
pub fn inf_linear(m: f64, d: f64, a: f64, b: f64) -> f64 {
    debug_assert!(m <= 0.0, "slope must be <= 0");
    debug_assert!(a > 0.0 && b > 0.0);
    let log2_ab = a.log2() + b.log2();
    if (m * log2_ab - b.log2()).abs() <= 1e-12 {
        (d * log2_ab).exp2()
    } else {
        0.0
    }
}

/// Lemma-style infimum for strictly concave curves with `a = 2^-j`, `j >= 0`,
/// and `b` given as `log2_b`. Linear curves are rejected; route them through
/// [`inf_linear`].
pub fn log2_inf(curve: &FrontierCurve, j: u32, log2_b: f64) -> Result<InfResult> {
    if curve.is_linear() {
        return Err(Error::NonConcaveCurve);
    }
    let l = log2_b;
    if j == 0 {
        // a = 1; only b = 1 yields a nonzero infimum.
        if l == 0.0 {
            return Ok(InfResult { log2_value: 0.0, case: InfCase::UnitPoint, sigma_star: None });
        }
        return Ok(InfResult::zero());
    }
    let jf = j as f64;
    if l < 0.0 || l >= jf {
        // b < 1 or b >= 1/a
        return Ok(InfResult::zero());
    }
    if l == 0.0 {
        // S' < 0 = target slope everywhere: F decreases toward sigma -> -inf,
        // where F -> -j * lim S = -j * weak_scaling (finite for our families).
        let w = curve.weak_scaling_limit();
        return Ok(InfResult {
            log2_value: -jf * w,
            case: InfCase::LimitMinus,
            sigma_star: None,
        });
    }
    let rho = l / jf;
    let (lo, hi) = match curve.slope_ratio_image() {
        SlopeRatioImage::OpenInterval(lo, hi) => (lo, hi),
        SlopeRatioImage::Point(_) => unreachable!("linear rejected above"),
    };
    if rho > lo && rho < hi {
        let sigma_star = curve.invert_slope_ratio(rho)?;
        let s = curve.eval(sigma_star);
        return Ok(InfResult {
            log2_value: -jf * s + (s - sigma_star) * l,
            case: InfCase::Interior,
            sigma_star: Some(sigma_star),
        });
    }
    // rho >= hi: the slope condition is unreachable and F' < 0 throughout, so
    // the infimum is the limit sigma -> +inf of F = (L-j)S - L*sigma.
    match *curve {
        FrontierCurve::SoftplusConcave { c, .. } => {
            // S(sigma) ~ c - sigma as sigma -> +inf, hence
            // F -> (L-j)c + (j-2L)*sigma.
            if jf - 2.0 * l < 0.0 {
                Ok(InfResult { log2_value: f64::NEG_INFINITY, case: InfCase::LimitPlus, sigma_star: None })
            } else {
                // exactly at the image endpoint rho = 1/2
                Ok(InfResult { log2_value: (l - jf) * c, case: InfCase::LimitPlus, sigma_star: None })
            }
        }
        // ExpConcave has slope-ratio image (0,1), so rho = L/j < 1 is always
        // interior; SoftplusConcave is the only family that can land here.
        _ => Ok(InfResult::zero()),
    }
}

/// Grid minimizer of the objective in log2; the tests' oracle.
/// Returns the log2 of the minimum.
pub fn brute_force_log2_inf(
    curve: &FrontierCurve,
    log2_a: f64,
    log2_b: f64,
    sigma_lo: f64,
    sigma_hi: f64,
    step: f64,
) -> f64 {
    assert!(sigma_lo < sigma_hi && step > 0.0);
    let mut best = f64::INFINITY;
    let n = ((sigma_hi - sigma_lo) / step).ceil() as usize;
    for i in 0..=n {
        let sigma = (sigma_lo + i as f64 * step).min(sigma_hi);
        let s = curve.eval(sigma);
        let f = s * log2_a + (s - sigma) * log2_b;
        if f < best {
            best = f;
        }
    }
    best
}

/// Same oracle in the linear domain, as `min a^S b^(S-sigma)` over the grid.
pub fn brute_force_inf(
    curve: &FrontierCurve,
    a: f64,
    b: f64,
    sigma_lo: f64,
    sigma_hi: f64,
    step: f64,
) -> f64 {
    brute_force_log2_inf(curve, a.log2(), b.log2(), sigma_lo, sigma_hi, step).exp2()
}

/// Grid oracle plus one refinement pass.
///
/// If the coarse argmin is interior the neighbourhood is re-gridded at
/// `step/1000`. If it sits on a boundary the objective is still falling
/// there, so the grid is extended geometrically until it either flattens out
/// (a finite one-sided limit) or drops below -1e4 (treated as a divergence
/// to zero by the callers).
pub fn brute_force_log2_inf_refined(
    curve: &FrontierCurve,
    log2_a: f64,
    log2_b: f64,
    sigma_lo: f64,
    sigma_hi: f64,
    step: f64,
) -> f64 {
    let obj = |sigma: f64| {
        let s = curve.eval(sigma);
        s * log2_a + (s - sigma) * log2_b
    };
    let n = ((sigma_hi - sigma_lo) / step).ceil() as usize;
    let mut best = f64::INFINITY;
    let mut best_sigma = sigma_lo;
    for i in 0..=n {
        let sigma = (sigma_lo + i as f64 * step).min(sigma_hi);
        let f = obj(sigma);
        if f < best {
            best = f;
            best_sigma = sigma;
        }
    }
    if best_sigma > sigma_lo && best_sigma < sigma_hi {
        let fine = step / 1000.0;
        let lo = best_sigma - step;
        let hi = best_sigma + step;
        let m = ((hi - lo) / fine).ceil() as usize;
        for i in 0..=m {
            let f = obj(lo + i as f64 * fine);
            if f < best {
                best = f;
            }
        }
        return best;
    }
    // boundary argmin: chase the one-sided limit
    let dir = if best_sigma <= sigma_lo { -1.0 } else { 1.0 };
    let mut reach = sigma_hi.abs().max(sigma_lo.abs()).max(1.0);
    for _ in 0..60 {
        reach *= 2.0;
        let f = obj(dir * reach);
        if f < best {
            best = f;
        }
        if best < -1.0e4 - 1.0 {
            break;
        }
    }
    best
}

/// Max over a sigma grid of the quotient bounded by the technical lemma:
/// `[S'(sigma)(sigma0 - sigma) + S(sigma) - s0 + eps] / [S'(sigma) - 1]`.
/// The lemma asserts a strictly negative upper bound exists.
pub fn tecnico_sup(curve: &FrontierCurve, sigma0: f64, eps: f64, grid: &crate::grid::SigmaGrid) -> f64 {
    assert!(eps > 0.0);
    let s0 = curve.eval(sigma0);
    let mut best = f64::NEG_INFINITY;
    for sigma in grid.values() {
        let sp = curve.slope(sigma);
        let v = (sp * (sigma0 - sigma) + curve.eval(sigma) - s0 + eps) / (sp - 1.0);
        if v > best {
            best = v;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::SigmaGrid;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn inf_linear_examples() {
        // b = 1 and M = 0: (ab)^0 = 1 = b, value (ab)^d
        let v = inf_linear(0.0, 0.5, 2f64.powi(-3), 1.0);
        assert!((v - 2f64.powf(-1.5)).abs() < 1e-15);
        // (ab)^{-1} = 2 != 1
        assert_eq!(inf_linear(-1.0, 0.0, 0.5, 1.0), 0.0);
        // ab = 2^-2, (ab)^{-1} = 4 = b, value (ab)^1 = 0.25
        let v = inf_linear(-1.0, 1.0, 2f64.powi(-4), 4.0);
        assert!((v - 0.25).abs() < 1e-15);
    }

    #[test]
    fn inf_linear_matches_brute_force_on_random_match_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..100 {
            let gamma: f64 = rng.gen_range(0.0..0.9);
            let m = -gamma / (1.0 - gamma);
            let alpha: f64 = rng.gen_range(-1.0..2.0);
            let d = alpha / (1.0 - gamma); // S(0) for the line through (alpha, alpha)
            let curve = FrontierCurve::linear(alpha, gamma).unwrap();
            // construct the matching b for a = 2^-j: log2 b = j*gamma
            let j = rng.gen_range(1..12);
            let a = 2f64.powi(-j);
            let b = 2f64.powf(j as f64 * gamma);
            let v = inf_linear(m, d, a, b);
            assert!(v > 0.0, "match branch must be nonzero");
            let oracle = brute_force_inf(&curve, a, b, -40.0, 40.0, 1e-3);
            assert!(
                (v - oracle).abs() <= 1e-6 * oracle.abs().max(1e-30),
                "j={j} gamma={gamma} v={v} oracle={oracle}"
            );
        }
    }

    #[test]
    fn inf_linear_mismatch_is_exactly_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..100 {
            let m: f64 = -rng.gen_range(0.0..3.0);
            let d: f64 = rng.gen_range(-2.0..2.0);
            let a: f64 = rng.gen_range(0.01..1.0);
            // random b almost surely misses the match condition
            let b: f64 = rng.gen_range(1.1..7.0);
            let log2ab = a.log2() + b.log2();
            if (m * log2ab - b.log2()).abs() <= 1e-9 {
                continue;
            }
            assert_eq!(inf_linear(m, d, a, b), 0.0);
        }
    }

    #[test]
    fn log2_inf_unit_point_and_zero_branches() {
        let curve = FrontierCurve::exp_concave(1.0, 1.0).unwrap();
        let r = log2_inf(&curve, 0, 0.0).unwrap();
        assert_eq!(r.case, InfCase::UnitPoint);
        assert_eq!(r.log2_value, 0.0);

        // b < 1
        let r = log2_inf(&curve, 5, -1.0).unwrap();
        assert_eq!(r.case, InfCase::Zero);
        assert_eq!(r.log2_value, f64::NEG_INFINITY);

        // b >= 1/a
        let r = log2_inf(&curve, 5, 5.0).unwrap();
        assert_eq!(r.case, InfCase::Zero);

        // j = 0 with b != 1
        let r = log2_inf(&curve, 0, 0.5).unwrap();
        assert_eq!(r.case, InfCase::Zero);
    }

    #[test]
    fn log2_inf_interior_example() {
        // slope condition S'(sigma) = 5/(5-10) = -1 => sigma* = 0, value 0
        let curve = FrontierCurve::exp_concave(1.0, 1.0).unwrap();
        let r = log2_inf(&curve, 10, 5.0).unwrap();
        assert_eq!(r.case, InfCase::Interior);
        assert!(r.log2_value.abs() < 1e-9, "got {}", r.log2_value);
        assert!(r.sigma_star.unwrap().abs() < 1e-9);
        let oracle = brute_force_log2_inf(&curve, -10.0, 5.0, -60.0, 60.0, 1e-3);
        assert!((r.log2_value - oracle).abs() < 1e-3);
    }

    #[test]
    fn log2_inf_rejects_linear() {
        let lin = FrontierCurve::linear(0.5, 0.5).unwrap();
        assert!(matches!(log2_inf(&lin, 3, 1.0), Err(Error::NonConcaveCurve)));
    }

    #[test]
    fn log2_inf_limit_minus_matches_weak_scaling() {
        for curve in [
            FrontierCurve::exp_concave(1.3, 0.8).unwrap(),
            FrontierCurve::softplus_concave(2.0, 1.5).unwrap(),
        ] {
            let r = log2_inf(&curve, 8, 0.0).unwrap();
            assert_eq!(r.case, InfCase::LimitMinus);
            assert!((r.log2_value + 8.0 * curve.weak_scaling_limit()).abs() < 1e-12);
            let oracle = brute_force_log2_inf(&curve, -8.0, 0.0, -80.0, 20.0, 1e-3);
            assert!((r.log2_value - oracle).abs() < 1e-3, "{:?}", curve);
        }
    }

    #[test]
    fn log2_inf_softplus_beyond_image_is_zero() {
        let curve = FrontierCurve::softplus_concave(1.0, 1.0).unwrap();
        // rho = 8/10 > 1/2: diverges to -inf
        let r = log2_inf(&curve, 10, 8.0).unwrap();
        assert_eq!(r.case, InfCase::LimitPlus);
        assert_eq!(r.log2_value, f64::NEG_INFINITY);
        let oracle = brute_force_log2_inf(&curve, -10.0, 8.0, -60.0, 200.0, 1e-2);
        assert!(oracle < -1e2, "oracle should run off to -inf, got {oracle}");

        // rho exactly 1/2: finite limit (L-j)*c
        let r = log2_inf(&curve, 10, 5.0).unwrap();
        assert_eq!(r.case, InfCase::LimitPlus);
        assert!((r.log2_value - (5.0 - 10.0) * 1.0).abs() < 1e-12);
        let oracle = brute_force_log2_inf(&curve, -10.0, 5.0, -60.0, 4000.0, 1e-2);
        assert!((r.log2_value - oracle).abs() < 2e-2, "slow approach: {oracle}");
    }

    #[test]
    fn interior_first_order_condition_anchored() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..200 {
            let curve = if rng.gen_bool(0.5) {
                FrontierCurve::exp_concave(rng.gen_range(-1.0..2.0), rng.gen_range(0.2..3.0)).unwrap()
            } else {
                FrontierCurve::softplus_concave(rng.gen_range(-1.0..2.0), rng.gen_range(0.2..3.0)).unwrap()
            };
            let j = rng.gen_range(1..31u32);
            let l = rng.gen_range(0.0..j as f64);
            let r = log2_inf(&curve, j, l).unwrap();
            if r.case == InfCase::Interior {
                let ss = r.sigma_star.unwrap();
                // (ab)^{S'(sigma*)} = b in log form
                let log2ab = l - j as f64;
                let resid = curve.slope(ss) * log2ab - l;
                assert!(
                    resid.abs() <= 1e-9 * l.abs().max(1.0),
                    "first-order residual {resid} for {curve:?} j={j} l={l}"
                );
            }
        }
    }

    #[test]
    fn oracle_equivalence_on_random_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for _ in 0..200 {
            let curve = if rng.gen_bool(0.5) {
                FrontierCurve::exp_concave(rng.gen_range(-1.0..2.0), rng.gen_range(0.3..2.0)).unwrap()
            } else {
                FrontierCurve::softplus_concave(rng.gen_range(-1.0..2.0), rng.gen_range(0.3..2.0)).unwrap()
            };
            let j = rng.gen_range(1..31u32);
            let l = rng.gen_range(0.0..j as f64);
            let r = log2_inf(&curve, j, l).unwrap();
            let oracle = brute_force_log2_inf_refined(&curve, -(j as f64), l, -60.0, 60.0, 1e-3);
            if r.log2_value == f64::NEG_INFINITY {
                assert!(oracle < -1e4, "zero case but oracle {oracle} for {curve:?} j={j} l={l}");
            } else {
                assert!(
                    (r.log2_value - oracle).abs() <= 1e-3,
                    "{curve:?} j={j} l={l}: {} vs {oracle}",
                    r.log2_value
                );
            }
        }
    }

    #[test]
    fn monotone_in_j_while_interior() {
        // For fixed b >= 1 and S > 0 near the minimizer, deeper scales can
        // only shrink the infimum.
        let curve = FrontierCurve::exp_concave(2.0, 1.0).unwrap();
        let l = 2.0;
        let mut prev = f64::INFINITY;
        for j in 3..30 {
            let r = log2_inf(&curve, j, l).unwrap();
            assert_eq!(r.case, InfCase::Interior);
            assert!(r.log2_value <= prev + 1e-12);
            prev = r.log2_value;
        }
    }

    #[test]
    fn tecnico_sup_negative() {
        let grid = SigmaGrid::new(-30.0, 30.0, 0.05).unwrap();
        let lin = FrontierCurve::linear(1.0, 0.5).unwrap();
        assert!(tecnico_sup(&lin, 0.0, 0.1, &grid) < 0.0);
        let exp = FrontierCurve::exp_concave(1.0, 1.0).unwrap();
        assert!(tecnico_sup(&exp, 0.0, 0.5, &grid) < 0.0);
    }

    #[test]
    fn tecnico_sup_at_sigma0_reduces_to_eps_term() {
        let curve = FrontierCurve::exp_concave(1.0, 1.0).unwrap();
        let eps = 0.25;
        let grid = SigmaGrid::new(0.0, 0.5, 0.5).unwrap(); // contains sigma0 = 0
        let expected = eps / (curve.slope(0.0) - 1.0);
        let got = tecnico_sup(&curve, 0.0, eps, &grid);
        assert!(got >= expected - 1e-12);
        assert!(expected < 0.0);
    }
}
