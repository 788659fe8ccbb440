//! Truncated Wolff potentials
//! `W^R μ(x) = ∫_0^R (r^p μ(B(x,r)) / w(B(x,r)))^{1/(p−1)} dr/r`
//! and a two-sided comparison against the solver.

use std::cell::RefCell;
use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::measures::RadonMeasure;
use crate::params::check_p;
use crate::quad::adaptive;
use crate::solver::solve_dirichlet;
use crate::weights::Weight;

const MODULE: &str = "wolff";
const REL_TOL: f64 = 1e-11;
/// Width of the small-radius band, relative to the outer radius.
const SMALL_BAND: f64 = 1e-12;

/// `2·diam(−1, 1)`.
pub const DEFAULT_RADIUS: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WolffSample {
    pub x: f64,
    pub radius: f64,
    pub value: f64,
}

pub fn wolff_truncated(p: f64, w: &Weight, mu: &RadonMeasure, x: f64, radius: f64) -> Result<WolffSample> {
    check_p(p, "wolff_truncated")?;
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::invalid(MODULE, "wolff_truncated", format!("radius must be finite and > 0, got {radius}")));
    }
    if !(x > -1.0 && x < 1.0) {
        return Err(Error::invalid(MODULE, "wolff_truncated", format!("x must lie in (-1, 1), got {x}")));
    }
    let value = wolff_value(p, w, mu, x, radius)?;
    Ok(WolffSample { x, radius, value })
}

fn wolff_value(p: f64, w: &Weight, mu: &RadonMeasure, x: f64, radius: f64) -> Result<f64> {
    if mu.is_zero() {
        return Ok(0.0);
    }
    if mu.ball_mass(x, radius)?.is_infinite() {
        return Ok(f64::INFINITY);
    }
    let inv = 1.0 / (p - 1.0);
    let c = Point::new(x);
    let r_full = c.gap_to(&Point::LEFT_END).abs().max(c.gap_to(&Point::RIGHT_END).abs());

    let err: RefCell<Option<Error>> = RefCell::new(None);
    let g = |r: f64| -> f64 {
        let m = match mu.ball_mass(x, r) {
            Ok(m) => m,
            Err(e) => {
                err.borrow_mut().get_or_insert(e);
                return 0.0;
            }
        };
        if m == 0.0 {
            return 0.0;
        }
        match w.ball_weight(x, r) {
            Ok(wt) => (r.powf(p) * m / wt).powf(inv) / r,
            Err(e) => {
                err.borrow_mut().get_or_insert(e);
                0.0
            }
        }
    };

    let r_top = radius.min(r_full);
    let mut total = 0.0;

    // (0, r_min): power-law model of the integrand
    let r_min = r_top * SMALL_BAND;
    let at_x: f64 = mu.atoms().iter().filter(|a| a.point == c).map(|a| a.mass).sum();
    if at_x > 0.0 {
        total += (at_x / (2.0 * w.eval(c))).powf(inv) * r_min;
    } else {
        let g1 = g(r_min);
        let g2 = g(0.5 * r_min);
        if g1 > 0.0 && g2 > 0.0 {
            let e = (g1 / g2).log2();
            if e <= -1.0 {
                return Ok(f64::INFINITY);
            }
            total += g1 * r_min / (e + 1.0);
        } else {
            total += g1 * r_min;
        }
    }

    // [r_min, r_top]: adaptive in log r between breakpoints
    let mut cuts: Vec<f64> = mu
        .features()
        .iter()
        .chain(mu.atoms().iter().map(|a| &a.point))
        .map(|pt| c.gap_to(pt).abs())
        .chain([c.gap_to(&Point::LEFT_END).abs(), c.gap_to(&Point::RIGHT_END).abs()])
        .filter(|&r| r > r_min && r < r_top)
        .collect();
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    cuts.dedup();
    let mut lo = r_min;
    for hi in cuts.into_iter().chain(std::iter::once(r_top)) {
        if hi > lo {
            let res = adaptive(
                |s| {
                    let r = s.exp();
                    g(r) * r
                },
                lo.ln(),
                hi.ln(),
                1e-300,
                REL_TOL,
                400,
            );
            if let Some(e) = err.borrow_mut().take() {
                return Err(e);
            }
            if !res.converged {
                return Err(Error::Quadrature {
                    module: MODULE,
                    op: "wolff_truncated",
                    estimate: res.error,
                    tolerance: REL_TOL * res.value.abs(),
                });
            }
            total += res.value;
        }
        lo = hi;
    }

    // [r_full, R]: the ball covers the interval
    if radius > r_full {
        let m = mu.total_mass()?;
        let wt = w.interval_weight(Point::LEFT_END, Point::RIGHT_END)?;
        let e = p * inv;
        total += (m / wt).powf(inv) * (radius.powf(e) - r_full.powf(e)) / e;
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioSample {
    pub x: f64,
    pub u: f64,
    pub wolff: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioReport {
    pub samples: Vec<RatioSample>,
    /// `min u/W^R` over samples with `W^R > 0`; `None` when there are none.
    pub min_ratio: Option<f64>,
    pub max_ratio: Option<f64>,
    /// Both extreme ratios finite and positive (vacuous for an empty report).
    pub passed: bool,
}

/// Samples `u = W_{p,w}μ` and `W^R μ` at `n` evenly spaced points of
/// `[−1 + margin, 1 − margin]`.
pub fn ratio_report(p: f64, w: &Weight, mu: &RadonMeasure, margin: f64, radius: f64, n: usize) -> Result<RatioReport> {
    if !(margin > 0.0 && margin < 1.0) {
        return Err(Error::invalid(MODULE, "ratio_report", format!("margin must lie in (0, 1), got {margin}")));
    }
    if n < 2 {
        return Err(Error::invalid(MODULE, "ratio_report", "need at least two sample points"));
    }
    if mu.is_zero() {
        return Ok(RatioReport {
            samples: Vec::new(),
            min_ratio: None,
            max_ratio: None,
            passed: true,
        });
    }
    let sol = solve_dirichlet(p, w, mu)?;
    let a = -1.0 + margin;
    let h = 2.0 * (1.0 - margin) / (n - 1) as f64;
    let mut samples = Vec::with_capacity(n);
    for i in 0..n {
        let x = a + h * i as f64;
        let wolff = wolff_truncated(p, w, mu, x, radius)?.value;
        samples.push(RatioSample {
            x,
            u: sol.value_at(x),
            wolff,
        });
    }
    let ratios: Vec<f64> = samples.iter().filter(|s| s.wolff > 0.0).map(|s| s.u / s.wolff).collect();
    let min_ratio = ratios.iter().copied().reduce(f64::min);
    let max_ratio = ratios.iter().copied().reduce(f64::max);
    let passed = match (min_ratio, max_ratio) {
        (Some(lo), Some(hi)) => lo > 0.0 && hi.is_finite(),
        _ => true,
    };
    Ok(RatioReport {
        samples,
        min_ratio,
        max_ratio,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    // δ_0, p = 2, w ≡ 1: integrand r/|B(x,r) ∩ (−1,1)| on {r > |x|}
    fn dirac_oracle(x: f64, radius: f64) -> f64 {
        let a = x.abs();
        let seg = |lo: f64, hi: f64, f: &dyn Fn(f64) -> f64| if hi > lo { f(hi) - f(lo) } else { 0.0 };
        let r1 = (1.0 - a).clamp(a, radius.max(a));
        let r2 = (1.0 + a).min(radius);
        seg(a, r1, &|r| 0.5 * r)
            + seg(r1, r2, &|r| r - (1.0 - a) * (1.0 - a + r).ln())
            + seg(r2, radius, &|r| 0.25 * r * r)
    }

    #[test]
    fn dirac_at_centre() {
        let mu = RadonMeasure::dirac(0.0, 1.0).unwrap();
        let w = Weight::constant();
        let s = wolff_truncated(2.0, &w, &mu, 0.0, 0.5).unwrap();
        assert!(rel(s.value, 0.25) < 1e-12, "{}", s.value);
        for p in [1.5, 2.0, 3.0, 5.0] {
            for r in [0.1, 0.7, 1.0] {
                let v = wolff_truncated(p, &w, &mu, 0.0, r).unwrap().value;
                assert!(rel(v, 2f64.powf(-1.0 / (p - 1.0)) * r) < 1e-12, "p={p} r={r} {v}");
            }
        }
    }

    #[test]
    fn dirac_off_centre_matches_closed_form() {
        let mu = RadonMeasure::dirac(0.0, 1.0).unwrap();
        let w = Weight::constant();
        for x in [-0.6, -0.1, 0.3, 0.9] {
            for r in [0.2, 1.2, 4.0] {
                let v = wolff_truncated(2.0, &w, &mu, x, r).unwrap().value;
                let want = dirac_oracle(x, r);
                assert!(rel(v, want) < 1e-9 || (want == 0.0 && v == 0.0), "x={x} r={r} {v} {want}");
            }
        }
    }

    #[test]
    fn lebesgue_at_centre() {
        // μ(B) = w(B) for every r, so the integrand is r^{1/(p−1)}
        let mu = RadonMeasure::lebesgue();
        let w = Weight::constant();
        let v = wolff_truncated(2.0, &w, &mu, 0.0, 0.5).unwrap().value;
        assert!(rel(v, 0.125) < 1e-10, "{v}");
        let p: f64 = 3.0;
        let e = p / (p - 1.0);
        let v = wolff_truncated(p, &w, &mu, 0.0, 2.0).unwrap().value;
        let want = (1.0 + (2f64.powf(e) - 1.0)) / e;
        assert!(rel(v, want) < 1e-10, "{v} {want}");
    }

    #[test]
    fn infinite_mass_near_boundary() {
        let mu = RadonMeasure::power(1.5, 1.0).unwrap();
        let w = Weight::constant();
        assert!(wolff_truncated(2.0, &w, &mu, 0.0, 1.5).unwrap().value.is_infinite());
        assert!(wolff_truncated(2.0, &w, &mu, 0.0, 0.5).unwrap().value.is_finite());
    }

    #[test]
    fn rejects_bad_input() {
        let mu = RadonMeasure::lebesgue();
        let w = Weight::constant();
        assert!(wolff_truncated(2.0, &w, &mu, 0.0, 0.0).is_err());
        assert!(wolff_truncated(2.0, &w, &mu, 1.0, 1.0).is_err());
        assert!(wolff_truncated(1.0, &w, &mu, 0.0, 1.0).is_err());
        assert_eq!(wolff_truncated(2.0, &w, &RadonMeasure::zero(), 0.0, 1.0).unwrap().value, 0.0);
    }

    #[test]
    fn ratio_band_for_dirac() {
        let mu = RadonMeasure::dirac(0.0, 1.0).unwrap();
        let w = Weight::constant();
        let rep = ratio_report(2.0, &w, &mu, 0.5, DEFAULT_RADIUS, 21).unwrap();
        assert!(rep.passed);
        let (lo, hi) = (rep.min_ratio.unwrap(), rep.max_ratio.unwrap());
        // u = (1 − |x|)/2 against the closed-form Wolff potential
        let mut want_lo = f64::INFINITY;
        let mut want_hi: f64 = 0.0;
        for s in &rep.samples {
            let r = 0.5 * (1.0 - s.x.abs()) / dirac_oracle(s.x, DEFAULT_RADIUS);
            want_lo = want_lo.min(r);
            want_hi = want_hi.max(r);
        }
        assert!(rel(lo, want_lo) < 1e-9 && rel(hi, want_hi) < 1e-9, "{lo} {hi} {want_lo} {want_hi}");
    }

    #[test]
    fn ratio_report_edge_cases() {
        let w = Weight::constant();
        let rep = ratio_report(2.0, &w, &RadonMeasure::zero(), 0.5, DEFAULT_RADIUS, 5).unwrap();
        assert!(rep.samples.is_empty() && rep.min_ratio.is_none() && rep.passed);
        let rep = ratio_report(2.5, &w, &RadonMeasure::lebesgue(), 0.1, DEFAULT_RADIUS, 17).unwrap();
        assert!(rep.passed);
        assert!(rep.min_ratio.unwrap() > 0.0 && rep.max_ratio.unwrap() < 10.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn monotone_and_homogeneous(
            p in 1.3f64..4.0,
            x in -0.9f64..0.9,
            y in -0.95f64..0.95,
            m in 0.1f64..3.0,
            c in 0.0f64..2.0,
            a in 0.1f64..10.0,
            r1 in 0.05f64..2.0,
            r2 in 0.05f64..2.0,
        ) {
            let w = Weight::power(0.4 * (p - 1.0)).unwrap();
            let small = RadonMeasure::dirac(y, m).unwrap();
            let big = small.add(&RadonMeasure::constant(c).unwrap());
            let (ra, rb) = (r1.min(r2), r1.max(r2));
            let v_small = wolff_truncated(p, &w, &small, x, rb).unwrap().value;
            let v_big = wolff_truncated(p, &w, &big, x, rb).unwrap().value;
            let v_short = wolff_truncated(p, &w, &big, x, ra).unwrap().value;
            prop_assert!(v_small <= v_big * (1.0 + 1e-10));
            prop_assert!(v_short <= v_big * (1.0 + 1e-10));
            let scaled = wolff_truncated(p, &w, &big.scale(a), x, rb).unwrap().value;
            prop_assert!(rel(scaled, a.powf(1.0 / (p - 1.0)) * v_big) < 1e-10);
        }
    }
}
