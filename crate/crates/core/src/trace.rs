//! Bounds for the best constant `C_T` in
//! `‖f‖_{L^{1+q}(σ)} ≤ C_T ‖f′‖_{L^p(w)}`, from the energy
//! `E = ∫(Wσ)^{(1+q)(p−1)/(p−1−q)} dσ` and from Rayleigh quotients.

use crate::energy::energy_limit;
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::measures::RadonMeasure;
use crate::params::{c_v, check_p};
use crate::solver::{NodalFunction, Solver, SolverConfig};
use crate::weights::Weight;

const MODULE: &str = "trace";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceBracket {
    /// `[(1+q)^{(1+q)/(p−1−q)} c_V^{1+q} E]^{1/X}`, `X = (1+q)p/(p−1−q)`
    pub lower: f64,
    /// `E^{1/X}`
    pub upper: f64,
    pub energy_value: f64,
    pub diverged: bool,
}

fn check_q_trace(p: f64, q: f64, op: &'static str) -> Result<()> {
    if q.is_finite() && q > -1.0 && q < p - 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(MODULE, op, format!("q must lie in (-1, p - 1) = (-1, {}), got {q}", p - 1.0)))
    }
}

/// `X = (1+q)p/(p−1−q)`, the power of `C_T` comparable to `E`.
pub fn trace_exponent(p: f64, q: f64) -> f64 {
    (1.0 + q) * p / (p - 1.0 - q)
}

/// Ratio `upper^X / lower^X` of the two ends of the bracket.
pub fn bracket_factor(p: f64, q: f64) -> f64 {
    let a = p - 1.0 - q;
    (1.0 / (1.0 + q)).powf((1.0 + q) / a) / c_v(p, q).powf(1.0 + q)
}

pub fn trace_bracket(p: f64, w: &Weight, sigma: &RadonMeasure, q: f64, cfg: &SolverConfig) -> Result<TraceBracket> {
    check_p(p, "trace_bracket")?;
    check_q_trace(p, q, "trace_bracket")?;
    cfg.validate()?;
    if sigma.is_zero() {
        return Ok(TraceBracket {
            lower: 0.0,
            upper: 0.0,
            energy_value: 0.0,
            diverged: false,
        });
    }
    let solver = Solver::for_measures(p, w, &cfg.mesh, &[sigma])?;
    let dm = solver.discretize(sigma)?;
    let s = (1.0 + q) * (p - 1.0) / (p - 1.0 - q);
    let lim = energy_limit(&solver, &dm, dm.features_level(&sigma.features()), s, cfg)?;
    let x = trace_exponent(p, q);
    if lim.diverged {
        return Ok(TraceBracket {
            lower: f64::INFINITY,
            upper: f64::INFINITY,
            energy_value: f64::INFINITY,
            diverged: true,
        });
    }
    let e = lim.value;
    Ok(TraceBracket {
        lower: (e / bracket_factor(p, q)).powf(1.0 / x),
        upper: e.powf(1.0 / x),
        energy_value: e,
        diverged: false,
    })
}

/// Members of the Rayleigh-quotient family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TestFunction {
    /// `(Wσ_k)^{(p−1)/(p−1−q)}` for every truncation level up to the one
    /// where `Wσ` settled (the untruncated potential when `σ` is finite).
    PotentialPowers,
    /// Piecewise linear, `1` at `apex`, `0` at `±1`.
    Hat { apex: f64 },
}

/// Potential powers plus a hat on every atom.
pub fn default_family(sigma: &RadonMeasure) -> Vec<TestFunction> {
    let mut f = vec![TestFunction::PotentialPowers];
    f.extend(sigma.atoms().iter().map(|a| TestFunction::Hat { apex: a.point.x() }));
    f
}

#[derive(Debug, Clone, PartialEq)]
pub struct RayleighReport {
    /// `max ‖f‖_{L^{1+q}(σ)} / ‖f′‖_{L^p(w)}` over the family.
    pub best: f64,
    /// Each evaluated quotient with a short label.
    pub quotients: Vec<(String, f64)>,
}

/// Lower bound for `C_T`. For infinite `σ` the norms are taken against the
/// same truncation `σ_k` as the test function, which can only lower them.
pub fn rayleigh_lower(
    p: f64,
    w: &Weight,
    sigma: &RadonMeasure,
    q: f64,
    family: &[TestFunction],
    cfg: &SolverConfig,
) -> Result<RayleighReport> {
    check_p(p, "rayleigh_lower")?;
    check_q_trace(p, q, "rayleigh_lower")?;
    cfg.validate()?;
    if family.is_empty() {
        return Err(Error::invalid(MODULE, "rayleigh_lower", "family must be nonempty"));
    }
    let solver = Solver::for_measures(p, w, &cfg.mesh, &[sigma])?;
    let full = solver.discretize(sigma)?;
    let s = 1.0 + q;
    let theta = (p - 1.0) / (p - 1.0 - q);
    let mut quotients = Vec::new();
    for member in family {
        match *member {
            TestFunction::PotentialPowers => {
                if sigma.is_zero() {
                    continue;
                }
                let lvl0 = cfg.min_level.max(full.features_level(&sigma.features()));
                let base = solver.potential_discrete(&full, lvl0, cfg)?;
                let levels: Vec<u32> = match base.truncation_levels_used {
                    0 => vec![0],
                    top => (lvl0..=top).collect(),
                };
                let mut hint = None;
                for k in levels {
                    let dm = if k == 0 { full.clone() } else { full.truncated(k)? };
                    let sol = solver.solve(&dm, hint)?;
                    hint = Some(sol.flux_offset());
                    let num = sol.moment_against(&dm, theta * s).powf(1.0 / s);
                    let den = sol.power_gradient_energy(theta).powf(1.0 / p);
                    if den > 0.0 && num.is_finite() {
                        quotients.push((format!("potential k={k}"), num / den));
                    }
                }
            }
            TestFunction::Hat { apex } => {
                if !(apex > -1.0 && apex < 1.0) {
                    return Err(Error::invalid(MODULE, "rayleigh_lower", format!("hat apex must lie in (-1, 1), got {apex}")));
                }
                let c = Point::new(apex);
                let (ll, lr) = (c.gap_to(&Point::LEFT_END).abs(), c.gap_to(&Point::RIGHT_END).abs());
                let grad = w.interval_weight(Point::LEFT_END, c)? / ll.powf(p) + w.interval_weight(c, Point::RIGHT_END)? / lr.powf(p);
                let hat = NodalFunction::zero(solver.mesh().clone()).map_points(|pt, _| {
                    if pt.cmp_pos(&c).is_lt() {
                        Point::LEFT_END.gap_to(&pt).abs() / ll
                    } else {
                        Point::RIGHT_END.gap_to(&pt).abs() / lr
                    }
                });
                let dm = if full.is_finite() { full.clone() } else { full.truncated(cfg.max_level)? };
                let num = hat.moment(&dm, s).powf(1.0 / s);
                quotients.push((format!("hat x={apex}"), num / grad.powf(1.0 / p)));
            }
        }
    }
    let best = quotients.iter().map(|q| q.1).fold(0.0, f64::max);
    Ok(RayleighReport { best, quotients })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn dirac_q0_is_tight() {
        let w = Weight::constant();
        let d = RadonMeasure::dirac(0.0, 1.0).unwrap();
        let cfg = SolverConfig::default();
        let b = trace_bracket(2.0, &w, &d, 0.0, &cfg).unwrap();
        let want = 0.5f64.sqrt();
        assert!(rel(b.lower, want) < 1e-12 && rel(b.upper, want) < 1e-12, "{b:?}");
        assert!((bracket_factor(2.0, 0.0) - 1.0).abs() < 1e-15);
        assert!((bracket_factor(3.7, 0.0) - 1.0).abs() < 1e-15);
        let r = rayleigh_lower(2.0, &w, &d, 0.0, &[TestFunction::Hat { apex: 0.0 }], &cfg).unwrap();
        assert!(rel(r.best, want) < 1e-12, "{r:?}");
        let r = rayleigh_lower(2.0, &w, &d, 0.0, &default_family(&d), &cfg).unwrap();
        assert!(rel(r.best, want) < 1e-12);
    }

    #[test]
    fn zero_measure_and_bad_input() {
        let w = Weight::constant();
        let cfg = SolverConfig::default();
        let b = trace_bracket(2.0, &w, &RadonMeasure::zero(), 0.5, &cfg).unwrap();
        assert_eq!((b.lower, b.upper), (0.0, 0.0));
        let d = RadonMeasure::dirac(0.0, 1.0).unwrap();
        assert!(rayleigh_lower(2.0, &w, &d, 0.5, &[], &cfg).is_err());
        assert!(trace_bracket(2.0, &w, &d, 1.0, &cfg).is_err());
    }

    #[test]
    fn bracket_ratio_and_rayleigh_inside() {
        let w = Weight::constant();
        let cfg = SolverConfig::default();
        let (p, q) = (2.0, 0.5);
        let leb = RadonMeasure::lebesgue();
        let b = trace_bracket(p, &w, &leb, q, &cfg).unwrap();
        let x = trace_exponent(p, q);
        assert!(rel((b.upper / b.lower).powf(x), bracket_factor(p, q)) < 1e-12);
        let r = rayleigh_lower(p, &w, &leb, q, &default_family(&leb), &cfg).unwrap();
        assert!(r.best <= b.upper * (1.0 + 1e-6), "{} {}", r.best, b.upper);
        assert!(r.best >= b.lower * (1.0 - 1e-6), "{} {}", r.best, b.lower);

        let d = RadonMeasure::dirac(0.0, 1.0).unwrap();
        let b = trace_bracket(p, &w, &d, q, &cfg).unwrap();
        let r = rayleigh_lower(p, &w, &d, q, &default_family(&d), &cfg).unwrap();
        assert!(r.best <= b.upper * (1.0 + 1e-6) && r.best >= b.lower);
    }

    #[test]
    fn scaling_law() {
        let w = Weight::power(0.3).unwrap();
        let cfg = SolverConfig::default();
        let (p, q, a): (f64, f64, f64) = (2.5, 0.7, 3.0);
        let sigma = RadonMeasure::dirac(0.2, 0.5).unwrap().add(&RadonMeasure::power(0.4, 1.0).unwrap());
        let b1 = trace_bracket(p, &w, &sigma, q, &cfg).unwrap();
        let b2 = trace_bracket(p, &w, &sigma.scale(a), q, &cfg).unwrap();
        let s = (1.0 + q) * (p - 1.0) / (p - 1.0 - q);
        let k = a.powf((p - 1.0 + s) / (p - 1.0) / trace_exponent(p, q));
        assert!(rel(b2.upper, k * b1.upper) < 1e-9 && rel(b2.lower, k * b1.lower) < 1e-9);
    }

    #[test]
    fn infinite_measure() {
        let w = Weight::constant();
        let cfg = SolverConfig::default();
        // α = 1.5 < α* = 1.75: finite energy, truncated potentials in the family
        let sigma = RadonMeasure::power(1.5, 1.0).unwrap();
        let b = trace_bracket(2.0, &w, &sigma, 0.5, &cfg).unwrap();
        assert!(!b.diverged && b.upper.is_finite());
        let r = rayleigh_lower(2.0, &w, &sigma, 0.5, &default_family(&sigma), &cfg).unwrap();
        assert!(r.quotients.len() > 1 && r.best <= b.upper * (1.0 + 1e-6));
        let b = trace_bracket(2.0, &w, &RadonMeasure::power(1.9, 1.0).unwrap(), 0.5, &cfg).unwrap();
        assert!(b.diverged);
    }
}
