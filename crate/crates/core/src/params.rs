//! Problem exponents, the explicit constants `c_E`, `c_V`, the Lorentz
//! exponent arithmetic and the Hardy threshold for power data.
//!
//! All parameter validation lives here; downstream modules take
//! [`ProblemParams`] as already valid.

use std::fmt;

use crate::error::{Error, Result};

const MODULE: &str = "params";

/// Integrability exponent `γ`, either a positive real or `∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gamma {
    Finite(f64),
    Infinite,
}

impl Gamma {
    pub fn finite(self) -> Option<f64> {
        match self {
            Gamma::Finite(g) => Some(g),
            Gamma::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Gamma::Infinite)
    }
}

impl fmt::Display for Gamma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gamma::Finite(g) => write!(f, "{g}"),
            Gamma::Infinite => f.write_str("inf"),
        }
    }
}

impl std::str::FromStr for Gamma {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        if t == "inf" || t == "infinity" || t == "∞" {
            return Ok(Gamma::Infinite);
        }
        t.parse::<f64>()
            .map(Gamma::Finite)
            .map_err(|_| Error::invalid(MODULE, "parse_gamma", format!("not a number or 'inf': {s}")))
    }
}

/// Exponents `p`, `q`, `γ` of `−Δ_{p,w} u = σ u^q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemParams {
    pub p: f64,
    pub q: f64,
    pub gamma: Gamma,
}

impl ProblemParams {
    /// Validated constructor: `1 < p < ∞`, `0 ≤ q < p − 1`, `γ > 0` or `γ = ∞`.
    pub fn new(p: f64, q: f64, gamma: Gamma) -> Result<Self> {
        check_p(p, "new")?;
        check_q(p, q, "new")?;
        if let Gamma::Finite(g) = gamma {
            if !(g.is_finite() && g > 0.0) {
                return Err(Error::invalid(MODULE, "new", format!("gamma must be > 0 or inf, got {g}")));
            }
        }
        Ok(ProblemParams { p, q, gamma })
    }

    /// Exponent `(γ + q)(p − 1)/(p − 1 − q)` of the energy that controls the
    /// `L^{γ+q}(σ)` solvability criterion.
    pub fn criterion_exponent(&self) -> Option<f64> {
        self.gamma.finite().map(|g| criterion_exponent(self.p, self.q, g))
    }

    /// `(p − 1)/(p − 1 − q)`, the power that turns `Wσ` into the scale of `u`.
    pub fn envelope_power(&self) -> f64 {
        (self.p - 1.0) / (self.p - 1.0 - self.q)
    }
}

/// `(γ + q)(p − 1)/(p − 1 − q)`.
pub fn criterion_exponent(p: f64, q: f64, gamma: f64) -> f64 {
    (gamma + q) * (p - 1.0) / (p - 1.0 - q)
}

pub(crate) fn check_p(p: f64, op: &'static str) -> Result<()> {
    if p.is_finite() && p > 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(MODULE, op, format!("p must satisfy 1 < p < inf, got {p}")))
    }
}

pub(crate) fn check_q(p: f64, q: f64, op: &'static str) -> Result<()> {
    if q.is_finite() && q >= 0.0 && q < p - 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(MODULE, op, format!("q must satisfy 0 <= q < p - 1 = {}, got {q}", p - 1.0)))
    }
}

/// The pair of explicit constants appearing in the constant chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SharpConstants {
    /// `((p − 1 + γ)/p)^p / γ`
    pub c_e: f64,
    /// `((p − 1 − q)/(p − 1))^{(p−1)/(p−1−q)}`, in `(0, 1]`
    pub c_v: f64,
}

/// `c_E` for a finite `γ`.
pub fn c_e(p: f64, gamma: f64) -> f64 {
    ((p - 1.0 + gamma) / p).powf(p) / gamma
}

/// `c_V`, equal to 1 at `q = 0`.
pub fn c_v(p: f64, q: f64) -> f64 {
    let a = p - 1.0 - q;
    (a / (p - 1.0)).powf((p - 1.0) / a)
}

pub fn constants(params: &ProblemParams) -> Result<SharpConstants> {
    let gamma = params
        .gamma
        .finite()
        .ok_or_else(|| Error::invalid(MODULE, "constants", "c_E is undefined for gamma = inf"))?;
    Ok(SharpConstants {
        c_e: c_e(params.p, gamma),
        c_v: c_v(params.p, params.q),
    })
}

/// Lorentz exponents `(s, t)` of the data space and `(r, ρ)` of the solution
/// space in dimension `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzExponents {
    pub s: f64,
    pub t: f64,
    pub r: f64,
    pub rho: f64,
}

pub fn lorentz_exponents(n: u32, params: &ProblemParams) -> Result<LorentzExponents> {
    let (p, q) = (params.p, params.q);
    let nf = f64::from(n);
    if p >= nf {
        return Err(Error::invalid(
            MODULE,
            "lorentz_exponents",
            format!("requires 1 < p < n, got p = {p}, n = {n}"),
        ));
    }
    Ok(match params.gamma {
        Gamma::Finite(g) => LorentzExponents {
            s: nf * (p - 1.0 + g) / (nf * (p - 1.0 - q) + p * (g + q)),
            t: (p - 1.0 + g) / (p - 1.0 - q),
            r: nf * (p - 1.0 + g) / (nf - p),
            rho: p - 1.0 + g,
        },
        // limits as γ → ∞
        Gamma::Infinite => LorentzExponents {
            s: nf / p,
            t: f64::INFINITY,
            r: f64::INFINITY,
            rho: f64::INFINITY,
        },
    })
}

/// Threshold `α*` for `σ = (1 − |x|)^{−α}` against `w = (1 − |x|)^β`: finite
/// energy solutions exist iff `α < α*`.
pub fn hardy_threshold(p: f64, q: f64, beta: f64) -> Result<f64> {
    check_p(p, "hardy_threshold")?;
    check_q(p, q, "hardy_threshold")?;
    if !(beta > -1.0 && beta < p - 1.0) {
        return Err(Error::invalid(
            MODULE,
            "hardy_threshold",
            format!("beta must lie in (-1, p - 1) = (-1, {}), got {beta}", p - 1.0),
        ));
    }
    Ok(1.0 + (1.0 + q) * (1.0 - 1.0 / p) * (1.0 - beta / (p - 1.0)))
}

/// Upper end `p − β` of the window in which the power problem has a bounded
/// solution.
pub fn bounded_window(p: f64, beta: f64) -> f64 {
    p - beta
}
