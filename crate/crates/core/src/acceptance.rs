//! The acceptance suite: eleven criteria, each reduced to one pass/fail line.
//! Randomized instances come from a seeded ChaCha stream, so a given seed
//! always replays the same cases.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::energy::{energy, mee_bound, quasi_additivity_check};
use crate::error::Result;
use crate::geometry::Point;
use crate::measures::RadonMeasure;
use crate::params::{c_v, hardy_threshold, Gamma};
use crate::solver::{solve_dirichlet, PotentialResult, Solver, SolverConfig};
use crate::sublinear::{
    default_alpha_grid, finite_energy_check, hardy_sweep, iterate, iterated_inequality_check, manufactured_solution,
    verify_equivalence, IterationConfig, SweepConfig, CHAIN_TOL, ENERGY_TOL,
};
use crate::trace::{default_family, rayleigh_lower, trace_bracket};
use crate::weights::Weight;
use crate::wolff::{wolff_truncated, DEFAULT_RADIUS};

pub const DEFAULT_SEED: u64 = 0x5eed_2024;

pub const CRITERIA: [(u32, &str); 11] = [
    (1, "Dirac Green function"),
    (2, "exact power family"),
    (3, "energy identity"),
    (4, "manufactured sandwich"),
    (5, "constant chain"),
    (6, "lower envelope"),
    (7, "iterated inequality"),
    (8, "Hardy threshold sweep"),
    (9, "trace bracket"),
    (10, "sharp energy bound"),
    (11, "property suite"),
];

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {:>2} {}: {}", self.id, self.name, self.detail)
    }
}

/// Runs one criterion; errors from the numerics count as a failure.
pub fn run_criterion(id: u32, seed: u64) -> Outcome {
    let name = CRITERIA.iter().find(|c| c.0 == id).map_or("unknown", |c| c.1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (id as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let res = match id {
        1 => dirac_green(),
        2 => exact_family(),
        3 => energy_identity(&mut rng),
        4 => manufactured(),
        5 => constant_chain(&mut rng),
        6 => lower_envelope_dominance(&mut rng),
        7 => iterated_inequality(&mut rng),
        8 => hardy_threshold_sweep(),
        9 => bracket(&mut rng),
        10 => sharp_energy(),
        11 => properties(&mut rng),
        _ => Ok((false, "no such criterion".to_string())),
    };
    let (passed, detail) = res.unwrap_or_else(|e| (false, format!("error: {e}")));
    Outcome { id, name, passed, detail }
}

pub fn run_all(seed: u64) -> Vec<Outcome> {
    CRITERIA.iter().map(|c| run_criterion(c.0, seed)).collect()
}

type Verdict = Result<(bool, String)>;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn max_err(r: &PotentialResult, f: impl Fn(Point) -> f64) -> f64 {
    r.u.points().iter().zip(r.u.values()).map(|(pt, v)| (v - f(*pt)).abs()).fold(0.0, f64::max)
}

fn quick() -> IterationConfig {
    IterationConfig {
        keep_iterates: false,
        ..IterationConfig::default()
    }
}

fn random_p(rng: &mut ChaCha8Rng) -> f64 {
    rng.gen_range(1.5..3.5)
}

fn random_weight(rng: &mut ChaCha8Rng, p: f64) -> Result<Weight> {
    if rng.gen_bool(0.3) {
        return Ok(Weight::constant());
    }
    Weight::power(rng.gen_range(-0.5..(0.5f64).min(0.5 * (p - 1.0))))
}

/// One to three atoms, sometimes plus a constant or an integrable power density.
fn random_finite(rng: &mut ChaCha8Rng) -> Result<RadonMeasure> {
    let n = rng.gen_range(1..=3);
    let atoms: Vec<(f64, f64)> = (0..n).map(|_| (rng.gen_range(-0.9..0.9), rng.gen_range(0.1..2.0))).collect();
    let mut m = RadonMeasure::atoms_at(&atoms)?;
    if rng.gen_bool(0.5) {
        m = m.add(&RadonMeasure::constant(rng.gen_range(0.1..1.5))?);
    }
    if rng.gen_bool(0.3) {
        m = m.add(&RadonMeasure::power(rng.gen_range(0.0..0.9), rng.gen_range(0.1..1.0))?);
    }
    Ok(m)
}

fn dirac_green() -> Verdict {
    let w = Weight::constant();
    let d = RadonMeasure::dirac(0.0, 1.0)?;
    let mut worst: f64 = 0.0;
    for p in [1.5, 2.0, 3.0] {
        let r = solve_dirichlet(p, &w, &d)?;
        let k = 0.5f64.powf(1.0 / (p - 1.0));
        worst = worst.max(max_err(&r, |pt| k * pt.dist()));
    }
    Ok((worst <= 1e-8, format!("max error {worst:.3e} (tol 1e-8)")))
}

fn exact_family() -> Verdict {
    let cfg = SolverConfig::default();
    let mut worst: f64 = 0.0;
    let mut n = 0;
    for p in [1.5, 2.0, 3.0] {
        for beta in [-0.5, 0.0, (0.5f64).min(0.5 * (p - 1.0))] {
            let a_max = 1.0 - beta / (p - 1.0);
            for f in [0.35, 0.6, 0.85] {
                let a = f * a_max;
                let w = Weight::power(beta)?;
                let mu = RadonMeasure::exact_family(p, beta, a)?;
                let r = crate::solver::potential(p, &w, &mu, &cfg)?;
                if r.diverged {
                    return Ok((false, format!("p={p} beta={beta} A={a}: potential diverged")));
                }
                worst = worst.max(max_err(&r, |pt| pt.dist().powf(a)));
                n += 1;
            }
        }
    }
    Ok((worst <= 1e-6, format!("{n} cases, max error {worst:.3e} (tol 1e-6)")))
}

fn energy_identity(rng: &mut ChaCha8Rng) -> Verdict {
    let cfg = SolverConfig::default();
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let p = random_p(rng);
        let w = random_weight(rng, p)?;
        let mu = random_finite(rng)?;
        for gamma in [0.5, 1.0, 2.0] {
            let r = energy(p, &w, &mu, gamma, &cfg)?;
            worst = worst.max(r.identity_gap);
        }
    }
    Ok((worst <= 1e-5, format!("30 cases, max relative gap {worst:.3e} (tol 1e-5)")))
}

fn manufactured() -> Verdict {
    let (p, q) = (3.0, 0.5);
    let w = Weight::constant();
    let sigma = RadonMeasure::manufactured(p, q)?;
    let rep = finite_energy_check(p, &w, &sigma, q, &quick())?;
    let err = rep.trace.u.max_abs_diff(&manufactured_solution(&rep.trace.u));
    let ok = rep.sandwich_pass && rep.identity_gap <= ENERGY_TOL && err <= 1e-5 && rep.trace.converged;
    Ok((
        ok,
        format!(
            "c_V^(1+q)E={:.6} <= {:.6} <= E={:.6}, weak-form gap {:.2e}, sup error {err:.2e}",
            c_v(p, q).powf(1.0 + q) * rep.energy,
            rep.grad_norm,
            rep.energy,
            rep.identity_gap
        ),
    ))
}

fn constant_chain(rng: &mut ChaCha8Rng) -> Verdict {
    let cfg = quick();
    let mut fails = Vec::new();
    for i in 0..10 {
        let p = random_p(rng);
        let q = rng.gen_range(0.1..0.9) * (p - 1.0);
        let w = random_weight(rng, p)?;
        let sigma = random_finite(rng)?;
        let gamma = match i % 4 {
            0 => Gamma::Finite(0.5),
            1 => Gamma::Finite(1.0),
            2 => Gamma::Finite(2.0),
            _ => Gamma::Infinite,
        };
        let r = verify_equivalence(p, &w, &sigma, q, gamma, &cfg)?;
        if !(r.upper_link && r.lower_link && !r.c2_infinite) {
            fails.push(format!("finite #{i} (c1={:.4e} c2={:.4e})", r.c1, r.c2));
        }
    }
    // α* < α < p − β, so Wσ is finite while the criterion integral is not
    let divergent = [(2.0, 0.0, 1.9, 0.5), (3.0, 0.5, 2.3, 1.0), (1.5, 0.0, 1.47, 0.25)];
    for (p, beta, alpha, q) in divergent {
        let sigma = RadonMeasure::power(alpha, 1.0)?;
        let r = verify_equivalence(p, &Weight::power(beta)?, &sigma, q, Gamma::Finite(1.0), &cfg)?;
        if !(r.c2_infinite && r.norms_exceeded_cap(cfg.solver.cap)) {
            fails.push(format!("divergent p={p} beta={beta} alpha={alpha} q={q}"));
        }
    }
    let detail = if fails.is_empty() {
        format!("10 finite instances within {CHAIN_TOL:e}, 3 divergent above cap")
    } else {
        format!("failed: {}", fails.join(", "))
    };
    Ok((fails.is_empty(), detail))
}

fn lower_envelope_dominance(rng: &mut ChaCha8Rng) -> Verdict {
    let cfg = quick();
    let mut cases: Vec<(f64, Weight, RadonMeasure, f64)> = vec![
        (2.0, Weight::constant(), RadonMeasure::dirac(0.0, 1.0)?, 0.5),
        (3.0, Weight::constant(), RadonMeasure::manufactured(3.0, 0.5)?, 0.5),
        (2.0, Weight::constant(), RadonMeasure::power(1.5, 1.0)?, 0.5),
        (2.5, Weight::power(0.3)?, RadonMeasure::lebesgue(), 0.8),
    ];
    for _ in 0..6 {
        let p = random_p(rng);
        let q = rng.gen_range(0.1..0.9) * (p - 1.0);
        cases.push((p, random_weight(rng, p)?, random_finite(rng)?, q));
    }
    let mut bad = 0usize;
    let mut worst: f64 = 0.0;
    for (p, w, sigma, q) in &cases {
        let t = iterate(*p, w, sigma, *q, Gamma::Finite(1.0), &cfg)?;
        // a node counts as violated beyond rounding of the stored values
        let v = t.envelope_violation();
        worst = worst.max(v / t.sup());
        if !t.converged || v > 1e-12 * t.sup() {
            bad += 1;
        }
    }
    Ok((bad == 0, format!("{} instances, {bad} with violations, max relative {worst:.1e}", cases.len())))
}

fn iterated_inequality(rng: &mut ChaCha8Rng) -> Verdict {
    let cfg = SolverConfig::default();
    let p = random_p(rng);
    let cases: Vec<(f64, Weight, RadonMeasure)> = vec![
        (2.0, Weight::constant(), RadonMeasure::dirac(0.0, 1.0)?),
        (3.0, Weight::power(0.5)?, RadonMeasure::lebesgue()),
        (2.0, Weight::constant(), RadonMeasure::power(1.5, 1.0)?),
        (p, random_weight(rng, p)?, random_finite(rng)?),
        (1.5, Weight::constant(), random_finite(rng)?),
    ];
    let mut bad = 0usize;
    let mut worst: f64 = 0.0;
    for (p, w, sigma) in &cases {
        for beta in [1.0, 1.5, 2.0] {
            let r = iterated_inequality_check(*p, w, sigma, beta, &cfg)?;
            worst = worst.max(r.max_violation / r.tolerance.max(f64::MIN_POSITIVE));
            if !r.passed {
                bad += 1;
            }
        }
    }
    Ok((bad == 0, format!("15 cases, {bad} failing, worst violation/tolerance {worst:.2e}")))
}

fn hardy_threshold_sweep() -> Verdict {
    let cfg = SweepConfig::default();
    let mut parts = Vec::new();
    let mut ok = true;
    for (p, beta, q) in [(2.0, 0.0, 0.5), (3.0, 1.0, 0.0), (2.0, 0.5, 0.25), (1.5, -0.25, 0.2)] {
        let alphas = default_alpha_grid(p, beta, q)?;
        let s = hardy_sweep(p, beta, q, &alphas, &cfg)?;
        let good = s.all_agree() && s.single_flip();
        ok &= good;
        parts.push(format!(
            "({p},{beta},{q}) a*={:.4}{}",
            hardy_threshold(p, q, beta)?,
            if good { "" } else { " MISMATCH" }
        ));
    }
    Ok((ok, parts.join("; ")))
}

fn bracket(rng: &mut ChaCha8Rng) -> Verdict {
    let cfg = SolverConfig::default();
    let w = Weight::constant();
    let d = RadonMeasure::dirac(0.0, 1.0)?;
    let b = trace_bracket(2.0, &w, &d, 0.0, &cfg)?;
    let r = rayleigh_lower(2.0, &w, &d, 0.0, &default_family(&d), &cfg)?;
    let want = 0.5f64.sqrt();
    let gap = rel(b.lower, want).max(rel(b.upper, want)).max(rel(r.best, want));
    let mut ok = gap <= 1e-9;
    let mut cases: Vec<(f64, Weight, RadonMeasure)> = vec![
        (2.0, Weight::constant(), d.clone()),
        (2.0, Weight::constant(), RadonMeasure::lebesgue()),
        (3.0, Weight::power(0.5)?, RadonMeasure::power(1.5, 1.0)?),
    ];
    for _ in 0..3 {
        let p = rng.gen_range(1.6..3.5);
        cases.push((p, random_weight(rng, p)?, random_finite(rng)?));
    }
    let mut worst: f64 = 0.0;
    for (p, w, sigma) in &cases {
        let b = trace_bracket(*p, w, sigma, 0.5, &cfg)?;
        let r = rayleigh_lower(*p, w, sigma, 0.5, &default_family(sigma), &cfg)?;
        worst = worst.max(r.best / b.upper);
        ok &= r.best <= b.upper * (1.0 + 1e-9);
    }
    Ok((ok, format!("q=0 Dirac gap {gap:.2e} (tol 1e-9); q=0.5 max rayleigh/upper {worst:.9}")))
}

fn sharp_energy() -> Verdict {
    let cfg = SolverConfig::default();
    let d = RadonMeasure::dirac(0.0, 1.0)?;
    let mut worst: f64 = 0.0;
    for p in [1.5, 2.0, 3.0] {
        let b = mee_bound(p, &Weight::constant(), &d, &d, 1.0, 0.0, &cfg)?;
        worst = worst.max(rel(b.lhs, b.rhs));
    }
    Ok((worst <= 1e-6, format!("max relative gap {worst:.2e} (tol 1e-6)")))
}

/// Homogeneity of the solver, the Wolff potential and the energy, comparison,
/// quasi-additivity and monotonicity under truncation: 200 cases in turn.
fn properties(rng: &mut ChaCha8Rng) -> Verdict {
    const N: usize = 200;
    let cfg = SolverConfig::default();
    let mut fails: Vec<String> = Vec::new();
    for i in 0..N {
        let p = random_p(rng);
        let w = random_weight(rng, p)?;
        let mu = random_finite(rng)?;
        let a: f64 = rng.gen_range(0.05..20.0);
        let (kind, ok) = match i % 6 {
            0 => {
                let u = solve_dirichlet(p, &w, &mu)?;
                let v = solve_dirichlet(p, &w, &mu.scale(a))?;
                let k = a.powf(1.0 / (p - 1.0));
                let sup = u.u.values().iter().fold(0.0f64, |m, x| m.max(*x));
                let err = u.u.values().iter().zip(v.u.values()).map(|(x, y)| (k * x - y).abs()).fold(0.0, f64::max);
                ("solver homogeneity", err <= 1e-9 * k * sup)
            }
            1 => {
                let x = rng.gen_range(-0.95..0.95);
                let u = wolff_truncated(p, &w, &mu, x, DEFAULT_RADIUS)?.value;
                let v = wolff_truncated(p, &w, &mu.scale(a), x, DEFAULT_RADIUS)?.value;
                ("Wolff homogeneity", rel(v, a.powf(1.0 / (p - 1.0)) * u) <= 1e-9)
            }
            2 => {
                let gamma = rng.gen_range(0.3..2.5);
                let e = energy(p, &w, &mu, gamma, &cfg)?.e_gamma;
                let f = energy(p, &w, &mu.scale(a), gamma, &cfg)?.e_gamma;
                ("energy homogeneity", rel(f, a.powf((p - 1.0 + gamma) / (p - 1.0)) * e) <= 1e-9)
            }
            3 => {
                let nu = mu.add(&random_finite(rng)?);
                let u = solve_dirichlet(p, &w, &mu)?;
                let v = solve_dirichlet(p, &w, &nu)?;
                let sup = v.u.values().iter().fold(0.0f64, |m, x| m.max(*x));
                let worst = u.u.values().iter().zip(v.u.values()).map(|(x, y)| x - y).fold(f64::NEG_INFINITY, f64::max);
                ("comparison", worst <= 1e-12 * sup)
            }
            4 => {
                let nu = random_finite(rng)?;
                let gamma = rng.gen_range(0.3..2.5);
                ("quasi-additivity", quasi_additivity_check(p, &w, &mu, &nu, gamma, &cfg)?.passed)
            }
            _ => {
                let beta = rng.gen_range(-0.5..0.5 * (p - 1.0));
                let alpha = rng.gen_range(1.0..p - beta - 0.05);
                let w = Weight::power(beta)?;
                let sigma = RadonMeasure::power(alpha, 1.0)?;
                let solver = Solver::for_measures(p, &w, &cfg.mesh, &[&sigma])?;
                let full = solver.discretize(&sigma)?;
                let mut prev = None::<crate::solver::NodalFunction>;
                let mut ok = true;
                let mut hint = None;
                for k in (1..=cfg.mesh.dyadic_levels.min(40)).step_by(3) {
                    let sol = solver.solve(&full.truncated(k)?, hint)?;
                    hint = Some(sol.flux_offset());
                    let u = sol.nodal().clone();
                    if let Some(pr) = &prev {
                        ok &= u.deficit(pr) <= 1e-12 * u.sup();
                    }
                    prev = Some(u);
                }
                ("truncation monotonicity", ok)
            }
        };
        if !ok {
            fails.push(format!("#{i} {kind} (p={p:.3})"));
        }
    }
    let detail = if fails.is_empty() {
        format!("{N} cases, 0 violations")
    } else {
        format!("{} violations: {}", fails.len(), fails.join(", "))
    };
    Ok((fails.is_empty(), detail))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn outcome_lines() {
        let o = Outcome {
            id: 3,
            name: "energy identity",
            passed: true,
            detail: "ok".into(),
        };
        assert_eq!(o.to_string(), "PASS  3 energy identity: ok");
        assert!(!run_criterion(99, 1).passed);
    }

    #[test]
    fn quick_criteria_pass() {
        for id in [1, 10] {
            let o = run_criterion(id, DEFAULT_SEED);
            assert!(o.passed, "{o}");
        }
    }

    #[test]
    fn seeds_replay() {
        let a = random_finite(&mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        let b = random_finite(&mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        assert_eq!(a.atoms(), b.atoms());
    }
}
