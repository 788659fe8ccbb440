use quasilin::energy::{energy, mee_bound};
use quasilin::solver::{potential, solve_dirichlet, SolverConfig};
use quasilin::sublinear::{iterate, verify_equivalence, IterationConfig};
use quasilin::trace::{default_family, rayleigh_lower, trace_bracket};
use quasilin::wolff::{ratio_report, DEFAULT_RADIUS};
use quasilin::{Gamma, Point, RadonMeasure, Weight};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn potential_energy_and_wolff_agree_on_a_dirac() {
    let w = Weight::constant();
    let d = RadonMeasure::dirac(0.0, 1.0).unwrap();
    let u = solve_dirichlet(2.0, &w, &d).unwrap();
    let sol = &u.solution;
    assert!(rel(sol.eval(Point::CENTER), 0.5) < 1e-14);
    // E_1(δ_0) = u(0)
    let e = energy(2.0, &w, &d, 1.0, &SolverConfig::default()).unwrap();
    assert!(rel(e.e_gamma, 0.5) < 1e-12);
    let r = ratio_report(2.0, &w, &d, 0.1, DEFAULT_RADIUS, 33).unwrap();
    assert!(r.passed);
}

#[test]
fn weighted_singular_data_end_to_end() {
    let (p, beta, alpha, q) = (2.5, 0.3, 1.2, 0.6);
    let w = Weight::power(beta).unwrap();
    let sigma = RadonMeasure::power(alpha, 1.0).unwrap().add(&RadonMeasure::dirac(-0.3, 0.4).unwrap());
    let cfg = SolverConfig::default();
    let pot = potential(p, &w, &sigma, &cfg).unwrap();
    assert!(pot.converged && !pot.diverged && pot.truncation_levels_used > 0);

    let it = IterationConfig {
        keep_iterates: false,
        ..IterationConfig::default()
    };
    let t = iterate(p, &w, &sigma, q, Gamma::Finite(1.0), &it).unwrap();
    assert!(t.converged && t.monotone && t.envelope_violation() <= 0.0);
    let c = verify_equivalence(p, &w, &sigma, q, Gamma::Finite(1.0), &it).unwrap();
    assert!(c.chain_pass && !c.c2_infinite);

    let b = trace_bracket(p, &w, &sigma, q, &cfg).unwrap();
    let r = rayleigh_lower(p, &w, &sigma, q, &default_family(&sigma), &cfg).unwrap();
    assert!(b.lower <= b.upper && r.best <= b.upper * (1.0 + 1e-9));
}

#[test]
fn mee_bound_holds_for_distinct_measures() {
    let w = Weight::power(-0.2).unwrap();
    let mu = RadonMeasure::dirac(0.4, 1.0).unwrap();
    let nu = RadonMeasure::lebesgue();
    let b = mee_bound(2.0, &w, &mu, &nu, 1.0, 0.5, &SolverConfig::default()).unwrap();
    assert!(b.passed && b.margin >= 1.0 - 1e-6, "{b:?}");
}

#[test]
fn validation_errors_are_tagged() {
    let w = Weight::constant();
    let d = RadonMeasure::dirac(0.0, 1.0).unwrap();
    let e = solve_dirichlet(0.9, &w, &d).unwrap_err();
    assert!(e.is_validation());
    assert!(Weight::power(-1.5).is_err());
    assert!(RadonMeasure::dirac(1.0, 1.0).is_err());
}
