//! The minimal positive solution of `−Δ_{p,w}u = σu^q`, `0 < q < p − 1`,
//! built by the monotone iteration `u_{i+1} = W(u_i^q σ)` started from the
//! lower envelope `c_V (Wσ)^{(p−1)/(p−1−q)}`, and the checks around it.

use crate::energy::{energy_limit, energy_sequence};
use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::limits::{LimitTracker, Step, Verdict};
use crate::measures::RadonMeasure;
use crate::mesh::DiscreteMeasure;
use crate::params::{c_e, c_v, check_p, check_q, hardy_threshold, Gamma};
use crate::solver::{NodalFunction, PotentialResult, Solution, Solver, SolverConfig};
use crate::weights::Weight;

const MODULE: &str = "sublinear";
/// Relative size of a pointwise decrease that counts as a monotonicity bug.
const MONOTONE_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct IterationConfig {
    pub solver: SolverConfig,
    /// Stop once the sup-norm relative change drops below this.
    pub tol: f64,
    pub max_steps: usize,
    /// Keep every iterate as a grid function.
    pub keep_iterates: bool,
}

impl Default for IterationConfig {
    fn default() -> Self {
        IterationConfig {
            solver: SolverConfig::default(),
            tol: 1e-8,
            max_steps: 200,
            keep_iterates: true,
        }
    }
}

impl IterationConfig {
    fn validate(&self) -> Result<()> {
        self.solver.validate()?;
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Error::invalid(MODULE, "config", format!("tol must lie in (0, 1), got {}", self.tol)));
        }
        if self.max_steps == 0 {
            return Err(Error::invalid(MODULE, "config", "max_steps must be >= 1"));
        }
        Ok(())
    }
}

/// The data of one problem on a fixed mesh. Measures of infinite mass are
/// replaced by the truncation at which `Wσ` settled.
struct Problem {
    p: f64,
    q: f64,
    solver: Solver,
    full: DiscreteMeasure,
    dm: DiscreteMeasure,
    base: PotentialResult,
    min_level: u32,
}

impl Problem {
    fn new(p: f64, w: &Weight, sigma: &RadonMeasure, q: f64, cfg: &SolverConfig, op: &'static str) -> Result<Self> {
        check_p(p, op)?;
        check_q(p, q, op)?;
        cfg.validate()?;
        if sigma.is_zero() {
            return Err(Error::invalid(MODULE, op, "sigma must be nonzero"));
        }
        let solver = Solver::for_measures(p, w, &cfg.mesh, &[sigma])?;
        let full = solver.discretize(sigma)?;
        let min_level = cfg.min_level.max(full.features_level(&sigma.features()));
        let base = solver.potential_discrete(&full, min_level, cfg)?;
        let dm = match base.truncation_levels_used {
            0 => full.clone(),
            k => full.truncated(k)?,
        };
        Ok(Problem {
            p,
            q,
            solver,
            full,
            dm,
            base,
            min_level,
        })
    }

    fn theta(&self) -> f64 {
        (self.p - 1.0) / (self.p - 1.0 - self.q)
    }

    fn level(&self) -> u32 {
        self.base.truncation_levels_used
    }
}

/// `‖u‖_{L^{γ+q}(σ)}`, or the `σ`-essential sup for `γ = ∞`.
fn norm_of(u: &NodalFunction, sol: Option<&Solution>, sigma: &DiscreteMeasure, q: f64, gamma: Gamma) -> f64 {
    match gamma {
        Gamma::Finite(g) => {
            let s = g + q;
            let m = match sol {
                Some(sol) => sol.moment_against(sigma, s),
                None => u.moment(sigma, s),
            };
            m.powf(1.0 / s)
        }
        Gamma::Infinite => u.sup_on_support(sigma),
    }
}

#[derive(Debug, Clone)]
pub struct Envelope {
    /// `c_V (Wσ)^{(p−1)/(p−1−q)}`
    pub u: GridFunction,
    pub nodal: NodalFunction,
    /// `Wσ ≡ ∞`.
    pub diverged: bool,
    /// Truncation level of `σ` used (0 when `σ` is finite).
    pub level: u32,
}

fn envelope_of(pb: &Problem) -> Envelope {
    let nodal = pb.base.solution.nodal().power(c_v(pb.p, pb.q), pb.theta());
    Envelope {
        u: nodal.grid(),
        nodal,
        diverged: pb.base.diverged,
        level: pb.level(),
    }
}

pub fn lower_envelope(p: f64, w: &Weight, sigma: &RadonMeasure, q: f64, cfg: &SolverConfig) -> Result<Envelope> {
    if sigma.is_zero() {
        check_p(p, "lower_envelope")?;
        check_q(p, q, "lower_envelope")?;
        let solver = Solver::for_measures(p, w, &cfg.mesh, &[sigma])?;
        let nodal = NodalFunction::zero(solver.mesh().clone());
        return Ok(Envelope {
            u: nodal.grid(),
            nodal,
            diverged: false,
            level: 0,
        });
    }
    let pb = Problem::new(p, w, sigma, q, cfg, "lower_envelope")?;
    Ok(envelope_of(&pb))
}

#[derive(Debug, Clone)]
pub struct IterationTrace {
    /// `u_0, u_1, …` on the output grid (empty unless requested).
    pub iterates: Vec<GridFunction>,
    /// `‖u_i‖_{L^{γ+q}(σ)}` for each iterate, starting with `u_0`.
    pub norms: Vec<f64>,
    /// No pointwise decrease was seen.
    pub monotone: bool,
    pub converged: bool,
    /// A norm exceeded the cap, or `Wσ ≡ ∞`.
    pub diverged: bool,
    pub steps: usize,
    /// Sup-norm relative change of the last step.
    pub final_residual: f64,
    /// Truncation level of `σ` used (0 when `σ` is finite).
    pub level: u32,
    pub envelope: NodalFunction,
    /// The last iterate.
    pub u: NodalFunction,
    /// Solve that produced the last iterate (absent if no step was taken).
    pub solution: Option<Solution>,
}

impl IterationTrace {
    pub fn norm(&self) -> f64 {
        *self.norms.last().expect("at least one norm")
    }

    pub fn sup(&self) -> f64 {
        self.u.sup()
    }

    /// `max (u_0 − u)⁺` over all nodes.
    pub fn envelope_violation(&self) -> f64 {
        self.u.deficit(&self.envelope)
    }
}

struct Run {
    iterates: Vec<GridFunction>,
    norms: Vec<f64>,
    monotone: bool,
    converged: bool,
    diverged: bool,
    steps: usize,
    residual: f64,
    u: NodalFunction,
    solution: Option<Solution>,
}

fn run(
    solver: &Solver,
    dm: &DiscreteMeasure,
    start: NodalFunction,
    q: f64,
    gamma: Gamma,
    cfg: &IterationConfig,
    strict: bool,
) -> Result<Run> {
    let mut iterates = Vec::new();
    if cfg.keep_iterates {
        iterates.push(start.grid());
    }
    let mut norms = vec![norm_of(&start, None, dm, q, gamma)];
    let mut out = Run {
        iterates: Vec::new(),
        norms: Vec::new(),
        monotone: true,
        converged: false,
        diverged: !(norms[0] <= cfg.solver.cap),
        steps: 0,
        residual: f64::INFINITY,
        u: start,
        solution: None,
    };
    let mut hint = None;
    while !out.diverged && out.steps < cfg.max_steps {
        let mu = out.u.weigh(dm, q);
        let sol = solver.solve(&mu, hint)?;
        hint = Some(sol.flux_offset());
        let next = sol.nodal();
        let sup = next.sup();
        let drop = next.deficit(&out.u);
        if drop > MONOTONE_TOL * sup {
            if strict {
                return Err(Error::NonMonotone {
                    module: MODULE,
                    op: "iterate",
                    violation: drop,
                    msg: format!("step {} decreased the iterate", out.steps + 1),
                });
            }
            out.monotone = false;
        }
        out.residual = if sup > 0.0 { next.max_abs_diff(&out.u) / sup } else { 0.0 };
        let n = norm_of(&next, Some(&sol), dm, q, gamma);
        norms.push(n);
        if cfg.keep_iterates {
            iterates.push(next.grid());
        }
        out.steps += 1;
        out.u = next;
        out.solution = Some(sol);
        if !(n <= cfg.solver.cap) {
            out.diverged = true;
        } else if out.residual < cfg.tol {
            out.converged = true;
            break;
        }
    }
    out.iterates = iterates;
    out.norms = norms;
    Ok(out)
}

fn trace_from(run: Run, envelope: NodalFunction, level: u32, diverged: bool) -> IterationTrace {
    IterationTrace {
        iterates: run.iterates,
        norms: run.norms,
        monotone: run.monotone,
        converged: run.converged && !diverged,
        diverged: run.diverged || diverged,
        steps: run.steps,
        final_residual: run.residual,
        level,
        envelope,
        u: run.u,
        solution: run.solution,
    }
}

fn iterate_problem(pb: &Problem, gamma: Gamma, cfg: &IterationConfig) -> Result<IterationTrace> {
    let env = envelope_of(pb);
    if env.diverged {
        let norms = vec![norm_of(&env.nodal, None, &pb.dm, pb.q, gamma)];
        return Ok(IterationTrace {
            iterates: if cfg.keep_iterates { vec![env.u] } else { Vec::new() },
            norms,
            monotone: true,
            converged: false,
            diverged: true,
            steps: 0,
            final_residual: f64::INFINITY,
            level: env.level,
            envelope: env.nodal.clone(),
            u: env.nodal,
            solution: None,
        });
    }
    let r = run(&pb.solver, &pb.dm, env.nodal.clone(), pb.q, gamma, cfg, true)?;
    Ok(trace_from(r, env.nodal, env.level, false))
}

fn check_gamma(gamma: Gamma, op: &'static str) -> Result<()> {
    match gamma {
        Gamma::Finite(g) if !(g.is_finite() && g > 0.0) => {
            Err(Error::invalid(MODULE, op, format!("gamma must be > 0, got {g}")))
        }
        _ => Ok(()),
    }
}

/// The iteration from the lower envelope, with a hard monotonicity check.
pub fn iterate(p: f64, w: &Weight, sigma: &RadonMeasure, q: f64, gamma: Gamma, cfg: &IterationConfig) -> Result<IterationTrace> {
    check_gamma(gamma, "iterate")?;
    cfg.validate()?;
    let pb = Problem::new(p, w, sigma, q, &cfg.solver, "iterate")?;
    iterate_problem(&pb, gamma, cfg)
}

/// The same iteration from an arbitrary start `start(u_0)`, built from the
/// lower envelope. Monotonicity is recorded, not enforced.
pub fn iterate_from(
    p: f64,
    w: &Weight,
    sigma: &RadonMeasure,
    q: f64,
    gamma: Gamma,
    start: impl FnOnce(&NodalFunction) -> NodalFunction,
    cfg: &IterationConfig,
) -> Result<IterationTrace> {
    check_gamma(gamma, "iterate_from")?;
    cfg.validate()?;
    let pb = Problem::new(p, w, sigma, q, &cfg.solver, "iterate_from")?;
    let env = envelope_of(&pb);
    if env.diverged {
        return Err(Error::Diverged {
            module: MODULE,
            op: "iterate_from",
            msg: "W sigma is infinite".into(),
        });
    }
    let u0 = start(&env.nodal);
    let r = run(&pb.solver, &pb.dm, u0, pb.q, gamma, cfg, false)?;
    Ok(trace_from(r, env.nodal, env.level, false))
}

/// Norms of the minimal solutions for the truncations `σ_k`, `k` increasing.
#[derive(Debug, Clone)]
pub struct NormGrowth {
    pub levels: Vec<u32>,
    pub norms: Vec<f64>,
    /// Some norm exceeded the cap.
    pub exceeded_cap: bool,
    pub diverged: bool,
    pub converged: bool,
}

/// Runs the iteration on `σ_k` for `k = k_0, k_0 + step, …`, each level
/// warm-started from the previous limit, and classifies the norms.
pub fn norm_growth(
    p: f64,
    w: &Weight,
    sigma: &RadonMeasure,
    q: f64,
    gamma: Gamma,
    step: u32,
    cfg: &IterationConfig,
) -> Result<NormGrowth> {
    check_gamma(gamma, "norm_growth")?;
    cfg.validate()?;
    if step == 0 {
        return Err(Error::invalid(MODULE, "norm_growth", "step must be >= 1"));
    }
    check_p(p, "norm_growth")?;
    check_q(p, q, "norm_growth")?;
    if sigma.is_zero() {
        return Err(Error::invalid(MODULE, "norm_growth", "sigma must be nonzero"));
    }
    let solver = Solver::for_measures(p, w, &cfg.solver.mesh, &[sigma])?;
    let full = solver.discretize(sigma)?;
    let k0 = cfg.solver.min_level.max(full.features_level(&sigma.features()));
    let inner = IterationConfig {
        keep_iterates: false,
        ..cfg.clone()
    };
    // increments are compared per level, so the rate test sees a per-step ratio
    let mut tracker =
        LimitTracker::new(cfg.solver.tol.max(cfg.tol), cfg.solver.cap, k0).with_diverge_ratio(0.98f64.powi(step as i32));
    let theta = (p - 1.0) / (p - 1.0 - q);
    let mut levels = Vec::new();
    let mut norms = Vec::new();
    let mut prev: Option<NodalFunction> = None;
    let mut prev_norm = 0.0;
    let mut outcome = None;
    let mut k = k0;
    while k <= cfg.solver.max_level {
        let dm = full.truncated(k)?;
        let start = match prev.take() {
            Some(u) => u,
            None => solver.solve(&dm, None)?.nodal().power(c_v(p, q), theta),
        };
        let r = run(&solver, &dm, start, q, gamma, &inner, true)?;
        let n = *r.norms.last().unwrap();
        levels.push(k);
        norms.push(n);
        let st = tracker.push(k, n, n - prev_norm);
        prev_norm = n;
        prev = Some(r.u);
        if r.diverged || st != Step::Continue {
            outcome = Some(if r.diverged { Step::Diverged } else { st });
            break;
        }
        k += step;
    }
    let (converged, diverged) = match outcome {
        Some(Step::Converged) => (true, false),
        Some(Step::Diverged) => (false, true),
        _ => match tracker.verdict() {
            Verdict::Converged => (true, false),
            Verdict::Diverged => (false, true),
            Verdict::Unconverged => (false, false),
        },
    };
    let exceeded_cap = norms.iter().any(|&n| !(n <= cfg.solver.cap));
    Ok(NormGrowth {
        levels,
        norms,
        exceeded_cap,
        diverged,
        converged,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InequalityReport {
    /// `max ((Wσ)^β − β W((Wσ)^{(β−1)(p−1)}σ))⁺` over all nodes.
    pub max_violation: f64,
    /// Allowed violation: `1e−9·sup (Wσ)^β`.
    pub tolerance: f64,
    pub passed: bool,
    /// `min RHS/LHS` over nodes where `LHS > 0`.
    pub min_ratio: f64,
}

/// `(Wσ)^β ≤ β W((Wσ)^{(β−1)(p−1)} σ)` at every node, for `β ≥ 1`.
pub fn iterated_inequality_check(p: f64, w: &Weight, sigma: &RadonMeasure, beta: f64, cfg: &SolverConfig) -> Result<InequalityReport> {
    if !(beta >= 1.0 && beta.is_finite()) {
        return Err(Error::invalid(MODULE, "iterated_inequality_check", format!("beta must be >= 1, got {beta}")));
    }
    let pb = Problem::new(p, w, sigma, 0.0, cfg, "iterated_inequality_check")?;
    if pb.base.diverged {
        return Err(Error::Diverged {
            module: MODULE,
            op: "iterated_inequality_check",
            msg: "W sigma is infinite".into(),
        });
    }
    let u = pb.base.solution.nodal();
    let lhs = u.power(1.0, beta);
    let mu = u.weigh(&pb.dm, (beta - 1.0) * (p - 1.0));
    let rhs = pb.solver.solve(&mu, None)?.nodal().power(beta, 1.0);
    let max_violation = rhs.deficit(&lhs);
    let tolerance = MONOTONE_TOL * lhs.sup();
    let (lv, rv) = (lhs.grid_values(), rhs.grid_values());
    let min_ratio = lv
        .iter()
        .zip(&rv)
        .filter(|(l, _)| **l > 0.0)
        .map(|(l, r)| r / l)
        .fold(f64::INFINITY, f64::min);
    Ok(InequalityReport {
        max_violation,
        tolerance,
        passed: max_violation <= tolerance,
        min_ratio,
    })
}

#[derive(Debug, Clone)]
pub struct CriterionReport {
    /// `(∫(Wσ)^{(γ+q)(p−1)/(p−1−q)} dσ)^{1/(γ+q)}`, or `‖Wσ‖_{L^∞(σ)}^{(p−1)/(p−1−q)}` for `γ = ∞`.
    pub c2: f64,
    /// `‖u‖_{L^{γ+q}(σ)}` for the minimal solution `u`.
    pub c1: f64,
    pub c_e: f64,
    pub c_v: f64,
    /// `C_1 ≤ c_E^{1/(p−1−q)} C_2` (`C_1 ≤ C_2` for `γ = ∞`).
    pub upper_link: bool,
    /// `c_V C_2 ≤ C_1`.
    pub lower_link: bool,
    /// Both links, or (for `C_2 = ∞`) divergence of the iteration norms.
    pub chain_pass: bool,
    /// Bracket for the weighted-norm-inequality constant `C_3`.
    pub c3_bracket: (f64, f64),
    pub c2_infinite: bool,
    pub iteration_diverged: bool,
    pub trace: IterationTrace,
    /// Norm growth under truncation refinement (only when `C_2 = ∞`).
    pub growth: Option<NormGrowth>,
}

impl CriterionReport {
    /// Whether some iterate norm, at the working level or under refinement,
    /// went above `cap`.
    pub fn norms_exceeded_cap(&self, cap: f64) -> bool {
        self.trace.norms.iter().any(|&n| !(n <= cap)) || self.growth.as_ref().is_some_and(|g| g.exceeded_cap)
    }
}

/// Relative tolerance of the constant-chain links.
pub const CHAIN_TOL: f64 = 1e-6;

pub fn verify_equivalence(
    p: f64,
    w: &Weight,
    sigma: &RadonMeasure,
    q: f64,
    gamma: Gamma,
    cfg: &IterationConfig,
) -> Result<CriterionReport> {
    check_gamma(gamma, "verify_equivalence")?;
    cfg.validate()?;
    let pb = Problem::new(p, w, sigma, q, &cfg.solver, "verify_equivalence")?;
    let a = p - 1.0 - q;
    let ce = match gamma {
        Gamma::Finite(g) => c_e(p, g),
        Gamma::Infinite => 1.0,
    };
    let cv = c_v(p, q);
    let c2 = match gamma {
        Gamma::Finite(g) => {
            let s = (g + q) * (p - 1.0) / a;
            let lim = energy_limit(&pb.solver, &pb.full, pb.min_level, s, &cfg.solver)?;
            if lim.diverged {
                f64::INFINITY
            } else {
                lim.value.powf(1.0 / (g + q))
            }
        }
        Gamma::Infinite => {
            if pb.base.diverged {
                f64::INFINITY
            } else {
                pb.base.solution.sup_on_support().powf(pb.theta())
            }
        }
    };
    let trace = iterate_problem(&pb, gamma, cfg)?;
    let c2_infinite = !c2.is_finite();
    let (growth, iteration_diverged) = if c2_infinite && !trace.diverged {
        let g = norm_growth(p, w, sigma, q, gamma, 4, cfg)?;
        let d = g.diverged;
        (Some(g), d)
    } else {
        (None, trace.diverged)
    };
    let c1 = if iteration_diverged { f64::INFINITY } else { trace.norm() };
    let k_up = ce.powf(1.0 / a);
    let upper_link = c1 <= k_up * c2 * (1.0 + CHAIN_TOL);
    let lower_link = cv * c2 <= c1 * (1.0 + CHAIN_TOL);
    let chain_pass = if c2_infinite {
        iteration_diverged
    } else {
        upper_link && lower_link && !iteration_diverged
    };
    let e = a / (p - 1.0);
    let c3_bracket = (c1.powf(e), (k_up * c2).powf(e));
    Ok(CriterionReport {
        c2,
        c1,
        c_e: ce,
        c_v: cv,
        upper_link,
        lower_link,
        chain_pass,
        c3_bracket,
        c2_infinite,
        iteration_diverged,
        trace,
        growth,
    })
}

#[derive(Debug, Clone)]
pub struct FiniteEnergyReport {
    /// `∫(Wσ)^{(1+q)(p−1)/(p−1−q)} dσ`
    pub energy: f64,
    /// `‖u′‖^p_{L^p(w)}`
    pub grad_norm: f64,
    /// `∫ u^{1+q} dσ`
    pub weak_form: f64,
    /// `c_V^{1+q} E ≤ ‖u′‖^p ≤ E`
    pub sandwich_pass: bool,
    /// `|‖u′‖^p − ∫u^{1+q}dσ| / ‖u′‖^p`
    pub identity_gap: f64,
    pub trace: IterationTrace,
}

/// Relative tolerance of the finite-energy checks.
pub const ENERGY_TOL: f64 = 1e-5;

pub fn finite_energy_check(p: f64, w: &Weight, sigma: &RadonMeasure, q: f64, cfg: &IterationConfig) -> Result<FiniteEnergyReport> {
    cfg.validate()?;
    let pb = Problem::new(p, w, sigma, q, &cfg.solver, "finite_energy_check")?;
    let s = (1.0 + q) * pb.theta();
    let lim = energy_limit(&pb.solver, &pb.full, pb.min_level, s, &cfg.solver)?;
    if lim.diverged {
        return Err(Error::Diverged {
            module: MODULE,
            op: "finite_energy_check",
            msg: "the finite-energy criterion integral is infinite".into(),
        });
    }
    let trace = iterate_problem(&pb, Gamma::Finite(1.0), cfg)?;
    let sol = trace.solution.as_ref().ok_or_else(|| Error::Diverged {
        module: MODULE,
        op: "finite_energy_check",
        msg: "iteration did not start".into(),
    })?;
    let energy = lim.value;
    let grad_norm = sol.gradient_moment(0.0);
    let weak_form = sol.moment_against(&pb.dm, 1.0 + q);
    let lo = c_v(p, q).powf(1.0 + q) * energy;
    let sandwich_pass = lo <= grad_norm * (1.0 + ENERGY_TOL) && grad_norm <= energy * (1.0 + ENERGY_TOL);
    let identity_gap = (grad_norm - weak_form).abs() / grad_norm.abs().max(f64::MIN_POSITIVE);
    Ok(FiniteEnergyReport {
        energy,
        grad_norm,
        weak_form,
        sandwich_pass,
        identity_gap,
        trace,
    })
}

#[derive(Debug, Clone)]
pub struct BoundedReport {
    /// `‖Wσ‖_{L^∞(σ)}^{(p−1)/(p−1−q)}`
    pub c2_inf: f64,
    /// `sup u` of the minimal solution.
    pub sup_u: f64,
    /// `sup u ≤ C_2^∞`
    pub passed: bool,
    /// Largest value at the two grid nodes next to `±1`.
    pub boundary_value: f64,
    pub diverged: bool,
    pub trace: IterationTrace,
}

pub fn bounded_solution_check(p: f64, w: &Weight, sigma: &RadonMeasure, q: f64, cfg: &IterationConfig) -> Result<BoundedReport> {
    cfg.validate()?;
    let pb = Problem::new(p, w, sigma, q, &cfg.solver, "bounded_solution_check")?;
    let trace = iterate_problem(&pb, Gamma::Infinite, cfg)?;
    if pb.base.diverged {
        return Ok(BoundedReport {
            c2_inf: f64::INFINITY,
            sup_u: f64::INFINITY,
            passed: true,
            boundary_value: f64::INFINITY,
            diverged: true,
            trace,
        });
    }
    let c2_inf = pb.base.solution.sup_on_support().powf(pb.theta());
    let sup_u = trace.sup();
    let g = trace.u.grid_values();
    let boundary_value = g[1].max(g[g.len() - 2]);
    Ok(BoundedReport {
        c2_inf,
        sup_u,
        passed: sup_u <= c2_inf * (1.0 + cfg.tol.max(1e-9)),
        boundary_value,
        diverged: trace.diverged,
        trace,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupersolutionReport {
    /// Exponent of `V = C(1 − |x|)^A`.
    pub a: f64,
    pub c: f64,
    /// `max (u − V)⁺ / sup u` over all nodes.
    pub max_excess: f64,
    pub passed: bool,
}

/// For `σ = (1 − |x|)^{−α}`, `w = (1 − |x|)^β` and `α < p − β`: the
/// minimal solution lies below the explicit supersolution `V = C(1 − |x|)^A`.
pub fn supersolution_check(p: f64, beta: f64, alpha: f64, q: f64, cfg: &IterationConfig) -> Result<SupersolutionReport> {
    check_p(p, "supersolution_check")?;
    check_q(p, q, "supersolution_check")?;
    if !(alpha < p - beta) {
        return Err(Error::invalid(MODULE, "supersolution_check", format!("need alpha < p - beta = {}", p - beta)));
    }
    let w = Weight::power(beta)?;
    let sigma = RadonMeasure::power(alpha, 1.0)?;
    // −Δ(C d^A) has density C^{p−1} k d^{e−1} with e = (A−1)(p−1)+β, k = −A^{p−1}e;
    // it dominates σV^q = C^q d^{Aq−α} when e − 1 ≤ Aq − α and C^{p−1−q} k = 1
    let a_match = (p - beta - alpha) / (p - 1.0 - q);
    let a_cap = 1.0 - beta / (p - 1.0);
    let a = a_match.min(0.9 * a_cap).min(1.0);
    let e = (a - 1.0) * (p - 1.0) + beta;
    let k = -a.powf(p - 1.0) * e;
    let c = k.powf(-1.0 / (p - 1.0 - q));
    let trace = iterate(p, &w, &sigma, q, Gamma::Finite(1.0), cfg)?;
    let sup = trace.sup();
    let v = trace.u.map_points(|pt, _| c * pt.dist().powf(a));
    let max_excess = v.deficit(&trace.u) / sup;
    Ok(SupersolutionReport {
        a,
        c,
        max_excess,
        passed: max_excess <= MONOTONE_TOL,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Solvability {
    Solvable,
    NotSolvable,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HardyRow {
    pub alpha: f64,
    /// `α < α*`
    pub predicted: Solvability,
    pub observed: Solvability,
    /// Least-squares slope of `log2` of the energy increments per level.
    pub slope: f64,
    /// Energy at the deepest truncation level (`∞` once above the cap).
    pub energy: f64,
    pub in_dead_band: bool,
    /// Prediction and observation agree, or the row lies in the dead-band.
    pub agrees: bool,
}

#[derive(Debug, Clone)]
pub struct HardySweep {
    pub p: f64,
    pub beta: f64,
    pub q: f64,
    pub threshold: f64,
    pub dead_band: f64,
    pub rows: Vec<HardyRow>,
}

impl HardySweep {
    pub fn all_agree(&self) -> bool {
        self.rows.iter().all(|r| r.agrees)
    }

    /// Whether every solvable row precedes every unsolvable one.
    pub fn single_flip(&self) -> bool {
        let mut seen_not = false;
        for r in &self.rows {
            match r.observed {
                Solvability::NotSolvable => seen_not = true,
                Solvability::Solvable if seen_not => return false,
                Solvability::Solvable => {}
            }
        }
        true
    }
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub solver: SolverConfig,
    /// Truncation levels per energy sequence.
    pub levels: u32,
    /// Levels at the end of the sequence used for the rate fit.
    pub window: usize,
    pub dead_band: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            solver: SolverConfig::default(),
            levels: 64,
            window: 16,
            dead_band: 0.05,
        }
    }
}

/// Grid `α* + 0.05 j` from `α* − 0.5` up to `min(α* + 0.5, p − β − 0.05)`.
pub fn default_alpha_grid(p: f64, beta: f64, q: f64) -> Result<Vec<f64>> {
    let t = hardy_threshold(p, q, beta)?;
    let top = (t + 0.5).min(p - beta - 0.05);
    Ok((-10..=10).map(|j| t + 0.05 * j as f64).filter(|&a| a <= top + 1e-12).collect())
}

/// Classifies finite-energy solvability for `σ = (1 − |x|)^{−α}`,
/// `w = (1 − |x|)^β` by the growth of the energies
/// `∫ (Wσ_k)^{(1+q)(p−1)/(p−1−q)} dσ_k` under truncation refinement.
pub fn hardy_sweep(p: f64, beta: f64, q: f64, alphas: &[f64], cfg: &SweepConfig) -> Result<HardySweep> {
    let threshold = hardy_threshold(p, q, beta)?;
    cfg.solver.validate()?;
    if cfg.levels < 4 || cfg.levels > cfg.solver.mesh.dyadic_levels || cfg.window < 3 {
        return Err(Error::invalid(MODULE, "hardy_sweep", "need 4 <= levels <= dyadic_levels and window >= 3"));
    }
    let w = Weight::power(beta)?;
    let s = (1.0 + q) * (p - 1.0) / (p - 1.0 - q);
    let mut rows = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        // α ≥ p − β is allowed: each σ_k is finite and the energies blow up
        let sigma = RadonMeasure::power(alpha, 1.0)?;
        let solver = Solver::for_measures(p, &w, &cfg.solver.mesh, &[&sigma])?;
        let dm = solver.discretize(&sigma)?;
        let (values, _) = energy_sequence(&solver, &dm, s, cfg.levels, cfg.solver.cap)?;
        let (observed, slope) = classify(&values, cfg.window, cfg.solver.cap);
        let predicted = if alpha < threshold {
            Solvability::Solvable
        } else {
            Solvability::NotSolvable
        };
        let in_dead_band = (alpha - threshold).abs() <= cfg.dead_band + 1e-9;
        rows.push(HardyRow {
            alpha,
            predicted,
            observed,
            slope,
            energy: values.last().map_or(0.0, |&v| if v <= cfg.solver.cap { v } else { f64::INFINITY }),
            in_dead_band,
            agrees: in_dead_band || predicted == observed,
        });
    }
    Ok(HardySweep {
        p,
        beta,
        q,
        threshold,
        dead_band: cfg.dead_band,
        rows,
    })
}

/// Convergent iff the increments decay geometrically (negative slope of
/// `log2` increment per level) or vanish to rounding.
fn classify(values: &[f64], window: usize, cap: f64) -> (Solvability, f64) {
    if values.iter().any(|v| !(*v <= cap)) {
        return (Solvability::NotSolvable, f64::INFINITY);
    }
    let pts: Vec<(f64, f64)> = values
        .windows(2)
        .enumerate()
        .filter_map(|(i, w)| {
            let d = w[1] - w[0];
            (d > 1e-12 * w[1].abs()).then(|| ((i + 2) as f64, d.log2()))
        })
        .collect();
    let n_levels = values.len() as f64;
    // increments that stopped being resolvable before the window ends
    let recent: Vec<(f64, f64)> = pts.iter().copied().filter(|p| p.0 > n_levels - window as f64).collect();
    if recent.len() < 3 {
        return (Solvability::Solvable, f64::NEG_INFINITY);
    }
    let n = recent.len() as f64;
    let mx = recent.iter().map(|p| p.0).sum::<f64>() / n;
    let my = recent.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = recent.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = recent.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let slope = sxy / sxx;
    (if slope < 0.0 { Solvability::Solvable } else { Solvability::NotSolvable }, slope)
}

/// `u* = 1 − x²` sampled on the mesh of `like`.
pub fn manufactured_solution(like: &NodalFunction) -> NodalFunction {
    like.map_points(|pt, _| {
        let d = pt.dist();
        d * (2.0 - d)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    fn quick() -> IterationConfig {
        IterationConfig {
            keep_iterates: false,
            ..IterationConfig::default()
        }
    }

    #[test]
    fn envelope_of_dirac() {
        let sigma = RadonMeasure::dirac(0.0, 1.0).unwrap();
        let env = lower_envelope(2.0, &Weight::constant(), &sigma, 0.5, &SolverConfig::default()).unwrap();
        assert!(!env.diverged && env.level == 0);
        for (pt, v) in env.u.points().iter().zip(env.u.values()) {
            let want = 0.25 * (0.5 * pt.dist()).powi(2);
            assert!((v - want).abs() < 1e-14, "{} {v} {want}", pt.x());
        }
        let z = lower_envelope(2.0, &Weight::constant(), &RadonMeasure::zero(), 0.5, &SolverConfig::default()).unwrap();
        assert_eq!(z.u.sup(), 0.0);
    }

    #[test]
    fn envelope_of_singular_density() {
        let sigma = RadonMeasure::power(1.5, 1.0).unwrap();
        let env = lower_envelope(2.0, &Weight::constant(), &sigma, 0.5, &SolverConfig::default()).unwrap();
        assert!(env.level > 0 && !env.diverged);
        assert!(rel(env.u.eval(Point::CENTER), 1.0) < 1e-8, "{}", env.u.eval(Point::CENTER));
    }

    #[test]
    fn dirac_fixed_point() {
        // u(0) = u(0)^{1/2}/2
        let sigma = RadonMeasure::dirac(0.0, 1.0).unwrap();
        let t = iterate(2.0, &Weight::constant(), &sigma, 0.5, Gamma::Finite(1.0), &IterationConfig::default()).unwrap();
        assert!(t.converged && t.monotone && !t.diverged);
        assert!(t.final_residual < 1e-8);
        assert!(rel(t.sup(), 0.25) < 1e-7, "{}", t.sup());
        assert_eq!(t.iterates.len(), t.steps + 1);
        assert!(t.norms.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-12)));
        assert!(t.envelope_violation() <= 0.0);
    }

    #[test]
    fn manufactured_solution_is_recovered() {
        let (p, q) = (3.0, 0.5);
        let sigma = RadonMeasure::manufactured(p, q).unwrap();
        let t = iterate(p, &Weight::constant(), &sigma, q, Gamma::Finite(1.0), &quick()).unwrap();
        assert!(t.converged);
        let err = t.u.max_abs_diff(&manufactured_solution(&t.u));
        assert!(err < 1e-5, "sup error {err}");

        let rep = finite_energy_check(p, &Weight::constant(), &sigma, q, &quick()).unwrap();
        assert!(rep.sandwich_pass, "{rep:?}");
        assert!(rep.identity_gap < 1e-5, "{}", rep.identity_gap);
        // ∫|u*′|^3 = ∫|2x|^3 dx = 4
        assert!(rel(rep.grad_norm, 4.0) < 1e-5, "{}", rep.grad_norm);
    }

    #[test]
    fn uniqueness_from_another_start() {
        let (p, q) = (3.0, 0.5);
        let sigma = RadonMeasure::manufactured(p, q).unwrap();
        let w = Weight::constant();
        let a = iterate(p, &w, &sigma, q, Gamma::Finite(1.0), &quick()).unwrap();
        let b = iterate_from(
            p,
            &w,
            &sigma,
            q,
            Gamma::Finite(1.0),
            |u0| u0.power(2.0, 1.0).min(&manufactured_solution(u0)),
            &quick(),
        )
        .unwrap();
        assert!(b.converged);
        assert!(a.u.max_abs_diff(&b.u) < 1e-4);
    }

    #[test]
    fn iterated_inequality_examples() {
        let w = Weight::constant();
        let cfg = SolverConfig::default();
        let d = RadonMeasure::dirac(0.0, 1.0).unwrap();
        let r1 = iterated_inequality_check(2.0, &w, &d, 1.0, &cfg).unwrap();
        assert!(r1.passed && r1.max_violation == 0.0);
        // ((1−|x|)/2)² ≤ (1−|x|)/2
        let r2 = iterated_inequality_check(2.0, &w, &d, 2.0, &cfg).unwrap();
        assert!(r2.passed && (r2.min_ratio - 2.0).abs() < 1e-12, "{r2:?}");
        let r3 = iterated_inequality_check(2.0, &w, &RadonMeasure::lebesgue(), 1.5, &cfg).unwrap();
        assert!(r3.passed && r3.min_ratio > 1.0);
        assert!(iterated_inequality_check(2.0, &w, &d, 0.5, &cfg).is_err());
    }

    #[test]
    fn chain_for_dirac_and_scaling() {
        let w = Weight::constant();
        let d = RadonMeasure::dirac(0.0, 1.0).unwrap();
        let r = verify_equivalence(2.0, &w, &d, 0.5, Gamma::Finite(1.0), &quick()).unwrap();
        assert!(r.chain_pass && r.upper_link && r.lower_link);
        // C_1 = C_2 = u(0)·σ(Ω)^{1/(γ+q)} = 1/4
        assert!(rel(r.c2, 0.25) < 1e-12, "{}", r.c2);
        assert!(rel(r.c1, 0.25) < 1e-7, "{}", r.c1);
        assert!(r.c3_bracket.0 <= r.c3_bracket.1);
        let a: f64 = 3.0;
        let s = verify_equivalence(2.0, &w, &d.scale(a), 0.5, Gamma::Finite(1.0), &quick()).unwrap();
        let k = a.powf(1.0 / 0.5 + 1.0 / 1.5);
        assert!(rel(s.c2, k * r.c2) < 1e-10 && rel(s.c1, k * r.c1) < 1e-7);
    }

    #[test]
    fn chain_with_divergent_criterion() {
        // α* = 1.75 < α = 1.9 < p − β = 2: Wσ finite, C_2 = ∞
        let sigma = RadonMeasure::power(1.9, 1.0).unwrap();
        let r = verify_equivalence(2.0, &Weight::constant(), &sigma, 0.5, Gamma::Finite(1.0), &quick()).unwrap();
        assert!(r.c2_infinite && r.iteration_diverged && r.chain_pass);
        assert!(r.norms_exceeded_cap(1e12));
    }

    #[test]
    fn bounded_dirac_and_power_window() {
        let w = Weight::constant();
        let d = RadonMeasure::dirac(0.0, 1.0).unwrap();
        let r = bounded_solution_check(2.0, &w, &d, 0.5, &quick()).unwrap();
        assert!(r.passed && rel(r.c2_inf, 0.25) < 1e-12 && rel(r.sup_u, 0.25) < 1e-7, "{r:?}");
        let sigma = RadonMeasure::power(1.2, 1.0).unwrap();
        let r = bounded_solution_check(2.0, &w, &sigma, 0.5, &quick()).unwrap();
        assert!(r.passed && !r.diverged && r.boundary_value < 1e-4, "{} {}", r.sup_u, r.boundary_value);
        let s = supersolution_check(2.0, 0.0, 1.2, 0.5, &quick()).unwrap();
        assert!(s.passed, "{s:?}");
    }

    #[test]
    fn hardy_examples() {
        let cfg = SweepConfig::default();
        let s = hardy_sweep(2.0, 0.0, 0.5, &[1.0, 1.9], &cfg).unwrap();
        assert!((s.threshold - 1.75).abs() < 1e-15);
        // past p − β the potential itself is infinite
        let far = hardy_sweep(2.0, 0.0, 0.5, &[2.0, 2.4], &cfg).unwrap();
        assert!(far.rows.iter().all(|r| r.observed == Solvability::NotSolvable), "{:?}", far.rows);
        assert_eq!(s.rows[0].observed, Solvability::Solvable);
        assert_eq!(s.rows[1].observed, Solvability::NotSolvable);
        let s = hardy_sweep(3.0, 1.0, 0.0, &[1.5], &cfg).unwrap();
        assert!((s.threshold - 4.0 / 3.0).abs() < 1e-15);
        assert_eq!(s.rows[0].observed, Solvability::NotSolvable);
        assert!(s.all_agree());
    }

    #[test]
    fn rejects_bad_input() {
        let w = Weight::constant();
        let d = RadonMeasure::dirac(0.0, 1.0).unwrap();
        assert!(iterate(2.0, &w, &RadonMeasure::zero(), 0.5, Gamma::Finite(1.0), &quick()).is_err());
        assert!(iterate(2.0, &w, &d, 1.0, Gamma::Finite(1.0), &quick()).is_err());
        assert!(iterate(2.0, &w, &d, 0.5, Gamma::Finite(-1.0), &quick()).is_err());
        assert!(hardy_sweep(2.0, 0.0, 0.5, &[f64::NAN], &SweepConfig::default()).is_err());
        let shallow = SweepConfig {
            levels: 2,
            ..SweepConfig::default()
        };
        assert!(hardy_sweep(2.0, 0.0, 0.5, &[1.0], &shallow).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn iteration_is_monotone_above_envelope(
            p in 1.5f64..3.5,
            qf in 0.1f64..0.9,
            x in -0.8f64..0.8,
            m in 0.1f64..2.0,
            c in 0.0f64..1.5,
        ) {
            let q = qf * (p - 1.0);
            let sigma = RadonMeasure::dirac(x, m).unwrap().add(&RadonMeasure::constant(c).unwrap());
            let t = iterate(p, &Weight::constant(), &sigma, q, Gamma::Finite(1.0), &quick()).unwrap();
            prop_assert!(t.converged && t.monotone);
            prop_assert!(t.envelope_violation() <= 1e-12 * t.sup());
        }
    }
}
