use std::path::PathBuf;

use rayon::prelude::*;

use quasilin::acceptance::{run_criterion, Outcome, CRITERIA};
use quasilin::energy::{energy, sup_norm_energy};
use quasilin::solver::potential;
use quasilin::sublinear::{default_alpha_grid, hardy_sweep, iterate, HardyRow, Solvability, SweepConfig};
use quasilin::trace::{default_family, rayleigh_lower, trace_bracket};
use quasilin::wolff::ratio_report;
use quasilin::Gamma;

use crate::config::RunConfig;
use crate::output::{ensure_dir, num, write_csv, write_curve, Report};
use crate::CliError;

/// Files written plus the scalar report, for printing.
#[derive(Debug, Default)]
pub struct CmdOutput {
    pub files: Vec<PathBuf>,
    pub report: Report,
}

impl CmdOutput {
    fn finish(mut self, cfg: &RunConfig, stem: &str) -> Result<CmdOutput, CliError> {
        if cfg.wants("txt") {
            let path = cfg.out_dir().join(format!("{stem}.txt"));
            self.files.push(self.report.write(&path)?);
        }
        Ok(self)
    }
}

fn start(cfg: &RunConfig) -> Result<CmdOutput, CliError> {
    ensure_dir(&cfg.out_dir())?;
    Ok(CmdOutput::default())
}

fn put_problem(r: &mut Report, cfg: &RunConfig) {
    r.put("p", cfg.problem.p).put("q", cfg.problem.q).put("weight", &cfg.weight.family).put("beta", cfg.weight.beta);
}

pub fn cmd_solve(cfg: &RunConfig) -> Result<CmdOutput, CliError> {
    let mut out = start(cfg)?;
    let (w, mu, scfg) = (cfg.build_weight()?, cfg.build_measure()?, cfg.solver_config()?);
    let r = potential(cfg.problem.p, &w, &mu, &scfg)?;
    let rep = &mut out.report;
    put_problem(rep, cfg);
    rep.put("converged", r.converged)
        .put("diverged", r.diverged)
        .put("truncation_levels_used", r.truncation_levels_used)
        .put("flux_constant", r.flux_constant)
        .put("boundary_residual", r.boundary_residual)
        .put("sup_u", if r.diverged { f64::INFINITY } else { r.solution.sup() })
        .put("center_value", if r.diverged { f64::INFINITY } else { r.solution.center_value() });
    if !r.diverged && cfg.wants("csv") {
        out.files.push(write_curve(&cfg.out_dir().join("solve.csv"), &r.solution)?);
    }
    let out = out.finish(cfg, "solve")?;
    if !r.converged && !r.diverged {
        return Err(CliError::numerical("solver::potential: truncation limit did not converge"));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy)]
pub struct WolffArgs {
    pub radius: f64,
    pub samples: usize,
    pub margin: f64,
}

pub fn cmd_wolff(cfg: &RunConfig, args: WolffArgs) -> Result<CmdOutput, CliError> {
    let mut out = start(cfg)?;
    let (w, mu) = (cfg.build_weight()?, cfg.build_measure()?);
    let r = ratio_report(cfg.problem.p, &w, &mu, args.margin, args.radius, args.samples)?;
    let rep = &mut out.report;
    put_problem(rep, cfg);
    rep.put("radius", args.radius)
        .put("samples", r.samples.len())
        .put("min_ratio", r.min_ratio.map_or("none".to_string(), num))
        .put("max_ratio", r.max_ratio.map_or("none".to_string(), num))
        .put("passed", r.passed);
    if cfg.wants("csv") {
        let rows = r.samples.iter().map(|s| {
            let ratio = if s.wolff > 0.0 { s.u / s.wolff } else { f64::NAN };
            [s.x, s.u, s.wolff, ratio, 1.0 - s.x.abs()].map(num)
        });
        out.files.push(write_csv(&cfg.out_dir().join("wolff.csv"), &["x", "u", "wolff", "ratio", "dist"], rows)?);
    }
    out.finish(cfg, "wolff")
}

pub fn cmd_energy(cfg: &RunConfig) -> Result<CmdOutput, CliError> {
    let mut out = start(cfg)?;
    let (w, mu, scfg) = (cfg.build_weight()?, cfg.build_measure()?, cfg.solver_config()?);
    let p = cfg.problem.p;
    let rep = &mut out.report;
    put_problem(rep, cfg);
    match cfg.gamma()? {
        Gamma::Finite(g) => {
            let e = energy(p, &w, &mu, g, &scfg)?;
            rep.put("gamma", g)
                .put("e_gamma", e.e_gamma)
                .put("grad_energy", e.grad_energy)
                .put("v_energy", e.v_energy)
                .put("c_e", e.c_e)
                .put("identity_gap", e.identity_gap)
                .put("sandwich_pass", e.sandwich_pass)
                .put("converged", e.converged)
                .put("diverged", e.diverged)
                .put("levels_used", e.levels_used);
            let bad = !e.converged && !e.diverged;
            let out = out.finish(cfg, "energy")?;
            if bad {
                return Err(CliError::numerical("energy::energy: truncation limit did not converge"));
            }
            Ok(out)
        }
        Gamma::Infinite => {
            let e = sup_norm_energy(p, &w, &mu, &scfg)?;
            rep.put("gamma", "inf")
                .put("sup_on_support", e.on_support)
                .put("sup_global", e.global)
                .put("equal", e.equal)
                .put("diverged", e.diverged);
            out.finish(cfg, "energy")
        }
    }
}

pub fn cmd_iterate(cfg: &RunConfig) -> Result<CmdOutput, CliError> {
    let mut out = start(cfg)?;
    let (w, sigma, icfg) = (cfg.build_weight()?, cfg.build_measure()?, cfg.iteration_config()?);
    let t = iterate(cfg.problem.p, &w, &sigma, cfg.problem.q, cfg.gamma()?, &icfg)?;
    let rep = &mut out.report;
    put_problem(rep, cfg);
    rep.put("converged", t.converged)
        .put("diverged", t.diverged)
        .put("monotone", t.monotone)
        .put("steps", t.steps)
        .put("final_residual", t.final_residual)
        .put("truncation_level", t.level)
        .put("norm", t.norm())
        .put("sup_u", t.sup())
        .put("envelope_violation", t.envelope_violation());
    if cfg.wants("csv") {
        if let Some(sol) = &t.solution {
            out.files.push(write_curve(&cfg.out_dir().join("iterate.csv"), sol)?);
        }
        let rows = t.norms.iter().enumerate().map(|(i, n)| [i.to_string(), num(*n)]);
        out.files.push(write_csv(&cfg.out_dir().join("iterate_norms.csv"), &["step", "norm"], rows)?);
    }
    let out = out.finish(cfg, "iterate")?;
    if !t.converged && !t.diverged {
        return Err(CliError::numerical(format!("sublinear::iterate: no convergence after {} steps", t.steps)));
    }
    Ok(out)
}

pub fn cmd_trace(cfg: &RunConfig) -> Result<CmdOutput, CliError> {
    let mut out = start(cfg)?;
    let (w, sigma, scfg) = (cfg.build_weight()?, cfg.build_measure()?, cfg.solver_config()?);
    let (p, q) = (cfg.problem.p, cfg.problem.q);
    let b = trace_bracket(p, &w, &sigma, q, &scfg)?;
    let r = rayleigh_lower(p, &w, &sigma, q, &default_family(&sigma), &scfg)?;
    let rep = &mut out.report;
    put_problem(rep, cfg);
    rep.put("energy", b.energy_value)
        .put("lower", b.lower)
        .put("upper", b.upper)
        .put("diverged", b.diverged)
        .put("rayleigh_lower", r.best)
        .put("rayleigh_consistent", r.best <= b.upper * (1.0 + 1e-9));
    if cfg.wants("csv") {
        let rows = r.quotients.iter().map(|(l, v)| [l.clone(), num(*v)]);
        out.files.push(write_csv(&cfg.out_dir().join("trace_quotients.csv"), &["test_function", "quotient"], rows)?);
    }
    out.finish(cfg, "trace")
}

/// One sweep axis, `name=lo:hi:step` or `name=v1,v2,...`.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub name: String,
    pub values: Vec<f64>,
}

pub const AXES: [&str; 4] = ["p", "beta", "q", "alpha"];

impl Axis {
    pub fn parse(spec: &str) -> Result<Axis, CliError> {
        let bad = |m: &str| CliError::validation(format!("sweep: axis {spec:?}: {m}"));
        let (name, rest) = spec.split_once('=').ok_or_else(|| bad("expected name=values"))?;
        let name = name.trim().to_string();
        if !AXES.contains(&name.as_str()) {
            return Err(bad("name must be one of p, beta, q, alpha"));
        }
        let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad("not a number"));
        let values = if rest.contains(':') {
            let parts: Vec<&str> = rest.split(':').collect();
            if parts.len() != 3 {
                return Err(bad("range must be lo:hi:step"));
            }
            let (lo, hi, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
            if !(step > 0.0 && hi >= lo) {
                return Err(bad("need step > 0 and hi >= lo"));
            }
            let n = ((hi - lo) / step + 1e-9).floor() as usize;
            // round to the step's decimals so 1.0 + 15·0.05 prints as 1.75
            (0..=n).map(|j| round_like(lo + step * j as f64, step)).collect()
        } else {
            rest.split(',').map(num).collect::<Result<Vec<f64>, _>>()?
        };
        if values.is_empty() {
            return Err(bad("no values"));
        }
        Ok(Axis { name, values })
    }
}

fn round_like(v: f64, step: f64) -> f64 {
    let digits = (-step.log10().floor()).max(0.0) as i32 + 2;
    let k = 10f64.powi(digits);
    (v * k).round() / k
}

#[derive(Debug, Clone)]
pub struct SweepArgs {
    pub axes: Vec<Axis>,
    pub levels: u32,
    pub window: usize,
    pub dead_band: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub p: f64,
    pub beta: f64,
    pub q: f64,
    pub alpha: f64,
}

/// Cartesian product of the axes over the config's values, in axis order
/// (first axis slowest). Without an `alpha` axis or a power density, each
/// `(p, β, q)` uses the default grid around its threshold.
pub fn sweep_points(cfg: &RunConfig, axes: &[Axis]) -> Result<Vec<SweepPoint>, CliError> {
    let base_alpha = cfg.measure.density.as_ref().filter(|d| d.family == "power").map(|d| d.alpha);
    let mut pts: Vec<(SweepPoint, bool)> = vec![(
        SweepPoint {
            p: cfg.problem.p,
            beta: cfg.weight.beta,
            q: cfg.problem.q,
            alpha: base_alpha.unwrap_or(f64::NAN),
        },
        base_alpha.is_some(),
    )];
    for ax in axes {
        let mut next = Vec::with_capacity(pts.len() * ax.values.len());
        for (pt, has_alpha) in &pts {
            for &v in &ax.values {
                let mut s = *pt;
                match ax.name.as_str() {
                    "p" => s.p = v,
                    "beta" => s.beta = v,
                    "q" => s.q = v,
                    _ => s.alpha = v,
                }
                next.push((s, *has_alpha || ax.name == "alpha"));
            }
        }
        pts = next;
    }
    let mut out = Vec::new();
    for (pt, has_alpha) in pts {
        if has_alpha {
            out.push(pt);
        } else {
            for a in default_alpha_grid(pt.p, pt.beta, pt.q)? {
                out.push(SweepPoint { alpha: a, ..pt });
            }
        }
    }
    Ok(out)
}

pub const SWEEP_COLUMNS: [&str; 11] =
    ["p", "beta", "q", "alpha", "threshold", "predicted", "observed", "slope", "energy", "in_dead_band", "agrees"];

fn solv(s: Solvability) -> &'static str {
    match s {
        Solvability::Solvable => "solvable",
        Solvability::NotSolvable => "not_solvable",
    }
}

pub fn sweep_row(pt: &SweepPoint, threshold: f64, row: &HardyRow) -> [String; 11] {
    [
        num(pt.p),
        num(pt.beta),
        num(pt.q),
        num(pt.alpha),
        num(threshold),
        solv(row.predicted).to_string(),
        solv(row.observed).to_string(),
        num(row.slope),
        num(row.energy),
        row.in_dead_band.to_string(),
        row.agrees.to_string(),
    ]
}

/// Rows run on the worker pool and are written in parameter order.
pub fn cmd_sweep(cfg: &RunConfig, args: &SweepArgs) -> Result<CmdOutput, CliError> {
    let mut out = start(cfg)?;
    let scfg = SweepConfig {
        solver: cfg.solver_config()?,
        levels: args.levels,
        window: args.window,
        dead_band: args.dead_band,
    };
    let pts = sweep_points(cfg, &args.axes)?;
    let rows: Vec<[String; 11]> = pts
        .par_iter()
        .map(|pt| {
            let s = hardy_sweep(pt.p, pt.beta, pt.q, &[pt.alpha], &scfg)?;
            Ok(sweep_row(pt, s.threshold, &s.rows[0]))
        })
        .collect::<Result<_, CliError>>()?;
    let agree = rows.iter().filter(|r| r[10] == "true").count();
    out.report.put("rows", rows.len()).put("agreeing", agree).put("all_agree", agree == rows.len());
    if cfg.wants("csv") {
        out.files.push(write_csv(&cfg.out_dir().join("sweep.csv"), &SWEEP_COLUMNS, rows)?);
    }
    out.finish(cfg, "sweep")
}

/// `acceptance` runs every criterion; a number runs just that one.
pub fn cmd_verify(cfg: &RunConfig, suite: &str, seed: u64) -> Result<(CmdOutput, Vec<Outcome>), CliError> {
    let ids: Vec<u32> = match suite {
        "acceptance" => CRITERIA.iter().map(|c| c.0).collect(),
        s => match s.parse::<u32>() {
            Ok(id) if CRITERIA.iter().any(|c| c.0 == id) => vec![id],
            _ => return Err(CliError::validation(format!("verify: unknown suite {s:?} (use \"acceptance\" or 1..=11)"))),
        },
    };
    let mut out = start(cfg)?;
    let outcomes: Vec<Outcome> = ids.par_iter().map(|&id| run_criterion(id, seed)).collect();
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    out.report
        .put("suite", suite)
        .put("seed", seed)
        .put("criteria", outcomes.len())
        .put("failed", failed)
        .put("passed", failed == 0);
    for o in &outcomes {
        out.report.put(&format!("criterion_{}", o.id), if o.passed { "PASS" } else { "FAIL" });
    }
    if cfg.wants("csv") {
        let rows = outcomes
            .iter()
            .map(|o| [o.id.to_string(), o.name.to_string(), (if o.passed { "PASS" } else { "FAIL" }).to_string(), o.detail.clone()]);
        out.files.push(write_csv(&cfg.out_dir().join("verify.csv"), &["id", "name", "status", "detail"], rows)?);
    }
    Ok((out.finish(cfg, "verify")?, outcomes))
}
