//! The Dirichlet problem `−(w|u′|^{p−2}u′)′ = μ`, `u(±1) = 0`.
//!
//! With `M(x) = μ([−1, x])` the flux is `w|u′|^{p−2}u′ = c − M`, so
//! `u′ = φ(c − M)·w^{−1/(p−1)}` with `φ(s) = sign(s)|s|^{1/(p−1)}`, and `c`
//! is the unique root of the increasing map `c ↦ ∫u′`. The unknown is kept
//! as `F₀ = c − M(0)` and each half is integrated inward from its endpoint,
//! which stays well conditioned when `μ` has huge mass near `±1`.
//!
//! Infinite measures are handled by [`potential`] through the truncations
//! `1_{F_k}μ`; their potentials increase to the extended potential.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{Point, Side};
use crate::grid::GridFunction;
use crate::limits::{LimitTracker, Step, Verdict};
use crate::measures::RadonMeasure;
use crate::mesh::{DiscreteMeasure, Mesh, MeshConfig};
use crate::params::check_p;
use crate::quad::{adaptive, adaptive_endpoint, brent};
use crate::weights::Weight;

const MODULE: &str = "solver";

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub mesh: MeshConfig,
    /// Relative tolerance for truncation limits.
    pub tol: f64,
    /// Values above `cap` count as `+∞`.
    pub cap: f64,
    pub min_level: u32,
    pub max_level: u32,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            mesh: MeshConfig::default(),
            tol: 1e-10,
            cap: 1e12,
            min_level: 1,
            max_level: 200,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        self.mesh.validate()?;
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Error::invalid(MODULE, "config", format!("tol must lie in (0, 1), got {}", self.tol)));
        }
        if !(self.cap > 0.0) {
            return Err(Error::invalid(MODULE, "config", "cap must be > 0"));
        }
        if self.min_level < 1 || self.min_level > self.max_level {
            return Err(Error::invalid(MODULE, "config", "need 1 <= min_level <= max_level"));
        }
        if self.max_level > self.mesh.dyadic_levels {
            return Err(Error::invalid(
                MODULE,
                "config",
                format!(
                    "max_level {} exceeds the dyadic levels of the mesh ({})",
                    self.max_level, self.mesh.dyadic_levels
                ),
            ));
        }
        Ok(())
    }
}

fn si(side: Side) -> usize {
    match side {
        Side::Left => 0,
        Side::Right => 1,
    }
}

/// `sign(s)·|s|^{inv}`.
#[inline]
fn phi(s: f64, inv: f64) -> f64 {
    if inv == 1.0 {
        s
    } else if inv == 0.5 {
        s.signum() * s.abs().sqrt()
    } else if s == 0.0 {
        0.0
    } else {
        s.signum() * s.abs().powf(inv)
    }
}

/// Weight-dependent quantities on one half of the mesh.
#[derive(Debug)]
struct SideKernel {
    /// `w^{−1/(p−1)}·|dd/dt|` at quadrature nodes
    wcj: Vec<f64>,
    /// `wcj·(Gauss weight)`
    cw: Vec<f64>,
    /// prefix sums of panel totals of `cw`
    cw_prefix: Vec<f64>,
    /// `wc` at mesh nodes, then at the endpoint
    wc_node: Vec<f64>,
    /// `∫_0^{d_min} wc`
    wc_tail: f64,
    /// `β_end/(p − 1)`
    b: f64,
}

/// Dirichlet solver for fixed `p`, weight and mesh.
#[derive(Debug, Clone)]
pub struct Solver {
    p: f64,
    inv: f64,
    weight: Weight,
    mesh: Arc<Mesh>,
    kernel: Arc<[SideKernel; 2]>,
}

/// Cumulative masses of a discrete measure on one half, counted from the
/// midpoint outward.
struct SideFlux<'a> {
    side: Side,
    rho: &'a [f64],
    /// at each quadrature node
    n_quad: Vec<f64>,
    /// per panel, at its inner end (atom there included)
    hi_n: Vec<f64>,
    /// per node, atom at the node excluded / included
    n_excl: Vec<f64>,
    n_incl: Vec<f64>,
    tail: &'a [crate::mesh::TailPart],
    tail_total: f64,
    /// panels below this index carry no mass and no interior atoms
    first_active: usize,
}

impl SideFlux<'_> {
    fn total(&self) -> f64 {
        self.n_incl[0] + self.tail_total
    }
}

impl Solver {
    pub fn new(p: f64, weight: &Weight, mesh: Arc<Mesh>) -> Result<Solver> {
        check_p(p, "solver")?;
        if !weight.conjugate_integrable(p) {
            return Err(Error::invalid(
                MODULE,
                "solver",
                format!("w^(-1/(p-1)) is not integrable near the endpoints for p = {p}"),
            ));
        }
        let rule = &mesh.rule;
        let n = rule.len();
        let mut ks = Vec::with_capacity(2);
        for side in [Side::Left, Side::Right] {
            let sm = mesh.side(side);
            let wc: Vec<f64> = (0..sm.quad_d.len()).map(|i| weight.conjugate(sm.quad_point(i), p)).collect();
            let wcj: Vec<f64> = wc.iter().zip(&sm.quad_jac).map(|(a, b)| a * b).collect();
            let cw: Vec<f64> = wcj.iter().enumerate().map(|(i, v)| v * rule.rule.weights[i % n]).collect();
            let mut cw_prefix = vec![0.0; sm.panels() + 1];
            for j in 0..sm.panels() {
                cw_prefix[j + 1] = cw_prefix[j] + cw[j * n..(j + 1) * n].iter().sum::<f64>();
            }
            let mut wc_node: Vec<f64> = (0..sm.nodes.len()).map(|j| weight.conjugate(sm.node_point(j), p)).collect();
            wc_node.push(weight.conjugate(Point::from_boundary(side, 0.0), p));
            let wc_tail = weight.conjugate_tail(side, sm.d_min(), p)?;
            if !wc.iter().chain(std::iter::once(&wc_tail)).all(|v| v.is_finite() && *v > 0.0) {
                return Err(Error::invalid(MODULE, "solver", "weight must be positive and finite inside (-1, 1)"));
            }
            ks.push(SideKernel {
                wcj,
                cw,
                cw_prefix,
                wc_node,
                wc_tail,
                b: weight.end_exponent(side) / (p - 1.0),
            });
        }
        let right = ks.pop().expect("two sides");
        let left = ks.pop().expect("two sides");
        Ok(Solver {
            p,
            inv: 1.0 / (p - 1.0),
            weight: weight.clone(),
            mesh,
            kernel: Arc::new([left, right]),
        })
    }

    /// Solver on a mesh refined at the features of the given measures.
    pub fn for_measures(p: f64, weight: &Weight, config: &MeshConfig, measures: &[&RadonMeasure]) -> Result<Solver> {
        let mut feats: Vec<Point> = measures.iter().flat_map(|m| m.features()).collect();
        feats.sort_by(|a, b| a.cmp_pos(b));
        feats.dedup();
        let mesh = Mesh::build(config, &feats)?;
        Solver::new(p, weight, mesh)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn weight(&self) -> &Weight {
        &self.weight
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn discretize(&self, mu: &RadonMeasure) -> Result<DiscreteMeasure> {
        DiscreteMeasure::new(self.mesh.clone(), mu)
    }

    fn side_flux<'a>(&self, dm: &'a DiscreteMeasure, side: Side) -> SideFlux<'a> {
        let sm = self.mesh.side(side);
        let m = dm.side(side);
        let rule = &self.mesh.rule;
        let n = rule.len();
        let panels = sm.panels();
        let mut n_quad = vec![0.0; panels * n];
        let mut hi_n = vec![0.0; panels];
        let mut n_excl = vec![0.0; panels + 1];
        let mut n_incl = vec![0.0; panels + 1];
        let mut run = m.atoms[panels];
        n_incl[panels] = run;
        let mut v = vec![0.0; n];
        let mut first_dense = panels;
        for j in (0..panels).rev() {
            hi_n[j] = run;
            let base = j * n;
            let mut mass = 0.0;
            for k in 0..n {
                v[k] = m.rho[base + k] * sm.quad_jac[base + k];
                mass += rule.rule.weights[k] * v[k];
            }
            if mass > 0.0 {
                first_dense = j;
                for i in 0..n {
                    let row = &rule.from_left[i * n..(i + 1) * n];
                    n_quad[base + i] = run + row.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>();
                }
            } else {
                n_quad[base..base + n].iter_mut().for_each(|x| *x = run);
            }
            run += mass;
            n_excl[j] = run;
            run += m.atoms[j];
            n_incl[j] = run;
        }
        let first_atom = (1..panels).find(|&j| m.atoms[j] > 0.0).unwrap_or(panels);
        let tail_total: f64 = m.tail.iter().map(|t| t.mass(sm.d_min())).sum();
        SideFlux {
            side,
            rho: &m.rho,
            n_quad,
            hi_n,
            n_excl,
            n_incl,
            tail: &m.tail,
            tail_total,
            first_active: first_dense.min(first_atom),
        }
    }

    /// `u` at `d_min` for the oriented flux offset `b`.
    fn end_value(&self, sf: &SideFlux, b: f64) -> f64 {
        let k = &self.kernel[si(sf.side)];
        let a_end = b + sf.n_incl[0];
        if sf.tail.is_empty() {
            return phi(a_end, self.inv) * k.wc_tail;
        }
        let d0 = self.mesh.side(sf.side).d_min();
        let side = sf.side;
        let tail = sf.tail;
        adaptive_endpoint(
            |d| {
                let t: f64 = tail
                    .iter()
                    .map(|tp| tp.coef * (d0.powf(1.0 - tp.alpha) - d.powf(1.0 - tp.alpha)) / (1.0 - tp.alpha))
                    .sum();
                phi(a_end + t, self.inv) * self.weight.conjugate(Point::from_boundary(side, d), self.p)
            },
            d0,
            k.b.max(0.0),
            1e-300,
            1e-13,
        )
        .value
    }

    /// Panels where `φ(A)` is not smooth enough for the fixed rule: the
    /// flux changes sign inside, or comes close to zero relative to its
    /// variation. `A` is taken from the Legendre interpolant of `ρ·|dd/dt|`.
    fn special_panel(&self, sf: &SideFlux, j: usize, b: f64) -> Option<CrossingPanel> {
        let a0 = b + sf.hi_n[j];
        let a1 = b + sf.n_excl[j];
        if !self.is_special(a0, a1) {
            return None;
        }
        self.panel_model(sf.side, sf.rho, j, a0, a1)
    }

    fn is_special(&self, a0: f64, a1: f64) -> bool {
        let crossing = a0 < 0.0 && a1 > 0.0;
        crossing || (self.inv != 1.0 && a0 != a1 && a0.abs().min(a1.abs()) < (a1 - a0).abs())
    }

    /// Flux model on panel `j` with end values `a0` (inner) and `a1` (outer).
    fn panel_model(&self, side: Side, rho: &[f64], j: usize, a0: f64, a1: f64) -> Option<CrossingPanel> {
        let sm = self.mesh.side(side);
        let rule = &self.mesh.rule;
        let n = rule.len();
        let base = j * n;
        let v: Vec<f64> = (0..n).map(|k| rho[base + k] * sm.quad_jac[base + k]).collect();
        let coeffs = rule.coefficients(&v);
        let t_star = if a0 < 0.0 && a1 > 0.0 {
            let r = brent(|t| a0 + rule.integral_from_left(&coeffs, t), -1.0, 1.0, Some(a0), Some(a1), 1e-15, 200)?;
            Some(r.x.clamp(-1.0, 1.0))
        } else {
            None
        };
        Some(CrossingPanel {
            a0,
            coeffs,
            t_star,
            lo: sm.nodes[j],
            hi: sm.nodes[j + 1],
        })
    }

    fn special_integral(&self, side: Side, cp: &CrossingPanel, ta: f64, tb: f64) -> f64 {
        let rule = &self.mesh.rule;
        let l = (cp.hi / cp.lo).ln();
        let h = |t: f64| {
            let a = cp.a0 + rule.integral_from_left(&cp.coeffs, t);
            let d = cp.hi * (-(t + 1.0) * 0.5 * l).exp();
            phi(a, self.inv) * self.weight.conjugate(Point::from_boundary(side, d), self.p) * d * 0.5 * l
        };
        let Some(ts) = cp.t_star else {
            return adaptive(h, ta, tb, 1e-300, 1e-15, 200).value;
        };
        // t = t* ± Lτ² removes the root singularity of φ at t*
        let mut total = 0.0;
        let (a, b) = (ta, tb.min(ts));
        if b > a {
            let l = ts - a;
            let lo = ((ts - b) / l).max(0.0).sqrt();
            total += adaptive(|tau| h(ts - l * tau * tau) * 2.0 * l * tau, lo, 1.0, 1e-300, 1e-15, 200).value;
        }
        let (a, b) = (ta.max(ts), tb);
        if b > a {
            let l = b - ts;
            let lo = ((a - ts) / l).max(0.0).sqrt();
            total += adaptive(|tau| h(ts + l * tau * tau) * 2.0 * l * tau, lo, 1.0, 1e-300, 1e-15, 200).value;
        }
        total
    }

    /// Composite rule on a special panel, graded geometrically toward the
    /// flux zero (or toward the end nearer an exterior zero), with `u`
    /// increments carried along.
    fn panel_profile(&self, side: Side, cp: &CrossingPanel) -> PanelProfile {
        let rule = &self.mesh.rule;
        let n = rule.len();
        let l = (cp.hi / cp.lo).ln();
        let mut bp = vec![-1.0, 1.0];
        match cp.t_star {
            Some(ts) => {
                bp.push(ts);
                for (end, len) in [(-1.0, ts + 1.0), (1.0, 1.0 - ts)] {
                    let dir = if end < ts { -1.0 } else { 1.0 };
                    for k in 0..=PROFILE_LEVELS {
                        bp.push(ts + dir * len * 0.5f64.powi(k));
                    }
                }
            }
            None => {
                let a1 = cp.a0 + rule.integral_from_left(&cp.coeffs, 1.0);
                let (e, ae, dir) = if cp.a0.abs() <= a1.abs() { (-1.0, cp.a0, 1.0) } else { (1.0, a1, -1.0) };
                let slope = rule.interpolate(&cp.coeffs, e).abs();
                let delta = if slope > 0.0 { ae.abs() / slope } else { f64::INFINITY };
                // δ = 0 (zero exactly at the end) gets the full depth
                let levels = if delta >= 2.0 {
                    1
                } else {
                    ((2.0 / delta).log2().ceil() + 2.0).min(PROFILE_LEVELS as f64) as i32
                };
                for k in 1..=levels {
                    bp.push(e + dir * 2.0 * 0.5f64.powi(k));
                }
            }
        }
        bp.retain(|t| (-1.0..=1.0).contains(t));
        bp.sort_by(|a, b| a.total_cmp(b));
        bp.dedup();

        let mut prof = PanelProfile::default();
        let mut pieces = Vec::with_capacity(bp.len());
        for w in bp.windows(2) {
            let (a, b) = (w[0], w[1]);
            let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
            let mut hv = vec![0.0; n];
            for i in 0..n {
                let t = mid + half * rule.rule.nodes[i];
                let flux = cp.a0 + rule.integral_from_left(&cp.coeffs, t);
                let d = cp.hi * (-(t + 1.0) * 0.5 * l).exp();
                let g = self.weight.conjugate(Point::from_boundary(side, d), self.p) * d * 0.5 * l;
                hv[i] = phi(flux, self.inv) * g;
                prof.t.push(t);
                prof.wt.push(half * rule.rule.weights[i]);
                prof.a.push(flux);
                prof.g.push(g);
            }
            // ∫_{t_i}^{b} h within the piece
            for i in 0..n {
                let inc: f64 = (0..n).map(|k| rule.to_right[i * n + k] * hv[k]).sum();
                prof.u_inc.push(half * inc);
            }
            pieces.push(half * (0..n).map(|k| rule.rule.weights[k] * hv[k]).sum::<f64>());
        }
        // add the pieces to the right of each piece
        let mut acc = 0.0;
        for (pi, piece) in pieces.iter().enumerate().rev() {
            for v in &mut prof.u_inc[pi * n..(pi + 1) * n] {
                *v += acc;
            }
            acc += piece;
        }
        prof.total = acc;
        prof
    }

    /// `∫_0^1 φ(b + N)·wc` along one half.
    fn side_integral(&self, sf: &SideFlux, b: f64) -> f64 {
        let k = &self.kernel[si(sf.side)];
        let n = self.mesh.order();
        let panels = sf.hi_n.len();
        let mut total = self.end_value(sf, b);
        let j0 = sf.first_active;
        if j0 > 0 {
            total += phi(b + sf.hi_n[j0 - 1], self.inv) * k.cw_prefix[j0];
        }
        for j in j0..panels {
            let a_hi = b + sf.hi_n[j];
            let a_lo = b + sf.n_excl[j];
            if a_hi == a_lo {
                total += phi(a_hi, self.inv) * (k.cw_prefix[j + 1] - k.cw_prefix[j]);
                continue;
            }
            if let Some(cp) = self.special_panel(sf, j, b) {
                total += self.special_integral(sf.side, &cp, -1.0, 1.0);
                continue;
            }
            let base = j * n;
            let mut s = 0.0;
            for i in 0..n {
                s += k.cw[base + i] * phi(b + sf.n_quad[base + i], self.inv);
            }
            total += s;
        }
        total
    }

    /// Solves with a discrete measure of finite mass. `hint` is an
    /// approximate `F₀` (for instance from a nearby truncation level).
    pub fn solve(&self, dm: &DiscreteMeasure, hint: Option<f64>) -> Result<Solution> {
        if !Arc::ptr_eq(dm.mesh(), &self.mesh) {
            return Err(Error::invalid(MODULE, "solve", "measure is discretized on a different mesh"));
        }
        if !dm.is_finite() {
            return Err(Error::invalid(
                MODULE,
                "solve",
                "measure has infinite mass; use potential() for truncation limits",
            ));
        }
        let fl = self.side_flux(dm, Side::Left);
        let fr = self.side_flux(dm, Side::Right);
        let (nl, nr) = (fl.total(), fr.total());
        if !(nl.is_finite() && nr.is_finite()) {
            return Err(Error::invalid(MODULE, "solve", "measure mass is not finite"));
        }
        let f0 = if nl + nr == 0.0 {
            0.0
        } else {
            self.find_flux(&fl, &fr, hint)?
        };
        Ok(self.assemble(dm, &fl, &fr, f0))
    }

    fn find_flux(&self, fl: &SideFlux, fr: &SideFlux, hint: Option<f64>) -> Result<f64> {
        let (nl, nr) = (fl.total(), fr.total());
        let g = |f0: f64| self.side_integral(fl, f0) - self.side_integral(fr, -f0);
        let inner = inner_mass(fl, &self.mesh) + inner_mass(fr, &self.mesh);
        let scale = if inner > 0.0 { inner } else { nl + nr };
        let xtol = 1e-15 * scale;
        let (mut a, mut b) = (-nl, nr);
        let (mut ga, mut gb) = (None, None);
        if let Some(h) = hint.filter(|h| h.is_finite() && *h > -nl && *h < nr) {
            let mut s = 1e-3 * scale.max(h.abs() * 1e-6);
            loop {
                let lo = (h - s).max(-nl);
                let hi = (h + s).min(nr);
                let (gl, gh) = (g(lo), g(hi));
                if gl <= 0.0 && gh >= 0.0 {
                    a = lo;
                    b = hi;
                    ga = Some(gl);
                    gb = Some(gh);
                    break;
                }
                if lo == -nl && hi == nr {
                    break;
                }
                s *= 16.0;
            }
        }
        let ga = ga.unwrap_or_else(|| g(a));
        let gb = gb.unwrap_or_else(|| g(b));
        if ga > 0.0 || gb < 0.0 {
            return Err(Error::Bracket {
                module: MODULE,
                op: "solve",
                msg: format!("no sign change of the boundary map on [{a:e}, {b:e}] (values {ga:e}, {gb:e})"),
            });
        }
        let root = brent(g, a, b, Some(ga), Some(gb), xtol, 200).ok_or_else(|| Error::Bracket {
            module: MODULE,
            op: "solve",
            msg: "bracket lost".into(),
        })?;
        Ok(root.x)
    }

    fn assemble(&self, dm: &DiscreteMeasure, fl: &SideFlux, fr: &SideFlux, f0: f64) -> Solution {
        let left = self.side_solution(fl, f0, f0);
        let right = self.side_solution(fr, -f0, f0);
        let ul = *left.u_node.last().expect("nodes");
        let ur = *right.u_node.last().expect("nodes");
        let c = f0 + dm.side_mass(Side::Left);
        Solution {
            solver: self.clone(),
            measure: dm.clone(),
            f0,
            c,
            residual: (ul - ur).abs(),
            sides: [left, right],
        }
    }

    /// Values on one half for the oriented offset `b`.
    fn side_solution(&self, sf: &SideFlux, b: f64, f0: f64) -> SideSolution {
        let side = sf.side;
        let k = &self.kernel[si(side)];
        let sm = self.mesh.side(side);
        let rule = &self.mesh.rule;
        let n = rule.len();
        let panels = sm.panels();
        let a_quad: Vec<f64> = sf.n_quad.iter().map(|v| b + v).collect();
        let mut u_quad = vec![0.0; panels * n];
        let mut u_node = vec![0.0; panels + 1];
        let mut f = vec![0.0; n];
        u_node[0] = self.end_value(sf, b);
        for j in 0..panels {
            let base = j * n;
            let u_lo = u_node[j];
            if let Some(cp) = self.special_panel(sf, j, b) {
                for i in 0..n {
                    u_quad[base + i] = u_lo + self.special_integral(side, &cp, rule.rule.nodes[i], 1.0);
                }
                u_node[j + 1] = u_lo + self.special_integral(side, &cp, -1.0, 1.0);
                continue;
            }
            for i in 0..n {
                f[i] = phi(a_quad[base + i], self.inv) * k.wcj[base + i];
            }
            for i in 0..n {
                let row = &rule.to_right[i * n..(i + 1) * n];
                u_quad[base + i] = u_lo + row.iter().zip(&f).map(|(a, b)| a * b).sum::<f64>();
            }
            let w = &rule.rule.weights;
            u_node[j + 1] = u_lo + f.iter().zip(w).map(|(a, b)| a * b).sum::<f64>();
        }
        // x-oriented flux c − M at the nodes (M right-continuous)
        let flux_node: Vec<f64> = match side {
            Side::Left => sf.n_excl.iter().map(|nv| f0 + nv).collect(),
            Side::Right => sf.n_incl.iter().map(|nv| f0 - nv).collect(),
        };
        let flux_end = match side {
            Side::Left => f0 + sf.total(),
            Side::Right => f0 - sf.total(),
        };
        SideSolution {
            a_quad,
            u_quad,
            u_node,
            flux_node,
            flux_end,
            a_end: b + sf.n_incl[0],
            a_hi: sf.hi_n.iter().map(|v| b + v).collect(),
            a_lo: sf.n_excl[..panels].iter().map(|v| b + v).collect(),
            u_mid: 0.0,
        }
        .finish()
    }

    /// Extended potential of a possibly infinite measure given on this
    /// solver's mesh.
    pub fn potential(&self, mu: &RadonMeasure, cfg: &SolverConfig) -> Result<PotentialResult> {
        cfg.validate()?;
        let dm = self.discretize(mu)?;
        let min_level = cfg.min_level.max(dm.features_level(&mu.features()));
        self.potential_discrete(&dm, min_level, cfg)
    }

    /// Truncation limit for a discrete measure. Finite measures are solved
    /// directly.
    pub fn potential_discrete(&self, dm: &DiscreteMeasure, min_level: u32, cfg: &SolverConfig) -> Result<PotentialResult> {
        cfg.validate()?;
        if dm.is_finite() {
            let sol = self.solve(dm, None)?;
            let sup = sol.sup();
            let diverged = !(sup <= cfg.cap);
            return Ok(PotentialResult::from_solution(sol, 0, diverged, !diverged, vec![sup]));
        }
        let mut tracker = LimitTracker::new(cfg.tol, cfg.cap, min_level.max(cfg.min_level));
        let mut prev: Option<Solution> = None;
        let mut prev_vals: Vec<f64> = Vec::new();
        let mut history = Vec::new();
        for k in 1..=cfg.max_level {
            let tk = dm.truncated(k)?;
            let sol = self.solve(&tk, prev.as_ref().map(|s| s.flux_offset()))?;
            let vals = sol.grid_values();
            let sup = vals.iter().copied().fold(0.0, f64::max);
            let mut inc = sup;
            if !prev_vals.is_empty() {
                let mut worst = 0.0f64;
                inc = 0.0;
                for (a, b) in vals.iter().zip(&prev_vals) {
                    worst = worst.max(b - a);
                    inc = inc.max(a - b);
                }
                if worst > 1e-9 * sup.max(f64::MIN_POSITIVE) {
                    return Err(Error::NonMonotone {
                        module: MODULE,
                        op: "potential",
                        violation: worst,
                        msg: format!("truncation level {k} decreased the potential"),
                    });
                }
            }
            history.push(sup);
            let step = tracker.push(k, sup, inc);
            prev_vals = vals;
            prev = Some(sol);
            match step {
                Step::Continue => {}
                Step::Converged => {
                    let sol = prev.take().expect("solution");
                    return Ok(PotentialResult::from_solution(sol, k, false, true, history));
                }
                Step::Diverged => {
                    let sol = prev.take().expect("solution");
                    return Ok(PotentialResult::from_solution(sol, k, true, false, history));
                }
            }
        }
        let sol = prev.expect("at least one level");
        let verdict = tracker.verdict();
        Ok(PotentialResult::from_solution(
            sol,
            cfg.max_level,
            verdict == Verdict::Diverged,
            verdict == Verdict::Converged,
            history,
        ))
    }
}

fn inner_mass(sf: &SideFlux, mesh: &Mesh) -> f64 {
    let sm = mesh.side(sf.side);
    let j = sm.find_node(0.5).unwrap_or(0);
    sf.n_incl[j]
}

/// Nodes `t`, weights, flux, `wc·jac` factor and `∫_t^1 u′` on a special panel.
#[derive(Debug, Default)]
struct PanelProfile {
    t: Vec<f64>,
    wt: Vec<f64>,
    a: Vec<f64>,
    g: Vec<f64>,
    u_inc: Vec<f64>,
    total: f64,
}

/// Geometric levels of a panel profile (`2^{−50}` of the panel width).
const PROFILE_LEVELS: i32 = 50;

struct CrossingPanel {
    a0: f64,
    coeffs: Vec<f64>,
    t_star: Option<f64>,
    lo: f64,
    hi: f64,
}

#[derive(Debug, Clone)]
struct SideSolution {
    /// oriented flux `A = ±(c − M)` at quadrature nodes
    a_quad: Vec<f64>,
    u_quad: Vec<f64>,
    u_node: Vec<f64>,
    flux_node: Vec<f64>,
    flux_end: f64,
    /// oriented flux on the endpoint segment next to `d_min`
    a_end: f64,
    /// oriented flux at the inner and outer end of each panel
    a_hi: Vec<f64>,
    a_lo: Vec<f64>,
    u_mid: f64,
}

impl SideSolution {
    fn finish(mut self) -> Self {
        self.u_mid = *self.u_node.last().expect("nodes");
        self
    }
}

/// A computed potential on a fixed mesh, with values at the quadrature
/// nodes and the mesh nodes.
#[derive(Debug, Clone)]
pub struct Solution {
    solver: Solver,
    measure: DiscreteMeasure,
    f0: f64,
    c: f64,
    residual: f64,
    sides: [SideSolution; 2],
}

impl Solution {
    pub fn solver(&self) -> &Solver {
        &self.solver
    }

    pub fn p(&self) -> f64 {
        self.solver.p
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.solver.mesh
    }

    pub fn measure(&self) -> &DiscreteMeasure {
        &self.measure
    }

    /// The constant `c` in `w|u′|^{p−2}u′ = c − M(x)`.
    pub fn flux_constant(&self) -> f64 {
        self.c
    }

    /// `c − M(0)`.
    pub fn flux_offset(&self) -> f64 {
        self.f0
    }

    /// Mismatch of the two halves at the midpoint, i.e. `|u(1)|` when `u` is
    /// integrated from `−1`.
    pub fn boundary_residual(&self) -> f64 {
        self.residual
    }

    pub fn u_quad(&self, side: Side) -> &[f64] {
        &self.sides[si(side)].u_quad
    }

    pub fn u_node(&self, side: Side) -> &[f64] {
        &self.sides[si(side)].u_node
    }

    /// `|w|u′|^{p−2}u′|` at the quadrature nodes.
    pub fn flux_quad(&self, side: Side) -> Vec<f64> {
        self.sides[si(side)].a_quad.iter().map(|a| a.abs()).collect()
    }

    fn grid_values(&self) -> Vec<f64> {
        let l = &self.sides[0];
        let r = &self.sides[1];
        let mut v = Vec::with_capacity(l.u_node.len() + r.u_node.len() + 1);
        v.push(0.0);
        v.extend_from_slice(&l.u_node);
        v.extend(r.u_node[..r.u_node.len() - 1].iter().rev());
        v.push(0.0);
        v
    }

    fn node_grid(&self, left: impl Fn(&SideSolution) -> (f64, Vec<f64>), right: impl Fn(&SideSolution) -> (f64, Vec<f64>)) -> GridFunction {
        let (l_end, l) = left(&self.sides[0]);
        let (r_end, r) = right(&self.sides[1]);
        let mut v = Vec::with_capacity(l.len() + r.len() + 1);
        v.push(l_end);
        v.extend_from_slice(&l);
        v.extend(r[..r.len() - 1].iter().rev());
        v.push(r_end);
        GridFunction::new(self.mesh().grid_points(), v).expect("mesh grid is valid")
    }

    /// `u` on the mesh grid.
    pub fn u(&self) -> GridFunction {
        GridFunction::new(self.mesh().grid_points(), self.grid_values()).expect("mesh grid is valid")
    }

    /// Flux `c − M(x)` on the mesh grid.
    pub fn flux(&self) -> GridFunction {
        let f = |s: &SideSolution| (s.flux_end, s.flux_node.clone());
        self.node_grid(f, f)
    }

    /// `u′` on the mesh grid (right-continuous at atoms).
    pub fn derivative(&self) -> GridFunction {
        let inv = self.solver.inv;
        let mk = |side: Side| {
            let k = &self.solver.kernel[si(side)];
            move |s: &SideSolution| {
                let end = phi(s.flux_end, inv) * k.wc_node[k.wc_node.len() - 1];
                let v = s.flux_node.iter().zip(&k.wc_node).map(|(f, w)| phi(*f, inv) * w).collect();
                (end, v)
            }
        };
        self.node_grid(mk(Side::Left), mk(Side::Right))
    }

    /// `u` sampled at the quadrature and mesh nodes.
    pub fn nodal(&self) -> NodalFunction {
        NodalFunction {
            mesh: self.mesh().clone(),
            quad: [self.sides[0].u_quad.clone(), self.sides[1].u_quad.clone()],
            node: [self.sides[0].u_node.clone(), self.sides[1].u_node.clone()],
            tail_exp: [1.0 - self.solver.kernel[0].b, 1.0 - self.solver.kernel[1].b],
        }
    }

    pub fn sup(&self) -> f64 {
        self.sides
            .iter()
            .flat_map(|s| s.u_quad.iter().chain(&s.u_node))
            .copied()
            .fold(0.0, f64::max)
    }

    /// Supremum of `u` over the support of the measure.
    pub fn sup_on_support(&self) -> f64 {
        self.nodal().sup_on_support(&self.measure)
    }

    /// `∫ u^s dμ` over the measure this solution was computed from.
    pub fn moment(&self, s: f64) -> f64 {
        self.moment_against(&self.measure, s)
    }

    /// `∫ u^s dν` for a measure on the same mesh. Panels where `u` is not
    /// smooth (its flux vanishes nearby) are integrated adaptively.
    pub fn moment_against(&self, nu: &DiscreteMeasure, s: f64) -> f64 {
        let mut total = self.nodal().moment(nu, s);
        let solver = &self.solver;
        let rule = &solver.mesh.rule;
        let n = rule.len();
        let wts = &rule.rule.weights;
        let pw = |u: f64| if s == 1.0 { u } else { u.max(0.0).powf(s) };
        for side in [Side::Left, Side::Right] {
            let sm = solver.mesh.side(side);
            let sol = &self.sides[si(side)];
            let rho_nu = &nu.side(side).rho;
            for j in 0..sol.a_hi.len() {
                let base = j * n;
                if rho_nu[base..base + n].iter().all(|&r| r == 0.0) || !solver.is_special(sol.a_hi[j], sol.a_lo[j]) {
                    continue;
                }
                let Some(cp) = solver.panel_model(side, &self.measure.side(side).rho, j, sol.a_hi[j], sol.a_lo[j]) else {
                    continue;
                };
                let v: Vec<f64> = (base..base + n).map(|i| rho_nu[i] * sm.quad_jac[i]).collect();
                let gl: f64 = (0..n).map(|k| wts[k] * v[k] * pw(sol.u_quad[base + k])).sum();
                let rc = rule.coefficients(&v);
                let u_lo = sol.u_node[j];
                let prof = solver.panel_profile(side, &cp);
                let exact: f64 = (0..prof.t.len())
                    .map(|k| prof.wt[k] * rule.interpolate(&rc, prof.t[k]) * pw(u_lo + prof.u_inc[k]))
                    .sum();
                total += exact - gl;
            }
        }
        total
    }

    /// `∫ |u′|^p u^s w dx`.
    pub fn gradient_moment(&self, s: f64) -> f64 {
        let solver = &self.solver;
        let p = solver.p;
        let e = p / (p - 1.0);
        let pw = |u: f64| if s == 0.0 { 1.0 } else { u.max(0.0).powf(s) };
        let rule = &solver.mesh.rule;
        let n = rule.len();
        let mut total = 0.0;
        for side in [Side::Left, Side::Right] {
            let k = &solver.kernel[si(side)];
            let sol = &self.sides[si(side)];
            let rho = &self.measure.side(side).rho;
            for j in 0..sol.a_hi.len() {
                let base = j * n;
                let special = if solver.is_special(sol.a_hi[j], sol.a_lo[j]) {
                    solver.panel_model(side, rho, j, sol.a_hi[j], sol.a_lo[j])
                } else {
                    None
                };
                if let Some(cp) = special {
                    // |A|^e and u are not smooth here
                    let prof = solver.panel_profile(side, &cp);
                    let u_lo = sol.u_node[j];
                    for k in 0..prof.t.len() {
                        let a = prof.a[k].abs();
                        if a > 0.0 {
                            total += prof.wt[k] * a.powf(e) * prof.g[k] * pw(u_lo + prof.u_inc[k]);
                        }
                    }
                    continue;
                }
                for i in base..base + n {
                    let a = sol.a_quad[i].abs();
                    if a > 0.0 {
                        total += k.cw[i] * a.powf(e) * pw(sol.u_quad[i]);
                    }
                }
            }
            let a = sol.a_end.abs();
            if a > 0.0 {
                total += a.powf((p + s) / (p - 1.0)) * k.wc_tail.powf(s + 1.0) / (s + 1.0);
            }
        }
        total
    }

    /// `∫ |v′|^p w dx` for `v = u^θ`.
    pub fn power_gradient_energy(&self, theta: f64) -> f64 {
        // |v′|^p = θ^p u^{(θ−1)p} |u′|^p
        theta.abs().powf(self.solver.p) * self.gradient_moment((theta - 1.0) * self.solver.p)
    }

    /// `u` at an arbitrary point, integrated from the nearest mesh node
    /// with the panel's flux model.
    pub fn eval(&self, pt: Point) -> f64 {
        let side = pt.side();
        let d = pt.dist();
        let sm = self.mesh().side(side);
        let sol = &self.sides[si(side)];
        if d <= 0.0 {
            return 0.0;
        }
        if d < sm.d_min() {
            let w = self.solver.weight();
            let p = self.solver.p;
            let (a, b) = (w.conjugate_tail(side, d, p), w.conjugate_tail(side, sm.d_min(), p));
            return match (a, b) {
                (Ok(a), Ok(b)) if b > 0.0 => sol.u_node[0] * a / b,
                _ => sol.u_node[0],
            };
        }
        let j = sm.nodes.partition_point(|&x| x <= d).min(sm.panels()) - 1;
        if sm.nodes[j] == d {
            return sol.u_node[j];
        }
        let (lo, hi) = (sm.nodes[j], sm.nodes[j + 1]);
        let t = -1.0 - 2.0 * (d / hi).ln() / (hi / lo).ln();
        match self.solver.panel_model(side, &self.measure.side(side).rho, j, sol.a_hi[j], sol.a_lo[j]) {
            Some(cp) => sol.u_node[j] + self.solver.special_integral(side, &cp, t.clamp(-1.0, 1.0), 1.0),
            None => sol.u_node[j],
        }
    }

    /// `u` at the midpoint.
    pub fn center_value(&self) -> f64 {
        self.sides[0].u_mid
    }
}

/// A function sampled at the quadrature and mesh nodes of a mesh, with the
/// model `u ≈ u(d_min)·(d/d_min)^e` on the endpoint segments.
#[derive(Debug, Clone)]
pub struct NodalFunction {
    mesh: Arc<Mesh>,
    quad: [Vec<f64>; 2],
    node: [Vec<f64>; 2],
    tail_exp: [f64; 2],
}

impl NodalFunction {
    pub fn zero(mesh: Arc<Mesh>) -> Self {
        let l = mesh.side(Side::Left);
        let r = mesh.side(Side::Right);
        NodalFunction {
            quad: [vec![0.0; l.quad_d.len()], vec![0.0; r.quad_d.len()]],
            node: [vec![0.0; l.nodes.len()], vec![0.0; r.nodes.len()]],
            tail_exp: [1.0, 1.0],
            mesh,
        }
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn quad(&self, side: Side) -> &[f64] {
        &self.quad[si(side)]
    }

    pub fn node(&self, side: Side) -> &[f64] {
        &self.node[si(side)]
    }

    /// `a·u^θ`, tail model included.
    pub fn power(&self, a: f64, theta: f64) -> NodalFunction {
        let f = |v: f64| if theta == 1.0 { a * v } else { a * v.max(0.0).powf(theta) };
        NodalFunction {
            mesh: self.mesh.clone(),
            quad: [self.quad[0].iter().map(|&v| f(v)).collect(), self.quad[1].iter().map(|&v| f(v)).collect()],
            node: [self.node[0].iter().map(|&v| f(v)).collect(), self.node[1].iter().map(|&v| f(v)).collect()],
            tail_exp: [self.tail_exp[0] * theta, self.tail_exp[1] * theta],
        }
    }

    /// `f(x, u(x))` at every node; the tail model is kept.
    pub fn map_points(&self, f: impl Fn(Point, f64) -> f64) -> NodalFunction {
        let mut out = self.clone();
        for side in [Side::Left, Side::Right] {
            let sm = self.mesh.side(side);
            for (i, v) in out.quad[si(side)].iter_mut().enumerate() {
                *v = f(sm.quad_point(i), *v);
            }
            for (j, v) in out.node[si(side)].iter_mut().enumerate() {
                *v = f(sm.node_point(j), *v);
            }
        }
        out
    }

    /// Pointwise minimum with a function on the same mesh.
    pub fn min(&self, other: &NodalFunction) -> NodalFunction {
        let mut out = self.clone();
        for k in 0..2 {
            for (a, b) in out.quad[k].iter_mut().zip(&other.quad[k]) {
                *a = a.min(*b);
            }
            for (a, b) in out.node[k].iter_mut().zip(&other.node[k]) {
                *a = a.min(*b);
            }
        }
        out
    }

    /// Values on [`Mesh::grid_points`], zero at `±1`.
    pub fn grid_values(&self) -> Vec<f64> {
        let (l, r) = (&self.node[0], &self.node[1]);
        let mut v = Vec::with_capacity(l.len() + r.len() + 1);
        v.push(0.0);
        v.extend_from_slice(l);
        v.extend(r[..r.len() - 1].iter().rev());
        v.push(0.0);
        v
    }

    pub fn grid(&self) -> GridFunction {
        GridFunction::new(self.mesh.grid_points(), self.grid_values()).expect("mesh grid is valid")
    }

    pub fn sup(&self) -> f64 {
        self.quad
            .iter()
            .chain(&self.node)
            .flat_map(|v| v.iter())
            .copied()
            .fold(0.0, f64::max)
    }

    /// Supremum over the support of `nu`.
    pub fn sup_on_support(&self, nu: &DiscreteMeasure) -> f64 {
        let n = self.mesh.order();
        let mut best = 0.0f64;
        for side in [Side::Left, Side::Right] {
            let m = nu.side(side);
            let (uq, un) = (&self.quad[si(side)], &self.node[si(side)]);
            for (i, &r) in m.rho.iter().enumerate() {
                if r > 0.0 {
                    let j = i / n;
                    best = best.max(uq[i]).max(un[j]).max(un[j + 1]);
                }
            }
            for (j, &a) in m.atoms.iter().enumerate() {
                if a > 0.0 {
                    best = best.max(un[j]);
                }
            }
            if !m.tail.is_empty() {
                best = best.max(un[0]);
            }
        }
        best
    }

    /// `∫ u^s dν`.
    pub fn moment(&self, nu: &DiscreteMeasure, s: f64) -> f64 {
        let w = &self.mesh.rule.rule.weights;
        let n = w.len();
        let pw = |u: f64| if s == 1.0 { u } else { u.max(0.0).powf(s) };
        let mut total = 0.0;
        for side in [Side::Left, Side::Right] {
            let sm = self.mesh.side(side);
            let m = nu.side(side);
            let (uq, un) = (&self.quad[si(side)], &self.node[si(side)]);
            for (i, &r) in m.rho.iter().enumerate() {
                if r > 0.0 {
                    total += w[i % n] * r * sm.quad_jac[i] * pw(uq[i]);
                }
            }
            for (j, &a) in m.atoms.iter().enumerate() {
                if a > 0.0 {
                    total += a * pw(un[j]);
                }
            }
            let d0 = sm.d_min();
            for t in &m.tail {
                let den = 1.0 - t.alpha + s * self.tail_exp[si(side)];
                if den <= 0.0 {
                    return f64::INFINITY;
                }
                total += t.coef * pw(un[0]) * d0.powf(1.0 - t.alpha) / den;
            }
        }
        total
    }

    /// The measure `u^q·ν` on the same mesh.
    pub fn weigh(&self, nu: &DiscreteMeasure, q: f64) -> DiscreteMeasure {
        let pw = |u: f64| if q == 0.0 { 1.0 } else { u.max(0.0).powf(q) };
        let mut tails = [(0.0, 0.0); 2];
        for side in [Side::Left, Side::Right] {
            let e = self.tail_exp[si(side)];
            let d0 = self.mesh.side(side).d_min();
            let amp = pw(self.node[si(side)][0] / d0.powf(e));
            tails[si(side)] = (amp, q * e);
        }
        nu.weighted(|side, i| pw(self.quad[si(side)][i]), |side, j| pw(self.node[si(side)][j]), tails)
    }

    /// `max (other − self)⁺` over all nodes.
    pub fn deficit(&self, other: &NodalFunction) -> f64 {
        let mut worst = 0.0f64;
        for k in 0..2 {
            for (a, b) in self.quad[k].iter().zip(&other.quad[k]).chain(self.node[k].iter().zip(&other.node[k])) {
                worst = worst.max(b - a);
            }
        }
        worst
    }

    /// `max |self − other|` over all nodes.
    pub fn max_abs_diff(&self, other: &NodalFunction) -> f64 {
        self.deficit(other).max(other.deficit(self))
    }
}

/// Output of [`solve_dirichlet`] and [`potential`].
#[derive(Debug, Clone)]
pub struct PotentialResult {
    pub u: GridFunction,
    pub flux_constant: f64,
    pub boundary_residual: f64,
    /// Highest truncation level solved (0 for a direct solve).
    pub truncation_levels_used: u32,
    pub diverged: bool,
    pub converged: bool,
    /// Solution at the last level solved.
    pub solution: Solution,
    /// `sup u` at each level.
    pub history: Vec<f64>,
}

impl PotentialResult {
    fn from_solution(sol: Solution, levels: u32, diverged: bool, converged: bool, history: Vec<f64>) -> Self {
        PotentialResult {
            u: sol.u(),
            flux_constant: sol.flux_constant(),
            boundary_residual: sol.boundary_residual(),
            truncation_levels_used: levels,
            diverged,
            converged,
            solution: sol,
            history,
        }
    }

    /// `u(x)` from the grid interpolant, `+∞` when divergent.
    pub fn value_at(&self, x: f64) -> f64 {
        if self.diverged {
            f64::INFINITY
        } else {
            self.solution.eval(Point::new(x))
        }
    }
}

fn check_finite_measure(mu: &RadonMeasure, op: &'static str) -> Result<()> {
    if !mu.is_finite() {
        return Err(Error::invalid(MODULE, op, "measure has infinite total mass"));
    }
    Ok(())
}

/// `W⁰_{p,w}μ` for a finite measure on the default mesh.
pub fn solve_dirichlet(p: f64, w: &Weight, mu: &RadonMeasure) -> Result<PotentialResult> {
    solve_dirichlet_with(p, w, mu, &MeshConfig::default())
}

pub fn solve_dirichlet_with(p: f64, w: &Weight, mu: &RadonMeasure, mesh: &MeshConfig) -> Result<PotentialResult> {
    check_finite_measure(mu, "solve_dirichlet")?;
    let solver = Solver::for_measures(p, w, mesh, &[mu])?;
    let dm = solver.discretize(mu)?;
    let sol = solver.solve(&dm, None)?;
    let sup = sol.sup();
    Ok(PotentialResult::from_solution(sol, 0, false, true, vec![sup]))
}

/// `W_{p,w}μ` as the limit of the truncated potentials.
pub fn potential(p: f64, w: &Weight, mu: &RadonMeasure, cfg: &SolverConfig) -> Result<PotentialResult> {
    cfg.validate()?;
    let solver = Solver::for_measures(p, w, &cfg.mesh, &[mu])?;
    solver.potential(mu, cfg)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    /// `max (u_μ − u_ν)⁺` over the grid.
    pub max_violation: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// `max u_μ / max u_ν`.
    pub sup_ratio: f64,
}

/// Checks `W μ ≤ W ν` on a common grid for `μ ≤ ν`.
pub fn check_comparison(p: f64, w: &Weight, mu: &RadonMeasure, nu: &RadonMeasure, cfg: &SolverConfig) -> Result<ComparisonReport> {
    cfg.validate()?;
    let solver = Solver::for_measures(p, w, &cfg.mesh, &[mu, nu])?;
    let a = solver.potential(mu, cfg)?;
    let b = solver.potential(nu, cfg)?;
    let tolerance = 1e-9 * b.u.sup().max(1e-300);
    let (max_violation, sup_ratio) = if b.diverged {
        (0.0, 0.0)
    } else if a.diverged {
        (f64::INFINITY, f64::INFINITY)
    } else {
        let v = a
            .u
            .values()
            .iter()
            .zip(b.u.values())
            .map(|(x, y)| (x - y).max(0.0))
            .fold(0.0, f64::max);
        (v, a.u.sup() / b.u.sup())
    };
    Ok(ComparisonReport {
        max_violation,
        tolerance,
        passed: max_violation <= tolerance,
        sup_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::DensityPart;
    use proptest::prelude::*;

    fn max_err(r: &PotentialResult, f: impl Fn(Point) -> f64) -> f64 {
        r.u.points()
            .iter()
            .zip(r.u.values())
            .map(|(pt, v)| (v - f(*pt)).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn dirac_green_function() {
        for p in [1.5, 2.0, 3.0, 4.5] {
            let r = solve_dirichlet(p, &Weight::constant(), &RadonMeasure::dirac(0.0, 1.0).unwrap()).unwrap();
            let k = 0.5f64.powf(1.0 / (p - 1.0));
            assert!(max_err(&r, |pt| k * pt.dist()) < 1e-13, "p = {p}");
            assert!((r.flux_constant - 0.5).abs() < 1e-14);
            assert!(r.boundary_residual < 1e-14);
        }
    }

    #[test]
    fn off_center_dirac_matches_green_function() {
        // G(x, y) = (1 + min)(1 − max)/2 for p = 2
        let y = 0.4;
        let r = solve_dirichlet(2.0, &Weight::constant(), &RadonMeasure::dirac(y, 1.0).unwrap()).unwrap();
        let err = max_err(&r, |pt| {
            let x = pt.x();
            (1.0 + x.min(y)) * (1.0 - x.max(y)) / 2.0
        });
        assert!(err < 1e-13, "{err}");
        assert!((r.flux_constant - 0.3).abs() < 1e-13);
    }

    #[test]
    fn lebesgue_gives_parabola() {
        let r = solve_dirichlet(2.0, &Weight::constant(), &RadonMeasure::lebesgue()).unwrap();
        assert!(max_err(&r, |pt| (1.0 - pt.x() * pt.x()) / 2.0) < 1e-13);
        assert!((r.flux_constant - 1.0).abs() < 1e-13);
        // u′ = −x
        let d = r.solution.derivative();
        for (pt, v) in d.points().iter().zip(d.values()) {
            assert!((v + pt.x()).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_family_is_reproduced() {
        let cfg = SolverConfig::default();
        for (p, beta, a) in [(2.0, 0.0, 0.5), (3.0, 0.5, 0.4), (1.5, -0.5, 0.9), (2.0, 0.5, 0.2)] {
            let w = Weight::power(beta).unwrap();
            let mu = RadonMeasure::exact_family(p, beta, a).unwrap();
            let r = potential(p, &w, &mu, &cfg).unwrap();
            assert!(r.converged && !r.diverged);
            let err = max_err(&r, |pt| pt.dist().powf(a));
            assert!(err < 1e-8, "p={p} beta={beta} A={a}: {err}");
        }
    }

    #[test]
    fn singular_density_potential() {
        let mu = RadonMeasure::power(1.5, 1.0).unwrap();
        let r = potential(2.0, &Weight::constant(), &mu, &SolverConfig::default()).unwrap();
        assert!(r.converged);
        assert!((r.value_at(0.0) - 2.0).abs() < 1e-8, "{}", r.value_at(0.0));
    }

    #[test]
    fn non_integrable_density_diverges() {
        let mu = RadonMeasure::power(2.0, 1.0).unwrap();
        let r = potential(2.0, &Weight::constant(), &mu, &SolverConfig::default()).unwrap();
        assert!(r.diverged && !r.converged);
        assert!(r.value_at(0.0).is_infinite());
    }

    #[test]
    fn finite_measure_potential_equals_direct_solve() {
        let mu = RadonMeasure::power(0.5, 1.0).unwrap().add(&RadonMeasure::dirac(-0.3, 0.2).unwrap());
        let a = potential(2.5, &Weight::constant(), &mu, &SolverConfig::default()).unwrap();
        let b = solve_dirichlet(2.5, &Weight::constant(), &mu).unwrap();
        assert_eq!(a.u.values(), b.u.values());
        assert!(a.converged);
    }

    #[test]
    fn comparison_examples() {
        let cfg = SolverConfig::default();
        let w = Weight::constant();
        let d = RadonMeasure::dirac(0.0, 1.0).unwrap();
        for p in [1.5, 2.0, 3.0] {
            let r = check_comparison(p, &w, &d, &d.scale(2.0), &cfg).unwrap();
            assert!(r.passed);
            assert!((1.0 / r.sup_ratio - 2f64.powf(1.0 / (p - 1.0))).abs() < 1e-12);
        }
        let nu = RadonMeasure::lebesgue();
        let mu = nu.restrict(Point::new(-0.5), Point::new(0.5));
        assert!(check_comparison(2.0, &w, &mu, &nu, &cfg).unwrap().passed);
        let nu = RadonMeasure::power(1.2, 1.0).unwrap();
        for k in [1, 3, 8] {
            assert!(check_comparison(3.0, &w, &nu.truncate(k), &nu, &cfg).unwrap().passed);
        }
    }

    #[test]
    fn weighted_problem_matches_closed_form() {
        // w = (1−|x|)^β, μ = δ_0: u′ = (1/2)^{1/(p−1)} d^{−β/(p−1)}
        let (p, beta) = (3.0, 0.8);
        let r = solve_dirichlet(p, &Weight::power(beta).unwrap(), &RadonMeasure::dirac(0.0, 1.0).unwrap()).unwrap();
        let e = 1.0 - beta / (p - 1.0);
        let err = max_err(&r, |pt| 0.5f64.sqrt() * pt.dist().powf(e) / e);
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn asymmetric_data_crossing_inside_a_panel() {
        // p = 2 Green representation u(x) = ∫G(x, y) dμ(y) for μ = 1_{[0.2, 0.9]} dx
        let mu = RadonMeasure::constant(1.0).unwrap().restrict(Point::new(0.2), Point::new(0.9));
        let r = solve_dirichlet(2.0, &Weight::constant(), &mu).unwrap();
        let g = |x: f64, y: f64| (1.0 + x.min(y)) * (1.0 - x.max(y)) / 2.0;
        let exact = |x: f64| crate::quad::adaptive(|y| g(x, y), 0.2, x.clamp(0.2, 0.9), 1e-16, 1e-14, 100).value
            + crate::quad::adaptive(|y| g(x, y), x.clamp(0.2, 0.9), 0.9, 1e-16, 1e-14, 100).value;
        let err = max_err(&r, |pt| exact(pt.x()));
        assert!(err < 1e-12, "{err}");
        assert!(r.boundary_residual < 1e-13);
        let d = r.solution.derivative();
        assert!(d.values().windows(2).all(|w| w[1] <= w[0] + 1e-13));
    }

    #[test]
    fn p_not_two_agrees_with_direct_quadrature() {
        // independent flux-root oracle with adaptive quadrature
        let p = 3.0;
        let mu = RadonMeasure::constant(1.0).unwrap().restrict(Point::new(-0.1), Point::new(0.7));
        let r = solve_dirichlet(p, &Weight::constant(), &mu).unwrap();
        let m = |x: f64| x.clamp(-0.1, 0.7) + 0.1;
        let du = |c: f64, x: f64| {
            let f: f64 = c - m(x);
            f.signum() * f.abs().powf(1.0 / (p - 1.0))
        };
        let integ = |c: f64, b: f64| {
            // split at the kinks of M and at the sign change of c − M
            let mut pieces = [-1.0f64, -0.1, 0.7, 1.0, (c - 0.1).clamp(-0.1, 0.7)];
            pieces.sort_by(f64::total_cmp);
            let mut s = 0.0;
            for w in pieces.windows(2) {
                let (lo, hi) = (w[0], w[1].min(b));
                if hi > lo {
                    s += crate::quad::adaptive(|x| du(c, x), lo, hi, 1e-16, 1e-14, 400).value;
                }
            }
            s
        };
        let root = brent(|c| integ(c, 1.0), 0.0, 0.8, None, None, 1e-15, 200).unwrap();
        assert!((r.flux_constant - root.x).abs() < 1e-12, "{} {}", r.flux_constant, root.x);
        for x in [-0.6, -0.1, 0.3, 0.5, 0.9] {
            assert!((r.value_at(x) - integ(root.x, x)).abs() < 1e-12, "x = {x}");
        }
    }

    #[test]
    fn infinite_measure_direct_solve_is_rejected() {
        let mu = RadonMeasure::power(1.5, 1.0).unwrap();
        assert!(solve_dirichlet(2.0, &Weight::constant(), &mu).unwrap_err().is_validation());
        let bad = Weight::power(1.5).unwrap();
        assert!(solve_dirichlet(2.0, &bad, &RadonMeasure::lebesgue()).is_err());
    }

    #[test]
    fn zero_measure_has_zero_potential() {
        let r = solve_dirichlet(2.0, &Weight::constant(), &RadonMeasure::zero()).unwrap();
        assert_eq!(r.u.sup(), 0.0);
    }

    #[test]
    fn energies_of_dirac_potential() {
        // p = 2, δ_0: ∫u dμ = 1/2 = ∫|u′|²
        let r = solve_dirichlet(2.0, &Weight::constant(), &RadonMeasure::dirac(0.0, 1.0).unwrap()).unwrap();
        let s = &r.solution;
        assert!((s.moment(1.0) - 0.5).abs() < 1e-14);
        assert!((s.gradient_moment(0.0) - 0.5).abs() < 1e-13);
        assert!((s.sup_on_support() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn density_part_with_breakpoint() {
        let part = DensityPart::new(|pt: Point| if pt.x() < 0.3 { 1.0 } else { 3.0 }, 0.0, 0.0)
            .with_breakpoints(vec![Point::new(0.3)]);
        let mu = RadonMeasure::new(Vec::new(), vec![part]).unwrap();
        let r = solve_dirichlet(2.0, &Weight::constant(), &mu).unwrap();
        assert!(r.boundary_residual < 1e-13);
        assert!((r.solution.measure().total_mass() - (1.3 + 3.0 * 0.7)).abs() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn homogeneity(p in 1.3f64..4.0, a in 0.05f64..20.0, x in -0.9f64..0.9, m in 0.1f64..3.0) {
            let mu = RadonMeasure::dirac(x, m).unwrap().add(&RadonMeasure::power(0.7, 0.5).unwrap());
            let w = Weight::power(0.2).unwrap();
            let cfg = SolverConfig::default();
            let solver = Solver::for_measures(p, &w, &cfg.mesh, &[&mu]).unwrap();
            let u1 = solver.potential(&mu, &cfg).unwrap();
            let u2 = solver.potential(&mu.scale(a), &cfg).unwrap();
            let k = a.powf(1.0 / (p - 1.0));
            for (v1, v2) in u1.u.values().iter().zip(u2.u.values()) {
                prop_assert!((v2 - k * v1).abs() <= 1e-9 * (k * v1).abs() + 1e-300);
            }
        }

        #[test]
        fn truncations_increase(p in 1.5f64..3.5, alpha in 0.5f64..1.4, k in 1u32..12) {
            let mu = RadonMeasure::power(alpha, 1.0).unwrap();
            let cfg = SolverConfig::default();
            let r = check_comparison(p, &Weight::constant(), &mu.truncate(k), &mu.truncate(k + 1), &cfg).unwrap();
            prop_assert!(r.passed);
        }
    }
}
