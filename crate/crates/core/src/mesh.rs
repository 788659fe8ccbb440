//! Graded panel meshes of `(−1, 1)` and measures discretized on them.
//!
//! Each half of the interval is meshed in the distance `d = 1 − |x|` to the
//! nearer endpoint. Panels `[d_j, d_{j+1}]` carry a Gauss–Legendre rule in
//! `ln d`; reference coordinate `t = −1` is the end nearer the midpoint.
//! The segment `(0, d_0)` next to the endpoint is left to closed forms.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{Point, Side};
use crate::measures::RadonMeasure;
use crate::quad::SpectralRule;

const MODULE: &str = "mesh";

#[derive(Debug, Clone, PartialEq)]
pub struct MeshConfig {
    /// Graded nodes over both halves (`nodes/2` per half).
    pub nodes: usize,
    /// Geometric grading ratio toward `±1`.
    pub ratio: f64,
    /// Dyadic nodes `2^{−k}`, `k = 1..=dyadic_levels`, on each half.
    pub dyadic_levels: u32,
    /// Gauss–Legendre points per panel.
    pub order: usize,
    /// Upper bound on `d_{j+1}/d_j` within a panel.
    pub max_panel_ratio: f64,
}

impl Default for MeshConfig {
    fn default() -> Self {
        MeshConfig {
            nodes: 512,
            ratio: 0.85,
            dyadic_levels: 200,
            order: 12,
            max_panel_ratio: 2.0,
        }
    }
}

impl MeshConfig {
    pub fn validate(&self) -> Result<()> {
        if self.nodes < 4 {
            return Err(Error::invalid(MODULE, "validate", "need at least 4 grid nodes"));
        }
        if !(self.ratio > 0.0 && self.ratio < 1.0) {
            return Err(Error::invalid(MODULE, "validate", format!("grading ratio must lie in (0, 1), got {}", self.ratio)));
        }
        if self.dyadic_levels > 1000 {
            return Err(Error::invalid(MODULE, "validate", "dyadic_levels must be <= 1000"));
        }
        if !(2..=64).contains(&self.order) {
            return Err(Error::invalid(MODULE, "validate", "panel order must lie in 2..=64"));
        }
        if !(self.max_panel_ratio > 1.0) {
            return Err(Error::invalid(MODULE, "validate", "max_panel_ratio must be > 1"));
        }
        Ok(())
    }
}

/// One half of the mesh.
#[derive(Debug, Clone)]
pub struct SideMesh {
    pub side: Side,
    /// Ascending distances; the last entry is `1` (the midpoint).
    pub nodes: Vec<f64>,
    /// Quadrature distances, `order` per panel, panel-major, ascending `t`.
    pub quad_d: Vec<f64>,
    /// `|dd/dt|` at the quadrature nodes.
    pub quad_jac: Vec<f64>,
}

impl SideMesh {
    pub fn panels(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn d_min(&self) -> f64 {
        self.nodes[0]
    }

    pub fn node_point(&self, j: usize) -> Point {
        Point::from_boundary(self.side, self.nodes[j])
    }

    pub fn quad_point(&self, i: usize) -> Point {
        Point::from_boundary(self.side, self.quad_d[i])
    }

    /// Index of the node at exactly distance `d`.
    pub fn find_node(&self, d: f64) -> Option<usize> {
        self.nodes.binary_search_by(|x| x.total_cmp(&d)).ok()
    }
}

#[derive(Debug)]
pub struct Mesh {
    pub config: MeshConfig,
    pub rule: Arc<SpectralRule>,
    sides: [SideMesh; 2],
}

fn side_index(side: Side) -> usize {
    match side {
        Side::Left => 0,
        Side::Right => 1,
    }
}

impl Mesh {
    /// Builds a mesh containing every dyadic level and every feature point.
    pub fn build(config: &MeshConfig, features: &[Point]) -> Result<Arc<Mesh>> {
        config.validate()?;
        let rule = if config.order == 16 {
            SpectralRule::standard()
        } else {
            Arc::new(SpectralRule::new(config.order))
        };
        let left = build_side(config, &rule, Side::Left, features);
        let right = build_side(config, &rule, Side::Right, features);
        Ok(Arc::new(Mesh {
            config: config.clone(),
            rule,
            sides: [left, right],
        }))
    }

    pub fn side(&self, side: Side) -> &SideMesh {
        &self.sides[side_index(side)]
    }

    pub fn order(&self) -> usize {
        self.rule.len()
    }

    /// Grid abscissae from `−1` to `1`: both endpoints and every mesh node,
    /// the midpoint once.
    pub fn grid_points(&self) -> Vec<Point> {
        let l = self.side(Side::Left);
        let r = self.side(Side::Right);
        let mut pts = Vec::with_capacity(l.nodes.len() + r.nodes.len() + 1);
        pts.push(Point::LEFT_END);
        pts.extend(l.nodes.iter().map(|&d| Point::from_boundary(Side::Left, d)));
        pts.extend(r.nodes[..r.nodes.len() - 1].iter().rev().map(|&d| Point::from_boundary(Side::Right, d)));
        pts.push(Point::RIGHT_END);
        pts
    }

    /// Position in [`Mesh::grid_points`] of node `j` on `side`.
    pub fn grid_index(&self, side: Side, j: usize) -> usize {
        match side {
            Side::Left => 1 + j,
            Side::Right => {
                let nl = self.side(Side::Left).nodes.len();
                let nr = self.side(Side::Right).nodes.len();
                assert!(j + 1 < nr, "the midpoint belongs to the left half");
                nl + (nr - 2 - j) + 1
            }
        }
    }
}

fn build_side(config: &MeshConfig, rule: &SpectralRule, side: Side, features: &[Point]) -> SideMesh {
    let mut mandatory: Vec<f64> = vec![1.0];
    for k in 1..=config.dyadic_levels {
        mandatory.push(0.5f64.powi(k as i32));
    }
    for f in features {
        if f.side() == side && f.dist() > 0.0 && f.dist() < 1.0 {
            mandatory.push(f.dist());
        }
    }
    mandatory.sort_by(f64::total_cmp);
    mandatory.dedup();

    let per_side = (config.nodes / 2).max(2);
    let keep_out = 0.3 * config.ratio.ln().abs();
    let mut all = mandatory.clone();
    let mut g = 1.0;
    for _ in 1..per_side {
        g *= config.ratio;
        let i = mandatory.partition_point(|&m| m < g);
        let near = |m: f64| (g / m).ln().abs() < keep_out;
        let clash = (i < mandatory.len() && near(mandatory[i])) || (i > 0 && near(mandatory[i - 1]));
        if !clash {
            all.push(g);
        }
    }
    all.sort_by(f64::total_cmp);
    all.dedup();

    let max_log = config.max_panel_ratio.ln();
    let mut nodes = Vec::with_capacity(all.len() * 2);
    nodes.push(all[0]);
    for w in all.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let span = (hi / lo).ln();
        let pieces = (span / max_log).ceil().max(1.0) as usize;
        for s in 1..pieces {
            nodes.push(lo * (span * s as f64 / pieces as f64).exp());
        }
        nodes.push(hi);
    }

    let n = rule.len();
    let panels = nodes.len() - 1;
    let mut quad_d = Vec::with_capacity(panels * n);
    let mut quad_jac = Vec::with_capacity(panels * n);
    for j in 0..panels {
        let (lo, hi) = (nodes[j], nodes[j + 1]);
        let l = (hi / lo).ln();
        for &t in &rule.rule.nodes {
            let d = hi * (-(t + 1.0) * 0.5 * l).exp();
            quad_d.push(d);
            quad_jac.push(d * 0.5 * l);
        }
    }
    SideMesh {
        side,
        nodes,
        quad_d,
        quad_jac,
    }
}

/// Power-law model `coef·d^{−alpha}` of a density on `(0, d_min)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailPart {
    pub coef: f64,
    pub alpha: f64,
}

impl TailPart {
    /// Mass on `(0, d)`.
    pub fn mass(&self, d: f64) -> f64 {
        if self.coef == 0.0 {
            0.0
        } else if self.alpha >= 1.0 {
            f64::INFINITY
        } else {
            self.coef * d.powf(1.0 - self.alpha) / (1.0 - self.alpha)
        }
    }
}

/// Data of a measure on one half of a mesh.
#[derive(Debug, Clone)]
pub struct SideMeasure {
    /// Density at the quadrature nodes.
    pub rho: Vec<f64>,
    /// Atom mass at each mesh node.
    pub atoms: Vec<f64>,
    pub tail: Vec<TailPart>,
}

/// A measure sampled on a fixed mesh: nodal densities, atoms at mesh nodes,
/// and a power-law model next to the endpoints.
#[derive(Debug, Clone)]
pub struct DiscreteMeasure {
    mesh: Arc<Mesh>,
    sides: [SideMeasure; 2],
    level: Option<u32>,
}

impl DiscreteMeasure {
    pub fn new(mesh: Arc<Mesh>, mu: &RadonMeasure) -> Result<Self> {
        let mut sides = Vec::with_capacity(2);
        for side in [Side::Left, Side::Right] {
            let sm = mesh.side(side);
            let rho: Vec<f64> = (0..sm.quad_d.len()).map(|i| mu.density(sm.quad_point(i))).collect();
            if let Some(bad) = rho.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
                return Err(Error::invalid(MODULE, "discretize", format!("density must be finite and >= 0 at quadrature nodes, got {bad}")));
            }
            let mut atoms = vec![0.0; sm.nodes.len()];
            for a in mu.atoms() {
                if a.point.side() != side {
                    continue;
                }
                let j = sm.find_node(a.point.dist()).ok_or_else(|| {
                    Error::invalid(MODULE, "discretize", format!("atom at x = {} is not a mesh node", a.point.x()))
                })?;
                atoms[j] += a.mass;
            }
            let d0 = sm.d_min();
            let mut tail = Vec::new();
            for part in mu.parts() {
                if !part.touches(side) {
                    continue;
                }
                let v = part.eval(Point::from_boundary(side, d0));
                if v > 0.0 {
                    let alpha = part.sing(side);
                    tail.push(TailPart {
                        coef: v * d0.powf(alpha),
                        alpha,
                    });
                }
            }
            sides.push(SideMeasure { rho, atoms, tail });
        }
        let right = sides.pop().expect("two sides");
        let left = sides.pop().expect("two sides");
        Ok(DiscreteMeasure {
            mesh,
            sides: [left, right],
            level: None,
        })
    }

    pub fn zero(mesh: Arc<Mesh>) -> Self {
        let mk = |s: &SideMesh| SideMeasure {
            rho: vec![0.0; s.quad_d.len()],
            atoms: vec![0.0; s.nodes.len()],
            tail: Vec::new(),
        };
        let sides = [mk(mesh.side(Side::Left)), mk(mesh.side(Side::Right))];
        DiscreteMeasure { mesh, sides, level: None }
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn side(&self, side: Side) -> &SideMeasure {
        &self.sides[side_index(side)]
    }

    /// Truncation level this measure was restricted to, if any.
    pub fn level(&self) -> Option<u32> {
        self.level
    }

    /// Mass of one half (midpoint atom counted on the left).
    pub fn side_mass(&self, side: Side) -> f64 {
        let sm = self.mesh.side(side);
        let m = self.side(side);
        let w = &self.mesh.rule.rule.weights;
        let n = w.len();
        let dens: f64 = m
            .rho
            .iter()
            .zip(&sm.quad_jac)
            .enumerate()
            .map(|(i, (r, j))| r * j * w[i % n])
            .sum();
        let tail: f64 = m.tail.iter().map(|t| t.mass(sm.d_min())).sum();
        dens + m.atoms.iter().sum::<f64>() + tail
    }

    pub fn total_mass(&self) -> f64 {
        self.side_mass(Side::Left) + self.side_mass(Side::Right)
    }

    pub fn is_finite(&self) -> bool {
        self.sides
            .iter()
            .all(|s| s.tail.iter().all(|t| t.coef == 0.0 || t.alpha < 1.0))
    }

    pub fn is_zero(&self) -> bool {
        self.sides.iter().all(|s| {
            s.rho.iter().all(|&v| v == 0.0) && s.atoms.iter().all(|&v| v == 0.0) && s.tail.is_empty()
        })
    }

    /// Restriction to `[−1 + 2^{−k}, 1 − 2^{−k}]`.
    pub fn truncated(&self, k: u32) -> Result<Self> {
        let delta = 0.5f64.powi(k as i32);
        let mut out = self.clone();
        for side in [Side::Left, Side::Right] {
            let sm = self.mesh.side(side);
            if sm.find_node(delta).is_none() {
                return Err(Error::invalid(
                    MODULE,
                    "truncated",
                    format!("truncation level {k} is not resolved by the mesh (dyadic_levels = {})", self.mesh.config.dyadic_levels),
                ));
            }
            let m = &mut out.sides[side_index(side)];
            for (r, &d) in m.rho.iter_mut().zip(&sm.quad_d) {
                if d < delta {
                    *r = 0.0;
                }
            }
            for (a, &d) in m.atoms.iter_mut().zip(&sm.nodes) {
                if d < delta {
                    *a = 0.0;
                }
            }
            m.tail.clear();
        }
        out.level = Some(self.level.map_or(k, |l| l.min(k)));
        Ok(out)
    }

    /// Multiplies the measure by a nonnegative function given through its
    /// values at quadrature nodes and mesh nodes, and by `amp·d^{expo}` on
    /// the endpoint segments.
    pub fn weighted(
        &self,
        mut quad: impl FnMut(Side, usize) -> f64,
        mut node: impl FnMut(Side, usize) -> f64,
        tail: [(f64, f64); 2],
    ) -> Self {
        let mut out = self.clone();
        for side in [Side::Left, Side::Right] {
            let si = side_index(side);
            let m = &mut out.sides[si];
            for (i, r) in m.rho.iter_mut().enumerate() {
                if *r != 0.0 {
                    *r *= quad(side, i);
                }
            }
            for (j, a) in m.atoms.iter_mut().enumerate() {
                if *a != 0.0 {
                    *a *= node(side, j);
                }
            }
            let (amp, expo) = tail[si];
            for t in &mut m.tail {
                t.coef *= amp;
                t.alpha -= expo;
            }
            m.tail.retain(|t| t.coef != 0.0);
        }
        out
    }

    pub fn scaled(&self, a: f64) -> Self {
        self.weighted(|_, _| a, |_, _| a, [(a, 0.0), (a, 0.0)])
    }

    /// Smallest level `k` for which `[−1 + 2^{−k}, 1 − 2^{−k}]` contains every
    /// atom and every node where the density changes from zero to nonzero.
    pub fn features_level(&self, features: &[Point]) -> u32 {
        let dmin = features
            .iter()
            .filter(|p| !p.is_boundary())
            .map(|p| p.dist())
            .fold(1.0, f64::min);
        if dmin >= 0.5 {
            1
        } else {
            (-dmin.log2()).ceil().max(1.0) as u32
        }
    }
}
