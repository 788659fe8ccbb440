//! Nonnegative Radon measures on `(−1, 1)`: finitely many atoms plus a sum
//! of density parts, each with declared endpoint singularity exponents.
//! Total mass may be infinite.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{side_pieces, Point, Side};
use crate::quad::integrate_distance;

const MODULE: &str = "measures";
const QUAD_REL: f64 = 1e-12;

pub type PointFn = Arc<dyn Fn(Point) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub point: Point,
    pub mass: f64,
}

/// One density term `scale·f(x)` supported on the closed segment `[lo, hi]`.
///
/// `sing_left`/`sing_right` are exponents `a` with `f ~ (1 ∓ x)^{−a}` near
/// `∓1`; `primitive`, when present, is `∫_0^x f` (signed, unscaled).
#[derive(Clone)]
pub struct DensityPart {
    f: PointFn,
    scale: f64,
    sing_left: f64,
    sing_right: f64,
    lo: Point,
    hi: Point,
    breakpoints: Vec<Point>,
    primitive: Option<PointFn>,
}

impl DensityPart {
    pub fn new(f: impl Fn(Point) -> f64 + Send + Sync + 'static, sing_left: f64, sing_right: f64) -> Self {
        DensityPart {
            f: Arc::new(f),
            scale: 1.0,
            sing_left,
            sing_right,
            lo: Point::LEFT_END,
            hi: Point::RIGHT_END,
            breakpoints: Vec::new(),
            primitive: None,
        }
    }

    /// Restricts the support to `[lo, hi]`.
    pub fn with_support(mut self, lo: Point, hi: Point) -> Self {
        self.lo = Point::max_pos(self.lo, lo);
        self.hi = Point::min_pos(self.hi, hi);
        self
    }

    /// Points where the density is not smooth.
    pub fn with_breakpoints(mut self, pts: Vec<Point>) -> Self {
        self.breakpoints = pts;
        self
    }

    /// Closed form of `x ↦ ∫_0^x f`.
    pub fn with_primitive(mut self, prim: impl Fn(Point) -> f64 + Send + Sync + 'static) -> Self {
        self.primitive = Some(Arc::new(prim));
        self
    }

    pub fn support(&self) -> (Point, Point) {
        (self.lo, self.hi)
    }

    pub fn breakpoints(&self) -> &[Point] {
        &self.breakpoints
    }

    pub fn sing(&self, side: Side) -> f64 {
        match side {
            Side::Left => self.sing_left,
            Side::Right => self.sing_right,
        }
    }

    /// Whether the support reaches the endpoint on `side`.
    pub fn touches(&self, side: Side) -> bool {
        match side {
            Side::Left => self.lo.is_boundary() && self.lo.side() == Side::Left,
            Side::Right => self.hi.is_boundary() && self.hi.side() == Side::Right,
        }
    }

    fn contains(&self, pt: Point) -> bool {
        self.lo.cmp_pos(&pt) != Ordering::Greater && pt.cmp_pos(&self.hi) != Ordering::Greater
    }

    pub fn eval(&self, pt: Point) -> f64 {
        if self.contains(pt) {
            self.scale * (self.f)(pt)
        } else {
            0.0
        }
    }

    fn is_empty(&self) -> bool {
        self.scale == 0.0 || self.lo.cmp_pos(&self.hi) != Ordering::Less
    }

    /// `∫_a^b` of this part, `a ≤ b`.
    fn mass_between(&self, a: Point, b: Point) -> Result<f64> {
        let a = Point::max_pos(a, self.lo);
        let b = Point::min_pos(b, self.hi);
        if a.cmp_pos(&b) != Ordering::Less {
            return Ok(0.0);
        }
        for side in [Side::Left, Side::Right] {
            let end = if side == Side::Left { a } else { b };
            if end.is_boundary() && end.side() == side && self.sing(side) >= 1.0 {
                return Ok(f64::INFINITY);
            }
        }
        if let Some(prim) = &self.primitive {
            return Ok(self.scale * (prim(b) - prim(a)));
        }
        let mut cuts: Vec<Point> = self
            .breakpoints
            .iter()
            .copied()
            .filter(|c| a.cmp_pos(c) == Ordering::Less && c.cmp_pos(&b) == Ordering::Less)
            .collect();
        cuts.sort_by(|x, y| x.cmp_pos(y));
        let mut total = 0.0;
        let mut prev = a;
        for next in cuts.into_iter().chain(std::iter::once(b)) {
            for (side, lo, hi) in side_pieces(prev, next) {
                let sing = if lo == 0.0 { self.sing(side).max(0.0) } else { 0.0 };
                let r = integrate_distance(
                    |d| (self.f)(Point::from_boundary(side, d)),
                    lo,
                    hi,
                    sing,
                    0.0,
                    QUAD_REL,
                );
                if !r.converged {
                    return Err(Error::Quadrature {
                        module: MODULE,
                        op: "cdf",
                        estimate: r.error,
                        tolerance: QUAD_REL * r.value.abs(),
                    });
                }
                total += r.value;
            }
            prev = next;
        }
        Ok(self.scale * total)
    }
}

/// A nonnegative Radon measure on `(−1, 1)`.
#[derive(Clone, Default)]
pub struct RadonMeasure {
    atoms: Vec<Atom>,
    parts: Vec<DensityPart>,
}

impl fmt::Debug for RadonMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadonMeasure")
            .field("atoms", &self.atoms)
            .field("density_parts", &self.parts.len())
            .finish()
    }
}

fn power_primitive(alpha: f64) -> impl Fn(Point) -> f64 + Send + Sync {
    // ∫_0^x (1 − |y|)^{−α} dy
    move |pt: Point| {
        let d = pt.dist();
        let v = if (alpha - 1.0).abs() < 1e-14 {
            -d.ln()
        } else {
            (1.0 - d.powf(1.0 - alpha)) / (1.0 - alpha)
        };
        pt.side().sign() * v
    }
}

impl RadonMeasure {
    pub fn zero() -> Self {
        RadonMeasure::default()
    }

    /// Builds a measure from atoms and density parts. Atoms at equal
    /// locations are merged; zero-mass atoms are dropped.
    pub fn new(atoms: Vec<Atom>, parts: Vec<DensityPart>) -> Result<Self> {
        for a in &atoms {
            if !(a.mass.is_finite() && a.mass >= 0.0) {
                return Err(Error::invalid(MODULE, "new", format!("atom mass must be finite and >= 0, got {}", a.mass)));
            }
            if a.point.is_boundary() {
                return Err(Error::invalid(MODULE, "new", "atoms must lie strictly inside (-1, 1)"));
            }
        }
        for p in &parts {
            if !(p.scale.is_finite() && p.scale >= 0.0) {
                return Err(Error::invalid(MODULE, "new", "density scale must be finite and >= 0"));
            }
        }
        let mut m = RadonMeasure { atoms, parts };
        m.normalize();
        Ok(m)
    }

    fn normalize(&mut self) {
        self.atoms.retain(|a| a.mass > 0.0);
        self.atoms.sort_by(|a, b| a.point.cmp_pos(&b.point));
        let mut merged: Vec<Atom> = Vec::with_capacity(self.atoms.len());
        for a in self.atoms.drain(..) {
            match merged.last_mut() {
                Some(last) if last.point == a.point => last.mass += a.mass,
                _ => merged.push(a),
            }
        }
        self.atoms = merged;
        self.parts.retain(|p| !p.is_empty());
    }

    pub fn dirac(x: f64, mass: f64) -> Result<Self> {
        Self::new(vec![Atom { point: Point::new(x), mass }], Vec::new())
    }

    pub fn atoms_at(list: &[(f64, f64)]) -> Result<Self> {
        Self::new(
            list.iter().map(|&(x, m)| Atom { point: Point::new(x), mass: m }).collect(),
            Vec::new(),
        )
    }

    /// `c·dx` on `(−1, 1)`.
    pub fn constant(c: f64) -> Result<Self> {
        let part = DensityPart::new(|_| 1.0, 0.0, 0.0).with_primitive(|pt: Point| pt.x());
        Self::new(Vec::new(), vec![part]).map(|m| m.scale(c))
    }

    pub fn lebesgue() -> Self {
        Self::constant(1.0).expect("unit density")
    }

    /// `c·(1 − |x|)^{−α} dx`.
    pub fn power(alpha: f64, c: f64) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(Error::invalid(MODULE, "power", "alpha must be finite"));
        }
        let part = DensityPart::new(move |pt: Point| pt.dist().powf(-alpha), alpha, alpha)
            .with_breakpoints(vec![Point::CENTER])
            .with_primitive(power_primitive(alpha));
        Self::new(Vec::new(), vec![part]).map(|m| m.scale(c))
    }

    /// Measure whose potential for the weight `(1 − |x|)^β` is exactly
    /// `(1 − |x|)^A`:
    /// `−A^{p−1}e·(1 − |x|)^{e−1} dx + 2A^{p−1} δ_0` with `e = (A − 1)(p − 1) + β`.
    pub fn exact_family(p: f64, beta: f64, a: f64) -> Result<Self> {
        let a_max = 1.0 - beta / (p - 1.0);
        if !(a > 0.0 && a < a_max) {
            return Err(Error::invalid(
                MODULE,
                "exact_family",
                format!("A must lie in (0, 1 - beta/(p-1)) = (0, {a_max}), got {a}"),
            ));
        }
        let e = (a - 1.0) * (p - 1.0) + beta;
        let c = -a.powf(p - 1.0) * e;
        let dens = Self::power(1.0 - e, c)?;
        let atom = Self::dirac(0.0, 2.0 * a.powf(p - 1.0))?;
        Ok(dens.add(&atom))
    }

    /// Coefficient `σ` for which `u = 1 − x²` solves `−Δ_p u = σ u^q`
    /// with `w ≡ 1`: `2^{p−1}(p − 1)|x|^{p−2}(1 − x²)^{−q}`.
    pub fn manufactured(p: f64, q: f64) -> Result<Self> {
        let k = 2f64.powf(p - 1.0) * (p - 1.0);
        let part = DensityPart::new(
            move |pt: Point| {
                let d = pt.dist();
                let ax = 1.0 - d;
                k * ax.powf(p - 2.0) * (d * (2.0 - d)).powf(-q)
            },
            q,
            q,
        )
        .with_breakpoints(vec![Point::CENTER]);
        Self::new(Vec::new(), vec![part])
    }

    /// Piecewise-linear density through `(x_i, v_i)` (sorted by `x`, values
    /// `≥ 0`), zero outside `[x_0, x_last]`.
    pub fn tabulated(table: Vec<(f64, f64)>) -> Result<Self> {
        if table.len() < 2 {
            return Err(Error::invalid(MODULE, "tabulated", "need at least two rows"));
        }
        for w in table.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::invalid(MODULE, "tabulated", "abscissae must be strictly increasing"));
            }
        }
        if table.iter().any(|&(x, v)| !(-1.0..=1.0).contains(&x) || !(v >= 0.0 && v.is_finite())) {
            return Err(Error::invalid(MODULE, "tabulated", "need x in [-1, 1] and finite values >= 0"));
        }
        let xs: Arc<Vec<f64>> = Arc::new(table.iter().map(|r| r.0).collect());
        let vs: Arc<Vec<f64>> = Arc::new(table.iter().map(|r| r.1).collect());
        // cumulative trapezoid integrals from x_0
        let mut cum = vec![0.0; xs.len()];
        for i in 1..xs.len() {
            cum[i] = cum[i - 1] + 0.5 * (vs[i] + vs[i - 1]) * (xs[i] - xs[i - 1]);
        }
        let cum = Arc::new(cum);
        let locate = {
            let xs = xs.clone();
            move |x: f64| -> usize {
                let i = xs.partition_point(|&t| t <= x);
                i.clamp(1, xs.len() - 1) - 1
            }
        };
        let (fx, fv) = (xs.clone(), vs.clone());
        let loc1 = locate.clone();
        let f = move |pt: Point| {
            let x = pt.x();
            let i = loc1(x);
            let t = ((x - fx[i]) / (fx[i + 1] - fx[i])).clamp(0.0, 1.0);
            fv[i] + t * (fv[i + 1] - fv[i])
        };
        let (px, pv, pc) = (xs.clone(), vs.clone(), cum.clone());
        let cum_at = move |x: f64| {
            let x = x.clamp(px[0], px[px.len() - 1]);
            let i = locate(x);
            let h = x - px[i];
            let slope = (pv[i + 1] - pv[i]) / (px[i + 1] - px[i]);
            pc[i] + pv[i] * h + 0.5 * slope * h * h
        };
        let zero = cum_at(0.0);
        let prim = move |pt: Point| cum_at(pt.x()) - zero;
        let lo = Point::new(xs[0]);
        let hi = Point::new(xs[xs.len() - 1]);
        let part = DensityPart::new(f, 0.0, 0.0)
            .with_support(lo, hi)
            .with_breakpoints(xs.iter().map(|&x| Point::new(x)).collect())
            .with_primitive(prim);
        Self::new(Vec::new(), vec![part])
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn parts(&self) -> &[DensityPart] {
        &self.parts
    }

    pub fn is_zero(&self) -> bool {
        self.atoms.is_empty() && self.parts.is_empty()
    }

    /// Density value at `pt` (sum over parts).
    pub fn density(&self, pt: Point) -> f64 {
        self.parts.iter().map(|p| p.eval(pt)).sum()
    }

    /// Largest declared singularity exponent at the endpoint on `side`
    /// among parts whose support reaches it.
    pub fn sing(&self, side: Side) -> f64 {
        self.parts
            .iter()
            .filter(|p| p.touches(side))
            .map(|p| p.sing(side))
            .fold(0.0, f64::max)
    }

    /// Whether the declared exponents imply finite total mass.
    pub fn is_finite(&self) -> bool {
        self.sing(Side::Left) < 1.0 && self.sing(Side::Right) < 1.0
    }

    /// `μ([a, b])`, both ends included.
    pub fn mass_closed(&self, a: Point, b: Point) -> Result<f64> {
        if a.cmp_pos(&b) == Ordering::Greater {
            return Ok(0.0);
        }
        let mut m: f64 = self
            .atoms
            .iter()
            .filter(|at| a.cmp_pos(&at.point) != Ordering::Greater && at.point.cmp_pos(&b) != Ordering::Greater)
            .map(|at| at.mass)
            .sum();
        for p in &self.parts {
            m += p.mass_between(a, b)?;
        }
        Ok(m)
    }

    /// `μ((a, b))`, both ends excluded.
    pub fn mass_open(&self, a: Point, b: Point) -> Result<f64> {
        if a.cmp_pos(&b) != Ordering::Less {
            return Ok(0.0);
        }
        let mut m: f64 = self
            .atoms
            .iter()
            .filter(|at| a.cmp_pos(&at.point) == Ordering::Less && at.point.cmp_pos(&b) == Ordering::Less)
            .map(|at| at.mass)
            .sum();
        for p in &self.parts {
            m += p.mass_between(a, b)?;
        }
        Ok(m)
    }

    pub fn total_mass(&self) -> Result<f64> {
        self.mass_closed(Point::LEFT_END, Point::RIGHT_END)
    }

    /// `M(x) = μ([−1, x])`, right-continuous.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        if !(-1.0..=1.0).contains(&x) {
            return Err(Error::invalid(MODULE, "cdf", format!("x must lie in [-1, 1], got {x}")));
        }
        self.cdf_at(Point::new(x))
    }

    pub fn cdf_at(&self, pt: Point) -> Result<f64> {
        self.mass_closed(Point::LEFT_END, pt)
    }

    /// `μ(B(x, r) ∩ (−1, 1))` for the open ball: atoms at distance exactly
    /// `r` are not counted.
    pub fn ball_mass(&self, x: f64, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::invalid(MODULE, "ball_mass", format!("radius must be > 0, got {r}")));
        }
        let c = Point::new(x);
        self.mass_open(c.shifted(-r), c.shifted(r))
    }

    /// `1_{F_k}·μ` with `F_k = [−1 + 2^{−k}, 1 − 2^{−k}]`.
    pub fn truncate(&self, k: u32) -> RadonMeasure {
        let delta = 0.5f64.powi(k as i32);
        let lo = Point::from_boundary(Side::Left, delta);
        let hi = Point::from_boundary(Side::Right, delta);
        self.restrict(lo, hi)
    }

    /// Restriction to the closed segment `[lo, hi]`.
    pub fn restrict(&self, lo: Point, hi: Point) -> RadonMeasure {
        let atoms = self
            .atoms
            .iter()
            .copied()
            .filter(|a| lo.cmp_pos(&a.point) != Ordering::Greater && a.point.cmp_pos(&hi) != Ordering::Greater)
            .collect();
        let parts = self.parts.iter().cloned().map(|p| p.with_support(lo, hi)).collect();
        let mut m = RadonMeasure { atoms, parts };
        m.normalize();
        m
    }

    pub fn scale(&self, a: f64) -> RadonMeasure {
        assert!(a >= 0.0 && a.is_finite(), "scale factor must be finite and >= 0");
        let mut m = self.clone();
        for at in &mut m.atoms {
            at.mass *= a;
        }
        for p in &mut m.parts {
            p.scale *= a;
        }
        m.normalize();
        m
    }

    pub fn add(&self, other: &RadonMeasure) -> RadonMeasure {
        let mut m = self.clone();
        m.atoms.extend_from_slice(&other.atoms);
        m.parts.extend(other.parts.iter().cloned());
        m.normalize();
        m
    }

    /// `g·μ` for a nonnegative `g` with `g ~ (1 ∓ x)^{e_∓}` near `∓1`.
    pub fn weighted_pushforward(
        &self,
        g: impl Fn(Point) -> f64 + Send + Sync + 'static,
        g_exp_left: f64,
        g_exp_right: f64,
    ) -> Result<RadonMeasure> {
        let g: PointFn = Arc::new(g);
        let mut atoms = Vec::with_capacity(self.atoms.len());
        for a in &self.atoms {
            let v = g(a.point);
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(
                    MODULE,
                    "weighted_pushforward",
                    format!("g must be finite and >= 0 at atom x = {}, got {v}", a.point.x()),
                ));
            }
            atoms.push(Atom { point: a.point, mass: a.mass * v });
        }
        let parts = self
            .parts
            .iter()
            .map(|p| {
                let f = p.f.clone();
                let g = g.clone();
                DensityPart {
                    f: Arc::new(move |pt| f(pt) * g(pt)),
                    scale: p.scale,
                    sing_left: p.sing_left - g_exp_left,
                    sing_right: p.sing_right - g_exp_right,
                    lo: p.lo,
                    hi: p.hi,
                    breakpoints: p.breakpoints.clone(),
                    primitive: None,
                }
            })
            .collect();
        let mut m = RadonMeasure { atoms, parts };
        m.normalize();
        Ok(m)
    }

    /// Points where the measure is not smooth: atoms, support ends and
    /// declared breakpoints, excluding `±1`.
    pub fn features(&self) -> Vec<Point> {
        let mut pts: Vec<Point> = self.atoms.iter().map(|a| a.point).collect();
        for p in &self.parts {
            pts.push(p.lo);
            pts.push(p.hi);
            pts.extend_from_slice(&p.breakpoints);
        }
        pts.retain(|p| !p.is_boundary());
        pts.sort_by(|a, b| a.cmp_pos(b));
        pts.dedup();
        pts
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn dirac_cdf_is_right_continuous() {
        let m = RadonMeasure::dirac(0.0, 1.0).unwrap();
        assert_eq!(m.cdf(-0.5).unwrap(), 0.0);
        assert_eq!(m.cdf(0.0).unwrap(), 1.0);
        assert_eq!(m.cdf(0.5).unwrap(), 1.0);
    }

    #[test]
    fn lebesgue_and_power_cdf() {
        let dx = RadonMeasure::lebesgue();
        assert!(close(dx.cdf(0.0).unwrap(), 1.0, 1e-15));
        let m = RadonMeasure::power(1.5, 1.0).unwrap();
        assert_eq!(m.cdf(-0.5).unwrap(), f64::INFINITY);
        // mass of (0, 0.9]: ∫_{0.1}^{1} d^{-1.5} dd = 2(0.1^{-1/2} − 1)
        let mid = m.mass_closed(Point::CENTER, Point::new(0.9)).unwrap();
        assert!(close(mid, 2.0 * (0.1f64.powf(-0.5) - 1.0), 1e-13));
        let quad = RadonMeasure::new(
            Vec::new(),
            vec![DensityPart::new(|pt: Point| pt.dist().powf(-1.5), 1.5, 1.5)],
        )
        .unwrap();
        let q = quad.mass_closed(Point::CENTER, Point::new(0.9)).unwrap();
        assert!(close(q, mid, 1e-11), "{q} vs {mid}");
    }

    #[test]
    fn truncation_examples() {
        let d0 = RadonMeasure::dirac(0.0, 1.0).unwrap();
        assert_eq!(d0.truncate(3).atoms(), d0.atoms());
        let m = RadonMeasure::power(1.5, 1.0).unwrap();
        for k in [1, 5, 20] {
            assert!(m.truncate(k).total_mass().unwrap().is_finite());
        }
        let dx = RadonMeasure::lebesgue().truncate(1);
        assert!(close(dx.total_mass().unwrap(), 1.0, 1e-15));
        assert_eq!(dx.cdf(-0.75).unwrap(), 0.0);
    }

    #[test]
    fn ball_mass_examples() {
        let d0 = RadonMeasure::dirac(0.0, 1.0).unwrap();
        assert_eq!(d0.ball_mass(0.0, 0.1).unwrap(), 1.0);
        assert_eq!(d0.ball_mass(0.5, 0.1).unwrap(), 0.0);
        assert_eq!(d0.ball_mass(0.5, 0.5).unwrap(), 0.0);
        let dx = RadonMeasure::lebesgue();
        assert!(close(dx.ball_mass(0.0, 0.25).unwrap(), 0.5, 1e-15));
    }

    #[test]
    fn scale_add_pushforward() {
        let d0 = RadonMeasure::dirac(0.0, 1.0).unwrap();
        assert_eq!(d0.scale(2.0).atoms()[0].mass, 2.0);
        assert!(d0.scale(0.0).is_zero());
        let s = d0.add(&RadonMeasure::lebesgue());
        assert_eq!(s.atoms().len(), 1);
        assert_eq!(s.parts().len(), 1);
        assert_eq!(d0.weighted_pushforward(|_| 3.0, 0.0, 0.0).unwrap().atoms()[0].mass, 3.0);
        let u = |pt: Point| {
            let x = pt.x();
            (1.0 - x * x) / 2.0
        };
        let g = RadonMeasure::lebesgue().weighted_pushforward(u, 1.0, 1.0).unwrap();
        assert!(close(g.total_mass().unwrap(), 2.0 / 3.0, 1e-12));
        assert!(RadonMeasure::lebesgue()
            .weighted_pushforward(|_| 0.0, 0.0, 0.0)
            .unwrap()
            .total_mass()
            .unwrap()
            .abs()
            < 1e-300);
        assert!(d0.weighted_pushforward(|_| f64::NAN, 0.0, 0.0).is_err());
    }

    #[test]
    fn exact_family_components() {
        let (p, beta, a) = (2.0, 0.0, 0.3);
        let m = RadonMeasure::exact_family(p, beta, a).unwrap();
        assert!((m.atoms()[0].mass - 0.6).abs() < 1e-15);
        assert!(!m.is_finite());
        assert!(RadonMeasure::exact_family(2.0, 0.5, 0.6).is_err());
    }

    #[test]
    fn tabulated_matches_trapezoid() {
        let m = RadonMeasure::tabulated(vec![(-0.5, 0.0), (0.0, 2.0), (0.5, 0.0)]).unwrap();
        assert!(close(m.total_mass().unwrap(), 1.0, 1e-14));
        assert!(close(m.cdf(0.0).unwrap(), 0.5, 1e-14));
        assert!((m.density(Point::new(0.25)) - 1.0).abs() < 1e-14);
        assert_eq!(m.density(Point::new(0.75)), 0.0);
    }

    proptest! {
        #[test]
        fn cdf_monotone(a in -0.999f64..0.999, b in -0.999f64..0.999, x0 in -0.9f64..0.9) {
            let m = RadonMeasure::power(0.7, 1.0).unwrap().add(&RadonMeasure::dirac(x0, 0.3).unwrap());
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(m.cdf(lo).unwrap() <= m.cdf(hi).unwrap() + 1e-14);
        }

        #[test]
        fn cdf_linear(x in -0.99f64..0.99, a in 0.0f64..3.0, b in 0.0f64..3.0) {
            let mu = RadonMeasure::power(0.5, 1.0).unwrap();
            let nu = RadonMeasure::dirac(0.2, 1.0).unwrap().add(&RadonMeasure::lebesgue());
            let lhs = mu.scale(a).add(&nu.scale(b)).cdf(x).unwrap();
            let rhs = a * mu.cdf(x).unwrap() + b * nu.cdf(x).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()));
        }

        #[test]
        fn truncations_increase(x in -0.99f64..0.99, k in 1u32..30) {
            let m = RadonMeasure::power(1.2, 1.0).unwrap();
            let a = m.truncate(k).cdf(x).unwrap();
            let b = m.truncate(k + 1).cdf(x).unwrap();
            prop_assert!(a <= b + 1e-12 * b.abs());
        }
    }
}
