//! Quadrature and root finding: Gauss–Legendre rules with spectral
//! integration matrices, adaptive Gauss–Kronrod (7/15) with endpoint
//! substitution, and Brent's bracketed root finder.

use std::collections::BinaryHeap;
use std::sync::{Arc, OnceLock};

/// Gauss–Legendre rule on `[−1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut t = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, t);
                dp = d;
                let dt = p / d;
                t -= dt;
                if dt.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, t);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - t * t) * dp * dp);
            // ascending order
            nodes[i] = -t;
            nodes[n - 1 - i] = t;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `∫_a^b f`.
    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let h = 0.5 * (b - a);
        let m = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * f(m + h * t))
            .sum::<f64>()
            * h
    }
}

fn legendre_with_derivative(n: usize, t: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, t);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * t * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (t * p1 - p0) / (t * t - 1.0);
    (p1, d)
}

/// `P_0(t), …, P_n(t)` written into `out` (length `n + 1`).
pub fn legendre_values(t: f64, out: &mut [f64]) {
    let n = out.len();
    if n == 0 {
        return;
    }
    out[0] = 1.0;
    if n > 1 {
        out[1] = t;
    }
    for k in 2..n {
        let kf = k as f64;
        out[k] = ((2.0 * kf - 1.0) * t * out[k - 1] - (kf - 1.0) * out[k - 2]) / kf;
    }
}

/// A Gauss–Legendre rule together with the matrices that map nodal values
/// of a function to its running integrals at the nodes (exact for
/// polynomials of degree `< n`).
#[derive(Debug)]
pub struct SpectralRule {
    pub rule: GaussLegendre,
    /// `from_left[i*n + k] = ∫_{−1}^{t_i} ℓ_k`
    pub from_left: Vec<f64>,
    /// `to_right[i*n + k] = ∫_{t_i}^{1} ℓ_k`
    pub to_right: Vec<f64>,
    /// Discrete Legendre transform: `c_m = Σ_k transform[m*n + k] v_k`.
    pub transform: Vec<f64>,
}

impl SpectralRule {
    pub fn new(n: usize) -> Self {
        let rule = GaussLegendre::new(n);
        let mut transform = vec![0.0; n * n];
        let mut pv = vec![0.0; n + 1];
        for k in 0..n {
            legendre_values(rule.nodes[k], &mut pv);
            for m in 0..n {
                transform[m * n + k] = 0.5 * (2.0 * m as f64 + 1.0) * rule.weights[k] * pv[m];
            }
        }
        let mut from_left = vec![0.0; n * n];
        let mut to_right = vec![0.0; n * n];
        let mut integ = vec![0.0; n];
        for i in 0..n {
            legendre_integrals(rule.nodes[i], &mut pv, &mut integ);
            for k in 0..n {
                let v: f64 = (0..n).map(|m| transform[m * n + k] * integ[m]).sum();
                from_left[i * n + k] = v;
                to_right[i * n + k] = rule.weights[k] - v;
            }
        }
        SpectralRule {
            rule,
            from_left,
            to_right,
            transform,
        }
    }

    /// Shared 16-point rule.
    pub fn standard() -> Arc<SpectralRule> {
        static RULE: OnceLock<Arc<SpectralRule>> = OnceLock::new();
        RULE.get_or_init(|| Arc::new(SpectralRule::new(16))).clone()
    }

    pub fn len(&self) -> usize {
        self.rule.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rule.is_empty()
    }

    /// Legendre coefficients of the interpolant of `values`.
    pub fn coefficients(&self, values: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|m| (0..n).map(|k| self.transform[m * n + k] * values[k]).sum())
            .collect()
    }

    /// `∫_{−1}^{t}` of the interpolant with Legendre coefficients `coeffs`.
    pub fn integral_from_left(&self, coeffs: &[f64], t: f64) -> f64 {
        let n = coeffs.len();
        let mut pv = vec![0.0; n + 1];
        let mut integ = vec![0.0; n];
        legendre_integrals(t, &mut pv, &mut integ);
        coeffs.iter().zip(&integ).map(|(c, i)| c * i).sum()
    }

    /// Value of the interpolant with Legendre coefficients `coeffs` at `t`.
    pub fn interpolate(&self, coeffs: &[f64], t: f64) -> f64 {
        let mut pv = vec![0.0; coeffs.len()];
        legendre_values(t, &mut pv);
        coeffs.iter().zip(&pv).map(|(c, p)| c * p).sum()
    }
}

/// `∫_{−1}^t P_m` for `m < integ.len()`; `pv` needs length `integ.len() + 1`.
fn legendre_integrals(t: f64, pv: &mut [f64], integ: &mut [f64]) {
    legendre_values(t, pv);
    for m in 0..integ.len() {
        integ[m] = if m == 0 {
            t + 1.0
        } else {
            (pv[m + 1] - pv[m - 1]) / (2.0 * m as f64 + 1.0)
        };
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut resk = fc * WGK[7];
    let mut resg = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        resk += WGK[j] * s;
        if j % 2 == 1 {
            resg += WG[j / 2] * s;
        }
    }
    let val = resk * h;
    let err = ((resk - resg) * h).abs();
    (val, err)
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    val: f64,
    err: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
}

/// Adaptive Gauss–Kronrod 7/15 on `[a, b]`, bisecting the segment with the
/// largest error estimate until `err ≤ max(abs_tol, rel_tol·|I|)`.
pub fn adaptive(
    mut f: impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_segments: usize,
) -> Integral {
    if a == b {
        return Integral {
            value: 0.0,
            error: 0.0,
            converged: true,
        };
    }
    let (v, e) = gk15(&mut f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, val: v, err: e });
    let mut total = v;
    let mut total_err = e;
    let mut segments = 1;
    loop {
        let tol = abs_tol.max(rel_tol * total.abs());
        if total_err <= tol || !total.is_finite() {
            break;
        }
        if segments >= max_segments {
            return Integral {
                value: total,
                error: total_err,
                converged: false,
            };
        }
        let Some(seg) = heap.pop() else { break };
        let m = 0.5 * (seg.a + seg.b);
        if m <= seg.a || m >= seg.b {
            // cannot split further
            heap.push(seg);
            return Integral {
                value: total,
                error: total_err,
                converged: total_err <= 10.0 * tol,
            };
        }
        let (v1, e1) = gk15(&mut f, seg.a, m);
        let (v2, e2) = gk15(&mut f, m, seg.b);
        total += v1 + v2 - seg.val;
        total_err += e1 + e2 - seg.err;
        heap.push(Segment { a: seg.a, b: m, val: v1, err: e1 });
        heap.push(Segment { a: m, b: seg.b, val: v2, err: e2 });
        segments += 1;
    }
    // re-sum to remove drift from the running updates
    let value: f64 = heap.iter().map(|s| s.val).sum();
    let error: f64 = heap.iter().map(|s| s.err).sum();
    Integral {
        value,
        error,
        converged: value.is_finite(),
    }
}

/// `∫_0^{len} f(s) ds` for `f(s) ~ s^{−a}` as `s → 0` with `a < 1`, using the
/// substitution `s = len·τ^{1/(1−a)}` which turns the singularity into a
/// bounded integrand.
pub fn adaptive_endpoint(
    mut f: impl FnMut(f64) -> f64,
    len: f64,
    a: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Integral {
    if len <= 0.0 {
        return Integral {
            value: 0.0,
            error: 0.0,
            converged: true,
        };
    }
    let m = if a > 0.0 { 1.0 / (1.0 - a) } else { 1.0 };
    adaptive(
        |tau: f64| {
            if tau <= 0.0 {
                return 0.0;
            }
            let s = len * tau.powf(m);
            let v = f(s);
            if v == 0.0 {
                0.0
            } else {
                v * len * m * tau.powf(m - 1.0)
            }
        },
        0.0,
        1.0,
        abs_tol,
        rel_tol,
        2000,
    )
}

/// `∫_{d_lo}^{d_hi} f(d) dd` on a distance range, where `f ~ d^{−sing}` as
/// `d → 0`. Ranges touching `d = 0` use [`adaptive_endpoint`]; ranges
/// spanning several octaves are integrated in `ln d`.
pub fn integrate_distance(
    mut f: impl FnMut(f64) -> f64,
    d_lo: f64,
    d_hi: f64,
    sing: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Integral {
    if d_hi <= d_lo {
        return Integral {
            value: 0.0,
            error: 0.0,
            converged: true,
        };
    }
    if d_lo <= 0.0 {
        adaptive_endpoint(f, d_hi, sing, abs_tol, rel_tol)
    } else if d_hi / d_lo > 4.0 {
        adaptive(
            |s: f64| {
                let d = s.exp();
                f(d) * d
            },
            d_lo.ln(),
            d_hi.ln(),
            abs_tol,
            rel_tol,
            2000,
        )
    } else {
        adaptive(f, d_lo, d_hi, abs_tol, rel_tol, 2000)
    }
}

/// Result of a bracketed root search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub fx: f64,
    pub iterations: usize,
    /// final bracket width
    pub width: f64,
}

/// Brent's method (bisection safeguarded secant / inverse quadratic steps)
/// on a bracket with `f(a)·f(b) ≤ 0`. Returns `None` when the bracket does
/// not change sign.
pub fn brent(
    mut f: impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    fa: Option<f64>,
    fb: Option<f64>,
    xtol: f64,
    max_iter: usize,
) -> Option<Root> {
    let (mut a, mut b) = (a, b);
    let mut fa = fa.unwrap_or_else(|| f(a));
    let mut fb = fb.unwrap_or_else(|| f(b));
    if fa == 0.0 {
        return Some(Root { x: a, fx: 0.0, iterations: 0, width: 0.0 });
    }
    if fb == 0.0 {
        return Some(Root { x: b, fx: 0.0, iterations: 0, width: 0.0 });
    }
    if fa.signum() == fb.signum() {
        return None;
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for iter in 1..=max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Some(Root { x: b, fx: fb, iterations: iter, width: (c - b).abs() });
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
    }
    Some(Root { x: b, fx: fb, iterations: max_iter, width: (c - b).abs() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let gl = GaussLegendre::new(16);
        let s: f64 = gl.weights.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        // degree 31 monomial, even
        let v = gl.integrate(-1.0, 1.0, |t| t.powi(30));
        assert!((v - 2.0 / 31.0).abs() < 1e-14);
        let v = gl.integrate(0.0, 2.0, |t| t.powi(5));
        assert!((v - 64.0 / 6.0).abs() < 1e-12);
        assert!(gl.nodes.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn spectral_matrices_integrate_polynomials() {
        let sr = SpectralRule::new(16);
        let n = sr.len();
        let vals: Vec<f64> = sr.rule.nodes.iter().map(|&t| 3.0 * t * t - t.powi(7)).collect();
        let prim = |t: f64| t.powi(3) - t.powi(8) / 8.0;
        for i in 0..n {
            let t = sr.rule.nodes[i];
            let l: f64 = (0..n).map(|k| sr.from_left[i * n + k] * vals[k]).sum();
            let r: f64 = (0..n).map(|k| sr.to_right[i * n + k] * vals[k]).sum();
            assert!((l - (prim(t) - prim(-1.0))).abs() < 1e-13);
            assert!((r - (prim(1.0) - prim(t))).abs() < 1e-13);
        }
        let c = sr.coefficients(&vals);
        assert!((sr.integral_from_left(&c, 0.3) - (prim(0.3) - prim(-1.0))).abs() < 1e-13);
        assert!((sr.interpolate(&c, 0.3) - (3.0 * 0.09 - 0.3f64.powi(7))).abs() < 1e-13);
    }

    #[test]
    fn adaptive_handles_smooth_and_singular() {
        let r = adaptive(|x| x.sin(), 0.0, std::f64::consts::PI, 1e-14, 1e-12, 100);
        assert!(r.converged && (r.value - 2.0).abs() < 1e-12);
        let r = adaptive_endpoint(|s| s.powf(-0.75), 1.0, 0.75, 1e-14, 1e-12);
        assert!(r.converged && (r.value - 4.0).abs() < 1e-10, "{r:?}");
    }

    #[test]
    fn brent_finds_roots() {
        let r = brent(|x| x * x * x - 2.0, 0.0, 2.0, None, None, 1e-15, 200).unwrap();
        assert!((r.x - 2f64.cbrt()).abs() < 1e-14);
        assert!(r.iterations < 60);
        assert!(brent(|x| x * x + 1.0, -1.0, 1.0, None, None, 1e-12, 100).is_none());
    }
}
