//! Weights on `(−1, 1)`: constant, power `(1 − |x|)^β`, or custom closures
//! with declared endpoint exponents.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{side_pieces, Point, Side};
use crate::quad::integrate_distance;

const MODULE: &str = "weights";
const QUAD_REL: f64 = 1e-13;

type WeightFn = Arc<dyn Fn(Point) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightFamily {
    Constant,
    Power { beta: f64 },
    Custom,
}

/// A positive weight `w` on `(−1, 1)`.
///
/// Custom weights declare `w ~ const·(1 − |x|)^{β_±}` near `±1`; the
/// exponents drive quadrature grading and the integrability test.
#[derive(Clone)]
pub struct Weight {
    family: WeightFamily,
    custom: Option<WeightFn>,
    beta_left: f64,
    beta_right: f64,
}

impl fmt::Debug for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Weight")
            .field("family", &self.family)
            .field("beta_left", &self.beta_left)
            .field("beta_right", &self.beta_right)
            .finish()
    }
}

impl Weight {
    pub fn constant() -> Weight {
        Weight {
            family: WeightFamily::Constant,
            custom: None,
            beta_left: 0.0,
            beta_right: 0.0,
        }
    }

    /// `w(x) = (1 − |x|)^β`.
    pub fn power(beta: f64) -> Result<Weight> {
        if !(beta.is_finite() && beta > -1.0) {
            return Err(Error::invalid(MODULE, "power", format!("beta must be finite and > -1, got {beta}")));
        }
        Ok(Weight {
            family: WeightFamily::Power { beta },
            custom: None,
            beta_left: beta,
            beta_right: beta,
        })
    }

    /// Custom weight with declared endpoint exponents.
    pub fn custom(
        f: impl Fn(Point) -> f64 + Send + Sync + 'static,
        beta_left: f64,
        beta_right: f64,
    ) -> Result<Weight> {
        if !(beta_left > -1.0 && beta_right > -1.0) {
            return Err(Error::invalid(MODULE, "custom", "endpoint exponents must be > -1"));
        }
        Ok(Weight {
            family: WeightFamily::Custom,
            custom: Some(Arc::new(f)),
            beta_left,
            beta_right,
        })
    }

    pub fn family(&self) -> WeightFamily {
        self.family
    }

    /// Declared exponent of `w` at the endpoint on `side`.
    pub fn end_exponent(&self, side: Side) -> f64 {
        match side {
            Side::Left => self.beta_left,
            Side::Right => self.beta_right,
        }
    }

    pub fn eval(&self, pt: Point) -> f64 {
        match self.family {
            WeightFamily::Constant => 1.0,
            WeightFamily::Power { beta } => pt.dist().powf(beta),
            WeightFamily::Custom => (self.custom.as_ref().expect("custom weight closure"))(pt),
        }
    }

    pub fn eval_x(&self, x: f64) -> f64 {
        self.eval(Point::new(x))
    }

    /// `w^{−1/(p−1)}` at `pt`.
    pub fn conjugate(&self, pt: Point, p: f64) -> f64 {
        match self.family {
            WeightFamily::Constant => 1.0,
            WeightFamily::Power { beta } => pt.dist().powf(-beta / (p - 1.0)),
            WeightFamily::Custom => self.eval(pt).powf(-1.0 / (p - 1.0)),
        }
    }

    /// `∫_0^d w^{−1/(p−1)}(ρ) dρ` along `side`, where `ρ` is the distance to
    /// the endpoint on that side.
    pub fn conjugate_tail(&self, side: Side, d: f64, p: f64) -> Result<f64> {
        if d <= 0.0 {
            return Ok(0.0);
        }
        match self.family {
            WeightFamily::Constant => Ok(d),
            WeightFamily::Power { beta } => {
                let b = beta / (p - 1.0);
                if b >= 1.0 {
                    return Ok(f64::INFINITY);
                }
                Ok(d.powf(1.0 - b) / (1.0 - b))
            }
            WeightFamily::Custom => {
                let b = self.end_exponent(side) / (p - 1.0);
                if b >= 1.0 {
                    return Ok(f64::INFINITY);
                }
                let r = integrate_distance(
                    |rho| self.conjugate(Point::from_boundary(side, rho), p),
                    0.0,
                    d,
                    b.max(0.0),
                    0.0,
                    QUAD_REL,
                );
                if !r.converged {
                    return Err(Error::Quadrature {
                        module: MODULE,
                        op: "conjugate_tail",
                        estimate: r.error,
                        tolerance: QUAD_REL * r.value.abs(),
                    });
                }
                Ok(r.value)
            }
        }
    }

    /// `∫_a^b w` over the segment between two points.
    pub fn interval_weight(&self, a: Point, b: Point) -> Result<f64> {
        let mut total = 0.0;
        for (side, lo, hi) in side_pieces(a, b) {
            total += self.piece_weight(side, lo, hi)?;
        }
        Ok(total)
    }

    fn piece_weight(&self, side: Side, lo: f64, hi: f64) -> Result<f64> {
        match self.family {
            WeightFamily::Constant => Ok(hi - lo),
            WeightFamily::Power { beta } => {
                let e = beta + 1.0;
                Ok((hi.powf(e) - lo.powf(e)) / e)
            }
            WeightFamily::Custom => {
                let sing = (-self.end_exponent(side)).max(0.0);
                let r = integrate_distance(
                    |rho| self.eval(Point::from_boundary(side, rho)),
                    lo,
                    hi,
                    sing,
                    0.0,
                    QUAD_REL,
                );
                if !r.converged {
                    return Err(Error::Quadrature {
                        module: MODULE,
                        op: "interval_weight",
                        estimate: r.error,
                        tolerance: QUAD_REL * r.value.abs(),
                    });
                }
                Ok(r.value)
            }
        }
    }

    /// `w(B(x, r) ∩ (−1, 1))`.
    pub fn ball_weight(&self, x: f64, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::invalid(MODULE, "ball_weight", format!("radius must be > 0, got {r}")));
        }
        let c = Point::new(x);
        self.interval_weight(c.shifted(-r), c.shifted(r))
    }

    /// Whether `∫ w^{−1/(p−1)} < ∞` on `(−1, 1)`.
    pub fn conjugate_integrable(&self, p: f64) -> bool {
        match self.family {
            WeightFamily::Constant => true,
            _ => self.beta_left / (p - 1.0) < 1.0 && self.beta_right / (p - 1.0) < 1.0,
        }
    }

    /// Checks the admissible window `β ∈ (−1, p − 1)` at both ends.
    pub fn validate_for(&self, p: f64) -> Result<()> {
        for beta in [self.beta_left, self.beta_right] {
            if !(beta > -1.0 && beta < p - 1.0) {
                return Err(Error::invalid(
                    MODULE,
                    "validate_for",
                    format!("weight exponent {beta} outside (-1, p - 1) = (-1, {})", p - 1.0),
                ));
            }
        }
        Ok(())
    }
}

impl Default for Weight {
    fn default() -> Self {
        Weight::constant()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ball_weight_examples() {
        let one = Weight::constant();
        assert!((one.ball_weight(0.0, 0.5).unwrap() - 1.0).abs() < 1e-15);
        let flat = Weight::power(0.0).unwrap();
        assert!((flat.ball_weight(0.9, 0.2).unwrap() - 0.3).abs() < 1e-14);
        let lin = Weight::power(1.0).unwrap();
        assert!((lin.ball_weight(0.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(one.ball_weight(0.0, 0.0).is_err());
    }

    #[test]
    fn integrability_window() {
        assert!(Weight::constant().conjugate_integrable(1.3));
        assert!(!Weight::power(1.0).unwrap().conjugate_integrable(2.0));
        assert!(Weight::power(0.5).unwrap().conjugate_integrable(2.0));
        assert!(Weight::power(0.5).unwrap().validate_for(1.5).is_err());
        assert!(Weight::power(-0.5).unwrap().validate_for(1.5).is_ok());
    }

    #[test]
    fn custom_matches_power() {
        let beta = -0.4;
        let pw = Weight::power(beta).unwrap();
        let cw = Weight::custom(move |pt| pt.dist().powf(beta), beta, beta).unwrap();
        for &(a, b) in &[(-1.0, 1.0), (-0.99, -0.2), (0.3, 1.0), (-0.5, 0.75)] {
            let (pa, pb) = (Point::new(a), Point::new(b));
            let exact = pw.interval_weight(pa, pb).unwrap();
            let quad = cw.interval_weight(pa, pb).unwrap();
            assert!((exact - quad).abs() <= 1e-12 * exact, "{a} {b}: {exact} vs {quad}");
        }
        let p = 2.5;
        let t1 = pw.conjugate_tail(Side::Right, 0.3, p).unwrap();
        let t2 = cw.conjugate_tail(Side::Right, 0.3, p).unwrap();
        assert!((t1 - t2).abs() <= 1e-12 * t1);
    }

    proptest! {
        #[test]
        fn ball_weight_monotone_in_radius(x in -0.99f64..0.99, r in 0.001f64..2.0, dr in 0.0f64..1.0, beta in -0.9f64..2.0) {
            let w = Weight::power(beta).unwrap();
            let a = w.ball_weight(x, r).unwrap();
            let b = w.ball_weight(x, r + dr).unwrap();
            prop_assert!(b >= a * (1.0 - 1e-14));
        }

        #[test]
        fn interval_weight_additive(a in -1.0f64..1.0, t in 0.0f64..1.0, s in 0.0f64..1.0, beta in -0.9f64..2.0) {
            let w = Weight::power(beta).unwrap();
            let b = a + (1.0 - a) * t;
            let c = b + (1.0 - b) * s;
            let (pa, pb, pc) = (Point::new(a), Point::new(b), Point::new(c));
            let whole = w.interval_weight(pa, pc).unwrap();
            let parts = w.interval_weight(pa, pb).unwrap() + w.interval_weight(pb, pc).unwrap();
            prop_assert!((whole - parts).abs() <= 1e-12 * whole.max(1e-300) + 1e-15);
        }
    }
}
