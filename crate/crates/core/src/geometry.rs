//! Positions on `[−1, 1]` stored together with their distance to the nearer
//! endpoint, so that points exponentially close to `±1` stay distinct.

use std::cmp::Ordering;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Left => -1.0,
            Side::Right => 1.0,
        }
    }
}

/// A point of `[−1, 1]`.
///
/// `dist = 1 − |x|` is authoritative; `x` is a rounded convenience value.
/// The midpoint `x = 0` is assigned to the left half.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    side: Side,
    dist: f64,
}

impl Point {
    pub const CENTER: Point = Point {
        side: Side::Left,
        dist: 1.0,
    };

    /// Point from a coordinate in `[−1, 1]` (clamped).
    pub fn new(x: f64) -> Point {
        let x = x.clamp(-1.0, 1.0);
        let side = if x > 0.0 { Side::Right } else { Side::Left };
        Point {
            side,
            dist: 1.0 - x.abs(),
        }
    }

    /// Point at distance `dist` from the endpoint on `side`.
    pub fn from_boundary(side: Side, dist: f64) -> Point {
        let dist = dist.clamp(0.0, 1.0);
        let side = if dist == 1.0 { Side::Left } else { side };
        Point { side, dist }
    }

    pub fn x(&self) -> f64 {
        self.side.sign() * (1.0 - self.dist)
    }

    pub fn dist(&self) -> f64 {
        self.dist
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn is_center(&self) -> bool {
        self.dist == 1.0
    }

    pub fn is_boundary(&self) -> bool {
        self.dist == 0.0
    }

    /// Total order along the interval.
    pub fn cmp_pos(&self, other: &Point) -> Ordering {
        match (self.side, other.side) {
            (Side::Left, Side::Left) => self.dist.total_cmp(&other.dist),
            (Side::Right, Side::Right) => other.dist.total_cmp(&self.dist),
            (Side::Left, Side::Right) => Ordering::Less,
            (Side::Right, Side::Left) => Ordering::Greater,
        }
    }

    /// Signed length `other − self`, computed without cancellation near `±1`.
    pub fn gap_to(&self, other: &Point) -> f64 {
        match (self.side, other.side) {
            (Side::Left, Side::Left) => other.dist - self.dist,
            (Side::Right, Side::Right) => self.dist - other.dist,
            (Side::Left, Side::Right) => (1.0 - self.dist) + (1.0 - other.dist),
            (Side::Right, Side::Left) => -((1.0 - self.dist) + (1.0 - other.dist)),
        }
    }

    /// The point `self + h`, clamped to `[−1, 1]`, computed in distance
    /// coordinates.
    pub fn shifted(&self, h: f64) -> Point {
        let toward = match self.side {
            Side::Left => h < 0.0,
            Side::Right => h > 0.0,
        };
        let s = h.abs();
        if toward {
            return Point::from_boundary(self.side, (self.dist - s).max(0.0));
        }
        let d = self.dist + s;
        if d <= 1.0 {
            return Point::from_boundary(self.side, d);
        }
        let other = match self.side {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        };
        Point::from_boundary(other, (2.0 - d).max(0.0))
    }

    pub fn min_pos(a: Point, b: Point) -> Point {
        if a.cmp_pos(&b) == Ordering::Greater {
            b
        } else {
            a
        }
    }

    pub fn max_pos(a: Point, b: Point) -> Point {
        if a.cmp_pos(&b) == Ordering::Less {
            b
        } else {
            a
        }
    }

    pub const LEFT_END: Point = Point {
        side: Side::Left,
        dist: 0.0,
    };
    pub const RIGHT_END: Point = Point {
        side: Side::Right,
        dist: 0.0,
    };
}

/// Decomposes `[a, b]` (with `a ≤ b`) into per-side distance ranges
/// `(side, d_lo, d_hi)`, `d_lo < d_hi`, whose union is the interval.
pub fn side_pieces(a: Point, b: Point) -> Vec<(Side, f64, f64)> {
    let mut out = Vec::with_capacity(2);
    if a.cmp_pos(&b) != Ordering::Less {
        return out;
    }
    if a.side() == Side::Left {
        let hi = if b.side() == Side::Left { b.dist() } else { 1.0 };
        if hi > a.dist() {
            out.push((Side::Left, a.dist(), hi));
        }
    }
    if b.side() == Side::Right {
        let hi = if a.side() == Side::Right { a.dist() } else { 1.0 };
        if hi > b.dist() {
            out.push((Side::Right, b.dist(), hi));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_and_gaps() {
        let a = Point::from_boundary(Side::Left, 1e-30);
        let b = Point::new(-0.5);
        let c = Point::CENTER;
        let d = Point::new(0.25);
        let e = Point::from_boundary(Side::Right, 1e-40);
        let pts = [a, b, c, d, e];
        for w in pts.windows(2) {
            assert_eq!(w[0].cmp_pos(&w[1]), Ordering::Less);
            assert!(w[0].gap_to(&w[1]) > 0.0);
        }
        assert_eq!(a.gap_to(&Point::LEFT_END), -1e-30);
        assert!((b.gap_to(&d) - 0.75).abs() < 1e-15);
        assert_eq!(Point::new(0.0), Point::CENTER);
    }

    #[test]
    fn pieces_cover_interval() {
        let p = side_pieces(Point::new(-0.5), Point::new(0.25));
        assert_eq!(p, vec![(Side::Left, 0.5, 1.0), (Side::Right, 0.75, 1.0)]);
        let p = side_pieces(Point::new(0.5), Point::RIGHT_END);
        assert_eq!(p, vec![(Side::Right, 0.0, 0.5)]);
        assert!(side_pieces(Point::new(0.5), Point::new(0.5)).is_empty());
    }

    #[test]
    fn shifting_near_the_boundary_keeps_distance() {
        let p = Point::from_boundary(Side::Right, 1e-20);
        let q = p.shifted(5e-21);
        assert_eq!(q.side(), Side::Right);
        assert!((q.dist() - 5e-21).abs() < 1e-35);
        assert!(p.shifted(1.0).is_boundary());
    }
}
