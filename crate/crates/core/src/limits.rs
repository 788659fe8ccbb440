//! Classification of nondecreasing sequences produced by truncation
//! refinement: converged, diverged, or undecided.

/// Outcome after pushing one more term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    Continue,
    Converged,
    Diverged,
}

/// Final classification of a sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Converged,
    Diverged,
    Unconverged,
}

#[derive(Debug, Clone)]
pub struct LimitTracker {
    tol: f64,
    cap: f64,
    min_level: u32,
    /// Increment ratio at or above which an exhausted schedule counts as
    /// divergent.
    diverge_ratio: f64,
    levels: Vec<u32>,
    values: Vec<f64>,
    increments: Vec<f64>,
    streak: usize,
    state: Option<Step>,
}

impl LimitTracker {
    pub fn new(tol: f64, cap: f64, min_level: u32) -> Self {
        LimitTracker {
            tol,
            cap,
            min_level,
            diverge_ratio: 0.98,
            levels: Vec::new(),
            values: Vec::new(),
            increments: Vec::new(),
            streak: 0,
            state: None,
        }
    }

    pub fn with_diverge_ratio(mut self, r: f64) -> Self {
        self.diverge_ratio = r;
        self
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn increments(&self) -> &[f64] {
        &self.increments
    }

    pub fn levels(&self) -> &[u32] {
        &self.levels
    }

    /// Records the term at `level` with its increment over the previous
    /// term (`value` sets the relative scale).
    pub fn push(&mut self, level: u32, value: f64, increment: f64) -> Step {
        let prev_inc = self.increments.last().copied();
        self.levels.push(level);
        self.values.push(value);
        self.increments.push(increment.max(0.0));
        if !value.is_finite() || value > self.cap {
            self.state = Some(Step::Diverged);
            return Step::Diverged;
        }
        if level < self.min_level {
            self.streak = 0;
            return Step::Continue;
        }
        let est = remainder_estimate(prev_inc, increment.max(0.0));
        if est <= self.tol * value.abs() {
            self.streak += 1;
        } else {
            self.streak = 0;
        }
        if self.streak >= 2 {
            self.state = Some(Step::Converged);
            return Step::Converged;
        }
        Step::Continue
    }

    /// Least-squares slope of `log2(increment)` against level over the last
    /// `window` terms with positive increments.
    pub fn rate(&self, window: usize) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .levels
            .iter()
            .zip(&self.increments)
            .filter(|(_, &d)| d > 0.0)
            .map(|(&k, &d)| (k as f64, d.log2()))
            .collect();
        let pts = &pts[pts.len().saturating_sub(window)..];
        if pts.len() < 3 {
            return None;
        }
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        Some(sxy / sxx)
    }

    pub fn verdict(&self) -> Verdict {
        match self.state {
            Some(Step::Converged) => Verdict::Converged,
            Some(Step::Diverged) => Verdict::Diverged,
            _ => match self.rate(12) {
                Some(r) if r >= self.diverge_ratio.log2() => Verdict::Diverged,
                _ => Verdict::Unconverged,
            },
        }
    }

    /// Geometric extrapolation of what remains after the last term.
    pub fn remainder(&self) -> f64 {
        let n = self.increments.len();
        if n == 0 {
            return f64::INFINITY;
        }
        let prev = if n >= 2 { Some(self.increments[n - 2]) } else { None };
        remainder_estimate(prev, self.increments[n - 1])
    }
}

fn remainder_estimate(prev: Option<f64>, inc: f64) -> f64 {
    if inc == 0.0 {
        return 0.0;
    }
    match prev {
        Some(p) if p > 0.0 => {
            let r = inc / p;
            if r < 1.0 {
                inc * (r / (1.0 - r)).max(1.0)
            } else {
                f64::INFINITY
            }
        }
        _ => f64::INFINITY,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_sequence_converges() {
        let mut t = LimitTracker::new(1e-10, 1e12, 1);
        let mut v = 0.0;
        let mut out = Step::Continue;
        for k in 1..=200 {
            let d = 0.5f64.powi(k);
            v += d;
            out = t.push(k as u32, v, d);
            if out != Step::Continue {
                break;
            }
        }
        assert_eq!(out, Step::Converged);
        assert_eq!(t.verdict(), Verdict::Converged);
        assert!((t.rate(12).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn logarithmic_growth_is_divergent() {
        let mut t = LimitTracker::new(1e-10, 1e12, 1);
        for k in 1..=60 {
            assert_eq!(t.push(k, k as f64, 1.0), Step::Continue);
        }
        assert_eq!(t.verdict(), Verdict::Diverged);
    }

    #[test]
    fn cap_and_slow_convergence() {
        let mut t = LimitTracker::new(1e-10, 100.0, 1);
        assert_eq!(t.push(1, 50.0, 50.0), Step::Continue);
        assert_eq!(t.push(2, 150.0, 100.0), Step::Diverged);
        let mut t = LimitTracker::new(1e-14, 1e12, 1);
        let mut v = 0.0;
        for k in 1..=40 {
            let d = 0.9f64.powi(k);
            v += d;
            t.push(k as u32, v, d);
        }
        assert_eq!(t.verdict(), Verdict::Unconverged);
    }
}
