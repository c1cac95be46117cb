use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform time grid `t_start, t_start + dt, ..., t_end` (ps) with
/// `n_steps + 1` samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    t_start: f64,
    t_end: f64,
    n_steps: usize,
}

impl TimeGrid {
    pub fn new(t_start: f64, t_end: f64, n_steps: usize) -> Result<Self> {
        if !(t_start.is_finite() && t_end.is_finite()) {
            return Err(Error::InvalidGrid("non-finite endpoint".into()));
        }
        if t_end <= t_start {
            return Err(Error::InvalidGrid(format!(
                "t_end ({t_end}) must exceed t_start ({t_start})"
            )));
        }
        if n_steps < 2 {
            return Err(Error::InvalidGrid(format!("n_steps = {n_steps} < 2")));
        }
        Ok(Self { t_start, t_end, n_steps })
    }

    /// Grid over `[t_start, t_end]` whose step does not exceed `max_dt`.
    pub fn with_max_step(t_start: f64, t_end: f64, max_dt: f64) -> Result<Self> {
        if !(max_dt > 0.0) {
            return Err(Error::InvalidGrid(format!("max_dt = {max_dt}")));
        }
        let n = ((t_end - t_start) / max_dt).ceil().max(2.0) as usize;
        Self::new(t_start, t_end, n)
    }

    /// Symmetric window `[-half_width, half_width]`.
    pub fn symmetric(half_width: f64, n_steps: usize) -> Result<Self> {
        Self::new(-half_width, half_width, n_steps)
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    /// Number of samples, `n_steps + 1`.
    pub fn len(&self) -> usize {
        self.n_steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dt(&self) -> f64 {
        (self.t_end - self.t_start) / self.n_steps as f64
    }

    pub fn time(&self, i: usize) -> f64 {
        if i == self.n_steps {
            self.t_end
        } else {
            self.t_start + i as f64 * self.dt()
        }
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |i| self.time(i))
    }

    /// Grid with the step halved (same endpoints).
    pub fn refined(&self) -> Self {
        Self { n_steps: 2 * self.n_steps, ..*self }
    }

    /// Grid with both endpoints moved by `shift` (same step count).
    pub fn shifted(&self, shift: f64) -> Self {
        Self { t_start: self.t_start + shift, t_end: self.t_end + shift, ..*self }
    }

    /// Reflection point `T = t_start + t_end` of the map `t ↦ T − t`.
    pub fn reflection_point(&self) -> f64 {
        self.t_start + self.t_end
    }

    pub fn ensure_same(&self, other: &TimeGrid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("{self:?} vs {other:?}")))
        }
    }

    /// Fractional sample position of `t` (may lie outside `[0, n_steps]`).
    pub(crate) fn position(&self, t: f64) -> f64 {
        (t - self.t_start) / self.dt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_grids() {
        assert!(TimeGrid::new(0.0, 0.0, 10).is_err());
        assert!(TimeGrid::new(1.0, 0.0, 10).is_err());
        assert!(TimeGrid::new(0.0, 1.0, 1).is_err());
        assert!(TimeGrid::new(0.0, f64::NAN, 10).is_err());
    }

    #[test]
    fn endpoints_exact() {
        let g = TimeGrid::new(-150.0, 150.0, 7).unwrap();
        assert_eq!(g.len(), 8);
        assert_eq!(g.time(0), -150.0);
        assert_eq!(g.time(7), 150.0);
        assert_eq!(g.reflection_point(), 0.0);
        assert!((g.dt() - 300.0 / 7.0).abs() < 1e-12);
    }

    #[test]
    fn max_step_is_respected() {
        let g = TimeGrid::with_max_step(-10.0, 10.0, 0.3).unwrap();
        assert!(g.dt() <= 0.3);
        assert_eq!(g.refined().n_steps(), 2 * g.n_steps());
    }

    #[test]
    fn mismatch_detected() {
        let a = TimeGrid::new(0.0, 1.0, 10).unwrap();
        let b = TimeGrid::new(0.0, 1.0, 11).unwrap();
        assert!(a.ensure_same(&b).is_err());
        assert!(a.ensure_same(&a).is_ok());
    }
}
