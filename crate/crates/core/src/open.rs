//! Open systems in the quantum-jump picture: an effective non-Hermitian
//! Hamiltonian plus jump operators, and deterministic no-jump evolution.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::ode::Rk4;
use crate::operator::TimeDependentOperator;
use crate::C64;

/// Largest tolerated growth of ‖ψ‖² under H_eff before the step is
/// considered faulty.
pub const NORM_INCREASE_LIMIT: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JumpKind {
    /// Photon leaving through the output channel.
    Channel,
    /// Intrinsic cavity loss γ₀.
    IntrinsicLoss,
    /// Trion spontaneous emission into free space.
    Spontaneous,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JumpChannel {
    pub kind: JumpKind,
    /// Node the jump acts on (`None` for the shared channel).
    pub node: Option<usize>,
    /// Jump operator including the square root of its rate.
    pub op: TimeDependentOperator,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OpenSystem {
    pub dims: Vec<usize>,
    /// H − (i/2) Σ c†c.
    pub h_eff: TimeDependentOperator,
    pub jumps: Vec<JumpChannel>,
}

/// States of a no-jump run at every grid point.
#[derive(Debug, Clone)]
pub struct NoJumpRun {
    pub grid: TimeGrid,
    pub states: Vec<Vec<C64>>,
}

impl NoJumpRun {
    pub fn final_state(&self) -> &[C64] {
        self.states.last().expect("non-empty run")
    }

    pub fn norms_sq(&self) -> Vec<f64> {
        self.states.iter().map(|s| norm_sq(s)).collect()
    }
}

pub fn norm_sq(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum()
}

pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

impl OpenSystem {
    pub fn dim(&self) -> usize {
        self.h_eff.dim()
    }

    /// Jump rates ‖c_k(t) ψ‖² for every channel.
    pub fn jump_rates(&self, t: f64, psi: &[C64]) -> Vec<f64> {
        let mut buf = vec![C64::new(0.0, 0.0); psi.len()];
        self.jumps
            .iter()
            .map(|j| {
                j.op.apply(t, psi, &mut buf);
                norm_sq(&buf)
            })
            .collect()
    }

    /// Integrates `i ψ̇ = H_eff ψ` over `grid` (RK4), recording every sample.
    pub fn evolve_no_jump(&self, grid: &TimeGrid, psi0: &[C64]) -> Result<NoJumpRun> {
        let mut states = Vec::with_capacity(grid.len());
        self.evolve_from(grid, 0, psi0, |_, s| states.push(s.to_vec()))?;
        Ok(NoJumpRun { grid: *grid, states })
    }

    /// No-jump evolution from sample `start` to the end of the grid; `visit`
    /// sees every state from `start` on.
    pub fn evolve_from(&self, grid: &TimeGrid, start: usize, psi0: &[C64], mut visit: impl FnMut(usize, &[C64])) -> Result<()> {
        if psi0.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: psi0.len() });
        }
        let dt = grid.dt();
        let mut y = psi0.to_vec();
        let mut rk = Rk4::new(y.len());
        let h = &self.h_eff;
        let mut rhs = |t: f64, y: &[C64], dy: &mut [C64]| {
            h.apply(t, y, dy);
            for v in dy.iter_mut() {
                *v *= C64::new(0.0, -1.0);
            }
        };
        let mut prev = norm_sq(&y);
        visit(start, &y);
        for i in start..grid.n_steps() {
            rk.step(&mut rhs, grid.time(i), dt, &mut y);
            let n = norm_sq(&y);
            if n > prev + NORM_INCREASE_LIMIT || !n.is_finite() {
                return Err(Error::NormIncrease(n - prev));
            }
            prev = n;
            visit(i + 1, &y);
        }
        Ok(())
    }

    /// Backward evolution of a bra: χ(t₁) = `chi_final`,
    /// `dχ/dτ = −i H_eff(τ)† χ`, so that `⟨χ(τ)|φ⟩ = ⟨chi_final|U(t₁, τ)|φ⟩`.
    pub fn evolve_bra_backward(&self, grid: &TimeGrid, chi_final: &[C64]) -> Result<Vec<Vec<C64>>> {
        if chi_final.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: chi_final.len() });
        }
        let hd = self.h_eff.adjoint();
        let mut rhs = |t: f64, y: &[C64], dy: &mut [C64]| {
            hd.apply(t, y, dy);
            for v in dy.iter_mut() {
                *v *= C64::new(0.0, -1.0);
            }
        };
        let n = grid.len();
        let mut out = vec![Vec::new(); n];
        let mut y = chi_final.to_vec();
        let mut rk = Rk4::new(y.len());
        out[n - 1] = y.clone();
        for i in (1..n).rev() {
            rk.step(&mut rhs, grid.time(i), -grid.dt(), &mut y);
            out[i - 1] = y.clone();
        }
        Ok(out)
    }

    /// Probability of the first jump through each channel,
    /// `∫ ‖c_k ψ(t)‖² dt` along the no-jump branch (trapezoidal).
    pub fn first_jump_probabilities(&self, run: &NoJumpRun) -> Vec<f64> {
        let dt = run.grid.dt();
        let n = run.states.len();
        let mut acc = vec![0.0; self.jumps.len()];
        for (i, s) in run.states.iter().enumerate() {
            let w = if i == 0 || i == n - 1 { 0.5 * dt } else { dt };
            for (a, r) in acc.iter_mut().zip(self.jump_rates(run.grid.time(i), s)) {
                *a += w * r;
            }
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::SparseMatrix;

    fn decaying_qubit(rate: f64) -> OpenSystem {
        let mut h = TimeDependentOperator::new(2);
        let mut n = SparseMatrix::new(2);
        n.push(1, 1, C64::new(1.0, 0.0));
        h.add_constant(C64::new(0.0, -0.5 * rate), n);
        let mut flip = SparseMatrix::new(2);
        flip.push(0, 1, C64::new(0.2, 0.0));
        flip.push(1, 0, C64::new(0.2, 0.0));
        h.add_constant(C64::new(1.0, 0.0), flip);
        let mut c = TimeDependentOperator::new(2);
        let mut low = SparseMatrix::new(2);
        low.push(0, 1, C64::new(rate.sqrt(), 0.0));
        c.add_constant(C64::new(1.0, 0.0), low);
        OpenSystem { dims: vec![2], h_eff: h, jumps: vec![JumpChannel { kind: JumpKind::Channel, node: None, op: c }] }
    }

    #[test]
    fn norm_loss_equals_jump_probability() {
        let sys = decaying_qubit(0.3);
        let grid = TimeGrid::new(0.0, 20.0, 4000).unwrap();
        let run = sys.evolve_no_jump(&grid, &[C64::new(0.0, 0.0), C64::new(1.0, 0.0)]).unwrap();
        let norms = run.norms_sq();
        assert!(norms.windows(2).all(|w| w[1] <= w[0] + 1e-15));
        let p = sys.first_jump_probabilities(&run)[0];
        assert!((1.0 - norms.last().unwrap() - p).abs() < 1e-6);
    }

    #[test]
    fn backward_bra_reproduces_forward_amplitude() {
        let sys = decaying_qubit(0.3);
        let grid = TimeGrid::new(0.0, 10.0, 2000).unwrap();
        let target = [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
        let chi = sys.evolve_bra_backward(&grid, &target).unwrap();
        // ⟨target|U(t₁, τ)|φ⟩ for φ injected at sample k
        let k = 700;
        let phi = [C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
        let sub = TimeGrid::new(grid.time(k), grid.t_end(), grid.n_steps() - k).unwrap();
        let fwd = sys.evolve_no_jump(&sub, &phi).unwrap();
        let a = inner(&target, fwd.final_state());
        let b = inner(&chi[k], &phi);
        assert!((a - b).norm() < 1e-9);
    }

    #[test]
    fn growing_norm_is_rejected() {
        let mut sys = decaying_qubit(0.3);
        sys.h_eff = sys.h_eff.adjoint();
        let grid = TimeGrid::new(0.0, 1.0, 100).unwrap();
        let r = sys.evolve_no_jump(&grid, &[C64::new(0.0, 0.0), C64::new(1.0, 0.0)]);
        assert!(matches!(r, Err(Error::NormIncrease(_))));
    }
}
