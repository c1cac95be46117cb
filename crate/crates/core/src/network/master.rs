//! Deterministic density-matrix integration of an [`OpenSystem`].
//!
//! ```text
//! dρ/dt = −i(H_eff ρ − ρ H_eff†) + Σ_k c_k ρ c_k†
//! ```
//!
//! With `recycle = false` the jump terms are dropped: every trajectory that
//! jumps is treated as lost, and `1 − tr ρ` is the jump probability.

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::ode::Rk4;
use crate::open::OpenSystem;
use crate::state::DensityMatrix;
use crate::C64;

/// Most negative eigenvalue tolerated in the final state.
pub const POSITIVITY_LIMIT: f64 = -1e-7;

const I: C64 = C64::new(0.0, 1.0);

fn adjoint_into(x: &[C64], d: usize, out: &mut [C64]) {
    for i in 0..d {
        for j in 0..d {
            out[j * d + i] = x[i * d + j].conj();
        }
    }
}

/// Integrates the master equation over `grid` starting from `rho0`.
pub fn evolve_master(sys: &OpenSystem, grid: &TimeGrid, rho0: &DensityMatrix, recycle: bool) -> Result<DensityMatrix> {
    let d = sys.dim();
    if rho0.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: rho0.dim() });
    }
    let mut x = vec![C64::new(0.0, 0.0); d * d];
    let mut xt = vec![C64::new(0.0, 0.0); d * d];
    let mut y = vec![C64::new(0.0, 0.0); d * d];
    let mut rhs = |t: f64, rho: &[C64], drho: &mut [C64]| {
        sys.h_eff.apply_matrix(t, rho, d, &mut x);
        for i in 0..d {
            for j in 0..d {
                drho[i * d + j] = -I * x[i * d + j] + I * x[j * d + i].conj();
            }
        }
        if recycle {
            for jump in &sys.jumps {
                // c ρ c† = c (c ρ)† for Hermitian ρ
                jump.op.apply_matrix(t, rho, d, &mut x);
                adjoint_into(&x, d, &mut xt);
                jump.op.apply_matrix(t, &xt, d, &mut y);
                for (a, b) in drho.iter_mut().zip(&y) {
                    *a += b;
                }
            }
        }
    };
    let mut rho = rho0.data().to_vec();
    let mut rk = Rk4::new(d * d);
    for i in 0..grid.n_steps() {
        rk.step(&mut rhs, grid.time(i), grid.dt(), &mut rho);
    }
    // remove round-off asymmetry before the eigen-check
    for i in 0..d {
        for j in i..d {
            let m = (rho[i * d + j] + rho[j * d + i].conj()) * 0.5;
            rho[i * d + j] = m;
            rho[j * d + i] = m.conj();
        }
    }
    let out = DensityMatrix::from_raw(rho0.dims().to_vec(), rho)?;
    let min = out.eigenvalues()?.last().copied().unwrap_or(0.0);
    if min < POSITIVITY_LIMIT || !min.is_finite() {
        return Err(Error::PositivityViolation(min));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::open::{JumpChannel, JumpKind};
    use crate::operator::{SparseMatrix, TimeDependentOperator};
    use crate::state::PureState;

    fn driven_decay(rate: f64, drive: f64) -> OpenSystem {
        let mut h = TimeDependentOperator::new(2);
        let mut x = SparseMatrix::new(2);
        x.push(0, 1, C64::new(drive, 0.0));
        x.push(1, 0, C64::new(drive, 0.0));
        h.add_constant(C64::new(1.0, 0.0), x);
        let mut n = SparseMatrix::new(2);
        n.push(1, 1, C64::new(1.0, 0.0));
        h.add_constant(C64::new(0.0, -0.5 * rate), n);
        let mut low = SparseMatrix::new(2);
        low.push(0, 1, C64::new(rate.sqrt(), 0.0));
        let mut c = TimeDependentOperator::new(2);
        c.add_constant(C64::new(1.0, 0.0), low);
        OpenSystem { dims: vec![2], h_eff: h, jumps: vec![JumpChannel { kind: JumpKind::Channel, node: None, op: c }] }
    }

    #[test]
    fn resonance_fluorescence_steady_state() {
        // Ω = 2·drive; steady excited population s/(2(1+s)) with s = 2Ω²/γ²
        let (rate, drive) = (0.4, 0.15);
        let sys = driven_decay(rate, drive);
        let grid = TimeGrid::new(0.0, 150.0, 15000).unwrap();
        let rho0 = PureState::new(vec![2], vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]).unwrap().density_matrix();
        let rho = evolve_master(&sys, &grid, &rho0, true).unwrap();
        let omega = 2.0 * drive;
        let s = 2.0 * omega * omega / (rate * rate);
        assert!((rho.trace() - 1.0).abs() < 1e-10);
        assert!((rho.get(1, 1).re - s / (2.0 * (1.0 + s))).abs() < 1e-6);
    }

    #[test]
    fn without_recycling_the_trace_is_the_no_jump_norm() {
        let sys = driven_decay(0.3, 0.2);
        let grid = TimeGrid::new(0.0, 20.0, 2000).unwrap();
        let psi0 = vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)];
        let rho0 = PureState::new(vec![2], psi0.clone()).unwrap().density_matrix();
        let rho = evolve_master(&sys, &grid, &rho0, false).unwrap();
        let run = sys.evolve_no_jump(&grid, &psi0).unwrap();
        let psi = run.final_state();
        for i in 0..2 {
            for j in 0..2 {
                assert!((rho.get(i, j) - psi[i] * psi[j].conj()).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let sys = driven_decay(0.3, 0.2);
        let grid = TimeGrid::new(0.0, 1.0, 10).unwrap();
        let rho0 = PureState::new(vec![3], vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)]).unwrap().density_matrix();
        assert!(matches!(evolve_master(&sys, &grid, &rho0, false), Err(Error::DimensionMismatch { .. })));
    }
}
