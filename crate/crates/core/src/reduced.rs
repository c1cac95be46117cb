//! Resonant three-amplitude model of the Raman process with channel
//! input/output:
//!
//! ```text
//! β̇_e = −Ω* β_t / 2
//! β̇_t = +Ω β_e / 2 + g* β_c
//! β̇_c = −γ β_c / 2 − g β_t − √γ α_in
//! α_out = α_in + √γ β_c
//! ```
//!
//! The model is lossless: everything that leaves the cavity goes into the
//! channel.

use serde::{Deserialize, Serialize};

use crate::envelope::{ComplexEnvelope, Wavepacket};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::ode::Rk4;
use crate::params::SystemParams;
use crate::C64;

/// Largest tolerated violation of probability conservation.
pub const NORM_DEFECT_LIMIT: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedState {
    pub beta_e: C64,
    pub beta_t: C64,
    pub beta_c: C64,
}

impl ReducedState {
    pub const ZERO: ReducedState = ReducedState {
        beta_e: C64::new(0.0, 0.0),
        beta_t: C64::new(0.0, 0.0),
        beta_c: C64::new(0.0, 0.0),
    };

    /// `|e,0⟩`.
    pub fn excited() -> Self {
        Self { beta_e: C64::new(1.0, 0.0), ..Self::ZERO }
    }

    pub fn norm_sq(&self) -> f64 {
        self.beta_e.norm_sqr() + self.beta_t.norm_sqr() + self.beta_c.norm_sqr()
    }
}

#[derive(Debug, Clone)]
pub struct ReducedRun {
    pub states: Vec<ReducedState>,
    /// Outgoing field α_out(t) (unnormalised).
    pub alpha_out: ComplexEnvelope,
    /// ∫|α_out|² dt.
    pub emitted: f64,
    /// ∫|α_in|² dt.
    pub absorbed_input: f64,
    /// max_t |‖β(t)‖² + ∫(|α_out|² − |α_in|²) − ‖β(t₀)‖²|.
    pub norm_defect: f64,
}

impl ReducedRun {
    pub fn grid(&self) -> &TimeGrid {
        self.alpha_out.grid()
    }

    pub fn final_state(&self) -> ReducedState {
        *self.states.last().expect("non-empty run")
    }

    /// Normalised outgoing wavepacket with its photon number.
    pub fn output_wavepacket(&self) -> Result<Wavepacket> {
        Wavepacket::from_unnormalized(self.alpha_out.clone())
    }

    pub fn envelope_of(&self, f: impl Fn(&ReducedState) -> C64) -> ComplexEnvelope {
        ComplexEnvelope::new(*self.grid(), self.states.iter().map(f).collect()).expect("finite run")
    }

    /// |β_e(t₁)|².
    pub fn absorption(&self) -> f64 {
        self.final_state().beta_e.norm_sqr()
    }

    /// Reflected photon number ∫|α_out|².
    pub fn reflection(&self) -> f64 {
        self.emitted
    }
}

/// α_out = α_in + √γ β_c.
pub fn input_output(alpha_in: C64, beta_c: C64, params: &SystemParams) -> C64 {
    alpha_in + beta_c * params.sqrt_gamma()
}

fn derivative(y: &[C64], omega: C64, alpha_in: C64, params: &SystemParams, dy: &mut [C64]) {
    let g = params.g_cav;
    let sg = params.sqrt_gamma();
    let (be, bt, bc) = (y[0], y[1], y[2]);
    dy[0] = -omega.conj() * bt * 0.5;
    dy[1] = omega * be * 0.5 + g.conj() * bc;
    dy[2] = -bc * (0.5 * params.gamma) - g * bt - alpha_in * sg;
    let out = input_output(alpha_in, bc, params);
    dy[3] = C64::new(out.norm_sqr() - alpha_in.norm_sqr(), 0.0);
}

/// Integrates the reduced model under the control `omega` and incoming
/// field `alpha_in` (ps^(-1/2); `None` for vacuum) with fixed-step RK4 on
/// the envelope grid.
pub fn integrate_reduced(
    omega: &ComplexEnvelope,
    alpha_in: Option<&ComplexEnvelope>,
    init: ReducedState,
    params: &SystemParams,
) -> Result<ReducedRun> {
    let grid = *omega.grid();
    if let Some(a) = alpha_in {
        grid.ensure_same(a.grid())?;
    }
    if init.norm_sq() > 1.0 + 1e-9 {
        return Err(Error::InvalidParams(format!("initial norm² {} exceeds 1", init.norm_sq())));
    }
    let input = |t: f64| alpha_in.map_or(C64::new(0.0, 0.0), |a| a.sample(t));
    let dt = grid.dt();
    let n0 = init.norm_sq();

    let mut y = vec![init.beta_e, init.beta_t, init.beta_c, C64::new(0.0, 0.0)];
    let mut rk = Rk4::new(4);
    let mut states = Vec::with_capacity(grid.len());
    let mut out = Vec::with_capacity(grid.len());
    let mut defect: f64 = 0.0;
    let mut rhs = |t: f64, y: &[C64], dy: &mut [C64]| derivative(y, omega.sample(t), input(t), params, dy);

    for i in 0..grid.len() {
        let t = grid.time(i);
        let s = ReducedState { beta_e: y[0], beta_t: y[1], beta_c: y[2] };
        defect = defect.max((s.norm_sq() + y[3].re - n0).abs());
        states.push(s);
        out.push(input_output(input(t), s.beta_c, params));
        if i + 1 < grid.len() {
            rk.step(&mut rhs, t, dt, &mut y);
        }
    }
    if defect > NORM_DEFECT_LIMIT || !defect.is_finite() {
        return Err(Error::IntegrationQuality { defect, limit: NORM_DEFECT_LIMIT });
    }
    let alpha_out = ComplexEnvelope::new(grid, out)?;
    let emitted = alpha_out.norm_sq();
    let absorbed_input = alpha_in.map_or(0.0, |a| a.norm_sq());
    Ok(ReducedRun { states, alpha_out, emitted, absorbed_input, norm_defect: defect })
}

/// Receiving run: the node starts with no excitation in the resonant
/// subspace and is driven by the incoming photon field.
pub fn reduced_receive(alpha_in: &Wavepacket, omega: &ComplexEnvelope, params: &SystemParams) -> Result<ReducedRun> {
    omega.grid().ensure_same(alpha_in.grid())?;
    integrate_reduced(omega, Some(&alpha_in.field()), ReducedState::ZERO, params)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> TimeGrid {
        let p = SystemParams::default();
        TimeGrid::with_max_step(-200.0, 200.0, p.default_dt()).unwrap()
    }

    #[test]
    fn dark_state_without_laser() {
        let p = SystemParams::default();
        let g = grid();
        let run = integrate_reduced(&ComplexEnvelope::zeros(g), None, ReducedState::excited(), &p).unwrap();
        assert!(run.states.iter().all(|s| s.beta_e == C64::new(1.0, 0.0)));
        assert_eq!(run.emitted, 0.0);
    }

    #[test]
    fn empty_subspace_stays_empty() {
        let p = SystemParams::default();
        let g = grid();
        let omega = ComplexEnvelope::from_fn(g, |t| C64::new((t / 30.0).cos() * 0.1, 0.05));
        let run = integrate_reduced(&omega, None, ReducedState::ZERO, &p).unwrap();
        assert!(run.states.iter().all(|s| *s == ReducedState::ZERO));
    }

    #[test]
    fn input_output_relation() {
        let p = SystemParams::default();
        let z = C64::new(0.0, 0.0);
        assert_eq!(input_output(z, z, &p), z);
        let bc = C64::new(0.3, -0.1);
        assert!(input_output(-bc * p.sqrt_gamma(), bc, &p).norm() < 1e-16);
        // β_c = sech(γt/6)/√12 reproduces √(γ/12) sech(γt/6)
        for t in [-30.0, 0.0, 12.5] {
            let s = 1.0 / (p.gamma * t / 6.0).cosh();
            let out = input_output(z, C64::new(s / 12f64.sqrt(), 0.0), &p);
            assert!((out.re - (p.gamma / 12.0).sqrt() * s).abs() < 1e-15);
        }
    }

    #[test]
    fn grid_mismatch_is_rejected() {
        let p = SystemParams::default();
        let g = grid();
        let other = g.refined();
        let r = integrate_reduced(&ComplexEnvelope::zeros(g), Some(&ComplexEnvelope::zeros(other)), ReducedState::ZERO, &p);
        assert!(matches!(r, Err(Error::GridMismatch(_))));
    }

    #[test]
    fn coarse_grid_raises_quality_error() {
        let p = SystemParams::default();
        let g = TimeGrid::new(0.0, 200.0, 20).unwrap();
        let init = ReducedState { beta_c: C64::new(1.0, 0.0), ..ReducedState::ZERO };
        let r = integrate_reduced(&ComplexEnvelope::zeros(g), None, init, &p);
        assert!(matches!(r, Err(Error::IntegrationQuality { .. })));
    }

    fn cavity_decay(n_steps: usize) -> (ReducedState, f64) {
        let p = SystemParams::default();
        let g = TimeGrid::new(0.0, 60.0, n_steps).unwrap();
        let init = ReducedState { beta_c: C64::new(1.0, 0.0), ..ReducedState::ZERO };
        let run = integrate_reduced(&ComplexEnvelope::zeros(g), None, init, &p).unwrap();
        let emitted = run.states.last().map(|_| 1.0 - run.final_state().norm_sq()).unwrap();
        (run.final_state(), emitted)
    }

    #[test]
    fn cavity_decay_self_convergence() {
        // reference at a ten-times finer step
        let (reference, ref_emitted) = cavity_decay(10 * 900);
        let (coarse, coarse_emitted) = cavity_decay(900);
        let (fine, _) = cavity_decay(1800);
        let err = |s: ReducedState| {
            ((s.beta_e - reference.beta_e).norm_sqr()
                + (s.beta_t - reference.beta_t).norm_sqr()
                + (s.beta_c - reference.beta_c).norm_sqr())
            .sqrt()
        };
        assert!((coarse_emitted - ref_emitted).abs() < 1e-6);
        let ratio = err(coarse) / err(fine);
        // RK4: halving dt divides the global error by ~16
        assert!(ratio > 12.0 && ratio < 20.0, "ratio {ratio}");
        // damped exchange between cavity and trion
        assert!(reference.beta_t.norm() > 0.0);
    }
}
