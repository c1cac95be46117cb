//! One interface node beyond the resonant approximation.
//!
//! Basis: `{g, e, t, t̄} ⊗ {0..n_max}`. In the interaction picture fixed by
//! `ω_t = ω_L + ω_e = ω_c + ω_g` (trions degenerate, `Δ = ω_e − ω_g`):
//!
//! ```text
//! ⟨t,n|H|e,n⟩   = i Ω/2                  resonant laser
//! ⟨t,n|H|g,n+1⟩ = i g* √(n+1)            resonant cavity
//! ⟨t̄,n|H|g,n⟩   = i Ω/2 e^{+iΔt}         off-resonant laser
//! ⟨t̄,n|H|e,n+1⟩ = i g* √(n+1) e^{−iΔt}   off-resonant cavity
//! ```
//!
//! plus Hermitian conjugates. On `{|e,0⟩, |t,0⟩, |g,1⟩}` the resonant part
//! reproduces the reduced model exactly.

use serde::{Deserialize, Serialize};

use crate::envelope::{ComplexEnvelope, Wavepacket};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::network::cascade::CascadeSystem;
use crate::network::source::VirtualSource;
use crate::ode::Rk4;
use crate::open::{inner, norm_sq, JumpChannel, JumpKind, OpenSystem};
use crate::operator::{Modulation, SparseMatrix, TimeDependentOperator};
use crate::params::SystemParams;
use crate::state::{Level, NodeSpace, QubitAmplitudes};
use crate::C64;

const I: C64 = C64::new(0.0, 1.0);

/// Weight beyond the highest tracked emission branch above which the
/// truncation is flagged.
pub const TRUNCATION_WARNING: f64 = 1e-6;

/// |Ω| threshold (relative to the peak) that delimits the operation window.
pub const WINDOW_THRESHOLD: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeOptions {
    /// Keep the couplings that oscillate at the Zeeman frequency.
    pub off_resonant: bool,
    /// Fraction of Γ going to the `|t⟩→|g⟩` (and `|t̄⟩→|e⟩`) branch.
    pub spontaneous_split: f64,
    /// Raised-cosine switch-on/off applied to Ω, in samples.
    pub gate_steps: usize,
}

impl Default for NodeOptions {
    fn default() -> Self {
        Self { off_resonant: true, spontaneous_split: 0.5, gate_steps: 5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeModel {
    pub params: SystemParams,
    pub options: NodeOptions,
}

impl NodeModel {
    pub fn new(params: SystemParams) -> Self {
        Self { params, options: NodeOptions::default() }
    }

    pub fn with_options(params: SystemParams, options: NodeOptions) -> Self {
        Self { params, options }
    }

    pub fn space(&self) -> NodeSpace {
        NodeSpace::new(self.params.n_max)
    }

    pub fn dim(&self) -> usize {
        self.space().dim()
    }

    pub fn annihilation(&self) -> SparseMatrix {
        let s = self.space();
        let mut a = SparseMatrix::new(s.dim());
        for level in Level::ALL {
            for n in 1..=s.n_max {
                a.push(s.index(level, n - 1), s.index(level, n), C64::new((n as f64).sqrt(), 0.0));
            }
        }
        a
    }

    pub fn number(&self) -> SparseMatrix {
        let a = self.annihilation();
        a.adjoint().matmul(&a)
    }

    fn transition(&self, to: Level, from: Level, photon_shift: usize, with_sqrt: bool) -> SparseMatrix {
        let s = self.space();
        let mut m = SparseMatrix::new(s.dim());
        for n in 0..=s.n_max {
            let m_from = n + photon_shift;
            if m_from > s.n_max {
                continue;
            }
            let f = if with_sqrt { (m_from as f64).sqrt() } else { 1.0 };
            m.push(s.index(to, n), s.index(from, m_from), C64::new(f, 0.0));
        }
        m
    }

    /// Ω with the raised-cosine edge gate applied.
    pub fn gate(&self, omega: &ComplexEnvelope) -> ComplexEnvelope {
        omega.with_edge_gate(self.options.gate_steps)
    }

    /// Hermitian H(t) for the control `omega` (used as given, no gate).
    pub fn hamiltonian(&self, omega: &ComplexEnvelope) -> TimeDependentOperator {
        let g = self.params.g_cav;
        let delta = self.params.delta_zeeman;
        let mut h = TimeDependentOperator::new(self.dim());
        let idx = h.add_envelope(omega.clone());
        let laser = |conjugate| Modulation::Envelope { index: idx, conjugate };

        let push_pair = |h: &mut TimeDependentOperator, pre: C64, modulation: Modulation, rotation: f64, m: SparseMatrix| {
            h.add_term(pre.conj(), modulation.conjugated(), -rotation, m.adjoint());
            h.add_term(pre, modulation, rotation, m);
        };

        push_pair(&mut h, I * 0.5, laser(false), 0.0, self.transition(Level::T, Level::E, 0, false));
        push_pair(&mut h, I * g.conj(), Modulation::Constant, 0.0, self.transition(Level::T, Level::G, 1, true));
        if self.options.off_resonant {
            push_pair(&mut h, I * 0.5, laser(false), delta, self.transition(Level::TBar, Level::G, 0, false));
            push_pair(&mut h, I * g.conj(), Modulation::Constant, -delta, self.transition(Level::TBar, Level::E, 1, true));
        }
        h
    }

    /// `√γ a`.
    pub fn channel_operator(&self) -> SparseMatrix {
        self.annihilation().scaled(C64::new(self.params.sqrt_gamma(), 0.0))
    }

    /// Intrinsic loss and spontaneous emission, with rates folded in.
    pub fn local_jumps(&self) -> Vec<(JumpKind, SparseMatrix)> {
        let p = &self.params;
        let mut out = Vec::new();
        if p.gamma0 > 0.0 {
            out.push((JumpKind::IntrinsicLoss, self.annihilation().scaled(C64::new(p.gamma0.sqrt(), 0.0))));
        }
        if p.gamma_trion > 0.0 {
            let s = self.options.spontaneous_split.clamp(0.0, 1.0);
            let r1 = C64::new((p.gamma_trion * s).sqrt(), 0.0);
            let r2 = C64::new((p.gamma_trion * (1.0 - s)).sqrt(), 0.0);
            for (to, from, r) in [
                (Level::G, Level::T, r1),
                (Level::E, Level::T, r2),
                (Level::E, Level::TBar, r1),
                (Level::G, Level::TBar, r2),
            ] {
                if r.re > 0.0 {
                    out.push((JumpKind::Spontaneous, self.transition(to, from, 0, false).scaled(r)));
                }
            }
        }
        out
    }

    /// Standalone node emitting into an empty channel.
    pub fn open_system(&self, omega: &ComplexEnvelope) -> OpenSystem {
        let mut h_eff = self.hamiltonian(omega);
        let c = self.channel_operator();
        let mut jumps = vec![JumpChannel { kind: JumpKind::Channel, node: Some(0), op: constant_op(c.clone()) }];
        h_eff.add_constant(I * -0.5, c.adjoint().matmul(&c));
        for (kind, m) in self.local_jumps() {
            h_eff.add_constant(I * -0.5, m.adjoint().matmul(&m));
            jumps.push(JumpChannel { kind, node: Some(0), op: constant_op(m) });
        }
        OpenSystem { dims: vec![self.dim()], h_eff, jumps }
    }

    pub fn initial_state(&self, q: QubitAmplitudes) -> Vec<C64> {
        let s = self.space();
        let mut v = vec![C64::new(0.0, 0.0); s.dim()];
        v[s.index(Level::G, 0)] = q.c_g;
        v[s.index(Level::E, 0)] = q.c_e;
        v
    }
}

pub(crate) fn constant_op(m: SparseMatrix) -> TimeDependentOperator {
    let mut op = TimeDependentOperator::new(m.dim());
    op.add_constant(C64::new(1.0, 0.0), m);
    op
}

/// The ideal emitted photon: packet, rotation angle and the predicted
/// phase of the residual `|e⟩` amplitude.
#[derive(Debug, Clone, PartialEq)]
pub struct SendReference {
    pub packet: Wavepacket,
    pub theta: f64,
    pub phi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SendOutcome {
    /// ⟨g,0|ψ(t₁)⟩ with no photon emitted.
    pub amp_vacuum: C64,
    /// ⟨e,0|ψ(t₁)⟩ with no photon emitted.
    pub amp_excited: C64,
    /// Amplitude of a single emission at τ with the node ending in `|g,0⟩`.
    pub one_photon: ComplexEnvelope,
    /// Probability of exactly k channel emissions and no other jump.
    pub branch_weights: Vec<f64>,
    /// Probability of more channel emissions than the tracked branches.
    pub beyond_weight: f64,
    /// Coherent weight outside the ideal components (non-resonant
    /// excitation, extra photons, residual excitation).
    pub p_error: f64,
    /// Weight of trajectories with a free-space or intrinsic-loss jump.
    pub p_loss: f64,
    pub phi_g: f64,
    /// |⟨α̃|one⟩| / ‖one‖ for the `|e⟩` pathway.
    pub pulse_fidelity: Option<f64>,
    /// |⟨α̃|one⟩| / sinθ for the `|e⟩` pathway.
    pub pulse_overlap: Option<f64>,
    /// Phase-compensated fidelity for the equal superposition.
    pub overall_fidelity: Option<f64>,
    /// Same, averaged over the six cardinal input states.
    pub average_fidelity: Option<f64>,
    pub truncation_warning: bool,
    /// Interval in which |Ω| exceeds 10⁻³ of its peak.
    pub operation_window: (f64, f64),
    /// ⟨e,0|ψ⟩ and ⟨g,1|ψ⟩ along the run.
    pub beta_e: ComplexEnvelope,
    pub beta_c: ComplexEnvelope,
}

impl SendOutcome {
    pub fn photon_number(&self) -> f64 {
        self.one_photon.norm_sq()
    }

    pub fn operation_time(&self) -> f64 {
        self.operation_window.1 - self.operation_window.0
    }

    /// Total weight outside the ideal components, losses included.
    pub fn p_error_total(&self) -> f64 {
        self.p_error + self.p_loss
    }
}

struct RawSend {
    amp_vacuum: C64,
    amp_excited: C64,
    one_photon: Vec<C64>,
    branch_weights: Vec<f64>,
    beyond: f64,
    beta_e: Vec<C64>,
    beta_c: Vec<C64>,
}

/// `out += s · M ρ M†` for dense row-major ρ.
fn sandwich_add(m: &SparseMatrix, rho: &[C64], d: usize, s: f64, out: &mut [C64]) {
    for &(i, k, v) in m.entries() {
        for &(j, l, w) in m.entries() {
            out[i * d + j] += v * rho[k * d + l] * w.conj() * s;
        }
    }
}

/// `dρ = −i(H ρ − ρ H†)` for Hermitian ρ, written into `out`.
fn liouvillian_no_jump(h: &TimeDependentOperator, t: f64, rho: &[C64], d: usize, out: &mut [C64], scratch: &mut [C64]) {
    h.apply_matrix(t, rho, d, scratch);
    for i in 0..d {
        for j in 0..d {
            out[i * d + j] = -I * scratch[i * d + j] + I * scratch[j * d + i].conj();
        }
    }
}

impl NodeModel {
    fn raw_send(&self, sys: &OpenSystem, grid: &TimeGrid, psi0: &[C64]) -> Result<RawSend> {
        let d = self.dim();
        let k_max = self.params.n_max;
        let a = self.annihilation();
        let gamma = self.params.gamma;
        let h = &sys.h_eff;
        let space = self.space();

        // [ψ | ρ₁ | … | ρ_K | P_{>K}]: counting hierarchy with ρ₀ = ψψ†
        let len = d + k_max * d * d + 1;
        let photons: Vec<f64> = (0..d).map(|i| space.decompose(i).1 as f64).collect();
        let mut y = vec![C64::new(0.0, 0.0); len];
        y[..d].copy_from_slice(psi0);
        let mut scratch = vec![C64::new(0.0, 0.0); d * d];
        let mut a_psi = vec![C64::new(0.0, 0.0); d];
        let mut rhs = |t: f64, y: &[C64], dy: &mut [C64]| {
            let (psi, rhos) = y.split_at(d);
            let (dpsi, drhos) = dy.split_at_mut(d);
            h.apply(t, psi, dpsi);
            for v in dpsi.iter_mut() {
                *v *= -I;
            }
            a_psi.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
            a.apply_add(C64::new(1.0, 0.0), psi, &mut a_psi);
            for k in 0..k_max {
                let rho = &rhos[k * d * d..(k + 1) * d * d];
                let out = &mut drhos[k * d * d..(k + 1) * d * d];
                liouvillian_no_jump(h, t, rho, d, out, &mut scratch);
                if k == 0 {
                    for i in 0..d {
                        for j in 0..d {
                            out[i * d + j] += a_psi[i] * a_psi[j].conj() * gamma;
                        }
                    }
                } else {
                    let prev = &rhos[(k - 1) * d * d..k * d * d];
                    sandwich_add(&a, prev, d, gamma, out);
                }
            }
            let last = &rhos[(k_max - 1) * d * d..k_max * d * d];
            drhos[k_max * d * d] = C64::new(gamma * (0..d).map(|i| photons[i] * last[i * d + i].re).sum::<f64>(), 0.0);
        };

        let mut rk = Rk4::new(len);
        let mut states = Vec::with_capacity(grid.len());
        states.push(y[..d].to_vec());
        let mut prev = norm_sq(&y[..d]);
        for i in 0..grid.n_steps() {
            rk.step(&mut rhs, grid.time(i), grid.dt(), &mut y);
            let n = norm_sq(&y[..d]);
            if n > prev + crate::open::NORM_INCREASE_LIMIT || !n.is_finite() {
                return Err(Error::NormIncrease(n - prev));
            }
            prev = n;
            states.push(y[..d].to_vec());
        }
        let mut branch_weights = vec![prev];
        for k in 0..k_max {
            let rho = &y[d + k * d * d..d + (k + 1) * d * d];
            branch_weights.push((0..d).map(|i| rho[i * d + i].re).sum());
        }
        let beyond = y[len - 1].re;

        let g0 = space.index(Level::G, 0);
        let chi = sys.evolve_bra_backward(grid, &space.basis(Level::G, 0))?;
        let sg = self.params.sqrt_gamma();
        let mut buf = vec![C64::new(0.0, 0.0); d];
        let one_photon = states
            .iter()
            .zip(&chi)
            .map(|(psi, chi)| {
                buf.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
                a.apply_add(C64::new(sg, 0.0), psi, &mut buf);
                inner(chi, &buf)
            })
            .collect();
        let last = states.last().expect("non-empty");
        let e0 = space.index(Level::E, 0);
        let g1 = space.index(Level::G, 1.min(space.n_max));
        Ok(RawSend {
            amp_vacuum: last[g0],
            amp_excited: last[e0],
            one_photon,
            branch_weights,
            beyond,
            beta_e: states.iter().map(|s| s[e0]).collect(),
            beta_c: states.iter().map(|s| s[g1]).collect(),
        })
    }

    /// Emission run from `init` under the (gated) control `omega`.
    pub fn send(&self, init: QubitAmplitudes, omega: &ComplexEnvelope, reference: Option<&SendReference>) -> Result<SendOutcome> {
        let grid = *omega.grid();
        if let Some(r) = reference {
            grid.ensure_same(r.packet.grid())?;
        }
        let gated = self.gate(omega);
        let sys = self.open_system(&gated);
        let main = self.raw_send(&sys, &grid, &self.initial_state(init))?;
        let path_g = if init.c_e == C64::new(0.0, 0.0) { None } else { Some(self.raw_send(&sys, &grid, &self.initial_state(QubitAmplitudes::ground()))?) };
        let path_e = if init.c_g == C64::new(0.0, 0.0) { None } else { Some(self.raw_send(&sys, &grid, &self.initial_state(QubitAmplitudes::excited()))?) };
        let g_run = path_g.as_ref().unwrap_or(&main);
        let e_run = path_e.as_ref().unwrap_or(&main);

        let one_photon = ComplexEnvelope::new(grid, main.one_photon.clone())?;
        let total: f64 = main.branch_weights.iter().sum::<f64>() + main.beyond;
        let p_loss = (1.0 - total).max(0.0);
        let p_error = total - main.amp_vacuum.norm_sqr() - main.amp_excited.norm_sqr() - one_photon.norm_sq();

        let phi_amp = if init.c_g.norm() > 0.0 { main.amp_vacuum / init.c_g } else { g_run.amp_vacuum };
        if phi_amp.norm() < 0.9 {
            return Err(Error::PhaseUndefined(phi_amp.norm()));
        }
        let phi_g = phi_amp.arg();

        let one_e = ComplexEnvelope::new(grid, e_run.one_photon.clone())?;
        let (mut pulse_fidelity, mut pulse_overlap, mut overall, mut average) = (None, None, None, None);
        if let Some(r) = reference {
            let ov = r.packet.envelope().inner(&one_e)?;
            let n1 = one_e.norm_sq();
            let s = r.theta.sin();
            if n1 > 0.0 && s > 0.0 {
                pulse_fidelity = Some(ov.norm() / n1.sqrt());
                pulse_overlap = Some(ov.norm() / s);
            }
            let a_g = g_run.amp_vacuum.norm();
            let a_e = (e_run.amp_excited * C64::from_polar(r.theta.cos(), -r.phi) + ov * s).norm();
            let f = |q: &QubitAmplitudes| q.c_g.norm_sqr() * a_g + q.c_e.norm_sqr() * a_e;
            overall = Some(f(&QubitAmplitudes::equal_superposition()));
            average = Some(QubitAmplitudes::cardinal_states().iter().map(f).sum::<f64>() / 6.0);
        }

        Ok(SendOutcome {
            amp_vacuum: main.amp_vacuum,
            amp_excited: main.amp_excited,
            one_photon,
            truncation_warning: main.beyond > TRUNCATION_WARNING,
            beyond_weight: main.beyond,
            branch_weights: main.branch_weights,
            p_error,
            p_loss,
            phi_g,
            pulse_fidelity,
            pulse_overlap,
            overall_fidelity: overall,
            average_fidelity: average,
            operation_window: operation_window(&gated),
            beta_e: ComplexEnvelope::new(grid, main.beta_e)?,
            beta_c: ComplexEnvelope::new(grid, main.beta_c)?,
        })
    }

    /// AC-Stark phase of the `|g⟩` pathway.
    pub fn phase_drift(&self, omega: &ComplexEnvelope) -> Result<PhaseDrift> {
        let grid = *omega.grid();
        let sys = self.open_system(&self.gate(omega));
        let g0 = self.space().index(Level::G, 0);
        let mut series = Vec::with_capacity(grid.len());
        let mut amp = C64::new(1.0, 0.0);
        let mut last = 0.0;
        sys.evolve_from(&grid, 0, &self.initial_state(QubitAmplitudes::ground()), |_, s| {
            amp = s[g0];
            let mut p = amp.arg();
            // keep the series continuous
            while p - last > std::f64::consts::PI {
                p -= 2.0 * std::f64::consts::PI;
            }
            while p - last < -std::f64::consts::PI {
                p += 2.0 * std::f64::consts::PI;
            }
            last = p;
            series.push(p);
        })?;
        if amp.norm() < 0.9 {
            return Err(Error::PhaseUndefined(amp.norm()));
        }
        Ok(PhaseDrift { phi_g: *series.last().expect("non-empty"), amplitude: amp.norm(), series })
    }

    /// Absorption of an incoming photon generated by a virtual source
    /// cavity cascaded into this node.
    pub fn receive(&self, incoming: &Wavepacket, omega: &ComplexEnvelope) -> Result<ReceiveOutcome> {
        let grid = *omega.grid();
        grid.ensure_same(incoming.grid())?;
        let source = VirtualSource::synthesize(incoming)?;
        let cascade = CascadeSystem::source_into_node(source.clone(), *self, omega.clone());
        let sys = cascade.open_system()?;
        let space = self.space();
        let d = self.dim();
        let src = source.initial_state();
        let node0 = space.basis(Level::G, 0);
        let mut psi0 = vec![C64::new(0.0, 0.0); 2 * d];
        for (s, amp) in src.iter().enumerate() {
            for i in 0..d {
                psi0[s * d + i] = amp * node0[i];
            }
        }
        let run = sys.evolve_no_jump(&grid, &psi0)?;
        let fin = run.final_state();
        let amp_g = fin[space.index(Level::G, 0)];
        let amp_e = fin[space.index(Level::E, 0)];
        let probs = sys.first_jump_probabilities(&run);
        let mut reflection = 0.0;
        let mut loss = 0.0;
        for (j, p) in sys.jumps.iter().zip(&probs) {
            match j.kind {
                JumpKind::Channel => reflection += p,
                _ => loss += p,
            }
        }
        let residual = norm_sq(fin) - amp_g.norm_sqr() - amp_e.norm_sqr();

        // pathway amplitudes for the spin/photon map
        let vac_path = if src[1] == C64::new(0.0, 0.0) { (amp_g, C64::new(0.0, 0.0)) } else { pathway(&sys, &grid, d, &space, false)? };
        let one_path = if src[0] == C64::new(0.0, 0.0) { (amp_g, amp_e) } else { pathway(&sys, &grid, d, &space, true)? };
        let a_g = vac_path.0.norm();
        let a_e = one_path.1.norm();
        let f = |q: &QubitAmplitudes| q.c_g.norm_sqr() * a_g + q.c_e.norm_sqr() * a_e;
        Ok(ReceiveOutcome {
            amp_g,
            amp_e,
            absorption: amp_e.norm_sqr(),
            reflection,
            loss,
            residual,
            phi_g: vac_path.0.arg(),
            absorption_fidelity: a_e,
            overall_fidelity: f(&QubitAmplitudes::equal_superposition()),
            average_fidelity: QubitAmplitudes::cardinal_states().iter().map(f).sum::<f64>() / 6.0,
            beta_e: ComplexEnvelope::new(grid, run.states.iter().map(|s| s[space.index(Level::E, 0)]).collect())?,
        })
    }
}

/// Final (⟨g,0|, ⟨e,0|) amplitudes with the source prepared in `|0⟩` or `|1⟩`.
fn pathway(sys: &OpenSystem, grid: &TimeGrid, d: usize, space: &NodeSpace, photon: bool) -> Result<(C64, C64)> {
    let mut psi0 = vec![C64::new(0.0, 0.0); 2 * d];
    psi0[if photon { d } else { 0 } + space.index(Level::G, 0)] = C64::new(1.0, 0.0);
    let run = sys.evolve_no_jump(grid, &psi0)?;
    let fin = run.final_state();
    Ok((fin[space.index(Level::G, 0)], fin[space.index(Level::E, 0)]))
}

pub fn operation_window(omega: &ComplexEnvelope) -> (f64, f64) {
    let peak = omega.max_abs();
    let g = omega.grid();
    if peak == 0.0 {
        return (g.t_start(), g.t_start());
    }
    let v = omega.values();
    let first = v.iter().position(|x| x.norm() >= WINDOW_THRESHOLD * peak).unwrap_or(0);
    let last = v.iter().rposition(|x| x.norm() >= WINDOW_THRESHOLD * peak).unwrap_or(0);
    (g.time(first), g.time(last))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseDrift {
    pub phi_g: f64,
    /// |⟨g,0|ψ(t₁)⟩|.
    pub amplitude: f64,
    /// Continuous arg⟨g,0|ψ(t)⟩ at every sample.
    pub series: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReceiveOutcome {
    /// Final ⟨g,0|ψ⟩ and ⟨e,0|ψ⟩ with the source empty.
    pub amp_g: C64,
    pub amp_e: C64,
    pub absorption: f64,
    /// Probability that the photon leaves through the channel.
    pub reflection: f64,
    /// Probability of intrinsic loss or spontaneous emission.
    pub loss: f64,
    /// Weight left in other basis states at t₁.
    pub residual: f64,
    pub phi_g: f64,
    /// |⟨e,0|ψ(t₁)⟩| for a one-photon input.
    pub absorption_fidelity: f64,
    pub overall_fidelity: f64,
    pub average_fidelity: f64,
    pub beta_e: ComplexEnvelope,
}

/// Emission run with default node options.
pub fn send_full(init: QubitAmplitudes, omega: &ComplexEnvelope, params: &SystemParams, reference: Option<&SendReference>) -> Result<SendOutcome> {
    NodeModel::new(*params).send(init, omega, reference)
}

pub fn receive_full(incoming: &Wavepacket, omega: &ComplexEnvelope, params: &SystemParams) -> Result<ReceiveOutcome> {
    NodeModel::new(*params).receive(incoming, omega)
}

pub fn extract_phase_drift(params: &SystemParams, omega: &ComplexEnvelope) -> Result<f64> {
    Ok(NodeModel::new(*params).phase_drift(omega)?.phi_g)
}

/// No-jump evolution of a single node from `psi0`.
pub fn evolve_no_jump(psi0: &[C64], omega: &ComplexEnvelope, params: &SystemParams) -> Result<crate::open::NoJumpRun> {
    let model = NodeModel::new(*params);
    model.open_system(&model.gate(omega)).evolve_no_jump(omega.grid(), psi0)
}
