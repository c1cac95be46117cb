//! Virtual source cavity that emits a prescribed single-photon wavepacket.
//!
//! A two-level mode `{|0⟩, |1⟩}` with time-dependent coupling
//! `κ_s(t) = u(t) / √(∫_t^∞ |u|²)` radiates exactly `u(t)` into the channel.

use crate::envelope::{ComplexEnvelope, Wavepacket};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::ode::Rk4;
use crate::operator::{Modulation, SparseMatrix, TimeDependentOperator};
use crate::C64;

/// Below this remaining weight the coupling is switched off.
pub const TAIL_CUTOFF: f64 = 1e-14;

/// Required overlap `1 − Re⟨u|out⟩` between the synthesised and requested
/// packet.
pub const SYNTHESIS_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct VirtualSource {
    packet: Wavepacket,
    coupling: ComplexEnvelope,
}

impl VirtualSource {
    /// Builds the coupling for `packet` and checks it by simulating the
    /// source alone.
    pub fn synthesize(packet: &Wavepacket) -> Result<Self> {
        let u = packet.envelope();
        let grid = *u.grid();
        let dt = grid.dt();
        let v = u.values();
        let n = v.len();
        // ∫_{t_i}^{t_end} |u|² by reverse trapezoid
        let mut tail = vec![0.0; n];
        for i in (0..n - 1).rev() {
            tail[i] = tail[i + 1] + 0.5 * dt * (v[i].norm_sqr() + v[i + 1].norm_sqr());
        }
        let kappa = v
            .iter()
            .zip(&tail)
            .map(|(u, &r)| if r < TAIL_CUTOFF { C64::new(0.0, 0.0) } else { u / r.sqrt() })
            .collect();
        let source = Self { packet: packet.clone(), coupling: ComplexEnvelope::new(grid, kappa)? };
        // ‖out − u‖² = 2(1 − Re⟨u|out⟩) for a faithful source
        let out = source.emitted_field();
        let miss = out.add(&u.scaled(C64::new(-1.0, 0.0)))?.norm_sq();
        if !(miss <= 2.0 * SYNTHESIS_TOLERANCE) {
            return Err(Error::SourceSynthesis(format!("emitted packet misses the target by {miss:.3e}")));
        }
        Ok(source)
    }

    pub fn packet(&self) -> &Wavepacket {
        &self.packet
    }

    pub fn grid(&self) -> &TimeGrid {
        self.coupling.grid()
    }

    /// κ_s(t) in ps^(-1/2).
    pub fn coupling(&self) -> &ComplexEnvelope {
        &self.coupling
    }

    /// `√(1−n̄)|0⟩ + √n̄|1⟩`.
    pub fn initial_state(&self) -> [C64; 2] {
        let n = self.packet.mean_photon_number();
        [C64::new((1.0 - n).sqrt(), 0.0), C64::new(n.sqrt(), 0.0)]
    }

    /// Channel operator `κ_s(t) |0⟩⟨1|`.
    pub fn channel_operator(&self) -> TimeDependentOperator {
        let mut op = TimeDependentOperator::new(2);
        let idx = op.add_envelope(self.coupling.clone());
        let mut m = SparseMatrix::new(2);
        m.push(0, 1, C64::new(1.0, 0.0));
        op.add_term(C64::new(1.0, 0.0), Modulation::Envelope { index: idx, conjugate: false }, 0.0, m);
        op
    }

    /// Field radiated by a source that starts in `|1⟩`, integrated with the
    /// same RK4 scheme the cascade uses.
    pub fn emitted_field(&self) -> ComplexEnvelope {
        let grid = *self.grid();
        let k = &self.coupling;
        let mut rhs = |t: f64, y: &[C64], dy: &mut [C64]| dy[0] = -y[0] * (0.5 * k.sample(t).norm_sqr());
        let mut y = [C64::new(1.0, 0.0)];
        let mut rk = Rk4::new(1);
        let mut out = Vec::with_capacity(grid.len());
        for i in 0..grid.len() {
            out.push(k.values()[i] * y[0]);
            if i + 1 < grid.len() {
                rk.step(&mut rhs, grid.time(i), grid.dt(), &mut y);
            }
        }
        ComplexEnvelope::new(grid, out).expect("finite field")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sech_packet_is_reproduced() {
        let grid = TimeGrid::with_max_step(-200.0, 200.0, 0.066).unwrap();
        let packet = Wavepacket::sech(grid, 13.0, 5.0).unwrap();
        let src = VirtualSource::synthesize(&packet).unwrap();
        let out = src.emitted_field();
        assert!((out.norm_sq() - 1.0).abs() < 1e-5);
        for (a, b) in out.values().iter().zip(packet.envelope().values()) {
            assert!((a - b).norm() < 1e-4);
        }
    }

    #[test]
    fn chirped_packet_keeps_phase() {
        let grid = TimeGrid::with_max_step(-100.0, 100.0, 0.05).unwrap();
        let env = ComplexEnvelope::from_fn(grid, |t| C64::from_polar((-(t / 15.0).powi(2)).exp(), 0.002 * t * t));
        let packet = Wavepacket::from_unnormalized(env).unwrap().with_photon_number(0.4).unwrap();
        let src = VirtualSource::synthesize(&packet).unwrap();
        assert!((packet.envelope().inner(&src.emitted_field()).unwrap() - 1.0).norm() < 1e-5);
        let s = src.initial_state();
        assert!((s[1].norm_sqr() - 0.4).abs() < 1e-15);
    }

    #[test]
    fn unresolved_packet_is_rejected() {
        let grid = TimeGrid::new(-50.0, 50.0, 200).unwrap();
        let packet = Wavepacket::gaussian(grid, 0.1, 0.0).unwrap();
        assert!(matches!(VirtualSource::synthesize(&packet), Err(Error::SourceSynthesis(_))));
    }
}
