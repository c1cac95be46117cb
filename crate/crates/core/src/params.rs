use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{energy_to_rate, micro_ev_to_rate};
use crate::C64;

/// Physical parameters of one interface node. All rates are angular
/// frequencies in ps⁻¹ (see [`crate::units`]).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Dot–cavity coupling.
    pub g_cav: C64,
    /// Cavity damping into the channel.
    pub gamma: f64,
    /// Intrinsic cavity loss.
    pub gamma0: f64,
    /// Trion spontaneous-emission rate.
    pub gamma_trion: f64,
    /// Ground-state Zeeman splitting ω_e − ω_g.
    pub delta_zeeman: f64,
    /// Cavity Fock cutoff.
    pub n_max: usize,
    /// Absolute cavity frequency (ps⁻¹), only used to check that the
    /// channel is Markovian.
    pub omega_c_abs: Option<f64>,
}

impl Default for SystemParams {
    /// γ = 0.2 meV, g = 0.1 meV, γ₀ = 0.1 μeV, Γ = 3 μeV, Δ = 1 meV, n_max = 3.
    fn default() -> Self {
        Self {
            g_cav: C64::new(energy_to_rate(0.1), 0.0),
            gamma: energy_to_rate(0.2),
            gamma0: micro_ev_to_rate(0.1),
            gamma_trion: micro_ev_to_rate(3.0),
            delta_zeeman: energy_to_rate(1.0),
            n_max: 3,
            omega_c_abs: None,
        }
    }
}

impl SystemParams {
    /// Builds parameters from energies in meV.
    pub fn from_mev(g_cav: f64, gamma: f64, gamma0: f64, gamma_trion: f64, delta_zeeman: f64, n_max: usize) -> Result<Self> {
        Self {
            g_cav: C64::new(energy_to_rate(g_cav), 0.0),
            gamma: energy_to_rate(gamma),
            gamma0: energy_to_rate(gamma0),
            gamma_trion: energy_to_rate(gamma_trion),
            delta_zeeman: energy_to_rate(delta_zeeman),
            n_max,
            omega_c_abs: None,
        }
        .validated()
    }

    pub fn validated(self) -> Result<Self> {
        let finite = [self.gamma, self.gamma0, self.gamma_trion, self.delta_zeeman, self.g_cav.re, self.g_cav.im]
            .iter()
            .all(|x| x.is_finite());
        if !finite {
            return Err(Error::InvalidParams("non-finite parameter".into()));
        }
        if !(self.gamma > 0.0) {
            return Err(Error::InvalidParams(format!("gamma = {} must be > 0", self.gamma)));
        }
        if self.gamma0 < 0.0 || self.gamma_trion < 0.0 {
            return Err(Error::InvalidParams("loss rates must be non-negative".into()));
        }
        if self.n_max < 1 {
            return Err(Error::InvalidParams("n_max must be >= 1".into()));
        }
        if !(self.g_cav.norm() > 0.0) {
            return Err(Error::InvalidParams("|g_cav| must be > 0".into()));
        }
        if let Some(wc) = self.omega_c_abs {
            if !(wc > 0.0) || self.gamma / wc >= 1e-3 {
                return Err(Error::InvalidParams(format!(
                    "gamma/omega_c = {:.3e} is not << 1; the Markovian channel model does not apply",
                    self.gamma / wc
                )));
            }
        }
        Ok(self)
    }

    /// Channel coupling κ with the real-positive phase convention, so that
    /// √(2π)·κ = √γ.
    pub fn kappa(&self) -> f64 {
        (self.gamma / (2.0 * std::f64::consts::PI)).sqrt()
    }

    pub fn sqrt_gamma(&self) -> f64 {
        self.gamma.sqrt()
    }

    /// Copy with every loss channel switched off.
    pub fn lossless(&self) -> Self {
        Self { gamma0: 0.0, gamma_trion: 0.0, ..*self }
    }

    /// Default time step for fixed-step integration of this node.
    pub fn default_dt(&self) -> f64 {
        let mut dt = (0.02 / self.gamma).min(0.02 / self.g_cav.norm());
        if self.delta_zeeman.abs() > 0.0 {
            dt = dt.min(0.1 / self.delta_zeeman.abs());
        }
        dt
    }
}
