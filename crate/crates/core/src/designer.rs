//! Closed-form inversion of a target outgoing wavepacket into the laser
//! Rabi-frequency envelope Ω(t).
//!
//! With α_in = 0 the cavity amplitude is fixed by the target,
//! `β_c = α̃ sinθ / √γ`, and the reduced equations can be solved backwards:
//!
//! ```text
//! w      = β̇_c + γ β_c / 2            (so β_t = −w / g)
//! |β_e|² = 1 − sin²θ ∫|α̃|² − |β_c|² − |w|²/|g|²
//! Ω      = −2 (g* β_c + ẇ / g) / β_e
//! ```
//!
//! The phase of β_e follows from the imaginary part of `β_e* β̇_e`:
//! `d arg β_e/dt = [Im(w* ẇ)/|g|² − Im(β_c* β̇_c)] / |β_e|²`. Written this way
//! it needs no phase unwrapping of any intermediate quantity.

use serde::{Deserialize, Serialize};

use crate::envelope::{raised_cosine, ComplexEnvelope, PulseShape, Wavepacket};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::params::SystemParams;
use crate::C64;

/// Allowance for round-off when comparing the population bound with the
/// feasibility floor.
const ROUND_OFF: f64 = 1e-9;

/// Bound on `max|β̈_c|·dt²` for finite-differenced targets.
pub const DERIVATIVE_NOISE_LIMIT: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ShapeKind {
    /// Exact derivatives are available.
    Analytic { shape: PulseShape },
    /// Derivatives by central finite differences.
    Sampled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignTarget {
    shape: Wavepacket,
    theta: f64,
    kind: ShapeKind,
    /// Grid renormalisation applied to analytic samples.
    scale: f64,
}

impl DesignTarget {
    pub fn analytic(shape: PulseShape, grid: TimeGrid, theta: f64) -> Result<Self> {
        check_theta(theta)?;
        let raw = shape.sample(grid);
        let scale = 1.0 / raw.norm_sq().sqrt();
        let packet = Wavepacket::new(raw.scaled(C64::new(scale, 0.0)), theta.sin().powi(2))?;
        Ok(Self { shape: packet, theta, kind: ShapeKind::Analytic { shape }, scale })
    }

    /// Sech target `√(γ/2k) sech(γ(t − center)/k)`.
    pub fn sech(grid: TimeGrid, gamma: f64, k: f64, center: f64, theta: f64) -> Result<Self> {
        Self::analytic(PulseShape::sech_for_rate(gamma, k, center), grid, theta)
    }

    pub fn sampled(packet: &Wavepacket, theta: f64) -> Result<Self> {
        check_theta(theta)?;
        let shape = packet.with_photon_number(theta.sin().powi(2))?;
        Ok(Self { shape, theta, kind: ShapeKind::Sampled, scale: 1.0 })
    }

    pub fn shape(&self) -> &Wavepacket {
        &self.shape
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn kind(&self) -> ShapeKind {
        self.kind
    }

    pub fn grid(&self) -> &TimeGrid {
        self.shape.grid()
    }

    pub fn with_theta(&self, theta: f64) -> Result<Self> {
        check_theta(theta)?;
        Ok(Self { shape: self.shape.with_photon_number(theta.sin().powi(2))?, theta, ..self.clone() })
    }

    /// α̃ and its first two derivatives at every sample.
    fn derivatives(&self) -> Result<[Vec<C64>; 3]> {
        let grid = *self.grid();
        match self.kind {
            ShapeKind::Analytic { shape } => {
                let mut d = [Vec::new(), Vec::new(), Vec::new()];
                for t in grid.times() {
                    let (v, v1, v2) = shape.eval(t);
                    d[0].push(C64::new(v * self.scale, 0.0));
                    d[1].push(C64::new(v1 * self.scale, 0.0));
                    d[2].push(C64::new(v2 * self.scale, 0.0));
                }
                Ok(d)
            }
            ShapeKind::Sampled => {
                let f = self.shape.envelope().values().to_vec();
                let (d1, d2) = finite_differences(&f, grid.dt());
                Ok([f, d1, d2])
            }
        }
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if !(0.0..=std::f64::consts::FRAC_PI_2 + 1e-12).contains(&theta) {
        return Err(Error::InvalidParams(format!("theta = {theta} outside [0, pi/2]")));
    }
    Ok(())
}

/// Second-order central differences, one-sided second-order at the ends.
fn finite_differences(f: &[C64], dt: f64) -> (Vec<C64>, Vec<C64>) {
    let n = f.len();
    let mut d1 = vec![C64::new(0.0, 0.0); n];
    let mut d2 = vec![C64::new(0.0, 0.0); n];
    for i in 1..n - 1 {
        d1[i] = (f[i + 1] - f[i - 1]) / (2.0 * dt);
        d2[i] = (f[i + 1] - f[i] * 2.0 + f[i - 1]) / (dt * dt);
    }
    d1[0] = (f[0] * -3.0 + f[1] * 4.0 - f[2]) / (2.0 * dt);
    d1[n - 1] = (f[n - 1] * 3.0 - f[n - 2] * 4.0 + f[n - 3]) / (2.0 * dt);
    if n >= 4 {
        d2[0] = (f[0] * 2.0 - f[1] * 5.0 + f[2] * 4.0 - f[3]) / (dt * dt);
        d2[n - 1] = (f[n - 1] * 2.0 - f[n - 2] * 5.0 + f[n - 3] * 4.0 - f[n - 4]) / (dt * dt);
    }
    (d1, d2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignOptions {
    /// Smallest acceptable value of the population bound.
    pub floor: f64,
    /// Ω is switched off once |β_e|² drops below this.
    pub eps_clip: f64,
    /// Duration of the raised-cosine switch-off (ps). It has to be long
    /// against 1/Δ or the sudden turn-off leaves off-resonant excitation
    /// behind.
    pub ramp_time: f64,
}

impl Default for DesignOptions {
    fn default() -> Self {
        Self { floor: 0.0, eps_clip: 1e-5, ramp_time: 10.0 }
    }
}

/// Population bound P_e(t) on the target grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityProfile {
    pub p_e: Vec<f64>,
    pub margin: f64,
    pub t_min: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClipInfo {
    pub index: usize,
    pub time: f64,
    /// |β_e|² where the switch-off starts.
    pub population: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignResult {
    pub omega: ComplexEnvelope,
    pub beta_c: ComplexEnvelope,
    pub beta_t: ComplexEnvelope,
    pub beta_e: ComplexEnvelope,
    /// arg β_e at the end of the pulse.
    pub predicted_phase_phi: f64,
    pub feasibility_margin: f64,
    pub clip: Option<ClipInfo>,
    pub theta: f64,
}

impl DesignResult {
    pub fn grid(&self) -> &TimeGrid {
        self.omega.grid()
    }

    /// Peak |Ω|.
    pub fn peak_rabi(&self) -> f64 {
        self.omega.max_abs()
    }

    /// Interval in which |Ω| exceeds `fraction` of its peak.
    pub fn active_window(&self, fraction: f64) -> (f64, f64) {
        let thr = fraction * self.peak_rabi();
        let g = self.grid();
        let v = self.omega.values();
        let first = v.iter().position(|x| x.norm() >= thr).unwrap_or(0);
        let last = v.iter().rposition(|x| x.norm() >= thr).unwrap_or(v.len() - 1);
        (g.time(first), g.time(last))
    }
}

struct Intermediates {
    beta_c: Vec<C64>,
    beta_c_dot: Vec<C64>,
    w: Vec<C64>,
    w_dot: Vec<C64>,
}

fn intermediates(target: &DesignTarget, params: &SystemParams) -> Result<Intermediates> {
    let [f, f1, f2] = target.derivatives()?;
    let s = target.theta.sin() / params.sqrt_gamma();
    let half = 0.5 * params.gamma;
    let beta_c: Vec<C64> = f.iter().map(|v| v * s).collect();
    let beta_c_dot: Vec<C64> = f1.iter().map(|v| v * s).collect();
    let beta_c_ddot: Vec<C64> = f2.iter().map(|v| v * s).collect();
    if matches!(target.kind, ShapeKind::Sampled) {
        let dt = target.grid().dt();
        let noise = beta_c_ddot.iter().map(|v| v.norm()).fold(0.0, f64::max) * dt * dt;
        if noise >= DERIVATIVE_NOISE_LIMIT {
            return Err(Error::DerivativeNoise(noise));
        }
    }
    let w = beta_c.iter().zip(&beta_c_dot).map(|(b, d)| d + b * half).collect();
    let w_dot = beta_c_dot.iter().zip(&beta_c_ddot).map(|(d, dd)| dd + d * half).collect();
    Ok(Intermediates { beta_c, beta_c_dot, w, w_dot })
}

/// β_c(t) = α̃(t) sinθ / √γ.
pub fn cavity_amplitude_from_target(target: &DesignTarget, params: &SystemParams) -> ComplexEnvelope {
    let s = target.theta.sin() / params.sqrt_gamma();
    target.shape.envelope().scaled(C64::new(s, 0.0))
}

fn profile_from(target: &DesignTarget, params: &SystemParams, im: &Intermediates, floor: f64) -> Result<FeasibilityProfile> {
    let grid = target.grid();
    let sin2 = target.theta.sin().powi(2);
    let cum = target.shape.envelope().cumulative_norm_sq();
    let g2 = params.g_cav.norm_sqr();
    let p_e: Vec<f64> = (0..grid.len())
        .map(|i| 1.0 - sin2 * cum[i] - im.beta_c[i].norm_sqr() - im.w[i].norm_sqr() / g2)
        .collect();
    let (imin, margin) = p_e
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });
    let t_min = grid.time(imin);
    if margin < floor - ROUND_OFF {
        return Err(Error::Infeasible { t_violation: t_min, margin });
    }
    Ok(FeasibilityProfile { p_e, margin, t_min })
}

/// Population bound for the default floor.
pub fn feasibility_profile(target: &DesignTarget, params: &SystemParams) -> Result<FeasibilityProfile> {
    feasibility_profile_with(target, params, &DesignOptions::default())
}

pub fn feasibility_profile_with(target: &DesignTarget, params: &SystemParams, opts: &DesignOptions) -> Result<FeasibilityProfile> {
    let im = intermediates(target, params)?;
    profile_from(target, params, &im, opts.floor)
}

/// First sample at which |β_e|² < eps (only after the population has
/// started to fall, never at t₀).
fn clip_index(p_e: &[f64], eps: f64) -> Option<usize> {
    p_e.iter().position(|&p| p < eps).filter(|&i| i > 0)
}

fn phase_profile(params: &SystemParams, im: &Intermediates, p_e: &[f64], dt: f64, stop: usize) -> Vec<f64> {
    let g2 = params.g_cav.norm_sqr();
    let rate = |i: usize| {
        let num = (im.w[i].conj() * im.w_dot[i]).im / g2 - (im.beta_c[i].conj() * im.beta_c_dot[i]).im;
        if num == 0.0 {
            0.0
        } else {
            num / p_e[i]
        }
    };
    let mut phase = vec![0.0; p_e.len()];
    let mut prev = rate(0);
    for i in 1..p_e.len() {
        if i >= stop {
            phase[i] = phase[i - 1];
            continue;
        }
        let r = rate(i);
        phase[i] = phase[i - 1] + 0.5 * dt * (prev + r);
        prev = r;
    }
    phase
}

/// Complex β_e(t) for a feasible target.
pub fn solve_beta_e(target: &DesignTarget, params: &SystemParams) -> Result<ComplexEnvelope> {
    Ok(design_send_pulse(target, params)?.beta_e)
}

pub fn design_send_pulse(target: &DesignTarget, params: &SystemParams) -> Result<DesignResult> {
    design_send_pulse_with(target, params, &DesignOptions::default())
}

pub fn design_send_pulse_with(target: &DesignTarget, params: &SystemParams, opts: &DesignOptions) -> Result<DesignResult> {
    let grid = *target.grid();
    let im = intermediates(target, params)?;
    let profile = profile_from(target, params, &im, opts.floor)?;
    let p_e = &profile.p_e;
    let n = grid.len();
    let clip = clip_index(p_e, opts.eps_clip);
    let stop = clip.unwrap_or(n);
    let phase = phase_profile(params, &im, p_e, grid.dt(), stop);
    let g = params.g_cav;

    let beta_e: Vec<C64> = (0..n).map(|i| C64::from_polar(p_e[i].max(0.0).sqrt(), phase[i])).collect();
    let mut omega = vec![C64::new(0.0, 0.0); n];
    for i in 0..stop {
        omega[i] = (g.conj() * im.beta_c[i] + im.w_dot[i] / g) * -2.0 / beta_e[i];
    }
    if let Some(ic) = clip {
        let last = if ic > 0 { omega[ic - 1] } else { C64::new(0.0, 0.0) };
        let ramp = ((opts.ramp_time / grid.dt()).ceil() as usize).max(1);
        for k in 0..ramp.min(n - ic) {
            omega[ic + k] = last * raised_cosine(1.0 - (k + 1) as f64 / ramp as f64);
        }
    }
    let beta_t: Vec<C64> = im.w.iter().map(|w| -w / g).collect();
    Ok(DesignResult {
        omega: ComplexEnvelope::new(grid, omega)?,
        beta_c: ComplexEnvelope::new(grid, im.beta_c)?,
        beta_t: ComplexEnvelope::new(grid, beta_t)?,
        predicted_phase_phi: phase[n - 1],
        beta_e: ComplexEnvelope::new(grid, beta_e)?,
        feasibility_margin: profile.margin,
        clip: clip.map(|i| ClipInfo { index: i, time: grid.time(i), population: p_e[i] }),
        theta: target.theta,
    })
}

/// Receiving pulse by time reversal of a send design.
///
/// The send target is `t ↦ −conj(u(T − t))` for the incoming envelope `u`;
/// with that sign the reversed send trajectory `conj(x(T − t))` solves the
/// driven equations exactly and reflects nothing. The returned amplitudes
/// are those of the receiving run, which ends with arg β_e = 0.
pub fn design_receive_pulse(incoming: &Wavepacket, params: &SystemParams) -> Result<DesignResult> {
    design_receive_pulse_with(incoming, params, &DesignOptions::default())
}

pub fn design_receive_pulse_with(incoming: &Wavepacket, params: &SystemParams, opts: &DesignOptions) -> Result<DesignResult> {
    let reversed = incoming.envelope().conj_reversed().scaled(C64::new(-1.0, 0.0));
    let target = DesignTarget::sampled(&Wavepacket::new(reversed, 1.0)?, std::f64::consts::FRAC_PI_2)?;
    let send = design_send_pulse_with(&target, params, opts)?;
    let mirror = |e: &ComplexEnvelope| e.conj_reversed();
    Ok(DesignResult {
        omega: mirror(&send.omega),
        beta_c: mirror(&send.beta_c),
        beta_t: mirror(&send.beta_t).scaled(C64::new(-1.0, 0.0)),
        beta_e: mirror(&send.beta_e),
        predicted_phase_phi: 0.0,
        feasibility_margin: send.feasibility_margin,
        clip: send.clip.map(|c| ClipInfo {
            index: send.omega.grid().n_steps() - c.index,
            time: send.omega.grid().reflection_point() - c.time,
            population: c.population,
        }),
        theta: std::f64::consts::FRAC_PI_2,
    })
}
