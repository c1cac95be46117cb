//! Sampled complex envelopes and single-photon wavepackets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::C64;

/// Complex function of time sampled on a [`TimeGrid`].
///
/// Field amplitudes carry units of ps^(-1/2); Rabi frequencies ps⁻¹.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexEnvelope {
    grid: TimeGrid,
    values: Vec<C64>,
}

impl ComplexEnvelope {
    pub fn new(grid: TimeGrid, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch { expected: grid.len(), got: values.len() });
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::InvalidParams("envelope contains non-finite samples".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: TimeGrid) -> Self {
        Self { grid, values: vec![C64::new(0.0, 0.0); grid.len()] }
    }

    pub fn from_fn(grid: TimeGrid, f: impl Fn(f64) -> C64) -> Self {
        let values = grid.times().map(f).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    /// Linear interpolation; zero outside the grid.
    pub fn sample(&self, t: f64) -> C64 {
        let x = self.grid.position(t);
        let n = self.grid.n_steps();
        if !(x >= 0.0) || x > n as f64 {
            return C64::new(0.0, 0.0);
        }
        let i = (x.floor() as usize).min(n - 1);
        let frac = x - i as f64;
        if frac == 0.0 {
            return self.values[i];
        }
        self.values[i] * (1.0 - frac) + self.values[i + 1] * frac
    }

    /// ∫|f|² dt (trapezoidal).
    pub fn norm_sq(&self) -> f64 {
        trapezoid_real(self.grid.dt(), self.values.iter().map(|v| v.norm_sqr()))
    }

    /// Running ∫_{t_start}^{t} |f|² dτ at every sample (trapezoidal).
    pub fn cumulative_norm_sq(&self) -> Vec<f64> {
        cumulative_trapezoid(self.grid.dt(), &self.values.iter().map(|v| v.norm_sqr()).collect::<Vec<_>>())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|v| v * factor).collect() }
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn conj(&self) -> Self {
        self.map(|v| v.conj())
    }

    /// `t ↦ conj(f(T − t))` with `T = t_start + t_end`.
    pub fn conj_reversed(&self) -> Self {
        Self { grid: self.grid, values: self.values.iter().rev().map(|v| v.conj()).collect() }
    }

    pub fn add(&self, other: &ComplexEnvelope) -> Result<Self> {
        self.grid.ensure_same(&other.grid)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(Self { grid: self.grid, values })
    }

    /// Multiplies both ends by a raised-cosine ramp spanning `steps` samples.
    pub fn with_edge_gate(&self, steps: usize) -> Self {
        let n = self.values.len();
        let mut values = self.values.clone();
        let steps = steps.min(n / 2);
        for k in 0..steps {
            let w = raised_cosine(k as f64 / steps as f64);
            values[k] *= w;
            values[n - 1 - k] *= w;
        }
        Self { grid: self.grid, values }
    }

    /// Resamples onto another grid by linear interpolation.
    pub fn resampled(&self, grid: TimeGrid) -> Self {
        Self::from_fn(grid, |t| self.sample(t))
    }

    /// ∫ conj(self) other dt (trapezoidal).
    pub fn inner(&self, other: &ComplexEnvelope) -> Result<C64> {
        self.grid.ensure_same(&other.grid)?;
        let dt = self.grid.dt();
        let n = self.values.len();
        let mut acc = C64::new(0.0, 0.0);
        for (i, (a, b)) in self.values.iter().zip(&other.values).enumerate() {
            let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
            acc += a.conj() * b * w;
        }
        Ok(acc * dt)
    }
}

/// `0 → 0`, `1 → 1`, smooth raised-cosine in between.
pub fn raised_cosine(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    0.5 * (1.0 - (std::f64::consts::PI * x).cos())
}

pub(crate) fn trapezoid_real(dt: f64, samples: impl ExactSizeIterator<Item = f64>) -> f64 {
    let n = samples.len();
    let mut acc = 0.0;
    for (i, v) in samples.enumerate() {
        acc += if i == 0 || i + 1 == n { 0.5 * v } else { v };
    }
    acc * dt
}

pub(crate) fn cumulative_trapezoid(dt: f64, samples: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(samples.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in samples.windows(2) {
        acc += 0.5 * dt * (w[0] + w[1]);
        out.push(acc);
    }
    out
}

/// Built-in analytic pulse shapes, normalised so that ∫|f|² dt = 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PulseShape {
    /// `sech((t − center)/width) / √(2·width)`.
    Sech { width: f64, center: f64 },
    /// Amplitude Gaussian whose intensity has standard deviation `sigma`.
    Gaussian { sigma: f64, center: f64 },
}

impl PulseShape {
    /// The sech packet `√(γ/(2k)) sech(γt/k)` has width `k/γ`.
    pub fn sech_for_rate(gamma: f64, k: f64, center: f64) -> Self {
        PulseShape::Sech { width: k / gamma, center }
    }

    pub fn center(&self) -> f64 {
        match *self {
            PulseShape::Sech { center, .. } | PulseShape::Gaussian { center, .. } => center,
        }
    }

    pub fn with_center(&self, c: f64) -> Self {
        match *self {
            PulseShape::Sech { width, .. } => PulseShape::Sech { width, center: c },
            PulseShape::Gaussian { sigma, .. } => PulseShape::Gaussian { sigma, center: c },
        }
    }

    /// Value, first and second derivative at `t`.
    pub fn eval(&self, t: f64) -> (f64, f64, f64) {
        match *self {
            PulseShape::Sech { width, center } => {
                let a = 1.0 / (2.0 * width).sqrt();
                let x = (t - center) / width;
                let s = sech(x);
                let th = x.tanh();
                (a * s, -a / width * s * th, a / (width * width) * s * (1.0 - 2.0 * s * s))
            }
            PulseShape::Gaussian { sigma, center } => {
                let a = 1.0 / (sigma * (2.0 * std::f64::consts::PI).sqrt()).sqrt();
                let x = t - center;
                let v = a * (-x * x / (4.0 * sigma * sigma)).exp();
                let s2 = sigma * sigma;
                (v, -x / (2.0 * s2) * v, (x * x / (4.0 * s2 * s2) - 1.0 / (2.0 * s2)) * v)
            }
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        self.eval(t).0
    }

    pub fn sample(&self, grid: TimeGrid) -> ComplexEnvelope {
        ComplexEnvelope::from_fn(grid, |t| C64::new(self.value(t), 0.0))
    }

    /// Characteristic duration (width for sech, sigma for Gaussian).
    pub fn duration(&self) -> f64 {
        match *self {
            PulseShape::Sech { width, .. } => width,
            PulseShape::Gaussian { sigma, .. } => sigma,
        }
    }
}

fn sech(x: f64) -> f64 {
    // avoids overflow of cosh for large |x|
    let e = (-x.abs()).exp();
    2.0 * e / (1.0 + e * e)
}

/// Normalised single-photon wavepacket with its mean photon number.
#[derive(Debug, Clone, PartialEq)]
pub struct Wavepacket {
    envelope: ComplexEnvelope,
    mean_photon_number: f64,
}

impl Wavepacket {
    /// Tolerance on ∫|envelope|² = 1.
    pub const NORM_TOLERANCE: f64 = 1e-6;

    /// Wraps an already normalised envelope.
    pub fn new(envelope: ComplexEnvelope, mean_photon_number: f64) -> Result<Self> {
        let n = envelope.norm_sq();
        if (n - 1.0).abs() > Self::NORM_TOLERANCE {
            return Err(Error::InvalidParams(format!("wavepacket norm {n} is not 1")));
        }
        if !(0.0..=1.0 + 1e-9).contains(&mean_photon_number) {
            return Err(Error::InvalidParams(format!(
                "mean photon number {mean_photon_number} outside [0, 1]"
            )));
        }
        Ok(Self { envelope, mean_photon_number: mean_photon_number.min(1.0) })
    }

    /// Normalises an arbitrary envelope; its norm² becomes the photon number.
    pub fn from_unnormalized(envelope: ComplexEnvelope) -> Result<Self> {
        let n = envelope.norm_sq();
        if !(n > 0.0) {
            return Err(Error::InvalidParams("envelope has zero norm".into()));
        }
        let normalized = envelope.scaled(C64::new(1.0 / n.sqrt(), 0.0));
        Ok(Self { envelope: normalized, mean_photon_number: n.min(1.0) })
    }

    /// Samples an analytic shape and renormalises on the grid.
    pub fn from_shape(shape: PulseShape, grid: TimeGrid, mean_photon_number: f64) -> Result<Self> {
        let env = shape.sample(grid);
        let n = env.norm_sq();
        let env = env.scaled(C64::new(1.0 / n.sqrt(), 0.0));
        Self::new(env, mean_photon_number)
    }

    pub fn sech(grid: TimeGrid, width: f64, center: f64) -> Result<Self> {
        Self::from_shape(PulseShape::Sech { width, center }, grid, 1.0)
    }

    pub fn gaussian(grid: TimeGrid, sigma: f64, center: f64) -> Result<Self> {
        Self::from_shape(PulseShape::Gaussian { sigma, center }, grid, 1.0)
    }

    pub fn envelope(&self) -> &ComplexEnvelope {
        &self.envelope
    }

    pub fn grid(&self) -> &TimeGrid {
        self.envelope.grid()
    }

    pub fn mean_photon_number(&self) -> f64 {
        self.mean_photon_number
    }

    pub fn with_photon_number(&self, n: f64) -> Result<Self> {
        Self::new(self.envelope.clone(), n)
    }

    /// Envelope scaled by √n̄, i.e. the physical field amplitude.
    pub fn field(&self) -> ComplexEnvelope {
        self.envelope.scaled(C64::new(self.mean_photon_number.sqrt(), 0.0))
    }
}

/// ∫ a*(t) b(t) dt of two normalised wavepackets (trapezoidal).
pub fn wavepacket_inner(a: &Wavepacket, b: &Wavepacket) -> Result<C64> {
    a.envelope.inner(&b.envelope)
}
