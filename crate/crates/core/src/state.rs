//! Hilbert-space bookkeeping for one or two nodes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

/// Electronic level of the dot: spin ground states `g`, `e` and the two
/// degenerate trion states `t`, `t̄`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Level {
    G,
    E,
    T,
    TBar,
}

impl Level {
    pub const ALL: [Level; 4] = [Level::G, Level::E, Level::T, Level::TBar];

    pub fn index(self) -> usize {
        match self {
            Level::G => 0,
            Level::E => 1,
            Level::T => 2,
            Level::TBar => 3,
        }
    }
}

/// `{g, e, t, t̄} ⊗ {|0⟩, …, |n_max⟩}` for one node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeSpace {
    pub n_max: usize,
}

impl NodeSpace {
    pub fn new(n_max: usize) -> Self {
        Self { n_max }
    }

    pub fn dim(&self) -> usize {
        4 * (self.n_max + 1)
    }

    pub fn fock_dim(&self) -> usize {
        self.n_max + 1
    }

    pub fn index(&self, level: Level, n: usize) -> usize {
        debug_assert!(n <= self.n_max);
        level.index() * (self.n_max + 1) + n
    }

    pub fn decompose(&self, idx: usize) -> (Level, usize) {
        let f = self.n_max + 1;
        (Level::ALL[idx / f], idx % f)
    }

    /// Pathway label of a basis state: the Hamiltonian only connects states
    /// with equal labels, and one cavity emission flips the label.
    ///
    /// `|g,0⟩` has label `false`, `|e,0⟩` has label `true`.
    pub fn pathway(&self, idx: usize) -> bool {
        let (level, n) = self.decompose(idx);
        let base = matches!(level, Level::E | Level::T);
        base ^ (n % 2 == 1)
    }

    pub fn basis(&self, level: Level, n: usize) -> Vec<C64> {
        let mut v = vec![C64::new(0.0, 0.0); self.dim()];
        v[self.index(level, n)] = C64::new(1.0, 0.0);
        v
    }
}

/// Spin-qubit coefficients `c_g|g⟩ + c_e|e⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitAmplitudes {
    pub c_g: C64,
    pub c_e: C64,
}

impl QubitAmplitudes {
    pub fn new(c_g: C64, c_e: C64) -> Result<Self> {
        let n = c_g.norm_sqr() + c_e.norm_sqr();
        if (n - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParams(format!("qubit amplitudes have norm² {n}")));
        }
        Ok(Self { c_g, c_e })
    }

    /// Normalises `(c_g, c_e)`.
    pub fn normalized(c_g: C64, c_e: C64) -> Result<Self> {
        let n = (c_g.norm_sqr() + c_e.norm_sqr()).sqrt();
        if !(n > 0.0) {
            return Err(Error::InvalidParams("zero qubit state".into()));
        }
        Ok(Self { c_g: c_g / n, c_e: c_e / n })
    }

    pub fn ground() -> Self {
        Self { c_g: C64::new(1.0, 0.0), c_e: C64::new(0.0, 0.0) }
    }

    pub fn excited() -> Self {
        Self { c_g: C64::new(0.0, 0.0), c_e: C64::new(1.0, 0.0) }
    }

    pub fn equal_superposition() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self { c_g: C64::new(h, 0.0), c_e: C64::new(h, 0.0) }
    }

    /// `|g⟩, |e⟩, |±⟩, |±i⟩`.
    pub fn cardinal_states() -> [Self; 6] {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let c = |a: C64, b: C64| Self { c_g: a, c_e: b };
        [
            Self::ground(),
            Self::excited(),
            c(C64::new(h, 0.0), C64::new(h, 0.0)),
            c(C64::new(h, 0.0), C64::new(-h, 0.0)),
            c(C64::new(h, 0.0), C64::new(0.0, h)),
            c(C64::new(h, 0.0), C64::new(0.0, -h)),
        ]
    }
}

/// Pure state on a product of subsystems, with the probability that has
/// left the tracked space through non-Hermitian evolution.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    dims: Vec<usize>,
    amplitudes: Vec<C64>,
    lost_weight: f64,
}

impl PureState {
    pub fn new(dims: Vec<usize>, amplitudes: Vec<C64>) -> Result<Self> {
        let dim: usize = dims.iter().product();
        if amplitudes.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: amplitudes.len() });
        }
        let n: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if n > 1.0 + 1e-8 {
            return Err(Error::InvalidParams(format!("state norm² {n} exceeds 1")));
        }
        Ok(Self { dims, amplitudes, lost_weight: (1.0 - n).max(0.0) })
    }

    /// Product of single-subsystem vectors.
    pub fn product(parts: &[Vec<C64>]) -> Result<Self> {
        let dims: Vec<usize> = parts.iter().map(|p| p.len()).collect();
        let mut amps = vec![C64::new(1.0, 0.0)];
        for p in parts {
            amps = amps.iter().flat_map(|a| p.iter().map(move |b| a * b)).collect();
        }
        Self::new(dims, amps)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn norm_sq(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn lost_weight(&self) -> f64 {
        self.lost_weight
    }

    /// Replaces the amplitudes after an evolution step; the lost weight is
    /// updated so that norm² + lost = 1.
    pub fn with_amplitudes(&self, amplitudes: Vec<C64>) -> Result<Self> {
        let mut s = Self::new(self.dims.clone(), amplitudes)?;
        let total = s.norm_sq() + self.lost_weight;
        if total > 1.0 + 1e-8 {
            return Err(Error::NormIncrease(total - 1.0));
        }
        s.lost_weight = 1.0 - s.norm_sq();
        Ok(s)
    }

    pub fn density_matrix(&self) -> DensityMatrix {
        let d = self.amplitudes.len();
        let mut data = vec![C64::new(0.0, 0.0); d * d];
        for i in 0..d {
            for j in 0..d {
                data[i * d + j] = self.amplitudes[i] * self.amplitudes[j].conj();
            }
        }
        DensityMatrix { dims: self.dims.clone(), data }
    }
}

/// Hermitian, positive semi-definite matrix with trace ≤ 1; the deficit is
/// leaked probability.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dims: Vec<usize>,
    data: Vec<C64>,
}

impl DensityMatrix {
    pub const HERMITIAN_TOL: f64 = 1e-10;
    pub const EIGEN_TOL: f64 = 1e-9;

    /// Validating constructor.
    pub fn new(dims: Vec<usize>, data: Vec<C64>) -> Result<Self> {
        let rho = Self::from_raw(dims, data)?;
        rho.validate()?;
        Ok(rho)
    }

    /// Shape check only.
    pub fn from_raw(dims: Vec<usize>, data: Vec<C64>) -> Result<Self> {
        let d: usize = dims.iter().product();
        if data.len() != d * d {
            return Err(Error::DimensionMismatch { expected: d * d, got: data.len() });
        }
        Ok(Self { dims, data })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.dim() + j]
    }

    pub fn trace(&self) -> f64 {
        let d = self.dim();
        (0..d).map(|i| self.data[i * d + i].re).sum()
    }

    pub fn hermiticity_error(&self) -> f64 {
        let d = self.dim();
        let mut err: f64 = 0.0;
        for i in 0..d {
            for j in i..d {
                err = err.max((self.data[i * d + j] - self.data[j * d + i].conj()).norm());
            }
        }
        err
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let h = self.hermiticity_error();
        if h > Self::HERMITIAN_TOL {
            return Err(Error::NonHermitian(h));
        }
        let d = self.dim();
        let m = nalgebra::DMatrix::from_fn(d, d, |i, j| {
            // symmetrise to remove round-off asymmetry
            (self.data[i * d + j] + self.data[j * d + i].conj()) * 0.5
        });
        let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
        Ok(ev)
    }

    pub fn validate(&self) -> Result<()> {
        let ev = self.eigenvalues()?;
        if let Some(&min) = ev.last() {
            if min < -Self::EIGEN_TOL {
                return Err(Error::PositivityViolation(min));
            }
        }
        let tr = self.trace();
        if !(-1e-12..=1.0 + 1e-9).contains(&tr) {
            return Err(Error::InvalidParams(format!("trace {tr} outside [0, 1]")));
        }
        Ok(())
    }

    /// Expectation ⟨ψ|ρ|ψ⟩.
    pub fn expectation(&self, psi: &[C64]) -> f64 {
        let d = self.dim();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..d {
            if psi[i] == C64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..d {
                acc += psi[i].conj() * self.data[i * d + j] * psi[j];
            }
        }
        acc.re
    }

    /// `ρ / tr ρ`.
    pub fn normalized(&self) -> Result<Self> {
        let tr = self.trace();
        if !(tr > 0.0) {
            return Err(Error::InvalidParams("cannot normalise a zero-trace matrix".into()));
        }
        Ok(Self { dims: self.dims.clone(), data: self.data.iter().map(|v| v / tr).collect() })
    }

    /// Restriction `P ρ P` onto the listed basis indices, with the given
    /// subsystem dimensions for the result.
    pub fn project(&self, indices: &[usize], dims: Vec<usize>) -> Result<Self> {
        let d = self.dim();
        let k = indices.len();
        if dims.iter().product::<usize>() != k {
            return Err(Error::DimensionMismatch { expected: k, got: dims.iter().product() });
        }
        let mut data = Vec::with_capacity(k * k);
        for &i in indices {
            for &j in indices {
                data.push(self.data[i * d + j]);
            }
        }
        Ok(Self { dims, data })
    }
}
