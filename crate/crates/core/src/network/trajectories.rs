//! Monte Carlo wavefunction unraveling with the waiting-time algorithm.
//!
//! Each trajectory draws a uniform `r` and follows the no-jump evolution
//! until `‖ψ̃‖² < r`; the jump channel is then picked with probability
//! `∝ ‖c_k ψ‖²`. Trajectory `i` uses a ChaCha8 stream `i` seeded with the
//! ensemble seed, so results do not depend on scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::ode::Rk4;
use crate::open::{norm_sq, NoJumpRun, OpenSystem, NORM_INCREASE_LIMIT};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrajectoryOptions {
    pub n_traj: usize,
    pub seed: u64,
    /// Keep evolving after a jump instead of discarding the trajectory.
    pub recycle: bool,
}

impl Default for TrajectoryOptions {
    fn default() -> Self {
        Self { n_traj: 2000, seed: 1, recycle: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpRecord {
    pub time: f64,
    /// Index into [`OpenSystem::jumps`].
    pub channel: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub jumps: Vec<JumpRecord>,
    /// Normalised final state; `None` when the trajectory jumped and
    /// recycling is off.
    pub state: Option<Vec<C64>>,
}

/// Mean and standard error of a per-trajectory quantity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
}

impl Estimate {
    pub fn from_samples(x: &[f64]) -> Self {
        let n = x.len() as f64;
        let mean = x.iter().sum::<f64>() / n;
        if x.len() < 2 {
            return Self { mean, std_error: 0.0 };
        }
        let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        Self { mean, std_error: (var / n).sqrt() }
    }

    /// `√mean` with the propagated error `σ/(2√mean)`.
    pub fn sqrt(&self) -> Self {
        let m = self.mean.max(0.0).sqrt();
        Self { mean: m, std_error: if m > 0.0 { self.std_error / (2.0 * m) } else { 0.0 } }
    }
}

/// Runs `opts.n_traj` trajectories from `psi0`.
pub fn run_trajectories(sys: &OpenSystem, grid: &TimeGrid, psi0: &[C64], opts: &TrajectoryOptions) -> Result<Vec<Trajectory>> {
    if opts.n_traj == 0 {
        return Err(Error::InvalidParams("n_traj must be >= 1".into()));
    }
    let prefix = sys.evolve_no_jump(grid, psi0)?;
    (0..opts.n_traj).into_par_iter().map(|i| single(sys, &prefix, i as u64, opts)).collect()
}

fn normalized(v: &[C64]) -> Vec<C64> {
    let n = norm_sq(v).sqrt();
    v.iter().map(|x| x / n).collect()
}

fn single(sys: &OpenSystem, prefix: &NoJumpRun, index: u64, opts: &TrajectoryOptions) -> Result<Trajectory> {
    let grid = &prefix.grid;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(index);
    let mut jumps = Vec::new();

    // the shared no-jump prefix covers the evolution up to the first jump
    let r: f64 = rng.random();
    let first = prefix.states.iter().position(|s| norm_sq(s) < r);
    let Some(mut k) = first else {
        return Ok(Trajectory { jumps, state: Some(normalized(prefix.final_state())) });
    };
    let mut psi = prefix.states[k].clone();

    let d = sys.dim();
    let mut rk = Rk4::new(d);
    let h = &sys.h_eff;
    let mut rhs = |t: f64, y: &[C64], dy: &mut [C64]| {
        h.apply(t, y, dy);
        for v in dy.iter_mut() {
            *v *= C64::new(0.0, -1.0);
        }
    };
    let mut buf = vec![C64::new(0.0, 0.0); d];
    loop {
        let t = grid.time(k);
        let rates = sys.jump_rates(t, &psi);
        let total: f64 = rates.iter().sum();
        let pick = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut channel = rates.len() - 1;
        for (c, r) in rates.iter().enumerate() {
            acc += r;
            if pick < acc {
                channel = c;
                break;
            }
        }
        jumps.push(JumpRecord { time: t, channel });
        if !opts.recycle {
            return Ok(Trajectory { jumps, state: None });
        }
        sys.jumps[channel].op.apply(t, &psi, &mut buf);
        psi = normalized(&buf);

        let r: f64 = rng.random();
        let mut prev = 1.0;
        let mut jumped = false;
        while k < grid.n_steps() {
            rk.step(&mut rhs, grid.time(k), grid.dt(), &mut psi);
            k += 1;
            let n = norm_sq(&psi);
            if n > prev + NORM_INCREASE_LIMIT || !n.is_finite() {
                return Err(Error::NormIncrease(n - prev));
            }
            prev = n;
            if n < r {
                jumped = true;
                break;
            }
        }
        if !jumped {
            return Ok(Trajectory { jumps, state: Some(normalized(&psi)) });
        }
    }
}
