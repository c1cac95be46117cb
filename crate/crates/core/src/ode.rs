//! Fixed-step classical Runge–Kutta for complex state vectors.

use crate::C64;

/// Reusable RK4 workspace for a state of fixed length.
#[derive(Debug, Clone)]
pub struct Rk4 {
    k1: Vec<C64>,
    k2: Vec<C64>,
    k3: Vec<C64>,
    k4: Vec<C64>,
    tmp: Vec<C64>,
}

impl Rk4 {
    pub fn new(n: usize) -> Self {
        let z = vec![C64::new(0.0, 0.0); n];
        Self { k1: z.clone(), k2: z.clone(), k3: z.clone(), k4: z.clone(), tmp: z }
    }

    /// Advances `y` from `t` to `t + dt` (`dt` may be negative).
    ///
    /// `f(t, y, dy)` writes the derivative into `dy`.
    pub fn step<F>(&mut self, f: &mut F, t: f64, dt: f64, y: &mut [C64])
    where
        F: FnMut(f64, &[C64], &mut [C64]),
    {
        let h = dt;
        let half = 0.5 * h;
        f(t, y, &mut self.k1);
        for ((tmp, y), k) in self.tmp.iter_mut().zip(y.iter()).zip(&self.k1) {
            *tmp = y + k * half;
        }
        f(t + half, &self.tmp, &mut self.k2);
        for ((tmp, y), k) in self.tmp.iter_mut().zip(y.iter()).zip(&self.k2) {
            *tmp = y + k * half;
        }
        f(t + half, &self.tmp, &mut self.k3);
        for ((tmp, y), k) in self.tmp.iter_mut().zip(y.iter()).zip(&self.k3) {
            *tmp = y + k * h;
        }
        f(t + h, &self.tmp, &mut self.k4);
        let w = h / 6.0;
        for i in 0..y.len() {
            y[i] += (self.k1[i] + (self.k2[i] + self.k3[i]) * 2.0 + self.k4[i]) * w;
        }
    }
}
