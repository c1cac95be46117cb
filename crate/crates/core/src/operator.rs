//! Sparse operators with time-dependent scalar coefficients.
//!
//! An operator is a sum `Σ_k c_k(t) M_k` of constant sparse matrices with
//! coefficients `c_k(t) = prefactor · f(t) · e^{i ω t}`, where `f` is either
//! 1 or a (possibly conjugated) sampled envelope. Envelopes are linearly
//! interpolated, so RK4 half-steps see interpolated drive values.

use crate::envelope::ComplexEnvelope;
use crate::C64;

const ZERO: C64 = C64::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    dim: usize,
    entries: Vec<(usize, usize, C64)>,
}

impl SparseMatrix {
    pub fn new(dim: usize) -> Self {
        Self { dim, entries: Vec::new() }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::new(dim);
        for i in 0..dim {
            m.push(i, i, C64::new(1.0, 0.0));
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(usize, usize, C64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    /// Adds `v` at `(row, col)`; duplicates are merged.
    pub fn push(&mut self, row: usize, col: usize, v: C64) {
        assert!(row < self.dim && col < self.dim, "index out of range");
        if v == ZERO {
            return;
        }
        if let Some(e) = self.entries.iter_mut().find(|e| e.0 == row && e.1 == col) {
            e.2 += v;
        } else {
            self.entries.push((row, col, v));
        }
    }

    pub fn adjoint(&self) -> Self {
        Self { dim: self.dim, entries: self.entries.iter().map(|&(r, c, v)| (c, r, v.conj())).collect() }
    }

    pub fn scaled(&self, s: C64) -> Self {
        Self { dim: self.dim, entries: self.entries.iter().map(|&(r, c, v)| (r, c, v * s)).collect() }
    }

    /// `self · other`.
    pub fn matmul(&self, other: &SparseMatrix) -> Self {
        let mut out = Self::new(self.dim);
        for &(r, k, a) in &self.entries {
            for &(k2, c, b) in &other.entries {
                if k == k2 {
                    out.push(r, c, a * b);
                }
            }
        }
        out
    }

    /// `A ⊗ B`.
    pub fn kron(a: &SparseMatrix, b: &SparseMatrix) -> Self {
        let mut out = Self::new(a.dim * b.dim);
        for &(r1, c1, v1) in &a.entries {
            for &(r2, c2, v2) in &b.entries {
                out.entries.push((r1 * b.dim + r2, c1 * b.dim + c2, v1 * v2));
            }
        }
        out
    }

    /// Lifts an operator on subsystem `position` of a product space.
    pub fn embed(&self, dims: &[usize], position: usize) -> Self {
        assert_eq!(dims[position], self.dim);
        let left: usize = dims[..position].iter().product();
        let right: usize = dims[position + 1..].iter().product();
        let mut m = self.clone();
        if right > 1 {
            m = Self::kron(&m, &Self::identity(right));
        }
        if left > 1 {
            m = Self::kron(&Self::identity(left), &m);
        }
        m
    }

    /// `y += s · M x`.
    pub fn apply_add(&self, s: C64, x: &[C64], y: &mut [C64]) {
        for &(r, c, v) in &self.entries {
            y[r] += s * v * x[c];
        }
    }

    pub fn to_dense(&self) -> Vec<C64> {
        let mut d = vec![ZERO; self.dim * self.dim];
        for &(r, c, v) in &self.entries {
            d[r * self.dim + c] += v;
        }
        d
    }
}

/// Time profile of one operator term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Modulation {
    Constant,
    /// Envelope `index` of the owning operator, optionally conjugated.
    Envelope { index: usize, conjugate: bool },
    /// Product of two envelopes, each optionally conjugated.
    Product { index: [usize; 2], conjugate: [bool; 2] },
}

impl Modulation {
    /// Profile of the Hermitian-conjugate term.
    pub fn conjugated(self) -> Self {
        match self {
            Modulation::Constant => Modulation::Constant,
            Modulation::Envelope { index, conjugate } => Modulation::Envelope { index, conjugate: !conjugate },
            Modulation::Product { index, conjugate } => Modulation::Product { index, conjugate: [!conjugate[0], !conjugate[1]] },
        }
    }

    fn offset(self, n: usize) -> Self {
        match self {
            Modulation::Constant => Modulation::Constant,
            Modulation::Envelope { index, conjugate } => Modulation::Envelope { index: index + n, conjugate },
            Modulation::Product { index, conjugate } => Modulation::Product { index: [index[0] + n, index[1] + n], conjugate },
        }
    }

    fn factors(self) -> Vec<(usize, bool)> {
        match self {
            Modulation::Constant => vec![],
            Modulation::Envelope { index, conjugate } => vec![(index, conjugate)],
            Modulation::Product { index, conjugate } => vec![(index[0], conjugate[0]), (index[1], conjugate[1])],
        }
    }

    fn from_factors(f: &[(usize, bool)]) -> Option<Self> {
        match f {
            [] => Some(Modulation::Constant),
            [(index, conjugate)] => Some(Modulation::Envelope { index: *index, conjugate: *conjugate }),
            [a, b] => Some(Modulation::Product { index: [a.0, b.0], conjugate: [a.1, b.1] }),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorTerm {
    pub prefactor: C64,
    pub modulation: Modulation,
    /// Angular frequency ω of the factor `e^{iωt}`.
    pub rotation: f64,
    pub matrix: SparseMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeDependentOperator {
    dim: usize,
    terms: Vec<OperatorTerm>,
    envelopes: Vec<ComplexEnvelope>,
}

impl TimeDependentOperator {
    pub fn new(dim: usize) -> Self {
        Self { dim, terms: Vec::new(), envelopes: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[OperatorTerm] {
        &self.terms
    }

    pub fn envelopes(&self) -> &[ComplexEnvelope] {
        &self.envelopes
    }

    pub fn add_envelope(&mut self, env: ComplexEnvelope) -> usize {
        self.envelopes.push(env);
        self.envelopes.len() - 1
    }

    pub fn add_constant(&mut self, prefactor: C64, matrix: SparseMatrix) {
        self.add_term(prefactor, Modulation::Constant, 0.0, matrix);
    }

    pub fn add_term(&mut self, prefactor: C64, modulation: Modulation, rotation: f64, matrix: SparseMatrix) {
        assert_eq!(matrix.dim(), self.dim);
        if matrix.nnz() == 0 || prefactor == ZERO {
            return;
        }
        for (index, _) in modulation.factors() {
            assert!(index < self.envelopes.len(), "unknown envelope");
        }
        self.terms.push(OperatorTerm { prefactor, modulation, rotation, matrix });
    }

    /// Scalar coefficient of `term` at time `t`.
    pub fn coefficient(&self, term: &OperatorTerm, t: f64) -> C64 {
        let mut c = term.prefactor;
        for (index, conjugate) in term.modulation.factors() {
            let v = self.envelopes[index].sample(t);
            c *= if conjugate { v.conj() } else { v };
        }
        if term.rotation != 0.0 {
            c *= C64::from_polar(1.0, term.rotation * t);
        }
        c
    }

    pub fn coefficients(&self, t: f64) -> Vec<C64> {
        self.terms.iter().map(|term| self.coefficient(term, t)).collect()
    }

    /// `y = A(t) x`.
    pub fn apply(&self, t: f64, x: &[C64], y: &mut [C64]) {
        y.iter_mut().for_each(|v| *v = ZERO);
        for term in &self.terms {
            let c = self.coefficient(term, t);
            if c != ZERO {
                term.matrix.apply_add(c, x, y);
            }
        }
    }

    /// `out = A(t) X` for a row-major `dim × cols` matrix `X`.
    pub fn apply_matrix(&self, t: f64, x: &[C64], cols: usize, out: &mut [C64]) {
        let mut rows: Vec<Vec<(usize, C64)>> = vec![Vec::new(); self.dim];
        for term in &self.terms {
            let c = self.coefficient(term, t);
            if c == ZERO {
                continue;
            }
            for &(r, k, v) in term.matrix.entries() {
                rows[r].push((k, c * v));
            }
        }
        // terms often share sparsity; merge so each source row is read once
        for row in rows.iter_mut() {
            row.sort_unstable_by_key(|e| e.0);
            row.dedup_by(|b, a| {
                if a.0 == b.0 {
                    a.1 += b.1;
                    true
                } else {
                    false
                }
            });
        }
        for (dst, row) in out.chunks_mut(cols).zip(&rows) {
            dst.iter_mut().for_each(|v| *v = ZERO);
            for &(k, s) in row {
                for (d, s_) in dst.iter_mut().zip(&x[k * cols..(k + 1) * cols]) {
                    *d += s * s_;
                }
            }
        }
    }

    /// Operator `A(t)†` with the same envelopes.
    pub fn adjoint(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| OperatorTerm {
                prefactor: t.prefactor.conj(),
                modulation: t.modulation.conjugated(),
                rotation: -t.rotation,
                matrix: t.matrix.adjoint(),
            })
            .collect();
        Self { dim: self.dim, terms, envelopes: self.envelopes.clone() }
    }

    /// Lifts onto subsystem `position` of a product space.
    pub fn embed(&self, dims: &[usize], position: usize) -> Self {
        let dim = dims.iter().product();
        let terms = self
            .terms
            .iter()
            .map(|t| OperatorTerm { matrix: t.matrix.embed(dims, position), ..t.clone() })
            .collect();
        Self { dim, terms, envelopes: self.envelopes.clone() }
    }

    /// Sum of two operators on the same space; envelopes are concatenated.
    pub fn sum(&self, other: &TimeDependentOperator) -> Self {
        assert_eq!(self.dim, other.dim);
        let offset = self.envelopes.len();
        let mut out = self.clone();
        out.envelopes.extend(other.envelopes.iter().cloned());
        for t in &other.terms {
            out.terms.push(OperatorTerm { modulation: t.modulation.offset(offset), ..t.clone() });
        }
        out
    }

    /// `s · A(t)`.
    pub fn scaled(&self, s: C64) -> Self {
        let terms = self.terms.iter().map(|t| OperatorTerm { prefactor: t.prefactor * s, ..t.clone() }).collect();
        Self { dim: self.dim, terms, envelopes: self.envelopes.clone() }
    }

    /// `A(t) B(t)`. Each term of the product may carry at most two envelope
    /// factors.
    pub fn product(&self, other: &TimeDependentOperator) -> Self {
        assert_eq!(self.dim, other.dim);
        let offset = self.envelopes.len();
        let mut out = Self { dim: self.dim, terms: Vec::new(), envelopes: self.envelopes.clone() };
        out.envelopes.extend(other.envelopes.iter().cloned());
        for a in &self.terms {
            for b in &other.terms {
                let matrix = a.matrix.matmul(&b.matrix);
                let mut f = a.modulation.factors();
                f.extend(b.modulation.offset(offset).factors());
                let modulation = Modulation::from_factors(&f).expect("more than two envelope factors");
                out.add_term(a.prefactor * b.prefactor, modulation, a.rotation + b.rotation, matrix);
            }
        }
        out
    }

    /// `A(t + d)`: the operator seen by a clock running `d` ahead.
    pub fn advanced(&self, d: f64) -> Self {
        if d == 0.0 {
            return self.clone();
        }
        let terms = self
            .terms
            .iter()
            .map(|t| OperatorTerm { prefactor: t.prefactor * C64::from_polar(1.0, t.rotation * d), ..t.clone() })
            .collect();
        let envelopes = self
            .envelopes
            .iter()
            .map(|e| ComplexEnvelope::new(e.grid().shifted(-d), e.values().to_vec()).expect("same samples"))
            .collect();
        Self { dim: self.dim, terms, envelopes }
    }

    pub fn to_dense(&self, t: f64) -> Vec<C64> {
        let mut d = vec![ZERO; self.dim * self.dim];
        for term in &self.terms {
            let c = self.coefficient(term, t);
            for &(r, k, v) in term.matrix.entries() {
                d[r * self.dim + k] += c * v;
            }
        }
        d
    }

    /// Largest `|A_ij − conj(A_ji)|` at time `t`.
    pub fn hermiticity_error(&self, t: f64) -> f64 {
        let d = self.to_dense(t);
        let n = self.dim;
        let mut err: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                err = err.max((d[i * n + j] - d[j * n + i].conj()).norm());
            }
        }
        err
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TimeGrid;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn kron_and_embed() {
        let mut a = SparseMatrix::new(2);
        a.push(0, 1, c(1.0, 0.0));
        let e = a.embed(&[3, 2], 1);
        assert_eq!(e.dim(), 6);
        let dense = e.to_dense();
        assert_eq!(dense[0 * 6 + 1], c(1.0, 0.0));
        assert_eq!(dense[2 * 6 + 3], c(1.0, 0.0));
        let e0 = a.embed(&[2, 3], 0);
        assert_eq!(e0.to_dense()[0 * 6 + 3], c(1.0, 0.0));
    }

    #[test]
    fn adjoint_of_time_dependent_operator() {
        let grid = TimeGrid::new(0.0, 1.0, 10).unwrap();
        let mut op = TimeDependentOperator::new(2);
        let idx = op.add_envelope(ComplexEnvelope::from_fn(grid, |t| c(t, 2.0 * t)));
        let mut m = SparseMatrix::new(2);
        m.push(0, 1, c(0.0, 1.0));
        op.add_term(c(0.5, 0.2), Modulation::Envelope { index: idx, conjugate: false }, 1.7, m);
        let adj = op.adjoint();
        let t = 0.43;
        let a = op.to_dense(t);
        let b = adj.to_dense(t);
        for i in 0..2 {
            for j in 0..2 {
                assert!((a[i * 2 + j].conj() - b[j * 2 + i]).norm() < 1e-14);
            }
        }
        let h = op.sum(&adj);
        assert!(h.hermiticity_error(t) < 1e-14);
    }

    #[test]
    fn advanced_operator_is_time_shifted() {
        let grid = TimeGrid::new(0.0, 10.0, 100).unwrap();
        let mut op = TimeDependentOperator::new(2);
        let idx = op.add_envelope(ComplexEnvelope::from_fn(grid, |t| c(t.sin(), t)));
        let mut m = SparseMatrix::new(2);
        m.push(1, 0, c(1.0, 0.0));
        op.add_term(c(0.0, 0.5), Modulation::Envelope { index: idx, conjugate: true }, 0.9, m);
        let adv = op.advanced(1.3);
        for t in [0.0, 2.2, 7.0] {
            let a = adv.to_dense(t);
            let b = op.to_dense(t + 1.3);
            assert!((a[2] - b[2]).norm() < 1e-12);
        }
    }

    #[test]
    fn product_matches_dense_product() {
        let grid = TimeGrid::new(0.0, 10.0, 100).unwrap();
        let mut a = TimeDependentOperator::new(2);
        let ia = a.add_envelope(ComplexEnvelope::from_fn(grid, |t| c(t.cos(), 0.3 * t)));
        let mut m = SparseMatrix::new(2);
        m.push(0, 1, c(1.0, 0.5));
        m.push(1, 1, c(0.2, 0.0));
        a.add_term(c(0.0, 1.0), Modulation::Envelope { index: ia, conjugate: false }, 0.4, m.clone());
        a.add_constant(c(0.7, 0.0), m.adjoint());
        let b = a.adjoint().advanced(0.8);
        let p = a.product(&b);
        for t in [0.5, 3.3, 8.0] {
            let (da, db, dp) = (a.to_dense(t), b.to_dense(t), p.to_dense(t));
            for i in 0..2 {
                for j in 0..2 {
                    let want: C64 = (0..2).map(|k| da[i * 2 + k] * db[k * 2 + j]).sum();
                    assert!((dp[i * 2 + j] - want).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn apply_matrix_matches_columns() {
        let mut op = TimeDependentOperator::new(3);
        let mut m = SparseMatrix::new(3);
        m.push(0, 2, c(1.0, 1.0));
        m.push(1, 0, c(-2.0, 0.0));
        op.add_constant(c(0.0, 1.0), m);
        let x: Vec<C64> = (0..6).map(|k| c(k as f64, 1.0)).collect();
        let mut out = vec![ZERO; 6];
        op.apply_matrix(0.0, &x, 2, &mut out);
        for col in 0..2 {
            let v: Vec<C64> = (0..3).map(|r| x[r * 2 + col]).collect();
            let mut y = vec![ZERO; 3];
            op.apply(0.0, &v, &mut y);
            for r in 0..3 {
                assert!((y[r] - out[r * 2 + col]).norm() < 1e-14);
            }
        }
    }
}
