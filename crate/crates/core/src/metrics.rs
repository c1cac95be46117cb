//! Fidelities, entropies and partial traces.

use crate::error::{Error, Result};
use crate::state::DensityMatrix;
use crate::C64;

/// −Σ λ log₂ λ over the eigenvalues of `rho`, with 0·log 0 = 0.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    let ev = rho.eigenvalues()?;
    Ok(ev.iter().filter(|&&l| l > 0.0).map(|&l| -l * l.log2()).sum())
}

/// −c² log₂ c² − s² log₂ s² for `c = cos θ`, `s = sin θ`.
pub fn mixing_angle_entropy(theta: f64) -> f64 {
    binary_entropy(theta.cos().powi(2))
}

/// Shannon entropy (bits) of the distribution `(p, 1 − p)`.
pub fn binary_entropy(p: f64) -> f64 {
    let h = |x: f64| if x > 0.0 { -x * x.log2() } else { 0.0 };
    h(p) + h(1.0 - p)
}

/// Partial trace of a bipartite density matrix, keeping subsystem `keep`
/// (0 or 1).
pub fn partial_trace(rho: &DensityMatrix, keep: usize) -> Result<DensityMatrix> {
    let dims = rho.dims();
    if dims.len() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: dims.len() });
    }
    if keep > 1 {
        return Err(Error::InvalidParams(format!("subsystem index {keep} out of range")));
    }
    let (d1, d2) = (dims[0], dims[1]);
    let d = d1 * d2;
    let data = rho.data();
    let kd = if keep == 0 { d1 } else { d2 };
    let mut out = vec![C64::new(0.0, 0.0); kd * kd];
    for i in 0..kd {
        for j in 0..kd {
            let mut acc = C64::new(0.0, 0.0);
            if keep == 0 {
                for k in 0..d2 {
                    acc += data[(i * d2 + k) * d + (j * d2 + k)];
                }
            } else {
                for k in 0..d1 {
                    acc += data[(k * d2 + i) * d + (k * d2 + j)];
                }
            }
            out[i * kd + j] = acc;
        }
    }
    DensityMatrix::from_raw(vec![kd], out)
}

/// Amplitude fidelity `|⟨target|ψ⟩|` of a (possibly sub-normalised) state.
pub fn state_fidelity(target: &[C64], psi: &[C64]) -> f64 {
    target.iter().zip(psi).map(|(t, p)| t.conj() * p).sum::<C64>().norm()
}

/// Amplitude fidelity `√⟨target|ρ|target⟩` for a mixed (sub-normalised)
/// state; reduces to [`state_fidelity`] for pure ρ.
pub fn density_fidelity(target: &[C64], rho: &DensityMatrix) -> f64 {
    rho.expectation(target).max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::PureState;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn pure_state_has_zero_entropy() {
        let psi = PureState::product(&[vec![c(0.6, 0.0), c(0.0, 0.8)]]).unwrap();
        assert!(von_neumann_entropy(&psi.density_matrix()).unwrap().abs() < 1e-12);
    }

    #[test]
    fn maximally_mixed_qubit_has_one_bit() {
        let rho = DensityMatrix::new(vec![2], vec![c(0.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.5, 0.0)]).unwrap();
        assert!((von_neumann_entropy(&rho).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn entropy_rejects_non_hermitian() {
        let rho = DensityMatrix::from_raw(vec![2], vec![c(0.5, 0.0), c(0.1, 0.0), c(0.0, 0.0), c(0.5, 0.0)]).unwrap();
        assert!(von_neumann_entropy(&rho).is_err());
    }

    #[test]
    fn partial_cycle_entropy_matches_closed_form() {
        let theta = std::f64::consts::PI / 6.0;
        // basis order |gg>, |ge>, |eg>, |ee>
        let amps = vec![c(0.0, 0.0), c(theta.sin(), 0.0), c(theta.cos(), 0.0), c(0.0, 0.0)];
        let rho = PureState::new(vec![2, 2], amps).unwrap().density_matrix();
        let s = von_neumann_entropy(&partial_trace(&rho, 0).unwrap()).unwrap();
        let closed = -theta.cos().powi(2) * theta.cos().powi(2).log2() - theta.sin().powi(2) * theta.sin().powi(2).log2();
        assert!((s - closed).abs() < 1e-12);
        assert!((mixing_angle_entropy(theta) - closed).abs() < 1e-15);
    }

    #[test]
    fn product_state_traces_to_factor() {
        let a = vec![c(0.6, 0.0), c(0.0, 0.8)];
        let b = vec![c(0.0, 0.0), c(0.3, 0.4), c(0.0, 0.866_025_403_784_438_6)];
        let rho = PureState::product(&[a.clone(), b.clone()]).unwrap().density_matrix();
        let r1 = partial_trace(&rho, 0).unwrap();
        let r2 = partial_trace(&rho, 1).unwrap();
        let e1 = PureState::product(&[a]).unwrap().density_matrix();
        let e2 = PureState::product(&[b]).unwrap().density_matrix();
        for (x, y) in r1.data().iter().zip(e1.data()) {
            assert!((x - y).norm() < 1e-12);
        }
        for (x, y) in r2.data().iter().zip(e2.data()) {
            assert!((x - y).norm() < 1e-12);
        }
        assert!((r2.trace() - rho.trace()).abs() < 1e-12);
    }

    #[test]
    fn bell_state_is_maximally_mixed_locally() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let rho = PureState::new(vec![2, 2], vec![c(0.0, 0.0), c(h, 0.0), c(h, 0.0), c(0.0, 0.0)]).unwrap().density_matrix();
        for keep in 0..2 {
            let r = partial_trace(&rho, keep).unwrap();
            assert!((r.get(0, 0).re - 0.5).abs() < 1e-12);
            assert!(r.get(0, 1).norm() < 1e-12);
            assert!((von_neumann_entropy(&r).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn partial_trace_rejects_single_system() {
        let rho = DensityMatrix::new(vec![2], vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!(partial_trace(&rho, 0).is_err());
    }

    /// Schmidt oracle: the reduced spectra are the squared singular values of
    /// the coefficient matrix.
    fn schmidt_entropy(amps: &[C64], d1: usize, d2: usize) -> f64 {
        let m = nalgebra::DMatrix::from_fn(d1, d2, |i, j| amps[i * d2 + j]);
        m.singular_values().iter().map(|s| s * s).filter(|&p| p > 0.0).map(|p| -p * p.log2()).sum()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn entropy_is_symmetric_for_pure_states(raw in proptest::collection::vec(-1.0f64..1.0, 2 * 16 * 16)) {
            let d1 = 16;
            let d2 = 16;
            let mut amps: Vec<C64> = raw.chunks(2).map(|p| c(p[0], p[1])).collect();
            let n: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            prop_assume!(n > 1e-3);
            for a in amps.iter_mut() { *a /= n; }
            let rho = PureState::new(vec![d1, d2], amps.clone()).unwrap().density_matrix();
            let s1 = von_neumann_entropy(&partial_trace(&rho, 0).unwrap()).unwrap();
            let s2 = von_neumann_entropy(&partial_trace(&rho, 1).unwrap()).unwrap();
            prop_assert!((s1 - s2).abs() < 1e-9);
            prop_assert!((s1 - schmidt_entropy(&amps, d1, d2)).abs() < 1e-9);
        }
    }
}
