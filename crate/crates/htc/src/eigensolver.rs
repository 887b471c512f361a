//! Full eigendecomposition of real symmetric matrices with deterministic
//! ordering and sign gauge.

use faer::Mat;
use nalgebra::{DMatrix, DVector};

use crate::error::{HtcError, Result};
use crate::hamiltonian::SymmetricMatrix;

/// Eigenpairs of a symmetric matrix, values ascending, columns of `vectors`
/// aligned with `values`.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, j: usize) -> DVector<f64> {
        self.vectors.column(j).into_owned()
    }

    /// Diagonal system from a vector of energies; eigenvectors are the unit
    /// configuration vectors, stably sorted by energy. Used for the ground
    /// manifold, which is diagonal in the configuration basis.
    pub fn from_diagonal(energies: &[f64]) -> Self {
        let n = energies.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            energies[a].partial_cmp(&energies[b]).unwrap().then(a.cmp(&b))
        });
        let mut vectors = DMatrix::zeros(n, n);
        let mut values = Vec::with_capacity(n);
        for (col, &i) in order.iter().enumerate() {
            vectors[(i, col)] = 1.0;
            values.push(energies[i]);
        }
        EigenSystem { values, vectors }
    }

    /// Index of the configuration basis state dominating eigenvector `j`.
    pub fn dominant_component(&self, j: usize) -> usize {
        let col = self.vectors.column(j);
        let mut best = 0;
        for i in 1..col.len() {
            if col[i].abs() > col[best].abs() {
                best = i;
            }
        }
        best
    }
}

/// Decompose a symmetric matrix; values ascending; the component of largest
/// magnitude in each vector (first such, on ties) is made positive.
pub fn eigh(m: &SymmetricMatrix) -> Result<EigenSystem> {
    let dim = m.dim();
    if dim == 0 {
        return Err(HtcError::BadRequest("cannot decompose an empty matrix".into()));
    }
    let dense = m.to_dense();
    let a = Mat::from_fn(dim, dim, |i, j| dense[(i, j)]);
    let decomp = a
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|_| HtcError::EigenNoConvergence { dim, iterations: 30 * dim })?;
    let (s, u) = (decomp.S(), decomp.U());

    // eigenvalues already come out ascending; enforce a stable order anyway
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| s[a].partial_cmp(&s[b]).unwrap().then(a.cmp(&b)));

    let mut values = Vec::with_capacity(dim);
    let mut vectors = DMatrix::zeros(dim, dim);
    for (col, &src) in order.iter().enumerate() {
        values.push(s[src]);
        let mut best = 0;
        for i in 1..dim {
            if u[(i, src)].abs() > u[(best, src)].abs() {
                best = i;
            }
        }
        let sign = if u[(best, src)] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..dim {
            vectors[(i, col)] = sign * u[(i, src)];
        }
    }
    Ok(EigenSystem { values, vectors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{enumerate, Manifold, TruncationParams};
    use crate::hamiltonian::assemble;
    use crate::model::ModelParams;
    use approx::assert_abs_diff_eq;

    fn two_by_two(off: f64) -> SymmetricMatrix {
        let mut m = SymmetricMatrix::new(2);
        m.push(1, 0, off);
        m
    }

    #[test]
    fn analytic_two_level() {
        let e = eigh(&two_by_two(0.3)).unwrap();
        assert_abs_diff_eq!(e.values[0], -0.3, epsilon = 1e-14);
        assert_abs_diff_eq!(e.values[1], 0.3, epsilon = 1e-14);
    }

    #[test]
    fn gauge_and_residual_invariants() {
        let p = ModelParams::resonant(6, 1.7, 0.5).validated().unwrap();
        let t = TruncationParams::default();
        let c = enumerate(Manifold::OneExcitation, 6, &t).unwrap();
        let (h, _) = assemble(&c, &p, p.cavity_freq_normal).unwrap();
        let e = eigh(&h).unwrap();
        let dense = h.to_dense();
        let norm = dense.norm();
        // orthonormality
        let gram = e.vectors.transpose() * &e.vectors;
        for i in 0..e.dim() {
            for j in 0..e.dim() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((gram[(i, j)] - expect).abs() < 1e-10);
            }
        }
        // residual
        let mut lam = DMatrix::zeros(e.dim(), e.dim());
        for i in 0..e.dim() {
            lam[(i, i)] = e.values[i];
        }
        let resid = &dense * &e.vectors - &e.vectors * lam;
        assert!(resid.amax() < 1e-8 * norm);
        // ascending order and sign gauge
        for j in 1..e.dim() {
            assert!(e.values[j] >= e.values[j - 1]);
        }
        for j in 0..e.dim() {
            let d = e.dominant_component(j);
            assert!(e.vectors[(d, j)] > 0.0);
        }
    }

    #[test]
    fn determinism_across_runs() {
        let p = ModelParams::resonant(5, 2.0, 0.5).validated().unwrap();
        let t = TruncationParams::default();
        let c = enumerate(Manifold::OneExcitation, 5, &t).unwrap();
        let (h, _) = assemble(&c, &p, p.cavity_freq_normal).unwrap();
        let e1 = eigh(&h).unwrap();
        let e2 = eigh(&h).unwrap();
        assert_eq!(e1.values, e2.values);
        assert_eq!(e1.vectors, e2.vectors);
    }

    #[test]
    fn diagonal_system_is_stable_permutation() {
        let energies = [2.0, 0.0, 1.0, 0.0];
        let e = EigenSystem::from_diagonal(&energies);
        assert_eq!(e.values, vec![0.0, 0.0, 1.0, 2.0]);
        // ties keep the original configuration order
        assert_eq!(e.vectors[(1, 0)], 1.0);
        assert_eq!(e.vectors[(3, 1)], 1.0);
        assert_eq!(e.vectors[(2, 2)], 1.0);
        assert_eq!(e.vectors[(0, 3)], 1.0);
    }

    #[test]
    fn near_zero_state_at_intermediate_rabi() {
        // N=10, √NΩ=2.4, λ²=0.5: an eigenvalue stays near zero (the exact
        // crossing is at √NΩ ≈ 2.22 for N=10; 2.4 is the large-N asymptote).
        // Converged bound from a V_max ∈ {3..6}, P ∈ {1,2} study: |E| ≈ 0.082.
        let p = ModelParams::resonant(10, 2.4, 0.5).validated().unwrap();
        let t = TruncationParams::default();
        let c = enumerate(Manifold::OneExcitation, 10, &t).unwrap();
        let (h, _) = assemble(&c, &p, p.cavity_freq_normal).unwrap();
        let e = eigh(&h).unwrap();
        let closest = e
            .values
            .iter()
            .fold(f64::INFINITY, |acc, &v| acc.min(v.abs()));
        assert!(closest < 0.1, "no near-zero eigenvalue, closest |E| = {closest}");
    }
}
