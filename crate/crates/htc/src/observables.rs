//! Transition matrix elements between the one-excitation and ground
//! manifolds, photonic weights, dipole strengths and radiative decay rates.
//!
//! Operators in the configuration basis:
//!   â   maps each photon = 1 state to its leakage partner, amplitude 1
//!   Ĵ₋ = N^{−1/2} Σ_n |g_n⟩⟨e_n|, vibrational quanta untouched
//! Decay rate: Γ_j = κ·Σ_i|⟨ε_i|â|ε_j⟩|² + Nγ₀·Σ_i|⟨ε_i|Ĵ₋|ε_j⟩|².
//! Coherence half-width used by the spectra: κ_j = Γ_j/2.

use nalgebra::DMatrix;

use crate::basis::{leakage_partner, BasisCatalog, BasisState, Manifold};
use crate::eigensolver::EigenSystem;
use crate::error::{HtcError, Result};
use crate::model::ModelParams;

#[derive(Debug, Clone)]
pub struct TransitionTable {
    /// ⟨ε_i|â|ε_j⟩; rows ground eigenstates, columns one-excitation eigenstates.
    pub a_elements: DMatrix<f64>,
    /// ⟨ε_i|Ĵ₋|ε_j⟩, same layout.
    pub jm_elements: DMatrix<f64>,
    /// Γ_j per one-excitation eigenstate.
    pub gamma: Vec<f64>,
    /// F_j = Σ_i |⟨ε_i|Ĵ₋|ε_j⟩|².
    pub f_strength: Vec<f64>,
    /// ⟨ε_j|â†â|ε_j⟩ ∈ [0, 1].
    pub photon_weight: Vec<f64>,
    /// One-excitation eigenvalues, ascending.
    pub excited_values: Vec<f64>,
    /// Ground-manifold eigenvalues (= ω_v·Σν), ascending.
    pub ground_values: Vec<f64>,
    /// Total vibrational quanta Σν of each ground eigenstate.
    pub ground_quanta: Vec<u32>,
    /// Photon-weight not accounted for by leakage partners in the ground
    /// catalog (truncation leakage), summed over columns.
    pub leakage_shortfall: f64,
    pub kappa: f64,
    pub collective_gamma: f64,
}

impl TransitionTable {
    pub fn n_excited(&self) -> usize {
        self.excited_values.len()
    }

    pub fn n_ground(&self) -> usize {
        self.ground_values.len()
    }

    /// Coherence half-width of transitions out of eigenstate j.
    pub fn half_width(&self, j: usize) -> f64 {
        self.gamma[j] / 2.0
    }

    /// Build all element matrices and derived quantities.
    pub fn build(
        excited_catalog: &BasisCatalog,
        excited: &EigenSystem,
        ground_catalog: &BasisCatalog,
        ground: &EigenSystem,
        p: &ModelParams,
    ) -> Result<TransitionTable> {
        if excited_catalog.manifold != Manifold::OneExcitation
            || ground_catalog.manifold != Manifold::Ground
        {
            return Err(HtcError::CatalogMismatch(
                "build requires (one-excitation, ground) catalogs in that order".into(),
            ));
        }
        if excited.dim() != excited_catalog.len() || ground.dim() != ground_catalog.len() {
            return Err(HtcError::CatalogMismatch(
                "eigen-system dimension does not match its catalog".into(),
            ));
        }
        let ne = excited_catalog.len();
        let ng = ground_catalog.len();
        let n = p.n_molecules;
        let inv_sqrt_n = 1.0 / (n as f64).sqrt();

        // Sparse operator images: per excited configuration index, the ground
        // configuration it maps to. Missing leakage partners are truncation
        // leakage and tracked; missing Ĵ₋ partners cannot occur because the
        // ground catalog admits one more occupied site than the spectator cap.
        let mut a_map: Vec<Option<usize>> = Vec::with_capacity(ne);
        let mut jm_map: Vec<Option<usize>> = Vec::with_capacity(ne);
        for s in excited_catalog.states() {
            a_map.push(
                leakage_partner(s).and_then(|g| ground_catalog.index_of(&g)),
            );
            jm_map.push(match s.excited_site {
                Some(_) => {
                    let g = BasisState { photon: 0, excited_site: None, vib: s.vib.clone() };
                    let idx = ground_catalog.index_of(&g);
                    if idx.is_none() {
                        return Err(HtcError::CatalogMismatch(format!(
                            "ground catalog is missing the Ĵ₋ image of {s}"
                        )));
                    }
                    idx
                }
                None => None,
            });
        }

        let mut a_elements = DMatrix::zeros(ng, ne);
        let mut jm_elements = DMatrix::zeros(ng, ne);
        let mut photon_weight = vec![0.0; ne];
        let mut leakage_shortfall = 0.0;
        for j in 0..ne {
            let v = excited.vectors.column(j);
            // operator images in the ground configuration basis
            let mut wa = vec![0.0; ng];
            let mut wjm = vec![0.0; ng];
            let mut pw = 0.0;
            let mut lost = 0.0;
            for k in 0..ne {
                let amp = v[k];
                if amp == 0.0 {
                    continue;
                }
                if excited_catalog.state(k).photon == 1 {
                    pw += amp * amp;
                    match a_map[k] {
                        Some(g) => wa[g] += amp,
                        None => lost += amp * amp,
                    }
                }
                if let Some(g) = jm_map[k] {
                    wjm[g] += inv_sqrt_n * amp;
                }
            }
            photon_weight[j] = pw;
            leakage_shortfall += lost;
            // contract with ground eigenvectors (a stable permutation of the
            // configuration basis, but kept general)
            for i in 0..ng {
                let gi = ground.vectors.column(i);
                let mut a = 0.0;
                let mut m = 0.0;
                for c in 0..ng {
                    let g = gi[c];
                    if g != 0.0 {
                        a += g * wa[c];
                        m += g * wjm[c];
                    }
                }
                a_elements[(i, j)] = a;
                jm_elements[(i, j)] = m;
            }
        }

        let collective_gamma = n as f64 * p.gamma0;
        let mut gamma = vec![0.0; ne];
        let mut f_strength = vec![0.0; ne];
        for j in 0..ne {
            let mut a2 = 0.0;
            let mut m2 = 0.0;
            for i in 0..ng {
                a2 += a_elements[(i, j)].powi(2);
                m2 += jm_elements[(i, j)].powi(2);
            }
            f_strength[j] = m2;
            gamma[j] = p.kappa * a2 + collective_gamma * m2;
        }

        let ground_quanta: Vec<u32> = (0..ng)
            .map(|i| ground_catalog.state(ground.dominant_component(i)).total_vib())
            .collect();

        Ok(TransitionTable {
            a_elements,
            jm_elements,
            gamma,
            f_strength,
            photon_weight,
            excited_values: excited.values.clone(),
            ground_values: ground.values.clone(),
            ground_quanta,
            leakage_shortfall,
            kappa: p.kappa,
            collective_gamma,
        })
    }
}
