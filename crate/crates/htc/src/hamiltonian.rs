//! Assembly of the HTC Hamiltonian on a basis catalog, in the rotating frame
//! of the normal-incidence cavity mode.
//!
//! Diagonal (units of the input frequencies):
//!   photon state:  (ω_c(k) − ω_c(0))·n_c + ω_v·Σν_n
//!   excited state: (ω₀₀ − ω_c(0)) + ω_v·λ² + ω_v·Σν_n
//! Off-diagonal:
//!   vibronic:      ω_v·λ·√(ν+1) between states differing by one quantum on
//!                  the excited molecule only (undisplaced basis, so no
//!                  Franck-Condon factors enter assembly)
//!   light-matter:  Ω/2 between a photon state and each excited state with
//!                  the identical full vibrational configuration

use nalgebra::DMatrix;

use crate::basis::{BasisCatalog, Manifold};
use crate::error::{HtcError, Result};
use crate::model::ModelParams;

/// Real symmetric matrix in coordinate form, row ≥ col.
#[derive(Debug, Clone)]
pub struct SymmetricMatrix {
    dim: usize,
    triplets: Vec<(u32, u32, f64)>,
}

impl SymmetricMatrix {
    pub fn new(dim: usize) -> Self {
        SymmetricMatrix { dim, triplets: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.triplets.len()
    }

    /// Stored (row, col, value) entries, row ≥ col; the strict lower triangle
    /// implies the mirrored upper element.
    pub fn triplets(&self) -> &[(u32, u32, f64)] {
        &self.triplets
    }

    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.dim && col < self.dim);
        debug_assert!(value.is_finite());
        let (r, c) = if row >= col { (row, col) } else { (col, row) };
        self.triplets.push((r as u32, c as u32, value));
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for &(r, c, v) in &self.triplets {
            let (r, c) = (r as usize, c as usize);
            m[(r, c)] += v;
            if r != c {
                m[(c, r)] += v;
            }
        }
        m
    }

    /// y = M x without materializing the dense matrix.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim);
        let mut y = vec![0.0; self.dim];
        for &(r, c, v) in &self.triplets {
            let (r, c) = (r as usize, c as usize);
            y[r] += v * x[c];
            if r != c {
                y[c] += v * x[r];
            }
        }
        y
    }

    /// Coordinate text dump, "row col value" per line, deterministic order.
    pub fn dump(&self) -> String {
        let mut sorted = self.triplets.clone();
        sorted.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut out = String::new();
        for (r, c, v) in sorted {
            out.push_str(&format!("{r} {c} {v:.15e}\n"));
        }
        out
    }
}

/// Convergence diagnostics gathered during assembly.
#[derive(Debug, Clone, Copy, Default)]
pub struct AssemblyStats {
    /// Hamiltonian terms whose image lies outside the truncated catalog.
    pub boundary_crossings: usize,
    /// All off-diagonal terms generated, kept or not.
    pub total_terms: usize,
}

impl AssemblyStats {
    pub fn boundary_fraction(&self) -> f64 {
        if self.total_terms == 0 {
            0.0
        } else {
            self.boundary_crossings as f64 / self.total_terms as f64
        }
    }
}

/// Assemble the one-excitation (or ground) HTC Hamiltonian on `catalog` with
/// the cavity mode at `omega_c_k`; energies relative to ω_c(0).
pub fn assemble(
    catalog: &BasisCatalog,
    p: &ModelParams,
    omega_c_k: f64,
) -> Result<(SymmetricMatrix, AssemblyStats)> {
    if catalog.n_molecules != p.n_molecules {
        return Err(HtcError::CatalogMismatch(format!(
            "catalog built for N={}, params have N={}",
            catalog.n_molecules, p.n_molecules
        )));
    }
    if !omega_c_k.is_finite() || omega_c_k <= 0.0 {
        return Err(HtcError::InvalidParameter(format!(
            "omega_c_k must be positive and finite, got {omega_c_k}"
        )));
    }
    let lambda = p.lambda();
    let detuning = p.zero_phonon_freq - p.cavity_freq_normal;
    let photon_diag_base = omega_c_k - p.cavity_freq_normal;
    let excited_diag_base = detuning + p.vib_freq * lambda * lambda;
    let half_rabi = p.rabi_single / 2.0;
    let v_max = catalog.truncation.total_quanta;

    let mut h = SymmetricMatrix::new(catalog.len());
    let mut stats = AssemblyStats::default();

    for (i, s) in catalog.states().iter().enumerate() {
        let vib_energy = p.vib_freq * s.total_vib() as f64;
        let diag = match (s.photon, s.excited_site) {
            (1, None) => photon_diag_base + vib_energy,
            (0, Some(_)) => excited_diag_base + vib_energy,
            (0, None) => vib_energy,
            _ => {
                return Err(HtcError::CatalogMismatch(format!(
                    "state outside the supported manifolds: {s}"
                )))
            }
        };
        h.push(i, i, diag);

        // Vibronic term, generated upward only so each pair appears once.
        if let Some(site) = s.excited_site {
            let nu = s.quanta_on(site);
            stats.total_terms += 1;
            if s.total_vib() < v_max {
                let up = s.with_quanta(site, nu + 1);
                match catalog.index_of(&up) {
                    Some(j) => {
                        h.push(i, j, p.vib_freq * lambda * ((nu + 1) as f64).sqrt())
                    }
                    None => stats.boundary_crossings += 1,
                }
            } else {
                stats.boundary_crossings += 1;
            }
        }

        // Light-matter term, generated from the photon side only.
        if s.photon == 1 {
            for site in 0..catalog.n_molecules as u32 {
                stats.total_terms += 1;
                let mut partner = s.clone();
                partner.photon = 0;
                partner.excited_site = Some(site);
                match catalog.index_of(&partner) {
                    Some(j) => h.push(i, j, half_rabi),
                    None => stats.boundary_crossings += 1,
                }
            }
        }
    }
    Ok((h, stats))
}

/// Ground-manifold energies ω_v·Σν_n per catalog state (the ground manifold
/// is diagonal in the configuration basis).
pub fn assemble_ground(catalog: &BasisCatalog, p: &ModelParams) -> Result<Vec<f64>> {
    if catalog.manifold != Manifold::Ground {
        return Err(HtcError::CatalogMismatch(
            "assemble_ground requires a ground-manifold catalog".into(),
        ));
    }
    Ok(catalog
        .states()
        .iter()
        .map(|s| p.vib_freq * s.total_vib() as f64)
        .collect())
}
