//! Permutation-symmetry block diagonalization for the one-excitation
//! manifold with one vibrating spectator (P = 1).
//!
//! The catalog splits into three families under molecule permutations:
//!   1. the totally symmetric sector (multiplicity 1), which carries every
//!      photon-coupled state,
//!   2. a non-symmetric "standard" sector (multiplicity N−1), carrying the
//!      dark Y-type states,
//!   3. purely material two-particle ladders (multiplicity N²−3N+1 at N ≥ 3),
//!      on which only the vibronic term acts.
//! The two-particle states |e_n ν̃, g_m ν⟩ span the module over ordered pairs
//! (n, m), which contains the trivial irrep once, the standard irrep twice,
//! and N²−3N+1 further dimensions; family 3 is therefore unavoidable and the
//! merged spectrum is checked against the full catalog.

use nalgebra::DVector;

use crate::basis::{enumerate, BasisState, Manifold, TruncationParams};
use crate::eigensolver::{eigh, EigenSystem};
use crate::error::{HtcError, Result};
use crate::hamiltonian::{assemble, SymmetricMatrix};
use crate::model::ModelParams;

/// Basis labels of the totally symmetric block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymLabel {
    /// (1/√N)Σ_m |1_c; ν_m = ν⟩ (ν = 0 is the vibrationless photon).
    Photon(u32),
    /// (1/√N)Σ_n |e_n(ν̃)⟩.
    Exciton(u32),
    /// (1/√(N(N−1)))Σ_{n≠m} |e_n ν̃, g_m ν⟩, ν ≥ 1; fields (ν̃, ν).
    TwoParticle(u32, u32),
}

/// One decoupled purely material ladder (fixed spectator quanta).
#[derive(Debug, Clone)]
pub struct LadderBlock {
    pub spectator_quanta: u32,
    pub matrix: SymmetricMatrix,
}

/// The block decomposition of the one-excitation Hamiltonian.
#[derive(Debug, Clone)]
pub struct SymmetryBlocks {
    pub symmetric: SymmetricMatrix,
    pub sym_labels: Vec<SymLabel>,
    /// Representative non-symmetric block; absent at N = 1.
    pub standard: Option<SymmetricMatrix>,
    pub standard_multiplicity: usize,
    /// Leading rows of the standard block that are photonic (ν = 1..V); the
    /// orthonormalization never mixes or drops them.
    pub standard_photon_dims: usize,
    pub ladders: Vec<LadderBlock>,
    pub ladder_multiplicity: usize,
    pub full_dim: usize,
}

impl SymmetryBlocks {
    /// Index of the vibrationless photon vector in the symmetric basis.
    pub fn vibrationless_photon_index(&self) -> usize {
        self.sym_labels
            .iter()
            .position(|&l| l == SymLabel::Photon(0))
            .expect("symmetric basis always contains the bare photon")
    }

    pub fn symmetric_eigen(&self) -> Result<EigenSystem> {
        eigh(&self.symmetric)
    }

    /// All eigenvalues of the full catalog, ascending, reconstructed from the
    /// blocks with their multiplicities.
    pub fn merged_spectrum(&self) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(self.full_dim);
        out.extend(eigh(&self.symmetric)?.values);
        if let Some(std_block) = &self.standard {
            let vals = eigh(std_block)?.values;
            for v in vals {
                for _ in 0..self.standard_multiplicity {
                    out.push(v);
                }
            }
        }
        for ladder in &self.ladders {
            let vals = eigh(&ladder.matrix)?.values;
            for v in vals {
                for _ in 0..self.ladder_multiplicity {
                    out.push(v);
                }
            }
        }
        if out.len() != self.full_dim {
            return Err(HtcError::Numerical(format!(
                "block dimensions sum to {} but the catalog has {}",
                out.len(),
                self.full_dim
            )));
        }
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(out)
    }
}

/// Build the block decomposition at cavity frequency `omega_c_k`.
/// Supports P = 1 and N ≥ 2 only; other truncations use the full catalog.
pub fn build_symmetric_blocks(
    p: &ModelParams,
    t: &TruncationParams,
    omega_c_k: f64,
) -> Result<SymmetryBlocks> {
    if t.spectators != 1 {
        return Err(HtcError::BadRequest(
            "symmetry path supports exactly one vibrating spectator (P = 1)".into(),
        ));
    }
    let n = p.n_molecules;
    if n < 2 {
        return Err(HtcError::BadRequest(
            "symmetry path requires N ≥ 2".into(),
        ));
    }
    let v_max = t.total_quanta;
    let lambda = p.lambda();
    let delta = p.zero_phonon_freq - p.cavity_freq_normal;
    let photon_base = omega_c_k - p.cavity_freq_normal;
    let exc_base = delta + p.vib_freq * lambda * lambda;
    let half_rabi = p.rabi_single / 2.0;
    let nf = n as f64;

    // Symmetric block, assembled analytically. Collective enhancement: the
    // vibrationless photon couples to the symmetric exciton with √N·Ω/2; a
    // photon dressed by ν quanta on one molecule couples to the same-molecule
    // vibronic state with Ω/2 and to the two-particle combination with
    // √(N−1)·Ω/2 (the remaining N−1 molecules can host the excitation).
    let mut labels = Vec::new();
    for nu in 0..=v_max {
        labels.push(SymLabel::Photon(nu));
    }
    for nu_t in 0..=v_max {
        labels.push(SymLabel::Exciton(nu_t));
    }
    for nu in 1..=v_max {
        for nu_t in 0..=(v_max - nu) {
            labels.push(SymLabel::TwoParticle(nu_t, nu));
        }
    }
    let pos = |l: SymLabel| labels.iter().position(|&x| x == l).unwrap();
    let mut sym = SymmetricMatrix::new(labels.len());
    for (i, &l) in labels.iter().enumerate() {
        match l {
            SymLabel::Photon(nu) => {
                sym.push(i, i, photon_base + p.vib_freq * nu as f64);
                if nu == 0 {
                    sym.push(i, pos(SymLabel::Exciton(0)), nf.sqrt() * half_rabi);
                } else {
                    sym.push(i, pos(SymLabel::Exciton(nu)), half_rabi);
                    sym.push(
                        i,
                        pos(SymLabel::TwoParticle(0, nu)),
                        (nf - 1.0).sqrt() * half_rabi,
                    );
                }
            }
            SymLabel::Exciton(nu_t) => {
                sym.push(i, i, exc_base + p.vib_freq * nu_t as f64);
                if nu_t < v_max {
                    sym.push(
                        i,
                        pos(SymLabel::Exciton(nu_t + 1)),
                        p.vib_freq * lambda * ((nu_t + 1) as f64).sqrt(),
                    );
                }
            }
            SymLabel::TwoParticle(nu_t, nu) => {
                sym.push(i, i, exc_base + p.vib_freq * (nu_t + nu) as f64);
                if nu_t + nu < v_max {
                    sym.push(
                        i,
                        pos(SymLabel::TwoParticle(nu_t + 1, nu)),
                        p.vib_freq * lambda * ((nu_t + 1) as f64).sqrt(),
                    );
                }
            }
        }
    }

    // Standard (non-symmetric) representative block, built by projecting the
    // full sparse Hamiltonian onto raw sector vectors and orthonormalizing.
    // Representative weight vector c = (1, −1, 0, …)/√2 with Σc = 0.
    let catalog = enumerate(Manifold::OneExcitation, n, t)?;
    let (h_full, _) = assemble(&catalog, p, omega_c_k)?;
    let dim = catalog.len();
    let c0 = 1.0 / 2f64.sqrt();
    let weight = |m: u32| -> f64 {
        match m {
            0 => c0,
            1 => -c0,
            _ => 0.0,
        }
    };
    let mut raw: Vec<DVector<f64>> = Vec::new();
    let add = |entries: Vec<(BasisState, f64)>, raw: &mut Vec<DVector<f64>>| -> Result<()> {
        let mut v = DVector::zeros(dim);
        for (s, amp) in entries {
            let idx = catalog.index_of(&s).ok_or_else(|| {
                HtcError::CatalogMismatch(format!("sector vector component not in catalog: {s}"))
            })?;
            v[idx] += amp;
        }
        raw.push(v);
        Ok(())
    };
    for nu in 1..=v_max {
        let mut entries = Vec::new();
        for m in 0..2u32 {
            entries.push((BasisState::photon(vec![(m, nu)]), weight(m)));
        }
        add(entries, &mut raw)?;
    }
    for nu_t in 0..=v_max {
        let mut entries = Vec::new();
        for m in 0..2u32 {
            let vib = if nu_t > 0 { vec![(m, nu_t)] } else { vec![] };
            entries.push((BasisState::excited(m, vib), weight(m)));
        }
        add(entries, &mut raw)?;
    }
    let pair_norm = 1.0 / (nf - 1.0).sqrt();
    for nu in 1..=v_max {
        for nu_t in 0..=(v_max - nu) {
            // A type: the weighted molecule carries the spectator quanta.
            let mut a_entries = Vec::new();
            // B type: the weighted molecule carries the excitation.
            let mut b_entries = Vec::new();
            for m in 0..2u32 {
                for excited in 0..n as u32 {
                    if excited == m {
                        continue;
                    }
                    let mut vib = vec![(m, nu)];
                    if nu_t > 0 {
                        vib.push((excited, nu_t));
                        vib.sort_unstable();
                    }
                    a_entries.push((BasisState::excited(excited, vib), weight(m) * pair_norm));
                }
                for host in 0..n as u32 {
                    if host == m {
                        continue;
                    }
                    let mut vib = vec![(host, nu)];
                    if nu_t > 0 {
                        vib.push((m, nu_t));
                        vib.sort_unstable();
                    }
                    b_entries.push((BasisState::excited(m, vib), weight(m) * pair_norm));
                }
            }
            add(a_entries, &mut raw)?;
            add(b_entries, &mut raw)?;
        }
    }
    // Modified Gram-Schmidt; at N = 2 every B vector equals −A and is dropped.
    let mut ortho: Vec<DVector<f64>> = Vec::new();
    for mut v in raw {
        for u in &ortho {
            let proj = u.dot(&v);
            v -= u * proj;
        }
        let norm = v.norm();
        if norm > 1e-8 {
            ortho.push(v / norm);
        }
    }
    let standard = if ortho.is_empty() {
        None
    } else {
        let mut block = SymmetricMatrix::new(ortho.len());
        let images: Vec<Vec<f64>> = ortho
            .iter()
            .map(|u| h_full.mul_vec(u.as_slice()))
            .collect();
        for (j, img) in images.iter().enumerate() {
            let img = DVector::from_column_slice(img);
            for i in j..ortho.len() {
                let val = ortho[i].dot(&img);
                if val.abs() > 1e-13 {
                    block.push(i, j, val);
                }
            }
        }
        Some(block)
    };

    // Purely material ladders: fixed spectator ν ≥ 1, the vibronic term walks
    // the excited molecule's quanta ν̃ = 0..V−ν.
    let mut ladders = Vec::new();
    let mut ladder_dim_total = 0usize;
    for nu in 1..=v_max {
        let size = (v_max - nu + 1) as usize;
        ladder_dim_total += size;
        let mut m = SymmetricMatrix::new(size);
        for j in 0..size {
            let nu_t = j as u32;
            m.push(j, j, exc_base + p.vib_freq * (nu_t + nu) as f64);
            if j + 1 < size {
                m.push(j + 1, j, p.vib_freq * lambda * ((nu_t + 1) as f64).sqrt());
            }
        }
        ladders.push(LadderBlock { spectator_quanta: nu, matrix: m });
    }

    let d_sym = labels.len();
    let d_std = standard.as_ref().map(|b| b.dim()).unwrap_or(0);
    let remaining = dim as i64 - d_sym as i64 - ((n - 1) * d_std) as i64;
    let ladder_multiplicity = if ladder_dim_total == 0 || remaining == 0 {
        0
    } else {
        if remaining < 0 || remaining as usize % ladder_dim_total != 0 {
            return Err(HtcError::Numerical(format!(
                "sector bookkeeping failed: {remaining} residual dims over ladders of total size {ladder_dim_total}"
            )));
        }
        remaining as usize / ladder_dim_total
    };
    if n >= 3 && ladder_dim_total > 0 && ladder_multiplicity != n * n - 3 * n + 1 {
        return Err(HtcError::Numerical(format!(
            "ladder multiplicity {ladder_multiplicity} differs from N²−3N+1 = {}",
            n * n - 3 * n + 1
        )));
    }

    Ok(SymmetryBlocks {
        symmetric: sym,
        sym_labels: labels,
        standard_photon_dims: if standard.is_some() { v_max as usize } else { 0 },
        standard,
        standard_multiplicity: n - 1,
        ladders,
        ladder_multiplicity,
        full_dim: dim,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn merged_vs_full(n: usize, collective_rabi: f64, s: f64, v: u32) {
        let p = ModelParams::resonant(n, collective_rabi, s).validated().unwrap();
        let t = TruncationParams::new(v, 1);
        let blocks = build_symmetric_blocks(&p, &t, p.cavity_freq_normal).unwrap();
        let merged = blocks.merged_spectrum().unwrap();
        let c = enumerate(Manifold::OneExcitation, n, &t).unwrap();
        let (h, _) = assemble(&c, &p, p.cavity_freq_normal).unwrap();
        let full = eigh(&h).unwrap().values;
        assert_eq!(merged.len(), full.len());
        for (a, b) in merged.iter().zip(&full) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-9);
        }
    }

    #[test]
    fn merged_spectrum_matches_full_small() {
        merged_vs_full(2, 1.0, 0.5, 3);
        merged_vs_full(3, 1.0, 0.5, 3);
        merged_vs_full(4, 2.4, 0.5, 3);
    }

    #[test]
    fn merged_spectrum_matches_full_fig4() {
        merged_vs_full(10, 2.4, 0.5, 4);
    }

    #[test]
    fn bookkeeping_at_default_truncation() {
        let p = ModelParams::resonant(10, 2.4, 0.5).validated().unwrap();
        let t = TruncationParams::default();
        let b = build_symmetric_blocks(&p, &t, p.cavity_freq_normal).unwrap();
        assert_eq!(b.symmetric.dim(), 20);
        assert_eq!(b.standard.as_ref().unwrap().dim(), 29);
        assert_eq!(b.standard_multiplicity, 9);
        assert_eq!(b.ladder_multiplicity, 71);
        assert_eq!(b.full_dim, 991);
    }

    #[test]
    fn tavis_cummings_limit_blocks() {
        let p = ModelParams::resonant(5, 1.4, 0.0).validated().unwrap();
        let t = TruncationParams::new(2, 1);
        let b = build_symmetric_blocks(&p, &t, p.cavity_freq_normal).unwrap();
        let sym_vals = eigh(&b.symmetric).unwrap().values;
        // ±√NΩ/2 = ±0.7 present in the symmetric block.
        assert!(sym_vals.iter().any(|v| (v + 0.7).abs() < 1e-12));
        assert!(sym_vals.iter().any(|v| (v - 0.7).abs() < 1e-12));
        // standard block holds a dark state at the bare frequency.
        let std_vals = eigh(b.standard.as_ref().unwrap()).unwrap().values;
        assert!(std_vals.iter().any(|v| v.abs() < 1e-12));
    }

    #[test]
    fn rejects_unsupported_truncations() {
        let p = ModelParams::resonant(4, 1.0, 0.5).validated().unwrap();
        assert!(build_symmetric_blocks(&p, &TruncationParams::new(3, 2), p.cavity_freq_normal)
            .is_err());
        let p1 = ModelParams::resonant(1, 1.0, 0.5).validated().unwrap();
        assert!(build_symmetric_blocks(&p1, &TruncationParams::new(3, 1), p1.cavity_freq_normal)
            .is_err());
    }
}
