//! Physics diagnostics: sector projection of eigenstates, degeneracy census,
//! critical-Rabi search for the zero-energy X state and polaron-decoupling
//! verification in the strong-coupling regime.

use crate::basis::{BasisCatalog, Manifold, TruncationParams};
use crate::eigensolver::EigenSystem;
use crate::error::{HtcError, Result};
use crate::model::ModelParams;
use crate::observables::TransitionTable;
use crate::symmetry::build_symmetric_blocks;

/// Decomposition of one eigenstate over the permutation-symmetry partition of
/// the configuration basis.
#[derive(Debug, Clone, Copy, Default)]
pub struct SectorWeights {
    /// |G, 1_c⟩ (vibrationless photon).
    pub vacuum_photon: f64,
    /// Symmetric phonon-photon dressed states (photon + vibrating molecules,
    /// equal-amplitude combination over molecule labels).
    pub sym_phonon_photon: f64,
    /// Their non-symmetric complement.
    pub nonsym_phonon_photon: f64,
    /// Symmetric single-particle vibronic states (no vibrating spectator).
    pub sym_vibronic: f64,
    /// Their non-symmetric complement.
    pub nonsym_vibronic: f64,
    /// Everything with a vibrating spectator (two-particle material).
    pub two_particle: f64,
}

impl SectorWeights {
    pub fn total(&self) -> f64 {
        self.vacuum_photon
            + self.sym_phonon_photon
            + self.nonsym_phonon_photon
            + self.sym_vibronic
            + self.nonsym_vibronic
            + self.two_particle
    }
}

/// Project every eigenstate onto the sector partition.
pub fn sector_project(
    es: &EigenSystem,
    catalog: &BasisCatalog,
) -> Result<Vec<SectorWeights>> {
    if catalog.manifold != Manifold::OneExcitation || es.dim() != catalog.len() {
        return Err(HtcError::CatalogMismatch(
            "sector projection needs a matching one-excitation eigen-system".into(),
        ));
    }
    // Permutation orbits: basis states that map onto each other under
    // molecule relabeling. Key = (photon, excited quanta or none, vib shape).
    #[derive(PartialEq, Eq, Hash)]
    struct OrbitKey {
        photon: u8,
        own: Option<u32>,
        shape: Vec<u32>,
    }
    use std::collections::HashMap;
    let mut orbits: HashMap<OrbitKey, Vec<usize>> = HashMap::new();
    for (idx, s) in catalog.states().iter().enumerate() {
        let own = s.excited_site.map(|site| s.quanta_on(site));
        let mut shape: Vec<u32> = s
            .vib
            .iter()
            .filter(|&&(site, _)| Some(site) != s.excited_site)
            .map(|&(_, q)| q)
            .collect();
        shape.sort_unstable();
        orbits
            .entry(OrbitKey { photon: s.photon, own, shape })
            .or_default()
            .push(idx);
    }

    let mut out = Vec::with_capacity(es.dim());
    for j in 0..es.dim() {
        let v = es.vectors.column(j);
        let mut w = SectorWeights::default();
        for (key, members) in &orbits {
            let total: f64 = members.iter().map(|&i| v[i] * v[i]).sum();
            if total == 0.0 {
                continue;
            }
            match (key.photon, key.own) {
                (1, _) if key.shape.is_empty() => w.vacuum_photon += total,
                (1, _) => {
                    // symmetric component of the orbit; valid when the orbit
                    // is a single relabeling class (P = 1 guarantees it)
                    let sym = members.iter().map(|&i| v[i]).sum::<f64>().powi(2)
                        / members.len() as f64;
                    w.sym_phonon_photon += sym;
                    w.nonsym_phonon_photon += total - sym;
                }
                (0, Some(_)) if key.shape.is_empty() => {
                    let sym = members.iter().map(|&i| v[i]).sum::<f64>().powi(2)
                        / members.len() as f64;
                    w.sym_vibronic += sym;
                    w.nonsym_vibronic += total - sym;
                }
                (0, Some(_)) => w.two_particle += total,
                _ => {
                    return Err(HtcError::CatalogMismatch(
                        "ground-manifold state in a one-excitation catalog".into(),
                    ))
                }
            }
        }
        out.push(w);
    }
    Ok(out)
}

/// Cluster sorted eigenvalues within `tol`; returns (mean energy, count).
pub fn degeneracy_census(values: &[f64], tol: f64) -> Vec<(f64, usize)> {
    let mut out = Vec::new();
    let mut start = 0;
    while start < values.len() {
        let mut end = start + 1;
        while end < values.len() && values[end] - values[end - 1] <= tol {
            end += 1;
        }
        let mean = values[start..end].iter().sum::<f64>() / (end - start) as f64;
        out.push((mean, end - start));
        start = end;
    }
    out
}

/// Minimum symmetric-sector eigenstate photon-vacuum weight for a state to be
/// tracked as the X candidate.
const X_WEIGHT_MIN: f64 = 0.01;

/// Collective Rabi coupling √NΩ_X at which the tracked X state crosses zero,
/// found by bisection on the symmetric-sector block.
pub fn find_critical_rabi(
    p: &ModelParams,
    t: &TruncationParams,
    bracket: (f64, f64),
) -> Result<f64> {
    let (mut lo, mut hi) = bracket;
    if !(lo.is_finite() && hi.is_finite() && lo < hi && lo > 0.0) {
        return Err(HtcError::InvalidParameter(format!(
            "invalid bracket [{lo}, {hi}]"
        )));
    }
    let tracked = |collective: f64| -> Result<Option<f64>> {
        let mut q = p.clone();
        q.rabi_single = collective / (p.n_molecules as f64).sqrt();
        let blocks = build_symmetric_blocks(&q, t, q.cavity_freq_normal)?;
        let es = blocks.symmetric_eigen()?;
        let phot0 = blocks.vibrationless_photon_index();
        let mut best: Option<f64> = None;
        for j in 0..es.dim() {
            if es.vectors[(phot0, j)].powi(2) < X_WEIGHT_MIN {
                continue;
            }
            let e = es.values[j];
            if best.map(|b: f64| e.abs() < b.abs()).unwrap_or(true) {
                best = Some(e);
            }
        }
        Ok(best)
    };
    let flo = tracked(lo)?;
    let fhi = tracked(hi)?;
    let (mut flo, fhi) = match (flo, fhi) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Err(HtcError::NoBracket {
                lo,
                hi,
                detail: "no photon-carrying state near zero at a bracket end".into(),
            })
        }
    };
    if flo.signum() == fhi.signum() {
        return Err(HtcError::NoBracket {
            lo,
            hi,
            detail: format!("tracked eigenvalue does not change sign ({flo:.4} vs {fhi:.4})"),
        });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = tracked(mid)?.ok_or(HtcError::NoBracket {
            lo,
            hi,
            detail: "tracked state lost its photon weight inside the bracket".into(),
        })?;
        if fm.abs() < 1e-8 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Err(HtcError::Numerical(format!(
        "bisection did not reach |E| < 1e-8 in [{lo}, {hi}]"
    )))
}

/// Checks of the strong-coupling polaron decoupling picture.
#[derive(Debug, Clone)]
pub struct PolaronReport {
    /// max_m |ω_(LP+m) − ω_LP − m·ω_v| over the checked rungs.
    pub spacing_error: f64,
    /// Leakage strengths |⟨ε_i|â|ε_j⟩|²/(1/2) for the rung-m transitions that
    /// leave m quanta behind, m = 0..rungs.
    pub strengths: Vec<f64>,
    /// e^{−λ²/4N}, the predicted common strength.
    pub expected_strength: f64,
    /// |⟨φ_−|LP⟩|² against the vibrationless polariton.
    pub lp_overlap_sq: f64,
}

/// Evaluate the decoupling checks on an existing transition table and its
/// one-excitation eigen-system.
pub fn polaron_decoupling_check(
    table: &TransitionTable,
    es: &EigenSystem,
    catalog: &BasisCatalog,
    p: &ModelParams,
    rungs: usize,
) -> Result<PolaronReport> {
    let lambda_sq = p.huang_rhys;
    let expected = (-lambda_sq / (4.0 * p.n_molecules as f64)).exp();
    let lp = 0usize;
    let lp_energy = table.excited_values[lp];

    // |φ_−⟩ = (|G,1_c⟩ − N^{−1/2}Σ_n|e_n⟩)/√2 in the configuration basis.
    let inv_sqrt_n = 1.0 / (p.n_molecules as f64).sqrt();
    let mut overlap = 0.0;
    for (idx, s) in catalog.states().iter().enumerate() {
        if s.total_vib() == 0 {
            if s.photon == 1 {
                overlap += es.vectors[(idx, lp)] / 2f64.sqrt();
            } else if s.excited_site.is_some() {
                overlap -= es.vectors[(idx, lp)] * inv_sqrt_n / 2f64.sqrt();
            }
        }
    }
    let lp_overlap_sq = overlap * overlap;

    let mut spacing_error: f64 = 0.0;
    let mut strengths = Vec::with_capacity(rungs + 1);
    for m in 0..=rungs {
        let target = lp_energy + m as f64;
        // rung state: nearest eigenvalue to LP + m with photon character
        let mut best: Option<usize> = None;
        for j in 0..table.n_excited() {
            if table.photon_weight[j] < 0.1 {
                continue;
            }
            let better = match best {
                Some(b) => {
                    (table.excited_values[j] - target).abs()
                        < (table.excited_values[b] - target).abs()
                }
                None => true,
            };
            if better {
                best = Some(j);
            }
        }
        let j = best.ok_or_else(|| {
            HtcError::Numerical("no photon-carrying rung state found".into())
        })?;
        spacing_error = spacing_error.max((table.excited_values[j] - target).abs());
        // total leakage flux leaving exactly m quanta behind (summed over
        // final states so the result is gauge-free on degenerate rungs)
        let mut a2 = 0.0f64;
        for i in 0..table.n_ground() {
            if table.ground_quanta[i] == m as u32 {
                a2 += table.a_elements[(i, j)].powi(2);
            }
        }
        strengths.push(a2 / 0.5);
    }

    Ok(PolaronReport { spacing_error, strengths, expected_strength: expected, lp_overlap_sq })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::enumerate;
    use crate::eigensolver::{eigh, EigenSystem};
    use crate::hamiltonian::{assemble, assemble_ground};
    use approx::assert_abs_diff_eq;

    fn eigensystem(p: &ModelParams, t: &TruncationParams) -> (BasisCatalog, EigenSystem) {
        let c = enumerate(Manifold::OneExcitation, p.n_molecules, t).unwrap();
        let (h, _) = assemble(&c, p, p.cavity_freq_normal).unwrap();
        let es = eigh(&h).unwrap();
        (c, es)
    }

    #[test]
    fn tc_sector_weights() {
        let p = ModelParams::resonant(4, 0.8, 0.0).validated().unwrap();
        let (c, es) = eigensystem(&p, &TruncationParams::new(2, 1));
        let w = sector_project(&es, &c).unwrap();
        for sw in &w {
            assert_abs_diff_eq!(sw.total(), 1.0, epsilon = 1e-8);
        }
        // LP: half photon vacuum, half symmetric vibronic
        assert_abs_diff_eq!(w[0].vacuum_photon, 0.5, epsilon = 1e-10);
        assert_abs_diff_eq!(w[0].sym_vibronic, 0.5, epsilon = 1e-10);
        // vibrationless dark states: all weight non-symmetric vibronic
        let mut darks = 0;
        for (j, sw) in w.iter().enumerate() {
            if es.values[j].abs() < 1e-10 && sw.nonsym_vibronic > 1.0 - 1e-10 {
                darks += 1;
            }
        }
        assert_eq!(darks, 3);
    }

    #[test]
    fn census_counts() {
        let vals = [-0.5, 0.0, 0.0, 0.0, 0.0, 0.5];
        let c = degeneracy_census(&vals, 1e-9);
        assert_eq!(c, vec![(-0.5, 1), (0.0, 4), (0.5, 1)]);
        let spread = [0.0, 0.3, 0.7, 1.2];
        assert!(degeneracy_census(&spread, 1e-9).iter().all(|&(_, m)| m == 1));
    }

    #[test]
    fn tc_census_matches_analytic_counts() {
        let p = ModelParams::resonant(5, 0.9, 0.0).validated().unwrap();
        let (_, es) = eigensystem(&p, &TruncationParams::new(1, 1));
        let census = degeneracy_census(&es.values, 1e-9);
        // vibrationless block: LP(1), darks(N−1), UP(1)
        let at_zero = census.iter().find(|&&(e, _)| e.abs() < 1e-9).unwrap();
        assert_eq!(at_zero.1, 4);
        assert!(census.iter().any(|&(e, m)| (e + 0.45).abs() < 1e-9 && m == 1));
        assert!(census.iter().any(|&(e, m)| (e - 0.45).abs() < 1e-9 && m == 1));
    }

    #[test]
    fn critical_rabi_located_and_stable() {
        let p = ModelParams::resonant(10, 1.0, 0.5).validated().unwrap();
        let mut found = Vec::new();
        for v in [3u32, 4, 5] {
            let t = TruncationParams::new(v, 1);
            let x = find_critical_rabi(&p, &t, (1.5, 3.0)).unwrap();
            found.push(x);
        }
        for x in &found {
            assert!((2.2..=2.6).contains(x), "critical Rabi {x} outside [2.2, 2.6]");
        }
        let spread = found.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - found.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(spread < 0.02, "critical Rabi spread {spread} across V_max");
    }

    #[test]
    fn critical_rabi_requires_vibronic_coupling() {
        let p = ModelParams::resonant(10, 1.0, 0.0).validated().unwrap();
        let t = TruncationParams::default();
        match find_critical_rabi(&p, &t, (1.5, 3.0)) {
            Err(HtcError::NoBracket { .. }) => {}
            other => panic!("expected NoBracket, got {other:?}"),
        }
    }

    #[test]
    fn polaron_checks_exact_at_zero_coupling() {
        let p = ModelParams::resonant(4, 5.5, 0.0).validated().unwrap();
        let t = TruncationParams::new(3, 1);
        let (c, es) = eigensystem(&p, &t);
        let gc = enumerate(Manifold::Ground, 4, &t).unwrap();
        let gs = EigenSystem::from_diagonal(&assemble_ground(&gc, &p).unwrap());
        let tab = TransitionTable::build(&c, &es, &gc, &gs, &p).unwrap();
        let r = polaron_decoupling_check(&tab, &es, &c, &p, 2).unwrap();
        assert!(r.spacing_error < 1e-10);
        assert_abs_diff_eq!(r.expected_strength, 1.0, epsilon = 1e-15);
        for &s in &r.strengths {
            assert_abs_diff_eq!(s, 1.0, epsilon = 1e-10);
        }
        assert!(r.lp_overlap_sq > 1.0 - 1e-10);
    }

    #[test]
    fn polaron_checks_strong_coupling_regime() {
        // N=10, √NΩ=5.5, λ²=0.05: strengths within 1% of e^{−λ²/4N}.
        let p = ModelParams::resonant(10, 5.5, 0.05).validated().unwrap();
        let t = TruncationParams::default();
        let (c, es) = eigensystem(&p, &t);
        let gc = enumerate(Manifold::Ground, 10, &t).unwrap();
        let gs = EigenSystem::from_diagonal(&assemble_ground(&gc, &p).unwrap());
        let tab = TransitionTable::build(&c, &es, &gc, &gs, &p).unwrap();
        let r = polaron_decoupling_check(&tab, &es, &c, &p, 2).unwrap();
        assert_abs_diff_eq!(r.expected_strength, 0.998750, epsilon = 1e-6);
        for s in &r.strengths {
            assert!((s - r.expected_strength).abs() < 0.01 * r.expected_strength,
                "strength {s} vs expected {}", r.expected_strength);
        }
        assert!(r.spacing_error < 0.02, "rung spacing error {}", r.spacing_error);
        assert!(r.lp_overlap_sq > 0.95, "LP overlap {}", r.lp_overlap_sq);
    }
}
