//! Brute-force reference implementation for small N.
//!
//! Shares no enumeration, assembly or contraction code with the main engine:
//! states are dense per-molecule digit strings enumerated by an odometer,
//! the Hamiltonian is built from a HashMap index, and all observables are
//! recomputed from first principles. Agreement with the main engine is only
//! meaningful because of this independence.

use std::collections::HashMap;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::basis::{enumerate, Manifold, TruncationParams};
use crate::eigensolver::{eigh, EigenSystem};
use crate::error::{HtcError, Result};
use crate::hamiltonian::{assemble, assemble_ground};
use crate::model::ModelParams;
use crate::observables::TransitionTable;
use crate::spectra::{absorption, hotband_distribution, photoluminescence, PlWeighting, PopulationKind};

/// One brute-force configuration: optional photon, optional excited molecule,
/// dense vibrational quanta.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct FullConfig {
    photon: u8,
    excited: Option<u32>,
    nu: Vec<u32>,
}

/// All states of one manifold with total quanta Σν ≤ v_max; no spectator cap.
fn enumerate_full(one_excitation: bool, n: usize, v_max: u32) -> Vec<FullConfig> {
    let mut vib_strings: Vec<Vec<u32>> = Vec::new();
    let mut digits = vec![0u32; n];
    loop {
        if digits.iter().sum::<u32>() <= v_max {
            vib_strings.push(digits.clone());
        }
        // odometer increment
        let mut pos = 0;
        loop {
            if pos == n {
                digits.clear();
                break;
            }
            digits[pos] += 1;
            if digits[pos] > v_max {
                digits[pos] = 0;
                pos += 1;
            } else {
                break;
            }
        }
        if digits.is_empty() {
            break;
        }
    }
    let mut out = Vec::new();
    for nu in &vib_strings {
        if one_excitation {
            out.push(FullConfig { photon: 1, excited: None, nu: nu.clone() });
            for e in 0..n as u32 {
                out.push(FullConfig { photon: 0, excited: Some(e), nu: nu.clone() });
            }
        } else {
            out.push(FullConfig { photon: 0, excited: None, nu: nu.clone() });
        }
    }
    out.sort();
    out
}

fn size_guard(n: usize, limit: usize, what: &str) -> Result<()> {
    if n > limit {
        return Err(HtcError::BadRequest(format!(
            "oracle {what} supports N ≤ {limit}, got {n}"
        )));
    }
    Ok(())
}

struct OracleSystem {
    states: Vec<FullConfig>,
    values: Vec<f64>,
    /// column-major eigenvectors aligned with `values`
    vectors: DMatrix<f64>,
}

fn diagonalize_full(p: &ModelParams, v_max: u32) -> Result<OracleSystem> {
    let n = p.n_molecules;
    let states = enumerate_full(true, n, v_max);
    let index: HashMap<FullConfig, usize> =
        states.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
    let dim = states.len();
    let lambda = p.huang_rhys.sqrt();
    let delta = p.zero_phonon_freq - p.cavity_freq_normal;
    let mut h = DMatrix::zeros(dim, dim);
    for (i, s) in states.iter().enumerate() {
        let total: u32 = s.nu.iter().sum();
        h[(i, i)] = total as f64
            + if s.excited.is_some() { delta + lambda * lambda } else { 0.0 };
        if let Some(e) = s.excited {
            let nu_e = s.nu[e as usize];
            if total < v_max {
                let mut up = s.clone();
                up.nu[e as usize] = nu_e + 1;
                let j = index[&up];
                let val = lambda * ((nu_e + 1) as f64).sqrt();
                h[(i, j)] += val;
                h[(j, i)] += val;
            }
        }
        if s.photon == 1 {
            for e in 0..n as u32 {
                let partner = FullConfig { photon: 0, excited: Some(e), nu: s.nu.clone() };
                let j = index[&partner];
                h[(i, j)] += p.rabi_single / 2.0;
                h[(j, i)] += p.rabi_single / 2.0;
            }
        }
    }
    let decomp = SymmetricEigen::try_new(h, f64::EPSILON, 0)
        .ok_or(HtcError::EigenNoConvergence { dim, iterations: 30 * dim })?;
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| {
        decomp.eigenvalues[a].partial_cmp(&decomp.eigenvalues[b]).unwrap().then(a.cmp(&b))
    });
    let values: Vec<f64> = order.iter().map(|&i| decomp.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(dim, dim);
    for (col, &src) in order.iter().enumerate() {
        vectors.set_column(col, &decomp.eigenvectors.column(src));
    }
    Ok(OracleSystem { states, values, vectors })
}

/// All one-excitation eigenvalues, ascending. N ≤ 4.
pub fn full_spectrum(p: &ModelParams, v_max: u32) -> Result<Vec<f64>> {
    size_guard(p.n_molecules, 4, "full_spectrum")?;
    Ok(diagonalize_full(p, v_max)?.values)
}

/// Maximum deviation between oracle and main engine over eigenvalues, decay
/// rates (per degenerate cluster), an absorption curve and a PL curve. N ≤ 3.
pub fn full_transition_check(p: &ModelParams, v_max: u32, grid: &[f64]) -> Result<f64> {
    size_guard(p.n_molecules, 3, "full_transition_check")?;
    let n = p.n_molecules;
    let sys = diagonalize_full(p, v_max)?;
    let grounds = enumerate_full(false, n, v_max);
    let gindex: HashMap<FullConfig, usize> =
        grounds.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
    let ng = grounds.len();
    let ne = sys.values.len();
    let inv_sqrt_n = 1.0 / (n as f64).sqrt();
    let collective_gamma = n as f64 * p.gamma0;

    // transition element images in the ground configuration basis
    let mut wa = vec![vec![0.0; ng]; ne];
    let mut wjm = vec![vec![0.0; ng]; ne];
    for j in 0..ne {
        for (k, s) in sys.states.iter().enumerate() {
            let amp = sys.vectors[(k, j)];
            if amp == 0.0 {
                continue;
            }
            if s.photon == 1 {
                let g = FullConfig { photon: 0, excited: None, nu: s.nu.clone() };
                wa[j][gindex[&g]] += amp;
            } else if s.excited.is_some() {
                let g = FullConfig { photon: 0, excited: None, nu: s.nu.clone() };
                wjm[j][gindex[&g]] += inv_sqrt_n * amp;
            }
        }
    }
    let gamma: Vec<f64> = (0..ne)
        .map(|j| {
            let a2: f64 = wa[j].iter().map(|x| x * x).sum();
            let m2: f64 = wjm[j].iter().map(|x| x * x).sum();
            p.kappa * a2 + collective_gamma * m2
        })
        .collect();

    // absorption from |G⟩ and PL (uniform pumping, no cutoff, all finals)
    let g0 = gindex[&FullConfig { photon: 0, excited: None, nu: vec![0; n] }];
    let floor = 1e-18;
    let mut a_curve = vec![0.0; grid.len()];
    let mut s_curve = vec![0.0; grid.len()];
    for j in 0..ne {
        let f_j: f64 = wjm[j].iter().map(|x| x * x).sum();
        let kappa_j = gamma[j] / 2.0;
        let a_strength = f_j * wa[j][g0].powi(2);
        if a_strength >= floor {
            for (gi, &w) in grid.iter().enumerate() {
                let d = w - sys.values[j];
                a_curve[gi] += std::f64::consts::PI * a_strength * (kappa_j / gamma[j])
                    / (d * d + kappa_j * kappa_j);
            }
        }
        for (ig, gstate) in grounds.iter().enumerate() {
            let flux = p.kappa * wa[j][ig].powi(2);
            if flux < floor {
                continue;
            }
            let quanta: u32 = gstate.nu.iter().sum();
            let omega_ji = sys.values[j] - quanta as f64;
            for (gi, &w) in grid.iter().enumerate() {
                let d = w - omega_ji;
                s_curve[gi] += flux * kappa_j * kappa_j / (d * d + kappa_j * kappa_j);
            }
        }
    }

    // main engine with an exhaustive spectator cap
    let t = TruncationParams::new(v_max, n as u32);
    let ec = enumerate(Manifold::OneExcitation, n, &t)?;
    let gc = enumerate(Manifold::Ground, n, &t)?;
    let (h, _) = assemble(&ec, p, p.cavity_freq_normal)?;
    let es = eigh(&h)?;
    let gs = EigenSystem::from_diagonal(&assemble_ground(&gc, p)?);
    let tab = TransitionTable::build(&ec, &es, &gc, &gs, p)?;
    if es.dim() != ne || gc.len() != ng {
        return Err(HtcError::CatalogMismatch(format!(
            "oracle dimensions ({ne}, {ng}) differ from engine ({}, {})",
            es.dim(),
            gc.len()
        )));
    }
    let eta = hotband_distribution(PopulationKind::GroundOnly, &tab)?;
    let a_main = absorption(&tab, &eta, grid)?;
    let cutoff = es.values.last().copied().unwrap() + 1.0;
    let s_main = photoluminescence(&tab, cutoff, v_max, PlWeighting::PerState, grid)?;

    let mut dev: f64 = 0.0;
    for (a, b) in sys.values.iter().zip(&es.values) {
        dev = dev.max((a - b).abs());
    }
    // decay rates compared per degenerate cluster (gauge-free)
    let mut start = 0;
    while start < ne {
        let mut end = start + 1;
        while end < ne && sys.values[end] - sys.values[end - 1] < 1e-9 {
            end += 1;
        }
        let g_oracle: f64 = gamma[start..end].iter().sum();
        let g_main: f64 = tab.gamma[start..end].iter().sum();
        dev = dev.max((g_oracle - g_main).abs());
        start = end;
    }
    for (a, b) in a_curve.iter().zip(&a_main.intensity) {
        dev = dev.max((a - b).abs());
    }
    for (a, b) in s_curve.iter().zip(&s_main.intensity) {
        dev = dev.max((a - b).abs());
    }
    Ok(dev)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::linspace;
    use approx::assert_abs_diff_eq;

    #[test]
    fn single_molecule_matches_main_engine() {
        let p = ModelParams::resonant(1, 0.8, 0.5).validated().unwrap();
        let oracle = full_spectrum(&p, 3).unwrap();
        let t = TruncationParams::new(3, 1);
        let c = enumerate(Manifold::OneExcitation, 1, &t).unwrap();
        let (h, _) = assemble(&c, &p, p.cavity_freq_normal).unwrap();
        let main = eigh(&h).unwrap().values;
        assert_eq!(oracle.len(), main.len());
        for (a, b) in oracle.iter().zip(&main) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-10);
        }
    }

    #[test]
    fn dimer_spectrum_matches_exhaustive_engine() {
        let p = ModelParams::resonant(2, 1.0, 0.5).validated().unwrap();
        let oracle = full_spectrum(&p, 3).unwrap();
        let t = TruncationParams::new(3, 2);
        let c = enumerate(Manifold::OneExcitation, 2, &t).unwrap();
        let (h, _) = assemble(&c, &p, p.cavity_freq_normal).unwrap();
        let main = eigh(&h).unwrap().values;
        assert_eq!(oracle.len(), main.len());
        for (a, b) in oracle.iter().zip(&main) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-10);
        }
    }

    #[test]
    fn trimer_truncation_convergence() {
        // P=1 approximates; P=2 is exhaustive at N=3.
        let p = ModelParams::resonant(3, 1.0, 0.5).validated().unwrap();
        let oracle = full_spectrum(&p, 3).unwrap();
        let t1 = TruncationParams::new(3, 1);
        let c1 = enumerate(Manifold::OneExcitation, 3, &t1).unwrap();
        let (h1, _) = assemble(&c1, &p, p.cavity_freq_normal).unwrap();
        let lo1 = eigh(&h1).unwrap().values;
        // largest deviation in this range is 0.046 (levels 7 and 8)
        for i in 0..12 {
            assert!((lo1[i] - oracle[i]).abs() < 0.05, "level {i} off by {}", (lo1[i] - oracle[i]).abs());
        }
        let t2 = TruncationParams::new(3, 3);
        let c2 = enumerate(Manifold::OneExcitation, 3, &t2).unwrap();
        let (h2, _) = assemble(&c2, &p, p.cavity_freq_normal).unwrap();
        let full = eigh(&h2).unwrap().values;
        assert_eq!(full.len(), oracle.len());
        for (a, b) in full.iter().zip(&oracle) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-10);
        }
    }

    #[test]
    fn transition_check_zero_coupling() {
        let p = ModelParams::resonant(2, 0.8, 0.0).validated().unwrap();
        let grid = linspace(-2.0, 3.0, 101);
        let dev = full_transition_check(&p, 3, &grid).unwrap();
        assert!(dev < 1e-12, "deviation {dev}");
    }

    #[test]
    fn transition_check_dimer() {
        let p = ModelParams::resonant(2, 1.0, 0.5).validated().unwrap();
        let grid = linspace(-2.0, 3.0, 101);
        let dev = full_transition_check(&p, 3, &grid).unwrap();
        assert!(dev < 1e-10, "deviation {dev}");
    }

    #[test]
    fn size_guard_enforced() {
        let p = ModelParams::resonant(6, 1.0, 0.5).validated().unwrap();
        assert!(full_spectrum(&p, 2).is_err());
        let p4 = ModelParams::resonant(4, 1.0, 0.5).validated().unwrap();
        assert!(full_transition_check(&p4, 2, &[0.0, 1.0]).is_err());
    }
}
