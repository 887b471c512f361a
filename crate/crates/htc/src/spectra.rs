//! Stationary spectra built from a transition table: absorption, hot-band
//! absorption, photoluminescence, emission-fraction audits and dispersion
//! diagrams.
//!
//! Every transition (j → i) emits or absorbs at ω_ji = ω_j − ω_v·Σν_i: in the
//! rotating frame the ground manifold is diagonal with energy ω_v·Σν, so the
//! leakage frequency rule is exact by construction.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{enumerate, Manifold, TruncationParams};
use crate::eigensolver::eigh;
use crate::error::{HtcError, Result};
use crate::hamiltonian::assemble;
use crate::model::ModelParams;
use crate::observables::TransitionTable;
use crate::symmetry::build_symmetric_blocks;

/// Transition strengths below this are squares of eigenvector round-off;
/// dropped before the 1/Γ factors can amplify them.
const STRENGTH_FLOOR: f64 = 1e-18;

/// One recorded transition with provenance.
#[derive(Debug, Clone, Copy)]
pub struct Peak {
    /// Emission/absorption frequency ω_ji.
    pub omega: f64,
    /// Contribution to the curve's peak height at ω_ji.
    pub weight: f64,
    /// One-excitation eigenstate index j.
    pub parent: usize,
    pub parent_energy: f64,
    /// Ground eigenstate index i.
    pub final_state: usize,
    pub final_quanta: u32,
    /// Lorentzian half-width κ_ij of this transition.
    pub half_width: f64,
}

#[derive(Debug, Clone)]
pub struct Spectrum {
    pub omega_grid: Vec<f64>,
    pub intensity: Vec<f64>,
    pub peaks: Vec<Peak>,
}

/// Initial-population choices for (hot-band) absorption.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PopulationKind {
    GroundOnly,
    /// Uniform over all ground eigenstates with Σν = ν.
    Level(u32),
    /// Boltzmann in ω_v·Σν at temperature k_BT (units of ω_v).
    Thermal(f64),
}

#[derive(Debug, Clone)]
pub struct PopulationDistribution {
    pub eta: Vec<f64>,
    pub kind: PopulationKind,
}

/// How the uniformly pumped one-excitation manifold is weighted in PL.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlWeighting {
    /// Every eigenstate below the cutoff carries weight 1.
    PerState,
    /// Every energy level below the cutoff carries total weight 1, shared
    /// equally among its degenerate members; `tol` is the clustering width.
    PerLevel { tol: f64 },
}

/// Initial populations η_i over the ground eigenstates.
pub fn hotband_distribution(
    kind: PopulationKind,
    t: &TransitionTable,
) -> Result<PopulationDistribution> {
    let ng = t.n_ground();
    let mut eta = vec![0.0; ng];
    match kind {
        PopulationKind::GroundOnly => {
            let g = (0..ng)
                .find(|&i| t.ground_quanta[i] == 0)
                .ok_or_else(|| HtcError::BadRequest("no vibrationless ground state".into()))?;
            eta[g] = 1.0;
        }
        PopulationKind::Level(nu) => {
            let members: Vec<usize> =
                (0..ng).filter(|&i| t.ground_quanta[i] == nu).collect();
            if members.is_empty() {
                return Err(HtcError::BadRequest(format!(
                    "no ground eigenstates with Σν = {nu}"
                )));
            }
            let w = 1.0 / members.len() as f64;
            for i in members {
                eta[i] = w;
            }
        }
        PopulationKind::Thermal(kt) => {
            if !(kt.is_finite() && kt > 0.0) {
                return Err(HtcError::InvalidParameter(format!(
                    "thermal population requires k_BT > 0, got {kt}"
                )));
            }
            let mut z = 0.0;
            for i in 0..ng {
                eta[i] = (-t.ground_values[i] / kt).exp();
                z += eta[i];
            }
            for e in &mut eta {
                *e /= z;
            }
        }
    }
    Ok(PopulationDistribution { eta, kind })
}

/// A(ω) = π Σ_i η_i Σ_j F_j |a_ij|² (κ_ij/Γ_j) / ((ω−ω_ji)² + κ_ij²).
pub fn absorption(
    t: &TransitionTable,
    eta: &PopulationDistribution,
    grid: &[f64],
) -> Result<Spectrum> {
    check_grid(grid)?;
    if eta.eta.len() != t.n_ground() {
        return Err(HtcError::CatalogMismatch(
            "population vector does not match the ground eigen-system".into(),
        ));
    }
    let mut peaks = Vec::new();
    for j in 0..t.n_excited() {
        let kappa_ij = t.half_width(j);
        for i in 0..t.n_ground() {
            let strength = eta.eta[i] * t.f_strength[j] * t.a_elements[(i, j)].powi(2);
            if strength < STRENGTH_FLOOR {
                continue;
            }
            if t.gamma[j] == 0.0 {
                return Err(HtcError::Numerical(format!(
                    "state {j} has zero decay rate but nonzero absorption strength"
                )));
            }
            peaks.push(Peak {
                omega: t.excited_values[j] - t.ground_values[i],
                weight: std::f64::consts::PI * strength * (kappa_ij / t.gamma[j]) / kappa_ij.powi(2),
                parent: j,
                parent_energy: t.excited_values[j],
                final_state: i,
                final_quanta: t.ground_quanta[i],
                half_width: kappa_ij,
            });
        }
    }
    Ok(evaluate(grid, peaks))
}

/// S(ω) = Σ_{j: ω_j ≤ cutoff} w_j Σ_{i: Σν_i ≤ max_final} κ|a_ij|²·L(ω−ω_ji),
/// with L the unit-peak Lorentzian of half-width κ_ij.
pub fn photoluminescence(
    t: &TransitionTable,
    cutoff: f64,
    max_final_quanta: u32,
    weighting: PlWeighting,
    grid: &[f64],
) -> Result<Spectrum> {
    check_grid(grid)?;
    let w = pump_weights(t, cutoff, weighting);
    let mut peaks = Vec::new();
    for j in 0..t.n_excited() {
        if w[j] == 0.0 {
            continue;
        }
        let kappa_ij = t.half_width(j);
        for i in 0..t.n_ground() {
            if t.ground_quanta[i] > max_final_quanta {
                continue;
            }
            let flux = w[j] * t.kappa * t.a_elements[(i, j)].powi(2);
            if flux < STRENGTH_FLOOR {
                continue;
            }
            peaks.push(Peak {
                omega: t.excited_values[j] - t.ground_values[i],
                weight: flux,
                parent: j,
                parent_energy: t.excited_values[j],
                final_state: i,
                final_quanta: t.ground_quanta[i],
                half_width: kappa_ij,
            });
        }
    }
    Ok(evaluate(grid, peaks))
}

/// Flux fractions at `omega_target` ± `window`, keyed by the parent-state
/// vibrational offset m = round((ω_j − ω_target)/ω_v). The flux of each
/// transition inside the window is its Lorentzian integral over the window.
pub fn emission_fraction(
    t: &TransitionTable,
    cutoff: f64,
    max_final_quanta: u32,
    weighting: PlWeighting,
    omega_target: f64,
    window: f64,
) -> Result<Vec<(i32, f64)>> {
    if !(window.is_finite() && window > 0.0) {
        return Err(HtcError::InvalidParameter(format!(
            "window must be > 0, got {window}"
        )));
    }
    let w = pump_weights(t, cutoff, weighting);
    let mut bins: Vec<(i32, f64)> = Vec::new();
    let mut total = 0.0;
    for j in 0..t.n_excited() {
        if w[j] == 0.0 {
            continue;
        }
        let kappa_ij = t.half_width(j);
        let m = (t.excited_values[j] - omega_target).round() as i32;
        for i in 0..t.n_ground() {
            if t.ground_quanta[i] > max_final_quanta {
                continue;
            }
            let strength = w[j] * t.kappa * t.a_elements[(i, j)].powi(2);
            if strength < STRENGTH_FLOOR {
                continue;
            }
            let omega_ji = t.excited_values[j] - t.ground_values[i];
            // ∫ L dω over the window, L unit-peak with half-width κ_ij
            let hi = ((omega_target + window - omega_ji) / kappa_ij).atan();
            let lo = ((omega_target - window - omega_ji) / kappa_ij).atan();
            let flux = strength * kappa_ij * (hi - lo);
            total += flux;
            match bins.iter_mut().find(|(b, _)| *b == m) {
                Some((_, f)) => *f += flux,
                None => bins.push((m, flux)),
            }
        }
    }
    if total <= 0.0 {
        return Err(HtcError::Numerical(format!(
            "no emission flux in [{:.4}, {:.4}]",
            omega_target - window,
            omega_target + window
        )));
    }
    for (_, f) in &mut bins {
        *f /= total;
    }
    bins.sort_unstable_by_key(|&(m, _)| m);
    Ok(bins)
}

/// One eigenstate at one in-plane wave vector.
#[derive(Debug, Clone, Copy)]
pub struct DispersionPoint {
    pub k: f64,
    pub omega: f64,
    pub photon_weight: f64,
}

/// Diagonalize at every k on the grid; `use_symmetry` takes the block path
/// where supported (P = 1, N ≥ 2), else the full catalog.
pub fn dispersion_sweep(
    p: &ModelParams,
    t: &TruncationParams,
    k_grid: &[f64],
    use_symmetry: bool,
) -> Result<Vec<DispersionPoint>> {
    check_grid(k_grid)?;
    let symmetry_ok = use_symmetry && t.spectators == 1 && p.n_molecules >= 2;
    let catalog = if symmetry_ok {
        None
    } else {
        Some(enumerate(Manifold::OneExcitation, p.n_molecules, t)?)
    };
    let columns: Result<Vec<Vec<DispersionPoint>>> = k_grid
        .par_iter()
        .map(|&k| -> Result<Vec<DispersionPoint>> {
            let omega_c_k = crate::model::cavity_dispersion(k, p);
            let mut pts = Vec::new();
            if let Some(cat) = &catalog {
                let (h, _) = assemble(cat, p, omega_c_k)?;
                let es = eigh(&h)?;
                for j in 0..es.dim() {
                    let mut pw = 0.0;
                    for (idx, s) in cat.states().iter().enumerate() {
                        if s.photon == 1 {
                            pw += es.vectors[(idx, j)].powi(2);
                        }
                    }
                    pts.push(DispersionPoint { k, omega: es.values[j], photon_weight: pw });
                }
            } else {
                let blocks = build_symmetric_blocks(p, t, omega_c_k)?;
                let sym = eigh(&blocks.symmetric)?;
                let n_photon_sym = blocks
                    .sym_labels
                    .iter()
                    .filter(|l| matches!(l, crate::symmetry::SymLabel::Photon(_)))
                    .count();
                for j in 0..sym.dim() {
                    let pw: f64 =
                        (0..n_photon_sym).map(|r| sym.vectors[(r, j)].powi(2)).sum();
                    pts.push(DispersionPoint { k, omega: sym.values[j], photon_weight: pw });
                }
                if let Some(std_block) = &blocks.standard {
                    let es = eigh(std_block)?;
                    for j in 0..es.dim() {
                        let pw: f64 = (0..blocks.standard_photon_dims)
                            .map(|r| es.vectors[(r, j)].powi(2))
                            .sum();
                        for _ in 0..blocks.standard_multiplicity {
                            pts.push(DispersionPoint { k, omega: es.values[j], photon_weight: pw });
                        }
                    }
                }
                for ladder in &blocks.ladders {
                    let es = eigh(&ladder.matrix)?;
                    for &v in &es.values {
                        for _ in 0..blocks.ladder_multiplicity {
                            pts.push(DispersionPoint { k, omega: v, photon_weight: 0.0 });
                        }
                    }
                }
                pts.sort_by(|a, b| a.omega.partial_cmp(&b.omega).unwrap());
            }
            Ok(pts)
        })
        .collect();
    Ok(columns?.into_iter().flatten().collect())
}

/// Pump weights per one-excitation eigenstate below `cutoff`.
fn pump_weights(t: &TransitionTable, cutoff: f64, weighting: PlWeighting) -> Vec<f64> {
    let ne = t.n_excited();
    let mut w = vec![0.0; ne];
    match weighting {
        PlWeighting::PerState => {
            for j in 0..ne {
                if t.excited_values[j] <= cutoff {
                    w[j] = 1.0;
                }
            }
        }
        PlWeighting::PerLevel { tol } => {
            let mut start = 0;
            while start < ne {
                let mut end = start + 1;
                while end < ne && t.excited_values[end] - t.excited_values[end - 1] <= tol {
                    end += 1;
                }
                if t.excited_values[start] <= cutoff {
                    let share = 1.0 / (end - start) as f64;
                    for wj in &mut w[start..end] {
                        *wj = share;
                    }
                }
                start = end;
            }
        }
    }
    w
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(HtcError::BadRequest("empty grid".into()));
    }
    for w in grid.windows(2) {
        if w[1] <= w[0] {
            return Err(HtcError::BadRequest(
                "grid must be strictly increasing".into(),
            ));
        }
    }
    Ok(())
}

fn evaluate(grid: &[f64], peaks: Vec<Peak>) -> Spectrum {
    let intensity: Vec<f64> = grid
        .par_iter()
        .map(|&w| {
            peaks
                .iter()
                .map(|p| {
                    let d = w - p.omega;
                    p.weight * p.half_width.powi(2) / (d * d + p.half_width.powi(2))
                })
                .sum()
        })
        .collect();
    Spectrum { omega_grid: grid.to_vec(), intensity, peaks }
}

/// Aggregate recorded transitions into line clusters: peaks closer than
/// `merge` to a cluster's running weighted mean are merged. Returns
/// (weighted mean frequency, total weight) sorted by frequency. These are the
/// "narrow line" positions of a spectrum, independent of the broadened curve.
pub fn peak_clusters(s: &Spectrum, merge: f64) -> Vec<(f64, f64)> {
    let mut lines: Vec<(f64, f64)> = s.peaks.iter().map(|p| (p.omega, p.weight)).collect();
    lines.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (o, w) in lines {
        match out.last_mut() {
            Some((oc, wc)) if (o - *oc).abs() < merge => {
                *oc = (*oc * *wc + o * w) / (*wc + w);
                *wc += w;
            }
            _ => out.push((o, w)),
        }
    }
    out
}

/// Uniform grid helper, inclusive of both ends.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2 && hi > lo);
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}
