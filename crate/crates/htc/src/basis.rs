//! Enumeration of the ground and one-excitation manifolds in the
//! distinguishable-molecule representation, under a configurable truncation
//! in total vibrational quanta and in the number of vibrating spectator
//! molecules.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{HtcError, Result};

/// Excitation manifold label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Manifold {
    Ground,
    OneExcitation,
}

/// One configuration of the truncated model.
///
/// Vibrational quanta are counted in the undisplaced (ground-potential)
/// number basis for every molecule, including the electronically excited one;
/// `vib` stores only nonzero entries, sorted by molecule index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisState {
    /// Sorts photon states ahead of material states, matching the catalog
    /// ordering contract (photon, excited_site, vib).
    pub photon: u8,
    /// Electronically excited molecule, if any.
    pub excited_site: Option<u32>,
    /// Sparse map molecule → quanta ≥ 1.
    pub vib: Vec<(u32, u32)>,
}

impl BasisState {
    pub fn ground_vacuum() -> Self {
        BasisState { photon: 0, excited_site: None, vib: Vec::new() }
    }

    pub fn photon(vib: Vec<(u32, u32)>) -> Self {
        BasisState { photon: 1, excited_site: None, vib }
    }

    pub fn excited(site: u32, vib: Vec<(u32, u32)>) -> Self {
        BasisState { photon: 0, excited_site: Some(site), vib }
    }

    /// Excitation number (photon + electronic), i.e. the manifold label.
    pub fn excitation(&self) -> u32 {
        self.photon as u32 + u32::from(self.excited_site.is_some())
    }

    pub fn total_vib(&self) -> u32 {
        self.vib.iter().map(|&(_, q)| q).sum()
    }

    pub fn quanta_on(&self, site: u32) -> u32 {
        self.vib
            .iter()
            .find(|&&(s, _)| s == site)
            .map(|&(_, q)| q)
            .unwrap_or(0)
    }

    /// Vibrating molecules other than the excited one.
    pub fn spectator_count(&self) -> usize {
        self.vib
            .iter()
            .filter(|&&(s, _)| Some(s) != self.excited_site)
            .count()
    }

    /// Same configuration with `site`'s quanta replaced by `quanta` (removed
    /// if zero); keeps the sparse map sorted.
    pub fn with_quanta(&self, site: u32, quanta: u32) -> Self {
        let mut vib: Vec<(u32, u32)> =
            self.vib.iter().copied().filter(|&(s, _)| s != site).collect();
        if quanta > 0 {
            vib.push((site, quanta));
            vib.sort_unstable();
        }
        BasisState { photon: self.photon, excited_site: self.excited_site, vib }
    }

    /// Apply a molecule relabeling; `perm[old] = new`.
    pub fn relabeled(&self, perm: &[u32]) -> Self {
        let mut vib: Vec<(u32, u32)> = self
            .vib
            .iter()
            .map(|&(s, q)| (perm[s as usize], q))
            .collect();
        vib.sort_unstable();
        BasisState {
            photon: self.photon,
            excited_site: self.excited_site.map(|s| perm[s as usize]),
            vib,
        }
    }
}

impl fmt::Display for BasisState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "photon={} ", self.photon)?;
        match self.excited_site {
            Some(s) => write!(f, "excited={s} ")?,
            None => write!(f, "excited=- ")?,
        }
        if self.vib.is_empty() {
            write!(f, "vib=-")
        } else {
            write!(f, "vib=")?;
            for (i, (s, q)) in self.vib.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{s}:{q}")?;
            }
            Ok(())
        }
    }
}

/// Truncation of the vibrational configuration space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TruncationParams {
    /// Maximum total vibrational quanta V_max.
    pub total_quanta: u32,
    /// Maximum number of vibrating spectator molecules P. P = 1 keeps the
    /// two-particle physics (one vibrating spectator); larger values are
    /// convergence checks.
    pub spectators: u32,
    /// Hard cap on catalog size.
    pub hard_cap: usize,
}

impl Default for TruncationParams {
    fn default() -> Self {
        TruncationParams { total_quanta: 4, spectators: 1, hard_cap: 200_000 }
    }
}

impl TruncationParams {
    pub fn new(total_quanta: u32, spectators: u32) -> Self {
        TruncationParams { total_quanta, spectators, ..Default::default() }
    }
}

/// Complete, deterministically ordered listing of one manifold.
#[derive(Debug, Clone)]
pub struct BasisCatalog {
    pub manifold: Manifold,
    pub n_molecules: usize,
    pub truncation: TruncationParams,
    states: Vec<BasisState>,
    index: HashMap<BasisState, usize>,
}

impl BasisCatalog {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state(&self, i: usize) -> &BasisState {
        &self.states[i]
    }

    pub fn states(&self) -> &[BasisState] {
        &self.states
    }

    pub fn index_of(&self, s: &BasisState) -> Option<usize> {
        self.index.get(s).copied()
    }

    /// Same catalog with states listed in `order` (a permutation of 0..len).
    /// Used to check that assembly is covariant under reindexing.
    pub fn reordered(&self, order: &[usize]) -> Result<BasisCatalog> {
        if order.len() != self.states.len() {
            return Err(HtcError::CatalogMismatch(format!(
                "permutation length {} != catalog size {}",
                order.len(),
                self.states.len()
            )));
        }
        let states: Vec<BasisState> = order.iter().map(|&i| self.states[i].clone()).collect();
        let index: HashMap<BasisState, usize> =
            states.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
        if index.len() != states.len() {
            return Err(HtcError::CatalogMismatch("order is not a permutation".into()));
        }
        Ok(BasisCatalog {
            manifold: self.manifold,
            n_molecules: self.n_molecules,
            truncation: self.truncation,
            states,
            index,
        })
    }

    /// Deterministic text listing, one state per line.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (i, s) in self.states.iter().enumerate() {
            out.push_str(&format!("{i}\t{s}\n"));
        }
        out
    }
}

/// Enumerate all sparse vibrational maps over `sites` with total ≤ `max_total`
/// and at most `max_occupied` occupied sites, in lexicographic order.
fn vib_configs(sites: &[u32], max_total: u32, max_occupied: u32) -> Vec<Vec<(u32, u32)>> {
    let mut out = Vec::new();
    let mut cur: Vec<(u32, u32)> = Vec::new();
    fn rec(
        sites: &[u32],
        from: usize,
        budget: u32,
        slots: u32,
        cur: &mut Vec<(u32, u32)>,
        out: &mut Vec<Vec<(u32, u32)>>,
    ) {
        out.push(cur.clone());
        if slots == 0 || budget == 0 {
            return;
        }
        for i in from..sites.len() {
            for q in 1..=budget {
                cur.push((sites[i], q));
                rec(sites, i + 1, budget - q, slots - 1, cur, out);
                cur.pop();
            }
        }
    }
    rec(sites, 0, max_total, max_occupied, &mut cur, &mut out);
    out
}

/// Enumerate one manifold of the HTC model.
///
/// Ground manifold: every configuration with ≤ P+1 vibrating molecules (one
/// more than the excited-manifold spectator cap, so that every leakage and
/// fluorescence partner of the excited catalog is present). One-excitation
/// manifold: the bare-photon sector with ≤ P vibrating molecules, plus every
/// single-vibronic configuration with ≤ P vibrating spectators.
pub fn enumerate(
    manifold: Manifold,
    n_molecules: usize,
    t: &TruncationParams,
) -> Result<BasisCatalog> {
    if n_molecules < 1 {
        return Err(HtcError::InvalidParameter("n_molecules must be ≥ 1".into()));
    }
    let n = n_molecules;
    let sites: Vec<u32> = (0..n as u32).collect();
    let v_max = t.total_quanta;
    let spectators = (t.spectators as usize).min(n) as u32;

    let mut states: Vec<BasisState> = Vec::new();
    match manifold {
        Manifold::Ground => {
            let occ = (spectators + 1).min(n as u32);
            for vib in vib_configs(&sites, v_max, occ) {
                states.push(BasisState { photon: 0, excited_site: None, vib });
            }
        }
        Manifold::OneExcitation => {
            for vib in vib_configs(&sites, v_max, spectators) {
                states.push(BasisState { photon: 1, excited_site: None, vib });
            }
            for &site in &sites {
                let others: Vec<u32> = sites.iter().copied().filter(|&s| s != site).collect();
                for own in 0..=v_max {
                    for spect in vib_configs(&others, v_max - own, spectators) {
                        let mut vib = spect;
                        if own > 0 {
                            vib.push((site, own));
                            vib.sort_unstable();
                        }
                        states.push(BasisState { photon: 0, excited_site: Some(site), vib });
                    }
                }
            }
        }
    }

    if states.len() > t.hard_cap {
        return Err(HtcError::CatalogTooLarge {
            size: states.len(),
            cap: t.hard_cap,
            total_quanta: t.total_quanta,
            spectators: t.spectators,
        });
    }

    states.sort_unstable_by(|a, b| sort_key(a).cmp(&sort_key(b)));
    states.dedup();
    let index: HashMap<BasisState, usize> =
        states.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
    Ok(BasisCatalog { manifold, n_molecules, truncation: *t, states, index })
}

type SortKey = (u8, i64, Vec<(u32, u32)>);

fn sort_key(s: &BasisState) -> SortKey {
    (
        s.photon,
        s.excited_site.map(|x| x as i64).unwrap_or(-1),
        s.vib.clone(),
    )
}

/// Ground-manifold state reached from `s` by photon leakage, if any.
pub fn leakage_partner(s: &BasisState) -> Option<BasisState> {
    if s.photon == 1 {
        Some(BasisState { photon: 0, excited_site: None, vib: s.vib.clone() })
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_molecule_minimal_catalog() {
        // N=1, V_max=1, P=0: photon+vacuum, exc ν=0, exc ν=1.
        let t = TruncationParams::new(1, 0);
        let c = enumerate(Manifold::OneExcitation, 1, &t).unwrap();
        assert_eq!(c.len(), 3);
        let expect = [
            BasisState::excited(0, vec![]),
            BasisState::excited(0, vec![(0, 1)]),
            BasisState::photon(vec![]),
        ];
        for s in &expect {
            assert!(c.index_of(s).is_some(), "missing {s}");
        }
    }

    #[test]
    fn dimer_hand_enumeration() {
        // N=2, V_max=1, P=1: photon×{vac, ν1, ν2}, exc_i×{ν̃=0,1}, plus the
        // two two-particle states exc_i(ν̃=0)⊗(other ν=1).
        let t = TruncationParams::new(1, 1);
        let c = enumerate(Manifold::OneExcitation, 2, &t).unwrap();
        assert_eq!(c.len(), 9);
        assert!(c.index_of(&BasisState::photon(vec![(1, 1)])).is_some());
        assert!(c.index_of(&BasisState::excited(0, vec![(0, 1)])).is_some());
        assert!(c.index_of(&BasisState::excited(1, vec![(0, 1)])).is_some());
        assert!(c.index_of(&BasisState::excited(0, vec![(1, 1)])).is_some());
        assert!(c.index_of(&BasisState::excited(1, vec![(0, 1)])).is_some());
    }

    #[test]
    fn default_truncation_size_regression() {
        // N=10, V_max=4, P=1: pinned on first correct build.
        let t = TruncationParams::default();
        let c = enumerate(Manifold::OneExcitation, 10, &t).unwrap();
        assert_eq!(c.len(), 991);
        let g = enumerate(Manifold::Ground, 10, &t).unwrap();
        assert_eq!(g.len(), 311);
    }

    #[test]
    fn index_round_trip_and_determinism() {
        let t = TruncationParams::default();
        let c1 = enumerate(Manifold::OneExcitation, 5, &t).unwrap();
        let c2 = enumerate(Manifold::OneExcitation, 5, &t).unwrap();
        assert_eq!(c1.states(), c2.states());
        for (i, s) in c1.states().iter().enumerate() {
            assert_eq!(c1.index_of(s), Some(i));
        }
    }

    #[test]
    fn permutation_induces_bijection() {
        let t = TruncationParams::default();
        let c = enumerate(Manifold::OneExcitation, 4, &t).unwrap();
        let perm = [2u32, 0, 3, 1];
        let mut seen = vec![false; c.len()];
        for s in c.states() {
            let j = c.index_of(&s.relabeled(&perm)).expect("image not in catalog");
            assert!(!seen[j]);
            seen[j] = true;
        }
        assert!(seen.iter().all(|&b| b));
    }

    #[test]
    fn hard_cap_enforced() {
        let t = TruncationParams { total_quanta: 8, spectators: 8, hard_cap: 100, ..Default::default() };
        let err = enumerate(Manifold::OneExcitation, 8, &t).unwrap_err();
        match err {
            HtcError::CatalogTooLarge { cap, .. } => assert_eq!(cap, 100),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn leakage_partner_rules() {
        let p = BasisState::photon(vec![(2, 2)]);
        let g = leakage_partner(&p).unwrap();
        assert_eq!(g, BasisState { photon: 0, excited_site: None, vib: vec![(2, 2)] });
        assert_eq!(g.total_vib(), p.total_vib());
        let e = BasisState::excited(0, vec![(0, 1)]);
        assert!(leakage_partner(&e).is_none());
        assert_eq!(
            leakage_partner(&BasisState::photon(vec![])).unwrap(),
            BasisState::ground_vacuum()
        );
    }

    #[test]
    fn ground_manifold_allows_one_more_occupied_site() {
        // Fluorescence from a vibronic state with one spectator lands on two
        // occupied molecules.
        let t = TruncationParams::new(2, 1);
        let g = enumerate(Manifold::Ground, 3, &t).unwrap();
        assert!(g
            .index_of(&BasisState { photon: 0, excited_site: None, vib: vec![(0, 1), (1, 1)] })
            .is_some());
        // but not three.
        let t3 = TruncationParams::new(3, 1);
        let g3 = enumerate(Manifold::Ground, 3, &t3).unwrap();
        assert!(g3
            .index_of(&BasisState { photon: 0, excited_site: None, vib: vec![(0, 1), (1, 1), (2, 1)] })
            .is_none());
    }
}
