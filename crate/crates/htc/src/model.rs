//! Physical parameters of the Holstein-Tavis-Cummings system, the cavity
//! dispersion relation, and closed-form diabatic splitting formulas used for
//! analysis and testing.
//!
//! All frequencies and rates are stored in units of the intramolecular
//! vibrational frequency, and one-excitation energies are reported in the
//! rotating frame of the cavity (relative to the normal-incidence cavity
//! frequency).

use serde::{Deserialize, Serialize};

use crate::error::{HtcError, Result};
use crate::franck_condon::franck_condon;

/// Physical constants of one HTC system.
///
/// Frequencies and rates are in units of `vib_freq`; [`ModelParams::validated`]
/// rescales so that `vib_freq == 1` internally.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Number of molecular emitters N.
    pub n_molecules: usize,
    /// Single-emitter vacuum Rabi frequency Ω.
    pub rabi_single: f64,
    /// Intramolecular vibrational frequency; the unit scale.
    pub vib_freq: f64,
    /// Zero-phonon (0-0) transition frequency ω00.
    pub zero_phonon_freq: f64,
    /// Huang-Rhys factor λ² (dimensionless, ≥ 0).
    pub huang_rhys: f64,
    /// Cavity frequency at normal incidence ω_c(k=0).
    pub cavity_freq_normal: f64,
    /// Photon leakage rate κ.
    pub kappa: f64,
    /// Single-emitter fluorescence rate γ0.
    pub gamma0: f64,
    /// Dispersion scale k0 (inverse length, μm⁻¹).
    pub k0: f64,
}

impl ModelParams {
    /// Parameters in the convention used throughout: a collective Rabi
    /// coupling √N·Ω, resonance ω_c = ω00 at normal incidence, and an
    /// absolute frequency scale ω00/ω_v = 20.
    pub fn resonant(n_molecules: usize, collective_rabi: f64, huang_rhys: f64) -> Self {
        let rabi_single = collective_rabi / (n_molecules as f64).sqrt();
        ModelParams {
            n_molecules,
            rabi_single,
            vib_freq: 1.0,
            zero_phonon_freq: DEFAULT_FREQ_SCALE_RATIO,
            huang_rhys,
            cavity_freq_normal: DEFAULT_FREQ_SCALE_RATIO,
            kappa: 1.0,
            gamma0: 0.1,
            k0: DEFAULT_K0,
        }
    }

    /// Validate and normalize to the internal unit convention (ω_v ≡ 1).
    pub fn validated(mut self) -> Result<Self> {
        if self.n_molecules < 1 {
            return Err(HtcError::InvalidParameter(
                "n_molecules must be ≥ 1".into(),
            ));
        }
        let fields = [
            ("rabi_single", self.rabi_single),
            ("vib_freq", self.vib_freq),
            ("zero_phonon_freq", self.zero_phonon_freq),
            ("huang_rhys", self.huang_rhys),
            ("cavity_freq_normal", self.cavity_freq_normal),
            ("kappa", self.kappa),
            ("gamma0", self.gamma0),
            ("k0", self.k0),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(HtcError::InvalidParameter(format!(
                    "{name} must be finite, got {v}"
                )));
            }
            if v < 0.0 {
                return Err(HtcError::InvalidParameter(format!(
                    "{name} must be ≥ 0, got {v}"
                )));
            }
        }
        if self.vib_freq == 0.0 {
            return Err(HtcError::InvalidParameter(
                "vib_freq must be > 0".into(),
            ));
        }
        if self.k0 == 0.0 {
            return Err(HtcError::InvalidParameter("k0 must be > 0".into()));
        }
        let scale = self.vib_freq;
        self.rabi_single /= scale;
        self.zero_phonon_freq /= scale;
        self.cavity_freq_normal /= scale;
        self.kappa /= scale;
        self.gamma0 /= scale;
        self.vib_freq = 1.0;
        Ok(self)
    }

    /// Vibronic coupling displacement λ = √(λ²).
    pub fn lambda(&self) -> f64 {
        self.huang_rhys.sqrt()
    }

    /// Vertical Franck-Condon transition frequency ω_e = ω00 + ω_v·λ².
    pub fn vertical_freq(&self) -> f64 {
        self.zero_phonon_freq + self.vib_freq * self.huang_rhys
    }

    /// Collective Rabi frequency √N·Ω.
    pub fn collective_rabi(&self) -> f64 {
        (self.n_molecules as f64).sqrt() * self.rabi_single
    }

    /// Cavity-exciton detuning ω00 − ω_c at normal incidence.
    pub fn detuning(&self) -> f64 {
        self.zero_phonon_freq - self.cavity_freq_normal
    }

    /// Absolute frequency scale ω00/ω_v; only matters for dispersion in
    /// absolute wave vectors.
    pub fn freq_scale_ratio(&self) -> f64 {
        self.zero_phonon_freq / self.vib_freq
    }
}

/// Default absolute scale ω00/ω_v: a 2 eV transition with a 0.1 eV vibration.
pub const DEFAULT_FREQ_SCALE_RATIO: f64 = 20.0;
/// Default dispersion scale, μm⁻¹.
pub const DEFAULT_K0: f64 = 1.0;

/// Quasi-mode dispersion ω_c(k) = ω_c·√(1 + (k/k0)²).
pub fn cavity_dispersion(k: f64, p: &ModelParams) -> f64 {
    p.cavity_freq_normal * (1.0 + (k / p.k0).powi(2)).sqrt()
}

/// Wave vector at which ω_c(k) = target, or `None` if target < ω_c(0).
pub fn dispersion_resonance_k(target: f64, p: &ModelParams) -> Option<f64> {
    let r = target / p.cavity_freq_normal;
    if r < 1.0 {
        None
    } else {
        Some(p.k0 * (r * r - 1.0).sqrt())
    }
}

/// Which diabatic polariton splitting to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplittingOrder {
    /// √N·Ω·|⟨0|ν̃⟩| between the bare photon and the bright vibronic state.
    Single,
    /// √(N−1)·Ω·|⟨0|ν̃⟩| between a phonon-photon dressed state and the
    /// matching two-particle material state.
    TwoParticle,
}

/// Diabatic polariton splitting in units of ω_v.
pub fn diabatic_splitting(
    n: usize,
    omega: f64,
    lambda: f64,
    nu_tilde: u32,
    order: SplittingOrder,
) -> Result<f64> {
    let scale = match order {
        SplittingOrder::Single => n as f64,
        SplittingOrder::TwoParticle => {
            if n < 2 {
                return Err(HtcError::BadRequest(
                    "two-particle splitting requires n ≥ 2".into(),
                ));
            }
            (n - 1) as f64
        }
    };
    let fc = franck_condon(0, nu_tilde, lambda)?.abs();
    Ok(scale.sqrt() * omega * fc)
}

/// Large-N expansion 1 − (1/2N)(1 + 1/4N) of the two-particle/single-particle
/// splitting ratio √((N−1)/N).
pub fn splitting_ratio_expansion(n: usize) -> f64 {
    let n = n as f64;
    1.0 - (1.0 / (2.0 * n)) * (1.0 + 1.0 / (4.0 * n))
}

/// Effective displacement λ_N = λ/(2√N) of the totally-symmetric mode in the
/// polaron decoupling regime.
pub fn polaron_displacement(n: usize, lambda: f64) -> f64 {
    lambda / (2.0 * (n as f64).sqrt())
}

/// Leakage emission strength e^{−λ²/4N} of the lower polariton manifold.
pub fn polaron_emission_strength(n: usize, lambda_sq: f64) -> f64 {
    (-lambda_sq / (4.0 * n as f64)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn fig6_params() -> ModelParams {
        let mut p = ModelParams::resonant(10, 0.6, 0.5);
        p.kappa = 1.0;
        p.gamma0 = 0.1;
        p
    }

    #[test]
    fn accepts_fig6_parameters() {
        let p = fig6_params().validated().unwrap();
        assert_eq!(p.n_molecules, 10);
        assert_abs_diff_eq!(p.collective_rabi(), 0.6, epsilon = 1e-12);
        assert_abs_diff_eq!(p.kappa, p.n_molecules as f64 * p.gamma0, epsilon = 1e-12);
    }

    #[test]
    fn rejects_zero_molecules() {
        let mut p = fig6_params();
        p.n_molecules = 0;
        let err = p.validated().unwrap_err().to_string();
        assert!(err.contains("n_molecules must be ≥ 1"), "{err}");
    }

    #[test]
    fn rejects_negative_huang_rhys() {
        let mut p = fig6_params();
        p.huang_rhys = -0.1;
        let err = p.validated().unwrap_err().to_string();
        assert!(err.contains("huang_rhys"), "{err}");
    }

    #[test]
    fn rejects_non_finite() {
        let mut p = fig6_params();
        p.kappa = f64::NAN;
        assert!(p.validated().is_err());
    }

    #[test]
    fn normalizes_to_vibrational_units() {
        let mut p = fig6_params();
        p.vib_freq = 0.1;
        p.kappa = 0.1;
        p.rabi_single = 0.6 / 10f64.sqrt() * 0.1;
        p.zero_phonon_freq = 2.0;
        p.cavity_freq_normal = 2.0;
        let p = p.validated().unwrap();
        assert_abs_diff_eq!(p.vib_freq, 1.0);
        assert_abs_diff_eq!(p.kappa, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.zero_phonon_freq, 20.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.collective_rabi(), 0.6, epsilon = 1e-12);
    }

    #[test]
    fn vertical_transition_frequency() {
        let p = fig6_params().validated().unwrap();
        assert_abs_diff_eq!(p.vertical_freq(), p.zero_phonon_freq + 0.5, epsilon = 1e-12);
    }

    #[test]
    fn dispersion_normal_incidence_and_analytic_point() {
        let p = fig6_params().validated().unwrap();
        assert_abs_diff_eq!(cavity_dispersion(0.0, &p), p.cavity_freq_normal);
        assert_abs_diff_eq!(
            cavity_dispersion(p.k0, &p),
            2f64.sqrt() * p.cavity_freq_normal,
            epsilon = 1e-12
        );
    }

    #[test]
    fn dispersion_anticrossing_wavevector() {
        // The first vibronic anticrossing sits where ω_c(k) = ω00 + ω_v.
        let p = fig6_params().validated().unwrap();
        let k = dispersion_resonance_k(p.zero_phonon_freq + 1.0, &p).unwrap();
        assert_abs_diff_eq!(cavity_dispersion(k, &p), p.zero_phonon_freq + 1.0, epsilon = 1e-10);
        // With k0 ≈ 3.44 μm⁻¹ this lands near the k ≈ 1.1 μm⁻¹ calibration.
        let mut p2 = fig6_params();
        p2.k0 = 3.44;
        let p2 = p2.validated().unwrap();
        let k2 = dispersion_resonance_k(p2.zero_phonon_freq + 1.0, &p2).unwrap();
        assert!((k2 - 1.1).abs() < 0.01, "k2 = {k2}");
    }

    #[test]
    fn single_particle_splitting_value() {
        // √NΩ = 0.6, λ² = 0.5, ν̃ = 0: 0.6·e^{-0.25} = 0.467280.
        let omega = 0.6 / 10f64.sqrt();
        let s = diabatic_splitting(10, omega, 0.5f64.sqrt(), 0, SplittingOrder::Single).unwrap();
        assert_abs_diff_eq!(s, 0.6 * (-0.25f64).exp(), epsilon = 1e-12);
        assert_abs_diff_eq!(s, 0.467281, epsilon = 1e-6);
    }

    #[test]
    fn two_particle_ratio() {
        let l = 0.5f64.sqrt();
        for nu in 0..4 {
            let s1 = diabatic_splitting(2, 0.3, l, nu, SplittingOrder::Single).unwrap();
            let s2 = diabatic_splitting(2, 0.3, l, nu, SplittingOrder::TwoParticle).unwrap();
            assert_abs_diff_eq!(s2 / s1, 0.5f64.sqrt(), epsilon = 1e-12);
        }
        let s1 = diabatic_splitting(10, 0.3, l, 0, SplittingOrder::Single).unwrap();
        let s2 = diabatic_splitting(10, 0.3, l, 0, SplittingOrder::TwoParticle).unwrap();
        assert_abs_diff_eq!(s2 / s1, 0.9f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(s2 / s1, 0.948683, epsilon = 1e-6);
    }

    #[test]
    fn two_particle_requires_dimer() {
        assert!(diabatic_splitting(1, 0.3, 0.5, 0, SplittingOrder::TwoParticle).is_err());
    }

    #[test]
    fn ratio_expansion_values() {
        assert_abs_diff_eq!(splitting_ratio_expansion(2), 0.718750, epsilon = 1e-12);
        assert_abs_diff_eq!(splitting_ratio_expansion(10), 0.948750, epsilon = 1e-12);
        assert!((splitting_ratio_expansion(10) - 0.9f64.sqrt()).abs() < 1e-4);
        assert!((splitting_ratio_expansion(1_000_000_000) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn polaron_displacement_values() {
        assert_abs_diff_eq!(polaron_displacement(10, 0.0), 0.0);
        assert_abs_diff_eq!(
            polaron_displacement(10, 0.5f64.sqrt()),
            0.111803,
            epsilon = 1e-6
        );
        assert_abs_diff_eq!(polaron_emission_strength(10, 0.5), 0.987578, epsilon = 1e-6);
    }
}
