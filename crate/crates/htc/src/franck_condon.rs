//! Franck-Condon overlap amplitudes ⟨ν|ν̃⟩ between the eigenstates of two
//! harmonic potentials displaced by λ in the dimensionless nuclear coordinate.
//!
//! Sign convention: ⟨0|ν̃⟩ = e^{−λ²/2}·λ^ν̃/√(ν̃!) ≥ 0; higher rows follow from
//! the displacement-operator recurrence.

use crate::error::{HtcError, Result};

/// Largest quantum number accepted; beyond this the closed-form cross-check
/// (which carries a factorial) leaves the f64 range.
pub const MAX_QUANTA: u32 = 170;

/// Dense table of overlap amplitudes f(ν, ν̃) up to `max_quanta` in both
/// indices.
#[derive(Debug, Clone)]
pub struct FranckCondonTable {
    lambda: f64,
    max_quanta: u32,
    /// Row-major, row = undisplaced ν, column = displaced ν̃.
    amplitudes: Vec<f64>,
}

impl FranckCondonTable {
    pub fn new(lambda: f64, max_quanta: u32) -> Result<Self> {
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(HtcError::InvalidParameter(format!(
                "lambda must be finite and ≥ 0, got {lambda}"
            )));
        }
        if max_quanta > MAX_QUANTA {
            return Err(HtcError::InvalidParameter(format!(
                "max_quanta {max_quanta} exceeds supported range {MAX_QUANTA}"
            )));
        }
        let n = (max_quanta + 1) as usize;
        let mut amp = vec![0.0; n * n];
        // d(m, n) = ⟨m|D(−λ)|n⟩ with D the displacement operator:
        //   d(0, 0)   = e^{−λ²/2}
        //   d(m+1, n) = (√n·d(m, n−1) − λ·d(m, n)) / √(m+1)
        //   d(m, n+1) = (√m·d(m−1, n) + λ·d(m, n)) / √(n+1)
        amp[0] = (-lambda * lambda / 2.0).exp();
        for nu_t in 1..n {
            amp[nu_t] = (lambda * amp[nu_t - 1]) / (nu_t as f64).sqrt();
        }
        for m in 1..n {
            for nu_t in 0..n {
                let below = amp[(m - 1) * n + nu_t];
                let diag = if nu_t >= 1 {
                    (nu_t as f64).sqrt() * amp[(m - 1) * n + nu_t - 1]
                } else {
                    0.0
                };
                amp[m * n + nu_t] = (diag - lambda * below) / (m as f64).sqrt();
            }
        }
        Ok(FranckCondonTable {
            lambda,
            max_quanta,
            amplitudes: amp,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn max_quanta(&self) -> u32 {
        self.max_quanta
    }

    /// Overlap amplitude f(ν, ν̃).
    pub fn amplitude(&self, nu: u32, nu_tilde: u32) -> f64 {
        assert!(nu <= self.max_quanta && nu_tilde <= self.max_quanta);
        let n = (self.max_quanta + 1) as usize;
        self.amplitudes[nu as usize * n + nu_tilde as usize]
    }

    /// Σ_ν̃ f(ν, ν̃)² over the stored columns.
    pub fn row_norm_sq(&self, nu: u32) -> f64 {
        (0..=self.max_quanta)
            .map(|nt| self.amplitude(nu, nt).powi(2))
            .sum()
    }
}

/// Single overlap amplitude ⟨ν|ν̃⟩; builds the recurrence up to the requested
/// quanta.
pub fn franck_condon(nu: u32, nu_tilde: u32, lambda: f64) -> Result<f64> {
    let max = nu.max(nu_tilde);
    if max > MAX_QUANTA {
        return Err(HtcError::InvalidParameter(format!(
            "quanta {max} exceeds supported range {MAX_QUANTA}"
        )));
    }
    let table = FranckCondonTable::new(lambda, max)?;
    Ok(table.amplitude(nu, nu_tilde))
}

/// Closed form f(0, ν̃) = e^{−λ²/2}·λ^ν̃/√(ν̃!), evaluated in log space.
pub fn franck_condon_ground_row(nu_tilde: u32, lambda: f64) -> f64 {
    if lambda == 0.0 {
        return if nu_tilde == 0 { 1.0 } else { 0.0 };
    }
    let mut log_fact = 0.0;
    for k in 1..=nu_tilde {
        log_fact += (k as f64).ln();
    }
    (-lambda * lambda / 2.0 + nu_tilde as f64 * lambda.ln() - 0.5 * log_fact).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Independent oracle: trapezoidal overlap integral of two harmonic
    /// oscillator wavefunctions, the second displaced by √2·λ in x.
    fn overlap_integral(nu: u32, nu_tilde: u32, lambda: f64) -> f64 {
        let x0 = 2f64.sqrt() * lambda;
        let (lo, hi, steps) = (-25.0, 25.0, 400_001usize);
        let dx = (hi - lo) / (steps - 1) as f64;
        let mut acc = 0.0;
        for i in 0..steps {
            let x = lo + i as f64 * dx;
            let w = if i == 0 || i == steps - 1 { 0.5 } else { 1.0 };
            acc += w * ho_wavefunction(nu, x) * ho_wavefunction(nu_tilde, x - x0) * dx;
        }
        acc
    }

    /// ψ_n(x) for the dimensionless harmonic oscillator, via the normalized
    /// three-term recurrence (stable, no explicit factorials).
    fn ho_wavefunction(n: u32, x: f64) -> f64 {
        let psi0 = (std::f64::consts::PI).powf(-0.25) * (-x * x / 2.0).exp();
        if n == 0 {
            return psi0;
        }
        let mut prev = psi0;
        let mut cur = 2f64.sqrt() * x * psi0;
        for k in 1..n {
            let next = ((2.0 / (k as f64 + 1.0)).sqrt() * x * cur)
                - ((k as f64 / (k as f64 + 1.0)).sqrt() * prev);
            prev = cur;
            cur = next;
        }
        cur
    }

    #[test]
    fn identity_at_zero_displacement() {
        let t = FranckCondonTable::new(0.0, 8).unwrap();
        for nu in 0..=8 {
            for nt in 0..=8 {
                let expect = if nu == nt { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(t.amplitude(nu, nt), expect, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn ground_row_values_match_quadrature_oracle() {
        let l = 0.5f64.sqrt();
        // Frozen from the quadrature oracle below.
        assert_abs_diff_eq!(franck_condon(0, 0, l).unwrap(), 0.778801, epsilon = 1e-6);
        assert_abs_diff_eq!(franck_condon(0, 1, l).unwrap(), 0.550695, epsilon = 1e-6);
        assert_abs_diff_eq!(
            franck_condon(0, 0, l).unwrap(),
            overlap_integral(0, 0, l).abs(),
            epsilon = 1e-9
        );
        assert_abs_diff_eq!(
            franck_condon(0, 1, l).unwrap(),
            overlap_integral(0, 1, l).abs(),
            epsilon = 1e-9
        );
    }

    #[test]
    fn general_elements_match_quadrature_oracle_in_magnitude() {
        for &lambda in &[0.3, 0.5f64.sqrt(), 1.2] {
            for nu in 0..4 {
                for nt in 0..4 {
                    let rec = franck_condon(nu, nt, lambda).unwrap();
                    let int = overlap_integral(nu, nt, lambda);
                    assert_abs_diff_eq!(rec.abs(), int.abs(), epsilon = 1e-8);
                }
            }
        }
    }

    #[test]
    fn recurrence_matches_closed_form_ground_row() {
        for &lambda in &[0.1, 0.5f64.sqrt(), 1.0, 1.5] {
            let t = FranckCondonTable::new(lambda, 12).unwrap();
            for nt in 0..=12 {
                assert_abs_diff_eq!(
                    t.amplitude(0, nt),
                    franck_condon_ground_row(nt, lambda),
                    epsilon = 1e-12
                );
            }
        }
    }

    #[test]
    fn row_norms_approach_unity() {
        for &lambda in &[0.1f64, 0.5, 1.0, 1.5] {
            let t = FranckCondonTable::new(lambda.sqrt(), 20).unwrap();
            assert!((t.row_norm_sq(0) - 1.0).abs() < 1e-10, "lambda² = {lambda}");
            assert!(t.row_norm_sq(0) <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn rejects_out_of_range_quanta() {
        assert!(franck_condon(0, 171, 0.5).is_err());
    }
}
