//! Metal permittivity.
//!
//! Two evaluations of the same Drude-type model are provided:
//!
//! * lossless: `εm(ω) = 1 − ωp²/ω² + c_r ω²/ωp²`
//! * lossy:    `εm(ω) = 1 − ωp²/(ω(ω + iΓ)) + c_r ω²/ωp² + i δεm^i`
//!
//! The real correction of the lossy model uses the same `c_r ω²/ωp²` term as
//! the lossless one, so both agree exactly when `Γ = 0` and `δεm^i = 0`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MaterialError {
    #[error("frequency must be positive and finite, got {0} rad/s")]
    NonPositiveFrequency(f64),
    #[error("invalid dielectric model: {0}")]
    InvalidModel(String),
    #[error("no real surface plasma frequency for real_correction_coeff = {0}")]
    NoSurfaceFrequency(f64),
}

/// Drude-type metal with real and imaginary corrections.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DielectricModel {
    /// ωp (rad/s).
    pub plasma_frequency: f64,
    /// Γ (rad/s).
    pub damping_rate: f64,
    /// Coefficient `c_r` of the real correction `c_r ω²/ωp²`.
    pub real_correction_coeff: f64,
    /// Constant imaginary correction δεm^i.
    pub imag_correction: f64,
}

impl DielectricModel {
    /// Silver: ωp = 1.402e16 rad/s, Γ = 6.25e13 rad/s, c_r = 29, δεm^i = 0.22.
    pub const SILVER: DielectricModel = DielectricModel {
        plasma_frequency: 1.402e16,
        damping_rate: 6.25e13,
        real_correction_coeff: 29.0,
        imag_correction: 0.22,
    };

    pub fn new(
        plasma_frequency: f64,
        damping_rate: f64,
        real_correction_coeff: f64,
        imag_correction: f64,
    ) -> Result<Self, MaterialError> {
        let model = Self {
            plasma_frequency,
            damping_rate,
            real_correction_coeff,
            imag_correction,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn silver() -> Self {
        Self::SILVER
    }

    /// Looks up a built-in preset by name.
    pub fn preset(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "silver" | "ag" => Some(Self::SILVER),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<(), MaterialError> {
        let finite = [
            self.plasma_frequency,
            self.damping_rate,
            self.real_correction_coeff,
            self.imag_correction,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(MaterialError::InvalidModel(
                "parameters must be finite".into(),
            ));
        }
        if self.plasma_frequency <= 0.0 {
            return Err(MaterialError::InvalidModel(format!(
                "plasma_frequency must be > 0, got {}",
                self.plasma_frequency
            )));
        }
        if self.damping_rate < 0.0 {
            return Err(MaterialError::InvalidModel(format!(
                "damping_rate must be >= 0, got {}",
                self.damping_rate
            )));
        }
        if self.imag_correction < 0.0 {
            return Err(MaterialError::InvalidModel(format!(
                "imag_correction must be >= 0, got {}",
                self.imag_correction
            )));
        }
        Ok(())
    }

    /// Same model with Γ = 0 and δεm^i = 0.
    pub fn lossless(&self) -> Self {
        Self {
            damping_rate: 0.0,
            imag_correction: 0.0,
            ..*self
        }
    }

    pub fn is_lossless(&self) -> bool {
        self.damping_rate == 0.0 && self.imag_correction == 0.0
    }

    pub fn eps_lossless(&self, omega: f64) -> Result<f64, MaterialError> {
        check_frequency(omega)?;
        Ok(self.eps_real_unchecked(omega))
    }

    pub fn eps_lossy(&self, omega: f64) -> Result<Complex64, MaterialError> {
        check_frequency(omega)?;
        Ok(self.eps_complex_unchecked(omega))
    }

    /// Positive ω with `eps_lossless(ω) = −1`.
    ///
    /// With `x = ω²/ωp²` the condition is `c_r x² + 2x − 1 = 0`, whose positive
    /// root is written as `1/(1 + √(1 + c_r))` to avoid cancellation.
    pub fn surface_plasma_frequency(&self) -> Result<f64, MaterialError> {
        let c = self.real_correction_coeff;
        if 1.0 + c < 0.0 {
            return Err(MaterialError::NoSurfaceFrequency(c));
        }
        let x = 1.0 / (1.0 + (1.0 + c).sqrt());
        Ok(self.plasma_frequency * x.sqrt())
    }

    /// Positive ω with `eps_lossless(ω) = 0`, the upper edge of the window in
    /// which bound TM modes exist (`c_r x² + x − 1 = 0`).
    pub fn zero_permittivity_frequency(&self) -> Result<f64, MaterialError> {
        let c = self.real_correction_coeff;
        if 1.0 + 4.0 * c < 0.0 {
            return Err(MaterialError::NoSurfaceFrequency(c));
        }
        let x = 2.0 / (1.0 + (1.0 + 4.0 * c).sqrt());
        Ok(self.plasma_frequency * x.sqrt())
    }

    #[inline]
    pub(crate) fn eps_real_unchecked(&self, omega: f64) -> f64 {
        let wp2 = self.plasma_frequency * self.plasma_frequency;
        let w2 = omega * omega;
        1.0 - wp2 / w2 + self.real_correction_coeff * w2 / wp2
    }

    #[inline]
    pub(crate) fn eps_complex_unchecked(&self, omega: f64) -> Complex64 {
        let wp2 = self.plasma_frequency * self.plasma_frequency;
        let w2 = omega * omega;
        let g = self.damping_rate;
        // ωp²/(ω(ω + iΓ)) = ωp²/(ω² + Γ²) − i ωp² Γ/(ω(ω² + Γ²))
        let denom = w2 + g * g;
        let re = 1.0 - wp2 / denom + self.real_correction_coeff * w2 / wp2;
        let im = wp2 * g / (omega * denom) + self.imag_correction;
        Complex64::new(re, im)
    }
}

impl Default for DielectricModel {
    fn default() -> Self {
        Self::SILVER
    }
}

fn check_frequency(omega: f64) -> Result<(), MaterialError> {
    if omega > 0.0 && omega.is_finite() {
        Ok(())
    } else {
        Err(MaterialError::NonPositiveFrequency(omega))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const SILVER: DielectricModel = DielectricModel::SILVER;

    #[test]
    fn lossless_at_plasma_frequency() {
        let eps = SILVER.eps_lossless(SILVER.plasma_frequency).unwrap();
        assert_relative_eq!(eps, 29.0, max_relative = 1e-15);
    }

    #[test]
    fn bare_drude_symmetry_point() {
        let bare = DielectricModel {
            real_correction_coeff: 0.0,
            ..SILVER
        };
        let eps = bare
            .eps_lossless(bare.plasma_frequency / 2f64.sqrt())
            .unwrap();
        assert_relative_eq!(eps, -1.0, max_relative = 1e-14);
        assert_relative_eq!(
            bare.surface_plasma_frequency().unwrap(),
            bare.plasma_frequency / 2f64.sqrt(),
            max_relative = 1e-15
        );
    }

    #[test]
    fn lossless_at_5e15() {
        // 30-digit evaluation of 1 - (1.402e16/5e15)^2 + 29 (5e15/1.402e16)^2
        let eps = SILVER.eps_lossless(5.0e15).unwrap();
        assert_relative_eq!(eps, -3.173_982_317_528_861_4, max_relative = 1e-14);
    }

    #[test]
    fn lossy_at_plasma_frequency() {
        // 30-digit evaluation of 1 - ωp²/(ωp(ωp + iΓ)) + 29 + 0.22i
        let eps = SILVER.eps_lossy(SILVER.plasma_frequency).unwrap();
        assert_relative_eq!(eps.re, 29.000_019_872_631_377, max_relative = 1e-14);
        assert_relative_eq!(eps.im, 0.224_457_828_670_509_2, max_relative = 1e-13);
    }

    #[test]
    fn loss_free_reduction_is_exact() {
        let lossless = SILVER.lossless();
        for i in 1..400 {
            let w = 1e13 * i as f64 * 5.0;
            let a = lossless.eps_lossy(w).unwrap();
            let b = lossless.eps_lossless(w).unwrap();
            assert_eq!(a.re, b);
            assert_eq!(a.im, 0.0);
        }
    }

    #[test]
    fn absorptive_imaginary_part() {
        for i in 1..200 {
            let w = 3e13 * i as f64;
            assert!(SILVER.eps_lossy(w).unwrap().im >= 0.22);
        }
    }

    #[test]
    fn surface_plasma_frequency_back_substitution() {
        let wsp = SILVER.surface_plasma_frequency().unwrap();
        let eps = SILVER.eps_lossless(wsp).unwrap();
        assert!((eps + 1.0).abs() < 1e-12, "eps(wsp) = {eps}");
        // x = (-2 + √120)/58 from the quadratic 29x² + 2x − 1 = 0
        let x = (-2.0 + 120f64.sqrt()) / 58.0;
        assert_relative_eq!(
            wsp / SILVER.plasma_frequency,
            x.sqrt(),
            max_relative = 1e-12
        );
        assert_relative_eq!(wsp / SILVER.plasma_frequency, 0.39293, max_relative = 1e-4);
    }

    #[test]
    fn zero_permittivity_frequency_is_root() {
        let w0 = SILVER.zero_permittivity_frequency().unwrap();
        assert!(SILVER.eps_lossless(w0).unwrap().abs() < 1e-12);
        assert!(w0 > SILVER.surface_plasma_frequency().unwrap());
    }

    #[test]
    fn bare_drude_is_monotone() {
        let bare = DielectricModel {
            real_correction_coeff: 0.0,
            ..SILVER
        };
        let mut prev = f64::NEG_INFINITY;
        for i in 1..=1000 {
            let e = bare.eps_lossless(1e13 * i as f64).unwrap();
            assert!(e > prev);
            prev = e;
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(
            SILVER.eps_lossless(0.0),
            Err(MaterialError::NonPositiveFrequency(_))
        ));
        assert!(SILVER.eps_lossy(-1.0).is_err());
        assert!(SILVER.eps_lossless(f64::NAN).is_err());
        assert!(DielectricModel::new(0.0, 0.0, 0.0, 0.0).is_err());
        assert!(DielectricModel::new(1e16, -1.0, 0.0, 0.0).is_err());
        assert!(DielectricModel::new(1e16, 0.0, 0.0, -0.1).is_err());
        let bad = DielectricModel {
            real_correction_coeff: -2.0,
            ..SILVER
        };
        assert!(bad.surface_plasma_frequency().is_err());
    }

    #[test]
    fn preset_lookup() {
        assert_eq!(DielectricModel::preset("Silver"), Some(SILVER));
        assert_eq!(DielectricModel::preset("gold"), None);
    }
}
