//! Transfer of a two-component cat state `N(|α⟩ + e^{iφ}|−α⟩)` to the LRSPP
//! mode and its decoherence along the strip.
//!
//! After the beamsplitter and a loss `e^{−2κ0 x}` the LRSPP state is
//!
//! ```text
//! ρ = N'² [ |a⟩⟨a| + |−a⟩⟨−a| + c0 c(x) (|a⟩⟨−a| + |−a⟩⟨a|) ],
//! a = α sin g e^{−κ0 x},  c0 = e^{−2α² cos²g},
//! c(x) = exp[−2α² sin²g (1 − e^{−2κ0 x})]
//! ```
//!
//! with `N'² = 1/(2 + 2e^{−2α²})` from unit trace. In the `|±⟩` basis of
//! even/odd cat states it is diagonal with `λ± = N'² (1 ± q)(1 ± c0 c(x))`,
//! `q = ⟨a|−a⟩ = e^{−2a²}`.

pub mod fock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Below this effective amplitude the `|±⟩` basis is degenerate and the
/// state is reported as vacuum.
pub const DEGENERATE_AMPLITUDE: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StateError {
    #[error("domain error: {0}")]
    Domain(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CatState {
    pub alpha: f64,
    #[serde(default)]
    pub phi: f64,
}

impl CatState {
    pub fn new(alpha: f64, phi: f64) -> Result<Self, StateError> {
        let cat = Self { alpha, phi };
        cat.normalization()?;
        Ok(cat)
    }

    pub fn even(alpha: f64) -> Self {
        Self { alpha, phi: 0.0 }
    }

    /// `N = [2 + 2 e^{−2α²} cos φ]^{−1/2}`.
    pub fn normalization(&self) -> Result<f64, StateError> {
        let denom = 2.0 + 2.0 * (-2.0 * self.alpha * self.alpha).exp() * self.phi.cos();
        if !(self.alpha.is_finite() && self.phi.is_finite()) || !(denom > 0.0) {
            return Err(StateError::Domain(format!(
                "cat state alpha = {}, phi = {} is not normalizable",
                self.alpha, self.phi
            )));
        }
        Ok(denom.sqrt().recip())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CatDensity {
    pub alpha: f64,
    pub g: f64,
    /// κ0 x.
    pub kappa_x: f64,
    pub a_eff: f64,
    pub offdiag: f64,
    pub n_prime_sq: f64,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub entropy: f64,
}

impl CatDensity {
    pub fn trace(&self) -> f64 {
        let q = (-2.0 * self.a_eff * self.a_eff).exp();
        self.n_prime_sq * (2.0 + 2.0 * self.offdiag * q)
    }
}

fn check_inputs(cat: &CatState, g: f64, kappa0: f64, x: f64) -> Result<(), StateError> {
    cat.normalization()?;
    if !(0.0..=std::f64::consts::FRAC_PI_2 + 1e-12).contains(&g) {
        return Err(StateError::Domain(format!("g = {g} outside [0, π/2]")));
    }
    if !(kappa0 >= 0.0 && x >= 0.0) {
        return Err(StateError::Domain(format!(
            "need kappa0 >= 0 and x >= 0, got {kappa0}, {x}"
        )));
    }
    Ok(())
}

/// Reduced LRSPP state right after the coupler.
pub fn transfer_cat(cat: &CatState, g: f64) -> Result<CatDensity, StateError> {
    propagate_cat(cat, g, 0.0, 0.0)
}

/// LRSPP state after propagating a distance `x` with loss constant `kappa0`.
/// A non-zero φ is evaluated in a truncated number basis.
pub fn propagate_cat(
    cat: &CatState,
    g: f64,
    kappa0: f64,
    x: f64,
) -> Result<CatDensity, StateError> {
    check_inputs(cat, g, kappa0, x)?;
    let a2 = cat.alpha * cat.alpha;
    let kx = kappa0 * x;
    let (s, c) = g.sin_cos();
    let survive = (-2.0 * kx).exp();
    let a_eff = cat.alpha.abs() * s * (-kx).exp();
    // ln(c0 c(x)) = −2α²(cos²g + sin²g (1 − e^{−2κ0x}))
    let log_off = -2.0 * a2 * (c * c - s * s * (-2.0 * kx).exp_m1());
    let offdiag = log_off.exp();
    let n_prime_sq = 1.0 / (2.0 + 2.0 * (-2.0 * a2).exp());

    let (lambda_plus, lambda_minus) = if cat.phi != 0.0 {
        let spec = fock::propagate(cat, g, survive)?;
        let top = spec.eigenvalues.first().copied().unwrap_or(1.0);
        let second = spec.eigenvalues.get(1).copied().unwrap_or(0.0).max(0.0);
        (top, second)
    } else {
        closed_form_eigenvalues(a_eff, log_off, n_prime_sq)
    };
    let entropy = if cat.phi != 0.0 {
        binary_entropy(lambda_plus, lambda_minus)
    } else {
        von_neumann_entropy(lambda_plus, lambda_minus)?
    };
    Ok(CatDensity {
        alpha: cat.alpha,
        g,
        kappa_x: kx,
        a_eff,
        offdiag,
        n_prime_sq,
        lambda_plus,
        lambda_minus,
        entropy,
    })
}

fn closed_form_eigenvalues(a_eff: f64, log_off: f64, n_prime_sq: f64) -> (f64, f64) {
    if a_eff < DEGENERATE_AMPLITUDE {
        return (1.0, 0.0);
    }
    let ln_q = -2.0 * a_eff * a_eff;
    let (one_plus_q, one_minus_q) = (1.0 + ln_q.exp(), -ln_q.exp_m1());
    let (one_plus_c, one_minus_c) = (1.0 + log_off.exp(), -log_off.exp_m1());
    let lp = n_prime_sq * one_plus_q * one_plus_c;
    let lm = n_prime_sq * one_minus_q * one_minus_c;
    (lp, lm)
}

/// Eigenvalues `(λ+, λ−)` of a cat density.
pub fn eigen_decompose(density: &CatDensity) -> (f64, f64) {
    (density.lambda_plus, density.lambda_minus)
}

/// `−λ+ ln λ+ − λ− ln λ−` with `0 ln 0 = 0`.
pub fn von_neumann_entropy(lambda_plus: f64, lambda_minus: f64) -> Result<f64, StateError> {
    let ok = |l: f64| (0.0..=1.0).contains(&l);
    if !ok(lambda_plus) || !ok(lambda_minus) || (lambda_plus + lambda_minus - 1.0).abs() > 1e-9 {
        return Err(StateError::Domain(format!(
            "({lambda_plus}, {lambda_minus}) is not a probability pair"
        )));
    }
    Ok(binary_entropy(lambda_plus, lambda_minus))
}

fn binary_entropy(a: f64, b: f64) -> f64 {
    let h = |l: f64| if l > 0.0 { -l * l.ln() } else { 0.0 };
    h(a) + h(b)
}
