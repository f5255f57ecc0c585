//! Bound TM modes of an air/metal/air strip of thickness `d1`.
//!
//! Both branches satisfy
//!
//! ```text
//! e^{−νm d1} = ± (νm + εm ν0) / (νm − εm ν0),
//! νm² = k² − εm ω²/c²,   ν0² = k² − ω²/c²
//! ```
//!
//! with `+` for the antisymmetric branch (ω+, higher frequency at fixed k) and
//! `−` for the symmetric one (ω−). Internally the pole-free form
//! `D = e^{−νm d1}(νm − εm ν0) ∓ (νm + εm ν0)` is bracketed; its sign at the
//! ends of the physical window is fixed analytically, so plain bisection is
//! safe.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::materials::{DielectricModel, MaterialError};
use crate::SPEED_OF_LIGHT as C;

/// Default ceiling of the `solve_k` window in units of ω/c: the light line of
/// an ε1 = 1.51 prism. Modes beyond it cannot be reached by the ATR coupler.
pub const DEFAULT_PRISM_PERMITTIVITY: f64 = 1.51;

/// Above this `νm d1` the two branches are numerically indistinguishable from
/// the single-interface mode (`e^{−36} ≈ 2e-16`).
const MERGE_THRESHOLD: f64 = 36.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    /// ω+ : `+` sign, antisymmetric tangential field, long-range.
    #[serde(rename = "plus")]
    Antisymmetric,
    /// ω− : `−` sign, symmetric tangential field.
    #[serde(rename = "minus")]
    Symmetric,
}

impl Branch {
    pub const BOTH: [Branch; 2] = [Branch::Antisymmetric, Branch::Symmetric];

    pub fn sign(self) -> f64 {
        match self {
            Branch::Antisymmetric => 1.0,
            Branch::Symmetric => -1.0,
        }
    }

    pub fn other(self) -> Branch {
        match self {
            Branch::Antisymmetric => Branch::Symmetric,
            Branch::Symmetric => Branch::Antisymmetric,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Branch::Antisymmetric => "plus",
            Branch::Symmetric => "minus",
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Branch {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "plus" | "+" | "antisymmetric" => Ok(Branch::Antisymmetric),
            "minus" | "-" | "symmetric" => Ok(Branch::Symmetric),
            other => Err(format!("unknown branch `{other}` (expected plus or minus)")),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DispersionError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("no bound {branch} mode at d1 = {d1:e} m: {detail}")]
    NoBoundMode {
        branch: Branch,
        d1: f64,
        detail: String,
    },
    #[error("complex root search did not converge after {iterations} iterations (|F| = {residual:e}, last K = {last})")]
    Convergence {
        iterations: usize,
        residual: f64,
        last: Complex64,
    },
    #[error("group-velocity stencil failed at ω = {omega:e} rad/s: {detail}")]
    Stencil { omega: f64, detail: String },
    #[error("no matching angle: ck/(ω√ε1) = {ratio} exceeds 1")]
    NoMatchingAngle { ratio: f64 },
    #[error(transparent)]
    Material(#[from] MaterialError),
}

/// One point on a dispersion branch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispersionSolution {
    pub branch: Branch,
    /// Propagation constant (rad/m).
    pub k: f64,
    /// Angular frequency (rad/s).
    pub omega: f64,
    /// Decay constant in the metal (1/m).
    pub nu_m: f64,
    /// Decay constant in the air (1/m).
    pub nu_0: f64,
    /// Strip thickness (m).
    pub d1: f64,
    /// Lossless metal permittivity at `omega`.
    pub eps_m: f64,
    /// Set when `νm d1` is so large that both branches collapse onto the
    /// single-interface mode; the point then solves `νm + εm ν0 = 0`.
    pub merged: bool,
}

impl DispersionSolution {
    /// `|e^{−νm d1} ∓ (νm + εm ν0)/(νm − εm ν0)|`.
    pub fn residual(&self) -> f64 {
        let ratio = (self.nu_m + self.eps_m * self.nu_0) / (self.nu_m - self.eps_m * self.nu_0);
        ((-self.nu_m * self.d1).exp() - self.branch.sign() * ratio).abs()
    }
}

/// Complex propagation constant `K = k + iκ` of the lossy mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexWavenumber {
    pub k: f64,
    pub kappa: f64,
}

impl ComplexWavenumber {
    /// 1/e intensity propagation length `1/(2κ)`.
    pub fn propagation_length(&self) -> f64 {
        0.5 / self.kappa
    }
}

/// Root finder for both branches of a given metal.
///
/// Real solves always use the lossless permittivity; the lossy one enters
/// only through [`DispersionSolver::complex_wavenumber`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionSolver {
    model: DielectricModel,
    max_index: f64,
}

impl DispersionSolver {
    pub fn new(model: DielectricModel) -> Self {
        Self {
            model,
            max_index: DEFAULT_PRISM_PERMITTIVITY.sqrt(),
        }
    }

    /// Sets the `solve_k` window to `k ≤ n ω/c`.
    pub fn with_max_index(mut self, n: f64) -> Self {
        self.max_index = n;
        self
    }

    pub fn model(&self) -> &DielectricModel {
        &self.model
    }

    pub fn max_index(&self) -> f64 {
        self.max_index
    }

    /// `(D, νm, ν0, εm)` for the real problem.
    fn real_residual(&self, branch: Branch, k: f64, omega: f64, d1: f64) -> (f64, f64, f64, f64) {
        let eps = self.model.eps_real_unchecked(omega);
        let k0 = omega / C;
        let nu_m = (k * k - eps * k0 * k0).max(0.0).sqrt();
        let nu_0 = (k * k - k0 * k0).max(0.0).sqrt();
        let d = (-nu_m * d1).exp() * (nu_m - eps * nu_0) - branch.sign() * (nu_m + eps * nu_0);
        (d, nu_m, nu_0, eps)
    }

    fn single_interface_residual(&self, k: f64, omega: f64) -> f64 {
        let eps = self.model.eps_real_unchecked(omega);
        let k0 = omega / C;
        let nu_m = (k * k - eps * k0 * k0).max(0.0).sqrt();
        let nu_0 = (k * k - k0 * k0).max(0.0).sqrt();
        nu_m + eps * nu_0
    }

    fn make_solution(
        &self,
        branch: Branch,
        k: f64,
        omega: f64,
        d1: f64,
        merged: bool,
    ) -> DispersionSolution {
        let (_, nu_m, nu_0, eps_m) = self.real_residual(branch, k, omega, d1);
        DispersionSolution {
            branch,
            k,
            omega,
            nu_m,
            nu_0,
            d1,
            eps_m,
            merged,
        }
    }

    /// Frequency of `branch` at propagation constant `k`.
    ///
    /// The search window is `ω ∈ (0, min(ck, ω_ε0))`, where `ω_ε0` is the
    /// frequency at which `εm = 0`. The antisymmetric branch may lie above
    /// ω_sp at intermediate k.
    pub fn solve_omega(
        &self,
        branch: Branch,
        k: f64,
        d1: f64,
    ) -> Result<DispersionSolution, DispersionError> {
        check_positive("k", k)?;
        check_positive("d1", d1)?;
        let w_eps0 = self.model.zero_permittivity_frequency()?;
        let hi = (C * k * (1.0 - 1e-12)).min(w_eps0 * (1.0 - 1e-9));
        let lo = hi * 1e-6;
        let f = |w: f64| self.real_residual(branch, k, w, d1).0;
        let omega = bisect(f, lo, hi).ok_or_else(|| DispersionError::NoBoundMode {
            branch,
            d1,
            detail: format!(
                "no sign change of the dispersion residual below ω = {hi:e} rad/s at k = {k:e}"
            ),
        })?;
        let sol = self.make_solution(branch, k, omega, d1, false);
        if sol.nu_m * d1 > MERGE_THRESHOLD {
            let omega =
                bisect(|w| self.single_interface_residual(k, w), lo, hi).ok_or_else(|| {
                    DispersionError::NoBoundMode {
                        branch,
                        d1,
                        detail: "single-interface limit has no root".into(),
                    }
                })?;
            return Ok(self.make_solution(branch, k, omega, d1, true));
        }
        Ok(sol)
    }

    /// Propagation constant of `branch` at frequency `omega`, searched in
    /// `k ∈ (ω/c, n_max ω/c]`.
    pub fn solve_k(
        &self,
        branch: Branch,
        omega: f64,
        d1: f64,
    ) -> Result<DispersionSolution, DispersionError> {
        check_positive("omega", omega)?;
        check_positive("d1", d1)?;
        let w_sp = self.model.surface_plasma_frequency()?;
        if omega >= w_sp {
            return Err(DispersionError::InvalidInput(format!(
                "omega = {omega:e} rad/s must lie below the surface plasma frequency {w_sp:e} rad/s"
            )));
        }
        let k0 = omega / C;
        let lo = k0 * (1.0 + 1e-12);
        let hi = k0 * self.max_index;
        if hi <= lo {
            return Err(DispersionError::InvalidInput(format!(
                "max_index = {} leaves an empty k window",
                self.max_index
            )));
        }
        let k =
            bisect(|k| self.real_residual(branch, k, omega, d1).0, lo, hi).ok_or_else(|| {
                DispersionError::NoBoundMode {
                    branch,
                    d1,
                    detail: format!(
                        "no root for k ≤ {:.4} ω/c at ω = {omega:e} rad/s",
                        self.max_index
                    ),
                }
            })?;
        let sol = self.make_solution(branch, k, omega, d1, false);
        if sol.nu_m * d1 > MERGE_THRESHOLD {
            let k =
                bisect(|k| self.single_interface_residual(k, omega), lo, hi).ok_or_else(|| {
                    DispersionError::NoBoundMode {
                        branch,
                        d1,
                        detail: "single-interface limit outside the k window".into(),
                    }
                })?;
            return Ok(self.make_solution(branch, k, omega, d1, true));
        }
        Ok(sol)
    }

    /// Complex root `K = k + iκ` with the lossy permittivity, by Newton
    /// iteration seeded at the lossless root.
    pub fn complex_wavenumber(
        &self,
        branch: Branch,
        omega: f64,
        d1: f64,
    ) -> Result<ComplexWavenumber, DispersionError> {
        let seed = DispersionSolver {
            model: self.model.lossless(),
            ..*self
        }
        .solve_k(branch, omega, d1)?;
        let eps = self.model.eps_complex_unchecked(omega);
        let k0 = omega / C;

        if seed.merged {
            let kk = k0 * (eps / (eps + 1.0)).sqrt();
            return Ok(ComplexWavenumber {
                k: kk.re,
                kappa: kk.im.abs(),
            });
        }

        let s = branch.sign();
        let f = |kk: Complex64| -> Complex64 {
            let nu_m = (kk * kk - eps * k0 * k0).sqrt();
            let nu_0 = (kk * kk - k0 * k0).sqrt();
            (-nu_m * d1).exp() * (nu_m - eps * nu_0) - s * (nu_m + eps * nu_0)
        };

        const MAX_ITER: usize = 100;
        let mut kk = Complex64::new(seed.k, 0.0);
        let mut val = f(kk);
        for _ in 0..MAX_ITER {
            let h = 1e-7 * kk.norm();
            let deriv = (f(kk + h) - f(kk - h)) / (2.0 * h);
            if deriv.norm() == 0.0 || !deriv.is_finite() {
                break;
            }
            let step = val / deriv;
            kk -= step;
            val = f(kk);
            if step.norm() <= 1e-12 * kk.norm() {
                return Ok(ComplexWavenumber {
                    k: kk.re,
                    kappa: kk.im,
                });
            }
        }
        Err(DispersionError::Convergence {
            iterations: MAX_ITER,
            residual: val.norm(),
            last: kk,
        })
    }

    /// `vG = (∂k/∂ω)^{-1}` on the lossless branch, by a central difference of
    /// [`Self::solve_k`] with relative step 1e-5.
    pub fn group_velocity(
        &self,
        branch: Branch,
        omega: f64,
        d1: f64,
    ) -> Result<f64, DispersionError> {
        const STEP: f64 = 1e-5;
        let stencil = |w: f64| {
            self.solve_k(branch, w, d1)
                .map(|s| s.k)
                .map_err(|e| DispersionError::Stencil {
                    omega,
                    detail: e.to_string(),
                })
        };
        let h = STEP * omega;
        let kp = stencil(omega + h)?;
        let km = stencil(omega - h)?;
        let dk_dw = (kp - km) / (2.0 * h);
        let vg = 1.0 / dk_dw;
        if !(vg > 0.0 && vg < C) {
            return Err(DispersionError::Stencil {
                omega,
                detail: format!("non-physical group velocity {vg:e} m/s"),
            });
        }
        Ok(vg)
    }
}

/// Incidence angle θ in a prism of permittivity `eps_prism` that puts the
/// in-plane photon wavevector `√ε1 (ω/c) sinθ` on `k`.
pub fn coupling_angle(omega: f64, k: f64, eps_prism: f64) -> Result<f64, DispersionError> {
    check_positive("omega", omega)?;
    check_positive("k", k)?;
    if !(eps_prism > 1.0) {
        return Err(DispersionError::InvalidInput(format!(
            "eps_prism must exceed 1, got {eps_prism}"
        )));
    }
    let ratio = C * k / (omega * eps_prism.sqrt());
    if ratio > 1.0 {
        return Err(DispersionError::NoMatchingAngle { ratio });
    }
    Ok(ratio.asin())
}

/// Critical angle `arcsin(1/√ε1)` of the prism/air interface.
pub fn critical_angle(eps_prism: f64) -> f64 {
    (1.0 / eps_prism.sqrt()).asin()
}

fn check_positive(name: &str, v: f64) -> Result<(), DispersionError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(DispersionError::InvalidInput(format!(
            "{name} must be positive, got {v}"
        )))
    }
}

/// Bisection to full double precision followed by one secant polish inside
/// the final bracket. Returns `None` without a sign change.
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> Option<f64> {
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Some(lo);
    }
    if f_hi == 0.0 {
        return Some(hi);
    }
    if !(f_lo.is_finite() && f_hi.is_finite()) || f_lo.signum() == f_hi.signum() {
        return None;
    }
    let mut f_hi = f_hi;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Some(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
            f_hi = f_mid;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi.abs() {
            break;
        }
    }
    let secant = lo - f_lo * (hi - lo) / (f_hi - f_lo);
    let pick = if secant.is_finite() && secant >= lo && secant <= hi {
        secant
    } else {
        0.5 * (lo + hi)
    };
    Some(pick)
}
