//! Piecewise-exponential TM field profiles.
//!
//! Profiles hold the vector potential `A(z) = (A_x, A_z)` of a mode with
//! in-plane dependence `e^{ikx}`. Every term of a region contributes
//! `a · e^{s (z − z0)}` with complex rate `s`; transversality fixes
//! `A_z = −ik A_x / s` term by term.
//!
//! Two profiles are built here:
//!
//! * the strip mode φ± (air / metal `d1` / air), lossless metal, unit
//!   x-amplitude on the upper air side at z = 0⁻;
//! * the attenuated-total-reflection field Ψ (prism / air gap `d2` / metal /
//!   air) for a unit incident wave, solved with a stable admittance
//!   recursion.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dispersion::DispersionSolution;
use crate::materials::DielectricModel;
use crate::{HBAR, SPEED_OF_LIGHT as C, VACUUM_PERMITTIVITY};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModeError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("singular boundary system at {interface}: {detail}")]
    Singular {
        interface: &'static str,
        detail: String,
    },
    #[error("divergent integral over [{z_lo:e}, {z_hi:e}]: term does not decay")]
    Divergent { z_lo: f64, z_hi: f64 },
}

/// One exponential term `a · e^{rate (z − z_offset)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpTerm {
    pub amplitude_x: Complex64,
    pub amplitude_z: Complex64,
    /// Signed complex rate `s`.
    pub rate: Complex64,
    pub z_offset: f64,
}

impl ExpTerm {
    /// Transverse term with `A_z = −ik A_x / s`.
    pub fn transverse(amplitude_x: Complex64, rate: Complex64, z_offset: f64, k: f64) -> Self {
        Self {
            amplitude_x,
            amplitude_z: -I * k * amplitude_x / rate,
            rate,
            z_offset,
        }
    }

    #[inline]
    fn envelope(&self, z: f64) -> Complex64 {
        (self.rate * (z - self.z_offset)).exp()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub z_lo: f64,
    pub z_hi: f64,
    pub permittivity: Complex64,
    pub terms: Vec<ExpTerm>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseExpProfile {
    regions: Vec<Region>,
}

/// Which side of an interface to evaluate on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Below,
    Above,
}

impl PiecewiseExpProfile {
    /// Regions must be ordered and tile the real line.
    pub fn new(regions: Vec<Region>) -> Result<Self, ModeError> {
        let Some(first) = regions.first() else {
            return Err(ModeError::InvalidProfile("no regions".into()));
        };
        if first.z_lo != f64::NEG_INFINITY {
            return Err(ModeError::InvalidProfile(
                "first region must start at -inf".into(),
            ));
        }
        if regions.last().unwrap().z_hi != f64::INFINITY {
            return Err(ModeError::InvalidProfile(
                "last region must end at +inf".into(),
            ));
        }
        for (i, r) in regions.iter().enumerate() {
            if !(r.z_lo < r.z_hi) {
                return Err(ModeError::InvalidProfile(format!("region {i} is empty")));
            }
            if i > 0 && regions[i - 1].z_hi != r.z_lo {
                return Err(ModeError::InvalidProfile(format!(
                    "gap or overlap between regions {} and {i}",
                    i - 1
                )));
            }
        }
        Ok(Self { regions })
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    /// Interior interface positions.
    pub fn interfaces(&self) -> Vec<f64> {
        self.regions[1..].iter().map(|r| r.z_lo).collect()
    }

    fn region_index(&self, z: f64, side: Side) -> usize {
        let n = self.regions.len();
        for (i, r) in self.regions.iter().enumerate() {
            let inside = match side {
                Side::Above => z >= r.z_lo && z < r.z_hi,
                Side::Below => z > r.z_lo && z <= r.z_hi,
            };
            if inside {
                return i;
            }
        }
        if z == f64::INFINITY {
            n - 1
        } else {
            0
        }
    }

    fn eval_region(&self, idx: usize, z: f64) -> (Complex64, Complex64) {
        self.regions[idx].terms.iter().fold(
            (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)),
            |(ax, az), t| {
                let e = t.envelope(z);
                (ax + t.amplitude_x * e, az + t.amplitude_z * e)
            },
        )
    }

    /// `(A_x, A_z)` at `z`; interfaces belong to the region above.
    pub fn eval(&self, z: f64) -> (Complex64, Complex64) {
        self.eval_side(z, Side::Above)
    }

    pub fn eval_side(&self, z: f64, side: Side) -> (Complex64, Complex64) {
        self.eval_region(self.region_index(z, side), z)
    }

    pub fn permittivity_at(&self, z: f64, side: Side) -> Complex64 {
        self.regions[self.region_index(z, side)].permittivity
    }

    /// Relative jumps of `A_x` (tangential E) and `ε A_z` (normal D) at `z`.
    pub fn continuity_residual(&self, z: f64) -> (f64, f64) {
        let (xb, zb) = self.eval_side(z, Side::Below);
        let (xa, za) = self.eval_side(z, Side::Above);
        let db = self.permittivity_at(z, Side::Below) * zb;
        let da = self.permittivity_at(z, Side::Above) * za;
        let rel = |a: Complex64, b: Complex64| {
            let scale = a.norm().max(b.norm());
            if scale == 0.0 {
                0.0
            } else {
                (a - b).norm() / scale
            }
        };
        (rel(xb, xa), rel(db, da))
    }

    /// Largest continuity residual over all interior interfaces.
    pub fn max_continuity_residual(&self) -> f64 {
        self.interfaces()
            .into_iter()
            .map(|z| {
                let (a, b) = self.continuity_residual(z);
                a.max(b)
            })
            .fold(0.0, f64::max)
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        for r in &mut out.regions {
            for t in &mut r.terms {
                t.amplitude_x *= c;
                t.amplitude_z *= c;
            }
        }
        out
    }

    /// `∫_{lo}^{∞} (A_x^* B_x + A_z^* B_z) dz` in closed form, where `A` is
    /// `self` and `B` is `other`.
    pub fn inner_product(&self, other: &Self, lo: f64) -> Result<Complex64, ModeError> {
        let mut acc = Complex64::new(0.0, 0.0);
        for ra in &self.regions {
            for rb in &other.regions {
                let a = ra.z_lo.max(rb.z_lo).max(lo);
                let b = ra.z_hi.min(rb.z_hi);
                if !(a < b) {
                    continue;
                }
                for ta in &ra.terms {
                    for tb in &rb.terms {
                        acc += pair_integral(ta, tb, a, b)?;
                    }
                }
            }
        }
        Ok(acc)
    }

    /// `∫_{lo}^{∞} |A|² dz`.
    pub fn norm_sq(&self, lo: f64) -> Result<f64, ModeError> {
        let n = self.inner_product(self, lo)?.re;
        if n > 0.0 && n.is_finite() {
            Ok(n)
        } else {
            Err(ModeError::InvalidProfile(format!("non-positive norm {n}")))
        }
    }
}

/// `∫_a^b conj(t1) · t2 dz` for a pair of exponential terms.
fn pair_integral(t1: &ExpTerm, t2: &ExpTerm, a: f64, b: f64) -> Result<Complex64, ModeError> {
    let coeff = t1.amplitude_x.conj() * t2.amplitude_x + t1.amplitude_z.conj() * t2.amplitude_z;
    if coeff == Complex64::new(0.0, 0.0) {
        return Ok(coeff);
    }
    let s1 = t1.rate.conj();
    let s2 = t2.rate;
    let sum = s1 + s2;
    let expo = |z: f64| (s1 * (z - t1.z_offset) + s2 * (z - t2.z_offset)).exp();
    let divergent = || ModeError::Divergent { z_lo: a, z_hi: b };
    let val = match (a.is_finite(), b.is_finite()) {
        (true, true) => {
            let len = b - a;
            let x = sum * len;
            if x.norm() < 1e-5 {
                expo(a) * len * (1.0 + x / 2.0 + x * x / 6.0 + x * x * x / 24.0)
            } else {
                (expo(b) - expo(a)) / sum
            }
        }
        (true, false) => {
            if !(sum.re < 0.0) {
                return Err(divergent());
            }
            -expo(a) / sum
        }
        (false, true) => {
            if !(sum.re > 0.0) {
                return Err(divergent());
            }
            expo(b) / sum
        }
        (false, false) => return Err(divergent()),
    };
    Ok(coeff * val)
}

/// Strip modefunction φ± for a lossless dispersion root.
///
/// Upper air (z < 0): `(1, −ik/ν0) e^{ν0 z}`. Metal: `A (1, ik/νm) e^{−νm z}`
/// `∓ A (1, −ik/νm) e^{νm (z − d1)}` with `A = (1 − νm/(εm ν0))/2`. Lower air:
/// `∓ (1, ik/ν0) e^{−ν0 (z − d1)}`. The factor 1/2 in `A` is what makes A_x
/// continuous on a root of the dispersion relation.
pub fn lrspp_profile(sol: &DispersionSolution) -> Result<PiecewiseExpProfile, ModeError> {
    if !(sol.nu_0 > 0.0 && sol.nu_m > 0.0 && sol.d1 > 0.0) {
        return Err(ModeError::InvalidInput(format!(
            "not a bound mode: nu_0 = {}, nu_m = {}, d1 = {}",
            sol.nu_0, sol.nu_m, sol.d1
        )));
    }
    let k = sol.k;
    let s = sol.branch.sign();
    let (nu0, num) = (Complex64::from(sol.nu_0), Complex64::from(sol.nu_m));
    let amp = Complex64::from(0.5 * (1.0 - sol.nu_m / (sol.eps_m * sol.nu_0)));
    let one = Complex64::new(1.0, 0.0);
    let eps_m = Complex64::from(sol.eps_m);
    PiecewiseExpProfile::new(vec![
        Region {
            z_lo: f64::NEG_INFINITY,
            z_hi: 0.0,
            permittivity: one,
            terms: vec![ExpTerm::transverse(one, nu0, 0.0, k)],
        },
        Region {
            z_lo: 0.0,
            z_hi: sol.d1,
            permittivity: eps_m,
            terms: vec![
                ExpTerm::transverse(amp, -num, 0.0, k),
                ExpTerm::transverse(-s * amp, num, sol.d1, k),
            ],
        },
        Region {
            z_lo: sol.d1,
            z_hi: f64::INFINITY,
            permittivity: one,
            terms: vec![ExpTerm::transverse(-s * one, -nu0, sol.d1, k)],
        },
    ])
}

/// Solved four-layer attenuated-total-reflection field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourLayerField {
    pub profile: PiecewiseExpProfile,
    pub r: Complex64,
    /// Flux transmission amplitude into `z > −d2`, taken real and
    /// non-negative: `|τ|² = 1 − |r|²` for any passive stack.
    pub tau: Complex64,
    /// Unclamped flux ratio behind `|τ|²`; slightly negative only through
    /// round-off.
    pub tau_sq_raw: f64,
    pub theta: f64,
    pub k: f64,
    pub kz_prism: f64,
    pub gamma_m: Complex64,
    pub gamma_0: Complex64,
    pub eps_m: Complex64,
    /// Gap, metal and substrate amplitudes κ1..κ5, each referenced at its
    /// own interface.
    pub kappas: [Complex64; 5],
}

impl FourLayerField {
    pub fn unitarity_deviation(&self) -> f64 {
        (self.r.norm_sqr() + self.tau_sq_raw - 1.0).abs()
    }
}

struct Layer {
    z_top: Complex64,
    down: Complex64,
    up: Complex64,
    transfer: Complex64,
}

/// Geometry and materials of the coupler.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourLayerStack {
    pub d1: f64,
    pub d2: f64,
    pub eps_prism: f64,
    pub model: DielectricModel,
}

/// Solves the TM boundary-value problem prism (ε1, z < −d2) / air gap /
/// metal (0 < z < d1) / air for a unit incident wave at angle `theta`.
///
/// The metal permittivity is `model`'s complex value; pass
/// `model.lossless()` for the real one.
pub fn four_layer_solve(
    omega: f64,
    theta: f64,
    stack: &FourLayerStack,
) -> Result<FourLayerField, ModeError> {
    let FourLayerStack {
        d1,
        d2,
        eps_prism,
        model,
    } = *stack;
    for (name, v) in [("omega", omega), ("d1", d1), ("d2", d2)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(ModeError::InvalidInput(format!(
                "{name} must be positive, got {v}"
            )));
        }
    }
    if !(eps_prism > 1.0) {
        return Err(ModeError::InvalidInput(format!(
            "eps_prism must exceed 1, got {eps_prism}"
        )));
    }
    if !(theta > 0.0 && theta <= std::f64::consts::FRAC_PI_2) {
        return Err(ModeError::InvalidInput(format!(
            "theta = {theta} outside (0, π/2]"
        )));
    }
    let k0 = omega / C;
    let n1 = eps_prism.sqrt();
    let k = n1 * k0 * theta.sin();
    if k <= k0 {
        return Err(ModeError::InvalidInput(format!(
            "theta = {theta} is not above the critical angle"
        )));
    }
    let kz = (eps_prism * k0 * k0 - k * k).max(0.0).sqrt();
    if kz <= 1e-9 * n1 * k0 {
        return Err(ModeError::Singular {
            interface: "prism",
            detail: "grazing incidence: no incident flux".into(),
        });
    }

    let eps_m = model.eps_complex_unchecked(omega);
    let kc = Complex64::from(k);
    let g0 = (kc * kc - k0 * k0).sqrt();
    let gm = (kc * kc - eps_m * k0 * k0).sqrt();
    let one = Complex64::new(1.0, 0.0);
    let eta1 = I * eps_prism / kz;
    let eta_air = one / g0;
    let eta_m = eps_m / gm;

    // Bottom-up admittances Z = −Y/A with Y = Σ ε a/s. Across a layer the
    // top admittance, decaying/growing amplitudes and bottom field follow
    // from Z below without dividing by η + Z, so bound-mode poles of the
    // sub-stack stay finite.
    let layer = |eta: Complex64, z_below: Complex64, e: Complex64, interface: &'static str| {
        let plus = eta + z_below;
        let minus = (eta - z_below) * e * e;
        let d = plus + minus;
        if d.norm() <= 1e-14 * (eta.norm() + z_below.norm()) || !d.is_finite() {
            return Err(ModeError::Singular {
                interface,
                detail: format!("vanishing layer denominator {d}"),
            });
        }
        Ok(Layer {
            z_top: eta * (plus - minus) / d,
            down: plus / d,
            up: (eta - z_below) * e / d,
            transfer: 2.0 * eta * e / d,
        })
    };
    let em = (-gm * d1).exp();
    let eg = (-g0 * d2).exp();
    let metal = layer(eta_m, eta_air, em, "z = 0")?;
    let gap = layer(eta_air, metal.z_top, eg, "z = -d2")?;
    let den = eta1 + gap.z_top;
    if den.norm() <= 1e-14 * eta1.norm() {
        return Err(ModeError::Singular {
            interface: "z = -d2",
            detail: "reflection pole".into(),
        });
    }
    let r = (eta1 - gap.z_top) / den;

    let a_top = one + r;
    let kappa1 = gap.down * a_top;
    let kappa2 = gap.up * a_top;
    let a_metal = gap.transfer * a_top;
    let kappa3 = metal.down * a_metal;
    let kappa4 = metal.up * a_metal;
    let kappa5 = metal.transfer * a_metal;

    // Normal-flux ratio just inside the gap.
    let a_gap = kappa1 + kappa2 * eg;
    let y_gap = eta_air * (kappa2 * eg - kappa1);
    let tau_sq_raw = -(I * a_gap * y_gap.conj()).re * kz / eps_prism;
    let tau = Complex64::from(tau_sq_raw.max(0.0).sqrt());

    let ikz = Complex64::new(0.0, kz);
    let eps1 = Complex64::from(eps_prism);
    let profile = PiecewiseExpProfile::new(vec![
        Region {
            z_lo: f64::NEG_INFINITY,
            z_hi: -d2,
            permittivity: eps1,
            terms: vec![
                ExpTerm::transverse(one, ikz, -d2, k),
                ExpTerm::transverse(r, -ikz, -d2, k),
            ],
        },
        Region {
            z_lo: -d2,
            z_hi: 0.0,
            permittivity: one,
            terms: vec![
                ExpTerm::transverse(kappa1, -g0, -d2, k),
                ExpTerm::transverse(kappa2, g0, 0.0, k),
            ],
        },
        Region {
            z_lo: 0.0,
            z_hi: d1,
            permittivity: eps_m,
            terms: vec![
                ExpTerm::transverse(kappa3, -gm, 0.0, k),
                ExpTerm::transverse(kappa4, gm, d1, k),
            ],
        },
        Region {
            z_lo: d1,
            z_hi: f64::INFINITY,
            permittivity: one,
            terms: vec![ExpTerm::transverse(kappa5, -g0, d1, k)],
        },
    ])?;

    Ok(FourLayerField {
        profile,
        r,
        tau,
        tau_sq_raw,
        theta,
        k,
        kz_prism: kz,
        gamma_m: gm,
        gamma_0: g0,
        eps_m,
        kappas: [kappa1, kappa2, kappa3, kappa4, kappa5],
    })
}

/// Normalization integrals of the strip mode (`n1`) and the coupler field
/// (`n2`) over `[domain_lo, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeNorms {
    pub n1: f64,
    pub n2: f64,
}

pub fn mode_norms(
    lrspp: &PiecewiseExpProfile,
    atr: &PiecewiseExpProfile,
    domain_lo: f64,
) -> Result<ModeNorms, ModeError> {
    Ok(ModeNorms {
        n1: lrspp.norm_sq(domain_lo)?,
        n2: atr.norm_sq(domain_lo)?,
    })
}

/// Components of the strip-mode quantization amplitude
/// `(ħ / (2 ε0 W ω vG N))^{1/2}`. They cancel in normalized overlaps and
/// are kept for inspection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantPrefactor {
    pub hbar: f64,
    pub eps0: f64,
    pub omega: f64,
    pub v_group: f64,
    pub norm: f64,
}

impl QuantPrefactor {
    pub fn new(omega: f64, v_group: f64, norm: f64) -> Self {
        Self {
            hbar: HBAR,
            eps0: VACUUM_PERMITTIVITY,
            omega,
            v_group,
            norm,
        }
    }

    /// Amplitude for a strip of lateral width `width` (m).
    pub fn amplitude(&self, width: f64) -> f64 {
        (self.hbar / (2.0 * self.eps0 * width * self.omega * self.v_group * self.norm)).sqrt()
    }
}

/// Strip mode at `omega` and the matched coupler field, sharing `k`.
pub fn matched_fields(
    sol: &DispersionSolution,
    stack: &FourLayerStack,
) -> Result<(PiecewiseExpProfile, FourLayerField), ModeError> {
    let ratio = C * sol.k / (sol.omega * stack.eps_prism.sqrt());
    if ratio > 1.0 {
        return Err(ModeError::InvalidInput(format!(
            "k = {:e} is beyond the prism light line",
            sol.k
        )));
    }
    let phi = lrspp_profile(sol)?;
    let psi = four_layer_solve(sol.omega, ratio.asin(), stack)?;
    Ok((phi, psi))
}
