//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Each export returns a flat `Float64Array` with a fixed stride; missing
//! values are `NaN`.

use lrspp::coupling::{Coupler, CouplingConfig};
use lrspp::dispersion::{Branch, DispersionSolver};
use lrspp::grid::linspace;
use lrspp::statexfer::{propagate_cat, CatState};
use lrspp::{DielectricModel, SPEED_OF_LIGHT};
use wasm_bindgen::prelude::*;

const SILVER: DielectricModel = DielectricModel::SILVER;

fn branch(plus: bool) -> Branch {
    if plus {
        Branch::Antisymmetric
    } else {
        Branch::Symmetric
    }
}

fn check_steps(steps: usize) -> Result<(), String> {
    if (2..=5000).contains(&steps) {
        Ok(())
    } else {
        Err(format!("steps must lie in 2..=5000, got {steps}"))
    }
}

/// Rows of `[k, ω+, ω−, ω_single]` over `k ∈ [k_min, k_max]` (1/m).
pub fn dispersion_rows(
    d1_nm: f64,
    k_min: f64,
    k_max: f64,
    steps: usize,
) -> Result<Vec<f64>, String> {
    check_steps(steps)?;
    if !(d1_nm > 0.0 && k_min > 0.0 && k_min < k_max) {
        return Err("need d1 > 0 and 0 < k_min < k_max".into());
    }
    let s = DispersionSolver::new(SILVER);
    let single = DispersionSolver::new(SILVER);
    let mut out = Vec::with_capacity(4 * steps);
    for k in linspace(k_min, k_max, steps) {
        out.push(k);
        for b in Branch::BOTH {
            out.push(
                s.solve_omega(b, k, d1_nm * 1e-9)
                    .map_or(f64::NAN, |sol| sol.omega),
            );
        }
        // a very thick strip stands in for the single interface
        out.push(
            single
                .solve_omega(Branch::Antisymmetric, k, 1e-3)
                .map_or(f64::NAN, |sol| sol.omega),
        );
    }
    Ok(out)
}

/// Rows of `[ω, g̃, d2 (nm), θ (deg)]` at the optimized gap for fixed d1.
pub fn coupling_rows(
    plus: bool,
    d1_nm: f64,
    omega_min: f64,
    omega_max: f64,
    steps: usize,
) -> Result<Vec<f64>, String> {
    check_steps(steps)?;
    let wsp = SILVER
        .surface_plasma_frequency()
        .map_err(|e| e.to_string())?;
    if !(d1_nm > 0.0 && omega_min > 0.0 && omega_min < omega_max) {
        return Err("need d1 > 0 and 0 < omega_min < omega_max".into());
    }
    let c = Coupler::new(SILVER, CouplingConfig::default()).map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(4 * steps);
    for w in linspace(omega_min, omega_max.min(wsp * (1.0 - 1e-6)), steps) {
        let best = c
            .optimize_d2(branch(plus), w, d1_nm * 1e-9)
            .map_err(|e| e.to_string())?;
        out.push(w);
        match best {
            Some(p) => out.extend([p.g_tilde, p.d2 * 1e9, p.theta.to_degrees()]),
            None => out.extend([f64::NAN; 3]),
        }
    }
    Ok(out)
}

/// Rows of `[x (µm), S]` for an even cat with amplitude `alpha` sent through
/// the optimized coupler at `(ω, d1)`. Empty when that point is infeasible.
pub fn entropy_rows(
    plus: bool,
    omega: f64,
    d1_nm: f64,
    alpha: f64,
    x_max_um: f64,
    steps: usize,
) -> Result<Vec<f64>, String> {
    check_steps(steps)?;
    if !(alpha > 0.0 && x_max_um > 0.0) {
        return Err("need alpha > 0 and x_max > 0".into());
    }
    let b = branch(plus);
    let d1 = d1_nm * 1e-9;
    let c = Coupler::new(SILVER, CouplingConfig::default()).map_err(|e| e.to_string())?;
    let Some(p) = c.optimize_d2(b, omega, d1).map_err(|e| e.to_string())? else {
        return Ok(Vec::new());
    };
    let kappa = c
        .solver()
        .complex_wavenumber(b, omega, d1)
        .map_err(|e| e.to_string())?
        .kappa;
    let cat = CatState::even(alpha);
    let mut out = Vec::with_capacity(2 * steps);
    for x in linspace(0.0, x_max_um, steps) {
        let d = propagate_cat(&cat, p.g, kappa, x * 1e-6).map_err(|e| e.to_string())?;
        out.extend([x, d.entropy]);
    }
    Ok(out)
}

#[wasm_bindgen]
pub fn dispersion_curves(
    d1_nm: f64,
    k_min: f64,
    k_max: f64,
    steps: usize,
) -> Result<Vec<f64>, JsError> {
    dispersion_rows(d1_nm, k_min, k_max, steps).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn coupling_vs_omega(
    plus: bool,
    d1_nm: f64,
    omega_min: f64,
    omega_max: f64,
    steps: usize,
) -> Result<Vec<f64>, JsError> {
    coupling_rows(plus, d1_nm, omega_min, omega_max, steps).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn entropy_vs_x(
    plus: bool,
    omega: f64,
    d1_nm: f64,
    alpha: f64,
    x_max_um: f64,
    steps: usize,
) -> Result<Vec<f64>, JsError> {
    entropy_rows(plus, omega, d1_nm, alpha, x_max_um, steps).map_err(|e| JsError::new(&e))
}

/// Surface plasma frequency of the built-in silver model (rad/s).
#[wasm_bindgen]
pub fn surface_plasma_frequency() -> f64 {
    SILVER.surface_plasma_frequency().unwrap_or(f64::NAN)
}

/// Light-line frequency `ck` for axis scaling.
#[wasm_bindgen]
pub fn light_line(k: f64) -> f64 {
    SPEED_OF_LIGHT * k
}
