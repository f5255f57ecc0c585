//! Photon→LRSPP coupling through a prism/air-gap coupler.
//!
//! For a matched incidence angle the beamsplitter coefficient is
//!
//! ```text
//! β* = −τ ∫ [φ/√N1]* [Ψ/√N2] dz,   z ∈ [−d2, ∞)
//! ```
//!
//! and `g = arcsin|β|`, `g̃ = 2g/π`. A point is feasible when the other
//! branch is spectrally resolved (`B ≥ 1`), φ does not reach into the prism
//! (`P ≤ 1`) and both metal faces are coupled (`C ≥ 1`).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dispersion::{
    coupling_angle, Branch, DispersionError, DispersionSolution, DispersionSolver,
};
use crate::grid::logspace;
use crate::materials::DielectricModel;
use crate::modes::{
    four_layer_solve, lrspp_profile, FourLayerStack, ModeError, PiecewiseExpProfile,
};
use crate::parallel::ordered_map;

/// Default wavepacket bandwidth Δω (rad/s).
pub const DEFAULT_DELTA_OMEGA: f64 = 3.02e13;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CouplingError {
    #[error(transparent)]
    Dispersion(#[from] DispersionError),
    #[error(transparent)]
    Mode(#[from] ModeError),
    #[error("|beta| = {beta_abs} exceeds 1: inconsistent normalization")]
    Normalization { beta_abs: f64 },
    #[error("invalid coupling configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingConfig {
    pub eps_prism: f64,
    pub delta_omega: f64,
    pub d2_min: f64,
    pub d2_max: f64,
    pub d2_steps: usize,
    /// Golden-section stopping width for d2 (m).
    pub d2_tol: f64,
    /// Use the lossy metal in the coupler field. The lossless metal
    /// reflects everything at exact phase matching, so `τ = 0` there.
    pub lossy_coupler: bool,
}

impl Default for CouplingConfig {
    fn default() -> Self {
        Self {
            eps_prism: 1.51,
            delta_omega: DEFAULT_DELTA_OMEGA,
            d2_min: 50e-9,
            d2_max: 3e-6,
            d2_steps: 80,
            d2_tol: 0.1e-9,
            lossy_coupler: true,
        }
    }
}

impl CouplingConfig {
    pub fn validate(&self) -> Result<(), CouplingError> {
        let bad = |m: String| Err(CouplingError::InvalidConfig(m));
        if !(self.eps_prism > 1.0) {
            return bad(format!("eps_prism must exceed 1, got {}", self.eps_prism));
        }
        if !(self.delta_omega > 0.0) {
            return bad(format!(
                "delta_omega must be positive, got {}",
                self.delta_omega
            ));
        }
        if !(self.d2_min > 0.0 && self.d2_min < self.d2_max) {
            return bad(format!(
                "need 0 < d2_min < d2_max, got {} and {}",
                self.d2_min, self.d2_max
            ));
        }
        if self.d2_steps < 2 {
            return bad("d2_steps must be at least 2".into());
        }
        if !(self.d2_tol > 0.0) {
            return bad("d2_tol must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSet {
    pub bandwidth_b: f64,
    pub penetration_p: f64,
    pub coupled_surfaces_c: f64,
}

impl ConstraintSet {
    pub fn feasible(&self) -> bool {
        self.bandwidth_b >= 1.0 && self.penetration_p <= 1.0 && self.coupled_surfaces_c >= 1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingPoint {
    pub branch: Branch,
    pub omega: f64,
    pub d1: f64,
    pub d2: f64,
    pub k: f64,
    pub theta: f64,
    pub beta: Complex64,
    pub g: f64,
    pub g_tilde: f64,
    pub constraints: ConstraintSet,
    pub feasible: bool,
}

impl CouplingPoint {
    /// `|α| = √(1 − |β|²)`.
    pub fn alpha_abs(&self) -> f64 {
        (1.0 - self.beta.norm_sqr()).max(0.0).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathRecord {
    pub omega: f64,
    /// `None` when no (d1, d2) satisfies the constraints.
    pub best: Option<CouplingPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationPath {
    pub branch: Branch,
    pub records: Vec<PathRecord>,
}

impl OptimizationPath {
    pub fn max_g_tilde(&self) -> Option<f64> {
        self.records
            .iter()
            .filter_map(|r| r.best.map(|p| p.g_tilde))
            .fold(None, |m, g| Some(m.map_or(g, |m: f64| m.max(g))))
    }

    pub fn best(&self) -> Option<CouplingPoint> {
        self.records
            .iter()
            .filter_map(|r| r.best)
            .fold(None, |m: Option<CouplingPoint>, p| match m {
                Some(q) if q.g_tilde >= p.g_tilde => Some(q),
                _ => Some(p),
            })
    }
}

/// Everything at `(branch, ω, d1)` that does not depend on d2.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchedMode {
    pub solution: DispersionSolution,
    pub theta: f64,
    pub profile: PiecewiseExpProfile,
    pub bandwidth_b: f64,
    pub coupled_surfaces_c: f64,
}

impl MatchedMode {
    pub fn penetration(&self, d2: f64) -> f64 {
        2.0 / (self.solution.nu_0 * d2)
    }

    /// Smallest gap with `P ≤ 1`.
    pub fn min_gap(&self) -> f64 {
        2.0 / self.solution.nu_0 * (1.0 + 1e-12)
    }

    pub fn constraints(&self, d2: f64) -> ConstraintSet {
        ConstraintSet {
            bandwidth_b: self.bandwidth_b,
            penetration_p: self.penetration(d2),
            coupled_surfaces_c: self.coupled_surfaces_c,
        }
    }
}

/// Coupling evaluator for one metal and coupler configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coupler {
    solver: DispersionSolver,
    config: CouplingConfig,
}

impl Coupler {
    pub fn new(model: DielectricModel, config: CouplingConfig) -> Result<Self, CouplingError> {
        config.validate()?;
        model.validate().map_err(DispersionError::from)?;
        Ok(Self {
            solver: DispersionSolver::new(model).with_max_index(config.eps_prism.sqrt()),
            config,
        })
    }

    pub fn solver(&self) -> &DispersionSolver {
        &self.solver
    }

    pub fn config(&self) -> &CouplingConfig {
        &self.config
    }

    fn stack(&self, d1: f64, d2: f64) -> FourLayerStack {
        let model = if self.config.lossy_coupler {
            *self.solver.model()
        } else {
            self.solver.model().lossless()
        };
        FourLayerStack {
            d1,
            d2,
            eps_prism: self.config.eps_prism,
            model,
        }
    }

    /// Bandwidth parameter at the matched k: `|ω − ω_other(k)| / (2Δω)`,
    /// infinite when the other branch has no mode at that k.
    fn bandwidth(&self, sol: &DispersionSolution) -> Result<f64, CouplingError> {
        match self.solver.solve_omega(sol.branch.other(), sol.k, sol.d1) {
            Ok(other) => Ok((sol.omega - other.omega).abs() / (2.0 * self.config.delta_omega)),
            Err(DispersionError::NoBoundMode { .. }) => Ok(f64::INFINITY),
            Err(e) => Err(e.into()),
        }
    }

    pub fn matched_mode(
        &self,
        branch: Branch,
        omega: f64,
        d1: f64,
    ) -> Result<MatchedMode, CouplingError> {
        let solution = self.solver.solve_k(branch, omega, d1)?;
        let theta = coupling_angle(omega, solution.k, self.config.eps_prism)?;
        Ok(MatchedMode {
            theta,
            profile: lrspp_profile(&solution)?,
            bandwidth_b: self.bandwidth(&solution)?,
            coupled_surfaces_c: 4.0 / (solution.nu_m * d1),
            solution,
        })
    }

    pub fn constraint_set(
        &self,
        branch: Branch,
        omega: f64,
        d1: f64,
        d2: f64,
    ) -> Result<ConstraintSet, CouplingError> {
        Ok(self.matched_mode(branch, omega, d1)?.constraints(d2))
    }

    /// β for a matched mode and gap `d2`.
    pub fn beta_for(&self, mode: &MatchedMode, d2: f64) -> Result<Complex64, CouplingError> {
        let field = four_layer_solve(
            mode.solution.omega,
            mode.theta,
            &self.stack(mode.solution.d1, d2),
        )?;
        if field.tau.norm() == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let lo = -d2;
        let n1 = mode.profile.norm_sq(lo)?;
        let n2 = field.profile.norm_sq(lo)?;
        let overlap = mode.profile.inner_product(&field.profile, lo)?;
        let beta_conj = -field.tau * overlap / (n1 * n2).sqrt();
        let beta = beta_conj.conj();
        if beta.norm() > 1.0 + 1e-9 || !beta.is_finite() {
            return Err(CouplingError::Normalization {
                beta_abs: beta.norm(),
            });
        }
        Ok(beta)
    }

    pub fn overlap_beta(
        &self,
        branch: Branch,
        omega: f64,
        d1: f64,
        d2: f64,
    ) -> Result<Complex64, CouplingError> {
        self.beta_for(&self.matched_mode(branch, omega, d1)?, d2)
    }

    fn point(&self, mode: &MatchedMode, d2: f64, beta: Complex64) -> CouplingPoint {
        let constraints = mode.constraints(d2);
        let g = beta.norm().min(1.0).asin();
        CouplingPoint {
            branch: mode.solution.branch,
            omega: mode.solution.omega,
            d1: mode.solution.d1,
            d2,
            k: mode.solution.k,
            theta: mode.theta,
            beta,
            g,
            g_tilde: 2.0 * g / std::f64::consts::PI,
            constraints,
            feasible: constraints.feasible(),
        }
    }

    /// Full evaluation at one geometry, feasible or not.
    pub fn evaluate(
        &self,
        branch: Branch,
        omega: f64,
        d1: f64,
        d2: f64,
    ) -> Result<CouplingPoint, CouplingError> {
        let mode = self.matched_mode(branch, omega, d1)?;
        let beta = self.beta_for(&mode, d2)?;
        Ok(self.point(&mode, d2, beta))
    }

    /// Maximizes |β| over d2 under the constraints. `Ok(None)` means
    /// infeasible, including a branch that does not exist at `(ω, d1)`.
    pub fn optimize_d2(
        &self,
        branch: Branch,
        omega: f64,
        d1: f64,
    ) -> Result<Option<CouplingPoint>, CouplingError> {
        let mode = match self.matched_mode(branch, omega, d1) {
            Ok(m) => m,
            Err(CouplingError::Dispersion(DispersionError::NoBoundMode { .. })) => return Ok(None),
            Err(e) => return Err(e),
        };
        if mode.bandwidth_b < 1.0 || mode.coupled_surfaces_c < 1.0 {
            return Ok(None);
        }
        let lb = mode.min_gap().max(self.config.d2_min);
        if lb > self.config.d2_max {
            return Ok(None);
        }
        let mut grid: Vec<f64> =
            logspace(self.config.d2_min, self.config.d2_max, self.config.d2_steps)
                .into_iter()
                .filter(|&d| d >= lb)
                .collect();
        if grid.is_empty() {
            grid.push(lb);
        }
        let mut values = Vec::with_capacity(grid.len());
        for &d2 in &grid {
            values.push(self.beta_for(&mode, d2)?);
        }
        let (imax, _) = values
            .iter()
            .enumerate()
            .fold((0, -1.0), |(bi, bv), (i, b)| {
                if b.norm() > bv {
                    (i, b.norm())
                } else {
                    (bi, bv)
                }
            });

        let lo = if imax == 0 { lb } else { grid[imax - 1] };
        let hi = grid[(imax + 1).min(grid.len() - 1)];
        let (mut best_d2, mut best_beta) = (grid[imax], values[imax]);
        if hi > lo {
            let (d2, beta) = self.golden_section(&mode, lo, hi)?;
            if beta.norm() > best_beta.norm() {
                best_d2 = d2;
                best_beta = beta;
            }
        }
        Ok(Some(self.point(&mode, best_d2, best_beta)))
    }

    fn golden_section(
        &self,
        mode: &MatchedMode,
        mut a: f64,
        mut b: f64,
    ) -> Result<(f64, Complex64), CouplingError> {
        let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
        let mut x1 = b - inv_phi * (b - a);
        let mut x2 = a + inv_phi * (b - a);
        let mut f1 = self.beta_for(mode, x1)?;
        let mut f2 = self.beta_for(mode, x2)?;
        while b - a > self.config.d2_tol {
            if f1.norm() >= f2.norm() {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - inv_phi * (b - a);
                f1 = self.beta_for(mode, x1)?;
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + inv_phi * (b - a);
                f2 = self.beta_for(mode, x2)?;
            }
        }
        Ok(if f1.norm() >= f2.norm() {
            (x1, f1)
        } else {
            (x2, f2)
        })
    }

    /// Optimal d2 on every `(ω, d1)` cell, row-major in ω.
    pub fn optimize_surface(
        &self,
        branch: Branch,
        omega_grid: &[f64],
        d1_grid: &[f64],
    ) -> Result<Vec<Vec<Option<CouplingPoint>>>, CouplingError> {
        let cells: Vec<(f64, f64)> = omega_grid
            .iter()
            .flat_map(|&w| d1_grid.iter().map(move |&d| (w, d)))
            .collect();
        let results = ordered_map(&cells, |&(w, d1)| self.optimize_d2(branch, w, d1));
        let mut flat = results.into_iter();
        let mut out = Vec::with_capacity(omega_grid.len());
        for _ in omega_grid {
            let mut row = Vec::with_capacity(d1_grid.len());
            for _ in d1_grid {
                row.push(flat.next().expect("cell count")?);
            }
            out.push(row);
        }
        Ok(out)
    }

    /// Best feasible point over d1 at each ω. Near-ties (within 1e-9 in |β|)
    /// go to the smaller d1.
    pub fn optimize_path(
        &self,
        branch: Branch,
        omega_grid: &[f64],
        d1_grid: &[f64],
    ) -> Result<OptimizationPath, CouplingError> {
        let mut sorted_d1 = d1_grid.to_vec();
        sorted_d1.sort_by(f64::total_cmp);
        let surface = self.optimize_surface(branch, omega_grid, &sorted_d1)?;
        let records = omega_grid
            .iter()
            .zip(surface)
            .map(|(&omega, row)| PathRecord {
                omega,
                best: row
                    .into_iter()
                    .flatten()
                    .fold(None, |best: Option<CouplingPoint>, p| match best {
                        Some(b) if p.beta.norm() <= b.beta.norm() + 1e-9 => Some(b),
                        _ => Some(p),
                    }),
            })
            .collect();
        Ok(OptimizationPath { branch, records })
    }
}
