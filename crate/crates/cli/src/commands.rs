//! One function per subcommand, each building a [`Dataset`] from a
//! validated configuration. Rows are ordered branch first, then by grid
//! index in the order the columns list them.

use lrspp::coupling::{Coupler, CouplingConfig, CouplingPoint, OptimizationPath};
use lrspp::dispersion::{coupling_angle, Branch, DispersionSolver};
use lrspp::modes::{four_layer_solve, lrspp_profile, FourLayerStack, PiecewiseExpProfile};
use lrspp::propagation::{g2_after_loss, g2_zero, normalized_count};
use lrspp::statexfer::{propagate_cat, CatState};
use lrspp::SPEED_OF_LIGHT;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::dataset::{Cell, Dataset};
use crate::CliError;

const FIELD_OMEGA: f64 = 3.0e15;
const FIELD_D1: f64 = 20e-9;
const G2_LOSSES: [f64; 2] = [0.3, 0.01];

fn numerical(e: impl std::fmt::Display) -> CliError {
    CliError::Numerical(e.to_string())
}

fn coupler(cfg: &RunConfig) -> Result<Coupler, CliError> {
    let c = CouplingConfig {
        eps_prism: cfg.eps_prism,
        delta_omega: cfg.delta_omega,
        d2_min: cfg.d2.min,
        d2_max: cfg.d2.max,
        d2_steps: cfg.d2.steps,
        ..CouplingConfig::default()
    };
    Coupler::new(cfg.material, c).map_err(|e| CliError::Config(e.to_string()))
}

fn label(b: Branch) -> Cell {
    b.label().into()
}

fn bool_cell(b: bool) -> Cell {
    Cell::Num(if b { 1.0 } else { 0.0 })
}

/// Cartesian product of two grids, outer index first.
fn cells(a: &[f64], b: &[f64]) -> Vec<(f64, f64)> {
    a.iter()
        .flat_map(|&x| b.iter().map(move |&y| (x, y)))
        .collect()
}

pub fn material(cfg: &RunConfig) -> Result<Dataset, CliError> {
    let mut ds = Dataset::new(
        "material",
        cfg,
        &["omega", "eps_lossless", "eps_re", "eps_im"],
    );
    for w in cfg.omega.values() {
        let real = cfg.material.eps_lossless(w).map_err(numerical)?;
        let lossy = cfg.material.eps_lossy(w).map_err(numerical)?;
        ds.push(vec![
            w.into(),
            real.into(),
            lossy.re.into(),
            lossy.im.into(),
        ]);
    }
    Ok(ds)
}

pub fn dispersion(cfg: &RunConfig) -> Result<Dataset, CliError> {
    let mut ds = Dataset::new(
        "dispersion",
        cfg,
        &[
            "branch", "d1", "k", "omega", "nu_m", "nu_0", "v_group", "kappa", "merged",
        ],
    );
    let base = DispersionSolver::new(cfg.material);
    let grid = cells(&cfg.d1.values(), &cfg.k.values());
    for branch in cfg.branches() {
        let rows: Vec<Vec<Cell>> = grid
            .par_iter()
            .map(|&(d1, k)| {
                let head = [label(branch), d1.into(), k.into()];
                let Ok(sol) = base.solve_omega(branch, k, d1) else {
                    return head
                        .into_iter()
                        .chain(std::iter::repeat_n(Cell::Na, 6))
                        .collect();
                };
                // widen the k window so the follow-up solves at ω find this root
                let index = (1.5 * SPEED_OF_LIGHT * k / sol.omega).max(cfg.eps_prism.sqrt());
                let s = base.with_max_index(index);
                let vg = s.group_velocity(branch, sol.omega, d1).ok();
                let kappa = s
                    .complex_wavenumber(branch, sol.omega, d1)
                    .ok()
                    .map(|c| c.kappa);
                head.into_iter()
                    .chain([
                        sol.omega.into(),
                        sol.nu_m.into(),
                        sol.nu_0.into(),
                        Cell::opt(vg),
                        Cell::opt(kappa),
                        bool_cell(sol.merged),
                    ])
                    .collect()
            })
            .collect();
        rows.into_iter().for_each(|r| ds.push(r));
    }
    Ok(ds)
}

pub fn angle(cfg: &RunConfig) -> Result<Dataset, CliError> {
    let mut ds = Dataset::new(
        "angle",
        cfg,
        &["branch", "d1", "omega", "k", "theta", "theta_deg"],
    );
    let solver = DispersionSolver::new(cfg.material).with_max_index(cfg.eps_prism.sqrt());
    let grid = cells(&cfg.d1.values(), &cfg.omega.values());
    for branch in cfg.branches() {
        let rows: Vec<Vec<Cell>> = grid
            .par_iter()
            .map(|&(d1, w)| {
                let sol = solver.solve_k(branch, w, d1).ok();
                let theta = sol.and_then(|s| coupling_angle(w, s.k, cfg.eps_prism).ok());
                vec![
                    label(branch),
                    d1.into(),
                    w.into(),
                    Cell::opt(sol.map(|s| s.k)),
                    Cell::opt(theta),
                    Cell::opt(theta.map(f64::to_degrees)),
                ]
            })
            .collect();
        rows.into_iter().for_each(|r| ds.push(r));
    }
    Ok(ds)
}

fn normalized(p: &PiecewiseExpProfile, lo: f64) -> Result<PiecewiseExpProfile, CliError> {
    let n = p.norm_sq(lo).map_err(numerical)?;
    Ok(p.scaled(Complex64::from(1.0 / n.sqrt())))
}

pub fn field(cfg: &RunConfig) -> Result<Dataset, CliError> {
    let mut ds = Dataset::new(
        "field",
        cfg,
        &[
            "branch", "omega", "d1", "d2", "z", "phi_x_re", "phi_x_im", "phi_z_re", "phi_z_im",
            "psi_x_re", "psi_x_im", "psi_z_re", "psi_z_im",
        ],
    );
    let w = if cfg.omega.steps == 1 {
        cfg.omega.min
    } else {
        FIELD_OMEGA
    };
    let d1 = if cfg.d1.steps == 1 {
        cfg.d1.min
    } else {
        FIELD_D1
    };
    let c = coupler(cfg)?;
    for branch in cfg.branches() {
        let mode = c.matched_mode(branch, w, d1).map_err(numerical)?;
        let d2 = match cfg.d2_fixed {
            Some(d2) => d2,
            None => match c.optimize_d2(branch, w, d1).map_err(numerical)? {
                Some(p) => p.d2,
                None => {
                    return Err(CliError::Numerical(format!(
                        "no feasible gap for branch {branch} at omega = {w:e}, d1 = {d1:e}; pass --d2-nm"
                    )))
                }
            },
        };
        let stack = FourLayerStack {
            d1,
            d2,
            eps_prism: cfg.eps_prism,
            model: cfg.material,
        };
        let psi = four_layer_solve(w, mode.theta, &stack)
            .map_err(numerical)?
            .profile;
        let phi = normalized(&lrspp_profile(&mode.solution).map_err(numerical)?, -d2)?;
        let psi = normalized(&psi, -d2)?;
        for z in cfg.z.values() {
            let (px, pz) = phi.eval(z);
            let (qx, qz) = psi.eval(z);
            ds.push(vec![
                label(branch),
                w.into(),
                d1.into(),
                d2.into(),
                z.into(),
                px.re.into(),
                px.im.into(),
                pz.re.into(),
                pz.im.into(),
                qx.re.into(),
                qx.im.into(),
                qz.re.into(),
                qz.im.into(),
            ]);
        }
    }
    Ok(ds)
}

pub fn constraints(cfg: &RunConfig) -> Result<Dataset, CliError> {
    let mut ds = Dataset::new(
        "constraints",
        cfg,
        &[
            "branch", "omega", "d1", "B", "C", "d2", "P", "g_tilde", "feasible",
        ],
    );
    let c = coupler(cfg)?;
    let grid = cells(&cfg.omega.values(), &cfg.d1.values());
    for branch in cfg.branches() {
        let rows: Vec<Result<Vec<Cell>, CliError>> = grid
            .par_iter()
            .map(|&(w, d1)| {
                let head = [label(branch), w.into(), d1.into()];
                let Ok(mode) = c.matched_mode(branch, w, d1) else {
                    return Ok(head
                        .into_iter()
                        .chain(std::iter::repeat_n(Cell::Na, 5))
                        .chain([bool_cell(false)])
                        .collect());
                };
                let best = c.optimize_d2(branch, w, d1).map_err(numerical)?;
                Ok(head
                    .into_iter()
                    .chain([
                        mode.bandwidth_b.into(),
                        mode.coupled_surfaces_c.into(),
                        Cell::opt(best.map(|p| p.d2)),
                        Cell::opt(best.map(|p| p.constraints.penetration_p)),
                        Cell::opt(best.map(|p| p.g_tilde)),
                        bool_cell(best.is_some()),
                    ])
                    .collect())
            })
            .collect();
        for r in rows {
            ds.push(r?);
        }
    }
    Ok(ds)
}

const POINT_COLUMNS: [&str; 12] = [
    "branch", "omega", "d1", "d2", "k", "theta", "beta_abs", "g", "g_tilde", "B", "P", "C",
];

fn point_row(branch: Branch, omega: f64, d1: Option<f64>, p: Option<CouplingPoint>) -> Vec<Cell> {
    let mut row = vec![
        label(branch),
        omega.into(),
        Cell::opt(d1.or(p.map(|p| p.d1))),
    ];
    match p {
        Some(p) => row.extend([
            p.d2.into(),
            p.k.into(),
            p.theta.into(),
            p.beta.norm().into(),
            p.g.into(),
            p.g_tilde.into(),
            p.constraints.bandwidth_b.into(),
            p.constraints.penetration_p.into(),
            p.constraints.coupled_surfaces_c.into(),
        ]),
        None => row.extend(std::iter::repeat_n(Cell::Na, 9)),
    }
    row
}

fn path(c: &Coupler, cfg: &RunConfig, branch: Branch) -> Result<OptimizationPath, CliError> {
    c.optimize_path(branch, &cfg.omega.values(), &cfg.d1.values())
        .map_err(numerical)
}

pub fn optimize(cfg: &RunConfig, surface: bool) -> Result<Dataset, CliError> {
    let name = if surface {
        "optimize-surface"
    } else {
        "optimize"
    };
    let mut ds = Dataset::new(name, cfg, &POINT_COLUMNS);
    let c = coupler(cfg)?;
    let omegas = cfg.omega.values();
    let d1s = cfg.d1.values();
    for branch in cfg.branches() {
        if surface {
            let grid = c
                .optimize_surface(branch, &omegas, &d1s)
                .map_err(numerical)?;
            for (&w, row) in omegas.iter().zip(grid) {
                for (&d1, p) in d1s.iter().zip(row) {
                    ds.push(point_row(branch, w, Some(d1), p));
                }
            }
        } else {
            for rec in path(&c, cfg, branch)?.records {
                ds.push(point_row(branch, rec.omega, None, rec.best));
            }
        }
    }
    Ok(ds)
}

/// ω with its optimized point and loss constant κ0, if feasible.
type LossyRecord = (f64, Option<(CouplingPoint, f64)>);

fn path_with_loss(
    c: &Coupler,
    cfg: &RunConfig,
    branch: Branch,
) -> Result<Vec<LossyRecord>, CliError> {
    Ok(path(c, cfg, branch)?
        .records
        .into_iter()
        .map(|rec| {
            let best = rec.best.and_then(|p| {
                let kappa = c
                    .solver()
                    .complex_wavenumber(branch, rec.omega, p.d1)
                    .ok()?
                    .kappa;
                Some((p, kappa))
            });
            (rec.omega, best)
        })
        .collect())
}

pub fn propagate(cfg: &RunConfig) -> Result<Dataset, CliError> {
    let mut ds = Dataset::new(
        "propagate",
        cfg,
        &["branch", "omega", "x", "d1", "kappa", "m_tilde"],
    );
    let c = coupler(cfg)?;
    let xs = cfg.x.values();
    for branch in cfg.branches() {
        for (w, best) in path_with_loss(&c, cfg, branch)? {
            for &x in &xs {
                let m =
                    best.map(|(p, kappa)| normalized_count(kappa, x, p.beta.norm_sqr(), cfg.mu));
                ds.push(vec![
                    label(branch),
                    w.into(),
                    x.into(),
                    Cell::opt(best.map(|(p, _)| p.d1)),
                    Cell::opt(best.map(|(_, k)| k)),
                    Cell::opt(m),
                ]);
            }
        }
    }
    Ok(ds)
}

pub fn g2(cfg: &RunConfig) -> Result<Dataset, CliError> {
    let mut ds = Dataset::new("g2", cfg, &["n", "g2", "g2_eta_0.3", "g2_eta_0.01"]);
    let ns: Vec<u32> = match cfg.n {
        Some(n) => vec![n],
        None => (1..=5).collect(),
    };
    for n in ns {
        let mut row = vec![Cell::Num(n as f64), g2_zero(n).map_err(numerical)?.into()];
        for eta in G2_LOSSES {
            row.push(g2_after_loss(n, eta).map_err(numerical)?.into());
        }
        ds.push(row);
    }
    Ok(ds)
}

pub fn cat_entropy(cfg: &RunConfig) -> Result<Dataset, CliError> {
    let mut ds = Dataset::new(
        "cat-entropy",
        cfg,
        &[
            "branch",
            "omega",
            "x",
            "alpha",
            "g",
            "lambda_plus",
            "lambda_minus",
            "entropy",
        ],
    );
    let c = coupler(cfg)?;
    let xs = cfg.x.values();
    let alphas = cfg.alpha.values();
    for branch in cfg.branches() {
        for (w, best) in path_with_loss(&c, cfg, branch)? {
            for &x in &xs {
                for &alpha in &alphas {
                    let head = [label(branch), w.into(), x.into(), alpha.into()];
                    let Some((p, kappa)) = best else {
                        ds.push(
                            head.into_iter()
                                .chain(std::iter::repeat_n(Cell::Na, 4))
                                .collect(),
                        );
                        continue;
                    };
                    let d =
                        propagate_cat(&CatState::even(alpha), p.g, kappa, x).map_err(numerical)?;
                    ds.push(
                        head.into_iter()
                            .chain([
                                p.g.into(),
                                d.lambda_plus.into(),
                                d.lambda_minus.into(),
                                d.entropy.into(),
                            ])
                            .collect(),
                    );
                }
            }
        }
    }
    Ok(ds)
}
