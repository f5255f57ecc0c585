mod common;

use common::{integrate, integrate_tail, rel};
use lrspp::coupling::{Coupler, CouplingConfig};
use lrspp::dispersion::Branch;
use lrspp::grid::{linspace, logspace};
use lrspp::modes::{four_layer_solve, FourLayerStack, PiecewiseExpProfile};
use lrspp::DielectricModel;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn coupler() -> Coupler {
    Coupler::new(DielectricModel::SILVER, CouplingConfig::default()).unwrap()
}

fn quad_inner(a: &PiecewiseExpProfile, b: &PiecewiseExpProfile, lo: f64, scale: f64) -> Complex64 {
    let f = |z: f64| {
        let (ax, az) = a.eval(z);
        let (bx, bz) = b.eval(z);
        ax.conj() * bx + az.conj() * bz
    };
    let mut edges: Vec<f64> = a
        .interfaces()
        .into_iter()
        .chain(b.interfaces())
        .filter(|&z| z > lo)
        .collect();
    edges.push(lo);
    edges.sort_by(f64::total_cmp);
    edges.dedup();
    let mut acc = Complex64::new(0.0, 0.0);
    for w in edges.windows(2) {
        acc += integrate(f, w[0], w[1], 1e-17);
    }
    acc + integrate_tail(f, *edges.last().unwrap(), scale, 1e-17)
}

#[test]
fn closed_form_beta_matches_quadrature() {
    let c = coupler();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut done = 0;
    let mut tries = 0;
    while done < 30 {
        tries += 1;
        assert!(tries < 5000, "not enough feasible samples");
        let branch = if rng.gen_bool(0.5) {
            Branch::Antisymmetric
        } else {
            Branch::Symmetric
        };
        let w = rng.gen_range(2.3e15..5.0e15);
        let d1 = rng.gen_range(10e-9..100e-9);
        let Ok(mode) = c.matched_mode(branch, w, d1) else {
            continue;
        };
        let d2 = mode.min_gap() * rng.gen_range(1.0..3.0);
        if !mode.constraints(d2).feasible() {
            continue;
        }
        let beta = c.beta_for(&mode, d2).unwrap();
        let field = four_layer_solve(
            w,
            mode.theta,
            &FourLayerStack {
                d1,
                d2,
                eps_prism: 1.51,
                model: DielectricModel::SILVER,
            },
        )
        .unwrap();
        let scale = 1.0 / mode.solution.nu_0;
        let n1 = quad_inner(&mode.profile, &mode.profile, -d2, scale).re;
        let n2 = quad_inner(&field.profile, &field.profile, -d2, scale).re;
        let ov = quad_inner(&mode.profile, &field.profile, -d2, scale);
        let oracle = (-field.tau * ov / (n1 * n2).sqrt()).conj();
        assert!(
            (beta - oracle).norm() < 1e-8 * oracle.norm(),
            "{beta} vs {oracle}"
        );
        done += 1;
    }
}

#[test]
fn optimum_is_feasible_and_locally_optimal() {
    let c = coupler();
    let grid = logspace(50e-9, 3e-6, 80);
    let step = grid[1] / grid[0];
    let d1s = linspace(10e-9, 100e-9, 19);
    let mut checked = 0;
    for (branch, w) in [
        (Branch::Antisymmetric, 4.0e15),
        (Branch::Antisymmetric, 3.0e15),
        (Branch::Symmetric, 3.0e15),
        (Branch::Symmetric, 2.5e15),
    ] {
        let best = c.optimize_path(branch, &[w], &d1s).unwrap().records[0]
            .best
            .expect("feasible");
        let d1 = best.d1;
        checked += 1;
        let p = c.optimize_d2(branch, w, d1).unwrap().expect("feasible");
        let mode = c.matched_mode(branch, w, d1).unwrap();
        let cs = mode.constraints(p.d2);
        assert!(cs.bandwidth_b >= 1.0 && cs.penetration_p <= 1.0 && cs.coupled_surfaces_c >= 1.0);
        assert_eq!(cs, p.constraints);
        for d2 in [p.d2 * step, p.d2 / step] {
            if mode.constraints(d2).feasible() {
                assert!(p.beta.norm() >= c.beta_for(&mode, d2).unwrap().norm());
            }
        }
        assert!((p.alpha_abs().powi(2) + p.beta.norm_sqr() - 1.0).abs() < 1e-12);
        assert!((p.g - p.beta.norm().asin()).abs() < 1e-15);
    }
    assert_eq!(checked, 4);
}

#[test]
fn headline_maxima() {
    let c = coupler();
    let omegas = linspace(2e15, 5.4e15, 120);
    let d1s = linspace(10e-9, 100e-9, 60);
    let plus = c
        .optimize_path(Branch::Antisymmetric, &omegas, &d1s)
        .unwrap();
    let minus = c.optimize_path(Branch::Symmetric, &omegas, &d1s).unwrap();
    let gp = plus.max_g_tilde().unwrap();
    let gm = minus.max_g_tilde().unwrap();
    assert!((gp - 0.9).abs() <= 0.05, "{gp}");
    assert!((gm - 0.8).abs() <= 0.05, "{gm}");
    for rec in plus.records.iter().chain(&minus.records) {
        if let Some(p) = rec.best {
            assert!(p.feasible && (0.0..=1.0).contains(&p.g_tilde));
        }
    }
    // high frequencies are out of reach for the symmetric branch
    assert!(minus
        .records
        .iter()
        .filter(|r| r.omega > 5.1e15)
        .all(|r| r.best.is_none()));
}

#[test]
fn path_is_independent_of_worker_count() {
    let c = coupler();
    let omegas = linspace(2.5e15, 4.5e15, 9);
    let d1s = linspace(20e-9, 80e-9, 7);
    let run = |n: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .unwrap()
            .install(|| {
                c.optimize_path(Branch::Antisymmetric, &omegas, &d1s)
                    .unwrap()
            })
    };
    let one = run(1);
    assert_eq!(one, run(4));
    assert_eq!(one, run(16));
}

#[test]
fn tie_break_prefers_thinner_strip() {
    let c = coupler();
    let w = [3.5e15];
    let single = c
        .optimize_path(Branch::Antisymmetric, &w, &[40e-9])
        .unwrap();
    let doubled = c
        .optimize_path(Branch::Antisymmetric, &w, &[40e-9, 40e-9 + 1e-18])
        .unwrap();
    assert_eq!(
        single.records[0].best.unwrap().d1,
        doubled.records[0].best.unwrap().d1
    );
}

#[test]
fn lossless_coupler_gives_no_transfer() {
    let cfg = CouplingConfig {
        lossy_coupler: false,
        ..Default::default()
    };
    let c = Coupler::new(DielectricModel::SILVER, cfg).unwrap();
    let b = c
        .overlap_beta(Branch::Antisymmetric, 3.5e15, 40e-9, 400e-9)
        .unwrap();
    assert!(b.norm() < 1e-6, "{}", b.norm());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn beta_bounded(w in 2.3e15f64..5.0e15, d1 in 10e-9f64..100e-9, f in 1.0f64..5.0, plus in any::<bool>()) {
        let branch = if plus { Branch::Antisymmetric } else { Branch::Symmetric };
        let c = coupler();
        if let Ok(mode) = c.matched_mode(branch, w, d1) {
            let beta = c.beta_for(&mode, mode.min_gap() * f).unwrap();
            prop_assert!(beta.norm() <= 1.0);
            prop_assert!(rel(mode.constraints(mode.min_gap()).penetration_p, 1.0) < 1e-11);
        }
    }
}
