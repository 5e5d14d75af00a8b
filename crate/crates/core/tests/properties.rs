use std::sync::Arc;

use inlsv_core::classifier::evaluate;
use inlsv_core::evolution::{run, step, DetectionSection, GridSection, InitialData, ModelSection, OutputSection, PotentialSection, SimulationConfig, TimeSection};
use inlsv_core::functionals::{build_cutoff, CutoffKind};
use inlsv_core::{build_grid, solve_ground_state, GroundState, ModelParams, Nonlinearity, Potential, RadialField, RadialGrid, ShootingOptions};
use num_complex::Complex64;
use proptest::prelude::*;

fn gs_2_half() -> (Arc<RadialGrid<f64>>, GroundState<f64>) {
    let grid = build_grid(15.0, 2048).unwrap();
    let p = ModelParams::focusing(2.0, 0.5).unwrap();
    let gs = solve_ground_state(&p, &grid, &ShootingOptions::default()).unwrap();
    (grid, gs)
}

fn chirped(grid: &Arc<RadialGrid<f64>>, amp: f64, width: f64, chirp: f64) -> RadialField<f64> {
    RadialField::from_fn(grid.clone(), |r| Complex64::from_polar(amp * (-r * r / (2.0 * width * width)).exp(), chirp * r * r)).unwrap()
}

#[test]
fn threshold_crossing_is_at_c_equal_one() {
    let (_, gs) = gs_2_half();
    let p = gs.params;
    let holds = |c: f64| evaluate(&gs.profile.scaled(c), &Potential::zero(), &p, &gs).unwrap();
    let at_one = holds(1.0);
    assert!((at_one.cond_grad_glob.lhs / gs.threshold_grad - 1.0).abs() < 1e-6);
    assert!((at_one.cond_ener.lhs / gs.threshold_energy - 1.0).abs() < 1e-6);
    let (mut lo, mut hi) = (0.5, 1.5);
    assert!(holds(lo).cond_grad_glob.holds && !holds(hi).cond_grad_glob.holds);
    while hi - lo > 1e-8 {
        let mid = 0.5 * (lo + hi);
        if holds(mid).cond_grad_glob.holds {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    assert!((lo - 1.0).abs() < 1e-6, "c* = {lo}");
    // the blow-up gradient condition is the mirror image
    assert!(holds(1.0 + 1e-5).cond_grad_blow.holds && !holds(1.0 - 1e-5).cond_grad_blow.holds);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn classifier_scaling_covariance(c in 0.1f64..4.0, width in 0.5f64..2.0, chirp in -0.5f64..0.5) {
        let (grid, gs) = gs_2_half();
        let p = gs.params;
        let sigma = p.sigma_c().unwrap();
        let u = chirped(&grid, 1.0, width, chirp);
        let a = evaluate(&u, &Potential::zero(), &p, &gs).unwrap();
        let b = evaluate(&u.scaled(c), &Potential::zero(), &p, &gs).unwrap();
        let rel = |x: f64, y: f64| (x - y).abs() / y.abs();
        prop_assert!(rel(b.mass, c * c * a.mass) < 1e-12);
        prop_assert!(rel(b.grad_sq, c * c * a.grad_sq) < 1e-12);
        prop_assert!(rel(b.cond_grad_glob_refi.lhs, c.powf(1.0 + sigma) * a.cond_grad_glob_refi.lhs) < 1e-12);
        prop_assert!(rel(b.cond_grad_glob.lhs, c.powf(1.0 + sigma) * a.cond_grad_glob.lhs) < 1e-12);
    }

    #[test]
    fn split_step_conserves_mass(
        amp in 0.2f64..2.0, width in 0.5f64..2.0, chirp in -0.5f64..0.5,
        t in 0.0f64..1.0, b in 0.0f64..0.9, focusing in any::<bool>(),
    ) {
        let alpha = (4.0 - 2.0 * b) * (1.0 / 3.0 + 2.0 / 3.0 * (0.05 + 0.9 * t));
        let kind = if focusing { Nonlinearity::Focusing } else { Nonlinearity::Defocusing };
        let p = ModelParams::new(alpha, b, kind).unwrap();
        let grid = build_grid(20.0, 256).unwrap();
        let mut u = chirped(&grid, amp, width, chirp);
        let m0 = u.mass();
        for _ in 0..20 {
            u = step(&u, &Potential::zero(), &p, 1e-3).unwrap();
        }
        prop_assert!((u.mass() / m0 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cutoff_bounds(radius in 0.5f64..30.0, n in 256usize..2048) {
        let grid = build_grid(3.0 * radius, n).unwrap();
        let phi = build_cutoff(CutoffKind::PhiR, radius, &grid).unwrap();
        let lap = phi.laplacian();
        for (j, &r) in grid.nodes().iter().enumerate() {
            prop_assert!(phi.second[j] >= -1e-9 && phi.second[j] <= 2.0 + 1e-9);
            prop_assert!(lap[j] <= 6.0 + 1e-9);
            if r <= radius {
                prop_assert!((phi.value[j] - r * r).abs() <= 1e-9 * radius * radius);
            }
        }
        let chi = build_cutoff(CutoffKind::ChiR, radius, &grid).unwrap();
        prop_assert!(chi.value.iter().all(|&c| (-1e-9..=1.0 + 1e-9).contains(&c)));
    }
}

#[test]
fn linear_flow_is_the_exact_kinetic_propagator() {
    let grid = build_grid(20.0, 512).unwrap();
    let u = chirped(&grid, 1.0, 1.0, 0.3);
    let cfg = SimulationConfig {
        model: ModelSection { alpha: 2.0, b: 0.0, nonlinearity: Nonlinearity::Defocusing, coupling: 0.0 },
        potential: PotentialSection::default(),
        grid: GridSection { r_max: 20.0, n: 512 },
        time: TimeSection { dt: 0.01, t_end: 0.5, record_stride: 10, snapshot_stride: 1000 },
        detection: DetectionSection::default(),
        initial: InitialData::Gaussian { amplitude: 1.0, width: 1.0, chirp: 0.3 },
        output: OutputSection::default(),
    };
    let s = run(&cfg).unwrap();
    let exact = u.kinetic_propagate(s.t_final());
    assert!(s.final_field.l2_distance(&exact) / u.mass().sqrt() < 1e-10);
}

#[test]
fn energy_error_is_second_order() {
    // defocusing cubic, b = 0: smooth, so Strang is clean second order
    let err = |dt: f64| {
        let cfg = SimulationConfig {
            model: ModelSection { alpha: 2.0, b: 0.0, nonlinearity: Nonlinearity::Defocusing, coupling: 1.0 },
            potential: PotentialSection::default(),
            grid: GridSection { r_max: 30.0, n: 1024 },
            time: TimeSection { dt, t_end: 0.5, record_stride: 1, snapshot_stride: 1000 },
            detection: DetectionSection::default(),
            initial: InitialData::Gaussian { amplitude: 1.0, width: 1.0, chirp: 0.0 },
            output: OutputSection::default(),
        };
        run(&cfg).unwrap().energy_drift()
    };
    let (e1, e2) = (err(0.02), err(0.01));
    let order = (e1 / e2).log2();
    assert!((order - 2.0).abs() < 0.3, "order {order} ({e1:e}, {e2:e})");
}
