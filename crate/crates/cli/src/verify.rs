//! Invariant suite behind `inlsv verify`: small, fast instances of the
//! ground-state, conservation, virial, Gagliardo–Nirenberg, cutoff, exponent
//! and Kato-norm checks.

use std::f64::consts::PI;

use inlsv_core::evolution::{
    run, virial_verify, DetectionSection, GridSection, InitialData, ModelSection, OutputSection, PotentialSection,
    SimulationConfig, TimeSection,
};
use inlsv_core::exponents::{gamma_c, sigma_c};
use inlsv_core::functionals::{build_cutoff, gn_ratio, record, CutoffKind};
use inlsv_core::potentials::kato_norm;
use inlsv_core::{build_grid, builtin, solve_ground_state, ModelParams, Nonlinearity, Potential, RadialField, ShootingOptions};
use serde::Serialize;

use crate::error::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tol: f64,
    pub pass: bool,
}

impl Check {
    fn below(name: &str, value: f64, tol: f64) -> Self {
        Self { name: name.into(), value, tol, pass: value.is_finite() && value < tol }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
    pub all_pass: bool,
}

fn gaussian_config(kind: Nonlinearity, coupling: f64, r_max: f64, n: usize, t_end: f64) -> SimulationConfig<f64> {
    SimulationConfig {
        model: ModelSection { alpha: 2.0, b: 0.5, nonlinearity: kind, coupling },
        potential: PotentialSection::default(),
        grid: GridSection { r_max, n },
        time: TimeSection { dt: 1e-3, t_end, record_stride: 10, snapshot_stride: 1000 },
        detection: DetectionSection::default(),
        initial: InitialData::Gaussian { amplitude: 1.0, width: 1.0, chirp: 0.0 },
        output: OutputSection::default(),
    }
}

pub fn run_suite() -> Result<VerifyReport, CliError> {
    let mut checks = Vec::new();

    // ground state at (2, 1/2)
    let params = ModelParams::<f64>::focusing(2.0, 0.5)?;
    let grid = build_grid(20.0_f64, 4096)?;
    let gs = solve_ground_state(&params, &grid, &ShootingOptions::default())?;
    checks.push(Check::below("pohozaev residual", gs.pohozaev_res[0].max(gs.pohozaev_res[1]), 1e-5));
    let (ratio, closed) = gs.c_opt_two_ways();
    checks.push(Check::below("c_opt ratio vs closed form", (ratio - closed).abs() / closed, 1e-5));

    // Gagliardo–Nirenberg: equality at Q, strict below for a Gaussian
    let rec_q = record(&gs.profile, &Potential::zero(), &params, 0.0, &[])?;
    checks.push(Check::below("GN ratio at Q vs closed form", (gn_ratio(&rec_q, &params) - closed).abs() / closed, 1e-4));
    let g = RadialField::from_real_fn(grid.clone(), |r: f64| (-r * r / 2.0).exp())?;
    let rec_g = record(&g, &Potential::zero(), &params, 0.0, &[])?;
    let excess = gn_ratio(&rec_g, &params) / closed - 1.0;
    checks.push(Check::below("GN ratio excess for a Gaussian", excess, 1e-4));

    // conservation, defocusing
    let s = run(&gaussian_config(Nonlinearity::Defocusing, 1.0, 40.0, 1024, 2.0))?;
    checks.push(Check::below("mass drift", s.mass_drift(), 1e-8));
    checks.push(Check::below("energy drift", s.energy_drift(), 1e-6));

    // virial on the linear Gaussian, d^2/dt^2 ||x u||^2 = 12 pi^{3/2}
    let lin = run(&gaussian_config(Nonlinearity::Defocusing, 0.0, 40.0, 1024, 1.0))?;
    let rep = virial_verify(&lin, (0.0, 1.0))?;
    let exact = 12.0 * PI.powf(1.5);
    checks.push(Check::below("virial (linear) vs 12 pi^1.5", (rep.max_abs_d2 - exact).abs() / exact, 1e-3));
    checks.push(Check::below("virial (defocusing) D2 vs 8K", virial_verify(&s, (0.0, 2.0))?.max_rel_dev, 1e-2));

    // cutoff bounds
    let mut worst = 0.0f64;
    for radius in [1.0, 5.0, 20.0] {
        let cg = build_grid(3.0 * radius, 2048)?;
        let phi = build_cutoff(CutoffKind::PhiR, radius, &cg)?;
        let lap = phi.laplacian();
        for (j, &r) in cg.nodes().iter().enumerate() {
            worst = worst.max(-phi.second[j]).max(phi.second[j] - 2.0).max(lap[j] - 6.0);
            if r <= radius {
                worst = worst.max((phi.value[j] - r * r).abs() / (radius * radius));
            }
        }
        let chi = build_cutoff(CutoffKind::ChiR, radius, &cg)?;
        worst = chi.value.iter().fold(worst, |w, &c| w.max(-c).max(c - 1.0));
    }
    checks.push(Check { name: "cutoff bound violation".into(), value: worst + 0.0, tol: 1e-9, pass: worst <= 1e-9 });

    // sigma_c = (1 - gamma_c)/gamma_c
    let mut err = 0.0f64;
    for i in 0..20 {
        let b = 0.05 * i as f64;
        for j in 1..20 {
            let alpha = (4.0 - 2.0 * b) * (1.0 / 3.0 + (2.0 / 3.0) * j as f64 / 20.0);
            let g = gamma_c(alpha, b);
            err = err.max((sigma_c(alpha, b)? - (1.0 - g) / g).abs());
        }
    }
    checks.push(Check::below("sigma_c identity", err, 1e-12));

    // Kato norms: unit-ball indicator and e^{-r^2} are both 2 pi
    let kg = build_grid(10.0, 8192)?;
    let ind = kato_norm(&Potential::indicator(1.0, 1.0), &kg);
    let gau = kato_norm(&builtin("gaussian", 1.0)?, &kg);
    checks.push(Check::below("Kato norm, indicator", (ind / (2.0 * PI) - 1.0).abs(), 1e-3));
    checks.push(Check::below("Kato norm, Gaussian", (gau / (2.0 * PI) - 1.0).abs(), 1e-3));

    let all_pass = checks.iter().all(|c| c.pass);
    Ok(VerifyReport { checks, all_pass })
}

pub fn table(report: &VerifyReport) -> String {
    let width = report.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    let mut out = String::new();
    for c in &report.checks {
        out.push_str(&format!(
            "{:<width$}  {:>10.3e}  < {:<8.0e}  {}\n",
            c.name,
            c.value,
            c.tol,
            if c.pass { "PASS" } else { "FAIL" }
        ));
    }
    out
}
