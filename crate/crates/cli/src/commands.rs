use std::path::{Path, PathBuf};

use inlsv_core::classifier::{dichotomy_sweep, evaluate};
use inlsv_core::evolution::{initial_field, run_from, EventKind, SimulationConfig, TimeSeries};
use inlsv_core::exponents::{
    gamma_c, is_admissible, l4_splitting_pair, range_exponents, remark_pairs, sigma_c, Admissibility, Exponent,
    PairClass, RemarkPairs,
};
use inlsv_core::potentials::{certify, PotentialCertificate};
use inlsv_core::{build_grid, builtin, solve_ground_state, ModelParams, ShootingOptions};
use serde::Serialize;

use crate::artifacts::{column, num, record_header, record_rows, OutDir};
use crate::error::CliError;
use crate::svg::line_plot;
use crate::verify;

/// What a command leaves behind, recorded as `manifest.json`.
#[derive(Debug, Serialize)]
pub struct ExperimentManifest {
    pub command: String,
    pub config: Option<String>,
    pub out_dir: String,
    /// Seeds of randomized corpora; every pipeline here is deterministic.
    pub seeds: Vec<u64>,
    pub artifacts: Vec<String>,
}

pub struct Outcome {
    pub stdout: String,
    /// The pipeline completed but a quality check failed (exit code 2).
    pub numeric_failure: bool,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Self { stdout, numeric_failure: false }
    }
}

pub fn load_config(path: &Path) -> Result<SimulationConfig<f64>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Precondition(format!("cannot read config {}: {e}", path.display())))?;
    Ok(SimulationConfig::from_toml(&text)?)
}

pub fn finish(out: &mut OutDir, command: &str, config: Option<&Path>) -> Result<(), CliError> {
    let manifest = ExperimentManifest {
        command: command.into(),
        config: config.map(|p| p.display().to_string()),
        out_dir: out.root().display().to_string(),
        seeds: Vec::new(),
        artifacts: out
            .written()
            .iter()
            .filter_map(|p| p.file_name().map(|f| f.to_string_lossy().into_owned()))
            .chain(std::iter::once("manifest.json".to_string()))
            .collect(),
    };
    out.write_json("manifest.json", "manifest", &manifest)?;
    Ok(())
}

pub struct GroundStateArgs {
    pub alpha: f64,
    pub b: f64,
    pub r_max: f64,
    pub n: usize,
    pub tol: Option<f64>,
    pub max_residual: f64,
}

pub fn ground_state(out: &mut OutDir, args: &GroundStateArgs) -> Result<Outcome, CliError> {
    let GroundStateArgs { alpha, b, r_max, n, tol, max_residual } = *args;
    let params = ModelParams::focusing(alpha, b)?;
    let grid = build_grid(r_max, n)?;
    let mut opts = ShootingOptions::default();
    if let Some(t) = tol {
        opts.tol = t;
    }
    let gs = solve_ground_state(&params, &grid, &opts)?;
    let rows: Vec<Vec<String>> =
        grid.nodes().iter().zip(gs.profile.values()).map(|(&r, q)| vec![num(r), num(q.re)]).collect();
    out.write_csv("ground_state.csv", &["r".into(), "Q".into()], &rows)?;
    let json = out.write_json("ground_state.json", "ground_state", &gs.constants())?;
    let worst = gs.pohozaev_res[0].max(gs.pohozaev_res[1]);
    let numeric_failure = !(worst <= max_residual);
    if numeric_failure {
        eprintln!("inlsv: Pohozaev residual {worst:e} exceeds {max_residual:e}; enlarge r_max or n");
    }
    Ok(Outcome { stdout: json, numeric_failure })
}

#[derive(Serialize)]
struct SeriesSummary<'a> {
    config: &'a SimulationConfig<f64>,
    potential: &'a PotentialCertificate<f64>,
    events: Vec<EventRow<'a>>,
    steps: usize,
    halvings: usize,
    final_dt: f64,
    t_final: f64,
    mass_drift: f64,
    energy_drift: f64,
    grad_growth: f64,
    records: usize,
}

#[derive(Serialize)]
struct EventRow<'a> {
    t: f64,
    kind: EventKind,
    detail: &'a str,
}

fn summary<'a>(config: &'a SimulationConfig<f64>, s: &'a TimeSeries<f64>) -> SeriesSummary<'a> {
    SeriesSummary {
        config,
        potential: &s.certificate,
        events: s.events.iter().map(|e| EventRow { t: e.t, kind: e.kind, detail: &e.detail }).collect(),
        steps: s.steps,
        halvings: s.halvings,
        final_dt: s.final_dt,
        t_final: s.t_final(),
        mass_drift: s.mass_drift(),
        energy_drift: s.energy_drift(),
        grad_growth: s.grad_growth(),
        records: s.records.len(),
    }
}

pub const DEFAULT_PLOTS: [&str; 3] = ["grad_sq", "variance", "ball_mass_*"];

/// One SVG per entry of `plots`; a trailing `*` gathers all columns with that
/// prefix into one figure.
fn write_plots(out: &mut OutDir, series: &TimeSeries<f64>, plots: &[String]) -> Result<(), CliError> {
    let header = record_header(series);
    for spec in plots {
        let names: Vec<&String> = match spec.strip_suffix('*') {
            Some(prefix) => header.iter().filter(|h| h.starts_with(prefix)).collect(),
            None => header.iter().filter(|h| *h == spec).collect(),
        };
        if names.is_empty() {
            return Err(CliError::Precondition(format!(
                "unknown plot column '{spec}' (available: {})",
                header.join(", ")
            )));
        }
        let data: Vec<(String, Vec<(f64, f64)>)> =
            names.iter().map(|n| ((*n).clone(), column(series, n).unwrap_or_default())).collect();
        let stem = spec.trim_end_matches('*').trim_end_matches('_');
        out.write(&format!("plot_{stem}.svg"), &line_plot(stem, "t", &data))?;
    }
    Ok(())
}

pub fn simulate(out: &mut OutDir, config_path: &Path, plots: &[String]) -> Result<Outcome, CliError> {
    let config = load_config(config_path)?;
    let params = config.params()?;
    let grid = build_grid(config.grid.r_max, config.grid.n)?;
    let potential = builtin(&config.potential.name, config.potential.amplitude)?;
    let u0 = initial_field(&config.initial, &params, &grid)?;
    let series = run_from(&config, u0, &potential)?;
    out.write_csv("records.csv", &record_header(&series), &record_rows(&series))?;
    write_plots(out, &series, plots)?;
    let json = out.write_json("series.json", "series", &summary(&config, &series))?;
    Ok(Outcome::ok(json))
}

pub fn classify(out: &mut OutDir, config_path: &Path, simulate: bool) -> Result<Outcome, CliError> {
    let config = load_config(config_path)?;
    let params = config.params()?;
    let grid = build_grid(config.grid.r_max, config.grid.n)?;
    let potential = builtin(&config.potential.name, config.potential.amplitude)?;
    let u0 = initial_field(&config.initial, &params, &grid)?;
    let gs = solve_ground_state(&ModelParams::focusing(params.alpha, params.b)?, &grid, &ShootingOptions::default())?;
    let mut report = evaluate(&u0, &potential, &params, &gs)?;
    if simulate {
        let series = run_from(&config, u0, &potential)?;
        let events: Vec<EventKind> = series.events.iter().map(|e| e.kind).collect();
        report = report.with_events(&events);
        out.write_csv("records.csv", &record_header(&series), &record_rows(&series))?;
    }
    let json = out.write_json("classification.json", "classification", &report)?;
    Ok(Outcome::ok(json))
}

pub fn sweep(out: &mut OutDir, config_path: &Path, c_values: &[f64], jobs: Option<usize>) -> Result<Outcome, CliError> {
    let config = load_config(config_path)?;
    let params = config.params()?;
    let grid = build_grid(config.grid.r_max, config.grid.n)?;
    let potential = builtin(&config.potential.name, config.potential.amplitude)?;
    let gs = solve_ground_state(&ModelParams::focusing(params.alpha, params.b)?, &grid, &ShootingOptions::default())?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        if j == 0 {
            return Err(CliError::Precondition("--jobs must be at least 1".into()));
        }
        pool = pool.num_threads(j);
    }
    let pool = pool.build().map_err(|e| CliError::Precondition(format!("thread pool: {e}")))?;
    let table = pool.install(|| dichotomy_sweep(c_values, &gs, &potential, &params, &config))?;
    let header: Vec<String> = [
        "c", "prediction", "events", "event_times", "consistent", "grad_growth", "pot_nl_ratio", "t_final", "steps",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let rows: Vec<Vec<String>> = table
        .rows
        .iter()
        .map(|r| {
            let events: Vec<String> = r.events.iter().map(|k| event_name(*k).to_string()).collect();
            let times: Vec<String> = r.event_times.iter().map(|&t| num(t)).collect();
            vec![
                num(r.c),
                r.prediction.name().to_string(),
                events.join(";"),
                times.join(";"),
                r.consistent.map_or("".into(), |b| b.to_string()),
                num(r.grad_growth),
                num(r.pot_nl_ratio),
                num(r.t_final),
                r.steps.to_string(),
            ]
        })
        .collect();
    out.write_csv("sweep.csv", &header, &rows)?;
    let json = out.write_json("sweep.json", "sweep", &table)?;
    Ok(Outcome::ok(json))
}

fn event_name(k: EventKind) -> &'static str {
    match k {
        EventKind::BlowupDetected => "blowup_detected",
        EventKind::DecayDetected => "decay_detected",
        EventKind::BoundaryReflection => "boundary_reflection",
        EventKind::Completed => "completed",
    }
}

#[derive(Serialize)]
struct CertificateOut<'a> {
    name: &'a str,
    amplitude: f64,
    r_max: f64,
    n: usize,
    #[serde(flatten)]
    certificate: PotentialCertificate<f64>,
}

pub fn check_potential(out: &mut OutDir, name: &str, amp: f64, r_max: f64, n: usize) -> Result<Outcome, CliError> {
    let v = builtin(name, amp)?;
    let grid = build_grid(r_max, n)?;
    let certificate = certify(&v, &grid);
    let json = out.write_json("potential.json", "potential_certificate", &CertificateOut { name, amplitude: amp, r_max, n, certificate })?;
    Ok(Outcome::ok(json))
}

#[derive(Serialize)]
struct PairCheck {
    q: f64,
    r: f64,
    in_s0: bool,
    r_in_2_3: bool,
}

#[derive(Serialize)]
struct ExponentTable {
    alpha: f64,
    b: f64,
    gamma_c: f64,
    sigma_c: Option<f64>,
    two_star: f64,
    two_lower_star: f64,
    b_in_range: bool,
    intercritical: bool,
    theta: f64,
    remark_pairs: Option<RemarkPairs<f64>>,
    remark_pairs_error: Option<String>,
    l4_pair: PairCheck,
    s0_endpoint_excluded: bool,
}

pub fn exponents(out: &mut OutDir, alpha: f64, b: f64, theta: f64) -> Result<Outcome, CliError> {
    if !(alpha > 0.0 && alpha.is_finite() && b.is_finite() && b >= 0.0) {
        return Err(CliError::Precondition(format!("need alpha > 0 and b >= 0, got ({alpha}, {b})")));
    }
    let rules = Admissibility::DEFAULT;
    let range = range_exponents(b);
    let (pairs, pairs_err) = match remark_pairs(theta, alpha, b, &rules) {
        Ok(p) => (Some(p), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let eps = 1e-3;
    let (q4, r4) = l4_splitting_pair(eps);
    let table = ExponentTable {
        alpha,
        b,
        gamma_c: gamma_c(alpha, b),
        sigma_c: sigma_c(alpha, b).ok(),
        two_star: range.two_star,
        two_lower_star: range.two_lower_star,
        b_in_range: range.b_in_range,
        intercritical: ModelParams::focusing(alpha, b).map(|p| p.is_intercritical()).unwrap_or(false),
        theta,
        remark_pairs: pairs,
        remark_pairs_error: pairs_err,
        l4_pair: PairCheck {
            q: q4,
            r: r4,
            in_s0: is_admissible(Exponent::Finite(q4), Exponent::Finite(r4), PairClass::S0, alpha, b, &rules),
            r_in_2_3: (2.0..3.0).contains(&r4),
        },
        s0_endpoint_excluded: !is_admissible(Exponent::Finite(2.0), Exponent::Infinite, PairClass::S0, alpha, b, &rules),
    };
    let json = out.write_json("exponents.json", "exponents", &table)?;
    Ok(Outcome::ok(json))
}

pub fn verify(out: &mut OutDir) -> Result<Outcome, CliError> {
    let report = verify::run_suite()?;
    out.write_json("verify.json", "verify", &report)?;
    Ok(Outcome { stdout: verify::table(&report), numeric_failure: !report.all_pass })
}

pub fn config_arg(p: &Option<PathBuf>) -> Option<&Path> {
    p.as_deref()
}
