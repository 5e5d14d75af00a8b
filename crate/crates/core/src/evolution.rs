//! Strang-split time stepping for
//! `i u_t = -Delta u + V u + kappa |x|^{-b} |u|^alpha u` with conservation
//! monitoring and event detection.
//!
//! Both sub-steps are exact: the phase step because `|u|` does not change
//! under it, the kinetic step because it is diagonal in the sine basis. Mass is
//! therefore conserved to rounding and energy drift measures the splitting
//! error alone.

use std::sync::Arc;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::functionals::{default_exponents, default_radii, FunctionalRecord, Recorder};
use crate::ground_state::{solve_ground_state, ShootingOptions};
use crate::params::{ModelParams, Nonlinearity};
use crate::potentials::{builtin, certify, Potential, PotentialCertificate};
use crate::radial::{build_grid, RadialField, RadialGrid, SineWorkspace};
use crate::scalar::{from_usize, lit, Real};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSection<T: Real> {
    pub alpha: T,
    pub b: T,
    pub nonlinearity: Nonlinearity,
    /// Multiplier on the nonlinear term; `0` gives the linear flow.
    #[serde(default = "one")]
    pub coupling: T,
}

fn one<T: Real>() -> T {
    T::one()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialSection<T: Real> {
    pub name: String,
    pub amplitude: T,
}

impl<T: Real> Default for PotentialSection<T> {
    fn default() -> Self {
        Self { name: "zero".into(), amplitude: T::zero() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSection<T> {
    pub r_max: T,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeSection<T> {
    pub dt: T,
    pub t_end: T,
    #[serde(default = "default_stride")]
    pub record_stride: usize,
    #[serde(default = "default_snapshot_stride")]
    pub snapshot_stride: usize,
}

fn default_stride() -> usize {
    10
}

fn default_snapshot_stride() -> usize {
    1000
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DetectionSection<T: Real> {
    /// Blow-up once `||grad u|| > grad_blowup_factor ||grad u_0||`.
    pub grad_blowup_factor: T,
    /// Blow-up once the adaptive step falls below this.
    pub dt_floor: T,
    /// Decay once `pot_nl < decay_factor * pot_nl(0)` for `decay_window` time units.
    pub decay_factor: T,
    pub decay_window: T,
    /// Largest accepted relative mass change per step.
    pub mass_drift_tol: T,
    /// Largest accepted `dt * max |V + kappa r^{-b} |u|^alpha|` per step.
    pub phase_limit: T,
    /// Boundary reflection once the shell `r > 0.9 r_max` holds this fraction of the mass.
    pub reflection_fraction: T,
    pub max_steps: usize,
}

impl<T: Real> Default for DetectionSection<T> {
    fn default() -> Self {
        Self {
            grad_blowup_factor: lit(50.0),
            dt_floor: lit(1e-8),
            decay_factor: lit(0.1),
            decay_window: T::one(),
            mass_drift_tol: lit(1e-10),
            phase_limit: T::PI(),
            reflection_fraction: lit(0.01),
            max_steps: 20_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialData<T: Real> {
    /// `amplitude e^{-r^2/(2 width^2)} e^{i chirp r^2}`.
    Gaussian {
        amplitude: T,
        width: T,
        #[serde(default = "zero")]
        chirp: T,
    },
    /// `scale * Q` with `Q` the ground state for the model's `(alpha, b)`.
    GroundState { scale: T },
    Zero,
}

fn zero<T: Real>() -> T {
    T::zero()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OutputSection<T> {
    /// Ball-mass radii; empty selects `{1, 2, 5, R/2}`.
    pub radii: Vec<T>,
    /// `R` of the localized virial action; `None` skips it.
    pub localized_radius: Option<T>,
}

impl<T> Default for OutputSection<T> {
    fn default() -> Self {
        Self { radii: Vec::new(), localized_radius: None }
    }
}

/// Complete description of one run; the on-disk form is TOML with one table
/// per section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig<T: Real> {
    pub model: ModelSection<T>,
    #[serde(default)]
    pub potential: PotentialSection<T>,
    pub grid: GridSection<T>,
    pub time: TimeSection<T>,
    #[serde(default)]
    pub detection: DetectionSection<T>,
    pub initial: InitialData<T>,
    #[serde(default)]
    pub output: OutputSection<T>,
}

impl<T: Real> SimulationConfig<T> {
    pub fn params(&self) -> Result<ModelParams<T>> {
        ModelParams::new(self.model.alpha, self.model.b, self.model.nonlinearity)
    }

    pub fn validate(&self) -> Result<()> {
        self.params()?;
        let pos = |x: T| x > T::zero() && x.is_finite();
        let t = &self.time;
        if !pos(t.dt) || !pos(t.t_end) {
            return Err(invalid(format!("dt and t_end must be positive, got {} and {}", t.dt, t.t_end)));
        }
        if t.record_stride == 0 || t.snapshot_stride == 0 {
            return Err(invalid("strides must be at least 1"));
        }
        let d = &self.detection;
        let thresholds = [
            d.grad_blowup_factor,
            d.dt_floor,
            d.decay_factor,
            d.decay_window,
            d.mass_drift_tol,
            d.phase_limit,
            d.reflection_fraction,
        ];
        if !thresholds.iter().all(|&x| pos(x)) {
            return Err(invalid("detection thresholds must be positive"));
        }
        if !(self.model.coupling >= T::zero()) {
            return Err(invalid("coupling must be non-negative"));
        }
        if self.output.radii.iter().any(|&r| !pos(r)) || self.output.localized_radius.is_some_and(|r| !pos(r)) {
            return Err(invalid("output radii must be positive"));
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self>
    where
        T: serde::de::DeserializeOwned,
    {
        let cfg: Self = toml::from_str(text).map_err(|e| invalid(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String>
    where
        T: Serialize,
    {
        toml::to_string(self).map_err(|e| invalid(format!("config: {e}")))
    }
}

/// Precomputed pieces of the split-step flow on one grid.
#[derive(Debug, Clone)]
pub struct Propagator<T: Real> {
    grid: Arc<RadialGrid<T>>,
    v: Vec<T>,
    /// `kappa * coupling * r^{-b}`, corrected at the first two nodes.
    weight: Vec<T>,
    half_alpha: T,
    int_power: Option<i32>,
    ws: SineWorkspace<T>,
    /// Kinetic multipliers for the last step size, scale included.
    kinetic: Option<(T, Vec<Complex<T>>)>,
}

impl<T: Real> Propagator<T> {
    pub fn new(grid: Arc<RadialGrid<T>>, potential: &Potential<T>, params: &ModelParams<T>, coupling: T) -> Self {
        let v = grid.nodes().iter().map(|&r| potential.eval(r)).collect();
        // c_j / w_j is r_j^{-b} except at the first two nodes, so the phase
        // step conserves exactly the nonlinear energy that is reported
        let k = params.kappa() * coupling;
        let weight = grid.singular_weights(params.b).iter().zip(grid.weights()).map(|(&c, &w)| k * c / w).collect();
        let half_alpha = params.alpha / lit(2.0);
        let int_power = (half_alpha.fract() == T::zero() && half_alpha <= lit(16.0)).then(|| half_alpha.to_i32()).flatten();
        let ws = grid.workspace();
        Self { grid, v, weight, half_alpha, int_power, ws, kinetic: None }
    }

    fn rate(&self, z: Complex<T>, v: T, w: T) -> T {
        let s = z.norm_sqr();
        let p = match self.int_power {
            Some(k) => s.powi(k),
            None if s == T::zero() => T::zero(),
            None => s.powf(self.half_alpha),
        };
        v + w * p
    }

    /// `u <- u exp(-i dt (V + kappa r^{-b} |u|^alpha))`.
    pub fn phase_step(&self, u: &mut [Complex<T>], dt: T) {
        for ((z, &v), &w) in u.iter_mut().zip(&self.v).zip(&self.weight) {
            let rate = self.rate(*z, v, w);
            let (sin, cos) = (-dt * rate).sin_cos();
            *z = *z * Complex::new(cos, sin);
        }
    }

    /// `max_j |V + kappa r^{-b} |u|^alpha|`.
    pub fn max_phase_rate(&self, u: &RadialField<T>) -> T {
        u.values()
            .iter()
            .zip(&self.v)
            .zip(&self.weight)
            .map(|((&z, &v), &w)| self.rate(z, v, w).abs())
            .fold(T::zero(), T::max)
    }

    fn kinetic_step(&mut self, u: &mut [Complex<T>], dt: T) {
        if dt == T::zero() {
            return;
        }
        let grid = &self.grid;
        if self.kinetic.as_ref().is_none_or(|(h, _)| *h != dt) {
            let scale = lit::<T>(2.0) / from_usize::<T>(grid.len() + 1);
            let m = (1..=grid.len()).map(|k| Complex::from_polar(scale, -dt * grid.eigenvalue(k))).collect();
            self.kinetic = Some((dt, m));
        }
        let Some((_, mult)) = &self.kinetic else { unreachable!() };
        for (z, &r) in u.iter_mut().zip(grid.nodes()) {
            *z = *z * r;
        }
        grid.sine_transform_in(u, &mut self.ws);
        for (z, &m) in u.iter_mut().zip(mult) {
            *z = *z * m;
        }
        grid.sine_transform_in(u, &mut self.ws);
        for (z, &r) in u.iter_mut().zip(grid.nodes()) {
            *z = *z / r;
        }
    }

    /// One Strang step: half phase, full kinetic, half phase. Negative `dt`
    /// runs backwards.
    pub fn step(&mut self, u: &RadialField<T>, dt: T) -> Result<RadialField<T>> {
        if **u.grid() != *self.grid {
            return Err(invalid("field and propagator live on different grids"));
        }
        let half = dt / lit(2.0);
        let mut w = u.values().to_vec();
        self.phase_step(&mut w, half);
        self.kinetic_step(&mut w, dt);
        self.phase_step(&mut w, half);
        let out = RadialField::from_parts(self.grid.clone(), w);
        if !out.is_finite() {
            return Err(Error::NumericOverflow(format!("non-finite field after step dt = {dt}")));
        }
        Ok(out)
    }
}

/// One Strang step of the full flow.
pub fn step<T: Real>(u: &RadialField<T>, potential: &Potential<T>, params: &ModelParams<T>, dt: T) -> Result<RadialField<T>> {
    Propagator::new(u.grid().clone(), potential, params, T::one()).step(u, dt)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    BlowupDetected,
    DecayDetected,
    BoundaryReflection,
    Completed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event<T> {
    pub t: T,
    pub kind: EventKind,
    pub detail: String,
}

/// Output of a run.
#[derive(Debug, Clone)]
pub struct TimeSeries<T: Real> {
    pub params: ModelParams<T>,
    pub potential: Potential<T>,
    pub certificate: PotentialCertificate<T>,
    pub radii: Vec<T>,
    pub records: Vec<FunctionalRecord<T>>,
    pub snapshots: Vec<(T, RadialField<T>)>,
    pub events: Vec<Event<T>>,
    pub steps: usize,
    pub halvings: usize,
    pub final_dt: T,
    pub final_field: RadialField<T>,
    pub nonlinear: bool,
}

impl<T: Real> TimeSeries<T> {
    pub fn has_event(&self, kind: EventKind) -> bool {
        self.events.iter().any(|e| e.kind == kind)
    }

    pub fn event(&self, kind: EventKind) -> Option<&Event<T>> {
        self.events.iter().find(|e| e.kind == kind)
    }

    fn max_rel_dev(&self, f: impl Fn(&FunctionalRecord<T>) -> T) -> T {
        let Some(first) = self.records.first() else { return T::zero() };
        let f0 = f(first);
        let scale = if f0 == T::zero() { T::one() } else { f0.abs() };
        self.records.iter().map(|r| (f(r) - f0).abs() / scale).fold(T::zero(), T::max)
    }

    /// `max_t |M(t) - M(0)| / M(0)` over the records.
    pub fn mass_drift(&self) -> T {
        self.max_rel_dev(|r| r.mass)
    }

    /// `max_t |E(t) - E(0)| / |E(0)|` over the records.
    pub fn energy_drift(&self) -> T {
        self.max_rel_dev(|r| r.energy)
    }

    /// `max_t ||grad u(t)|| / ||grad u_0||`.
    pub fn grad_growth(&self) -> T {
        let Some(first) = self.records.first() else { return T::one() };
        let g0 = first.grad_sq.sqrt();
        if g0 == T::zero() {
            return T::one();
        }
        self.records.iter().map(|r| r.grad_sq.sqrt() / g0).fold(T::zero(), T::max)
    }

    pub fn t_final(&self) -> T {
        self.records.last().map_or(T::zero(), |r| r.t)
    }
}

/// Builds everything described by `config` and runs it.
pub fn run<T: Real>(config: &SimulationConfig<T>) -> Result<TimeSeries<T>> {
    config.validate()?;
    let params = config.params()?;
    let grid = build_grid(config.grid.r_max, config.grid.n)?;
    let potential = builtin(&config.potential.name, config.potential.amplitude)?;
    let u0 = initial_field(&config.initial, &params, &grid)?;
    run_from(config, u0, &potential)
}

/// Samples the configured initial data on `grid`.
pub fn initial_field<T: Real>(
    init: &InitialData<T>,
    params: &ModelParams<T>,
    grid: &Arc<RadialGrid<T>>,
) -> Result<RadialField<T>> {
    match *init {
        InitialData::Gaussian { amplitude, width, chirp } => {
            if !(width > T::zero()) {
                return Err(invalid("Gaussian width must be positive"));
            }
            RadialField::from_fn(grid.clone(), |r| {
                Complex::from_polar(amplitude * (-r * r / (lit::<T>(2.0) * width * width)).exp(), chirp * r * r)
            })
        }
        InitialData::GroundState { scale } => {
            let focusing = ModelParams::focusing(params.alpha, params.b)?;
            let gs = solve_ground_state(&focusing, grid, &ShootingOptions::default())?;
            Ok(gs.profile.scaled(scale))
        }
        InitialData::Zero => Ok(RadialField::zeros(grid.clone())),
    }
}

/// Runs `config`'s time stepping from `u0` (whose grid replaces the
/// configured one) under `potential`.
pub fn run_from<T: Real>(
    config: &SimulationConfig<T>,
    u0: RadialField<T>,
    potential: &Potential<T>,
) -> Result<TimeSeries<T>> {
    config.validate()?;
    let params = config.params()?;
    let grid = u0.grid().clone();
    let certificate = certify(potential, &grid);
    if !certificate.flags.kato_neg_below_4pi {
        return Err(Error::OutOfRange(format!(
            "potential {} has ||V_-||_K = {} >= 4 pi",
            potential.label(),
            certificate.kato_norm_neg
        )));
    }
    let radii = if config.output.radii.is_empty() {
        default_radii(config.output.localized_radius.unwrap_or(grid.r_max() / lit(2.0)))
    } else {
        config.output.radii.clone()
    };
    let mut recorder = Recorder::new(grid.clone(), params, potential)?
        .with_coupling(config.model.coupling)
        .with_radii(radii.clone())
        .with_exponents(if params.is_intercritical() { default_exponents(&params) } else { Vec::new() });
    if let Some(r) = config.output.localized_radius {
        recorder = recorder.with_localized(r)?;
    }
    let coupling = config.model.coupling;
    let mut prop = Propagator::new(grid.clone(), potential, &params, coupling);
    let det = &config.detection;
    let time = &config.time;

    let mut series = TimeSeries {
        params,
        potential: potential.clone(),
        certificate,
        radii,
        records: Vec::new(),
        snapshots: vec![(T::zero(), u0.clone())],
        events: Vec::new(),
        steps: 0,
        halvings: 0,
        final_dt: time.dt,
        final_field: u0.clone(),
        nonlinear: coupling > T::zero(),
    };
    let first = recorder.record(&u0, T::zero())?;
    let g0 = first.grad_sq.sqrt();
    let p0 = first.pot_nl;
    let mut reflected = first.shell_mass > det.reflection_fraction * first.mass;
    if reflected {
        series.events.push(Event {
            t: T::zero(),
            kind: EventKind::BoundaryReflection,
            detail: "initial data already reaches the outer shell".into(),
        });
    }
    series.records.push(first);

    let mut m0 = u0.mass();
    let mut u = u0;
    let mut t = T::zero();
    let mut dt = time.dt;
    let mut below_since: Option<T> = None;
    let mut decayed = false;
    let eps = time.dt * lit(1e-9);
    let blowup = |series: &mut TimeSeries<T>, t: T, detail: String| {
        series.events.push(Event { t, kind: EventKind::BlowupDetected, detail });
    };
    'outer: while t < time.t_end - eps {
        if series.steps >= det.max_steps {
            return Err(Error::NoConvergence(format!("step budget {} exhausted at t = {t}", det.max_steps)));
        }
        let h = dt.min(time.t_end - t);
        let mut reject = h * prop.max_phase_rate(&u) > det.phase_limit;
        let mut next = None;
        if !reject {
            match prop.step(&u, h) {
                Ok(v) => {
                    let m1 = v.mass();
                    let drift = if m0 > T::zero() { (m1 - m0).abs() / m0 } else { T::zero() };
                    if drift > det.mass_drift_tol {
                        reject = true;
                    } else {
                        m0 = m1;
                        next = Some(v);
                    }
                }
                Err(Error::NumericOverflow(msg)) => {
                    blowup(&mut series, t, msg);
                    break 'outer;
                }
                Err(e) => return Err(e),
            }
        }
        let Some(v) = next else {
            debug_assert!(reject);
            dt = dt / lit(2.0);
            series.halvings += 1;
            if dt < det.dt_floor {
                blowup(&mut series, t, format!("time step fell below the floor {}", det.dt_floor));
                break;
            }
            continue;
        };
        u = v;
        t = t + h;
        series.steps += 1;
        let at_end = t >= time.t_end - eps;
        if series.steps % time.snapshot_stride == 0 || at_end {
            series.snapshots.push((t, u.clone()));
        }
        if series.steps % time.record_stride == 0 || at_end {
            let rec = recorder.record(&u, t)?;
            let growth = rec.grad_sq.sqrt();
            let shell = rec.shell_mass > det.reflection_fraction * rec.mass;
            let pot = rec.pot_nl;
            series.records.push(rec);
            if !reflected && shell {
                reflected = true;
                series.events.push(Event {
                    t,
                    kind: EventKind::BoundaryReflection,
                    detail: format!("more than {} of the mass beyond 0.9 r_max", det.reflection_fraction),
                });
            }
            if !decayed && p0 > T::zero() {
                if pot < det.decay_factor * p0 {
                    let since = *below_since.get_or_insert(t);
                    if t - since >= det.decay_window {
                        decayed = true;
                        series.events.push(Event {
                            t,
                            kind: EventKind::DecayDetected,
                            detail: format!("pot_nl below {} of its initial value since t = {since}", det.decay_factor),
                        });
                    }
                } else {
                    below_since = None;
                }
            }
            if growth > det.grad_blowup_factor * g0 && g0 > T::zero() {
                blowup(&mut series, t, format!("||grad u|| grew by more than {}", det.grad_blowup_factor));
                break;
            }
        }
    }
    if !series.has_event(EventKind::BlowupDetected) {
        series.events.push(Event { t, kind: EventKind::Completed, detail: format!("reached t = {t}") });
    }
    if series.records.last().is_some_and(|r| r.t < t) {
        series.records.push(recorder.record(&u, t)?);
    }
    if series.snapshots.last().is_some_and(|s| s.0 < t) {
        series.snapshots.push((t, u.clone()));
    }
    series.final_dt = dt;
    series.final_field = u;
    Ok(series)
}

/// Comparison of recorded virial quantities with finite differences in time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VirialReport<T> {
    /// Interior records compared.
    pub count: usize,
    /// `max |D^2 variance - 8K|`.
    pub max_abs_dev: T,
    /// `max |D^2 variance - 8K| / max |8K|` over the window.
    pub max_rel_dev: T,
    pub max_abs_8k: T,
    pub max_abs_d2: T,
    /// Same comparison for `d/dt M_{phi_R}` against its assembled rate.
    pub localized_rel_dev: Option<T>,
}

/// Second difference of the variance against `8K` (and, when recorded, first
/// difference of `M_{phi_R}` against its rate) at interior records with
/// `t` in `window`. Records whose neighbours are not equally spaced (after a
/// step halving, or at the final time) are skipped.
pub fn virial_verify<T: Real>(series: &TimeSeries<T>, window: (T, T)) -> Result<VirialReport<T>> {
    let recs: Vec<&FunctionalRecord<T>> =
        series.records.iter().filter(|r| r.t >= window.0 && r.t <= window.1).collect();
    if recs.len() < 3 {
        return Err(invalid("virial check needs at least three records in the window"));
    }
    let two = lit::<T>(2.0);
    let eight = lit::<T>(8.0);
    let (mut max_dev, mut max_8k, mut max_d2) = (T::zero(), T::zero(), T::zero());
    let (mut loc_dev, mut loc_scale) = (T::zero(), T::zero());
    let mut have_loc = true;
    let mut count = 0;
    let tol = lit::<T>(1e-6);
    for w in recs.windows(3) {
        let (h1, h2) = (w[1].t - w[0].t, w[2].t - w[1].t);
        if (h1 - h2).abs() > tol * h1.max(h2) {
            continue;
        }
        count += 1;
        let d2 = two * ((w[2].variance - w[1].variance) / h2 - (w[1].variance - w[0].variance) / h1) / (h1 + h2);
        let k8 = eight * w[1].k;
        max_dev = max_dev.max((d2 - k8).abs());
        max_8k = max_8k.max(k8.abs());
        max_d2 = max_d2.max(d2.abs());
        match (w[0].localized, w[1].localized, w[2].localized) {
            (Some(a), Some(b), Some(c)) => {
                let d1 = (c.action - a.action) / (h1 + h2);
                loc_dev = loc_dev.max((d1 - b.rate).abs());
                loc_scale = loc_scale.max(b.rate.abs());
            }
            _ => have_loc = false,
        }
    }
    if count == 0 {
        return Err(invalid("no equally spaced record triples in the window"));
    }
    let rel = |dev: T, scale: T| if scale > T::zero() { dev / scale } else { dev };
    Ok(VirialReport {
        count,
        max_abs_dev: max_dev,
        max_rel_dev: rel(max_dev, max_8k),
        max_abs_8k: max_8k,
        max_abs_d2: max_d2,
        localized_rel_dev: have_loc.then(|| rel(loc_dev, loc_scale)),
    })
}

/// Running minimum of a recorded ball mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evacuation<T> {
    pub radius: T,
    pub initial: T,
    pub running_min: T,
    /// Times at which a new minimum was reached.
    pub min_times: Vec<T>,
    /// `running_min / initial` (`0` for an empty ball).
    pub ratio: T,
    /// `ratio < 0.05`.
    pub evacuated: bool,
}

/// For each radius (which must be among the recorded ones) the running minimum
/// of `int_{|x| <= R} |u|^2` over the records.
pub fn evacuation_probe<T: Real>(series: &TimeSeries<T>, radii: &[T]) -> Result<Vec<Evacuation<T>>> {
    radii
        .iter()
        .map(|&radius| {
            let idx = series
                .radii
                .iter()
                .position(|&r| (r - radius).abs() <= lit::<T>(1e-12) * radius.abs().max(T::one()))
                .ok_or_else(|| invalid(format!("ball mass at R = {radius} was not recorded")))?;
            let mut masses = series.records.iter().map(|r| (r.t, r.ball_mass[idx].mass));
            let (_, initial) = masses.next().ok_or_else(|| invalid("empty time series"))?;
            let mut running_min = initial;
            let mut min_times = Vec::new();
            for (t, m) in masses {
                if m < running_min {
                    running_min = m;
                    min_times.push(t);
                }
            }
            let ratio = if initial > T::zero() { running_min / initial } else { T::zero() };
            Ok(Evacuation {
                radius,
                initial,
                running_min,
                min_times,
                ratio,
                evacuated: initial > T::zero() && ratio < lit(0.05),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(alpha: f64, b: f64, kind: Nonlinearity, init: InitialData<f64>) -> SimulationConfig<f64> {
        SimulationConfig {
            model: ModelSection { alpha, b, nonlinearity: kind, coupling: 1.0 },
            potential: PotentialSection::default(),
            grid: GridSection { r_max: 30.0, n: 512 },
            time: TimeSection { dt: 1e-2, t_end: 1.0, record_stride: 5, snapshot_stride: 50 },
            detection: DetectionSection::default(),
            initial: init,
            output: OutputSection::default(),
        }
    }

    #[test]
    fn phase_step_keeps_modulus() {
        let g = build_grid(10.0, 256).unwrap();
        let p = ModelParams::focusing(2.0, 0.5).unwrap();
        let prop = Propagator::new(g.clone(), &builtin("gaussian", 1.0).unwrap(), &p, 1.0);
        let u = RadialField::from_real_fn(g, |r: f64| 2.0 * (-r * r).exp()).unwrap();
        let mut w = u.values().to_vec();
        prop.phase_step(&mut w, 0.3);
        for (a, b) in w.iter().zip(u.values()) {
            assert!((a.norm() - b.norm()).abs() <= 4.0 * f64::EPSILON * b.norm());
        }
    }

    #[test]
    fn time_reversal() {
        let g = build_grid(20.0, 512).unwrap();
        let p = ModelParams::focusing(2.0, 0.5).unwrap();
        let mut prop = Propagator::new(g.clone(), &Potential::zero(), &p, 1.0);
        let u = RadialField::from_fn(g, |r: f64| Complex::from_polar((-r * r / 2.0).exp(), 0.1 * r)).unwrap();
        let fwd = prop.step(&u, 1e-2).unwrap();
        let back = prop.step(&fwd, -1e-2).unwrap();
        assert!(back.l2_distance(&u) < 1e-12);
    }

    #[test]
    fn zero_data_completes() {
        let s = run(&config(2.0, 0.5, Nonlinearity::Focusing, InitialData::Zero)).unwrap();
        assert!(s.has_event(EventKind::Completed));
        assert!(!s.has_event(EventKind::DecayDetected));
        assert!(s.records.iter().all(|r| r.mass == 0.0 && r.energy == 0.0 && r.pot_nl == 0.0));
    }

    #[test]
    fn record_times_increase() {
        let init = InitialData::Gaussian { amplitude: 1.0, width: 1.0, chirp: 0.0 };
        let s = run(&config(2.0, 0.5, Nonlinearity::Defocusing, init)).unwrap();
        assert!(s.records.windows(2).all(|w| w[1].t > w[0].t));
        assert!((s.t_final() - 1.0).abs() < 1e-12);
        assert!(s.events.iter().all(|e| e.t >= 0.0 && e.t <= 1.0));
        assert!(s.mass_drift() < 1e-12);
    }

    #[test]
    fn config_round_trip() {
        let init = InitialData::GroundState { scale: 0.9 };
        let cfg = config(2.0, 0.5, Nonlinearity::Focusing, init);
        let text = cfg.to_toml().unwrap();
        assert_eq!(SimulationConfig::<f64>::from_toml(&text).unwrap(), cfg);
    }

    #[test]
    fn invalid_config() {
        let mut cfg = config(2.0, 0.5, Nonlinearity::Focusing, InitialData::Zero);
        cfg.time.dt = 0.0;
        assert!(matches!(run(&cfg), Err(Error::InvalidArgument(_))));
        let mut cfg = config(2.0, 0.5, Nonlinearity::Focusing, InitialData::Zero);
        cfg.time.record_stride = 0;
        assert!(cfg.validate().is_err());
    }
}
