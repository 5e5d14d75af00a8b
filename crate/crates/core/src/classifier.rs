//! Hypothesis tables for the scattering / blow-up theorems and comparison of
//! their predictions with simulated events.
//!
//! Decision table (`evaluate`), focusing sign:
//!
//! | range, `V` assumptions, `V >= 0` | energy below threshold | gradient product | scattering flags | prediction |
//! |---|---|---|---|---|
//! | any fails | - | - | - | `out_of_theorem_scope` |
//! | hold | no | - | - | `out_of_theorem_scope` |
//! | hold | yes | below (`Lambda` or `grad`) | hold | `global_scattering` |
//! | hold | yes | below (`Lambda` or `grad`) | fail | `global_bounded` |
//! | hold | yes | above | `x.grad V` in `L^{3/2}`, `2V + x.grad V >= 0` | `blowup_or_grow` |
//! | otherwise | | | | `out_of_theorem_scope` |
//!
//! Scattering flags are `x.grad V` in `L^{3/2}`, `x.grad V <= 0` and
//! `alpha < 3 - 2b`. Defocusing sign: `defocusing_scattering` when either
//! `0 < b < 1`, `(4-2b)/3 < alpha < 3-2b` with `x.grad V` in `L^{3/2}` and
//! `x.grad V <= 0`, or `b = 0`, `4/3 < alpha < 4` with `x.grad V <= 0` and
//! `V'` in every `L^q`, `3/2 <= q <= inf`; otherwise `out_of_theorem_scope`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::evolution::{run_from, EventKind, SimulationConfig};
use crate::functionals::record;
use crate::ground_state::GroundState;
use crate::params::{ModelParams, Nonlinearity};
use crate::potentials::{certify, Potential, PotentialCertificate};
use crate::radial::{RadialField, RadialGrid};
use crate::scalar::{lit, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Prediction {
    GlobalScattering,
    GlobalBounded,
    BlowupOrGrow,
    DefocusingScattering,
    OutOfTheoremScope,
}

impl Prediction {
    pub fn name(self) -> &'static str {
        match self {
            Self::GlobalScattering => "global_scattering",
            Self::GlobalBounded => "global_bounded",
            Self::BlowupOrGrow => "blowup_or_grow",
            Self::DefocusingScattering => "defocusing_scattering",
            Self::OutOfTheoremScope => "out_of_theorem_scope",
        }
    }
}

/// `lhs < rhs` (or `lhs > rhs` for the blow-up condition) with both sides.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Condition<T> {
    pub holds: bool,
    pub lhs: T,
    pub rhs: T,
}

impl<T: Real> Condition<T> {
    fn below(lhs: T, rhs: T) -> Self {
        Self { holds: lhs < rhs, lhs, rhs }
    }

    fn above(lhs: T, rhs: T) -> Self {
        Self { holds: lhs > rhs, lhs, rhs }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PotentialFlags {
    /// `V` in the Kato closure and in `L^{3/2}` (finite norms, negligible tail).
    pub kato_closure_l32: bool,
    /// `||V_-||_K < 4 pi`.
    pub kato_neg_below_4pi: bool,
    pub nonnegative: bool,
    pub x_grad_nonpositive: bool,
    pub x_grad_in_l32: bool,
    pub two_v_plus_x_grad_nonnegative: bool,
    /// `V'` in `L^{3/2}` and bounded on the grid.
    pub deriv_in_lq: bool,
    /// Always true: potentials here are radial by construction.
    pub radial: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RangeFlags {
    /// `0 < b < 1`.
    pub b_positive: bool,
    /// `(4-2b)/3 < alpha`.
    pub mass_supercritical: bool,
    /// `alpha < 4 - 2b`.
    pub global_theory: bool,
    /// `alpha < 3 - 2b`.
    pub scattering: bool,
    /// `b = 0` and `4/3 < alpha < 4`.
    pub homogeneous_defocusing: bool,
}

/// Hypotheses, the resulting prediction and, once attached, simulated events.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeReport<T> {
    pub alpha: T,
    pub b: T,
    pub nonlinearity: Nonlinearity,
    pub sigma_c: T,
    pub mass: T,
    pub grad_sq: T,
    pub lambda_sq: T,
    /// `E(u_0)` with the focusing sign, potential included.
    pub energy: T,
    /// `E(u_0) M(u_0)^{sigma_c}` vs `E_0(Q) M(Q)^{sigma_c}`.
    pub cond_ener: Condition<T>,
    /// `||Lambda u_0|| ||u_0||^{sigma_c}` below `||grad Q|| ||Q||^{sigma_c}`.
    pub cond_grad_glob: Condition<T>,
    /// `||grad u_0|| ||u_0||^{sigma_c}` below the same threshold.
    pub cond_grad_glob_refi: Condition<T>,
    /// `||Lambda u_0|| ||u_0||^{sigma_c}` above the threshold.
    pub cond_grad_blow: Condition<T>,
    pub potential: PotentialFlags,
    pub range: RangeFlags,
    pub prediction: Prediction,
    pub simulated: Vec<EventKind>,
    /// `None` until events are attached, or when they cannot confirm or
    /// refute the prediction.
    pub consistent: Option<bool>,
}

impl<T: Real> OutcomeReport<T> {
    /// Attaches simulated events and fills `consistent`.
    pub fn with_events(mut self, events: &[EventKind]) -> Self {
        self.simulated = events.to_vec();
        self.consistent = consistent(self.prediction, events);
        self
    }
}

/// Whether `events` agree with `prediction`.
///
/// Scattering predictions need `decay_detected` and no blow-up; bounded ones
/// need no blow-up; `blowup_or_grow` needs `blowup_detected` and is refuted by
/// decay. Runs showing neither signal, and out-of-scope predictions, give `None`.
pub fn consistent(prediction: Prediction, events: &[EventKind]) -> Option<bool> {
    let blowup = events.contains(&EventKind::BlowupDetected);
    let decay = events.contains(&EventKind::DecayDetected);
    match prediction {
        Prediction::GlobalScattering | Prediction::DefocusingScattering => {
            if blowup {
                Some(false)
            } else if decay {
                Some(true)
            } else {
                None
            }
        }
        Prediction::GlobalBounded => Some(!blowup),
        Prediction::BlowupOrGrow => {
            if blowup {
                Some(true)
            } else if decay {
                Some(false)
            } else {
                None
            }
        }
        Prediction::OutOfTheoremScope => None,
    }
}

fn potential_flags<T: Real>(cert: &PotentialCertificate<T>, v: &Potential<T>, grid: &RadialGrid<T>) -> PotentialFlags {
    let f = cert.flags;
    let deriv = v.sample(grid).deriv;
    let deriv_l32 = grid.dot_weights(deriv.iter().map(|d| d.abs().powf(lit(1.5))));
    PotentialFlags {
        kato_closure_l32: f.tail_negligible && cert.kato_norm_abs.is_finite() && cert.l32_norm.is_finite(),
        kato_neg_below_4pi: f.kato_neg_below_4pi,
        nonnegative: f.nonnegative,
        x_grad_nonpositive: f.x_grad_nonpositive,
        x_grad_in_l32: f.x_grad_in_l32,
        two_v_plus_x_grad_nonnegative: f.two_v_plus_x_grad_nonnegative,
        deriv_in_lq: deriv_l32.is_finite() && deriv.iter().all(|d| d.is_finite()),
        radial: true,
    }
}

fn range_flags<T: Real>(params: &ModelParams<T>) -> RangeFlags {
    let (alpha, b) = (params.alpha, params.b);
    let two = lit::<T>(2.0);
    RangeFlags {
        b_positive: b > T::zero() && b < T::one(),
        mass_supercritical: alpha > (lit::<T>(4.0) - two * b) / lit(3.0),
        global_theory: alpha < lit::<T>(4.0) - two * b,
        scattering: alpha < lit::<T>(3.0) - two * b,
        homogeneous_defocusing: b == T::zero() && alpha > lit(4.0 / 3.0) && alpha < lit(4.0),
    }
}

fn predict<T: Real>(
    kind: Nonlinearity,
    range: &RangeFlags,
    pot: &PotentialFlags,
    ener: &Condition<T>,
    glob: &Condition<T>,
    refi: &Condition<T>,
    blow: &Condition<T>,
) -> Prediction {
    let assumptions = pot.kato_closure_l32 && pot.kato_neg_below_4pi;
    match kind {
        Nonlinearity::Defocusing => {
            let inhomogeneous = range.b_positive
                && range.mass_supercritical
                && range.scattering
                && pot.x_grad_in_l32
                && pot.x_grad_nonpositive;
            let homogeneous = range.homogeneous_defocusing && pot.x_grad_nonpositive && pot.deriv_in_lq;
            if assumptions && pot.radial && (inhomogeneous || homogeneous) {
                Prediction::DefocusingScattering
            } else {
                Prediction::OutOfTheoremScope
            }
        }
        Nonlinearity::Focusing => {
            let admissible = range.b_positive && range.mass_supercritical && range.global_theory;
            if !(admissible && pot.kato_closure_l32 && pot.nonnegative && ener.holds) {
                return Prediction::OutOfTheoremScope;
            }
            if glob.holds || refi.holds {
                if pot.radial && pot.x_grad_in_l32 && pot.x_grad_nonpositive && range.scattering {
                    Prediction::GlobalScattering
                } else {
                    Prediction::GlobalBounded
                }
            } else if blow.holds && pot.x_grad_in_l32 && pot.two_v_plus_x_grad_nonnegative {
                Prediction::BlowupOrGrow
            } else {
                Prediction::OutOfTheoremScope
            }
        }
    }
}

/// Evaluates every hypothesis for `u0` under `potential`. Thresholds come from
/// `gs`, the potential-free ground state for the same `(alpha, b)`.
pub fn evaluate<T: Real>(
    u0: &RadialField<T>,
    potential: &Potential<T>,
    params: &ModelParams<T>,
    gs: &GroundState<T>,
) -> Result<OutcomeReport<T>> {
    if gs.params.alpha != params.alpha || gs.params.b != params.b {
        return Err(invalid(format!(
            "ground state computed for (alpha, b) = ({}, {}), data for ({}, {})",
            gs.params.alpha, gs.params.b, params.alpha, params.b
        )));
    }
    params.require_intercritical()?;
    let sigma = params.sigma_c()?;
    let grid = u0.grid();
    let focusing = ModelParams { kappa: Nonlinearity::Focusing, ..*params };
    let rec = record(u0, potential, &focusing, T::zero(), &[])?;
    let cert = certify(potential, grid);
    let pot = potential_flags(&cert, potential, grid);
    let range = range_flags(params);

    let mass_factor = rec.mass.powf(sigma / lit(2.0));
    let lambda = rec.lambda_sq.max(T::zero()).sqrt() * mass_factor;
    let grad = rec.grad_sq.sqrt() * mass_factor;
    let energy_product = rec.energy * rec.mass.powf(sigma);
    let cond_ener = Condition::below(energy_product, gs.threshold_energy);
    let cond_grad_glob = Condition::below(lambda, gs.threshold_grad);
    let cond_grad_glob_refi = Condition::below(grad, gs.threshold_grad);
    let cond_grad_blow = Condition::above(lambda, gs.threshold_grad);
    let prediction = predict(
        params.kappa,
        &range,
        &pot,
        &cond_ener,
        &cond_grad_glob,
        &cond_grad_glob_refi,
        &cond_grad_blow,
    );
    Ok(OutcomeReport {
        alpha: params.alpha,
        b: params.b,
        nonlinearity: params.kappa,
        sigma_c: sigma,
        mass: rec.mass,
        grad_sq: rec.grad_sq,
        lambda_sq: rec.lambda_sq,
        energy: rec.energy,
        cond_ener,
        cond_grad_glob,
        cond_grad_glob_refi,
        cond_grad_blow,
        potential: pot,
        range,
        prediction,
        simulated: Vec::new(),
        consistent: None,
    })
}

/// One row of a [`dichotomy_sweep`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow<T> {
    pub c: T,
    pub prediction: Prediction,
    pub events: Vec<EventKind>,
    /// First event time of each kind, in the order of `events`.
    pub event_times: Vec<T>,
    pub consistent: Option<bool>,
    pub grad_growth: T,
    /// Final `pot_nl` over its initial value.
    pub pot_nl_ratio: T,
    pub t_final: T,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable<T> {
    pub rows: Vec<SweepRow<T>>,
    /// Largest `c` without and smallest `c` with `blowup_detected`, when the
    /// simulated behaviour switches exactly once along the sorted `c` values.
    pub bracket: Option<(T, T)>,
}

/// Runs [`evaluate`] and the time evolution on `u0 = c Q` for each `c`, in
/// parallel. `config` supplies everything but the initial data; `gs` fixes
/// the grid.
pub fn dichotomy_sweep<T: Real>(
    c_values: &[T],
    gs: &GroundState<T>,
    potential: &Potential<T>,
    params: &ModelParams<T>,
    config: &SimulationConfig<T>,
) -> Result<SweepTable<T>>
where
    T: Send + Sync,
{
    if c_values.iter().any(|c| !(c.is_finite() && *c > T::zero())) {
        return Err(invalid("sweep amplitudes must be positive"));
    }
    let rows = c_values
        .par_iter()
        .map(|&c| {
            let u0 = gs.profile.scaled(c);
            let report = evaluate(&u0, potential, params, gs)?;
            let series = run_from(config, u0, potential)?;
            let kinds: Vec<EventKind> = series.events.iter().map(|e| e.kind).collect();
            let times = series.events.iter().map(|e| e.t).collect();
            let first = &series.records[0];
            let last = series.records.last().unwrap_or(first);
            let pot_nl_ratio = if first.pot_nl > T::zero() { last.pot_nl / first.pot_nl } else { T::zero() };
            Ok(SweepRow {
                c,
                prediction: report.prediction,
                consistent: consistent(report.prediction, &kinds),
                events: kinds,
                event_times: times,
                grad_growth: series.grad_growth(),
                pot_nl_ratio,
                t_final: series.t_final(),
                steps: series.steps,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepTable { bracket: bracket(&rows), rows })
}

fn bracket<T: Real>(rows: &[SweepRow<T>]) -> Option<(T, T)> {
    let mut sorted: Vec<(T, bool)> =
        rows.iter().map(|r| (r.c, r.events.contains(&EventKind::BlowupDetected))).collect();
    sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite amplitudes"));
    let switches: Vec<usize> = (1..sorted.len()).filter(|&i| sorted[i].1 != sorted[i - 1].1).collect();
    match switches[..] {
        [i] if !sorted[i - 1].1 => Some((sorted[i - 1].0, sorted[i].0)),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ground_state::{solve_ground_state, ShootingOptions};
    use crate::potentials::builtin;
    use crate::radial::build_grid;

    fn ground_state() -> GroundState<f64> {
        let g = build_grid(20.0, 2048).unwrap();
        solve_ground_state(&ModelParams::focusing(2.0, 0.5).unwrap(), &g, &ShootingOptions::default()).unwrap()
    }

    #[test]
    fn below_threshold_predicts_scattering() {
        let gs = ground_state();
        let r = evaluate(&gs.profile.scaled(0.9), &Potential::zero(), &gs.params, &gs).unwrap();
        assert!(r.cond_ener.holds && r.cond_grad_glob.holds && r.cond_grad_glob_refi.holds);
        assert!(!r.cond_grad_blow.holds);
        // alpha = 3 - 2b sits on the edge of the scattering range
        assert_eq!(r.prediction, Prediction::GlobalBounded);
        let expected = 0.9f64.powf(1.0 + r.sigma_c) * gs.threshold_grad;
        assert!((r.cond_grad_glob_refi.lhs - expected).abs() < 1e-12 * expected, "{} {}", r.cond_grad_glob_refi.lhs, expected);
    }

    #[test]
    fn scattering_range() {
        let g = build_grid(20.0, 2048).unwrap();
        let p = ModelParams::focusing(2.0, 0.4).unwrap();
        let gs = solve_ground_state(&p, &g, &ShootingOptions::default()).unwrap();
        let r = evaluate(&gs.profile.scaled(0.9), &Potential::zero(), &p, &gs).unwrap();
        assert_eq!(r.prediction, Prediction::GlobalScattering);
        let r = evaluate(&gs.profile.scaled(0.9), &builtin("gaussian", 1.0).unwrap(), &p, &gs).unwrap();
        assert!(r.potential.nonnegative && !r.potential.two_v_plus_x_grad_nonnegative);
    }

    #[test]
    fn above_threshold_predicts_blowup() {
        let gs = ground_state();
        let r = evaluate(&gs.profile.scaled(1.1), &Potential::zero(), &gs.params, &gs).unwrap();
        assert!(r.cond_ener.holds && r.cond_grad_blow.holds);
        assert_eq!(r.prediction, Prediction::BlowupOrGrow);
    }

    #[test]
    fn exact_ground_state_is_out_of_scope() {
        let gs = ground_state();
        let r = evaluate(&gs.profile, &Potential::zero(), &gs.params, &gs).unwrap();
        assert_eq!(r.prediction, Prediction::OutOfTheoremScope);
    }

    #[test]
    fn defocusing_with_decreasing_potential() {
        let gs = ground_state();
        let p = ModelParams::defocusing(2.0, 0.4).unwrap();
        let gs4 = solve_ground_state(&ModelParams::focusing(2.0, 0.4).unwrap(), gs.profile.grid(), &ShootingOptions::default())
            .unwrap();
        let v = builtin("gaussian", 1.0).unwrap();
        let r = evaluate(&gs.profile, &v, &p, &gs4).unwrap();
        assert_eq!(r.prediction, Prediction::DefocusingScattering);
        // alpha = 2 is outside alpha < 3 - 2b at b = 0.5
        let r = evaluate(&gs.profile, &v, &ModelParams::defocusing(2.0, 0.5).unwrap(), &gs).unwrap();
        assert_eq!(r.prediction, Prediction::OutOfTheoremScope);
    }

    #[test]
    fn mismatched_ground_state() {
        let gs = ground_state();
        let p = ModelParams::focusing(2.5, 0.5).unwrap();
        assert!(matches!(evaluate(&gs.profile, &Potential::zero(), &p, &gs), Err(crate::Error::InvalidArgument(_))));
    }

    #[test]
    fn consistency_table() {
        use EventKind::*;
        assert_eq!(consistent(Prediction::GlobalScattering, &[DecayDetected, Completed]), Some(true));
        assert_eq!(consistent(Prediction::GlobalScattering, &[BlowupDetected]), Some(false));
        assert_eq!(consistent(Prediction::GlobalScattering, &[Completed]), None);
        assert_eq!(consistent(Prediction::BlowupOrGrow, &[BlowupDetected]), Some(true));
        assert_eq!(consistent(Prediction::BlowupOrGrow, &[DecayDetected, Completed]), Some(false));
        assert_eq!(consistent(Prediction::GlobalBounded, &[Completed]), Some(true));
        assert_eq!(consistent(Prediction::OutOfTheoremScope, &[BlowupDetected]), None);
    }
}
