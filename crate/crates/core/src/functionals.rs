//! Scalar functionals of a radial field: conserved quantities, virial and
//! blow-up functionals, localized virial actions, and the smooth cutoffs they
//! are built from.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::ground_state::GroundState;
use crate::params::ModelParams;
use crate::potentials::{Potential, PotentialSamples};
use crate::radial::{RadialField, RadialGrid};
use crate::scalar::{lit, Real};

/// Smoothstep `p(t) = t^3 (10 - 15 t + 6 t^2)` and its first four derivatives,
/// clamped to `0` for `t <= 0` and `1` for `t >= 1`.
fn smoothstep<T: Real>(t: T) -> [T; 5] {
    let z = T::zero();
    if t <= z {
        return [z; 5];
    }
    if t >= T::one() {
        return [T::one(), z, z, z, z];
    }
    let c = |x: f64| lit::<T>(x);
    let t2 = t * t;
    [
        t2 * t * (c(10.0) - c(15.0) * t + c(6.0) * t2),
        c(30.0) * t2 * (T::one() - t) * (T::one() - t),
        c(60.0) * t * (T::one() - t) * (T::one() - c(2.0) * t),
        c(60.0) * (T::one() - c(6.0) * t + c(6.0) * t2),
        c(60.0) * (c(12.0) * t - c(6.0)),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutoffKind {
    /// Equal to `r^2` on `[0, R]`, linear growth `3 R r` far out.
    PhiR,
    /// `1` on `[0, R/2]`, `0` on `[R, inf)`.
    ChiR,
}

/// A radial cutoff sampled with its derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct CutoffProfile<T: Real> {
    pub kind: CutoffKind,
    pub radius: T,
    pub value: Vec<T>,
    pub first: Vec<T>,
    pub second: Vec<T>,
    /// `Delta^2 f = f'''' + 4 f''' / r`.
    pub bilaplacian: Vec<T>,
    nodes: Vec<T>,
}

impl<T: Real> CutoffProfile<T> {
    /// `Delta f = f'' + 2 f' / r`.
    pub fn laplacian(&self) -> Vec<T> {
        let two = lit::<T>(2.0);
        self.second.iter().zip(&self.first).zip(&self.nodes).map(|((&s, &f), &r)| s + two * f / r).collect()
    }

    /// `f' / r`.
    pub fn first_over_r(&self) -> Vec<T> {
        self.first.iter().zip(&self.nodes).map(|(&f, &r)| f / r).collect()
    }
}

/// Samples the cutoff of the given kind and radius on `grid`.
///
/// `phi_R = R^2 theta(r/R)` where `theta'' = zeta`, `zeta = 2` on `[0, 1]`,
/// `zeta(s) = 2 p(2 - s)` on `(1, 2)` and `0` beyond. `chi_R = p(2 - 2r/R)`.
pub fn build_cutoff<T: Real>(kind: CutoffKind, radius: T, grid: &RadialGrid<T>) -> Result<CutoffProfile<T>> {
    if !(radius > T::zero()) || !radius.is_finite() {
        return Err(invalid(format!("cutoff radius must be positive, got {radius}")));
    }
    let c = |x: f64| lit::<T>(x);
    let n = grid.len();
    let mut out = CutoffProfile {
        kind,
        radius,
        value: Vec::with_capacity(n),
        first: Vec::with_capacity(n),
        second: Vec::with_capacity(n),
        bilaplacian: Vec::with_capacity(n),
        nodes: grid.nodes().to_vec(),
    };
    let big_r = radius;
    for &r in grid.nodes() {
        let (f, d1, d2, d3, d4) = match kind {
            CutoffKind::PhiR => {
                let s = r / big_r;
                if s <= T::one() {
                    (r * r, c(2.0) * r, c(2.0), T::zero(), T::zero())
                } else if s < c(2.0) {
                    let t = c(2.0) - s;
                    let [p, p1, p2, _, _] = smoothstep(t);
                    // P, Pi: first and second antiderivatives of p vanishing at 0
                    let t4 = t * t * t * t;
                    let cap_p = c(2.5) * t4 - c(3.0) * t4 * t + t4 * t * t;
                    let cap_pi = c(0.5) * t4 * t - c(0.5) * t4 * t * t + t4 * t * t * t / c(7.0);
                    let theta1 = c(2.0) + c(2.0) * (c(0.5) - cap_p);
                    let theta = T::one() + c(3.0) * (s - T::one()) - c(2.0) * (T::one() / c(7.0) - cap_pi);
                    (
                        big_r * big_r * theta,
                        big_r * theta1,
                        c(2.0) * p,
                        -c(2.0) * p1 / big_r,
                        c(2.0) * p2 / (big_r * big_r),
                    )
                } else {
                    let theta = c(4.0) - c(2.0) / c(7.0) + c(3.0) * (s - c(2.0));
                    (big_r * big_r * theta, c(3.0) * big_r, T::zero(), T::zero(), T::zero())
                }
            }
            CutoffKind::ChiR => {
                let [p, p1, p2, p3, p4] = smoothstep(c(2.0) - c(2.0) * r / big_r);
                let k = -c(2.0) / big_r;
                (p, k * p1, k * k * p2, k * k * k * p3, k * k * k * k * p4)
            }
        };
        out.value.push(f);
        out.first.push(d1);
        out.second.push(d2);
        out.bilaplacian.push(d4 + c(4.0) * d3 / r);
    }
    Ok(out)
}

/// Weight `phi` of a virial action `M_phi = 2 int grad phi . Im(conj(u) grad u)`.
#[derive(Debug, Clone, Copy)]
pub enum VirialWeight<'a, T: Real> {
    Cutoff(&'a CutoffProfile<T>),
    /// `phi = |x|`.
    Abs,
    /// `phi = |x|^2`; the action is then `d/dt ||x u||^2`.
    Square,
}

/// `M_phi(u)`.
pub fn virial_action<T: Real>(u: &RadialField<T>, weight: VirialWeight<'_, T>) -> T {
    let du = u.radial_derivative();
    let grid = u.grid();
    let two = lit::<T>(2.0);
    let dphi: Box<dyn Fn(usize, T) -> T + '_> = match weight {
        VirialWeight::Cutoff(c) => Box::new(move |j, _| c.first[j]),
        VirialWeight::Abs => Box::new(|_, _| T::one()),
        VirialWeight::Square => Box::new(move |_, r| two * r),
    };
    let integrand = grid
        .nodes()
        .iter()
        .enumerate()
        .zip(u.values().iter().zip(&du))
        .map(|((j, &r), (z, dz))| dphi(j, r) * (z.conj() * dz).im);
    two * grid.dot_weights(integrand)
}

/// Right-hand side of `d/dt M_phi` for a radial weight:
///
/// ```text
/// - int Delta^2 phi |u|^2 + 4 int phi'' |u_r|^2 - 2 int (phi'/r)(x.grad V)|u|^2
///   + kappa (2 alpha/(alpha+2)) int |x|^{-b} Delta phi |u|^{alpha+2}
///   + kappa (4 b/(alpha+2)) int |x|^{-b} (phi'/r) |u|^{alpha+2}
/// ```
pub fn virial_rate<T: Real>(
    u: &RadialField<T>,
    phi: &CutoffProfile<T>,
    v: &PotentialSamples<T>,
    params: &ModelParams<T>,
) -> T {
    coupled_rate(u, phi, v, params, T::one())
}

fn coupled_rate<T: Real>(
    u: &RadialField<T>,
    phi: &CutoffProfile<T>,
    v: &PotentialSamples<T>,
    params: &ModelParams<T>,
    coupling: T,
) -> T {
    let grid = u.grid();
    let (alpha, b, kappa) = (params.alpha, params.b, params.kappa() * coupling);
    let two = lit::<T>(2.0);
    let four = lit::<T>(4.0);
    let dens: Vec<T> = u.values().iter().map(|z| z.norm_sqr()).collect();
    let du = u.radial_derivative();
    let lap = phi.laplacian();
    let over_r = phi.first_over_r();
    let nl: Vec<T> = u.abs_pow(alpha + two);
    let bilap = grid.dot_weights(phi.bilaplacian.iter().zip(&dens).map(|(&a, &d)| a * d));
    let kin = grid.dot_weights(phi.second.iter().zip(&du).map(|(&a, dz)| a * dz.norm_sqr()));
    let pot = grid.dot_weights(over_r.iter().zip(&v.x_grad).zip(&dens).map(|((&a, &x), &d)| a * x * d));
    let nl_lap = grid.weighted_sum(lap.iter().zip(&nl).map(|(&a, &p)| a * p), b);
    let nl_b = grid.weighted_sum(over_r.iter().zip(&nl).map(|(&a, &p)| a * p), b);
    -bilap + four * kin - two * pot
        + kappa * (two * alpha / (alpha + two) * nl_lap + four * b / (alpha + two) * nl_b)
}

/// `int_{|x| <= R} |u|^2` at a configured radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallMass<T> {
    pub radius: T,
    pub mass: T,
}

/// `||u||_{L^l}` at a configured exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LebesgueNorm<T> {
    pub exponent: T,
    pub norm: T,
}

/// Localized virial action `M_{phi_R}` and the assembled right-hand side of its
/// time derivative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalizedVirial<T> {
    pub radius: T,
    pub action: T,
    pub rate: T,
}

/// Functionals of `u(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalRecord<T> {
    pub t: T,
    pub mass: T,
    /// `E(u) = grad_sq/2 + pot_v/2 + kappa pot_nl/(alpha+2)`.
    pub energy: T,
    /// `E_0(u) = grad_sq/2 - pot_nl/(alpha+2)`, the focusing energy without potential.
    pub energy0: T,
    pub grad_sq: T,
    /// `||Lambda u||^2 = grad_sq + pot_v`.
    pub lambda_sq: T,
    /// `int V |u|^2`.
    pub pot_v: T,
    /// `int |x|^{-b} |u|^{alpha+2}`.
    pub pot_nl: T,
    /// `grad_sq - (1/2) int x.grad V |u|^2 + kappa (3 alpha + 2b)/(2(alpha+2)) pot_nl`,
    /// so that `d^2/dt^2 variance = 8 k` for either sign of the nonlinearity.
    pub k: T,
    /// `grad_sq - (3 alpha + 2b)/(2(alpha+2)) pot_nl`.
    pub h: T,
    /// `||x u||^2`.
    pub variance: T,
    /// `M_{|x|^2} = d/dt variance`.
    pub virial_action: T,
    pub localized: Option<LocalizedVirial<T>>,
    pub ball_mass: Vec<BallMass<T>>,
    /// Mass in the outer shell `r > 0.9 r_max`.
    pub shell_mass: T,
    /// `sup_j r_j |u(r_j)|`.
    pub rad_sup: T,
    pub lebesgue: Vec<LebesgueNorm<T>>,
}

/// Evaluates [`FunctionalRecord`]s for one model, potential and grid.
#[derive(Debug, Clone)]
pub struct Recorder<T: Real> {
    grid: Arc<RadialGrid<T>>,
    params: ModelParams<T>,
    v: PotentialSamples<T>,
    radii: Vec<T>,
    exponents: Vec<T>,
    phi: Option<CutoffProfile<T>>,
    coupling: T,
}

/// Default ball-mass radii `{1, 2, 5, R/2}`.
pub fn default_radii<T: Real>(big_r: T) -> Vec<T> {
    vec![T::one(), lit(2.0), lit(5.0), big_r / lit(2.0)]
}

/// Two Lebesgue exponents strictly inside `(3 alpha/(2-b), 6)`, at one and two
/// thirds of the interval.
pub fn default_exponents<T: Real>(params: &ModelParams<T>) -> Vec<T> {
    let lo = lit::<T>(3.0) * params.alpha / (lit::<T>(2.0) - params.b);
    let six = lit::<T>(6.0);
    let third = (six - lo) / lit(3.0);
    vec![lo + third, lo + third + third]
}

impl<T: Real> Recorder<T> {
    pub fn new(grid: Arc<RadialGrid<T>>, params: ModelParams<T>, potential: &Potential<T>) -> Result<Self> {
        params.validate()?;
        let v = potential.sample(&grid);
        Ok(Self { grid, params, v, radii: Vec::new(), exponents: Vec::new(), phi: None, coupling: T::one() })
    }

    pub fn with_radii(mut self, radii: Vec<T>) -> Self {
        self.radii = radii;
        self
    }

    pub fn with_exponents(mut self, exponents: Vec<T>) -> Self {
        self.exponents = exponents;
        self
    }

    /// Scales the nonlinear terms of the energy, `K` and the localized rate
    /// (`h`, `energy0` and `pot_nl` are left as defined).
    pub fn with_coupling(mut self, coupling: T) -> Self {
        self.coupling = coupling;
        self
    }

    /// Also track `M_{phi_R}` and its assembled rate.
    pub fn with_localized(mut self, radius: T) -> Result<Self> {
        self.phi = Some(build_cutoff(CutoffKind::PhiR, radius, &self.grid)?);
        Ok(self)
    }

    pub fn grid(&self) -> &Arc<RadialGrid<T>> {
        &self.grid
    }

    pub fn params(&self) -> &ModelParams<T> {
        &self.params
    }

    pub fn potential(&self) -> &PotentialSamples<T> {
        &self.v
    }

    pub fn radii(&self) -> &[T] {
        &self.radii
    }

    pub fn record(&self, u: &RadialField<T>, t: T) -> Result<FunctionalRecord<T>> {
        if **u.grid() != *self.grid {
            return Err(invalid("field and recorder live on different grids"));
        }
        let grid = &self.grid;
        let (alpha, b) = (self.params.alpha, self.params.b);
        let two = lit::<T>(2.0);
        let half = lit::<T>(0.5);
        let dens: Vec<T> = u.values().iter().map(|z| z.norm_sqr()).collect();
        let mass = grid.dot_weights(dens.iter().copied());
        let grad_sq = u.gradient_norm_sq();
        let pot_v = grid.dot_weights(self.v.values.iter().zip(&dens).map(|(&v, &d)| v * d));
        let x_grad_v = grid.dot_weights(self.v.x_grad.iter().zip(&dens).map(|(&v, &d)| v * d));
        let pot_nl = grid.weighted_sum(dens.iter().map(|&d| d.powf((alpha + two) / two)), b);
        let w = self.params.virial_weight();
        let kappa = self.params.kappa() * self.coupling;
        let energy = half * grad_sq + half * pot_v + kappa * pot_nl / (alpha + two);
        let energy0 = half * grad_sq - pot_nl / (alpha + two);
        let variance = grid.dot_weights(grid.nodes().iter().zip(&dens).map(|(&r, &d)| r * r * d));
        let shell_r = lit::<T>(0.9) * grid.r_max();
        let shell_mass = mass - grid.integrate_ball(&dens, shell_r)?;
        let ball_mass = self
            .radii
            .iter()
            .map(|&radius| Ok(BallMass { radius, mass: grid.integrate_ball(&dens, radius)? }))
            .collect::<Result<_>>()?;
        let lebesgue = self
            .exponents
            .iter()
            .map(|&l| LebesgueNorm {
                exponent: l,
                norm: grid.dot_weights(dens.iter().map(|&d| d.powf(l / two))).powf(T::one() / l),
            })
            .collect();
        let rad_sup = grid.nodes().iter().zip(&dens).map(|(&r, &d)| r * d.sqrt()).fold(T::zero(), T::max);
        let localized = self.phi.as_ref().map(|phi| LocalizedVirial {
            radius: phi.radius,
            action: virial_action(u, VirialWeight::Cutoff(phi)),
            rate: coupled_rate(u, phi, &self.v, &self.params, self.coupling),
        });
        Ok(FunctionalRecord {
            t,
            mass,
            energy,
            energy0,
            grad_sq,
            lambda_sq: grad_sq + pot_v,
            pot_v,
            pot_nl,
            k: grad_sq - half * x_grad_v + kappa * w * pot_nl,
            h: grad_sq - w * pot_nl,
            variance,
            virial_action: virial_action(u, VirialWeight::Square),
            localized,
            ball_mass,
            shell_mass,
            rad_sup,
            lebesgue,
        })
    }
}

/// One-off [`Recorder::record`] with ball masses at `radii`.
pub fn record<T: Real>(
    u: &RadialField<T>,
    potential: &Potential<T>,
    params: &ModelParams<T>,
    t: T,
    radii: &[T],
) -> Result<FunctionalRecord<T>> {
    Recorder::new(u.grid().clone(), *params, potential)?.with_radii(radii.to_vec()).record(u, t)
}

/// Outcome of the localized coercivity test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coercivity<T> {
    pub lhs_ok: bool,
    /// Largest `delta` with `H(chi_R u) >= delta int |x|^{-b} |chi_R u|^{alpha+2}`.
    pub delta_est: T,
    pub h: T,
    pub pot_nl: T,
    /// `||grad(chi_R u)|| ||chi_R u||^{sigma_c} / threshold_grad`.
    pub grad_ratio: T,
}

/// Evaluates `H(chi_R u)` against `int |x|^{-b} |chi_R u|^{alpha+2}`. The
/// potential does not enter `H`; it is accepted for symmetry with the other
/// checks and must live on the same grid.
pub fn coercivity_check<T: Real>(
    u: &RadialField<T>,
    gs: &GroundState<T>,
    potential: &Potential<T>,
    params: &ModelParams<T>,
    radius: T,
) -> Result<Coercivity<T>> {
    if gs.params.alpha != params.alpha || gs.params.b != params.b {
        return Err(invalid("ground state computed for different (alpha, b)"));
    }
    let grid = u.grid();
    let chi = build_cutoff(CutoffKind::ChiR, radius, grid)?;
    let cu = u.multiplied(&chi.value);
    let rec = record(&cu, potential, params, T::zero(), &[])?;
    let sigma = params.sigma_c()?;
    let delta_est = if rec.pot_nl > T::zero() { rec.h / rec.pot_nl } else { T::infinity() };
    Ok(Coercivity {
        lhs_ok: delta_est > T::zero(),
        delta_est,
        h: rec.h,
        pot_nl: rec.pot_nl,
        grad_ratio: rec.grad_sq.sqrt() * rec.mass.powf(sigma / lit(2.0)) / gs.threshold_grad,
    })
}

/// Space-time integrals over a stored trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MorawetzReport<T> {
    pub radius: T,
    pub horizon: T,
    /// `(1/T) int_0^T int_{|x| <= R/2} |x|^{-b} |u|^{alpha+2}`.
    pub local_weighted: T,
    /// `(1/T) int_0^T int_{|x| <= R/2} |u|^{alpha+2+b}`.
    pub local_unweighted: T,
    /// `R/T + R^{-2} + R^{-alpha-b}`.
    pub comparator: T,
    /// `local_weighted / comparator`.
    pub constant: T,
    /// `int int |u|^4`.
    pub l4_spacetime: T,
    /// `sup_t ||u||_2^3 sup_t ||grad u||_2`.
    pub l4_comparator: T,
    pub l4_constant: T,
    /// `- int int V' |u|^2 + int int |x|^{-1} |u|^{alpha+2}` (second term only
    /// when the nonlinearity is on).
    pub classical_lhs: T,
}

/// Builds the report from `(t, u(t))` snapshots covering `[0, horizon]`
/// (trapezoid rule in time, snapshots past `horizon` ignored).
pub fn morawetz_report<T: Real>(
    snapshots: &[(T, RadialField<T>)],
    potential: &Potential<T>,
    params: &ModelParams<T>,
    radius: T,
    horizon: T,
    nonlinear: bool,
) -> Result<MorawetzReport<T>> {
    let used: Vec<&(T, RadialField<T>)> = snapshots.iter().filter(|(t, _)| *t <= horizon).collect();
    if used.len() < 2 {
        return Err(invalid("Morawetz report needs at least two snapshots"));
    }
    let (alpha, b) = (params.alpha, params.b);
    let two = lit::<T>(2.0);
    let mut samples = Vec::with_capacity(used.len());
    let (mut sup_mass, mut sup_grad) = (T::zero(), T::zero());
    for (t, u) in &used {
        let grid = u.grid();
        let dens: Vec<T> = u.values().iter().map(|z| z.norm_sqr()).collect();
        let half_r = radius / two;
        let p = (alpha + two) / two;
        let local_w = grid.weighted_ball_sum(dens.iter().map(|&d| d.powf(p)), b, half_r);
        let local_u = grid.integrate_ball(&dens.iter().map(|&d| d.powf(p + b / two)).collect::<Vec<_>>(), half_r)?;
        let l4 = grid.dot_weights(dens.iter().map(|&d| d * d));
        let dv: Vec<T> = grid.nodes().iter().map(|&r| potential.deriv(r)).collect();
        let mut classical = -grid.dot_weights(dv.iter().zip(&dens).map(|(&a, &d)| a * d));
        if nonlinear {
            classical = classical + grid.weighted_sum(dens.iter().map(|&d| d.powf(p)), T::one());
        }
        sup_mass = sup_mass.max(u.mass());
        sup_grad = sup_grad.max(u.gradient_norm_sq());
        samples.push((*t, [local_w, local_u, l4, classical]));
    }
    let mut integral = [T::zero(); 4];
    for w in samples.windows(2) {
        let dt = w[1].0 - w[0].0;
        for (acc, (a, b)) in integral.iter_mut().zip(w[0].1.iter().zip(&w[1].1)) {
            *acc = *acc + dt * (*a + *b) / two;
        }
    }
    let span = samples[samples.len() - 1].0 - samples[0].0;
    let comparator = radius / span + radius.powi(-2) + radius.powf(-alpha - b);
    let local_weighted = integral[0] / span;
    let l4_comparator = sup_mass.powf(lit(1.5)) * sup_grad.sqrt();
    Ok(MorawetzReport {
        radius,
        horizon: span,
        local_weighted,
        local_unweighted: integral[1] / span,
        comparator,
        constant: local_weighted / comparator,
        l4_spacetime: integral[2],
        l4_comparator,
        l4_constant: if l4_comparator > T::zero() { integral[2] / l4_comparator } else { T::zero() },
        classical_lhs: integral[3],
    })
}

/// `int |x|^{-b} |u|^{alpha+2} / (mass^{(4-2b-alpha)/4} grad_sq^{(3 alpha+2b)/4})`,
/// which the sharp Gagliardo–Nirenberg inequality bounds by `c_opt`.
pub fn gn_ratio<T: Real>(rec: &FunctionalRecord<T>, params: &ModelParams<T>) -> T {
    let (alpha, b) = (params.alpha, params.b);
    let four = lit::<T>(4.0);
    let m = (four - lit::<T>(2.0) * b - alpha) / four;
    let g = (lit::<T>(3.0) * alpha + lit::<T>(2.0) * b) / four;
    rec.pot_nl / (rec.mass.powf(m) * rec.grad_sq.powf(g))
}

#[cfg(test)]
pub(crate) fn chirp<T: Real>(grid: &Arc<RadialGrid<T>>, width: T, chirp: T) -> RadialField<T> {
    RadialField::from_parts(
        grid.clone(),
        grid.nodes()
            .iter()
            .map(|&r| num_complex::Complex::from_polar((-r * r / (lit::<T>(2.0) * width * width)).exp(), chirp * r * r))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::build_grid;
    use std::f64::consts::PI;

    #[test]
    fn gaussian_moments() {
        let g = build_grid(12.0, 4096).unwrap();
        let u = RadialField::from_real_fn(g.clone(), |r: f64| (-r * r / 2.0).exp()).unwrap();
        let p = ModelParams::defocusing(2.0, 0.5).unwrap();
        let rec = record(&u, &Potential::zero(), &p, 0.0, &[1.0]).unwrap();
        let pi32 = PI.powf(1.5);
        assert!((rec.mass - pi32).abs() / pi32 < 1e-9);
        assert!((rec.grad_sq - 1.5 * pi32).abs() / pi32 < 1e-6);
        assert!((rec.variance - 1.5 * pi32).abs() / pi32 < 1e-9);
        assert_eq!(rec.virial_action, 0.0);
    }

    #[test]
    fn chirped_gaussian_action() {
        let g = build_grid(12.0, 4096).unwrap();
        let u = chirp(&g, 1.0, 0.25);
        let m = virial_action(&u, VirialWeight::Square);
        let want = 3.0 * PI.powf(1.5);
        assert!((m - want).abs() / want < 1e-4, "{m} vs {want}");
    }

    #[test]
    fn phi_r_bounds() {
        for &big_r in &[1.0, 5.0, 20.0] {
            let g = build_grid(4.0 * big_r, 4096).unwrap();
            let phi = build_cutoff(CutoffKind::PhiR, big_r, &g).unwrap();
            let lap = phi.laplacian();
            for (j, &r) in g.nodes().iter().enumerate() {
                assert!(phi.second[j] >= -1e-9 && phi.second[j] <= 2.0 + 1e-9);
                assert!(phi.first[j] / r <= 2.0 + 1e-9);
                assert!(lap[j] <= 6.0 + 1e-9);
                if r <= big_r {
                    assert_eq!(phi.value[j], r * r);
                }
            }
        }
    }

    #[test]
    fn phi_r_derivatives_are_consistent() {
        let g = build_grid(10.0, 8192).unwrap();
        let phi = build_cutoff(CutoffKind::PhiR, 2.0, &g).unwrap();
        let h = g.dr();
        for j in 1..g.len() - 1 {
            let d1: f64 = (phi.value[j + 1] - phi.value[j - 1]) / (2.0 * h);
            let d2: f64 = (phi.first[j + 1] - phi.first[j - 1]) / (2.0 * h);
            assert!((d1 - phi.first[j]).abs() < 1e-5, "phi' at {}", g.nodes()[j]);
            assert!((d2 - phi.second[j]).abs() < 1e-5, "phi'' at {}", g.nodes()[j]);
        }
    }

    #[test]
    fn chi_r_shape() {
        let g = build_grid(20.0, 4096).unwrap();
        let chi = build_cutoff(CutoffKind::ChiR, 8.0, &g).unwrap();
        assert!(chi.value.windows(2).all(|w| w[1] <= w[0]));
        for (j, &r) in g.nodes().iter().enumerate() {
            assert!((0.0..=1.0).contains(&chi.value[j]));
            if r <= 4.0 {
                assert_eq!(chi.value[j], 1.0);
            }
            if r >= 8.0 {
                assert_eq!(chi.value[j], 0.0);
            }
        }
    }

    #[test]
    fn bad_radius() {
        let g = build_grid(10.0, 64).unwrap();
        assert!(build_cutoff(CutoffKind::ChiR, 0.0, &g).is_err());
        assert!(build_cutoff(CutoffKind::PhiR, f64::NAN, &g).is_err());
    }

    #[test]
    fn grid_mismatch_is_rejected() {
        let g1 = build_grid(10.0, 64).unwrap();
        let g2 = build_grid(10.0, 128).unwrap();
        let p = ModelParams::focusing(2.0, 0.5).unwrap();
        let rec = Recorder::new(g1, p, &Potential::zero()).unwrap();
        let u = RadialField::zeros(g2);
        assert!(rec.record(&u, 0.0).is_err());
    }
}
