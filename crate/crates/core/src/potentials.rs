//! Radial potentials `V(r)` and their certification against the standing
//! assumptions: Kato-class smallness of the negative part, `L^{3/2}`
//! integrability and the sign conditions on `x . grad V = r V'(r)`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::radial::RadialGrid;
use crate::scalar::{four_pi, lit, Real};

type RadialFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// A radial potential with its exact radial derivative.
#[derive(Clone)]
pub struct Potential<T: Real> {
    label: String,
    eval: RadialFn<T>,
    deriv: RadialFn<T>,
}

impl<T: Real> fmt::Debug for Potential<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Potential").field("label", &self.label).finish()
    }
}

impl<T: Real> Potential<T> {
    pub fn new(
        label: impl Into<String>,
        eval: impl Fn(T) -> T + Send + Sync + 'static,
        deriv: impl Fn(T) -> T + Send + Sync + 'static,
    ) -> Self {
        Self { label: label.into(), eval: Arc::new(eval), deriv: Arc::new(deriv) }
    }

    pub fn zero() -> Self {
        Self::new("zero", |_| T::zero(), |_| T::zero())
    }

    /// `c * 1_{r <= radius}`; the derivative is taken as zero away from the jump.
    pub fn indicator(radius: T, c: T) -> Self {
        Self::new(
            format!("indicator(r<={radius})*{c}"),
            move |r| if r <= radius { c } else { T::zero() },
            |_| T::zero(),
        )
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, r: T) -> T {
        (self.eval)(r)
    }

    pub fn deriv(&self, r: T) -> T {
        (self.deriv)(r)
    }

    pub fn scaled(&self, c: T) -> Self {
        let (e, d) = (self.eval.clone(), self.deriv.clone());
        Self::new(format!("{}*{c}", self.label), move |r| c * e(r), move |r| c * d(r))
    }

    /// `V_- = min(V, 0)`.
    pub fn negative_part(&self) -> Self {
        let (e, d) = (self.eval.clone(), self.deriv.clone());
        let e2 = e.clone();
        Self::new(
            format!("min({}, 0)", self.label),
            move |r| e(r).min(T::zero()),
            move |r| if e2(r) < T::zero() { d(r) } else { T::zero() },
        )
    }

    pub fn sample(&self, grid: &RadialGrid<T>) -> PotentialSamples<T> {
        let nodes = grid.nodes();
        let values = nodes.iter().map(|&r| self.eval(r)).collect();
        let deriv: Vec<T> = nodes.iter().map(|&r| self.deriv(r)).collect();
        let x_grad = nodes.iter().zip(&deriv).map(|(&r, &d)| r * d).collect();
        PotentialSamples { values, deriv, x_grad }
    }
}

/// `V`, `V'` and `x . grad V = r V'` at the grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSamples<T> {
    pub values: Vec<T>,
    pub deriv: Vec<T>,
    pub x_grad: Vec<T>,
}

impl<T: Real> PotentialSamples<T> {
    pub fn zeros(n: usize) -> Self {
        Self { values: vec![T::zero(); n], deriv: vec![T::zero(); n], x_grad: vec![T::zero(); n] }
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().chain(&self.deriv).all(|&v| v == T::zero())
    }
}

/// Closed-form potentials addressable by name from configuration files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Builtin {
    Zero,
    Gaussian,
    Well,
    BumpShell,
}

impl Builtin {
    pub const ALL: [Builtin; 4] = [Self::Zero, Self::Gaussian, Self::Well, Self::BumpShell];

    pub fn name(self) -> &'static str {
        match self {
            Self::Zero => "zero",
            Self::Gaussian => "gaussian",
            Self::Well => "well",
            Self::BumpShell => "bump_shell",
        }
    }

    /// `zero: 0`, `gaussian: c e^{-r^2}`, `well: -c e^{-r^2}`, `bump_shell: c e^{-(r-2)^2}`.
    pub fn build<T: Real>(self, c: T) -> Potential<T> {
        let two = lit::<T>(2.0);
        let label = format!("{}({c})", self.name());
        match self {
            Self::Zero => Potential::zero(),
            Self::Gaussian | Self::Well => {
                let a = if self == Self::Well { -c } else { c };
                Potential::new(label, move |r: T| a * (-r * r).exp(), move |r: T| -two * r * a * (-r * r).exp())
            }
            Self::BumpShell => Potential::new(
                label,
                move |r: T| c * (-(r - two) * (r - two)).exp(),
                move |r: T| -two * (r - two) * c * (-(r - two) * (r - two)).exp(),
            ),
        }
    }
}

impl FromStr for Builtin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| invalid(format!("unknown potential '{s}' (expected zero, gaussian, well or bump_shell)")))
    }
}

/// Named potential with amplitude `c`.
pub fn builtin<T: Real>(name: &str, c: T) -> Result<Potential<T>> {
    if !c.is_finite() {
        return Err(invalid("potential amplitude must be finite"));
    }
    Ok(name.parse::<Builtin>()?.build(c))
}

/// Samples `f` on `0, r_1, ..., r_n, r_max`.
fn extended<T: Real>(grid: &RadialGrid<T>, f: impl Fn(T) -> T) -> (Vec<T>, Vec<T>) {
    let mut s = Vec::with_capacity(grid.len() + 2);
    s.push(T::zero());
    s.extend_from_slice(grid.nodes());
    s.push(grid.r_max());
    let vals = s.iter().map(|&r| f(r)).collect();
    (s, vals)
}

/// Kato norm `sup_x int |V(y)| / |x - y| dy` of a radial potential.
///
/// For radial `V` and `|x| = rho` the Newton integral reduces to
/// `4 pi [ (1/rho) int_0^rho |V| s^2 ds + int_rho^inf |V| s ds ]`; the supremum is
/// taken over `rho` in `{0} U nodes`.
pub fn kato_norm<T: Real>(v: &Potential<T>, grid: &RadialGrid<T>) -> T {
    let (s, abs_v) = extended(grid, |r| v.eval(r).abs());
    let half = lit::<T>(0.5);
    let m = s.len();
    // inner[i] = int_0^{s_i} |V| s^2, outer[i] = int_{s_i}^{r_max} |V| s
    let mut inner = vec![T::zero(); m];
    for i in 1..m {
        let h = s[i] - s[i - 1];
        inner[i] = inner[i - 1] + half * h * (abs_v[i - 1] * s[i - 1] * s[i - 1] + abs_v[i] * s[i] * s[i]);
    }
    let mut outer = vec![T::zero(); m];
    for i in (0..m - 1).rev() {
        let h = s[i + 1] - s[i];
        outer[i] = outer[i + 1] + half * h * (abs_v[i] * s[i] + abs_v[i + 1] * s[i + 1]);
    }
    let mut best = outer[0];
    for i in 1..m - 1 {
        best = best.max(inner[i] / s[i] + outer[i]);
    }
    four_pi::<T>() * best
}

/// Norms and sign verdicts for a potential on a truncated grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialCertificate<T> {
    pub label: String,
    /// `||V_-||_K`.
    pub kato_norm_neg: T,
    /// `||V||_K`.
    pub kato_norm_abs: T,
    /// `||V||_{L^{3/2}}`.
    pub l32_norm: T,
    /// `||x . grad V||_{L^{3/2}}`.
    pub x_grad_l32_norm: T,
    pub flags: CertificateFlags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateFlags {
    pub nonnegative: bool,
    pub x_grad_nonpositive: bool,
    pub two_v_plus_x_grad_nonnegative: bool,
    pub x_grad_in_l32: bool,
    pub kato_neg_below_4pi: bool,
    /// `|V(r_max)|` below `1e-12`; otherwise truncation makes the other verdicts unreliable.
    pub tail_negligible: bool,
}

/// Tolerance for the pointwise sign checks.
pub const SIGN_TOL: f64 = 1e-10;
/// Largest `|V(r_max)|` accepted as a negligible tail.
pub const TAIL_TOL: f64 = 1e-12;

pub fn certify<T: Real>(v: &Potential<T>, grid: &RadialGrid<T>) -> PotentialCertificate<T> {
    let tol = lit::<T>(SIGN_TOL);
    let s = v.sample(grid);
    let three_halves = lit::<T>(1.5);
    let two_thirds = lit::<T>(2.0 / 3.0);
    let l32 = |f: &[T]| grid.dot_weights(f.iter().map(|x| x.abs().powf(three_halves))).powf(two_thirds);

    let cutoff = lit::<T>(0.9) * grid.r_max();
    let x_grad_total = grid.dot_weights(s.x_grad.iter().map(|x| x.abs().powf(three_halves)));
    let x_grad_tail: T = grid
        .nodes()
        .iter()
        .zip(grid.weights())
        .zip(&s.x_grad)
        .filter(|((&r, _), _)| r > cutoff)
        .map(|((_, &w), x)| w * x.abs().powf(three_halves))
        .sum();

    let kato_norm_neg = kato_norm(&v.negative_part(), grid);
    let flags = CertificateFlags {
        nonnegative: s.values.iter().all(|&x| x >= -tol),
        x_grad_nonpositive: s.x_grad.iter().all(|&x| x <= tol),
        two_v_plus_x_grad_nonnegative: s
            .values
            .iter()
            .zip(&s.x_grad)
            .all(|(&x, &y)| lit::<T>(2.0) * x + y >= -tol),
        x_grad_in_l32: x_grad_total.is_finite() && x_grad_tail <= lit::<T>(1e-6) * x_grad_total,
        kato_neg_below_4pi: kato_norm_neg < four_pi::<T>(),
        tail_negligible: v.eval(grid.r_max()).abs() < lit::<T>(TAIL_TOL),
    };
    PotentialCertificate {
        label: v.label().to_string(),
        kato_norm_neg,
        kato_norm_abs: kato_norm(v, grid),
        l32_norm: l32(&s.values),
        x_grad_l32_norm: l32(&s.x_grad),
        flags,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::build_grid;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn zero_potential() {
        let g = build_grid(10.0, 256).unwrap();
        let c = certify(&Potential::zero(), &g);
        assert_eq!((c.kato_norm_abs, c.kato_norm_neg, c.l32_norm), (0.0, 0.0, 0.0));
        let f = c.flags;
        assert!(f.nonnegative && f.x_grad_nonpositive && f.two_v_plus_x_grad_nonnegative);
        assert!(f.kato_neg_below_4pi && f.x_grad_in_l32 && f.tail_negligible);
    }

    #[test]
    fn indicator_kato_norm() {
        let g = build_grid(4.0, 8192).unwrap();
        assert_relative_eq!(kato_norm(&Potential::indicator(1.0, 1.0), &g), 2.0 * PI, max_relative = 1e-3);
        let c = certify(&Potential::indicator(1.0, -0.1), &g);
        assert_relative_eq!(c.kato_norm_neg, 0.2 * PI, max_relative = 1e-3);
        assert!(c.flags.kato_neg_below_4pi);
        assert!(!c.flags.nonnegative);
    }

    #[test]
    fn gaussian_certificate() {
        let g = build_grid(10.0, 2048).unwrap();
        let v = builtin("gaussian", 1.0).unwrap();
        assert_eq!(v.eval(0.0), 1.0);
        let c = certify(&v, &g);
        assert_relative_eq!(c.kato_norm_abs, 2.0 * PI, max_relative = 1e-3);
        assert_eq!(c.kato_norm_neg, 0.0);
        assert!(c.flags.nonnegative && c.flags.x_grad_nonpositive);
        assert!(!c.flags.two_v_plus_x_grad_nonnegative);
        // 2V + x.grad V = 2 e^{-r^2}(1 - r^2) < 0 at r = 2
        assert!(2.0 * v.eval(2.0) + 2.0 * v.deriv(2.0) < 0.0);
    }

    #[test]
    fn deep_well_violates_kato_smallness() {
        let g = build_grid(10.0, 2048).unwrap();
        let c = certify(&builtin("well", 5.0).unwrap(), &g);
        assert_relative_eq!(c.kato_norm_neg, 10.0 * PI, max_relative = 1e-3);
        assert!(!c.flags.kato_neg_below_4pi);
    }

    #[test]
    fn builtins_have_consistent_derivatives() {
        for b in Builtin::ALL {
            let v = b.build(1.3_f64);
            for r in [0.3, 1.0, 1.7, 2.5, 4.0] {
                let h = 1e-5;
                let fd = (v.eval(r + h) - v.eval(r - h)) / (2.0 * h);
                assert!((fd - v.deriv(r)).abs() <= 1e-3 * fd.abs().max(1e-8), "{b:?} at {r}");
            }
        }
        assert!(builtin::<f64>("coulomb", 1.0).is_err());
        let z = builtin("zero", 3.0_f64).unwrap();
        assert_eq!((z.eval(1.0), z.deriv(1.0)), (0.0, 0.0));
    }
}
