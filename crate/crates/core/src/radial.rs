//! Radial discretisation of R^3.
//!
//! A radial profile `u(r)` is sampled at the interior nodes `r_j = j * dr`,
//! `j = 1..=n`, with `dr = r_max / (n + 1)`. Internally the auxiliary profile
//! `v = r u` is used: it vanishes at both `r = 0` and `r = r_max`, so the 3D
//! radial Laplacian `u'' + 2u'/r = v''/r` is diagonal in the discrete sine
//! basis `sin(pi j k / (n + 1))`.
//!
//! Volume integrals use the trapezoid rule against `4 pi r^2 dr` with both
//! endpoints contributing zero.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{invalid, Result};
use crate::scalar::{four_pi, from_usize, lit, Real};
use crate::special::zeta;

/// Uniform radial grid with volume quadrature weights and a cached sine
/// transform plan.
#[derive(Clone)]
pub struct RadialGrid<T: Real> {
    r_max: T,
    n: usize,
    dr: T,
    nodes: Vec<T>,
    weights: Vec<T>,
    fft: Arc<dyn Fft<T>>,
}

impl<T: Real> fmt::Debug for RadialGrid<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialGrid")
            .field("r_max", &self.r_max)
            .field("n", &self.n)
            .field("dr", &self.dr)
            .finish()
    }
}

impl<T: Real> PartialEq for RadialGrid<T> {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.r_max == other.r_max
    }
}

/// Builds a shared grid. See [`RadialGrid::new`].
pub fn build_grid<T: Real>(r_max: T, n: usize) -> Result<Arc<RadialGrid<T>>> {
    RadialGrid::new(r_max, n).map(Arc::new)
}

impl<T: Real> RadialGrid<T> {
    pub const MIN_NODES: usize = 8;

    pub fn new(r_max: T, n: usize) -> Result<Self> {
        if !(r_max.is_finite() && r_max > T::zero()) {
            return Err(invalid(format!("r_max must be positive and finite, got {r_max}")));
        }
        if n < Self::MIN_NODES {
            return Err(invalid(format!("need at least {} nodes, got {n}", Self::MIN_NODES)));
        }
        let dr = r_max / from_usize::<T>(n + 1);
        let nodes: Vec<T> = (1..=n).map(|j| from_usize::<T>(j) * dr).collect();
        let weights = nodes.iter().map(|&r| four_pi::<T>() * r * r * dr).collect();
        let fft = FftPlanner::new().plan_fft_forward(2 * (n + 1));
        Ok(Self { r_max, n, dr, nodes, weights, fft })
    }

    pub fn r_max(&self) -> T {
        self.r_max
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dr(&self) -> T {
        self.dr
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Quadrature for `int_{R^3} f dx` of a radial integrand sampled at the nodes.
    pub fn integrate(&self, f: &[T]) -> Result<T> {
        self.check_len(f.len())?;
        Ok(self.dot_weights(f.iter().copied()))
    }

    /// `int_{|x| <= radius} f dx`.
    pub fn integrate_ball(&self, f: &[T], radius: T) -> Result<T> {
        self.check_len(f.len())?;
        Ok(self
            .nodes
            .iter()
            .zip(&self.weights)
            .zip(f)
            .filter(|((&r, _), _)| r <= radius)
            .map(|((_, &w), &fj)| w * fj)
            .sum())
    }

    /// `int_{R^3} |x|^{-b} f dx` for `f` regular at the origin. The trapezoid
    /// sum misses a term `zeta(b - 2) f(0) dr^{3-b}` coming from the
    /// non-smooth factor `r^{2-b}`; it is subtracted with `f(0)` extrapolated
    /// from the first two nodes.
    pub fn integrate_weighted(&self, f: &[T], b: T) -> Result<T> {
        self.check_len(f.len())?;
        Ok(self.weighted_sum(f.iter().copied(), b))
    }

    pub(crate) fn weighted_sum(&self, f: impl Iterator<Item = T>, b: T) -> T {
        self.weighted_ball_sum(f, b, self.r_max)
    }

    /// `int_{|x| <= radius} |x|^{-b} f dx` with the same origin correction.
    pub(crate) fn weighted_ball_sum(&self, f: impl Iterator<Item = T>, b: T, radius: T) -> T {
        self.singular_weights(b)
            .iter()
            .zip(&self.nodes)
            .zip(f)
            .take_while(|((_, &r), _)| r <= radius)
            .map(|((&c, _), fj)| c * fj)
            .sum()
    }

    /// Coefficients `c_j` with `sum_j c_j f(r_j) = int |x|^{-b} f dx` for `f`
    /// regular at the origin: the trapezoid weights `w_j r_j^{-b}` with the
    /// `zeta(b - 2) f(0) dr^{3-b}` term folded into the first two nodes through
    /// `f(0) = (4 f_1 - f_2) / 3`.
    pub fn singular_weights(&self, b: T) -> Vec<T> {
        let mut c: Vec<T> = self.weights.iter().zip(&self.nodes).map(|(&w, &r)| w * r.powf(-b)).collect();
        if b != T::zero() {
            let z = lit::<T>(zeta((b - lit(2.0)).to_f64().unwrap_or(f64::NAN)));
            let k = four_pi::<T>() * z * self.dr.powf(lit::<T>(3.0) - b) / lit(3.0);
            c[0] = c[0] - lit::<T>(4.0) * k;
            c[1] = c[1] + k;
        }
        c
    }

    pub(crate) fn dot_weights(&self, f: impl Iterator<Item = T>) -> T {
        self.weights.iter().zip(f).map(|(&w, fj)| w * fj).sum()
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(invalid(format!("array of length {len} on a grid of {} nodes", self.n)));
        }
        Ok(())
    }

    /// Dirichlet eigenvalue `(k pi / r_max)^2` of `-Delta` for sine mode `k >= 1`.
    pub fn eigenvalue(&self, k: usize) -> T {
        let kappa = from_usize::<T>(k) * T::PI() / self.r_max;
        kappa * kappa
    }

    /// Unnormalised DST-I in place: `s_k = sum_j v_j sin(pi j k / (n+1))`.
    ///
    /// Applying it twice multiplies by `(n + 1) / 2`.
    pub fn sine_transform(&self, data: &mut [Complex<T>]) {
        self.sine_transform_in(data, &mut self.workspace());
    }

    /// Buffers for repeated [`RadialGrid::sine_transform_in`] calls.
    pub fn workspace(&self) -> SineWorkspace<T> {
        let zero = Complex::new(T::zero(), T::zero());
        SineWorkspace {
            buf: vec![zero; 2 * (self.n + 1)],
            scratch: vec![zero; self.fft.get_inplace_scratch_len()],
        }
    }

    /// [`RadialGrid::sine_transform`] without allocating.
    pub fn sine_transform_in(&self, data: &mut [Complex<T>], ws: &mut SineWorkspace<T>) {
        let n = self.n;
        assert_eq!(data.len(), n, "sine transform length mismatch");
        let m = 2 * (n + 1);
        let buf = &mut ws.buf;
        buf[0] = Complex::new(T::zero(), T::zero());
        buf[n + 1] = buf[0];
        for (j, &v) in data.iter().enumerate() {
            buf[j + 1] = v;
            buf[m - j - 1] = -v;
        }
        self.fft.process_with_scratch(buf, &mut ws.scratch);
        // X_k = -2i s_k
        let half = lit::<T>(0.5);
        for (k, out) in data.iter_mut().enumerate() {
            let x = buf[k + 1];
            *out = Complex::new(-x.im * half, x.re * half);
        }
    }

    fn v_of(&self, u: &[Complex<T>]) -> Vec<Complex<T>> {
        u.iter().zip(&self.nodes).map(|(&z, &r)| z * r).collect()
    }

    /// Energy `int |grad u|^2 dx = 4 pi int |v'|^2 dr`, evaluated by Parseval in the
    /// sine basis so that it is the exact kinetic energy of the propagator.
    fn grad_sq(&self, u: &[Complex<T>]) -> T {
        let mut s = self.v_of(u);
        self.sine_transform(&mut s);
        let acc: T = s
            .iter()
            .enumerate()
            .map(|(k, z)| self.eigenvalue(k + 1) * z.norm_sqr())
            .sum();
        four_pi::<T>() * self.dr * lit::<T>(2.0) / from_usize::<T>(self.n + 1) * acc
    }

    fn propagate(&self, u: &[Complex<T>], dt: T) -> Vec<Complex<T>> {
        if dt == T::zero() {
            return u.to_vec();
        }
        let mut s = self.v_of(u);
        self.sine_transform(&mut s);
        let scale = lit::<T>(2.0) / from_usize::<T>(self.n + 1);
        for (k, z) in s.iter_mut().enumerate() {
            let phase = -dt * self.eigenvalue(k + 1);
            *z = *z * Complex::from_polar(scale, phase);
        }
        self.sine_transform(&mut s);
        s.iter().zip(&self.nodes).map(|(&z, &r)| z / r).collect()
    }

    /// `d u / d r` at the nodes by centred differences. The value at the
    /// origin comes from even extrapolation `u_0 = (4 u_1 - u_2) / 3` and the
    /// Dirichlet value `u_{n+1} = 0` closes the far end.
    fn derivative(&self, u: &[Complex<T>]) -> Vec<Complex<T>> {
        let n = self.n;
        let three = lit::<T>(3.0);
        let origin = (u[0] * lit::<T>(4.0) - u[1]) / three;
        let zero = Complex::new(T::zero(), T::zero());
        let inv_2dr = T::one() / (lit::<T>(2.0) * self.dr);
        (0..n)
            .map(|j| {
                let left = if j == 0 { origin } else { u[j - 1] };
                let right = if j + 1 == n { zero } else { u[j + 1] };
                (right - left) * inv_2dr
            })
            .collect()
    }
}

/// Scratch space for the sine transform on one grid.
#[derive(Debug, Clone)]
pub struct SineWorkspace<T: Real> {
    buf: Vec<Complex<T>>,
    scratch: Vec<Complex<T>>,
}

/// Complex radial profile sampled on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialField<T: Real> {
    grid: Arc<RadialGrid<T>>,
    values: Vec<Complex<T>>,
}

impl<T: Real> RadialField<T> {
    pub fn new(grid: Arc<RadialGrid<T>>, values: Vec<Complex<T>>) -> Result<Self> {
        grid.check_len(values.len())?;
        if values.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(invalid("field contains non-finite samples"));
        }
        Ok(Self { grid, values })
    }

    /// Unchecked constructor for values produced by crate-internal arithmetic.
    pub(crate) fn from_parts(grid: Arc<RadialGrid<T>>, values: Vec<Complex<T>>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn zeros(grid: Arc<RadialGrid<T>>) -> Self {
        let values = vec![Complex::new(T::zero(), T::zero()); grid.len()];
        Self { grid, values }
    }

    pub fn from_fn(grid: Arc<RadialGrid<T>>, f: impl Fn(T) -> Complex<T>) -> Result<Self> {
        let values = grid.nodes().iter().map(|&r| f(r)).collect();
        Self::new(grid, values)
    }

    pub fn from_real_fn(grid: Arc<RadialGrid<T>>, f: impl Fn(T) -> T) -> Result<Self> {
        Self::from_fn(grid, |r| Complex::new(f(r), T::zero()))
    }

    pub fn grid(&self) -> &Arc<RadialGrid<T>> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex<T>> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid
    }

    /// `|u(r_j)|`.
    pub fn modulus(&self) -> Vec<T> {
        self.values.iter().map(|z| z.norm()).collect()
    }

    /// `|u(r_j)|^p`.
    pub fn abs_pow(&self, p: T) -> Vec<T> {
        self.values.iter().map(|z| z.norm().powf(p)).collect()
    }

    pub fn scaled(&self, c: T) -> Self {
        Self::from_parts(self.grid.clone(), self.values.iter().map(|&z| z * c).collect())
    }

    /// Pointwise product with a real radial function sampled at the nodes.
    pub fn multiplied(&self, m: &[T]) -> Self {
        assert_eq!(m.len(), self.values.len());
        let values = self.values.iter().zip(m).map(|(&z, &c)| z * c).collect();
        Self::from_parts(self.grid.clone(), values)
    }

    /// `M(u) = int |u|^2 dx`.
    pub fn mass(&self) -> T {
        self.grid.dot_weights(self.values.iter().map(|z| z.norm_sqr()))
    }

    /// `int |grad u|^2 dx`.
    pub fn gradient_norm_sq(&self) -> T {
        self.grid.grad_sq(&self.values)
    }

    /// `d u / d r` at the nodes.
    pub fn radial_derivative(&self) -> Vec<Complex<T>> {
        self.grid.derivative(&self.values)
    }

    /// Exact free flow `e^{i dt Delta} u` with Dirichlet truncation at `r_max`.
    pub fn kinetic_propagate(&self, dt: T) -> Self {
        Self::from_parts(self.grid.clone(), self.grid.propagate(&self.values, dt))
    }

    /// `max_j |u(r_j)|`.
    pub fn sup_norm(&self) -> T {
        self.values.iter().map(|z| z.norm()).fold(T::zero(), T::max)
    }

    /// `L^2` norm of the difference of two fields on the same grid.
    pub fn l2_distance(&self, other: &Self) -> T {
        self.grid
            .dot_weights(self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm_sqr()))
            .sqrt()
    }

    /// `int_{|x| <= radius} |u|^2 dx`.
    pub fn ball_mass(&self, radius: T) -> T {
        self.grid
            .nodes
            .iter()
            .zip(&self.grid.weights)
            .zip(&self.values)
            .filter(|((&r, _), _)| r <= radius)
            .map(|((_, &w), z)| w * z.norm_sqr())
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn gaussian(grid: &Arc<RadialGrid<f64>>) -> RadialField<f64> {
        RadialField::from_real_fn(grid.clone(), |r| (-r * r / 2.0).exp()).unwrap()
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(matches!(RadialGrid::<f64>::new(-1.0, 64), Err(crate::Error::InvalidArgument(_))));
        assert!(RadialGrid::<f64>::new(0.0, 64).is_err());
        assert!(RadialGrid::<f64>::new(10.0, 4).is_err());
        let g = build_grid(10.0, 64).unwrap();
        assert!(g.integrate(&[1.0; 63]).is_err());
    }

    #[test]
    fn nodes_and_weights() {
        let g = RadialGrid::new(10.0_f64, 256).unwrap();
        assert!(g.nodes().windows(2).all(|w| w[0] < w[1]));
        assert!(g.nodes()[0] > 0.0 && *g.nodes().last().unwrap() < 10.0);
        assert!(g.weights().iter().all(|&w| w > 0.0));
    }

    #[test]
    fn gaussian_integral() {
        let g = build_grid(8.0_f64, 2048).unwrap();
        let f: Vec<f64> = g.nodes().iter().map(|r| (-r * r).exp()).collect();
        let exact = std::f64::consts::PI.powf(1.5);
        assert_relative_eq!(g.integrate(&f).unwrap(), exact, max_relative = 1e-6);
        assert_eq!(g.integrate(&vec![0.0; 2048]).unwrap(), 0.0);
    }

    #[test]
    fn unit_ball_volume() {
        let g = build_grid(10.0_f64, 4096).unwrap();
        let f: Vec<f64> = g.nodes().iter().map(|&r| if r <= 1.0 { 1.0 } else { 0.0 }).collect();
        let exact = 4.0 / 3.0 * std::f64::consts::PI;
        assert_relative_eq!(g.integrate(&f).unwrap(), exact, max_relative = 5e-3);
    }

    #[test]
    fn gaussian_gradient() {
        let g = build_grid(12.0_f64, 2048).unwrap();
        let u = gaussian(&g);
        let exact = 1.5 * std::f64::consts::PI.powf(1.5);
        assert_relative_eq!(u.gradient_norm_sq(), exact, max_relative = 1e-4);
        assert_eq!(RadialField::zeros(g).gradient_norm_sq(), 0.0);
    }

    #[test]
    fn lowest_dirichlet_mode_is_eigenfunction() {
        let g = build_grid(10.0_f64, 1024).unwrap();
        let pi = std::f64::consts::PI;
        let u = RadialField::from_real_fn(g.clone(), |r| (pi * r / 10.0).sin() / r).unwrap();
        let lambda = (pi / 10.0).powi(2);
        assert_relative_eq!(u.gradient_norm_sq(), lambda * u.mass(), max_relative = 1e-6);
    }

    #[test]
    fn propagate_zero_time_is_identity() {
        let g = build_grid(10.0_f64, 128).unwrap();
        let u = gaussian(&g);
        assert_eq!(u.kinetic_propagate(0.0), u);
    }

    #[test]
    fn sine_transform_is_involution_up_to_scale() {
        let g = RadialGrid::<f64>::new(3.0, 37).unwrap();
        let orig: Vec<Complex<f64>> =
            (0..37).map(|j| Complex::new((j as f64).sin(), (j as f64 * 0.3).cos())).collect();
        let mut data = orig.clone();
        g.sine_transform(&mut data);
        g.sine_transform(&mut data);
        for (a, b) in data.iter().zip(&orig) {
            assert!((a * (2.0 / 38.0) - b).norm() < 1e-12);
        }
    }

    #[test]
    fn derivative_of_gaussian() {
        let g = build_grid(10.0_f64, 2048).unwrap();
        let u = gaussian(&g);
        let du = u.radial_derivative();
        for (j, &r) in g.nodes().iter().enumerate().step_by(97).chain([(0, &g.nodes()[0])]) {
            let exact = -r * (-r * r / 2.0).exp();
            assert!((du[j].re - exact).abs() < 1e-4, "r={r}");
        }
    }

    #[test]
    fn single_precision_grid() {
        let g = build_grid(8.0_f32, 512).unwrap();
        let f: Vec<f32> = g.nodes().iter().map(|r| (-r * r).exp()).collect();
        let exact = std::f32::consts::PI.powf(1.5);
        assert_relative_eq!(g.integrate(&f).unwrap(), exact, max_relative = 1e-4);
    }
}
