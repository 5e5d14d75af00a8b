//! Adaptive Dormand–Prince 5(4) integrator for small first-order systems.

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// fifth-order weights are the last row of A; these are the embedded fourth-order ones
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Stepper state for `y' = f(t, y)` with `N` components.
pub(crate) struct Dopri<T: Real, const N: usize> {
    pub t: T,
    pub y: [T; N],
    h: T,
    rtol: T,
    atol: T,
}

/// What an observer wants after an accepted step.
pub(crate) enum Flow {
    Continue,
    Stop,
}

impl<T: Real, const N: usize> Dopri<T, N> {
    pub fn new(t: T, y: [T; N], h0: T, rtol: T, atol: T) -> Self {
        Self { t, y, h: h0, rtol, atol }
    }

    fn try_step<F: Fn(T, &[T; N]) -> [T; N]>(&self, f: &F, h: T) -> ([T; N], T) {
        let mut k = [[T::zero(); N]; 7];
        k[0] = f(self.t, &self.y);
        for s in 1..7 {
            let mut ys = self.y;
            for (i, y) in ys.iter_mut().enumerate() {
                let mut acc = T::zero();
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc = acc + lit::<T>(A[s][j]) * kj[i];
                }
                *y = *y + h * acc;
            }
            k[s] = f(self.t + lit::<T>(C[s]) * h, &ys);
        }
        let mut y5 = self.y;
        let mut err = T::zero();
        for i in 0..N {
            let mut hi = T::zero();
            let mut lo = T::zero();
            for s in 0..7 {
                let b5 = if s < 6 { A[6][s] } else { 0.0 };
                hi = hi + lit::<T>(b5) * k[s][i];
                lo = lo + lit::<T>(B4[s]) * k[s][i];
            }
            y5[i] = self.y[i] + h * hi;
            let y4 = self.y[i] + h * lo;
            let scale = self.atol + self.rtol * self.y[i].abs().max(y5[i].abs());
            let e = (y5[i] - y4) / scale;
            err = err + e * e;
        }
        (y5, (err / lit::<T>(N as f64)).sqrt())
    }

    /// Advances to `t_end` (forward only), calling `observe` after every
    /// accepted step. Returns `true` if the observer stopped the integration.
    pub fn advance<F, O>(&mut self, f: &F, t_end: T, mut observe: O) -> Result<bool>
    where
        F: Fn(T, &[T; N]) -> [T; N],
        O: FnMut(T, &[T; N]) -> Flow,
    {
        let min_h = lit::<T>(1e-14) * t_end.abs().max(T::one());
        while self.t < t_end {
            let mut h = self.h.min(t_end - self.t);
            loop {
                let (y_new, err) = self.try_step(f, h);
                if !y_new.iter().all(|v| v.is_finite()) {
                    h = h * lit(0.25);
                } else if err <= T::one() {
                    self.t = if t_end - (self.t + h) < min_h { t_end } else { self.t + h };
                    self.y = y_new;
                    let grow = if err == T::zero() {
                        lit(5.0)
                    } else {
                        (lit::<T>(0.9) * err.powf(lit(-0.2))).min(lit(5.0))
                    };
                    self.h = h * grow;
                    break;
                } else {
                    h = h * (lit::<T>(0.9) * err.powf(lit(-0.2))).max(lit(0.1));
                }
                if h < min_h {
                    return Err(Error::NoConvergence(format!("step size underflow at t = {}", self.t)));
                }
            }
            if let Flow::Stop = observe(self.t, &self.y) {
                return Ok(true);
            }
        }
        Ok(false)
    }
}
