use serde::{Deserialize, Serialize};

use crate::error::{invalid, out_of_range, Result};
use crate::scalar::{lit, Real};

/// Sign in front of the nonlinearity: `+` defocusing, `-` focusing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Nonlinearity {
    Focusing,
    Defocusing,
}

impl Nonlinearity {
    /// `kappa`: `-1` focusing, `+1` defocusing.
    pub fn sign<T: Real>(self) -> T {
        match self {
            Self::Focusing => -T::one(),
            Self::Defocusing => T::one(),
        }
    }

    pub fn from_sign(kappa: i32) -> Result<Self> {
        match kappa {
            -1 => Ok(Self::Focusing),
            1 => Ok(Self::Defocusing),
            k => Err(invalid(format!("nonlinearity sign must be +1 or -1, got {k}"))),
        }
    }
}

/// One instance of `i u_t + Delta u - V u = kappa |x|^{-b} |u|^alpha u` in 3D.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams<T> {
    pub alpha: T,
    pub b: T,
    pub kappa: Nonlinearity,
}

impl<T: Real> ModelParams<T> {
    pub fn new(alpha: T, b: T, kappa: Nonlinearity) -> Result<Self> {
        let p = Self { alpha, b, kappa };
        p.validate()?;
        Ok(p)
    }

    pub fn focusing(alpha: T, b: T) -> Result<Self> {
        Self::new(alpha, b, Nonlinearity::Focusing)
    }

    pub fn defocusing(alpha: T, b: T) -> Result<Self> {
        Self::new(alpha, b, Nonlinearity::Defocusing)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha > T::zero()) {
            return Err(invalid(format!("alpha must be positive, got {}", self.alpha)));
        }
        if !(self.b >= T::zero() && self.b < T::one()) {
            return Err(invalid(format!("b must lie in [0, 1), got {}", self.b)));
        }
        Ok(())
    }

    pub fn kappa(&self) -> T {
        self.kappa.sign()
    }

    pub fn gamma_c(&self) -> T {
        crate::exponents::gamma_c(self.alpha, self.b)
    }

    pub fn sigma_c(&self) -> Result<T> {
        crate::exponents::sigma_c(self.alpha, self.b)
    }

    /// `(4 - 2b)/3 < alpha < 4 - 2b`.
    pub fn is_intercritical(&self) -> bool {
        let four_minus = lit::<T>(4.0) - lit::<T>(2.0) * self.b;
        self.alpha > four_minus / lit(3.0) && self.alpha < four_minus
    }

    pub fn require_intercritical(&self) -> Result<()> {
        if self.is_intercritical() {
            Ok(())
        } else {
            Err(out_of_range(format!(
                "(alpha, b) = ({}, {}) is not in the intercritical range (4-2b)/3 < alpha < 4-2b",
                self.alpha, self.b
            )))
        }
    }

    /// `(3 alpha + 2b) / (2 (alpha + 2))`, the weight of the nonlinear term in `H` and `K`.
    pub fn virial_weight(&self) -> T {
        let two = lit::<T>(2.0);
        (lit::<T>(3.0) * self.alpha + two * self.b) / (two * (self.alpha + two))
    }

    /// `(3 alpha - 4 + 2b)`, positive exactly in the mass-supercritical range.
    pub fn supercritical_excess(&self) -> T {
        lit::<T>(3.0) * self.alpha - lit::<T>(4.0) + lit::<T>(2.0) * self.b
    }
}
