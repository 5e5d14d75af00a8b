//! Critical exponents and Strichartz-pair bookkeeping in three dimensions.
//!
//! Everything here is plain field arithmetic, so the functions are generic over
//! [`Exact`]: they run on `f64` as well as on exact rationals such as
//! `num_rational::Ratio<i64>`, where every identity below holds with zero
//! tolerance.

use std::fmt::Debug;

use num_traits::Num;
use serde::{Deserialize, Serialize};

use crate::error::{out_of_range, Result};

/// Ordered field elements: floats or exact rationals.
pub trait Exact: Num + Copy + PartialOrd + Debug {}

impl<T: Num + Copy + PartialOrd + Debug> Exact for T {}

fn int<T: Exact>(k: u32) -> T {
    (0..k).fold(T::zero(), |acc, _| acc + T::one())
}

fn abs<T: Exact>(x: T) -> T {
    if x < T::zero() {
        T::zero() - x
    } else {
        x
    }
}

/// `gamma_c = 3/2 - (2 - b)/alpha`.
pub fn gamma_c<T: Exact>(alpha: T, b: T) -> T {
    int::<T>(3) / int(2) - (int::<T>(2) - b) / alpha
}

/// `sigma_c = (4 - 2b - alpha) / (3 alpha - 4 + 2b)`, defined when the
/// denominator is positive.
pub fn sigma_c<T: Exact>(alpha: T, b: T) -> Result<T> {
    let den = int::<T>(3) * alpha - int(4) + int::<T>(2) * b;
    if den <= T::zero() {
        return Err(out_of_range(format!(
            "sigma_c needs 3 alpha - 4 + 2b > 0 (alpha = {alpha:?}, b = {b:?})"
        )));
    }
    Ok((int::<T>(4) - int::<T>(2) * b - alpha) / den)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RangeExponents<T> {
    /// `2^* = 4 - 2b`.
    pub two_star: T,
    /// `2_* = (4 - 2b)/3`.
    pub two_lower_star: T,
    /// Whether `0 < b < 1`.
    pub b_in_range: bool,
}

pub fn range_exponents<T: Exact>(b: T) -> RangeExponents<T> {
    let two_star = int::<T>(4) - int::<T>(2) * b;
    RangeExponents {
        two_star,
        two_lower_star: two_star / int(3),
        b_in_range: b > T::zero() && b < T::one(),
    }
}

/// A Lebesgue exponent in `[1, infinity]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Exponent<T> {
    Finite(T),
    Infinite,
}

impl<T: Exact> Exponent<T> {
    /// `1/p`, with `1/infinity = 0`.
    pub fn recip(self) -> T {
        match self {
            Self::Finite(p) => T::one() / p,
            Self::Infinite => T::zero(),
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Self::Infinite)
    }

    fn at_least(self, lo: T) -> bool {
        match self {
            Self::Finite(p) => p >= lo,
            Self::Infinite => true,
        }
    }
}

impl<T> From<T> for Exponent<T> {
    fn from(p: T) -> Self {
        Self::Finite(p)
    }
}

/// Strichartz pair classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PairClass {
    /// `L^2`-admissible: `2/q + 3/r = 3/2`.
    S0,
    /// `H^{gamma_c}`-admissible: `2/k + 3/l = (2 - b)/alpha`.
    SGammaC,
    /// `H^{-gamma_c}`-admissible: `2/m + 3/n = 3 - (2 - b)/alpha`.
    SMinusGammaC,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdmissiblePair<T> {
    pub q: Exponent<T>,
    pub r: Exponent<T>,
    pub klass: PairClass,
}

/// Tolerances for admissibility checks.
///
/// The open endpoints `3 alpha/(2 - b)^+` and `6^-` are enforced as
/// `lo + margin <= l <= 6 - margin`; with `margin = 0` they are strict.
/// `tol` is the allowed residual in the scaling relation (zero for exact types).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Admissibility<T> {
    pub margin: T,
    pub tol: T,
}

impl Admissibility<f64> {
    pub const DEFAULT: Self = Self { margin: 1e-9, tol: 1e-12 };
}

impl Default for Admissibility<f64> {
    fn default() -> Self {
        Self::DEFAULT
    }
}

impl<T: Exact> Admissibility<T> {
    pub fn exact() -> Self {
        Self { margin: T::zero(), tol: T::zero() }
    }

    fn inside_open(&self, x: T, lo: T, hi: T) -> bool {
        if self.margin == T::zero() {
            x > lo && x < hi
        } else {
            x >= lo + self.margin && x <= hi - self.margin
        }
    }

    pub fn check(&self, pair: &AdmissiblePair<T>, alpha: T, b: T) -> bool {
        let (q, r) = (pair.q, pair.r);
        let two = int::<T>(2);
        let three = int::<T>(3);
        let lhs = two * q.recip() + three * r.recip();
        let scaling = (two - b) / alpha;
        match pair.klass {
            PairClass::S0 => {
                let endpoint = q == Exponent::Finite(two) && r.is_infinite();
                q.at_least(two)
                    && r.at_least(two)
                    && !endpoint
                    && abs(lhs - three / two) <= self.tol
            }
            PairClass::SGammaC | PairClass::SMinusGammaC => {
                let target = if pair.klass == PairClass::SGammaC { scaling } else { three - scaling };
                let lo = three * alpha / (two - b);
                let space_ok = match r {
                    Exponent::Finite(l) => self.inside_open(l, lo, int(6)),
                    Exponent::Infinite => false,
                };
                q.at_least(T::one()) && space_ok && abs(lhs - target) <= self.tol
            }
        }
    }
}

/// Membership test for one of the three pair classes.
pub fn is_admissible<T: Exact>(
    q: Exponent<T>,
    r: Exponent<T>,
    klass: PairClass,
    alpha: T,
    b: T,
    rules: &Admissibility<T>,
) -> bool {
    rules.check(&AdmissiblePair { q, r, klass }, alpha, b)
}

/// The four exponents `(q, r, k, m)` of the classical nonlinear estimate family
/// parametrised by `0 < theta << 1`, with their class verdicts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RemarkPairs<T> {
    pub q: T,
    pub r: T,
    pub k: T,
    pub m: T,
    pub qr_in_s0: bool,
    pub kr_in_s_gamma: bool,
    pub mr_in_s_minus_gamma: bool,
    /// Whether `2 <= r < 3` (it never is in the intercritical range).
    pub r_in_2_3: bool,
}

pub fn remark_pairs<T: Exact>(
    theta: T,
    alpha: T,
    b: T,
    rules: &Admissibility<T>,
) -> Result<RemarkPairs<T>> {
    let (two, three, four) = (int::<T>(2), int::<T>(3), int::<T>(4));
    let common = alpha * (alpha + two - theta);
    let den_q = alpha * (three * alpha + two * b) - theta * (three * alpha - four + two * b);
    let den_r = alpha * (three - b) - theta * (two - b);
    let den_k = four - two * b - alpha;
    let den_m = alpha * (three * (alpha - theta) + T::one() + two * b) - (four - two * b) * (T::one() - theta);
    for (name, d) in [("q", den_q), ("r", den_r), ("k", den_k), ("m", den_m)] {
        if d <= T::zero() {
            return Err(out_of_range(format!("denominator of {name} is not positive")));
        }
    }
    let q = four * common / den_q;
    let r = three * common / den_r;
    let k = two * common / den_k;
    let m = two * common / den_m;
    let pair = |t: T, klass| AdmissiblePair { q: Exponent::Finite(t), r: Exponent::Finite(r), klass };
    Ok(RemarkPairs {
        q,
        r,
        k,
        m,
        qr_in_s0: rules.check(&pair(q, PairClass::S0), alpha, b),
        kr_in_s_gamma: rules.check(&pair(k, PairClass::SGammaC), alpha, b),
        mr_in_s_minus_gamma: rules.check(&pair(m, PairClass::SMinusGammaC), alpha, b),
        r_in_2_3: r >= two && r < three,
    })
}

/// The splitting pair `(4 + eps, 6 (4 + eps)/(8 + 3 eps))` used for the
/// defocusing `L^4` argument; it is `L^2`-admissible with space exponent in `[2, 3)`.
pub fn l4_splitting_pair<T: Exact>(eps: T) -> (T, T) {
    let four = int::<T>(4);
    let q = four + eps;
    (q, int::<T>(6) * q / (int::<T>(8) + int::<T>(3) * eps))
}
