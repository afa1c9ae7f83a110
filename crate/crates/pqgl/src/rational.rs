//! Exact rational scalars for exponent bookkeeping.
//!
//! The growth regimes this crate distinguishes are separated by razor-thin
//! boundaries: `q/p` equal to versus strictly below `1 + 1/n - 1/r`, or a log
//! exponent equal to versus above `4n`. Deciding those in floating point
//! misclassifies every borderline configuration, so exponents are carried as
//! exact `i64` ratios and lowered to `f64` only at the numeric frontier.

use num::rational::Ratio;
use num::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

/// Exact rational number backed by `i64` numerator/denominator.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Rational(Ratio<i64>);

/// Error for parsing or approximating rationals.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RationalError {
    #[error("cannot parse {0:?} as a rational (want `a`, `a/b` or a decimal)")]
    Parse(String),
    #[error("zero denominator in {0:?}")]
    ZeroDenominator(String),
    #[error("no rational with denominator <= {max_den} approximates {value} to within {tol}")]
    NoApproximation { value: f64, tol: f64, max_den: i64 },
}

impl Rational {
    pub fn new(num: i64, den: i64) -> Result<Self, RationalError> {
        if den == 0 {
            return Err(RationalError::ZeroDenominator(format!("{num}/{den}")));
        }
        Ok(Rational(Ratio::new(num, den)))
    }

    pub fn from_int(v: i64) -> Self {
        Rational(Ratio::from_integer(v))
    }

    pub fn zero() -> Self {
        Rational(Ratio::zero())
    }

    pub fn one() -> Self {
        Rational(Ratio::one())
    }

    pub fn numer(&self) -> i64 {
        *self.0.numer()
    }

    pub fn denom(&self) -> i64 {
        *self.0.denom()
    }

    pub fn to_f64(&self) -> f64 {
        // Ratio::to_f64 is exact up to one rounding.
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn recip(&self) -> Self {
        Rational(self.0.recip())
    }

    pub fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }

    /// Best rational approximation of `value` with error below `tol`, via the
    /// Stern-Brocot / continued-fraction walk. Denominators are capped so the
    /// search cannot overflow or loop on irrationals.
    pub fn approx_from_f64(value: f64, tol: f64) -> Result<Self, RationalError> {
        const MAX_DEN: i64 = 1_000_000_000;
        if !value.is_finite() {
            return Err(RationalError::NoApproximation { value, tol, max_den: MAX_DEN });
        }
        let sign = if value < 0.0 { -1 } else { 1 };
        let target = value.abs();
        // Continued-fraction convergents p_k/q_k of `target`.
        let (mut p0, mut q0, mut p1, mut q1) = (1i64, 0i64, target.floor() as i64, 1i64);
        let mut frac = target - target.floor();
        for _ in 0..64 {
            let approx = p1 as f64 / q1 as f64;
            if (approx - target).abs() <= tol {
                return Rational::new(sign * p1, q1);
            }
            if frac.abs() < f64::EPSILON {
                break;
            }
            let inv = 1.0 / frac;
            let a = inv.floor();
            frac = inv - a;
            let a = a as i64;
            let p2 = a.checked_mul(p1).and_then(|v| v.checked_add(p0));
            let q2 = a.checked_mul(q1).and_then(|v| v.checked_add(q0));
            match (p2, q2) {
                (Some(p2), Some(q2)) if q2 <= MAX_DEN => {
                    p0 = p1;
                    q0 = q1;
                    p1 = p2;
                    q1 = q2;
                }
                _ => break,
            }
        }
        let approx = p1 as f64 / q1 as f64;
        if (approx - target).abs() <= tol {
            return Rational::new(sign * p1, q1);
        }
        Err(RationalError::NoApproximation { value, tol, max_den: MAX_DEN })
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl FromStr for Rational {
    type Err = RationalError;

    /// Accepts `"7"`, `"7/3"`, `"-2.25"` — integer, fraction, or finite
    /// decimal. Decimals convert exactly (2.2 becomes 11/5, not a float).
    fn from_str(s: &str) -> Result<Self, RationalError> {
        let s = s.trim();
        if s.is_empty() {
            return Err(RationalError::Parse(s.into()));
        }
        if let Some((num, den)) = s.split_once('/') {
            let n: i64 = num.trim().parse().map_err(|_| RationalError::Parse(s.into()))?;
            let d: i64 = den.trim().parse().map_err(|_| RationalError::Parse(s.into()))?;
            return Rational::new(n, d);
        }
        if let Some((int_part, frac_part)) = s.split_once('.') {
            if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
                return Err(RationalError::Parse(s.into()));
            }
            let negative = int_part.trim_start().starts_with('-');
            let int: i64 = if int_part == "-" || int_part.is_empty() {
                0
            } else {
                int_part.parse().map_err(|_| RationalError::Parse(s.into()))?
            };
            let digits: i64 = frac_part.parse().map_err(|_| RationalError::Parse(s.into()))?;
            let scale = 10i64
                .checked_pow(frac_part.len() as u32)
                .ok_or_else(|| RationalError::Parse(s.into()))?;
            let frac = Ratio::new(digits, scale);
            let val = if negative {
                Ratio::from_integer(int) - frac
            } else {
                Ratio::from_integer(int) + frac
            };
            return Ok(Rational(val));
        }
        s.parse::<i64>().map(Rational::from_int).map_err(|_| RationalError::Parse(s.into()))
    }
}

impl Serialize for Rational {
    /// Rationals serialize as strings (`"7/6"`) so JSON round-trips exactly.
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(self.0.$method(rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}
