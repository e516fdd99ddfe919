//! Scalar types shared by every automaton model.
//!
//! Two numeric modes exist: double precision (`f64`) and exact rationals
//! ([`Rational`]). Complex amplitudes are `Complex<R>` over either.

use std::fmt::Debug;
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;
pub type Cx<R> = Complex<R>;
pub type C64 = Complex<f64>;

/// Ring element usable as a matrix entry.
pub trait Scalar: Num + Clone + Debug + Send + Sync + 'static {
    /// True for the exact rational mode.
    const EXACT: bool;

    /// Absolute value (modulus for complex entries) as a float.
    fn magnitude(&self) -> f64;

    fn conj(&self) -> Self;

    /// Zero test: exact in rational mode, `|x| <= tol` in float mode.
    fn is_zero_within(&self, tol: f64) -> bool {
        if Self::EXACT {
            self.is_zero()
        } else {
            self.magnitude() <= tol
        }
    }
}

/// Real field: `f64` or [`Rational`].
pub trait Real: Scalar + Signed + PartialOrd {
    fn to_f64(&self) -> f64;

    /// Exact conversion in rational mode (binary expansion of the float).
    fn from_f64(x: f64) -> Self;

    fn from_ratio(num: i64, den: i64) -> Self;

    /// Parses `"p/q"`, `"p"` or a decimal literal.
    fn parse_str(s: &str) -> Result<Self>;

    /// Renders as a plain float in float mode and as `"p/q"` in exact mode.
    fn render(&self) -> String;
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn magnitude(&self) -> f64 {
        self.abs()
    }

    fn conj(&self) -> Self {
        *self
    }
}

impl Real for f64 {
    fn to_f64(&self) -> f64 {
        *self
    }

    fn from_f64(x: f64) -> Self {
        x
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn parse_str(s: &str) -> Result<Self> {
        let r = parse_rational(s)?;
        Ok(Real::to_f64(&r))
    }

    fn render(&self) -> String {
        format!("{self}")
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn magnitude(&self) -> f64 {
        Real::to_f64(&self.abs())
    }

    fn conj(&self) -> Self {
        self.clone()
    }
}

impl Real for Rational {
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or_else(|| {
            // numerator or denominator beyond f64 range
            let n = self.numer().to_f64().unwrap_or(f64::NAN);
            let d = self.denom().to_f64().unwrap_or(f64::NAN);
            n / d
        })
    }

    fn from_f64(x: f64) -> Self {
        BigRational::from_float(x).expect("finite float")
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn parse_str(s: &str) -> Result<Self> {
        parse_rational(s)
    }

    fn render(&self) -> String {
        if self.denom().is_one() {
            self.numer().to_string()
        } else {
            format!("{}/{}", self.numer(), self.denom())
        }
    }
}

impl<R: Real> Scalar for Complex<R> {
    const EXACT: bool = R::EXACT;

    fn magnitude(&self) -> f64 {
        self.norm_sqr().to_f64().sqrt()
    }

    fn conj(&self) -> Self {
        Complex::new(self.re.clone(), -self.im.clone())
    }
}

/// Parses `"p/q"`, an integer, or a decimal literal (`"0.25"`, `"-1e-3"`)
/// into an exact rational. Decimal literals are read in base ten, not via
/// their nearest binary float.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("'{s}' is not a rational number"));
    if let Some((p, q)) = s.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|_| bad())?;
        let q = BigInt::from_str(q.trim()).map_err(|_| bad())?;
        if q.is_zero() {
            return Err(Error::Parse(format!("'{s}' has a zero denominator")));
        }
        return Ok(BigRational::new(p, q));
    }
    if let Ok(n) = BigInt::from_str(s) {
        return Ok(BigRational::from_integer(n));
    }
    // decimal with optional exponent
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part
        .chars()
        .chain(frac_part.chars())
        .all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let mut value = BigRational::from_integer(BigInt::from_str(&digits).map_err(|_| bad())?);
    let shift = exp - frac_part.len() as i32;
    let ten = BigRational::from_integer(BigInt::from(10));
    let scale = num_traits::pow(ten, shift.unsigned_abs() as usize);
    if shift >= 0 {
        value *= scale;
    } else {
        value /= scale;
    }
    Ok(if neg { -value } else { value })
}

/// Converts a complex value of either mode to `C64`.
pub fn to_c64<R: Real>(z: &Complex<R>) -> C64 {
    C64::new(z.re.to_f64(), z.im.to_f64())
}

pub fn real<R: Real>(x: R) -> Complex<R> {
    Complex::new(x, R::zero())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_rational("3/4").unwrap(), Rational::from_ratio(3, 4));
        assert_eq!(parse_rational("-6/8").unwrap(), Rational::from_ratio(-3, 4));
        assert_eq!(parse_rational("0.25").unwrap(), Rational::from_ratio(1, 4));
        assert_eq!(
            parse_rational("1e-2").unwrap(),
            Rational::from_ratio(1, 100)
        );
        assert_eq!(parse_rational(".5").unwrap(), Rational::from_ratio(1, 2));
        assert_eq!(parse_rational("7").unwrap(), Rational::from_ratio(7, 1));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("").is_err());
    }

    #[test]
    fn render_round_trips() {
        let x = Rational::from_ratio(-5, 12);
        assert_eq!(x.render(), "-5/12");
        assert_eq!(Rational::parse_str(&x.render()).unwrap(), x);
        assert_eq!(Rational::from_ratio(4, 2).render(), "2");
    }

    #[test]
    fn exact_zero_test_ignores_tolerance() {
        let tiny = Rational::from_ratio(1, 1_000_000_000_000);
        assert!(!tiny.is_zero_within(1e-3));
        assert!(1e-13f64.is_zero_within(1e-12));
    }
}
