//! Exact, unreduced fractions.
//!
//! Statistics such as Stone pairings carry a meaningful denominator (`n^p`
//! for pairings, `n` for ball fractions), so the value is kept as the raw
//! numerator/denominator pair and compared by cross-multiplication.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde_json::{json, Value};

#[derive(Debug, Clone)]
pub struct Fraction {
    num: BigUint,
    den: BigUint,
}

impl Fraction {
    /// Panics if `den` is zero.
    pub fn new(num: impl Into<BigUint>, den: impl Into<BigUint>) -> Self {
        let den = den.into();
        assert!(!den.is_zero(), "fraction with zero denominator");
        Fraction {
            num: num.into(),
            den,
        }
    }

    pub fn zero() -> Self {
        Fraction::new(0u32, 1u32)
    }

    pub fn one() -> Self {
        Fraction::new(1u32, 1u32)
    }

    pub fn numer(&self) -> &BigUint {
        &self.num
    }

    pub fn denom(&self) -> &BigUint {
        &self.den
    }

    pub fn to_rational(&self) -> BigRational {
        BigRational::new(BigInt::from(self.num.clone()), BigInt::from(self.den.clone()))
    }

    /// Product without reduction: numerators and denominators multiply.
    pub fn mul(&self, other: &Fraction) -> Fraction {
        Fraction {
            num: &self.num * &other.num,
            den: &self.den * &other.den,
        }
    }

    /// Decimal rendering rounded half-up to `digits` fractional digits.
    pub fn to_decimal(&self, digits: u32) -> String {
        let scale = BigUint::from(10u32).pow(digits);
        let scaled = (&self.num * &scale * 2u32 + &self.den) / (&self.den * 2u32);
        let int_part = &scaled / &scale;
        let frac_part = &scaled % &scale;
        if digits == 0 {
            return int_part.to_string();
        }
        format!(
            "{}.{:0>width$}",
            int_part,
            frac_part.to_string(),
            width = digits as usize
        )
    }

    /// `{"num": .., "den": .., "decimal": ..}`; integers that do not fit in
    /// a u64 are emitted as decimal strings.
    pub fn to_json(&self) -> Value {
        json!({
            "num": biguint_json(&self.num),
            "den": biguint_json(&self.den),
            "decimal": self.to_decimal(12),
        })
    }
}

fn biguint_json(x: &BigUint) -> Value {
    match u64::try_from(x) {
        Ok(v) => Value::from(v),
        Err(_) => Value::from(x.to_string()),
    }
}

impl PartialEq for Fraction {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Fraction {}

impl PartialOrd for Fraction {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Fraction {
    fn cmp(&self, other: &Self) -> Ordering {
        (&self.num * &other.den).cmp(&(&other.num * &self.den))
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl From<&Fraction> for BigRational {
    fn from(value: &Fraction) -> Self {
        value.to_rational()
    }
}

/// Exact `2^-k`.
pub fn pow2_inverse(k: u32) -> Fraction {
    Fraction::new(BigUint::one(), BigUint::one() << k as usize)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keeps_unreduced_form() {
        let f = Fraction::new(18u32, 100u32);
        assert_eq!(f.to_string(), "18/100");
        assert_eq!(f, Fraction::new(9u32, 50u32));
    }

    #[test]
    fn decimal_rounding() {
        assert_eq!(Fraction::new(18u32, 100u32).to_decimal(12), "0.180000000000");
        assert_eq!(Fraction::new(2u32, 3u32).to_decimal(12), "0.666666666667");
        assert_eq!(Fraction::new(1u32, 1u32).to_decimal(3), "1.000");
        assert_eq!(Fraction::new(1u32, 8u32).to_decimal(2), "0.13");
    }

    #[test]
    fn ordering_by_value() {
        assert!(Fraction::new(1u32, 3u32) < Fraction::new(34u32, 100u32));
        assert_eq!(pow2_inverse(3), Fraction::new(1u32, 8u32));
    }

    #[test]
    fn json_shape() {
        let v = Fraction::new(44u32, 100u32).to_json();
        assert_eq!(v["num"], 44);
        assert_eq!(v["den"], 100);
        assert_eq!(v["decimal"], "0.440000000000");
    }
}
