//! Exact scalar field used by every solver path.
//!
//! The LP engine is written against [`Scalar`] so it runs unchanged over
//! `BigRational` (the crate default) or fixed-width ratios such as
//! `Ratio<i64>` for small problems. Floats are excluded on purpose: the trait
//! requires a total order, which `f32`/`f64` do not provide.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{NumAssignRef, NumRef, Signed};

use crate::error::Error;
use crate::Rational;

/// An ordered field with exact arithmetic.
pub trait Scalar:
    NumRef + NumAssignRef + Signed + Ord + Clone + Debug + Display + Send + Sync + 'static
{
}

impl<T> Scalar for T where
    T: NumRef + NumAssignRef + Signed + Ord + Clone + Debug + Display + Send + Sync + 'static
{
}

/// Parses `"p/q"` or an integer literal into a canonical rational.
pub fn parse_rational(text: &str) -> Result<Rational, Error> {
    let trimmed = text.trim();
    if trimmed.is_empty() || trimmed != text {
        return Err(Error::Parse(format!("malformed rational {text:?}")));
    }
    match trimmed.split_once('/') {
        None => BigInt::from_str(trimmed)
            .map(Rational::from_integer)
            .map_err(|_| Error::Parse(format!("malformed rational {text:?}"))),
        Some((num, den)) => {
            let num = BigInt::from_str(num)
                .map_err(|_| Error::Parse(format!("malformed numerator in {text:?}")))?;
            let den = BigInt::from_str(den)
                .map_err(|_| Error::Parse(format!("malformed denominator in {text:?}")))?;
            if den.sign() == num_bigint::Sign::NoSign {
                return Err(Error::Domain(format!("zero denominator in {text:?}")));
            }
            if den.sign() == num_bigint::Sign::Minus {
                return Err(Error::Parse(format!("negative denominator in {text:?}")));
            }
            Ok(Rational::new(num, den))
        }
    }
}

/// Exact division that reports a zero divisor instead of panicking.
pub fn checked_div(num: &Rational, den: &Rational) -> Result<Rational, Error> {
    if num_traits::Zero::is_zero(den) {
        return Err(Error::Domain("division by zero".into()));
    }
    Ok(num / den)
}

/// Shorthand for `p/q` in code and tests. Panics on a zero denominator.
pub fn rat(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

/// Integer-valued rational.
pub fn int(p: i64) -> Rational {
    Rational::from_integer(BigInt::from(p))
}

/// Serde adapter writing rationals as `"p/q"` strings.
pub mod serde_rational {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::Rational;

    pub fn serialize<S: Serializer>(value: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&value.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        super::parse_rational(&text).map_err(serde::de::Error::custom)
    }

    pub mod option {
        use serde::{Deserialize, Deserializer, Serializer};

        use crate::Rational;

        pub fn serialize<S: Serializer>(value: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
            match value {
                Some(v) => s.serialize_some(&v.to_string()),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
            Option::<String>::deserialize(d)?
                .map(|t| super::super::parse_rational(&t).map_err(serde::de::Error::custom))
                .transpose()
        }
    }

    pub mod vec {
        use serde::ser::SerializeSeq;
        use serde::{Deserialize, Deserializer, Serializer};

        use crate::Rational;

        pub fn serialize<S: Serializer>(values: &[Rational], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(values.len()))?;
            for v in values {
                seq.serialize_element(&v.to_string())?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
            let texts = Vec::<String>::deserialize(d)?;
            texts
                .iter()
                .map(|t| super::super::parse_rational(t).map_err(serde::de::Error::custom))
                .collect()
        }
    }

    pub mod matrix {
        use serde::ser::SerializeSeq;
        use serde::{Deserialize, Deserializer, Serializer};

        use crate::Rational;

        pub fn serialize<S: Serializer>(rows: &[Vec<Rational>], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(rows.len()))?;
            for row in rows {
                let texts: Vec<String> = row.iter().map(ToString::to_string).collect();
                seq.serialize_element(&texts)?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(
            d: D,
        ) -> Result<Vec<Vec<Rational>>, D::Error> {
            let rows = Vec::<Vec<String>>::deserialize(d)?;
            rows.iter()
                .map(|row| {
                    row.iter()
                        .map(|t| {
                            super::super::parse_rational(t).map_err(serde::de::Error::custom)
                        })
                        .collect()
                })
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_integers() {
        assert_eq!(parse_rational("3/2").unwrap(), rat(3, 2));
        assert_eq!(parse_rational("6/4").unwrap(), rat(3, 2));
        assert_eq!(parse_rational("-7").unwrap(), int(-7));
        assert_eq!(parse_rational("0").unwrap(), int(0));
        assert_eq!(parse_rational("-1/3").unwrap(), rat(-1, 3));
    }

    #[test]
    fn rejects_malformed_text() {
        for bad in ["", "1.5", "1/0", "a/b", " 1", "1/", "/2", "1/-2", "1e3"] {
            assert!(parse_rational(bad).is_err(), "{bad:?} should not parse");
        }
        assert!(matches!(parse_rational("1/0"), Err(Error::Domain(_))));
    }

    #[test]
    fn canonical_display() {
        assert_eq!(rat(4, 8).to_string(), "1/2");
        assert_eq!(rat(4, 2).to_string(), "2");
        assert_eq!(rat(-3, 9).to_string(), "-1/3");
        assert_eq!(parse_rational(&rat(22, 7).to_string()).unwrap(), rat(22, 7));
    }

    #[test]
    fn division_by_zero_is_an_error() {
        assert!(checked_div(&int(1), &int(0)).is_err());
        assert_eq!(checked_div(&int(1), &int(4)).unwrap(), rat(1, 4));
    }
}
