//! The dimensional parameter `m` of a smooth metric measure space.

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::cmp::Ordering;
use std::fmt;

/// `m ∈ ℝ ∪ {±∞}`. `Finite(0.0)` means the density is ignored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DimParam {
    Finite(f64),
    PosInfinity,
    NegInfinity,
}

impl DimParam {
    pub fn from_f64(m: f64) -> Self {
        if m == f64::INFINITY {
            DimParam::PosInfinity
        } else if m == f64::NEG_INFINITY {
            DimParam::NegInfinity
        } else {
            DimParam::Finite(m)
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            DimParam::Finite(m) => m,
            DimParam::PosInfinity => f64::INFINITY,
            DimParam::NegInfinity => f64::NEG_INFINITY,
        }
    }

    /// The finite value, if any.
    pub fn finite(self) -> Option<f64> {
        match self {
            DimParam::Finite(m) => Some(m),
            _ => None,
        }
    }

    pub fn is_zero(self) -> bool {
        self == DimParam::Finite(0.0)
    }

    pub fn is_infinite(self) -> bool {
        !matches!(self, DimParam::Finite(_))
    }

    /// Finite and nonzero: the regime where the density is carried as `v`.
    pub fn is_weighted_finite(self) -> bool {
        matches!(self, DimParam::Finite(m) if m != 0.0)
    }

    pub fn total_order(&self, other: &Self) -> Ordering {
        self.as_f64().total_cmp(&other.as_f64())
    }

    pub fn token(self) -> String {
        match self {
            DimParam::Finite(m) => format!("{m}"),
            DimParam::PosInfinity => "+inf".into(),
            DimParam::NegInfinity => "-inf".into(),
        }
    }
}

impl From<f64> for DimParam {
    fn from(m: f64) -> Self {
        DimParam::from_f64(m)
    }
}

impl fmt::Display for DimParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.token())
    }
}

impl std::str::FromStr for DimParam {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "+inf" | "inf" | "+infinity" | "infinity" => Ok(DimParam::PosInfinity),
            "-inf" | "-infinity" => Ok(DimParam::NegInfinity),
            t => {
                let m: f64 = t.parse().map_err(|_| format!("not a dimensional parameter: {t:?}"))?;
                if !m.is_finite() {
                    return Err(format!("use \"+inf\" or \"-inf\" instead of {t:?}"));
                }
                Ok(DimParam::Finite(m))
            }
        }
    }
}

impl Serialize for DimParam {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            DimParam::Finite(m) => s.serialize_f64(*m),
            DimParam::PosInfinity => s.serialize_str("+inf"),
            DimParam::NegInfinity => s.serialize_str("-inf"),
        }
    }
}

impl<'de> Deserialize<'de> for DimParam {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = DimParam;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number, \"+inf\" or \"-inf\"")
            }

            fn visit_f64<E: de::Error>(self, m: f64) -> Result<DimParam, E> {
                Ok(DimParam::from_f64(m))
            }

            fn visit_i64<E: de::Error>(self, m: i64) -> Result<DimParam, E> {
                Ok(DimParam::Finite(m as f64))
            }

            fn visit_u64<E: de::Error>(self, m: u64) -> Result<DimParam, E> {
                Ok(DimParam::Finite(m as f64))
            }

            fn visit_str<E: de::Error>(self, s: &str) -> Result<DimParam, E> {
                s.parse().map_err(E::custom)
            }
        }
        d.deserialize_any(V)
    }
}

/// Serde helper for plain reals that may be infinite (domain endpoints).
pub mod extended_real {
    use super::*;

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        DimParam::from_f64(*x).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        DimParam::deserialize(d).map(DimParam::as_f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokens_round_trip() {
        for m in [
            DimParam::Finite(0.0),
            DimParam::Finite(-0.5),
            DimParam::Finite(7.0),
            DimParam::PosInfinity,
            DimParam::NegInfinity,
        ] {
            let s = serde_json::to_string(&m).unwrap();
            let back: DimParam = serde_json::from_str(&s).unwrap();
            assert_eq!(m, back);
        }
        assert_eq!(serde_json::to_string(&DimParam::PosInfinity).unwrap(), "\"+inf\"");
        let m: DimParam = serde_json::from_str("3").unwrap();
        assert_eq!(m, DimParam::Finite(3.0));
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!("abc".parse::<DimParam>().is_err());
        assert!("NaN".parse::<DimParam>().is_err());
        assert_eq!("-inf".parse::<DimParam>().unwrap(), DimParam::NegInfinity);
    }

    #[test]
    fn ordering_puts_infinity_last() {
        let mut v = vec![DimParam::PosInfinity, DimParam::Finite(2.0), DimParam::NegInfinity];
        v.sort_by(DimParam::total_order);
        assert_eq!(v, vec![DimParam::NegInfinity, DimParam::Finite(2.0), DimParam::PosInfinity]);
    }
}
