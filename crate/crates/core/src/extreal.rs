//! Extended reals: `-inf`, finite values, `+inf`, under a total order.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Neg;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A value of `R ∪ {-∞, +∞}`.
///
/// The finite payload is never NaN; [`ExtReal::finite`] rejects it.
#[derive(Debug, Clone, Copy)]
pub enum ExtReal {
    NegInf,
    Finite(f64),
    PosInf,
}

impl ExtReal {
    /// Wraps a real, mapping `±f64::INFINITY` onto the infinite variants.
    /// Returns `None` for NaN.
    pub fn finite(v: f64) -> Option<Self> {
        if v.is_nan() {
            None
        } else if v == f64::INFINITY {
            Some(ExtReal::PosInf)
        } else if v == f64::NEG_INFINITY {
            Some(ExtReal::NegInf)
        } else {
            Some(ExtReal::Finite(v))
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn as_finite(&self) -> Option<f64> {
        match *self {
            ExtReal::Finite(v) => Some(v),
            _ => None,
        }
    }

    /// Lossy conversion to `f64` (infinities map to `±f64::INFINITY`).
    pub fn to_f64(&self) -> f64 {
        match *self {
            ExtReal::NegInf => f64::NEG_INFINITY,
            ExtReal::Finite(v) => v,
            ExtReal::PosInf => f64::INFINITY,
        }
    }

    /// Bit-level identity, distinguishing `0.0` from `-0.0`.
    pub fn bit_eq(&self, other: &Self) -> bool {
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => a.to_bits() == b.to_bits(),
            (ExtReal::NegInf, ExtReal::NegInf) | (ExtReal::PosInf, ExtReal::PosInf) => true,
            _ => false,
        }
    }

    /// `self - lower` for `self >= lower`, with equal infinities giving zero.
    /// Infinite excess is `+inf`. Returns zero when `self < lower`.
    pub fn excess_over(&self, lower: &Self) -> ExtReal {
        if self <= lower {
            return ExtReal::Finite(0.0);
        }
        match (*self, *lower) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::Finite(a - b),
            _ => ExtReal::PosInf,
        }
    }

    fn rank(&self) -> u8 {
        match self {
            ExtReal::NegInf => 0,
            ExtReal::Finite(_) => 1,
            ExtReal::PosInf => 2,
        }
    }
}

impl From<f64> for ExtReal {
    /// Panics on NaN.
    fn from(v: f64) -> Self {
        ExtReal::finite(v).expect("NaN is not an extended real")
    }
}

impl PartialEq for ExtReal {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for ExtReal {}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtReal {
    // Finite values compare numerically, so `0.0 == -0.0`.
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => {
                a.partial_cmp(b).expect("finite payload is never NaN")
            }
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl Neg for ExtReal {
    type Output = ExtReal;

    fn neg(self) -> ExtReal {
        match self {
            ExtReal::NegInf => ExtReal::PosInf,
            ExtReal::Finite(v) => ExtReal::Finite(-v),
            ExtReal::PosInf => ExtReal::NegInf,
        }
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::NegInf => f.write_str("-inf"),
            ExtReal::Finite(v) => write!(f, "{v}"),
            ExtReal::PosInf => f.write_str("+inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid extended real `{0}`")]
pub struct ParseExtRealError(pub String);

impl FromStr for ExtReal {
    type Err = ParseExtRealError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "-inf" => Ok(ExtReal::NegInf),
            "+inf" => Ok(ExtReal::PosInf),
            _ => s
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .map(ExtReal::Finite)
                .ok_or_else(|| ParseExtRealError(s.to_string())),
        }
    }
}

// Finite values serialize as JSON numbers, infinities as the exact tokens
// "-inf" / "+inf".
impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            ExtReal::Finite(v) => serializer.serialize_f64(*v),
            ExtReal::NegInf => serializer.serialize_str("-inf"),
            ExtReal::PosInf => serializer.serialize_str("+inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Token(String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Num(v) => ExtReal::finite(v)
                .ok_or_else(|| serde::de::Error::custom("NaN is not an extended real")),
            Repr::Token(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}
