use std::fmt;

use serde::Serialize;

/// Degree-of-ambiguity labels, ordered `0 < 1 < … < ℵ0⁻ < ℵ0 < 2^ℵ0`.
///
/// `Aleph0Minus` is a label, not a cardinal: unbounded finite ambiguity with
/// no single word of infinite ambiguity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(tag = "label", content = "k")]
pub enum DegreeLabel {
    Finite(u64),
    Aleph0Minus,
    Aleph0,
    Continuum,
}

impl fmt::Display for DegreeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DegreeLabel::Finite(k) => write!(f, "{k}"),
            DegreeLabel::Aleph0Minus => write!(f, "ℵ0⁻"),
            DegreeLabel::Aleph0 => write!(f, "ℵ0"),
            DegreeLabel::Continuum => write!(f, "2^ℵ0"),
        }
    }
}
