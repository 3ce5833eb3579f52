use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::DomainError;

/// One point of the domain: an integer or a marker string `*^level`.
///
/// Marker levels start at 1. Elements are ordered by their canonical index,
/// not by value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Element {
    Int(i64),
    Marker(u64),
}

/// Largest absolute integer value that still has a canonical index.
pub const MAX_ABS_INT: i64 = (1 << 61) - 1;

/// Position of an element in the fixed enumeration of the domain.
///
/// Markers take the odd slots (`*^n` at `2n - 1`), integers the even slots in
/// the order `0, +1, -1, +2, -2, ...` at `2, 4, 6, 8, 10, ...`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CanonicalIndex(u64);

impl CanonicalIndex {
    pub fn new(value: u64) -> Result<Self, DomainError> {
        if value == 0 {
            return Err(DomainError::ZeroIndex);
        }
        Ok(CanonicalIndex(value))
    }

    pub fn get(self) -> u64 {
        self.0
    }

    /// The element sitting at this index.
    pub fn element(self) -> Element {
        Element::from_index(self.0)
    }
}

impl Element {
    pub fn marker(level: u64) -> Result<Element, DomainError> {
        if level == 0 {
            return Err(DomainError::MarkerLevelZero);
        }
        Ok(Element::Marker(level))
    }

    pub fn is_marker(&self) -> bool {
        matches!(self, Element::Marker(_))
    }

    pub fn as_int(&self) -> Option<i64> {
        match *self {
            Element::Int(v) => Some(v),
            Element::Marker(_) => None,
        }
    }

    pub fn marker_level(&self) -> Option<u64> {
        match *self {
            Element::Marker(k) => Some(k),
            Element::Int(_) => None,
        }
    }

    pub fn validate(&self) -> Result<(), DomainError> {
        match *self {
            Element::Marker(0) => Err(DomainError::MarkerLevelZero),
            Element::Int(v) if v.unsigned_abs() > MAX_ABS_INT as u64 => {
                Err(DomainError::IntOutOfRange(v))
            }
            _ => Ok(()),
        }
    }

    /// Raw canonical index. Panics on `Marker(0)` or integers beyond
    /// [`MAX_ABS_INT`].
    #[inline]
    pub fn index(&self) -> u64 {
        match *self {
            Element::Marker(n) => {
                assert!(n >= 1, "marker level must be at least 1");
                2 * n - 1
            }
            Element::Int(0) => 2,
            Element::Int(v) => {
                let k = v.unsigned_abs();
                assert!(k <= MAX_ABS_INT as u64, "integer {v} has no canonical index");
                if v > 0 {
                    4 * k
                } else {
                    4 * k + 2
                }
            }
        }
    }

    pub fn canonical_index(&self) -> CanonicalIndex {
        CanonicalIndex(self.index())
    }

    /// Inverse of [`Element::index`]. Index 0 is not valid.
    #[inline]
    pub fn from_index(idx: u64) -> Element {
        assert!(idx >= 1, "canonical indices start at 1");
        if idx % 2 == 1 {
            Element::Marker(idx.div_ceil(2))
        } else if idx == 2 {
            Element::Int(0)
        } else if idx.is_multiple_of(4) {
            Element::Int((idx / 4) as i64)
        } else {
            Element::Int(-(((idx - 2) / 4) as i64))
        }
    }
}

pub fn canonical_index(e: &Element) -> CanonicalIndex {
    e.canonical_index()
}

pub fn deindex(i: CanonicalIndex) -> Element {
    i.element()
}

impl Ord for Element {
    fn cmp(&self, other: &Self) -> Ordering {
        self.index().cmp(&other.index())
    }
}

impl PartialOrd for Element {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Element::Int(v) => write!(f, "{v}"),
            Element::Marker(k) => write!(f, "*^{k}"),
        }
    }
}

impl FromStr for Element {
    type Err = DomainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let e = if let Some(rest) = s.strip_prefix("*^") {
            let level: u64 = rest
                .parse()
                .map_err(|_| DomainError::Parse(s.to_string()))?;
            Element::Marker(level)
        } else {
            Element::Int(s.parse().map_err(|_| DomainError::Parse(s.to_string()))?)
        };
        e.validate()?;
        Ok(e)
    }
}

impl Serialize for Element {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Element {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
