//! Timestamp domains used by the MWMR register implementations.
//!
//! Vector timestamps may be partially formed while a writer is still
//! collecting entries; unformed entries are [`TsEntry::Inf`], which compares
//! greater than every finite entry.

use std::cmp::Ordering;
use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// One entry of a vector timestamp: a natural number or infinity.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TsEntry {
    Fin(u64),
    Inf,
}

impl TsEntry {
    pub fn is_finite(self) -> bool {
        matches!(self, TsEntry::Fin(_))
    }

    pub fn finite(self) -> Option<u64> {
        match self {
            TsEntry::Fin(x) => Some(x),
            TsEntry::Inf => None,
        }
    }
}

impl fmt::Display for TsEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TsEntry::Fin(x) => write!(f, "{x}"),
            TsEntry::Inf => f.write_str("inf"),
        }
    }
}

impl Serialize for TsEntry {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            TsEntry::Fin(x) => s.serialize_u64(*x),
            TsEntry::Inf => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for TsEntry {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match serde_json::Value::deserialize(d)? {
            serde_json::Value::String(s) if s == "inf" => Ok(TsEntry::Inf),
            serde_json::Value::Number(n) => n
                .as_u64()
                .map(TsEntry::Fin)
                .ok_or_else(|| D::Error::custom(format!("invalid timestamp entry {n}"))),
            other => Err(D::Error::custom(format!("invalid timestamp entry {other}"))),
        }
    }
}

/// Raised when two vector timestamps of different lengths are compared.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("vector timestamp length mismatch: {left} vs {right}")]
pub struct LengthMismatch {
    pub left: usize,
    pub right: usize,
}

/// A length-n vector over naturals and infinity, ordered lexicographically.
///
/// The derived `Ord` is only meaningful between timestamps of the same length;
/// use [`vts_compare`] where lengths come from untrusted input.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VectorTimestamp(Vec<TsEntry>);

impl VectorTimestamp {
    pub fn zeros(n: usize) -> Self {
        VectorTimestamp(vec![TsEntry::Fin(0); n])
    }

    pub fn infinite(n: usize) -> Self {
        VectorTimestamp(vec![TsEntry::Inf; n])
    }

    pub fn from_entries(entries: Vec<TsEntry>) -> Self {
        VectorTimestamp(entries)
    }

    pub fn finite(values: &[u64]) -> Self {
        VectorTimestamp(values.iter().copied().map(TsEntry::Fin).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[TsEntry] {
        &self.0
    }

    pub fn get(&self, i: usize) -> TsEntry {
        self.0[i]
    }

    pub fn set(&mut self, i: usize, e: TsEntry) {
        self.0[i] = e;
    }

    /// True when no entry is infinite.
    pub fn is_complete(&self) -> bool {
        self.0.iter().all(|e| e.is_finite())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|e| *e == TsEntry::Fin(0))
    }
}

impl fmt::Display for VectorTimestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{e}")?;
        }
        f.write_str("]")
    }
}

/// Lexicographic comparison of two vector timestamps of equal length.
pub fn vts_compare(a: &VectorTimestamp, b: &VectorTimestamp) -> Result<Ordering, LengthMismatch> {
    if a.len() != b.len() {
        return Err(LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(a.0.cmp(&b.0))
}

/// A Lamport clock value `<sq, pid>`, ordered by `sq` then `pid`.
///
/// `pid` is the 1-based cell label of the writer (process index + 1).
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LamportTimestamp {
    pub sq: u64,
    pub pid: u32,
}

impl LamportTimestamp {
    pub fn new(sq: u64, pid: u32) -> Self {
        LamportTimestamp { sq, pid }
    }
}

impl fmt::Display for LamportTimestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{},{}>", self.sq, self.pid)
    }
}

impl Serialize for LamportTimestamp {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        (self.sq, self.pid).serialize(s)
    }
}

impl<'de> Deserialize<'de> for LamportTimestamp {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let (sq, pid) = <(u64, u32)>::deserialize(d)?;
        Ok(LamportTimestamp { sq, pid })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(entries: &[Option<u64>]) -> VectorTimestamp {
        VectorTimestamp::from_entries(
            entries
                .iter()
                .map(|e| e.map(TsEntry::Fin).unwrap_or(TsEntry::Inf))
                .collect(),
        )
    }

    // Reference comparator: walk both vectors, mapping inf to u128::MAX.
    fn reference_cmp(a: &[Option<u64>], b: &[Option<u64>]) -> Ordering {
        let key = |e: &Option<u64>| e.map(u128::from).unwrap_or(u128::MAX);
        for (x, y) in a.iter().zip(b) {
            match key(x).cmp(&key(y)) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        Ordering::Equal
    }

    #[test]
    fn first_entry_decides() {
        let a = VectorTimestamp::finite(&[0, 0, 0]);
        let b = v(&[Some(1), None, None]);
        assert_eq!(vts_compare(&a, &b), Ok(Ordering::Less));
    }

    #[test]
    fn all_infinite_equal() {
        let a = VectorTimestamp::infinite(3);
        assert_eq!(vts_compare(&a, &a.clone()), Ok(Ordering::Equal));
    }

    #[test]
    fn infinity_beats_finite_in_second_position() {
        let a = v(&[Some(0), None, None]);
        let b = VectorTimestamp::finite(&[0, 3, 1]);
        assert_eq!(
            reference_cmp(&[Some(0), None, None], &[Some(0), Some(3), Some(1)]),
            Ordering::Greater
        );
        assert_eq!(vts_compare(&a, &b), Ok(Ordering::Greater));
    }

    #[test]
    fn length_mismatch_is_an_error() {
        let err = vts_compare(&VectorTimestamp::zeros(2), &VectorTimestamp::zeros(3)).unwrap_err();
        assert_eq!(err, LengthMismatch { left: 2, right: 3 });
    }

    #[test]
    fn lamport_orders_by_sq_then_pid() {
        assert!(LamportTimestamp::new(1, 2) > LamportTimestamp::new(1, 1));
        assert!(LamportTimestamp::new(1, 1) > LamportTimestamp::new(0, 3));
        assert!(LamportTimestamp::new(3, 1) > LamportTimestamp::new(2, 3));
    }

    #[test]
    fn inf_serializes_as_string() {
        let a = v(&[Some(2), None]);
        assert_eq!(serde_json::to_string(&a).unwrap(), r#"[2,"inf"]"#);
        let back: VectorTimestamp = serde_json::from_str(r#"[2,"inf"]"#).unwrap();
        assert_eq!(back, a);
    }

    fn entry() -> impl Strategy<Value = Option<u64>> {
        prop_oneof![3 => (0u64..4).prop_map(Some), 1 => Just(None)]
    }

    proptest! {
        #[test]
        fn compare_matches_reference(
            a in proptest::collection::vec(entry(), 4),
            b in proptest::collection::vec(entry(), 4),
        ) {
            prop_assert_eq!(vts_compare(&v(&a), &v(&b)).unwrap(), reference_cmp(&a, &b));
        }

        #[test]
        fn compare_is_a_total_order(
            a in proptest::collection::vec(entry(), 3),
            b in proptest::collection::vec(entry(), 3),
            c in proptest::collection::vec(entry(), 3),
        ) {
            let (a, b, c) = (v(&a), v(&b), v(&c));
            let ab = vts_compare(&a, &b).unwrap();
            prop_assert_eq!(ab.reverse(), vts_compare(&b, &a).unwrap());
            if ab == Ordering::Equal {
                prop_assert_eq!(&a, &b);
            }
            if ab != Ordering::Greater && vts_compare(&b, &c).unwrap() != Ordering::Greater {
                prop_assert_ne!(vts_compare(&a, &c).unwrap(), Ordering::Greater);
            }
        }
    }
}
