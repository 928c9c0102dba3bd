use std::collections::{BTreeMap, BTreeSet};

use crate::types::{precedes, History, Linearization, OpId, RegisterId, Value};

/// Why a claimed linearization is not one.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Violation {
    #[error("completeness: completed {op} missing")]
    Missing { op: OpId },
    #[error("completeness: {op} does not occur in the history")]
    Unknown { op: OpId },
    #[error("completeness: {op} appears twice")]
    Duplicate { op: OpId },
    #[error("precedence: {first} precedes {second} but is placed after it")]
    Precedence { first: OpId, second: OpId },
    #[error("read value: {read} returned {got} but the last write before it is {writer:?} with {expected}")]
    ReadValue {
        read: OpId,
        writer: Option<OpId>,
        got: Value,
        expected: Value,
    },
}

impl Violation {
    /// Which property of a linearization the violation breaks (1, 2 or 3).
    pub fn property(&self) -> u8 {
        match self {
            Violation::Missing { .. } | Violation::Unknown { .. } | Violation::Duplicate { .. } => 1,
            Violation::Precedence { .. } => 2,
            Violation::ReadValue { .. } => 3,
        }
    }
}

/// Checks `lin` against `h`: every completed operation is present and extras
/// are pending in `h`; real-time precedence is respected; each read returns
/// the value of the last write placed before it on its register, or
/// `initial`. Values are compared with timestamps stripped.
pub fn check_linearization(h: &History, lin: &Linearization, initial: &Value) -> Result<(), Violation> {
    check_linearization_with(h, lin, |_| initial.clone())
}

/// As [`check_linearization`], with a per-register initial value.
pub fn check_linearization_with(
    h: &History,
    lin: &Linearization,
    initial: impl Fn(&RegisterId) -> Value,
) -> Result<(), Violation> {
    let ops: BTreeMap<OpId, _> = h.operations().into_iter().map(|o| (o.op_id, o)).collect();
    let mut seen = BTreeSet::new();
    for rec in &lin.ops {
        if !ops.contains_key(&rec.op_id) {
            return Err(Violation::Unknown { op: rec.op_id });
        }
        if !seen.insert(rec.op_id) {
            return Err(Violation::Duplicate { op: rec.op_id });
        }
    }
    if let Some(o) = ops.values().find(|o| o.is_complete() && !seen.contains(&o.op_id)) {
        return Err(Violation::Missing { op: o.op_id });
    }

    // Records in lin are looked up in h so stale copies cannot hide a response.
    let placed: Vec<_> = lin.ops.iter().map(|r| &ops[&r.op_id]).collect();
    for (j, later) in placed.iter().enumerate() {
        for earlier in &placed[..j] {
            if precedes(later, earlier) {
                return Err(Violation::Precedence {
                    first: later.op_id,
                    second: earlier.op_id,
                });
            }
        }
    }

    let mut current: BTreeMap<&RegisterId, (Option<OpId>, Value)> = BTreeMap::new();
    for o in &placed {
        let slot = current
            .entry(&o.register)
            .or_insert_with(|| (None, initial(&o.register)));
        if o.is_write() {
            *slot = (Some(o.op_id), o.argument.clone().unwrap_or(Value::Bottom));
        } else if o.is_read() {
            if let Some(got) = &o.result {
                if got.plain() != slot.1.plain() {
                    return Err(Violation::ReadValue {
                        read: o.op_id,
                        writer: slot.0,
                        got: got.clone(),
                        expected: slot.1.clone(),
                    });
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::test_util::history;
    use crate::types::OpKind;

    fn lin(h: &History, ids: &[u64]) -> Linearization {
        Linearization::from_ids(h, &ids.iter().map(|i| OpId(*i)).collect::<Vec<_>>()).unwrap()
    }

    fn sample() -> History {
        history(&[
            (0, OpKind::Write, Value::Int(1), 1, Some(2)),
            (1, OpKind::Read, Value::Int(1), 3, Some(4)),
            (2, OpKind::Write, Value::Int(2), 5, None),
        ])
    }

    #[test]
    fn real_time_order_is_accepted() {
        let h = sample();
        assert_eq!(check_linearization(&h, &lin(&h, &[1, 2]), &Value::Int(0)), Ok(()));
        assert_eq!(check_linearization(&h, &lin(&h, &[1, 2, 3]), &Value::Int(0)), Ok(()));
    }

    #[test]
    fn swapped_precedence_is_property_two() {
        let h = sample();
        let err = check_linearization(&h, &lin(&h, &[2, 1]), &Value::Int(0)).unwrap_err();
        assert_eq!(err.property(), 2);
    }

    #[test]
    fn read_before_its_write_is_property_three() {
        let h = history(&[
            (0, OpKind::Write, Value::Int(1), 1, Some(4)),
            (1, OpKind::Read, Value::Int(1), 2, Some(3)),
        ]);
        let err = check_linearization(&h, &lin(&h, &[2, 1]), &Value::Int(0)).unwrap_err();
        assert_eq!(err.property(), 3);
        assert!(check_linearization(&h, &lin(&h, &[1, 2]), &Value::Int(0)).is_ok());
    }

    #[test]
    fn missing_completed_op_is_property_one() {
        let h = sample();
        let err = check_linearization(&h, &lin(&h, &[1]), &Value::Int(0)).unwrap_err();
        assert_eq!(err, Violation::Missing { op: OpId(2) });
    }
}
