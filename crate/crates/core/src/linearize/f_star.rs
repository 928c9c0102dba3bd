//! Write linearization for single-writer registers: take any valid
//! linearization and drop a trailing pending write.

use crate::linearize::check::{check_linearization, Violation};
use crate::types::{History, Linearization, OpId, Value};

pub fn f_star(h: &History, base: &Linearization, initial: &Value) -> Result<Linearization, Violation> {
    check_linearization(h, base, initial)?;
    let mut out = base.clone();
    let drop_last = out.ops.last().is_some_and(|last| {
        last.is_write()
            && h
                .operations()
                .iter()
                .any(|o| o.op_id == last.op_id && !o.is_complete())
    });
    if drop_last {
        out.ops.pop();
    }
    Ok(out)
}

/// Checks an `f_star` output: a pending write is present exactly when some
/// read in `lin` takes its value from it, and the writes appear in the order
/// they were invoked.
pub fn check_f_star_claims(h: &History, lin: &Linearization) -> Result<(), String> {
    let ops = h.operations();
    let mut last_write: Option<OpId> = None;
    let mut read_from = std::collections::BTreeSet::new();
    for o in &lin.ops {
        if o.is_write() {
            last_write = Some(o.op_id);
        } else if let Some(w) = last_write {
            read_from.insert(w);
        }
    }
    for w in ops.iter().filter(|o| o.is_write() && !o.is_complete()) {
        let kept = lin.ops.iter().any(|o| o.op_id == w.op_id);
        if kept != read_from.contains(&w.op_id) {
            return Err(format!(
                "pending {} is {} but {}",
                w.op_id,
                if kept { "kept" } else { "dropped" },
                if kept { "no read returns it" } else { "a read returns it" }
            ));
        }
    }
    let starts: Vec<u64> = lin.ops.iter().filter(|o| o.is_write()).map(|o| o.invoke_time).collect();
    if starts.windows(2).any(|w| w[0] >= w[1]) {
        return Err(format!("writes not in start order: {starts:?}"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::test_util::history;
    use crate::types::OpKind;

    fn ids(l: &Linearization) -> Vec<u64> {
        l.op_ids().iter().map(|o| o.0).collect()
    }

    #[test]
    fn trailing_completed_read_is_kept() {
        let h = history(&[
            (0, OpKind::Write, Value::Int(1), 1, Some(2)),
            (1, OpKind::Read, Value::Int(1), 3, Some(4)),
        ]);
        let base = Linearization::from_ids(&h, &[OpId(1), OpId(2)]).unwrap();
        assert_eq!(ids(&f_star(&h, &base, &Value::Int(0)).unwrap()), vec![1, 2]);
    }

    #[test]
    fn unread_pending_write_is_dropped() {
        let h = history(&[
            (0, OpKind::Write, Value::Int(1), 1, Some(2)),
            (1, OpKind::Read, Value::Int(1), 3, Some(4)),
            (0, OpKind::Write, Value::Int(2), 5, None),
        ]);
        let base = Linearization::from_ids(&h, &[OpId(1), OpId(2), OpId(3)]).unwrap();
        let out = f_star(&h, &base, &Value::Int(0)).unwrap();
        assert_eq!(ids(&out), vec![1, 2]);
        check_f_star_claims(&h, &out).unwrap();
    }

    #[test]
    fn read_pending_write_is_retained() {
        let h = history(&[
            (0, OpKind::Write, Value::Int(1), 1, None),
            (1, OpKind::Read, Value::Int(1), 2, Some(3)),
        ]);
        let base = Linearization::from_ids(&h, &[OpId(1), OpId(2)]).unwrap();
        let out = f_star(&h, &base, &Value::Int(0)).unwrap();
        assert_eq!(ids(&out), vec![1, 2]);
        check_f_star_claims(&h, &out).unwrap();
    }

    #[test]
    fn invalid_base_is_rejected() {
        let h = history(&[
            (0, OpKind::Write, Value::Int(1), 1, Some(2)),
            (1, OpKind::Read, Value::Int(1), 3, Some(4)),
        ]);
        let base = Linearization::from_ids(&h, &[OpId(2), OpId(1)]).unwrap();
        assert!(f_star(&h, &base, &Value::Int(0)).is_err());
    }
}
