//! Exhaustive linearizability search for one register.
//!
//! Candidates are the completed operations plus the pending writes; pending
//! reads are left out. The search places one enabled operation at a time
//! (everything that precedes it already placed, and for reads, the current
//! value equal to the returned one) and memoizes dead states by the set of
//! placed operations and the current value.

use std::collections::{HashMap, HashSet};

use crate::types::{precedes, History, Linearization, OpId, OperationRecord, RegisterId, Value};

pub const DEFAULT_MAX_OPS: usize = 9;
/// Upper limit accepted by [`check_linearizable_with`].
pub const HARD_MAX_OPS: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("{ops} candidate operations exceed the oracle bound of {max}")]
    TooLarge { ops: usize, max: usize },
    #[error("history spans several registers ({0:?}); project it first")]
    MultiRegister(Vec<RegisterId>),
}

/// Whether pending writes not needed by any read are kept.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum PendingWrites {
    Minimal,
    /// Unneeded pending writes are appended at the end.
    Maximal,
}

struct Instance {
    ops: Vec<OperationRecord>,
    /// Completed operations, which every linearization must contain.
    must: u64,
    writes: u64,
    pred: Vec<u64>,
    /// Interned plain value written (writes) or returned (reads).
    val: Vec<usize>,
    initial: usize,
}

impl Instance {
    fn build(h: &History, initial: &Value, max_ops: usize) -> Result<Self, OracleError> {
        let mut regs = h.registers();
        regs.dedup();
        if regs.len() > 1 {
            return Err(OracleError::MultiRegister(regs));
        }
        let mut ops: Vec<OperationRecord> = h
            .operations()
            .into_iter()
            .filter(|o| o.is_complete() || o.is_write())
            .collect();
        // completed operations first, so pending writes only get placed when needed
        ops.sort_by_key(|o| (!o.is_complete(), o.invoke_time, o.op_id));
        let max = max_ops.min(HARD_MAX_OPS);
        if ops.len() > max {
            return Err(OracleError::TooLarge { ops: ops.len(), max });
        }
        let mut table: HashMap<Value, usize> = HashMap::new();
        let mut intern = |v: &Value| {
            let k = table.len();
            *table.entry(v.plain().clone()).or_insert(k)
        };
        let initial_id = intern(initial);
        let mut val = Vec::with_capacity(ops.len());
        let (mut must, mut writes) = (0u64, 0u64);
        for (i, o) in ops.iter().enumerate() {
            if o.is_complete() {
                must |= 1 << i;
            }
            if o.is_write() {
                writes |= 1 << i;
                val.push(intern(o.argument.as_ref().unwrap_or(&Value::Bottom)));
            } else {
                val.push(intern(o.result.as_ref().unwrap_or(&Value::Bottom)));
            }
        }
        let pred = ops
            .iter()
            .map(|b| {
                ops.iter()
                    .enumerate()
                    .filter(|(_, a)| precedes(a, b))
                    .fold(0u64, |m, (i, _)| m | (1 << i))
            })
            .collect();
        Ok(Instance {
            ops,
            must,
            writes,
            pred,
            val,
            initial: initial_id,
        })
    }

    fn enabled(&self, mask: u64, cur: usize, i: usize) -> bool {
        mask & (1 << i) == 0
            && self.pred[i] & !mask == 0
            && (self.writes & (1 << i) != 0 || self.val[i] == cur)
    }

    fn next_value(&self, cur: usize, i: usize) -> usize {
        if self.writes & (1 << i) != 0 {
            self.val[i]
        } else {
            cur
        }
    }

    fn to_lin(&self, order: &[usize]) -> Linearization {
        Linearization::new(order.iter().map(|&i| self.ops[i].clone()).collect())
    }
}

struct Search<'a> {
    inst: &'a Instance,
    dead: HashSet<(u64, usize)>,
    order: Vec<usize>,
    /// Required leading write sequence, as instance indices.
    write_prefix: Vec<usize>,
}

impl Search<'_> {
    fn dfs(&mut self, mask: u64, cur: usize) -> bool {
        let placed_writes = (mask & self.inst.writes).count_ones() as usize;
        if mask & self.inst.must == self.inst.must && placed_writes >= self.write_prefix.len() {
            return true;
        }
        if self.dead.contains(&(mask, cur)) {
            return false;
        }
        for i in 0..self.inst.ops.len() {
            if !self.inst.enabled(mask, cur, i) {
                continue;
            }
            if self.inst.writes & (1 << i) != 0
                && placed_writes < self.write_prefix.len()
                && self.write_prefix[placed_writes] != i
            {
                continue;
            }
            self.order.push(i);
            if self.dfs(mask | (1 << i), self.inst.next_value(cur, i)) {
                return true;
            }
            self.order.pop();
        }
        self.dead.insert((mask, cur));
        false
    }
}

/// Some valid linearization of `h`, or `None` if none exists. Refuses
/// histories with more than [`DEFAULT_MAX_OPS`] candidate operations.
pub fn check_linearizable(h: &History, initial: &Value) -> Result<Option<Linearization>, OracleError> {
    check_linearizable_with(h, initial, DEFAULT_MAX_OPS, PendingWrites::Minimal)
}

pub fn check_linearizable_with(
    h: &History,
    initial: &Value,
    max_ops: usize,
    pending: PendingWrites,
) -> Result<Option<Linearization>, OracleError> {
    let inst = Instance::build(h, initial, max_ops)?;
    let mut s = Search {
        inst: &inst,
        dead: HashSet::new(),
        order: Vec::new(),
        write_prefix: Vec::new(),
    };
    if !s.dfs(0, inst.initial) {
        return Ok(None);
    }
    let mut order = s.order;
    if pending == PendingWrites::Maximal {
        let mask = order.iter().fold(0u64, |m, &i| m | (1 << i));
        order.extend((0..inst.ops.len()).filter(|i| mask & (1 << i) == 0 && inst.writes & (1 << i) != 0));
    }
    Ok(Some(inst.to_lin(&order)))
}

/// A valid linearization of `h` whose write sequence starts with `prefix`,
/// if one exists. Unknown ids in `prefix` make the answer `None`.
pub fn linearize_with_write_prefix(
    h: &History,
    initial: &Value,
    prefix: &[OpId],
    max_ops: usize,
) -> Result<Option<Linearization>, OracleError> {
    let inst = Instance::build(h, initial, max_ops)?;
    let mut idx = Vec::with_capacity(prefix.len());
    for id in prefix {
        match inst.ops.iter().position(|o| o.op_id == *id && o.is_write()) {
            Some(i) => idx.push(i),
            None => return Ok(None),
        }
    }
    let mut s = Search {
        inst: &inst,
        dead: HashSet::new(),
        order: Vec::new(),
        write_prefix: idx,
    };
    Ok(s.dfs(0, inst.initial).then(|| inst.to_lin(&s.order)))
}

/// Every valid linearization of `h`, including each admissible subset and
/// placement of pending writes.
pub fn enumerate_linearizations(
    h: &History,
    initial: &Value,
    max_ops: usize,
) -> Result<Vec<Linearization>, OracleError> {
    let inst = Instance::build(h, initial, max_ops)?;
    let mut out = Vec::new();
    let mut order = Vec::new();
    enumerate(&inst, 0, inst.initial, &mut order, &mut out);
    Ok(out)
}

fn enumerate(inst: &Instance, mask: u64, cur: usize, order: &mut Vec<usize>, out: &mut Vec<Linearization>) {
    if mask & inst.must == inst.must {
        out.push(inst.to_lin(order));
    }
    for i in 0..inst.ops.len() {
        if inst.enabled(mask, cur, i) {
            order.push(i);
            enumerate(inst, mask | (1 << i), inst.next_value(cur, i), order, out);
            order.pop();
        }
    }
}

/// Replays `order` against the oracle's own rules. Independent of
/// [`super::check_linearization`].
pub fn oracle_accepts(h: &History, initial: &Value, order: &[OpId], max_ops: usize) -> Result<bool, OracleError> {
    let inst = Instance::build(h, initial, max_ops)?;
    let (mut mask, mut cur) = (0u64, inst.initial);
    for id in order {
        let Some(i) = inst.ops.iter().position(|o| o.op_id == *id) else {
            return Ok(false);
        };
        if !inst.enabled(mask, cur, i) {
            return Ok(false);
        }
        mask |= 1 << i;
        cur = inst.next_value(cur, i);
    }
    Ok(mask & inst.must == inst.must)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linearize::check_linearization;
    use crate::types::test_util::history;
    use crate::types::OpKind;

    #[test]
    fn sequential_history_gets_real_time_order() {
        let h = history(&[
            (0, OpKind::Write, Value::Int(1), 1, Some(2)),
            (1, OpKind::Read, Value::Int(1), 3, Some(4)),
            (0, OpKind::Write, Value::Int(2), 5, Some(6)),
            (1, OpKind::Read, Value::Int(2), 7, Some(8)),
        ]);
        let lin = check_linearizable(&h, &Value::Int(0)).unwrap().unwrap();
        assert_eq!(lin.op_ids(), vec![OpId(1), OpId(2), OpId(3), OpId(4)]);
    }

    #[test]
    fn unwritten_value_has_no_linearization() {
        let h = history(&[
            (0, OpKind::Write, Value::Int(1), 1, Some(2)),
            (1, OpKind::Read, Value::Int(9), 3, Some(4)),
        ]);
        assert_eq!(check_linearizable(&h, &Value::Int(0)).unwrap(), None);
    }

    #[test]
    fn new_old_inversion_is_rejected() {
        // r1 sees the new value, then r2 (strictly later) sees the old one.
        let h = history(&[
            (0, OpKind::Write, Value::Int(1), 1, Some(10)),
            (1, OpKind::Read, Value::Int(1), 2, Some(3)),
            (2, OpKind::Read, Value::Int(0), 4, Some(5)),
        ]);
        assert_eq!(check_linearizable(&h, &Value::Int(0)).unwrap(), None);
    }

    #[test]
    fn pending_write_may_be_read() {
        let h = history(&[
            (0, OpKind::Write, Value::Int(1), 1, None),
            (1, OpKind::Read, Value::Int(1), 2, Some(3)),
        ]);
        let lin = check_linearizable(&h, &Value::Int(0)).unwrap().unwrap();
        assert_eq!(lin.op_ids(), vec![OpId(1), OpId(2)]);
    }

    #[test]
    fn size_bound_is_explicit() {
        let ops: Vec<_> = (0..10)
            .map(|i| (0, OpKind::Write, Value::Int(i), 2 * i as u64 + 1, Some(2 * i as u64 + 2)))
            .collect();
        let h = history(&ops);
        assert_eq!(
            check_linearizable(&h, &Value::Int(0)),
            Err(OracleError::TooLarge { ops: 10, max: 9 })
        );
        assert!(check_linearizable_with(&h, &Value::Int(0), 10, PendingWrites::Minimal)
            .unwrap()
            .is_some());
    }

    #[test]
    fn enumeration_agrees_with_checker() {
        let h = history(&[
            (0, OpKind::Write, Value::Int(1), 1, Some(6)),
            (1, OpKind::Write, Value::Int(2), 2, Some(5)),
            (2, OpKind::Read, Value::Int(2), 3, Some(7)),
            (2, OpKind::Write, Value::Int(3), 8, None),
        ]);
        let all = enumerate_linearizations(&h, &Value::Int(0), 9).unwrap();
        assert!(!all.is_empty());
        for l in &all {
            assert!(check_linearization(&h, l, &Value::Int(0)).is_ok());
            assert!(oracle_accepts(&h, &Value::Int(0), &l.op_ids(), 9).unwrap());
        }
        // brute force over all orderings of all subsets agrees on the count
        let ops = h.operations();
        let mut count = 0;
        let ids: Vec<OpId> = ops.iter().map(|o| o.op_id).collect();
        for subset in 0u32..(1 << ids.len()) {
            let chosen: Vec<OpId> = (0..ids.len()).filter(|i| subset & (1 << i) != 0).map(|i| ids[i]).collect();
            permute(&chosen, &mut Vec::new(), &mut |perm| {
                let l = Linearization::from_ids(&h, perm).unwrap();
                if check_linearization(&h, &l, &Value::Int(0)).is_ok() {
                    count += 1;
                }
            });
        }
        assert_eq!(count, all.len());
    }

    fn permute(rest: &[OpId], acc: &mut Vec<OpId>, f: &mut dyn FnMut(&[OpId])) {
        if rest.is_empty() {
            f(acc);
            return;
        }
        for i in 0..rest.len() {
            let mut r = rest.to_vec();
            let x = r.remove(i);
            acc.push(x);
            permute(&r, acc, f);
            acc.pop();
        }
    }

    #[test]
    fn write_prefix_constraint() {
        let h = history(&[
            (0, OpKind::Write, Value::Int(1), 1, Some(4)),
            (1, OpKind::Write, Value::Int(2), 2, Some(3)),
            (2, OpKind::Read, Value::Int(1), 5, Some(6)),
        ]);
        assert!(linearize_with_write_prefix(&h, &Value::Int(0), &[OpId(2)], 9).unwrap().is_some());
        assert!(linearize_with_write_prefix(&h, &Value::Int(0), &[OpId(1)], 9).unwrap().is_none());
    }
}
