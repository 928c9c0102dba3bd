//! Online write linearization for histories of [`crate::impl_vector`].
//!
//! Walks the cell-write events in time order. At each one whose writer is not
//! yet placed, every active unplaced write whose `new_ts` snapshot is at most
//! the writer's own is appended as a batch, in increasing snapshot order
//! (ties by process id). Reads are then slotted in behind the write whose
//! tuple they returned.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use crate::timestamp::{vts_compare, LengthMismatch, VectorTimestamp};
use crate::types::{EventKind, History, Linearization, OpId, OpKind, OperationRecord, Value};

/// One batch appended to the write sequence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Batch {
    pub index: usize,
    pub time: u64,
    /// The write whose cell write opened the batch.
    pub trigger: OpId,
    /// Active writes not yet placed at `time`.
    pub candidates: Vec<OpId>,
    pub pts: BTreeMap<OpId, VectorTimestamp>,
    pub members: Vec<OpId>,
}

#[derive(Clone, Debug)]
pub struct FVectorOutput {
    pub lin: Linearization,
    pub batches: Vec<Batch>,
    /// Timestamp each write stored in its cell, for writes that got that far.
    pub write_ts: BTreeMap<OpId, VectorTimestamp>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FVectorError {
    #[error("trace corruption: read {read} returned {value}, which no write produced")]
    UnknownValue { read: OpId, value: Value },
    #[error("trace corruption: cell write at t={time} has no pts snapshot for {op}")]
    MissingPts { time: u64, op: OpId },
    #[error("trace corruption: {0}")]
    Malformed(String),
    #[error(transparent)]
    Timestamp(#[from] LengthMismatch),
}

pub fn f_vector(h: &History) -> Result<Linearization, FVectorError> {
    f_vector_batches(h).map(|o| o.lin)
}

pub fn f_vector_batches(h: &History) -> Result<FVectorOutput, FVectorError> {
    let ops: BTreeMap<OpId, OperationRecord> = h.operations().into_iter().map(|o| (o.op_id, o)).collect();
    let cell_writes: Vec<_> = h
        .events()
        .iter()
        .filter(|e| e.kind == EventKind::Base && e.op_kind == OpKind::Write)
        .collect();

    let mut wseq: Vec<OpId> = Vec::new();
    let mut placed = BTreeSet::new();
    let mut batches = Vec::new();
    let mut write_ts = BTreeMap::new();
    let mut by_tuple: Vec<(Value, OpId)> = Vec::new();

    for e in &cell_writes {
        let ts = e
            .value
            .vector_ts()
            .ok_or_else(|| FVectorError::Malformed(format!("cell write at t={} lacks a vector timestamp", e.time)))?;
        write_ts.insert(e.op_id, ts.clone());
        by_tuple.push((e.value.clone(), e.op_id));
        if placed.contains(&e.op_id) {
            continue;
        }
        let t = e.time;
        let candidates: Vec<OpId> = ops
            .values()
            .filter(|o| {
                o.is_write()
                    && o.invoke_time < t
                    && o.respond_time.is_none_or(|r| r > t)
                    && !placed.contains(&o.op_id)
            })
            .map(|o| o.op_id)
            .collect();
        let snap: BTreeMap<OpId, VectorTimestamp> = e
            .pts
            .as_ref()
            .map(|v| v.iter().map(|p| (p.op_id, p.ts.clone())).collect())
            .unwrap_or_default();
        let mut pts = BTreeMap::new();
        for c in &candidates {
            let p = snap.get(c).ok_or(FVectorError::MissingPts { time: t, op: *c })?;
            pts.insert(*c, p.clone());
        }
        let own = pts
            .get(&e.op_id)
            .cloned()
            .ok_or(FVectorError::MissingPts { time: t, op: e.op_id })?;
        let mut members = Vec::new();
        for c in &candidates {
            if vts_compare(&pts[c], &own)? != Ordering::Greater {
                members.push(*c);
            }
        }
        members.sort_by(|a, b| pts[a].cmp(&pts[b]).then(ops[a].proc.cmp(&ops[b].proc)));
        for m in &members {
            placed.insert(*m);
            wseq.push(*m);
        }
        batches.push(Batch {
            index: batches.len() + 1,
            time: t,
            trigger: e.op_id,
            candidates,
            pts,
            members,
        });
    }

    let mut zero_reads = Vec::new();
    let mut after: BTreeMap<OpId, Vec<&OperationRecord>> = BTreeMap::new();
    for r in ops.values().filter(|o| o.is_read() && o.is_complete()) {
        let v = r.result.as_ref().expect("completed read has a result");
        let ts = v.vector_ts().ok_or_else(|| FVectorError::UnknownValue {
            read: r.op_id,
            value: v.clone(),
        })?;
        if ts.is_zero() {
            zero_reads.push(r);
            continue;
        }
        let w = by_tuple
            .iter()
            .find(|(t, _)| t == v)
            .map(|(_, w)| *w)
            .ok_or_else(|| FVectorError::UnknownValue {
                read: r.op_id,
                value: v.clone(),
            })?;
        after.entry(w).or_default().push(r);
    }
    zero_reads.sort_by_key(|r| r.invoke_time);

    let mut out: Vec<OperationRecord> = zero_reads.into_iter().cloned().collect();
    for w in &wseq {
        out.push(ops[w].clone());
        if let Some(rs) = after.get_mut(w) {
            rs.sort_by_key(|r| r.invoke_time);
            out.extend(rs.iter().map(|r| (*r).clone()));
        }
    }
    Ok(FVectorOutput {
        lin: Linearization::new(out),
        batches,
        write_ts,
    })
}

/// Asserts the batch facts on one run: the trigger's snapshot equals its
/// stored timestamp; other members' snapshots are below it; completed
/// members' timestamps are at most the trigger's; and completed writes of a
/// later batch carry larger timestamps than completed writes of an earlier
/// one.
pub fn check_batch_invariants(h: &History, out: &FVectorOutput) -> Result<(), String> {
    let complete: BTreeSet<OpId> = h
        .operations()
        .into_iter()
        .filter(|o| o.is_write() && o.is_complete())
        .map(|o| o.op_id)
        .collect();
    let ts_of = |w: &OpId| {
        out.write_ts
            .get(w)
            .ok_or_else(|| format!("{w} has no stored timestamp"))
    };
    for b in &out.batches {
        let tw = ts_of(&b.trigger)?;
        if b.members.contains(&b.trigger) && b.pts[&b.trigger] != *tw {
            return Err(format!("batch {}: pts of trigger {} differs from its ts", b.index, b.trigger));
        }
        for m in b.members.iter().filter(|m| **m != b.trigger) {
            if b.pts[m] >= *tw {
                return Err(format!("batch {}: pts({m}) = {} not below ts({}) = {tw}", b.index, b.pts[m], b.trigger));
            }
        }
        for m in b.members.iter().filter(|m| complete.contains(m)) {
            if ts_of(m)? > tw {
                return Err(format!("batch {}: completed {m} has ts above the trigger's", b.index));
            }
        }
    }
    for (i, bi) in out.batches.iter().enumerate() {
        for bj in &out.batches[i + 1..] {
            for w in bi.members.iter().filter(|w| complete.contains(w)) {
                for w2 in bj.members.iter().filter(|w| complete.contains(w)) {
                    if ts_of(w2)? <= ts_of(w)? {
                        return Err(format!(
                            "batches {} and {}: ts({w2}) not above ts({w})",
                            bi.index, bj.index
                        ));
                    }
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::impl_vector::VectorRegister;
    use crate::linearize::check_linearization;
    use crate::registers::RegisterSpec;
    use crate::sim::{run, Action, ProcessProgram, ScriptProgram, ScriptedAdversary, SimConfig, Simulator};

    fn run_script(scripts: Vec<Vec<Action>>, order: &[usize]) -> History {
        let n = scripts.len();
        let progs = scripts
            .into_iter()
            .map(|s| Box::new(ScriptProgram::new(s)) as Box<dyn ProcessProgram>)
            .collect();
        let sim = Simulator::new(
            SimConfig::new(n, 0),
            progs,
            vec![RegisterSpec::mwmr(Box::new(VectorRegister::new("R", n, Value::Int(0))))],
        )
        .unwrap();
        run(sim, &mut ScriptedAdversary::advances(order)).unwrap().history
    }

    #[test]
    fn lone_read_of_initial_value() {
        let h = run_script(vec![vec![Action::Read("R".into())], vec![], vec![]], &[0, 0, 0, 0, 0]);
        let lin = f_vector(&h).unwrap();
        assert_eq!(lin.op_ids(), vec![OpId(1)]);
    }

    #[test]
    fn sequential_writes_keep_order() {
        let w = |v| Action::Write("R".into(), Value::Int(v));
        let h = run_script(vec![vec![w(1)], vec![w(2)], vec![]], &[0; 7].iter().chain(&[1; 7]).copied().collect::<Vec<_>>());
        let out = f_vector_batches(&h).unwrap();
        assert_eq!(out.lin.op_ids(), vec![OpId(1), OpId(2)]);
        assert_eq!(out.batches.len(), 2);
        check_batch_invariants(&h, &out).unwrap();
        assert!(check_linearization(&h, &out.lin, &Value::Int(0)).is_ok());
    }

    #[test]
    fn unknown_read_value_is_corruption() {
        let mut h = run_script(vec![vec![Action::Read("R".into())], vec![]], &[0, 0, 0, 0]);
        let mut evs = h.clone().into_events();
        let last = evs.last_mut().unwrap();
        last.value = Value::Tuple(
            Box::new(Value::Int(7)),
            crate::types::Timestamp::Vector(VectorTimestamp::finite(&[1, 0])),
        );
        h = History::from_events(evs);
        assert!(matches!(f_vector(&h), Err(FVectorError::UnknownValue { .. })));
    }
}
