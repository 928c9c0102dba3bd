//! MWMR register from n single-writer cells using incrementally built vector
//! timestamps.
//!
//! Each cell access is its own simulator step. A write takes `n + 3` steps
//! after its invocation: `n` cell reads that fill `new_ts` left to right, the
//! write of its own cell, the reset of `new_ts` to all-infinite, and the
//! response. A read takes `n` cell reads and the response.
//!
//! Every cell write is recorded together with the `new_ts` of each active
//! writer at that moment (the `pts` field), which is what the online write
//! linearization needs.

use std::any::Any;
use std::collections::BTreeMap;

use crate::registers::RegisterBackend;
use crate::sim::{Recorder, SimError};
use crate::timestamp::{TsEntry, VectorTimestamp};
use crate::types::{EventKind, OpId, OpKind, PendingTs, ProcessId, RegisterId, Timestamp, Value};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValCell {
    pub value: Value,
    pub ts: VectorTimestamp,
}

impl ValCell {
    pub fn tuple(&self) -> Value {
        Value::Tuple(Box::new(self.value.clone()), Timestamp::Vector(self.ts.clone()))
    }
}

#[derive(Clone, Debug)]
struct PendingOp {
    proc: ProcessId,
    kind: OpKind,
    arg: Value,
    stage: usize,
    best: Option<ValCell>,
}

pub struct VectorRegister {
    id: RegisterId,
    initial: Value,
    cells: Vec<ValCell>,
    new_ts: Vec<VectorTimestamp>,
    ops: BTreeMap<OpId, PendingOp>,
}

impl VectorRegister {
    pub fn new(id: impl Into<RegisterId>, n: usize, initial: Value) -> Self {
        VectorRegister {
            id: id.into(),
            cells: vec![
                ValCell {
                    value: initial.clone(),
                    ts: VectorTimestamp::zeros(n),
                };
                n
            ],
            initial,
            new_ts: vec![VectorTimestamp::infinite(n); n],
            ops: BTreeMap::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.cells.len()
    }

    pub fn cells(&self) -> &[ValCell] {
        &self.cells
    }

    /// The writer-local `new_ts` of process `p`.
    pub fn new_ts(&self, p: ProcessId) -> &VectorTimestamp {
        &self.new_ts[p.0]
    }

    fn snapshot(&self) -> Vec<PendingTs> {
        self.ops
            .iter()
            .filter(|(_, o)| o.kind == OpKind::Write)
            .map(|(id, o)| PendingTs {
                op_id: *id,
                ts: self.new_ts[o.proc.0].clone(),
            })
            .collect()
    }
}

impl RegisterBackend for VectorRegister {
    fn id(&self) -> &RegisterId {
        &self.id
    }

    fn initial(&self) -> &Value {
        &self.initial
    }

    fn invoke(
        &mut self,
        _rec: &mut Recorder,
        op: OpId,
        proc: ProcessId,
        kind: OpKind,
        arg: Value,
    ) -> Result<Option<Value>, SimError> {
        if proc.0 >= self.n() {
            return Err(SimError::Config(format!("{proc} has no cell in {}", self.id)));
        }
        self.ops.insert(
            op,
            PendingOp {
                proc,
                kind,
                arg,
                stage: 0,
                best: None,
            },
        );
        Ok(None)
    }

    fn step(&mut self, rec: &mut Recorder, op: OpId) -> Result<Option<Value>, SimError> {
        let n = self.n();
        let o = self.ops.get(&op).cloned().ok_or_else(|| {
            SimError::Config(format!("{op} is not pending on {}", self.id))
        })?;
        let k = o.proc.0;
        let stage = o.stage;
        self.ops.get_mut(&op).unwrap().stage += 1;

        if stage < n {
            let cell = self.cells[stage].clone();
            rec.record(EventKind::Base, op, o.proc, &self.id, OpKind::Read, cell.tuple(), Some(stage + 1), None);
            match o.kind {
                OpKind::Write => {
                    let mut e = cell.ts.get(stage);
                    if stage == k {
                        e = match e {
                            TsEntry::Fin(x) => TsEntry::Fin(x + 1),
                            TsEntry::Inf => unreachable!("cells hold complete timestamps"),
                        };
                    }
                    self.new_ts[k].set(stage, e);
                }
                _ => {
                    let slot = &mut self.ops.get_mut(&op).unwrap().best;
                    if slot.as_ref().is_none_or(|b| cell.ts > b.ts) {
                        *slot = Some(cell);
                    }
                }
            }
            return Ok(None);
        }

        match (o.kind, stage - n) {
            (OpKind::Write, 0) => {
                self.cells[k] = ValCell {
                    value: o.arg.clone(),
                    ts: self.new_ts[k].clone(),
                };
                let pts = self.snapshot();
                rec.record(
                    EventKind::Base,
                    op,
                    o.proc,
                    &self.id,
                    OpKind::Write,
                    self.cells[k].tuple(),
                    Some(k + 1),
                    Some(pts),
                );
                Ok(None)
            }
            (OpKind::Write, 1) => {
                self.new_ts[k] = VectorTimestamp::infinite(n);
                Ok(None)
            }
            (OpKind::Write, _) => {
                self.ops.remove(&op);
                Ok(Some(Value::Bottom))
            }
            _ => {
                let best = self.ops.remove(&op).unwrap().best.expect("n >= 1 cells read");
                Ok(Some(best.tuple()))
            }
        }
    }

    fn as_any(&self) -> &dyn Any {
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::registers::RegisterSpec;
    use crate::sim::{run, Action, ProcessProgram, ScriptProgram, ScriptedAdversary, SimConfig, Simulator};
    use crate::timestamp::vts_compare;
    use std::cmp::Ordering;

    fn build(scripts: Vec<Vec<Action>>) -> Simulator {
        let n = scripts.len();
        let progs = scripts
            .into_iter()
            .map(|s| Box::new(ScriptProgram::new(s)) as Box<dyn ProcessProgram>)
            .collect();
        Simulator::new(
            SimConfig::new(n, 0),
            progs,
            vec![RegisterSpec::mwmr(Box::new(VectorRegister::new("R", n, Value::Int(0))))],
        )
        .unwrap()
    }

    fn cell_ts(s: &Simulator, i: usize) -> VectorTimestamp {
        let reg: &VectorRegister = s.register(&"R".into()).unwrap().as_any().downcast_ref().unwrap();
        reg.cells()[i].ts.clone()
    }

    fn w(v: i64) -> Action {
        Action::Write("R".into(), Value::Int(v))
    }

    #[test]
    fn solo_writes_increment_own_entry() {
        let mut s = build(vec![vec![w(5), w(6)], vec![], vec![]]);
        for _ in 0..7 {
            s.advance(ProcessId(0)).unwrap();
        }
        assert_eq!(cell_ts(&s, 0), VectorTimestamp::finite(&[1, 0, 0]));
        for _ in 0..7 {
            s.advance(ProcessId(0)).unwrap();
        }
        assert_eq!(cell_ts(&s, 0), VectorTimestamp::finite(&[2, 0, 0]));
    }

    #[test]
    fn fresh_read_returns_initial_tuple() {
        let s = build(vec![vec![Action::Read("R".into())], vec![]]);
        let res = run(s, &mut ScriptedAdversary::advances(&[0, 0, 0, 0])).unwrap();
        let r = &res.history.operations()[0];
        assert_eq!(
            r.result,
            Some(Value::Tuple(
                Box::new(Value::Int(0)),
                Timestamp::Vector(VectorTimestamp::zeros(2))
            ))
        );
    }

    #[test]
    fn read_after_solo_write() {
        let s = build(vec![vec![w(5)], vec![], vec![Action::Read("R".into())]]);
        let res = run(s, &mut ScriptedAdversary::advances(&[0, 0, 0, 0, 0, 0, 0, 2, 2, 2, 2, 2])).unwrap();
        let r = res.history.operations().into_iter().find(|o| o.is_read()).unwrap();
        assert_eq!(
            r.result,
            Some(Value::Tuple(
                Box::new(Value::Int(5)),
                Timestamp::Vector(VectorTimestamp::finite(&[1, 0, 0]))
            ))
        );
    }

    #[test]
    fn new_ts_fills_left_to_right_and_resets() {
        let mut s = build(vec![vec![], vec![w(1)], vec![]]);
        let p = ProcessId(1);
        let reg = |s: &Simulator| -> VectorTimestamp {
            let r: &VectorRegister = s.register(&"R".into()).unwrap().as_any().downcast_ref().unwrap();
            r.new_ts(p).clone()
        };
        s.advance(p).unwrap();
        assert_eq!(reg(&s), VectorTimestamp::infinite(3));
        let mut prev = reg(&s);
        for _ in 0..3 {
            s.advance(p).unwrap();
            let cur = reg(&s);
            assert_ne!(vts_compare(&cur, &prev).unwrap(), Ordering::Greater);
            prev = cur;
        }
        assert_eq!(prev, VectorTimestamp::finite(&[0, 1, 0]));
        s.advance(p).unwrap(); // cell write
        s.advance(p).unwrap(); // reset
        assert_eq!(reg(&s), VectorTimestamp::infinite(3));
    }
}
