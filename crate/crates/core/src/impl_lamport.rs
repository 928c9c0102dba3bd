//! MWMR register from n single-writer cells using Lamport clocks.
//!
//! A write reads every cell (one step each), writes `(v, <max sq + 1, k>)` to
//! its own cell and responds. Reads return the cell with the largest clock.
//! Cell labels and clock pids are 1-based.

use std::any::Any;
use std::collections::BTreeMap;

use crate::registers::RegisterBackend;
use crate::sim::{Adversary, Recorder, ScriptedAdversary, SimConfig, SimError, Simulator};
use crate::timestamp::LamportTimestamp;
use crate::types::{EventKind, History, OpId, OpKind, ProcessId, RegisterId, Timestamp, Value};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LamportValCell {
    pub value: Value,
    pub ts: LamportTimestamp,
}

impl LamportValCell {
    pub fn tuple(&self) -> Value {
        Value::Tuple(Box::new(self.value.clone()), Timestamp::Lamport(self.ts))
    }
}

#[derive(Clone, Debug)]
struct PendingOp {
    proc: ProcessId,
    kind: OpKind,
    arg: Value,
    stage: usize,
    max_sq: u64,
    best: Option<LamportValCell>,
}

pub struct LamportRegister {
    id: RegisterId,
    initial: Value,
    cells: Vec<LamportValCell>,
    ops: BTreeMap<OpId, PendingOp>,
}

impl LamportRegister {
    pub fn new(id: impl Into<RegisterId>, n: usize, initial: Value) -> Self {
        LamportRegister {
            id: id.into(),
            cells: (0..n)
                .map(|i| LamportValCell {
                    value: initial.clone(),
                    ts: LamportTimestamp::new(0, i as u32 + 1),
                })
                .collect(),
            initial,
            ops: BTreeMap::new(),
        }
    }

    pub fn cells(&self) -> &[LamportValCell] {
        &self.cells
    }
}

impl RegisterBackend for LamportRegister {
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
        if proc.0 >= self.cells.len() {
            return Err(SimError::Config(format!("{proc} has no cell in {}", self.id)));
        }
        self.ops.insert(
            op,
            PendingOp {
                proc,
                kind,
                arg,
                stage: 0,
                max_sq: 0,
                best: None,
            },
        );
        Ok(None)
    }

    fn step(&mut self, rec: &mut Recorder, op: OpId) -> Result<Option<Value>, SimError> {
        let n = self.cells.len();
        let o = self
            .ops
            .get_mut(&op)
            .ok_or_else(|| SimError::Config(format!("{op} is not pending")))?;
        let stage = o.stage;
        o.stage += 1;
        if stage < n {
            let cell = self.cells[stage].clone();
            o.max_sq = o.max_sq.max(cell.ts.sq);
            if o.best.as_ref().is_none_or(|b| cell.ts > b.ts) {
                o.best = Some(cell.clone());
            }
            let proc = o.proc;
            rec.record(EventKind::Base, op, proc, &self.id, OpKind::Read, cell.tuple(), Some(stage + 1), None);
            return Ok(None);
        }
        let o = o.clone();
        match (o.kind, stage - n) {
            (OpKind::Write, 0) => {
                let k = o.proc.0;
                self.cells[k] = LamportValCell {
                    value: o.arg.clone(),
                    ts: LamportTimestamp::new(o.max_sq + 1, k as u32 + 1),
                };
                rec.record(
                    EventKind::Base,
                    op,
                    o.proc,
                    &self.id,
                    OpKind::Write,
                    self.cells[k].tuple(),
                    Some(k + 1),
                    None,
                );
                Ok(None)
            }
            (OpKind::Write, _) => {
                self.ops.remove(&op);
                Ok(Some(Value::Bottom))
            }
            _ => {
                self.ops.remove(&op);
                Ok(Some(o.best.expect("n >= 1 cells read").tuple()))
            }
        }
    }

    fn as_any(&self) -> &dyn Any {
        self
    }
}

/// The three histories of the clock-based counterexample: `g` and its two
/// extensions.
#[derive(Clone, Debug)]
pub struct Counterexample {
    pub g: History,
    pub h_case1: History,
    pub h_case2: History,
    /// Cell contents at the end of `g`.
    pub g_cells: Vec<LamportValCell>,
}

pub const CE_V: i64 = 1;
pub const CE_V1: i64 = 2;
pub const CE_V2: i64 = 3;

fn ce_run(third: Vec<crate::sim::Action>, order: &[usize]) -> Result<(History, Vec<LamportValCell>), SimError> {
    use crate::registers::RegisterSpec;
    use crate::sim::{Action, ProcessProgram, ScriptProgram};
    let progs: Vec<Box<dyn ProcessProgram>> = vec![
        Box::new(ScriptProgram::new(vec![Action::Write("R".into(), Value::Int(CE_V))])),
        Box::new(ScriptProgram::new(vec![Action::Write("R".into(), Value::Int(CE_V1))])),
        Box::new(ScriptProgram::new(third)),
    ];
    let mut sim = Simulator::new(
        SimConfig::new(3, 0),
        progs,
        vec![RegisterSpec::mwmr(Box::new(LamportRegister::new("R", 3, Value::Int(0))))],
    )?;
    ScriptedAdversary::advances(order).drive(&mut sim)?;
    let reg: &LamportRegister = sim.register(&"R".into()).unwrap().as_any().downcast_ref().unwrap();
    let cells = reg.cells().to_vec();
    Ok((sim.history().clone(), cells))
}

/// Scripts the counterexample with writers p0, p1, p2 (cells 1, 2, 3).
///
/// In `g`, p0's write has read cells 1 and 2, and p1's write ran to
/// completion. Case 1 lets p0 finish and then p2 reads; case 2 first runs a
/// write by p2, then lets p0 finish, then p2 reads.
pub fn build_counterexample() -> Result<Counterexample, SimError> {
    use crate::sim::Action;
    // p0: invoke, read 1, read 2; p1: invoke, read 1..3, write, respond
    let g_order = [0, 0, 0, 1, 1, 1, 1, 1, 1];
    let rest1 = [0, 0, 0, 2, 2, 2, 2, 2];
    let rest2 = [2, 2, 2, 2, 2, 2, 0, 0, 0, 2, 2, 2, 2, 2];
    let read = vec![Action::Read("R".into())];
    let write_read = vec![Action::Write("R".into(), Value::Int(CE_V2)), Action::Read("R".into())];

    let (g, g_cells) = ce_run(read.clone(), &g_order)?;
    let (h1, _) = ce_run(read, &[&g_order[..], &rest1[..]].concat())?;
    let (h2, _) = ce_run(write_read, &[&g_order[..], &rest2[..]].concat())?;
    Ok(Counterexample {
        g,
        h_case1: h1,
        h_case2: h2,
        g_cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lts(v: i64, sq: u64, pid: u32) -> Value {
        Value::Tuple(Box::new(Value::Int(v)), Timestamp::Lamport(LamportTimestamp::new(sq, pid)))
    }

    fn last_read(h: &History) -> Value {
        h.operations()
            .into_iter()
            .rev()
            .find(|o| o.is_read())
            .and_then(|o| o.result)
            .unwrap()
    }

    fn cell_writes(h: &History) -> Vec<Value> {
        h.events()
            .iter()
            .filter(|e| e.kind == EventKind::Base && e.op_kind == OpKind::Write)
            .map(|e| e.value.clone())
            .collect()
    }

    #[test]
    fn g_ends_with_expected_cells() {
        let ce = build_counterexample().unwrap();
        let got: Vec<Value> = ce.g_cells.iter().map(|c| c.tuple()).collect();
        assert_eq!(got, vec![lts(0, 0, 1), lts(CE_V1, 1, 2), lts(0, 0, 3)]);
        assert!(ce.g.is_prefix_of(&ce.h_case1));
        assert!(ce.g.is_prefix_of(&ce.h_case2));
        let ops = ce.g.operations();
        assert!(!ops[0].is_complete());
        assert!(ops[1].is_complete());
    }

    #[test]
    fn case_one_reads_the_second_write() {
        let ce = build_counterexample().unwrap();
        assert_eq!(cell_writes(&ce.h_case1), vec![lts(CE_V1, 1, 2), lts(CE_V, 1, 1)]);
        assert_eq!(last_read(&ce.h_case1), lts(CE_V1, 1, 2));
    }

    #[test]
    fn case_two_reads_the_first_write() {
        let ce = build_counterexample().unwrap();
        assert_eq!(
            cell_writes(&ce.h_case2),
            vec![lts(CE_V1, 1, 2), lts(CE_V2, 2, 3), lts(CE_V, 3, 1)]
        );
        assert_eq!(last_read(&ce.h_case2), lts(CE_V, 3, 1));
    }

    #[test]
    fn fresh_read_returns_last_cell() {
        let (h, _) = ce_run(vec![crate::sim::Action::Read("R".into())], &[2, 2, 2, 2, 2]).unwrap();
        assert_eq!(last_read(&h), lts(0, 0, 3));
    }
}
