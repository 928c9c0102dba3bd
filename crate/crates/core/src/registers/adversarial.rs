//! Registers whose linearization order is chosen by the adversary.
//!
//! The register keeps an append-only commit log: the prefix of its
//! linearization the adversary has fixed so far. Committing an operation
//! first commits every operation that precedes it in real time, so the log is
//! always a valid linearization of the operations it contains. Any decision
//! that cannot be appended consistently is a monitor violation.
//!
//! In `Lin` mode completed writes may stay uncommitted ("floating") until
//! something forces them, which lets the adversary order them after seeing
//! later coin flips. In `Wsl` mode a write is committed no later than its
//! response.

use std::any::Any;
use std::collections::BTreeMap;

use super::RegisterBackend;
use crate::sim::{Recorder, SimError};
use crate::types::{History, Linearization, OpId, OpKind, ProcessId, RegisterId, Value};

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum CommitMode {
    Lin,
    Wsl,
}

#[derive(Clone, Debug)]
struct OpInfo {
    kind: OpKind,
    arg: Value,
    invoke: u64,
    respond: Option<u64>,
    result: Option<Value>,
    committed: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommitEntry {
    pub op: OpId,
    pub time: u64,
}

pub struct AdversarialRegister {
    id: RegisterId,
    initial: Value,
    mode: CommitMode,
    current: Value,
    ops: BTreeMap<OpId, OpInfo>,
    log: Vec<CommitEntry>,
}

impl AdversarialRegister {
    pub fn new(id: impl Into<RegisterId>, initial: Value, mode: CommitMode) -> Self {
        AdversarialRegister {
            id: id.into(),
            current: initial.clone(),
            initial,
            mode,
            ops: BTreeMap::new(),
            log: Vec::new(),
        }
    }

    pub fn mode(&self) -> CommitMode {
        self.mode
    }

    pub fn log(&self) -> &[CommitEntry] {
        &self.log
    }

    pub fn committed_writes(&self) -> Vec<OpId> {
        self.log
            .iter()
            .filter(|e| self.ops[&e.op].kind == OpKind::Write)
            .map(|e| e.op)
            .collect()
    }

    pub fn is_committed(&self, op: OpId) -> bool {
        self.ops.get(&op).is_some_and(|o| o.committed.is_some())
    }

    fn violation(&self, reason: String) -> SimError {
        SimError::Monitor {
            register: self.id.clone(),
            reason,
        }
    }

    /// Commits `x` after first committing every uncommitted operation that
    /// completed before `x` was invoked.
    fn commit_one(&mut self, x: OpId, now: u64) -> Result<(), SimError> {
        if self.is_committed(x) {
            return Ok(());
        }
        let inv = self.ops[&x].invoke;
        let mut forced: Vec<(u64, OpId)> = self
            .ops
            .iter()
            .filter(|(id, o)| **id != x && o.committed.is_none() && o.respond.is_some_and(|r| r < inv))
            .map(|(id, o)| (o.respond.unwrap(), *id))
            .collect();
        forced.sort();
        for (_, y) in forced {
            self.append(y, now)?;
        }
        self.append(x, now)
    }

    fn append(&mut self, x: OpId, now: u64) -> Result<(), SimError> {
        let info = &self.ops[&x];
        if let Some(r) = info.respond {
            if let Some(e) = self.log.iter().find(|e| self.ops[&e.op].invoke > r) {
                return Err(self.violation(format!(
                    "{x} precedes already committed {} but would follow it",
                    e.op
                )));
            }
        }
        let idx = self.log.len();
        let info = self.ops.get_mut(&x).unwrap();
        match info.kind {
            OpKind::Read => info.result = Some(self.current.clone()),
            _ => self.current = info.arg.clone(),
        }
        info.committed = Some(idx);
        self.log.push(CommitEntry { op: x, time: now });
        Ok(())
    }

    /// The linearization the register stands behind at time `t`: the log as
    /// of `t`, followed in `Lin` mode by floating writes completed by `t`.
    pub fn linearization_at(&self, history: &History, t: u64) -> Linearization {
        let mut ids: Vec<OpId> = self.log.iter().filter(|e| e.time <= t).map(|e| e.op).collect();
        let mut floating: Vec<(u64, OpId)> = self
            .ops
            .iter()
            .filter(|(id, o)| {
                o.kind == OpKind::Write
                    && o.respond.is_some_and(|r| r <= t)
                    && !ids.contains(id)
            })
            .map(|(id, o)| (o.respond.unwrap(), *id))
            .collect();
        floating.sort();
        ids.extend(floating.into_iter().map(|(_, id)| id));
        let g = history.prefix(t).project(&self.id);
        Linearization::from_ids(&g, &ids).expect("log only holds invoked operations")
    }
}

impl RegisterBackend for AdversarialRegister {
    fn id(&self) -> &RegisterId {
        &self.id
    }

    fn initial(&self) -> &Value {
        &self.initial
    }

    fn invoke(
        &mut self,
        rec: &mut Recorder,
        op: OpId,
        _proc: ProcessId,
        kind: OpKind,
        arg: Value,
    ) -> Result<Option<Value>, SimError> {
        self.ops.insert(
            op,
            OpInfo {
                kind,
                arg,
                invoke: rec.now(),
                respond: None,
                result: None,
                committed: None,
            },
        );
        Ok(None)
    }

    fn step(&mut self, rec: &mut Recorder, op: OpId) -> Result<Option<Value>, SimError> {
        let t = rec.next_time();
        let now = rec.now();
        let kind = self.ops[&op].kind;
        if kind == OpKind::Read || self.mode == CommitMode::Wsl {
            self.commit_one(op, now)?;
        }
        let info = self.ops.get_mut(&op).unwrap();
        info.respond = Some(t);
        Ok(Some(match kind {
            OpKind::Read => info.result.clone().unwrap(),
            _ => Value::Bottom,
        }))
    }

    fn commit(&mut self, ops: &[OpId], now: u64) -> Result<(), SimError> {
        let mut last_old: Option<usize> = None;
        let mut seen_new = false;
        for op in ops {
            let Some(info) = self.ops.get(op) else {
                return Err(self.violation(format!("{op} was never invoked on {}", self.id)));
            };
            match info.committed {
                Some(idx) => {
                    if seen_new || last_old.is_some_and(|l| idx < l) {
                        return Err(self.violation(format!("retroactive reorder of committed {op}")));
                    }
                    last_old = Some(idx);
                }
                None => seen_new = true,
            }
        }
        for op in ops {
            self.commit_one(*op, now)?;
        }
        Ok(())
    }

    fn choose_read(&mut self, op: OpId, value: &Value, now: u64) -> Result<(), SimError> {
        match self.ops.get(&op) {
            Some(o) if o.kind == OpKind::Read && o.committed.is_none() && o.respond.is_none() => {}
            _ => return Err(self.violation(format!("{op} is not an uncommitted pending read"))),
        }
        // Operations that must precede the read go first; then, if needed, a
        // write carrying the requested value.
        let inv = self.ops[&op].invoke;
        let mut forced: Vec<(u64, OpId)> = self
            .ops
            .iter()
            .filter(|(_, o)| o.committed.is_none() && o.respond.is_some_and(|r| r < inv))
            .map(|(id, o)| (o.respond.unwrap(), *id))
            .collect();
        forced.sort();
        for (_, y) in forced {
            self.append(y, now)?;
        }
        if self.current.plain() != value.plain() {
            let w = self
                .ops
                .iter()
                .find(|(_, o)| o.kind == OpKind::Write && o.committed.is_none() && o.arg.plain() == value.plain())
                .map(|(id, _)| *id)
                .ok_or_else(|| self.violation(format!("no uncommitted write of {value} for {op}")))?;
            self.commit_one(w, now)?;
        }
        self.commit_one(op, now)
    }

    fn as_any(&self) -> &dyn Any {
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linearize::check_linearization;
    use crate::sim::{Action, ProcessProgram, ScriptProgram, SimConfig, Simulator};
    use crate::registers::RegisterSpec;

    fn sim(mode: CommitMode, scripts: Vec<Vec<Action>>) -> Simulator {
        let n = scripts.len();
        let progs = scripts
            .into_iter()
            .map(|s| Box::new(ScriptProgram::new(s)) as Box<dyn ProcessProgram>)
            .collect();
        Simulator::new(
            SimConfig::new(n, 0),
            progs,
            vec![RegisterSpec::mwmr(Box::new(AdversarialRegister::new("R1", Value::Bottom, mode)))],
        )
        .unwrap()
    }

    fn w(v: Value) -> Action {
        Action::Write("R1".into(), v)
    }

    fn r() -> Action {
        Action::Read("R1".into())
    }

    fn p(i: usize) -> ProcessId {
        ProcessId(i)
    }

    fn reg(s: &Simulator) -> &AdversarialRegister {
        s.register(&"R1".into()).unwrap().as_any().downcast_ref().unwrap()
    }

    #[test]
    fn lin_mode_orders_completed_writes_retroactively() {
        // Hosts write [0,1] and [1,1]; a player reads concurrently. After both
        // writes complete the adversary puts [0,1] first and the read between.
        let mut s = sim(
            CommitMode::Lin,
            vec![vec![w(Value::Pair(0, 1))], vec![w(Value::Pair(1, 1))], vec![r(), r()]],
        );
        s.advance(p(0)).unwrap();
        s.advance(p(1)).unwrap();
        s.advance(p(2)).unwrap();
        let (w0, w1, rd) = (s.pending_op(p(0)).unwrap(), s.pending_op(p(1)).unwrap(), s.pending_op(p(2)).unwrap());
        s.advance(p(0)).unwrap();
        s.advance(p(1)).unwrap();
        s.commit(&"R1".into(), &[w0, rd, w1]).unwrap();
        s.advance(p(2)).unwrap();
        s.advance(p(2)).unwrap();
        s.advance(p(2)).unwrap();
        let ops = s.history().operations();
        let reads: Vec<_> = ops.iter().filter(|o| o.is_read()).map(|o| o.result.clone().unwrap()).collect();
        assert_eq!(reads, vec![Value::Pair(0, 1), Value::Pair(1, 1)]);
        let lin = reg(&s).linearization_at(s.history(), s.now());
        assert!(check_linearization(s.history(), &lin, &Value::Bottom).is_ok());
    }

    #[test]
    fn wsl_mode_rejects_retroactive_reorder() {
        let mut s = sim(CommitMode::Wsl, vec![vec![w(Value::Int(1))], vec![w(Value::Int(2))]]);
        s.advance(p(0)).unwrap();
        s.advance(p(1)).unwrap();
        let (a, b) = (s.pending_op(p(0)).unwrap(), s.pending_op(p(1)).unwrap());
        s.advance(p(0)).unwrap();
        assert_eq!(reg(&s).committed_writes(), vec![a]);
        let err = s.commit(&"R1".into(), &[b, a]).unwrap_err();
        assert!(matches!(err, SimError::Monitor { .. }));
    }

    #[test]
    fn commit_pulls_in_operations_that_precede() {
        let mut s = sim(CommitMode::Lin, vec![vec![w(Value::Int(1))], vec![w(Value::Int(2))]]);
        s.advance(p(0)).unwrap();
        let a = s.pending_op(p(0)).unwrap();
        s.advance(p(0)).unwrap();
        s.advance(p(1)).unwrap();
        let b = s.pending_op(p(1)).unwrap();
        s.commit(&"R1".into(), &[b]).unwrap();
        // a completed before b started, so commit_one(b) pulled a in first
        assert_eq!(reg(&s).committed_writes(), vec![a, b]);
    }

    #[test]
    fn choose_read_commits_the_write_it_needs() {
        let mut s = sim(CommitMode::Wsl, vec![vec![w(Value::Int(7))], vec![r()]]);
        s.advance(p(0)).unwrap();
        s.advance(p(1)).unwrap();
        let rd = s.pending_op(p(1)).unwrap();
        s.choose_read_value(rd, Value::Int(7)).unwrap();
        s.advance(p(1)).unwrap();
        let ops = s.history().operations();
        assert_eq!(ops[1].result, Some(Value::Int(7)));
        assert!(s.choose_read_value(rd, Value::Int(3)).is_err());
    }

    #[test]
    fn commit_log_only_grows() {
        let mut s = sim(
            CommitMode::Lin,
            vec![vec![w(Value::Int(1)), r()], vec![w(Value::Int(2)), r()], vec![r(), r()]],
        );
        let mut snapshots: Vec<Vec<CommitEntry>> = Vec::new();
        let order = [0, 1, 2, 0, 2, 1, 0, 2, 1, 0, 1, 2, 2, 2];
        for i in order {
            if !s.is_returned(p(i)) {
                s.advance(p(i)).unwrap();
            }
            snapshots.push(reg(&s).log().to_vec());
        }
        for pair in snapshots.windows(2) {
            assert!(pair[1].starts_with(&pair[0]));
        }
    }
}
