//! Deterministic step-by-step scheduler for process programs.
//!
//! An adversary drives the run by issuing [`Decision`]s. Each `Advance` is one
//! simulator step of the chosen process: a base register action, a coin flip,
//! or `return`. Local computation between shared actions is folded into the
//! step that produced the preceding result.

use std::any::Any;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::registers::{RegisterBackend, RegisterSpec};
use crate::types::{Event, EventKind, History, OpId, OpKind, PendingTs, ProcessId, RegisterId, Value};

pub mod adversary;
pub mod coin;

pub use adversary::{Adversary, RandomAdversary, ScriptedAdversary};
pub use coin::CoinStream;

pub const DEFAULT_MAX_STEPS: u64 = 1_000_000;

/// The register used to label coin events.
pub const COIN_REGISTER: &str = "coin";

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Action {
    Read(RegisterId),
    Write(RegisterId, Value),
    Flip,
    Return,
}

impl Action {
    pub fn register(&self) -> Option<&RegisterId> {
        match self {
            Action::Read(r) | Action::Write(r, _) => Some(r),
            _ => None,
        }
    }
}

/// A sequential process. `next_action` receives the plain result of the
/// previous action (`Bottom` for write acknowledgements, the bit for flips) and
/// the current time, and returns the next shared action.
pub trait ProcessProgram: Send + Any {
    fn next_action(&mut self, last: Option<Value>, now: u64) -> Action;

    /// Current round, for programs that have one.
    fn round(&self) -> u64 {
        0
    }

    fn as_any(&self) -> &dyn Any;
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "decision", rename_all = "snake_case")]
pub enum Decision {
    Advance { proc: ProcessId },
    Commit { register: RegisterId, ops: Vec<OpId> },
    ChooseReadValue { op: OpId, value: Value },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    AllReturned,
    StepBudgetExhausted,
    RoundCapReached,
    /// The adversary stopped issuing decisions before the run ended.
    Halted,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::AllReturned => "all_returned",
            Outcome::StepBudgetExhausted => "step_budget_exhausted",
            Outcome::RoundCapReached => "round_cap",
            Outcome::Halted => "halted",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SimError {
    #[error("illegal decision {index}: {reason}")]
    IllegalDecision { index: usize, reason: String },
    #[error("monitor violation on {register}: {reason}")]
    Monitor { register: RegisterId, reason: String },
    #[error("configuration fault: {0}")]
    Config(String),
    #[error("replay diverged at event {index}")]
    ReplayDivergence { index: usize },
}

/// Assigns global times and collects events.
#[derive(Debug, Default)]
pub struct Recorder {
    history: History,
    clock: u64,
}

impl Recorder {
    /// Time of the most recent event, 0 before the first.
    pub fn now(&self) -> u64 {
        self.clock
    }

    pub fn next_time(&self) -> u64 {
        self.clock + 1
    }

    #[allow(clippy::too_many_arguments)]
    pub fn record(
        &mut self,
        kind: EventKind,
        op_id: OpId,
        proc: ProcessId,
        register: &RegisterId,
        op_kind: OpKind,
        value: Value,
        cell: Option<usize>,
        pts: Option<Vec<PendingTs>>,
    ) -> u64 {
        self.clock += 1;
        self.history.push(Event {
            kind,
            op_id,
            proc,
            register: register.clone(),
            op_kind,
            value,
            time: self.clock,
            cell,
            pts,
        });
        self.clock
    }

    pub fn history(&self) -> &History {
        &self.history
    }
}

#[derive(Copy, Clone, Debug)]
pub struct SimConfig {
    pub n: usize,
    pub seed: u64,
    pub max_steps: u64,
    /// Stop once any process enters a round beyond this.
    pub max_rounds: Option<u64>,
}

impl SimConfig {
    pub fn new(n: usize, seed: u64) -> Self {
        SimConfig {
            n,
            seed,
            max_steps: DEFAULT_MAX_STEPS,
            max_rounds: None,
        }
    }
}

struct Slot {
    program: Box<dyn ProcessProgram>,
    next: Action,
    pending: Option<(OpId, RegisterId, OpKind)>,
    returned: bool,
    max_round: u64,
}

pub struct Simulator {
    config: SimConfig,
    procs: Vec<Slot>,
    registers: BTreeMap<RegisterId, Box<dyn RegisterBackend>>,
    writers: BTreeMap<RegisterId, ProcessId>,
    op_register: BTreeMap<OpId, RegisterId>,
    rec: Recorder,
    coins: CoinStream,
    revealed: Vec<u8>,
    steps: u64,
    next_op: u64,
    decisions: Vec<Decision>,
    status: Option<Outcome>,
}

/// Everything a finished run leaves behind.
pub struct RunResult {
    pub history: History,
    pub outcome: Outcome,
    pub steps: u64,
    pub rounds_per_proc: Vec<u64>,
    pub decisions: Vec<Decision>,
    pub coins: Vec<u8>,
    pub programs: Vec<Box<dyn ProcessProgram>>,
    pub registers: BTreeMap<RegisterId, Box<dyn RegisterBackend>>,
}

impl RunResult {
    pub fn program<T: 'static>(&self, p: ProcessId) -> Option<&T> {
        self.programs.get(p.0)?.as_any().downcast_ref::<T>()
    }

    pub fn register<T: 'static>(&self, r: &RegisterId) -> Option<&T> {
        self.registers.get(r)?.as_any().downcast_ref::<T>()
    }
}

impl Simulator {
    pub fn new(
        config: SimConfig,
        programs: Vec<Box<dyn ProcessProgram>>,
        registers: Vec<RegisterSpec>,
    ) -> Result<Self, SimError> {
        if config.n == 0 || programs.len() != config.n {
            return Err(SimError::Config(format!(
                "expected {} programs, got {}",
                config.n,
                programs.len()
            )));
        }
        let mut regs = BTreeMap::new();
        let mut writers = BTreeMap::new();
        for spec in registers {
            let id = spec.backend.id().clone();
            if let Some(w) = spec.writer {
                if w.0 >= config.n {
                    return Err(SimError::Config(format!("writer {w} of {id} out of range")));
                }
                writers.insert(id.clone(), w);
            }
            if regs.insert(id.clone(), spec.backend).is_some() {
                return Err(SimError::Config(format!("duplicate register {id}")));
            }
        }
        let procs = programs
            .into_iter()
            .map(|mut program| {
                let next = program.next_action(None, 0);
                let max_round = program.round();
                Slot {
                    program,
                    next,
                    pending: None,
                    returned: false,
                    max_round,
                }
            })
            .collect::<Vec<_>>();
        for (i, slot) in procs.iter().enumerate() {
            if let Some(r) = slot.next.register() {
                if !regs.contains_key(r) {
                    return Err(SimError::Config(format!("p{i} references unknown register {r}")));
                }
            }
        }
        let mut sim = Simulator {
            coins: CoinStream::new(config.seed),
            config,
            procs,
            registers: regs,
            writers,
            op_register: BTreeMap::new(),
            rec: Recorder::default(),
            revealed: Vec::new(),
            steps: 0,
            next_op: 0,
            decisions: Vec::new(),
            status: None,
        };
        sim.check_round_cap();
        Ok(sim)
    }

    pub fn n(&self) -> usize {
        self.config.n
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn running(&self) -> bool {
        self.status.is_none()
    }

    pub fn status(&self) -> Option<Outcome> {
        self.status
    }

    pub fn history(&self) -> &History {
        self.rec.history()
    }

    pub fn now(&self) -> u64 {
        self.rec.now()
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn decisions(&self) -> &[Decision] {
        &self.decisions
    }

    /// Coin outcomes of flips already executed.
    pub fn revealed_coins(&self) -> &[u8] {
        &self.revealed
    }

    pub fn next_action(&self, p: ProcessId) -> &Action {
        &self.procs[p.0].next
    }

    pub fn pending_op(&self, p: ProcessId) -> Option<OpId> {
        self.procs[p.0].pending.as_ref().map(|(op, _, _)| *op)
    }

    pub fn is_returned(&self, p: ProcessId) -> bool {
        self.procs[p.0].returned
    }

    pub fn all_returned(&self) -> bool {
        self.procs.iter().all(|s| s.returned)
    }

    pub fn round_of(&self, p: ProcessId) -> u64 {
        self.procs[p.0].program.round()
    }

    pub fn program(&self, p: ProcessId) -> &dyn ProcessProgram {
        self.procs[p.0].program.as_ref()
    }

    pub fn register(&self, r: &RegisterId) -> Option<&dyn RegisterBackend> {
        self.registers.get(r).map(|b| b.as_ref())
    }

    pub fn is_atomic(&self, r: &RegisterId) -> bool {
        self.registers.get(r).is_some_and(|b| b.is_atomic())
    }

    /// Pending operations on `r`, by process index.
    pub fn pending_ops_on(&self, r: &RegisterId) -> Vec<(ProcessId, OpId)> {
        self.procs
            .iter()
            .enumerate()
            .filter_map(|(i, s)| match &s.pending {
                Some((op, reg, _)) if reg == r => Some((ProcessId(i), *op)),
                _ => None,
            })
            .collect()
    }

    /// Processes that have not returned.
    pub fn live(&self) -> Vec<ProcessId> {
        (0..self.config.n)
            .map(ProcessId)
            .filter(|p| !self.procs[p.0].returned)
            .collect()
    }

    fn illegal(&self, reason: String) -> SimError {
        SimError::IllegalDecision {
            index: self.decisions.len() - 1,
            reason,
        }
    }

    fn check_round_cap(&mut self) {
        if let Some(cap) = self.config.max_rounds {
            if self.status.is_none() && self.procs.iter().any(|s| s.program.round() > cap) {
                self.status = Some(Outcome::RoundCapReached);
            }
        }
    }

    fn after_result(&mut self, p: usize, result: Value) {
        let now = self.rec.now();
        let slot = &mut self.procs[p];
        slot.next = slot.program.next_action(Some(result), now);
        slot.max_round = slot.max_round.max(slot.program.round());
        self.check_round_cap();
    }

    fn respond(&mut self, p: usize, op: OpId, register: RegisterId, kind: OpKind, value: Value) {
        self.rec.record(
            EventKind::Respond,
            op,
            ProcessId(p),
            &register,
            kind,
            value.clone(),
            None,
            None,
        );
        self.procs[p].pending = None;
        self.after_result(p, value.plain().clone());
    }

    /// Executes one step of process `p`. A no-op once the run has ended.
    pub fn apply(&mut self, d: Decision) -> Result<(), SimError> {
        match d {
            Decision::Advance { proc } => self.advance(proc),
            Decision::Commit { register, ops } => self.commit(&register, &ops),
            Decision::ChooseReadValue { op, value } => self.choose_read_value(op, value),
        }
    }

    pub fn advance(&mut self, proc: ProcessId) -> Result<(), SimError> {
        if self.status.is_some() {
            return Ok(());
        }
        if self.steps >= self.config.max_steps {
            self.status = Some(Outcome::StepBudgetExhausted);
            return Ok(());
        }
        self.decisions.push(Decision::Advance { proc });
        let p = proc.0;
        if p >= self.config.n {
            return Err(self.illegal(format!("no process {proc}")));
        }
        if self.procs[p].returned {
            return Err(self.illegal(format!("{proc} has returned")));
        }
        self.steps += 1;

        if let Some((op, register, kind)) = self.procs[p].pending.clone() {
            let backend = self.registers.get_mut(&register).expect("pending op on known register");
            if let Some(v) = backend.step(&mut self.rec, op)? {
                self.respond(p, op, register, kind, v);
            }
            return Ok(());
        }

        match self.procs[p].next.clone() {
            Action::Read(register) => self.invoke(p, register, OpKind::Read, Value::Bottom),
            Action::Write(register, v) => self.invoke(p, register, OpKind::Write, v),
            Action::Flip => {
                let bit = self.coins.flip();
                self.revealed.push(bit);
                let op = self.fresh_op();
                self.rec.record(
                    EventKind::Coin,
                    op,
                    proc,
                    &RegisterId::new(COIN_REGISTER),
                    OpKind::Flip,
                    Value::Int(bit.into()),
                    None,
                    None,
                );
                self.after_result(p, Value::Int(bit.into()));
                Ok(())
            }
            Action::Return => {
                self.procs[p].returned = true;
                if self.all_returned() {
                    self.status = Some(Outcome::AllReturned);
                }
                Ok(())
            }
        }
    }

    fn fresh_op(&mut self) -> OpId {
        self.next_op += 1;
        OpId(self.next_op)
    }

    fn invoke(&mut self, p: usize, register: RegisterId, kind: OpKind, arg: Value) -> Result<(), SimError> {
        let proc = ProcessId(p);
        if !self.registers.contains_key(&register) {
            return Err(SimError::Config(format!("{proc} references unknown register {register}")));
        }
        if kind == OpKind::Write {
            if let Some(w) = self.writers.get(&register) {
                if *w != proc {
                    return Err(SimError::Config(format!(
                        "{proc} writes single-writer register {register} owned by {w}"
                    )));
                }
            }
        }
        let op = self.fresh_op();
        self.op_register.insert(op, register.clone());
        self.rec
            .record(EventKind::Invoke, op, proc, &register, kind, arg.clone(), None, None);
        let backend = self.registers.get_mut(&register).unwrap();
        match backend.invoke(&mut self.rec, op, proc, kind, arg)? {
            Some(v) => self.respond(p, op, register, kind, v),
            None => self.procs[p].pending = Some((op, register, kind)),
        }
        Ok(())
    }

    pub fn commit(&mut self, register: &RegisterId, ops: &[OpId]) -> Result<(), SimError> {
        if self.status.is_some() {
            return Ok(());
        }
        self.decisions.push(Decision::Commit {
            register: register.clone(),
            ops: ops.to_vec(),
        });
        let now = self.rec.now();
        match self.registers.get_mut(register) {
            Some(b) => b.commit(ops, now),
            None => Err(self.illegal(format!("no register {register}"))),
        }
    }

    pub fn choose_read_value(&mut self, op: OpId, value: Value) -> Result<(), SimError> {
        if self.status.is_some() {
            return Ok(());
        }
        self.decisions.push(Decision::ChooseReadValue {
            op,
            value: value.clone(),
        });
        let now = self.rec.now();
        let Some(register) = self.op_register.get(&op).cloned() else {
            return Err(self.illegal(format!("unknown operation {op}")));
        };
        self.registers.get_mut(&register).unwrap().choose_read(op, &value, now)
    }

    pub fn finish(self) -> RunResult {
        let outcome = self.status.unwrap_or(if self.all_returned() {
            Outcome::AllReturned
        } else {
            Outcome::Halted
        });
        RunResult {
            history: self.rec.history,
            outcome,
            steps: self.steps,
            rounds_per_proc: self.procs.iter().map(|s| s.max_round).collect(),
            decisions: self.decisions,
            coins: self.revealed,
            programs: self.procs.into_iter().map(|s| s.program).collect(),
            registers: self.registers,
        }
    }
}

/// Runs `sim` under `adversary` to completion.
pub fn run(mut sim: Simulator, adversary: &mut dyn Adversary) -> Result<RunResult, SimError> {
    adversary.drive(&mut sim)?;
    Ok(sim.finish())
}

/// Re-runs a configuration and checks it reproduces `expected` event for event.
pub fn replay(
    expected: &History,
    build: impl FnOnce() -> Result<RunResult, SimError>,
) -> Result<History, SimError> {
    let got = build()?.history;
    let (a, b) = (expected.events(), got.events());
    if let Some(index) = (0..a.len().max(b.len())).find(|&i| a.get(i) != b.get(i)) {
        return Err(SimError::ReplayDivergence { index });
    }
    Ok(got)
}

/// A program that performs a fixed list of actions and then returns.
#[derive(Clone, Debug)]
pub struct ScriptProgram {
    actions: Vec<Action>,
    cursor: usize,
    pub results: Vec<Value>,
}

impl ScriptProgram {
    pub fn new(actions: Vec<Action>) -> Self {
        ScriptProgram {
            actions,
            cursor: 0,
            results: Vec::new(),
        }
    }
}

impl ProcessProgram for ScriptProgram {
    fn next_action(&mut self, last: Option<Value>, _now: u64) -> Action {
        if let Some(v) = last {
            self.results.push(v);
        }
        let a = self.actions.get(self.cursor).cloned().unwrap_or(Action::Return);
        self.cursor += 1;
        a
    }

    fn as_any(&self) -> &dyn Any {
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::registers::AtomicRegister;

    fn single_writer_reader() -> Simulator {
        let prog = ScriptProgram::new(vec![
            Action::Write("X".into(), Value::Int(4)),
            Action::Read("X".into()),
        ]);
        Simulator::new(
            SimConfig::new(1, 1),
            vec![Box::new(prog)],
            vec![RegisterSpec::mwmr(Box::new(AtomicRegister::new("X", Value::Int(0))))],
        )
        .unwrap()
    }

    #[test]
    fn write_then_read_on_atomic_register() {
        let res = run(single_writer_reader(), &mut RandomAdversary::new(1)).unwrap();
        assert_eq!(res.outcome, Outcome::AllReturned);
        assert_eq!(res.history.len(), 4);
        let ops = res.history.operations();
        assert_eq!(ops[1].result, Some(Value::Int(4)));
        assert!(res.history.well_formed().is_ok());
    }

    #[test]
    fn advancing_a_returned_process_is_a_fault() {
        let mut sim = single_writer_reader();
        for _ in 0..3 {
            sim.advance(ProcessId(0)).unwrap();
        }
        // finished: status is set, so further decisions are ignored
        assert_eq!(sim.status(), Some(Outcome::AllReturned));

        let prog = ScriptProgram::new(vec![]);
        let other = ScriptProgram::new(vec![Action::Read("X".into())]);
        let mut sim = Simulator::new(
            SimConfig::new(2, 1),
            vec![Box::new(prog), Box::new(other)],
            vec![RegisterSpec::mwmr(Box::new(AtomicRegister::new("X", Value::Int(0))))],
        )
        .unwrap();
        sim.advance(ProcessId(0)).unwrap();
        let err = sim.advance(ProcessId(0)).unwrap_err();
        assert!(matches!(err, SimError::IllegalDecision { index: 1, .. }));
    }

    #[test]
    fn second_writer_on_swmr_register_is_rejected() {
        let w = ScriptProgram::new(vec![Action::Write("V".into(), Value::Int(1))]);
        let mut sim = Simulator::new(
            SimConfig::new(2, 0),
            vec![Box::new(ScriptProgram::new(vec![])), Box::new(w)],
            vec![RegisterSpec::swmr(
                Box::new(AtomicRegister::new("V", Value::Int(0))),
                ProcessId(0),
            )],
        )
        .unwrap();
        assert!(matches!(sim.advance(ProcessId(1)), Err(SimError::Config(_))));
    }

    #[test]
    fn step_budget_stops_the_run() {
        let prog = ScriptProgram::new(vec![Action::Flip; 50]);
        let mut cfg = SimConfig::new(1, 3);
        cfg.max_steps = 10;
        let sim = Simulator::new(cfg, vec![Box::new(prog)], vec![]).unwrap();
        let res = run(sim, &mut RandomAdversary::new(3)).unwrap();
        assert_eq!(res.outcome, Outcome::StepBudgetExhausted);
        assert_eq!(res.steps, 10);
        assert_eq!(res.coins.len(), 10);
    }

    #[test]
    fn coins_are_revealed_only_after_the_flip() {
        let prog = ScriptProgram::new(vec![Action::Flip, Action::Flip]);
        let mut sim = Simulator::new(SimConfig::new(1, 9), vec![Box::new(prog)], vec![]).unwrap();
        assert!(sim.revealed_coins().is_empty());
        sim.advance(ProcessId(0)).unwrap();
        assert_eq!(sim.revealed_coins().len(), 1);
        let coin_events = sim
            .history()
            .events()
            .iter()
            .filter(|e| e.kind == EventKind::Coin)
            .count();
        assert_eq!(coin_events, 1);
    }

    #[test]
    fn replay_reports_first_divergence() {
        let build = |seed| {
            let progs: Vec<Box<dyn ProcessProgram>> = (0..2)
                .map(|i| {
                    Box::new(ScriptProgram::new(vec![
                        Action::Write("X".into(), Value::Int(i)),
                        Action::Flip,
                        Action::Read("X".into()),
                    ])) as Box<dyn ProcessProgram>
                })
                .collect();
            let sim = Simulator::new(
                SimConfig::new(2, seed),
                progs,
                vec![RegisterSpec::mwmr(Box::new(AtomicRegister::new("X", Value::Int(0))))],
            )
            .unwrap();
            run(sim, &mut RandomAdversary::new(seed))
        };
        let h = build(5).unwrap().history;
        assert_eq!(replay(&h, || build(5)).unwrap(), h);
        let other = (6..100)
            .find(|s| build(*s).unwrap().history != h)
            .expect("some seed differs");
        assert!(matches!(
            replay(&h, || build(other)),
            Err(SimError::ReplayDivergence { .. })
        ));
    }
}
