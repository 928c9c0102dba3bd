//! The n-process game as a step program.
//!
//! Hosts p0 and p1 announce themselves in `R1`, p0 flips a coin into `C`, and
//! then both reset `R2` and check whether every player bumped it. Players
//! clear `R1` and `C`, read `R1` twice and `C` once, and only stay in the
//! game if they saw both hosts' values in the order the coin asks for.
//! Players that stay increment `R2`.

use std::any::Any;

use serde::Serialize;

use crate::sim::{Action, ProcessProgram};
use crate::types::{ProcessId, RegisterId, Value};

pub const R1: &str = "R1";
pub const C: &str = "C";
pub const R2: &str = "R2";

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Host0,
    Host1,
    Player,
}

/// How a process left a round.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RoundDecision {
    Continue,
    /// A player saw ⊥ in `R1` or `C`.
    ExitGuardBottom,
    /// A player saw the hosts' values in the wrong order.
    ExitGuardMismatch,
    /// A host read `R2` below `n - 2`.
    ExitHostLow,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "milestone", rename_all = "snake_case")]
pub enum MilestoneKind {
    EnterRound,
    ReadR1 { which: u8, value: Value },
    ReadC { value: Value },
    /// Passed the ⊥ guard with these locals.
    AtGuard1 { u1: Value, u2: Value, c: Value },
    /// About to reset `R2`.
    Phase2Reset,
    /// Issued the increment of `R2`.
    IncrementInvoked,
    /// p0 issued its write of the coin to `C`.
    WroteC { b: u8 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Milestone {
    pub round: u64,
    pub time: u64,
    #[serde(flatten)]
    pub kind: MilestoneKind,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
enum Pc {
    HostWriteR1,
    HostFlip,
    HostWriteC,
    HostResetR2,
    HostReadR2,
    WriteR1Bottom,
    WriteCBottom,
    ReadU1,
    ReadU2,
    ReadC,
    ResetR2,
    ReadR2,
    IncR2,
    Done,
}

pub struct GameProgram {
    id: ProcessId,
    n: usize,
    bounded: bool,
    round: u64,
    pc: Pc,
    u1: Value,
    u2: Value,
    c: Value,
    v: i64,
    milestones: Vec<Milestone>,
    decisions: Vec<(u64, RoundDecision)>,
}

impl GameProgram {
    /// Program for process `id` of an `n`-process game. Needs `n >= 3`.
    pub fn new(id: ProcessId, n: usize, bounded: bool) -> Result<Self, String> {
        if n < 3 {
            return Err(format!("the game needs at least 3 processes, got {n}"));
        }
        if id.0 >= n {
            return Err(format!("{id} out of range for n = {n}"));
        }
        let pc = if id.0 < 2 { Pc::HostWriteR1 } else { Pc::WriteR1Bottom };
        Ok(GameProgram {
            id,
            n,
            bounded,
            round: 1,
            pc,
            u1: Value::Bottom,
            u2: Value::Bottom,
            c: Value::Bottom,
            v: 0,
            milestones: Vec::new(),
            decisions: Vec::new(),
        })
    }

    pub fn role(&self) -> Role {
        match self.id.0 {
            0 => Role::Host0,
            1 => Role::Host1,
            _ => Role::Player,
        }
    }

    pub fn milestones(&self) -> &[Milestone] {
        &self.milestones
    }

    /// Decision per finished round, in round order.
    pub fn decisions(&self) -> &[(u64, RoundDecision)] {
        &self.decisions
    }

    pub fn is_done(&self) -> bool {
        self.pc == Pc::Done
    }

    /// What host `b` writes to `R1` in the current round.
    pub fn host_value(&self, b: u8) -> Value {
        self.host_value_in(b, self.round)
    }

    pub fn host_value_in(&self, b: u8, round: u64) -> Value {
        if self.bounded {
            Value::Int(b as i64)
        } else {
            Value::Pair(b, round)
        }
    }

    fn mark(&mut self, now: u64, kind: MilestoneKind) {
        self.milestones.push(Milestone {
            round: self.round,
            time: now,
            kind,
        });
    }

    fn decide(&mut self, d: RoundDecision) {
        self.decisions.push((self.round, d));
    }

    fn exit(&mut self, d: RoundDecision) -> Pc {
        self.decide(d);
        Pc::Done
    }

    fn next_round(&mut self, now: u64) {
        self.decide(RoundDecision::Continue);
        self.round += 1;
        self.mark(now, MilestoneKind::EnterRound);
    }

    fn player_guards(&mut self, now: u64) -> Pc {
        if self.u1.is_bottom() || self.u2.is_bottom() || self.c.is_bottom() {
            return self.exit(RoundDecision::ExitGuardBottom);
        }
        self.mark(
            now,
            MilestoneKind::AtGuard1 {
                u1: self.u1.clone(),
                u2: self.u2.clone(),
                c: self.c.clone(),
            },
        );
        let b = match self.c.as_int() {
            Some(b @ (0 | 1)) => b as u8,
            _ => return self.exit(RoundDecision::ExitGuardMismatch),
        };
        if self.u1 != self.host_value(b) || self.u2 != self.host_value(1 - b) {
            return self.exit(RoundDecision::ExitGuardMismatch);
        }
        self.mark(now, MilestoneKind::Phase2Reset);
        Pc::ResetR2
    }

    fn action(&mut self, now: u64) -> Action {
        let reg = |s: &str| RegisterId::new(s);
        match self.pc {
            Pc::HostWriteR1 => Action::Write(reg(R1), self.host_value(self.id.0 as u8)),
            Pc::HostFlip => Action::Flip,
            Pc::HostWriteC => {
                let b = self.c.as_int().unwrap_or(0) as u8;
                self.mark(now, MilestoneKind::WroteC { b });
                Action::Write(reg(C), Value::Int(b as i64))
            }
            Pc::HostResetR2 | Pc::ResetR2 => Action::Write(reg(R2), Value::Int(0)),
            Pc::HostReadR2 | Pc::ReadR2 => Action::Read(reg(R2)),
            Pc::WriteR1Bottom => Action::Write(reg(R1), Value::Bottom),
            Pc::WriteCBottom => Action::Write(reg(C), Value::Bottom),
            Pc::ReadU1 | Pc::ReadU2 => Action::Read(reg(R1)),
            Pc::ReadC => Action::Read(reg(C)),
            Pc::IncR2 => {
                self.mark(now, MilestoneKind::IncrementInvoked);
                Action::Write(reg(R2), Value::Int(self.v + 1))
            }
            Pc::Done => Action::Return,
        }
    }

    /// Consumes the result of the action at `pc` and moves on.
    fn transition(&mut self, result: Value, now: u64) -> Pc {
        match self.pc {
            Pc::HostWriteR1 if self.id.0 == 0 => Pc::HostFlip,
            Pc::HostWriteR1 => Pc::HostResetR2,
            Pc::HostFlip => {
                self.c = result;
                Pc::HostWriteC
            }
            Pc::HostWriteC => Pc::HostResetR2,
            Pc::HostResetR2 => Pc::HostReadR2,
            Pc::HostReadR2 => {
                let v = result.as_int().unwrap_or(0);
                if v < self.n as i64 - 2 {
                    self.exit(RoundDecision::ExitHostLow)
                } else {
                    self.next_round(now);
                    Pc::HostWriteR1
                }
            }
            Pc::WriteR1Bottom => Pc::WriteCBottom,
            Pc::WriteCBottom => Pc::ReadU1,
            Pc::ReadU1 => {
                self.mark(now, MilestoneKind::ReadR1 { which: 1, value: result.clone() });
                self.u1 = result;
                Pc::ReadU2
            }
            Pc::ReadU2 => {
                self.mark(now, MilestoneKind::ReadR1 { which: 2, value: result.clone() });
                self.u2 = result;
                Pc::ReadC
            }
            Pc::ReadC => {
                self.mark(now, MilestoneKind::ReadC { value: result.clone() });
                self.c = result;
                self.player_guards(now)
            }
            Pc::ResetR2 => Pc::ReadR2,
            Pc::ReadR2 => {
                self.v = result.as_int().unwrap_or(0);
                Pc::IncR2
            }
            Pc::IncR2 => {
                self.next_round(now);
                Pc::WriteR1Bottom
            }
            Pc::Done => Pc::Done,
        }
    }
}

impl ProcessProgram for GameProgram {
    fn next_action(&mut self, last: Option<Value>, now: u64) -> Action {
        match last {
            None => self.mark(now, MilestoneKind::EnterRound),
            Some(v) => self.pc = self.transition(v, now),
        }
        self.action(now)
    }

    fn round(&self) -> u64 {
        self.round
    }

    fn as_any(&self) -> &dyn Any {
        self
    }
}
