//! Post-hoc checks of the game's safety facts on a finished run.

use crate::game::program::{GameProgram, MilestoneKind, R2};
use crate::sim::RunResult;
use crate::types::{EventKind, History, OpKind, ProcessId, Value};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("fact {fact} fails for {proc} in round {round}: {detail}")]
pub struct LemmaViolation {
    pub fact: u8,
    pub proc: ProcessId,
    pub round: u64,
    pub detail: String,
}

fn programs(run: &RunResult) -> Vec<&GameProgram> {
    (0..run.programs.len())
        .map(|p| run.program::<GameProgram>(ProcessId(p)).expect("game programs"))
        .collect()
}

/// Time `p` actually invoked the increment it issued at `issued`.
fn increment_invoke(h: &History, p: ProcessId, issued: u64) -> Option<u64> {
    h.events()
        .iter()
        .find(|e| {
            e.kind == EventKind::Invoke
                && e.proc == p
                && e.op_kind == OpKind::Write
                && e.register.as_str() == R2
                && e.time > issued
        })
        .map(|e| e.time)
}

fn enter_time(prog: &GameProgram, round: u64) -> Option<u64> {
    prog.milestones()
        .iter()
        .find(|m| m.round == round && m.kind == MilestoneKind::EnterRound)
        .map(|m| m.time)
}

/// Checks, on every player and round of `run`:
/// 1. reaching the `R2` reset means both host values were read, in coin order;
/// 2. reaching it means both hosts had entered the round;
/// 3. a host entering round j+1 means every player had invoked its round-j increment;
/// 4. at the second guard the player's `c` is what p0 wrote to `C` earlier that round;
/// 5. (unbounded only) at the second guard `u1` and `u2` carry the current round.
pub fn check_lemmas(run: &RunResult, bounded: bool) -> Result<(), LemmaViolation> {
    let progs = programs(run);
    let n = progs.len();
    let fail = |fact, p: usize, round, detail: String| LemmaViolation {
        fact,
        proc: ProcessId(p),
        round,
        detail,
    };

    for p in 2..n {
        let ms = progs[p].milestones();
        for (k, m) in ms.iter().enumerate() {
            match &m.kind {
                MilestoneKind::Phase2Reset => {
                    let guard = ms[..k]
                        .iter()
                        .rev()
                        .find(|g| g.round == m.round && matches!(g.kind, MilestoneKind::AtGuard1 { .. }));
                    let Some(MilestoneKind::AtGuard1 { u1, u2, .. }) = guard.map(|g| &g.kind) else {
                        return Err(fail(1, p, m.round, "no guard milestone".into()));
                    };
                    let ok = (0..2u8).any(|b| *u1 == progs[p].host_value_in(b, m.round) && *u2 == progs[p].host_value_in(1 - b, m.round));
                    if !ok {
                        return Err(fail(1, p, m.round, format!("read {u1} then {u2}")));
                    }
                    for (h, host) in progs.iter().take(2).enumerate() {
                        if !enter_time(host, m.round).is_some_and(|t| t < m.time) {
                            return Err(fail(2, p, m.round, format!("host p{h} had not entered")));
                        }
                    }
                }
                MilestoneKind::AtGuard1 { u1, u2, c } => {
                    let b = match c.as_int() {
                        Some(b @ (0 | 1)) => b as u8,
                        _ => return Err(fail(4, p, m.round, format!("c = {c}"))),
                    };
                    let wrote = progs[0].milestones().iter().any(|w| {
                        w.round == m.round && w.time < m.time && w.kind == MilestoneKind::WroteC { b }
                    });
                    if !wrote {
                        return Err(fail(4, p, m.round, format!("p0 did not write {b} to C this round")));
                    }
                    if !bounded {
                        let tagged = |v: &Value| matches!(v, Value::Pair(_, j) if *j == m.round);
                        if !tagged(u1) || !tagged(u2) {
                            return Err(fail(5, p, m.round, format!("u1 = {u1}, u2 = {u2}")));
                        }
                    }
                }
                _ => {}
            }
        }
    }

    for (h, host) in progs.iter().enumerate().take(2) {
        for m in host.milestones().iter().filter(|m| m.kind == MilestoneKind::EnterRound && m.round > 1) {
            let j = m.round - 1;
            for (p, player) in progs.iter().enumerate().skip(2) {
                let inc = player
                    .milestones()
                    .iter()
                    .find(|x| x.round == j && x.kind == MilestoneKind::IncrementInvoked)
                    .and_then(|x| increment_invoke(&run.history, ProcessId(p), x.time));
                if !inc.is_some_and(|t| t < m.time) {
                    return Err(fail(3, h, m.round, format!("p{p} had not invoked its round-{j} increment")));
                }
            }
        }
    }
    Ok(())
}
