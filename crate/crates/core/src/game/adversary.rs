//! Strong adversaries for the game.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::game::program::R1;
use crate::sim::adversary::round_robin;
use crate::sim::coin::{stream_rng, GUESS_STREAM};
use crate::sim::{Action, Adversary, SimError, Simulator};
use crate::types::{OpId, ProcessId, RegisterId};

/// Invokes `p`'s next register operation without letting it respond. Does
/// nothing on atomic registers, where invocation and response are one step.
pub fn start(sim: &mut Simulator, p: ProcessId) -> Result<(), SimError> {
    if !sim.running() || sim.pending_op(p).is_some() {
        return Ok(());
    }
    match sim.next_action(p).register() {
        Some(r) if !sim.is_atomic(r) => sim.advance(p),
        _ => Ok(()),
    }
}

/// Runs `p`'s current action to its response.
pub fn complete(sim: &mut Simulator, p: ProcessId) -> Result<(), SimError> {
    if !sim.running() {
        return Ok(());
    }
    if sim.pending_op(p).is_none() {
        if *sim.next_action(p) == Action::Return {
            return Ok(());
        }
        sim.advance(p)?;
    }
    while sim.running() && sim.pending_op(p).is_some() {
        sim.advance(p)?;
    }
    Ok(())
}

fn players(n: usize) -> impl Iterator<Item = ProcessId> {
    (2..n).map(ProcessId)
}

/// Resets of `R2` by everyone, the players' increments one after another,
/// then the hosts' reads of `R2`.
pub fn phase2(sim: &mut Simulator) -> Result<(), SimError> {
    let n = sim.n();
    for p in (0..n).map(ProcessId) {
        complete(sim, p)?;
    }
    for p in players(n) {
        complete(sim, p)?;
        complete(sim, p)?;
    }
    complete(sim, ProcessId(0))?;
    complete(sim, ProcessId(1))
}

fn pending(sim: &Simulator, p: ProcessId) -> Result<OpId, SimError> {
    sim.pending_op(p)
        .ok_or_else(|| SimError::Config(format!("expected a pending operation at {p}")))
}

fn last_coin(sim: &Simulator) -> Result<u8, SimError> {
    sim.revealed_coins()
        .last()
        .copied()
        .ok_or_else(|| SimError::Config("no coin revealed".into()))
}

fn stalled(sim: &Simulator, before: u64) -> Result<(), SimError> {
    if sim.running() && sim.steps() == before {
        return Err(SimError::Config("adversary made no progress in a round".into()));
    }
    Ok(())
}

/// Keeps every process in the game forever against adversarially
/// linearizable registers. Each round both host writes to `R1` overlap the
/// players' first reads; once p0's coin is out, the adversary orders the
/// host writes to match it and places the first reads in between.
#[derive(Default)]
pub struct Theorem1Adversary;

impl Theorem1Adversary {
    pub fn new() -> Self {
        Theorem1Adversary
    }

    fn round(&mut self, sim: &mut Simulator) -> Result<(), SimError> {
        let n = sim.n();
        let (p0, p1) = (ProcessId(0), ProcessId(1));
        for p in players(n) {
            complete(sim, p)?;
            complete(sim, p)?;
        }
        start(sim, p0)?;
        start(sim, p1)?;
        for p in players(n) {
            start(sim, p)?;
        }
        if !sim.running() {
            return Ok(());
        }
        let w = [pending(sim, p0)?, pending(sim, p1)?];
        let reads = players(n).map(|p| pending(sim, p)).collect::<Result<Vec<_>, _>>()?;
        complete(sim, p0)?;
        complete(sim, p0)?;
        complete(sim, p0)?;
        complete(sim, p1)?;
        if !sim.running() {
            return Ok(());
        }
        let c = last_coin(sim)? as usize;

        let mut order = vec![w[c]];
        order.extend(&reads);
        order.push(w[1 - c]);
        sim.commit(&RegisterId::new(R1), &order)?;

        for p in players(n) {
            complete(sim, p)?;
        }
        for p in players(n) {
            complete(sim, p)?;
            complete(sim, p)?;
        }
        phase2(sim)
    }
}

impl Adversary for Theorem1Adversary {
    fn drive(&mut self, sim: &mut Simulator) -> Result<(), SimError> {
        while sim.running() {
            let before = sim.steps();
            self.round(sim)?;
            stalled(sim, before)?;
        }
        Ok(())
    }
}

/// The same schedule against registers that fix the write order by the time
/// each write responds. The adversary must pick which host write lands first
/// before the coin is flipped, so it guesses; a wrong guess ends the game.
pub struct Theorem1WslAdversary {
    rng: ChaCha8Rng,
    guesses: Vec<u8>,
}

impl Theorem1WslAdversary {
    pub fn new(seed: u64) -> Self {
        Theorem1WslAdversary {
            rng: stream_rng(seed, GUESS_STREAM),
            guesses: Vec::new(),
        }
    }

    pub fn guesses(&self) -> &[u8] {
        &self.guesses
    }

    fn round(&mut self, sim: &mut Simulator) -> Result<(), SimError> {
        let n = sim.n();
        let g: usize = self.rng.gen_range(0..2);
        self.guesses.push(g as u8);
        let host = [ProcessId(0), ProcessId(1)];
        for p in players(n) {
            complete(sim, p)?;
            complete(sim, p)?;
        }
        start(sim, host[0])?;
        start(sim, host[1])?;
        for p in players(n) {
            start(sim, p)?;
        }
        complete(sim, host[g])?;
        for p in players(n) {
            complete(sim, p)?;
        }
        complete(sim, host[1 - g])?;
        complete(sim, host[0])?;
        complete(sim, host[0])?;
        if !sim.running() {
            return Ok(());
        }
        let c = last_coin(sim)? as usize;
        if c != g {
            return round_robin(sim);
        }
        for p in players(n) {
            complete(sim, p)?;
            complete(sim, p)?;
        }
        phase2(sim)
    }
}

impl Adversary for Theorem1WslAdversary {
    fn drive(&mut self, sim: &mut Simulator) -> Result<(), SimError> {
        while sim.running() {
            let before = sim.steps();
            self.round(sim)?;
            stalled(sim, before)?;
        }
        Ok(())
    }
}
