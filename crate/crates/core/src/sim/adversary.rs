use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::coin::{stream_rng, SCHEDULER_STREAM};
use super::{Decision, SimError, Simulator};
use crate::types::ProcessId;

/// A scheduler. `drive` issues decisions until the run ends or it has nothing
/// left to say.
pub trait Adversary {
    fn drive(&mut self, sim: &mut Simulator) -> Result<(), SimError>;
}

/// Advances a uniformly random live process each step.
pub struct RandomAdversary {
    rng: ChaCha8Rng,
}

impl RandomAdversary {
    pub fn new(seed: u64) -> Self {
        RandomAdversary {
            rng: stream_rng(seed, SCHEDULER_STREAM),
        }
    }
}

impl Adversary for RandomAdversary {
    fn drive(&mut self, sim: &mut Simulator) -> Result<(), SimError> {
        while sim.running() {
            let live = sim.live();
            let p = live[self.rng.gen_range(0..live.len())];
            sim.advance(p)?;
        }
        Ok(())
    }
}

/// Replays a recorded decision log.
pub struct ScriptedAdversary {
    decisions: Vec<Decision>,
}

impl ScriptedAdversary {
    pub fn new(decisions: Vec<Decision>) -> Self {
        ScriptedAdversary { decisions }
    }

    /// A script that only advances processes, in the given order.
    pub fn advances(order: &[usize]) -> Self {
        ScriptedAdversary {
            decisions: order
                .iter()
                .map(|&p| Decision::Advance { proc: ProcessId(p) })
                .collect(),
        }
    }
}

impl Adversary for ScriptedAdversary {
    fn drive(&mut self, sim: &mut Simulator) -> Result<(), SimError> {
        for d in self.decisions.drain(..) {
            if !sim.running() {
                break;
            }
            sim.apply(d)?;
        }
        Ok(())
    }
}

/// Advances live processes in index order until the run ends.
pub fn round_robin(sim: &mut Simulator) -> Result<(), SimError> {
    while sim.running() {
        for p in sim.live() {
            sim.advance(p)?;
        }
    }
    Ok(())
}
