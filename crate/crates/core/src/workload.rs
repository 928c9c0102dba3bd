//! Seeded random workloads on a single register `R`.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::game::BackendKind;
use crate::registers::RegisterSpec;
use crate::sim::coin::{stream_rng, WORKLOAD_STREAM};
use crate::sim::{run, Action, ProcessProgram, RandomAdversary, ScriptProgram, SimConfig, SimError, Simulator};
use crate::types::{History, ProcessId, RegisterId, Value};

pub const WORKLOAD_REGISTER: &str = "R";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WorkloadSpec {
    pub n: usize,
    pub max_ops: usize,
    /// `Some(p)` makes `p` the only writer.
    pub writer: Option<ProcessId>,
    /// Cut the history at a random event so some operations stay pending.
    pub truncate: bool,
}

impl WorkloadSpec {
    pub fn mwmr(n: usize, max_ops: usize) -> Self {
        WorkloadSpec {
            n,
            max_ops,
            writer: None,
            truncate: false,
        }
    }

    pub fn swmr(readers: usize, max_ops: usize) -> Self {
        WorkloadSpec {
            n: readers + 1,
            max_ops,
            writer: Some(ProcessId(0)),
            truncate: true,
        }
    }
}

/// Per-process scripts: between 1 and `max_ops` operations spread over the
/// processes, writes carrying distinct values 1, 2, ...
pub fn random_scripts(spec: &WorkloadSpec, seed: u64) -> Vec<Vec<Action>> {
    let mut rng = stream_rng(seed, WORKLOAD_STREAM);
    let reg = RegisterId::new(WORKLOAD_REGISTER);
    let total = rng.gen_range(1..=spec.max_ops);
    let mut scripts = vec![Vec::new(); spec.n];
    let mut next_value = 1;
    for _ in 0..total {
        let p = rng.gen_range(0..spec.n);
        let may_write = spec.writer.is_none_or(|w| w.0 == p);
        let must_write = spec.writer.is_some_and(|w| w.0 == p);
        if must_write || (may_write && rng.gen_bool(0.5)) {
            scripts[p].push(Action::Write(reg.clone(), Value::Int(next_value)));
            next_value += 1;
        } else {
            scripts[p].push(Action::Read(reg.clone()));
        }
    }
    scripts
}

/// Runs a random workload on `backend` under a random interleaving.
pub fn random_history(backend: BackendKind, spec: &WorkloadSpec, seed: u64) -> Result<History, SimError> {
    let scripts = random_scripts(spec, seed);
    let programs: Vec<Box<dyn ProcessProgram>> = scripts
        .into_iter()
        .map(|s| Box::new(ScriptProgram::new(s)) as Box<dyn ProcessProgram>)
        .collect();
    let backend = backend.build(WORKLOAD_REGISTER, spec.n, Value::Int(0));
    let reg = match spec.writer {
        Some(w) => RegisterSpec::swmr(backend, w),
        None => RegisterSpec::mwmr(backend),
    };
    let sim = Simulator::new(SimConfig::new(spec.n, seed), programs, vec![reg])?;
    let h = run(sim, &mut RandomAdversary::new(seed))?.history;
    if !spec.truncate || h.is_empty() {
        return Ok(h);
    }
    let mut rng = stream_rng(seed ^ 0x5eed, WORKLOAD_STREAM);
    let mut cuts: Vec<usize> = (1..=h.len()).collect();
    cuts.shuffle(&mut rng);
    Ok(h.truncate_events(cuts[0]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn swmr_scripts_have_one_writer() {
        for seed in 0..50 {
            let s = random_scripts(&WorkloadSpec::swmr(3, 8), seed);
            for (p, script) in s.iter().enumerate() {
                let writes = script.iter().any(|a| matches!(a, Action::Write(..)));
                assert!(p == 0 || !writes);
            }
        }
    }

    #[test]
    fn histories_are_deterministic() {
        let spec = WorkloadSpec::mwmr(3, 6);
        let a = random_history(BackendKind::Alg2, &spec, 9).unwrap();
        let b = random_history(BackendKind::Alg2, &spec, 9).unwrap();
        assert_eq!(a, b);
        assert!(a.well_formed().is_ok());
    }
}
