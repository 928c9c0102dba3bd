//! Reference traces regenerated from fixed scripts and seeds.

use std::path::Path;

use crate::game::{run_game, AdversaryKind, BackendKind, GameConfig};
use crate::impl_lamport::build_counterexample;
use crate::impl_vector::VectorRegister;
use crate::registers::RegisterSpec;
use crate::sim::coin::seed_with_first_coin;
use crate::sim::{run, Action, ProcessProgram, ScriptProgram, ScriptedAdversary, SimConfig, SimError, Simulator};
use crate::trace::{history_to_jsonl, write_file, TraceError};
use crate::types::{History, Value};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Golden {
    pub file: &'static str,
    pub content: String,
}

#[derive(Debug, thiserror::Error)]
pub enum GoldenError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error("{file}: missing ({reason})")]
    Missing { file: String, reason: String },
    #[error("{file}: first difference at line {line}")]
    Differs { file: String, line: usize },
}

/// One round of the lin-adv game with n = 3 whose coin comes up `bit`.
pub fn theorem1_round(bit: u8) -> Result<History, SimError> {
    let mut cfg = GameConfig::new(3, seed_with_first_coin(bit, 0), BackendKind::LinAdv, AdversaryKind::Theorem1);
    cfg.max_rounds = Some(1);
    Ok(run_game(&cfg)?.result.history)
}

/// Three overlapping writes on a three-process vector register, then a read.
///
/// p0 stalls after its first cell read, p2 after its second; p1 writes to
/// completion, p2 finishes and reads, and only then does p0 finish. The
/// cell timestamps come out as p2 < p1 < p0.
pub fn three_writer_scenario() -> Result<History, SimError> {
    let w = |v| Action::Write("R".into(), Value::Int(v));
    let progs: Vec<Box<dyn ProcessProgram>> = vec![
        Box::new(ScriptProgram::new(vec![w(1)])),
        Box::new(ScriptProgram::new(vec![w(2)])),
        Box::new(ScriptProgram::new(vec![w(3), Action::Read("R".into())])),
    ];
    let sim = Simulator::new(
        SimConfig::new(3, 0),
        progs,
        vec![RegisterSpec::mwmr(Box::new(VectorRegister::new("R", 3, Value::Int(0))))],
    )?;
    let order: Vec<usize> = [
        &[0, 0][..],
        &[2, 2, 2],
        &[1; 7],
        &[2; 4],
        &[2; 5],
        &[0; 5],
    ]
    .concat();
    Ok(run(sim, &mut ScriptedAdversary::advances(&order))?.history)
}

pub fn generate() -> Result<Vec<Golden>, SimError> {
    let ce = build_counterexample()?;
    let g = |file, h: &History| Golden {
        file,
        content: history_to_jsonl(h),
    };
    Ok(vec![
        g("theorem1_n3_coin0.jsonl", &theorem1_round(0)?),
        g("theorem1_n3_coin1.jsonl", &theorem1_round(1)?),
        g("figure4_G.jsonl", &ce.g),
        g("figure4_H_case1.jsonl", &ce.h_case1),
        g("figure4_H_case2.jsonl", &ce.h_case2),
        g("figure3.jsonl", &three_writer_scenario()?),
    ])
}

pub fn write_all(dir: &Path) -> Result<Vec<Golden>, GoldenError> {
    std::fs::create_dir_all(dir).map_err(|e| GoldenError::Missing {
        file: dir.display().to_string(),
        reason: e.to_string(),
    })?;
    let all = generate()?;
    for gd in &all {
        write_file(&dir.join(gd.file), &gd.content)?;
    }
    Ok(all)
}

/// Regenerates every golden and compares it byte for byte with `dir`.
pub fn check_all(dir: &Path) -> Result<usize, GoldenError> {
    let all = generate()?;
    for gd in &all {
        let path = dir.join(gd.file);
        let on_disk = std::fs::read_to_string(&path).map_err(|e| GoldenError::Missing {
            file: path.display().to_string(),
            reason: e.to_string(),
        })?;
        if on_disk != gd.content {
            let mut a = on_disk.lines();
            let mut b = gd.content.lines();
            let mut line = 1;
            while a.next() == b.next() {
                line += 1;
            }
            return Err(GoldenError::Differs {
                file: gd.file.to_string(),
                line,
            });
        }
    }
    Ok(all.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linearize::f_vector;
    use crate::timestamp::VectorTimestamp;
    use crate::types::{EventKind, OpId, OpKind};

    #[test]
    fn three_writer_order() {
        let h = three_writer_scenario().unwrap();
        let ts: Vec<(u64, VectorTimestamp)> = h
            .events()
            .iter()
            .filter(|e| e.kind == EventKind::Base && e.op_kind == OpKind::Write)
            .map(|e| (e.op_id.0, e.value.vector_ts().unwrap().clone()))
            .collect();
        let w1 = ts.iter().find(|(_, t)| t.get(0).finite() == Some(1)).unwrap();
        assert_eq!(w1.1, VectorTimestamp::finite(&[1, 1, 1]));
        let lin = f_vector(&h).unwrap();
        let vals: Vec<String> = lin
            .ops
            .iter()
            .map(|o| format!("{:?}{}", o.op_kind, o.argument.clone().or(o.result.clone()).unwrap().plain()))
            .collect();
        assert_eq!(vals, ["Write3", "Write2", "Read2", "Write1"]);
        assert!(lin.op_ids().contains(&OpId(1)));
    }

    #[test]
    fn generation_is_stable() {
        assert_eq!(generate().unwrap(), generate().unwrap());
    }
}
