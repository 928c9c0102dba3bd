//! Many seeded game runs and their termination statistics.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::game::{run_game, GameConfig};
use crate::sim::{Outcome, SimError};

pub const CSV_HEADER: &str = "seed,termination_round,steps,outcome";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrialRecord {
    pub seed: u64,
    pub termination_round: u64,
    pub steps: u64,
    pub outcome: Outcome,
}

impl TrialRecord {
    pub fn terminated(&self) -> bool {
        self.outcome == Outcome::AllReturned
    }
}

/// Continuation out of one round: of `survivors` trials that entered it,
/// `continued` entered the next.
#[derive(Clone, Debug, PartialEq)]
pub struct RoundContinuation {
    pub round: u64,
    pub survivors: usize,
    pub continued: usize,
}

impl RoundContinuation {
    pub fn frequency(&self) -> f64 {
        self.continued as f64 / self.survivors as f64
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentReport {
    pub trials: Vec<TrialRecord>,
    pub terminated: usize,
    pub not_terminated: usize,
    /// Over terminated trials only; `None` when there are none.
    pub mean_round: Option<f64>,
    pub ci95: Option<(f64, f64)>,
    pub continuation: Vec<RoundContinuation>,
}

/// Runs `trials` games with seeds `base.seed`, `base.seed + 1`, ...
pub fn run_experiment(base: &GameConfig, trials: u64) -> Result<ExperimentReport, SimError> {
    let mut records = (0..trials)
        .into_par_iter()
        .map(|k| {
            let mut cfg = base.clone();
            cfg.seed = base.seed.wrapping_add(k);
            let run = run_game(&cfg)?;
            Ok(TrialRecord {
                seed: cfg.seed,
                termination_round: run.termination_round(),
                steps: run.result.steps,
                outcome: run.outcome(),
            })
        })
        .collect::<Result<Vec<_>, SimError>>()?;
    records.sort_by_key(|r| r.seed);
    Ok(ExperimentReport::from_trials(records))
}

impl ExperimentReport {
    pub fn from_trials(trials: Vec<TrialRecord>) -> Self {
        let done: Vec<f64> = trials
            .iter()
            .filter(|t| t.terminated())
            .map(|t| t.termination_round as f64)
            .collect();
        let k = done.len();
        let mean = (k > 0).then(|| done.iter().sum::<f64>() / k as f64);
        let ci95 = mean.filter(|_| k > 1).map(|m| {
            let var = done.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (k - 1) as f64;
            let half = 1.96 * var.sqrt() / (k as f64).sqrt();
            (m - half, m + half)
        });
        let top = trials.iter().map(|t| t.termination_round).max().unwrap_or(0);
        let continuation = (1..top)
            .map(|j| RoundContinuation {
                round: j,
                survivors: trials.iter().filter(|t| t.termination_round >= j).count(),
                continued: trials.iter().filter(|t| t.termination_round > j).count(),
            })
            .collect();
        ExperimentReport {
            terminated: k,
            not_terminated: trials.len() - k,
            trials,
            mean_round: mean,
            ci95,
            continuation,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(CSV_HEADER);
        s.push('\n');
        for t in &self.trials {
            let _ = writeln!(s, "{},{},{},{}", t.seed, t.termination_round, t.steps, t.outcome.as_str());
        }
        s
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "trials {}  terminated {}  not terminated {}",
            self.trials.len(),
            self.terminated,
            self.not_terminated
        );
        match (self.mean_round, self.ci95) {
            (Some(m), Some((lo, hi))) => {
                let _ = writeln!(s, "mean termination round {m:.4}  95% CI [{lo:.4}, {hi:.4}]");
            }
            (Some(m), None) => {
                let _ = writeln!(s, "mean termination round {m:.4}");
            }
            _ => {
                let _ = writeln!(s, "mean termination round n/a");
            }
        }
        for c in &self.continuation {
            let _ = writeln!(
                s,
                "round {:>4}: {:>5} entered, {:>5} continued ({:.3})",
                c.round,
                c.survivors,
                c.continued,
                c.frequency()
            );
        }
        s
    }
}
