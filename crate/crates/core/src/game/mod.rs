//! The randomized n-process game, its bounded-value variant, and the
//! adversaries that play against it.

pub mod adversary;
pub mod lemmas;
pub mod program;

use std::fmt;
use std::str::FromStr;

pub use adversary::{Theorem1Adversary, Theorem1WslAdversary};
pub use lemmas::{check_lemmas, LemmaViolation};
pub use program::{GameProgram, Milestone, MilestoneKind, Role, RoundDecision, C, R1, R2};

use crate::impl_lamport::LamportRegister;
use crate::impl_vector::VectorRegister;
use crate::registers::adversarial::{AdversarialRegister, CommitMode};
use crate::registers::atomic::AtomicRegister;
use crate::registers::{RegisterBackend, RegisterSpec};
use crate::sim::adversary::{RandomAdversary, ScriptedAdversary};
use crate::sim::{run, Adversary, Decision, Outcome, ProcessProgram, RunResult, SimConfig, SimError, Simulator};
use crate::types::{ProcessId, Value};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum BackendKind {
    Atomic,
    LinAdv,
    WslAdv,
    Alg2,
    Alg4,
}

impl BackendKind {
    pub const ALL: [BackendKind; 5] = [
        BackendKind::Atomic,
        BackendKind::LinAdv,
        BackendKind::WslAdv,
        BackendKind::Alg2,
        BackendKind::Alg4,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BackendKind::Atomic => "atomic",
            BackendKind::LinAdv => "lin-adv",
            BackendKind::WslAdv => "wsl-adv",
            BackendKind::Alg2 => "alg2",
            BackendKind::Alg4 => "alg4",
        }
    }

    pub fn build(self, id: &str, n: usize, initial: Value) -> Box<dyn RegisterBackend> {
        match self {
            BackendKind::Atomic => Box::new(AtomicRegister::new(id, initial)),
            BackendKind::LinAdv => Box::new(AdversarialRegister::new(id, initial, CommitMode::Lin)),
            BackendKind::WslAdv => Box::new(AdversarialRegister::new(id, initial, CommitMode::Wsl)),
            BackendKind::Alg2 => Box::new(VectorRegister::new(id, n, initial)),
            BackendKind::Alg4 => Box::new(LamportRegister::new(id, n, initial)),
        }
    }
}

impl fmt::Display for BackendKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BackendKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        BackendKind::ALL
            .into_iter()
            .find(|b| b.as_str() == s)
            .ok_or_else(|| format!("unknown register back-end {s:?}"))
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum AdversaryKind {
    Random,
    Theorem1,
    Theorem1Wsl,
}

impl AdversaryKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AdversaryKind::Random => "random",
            AdversaryKind::Theorem1 => "theorem1",
            AdversaryKind::Theorem1Wsl => "theorem1-wsl",
        }
    }
}

impl fmt::Display for AdversaryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AdversaryKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        [AdversaryKind::Random, AdversaryKind::Theorem1, AdversaryKind::Theorem1Wsl]
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| format!("unknown adversary {s:?}"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GameConfig {
    pub n: usize,
    pub seed: u64,
    pub max_rounds: Option<u64>,
    pub max_steps: u64,
    pub backend: BackendKind,
    pub adversary: AdversaryKind,
    pub bounded: bool,
}

impl GameConfig {
    pub fn new(n: usize, seed: u64, backend: BackendKind, adversary: AdversaryKind) -> Self {
        GameConfig {
            n,
            seed,
            max_rounds: Some(100),
            max_steps: crate::sim::DEFAULT_MAX_STEPS,
            backend,
            adversary,
            bounded: false,
        }
    }

    /// Rejects back-end and adversary pairings the adversaries cannot drive.
    pub fn validate(&self) -> Result<(), String> {
        if self.n < 3 {
            return Err(format!("the game needs n >= 3, got {}", self.n));
        }
        match (self.adversary, self.backend) {
            (AdversaryKind::Theorem1, b) if b != BackendKind::LinAdv => {
                Err(format!("adversary theorem1 needs --registers lin-adv, not {b}"))
            }
            (AdversaryKind::Theorem1Wsl, b)
                if !matches!(b, BackendKind::WslAdv | BackendKind::Alg2 | BackendKind::Atomic) =>
            {
                Err(format!("adversary theorem1-wsl needs wsl-adv, alg2 or atomic, not {b}"))
            }
            _ => Ok(()),
        }
    }

    pub fn simulator(&self) -> Result<Simulator, SimError> {
        self.validate().map_err(SimError::Config)?;
        let programs = (0..self.n)
            .map(|i| {
                GameProgram::new(ProcessId(i), self.n, self.bounded)
                    .map(|p| Box::new(p) as Box<dyn ProcessProgram>)
                    .map_err(SimError::Config)
            })
            .collect::<Result<Vec<_>, _>>()?;
        let registers = [(R1, Value::Bottom), (C, Value::Bottom), (R2, Value::Int(0))]
            .into_iter()
            .map(|(id, init)| RegisterSpec::mwmr(self.backend.build(id, self.n, init)))
            .collect();
        let mut sc = SimConfig::new(self.n, self.seed);
        sc.max_steps = self.max_steps;
        sc.max_rounds = self.max_rounds;
        Simulator::new(sc, programs, registers)
    }

    pub fn adversary(&self) -> Box<dyn Adversary> {
        match self.adversary {
            AdversaryKind::Random => Box::new(RandomAdversary::new(self.seed)),
            AdversaryKind::Theorem1 => Box::new(Theorem1Adversary::new()),
            AdversaryKind::Theorem1Wsl => Box::new(Theorem1WslAdversary::new(self.seed)),
        }
    }
}

pub struct GameRun {
    pub result: RunResult,
    pub bounded: bool,
}

impl GameRun {
    pub fn outcome(&self) -> Outcome {
        self.result.outcome
    }

    /// Highest round any process entered.
    pub fn termination_round(&self) -> u64 {
        self.result.rounds_per_proc.iter().copied().max().unwrap_or(0)
    }

    pub fn program(&self, p: ProcessId) -> &GameProgram {
        self.result.program::<GameProgram>(p).expect("game programs")
    }

    /// Decisions of every process, indexed by process.
    pub fn decisions(&self) -> Vec<Vec<(u64, RoundDecision)>> {
        (0..self.result.programs.len())
            .map(|p| self.program(ProcessId(p)).decisions().to_vec())
            .collect()
    }

    pub fn returned(&self) -> usize {
        (0..self.result.programs.len())
            .filter(|p| self.program(ProcessId(*p)).is_done())
            .count()
    }

    pub fn check_lemmas(&self) -> Result<(), LemmaViolation> {
        check_lemmas(&self.result, self.bounded)
    }
}

pub fn run_game(cfg: &GameConfig) -> Result<GameRun, SimError> {
    let sim = cfg.simulator()?;
    let result = run(sim, cfg.adversary().as_mut())?;
    Ok(GameRun {
        result,
        bounded: cfg.bounded,
    })
}

/// Runs `cfg` under a fixed decision log instead of its adversary.
pub fn replay_game(cfg: &GameConfig, decisions: Vec<Decision>) -> Result<GameRun, SimError> {
    let sim = cfg.simulator()?;
    let result = run(sim, &mut ScriptedAdversary::new(decisions))?;
    Ok(GameRun {
        result,
        bounded: cfg.bounded,
    })
}
