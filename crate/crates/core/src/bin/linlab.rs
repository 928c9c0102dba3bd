use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use linlab::game::{check_lemmas, run_game, AdversaryKind, BackendKind, GameConfig};
use linlab::impl_lamport::build_counterexample;
use linlab::linearize::{
    check_linearizable_with, check_linearization, check_wsl_prefixes, event_prefixes, f_star, f_vector, refute_wsl,
    PendingWrites, RefuteOutcome, HARD_MAX_OPS,
};
use linlab::sim::SimError;
use linlab::trace::{history_to_jsonl, lin_to_jsonl, read_lin, read_trace, write_file, write_trace};
use linlab::types::{History, Linearization, RegisterId, Value};
use linlab::{experiment, goldens};

#[derive(Parser)]
#[command(name = "linlab", version, about = "Register linearization lab")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(clap::Args, Clone)]
struct GameArgs {
    #[arg(long, default_value_t = 3)]
    n: usize,
    #[arg(long, env = "LINLAB_SEED", default_value_t = 0)]
    seed: u64,
    /// Stop once a process enters a round beyond this one; 0 for no cap.
    #[arg(long, default_value_t = 100)]
    rounds: u64,
    #[arg(long, default_value = "atomic")]
    registers: String,
    #[arg(long, default_value = "random")]
    adversary: String,
    #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u8).range(0..=1))]
    bounded: u8,
    #[arg(long, default_value_t = linlab::sim::DEFAULT_MAX_STEPS)]
    max_steps: u64,
}

impl GameArgs {
    fn config(&self) -> Result<GameConfig, String> {
        let backend: BackendKind = self.registers.parse()?;
        let adversary: AdversaryKind = self.adversary.parse()?;
        let mut cfg = GameConfig::new(self.n, self.seed, backend, adversary);
        cfg.max_rounds = (self.rounds > 0).then_some(self.rounds);
        cfg.max_steps = self.max_steps;
        cfg.bounded = self.bounded == 1;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Copy, Clone, ValueEnum)]
enum Algo {
    FVector,
    FStar,
    Oracle,
}

#[derive(Copy, Clone, ValueEnum)]
enum Mode {
    Lin,
    WslPrefix,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one game and print its outcome.
    SimulateGame {
        #[command(flatten)]
        game: GameArgs,
        #[arg(long)]
        trace_out: Option<PathBuf>,
    },
    /// Run many seeded games and report termination statistics.
    Experiment {
        #[command(flatten)]
        game: GameArgs,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long)]
        csv_out: Option<PathBuf>,
    },
    /// Print a linearization of a trace, one op id per line.
    Linearize {
        #[arg(long, value_enum)]
        algo: Algo,
        trace: PathBuf,
        #[command(flatten)]
        reg: RegArgs,
    },
    /// Check a linearization against a trace.
    Check {
        #[arg(long, value_enum)]
        mode: Mode,
        trace: PathBuf,
        lin: PathBuf,
        /// Linearization function applied to every prefix in wsl-prefix mode.
        #[arg(long, value_enum, default_value = "f-vector")]
        algo: Algo,
        #[command(flatten)]
        reg: RegArgs,
    },
    /// Try to show that no write strong-linearization covers g and its extensions.
    RefuteWsl {
        g: PathBuf,
        extensions: Vec<PathBuf>,
        #[command(flatten)]
        reg: RegArgs,
    },
    /// Write the clock-register counterexample traces and refute them.
    CounterexampleLamport {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Regenerate the golden traces or compare them with a directory.
    Goldens {
        #[arg(long, conflicts_with = "check")]
        out: Option<PathBuf>,
        #[arg(long)]
        check: Option<PathBuf>,
    },
}

#[derive(clap::Args, Clone)]
struct RegArgs {
    /// Initial register value as JSON.
    #[arg(long, default_value = "0")]
    initial: String,
    /// Project the trace onto this register first.
    #[arg(long)]
    register: Option<String>,
}

impl RegArgs {
    fn initial(&self) -> Result<Value, String> {
        let j: serde_json::Value = serde_json::from_str(&self.initial).map_err(|e| format!("--initial: {e}"))?;
        Value::from_json(&j).map_err(|e| format!("--initial: {e}"))
    }

    fn load(&self, path: &Path) -> Result<History, Failure> {
        let h = read_trace(path).map_err(|e| Failure::Usage(e.to_string()))?;
        Ok(match &self.register {
            Some(r) => h.project(&RegisterId::new(r.as_str())),
            None => h,
        })
    }
}

enum Failure {
    Usage(String),
    Violation(String),
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Config(m) => Failure::Usage(m),
            other => Failure::Violation(other.to_string()),
        }
    }
}

fn linearize(algo: Algo, h: &History, initial: &Value) -> Result<Linearization, Failure> {
    let oracle = |h: &History| {
        check_linearizable_with(h, initial, HARD_MAX_OPS, PendingWrites::Maximal)
            .map_err(|e| Failure::Usage(e.to_string()))?
            .ok_or_else(|| Failure::Violation("history is not linearizable".into()))
    };
    match algo {
        Algo::FVector => f_vector(h).map_err(|e| Failure::Violation(e.to_string())),
        Algo::Oracle => oracle(h),
        Algo::FStar => {
            let base = oracle(h)?;
            f_star(h, &base, initial).map_err(|e| Failure::Violation(e.to_string()))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Violation(m)) => {
            eprintln!("violation: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cmd: Cmd) -> Result<(), Failure> {
    let io = |e: linlab::trace::TraceError| Failure::Usage(e.to_string());
    match cmd {
        Cmd::SimulateGame { game, trace_out } => {
            let cfg = game.config().map_err(Failure::Usage)?;
            let run = run_game(&cfg)?;
            println!("outcome {}", run.outcome().as_str());
            println!("termination_round {}", run.termination_round());
            println!("steps {}", run.result.steps);
            println!("returned {}/{}", run.returned(), cfg.n);
            println!("coins {}", run.result.coins.iter().map(|c| c.to_string()).collect::<String>());
            if let Some(p) = trace_out {
                write_trace(&p, &run.result.history).map_err(io)?;
            }
            check_lemmas(&run.result, cfg.bounded).map_err(|e| Failure::Violation(e.to_string()))
        }
        Cmd::Experiment { game, trials, csv_out } => {
            let cfg = game.config().map_err(Failure::Usage)?;
            let report = experiment::run_experiment(&cfg, trials)?;
            print!("{}", report.summary());
            match csv_out {
                Some(p) => write_file(&p, &report.to_csv()).map_err(io),
                None => Ok(()),
            }
        }
        Cmd::Linearize { algo, trace, reg } => {
            let h = reg.load(&trace)?;
            let lin = linearize(algo, &h, &reg.initial().map_err(Failure::Usage)?)?;
            print!("{}", lin_to_jsonl(&lin));
            Ok(())
        }
        Cmd::Check { mode, trace, lin, algo, reg } => {
            let h = reg.load(&trace)?;
            let initial = reg.initial().map_err(Failure::Usage)?;
            let l = read_lin(&lin, &h).map_err(io)?;
            check_linearization(&h, &l, &initial).map_err(|v| Failure::Violation(v.to_string()))?;
            if let Mode::WslPrefix = mode {
                let mut family = Vec::new();
                for g in event_prefixes(&h).into_iter().take(h.len()) {
                    let fg = linearize(algo, &g, &initial)?;
                    family.push((g, fg));
                }
                family.push((h, l));
                check_wsl_prefixes(&family).map_err(|v| Failure::Violation(v.to_string()))?;
            }
            println!("ok");
            Ok(())
        }
        Cmd::RefuteWsl { g, extensions, reg } => {
            let gh = reg.load(&g)?;
            let exts = extensions.iter().map(|p| reg.load(p)).collect::<Result<Vec<_>, _>>()?;
            let initial = reg.initial().map_err(Failure::Usage)?;
            report_refutation(&gh, &exts, &initial)
        }
        Cmd::CounterexampleLamport { out } => {
            let ce = build_counterexample()?;
            if let Some(dir) = out {
                std::fs::create_dir_all(&dir).map_err(|e| Failure::Usage(e.to_string()))?;
                for (name, h) in [("G.jsonl", &ce.g), ("H_case1.jsonl", &ce.h_case1), ("H_case2.jsonl", &ce.h_case2)] {
                    write_file(&dir.join(name), &history_to_jsonl(h)).map_err(io)?;
                }
            }
            report_refutation(&ce.g, &[ce.h_case1, ce.h_case2], &Value::Int(0))
        }
        Cmd::Goldens { out, check } => match (out, check) {
            (_, Some(dir)) => {
                let n = goldens::check_all(&dir).map_err(|e| Failure::Violation(e.to_string()))?;
                println!("{n} goldens match");
                Ok(())
            }
            (Some(dir), None) => {
                let all = goldens::write_all(&dir).map_err(|e| Failure::Usage(e.to_string()))?;
                for g in all {
                    println!("{}", dir.join(g.file).display());
                }
                Ok(())
            }
            (None, None) => Err(Failure::Usage("goldens needs --out DIR or --check DIR".into())),
        },
    }
}

fn report_refutation(g: &History, exts: &[History], initial: &Value) -> Result<(), Failure> {
    let outcome = refute_wsl(g, exts, initial, HARD_MAX_OPS).map_err(|e| Failure::Usage(e.to_string()))?;
    match outcome {
        RefuteOutcome::Witness(w) => {
            for (l, i) in &w {
                let ids: Vec<String> = l.writes().iter().map(|o| o.to_string()).collect();
                println!("writes ({}) -> extension {}", ids.join(", "), i + 1);
            }
            Err(Failure::Violation(format!(
                "refuted: all {} linearizations of g fail in some extension",
                w.len()
            )))
        }
        RefuteOutcome::NotRefuted(l) => {
            let ids: Vec<String> = l.writes().iter().map(|o| o.to_string()).collect();
            println!("not refuted: writes ({}) extend into every extension", ids.join(", "));
            Ok(())
        }
    }
}
