//! Runs the game against adversarially linearizable registers and shows that
//! nobody ever leaves: every round the adversary waits for the coin and then
//! orders the host writes to match it.
//!
//!     cargo run --example theorem1_nontermination -- 5 40

use linlab::game::{run_game, AdversaryKind, BackendKind, GameConfig};
use linlab::types::ProcessId;

fn main() {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(3, |a| a.parse().expect("n"));
    let rounds: u64 = args.next().map_or(30, |a| a.parse().expect("rounds"));

    for seed in 0..5 {
        let mut cfg = GameConfig::new(n, seed, BackendKind::LinAdv, AdversaryKind::Theorem1);
        cfg.max_rounds = Some(rounds);
        let run = run_game(&cfg).expect("run");
        run.check_lemmas().expect("lemmas");
        let coins: String = run.result.coins.iter().map(|c| c.to_string()).collect();
        println!(
            "seed {seed}: {} after {} steps, rounds {:?}, returned {}, coins {coins}",
            run.outcome().as_str(),
            run.result.steps,
            run.result.rounds_per_proc,
            run.returned()
        );
    }

    let mut cfg = GameConfig::new(n, 0, BackendKind::LinAdv, AdversaryKind::Theorem1);
    cfg.max_rounds = Some(1);
    let run = run_game(&cfg).expect("run");
    println!("\nround 1 milestones of p2:");
    for m in run.program(ProcessId(2)).milestones() {
        println!("  t={:<3} {:?}", m.time, m.kind);
    }
}
