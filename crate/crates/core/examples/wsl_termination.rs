//! The same adversary against registers that commit the write order when a
//! write responds. It has to guess the coin, so each round survives with
//! probability one half.
//!
//!     cargo run --release --example wsl_termination -- 2000

use linlab::experiment::run_experiment;
use linlab::game::{AdversaryKind, BackendKind, GameConfig};

fn main() {
    let trials: u64 = std::env::args().nth(1).map_or(1000, |a| a.parse().expect("trials"));
    for backend in [BackendKind::WslAdv, BackendKind::Alg2, BackendKind::Atomic] {
        let mut cfg = GameConfig::new(3, 0, backend, AdversaryKind::Theorem1Wsl);
        cfg.max_rounds = None;
        let report = run_experiment(&cfg, trials).expect("experiment");
        println!("== {backend}");
        print!("{}", report.summary());
    }
}
