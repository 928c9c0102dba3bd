//! Single-writer histories: any linearization with a trailing pending write
//! dropped is prefix-stable on writes.

use linlab::game::BackendKind;
use linlab::linearize::{
    check_f_star_claims, check_linearizable_with, check_wsl_prefixes, event_prefixes, f_star, PendingWrites,
    HARD_MAX_OPS,
};
use linlab::types::Value;
use linlab::workload::{random_history, WorkloadSpec};

fn main() {
    let spec = WorkloadSpec::swmr(3, 8);
    let mut dropped = 0;
    for seed in 0..200 {
        let h = random_history(BackendKind::Alg2, &spec, seed).expect("run");
        let mut family = Vec::new();
        for g in event_prefixes(&h) {
            let base = check_linearizable_with(&g, &Value::Int(0), HARD_MAX_OPS, PendingWrites::Maximal)
                .expect("size")
                .expect("linearizable");
            let l = f_star(&g, &base, &Value::Int(0)).expect("valid base");
            check_f_star_claims(&g, &l).expect("claims");
            dropped += base.len() - l.len();
            family.push((g, l));
        }
        check_wsl_prefixes(&family).expect("prefix stable");
    }
    println!("200 histories ok, {dropped} trailing pending writes dropped across all prefixes");
}
