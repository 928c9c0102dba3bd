//! The clock-based register is linearizable, but no linearization of the
//! short history G can be kept as a write prefix in both of its extensions.

use linlab::impl_lamport::build_counterexample;
use linlab::linearize::{check_linearizable, refute_wsl, RefuteOutcome, HARD_MAX_OPS};
use linlab::types::Value;

fn main() {
    let ce = build_counterexample().expect("script");
    for (name, h) in [("G", &ce.g), ("H1", &ce.h_case1), ("H2", &ce.h_case2)] {
        let lin = check_linearizable(h, &Value::Int(0)).expect("size").expect("linearizable");
        println!("{name}: {} events, linearizable as {:?}", h.len(), lin.op_ids());
    }
    match refute_wsl(&ce.g, &[ce.h_case1, ce.h_case2], &Value::Int(0), HARD_MAX_OPS).expect("refute") {
        RefuteOutcome::Witness(w) => {
            for (l, i) in w {
                println!("writes {:?} of G cannot continue into H{}", l.writes(), i + 1);
            }
        }
        RefuteOutcome::NotRefuted(l) => println!("survivor {:?}", l.writes()),
    }
}
