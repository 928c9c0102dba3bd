//! Brute-force linearizability of a trace file, one register at a time.
//!
//!     cargo run --example oracle_check -- crates/core/tests/fixtures/goldens/theorem1_n3_coin1.jsonl

use linlab::linearize::{check_linearizable_with, PendingWrites, HARD_MAX_OPS};
use linlab::trace::read_trace;
use linlab::types::Value;

fn main() {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "crates/core/tests/fixtures/goldens/theorem1_n3_coin0.jsonl".into());
    let h = read_trace(path.as_ref()).expect("trace");
    for r in h.registers() {
        if r.as_str() == "coin" {
            continue;
        }
        let initial = if r.as_str() == "R2" { Value::Int(0) } else { Value::Bottom };
        let p = h.project(&r);
        match check_linearizable_with(&p, &initial, HARD_MAX_OPS, PendingWrites::Minimal) {
            Ok(Some(l)) => println!("{r}: {} ops, linearization {:?}", p.operations().len(), l.op_ids()),
            Ok(None) => println!("{r}: NOT linearizable"),
            Err(e) => println!("{r}: {e}"),
        }
    }
}
