//! Three overlapping writes on the vector-timestamp register, linearized
//! online and checked on every prefix of the trace.

use linlab::goldens::three_writer_scenario;
use linlab::linearize::{
    check_batch_invariants, check_linearization, check_wsl_prefixes, event_prefixes, f_vector, f_vector_batches,
};
use linlab::types::Value;

fn main() {
    let h = three_writer_scenario().expect("scenario");
    let out = f_vector_batches(&h).expect("f_vector");
    for b in &out.batches {
        println!("batch {} at t={} opened by {}:", b.index, b.time, b.trigger);
        for w in &b.candidates {
            let tag = if b.members.contains(w) { "in " } else { "out" };
            println!("  {tag} {w} pts {}", b.pts[w]);
        }
    }
    for o in &out.lin.ops {
        let v = o.argument.as_ref().or(o.result.as_ref()).unwrap();
        println!("{} {:?} {} {v}", o.op_id, o.op_kind, o.proc);
    }
    check_batch_invariants(&h, &out).expect("batch facts");
    check_linearization(&h, &out.lin, &Value::Int(0)).expect("valid");

    let family: Vec<_> = event_prefixes(&h)
        .into_iter()
        .map(|g| {
            let l = f_vector(&g).expect("prefix");
            (g, l)
        })
        .collect();
    check_wsl_prefixes(&family).expect("prefix stable");
    println!("write order stable over all {} prefixes", family.len());
}
