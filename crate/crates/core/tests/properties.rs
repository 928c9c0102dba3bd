use proptest::prelude::*;

use linlab::game::{run_game, AdversaryKind, BackendKind, GameConfig};
use linlab::linearize::{check_linearizable, check_linearization, check_wsl_prefixes, f_vector_batches};
use linlab::registers::AdversarialRegister;
use linlab::timestamp::vts_compare;
use linlab::types::{precedes, EventKind, OpKind, RegisterId, Value};
use linlab::workload::{random_history, WorkloadSpec};

fn backend() -> impl Strategy<Value = BackendKind> {
    prop::sample::select(BackendKind::ALL.to_vec())
}

fn initial(r: &RegisterId) -> Value {
    match r.as_str() {
        "R2" => Value::Int(0),
        "R" => Value::Int(0),
        _ => Value::Bottom,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn simulated_histories_are_well_formed(b in backend(), n in 2usize..5, seed in any::<u64>()) {
        let h = random_history(b, &WorkloadSpec::mwmr(n, 8), seed).unwrap();
        prop_assert!(h.well_formed().is_ok());
        let ops = h.operations();
        for a in &ops {
            prop_assert!(!precedes(a, a));
            for c in &ops {
                prop_assert!(!(precedes(a, c) && precedes(c, a)));
                for d in &ops {
                    if precedes(a, c) && precedes(c, d) {
                        prop_assert!(precedes(a, d));
                    }
                }
            }
        }
    }

    #[test]
    fn runs_are_deterministic(b in backend(), seed in any::<u64>()) {
        let mut cfg = GameConfig::new(3, seed, b, AdversaryKind::Random);
        cfg.max_rounds = Some(5);
        let x = run_game(&cfg).unwrap();
        let y = run_game(&cfg).unwrap();
        prop_assert_eq!(&x.result.history, &y.result.history);
        prop_assert_eq!(&x.result.coins, &y.result.coins);
    }

    #[test]
    fn game_lemmas_hold_under_random_schedules(b in backend(), n in 3usize..6, seed in any::<u64>(), bounded in any::<bool>()) {
        let mut cfg = GameConfig::new(n, seed, b, AdversaryKind::Random);
        cfg.max_rounds = Some(8);
        cfg.bounded = bounded;
        let run = run_game(&cfg).unwrap();
        prop_assert!(run.check_lemmas().is_ok(), "{:?}", run.check_lemmas());
    }

    #[test]
    fn any_step_budget_ends_cleanly(b in backend(), adv in 0usize..3, budget in 1u64..400, seed in any::<u64>()) {
        let adversary = [AdversaryKind::Random, AdversaryKind::Theorem1, AdversaryKind::Theorem1Wsl][adv];
        let mut cfg = GameConfig::new(3, seed, b, adversary);
        prop_assume!(cfg.validate().is_ok());
        cfg.max_rounds = None;
        cfg.max_steps = budget;
        let run = run_game(&cfg).unwrap();
        prop_assert!(run.result.steps <= budget);
        prop_assert!(run.check_lemmas().is_ok());
    }

    #[test]
    fn atomic_and_clock_histories_are_linearizable(seed in any::<u64>(), n in 2usize..5, clock in any::<bool>()) {
        let b = if clock { BackendKind::Alg4 } else { BackendKind::Atomic };
        let h = random_history(b, &WorkloadSpec::mwmr(n, 8), seed).unwrap();
        prop_assert!(check_linearizable(&h, &Value::Int(0)).unwrap().is_some());
    }

    #[test]
    fn vector_timestamps_are_distinct_and_reads_monotone(seed in any::<u64>(), n in 2usize..5) {
        let h = random_history(BackendKind::Alg2, &WorkloadSpec::mwmr(n, 8), seed).unwrap();
        let out = f_vector_batches(&h).unwrap();
        let ops = h.operations();
        let done: Vec<_> = ops.iter().filter(|o| o.is_write() && o.is_complete()).map(|o| o.op_id).collect();
        for (i, a) in done.iter().enumerate() {
            for b in &done[i + 1..] {
                prop_assert_ne!(&out.write_ts[a], &out.write_ts[b]);
            }
        }
        let reads: Vec<_> = ops.iter().filter(|o| o.is_read() && o.is_complete()).collect();
        for r in &reads {
            for s in &reads {
                if precedes(r, s) {
                    let tr = r.result.as_ref().and_then(|v| v.vector_ts()).unwrap();
                    let ts = s.result.as_ref().and_then(|v| v.vector_ts()).unwrap();
                    prop_assert!(vts_compare(tr, ts).unwrap().is_le());
                }
            }
        }
    }

    #[test]
    fn adversarial_commit_logs_stay_valid(seed in any::<u64>(), n in 3usize..5, wsl in any::<bool>()) {
        let (b, adv) = if wsl {
            (BackendKind::WslAdv, AdversaryKind::Theorem1Wsl)
        } else {
            (BackendKind::LinAdv, AdversaryKind::Random)
        };
        let mut cfg = GameConfig::new(n, seed, b, adv);
        cfg.max_rounds = Some(3);
        let run = run_game(&cfg).unwrap();
        let h = &run.result.history;
        for r in h.registers().into_iter().filter(|r| r.as_str() != "coin") {
            let reg = run.result.register::<AdversarialRegister>(&r).unwrap();
            let proj = h.project(&r);
            let full = reg.linearization_at(h, h.last_time());
            prop_assert!(check_linearization(&proj, &full, &initial(&r)).is_ok());
            if wsl {
                let family: Vec<_> = (0..=h.last_time())
                    .map(|t| (h.prefix(t).project(&r), reg.linearization_at(h, t)))
                    .collect();
                prop_assert!(check_wsl_prefixes(&family).is_ok());
            }
        }
    }
}

#[test]
fn base_writes_carry_the_stored_timestamp() {
    let h = random_history(BackendKind::Alg2, &WorkloadSpec::mwmr(3, 8), 3).unwrap();
    let out = f_vector_batches(&h).unwrap();
    let mut seen = 0;
    for e in h.events().iter().filter(|e| e.kind == EventKind::Base && e.op_kind == OpKind::Write) {
        if let Some(ts) = e.value.vector_ts() {
            assert_eq!(&out.write_ts[&e.op_id], ts);
            seen += 1;
        }
    }
    assert!(seen > 0);
}
