use michelson_vc::arbitrary;
use michelson_vc::interp::{run_contract, ExecConfig, Outcome, TraceEvent};
use michelson_vc::model::compare;
use michelson_vc::syntax::{parse_source, pretty_print};
use michelson_vc::typecheck::typecheck;
use michelson_vc::contracts::Formula;
use michelson_vc::vcgen::{emit_smt, generate_mono, Clause, SpecSidecar};
use michelson_vc::{Ty, Value};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

fn three_of_one_type(seed: u64) -> (Value, Value, Value) {
    let mut rng = StdRng::seed_from_u64(seed);
    let t = arbitrary::comparable(&mut rng).ty();
    (arbitrary::value(&mut rng, &t), arbitrary::value(&mut rng, &t), arbitrary::value(&mut rng, &t))
}

fn factorial_contract() -> michelson_vc::Contract {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../corpus/factorial.tz");
    parse_source(&std::fs::read_to_string(path).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn compare_is_a_total_order(seed in any::<u64>()) {
        let (x, y, z) = three_of_one_type(seed);
        let xy = compare(&x, &y).unwrap();
        prop_assert_eq!(xy, -compare(&y, &x).unwrap());
        prop_assert_eq!(xy == 0, x == y);
        prop_assert_eq!(compare(&x, &x).unwrap(), 0);
        if xy <= 0 && compare(&y, &z).unwrap() <= 0 {
            prop_assert!(compare(&x, &z).unwrap() <= 0);
        }
    }

    #[test]
    fn print_parse_round_trip(seed in any::<u64>()) {
        let c = arbitrary::contract(&mut StdRng::seed_from_u64(seed), 10);
        let printed = pretty_print(&c);
        let again = parse_source(&printed).unwrap();
        prop_assert_eq!(&again, &c);
        prop_assert_eq!(pretty_print(&again), printed);
    }

    #[test]
    fn runtime_types_match_static_types(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let c = arbitrary::contract(&mut rng, 10);
        let tp = typecheck(&c).unwrap();
        let p = arbitrary::value(&mut rng, &c.parameter);
        let s = arbitrary::value(&mut rng, &c.storage);
        let mut bad = Vec::new();
        let mut obs = |ev: &TraceEvent| {
            let got: Vec<Ty> = ev.stack.iter().map(|v| v.typ_infer()).collect();
            if tp.after(ev.path) != Some(&got) {
                bad.push(ev.path.to_string());
            }
        };
        run_contract(&c, p, s, &ExecConfig::with_fuel(10_000), Some(&mut obs)).unwrap();
        prop_assert!(bad.is_empty(), "{:?}", bad);
    }

    #[test]
    fn more_fuel_never_changes_a_success(n in 0u32..15, fuel in 1u64..600, extra in 1u64..100_000) {
        let c = factorial_contract();
        let run = |f| run_contract(&c, Value::nat(n).unwrap(), Value::nat(0).unwrap(), &ExecConfig::with_fuel(f), None).unwrap();
        let a = run(fuel);
        match &a {
            Outcome::Success(_) => prop_assert_eq!(run(fuel + extra), a),
            other => prop_assert_eq!(other, &Outcome::FuelExhausted),
        }
    }

    #[test]
    fn generated_vcs_encode(seed in any::<u64>()) {
        let c = arbitrary::contract(&mut StdRng::seed_from_u64(seed), 8);
        let tp = typecheck(&c).unwrap();
        let mut sc = SpecSidecar::default();
        for p in sc.missing_invariants(&tp) {
            sc.invariants.insert(p, Clause { formula: Formula::True, text: "true".into(), line: 1 });
        }
        let out = generate_mono(&tp, &sc).unwrap();
        for vc in out.vcs.iter().filter(|v| !v.is_trivial()) {
            let script = emit_smt(vc, &Default::default());
            prop_assert!(script.is_ok(), "{}: {:?}", vc.name, script.err());
        }
    }
}
