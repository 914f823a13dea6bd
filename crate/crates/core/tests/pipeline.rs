//! Parse, typecheck, generate VCs and discharge them with z3.

use std::path::PathBuf;
use std::time::Duration;

use michelson_vc::arbitrary;
use michelson_vc::contracts::formula::build::*;
use michelson_vc::contracts::{contract_of, eval_formula, Env, Formula, LogicTable, Val};
use michelson_vc::interp::{run_contract, ExecConfig, Outcome};
use michelson_vc::solver::{run_all, run_one, Job, RunConfig, SolverConfig, Status};
use michelson_vc::syntax::parse_source;
use michelson_vc::typecheck::{typecheck, TypedProgram};
use michelson_vc::vcgen::faithful::{prelude, Render};
use michelson_vc::vcgen::*;
use michelson_vc::Value;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn corpus(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name)
}

fn typed(name: &str) -> TypedProgram {
    let src = std::fs::read_to_string(corpus(name)).unwrap();
    typecheck(&parse_source(&src).unwrap()).unwrap()
}

fn sidecar(name: &str) -> SpecSidecar {
    if name.is_empty() {
        return SpecSidecar::default();
    }
    parse_sidecar(&std::fs::read_to_string(corpus(name)).unwrap()).unwrap()
}

fn z3() -> bool {
    let ok = std::process::Command::new("z3").arg("-version").output().is_ok();
    if !ok {
        eprintln!("z3 not found; skipping");
    }
    ok
}

fn prove(tz: &str, spec: &str, shortcut: bool, cfg: &RunConfig) -> Vec<(String, Status)> {
    let tp = typed(tz);
    let sc = sidecar(spec);
    let out = generate_mono(&tp, &sc).unwrap();
    let jobs = smt_jobs(&out.vcs, &sc.logic, shortcut).unwrap();
    run_all(&jobs, cfg).unwrap().into_iter().map(|v| (v.vc, v.status)).collect()
}

fn not_valid(vs: &[(String, Status)]) -> Vec<&(String, Status)> {
    vs.iter().filter(|(_, s)| *s != Status::Valid).collect()
}

fn check_script(goal: Formula) -> Status {
    let vc = Vc { name: "t".into(), path: None, hypotheses: vec![], goal };
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("t.smt2");
    std::fs::write(&f, emit_smt(&vc, &LogicTable::new()).unwrap()).unwrap();
    run_one(&SolverConfig::new("z3", "z3 -smt2 {file}"), &f, Duration::from_secs(10))
}

#[test]
fn arithmetic_sanity() {
    if !z3() {
        return;
    }
    assert_eq!(check_script(eq(add(int(1), int(1)), int(2))), Status::Valid);
    assert_eq!(check_script(eq(int(0), int(1))), Status::Invalid);
}

#[test]
fn toy_contract_all_valid_in_z3() {
    if !z3() {
        return;
    }
    let cfg = RunConfig { jobs: 4, ..Default::default() };
    let vs = prove("add.tz", "", false, &cfg);
    assert!(!vs.is_empty());
    assert!(not_valid(&vs).is_empty(), "{:?}", not_valid(&vs));
}

#[test]
fn fallback_past_an_unknown_stub() {
    if !z3() {
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let stub = dir.path().join("stub.sh");
    std::fs::write(&stub, "#!/bin/sh\necho unknown\n").unwrap();
    std::process::Command::new("chmod").arg("+x").arg(&stub).status().unwrap();
    let cfg = RunConfig {
        solvers: vec![
            SolverConfig::new("stub", &format!("{} {{file}}", stub.display())),
            SolverConfig::new("z3", "z3 -smt2 {file}"),
        ],
        timeout: Duration::from_secs(10),
        jobs: 4,
    };
    let tp = typed("add.tz");
    let out = generate_mono(&tp, &SpecSidecar::default()).unwrap();
    let jobs = smt_jobs(&out.vcs, &LogicTable::new(), false).unwrap();
    let vs = run_all(&jobs, &cfg).unwrap();
    assert!(vs.iter().all(|v| v.status == Status::Valid && v.prover == "z3"));
    let names: Vec<&str> = vs.iter().map(|v| v.vc.as_str()).collect();
    let mut sorted = names.clone();
    sorted.sort();
    assert_eq!(names, sorted);
}

#[test]
fn only_stub_leaves_unknown() {
    let cfg = RunConfig {
        solvers: vec![SolverConfig::new("stub", "sh -c echo${IFS}unknown {file}")],
        ..Default::default()
    };
    let jobs = vec![Job { name: "a".into(), script: Some("(check-sat)".into()) }];
    assert_eq!(run_all(&jobs, &cfg).unwrap()[0].status, Status::Unknown);
}

#[test]
fn functional_specs_prove() {
    if !z3() {
        return;
    }
    let cfg = RunConfig { jobs: 4, ..Default::default() };
    for (tz, spec) in [("add.tz", "add.spec"), ("identity.tz", "identity.spec"), ("max.tz", "max.spec")] {
        let vs = prove(tz, spec, true, &cfg);
        assert!(vs.iter().any(|(n, _)| n.starts_with("contract:ensures")), "{tz}");
        assert!(not_valid(&vs).is_empty(), "{tz}: {:?}", not_valid(&vs));
    }
}

#[test]
fn factorial_proves_and_weak_invariant_does_not() {
    if !z3() {
        return;
    }
    let cfg = RunConfig { jobs: 4, timeout: Duration::from_secs(30), ..Default::default() };
    let vs = prove("factorial.tz", "factorial.spec", true, &cfg);
    assert!(not_valid(&vs).is_empty(), "{:?}", not_valid(&vs));
    let weak = prove("factorial.tz", "factorial_weak.spec", true, &cfg);
    assert!(!not_valid(&weak).is_empty());
}

#[test]
fn wrong_ensures_is_refuted() {
    if !z3() {
        return;
    }
    let tp = typed("add.tz");
    let sc = parse_sidecar("ensures: storage_out = param").unwrap();
    let out = generate_mono(&tp, &sc).unwrap();
    let jobs = smt_jobs(&out.vcs, &sc.logic, true).unwrap();
    let vs = run_all(&jobs, &RunConfig::default()).unwrap();
    let e = vs.iter().find(|v| v.vc == "contract:ensures.0").unwrap();
    assert_eq!(e.status, Status::Invalid);
}

const WITH_SPECS: [(&str, &str); 13] = [
    ("add.tz", "add.spec"),
    ("identity.tz", "identity.spec"),
    ("factorial.tz", "factorial.spec"),
    ("multisig.tz", "multisig.spec"),
    ("sub_abs.tz", ""),
    ("max.tz", "max.spec"),
    ("counter.tz", ""),
    ("option_default.tz", ""),
    ("ediv.tz", ""),
    ("sum_list.tz", "sum_list.spec"),
    ("mutez_add.tz", ""),
    ("loop_left.tz", "loop_left.spec"),
    ("cmp_macro.tz", ""),
];

/// Every clause of every opcode the mono generator applies is also stated in
/// the faithful prelude.
#[test]
fn faithful_and_mono_cover_the_same_clauses() {
    for (tz, spec) in WITH_SPECS {
        let tp = typed(tz);
        let sc = sidecar(spec);
        let mono = generate_mono(&tp, &sc).unwrap();
        let pre = prelude(tp.code());
        let full = translate_faithful_with(&tp, &sc, &FaithfulOptions { prelude: true, ..Default::default() });
        assert!(full.starts_with(&pre) || full.contains(&pre), "{tz}: prelude missing from output");
        let r = Render::new("__stack__");
        assert!(!mono.applied.is_empty());
        for a in &mono.applied {
            let node = &tp.code().at(&a.path).unwrap().node;
            let c = contract_of(node).unwrap();
            assert_eq!(a.opcode, c.opcode);
            assert_eq!(a.requires, (0..c.requires.len()).collect::<Vec<_>>(), "{tz} {}", a.opcode);
            let fails = tp.after(&a.path).is_none();
            if !fails && !a.ensures.is_empty() {
                assert_eq!(a.ensures, (0..c.ensures.len()).collect::<Vec<_>>(), "{tz} {}", a.opcode);
            }
            let block = pre.split("\n\n").find(|b| b.starts_with(&format!("(* {} *)", c.opcode))).unwrap();
            for f in &c.requires {
                assert!(block.contains(&format!("requires {{ {} }}", r.formula(f))), "{tz} {}", c.opcode);
            }
            for f in &c.ensures {
                assert!(block.contains(&format!("ensures {{ {} }}", r.formula(f))), "{tz} {}", c.opcode);
            }
        }
    }
}

#[test]
fn golden_faithful_toy() {
    let tp = typed("add.tz");
    let got = translate_faithful(&tp, &SpecSidecar::default());
    let want = std::fs::read_to_string(corpus("golden/add.faithful")).unwrap();
    let norm = |s: &str| s.split_whitespace().collect::<Vec<_>>().join(" ");
    assert_eq!(norm(&got), norm(&want));
}

/// When every VC is valid, the contract-level ensures holds on each concrete
/// successful run.
#[test]
fn proved_ensures_hold_on_concrete_runs() {
    if !z3() {
        return;
    }
    let mut rng = StdRng::seed_from_u64(7);
    for (tz, spec) in [("add.tz", "add.spec"), ("identity.tz", "identity.spec"), ("max.tz", "max.spec"), ("factorial.tz", "factorial.spec")] {
        let vs = prove(tz, spec, true, &RunConfig { jobs: 4, timeout: Duration::from_secs(30), ..Default::default() });
        assert!(not_valid(&vs).is_empty());
        let tp = typed(tz);
        let sc = sidecar(spec);
        let c = &tp.contract;
        for _ in 0..200 {
            let p = if tz == "factorial.tz" {
                Value::nat(rng.gen_range(0..20u32)).unwrap()
            } else {
                arbitrary::value(&mut rng, &c.parameter)
            };
            let s = arbitrary::value(&mut rng, &c.storage);
            let out = run_contract(c, p.clone(), s.clone(), &ExecConfig::with_fuel(100_000), None).unwrap();
            let Outcome::Success(st) = out else { continue };
            let Value::Pair(_, storage_out) = st.at(0).unwrap().clone() else { panic!() };
            let mut env = Env::new(&sc.logic);
            env.bind("param", Val::V(p.clone()));
            env.bind("storage_in", Val::V(s.clone()));
            env.bind("storage_out", Val::V(*storage_out));
            for e in &sc.ensures {
                assert!(eval_formula(&e.formula, &env).unwrap(), "{tz}: {} on {p} {s}", e.text);
            }
        }
    }
}
