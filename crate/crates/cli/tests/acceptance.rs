//! Acceptance suite: one PASS/FAIL line per criterion.

use std::path::PathBuf;
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use michelson_vc::arbitrary::{self, leaf_samples, stack_for};
use michelson_vc::contracts::{contract_of, eval_formula, Env, LogicTable};
use michelson_vc::interp::{bind_context, run_contract, step, ExecConfig, Outcome, TraceEvent};
use michelson_vc::model::{compare, compare_bool, Comparable, MUTEZ_MAX};
use michelson_vc::syntax::{parse_source, parse_type, pretty_print, Node};
use michelson_vc::typecheck::{derive_safety_spec, typecheck, SafetySpec};
use michelson_vc::{Stack, Ty, Value};
use num_bigint::BigInt;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

type Outcome_ = Result<String, String>;

fn corpus(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name)
}

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_michelson-vc")).args(args).output().expect("spawn cli")
}

fn path(name: &str) -> String {
    corpus(name).to_string_lossy().into_owned()
}

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

const CORPUS: [&str; 13] = [
    "add.tz",
    "identity.tz",
    "factorial.tz",
    "multisig.tz",
    "sub_abs.tz",
    "max.tz",
    "counter.tz",
    "option_default.tz",
    "ediv.tz",
    "sum_list.tz",
    "mutez_add.tz",
    "loop_left.tz",
    "cmp_macro.tz",
];

fn ac1() -> Outcome_ {
    let t = Instant::now();
    let out = cli(&["vcgen", "--mode", "faithful", &path("add.tz")]);
    let el = t.elapsed();
    ensure(out.status.success(), String::from_utf8_lossy(&out.stderr))?;
    let want = std::fs::read_to_string(corpus("golden/add.faithful")).map_err(|e| e.to_string())?;
    let norm = |s: &str| s.split_whitespace().collect::<Vec<_>>().join(" ");
    ensure(norm(&String::from_utf8_lossy(&out.stdout)) == norm(&want), "output differs from golden file")?;
    ensure(el < Duration::from_secs(1), format!("took {el:?}"))?;
    Ok(format!("golden match in {} ms", el.as_millis()))
}

/// The declared types, read straight from the source text.
fn declared(src: &str, section: &str) -> Ty {
    let start = src.find(&format!("{section} ")).expect("section") + section.len();
    let end = start + src[start..].find(';').expect("terminator");
    parse_type(src[start..end].trim()).expect("type")
}

fn ac2() -> Outcome_ {
    let ten = &CORPUS[..10];
    for f in ten {
        let src = std::fs::read_to_string(corpus(f)).map_err(|e| e.to_string())?;
        let tp = typecheck(&parse_source(&src).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        let (p, s) = (declared(&src, "parameter"), declared(&src, "storage"));
        let want = SafetySpec {
            input_len: 1,
            input_ty: Ty::Pair(Box::new(p), Box::new(s.clone())),
            fuel_positive: true,
            output_len: 1,
            output_ty: Ty::Pair(Box::new(Ty::List(Box::new(Ty::Operation))), Box::new(s)),
        };
        ensure(derive_safety_spec(&tp) == want, format!("{f}: {}", derive_safety_spec(&tp)))?;
    }
    Ok(format!("{} contracts", ten.len()))
}

/// Small exhaustive domains per comparable type.
fn domain(c: Comparable) -> Vec<Value> {
    let ints = -3..=3;
    match c {
        Comparable::Int => ints.map(Value::int).collect(),
        Comparable::Nat => (0..=6).map(|n| Value::nat(n).unwrap()).collect(),
        Comparable::Mutez => vec![0, 1, 2, 1000, MUTEZ_MAX - 1, MUTEZ_MAX].into_iter().map(Value::Mutez).collect(),
        Comparable::Timestamp => ints.map(|n| Value::Timestamp(BigInt::from(n))).collect(),
        Comparable::Bool => vec![Value::Bool(false), Value::Bool(true)],
        Comparable::String => ["", "a", "ab", "b", "ba"].iter().map(|s| Value::String(s.to_string())).collect(),
        Comparable::Bytes => vec![vec![], vec![0], vec![0, 0], vec![1], vec![0xff]].into_iter().map(Value::Bytes).collect(),
        Comparable::KeyHash => ["tz1a", "tz1b", "tz1c"].iter().map(|s| Value::KeyHash(s.to_string())).collect(),
        Comparable::Address => ["KT1a", "tz1a", "tz1b"].iter().map(|s| Value::Address(s.to_string())).collect(),
    }
}

fn ac3() -> Outcome_ {
    // false < true, written out.
    let table = [((false, false), 0), ((false, true), -1), ((true, false), 1), ((true, true), 0)];
    for ((a, b), want) in table {
        ensure(compare_bool(a, b) == want, format!("compare_bool {a} {b}"))?;
        ensure(compare(&Value::Bool(a), &Value::Bool(b)) == Ok(want), format!("compare {a} {b}"))?;
    }
    let mut checks = 0usize;
    for c in Comparable::ALL {
        let d = domain(c);
        for x in &d {
            for y in &d {
                let xy = compare(x, y).map_err(|e| e.to_string())?;
                ensure(xy == -compare(y, x).unwrap(), format!("antisymmetry {x} {y}"))?;
                ensure((xy == 0) == (x == y), format!("zero iff equal {x} {y}"))?;
                for z in &d {
                    if xy <= 0 && compare(y, z).unwrap() <= 0 {
                        ensure(compare(x, z).unwrap() <= 0, format!("transitivity {x} {y} {z}"))?;
                    }
                    checks += 1;
                }
            }
        }
    }
    Ok(format!("{checks} triples over {} types", Comparable::ALL.len()))
}

fn factorial(n: u64) -> BigInt {
    let mut acc = BigInt::from(1);
    for i in 2..=n {
        acc *= i;
    }
    acc
}

fn ac4() -> Outcome_ {
    let t = Instant::now();
    for n in 0..=10u64 {
        let out = cli(&["run", &path("factorial.tz"), "--parameter", &n.to_string(), "--storage", "0", "--check-contracts"]);
        ensure(out.status.success(), format!("n={n}: {}", String::from_utf8_lossy(&out.stderr)))?;
        let want = format!("Pair {{}} {}", factorial(n));
        ensure(String::from_utf8_lossy(&out.stdout).trim() == want, format!("n={n}: got {}", String::from_utf8_lossy(&out.stdout)))?;
    }
    let el = t.elapsed();
    ensure(el < Duration::from_secs(1), format!("took {el:?}"))?;
    Ok(format!("n = 0..10 in {} ms, no violations", el.as_millis()))
}

fn ac5() -> Outcome_ {
    const PER_OPCODE: usize = 10_000;
    let t = Instant::now();
    let logic = LogicTable::new();
    let cfg = ExecConfig::default();
    let mut rng = StdRng::seed_from_u64(0xac5);
    let samples = leaf_samples();
    let mut violations = 0usize;
    for node in &samples {
        let c = contract_of(node).map_err(|e| e.0)?;
        for _ in 0..PER_OPCODE {
            let s = stack_for(node, &mut rng);
            let mut env = Env::new(&logic).with_stacks(Some(&s), None);
            bind_context(&mut env, &cfg, 1);
            if !c.requires.iter().all(|r| eval_formula(r, &env).unwrap_or(false)) {
                return Err(format!("{}: generator broke requires", c.opcode));
            }
            let fails = eval_formula(&c.fails_if, &env).map_err(|e| e.to_string())?;
            match step(node, &s, &cfg).map_err(|e| format!("{}: {e}", c.opcode))? {
                Err(_) => violations += usize::from(!fails),
                Ok(r) => {
                    let mut env = Env::new(&logic).with_stacks(Some(&s), Some(&r));
                    bind_context(&mut env, &cfg, 1);
                    let ok = !fails && c.ensures.iter().all(|e| eval_formula(e, &env).unwrap_or(false));
                    violations += usize::from(!ok);
                }
            }
        }
    }
    let el = t.elapsed();
    ensure(violations == 0, format!("{violations} violations"))?;
    ensure(el < Duration::from_secs(120), format!("took {el:?}"))?;
    Ok(format!("{} opcodes x {PER_OPCODE} stacks in {:.1} s", samples.len(), el.as_secs_f64()))
}

fn ac6() -> Outcome_ {
    let cfg = ExecConfig::default();
    let run = |node: Node, top: i64, second: i64| step(&node, &Stack::from_top(vec![Value::Mutez(top), Value::Mutez(second)]), &cfg);
    let add = run(Node::Add, MUTEZ_MAX, 1)?;
    ensure(add == Err(Value::String("mutez overflow in ADD".into())), format!("ADD gave {add:?}"))?;
    let sub = run(Node::Sub, 0, 1)?;
    ensure(matches!(sub, Err(Value::String(_))), format!("SUB gave {sub:?}"))?;
    let ok = run(Node::Add, MUTEZ_MAX - 1, 1)?;
    ensure(ok.is_ok(), "ADD at the bound failed")?;
    let out = cli(&["run", &path("mutez_add.tz"), "--parameter", &MUTEZ_MAX.to_string(), "--storage", "1"]);
    ensure(out.status.code() == Some(4), format!("cli exit {:?}", out.status.code()))?;
    Ok("ADD overflow and SUB underflow fail".into())
}

fn proof_run(args: &[&str]) -> Result<(i32, String), String> {
    let out = cli(args);
    let text = String::from_utf8_lossy(&out.stdout).into_owned();
    let code = out.status.code().ok_or("killed")?;
    if code != 0 && code != 7 {
        return Err(format!("exit {code}: {}", String::from_utf8_lossy(&out.stderr)));
    }
    Ok((code, text))
}

fn summary_line(text: &str) -> String {
    text.lines().find(|l| l.contains(" VCs: ")).unwrap_or("").to_string()
}

fn ac7() -> Outcome_ {
    let (code, text) = proof_run(&["prove", &path("add.tz"), "--timeout", "10", "--no-simplify", "--jobs", "4", "--no-times"])?;
    ensure(code == 0, format!("not all valid: {}", summary_line(&text)))?;
    ensure(text.contains("z3"), "no external solver answered")?;
    Ok(summary_line(&text))
}

fn ac8() -> Outcome_ {
    let f = path("factorial.tz");
    let (code, text) =
        proof_run(&["prove", &f, "--spec", &path("factorial.spec"), "--timeout", "30", "--jobs", "4", "--no-times"])?;
    ensure(code == 0, format!("not all valid: {}", summary_line(&text)))?;
    let (weak, wtext) =
        proof_run(&["prove", &f, "--spec", &path("factorial_weak.spec"), "--timeout", "30", "--jobs", "4", "--no-times"])?;
    ensure(weak == 7, "weakened invariant still proves")?;
    let failing = wtext.lines().filter(|l| l.starts_with("not proved")).count();
    Ok(format!("{}; negative control: {failing} not proved", summary_line(&text)))
}

fn random_value<R: Rng>(rng: &mut R, t: &Ty, file: &str) -> Value {
    if file == "factorial.tz" || file == "loop_left.tz" {
        return Value::nat(rng.gen_range(0..30u32)).unwrap();
    }
    arbitrary::value(rng, t)
}

fn ac9() -> Outcome_ {
    let mut rng = StdRng::seed_from_u64(9);
    let (mut points, mut mismatches) = (0usize, Vec::new());
    for f in CORPUS {
        let c = parse_source(&std::fs::read_to_string(corpus(f)).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        let tp = typecheck(&c).map_err(|e| e.to_string())?;
        for _ in 0..50 {
            let p = random_value(&mut rng, &c.parameter, f);
            let s = random_value(&mut rng, &c.storage, f);
            let mut obs = |ev: &TraceEvent| {
                points += 1;
                let got: Vec<Ty> = ev.stack.iter().map(|v| v.typ_infer()).collect();
                if tp.after(ev.path) != Some(&got) {
                    mismatches.push(format!("{f} at {}", ev.path));
                }
            };
            run_contract(&c, p, s, &ExecConfig::with_fuel(100_000), Some(&mut obs)).map_err(|e| format!("{f}: {e}"))?;
        }
    }
    ensure(mismatches.is_empty(), format!("{} mismatches, first {}", mismatches.len(), mismatches.first().cloned().unwrap_or_default()))?;
    Ok(format!("{points} executed points, 0 mismatches"))
}

fn ac10() -> Outcome_ {
    let mut n = 0;
    let mut check = |c: &michelson_vc::Contract, what: &str| -> Result<(), String> {
        let printed = pretty_print(c);
        let again = parse_source(&printed).map_err(|e| format!("{what}: {e}\n{printed}"))?;
        ensure(&again == c, format!("{what}: tree changed\n{printed}"))?;
        ensure(pretty_print(&again) == printed, format!("{what}: printing is not a fixpoint"))?;
        n += 1;
        Ok(())
    };
    for f in CORPUS {
        let c = parse_source(&std::fs::read_to_string(corpus(f)).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        check(&c, f)?;
    }
    let mut rng = StdRng::seed_from_u64(10);
    for k in 0..1000 {
        let c = arbitrary::contract(&mut rng, 12);
        typecheck(&c).map_err(|e| format!("generated program {k} is ill-typed: {e}"))?;
        check(&c, &format!("generated program {k}"))?;
    }
    Ok(format!("{n} programs"))
}

fn ac11() -> Outcome_ {
    let c = parse_source(&std::fs::read_to_string(corpus("factorial.tz")).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let run = |n: u32, fuel: u64| run_contract(&c, Value::nat(n).unwrap(), Value::nat(0).unwrap(), &ExecConfig::with_fuel(fuel), None);
    let low = run(5, 3).map_err(|e| e.to_string())?;
    ensure(low == Outcome::FuelExhausted, format!("fuel 3 gave {low:?}"))?;
    let mut rng = StdRng::seed_from_u64(11);
    let mut cases = 0;
    while cases < 100 {
        let n = rng.gen_range(0..12u32);
        let f = rng.gen_range(1..400u64);
        let a = run(n, f).map_err(|e| e.to_string())?;
        if !a.is_success() {
            ensure(a == Outcome::FuelExhausted, format!("n={n} fuel={f}: {a:?}"))?;
            continue;
        }
        let g = f + rng.gen_range(1..10_000u64);
        let b = run(n, g).map_err(|e| e.to_string())?;
        ensure(a == b, format!("n={n}: fuel {f} and {g} disagree"))?;
        cases += 1;
    }
    Ok(format!("fuel 3 exhausts; {cases} monotonicity samples agree"))
}

fn main() {
    let criteria: [(&str, &str, fn() -> Outcome_); 11] = [
        ("AC1", "golden faithful translation", ac1),
        ("AC2", "safety-spec inference", ac2),
        ("AC3", "comparison semantics", ac3),
        ("AC4", "factorial execution", ac4),
        ("AC5", "opcode conformance fuzzing", ac5),
        ("AC6", "mutez overflow", ac6),
        ("AC7", "toy contract proof", ac7),
        ("AC8", "factorial functional proof", ac8),
        ("AC9", "typecheck/runtime agreement", ac9),
        ("AC10", "parser round-trip", ac10),
        ("AC11", "fuel semantics", ac11),
    ];
    let mut failed = 0;
    for (id, what, f) in criteria {
        match f() {
            Ok(detail) => println!("{id:<5} PASS  {what}: {detail}"),
            Err(e) => {
                failed += 1;
                println!("{id:<5} FAIL  {what}: {e}");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
