//! Every opcode's interpreter step satisfies its contract on random stacks
//! that meet the contract's requirements.

use michelson_vc::arbitrary::{leaf_samples, stack_for};
use michelson_vc::contracts::{contract_of, eval_formula, Env, LogicTable};
use michelson_vc::interp::{bind_context, step, ExecConfig};
use rand::rngs::StdRng;
use rand::SeedableRng;

pub const PER_OPCODE: usize = 10_000;

#[test]
fn step_satisfies_contract() {
    let logic = LogicTable::new();
    let cfg = ExecConfig::default();
    let mut rng = StdRng::seed_from_u64(0x5eed);
    for node in leaf_samples() {
        let c = contract_of(&node).unwrap();
        let mut checked = 0;
        let mut failed = 0;
        for _ in 0..PER_OPCODE {
            let s = stack_for(&node, &mut rng);
            let mut env = Env::new(&logic).with_stacks(Some(&s), None);
            bind_context(&mut env, &cfg, 1);
            for r in &c.requires {
                assert!(eval_formula(r, &env).unwrap(), "{}: generated stack violates requires {r}\n{s}", c.opcode);
            }
            let fails = eval_formula(&c.fails_if, &env).unwrap();
            let out = step(&node, &s, &cfg).unwrap();
            match out {
                Err(v) => {
                    assert!(fails, "{} failed with {v} but fails_if is false on\n{s}", c.opcode);
                    failed += 1;
                }
                Ok(r) => {
                    assert!(!fails, "{} succeeded although fails_if holds on\n{s}", c.opcode);
                    let mut env = Env::new(&logic).with_stacks(Some(&s), Some(&r));
                    bind_context(&mut env, &cfg, 1);
                    for e in &c.ensures {
                        assert!(eval_formula(e, &env).unwrap(), "{}: ensures {e} fails\ninput:\n{s}result:\n{r}", c.opcode);
                    }
                }
            }
            checked += 1;
        }
        assert_eq!(checked, PER_OPCODE);
        if c.may_fail() && c.opcode != "FAILWITH" {
            assert!(failed > 0 || c.opcode == "EDIV", "{} never failed", c.opcode);
        }
    }
}

#[test]
fn arithmetic_guards_are_mutually_exclusive() {
    use michelson_vc::contracts::Formula;
    use michelson_vc::syntax::Node;
    use michelson_vc::{Stack, Ty, Value};
    let logic = LogicTable::new();
    let atoms = [Ty::Int, Ty::Nat, Ty::Mutez, Ty::Timestamp, Ty::Bool, Ty::String];
    let sample = |t: &Ty| match t {
        Ty::Int => Value::int(1),
        Ty::Nat => Value::Nat(1.into()),
        Ty::Mutez => Value::Mutez(1),
        Ty::Timestamp => Value::Timestamp(1.into()),
        Ty::Bool => Value::Bool(true),
        _ => Value::String("x".into()),
    };
    for node in [Node::Add, Node::Sub, Node::Mul, Node::Ediv] {
        let c = contract_of(&node).unwrap();
        let cases: Vec<&Formula> = c
            .requires
            .iter()
            .filter_map(|r| match r {
                Formula::Cases(cs) => Some(cs.iter().map(|(g, _)| g)),
                _ => None,
            })
            .flatten()
            .collect();
        assert!(!cases.is_empty());
        for a in &atoms {
            for b in &atoms {
                let s = Stack::from_top(vec![sample(a), sample(b)]);
                let env = Env::new(&logic).with_stacks(Some(&s), None);
                let n = cases.iter().filter(|g| eval_formula(g, &env).unwrap()).count();
                assert!(n <= 1, "{} has {n} guards holding on {a}/{b}", c.opcode);
            }
        }
    }
}

#[test]
fn every_result_slot_is_pinned() {
    use michelson_vc::contracts::frame_audit;
    for node in leaf_samples() {
        let c = contract_of(&node).unwrap();
        if c.opcode == "FAILWITH" {
            continue;
        }
        for len in 4..8 {
            assert!(frame_audit(&c, len).is_empty(), "{} leaves slots {:?} free", c.opcode, frame_audit(&c, len));
        }
    }
}
