//! Fuel-bounded interpreter with an optional runtime contract check.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::contracts::{contract_of, eval_formula, Env, EvalError, LogicTable, OpcodeContract, Val};
use crate::model::{compare, crypto, Operation, Ty, Value, MUTEZ_MAX};
use crate::stack::Stack;
use crate::syntax::{expand_macros, Contract, Instr, Node, Path};

/// Execution parameters. Context values are what `AMOUNT`, `NOW`, `SELF`
/// and friends push.
#[derive(Debug, Clone)]
pub struct ExecConfig {
    pub fuel: u64,
    pub amount: i64,
    pub balance: i64,
    pub now: BigInt,
    pub sender: String,
    pub source: String,
    pub self_address: String,
    pub chain_id: String,
    /// Parameter type of the running contract, the type argument of `SELF`.
    pub self_param: Ty,
    pub check_contracts: bool,
    /// Replacement contracts keyed by opcode name, used instead of the
    /// built-in table when checking.
    pub contract_overrides: BTreeMap<String, OpcodeContract>,
}

impl Default for ExecConfig {
    fn default() -> Self {
        ExecConfig {
            fuel: 10_000,
            amount: 0,
            balance: 0,
            now: BigInt::zero(),
            sender: "tz1sender".into(),
            source: "tz1source".into(),
            self_address: "KT1self".into(),
            chain_id: "NetXdQprcVkpaWU".into(),
            self_param: Ty::Unit,
            check_contracts: false,
            contract_overrides: BTreeMap::new(),
        }
    }
}

impl ExecConfig {
    pub fn with_fuel(fuel: u64) -> ExecConfig {
        ExecConfig {
            fuel,
            ..ExecConfig::default()
        }
    }

    pub fn self_value(&self) -> Value {
        Value::Contract(self.self_address.clone(), self.self_param.clone())
    }

    fn context(&self, node: &Node) -> Option<Value> {
        Some(match node {
            Node::Amount => Value::Mutez(self.amount),
            Node::Balance => Value::Mutez(self.balance),
            Node::Now => Value::Timestamp(self.now.clone()),
            Node::Sender => Value::Address(self.sender.clone()),
            Node::Source => Value::Address(self.source.clone()),
            Node::ChainId => Value::ChainId(self.chain_id.clone()),
            Node::SelfContract => self.self_value(),
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Success(Stack),
    Failed(Value),
    FuelExhausted,
    ContractViolation { path: Path, opcode: String, clause: String },
}

impl Outcome {
    pub fn is_success(&self) -> bool {
        matches!(self, Outcome::Success(_))
    }
}

/// The program went wrong in a way a well-typed program cannot.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExecError {
    #[error("at {path}: {opcode} cannot run on this stack: {reason}")]
    Stuck { path: Path, opcode: String, reason: String },
    #[error("at {path}: cannot evaluate contract clause of {opcode}: {source}")]
    ContractEval { path: Path, opcode: String, source: EvalError },
    #[error("{what} has type {found}, expected {expected}")]
    InputType { what: &'static str, expected: Ty, found: Ty },
    #[error("final stack {found} does not have the contract result shape {expected}")]
    ResultShape { expected: Ty, found: String },
}

/// One executed leaf, reported after the step.
#[derive(Debug)]
pub struct TraceEvent<'a> {
    pub path: &'a Path,
    pub instr: &'a Instr,
    pub stack: &'a Stack,
    pub fuel_left: u64,
}

fn stuck(reason: impl Into<String>) -> String {
    reason.into()
}

fn mutez_checked(n: BigInt, what: &str) -> Result<Value, Value> {
    match i64::try_from(&n) {
        Ok(m) if m >= 0 && m <= MUTEZ_MAX => Ok(Value::Mutez(m)),
        _ if n.is_negative() => Err(Value::String(format!("mutez underflow in {what}"))),
        _ => Err(Value::String(format!("mutez overflow in {what}"))),
    }
}

/// Result of one leaf: the new stack or the failure value.
pub type StepResult = Result<Stack, Value>;

/// Executes one leaf instruction. `UNPAIR` counts as a leaf.
pub fn step(node: &Node, s: &Stack, cfg: &ExecConfig) -> Result<StepResult, String> {
    let at = |i: usize| s.at(i).map_err(|e| stuck(e.to_string()));
    let rest = |n: usize| s.drop_n(n).map_err(|e| stuck(e.to_string()));
    let push1 = |n: usize, v: Value| -> Result<StepResult, String> { Ok(Ok(rest(n)?.push(v))) };
    let bad = || Err(stuck(format!("unexpected operand types {}", fmt_top(s, 3))));
    match node {
        Node::Car | Node::Cdr => match at(0)? {
            Value::Pair(a, b) => push1(1, if matches!(node, Node::Car) { (**a).clone() } else { (**b).clone() }),
            _ => bad(),
        },
        Node::Unpair => match at(0)? {
            Value::Pair(a, b) => Ok(Ok(rest(1)?.push_all(vec![(**a).clone(), (**b).clone()]))),
            _ => bad(),
        },
        Node::Pair => push1(2, Value::pair(at(0)?.clone(), at(1)?.clone())),
        Node::Dup(n) => {
            if *n == 0 {
                return Err(stuck("DUP 0"));
            }
            Ok(Ok(s.push(at(n - 1)?.clone())))
        }
        Node::Swap => Ok(Ok(rest(2)?.push_all(vec![at(1)?.clone(), at(0)?.clone()]))),
        Node::Dig(n) => {
            let mut top = s.take(n + 1).map_err(|e| stuck(e.to_string()))?;
            let x = top.remove(*n);
            top.insert(0, x);
            Ok(Ok(rest(n + 1)?.push_all(top)))
        }
        Node::Dug(n) => {
            let mut top = s.take(n + 1).map_err(|e| stuck(e.to_string()))?;
            let x = top.remove(0);
            top.insert(*n, x);
            Ok(Ok(rest(n + 1)?.push_all(top)))
        }
        Node::Drop(n) => Ok(Ok(rest(*n)?)),
        Node::Push(_, v) => Ok(Ok(s.push(v.clone()))),
        Node::Unit => Ok(Ok(s.push(Value::Unit))),
        Node::Nil(t) => Ok(Ok(s.push(Value::List(Vec::new(), t.clone())))),
        Node::Cons => match (at(0)?, at(1)?) {
            (x, Value::List(xs, t)) if x.typ_infer() == *t => {
                let mut ys = Vec::with_capacity(xs.len() + 1);
                ys.push(x.clone());
                ys.extend(xs.iter().cloned());
                push1(2, Value::List(ys, t.clone()))
            }
            _ => bad(),
        },
        Node::Left(t) => push1(1, Value::Left(Box::new(at(0)?.clone()), t.clone())),
        Node::Right(t) => push1(1, Value::Right(Box::new(at(0)?.clone()), t.clone())),
        Node::Some => push1(1, Value::some(at(0)?.clone())),
        Node::None(t) => Ok(Ok(s.push(Value::None(t.clone())))),
        Node::Compare => match compare(at(0)?, at(1)?) {
            Ok(c) => push1(2, Value::int(c)),
            Err(e) => Err(stuck(e.to_string())),
        },
        Node::Test(c) => match at(0)? {
            Value::Int(n) => push1(1, Value::Bool(c.holds(n.cmp(&BigInt::zero())))),
            _ => bad(),
        },
        Node::Add | Node::Sub | Node::Mul => {
            let (a, b) = (at(0)?, at(1)?);
            let name = node.name();
            let r = match (node, a, b) {
                (Node::Add, Value::Nat(x), Value::Nat(y)) => Ok(Value::Nat(x + y)),
                (Node::Mul, Value::Nat(x), Value::Nat(y)) => Ok(Value::Nat(x * y)),
                (_, Value::Int(_) | Value::Nat(_), Value::Int(_) | Value::Nat(_)) => {
                    let (x, y) = (a.as_integer().unwrap(), b.as_integer().unwrap());
                    Ok(Value::Int(match node {
                        Node::Add => x + y,
                        Node::Sub => x - y,
                        _ => x * y,
                    }))
                }
                (Node::Add, Value::Mutez(x), Value::Mutez(y)) => mutez_checked(BigInt::from(*x) + y, name),
                (Node::Sub, Value::Mutez(x), Value::Mutez(y)) => mutez_checked(BigInt::from(*x) - y, name),
                (Node::Mul, Value::Mutez(x), Value::Nat(y)) | (Node::Mul, Value::Nat(y), Value::Mutez(x)) => {
                    mutez_checked(BigInt::from(*x) * y, name)
                }
                (Node::Add, Value::Timestamp(t), Value::Int(i)) | (Node::Add, Value::Int(i), Value::Timestamp(t)) => {
                    Ok(Value::Timestamp(t + i))
                }
                (Node::Sub, Value::Timestamp(t), Value::Int(i)) => Ok(Value::Timestamp(t - i)),
                (Node::Sub, Value::Timestamp(t), Value::Timestamp(u)) => Ok(Value::Int(t - u)),
                _ => return bad(),
            };
            match r {
                Ok(v) => push1(2, v),
                Err(e) => Ok(Err(e)),
            }
        }
        Node::Ediv => {
            let (a, b) = (at(0)?, at(1)?);
            let (x, y) = match (a.as_integer(), b.as_integer()) {
                (Some(x), Some(y)) => (x, y),
                _ => return bad(),
            };
            let kinds = match (a, b) {
                (Value::Nat(_), Value::Nat(_)) => (Ty::Nat, Ty::Nat),
                (Value::Int(_) | Value::Nat(_), Value::Int(_) | Value::Nat(_)) => (Ty::Int, Ty::Nat),
                (Value::Mutez(_), Value::Nat(_)) => (Ty::Mutez, Ty::Mutez),
                (Value::Mutez(_), Value::Mutez(_)) => (Ty::Nat, Ty::Mutez),
                _ => return bad(),
            };
            if y.is_zero() {
                return push1(2, Value::None(Ty::pair(kinds.0, kinds.1)));
            }
            let mut r = &x % &y;
            if r.is_negative() {
                r += y.abs();
            }
            let q = (&x - &r) / &y;
            let make = |t: &Ty, n: BigInt| match t {
                Ty::Nat => Value::Nat(n),
                Ty::Int => Value::Int(n),
                _ => Value::Mutez(i64::try_from(&n).expect("quotient of mutez fits")),
            };
            push1(2, Value::some(Value::pair(make(&kinds.0, q), make(&kinds.1, r))))
        }
        Node::Neg => match at(0)? {
            Value::Int(n) | Value::Nat(n) => push1(1, Value::Int(-n)),
            _ => bad(),
        },
        Node::Abs => match at(0)? {
            Value::Int(n) => push1(1, Value::Nat(n.abs())),
            _ => bad(),
        },
        Node::IsNat => match at(0)? {
            Value::Int(n) if n.is_negative() => push1(1, Value::None(Ty::Nat)),
            Value::Int(n) => push1(1, Value::some(Value::Nat(n.clone()))),
            _ => bad(),
        },
        Node::Int => match at(0)? {
            Value::Nat(n) => push1(1, Value::Int(n.clone())),
            _ => bad(),
        },
        Node::And | Node::Or | Node::Xor => match (at(0)?, at(1)?) {
            (Value::Bool(x), Value::Bool(y)) => push1(
                2,
                Value::Bool(match node {
                    Node::And => *x && *y,
                    Node::Or => *x || *y,
                    _ => x != y,
                }),
            ),
            _ => bad(),
        },
        Node::Not => match at(0)? {
            Value::Bool(x) => push1(1, Value::Bool(!x)),
            _ => bad(),
        },
        Node::Mem => {
            let k = at(0)?;
            let found = match at(1)? {
                Value::Set(xs, _) => xs.iter().any(|x| x == k),
                Value::Map(es, ..) | Value::BigMap(es, ..) => es.iter().any(|(x, _)| x == k),
                _ => return bad(),
            };
            push1(2, Value::Bool(found))
        }
        Node::Get => {
            let k = at(0)?;
            match at(1)? {
                Value::Map(es, _, vt) | Value::BigMap(es, _, vt) => push1(
                    2,
                    es.iter()
                        .find(|(x, _)| x == k)
                        .map_or(Value::None(vt.clone()), |(_, v)| Value::some(v.clone())),
                ),
                _ => bad(),
            }
        }
        Node::Update => {
            let (k, x, c) = (at(0)?.clone(), at(1)?.clone(), at(2)?.clone());
            let out = match (x, c) {
                (Value::Bool(b), Value::Set(mut xs, ct)) => {
                    xs.retain(|e| *e != k);
                    if b {
                        xs.push(k);
                    }
                    Value::set(xs, ct).map_err(|e| e.to_string())?
                }
                (x @ (Value::Some(_) | Value::None(_)), Value::Map(mut es, kt, vt))
                | (x @ (Value::Some(_) | Value::None(_)), Value::BigMap(mut es, kt, vt)) => {
                    let big = matches!(at(2)?, Value::BigMap(..));
                    es.retain(|(e, _)| *e != k);
                    if let Value::Some(v) = x {
                        es.push((k, *v));
                    }
                    match Value::map(es, kt, vt).map_err(|e| e.to_string())? {
                        Value::Map(es, kt, vt) if big => Value::BigMap(es, kt, vt),
                        m => m,
                    }
                }
                _ => return bad(),
            };
            push1(3, out)
        }
        Node::Size => match crypto::size(at(0)?) {
            Some(n) => push1(1, Value::Nat(n.into())),
            None => bad(),
        },
        Node::Concat => match crypto::concat(at(0)?, at(1)?) {
            Some(v) => push1(2, v),
            None => bad(),
        },
        Node::Failwith => Ok(Err(at(0)?.clone())),
        Node::Sha256 | Node::Sha512 | Node::Blake2b => {
            let x = at(0)?;
            if x.typ_infer() != Ty::Bytes {
                return bad();
            }
            let tag = match node {
                Node::Sha256 => crypto::HASH_TAGS[0],
                Node::Sha512 => crypto::HASH_TAGS[1],
                _ => crypto::HASH_TAGS[2],
            };
            push1(1, crypto::hash(tag, x))
        }
        Node::HashKey => match at(0)? {
            k @ Value::Key(_) => push1(1, crypto::hash_key(k)),
            _ => bad(),
        },
        Node::CheckSignature => {
            let (k, sig, p) = (at(0)?, at(1)?, at(2)?);
            if k.typ_infer() != Ty::Key || sig.typ_infer() != Ty::Signature || p.typ_infer() != Ty::Bytes {
                return bad();
            }
            push1(3, Value::Bool(crypto::check_signature(k, sig, p)))
        }
        Node::Pack => push1(1, crypto::pack(at(0)?)),
        Node::Unpack(t) => {
            let x = at(0)?;
            if x.typ_infer() != Ty::Bytes {
                return bad();
            }
            push1(1, crypto::unpack(x, t))
        }
        Node::Amount
        | Node::Balance
        | Node::Now
        | Node::Sender
        | Node::Source
        | Node::ChainId
        | Node::SelfContract => Ok(Ok(s.push(cfg.context(node).expect("context instruction")))),
        Node::TransferTokens => {
            let (p, a, d) = (at(0)?, at(1)?, at(2)?);
            match (a, d) {
                (Value::Mutez(_), Value::Contract(_, t)) if p.typ_infer() == *t => push1(
                    3,
                    Value::Operation(Box::new(Operation::Transfer {
                        parameter: p.clone(),
                        amount: a.clone(),
                        destination: d.clone(),
                    })),
                ),
                _ => bad(),
            }
        }
        Node::SetDelegate => match at(0)? {
            d @ (Value::Some(_) | Value::None(_)) if d.typ_infer() == Ty::option(Ty::KeyHash) => {
                push1(1, Value::Operation(Box::new(Operation::SetDelegate(d.clone()))))
            }
            _ => bad(),
        },
        other => Err(stuck(format!("{} is not a leaf instruction", other.name()))),
    }
}

fn fmt_top(s: &Stack, n: usize) -> String {
    let parts: Vec<_> = s.iter().take(n).map(|v| format!("{v} : {}", v.typ_infer())).collect();
    format!("[{}]", parts.join(", "))
}

enum Halt {
    Failed(Value),
    Fuel,
    Violation { path: Path, opcode: String, clause: String },
    Error(ExecError),
}

type Observer<'o> = &'o mut dyn FnMut(&TraceEvent);

struct Machine<'c, 'o> {
    cfg: &'c ExecConfig,
    fuel: u64,
    observer: Option<Observer<'o>>,
    contracts: HashMap<Path, OpcodeContract>,
    logic: LogicTable,
}

impl<'c, 'o> Machine<'c, 'o> {
    fn run(&mut self, i: &Instr, path: &Path, s: Stack) -> Result<Stack, Halt> {
        match &i.node {
            Node::Seq(a, b) => {
                let s = self.run(a, &path.child(0), s)?;
                self.run(b, &path.child(1), s)
            }
            Node::Nop => Ok(s),
            Node::Dip(n, body) => {
                let top = s.take(*n).map_err(|e| self.stuck(path, i, e.to_string()))?;
                let below = s.drop_n(*n).map_err(|e| self.stuck(path, i, e.to_string()))?;
                let out = self.run(body, &path.child(0), below)?;
                Ok(out.push_all(top))
            }
            Node::If(a, b) => match s.top() {
                Ok(Value::Bool(c)) => {
                    let (arm, ix) = if *c { (a, 0) } else { (b, 1) };
                    self.run(arm, &path.child(ix), s.drop_n(1).unwrap())
                }
                _ => Err(self.stuck(path, i, "IF needs a bool on top")),
            },
            Node::IfNone(a, b) => match s.top() {
                Ok(Value::None(_)) => self.run(a, &path.child(0), s.drop_n(1).unwrap()),
                Ok(Value::Some(x)) => {
                    let x = (**x).clone();
                    self.run(b, &path.child(1), s.drop_n(1).unwrap().push(x))
                }
                _ => Err(self.stuck(path, i, "IF_NONE needs an option on top")),
            },
            Node::IfLeft(a, b) => match s.top() {
                Ok(Value::Left(x, _)) => {
                    let x = (**x).clone();
                    self.run(a, &path.child(0), s.drop_n(1).unwrap().push(x))
                }
                Ok(Value::Right(x, _)) => {
                    let x = (**x).clone();
                    self.run(b, &path.child(1), s.drop_n(1).unwrap().push(x))
                }
                _ => Err(self.stuck(path, i, "IF_LEFT needs an or on top")),
            },
            Node::IfCons(a, b) => match s.top() {
                Ok(Value::List(xs, t)) => match xs.split_first() {
                    Some((h, tl)) => {
                        let st = s.drop_n(1).unwrap().push_all(vec![h.clone(), Value::List(tl.to_vec(), t.clone())]);
                        self.run(a, &path.child(0), st)
                    }
                    None => self.run(b, &path.child(1), s.drop_n(1).unwrap()),
                },
                _ => Err(self.stuck(path, i, "IF_CONS needs a list on top")),
            },
            Node::Loop(body) => {
                let mut s = s;
                loop {
                    match s.top() {
                        Ok(Value::Bool(true)) => s = self.run(body, &path.child(0), s.drop_n(1).unwrap())?,
                        Ok(Value::Bool(false)) => return Ok(s.drop_n(1).unwrap()),
                        _ => return Err(self.stuck(path, i, "LOOP needs a bool on top")),
                    }
                }
            }
            Node::LoopLeft(body) => {
                let mut s = s;
                loop {
                    match s.top() {
                        Ok(Value::Left(x, _)) => {
                            let x = (**x).clone();
                            s = self.run(body, &path.child(0), s.drop_n(1).unwrap().push(x))?
                        }
                        Ok(Value::Right(x, _)) => {
                            let x = (**x).clone();
                            return Ok(s.drop_n(1).unwrap().push(x));
                        }
                        _ => return Err(self.stuck(path, i, "LOOP_LEFT needs an or on top")),
                    }
                }
            }
            Node::Iter(body) => {
                let elems: Vec<Value> = match s.top() {
                    Ok(Value::List(xs, _)) | Ok(Value::Set(xs, _)) => xs.clone(),
                    Ok(Value::Map(es, ..)) => es.iter().map(|(k, v)| Value::pair(k.clone(), v.clone())).collect(),
                    _ => return Err(self.stuck(path, i, "ITER needs a list, set or map on top")),
                };
                let mut s = s.drop_n(1).unwrap();
                for e in elems {
                    s = self.run(body, &path.child(0), s.push(e))?;
                }
                Ok(s)
            }
            Node::CmpMacro(_) => {
                let e = expand_macros(i);
                self.run(&e, path, s)
            }
            _ => self.leaf(i, path, s),
        }
    }

    fn stuck(&self, path: &Path, i: &Instr, reason: impl Into<String>) -> Halt {
        Halt::Error(ExecError::Stuck {
            path: path.clone(),
            opcode: i.node.name().into(),
            reason: reason.into(),
        })
    }

    fn leaf(&mut self, i: &Instr, path: &Path, s: Stack) -> Result<Stack, Halt> {
        if self.fuel == 0 {
            return Err(Halt::Fuel);
        }
        let contract = if self.cfg.check_contracts {
            Some(self.contract(i, path)?)
        } else {
            None
        };
        let budget = self.fuel;
        if let Some(c) = &contract {
            for r in &c.requires {
                if !self.holds(r, &s, None, budget, path, c)? {
                    return Err(violation(path, c, format!("requires {r}")));
                }
            }
        }
        let out = step(&i.node, &s, self.cfg).map_err(|reason| self.stuck(path, i, reason))?;
        self.fuel -= 1;
        if let Some(c) = &contract {
            let fails = self.holds(&c.fails_if, &s, None, budget, path, c)?;
            match &out {
                Err(_) if !fails => return Err(violation(path, c, "failed although fails_if is false".into())),
                Ok(_) if fails => return Err(violation(path, c, format!("fails_if {}", c.fails_if))),
                Ok(r) => {
                    for e in &c.ensures {
                        if !self.holds(e, &s, Some(r), budget, path, c)? {
                            return Err(violation(path, c, format!("ensures {e}")));
                        }
                    }
                }
                Err(_) => {}
            }
        }
        match out {
            Ok(r) => {
                if let Some(obs) = self.observer.as_mut() {
                    obs(&TraceEvent {
                        path,
                        instr: i,
                        stack: &r,
                        fuel_left: self.fuel,
                    });
                }
                Ok(r)
            }
            Err(v) => Err(Halt::Failed(v)),
        }
    }

    fn contract(&mut self, i: &Instr, path: &Path) -> Result<OpcodeContract, Halt> {
        if let Some(c) = self.cfg.contract_overrides.get(i.node.name()) {
            return Ok(c.clone());
        }
        if let Some(c) = self.contracts.get(path) {
            return Ok(c.clone());
        }
        let c = contract_of(&i.node).map_err(|e| self.stuck(path, i, e.to_string()))?;
        self.contracts.insert(path.clone(), c.clone());
        Ok(c)
    }

    fn holds(
        &self,
        f: &crate::contracts::Formula,
        s: &Stack,
        result: Option<&Stack>,
        fuel: u64,
        path: &Path,
        c: &OpcodeContract,
    ) -> Result<bool, Halt> {
        let mut env = Env::new(&self.logic).with_stacks(Some(s), result);
        bind_context(&mut env, self.cfg, fuel);
        eval_formula(f, &env).map_err(|source| {
            Halt::Error(ExecError::ContractEval {
                path: path.clone(),
                opcode: c.opcode.clone(),
                source,
            })
        })
    }
}

/// Binds `fuel` and the context names used by opcode contracts.
pub fn bind_context(env: &mut Env, cfg: &ExecConfig, fuel: u64) {
    env.bind("fuel", Val::Int(fuel.into()));
    for n in [Node::Amount, Node::Balance, Node::Now, Node::Sender, Node::Source, Node::ChainId] {
        let (name, _) = crate::contracts::env_name(&n).expect("context name");
        env.bind(name, Val::V(cfg.context(&n).expect("context value")));
    }
    env.bind("self", Val::V(cfg.self_value()));
}

fn violation(path: &Path, c: &OpcodeContract, clause: String) -> Halt {
    Halt::Violation {
        path: path.clone(),
        opcode: c.opcode.clone(),
        clause,
    }
}

/// Runs `code` on `s`. Paths are relative to `code`.
pub fn exec(code: &Instr, s: Stack, cfg: &ExecConfig) -> Result<Outcome, ExecError> {
    exec_observed(code, s, cfg, None)
}

/// Like [`exec`], calling `observer` after every successful leaf.
pub fn exec_observed(
    code: &Instr,
    s: Stack,
    cfg: &ExecConfig,
    observer: Option<&mut dyn FnMut(&TraceEvent)>,
) -> Result<Outcome, ExecError> {
    if cfg.fuel == 0 {
        return Ok(Outcome::FuelExhausted);
    }
    let mut m = Machine {
        cfg,
        fuel: cfg.fuel,
        observer,
        contracts: HashMap::new(),
        logic: LogicTable::new(),
    };
    match m.run(code, &Path::root(), s) {
        Ok(s) => Ok(Outcome::Success(s)),
        Err(Halt::Failed(v)) => Ok(Outcome::Failed(v)),
        Err(Halt::Fuel) => Ok(Outcome::FuelExhausted),
        Err(Halt::Violation { path, opcode, clause }) => Ok(Outcome::ContractViolation { path, opcode, clause }),
        Err(Halt::Error(e)) => Err(e),
    }
}

/// Runs a contract on `Pair(parameter, storage)`. Macros are expanded first,
/// so paths match the typechecker's. On success the final stack is checked
/// against the contract result type.
pub fn run_contract(
    c: &Contract,
    parameter: Value,
    storage: Value,
    cfg: &ExecConfig,
    observer: Option<&mut dyn FnMut(&TraceEvent)>,
) -> Result<Outcome, ExecError> {
    for (what, v, t) in [("parameter", &parameter, &c.parameter), ("storage", &storage, &c.storage)] {
        if v.typ_infer() != *t {
            return Err(ExecError::InputType {
                what,
                expected: t.clone(),
                found: v.typ_infer(),
            });
        }
    }
    let cfg = ExecConfig {
        self_param: c.parameter.clone(),
        ..cfg.clone()
    };
    let code = expand_macros(&c.code);
    let out = exec_observed(&code, Stack::from_top(vec![Value::pair(parameter, storage)]), &cfg, observer)?;
    if let Outcome::Success(s) = &out {
        let expected = Ty::contract_result(c.storage.clone());
        if s.len() != 1 || s.at(0).unwrap().typ_infer() != expected {
            return Err(ExecError::ResultShape {
                expected,
                found: fmt_top(s, s.len()),
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contracts::formula::build::*;
    use crate::syntax::{parse_instrs, parse_source};

    const TOY: &str = "parameter nat; storage nat; code { UNPAIR; ADD; NIL operation; PAIR }";

    fn nat(n: u64) -> Value {
        Value::Nat(n.into())
    }

    fn storage(out: Outcome) -> Value {
        match out {
            Outcome::Success(s) => match s.at(0).unwrap() {
                Value::Pair(_, st) => (**st).clone(),
                other => panic!("{other}"),
            },
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn toy_adds() {
        let c = parse_source(TOY).unwrap();
        let out = run_contract(&c, nat(2), nat(3), &ExecConfig::with_fuel(100), None).unwrap();
        match &out {
            Outcome::Success(s) => {
                assert_eq!(s.at(0).unwrap(), &Value::pair(Value::List(vec![], Ty::Operation), nat(5)))
            }
            _ => panic!("{out:?}"),
        }
    }

    #[test]
    fn add_int_nat_is_int() {
        let s = Stack::from_top(vec![Value::int(-1), nat(1)]);
        let r = step(&Node::Add, &s, &ExecConfig::default()).unwrap().unwrap();
        assert_eq!(r.at(0).unwrap(), &Value::int(0));
    }

    #[test]
    fn mutez_bounds() {
        let cfg = ExecConfig::default();
        let over = Stack::from_top(vec![Value::Mutez(MUTEZ_MAX), Value::Mutez(1)]);
        assert!(step(&Node::Add, &over, &cfg).unwrap().is_err());
        let under = Stack::from_top(vec![Value::Mutez(0), Value::Mutez(1)]);
        assert!(step(&Node::Sub, &under, &cfg).unwrap().is_err());
    }

    #[test]
    fn ediv_is_euclidean() {
        let cfg = ExecConfig::default();
        let s = Stack::from_top(vec![Value::int(-7), Value::int(2)]);
        let r = step(&Node::Ediv, &s, &cfg).unwrap().unwrap();
        assert_eq!(r.at(0).unwrap(), &Value::some(Value::pair(Value::int(-4), nat(1))));
        let z = Stack::from_top(vec![nat(7), nat(0)]);
        let r = step(&Node::Ediv, &z, &cfg).unwrap().unwrap();
        assert_eq!(r.at(0).unwrap(), &Value::None(Ty::pair(Ty::Nat, Ty::Nat)));
    }

    #[test]
    fn fuel_zero_and_counting() {
        let code = parse_instrs("{}").unwrap();
        assert_eq!(exec(&code, Stack::new(), &ExecConfig::with_fuel(0)).unwrap(), Outcome::FuelExhausted);
        let code = parse_instrs("{ UNIT; DROP }").unwrap();
        assert!(exec(&code, Stack::new(), &ExecConfig::with_fuel(2)).unwrap().is_success());
        assert_eq!(exec(&code, Stack::new(), &ExecConfig::with_fuel(1)).unwrap(), Outcome::FuelExhausted);
    }

    #[test]
    fn failwith_fails() {
        let code = parse_instrs("{ PUSH string \"no\"; FAILWITH }").unwrap();
        let out = exec(&code, Stack::new(), &ExecConfig::default()).unwrap();
        assert_eq!(out, Outcome::Failed(Value::String("no".into())));
    }

    #[test]
    fn checked_run_of_toy_is_clean() {
        let c = parse_source(TOY).unwrap();
        let cfg = ExecConfig {
            check_contracts: true,
            ..ExecConfig::default()
        };
        assert_eq!(storage(run_contract(&c, nat(4), nat(38), &cfg, None).unwrap()), nat(42));
    }

    #[test]
    fn corrupted_add_contract_is_caught() {
        let c = parse_source(TOY).unwrap();
        let mut bad = contract_of(&Node::Add).unwrap();
        bad.ensures.push(eq(len_r(), len_s()));
        let cfg = ExecConfig {
            check_contracts: true,
            contract_overrides: [("ADD".to_string(), bad)].into(),
            ..ExecConfig::default()
        };
        match run_contract(&c, nat(1), nat(2), &cfg, None).unwrap() {
            Outcome::ContractViolation { opcode, clause, path } => {
                assert_eq!(opcode, "ADD");
                assert_eq!(path.to_string(), "1.0");
                assert!(clause.contains("len(result) = len(s)"), "{clause}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn checked_sha512_keeps_the_tail() {
        let code = parse_instrs("{ SHA512 }").unwrap();
        let cfg = ExecConfig {
            check_contracts: true,
            ..ExecConfig::default()
        };
        let s = Stack::from_top(vec![Value::Bytes(vec![1, 2]), nat(9), Value::Unit]);
        match exec(&code, s, &cfg).unwrap() {
            Outcome::Success(r) => {
                assert_eq!(r.len(), 3);
                assert_eq!(r.at(1).unwrap(), &nat(9));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn trace_reports_each_leaf() {
        let code = parse_instrs("{ UNIT; DUP; DROP 2 }").unwrap();
        let mut seen = Vec::new();
        let mut obs = |e: &TraceEvent| seen.push((e.path.to_string(), e.stack.len()));
        exec_observed(&code, Stack::new(), &ExecConfig::default(), Some(&mut obs)).unwrap();
        assert_eq!(seen, vec![("0".into(), 1), ("1.0".into(), 2), ("1.1".into(), 0)]);
    }
}
