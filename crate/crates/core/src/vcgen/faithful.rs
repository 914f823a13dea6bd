//! Faithful emission: one WhyML-style function whose body is the
//! homomorphic let-chain over the whole stack.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::contracts::{contract_of, ArithOp, CmpOp, Formula, NumKind, StackRef, Term, TyCtor};
use crate::model::{Comparable, Ty, Value};
use crate::syntax::{Instr, Node, Path};
use crate::typecheck::{derive_safety_spec, TypedProgram};

use super::sidecar::SpecSidecar;

#[derive(Debug, Clone)]
pub struct FaithfulOptions {
    pub name: String,
    /// Emit a `val` declaration for every opcode the body applies.
    pub prelude: bool,
    /// Assert the stack type at every sequence boundary.
    pub type_asserts: bool,
}

impl Default for FaithfulOptions {
    fn default() -> Self {
        FaithfulOptions {
            name: "test".into(),
            prelude: false,
            type_asserts: false,
        }
    }
}

const HEADER: &str = "use axiomatic.AxiomaticSem\nuse dataTypes.DataTypes\nuse seq.Seq\nuse int.Int\n";

pub fn translate_faithful(tp: &TypedProgram, spec: &SpecSidecar) -> String {
    translate_faithful_with(tp, spec, &FaithfulOptions::default())
}

pub fn translate_faithful_with(tp: &TypedProgram, spec: &SpecSidecar, opts: &FaithfulOptions) -> String {
    let safety = derive_safety_spec(tp);
    let mut out = String::from(HEADER);
    if opts.prelude {
        out.push_str(&prelude(tp.code()));
    }
    for f in spec.logic.iter() {
        let r = Render::new("__stack__");
        let _ = writeln!(
            out,
            "let {}function {} {} : int = {}",
            if f.is_recursive() { "rec " } else { "" },
            f.name,
            f.params.iter().map(|p| format!("({p}: int)")).collect::<Vec<_>>().join(" "),
            r.term(&f.body)
        );
    }
    let _ = writeln!(out, "let {} (__stack__: stack_t) (__fuel__: int) : stack_t", opts.name);
    let _ = writeln!(out, "  requires {{ (length __stack__) = {} }}", safety.input_len);
    if safety.fuel_positive {
        out.push_str("  requires { __fuel__ > 0 }\n");
    }
    let _ = writeln!(
        out,
        "  requires {{ (typ_infer (d (__stack__[0])))\n               = {} }}",
        ty(&safety.input_ty)
    );
    let hdr = Render::new("__stack__");
    for c in &spec.requires {
        let _ = writeln!(out, "  requires {{ {} }}", hdr.formula(&c.formula));
    }
    let _ = write!(out, "  ensures {{ (length result) = {} }}", safety.output_len);
    let _ = write!(
        out,
        "\n  ensures {{ (typ_infer (d (result[0])))\n              = {} }}",
        ty(&safety.output_ty)
    );
    for c in &spec.ensures {
        let _ = write!(out, "\n  ensures {{ {} }}", hdr.formula(&c.formula));
    }
    out.push_str(" =\n");
    let mut e = Emitter { tp, spec, opts };
    let uses_input = !spec.invariants.is_empty() || !spec.asserts.is_empty();
    if uses_input {
        out.push_str("  let __input__ = __stack__ in\n");
    }
    match &tp.code().node {
        Node::Nop => out.push_str("  __stack__\n"),
        _ => {
            let body = e.instr(tp.code(), &Path::root(), 4);
            let _ = write!(out, "  let __stack__ =\n    {body} in\n  __stack__\n");
        }
    }
    out
}

/// `val` declarations for the distinct opcodes of `code`, in first-use order.
pub fn prelude(code: &Instr) -> String {
    let mut seen = BTreeSet::new();
    let mut out = String::new();
    for (_, i) in code.walk() {
        if !i.node.is_leaf() {
            continue;
        }
        let Ok(c) = contract_of(&i.node) else { continue };
        if !seen.insert(c.opcode.clone()) {
            continue;
        }
        let r = Render::new("__stack__");
        let _ = writeln!(out, "(* {} *)", c.opcode);
        let _ = writeln!(out, "val {} (__stack__: stack_t) (__fuel__: int) : stack_t", op_name(&i.node));
        for f in &c.requires {
            let _ = writeln!(out, "  requires {{ {} }}", r.formula(f));
        }
        for f in &c.ensures {
            let _ = writeln!(out, "  ensures {{ {} }}", r.formula(f));
        }
        if c.may_fail() {
            let _ = writeln!(out, "  raises {{ Failing -> {} }}", r.formula(&c.fails_if));
        }
        out.push('\n');
    }
    out
}

/// Function name of a leaf in the let-chain.
pub fn op_name(node: &Node) -> String {
    const SUFFIXED: [&str; 17] = [
        "nil", "compare", "sha256", "sha512", "blake2b", "not", "and", "or", "xor", "int", "abs", "some", "none", "left",
        "right", "mem", "get",
    ];
    let base = node.name().to_lowercase();
    if SUFFIXED.contains(&base.as_str()) || base == "size" || base == "self" {
        format!("{base}_op")
    } else {
        base
    }
}

struct Emitter<'a> {
    tp: &'a TypedProgram,
    spec: &'a SpecSidecar,
    opts: &'a FaithfulOptions,
}

const S: &str = "__stack__";

fn pad(n: usize) -> String {
    " ".repeat(n)
}

impl Emitter<'_> {
    fn instr(&mut self, i: &Instr, p: &Path, ind: usize) -> String {
        if i.origin == Some("UNPAIR") {
            return format!("unpair {S} __fuel__");
        }
        let asserts = self.asserts_at(p);
        let body = self.node(i, p, ind);
        if asserts.is_empty() {
            body
        } else {
            format!("({asserts}{body})")
        }
    }

    fn asserts_at(&self, p: &Path) -> String {
        let r = Render::new(S);
        self.spec
            .asserts
            .get(p)
            .map(|cs| cs.iter().map(|c| format!("assert {{ {} }}; ", r.formula(&c.formula))).collect())
            .unwrap_or_default()
    }

    fn node(&mut self, i: &Instr, p: &Path, ind: usize) -> String {
        match &i.node {
            Node::Seq(a, b) => {
                let pa = p.child(0);
                let mut first = self.instr(a, &pa, ind + 16);
                if matches!(a.node, Node::Seq(..)) && a.origin.is_none() {
                    first = format!("({first})");
                }
                let mut out = format!("let {S} = {first} in\n");
                if self.opts.type_asserts {
                    if let Some(st) = self.tp.after(&pa) {
                        let _ = writeln!(out, "{}assert {{ {} }};", pad(ind), stack_assert(st));
                    }
                }
                let _ = write!(out, "{}({})", pad(ind), self.instr(b, &p.child(1), ind + 1));
                out
            }
            Node::Nop => S.to_string(),
            Node::Dip(n, body) => format!(
                "(let __top__ = {S}[.. {n}] in let {S} = {S}[{n} ..] in\n{}let {S} = {} in __top__ ++ {S})",
                pad(ind + 1),
                self.instr(body, &p.child(0), ind + 1)
            ),
            Node::If(a, b) | Node::IfNone(a, b) | Node::IfLeft(a, b) | Node::IfCons(a, b) => {
                let (test, then_pop, else_pop) = match &i.node {
                    Node::If(..) => ("is_true", "pop", "pop"),
                    Node::IfNone(..) => ("is_none", "pop", "unwrap_some"),
                    Node::IfLeft(..) => ("is_left", "unwrap_left", "unwrap_right"),
                    _ => ("is_cons", "uncons", "pop"),
                };
                format!(
                    "(if {test} (d ({S}[0])) then\n{p1}(let {S} = {then_pop} {S} in {})\n{p0}else\n{p1}(let {S} = {else_pop} {S} in {}))",
                    self.instr(a, &p.child(0), ind + 2),
                    self.instr(b, &p.child(1), ind + 2),
                    p0 = pad(ind + 1),
                    p1 = pad(ind + 2),
                )
            }
            Node::Loop(body) | Node::LoopLeft(body) | Node::Iter(body) => {
                let (guard, enter, exit) = match &i.node {
                    Node::Loop(_) => ("is_true (d ((!__loop__)[0]))", "pop (!__loop__)", "pop (!__loop__)"),
                    Node::LoopLeft(_) => (
                        "is_left (d ((!__loop__)[0]))",
                        "unwrap_left (!__loop__)",
                        "unwrap_right (!__loop__)",
                    ),
                    _ => ("is_cons (d ((!__loop__)[0]))", "uncons (!__loop__)", "pop (!__loop__)"),
                };
                let inv = match self.spec.invariants.get(p) {
                    Some(c) => format!("invariant {{ {} }}", Render::new("(!__loop__)").formula(&c.formula)),
                    None => format!("(* invariant missing: supply invariant@{p} *)"),
                };
                let variant = match self.spec.variants.get(p) {
                    Some(t) => format!("\n{}variant {{ {} }}", pad(ind + 3), Render::new("(!__loop__)").term(t)),
                    None => String::new(),
                };
                format!(
                    "(let __loop__ = ref {S} in\n{p1}while {guard} do\n{p3}{inv}{variant}\n{p3}__loop__ := (let {S} = {enter} in {})\n{p1}done;\n{p1}{exit})",
                    self.instr(body, &p.child(0), ind + 4),
                    p1 = pad(ind + 1),
                    p3 = pad(ind + 3),
                )
            }
            n => leaf(n),
        }
    }
}

fn leaf(n: &Node) -> String {
    let operand = match n {
        Node::Dup(k) | Node::Drop(k) if *k != 1 => format!(" {k}"),
        Node::Dig(k) | Node::Dug(k) => format!(" {k}"),
        Node::Push(_, v) => format!(" (mk_wf_data {})", data(v)),
        Node::Nil(t) | Node::None(t) | Node::Left(t) | Node::Right(t) | Node::Unpack(t) => format!(" {}", ty(t)),
        _ => String::new(),
    };
    format!("{} {S} __fuel__{operand}", op_name(n))
}

fn stack_assert(st: &[Ty]) -> String {
    let mut parts = vec![format!("(length {S}) = {}", st.len())];
    for (i, t) in st.iter().enumerate() {
        parts.push(format!("(typ_infer (d ({S}[{i}]))) = {}", ty(t)));
    }
    parts.join(" /\\ ")
}

fn comparable_name(c: Comparable) -> &'static str {
    match c {
        Comparable::Int => "Int_t",
        Comparable::Nat => "Nat_t",
        Comparable::String => "String_t",
        Comparable::Bytes => "Bytes_t",
        Comparable::Mutez => "Mutez_t",
        Comparable::Bool => "Bool_t",
        Comparable::KeyHash => "Key_hash_t",
        Comparable::Timestamp => "Timestamp_t",
        Comparable::Address => "Address_t",
    }
}

/// Type term; nullary constructors carry a trailing space.
pub fn ty(t: &Ty) -> String {
    let app = |c: &str, args: &[&Ty]| format!("({c} {})", args.iter().map(|a| ty(a)).collect::<Vec<_>>().join(" "));
    if let Some(c) = t.comparable() {
        return format!("(Comparable_t {} )", comparable_name(c));
    }
    match t {
        Ty::Key => "Key_t ".into(),
        Ty::Signature => "Signature_t ".into(),
        Ty::ChainId => "Chain_id_t ".into(),
        Ty::Unit => "Unit_t ".into(),
        Ty::Operation => "Operation_t ".into(),
        Ty::Option(a) => app("Option_t", &[a]),
        Ty::List(a) => app("List_t", &[a]),
        Ty::Contract(a) => app("Contract_t", &[a]),
        Ty::Pair(a, b) => app("Pair_t", &[a, b]),
        Ty::Or(a, b) => app("Or_t", &[a, b]),
        Ty::Set(k) => app("Set_t", &[&k.ty()]),
        Ty::Map(k, v) => app("Map_t", &[&k.ty(), v]),
        Ty::BigMap(k, v) => app("Big_map_t", &[&k.ty(), v]),
        _ => unreachable!("comparable handled above"),
    }
}

fn int_lit(n: impl std::fmt::Display) -> String {
    let s = n.to_string();
    if s.starts_with('-') {
        format!("({s})")
    } else {
        s
    }
}

/// Data term for a literal value.
pub fn data(v: &Value) -> String {
    let list = |xs: Vec<String>| format!("[{}]", xs.join("; "));
    match v {
        Value::Int(n) => format!("(Comparable (Int {}))", int_lit(n)),
        Value::Nat(n) => format!("(Comparable (Nat (to_nat {n})))"),
        Value::String(s) => format!("(Comparable (Str {s:?}))"),
        Value::Bytes(b) => format!("(Comparable (Bytes 0x{}))", hex::encode(b)),
        Value::Mutez(n) => format!("(Comparable (Mutez (to_mutez {n})))"),
        Value::Bool(b) => format!("(Comparable (Bool {b}))"),
        Value::KeyHash(s) => format!("(Comparable (Key_hash {s:?}))"),
        Value::Timestamp(n) => format!("(Comparable (Timestamp {}))", int_lit(n)),
        Value::Address(s) => format!("(Comparable (Address {s:?}))"),
        Value::Key(s) => format!("(Key {s:?})"),
        Value::Signature(s) => format!("(Signature {s:?})"),
        Value::ChainId(s) => format!("(Chain_id {s:?})"),
        Value::Unit => "Unit".into(),
        Value::Some(x) => format!("(Some {})", data(x)),
        Value::None(_) => "None".into(),
        Value::Pair(a, b) => format!("(Pair {} {})", data(a), data(b)),
        Value::Left(x, _) => format!("(Left {})", data(x)),
        Value::Right(x, _) => format!("(Right {})", data(x)),
        Value::List(xs, _) => format!("(List {})", list(xs.iter().map(data).collect())),
        Value::Set(xs, _) => format!("(Set {})", list(xs.iter().map(data).collect())),
        Value::Map(es, ..) | Value::BigMap(es, ..) => format!(
            "(Map {})",
            list(es.iter().map(|(k, v)| format!("({}, {})", data(k), data(v))).collect())
        ),
        Value::Contract(a, _) => format!("(Contract {a:?})"),
        other => format!("(Abstract {:?})", other.to_string()),
    }
}

/// WhyML-flavoured rendering of the assertion language. `stk` names the
/// current stack.
pub struct Render<'a> {
    stk: &'a str,
}

impl<'a> Render<'a> {
    pub fn new(stk: &'a str) -> Render<'a> {
        Render { stk }
    }

    fn stack(&self, r: StackRef) -> &str {
        match r {
            StackRef::S => self.stk,
            StackRef::Result => "result",
        }
    }

    fn call(&self, f: &str, args: &[&Term]) -> String {
        let mut s = format!("({f}");
        for a in args {
            s.push(' ');
            s.push_str(&self.term(a));
        }
        s.push(')');
        s
    }

    pub fn term(&self, t: &Term) -> String {
        match t {
            Term::Int(n) => int_lit(n),
            Term::Var(v) | Term::Sym(v, _) => v.clone(),
            Term::Len(r) => format!("(length {})", self.stack(*r)),
            Term::Arith(ArithOp::Div, a, b) => self.call("div", &[a, b]),
            Term::Arith(ArithOp::Mod, a, b) => self.call("mod", &[a, b]),
            Term::Arith(op, a, b) => format!("({} {} {})", self.term(a), op.symbol(), self.term(b)),
            Term::Neg(a) => format!("(- {})", self.term(a)),
            Term::IntOf(a) => self.call("int_of", &[a]),
            Term::CompareV(a, b) => self.call("compare_data", &[a, b]),
            Term::Size(a) => self.call("size_of", &[a]),
            Term::Call(f, args) => self.call(f, &args.iter().collect::<Vec<_>>()),
            Term::Ite(c, a, b) => format!("(if {} then {} else {})", self.formula(c), self.term(a), self.term(b)),
            Term::Name(n) => match n.as_str() {
                "fuel" => "__fuel__".into(),
                "param" => "(car_data (d (__input__[0])))".into(),
                "storage_in" => "(cdr_data (d (__input__[0])))".into(),
                "storage_out" => "(cdr_data (d (result[0])))".into(),
                other => format!("__{other}__"),
            },
            Term::Slot(r, i) => format!("(d ({}[{}]))", self.stack(*r), self.term(i)),
            Term::Lit(v) => data(v),
            Term::Mk(k, a) => {
                let (c, conv) = match k {
                    NumKind::Int => ("Int", None),
                    NumKind::Nat => ("Nat", Some("to_nat")),
                    NumKind::Mutez => ("Mutez", Some("to_mutez")),
                    NumKind::Timestamp => ("Timestamp", None),
                };
                match conv {
                    Some(f) => format!("(Comparable ({c} ({f} {})))", self.term(a)),
                    None => format!("(Comparable ({c} {}))", self.term(a)),
                }
            }
            Term::MkBool(c) => format!("(Comparable (Bool {}))", self.formula(c)),
            Term::MkPair(a, b) => self.call("Pair", &[a, b]),
            Term::Car(a) => self.call("car_data", &[a]),
            Term::Cdr(a) => self.call("cdr_data", &[a]),
            Term::MkSome(a) => self.call("Some", &[a]),
            Term::MkNone(_) => "None".into(),
            Term::Unsome(a) => self.call("unsome", &[a]),
            Term::MkLeft(a, _) => self.call("Left", &[a]),
            Term::MkRight(a, _) => self.call("Right", &[a]),
            Term::Unleft(a) => self.call("unleft", &[a]),
            Term::Unright(a) => self.call("unright", &[a]),
            Term::MkNil(_) => "(List Nil)".into(),
            Term::MkCons(a, b) => self.call("cons_data", &[a, b]),
            Term::Head(a) => self.call("head_data", &[a]),
            Term::Tail(a) => self.call("tail_data", &[a]),
            Term::Concat(a, b) => self.call("concat_data", &[a, b]),
            Term::MapGet(a, b) => self.call("get_data", &[a, b]),
            Term::Update(a, b, c) => self.call("update_data", &[a, b, c]),
            Term::Digest(tag, args, _) => self.call(tag, &args.iter().collect::<Vec<_>>()),
            Term::Pack(a) => self.call("pack_data", &[a]),
            Term::Unpack(a, _) => self.call("unpack_data", &[a]),
            Term::Transfer(a, b, c) => self.call("transfer_tokens_data", &[a, b, c]),
            Term::SetDelegate(a) => self.call("set_delegate_data", &[a]),
            Term::TypeOf(a) => self.call("typ_infer", &[a]),
            Term::TyLit(t) => ty(t),
            Term::TyApp(c, args) => {
                let name = match c {
                    TyCtor::Option => "Option_t",
                    TyCtor::List => "List_t",
                    TyCtor::Pair => "Pair_t",
                    TyCtor::Or => "Or_t",
                    TyCtor::Contract => "Contract_t",
                };
                self.call(name, &args.iter().collect::<Vec<_>>())
            }
            Term::TyArg(a, k) => self.call(&format!("ty_arg{k}"), &[a]),
        }
    }

    pub fn formula(&self, f: &Formula) -> String {
        let join = |xs: &[Formula], op: &str, empty: &str| -> String {
            match xs.len() {
                0 => empty.into(),
                1 => self.formula(&xs[0]),
                _ => format!("({})", xs.iter().map(|x| self.formula(x)).collect::<Vec<_>>().join(op)),
            }
        };
        match f {
            Formula::True => "true".into(),
            Formula::False => "false".into(),
            Formula::Cmp(op, a, b) => {
                let sym = if *op == CmpOp::Ne { "<>" } else { op.symbol() };
                format!("{} {sym} {}", self.term(a), self.term(b))
            }
            Formula::Not(x) => format!("not ({})", self.formula(x)),
            Formula::And(xs) => join(xs, " /\\ ", "true"),
            Formula::Or(xs) => join(xs, " \\/ ", "false"),
            Formula::Implies(a, b) => format!("(({}) -> ({}))", self.formula(a), self.formula(b)),
            Formula::Iff(a, b) => format!("(({}) <-> ({}))", self.formula(a), self.formula(b)),
            Formula::Forall { var, lo, hi, body } => format!(
                "(forall {var}: int. {} <= {var} < {} -> ({}))",
                self.term(lo),
                self.term(hi),
                self.formula(body)
            ),
            Formula::Cases(cs) => {
                let mut s = String::new();
                for (g, b) in cs {
                    let _ = write!(s, "if {} then {} else ", self.formula(g), self.formula(b));
                }
                format!("({s}false)")
            }
            Formula::IsTrue(t) => self.call("is_true", &[t]),
            Formula::IsSome(t) => self.call("is_some", &[t]),
            Formula::IsLeft(t) => self.call("is_left", &[t]),
            Formula::IsCons(t) => self.call("is_cons", &[t]),
            Formula::Mem(a, b) => self.call("mem_data", &[a, b]),
            Formula::CheckSig(a, b, c) => self.call("check_signature_data", &[a, b, c]),
            Formula::TyIs(t, s) => format!("(is_{}_t {})", s.name(), self.term(t)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_source;
    use crate::typecheck::typecheck;
    use crate::vcgen::parse_sidecar;

    fn tp(src: &str) -> TypedProgram {
        typecheck(&parse_source(src).unwrap()).unwrap()
    }

    #[test]
    fn type_terms() {
        assert_eq!(ty(&Ty::pair(Ty::Nat, Ty::Nat)), "(Pair_t (Comparable_t Nat_t ) (Comparable_t Nat_t ))");
        assert_eq!(ty(&Ty::list(Ty::Operation)), "(List_t Operation_t )");
    }

    #[test]
    fn empty_code_returns_the_stack() {
        let out = translate_faithful(&tp("parameter unit; storage unit; code { CDR; NIL operation; PAIR }"), &SpecSidecar::default());
        assert!(out.contains("cdr __stack__ __fuel__"));
        let out = translate_faithful(&tp("parameter (list operation); storage unit; code {}"), &SpecSidecar::default());
        assert!(out.ends_with(" =\n  __stack__\n"), "{out}");
    }

    #[test]
    fn dip_and_loop_shapes() {
        let src = "parameter nat; storage nat; code { CAR; PUSH bool True; LOOP { PUSH bool False }; DUP; DIP { DROP }; NIL operation; PAIR }";
        let out = translate_faithful(&tp(src), &SpecSidecar::default());
        assert!(out.contains("(* invariant missing: supply invariant@1.1.0 *)"), "{out}");
        assert!(out.contains("__top__ ++ __stack__"));
        let spec = parse_sidecar("invariant@1.1.0: len(stack) = 2").unwrap();
        let out = translate_faithful(&tp(src), &spec);
        assert!(out.contains("invariant { (length (!__loop__)) = 2 }"), "{out}");
        assert!(out.contains("let __input__ = __stack__ in"));
    }

    #[test]
    fn prelude_lists_each_opcode_once() {
        let out = translate_faithful_with(
            &tp("parameter nat; storage nat; code { UNPAIR; ADD; NIL operation; PAIR }"),
            &SpecSidecar::default(),
            &FaithfulOptions { prelude: true, ..Default::default() },
        );
        assert_eq!(out.matches("val add ").count(), 1);
        assert!(out.contains("val nil_op "));
        assert!(out.contains("requires { __fuel__ > 0 }"));
    }

    #[test]
    fn push_literal() {
        assert_eq!(leaf(&Node::Push(Ty::Nat, Value::Nat(1.into()))), "push __stack__ __fuel__ (mk_wf_data (Comparable (Nat (to_nat 1))))");
        assert_eq!(op_name(&Node::Compare), "compare_op");
        assert_eq!(op_name(&Node::Test(crate::syntax::Cond::Le)), "le");
    }
}
