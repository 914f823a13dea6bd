//! Monomorphic VC generation: forward symbolic execution over a stack of
//! typed symbolic slots.
//!
//! Every leaf contributes one VC per requires clause; its ensures clauses
//! become hypotheses over fresh result constants, which are replaced by
//! their defining terms whenever an ensures clause pins them.

use std::collections::BTreeMap;

use crate::contracts::formula::build;
use crate::contracts::{contract_of, CmpOp, Formula, Term};
use crate::model::Ty;
use crate::syntax::{Instr, Node, Path};
use crate::typecheck::{iter_element, TypedProgram};

use super::sidecar::SpecSidecar;
use super::simplify::{simplify, Subst};

/// Upper bound on simultaneously live symbolic paths.
pub const MAX_PATHS: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vc {
    /// `add@1.0:precondition.2`, `loop@1.1.0:invariant-preserved`, ...
    pub name: String,
    /// Program point, `None` for contract-level obligations.
    pub path: Option<Path>,
    pub hypotheses: Vec<Formula>,
    pub goal: Formula,
}

impl Vc {
    /// True when simplification alone closed the goal.
    pub fn is_trivial(&self) -> bool {
        self.goal == Formula::True || self.hypotheses.contains(&Formula::False) || self.hypotheses.contains(&self.goal)
    }
}

/// Which clauses of an opcode contract the generator used at a node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Applied {
    pub path: Path,
    pub opcode: String,
    pub requires: Vec<usize>,
    pub ensures: Vec<usize>,
}

#[derive(Debug, Clone, Default)]
pub struct MonoOutput {
    pub vcs: Vec<Vc>,
    pub applied: Vec<Applied>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum VcError {
    #[error("loop at {0} has no invariant")]
    MissingInvariant(Path),
    #[error("at {path}: {reason}")]
    Unsupported { path: Path, reason: String },
    #[error("more than {MAX_PATHS} symbolic paths")]
    PathExplosion,
}

#[derive(Debug, Clone)]
struct State {
    stack: Vec<Term>,
    hyps: Vec<Formula>,
}

impl State {
    fn assume(&mut self, f: Formula) {
        match f {
            Formula::True => {}
            Formula::And(xs) => xs.into_iter().for_each(|x| self.assume(x)),
            f => self.hyps.push(f),
        }
    }

    fn dead(&self) -> bool {
        self.hyps.contains(&Formula::False)
    }
}

struct Gen<'a> {
    tp: &'a TypedProgram,
    spec: &'a SpecSidecar,
    names: BTreeMap<String, Term>,
    out: MonoOutput,
    fresh: usize,
}

fn sym(name: String, ty: Ty) -> Term {
    Term::Sym(name, ty)
}

fn mentions(t: &Term, syms: &[String]) -> bool {
    Formula::IsTrue(t.clone())
        .terms()
        .iter()
        .any(|x| matches!(x, Term::Sym(n, _) if syms.contains(n)))
}

/// Contract-level names available to clauses.
pub fn base_names(tp: &TypedProgram) -> (Term, BTreeMap<String, Term>) {
    let c = &tp.contract;
    let input = sym("input".into(), Ty::pair(c.parameter.clone(), c.storage.clone()));
    let mut names = BTreeMap::new();
    names.insert("fuel".to_string(), Term::IntOf(Box::new(sym("fuel".into(), Ty::Int))));
    names.insert("param".into(), Term::Car(Box::new(input.clone())));
    names.insert("storage_in".into(), Term::Cdr(Box::new(input.clone())));
    for (n, ty) in [
        ("amount", Ty::Mutez),
        ("balance", Ty::Mutez),
        ("now", Ty::Timestamp),
        ("sender", Ty::Address),
        ("source", Ty::Address),
        ("chain_id", Ty::ChainId),
        ("self", Ty::contract(c.parameter.clone())),
    ] {
        names.insert(n.into(), sym(n.into(), ty));
    }
    (input, names)
}

pub fn generate_mono(tp: &TypedProgram, spec: &SpecSidecar) -> Result<MonoOutput, VcError> {
    let (input, names) = base_names(tp);
    let mut g = Gen {
        tp,
        spec,
        names,
        out: MonoOutput::default(),
        fresh: 0,
    };
    let mut init = State {
        stack: vec![input],
        hyps: Vec::new(),
    };
    init.assume(g.inst(&build::cmp(CmpOp::Gt, build::name("fuel"), build::int(0)), &init.stack, None));
    for c in &spec.requires {
        let f = g.inst(&c.formula, &init.stack, None);
        init.assume(f);
    }
    let ends = g.exec(tp.code(), &Path::root(), vec![init])?;
    let storage_ty = tp.contract.storage.clone();
    let many = ends.len() > 1;
    for (j, st) in ends.iter().enumerate() {
        let suffix = if many { format!(".path{j}") } else { String::new() };
        let len_goal = g.inst(&build::eq(build::len_s(), build::int(1)), &st.stack, None);
        g.push_vc(format!("contract:safety.length{suffix}"), None, st, len_goal);
        let ty_goal = g.inst(&build::has_ty(build::s(0), Ty::contract_result(storage_ty.clone())), &st.stack, None);
        g.push_vc(format!("contract:safety.type{suffix}"), None, st, ty_goal);
        let mut names = g.names.clone();
        if let Some(out) = st.stack.first() {
            names.insert("storage_out".into(), Term::Cdr(Box::new(out.clone())));
        }
        for (k, c) in spec.ensures.iter().enumerate() {
            let sub = Subst {
                s: Some(&st.stack),
                result: Some(&st.stack),
                names: Some(&names),
            };
            let goal = simplify(&c.formula, &sub);
            g.push_vc(format!("contract:ensures.{k}{suffix}"), None, st, goal);
        }
    }
    disambiguate(&mut g.out.vcs);
    Ok(g.out)
}

// Opcodes after a branch join are visited once per incoming path.
fn disambiguate(vcs: &mut [Vc]) {
    let mut count: BTreeMap<String, usize> = BTreeMap::new();
    for vc in vcs.iter() {
        *count.entry(vc.name.clone()).or_default() += 1;
    }
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    for vc in vcs.iter_mut() {
        if count[&vc.name] > 1 {
            let k = seen.entry(vc.name.clone()).or_default();
            vc.name = format!("{}.path{k}", vc.name);
            *k += 1;
        }
    }
}

impl Gen<'_> {
    fn inst(&self, f: &Formula, s: &[Term], r: Option<&[Term]>) -> Formula {
        simplify(
            f,
            &Subst {
                s: Some(s),
                result: r,
                names: Some(&self.names),
            },
        )
    }

    fn push_vc(&mut self, name: String, path: Option<Path>, st: &State, goal: Formula) {
        self.out.vcs.push(Vc {
            name,
            path,
            hypotheses: st.hyps.clone(),
            goal,
        });
    }

    fn fresh_stack(&mut self, prefix: &str, tys: &[Ty]) -> Vec<Term> {
        self.fresh += 1;
        let n = self.fresh;
        tys.iter()
            .enumerate()
            .map(|(i, t)| sym(format!("{prefix}{n}_{i}"), t.clone()))
            .collect()
    }

    fn exec(&mut self, i: &Instr, p: &Path, states: Vec<State>) -> Result<Vec<State>, VcError> {
        let mut out = Vec::new();
        for st in states {
            if st.dead() {
                continue;
            }
            out.extend(self.exec1(i, p, st)?);
            if out.len() > MAX_PATHS {
                return Err(VcError::PathExplosion);
            }
        }
        Ok(out)
    }

    fn exec1(&mut self, i: &Instr, p: &Path, mut st: State) -> Result<Vec<State>, VcError> {
        if let Some(cs) = self.spec.asserts.get(p) {
            for (k, c) in cs.iter().enumerate() {
                let goal = self.inst(&c.formula, &st.stack, None);
                self.push_vc(format!("assert@{p}:{k}"), Some(p.clone()), &st, goal.clone());
                st.assume(goal);
            }
        }
        let unsupported = |reason: String| VcError::Unsupported { path: p.clone(), reason };
        match &i.node {
            Node::Seq(a, b) => {
                let mid = self.exec(a, &p.child(0), vec![st])?;
                self.exec(b, &p.child(1), mid)
            }
            Node::Nop => Ok(vec![st]),
            Node::Dip(n, body) => {
                let top: Vec<Term> = st.stack.drain(..*n).collect();
                let outs = self.exec(body, &p.child(0), vec![st])?;
                Ok(outs
                    .into_iter()
                    .map(|mut o| {
                        o.stack.splice(0..0, top.iter().cloned());
                        o
                    })
                    .collect())
            }
            Node::If(a, b) | Node::IfNone(a, b) | Node::IfLeft(a, b) | Node::IfCons(a, b) => {
                let top = st.stack.remove(0);
                let rest = st.stack.clone();
                let bx = |t: &Term| Box::new(t.clone());
                let (cond, then_push, else_push): (Formula, Vec<Term>, Vec<Term>) = match &i.node {
                    Node::If(..) => (Formula::IsTrue(top.clone()), vec![], vec![]),
                    Node::IfNone(..) => (build::not(Formula::IsSome(top.clone())), vec![], vec![Term::Unsome(bx(&top))]),
                    Node::IfLeft(..) => (
                        Formula::IsLeft(top.clone()),
                        vec![Term::Unleft(bx(&top))],
                        vec![Term::Unright(bx(&top))],
                    ),
                    _ => (
                        Formula::IsCons(top.clone()),
                        vec![Term::Head(bx(&top)), Term::Tail(bx(&top))],
                        vec![],
                    ),
                };
                let mut out = Vec::new();
                for (k, (c, push, body)) in [(cond.clone(), then_push, a), (build::not(cond), else_push, b)]
                    .into_iter()
                    .enumerate()
                {
                    let c = simplify(&c, &Subst::default());
                    if c == Formula::False {
                        continue;
                    }
                    let mut s2 = State {
                        stack: push.into_iter().chain(rest.iter().cloned()).collect(),
                        hyps: st.hyps.clone(),
                    };
                    s2.assume(c);
                    out.extend(self.exec(body, &p.child(k), vec![s2])?);
                }
                Ok(out)
            }
            Node::Loop(body) | Node::LoopLeft(body) | Node::Iter(body) => self.exec_loop(i, body, p, st),
            Node::Unpair | Node::CmpMacro(_) => Err(unsupported("macros must be expanded first".into())),
            node => self.leaf(node, p, st),
        }
    }

    fn exec_loop(&mut self, i: &Instr, body: &Instr, p: &Path, st: State) -> Result<Vec<State>, VcError> {
        let inv = self
            .spec
            .invariants
            .get(p)
            .ok_or_else(|| VcError::MissingInvariant(p.clone()))?
            .formula
            .clone();
        let before = self.tp.before(p).cloned().unwrap_or_default();
        let is_iter = matches!(i.node, Node::Iter(_));
        // The invariant talks about the head stack; for ITER that is the
        // stack below the collection.
        let (head, head_tys) = if is_iter {
            (st.stack[1..].to_vec(), before[1..].to_vec())
        } else {
            (st.stack.clone(), before.clone())
        };
        let init = self.inst(&inv, &head, None);
        self.push_vc(format!("loop@{p}:invariant-init"), Some(p.clone()), &st, init);

        let h = self.fresh_stack("inv", &head_tys);
        let mut base = State {
            stack: h.clone(),
            hyps: st.hyps.clone(),
        };
        let inv_h = self.inst(&inv, &h, None);
        base.assume(inv_h);
        let bx = |t: &Term| Box::new(t.clone());
        let (guard, body_in, exit_stack) = match &i.node {
            Node::Loop(_) => (Some(Formula::IsTrue(h[0].clone())), h[1..].to_vec(), h[1..].to_vec()),
            Node::LoopLeft(_) => {
                let mut b = vec![Term::Unleft(bx(&h[0]))];
                b.extend_from_slice(&h[1..]);
                let mut e = vec![Term::Unright(bx(&h[0]))];
                e.extend_from_slice(&h[1..]);
                (Some(Formula::IsLeft(h[0].clone())), b, e)
            }
            _ => {
                let elt_ty = iter_element(&before[0]).ok_or_else(|| VcError::Unsupported {
                    path: p.clone(),
                    reason: format!("cannot iterate over {}", before[0]),
                })?;
                let e = self.fresh_stack("elt", &[elt_ty]);
                (None, e.into_iter().chain(h.iter().cloned()).collect(), h.clone())
            }
        };
        let mut inside = State {
            stack: body_in,
            hyps: base.hyps.clone(),
        };
        if let Some(g) = &guard {
            inside.assume(g.clone());
        }
        let outs = self.exec(body, &p.child(0), vec![inside])?;
        let many = outs.len() > 1;
        let variant = self.spec.variants.get(p).cloned();
        for (j, o) in outs.iter().enumerate() {
            let suffix = if many { format!(".{j}") } else { String::new() };
            let goal = self.inst(&inv, &o.stack, None);
            self.push_vc(format!("loop@{p}:invariant-preserved{suffix}"), Some(p.clone()), o, goal);
            if let Some(v) = &variant {
                let before_v = self.inst(&build::cmp(CmpOp::Ge, v.clone(), build::int(0)), &h, None);
                let after_t = instantiate_term(v, &o.stack, &self.names);
                let before_t = instantiate_term(v, &h, &self.names);
                let dec = simplify(&build::cmp(CmpOp::Lt, after_t, before_t), &Subst::default());
                self.push_vc(
                    format!("loop@{p}:variant-decreases{suffix}"),
                    Some(p.clone()),
                    o,
                    build::and(vec![before_v, dec]),
                );
            }
        }
        let mut exit = State {
            stack: exit_stack,
            hyps: base.hyps,
        };
        if let Some(g) = guard {
            exit.assume(simplify(&build::not(g), &Subst::default()));
        }
        Ok(vec![exit])
    }

    fn leaf(&mut self, node: &Node, p: &Path, mut st: State) -> Result<Vec<State>, VcError> {
        let c = contract_of(node).map_err(|e| VcError::Unsupported {
            path: p.clone(),
            reason: e.0,
        })?;
        let op = node.name().to_lowercase();
        let mut applied = Applied {
            path: p.clone(),
            opcode: c.opcode.clone(),
            requires: Vec::new(),
            ensures: Vec::new(),
        };
        for (k, r) in c.requires.iter().enumerate() {
            let goal = self.inst(r, &st.stack, None);
            self.push_vc(format!("{op}@{p}:precondition.{k}"), Some(p.clone()), &st, goal.clone());
            applied.requires.push(k);
            st.assume(goal);
        }
        match self.inst(&c.fails_if, &st.stack, None) {
            Formula::False => {}
            Formula::True => {
                self.out.applied.push(applied);
                return Ok(vec![]);
            }
            f => st.assume(simplify(&build::not(f), &Subst::default())),
        }
        let Some(out_ty) = self.tp.after(p).cloned() else {
            self.out.applied.push(applied);
            return Ok(vec![]);
        };
        let m = c.result_len(st.stack.len());
        if m != out_ty.len() {
            return Err(VcError::Unsupported {
                path: p.clone(),
                reason: format!("contract of {} produces {m} slots, the typechecker {}", c.opcode, out_ty.len()),
            });
        }
        self.fresh += 1;
        let n = self.fresh;
        let mut r: Vec<Term> = out_ty
            .iter()
            .enumerate()
            .map(|(i, t)| sym(format!("{op}{n}_{i}"), t.clone()))
            .collect();
        let r_names: Vec<String> = (0..m).map(|i| format!("{op}{n}_{i}")).collect();
        let mut open: Vec<bool> = vec![true; m];
        // Replace a result constant by its defining term while an ensures
        // clause pins one down.
        loop {
            let ens: Vec<Formula> = c.ensures.iter().map(|e| self.inst(e, &st.stack, Some(&r))).collect();
            let still_open: Vec<String> = (0..m).filter(|&i| open[i]).map(|i| r_names[i].clone()).collect();
            let pin = ens.iter().find_map(|e| match e {
                Formula::Cmp(CmpOp::Eq, a, b) => [(a, b), (b, a)].into_iter().find_map(|(x, t)| match x {
                    Term::Sym(name, _) if still_open.contains(name) && !mentions(t, &still_open) => {
                        Some((r_names.iter().position(|n| n == name).unwrap(), t.clone()))
                    }
                    _ => None,
                }),
                _ => None,
            });
            match pin {
                Some((i, t)) => {
                    r[i] = t;
                    open[i] = false;
                }
                None => {
                    for (k, e) in ens.into_iter().enumerate() {
                        applied.ensures.push(k);
                        st.assume(e);
                    }
                    break;
                }
            }
        }
        self.out.applied.push(applied);
        st.stack = r;
        Ok(vec![st])
    }
}

fn instantiate_term(t: &Term, s: &[Term], names: &BTreeMap<String, Term>) -> Term {
    super::simplify::simplify_term(
        t,
        &Subst {
            s: Some(s),
            result: None,
            names: Some(names),
        },
    )
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
    fn toy_vcs_all_close_by_simplification() {
        let out = generate_mono(&tp("parameter nat; storage nat; code { UNPAIR; ADD; NIL operation; PAIR }"), &SpecSidecar::default()).unwrap();
        assert!(out.vcs.iter().any(|v| v.name == "add@1.0:precondition.0"));
        for v in &out.vcs {
            assert!(v.is_trivial(), "{} : {}", v.name, v.goal);
        }
        assert_eq!(out.applied.len(), 6);
    }

    #[test]
    fn identity_storage_is_pinned() {
        let spec = parse_sidecar("ensures: storage_out = storage_in").unwrap();
        let out = generate_mono(&tp("parameter unit; storage nat; code { CDR; NIL operation; PAIR }"), &spec).unwrap();
        let e = out.vcs.iter().find(|v| v.name == "contract:ensures.0").unwrap();
        assert_eq!(e.goal, Formula::True);
    }

    #[test]
    fn if_forks_paths() {
        let src = "parameter bool; storage nat; code { UNPAIR; IF { PUSH nat 1; ADD } { }; NIL operation; PAIR }";
        let out = generate_mono(&tp(src), &parse_sidecar("ensures: storage_out >= storage_in").unwrap()).unwrap();
        let ens: Vec<_> = out.vcs.iter().filter(|v| v.name.starts_with("contract:ensures")).collect();
        assert_eq!(ens.len(), 2);
    }

    #[test]
    fn loops_need_invariants() {
        let src = "parameter nat; storage nat; code { CAR; PUSH bool False; LOOP { PUSH bool False }; NIL operation; PAIR }";
        let e = generate_mono(&tp(src), &SpecSidecar::default()).unwrap_err();
        assert_eq!(e, VcError::MissingInvariant("1.1.0".parse().unwrap()));
        let out = generate_mono(&tp(src), &parse_sidecar("invariant@1.1.0: true").unwrap()).unwrap();
        let names: Vec<_> = out.vcs.iter().map(|v| v.name.as_str()).collect();
        assert!(names.contains(&"loop@1.1.0:invariant-init"));
        assert!(names.contains(&"loop@1.1.0:invariant-preserved"));
    }

    #[test]
    fn failwith_ends_the_path() {
        let src = "parameter nat; storage nat; code { CAR; FAILWITH }";
        let out = generate_mono(&tp(src), &parse_sidecar("ensures: 0 = 1").unwrap()).unwrap();
        assert!(!out.vcs.iter().any(|v| v.name.starts_with("contract:ensures")));
    }
}
