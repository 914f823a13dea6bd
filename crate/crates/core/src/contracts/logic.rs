//! User-declared logic functions over integers, such as `fact`.

use std::collections::BTreeMap;

use num_bigint::BigInt;

use super::formula::{ArithOp, CmpOp, Formula, Term};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogicFn {
    pub name: String,
    pub params: Vec<String>,
    pub body: Term,
}

impl LogicFn {
    pub fn is_recursive(&self) -> bool {
        calls_in_term(&self.body).iter().any(|(n, _)| *n == self.name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LogicError {
    #[error("logic function {0} is already declared")]
    Duplicate(String),
    #[error("in {func}: unknown function {name}")]
    UnknownFunction { func: String, name: String },
    #[error("in {func}: {name} expects {expected} arguments, got {found}")]
    Arity {
        func: String,
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("in {func}: unbound variable {var}")]
    UnboundVar { func: String, var: String },
    #[error("in {func}: {what} is not allowed in a logic function")]
    NotAllowed { func: String, what: String },
    #[error("in {func}: recursive call {call} does not decrease a bounded argument")]
    NonTerminating { func: String, call: String },
}

/// Declared functions in declaration order; a body may call itself and any
/// earlier function.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LogicTable {
    funcs: BTreeMap<String, LogicFn>,
    order: Vec<String>,
}

impl LogicTable {
    pub fn new() -> LogicTable {
        LogicTable::default()
    }

    pub fn get(&self, name: &str) -> Option<&LogicFn> {
        self.funcs.get(name)
    }

    /// Functions in declaration order.
    pub fn iter(&self) -> impl Iterator<Item = &LogicFn> {
        self.order.iter().map(|n| &self.funcs[n])
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Declares `name(params) = body`. The body is an integer term; a
    /// recursive call must pass `p - k` (k >= 1) for some fixed parameter `p`
    /// and sit where a test on the enclosing conditionals bounds `p` from
    /// below.
    pub fn declare(&mut self, name: &str, params: Vec<String>, body: Term) -> Result<&LogicFn, LogicError> {
        if self.funcs.contains_key(name) {
            return Err(LogicError::Duplicate(name.into()));
        }
        let f = LogicFn {
            name: name.into(),
            params,
            body,
        };
        self.check_shape(&f)?;
        check_termination(&f)?;
        self.order.push(name.into());
        self.funcs.insert(name.into(), f);
        Ok(&self.funcs[name])
    }

    fn check_shape(&self, f: &LogicFn) -> Result<(), LogicError> {
        let err = |what: String| LogicError::NotAllowed {
            func: f.name.clone(),
            what,
        };
        let mut bad = None;
        let check_term = |t: &Term| -> Result<(), LogicError> {
            match t {
                Term::Int(_) | Term::Arith(..) | Term::Neg(_) | Term::Ite(..) => Ok(()),
                Term::Var(v) if f.params.contains(v) => Ok(()),
                Term::Var(v) => Err(LogicError::UnboundVar {
                    func: f.name.clone(),
                    var: v.clone(),
                }),
                Term::Call(n, args) => {
                    let expected = if *n == f.name {
                        f.params.len()
                    } else {
                        match self.funcs.get(n) {
                            Some(g) => g.params.len(),
                            None => {
                                return Err(LogicError::UnknownFunction {
                                    func: f.name.clone(),
                                    name: n.clone(),
                                })
                            }
                        }
                    };
                    if expected != args.len() {
                        return Err(LogicError::Arity {
                            func: f.name.clone(),
                            name: n.clone(),
                            expected,
                            found: args.len(),
                        });
                    }
                    Ok(())
                }
                other => Err(err(format!("term {other}"))),
            }
        };
        let probe = Formula::Cmp(CmpOp::Eq, f.body.clone(), Term::Int(0.into()));
        for t in probe.terms() {
            if let Err(e) = check_term(t) {
                bad.get_or_insert(e);
            }
        }
        let mut fs = Vec::new();
        collect_formulas(&probe, &mut fs);
        for g in fs {
            match g {
                Formula::True
                | Formula::False
                | Formula::Cmp(..)
                | Formula::Not(_)
                | Formula::And(_)
                | Formula::Or(_)
                | Formula::Implies(..)
                | Formula::Iff(..) => {}
                other => {
                    bad.get_or_insert(err(format!("formula {other}")));
                }
            }
        }
        bad.map_or(Ok(()), Err)
    }
}

fn collect_formulas<'a>(f: &'a Formula, out: &mut Vec<&'a Formula>) {
    out.push(f);
    let (ts, fs) = f.parts();
    for t in ts {
        collect_in_term(t, out);
    }
    for g in fs {
        collect_formulas(g, out);
    }
}

fn collect_in_term<'a>(t: &'a Term, out: &mut Vec<&'a Formula>) {
    let (ts, fs) = t.parts();
    for x in ts {
        collect_in_term(x, out);
    }
    for g in fs {
        collect_formulas(g, out);
    }
}

fn calls_in_term(t: &Term) -> Vec<(&str, &[Term])> {
    let mut out = Vec::new();
    fn go<'a>(t: &'a Term, out: &mut Vec<(&'a str, &'a [Term])>) {
        if let Term::Call(n, args) = t {
            out.push((n.as_str(), args.as_slice()));
        }
        let (ts, fs) = t.parts();
        for x in ts {
            go(x, out);
        }
        for f in fs {
            for x in f.terms() {
                if let Term::Call(n, args) = x {
                    out.push((n.as_str(), args.as_slice()));
                }
            }
        }
    }
    go(t, &mut out);
    out
}

/// Lower bound on a parameter implied by a condition being true (`pos`) or
/// false.
fn bound_from(cond: &Formula, pos: bool) -> Option<(String, BigInt)> {
    let Formula::Cmp(op, a, b) = cond else {
        return None;
    };
    // Normalize to `var op c`.
    let (op, v, c) = match (a, b) {
        (Term::Var(v), Term::Int(c)) => (*op, v, c),
        (Term::Int(c), Term::Var(v)) => (
            match op {
                CmpOp::Lt => CmpOp::Gt,
                CmpOp::Le => CmpOp::Ge,
                CmpOp::Gt => CmpOp::Lt,
                CmpOp::Ge => CmpOp::Le,
                o => *o,
            },
            v,
            c,
        ),
        _ => return None,
    };
    let one = BigInt::from(1);
    let lb = match (op, pos) {
        (CmpOp::Ge, true) | (CmpOp::Lt, false) => c.clone(),
        (CmpOp::Gt, true) | (CmpOp::Le, false) => c + &one,
        (CmpOp::Eq, true) => c.clone(),
        _ => return None,
    };
    Some((v.clone(), lb))
}

fn check_termination(f: &LogicFn) -> Result<(), LogicError> {
    // For every recursive call, the set of parameter positions that decrease
    // while bounded below at that call site.
    let mut sites: Vec<(String, Vec<usize>)> = Vec::new();
    fn go(t: &Term, f: &LogicFn, bounds: &mut Vec<String>, sites: &mut Vec<(String, Vec<usize>)>) {
        match t {
            Term::Ite(c, a, b) => {
                visit_formula(c, f, bounds, sites);
                for (branch, pos) in [(a, true), (b, false)] {
                    let added = bound_from(c, pos);
                    if let Some((v, _)) = &added {
                        bounds.push(v.clone());
                    }
                    go(branch, f, bounds, sites);
                    if added.is_some() {
                        bounds.pop();
                    }
                }
            }
            Term::Call(n, args) => {
                if *n == f.name {
                    let ok = f
                        .params
                        .iter()
                        .enumerate()
                        .filter(|(j, p)| bounds.contains(p) && decreases(&args[*j], p))
                        .map(|(j, _)| j)
                        .collect();
                    sites.push((t.to_string(), ok));
                }
                for a in args {
                    go(a, f, bounds, sites);
                }
            }
            _ => {
                let (ts, fs) = t.parts();
                for x in ts {
                    go(x, f, bounds, sites);
                }
                for g in fs {
                    visit_formula(g, f, bounds, sites);
                }
            }
        }
    }
    fn visit_formula(g: &Formula, f: &LogicFn, bounds: &mut Vec<String>, sites: &mut Vec<(String, Vec<usize>)>) {
        let (ts, fs) = g.parts();
        for x in ts {
            go(x, f, bounds, sites);
        }
        for h in fs {
            visit_formula(h, f, bounds, sites);
        }
    }
    go(&f.body, f, &mut Vec::new(), &mut sites);
    if sites.is_empty() {
        return Ok(());
    }
    let common = (0..f.params.len()).find(|j| sites.iter().all(|(_, ok)| ok.contains(j)));
    match common {
        Some(_) => Ok(()),
        None => {
            let call = sites
                .iter()
                .find(|(_, ok)| ok.is_empty())
                .unwrap_or(&sites[0])
                .0
                .clone();
            Err(LogicError::NonTerminating {
                func: f.name.clone(),
                call,
            })
        }
    }
}

fn decreases(arg: &Term, p: &str) -> bool {
    match arg {
        Term::Arith(ArithOp::Sub, a, k) => {
            matches!(&**a, Term::Var(v) if v == p) && matches!(&**k, Term::Int(k) if *k >= BigInt::from(1))
        }
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contracts::formula::build::*;

    fn fact_body() -> Term {
        ite(
            cmp(CmpOp::Le, var("n"), int(0)),
            int(1),
            mul(var("n"), Term::Call("fact".into(), vec![sub(var("n"), int(1))])),
        )
    }

    #[test]
    fn accepts_fact_fib_and_constants() {
        let mut t = LogicTable::new();
        t.declare("fact", vec!["n".into()], fact_body()).unwrap();
        let fib = ite(
            cmp(CmpOp::Le, var("n"), int(1)),
            var("n"),
            add(
                Term::Call("fib".into(), vec![sub(var("n"), int(1))]),
                Term::Call("fib".into(), vec![sub(var("n"), int(2))]),
            ),
        );
        t.declare("fib", vec!["n".into()], fib).unwrap();
        t.declare("c", vec![], int(7)).unwrap();
        assert!(t.get("fact").unwrap().is_recursive());
        assert!(!t.get("c").unwrap().is_recursive());
        assert_eq!(t.iter().map(|f| f.name.as_str()).collect::<Vec<_>>(), ["fact", "fib", "c"]);
    }

    #[test]
    fn rejects_non_decreasing_and_unguarded() {
        let mut t = LogicTable::new();
        let up = ite(
            cmp(CmpOp::Le, var("n"), int(0)),
            int(1),
            Term::Call("f".into(), vec![add(var("n"), int(1))]),
        );
        assert!(matches!(
            t.declare("f", vec!["n".into()], up),
            Err(LogicError::NonTerminating { .. })
        ));
        let unguarded = Term::Call("g".into(), vec![sub(var("n"), int(1))]);
        assert!(matches!(
            t.declare("g", vec!["n".into()], unguarded),
            Err(LogicError::NonTerminating { .. })
        ));
        // The call sits in the branch where `n <= 0`, so nothing bounds it.
        let wrong_branch = ite(
            cmp(CmpOp::Le, var("n"), int(0)),
            Term::Call("h".into(), vec![sub(var("n"), int(1))]),
            int(1),
        );
        assert!(t.declare("h", vec!["n".into()], wrong_branch).is_err());
    }

    #[test]
    fn rejects_unknown_names() {
        let mut t = LogicTable::new();
        assert!(matches!(
            t.declare("f", vec!["n".into()], var("m")),
            Err(LogicError::UnboundVar { .. })
        ));
        assert!(matches!(
            t.declare("f", vec![], Term::Call("nope".into(), vec![])),
            Err(LogicError::UnknownFunction { .. })
        ));
        assert!(matches!(
            t.declare("f", vec![], s(0)),
            Err(LogicError::NotAllowed { .. })
        ));
        t.declare("f", vec![], int(1)).unwrap();
        assert!(matches!(t.declare("f", vec![], int(1)), Err(LogicError::Duplicate(_))));
    }
}
