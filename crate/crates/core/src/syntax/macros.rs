use super::ast::{Contract, Instr, Node};

fn expansion(node: &Node) -> Option<(&'static str, Instr)> {
    let name = node.name();
    let body = match node {
        // DUP; CAR; DIP { CDR }
        Node::Unpair => Instr::block(vec![
            Node::Dup(1).into(),
            Node::Car.into(),
            Node::Dip(1, Box::new(Node::Cdr.into())).into(),
        ]),
        Node::CmpMacro(c) => Instr::block(vec![Node::Compare.into(), Node::Test(*c).into()]),
        _ => return None,
    };
    Some((name, body))
}

/// Replaces every macro with its core expansion. The expanded node keeps
/// the macro's span and annotations and records the macro name in
/// [`Instr::origin`].
pub fn expand_macros(i: &Instr) -> Instr {
    if let Some((name, mut body)) = expansion(&i.node) {
        body.span = i.span;
        body.annots = i.annots.clone();
        body.origin = Some(name);
        return body;
    }
    let rec = |b: &Instr| Box::new(expand_macros(b));
    let node = match &i.node {
        Node::Seq(a, b) => Node::Seq(rec(a), rec(b)),
        Node::Dip(n, b) => Node::Dip(*n, rec(b)),
        Node::If(a, b) => Node::If(rec(a), rec(b)),
        Node::IfLeft(a, b) => Node::IfLeft(rec(a), rec(b)),
        Node::IfNone(a, b) => Node::IfNone(rec(a), rec(b)),
        Node::IfCons(a, b) => Node::IfCons(rec(a), rec(b)),
        Node::Loop(b) => Node::Loop(rec(b)),
        Node::LoopLeft(b) => Node::LoopLeft(rec(b)),
        Node::Iter(b) => Node::Iter(rec(b)),
        other => other.clone(),
    };
    Instr { node, ..i.clone() }
}

pub fn expand_contract(c: &Contract) -> Contract {
    Contract {
        code: expand_macros(&c.code),
        ..c.clone()
    }
}

/// True when no macro node remains anywhere in the tree.
pub fn is_core(i: &Instr) -> bool {
    i.walk().iter().all(|(_, n)| !n.node.is_macro())
}
