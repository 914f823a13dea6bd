use super::ast::{Contract, Instr, Node};
use crate::model::Ty;

const WIDTH: usize = 78;

fn ty_atom(t: &Ty) -> String {
    if t.args().is_empty() {
        t.to_string()
    } else {
        format!("({t})")
    }
}

fn head(i: &Instr) -> String {
    let mut s = i.node.name().to_owned();
    for a in &i.annots {
        s.push(' ');
        s.push_str(a);
    }
    match &i.node {
        Node::Dup(n) | Node::Drop(n) | Node::Dip(n, _) if *n != 1 => s.push_str(&format!(" {n}")),
        Node::Dig(n) | Node::Dug(n) => s.push_str(&format!(" {n}")),
        Node::Push(t, v) => s.push_str(&format!(" {} {}", ty_atom(t), v.to_atom())),
        Node::Nil(t) | Node::None(t) | Node::Left(t) | Node::Right(t) | Node::Unpack(t) => {
            s.push(' ');
            s.push_str(&ty_atom(t));
        }
        _ => {}
    }
    s
}

fn one_line(i: &Instr) -> String {
    match &i.node {
        Node::Seq(..) | Node::Nop => {
            let items: Vec<_> = i.seq_items().into_iter().map(one_line).collect();
            if items.is_empty() {
                "{}".into()
            } else {
                format!("{{ {} }}", items.join(" ; "))
            }
        }
        _ => {
            let mut s = head(i);
            for c in i.children() {
                s.push(' ');
                s.push_str(&one_line_block(c));
            }
            s
        }
    }
}

fn one_line_block(i: &Instr) -> String {
    match &i.node {
        Node::Seq(..) | Node::Nop => one_line(i),
        _ => format!("{{ {} }}", one_line(i)),
    }
}

/// Renders `i` as an instruction starting at column `col`.
fn instr(i: &Instr, col: usize) -> String {
    let flat = one_line(i);
    if col + flat.len() <= WIDTH {
        return flat;
    }
    match &i.node {
        Node::Seq(..) | Node::Nop => block(i, col),
        _ => {
            let h = head(i);
            let inner = col + h.len() + 1;
            let parts: Vec<_> = i.children().into_iter().map(|c| block(c, inner)).collect();
            format!("{h} {}", parts.join(&format!("\n{}", " ".repeat(inner))))
        }
    }
}

/// Renders `i` as a braced block starting at column `col`.
fn block(i: &Instr, col: usize) -> String {
    let flat = one_line_block(i);
    if col + flat.len() <= WIDTH {
        return flat;
    }
    let items = match &i.node {
        Node::Seq(..) | Node::Nop => i.seq_items(),
        _ => vec![i],
    };
    let pad = " ".repeat(col + 2);
    let rendered: Vec<_> = items.into_iter().map(|c| instr(c, col + 2)).collect();
    format!("{{ {} }}", rendered.join(&format!(" ;\n{pad}")))
}

/// Canonical source for a contract: sections in `parameter`, `storage`,
/// `code` order. Reparsing the output yields an equal contract.
pub fn pretty_print(c: &Contract) -> String {
    format!(
        "parameter {};\nstorage {};\ncode {};\n",
        c.parameter,
        c.storage,
        block(&c.code, 5)
    )
}

/// Renders a code fragment as a braced block.
pub fn print_instr(i: &Instr) -> String {
    block(i, 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_instrs, parse_source};

    #[test]
    fn single_instruction_code() {
        let c = parse_source("parameter unit; storage unit; code CDR").unwrap();
        assert!(pretty_print(&c).contains("code { CDR };"));
    }

    #[test]
    fn nested_blocks_survive() {
        let i = parse_instrs("{ { CDR ; CAR } ; ADD ; {} }").unwrap();
        let printed = print_instr(&i);
        assert_eq!(parse_instrs(&printed).unwrap(), i);
    }

    #[test]
    fn long_code_wraps_and_reparses() {
        let src = "parameter nat; storage nat; code { CAR; PUSH @index nat 1; DUP @acc; \
                   DIP 2 { DUP; PUSH nat 0; COMPARE; NEQ }; DIG 2; \
                   LOOP { DIP { DUP; DIP { PUSH nat 1; ADD @ipp } }; MUL; \
                   DIP { DIP { DUP }; DUP; DIP { SWAP }; COMPARE; LE }; SWAP }; \
                   DIP { DROP; DROP }; NIL operation; PAIR }";
        let c = parse_source(src).unwrap();
        let out = pretty_print(&c);
        assert!(out.lines().count() > 3);
        assert!(out.lines().all(|l| l.len() <= WIDTH + 10), "{out}");
        assert_eq!(parse_source(&out).unwrap(), c);
    }
}
