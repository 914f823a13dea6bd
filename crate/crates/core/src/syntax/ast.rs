use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;

use super::Span;
use crate::model::{Ty, Value};

/// Integer predicates consumed after `COMPARE`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cond {
    Eq,
    Neq,
    Lt,
    Le,
    Gt,
    Ge,
}

impl Cond {
    pub const ALL: [Cond; 6] = [Cond::Eq, Cond::Neq, Cond::Lt, Cond::Le, Cond::Gt, Cond::Ge];

    pub fn name(self) -> &'static str {
        match self {
            Cond::Eq => "EQ",
            Cond::Neq => "NEQ",
            Cond::Lt => "LT",
            Cond::Le => "LE",
            Cond::Gt => "GT",
            Cond::Ge => "GE",
        }
    }

    /// Whether an integer with the given sign satisfies the predicate.
    pub fn holds(self, sign: std::cmp::Ordering) -> bool {
        use std::cmp::Ordering::*;
        match self {
            Cond::Eq => sign == Equal,
            Cond::Neq => sign != Equal,
            Cond::Lt => sign == Less,
            Cond::Le => sign != Greater,
            Cond::Gt => sign == Greater,
            Cond::Ge => sign != Less,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Node {
    /// Two-child sequence; blocks are right-nested.
    Seq(Box<Instr>, Box<Instr>),
    /// The empty block `{}`.
    Nop,
    Car,
    Cdr,
    Pair,
    /// Macro; removed by [`super::expand_macros`].
    Unpair,
    /// `DUP n`, 1-based (`DUP` is `DUP 1`).
    Dup(usize),
    Swap,
    /// `DIP n { body }` (`DIP` is `DIP 1`).
    Dip(usize, Box<Instr>),
    Dig(usize),
    Dug(usize),
    Drop(usize),
    Push(Ty, Value),
    Unit,
    Nil(Ty),
    Cons,
    If(Box<Instr>, Box<Instr>),
    IfLeft(Box<Instr>, Box<Instr>),
    IfNone(Box<Instr>, Box<Instr>),
    IfCons(Box<Instr>, Box<Instr>),
    /// `LEFT t`; `t` is the right-hand type.
    Left(Ty),
    /// `RIGHT t`; `t` is the left-hand type.
    Right(Ty),
    Some,
    None(Ty),
    Loop(Box<Instr>),
    LoopLeft(Box<Instr>),
    Iter(Box<Instr>),
    Compare,
    Test(Cond),
    /// `CMPEQ` and friends; macros.
    CmpMacro(Cond),
    Add,
    Sub,
    Mul,
    Ediv,
    Neg,
    Abs,
    IsNat,
    Int,
    And,
    Or,
    Not,
    Xor,
    Mem,
    Get,
    Update,
    Size,
    Concat,
    Failwith,
    Sha256,
    Sha512,
    Blake2b,
    HashKey,
    CheckSignature,
    Pack,
    Unpack(Ty),
    Amount,
    Balance,
    Now,
    Sender,
    Source,
    SelfContract,
    ChainId,
    TransferTokens,
    SetDelegate,
}

impl Node {
    /// Michelson opcode name.
    pub fn name(&self) -> &'static str {
        match self {
            Node::Seq(..) => "SEQ",
            Node::Nop => "NOP",
            Node::Car => "CAR",
            Node::Cdr => "CDR",
            Node::Pair => "PAIR",
            Node::Unpair => "UNPAIR",
            Node::Dup(_) => "DUP",
            Node::Swap => "SWAP",
            Node::Dip(..) => "DIP",
            Node::Dig(_) => "DIG",
            Node::Dug(_) => "DUG",
            Node::Drop(_) => "DROP",
            Node::Push(..) => "PUSH",
            Node::Unit => "UNIT",
            Node::Nil(_) => "NIL",
            Node::Cons => "CONS",
            Node::If(..) => "IF",
            Node::IfLeft(..) => "IF_LEFT",
            Node::IfNone(..) => "IF_NONE",
            Node::IfCons(..) => "IF_CONS",
            Node::Left(_) => "LEFT",
            Node::Right(_) => "RIGHT",
            Node::Some => "SOME",
            Node::None(_) => "NONE",
            Node::Loop(_) => "LOOP",
            Node::LoopLeft(_) => "LOOP_LEFT",
            Node::Iter(_) => "ITER",
            Node::Compare => "COMPARE",
            Node::Test(c) => c.name(),
            Node::CmpMacro(c) => match c {
                Cond::Eq => "CMPEQ",
                Cond::Neq => "CMPNEQ",
                Cond::Lt => "CMPLT",
                Cond::Le => "CMPLE",
                Cond::Gt => "CMPGT",
                Cond::Ge => "CMPGE",
            },
            Node::Add => "ADD",
            Node::Sub => "SUB",
            Node::Mul => "MUL",
            Node::Ediv => "EDIV",
            Node::Neg => "NEG",
            Node::Abs => "ABS",
            Node::IsNat => "ISNAT",
            Node::Int => "INT",
            Node::And => "AND",
            Node::Or => "OR",
            Node::Not => "NOT",
            Node::Xor => "XOR",
            Node::Mem => "MEM",
            Node::Get => "GET",
            Node::Update => "UPDATE",
            Node::Size => "SIZE",
            Node::Concat => "CONCAT",
            Node::Failwith => "FAILWITH",
            Node::Sha256 => "SHA256",
            Node::Sha512 => "SHA512",
            Node::Blake2b => "BLAKE2B",
            Node::HashKey => "HASH_KEY",
            Node::CheckSignature => "CHECK_SIGNATURE",
            Node::Pack => "PACK",
            Node::Unpack(_) => "UNPACK",
            Node::Amount => "AMOUNT",
            Node::Balance => "BALANCE",
            Node::Now => "NOW",
            Node::Sender => "SENDER",
            Node::Source => "SOURCE",
            Node::SelfContract => "SELF",
            Node::ChainId => "CHAIN_ID",
            Node::TransferTokens => "TRANSFER_TOKENS",
            Node::SetDelegate => "SET_DELEGATE",
        }
    }

    pub fn is_macro(&self) -> bool {
        matches!(self, Node::Unpair | Node::CmpMacro(_))
    }

    /// Leaf instructions are the ones with an opcode contract; each executed
    /// leaf costs one unit of fuel.
    pub fn is_leaf(&self) -> bool {
        !matches!(
            self,
            Node::Seq(..)
                | Node::Nop
                | Node::Dip(..)
                | Node::If(..)
                | Node::IfLeft(..)
                | Node::IfNone(..)
                | Node::IfCons(..)
                | Node::Loop(_)
                | Node::LoopLeft(_)
                | Node::Iter(_)
        ) && !self.is_macro()
    }

    pub fn children(&self) -> Vec<&Instr> {
        match self {
            Node::Seq(a, b)
            | Node::If(a, b)
            | Node::IfLeft(a, b)
            | Node::IfNone(a, b)
            | Node::IfCons(a, b) => vec![a, b],
            Node::Dip(_, b) | Node::Loop(b) | Node::LoopLeft(b) | Node::Iter(b) => vec![b],
            _ => Vec::new(),
        }
    }
}

/// An instruction with source metadata. Equality looks at the node only:
/// spans, annotations and macro origin are metadata.
#[derive(Debug, Clone)]
pub struct Instr {
    pub node: Node,
    pub span: Option<Span>,
    pub annots: Vec<String>,
    /// Name of the macro this node was expanded from, if any.
    pub origin: Option<&'static str>,
}

impl PartialEq for Instr {
    fn eq(&self, other: &Self) -> bool {
        self.node == other.node
    }
}

impl Eq for Instr {}

impl From<Node> for Instr {
    fn from(node: Node) -> Self {
        Instr::new(node)
    }
}

impl Instr {
    pub fn new(node: Node) -> Instr {
        Instr {
            node,
            span: None,
            annots: Vec::new(),
            origin: None,
        }
    }

    pub fn seq(a: Instr, b: Instr) -> Instr {
        Instr::new(Node::Seq(Box::new(a), Box::new(b)))
    }

    /// Right-nested sequence of the given instructions (`Nop` when empty).
    pub fn block(items: Vec<Instr>) -> Instr {
        let mut it = items.into_iter().rev();
        match it.next() {
            None => Instr::new(Node::Nop),
            Some(last) => it.fold(last, |acc, i| Instr::seq(i, acc)),
        }
    }

    /// The sequence items of this instruction viewed as a block.
    pub fn seq_items(&self) -> Vec<&Instr> {
        let mut out = Vec::new();
        let mut cur = self;
        loop {
            match &cur.node {
                Node::Seq(a, b) => {
                    out.push(&**a);
                    cur = b;
                }
                Node::Nop if out.is_empty() => return out,
                _ => {
                    out.push(cur);
                    return out;
                }
            }
        }
    }

    pub fn children(&self) -> Vec<&Instr> {
        self.node.children()
    }

    pub fn at(&self, path: &Path) -> Option<&Instr> {
        let mut cur = self;
        for &ix in &path.0 {
            cur = *cur.children().get(ix as usize)?;
        }
        Some(cur)
    }

    /// Source span of the node at `path`, or of its closest ancestor that
    /// has one (macro expansions only carry the macro's span).
    pub fn span_at(&self, path: &Path) -> Option<Span> {
        let mut cur = self;
        let mut best = self.span;
        for &ix in &path.0 {
            cur = *cur.children().get(ix as usize)?;
            best = cur.span.or(best);
        }
        best
    }

    /// Every node in pre-order with its path.
    pub fn walk(&self) -> Vec<(Path, &Instr)> {
        fn go<'a>(i: &'a Instr, p: Path, out: &mut Vec<(Path, &'a Instr)>) {
            out.push((p.clone(), i));
            for (ix, c) in i.children().into_iter().enumerate() {
                go(c, p.child(ix), out);
            }
        }
        let mut out = Vec::new();
        go(self, Path::root(), &mut out);
        out
    }
}

/// Program point: child indices from the root of the code tree.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Path(pub Vec<u32>);

impl Path {
    pub fn root() -> Path {
        Path(Vec::new())
    }

    pub fn child(&self, ix: usize) -> Path {
        let mut v = self.0.clone();
        v.push(ix as u32);
        Path(v)
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("root");
        }
        for (i, ix) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{ix}")?;
        }
        Ok(())
    }
}

impl FromStr for Path {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "root" || s.is_empty() {
            return Ok(Path::root());
        }
        s.split('.')
            .map(|p| p.parse::<u32>().map_err(|_| format!("invalid path component {p:?} in {s:?}")))
            .collect::<Result<_, _>>()
            .map(Path)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Contract {
    pub parameter: Ty,
    pub storage: Ty,
    pub code: Instr,
}

/// Untyped data expression, as written in literals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Data {
    Int(BigInt),
    String(String),
    Bytes(Vec<u8>),
    /// Constructor application: `Pair`, `Left`, `Some`, `Elt`, `True`, ...
    Prim(String, Vec<Data>),
    Seq(Vec<Data>),
}

impl fmt::Display for Data {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Data::Int(n) => write!(f, "{n}"),
            Data::String(s) => write!(f, "{s:?}"),
            Data::Bytes(b) => write!(f, "0x{}", hex::encode(b)),
            Data::Prim(p, args) if args.is_empty() => f.write_str(p),
            Data::Prim(p, args) => {
                write!(f, "({p}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                f.write_str(")")
            }
            Data::Seq(items) => {
                f.write_str("{")?;
                for (i, d) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(";")?;
                    }
                    write!(f, " {d}")?;
                }
                f.write_str(" }")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_is_right_nested() {
        let b = Instr::block(vec![Node::Car.into(), Node::Cdr.into(), Node::Pair.into()]);
        assert_eq!(
            b,
            Instr::seq(Node::Car.into(), Instr::seq(Node::Cdr.into(), Node::Pair.into()))
        );
        assert_eq!(b.seq_items().len(), 3);
        assert_eq!(Instr::block(vec![]).node, Node::Nop);
        assert!(Instr::block(vec![]).seq_items().is_empty());
    }

    #[test]
    fn path_round_trips() {
        let p: Path = "1.0.2".parse().unwrap();
        assert_eq!(p, Path(vec![1, 0, 2]));
        assert_eq!(p.to_string(), "1.0.2");
        assert_eq!("root".parse::<Path>().unwrap(), Path::root());
        assert!("1.x".parse::<Path>().is_err());
    }

    #[test]
    fn equality_ignores_metadata() {
        let mut a = Instr::new(Node::Add);
        a.annots.push("@ipp".into());
        a.span = Some(Span { start: 3, end: 6 });
        assert_eq!(a, Instr::new(Node::Add));
    }
}
