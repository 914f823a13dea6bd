use super::ast::{Cond, Contract, Data, Instr, Node};
use super::lexer::{tokenize, LexError, Token, TokenKind};
use super::Span;
use crate::model::{value_of_data, Comparable, Ty};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error(transparent)]
    Lex(#[from] LexError),
    #[error("expected {}, found {found}", expected.join(" or "))]
    Unexpected {
        expected: Vec<String>,
        found: String,
        span: Option<Span>,
    },
    #[error("unsupported opcode {name}")]
    UnsupportedOpcode { name: String, span: Span },
    #[error("duplicate section `{name}`")]
    DuplicateSection { name: String, span: Span },
    #[error("missing section `{name}`")]
    MissingSection { name: String },
    #[error("{message}")]
    Invalid { message: String, span: Option<Span> },
}

impl ParseError {
    pub fn span(&self) -> Option<Span> {
        match self {
            ParseError::Lex(e) => Some(e.span()),
            ParseError::Unexpected { span, .. } | ParseError::Invalid { span, .. } => *span,
            ParseError::UnsupportedOpcode { span, .. } | ParseError::DuplicateSection { span, .. } => Some(*span),
            ParseError::MissingSection { .. } => None,
        }
    }
}

struct Parser<'t> {
    toks: &'t [Token],
    pos: usize,
}

fn expected(what: &[&str]) -> Vec<String> {
    what.iter().map(|s| s.to_string()).collect()
}

impl<'t> Parser<'t> {
    fn peek(&self) -> Option<&'t Token> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<&'t Token> {
        let t = self.toks.get(self.pos);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn at(&self, kind: TokenKind) -> bool {
        self.peek().is_some_and(|t| t.kind == kind)
    }

    fn unexpected(&self, what: &[&str]) -> ParseError {
        match self.peek() {
            Some(t) => ParseError::Unexpected {
                expected: expected(what),
                found: format!("`{}`", t.text),
                span: Some(t.span),
            },
            None => ParseError::Unexpected {
                expected: expected(what),
                found: "end of input".into(),
                span: self.toks.last().map(|t| Span {
                    start: t.span.end,
                    end: t.span.end,
                }),
            },
        }
    }

    fn expect(&mut self, kind: TokenKind, what: &str) -> Result<&'t Token, ParseError> {
        if self.at(kind) {
            Ok(self.next().expect("peeked"))
        } else {
            Err(self.unexpected(&[what]))
        }
    }

    fn eat(&mut self, kind: TokenKind) -> bool {
        if self.at(kind) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn annotations(&mut self) -> Vec<String> {
        let mut out = Vec::new();
        while self.at(TokenKind::Annotation) {
            out.push(self.next().expect("peeked").text.clone());
        }
        out
    }

    fn done(&self) -> Result<(), ParseError> {
        match self.peek() {
            None => Ok(()),
            Some(_) => Err(self.unexpected(&["end of input"])),
        }
    }

    // ---- types ----

    /// A type at section level: composite constructors may take their
    /// arguments without surrounding parentheses.
    fn ty_top(&mut self) -> Result<Ty, ParseError> {
        if self.eat(TokenKind::LParen) {
            let t = self.ty_top()?;
            self.expect(TokenKind::RParen, "`)`")?;
            return Ok(t);
        }
        let tok = self.expect(TokenKind::TypeName, "a type")?;
        self.annotations();
        self.ty_apply(tok)
    }

    /// A type in argument position: a nullary name or a parenthesized type.
    fn ty_atom(&mut self) -> Result<Ty, ParseError> {
        if self.eat(TokenKind::LParen) {
            let t = self.ty_top()?;
            self.expect(TokenKind::RParen, "`)`")?;
            return Ok(t);
        }
        let tok = self.expect(TokenKind::TypeName, "a type")?;
        self.annotations();
        if type_arity(&tok.text).is_some_and(|a| a > 0) {
            return Err(ParseError::Invalid {
                message: format!("type `{}` takes arguments and must be parenthesized here", tok.text),
                span: Some(tok.span),
            });
        }
        self.ty_apply(tok)
    }

    fn comparable_atom(&mut self) -> Result<Comparable, ParseError> {
        let start = self.peek().map(|t| t.span);
        let t = self.ty_atom()?;
        t.comparable().ok_or_else(|| ParseError::Invalid {
            message: format!("type {t} is not comparable"),
            span: start,
        })
    }

    fn ty_apply(&mut self, tok: &Token) -> Result<Ty, ParseError> {
        let name = tok.text.as_str();
        Ok(match name {
            "int" => Ty::Int,
            "nat" => Ty::Nat,
            "string" => Ty::String,
            "bytes" => Ty::Bytes,
            "mutez" => Ty::Mutez,
            "bool" => Ty::Bool,
            "key_hash" => Ty::KeyHash,
            "timestamp" => Ty::Timestamp,
            "address" => Ty::Address,
            "key" => Ty::Key,
            "signature" => Ty::Signature,
            "chain_id" => Ty::ChainId,
            "unit" => Ty::Unit,
            "operation" => Ty::Operation,
            "option" => Ty::option(self.ty_atom()?),
            "list" => Ty::list(self.ty_atom()?),
            "contract" => Ty::contract(self.ty_atom()?),
            "set" => Ty::Set(self.comparable_atom()?),
            "or" => {
                let a = self.ty_atom()?;
                Ty::or(a, self.ty_atom()?)
            }
            "map" | "big_map" => {
                let k = self.comparable_atom()?;
                let v = self.ty_atom()?;
                if name == "map" {
                    Ty::map(k, v)
                } else {
                    Ty::big_map(k, v)
                }
            }
            "pair" => {
                let mut args = vec![self.ty_atom()?, self.ty_atom()?];
                while matches!(self.peek().map(|t| t.kind), Some(TokenKind::TypeName | TokenKind::LParen)) {
                    args.push(self.ty_atom()?);
                }
                let last = args.pop().expect("at least two");
                args.into_iter().rev().fold(last, |acc, t| Ty::pair(t, acc))
            }
            _ => {
                return Err(ParseError::Invalid {
                    message: format!("unknown type `{name}`"),
                    span: Some(tok.span),
                })
            }
        })
    }

    // ---- data ----

    fn data_top(&mut self) -> Result<Data, ParseError> {
        match self.peek() {
            Some(t) if t.kind == TokenKind::Keyword && data_arity(&t.text).is_some() => {
                self.next();
                let min = data_arity(&t.text).expect("checked");
                let mut args = Vec::new();
                for _ in 0..min {
                    args.push(self.data_atom()?);
                }
                if t.text == "Pair" {
                    while self.starts_data_atom() {
                        args.push(self.data_atom()?);
                    }
                }
                Ok(comb(&t.text, args))
            }
            _ => self.data_atom(),
        }
    }

    fn starts_data_atom(&self) -> bool {
        matches!(
            self.peek().map(|t| t.kind),
            Some(
                TokenKind::Int
                    | TokenKind::String
                    | TokenKind::Bytes
                    | TokenKind::LBrace
                    | TokenKind::LParen
                    | TokenKind::Keyword
            )
        ) && !self.peek().is_some_and(|t| matches!(t.text.as_str(), "parameter" | "storage" | "code"))
    }

    fn data_atom(&mut self) -> Result<Data, ParseError> {
        let Some(t) = self.peek() else {
            return Err(self.unexpected(&["a data literal"]));
        };
        match t.kind {
            TokenKind::Int => {
                self.next();
                Ok(Data::Int(t.int_value()))
            }
            TokenKind::String => {
                self.next();
                Ok(Data::String(t.string_value()))
            }
            TokenKind::Bytes => {
                self.next();
                Ok(Data::Bytes(t.bytes_value()))
            }
            TokenKind::LParen => {
                self.next();
                let d = self.data_top()?;
                self.expect(TokenKind::RParen, "`)`")?;
                Ok(d)
            }
            TokenKind::LBrace => {
                self.next();
                let mut items = Vec::new();
                while !self.at(TokenKind::RBrace) {
                    items.push(self.data_top()?);
                    if !self.eat(TokenKind::Semi) {
                        break;
                    }
                }
                self.expect(TokenKind::RBrace, "`}`")?;
                Ok(Data::Seq(items))
            }
            TokenKind::Keyword if matches!(t.text.as_str(), "Unit" | "True" | "False" | "None") => {
                self.next();
                Ok(Data::Prim(t.text.clone(), Vec::new()))
            }
            _ => Err(self.unexpected(&["a data literal"])),
        }
    }

    // ---- instructions ----

    fn block(&mut self) -> Result<Instr, ParseError> {
        let open = self.expect(TokenKind::LBrace, "`{`")?;
        let mut items = Vec::new();
        while !self.at(TokenKind::RBrace) {
            items.push(self.instr()?);
            if !self.eat(TokenKind::Semi) {
                break;
            }
        }
        let close = self.expect(TokenKind::RBrace, "`}`")?;
        let mut b = Instr::block(items);
        if b.span.is_none() {
            b.span = Some(Span {
                start: open.span.start,
                end: close.span.end,
            });
        }
        Ok(b)
    }

    fn count(&mut self, default: Option<usize>) -> Result<usize, ParseError> {
        if self.at(TokenKind::Int) {
            let t = self.next().expect("peeked");
            return t.text.parse::<usize>().map_err(|_| ParseError::Invalid {
                message: format!("invalid count `{}`", t.text),
                span: Some(t.span),
            });
        }
        default.ok_or_else(|| self.unexpected(&["a natural number"]))
    }

    fn instr(&mut self) -> Result<Instr, ParseError> {
        if self.at(TokenKind::LBrace) {
            return self.block();
        }
        let tok = self.expect(TokenKind::Instr, "an instruction")?;
        let annots = self.annotations();
        let bx = |i: Instr| Box::new(i);
        let node = match tok.text.as_str() {
            "CAR" => Node::Car,
            "CDR" => Node::Cdr,
            "PAIR" => Node::Pair,
            "UNPAIR" => Node::Unpair,
            "DUP" => {
                let n = self.count(Some(1))?;
                if n == 0 {
                    return Err(ParseError::Invalid {
                        message: "DUP 0 is forbidden".into(),
                        span: Some(tok.span),
                    });
                }
                Node::Dup(n)
            }
            "SWAP" => Node::Swap,
            "DIP" => {
                let n = self.count(Some(1))?;
                Node::Dip(n, bx(self.block()?))
            }
            "DIG" => Node::Dig(self.count(None)?),
            "DUG" => Node::Dug(self.count(None)?),
            "DROP" => Node::Drop(self.count(Some(1))?),
            "PUSH" => {
                let ty = self.ty_atom()?;
                let start = self.peek().map(|t| t.span);
                let data = self.data_atom()?;
                if !ty.is_pushable() {
                    return Err(ParseError::Invalid {
                        message: format!("type {ty} cannot be pushed"),
                        span: Some(tok.span),
                    });
                }
                let v = value_of_data(&data, &ty).map_err(|e| ParseError::Invalid {
                    message: e.to_string(),
                    span: start,
                })?;
                Node::Push(ty, v)
            }
            "UNIT" => Node::Unit,
            "NIL" => Node::Nil(self.ty_atom()?),
            "CONS" => Node::Cons,
            "IF" | "IF_LEFT" | "IF_NONE" | "IF_CONS" => {
                let a = bx(self.block()?);
                let b = bx(self.block()?);
                match tok.text.as_str() {
                    "IF" => Node::If(a, b),
                    "IF_LEFT" => Node::IfLeft(a, b),
                    "IF_NONE" => Node::IfNone(a, b),
                    _ => Node::IfCons(a, b),
                }
            }
            "LEFT" => Node::Left(self.ty_atom()?),
            "RIGHT" => Node::Right(self.ty_atom()?),
            "SOME" => Node::Some,
            "NONE" => Node::None(self.ty_atom()?),
            "LOOP" => Node::Loop(bx(self.block()?)),
            "LOOP_LEFT" => Node::LoopLeft(bx(self.block()?)),
            "ITER" => Node::Iter(bx(self.block()?)),
            "COMPARE" => Node::Compare,
            "ADD" => Node::Add,
            "SUB" => Node::Sub,
            "MUL" => Node::Mul,
            "EDIV" => Node::Ediv,
            "NEG" => Node::Neg,
            "ABS" => Node::Abs,
            "ISNAT" => Node::IsNat,
            "INT" => Node::Int,
            "AND" => Node::And,
            "OR" => Node::Or,
            "NOT" => Node::Not,
            "XOR" => Node::Xor,
            "MEM" => Node::Mem,
            "GET" => Node::Get,
            "UPDATE" => Node::Update,
            "SIZE" => Node::Size,
            "CONCAT" => Node::Concat,
            "FAILWITH" => Node::Failwith,
            "SHA256" => Node::Sha256,
            "SHA512" => Node::Sha512,
            "BLAKE2B" => Node::Blake2b,
            "HASH_KEY" => Node::HashKey,
            "CHECK_SIGNATURE" => Node::CheckSignature,
            "PACK" => Node::Pack,
            "UNPACK" => Node::Unpack(self.ty_atom()?),
            "AMOUNT" => Node::Amount,
            "BALANCE" => Node::Balance,
            "NOW" => Node::Now,
            "SENDER" => Node::Sender,
            "SOURCE" => Node::Source,
            "SELF" => Node::SelfContract,
            "CHAIN_ID" => Node::ChainId,
            "TRANSFER_TOKENS" => Node::TransferTokens,
            "SET_DELEGATE" => Node::SetDelegate,
            other => match Cond::ALL.iter().find(|c| c.name() == other) {
                Some(c) => Node::Test(*c),
                None => match other.strip_prefix("CMP").and_then(|r| Cond::ALL.iter().find(|c| c.name() == r)) {
                    Some(c) => Node::CmpMacro(*c),
                    None => {
                        return Err(ParseError::UnsupportedOpcode {
                            name: other.to_owned(),
                            span: tok.span,
                        })
                    }
                },
            },
        };
        let end = self.toks[self.pos - 1].span.end;
        Ok(Instr {
            node,
            span: Some(Span {
                start: tok.span.start,
                end,
            }),
            annots,
            origin: None,
        })
    }

    fn contract(&mut self) -> Result<Contract, ParseError> {
        let mut parameter = None;
        let mut storage = None;
        let mut code = None;
        while self.peek().is_some() {
            let kw = self.expect(TokenKind::Keyword, "`parameter`, `storage` or `code`")?;
            let dup = || ParseError::DuplicateSection {
                name: kw.text.clone(),
                span: kw.span,
            };
            match kw.text.as_str() {
                "parameter" => {
                    if parameter.is_some() {
                        return Err(dup());
                    }
                    parameter = Some(self.ty_top()?);
                }
                "storage" => {
                    if storage.is_some() {
                        return Err(dup());
                    }
                    storage = Some(self.ty_top()?);
                }
                "code" => {
                    if code.is_some() {
                        return Err(dup());
                    }
                    code = Some(self.instr()?);
                }
                _ => {
                    self.pos -= 1;
                    return Err(self.unexpected(&["`parameter`", "`storage`", "`code`"]));
                }
            }
            if !self.eat(TokenKind::Semi) {
                break;
            }
        }
        self.done()?;
        let missing = |name: &str| ParseError::MissingSection { name: name.into() };
        Ok(Contract {
            parameter: parameter.ok_or_else(|| missing("parameter"))?,
            storage: storage.ok_or_else(|| missing("storage"))?,
            code: code.ok_or_else(|| missing("code"))?,
        })
    }
}

fn type_arity(name: &str) -> Option<usize> {
    match name {
        "option" | "list" | "contract" | "set" => Some(1),
        "or" | "map" | "big_map" | "pair" => Some(2),
        "int" | "nat" | "string" | "bytes" | "mutez" | "bool" | "key_hash" | "timestamp" | "address" | "key"
        | "signature" | "chain_id" | "unit" | "operation" => Some(0),
        _ => None,
    }
}

fn data_arity(name: &str) -> Option<usize> {
    match name {
        "Pair" | "Elt" => Some(2),
        "Left" | "Right" | "Some" => Some(1),
        _ => None,
    }
}

fn comb(ctor: &str, mut args: Vec<Data>) -> Data {
    if ctor == "Pair" && args.len() > 2 {
        let last = args.pop().expect("nonempty");
        let tail = args.split_off(1);
        let rest = tail
            .into_iter()
            .rev()
            .fold(last, |acc, d| Data::Prim("Pair".into(), vec![d, acc]));
        args.push(rest);
    }
    Data::Prim(ctor.to_owned(), args)
}

/// Parses a whole contract (`parameter`, `storage` and `code` sections, in
/// any order).
pub fn parse_contract(tokens: &[Token]) -> Result<Contract, ParseError> {
    Parser { toks: tokens, pos: 0 }.contract()
}

/// Tokenizes and parses contract source.
pub fn parse_source(source: &str) -> Result<Contract, ParseError> {
    parse_contract(&tokenize(source)?)
}

/// Parses a sequence of instructions, with or without surrounding braces.
pub fn parse_instrs(source: &str) -> Result<Instr, ParseError> {
    let toks = tokenize(source)?;
    let mut p = Parser { toks: &toks, pos: 0 };
    let mut items = Vec::new();
    while p.peek().is_some() {
        items.push(p.instr()?);
        if !p.eat(TokenKind::Semi) {
            break;
        }
    }
    p.done()?;
    Ok(if items.len() == 1 {
        items.pop().expect("one item")
    } else {
        Instr::block(items)
    })
}

pub fn parse_type(source: &str) -> Result<Ty, ParseError> {
    let toks = tokenize(source)?;
    let mut p = Parser { toks: &toks, pos: 0 };
    let t = p.ty_top()?;
    p.done()?;
    Ok(t)
}

pub fn parse_data(source: &str) -> Result<Data, ParseError> {
    let toks = tokenize(source)?;
    let mut p = Parser { toks: &toks, pos: 0 };
    let d = p.data_top()?;
    p.done()?;
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Value;

    #[test]
    fn toy_contract() {
        let c = parse_source("parameter nat; storage nat; code { UNPAIR; ADD; NIL operation; PAIR };").unwrap();
        assert_eq!(c.parameter, Ty::Nat);
        assert_eq!(
            c.code,
            Instr::block(vec![
                Node::Unpair.into(),
                Node::Add.into(),
                Node::Nil(Ty::Operation).into(),
                Node::Pair.into()
            ])
        );
    }

    #[test]
    fn sections_in_any_order() {
        let c = parse_source("code { CDR; NIL operation; PAIR }; storage unit; parameter unit").unwrap();
        assert_eq!(c.code.seq_items().len(), 3);
    }

    #[test]
    fn section_errors() {
        assert!(matches!(
            parse_source("parameter unit; parameter unit; storage unit; code {}"),
            Err(ParseError::DuplicateSection { .. })
        ));
        assert!(matches!(
            parse_source("parameter unit; code {}"),
            Err(ParseError::MissingSection { name }) if name == "storage"
        ));
    }

    #[test]
    fn unsupported_opcode_is_named() {
        let err = parse_instrs("CAR; LAMBDA unit unit {}").unwrap_err();
        assert!(matches!(err, ParseError::UnsupportedOpcode { ref name, .. } if name == "LAMBDA"));
    }

    #[test]
    fn dip_with_count_and_annotations() {
        let i = parse_instrs("DIP 2 { DUP; PUSH nat 0; COMPARE; NEQ }").unwrap();
        let Node::Dip(2, body) = &i.node else {
            panic!("expected DIP 2, got {i:?}")
        };
        assert_eq!(body.seq_items().len(), 4);
        let i = parse_instrs("PUSH @index nat 1").unwrap();
        assert_eq!(i.annots, vec!["@index".to_string()]);
        assert_eq!(i.node, Node::Push(Ty::Nat, Value::Nat(1.into())));
    }

    #[test]
    fn types_with_annotations() {
        let t = parse_type("pair (nat %counter) (or :action (pair mutez (contract unit)) (list key))").unwrap();
        assert_eq!(
            t,
            Ty::pair(
                Ty::Nat,
                Ty::or(Ty::pair(Ty::Mutez, Ty::contract(Ty::Unit)), Ty::list(Ty::Key))
            )
        );
        assert_eq!(parse_type("pair nat int string").unwrap(), Ty::pair(Ty::Nat, Ty::pair(Ty::Int, Ty::String)));
        assert!(parse_type("set (list nat)").is_err());
    }

    #[test]
    fn composite_push_type_needs_parens() {
        assert!(parse_instrs("NIL list nat").is_err());
        assert!(parse_instrs("NIL (list nat)").is_ok());
    }

    #[test]
    fn data_literals() {
        assert_eq!(
            parse_data("Pair 0 {}").unwrap(),
            Data::Prim("Pair".into(), vec![Data::Int(0.into()), Data::Seq(vec![])])
        );
        assert_eq!(
            parse_data("Pair 1 2 3").unwrap(),
            parse_data("Pair 1 (Pair 2 3)").unwrap()
        );
    }

    #[test]
    fn error_reports_expected_tokens() {
        let err = parse_instrs("IF { DROP }").unwrap_err();
        match err {
            ParseError::Unexpected { expected, .. } => assert_eq!(expected, vec!["`{`".to_string()]),
            other => panic!("unexpected error {other:?}"),
        }
    }
}
