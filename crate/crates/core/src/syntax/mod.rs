//! Michelson surface syntax: tokens, the instruction tree, macro expansion
//! and the canonical printer.

mod ast;
mod lexer;
mod macros;
mod parser;
mod printer;

pub use ast::{Cond, Contract, Data, Instr, Node, Path};
pub use lexer::{tokenize, LexError, Token, TokenKind};
pub use macros::{expand_contract, expand_macros, is_core};
pub use parser::{parse_contract, parse_data, parse_instrs, parse_source, parse_type, ParseError};
pub use printer::{pretty_print, print_instr};

/// Byte range in the source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    /// 1-based line and column of the span start.
    pub fn line_col(&self, source: &str) -> (usize, usize) {
        let upto = &source[..self.start.min(source.len())];
        let line = upto.matches('\n').count() + 1;
        let col = upto.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        (line, col)
    }
}
