use num_bigint::BigInt;

use super::Span;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    /// `parameter`, `storage`, `code` and the data constructors
    /// (`Pair`, `Left`, `Some`, `True`, `Elt`, ...).
    Keyword,
    Instr,
    TypeName,
    Int,
    String,
    Bytes,
    Annotation,
    LBrace,
    RBrace,
    Semi,
    LParen,
    RParen,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub span: Span,
}

impl Token {
    /// Decoded payload of a string literal token.
    pub fn string_value(&self) -> String {
        let inner = &self.text[1..self.text.len() - 1];
        let mut out = String::with_capacity(inner.len());
        let mut chars = inner.chars();
        while let Some(c) = chars.next() {
            if c == '\\' {
                match chars.next() {
                    Some('n') => out.push('\n'),
                    Some('t') => out.push('\t'),
                    Some('r') => out.push('\r'),
                    Some(o) => out.push(o),
                    None => {}
                }
            } else {
                out.push(c);
            }
        }
        out
    }

    pub fn int_value(&self) -> BigInt {
        self.text.parse().expect("int token text is a valid integer")
    }

    pub fn bytes_value(&self) -> Vec<u8> {
        hex::decode(&self.text[2..]).expect("bytes token has even hex digit count")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LexError {
    #[error("illegal character {ch:?}")]
    IllegalChar { ch: char, span: Span },
    #[error("unterminated string literal")]
    UnterminatedString { span: Span },
    #[error("unterminated comment")]
    UnterminatedComment { span: Span },
    #[error("bytes literal must have an even number of hex digits")]
    OddHex { span: Span },
    #[error("invalid bytes literal")]
    BadHex { span: Span },
}

impl LexError {
    pub fn span(&self) -> Span {
        match self {
            LexError::IllegalChar { span, .. }
            | LexError::UnterminatedString { span }
            | LexError::UnterminatedComment { span }
            | LexError::OddHex { span }
            | LexError::BadHex { span } => *span,
        }
    }
}

const KEYWORDS: &[&str] = &[
    "parameter", "storage", "code", "Pair", "Left", "Right", "Some", "None", "Unit", "True", "False", "Elt",
];

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '.'
}

fn classify(word: &str) -> TokenKind {
    if KEYWORDS.contains(&word) {
        TokenKind::Keyword
    } else if word.chars().all(|c| c.is_ascii_uppercase() || c.is_ascii_digit() || c == '_') {
        TokenKind::Instr
    } else {
        TokenKind::TypeName
    }
}

/// Splits Michelson source into tokens, dropping whitespace and comments.
pub fn tokenize(source: &str) -> Result<Vec<Token>, LexError> {
    let bytes = source.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    let push = |tokens: &mut Vec<Token>, kind, start: usize, end: usize| {
        tokens.push(Token {
            kind,
            text: source[start..end].to_owned(),
            span: Span { start, end },
        })
    };
    while i < bytes.len() {
        let c = source[i..].chars().next().expect("in bounds");
        let start = i;
        match c {
            c if c.is_whitespace() => i += c.len_utf8(),
            '#' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            '/' if bytes.get(i + 1) == Some(&b'*') => match source[i + 2..].find("*/") {
                Some(off) => i += off + 4,
                None => {
                    return Err(LexError::UnterminatedComment {
                        span: Span { start, end: bytes.len() },
                    })
                }
            },
            '{' | '}' | ';' | '(' | ')' => {
                let kind = match c {
                    '{' => TokenKind::LBrace,
                    '}' => TokenKind::RBrace,
                    ';' => TokenKind::Semi,
                    '(' => TokenKind::LParen,
                    _ => TokenKind::RParen,
                };
                i += 1;
                push(&mut tokens, kind, start, i);
            }
            '"' => {
                i += 1;
                loop {
                    match bytes.get(i) {
                        None | Some(b'\n') => {
                            return Err(LexError::UnterminatedString {
                                span: Span { start, end: i },
                            })
                        }
                        Some(b'\\') => i += 2,
                        Some(b'"') => {
                            i += 1;
                            break;
                        }
                        Some(_) => i += 1,
                    }
                }
                push(&mut tokens, TokenKind::String, start, i);
            }
            '@' | '%' | ':' => {
                i += 1;
                while i < bytes.len() && (is_ident_char(bytes[i] as char) || matches!(bytes[i], b'@' | b'%')) {
                    i += 1;
                }
                push(&mut tokens, TokenKind::Annotation, start, i);
            }
            '0' if matches!(bytes.get(i + 1), Some(b'x')) => {
                i += 2;
                while i < bytes.len() && is_ident_char(bytes[i] as char) {
                    i += 1;
                }
                let digits = &source[start + 2..i];
                let span = Span { start, end: i };
                if !digits.chars().all(|c| c.is_ascii_hexdigit()) {
                    return Err(LexError::BadHex { span });
                }
                if digits.len() % 2 != 0 {
                    return Err(LexError::OddHex { span });
                }
                push(&mut tokens, TokenKind::Bytes, start, i);
            }
            '-' | '0'..='9' => {
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if c == '-' && i == start + 1 {
                    return Err(LexError::IllegalChar {
                        ch: '-',
                        span: Span { start, end: i },
                    });
                }
                push(&mut tokens, TokenKind::Int, start, i);
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                while i < bytes.len() && is_ident_char(bytes[i] as char) {
                    i += 1;
                }
                let kind = classify(&source[start..i]);
                push(&mut tokens, kind, start, i);
            }
            other => {
                return Err(LexError::IllegalChar {
                    ch: other,
                    span: Span {
                        start,
                        end: start + other.len_utf8(),
                    },
                })
            }
        }
    }
    Ok(tokens)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<(TokenKind, String)> {
        tokenize(src).unwrap().into_iter().map(|t| (t.kind, t.text)).collect()
    }

    #[test]
    fn push_with_annotation() {
        assert_eq!(
            kinds("PUSH @index nat 1"),
            vec![
                (TokenKind::Instr, "PUSH".into()),
                (TokenKind::Annotation, "@index".into()),
                (TokenKind::TypeName, "nat".into()),
                (TokenKind::Int, "1".into()),
            ]
        );
    }

    #[test]
    fn empty_and_bytes() {
        assert!(tokenize("").unwrap().is_empty());
        assert_eq!(
            kinds("0xAB; DROP"),
            vec![
                (TokenKind::Bytes, "0xAB".into()),
                (TokenKind::Semi, ";".into()),
                (TokenKind::Instr, "DROP".into()),
            ]
        );
    }

    #[test]
    fn comments_are_skipped() {
        let k = kinds("# hello\nCAR /* block\n comment */ ; CDR # trailing");
        assert_eq!(k.len(), 3);
    }

    #[test]
    fn errors_carry_spans() {
        assert!(matches!(tokenize("0xABC"), Err(LexError::OddHex { .. })));
        assert!(matches!(tokenize("\"abc"), Err(LexError::UnterminatedString { .. })));
        let err = tokenize("CAR $").unwrap_err();
        assert_eq!(err.span(), Span { start: 4, end: 5 });
    }

    #[test]
    fn string_escapes_decode() {
        let t = &tokenize(r#""a\"b\\c""#).unwrap()[0];
        assert_eq!(t.string_value(), "a\"b\\c");
    }

    #[test]
    fn negative_int() {
        assert_eq!(tokenize("-12").unwrap()[0].int_value(), BigInt::from(-12));
    }
}
