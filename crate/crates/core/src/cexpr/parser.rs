//! Recursive-descent parser for the expression grammar.
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := '-' factor | power
//! power  := atom ('^' int)?
//! atom   := number | 'i' | 'z' | ident '(' expr ')' | '(' expr ')'
//! ident  := 'exp'|'log'|'sin'|'cos'|'sinh'|'cosh'
//! number := decimal with optional fraction and exponent
//! ```
//!
//! Whitespace is insignificant. `i` is a reserved literal, not an identifier.
//! The exponent after `^` is a bare signed integer token, so `z^-2` is valid
//! while the parenthesized form `z^(-2)` is rejected.

use super::{CExpr, FuncKind};
use num_complex::Complex64;
use thiserror::Error;

/// Parse failure with the byte offset of the offending input.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("unexpected character '{ch}' at byte {offset}")]
    UnexpectedChar { offset: usize, ch: char },
    #[error("expected {expected} at byte {offset}, found '{found}'")]
    UnexpectedToken {
        offset: usize,
        expected: &'static str,
        found: String,
    },
    #[error("unexpected end of input at byte {offset}")]
    UnexpectedEnd { offset: usize },
    #[error("unknown identifier '{name}' at byte {offset}")]
    UnknownIdentifier { offset: usize, name: String },
    #[error("exponent must be an integer literal at byte {offset}")]
    NonIntegerExponent { offset: usize },
    #[error("exponent out of range at byte {offset}")]
    ExponentOutOfRange { offset: usize },
    #[error("malformed number at byte {offset}")]
    MalformedNumber { offset: usize },
}

impl ParseError {
    /// Byte offset the error points at.
    pub fn offset(&self) -> usize {
        match self {
            ParseError::UnexpectedChar { offset, .. }
            | ParseError::UnexpectedToken { offset, .. }
            | ParseError::UnexpectedEnd { offset }
            | ParseError::UnknownIdentifier { offset, .. }
            | ParseError::NonIntegerExponent { offset }
            | ParseError::ExponentOutOfRange { offset }
            | ParseError::MalformedNumber { offset } => *offset,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Number { value: f64, integral: Option<i64> },
    ImagUnit,
    Var,
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Number { value, .. } => format!("{value}"),
            Tok::ImagUnit => "i".into(),
            Tok::Var => "z".into(),
            Tok::Ident(s) => s.clone(),
            Tok::Plus => "+".into(),
            Tok::Minus => "-".into(),
            Tok::Star => "*".into(),
            Tok::Slash => "/".into(),
            Tok::Caret => "^".into(),
            Tok::LParen => "(".into(),
            Tok::RParen => ")".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut toks = Vec::new();
    let mut pos = 0;
    while pos < bytes.len() {
        let b = bytes[pos];
        match b {
            b' ' | b'\t' | b'\r' | b'\n' => pos += 1,
            b'+' => {
                toks.push((Tok::Plus, pos));
                pos += 1;
            }
            b'-' => {
                toks.push((Tok::Minus, pos));
                pos += 1;
            }
            b'*' => {
                toks.push((Tok::Star, pos));
                pos += 1;
            }
            b'/' => {
                toks.push((Tok::Slash, pos));
                pos += 1;
            }
            b'^' => {
                toks.push((Tok::Caret, pos));
                pos += 1;
            }
            b'(' => {
                toks.push((Tok::LParen, pos));
                pos += 1;
            }
            b')' => {
                toks.push((Tok::RParen, pos));
                pos += 1;
            }
            b'0'..=b'9' => {
                let start = pos;
                while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                    pos += 1;
                }
                let mut fractional = false;
                if pos + 1 < bytes.len() && bytes[pos] == b'.' && bytes[pos + 1].is_ascii_digit() {
                    fractional = true;
                    pos += 1;
                    while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                        pos += 1;
                    }
                }
                if pos < bytes.len() && (bytes[pos] == b'e' || bytes[pos] == b'E') {
                    // exponent suffix only when followed by a (signed) digit
                    let mut probe = pos + 1;
                    if probe < bytes.len() && (bytes[probe] == b'+' || bytes[probe] == b'-') {
                        probe += 1;
                    }
                    if probe < bytes.len() && bytes[probe].is_ascii_digit() {
                        fractional = true;
                        pos = probe;
                        while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                            pos += 1;
                        }
                    }
                }
                let lexeme = &text[start..pos];
                let value: f64 = lexeme
                    .parse()
                    .map_err(|_| ParseError::MalformedNumber { offset: start })?;
                let integral = if fractional { None } else { lexeme.parse::<i64>().ok() };
                toks.push((Tok::Number { value, integral }, start));
            }
            b'a'..=b'z' | b'A'..=b'Z' => {
                let start = pos;
                while pos < bytes.len() && bytes[pos].is_ascii_alphabetic() {
                    pos += 1;
                }
                let name = &text[start..pos];
                let tok = match name {
                    "z" => Tok::Var,
                    "i" => Tok::ImagUnit,
                    _ => Tok::Ident(name.to_string()),
                };
                toks.push((tok, start));
            }
            _ => {
                let ch = text[pos..].chars().next().unwrap_or('?');
                return Err(ParseError::UnexpectedChar { offset: pos, ch });
            }
        }
    }
    Ok(toks)
}

struct Parser<'a> {
    toks: &'a [(Tok, usize)],
    idx: usize,
    end: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&(Tok, usize)> {
        self.toks.get(self.idx)
    }


    fn bump(&mut self) -> Option<&(Tok, usize)> {
        let t = self.toks.get(self.idx);
        if t.is_some() {
            self.idx += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, expected: &'static str) -> Result<(), ParseError> {
        match self.bump() {
            Some((tok, _)) if *tok == want => Ok(()),
            Some((tok, offset)) => Err(ParseError::UnexpectedToken {
                offset: *offset,
                expected,
                found: tok.describe(),
            }),
            None => Err(ParseError::UnexpectedEnd { offset: self.end }),
        }
    }

    fn parse_expr(&mut self) -> Result<CExpr, ParseError> {
        let mut lhs = self.parse_term()?;
        while let Some((tok, _)) = self.peek() {
            match tok {
                Tok::Plus => {
                    self.bump();
                    let rhs = self.parse_term()?;
                    lhs = CExpr::Add(Box::new(lhs), Box::new(rhs));
                }
                Tok::Minus => {
                    self.bump();
                    let rhs = self.parse_term()?;
                    lhs = CExpr::Sub(Box::new(lhs), Box::new(rhs));
                }
                _ => break,
            }
        }
        Ok(lhs)
    }

    fn parse_term(&mut self) -> Result<CExpr, ParseError> {
        let mut lhs = self.parse_factor()?;
        while let Some((tok, _)) = self.peek() {
            match tok {
                Tok::Star => {
                    self.bump();
                    let rhs = self.parse_factor()?;
                    lhs = CExpr::Mul(Box::new(lhs), Box::new(rhs));
                }
                Tok::Slash => {
                    self.bump();
                    let rhs = self.parse_factor()?;
                    lhs = CExpr::Div(Box::new(lhs), Box::new(rhs));
                }
                _ => break,
            }
        }
        Ok(lhs)
    }

    fn parse_factor(&mut self) -> Result<CExpr, ParseError> {
        if let Some((Tok::Minus, _)) = self.peek() {
            self.bump();
            let inner = self.parse_factor()?;
            return Ok(CExpr::Neg(Box::new(inner)));
        }
        self.parse_power()
    }

    fn parse_power(&mut self) -> Result<CExpr, ParseError> {
        let base = self.parse_atom()?;
        if let Some((Tok::Caret, _)) = self.peek() {
            self.bump();
            let exp = self.parse_exponent()?;
            return Ok(CExpr::Pow(Box::new(base), exp));
        }
        Ok(base)
    }

    fn parse_exponent(&mut self) -> Result<i32, ParseError> {
        let mut negate = false;
        if let Some((tok, _)) = self.peek() {
            match tok {
                Tok::Minus => {
                    negate = true;
                    self.bump();
                }
                Tok::Plus => {
                    self.bump();
                }
                _ => {}
            }
        }
        match self.bump() {
            Some((Tok::Number { integral: Some(n), .. }, offset)) => {
                let offset = *offset;
                let n = if negate { -*n } else { *n };
                i32::try_from(n).map_err(|_| ParseError::ExponentOutOfRange { offset })
            }
            Some((Tok::Number { integral: None, .. }, offset)) => {
                Err(ParseError::NonIntegerExponent { offset: *offset })
            }
            Some((_, offset)) => Err(ParseError::NonIntegerExponent { offset: *offset }),
            None => Err(ParseError::UnexpectedEnd { offset: self.end }),
        }
    }

    fn parse_atom(&mut self) -> Result<CExpr, ParseError> {
        match self.bump() {
            Some((Tok::Number { value, .. }, _)) => Ok(CExpr::Const(Complex64::new(*value, 0.0))),
            Some((Tok::ImagUnit, _)) => Ok(CExpr::Const(Complex64::new(0.0, 1.0))),
            Some((Tok::Var, _)) => Ok(CExpr::Var),
            Some((Tok::Ident(name), offset)) => {
                let offset = *offset;
                let Some(kind) = FuncKind::from_name(name) else {
                    return Err(ParseError::UnknownIdentifier {
                        offset,
                        name: name.clone(),
                    });
                };
                self.expect(Tok::LParen, "'('")?;
                let arg = self.parse_expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(CExpr::Func(kind, Box::new(arg)))
            }
            Some((Tok::LParen, _)) => {
                let inner = self.parse_expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(inner)
            }
            Some((tok, offset)) => Err(ParseError::UnexpectedToken {
                offset: *offset,
                expected: "an atom",
                found: tok.describe(),
            }),
            None => Err(ParseError::UnexpectedEnd { offset: self.end }),
        }
    }
}

/// Parses `text` into an expression tree.
pub fn parse(text: &str) -> Result<CExpr, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks: &toks,
        idx: 0,
        end: text.len(),
    };
    let expr = p.parse_expr()?;
    if let Some((tok, offset)) = p.peek() {
        return Err(ParseError::UnexpectedToken {
            offset: *offset,
            expected: "end of input",
            found: tok.describe(),
        });
    }
    Ok(expr)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variable_alone() {
        assert_eq!(parse("z").unwrap(), CExpr::Var);
    }

    #[test]
    fn precedence_shapes_the_tree() {
        let e = parse("z^2 + exp(z)").unwrap();
        assert_eq!(
            e,
            CExpr::Add(
                Box::new(CExpr::Pow(Box::new(CExpr::Var), 2)),
                Box::new(CExpr::Func(FuncKind::Exp, Box::new(CExpr::Var))),
            )
        );
    }

    #[test]
    fn reciprocal_tree() {
        let e = parse("1/(2*z)").unwrap();
        assert_eq!(
            e,
            CExpr::Div(
                Box::new(CExpr::Const(Complex64::new(1.0, 0.0))),
                Box::new(CExpr::Mul(
                    Box::new(CExpr::Const(Complex64::new(2.0, 0.0))),
                    Box::new(CExpr::Var),
                )),
            )
        );
    }

    #[test]
    fn double_caret_errors_at_offset_two() {
        let err = parse("z^^2").unwrap_err();
        assert_eq!(err.offset(), 2);
    }

    #[test]
    fn unary_minus_binds_looser_than_power() {
        assert_eq!(
            parse("-z^2").unwrap(),
            CExpr::Neg(Box::new(CExpr::Pow(Box::new(CExpr::Var), 2)))
        );
    }

    #[test]
    fn signed_exponent_token() {
        assert_eq!(parse("z^-2").unwrap(), CExpr::Pow(Box::new(CExpr::Var), -2));
    }

    #[test]
    fn parenthesized_exponent_is_rejected() {
        let err = parse("z^(-2)").unwrap_err();
        assert!(matches!(err, ParseError::NonIntegerExponent { offset: 2 }));
    }

    #[test]
    fn fractional_exponent_is_rejected() {
        let err = parse("z^1.5").unwrap_err();
        assert!(matches!(err, ParseError::NonIntegerExponent { offset: 2 }));
    }

    #[test]
    fn unknown_identifier_is_reported() {
        let err = parse("tan(z)").unwrap_err();
        assert!(matches!(err, ParseError::UnknownIdentifier { offset: 0, .. }));
    }

    #[test]
    fn i_is_a_literal() {
        assert_eq!(parse("i").unwrap(), CExpr::Const(Complex64::new(0.0, 1.0)));
        let err = parse("i(z)").unwrap_err();
        // literal followed by '(' is trailing input, not a call
        assert_eq!(err.offset(), 1);
    }

    #[test]
    fn whitespace_is_insignificant() {
        assert_eq!(parse(" z ^ 2 ").unwrap(), parse("z^2").unwrap());
    }

    #[test]
    fn numbers_with_exponent_suffix() {
        let e = parse("2.5e-3").unwrap();
        assert_eq!(e, CExpr::Const(Complex64::new(2.5e-3, 0.0)));
    }

    #[test]
    fn trailing_input_is_reported() {
        let err = parse("z 2").unwrap_err();
        assert_eq!(err.offset(), 2);
    }

    #[test]
    fn empty_input_is_unexpected_end() {
        assert!(matches!(parse(""), Err(ParseError::UnexpectedEnd { .. })));
        assert!(matches!(parse("1+"), Err(ParseError::UnexpectedEnd { .. })));
    }
}
