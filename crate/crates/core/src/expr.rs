//! A small expression language in one variable `x`.
//!
//! Grammar (lowest to highest precedence):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := ('-' | '+') unary | power
//! power  := atom ('^' unary)?          right associative
//! atom   := number | 'x' | func '(' expr ')' | 'pow' '(' expr ',' expr ')'
//!         | '(' expr ')'
//! func   := 'exp' | 'log' | 'sqrt'
//! ```
//!
//! Anything else is rejected. Nesting depth is bounded so hostile input
//! cannot exhaust the stack.

use std::fmt;

use thiserror::Error;

use crate::jet::Jet;

const MAX_DEPTH: usize = 128;
const MAX_LEN: usize = 16 * 1024;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at byte {pos}: {message}")]
pub struct ParseError {
    pub pos: usize,
    pub message: String,
}

impl ParseError {
    fn new(pos: usize, message: impl Into<String>) -> Self {
        ParseError { pos, message: message.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sqrt,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var,
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr, ParseError> {
        if src.len() > MAX_LEN {
            return Err(ParseError::new(0, "expression too long"));
        }
        let tokens = tokenize(src)?;
        let mut p = Parser { tokens: &tokens, at: 0, depth: 0, src_len: src.len() };
        let e = p.expr()?;
        match p.peek() {
            None => Ok(e),
            Some(t) => Err(ParseError::new(t.pos, format!("unexpected {}", t.kind))),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Expr::Num(c) => *c,
            Expr::Var => x,
            Expr::Neg(e) => -e.eval(x),
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.eval(x), b.eval(x));
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                    BinOp::Pow => a.powf(b),
                }
            }
            Expr::Call(f, e) => {
                let v = e.eval(x);
                match f {
                    Func::Exp => v.exp(),
                    Func::Log => v.ln(),
                    Func::Sqrt => v.sqrt(),
                }
            }
        }
    }

    /// Value and first three derivatives at `x`.
    pub fn eval_jet(&self, x: f64) -> Jet {
        match self {
            Expr::Num(c) => Jet::constant(*c),
            Expr::Var => Jet::variable(x),
            Expr::Neg(e) => -e.eval_jet(x),
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.eval_jet(x), b.eval_jet(x));
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                    BinOp::Pow => a.pow(b),
                }
            }
            Expr::Call(f, e) => {
                let v = e.eval_jet(x);
                match f {
                    Func::Exp => v.exp(),
                    Func::Log => v.ln(),
                    Func::Sqrt => v.sqrt(),
                }
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Fully parenthesized; round-trips through `Expr::parse`.
        match self {
            Expr::Num(c) => {
                if *c < 0.0 {
                    write!(f, "({c:?})")
                } else {
                    write!(f, "{c:?}")
                }
            }
            Expr::Var => f.write_str("x"),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Bin(op, a, b) => {
                let sym = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                    BinOp::Pow => "^",
                };
                write!(f, "({a}{sym}{b})")
            }
            Expr::Call(func, e) => write!(f, "{}({e})", func.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum TokenKind {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    Comma,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenKind::Num(v) => write!(f, "number {v}"),
            TokenKind::Ident(s) => write!(f, "identifier '{s}'"),
            TokenKind::Op(c) => write!(f, "'{c}'"),
            TokenKind::LParen => f.write_str("'('"),
            TokenKind::RParen => f.write_str("')'"),
            TokenKind::Comma => f.write_str("','"),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokenKind,
    pos: usize,
}

fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => i += 1,
            b'0'..=b'9' | b'.' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let text = &src[start..i];
                let v: f64 = text
                    .parse()
                    .map_err(|_| ParseError::new(start, format!("malformed number '{text}'")))?;
                if !v.is_finite() {
                    return Err(ParseError::new(start, format!("number '{text}' out of range")));
                }
                out.push(Token { kind: TokenKind::Num(v), pos: start });
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push(Token { kind: TokenKind::Ident(src[start..i].to_string()), pos: start });
            }
            b'+' | b'-' | b'*' | b'/' | b'^' => {
                out.push(Token { kind: TokenKind::Op(c as char), pos: i });
                i += 1;
            }
            b'(' => {
                out.push(Token { kind: TokenKind::LParen, pos: i });
                i += 1;
            }
            b')' => {
                out.push(Token { kind: TokenKind::RParen, pos: i });
                i += 1;
            }
            b',' => {
                out.push(Token { kind: TokenKind::Comma, pos: i });
                i += 1;
            }
            _ => {
                let ch = src[i..].chars().next().unwrap_or('?');
                return Err(ParseError::new(i, format!("unexpected character '{ch}'")));
            }
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: &'a [Token],
    at: usize,
    depth: usize,
    src_len: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&'a Token> {
        self.tokens.get(self.at)
    }

    fn bump(&mut self) -> Option<&'a Token> {
        let t = self.tokens.get(self.at);
        self.at += 1;
        t
    }

    fn eof_pos(&self) -> usize {
        self.src_len
    }

    fn is_op(&self, c: char) -> bool {
        matches!(self.peek(), Some(Token { kind: TokenKind::Op(o), .. }) if *o == c)
    }

    fn enter(&mut self) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            let pos = self.peek().map_or(self.eof_pos(), |t| t.pos);
            return Err(ParseError::new(pos, "expression nested too deeply"));
        }
        Ok(())
    }

    fn expect(&mut self, want: TokenKind) -> Result<(), ParseError> {
        match self.bump() {
            Some(t) if t.kind == want => Ok(()),
            Some(t) => Err(ParseError::new(t.pos, format!("expected {want}, found {}", t.kind))),
            None => Err(ParseError::new(self.eof_pos(), format!("expected {want}, found end of input"))),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        self.enter()?;
        let mut lhs = self.term()?;
        loop {
            let op = if self.is_op('+') {
                BinOp::Add
            } else if self.is_op('-') {
                BinOp::Sub
            } else {
                break;
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        self.depth -= 1;
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.is_op('*') {
                BinOp::Mul
            } else if self.is_op('/') {
                BinOp::Div
            } else {
                break;
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        self.enter()?;
        let e = if self.is_op('-') {
            self.bump();
            Expr::Neg(Box::new(self.unary()?))
        } else if self.is_op('+') {
            self.bump();
            self.unary()?
        } else {
            self.power()?
        };
        self.depth -= 1;
        Ok(e)
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.is_op('^') {
            self.bump();
            let exp = self.unary()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let Some(tok) = self.bump() else {
            return Err(ParseError::new(self.eof_pos(), "unexpected end of input"));
        };
        match &tok.kind {
            TokenKind::Num(v) => Ok(Expr::Num(*v)),
            TokenKind::LParen => {
                let e = self.expr()?;
                self.expect(TokenKind::RParen)?;
                Ok(e)
            }
            TokenKind::Ident(name) => match name.as_str() {
                "x" => Ok(Expr::Var),
                "exp" | "log" | "sqrt" => {
                    let func = match name.as_str() {
                        "exp" => Func::Exp,
                        "log" => Func::Log,
                        _ => Func::Sqrt,
                    };
                    self.expect(TokenKind::LParen)?;
                    let arg = self.expr()?;
                    self.expect(TokenKind::RParen)?;
                    Ok(Expr::Call(func, Box::new(arg)))
                }
                "pow" => {
                    self.expect(TokenKind::LParen)?;
                    let base = self.expr()?;
                    self.expect(TokenKind::Comma)?;
                    let exp = self.expr()?;
                    self.expect(TokenKind::RParen)?;
                    Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp)))
                }
                other => Err(ParseError::new(tok.pos, format!("unknown identifier '{other}'"))),
            },
            other => Err(ParseError::new(tok.pos, format!("unexpected {other}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_and_associativity() {
        let e = Expr::parse("1 + 2*3^2^0.5").unwrap();
        let want = 1.0 + 2.0 * 3f64.powf(2f64.powf(0.5));
        assert!((e.eval(0.0) - want).abs() < 1e-12);
        assert_eq!(Expr::parse("-x^2").unwrap().eval(3.0), -9.0);
        assert_eq!(Expr::parse("2^-1").unwrap().eval(0.0), 0.5);
        assert_eq!(Expr::parse("8/4/2").unwrap().eval(0.0), 1.0);
    }

    #[test]
    fn hump_map_parses() {
        let e = Expr::parse("30*(x + x^(5/2))/(2 + 35*x^3)").unwrap();
        let x: f64 = 1.3;
        let want = 30.0 * (x + x.powf(2.5)) / (2.0 + 35.0 * x.powi(3));
        assert!((e.eval(x) - want).abs() < 1e-14);
        let alt = Expr::parse("30*(x + pow(x, 2.5))/(2 + 35*x^3)").unwrap();
        assert_eq!(alt.eval(x), e.eval(x));
    }

    #[test]
    fn functions() {
        let e = Expr::parse("exp(log(x)) + sqrt(x*x)").unwrap();
        assert!((e.eval(2.0) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["", "x +", "y", "sin(x)", "(x", "x)", "1..2", "x # 2", "2 3", "pow(x)", "1e999"] {
            assert!(Expr::parse(bad).is_err(), "accepted {bad:?}");
        }
    }

    #[test]
    fn deep_nesting_is_an_error_not_a_crash() {
        let deep = "(".repeat(2_000) + "x" + &")".repeat(2_000);
        let err = Expr::parse(&deep).unwrap_err();
        assert!(err.message.contains("deeply"));
        let minus = "-".repeat(10_000) + "x";
        assert!(Expr::parse(&minus).is_err());
    }

    #[test]
    fn display_round_trips() {
        for src in ["30*(x + x^(5/2))/(2 + 35*x^3)", "-x^2 - -3", "exp(-x)*x", "pow(x, -0.5)"] {
            let e = Expr::parse(src).unwrap();
            let again = Expr::parse(&e.to_string()).unwrap();
            assert_eq!(e, again, "{src}");
        }
    }

    #[test]
    fn jet_derivatives_of_expression() {
        let e = Expr::parse("x*exp(-x)").unwrap();
        let j = e.eval_jet(0.0);
        assert_eq!(j.0, [0.0, 1.0, -2.0, 3.0]);
    }
}
