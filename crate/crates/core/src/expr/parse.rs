// Recursive-descent parser for the infix expression grammar:
//
//   expr     := term (('+' | '-') term)*
//   term     := unary (('*' | '/') unary)*
//   unary    := '-' unary | '+' unary | power
//   power    := primary ('^' exponent)*
//   exponent := ['-'] number | '(' ['-'] int ['/' int] ')' | '(' ['-'] decimal ')'
//   primary  := number | ident | func '(' expr ')' | '(' expr ')'
//
// A '-' directly in front of a numeric literal (not followed by '^') folds
// into a negative constant, which is what the printer relies on.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};

use super::{decimal_to_rational, Expr, Func};
use crate::error::{Error, Result};
use crate::number::Rational;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(String),
    Ident(String),
    Op(char),
}

struct Lexer;

impl Lexer {
    fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>> {
        let bytes = text.as_bytes();
        let mut out = Vec::new();
        let mut i = 0;
        while i < bytes.len() {
            let c = bytes[i];
            if c.is_ascii_whitespace() {
                i += 1;
            } else if c.is_ascii_digit() || c == b'.' {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut look = i + 1;
                    if look < bytes.len() && (bytes[look] == b'+' || bytes[look] == b'-') {
                        look += 1;
                    }
                    if look < bytes.len() && bytes[look].is_ascii_digit() {
                        i = look;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                out.push((Tok::Num(text[start..i].to_string()), start));
            } else if c.is_ascii_alphabetic() || c == b'_' {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(text[start..i].to_string()), start));
            } else if b"+-*/^()".contains(&c) {
                out.push((Tok::Op(c as char), i));
                i += 1;
            } else {
                return Err(Error::syntax(i, format!("unexpected character `{}`", c as char)));
            }
        }
        Ok(out)
    }
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
    vars: Option<&'a [&'a str]>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(_, p)| *p).unwrap_or(self.end)
    }

    fn eat_op(&mut self, op: char) -> bool {
        if self.peek() == Some(&Tok::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_op(&mut self, op: char) -> Result<()> {
        if self.eat_op(op) {
            Ok(())
        } else {
            Err(Error::syntax(self.offset(), format!("expected `{op}`")))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat_op('+') {
                lhs = Expr::Add(lhs.into(), self.term()?.into());
            } else if self.eat_op('-') {
                lhs = Expr::Sub(lhs.into(), self.term()?.into());
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat_op('*') {
                lhs = Expr::Mul(lhs.into(), self.unary()?.into());
            } else if self.eat_op('/') {
                lhs = Expr::Div(lhs.into(), self.unary()?.into());
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat_op('+') {
            return self.unary();
        }
        if self.eat_op('-') {
            if let Some(Tok::Num(_)) = self.peek() {
                if self.peek_at(1) != Some(&Tok::Op('^')) {
                    let v = self.number()?;
                    return Ok(Expr::Const(-v));
                }
            }
            return Ok(Expr::Neg(self.unary()?.into()));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let mut base = self.primary()?;
        while self.eat_op('^') {
            let r = self.exponent()?;
            base = if r.is_integer() {
                let n = r
                    .to_integer()
                    .to_i32()
                    .ok_or_else(|| Error::syntax(self.offset(), "exponent too large"))?;
                Expr::PowInt(base.into(), n)
            } else {
                Expr::PowRat(base.into(), r)
            };
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<Rational> {
        let start = self.offset();
        let parens = self.eat_op('(');
        let negative = self.eat_op('-');
        let mut r = match self.peek().cloned() {
            Some(Tok::Num(text)) => {
                self.pos += 1;
                decimal_to_rational(&text)
                    .ok_or_else(|| Error::syntax(start, "exponent must be a rational constant"))?
            }
            _ => return Err(Error::syntax(start, "exponent must be a rational constant")),
        };
        if parens && self.eat_op('/') {
            let den = match self.peek().cloned() {
                Some(Tok::Num(text)) if text.bytes().all(|b| b.is_ascii_digit()) => {
                    self.pos += 1;
                    text.parse::<BigInt>().expect("digits")
                }
                _ => return Err(Error::syntax(self.offset(), "expected an integer denominator")),
            };
            if den == BigInt::from(0) {
                return Err(Error::syntax(self.offset(), "zero denominator"));
            }
            r /= Rational::from_integer(den);
        }
        if parens {
            self.expect_op(')')?;
        }
        if negative {
            r = -r;
        }
        debug_assert!(!negative || !r.is_positive());
        Ok(r)
    }

    fn number(&mut self) -> Result<f64> {
        let at = self.offset();
        match self.peek().cloned() {
            Some(Tok::Num(text)) => {
                self.pos += 1;
                text.parse::<f64>()
                    .map_err(|_| Error::syntax(at, format!("invalid number `{text}`")))
            }
            _ => Err(Error::syntax(at, "expected a number")),
        }
    }

    fn primary(&mut self) -> Result<Expr> {
        let at = self.offset();
        match self.peek().cloned() {
            Some(Tok::Num(_)) => Ok(Expr::Const(self.number()?)),
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if let Some(f) = Func::from_name(&name) {
                    if !self.eat_op('(') {
                        return Err(Error::syntax(at, format!("`{name}` must be called")));
                    }
                    let arg = self.expr()?;
                    self.expect_op(')')?;
                    return Ok(Expr::Call(f, arg.into()));
                }
                if self.peek() == Some(&Tok::Op('(')) {
                    return Err(Error::syntax(at, format!("unknown function `{name}`")));
                }
                if let Some(vars) = self.vars {
                    if !vars.contains(&name.as_str()) {
                        return Err(Error::UnknownVariable(name));
                    }
                }
                Ok(Expr::Var(name))
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect_op(')')?;
                Ok(inner)
            }
            Some(Tok::Op(c)) => Err(Error::syntax(at, format!("unexpected `{c}`"))),
            None => Err(Error::syntax(at, "unexpected end of input")),
        }
    }
}

fn run(text: &str, vars: Option<&[&str]>) -> Result<Expr> {
    let toks = Lexer::tokenize(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: text.len(),
        vars,
    };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(Error::syntax(p.offset(), "unexpected trailing input"));
    }
    Ok(e)
}

/// Parses `text`, accepting only the declared variables.
pub fn parse(text: &str, vars: &[&str]) -> Result<Expr> {
    run(text, Some(vars))
}

/// Parses `text`, treating every non-function identifier as a variable.
pub fn parse_free(text: &str) -> Result<Expr> {
    run(text, None)
}
