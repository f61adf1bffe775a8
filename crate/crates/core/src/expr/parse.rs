//! Infix parser.
//!
//! Grammar (whitespace ignored):
//!
//! ```text
//! expr     := term (('+' | '-') term)*
//! term     := unary (('*' | '/') unary)*
//! unary    := ('-' | '+') unary | power
//! power    := primary ('^' unary)?
//! primary  := number | name | func '(' expr ')' | '(' expr ')'
//! ```
//!
//! The exponent after `^` must fold to an integer constant, so `x^2`,
//! `x^-1`, `x^(1+1)` and `x^2^2` are accepted while `x^y` and `x^0.5` are
//! not.

use alloc::string::{String, ToString};

use super::{Expr, Func};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(&'static str),
    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),
    #[error("exponent is not an integer constant")]
    NonIntegerExponent,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{kind} at byte {offset}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub offset: usize,
}

/// Parse `text`, binding the i-th name in `vars` to variable index `i`.
pub fn parse(text: &str, vars: &[&str]) -> Result<Expr, ParseError> {
    let mut p = Parser { src: text.as_bytes(), pos: 0, vars };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.err(ParseErrorKind::Syntax("unexpected trailing input")));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    vars: &'a [&'a str],
}

impl Parser<'_> {
    fn err(&self, kind: ParseErrorKind) -> ParseError {
        ParseError { kind, offset: self.pos }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.term()?;
        loop {
            if self.eat(b'+') {
                acc = acc.add(&self.term()?);
            } else if self.eat(b'-') {
                acc = acc.sub(&self.term()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat(b'*') {
                acc = acc.mul(&self.unary()?);
            } else if self.eat(b'/') {
                acc = acc.div(&self.unary()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat(b'-') {
            return Ok(self.unary()?.neg());
        }
        if self.eat(b'+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if !self.eat(b'^') {
            return Ok(base);
        }
        self.skip_ws();
        let at = self.pos;
        let exponent = self.unary()?.simplify();
        match exponent.as_const() {
            Some(c) if c == libm::trunc(c) && c.abs() <= i32::MAX as f64 => Ok(base.powi(c as i32)),
            _ => Err(ParseError { kind: ParseErrorKind::NonIntegerExponent, offset: at }),
        }
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            None => Err(self.err(ParseErrorKind::Syntax("unexpected end of input"))),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.err(ParseErrorKind::Syntax("expected `)`")));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.name(),
            Some(_) => Err(self.err(ParseErrorKind::Syntax("unexpected character"))),
        }
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
            p.pos - s
        };
        let mut count = digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            count += digits(self);
        }
        if count == 0 {
            self.pos = start;
            return Err(self.err(ParseErrorKind::Syntax("malformed number")));
        }
        if matches!(self.src.get(self.pos), Some(b'e') | Some(b'E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+') | Some(b'-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                self.pos = mark;
                return Err(self.err(ParseErrorKind::Syntax("malformed exponent in number")));
            }
        }
        let text = core::str::from_utf8(&self.src[start..self.pos]).expect("ascii slice");
        text.parse::<f64>()
            .map(Expr::constant)
            .map_err(|_| ParseError { kind: ParseErrorKind::Syntax("malformed number"), offset: start })
    }

    fn name(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let ident = core::str::from_utf8(&self.src[start..self.pos]).expect("ascii slice");
        if let Some(f) = Func::from_name(ident) {
            if !self.eat(b'(') {
                return Err(self.err(ParseErrorKind::Syntax("expected `(` after function name")));
            }
            let arg = self.expr()?;
            if !self.eat(b')') {
                return Err(self.err(ParseErrorKind::Syntax("expected `)`")));
            }
            return Ok(arg.apply(f));
        }
        match self.vars.iter().position(|v| *v == ident) {
            Some(i) => Ok(Expr::var(i)),
            None => Err(ParseError {
                kind: ParseErrorKind::UnknownIdentifier(ident.to_string()),
                offset: start,
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reports_byte_offsets() {
        let e = parse("x1 + * 2", &["x1"]).unwrap_err();
        assert_eq!(e.offset, 5);
        assert!(matches!(e.kind, ParseErrorKind::Syntax(_)));

        let e = parse("x1 + y", &["x1"]).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnknownIdentifier("y".into()));
        assert_eq!(e.offset, 5);

        let e = parse("(x1 + 1", &["x1"]).unwrap_err();
        assert_eq!(e.offset, 7);
    }

    #[test]
    fn rejects_fractional_and_symbolic_exponents() {
        for t in ["x1^0.5", "x1^x1", "x1^(1/2)"] {
            let e = parse(t, &["x1"]).unwrap_err();
            assert_eq!(e.kind, ParseErrorKind::NonIntegerExponent, "{t}");
            assert_eq!(e.offset, 3);
        }
    }

    #[test]
    fn accepts_signed_and_folded_exponents() {
        let v = ["x1"];
        assert_eq!(parse("x1^-1", &v).unwrap().eval(&[4.0]), 0.25);
        assert_eq!(parse("x1^(-2)", &v).unwrap().eval(&[2.0]), 0.25);
        assert_eq!(parse("x1^(1+1)", &v).unwrap().eval(&[3.0]), 9.0);
        assert_eq!(parse("2^3^2", &v).unwrap().eval(&[0.0]), 512.0);
        assert_eq!(parse("-x1^2", &v).unwrap().eval(&[3.0]), -9.0);
    }

    #[test]
    fn numbers_and_whitespace() {
        let v: [&str; 0] = [];
        assert_eq!(parse("  1.5e2 +.5 ", &v).unwrap().eval(&[]), 150.5);
        assert_eq!(parse("3.", &v).unwrap().eval(&[]), 3.0);
        assert!(parse("1e", &v).is_err());
        assert!(parse("", &v).is_err());
    }

    #[test]
    fn function_name_needs_call() {
        let e = parse("sin + 1", &["x1"]).unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::Syntax(_)));
        let e = parse("tan(x1)", &["x1"]).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnknownIdentifier("tan".into()));
    }
}
