use super::ast::{Expr, Number, UnaryFn};
use num::bigint::BigInt;
use num::rational::BigRational;
use num::pow::pow as num_pow;
use std::collections::BTreeSet;
use thiserror::Error;

/// Parse failures, with byte positions into the input.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at position {position}: expected {expected}, found {found}")]
    Syntax {
        position: usize,
        expected: String,
        found: String,
    },
    #[error("unknown variable `{name}` at position {position}")]
    UnknownVariable { name: String, position: usize },
}

/// Parse `text` against the expression grammar, admitting only the given
/// variable names. Function names (`sin`, `cos`, `exp`, `log`, `sqrt`) are
/// reserved and never treated as variables.
///
/// Grammar:
/// ```text
/// expr   := term (('+'|'-') term)*
/// term   := factor (('*'|'/') factor)*
/// factor := ('-')? atom ('^' INT)?
/// atom   := NUMBER | NAME | NAME '(' expr ')' | '(' expr ')'
/// ```
///
/// A leading `-` negates the whole factor, exponent included, so `-x^2`
/// reads as `-(x^2)`.
pub fn parse(text: &str, allowed_vars: &[String]) -> Result<Expr, ParseError> {
    let vars: BTreeSet<&str> = allowed_vars.iter().map(|s| s.as_str()).collect();
    let tokens = tokenize(text)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        vars,
    };
    let e = p.expr()?;
    match p.peek() {
        (Tok::Eof, _) => Ok(e),
        (other, at) => Err(p.unexpected(other.clone(), at, "end of input")),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Number(Number),
    Name(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Number(_) => "number".into(),
            Tok::Name(n) => format!("`{n}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\r' | '\n' => i += 1,
            '+' => {
                out.push((Tok::Plus, i));
                i += 1;
            }
            '-' => {
                out.push((Tok::Minus, i));
                i += 1;
            }
            '*' => {
                out.push((Tok::Star, i));
                i += 1;
            }
            '/' => {
                out.push((Tok::Slash, i));
                i += 1;
            }
            '^' => {
                out.push((Tok::Caret, i));
                i += 1;
            }
            '(' => {
                out.push((Tok::LParen, i));
                i += 1;
            }
            ')' => {
                out.push((Tok::RParen, i));
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                let (num, next) = lex_number(bytes, i).ok_or_else(|| ParseError::Syntax {
                    position: start,
                    expected: "number".into(),
                    found: "malformed numeric literal".into(),
                })?;
                out.push((Tok::Number(num), start));
                i = next;
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < bytes.len()
                    && matches!(bytes[i] as char, 'a'..='z' | 'A'..='Z' | '0'..='9' | '_')
                {
                    i += 1;
                }
                out.push((Tok::Name(text[start..i].to_string()), start));
            }
            other => {
                return Err(ParseError::Syntax {
                    position: i,
                    expected: "token".into(),
                    found: format!("`{other}`"),
                })
            }
        }
    }
    out.push((Tok::Eof, bytes.len()));
    Ok(out)
}

/// Lex `digits ['.' digits] [('e'|'E') ['+'|'-'] digits]` into an exact
/// rational. The exponent marker is consumed only when digits follow, so
/// `2e` lexes as the number `2` followed by the name `e`.
fn lex_number(bytes: &[u8], start: usize) -> Option<(Number, usize)> {
    let mut i = start;
    let mut int_digits = String::new();
    let mut frac_digits = String::new();
    while i < bytes.len() && bytes[i].is_ascii_digit() {
        int_digits.push(bytes[i] as char);
        i += 1;
    }
    if i < bytes.len() && bytes[i] == b'.' {
        i += 1;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            frac_digits.push(bytes[i] as char);
            i += 1;
        }
    }
    if int_digits.is_empty() && frac_digits.is_empty() {
        return None;
    }
    let mut exp: i64 = 0;
    if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
        let mut j = i + 1;
        let mut sign = 1i64;
        if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
            if bytes[j] == b'-' {
                sign = -1;
            }
            j += 1;
        }
        let digits_start = j;
        while j < bytes.len() && bytes[j].is_ascii_digit() {
            j += 1;
        }
        if j > digits_start {
            let mag: i64 = std::str::from_utf8(&bytes[digits_start..j]).ok()?.parse().ok()?;
            exp = sign * mag;
            i = j;
        }
    }
    let digits = format!("{int_digits}{frac_digits}");
    let numer: BigInt = if digits.is_empty() {
        BigInt::from(0)
    } else {
        digits.parse().ok()?
    };
    let scale = frac_digits.len() as i64 - exp;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        BigRational::new(numer, num_pow(ten, scale as usize))
    } else {
        BigRational::from_integer(numer * num_pow(ten, (-scale) as usize))
    };
    Some((Number::Rational(value), i))
}

struct Parser<'a> {
    tokens: Vec<(Tok, usize)>,
    pos: usize,
    vars: BTreeSet<&'a str>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> (Tok, usize) {
        self.tokens[self.pos].clone()
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, found: Tok, at: usize, expected: &str) -> ParseError {
        ParseError::Syntax {
            position: at,
            expected: expected.into(),
            found: found.describe(),
        }
    }

    fn expect(&mut self, want: Tok, expected: &str) -> Result<(), ParseError> {
        let (t, at) = self.bump();
        if t == want {
            Ok(())
        } else {
            Err(self.unexpected(t, at, expected))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                (Tok::Plus, _) => {
                    self.bump();
                    let rhs = self.term()?;
                    acc = Expr::Add(Box::new(acc), Box::new(rhs));
                }
                (Tok::Minus, _) => {
                    self.bump();
                    let rhs = self.term()?;
                    acc = Expr::Sub(Box::new(acc), Box::new(rhs));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                (Tok::Star, _) => {
                    self.bump();
                    let rhs = self.factor()?;
                    acc = Expr::Mul(Box::new(acc), Box::new(rhs));
                }
                (Tok::Slash, _) => {
                    self.bump();
                    let rhs = self.factor()?;
                    acc = Expr::Div(Box::new(acc), Box::new(rhs));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let negated = matches!(self.peek().0, Tok::Minus);
        if negated {
            self.bump();
        }
        let mut e = self.atom()?;
        if matches!(self.peek().0, Tok::Caret) {
            self.bump();
            let exp = self.int_exponent()?;
            e = Expr::Pow(Box::new(e), exp);
        }
        Ok(if negated { Expr::Neg(Box::new(e)) } else { e })
    }

    fn int_exponent(&mut self) -> Result<i32, ParseError> {
        let mut sign = 1i32;
        if matches!(self.peek().0, Tok::Minus) {
            self.bump();
            sign = -1;
        }
        let (t, at) = self.bump();
        match t {
            Tok::Number(Number::Rational(ref r)) if r.is_integer() => {
                let v = num::traits::ToPrimitive::to_i32(r.numer()).ok_or_else(|| {
                    ParseError::Syntax {
                        position: at,
                        expected: "integer exponent".into(),
                        found: "integer out of range".into(),
                    }
                })?;
                Ok(sign * v)
            }
            other => Err(self.unexpected(other, at, "integer exponent")),
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let (t, at) = self.bump();
        match t {
            Tok::Number(n) => Ok(Expr::Const(n)),
            Tok::Name(name) => {
                if matches!(self.peek().0, Tok::LParen) {
                    let f = UnaryFn::from_name(&name).ok_or_else(|| ParseError::Syntax {
                        position: at,
                        expected: "function name (sin, cos, exp, log, sqrt)".into(),
                        found: format!("`{name}`"),
                    })?;
                    self.bump(); // (
                    let arg = self.expr()?;
                    self.expect(Tok::RParen, "`)`")?;
                    Ok(Expr::Call(f, Box::new(arg)))
                } else if self.vars.contains(name.as_str()) {
                    Ok(Expr::Var(name))
                } else {
                    Err(ParseError::UnknownVariable { name, position: at })
                }
            }
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            other => Err(self.unexpected(other, at, "number, name, or `(`")),
        }
    }
}
