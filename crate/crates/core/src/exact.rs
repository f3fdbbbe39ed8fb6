//! Closed-form constants as small expression trees.
//!
//! Expressions print in a plain infix syntax (`(1/3)*(sqrt(2)+1)`) that
//! [`Expr::parse`] reads back, so a value shown in a report can always be
//! re-evaluated from its printed form.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Pi,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Func(Func, Box<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sqrt,
    Log,
    Acosh,
    Tan,
    Cot,
    Cos,
    Sin,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sqrt => "sqrt",
            Func::Log => "log",
            Func::Acosh => "acosh",
            Func::Tan => "tan",
            Func::Cot => "cot",
            Func::Cos => "cos",
            Func::Sin => "sin",
        }
    }

    fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "sqrt" => Func::Sqrt,
            "log" | "ln" => Func::Log,
            "acosh" => Func::Acosh,
            "tan" => Func::Tan,
            "cot" => Func::Cot,
            "cos" => Func::Cos,
            "sin" => Func::Sin,
            _ => return None,
        })
    }

    fn apply(self, v: f64) -> f64 {
        match self {
            Func::Sqrt => v.sqrt(),
            Func::Log => v.ln(),
            Func::Acosh => v.acosh(),
            Func::Tan => v.tan(),
            Func::Cot => 1.0 / v.tan(),
            Func::Cos => v.cos(),
            Func::Sin => v.sin(),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
#[error("cannot parse expression at byte {pos}: {msg}")]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

pub fn num(v: f64) -> Expr {
    Expr::Num(v)
}

pub fn pi() -> Expr {
    Expr::Pi
}

pub fn sqrt(e: Expr) -> Expr {
    Expr::Func(Func::Sqrt, Box::new(e))
}

pub fn func(f: Func, e: Expr) -> Expr {
    Expr::Func(f, Box::new(e))
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, o: Expr) -> Expr {
        Expr::Add(Box::new(self), Box::new(o))
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, o: Expr) -> Expr {
        Expr::Sub(Box::new(self), Box::new(o))
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, o: Expr) -> Expr {
        Expr::Mul(Box::new(self), Box::new(o))
    }
}

impl std::ops::Div for Expr {
    type Output = Expr;
    fn div(self, o: Expr) -> Expr {
        Expr::Div(Box::new(self), Box::new(o))
    }
}

impl Expr {
    pub fn pow(self, e: Expr) -> Expr {
        Expr::Pow(Box::new(self), Box::new(e))
    }

    pub fn eval(&self) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Pi => std::f64::consts::PI,
            Expr::Neg(a) => -a.eval(),
            Expr::Add(a, b) => a.eval() + b.eval(),
            Expr::Sub(a, b) => a.eval() - b.eval(),
            Expr::Mul(a, b) => a.eval() * b.eval(),
            Expr::Div(a, b) => a.eval() / b.eval(),
            Expr::Pow(a, b) => a.eval().powf(b.eval()),
            Expr::Func(f, a) => f.apply(a.eval()),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(..) => 3,
            Expr::Pow(..) => 4,
            Expr::Num(v) if *v < 0.0 => 3,
            _ => 5,
        }
    }

    pub fn parse(src: &str) -> Result<Expr, ParseError> {
        let mut p = Parser {
            src: src.as_bytes(),
            pos: 0,
        };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.error("trailing input"));
        }
        Ok(e)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wrap = |f: &mut fmt::Formatter<'_>, e: &Expr, min: u8| {
            if e.precedence() < min {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        };
        match self {
            Expr::Num(v) => {
                if v.fract() == 0.0 && v.abs() < 1e15 {
                    write!(f, "{}", *v as i64)
                } else {
                    write!(f, "{v}")
                }
            }
            Expr::Pi => write!(f, "pi"),
            Expr::Neg(a) => {
                write!(f, "-")?;
                wrap(f, a, 4)
            }
            Expr::Add(a, b) => {
                wrap(f, a, 1)?;
                write!(f, "+")?;
                wrap(f, b, 2)
            }
            Expr::Sub(a, b) => {
                wrap(f, a, 1)?;
                write!(f, "-")?;
                wrap(f, b, 2)
            }
            Expr::Mul(a, b) => {
                wrap(f, a, 2)?;
                write!(f, "*")?;
                wrap(f, b, 3)
            }
            Expr::Div(a, b) => {
                wrap(f, a, 2)?;
                write!(f, "/")?;
                wrap(f, b, 4)
            }
            Expr::Pow(a, b) => {
                wrap(f, a, 5)?;
                write!(f, "^")?;
                wrap(f, b, 4)
            }
            Expr::Func(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> ParseError {
        ParseError {
            pos: self.pos,
            msg: msg.to_string(),
        }
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

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = if c == b'+' { lhs + rhs } else { lhs - rhs };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    lhs = lhs * self.unary()?;
                }
                Some(b'/') => {
                    self.pos += 1;
                    lhs = lhs / self.unary()?;
                }
                // Juxtaposition such as `(1/3)(sqrt2+1)` or `2pi`.
                Some(c) if c == b'(' || c.is_ascii_alphabetic() => {
                    lhs = lhs * self.unary()?;
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(base.pow(exp));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.error("expected ')'"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_digit() || self.src[self.pos] == b'.' || self.src[self.pos] == b'e')
                {
                    self.pos += 1;
                }
                let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                text.parse::<f64>().map(Expr::Num).map_err(|_| self.error("bad number"))
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphabetic() {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                if name == "pi" {
                    return Ok(Expr::Pi);
                }
                let f = Func::from_name(name).ok_or_else(|| self.error("unknown name"))?;
                // `sqrt2` shorthand.
                if f == Func::Sqrt && self.src.get(self.pos).is_some_and(u8::is_ascii_digit) {
                    let arg = self.atom()?;
                    return Ok(func(f, arg));
                }
                let arg = self.atom()?;
                Ok(func(f, arg))
            }
            _ => Err(self.error("unexpected token")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_parses_back() {
        let e = (num(1.0) / num(3.0)) * (sqrt(num(2.0)) + num(1.0));
        let text = e.to_string();
        assert_eq!(text, "1/3*(sqrt(2)+1)");
        assert_eq!(Expr::parse(&text).unwrap().eval(), e.eval());
    }

    #[test]
    fn juxtaposition_and_shorthand() {
        let v = Expr::parse("(1/3)(sqrt2+1)").unwrap().eval();
        assert!((v - (2f64.sqrt() + 1.0) / 3.0).abs() < 1e-15);
        let w = Expr::parse("pi/2^(3/2)").unwrap().eval();
        assert!((w - std::f64::consts::PI / 2f64.powf(1.5)).abs() < 1e-15);
        assert!((Expr::parse("-2^2").unwrap().eval() + 4.0).abs() < 1e-15);
    }

    #[test]
    fn nested_subtraction_keeps_parens() {
        let e = num(1.0) - (num(2.0) - num(3.0));
        assert_eq!(e.to_string(), "1-(2-3)");
        assert_eq!(Expr::parse(&e.to_string()).unwrap().eval(), 2.0);
    }

    #[test]
    fn rejects_garbage() {
        assert!(Expr::parse("1+").is_err());
        assert!(Expr::parse("foo(2)").is_err());
        assert!(Expr::parse("(1").is_err());
    }
}
