use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{Signed, ToPrimitive, Zero};
use std::collections::BTreeSet;

/// A numeric literal. Rationals stay exact through construction and
/// constant folding; floats enter through [`Expr::from`] on `f64` and
/// through folding of mixed arithmetic.
#[derive(Debug, Clone, PartialEq)]
pub enum Number {
    Rational(BigRational),
    Float(f64),
}

impl Number {
    pub fn integer(v: i64) -> Self {
        Number::Rational(BigRational::from_integer(BigInt::from(v)))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "rational constant with zero denominator");
        Number::Rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Number::Rational(r) => r.to_f64().unwrap_or(f64::NAN),
            Number::Float(f) => *f,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Number::Rational(r) => r.is_zero(),
            Number::Float(f) => *f == 0.0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Number::Rational(r) => r.is_integer() && r.numer() == &BigInt::from(1),
            Number::Float(f) => *f == 1.0,
        }
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Number::Rational(r) => r.is_negative(),
            Number::Float(f) => *f < 0.0,
        }
    }

    pub fn neg(&self) -> Number {
        match self {
            Number::Rational(r) => Number::Rational(-r.clone()),
            Number::Float(f) => Number::Float(-f),
        }
    }

    pub fn abs(&self) -> Number {
        if self.is_negative() {
            self.neg()
        } else {
            self.clone()
        }
    }

    pub fn add(&self, other: &Number) -> Number {
        match (self, other) {
            (Number::Rational(a), Number::Rational(b)) => Number::Rational(a + b),
            _ => Number::Float(self.to_f64() + other.to_f64()),
        }
    }

    pub fn mul(&self, other: &Number) -> Number {
        match (self, other) {
            (Number::Rational(a), Number::Rational(b)) => Number::Rational(a * b),
            _ => Number::Float(self.to_f64() * other.to_f64()),
        }
    }

    /// Exact division; `None` when the divisor is zero.
    pub fn div(&self, other: &Number) -> Option<Number> {
        if other.is_zero() {
            return None;
        }
        Some(match (self, other) {
            (Number::Rational(a), Number::Rational(b)) => Number::Rational(a / b),
            _ => Number::Float(self.to_f64() / other.to_f64()),
        })
    }

    /// Integer power; `None` for `0^n` with negative `n`.
    pub fn pow(&self, exp: i32) -> Option<Number> {
        if self.is_zero() && exp < 0 {
            return None;
        }
        Some(match self {
            Number::Rational(r) => {
                if exp >= 0 {
                    Number::Rational(num::pow::pow(r.clone(), exp as usize))
                } else {
                    Number::Rational(num::pow::pow(r.recip(), (-(exp as i64)) as usize))
                }
            }
            Number::Float(f) => Number::Float(f.powi(exp)),
        })
    }

    /// True when the rational is an integer (floats never count).
    pub fn is_integer(&self) -> bool {
        matches!(self, Number::Rational(r) if r.is_integer())
    }
}

/// The elementary functions admitted by the grammar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UnaryFn {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
}

impl UnaryFn {
    pub fn name(self) -> &'static str {
        match self {
            UnaryFn::Sin => "sin",
            UnaryFn::Cos => "cos",
            UnaryFn::Exp => "exp",
            UnaryFn::Log => "log",
            UnaryFn::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => UnaryFn::Sin,
            "cos" => UnaryFn::Cos,
            "exp" => UnaryFn::Exp,
            "log" => UnaryFn::Log,
            "sqrt" => UnaryFn::Sqrt,
            _ => return None,
        })
    }
}

/// Immutable expression tree over named coordinates.
///
/// Power exponents are literal integers; general powers are written
/// explicitly as `exp(b*log(a))`.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(Number),
    Var(String),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, i32),
    Call(UnaryFn, Box<Expr>),
}

impl Expr {
    pub fn zero() -> Expr {
        Expr::Const(Number::integer(0))
    }

    pub fn one() -> Expr {
        Expr::Const(Number::integer(1))
    }

    pub fn int(v: i64) -> Expr {
        Expr::Const(Number::integer(v))
    }

    pub fn var(name: impl Into<String>) -> Expr {
        Expr::Var(name.into())
    }

    pub fn is_literal_zero(&self) -> bool {
        matches!(self, Expr::Const(n) if n.is_zero())
    }

    pub fn is_literal_one(&self) -> bool {
        matches!(self, Expr::Const(n) if n.is_one())
    }

    /// Sum that drops literal-zero operands.
    pub fn add(a: Expr, b: Expr) -> Expr {
        if a.is_literal_zero() {
            b
        } else if b.is_literal_zero() {
            a
        } else {
            Expr::Add(Box::new(a), Box::new(b))
        }
    }

    /// Difference with the same peephole rules.
    pub fn sub(a: Expr, b: Expr) -> Expr {
        if b.is_literal_zero() {
            a
        } else if a.is_literal_zero() {
            Expr::neg(b)
        } else {
            Expr::Sub(Box::new(a), Box::new(b))
        }
    }

    /// Product absorbing literal zeros and ones.
    pub fn mul(a: Expr, b: Expr) -> Expr {
        if a.is_literal_zero() || b.is_literal_zero() {
            Expr::zero()
        } else if a.is_literal_one() {
            b
        } else if b.is_literal_one() {
            a
        } else {
            Expr::Mul(Box::new(a), Box::new(b))
        }
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        if a.is_literal_zero() && !b.is_literal_zero() {
            Expr::zero()
        } else if b.is_literal_one() {
            a
        } else {
            Expr::Div(Box::new(a), Box::new(b))
        }
    }

    pub fn neg(e: Expr) -> Expr {
        match e {
            Expr::Neg(inner) => *inner,
            Expr::Const(n) => Expr::Const(n.neg()),
            other => Expr::Neg(Box::new(other)),
        }
    }

    pub fn pow(base: Expr, exp: i32) -> Expr {
        match exp {
            0 => Expr::one(),
            1 => base,
            _ => Expr::Pow(Box::new(base), exp),
        }
    }

    pub fn call(f: UnaryFn, arg: Expr) -> Expr {
        Expr::Call(f, Box::new(arg))
    }

    /// All variable names occurring in the tree, sorted.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(v) => {
                out.insert(v.clone());
            }
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Expr::Neg(a) | Expr::Call(_, a) => a.collect_vars(out),
            Expr::Pow(a, _) => a.collect_vars(out),
        }
    }
}

impl From<i64> for Expr {
    fn from(v: i64) -> Expr {
        Expr::int(v)
    }
}

impl From<f64> for Expr {
    fn from(v: f64) -> Expr {
        Expr::Const(Number::Float(v))
    }
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::add(self, rhs)
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::sub(self, rhs)
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::mul(self, rhs)
    }
}

impl std::ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::div(self, rhs)
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}
