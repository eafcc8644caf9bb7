use super::ast::{Expr, UnaryFn};
use std::collections::BTreeMap;
use thiserror::Error;

/// Assignment of finite values to coordinate names.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Binding(BTreeMap<String, f64>);

impl Binding {
    pub fn new() -> Self {
        Binding(BTreeMap::new())
    }

    pub fn set(&mut self, name: impl Into<String>, value: f64) -> &mut Self {
        self.0.insert(name.into(), value);
        self
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.0.get(name).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl<S: Into<String>> FromIterator<(S, f64)> for Binding {
    fn from_iter<T: IntoIterator<Item = (S, f64)>>(iter: T) -> Self {
        Binding(iter.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }
}

impl std::fmt::Display for Binding {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut first = true;
        for (k, v) in self.0.iter() {
            if !first {
                write!(f, " ")?;
            }
            write!(f, "{k}={v}")?;
            first = false;
        }
        Ok(())
    }
}

/// Domain failures during numeric evaluation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("log of non-positive value {0}")]
    LogDomain(f64),
    #[error("sqrt of negative value {0}")]
    SqrtDomain(f64),
    #[error("zero raised to negative power")]
    ZeroToNegativePower,
    #[error("non-finite intermediate value")]
    NonFinite,
}

fn apply_fn(f: UnaryFn, x: f64) -> Result<f64, EvalError> {
    let y = match f {
        UnaryFn::Sin => x.sin(),
        UnaryFn::Cos => x.cos(),
        UnaryFn::Exp => x.exp(),
        UnaryFn::Log => {
            if x <= 0.0 {
                return Err(EvalError::LogDomain(x));
            }
            x.ln()
        }
        UnaryFn::Sqrt => {
            if x < 0.0 {
                return Err(EvalError::SqrtDomain(x));
            }
            x.sqrt()
        }
    };
    finite(y)
}

fn finite(v: f64) -> Result<f64, EvalError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::NonFinite)
    }
}

fn pow_checked(base: f64, exp: i32) -> Result<f64, EvalError> {
    if base == 0.0 && exp < 0 {
        return Err(EvalError::ZeroToNegativePower);
    }
    finite(base.powi(exp))
}

impl Expr {
    /// Evaluate at a binding that must cover every free variable.
    pub fn eval(&self, binding: &Binding) -> Result<f64, EvalError> {
        match self {
            Expr::Const(n) => finite(n.to_f64()),
            Expr::Var(v) => binding
                .get(v)
                .ok_or_else(|| EvalError::UnboundVariable(v.clone())),
            Expr::Add(a, b) => finite(a.eval(binding)? + b.eval(binding)?),
            Expr::Sub(a, b) => finite(a.eval(binding)? - b.eval(binding)?),
            Expr::Mul(a, b) => finite(a.eval(binding)? * b.eval(binding)?),
            Expr::Div(a, b) => {
                let d = b.eval(binding)?;
                if d == 0.0 {
                    return Err(EvalError::DivisionByZero);
                }
                finite(a.eval(binding)? / d)
            }
            Expr::Neg(a) => Ok(-a.eval(binding)?),
            Expr::Pow(a, n) => pow_checked(a.eval(binding)?, *n),
            Expr::Call(f, a) => apply_fn(*f, a.eval(binding)?),
        }
    }

    /// Resolve variable names against a fixed coordinate list, producing a
    /// form evaluated against a plain value slice. This is the hot path for
    /// grid sweeps, where hash lookups per node would dominate.
    pub fn compile(&self, coords: &[String]) -> Result<Compiled, EvalError> {
        Ok(Compiled {
            node: compile_node(self, coords)?,
        })
    }
}

#[derive(Debug, Clone)]
enum CNode {
    Const(f64),
    Var(usize),
    Add(Box<CNode>, Box<CNode>),
    Sub(Box<CNode>, Box<CNode>),
    Mul(Box<CNode>, Box<CNode>),
    Div(Box<CNode>, Box<CNode>),
    Neg(Box<CNode>),
    Pow(Box<CNode>, i32),
    Call(UnaryFn, Box<CNode>),
}

fn compile_node(e: &Expr, coords: &[String]) -> Result<CNode, EvalError> {
    Ok(match e {
        Expr::Const(n) => CNode::Const(n.to_f64()),
        Expr::Var(v) => {
            let slot = coords
                .iter()
                .position(|c| c == v)
                .ok_or_else(|| EvalError::UnboundVariable(v.clone()))?;
            CNode::Var(slot)
        }
        Expr::Add(a, b) => CNode::Add(
            Box::new(compile_node(a, coords)?),
            Box::new(compile_node(b, coords)?),
        ),
        Expr::Sub(a, b) => CNode::Sub(
            Box::new(compile_node(a, coords)?),
            Box::new(compile_node(b, coords)?),
        ),
        Expr::Mul(a, b) => CNode::Mul(
            Box::new(compile_node(a, coords)?),
            Box::new(compile_node(b, coords)?),
        ),
        Expr::Div(a, b) => CNode::Div(
            Box::new(compile_node(a, coords)?),
            Box::new(compile_node(b, coords)?),
        ),
        Expr::Neg(a) => CNode::Neg(Box::new(compile_node(a, coords)?)),
        Expr::Pow(a, n) => CNode::Pow(Box::new(compile_node(a, coords)?), *n),
        Expr::Call(f, a) => CNode::Call(*f, Box::new(compile_node(a, coords)?)),
    })
}

/// Slot-resolved expression; see [`Expr::compile`].
#[derive(Debug, Clone)]
pub struct Compiled {
    node: CNode,
}

impl Compiled {
    /// Evaluate against values aligned with the coordinate list used at
    /// compile time.
    pub fn eval(&self, values: &[f64]) -> Result<f64, EvalError> {
        eval_node(&self.node, values)
    }
}

fn eval_node(n: &CNode, values: &[f64]) -> Result<f64, EvalError> {
    Ok(match n {
        CNode::Const(c) => *c,
        CNode::Var(slot) => values[*slot],
        CNode::Add(a, b) => finite(eval_node(a, values)? + eval_node(b, values)?)?,
        CNode::Sub(a, b) => finite(eval_node(a, values)? - eval_node(b, values)?)?,
        CNode::Mul(a, b) => finite(eval_node(a, values)? * eval_node(b, values)?)?,
        CNode::Div(a, b) => {
            let d = eval_node(b, values)?;
            if d == 0.0 {
                return Err(EvalError::DivisionByZero);
            }
            finite(eval_node(a, values)? / d)?
        }
        CNode::Neg(a) => -eval_node(a, values)?,
        CNode::Pow(a, e) => pow_checked(eval_node(a, values)?, *e)?,
        CNode::Call(f, a) => apply_fn(*f, eval_node(a, values)?)?,
    })
}
