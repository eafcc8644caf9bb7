use super::ast::{Expr, UnaryFn};

impl Expr {
    /// Exact partial derivative with respect to `var`.
    ///
    /// Derivatives of constants and of unrelated variables are literal
    /// zero; the smart constructors keep the result tree compact without
    /// changing its value.
    pub fn diff(&self, var: &str) -> Expr {
        match self {
            Expr::Const(_) => Expr::zero(),
            Expr::Var(v) => {
                if v == var {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Expr::Add(a, b) => Expr::add(a.diff(var), b.diff(var)),
            Expr::Sub(a, b) => Expr::sub(a.diff(var), b.diff(var)),
            Expr::Mul(a, b) => Expr::add(
                Expr::mul(a.diff(var), (**b).clone()),
                Expr::mul((**a).clone(), b.diff(var)),
            ),
            Expr::Div(a, b) => {
                // (a/b)' = a'/b - a b'/b^2
                let da = a.diff(var);
                let db = b.diff(var);
                Expr::sub(
                    Expr::div(da, (**b).clone()),
                    Expr::div(
                        Expr::mul((**a).clone(), db),
                        Expr::pow((**b).clone(), 2),
                    ),
                )
            }
            Expr::Neg(a) => Expr::neg(a.diff(var)),
            Expr::Pow(a, n) => {
                let da = a.diff(var);
                Expr::mul(
                    Expr::mul(Expr::int(*n as i64), Expr::pow((**a).clone(), n - 1)),
                    da,
                )
            }
            Expr::Call(f, a) => {
                let da = a.diff(var);
                let outer = match f {
                    UnaryFn::Sin => Expr::call(UnaryFn::Cos, (**a).clone()),
                    UnaryFn::Cos => Expr::neg(Expr::call(UnaryFn::Sin, (**a).clone())),
                    UnaryFn::Exp => Expr::call(UnaryFn::Exp, (**a).clone()),
                    UnaryFn::Log => {
                        return Expr::div(da, (**a).clone());
                    }
                    UnaryFn::Sqrt => {
                        return Expr::div(
                            da,
                            Expr::mul(Expr::int(2), Expr::call(UnaryFn::Sqrt, (**a).clone())),
                        );
                    }
                };
                Expr::mul(outer, da)
            }
        }
    }
}
