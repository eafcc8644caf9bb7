use super::ast::{Expr, Number};
use std::fmt;

// Grammar classes, loosest to tightest: 1 = expr, 2 = term, 3 = factor,
// 4 = atom. A child is parenthesized when its class is looser than the
// slot it must occupy, so printed output always re-parses to an
// evaluation-equivalent tree.
fn render(e: &Expr) -> (String, u8) {
    match e {
        Expr::Const(n) => render_number(n),
        Expr::Var(v) => (v.clone(), 4),
        Expr::Add(a, b) => {
            let l = at_least(a, 1);
            // `a + -(b)` is legal but noisy; fold the sign into the operator.
            if let Expr::Neg(inner) = &**b {
                let r = at_least(inner, 2);
                (format!("{l} - {r}"), 1)
            } else {
                let r = at_least(b, 2);
                (format!("{l} + {r}"), 1)
            }
        }
        Expr::Sub(a, b) => {
            let l = at_least(a, 1);
            let r = at_least(b, 2);
            (format!("{l} - {r}"), 1)
        }
        Expr::Mul(a, b) => {
            let l = at_least(a, 2);
            let r = at_least(b, 3);
            (format!("{l}*{r}"), 2)
        }
        Expr::Div(a, b) => {
            let l = at_least(a, 2);
            let r = at_least(b, 3);
            (format!("{l}/{r}"), 2)
        }
        Expr::Neg(a) => {
            let inner = at_least(a, 1);
            (format!("-({inner})"), 3)
        }
        Expr::Pow(a, n) => {
            let base = at_least(a, 4);
            (format!("{base}^{n}"), 3)
        }
        Expr::Call(f, a) => {
            let arg = at_least(a, 1);
            (format!("{}({arg})", f.name()), 4)
        }
    }
}

fn render_number(n: &Number) -> (String, u8) {
    match n {
        Number::Rational(r) => {
            let s = r.to_string();
            if r.is_integer() {
                (s.clone(), if s.starts_with('-') { 3 } else { 4 })
            } else {
                (s, 2)
            }
        }
        Number::Float(f) => {
            let s = format!("{f:?}");
            (s.clone(), if s.starts_with('-') { 3 } else { 4 })
        }
    }
}

fn at_least(e: &Expr, class: u8) -> String {
    let (s, c) = render(e);
    if c < class {
        format!("({s})")
    } else {
        s
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(self).0)
    }
}
