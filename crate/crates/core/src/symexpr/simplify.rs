use super::ast::{Expr, Number};
use std::cmp::Ordering;

/// Simplify an expression without changing its value at any binding
/// (up to floating reassociation).
///
/// Guaranteed rewrites: `0 + e -> e`, `0*e -> 0`, `1*e -> e`, `e - e -> 0`
/// for structurally identical subtrees, exact constant folding, and
/// flattening of nested sums and products. Sum terms and product factors
/// are put into a fixed structural order so that commuted duplicates
/// cancel too.
pub fn simplify(e: &Expr) -> Expr {
    simp(e)
}

impl Expr {
    pub fn simplified(&self) -> Expr {
        simplify(self)
    }
}

fn simp(e: &Expr) -> Expr {
    match e {
        Expr::Const(_) | Expr::Var(_) => e.clone(),
        Expr::Add(..) | Expr::Sub(..) | Expr::Neg(_) => simplify_sum(e),
        Expr::Mul(..) | Expr::Div(..) => simplify_product(e),
        Expr::Pow(base, n) => simplify_pow(base, *n),
        Expr::Call(f, a) => Expr::Call(*f, Box::new(simp(a))),
    }
}

// ---------------------------------------------------------------- sums

fn simplify_sum(e: &Expr) -> Expr {
    let mut terms: Vec<(bool, Expr)> = Vec::new();
    let mut constants: Vec<Number> = Vec::new();
    collect_terms(e, false, &mut terms, &mut constants);

    // Cancel exactly opposite constant contributions before folding, so
    // float constants from identical subtrees vanish without rounding.
    let mut i = 0;
    while i < constants.len() {
        let opposite = constants[i].neg();
        if let Some(j) = constants[i + 1..].iter().position(|c| *c == opposite) {
            constants.remove(i + 1 + j);
            constants.remove(i);
        } else {
            i += 1;
        }
    }
    let constant = constants
        .iter()
        .fold(Number::integer(0), |acc, c| acc.add(c));

    terms.sort_by(|a, b| expr_cmp(&a.1, &b.1));

    // Merge runs of structurally identical terms into a net coefficient.
    let mut merged: Vec<(bool, Expr)> = Vec::new();
    let mut i = 0;
    while i < terms.len() {
        let mut j = i + 1;
        let mut net: i64 = if terms[i].0 { -1 } else { 1 };
        while j < terms.len() && expr_cmp(&terms[i].1, &terms[j].1) == Ordering::Equal {
            net += if terms[j].0 { -1 } else { 1 };
            j += 1;
        }
        match net {
            0 => {}
            1 => merged.push((false, terms[i].1.clone())),
            -1 => merged.push((true, terms[i].1.clone())),
            n => merged.push((
                n < 0,
                Expr::Mul(
                    Box::new(Expr::int(n.abs())),
                    Box::new(terms[i].1.clone()),
                ),
            )),
        }
        i = j;
    }

    let mut acc: Option<Expr> = None;
    for (negated, t) in merged {
        acc = Some(match acc {
            None => {
                if negated {
                    Expr::Neg(Box::new(t))
                } else {
                    t
                }
            }
            Some(a) => {
                if negated {
                    Expr::Sub(Box::new(a), Box::new(t))
                } else {
                    Expr::Add(Box::new(a), Box::new(t))
                }
            }
        });
    }

    match acc {
        // normalize the float zero so literal-zero detection is canonical
        None if constant.is_zero() => Expr::zero(),
        None => Expr::Const(constant),
        Some(a) if constant.is_zero() => a,
        Some(a) => {
            if constant.is_negative() {
                Expr::Sub(Box::new(a), Box::new(Expr::Const(constant.abs())))
            } else {
                Expr::Add(Box::new(a), Box::new(Expr::Const(constant)))
            }
        }
    }
}

fn collect_terms(e: &Expr, negated: bool, terms: &mut Vec<(bool, Expr)>, consts: &mut Vec<Number>) {
    match e {
        Expr::Add(a, b) => {
            collect_terms(a, negated, terms, consts);
            collect_terms(b, negated, terms, consts);
        }
        Expr::Sub(a, b) => {
            collect_terms(a, negated, terms, consts);
            collect_terms(b, !negated, terms, consts);
        }
        Expr::Neg(a) => collect_terms(a, !negated, terms, consts),
        other => push_term(simp(other), negated, terms, consts),
    }
}

fn push_term(s: Expr, negated: bool, terms: &mut Vec<(bool, Expr)>, consts: &mut Vec<Number>) {
    match s {
        Expr::Const(n) => {
            consts.push(if negated { n.neg() } else { n });
        }
        // A simplified subterm can itself be a sum (e.g. a product that
        // collapsed); keep flattening through it.
        Expr::Add(..) | Expr::Sub(..) | Expr::Neg(_) => {
            collect_simped_terms(&s, negated, terms, consts)
        }
        other => terms.push((negated, other)),
    }
}

fn collect_simped_terms(
    e: &Expr,
    negated: bool,
    terms: &mut Vec<(bool, Expr)>,
    consts: &mut Vec<Number>,
) {
    match e {
        Expr::Add(a, b) => {
            collect_simped_terms(a, negated, terms, consts);
            collect_simped_terms(b, negated, terms, consts);
        }
        Expr::Sub(a, b) => {
            collect_simped_terms(a, negated, terms, consts);
            collect_simped_terms(b, !negated, terms, consts);
        }
        Expr::Neg(a) => collect_simped_terms(a, !negated, terms, consts),
        Expr::Const(n) => {
            consts.push(if negated { n.neg() } else { n.clone() });
        }
        other => terms.push((negated, other.clone())),
    }
}

// ------------------------------------------------------------- products

struct FactorAcc {
    negated: bool,
    const_num: Number,
    const_den: Number,
    num: Vec<Expr>,
    den: Vec<Expr>,
}

fn simplify_product(e: &Expr) -> Expr {
    let mut acc = FactorAcc {
        negated: false,
        const_num: Number::integer(1),
        const_den: Number::integer(1),
        num: Vec::new(),
        den: Vec::new(),
    };
    collect_factors(e, false, &mut acc);

    // 0 * anything is 0 (a division by a symbolic zero denominator is the
    // caller's domain error, not ours to preserve once the product is 0).
    if acc.const_num.is_zero() {
        return Expr::zero();
    }

    let q = acc
        .const_num
        .div(&acc.const_den)
        .expect("zero constant denominators are kept symbolic");
    let negated = acc.negated ^ q.is_negative();
    let mag = q.abs();

    acc.num.sort_by(expr_cmp);
    acc.den.sort_by(expr_cmp);
    // grouping replaces runs by powers, which changes ranks; re-sort
    let mut num = group_repeated_factors(acc.num);
    let mut den = group_repeated_factors(acc.den);
    num.sort_by(expr_cmp);
    den.sort_by(expr_cmp);

    let mut parts: Vec<Expr> = Vec::new();
    if !mag.is_one() || num.is_empty() {
        parts.push(Expr::Const(mag));
    }
    parts.extend(num);
    let numerator = mul_chain(parts);
    let body = if den.is_empty() {
        numerator
    } else {
        Expr::Div(Box::new(numerator), Box::new(mul_chain(den)))
    };
    if negated {
        match body {
            Expr::Const(n) => Expr::Const(n.neg()),
            other => Expr::Neg(Box::new(other)),
        }
    } else {
        body
    }
}

/// Collapse runs of structurally equal factors into integer powers, so
/// `x*x*y` and `x^2*y` get the same canonical form.
fn group_repeated_factors(sorted: Vec<Expr>) -> Vec<Expr> {
    let mut out: Vec<Expr> = Vec::new();
    let mut iter = sorted.into_iter().peekable();
    while let Some(f) = iter.next() {
        let mut count: i32 = 1;
        while iter
            .peek()
            .is_some_and(|g| expr_cmp(&f, g) == Ordering::Equal)
        {
            iter.next();
            count += 1;
        }
        if count == 1 {
            out.push(f);
        } else {
            out.push(simplify_pow(&f, count));
        }
    }
    out
}

fn mul_chain(parts: Vec<Expr>) -> Expr {
    let mut it = parts.into_iter();
    let first = it.next().expect("mul_chain on empty list");
    it.fold(first, |a, b| Expr::Mul(Box::new(a), Box::new(b)))
}

fn collect_factors(e: &Expr, inverted: bool, acc: &mut FactorAcc) {
    match e {
        Expr::Mul(a, b) => {
            collect_factors(a, inverted, acc);
            collect_factors(b, inverted, acc);
        }
        Expr::Div(a, b) => {
            collect_factors(a, inverted, acc);
            collect_factors(b, !inverted, acc);
        }
        Expr::Neg(a) => {
            acc.negated = !acc.negated;
            collect_factors(a, inverted, acc);
        }
        other => push_factor(simp(other), inverted, acc),
    }
}

fn push_factor(s: Expr, inverted: bool, acc: &mut FactorAcc) {
    match s {
        Expr::Const(n) => {
            if inverted {
                if n.is_zero() {
                    // Keep `x/0` symbolic so evaluation still reports the
                    // domain error instead of silently folding.
                    acc.den.push(Expr::Const(n));
                } else {
                    acc.const_den = acc.const_den.mul(&n);
                }
            } else {
                acc.const_num = acc.const_num.mul(&n);
            }
        }
        Expr::Mul(..) | Expr::Div(..) | Expr::Neg(_) => collect_simped_factors(&s, inverted, acc),
        other => {
            if inverted {
                acc.den.push(other);
            } else {
                acc.num.push(other);
            }
        }
    }
}

fn collect_simped_factors(e: &Expr, inverted: bool, acc: &mut FactorAcc) {
    match e {
        Expr::Mul(a, b) => {
            collect_simped_factors(a, inverted, acc);
            collect_simped_factors(b, inverted, acc);
        }
        Expr::Div(a, b) => {
            collect_simped_factors(a, inverted, acc);
            collect_simped_factors(b, !inverted, acc);
        }
        Expr::Neg(a) => {
            acc.negated = !acc.negated;
            collect_simped_factors(a, inverted, acc);
        }
        Expr::Const(n) => {
            if inverted {
                if n.is_zero() {
                    acc.den.push(Expr::Const(n.clone()));
                } else {
                    acc.const_den = acc.const_den.mul(n);
                }
            } else {
                acc.const_num = acc.const_num.mul(n);
            }
        }
        other => {
            if inverted {
                acc.den.push(other.clone());
            } else {
                acc.num.push(other.clone());
            }
        }
    }
}

// --------------------------------------------------------------- powers

fn simplify_pow(base: &Expr, n: i32) -> Expr {
    let sb = simp(base);
    if n == 0 {
        return Expr::one();
    }
    if n == 1 {
        return sb;
    }
    match sb {
        Expr::Const(c) => match c.pow(n) {
            Some(folded) => Expr::Const(folded),
            None => Expr::Pow(Box::new(Expr::Const(c)), n),
        },
        Expr::Pow(inner, m) => match m.checked_mul(n) {
            Some(mn) => Expr::pow((*inner).clone(), mn),
            None => Expr::Pow(Box::new(Expr::Pow(inner, m)), n),
        },
        Expr::Neg(inner) => {
            if n % 2 == 0 {
                Expr::pow((*inner).clone(), n)
            } else {
                Expr::Neg(Box::new(Expr::pow((*inner).clone(), n)))
            }
        }
        other => Expr::Pow(Box::new(other), n),
    }
}

// -------------------------------------------------------------- ordering

/// Total structural order on expressions; used to canonicalize sum and
/// product operand order so that commuted duplicates collide.
pub fn expr_cmp(a: &Expr, b: &Expr) -> Ordering {
    fn rank(e: &Expr) -> u8 {
        match e {
            Expr::Const(_) => 0,
            Expr::Var(_) => 1,
            Expr::Call(..) => 2,
            Expr::Pow(..) => 3,
            Expr::Neg(_) => 4,
            Expr::Mul(..) => 5,
            Expr::Div(..) => 6,
            Expr::Add(..) => 7,
            Expr::Sub(..) => 8,
        }
    }
    match rank(a).cmp(&rank(b)) {
        Ordering::Equal => {}
        other => return other,
    }
    match (a, b) {
        (Expr::Const(x), Expr::Const(y)) => number_cmp(x, y),
        (Expr::Var(x), Expr::Var(y)) => x.cmp(y),
        (Expr::Call(f, x), Expr::Call(g, y)) => f.cmp(g).then_with(|| expr_cmp(x, y)),
        (Expr::Pow(x, n), Expr::Pow(y, m)) => expr_cmp(x, y).then_with(|| n.cmp(m)),
        (Expr::Neg(x), Expr::Neg(y)) => expr_cmp(x, y),
        (Expr::Mul(x1, x2), Expr::Mul(y1, y2))
        | (Expr::Div(x1, x2), Expr::Div(y1, y2))
        | (Expr::Add(x1, x2), Expr::Add(y1, y2))
        | (Expr::Sub(x1, x2), Expr::Sub(y1, y2)) => {
            expr_cmp(x1, y1).then_with(|| expr_cmp(x2, y2))
        }
        _ => unreachable!("rank dispatch covers all pairs"),
    }
}

fn number_cmp(a: &Number, b: &Number) -> Ordering {
    match (a, b) {
        (Number::Rational(x), Number::Rational(y)) => x.cmp(y),
        _ => a
            .to_f64()
            .total_cmp(&b.to_f64())
            .then_with(|| matches!(a, Number::Float(_)).cmp(&matches!(b, Number::Float(_)))),
    }
}
