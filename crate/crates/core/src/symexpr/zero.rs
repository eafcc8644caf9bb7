use super::ast::Expr;
use super::eval::{Binding, EvalError};
use super::simplify::simplify;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use thiserror::Error;

/// Outcome of an identical-vanishing test.
///
/// Deciding whether an expression vanishes identically is undecidable in
/// general, so the verdict is three-valued: proven zero by simplification,
/// zero at every sampled point, or refuted by a concrete witness.
#[derive(Debug, Clone, PartialEq)]
pub enum ZeroVerdict {
    /// Simplification produced the literal constant 0.
    SymbolicZero,
    /// `|value| < tol` at every sampled binding.
    NumericZero,
    /// A binding where `|value| >= tol`.
    NonZero(Binding),
}

impl ZeroVerdict {
    /// True for both the symbolic and the sampled-numeric verdict.
    pub fn is_zero(&self) -> bool {
        !matches!(self, ZeroVerdict::NonZero(_))
    }

    pub fn label(&self) -> &'static str {
        match self {
            ZeroVerdict::SymbolicZero => "SymbolicZero",
            ZeroVerdict::NumericZero => "NumericZero",
            ZeroVerdict::NonZero(_) => "NonZero",
        }
    }
}

/// Sampling policy for [`is_zero`].
#[derive(Debug, Clone)]
pub struct ZeroConfig {
    /// Number of random bindings to test.
    pub samples: usize,
    /// Threshold under which a sampled value counts as zero.
    pub tol: f64,
    /// Default per-variable sampling interval.
    pub range: (f64, f64),
    /// Per-variable overrides of the sampling interval.
    pub ranges: BTreeMap<String, (f64, f64)>,
    /// RNG seed; fixed so repeated runs produce identical verdicts.
    pub seed: u64,
}

impl Default for ZeroConfig {
    fn default() -> Self {
        ZeroConfig {
            samples: 200,
            tol: 1e-9,
            range: (-2.0, 2.0),
            ranges: BTreeMap::new(),
            seed: 0x4a45_5443,
        }
    }
}

impl ZeroConfig {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = samples;
        self
    }

    pub fn with_range(mut self, lo: f64, hi: f64) -> Self {
        self.range = (lo, hi);
        self
    }

    pub fn with_var_range(mut self, var: impl Into<String>, lo: f64, hi: f64) -> Self {
        self.ranges.insert(var.into(), (lo, hi));
        self
    }

    fn interval(&self, var: &str) -> (f64, f64) {
        self.ranges.get(var).copied().unwrap_or(self.range)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ZeroTestError {
    #[error("sampling exhausted retry budget after {attempts} domain errors (last: {last})")]
    Sampling { attempts: usize, last: EvalError },
}

/// Tri-state zero test: symbolic first, then randomized sampling.
///
/// Domain errors during sampling are retried at fresh points; the retry
/// budget is ten draws per requested sample, after which the test fails.
pub fn is_zero(e: &Expr, cfg: &ZeroConfig) -> Result<ZeroVerdict, ZeroTestError> {
    let s = simplify(e);
    if s.is_literal_zero() {
        return Ok(ZeroVerdict::SymbolicZero);
    }
    let vars: Vec<String> = s.free_vars().into_iter().collect();
    let samples = cfg.samples.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut budget = samples.saturating_mul(10).max(20);
    let mut attempts = 0usize;

    // With no free variables one evaluation settles it.
    let rounds = if vars.is_empty() { 1 } else { samples };
    for _ in 0..rounds {
        loop {
            let binding: Binding = vars
                .iter()
                .map(|v| {
                    let (lo, hi) = cfg.interval(v);
                    (v.clone(), rng.gen_range(lo..=hi))
                })
                .collect();
            match s.eval(&binding) {
                Ok(v) => {
                    if v.abs() >= cfg.tol {
                        return Ok(ZeroVerdict::NonZero(binding));
                    }
                    break;
                }
                Err(err) => {
                    attempts += 1;
                    if budget == 0 {
                        return Err(ZeroTestError::Sampling {
                            attempts,
                            last: err,
                        });
                    }
                    budget -= 1;
                }
            }
        }
    }
    Ok(ZeroVerdict::NumericZero)
}

/// Equality as vanishing of the difference.
pub fn exprs_equal(a: &Expr, b: &Expr, cfg: &ZeroConfig) -> Result<ZeroVerdict, ZeroTestError> {
    is_zero(&Expr::Sub(Box::new(a.clone()), Box::new(b.clone())), cfg)
}
