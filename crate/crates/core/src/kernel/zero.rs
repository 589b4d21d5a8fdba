use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::eval::{evaluate, Env};
use super::expr::{Expr, Symbol};
use super::normal::normalize;
use super::symbols::{SymbolKind, SymbolTable};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ZeroVerdict {
    Zero,
    Nonzero,
    /// Vanished at every sample point without normalizing to 0.
    Unknown,
}

#[derive(Clone, Debug)]
pub struct ZeroConfig {
    pub samples: usize,
    pub seed: u64,
    /// Resamples per point after an evaluation error.
    pub retries: usize,
    /// A sample counts as nonzero when |sum| exceeds this times the sum of |terms|.
    pub rel_tol: f64,
}

impl Default for ZeroConfig {
    fn default() -> Self {
        ZeroConfig { samples: 32, seed: 0, retries: 16, rel_tol: 1e-8 }
    }
}

pub fn is_zero(e: &Expr, table: &SymbolTable) -> ZeroVerdict {
    is_zero_with(e, table, &ZeroConfig::default())
}

/// Structural zero after normalization, else randomized evaluation. A numeric
/// agreement with zero is reported as `Unknown`, never as `Zero`.
pub fn is_zero_with(e: &Expr, table: &SymbolTable, cfg: &ZeroConfig) -> ZeroVerdict {
    let n = normalize(e);
    if n.is_zero_literal() {
        return ZeroVerdict::Zero;
    }
    let terms = n.terms();
    let symbols: Vec<Symbol> =
        n.free_symbols().into_iter().filter(|s| !matches!(table.kind(s), Some(SymbolKind::NamedConstant))).collect();
    let functions: Vec<Symbol> = n
        .functions()
        .into_iter()
        .filter(|f| matches!(table.kind(f), Some(SymbolKind::ArbitraryFunction { .. })))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..cfg.samples {
        let mut evaluated = None;
        for _ in 0..=cfg.retries {
            let env = sample_env(&symbols, &functions, table, &mut rng);
            let vals: Result<Vec<f64>, _> = terms.iter().map(|t| evaluate(t, &env, table)).collect();
            if let Ok(vals) = vals {
                evaluated = Some(vals);
                break;
            }
        }
        let Some(vals) = evaluated else { return ZeroVerdict::Unknown };
        let sum: f64 = vals.iter().sum();
        let scale: f64 = vals.iter().map(|v| v.abs()).sum();
        if scale > 0.0 && sum.abs() > cfg.rel_tol * scale {
            return ZeroVerdict::Nonzero;
        }
    }
    ZeroVerdict::Unknown
}

/// Dyadic rational in [1/4, 2].
fn sample_value(rng: &mut impl Rng) -> f64 {
    rng.gen_range(16..=128) as f64 / 64.0
}

fn sample_env(symbols: &[Symbol], functions: &[Symbol], table: &SymbolTable, rng: &mut impl Rng) -> Env {
    let mut env = Env::new();
    for s in symbols {
        env.set(s, sample_value(rng));
    }
    let mut roots: BTreeMap<Symbol, PolyFn> = BTreeMap::new();
    for f in functions {
        let (root, chain) = root_of(f, table);
        let arity = match table.kind(&root) {
            Some(SymbolKind::ArbitraryFunction { arity, .. }) => arity,
            _ => continue,
        };
        let base = roots.entry(root).or_insert_with(|| PolyFn::random(arity, rng)).clone();
        let d = chain.iter().fold(base, |p, &i| p.derivative(i));
        env.set_fn(f, Arc::new(move |xs: &[f64]| d.eval(xs)));
    }
    env
}

fn root_of(f: &Symbol, table: &SymbolTable) -> (Symbol, Vec<usize>) {
    let mut chain = Vec::new();
    let mut cur = f.clone();
    while let Some(SymbolKind::ArbitraryFunction { derivative_of: Some((parent, idx)), .. }) = table.kind(&cur) {
        chain.push(idx);
        cur = parent;
    }
    chain.reverse();
    (cur, chain)
}

/// Multivariate polynomial of degree at most three per variable, used to
/// sample arbitrary functions with mutually consistent derivatives.
#[derive(Clone, Debug)]
pub struct PolyFn {
    terms: Vec<(Vec<u32>, f64)>,
}

impl PolyFn {
    pub fn random(arity: usize, rng: &mut impl Rng) -> Self {
        let mut terms = Vec::new();
        terms.push((vec![0; arity], rng.gen_range(-1.0..1.0)));
        for i in 0..arity {
            for d in 1..=3 {
                let mut m = vec![0; arity];
                m[i] = d;
                terms.push((m, rng.gen_range(-1.0..1.0)));
            }
        }
        if arity > 1 {
            terms.push((vec![1; arity], rng.gen_range(-1.0..1.0)));
        }
        PolyFn { terms }
    }

    pub fn derivative(&self, i: usize) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|(m, _)| m[i] > 0)
            .map(|(m, c)| {
                let mut m2 = m.clone();
                m2[i] -= 1;
                (m2, c * m[i] as f64)
            })
            .collect();
        PolyFn { terms }
    }

    pub fn eval(&self, xs: &[f64]) -> f64 {
        self.terms.iter().map(|(m, c)| c * m.iter().zip(xs).map(|(&k, &x)| x.powi(k as i32)).product::<f64>()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::parse::{parse, ParseMode};
    use crate::kernel::subst::{substitute, Bindings};

    #[test]
    fn constraint_identity_is_zero() {
        let t = SymbolTable::standard();
        let e = parse("a7 + w*(a8 + a2 - a6)", &t, ParseMode::Strict).unwrap();
        let b =
            Bindings::new().scalar("a7", Expr::zero()).scalar("a8", parse("a6 - a2", &t, ParseMode::Strict).unwrap());
        let s = substitute(&e, &b, &t).unwrap();
        assert_eq!(is_zero(&s, &t), ZeroVerdict::Zero);
    }

    #[test]
    fn generic_product_is_nonzero() {
        let t = SymbolTable::standard();
        let e = parse("a4*Gamma", &t, ParseMode::Strict).unwrap();
        assert_eq!(is_zero(&e, &t), ZeroVerdict::Nonzero);
    }

    #[test]
    fn numeric_zero_is_unknown() {
        let t = SymbolTable::standard();
        // sin^2 + cos^2 - 1 has no structural simplification in the kernel
        let e = parse("sin(r)^2 + cos(r)^2 - 1", &t, ParseMode::Strict).unwrap();
        assert_eq!(is_zero(&e, &t), ZeroVerdict::Unknown);
    }

    #[test]
    fn arbitrary_functions_sampled_consistently() {
        let t = SymbolTable::standard();
        let e = parse("G'(r) - G'(r)*1", &t, ParseMode::Strict).unwrap();
        assert_eq!(is_zero(&e, &t), ZeroVerdict::Zero);
        let e = parse("G'(r) - G(r)", &t, ParseMode::Strict).unwrap();
        assert_eq!(is_zero(&e, &t), ZeroVerdict::Nonzero);
    }
}
