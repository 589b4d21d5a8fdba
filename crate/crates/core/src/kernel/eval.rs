use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::ToPrimitive;

use super::expr::{Expr, Node, Symbol};
use super::symbols::{SymbolKind, SymbolTable};
use super::KernelError;

/// Numeric implementation of a function symbol.
pub type NumFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

const FD_STEP: f64 = 1e-6;

/// Numeric bindings for [`evaluate`].
#[derive(Clone, Default)]
pub struct Env {
    pub values: BTreeMap<Symbol, f64>,
    pub functions: BTreeMap<Symbol, NumFn>,
}

impl Env {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, v: f64) -> Self {
        self.values.insert(Symbol::new(name), v);
        self
    }

    pub fn with_fn(mut self, name: &str, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        self.functions.insert(Symbol::new(name), Arc::new(f));
        self
    }

    pub fn set(&mut self, name: &Symbol, v: f64) {
        self.values.insert(name.clone(), v);
    }

    pub fn set_fn(&mut self, name: &Symbol, f: NumFn) {
        self.functions.insert(name.clone(), f);
    }
}

/// Evaluate in double precision. Derivative functions without an explicit
/// binding are computed by central differences of their parent.
pub fn evaluate(e: &Expr, env: &Env, table: &SymbolTable) -> Result<f64, KernelError> {
    let v = eval(e, env, table)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(KernelError::NonFinite)
    }
}

fn eval(e: &Expr, env: &Env, table: &SymbolTable) -> Result<f64, KernelError> {
    match e.node() {
        Node::Num(q) => Ok(q.to_f64().unwrap_or(f64::NAN)),
        Node::Sym(s) => match env.values.get(s) {
            Some(v) => Ok(*v),
            None if s.name() == "pi" => Ok(std::f64::consts::PI),
            None => Err(KernelError::Unbound(s.name().to_string())),
        },
        Node::Add(xs) => xs.iter().try_fold(0.0, |acc, x| Ok(acc + eval(x, env, table)?)),
        Node::Mul(xs) => xs.iter().try_fold(1.0, |acc, x| Ok(acc * eval(x, env, table)?)),
        Node::Pow(b, x) => {
            let base = eval(b, env, table)?;
            if let Some(k) = x.as_integer() {
                if base == 0.0 && k < 0 {
                    return Err(KernelError::DivisionByZero);
                }
                return Ok(base.powi(k as i32));
            }
            let exponent = eval(x, env, table)?;
            power(base, exponent)
        }
        Node::Apply(f, args) => {
            let xs: Vec<f64> = args.iter().map(|a| eval(a, env, table)).collect::<Result<_, _>>()?;
            call(f, &xs, env, table)
        }
    }
}

fn power(base: f64, exponent: f64) -> Result<f64, KernelError> {
    if base == 0.0 && exponent < 0.0 {
        return Err(KernelError::DivisionByZero);
    }
    if base < 0.0 && exponent.fract() != 0.0 {
        return Err(KernelError::NegativeBase { base, exponent });
    }
    Ok(base.powf(exponent))
}

fn call(f: &Symbol, xs: &[f64], env: &Env, table: &SymbolTable) -> Result<f64, KernelError> {
    if let Some(g) = env.functions.get(f) {
        return Ok(g(xs));
    }
    match (f.name(), xs) {
        ("exp", [x]) => return Ok(x.exp()),
        ("ln", [x]) => {
            if *x <= 0.0 {
                return Err(KernelError::NegativeBase { base: *x, exponent: 0.0 });
            }
            return Ok(x.ln());
        }
        ("sin", [x]) => return Ok(x.sin()),
        ("cos", [x]) => return Ok(x.cos()),
        _ => {}
    }
    if let Some(SymbolKind::ArbitraryFunction { derivative_of: Some((parent, idx)), .. }) = table.kind(f) {
        let mut hi = xs.to_vec();
        let mut lo = xs.to_vec();
        hi[idx] += FD_STEP;
        lo[idx] -= FD_STEP;
        let fh = call(&parent, &hi, env, table)?;
        let fl = call(&parent, &lo, env, table)?;
        return Ok((fh - fl) / (2.0 * FD_STEP));
    }
    Err(KernelError::Unbound(f.name().to_string()))
}
