use std::collections::BTreeMap;

use super::diff::partial;
use super::expr::{Expr, Node, Symbol};
use super::normal::normalize;
use super::symbols::{SymbolKind, SymbolTable};
use super::KernelError;

/// Function binding `f(params) := body`.
#[derive(Clone, Debug, PartialEq)]
pub struct Lambda {
    pub params: Vec<Symbol>,
    pub body: Expr,
}

impl Lambda {
    pub fn new(params: &[&str], body: Expr) -> Self {
        Lambda { params: params.iter().map(|p| Symbol::new(p)).collect(), body }
    }
}

/// Simultaneous substitution: symbols to expressions and functions to lambdas.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Bindings {
    pub scalars: BTreeMap<Symbol, Expr>,
    pub functions: BTreeMap<Symbol, Lambda>,
}

impl Bindings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn scalar(mut self, name: &str, value: Expr) -> Self {
        self.scalars.insert(Symbol::new(name), value);
        self
    }

    pub fn function(mut self, name: &str, lambda: Lambda) -> Self {
        self.functions.insert(Symbol::new(name), lambda);
        self
    }

    pub fn is_empty(&self) -> bool {
        self.scalars.is_empty() && self.functions.is_empty()
    }
}

/// Replace every bound symbol simultaneously and normalize. Jets of a bound
/// field are replaced by the matching derivatives of its replacement, and
/// derivative functions (`G'`) of a bound function by derivatives of the lambda.
pub fn substitute(e: &Expr, b: &Bindings, table: &SymbolTable) -> Result<Expr, KernelError> {
    Ok(normalize(&walk(e, b, table)?))
}

fn walk(e: &Expr, b: &Bindings, table: &SymbolTable) -> Result<Expr, KernelError> {
    Ok(match e.node() {
        Node::Num(_) => e.clone(),
        Node::Sym(s) => {
            if let Some(v) = b.scalars.get(s) {
                return Ok(v.clone());
            }
            if let Some(SymbolKind::Jet { base, r_order, t_order }) = table.kind(s) {
                if let Some(v) = b.scalars.get(&base) {
                    return jet_of(v, r_order, t_order, table);
                }
            }
            e.clone()
        }
        Node::Add(xs) => Expr::sum(xs.iter().map(|x| walk(x, b, table)).collect::<Result<_, _>>()?),
        Node::Mul(xs) => Expr::product(xs.iter().map(|x| walk(x, b, table)).collect::<Result<_, _>>()?),
        Node::Pow(base, x) => walk(base, b, table)?.pow(walk(x, b, table)?),
        Node::Apply(f, args) => {
            let args: Vec<Expr> = args.iter().map(|a| walk(a, b, table)).collect::<Result<_, _>>()?;
            match resolve_function(f, b, table)? {
                Some((lambda, chain)) => apply_lambda(f, lambda, &chain, &args, table)?,
                None => Expr::apply_sym(f, args),
            }
        }
    })
}

fn jet_of(v: &Expr, r: u32, t: u32, table: &SymbolTable) -> Result<Expr, KernelError> {
    let (rs, ts) = (Symbol::new("r"), Symbol::new("t"));
    let mut out = v.clone();
    for _ in 0..r {
        out = partial(&out, &rs, table)?;
    }
    for _ in 0..t {
        out = partial(&out, &ts, table)?;
    }
    Ok(out)
}

/// Follow `derivative_of` links to a bound root function, returning the lambda
/// and the argument indices differentiated along the way (outermost last).
fn resolve_function<'b>(
    f: &Symbol,
    b: &'b Bindings,
    table: &SymbolTable,
) -> Result<Option<(&'b Lambda, Vec<usize>)>, KernelError> {
    let mut chain = Vec::new();
    let mut cur = f.clone();
    loop {
        if let Some(l) = b.functions.get(&cur) {
            chain.reverse();
            return Ok(Some((l, chain)));
        }
        match table.kind(&cur) {
            Some(SymbolKind::ArbitraryFunction { derivative_of: Some((parent, idx)), .. }) => {
                chain.push(idx);
                cur = parent;
            }
            _ => return Ok(None),
        }
    }
}

fn apply_lambda(
    f: &Symbol,
    lambda: &Lambda,
    chain: &[usize],
    args: &[Expr],
    table: &SymbolTable,
) -> Result<Expr, KernelError> {
    if lambda.params.len() != args.len() {
        return Err(KernelError::ArityMismatch {
            name: f.name().to_string(),
            expected: lambda.params.len(),
            found: args.len(),
        });
    }
    let mut body = lambda.body.clone();
    for &i in chain {
        body = partial(&body, &lambda.params[i], table)?;
    }
    let mut inner = Bindings::new();
    for (p, a) in lambda.params.iter().zip(args) {
        inner.scalars.insert(p.clone(), a.clone());
    }
    walk(&body, &inner, table)
}
