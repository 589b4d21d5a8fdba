use std::collections::BTreeSet;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact rational number used for every constant in the kernel.
pub type Rational = BigRational;

/// Interned-ish symbol name. Ordering is plain lexicographic on the name.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(name: &str) -> Self {
        Symbol(Arc::from(name))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Symbol {
    fn from(s: &str) -> Self {
        Symbol::new(s)
    }
}

/// Node of an expression tree.
///
/// The derived ordering is the fixed total order used to sort sums,
/// products and monomials in canonical form.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Node {
    Num(Rational),
    Sym(Symbol),
    Apply(Symbol, Vec<Expr>),
    Pow(Expr, Expr),
    Mul(Vec<Expr>),
    Add(Vec<Expr>),
}

/// Immutable, cheaply clonable symbolic expression.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Expr(Arc<Node>);

impl Expr {
    pub fn from_node(node: Node) -> Self {
        Expr(Arc::new(node))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn int(v: i64) -> Self {
        Expr::num(Rational::from_integer(BigInt::from(v)))
    }

    pub fn rational(numer: i64, denom: i64) -> Self {
        Expr::num(Rational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    pub fn num(v: Rational) -> Self {
        Expr::from_node(Node::Num(v))
    }

    pub fn zero() -> Self {
        Expr::int(0)
    }

    pub fn one() -> Self {
        Expr::int(1)
    }

    pub fn sym(name: &str) -> Self {
        Expr::from_node(Node::Sym(Symbol::new(name)))
    }

    pub fn symbol(s: &Symbol) -> Self {
        Expr::from_node(Node::Sym(s.clone()))
    }

    pub fn apply(name: &str, args: Vec<Expr>) -> Self {
        Expr::from_node(Node::Apply(Symbol::new(name), args))
    }

    pub fn apply_sym(name: &Symbol, args: Vec<Expr>) -> Self {
        Expr::from_node(Node::Apply(name.clone(), args))
    }

    pub fn pow(&self, exponent: impl Into<Expr>) -> Self {
        Expr::from_node(Node::Pow(self.clone(), exponent.into()))
    }

    pub fn powi(&self, k: i64) -> Self {
        self.pow(Expr::int(k))
    }

    pub fn recip(&self) -> Self {
        self.powi(-1)
    }

    pub fn sum(terms: Vec<Expr>) -> Self {
        match terms.len() {
            0 => Expr::zero(),
            1 => terms.into_iter().next().unwrap(),
            _ => Expr::from_node(Node::Add(terms)),
        }
    }

    pub fn product(factors: Vec<Expr>) -> Self {
        match factors.len() {
            0 => Expr::one(),
            1 => factors.into_iter().next().unwrap(),
            _ => Expr::from_node(Node::Mul(factors)),
        }
    }

    pub fn exp(&self) -> Self {
        Expr::apply("exp", vec![self.clone()])
    }

    pub fn ln(&self) -> Self {
        Expr::apply("ln", vec![self.clone()])
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        match self.node() {
            Node::Num(q) => Some(q),
            _ => None,
        }
    }

    pub fn as_symbol(&self) -> Option<&Symbol> {
        match self.node() {
            Node::Sym(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_integer(&self) -> Option<i64> {
        self.as_rational().filter(|q| q.is_integer()).and_then(|q| q.to_integer().to_i64())
    }

    /// Structural zero test. Only meaningful on normalized expressions.
    pub fn is_zero_literal(&self) -> bool {
        matches!(self.node(), Node::Num(q) if q.is_zero())
    }

    pub fn is_one_literal(&self) -> bool {
        matches!(self.node(), Node::Num(q) if q.is_one())
    }

    pub fn is_negative_literal(&self) -> bool {
        matches!(self.node(), Node::Num(q) if q.is_negative())
    }

    /// Every symbol occurring in the tree, including function names.
    pub fn symbols(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out, true);
        out
    }

    /// Symbols in value position only (function names excluded).
    pub fn free_symbols(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out, false);
        out
    }

    /// Names of applied functions.
    pub fn functions(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.walk(&mut |e| {
            if let Node::Apply(f, _) = e.node() {
                out.insert(f.clone());
            }
        });
        out
    }

    fn collect_symbols(&self, out: &mut BTreeSet<Symbol>, with_functions: bool) {
        self.walk(&mut |e| match e.node() {
            Node::Sym(s) => {
                out.insert(s.clone());
            }
            Node::Apply(f, _) if with_functions => {
                out.insert(f.clone());
            }
            _ => {}
        });
    }

    /// Pre-order traversal.
    pub fn walk(&self, visit: &mut impl FnMut(&Expr)) {
        visit(self);
        match self.node() {
            Node::Num(_) | Node::Sym(_) => {}
            Node::Apply(_, args) => args.iter().for_each(|a| a.walk(visit)),
            Node::Pow(b, e) => {
                b.walk(visit);
                e.walk(visit);
            }
            Node::Mul(xs) | Node::Add(xs) => xs.iter().for_each(|x| x.walk(visit)),
        }
    }

    pub fn contains_symbol(&self, s: &Symbol) -> bool {
        let mut found = false;
        self.walk(&mut |e| {
            if let Node::Sym(x) = e.node() {
                if x == s {
                    found = true;
                }
            }
        });
        found
    }

    /// Top-level summands (a non-sum is its own single term).
    pub fn terms(&self) -> Vec<Expr> {
        match self.node() {
            Node::Add(xs) => xs.clone(),
            _ if self.is_zero_literal() => Vec::new(),
            _ => vec![self.clone()],
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        let mut n = 0;
        self.walk(&mut |_| n += 1);
        n
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl From<i64> for Expr {
    fn from(v: i64) -> Self {
        Expr::int(v)
    }
}

impl From<Rational> for Expr {
    fn from(v: Rational) -> Self {
        Expr::num(v)
    }
}

impl From<&Expr> for Expr {
    fn from(v: &Expr) -> Self {
        v.clone()
    }
}

impl From<&Symbol> for Expr {
    fn from(s: &Symbol) -> Self {
        Expr::symbol(s)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $body:expr) => {
        impl $trait<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self, rhs)
            }
        }
        impl $trait<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self, rhs.clone())
            }
        }
        impl $trait<Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self.clone(), rhs)
            }
        }
        impl $trait<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self.clone(), rhs.clone())
            }
        }
        impl $trait<i64> for Expr {
            type Output = Expr;
            fn $method(self, rhs: i64) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self, Expr::int(rhs))
            }
        }
        impl $trait<i64> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: i64) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self.clone(), Expr::int(rhs))
            }
        }
    };
}

binop!(Add, add, |a, b| Expr::sum(vec![a, b]));
binop!(Sub, sub, |a, b| Expr::sum(vec![a, Expr::product(vec![Expr::int(-1), b])]));
binop!(Mul, mul, |a, b| Expr::product(vec![a, b]));
binop!(Div, div, |a, b| Expr::product(vec![a, b.recip()]));

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::product(vec![Expr::int(-1), self])
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -(self.clone())
    }
}
