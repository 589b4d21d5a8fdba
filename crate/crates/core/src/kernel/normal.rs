//! Canonical normal form.
//!
//! An expression is normalized into a sum of monomials with exact rational
//! coefficients. A monomial maps each *base* (symbol, function application,
//! multi-term sum, or rational constant under a non-integer power) to a
//! normalized exponent. Products are expanded over sums, except that a sum
//! raised to a non-positive-integer or symbolic exponent is kept as an opaque
//! base. Two rules keep such bases canonical:
//!
//! * multiplying by a sum `S` merges into an existing `S^e` factor
//!   (`S * S^e -> S^(e+1)`) instead of distributing;
//! * after a sum is built, groups of terms whose polynomial cofactor of `S^e`
//!   is exactly divisible by `S` are folded into `S^(e+1)` ("absorption").
//!
//! Exponent rules assume positive bases: `(x^a)^b = x^(ab)` and
//! `(x*y)^p = x^p * y^p`.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::expr::{Expr, Node, Rational, Symbol};

#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord)]
struct Monomial(BTreeMap<Expr, Expr>);

#[derive(Clone, Debug, Default, PartialEq, Eq)]
struct Poly(BTreeMap<Monomial, Rational>);

/// Canonical form of `e`. Structural equality of normal forms is the kernel's equality.
pub fn normalize(e: &Expr) -> Expr {
    absorb(norm(e)).to_expr()
}

/// `normalize(a - b) == 0`.
pub fn equivalent(a: &Expr, b: &Expr) -> bool {
    normalize(&(a - b)).is_zero_literal()
}

fn is_positive_integer(e: &Expr) -> Option<u32> {
    e.as_rational().filter(|q| q.is_integer() && q.is_positive()).and_then(|q| q.to_integer().to_u32())
}

fn is_sum(e: &Expr) -> bool {
    matches!(e.node(), Node::Add(_))
}

fn rational_pow(base: &Rational, k: i64) -> Rational {
    if k >= 0 {
        num_traits::pow(base.clone(), k as usize)
    } else {
        num_traits::pow(base.recip(), (-k) as usize)
    }
}

impl Monomial {
    fn one() -> Self {
        Monomial(BTreeMap::new())
    }

    fn single(base: Expr, exponent: Expr) -> Self {
        let mut m = BTreeMap::new();
        m.insert(base, exponent);
        Monomial(m)
    }

    fn without(&self, base: &Expr) -> Monomial {
        let mut m = self.0.clone();
        m.remove(base);
        Monomial(m)
    }

    fn to_factors(&self) -> Vec<Expr> {
        self.0
            .iter()
            .map(|(b, e)| if e.is_one_literal() { b.clone() } else { Expr::from_node(Node::Pow(b.clone(), e.clone())) })
            .collect()
    }

    /// Integer exponent of symbol `x`, `Some(0)` when absent, `None` when non-integer.
    fn degree_in(&self, x: &Expr) -> Option<i64> {
        match self.0.get(x) {
            None => Some(0),
            Some(e) => e.as_integer(),
        }
    }
}

impl Poly {
    fn zero() -> Self {
        Poly(BTreeMap::new())
    }

    fn constant(q: Rational) -> Self {
        let mut p = Poly::zero();
        p.add_term(Monomial::one(), q);
        p
    }

    fn from_monomial(m: Monomial, c: Rational) -> Self {
        let mut p = Poly::zero();
        p.add_term(m, c);
        p
    }

    fn atom(base: Expr) -> Self {
        Poly::from_monomial(Monomial::single(base, Expr::one()), Rational::one())
    }

    fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        let entry = self.0.entry(m);
        match entry {
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let v = o.get().clone() + c;
                if v.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = v;
                }
            }
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    fn add_poly(&mut self, other: &Poly) {
        for (m, c) in &other.0 {
            self.add_term(m.clone(), c.clone());
        }
    }

    fn scale(&self, c: &Rational) -> Poly {
        let mut out = Poly::zero();
        for (m, k) in &self.0 {
            out.add_term(m.clone(), k * c);
        }
        out
    }

    fn has_base(&self, base: &Expr) -> bool {
        self.0.keys().any(|m| m.0.contains_key(base))
    }

    fn to_expr(&self) -> Expr {
        let terms: Vec<Expr> = self
            .0
            .iter()
            .map(|(m, c)| {
                let mut factors = m.to_factors();
                if !c.is_one() || factors.is_empty() {
                    factors.insert(0, Expr::num(c.clone()));
                }
                Expr::product(factors)
            })
            .collect();
        Expr::sum(terms)
    }

    fn canonical_expr(&self) -> Expr {
        absorb(self.clone()).to_expr()
    }
}

/// Fold constant-base factors with integer exponents into the coefficient and
/// expand sums raised to positive integer powers.
fn finalize(mut factors: BTreeMap<Expr, Expr>, coef: Rational) -> Poly {
    let mut coef = coef;
    let mut expansions = Vec::new();
    let keys: Vec<Expr> = factors.keys().cloned().collect();
    for base in keys {
        let exp = factors[&base].clone();
        if exp.is_zero_literal() {
            factors.remove(&base);
            continue;
        }
        match base.node() {
            Node::Num(c) => {
                if let Some(k) = exp.as_integer() {
                    if !(c.is_zero() && k < 0) {
                        coef *= rational_pow(c, k);
                        factors.remove(&base);
                    }
                }
            }
            Node::Add(_) => {
                if let Some(k) = is_positive_integer(&exp) {
                    factors.remove(&base);
                    expansions.push((base.clone(), k));
                }
            }
            _ => {}
        }
    }
    let mut out = Poly::from_monomial(Monomial(factors), coef);
    for (base, k) in expansions {
        let p = norm(&base);
        for _ in 0..k {
            out = mul_distribute(&out, &p);
        }
    }
    out
}

fn mul_mono(a: &Monomial, b: &Monomial, coef: Rational) -> Poly {
    let mut factors = a.0.clone();
    for (base, e) in &b.0 {
        match factors.get(base) {
            Some(ea) => {
                let s = normalize(&(ea + e));
                factors.insert(base.clone(), s);
            }
            None => {
                factors.insert(base.clone(), e.clone());
            }
        }
    }
    finalize(factors, coef)
}

fn mul_distribute(a: &Poly, b: &Poly) -> Poly {
    let mut out = Poly::zero();
    for (ma, ca) in &a.0 {
        for (mb, cb) in &b.0 {
            out.add_poly(&mul_mono(ma, mb, ca * cb));
        }
    }
    out
}

fn poly_mul_mono(p: &Poly, m: &Monomial) -> Poly {
    let mut out = Poly::zero();
    for (pm, c) in &p.0 {
        out.add_poly(&mul_mono(pm, m, c.clone()));
    }
    out
}

/// `sum * other`, merging `sum` into terms of `other` that already carry it as a base.
fn merge_sum_factor(sum_expr: &Expr, sum: &Poly, other: &Poly) -> Poly {
    let unit = Monomial::single(sum_expr.clone(), Expr::one());
    let mut out = Poly::zero();
    for (m, c) in &other.0 {
        if m.0.contains_key(sum_expr) {
            out.add_poly(&mul_mono(m, &unit, c.clone()));
        } else {
            out.add_poly(&mul_distribute(sum, &Poly::from_monomial(m.clone(), c.clone())));
        }
    }
    out
}

fn mul(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() || b.is_zero() {
        return Poly::zero();
    }
    if a.0.len() > 1 {
        let sa = a.canonical_expr();
        if b.has_base(&sa) {
            return merge_sum_factor(&sa, a, b);
        }
    }
    if b.0.len() > 1 {
        let sb = b.canonical_expr();
        if a.has_base(&sb) {
            return merge_sum_factor(&sb, b, a);
        }
    }
    mul_distribute(a, b)
}

fn pow(p: &Poly, exponent: Expr) -> Poly {
    if let Some(q) = exponent.as_rational() {
        if q.is_integer() {
            let k = match q.to_integer().to_i64() {
                Some(k) => k,
                None => return opaque_power(p, exponent),
            };
            if k == 0 {
                return Poly::constant(Rational::one());
            }
            if p.0.len() == 1 {
                let (m, c) = p.0.iter().next().unwrap();
                if c.is_zero() && k < 0 {
                    return Poly::atom(Expr::num(c.clone())).pow_atom(exponent);
                }
                let factors = m.0.iter().map(|(b, e)| (b.clone(), normalize(&(e * k)))).collect();
                return finalize(factors, rational_pow(c, k));
            }
            if p.is_zero() {
                return if k > 0 { Poly::zero() } else { Poly::atom(Expr::zero()).pow_atom(exponent) };
            }
            if k > 0 {
                let mut out = Poly::constant(Rational::one());
                for _ in 0..k {
                    out = mul(&out, p);
                }
                return out;
            }
            return opaque_power(p, exponent);
        }
    }
    if p.is_zero() {
        return match exponent.as_rational() {
            Some(q) if q.is_positive() => Poly::zero(),
            _ => Poly::atom(Expr::zero()).pow_atom(exponent),
        };
    }
    if p.0.len() == 1 {
        let (m, c) = p.0.iter().next().unwrap();
        if c.is_positive() {
            let mut factors: BTreeMap<Expr, Expr> =
                m.0.iter().map(|(b, e)| (b.clone(), normalize(&(e * &exponent)))).collect();
            if !c.is_one() {
                let base = Expr::num(c.clone());
                let e = match factors.get(&base) {
                    Some(old) => normalize(&(old + &exponent)),
                    None => exponent.clone(),
                };
                factors.insert(base, e);
            }
            return finalize(factors, Rational::one());
        }
    }
    opaque_power(p, exponent)
}

fn opaque_power(p: &Poly, exponent: Expr) -> Poly {
    Poly::from_monomial(Monomial::single(p.canonical_expr(), exponent), Rational::one())
}

impl Poly {
    /// `(atom)^exponent` for a single-atom poly built by `Poly::atom`.
    fn pow_atom(self, exponent: Expr) -> Poly {
        let (m, _) = self.0.into_iter().next().unwrap();
        let base = m.0.into_keys().next().unwrap();
        Poly::from_monomial(Monomial::single(base, exponent), Rational::one())
    }
}

fn simplify_builtin(name: &Symbol, args: &[Expr]) -> Option<Poly> {
    if args.len() != 1 {
        return None;
    }
    let a = &args[0];
    match name.name() {
        "exp" if a.is_zero_literal() => Some(Poly::constant(Rational::one())),
        "ln" if a.is_one_literal() => Some(Poly::zero()),
        "sin" if a.is_zero_literal() => Some(Poly::zero()),
        "cos" if a.is_zero_literal() => Some(Poly::constant(Rational::one())),
        _ => None,
    }
}

fn norm(e: &Expr) -> Poly {
    match e.node() {
        Node::Num(q) => Poly::constant(q.clone()),
        Node::Sym(_) => Poly::atom(e.clone()),
        Node::Add(xs) => {
            let mut out = Poly::zero();
            for x in xs {
                out.add_poly(&norm(x));
            }
            out
        }
        Node::Mul(xs) => {
            let mut parts: Vec<Poly> = xs.iter().map(norm).collect();
            // monomial factors first so sum factors can merge into their powers
            parts.sort_by_key(|p| p.0.len() > 1);
            let mut out = Poly::constant(Rational::one());
            for p in &parts {
                out = mul(&out, p);
                if out.is_zero() {
                    break;
                }
            }
            out
        }
        Node::Pow(b, x) => {
            let exponent = normalize(x);
            pow(&norm(b), exponent)
        }
        Node::Apply(f, args) => {
            let args: Vec<Expr> = args.iter().map(normalize).collect();
            if let Some(p) = simplify_builtin(f, &args) {
                return p;
            }
            Poly::atom(Expr::apply_sym(f, args))
        }
    }
}

fn symbol_bases(p: &Poly) -> BTreeSet<Expr> {
    p.0.keys()
        .flat_map(|m| m.0.iter())
        .filter(|(b, e)| matches!(b.node(), Node::Sym(_)) && is_positive_integer(e).is_some())
        .map(|(b, _)| b.clone())
        .collect()
}

/// Exact quotient `p / s` by univariate division in a variable of `s` whose
/// leading coefficient is a single monomial. `None` if not exactly divisible.
fn div_exact(p: &Poly, s: &Poly) -> Option<Poly> {
    'var: for x in symbol_bases(s) {
        let ds = s.0.keys().filter_map(|m| m.degree_in(&x)).max()?;
        if ds == 0 || s.0.keys().any(|m| m.degree_in(&x).is_none()) {
            continue;
        }
        let lead: Vec<_> = s.0.iter().filter(|(m, _)| m.degree_in(&x) == Some(ds)).collect();
        if lead.len() != 1 {
            continue;
        }
        let (lm, lc) = lead[0];
        let lm = lm.without(&x);
        let inv_lead = Monomial(lm.0.iter().map(|(b, e)| (b.clone(), normalize(&(-e)))).collect());
        let inv_coef = lc.recip();

        let mut rem = p.clone();
        let mut quotient = Poly::zero();
        for _ in 0..64 {
            if rem.is_zero() {
                return Some(quotient);
            }
            let mut dp = 0;
            for m in rem.0.keys() {
                match m.degree_in(&x) {
                    Some(d) if d >= 0 => dp = dp.max(d),
                    _ => continue 'var,
                }
            }
            if dp < ds {
                return None;
            }
            let mut step = Poly::zero();
            for (m, c) in &rem.0 {
                if m.degree_in(&x) == Some(dp) {
                    let mut rest = m.without(&x);
                    if dp > ds {
                        rest.0.insert(x.clone(), Expr::int(dp - ds));
                    }
                    step.add_poly(&mul_mono(&rest, &inv_lead, c * &inv_coef));
                }
            }
            let sub = mul_distribute(&step, s);
            rem.add_poly(&sub.scale(&-Rational::one()));
            quotient.add_poly(&step);
        }
        return None;
    }
    None
}

fn absorb(mut p: Poly) -> Poly {
    'outer: loop {
        let candidates: BTreeSet<(Expr, Expr)> =
            p.0.keys()
                .flat_map(|m| m.0.iter())
                .filter(|(b, _)| is_sum(b))
                .map(|(b, e)| (b.clone(), e.clone()))
                .collect();
        for (s, e) in candidates {
            let s_poly = norm(&s);
            let vars = symbol_bases(&s_poly);
            let mut groups: BTreeMap<Monomial, Poly> = BTreeMap::new();
            for (m, c) in &p.0 {
                if m.0.get(&s) != Some(&e) {
                    continue;
                }
                let (inner, outer) = split_rest(&m.without(&s), &vars);
                groups.entry(outer).or_default().add_term(inner, c.clone());
            }
            for (outer, cofactor) in groups {
                if cofactor.0.len() < 2 {
                    continue;
                }
                let Some(q) = div_exact(&cofactor, &s_poly) else { continue };
                let members: Vec<Monomial> =
                    p.0.keys()
                        .filter(|m| m.0.get(&s) == Some(&e) && split_rest(&m.without(&s), &vars).1 == outer)
                        .cloned()
                        .collect();
                for m in members {
                    p.0.remove(&m);
                }
                let mut bumped = outer.clone();
                bumped.0.insert(s.clone(), normalize(&(&e + 1)));
                p.add_poly(&poly_mul_mono(&q, &bumped));
                continue 'outer;
            }
        }
        return p;
    }
}

/// Split a monomial into the part polynomial in `vars` and the rest.
fn split_rest(m: &Monomial, vars: &BTreeSet<Expr>) -> (Monomial, Monomial) {
    let mut inner = BTreeMap::new();
    let mut outer = BTreeMap::new();
    for (b, e) in &m.0 {
        if vars.contains(b) && is_positive_integer(e).is_some() {
            inner.insert(b.clone(), e.clone());
        } else {
            outer.insert(b.clone(), e.clone());
        }
    }
    (Monomial(inner), Monomial(outer))
}

/// Split a normalized expression into `(coefficient, rest)` for each term.
pub fn term_parts(term: &Expr) -> (Rational, Expr) {
    match term.node() {
        Node::Num(q) => (q.clone(), Expr::one()),
        Node::Mul(xs) => match xs[0].node() {
            Node::Num(q) => (q.clone(), Expr::product(xs[1..].to_vec())),
            _ => (Rational::one(), term.clone()),
        },
        _ => (Rational::one(), term.clone()),
    }
}

/// Factors `(base, exponent)` of a normalized term, excluding the rational coefficient.
pub fn term_factors(term: &Expr) -> Vec<(Expr, Expr)> {
    let (_, rest) = term_parts(term);
    let items = match rest.node() {
        Node::Mul(xs) => xs.clone(),
        _ if rest.is_one_literal() => Vec::new(),
        _ => vec![rest.clone()],
    };
    items
        .into_iter()
        .map(|f| match f.node() {
            Node::Pow(b, e) => (b.clone(), e.clone()),
            _ => (f.clone(), Expr::one()),
        })
        .collect()
}

/// Exponents of each listed symbol in each term, grouping coefficients.
///
/// Returns `None` if some term carries a listed symbol with a non-natural exponent.
pub fn collect_by_symbols(e: &Expr, vars: &[Symbol]) -> Option<BTreeMap<Vec<u32>, Expr>> {
    let n = normalize(e);
    let mut groups: BTreeMap<Vec<u32>, Vec<Expr>> = BTreeMap::new();
    for term in n.terms() {
        let (c, _) = term_parts(&term);
        let mut degrees = vec![0u32; vars.len()];
        let mut rest = Vec::new();
        for (b, x) in term_factors(&term) {
            match b.as_symbol().and_then(|s| vars.iter().position(|v| v == s)) {
                Some(i) => degrees[i] = is_positive_integer(&x)?,
                None => rest.push(if x.is_one_literal() { b } else { b.pow(x) }),
            }
        }
        if vars.iter().any(|v| rest.iter().any(|r| r.contains_symbol(v))) {
            return None;
        }
        rest.insert(0, Expr::num(c));
        groups.entry(degrees).or_default().push(Expr::product(rest));
    }
    Some(groups.into_iter().map(|(k, v)| (k, normalize(&Expr::sum(v)))).collect())
}

/// Greatest common divisor of the integer numerators and lcm of denominators.
pub fn rational_content(coefs: &[Rational]) -> Rational {
    let mut num = BigInt::zero();
    let mut den = BigInt::one();
    for c in coefs {
        num = num.gcd(c.numer());
        den = den.lcm(c.denom());
    }
    if num.is_zero() {
        return Rational::one();
    }
    Rational::new(num, den)
}
