//! Deterministic printer. Output is valid input for [`super::parse`].

use std::fmt;

use num_traits::{One, Signed};

use super::expr::{Expr, Node, Rational};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Prec {
    Sum = 1,
    Product = 2,
    Unary = 3,
    Power = 4,
    Atom = 5,
}

fn precedence(e: &Expr) -> Prec {
    match e.node() {
        Node::Add(_) => Prec::Sum,
        Node::Mul(xs) if xs.first().is_some_and(is_negative_coefficient) => Prec::Unary,
        Node::Mul(_) => Prec::Product,
        Node::Num(q) if q.is_negative() => Prec::Unary,
        Node::Num(q) if !q.is_integer() => Prec::Product,
        Node::Pow(..) => Prec::Power,
        Node::Num(_) | Node::Sym(_) | Node::Apply(..) => Prec::Atom,
    }
}

fn is_negative_coefficient(e: &Expr) -> bool {
    e.is_negative_literal()
}

fn write_rational(f: &mut fmt::Formatter<'_>, q: &Rational) -> fmt::Result {
    if q.is_integer() {
        write!(f, "{}", q.numer())
    } else {
        write!(f, "{}/{}", q.numer(), q.denom())
    }
}

fn write_wrapped(f: &mut fmt::Formatter<'_>, e: &Expr, min: Prec) -> fmt::Result {
    if precedence(e) < min {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

/// Write a product whose leading rational coefficient (if any) has already been
/// stripped of its sign.
fn write_product(f: &mut fmt::Formatter<'_>, xs: &[Expr]) -> fmt::Result {
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            f.write_str("*")?;
        }
        match x.node() {
            // a fraction is fine up front ("3/7*x") but not after a factor ("x*(3/7)")
            Node::Num(q) if i == 0 && !q.is_negative() => write_rational(f, q)?,
            _ => write_wrapped(f, x, if i == 0 { Prec::Product } else { Prec::Power })?,
        }
    }
    Ok(())
}

/// Split a term into (is_negative, absolute-value factors) for printing inside sums.
fn negated_parts(e: &Expr) -> Option<Vec<Expr>> {
    match e.node() {
        Node::Num(q) if q.is_negative() => Some(vec![Expr::num(-q.clone())]),
        Node::Mul(xs) => match xs[0].node() {
            Node::Num(q) if q.is_negative() => {
                let abs = -q.clone();
                let mut rest = Vec::with_capacity(xs.len());
                if !abs.is_one() {
                    rest.push(Expr::num(abs));
                }
                rest.extend(xs[1..].iter().cloned());
                Some(rest)
            }
            _ => None,
        },
        _ => None,
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Num(q) => write_rational(f, q),
            Node::Sym(s) => write!(f, "{s}"),
            Node::Apply(name, args) => {
                write!(f, "{name}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
            Node::Pow(b, e) => {
                match b.node() {
                    Node::Num(q) if q.is_integer() && !q.is_negative() => write_rational(f, q)?,
                    _ => write_wrapped(f, b, Prec::Atom)?,
                }
                f.write_str("^")?;
                match e.node() {
                    Node::Num(q) if q.is_integer() && !q.is_negative() => write_rational(f, q),
                    Node::Sym(_) | Node::Apply(..) => write!(f, "{e}"),
                    _ => write!(f, "({e})"),
                }
            }
            Node::Mul(xs) => match negated_parts(self) {
                Some(rest) if rest.is_empty() => f.write_str("-1"),
                Some(rest) => {
                    f.write_str("-")?;
                    write_product(f, &rest)
                }
                None => write_product(f, xs),
            },
            Node::Add(xs) => {
                for (i, x) in xs.iter().enumerate() {
                    match negated_parts(x) {
                        Some(rest) => {
                            f.write_str(if i == 0 { "-" } else { " - " })?;
                            if rest.is_empty() {
                                f.write_str("1")?;
                            } else {
                                let abs = Expr::product(rest);
                                write_wrapped(f, &abs, Prec::Product)?;
                            }
                        }
                        None => {
                            if i > 0 {
                                f.write_str(" + ")?;
                            }
                            write_wrapped(f, x, Prec::Product)?;
                        }
                    }
                }
                Ok(())
            }
        }
    }
}
