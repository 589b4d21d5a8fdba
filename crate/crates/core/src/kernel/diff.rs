use super::expr::{Expr, Node, Symbol};
use super::normal::normalize;
use super::symbols::{SymbolKind, SymbolTable, BASE_VARIABLES};
use super::KernelError;

/// `∂e/∂var` for a base variable (r or t). Fields become jets (`D -> D_r`);
/// the manifold coordinates phi and w are independent of r and t here.
pub fn differentiate(e: &Expr, var: &Symbol, table: &SymbolTable) -> Result<Expr, KernelError> {
    if !BASE_VARIABLES.contains(&var.name()) {
        return Err(KernelError::UnsupportedVariable(var.name().to_string()));
    }
    for s in e.symbols() {
        if !table.contains(&s) {
            return Err(KernelError::UnknownSymbol(s.name().to_string()));
        }
    }
    partial(e, var, table)
}

/// Partial derivative with respect to any symbol. Symbols missing from the
/// table are treated as constants (lambda parameters, fresh test symbols).
pub fn partial(e: &Expr, var: &Symbol, table: &SymbolTable) -> Result<Expr, KernelError> {
    Ok(normalize(&raw(e, var, table, true)?))
}

/// Partial derivative treating every symbol, fields and jets included, as an
/// independent variable (no `D -> D_r` chain).
pub fn partial_symbol(e: &Expr, var: &Symbol, table: &SymbolTable) -> Result<Expr, KernelError> {
    Ok(normalize(&raw(e, var, table, false)?))
}

fn jet_step(var: &Symbol) -> Option<(u32, u32)> {
    match var.name() {
        "r" => Some((1, 0)),
        "t" => Some((0, 1)),
        _ => None,
    }
}

fn raw(e: &Expr, var: &Symbol, table: &SymbolTable, jets: bool) -> Result<Expr, KernelError> {
    Ok(match e.node() {
        Node::Num(_) => Expr::zero(),
        Node::Sym(s) if s == var => Expr::one(),
        Node::Sym(_) if !jets => Expr::zero(),
        Node::Sym(s) => match (table.kind(s), jet_step(var)) {
            (Some(SymbolKind::Field), Some((dr, dt))) | (Some(SymbolKind::Jet { .. }), Some((dr, dt))) => {
                Expr::symbol(&table.jet(s, dr, dt)?)
            }
            _ => Expr::zero(),
        },
        Node::Add(xs) => Expr::sum(xs.iter().map(|x| raw(x, var, table, jets)).collect::<Result<_, _>>()?),
        Node::Mul(xs) => {
            let mut terms = Vec::new();
            for i in 0..xs.len() {
                let di = raw(&xs[i], var, table, jets)?;
                if di.is_zero_literal() {
                    continue;
                }
                let mut factors = xs.clone();
                factors[i] = di;
                terms.push(Expr::product(factors));
            }
            Expr::sum(terms)
        }
        Node::Pow(b, x) => {
            let db = raw(b, var, table, jets)?;
            if !x.contains_symbol(var) && !(jets && depends_via_jets(x, var, table)) {
                if db.is_zero_literal() {
                    return Ok(Expr::zero());
                }
                Expr::product(vec![x.clone(), b.pow(x - 1), db])
            } else {
                let dx = raw(x, var, table, jets)?;
                e * (dx * b.ln() + x * db / b)
            }
        }
        Node::Apply(f, args) => apply_rule(f, args, var, table, jets)?,
    })
}

fn depends_via_jets(e: &Expr, var: &Symbol, table: &SymbolTable) -> bool {
    jet_step(var).is_some() && e.free_symbols().iter().any(|s| table.depends_on_base(s))
}

fn apply_rule(f: &Symbol, args: &[Expr], var: &Symbol, table: &SymbolTable, jets: bool) -> Result<Expr, KernelError> {
    let mut terms = Vec::new();
    for (i, a) in args.iter().enumerate() {
        let da = raw(a, var, table, jets)?;
        if da.is_zero_literal() {
            continue;
        }
        let outer = match (f.name(), args.len()) {
            ("exp", 1) => Expr::apply("exp", args.to_vec()),
            ("ln", 1) => a.recip(),
            ("sin", 1) => Expr::apply("cos", args.to_vec()),
            ("cos", 1) => -Expr::apply("sin", args.to_vec()),
            _ => {
                let df = table.function_derivative(f, i)?;
                Expr::apply_sym(&df, args.to_vec())
            }
        };
        terms.push(outer * da);
    }
    Ok(Expr::sum(terms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::parse::{parse, ParseMode};

    fn p(s: &str, t: &SymbolTable) -> Expr {
        parse(s, t, ParseMode::Strict).unwrap()
    }

    #[test]
    fn field_becomes_jet() {
        let t = SymbolTable::standard();
        let r = Symbol::new("r");
        assert_eq!(differentiate(&p("D", &t), &r, &t).unwrap(), p("D_r", &t));
        assert_eq!(differentiate(&p("D_r", &t), &Symbol::new("t"), &t).unwrap(), p("D_rt", &t));
    }

    #[test]
    fn linear_rule_and_independent_coordinates() {
        let t = SymbolTable::standard();
        let r = Symbol::new("r");
        assert_eq!(differentiate(&p("a1 + a2*r", &t), &r, &t).unwrap(), Expr::sym("a2"));
        assert!(differentiate(&p("phi*w", &t), &r, &t).unwrap().is_zero_literal());
    }

    #[test]
    fn only_base_variables() {
        let t = SymbolTable::standard();
        let err = differentiate(&Expr::sym("r"), &Symbol::new("phi"), &t).unwrap_err();
        assert_eq!(err, KernelError::UnsupportedVariable("phi".into()));
        let err = differentiate(&Expr::sym("zz"), &Symbol::new("r"), &t).unwrap_err();
        assert_eq!(err, KernelError::UnknownSymbol("zz".into()));
    }

    #[test]
    fn chain_rule_registers_derivative_symbol() {
        let t = SymbolTable::standard();
        let e = p("G(r^2)", &t);
        let d = differentiate(&e, &Symbol::new("r"), &t).unwrap();
        assert_eq!(d, p("2*r*G'(r^2)", &t));
    }

    #[test]
    fn symbolic_exponent() {
        let t = SymbolTable::standard();
        let e = p("(a3 + a4*t)^(2*a2/a4 - 1)", &t);
        let d = differentiate(&e, &Symbol::new("t"), &t).unwrap();
        let expected = p("(2*a2 - a4)*(a3 + a4*t)^(2*a2/a4 - 2)", &t);
        assert_eq!(d, expected);
    }
}
