//! Seeded random expression generators for property tests and oracles.

use rand::Rng;

use super::expr::{Expr, Symbol};

/// Shape parameters for [`random_expr`].
#[derive(Clone, Debug)]
pub struct ExprShape {
    pub symbols: Vec<Symbol>,
    /// Unary arbitrary functions that may be applied.
    pub functions: Vec<Symbol>,
    pub max_depth: u32,
    /// Allow `exp`, `sin`, `cos`.
    pub builtins: bool,
    /// Allow negative integer exponents.
    pub reciprocals: bool,
}

impl ExprShape {
    pub fn polynomial(symbols: &[&str], max_depth: u32) -> Self {
        ExprShape {
            symbols: symbols.iter().map(|s| Symbol::new(s)).collect(),
            functions: Vec::new(),
            max_depth,
            builtins: false,
            reciprocals: false,
        }
    }

    pub fn with_functions(mut self, functions: &[&str]) -> Self {
        self.functions = functions.iter().map(|s| Symbol::new(s)).collect();
        self
    }

    pub fn with_builtins(mut self) -> Self {
        self.builtins = true;
        self
    }

    pub fn with_reciprocals(mut self) -> Self {
        self.reciprocals = true;
        self
    }
}

pub fn random_constant(rng: &mut impl Rng) -> Expr {
    let p = rng.gen_range(-5i64..=5);
    if rng.gen_bool(0.25) {
        Expr::rational(p, rng.gen_range(2i64..=4))
    } else {
        Expr::int(p)
    }
}

fn leaf(shape: &ExprShape, rng: &mut impl Rng) -> Expr {
    if shape.symbols.is_empty() || rng.gen_bool(0.3) {
        random_constant(rng)
    } else {
        Expr::symbol(&shape.symbols[rng.gen_range(0..shape.symbols.len())])
    }
}

/// Random raw (unnormalized) expression tree.
pub fn random_expr(shape: &ExprShape, rng: &mut impl Rng) -> Expr {
    random_at(shape, shape.max_depth, rng)
}

fn random_at(shape: &ExprShape, depth: u32, rng: &mut impl Rng) -> Expr {
    if depth == 0 {
        return leaf(shape, rng);
    }
    let sub = |rng: &mut _| random_at(shape, depth - 1, rng);
    match rng.gen_range(0..10) {
        0 | 1 => leaf(shape, rng),
        2 | 3 => {
            let k = rng.gen_range(2..=3);
            Expr::sum((0..k).map(|_| sub(rng)).collect())
        }
        4 | 5 => {
            let k = rng.gen_range(2..=3);
            Expr::product((0..k).map(|_| sub(rng)).collect())
        }
        6 => {
            let lo = if shape.reciprocals { -2 } else { 0 };
            let base = sub(rng);
            // keep reciprocals away from possibly vanishing constants
            if lo < 0 && base.as_rational().is_some() {
                return base;
            }
            base.powi(rng.gen_range(lo..=3))
        }
        7 if !shape.functions.is_empty() => {
            let f = &shape.functions[rng.gen_range(0..shape.functions.len())];
            Expr::apply_sym(f, vec![sub(rng)])
        }
        8 if shape.builtins => {
            let name = ["exp", "sin", "cos"][rng.gen_range(0..3)];
            Expr::apply(name, vec![sub(rng)])
        }
        _ => Expr::sum(vec![sub(rng), leaf(shape, rng)]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generation_is_seeded() {
        let shape = ExprShape::polynomial(&["x", "y"], 4);
        let a = random_expr(&shape, &mut ChaCha8Rng::seed_from_u64(3));
        let b = random_expr(&shape, &mut ChaCha8Rng::seed_from_u64(3));
        assert_eq!(a, b);
    }
}
