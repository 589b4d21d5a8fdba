//! Randomized identity checks for the exterior algebra and the Lie derivative.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::forms::{exterior_d, random_form, section, wedge, DifferentialForm, SectionMap};
use crate::isovector::{lie_form, lie_scalar, Generator};
use crate::kernel::sampling::{random_expr, ExprShape};
use crate::kernel::{Expr, SymbolTable};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PropertyOutcome {
    pub name: String,
    pub trials: usize,
    pub failures: usize,
    /// First counterexample, if any.
    pub example: Option<String>,
}

impl PropertyOutcome {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

fn run(
    name: &str,
    trials: usize,
    seed: u64,
    mut check: impl FnMut(&mut ChaCha8Rng) -> Option<String>,
) -> PropertyOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0;
    let mut example = None;
    for _ in 0..trials {
        if let Some(msg) = check(&mut rng) {
            failures += 1;
            example.get_or_insert(msg);
        }
    }
    PropertyOutcome { name: name.into(), trials, failures, example }
}

fn sign(p: usize, q: usize) -> Expr {
    Expr::int(if (p * q).is_multiple_of(2) { 1 } else { -1 })
}

/// `a ^ b = (-1)^(pq) b ^ a`.
pub fn antisymmetry(trials: usize, seed: u64) -> PropertyOutcome {
    run("antisymmetry", trials, seed, |rng| {
        let (p, q) = (rng.gen_range(1..=2), rng.gen_range(1..=2));
        let (a, b) = (random_form(p, true, rng), random_form(q, true, rng));
        let lhs = wedge(&a, &b);
        let rhs = wedge(&b, &a).scale(&sign(p, q));
        (lhs != rhs).then(|| format!("a = {a}; b = {b}"))
    })
}

/// `d(d(a)) = 0` for random 0- and 1-forms.
pub fn nilpotency(trials: usize, seed: u64, table: &SymbolTable) -> PropertyOutcome {
    run("nilpotency", trials, seed, |rng| {
        let a = random_form(rng.gen_range(0..=1), false, rng);
        match exterior_d(&a, table).and_then(|da| exterior_d(&da, table)) {
            Ok(dda) if dda.is_zero() => None,
            Ok(dda) => Some(format!("a = {a}; dda = {dda}")),
            Err(e) => Some(format!("a = {a}; error {e}")),
        }
    })
}

/// `section(a ^ b) = section(a) ^ section(b)` and additivity.
pub fn section_homomorphism(trials: usize, seed: u64, table: &SymbolTable) -> PropertyOutcome {
    let map = SectionMap::standard(table).expect("standard section");
    run("section-homomorphism", trials, seed, |rng| {
        let (a, b) = (random_form(1, true, rng), random_form(1, true, rng));
        let c = random_form(1, true, rng);
        let product =
            section(&wedge(&a, &b), &map).and_then(|l| Ok((l, wedge(&section(&a, &map)?, &section(&b, &map)?))));
        let sum = section(&a.add(&c), &map).and_then(|l| Ok((l, section(&a, &map)?.add(&section(&c, &map)?))));
        match (product, sum) {
            (Ok((l1, r1)), Ok((l2, r2))) if l1 == r1 && l2 == r2 => None,
            (Ok(_), Ok(_)) => Some(format!("a = {a}; b = {b}; c = {c}")),
            (Err(e), _) | (_, Err(e)) => Some(format!("error {e}")),
        }
    })
}

fn scalar_shape() -> ExprShape {
    ExprShape::polynomial(&["t", "r", "phi", "w", "a1", "a2", "D", "Gamma", "D_r", "Gamma_t"], 3).with_builtins()
}

/// `L_chi(d f) = d(L_chi f)` for random scalars and random pinned generators.
pub fn lie_exterior_commutation(trials: usize, seed: u64, table: &SymbolTable) -> PropertyOutcome {
    let shape = scalar_shape();
    run("lie-exterior-commutation", trials, seed, |rng| {
        let f = random_expr(&shape, rng);
        let chi = (1..=8).fold(Generator::standard(), |g, i| if rng.gen_bool(0.2) { g.pin(i) } else { g });
        let lhs = exterior_d(&DifferentialForm::scalar(f.clone()), table).and_then(|df| lie_form(&chi, &df, table));
        let rhs = lie_scalar(&chi, &f, table).and_then(|lf| exterior_d(&DifferentialForm::scalar(lf), table));
        match (lhs, rhs) {
            (Ok(l), Ok(r)) if l == r => None,
            (Ok(_), Ok(_)) => Some(format!("f = {f}")),
            (Err(e), _) | (_, Err(e)) => Some(format!("f = {f}; error {e}")),
        }
    })
}

/// `L_chi(a + b) = L_chi a + L_chi b` for random 2-forms.
pub fn lie_linearity(trials: usize, seed: u64, table: &SymbolTable) -> PropertyOutcome {
    let chi = Generator::standard();
    run("lie-linearity", trials, seed, |rng| {
        let (a, b) = (random_form(2, false, rng), random_form(2, false, rng));
        let l = lie_form(&chi, &a.add(&b), table);
        let r = lie_form(&chi, &a, table).and_then(|la| Ok(la.add(&lie_form(&chi, &b, table)?)));
        match (l, r) {
            (Ok(l), Ok(r)) if l == r => None,
            (Ok(_), Ok(_)) => Some(format!("a = {a}; b = {b}")),
            (Err(e), _) | (_, Err(e)) => Some(format!("error {e}")),
        }
    })
}

/// The exterior-algebra suite at the requested trial count.
pub fn exterior_suite(trials: usize, seed: u64, table: &SymbolTable) -> Vec<PropertyOutcome> {
    vec![
        antisymmetry(trials, seed),
        nilpotency(trials, seed.wrapping_add(1), table),
        section_homomorphism(trials, seed.wrapping_add(2), table),
        lie_exterior_commutation(trials, seed.wrapping_add(3), table),
    ]
}
