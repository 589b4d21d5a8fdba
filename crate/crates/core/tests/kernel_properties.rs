use ndsym_core::kernel::sampling::{random_expr, ExprShape};
use ndsym_core::kernel::{
    differentiate, evaluate, is_zero, normalize, parse, parse_raw, partial, substitute, Bindings, Env, Expr, ParseMode,
    Symbol, SymbolTable, ZeroVerdict,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn field_shape() -> ExprShape {
    ExprShape::polynomial(&["r", "t", "a1", "a2", "D", "Gamma", "D_r"], 3).with_functions(&["G"]).with_builtins()
}

#[test]
fn normalize_is_idempotent() {
    let shape = ExprShape::polynomial(&["x", "y", "z"], 4).with_functions(&["G"]).with_reciprocals();
    let mut g = rng(1);
    for _ in 0..1000 {
        let n = normalize(&random_expr(&shape, &mut g));
        assert_eq!(normalize(&n), n, "not idempotent on {n}");
    }
}

#[test]
fn addition_commutes_and_multiplication_distributes() {
    let shape = ExprShape::polynomial(&["x", "y"], 3).with_functions(&["G"]);
    let mut g = rng(2);
    for _ in 0..300 {
        let (a, b, c) = (random_expr(&shape, &mut g), random_expr(&shape, &mut g), random_expr(&shape, &mut g));
        assert_eq!(normalize(&(&a + &b)), normalize(&(&b + &a)));
        assert_eq!(normalize(&(&a * (&b + &c))), normalize(&(&a * &b + &a * &c)));
    }
}

#[test]
fn polynomial_minus_expansion_is_structurally_zero() {
    let shape = ExprShape::polynomial(&["x", "y", "z"], 4);
    let table = SymbolTable::empty();
    let mut g = rng(3);
    for _ in 0..500 {
        let e = random_expr(&shape, &mut g);
        let expanded = normalize(&e);
        assert_eq!(is_zero(&(&e - &expanded), &table), ZeroVerdict::Zero);
    }
}

#[test]
fn mixed_partials_commute() {
    let table = SymbolTable::standard();
    let (r, t) = (Symbol::new("r"), Symbol::new("t"));
    let shape = field_shape();
    let mut g = rng(4);
    for _ in 0..500 {
        let e = random_expr(&shape, &mut g);
        let rt = differentiate(&differentiate(&e, &r, &table).unwrap(), &t, &table).unwrap();
        let tr = differentiate(&differentiate(&e, &t, &table).unwrap(), &r, &table).unwrap();
        assert_eq!(rt, tr, "mixed partials differ for {e}");
    }
}

#[test]
fn print_parse_round_trip() {
    let table = SymbolTable::standard();
    let shape = ExprShape::polynomial(&["r", "t", "a2", "a4", "D_r"], 4)
        .with_functions(&["G", "F"])
        .with_builtins()
        .with_reciprocals();
    let mut g = rng(5);
    for _ in 0..200 {
        let mut e = random_expr(&shape, &mut g);
        if g.gen_bool(0.3) {
            // symbolic exponent on a sum base
            e = (Expr::sym("a3") + Expr::sym("a4") * Expr::sym("t")).pow(e);
        }
        let n = normalize(&e);
        let printed = n.to_string();
        let back = parse(&printed, &table, ParseMode::Strict).unwrap_or_else(|err| panic!("{printed}: {err}"));
        assert_eq!(back, n, "round trip failed for {printed}");
    }
}

#[test]
fn evaluate_parse_matches_direct_arithmetic() {
    let table = SymbolTable::empty();
    let mut g = rng(6);
    for _ in 0..500 {
        let (a, b, c) = (g.gen_range(1..50) as f64, g.gen_range(1..50) as f64, g.gen_range(1..9) as f64);
        let text = format!("({a} + {b}/{c})^2 - {a}*{b} + 1/({c}*{c})");
        let e = parse_raw(&text, &table, ParseMode::Strict).unwrap();
        let v = evaluate(&e, &Env::new(), &table).unwrap();
        let direct = (a + b / c).powi(2) - a * b + 1.0 / (c * c);
        assert!((v - direct).abs() <= 1e-12 * direct.abs().max(1.0), "{text}: {v} vs {direct}");
    }
}

#[test]
fn substitution_commutes_with_differentiation() {
    let table = SymbolTable::standard();
    let r = Symbol::new("r");
    let shape = ExprShape::polynomial(&["r", "t", "a1", "a2", "a3"], 3).with_functions(&["G"]);
    let values = ExprShape::polynomial(&["t", "a4", "a5"], 2);
    let mut g = rng(7);
    for _ in 0..200 {
        let e = random_expr(&shape, &mut g);
        let b = Bindings::new().scalar("a1", random_expr(&values, &mut g)).scalar("a2", random_expr(&values, &mut g));
        let lhs = differentiate(&substitute(&e, &b, &table).unwrap(), &r, &table).unwrap();
        let rhs = substitute(&differentiate(&e, &r, &table).unwrap(), &b, &table).unwrap();
        assert_eq!(lhs, rhs, "for {e}");
    }
}

#[test]
fn time_derivative_of_gamma_family_matches_finite_differences() {
    let table = SymbolTable::standard();
    let e = parse("(a3 + a4*t)^(-1)*F(r*(a3 + a4*t)^(-a2/a4))", &table, ParseMode::Strict).unwrap();
    let d = differentiate(&e, &Symbol::new("t"), &table).unwrap();
    let mut g = rng(8);
    for _ in 0..50 {
        let (a2, a3, a4) = (g.gen_range(0.5..2.0), g.gen_range(0.5..2.0), g.gen_range(0.5..2.0));
        let (rv, tv) = (g.gen_range(0.1..2.0), g.gen_range(0.0..2.0));
        let (c0, c1, c2, c3): (f64, f64, f64, f64) =
            (g.gen_range(-1.0..1.0), g.gen_range(-1.0..1.0), g.gen_range(-1.0..1.0), g.gen_range(-1.0..1.0));
        let env = |t: f64| {
            Env::new()
                .with("a2", a2)
                .with("a3", a3)
                .with("a4", a4)
                .with("r", rv)
                .with("t", t)
                .with_fn("F", move |x| c0 + c1 * x[0] + c2 * x[0] * x[0] + c3 * x[0].powi(3))
                .with_fn("F'", move |x| c1 + 2.0 * c2 * x[0] + 3.0 * c3 * x[0] * x[0])
        };
        let exact = evaluate(&d, &env(tv), &table).unwrap();
        // fourth-order central difference
        let h = 1e-3;
        let f = |t: f64| evaluate(&e, &env(t), &table).unwrap();
        let fd = (f(tv - 2.0 * h) - 8.0 * f(tv - h) + 8.0 * f(tv + h) - f(tv + 2.0 * h)) / (12.0 * h);
        assert!((exact - fd).abs() <= 1e-7 * exact.abs().max(1.0), "{exact} vs {fd}");
    }
}

#[test]
fn partial_treats_unregistered_symbols_as_constants() {
    let table = SymbolTable::standard();
    let e = Expr::sym("x").powi(3) * Expr::sym("y");
    assert_eq!(
        partial(&e, &Symbol::new("x"), &table).unwrap(),
        normalize(&(Expr::int(3) * Expr::sym("x").powi(2) * Expr::sym("y")))
    );
}
