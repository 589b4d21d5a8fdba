use ndsym_core::characteristics::{
    back_substitute, enumerate_cases, scaling_coherence, solve_characteristics, QuasiLinearPde, SolutionBranch,
};
use ndsym_core::kernel::{is_zero, parse, Bindings, Expr, ParseMode, SymbolTable, ZeroVerdict};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn p(t: &SymbolTable, s: &str) -> Expr {
    parse(s, t, ParseMode::Strict).unwrap()
}

#[test]
fn six_cases_pass_back_substitution() {
    let t = SymbolTable::standard();
    let cases = enumerate_cases(&t, 1000, 0).unwrap();
    let ids: String = cases.iter().map(|c| c.id).collect();
    assert_eq!(ids, "ABCDEF");
    for c in &cases {
        for check in &c.checks {
            assert_eq!(check.verdict, "zero", "case {}: {check:?}", c.id);
            assert_eq!(check.points, 1000);
            assert!(check.numeric_max <= 1e-10);
        }
    }
}

#[test]
fn case_forms_match_the_similarity_solutions() {
    let t = SymbolTable::standard();
    let cases = enumerate_cases(&t, 10, 0).unwrap();
    let by = |id: char| cases.iter().find(|c| c.id == id).unwrap();
    let shared = "(r + a1/a2)*(a3 + a4*t)^(-a2/a4)";
    assert_eq!(by('A').diffusion.argument, Some(p(&t, shared)));
    assert_eq!(by('A').production.argument, Some(p(&t, shared)));
    assert_eq!(by('A').diffusion.expr, p(&t, &format!("(a3 + a4*t)^(2*a2/a4 - 1)*G({shared})")));
    assert_eq!(by('B').production.expr, p(&t, "(a3 + a4*t)^(-1)*F(r*(a3 + a4*t)^(-a2/a4))"));
    assert_eq!(by('D').diffusion.expr, p(&t, "C*(a3 + a4*t)^(2*a2/a4 - 1)"));
    assert_eq!(by('D').diffusion.branch, SolutionBranch::TimeOnly);
    assert_eq!(by('C').diffusion.expr, by('B').diffusion.expr);
    assert_eq!(by('F').diffusion.expr, by('E').diffusion.expr);
    assert_eq!(by('F').production.expr, by('E').production.expr);
    assert_eq!(by('E').coincides_with, vec!["B", "D"]);
}

#[test]
fn printed_typos_fail_back_substitution() {
    let t = SymbolTable::standard();
    let cases = enumerate_cases(&t, 10, 0).unwrap();
    for c in &cases {
        for (field, text, verdict) in &c.reference {
            let typo = text.contains("^(a2/a4)") || text.contains("(a3 + a4)^");
            let expected = if typo { ZeroVerdict::Nonzero } else { ZeroVerdict::Zero };
            assert_eq!(*verdict, expected, "case {} {field}: {text}", c.id);
        }
        let has_note = !c.notes.is_empty();
        assert_eq!(has_note, matches!(c.id, 'A' | 'B' | 'C' | 'D'), "case {}", c.id);
    }
}

#[test]
fn generic_branch_holds_for_random_rational_constants() {
    let t = SymbolTable::standard();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..100 {
        let mut q = || {
            let n = rng.gen_range(1..=9) * if rng.gen_bool(0.5) { 1 } else { -1 };
            Expr::rational(n, rng.gen_range(1..=4))
        };
        let b = Bindings::new().scalar("a1", q()).scalar("a2", q()).scalar("a3", q()).scalar("a4", q());
        for pde in [QuasiLinearPde::diffusion(p(&t, "a1 + a2*r")), QuasiLinearPde::production(p(&t, "a1 + a2*r"))] {
            let pde = pde.substitute(&b, &t).unwrap();
            let h = if pde.field == "D" { "G" } else { "F" };
            let sol = solve_characteristics(&pde, h, false).unwrap();
            assert_eq!(is_zero(&pde.residual(&sol.expr, &t).unwrap(), &t), ZeroVerdict::Zero, "{}", sol.expr);
        }
    }
}

#[test]
fn similarity_argument_is_scale_invariant() {
    let t = SymbolTable::standard();
    let pde = QuasiLinearPde::diffusion(p(&t, "a2*r"));
    let sol = solve_characteristics(&pde, "G", false).unwrap();
    let eps: Vec<f64> = (0..20).map(|i| -0.5 + 0.05 * i as f64).collect();
    let worst = scaling_coherence(sol.argument.as_ref().unwrap(), 1.0, 2.0, &eps, &t).unwrap();
    assert!(worst <= 1e-12, "{worst}");
}

#[test]
fn wrong_exponent_mutation_is_caught() {
    let t = SymbolTable::standard();
    let pde = QuasiLinearPde::diffusion(p(&t, "a1 + a2*r"));
    let mut sol = solve_characteristics(&pde, "G", false).unwrap();
    sol.expr = p(&t, "(a3 + a4*t)^(2*a2/a4)*G((r + a1/a2)*(a3 + a4*t)^(-a2/a4))");
    let b = back_substitute(&sol, &pde, 200, 3, &t).unwrap();
    assert!(!b.passed());
}
