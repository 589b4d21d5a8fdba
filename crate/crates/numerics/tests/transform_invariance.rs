use std::f64::consts::PI;

use ndsym_core::characteristics::{case, enumerate_cases};
use ndsym_core::kernel::{Expr, SymbolTable};
use ndsym_numerics::export::{export, FieldMetadata};
use ndsym_numerics::invariance::{desk_problem, offset_problem, problem_for};
use ndsym_numerics::material::perturb_time_exponent;
use ndsym_numerics::*;

fn manufactured(r: f64, t: f64) -> f64 {
    (1.0 + t) * (0.5 * PI * r).cos()
}

fn sampled(g: &GridSpec, f: impl Fn(f64, f64) -> f64) -> Field {
    let mut values = Vec::new();
    for t in g.times() {
        values.extend(g.nodes().into_iter().map(|r| f(r, t)));
    }
    Field::new(g.clone(), "sampled", values)
}

fn unit_grid(cells: usize) -> GridSpec {
    GridSpec::new((0.0, 1.0), (0.0, 1.0), cells, cells, 0).unwrap()
}

#[test]
fn zero_parameter_is_the_identity() {
    let f = sampled(&unit_grid(16), manufactured);
    let p = TransformParams::admissible(0.0, 0.4, 1.0, 0.2, 2.0, 0.5);
    let moved = transform_field(&f, &p).unwrap();
    assert!(moved.mask.is_none());
    assert!(moved.max_difference(&f) <= 1e-14);
    assert_eq!(moved.transform, Some(p));
}

#[test]
fn time_translation_leaves_a_steady_field_unchanged() {
    let f = sampled(&unit_grid(16), |r, _| (2.0 * r).sin() + 1.0);
    let p = TransformParams::admissible(0.1, 0.0, 0.0, 0.3, 0.0, 0.0);
    let moved = transform_field(&f, &p).unwrap();
    assert!(moved.clipped_fraction() > 0.0);
    assert!(moved.max_difference(&f) <= 1e-13);
}

#[test]
fn scaling_matches_the_analytic_oracle() {
    let g = unit_grid(64);
    let p = TransformParams::admissible(0.05, 0.0, 1.0, 0.0, 2.0, 0.0);
    let moved = transform_field(&sampled(&g, manufactured), &p).unwrap();
    let oracle = sampled(&g, |r, t| manufactured((-0.05f64).exp() * r, (-0.1f64).exp() * t));
    assert!(moved.max_difference(&oracle) <= 1e-6, "{}", moved.max_difference(&oracle));
}

#[test]
fn composition_follows_the_group_law() {
    let g = GridSpec::new((0.0, 1.0), (0.2, 1.2), 64, 64, 0).unwrap();
    let f = sampled(&g, manufactured);
    let p = |eps| TransformParams::admissible(eps, 0.0, 1.0, 0.0, 2.0, 0.3);
    let twice = transform_field(&transform_field(&f, &p(0.02)).unwrap(), &p(0.03)).unwrap();
    let once = transform_field(&f, &p(0.05)).unwrap();
    assert!(twice.max_difference(&once) <= 1e-5, "{}", twice.max_difference(&once));
}

#[test]
fn flow_and_printed_maps_differ_only_with_translation_and_scaling() {
    let p = TransformParams::admissible(0.1, 0.5, 1.0, 0.0, 2.0, 0.0);
    let q = p.with_map(TransformMap::Flow);
    assert!((p.source_r(0.7) - q.source_r(0.7)).abs() > 1e-3);
    assert_eq!(p.source_t(1.3), q.source_t(1.3));
    let pure = TransformParams::admissible(0.1, 0.5, 0.0, 0.0, 2.0, 0.0);
    assert_eq!(pure.source_r(0.7), pure.with_map(TransformMap::Flow).source_r(0.7));
}

#[test]
fn large_clipping_is_an_error() {
    let f = sampled(&unit_grid(16), manufactured);
    let p = TransformParams::admissible(0.0, 0.0, 0.0, 1.0, 0.0, 0.0).with_eps(0.5);
    assert!(matches!(transform_field(&f, &p), Err(NumError::OutOfDomain { .. })));
}

#[test]
fn determining_constraints_are_enforced() {
    assert!(TransformParams::new(0.1, [0.0, 1.0, 0.0, 2.0, 0.0, 0.0, 0.0, -1.0]).is_ok());
    assert!(TransformParams::new(0.1, [0.0, 1.0, 0.0, 2.0, 0.1, 0.0, 0.0, -1.0]).is_err());
    assert!(TransformParams::new(0.1, [0.0, 1.0, 0.0, 2.0, 0.0, 0.0, 0.2, -1.0]).is_err());
    assert!(TransformParams::new(0.1, [0.0, 1.0, 0.0, 2.0, 0.0, 0.0, 0.0, 1.0]).is_err());
}

#[test]
fn closed_form_materials_satisfy_the_material_equations() {
    let table = SymbolTable::standard();
    let b = case('B', &table, 10, 0).unwrap().unwrap();
    let p = TransformParams::admissible(0.0, 0.0, 1.0, 1.0, 2.0, 0.0);
    let m = MaterialModel::from_case(&b, &p, 1.0).unwrap();
    let g = GridSpec::new((0.0, 2.0), (0.0, 1.0), 64, 64, 0).unwrap();
    let res = material_residual(&m, &p, &g).unwrap();
    assert!(res.res_d <= 1e-6 && res.res_gamma <= 1e-6, "{res:?}");

    let constant = MaterialModel::constant(1.7, 0.0, 1.0);
    let matched = TransformParams::admissible(0.0, 0.0, 1.0, 1.0, 2.0, 0.0);
    assert!(material_residual(&constant, &matched, &g).unwrap().res_d <= 1e-12);
    let mismatched = TransformParams::admissible(0.0, 0.0, 1.0, 1.0, 3.0, 0.0);
    let res = material_residual(&constant, &mismatched, &g).unwrap();
    assert!((res.res_d - 1.0).abs() <= 1e-9, "{res:?}");
}

#[test]
fn case_d_invariance_converges_at_second_order() {
    let table = SymbolTable::standard();
    let d = case('D', &table, 10, 0).unwrap().unwrap();
    let p = TransformParams::admissible(0.02, 0.0, 1.0, 0.0, 2.0, 0.0);
    let m = MaterialModel::from_case(&d, &p, 1.0).unwrap();
    let problem = desk_problem(16, 0).unwrap();
    let rep = refinement_study(&problem, &m, &p, 3).unwrap();
    assert!(rep.ratios_within(4.0, 0.3), "{:?}", rep.ratios);
    assert!((rep.eps_ratio / 2.0 - 1.0).abs() <= 0.3, "{}", rep.eps_ratio);
    assert!(rep.levels.iter().all(|l| l.base_residual <= 1e-10 && l.clipped_fraction < 0.2));

    let mutated = perturb_time_exponent(&d.diffusion.expr, Expr::rational(1, 10));
    let mm = MaterialModel::from_case_with(&d, &mutated, &p, 1.0).unwrap();
    let control = refinement_study(&problem, &mm, &p, 3).unwrap();
    assert!(control.finest().residual > 10.0 * rep.finest().residual);
    assert!(control.ratios.iter().all(|q| *q < 1.5), "{:?}", control.ratios);
}

#[test]
fn zero_parameter_reproduces_the_base_residual() {
    let table = SymbolTable::standard();
    let d = case('D', &table, 10, 0).unwrap().unwrap();
    let p = TransformParams::admissible(0.0, 0.0, 1.0, 0.0, 2.0, 0.0);
    let m = MaterialModel::from_case(&d, &p, 1.0).unwrap();
    let s = invariance_residual(&desk_problem(32, 0).unwrap(), &m, &p).unwrap();
    assert!((s.residual - s.base_residual).abs() <= 1e-10, "{s:?}");
}

#[test]
fn every_case_is_invariant_under_its_flow() {
    let table = SymbolTable::standard();
    for c in enumerate_cases(&table, 10, 0).unwrap() {
        let (a1, n) = match c.id {
            'A' | 'D' => (0.3, 0),
            'B' => (0.0, 1),
            'E' => (0.0, 2),
            _ => (0.0, 0),
        };
        let p = TransformParams::admissible(0.02, a1, 1.0, 0.0, 2.0, 0.5).with_map(TransformMap::Flow);
        let m = MaterialModel::from_case(&c, &p, 1.0).unwrap();
        let rep = refinement_study(&problem_for(16, n, a1).unwrap(), &m, &p, 2).unwrap();
        assert!(rep.ratios.iter().all(|q| *q > 3.0), "case {}: {:?}", c.id, rep.ratios);
    }
}

#[test]
fn printed_maps_break_invariance_with_translation() {
    let table = SymbolTable::standard();
    let a = case('A', &table, 10, 0).unwrap().unwrap();
    let p = TransformParams::admissible(0.1, 0.5, 1.0, 0.0, 2.0, 0.0);
    let m = MaterialModel::from_case(&a, &p, 1.0).unwrap();
    let problem = offset_problem(16).unwrap();
    let printed = refinement_study(&problem, &m, &p, 3).unwrap();
    let flow = refinement_study(&problem, &m, &p.with_map(TransformMap::Flow), 3).unwrap();
    assert!(printed.finest().residual > 10.0 * flow.finest().residual);
}

#[test]
fn export_writes_csv_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let g = unit_grid(4);
    let f = sampled(&g, manufactured);
    let mut meta = FieldMetadata::of(&f, None);
    meta.residuals.insert("pde".into(), 1e-3);
    export(&f, &meta, dir.path(), "phi").unwrap();
    let mut rdr = csv::Reader::from_path(dir.path().join("phi.csv")).unwrap();
    assert_eq!(rdr.headers().unwrap(), vec!["r", "t", "phi"]);
    assert_eq!(rdr.records().count(), 25);
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("phi.json")).unwrap()).unwrap();
    assert_eq!(json["grid"]["nr"], 4);
    assert_eq!(json["residuals"]["pde"], 1e-3);
}
