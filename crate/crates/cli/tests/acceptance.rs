//! End-to-end acceptance run: every criterion prints one PASS/FAIL line.
//! Run with `cargo test -p ndsym-cli --test acceptance -- --nocapture`.

use std::collections::BTreeSet;
use std::path::Path;

use ndsym_cli::{run_args, Outcome};
use ndsym_core::isovector::{closure_check, Generator};
use ndsym_core::kernel::{
    canonical_equation, canonical_hash, evaluate, parse, partial, Env, Expr, ParseMode, Symbol, SymbolTable,
};
use serde_json::Value;

type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

fn run(args: &[&str]) -> Result<(Value, Outcome), String> {
    let mut all = vec!["ndsym"];
    all.extend_from_slice(args);
    let (_, outcome) = run_args(all).map_err(|e| format!("{args:?}: {e}"))?;
    let v = serde_json::from_str(&outcome.json).map_err(|e| e.to_string())?;
    Ok((v, outcome))
}

fn f64_at(v: &Value, ptr: &str) -> f64 {
    v.pointer(ptr).and_then(Value::as_f64).unwrap_or(f64::NAN)
}

fn p(t: &SymbolTable, s: &str) -> Expr {
    parse(s, t, ParseMode::Strict).unwrap()
}

const DERIVE: &[&str] = &["derive", "--n", "symbolic"];
const CASES: &[&str] = &["cases", "--points", "1000"];
const MATERIAL_B: &[&str] = &["verify", "--case", "B", "--a2", "1", "--a3", "1", "--a4", "2"];
const CLOSURE: &[&str] = &["verify", "--closure"];
const PROPERTIES: &[&str] = &["verify", "--properties", "--trials", "300"];
const SOLVER: &[&str] = &["verify", "--solver"];
const INVARIANCE: &[&str] = &[
    "verify",
    "--case",
    "D",
    "--invariance",
    "--eps",
    "0.02",
    "--refine",
    "3",
    "--cells",
    "16",
    "--n",
    "0",
    "--a1",
    "0",
    "--a2",
    "1",
    "--a3",
    "0",
    "--a4",
    "2",
    "--a6",
    "0",
];

fn determining_reproduction() -> Check {
    let (v, out) = run(DERIVE)?;
    ensure!(out.code == 0, "exit code {}", out.code);
    let got: BTreeSet<&str> = v["constraints"].as_array().unwrap().iter().filter_map(|c| c["text"].as_str()).collect();
    let want: BTreeSet<&str> = ["a5 = 0", "a7 = 0", "a8 = -a2 + a6", "D*a1*n = 0"].into();
    ensure!(got == want, "constraints {got:?}");
    let t = SymbolTable::standard();
    let hashes: BTreeSet<&str> =
        v["material"].as_array().unwrap().iter().filter_map(|m| m["canonical_hash"].as_str()).collect();
    for reference in
        ["(a1 + a2*r)*D_r + (a3 + a4*t)*D_t - (2*a2 - a4)*D", "(a1 + a2*r)*Gamma_r + (a3 + a4*t)*Gamma_t + a4*Gamma"]
    {
        let h = canonical_hash(&canonical_equation(&p(&t, reference)));
        ensure!(hashes.contains(h.as_str()), "material equation {reference} not derived");
    }
    let golden =
        std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/derive_symbolic.json"))
            .map_err(|e| e.to_string())?;
    ensure!(out.json == golden, "report differs from the golden file");
    Ok("4 constraints, 2 material equations, golden match".into())
}

/// Finite-difference oracle: for an arbitrary D(r, t), the r-derivative of
/// the reduced diffusion expression equals the reduced gradient expression.
fn dependency_oracle() -> Result<f64, String> {
    let t = SymbolTable::standard();
    let d = p(&t, "exp(r/3 + t/5)*(1 + r^2*t)");
    let (r_s, t_s) = (Symbol::new("r"), Symbol::new("t"));
    let d_r = partial(&d, &r_s, &t).map_err(|e| e.to_string())?;
    let d_t = partial(&d, &t_s, &t).map_err(|e| e.to_string())?;
    let d_rr = partial(&d_r, &r_s, &t).map_err(|e| e.to_string())?;
    let d_rt = partial(&d_r, &t_s, &t).map_err(|e| e.to_string())?;
    let at = |e: &Expr, r: f64, tt: f64| evaluate(e, &Env::new().with("r", r).with("t", tt), &t).unwrap();
    let (a1, a2, a3, a4) = (0.4, 1.3, 0.7, 2.1);
    let reduced = |r: f64, tt: f64| {
        (a1 + a2 * r) * at(&d_r, r, tt) + (a3 + a4 * tt) * at(&d_t, r, tt) - (2.0 * a2 - a4) * at(&d, r, tt)
    };
    let gradient = |r: f64, tt: f64| {
        (a1 + a2 * r) * at(&d_rr, r, tt) + (a3 + a4 * tt) * at(&d_rt, r, tt) - (a2 - a4) * at(&d_r, r, tt)
    };
    let h = 1e-3;
    let mut worst: f64 = 0.0;
    for (r, tt) in [(0.2, 0.1), (0.9, 0.5), (1.7, 1.3)] {
        let fd = (-reduced(r + 2.0 * h, tt) + 8.0 * reduced(r + h, tt) - 8.0 * reduced(r - h, tt)
            + reduced(r - 2.0 * h, tt))
            / (12.0 * h);
        worst = worst.max((fd - gradient(r, tt)).abs() / (1.0 + gradient(r, tt).abs()));
    }
    Ok(worst)
}

fn dependency_check() -> Check {
    let (v, _) = run(DERIVE)?;
    ensure!(v["audit"]["dependency"] == "zero", "dependency verdict {}", v["audit"]["dependency"]);
    let row = v["audit"]["entries"].as_array().unwrap().iter().find(|e| e["id"] == "gradient-reduced").cloned();
    ensure!(row.as_ref().map(|r| r["status"] == "implied") == Some(true), "gradient-reduced row {row:?}");
    let fd = dependency_oracle()?;
    ensure!(fd <= 1e-8, "finite-difference oracle {fd:e}");
    Ok(format!("symbolic zero, row implied, FD oracle {fd:.1e}"))
}

fn audit_adjudication() -> Check {
    let (v, _) = run(DERIVE)?;
    let entries = v["audit"]["entries"].as_array().unwrap();
    ensure!(entries.len() == 10, "{} audit rows", entries.len());
    let definite = ["reproduced", "implied", "not-derivable", "discrepant"];
    for e in entries {
        ensure!(definite.iter().any(|d| e["status"] == *d), "row {} status {}", e["id"], e["status"]);
    }
    ensure!(v["audit"]["unknown_verdicts"] == 0, "unknown verdicts {}", v["audit"]["unknown_verdicts"]);
    let branch_unknown: u64 = v["branches"].as_array().unwrap().iter().filter_map(|b| b["unknown"].as_u64()).sum();
    ensure!(branch_unknown == 0, "{branch_unknown} unknown verdicts in sufficiency");
    let c = &v["audit"]["counts"];
    Ok(format!(
        "10 rows: {} reproduced, {} implied, {} not-derivable, {} discrepant; 0 unknown",
        c["reproduced"], c["implied"], c["not-derivable"], c["discrepant"]
    ))
}

fn closure() -> Check {
    let (v, out) = run(CLOSURE)?;
    ensure!(out.code == 0 && out.markdown.contains("identically satisfied"), "closure not satisfied");
    ensure!(
        v["closure"]["verdict"] == "zero" && v["closure"]["residual"] == "0",
        "residual {}",
        v["closure"]["residual"]
    );
    ensure!(v["closure"]["mutation_verdict"] == "nonzero", "mutation residual vanished");
    let t = SymbolTable::standard();
    let broken =
        closure_check(&Generator::standard().with_override("D_r", Expr::zero()), &t).map_err(|e| e.to_string())?;
    let predicted = p(&t, "-(a1 + a2*r)*D_rr - (a3 + a4*t)*D_rt");
    ensure!(broken.residual.coefficient(&["r", "t"]) == predicted, "mutation residual {}", broken.residual);
    Ok(format!("residual 0; mutation leaves {}", v["closure"]["mutation_residual"].as_str().unwrap_or("")))
}

fn cases_reproduction() -> Check {
    let (v, out) = run(CASES)?;
    ensure!(out.code == 0, "exit code {}", out.code);
    let cases = v["cases"].as_array().unwrap();
    let ids: String = cases.iter().filter_map(|c| c["id"].as_str()).collect();
    ensure!(ids == "ABCDEF", "cases {ids}");
    let mut worst: f64 = 0.0;
    for c in cases {
        for k in c["checks"].as_array().unwrap() {
            ensure!(k["symbolic"] == "zero", "case {} {} symbolic {}", c["id"], k["field"], k["symbolic"]);
            ensure!(k["points"] == 1000, "case {} points {}", c["id"], k["points"]);
            let m = k["numeric_max"].as_f64().unwrap_or(f64::NAN);
            ensure!(m <= 1e-10, "case {} {} numeric residual {m:e}", c["id"], k["field"]);
            worst = worst.max(m);
        }
    }
    let mut fd_worst: f64 = 0.0;
    for id in ["A", "B", "C", "D", "E", "F"] {
        let a1 = if id == "A" || id == "D" { "0.3" } else { "0" };
        let args = ["verify", "--case", id, "--a1", a1, "--a2", "1", "--a3", "1", "--a4", "2", "--a6", "0.5"];
        let (m, _) = run(&args)?;
        let r = f64_at(&m, "/material/residual/res_d").max(f64_at(&m, "/material/residual/res_gamma"));
        ensure!(r <= 1e-6, "case {id} finite-difference residual {r:e}");
        fd_worst = fd_worst.max(r);
    }
    let (b, _) = run(MATERIAL_B)?;
    ensure!(b["material"]["passed"] == true, "case B material residual {}", b["material"]["residual"]);
    Ok(format!("6 cases, max exact-path residual {worst:.1e} at 1000 points, max FD residual {fd_worst:.1e}"))
}

fn properties() -> Check {
    let (v, _) = run(PROPERTIES)?;
    let outcomes = v["properties"]["outcomes"].as_array().unwrap();
    let names: BTreeSet<&str> = outcomes.iter().filter_map(|o| o["name"].as_str()).collect();
    for want in ["antisymmetry", "nilpotency", "section-homomorphism", "lie-exterior-commutation"] {
        ensure!(names.contains(want), "missing property {want}");
    }
    for o in outcomes {
        ensure!(o["trials"].as_u64().unwrap_or(0) >= 300, "{} ran {} trials", o["name"], o["trials"]);
        ensure!(o["failures"] == 0, "{} failed {} times: {}", o["name"], o["failures"], o["example"]);
    }
    Ok(format!("{} properties x 300 trials, 0 failures", outcomes.len()))
}

fn solver() -> Check {
    let (v, _) = run(SOLVER)?;
    let orders: Vec<f64> =
        v["solver"]["manufactured"]["orders"].as_array().unwrap().iter().filter_map(Value::as_f64).collect();
    ensure!(!orders.is_empty() && orders.iter().all(|q| (q - 2.0).abs() <= 0.2), "orders {orders:?}");
    let growth = f64_at(&v, "/solver/growth/max_relative_error");
    ensure!(growth <= 1e-6, "growth error {growth:e}");
    Ok(format!("orders {orders:.3?}, growth error {growth:.1e}"))
}

fn invariance() -> Check {
    let (v, _) = run(INVARIANCE)?;
    let inv = &v["invariance"];
    let ratios: Vec<f64> = inv["study"]["ratios"].as_array().unwrap().iter().filter_map(Value::as_f64).collect();
    ensure!(ratios.len() == 3, "{} ratios", ratios.len());
    ensure!(ratios.iter().all(|q| (q / 4.0 - 1.0).abs() <= 0.3), "ratios {ratios:?}");
    let finest = f64_at(inv, "/study/levels/3/residual");
    let mutated = f64_at(inv, "/control/study/levels/3/residual");
    ensure!(mutated > 10.0 * finest, "control {mutated:e} vs {finest:e}");
    let control: Vec<f64> =
        inv["control"]["study"]["ratios"].as_array().unwrap().iter().filter_map(Value::as_f64).collect();
    ensure!(control.iter().all(|q| *q < 1.5), "control ratios {control:?} do not plateau");
    Ok(format!("ratios {ratios:.3?}, finest {finest:.2e}, control {mutated:.2e} ({:.0}x)", mutated / finest))
}

fn determinism() -> Check {
    let mut differing = Vec::new();
    for args in [DERIVE, CASES, MATERIAL_B, CLOSURE, PROPERTIES, SOLVER, INVARIANCE] {
        let (_, a) = run(args)?;
        let (_, b) = run(args)?;
        if a.json != b.json {
            differing.push(args.join(" "));
        }
    }
    ensure!(differing.is_empty(), "reports differ: {differing:?}");
    Ok("7 reports byte-identical across two runs".into())
}

#[test]
fn acceptance_criteria() {
    let criteria: [(&str, fn() -> Check); 9] = [
        ("determining-equation reproduction", determining_reproduction),
        ("dependency check", dependency_check),
        ("audit adjudication", audit_adjudication),
        ("contact closure", closure),
        ("material case reproduction", cases_reproduction),
        ("exterior-algebra properties", properties),
        ("solver verification", solver),
        ("invariance at desk scale", invariance),
        ("determinism", determinism),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(why) => {
                println!("FAIL {} {name}: {why}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
