use rayon::prelude::*;
use serde::Serialize;

use crate::field::Field;
use crate::grid::{Boundary, BoundarySpec, GridSpec};
use crate::material::MaterialModel;
use crate::solver::{pde_residual, solve_pde};
use crate::transform::{transform_field, TransformParams};
use crate::NumError;

/// Residual of one transformed solution on one grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvarianceSample {
    pub nr: usize,
    pub nt: usize,
    pub eps: f64,
    /// Max-norm discrete residual of the transformed field on the overlap interior.
    pub residual: f64,
    /// Same residual for the untransformed solution (solver round-off).
    pub base_residual: f64,
    pub clipped_fraction: f64,
    pub points: usize,
}

/// Grid, boundaries and the start of the measurement window. The base
/// solve starts at `grid.t0`; residuals are taken over t >= `measure_from`
/// so that the fast initial transient of the start profile, which the time
/// step does not resolve, has decayed.
#[derive(Clone, Debug, Serialize)]
pub struct InvarianceProblem {
    pub grid: GridSpec,
    pub bc: BoundarySpec,
    pub measure_from: f64,
    #[serde(skip)]
    pub initial: fn(f64) -> f64,
}

impl InvarianceProblem {
    pub fn refined(&self) -> Self {
        Self { grid: self.grid.refined(), ..self.clone() }
    }

    /// Copy of `f` with rows before `measure_from` masked out.
    pub fn window(&self, f: &Field) -> Field {
        let g = &f.grid;
        let mut out = f.clone();
        let mut mask = f.mask.clone().unwrap_or_else(|| vec![true; f.values.len()]);
        let tol = 1e-9 * g.dt();
        for k in (0..=g.nt).filter(|k| g.t(*k) < self.measure_from - tol) {
            for i in 0..=g.nr {
                mask[f.index(k, i)] = false;
            }
        }
        out.mask = Some(mask);
        out
    }
}

/// Solve, transform, and evaluate the discrete PDE residual of the
/// transformed field on the interior of the overlap domain.
pub fn invariance_residual(
    problem: &InvarianceProblem,
    m: &MaterialModel,
    p: &TransformParams,
) -> Result<InvarianceSample, NumError> {
    let g = &problem.grid;
    let base = solve_pde(g, m, &problem.initial, &problem.bc)?;
    let moved = transform_field(&base, p)?;
    let res = pde_residual(&problem.window(&moved), m);
    Ok(InvarianceSample {
        nr: g.nr,
        nt: g.nt,
        eps: p.eps,
        residual: res.max,
        base_residual: pde_residual(&problem.window(&base), m).max,
        clipped_fraction: moved.clipped_fraction(),
        points: res.points,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct InvarianceReport {
    pub material: String,
    pub params: TransformParams,
    pub levels: Vec<InvarianceSample>,
    /// residual(level i) / residual(level i + 1) under joint halving of h and dt.
    pub ratios: Vec<f64>,
    /// Finest grid with eps halved.
    pub half_eps: InvarianceSample,
    pub eps_ratio: f64,
}

impl InvarianceReport {
    pub fn finest(&self) -> &InvarianceSample {
        self.levels.last().expect("at least one level")
    }

    /// Every refinement ratio within `target * (1 +- rel)`.
    pub fn ratios_within(&self, target: f64, rel: f64) -> bool {
        !self.ratios.is_empty() && self.ratios.iter().all(|q| (q / target - 1.0).abs() <= rel)
    }
}

/// Invariance residual on `g` and `refinements` jointly halved grids, plus
/// eps / 2 on the finest grid. Grid levels run concurrently.
pub fn refinement_study(
    problem: &InvarianceProblem,
    m: &MaterialModel,
    p: &TransformParams,
    refinements: usize,
) -> Result<InvarianceReport, NumError> {
    let mut grids = vec![problem.clone()];
    for _ in 0..refinements {
        let next = grids.last().unwrap().refined();
        grids.push(next);
    }
    let finest = grids.last().unwrap().clone();
    let half = p.with_eps(0.5 * p.eps);
    let mut jobs: Vec<(InvarianceProblem, TransformParams)> = grids.into_iter().map(|g| (g, *p)).collect();
    jobs.push((finest, half));
    let mut samples =
        jobs.par_iter().map(|(g, p)| invariance_residual(g, m, p)).collect::<Result<Vec<_>, NumError>>()?;
    let half_eps = samples.pop().unwrap();
    let ratios = samples.windows(2).map(|w| w[0].residual / w[1].residual).collect();
    let eps_ratio = samples.last().unwrap().residual / half_eps.residual;
    Ok(InvarianceReport { material: m.id.clone(), params: *p, levels: samples, ratios, half_eps, eps_ratio })
}

/// Problem on r in [0, 1], t in [1/2, 2] in geometry n with residuals
/// measured on [1, 2] and dt = h (`cells` must be even): zero gradient at
/// r = 0, phi = 0 at r = 1, start profile cos(pi r / 2). Suited to materials
/// even in r (a1 = 0); otherwise the zero-gradient node carries a first-order
/// truncation error that interpolation turns into a non-convergent residual.
pub fn desk_problem(cells: usize, n: u32) -> Result<InvarianceProblem, NumError> {
    let grid = GridSpec::new((0.0, 1.0), (0.5, 2.0), cells, 3 * cells / 2, n)?;
    let bc = BoundarySpec::new(Boundary::ZeroGradient, Boundary::Dirichlet(0.0));
    Ok(InvarianceProblem { grid, bc, measure_from: 1.0, initial: desk_initial })
}

/// Planar variant for materials without reflection symmetry at r = 0:
/// phi = 0 at both ends and a start profile compatible with that at every order.
pub fn offset_problem(cells: usize) -> Result<InvarianceProblem, NumError> {
    let grid = GridSpec::new((0.0, 1.0), (0.5, 2.0), cells, 3 * cells / 2, 0)?;
    let bc = BoundarySpec::new(Boundary::Dirichlet(0.0), Boundary::Dirichlet(0.0));
    Ok(InvarianceProblem { grid, bc, measure_from: 1.0, initial: bump })
}

/// Problem suited to a case and translation constant a1.
pub fn problem_for(cells: usize, n: u32, a1: f64) -> Result<InvarianceProblem, NumError> {
    if a1 != 0.0 && n == 0 {
        offset_problem(cells)
    } else {
        desk_problem(cells, n)
    }
}

pub fn desk_initial(r: f64) -> f64 {
    (0.5 * std::f64::consts::PI * r).cos()
}

/// exp(4 - 1/(r(1 - r))) on (0, 1), zero outside: every derivative vanishes
/// at both ends.
pub fn bump(r: f64) -> f64 {
    if r <= 0.0 || r >= 1.0 {
        0.0
    } else {
        (4.0 - 1.0 / (r * (1.0 - r))).exp()
    }
}
