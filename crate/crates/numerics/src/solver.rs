use crate::field::Field;
use crate::grid::{Boundary, BoundarySpec, GridSpec};
use crate::material::MaterialModel;
use crate::NumError;

/// Tridiagonal spatial operator L with
/// (L phi)_i = lo_i phi_{i-1} + di_i phi_i + up_i phi_{i+1},
/// discretizing (1/r^n) d/dr (r^n D dphi/dr) + Gamma phi in flux form.
struct Operator {
    lo: Vec<f64>,
    di: Vec<f64>,
    up: Vec<f64>,
}

impl Operator {
    fn at(g: &GridSpec, m: &MaterialModel, t: f64) -> Self {
        let n = g.nr;
        let h = g.h();
        let d: Vec<f64> = (0..=n).map(|i| m.d(g.r(i), t)).collect();
        let face: Vec<f64> = (0..n).map(|i| g.face_weight(i) * 0.5 * (d[i] + d[i + 1]) / h).collect();
        let (mut lo, mut di, mut up) = (vec![0.0; n + 1], vec![0.0; n + 1], vec![0.0; n + 1]);
        for i in 0..=n {
            let vol = g.volume(i);
            let west = if i > 0 { face[i - 1] } else { 0.0 };
            let east = if i < n { face[i] } else { 0.0 };
            lo[i] = west / vol;
            up[i] = east / vol;
            di[i] = -(west + east) / vol + m.gamma(g.r(i), t);
        }
        Self { lo, di, up }
    }

    fn apply(&self, phi: &[f64], i: usize) -> f64 {
        let mut s = self.di[i] * phi[i];
        if i > 0 {
            s += self.lo[i] * phi[i - 1];
        }
        if i + 1 < phi.len() {
            s += self.up[i] * phi[i + 1];
        }
        s
    }
}

/// Thomas algorithm; `a` is the sub-diagonal, `c` the super-diagonal.
fn thomas(a: &[f64], b: &[f64], c: &[f64], rhs: &mut [f64], step: usize) -> Result<(), NumError> {
    let n = b.len();
    let mut cp = vec![0.0; n];
    let mut pivot = b[0];
    for i in 0..n {
        if i > 0 {
            pivot = b[i] - a[i] * cp[i - 1];
            rhs[i] = (rhs[i] - a[i] * rhs[i - 1]) / pivot;
        } else {
            rhs[0] /= pivot;
        }
        if pivot == 0.0 {
            return Err(NumError::Singular { step, row: i });
        }
        cp[i] = c[i] / pivot;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= cp[i] * rhs[i + 1];
    }
    Ok(())
}

/// Solve (1/v) phi_t = (1/r^n) (r^n D phi_r)_r + Gamma phi by Crank-Nicolson
/// with D and Gamma frozen at the half step. The first step is split into two
/// backward-Euler half steps; the scheme stays second order.
pub fn solve_pde(
    g: &GridSpec,
    m: &MaterialModel,
    ic: &dyn Fn(f64) -> f64,
    bc: &BoundarySpec,
) -> Result<Field, NumError> {
    g.check_boundaries(bc)?;
    m.check(g)?;
    let dt = g.dt();
    let mut phi: Vec<f64> = g.nodes().into_iter().map(ic).collect();
    apply_dirichlet(&mut phi, bc);
    if phi.iter().any(|v| !v.is_finite()) {
        return Err(NumError::NonFinite { step: 0 });
    }
    let mut values = Vec::with_capacity((g.nr + 1) * (g.nt + 1));
    values.extend_from_slice(&phi);
    for k in 0..g.nt {
        phi = if k == 0 {
            // damped (Rannacher) start: two backward-Euler half steps remove
            // the stiff modes that incompatible start data would excite and
            // that Crank-Nicolson carries almost undamped
            let half = step(g, m, bc, &phi, g.t(0), 0.5 * dt, 1.0, 1)?;
            step(g, m, bc, &half, g.t(0) + 0.5 * dt, 0.5 * dt, 1.0, 1)?
        } else {
            step(g, m, bc, &phi, g.t(k), dt, 0.5, k + 1)?
        };
        values.extend_from_slice(&phi);
    }
    let mut f = Field::new(g.clone(), &m.id, values);
    f.damped_steps = 1;
    Ok(f)
}

/// One theta-step of size `dt` from `t`; theta = 1/2 is Crank-Nicolson,
/// theta = 1 backward Euler. Coefficients are frozen at t + dt/2.
#[allow(clippy::too_many_arguments)]
fn step(
    g: &GridSpec,
    m: &MaterialModel,
    bc: &BoundarySpec,
    phi: &[f64],
    t: f64,
    dt: f64,
    theta: f64,
    index: usize,
) -> Result<Vec<f64>, NumError> {
    let n = g.nr;
    let inertia = 1.0 / (m.v * dt);
    let op = Operator::at(g, m, t + 0.5 * dt);
    let mut a: Vec<f64> = op.lo.iter().map(|x| -theta * x).collect();
    let mut b: Vec<f64> = op.di.iter().map(|x| inertia - theta * x).collect();
    let mut c: Vec<f64> = op.up.iter().map(|x| -theta * x).collect();
    let mut rhs: Vec<f64> = (0..=n).map(|i| inertia * phi[i] + (1.0 - theta) * op.apply(phi, i)).collect();
    if let Boundary::Dirichlet(value) = bc.left {
        (b[0], c[0], rhs[0]) = (1.0, 0.0, value);
    }
    if let Boundary::Dirichlet(value) = bc.right {
        (a[n], b[n], rhs[n]) = (0.0, 1.0, value);
    }
    thomas(&a, &b, &c, &mut rhs, index)?;
    if rhs.iter().any(|v| !v.is_finite()) {
        return Err(NumError::NonFinite { step: index });
    }
    Ok(rhs)
}

fn apply_dirichlet(phi: &mut [f64], bc: &BoundarySpec) {
    if let Boundary::Dirichlet(v) = bc.left {
        phi[0] = v;
    }
    if let Boundary::Dirichlet(v) = bc.right {
        let last = phi.len() - 1;
        phi[last] = v;
    }
}

/// Discrete Crank-Nicolson residual of `f` under `m` at every interior
/// node (step k to k + 1, node i), `None` where the stencil leaves the mask
/// or the step was not a Crank-Nicolson step.
pub fn pde_residual_map(f: &Field, m: &MaterialModel) -> Vec<Vec<Option<f64>>> {
    let g = &f.grid;
    let dt = g.dt();
    (0..g.nt)
        .map(|k| {
            let op = Operator::at(g, m, g.t(k) + 0.5 * dt);
            let (old, new) = (f.row(k), f.row(k + 1));
            (1..g.nr)
                .map(|i| {
                    let ok = k >= f.damped_steps && (i - 1..=i + 1).all(|j| f.is_valid(k, j) && f.is_valid(k + 1, j));
                    ok.then(|| (new[i] - old[i]) / (m.v * dt) - 0.5 * (op.apply(new, i) + op.apply(old, i)))
                })
                .collect()
        })
        .collect()
}

/// Largest residual from [`pde_residual_map`].
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct ResidualSummary {
    pub max: f64,
    pub points: usize,
    /// (step, node) of the largest residual.
    pub at: (usize, usize),
}

pub fn pde_residual(f: &Field, m: &MaterialModel) -> ResidualSummary {
    let mut s = ResidualSummary { max: 0.0, points: 0, at: (0, 0) };
    for (k, row) in pde_residual_map(f, m).into_iter().enumerate() {
        for (j, r) in row.into_iter().enumerate() {
            if let Some(r) = r {
                s.points += 1;
                if r.abs() > s.max {
                    (s.max, s.at) = (r.abs(), (k, j + 1));
                }
            }
        }
    }
    s
}
