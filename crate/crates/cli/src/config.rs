use std::path::{Path, PathBuf};

use ndsym_core::forms::Geometry;
use ndsym_numerics::{Boundary, GridSpec, TransformMap, TransformParams};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Geometry given as `"symbolic"` or an integer 0, 1, 2.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GeometryValue {
    Literal(i64),
    Text(String),
}

impl GeometryValue {
    pub fn geometry(&self) -> Result<Geometry, CliError> {
        let text = match self {
            GeometryValue::Literal(n) => n.to_string(),
            GeometryValue::Text(s) => s.clone(),
        };
        text.parse().map_err(|_| CliError::Config(format!("geometry must be symbolic, 0, 1 or 2, got '{text}'")))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub r0: Option<f64>,
    pub r1: Option<f64>,
    pub t0: Option<f64>,
    pub t1: Option<f64>,
    pub nr: Option<usize>,
    pub nt: Option<usize>,
}

/// Every setting a command can take. Loaded from a JSON file and overlaid by
/// explicit flags; unset fields fall back to per-command defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<String>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
    pub json: Option<bool>,
    pub n: Option<GeometryValue>,
    pub strict_reference: Option<bool>,
    pub case: Option<String>,
    pub a1: Option<f64>,
    pub a2: Option<f64>,
    pub a3: Option<f64>,
    pub a4: Option<f64>,
    pub a5: Option<f64>,
    pub a6: Option<f64>,
    pub a7: Option<f64>,
    pub a8: Option<f64>,
    pub eps: Option<f64>,
    pub map: Option<TransformMap>,
    pub closure: Option<bool>,
    pub invariance: Option<bool>,
    pub properties: Option<bool>,
    pub solver: Option<bool>,
    pub cells: Option<usize>,
    pub refine: Option<usize>,
    /// Exponent shift of the symmetry-breaking control run; 0 disables it.
    pub control: Option<f64>,
    pub points: Option<usize>,
    pub trials: Option<usize>,
    /// Arbitrary function G of the similarity variable `xi`.
    pub g: Option<String>,
    /// Arbitrary function F of the similarity variable `xi`.
    pub f: Option<String>,
    pub d: Option<String>,
    pub gamma: Option<String>,
    pub initial: Option<String>,
    pub v: Option<f64>,
    pub grid: Option<GridConfig>,
    pub left: Option<Boundary>,
    pub right: Option<Boundary>,
}

macro_rules! overlay {
    ($top:ident, $under:ident; $($field:ident),*) => {
        RunConfig { $($field: $top.$field.or($under.$field)),* }
    };
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// Fields set in `self` win over `under`.
    pub fn over(self, under: RunConfig) -> RunConfig {
        let grid = match (self.grid.clone(), under.grid.clone()) {
            (Some(a), Some(b)) => Some(GridConfig {
                r0: a.r0.or(b.r0),
                r1: a.r1.or(b.r1),
                t0: a.t0.or(b.t0),
                t1: a.t1.or(b.t1),
                nr: a.nr.or(b.nr),
                nt: a.nt.or(b.nt),
            }),
            (a, b) => a.or(b),
        };
        let top = RunConfig { grid, ..self };
        overlay!(top, under; command, seed, tol, out, json, n, strict_reference, case, a1, a2, a3, a4, a5, a6, a7, a8,
            eps, map, closure, invariance, properties, solver, cells, refine, control, points, trials, g, f, d, gamma,
            initial, v, grid, left, right)
    }

    /// Reject a config file written for another command.
    pub fn check_command(&self, command: &str) -> Result<(), CliError> {
        match &self.command {
            Some(c) if c != command => {
                Err(CliError::Config(format!("config is for command '{c}', running '{command}'")))
            }
            _ => Ok(()),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn geometry(&self) -> Result<Geometry, CliError> {
        self.n.as_ref().map_or(Ok(Geometry::Symbolic), GeometryValue::geometry)
    }

    /// Literal geometry exponent for numerical runs (default planar).
    pub fn literal_n(&self) -> Result<u32, CliError> {
        match self.n.as_ref().map(GeometryValue::geometry).transpose()? {
            None => Ok(0),
            Some(Geometry::Literal(k)) => Ok(k as u32),
            Some(Geometry::Symbolic) => {
                Err(CliError::Config("numerical runs need a literal geometry 0, 1 or 2".into()))
            }
        }
    }

    pub fn case_id(&self) -> Result<Option<char>, CliError> {
        let Some(text) = &self.case else { return Ok(None) };
        let mut chars = text.trim().chars();
        match (chars.next().map(|c| c.to_ascii_uppercase()), chars.next()) {
            (Some(c @ 'A'..='F'), None) => Ok(Some(c)),
            _ => Err(CliError::Config(format!("case must be one of A-F, got '{text}'"))),
        }
    }

    /// Generator constants with defaults (a1, a3, a5, a6, a7) = 0,
    /// (a2, a4) = (1, 2) and a8 = a6 - a2.
    pub fn params(&self) -> Result<TransformParams, CliError> {
        let a6 = self.a6.unwrap_or(0.0);
        let a2 = self.a2.unwrap_or(1.0);
        let a = [
            self.a1.unwrap_or(0.0),
            a2,
            self.a3.unwrap_or(0.0),
            self.a4.unwrap_or(2.0),
            self.a5.unwrap_or(0.0),
            a6,
            self.a7.unwrap_or(0.0),
            self.a8.unwrap_or(a6 - a2),
        ];
        Ok(TransformParams::new(self.eps.unwrap_or(0.02), a)?.with_map(self.map.unwrap_or_default()))
    }

    /// Grid with the given defaults for unset fields.
    pub fn grid_or(&self, default: &GridSpec, n: u32) -> Result<GridSpec, CliError> {
        let c = self.grid.clone().unwrap_or_default();
        Ok(GridSpec::new(
            (c.r0.unwrap_or(default.r0), c.r1.unwrap_or(default.r1)),
            (c.t0.unwrap_or(default.t0), c.t1.unwrap_or(default.t1)),
            c.nr.unwrap_or(default.nr),
            c.nt.unwrap_or(default.nt),
            n,
        )?)
    }
}

/// `zero-gradient` or a Dirichlet value.
pub fn parse_boundary(text: &str) -> Result<Boundary, String> {
    match text {
        "zero-gradient" | "neumann" => Ok(Boundary::ZeroGradient),
        _ => {
            let value = text.strip_prefix("dirichlet:").unwrap_or(text);
            value
                .parse()
                .map(Boundary::Dirichlet)
                .map_err(|_| format!("expected 'zero-gradient', a number or 'dirichlet:<value>', got '{text}'"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn explicit_values_win_and_grids_merge_per_field() {
        let file: RunConfig = serde_json::from_str(
            r#"{"seed": 4, "eps": 0.1, "n": 2, "grid": {"nr": 10, "nt": 20}, "left": "zero-gradient"}"#,
        )
        .unwrap();
        let flags = RunConfig {
            eps: Some(0.3),
            grid: Some(GridConfig { nr: Some(40), ..GridConfig::default() }),
            ..RunConfig::default()
        };
        let merged = flags.over(file);
        assert_eq!(merged.seed, Some(4));
        assert_eq!(merged.eps, Some(0.3));
        assert_eq!(merged.literal_n().unwrap(), 2);
        let grid = merged.grid.unwrap();
        assert_eq!((grid.nr, grid.nt), (Some(40), Some(20)));
        assert_eq!(merged.left, Some(Boundary::ZeroGradient));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"sede": 1}"#).is_err());
        assert!(serde_json::from_str::<RunConfig>(r#"{"grid": {"dx": 1}}"#).is_err());
    }

    #[test]
    fn boundaries_parse() {
        assert_eq!(parse_boundary("zero-gradient"), Ok(Boundary::ZeroGradient));
        assert_eq!(parse_boundary("0.5"), Ok(Boundary::Dirichlet(0.5)));
        assert_eq!(parse_boundary("dirichlet:-1"), Ok(Boundary::Dirichlet(-1.0)));
        assert!(parse_boundary("open").is_err());
    }

    #[test]
    fn default_params_are_admissible() {
        let p = RunConfig::default().params().unwrap();
        assert_eq!(p.a, [0.0, 1.0, 0.0, 2.0, 0.0, 0.0, 0.0, -1.0]);
        let bad = RunConfig { a5: Some(1.0), ..RunConfig::default() };
        assert!(bad.params().is_err());
    }
}
