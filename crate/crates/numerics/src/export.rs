use std::collections::BTreeMap;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::field::Field;
use crate::grid::{BoundarySpec, GridSpec};
use crate::transform::TransformParams;
use crate::NumError;

/// JSON sidecar written next to a field CSV.
#[derive(Clone, Debug, Serialize)]
pub struct FieldMetadata {
    pub grid: GridSpec,
    pub material: String,
    pub boundary: Option<BoundarySpec>,
    pub transform: Option<TransformParams>,
    pub residuals: BTreeMap<String, f64>,
}

impl FieldMetadata {
    pub fn of(field: &Field, boundary: Option<BoundarySpec>) -> Self {
        Self {
            grid: field.grid.clone(),
            material: field.material.clone(),
            boundary,
            transform: field.transform,
            residuals: BTreeMap::new(),
        }
    }
}

/// CSV with header `r,t,phi`, one row per node; clipped nodes are skipped.
pub fn write_csv(field: &Field, path: &Path) -> Result<(), NumError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["r", "t", "phi"])?;
    for k in 0..=field.grid.nt {
        for i in 0..=field.grid.nr {
            if field.is_valid(k, i) {
                let row = [field.grid.r(i), field.grid.t(k), field.get(k, i)];
                w.write_record(row.iter().map(|v| v.to_string()))?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_sidecar(meta: &FieldMetadata, path: &Path) -> Result<(), NumError> {
    let mut file = File::create(path)?;
    serde_json::to_writer_pretty(&mut file, meta)?;
    writeln!(file)?;
    Ok(())
}

/// Write `<stem>.csv` and `<stem>.json` in `dir`.
pub fn export(field: &Field, meta: &FieldMetadata, dir: &Path, stem: &str) -> Result<(), NumError> {
    std::fs::create_dir_all(dir)?;
    write_csv(field, &dir.join(format!("{stem}.csv")))?;
    write_sidecar(meta, &dir.join(format!("{stem}.json")))
}
