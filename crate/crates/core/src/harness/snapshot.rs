//! Plot-ready CSV snapshots: header `x[,y],u`, one row per cell center.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::mesh::StructuredGrid;

/// CSV text of `field` on `grid`, 17 significant digits.
pub fn snapshot_csv(field: &[f64], grid: &StructuredGrid) -> String {
    let mut s = String::with_capacity(field.len() * 48);
    s.push_str(if grid.dim() == 1 { "x,u\n" } else { "x,y,u\n" });
    for (c, u) in field.iter().enumerate() {
        let [x, y] = grid.center_unchecked(c);
        if grid.dim() == 1 {
            let _ = writeln!(s, "{x:.16e},{u:.16e}");
        } else {
            let _ = writeln!(s, "{x:.16e},{y:.16e},{u:.16e}");
        }
    }
    s
}

pub fn snapshot(field: &[f64], grid: &StructuredGrid, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    std::fs::write(path, snapshot_csv(field, grid))?;
    Ok(())
}

/// Rows of a snapshot file as (coordinates, value).
pub fn read_snapshot(path: &Path) -> Result<Vec<(Vec<f64>, f64)>> {
    let text = std::fs::read_to_string(path)?;
    let mut rows = Vec::new();
    for (k, line) in text.lines().enumerate().skip(1) {
        let nums: std::result::Result<Vec<f64>, _> = line.split(',').map(str::parse).collect();
        let mut nums = nums.map_err(|_| Error::Config(format!("snapshot line {}: bad number", k + 1)))?;
        let u = nums.pop().ok_or_else(|| Error::Config(format!("snapshot line {} is empty", k + 1)))?;
        rows.push((nums, u));
    }
    Ok(rows)
}
