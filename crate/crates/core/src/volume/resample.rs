use serde::{Deserialize, Serialize};

use super::{Grid, Mask3D, Volume3D};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interpolation {
    Trilinear,
    Nearest,
}

fn target_grid(grid: &Grid, target: [f64; 3]) -> Result<(Grid, [f64; 3])> {
    if target.iter().any(|&t| !(t.is_finite() && t > 0.0)) {
        return Err(Error::invalid(format!(
            "target spacing must be positive, got {target:?}"
        )));
    }
    let mut dims = [1usize; 3];
    let mut ratio = [1.0; 3];
    for a in 0..3 {
        let extent = grid.dims[a] as f64 * grid.spacing[a] / target[a];
        dims[a] = (extent.round() as usize).max(1);
        ratio[a] = target[a] / grid.spacing[a];
    }
    Ok((Grid::new(dims, target, grid.origin)?, ratio))
}

/// Continuous source coordinate of output voxel `i`, clamped into the grid.
#[inline]
fn source_coord(i: usize, ratio: f64, n: usize) -> f64 {
    (i as f64 * ratio).clamp(0.0, (n - 1) as f64)
}

/// Linear weights (lower index, upper index, upper weight) along one axis.
fn axis_weights(n_out: usize, ratio: f64, n_in: usize) -> Vec<(usize, usize, f64)> {
    (0..n_out)
        .map(|i| {
            let c = source_coord(i, ratio, n_in);
            let lo = c.floor() as usize;
            let hi = (lo + 1).min(n_in - 1);
            (lo, hi, c - lo as f64)
        })
        .collect()
}

fn nearest_indices(n_out: usize, ratio: f64, n_in: usize) -> Vec<usize> {
    (0..n_out)
        .map(|i| source_coord(i, ratio, n_in).round() as usize)
        .collect()
}

/// Resamples onto a grid with `target` spacing and the same origin.
///
/// Output voxel `i` samples the input at physical offset `i * target`; samples
/// past the last input voxel are clamped to the edge.
pub fn resample(v: &Volume3D, target: [f64; 3], method: Interpolation) -> Result<Volume3D> {
    let grid = *v.grid();
    let (out_grid, ratio) = target_grid(&grid, target)?;
    let d = out_grid.dims;
    let n = grid.dims;
    let values = match method {
        Interpolation::Nearest => {
            let ix: Vec<_> = (0..3).map(|a| nearest_indices(d[a], ratio[a], n[a])).collect();
            let mut out = Vec::with_capacity(out_grid.len());
            for z in 0..d[2] {
                for y in 0..d[1] {
                    for x in 0..d[0] {
                        out.push(v.at(ix[0][x], ix[1][y], ix[2][z]));
                    }
                }
            }
            out
        }
        Interpolation::Trilinear => {
            let w: Vec<_> = (0..3).map(|a| axis_weights(d[a], ratio[a], n[a])).collect();
            let mut out = Vec::with_capacity(out_grid.len());
            for &(z0, z1, tz) in &w[2] {
                for &(y0, y1, ty) in &w[1] {
                    for &(x0, x1, tx) in &w[0] {
                        let lerp = |a: f64, b: f64, t: f64| if t == 0.0 { a } else { a + (b - a) * t };
                        let c00 = lerp(v.at(x0, y0, z0), v.at(x1, y0, z0), tx);
                        let c10 = lerp(v.at(x0, y1, z0), v.at(x1, y1, z0), tx);
                        let c01 = lerp(v.at(x0, y0, z1), v.at(x1, y0, z1), tx);
                        let c11 = lerp(v.at(x0, y1, z1), v.at(x1, y1, z1), tx);
                        let c0 = lerp(c00, c10, ty);
                        let c1 = lerp(c01, c11, ty);
                        out.push(lerp(c0, c1, tz));
                    }
                }
            }
            out
        }
    };
    Volume3D::new(out_grid, values)
}

/// Nearest-neighbor resampling of a mask; fails if the region vanishes.
pub fn resample_mask(m: &Mask3D, target: [f64; 3]) -> Result<Mask3D> {
    let grid = *m.grid();
    let (out_grid, ratio) = target_grid(&grid, target)?;
    let d = out_grid.dims;
    let ix: Vec<_> = (0..3)
        .map(|a| nearest_indices(d[a], ratio[a], grid.dims[a]))
        .collect();
    Mask3D::from_fn(out_grid, |x, y, z| {
        m.contains(grid.index(ix[0][x], ix[1][y], ix[2][z]))
    })
    .map_err(|_| Error::Data("mask became empty after resampling".into()))
}
