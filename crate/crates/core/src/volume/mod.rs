//! 3D scalar volumes, masks, isotropic resampling and image filters.

mod filter;
pub mod io;
mod resample;
mod wavelet;

pub use filter::{apply_filter, FilterSpec, HaarSubband};
pub use resample::{resample, resample_mask, Interpolation};
pub use wavelet::{haar_decompose, HaarDecomposition};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Grid geometry shared by a volume and its masks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub dims: [usize; 3],
    /// Voxel size in millimeters.
    pub spacing: [f64; 3],
    /// Position of voxel (0,0,0) in millimeters.
    pub origin: [f64; 3],
}

impl Grid {
    pub fn new(dims: [usize; 3], spacing: [f64; 3], origin: [f64; 3]) -> Result<Self> {
        if dims.contains(&0) {
            return Err(Error::invalid(format!("volume dims must be >= 1, got {dims:?}")));
        }
        if spacing.iter().any(|&s| !(s.is_finite() && s > 0.0)) {
            return Err(Error::invalid(format!(
                "voxel spacing must be positive, got {spacing:?}"
            )));
        }
        if origin.iter().any(|o| !o.is_finite()) {
            return Err(Error::invalid(format!("origin must be finite, got {origin:?}")));
        }
        Ok(Grid {
            dims,
            spacing,
            origin,
        })
    }

    pub fn len(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Linear index in x-fastest order.
    #[inline]
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        x + self.dims[0] * (y + self.dims[1] * z)
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let x = idx % self.dims[0];
        let rest = idx / self.dims[0];
        [x, rest % self.dims[1], rest / self.dims[1]]
    }

    /// Neighbor of `p` displaced by `d`, if it lies inside the grid.
    #[inline]
    pub fn offset(&self, p: [usize; 3], d: [isize; 3]) -> Option<[usize; 3]> {
        let mut out = [0usize; 3];
        for a in 0..3 {
            let v = p[a] as isize + d[a];
            if v < 0 || v >= self.dims[a] as isize {
                return None;
            }
            out[a] = v as usize;
        }
        Some(out)
    }

    pub fn voxel_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    fn same_geometry(&self, other: &Grid) -> bool {
        self.dims == other.dims
            && self
                .spacing
                .iter()
                .zip(&other.spacing)
                .all(|(a, b)| (a - b).abs() <= 1e-9 * a.abs().max(1.0))
            && self
                .origin
                .iter()
                .zip(&other.origin)
                .all(|(a, b)| (a - b).abs() <= 1e-6)
    }
}

/// Immutable 3D scalar grid (MRI intensities or dose).
#[derive(Debug, Clone, PartialEq)]
pub struct Volume3D {
    grid: Grid,
    values: Vec<f64>,
}

impl Volume3D {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::invalid(format!(
                "volume has {} values but dims {:?} need {}",
                values.len(),
                grid.dims,
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite voxel value at index {i}")));
        }
        Ok(Volume3D { grid, values })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(usize, usize, usize) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.len());
        for z in 0..grid.dims[2] {
            for y in 0..grid.dims[1] {
                for x in 0..grid.dims[0] {
                    values.push(f(x, y, z));
                }
            }
        }
        Volume3D::new(grid, values)
    }

    pub fn filled(grid: Grid, value: f64) -> Result<Self> {
        Volume3D::new(grid, vec![value; grid.len()])
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dims(&self) -> [usize; 3] {
        self.grid.dims
    }

    pub fn spacing(&self) -> [f64; 3] {
        self.grid.spacing
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize, z: usize) -> f64 {
        self.values[self.grid.index(x, y, z)]
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    pub(crate) fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Volume3D::new(self.grid, values)
    }

    /// Extracts the sub-block starting at `start` with extent `size`.
    pub fn crop(&self, start: [usize; 3], size: [usize; 3]) -> Result<Self> {
        for a in 0..3 {
            if size[a] == 0 || start[a] + size[a] > self.grid.dims[a] {
                return Err(Error::invalid("crop region outside volume"));
            }
        }
        let origin = [0, 1, 2].map(|a| self.grid.origin[a] + start[a] as f64 * self.grid.spacing[a]);
        let grid = Grid::new(size, self.grid.spacing, origin)?;
        Volume3D::from_fn(grid, |x, y, z| self.at(start[0] + x, start[1] + y, start[2] + z))
    }
}

/// Boolean region of interest on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Mask3D {
    grid: Grid,
    occupancy: Vec<bool>,
}

impl Mask3D {
    pub fn new(grid: Grid, occupancy: Vec<bool>) -> Result<Self> {
        if occupancy.len() != grid.len() {
            return Err(Error::invalid(format!(
                "mask has {} voxels but dims {:?} need {}",
                occupancy.len(),
                grid.dims,
                grid.len()
            )));
        }
        if !occupancy.iter().any(|&b| b) {
            return Err(Error::invalid("mask is empty"));
        }
        Ok(Mask3D { grid, occupancy })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(usize, usize, usize) -> bool) -> Result<Self> {
        let mut occ = Vec::with_capacity(grid.len());
        for z in 0..grid.dims[2] {
            for y in 0..grid.dims[1] {
                for x in 0..grid.dims[0] {
                    occ.push(f(x, y, z));
                }
            }
        }
        Mask3D::new(grid, occ)
    }

    /// Mask covering every voxel of `grid`.
    pub fn full(grid: Grid) -> Self {
        Mask3D {
            grid,
            occupancy: vec![true; grid.len()],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn occupancy(&self) -> &[bool] {
        &self.occupancy
    }

    #[inline]
    pub fn contains(&self, idx: usize) -> bool {
        self.occupancy[idx]
    }

    pub fn count(&self) -> usize {
        self.occupancy.iter().filter(|&&b| b).count()
    }

    /// Physical volume of the region in mm³.
    pub fn volume_mm3(&self) -> f64 {
        self.count() as f64 * self.grid.voxel_volume()
    }

    /// Linear indices of the voxels inside the mask, ascending.
    pub fn indices(&self) -> Vec<usize> {
        self.occupancy
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
            .collect()
    }

    pub fn matches(&self, volume: &Volume3D) -> bool {
        self.grid.same_geometry(volume.grid())
    }

    pub fn ensure_matches(&self, volume: &Volume3D) -> Result<()> {
        if self.matches(volume) {
            Ok(())
        } else {
            Err(Error::Data(format!(
                "mask geometry {:?} does not match volume geometry {:?}",
                self.grid,
                volume.grid()
            )))
        }
    }

    /// Inclusive-exclusive bounding box `(start, end)` of the region.
    pub fn bounding_box(&self) -> ([usize; 3], [usize; 3]) {
        let mut lo = [usize::MAX; 3];
        let mut hi = [0usize; 3];
        for idx in self.indices() {
            let p = self.grid.coords(idx);
            for a in 0..3 {
                lo[a] = lo[a].min(p[a]);
                hi[a] = hi[a].max(p[a] + 1);
            }
        }
        (lo, hi)
    }

    pub fn crop(&self, start: [usize; 3], size: [usize; 3]) -> Result<Self> {
        let origin = [0, 1, 2].map(|a| self.grid.origin[a] + start[a] as f64 * self.grid.spacing[a]);
        let grid = Grid::new(size, self.grid.spacing, origin)?;
        Mask3D::from_fn(grid, |x, y, z| {
            self.occupancy[self.grid.index(start[0] + x, start[1] + y, start[2] + z)]
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(d: [usize; 3]) -> Grid {
        Grid::new(d, [1.0; 3], [0.0; 3]).unwrap()
    }

    #[test]
    fn rejects_bad_geometry() {
        assert!(Grid::new([0, 1, 1], [1.0; 3], [0.0; 3]).is_err());
        assert!(Grid::new([1, 1, 1], [1.0, 0.0, 1.0], [0.0; 3]).is_err());
        assert!(Volume3D::new(grid([2, 1, 1]), vec![1.0]).is_err());
        assert!(Volume3D::new(grid([2, 1, 1]), vec![1.0, f64::NAN]).is_err());
        assert!(Mask3D::new(grid([2, 1, 1]), vec![false, false]).is_err());
    }

    #[test]
    fn index_roundtrip() {
        let g = grid([3, 4, 5]);
        for i in 0..g.len() {
            let [x, y, z] = g.coords(i);
            assert_eq!(g.index(x, y, z), i);
        }
    }

    #[test]
    fn bounding_box_and_crop() {
        let g = grid([6, 6, 6]);
        let m = Mask3D::from_fn(g, |x, y, z| (2..4).contains(&x) && y == 1 && z >= 3).unwrap();
        assert_eq!(m.bounding_box(), ([2, 1, 3], [4, 2, 6]));
        let c = m.crop([2, 1, 3], [2, 1, 3]).unwrap();
        assert_eq!(c.count(), 6);
        assert_eq!(c.grid().origin, [2.0, 1.0, 3.0]);
    }
}
