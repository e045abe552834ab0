use crate::error::{Error, Result};
use crate::volume::{Grid, Mask3D, Volume3D};

/// Gray-level labels `1..=n_bins` inside a mask, 0 outside.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelVolume {
    pub grid: Grid,
    pub labels: Vec<u32>,
    pub n_bins: u32,
}

impl LabelVolume {
    /// Builds a label volume directly (labels outside `1..=n_bins` are treated as outside).
    pub fn from_labels(grid: Grid, labels: Vec<u32>, n_bins: u32) -> Result<Self> {
        if labels.len() != grid.len() {
            return Err(Error::invalid("label count does not match grid"));
        }
        if labels.iter().any(|&l| l > n_bins) {
            return Err(Error::invalid("label exceeds n_bins"));
        }
        if labels.iter().all(|&l| l == 0) {
            return Err(Error::invalid("label volume has no voxels inside the mask"));
        }
        Ok(LabelVolume { grid, labels, n_bins })
    }

    #[inline]
    pub fn get(&self, p: [usize; 3]) -> u32 {
        self.labels[self.grid.index(p[0], p[1], p[2])]
    }

    pub fn voxel_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l > 0).count()
    }

    pub fn inside(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l > 0)
            .map(|(i, &l)| (i, l))
    }
}

/// Fixed-bin-count discretization over the masked intensity range.
pub fn discretize(v: &Volume3D, m: &Mask3D, n_bins: u32) -> Result<LabelVolume> {
    if n_bins < 2 {
        return Err(Error::invalid(format!("n_bins must be >= 2, got {n_bins}")));
    }
    m.ensure_matches(v)?;
    let vals = v.values();
    let (lo, hi) = m
        .indices()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| {
            (lo.min(vals[i]), hi.max(vals[i]))
        });
    let range = hi - lo;
    let labels = vals
        .iter()
        .zip(m.occupancy())
        .map(|(&x, &inside)| {
            if !inside {
                0
            } else if range <= 0.0 {
                1
            } else {
                let b = (n_bins as f64 * (x - lo) / range).floor() as i64 + 1;
                b.clamp(1, n_bins as i64) as u32
            }
        })
        .collect();
    Ok(LabelVolume {
        grid: *v.grid(),
        labels,
        n_bins,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(vals: &[f64]) -> (Volume3D, Mask3D) {
        let g = Grid::new([vals.len(), 1, 1], [1.0; 3], [0.0; 3]).unwrap();
        (Volume3D::new(g, vals.to_vec()).unwrap(), Mask3D::full(g))
    }

    #[test]
    fn formula_examples() {
        let (v, m) = line(&[7.0, 7.0, 7.0]);
        assert_eq!(discretize(&v, &m, 32).unwrap().labels, vec![1, 1, 1]);
        let (v, m) = line(&[0.0, 1.0, 2.0, 3.0]);
        assert_eq!(discretize(&v, &m, 4).unwrap().labels, vec![1, 2, 3, 4]);
        let (v, m) = line(&[0.0, 10.0]);
        assert_eq!(discretize(&v, &m, 2).unwrap().labels, vec![1, 2]);
        assert!(discretize(&v, &m, 1).is_err());
    }

    #[test]
    fn range_taken_inside_mask_only() {
        let g = Grid::new([4, 1, 1], [1.0; 3], [0.0; 3]).unwrap();
        let v = Volume3D::new(g, vec![-100.0, 0.0, 1.0, 100.0]).unwrap();
        let m = Mask3D::new(g, vec![false, true, true, false]).unwrap();
        assert_eq!(discretize(&v, &m, 2).unwrap().labels, vec![0, 1, 2, 0]);
    }
}
