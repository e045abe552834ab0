//! Single-level separable 3D Haar decomposition.

use super::Volume3D;
use crate::error::{Error, Result};

const INV_SQRT2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// The eight half-resolution subbands of one Haar level.
///
/// Subband index bit `a` (axis 0 = x is the most significant letter) is set
/// when axis `a` took the high-pass branch, so index 0 is LLL and 7 is HHH.
#[derive(Debug, Clone)]
pub struct HaarDecomposition {
    /// Dimensions of each subband (half of the even-cropped input).
    pub half_dims: [usize; 3],
    /// Dimensions of the even-cropped input region.
    pub cropped_dims: [usize; 3],
    pub subbands: [Vec<f64>; 8],
}

/// Runs the orthonormal Haar filter pair along `axis` of a dense block.
fn haar_axis(data: &[f64], dims: [usize; 3], axis: usize) -> (Vec<f64>, Vec<f64>, [usize; 3]) {
    let mut out_dims = dims;
    out_dims[axis] = dims[axis] / 2;
    let n_out = out_dims.iter().product();
    let mut low = vec![0.0; n_out];
    let mut high = vec![0.0; n_out];
    let idx = |p: [usize; 3], d: [usize; 3]| p[0] + d[0] * (p[1] + d[1] * p[2]);
    for z in 0..out_dims[2] {
        for y in 0..out_dims[1] {
            for x in 0..out_dims[0] {
                let q = [x, y, z];
                let mut a = q;
                a[axis] *= 2;
                let mut b = a;
                b[axis] += 1;
                let va = data[idx(a, dims)];
                let vb = data[idx(b, dims)];
                let o = idx(q, out_dims);
                low[o] = (va + vb) * INV_SQRT2;
                high[o] = (va - vb) * INV_SQRT2;
            }
        }
    }
    (low, high, out_dims)
}

/// Decomposes the even-cropped volume into its eight Haar subbands.
///
/// Odd axes drop their last slice before the transform.
pub fn haar_decompose(v: &Volume3D) -> Result<HaarDecomposition> {
    let dims = v.dims();
    if dims.iter().any(|&d| d < 2) {
        return Err(Error::invalid(format!(
            "wavelet filter needs every axis >= 2, got {dims:?}"
        )));
    }
    let cropped = dims.map(|d| d - d % 2);
    let mut base = Vec::with_capacity(cropped.iter().product());
    for z in 0..cropped[2] {
        for y in 0..cropped[1] {
            for x in 0..cropped[0] {
                base.push(v.at(x, y, z));
            }
        }
    }
    let mut level: Vec<(Vec<f64>, [usize; 3])> = vec![(base, cropped)];
    for axis in 0..3 {
        let mut next = Vec::with_capacity(level.len() * 2);
        for (data, d) in &level {
            let (lo, hi, nd) = haar_axis(data, *d, axis);
            next.push((lo, nd));
            next.push((hi, nd));
        }
        level = next;
    }
    // after the loop index bits read (x, y, z) from most to least significant
    let half_dims = level[0].1;
    let mut it = level.into_iter().map(|(d, _)| d);
    let subbands = std::array::from_fn(|_| it.next().unwrap_or_default());
    Ok(HaarDecomposition {
        half_dims,
        cropped_dims: cropped,
        subbands,
    })
}

impl HaarDecomposition {
    /// Sum of squares over every subband coefficient.
    pub fn energy(&self) -> f64 {
        self.subbands.iter().flatten().map(|v| v * v).sum()
    }

    /// Upsamples subband `index` back to `dims` by 2×2×2 repetition,
    /// zero-filling any slice dropped by the even crop.
    pub fn upsample(&self, index: usize, dims: [usize; 3]) -> Vec<f64> {
        let band = &self.subbands[index];
        let h = self.half_dims;
        let mut out = vec![0.0; dims.iter().product()];
        for z in 0..self.cropped_dims[2] {
            for y in 0..self.cropped_dims[1] {
                for x in 0..self.cropped_dims[0] {
                    let src = x / 2 + h[0] * (y / 2 + h[1] * (z / 2));
                    out[x + dims[0] * (y + dims[1] * z)] = band[src];
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::volume::Grid;

    #[test]
    fn parseval_on_odd_dims() {
        let g = Grid::new([5, 4, 7], [1.0; 3], [0.0; 3]).unwrap();
        let v = Volume3D::from_fn(g, |x, y, z| ((x * 13 + y * 7 + z * 3) % 11) as f64 - 4.5).unwrap();
        let h = haar_decompose(&v).unwrap();
        assert_eq!(h.cropped_dims, [4, 4, 6]);
        let mut input = 0.0;
        for z in 0..6 {
            for y in 0..4 {
                for x in 0..4 {
                    input += v.at(x, y, z).powi(2);
                }
            }
        }
        assert!((h.energy() - input).abs() <= 1e-9 * input);
    }

    #[test]
    fn single_axis_detail_ordering() {
        // a pattern varying only along x lands in H?? subbands (index >= 4)
        let g = Grid::new([4, 2, 2], [1.0; 3], [0.0; 3]).unwrap();
        let v = Volume3D::from_fn(g, |x, _, _| if x % 2 == 0 { 1.0 } else { -1.0 }).unwrap();
        let h = haar_decompose(&v).unwrap();
        for (i, band) in h.subbands.iter().enumerate() {
            let e: f64 = band.iter().map(|x| x * x).sum();
            if i == 4 {
                assert!((e - 16.0).abs() < 1e-12);
            } else {
                assert!(e < 1e-24, "band {i} energy {e}");
            }
        }
    }
}
