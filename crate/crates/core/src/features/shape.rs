use nalgebra::{Matrix3, SymmetricEigen};

use super::{Family, FeatureVector};
use crate::volume::Mask3D;

const FACES: [[isize; 3]; 6] = [
    [1, 0, 0],
    [-1, 0, 0],
    [0, 1, 0],
    [0, -1, 0],
    [0, 0, 1],
    [0, 0, -1],
];

/// Voxel-based shape descriptors of the mask (physical units).
pub fn shape(m: &Mask3D) -> FeatureVector {
    let g = *m.grid();
    let sp = g.spacing;
    let face_area = [sp[1] * sp[2], sp[0] * sp[2], sp[0] * sp[1]];
    let idx = m.indices();
    let n = idx.len() as f64;
    let volume = n * g.voxel_volume();

    let mut area = 0.0;
    let mut boundary = Vec::new();
    let mut centroid = [0.0; 3];
    let pts: Vec<[f64; 3]> = idx
        .iter()
        .map(|&i| {
            let p = g.coords(i);
            let mut exposed = false;
            for d in FACES {
                let open = match g.offset(p, d) {
                    Some(q) => !m.contains(g.index(q[0], q[1], q[2])),
                    None => true,
                };
                if open {
                    exposed = true;
                    let axis = d.iter().position(|&c| c != 0).unwrap_or(0);
                    area += face_area[axis];
                }
            }
            let phys = [0, 1, 2].map(|a| p[a] as f64 * sp[a]);
            if exposed {
                boundary.push(phys);
            }
            for a in 0..3 {
                centroid[a] += phys[a];
            }
            phys
        })
        .collect();
    centroid.iter_mut().for_each(|c| *c /= n);

    let mut cov = Matrix3::<f64>::zeros();
    for p in &pts {
        for a in 0..3 {
            for b in 0..3 {
                cov[(a, b)] += (p[a] - centroid[a]) * (p[b] - centroid[b]);
            }
        }
    }
    cov /= n;
    let mut eig: Vec<f64> = SymmetricEigen::new(cov)
        .eigenvalues
        .iter()
        .map(|&l| l.max(0.0))
        .collect();
    eig.sort_by(|a, b| b.total_cmp(a));
    let (major, minor, least) = (eig[0], eig[1], eig[2]);
    // a single voxel has no preferred axis
    let (elongation, flatness) = if major > 0.0 {
        ((minor / major).sqrt(), (least / major).sqrt())
    } else {
        (1.0, 1.0)
    };

    let mut max_d2 = 0.0f64;
    for (i, a) in boundary.iter().enumerate() {
        for b in &boundary[i + 1..] {
            let d2: f64 = (0..3).map(|k| (a[k] - b[k]).powi(2)).sum();
            max_d2 = max_d2.max(d2);
        }
    }

    let sphericity = (36.0 * std::f64::consts::PI * volume * volume).cbrt() / area;
    let mut out = FeatureVector::new("original", Family::Shape);
    out.push("Elongation", elongation);
    out.push("Flatness", flatness);
    out.push("LeastAxisLength", 4.0 * least.sqrt());
    out.push("MajorAxisLength", 4.0 * major.sqrt());
    out.push("Maximum3DDiameter", max_d2.sqrt());
    out.push("MinorAxisLength", 4.0 * minor.sqrt());
    out.push("Sphericity", sphericity);
    out.push("SurfaceArea", area);
    out.push("SurfaceVolumeRatio", area / volume);
    out.push("VoxelVolume", volume);
    out.into()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::volume::Grid;

    #[test]
    fn cube_and_rod() {
        let g = Grid::new([6, 6, 6], [1.0; 3], [0.0; 3]).unwrap();
        let cube = Mask3D::from_fn(g, |x, y, z| (1..4).contains(&x) && (1..4).contains(&y) && (1..4).contains(&z)).unwrap();
        let f = shape(&cube);
        assert_eq!(f.get("VoxelVolume"), Some(27.0));
        assert_eq!(f.get("SurfaceArea"), Some(54.0));
        assert!((f.get("Elongation").unwrap() - 1.0).abs() < 1e-9);
        assert!((f.get("Maximum3DDiameter").unwrap() - 12f64.sqrt()).abs() < 1e-12);

        let rod = Mask3D::from_fn(g, |x, y, z| y == 2 && z == 2 && x < 5).unwrap();
        let f = shape(&rod);
        assert_eq!(f.get("Elongation"), Some(0.0));
        assert_eq!(f.get("Maximum3DDiameter"), Some(4.0));
    }

    #[test]
    fn anisotropic_spacing_changes_elongation() {
        let g = Grid::new([4, 4, 4], [1.0, 1.0, 2.0], [0.0; 3]).unwrap();
        let m = Mask3D::from_fn(g, |x, y, z| x < 2 && y < 2 && z < 2).unwrap();
        let f = shape(&m);
        assert!((f.get("Elongation").unwrap() - 0.5).abs() < 1e-9);
        assert_eq!(f.get("VoxelVolume"), Some(16.0));
    }
}
