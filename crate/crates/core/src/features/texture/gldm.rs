use super::{neighbors_26, SizeMatrix};
use crate::features::discretize::LabelVolume;

/// Dependence counts with α = 0: for each voxel, 1 + the number of
/// 26-neighbors inside the mask sharing its gray level.
pub fn gldm(labels: &LabelVolume) -> SizeMatrix {
    let g = labels.grid;
    let mut m = SizeMatrix::new(labels.n_bins as usize, 27, labels.voxel_count(), 1);
    for (idx, level) in labels.inside() {
        let p = g.coords(idx);
        let dependent = neighbors_26()
            .filter_map(|d| g.offset(p, d))
            .filter(|&q| labels.get(q) == level)
            .count();
        m.add(level, dependent + 1);
    }
    m
}
