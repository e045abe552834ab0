use super::SizeMatrix;
use crate::features::discretize::LabelVolume;

/// Run-length counts summed over `directions`.
pub fn glrlm(labels: &LabelVolume, directions: &[[isize; 3]]) -> SizeMatrix {
    let g = labels.grid;
    let max_len = *g.dims.iter().max().unwrap_or(&1);
    let mut m = SizeMatrix::new(
        labels.n_bins as usize,
        max_len,
        labels.voxel_count(),
        directions.len().max(1),
    );
    for &d in directions {
        let back = [-d[0], -d[1], -d[2]];
        for (idx, level) in labels.inside() {
            let p = g.coords(idx);
            // only start counting at the first voxel of a run
            if let Some(q) = g.offset(p, back) {
                if labels.get(q) == level {
                    continue;
                }
            }
            let mut len = 1;
            let mut cur = p;
            while let Some(q) = g.offset(cur, d) {
                if labels.get(q) != level {
                    break;
                }
                len += 1;
                cur = q;
            }
            m.add(level, len);
        }
    }
    m
}
