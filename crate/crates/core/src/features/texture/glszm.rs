use super::{neighbors_26, SizeMatrix};
use crate::features::discretize::LabelVolume;

/// Zone-size counts over 26-connected same-level components.
pub fn glszm(labels: &LabelVolume) -> SizeMatrix {
    let g = labels.grid;
    let n_vox = labels.voxel_count();
    let mut m = SizeMatrix::new(labels.n_bins as usize, n_vox.max(1), n_vox, 1);
    let mut seen = vec![false; labels.labels.len()];
    let mut stack = Vec::new();
    for (start, level) in labels.inside() {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let mut size = 0;
        while let Some(idx) = stack.pop() {
            size += 1;
            let p = g.coords(idx);
            for d in neighbors_26() {
                if let Some(q) = g.offset(p, d) {
                    let qi = g.index(q[0], q[1], q[2]);
                    if !seen[qi] && labels.labels[qi] == level {
                        seen[qi] = true;
                        stack.push(qi);
                    }
                }
            }
        }
        m.add(level, size);
    }
    m
}
