//! Gray-level texture matrices and their IBSI-style features.

mod glcm;
mod gldm;
mod glrlm;
mod glszm;
mod ngtdm;
mod size_stats;

pub use glcm::{glcm, Glcm};
pub use gldm::gldm;
pub use glrlm::glrlm;
pub use glszm::glszm;
pub use ngtdm::{ngtdm, Ngtdm};
pub use size_stats::SizeMatrix;

use super::{discretize::LabelVolume, Family, FeatureVector};
use crate::error::{Error, Result};

/// The 13 unique directions of the 26-neighborhood (one of each ± pair).
pub const DIRECTIONS_13: [[isize; 3]; 13] = [
    [1, 0, 0],
    [0, 1, 0],
    [0, 0, 1],
    [1, 1, 0],
    [1, -1, 0],
    [1, 0, 1],
    [1, 0, -1],
    [0, 1, 1],
    [0, 1, -1],
    [1, 1, 1],
    [1, 1, -1],
    [1, -1, 1],
    [1, -1, -1],
];

/// All 26 neighbor offsets.
pub(crate) fn neighbors_26() -> impl Iterator<Item = [isize; 3]> {
    DIRECTIONS_13
        .iter()
        .flat_map(|d| [*d, [-d[0], -d[1], -d[2]]])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TextureKind {
    Glcm,
    Glrlm,
    Glszm,
    Gldm,
    Ngtdm,
}

impl TextureKind {
    pub const ALL: [TextureKind; 5] = [
        TextureKind::Glcm,
        TextureKind::Glrlm,
        TextureKind::Glszm,
        TextureKind::Gldm,
        TextureKind::Ngtdm,
    ];

    pub fn family(self) -> Family {
        match self {
            TextureKind::Glcm => Family::Glcm,
            TextureKind::Glrlm => Family::Glrlm,
            TextureKind::Glszm => Family::Glszm,
            TextureKind::Gldm => Family::Gldm,
            TextureKind::Ngtdm => Family::Ngtdm,
        }
    }
}

/// Offsets used by the directional matrices (GLCM distance 1, GLRLM).
#[derive(Debug, Clone)]
pub struct TextureParams {
    pub directions: Vec<[isize; 3]>,
}

impl Default for TextureParams {
    fn default() -> Self {
        TextureParams {
            directions: DIRECTIONS_13.to_vec(),
        }
    }
}

#[derive(Debug, Clone)]
pub enum TextureMatrix {
    Glcm(Glcm),
    Glrlm(SizeMatrix),
    Glszm(SizeMatrix),
    Gldm(SizeMatrix),
    Ngtdm(Ngtdm),
}

pub fn texture_matrix(
    kind: TextureKind,
    labels: &LabelVolume,
    params: &TextureParams,
) -> Result<TextureMatrix> {
    if labels.voxel_count() == 0 {
        return Err(Error::invalid("texture matrix of an empty mask"));
    }
    Ok(match kind {
        TextureKind::Glcm => TextureMatrix::Glcm(glcm(labels, &params.directions)),
        TextureKind::Glrlm => TextureMatrix::Glrlm(glrlm(labels, &params.directions)),
        TextureKind::Glszm => TextureMatrix::Glszm(glszm(labels)),
        TextureKind::Gldm => TextureMatrix::Gldm(gldm(labels)),
        TextureKind::Ngtdm => TextureMatrix::Ngtdm(ngtdm(labels)),
    })
}

pub fn texture_features(matrix: &TextureMatrix) -> FeatureVector {
    match matrix {
        TextureMatrix::Glcm(m) => m.features(),
        TextureMatrix::Glrlm(m) => m.features(Family::Glrlm),
        TextureMatrix::Glszm(m) => m.features(Family::Glszm),
        TextureMatrix::Gldm(m) => m.features(Family::Gldm),
        TextureMatrix::Ngtdm(m) => m.features(),
    }
}

/// `-p log2 p` with the 0·log 0 = 0 convention.
#[inline]
pub(crate) fn plogp(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.log2()
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn directions_are_unique_half_space() {
        let all: std::collections::HashSet<_> = neighbors_26().collect();
        assert_eq!(all.len(), 26);
        assert!(!all.contains(&[0, 0, 0]));
    }
}
