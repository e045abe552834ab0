//! VOL1 on-disk format: a JSON header next to a raw little-endian payload.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Grid, Mask3D, Volume3D};
use crate::error::{Error, Result};
use crate::fsutil::write_atomic;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dtype {
    F32,
    U8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vol1Header {
    pub dims: [usize; 3],
    pub spacing: [f64; 3],
    pub origin: [f64; 3],
    pub dtype: Dtype,
    /// Payload path relative to the header's directory.
    pub data: String,
}

fn payload_path(header_path: &Path, header: &Vol1Header) -> PathBuf {
    header_path
        .parent()
        .unwrap_or_else(|| Path::new("."))
        .join(&header.data)
}

fn read_header(path: &Path) -> Result<(Vol1Header, Grid, Vec<u8>)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let header: Vol1Header =
        serde_json::from_str(&text).map_err(|source| Error::Json { path: path.into(), source })?;
    let grid = Grid::new(header.dims, header.spacing, header.origin)
        .map_err(|e| e.context(format!("VOL1 header {}", path.display())))?;
    let data_path = payload_path(path, &header);
    let bytes = fs::read(&data_path).map_err(|e| Error::io(&data_path, e))?;
    let width = match header.dtype {
        Dtype::F32 => 4,
        Dtype::U8 => 1,
    };
    if bytes.len() != grid.len() * width {
        return Err(Error::Data(format!(
            "{}: payload has {} bytes, expected {}",
            data_path.display(),
            bytes.len(),
            grid.len() * width
        )));
    }
    Ok((header, grid, bytes))
}

pub fn read_volume(path: &Path) -> Result<Volume3D> {
    let (header, grid, bytes) = read_header(path)?;
    let values = match header.dtype {
        Dtype::F32 => bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
            .collect(),
        Dtype::U8 => bytes.iter().map(|&b| b as f64).collect(),
    };
    Volume3D::new(grid, values).map_err(|e| e.context(format!("volume {}", path.display())))
}

pub fn read_mask(path: &Path) -> Result<Mask3D> {
    let (header, grid, bytes) = read_header(path)?;
    let occupancy = match header.dtype {
        Dtype::U8 => bytes
            .iter()
            .map(|&b| match b {
                0 => Ok(false),
                1 => Ok(true),
                other => Err(Error::Data(format!(
                    "{}: mask value {other} is not 0/1",
                    path.display()
                ))),
            })
            .collect::<Result<Vec<_>>>()?,
        Dtype::F32 => bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) > 0.5)
            .collect(),
    };
    Mask3D::new(grid, occupancy).map_err(|e| e.context(format!("mask {}", path.display())))
}

fn write_pair(path: &Path, grid: &Grid, dtype: Dtype, payload: &[u8]) -> Result<()> {
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .ok_or_else(|| Error::invalid(format!("bad VOL1 path {}", path.display())))?;
    let data_name = format!("{stem}.raw");
    let header = Vol1Header {
        dims: grid.dims,
        spacing: grid.spacing,
        origin: grid.origin,
        dtype,
        data: data_name,
    };
    write_atomic(&payload_path(path, &header), payload)?;
    let json = serde_json::to_string_pretty(&header).expect("header serializes");
    write_atomic(path, json.as_bytes())
}

/// Writes `path` (JSON header) and a sibling `<stem>.raw` f32 payload.
pub fn write_volume(path: &Path, v: &Volume3D) -> Result<()> {
    let payload: Vec<u8> = v
        .values()
        .iter()
        .flat_map(|&x| (x as f32).to_le_bytes())
        .collect();
    write_pair(path, v.grid(), Dtype::F32, &payload)
}

pub fn write_mask(path: &Path, m: &Mask3D) -> Result<()> {
    let payload: Vec<u8> = m.occupancy().iter().map(|&b| b as u8).collect();
    write_pair(path, m.grid(), Dtype::U8, &payload)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_volume_and_mask() {
        let dir = tempfile::tempdir().unwrap();
        let g = Grid::new([3, 2, 2], [1.0, 0.5, 2.0], [1.0, -2.0, 0.0]).unwrap();
        let v = Volume3D::from_fn(g, |x, y, z| (x + 2 * y + 4 * z) as f64 * 0.5).unwrap();
        let p = dir.path().join("img.json");
        write_volume(&p, &v).unwrap();
        assert_eq!(read_volume(&p).unwrap(), v);

        let m = Mask3D::from_fn(g, |x, _, _| x == 1).unwrap();
        let p = dir.path().join("mask.json");
        write_mask(&p, &m).unwrap();
        assert_eq!(read_mask(&p).unwrap(), m);
        let header: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(&p).unwrap()).unwrap();
        assert_eq!(header["dtype"], "u8");
        assert_eq!(header["data"], "mask.raw");
    }

    #[test]
    fn truncated_payload_is_a_data_error() {
        let dir = tempfile::tempdir().unwrap();
        let g = Grid::new([2, 2, 2], [1.0; 3], [0.0; 3]).unwrap();
        let p = dir.path().join("v.json");
        write_volume(&p, &Volume3D::filled(g, 1.0).unwrap()).unwrap();
        fs::write(dir.path().join("v.raw"), [0u8; 5]).unwrap();
        let err = read_volume(&p).unwrap_err();
        assert_eq!(err.exit_code(), 3);
        let missing = read_volume(&dir.path().join("nope.json")).unwrap_err();
        assert!(missing.to_string().contains("nope.json"));
    }
}
