use std::fmt;
use std::path::Path;
use std::str::FromStr;

use ndarray::{Array2, Axis};
use serde::{Deserialize, Serialize};

use super::FeatureName;
use crate::error::{Error, Result};
use crate::fsutil::write_atomic;

/// Provenance tag of a feature block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Block {
    #[serde(rename = "R_init")]
    RInit,
    #[serde(rename = "R_intra")]
    RIntra,
    #[serde(rename = "R_delta")]
    RDelta,
    #[serde(rename = "D_init")]
    DInit,
    #[serde(rename = "D_intra")]
    DIntra,
    #[serde(rename = "D_delta")]
    DDelta,
}

impl Block {
    pub const ALL: [Block; 6] = [
        Block::RInit,
        Block::RIntra,
        Block::RDelta,
        Block::DInit,
        Block::DIntra,
        Block::DDelta,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Block::RInit => "R_init",
            Block::RIntra => "R_intra",
            Block::RDelta => "R_delta",
            Block::DInit => "D_init",
            Block::DIntra => "D_intra",
            Block::DDelta => "D_delta",
        }
    }

    pub fn is_radiomic(self) -> bool {
        matches!(self, Block::RInit | Block::RIntra | Block::RDelta)
    }

    /// CSV file name used for the block in a features directory.
    pub fn file_name(self) -> String {
        format!("{}.csv", self.tag())
    }
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Block {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.replace('Δ', "delta");
        Block::ALL
            .into_iter()
            .find(|b| b.tag() == norm)
            .ok_or_else(|| Error::invalid(format!("unknown block tag '{s}'")))
    }
}

/// One of the nine feature-set scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Scenario {
    RInit,
    RIntra,
    RDelta,
    DInit,
    DIntra,
    DDelta,
    RAll,
    DAll,
    RdAll,
}

impl Scenario {
    pub const ALL: [Scenario; 9] = [
        Scenario::RInit,
        Scenario::RIntra,
        Scenario::RDelta,
        Scenario::DInit,
        Scenario::DIntra,
        Scenario::DDelta,
        Scenario::RAll,
        Scenario::DAll,
        Scenario::RdAll,
    ];

    pub fn blocks(self) -> &'static [Block] {
        use Block::*;
        match self {
            Scenario::RInit => &[RInit],
            Scenario::RIntra => &[RIntra],
            Scenario::RDelta => &[RDelta],
            Scenario::DInit => &[DInit],
            Scenario::DIntra => &[DIntra],
            Scenario::DDelta => &[DDelta],
            Scenario::RAll => &[RInit, RIntra, RDelta],
            Scenario::DAll => &[DInit, DIntra, DDelta],
            Scenario::RdAll => &[RInit, RIntra, RDelta, DInit, DIntra, DDelta],
        }
    }

    /// Human label, e.g. `R_init+R_intra+R_delta`.
    pub fn label(self) -> String {
        self.blocks().iter().map(|b| b.tag()).collect::<Vec<_>>().join("+")
    }

    /// Short file-system friendly name.
    pub fn slug(self) -> &'static str {
        match self {
            Scenario::RInit => "R_init",
            Scenario::RIntra => "R_intra",
            Scenario::RDelta => "R_delta",
            Scenario::DInit => "D_init",
            Scenario::DIntra => "D_intra",
            Scenario::DDelta => "D_delta",
            Scenario::RAll => "R_all",
            Scenario::DAll => "D_all",
            Scenario::RdAll => "RD_all",
        }
    }

    pub fn is_multi_block(self) -> bool {
        self.blocks().len() > 1
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.replace('Δ', "delta").replace(' ', "");
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.slug() == norm || sc.label() == norm)
            .ok_or_else(|| Error::invalid(format!("unknown scenario '{s}'")))
    }
}

impl TryFrom<String> for Scenario {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Scenario> for String {
    fn from(s: Scenario) -> String {
        s.label()
    }
}

/// Column identifier: block tag plus feature name.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ColumnName {
    pub block: Block,
    pub feature: FeatureName,
}

impl fmt::Display for ColumnName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.block.tag(), self.feature)
    }
}

impl FromStr for ColumnName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (tag, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::invalid(format!("malformed column name '{s}'")))?;
        Ok(ColumnName {
            block: tag.parse()?,
            feature: rest.parse()?,
        })
    }
}

impl Serialize for ColumnName {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ColumnName {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Samples × features table with tagged, unique column names.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    sample_ids: Vec<String>,
    columns: Vec<ColumnName>,
    values: Array2<f64>,
}

impl FeatureMatrix {
    pub fn new(sample_ids: Vec<String>, columns: Vec<ColumnName>, values: Array2<f64>) -> Result<Self> {
        if values.nrows() != sample_ids.len() || values.ncols() != columns.len() {
            return Err(Error::invalid(format!(
                "feature matrix shape {:?} does not match {} ids × {} columns",
                values.dim(),
                sample_ids.len(),
                columns.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data("feature matrix contains non-finite values".into()));
        }
        let mut seen = std::collections::HashSet::with_capacity(columns.len());
        if let Some(dup) = columns.iter().find(|c| !seen.insert(*c)) {
            return Err(Error::Data(format!("duplicate feature column '{dup}'")));
        }
        Ok(FeatureMatrix {
            sample_ids,
            columns,
            values,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.sample_ids.len()
    }

    pub fn n_features(&self) -> usize {
        self.columns.len()
    }

    pub fn sample_ids(&self) -> &[String] {
        &self.sample_ids
    }

    pub fn columns(&self) -> &[ColumnName] {
        &self.columns
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    /// Keeps only the listed columns, in the given order.
    pub fn select_columns(&self, idx: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            sample_ids: self.sample_ids.clone(),
            columns: idx.iter().map(|&j| self.columns[j].clone()).collect(),
            values: self.values.select(Axis(1), idx),
        }
    }

    /// Keeps only the listed rows, in the given order.
    pub fn select_rows(&self, idx: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            sample_ids: idx.iter().map(|&i| self.sample_ids[i].clone()).collect(),
            columns: self.columns.clone(),
            values: self.values.select(Axis(0), idx),
        }
    }

    /// Concatenates blocks side by side; all must share the same sample ids.
    pub fn hconcat(parts: &[&FeatureMatrix]) -> Result<FeatureMatrix> {
        let first = parts
            .first()
            .ok_or_else(|| Error::invalid("no feature blocks to concatenate"))?;
        for p in &parts[1..] {
            if p.sample_ids != first.sample_ids {
                let offenders: Vec<_> = p
                    .sample_ids
                    .iter()
                    .zip(&first.sample_ids)
                    .filter(|(a, b)| a != b)
                    .map(|(a, b)| format!("{b}≠{a}"))
                    .take(5)
                    .collect();
                return Err(Error::Data(format!(
                    "sample ids differ across feature blocks ({} vs {} rows; first mismatches: {})",
                    first.n_samples(),
                    p.n_samples(),
                    offenders.join(", ")
                )));
            }
        }
        let views: Vec<_> = parts.iter().map(|p| p.values.view()).collect();
        let values = ndarray::concatenate(Axis(1), &views)
            .map_err(|e| Error::invalid(format!("cannot concatenate blocks: {e}")))?;
        let columns = parts.iter().flat_map(|p| p.columns.iter().cloned()).collect();
        FeatureMatrix::new(first.sample_ids.clone(), columns, values)
    }

    pub fn to_csv_string(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["sample_id".to_string()];
        header.extend(self.columns.iter().map(|c| c.to_string()));
        w.write_record(&header).expect("in-memory csv");
        for (i, id) in self.sample_ids.iter().enumerate() {
            let mut rec = vec![id.clone()];
            rec.extend(self.values.row(i).iter().map(|v| format!("{v}")));
            w.write_record(&rec).expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf8 csv")
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_csv_string().as_bytes())
    }

    pub fn read_csv(path: &Path) -> Result<FeatureMatrix> {
        let csv_err = |source| Error::Csv { path: path.into(), source };
        let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
        let header = r.headers().map_err(csv_err)?.clone();
        if header.get(0) != Some("sample_id") {
            return Err(Error::Data(format!(
                "{}: first column must be sample_id",
                path.display()
            )));
        }
        let columns = header
            .iter()
            .skip(1)
            .map(|h| h.parse::<ColumnName>())
            .collect::<Result<Vec<_>>>()
            .map_err(|e| e.context(path.display().to_string()))?;
        let mut ids = Vec::new();
        let mut flat = Vec::new();
        for (row, rec) in r.records().enumerate() {
            let rec = rec.map_err(csv_err)?;
            ids.push(rec.get(0).unwrap_or_default().to_string());
            for (j, field) in rec.iter().skip(1).enumerate() {
                let v: f64 = field.trim().parse().map_err(|_| {
                    Error::Data(format!(
                        "{}: row {} column {}: '{field}' is not a number",
                        path.display(),
                        row + 1,
                        j + 1
                    ))
                })?;
                flat.push(v);
            }
        }
        let values = Array2::from_shape_vec((ids.len(), columns.len()), flat)
            .map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
        FeatureMatrix::new(ids, columns, values).map_err(|e| e.context(path.display().to_string()))
    }
}

pub fn write_labels_csv(path: &Path, ids: &[String], labels: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["sample_id", "relative_gtv"]).expect("in-memory csv");
    for (id, y) in ids.iter().zip(labels) {
        w.write_record([id.clone(), format!("{y}")]).expect("in-memory csv");
    }
    write_atomic(path, &w.into_inner().expect("in-memory csv"))
}

pub fn read_labels_csv(path: &Path) -> Result<(Vec<String>, Vec<f64>)> {
    let csv_err = |source| Error::Csv { path: path.into(), source };
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let mut ids = Vec::new();
    let mut ys = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        let id = rec.get(0).unwrap_or_default().to_string();
        let y: f64 = rec
            .get(1)
            .and_then(|s| s.trim().parse().ok())
            .filter(|y: &f64| y.is_finite())
            .ok_or_else(|| Error::Data(format!("{}: bad label for '{id}'", path.display())))?;
        ids.push(id);
        ys.push(y);
    }
    Ok((ids, ys))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::Family;
    use ndarray::array;

    fn col(block: Block, f: &str) -> ColumnName {
        ColumnName {
            block,
            feature: FeatureName {
                filter: "wavelet-HLH".into(),
                family: Family::Glcm,
                feature: f.into(),
            },
        }
    }

    #[test]
    fn scenario_parsing() {
        assert_eq!(Scenario::ALL.len(), 9);
        for s in Scenario::ALL {
            assert_eq!(s.slug().parse::<Scenario>().unwrap(), s);
            assert_eq!(s.label().parse::<Scenario>().unwrap(), s);
        }
        assert_eq!("R_init+R_intra+R_Δ".parse::<Scenario>().unwrap(), Scenario::RAll);
        assert_eq!(Scenario::RdAll.blocks().len(), 6);
        assert!("R_init+D_init".parse::<Scenario>().is_err());
    }

    #[test]
    fn csv_roundtrip_and_header() {
        let m = FeatureMatrix::new(
            vec!["a".into(), "b".into()],
            vec![col(Block::RInit, "Autocorrelation"), col(Block::DDelta, "Imc2")],
            array![[0.1, 1e-300], [-2.5, 3.0]],
        )
        .unwrap();
        let text = m.to_csv_string();
        assert!(text.starts_with(
            "sample_id,R_init:wavelet-HLH:glcm:Autocorrelation,D_delta:wavelet-HLH:glcm:Imc2\n"
        ));
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.csv");
        m.write_csv(&p).unwrap();
        assert_eq!(FeatureMatrix::read_csv(&p).unwrap(), m);
    }

    #[test]
    fn rejects_duplicates_and_mismatched_ids() {
        let c = col(Block::RInit, "X");
        assert!(FeatureMatrix::new(vec!["a".into()], vec![c.clone(), c.clone()], array![[1.0, 2.0]]).is_err());
        let a = FeatureMatrix::new(vec!["a".into()], vec![c.clone()], array![[1.0]]).unwrap();
        let b = FeatureMatrix::new(vec!["z".into()], vec![col(Block::RIntra, "X")], array![[1.0]]).unwrap();
        let err = FeatureMatrix::hconcat(&[&a, &b]).unwrap_err();
        assert!(err.to_string().contains("a≠z"), "{err}");
    }
}
