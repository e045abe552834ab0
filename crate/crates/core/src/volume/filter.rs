use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{haar_decompose, Volume3D};
use crate::error::{Error, Result};

/// One of the eight single-level Haar subbands; letters are (x, y, z).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum HaarSubband {
    LLL,
    LLH,
    LHL,
    LHH,
    HLL,
    HLH,
    HHL,
    HHH,
}

impl HaarSubband {
    pub const ALL: [HaarSubband; 8] = [
        HaarSubband::LLL,
        HaarSubband::LLH,
        HaarSubband::LHL,
        HaarSubband::LHH,
        HaarSubband::HLL,
        HaarSubband::HLH,
        HaarSubband::HHL,
        HaarSubband::HHH,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        ["LLL", "LLH", "LHL", "LHH", "HLL", "HLH", "HHL", "HHH"][self.index()]
    }
}

/// Image filter producing a derived feature class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FilterSpec {
    Original,
    Square,
    Squareroot,
    Logarithm,
    Exponential,
    Gradient,
    /// Laplacian of Gaussian with `sigma` in mm (1, 2 or 3).
    LogSigma { sigma: f64 },
    Wavelet { subband: HaarSubband },
}

pub const LOG_SIGMAS: [f64; 3] = [1.0, 2.0, 3.0];

impl FilterSpec {
    /// Every filter of the default catalogue, in catalogue order.
    pub fn all() -> Vec<FilterSpec> {
        let mut out = vec![
            FilterSpec::Original,
            FilterSpec::Square,
            FilterSpec::Squareroot,
            FilterSpec::Logarithm,
            FilterSpec::Exponential,
            FilterSpec::Gradient,
        ];
        out.extend(LOG_SIGMAS.iter().map(|&sigma| FilterSpec::LogSigma { sigma }));
        out.extend(HaarSubband::ALL.iter().map(|&subband| FilterSpec::Wavelet { subband }));
        out
    }

    pub fn validate(&self) -> Result<()> {
        if let FilterSpec::LogSigma { sigma } = self {
            if !LOG_SIGMAS.contains(sigma) {
                return Err(Error::invalid(format!(
                    "log sigma must be one of {LOG_SIGMAS:?} mm, got {sigma}"
                )));
            }
        }
        Ok(())
    }

    /// Stable label used in feature names and CSV headers.
    pub fn label(&self) -> String {
        match self {
            FilterSpec::Original => "original".into(),
            FilterSpec::Square => "square".into(),
            FilterSpec::Squareroot => "squareroot".into(),
            FilterSpec::Logarithm => "logarithm".into(),
            FilterSpec::Exponential => "exponential".into(),
            FilterSpec::Gradient => "gradient".into(),
            FilterSpec::LogSigma { sigma } => format!("log-sigma-{sigma:.0}mm"),
            FilterSpec::Wavelet { subband } => format!("wavelet-{}", subband.label()),
        }
    }
}

impl fmt::Display for FilterSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for FilterSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let spec = match s {
            "original" => FilterSpec::Original,
            "square" => FilterSpec::Square,
            "squareroot" => FilterSpec::Squareroot,
            "logarithm" => FilterSpec::Logarithm,
            "exponential" => FilterSpec::Exponential,
            "gradient" => FilterSpec::Gradient,
            _ => {
                if let Some(rest) = s.strip_prefix("log-sigma-").and_then(|r| r.strip_suffix("mm")) {
                    let sigma: f64 = rest
                        .parse()
                        .map_err(|_| Error::invalid(format!("bad log sigma in filter '{s}'")))?;
                    let spec = FilterSpec::LogSigma { sigma };
                    spec.validate()?;
                    spec
                } else if let Some(band) = s.strip_prefix("wavelet-") {
                    let subband = HaarSubband::ALL
                        .into_iter()
                        .find(|b| b.label() == band)
                        .ok_or_else(|| Error::invalid(format!("unknown wavelet subband '{band}'")))?;
                    FilterSpec::Wavelet { subband }
                } else {
                    return Err(Error::invalid(format!("unknown filter '{s}'")));
                }
            }
        };
        Ok(spec)
    }
}

fn max_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Applies `spec` to the whole volume; the output shares the input grid.
pub fn apply_filter(v: &Volume3D, spec: FilterSpec) -> Result<Volume3D> {
    spec.validate()?;
    let vals = v.values();
    match spec {
        FilterSpec::Original => Ok(v.clone()),
        FilterSpec::Square => {
            // (x / sqrt(M))^2 keeps the peak magnitude at M
            let m = max_abs(vals);
            let c = if m > 0.0 { 1.0 / m } else { 0.0 };
            v.with_values(vals.iter().map(|x| c * x * x).collect())
        }
        FilterSpec::Squareroot => {
            let m = max_abs(vals);
            let c = m.sqrt();
            v.with_values(vals.iter().map(|x| c * x.abs().sqrt() * x.signum()).collect())
        }
        FilterSpec::Logarithm => {
            v.with_values(vals.iter().map(|x| (x.abs() + 1.0).ln() * sign(*x)).collect())
        }
        FilterSpec::Exponential => {
            // exponent rate chosen so the output peak is 1 + M
            let m = max_abs(vals);
            let s = if m > 0.0 { (1.0 + m).ln() / m } else { 1.0 };
            v.with_values(vals.iter().map(|x| (x.abs() * s).exp()).collect())
        }
        FilterSpec::Gradient => gradient_magnitude(v),
        FilterSpec::LogSigma { sigma } => laplacian_of_gaussian(v, sigma),
        FilterSpec::Wavelet { subband } => {
            let h = haar_decompose(v)?;
            v.with_values(h.upsample(subband.index(), v.dims()))
        }
    }
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn gradient_magnitude(v: &Volume3D) -> Result<Volume3D> {
    let d = v.dims();
    if d.iter().any(|&n| n < 2) {
        return Err(Error::invalid(format!(
            "gradient filter needs every axis >= 2, got {d:?}"
        )));
    }
    let sp = v.spacing();
    let grid = *v.grid();
    let mut out = Vec::with_capacity(grid.len());
    for z in 0..d[2] {
        for y in 0..d[1] {
            for x in 0..d[0] {
                let p = [x, y, z];
                let mut sq = 0.0;
                for a in 0..3 {
                    let mut lo = p;
                    let mut hi = p;
                    if p[a] > 0 {
                        lo[a] -= 1;
                    }
                    if p[a] + 1 < d[a] {
                        hi[a] += 1;
                    }
                    let h = (hi[a] - lo[a]) as f64 * sp[a];
                    let g = (v.at(hi[0], hi[1], hi[2]) - v.at(lo[0], lo[1], lo[2])) / h;
                    sq += g * g;
                }
                out.push(sq.sqrt());
            }
        }
    }
    v.with_values(out)
}

fn gaussian_kernel(sigma_vox: f64) -> Vec<f64> {
    let radius = (4.0 * sigma_vox).ceil() as isize;
    let mut k: Vec<f64> = (-radius..=radius)
        .map(|i| (-(i * i) as f64 / (2.0 * sigma_vox * sigma_vox)).exp())
        .collect();
    let s: f64 = k.iter().sum();
    k.iter_mut().for_each(|w| *w /= s);
    k
}

/// Convolves along `axis` with edge replication.
fn convolve_axis(data: &[f64], dims: [usize; 3], axis: usize, kernel: &[f64]) -> Vec<f64> {
    let r = (kernel.len() / 2) as isize;
    let n = dims[axis] as isize;
    let stride = match axis {
        0 => 1,
        1 => dims[0],
        _ => dims[0] * dims[1],
    };
    let mut out = vec![0.0; data.len()];
    for (idx, o) in out.iter_mut().enumerate() {
        let pos = ((idx / stride) % dims[axis]) as isize;
        let base = idx as isize - pos * stride as isize;
        let mut acc = 0.0;
        for (k, w) in kernel.iter().enumerate() {
            let q = (pos + k as isize - r).clamp(0, n - 1);
            acc += w * data[(base + q * stride as isize) as usize];
        }
        *o = acc;
    }
    out
}

fn laplacian_of_gaussian(v: &Volume3D, sigma_mm: f64) -> Result<Volume3D> {
    let d = v.dims();
    let sp = v.spacing();
    let mut data = v.values().to_vec();
    for a in 0..3 {
        if d[a] > 1 {
            data = convolve_axis(&data, d, a, &gaussian_kernel(sigma_mm / sp[a]));
        }
    }
    let grid = *v.grid();
    let mut out = Vec::with_capacity(grid.len());
    for z in 0..d[2] {
        for y in 0..d[1] {
            for x in 0..d[0] {
                let p = [x, y, z];
                let c = data[grid.index(x, y, z)];
                let mut lap = 0.0;
                for a in 0..3 {
                    let mut lo = p;
                    let mut hi = p;
                    lo[a] = p[a].saturating_sub(1);
                    hi[a] = (p[a] + 1).min(d[a] - 1);
                    let fl = data[grid.index(lo[0], lo[1], lo[2])];
                    let fh = data[grid.index(hi[0], hi[1], hi[2])];
                    lap += (fl + fh - 2.0 * c) / (sp[a] * sp[a]);
                }
                out.push(lap);
            }
        }
    }
    v.with_values(out)
}
