//! JSON model specification:
//! `{"family": "fgn|arfima0d0|generic", "params": {...}, "box": {...}}`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{HSpec, SpectralModel, Theta};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpecFile {
    pub family: String,
    pub params: ParamsFile,
    /// Coordinate name → `[lower, upper]`. Missing coordinates keep their defaults.
    #[serde(rename = "box", default, skip_serializing_if = "BTreeMap::is_empty")]
    pub bounds: BTreeMap<String, [f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
    /// Hurst index; fGn only, alternative to `d`.
    #[serde(rename = "H", default, skip_serializing_if = "Option::is_none")]
    pub hurst: Option<f64>,
    #[serde(default = "one")]
    pub sigma2: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<HSpecFile>,
}

/// Polynomial in `cos x`; coefficients listed in `free` become parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HSpecFile {
    pub coeffs: Vec<f64>,
    pub lower_bound: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub free: Vec<usize>,
}

fn one() -> f64 {
    1.0
}

impl ModelSpecFile {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    /// Builds the model and the nominal θ the file describes.
    pub fn build<T: Scalar>(&self) -> Result<(SpectralModel<T>, Theta<T>)> {
        let p = &self.params;
        let d = match (self.family.as_str(), p.d, p.hurst) {
            (_, Some(_), Some(_)) => {
                return Err(Error::Parameter("give either d or H, not both".into()))
            }
            ("fgn", None, Some(h)) => h - 0.5,
            (_, None, Some(_)) => return Err(Error::Parameter("H is only valid for fgn".into())),
            (_, Some(d), None) => d,
            (_, None, None) => return Err(Error::Parameter("params.d (or H for fgn) is required".into())),
        };
        let sigma2 = T::lit(p.sigma2);
        let mut nominal = vec![T::lit(d)];
        let model = match self.family.as_str() {
            "fgn" => SpectralModel::fgn(sigma2)?,
            "arfima0d0" => SpectralModel::arfima0d0(sigma2)?,
            "generic" => {
                let hf = p.h.as_ref().map_or_else(
                    || HSpecFile { coeffs: vec![1.0], lower_bound: 1.0, free: Vec::new() },
                    Clone::clone,
                );
                let h = HSpec::new(
                    hf.coeffs.iter().map(|&c| T::lit(c)).collect(),
                    hf.free.clone(),
                    T::lit(hf.lower_bound),
                )?;
                let mut free_bounds = Vec::new();
                for &j in &hf.free {
                    let name = format!("c{j}");
                    let [lo, hi] = self.bounds.get(&name).copied().ok_or_else(|| {
                        Error::Parameter(format!("box for free coefficient {name} is required"))
                    })?;
                    free_bounds.push((T::lit(lo), T::lit(hi)));
                    nominal.push(T::lit(hf.coeffs[j]));
                }
                SpectralModel::generic(h, sigma2, &free_bounds)?
            }
            other => return Err(Error::Parameter(format!("unknown family {other:?}"))),
        };
        if self.family != "generic" && p.h.is_some() {
            return Err(Error::Parameter("h is only valid for the generic family".into()));
        }
        let names = model.bounds().names().to_vec();
        for key in self.bounds.keys() {
            if !names.contains(key) {
                return Err(Error::Parameter(format!("box names unknown coordinate {key:?}")));
            }
        }
        let mut lower = model.bounds().lower().to_vec();
        let mut upper = model.bounds().upper().to_vec();
        for (i, n) in names.iter().enumerate() {
            if let Some(&[lo, hi]) = self.bounds.get(n) {
                lower[i] = T::lit(lo);
                upper[i] = T::lit(hi);
            }
        }
        let model = model.with_bounds(lower, upper)?;
        let theta = model.theta(&nominal)?;
        Ok((model, theta))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_each_family() {
        let f = ModelSpecFile::from_json(r#"{"family":"fgn","params":{"H":0.7}}"#).unwrap();
        let (m, th) = f.build::<f64>().unwrap();
        assert!((th.d() - 0.2).abs() < 1e-15);
        assert_eq!(m.sigma2(), 1.0);

        let a = ModelSpecFile::from_json(
            r#"{"family":"arfima0d0","params":{"d":0.0,"sigma2":2.0},"box":{"d":[0.0,0.45]}}"#,
        )
        .unwrap();
        let (m, th) = a.build::<f64>().unwrap();
        assert_eq!(th.d(), 0.0);
        assert_eq!(m.bounds().upper()[0], 0.45);

        let g = ModelSpecFile::from_json(
            r#"{"family":"generic","params":{"d":0.25,"h":{"coeffs":[1.0,0.3],"lower_bound":0.5,"free":[1]}},
                "box":{"c1":[0.0,0.4]}}"#,
        )
        .unwrap();
        let (m, th) = g.build::<f64>().unwrap();
        assert_eq!(m.dim(), 2);
        assert_eq!(th.values(), &[0.25, 0.3]);
    }

    #[test]
    fn rejects_inconsistent_files() {
        for bad in [
            r#"{"family":"arfima0d0","params":{"H":0.7}}"#,
            r#"{"family":"fgn","params":{"H":0.7,"d":0.2}}"#,
            r#"{"family":"arma","params":{"d":0.2}}"#,
            r#"{"family":"arfima0d0","params":{"d":0.2},"box":{"q":[0,1]}}"#,
            r#"{"family":"generic","params":{"d":0.2,"h":{"coeffs":[1.0,0.3],"lower_bound":0.5,"free":[1]}}}"#,
            r#"{"family":"arfima0d0","params":{"d":0.6}}"#,
        ] {
            let parsed = ModelSpecFile::from_json(bad).unwrap();
            assert!(parsed.build::<f64>().is_err(), "{bad}");
        }
        assert!(ModelSpecFile::from_json(r#"{"family":"fgn","params":{},"extra":1}"#).is_err());
    }
}
