//! JSON density descriptions.
//!
//! ```json
//! {"family": "gaussian", "params": {"mean": 0, "sd": 1}}
//! {"pll": {"knots": [0], "log_values": [0], "left_slope": 1, "right_slope": -1}}
//! ```
//!
//! Piecewise log-linear inputs need not be normalized; the log of their
//! original mass is reported in [`LoadedDensity::log_normalization`].

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{AnalyticDensity, DensityHandle, PiecewiseLogLinear, Representation};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PllSpec {
    pub knots: Vec<f64>,
    pub log_values: Vec<f64>,
    pub left_slope: f64,
    pub right_slope: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensitySpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<BTreeMap<String, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pll: Option<PllSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symmetric_center: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedDensity {
    pub handle: DensityHandle,
    /// `ln` of the mass of the input before normalization (0 for catalog members).
    pub log_normalization: f64,
}

struct Params<'a> {
    family: &'a str,
    map: BTreeMap<String, f64>,
}

impl Params<'_> {
    fn take(&mut self, key: &str, default: Option<f64>) -> Result<f64> {
        match (self.map.remove(key), default) {
            (Some(v), _) => Ok(v),
            (None, Some(d)) => Ok(d),
            (None, None) => Err(Error::Parse(format!("{} requires parameter `{key}`", self.family))),
        }
    }

    fn finish(self) -> Result<()> {
        match self.map.keys().next() {
            Some(k) => Err(Error::Parse(format!("unknown parameter `{k}` for {}", self.family))),
            None => Ok(()),
        }
    }
}

fn direction(v: f64) -> Result<f64> {
    if v == 1.0 || v == -1.0 {
        Ok(v)
    } else {
        Err(Error::Parse(format!("`direction` must be 1 or -1, got {v}")))
    }
}

impl DensitySpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("density spec serializes")
    }

    pub fn catalog(family: &str, params: &[(&str, f64)]) -> Self {
        Self {
            family: Some(family.to_string()),
            params: Some(params.iter().map(|(k, v)| (k.to_string(), *v)).collect()),
            ..Self::default()
        }
    }

    /// Short content hash used to identify a density in reports.
    pub fn digest(&self) -> String {
        let hash = Sha256::digest(self.to_json().as_bytes());
        hex::encode(&hash[..8])
    }

    pub fn load(&self) -> Result<LoadedDensity> {
        let (handle, log_normalization) = match (&self.family, &self.pll) {
            (Some(_), Some(_)) => return Err(Error::Parse("give either `family` or `pll`, not both".into())),
            (None, None) => return Err(Error::Parse("density spec needs `family` or `pll`".into())),
            (None, Some(p)) => {
                if self.params.is_some() {
                    return Err(Error::Parse("`params` only applies to catalog families".into()));
                }
                let pll = PiecewiseLogLinear::new(p.knots.clone(), p.log_values.clone(), p.left_slope, p.right_slope)?;
                let ln = pll.log_normalizer();
                (DensityHandle::from(pll), ln)
            }
            (Some(family), None) => (DensityHandle::from(self.analytic(family)?), 0.0),
        };
        let handle = match self.symmetric_center {
            Some(c) => handle.declare_symmetric(c)?,
            None => handle,
        };
        Ok(LoadedDensity {
            handle,
            log_normalization,
        })
    }

    fn analytic(&self, family: &str) -> Result<AnalyticDensity> {
        let mut p = Params {
            family,
            map: self.params.clone().unwrap_or_default(),
        };
        let a = match family {
            "gaussian" | "normal" => AnalyticDensity::gaussian(p.take("mean", Some(0.0))?, p.take("sd", None)?)?,
            "exponential" => {
                let rate = p.take("rate", None)?;
                let loc = p.take("location", Some(0.0))?;
                let dir = direction(p.take("direction", Some(1.0))?)?;
                AnalyticDensity::exponential(rate)?.affine(dir, loc)?
            }
            "laplace" => AnalyticDensity::laplace(p.take("location", Some(0.0))?, p.take("scale", None)?)?,
            "uniform" => AnalyticDensity::uniform(p.take("low", None)?, p.take("high", None)?)?,
            "logistic" => AnalyticDensity::logistic(p.take("location", Some(0.0))?, p.take("scale", None)?)?,
            "gamma" => {
                let shape = p.take("shape", None)?;
                let rate = p.take("rate", Some(1.0))?;
                let loc = p.take("location", Some(0.0))?;
                let dir = direction(p.take("direction", Some(1.0))?)?;
                AnalyticDensity::gamma(shape, rate)?.affine(dir, loc)?
            }
            other => return Err(Error::Parse(format!("unknown density family `{other}`"))),
        };
        p.finish()?;
        Ok(a)
    }

    pub(super) fn from_handle(h: &DensityHandle) -> Self {
        let mut spec = match h.representation() {
            Representation::Analytic(a) => Self::catalog(a.family(), &a.params()),
            Representation::Pll(p) => Self {
                pll: Some(PllSpec {
                    knots: p.knots().to_vec(),
                    log_values: p.log_values().to_vec(),
                    left_slope: p.left_slope(),
                    right_slope: p.right_slope(),
                }),
                ..Self::default()
            },
        };
        if matches!(h.representation(), Representation::Pll(_)) {
            spec.symmetric_center = h.symmetry_center();
        }
        spec
    }
}
