//! Catalog of log-concave families with closed-form functionals.

use std::f64::consts::{E, LN_2, PI};

use rand::Rng;
use rand_distr::{Distribution, Gamma as GammaDist, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{digamma, ln_beta, ln_gamma_pos};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// A member of the analytic catalog.
///
/// Exponential and gamma members carry a signed `scale`: the variable is
/// `location + scale·G` with `G` a standard exponential or gamma variate, so
/// reflections stay inside the family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum AnalyticDensity {
    Gaussian { mean: f64, sd: f64 },
    Exponential { location: f64, scale: f64 },
    Laplace { location: f64, scale: f64 },
    Uniform { low: f64, high: f64 },
    Logistic { location: f64, scale: f64 },
    Gamma { shape: f64, location: f64, scale: f64 },
}

fn positive(v: f64, what: &str) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::invalid(format!("{what} must be positive and finite, got {v}")))
    }
}

fn finite(v: f64, what: &str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::invalid(format!("{what} must be finite, got {v}")))
    }
}

impl AnalyticDensity {
    pub fn gaussian(mean: f64, sd: f64) -> Result<Self> {
        Ok(Self::Gaussian {
            mean: finite(mean, "gaussian mean")?,
            sd: positive(sd, "gaussian sd")?,
        })
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        Ok(Self::Exponential {
            location: 0.0,
            scale: 1.0 / positive(rate, "exponential rate")?,
        })
    }

    pub fn laplace(location: f64, scale: f64) -> Result<Self> {
        Ok(Self::Laplace {
            location: finite(location, "laplace location")?,
            scale: positive(scale, "laplace scale")?,
        })
    }

    pub fn uniform(low: f64, high: f64) -> Result<Self> {
        if !(low.is_finite() && high.is_finite() && low < high) {
            return Err(Error::invalid(format!(
                "uniform needs finite low < high, got [{low}, {high}]"
            )));
        }
        Ok(Self::Uniform { low, high })
    }

    pub fn logistic(location: f64, scale: f64) -> Result<Self> {
        Ok(Self::Logistic {
            location: finite(location, "logistic location")?,
            scale: positive(scale, "logistic scale")?,
        })
    }

    /// Gamma with `shape ≥ 1` (the log-concave range) and the given rate.
    pub fn gamma(shape: f64, rate: f64) -> Result<Self> {
        if !(shape.is_finite() && shape >= 1.0) {
            return Err(Error::invalid(format!(
                "gamma shape must be ≥ 1 for log-concavity (x^(k-1) is log-convex for k < 1), got {shape}"
            )));
        }
        Ok(Self::Gamma {
            shape,
            location: 0.0,
            scale: 1.0 / positive(rate, "gamma rate")?,
        })
    }

    /// Re-validates a value that may have been built directly from the enum.
    pub fn validated(self) -> Result<Self> {
        match self {
            Self::Gaussian { mean, sd } => Self::gaussian(mean, sd),
            Self::Exponential { location, scale }
            | Self::Gamma {
                shape: _,
                location,
                scale,
            } if !(location.is_finite() && scale.is_finite() && scale != 0.0) => {
                Err(Error::invalid("location must be finite and scale finite and nonzero"))
            }
            Self::Gamma { shape, .. } if !(shape.is_finite() && shape >= 1.0) => {
                Err(Error::invalid(format!("gamma shape must be ≥ 1, got {shape}")))
            }
            Self::Exponential { .. } | Self::Gamma { .. } => Ok(self),
            Self::Laplace { location, scale } => Self::laplace(location, scale),
            Self::Uniform { low, high } => Self::uniform(low, high),
            Self::Logistic { location, scale } => Self::logistic(location, scale),
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            Self::Gaussian { .. } => "gaussian",
            Self::Exponential { .. } => "exponential",
            Self::Laplace { .. } => "laplace",
            Self::Uniform { .. } => "uniform",
            Self::Logistic { .. } => "logistic",
            Self::Gamma { .. } => "gamma",
        }
    }

    pub fn log_density(&self, x: f64) -> f64 {
        match *self {
            Self::Gaussian { mean, sd } => {
                let z = (x - mean) / sd;
                -0.5 * z * z - sd.ln() - LN_SQRT_2PI
            }
            Self::Exponential { location, scale } => {
                let u = (x - location) / scale;
                if u < 0.0 {
                    f64::NEG_INFINITY
                } else {
                    -u - scale.abs().ln()
                }
            }
            Self::Laplace { location, scale } => -(x - location).abs() / scale - (2.0 * scale).ln(),
            Self::Uniform { low, high } => {
                if x < low || x > high {
                    f64::NEG_INFINITY
                } else {
                    -(high - low).ln()
                }
            }
            Self::Logistic { location, scale } => {
                let z = ((x - location) / scale).abs();
                -z - 2.0 * (-z).exp().ln_1p() - scale.ln()
            }
            Self::Gamma { shape, location, scale } => {
                let u = (x - location) / scale;
                if u < 0.0 {
                    f64::NEG_INFINITY
                } else if u == 0.0 {
                    if shape == 1.0 {
                        -scale.abs().ln()
                    } else {
                        f64::NEG_INFINITY
                    }
                } else {
                    (shape - 1.0) * u.ln() - u - ln_gamma_pos(shape) - scale.abs().ln()
                }
            }
        }
    }

    /// Closure of the support.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            Self::Uniform { low, high } => (low, high),
            Self::Exponential { location, scale } | Self::Gamma { location, scale, .. } => {
                if scale > 0.0 {
                    (location, f64::INFINITY)
                } else {
                    (f64::NEG_INFINITY, location)
                }
            }
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    /// Interior points where the density is not smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        match *self {
            Self::Laplace { location, .. } => vec![location],
            _ => Vec::new(),
        }
    }

    pub fn symmetry_center(&self) -> Option<f64> {
        match *self {
            Self::Gaussian { mean, .. } => Some(mean),
            Self::Laplace { location, .. } | Self::Logistic { location, .. } => Some(location),
            Self::Uniform { low, high } => Some(0.5 * (low + high)),
            _ => None,
        }
    }

    pub fn mode(&self) -> f64 {
        match *self {
            Self::Gaussian { mean, .. } => mean,
            Self::Exponential { location, .. } => location,
            Self::Laplace { location, .. } | Self::Logistic { location, .. } => location,
            Self::Uniform { low, high } => 0.5 * (low + high),
            Self::Gamma { shape, location, scale } => location + (shape - 1.0) * scale,
        }
    }

    /// `ln ‖f‖_∞`.
    pub fn ln_sup(&self) -> f64 {
        match *self {
            Self::Gaussian { sd, .. } => -sd.ln() - LN_SQRT_2PI,
            Self::Exponential { scale, .. } => -scale.abs().ln(),
            Self::Laplace { scale, .. } => -(2.0 * scale).ln(),
            Self::Uniform { low, high } => -(high - low).ln(),
            Self::Logistic { scale, .. } => -(4.0 * scale).ln(),
            Self::Gamma { shape, scale, .. } => {
                let km1 = shape - 1.0;
                let peak = if km1 > 0.0 { km1 * km1.ln() - km1 } else { 0.0 };
                peak - ln_gamma_pos(shape) - scale.abs().ln()
            }
        }
    }

    /// `ln ∫ f^p` for finite `p > 0`.
    pub fn ln_integral_power(&self, p: f64) -> f64 {
        match *self {
            Self::Gaussian { sd, .. } => (1.0 - p) * (sd.ln() + LN_SQRT_2PI) - 0.5 * p.ln(),
            Self::Exponential { scale, .. } => (1.0 - p) * scale.abs().ln() - p.ln(),
            Self::Laplace { scale, .. } => (1.0 - p) * (2.0 * scale).ln() - p.ln(),
            Self::Uniform { low, high } => (1.0 - p) * (high - low).ln(),
            Self::Logistic { scale, .. } => (1.0 - p) * scale.ln() + ln_beta(p, p),
            Self::Gamma { shape, scale, .. } => {
                let a = p * (shape - 1.0) + 1.0;
                (1.0 - p) * scale.abs().ln() + ln_gamma_pos(a) - p * ln_gamma_pos(shape) - a * p.ln()
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Self::Gaussian { mean, .. } => mean,
            Self::Exponential { location, scale } => location + scale,
            Self::Laplace { location, .. } | Self::Logistic { location, .. } => location,
            Self::Uniform { low, high } => 0.5 * (low + high),
            Self::Gamma { shape, location, scale } => location + shape * scale,
        }
    }

    /// Closed-form `σ_α`: every `α > 0` for the gaussian, laplace and uniform
    /// families, `α ∈ {1, 2}` for the rest; `None` otherwise.
    pub fn sigma_alpha(&self, alpha: f64) -> Option<f64> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return None;
        }
        let first = alpha == 1.0;
        if !first && alpha != 2.0 {
            return match *self {
                Self::Gaussian { sd, .. } => Some(
                    sd * ((0.5 * alpha) * LN_2 + ln_gamma_pos(0.5 * (alpha + 1.0)) - 0.5 * PI.ln())
                        .exp()
                        .powf(1.0 / alpha),
                ),
                Self::Laplace { scale, .. } => Some(scale * (ln_gamma_pos(alpha + 1.0) / alpha).exp()),
                Self::Uniform { low, high } => Some(0.5 * (high - low) * (alpha + 1.0).powf(-1.0 / alpha)),
                _ => None,
            };
        }
        Some(match *self {
            Self::Gaussian { sd, .. } => {
                if first {
                    sd * (2.0 / PI).sqrt()
                } else {
                    sd
                }
            }
            Self::Exponential { scale, .. } => {
                if first {
                    2.0 * scale.abs() / E
                } else {
                    scale.abs()
                }
            }
            Self::Laplace { scale, .. } => {
                if first {
                    scale
                } else {
                    std::f64::consts::SQRT_2 * scale
                }
            }
            Self::Uniform { low, high } => {
                let w = high - low;
                if first {
                    w / 4.0
                } else {
                    w / 12f64.sqrt()
                }
            }
            Self::Logistic { scale, .. } => {
                if first {
                    2.0 * LN_2 * scale
                } else {
                    scale * PI / 3f64.sqrt()
                }
            }
            Self::Gamma { shape, scale, .. } => {
                if first {
                    2.0 * scale.abs() * (shape * shape.ln() - shape - ln_gamma_pos(shape)).exp()
                } else {
                    shape.sqrt() * scale.abs()
                }
            }
        })
    }

    /// Differential entropy `-∫ f log f` (natural log).
    pub fn entropy(&self) -> f64 {
        match *self {
            Self::Gaussian { sd, .. } => 0.5 * (2.0 * PI * E).ln() + sd.ln(),
            Self::Exponential { scale, .. } => 1.0 + scale.abs().ln(),
            Self::Laplace { scale, .. } => 1.0 + (2.0 * scale).ln(),
            Self::Uniform { low, high } => (high - low).ln(),
            Self::Logistic { scale, .. } => scale.ln() + 2.0,
            Self::Gamma { shape, scale, .. } => {
                shape + scale.abs().ln() + ln_gamma_pos(shape) + (1.0 - shape) * digamma(shape).expect("shape ≥ 1")
            }
        }
    }

    /// Characteristic width (the standard deviation).
    pub fn length_scale(&self) -> f64 {
        self.sigma_alpha(2.0).expect("closed form at α = 2")
    }

    /// Density of `c·X + t`, staying inside the catalog.
    pub fn affine(&self, c: f64, t: f64) -> Result<Self> {
        if c == 0.0 || !c.is_finite() || !t.is_finite() {
            return Err(Error::domain(format!("affine map needs finite nonzero scale, got {c}")));
        }
        let out = match *self {
            Self::Gaussian { mean, sd } => Self::Gaussian {
                mean: c * mean + t,
                sd: c.abs() * sd,
            },
            Self::Exponential { location, scale } => Self::Exponential {
                location: c * location + t,
                scale: c * scale,
            },
            Self::Laplace { location, scale } => Self::Laplace {
                location: c * location + t,
                scale: c.abs() * scale,
            },
            Self::Uniform { low, high } => {
                let (a, b) = (c * low + t, c * high + t);
                Self::Uniform {
                    low: a.min(b),
                    high: a.max(b),
                }
            }
            Self::Logistic { location, scale } => Self::Logistic {
                location: c * location + t,
                scale: c.abs() * scale,
            },
            Self::Gamma { shape, location, scale } => Self::Gamma {
                shape,
                location: c * location + t,
                scale: c * scale,
            },
        };
        out.validated()
    }

    /// Interval outside of which the mass is at most `tail_mass`.
    pub fn clip_interval(&self, tail_mass: f64) -> (f64, f64) {
        let ln_inv = (1.0 / tail_mass).ln();
        match *self {
            Self::Gaussian { mean, sd } => {
                let z = (2.0 * ln_inv).sqrt();
                (mean - z * sd, mean + z * sd)
            }
            Self::Exponential { location, scale } => oriented(location, location + scale * ln_inv),
            Self::Laplace { location, scale } => (location - scale * ln_inv, location + scale * ln_inv),
            Self::Uniform { low, high } => (low, high),
            Self::Logistic { location, scale } => {
                let z = (2.0 / tail_mass).ln();
                (location - scale * z, location + scale * z)
            }
            Self::Gamma { shape, location, scale } => {
                // Chernoff: P(G > u) ≤ (u/k)^k e^{k-u} for u > k
                let mut u = 2.0 * shape + 1.0;
                while shape * (u / shape).ln() + shape - u > -ln_inv {
                    u *= 1.25;
                }
                oriented(location, location + scale * u)
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Self::Gaussian { mean, sd } => Normal::new(mean, sd).expect("validated").sample(rng),
            Self::Exponential { location, scale } => {
                let u: f64 = rng.random();
                location - scale * (1.0 - u).ln()
            }
            Self::Laplace { location, scale } => {
                let u: f64 = rng.random::<f64>() - 0.5;
                location - scale * u.signum() * (1.0 - 2.0 * u.abs()).ln()
            }
            Self::Uniform { low, high } => low + (high - low) * rng.random::<f64>(),
            Self::Logistic { location, scale } => {
                let u: f64 = rng.random();
                let u = u.max(f64::MIN_POSITIVE);
                location + scale * (u / (1.0 - u)).ln()
            }
            Self::Gamma { shape, location, scale } => {
                location + scale * GammaDist::new(shape, 1.0).expect("validated").sample(rng)
            }
        }
    }

    /// Parameters in the form used by density spec files.
    pub fn params(&self) -> Vec<(&'static str, f64)> {
        match *self {
            Self::Gaussian { mean, sd } => vec![("mean", mean), ("sd", sd)],
            Self::Exponential { location, scale } => vec![
                ("rate", 1.0 / scale.abs()),
                ("location", location),
                ("direction", scale.signum()),
            ],
            Self::Laplace { location, scale } => vec![("location", location), ("scale", scale)],
            Self::Uniform { low, high } => vec![("low", low), ("high", high)],
            Self::Logistic { location, scale } => vec![("location", location), ("scale", scale)],
            Self::Gamma { shape, location, scale } => vec![
                ("shape", shape),
                ("rate", 1.0 / scale.abs()),
                ("location", location),
                ("direction", scale.signum()),
            ],
        }
    }
}

fn oriented(a: f64, b: f64) -> (f64, f64) {
    (a.min(b), a.max(b))
}
