use crate::density::log_sum_exp;
use crate::error::{Error, Result};
use crate::functionals::{Density1d, FunctionalKind, FunctionalMethod, FunctionalValue};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Finite Gaussian mixture. Generally not log-concave; used only to exercise
/// the bounds whose hypotheses allow arbitrary densities.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMixture {
    weights: Vec<f64>,
    means: Vec<f64>,
    sds: Vec<f64>,
    mode: f64,
}

impl GaussianMixture {
    pub fn new(weights: Vec<f64>, means: Vec<f64>, sds: Vec<f64>) -> Result<Self> {
        if weights.is_empty() || weights.len() != means.len() || weights.len() != sds.len() {
            return Err(Error::invalid("mixture needs equally many weights, means and sds"));
        }
        if weights.iter().any(|w| !(*w > 0.0))
            || sds.iter().any(|s| !(*s > 0.0))
            || means.iter().any(|m| !m.is_finite())
        {
            return Err(Error::invalid("mixture weights and sds must be positive, means finite"));
        }
        let total: f64 = weights.iter().sum();
        let weights = weights.iter().map(|w| w / total).collect();
        let mut out = Self {
            weights,
            means,
            sds,
            mode: 0.0,
        };
        out.mode = out.grid_argmax(out.envelope(8.0));
        Ok(out)
    }

    fn envelope(&self, z: f64) -> (f64, f64) {
        let lo = self
            .means
            .iter()
            .zip(&self.sds)
            .map(|(m, s)| m - z * s)
            .fold(f64::INFINITY, f64::min);
        let hi = self
            .means
            .iter()
            .zip(&self.sds)
            .map(|(m, s)| m + z * s)
            .fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }

    /// Grid search followed by golden-section refinement around the best node.
    fn grid_argmax(&self, (a, b): (f64, f64)) -> f64 {
        const N: usize = 4000;
        let h = (b - a) / N as f64;
        let best = (0..=N)
            .map(|i| a + i as f64 * h)
            .max_by(|x, y| self.log_density(*x).total_cmp(&self.log_density(*y)))
            .unwrap_or(a);
        let (mut lo, mut hi) = ((best - h).max(a), (best + h).min(b));
        let r = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..80 {
            let (x1, x2) = (hi - r * (hi - lo), lo + r * (hi - lo));
            if self.log_density(x1) < self.log_density(x2) {
                lo = x1;
            } else {
                hi = x2;
            }
        }
        0.5 * (lo + hi)
    }
}

impl Density1d for GaussianMixture {
    fn log_density(&self, x: f64) -> f64 {
        log_sum_exp(self.weights.iter().zip(&self.means).zip(&self.sds).map(|((w, m), s)| {
            let z = (x - m) / s;
            w.ln() - LN_SQRT_2PI - s.ln() - 0.5 * z * z
        }))
    }

    fn support(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }

    fn breakpoints(&self) -> Vec<f64> {
        // not kinks, but they keep the quadrature from straddling separated components
        self.means.clone()
    }

    fn mode(&self) -> f64 {
        self.mode
    }

    fn length_scale(&self) -> f64 {
        self.sds.iter().copied().fold(f64::INFINITY, f64::min)
    }

    fn clip_interval(&self, tail_mass: f64) -> (f64, f64) {
        self.envelope((2.0 * (1.0 / tail_mass).ln()).sqrt())
    }

    fn is_log_concave(&self) -> bool {
        false
    }

    fn argmax_on(&self, a: f64, b: f64) -> f64 {
        self.grid_argmax((a, b))
    }

    fn mean(&self) -> Result<FunctionalValue> {
        let m = self.weights.iter().zip(&self.means).map(|(w, m)| w * m).sum();
        Ok(FunctionalValue {
            kind: FunctionalKind::Mean,
            value: m,
            error_estimate: 0.0,
            method: FunctionalMethod::ClosedForm,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::{lp_norm, sigma_alpha, Exponent};

    #[test]
    fn symmetric_mixture_functionals() {
        let mix = GaussianMixture::new(vec![1.0, 1.0], vec![-3.0, 3.0], vec![1.0, 1.0]).unwrap();
        assert!(!mix.is_log_concave());
        // variance of the mixture is 1 + 9
        assert!((sigma_alpha(&mix, 2.0).unwrap().value - 10f64.sqrt()).abs() < 1e-9);
        // ∫f² = ½·(4π)^{-1/2}·(1 + e^{-9})
        let expected = (0.5 * (4.0 * std::f64::consts::PI).powf(-0.5) * (1.0 + (-9.0f64).exp())).sqrt();
        assert!((lp_norm(&mix, Exponent::Finite(2.0)).unwrap().value - expected).abs() < 1e-10);
        assert!((mix.mode().abs() - 3.0).abs() < 1e-3);
    }
}
