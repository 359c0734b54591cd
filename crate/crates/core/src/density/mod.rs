//! Log-concave densities on the real line.
//!
//! Two exact representations are supported: the analytic catalog
//! ([`AnalyticDensity`]) and piecewise log-linear densities
//! ([`PiecewiseLogLinear`]). [`DensityHandle`] wraps either one together with
//! an optional, verified center of symmetry.

mod analytic;
mod pll;
mod spec;

pub use analytic::AnalyticDensity;
pub use pll::{PiecewiseLogLinear, Segment};
pub use spec::{DensitySpec, LoadedDensity, PllSpec};

pub(crate) use pll::log_sum_exp;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Tolerance on `|log f(c+d) - log f(c-d)|` when verifying a declared symmetry.
pub const SYMMETRY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum Representation {
    Analytic(AnalyticDensity),
    Pll(PiecewiseLogLinear),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityHandle {
    repr: Representation,
    symmetry_center: Option<f64>,
}

impl From<AnalyticDensity> for DensityHandle {
    fn from(a: AnalyticDensity) -> Self {
        Self {
            symmetry_center: a.symmetry_center(),
            repr: Representation::Analytic(a),
        }
    }
}

impl From<PiecewiseLogLinear> for DensityHandle {
    fn from(p: PiecewiseLogLinear) -> Self {
        Self {
            repr: Representation::Pll(p),
            symmetry_center: None,
        }
    }
}

impl DensityHandle {
    pub fn representation(&self) -> &Representation {
        &self.repr
    }

    pub fn as_pll(&self) -> Option<&PiecewiseLogLinear> {
        match &self.repr {
            Representation::Pll(p) => Some(p),
            Representation::Analytic(_) => None,
        }
    }

    pub fn as_analytic(&self) -> Option<&AnalyticDensity> {
        match &self.repr {
            Representation::Analytic(a) => Some(a),
            Representation::Pll(_) => None,
        }
    }

    /// Marks the density as symmetric about `center` after checking mirrored
    /// log-density values.
    pub fn declare_symmetric(mut self, center: f64) -> Result<Self> {
        let ok = match &self.repr {
            Representation::Pll(p) => p.is_symmetric_about(center, SYMMETRY_TOL),
            Representation::Analytic(a) => a
                .symmetry_center()
                .is_some_and(|c| (c - center).abs() <= SYMMETRY_TOL * c.abs().max(1.0)),
        };
        if !ok {
            return Err(Error::invalid(format!("density is not symmetric about {center}")));
        }
        self.symmetry_center = Some(center);
        Ok(self)
    }

    pub fn symmetry_center(&self) -> Option<f64> {
        self.symmetry_center
    }

    pub fn family(&self) -> &'static str {
        match &self.repr {
            Representation::Analytic(a) => a.family(),
            Representation::Pll(_) => "pll",
        }
    }

    pub fn log_density(&self, x: f64) -> f64 {
        match &self.repr {
            Representation::Analytic(a) => a.log_density(x),
            Representation::Pll(p) => p.log_density(x),
        }
    }

    pub fn support(&self) -> (f64, f64) {
        match &self.repr {
            Representation::Analytic(a) => a.support(),
            Representation::Pll(_) => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.repr {
            Representation::Analytic(a) => a.breakpoints(),
            Representation::Pll(p) => p.knots().to_vec(),
        }
    }

    /// Location and value of the maximum of the density.
    pub fn mode_and_supnorm(&self) -> (f64, f64) {
        match &self.repr {
            Representation::Analytic(a) => (a.mode(), a.ln_sup().exp()),
            Representation::Pll(p) => (p.mode(), p.ln_sup().exp()),
        }
    }

    /// Density of `c·X + t`. Exact: catalog members stay analytic.
    pub fn affine_image(&self, c: f64, t: f64) -> Result<Self> {
        let repr = match &self.repr {
            Representation::Analytic(a) => Representation::Analytic(a.affine(c, t)?),
            Representation::Pll(p) => Representation::Pll(p.affine(c, t)?),
        };
        let mut out = Self {
            repr,
            symmetry_center: None,
        };
        if let Some(center) = self.symmetry_center {
            out = out.declare_symmetric(c * center + t)?;
        }
        Ok(out)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.repr {
            Representation::Analytic(a) => a.sample(rng),
            Representation::Pll(p) => p.sample(rng),
        }
    }

    pub fn to_spec(&self) -> DensitySpec {
        DensitySpec::from_handle(self)
    }
}

/// Three parameterizations of each catalog family, in a fixed order.
pub fn catalog_members() -> Vec<DensityHandle> {
    let members = [
        AnalyticDensity::gaussian(0.0, 1.0),
        AnalyticDensity::gaussian(-2.5, 0.3),
        AnalyticDensity::gaussian(40.0, 7.0),
        AnalyticDensity::exponential(1.0),
        AnalyticDensity::exponential(0.2),
        AnalyticDensity::exponential(12.0),
        AnalyticDensity::laplace(0.0, 1.0),
        AnalyticDensity::laplace(3.0, 0.25),
        AnalyticDensity::laplace(-10.0, 5.0),
        AnalyticDensity::logistic(0.0, 1.0),
        AnalyticDensity::logistic(1.5, 0.4),
        AnalyticDensity::logistic(-6.0, 3.0),
        AnalyticDensity::uniform(0.0, 1.0),
        AnalyticDensity::uniform(-3.0, 5.0),
        AnalyticDensity::uniform(100.0, 100.5),
        AnalyticDensity::gamma(1.5, 1.0),
        AnalyticDensity::gamma(3.0, 2.0),
        AnalyticDensity::gamma(7.0, 0.5),
    ];
    members
        .into_iter()
        .map(|m| m.expect("catalog parameters are valid").into())
        .collect()
}

/// Counts violations of `log f(θx + (1-θ)y) ≥ θ log f(x) + (1-θ) log f(y) - slack`
/// over `trials` random triples drawn inside the `1e-9` clip interval.
pub fn log_concavity_violations(
    log_density: impl Fn(f64) -> f64,
    range: (f64, f64),
    trials: usize,
    seed: u64,
    slack: f64,
) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = range;
    (0..trials)
        .filter(|_| {
            let x = lo + (hi - lo) * rng.random::<f64>();
            let y = lo + (hi - lo) * rng.random::<f64>();
            let theta: f64 = rng.random();
            let (lx, ly) = (log_density(x), log_density(y));
            if !lx.is_finite() || !ly.is_finite() {
                return false;
            }
            let mid = log_density(theta * x + (1.0 - theta) * y);
            mid < theta * lx + (1.0 - theta) * ly - slack
        })
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pll_laplace_log_density_at_mode() {
        let f: DensityHandle = PiecewiseLogLinear::new(vec![0.0], vec![0.0], 1.0, -1.0).unwrap().into();
        assert!((f.log_density(0.0) - 0.5f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn mode_and_supnorm_examples() {
        let cases = [
            (AnalyticDensity::exponential(1.0).unwrap(), 0.0, 1.0),
            (AnalyticDensity::gaussian(0.0, 1.0).unwrap(), 0.0, 0.398_942_280_4),
            (AnalyticDensity::laplace(0.0, 1.0).unwrap(), 0.0, 0.5),
        ];
        for (a, m, s) in cases {
            let (mode, sup) = DensityHandle::from(a).mode_and_supnorm();
            assert_eq!(mode, m);
            assert!((sup - s).abs() < 1e-10);
        }
    }

    #[test]
    fn declared_symmetry_is_verified() {
        let sym = PiecewiseLogLinear::new(vec![-1.0, 1.0], vec![0.0, 0.0], 2.0, -2.0).unwrap();
        assert!(DensityHandle::from(sym).declare_symmetric(0.0).is_ok());
        let asym = PiecewiseLogLinear::new(vec![-1.0, 1.0], vec![0.0, 0.0], 2.0, -3.0).unwrap();
        assert!(DensityHandle::from(asym.clone()).declare_symmetric(0.0).is_err());
        let e = DensityHandle::from(AnalyticDensity::exponential(1.0).unwrap());
        assert!(e.declare_symmetric(1.0).is_err());
    }

    #[test]
    fn affine_image_moves_symmetry_center() {
        let g = DensityHandle::from(AnalyticDensity::logistic(1.0, 2.0).unwrap());
        let h = g.affine_image(-3.0, 0.5).unwrap();
        assert_eq!(h.symmetry_center(), Some(-2.5));
    }

    #[test]
    fn concavity_check_flags_a_bimodal_log_density() {
        let bimodal = |x: f64| {
            let a = (-0.5 * (x - 3.0) * (x - 3.0)).exp();
            let b = (-0.5 * (x + 3.0) * (x + 3.0)).exp();
            (0.5 * (a + b)).ln()
        };
        assert!(log_concavity_violations(bimodal, (-6.0, 6.0), 2000, 1, 1e-10) > 0);
        let g = AnalyticDensity::gaussian(0.0, 1.0).unwrap();
        assert_eq!(
            log_concavity_violations(|x| g.log_density(x), (-8.0, 8.0), 2000, 1, 1e-10),
            0
        );
    }
}
