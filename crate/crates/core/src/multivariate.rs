//! Densities on ℝⁿ (n ≥ 2) with exact norms and covariances.
//!
//! A [`MultivariateDensity`] is an affine image `y = A x + t` of either a
//! product of one-dimensional catalog/PLL factors or a Gaussian. Norms factor
//! over the product and pick up `|det A|^{1/p - 1}` under the map, so no
//! n-dimensional integration is needed. Monte Carlo in [`mc_validate_norm`]
//! is the independent cross-check.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::density::{AnalyticDensity, DensityHandle, DensitySpec};
use crate::error::{Error, Result};
use crate::functionals::{lp_norm, Density1d, Exponent, FunctionalKind, FunctionalMethod, FunctionalValue};
use crate::inequality::{
    ClaimId, GaussianMixture, InequalityVerdict, VerdictInputs, VerdictRow, EXACT_TOL, QUADRATURE_TOL,
};
use crate::special::{ln_c_n, ln_d_n};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

#[derive(Debug, Clone, PartialEq)]
pub enum MultivariateBase {
    Product(Vec<DensityHandle>),
    Gaussian { mean: DVector<f64>, cov: DMatrix<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultivariateDensity {
    base: MultivariateBase,
    transform: DMatrix<f64>,
    shift: DVector<f64>,
    /// Cholesky factor of the Gaussian base covariance (identity for products).
    chol: DMatrix<f64>,
}

/// Interface shared by the exact families and the non-log-concave fixture.
pub trait NdDensity: Send + Sync {
    fn dim(&self) -> usize;
    fn lp_norm_nd(&self, p: Exponent) -> Result<FunctionalValue>;
    /// `ln |Σ|`.
    fn ln_det_cov(&self) -> Result<f64>;
    fn is_log_concave(&self) -> bool {
        true
    }
}

fn check_dim(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::usage(format!("multivariate densities need n ≥ 2, got {n}")));
    }
    Ok(())
}

impl MultivariateDensity {
    pub fn product(factors: Vec<DensityHandle>) -> Result<Self> {
        let n = factors.len();
        check_dim(n)?;
        Ok(Self {
            base: MultivariateBase::Product(factors),
            transform: DMatrix::identity(n, n),
            shift: DVector::zeros(n),
            chol: DMatrix::identity(n, n),
        })
    }

    pub fn gaussian(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let n = mean.len();
        check_dim(n)?;
        if cov.nrows() != n || cov.ncols() != n {
            return Err(Error::invalid("covariance shape does not match the mean"));
        }
        if (&cov - cov.transpose()).amax() > 1e-12 * cov.amax() {
            return Err(Error::invalid("covariance must be symmetric"));
        }
        let chol = cov
            .clone()
            .cholesky()
            .ok_or_else(|| Error::invalid("covariance must be positive definite"))?
            .l();
        Ok(Self {
            base: MultivariateBase::Gaussian { mean, cov },
            transform: DMatrix::identity(n, n),
            shift: DVector::zeros(n),
            chol,
        })
    }

    pub fn standard_gaussian(n: usize) -> Result<Self> {
        Self::gaussian(DVector::zeros(n), DMatrix::identity(n, n))
    }

    /// Density of `A Y + t` where `Y` has this density.
    pub fn transformed(&self, a: &DMatrix<f64>, t: &DVector<f64>) -> Result<Self> {
        let n = self.dim();
        if a.nrows() != n || a.ncols() != n || t.len() != n {
            return Err(Error::usage("transform shape does not match the dimension"));
        }
        let det = a.determinant();
        if !(det.is_finite() && det.abs() > 1e-300) || a.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("transform must be invertible"));
        }
        let mut out = self.clone();
        out.transform = a * &self.transform;
        out.shift = a * &self.shift + t;
        Ok(out)
    }

    pub fn base(&self) -> &MultivariateBase {
        &self.base
    }

    pub fn transform(&self) -> &DMatrix<f64> {
        &self.transform
    }

    pub fn shift(&self) -> &DVector<f64> {
        &self.shift
    }

    pub fn ln_abs_det_transform(&self) -> f64 {
        self.transform.determinant().abs().ln()
    }

    /// Short label: `gaussian-nd` or `product:<families>`.
    pub fn family(&self) -> String {
        match &self.base {
            MultivariateBase::Gaussian { .. } => "gaussian-nd".into(),
            MultivariateBase::Product(fs) => {
                let names: Vec<&str> = fs.iter().map(|f| f.family()).collect();
                format!("product:{}", names.join("+"))
            }
        }
    }

    fn base_covariance(&self) -> Result<DMatrix<f64>> {
        Ok(match &self.base {
            MultivariateBase::Gaussian { cov, .. } => cov.clone(),
            MultivariateBase::Product(fs) => {
                let vars: Result<Vec<f64>> = fs.iter().map(|f| Ok(f.sigma_alpha(2.0)?.value.powi(2))).collect();
                DMatrix::from_diagonal(&DVector::from_vec(vars?))
            }
        })
    }

    /// `Σ = A Σ_base Aᵀ`.
    pub fn covariance(&self) -> Result<DMatrix<f64>> {
        let c = &self.transform * self.base_covariance()? * self.transform.transpose();
        // symmetrize away rounding in the congruence
        Ok((&c + c.transpose()) * 0.5)
    }

    pub fn mean(&self) -> Result<DVector<f64>> {
        let base = match &self.base {
            MultivariateBase::Gaussian { mean, .. } => mean.clone(),
            MultivariateBase::Product(fs) => {
                let m: Result<Vec<f64>> = fs.iter().map(|f| Ok(f.mean()?.value)).collect();
                DVector::from_vec(m?)
            }
        };
        Ok(&self.transform * base + &self.shift)
    }

    /// Digest of the covariance entries, for reports.
    pub fn sigma_digest(&self) -> Result<String> {
        let cov = self.covariance()?;
        let text = serde_json::to_string(&cov.iter().copied().collect::<Vec<f64>>()).expect("floats serialize");
        Ok(hex::encode(&Sha256::digest(text.as_bytes())[..8]))
    }

    fn sample_base<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        match &self.base {
            MultivariateBase::Product(fs) => DVector::from_iterator(fs.len(), fs.iter().map(|f| f.sample(rng))),
            MultivariateBase::Gaussian { mean, .. } => {
                let z = DVector::from_iterator(mean.len(), (0..mean.len()).map(|_| StandardNormal.sample(rng)));
                mean + &self.chol * z
            }
        }
    }

    fn ln_base_density(&self, x: &DVector<f64>) -> f64 {
        match &self.base {
            MultivariateBase::Product(fs) => fs.iter().zip(x.iter()).map(|(f, &xi)| f.log_density(xi)).sum(),
            MultivariateBase::Gaussian { mean, .. } => {
                let n = mean.len() as f64;
                let d = x - mean;
                let z = self
                    .chol
                    .solve_lower_triangular(&d)
                    .expect("cholesky factor is invertible");
                let ln_det: f64 = self.chol.diagonal().iter().map(|v| v.ln()).sum();
                -0.5 * n * LN_2PI - ln_det - 0.5 * z.norm_squared()
            }
        }
    }

    /// A draw `y` together with `ln F(y)`.
    pub fn sample_with_log_density<R: Rng + ?Sized>(&self, rng: &mut R) -> (DVector<f64>, f64) {
        let x = self.sample_base(rng);
        let l = self.ln_base_density(&x) - self.ln_abs_det_transform();
        (&self.transform * x + &self.shift, l)
    }

    /// `ln F(y)` at an arbitrary point.
    pub fn log_density(&self, y: &DVector<f64>) -> Result<f64> {
        let lu = self.transform.clone().lu();
        let x = lu
            .solve(&(y - &self.shift))
            .ok_or_else(|| Error::domain("transform is singular"))?;
        Ok(self.ln_base_density(&x) - self.ln_abs_det_transform())
    }

    pub fn to_spec(&self) -> MultivariateSpec {
        let base = match &self.base {
            MultivariateBase::Product(fs) => MultivariateBaseSpec::Product {
                factors: fs.iter().map(DensityHandle::to_spec).collect(),
            },
            MultivariateBase::Gaussian { mean, cov } => MultivariateBaseSpec::Gaussian {
                mean: mean.iter().copied().collect(),
                cov: rows(cov),
            },
        };
        let n = self.dim();
        MultivariateSpec {
            base,
            transform: (self.transform != DMatrix::identity(n, n)).then(|| rows(&self.transform)),
            shift: (self.shift != DVector::zeros(n)).then(|| self.shift.iter().copied().collect()),
        }
    }
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn combine_methods(values: &[FunctionalValue]) -> FunctionalMethod {
    values
        .iter()
        .map(|v| v.method)
        .fold(FunctionalMethod::ClosedForm, FunctionalMethod::combine)
}

impl NdDensity for MultivariateDensity {
    fn dim(&self) -> usize {
        self.shift.len()
    }

    fn lp_norm_nd(&self, p: Exponent) -> Result<FunctionalValue> {
        let p = p.validate()?;
        let kind = FunctionalKind::LpNorm { p };
        if p == Exponent::Finite(1.0) {
            return Ok(FunctionalValue {
                kind,
                value: 1.0,
                error_estimate: 0.0,
                method: FunctionalMethod::ClosedForm,
            });
        }
        let (ln_base, method, rel_err) = match &self.base {
            MultivariateBase::Product(fs) => {
                let norms: Result<Vec<FunctionalValue>> = fs.iter().map(|f| lp_norm(f, p)).collect();
                let norms = norms?;
                let ln: f64 = norms.iter().map(|v| v.value.ln()).sum();
                let rel: f64 = norms.iter().map(|v| v.error_estimate / v.value).sum();
                (ln, combine_methods(&norms), rel)
            }
            MultivariateBase::Gaussian { mean, .. } => {
                let n = mean.len() as f64;
                let half_ln_det: f64 = self.chol.diagonal().iter().map(|v| v.ln()).sum();
                let ln_peak = -(0.5 * n * LN_2PI + half_ln_det);
                let ln = match p {
                    Exponent::Infinity => ln_peak,
                    Exponent::Finite(pv) => ln_peak * (pv - 1.0) / pv - n * pv.ln() / (2.0 * pv),
                };
                (ln, FunctionalMethod::ClosedForm, 0.0)
            }
        };
        let ln = ln_base + (p.recip() - 1.0) * self.ln_abs_det_transform();
        let value = ln.exp();
        Ok(FunctionalValue {
            kind,
            value,
            error_estimate: value * (rel_err + 1e-15),
            method,
        })
    }

    fn ln_det_cov(&self) -> Result<f64> {
        let base = match &self.base {
            MultivariateBase::Gaussian { .. } => 2.0 * self.chol.diagonal().iter().map(|v| v.ln()).sum::<f64>(),
            MultivariateBase::Product(fs) => {
                let mut acc = 0.0;
                for f in fs {
                    acc += 2.0 * f.sigma_alpha(2.0)?.value.ln();
                }
                acc
            }
        };
        Ok(base + 2.0 * self.ln_abs_det_transform())
    }
}

/// Product of Gaussian mixtures: finite covariance, not log-concave.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureProduct(pub Vec<GaussianMixture>);

impl NdDensity for MixtureProduct {
    fn dim(&self) -> usize {
        self.0.len()
    }

    fn lp_norm_nd(&self, p: Exponent) -> Result<FunctionalValue> {
        let norms: Result<Vec<FunctionalValue>> = self.0.iter().map(|f| lp_norm(f, p)).collect();
        let norms = norms?;
        let value = norms.iter().map(|v| v.value).product();
        Ok(FunctionalValue {
            kind: FunctionalKind::LpNorm { p },
            value,
            error_estimate: value * norms.iter().map(|v| v.error_estimate / v.value).sum::<f64>(),
            method: combine_methods(&norms),
        })
    }

    fn ln_det_cov(&self) -> Result<f64> {
        let mut acc = 0.0;
        for f in &self.0 {
            acc += 2.0 * f.sigma_alpha(2.0)?.value.ln();
        }
        Ok(acc)
    }

    fn is_log_concave(&self) -> bool {
        false
    }
}

fn nd_tol(values: &[&FunctionalValue]) -> f64 {
    if values.iter().any(|v| v.method.is_quadrature()) {
        QUADRATURE_TOL
    } else {
        EXACT_TOL
    }
}

fn nd_inputs(n: usize, p: Option<Exponent>, q: Option<Exponent>) -> VerdictInputs {
    VerdictInputs {
        p,
        q,
        n: Some(n),
        ..Default::default()
    }
}

/// `‖F‖_p ≤ C(n)^{1-1/q} D(n)^{1-1/p} |Σ|^{(1/p-1/q)/2} ‖F‖_q`.
pub fn check_theorem2<F: NdDensity + ?Sized>(f: &F, p: Exponent, q: Exponent) -> Result<InequalityVerdict> {
    let n = f.dim();
    check_dim(n)?;
    let (np, nq) = (f.lp_norm_nd(p)?, f.lp_norm_nd(q)?);
    let (ip, iq) = (p.recip(), q.recip());
    let ln_rhs = (1.0 - iq) * ln_c_n(n) + (1.0 - ip) * ln_d_n(n) + 0.5 * (ip - iq) * f.ln_det_cov()? + nq.value.ln();
    Ok(InequalityVerdict::from_logs(
        ClaimId::NormRatioNd,
        np.value.ln(),
        ln_rhs,
        nd_tol(&[&np, &nq]),
        nd_inputs(n, Some(p), Some(q)),
    ))
}

/// `1 ≤ (C(n) |Σ|^{1/2})^{1-1/p} ‖F‖_p`; holds for any density with finite covariance.
pub fn check_lemma2<F: NdDensity + ?Sized>(f: &F, p: Exponent) -> Result<InequalityVerdict> {
    let n = f.dim();
    let np = f.lp_norm_nd(p)?;
    let ln_rhs = (1.0 - p.recip()) * (ln_c_n(n) + 0.5 * f.ln_det_cov()?) + np.value.ln();
    Ok(InequalityVerdict::from_logs(
        ClaimId::CovarianceNormLower,
        0.0,
        ln_rhs,
        nd_tol(&[&np]),
        nd_inputs(n, Some(p), None),
    ))
}

/// `‖F‖_∞ ≤ 2ⁿ ‖F‖_2²`.
pub fn check_lemma4_nd<F: NdDensity + ?Sized>(f: &F) -> Result<InequalityVerdict> {
    let n = f.dim();
    let sup = f.lp_norm_nd(Exponent::Infinity)?;
    let n2 = f.lp_norm_nd(Exponent::Finite(2.0))?;
    Ok(InequalityVerdict::from_logs(
        ClaimId::SupNormL2Nd,
        sup.value.ln(),
        n as f64 * std::f64::consts::LN_2 + 2.0 * n2.value.ln(),
        nd_tol(&[&sup, &n2]),
        nd_inputs(n, None, None),
    ))
}

/// `‖F‖_∞ ≤ D(n) / |Σ|^{1/2}`.
pub fn check_lemma6<F: NdDensity + ?Sized>(f: &F) -> Result<InequalityVerdict> {
    let n = f.dim();
    check_dim(n)?;
    let sup = f.lp_norm_nd(Exponent::Infinity)?;
    Ok(InequalityVerdict::from_logs(
        ClaimId::SupNormCovariance,
        sup.value.ln(),
        ln_d_n(n) - 0.5 * f.ln_det_cov()?,
        nd_tol(&[&sup]),
        nd_inputs(n, None, None),
    ))
}

pub fn check_claim_nd<F: NdDensity + ?Sized>(
    claim: ClaimId,
    f: &F,
    p: Exponent,
    q: Exponent,
) -> Result<InequalityVerdict> {
    match claim {
        ClaimId::NormRatioNd => check_theorem2(f, p, q),
        ClaimId::CovarianceNormLower => check_lemma2(f, p),
        ClaimId::SupNormL2Nd => check_lemma4_nd(f),
        ClaimId::SupNormCovariance => check_lemma6(f),
        other => Err(Error::usage(format!(
            "`{other}` is a claim about densities on the line"
        ))),
    }
}

/// All verdicts for multivariate densities over a `(p, q)` grid, in claim order.
pub fn sweep_nd(
    densities: &[MultivariateDensity],
    ps: &[Exponent],
    qs: &[Exponent],
    claims: &[ClaimId],
    tol: Option<f64>,
) -> Result<Vec<VerdictRow>> {
    let per: Vec<Vec<VerdictRow>> = densities
        .par_iter()
        .map(|f| {
            let family: std::sync::Arc<str> = f.family().into();
            let digest: std::sync::Arc<str> = f.to_spec().digest().into();
            let sigma = f.sigma_digest()?;
            let mut rows = Vec::new();
            let mut push = |v: InequalityVerdict| {
                let mut r = VerdictRow::new(family.clone(), digest.clone(), tol.map_or(v, |t| v.with_tol(t)));
                r.sigma_digest = Some(sigma.clone());
                rows.push(r);
            };
            for &claim in claims.iter().filter(|c| c.is_multivariate()) {
                match claim {
                    ClaimId::NormRatioNd => {
                        for &p in ps {
                            for &q in qs {
                                push(check_theorem2(f, p, q)?);
                            }
                        }
                    }
                    ClaimId::CovarianceNormLower => {
                        for &p in ps {
                            push(check_lemma2(f, p)?);
                        }
                    }
                    other => push(check_claim_nd(other, f, Exponent::Finite(2.0), Exponent::Finite(1.0))?),
                }
            }
            Ok(rows)
        })
        .collect::<Result<_>>()?;
    let mut rows: Vec<VerdictRow> = per.into_iter().flatten().collect();
    rows.sort_by_key(|r| r.verdict.claim);
    Ok(rows)
}

/// Monte Carlo estimate of `∫F^p = E_F[F^{p-1}]` with a 99% confidence interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub samples: usize,
}

impl McEstimate {
    pub fn contains(&self, v: f64) -> bool {
        self.ci_low <= v && v <= self.ci_high
    }
}

const Z_99: f64 = 2.575_829_303_548_901;
const MC_CHUNK: usize = 1 << 16;

/// Samples are drawn in fixed-size chunks, chunk `i` from stream `i` of a
/// ChaCha8 generator seeded with `seed`, so the result does not depend on
/// thread scheduling.
pub fn mc_validate_norm(f: &MultivariateDensity, p: f64, samples: usize, seed: u64) -> Result<McEstimate> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::domain(format!("Monte Carlo check needs 1 ≤ p < ∞, got {p}")));
    }
    if samples < 2 {
        return Err(Error::usage("Monte Carlo check needs at least two samples"));
    }
    let chunks = samples.div_ceil(MC_CHUNK);
    // (count, mean, sum of squared deviations) per chunk
    let parts: Vec<(f64, f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let len = MC_CHUNK.min(samples - c * MC_CHUNK);
            let (mut mean, mut m2) = (0.0, 0.0);
            for i in 0..len {
                let (_, l) = f.sample_with_log_density(&mut rng);
                let v = ((p - 1.0) * l).exp();
                let d = v - mean;
                mean += d / (i + 1) as f64;
                m2 += d * (v - mean);
            }
            (len as f64, mean, m2)
        })
        .collect();
    let (n, mean, m2) = parts.into_iter().fold((0.0, 0.0, 0.0), |(na, ma, sa), (nb, mb, sb)| {
        let n = na + nb;
        let d = mb - ma;
        (n, ma + d * nb / n, sa + sb + d * d * na * nb / n)
    });
    let se = (m2 / (n - 1.0) / n).sqrt();
    Ok(McEstimate {
        estimate: mean,
        ci_low: mean - Z_99 * se,
        ci_high: mean + Z_99 * se,
        samples,
    })
}

/// `Q1 · diag(d) · Q2` with orthogonal `Q1, Q2` and `d ∈ [1/10, 10]`, so the
/// condition number is at most 100.
pub fn random_transform<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let mut orth = || {
        let g = DMatrix::<f64>::from_fn(n, n, |_, _| StandardNormal.sample(&mut *rng));
        g.qr().q()
    };
    let (q1, q2) = (orth(), orth());
    let d = DVector::from_fn(n, |_, _| 10f64.powf(rng.random_range(-1.0..1.0)));
    q1 * DMatrix::from_diagonal(&d) * q2
}

/// Test families for dimension `n`: standard and correlated Gaussians, plain
/// products of catalog members, and sheared products.
pub fn default_families(n: usize, seed: u64) -> Result<Vec<MultivariateDensity>> {
    check_dim(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let catalog = [
        AnalyticDensity::exponential(1.0)?,
        AnalyticDensity::uniform(0.0, 1.0)?,
        AnalyticDensity::gaussian(0.5, 2.0)?,
        AnalyticDensity::laplace(0.0, 0.7)?,
        AnalyticDensity::logistic(1.0, 0.5)?,
        AnalyticDensity::gamma(2.5, 1.5)?,
    ];
    let mut out = vec![MultivariateDensity::standard_gaussian(n)?];
    for _ in 0..3 {
        let a = random_transform(n, &mut rng);
        let cov = &a * a.transpose();
        let cov = (&cov + cov.transpose()) * 0.5;
        let mean = DVector::from_fn(n, |_, _| rng.random_range(-2.0..2.0));
        out.push(MultivariateDensity::gaussian(mean, cov)?);
    }
    for start in 0..catalog.len() {
        let factors = (0..n).map(|i| catalog[(start + i) % catalog.len()].into()).collect();
        let prod = MultivariateDensity::product(factors)?;
        let a = random_transform(n, &mut rng);
        let t = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
        out.push(prod.transformed(&a, &t)?);
        out.push(prod);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MultivariateBaseSpec {
    Product { factors: Vec<DensitySpec> },
    Gaussian { mean: Vec<f64>, cov: Vec<Vec<f64>> },
}

/// JSON form of a [`MultivariateDensity`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultivariateSpec {
    pub base: MultivariateBaseSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transform: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift: Option<Vec<f64>>,
}

fn matrix(rows: &[Vec<f64>], n: usize) -> Result<DMatrix<f64>> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Parse(format!("expected a {n}×{n} matrix")));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

impl MultivariateSpec {
    pub fn digest(&self) -> String {
        let text = serde_json::to_string(self).expect("spec serializes");
        hex::encode(&Sha256::digest(text.as_bytes())[..8])
    }

    pub fn load(&self) -> Result<MultivariateDensity> {
        let base = match &self.base {
            MultivariateBaseSpec::Product { factors } => {
                let fs: Result<Vec<DensityHandle>> = factors.iter().map(|s| Ok(s.load()?.handle)).collect();
                MultivariateDensity::product(fs?)?
            }
            MultivariateBaseSpec::Gaussian { mean, cov } => {
                MultivariateDensity::gaussian(DVector::from_vec(mean.clone()), matrix(cov, mean.len())?)?
            }
        };
        let n = base.dim();
        let a = match &self.transform {
            Some(rows) => matrix(rows, n)?,
            None => DMatrix::identity(n, n),
        };
        let t = match &self.shift {
            Some(v) if v.len() == n => DVector::from_vec(v.clone()),
            Some(_) => return Err(Error::Parse(format!("shift must have {n} entries"))),
            None => DVector::zeros(n),
        };
        if self.transform.is_none() && self.shift.is_none() {
            return Ok(base);
        }
        base.transformed(&a, &t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn expo() -> DensityHandle {
        AnalyticDensity::exponential(1.0).unwrap().into()
    }
    fn unif() -> DensityHandle {
        AnalyticDensity::uniform(0.0, 1.0).unwrap().into()
    }
    const INF: Exponent = Exponent::Infinity;
    const TWO: Exponent = Exponent::Finite(2.0);

    #[test]
    fn norm_examples() {
        let g = MultivariateDensity::standard_gaussian(2).unwrap();
        assert!((g.lp_norm_nd(INF).unwrap().value - 1.0 / (2.0 * PI)).abs() < 1e-15);
        assert!((g.lp_norm_nd(TWO).unwrap().value - (4.0 * PI).powf(-0.5)).abs() < 1e-15);
        let e = MultivariateDensity::product(vec![expo(), expo()]).unwrap();
        assert!((e.lp_norm_nd(TWO).unwrap().value - 0.5).abs() < 1e-15);
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 2.0]);
        let scaled = e.transformed(&a, &DVector::zeros(2)).unwrap();
        let ratio = scaled.lp_norm_nd(TWO).unwrap().value / e.lp_norm_nd(TWO).unwrap().value;
        assert!((ratio - 0.5).abs() < 1e-14);
        assert!(g.lp_norm_nd(Exponent::Finite(0.5)).is_err());
    }

    #[test]
    fn covariance_examples() {
        let f = MultivariateDensity::product(vec![expo(), unif()]).unwrap();
        let c = f.covariance().unwrap();
        assert!((c[(0, 0)] - 1.0).abs() < 1e-15 && (c[(1, 1)] - 1.0 / 12.0).abs() < 1e-15 && c[(0, 1)] == 0.0);
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        let g = f.transformed(&a, &DVector::zeros(2)).unwrap();
        let c = g.covariance().unwrap();
        assert!((c[(0, 0)] - (1.0 + 1.0 / 12.0)).abs() < 1e-15);
        assert!((c[(0, 1)] - 1.0 / 12.0).abs() < 1e-15 && (c[(1, 1)] - 1.0 / 12.0).abs() < 1e-15);
        assert!((g.ln_det_cov().unwrap() - (1.0f64 / 12.0).ln()).abs() < 1e-14);
        assert!((c.determinant() - 1.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn theorem2_examples() {
        let g = MultivariateDensity::standard_gaussian(2).unwrap();
        let v = check_theorem2(&g, INF, Exponent::Finite(1.0)).unwrap();
        assert!((v.rhs - 2.612_425_837).abs() < 1e-9 && v.holds);
        let v = check_theorem2(&g, TWO, TWO).unwrap();
        let consts = 0.5 * (ln_c_n(2) + ln_d_n(2));
        assert!((v.tightness - (-consts).exp()).abs() < 1e-12);
        let e = MultivariateDensity::product(vec![expo(), expo()]).unwrap();
        let v = check_theorem2(&e, TWO, INF).unwrap();
        assert!((v.lhs - 0.5).abs() < 1e-15 && v.holds);
    }

    #[test]
    fn lemma2_examples() {
        let g = MultivariateDensity::standard_gaussian(2).unwrap();
        assert_eq!(check_lemma2(&g, Exponent::Finite(1.0)).unwrap().rhs, 1.0);
        assert!((check_lemma2(&g, INF).unwrap().rhs - std::f64::consts::E).abs() < 1e-13);
        let u = MultivariateDensity::product(vec![unif(), unif()]).unwrap();
        let expected = (2.0 * PI * std::f64::consts::E / 12.0).sqrt();
        assert!((check_lemma2(&u, TWO).unwrap().rhs - expected).abs() < 1e-13);
        let mix = GaussianMixture::new(vec![0.5, 0.5], vec![-3.0, 3.0], vec![1.0, 1.0]).unwrap();
        let mp = MixtureProduct(vec![mix.clone(), mix]);
        assert!(!mp.is_log_concave());
        assert!(check_lemma2(&mp, TWO).unwrap().holds);
    }

    #[test]
    fn lemma4_and_lemma6_examples() {
        let e = MultivariateDensity::product(vec![expo(), expo()]).unwrap();
        assert!(check_lemma4_nd(&e).unwrap().margin.abs() < 1e-15);
        let g = MultivariateDensity::standard_gaussian(2).unwrap();
        assert!((check_lemma4_nd(&g).unwrap().rhs - 1.0 / PI).abs() < 1e-15);
        let v = check_lemma6(&g).unwrap();
        assert!((v.lhs - 0.159_154_943_1).abs() < 1e-10 && v.holds);
        let g4 = MultivariateDensity::gaussian(
            DVector::zeros(2),
            DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, 1.0])),
        )
        .unwrap();
        let v = check_lemma6(&g4).unwrap();
        assert!((v.lhs - 0.079_577_471_5).abs() < 1e-10 && (v.rhs - 1.306_212_918).abs() < 1e-8);
        assert!(check_lemma6(&e).unwrap().holds);
    }

    #[test]
    fn volume_preserving_maps_leave_sup_bound_unchanged() {
        let e = MultivariateDensity::product(vec![expo(), unif()]).unwrap();
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 3.0, 0.0, 1.0]);
        let t = e.transformed(&a, &DVector::from_vec(vec![1.0, -2.0])).unwrap();
        let (v0, v1) = (check_lemma4_nd(&e).unwrap(), check_lemma4_nd(&t).unwrap());
        assert!((v0.lhs - v1.lhs).abs() < 1e-14 && (v0.rhs - v1.rhs).abs() < 1e-14);
    }

    #[test]
    fn transformed_log_density_matches_sampled_value() {
        let e = MultivariateDensity::product(vec![expo(), unif()]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_transform(2, &mut rng);
        let t = e.transformed(&a, &DVector::from_vec(vec![0.5, 0.5])).unwrap();
        for _ in 0..20 {
            let (y, l) = t.sample_with_log_density(&mut rng);
            assert!((t.log_density(&y).unwrap() - l).abs() < 1e-9);
        }
    }

    #[test]
    fn random_transforms_are_well_conditioned() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let a = random_transform(3, &mut rng);
            let sv = a.singular_values();
            assert!(sv.max() / sv.min() <= 100.0 + 1e-9);
        }
    }

    #[test]
    fn mc_is_reproducible_and_exact_at_p_one() {
        let g = MultivariateDensity::standard_gaussian(2).unwrap();
        let a = mc_validate_norm(&g, 2.0, 100_000, 3).unwrap();
        let b = mc_validate_norm(&g, 2.0, 100_000, 3).unwrap();
        assert_eq!(a, b);
        assert!(a.contains(1.0 / (4.0 * PI)));
        let one = mc_validate_norm(&g, 1.0, 1000, 3).unwrap();
        assert_eq!(one.estimate, 1.0);
    }

    #[test]
    fn spec_round_trip() {
        let fams = default_families(3, 1).unwrap();
        for f in &fams {
            let back = f.to_spec().load().unwrap();
            assert_eq!(back.to_spec(), f.to_spec());
        }
    }
}
