//! Derivative-free search for the densities that come closest to equality.
//!
//! Each family maps an unconstrained parameter vector to a valid log-concave
//! density, so the simplex search needs no constraint handling. Restarts run in
//! parallel and are merged in restart order.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::{AnalyticDensity, DensityHandle, DensitySpec, PiecewiseLogLinear};
use crate::error::{Error, Result};
use crate::inequality::{check_claim, ClaimId, ClaimParams, InequalityVerdict, VerdictRow};

/// Parametric families the search can move through.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchFamily {
    Exponential,
    Gaussian,
    Laplace,
    Logistic,
    Uniform,
    Gamma,
    /// Piecewise log-linear with this many knots.
    Pll(usize),
    /// Every catalog family; the best one is reported.
    Catalog,
}

impl SearchFamily {
    pub const CATALOG: [SearchFamily; 6] = [
        SearchFamily::Exponential,
        SearchFamily::Gaussian,
        SearchFamily::Laplace,
        SearchFamily::Logistic,
        SearchFamily::Uniform,
        SearchFamily::Gamma,
    ];

    /// Number of unconstrained coordinates.
    pub fn dim(self) -> usize {
        match self {
            SearchFamily::Exponential => 1,
            SearchFamily::Pll(k) => 2 * k + 1,
            SearchFamily::Catalog => 0,
            _ => 2,
        }
    }

    pub fn is_symmetric(self) -> bool {
        matches!(
            self,
            SearchFamily::Gaussian | SearchFamily::Laplace | SearchFamily::Logistic | SearchFamily::Uniform
        )
    }

    /// The density at parameter vector `theta`.
    pub fn build(self, theta: &[f64]) -> Result<DensityHandle> {
        if theta.len() != self.dim() {
            return Err(Error::usage(format!("{self} takes {} parameters", self.dim())));
        }
        // log-scale coordinates saturate at ±SCALE_BOUND
        let e = bounded_exp;
        let handle = match self {
            SearchFamily::Exponential => AnalyticDensity::exponential(e(theta[0]))?.into(),
            SearchFamily::Gaussian => AnalyticDensity::gaussian(theta[0], e(theta[1]))?.into(),
            SearchFamily::Laplace => AnalyticDensity::laplace(theta[0], e(theta[1]))?.into(),
            SearchFamily::Logistic => AnalyticDensity::logistic(theta[0], e(theta[1]))?.into(),
            SearchFamily::Uniform => AnalyticDensity::uniform(theta[0], theta[0] + e(theta[1]))?.into(),
            SearchFamily::Gamma => AnalyticDensity::gamma(1.0 + e(theta[0]), e(theta[1]))?.into(),
            SearchFamily::Pll(k) => pll_from_params(k, theta)?.into(),
            SearchFamily::Catalog => return Err(Error::usage("catalog is searched family by family")),
        };
        Ok(handle)
    }
}

/// Log-scale parameters pass through `B·tanh(t/B)`, so rates, scales, shapes
/// and gaps stay within a factor `e^B` of one.
const SCALE_BOUND: f64 = 8.0;

fn bounded_exp(t: f64) -> f64 {
    (SCALE_BOUND * (t / SCALE_BOUND).tanh()).exp()
}

/// `θ = (a, b, w_1..w_k, u_1..u_{k-1})`: left tail slope `e^a`, right tail
/// slope `-e^b`, interior slopes placed between them at the cumulative softmax
/// fractions of `w`, knot gaps `e^u` (exponentials bounded as above). Slopes are strictly decreasing by
/// construction.
fn pll_from_params(k: usize, theta: &[f64]) -> Result<PiecewiseLogLinear> {
    if k == 0 {
        return Err(Error::usage("PLL family needs at least one knot"));
    }
    let (left, right) = (bounded_exp(theta[0]), -bounded_exp(theta[1]));
    let w = &theta[2..2 + k];
    let u = &theta[2 + k..];
    let wmax = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ew: Vec<f64> = w.iter().map(|x| (x - wmax).exp()).collect();
    let total: f64 = ew.iter().sum();
    let mut slopes = vec![left];
    let mut acc = 0.0;
    for v in &ew[..k - 1] {
        acc += v / total;
        slopes.push(left - (left - right) * acc);
    }
    slopes.push(right);
    let mut knots = vec![0.0];
    for g in u {
        knots.push(knots.last().copied().unwrap_or(0.0) + bounded_exp(*g));
    }
    let mut log_values = vec![0.0; k];
    for i in 1..k {
        log_values[i] = log_values[i - 1] + slopes[i] * (knots[i] - knots[i - 1]);
    }
    PiecewiseLogLinear::new(knots, log_values, left, right)
}

impl fmt::Display for SearchFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SearchFamily::Exponential => f.write_str("exponential"),
            SearchFamily::Gaussian => f.write_str("gaussian"),
            SearchFamily::Laplace => f.write_str("laplace"),
            SearchFamily::Logistic => f.write_str("logistic"),
            SearchFamily::Uniform => f.write_str("uniform"),
            SearchFamily::Gamma => f.write_str("gamma"),
            SearchFamily::Pll(k) => write!(f, "pll{k}"),
            SearchFamily::Catalog => f.write_str("catalog"),
        }
    }
}

impl FromStr for SearchFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "exponential" => SearchFamily::Exponential,
            "gaussian" | "normal" => SearchFamily::Gaussian,
            "laplace" => SearchFamily::Laplace,
            "logistic" => SearchFamily::Logistic,
            "uniform" => SearchFamily::Uniform,
            "gamma" => SearchFamily::Gamma,
            "catalog" => SearchFamily::Catalog,
            other => match other.strip_prefix("pll").map(str::parse::<usize>) {
                Some(Ok(k)) if k >= 1 => SearchFamily::Pll(k),
                _ => return Err(Error::usage(format!("unknown search family `{s}`"))),
            },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchProblem {
    pub claim: ClaimId,
    pub family: SearchFamily,
    pub params: ClaimParams,
    /// Objective evaluations per restart.
    pub budget: usize,
    pub restarts: usize,
    /// Stop a restart once the simplex values agree to this absolute spread.
    pub convergence: f64,
    /// A tightness above `1 + counterexample_tol` aborts the search.
    pub counterexample_tol: f64,
}

impl SearchProblem {
    pub fn new(claim: ClaimId, family: SearchFamily, params: ClaimParams) -> Self {
        Self {
            claim,
            family,
            params,
            budget: 2000,
            restarts: 8,
            convergence: 1e-12,
            counterexample_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub claim: ClaimId,
    /// The family the best point belongs to (differs from the request for `catalog`).
    pub family: SearchFamily,
    pub best_params: Vec<f64>,
    pub best_ratio: f64,
    pub witness: DensitySpec,
    pub verdict: InequalityVerdict,
    /// Best ratio so far after each evaluation, restarts concatenated in order.
    pub trace: Vec<f64>,
    pub evaluations: usize,
    /// True when every restart used its full budget without converging.
    pub budget_exhausted: bool,
}

struct Objective<'a> {
    problem: &'a SearchProblem,
    family: SearchFamily,
    cache: HashMap<Vec<u64>, f64>,
    trace: Vec<f64>,
    best: (f64, Vec<f64>),
}

impl Objective<'_> {
    /// Tightness at `theta`, or `-∞` when the density cannot be built or checked.
    fn eval(&mut self, theta: &[f64]) -> Result<f64> {
        let key: Vec<u64> = theta.iter().map(|v| v.to_bits()).collect();
        if let Some(v) = self.cache.get(&key) {
            return Ok(*v);
        }
        let ratio = match self.family.build(theta) {
            Ok(f) => match check_claim(self.problem.claim, &f, &self.problem.params) {
                Ok(v) if v.tightness.is_finite() => {
                    if v.tightness > 1.0 + self.problem.counterexample_tol {
                        return Err(Error::Counterexample {
                            claim: self.problem.claim.to_string(),
                            ratio: v.tightness,
                            tol: self.problem.counterexample_tol,
                            witness: Box::new(serde_json::to_value(f.to_spec()).expect("spec serializes")),
                        });
                    }
                    if v.tightness > 1.0 {
                        log::debug!("{}: tightness {} within noise above 1", self.problem.claim, v.tightness);
                    }
                    v.tightness
                }
                Ok(_) => f64::NEG_INFINITY,
                Err(Error::Usage(m)) => return Err(Error::Usage(m)),
                Err(e) => {
                    log::debug!("skipping candidate: {e}");
                    f64::NEG_INFINITY
                }
            },
            Err(_) => f64::NEG_INFINITY,
        };
        self.cache.insert(key, ratio);
        if ratio > self.best.0 || self.trace.is_empty() {
            self.best = (ratio.max(self.best.0), theta.to_vec());
        }
        self.trace.push(self.best.0);
        Ok(ratio)
    }
}

/// Maximizes `objective` with the Nelder–Mead simplex method. Returns whether
/// the simplex converged before the budget ran out.
fn nelder_mead(obj: &mut Objective<'_>, start: &[f64], step: f64, budget: usize, tol: f64) -> Result<bool> {
    let n = start.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let v = obj.eval(start)?;
    simplex.push((start.to_vec(), v));
    for i in 0..n {
        let mut x = start.to_vec();
        x[i] += step;
        let v = obj.eval(&x)?;
        simplex.push((x, v));
    }
    let lerp = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect() };
    while obj.trace.len() < budget {
        // best first
        simplex.sort_by(|a, b| b.1.total_cmp(&a.1));
        let (best, worst) = (simplex[0].1, simplex[n].1);
        if best.is_finite() && worst.is_finite() && (best - worst).abs() <= tol {
            return Ok(true);
        }
        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|(x, _)| x[j]).sum::<f64>() / n as f64)
            .collect();
        let worst_x = simplex[n].0.clone();
        let reflected = lerp(&centroid, &worst_x, -1.0);
        let fr = obj.eval(&reflected)?;
        if fr > best {
            let expanded = lerp(&centroid, &worst_x, -2.0);
            let fe = obj.eval(&expanded)?;
            simplex[n] = if fe > fr { (expanded, fe) } else { (reflected, fr) };
        } else if fr > simplex[n - 1].1 {
            simplex[n] = (reflected, fr);
        } else {
            let (target, ft) = if fr > worst { (reflected, fr) } else { (worst_x, worst) };
            let contracted = lerp(&centroid, &target, 0.5);
            let fc = obj.eval(&contracted)?;
            if fc > ft {
                simplex[n] = (contracted, fc);
            } else {
                let anchor = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    let x = lerp(&anchor, &entry.0, 0.5);
                    let v = obj.eval(&x)?;
                    *entry = (x, v);
                }
            }
        }
    }
    Ok(false)
}

struct RestartResult {
    best_ratio: f64,
    best_params: Vec<f64>,
    trace: Vec<f64>,
    converged: bool,
}

fn run_family(problem: &SearchProblem, family: SearchFamily, seed: u64) -> Result<Vec<RestartResult>> {
    let dim = family.dim();
    (0..problem.restarts.max(1))
        .into_par_iter()
        .map(|r| {
            let start: Vec<f64> = if r == 0 {
                vec![0.0; dim]
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(r as u64);
                let normal = Normal::new(0.0, 1.5).expect("valid normal");
                (0..dim).map(|_| normal.sample(&mut rng)).collect()
            };
            let mut obj = Objective {
                problem,
                family,
                cache: HashMap::new(),
                trace: Vec::new(),
                best: (f64::NEG_INFINITY, start.clone()),
            };
            let converged = nelder_mead(&mut obj, &start, 0.5, problem.budget, problem.convergence)?;
            Ok(RestartResult {
                best_ratio: obj.best.0,
                best_params: obj.best.1,
                trace: obj.trace,
                converged,
            })
        })
        .collect()
}

/// Maximizes the tightness ratio of `problem.claim` over `problem.family`.
pub fn maximize_tightness(problem: &SearchProblem, seed: u64) -> Result<SearchOutcome> {
    if problem.claim.is_multivariate() {
        return Err(Error::usage("extremal search covers one-dimensional claims"));
    }
    let needs_symmetry = matches!(
        problem.claim,
        ClaimId::SymmetricNormRatio | ClaimId::SymmetricCenterValue
    );
    let families: Vec<SearchFamily> = match problem.family {
        SearchFamily::Catalog => SearchFamily::CATALOG
            .into_iter()
            .filter(|f| !needs_symmetry || f.is_symmetric())
            .collect(),
        f if needs_symmetry && !f.is_symmetric() => {
            return Err(Error::usage(format!(
                "`{}` needs a symmetric family, {f} is not",
                problem.claim
            )));
        }
        f => vec![f],
    };
    let mut trace = Vec::new();
    let mut best: Option<(f64, SearchFamily, Vec<f64>)> = None;
    let mut all_exhausted = true;
    for family in families {
        for r in run_family(problem, family, seed)? {
            let offset = trace.last().copied().unwrap_or(f64::NEG_INFINITY);
            trace.extend(r.trace.iter().map(|v| v.max(offset)));
            all_exhausted &= !r.converged;
            // strict improvement keeps the earliest restart on ties
            if best.as_ref().is_none_or(|b| r.best_ratio > b.0) {
                best = Some((r.best_ratio, family, r.best_params));
            }
        }
    }
    let (best_ratio, family, best_params) = best.expect("at least one restart");
    if !best_ratio.is_finite() {
        return Err(Error::domain(format!("no valid candidate found for {}", problem.claim)));
    }
    if best_ratio > 1.0 {
        log::warn!(
            "{}: best tightness {best_ratio} is above 1 by less than the tolerance",
            problem.claim
        );
    }
    let witness = family.build(&best_params)?;
    let verdict = check_claim(problem.claim, &witness, &problem.params)?;
    Ok(SearchOutcome {
        claim: problem.claim,
        family,
        best_ratio,
        witness: witness.to_spec(),
        verdict,
        evaluations: trace.len(),
        trace,
        best_params,
        budget_exhausted: all_exhausted,
    })
}

/// Tightness of one claim at every grid point for a fixed density.
pub fn tightness_landscape(
    claim: ClaimId,
    f: &DensityHandle,
    ps: &[crate::functionals::Exponent],
    qs: &[crate::functionals::Exponent],
    alphas: &[f64],
) -> Result<Vec<VerdictRow>> {
    let family: std::sync::Arc<str> = f.family().into();
    let digest: std::sync::Arc<str> = f.to_spec().digest().into();
    let mut rows = Vec::new();
    for &p in ps {
        for &q in qs {
            for &alpha in alphas {
                let params = ClaimParams {
                    p,
                    q,
                    alpha,
                    interval: None,
                };
                rows.push(VerdictRow::new(
                    family.clone(),
                    digest.clone(),
                    check_claim(claim, f, &params)?,
                ));
            }
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::Exponent;

    fn quick(claim: ClaimId, family: SearchFamily, params: ClaimParams) -> SearchProblem {
        SearchProblem {
            budget: 300,
            restarts: 3,
            ..SearchProblem::new(claim, family, params)
        }
    }

    #[test]
    fn family_names_parse() {
        assert_eq!("pll3".parse::<SearchFamily>().unwrap(), SearchFamily::Pll(3));
        assert_eq!(SearchFamily::Pll(3).to_string(), "pll3");
        assert!("pll0".parse::<SearchFamily>().is_err());
        assert!("cauchy".parse::<SearchFamily>().is_err());
    }

    #[test]
    fn pll_parameterization_is_always_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let normal = Normal::new(0.0, 3.0).unwrap();
        for k in 1..6 {
            for _ in 0..50 {
                let theta: Vec<f64> = (0..2 * k + 1).map(|_| normal.sample(&mut rng)).collect();
                let f = SearchFamily::Pll(k).build(&theta).unwrap();
                let s = f.as_pll().unwrap().slopes();
                assert!(s.windows(2).all(|w| w[0] >= w[1]));
            }
        }
    }

    #[test]
    fn exponential_family_saturates_variance_sup_bound() {
        let p = quick(
            ClaimId::SupNormStdDev,
            SearchFamily::Exponential,
            ClaimParams::default(),
        );
        let out = maximize_tightness(&p, 4).unwrap();
        assert!((out.best_ratio - 1.0).abs() < 1e-9);
    }

    #[test]
    fn trace_is_monotone_and_reproducible() {
        let params = ClaimParams {
            p: Exponent::Finite(2.0),
            q: Exponent::Infinity,
            alpha: 2.0,
            interval: None,
        };
        let p = quick(ClaimId::NormRatio, SearchFamily::Pll(2), params);
        let a = maximize_tightness(&p, 9).unwrap();
        let b = maximize_tightness(&p, 9).unwrap();
        assert_eq!(a, b);
        assert!(a.trace.windows(2).all(|w| w[0] <= w[1]));
        assert!(a.best_ratio <= 1.0);
    }

    #[test]
    fn symmetric_claims_need_symmetric_families() {
        let p = quick(
            ClaimId::SymmetricCenterValue,
            SearchFamily::Exponential,
            ClaimParams::default(),
        );
        assert!(matches!(maximize_tightness(&p, 1), Err(Error::Usage(_))));
        let p = quick(
            ClaimId::SymmetricCenterValue,
            SearchFamily::Catalog,
            ClaimParams {
                alpha: 1.0,
                ..Default::default()
            },
        );
        let out = maximize_tightness(&p, 1).unwrap();
        assert_eq!(out.family, SearchFamily::Laplace);
        assert!((out.best_ratio - 1.0).abs() < 1e-9);
    }

    #[test]
    fn landscape_has_one_row_per_grid_point() {
        let g: DensityHandle = AnalyticDensity::gaussian(0.0, 1.0).unwrap().into();
        let e = [Exponent::Finite(1.0), Exponent::Finite(2.0), Exponent::Infinity];
        let rows = tightness_landscape(ClaimId::NormRatio, &g, &e, &e, &[2.0]).unwrap();
        assert_eq!(rows.len(), 9);
        assert!(rows.iter().all(|r| r.verdict.tightness <= 1.0));
    }
}
