use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_claim, ClaimId, ClaimParams, InequalityVerdict, VerdictRow};
use crate::density::DensityHandle;
use crate::error::{Error, Result};
use crate::functionals::{Density1d, Exponent, Memoized};

/// Parameter grid of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub ps: Vec<Exponent>,
    pub qs: Vec<Exponent>,
    pub alphas: Vec<f64>,
}

impl Default for SweepGrid {
    fn default() -> Self {
        let exps: Vec<Exponent> = [1.0, 1.5, 2.0, 3.0, 8.0, 64.0, f64::INFINITY]
            .into_iter()
            .map(Exponent::new)
            .collect();
        Self {
            ps: exps.clone(),
            qs: exps,
            alphas: vec![1.0, 1.5, 2.0, 3.0, 4.0],
        }
    }
}

impl SweepGrid {
    pub fn validate(&self) -> Result<()> {
        if self.ps.is_empty() || self.qs.is_empty() || self.alphas.is_empty() {
            return Err(Error::usage("sweep grid has an empty axis"));
        }
        for p in self.ps.iter().chain(&self.qs) {
            p.validate()?;
        }
        Ok(())
    }
}

/// Five windows around the mean, in units of the standard deviation:
/// `[m-s, m+s]`, `[m-3s, m+3s]`, `[m-2s, m]`, `[m, m+s/2]`, `[m-s/5, m+5s]`.
pub fn default_intervals<D: Density1d + ?Sized>(f: &D) -> Result<Vec<(f64, f64)>> {
    let m = f.mean()?.value;
    let s = f.sigma_alpha(2.0)?.value;
    Ok(vec![
        (m - s, m + s),
        (m - 3.0 * s, m + 3.0 * s),
        (m - 2.0 * s, m),
        (m, m + 0.5 * s),
        (m - 0.2 * s, m + 5.0 * s),
    ])
}

fn applicable<D: Density1d + ?Sized>(claim: ClaimId, f: &D) -> bool {
    match claim {
        ClaimId::SymmetricNormRatio | ClaimId::SymmetricCenterValue => f.symmetry_center().is_some(),
        c => !c.is_multivariate(),
    }
}

/// Every applicable verdict for one density over the grid. Claims that need a
/// symmetric density are skipped for the others; multivariate claims are skipped.
pub fn check_density<D: Density1d + ?Sized>(
    f: &D,
    grid: &SweepGrid,
    claims: &[ClaimId],
) -> Result<Vec<InequalityVerdict>> {
    let f = Memoized::new(f);
    let mut out = Vec::new();
    let mut push = |claim: ClaimId, params: ClaimParams| -> Result<()> {
        out.push(check_claim(claim, &f, &params)?);
        Ok(())
    };
    let intervals = if claims.contains(&ClaimId::FiniteMeasure) {
        default_intervals(&f)?
    } else {
        Vec::new()
    };
    for &claim in claims.iter().filter(|c| applicable(**c, &f)) {
        let base = ClaimParams::default();
        match claim {
            ClaimId::NormRatio
            | ClaimId::NormSandwichLower
            | ClaimId::NormSandwichUpper
            | ClaimId::SymmetricNormRatio => {
                for &p in &grid.ps {
                    for &q in &grid.qs {
                        for &alpha in &grid.alphas {
                            push(claim, ClaimParams { p, q, alpha, ..base })?;
                        }
                    }
                }
            }
            ClaimId::NormRatioVariance => {
                for &p in &grid.ps {
                    for &q in &grid.qs {
                        push(
                            claim,
                            ClaimParams {
                                p,
                                q,
                                alpha: 2.0,
                                ..base
                            },
                        )?;
                    }
                }
            }
            ClaimId::MomentNormLower => {
                for &p in &grid.ps {
                    for &alpha in &grid.alphas {
                        push(claim, ClaimParams { p, alpha, ..base })?;
                    }
                }
            }
            ClaimId::SupNormHolder => {
                for &p in &grid.ps {
                    push(claim, ClaimParams { p, ..base })?;
                }
            }
            ClaimId::SupNormL2 => push(claim, base)?,
            ClaimId::SupNormStdDev => push(claim, ClaimParams { alpha: 2.0, ..base })?,
            ClaimId::EntropyLower | ClaimId::EntropyUpper | ClaimId::SupNormMoment | ClaimId::SymmetricCenterValue => {
                for &alpha in &grid.alphas {
                    push(claim, ClaimParams { alpha, ..base })?;
                }
            }
            ClaimId::FiniteMeasure => {
                for &interval in &intervals {
                    for &p in &grid.ps {
                        for &q in grid.qs.iter().filter(|q| p.value() <= q.value()) {
                            push(
                                claim,
                                ClaimParams {
                                    p,
                                    q,
                                    interval: Some(interval),
                                    ..base
                                },
                            )?;
                        }
                    }
                }
            }
            _ => {}
        }
    }
    Ok(out)
}

/// Runs [`check_density`] over many densities in parallel. Rows come back in
/// claim order, and within a claim in input order, independent of scheduling.
pub fn sweep_1d(
    densities: &[DensityHandle],
    grid: &SweepGrid,
    claims: &[ClaimId],
    tol: Option<f64>,
) -> Result<Vec<VerdictRow>> {
    grid.validate()?;
    let per_density: Vec<Vec<VerdictRow>> = densities
        .par_iter()
        .map(|f| {
            let spec = f.to_spec();
            let family: Arc<str> = Arc::from(f.family());
            let digest: Arc<str> = Arc::from(spec.digest());
            let verdicts = check_density(f, grid, claims)?;
            Ok(verdicts
                .into_iter()
                .map(|v| VerdictRow::new(family.clone(), digest.clone(), tol.map_or(v, |t| v.with_tol(t))))
                .collect())
        })
        .collect::<Result<_>>()?;
    let mut rows: Vec<VerdictRow> = per_density.into_iter().flatten().collect();
    rows.sort_by_key(|r| r.verdict.claim);
    Ok(rows)
}
