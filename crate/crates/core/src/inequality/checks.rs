use serde::{Deserialize, Serialize};

#[cfg(test)]
use super::QUADRATURE_TOL;
use super::{auto_tol, ClaimId, InequalityVerdict, VerdictInputs};
use crate::error::{Error, Result};
use crate::functionals::{
    diff_entropy, lp_norm, restricted_lp_norm, sigma_alpha, Density1d, Exponent, FunctionalValue,
};
use crate::quadrature::Quadrature;
use crate::special::{ln_c_alpha, ln_d_alpha};

/// Relative slack on the intermediate-quantity checks.
const STEP_TOL: f64 = 1e-8;

fn constant_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha >= 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("this bound needs 1 ≤ α < ∞, got {alpha}")))
    }
}

fn require_variance_form(alpha: f64, tightened: bool) -> Result<()> {
    if tightened && alpha != 2.0 {
        return Err(Error::usage(format!(
            "the variance form only exists at α = 2, got α = {alpha}"
        )));
    }
    Ok(())
}

fn require_symmetric<D: Density1d + ?Sized>(f: &D) -> Result<f64> {
    f.symmetry_center()
        .ok_or_else(|| Error::usage("this bound needs a density declared symmetric"))
}

fn ln(v: &FunctionalValue) -> f64 {
    v.value.ln()
}

fn pq_inputs(p: Exponent, q: Exponent, alpha: f64) -> VerdictInputs {
    VerdictInputs {
        p: Some(p),
        q: Some(q),
        alpha: Some(alpha),
        ..Default::default()
    }
}

/// `‖f‖_p ≤ C_α^{1-1/q} D_α^{1-1/p} σ_α^{1/p-1/q} ‖f‖_q`, or with `tightened`
/// (α = 2 only) `‖f‖_p ≤ C_2^{1-1/q} σ^{1/p-1/q} ‖f‖_q`.
pub fn check_theorem1<D: Density1d + ?Sized>(
    f: &D,
    p: Exponent,
    q: Exponent,
    alpha: f64,
    tightened: bool,
) -> Result<InequalityVerdict> {
    let (p, q) = (p.validate()?, q.validate()?);
    constant_alpha(alpha)?;
    require_variance_form(alpha, tightened)?;
    let (np, nq, s) = (lp_norm(f, p)?, lp_norm(f, q)?, sigma_alpha(f, alpha)?);
    let (ip, iq) = (p.recip(), q.recip());
    let mut ln_rhs = (1.0 - iq) * ln_c_alpha(alpha) + (ip - iq) * ln(&s) + ln(&nq);
    if !tightened {
        ln_rhs += (1.0 - ip) * ln_d_alpha(alpha);
    }
    let claim = if tightened {
        ClaimId::NormRatioVariance
    } else {
        ClaimId::NormRatio
    };
    Ok(InequalityVerdict::from_logs(
        claim,
        ln(&np),
        ln_rhs,
        auto_tol(&[&np, &nq, &s]),
        pq_inputs(p, q, alpha),
    ))
}

/// Both sides of `C_α^{1/p-1} D_α^{1/q-1} σ_α^{1/p-1/q} ‖f‖_q ≤ ‖f‖_p ≤ (upper bound of
/// [`check_theorem1`])`. Returns `(lower, upper)`.
pub fn check_corollary1<D: Density1d + ?Sized>(
    f: &D,
    p: Exponent,
    q: Exponent,
    alpha: f64,
) -> Result<(InequalityVerdict, InequalityVerdict)> {
    let mut upper = check_theorem1(f, p, q, alpha, false)?;
    upper.claim = ClaimId::NormSandwichUpper;
    let (p, q) = (p.validate()?, q.validate()?);
    let (np, nq, s) = (lp_norm(f, p)?, lp_norm(f, q)?, sigma_alpha(f, alpha)?);
    let (ip, iq) = (p.recip(), q.recip());
    let ln_lhs = (ip - 1.0) * ln_c_alpha(alpha) + (iq - 1.0) * ln_d_alpha(alpha) + (ip - iq) * ln(&s) + ln(&nq);
    let lower = InequalityVerdict::from_logs(
        ClaimId::NormSandwichLower,
        ln_lhs,
        ln(&np),
        auto_tol(&[&np, &nq, &s]),
        pq_inputs(p, q, alpha),
    );
    Ok((lower, upper))
}

/// `log(σ_α/D_α) ≤ h(X) ≤ log(C_α σ_α)`. Returns `(lower, upper)`.
pub fn check_corollary2<D: Density1d + ?Sized>(f: &D, alpha: f64) -> Result<(InequalityVerdict, InequalityVerdict)> {
    constant_alpha(alpha)?;
    let (h, s) = (diff_entropy(f)?, sigma_alpha(f, alpha)?);
    let tol = auto_tol(&[&h, &s]);
    let inputs = VerdictInputs {
        alpha: Some(alpha),
        ..Default::default()
    };
    let lower =
        InequalityVerdict::from_log_form(ClaimId::EntropyLower, ln(&s) - ln_d_alpha(alpha), h.value, tol, inputs);
    let upper =
        InequalityVerdict::from_log_form(ClaimId::EntropyUpper, h.value, ln_c_alpha(alpha) + ln(&s), tol, inputs);
    Ok((lower, upper))
}

/// Symmetric densities: `‖f‖_p ≤ C_α^{1-1/q} (D_α/2)^{1-1/p} σ_α^{1/p-1/q} ‖f‖_q`.
pub fn check_proposition1<D: Density1d + ?Sized>(
    f: &D,
    p: Exponent,
    q: Exponent,
    alpha: f64,
) -> Result<InequalityVerdict> {
    require_symmetric(f)?;
    let (p, q) = (p.validate()?, q.validate()?);
    constant_alpha(alpha)?;
    let (np, nq, s) = (lp_norm(f, p)?, lp_norm(f, q)?, sigma_alpha(f, alpha)?);
    let (ip, iq) = (p.recip(), q.recip());
    let ln_rhs = (1.0 - iq) * ln_c_alpha(alpha)
        + (1.0 - ip) * (ln_d_alpha(alpha) - std::f64::consts::LN_2)
        + (ip - iq) * ln(&s)
        + ln(&nq);
    Ok(InequalityVerdict::from_logs(
        ClaimId::SymmetricNormRatio,
        ln(&np),
        ln_rhs,
        auto_tol(&[&np, &nq, &s]),
        pq_inputs(p, q, alpha),
    ))
}

/// `1 ≤ C_α^{1-1/p} σ_α^{1-1/p} ‖f‖_p` for any density and any `α > 0`.
pub fn check_lemma1<D: Density1d + ?Sized>(f: &D, p: Exponent, alpha: f64) -> Result<InequalityVerdict> {
    let p = p.validate()?;
    let (np, s) = (lp_norm(f, p)?, sigma_alpha(f, alpha)?);
    let e = 1.0 - p.recip();
    let ln_rhs = e * (ln_c_alpha(alpha) + ln(&s)) + ln(&np);
    Ok(InequalityVerdict::from_logs(
        ClaimId::MomentNormLower,
        0.0,
        ln_rhs,
        auto_tol(&[&np, &s]),
        VerdictInputs {
            p: Some(p),
            alpha: Some(alpha),
            ..Default::default()
        },
    ))
}

/// The intermediate quantity `V` of the moment lower bound and its two bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentBoundSteps {
    pub v: f64,
    pub lower: f64,
    pub upper: f64,
    pub lower_ok: bool,
    pub upper_ok: bool,
    pub tol: f64,
}

/// `V = ∫ f(x) exp(-(β/p')(σ_α^{-α}|x - E X|^α - 1)) dx` with `β = 1/α`,
/// checked against `1 ≤ V ≤ ‖f‖_p (C_α σ_α)^{1/p'}`.
pub fn check_lemma1_proof_steps<D: Density1d + ?Sized>(f: &D, p: Exponent, alpha: f64) -> Result<MomentBoundSteps> {
    let pv = match p.validate()? {
        Exponent::Finite(v) if v > 1.0 => v,
        _ => return Err(Error::usage("the intermediate bound needs 1 < p < ∞")),
    };
    let inv_conj = 1.0 - 1.0 / pv;
    let m = f.mean()?.value;
    let s = sigma_alpha(f, alpha)?;
    let np = lp_norm(f, p)?;
    let beta = 1.0 / alpha;
    let sigma_pow = s.value.powf(alpha);
    let (lo, hi) = f.support();
    let mut breaks = f.breakpoints();
    breaks.push(m);
    let r = Quadrature::default()
        .tail_scale(f.length_scale())
        .integrate_with_breaks(
            |x| {
                let l = f.log_density(x);
                if l == f64::NEG_INFINITY {
                    return 0.0;
                }
                (l - beta * inv_conj * ((x - m).abs().powf(alpha) / sigma_pow - 1.0)).exp()
            },
            lo,
            hi,
            &breaks,
        )?;
    let upper = np.value * (ln_c_alpha(alpha).exp() * s.value).powf(inv_conj);
    let tol = STEP_TOL;
    Ok(MomentBoundSteps {
        v: r.value,
        lower: 1.0,
        upper,
        lower_ok: r.value >= 1.0 - tol,
        upper_ok: r.value <= upper * (1.0 + tol),
        tol,
    })
}

/// `‖f‖_p ‖f‖_∞^{1/p-1} ≤ 1`, with equality at `p = ∞`.
pub fn check_lemma3<D: Density1d + ?Sized>(f: &D, p: Exponent) -> Result<InequalityVerdict> {
    let p = p.validate()?;
    let np = lp_norm(f, p)?;
    let sup = f.sup_norm();
    let ln_lhs = ln(&np) + (p.recip() - 1.0) * ln(&sup);
    Ok(InequalityVerdict::from_logs(
        ClaimId::SupNormHolder,
        ln_lhs,
        0.0,
        auto_tol(&[&np, &sup]),
        VerdictInputs {
            p: Some(p),
            ..Default::default()
        },
    ))
}

/// `‖f‖_∞ ≤ 2‖f‖_2²` on the line.
pub fn check_lemma4<D: Density1d + ?Sized>(f: &D) -> Result<InequalityVerdict> {
    let sup = f.sup_norm();
    let n2 = lp_norm(f, Exponent::Finite(2.0))?;
    Ok(InequalityVerdict::from_logs(
        ClaimId::SupNormL2,
        ln(&sup),
        std::f64::consts::LN_2 + 2.0 * ln(&n2),
        auto_tol(&[&sup, &n2]),
        VerdictInputs {
            n: Some(1),
            ..Default::default()
        },
    ))
}

/// `‖f‖_∞ σ_α ≤ D_α`, or with `tightened` (α = 2 only) `‖f‖_∞ σ ≤ 1`.
pub fn check_lemma5<D: Density1d + ?Sized>(f: &D, alpha: f64, tightened: bool) -> Result<InequalityVerdict> {
    constant_alpha(alpha)?;
    require_variance_form(alpha, tightened)?;
    let sup = f.sup_norm();
    let s = sigma_alpha(f, alpha)?;
    let (claim, ln_rhs) = if tightened {
        (ClaimId::SupNormStdDev, 0.0)
    } else {
        (ClaimId::SupNormMoment, ln_d_alpha(alpha))
    };
    Ok(InequalityVerdict::from_logs(
        claim,
        ln(&sup) + ln(&s),
        ln_rhs,
        auto_tol(&[&sup, &s]),
        VerdictInputs {
            alpha: Some(alpha),
            ..Default::default()
        },
    ))
}

/// For a density symmetric about `c`: `f(c) ≤ D_α / (2 E[|X - c|^α]^{1/α})`.
pub fn check_symmetric_density_bound<D: Density1d + ?Sized>(f: &D, alpha: f64) -> Result<InequalityVerdict> {
    let c = require_symmetric(f)?;
    constant_alpha(alpha)?;
    // the mean of a symmetric density is its center, so σ_α is the moment about c
    let s = sigma_alpha(f, alpha)?;
    Ok(InequalityVerdict::from_logs(
        ClaimId::SymmetricCenterValue,
        f.log_density(c),
        ln_d_alpha(alpha) - std::f64::consts::LN_2 - ln(&s),
        auto_tol(&[&s]),
        VerdictInputs {
            alpha: Some(alpha),
            ..Default::default()
        },
    ))
}

/// `‖f‖_{p,Ω} ≤ μ(Ω)^{1/p-1/q} ‖f‖_{q,Ω}` for `Ω = [a, b]` and `p ≤ q`.
pub fn check_finite_measure_inequality<D: Density1d + ?Sized>(
    f: &D,
    interval: (f64, f64),
    p: Exponent,
    q: Exponent,
) -> Result<InequalityVerdict> {
    let (p, q) = (p.validate()?, q.validate()?);
    if p.value() > q.value() {
        return Err(Error::usage(format!(
            "finite-measure bound needs p ≤ q, got p = {p}, q = {q}"
        )));
    }
    let (a, b) = interval;
    let np = restricted_lp_norm(f, p, a, b)?;
    let nq = restricted_lp_norm(f, q, a, b)?;
    let inputs = VerdictInputs {
        p: Some(p),
        q: Some(q),
        interval: Some([a, b]),
        ..Default::default()
    };
    let tol = auto_tol(&[&np, &nq]);
    if np.value == 0.0 {
        return Ok(InequalityVerdict::from_logs(
            ClaimId::FiniteMeasure,
            0.0,
            0.0,
            tol,
            inputs,
        ));
    }
    let ln_rhs = (p.recip() - q.recip()) * (b - a).ln() + ln(&nq);
    Ok(InequalityVerdict::from_logs(
        ClaimId::FiniteMeasure,
        ln(&np),
        ln_rhs,
        tol,
        inputs,
    ))
}

/// Numerical checks on the density of `X - Y` for independent `X, Y ~ f`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DifferenceDensityReport {
    pub alpha: f64,
    /// `f_{X-Y}(0)` by quadrature.
    pub value_at_zero: f64,
    /// `‖f‖_2²` from the norm routines.
    pub l2_norm_squared: f64,
    pub value_at_zero_ok: bool,
    /// Largest `|f_{X-Y}(z) - f_{X-Y}(-z)|` over the grid, relative to the peak.
    pub max_asymmetry: f64,
    pub symmetric_ok: bool,
    /// `E|X - Y|^α`.
    pub abs_moment: f64,
    /// `σ_α^α`.
    pub central_moment: f64,
    pub jensen_ok: bool,
    /// `E|X - Y|²` and `2σ²`; only compared when `α = 2`.
    pub second_moment: f64,
    pub twice_variance: f64,
    pub second_moment_ok: bool,
    pub grid_points: usize,
}

impl DifferenceDensityReport {
    pub fn all_ok(&self) -> bool {
        self.value_at_zero_ok && self.symmetric_ok && self.jensen_ok && self.second_moment_ok
    }
}

const DIFF_GRID: usize = 4096;
const DIFF_TOL: f64 = 1e-8;

/// Self-correlation `∫ f(x) f(x - z) dx`.
fn difference_density<D: Density1d + ?Sized>(f: &D, z: f64, ln_peak: f64) -> Result<f64> {
    let (lo, hi) = f.support();
    let (a, b) = (lo.max(lo + z), hi.min(hi + z));
    if !(a < b) {
        return Ok(0.0);
    }
    let mut breaks = f.breakpoints();
    breaks.extend(f.breakpoints().iter().map(|k| k + z));
    let r = Quadrature::default()
        .tail_scale(f.length_scale())
        .integrate_with_breaks(
            |x| {
                let l = f.log_density(x) + f.log_density(x - z);
                if l == f64::NEG_INFINITY {
                    0.0
                } else {
                    (l - 2.0 * ln_peak).exp()
                }
            },
            a,
            b,
            &breaks,
        )?;
    Ok(r.value * (2.0 * ln_peak).exp())
}

/// Forms `f_{X-Y}` by nested quadrature and checks the identities used to
/// bound the supremum through the difference density: `f_{X-Y}(0) = ‖f‖_2²`,
/// symmetry, `E|X-Y|^α ≥ σ_α^α`, and `E|X-Y|² = 2σ²`.
pub fn check_difference_density_steps<D: Density1d + ?Sized>(f: &D, alpha: f64) -> Result<DifferenceDensityReport> {
    constant_alpha(alpha)?;
    let ln_peak = f.log_density(f.mode());
    let sd = f.sigma_alpha(2.0)?.value;
    let l2sq = lp_norm(f, Exponent::Finite(2.0))?.value.powi(2);
    let at_zero = difference_density(f, 0.0, ln_peak)?;

    // symmetry on a grid spanning ±12 standard deviations of X - Y
    let half = 12.0 * std::f64::consts::SQRT_2 * sd;
    let step = 2.0 * half / DIFF_GRID as f64;
    let mut max_asym: f64 = 0.0;
    for i in 1..=DIFF_GRID / 2 {
        let z = i as f64 * step;
        let (up, down) = (difference_density(f, z, ln_peak)?, difference_density(f, -z, ln_peak)?);
        max_asym = max_asym.max((up - down).abs());
    }
    let max_asym = max_asym / at_zero;

    let moment = |order: f64| -> Result<f64> {
        let (lo, hi) = f.support();
        let width = hi - lo;
        let mut breaks = vec![0.0];
        let knots = f.breakpoints();
        for a in &knots {
            for b in &knots {
                if a != b {
                    breaks.push(a - b);
                }
            }
        }
        let q = Quadrature::default().tail_scale(sd);
        let g = |z: f64| {
            let d = difference_density(f, z, ln_peak).unwrap_or(f64::NAN);
            z.abs().powf(order) * d
        };
        let r = q.integrate_with_breaks(g, -width, width, &breaks)?;
        if r.value.is_nan() {
            return Err(Error::NonConvergence {
                estimate: r.value,
                error: r.abs_error_estimate,
                subdivisions: r.subdivisions,
            });
        }
        Ok(r.value)
    };
    let abs_moment = moment(alpha)?;
    let central = sigma_alpha(f, alpha)?.value.powf(alpha);
    let (second, second_ok) = if alpha == 2.0 {
        (
            abs_moment,
            (abs_moment - 2.0 * sd * sd).abs() <= DIFF_TOL * 2.0 * sd * sd,
        )
    } else {
        let m2 = moment(2.0)?;
        (m2, (m2 - 2.0 * sd * sd).abs() <= DIFF_TOL * 2.0 * sd * sd)
    };
    Ok(DifferenceDensityReport {
        alpha,
        value_at_zero: at_zero,
        l2_norm_squared: l2sq,
        value_at_zero_ok: (at_zero - l2sq).abs() <= DIFF_TOL * l2sq,
        max_asymmetry: max_asym,
        symmetric_ok: max_asym <= DIFF_TOL,
        abs_moment,
        central_moment: central,
        jensen_ok: abs_moment >= central * (1.0 - DIFF_TOL),
        second_moment: second,
        twice_variance: 2.0 * sd * sd,
        second_moment_ok: second_ok,
        grid_points: DIFF_GRID,
    })
}

/// Parameters for [`check_claim`]. Fields a claim does not use are ignored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClaimParams {
    pub p: Exponent,
    pub q: Exponent,
    pub alpha: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interval: Option<(f64, f64)>,
}

impl Default for ClaimParams {
    fn default() -> Self {
        Self {
            p: Exponent::Finite(2.0),
            q: Exponent::Finite(1.0),
            alpha: 2.0,
            interval: None,
        }
    }
}

/// Dispatches a one-dimensional claim by id.
pub fn check_claim<D: Density1d + ?Sized>(claim: ClaimId, f: &D, params: &ClaimParams) -> Result<InequalityVerdict> {
    let ClaimParams { p, q, alpha, interval } = *params;
    match claim {
        ClaimId::NormRatio => check_theorem1(f, p, q, alpha, false),
        ClaimId::NormRatioVariance => check_theorem1(f, p, q, 2.0, true),
        ClaimId::NormSandwichLower => check_corollary1(f, p, q, alpha).map(|v| v.0),
        ClaimId::NormSandwichUpper => check_corollary1(f, p, q, alpha).map(|v| v.1),
        ClaimId::EntropyLower => check_corollary2(f, alpha).map(|v| v.0),
        ClaimId::EntropyUpper => check_corollary2(f, alpha).map(|v| v.1),
        ClaimId::SymmetricNormRatio => check_proposition1(f, p, q, alpha),
        ClaimId::MomentNormLower => check_lemma1(f, p, alpha),
        ClaimId::SupNormHolder => check_lemma3(f, p),
        ClaimId::SupNormL2 => check_lemma4(f),
        ClaimId::SupNormMoment => check_lemma5(f, alpha, false),
        ClaimId::SupNormStdDev => check_lemma5(f, 2.0, true),
        ClaimId::SymmetricCenterValue => check_symmetric_density_bound(f, alpha),
        ClaimId::FiniteMeasure => {
            let (a, b) = interval.ok_or_else(|| Error::usage("finite-measure claim needs an interval"))?;
            check_finite_measure_inequality(f, (a, b), p, q)
        }
        other => Err(Error::usage(format!(
            "`{other}` is a claim about densities on ℝⁿ, n ≥ 2"
        ))),
    }
}
