//! Gamma-family special functions and the closed-form constants of the norm
//! inequalities.
//!
//! `C_α = (2/α)·Γ(1/α)·(αe)^{1/α}` and `D_α = Γ(α+1)^{1/α}` govern the
//! one-dimensional bounds; `C(n) = (2πe)^{n/2}` and
//! `D(n) = (n²e² / (2√2(n+2)))^{n/2}` govern the n-dimensional ones.

use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Lanczos series `A(x)` for `Γ(x + 1)`, with `x ≥ -0.5`.
fn lanczos_sum(x: f64) -> f64 {
    let mut sum = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        sum += c / (x + i as f64);
    }
    sum
}

fn gamma_raw(x: f64) -> f64 {
    if x < 0.5 {
        // Reflection keeps the Lanczos series in its accurate range.
        return PI / ((PI * x).sin() * gamma_raw(1.0 - x));
    }
    if x > 171.7 {
        return f64::INFINITY;
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    // t^(z+0.5) is split in two halves so it does not overflow before e^{-t} is applied.
    let half = t.powf(0.5 * (z + 0.5));
    (2.0 * PI).sqrt() * half * (half * (-t).exp()) * lanczos_sum(z)
}

/// `(x-1)!` computed exactly for integer `x` in `[1, 171]`.
fn integer_gamma(x: f64) -> Option<f64> {
    (x.fract() == 0.0 && (1.0..=171.0).contains(&x)).then(|| (2..x as u64).fold(1.0, |acc, k| acc * k as f64))
}

fn ln_gamma_raw(x: f64) -> f64 {
    if let Some(g) = integer_gamma(x) {
        return g.ln();
    }
    if x < 0.5 {
        return (PI / (PI * x).sin()).ln() - ln_gamma_raw(1.0 - x);
    }
    if x < 15.0 {
        return gamma_raw(x).ln();
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    LN_SQRT_2PI + (z + 0.5) * t.ln() - t + lanczos_sum(z).ln()
}

fn require_positive(x: f64, what: &str) -> Result<()> {
    if x.is_nan() || x <= 0.0 {
        return Err(Error::domain(format!("{what} requires a positive argument, got {x}")));
    }
    Ok(())
}

/// The gamma function on `(0, ∞)`.
pub fn gamma(x: f64) -> Result<f64> {
    require_positive(x, "gamma")?;
    Ok(integer_gamma(x).unwrap_or_else(|| gamma_raw(x)))
}

/// `ln Γ(x)` on `(0, ∞)`; finite far beyond the overflow point of [`gamma`].
pub fn ln_gamma(x: f64) -> Result<f64> {
    require_positive(x, "ln_gamma")?;
    Ok(ln_gamma_raw(x))
}

pub(crate) fn ln_gamma_pos(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    ln_gamma_raw(x)
}

/// `ln B(a, b)` for positive arguments.
pub(crate) fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma_raw(a) + ln_gamma_raw(b) - ln_gamma_raw(a + b)
}

/// Digamma `ψ(x) = Γ'(x)/Γ(x)` for `x > 0`.
pub fn digamma(x: f64) -> Result<f64> {
    require_positive(x, "digamma")?;
    let mut x = x;
    let mut acc = 0.0;
    while x < 12.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let inv2 = 1.0 / (x * x);
    // Asymptotic series with Bernoulli numbers B2..B12.
    let series = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0
                    - inv2 * (1.0 / 252.0 - inv2 * (1.0 / 240.0 - inv2 * (1.0 / 132.0 - inv2 * 691.0 / 32760.0)))));
    Ok(acc + x.ln() - 0.5 / x - series)
}

/// `C_α = (2/α)·Γ(1/α)·(αe)^{1/α}`, accepted for any `α > 0`.
pub fn c_alpha(alpha: f64) -> Result<f64> {
    require_positive(alpha, "c_alpha")?;
    Ok(ln_c_alpha(alpha).exp())
}

pub(crate) fn ln_c_alpha(alpha: f64) -> f64 {
    (2.0 / alpha).ln() + ln_gamma_raw(1.0 / alpha) + (alpha.ln() + 1.0) / alpha
}

/// `D_α = Γ(α+1)^{1/α}`, accepted for any `α > 0`.
pub fn d_alpha(alpha: f64) -> Result<f64> {
    require_positive(alpha, "d_alpha")?;
    Ok(ln_d_alpha(alpha).exp())
}

pub(crate) fn ln_d_alpha(alpha: f64) -> f64 {
    ln_gamma_raw(alpha + 1.0) / alpha
}

/// `C(n) = (2πe)^{n/2}`.
pub fn c_n(n: usize) -> Result<f64> {
    if n < 1 {
        return Err(Error::domain("c_n requires n ≥ 1"));
    }
    Ok(ln_c_n(n).exp())
}

pub(crate) fn ln_c_n(n: usize) -> f64 {
    0.5 * n as f64 * (2.0 * PI * E).ln()
}

/// `D(n) = (n²e² / (2√2(n+2)))^{n/2}`, defined for `n ≥ 2`.
pub fn d_n(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::domain(format!("d_n is defined for n ≥ 2, got {n}")));
    }
    Ok(ln_d_n(n).exp())
}

pub(crate) fn ln_d_n(n: usize) -> f64 {
    let nf = n as f64;
    0.5 * nf * (2.0 * nf.ln() + 2.0 - (2.0 * std::f64::consts::SQRT_2 * (nf + 2.0)).ln())
}

/// Moment order together with its two constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantSet {
    pub alpha: f64,
    pub c_alpha: f64,
    pub d_alpha: f64,
}

impl ConstantSet {
    pub fn new(alpha: f64) -> Result<Self> {
        Ok(Self {
            alpha,
            c_alpha: c_alpha(alpha)?,
            d_alpha: d_alpha(alpha)?,
        })
    }

    /// The one-dimensional theorems are stated for `α ≥ 1`; smaller orders are
    /// computed but reported as out of range.
    pub fn in_theorem_range(&self) -> bool {
        self.alpha >= 1.0
    }
}

/// Dimension together with `C(n)` and, for `n ≥ 2`, `D(n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultivariateConstantSet {
    pub n: usize,
    pub c_n: f64,
    pub d_n: Option<f64>,
}

impl MultivariateConstantSet {
    pub fn new(n: usize) -> Result<Self> {
        Ok(Self {
            n,
            c_n: c_n(n)?,
            d_n: if n >= 2 { Some(d_n(n)?) } else { None },
        })
    }
}

/// Minimizer of `β ↦ exp(β)·β^{-1/α}` over `β > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaOptimum {
    pub beta_star: f64,
    pub value: f64,
}

/// `exp(β)·β^{-1/α}`.
pub fn beta_objective(alpha: f64, beta: f64) -> f64 {
    (beta - beta.ln() / alpha).exp()
}

/// Closed-form optimum `β* = 1/α` of [`beta_objective`]; the value is `(αe)^{1/α}`.
pub fn beta_objective_min(alpha: f64) -> Result<BetaOptimum> {
    require_positive(alpha, "beta_objective_min")?;
    let beta_star = 1.0 / alpha;
    Ok(BetaOptimum {
        beta_star,
        value: beta_objective(alpha, beta_star),
    })
}

/// Numerical minimizer of [`beta_objective`] over `β ∈ (0, upper]`.
///
/// Golden-section search on the log-objective brackets the minimum, then a
/// bisection on the sign of a central-difference slope pushes the location
/// below the `sqrt(ε)` floor that value comparisons alone would hit.
pub fn beta_objective_argmin_numeric(alpha: f64, upper: f64) -> Result<f64> {
    require_positive(alpha, "beta_objective_argmin_numeric")?;
    let objective = |b: f64| b - b.ln() / alpha;
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (1e-12_f64, upper);
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let (mut fc, mut fd) = (objective(c), objective(d));
    for _ in 0..200 {
        if hi - lo < 1e-6 * hi.max(1.0) {
            break;
        }
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = objective(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = objective(d);
        }
    }
    // widen the bracket slightly so the true minimum is strictly inside
    let width = hi - lo;
    let (mut lo, mut hi) = ((lo - width).max(1e-12), (hi + width).min(upper));
    let slope = |b: f64| {
        let h = 1e-6 * b;
        objective(b + h) - objective(b - h)
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if slope(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn gamma_classical_values() {
        assert_eq!(gamma(1.0).unwrap(), 1.0);
        assert!(rel(gamma(0.5).unwrap(), PI.sqrt()) < 1e-14);
        assert!(rel(gamma(3.0).unwrap(), 2.0) < 1e-14);
    }

    #[test]
    fn gamma_rejects_non_positive() {
        assert!(matches!(gamma(0.0), Err(Error::Domain(_))));
        assert!(matches!(gamma(-1.5), Err(Error::Domain(_))));
        assert!(gamma(f64::NAN).is_err());
        assert!(c_alpha(0.0).is_err());
        assert!(d_alpha(-2.0).is_err());
    }

    #[test]
    fn digamma_at_one_is_minus_euler_gamma() {
        assert!((digamma(1.0).unwrap() + 0.577_215_664_901_532_9).abs() < 1e-14);
    }

    #[test]
    fn constants_at_alpha_one() {
        assert!(rel(c_alpha(1.0).unwrap(), 2.0 * E) < 1e-13);
        assert!(rel(d_alpha(1.0).unwrap(), 1.0) < 1e-13);
    }

    #[test]
    fn dimension_constants_reject_out_of_range() {
        assert!(c_n(0).is_err());
        assert!(d_n(1).is_err());
        assert!(MultivariateConstantSet::new(1).unwrap().d_n.is_none());
    }

    #[test]
    fn beta_optimum_at_alpha_one_is_e() {
        let opt = beta_objective_min(1.0).unwrap();
        assert_eq!(opt.beta_star, 1.0);
        assert!(rel(opt.value, E) < 1e-15);
    }

    #[test]
    fn constant_set_flags_small_alpha() {
        assert!(!ConstantSet::new(0.5).unwrap().in_theorem_range());
        assert!(ConstantSet::new(1.0).unwrap().in_theorem_range());
    }
}
