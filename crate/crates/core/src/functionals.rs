//! Norms, moments and entropies of one-dimensional densities.
//!
//! [`Density1d`] is the interface every checker works against. Its default
//! methods compute functionals by adaptive quadrature; [`DensityHandle`]
//! overrides them with closed forms (catalog) or exact segment sums
//! (piecewise log-linear). The [`adaptive`] and [`riemann`] modules expose the
//! independent routes directly so they can be compared.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Mutex;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::density::{DensityHandle, Representation};
use crate::error::{Error, Result};

/// Exponent `p ∈ [1, ∞]` of an L^p norm. `∞` is a distinct value so that
/// `1/p` is exactly zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub fn new(p: f64) -> Self {
        if p == f64::INFINITY {
            Exponent::Infinity
        } else {
            Exponent::Finite(p)
        }
    }

    /// `1/p`, with `1/∞ = 0` exactly.
    pub fn recip(self) -> f64 {
        match self {
            Exponent::Finite(p) => 1.0 / p,
            Exponent::Infinity => 0.0,
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Exponent::Finite(p) => p,
            Exponent::Infinity => f64::INFINITY,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Exponent::Infinity)
    }

    /// Rejects exponents below one (and NaN).
    pub fn validate(self) -> Result<Self> {
        match self {
            Exponent::Finite(p) if !(p >= 1.0) || p.is_infinite() => {
                Err(Error::domain(format!("norm exponent must lie in [1, ∞], got {p}")))
            }
            other => Ok(other),
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinity => f.write_str("inf"),
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "Inf" | "infinity" | "∞" => Ok(Exponent::Infinity),
            t => t
                .parse::<f64>()
                .map(Exponent::new)
                .map_err(|_| Error::Parse(format!("not an exponent: `{s}`"))),
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Exponent::Finite(p) => s.serialize_f64(*p),
            Exponent::Infinity => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(p) => Ok(Exponent::new(p)),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FunctionalKind {
    LpNorm { p: Exponent },
    SigmaAlpha { alpha: f64 },
    DiffEntropy,
    RenyiEntropy { p: Exponent },
    Mean,
}

impl fmt::Display for FunctionalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionalKind::LpNorm { p } => write!(f, "lp({p})"),
            FunctionalKind::SigmaAlpha { alpha } => write!(f, "sigma({alpha})"),
            FunctionalKind::DiffEntropy => f.write_str("entropy"),
            FunctionalKind::RenyiEntropy { p } => write!(f, "renyi({p})"),
            FunctionalKind::Mean => f.write_str("mean"),
        }
    }
}

impl fmt::Display for FunctionalMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FunctionalMethod::ClosedForm => "closed_form",
            FunctionalMethod::ExactSegment => "exact_segment",
            FunctionalMethod::Adaptive => "adaptive",
            FunctionalMethod::RiemannOracle => "riemann_oracle",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionalMethod {
    ClosedForm,
    ExactSegment,
    Adaptive,
    RiemannOracle,
}

impl FunctionalMethod {
    /// Whether the value came out of numerical integration.
    pub fn is_quadrature(self) -> bool {
        matches!(self, FunctionalMethod::Adaptive | FunctionalMethod::RiemannOracle)
    }

    /// The less exact of two methods.
    pub fn combine(self, other: Self) -> Self {
        fn rank(m: FunctionalMethod) -> u8 {
            match m {
                FunctionalMethod::ClosedForm => 0,
                FunctionalMethod::ExactSegment => 1,
                FunctionalMethod::Adaptive => 2,
                FunctionalMethod::RiemannOracle => 3,
            }
        }
        if rank(other) > rank(self) {
            other
        } else {
            self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionalValue {
    #[serde(flatten)]
    pub kind: FunctionalKind,
    pub value: f64,
    pub error_estimate: f64,
    pub method: FunctionalMethod,
}

impl FunctionalValue {
    fn exact(kind: FunctionalKind, value: f64, method: FunctionalMethod) -> Self {
        Self {
            kind,
            value,
            error_estimate: 1e-15 * value.abs(),
            method,
        }
    }
}

/// A probability density on the real line, as seen by the functionals and checkers.
pub trait Density1d: Send + Sync {
    fn log_density(&self, x: f64) -> f64;

    /// Closure of the support; ends may be infinite.
    fn support(&self) -> (f64, f64);

    /// Interior points where the density is not smooth.
    fn breakpoints(&self) -> Vec<f64>;

    /// A global maximizer of the density.
    fn mode(&self) -> f64;

    /// Typical width, used to scale the half-line maps of the quadrature.
    fn length_scale(&self) -> f64;

    /// An interval whose complement carries at most `tail_mass`.
    fn clip_interval(&self, tail_mass: f64) -> (f64, f64);

    fn symmetry_center(&self) -> Option<f64> {
        None
    }

    fn is_log_concave(&self) -> bool {
        true
    }

    fn density(&self, x: f64) -> f64 {
        self.log_density(x).exp()
    }

    fn sup_norm(&self) -> FunctionalValue {
        FunctionalValue::exact(
            FunctionalKind::LpNorm { p: Exponent::Infinity },
            self.density(self.mode()),
            FunctionalMethod::ClosedForm,
        )
    }

    /// Where the density peaks on `[a, b]`. The default assumes unimodality.
    fn argmax_on(&self, a: f64, b: f64) -> f64 {
        self.mode().clamp(a, b)
    }

    /// Supremum of the density over `[a, b]`.
    fn sup_on(&self, a: f64, b: f64) -> f64 {
        let (lo, hi) = self.support();
        let (a, b) = (a.max(lo), b.min(hi));
        if a > b {
            return 0.0;
        }
        self.density(self.argmax_on(a, b))
    }

    fn lp_norm(&self, p: Exponent) -> Result<FunctionalValue> {
        adaptive::lp_norm(self, p)
    }

    fn mean(&self) -> Result<FunctionalValue> {
        adaptive::mean(self)
    }

    fn sigma_alpha(&self, alpha: f64) -> Result<FunctionalValue> {
        let m = self.mean()?;
        adaptive::sigma_alpha(self, alpha, m.value).map(|mut v| {
            v.error_estimate += m.error_estimate;
            v
        })
    }

    fn diff_entropy(&self) -> Result<FunctionalValue> {
        adaptive::diff_entropy(self)
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "moment order must be positive and finite, got {alpha}"
        )))
    }
}

fn unit_norm() -> FunctionalValue {
    FunctionalValue {
        kind: FunctionalKind::LpNorm {
            p: Exponent::Finite(1.0),
        },
        value: 1.0,
        error_estimate: 0.0,
        method: FunctionalMethod::ClosedForm,
    }
}

/// `‖f‖_p` for `p ∈ [1, ∞]`; `p = 1` is exactly one.
pub fn lp_norm<D: Density1d + ?Sized>(f: &D, p: Exponent) -> Result<FunctionalValue> {
    match p.validate()? {
        Exponent::Finite(1.0) => Ok(unit_norm()),
        Exponent::Infinity => Ok(f.sup_norm()),
        p => f.lp_norm(p),
    }
}

pub fn mean<D: Density1d + ?Sized>(f: &D) -> Result<FunctionalValue> {
    f.mean()
}

/// `σ_α = E[|X - E X|^α]^{1/α}`. Orders in `(0, 1)` are computed as well; the
/// checkers flag them as outside the theorem range.
pub fn sigma_alpha<D: Density1d + ?Sized>(f: &D, alpha: f64) -> Result<FunctionalValue> {
    check_alpha(alpha)?;
    f.sigma_alpha(alpha)
}

pub fn diff_entropy<D: Density1d + ?Sized>(f: &D) -> Result<FunctionalValue> {
    f.diff_entropy()
}

/// Rényi entropy `h_p = (p/(1-p))·ln ‖f‖_p` for `p > 1`; at `p = ∞` it is `-ln ‖f‖_∞`.
pub fn renyi_entropy<D: Density1d + ?Sized>(f: &D, p: Exponent) -> Result<FunctionalValue> {
    let kind = FunctionalKind::RenyiEntropy { p };
    match p {
        Exponent::Finite(v) if !(v > 1.0) || v.is_infinite() => Err(Error::domain(format!(
            "Rényi entropy here needs p > 1 (use diff_entropy at p = 1), got {v}"
        ))),
        Exponent::Infinity => {
            let s = f.sup_norm();
            Ok(FunctionalValue {
                kind,
                value: -s.value.ln(),
                error_estimate: s.error_estimate / s.value,
                method: s.method,
            })
        }
        Exponent::Finite(v) => {
            let n = f.lp_norm(p)?;
            let factor = v / (1.0 - v);
            Ok(FunctionalValue {
                kind,
                value: factor * n.value.ln(),
                error_estimate: factor.abs() * n.error_estimate / n.value,
                method: n.method,
            })
        }
    }
}

/// Limit of `h_{1+ε}` as `ε ↓ 0`, by Richardson extrapolation over
/// `ε = 2^{-3}, …, 2^{-12}`.
pub fn renyi_limit_at_one<D: Density1d + ?Sized>(f: &D) -> Result<f64> {
    let mut values = Vec::new();
    for k in 3..=12 {
        let eps = 2f64.powi(-k);
        values.push(renyi_entropy(f, Exponent::Finite(1.0 + eps))?.value);
    }
    Ok(richardson_halving(&values, 4))
}

/// Richardson extrapolation to step zero for samples taken at steps `h, h/2, h/4, …`,
/// assuming an expansion in integer powers of the step. Uses the last
/// `order + 1` samples.
pub fn richardson_halving(values: &[f64], order: usize) -> f64 {
    let order = order.min(values.len().saturating_sub(1));
    let mut table: Vec<f64> = values[values.len() - order - 1..].to_vec();
    for j in 1..=order {
        let factor = 2f64.powi(j as i32);
        for i in 0..table.len() - j {
            table[i] = (factor * table[i + 1] - table[i]) / (factor - 1.0);
        }
    }
    table[0]
}

/// Halvings of the interval placed around the peak in [`restricted_lp_norm`].
const PEAK_LADDER: i32 = 30;

/// `‖f‖_{p, [a,b]}`: the L^p norm of `f` restricted to an interval.
pub fn restricted_lp_norm<D: Density1d + ?Sized>(f: &D, p: Exponent, a: f64, b: f64) -> Result<FunctionalValue> {
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::domain(format!(
            "restriction interval must be finite with a < b, got [{a}, {b}]"
        )));
    }
    let p = p.validate()?;
    let kind = FunctionalKind::LpNorm { p };
    let peak = f.sup_on(a, b);
    if peak == 0.0 {
        return Ok(FunctionalValue {
            kind,
            value: 0.0,
            error_estimate: 0.0,
            method: FunctionalMethod::ClosedForm,
        });
    }
    match p {
        Exponent::Infinity => Ok(FunctionalValue::exact(kind, peak, FunctionalMethod::ClosedForm)),
        Exponent::Finite(pv) => {
            let (lo, hi) = f.support();
            let (a, b) = (a.max(lo), b.min(hi));
            let ln_peak = peak.ln();
            // f^p can be a spike far narrower than [a, b]; a geometric ladder of
            // breaks around the peak keeps the first panels from stepping over it
            let x_star = f.argmax_on(a, b);
            let mut breaks = f.breakpoints();
            breaks.push(x_star);
            for side in [-1.0, 1.0] {
                for j in 1..=PEAK_LADDER {
                    let x = x_star + side * (b - a) * 0.5f64.powi(j);
                    if x <= a || x >= b {
                        continue;
                    }
                    breaks.push(x);
                    // within a factor 2 of the peak here, so finer breaks add nothing
                    if pv * (ln_peak - f.log_density(x)) < std::f64::consts::LN_2 {
                        break;
                    }
                }
            }
            let q = crate::quadrature::Quadrature::default();
            let r = q.integrate_with_breaks(
                |x| {
                    let l = f.log_density(x);
                    if l == f64::NEG_INFINITY {
                        0.0
                    } else {
                        (pv * (l - ln_peak)).exp()
                    }
                },
                a,
                b,
                &breaks,
            )?;
            let value = (ln_peak + r.value.ln() / pv).exp();
            Ok(FunctionalValue {
                kind,
                value,
                error_estimate: value * r.abs_error_estimate / (pv * r.value),
                method: FunctionalMethod::Adaptive,
            })
        }
    }
}

/// Functionals by globally adaptive Gauss–Kronrod quadrature.
pub mod adaptive {
    use super::*;
    use crate::quadrature::Quadrature;

    fn quad<D: Density1d + ?Sized>(f: &D, decay: f64) -> Quadrature {
        Quadrature::default().tail_scale(f.length_scale() / decay)
    }

    fn integrate<D: Density1d + ?Sized>(f: &D, decay: f64, g: impl Fn(f64) -> f64) -> Result<(f64, f64)> {
        let (lo, hi) = f.support();
        let r = quad(f, decay).integrate_with_breaks(g, lo, hi, &f.breakpoints())?;
        Ok((r.value, r.abs_error_estimate))
    }

    /// `ln ∫ f^p` with the integrand scaled by the peak to avoid underflow.
    pub fn ln_integral_power<D: Density1d + ?Sized>(f: &D, p: f64) -> Result<(f64, f64)> {
        let ln_peak = f.log_density(f.mode());
        let (v, e) = integrate(f, p, |x| {
            let l = f.log_density(x);
            if l == f64::NEG_INFINITY {
                0.0
            } else {
                (p * (l - ln_peak)).exp()
            }
        })?;
        Ok((p * ln_peak + v.ln(), e / v))
    }

    pub fn lp_norm<D: Density1d + ?Sized>(f: &D, p: Exponent) -> Result<FunctionalValue> {
        let kind = FunctionalKind::LpNorm { p };
        match p.validate()? {
            Exponent::Infinity => Ok(f.sup_norm()),
            Exponent::Finite(1.0) => Ok(unit_norm()),
            Exponent::Finite(pv) => {
                let (ln, rel) = ln_integral_power(f, pv)?;
                let value = (ln / pv).exp();
                Ok(FunctionalValue {
                    kind,
                    value,
                    error_estimate: value * rel / pv,
                    method: FunctionalMethod::Adaptive,
                })
            }
        }
    }

    pub fn mean<D: Density1d + ?Sized>(f: &D) -> Result<FunctionalValue> {
        let m0 = f.mode();
        let (v, e) = integrate(f, 1.0, |x| {
            let d = f.density(x);
            if d == 0.0 {
                0.0
            } else {
                (x - m0) * d
            }
        })?;
        Ok(FunctionalValue {
            kind: FunctionalKind::Mean,
            value: m0 + v,
            error_estimate: e,
            method: FunctionalMethod::Adaptive,
        })
    }

    /// `σ_α` about a given center (normally the mean).
    pub fn sigma_alpha<D: Density1d + ?Sized>(f: &D, alpha: f64, center: f64) -> Result<FunctionalValue> {
        check_alpha(alpha)?;
        let (lo, hi) = f.support();
        let mut breaks = f.breakpoints();
        breaks.push(center);
        let r = quad(f, 1.0).integrate_with_breaks(
            |x| {
                let d = f.density(x);
                if d == 0.0 {
                    0.0
                } else {
                    (x - center).abs().powf(alpha) * d
                }
            },
            lo,
            hi,
            &breaks,
        )?;
        let value = r.value.powf(1.0 / alpha);
        Ok(FunctionalValue {
            kind: FunctionalKind::SigmaAlpha { alpha },
            value,
            error_estimate: value * r.abs_error_estimate / (alpha * r.value),
            method: FunctionalMethod::Adaptive,
        })
    }

    pub fn diff_entropy<D: Density1d + ?Sized>(f: &D) -> Result<FunctionalValue> {
        let (v, e) = integrate(f, 1.0, |x| {
            let l = f.log_density(x);
            if l == f64::NEG_INFINITY {
                0.0
            } else {
                -l * l.exp()
            }
        })?;
        Ok(FunctionalValue {
            kind: FunctionalKind::DiffEntropy,
            value: v,
            error_estimate: e,
            method: FunctionalMethod::Adaptive,
        })
    }
}

/// Functionals by the composite midpoint rule on a clipped domain.
///
/// Independent of [`adaptive`]: separate domain clipping (via
/// [`Density1d::clip_interval`]) and a separate evaluation loop.
pub mod riemann {
    use super::*;
    use crate::quadrature::riemann_oracle;

    pub const DEFAULT_POINTS: usize = 1_000_000;
    const TAIL_MASS: f64 = 1e-16;

    fn domain<D: Density1d + ?Sized>(f: &D) -> (f64, f64) {
        let (a, b) = f.clip_interval(TAIL_MASS);
        let (lo, hi) = f.support();
        (a.max(lo), b.min(hi))
    }

    fn sum<D: Density1d + ?Sized>(f: &D, n: usize, g: impl Fn(f64) -> f64) -> Result<f64> {
        let (a, b) = domain(f);
        Ok(riemann_oracle(g, a, b, n)?.value)
    }

    fn value(kind: FunctionalKind, value: f64) -> FunctionalValue {
        FunctionalValue {
            kind,
            value,
            error_estimate: 0.0,
            method: FunctionalMethod::RiemannOracle,
        }
    }

    pub fn lp_norm<D: Density1d + ?Sized>(f: &D, p: Exponent, n: usize) -> Result<FunctionalValue> {
        let kind = FunctionalKind::LpNorm { p };
        match p.validate()? {
            Exponent::Infinity => {
                // grid maximum, refined around the best cell
                let (a, b) = domain(f);
                let h = (b - a) / n as f64;
                let mut best = (f64::NEG_INFINITY, a);
                for i in 0..=n {
                    let x = a + i as f64 * h;
                    let l = f.log_density(x);
                    if l > best.0 {
                        best = (l, x);
                    }
                }
                Ok(value(kind, best.0.exp()))
            }
            Exponent::Finite(pv) => {
                let s = sum(f, n, |x| f.density(x).powf(pv))?;
                Ok(value(kind, s.powf(1.0 / pv)))
            }
        }
    }

    pub fn mean<D: Density1d + ?Sized>(f: &D, n: usize) -> Result<FunctionalValue> {
        Ok(value(FunctionalKind::Mean, sum(f, n, |x| x * f.density(x))?))
    }

    pub fn sigma_alpha<D: Density1d + ?Sized>(f: &D, alpha: f64, n: usize) -> Result<FunctionalValue> {
        check_alpha(alpha)?;
        let m = mean(f, n)?.value;
        let s = sum(f, n, |x| (x - m).abs().powf(alpha) * f.density(x))?;
        Ok(value(FunctionalKind::SigmaAlpha { alpha }, s.powf(1.0 / alpha)))
    }

    pub fn diff_entropy<D: Density1d + ?Sized>(f: &D, n: usize) -> Result<FunctionalValue> {
        let s = sum(f, n, |x| {
            let l = f.log_density(x);
            if l.is_finite() {
                -l * l.exp()
            } else {
                0.0
            }
        })?;
        Ok(value(FunctionalKind::DiffEntropy, s))
    }
}

impl Density1d for DensityHandle {
    fn log_density(&self, x: f64) -> f64 {
        DensityHandle::log_density(self, x)
    }

    fn support(&self) -> (f64, f64) {
        DensityHandle::support(self)
    }

    fn breakpoints(&self) -> Vec<f64> {
        DensityHandle::breakpoints(self)
    }

    fn mode(&self) -> f64 {
        self.mode_and_supnorm().0
    }

    fn length_scale(&self) -> f64 {
        match self.representation() {
            Representation::Analytic(a) => a.length_scale(),
            Representation::Pll(p) => p.variance().sqrt(),
        }
    }

    fn clip_interval(&self, tail_mass: f64) -> (f64, f64) {
        match self.representation() {
            Representation::Analytic(a) => a.clip_interval(tail_mass),
            Representation::Pll(p) => p.clip_interval(tail_mass),
        }
    }

    fn symmetry_center(&self) -> Option<f64> {
        DensityHandle::symmetry_center(self)
    }

    fn sup_norm(&self) -> FunctionalValue {
        let (ln, method) = match self.representation() {
            Representation::Analytic(a) => (a.ln_sup(), FunctionalMethod::ClosedForm),
            Representation::Pll(p) => (p.ln_sup(), FunctionalMethod::ExactSegment),
        };
        FunctionalValue::exact(FunctionalKind::LpNorm { p: Exponent::Infinity }, ln.exp(), method)
    }

    fn lp_norm(&self, p: Exponent) -> Result<FunctionalValue> {
        let kind = FunctionalKind::LpNorm { p };
        match p.validate()? {
            Exponent::Infinity => Ok(self.sup_norm()),
            Exponent::Finite(1.0) => Ok(unit_norm()),
            Exponent::Finite(pv) => Ok(match self.representation() {
                Representation::Analytic(a) => {
                    FunctionalValue::exact(kind, (a.ln_integral_power(pv) / pv).exp(), FunctionalMethod::ClosedForm)
                }
                Representation::Pll(f) => FunctionalValue::exact(
                    kind,
                    (f.ln_integral_power(pv) / pv).exp(),
                    FunctionalMethod::ExactSegment,
                ),
            }),
        }
    }

    fn mean(&self) -> Result<FunctionalValue> {
        Ok(match self.representation() {
            Representation::Analytic(a) => {
                FunctionalValue::exact(FunctionalKind::Mean, a.mean(), FunctionalMethod::ClosedForm)
            }
            Representation::Pll(p) => {
                FunctionalValue::exact(FunctionalKind::Mean, p.mean(), FunctionalMethod::ExactSegment)
            }
        })
    }

    fn sigma_alpha(&self, alpha: f64) -> Result<FunctionalValue> {
        check_alpha(alpha)?;
        let kind = FunctionalKind::SigmaAlpha { alpha };
        match self.representation() {
            Representation::Analytic(a) => {
                if let Some(v) = a.sigma_alpha(alpha) {
                    return Ok(FunctionalValue::exact(kind, v, FunctionalMethod::ClosedForm));
                }
                adaptive::sigma_alpha(self, alpha, a.mean())
            }
            Representation::Pll(p) => {
                if alpha == 2.0 {
                    return Ok(FunctionalValue::exact(
                        kind,
                        p.variance().sqrt(),
                        FunctionalMethod::ExactSegment,
                    ));
                }
                adaptive::sigma_alpha(self, alpha, p.mean())
            }
        }
    }

    fn diff_entropy(&self) -> Result<FunctionalValue> {
        Ok(match self.representation() {
            Representation::Analytic(a) => {
                FunctionalValue::exact(FunctionalKind::DiffEntropy, a.entropy(), FunctionalMethod::ClosedForm)
            }
            Representation::Pll(p) => {
                FunctionalValue::exact(FunctionalKind::DiffEntropy, p.entropy(), FunctionalMethod::ExactSegment)
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum MemoKey {
    Lp(u64),
    Sigma(u64),
    Mean,
    Entropy,
}

/// Caches functional values of a wrapped density. Safe to share across threads.
pub struct Memoized<'a, D: ?Sized> {
    inner: &'a D,
    cache: Mutex<HashMap<MemoKey, FunctionalValue>>,
}

impl<'a, D: Density1d + ?Sized> Memoized<'a, D> {
    pub fn new(inner: &'a D) -> Self {
        Self {
            inner,
            cache: Mutex::new(HashMap::new()),
        }
    }

    fn cached(&self, key: MemoKey, compute: impl FnOnce() -> Result<FunctionalValue>) -> Result<FunctionalValue> {
        if let Some(v) = self.cache.lock().expect("memo lock").get(&key) {
            return Ok(*v);
        }
        let v = compute()?;
        self.cache.lock().expect("memo lock").insert(key, v);
        Ok(v)
    }
}

impl<D: Density1d + ?Sized> Density1d for Memoized<'_, D> {
    fn log_density(&self, x: f64) -> f64 {
        self.inner.log_density(x)
    }
    fn support(&self) -> (f64, f64) {
        self.inner.support()
    }
    fn breakpoints(&self) -> Vec<f64> {
        self.inner.breakpoints()
    }
    fn mode(&self) -> f64 {
        self.inner.mode()
    }
    fn length_scale(&self) -> f64 {
        self.inner.length_scale()
    }
    fn clip_interval(&self, tail_mass: f64) -> (f64, f64) {
        self.inner.clip_interval(tail_mass)
    }
    fn symmetry_center(&self) -> Option<f64> {
        self.inner.symmetry_center()
    }
    fn is_log_concave(&self) -> bool {
        self.inner.is_log_concave()
    }
    fn sup_norm(&self) -> FunctionalValue {
        self.inner.sup_norm()
    }
    fn argmax_on(&self, a: f64, b: f64) -> f64 {
        self.inner.argmax_on(a, b)
    }
    fn sup_on(&self, a: f64, b: f64) -> f64 {
        self.inner.sup_on(a, b)
    }
    fn lp_norm(&self, p: Exponent) -> Result<FunctionalValue> {
        self.cached(MemoKey::Lp(p.value().to_bits()), || self.inner.lp_norm(p))
    }
    fn mean(&self) -> Result<FunctionalValue> {
        self.cached(MemoKey::Mean, || self.inner.mean())
    }
    fn sigma_alpha(&self, alpha: f64) -> Result<FunctionalValue> {
        self.cached(MemoKey::Sigma(alpha.to_bits()), || self.inner.sigma_alpha(alpha))
    }
    fn diff_entropy(&self) -> Result<FunctionalValue> {
        self.cached(MemoKey::Entropy, || self.inner.diff_entropy())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{AnalyticDensity, PiecewiseLogLinear};
    use std::f64::consts::{E, PI};

    fn h(a: AnalyticDensity) -> DensityHandle {
        a.into()
    }

    #[test]
    fn exponent_parsing_and_reciprocal() {
        assert_eq!("inf".parse::<Exponent>().unwrap(), Exponent::Infinity);
        assert_eq!("2.5".parse::<Exponent>().unwrap(), Exponent::Finite(2.5));
        assert!("x".parse::<Exponent>().is_err());
        assert_eq!(Exponent::Infinity.recip(), 0.0);
        assert!(Exponent::Finite(0.5).validate().is_err());
        assert!(Exponent::Finite(f64::NAN).validate().is_err());
        let json = serde_json::to_string(&vec![Exponent::Finite(2.0), Exponent::Infinity]).unwrap();
        assert_eq!(json, r#"[2.0,"inf"]"#);
        let back: Vec<Exponent> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, vec![Exponent::Finite(2.0), Exponent::Infinity]);
    }

    #[test]
    fn lp_norm_examples() {
        let g = h(AnalyticDensity::gaussian(0.0, 1.0).unwrap());
        let v = lp_norm(&g, Exponent::Finite(2.0)).unwrap();
        assert!((v.value - 0.531_125_966_013_598_5).abs() < 1e-14);
        assert_eq!(v.method, FunctionalMethod::ClosedForm);
        let e = h(AnalyticDensity::exponential(1.0).unwrap());
        assert!((lp_norm(&e, Exponent::Finite(2.0)).unwrap().value - 0.5f64.sqrt()).abs() < 1e-15);
        let u = h(AnalyticDensity::uniform(0.0, 1.0).unwrap());
        assert_eq!(lp_norm(&u, Exponent::Finite(7.0)).unwrap().value, 1.0);
        assert_eq!(lp_norm(&g, Exponent::Finite(1.0)).unwrap().value, 1.0);
        assert!(matches!(lp_norm(&g, Exponent::Finite(0.9)), Err(Error::Domain(_))));
    }

    #[test]
    fn mean_examples() {
        let g = h(AnalyticDensity::gaussian(3.0, 2.0).unwrap());
        assert_eq!(mean(&g).unwrap().value, 3.0);
        let e = h(AnalyticDensity::exponential(1.0).unwrap());
        assert_eq!(mean(&e).unwrap().value, 1.0);
        let sym = PiecewiseLogLinear::new(vec![1.0, 2.0, 3.0], vec![0.0, 0.7, 0.0], 1.5, -1.5).unwrap();
        assert!((mean(&DensityHandle::from(sym)).unwrap().value - 2.0).abs() < 1e-10);
    }

    #[test]
    fn sigma_alpha_examples() {
        let g = h(AnalyticDensity::gaussian(0.0, 1.0).unwrap());
        assert_eq!(sigma_alpha(&g, 2.0).unwrap().value, 1.0);
        assert!((sigma_alpha(&g, 1.0).unwrap().value - 0.797_884_560_8).abs() < 1e-10);
        let u = h(AnalyticDensity::uniform(0.0, 1.0).unwrap());
        assert!((sigma_alpha(&u, 2.0).unwrap().value - 0.288_675_134_6).abs() < 1e-10);
        let e = h(AnalyticDensity::exponential(1.0).unwrap());
        assert_eq!(sigma_alpha(&e, 2.0).unwrap().value, 1.0);
        assert!(sigma_alpha(&e, 0.0).is_err());
    }

    #[test]
    fn higher_moments_closed_form_or_quadrature() {
        let g = h(AnalyticDensity::gaussian(0.0, 1.0).unwrap());
        let v = sigma_alpha(&g, 3.0).unwrap();
        assert_eq!(v.method, FunctionalMethod::ClosedForm);
        // E|Z|^3 = 2·sqrt(2/π)
        assert!((v.value - (2.0 * (2.0 / PI).sqrt()).powf(1.0 / 3.0)).abs() < 1e-12);
        let q = adaptive::sigma_alpha(&g, 3.0, 0.0).unwrap();
        assert!((q.value - v.value).abs() < 1e-10);
        // E|X - 1|^3 for the unit exponential is 12/e - 2
        let e = h(AnalyticDensity::exponential(1.0).unwrap());
        let v = sigma_alpha(&e, 3.0).unwrap();
        assert_eq!(v.method, FunctionalMethod::Adaptive);
        assert!((v.value - (12.0 / std::f64::consts::E - 2.0).powf(1.0 / 3.0)).abs() < 1e-10);
    }

    #[test]
    fn entropy_examples() {
        let g = h(AnalyticDensity::gaussian(0.0, 1.0).unwrap());
        assert!((diff_entropy(&g).unwrap().value - 1.418_938_533_2).abs() < 1e-10);
        let u = h(AnalyticDensity::uniform(0.0, 1.0).unwrap());
        assert_eq!(diff_entropy(&u).unwrap().value, 0.0);
        let e = h(AnalyticDensity::exponential(1.0).unwrap());
        assert_eq!(diff_entropy(&e).unwrap().value, 1.0);
    }

    #[test]
    fn renyi_examples() {
        let u = h(AnalyticDensity::uniform(0.0, 1.0).unwrap());
        assert_eq!(renyi_entropy(&u, Exponent::Finite(3.0)).unwrap().value, 0.0);
        let g = h(AnalyticDensity::gaussian(0.0, 1.0).unwrap());
        let r2 = renyi_entropy(&g, Exponent::Finite(2.0)).unwrap().value;
        assert!((r2 + 2.0 * 0.531_125_966_013_598_5f64.ln()).abs() < 1e-14);
        assert!((r2 - 1.265_512_123_5).abs() < 1e-9);
        assert!(renyi_entropy(&g, Exponent::Finite(1.0)).is_err());
        let lim = renyi_limit_at_one(&g).unwrap();
        assert!((lim - 0.5 * (2.0 * PI * E).ln()).abs() < 1e-9);
    }

    #[test]
    fn restricted_norm_on_whole_support_matches_full_norm() {
        let u = h(AnalyticDensity::uniform(0.0, 1.0).unwrap());
        let r = restricted_lp_norm(&u, Exponent::Finite(3.0), 0.0, 1.0).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
        let e = h(AnalyticDensity::exponential(1.0).unwrap());
        assert_eq!(
            restricted_lp_norm(&e, Exponent::Finite(2.0), -3.0, -1.0).unwrap().value,
            0.0
        );
        assert_eq!(
            restricted_lp_norm(&e, Exponent::Infinity, 1.0, 2.0).unwrap().value,
            (-1.0f64).exp()
        );
    }

    #[test]
    fn memoized_returns_identical_values() {
        let g = h(AnalyticDensity::logistic(0.0, 1.0).unwrap());
        let m = Memoized::new(&g);
        let a = m.sigma_alpha(1.5).unwrap();
        let b = m.sigma_alpha(1.5).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, g.sigma_alpha(1.5).unwrap());
    }
}
