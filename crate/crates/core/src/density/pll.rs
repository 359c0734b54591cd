//! Densities whose logarithm is continuous and piecewise linear.
//!
//! Such a density is log-concave exactly when its slope sequence
//! (left tail, interior segments, right tail) is non-increasing. Every
//! functional that only involves `f^p`, `x·f` or `f·log f` integrates in
//! closed form segment by segment.

use rand::Rng;

use crate::error::{Error, Result};
use crate::quadrature::ln_exp_affine_integral;

/// Relative slack when comparing consecutive slopes; absorbs rounding from
/// affine maps and symmetrization.
const SLOPE_SLACK: f64 = 1e-9;

/// One linear piece of `log f`: `log f(x) = log_at_anchor + slope·(x - anchor)` on `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub lo: f64,
    pub hi: f64,
    pub anchor: f64,
    pub log_at_anchor: f64,
    pub slope: f64,
}

impl Segment {
    /// `ln ∫_lo^hi exp(p·log f)`.
    pub fn ln_mass_power(&self, p: f64) -> f64 {
        ln_exp_affine_integral(
            p * self.log_at_anchor,
            p * self.slope,
            self.lo - self.anchor,
            self.hi - self.anchor,
        )
        .expect("segment orientation validated at construction")
    }

    /// Mean of `x - anchor` under the normalized restriction of `f` to this segment.
    pub fn mean_offset(&self) -> f64 {
        match (self.lo.is_finite(), self.hi.is_finite()) {
            (true, true) => {
                let w = self.hi - self.lo;
                if self.anchor == self.lo {
                    w * truncated_exp_mean(self.slope * w)
                } else {
                    -w * truncated_exp_mean(-self.slope * w)
                }
            }
            (true, false) => -1.0 / self.slope,
            (false, true) => -1.0 / self.slope,
            (false, false) => unreachable!("segments have at least one finite end"),
        }
    }

    /// Variance under the normalized restriction of `f` to this segment.
    pub fn variance(&self) -> f64 {
        if self.lo.is_finite() && self.hi.is_finite() {
            let w = self.hi - self.lo;
            w * w * truncated_exp_variance(self.slope * w)
        } else {
            1.0 / (self.slope * self.slope)
        }
    }
}

/// Mean of the density `∝ e^{t·u}` on `u ∈ [0, 1]`.
pub(crate) fn truncated_exp_mean(t: f64) -> f64 {
    if t.abs() < 0.05 {
        let t2 = t * t;
        0.5 + t * (1.0 / 12.0 - t2 * (1.0 / 720.0 - t2 / 30240.0))
    } else if t > 0.0 {
        1.0 / (-(-t).exp_m1()) - 1.0 / t
    } else {
        1.0 - truncated_exp_mean(-t)
    }
}

/// Variance of the density `∝ e^{t·u}` on `u ∈ [0, 1]`.
pub(crate) fn truncated_exp_variance(t: f64) -> f64 {
    if t.abs() < 0.05 {
        let t2 = t * t;
        1.0 / 12.0 - t2 * (1.0 / 240.0 - t2 * (1.0 / 6048.0 - t2 / 172_800.0))
    } else {
        let s = (0.5 * t).sinh();
        1.0 / (t * t) - 1.0 / (4.0 * s * s)
    }
}

pub(crate) fn log_sum_exp(values: impl IntoIterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.into_iter().collect();
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// A normalized piecewise log-linear density with exponential tails on both sides.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLogLinear {
    knots: Vec<f64>,
    log_values: Vec<f64>,
    left_slope: f64,
    right_slope: f64,
    log_normalizer: f64,
}

impl PiecewiseLogLinear {
    /// Builds and normalizes a density from knot positions, (possibly
    /// unnormalized) log-density values at the knots and the two tail slopes.
    pub fn new(knots: Vec<f64>, log_values: Vec<f64>, left_slope: f64, right_slope: f64) -> Result<Self> {
        if knots.is_empty() {
            return Err(Error::invalid("at least one knot is required"));
        }
        if knots.len() != log_values.len() {
            return Err(Error::invalid(format!(
                "{} knots but {} log values",
                knots.len(),
                log_values.len()
            )));
        }
        if knots.iter().chain(log_values.iter()).any(|v| !v.is_finite()) {
            return Err(Error::invalid("knots and log values must be finite"));
        }
        if let Some(w) = knots.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::invalid(format!(
                "knots must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        if !(left_slope.is_finite() && left_slope > 0.0) {
            return Err(Error::invalid(format!(
                "left tail slope must be positive, got {left_slope}"
            )));
        }
        if !(right_slope.is_finite() && right_slope < 0.0) {
            return Err(Error::invalid(format!(
                "right tail slope must be negative, got {right_slope}"
            )));
        }
        let mut slopes = Vec::with_capacity(knots.len() + 1);
        slopes.push(left_slope);
        for i in 0..knots.len() - 1 {
            slopes.push((log_values[i + 1] - log_values[i]) / (knots[i + 1] - knots[i]));
        }
        slopes.push(right_slope);
        for (i, w) in slopes.windows(2).enumerate() {
            let slack = SLOPE_SLACK * w[0].abs().max(w[1].abs()).max(1.0);
            if w[1] > w[0] + slack {
                return Err(Error::invalid(format!(
                    "slope increases from {} to {} at knot {i}: log-density is not concave",
                    w[0], w[1]
                )));
            }
        }
        // anchor at the peak first; large offsets would otherwise eat the
        // absolute precision of the normalized log values
        let peak = log_values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut out = Self {
            knots,
            log_values: log_values.iter().map(|l| l - peak).collect(),
            left_slope,
            right_slope,
            log_normalizer: 0.0,
        };
        let ln_mass = out.ln_integral_power(1.0);
        for l in &mut out.log_values {
            *l -= ln_mass;
        }
        out.log_normalizer = ln_mass + peak;
        Ok(out)
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn log_values(&self) -> &[f64] {
        &self.log_values
    }

    pub fn left_slope(&self) -> f64 {
        self.left_slope
    }

    pub fn right_slope(&self) -> f64 {
        self.right_slope
    }

    /// `ln` of the total mass of the input before normalization.
    pub fn log_normalizer(&self) -> f64 {
        self.log_normalizer
    }

    /// Full slope sequence: left tail, interior segments, right tail.
    pub fn slopes(&self) -> Vec<f64> {
        self.segments().map(|s| s.slope).collect()
    }

    pub fn segments(&self) -> impl Iterator<Item = Segment> + '_ {
        let k = self.knots.len();
        let left = Segment {
            lo: f64::NEG_INFINITY,
            hi: self.knots[0],
            anchor: self.knots[0],
            log_at_anchor: self.log_values[0],
            slope: self.left_slope,
        };
        let right = Segment {
            lo: self.knots[k - 1],
            hi: f64::INFINITY,
            anchor: self.knots[k - 1],
            log_at_anchor: self.log_values[k - 1],
            slope: self.right_slope,
        };
        // anchor each piece at its higher end so steep pieces keep their precision
        let interior = (0..k - 1).map(move |i| {
            let j = if self.log_values[i + 1] > self.log_values[i] {
                i + 1
            } else {
                i
            };
            Segment {
                lo: self.knots[i],
                hi: self.knots[i + 1],
                anchor: self.knots[j],
                log_at_anchor: self.log_values[j],
                slope: (self.log_values[i + 1] - self.log_values[i]) / (self.knots[i + 1] - self.knots[i]),
            }
        });
        std::iter::once(left).chain(interior).chain(std::iter::once(right))
    }

    pub fn log_density(&self, x: f64) -> f64 {
        let k = self.knots.len();
        if x <= self.knots[0] {
            return self.log_values[0] + self.left_slope * (x - self.knots[0]);
        }
        if x >= self.knots[k - 1] {
            return self.log_values[k - 1] + self.right_slope * (x - self.knots[k - 1]);
        }
        let i = self.knots.partition_point(|&t| t <= x) - 1;
        let (x0, x1) = (self.knots[i], self.knots[i + 1]);
        let (l0, l1) = (self.log_values[i], self.log_values[i + 1]);
        l0 + (l1 - l0) * (x - x0) / (x1 - x0)
    }

    /// `ln ∫ f^p` in closed form.
    pub fn ln_integral_power(&self, p: f64) -> f64 {
        log_sum_exp(self.segments().map(|s| s.ln_mass_power(p)))
    }

    fn segment_masses(&self) -> Vec<(Segment, f64)> {
        self.segments().map(|s| (s, s.ln_mass_power(1.0).exp())).collect()
    }

    pub fn mean(&self) -> f64 {
        let mode = self.mode();
        // accumulate around the mode to limit cancellation
        let shifted: f64 = self
            .segment_masses()
            .iter()
            .map(|(s, m)| m * (s.anchor - mode + s.mean_offset()))
            .sum();
        mode + shifted
    }

    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.segment_masses()
            .iter()
            .map(|(s, m)| {
                let d = s.anchor + s.mean_offset() - mean;
                m * (s.variance() + d * d)
            })
            .sum()
    }

    /// `-∫ f log f` in closed form.
    pub fn entropy(&self) -> f64 {
        -self
            .segment_masses()
            .iter()
            .map(|(s, m)| m * (s.log_at_anchor + s.slope * s.mean_offset()))
            .sum::<f64>()
    }

    /// A maximizing knot; the first one if the maximum is attained on a flat segment.
    pub fn mode(&self) -> f64 {
        self.knots[self.mode_index()]
    }

    fn mode_index(&self) -> usize {
        let mut best = 0;
        for (i, l) in self.log_values.iter().enumerate() {
            if *l > self.log_values[best] {
                best = i;
            }
        }
        best
    }

    pub fn ln_sup(&self) -> f64 {
        self.log_values[self.mode_index()]
    }

    /// Density of `c·X + t`. Knots map to `c·x + t`, slopes divide by `c`.
    pub fn affine(&self, c: f64, t: f64) -> Result<Self> {
        if c == 0.0 || !c.is_finite() || !t.is_finite() {
            return Err(Error::domain(format!("affine map needs finite nonzero scale, got {c}")));
        }
        let shift = -c.abs().ln();
        let mut pts: Vec<(f64, f64)> = self
            .knots
            .iter()
            .zip(&self.log_values)
            .map(|(x, l)| (c * x + t, l + shift))
            .collect();
        let (left, right) = if c > 0.0 {
            (self.left_slope / c, self.right_slope / c)
        } else {
            pts.reverse();
            (self.right_slope / c, self.left_slope / c)
        };
        let (knots, logs) = pts.into_iter().unzip();
        Self::new(knots, logs, left, right)
    }

    /// Interval outside of which the total mass is at most `tail_mass`.
    pub fn clip_interval(&self, tail_mass: f64) -> (f64, f64) {
        let k = self.knots.len();
        let half = 0.5 * tail_mass;
        let lo = self.knots[0] + ((half * self.left_slope).ln() - self.log_values[0]) / self.left_slope;
        let hi = self.knots[k - 1] + ((half * -self.right_slope).ln() - self.log_values[k - 1]) / self.right_slope;
        (lo.min(self.knots[0]), hi.max(self.knots[k - 1]))
    }

    /// Inverse-CDF sampling, exact per segment.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let masses = self.segment_masses();
        let mut u: f64 = rng.random::<f64>();
        let last = masses.len() - 1;
        for (i, (s, m)) in masses.iter().enumerate() {
            if u < *m || i == last {
                let v = (u / m).clamp(0.0, 1.0);
                return sample_in_segment(s, v, rng);
            }
            u -= m;
        }
        unreachable!()
    }

    /// Whether `log f(c + d) = log f(c - d)` to within `tol` at every knot offset and a fixed probe set.
    pub fn is_symmetric_about(&self, center: f64, tol: f64) -> bool {
        let mut offsets: Vec<f64> = self.knots.iter().map(|x| (x - center).abs()).collect();
        let span = offsets.iter().copied().fold(1.0, f64::max);
        offsets.extend((1..=64).map(|i| span * 1.5 * i as f64 / 64.0));
        offsets
            .iter()
            .all(|d| (self.log_density(center + d) - self.log_density(center - d)).abs() <= tol)
    }
}

fn sample_in_segment<R: Rng + ?Sized>(s: &Segment, v: f64, rng: &mut R) -> f64 {
    let v = if v <= 0.0 || v >= 1.0 { rng.random::<f64>() } else { v };
    match (s.lo.is_finite(), s.hi.is_finite()) {
        (false, true) => s.hi + v.ln() / s.slope,
        (true, false) => s.lo + (1.0 - v).ln() / s.slope,
        _ => {
            let w = s.hi - s.lo;
            let t = s.slope * w;
            if t.abs() < 1e-12 {
                s.lo + v * w
            } else {
                // invert (e^{t·u} - 1)/(e^t - 1) = v
                s.lo + w * (v * t.exp_m1()).ln_1p() / t
            }
        }
    }
}
