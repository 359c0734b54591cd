//! Checkers for the norm, moment and entropy inequalities.
//!
//! Every checker returns an [`InequalityVerdict`] carrying both sides of the
//! inequality, the signed margin `rhs - lhs` and the tightness ratio. Verdicts
//! never panic on a violation; deciding what to do with `holds = false` is the
//! caller's business.

mod checks;
mod fixtures;
pub mod report;
mod sweep;

pub use checks::*;
pub use fixtures::GaussianMixture;
pub use report::VerdictRow;
pub use sweep::{check_density, default_intervals, sweep_1d, SweepGrid};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{Exponent, FunctionalValue};

/// Tolerance for verdicts whose inputs are all closed-form or exact-segment values.
pub const EXACT_TOL: f64 = 1e-9;
/// Tolerance for verdicts with at least one quadrature-backed input.
pub const QUADRATURE_TOL: f64 = 1e-6;

macro_rules! claims {
    ($($variant:ident => $wire:literal, $nd:literal;)*) => {
        /// Identifies one inequality. The wire name is used on the command line and in reports.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        pub enum ClaimId {
            $(#[serde(rename = $wire)] $variant,)*
        }

        impl ClaimId {
            pub const ALL: &'static [ClaimId] = &[$(ClaimId::$variant,)*];

            pub fn wire_name(self) -> &'static str {
                match self {
                    $(ClaimId::$variant => $wire,)*
                }
            }

            /// Whether the claim concerns densities on ℝⁿ with n ≥ 2.
            pub fn is_multivariate(self) -> bool {
                match self {
                    $(ClaimId::$variant => $nd,)*
                }
            }
        }
    };
}

claims! {
    NormRatio => "theorem1", false;
    NormRatioVariance => "theorem1-tight", false;
    NormSandwichLower => "corollary1-lower", false;
    NormSandwichUpper => "corollary1-upper", false;
    EntropyLower => "corollary2-lower", false;
    EntropyUpper => "corollary2-upper", false;
    SymmetricNormRatio => "proposition1", false;
    MomentNormLower => "lemma1", false;
    SupNormHolder => "lemma3", false;
    SupNormL2 => "lemma4", false;
    SupNormMoment => "lemma5", false;
    SupNormStdDev => "lemma5-tight", false;
    SymmetricCenterValue => "symmetric-center", false;
    FiniteMeasure => "finite-measure", false;
    NormRatioNd => "theorem2", true;
    CovarianceNormLower => "lemma2", true;
    SupNormL2Nd => "lemma4-nd", true;
    SupNormCovariance => "lemma6", true;
}

impl ClaimId {
    pub fn all_1d() -> Vec<ClaimId> {
        Self::ALL.iter().copied().filter(|c| !c.is_multivariate()).collect()
    }

    pub fn all_nd() -> Vec<ClaimId> {
        Self::ALL.iter().copied().filter(|c| c.is_multivariate()).collect()
    }

    /// Entropy claims compare logarithms; their tightness is `exp(lhs - rhs)`.
    pub fn is_log_form(self) -> bool {
        matches!(self, ClaimId::EntropyLower | ClaimId::EntropyUpper)
    }

    /// The variant that uses the variance-only constant, if there is one.
    pub fn tightened(self) -> Option<ClaimId> {
        match self {
            ClaimId::NormRatio | ClaimId::NormRatioVariance => Some(ClaimId::NormRatioVariance),
            ClaimId::SupNormMoment | ClaimId::SupNormStdDev => Some(ClaimId::SupNormStdDev),
            _ => None,
        }
    }

    /// Parses a comma-separated list of claim names and groups
    /// (`all`, `all-1d`, `all-nd`, `corollary1`, `corollary2`).
    pub fn parse_list(text: &str) -> Result<Vec<ClaimId>> {
        let mut out = Vec::new();
        for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let group = match item {
                "all" => Self::ALL.to_vec(),
                "all-1d" => Self::all_1d(),
                "all-nd" => Self::all_nd(),
                "corollary1" => vec![ClaimId::NormSandwichLower, ClaimId::NormSandwichUpper],
                "corollary2" => vec![ClaimId::EntropyLower, ClaimId::EntropyUpper],
                other => vec![other.parse()?],
            };
            for c in group {
                if !out.contains(&c) {
                    out.push(c);
                }
            }
        }
        if out.is_empty() {
            return Err(Error::usage("empty claim list"));
        }
        Ok(out)
    }
}

impl fmt::Display for ClaimId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.wire_name())
    }
}

impl FromStr for ClaimId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|c| c.wire_name() == s)
            .ok_or_else(|| Error::usage(format!("unknown claim `{s}`")))
    }
}

/// The parameters a verdict was computed at.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct VerdictInputs {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Exponent>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Exponent>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interval: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InequalityVerdict {
    pub claim: ClaimId,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`.
    pub margin: f64,
    /// `lhs / rhs`, or `exp(lhs - rhs)` for the entropy claims.
    pub tightness: f64,
    pub holds: bool,
    pub tol: f64,
    pub inputs: VerdictInputs,
}

impl InequalityVerdict {
    /// Verdict on `exp(ln_lhs) ≤ exp(ln_rhs)`. The tightness is formed in log
    /// space so it stays exact when both sides are tiny or huge.
    pub fn from_logs(claim: ClaimId, ln_lhs: f64, ln_rhs: f64, tol: f64, inputs: VerdictInputs) -> Self {
        let (lhs, rhs) = (ln_lhs.exp(), ln_rhs.exp());
        Self::assemble(claim, lhs, rhs, (ln_lhs - ln_rhs).exp(), tol, inputs)
    }

    /// Verdict on `lhs ≤ rhs` where both sides are already logarithms.
    pub fn from_log_form(claim: ClaimId, lhs: f64, rhs: f64, tol: f64, inputs: VerdictInputs) -> Self {
        Self::assemble(claim, lhs, rhs, (lhs - rhs).exp(), tol, inputs)
    }

    fn assemble(claim: ClaimId, lhs: f64, rhs: f64, tightness: f64, tol: f64, inputs: VerdictInputs) -> Self {
        let mut v = Self {
            claim,
            lhs,
            rhs,
            margin: rhs - lhs,
            tightness,
            holds: false,
            tol,
            inputs,
        };
        v.holds = v.evaluate_holds();
        v
    }

    fn evaluate_holds(&self) -> bool {
        self.margin >= -self.tol * self.lhs.abs().max(self.rhs.abs())
    }

    /// Re-judges the verdict at a different tolerance.
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self.holds = self.evaluate_holds();
        self
    }
}

/// Verdict tolerance implied by how the inputs were computed.
pub fn auto_tol(inputs: &[&FunctionalValue]) -> f64 {
    if inputs.iter().any(|v| v.method.is_quadrature()) {
        QUADRATURE_TOL
    } else {
        EXACT_TOL
    }
}
