//! Seeded samplers, named verification suites and their reports.
//!
//! Each suite draws `samples` inputs per case (usually one case per space
//! dimension in `dims`) from streams keyed by `(seed, suite/case, index)`,
//! evaluates them in parallel and reduces in index order. Reports are
//! byte-identical across runs apart from `runtime_ms`.

pub mod golden;
pub mod sampling;
mod suites;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{DslError, Result};
use crate::SCHEMA;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SuiteName {
    RotationInvariance,
    ShearInvariance,
    AffineSliceBound,
    EigenvalueLemma,
    TimeSlotSign,
    StarProduct,
    #[serde(rename = "usc-at-S")]
    UscAtS,
    LegendreInvolution,
    RooftopProps,
    SolveAndVerify,
    MinPrinciple,
    JointConvexity,
}

impl SuiteName {
    pub const ALL: [SuiteName; 12] = [
        SuiteName::RotationInvariance,
        SuiteName::ShearInvariance,
        SuiteName::AffineSliceBound,
        SuiteName::EigenvalueLemma,
        SuiteName::TimeSlotSign,
        SuiteName::StarProduct,
        SuiteName::UscAtS,
        SuiteName::LegendreInvolution,
        SuiteName::RooftopProps,
        SuiteName::SolveAndVerify,
        SuiteName::MinPrinciple,
        SuiteName::JointConvexity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SuiteName::RotationInvariance => "rotation-invariance",
            SuiteName::ShearInvariance => "shear-invariance",
            SuiteName::AffineSliceBound => "affine-slice-bound",
            SuiteName::EigenvalueLemma => "eigenvalue-lemma",
            SuiteName::TimeSlotSign => "time-slot-sign",
            SuiteName::StarProduct => "star-product",
            SuiteName::UscAtS => "usc-at-S",
            SuiteName::LegendreInvolution => "legendre-involution",
            SuiteName::RooftopProps => "rooftop-props",
            SuiteName::SolveAndVerify => "solve-and-verify",
            SuiteName::MinPrinciple => "min-principle",
            SuiteName::JointConvexity => "joint-convexity",
        }
    }

    /// Default value of the suite's main tolerance.
    ///
    /// For `legendre-involution` this is the factor `k` in
    /// `‖u★★ − u‖∞ ≤ k(Δt + Δτ)L`; for `min-principle` and
    /// `joint-convexity` it is the required shrink ratio of violations under
    /// grid halving. Everywhere else it is an absolute bound.
    pub fn default_tolerance(self) -> f64 {
        match self {
            SuiteName::RotationInvariance | SuiteName::ShearInvariance => 1e-8,
            SuiteName::AffineSliceBound | SuiteName::RooftopProps => 1e-8,
            SuiteName::EigenvalueLemma | SuiteName::TimeSlotSign => 1e-9,
            SuiteName::StarProduct => 1e-9,
            SuiteName::UscAtS => 1e-6,
            SuiteName::LegendreInvolution => 2.0,
            SuiteName::SolveAndVerify => 1e-4,
            SuiteName::MinPrinciple | SuiteName::JointConvexity => 1.5,
        }
    }

    /// Suites that only exist for one space dimension ignore `dims`.
    pub fn uses_dims(self) -> bool {
        !matches!(
            self,
            SuiteName::LegendreInvolution
                | SuiteName::RooftopProps
                | SuiteName::SolveAndVerify
                | SuiteName::MinPrinciple
                | SuiteName::JointConvexity
        )
    }
}

impl fmt::Display for SuiteName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SuiteName {
    type Err = DslError;
    fn from_str(s: &str) -> Result<Self> {
        SuiteName::ALL
            .into_iter()
            .find(|n| n.name() == s)
            .ok_or_else(|| DslError::InvalidInput(format!("unknown suite {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ToleranceOverrides {
    /// Replaces [`SuiteName::default_tolerance`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
}

fn default_dims() -> Vec<usize> {
    vec![1, 2, 3]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<String>,
    pub name: SuiteName,
    #[serde(default = "default_dims")]
    pub dims: Vec<usize>,
    pub samples: usize,
    pub seed: u64,
    #[serde(default)]
    pub tolerances: ToleranceOverrides,
}

impl SuiteSpec {
    pub fn new(name: SuiteName, dims: Vec<usize>, samples: usize, seed: u64) -> Self {
        SuiteSpec {
            schema: None,
            name,
            dims,
            samples,
            seed,
            tolerances: ToleranceOverrides::default(),
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tolerances.tol = Some(tol);
        self
    }

    pub fn tol(&self) -> f64 {
        self.tolerances.tol.unwrap_or(self.name.default_tolerance())
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(s) = &self.schema {
            if s != SCHEMA {
                return Err(DslError::InvalidInput(format!(
                    "schema {s:?}, expected {SCHEMA:?}"
                )));
            }
        }
        if self.samples == 0 {
            return Err(DslError::InvalidInput("samples must be >= 1".into()));
        }
        if self.name.uses_dims() {
            if self.dims.is_empty() {
                return Err(DslError::InvalidInput("dims must not be empty".into()));
            }
            if let Some(&n) = self.dims.iter().find(|&&n| n == 0 || n > 8) {
                return Err(DslError::InvalidInput(format!(
                    "dimension {n} outside 1..=8"
                )));
            }
        }
        if let Some(t) = self.tolerances.tol {
            if !(t.is_finite() && t >= 0.0) {
                return Err(DslError::InvalidInput(format!("tolerance {t}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Worst {
    pub digest: String,
    /// `null` when the sample raised an error.
    pub measured: Option<f64>,
    pub threshold: f64,
    pub check: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub schema: String,
    pub suite: SuiteSpec,
    pub pass: bool,
    pub samples_run: usize,
    pub violations: usize,
    pub worst: Option<Worst>,
    pub runtime_ms: u64,
    pub near_singular_excluded: usize,
    /// Draws inside the membership boundary band (`star-product` only).
    pub boundary_excluded: usize,
}

/// One measured inequality `measured ≤ threshold`. NaN fails.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Check {
    pub what: &'static str,
    pub measured: f64,
    pub threshold: f64,
}

impl Check {
    pub fn new(what: &'static str, measured: f64, threshold: f64) -> Self {
        Check {
            what,
            measured,
            threshold,
        }
    }

    /// `true` as a pass (0 ≤ 0.5), `false` as a failure (1 > 0.5).
    pub fn holds(what: &'static str, ok: bool) -> Self {
        Check::new(what, if ok { 0.0 } else { 1.0 }, 0.5)
    }

    fn ok(&self) -> bool {
        self.measured <= self.threshold
    }

    fn margin(&self) -> f64 {
        if self.measured.is_nan() {
            f64::INFINITY
        } else {
            self.measured - self.threshold
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Outcome {
    Checked { digest: String, checks: Vec<Check> },
    NearSingular,
    Boundary,
    Failed { digest: String, error: String },
}

/// A group of `samples` draws sharing one stream prefix.
pub(crate) struct Case {
    pub label: String,
    pub n: usize,
    pub variant: usize,
}

pub fn run_suite(spec: &SuiteSpec) -> Result<VerificationReport> {
    spec.validate()?;
    let start = Instant::now();
    let cases = suites::cases(spec);
    let jobs: Vec<(usize, u64)> = (0..cases.len())
        .flat_map(|k| (0..spec.samples as u64).map(move |i| (k, i)))
        .collect();
    let outcomes: Vec<Outcome> = jobs
        .par_iter()
        .map(|&(k, i)| {
            let case = &cases[k];
            let stream = format!("{}/{}", spec.name, case.label);
            let mut rng = sampling::stream_rng(spec.seed, &stream, i);
            let locator = format!("{stream}#{i}");
            suites::run_sample(spec, case, &mut rng, &locator)
        })
        .collect();

    let mut violations = 0;
    let mut near_singular_excluded = 0;
    let mut boundary_excluded = 0;
    let mut worst: Option<(f64, Worst)> = None;
    let mut consider = |margin: f64, w: Worst| {
        if worst.as_ref().is_none_or(|(m, _)| margin > *m) {
            worst = Some((margin, w));
        }
    };
    for o in outcomes {
        match o {
            Outcome::NearSingular => near_singular_excluded += 1,
            Outcome::Boundary => boundary_excluded += 1,
            Outcome::Failed { digest, error } => {
                violations += 1;
                consider(
                    f64::INFINITY,
                    Worst {
                        digest,
                        measured: None,
                        threshold: f64::NAN,
                        check: error,
                    },
                );
            }
            Outcome::Checked { digest, checks } => {
                if checks.iter().any(|c| !c.ok()) {
                    violations += 1;
                }
                if let Some(c) = checks
                    .iter()
                    .max_by(|a, b| a.margin().total_cmp(&b.margin()))
                {
                    consider(
                        c.margin(),
                        Worst {
                            digest,
                            measured: Some(c.measured),
                            threshold: c.threshold,
                            check: c.what.to_string(),
                        },
                    );
                }
            }
        }
    }

    Ok(VerificationReport {
        schema: SCHEMA.to_string(),
        suite: spec.clone(),
        pass: violations == 0,
        samples_run: jobs.len(),
        violations,
        worst: worst.map(|(_, w)| w),
        runtime_ms: start.elapsed().as_millis() as u64,
        near_singular_excluded,
        boundary_excluded,
    })
}
