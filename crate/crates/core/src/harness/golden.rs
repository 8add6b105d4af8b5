//! The diagonal space-time example with constants `(n, ε, δ, η)`:
//! `A = diag(η, tan θ₀·I_{n−1}, tan θ₁)` with `θ₀ = π/2 − ε/2` and
//! `θ₁ = ε + δ − π/2`. It lies in `𝓕_{(n−1)π/2+δ}` while the pair
//! `{e₀, eₙ}` has negative sum `η + tan θ₁`, so `A` is not 2-convex.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::angles::{spacetime_angle_schur, spacetime_angle_spectral};
use crate::error::{DslError, Result};
use crate::linalg::{eig_sym, SpaceTimeMatrix};
use crate::subequations::{in_fcal, DslBranch};

pub const GOLDEN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExampleConstants {
    pub n: usize,
    pub eps: f64,
    pub delta: f64,
    pub eta: f64,
}

impl Default for ExampleConstants {
    fn default() -> Self {
        ExampleConstants {
            n: 3,
            eps: 0.05,
            delta: 0.1,
            eta: 0.01,
        }
    }
}

impl ExampleConstants {
    pub fn theta0(&self) -> f64 {
        FRAC_PI_2 - 0.5 * self.eps
    }

    pub fn theta1(&self) -> f64 {
        self.eps + self.delta - FRAC_PI_2
    }

    /// `(n−1)π/2 + δ`
    pub fn phase(&self) -> f64 {
        (self.n as f64 - 1.0) * FRAC_PI_2 + self.delta
    }

    /// `π/2 + (n−1)θ₀ + θ₁`
    pub fn expected_angle(&self) -> f64 {
        FRAC_PI_2 + (self.n as f64 - 1.0) * self.theta0() + self.theta1()
    }

    pub fn matrix(&self) -> Result<SpaceTimeMatrix> {
        if self.n < 2 || !(self.eps > 0.0 && self.delta > 0.0 && self.eta > 0.0) {
            return Err(DslError::InvalidInput(
                "example needs n >= 2 and positive eps, delta, eta".into(),
            ));
        }
        let mut d = vec![self.eta];
        d.extend(std::iter::repeat_n(self.theta0().tan(), self.n - 1));
        d.push(self.theta1().tan());
        Ok(SpaceTimeMatrix::from_diag(&d))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoldenReport {
    pub constants: ExampleConstants,
    pub expected: f64,
    pub theta_spectral: f64,
    pub theta_schur: f64,
    pub phase: f64,
    pub member: bool,
    /// Sum of the two smallest eigenvalues of `A`.
    pub two_smallest_sum: f64,
    /// `η + tan θ₁`
    pub pair_sum: f64,
    pub pass: bool,
}

pub fn golden_fixture(k: &ExampleConstants) -> Result<GoldenReport> {
    let a = k.matrix()?;
    let expected = k.expected_angle();
    let theta_spectral = spacetime_angle_spectral(&a)?.radians;
    let theta_schur = spacetime_angle_schur(&a)?.radians;
    let phase = k.phase();
    let member = in_fcal(&a, &DslBranch::new(k.n, phase)?, GOLDEN_TOL)?;
    let lam = eig_sym(&a.to_sym());
    let m = lam.len();
    let two_smallest_sum = lam[m - 1] + lam[m - 2];
    let pair_sum = k.eta + k.theta1().tan();
    let pass = (theta_spectral - expected).abs() <= GOLDEN_TOL
        && (theta_schur - expected).abs() <= GOLDEN_TOL
        && member
        && pair_sum < 0.0
        && two_smallest_sum < 0.0;
    Ok(GoldenReport {
        constants: *k,
        expected,
        theta_spectral,
        theta_schur,
        phase,
        member,
        two_smallest_sum,
        pair_sum,
        pass,
    })
}
