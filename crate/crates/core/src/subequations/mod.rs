//! Branches of the SL and DSL subequations and their membership tests.

mod plane;
mod star;

pub use plane::{plane_to_slice, AffinePlane2D};
pub use star::{in_star_product, StarMembership, StarSearch};

use std::f64::consts::FRAC_PI_2;

use serde::Serialize;

use crate::angles::{lifted_angle, spacetime_angle};
use crate::error::{DslError, Result};
use crate::linalg::{eig_sym, SpaceTimeMatrix, SymMatrix};

/// Membership tolerance used by the predicates when none is supplied.
pub const DEFAULT_TOL: f64 = 1e-9;

/// SL branch `F_c = {θ̃ ≥ c}` on `Sym²(ℝⁿ)`, `c ∈ (−nπ/2, nπ/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlBranch {
    n: usize,
    c: f64,
}

impl SlBranch {
    pub fn new(n: usize, c: f64) -> Result<Self> {
        let half = n as f64 * FRAC_PI_2;
        if n == 0 || !(c > -half && c < half) {
            return Err(DslError::InvalidInput(format!(
                "SL phase {c} outside (-{half}, {half}) for n = {n}"
            )));
        }
        Ok(SlBranch { n, c })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn c(&self) -> f64 {
        self.c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Tier {
    /// `c ≥ nπ/2`
    Top,
    /// `(n−1)π/2 ≤ c < nπ/2`
    Second,
    Inner,
}

/// DSL branch `𝓕_c = {Θ̃ ≥ c}` on `Sym²(ℝⁿ⁺¹)`, `c ∈ (−(n+1)π/2, (n+1)π/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DslBranch {
    n: usize,
    c: f64,
    tier: Tier,
}

impl DslBranch {
    pub fn new(n: usize, c: f64) -> Result<Self> {
        let half = (n as f64 + 1.0) * FRAC_PI_2;
        if n == 0 || !(c > -half && c < half) {
            return Err(DslError::InvalidInput(format!(
                "DSL phase {c} outside (-{half}, {half}) for n = {n}"
            )));
        }
        let tier = if c >= n as f64 * FRAC_PI_2 {
            Tier::Top
        } else if c >= (n as f64 - 1.0) * FRAC_PI_2 {
            Tier::Second
        } else {
            Tier::Inner
        };
        Ok(DslBranch { n, c, tier })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn tier(&self) -> Tier {
        self.tier
    }

    /// One of the top two branches, where the product structure holds.
    pub fn is_top_two(&self) -> bool {
        self.tier != Tier::Inner
    }

    /// The SL branch `F_{c−π/2}` its affine slices land in.
    pub fn slice_phase(&self) -> f64 {
        self.c - FRAC_PI_2
    }
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(DslError::DimensionMismatch { expected, got })
    }
}

/// `θ̃(A) ≥ c − tol`.
pub fn in_f(a: &SymMatrix, b: &SlBranch, tol: f64) -> Result<bool> {
    check_dim(b.n, a.n())?;
    Ok(lifted_angle(a).radians >= b.c - tol)
}

/// `Θ̃(A) ≥ c − tol`.
pub fn in_fcal(a: &SpaceTimeMatrix, b: &DslBranch, tol: f64) -> Result<bool> {
    check_dim(b.n, a.n())?;
    Ok(spacetime_angle(a)?.radians >= b.c - tol)
}

/// Dirichlet dual `F̃_c = closure(−F_cᶜ) = F_{−c}`.
pub fn in_dual_f(a: &SymMatrix, b: &SlBranch, tol: f64) -> Result<bool> {
    check_dim(b.n, a.n())?;
    Ok(lifted_angle(a).radians >= -b.c - tol)
}

/// Positive semidefinite: smallest eigenvalue `≥ −tol`.
pub fn in_p(a: &SymMatrix, tol: f64) -> bool {
    eig_sym(a).last().copied().unwrap_or(0.0) >= -tol
}

/// Nonnegative trace.
pub fn in_t(a: &SymMatrix) -> bool {
    a.trace() >= 0.0
}

/// Conclusions of the eigenvalue lemma for the top two SL branches.
/// Each flag is vacuously true when its hypothesis fails.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EigenConsequences {
    /// `θ̃ ≥ (n−1)π/2 ⟹ λₙ ≥ 0`
    pub top_branch_psd_ok: bool,
    /// `θ̃ ≥ (n−2)π/2 ⟹ λ_{n−1} ≥ |λₙ|`
    pub second_branch_dominance_ok: bool,
}

pub fn eigenvalue_consequences(a: &SymMatrix) -> EigenConsequences {
    let n = a.n();
    let lam = eig_sym(a);
    let theta: f64 = lam.iter().map(|v| v.atan()).sum();
    let slack = DEFAULT_TOL * (1.0 + a.max_abs());
    let nf = n as f64;

    let top_hyp = theta >= (nf - 1.0) * FRAC_PI_2;
    let top_ok = !top_hyp || lam[n - 1] >= -slack;

    let second_hyp = theta >= (nf - 2.0) * FRAC_PI_2;
    let second_ok = !second_hyp || n < 2 || lam[n - 2] >= lam[n - 1].abs() - slack;

    EigenConsequences {
        top_branch_psd_ok: top_ok,
        second_branch_dominance_ok: second_ok,
    }
}

/// Conclusions of the time-slot lemma for `A ∈ 𝓕_c`, `c ≥ (n−1)π/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TimeSlotSign {
    /// `a₀₀ ≥ −1e−9`
    pub a00_nonneg: bool,
    /// `a ≠ 0 ⟹ a₀₀ > 1e−9` (vacuous when `a = 0`)
    pub a00_pos_given_avec: bool,
}

pub fn time_slot_sign(a: &SpaceTimeMatrix, b: &DslBranch) -> Result<TimeSlotSign> {
    if !b.is_top_two() {
        return Err(DslError::HypothesisViolation(format!(
            "branch c = {} is below the top two branches",
            b.c
        )));
    }
    if !in_fcal(a, b, DEFAULT_TOL)? {
        return Err(DslError::HypothesisViolation(
            "matrix is not a member of the branch".into(),
        ));
    }
    let coupled = a.a_vec.iter().any(|&v| v != 0.0);
    Ok(TimeSlotSign {
        a00_nonneg: a.a00 >= -DEFAULT_TOL,
        a00_pos_given_avec: !coupled || a.a00 > DEFAULT_TOL,
    })
}
