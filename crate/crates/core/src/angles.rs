//! Lifted Lagrangian angle `θ̃(B) = Σ arctan λᵢ(B)` on `Sym²(ℝⁿ)` and the
//! lifted space-time angle `Θ̃` on `Sym²(ℝⁿ⁺¹)`.
//!
//! `Θ̃(A)` is the sum of principal arguments of the eigenvalues of
//! `Iₙ + iA` off the singular class `𝒮 = {diag(0, A⁺)}`, and
//! `θ̃(A⁺) + π/2` on it (the upper semi-continuous extension). Two
//! independent routes are provided:
//!
//! * spectral: eigenvalues of the complex symmetric pencil;
//! * Schur: `θ̃(A⁺) + arg(i·a₀₀ + aᵀ(I + iA⁺)⁻¹a)`, one real symmetric
//!   eigensolve and one complex linear solve.
//!
//! [`spacetime_angle`] runs both and refuses to answer if they disagree.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{DslError, Result};
use crate::linalg::{
    eig_complex_spacetime, eig_sym, principal_arg, solve_complex_linear, ComplexMatrix,
    SpaceTimeMatrix, SymMatrix,
};

/// Inputs with `max(|a₀₀|, ‖a‖∞)` below this are treated as members of 𝒮.
pub const SINGULAR_CLASS_TOL: f64 = 1e-12;
/// Inputs below this (but above [`SINGULAR_CLASS_TOL`]) are computed
/// normally and flagged `near_singular`.
pub const NEAR_SINGULAR_BAND: f64 = 1e-8;
/// Maximum tolerated disagreement between the two routes.
pub const CROSS_CHECK_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AnglePath {
    Spectral,
    Schur,
    SingularClass,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AngleValue {
    pub radians: f64,
    pub path: AnglePath,
    /// `[lo, hi]` spanned by both routes when both were computed.
    pub certified_interval: Option<[f64; 2]>,
    pub near_singular: bool,
}

impl AngleValue {
    fn plain(radians: f64, path: AnglePath) -> Self {
        AngleValue {
            radians,
            path,
            certified_interval: None,
            near_singular: false,
        }
    }
}

/// `θ̃(B) = Σ arctan λᵢ(B)`.
pub fn lifted_angle(b: &SymMatrix) -> AngleValue {
    let radians = eig_sym(b).into_iter().map(f64::atan).sum();
    AngleValue::plain(radians, AnglePath::Spectral)
}

/// `|a₀₀| ≤ tol` and `‖a‖∞ ≤ tol`.
pub fn in_singular_class(a: &SpaceTimeMatrix, tol: f64) -> bool {
    a.a00.abs() <= tol && a.a_vec_inf_norm() <= tol
}

fn near_singular(a: &SpaceTimeMatrix) -> bool {
    let m = a.a00.abs().max(a.a_vec_inf_norm());
    m < NEAR_SINGULAR_BAND && m > SINGULAR_CLASS_TOL
}

fn singular_class_value(a: &SpaceTimeMatrix) -> AngleValue {
    AngleValue::plain(
        lifted_angle(&a.a_plus).radians + FRAC_PI_2,
        AnglePath::SingularClass,
    )
}

/// `Θ̃` by summing principal arguments of the pencil eigenvalues.
pub fn spacetime_angle_spectral(a: &SpaceTimeMatrix) -> Result<AngleValue> {
    if in_singular_class(a, SINGULAR_CLASS_TOL) {
        return Ok(singular_class_value(a));
    }
    let spectrum = eig_complex_spacetime(a)?;
    let mut radians = 0.0;
    for &lam in &spectrum.values {
        // Re(λ) ≥ 0 for every eigenvalue of the pencil; a negative real
        // part at rounding level is the same point of the imaginary axis.
        let scale = 1.0 + lam.norm();
        let lam = if lam.re < 0.0 && lam.re > -1e-10 * scale {
            Complex64::new(0.0, lam.im)
        } else {
            lam
        };
        radians += principal_arg(lam)?;
    }
    Ok(AngleValue {
        radians,
        path: AnglePath::Spectral,
        certified_interval: None,
        near_singular: near_singular(a),
    })
}

/// `w = i·a₀₀ + aᵀ(I + iA⁺)⁻¹a`, the Schur complement of the pencil.
pub fn schur_complement(a: &SpaceTimeMatrix) -> Result<Complex64> {
    let n = a.n();
    let mut m = ComplexMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let re = if i == j { 1.0 } else { 0.0 };
            m[(i, j)] = Complex64::new(re, a.a_plus.get(i, j));
        }
    }
    let rhs: Vec<Complex64> = a.a_vec.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let x = if a.a_vec.iter().all(|&v| v == 0.0) {
        rhs.clone()
    } else {
        solve_complex_linear(&m, &rhs)?
    };
    let quad: Complex64 = a.a_vec.iter().zip(&x).map(|(&ai, xi)| ai * xi).sum();
    Ok(Complex64::new(0.0, a.a00) + quad)
}

/// `Θ̃` by the Schur-complement identity. Rejects members of 𝒮.
///
/// The argument of the Schur complement lies in `(−π/2, π/2]`; the upper
/// endpoint is attained by block-diagonal inputs with `a₀₀ > 0`.
pub fn spacetime_angle_schur(a: &SpaceTimeMatrix) -> Result<AngleValue> {
    if in_singular_class(a, SINGULAR_CLASS_TOL) {
        return Err(DslError::SingularClassInput);
    }
    let w = schur_complement(a)?;
    // Re(w) = aᵀ(I + A⁺²)⁻¹a ≥ 0
    let w = if w.re < 0.0 && w.re > -1e-12 * w.norm() {
        Complex64::new(0.0, w.im)
    } else {
        w
    };
    let radians = lifted_angle(&a.a_plus).radians + principal_arg(w)?;
    Ok(AngleValue {
        radians,
        path: AnglePath::Schur,
        certified_interval: None,
        near_singular: near_singular(a),
    })
}

/// `Θ̃(A)`: the Schur value cross-checked against the spectral value.
pub fn spacetime_angle(a: &SpaceTimeMatrix) -> Result<AngleValue> {
    if in_singular_class(a, SINGULAR_CLASS_TOL) {
        return Ok(singular_class_value(a));
    }
    let schur = spacetime_angle_schur(a);
    let spectral = spacetime_angle_spectral(a);
    match (schur, spectral) {
        (Ok(s), Ok(p)) => {
            if (s.radians - p.radians).abs() > CROSS_CHECK_TOL {
                return Err(DslError::CrossCheckMismatch {
                    spectral: p.radians,
                    schur: s.radians,
                });
            }
            Ok(AngleValue {
                radians: s.radians,
                path: AnglePath::Schur,
                certified_interval: Some([s.radians.min(p.radians), s.radians.max(p.radians)]),
                near_singular: s.near_singular,
            })
        }
        (Ok(s), Err(_)) => Ok(s),
        (Err(_), Ok(p)) => Ok(p),
        (Err(e), Err(_)) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn lifted_angle_basics() {
        assert_eq!(lifted_angle(&SymMatrix::zeros(3)).radians, 0.0);
        assert!(close(
            lifted_angle(&SymMatrix::identity(2)).radians,
            PI / 2.0,
            1e-15
        ));
    }

    #[test]
    fn singular_class_membership() {
        let s = SpaceTimeMatrix::block_diag(0.0, SymMatrix::from_diag(&[3.0, -1.0]));
        assert!(in_singular_class(&s, 0.0));
        let t = SpaceTimeMatrix::block_diag(1e-3, SymMatrix::zeros(2));
        assert!(!in_singular_class(&t, 1e-12));
        let u = SpaceTimeMatrix::new(0.0, vec![1.0, 0.0], SymMatrix::zeros(2)).unwrap();
        assert!(!in_singular_class(&u, 1e-12));
    }

    #[test]
    fn singular_class_value_is_upper_limit() {
        let ap = SymMatrix::from_diag(&[0.3, -2.0]);
        let v = spacetime_angle(&SpaceTimeMatrix::block_diag(0.0, ap.clone())).unwrap();
        assert_eq!(v.path, AnglePath::SingularClass);
        assert!(close(
            v.radians,
            lifted_angle(&ap).radians + PI / 2.0,
            1e-15
        ));
    }

    #[test]
    fn coupled_two_by_two_has_zero_angle() {
        // eigenvalues (1 ± i√3)/2, arguments ±π/3
        let a = SpaceTimeMatrix::new(0.0, vec![1.0], SymMatrix::zeros(1)).unwrap();
        assert!(close(
            spacetime_angle_spectral(&a).unwrap().radians,
            0.0,
            1e-13
        ));
        assert!(close(
            spacetime_angle_schur(&a).unwrap().radians,
            0.0,
            1e-15
        ));
    }

    #[test]
    fn schur_block_diagonal_signs() {
        let ap = SymMatrix::from_diag(&[1.5, -0.2, 4.0]);
        let th = lifted_angle(&ap).radians;
        let up = SpaceTimeMatrix::block_diag(1.0, ap.clone());
        let dn = SpaceTimeMatrix::block_diag(-1.0, ap);
        assert!(close(
            spacetime_angle_schur(&up).unwrap().radians,
            th + PI / 2.0,
            1e-15
        ));
        assert!(close(
            spacetime_angle_schur(&dn).unwrap().radians,
            th - PI / 2.0,
            1e-15
        ));
    }

    #[test]
    fn schur_rejects_singular_class() {
        let s = SpaceTimeMatrix::block_diag(0.0, SymMatrix::identity(2));
        assert_eq!(spacetime_angle_schur(&s), Err(DslError::SingularClassInput));
    }

    #[test]
    fn diagonal_example_matches_closed_form() {
        // n = 2, ε = δ = 0.1, η = 1
        let (eps, delta, eta) = (0.1, 0.1, 1.0);
        let th0 = PI / 2.0 - eps;
        let th1 = eps + delta - PI / 2.0;
        let a = SpaceTimeMatrix::from_diag(&[eta, th0.tan(), th1.tan()]);
        let v = spacetime_angle(&a).unwrap();
        assert!(close(v.radians, PI / 2.0 + th0 + th1, 1e-9));
        let [lo, hi] = v.certified_interval.unwrap();
        assert!(hi - lo <= 1e-8);
    }

    #[test]
    fn near_singular_band_is_flagged() {
        let a = SpaceTimeMatrix::block_diag(1e-10, SymMatrix::identity(2));
        let v = spacetime_angle(&a).unwrap();
        assert!(v.near_singular);
        let b = SpaceTimeMatrix::block_diag(1e-13, SymMatrix::identity(2));
        assert_eq!(spacetime_angle(&b).unwrap().path, AnglePath::SingularClass);
    }
}
