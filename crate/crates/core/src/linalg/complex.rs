use num_complex::Complex64;

use super::{SpaceTimeMatrix, Tolerances};
use crate::error::{DslError, Result};

const ABERTH_MAX_ITER: usize = 500;
const POLISH_MAX_ITER: usize = 80;
const PIVOT_RATIO_TOL: f64 = 1e-14;
const ARG_UNDERFLOW: f64 = 1e-300;

/// Dense complex square matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(n: usize) -> Self {
        ComplexMatrix {
            n,
            data: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_diag(d: &[Complex64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mul(&self, other: &ComplexMatrix) -> ComplexMatrix {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        (0..n)
            .map(|i| (0..n).map(|j| self.data[i * n + j] * x[j]).sum())
            .collect()
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.n).map(|i| self.data[i * self.n + i]).sum()
    }

    /// Max-abs entry norm.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    fn shifted(&self, z: Complex64) -> ComplexMatrix {
        let mut m = self.clone();
        for i in 0..self.n {
            m.data[i * self.n + i] -= z;
        }
        m
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.n + j]
    }
}

/// LU with partial pivoting, `P·M = L·U` packed in place.
struct Lu {
    n: usize,
    lu: Vec<Complex64>,
    perm: Vec<usize>,
    sign: f64,
    pivot_ratio: f64,
}

impl Lu {
    fn factor(m: &ComplexMatrix) -> Lu {
        let n = m.n;
        let mut lu = m.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        let mut min_piv = f64::INFINITY;
        let mut max_piv: f64 = 0.0;
        for k in 0..n {
            let (p, pmag) =
                (k..n)
                    .map(|i| (i, lu[i * n + k].norm()))
                    .fold(
                        (k, -1.0),
                        |best, cur| if cur.1 > best.1 { cur } else { best },
                    );
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                sign = -sign;
            }
            min_piv = min_piv.min(pmag);
            max_piv = max_piv.max(pmag);
            let piv = lu[k * n + k];
            if pmag == 0.0 {
                continue;
            }
            for i in (k + 1)..n {
                let f = lu[i * n + k] / piv;
                lu[i * n + k] = f;
                if f != Complex64::new(0.0, 0.0) {
                    for j in (k + 1)..n {
                        let ukj = lu[k * n + j];
                        lu[i * n + j] -= f * ukj;
                    }
                }
            }
        }
        let pivot_ratio = if max_piv > 0.0 {
            min_piv / max_piv
        } else {
            0.0
        };
        Lu {
            n,
            lu,
            perm,
            sign,
            pivot_ratio,
        }
    }

    fn det(&self) -> Complex64 {
        let n = self.n;
        let mut d = Complex64::new(self.sign, 0.0);
        for i in 0..n {
            d *= self.lu[i * n + i];
        }
        d
    }

    fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                let l = self.lu[i * n + j];
                let xj = x[j];
                x[i] -= l * xj;
            }
        }
        for i in (0..n).rev() {
            for j in (i + 1)..n {
                let u = self.lu[i * n + j];
                let xj = x[j];
                x[i] -= u * xj;
            }
            x[i] /= self.lu[i * n + i];
        }
        x
    }

    fn is_singular(&self) -> bool {
        self.pivot_ratio < PIVOT_RATIO_TOL || !self.pivot_ratio.is_finite()
    }
}

/// Solves `M x = b` by LU with partial pivoting.
///
/// Fails with `SingularSystem` when the pivot ratio signals numerical
/// singularity or the residual `‖Mx − b‖` exceeds `1e-10·‖b‖`.
pub fn solve_complex_linear(m: &ComplexMatrix, b: &[Complex64]) -> Result<Vec<Complex64>> {
    if b.len() != m.n() {
        return Err(DslError::DimensionMismatch {
            expected: m.n(),
            got: b.len(),
        });
    }
    let lu = Lu::factor(m);
    if lu.is_singular() {
        return Err(DslError::SingularSystem {
            pivot_ratio: lu.pivot_ratio,
        });
    }
    let x = lu.solve(b);
    let bnorm = b.iter().fold(0.0_f64, |a, v| a.max(v.norm()));
    let r = m
        .mul_vec(&x)
        .iter()
        .zip(b)
        .fold(0.0_f64, |a, (mx, bi)| a.max((mx - bi).norm()));
    if r > 1e-10 * bnorm.max(f64::MIN_POSITIVE) && r > 0.0 {
        return Err(DslError::SingularSystem {
            pivot_ratio: lu.pivot_ratio,
        });
    }
    Ok(x)
}

/// Determinant by LU.
pub fn complex_det(m: &ComplexMatrix) -> Complex64 {
    Lu::factor(m).det()
}

/// The complex symmetric matrix `Iₙ + iA` with `Iₙ = diag(0, 1, …, 1)`.
pub fn spacetime_pencil(a: &SpaceTimeMatrix) -> ComplexMatrix {
    let s = a.to_sym();
    let n1 = s.n();
    let mut m = ComplexMatrix::zeros(n1);
    for i in 0..n1 {
        for j in 0..n1 {
            let re = if i == j && i > 0 { 1.0 } else { 0.0 };
            m[(i, j)] = Complex64::new(re, s.get(i, j));
        }
    }
    m
}

/// Principal argument in `(−π, π)`.
///
/// Rejects the closed negative real axis and values too small to carry a
/// direction; those only arise at or next to the singular class, where the
/// caller must apply its own convention.
pub fn principal_arg(z: Complex64) -> Result<f64> {
    if !(z.re.is_finite() && z.im.is_finite()) || z.norm() <= ARG_UNDERFLOW {
        return Err(DslError::BranchCutViolation { re: z.re, im: z.im });
    }
    if z.im == 0.0 && z.re < 0.0 {
        return Err(DslError::BranchCutViolation { re: z.re, im: z.im });
    }
    Ok(z.im.atan2(z.re))
}

/// Eigenvalues of `Iₙ + iA` with a backward-error estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSpectrum {
    pub values: Vec<Complex64>,
    /// Largest final Newton step, relative to `1 + ‖M‖`.
    pub residual: f64,
}

impl ComplexSpectrum {
    pub fn product(&self) -> Complex64 {
        self.values.iter().product()
    }
}

/// Coefficients `c₀ … c_{N−1}, 1` (ascending) of `det(λI − M)`, by
/// Faddeev–LeVerrier.
fn char_poly(m: &ComplexMatrix) -> Vec<Complex64> {
    let n = m.n();
    let mut coeffs = vec![Complex64::new(0.0, 0.0); n + 1];
    coeffs[n] = Complex64::new(1.0, 0.0);
    // M_1 = I, c_{n−1} = −tr(M)
    let mut mk = ComplexMatrix::identity(n);
    for k in 1..=n {
        let am = m.mul(&mk);
        let c = -am.trace() / (k as f64);
        coeffs[n - k] = c;
        if k < n {
            mk = am;
            for i in 0..n {
                mk[(i, i)] += c;
            }
        }
    }
    coeffs
}

fn horner(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// Aberth–Ehrlich simultaneous iteration on a monic polynomial.
fn aberth_roots(coeffs: &[Complex64]) -> Option<Vec<Complex64>> {
    let deg = coeffs.len() - 1;
    // Cauchy bound on root modulus.
    let radius = 1.0 + coeffs[..deg].iter().fold(0.0_f64, |m, c| m.max(c.norm()));
    let centre = -coeffs[deg - 1] / (deg as f64);
    let r0 = 0.5 * radius;
    let mut z: Vec<Complex64> = (0..deg)
        .map(|k| {
            let ang = 2.0 * std::f64::consts::PI * (k as f64) / (deg as f64) + 0.4;
            centre + Complex64::from_polar(r0, ang)
        })
        .collect();

    for _ in 0..ABERTH_MAX_ITER {
        let mut max_step: f64 = 0.0;
        for k in 0..deg {
            let (p, dp) = horner(coeffs, z[k]);
            if p == Complex64::new(0.0, 0.0) {
                continue;
            }
            let ratio = p / dp;
            let repulsion: Complex64 = (0..deg)
                .filter(|&j| j != k)
                .map(|j| Complex64::new(1.0, 0.0) / (z[k] - z[j]))
                .sum();
            let w = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if !(w.re.is_finite() && w.im.is_finite()) {
                continue;
            }
            z[k] -= w;
            max_step = max_step.max(w.norm() / (1.0 + z[k].norm()));
        }
        if max_step < 1e-14 {
            return Some(z);
        }
    }
    // Clusters of nearly equal roots converge only linearly; the matrix
    // polish below finishes them, so return the current estimate.
    if z.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
        Some(z)
    } else {
        None
    }
}

/// Simultaneous Aberth sweeps using the exact logarithmic derivative of
/// `det(M − zI)`, i.e. `−tr((M − zI)⁻¹)`, evaluated by LU.
/// Returns the largest final step.
fn polish(m: &ComplexMatrix, z: &mut [Complex64]) -> f64 {
    let n = m.n();
    let mut last: f64 = 0.0;
    for _ in 0..POLISH_MAX_ITER {
        let mut max_step: f64 = 0.0;
        for k in 0..n {
            let lu = Lu::factor(&m.shifted(z[k]));
            if lu.pivot_ratio < 1e-15 {
                // z is an eigenvalue to working precision
                continue;
            }
            let mut tr = Complex64::new(0.0, 0.0);
            let mut e = vec![Complex64::new(0.0, 0.0); n];
            for i in 0..n {
                e[i] = Complex64::new(1.0, 0.0);
                tr += lu.solve(&e)[i];
                e[i] = Complex64::new(0.0, 0.0);
            }
            // f'/f = −tr((M − zI)⁻¹), Newton ratio f/f' = −1/tr
            let ratio = -Complex64::new(1.0, 0.0) / tr;
            let repulsion: Complex64 = (0..n)
                .filter(|&j| j != k && z[j] != z[k])
                .map(|j| Complex64::new(1.0, 0.0) / (z[k] - z[j]))
                .sum();
            let w = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if !(w.re.is_finite() && w.im.is_finite()) {
                continue;
            }
            z[k] -= w;
            max_step = max_step.max(w.norm());
        }
        last = max_step;
        let scale = 1.0 + m.max_abs();
        if max_step <= 4.0 * f64::EPSILON * scale {
            break;
        }
    }
    last
}

/// Spectrum of `Iₙ + iA`.
///
/// Characteristic polynomial by Faddeev–LeVerrier, roots by Aberth–Ehrlich,
/// then Newton–Aberth polishing against the matrix itself so that the
/// final accuracy does not depend on the conditioning of the polynomial
/// coefficients.
pub fn eig_complex_spacetime(a: &SpaceTimeMatrix) -> Result<ComplexSpectrum> {
    let m = spacetime_pencil(a);
    let coeffs = char_poly(&m);
    let mut z = aberth_roots(&coeffs).ok_or(DslError::NonConvergence {
        iterations: ABERTH_MAX_ITER,
        residual: f64::INFINITY,
    })?;
    let step = polish(&m, &mut z);
    let residual = step / (1.0 + m.max_abs());
    // Multiple roots converge linearly; anything well above the default
    // residual after polishing is reported rather than returned.
    if !residual.is_finite() || residual > 1e3 * Tolerances::default().eigen_residual.sqrt() {
        return Err(DslError::NonConvergence {
            iterations: POLISH_MAX_ITER,
            residual,
        });
    }
    z.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    Ok(ComplexSpectrum {
        values: z,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::SymMatrix;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_solve_returns_rhs() {
        let b = vec![c(1.0, 2.0), c(-3.0, 0.5)];
        assert_eq!(
            solve_complex_linear(&ComplexMatrix::identity(2), &b).unwrap(),
            b
        );
    }

    #[test]
    fn scalar_division() {
        let m = ComplexMatrix::from_diag(&[c(1.0, 1.0)]);
        let x = solve_complex_linear(&m, &[c(1.0, 1.0)]).unwrap();
        assert!((x[0] - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn diagonal_pencil_solve() {
        let lam = [0.5, -2.0, 3.0];
        let d: Vec<Complex64> = lam.iter().map(|&l| c(1.0, l)).collect();
        let m = ComplexMatrix::from_diag(&d);
        let x = solve_complex_linear(&m, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!((x[0] - c(1.0, 0.0) / c(1.0, 0.5)).norm() < 1e-15);
        assert_eq!(x[1], c(0.0, 0.0));
    }

    #[test]
    fn singular_system_reported() {
        let m = ComplexMatrix::zeros(2);
        assert!(matches!(
            solve_complex_linear(&m, &[c(1.0, 0.0), c(0.0, 0.0)]),
            Err(DslError::SingularSystem { .. })
        ));
    }

    #[test]
    fn arg_cases() {
        assert_eq!(principal_arg(c(1.0, 0.0)).unwrap(), 0.0);
        assert!((principal_arg(c(0.0, 0.3)).unwrap() - PI / 2.0).abs() < 1e-15);
        let z = c(0.5, 3f64.sqrt() / 2.0);
        assert!((principal_arg(z).unwrap() - PI / 3.0).abs() < 1e-15);
        assert!(principal_arg(c(-1.0, 0.0)).is_err());
        assert!(principal_arg(c(0.0, 0.0)).is_err());
    }

    #[test]
    fn char_poly_of_diagonal() {
        let m = ComplexMatrix::from_diag(&[c(1.0, 0.0), c(2.0, 0.0)]);
        let p = char_poly(&m);
        // (λ−1)(λ−2) = λ² − 3λ + 2
        assert!((p[0] - c(2.0, 0.0)).norm() < 1e-15);
        assert!((p[1] - c(-3.0, 0.0)).norm() < 1e-15);
        assert_eq!(p[2], c(1.0, 0.0));
    }

    #[test]
    fn zero_matrix_spectrum_is_pencil_diagonal() {
        let a = SpaceTimeMatrix::from_diag(&[0.0, 0.0, 0.0, 0.0]);
        let s = eig_complex_spacetime(&a).unwrap();
        let zeros = s.values.iter().filter(|v| v.norm() < 1e-9).count();
        let ones = s
            .values
            .iter()
            .filter(|v| (*v - c(1.0, 0.0)).norm() < 1e-6)
            .count();
        assert_eq!((zeros, ones), (1, 3));
    }

    #[test]
    fn two_by_two_coupled_spectrum() {
        // det(Iₙ + iA − λ) = λ² − λ + 1 for a00 = 0, a = (1), A⁺ = (0)
        let a = SpaceTimeMatrix::new(0.0, vec![1.0], SymMatrix::zeros(1)).unwrap();
        let s = eig_complex_spacetime(&a).unwrap();
        let r = 3f64.sqrt() / 2.0;
        assert!((s.values[0] - c(0.5, -r)).norm() < 1e-13);
        assert!((s.values[1] - c(0.5, r)).norm() < 1e-13);
    }
}
