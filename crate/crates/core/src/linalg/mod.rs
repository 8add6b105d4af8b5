//! Dense symmetric and complex linear algebra sized for desk-scale
//! problems (matrix order up to about 16).

mod complex;
mod jacobi;

pub use complex::{
    complex_det, eig_complex_spacetime, principal_arg, solve_complex_linear, spacetime_pencil,
    ComplexMatrix, ComplexSpectrum,
};
pub use jacobi::eig_sym;

use serde::{Deserialize, Serialize};

use crate::error::{DslError, Result};

/// Module-level tolerances. The defaults are what every public entry
/// point uses; the struct exists so the harness can echo them in reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Angle comparisons.
    pub angle: f64,
    /// Backward error accepted from the eigensolvers.
    pub eigen_residual: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            angle: 1e-9,
            eigen_residual: 1e-12,
        }
    }
}

/// A real symmetric matrix. Storage is full row-major, but every write
/// goes to both `(i, j)` and `(j, i)`, so symmetry is exact.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1, "SymMatrix needs n >= 1");
        SymMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.set(i, i, d);
        }
        m
    }

    /// Builds from the upper triangle: `f(i, j)` is called only for `i <= j`.
    pub fn from_upper_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in i..n {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Builds from full rows, rejecting any asymmetry (exact comparison).
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(DslError::InvalidInput("matrix must have n >= 1".into()));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(DslError::InvalidInput(format!(
                    "row {i} has length {}, expected {n}",
                    row.len()
                )));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(DslError::InvalidInput(format!(
                    "row {i} has non-finite entries"
                )));
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if rows[i][j] != rows[j][i] {
                    return Err(DslError::InvalidInput(format!(
                        "matrix is not symmetric at ({i},{j}): {} vs {}",
                        rows[i][j], rows[j][i]
                    )));
                }
            }
        }
        Ok(Self::from_upper_fn(n, |i, j| rows[i][j]))
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| self.data[i * self.n..(i + 1) * self.n].to_vec())
            .collect()
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, s: f64) -> Self {
        SymMatrix {
            n: self.n,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn add(&self, other: &SymMatrix) -> Self {
        assert_eq!(self.n, other.n);
        SymMatrix {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn shifted(&self, s: f64) -> Self {
        let mut m = self.clone();
        for i in 0..self.n {
            m.set(i, i, self.get(i, i) + s);
        }
        m
    }

    /// `Qᵀ A Q` for a square `q` given row-major.
    pub fn congruence(&self, q: &[f64]) -> Self {
        let n = self.n;
        assert_eq!(q.len(), n * n);
        let mut aq = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                aq[i * n + j] = (0..n).map(|k| self.get(i, k) * q[k * n + j]).sum();
            }
        }
        Self::from_upper_fn(n, |i, j| (0..n).map(|k| q[k * n + i] * aq[k * n + j]).sum())
    }

    /// Principal submatrix on the given index set.
    pub fn principal(&self, idx: &[usize]) -> Self {
        Self::from_upper_fn(idx.len(), |i, j| self.get(idx[i], idx[j]))
    }
}

/// A symmetric `(n+1)×(n+1)` matrix viewed in time/space blocks:
/// `[[a00, aᵀ], [a, A⁺]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeMatrix {
    pub a00: f64,
    pub a_vec: Vec<f64>,
    pub a_plus: SymMatrix,
}

impl SpaceTimeMatrix {
    pub fn new(a00: f64, a_vec: Vec<f64>, a_plus: SymMatrix) -> Result<Self> {
        if a_vec.len() != a_plus.n() {
            return Err(DslError::DimensionMismatch {
                expected: a_plus.n(),
                got: a_vec.len(),
            });
        }
        Ok(SpaceTimeMatrix { a00, a_vec, a_plus })
    }

    /// `diag(d0, d1, …, dn)`.
    pub fn from_diag(diag: &[f64]) -> Self {
        assert!(diag.len() >= 2, "space-time matrix needs order >= 2");
        SpaceTimeMatrix {
            a00: diag[0],
            a_vec: vec![0.0; diag.len() - 1],
            a_plus: SymMatrix::from_diag(&diag[1..]),
        }
    }

    /// `diag(a00, A⁺)`.
    pub fn block_diag(a00: f64, a_plus: SymMatrix) -> Self {
        let n = a_plus.n();
        SpaceTimeMatrix {
            a00,
            a_vec: vec![0.0; n],
            a_plus,
        }
    }

    pub fn from_sym(a: &SymMatrix) -> Result<Self> {
        let m = a.n();
        if m < 2 {
            return Err(DslError::InvalidInput(
                "space-time matrix needs order >= 2".into(),
            ));
        }
        let idx: Vec<usize> = (1..m).collect();
        Ok(SpaceTimeMatrix {
            a00: a.get(0, 0),
            a_vec: (1..m).map(|i| a.get(i, 0)).collect(),
            a_plus: a.principal(&idx),
        })
    }

    pub fn to_sym(&self) -> SymMatrix {
        let n = self.n();
        SymMatrix::from_upper_fn(n + 1, |i, j| match (i, j) {
            (0, 0) => self.a00,
            (0, j) => self.a_vec[j - 1],
            (i, j) => self.a_plus.get(i - 1, j - 1),
        })
    }

    /// Space dimension `n` (the matrix has order `n + 1`).
    #[inline]
    pub fn n(&self) -> usize {
        self.a_plus.n()
    }

    pub fn a_vec_inf_norm(&self) -> f64 {
        self.a_vec.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn norm(&self) -> f64 {
        self.to_sym().norm()
    }

    pub fn neg(&self) -> Self {
        SpaceTimeMatrix {
            a00: -self.a00,
            a_vec: self.a_vec.iter().map(|v| -v).collect(),
            a_plus: self.a_plus.scaled(-1.0),
        }
    }

    pub fn add(&self, other: &SpaceTimeMatrix) -> Self {
        SpaceTimeMatrix {
            a00: self.a00 + other.a00,
            a_vec: self
                .a_vec
                .iter()
                .zip(&other.a_vec)
                .map(|(a, b)| a + b)
                .collect(),
            a_plus: self.a_plus.add(&other.a_plus),
        }
    }

    /// `A + s·I_{n+1}`.
    pub fn shifted(&self, s: f64) -> Self {
        SpaceTimeMatrix {
            a00: self.a00 + s,
            a_vec: self.a_vec.clone(),
            a_plus: self.a_plus.shifted(s),
        }
    }
}

/// JSON form of a matrix: `{"n": int, "rows": [[...], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixJson {
    pub n: usize,
    pub rows: Vec<Vec<f64>>,
}

impl MatrixJson {
    pub fn from_sym(a: &SymMatrix) -> Self {
        MatrixJson {
            n: a.n(),
            rows: a.rows(),
        }
    }

    pub fn to_sym(&self) -> Result<SymMatrix> {
        if self.rows.len() != self.n {
            return Err(DslError::InvalidInput(format!(
                "declared n = {} but {} rows given",
                self.n,
                self.rows.len()
            )));
        }
        SymMatrix::from_rows(&self.rows)
    }
}
