use serde::{Deserialize, Serialize};

use crate::linalg::{SpaceTimeMatrix, SymMatrix};

/// The affine map `x ↦ (t₀ + Vᵀx, x)` from space into space-time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineSlice {
    pub t0: f64,
    pub v: Vec<f64>,
}

impl AffineSlice {
    pub fn new(t0: f64, v: Vec<f64>) -> Self {
        AffineSlice { t0, v }
    }

    pub fn apply(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let t = self.t0 + dot(&self.v, x);
        (t, x.to_vec())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `ℓ_V* A = a₀₀VVᵀ + Vaᵀ + aVᵀ + A⁺`.
pub fn pullback_slice(a: &SpaceTimeMatrix, v: &[f64]) -> SymMatrix {
    assert_eq!(v.len(), a.n(), "slice direction must have length n");
    SymMatrix::from_upper_fn(a.n(), |i, j| {
        a.a00 * v[i] * v[j] + v[i] * a.a_vec[j] + a.a_vec[i] * v[j] + a.a_plus.get(i, j)
    })
}

/// `A_V = [[1, 0], [V, I]] · A · [[1, Vᵀ], [0, I]]`, whose space block is
/// `ℓ_V* A` and whose coupling is `a₀₀V + a`.
pub fn shear_conjugate(a: &SpaceTimeMatrix, v: &[f64]) -> SpaceTimeMatrix {
    assert_eq!(v.len(), a.n(), "shear direction must have length n");
    SpaceTimeMatrix {
        a00: a.a00,
        a_vec: v
            .iter()
            .zip(&a.a_vec)
            .map(|(vi, ai)| a.a00 * vi + ai)
            .collect(),
        a_plus: pullback_slice(a, v),
    }
}

/// A `C²` function on space-time with a closed-form Hessian.
pub trait SpaceTimeFunction {
    fn value(&self, t: f64, x: &[f64]) -> f64;
    fn hessian(&self, t: f64, x: &[f64]) -> SpaceTimeMatrix;
}

/// `‖FD-Hessian(u ∘ ℓ_{t₀,V})(x) − ℓ_V*(D²u)(ℓ(x))‖∞` using central
/// differences with step `h`. Second order in `h` for smooth `u`, exact up
/// to rounding for quadratics.
pub fn hessian_pullback_check<U: SpaceTimeFunction + ?Sized>(
    u: &U,
    t0: f64,
    v: &[f64],
    x: &[f64],
    h: f64,
) -> f64 {
    let n = x.len();
    assert_eq!(v.len(), n);
    let slice = AffineSlice::new(t0, v.to_vec());
    let g = |y: &[f64]| {
        let (t, xs) = slice.apply(y);
        u.value(t, &xs)
    };
    let shifted = |steps: &[(usize, f64)]| {
        let mut y = x.to_vec();
        for &(k, s) in steps {
            y[k] += s;
        }
        g(&y)
    };
    let g0 = g(x);
    let (t, _) = slice.apply(x);
    let exact = pullback_slice(&u.hessian(t, x), v);

    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            let fd = if i == j {
                (shifted(&[(i, h)]) - 2.0 * g0 + shifted(&[(i, -h)])) / (h * h)
            } else {
                (shifted(&[(i, h), (j, h)])
                    - shifted(&[(i, h), (j, -h)])
                    - shifted(&[(i, -h), (j, h)])
                    + shifted(&[(i, -h), (j, -h)]))
                    / (4.0 * h * h)
            };
            worst = worst.max((fd - exact.get(i, j)).abs());
        }
    }
    worst
}
