use serde::{Deserialize, Serialize};

use crate::error::{DslError, Result};
use crate::transforms::AffineSlice;

/// Affine 2-plane `{base + s·h₁ + r·h₂}` in space-time; points are `(t, x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffinePlane2D {
    pub base: (f64, Vec<f64>),
    pub h1: (f64, Vec<f64>),
    pub h2: (f64, Vec<f64>),
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl AffinePlane2D {
    pub fn new(base: (f64, Vec<f64>), h1: (f64, Vec<f64>), h2: (f64, Vec<f64>)) -> Result<Self> {
        let n = base.1.len();
        for len in [h1.1.len(), h2.1.len()] {
            if len != n {
                return Err(DslError::DimensionMismatch {
                    expected: n,
                    got: len,
                });
            }
        }
        // Gram determinant of (h₁, h₂) in ℝ¹⁺ⁿ
        let g11 = h1.0 * h1.0 + dot(&h1.1, &h1.1);
        let g22 = h2.0 * h2.0 + dot(&h2.1, &h2.1);
        let g12 = h1.0 * h2.0 + dot(&h1.1, &h2.1);
        if g11 * g22 - g12 * g12 <= 1e-24 * g11 * g22 || g11 == 0.0 || g22 == 0.0 {
            return Err(DslError::InvalidInput(
                "plane spanning vectors are linearly dependent".into(),
            ));
        }
        Ok(AffinePlane2D { base, h1, h2 })
    }

    pub fn n(&self) -> usize {
        self.base.1.len()
    }

    pub fn point(&self, s: f64, r: f64) -> (f64, Vec<f64>) {
        let t = self.base.0 + s * self.h1.0 + r * self.h2.0;
        let x = (0..self.n())
            .map(|k| self.base.1[k] + s * self.h1.1[k] + r * self.h2.1[k])
            .collect();
        (t, x)
    }
}

/// `(t₀, V)` with `H ⊂ {(t₀ + ⟨V, x⟩, x)}`, `V` the minimum-norm solution of
/// `⟨V, x₁⟩ = t₁`, `⟨V, x₂⟩ = t₂`. `NoSlice` when `x₁, x₂` are dependent,
/// i.e. the plane contains a line `ℝ × {x₀}`.
pub fn plane_to_slice(h: &AffinePlane2D) -> Result<AffineSlice> {
    let (t1, x1) = (&h.h1.0, &h.h1.1);
    let (t2, x2) = (&h.h2.0, &h.h2.1);
    let g11 = dot(x1, x1);
    let g22 = dot(x2, x2);
    let g12 = dot(x1, x2);
    let det = g11 * g22 - g12 * g12;
    if g11 == 0.0 || g22 == 0.0 || det <= 1e-12 * g11 * g22 {
        return Err(DslError::NoSlice);
    }
    // V = X (XᵀX)⁻¹ t
    let c1 = (g22 * t1 - g12 * t2) / det;
    let c2 = (g11 * t2 - g12 * t1) / det;
    let v: Vec<f64> = x1.iter().zip(x2).map(|(a, b)| c1 * a + c2 * b).collect();
    let t0 = h.base.0 - dot(&v, &h.base.1);

    let scale = 1.0 + t1.abs().max(t2.abs());
    let r1 = (dot(&v, x1) - t1).abs();
    let r2 = (dot(&v, x2) - t2).abs();
    if r1.max(r2) > 1e-10 * scale {
        return Err(DslError::NoSlice);
    }
    Ok(AffineSlice::new(t0, v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decoupled_system() {
        let h = AffinePlane2D::new(
            (0.0, vec![0.0, 0.0]),
            (1.0, vec![1.0, 0.0]),
            (0.0, vec![0.0, 1.0]),
        )
        .unwrap();
        let s = plane_to_slice(&h).unwrap();
        assert_eq!(s.t0, 0.0);
        assert_eq!(s.v, vec![1.0, 0.0]);
    }

    #[test]
    fn time_like_line_has_no_slice() {
        let h = AffinePlane2D::new((0.0, vec![0.0]), (1.0, vec![0.0]), (0.0, vec![1.0])).unwrap();
        assert_eq!(plane_to_slice(&h), Err(DslError::NoSlice));
    }

    #[test]
    fn dependent_spanning_vectors_rejected() {
        assert!(AffinePlane2D::new((0.0, vec![0.0]), (1.0, vec![2.0]), (2.0, vec![4.0])).is_err());
    }

    #[test]
    fn plane_points_lie_on_slice() {
        let h = AffinePlane2D::new(
            (0.3, vec![1.0, -2.0, 0.5]),
            (0.7, vec![1.0, 0.2, 0.0]),
            (-1.1, vec![0.0, 1.0, 3.0]),
        )
        .unwrap();
        let s = plane_to_slice(&h).unwrap();
        for (a, b) in [(0.0, 0.0), (1.0, -2.0), (0.5, 4.0)] {
            let (t, x) = h.point(a, b);
            assert!((s.apply(&x).0 - t).abs() < 1e-12);
        }
    }
}
