use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{DslError, Result};
use crate::transforms::GridFunction1D;

/// Largest convex function below the data, evaluated at the data
/// abscissae. Lower hull by monotone chain, then linear interpolation.
pub fn convex_envelope_1d(points: &[(f64, f64)]) -> Result<GridFunction1D> {
    if points.len() < 2 {
        return Err(DslError::InvalidInput("need at least 2 points".into()));
    }
    if points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(DslError::InvalidInput(
            "abscissae must be strictly increasing".into(),
        ));
    }
    let hull = lower_hull(points);
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let mut values = Vec::with_capacity(points.len());
    let mut k = 0;
    for &(x, _) in points {
        while k + 1 < hull.len() - 1 && hull[k + 1].0 <= x {
            k += 1;
        }
        let (x0, y0) = hull[k];
        let (x1, y1) = hull[k + 1];
        let v = if x == x0 {
            y0
        } else if x == x1 {
            y1
        } else {
            y0 + (y1 - y0) * (x - x0) / (x1 - x0)
        };
        values.push(v);
    }
    GridFunction1D::new(xs, values)
}

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

fn lower_hull(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(points.len());
    for &p in points {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull
}

/// Obstacle problem for the `n = 1` SL branch `F_a = {w'' ≥ tan a}`.
///
/// `h` is the obstacle on `[xl, xr]`; nodes of `h` at the endpoints are
/// combined with the caps `f` by taking the minimum. `a = −π/2` is accepted
/// and means no second-derivative constraint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RooftopProblem {
    pub xl: f64,
    pub xr: f64,
    pub h: GridFunction1D,
    pub f: [f64; 2],
    pub a: f64,
}

impl RooftopProblem {
    pub fn new(xl: f64, xr: f64, h: GridFunction1D, f: [f64; 2], a: f64) -> Result<Self> {
        if !(xl < xr) {
            return Err(DslError::InvalidInput(format!("empty domain [{xl}, {xr}]")));
        }
        if h.xs[0] < xl || h.xs[h.len() - 1] > xr {
            return Err(DslError::InvalidInput(
                "obstacle abscissae leave the domain".into(),
            ));
        }
        if !(-FRAC_PI_2..FRAC_PI_2).contains(&a) || !f.iter().all(|v| v.is_finite()) {
            return Err(DslError::InvalidInput(format!(
                "branch a = {a} or caps not admissible"
            )));
        }
        Ok(RooftopProblem { xl, xr, h, f, a })
    }

    /// `tan a`, or `None` for the unconstrained branch.
    pub fn slope_bound(&self) -> Option<f64> {
        if self.a <= -FRAC_PI_2 {
            None
        } else {
            Some(self.a.tan())
        }
    }

    /// Combined upper barrier at the output abscissae.
    pub fn barrier(&self) -> Vec<(f64, f64)> {
        let mut pts = Vec::with_capacity(self.h.len() + 2);
        if self.h.xs[0] > self.xl {
            pts.push((self.xl, self.f[0]));
        }
        for (&x, &y) in self.h.xs.iter().zip(&self.h.values) {
            let y = if x == self.xl {
                y.min(self.f[0])
            } else if x == self.xr {
                y.min(self.f[1])
            } else {
                y
            };
            pts.push((x, y));
        }
        if self.h.xs[self.h.len() - 1] < self.xr {
            pts.push((self.xr, self.f[1]));
        }
        pts
    }
}

/// `P_a(h, f)`: `m·x²/2` plus the convex envelope of the barrier shifted by
/// `−m·x²/2`, `m = tan a`. Without a constraint the barrier itself.
pub fn rooftop_envelope(p: &RooftopProblem) -> GridFunction1D {
    let pts = p.barrier();
    let xs: Vec<f64> = pts.iter().map(|q| q.0).collect();
    let Some(m) = p.slope_bound() else {
        let ys = pts.iter().map(|q| q.1).collect();
        return GridFunction1D { xs, values: ys };
    };
    let shifted: Vec<(f64, f64)> = pts.iter().map(|&(x, y)| (x, y - 0.5 * m * x * x)).collect();
    let env = convex_envelope_1d(&shifted).expect("barrier abscissae are increasing");
    let values = xs
        .iter()
        .zip(&env.values)
        .zip(&pts)
        .map(|((&x, &w), &(_, bar))| (w + 0.5 * m * x * x).min(bar))
        .collect();
    GridFunction1D { xs, values }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transforms::uniform_grid;

    #[test]
    fn convex_data_unchanged() {
        let pts: Vec<(f64, f64)> = uniform_grid(-1.0, 1.0, 9)
            .into_iter()
            .map(|x| (x, x * x))
            .collect();
        let env = convex_envelope_1d(&pts).unwrap();
        for (v, p) in env.values.iter().zip(&pts) {
            assert_eq!(*v, p.1);
        }
    }

    #[test]
    fn two_points_give_chord() {
        let env = convex_envelope_1d(&[(0.0, 1.0), (2.0, 3.0)]).unwrap();
        assert_eq!(env.values, vec![1.0, 3.0]);
    }

    #[test]
    fn concave_cap_collapses_to_chord() {
        let xs = uniform_grid(-1.0, 1.0, 21);
        let pts: Vec<(f64, f64)> = xs.iter().map(|&x| (x, 1.0 - x * x)).collect();
        let env = convex_envelope_1d(&pts).unwrap();
        assert!(env.values.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn zero_obstacle_flat_branch() {
        let h = GridFunction1D::from_fn(uniform_grid(-1.0, 1.0, 11), |_| 0.0).unwrap();
        let p = RooftopProblem::new(-1.0, 1.0, h, [0.0, 0.0], 0.0).unwrap();
        assert!(rooftop_envelope(&p).values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn concave_obstacle_flat_branch() {
        let xs = uniform_grid(-1.0, 1.0, 41);
        let h = GridFunction1D::from_fn(xs[1..40].to_vec(), |x| 1.0 - x * x).unwrap();
        let p = RooftopProblem::new(-1.0, 1.0, h, [0.0, 0.0], 0.0).unwrap();
        let w = rooftop_envelope(&p);
        assert_eq!(w.len(), 41);
        assert!(w.values.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn unconstrained_branch_returns_barrier() {
        let h = GridFunction1D::new(vec![0.0, 0.5, 1.0], vec![3.0, -1.0, 2.0]).unwrap();
        let p = RooftopProblem::new(0.0, 1.0, h, [1.0, 5.0], -FRAC_PI_2).unwrap();
        assert_eq!(rooftop_envelope(&p).values, vec![1.0, -1.0, 2.0]);
    }

    #[test]
    fn out_of_range_branch_rejected() {
        let h = GridFunction1D::new(vec![0.0, 1.0], vec![0.0, 0.0]).unwrap();
        assert!(RooftopProblem::new(0.0, 1.0, h, [0.0, 0.0], FRAC_PI_2).is_err());
    }
}
