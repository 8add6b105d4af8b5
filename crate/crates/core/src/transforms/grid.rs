use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{DslError, Result};

const UNIFORM_TOL: f64 = 1e-12;

/// `n` equally spaced points from `lo` to `hi` inclusive.
pub fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let h = (hi - lo) / (n - 1) as f64;
            (0..n)
                .map(|k| if k == n - 1 { hi } else { lo + k as f64 * h })
                .collect()
        }
    }
}

fn check_uniform(name: &str, g: &[f64]) -> Result<()> {
    if g.is_empty() || g.iter().any(|v| !v.is_finite()) {
        return Err(DslError::InvalidInput(format!(
            "{name} grid is empty or not finite"
        )));
    }
    if g.len() < 2 {
        return Ok(());
    }
    let h = (g[g.len() - 1] - g[0]) / (g.len() - 1) as f64;
    if h <= 0.0 {
        return Err(DslError::InvalidInput(format!(
            "{name} grid is not increasing"
        )));
    }
    for (k, v) in g.iter().enumerate() {
        if (v - (g[0] + k as f64 * h)).abs() > UNIFORM_TOL * (1.0 + v.abs()) {
            return Err(DslError::InvalidInput(format!(
                "{name} grid is not uniform at index {k}"
            )));
        }
    }
    Ok(())
}

/// Values on strictly increasing abscissae, linear in between.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction1D {
    pub xs: Vec<f64>,
    pub values: Vec<f64>,
}

impl GridFunction1D {
    pub fn new(xs: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if xs.len() != values.len() {
            return Err(DslError::DimensionMismatch {
                expected: xs.len(),
                got: values.len(),
            });
        }
        if xs.len() < 2 {
            return Err(DslError::InvalidInput(
                "a grid function needs at least 2 points".into(),
            ));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) || xs.iter().chain(&values).any(|v| !v.is_finite())
        {
            return Err(DslError::InvalidInput(
                "abscissae must be finite and strictly increasing, values finite".into(),
            ));
        }
        Ok(GridFunction1D { xs, values })
    }

    pub fn from_fn(xs: Vec<f64>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = xs.iter().map(|&x| f(x)).collect();
        GridFunction1D::new(xs, values)
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    /// Piecewise-linear interpolation, clamped to the end values outside.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.values[0];
        }
        if x >= self.xs[n - 1] {
            return self.values[n - 1];
        }
        let k = self.xs.partition_point(|&v| v <= x) - 1;
        let (x0, x1) = (self.xs[k], self.xs[k + 1]);
        let s = (x - x0) / (x1 - x0);
        self.values[k] * (1.0 - s) + self.values[k + 1] * s
    }

    /// Minimum over nodes of the centered second difference
    /// (nonuniform three-point formula). `+∞` with fewer than 3 nodes.
    pub fn min_second_difference(&self) -> f64 {
        let (x, y) = (&self.xs, &self.values);
        (1..x.len().saturating_sub(1))
            .map(|i| second_difference(x[i - 1], x[i], x[i + 1], y[i - 1], y[i], y[i + 1]))
            .fold(f64::INFINITY, f64::min)
    }

    /// CSV with header `x,value`, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,value\n");
        for (x, v) in self.xs.iter().zip(&self.values) {
            let _ = writeln!(out, "{x:.16e},{v:.16e}");
        }
        out
    }
}

pub(crate) fn second_difference(x0: f64, x1: f64, x2: f64, y0: f64, y1: f64, y2: f64) -> f64 {
    let h0 = x1 - x0;
    let h1 = x2 - x1;
    2.0 * ((y2 - y1) / h1 - (y1 - y0) / h0) / (h0 + h1)
}

/// Values on a uniform `ts × xs` grid, row-major by `t` then `x`.
/// The first axis is time for `u` and slope `τ` for its transform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction2D {
    pub ts: Vec<f64>,
    pub xs: Vec<f64>,
    pub values: Vec<f64>,
}

impl GridFunction2D {
    pub fn new(ts: Vec<f64>, xs: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        check_uniform("first-axis", &ts)?;
        check_uniform("x", &xs)?;
        if values.len() != ts.len() * xs.len() {
            return Err(DslError::DimensionMismatch {
                expected: ts.len() * xs.len(),
                got: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(DslError::InvalidInput("grid values must be finite".into()));
        }
        Ok(GridFunction2D { ts, xs, values })
    }

    pub fn from_fn(ts: Vec<f64>, xs: Vec<f64>, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let values = ts
            .iter()
            .flat_map(|&t| xs.iter().map(move |&x| (t, x)))
            .map(|(t, x)| f(t, x))
            .collect();
        GridFunction2D::new(ts, xs, values)
    }

    pub fn nt(&self) -> usize {
        self.ts.len()
    }

    pub fn nx(&self) -> usize {
        self.xs.len()
    }

    pub fn dt(&self) -> f64 {
        spacing(&self.ts)
    }

    pub fn dx(&self) -> f64 {
        spacing(&self.xs)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.xs.len() + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let nx = self.xs.len();
        self.values[i * nx + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let nx = self.xs.len();
        &self.values[i * nx..(i + 1) * nx]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.nt()).map(|i| self.get(i, j)).collect()
    }

    /// Bilinear interpolation; `None` outside the grid rectangle.
    pub fn bilinear(&self, t: f64, x: f64) -> Option<f64> {
        let (ti, ts) = locate(&self.ts, t)?;
        let (xj, xs) = locate(&self.xs, x)?;
        let ti1 = (ti + 1).min(self.nt() - 1);
        let xj1 = (xj + 1).min(self.nx() - 1);
        let v00 = self.get(ti, xj);
        let v01 = self.get(ti, xj1);
        let v10 = self.get(ti1, xj);
        let v11 = self.get(ti1, xj1);
        Some((1.0 - ts) * ((1.0 - xs) * v00 + xs * v01) + ts * ((1.0 - xs) * v10 + xs * v11))
    }

    pub fn max_abs_diff(&self, other: &GridFunction2D) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// CSV with header `{label},x,value`, 17 significant digits.
    pub fn to_csv(&self, label: &str) -> String {
        let mut out = format!("{label},x,value\n");
        for (i, t) in self.ts.iter().enumerate() {
            for (j, x) in self.xs.iter().enumerate() {
                let _ = writeln!(out, "{t:.16e},{x:.16e},{:.16e}", self.get(i, j));
            }
        }
        out
    }

    pub fn write_csv(&self, path: &Path, label: &str) -> Result<()> {
        std::fs::write(path, self.to_csv(label))?;
        Ok(())
    }
}

fn spacing(g: &[f64]) -> f64 {
    if g.len() < 2 {
        0.0
    } else {
        (g[g.len() - 1] - g[0]) / (g.len() - 1) as f64
    }
}

/// Cell index and fractional offset of `v` on a uniform grid.
fn locate(g: &[f64], v: f64) -> Option<(usize, f64)> {
    let n = g.len();
    let (lo, hi) = (g[0], g[n - 1]);
    let slack = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
    if !(v >= lo - slack && v <= hi + slack) {
        return None;
    }
    if n == 1 {
        return Some((0, 0.0));
    }
    let h = spacing(g);
    let pos = ((v - lo) / h).clamp(0.0, (n - 1) as f64);
    let k = (pos.floor() as usize).min(n - 2);
    let mut frac = pos - k as f64;
    // snap to the node to keep node-aligned queries exact
    if frac.abs() < 1e-9 {
        frac = 0.0;
    } else if (1.0 - frac).abs() < 1e-9 {
        return Some((k + 1, 0.0));
    }
    Some((k, frac))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_grid_endpoints_exact() {
        let g = uniform_grid(-1.0, 1.0, 129);
        assert_eq!(g[0], -1.0);
        assert_eq!(g[128], 1.0);
        assert_eq!(g[64], 0.0);
    }

    #[test]
    fn nonuniform_rejected() {
        assert!(GridFunction2D::new(vec![0.0, 0.3, 1.0], vec![0.0, 1.0], vec![0.0; 6]).is_err());
        assert!(GridFunction1D::new(vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn interpolation() {
        let f = GridFunction1D::new(vec![0.0, 1.0, 3.0], vec![0.0, 2.0, 0.0]).unwrap();
        assert_eq!(f.eval(0.5), 1.0);
        assert_eq!(f.eval(2.0), 1.0);
        assert_eq!(f.eval(-1.0), 0.0);
        let u = GridFunction2D::from_fn(
            uniform_grid(0.0, 1.0, 3),
            uniform_grid(0.0, 2.0, 3),
            |t, x| t + 2.0 * x + t * x,
        )
        .unwrap();
        assert!((u.bilinear(0.25, 0.5).unwrap() - (0.25 + 1.0 + 0.125)).abs() < 1e-15);
        assert_eq!(u.bilinear(0.5, 1.0), Some(u.get(1, 1)));
        assert_eq!(u.bilinear(1.5, 1.0), None);
    }

    #[test]
    fn second_difference_of_quadratic() {
        let f = GridFunction1D::from_fn(vec![0.0, 0.1, 0.4, 1.0], |x| 3.0 * x * x).unwrap();
        assert!((f.min_second_difference() - 6.0).abs() < 1e-12);
    }

    #[test]
    fn csv_layout() {
        let u = GridFunction2D::from_fn(vec![0.0, 1.0], vec![0.0, 0.5], |t, x| t + x).unwrap();
        let csv = u.to_csv("t");
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t,x,value");
        assert_eq!(lines.len(), 5);
        assert_eq!(
            lines[2],
            "0.0000000000000000e0,5.0000000000000000e-1,5.0000000000000000e-1"
        );
    }
}
