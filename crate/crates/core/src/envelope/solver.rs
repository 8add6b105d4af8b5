use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::rooftop::{rooftop_envelope, RooftopProblem};
use crate::error::{DslError, Result};
use crate::transforms::{tau_grid, uniform_grid, GridFunction1D, GridFunction2D};

/// Corner compatibility tolerance.
pub const CORNER_TOL: f64 = 1e-9;

/// Traces of `g` on the four sides of `[0, 1] × [xl, xr]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryData {
    /// `g(0, ·)`
    pub g0: GridFunction1D,
    /// `g(1, ·)`
    pub g1: GridFunction1D,
    /// `g(·, xl)`
    pub gl: GridFunction1D,
    /// `g(·, xr)`
    pub gr: GridFunction1D,
}

fn ends(f: &GridFunction1D) -> (f64, f64) {
    (f.xs[0], f.xs[f.len() - 1])
}

impl BoundaryData {
    pub fn new(
        g0: GridFunction1D,
        g1: GridFunction1D,
        gl: GridFunction1D,
        gr: GridFunction1D,
    ) -> Result<Self> {
        let (xl, xr) = ends(&g0);
        if ends(&g1) != (xl, xr) {
            return Err(DslError::InvalidInput(
                "g0 and g1 cover different intervals".into(),
            ));
        }
        if ends(&gl) != (0.0, 1.0) || ends(&gr) != (0.0, 1.0) {
            return Err(DslError::InvalidInput(
                "side traces must cover t in [0, 1]".into(),
            ));
        }
        let corners = [
            ("(0, xl)", g0.eval(xl), gl.eval(0.0)),
            ("(0, xr)", g0.eval(xr), gr.eval(0.0)),
            ("(1, xl)", g1.eval(xl), gl.eval(1.0)),
            ("(1, xr)", g1.eval(xr), gr.eval(1.0)),
        ];
        for (corner, left, right) in corners {
            if (left - right).abs() > CORNER_TOL {
                return Err(DslError::CornerMismatch {
                    corner,
                    left,
                    right,
                });
            }
        }
        Ok(BoundaryData { g0, g1, gl, gr })
    }

    /// Traces of a function on `[0, 1] × [xl, xr]` sampled on uniform grids.
    pub fn from_fn(
        xl: f64,
        xr: f64,
        nt: usize,
        nx: usize,
        g: impl Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        let xs = uniform_grid(xl, xr, nx);
        let ts = uniform_grid(0.0, 1.0, nt);
        BoundaryData::new(
            GridFunction1D::from_fn(xs.clone(), |x| g(0.0, x))?,
            GridFunction1D::from_fn(xs, |x| g(1.0, x))?,
            GridFunction1D::from_fn(ts.clone(), |t| g(t, xl))?,
            GridFunction1D::from_fn(ts, |t| g(t, xr))?,
        )
    }

    pub fn xl(&self) -> f64 {
        self.g0.xs[0]
    }

    pub fn xr(&self) -> f64 {
        self.g0.xs[self.g0.len() - 1]
    }

    /// Pointwise `g ≤ other` on all four traces (at this data's nodes).
    pub fn dominated_by(&self, other: &BoundaryData) -> bool {
        let below = |a: &GridFunction1D, b: &GridFunction1D| {
            a.xs.iter().zip(&a.values).all(|(&x, &v)| v <= b.eval(x))
        };
        below(&self.g0, &other.g0)
            && below(&self.g1, &other.g1)
            && below(&self.gl, &other.gl)
            && below(&self.gr, &other.gr)
    }
}

/// `Θ̃(D²u) = c` on `(0, 1) × (xl, xr)`, `u = g` on the boundary, `n = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DslDirichletProblem {
    pub c: f64,
    pub nt: usize,
    pub nx: usize,
    /// Slope grid size; `4·nt + 1` when absent.
    pub ntau: Option<usize>,
    pub boundary: BoundaryData,
}

impl DslDirichletProblem {
    pub fn new(
        c: f64,
        nt: usize,
        nx: usize,
        ntau: Option<usize>,
        boundary: BoundaryData,
    ) -> Result<Self> {
        if !(0.0..PI).contains(&c) {
            return Err(DslError::InvalidInput(format!("c = {c} outside [0, π)")));
        }
        if nt < 3 || nx < 3 || ntau.is_some_and(|k| k < 2) {
            return Err(DslError::InvalidInput(
                "grids need at least 3 nodes per axis".into(),
            ));
        }
        Ok(DslDirichletProblem {
            c,
            nt,
            nx,
            ntau,
            boundary,
        })
    }

    pub fn ts(&self) -> Vec<f64> {
        uniform_grid(0.0, 1.0, self.nt)
    }

    pub fn xs(&self) -> Vec<f64> {
        uniform_grid(self.boundary.xl(), self.boundary.xr(), self.nx)
    }

    pub fn ntau(&self) -> usize {
        self.ntau.unwrap_or(4 * self.nt + 1)
    }

    /// SL phase `c − π/2` of the rooftop envelopes.
    pub fn slice_phase(&self) -> f64 {
        self.c - FRAC_PI_2
    }
}

/// Boundary traces on the solver grid.
pub(crate) struct SampledBoundary {
    pub ts: Vec<f64>,
    pub xs: Vec<f64>,
    pub g0: Vec<f64>,
    pub g1: Vec<f64>,
    pub gl: Vec<f64>,
    pub gr: Vec<f64>,
}

impl SampledBoundary {
    pub fn new(p: &DslDirichletProblem) -> Self {
        let ts = p.ts();
        let xs = p.xs();
        let b = &p.boundary;
        SampledBoundary {
            g0: xs.iter().map(|&x| b.g0.eval(x)).collect(),
            g1: xs.iter().map(|&x| b.g1.eval(x)).collect(),
            gl: ts.iter().map(|&t| b.gl.eval(t)).collect(),
            gr: ts.iter().map(|&t| b.gr.eval(t)).collect(),
            ts,
            xs,
        }
    }

    /// Largest time slope of the data, including `g1 − g0` across the slab.
    fn lipschitz(&self) -> f64 {
        let dt = self.ts[1] - self.ts[0];
        let side = |g: &[f64]| {
            g.windows(2)
                .map(|w| (w[1] - w[0]).abs() / dt)
                .fold(0.0, f64::max)
        };
        let across = self
            .g0
            .iter()
            .zip(&self.g1)
            .map(|(a, b)| (b - a).abs())
            .fold(0.0, f64::max);
        side(&self.gl).max(side(&self.gr)).max(across)
    }
}

/// Discrete duality formula: for each slope `τ`, the rooftop envelope
/// `w_τ = P_{c−π/2}(min(g0, g1 − τ), min_t g(t, ·) − tτ)`; then
/// `u(t, x) = max_τ w_τ(x) + tτ`, with `u(0, ·) = g0` and `u(1, ·) = g1`.
pub fn solve_dsl_dirichlet(p: &DslDirichletProblem) -> Result<GridFunction2D> {
    let sb = SampledBoundary::new(p);
    let taus = tau_grid(sb.lipschitz(), p.ntau());
    let (xl, xr) = (p.boundary.xl(), p.boundary.xr());
    let a = p.slice_phase();
    let nx = p.nx;

    let envelopes: Vec<Vec<f64>> = taus
        .par_iter()
        .map(|&tau| {
            let h: Vec<f64> = sb
                .g0
                .iter()
                .zip(&sb.g1)
                .map(|(g0, g1)| g0.min(g1 - tau))
                .collect();
            let cap = |g: &[f64]| {
                g.iter()
                    .zip(&sb.ts)
                    .map(|(v, t)| v - t * tau)
                    .fold(f64::INFINITY, f64::min)
            };
            let f = [cap(&sb.gl), cap(&sb.gr)];
            let obstacle = GridFunction1D {
                xs: sb.xs.clone(),
                values: h,
            };
            let problem = RooftopProblem {
                xl,
                xr,
                h: obstacle,
                f,
                a,
            };
            rooftop_envelope(&problem).values
        })
        .collect();

    let mut values = vec![f64::NEG_INFINITY; p.nt * nx];
    values[..nx].copy_from_slice(&sb.g0);
    values[(p.nt - 1) * nx..].copy_from_slice(&sb.g1);
    for (i, &t) in sb.ts.iter().enumerate().take(p.nt - 1).skip(1) {
        let row = &mut values[i * nx..(i + 1) * nx];
        for (w, &tau) in envelopes.iter().zip(&taus) {
            for (o, &wv) in row.iter_mut().zip(w) {
                *o = o.max(wv + t * tau);
            }
        }
    }
    GridFunction2D::new(sb.ts, sb.xs, values)
}

/// Problem file layout.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemJson {
    #[serde(default)]
    pub schema: Option<String>,
    pub c: f64,
    pub domain: DomainJson,
    pub grid: GridJson,
    pub boundary: BoundaryJson,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DomainJson {
    pub xl: f64,
    pub xr: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridJson {
    pub nt: usize,
    pub nx: usize,
    #[serde(default)]
    pub ntau: Option<usize>,
}

/// Trace values on uniform grids: `g0`, `g1` over x, `gl`, `gr` over t.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundaryJson {
    pub g0: Vec<f64>,
    pub g1: Vec<f64>,
    pub gl: Vec<f64>,
    pub gr: Vec<f64>,
}

impl ProblemJson {
    pub fn to_problem(&self) -> Result<DslDirichletProblem> {
        let b = &self.boundary;
        let xs = |k: usize| uniform_grid(self.domain.xl, self.domain.xr, k);
        let ts = |k: usize| uniform_grid(0.0, 1.0, k);
        let data = BoundaryData::new(
            GridFunction1D::new(xs(b.g0.len()), b.g0.clone())?,
            GridFunction1D::new(xs(b.g1.len()), b.g1.clone())?,
            GridFunction1D::new(ts(b.gl.len()), b.gl.clone())?,
            GridFunction1D::new(ts(b.gr.len()), b.gr.clone())?,
        )?;
        DslDirichletProblem::new(self.c, self.grid.nt, self.grid.nx, self.grid.ntau, data)
    }

    /// Samples `g` on the problem's own grid.
    pub fn from_fn(
        c: f64,
        xl: f64,
        xr: f64,
        nt: usize,
        nx: usize,
        g: impl Fn(f64, f64) -> f64,
    ) -> Self {
        let xs = uniform_grid(xl, xr, nx);
        let ts = uniform_grid(0.0, 1.0, nt);
        ProblemJson {
            schema: Some(crate::SCHEMA.to_string()),
            c,
            domain: DomainJson { xl, xr },
            grid: GridJson { nt, nx, ntau: None },
            boundary: BoundaryJson {
                g0: xs.iter().map(|&x| g(0.0, x)).collect(),
                g1: xs.iter().map(|&x| g(1.0, x)).collect(),
                gl: ts.iter().map(|&t| g(t, xl)).collect(),
                gr: ts.iter().map(|&t| g(t, xr)).collect(),
            },
        }
    }
}
