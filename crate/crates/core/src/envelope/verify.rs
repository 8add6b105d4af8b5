use std::f64::consts::FRAC_PI_2;

use serde::Serialize;

use super::solver::BoundaryData;
use crate::angles::spacetime_angle;
use crate::linalg::{SpaceTimeMatrix, SymMatrix};
use crate::transforms::{
    discrete_convexity_report, discrete_hessian, ConvexityReport, GridFunction1D, GridFunction2D,
};

/// Second-difference tolerance; certificates accept `−tol·Δ⁻²`.
pub const CERT_TOL: f64 = 1e-8;

/// `tan(c − π/2)`, or `−∞` when `c − π/2 ≤ −π/2`.
pub fn slice_bound(c: f64) -> f64 {
    let a = c - FRAC_PI_2;
    if a <= -FRAC_PI_2 {
        f64::NEG_INFINITY
    } else {
        a.tan()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinPrincipleReport {
    pub min_second_diff: f64,
    /// `tan(c − π/2)`
    pub bound: f64,
    /// `bound − (tol + allowance)·Δx⁻²`
    pub threshold: f64,
    /// `M·Δt²/4` in value units, `M` the largest time second difference of
    /// `u`. Taking the minimum over time nodes instead of all `t` raises `v`
    /// by at most `M·Δt²/8`, so a second difference of `v` can drop by twice
    /// that even when the exact infimum satisfies the bound.
    pub sampling_allowance: f64,
    pub pass: bool,
    /// Same check with no sampling allowance.
    pub literal_pass: bool,
}

fn max_time_second_diff(u: &GridFunction2D) -> f64 {
    let dt = u.dt();
    let mut m: f64 = 0.0;
    for i in 1..u.nt().saturating_sub(1) {
        for j in 0..u.nx() {
            let d = (u.get(i + 1, j) - 2.0 * u.get(i, j) + u.get(i - 1, j)) / (dt * dt);
            if d.is_finite() {
                m = m.max(d);
            }
        }
    }
    m
}

/// `v(x) = min over interior time nodes of u(t, x)`, certified against the
/// discrete condition `v'' ≥ tan(c − π/2) − (tol + M·Δt²/4)·Δx⁻²`.
pub fn extract_min_principle(u: &GridFunction2D, c: f64) -> (GridFunction1D, MinPrincipleReport) {
    let nt = u.nt();
    let rows = if nt > 2 { 1..nt - 1 } else { 0..nt };
    let values: Vec<f64> = (0..u.nx())
        .map(|j| {
            rows.clone()
                .map(|i| u.get(i, j))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let v = GridFunction1D {
        xs: u.xs.clone(),
        values,
    };
    let dx = u.dx();
    let min_second_diff = v.min_second_difference();
    let bound = slice_bound(c);
    let sampling_allowance = if nt > 2 {
        0.25 * max_time_second_diff(u) * u.dt() * u.dt()
    } else {
        0.0
    };
    let threshold = bound - (CERT_TOL + sampling_allowance) / (dx * dx);
    let report = MinPrincipleReport {
        min_second_diff,
        bound,
        threshold,
        sampling_allowance,
        pass: min_second_diff >= threshold,
        literal_pass: min_second_diff >= bound - CERT_TOL / (dx * dx),
    };
    (v, report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AngleQuantiles {
    pub min: f64,
    pub q01: f64,
    pub q05: f64,
    pub median: f64,
    pub q95: f64,
    pub q99: f64,
    pub max: f64,
}

fn quantiles(mut xs: Vec<f64>) -> Option<AngleQuantiles> {
    if xs.is_empty() {
        return None;
    }
    xs.sort_by(f64::total_cmp);
    let q = |p: f64| xs[((xs.len() - 1) as f64 * p).round() as usize];
    Some(AngleQuantiles {
        min: xs[0],
        q01: q(0.01),
        q05: q(0.05),
        median: q(0.5),
        q95: q(0.95),
        q99: q(0.99),
        max: xs[xs.len() - 1],
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificates {
    pub time_convex: bool,
    /// Checked when `c ≥ π/2`.
    pub joint_convex: Option<bool>,
    /// Checked when `c < π/2`.
    pub slices: Option<bool>,
    pub min_principle: bool,
}

/// Shortfall below each bound, rescaled to value units by the squared step
/// of the stencil, net of `CERT_TOL`. Zero exactly when the certificate
/// passes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CertificateViolations {
    pub time_convex: f64,
    /// Lattice-direction second differences.
    pub joint_convex: f64,
    /// Smallest eigenvalue of the 9-point Hessian.
    pub joint_hessian: f64,
    pub slices: f64,
    /// Net of the sampling allowance.
    pub min_principle: f64,
    pub min_principle_literal: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DslVerification {
    pub c: f64,
    pub boundary_residual: f64,
    pub theta: Option<AngleQuantiles>,
    pub angle_failures: usize,
    pub tol_pde: f64,
    pub subsolution_rate: f64,
    pub convexity: ConvexityReport,
    pub min_principle: MinPrincipleReport,
    pub certificates: Certificates,
    pub violations: CertificateViolations,
}

impl DslVerification {
    pub fn pass(&self) -> bool {
        let c = &self.certificates;
        c.time_convex && c.joint_convex != Some(false) && c.slices != Some(false) && c.min_principle
    }
}

fn shortfall(bound: f64, measured: f64, h: f64) -> f64 {
    if measured.is_finite() && bound.is_finite() {
        ((bound - measured) * h * h - CERT_TOL).max(0.0)
    } else {
        0.0
    }
}

/// Slopes `m·Δt/Δx`, `m ∈ {±1, ±2}`, so slice stencils land on nodes.
pub fn node_aligned_slopes(u: &GridFunction2D) -> Vec<f64> {
    let r = u.dt() / u.dx();
    [-2.0, -1.0, 1.0, 2.0].iter().map(|m| m * r).collect()
}

/// Boundary residual, distribution of `Θ̃` of the discrete Hessian at
/// interior nodes, the subsolution rate at `tol_pde = 10·Δx`, and the
/// convexity and minimum-principle certificates.
pub fn verify_dsl_solution(u: &GridFunction2D, c: f64, g: &BoundaryData) -> DslVerification {
    let (nt, nx) = (u.nt(), u.nx());
    let (dt, dx) = (u.dt(), u.dx());

    let mut residual: f64 = 0.0;
    for j in 0..nx {
        residual = residual.max((u.get(0, j) - g.g0.eval(u.xs[j])).abs());
        residual = residual.max((u.get(nt - 1, j) - g.g1.eval(u.xs[j])).abs());
    }
    for i in 0..nt {
        residual = residual.max((u.get(i, 0) - g.gl.eval(u.ts[i])).abs());
        residual = residual.max((u.get(i, nx - 1) - g.gr.eval(u.ts[i])).abs());
    }

    let tol_pde = 10.0 * dx;
    let mut thetas = Vec::with_capacity(nt * nx);
    let mut failures = 0;
    for i in 1..nt - 1 {
        for j in 1..nx - 1 {
            let (utt, utx, uxx) = discrete_hessian(u, i, j);
            let a = SpaceTimeMatrix {
                a00: utt,
                a_vec: vec![utx],
                a_plus: SymMatrix::from_diag(&[uxx]),
            };
            match spacetime_angle(&a) {
                Ok(v) => thetas.push(v.radians),
                Err(_) => failures += 1,
            }
        }
    }
    let total = thetas.len() + failures;
    let ok = thetas.iter().filter(|&&th| th >= c - tol_pde).count();
    let subsolution_rate = if total == 0 {
        1.0
    } else {
        ok as f64 / total as f64
    };

    let convexity = discrete_convexity_report(u, &node_aligned_slopes(u));
    let (_, min_principle) = extract_min_principle(u, c);
    let bound = slice_bound(c);
    let h = dt.min(dx);
    let slice_min = convexity
        .slices
        .iter()
        .filter(|s| s.nodes > 0)
        .map(|s| s.min_second_diff)
        .fold(f64::INFINITY, f64::min);
    let certificates = Certificates {
        time_convex: convexity.min_second_diff_t >= -CERT_TOL / (dt * dt),
        joint_convex: (c >= FRAC_PI_2)
            .then(|| convexity.min_lattice_second_diff >= -CERT_TOL / (h * h)),
        slices: (c < FRAC_PI_2).then(|| slice_min >= bound - CERT_TOL / (dx * dx)),
        min_principle: min_principle.pass,
    };
    let top = c >= FRAC_PI_2;
    let violations = CertificateViolations {
        time_convex: shortfall(0.0, convexity.min_second_diff_t, dt),
        joint_convex: if top {
            shortfall(0.0, convexity.min_lattice_second_diff, h)
        } else {
            0.0
        },
        joint_hessian: if top {
            shortfall(0.0, convexity.min_joint_hessian_eig, h)
        } else {
            0.0
        },
        slices: if top {
            0.0
        } else {
            shortfall(bound, slice_min, dx)
        },
        min_principle: (shortfall(bound, min_principle.min_second_diff, dx)
            - min_principle.sampling_allowance)
            .max(0.0),
        min_principle_literal: shortfall(bound, min_principle.min_second_diff, dx),
    };

    DslVerification {
        c,
        boundary_residual: residual,
        theta: quantiles(thetas),
        angle_failures: failures,
        tol_pde,
        subsolution_rate,
        convexity,
        min_principle,
        certificates,
        violations,
    }
}
