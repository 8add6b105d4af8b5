use serde::Serialize;

use super::grid::GridFunction2D;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SliceSecondDifference {
    /// Slope `v` of the slice `x ↦ (t₀ + v·x, x)`.
    pub slope: f64,
    pub min_second_diff: f64,
    /// Interior nodes whose slice stencil stays inside the open time range.
    pub nodes: usize,
}

/// Minima of centered second differences over interior nodes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexityReport {
    pub min_second_diff_t: f64,
    pub min_second_diff_x: f64,
    pub min_joint_hessian_eig: f64,
    /// Smallest second difference along the lattice directions
    /// [`LATTICE_DIRECTIONS`], centred at interior nodes.
    pub min_lattice_second_diff: f64,
    pub slices: Vec<SliceSecondDifference>,
}

/// `(u_tt, u_tx, u_xx)` at interior node `(i, j)`.
pub fn discrete_hessian(u: &GridFunction2D, i: usize, j: usize) -> (f64, f64, f64) {
    let (dt, dx) = (u.dt(), u.dx());
    let utt = (u.get(i + 1, j) - 2.0 * u.get(i, j) + u.get(i - 1, j)) / (dt * dt);
    let uxx = (u.get(i, j + 1) - 2.0 * u.get(i, j) + u.get(i, j - 1)) / (dx * dx);
    let utx = (u.get(i + 1, j + 1) - u.get(i + 1, j - 1) - u.get(i - 1, j + 1)
        + u.get(i - 1, j - 1))
        / (4.0 * dt * dx);
    (utt, utx, uxx)
}

/// Index steps `(Δi, Δj)` used for directional second differences.
pub const LATTICE_DIRECTIONS: [(usize, isize); 8] = [
    (1, 0),
    (0, 1),
    (1, 1),
    (1, -1),
    (2, 1),
    (2, -1),
    (1, 2),
    (1, -2),
];

/// Minimum over interior centres and [`LATTICE_DIRECTIONS`] of
/// `(u(p + e) − 2u(p) + u(p − e)) / |e|²`. Stencil ends may sit on the
/// boundary rows and columns. Samples of a jointly convex function give
/// nonnegative values exactly, unlike the 9-point Hessian.
pub fn min_lattice_second_diff(u: &GridFunction2D) -> f64 {
    let (nt, nx) = (u.nt() as isize, u.nx() as isize);
    let (dt, dx) = (u.dt(), u.dx());
    let mut worst = f64::INFINITY;
    for &(a, b) in &LATTICE_DIRECTIONS {
        let a = a as isize;
        let len2 = (a as f64 * dt).powi(2) + (b as f64 * dx).powi(2);
        for i in 1..nt - 1 {
            for j in 1..nx - 1 {
                let (i0, j0, i1, j1) = (i - a, j - b, i + a, j + b);
                if i0 < 0 || i1 >= nt || j0.min(j1) < 0 || j0.max(j1) >= nx {
                    continue;
                }
                let d = (u.get(i1 as usize, j1 as usize) - 2.0 * u.get(i as usize, j as usize)
                    + u.get(i0 as usize, j0 as usize))
                    / len2;
                worst = worst.min(d);
            }
        }
    }
    worst
}

/// Smaller eigenvalue of `[[a, b], [b, c]]`.
pub fn min_eig_2x2(a: f64, b: f64, c: f64) -> f64 {
    let m = 0.5 * (a + c);
    let r = (0.25 * (a - c) * (a - c) + b * b).sqrt();
    m - r
}

/// Second differences of `u` in `t`, in `x`, the smallest eigenvalue of the
/// discrete 2×2 Hessian, the lattice-direction minimum, and second differences along the sheared slices
/// `x ↦ u(tᵢ + v(x − xⱼ), x)` through each interior node.
///
/// Slice values off the nodes come from bilinear interpolation; slopes that
/// are integer multiples of `Δt/Δx` hit nodes exactly. Slice stencils may
/// not reach the rows `t = t₀` or `t = t_last`.
pub fn discrete_convexity_report(u: &GridFunction2D, slopes: &[f64]) -> ConvexityReport {
    let (nt, nx) = (u.nt(), u.nx());
    let (dt, dx) = (u.dt(), u.dx());
    let mut min_t = f64::INFINITY;
    let mut min_x = f64::INFINITY;
    let mut min_eig = f64::INFINITY;
    for i in 1..nt.saturating_sub(1) {
        for j in 1..nx.saturating_sub(1) {
            let (utt, utx, uxx) = discrete_hessian(u, i, j);
            min_t = min_t.min(utt);
            min_x = min_x.min(uxx);
            min_eig = min_eig.min(min_eig_2x2(utt, utx, uxx));
        }
    }

    let inner = 1e-9 * dt;
    let (t_lo, t_hi) = if nt >= 3 {
        (u.ts[1], u.ts[nt - 2])
    } else {
        (1.0, 0.0)
    };
    let slices = slopes
        .iter()
        .map(|&v| {
            let mut worst = f64::INFINITY;
            let mut nodes = 0;
            for i in 1..nt.saturating_sub(1) {
                for j in 1..nx.saturating_sub(1) {
                    let t = u.ts[i];
                    let (ta, tb) = (t - v * dx, t + v * dx);
                    let ok = |s: f64| s >= t_lo - inner && s <= t_hi + inner;
                    if !(ok(ta) && ok(tb)) {
                        continue;
                    }
                    let (Some(ya), Some(yb)) =
                        (u.bilinear(ta, u.xs[j - 1]), u.bilinear(tb, u.xs[j + 1]))
                    else {
                        continue;
                    };
                    let d = (ya - 2.0 * u.get(i, j) + yb) / (dx * dx);
                    worst = worst.min(d);
                    nodes += 1;
                }
            }
            SliceSecondDifference {
                slope: v,
                min_second_diff: worst,
                nodes,
            }
        })
        .collect();

    ConvexityReport {
        min_second_diff_t: min_t,
        min_second_diff_x: min_x,
        min_joint_hessian_eig: min_eig,
        min_lattice_second_diff: min_lattice_second_diff(u),
        slices,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transforms::grid::uniform_grid;

    #[test]
    fn paraboloid() {
        let u = GridFunction2D::from_fn(
            uniform_grid(0.0, 1.0, 21),
            uniform_grid(-1.0, 1.0, 21),
            |t, x| t * t + x * x,
        )
        .unwrap();
        let r = discrete_convexity_report(&u, &[0.0, 0.5]);
        assert!((r.min_second_diff_t - 2.0).abs() < 1e-9);
        assert!((r.min_second_diff_x - 2.0).abs() < 1e-9);
        assert!((r.min_joint_hessian_eig - 2.0).abs() < 1e-9);
        // slice x ↦ (t₀ + v(x − x₀))² + x²: second derivative 2v² + 2;
        // v = Δt/Δx lands on nodes
        assert!((r.slices[1].min_second_diff - 2.5).abs() < 1e-8);
    }

    #[test]
    fn saddle() {
        let u = GridFunction2D::from_fn(
            uniform_grid(0.0, 1.0, 11),
            uniform_grid(-1.0, 1.0, 11),
            |t, x| t * x,
        )
        .unwrap();
        let r = discrete_convexity_report(&u, &[]);
        assert!(r.min_second_diff_t.abs() < 1e-12);
        assert!(r.min_second_diff_x.abs() < 1e-12);
        assert!((r.min_joint_hessian_eig + 1.0).abs() < 1e-12);
        // along (a, b): 2abΔtΔx / (a²Δt² + b²Δx²)
        let (dt, dx) = (u.dt(), u.dx());
        let expect = LATTICE_DIRECTIONS
            .iter()
            .map(|&(a, b)| {
                let (a, b) = (a as f64 * dt, b as f64 * dx);
                2.0 * a * b / (a * a + b * b)
            })
            .fold(f64::INFINITY, f64::min);
        assert!((r.min_lattice_second_diff - expect).abs() < 1e-12);
    }

    #[test]
    fn max_of_planes_passes_lattice_but_not_stencil_hessian() {
        // C^{1,1} convex function whose Hessian jumps across a slanted line
        let u = GridFunction2D::from_fn(
            uniform_grid(0.0, 1.0, 41),
            uniform_grid(-1.0, 1.0, 41),
            |t, x| {
                let s = (t - 0.5 + 0.37 * x).max(0.0);
                0.5 * s * s + 0.5 * (x - 0.2 * t).max(0.0).powi(2)
            },
        )
        .unwrap();
        let r = discrete_convexity_report(&u, &[]);
        assert!(r.min_lattice_second_diff >= -1e-12);
        assert!(r.min_joint_hessian_eig < -1e-3);
    }

    #[test]
    fn node_aligned_slice_is_exact() {
        // u = t·x; slice second derivative is 2v
        let ts = uniform_grid(0.0, 1.0, 41);
        let xs = uniform_grid(-1.0, 1.0, 21);
        let u = GridFunction2D::from_fn(ts, xs, |t, x| t * x + (t - 0.3).powi(4)).unwrap();
        let v = 2.0 * u.dt() / u.dx();
        let r = discrete_convexity_report(&u, &[v]);
        assert!(r.slices[0].nodes > 0);
        // the quartic term contributes a positive amount
        assert!(r.slices[0].min_second_diff >= 2.0 * v - 1e-9);
    }
}
