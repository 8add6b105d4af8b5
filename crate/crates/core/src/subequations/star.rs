use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::DslBranch;
use crate::angles::lifted_angle;
use crate::error::{DslError, Result};
use crate::linalg::SpaceTimeMatrix;
use crate::transforms::pullback_slice;

/// Budget for the search over slice directions `V`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StarSearch {
    /// Nelder–Mead restarts.
    pub starts: usize,
    /// Random directions sampled in the box before the local search.
    pub box_samples: usize,
    /// Evaluation cap per local search.
    pub local_evals: usize,
    pub tol: f64,
}

impl Default for StarSearch {
    fn default() -> Self {
        StarSearch {
            starts: 8,
            box_samples: 512,
            local_evals: 60,
            tol: super::DEFAULT_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StarMembership {
    pub member: bool,
    /// `a₀₀ ≥ −tol`
    pub p1_ok: bool,
    /// Smallest `θ̃(ℓ_V*A)` found.
    pub inf_estimate: f64,
    /// The `V` attaining `inf_estimate`.
    pub witness: Vec<f64>,
    pub evaluations: usize,
}

struct Tracker<'a> {
    a: &'a SpaceTimeMatrix,
    a_norm: f64,
    cap: f64,
    best: f64,
    witness: Vec<f64>,
    evals: usize,
}

/// Directions with `a₀₀|V|² + 2|a||V|` above this multiple of `1 + ‖A‖`
/// are skipped: rounding in `θ̃(ℓ_V*A)` would exceed about `1e−9` there.
const MAGNITUDE_CAP: f64 = 1e7;

impl Tracker<'_> {
    fn eval(&mut self, v: &[f64]) -> f64 {
        self.evals += 1;
        if !v.iter().all(|x| x.is_finite()) {
            return f64::INFINITY;
        }
        let r = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if self.a.a00.max(0.0) * r * r + 2.0 * self.a_norm * r > self.cap {
            return f64::INFINITY;
        }
        let theta = lifted_angle(&pullback_slice(self.a, v)).radians;
        if theta < self.best {
            self.best = theta;
            self.witness = v.to_vec();
        }
        theta
    }
}

fn unit_direction<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Membership in `𝒫₁ ⋆ F_{c−π/2}`: `a₀₀ ≥ −tol` and
/// `inf_V θ̃(ℓ_V*A) ≥ c − π/2 − tol`.
///
/// The infimum is estimated from below-biased candidates: `V = 0`, the
/// critical point `−a/a₀₀` when `a₀₀ > 0`, the ray `V = −s·a` (where the
/// infimum escapes to infinity when `a₀₀ = 0`), log-radius samples in the
/// box of radius `(1 + ‖A‖)/max(a₀₀, tol)`, and Nelder–Mead from the best
/// candidates. Directions where `ℓ_V*A` is too large to evaluate
/// accurately are skipped. A `false` answer comes with a witness and is exact; `true`
/// means the search found nothing below the threshold.
pub fn in_star_product<R: Rng + ?Sized>(
    a: &SpaceTimeMatrix,
    b: &DslBranch,
    search: &StarSearch,
    rng: &mut R,
) -> Result<StarMembership> {
    if !b.is_top_two() {
        return Err(DslError::HypothesisViolation(format!(
            "branch c = {} is below the top two branches",
            b.c()
        )));
    }
    super::check_dim(b.n(), a.n())?;
    let n = a.n();
    let tol = search.tol;
    let threshold = b.slice_phase() - tol;

    let a_norm = a.a_vec.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut tr = Tracker {
        a,
        a_norm,
        cap: MAGNITUDE_CAP * (1.0 + a.norm()),
        best: f64::INFINITY,
        witness: vec![0.0; n],
        evals: 0,
    };
    let done = |tr: &Tracker, p1_ok: bool| StarMembership {
        member: p1_ok && tr.best >= threshold,
        p1_ok,
        inf_estimate: tr.best,
        witness: tr.witness.clone(),
        evaluations: tr.evals,
    };

    tr.eval(&vec![0.0; n]);
    if a.a00 < -tol {
        return Ok(done(&tr, false));
    }

    if a.a00 > 0.0 {
        let v: Vec<f64> = a.a_vec.iter().map(|x| -x / a.a00).collect();
        tr.eval(&v);
    }
    if a_norm > 0.0 {
        let dir: Vec<f64> = a.a_vec.iter().map(|x| -x / a_norm).collect();
        for k in -3..=8 {
            let s = 10f64.powi(k);
            tr.eval(&dir.iter().map(|d| s * d).collect::<Vec<_>>());
        }
    }
    if tr.best < threshold {
        return Ok(done(&tr, true));
    }

    let radius = (1.0 + a.norm()) / a.a00.max(tol);
    let log_hi = radius.log10().max(0.0);
    let log_lo = -3.0;
    let mut pool: Vec<(f64, Vec<f64>)> = Vec::with_capacity(search.box_samples);
    for _ in 0..search.box_samples {
        let r = 10f64.powf(rng.random_range(log_lo..=log_hi));
        let v: Vec<f64> = unit_direction(n, rng).into_iter().map(|u| r * u).collect();
        let f = tr.eval(&v);
        pool.push((f, v));
    }
    if tr.best < threshold {
        return Ok(done(&tr, true));
    }

    pool.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut starts: Vec<Vec<f64>> = vec![tr.witness.clone()];
    starts.extend(pool.into_iter().map(|(_, v)| v));
    for x0 in starts.into_iter().take(search.starts) {
        nelder_mead(&mut tr, &x0, search.local_evals);
        if tr.best < threshold {
            break;
        }
    }
    Ok(done(&tr, true))
}

fn nelder_mead(tr: &mut Tracker, x0: &[f64], max_evals: usize) {
    let n = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let f0 = tr.eval(x0);
    simplex.push((x0.to_vec(), f0));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += 0.1 * (1.0 + x0[i].abs());
        let f = tr.eval(&x);
        simplex.push((x, f));
    }
    let mut used = n + 1;
    let point = |c: &[f64], w: &[f64], t: f64| -> Vec<f64> {
        c.iter().zip(w).map(|(ci, wi)| ci + t * (wi - ci)).collect()
    };

    while used < max_evals {
        simplex.sort_by(|p, q| p.1.total_cmp(&q.1));
        let worst = simplex[n].clone();
        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for k in 0..n {
                centroid[k] += x[k] / n as f64;
            }
        }
        let xr = point(&centroid, &worst.0, -1.0);
        let fr = tr.eval(&xr);
        used += 1;
        if fr < simplex[0].1 {
            let xe = point(&centroid, &worst.0, -2.0);
            let fe = tr.eval(&xe);
            used += 1;
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let xc = point(&centroid, &worst.0, 0.5);
            let fc = tr.eval(&xc);
            used += 1;
            if fc < worst.1 {
                simplex[n] = (xc, fc);
            } else {
                let best = simplex[0].0.clone();
                for p in simplex.iter_mut().skip(1) {
                    p.0 = point(&best, &p.0, 0.5);
                    p.1 = tr.eval(&p.0);
                    used += 1;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::sampling::stream_rng;
    use crate::linalg::SymMatrix;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn negative_time_slot_is_rejected_at_once() {
        let a = SpaceTimeMatrix::block_diag(-1.0, SymMatrix::identity(2));
        let b = DslBranch::new(2, PI / 2.0).unwrap();
        let m =
            in_star_product(&a, &b, &StarSearch::default(), &mut stream_rng(0, "t", 0)).unwrap();
        assert!(!m.member && !m.p1_ok);
        assert_eq!(m.evaluations, 1);
    }

    #[test]
    fn boundary_block_diagonal_is_member() {
        // θ̃(A⁺) = c − π/2 exactly, minimum at V = 0
        let n = 2;
        let c = PI / 2.0 + 0.3;
        let q = ((c - PI / 2.0) / n as f64).tan();
        let a = SpaceTimeMatrix::block_diag(1.0, SymMatrix::from_diag(&vec![q; n]));
        let b = DslBranch::new(n, c).unwrap();
        let m =
            in_star_product(&a, &b, &StarSearch::default(), &mut stream_rng(0, "t", 1)).unwrap();
        assert!(m.member);
        assert!((m.inf_estimate - (c - PI / 2.0)).abs() < 1e-12);
    }

    #[test]
    fn example_matrix_is_member() {
        let n = 3;
        let (eps, delta, eta) = (0.05, 0.1, 0.01);
        let th0 = PI / 2.0 - eps / 2.0;
        let th1 = eps + delta - PI / 2.0;
        let a = SpaceTimeMatrix::from_diag(&[eta, th0.tan(), th0.tan(), th1.tan()]);
        let b = DslBranch::new(n, PI + delta).unwrap();
        let m =
            in_star_product(&a, &b, &StarSearch::default(), &mut stream_rng(0, "t", 2)).unwrap();
        assert!(m.member);
    }

    #[test]
    fn critical_point_attains_minimum() {
        let a = SpaceTimeMatrix::new(
            2.0,
            vec![0.5, -1.0],
            SymMatrix::from_rows(&[vec![0.3, 0.1], vec![0.1, 1.2]]).unwrap(),
        )
        .unwrap();
        let theta = crate::angles::spacetime_angle(&a).unwrap().radians;
        // c just above Θ̃ forces a certificate
        let b = DslBranch::new(2, theta + 0.01).unwrap();
        let m =
            in_star_product(&a, &b, &StarSearch::default(), &mut stream_rng(0, "t", 3)).unwrap();
        assert!(!m.member);
        assert!((m.inf_estimate - (theta - FRAC_PI_2)).abs() < 1e-9);
    }

    #[test]
    fn zero_time_slot_uses_ray() {
        // a₀₀ = 0, a = e₁: inf over V is approached at infinity
        let a = SpaceTimeMatrix::new(0.0, vec![1.0], SymMatrix::from_diag(&[0.0])).unwrap();
        let b = DslBranch::new(1, 0.01).unwrap();
        let m =
            in_star_product(&a, &b, &StarSearch::default(), &mut stream_rng(0, "t", 4)).unwrap();
        // Θ̃(A) = 0 < c
        assert!(!m.member);
        assert!(m.inf_estimate < 0.01 - FRAC_PI_2);
    }

    #[test]
    fn inner_branch_is_rejected() {
        let a = SpaceTimeMatrix::block_diag(1.0, SymMatrix::identity(3));
        let b = DslBranch::new(3, 0.0).unwrap();
        assert!(
            in_star_product(&a, &b, &StarSearch::default(), &mut stream_rng(0, "t", 5)).is_err()
        );
    }
}
