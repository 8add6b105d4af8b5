//! Seeded random matrix samplers.
//!
//! Every draw is a pure function of `(seed, stream name, index)`, so suites
//! can fan out over threads without changing their results.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::angles::{
    in_singular_class, lifted_angle, spacetime_angle, spacetime_angle_schur, SINGULAR_CLASS_TOL,
};
use crate::error::{DslError, Result};
use crate::linalg::{SpaceTimeMatrix, SymMatrix};
use crate::subequations::DslBranch;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Gaussian,
    BlockDiagonal,
    RankOneCoupled,
    NearSingularClass,
}

impl Family {
    pub const ALL: [Family; 4] = [
        Family::Gaussian,
        Family::BlockDiagonal,
        Family::RankOneCoupled,
        Family::NearSingularClass,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Gaussian => "gaussian",
            Family::BlockDiagonal => "block-diagonal",
            Family::RankOneCoupled => "rank-one-coupled",
            Family::NearSingularClass => "near-singular-class",
        }
    }

    /// Family used for the `index`-th draw of a mixed stream.
    pub fn mixed(index: u64) -> Family {
        Family::ALL[(index % 4) as usize]
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = DslError;
    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| DslError::InvalidInput(format!("unknown family {s:?}")))
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01B3)
    })
}

/// Per-sample generator keyed by `(seed, stream, index)`.
pub fn stream_rng(seed: u64, stream: &str, index: u64) -> ChaCha8Rng {
    let k =
        splitmix64(seed ^ splitmix64(fnv1a(stream)) ^ splitmix64(index.wrapping_add(0x5851_F42D)));
    ChaCha8Rng::seed_from_u64(k)
}

pub fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

fn signed_log_uniform<R: Rng + ?Sized>(rng: &mut R, lo_exp: f64, hi_exp: f64) -> f64 {
    let mag = 10f64.powf(rng.random_range(lo_exp..hi_exp));
    if rng.random::<bool>() {
        mag
    } else {
        -mag
    }
}

fn gaussian_sym<R: Rng + ?Sized>(n: usize, rng: &mut R) -> SymMatrix {
    SymMatrix::from_upper_fn(n, |_, _| normal(rng))
}

/// Random symmetric `n×n` matrix. Only the gaussian family is meaningful for
/// `Sym²(ℝⁿ)`; the structured families fall back to their `A⁺` block.
pub fn sample_sym<R: Rng + ?Sized>(n: usize, rng: &mut R, family: Family) -> SymMatrix {
    match family {
        Family::Gaussian => gaussian_sym(n, rng),
        _ => sample_spacetime(n, rng, family).a_plus,
    }
}

/// Random `(n+1)×(n+1)` space-time matrix from the requested family.
///
/// * `gaussian`: independent standard normal upper-triangle entries;
/// * `block-diagonal`: `diag(a₀₀, A⁺)` with `a = 0` exactly;
/// * `rank-one-coupled`: `diag(g, B) + σ·vvᵀ`;
/// * `near-singular-class`: `a₀₀` and each `aᵢ` of magnitude
///   `10^U(−10,−6)` with random signs, `A⁺` gaussian.
pub fn sample_spacetime<R: Rng + ?Sized>(n: usize, rng: &mut R, family: Family) -> SpaceTimeMatrix {
    match family {
        Family::Gaussian => {
            SpaceTimeMatrix::from_sym(&gaussian_sym(n + 1, rng)).expect("order n + 1 >= 2")
        }
        Family::BlockDiagonal => {
            let a00 = normal(rng);
            SpaceTimeMatrix::block_diag(a00, gaussian_sym(n, rng))
        }
        Family::RankOneCoupled => {
            let g: Vec<f64> = (0..=n).map(|_| normal(rng)).collect();
            let v: Vec<f64> = (0..=n).map(|_| normal(rng)).collect();
            let sigma = signed_log_uniform(rng, -1.0, 0.5);
            let base = SymMatrix::from_diag(&g);
            let full = SymMatrix::from_upper_fn(n + 1, |i, j| base.get(i, j) + sigma * v[i] * v[j]);
            SpaceTimeMatrix::from_sym(&full).expect("order n + 1 >= 2")
        }
        Family::NearSingularClass => {
            let a00 = signed_log_uniform(rng, -10.0, -6.0);
            let a_vec = (0..n)
                .map(|_| signed_log_uniform(rng, -10.0, -6.0))
                .collect();
            SpaceTimeMatrix {
                a00,
                a_vec,
                a_plus: gaussian_sym(n, rng),
            }
        }
    }
}

/// Random orthogonal `n×n` matrix (row-major) by Gram–Schmidt on a
/// gaussian matrix.
pub fn sample_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v: Vec<f64> = (0..n).map(|_| normal(rng)).collect();
        for _ in 0..2 {
            for c in &cols {
                let d: f64 = v.iter().zip(c).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(c).for_each(|(a, b)| *a -= d * b);
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            cols.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    let mut q = vec![0.0; n * n];
    for (j, c) in cols.iter().enumerate() {
        for i in 0..n {
            q[i * n + j] = c[i];
        }
    }
    q
}

pub fn sample_vector<R: Rng + ?Sized>(n: usize, rng: &mut R, scale: f64) -> Vec<f64> {
    (0..n).map(|_| scale * normal(rng)).collect()
}

const BISECTION_STEPS: usize = 48;
const MAX_DOUBLINGS: usize = 200;
const MAX_REDRAWS: usize = 64;

fn schur_theta(a: &SpaceTimeMatrix) -> Result<f64> {
    if in_singular_class(a, SINGULAR_CLASS_TOL) {
        Ok(lifted_angle(&a.a_plus).radians + std::f64::consts::FRAC_PI_2)
    } else {
        spacetime_angle_schur(a).map(|v| v.radians)
    }
}

/// Smallest `s` (to bisection accuracy) with `theta(s) ≥ target`, for a
/// nondecreasing `theta`.
fn shift_to<F: Fn(f64) -> Result<f64>>(theta: F, target: f64) -> Result<f64> {
    let mut hi = 1.0;
    let mut doublings = 0;
    while theta(hi)? < target {
        hi *= 2.0;
        doublings += 1;
        if doublings > MAX_DOUBLINGS {
            return Err(DslError::BisectionFailure { doublings });
        }
    }
    let mut lo = -1.0;
    doublings = 0;
    while theta(lo)? >= target {
        lo *= 2.0;
        doublings += 1;
        if doublings > MAX_DOUBLINGS {
            return Err(DslError::BisectionFailure { doublings });
        }
    }
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if theta(mid)? >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// `A₀ + s·I` with `A₀` from a random non-singular family and `s` the
/// bisected shift at which `Θ̃` first reaches `target`. The value can
/// overshoot when the shift crosses 𝒮.
pub fn sample_near_angle<R: Rng + ?Sized>(
    n: usize,
    target: f64,
    rng: &mut R,
) -> Result<SpaceTimeMatrix> {
    let family = Family::ALL[rng.random_range(0..3)];
    let a0 = sample_spacetime(n, rng, family);
    let s = shift_to(|s| schur_theta(&a0.shifted(s)), target)?;
    Ok(a0.shifted(s))
}

/// Gaussian `B₀ + s·I` with `θ̃(B) = target` up to bisection accuracy.
/// `target` must lie in `(−nπ/2, nπ/2)`.
pub fn sample_sym_with_angle<R: Rng + ?Sized>(
    n: usize,
    target: f64,
    rng: &mut R,
) -> Result<SymMatrix> {
    let b0 = gaussian_sym(n, rng);
    let s = shift_to(|s| Ok(lifted_angle(&b0.shifted(s)).radians), target)?;
    Ok(b0.shifted(s))
}

/// Random member of `𝓕_c` with `Θ̃(A) ∈ [c, c + 0.5]`.
///
/// Draws `A₀` from a mixed family and a target in `[c, c + 0.5]`, then
/// bisects on the monotone map `s ↦ Θ̃(A₀ + s·I)` using the Schur route.
/// The result is accepted on the cross-checked value; a draw whose
/// bisection lands on a jump across 𝒮 above the target window is redrawn.
pub fn sample_in_branch<R: Rng + ?Sized>(
    branch: &DslBranch,
    rng: &mut R,
) -> Result<SpaceTimeMatrix> {
    let n = branch.n();
    let c = branch.c();
    let top = (n as f64 + 1.0) * std::f64::consts::FRAC_PI_2;
    let window = 0.5_f64.min(0.5 * (top - c));
    for _ in 0..MAX_REDRAWS {
        let target = c + window * rng.random_range(0.05..0.95);
        let a = sample_near_angle(n, target, rng)?;
        let value = spacetime_angle(&a)?;
        if value.radians >= c && value.radians <= c + 0.5 && !value.near_singular {
            return Ok(a);
        }
    }
    Err(DslError::BisectionFailure {
        doublings: MAX_DOUBLINGS,
    })
}
