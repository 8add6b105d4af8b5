use std::f64::consts::FRAC_PI_2;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::sampling::{
    normal, sample_in_branch, sample_near_angle, sample_orthogonal, sample_spacetime,
    sample_sym_with_angle, sample_vector, Family,
};
use super::{Case, Check, Outcome, SuiteName, SuiteSpec};
use crate::angles::{lifted_angle, spacetime_angle, NEAR_SINGULAR_BAND};
use crate::envelope::{
    rooftop_envelope, solve_dsl_dirichlet, verify_dsl_solution, BoundaryData, DslDirichletProblem,
    DslVerification, RooftopProblem,
};
use crate::error::Result;
use crate::linalg::{eig_sym, SpaceTimeMatrix, SymMatrix};
use crate::subequations::{
    eigenvalue_consequences, in_fcal, in_star_product, time_slot_sign, DslBranch, StarSearch,
};
use crate::transforms::{
    legendre_down, legendre_up, pullback_slice, shear_conjugate, tau_grid, time_lipschitz,
    uniform_grid, GridFunction1D, GridFunction2D,
};

/// Grids for the refinement suites: `Δx` and `Δx/2`.
pub(crate) const REFINE_GRIDS: [usize; 2] = [129, 257];
const RECOVERY_GRID: usize = 129;
const LEGENDRE_GRIDS: [usize; 2] = [33, 65];
const STAR_BAND: f64 = 1e-6;

pub(crate) fn cases(spec: &SuiteSpec) -> Vec<Case> {
    let per_dim = |variants: &[&str]| -> Vec<Case> {
        spec.dims
            .iter()
            .flat_map(|&n| {
                variants.iter().enumerate().map(move |(variant, v)| Case {
                    label: format!("n={n}/{v}"),
                    n,
                    variant,
                })
            })
            .collect()
    };
    match spec.name {
        SuiteName::RotationInvariance
        | SuiteName::ShearInvariance
        | SuiteName::EigenvalueLemma
        | SuiteName::UscAtS => per_dim(&["all"]),
        SuiteName::AffineSliceBound | SuiteName::TimeSlotSign | SuiteName::StarProduct => {
            per_dim(&["second", "top"])
        }
        SuiteName::LegendreInvolution => LEGENDRE_GRIDS
            .iter()
            .map(|&nt| Case {
                label: format!("nt={nt}"),
                n: nt,
                variant: 0,
            })
            .collect(),
        SuiteName::RooftopProps
        | SuiteName::SolveAndVerify
        | SuiteName::MinPrinciple
        | SuiteName::JointConvexity => vec![Case {
            label: "n=1".into(),
            n: 1,
            variant: 0,
        }],
    }
}

pub(crate) fn run_sample(
    spec: &SuiteSpec,
    case: &Case,
    rng: &mut ChaCha8Rng,
    locator: &str,
) -> Outcome {
    let tol = spec.tol();
    let r = match spec.name {
        SuiteName::RotationInvariance => rotation(case, rng, locator, tol),
        SuiteName::ShearInvariance => shear(case, rng, locator, tol),
        SuiteName::AffineSliceBound => slice_bound(case, rng, locator, tol),
        SuiteName::EigenvalueLemma => eigen_lemma(case, rng, locator, tol),
        SuiteName::TimeSlotSign => time_slot(case, rng, locator, tol),
        SuiteName::StarProduct => star(case, rng, locator, tol),
        SuiteName::UscAtS => usc(case, rng, locator, tol),
        SuiteName::LegendreInvolution => legendre(case, rng, locator, tol),
        SuiteName::RooftopProps => rooftop(rng, locator, tol),
        SuiteName::SolveAndVerify => solve_quadratic(rng, locator, tol),
        SuiteName::MinPrinciple => refinement(rng, locator, tol, false),
        SuiteName::JointConvexity => refinement(rng, locator, tol, true),
    };
    r.unwrap_or_else(|e| Outcome::Failed {
        digest: locator.to_string(),
        error: e.to_string(),
    })
}

fn digest(locator: &str, values: &[f64]) -> String {
    let h = values.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, v| {
        v.to_bits().to_le_bytes().iter().fold(h, |h, &b| {
            (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01B3)
        })
    });
    format!("{locator}:{h:016x}")
}

fn st_values(a: &SpaceTimeMatrix) -> Vec<f64> {
    a.to_sym().rows().into_iter().flatten().collect()
}

fn near_singular(a: &SpaceTimeMatrix) -> bool {
    a.a00.abs().max(a.a_vec_inf_norm()) < NEAR_SINGULAR_BAND
}

fn checked(digest: String, checks: Vec<Check>) -> Result<Outcome> {
    Ok(Outcome::Checked { digest, checks })
}

/// `diag(1, Q)ᵀ A diag(1, Q)` for row-major orthogonal `q`.
fn rotate_space(a: &SpaceTimeMatrix, q: &[f64]) -> SpaceTimeMatrix {
    let n = a.n();
    SpaceTimeMatrix {
        a00: a.a00,
        a_vec: (0..n)
            .map(|i| (0..n).map(|k| q[k * n + i] * a.a_vec[k]).sum())
            .collect(),
        a_plus: a.a_plus.congruence(q),
    }
}

fn rotation(case: &Case, rng: &mut ChaCha8Rng, loc: &str, tol: f64) -> Result<Outcome> {
    let family = Family::ALL[rng.random_range(0..4)];
    let a = sample_spacetime(case.n, rng, family);
    let q = sample_orthogonal(case.n, rng);
    let b = rotate_space(&a, &q);
    if near_singular(&a) || near_singular(&b) {
        return Ok(Outcome::NearSingular);
    }
    let d = (spacetime_angle(&a)?.radians - spacetime_angle(&b)?.radians).abs();
    let ds = (lifted_angle(&a.a_plus).radians - lifted_angle(&b.a_plus).radians).abs();
    checked(
        digest(loc, &st_values(&a)),
        vec![
            Check::new("|Θ̃(A) − Θ̃(RᵀAR)|", d, tol),
            Check::new("|θ̃(A⁺) − θ̃(QᵀA⁺Q)|", ds, tol),
        ],
    )
}

fn shear(case: &Case, rng: &mut ChaCha8Rng, loc: &str, tol: f64) -> Result<Outcome> {
    let family = Family::ALL[rng.random_range(0..4)];
    let a = sample_spacetime(case.n, rng, family);
    let v = sample_vector(case.n, rng, 1.0);
    let b = shear_conjugate(&a, &v);
    if near_singular(&a) || near_singular(&b) {
        return Ok(Outcome::NearSingular);
    }
    let d = (spacetime_angle(&a)?.radians - spacetime_angle(&b)?.radians).abs();
    checked(
        digest(loc, &st_values(&a)),
        vec![Check::new("|Θ̃(A) − Θ̃(A_V)|", d, tol)],
    )
}

fn slice_bound(case: &Case, rng: &mut ChaCha8Rng, loc: &str, tol: f64) -> Result<Outcome> {
    let n = case.n;
    let c = (n as f64 - 1.0 + case.variant as f64) * FRAC_PI_2;
    let a = sample_in_branch(&DslBranch::new(n, c)?, rng)?;
    let scale = 10f64.powf(rng.random_range(-1.0..1.0));
    let v = sample_vector(n, rng, scale);
    let theta = spacetime_angle(&a)?.radians;
    let slice = lifted_angle(&pullback_slice(&a, &v)).radians;
    checked(
        digest(loc, &st_values(&a)),
        vec![
            Check::new("c − π/2 − θ̃(ℓ_V*A)", c - FRAC_PI_2 - slice, tol),
            Check::new("Θ̃(A) − π/2 − θ̃(ℓ_V*A)", theta - FRAC_PI_2 - slice, tol),
        ],
    )
}

fn eigen_lemma(case: &Case, rng: &mut ChaCha8Rng, loc: &str, tol: f64) -> Result<Outcome> {
    let n = case.n;
    let nf = n as f64;
    let lo = ((nf - 2.0) * FRAC_PI_2).max(-nf * FRAC_PI_2 + 1e-3);
    let hi = nf * FRAC_PI_2 - 1e-3;
    let b = sample_sym_with_angle(n, rng.random_range(lo..hi), rng)?;
    let theta = lifted_angle(&b).radians;
    let lam = eig_sym(&b);
    let scale = 1.0 + b.max_abs();
    let mut checks = Vec::new();
    if theta >= (nf - 1.0) * FRAC_PI_2 {
        checks.push(Check::new("−λₙ/(1+‖B‖)", -lam[n - 1] / scale, tol));
    }
    if n >= 2 && theta >= (nf - 2.0) * FRAC_PI_2 {
        checks.push(Check::new(
            "(|λₙ| − λₙ₋₁)/(1+‖B‖)",
            (lam[n - 1].abs() - lam[n - 2]) / scale,
            tol,
        ));
    }
    let e = eigenvalue_consequences(&b);
    checks.push(Check::holds(
        "eigenvalue_consequences",
        e.top_branch_psd_ok && e.second_branch_dominance_ok,
    ));
    checked(digest(loc, &b.rows().concat()), checks)
}

fn tier_phase(n: usize, variant: usize, rng: &mut ChaCha8Rng) -> f64 {
    let lo = (n as f64 - 1.0 + variant as f64) * FRAC_PI_2;
    let hi = lo + FRAC_PI_2 - if variant == 1 { 0.05 } else { 0.0 };
    rng.random_range(lo..hi)
}

fn time_slot(case: &Case, rng: &mut ChaCha8Rng, loc: &str, tol: f64) -> Result<Outcome> {
    let b = DslBranch::new(case.n, tier_phase(case.n, case.variant, rng))?;
    let a = sample_in_branch(&b, rng)?;
    time_slot_sign(&a, &b)?;
    let mut checks = vec![Check::new("−a₀₀", -a.a00, tol)];
    if a.a_vec_inf_norm() > 1e-6 {
        checks.push(Check::new("−a₀₀ given a ≠ 0", -a.a00, -tol));
    }
    checked(digest(loc, &st_values(&a)), checks)
}

fn star(case: &Case, rng: &mut ChaCha8Rng, loc: &str, tol: f64) -> Result<Outcome> {
    let n = case.n;
    let shift = if rng.random::<bool>() { 0.3 } else { 0.0 };
    let c = (n as f64 - 1.0 + case.variant as f64) * FRAC_PI_2 + shift;
    let b = DslBranch::new(n, c)?;
    let a = sample_near_angle(n, c + rng.random_range(-0.6..0.6), rng)?;
    if near_singular(&a) {
        return Ok(Outcome::NearSingular);
    }
    // both clauses have a tolerance-sensitive boundary: Θ̃ = c and a₀₀ = 0
    if (spacetime_angle(&a)?.radians - c).abs() < STAR_BAND || a.a00.abs() < STAR_BAND {
        return Ok(Outcome::Boundary);
    }
    let search = StarSearch {
        tol,
        ..StarSearch::default()
    };
    let direct = in_fcal(&a, &b, tol)?;
    let star = in_star_product(&a, &b, &search, rng)?;
    checked(
        digest(loc, &st_values(&a)),
        vec![Check::holds(
            "in_Fcal == in_star_product",
            direct == star.member,
        )],
    )
}

fn usc(case: &Case, rng: &mut ChaCha8Rng, loc: &str, tol: f64) -> Result<Outcome> {
    let n = case.n;
    let ap = SymMatrix::from_upper_fn(n, |_, _| normal(rng));
    let base = lifted_angle(&ap).radians;
    let eps = 1e-7;
    let up = spacetime_angle(&SpaceTimeMatrix::block_diag(eps, ap.clone()))?.radians;
    let down = spacetime_angle(&SpaceTimeMatrix::block_diag(-eps, ap.clone()))?.radians;
    let at = spacetime_angle(&SpaceTimeMatrix::block_diag(0.0, ap.clone()))?.radians;
    checked(
        digest(loc, &ap.rows().concat()),
        vec![
            Check::new(
                "|Θ̃(diag(ε, A⁺)) − θ̃ − π/2|",
                (up - base - FRAC_PI_2).abs(),
                tol,
            ),
            Check::new(
                "|Θ̃(diag(−ε, A⁺)) − θ̃ + π/2|",
                (down - base + FRAC_PI_2).abs(),
                tol,
            ),
            Check::new(
                "|Θ̃(diag(0, A⁺)) − θ̃ − π/2|",
                (at - base - FRAC_PI_2).abs(),
                tol,
            ),
        ],
    )
}

fn legendre(case: &Case, rng: &mut ChaCha8Rng, loc: &str, factor: f64) -> Result<Outcome> {
    let nt = case.n;
    let mut p = [0.0; 14];
    for (k, v) in p.iter_mut().enumerate() {
        *v = match k % 4 {
            0 | 2 => rng.random_range(0.0..1.5),
            _ => rng.random_range(-0.2..1.2),
        };
    }
    let (e, f, g) = (normal(rng), normal(rng), normal(rng));
    let u = GridFunction2D::from_fn(
        uniform_grid(0.0, 1.0, nt),
        uniform_grid(-1.0, 1.0, 9),
        |t, x| {
            let mut s = e * x.sin() * t + f * x * x + g * t;
            for k in 0..3 {
                s +=
                    p[4 * k] * (t - p[4 * k + 1]).powi(2) + p[4 * k + 2] * (t - p[4 * k + 3]).abs();
            }
            s
        },
    )?;
    let lip = time_lipschitz(&u);
    let taus = tau_grid(lip, 4 * nt + 1);
    let dtau = taus[1] - taus[0];
    let back = legendre_up(&legendre_down(&u, &taus)?, &u.ts)?;
    let above = (0..u.values.len())
        .map(|k| back.values[k] - u.values[k])
        .fold(f64::NEG_INFINITY, f64::max);
    checked(
        digest(loc, &p),
        vec![
            Check::new(
                "‖u★★ − u‖∞",
                back.max_abs_diff(&u),
                factor * (u.dt() + dtau) * lip,
            ),
            Check::new("max(u★★ − u)", above, 1e-12),
        ],
    )
}

fn rooftop(rng: &mut ChaCha8Rng, loc: &str, tol: f64) -> Result<Outcome> {
    let nx = rng.random_range(17..=65);
    let xl = rng.random_range(-2.0..0.0);
    let xr = xl + rng.random_range(0.5..3.0);
    let xs = uniform_grid(xl, xr, nx);
    let (amp, freq, quad, kink, mid) = (
        rng.random_range(0.0..1.0),
        rng.random_range(1.0..8.0),
        rng.random_range(-1.0..1.0),
        rng.random_range(-1.0..1.0),
        rng.random_range(xl..xr),
    );
    let noise: Vec<f64> = (0..nx).map(|_| 0.05 * normal(rng)).collect();
    let interior: Vec<f64> = xs[1..nx - 1].to_vec();
    let values: Vec<f64> = interior
        .iter()
        .enumerate()
        .map(|(k, &x)| {
            amp * (freq * x).sin() + quad * x * x + kink * (x - mid).abs() + noise[k + 1]
        })
        .collect();
    let h = GridFunction1D::new(interior, values.clone())?;
    let f = [normal(rng), normal(rng)];
    let a = rng.random_range(-FRAC_PI_2 + 0.05..FRAC_PI_2 - 0.05);
    let p = RooftopProblem::new(xl, xr, h, f, a)?;
    let w = rooftop_envelope(&p);
    let m = a.tan();
    let dx2 = (xs[1] - xs[0]).powi(2);

    let over_h = (1..nx - 1)
        .map(|j| w.values[j] - values[j - 1])
        .fold(f64::NEG_INFINITY, f64::max);
    let over_f = (w.values[0] - f[0]).max(w.values[nx - 1] - f[1]);
    let d = |w: &[f64], j: usize| w[j + 1] - 2.0 * w[j] + w[j - 1] - m * dx2;
    let worst_d = (1..nx - 1)
        .map(|j| d(&w.values, j))
        .fold(f64::INFINITY, f64::min);

    // raising one interior node by 10·tol must break a constraint
    let delta = 10.0 * tol;
    let picks: Vec<usize> = if nx - 2 <= 32 {
        (1..nx - 1).collect()
    } else {
        (0..32).map(|_| rng.random_range(1..nx - 1)).collect()
    };
    let maximal = picks.iter().all(|&j| {
        let mut raised = w.values.clone();
        raised[j] += delta;
        raised[j] > values[j - 1] || d(&raised, j) < -tol
    });
    let mut inputs = values;
    inputs.extend([f[0], f[1], a, xl, xr]);
    checked(
        digest(loc, &inputs),
        vec![
            Check::new("w − h", over_h, tol),
            Check::new("w − f", over_f, tol),
            Check::new("tan(a)Δx² − Δ²w", -worst_d, tol),
            Check::holds("maximal at sampled nodes", maximal),
        ],
    )
}

/// Bisection for `q` with `Θ̃([[η, β], [β, q]]) = c`, `c ∈ (0, π)`.
fn quadratic_for_phase(eta: f64, beta: f64, c: f64) -> Result<f64> {
    let theta = |q: f64| -> Result<f64> {
        Ok(spacetime_angle(&SpaceTimeMatrix::new(
            eta,
            vec![beta],
            SymMatrix::from_diag(&[q]),
        )?)?
        .radians)
    };
    let (mut lo, mut hi) = (-1.0, 1.0);
    while theta(lo)? > c {
        lo *= 2.0;
    }
    while theta(hi)? < c {
        hi *= 2.0;
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if theta(mid)? < c {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn solve_quadratic(rng: &mut ChaCha8Rng, loc: &str, tol: f64) -> Result<Outcome> {
    let c = rng.random_range(0.05..std::f64::consts::PI - 0.05);
    let eta = rng.random_range(0.5..2.0);
    let beta = rng.random_range(-1.0..1.0);
    let q = quadratic_for_phase(eta, beta, c)?;
    let (lt, lx, k) = (normal(rng), normal(rng), normal(rng));
    let u0 = move |t: f64, x: f64| {
        0.5 * eta * t * t + beta * t * x + 0.5 * q * x * x + lt * t + lx * x + k
    };
    let n = RECOVERY_GRID;
    let b = BoundaryData::from_fn(-1.0, 1.0, n, n, u0)?;
    let u = solve_dsl_dirichlet(&DslDirichletProblem::new(c, n, n, None, b.clone())?)?;
    let exact = GridFunction2D::from_fn(u.ts.clone(), u.xs.clone(), u0)?;
    let r = verify_dsl_solution(&u, c, &b);
    checked(
        digest(loc, &[c, eta, beta, q, lt, lx, k]),
        vec![
            Check::new("‖u − u₀‖∞", u.max_abs_diff(&exact), tol),
            Check::new("boundary residual", r.boundary_residual, tol),
            Check::holds("time-convexity certificate", r.certificates.time_convex),
            Check::holds(
                "joint-convexity certificate",
                r.certificates.joint_convex != Some(false),
            ),
            Check::holds("slice certificate", r.certificates.slices != Some(false)),
            // the time minimum inherits the solver's own O(Δτ²) error
            Check::new("min-principle violation", r.violations.min_principle, tol),
        ],
    )
}

/// Smooth non-quadratic data `g(t, x)` with random coefficients.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SmoothData([f64; 9]);

impl SmoothData {
    pub fn draw<R: Rng + ?Sized>(rng: &mut R) -> Self {
        SmoothData([
            rng.random_range(0.2..1.0),
            rng.random_range(0.3..1.5),
            rng.random_range(-0.5..0.5),
            rng.random_range(0.0..1.0),
            rng.random_range(-0.5..0.5),
            rng.random_range(-0.2..0.2),
            rng.random_range(1.0..3.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(0.0..0.3),
        ])
    }

    pub fn eval(&self, t: f64, x: f64) -> f64 {
        let p = &self.0;
        p[0] * (p[1] * x + p[2] * t).cosh()
            + p[3] * t * t
            + p[4] * t * x
            + p[5] * (p[6] * t + p[7] * x).sin()
            + p[8] * x.powi(4)
    }
}

/// Solves on `[0, 1] × [−1, 1]` at each of [`REFINE_GRIDS`] and verifies.
pub(crate) fn solve_at_refinements(
    c: f64,
    g: impl Fn(f64, f64) -> f64 + Copy,
) -> Result<[DslVerification; 2]> {
    let run = |n: usize| -> Result<DslVerification> {
        let b = BoundaryData::from_fn(-1.0, 1.0, n, n, g)?;
        let u = solve_dsl_dirichlet(&DslDirichletProblem::new(c, n, n, None, b.clone())?)?;
        Ok(verify_dsl_solution(&u, c, &b))
    };
    Ok([run(REFINE_GRIDS[0])?, run(REFINE_GRIDS[1])?])
}

/// `fine ≤ coarse / ratio`; zero at both grids passes.
fn shrinks(what: &'static str, coarse: f64, fine: f64, ratio: f64) -> Check {
    Check::new(what, fine, coarse / ratio)
}

fn refinement(rng: &mut ChaCha8Rng, loc: &str, ratio: f64, joint: bool) -> Result<Outcome> {
    let c = if joint {
        rng.random_range(FRAC_PI_2..std::f64::consts::PI - 0.05)
    } else {
        rng.random_range(0.05..std::f64::consts::PI - 0.05)
    };
    let data = SmoothData::draw(rng);
    let [coarse, fine] = solve_at_refinements(c, move |t, x| data.eval(t, x))?;
    let (vc, vf) = (coarse.violations, fine.violations);
    let mut inputs = data.0.to_vec();
    inputs.push(c);
    let checks = if joint {
        vec![
            shrinks(
                "time-convexity violation",
                vc.time_convex,
                vf.time_convex,
                ratio,
            ),
            shrinks(
                "lattice joint-convexity violation",
                vc.joint_convex,
                vf.joint_convex,
                ratio,
            ),
            shrinks(
                "9-point Hessian violation",
                vc.joint_hessian,
                vf.joint_hessian,
                ratio,
            ),
        ]
    } else {
        vec![
            shrinks(
                "min-principle violation",
                vc.min_principle,
                vf.min_principle,
                ratio,
            ),
            shrinks(
                "time-convexity violation",
                vc.time_convex,
                vf.time_convex,
                ratio,
            ),
            shrinks("slice violation", vc.slices, vf.slices, ratio),
        ]
    };
    checked(digest(loc, &inputs), checks)
}
