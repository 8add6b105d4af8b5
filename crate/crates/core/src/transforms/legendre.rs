use super::grid::{uniform_grid, GridFunction2D};
use crate::error::Result;

/// `u★(τ, x) = min_i u(tᵢ, x) − tᵢτ` over the discrete time grid.
pub fn legendre_down(u: &GridFunction2D, taus: &[f64]) -> Result<GridFunction2D> {
    let nx = u.nx();
    let mut values = vec![f64::INFINITY; taus.len() * nx];
    for (k, &tau) in taus.iter().enumerate() {
        let out = &mut values[k * nx..(k + 1) * nx];
        for (i, &t) in u.ts.iter().enumerate() {
            for (o, &v) in out.iter_mut().zip(u.row(i)) {
                *o = o.min(v - t * tau);
            }
        }
    }
    GridFunction2D::new(taus.to_vec(), u.xs.clone(), values)
}

/// `v★(t, x) = max_k v(τₖ, x) + tτₖ` over the discrete slope grid.
pub fn legendre_up(v: &GridFunction2D, ts: &[f64]) -> Result<GridFunction2D> {
    let nx = v.nx();
    let mut values = vec![f64::NEG_INFINITY; ts.len() * nx];
    for (i, &t) in ts.iter().enumerate() {
        let out = &mut values[i * nx..(i + 1) * nx];
        for (k, &tau) in v.ts.iter().enumerate() {
            for (o, &w) in out.iter_mut().zip(v.row(k)) {
                *o = o.max(w + t * tau);
            }
        }
    }
    GridFunction2D::new(ts.to_vec(), v.xs.clone(), values)
}

/// Largest `|u(tᵢ₊₁, x) − u(tᵢ, x)| / Δt` over the grid.
pub fn time_lipschitz(u: &GridFunction2D) -> f64 {
    let dt = u.dt();
    let mut l: f64 = 0.0;
    for i in 0..u.nt().saturating_sub(1) {
        for (a, b) in u.row(i).iter().zip(u.row(i + 1)) {
            l = l.max((b - a).abs() / dt);
        }
    }
    l
}

/// `n` slopes spanning `[−L−1, L+1]`.
pub fn tau_grid(lipschitz: f64, n: usize) -> Vec<f64> {
    let r = lipschitz + 1.0;
    uniform_grid(-r, r, n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts(n: usize) -> Vec<f64> {
        uniform_grid(0.0, 1.0, n)
    }

    #[test]
    fn constant_gives_negative_part() {
        let k = 2.5;
        let u = GridFunction2D::from_fn(ts(11), vec![0.0, 1.0], |_, _| k).unwrap();
        let taus = uniform_grid(-2.0, 2.0, 9);
        let d = legendre_down(&u, &taus).unwrap();
        for (kk, &tau) in taus.iter().enumerate() {
            assert_eq!(d.get(kk, 0), k - tau.max(0.0));
        }
    }

    #[test]
    fn linear_in_time() {
        let a = 1.7;
        let u = GridFunction2D::from_fn(ts(21), vec![0.0, 1.0], |t, _| a * t).unwrap();
        let taus = uniform_grid(-3.0, 3.0, 13);
        let d = legendre_down(&u, &taus).unwrap();
        for (k, &tau) in taus.iter().enumerate() {
            assert!((d.get(k, 1) - (a - tau).min(0.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn half_square_transform() {
        // clipped minimiser t* = clamp(τ, 0, 1)
        let u = GridFunction2D::from_fn(ts(201), vec![0.0, 1.0], |t, _| 0.5 * t * t).unwrap();
        let taus = uniform_grid(-1.0, 2.0, 31);
        let d = legendre_down(&u, &taus).unwrap();
        let dt = u.dt();
        for (k, &tau) in taus.iter().enumerate() {
            let exact = if tau < 0.0 {
                0.0
            } else if tau > 1.0 {
                0.5 - tau
            } else {
                -0.5 * tau * tau
            };
            assert!(d.get(k, 0) >= exact - 1e-14);
            assert!(d.get(k, 0) - exact <= dt * dt, "τ = {tau}");
        }
    }

    #[test]
    fn conjugate_pair_up() {
        let taus = uniform_grid(-1.0, 2.0, 301);
        let v =
            GridFunction2D::from_fn(taus.clone(), vec![0.0], |tau, _| -0.5 * tau * tau).unwrap();
        let t = ts(11);
        let u = legendre_up(&v, &t).unwrap();
        let dtau = v.dt();
        for (i, &ti) in t.iter().enumerate() {
            let exact = 0.5 * ti * ti;
            assert!(u.get(i, 0) <= exact + 1e-14);
            assert!(exact - u.get(i, 0) <= dtau * dtau);
        }
    }

    #[test]
    fn single_slope_point() {
        let v = GridFunction2D::from_fn(vec![0.0], vec![0.0, 1.0], |_, _| 3.0).unwrap();
        let u = legendre_up(&v, &ts(5)).unwrap();
        assert!(u.values.iter().all(|&x| x == 3.0));
    }

    #[test]
    fn double_transform_is_below() {
        let u = GridFunction2D::from_fn(ts(33), uniform_grid(-1.0, 1.0, 5), |t, x| {
            (3.0 * t).sin() + x * t
        })
        .unwrap();
        let taus = tau_grid(time_lipschitz(&u), 4 * 33 + 1);
        let back = legendre_up(&legendre_down(&u, &taus).unwrap(), &u.ts).unwrap();
        for (a, b) in back.values.iter().zip(&u.values) {
            assert!(a <= &(b + 1e-14));
        }
    }
}
