use super::SymMatrix;

const MAX_SWEEPS: usize = 100;
const OFF_DIAG_REL_TOL: f64 = 1e-14;

/// Eigenvalues of a real symmetric matrix, sorted descending.
///
/// Cyclic Jacobi: sweeps over all `(p, q)` pairs annihilating `a[p][q]`
/// with a plane rotation until the off-diagonal Frobenius norm drops
/// below `1e-14·‖A‖_F`. Converges for every symmetric input.
pub fn eig_sym(a: &SymMatrix) -> Vec<f64> {
    let n = a.n();
    let mut m: Vec<f64> = a.rows().into_iter().flatten().collect();
    let scale = a.norm();
    if scale == 0.0 {
        return vec![0.0; n];
    }
    let threshold = OFF_DIAG_REL_TOL * scale;

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i * n + j] * m[i * n + j])
            .sum::<f64>()
            .sqrt();
        if off <= threshold {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..n {
                    let akp = m[k * n + p];
                    let akq = m[k * n + q];
                    m[k * n + p] = c * akp - s * akq;
                    m[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = m[p * n + k];
                    let aqk = m[q * n + k];
                    m[p * n + k] = c * apk - s * aqk;
                    m[q * n + k] = s * apk + c * aqk;
                }
                m[p * n + q] = 0.0;
                m[q * n + p] = 0.0;
            }
        }
    }

    let mut eig: Vec<f64> = (0..n).map(|i| m[i * n + i]).collect();
    eig.sort_by(|a, b| b.total_cmp(a));
    eig
}
