use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fockspace::SparseOp;

const TAYLOR_MAX_TERMS: usize = 60;

fn one_norm(m: &DMatrix<C64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Dense matrix exponential by scaling and squaring with a Taylor core.
///
/// The matrix is scaled so its 1-norm is at most 1/2, the series is summed
/// until terms fall below double precision, then squared back.
pub fn dense_expm(m: &DMatrix<C64>) -> DMatrix<C64> {
    let n = m.nrows();
    let norm = one_norm(m);
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let scaled = m * C64::new(0.5f64.powi(squarings), 0.0);
    let mut result = DMatrix::<C64>::identity(n, n);
    let mut term = DMatrix::<C64>::identity(n, n);
    for k in 1..TAYLOR_MAX_TERMS {
        term = &term * &scaled * C64::new(1.0 / k as f64, 0.0);
        result += &term;
        if one_norm(&term) <= f64::EPSILON * 1e-2 * one_norm(&result) {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// `exp(t * op) v` by restarted Arnoldi projection.
///
/// The interval is split into substeps; each substep builds an `m`-dimensional
/// Krylov space, exponentiates the small Hessenberg matrix densely and accepts
/// the step when the a-posteriori residual estimate is below `tol`.
pub fn krylov_expv(op: &SparseOp, t: C64, v: &[C64], m: usize, tol: f64) -> Result<Vec<C64>> {
    let n = v.len();
    let m = m.clamp(1, n);
    let mut w = v.to_vec();
    let beta0 = norm(&w);
    if beta0 == 0.0 || t == C64::new(0.0, 0.0) {
        return Ok(w);
    }
    let anorm = op.norm_one().max(f64::MIN_POSITIVE);
    let total = 1.0;
    let mut done = 0.0;
    // Initial substep keeps |t| * ||A|| * tau modest.
    let mut tau: f64 = (8.0 / (t.norm() * anorm)).min(1.0);
    let mut restarts = 0usize;
    let mut scratch = vec![C64::new(0.0, 0.0); n];
    while done < total {
        tau = tau.min(total - done);
        let beta = norm(&w);
        let mut basis: Vec<Vec<C64>> = vec![w.iter().map(|x| x / beta).collect()];
        let mut h = DMatrix::<C64>::zeros(m + 1, m + 1);
        let mut dim = m;
        let mut breakdown = false;
        for j in 0..m {
            op.apply_into(&basis[j], &mut scratch);
            let mut p = scratch.clone();
            for (i, q) in basis.iter().enumerate().take(j + 1) {
                let hij: C64 = q.iter().zip(&p).map(|(a, b)| a.conj() * b).sum();
                h[(i, j)] = hij;
                for (pk, qk) in p.iter_mut().zip(q) {
                    *pk -= hij * qk;
                }
            }
            let hn = norm(&p);
            if hn < 1e-14 * anorm {
                dim = j + 1;
                breakdown = true;
                break;
            }
            h[(j + 1, j)] = C64::new(hn, 0.0);
            basis.push(p.into_iter().map(|x| x / hn).collect());
        }
        let small = h.view((0, 0), (dim, dim)) * (t * tau);
        let e = dense_expm(&small.into_owned());
        let err = if breakdown {
            0.0
        } else {
            beta * (h[(dim, dim - 1)] * t * tau).norm() * e[(dim - 1, 0)].norm()
        };
        if err > tol * beta && !breakdown {
            tau *= 0.5;
            restarts += 1;
            if restarts > 200 {
                return Err(Error::SeriesNotConverged {
                    terms: m,
                    residual: err,
                });
            }
            continue;
        }
        let coeffs: DVector<C64> = e.column(0).into_owned() * C64::new(beta, 0.0);
        let mut next = vec![C64::new(0.0, 0.0); n];
        for (k, q) in basis.iter().enumerate().take(dim) {
            for (nx, qx) in next.iter_mut().zip(q) {
                *nx += coeffs[k] * qx;
            }
        }
        w = next;
        done += tau;
        if err < 0.1 * tol * beta {
            tau *= 1.5;
        }
    }
    Ok(w)
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fockspace::{lower, raise, Basis};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn exp_of_zero_and_diagonal() {
        let z = DMatrix::<C64>::zeros(3, 3);
        assert!((dense_expm(&z) - DMatrix::identity(3, 3)).norm() < 1e-15);
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![c(0.0, 1.0), c(-2.0, 0.0), c(3.0, -0.5)]));
        let e = dense_expm(&d);
        for i in 0..3 {
            assert!((e[(i, i)] - d[(i, i)].exp()).norm() < 1e-13 * d[(i, i)].exp().norm().max(1.0));
        }
    }

    #[test]
    fn rotation_generator() {
        // exp(-i theta sigma_x)
        let theta = 7.3;
        let m = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -theta), c(0.0, -theta), c(0.0, 0.0)]);
        let e = dense_expm(&m);
        assert!((e[(0, 0)] - c(theta.cos(), 0.0)).norm() < 1e-13);
        assert!((e[(1, 0)] - c(0.0, -theta.sin())).norm() < 1e-13);
    }

    #[test]
    fn krylov_matches_dense() {
        let b = Basis::new(&[6, 6], Some(8)).unwrap();
        let h = raise(&b, 0)
            .unwrap()
            .matmul(&lower(&b, 1).unwrap())
            .unwrap();
        let h = h.add(&h.adjoint()).unwrap();
        let v: Vec<C64> = (0..b.dim()).map(|i| c((i as f64 * 0.37).sin(), (i as f64).cos() * 0.1)).collect();
        let t = c(0.0, -2.7);
        let kry = krylov_expv(&h, t, &v, 12, 1e-12).unwrap();
        let dense = dense_expm(&(h.to_dense() * t)) * DVector::from_column_slice(&v);
        let err: f64 = kry.iter().zip(dense.iter()).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        assert!(err < 1e-10, "err = {err}");
    }
}
