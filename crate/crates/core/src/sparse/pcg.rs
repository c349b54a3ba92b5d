//! Preconditioned conjugate gradients for SPD systems.

use super::{dot, norm2, SparseSpd};

/// Convergence record of one PCG run.
#[derive(Debug, Clone, PartialEq)]
pub struct PcgReport {
    /// Number of A-applications after the initial residual.
    pub iterations: usize,
    /// Relative residual `‖r_k‖₂ / ‖b‖₂` after each iteration.
    pub residual_history: Vec<f64>,
    pub converged: bool,
}

impl PcgReport {
    pub fn final_residual(&self) -> f64 {
        self.residual_history.last().copied().unwrap_or(0.0)
    }
}

/// Classical Hestenes–Stiefel PCG with zero initial guess and one
/// preconditioner application per iteration.
///
/// Stops when `‖r_k‖₂ / ‖b‖₂ < tol`; exceeding `max_iter` yields a
/// non-converged report, not an error.
pub fn pcg<M>(
    a: &SparseSpd,
    b: &[f64],
    apply_preconditioner: M,
    tol: f64,
    max_iter: usize,
) -> (Vec<f64>, PcgReport)
where
    M: Fn(&[f64]) -> Vec<f64>,
{
    let n = a.dim;
    assert_eq!(b.len(), n);
    let b_norm = norm2(b);
    let mut x = vec![0.0; n];
    if b_norm == 0.0 {
        return (x, PcgReport { iterations: 0, residual_history: Vec::new(), converged: true });
    }
    let mut r = b.to_vec();
    let mut z = apply_preconditioner(&r);
    let mut p = z.clone();
    let mut rho = dot(&r, &z);
    let mut q = vec![0.0; n];
    let mut history = Vec::new();
    for it in 1..=max_iter {
        a.mul_vec(&p, &mut q);
        let alpha = rho / dot(&p, &q);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        let rel = norm2(&r) / b_norm;
        history.push(rel);
        if rel < tol {
            return (x, PcgReport { iterations: it, residual_history: history, converged: true });
        }
        z = apply_preconditioner(&r);
        let rho_new = dot(&r, &z);
        let beta = rho_new / rho;
        rho = rho_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    (x, PcgReport { iterations: max_iter, residual_history: history, converged: false })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::{chol::factorize, tridiag};

    #[test]
    fn exact_preconditioner_one_iteration() {
        let a = tridiag(40);
        let f = factorize(&a).unwrap();
        let b: Vec<f64> = (0..40).map(|i| (i as f64 * 0.7).sin()).collect();
        let (x, rep) = pcg(&a, &b, |r| f.solve(r), 1e-6, 100);
        assert!(rep.converged);
        assert_eq!(rep.iterations, 1);
        let res = a.mul_vec_alloc(&x).iter().zip(&b).map(|(y, bi)| (y - bi).abs()).fold(0.0f64, f64::max);
        assert!(res < 1e-9);
    }

    #[test]
    fn zero_rhs() {
        let a = tridiag(10);
        let (x, rep) = pcg(&a, &vec![0.0; 10], |r| r.to_vec(), 1e-6, 100);
        assert!(rep.converged);
        assert_eq!(rep.iterations, 0);
        assert!(x.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn matches_dense_reference_iteration_count() {
        // Dense-arithmetic reference PCG run side by side.
        let n = 100;
        let a = tridiag(n);
        let dense = a.to_dense();
        let b = vec![1.0; n];

        let dense_count = {
            let mut x = vec![0.0; n];
            let mut r = b.clone();
            let mut p = r.clone();
            let mut rho: f64 = r.iter().map(|v| v * v).sum();
            let bn = (n as f64).sqrt();
            let mut count = 0;
            for it in 1..=1000 {
                let q: Vec<f64> = (0..n)
                    .map(|i| (0..n).map(|j| dense[i][j] * p[j]).sum::<f64>())
                    .collect();
                let alpha = rho / p.iter().zip(&q).map(|(pi, qi)| pi * qi).sum::<f64>();
                for i in 0..n {
                    x[i] += alpha * p[i];
                    r[i] -= alpha * q[i];
                }
                let rel = r.iter().map(|v| v * v).sum::<f64>().sqrt() / bn;
                if rel < 1e-6 {
                    count = it;
                    break;
                }
                let rho_new: f64 = r.iter().map(|v| v * v).sum();
                let beta = rho_new / rho;
                rho = rho_new;
                for i in 0..n {
                    p[i] = r[i] + beta * p[i];
                }
            }
            count
        };

        let (_, rep) = pcg(&a, &b, |r| r.to_vec(), 1e-6, 1000);
        assert!(rep.converged);
        assert_eq!(rep.iterations, dense_count);
    }

    #[test]
    fn non_convergence_is_reported() {
        let a = tridiag(200);
        let b = vec![1.0; 200];
        let (_, rep) = pcg(&a, &b, |r| r.to_vec(), 1e-12, 3);
        assert!(!rep.converged);
        assert_eq!(rep.iterations, 3);
        assert_eq!(rep.residual_history.len(), 3);
    }
}
