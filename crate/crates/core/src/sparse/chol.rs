//! Sparse SPD direct solver: reverse Cuthill–McKee ordering followed by an
//! envelope Cholesky factorization.

use super::SparseSpd;
use crate::error::Error;

/// Reverse Cuthill–McKee ordering of a symmetric sparsity pattern.
///
/// Deterministic: BFS from the lowest-index minimum-degree node of each
/// connected component, neighbors visited in increasing-degree order
/// (ties broken by index), and the final order reversed.
pub fn rcm_ordering(a: &SparseSpd) -> Vec<usize> {
    let n = a.dim;
    let degree = |i: usize| a.row_ptr[i + 1] - a.row_ptr[i];
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut queue = std::collections::VecDeque::new();
    let mut nbrs: Vec<usize> = Vec::new();
    loop {
        // lowest-index node of minimum degree among unvisited
        let mut start = None;
        let mut best_deg = usize::MAX;
        for i in 0..n {
            if !visited[i] && degree(i) < best_deg {
                best_deg = degree(i);
                start = Some(i);
            }
        }
        let Some(start) = start else { break };
        visited[start] = true;
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            nbrs.clear();
            for p in a.row_ptr[u]..a.row_ptr[u + 1] {
                let v = a.col_ind[p] as usize;
                if v != u && !visited[v] {
                    visited[v] = true;
                    nbrs.push(v);
                }
            }
            nbrs.sort_unstable_by_key(|&v| (degree(v), v));
            for &v in &nbrs {
                queue.push_back(v);
            }
        }
    }
    order.reverse();
    order
}

/// Envelope (skyline) Cholesky factorization `P A Pᵀ = L Lᵀ` with a
/// fill-reducing permutation `P` from [`rcm_ordering`].
///
/// Factorizations are immutable after construction and safe to share across
/// threads for concurrent solves.
#[derive(Debug, Clone)]
pub struct Factorization {
    dim: usize,
    /// perm[new] = old
    perm: Vec<usize>,
    /// first stored column of each envelope row
    first: Vec<usize>,
    /// offset of each row's envelope in `env`; row i occupies
    /// env[row_start[i] .. row_start[i+1]] for columns first[i]..=i
    row_start: Vec<usize>,
    env: Vec<f64>,
}

impl Factorization {
    /// Factorizes an SPD matrix. A non-positive pivot reports indefiniteness,
    /// which signals an assembly or set-construction bug upstream.
    pub fn new(a: &SparseSpd) -> Result<Self, Error> {
        let n = a.dim;
        let perm = rcm_ordering(a);
        let mut inv_perm = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            inv_perm[old] = new;
        }

        // Envelope: first[i] = min permuted column among row entries <= i.
        let mut first = vec![0usize; n];
        for i in 0..n {
            let old = perm[i];
            let mut lo = i;
            for p in a.row_ptr[old]..a.row_ptr[old + 1] {
                let j = inv_perm[a.col_ind[p] as usize];
                if j < lo {
                    lo = j;
                }
            }
            first[i] = lo;
        }
        let mut row_start = Vec::with_capacity(n + 1);
        row_start.push(0usize);
        for i in 0..n {
            row_start.push(row_start[i] + (i - first[i] + 1));
        }
        let mut env = vec![0.0f64; row_start[n]];

        // Scatter the lower triangle of the permuted matrix into the envelope.
        for i in 0..n {
            let old = perm[i];
            for p in a.row_ptr[old]..a.row_ptr[old + 1] {
                let j = inv_perm[a.col_ind[p] as usize];
                if j <= i {
                    env[row_start[i] + (j - first[i])] = a.values[p];
                }
            }
        }

        // In-place LL^T within the envelope.
        for i in 0..n {
            let fi = first[i];
            for j in fi..i {
                let fj = first[j];
                let lo = fi.max(fj);
                let mut s = env[row_start[i] + (j - fi)];
                if lo < j {
                    let ri = row_start[i] + (lo - fi);
                    let rj = row_start[j] + (lo - fj);
                    let len = j - lo;
                    let (ra, rb) = (&env[ri..ri + len], &env[rj..rj + len]);
                    let mut acc = 0.0;
                    for k in 0..len {
                        acc += ra[k] * rb[k];
                    }
                    s -= acc;
                }
                let d = env[row_start[j] + (j - fj)];
                env[row_start[i] + (j - fi)] = s / d;
            }
            let mut diag = env[row_start[i] + (i - fi)];
            for k in fi..i {
                let l = env[row_start[i] + (k - fi)];
                diag -= l * l;
            }
            if !(diag > 0.0) || !diag.is_finite() {
                return Err(Error::Indefinite { pivot_index: perm[i], pivot: diag });
            }
            env[row_start[i] + (i - fi)] = diag.sqrt();
        }

        Ok(Factorization { dim: n, perm, first, row_start, env })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.dim];
        self.solve_into(b, &mut x);
        x
    }

    /// Solves `A x = b` into a caller-provided buffer.
    pub fn solve_into(&self, b: &[f64], x: &mut [f64]) {
        assert_eq!(b.len(), self.dim);
        assert_eq!(x.len(), self.dim);
        let n = self.dim;
        let mut y = vec![0.0f64; n];
        for i in 0..n {
            y[i] = b[self.perm[i]];
        }
        // forward: L y' = y
        for i in 0..n {
            let fi = self.first[i];
            let base = self.row_start[i];
            let mut s = y[i];
            for k in fi..i {
                s -= self.env[base + (k - fi)] * y[k];
            }
            y[i] = s / self.env[base + (i - fi)];
        }
        // backward: L^T z = y'
        for i in (0..n).rev() {
            let fi = self.first[i];
            let base = self.row_start[i];
            let zi = y[i] / self.env[base + (i - fi)];
            y[i] = zi;
            for k in fi..i {
                y[k] -= self.env[base + (k - fi)] * zi;
            }
        }
        for i in 0..n {
            x[self.perm[i]] = y[i];
        }
    }

    /// Number of stored envelope entries (diagnostic).
    pub fn envelope_len(&self) -> usize {
        self.env.len()
    }
}

/// Convenience wrapper matching the operation naming used elsewhere.
pub fn factorize(a: &SparseSpd) -> Result<Factorization, Error> {
    Factorization::new(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::tridiag;

    #[test]
    fn identity_solve() {
        let f = factorize(&SparseSpd::identity(7)).unwrap();
        let b = vec![1.0, -2.0, 3.0, 0.0, 5.0, -6.0, 7.0];
        assert_eq!(f.solve(&b), b);
    }

    #[test]
    fn laplacian_ones() {
        // tridiag(-1,2,-1) size 5 with b = ones: x_i = i(6-i)/2
        let f = factorize(&tridiag(5)).unwrap();
        let x = f.solve(&[1.0; 5]);
        let expect = [2.5, 4.0, 4.5, 4.0, 2.5];
        for (a, b) in x.iter().zip(expect.iter()) {
            assert!((a - b).abs() < 1e-12, "{x:?}");
        }
    }

    #[test]
    fn rejects_indefinite() {
        let a = SparseSpd::from_triplets(2, &[(0, 0, 1.0), (0, 1, 2.0), (1, 0, 2.0), (1, 1, 1.0)])
            .unwrap();
        match factorize(&a) {
            Err(Error::Indefinite { .. }) => {}
            other => panic!("expected indefiniteness report, got {other:?}"),
        }
    }

    #[test]
    fn roundtrip_random_spd() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let n = 50;
        // dense-generated SPD: B^T B + n I, sparsified band
        let mut dense = vec![vec![0.0f64; n]; n];
        for i in 0..n {
            for j in 0..n {
                if (i as i64 - j as i64).abs() <= 4 {
                    dense[i][j] = rng.gen_range(-1.0..1.0);
                }
            }
        }
        let mut t = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let mut v = 0.0;
                for k in 0..n {
                    v += dense[k][i] * dense[k][j];
                }
                if i == j {
                    v += n as f64;
                }
                if v != 0.0 {
                    t.push((i, j, v));
                }
            }
        }
        let a = SparseSpd::from_triplets(n, &t).unwrap();
        let f = factorize(&a).unwrap();
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b = a.mul_vec_alloc(&x);
        let xs = f.solve(&b);
        let num: f64 = x.iter().zip(&xs).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        let den: f64 = x.iter().map(|a| a * a).sum::<f64>().sqrt();
        assert!(num / den <= 1e-10, "relative error {}", num / den);
    }
}
