//! Symmetric eigensolvers used by spectral clustering.
//!
//! Small problems go through Householder tridiagonalization followed by the
//! implicit QL iteration (the classic EISPACK `tred2`/`tql2` pair). Larger
//! ones use block Lanczos with full reorthogonalization against a matrix-free
//! operator.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::scalar::{dot, Scalar};

/// Eigen-decomposition of a symmetric matrix. Eigenvalues ascend; eigenvector
/// `j` is column `j` of the row-major `n × n` matrix `vectors`.
#[derive(Debug, Clone)]
pub struct SymEigen<T> {
    pub values: Vec<T>,
    pub vectors: Vec<T>,
    pub n: usize,
}

impl<T: Scalar> SymEigen<T> {
    pub fn vector(&self, j: usize) -> Vec<T> {
        (0..self.n).map(|i| self.vectors[i * self.n + j]).collect()
    }
}

/// Full eigen-decomposition of the symmetric row-major `n × n` matrix `a`.
pub fn sym_eigen<T: Scalar>(a: &[T], n: usize) -> Result<SymEigen<T>> {
    assert_eq!(a.len(), n * n);
    let mut v = a.to_vec();
    let mut d = vec![T::zero(); n];
    let mut e = vec![T::zero(); n];
    if n == 0 {
        return Ok(SymEigen {
            values: d,
            vectors: v,
            n,
        });
    }
    tred2(n, &mut v, &mut d, &mut e);
    tql2(n, &mut v, &mut d, &mut e)?;
    Ok(SymEigen {
        values: d,
        vectors: v,
        n,
    })
}

// Householder reduction to tridiagonal form (JAMA/EISPACK tred2), row-major.
fn tred2<T: Scalar>(n: usize, v: &mut [T], d: &mut [T], e: &mut [T]) {
    let ix = |i: usize, j: usize| i * n + j;
    for j in 0..n {
        d[j] = v[ix(n - 1, j)];
    }
    for i in (1..n).rev() {
        let mut scale = T::zero();
        let mut h = T::zero();
        for k in 0..i {
            scale += d[k].abs();
        }
        if scale == T::zero() {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[ix(i - 1, j)];
                v[ix(i, j)] = T::zero();
                v[ix(j, i)] = T::zero();
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > T::zero() {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for j in 0..i {
                e[j] = T::zero();
            }
            for j in 0..i {
                f = d[j];
                v[ix(j, i)] = f;
                g = e[j] + v[ix(j, j)] * f;
                for k in (j + 1)..i {
                    g += v[ix(k, j)] * d[k];
                    e[k] += v[ix(k, j)] * f;
                }
                e[j] = g;
            }
            f = T::zero();
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    let t = f * e[k] + g * d[k];
                    v[ix(k, j)] -= t;
                }
                d[j] = v[ix(i - 1, j)];
                v[ix(i, j)] = T::zero();
            }
        }
        d[i] = h;
    }
    // accumulate transformations
    for i in 0..n - 1 {
        v[ix(n - 1, i)] = v[ix(i, i)];
        v[ix(i, i)] = T::one();
        let h = d[i + 1];
        if h != T::zero() {
            for k in 0..=i {
                d[k] = v[ix(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = T::zero();
                for k in 0..=i {
                    g += v[ix(k, i + 1)] * v[ix(k, j)];
                }
                for k in 0..=i {
                    let t = g * d[k];
                    v[ix(k, j)] -= t;
                }
            }
        }
        for k in 0..=i {
            v[ix(k, i + 1)] = T::zero();
        }
    }
    for j in 0..n {
        d[j] = v[ix(n - 1, j)];
        v[ix(n - 1, j)] = T::zero();
    }
    v[ix(n - 1, n - 1)] = T::one();
    e[0] = T::zero();
}

// Implicit QL on the tridiagonal (d, e), accumulating into v; sorts ascending.
fn tql2<T: Scalar>(n: usize, v: &mut [T], d: &mut [T], e: &mut [T]) -> Result<()> {
    let ix = |i: usize, j: usize| i * n + j;
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = T::zero();
    let mut f = T::zero();
    let mut tst1 = T::zero();
    let eps = T::epsilon();
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m >= n {
            m = n - 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 60 {
                    return Err(Error::NotConverged {
                        what: "tridiagonal QL",
                        iterations: iter,
                        residual: e[l].abs().as_f64(),
                    });
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (T::of(2.0) * e[l]);
                let mut r = p.hypot(T::one());
                if p < T::zero() {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for i in (l + 2)..n {
                    d[i] -= h;
                }
                f += h;
                p = d[m];
                let mut c = T::one();
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = T::zero();
                let mut s2 = T::zero();
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        h = v[ix(k, i + 1)];
                        v[ix(k, i + 1)] = s * v[ix(k, i)] + c * h;
                        v[ix(k, i)] = c * v[ix(k, i)] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = T::zero();
    }
    // selection sort, carrying vectors
    for i in 0..n.saturating_sub(1) {
        let mut k = i;
        let mut p = d[i];
        for j in (i + 1)..n {
            if d[j] < p {
                k = j;
                p = d[j];
            }
        }
        if k != i {
            d[k] = d[i];
            d[i] = p;
            for j in 0..n {
                v.swap(ix(j, i), ix(j, k));
            }
        }
    }
    Ok(())
}

/// Settings for [`block_lanczos_largest`].
#[derive(Debug, Clone, Copy)]
pub struct LanczosOptions {
    /// Maximum Krylov basis dimension.
    pub max_basis: usize,
    /// Absolute residual `‖Ay − θy‖` required of every returned pair (never
    /// below 100 machine epsilons of the scalar type).
    pub tol: f64,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            max_basis: 500,
            tol: 1e-8,
            seed: 0x1a2c_2055,
        }
    }
}

/// Returns the `k` largest eigenpairs of the symmetric operator `apply`
/// (`y ← A x`) on `R^n`, eigenvalues descending, vectors as `k` rows of length `n`.
pub fn block_lanczos_largest<T, F>(
    n: usize,
    k: usize,
    apply: F,
    opts: LanczosOptions,
) -> Result<(Vec<T>, Vec<Vec<T>>)>
where
    T: Scalar,
    F: Fn(&[T], &mut [T]),
{
    assert!(k >= 1 && k <= n);
    let block = k.max(2).min(n);
    let max_basis = opts.max_basis.min(n).max(block);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let random_vec = |rng: &mut ChaCha8Rng| -> Vec<T> {
        (0..n)
            .map(|_| {
                let z: f64 = StandardNormal.sample(rng);
                T::of(z)
            })
            .collect()
    };

    let mut basis: Vec<Vec<T>> = Vec::with_capacity(max_basis);
    let mut images: Vec<Vec<T>> = Vec::with_capacity(max_basis);
    // lower triangle of the projected operator basisᵀ A basis
    let mut hrows: Vec<Vec<T>> = Vec::with_capacity(max_basis);
    let tol = opts.tol.max(100.0 * T::epsilon().as_f64());
    // pending block of candidate directions to orthonormalize
    let mut pending: Vec<Vec<T>> = (0..block).map(|_| random_vec(&mut rng)).collect();
    let check_every = (4 * block).max(20);
    let mut next_check = (2 * block).max(check_every).min(max_basis);

    loop {
        let mut new_block = Vec::new();
        for mut cand in pending.drain(..) {
            if basis.len() + new_block.len() >= max_basis {
                break;
            }
            let mut ok = orthonormalize(&mut cand, basis.iter().chain(new_block.iter()));
            let mut retries = 0;
            while !ok && retries < 3 {
                cand = random_vec(&mut rng);
                ok = orthonormalize(&mut cand, basis.iter().chain(new_block.iter()));
                retries += 1;
            }
            if ok {
                new_block.push(cand);
            }
        }
        if new_block.is_empty() && basis.len() < max_basis {
            // invariant subspace exhausted; seed with fresh random directions
            pending = (0..block).map(|_| random_vec(&mut rng)).collect();
            continue;
        }
        for q in new_block {
            let mut aq = vec![T::zero(); n];
            apply(&q, &mut aq);
            let mut row: Vec<T> = basis
                .iter()
                .zip(&images)
                .map(|(b, ab)| (dot(b, &aq) + dot(&q, ab)) / T::of(2.0))
                .collect();
            row.push(dot(&q, &aq));
            hrows.push(row);
            pending.push(aq.clone());
            basis.push(q);
            images.push(aq);
        }

        let m = basis.len();
        if m >= next_check || m >= max_basis {
            let (vals, vecs, res) = ritz(&basis, &images, &hrows, k);
            if res <= tol {
                return Ok((vals, vecs));
            }
            if m >= max_basis {
                return Err(Error::NotConverged {
                    what: "block Lanczos",
                    iterations: m,
                    residual: res,
                });
            }
            next_check = (m + check_every).min(max_basis);
        }
    }
}

// Gram–Schmidt twice against `against`, then normalize. False on breakdown.
fn orthonormalize<'a, T: Scalar + 'a>(v: &mut [T], against: impl Iterator<Item = &'a Vec<T>> + Clone) -> bool {
    let norm0 = dot(v, v).sqrt();
    if norm0 == T::zero() {
        return false;
    }
    for _ in 0..2 {
        for q in against.clone() {
            let c = dot(v, q);
            for (x, y) in v.iter_mut().zip(q) {
                *x -= c * *y;
            }
        }
    }
    let norm = dot(v, v).sqrt();
    if norm <= T::of(1e-10) * norm0 {
        return false;
    }
    for x in v.iter_mut() {
        *x /= norm;
    }
    true
}

// Rayleigh–Ritz on the current basis; returns top-k pairs and max residual.
fn ritz<T: Scalar>(basis: &[Vec<T>], images: &[Vec<T>], hrows: &[Vec<T>], k: usize) -> (Vec<T>, Vec<Vec<T>>, f64) {
    let m = basis.len();
    let n = basis[0].len();
    let mut h = vec![T::zero(); m * m];
    for (j, row) in hrows.iter().enumerate() {
        for (i, &x) in row.iter().enumerate() {
            h[i * m + j] = x;
            h[j * m + i] = x;
        }
    }
    let eig = match sym_eigen(&h, m) {
        Ok(e) => e,
        Err(_) => return (Vec::new(), Vec::new(), f64::INFINITY),
    };
    let mut vals = Vec::with_capacity(k);
    let mut vecs = Vec::with_capacity(k);
    let mut worst = 0.0f64;
    for t in 0..k.min(m) {
        let j = m - 1 - t;
        let theta = eig.values[j];
        let mut y = vec![T::zero(); n];
        let mut ay = vec![T::zero(); n];
        for i in 0..m {
            let c = eig.vectors[i * m + j];
            for r in 0..n {
                y[r] += c * basis[i][r];
                ay[r] += c * images[i][r];
            }
        }
        let res: T = ay
            .iter()
            .zip(&y)
            .map(|(a, b)| {
                let t = *a - theta * *b;
                t * t
            })
            .sum::<T>()
            .sqrt();
        worst = worst.max(res.as_f64());
        vals.push(theta);
        vecs.push(y);
    }
    (vals, vecs, worst)
}
