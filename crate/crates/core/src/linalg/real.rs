//! Real vector spaces: Hermitian coordinates and orthonormal bases.

use super::{c64, ComplexMatrix};

/// Real coordinates of a Hermitian `n x n` matrix: the diagonal, then `√2 Re`
/// of the strict upper triangle, then `√2 Im` of it. With this scaling the
/// Frobenius inner product becomes the Euclidean one.
pub fn h2v(h: &ComplexMatrix) -> Vec<f64> {
    let n = h.rows();
    let s = std::f64::consts::SQRT_2;
    let mut v = Vec::with_capacity(n * n);
    v.extend((0..n).map(|i| h[(i, i)].re));
    for i in 0..n {
        for j in i + 1..n {
            v.push(s * h[(i, j)].re);
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            v.push(s * h[(i, j)].im);
        }
    }
    v
}

/// Inverse of [`h2v`].
pub fn v2h(v: &[f64], n: usize) -> ComplexMatrix {
    debug_assert_eq!(v.len(), n * n);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut h = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        h[(i, i)] = c64(v[i], 0.0);
    }
    let m = n * (n - 1) / 2;
    let mut k = 0;
    for i in 0..n {
        for j in i + 1..n {
            let z = c64(s * v[n + k], s * v[n + m + k]);
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
            k += 1;
        }
    }
    h
}

pub fn rdot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn rnorm(a: &[f64]) -> f64 {
    rdot(a, a).sqrt()
}

/// `y += alpha x`.
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Orthonormal basis of a subspace of `R^n`, grown by Gram–Schmidt.
#[derive(Debug, Clone)]
pub struct RealBasis {
    pub dim: usize,
    pub vectors: Vec<Vec<f64>>,
}

impl RealBasis {
    pub fn new(dim: usize) -> Self {
        RealBasis { dim, vectors: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Adds the component of `candidate` orthogonal to the current span when
    /// its norm exceeds `threshold` times the candidate's own norm.
    pub fn push(&mut self, candidate: &[f64], threshold: f64) -> bool {
        self.push_scaled(candidate, threshold, rnorm(candidate))
    }

    /// Like [`RealBasis::push`] but measures the residual against `scale`
    /// instead of the candidate's norm.
    pub fn push_scaled(&mut self, candidate: &[f64], threshold: f64, scale: f64) -> bool {
        if scale == 0.0 || rnorm(candidate) == 0.0 {
            return false;
        }
        let mut v = candidate.to_vec();
        for _pass in 0..2 {
            for b in &self.vectors {
                let c = rdot(b, &v);
                axpy(-c, b, &mut v);
            }
        }
        let n = rnorm(&v);
        if n <= threshold * scale {
            return false;
        }
        v.iter_mut().for_each(|x| *x /= n);
        self.vectors.push(v);
        true
    }

    /// Coefficients of `v` in the basis.
    pub fn coords(&self, v: &[f64]) -> Vec<f64> {
        self.vectors.iter().map(|b| rdot(b, v)).collect()
    }

    pub fn combine(&self, coeffs: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (b, &c) in self.vectors.iter().zip(coeffs) {
            axpy(c, b, &mut out);
        }
        out
    }

    /// Orthogonal projection onto the span.
    pub fn project(&self, v: &[f64]) -> Vec<f64> {
        self.combine(&self.coords(v))
    }

    /// `v` minus its projection.
    pub fn reject(&self, v: &[f64]) -> Vec<f64> {
        let mut out = v.to_vec();
        for b in &self.vectors {
            let c = rdot(b, &out);
            axpy(-c, b, &mut out);
        }
        out
    }

    /// Orthonormal basis of the orthogonal complement.
    pub fn complement(&self) -> RealBasis {
        let mut all = self.clone();
        let start = all.len();
        for i in 0..self.dim {
            if all.len() == self.dim {
                break;
            }
            let mut e = vec![0.0; self.dim];
            e[i] = 1.0;
            all.push(&e, 1e-8);
        }
        RealBasis { dim: self.dim, vectors: all.vectors.split_off(start) }
    }
}
