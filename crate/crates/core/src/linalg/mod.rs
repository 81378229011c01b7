//! Dense complex linear algebra.
//!
//! Everything here works on small square matrices (dimension at most a few
//! dozen), so storage is a flat row-major `Vec` and all kernels are plain loops.

mod eig;
pub mod real;

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub use eig::{herm_eig, herm_eig_warm, HermEig};

/// Relative Hermiticity tolerance: `max |A - A*| <= HERM_TOL * (1 + max|A|)`.
pub const HERM_TOL: f64 = 1e-12;

#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Dense complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Matrix unit `E_ij` in dimension `n`.
    pub fn unit(n: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(n, n);
        m[(i, j)] = ONE;
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid("matrix dimensions must be positive"));
        }
        if data.len() != rows * cols {
            return Err(Error::invalid(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid("matrix entries must be finite"));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from real row slices.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        Self::from_fn(r, c, |i, j| c64(rows[i][j], 0.0))
    }

    pub fn diag_real(values: &[f64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |i, j| if i == j { c64(values[i], 0.0) } else { ZERO })
    }

    pub fn diag(values: &[Complex64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |i, j| if i == j { values[i] } else { ZERO })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z.conj()).collect() }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Frobenius inner product `tr(A* B)`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_defect() <= HERM_TOL * (1.0 + self.max_abs())
    }

    /// `(A + A*) / 2`.
    pub fn hermitian_part(&self) -> Self {
        let n = self.rows;
        Self::from_fn(n, n, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5)
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(
            self.cols, other.rows,
            "matmul shape mismatch: {}x{} * {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let (n, k, m) = (self.rows, self.cols, other.cols);
        let mut out = vec![ZERO; n * m];
        for i in 0..n {
            let row = &mut out[i * m..(i + 1) * m];
            for l in 0..k {
                let a = self.data[i * k + l];
                if a == ZERO {
                    continue;
                }
                let brow = &other.data[l * m..(l + 1) * m];
                for (o, b) in row.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        Self { rows: n, cols: m, data: out }
    }

    /// `A* B` without materializing the adjoint.
    pub fn adjoint_mul(&self, other: &Self) -> Self {
        assert_eq!(self.rows, other.rows);
        let (k, n, m) = (self.rows, self.cols, other.cols);
        let mut out = vec![ZERO; n * m];
        for l in 0..k {
            let brow = &other.data[l * m..(l + 1) * m];
            for i in 0..n {
                let a = self.data[l * n + i].conj();
                if a == ZERO {
                    continue;
                }
                let row = &mut out[i * m..(i + 1) * m];
                for (o, b) in row.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        Self { rows: n, cols: m, data: out }
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| self.data[i * self.cols..(i + 1) * self.cols].iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Upper-left `r x c` corner.
    pub fn corner(&self, r: usize, c: usize) -> Self {
        Self::from_fn(r, c, |i, j| self[(i, j)])
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub(crate) fn require_square(&self, what: &str) -> Result<()> {
        if self.is_square() {
            Ok(())
        } else {
            Err(Error::invalid(format!("{what}: expected a square matrix, got {}x{}", self.rows, self.cols)))
        }
    }

    pub(crate) fn require_hermitian(&self, what: &str) -> Result<()> {
        self.require_square(what)?;
        if self.is_hermitian() {
            Ok(())
        } else {
            Err(Error::invalid(format!("{what}: matrix is not Hermitian (defect {:.3e})", self.hermiticity_defect())))
        }
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

macro_rules! elementwise {
    ($tr:ident, $method:ident, $op:tt) => {
        impl $tr<&ComplexMatrix> for &ComplexMatrix {
            type Output = ComplexMatrix;

            fn $method(self, rhs: &ComplexMatrix) -> ComplexMatrix {
                assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
                ComplexMatrix {
                    rows: self.rows,
                    cols: self.cols,
                    data: self.data.iter().zip(&rhs.data).map(|(a, b)| a $op b).collect(),
                }
            }
        }

        impl $tr<ComplexMatrix> for ComplexMatrix {
            type Output = ComplexMatrix;

            fn $method(self, rhs: ComplexMatrix) -> ComplexMatrix {
                (&self).$method(&rhs)
            }
        }
    };
}

elementwise!(Add, add, +);
elementwise!(Sub, sub, -);

impl Mul<&ComplexMatrix> for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl Mul<ComplexMatrix> for ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: ComplexMatrix) -> ComplexMatrix {
        self.matmul(&rhs)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn neg(self) -> ComplexMatrix {
        self.scale_real(-1.0)
    }
}

impl AddAssign<&ComplexMatrix> for ComplexMatrix {
    fn add_assign(&mut self, rhs: &ComplexMatrix) {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl SubAssign<&ComplexMatrix> for ComplexMatrix {
    fn sub_assign(&mut self, rhs: &ComplexMatrix) {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a -= b;
        }
    }
}

/// Largest singular value, as the square root of the top eigenvalue of `A*A`.
pub fn op_norm(a: &ComplexMatrix) -> f64 {
    let gram = a.adjoint_mul(a).hermitian_part();
    let eig = herm_eig(&gram).expect("Gram matrix is square and Hermitian");
    eig.values[0].max(0.0).sqrt()
}

/// Nearest positive semidefinite matrix in Frobenius norm (eigenvalue clipping).
pub fn psd_project(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = herm_eig(a)?;
    Ok(eig.reconstruct_with(|l| l.max(0.0)))
}

/// Kronecker product `A ⊗ B`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (ar, ac, br, bc) = (a.rows, a.cols, b.rows, b.cols);
    ComplexMatrix::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

/// Traces out the first tensor factor of a matrix on `C^d ⊗ C^m`.
pub fn partial_trace_first(c: &ComplexMatrix, d: usize) -> Result<ComplexMatrix> {
    c.require_square("partial_trace_first")?;
    if d == 0 || !c.rows.is_multiple_of(d) {
        return Err(Error::invalid(format!("partial_trace_first: size {} is not divisible by d = {d}", c.rows)));
    }
    let m = c.rows / d;
    Ok(ComplexMatrix::from_fn(m, m, |k, l| (0..d).map(|i| c[(i * m + k, i * m + l)]).sum()))
}

/// Traces out the second tensor factor of a matrix on `C^m ⊗ C^d`.
pub fn partial_trace_second(c: &ComplexMatrix, d: usize) -> Result<ComplexMatrix> {
    c.require_square("partial_trace_second")?;
    if d == 0 || !c.rows.is_multiple_of(d) {
        return Err(Error::invalid(format!("partial_trace_second: size {} is not divisible by d = {d}", c.rows)));
    }
    let m = c.rows / d;
    Ok(ComplexMatrix::from_fn(m, m, |i, j| (0..d).map(|k| c[(i * d + k, j * d + k)]).sum()))
}

/// Orthonormalizes `vectors` in place against `basis` and each other with
/// modified Gram–Schmidt plus one re-orthogonalization pass. Vectors whose
/// residual norm falls below `threshold` are dropped.
pub(crate) fn gram_schmidt_extend(basis: &mut Vec<Vec<Complex64>>, candidate: &[Complex64], threshold: f64) -> bool {
    let mut v = candidate.to_vec();
    let original = norm(&v);
    if original == 0.0 {
        return false;
    }
    for _pass in 0..2 {
        for b in basis.iter() {
            let c = dot(b, &v);
            for (x, y) in v.iter_mut().zip(b) {
                *x -= c * y;
            }
        }
    }
    let n = norm(&v);
    if n <= threshold * original.max(1.0) {
        return false;
    }
    for x in v.iter_mut() {
        *x /= n;
    }
    basis.push(v);
    true
}

/// `<a, b> = Σ conj(a_i) b_i`.
pub(crate) fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub(crate) fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::CounterRng;

    fn close(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> bool {
        (a - b).max_abs() <= tol
    }

    #[test]
    fn op_norm_of_matrix_units() {
        assert!((op_norm(&ComplexMatrix::unit(3, 0, 0)) - 1.0).abs() < 1e-12);
        let a = ComplexMatrix::from_real_rows(&[&[0.0, 2.0], &[0.0, 0.0]]);
        assert!((op_norm(&a) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn op_norm_dominates_sampled_ratios() {
        let mut rng = CounterRng::new(11);
        let a = rng.ginibre(5);
        let reported = op_norm(&a);
        let mut best = 0.0f64;
        for _ in 0..100_000 {
            let x: Vec<Complex64> = (0..5).map(|_| rng.complex_normal()).collect();
            let ratio = norm(&a.mul_vec(&x)) / norm(&x);
            best = best.max(ratio);
        }
        assert!(best <= reported + 1e-6);
        assert!(best >= 0.9 * reported);

        // power iteration on A*A as a second, sharper oracle
        let gram = a.adjoint_mul(&a);
        let mut x: Vec<Complex64> = (0..5).map(|_| rng.complex_normal()).collect();
        for _ in 0..2000 {
            let y = gram.mul_vec(&x);
            let n = norm(&y);
            x = y.into_iter().map(|z| z / n).collect();
        }
        let power = norm(&a.mul_vec(&x));
        assert!((power - reported).abs() <= 1e-9 * reported);
    }

    #[test]
    fn psd_project_examples() {
        let p = psd_project(&ComplexMatrix::diag_real(&[2.0, -1.0])).unwrap();
        assert!(close(&p, &ComplexMatrix::diag_real(&[2.0, 0.0]), 1e-12));

        let x = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let p = psd_project(&x).unwrap();
        let half = ComplexMatrix::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]]);
        assert!(close(&p, &half, 1e-12));

        let g = CounterRng::new(3).ginibre(4);
        let psd = g.adjoint_mul(&g);
        assert!(close(&psd_project(&psd).unwrap(), &psd, 1e-12 * (1.0 + psd.max_abs())));
    }

    #[test]
    fn psd_project_rejects_non_hermitian() {
        let a = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!(matches!(psd_project(&a), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn partial_trace_of_kron() {
        let b = CounterRng::new(5).ginibre(3);
        let two_b = partial_trace_first(&kron(&ComplexMatrix::identity(2), &b), 2).unwrap();
        assert!(close(&two_b, &b.scale_real(2.0), 1e-12));
        let e00 = ComplexMatrix::diag_real(&[1.0, 0.0]);
        let same = partial_trace_first(&kron(&e00, &b), 2).unwrap();
        assert!(close(&same, &b, 1e-12));
    }

    #[test]
    fn partial_trace_random_identity() {
        let mut rng = CounterRng::new(99);
        let a = rng.ginibre(3);
        let b = rng.ginibre(3);
        let lhs = partial_trace_first(&kron(&a, &b), 3).unwrap();
        assert!(close(&lhs, &b.scale(a.trace()), 1e-12 * (1.0 + a.max_abs() * b.max_abs() * 3.0)));
        let rhs = partial_trace_second(&kron(&a, &b), 3).unwrap();
        assert!(close(&rhs, &a.scale(b.trace()), 1e-11));
    }

    #[test]
    fn partial_trace_size_mismatch() {
        let c = ComplexMatrix::identity(5);
        assert!(matches!(partial_trace_first(&c, 2), Err(Error::InvalidInput(_))));
        let r = ComplexMatrix::zeros(2, 3);
        assert!(partial_trace_first(&r, 2).is_err());
    }

    #[test]
    fn from_vec_validates() {
        assert!(ComplexMatrix::from_vec(2, 2, vec![ZERO; 3]).is_err());
        assert!(ComplexMatrix::from_vec(1, 1, vec![c64(f64::NAN, 0.0)]).is_err());
        assert!(ComplexMatrix::from_vec(0, 1, vec![]).is_err());
    }

    #[test]
    fn adjoint_mul_matches_explicit() {
        let mut rng = CounterRng::new(1);
        let a = rng.ginibre(4);
        let b = rng.ginibre(4);
        assert!(close(&a.adjoint_mul(&b), &(&a.adjoint() * &b), 1e-12));
    }
}
