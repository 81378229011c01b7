//! Unital *-algebras generated by finite matrix sets, their commutants and
//! irreducibility.
//!
//! The generated algebra is computed as a word closure: the span of all words
//! of length at most `k` in `G ∪ G*` (plus the unit) grows strictly with `k`
//! until it stabilizes, and the stable span is the algebra.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::real::{h2v, v2h, RealBasis};
use crate::linalg::{gram_schmidt_extend, herm_eig, ComplexMatrix};

/// Relative threshold below which a residual counts as linearly dependent.
pub const RANK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeneratorSet {
    pub d: usize,
    pub generators: Vec<ComplexMatrix>,
    #[serde(default = "default_true")]
    pub include_unit: bool,
}

fn default_true() -> bool {
    true
}

impl GeneratorSet {
    pub fn new(d: usize, generators: Vec<ComplexMatrix>) -> Result<Self> {
        let g = GeneratorSet { d, generators, include_unit: true };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::invalid("generator set: dimension must be positive"));
        }
        if self.generators.is_empty() {
            return Err(Error::invalid("generator set is empty"));
        }
        for (i, g) in self.generators.iter().enumerate() {
            if g.rows() != self.d || g.cols() != self.d {
                return Err(Error::invalid(format!(
                    "generator {i} is {}x{}, expected {}x{}",
                    g.rows(),
                    g.cols(),
                    self.d,
                    self.d
                )));
            }
        }
        Ok(())
    }

    /// Generators followed by the adjoints of the non-Hermitian ones.
    pub fn letters(&self) -> Vec<ComplexMatrix> {
        let mut out = self.generators.clone();
        for g in &self.generators {
            if !g.is_hermitian() {
                out.push(g.adjoint());
            }
        }
        out
    }
}

/// Frobenius-orthonormal basis of a subspace of `M_d`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlgebraBasis {
    pub d: usize,
    pub basis: Vec<ComplexMatrix>,
    pub word_degree_reached: usize,
    pub stabilized: bool,
}

impl AlgebraBasis {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Orthogonal projection of `a` onto the span.
    pub fn project(&self, a: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.d, self.d);
        for b in &self.basis {
            out += &b.scale(b.inner(a));
        }
        out
    }

    /// Frobenius distance from `a` to the span.
    pub fn residual(&self, a: &ComplexMatrix) -> f64 {
        (a - &self.project(a)).frobenius_norm()
    }

    pub fn contains(&self, a: &ComplexMatrix, tol: f64) -> bool {
        self.residual(a) <= tol * (1.0 + a.frobenius_norm())
    }

    /// A Frobenius-orthonormal basis of Hermitian matrices with the same
    /// complex span. Only meaningful for adjoint-closed subspaces.
    pub fn hermitian_basis(&self) -> Vec<ComplexMatrix> {
        let d = self.d;
        let mut real = RealBasis::new(d * d);
        for b in &self.basis {
            let re = b.hermitian_part();
            let im = (b - &b.adjoint()).scale(crate::linalg::c64(0.0, -0.5));
            for h in [re, im] {
                if real.len() == self.dim() {
                    break;
                }
                // scale by ‖b‖ = 1, or rounding noise in a nearly Hermitian
                // b would pass as a new direction
                real.push_scaled(&h2v(&h), RANK_TOL, 1.0);
            }
        }
        real.vectors.iter().map(|v| v2h(v, d)).collect()
    }
}

fn vectorize(a: &ComplexMatrix) -> Vec<num_complex::Complex64> {
    a.as_slice().to_vec()
}

fn unvectorize(v: Vec<num_complex::Complex64>, d: usize) -> ComplexMatrix {
    ComplexMatrix::from_vec(d, d, v).expect("vector has d*d finite entries")
}

/// Span of all words of length `≤ k` in `G ∪ G* ∪ {I}`, for the first `k` at
/// which the span stops growing.
pub fn generate_algebra(g: &GeneratorSet, max_degree: usize) -> Result<AlgebraBasis> {
    g.validate()?;
    if max_degree == 0 {
        return Err(Error::invalid("generate_algebra: max_degree must be at least 1"));
    }
    let d = g.d;
    let letters = g.letters();
    let mut basis: Vec<Vec<num_complex::Complex64>> = Vec::new();
    if g.include_unit {
        gram_schmidt_extend(&mut basis, &vectorize(&ComplexMatrix::identity(d)), RANK_TOL);
    }
    let mut frontier = Vec::new();
    for l in &letters {
        if gram_schmidt_extend(&mut basis, &vectorize(l), RANK_TOL) {
            frontier.push(unvectorize(basis.last().unwrap().clone(), d));
        }
    }

    let mut degree = 1;
    while !frontier.is_empty() && basis.len() < d * d && degree < max_degree {
        degree += 1;
        let mut next = Vec::new();
        for w in &frontier {
            for l in &letters {
                if gram_schmidt_extend(&mut basis, &vectorize(&(l * w)), RANK_TOL) {
                    next.push(unvectorize(basis.last().unwrap().clone(), d));
                }
            }
        }
        frontier = next;
    }
    // A full M_d or an empty frontier cannot grow any further.
    let stabilized = frontier.is_empty() || basis.len() == d * d || {
        let mut probe = basis.clone();
        frontier
            .iter()
            .all(|w| letters.iter().all(|l| !gram_schmidt_extend(&mut probe, &vectorize(&(l * w)), RANK_TOL)))
    };
    let out = AlgebraBasis {
        d,
        basis: basis.into_iter().map(|v| unvectorize(v, d)).collect(),
        word_degree_reached: degree,
        stabilized,
    };
    if stabilized {
        Ok(out)
    } else {
        Err(Error::NonStabilized { max_degree, dimension: out.dim(), partial: Box::new(out) })
    }
}

/// Default degree cap for [`generate_algebra`].
pub fn default_max_degree(d: usize) -> usize {
    2 * d * d
}

/// Basis of `{X : Xg = gX, Xg* = g*X for all g}`.
///
/// The kernel of the stacked commutator map `X ↦ (Xg − gX, Xg* − g*X)` is read
/// off the eigendecomposition of its normal-equations matrix.
pub fn commutant(g: &GeneratorSet) -> Result<AlgebraBasis> {
    g.validate()?;
    let d = g.d;
    let n = d * d;
    let mut normal = ComplexMatrix::zeros(n, n);
    for l in g.letters() {
        // column (p, q) of the commutator map is [E_pq, l] = E_pq l − l E_pq
        let cols: Vec<ComplexMatrix> = (0..n)
            .map(|idx| {
                let e = ComplexMatrix::unit(d, idx / d, idx % d);
                &e.matmul(&l) - &l.matmul(&e)
            })
            .collect();
        for a in 0..n {
            for b in a..n {
                let v = cols[a].inner(&cols[b]);
                normal[(a, b)] += v;
                if a != b {
                    normal[(b, a)] += v.conj();
                }
            }
        }
    }
    let eig = herm_eig(&normal)?;
    let largest = eig.max_value().max(0.0);
    let cutoff = RANK_TOL * largest;
    let mut basis = Vec::new();
    for (k, &lambda) in eig.values.iter().enumerate() {
        if lambda <= cutoff || largest == 0.0 {
            let v = eig.vectors.column(k);
            basis.push(unvectorize(v, d));
        }
    }
    if basis.is_empty() {
        basis.push(ComplexMatrix::identity(d).scale_real(1.0 / (d as f64).sqrt()));
    }
    Ok(AlgebraBasis { d, basis, word_degree_reached: 0, stabilized: true })
}

pub fn is_irreducible(g: &GeneratorSet) -> Result<bool> {
    Ok(commutant(g)?.dim() == 1)
}
