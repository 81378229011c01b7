//! Random and hand-built inputs shared by tests, benches and the suite.

use crate::cpmaps::{choi_from_kraus, ChoiMatrix, KrausSet, StinespringDilation};
use crate::error::Result;
use crate::linalg::{kron, ComplexMatrix};
use crate::opsys::{is_irreducible, GeneratorSet};
use crate::rng::CounterRng;

/// `diag(0, 1, 2)`.
pub fn diagonal_x() -> ComplexMatrix {
    ComplexMatrix::diag_real(&[0.0, 1.0, 2.0])
}

/// Kraus operators of the map that pinches to the diagonal and then
/// replaces the middle entry by the mean of the outer two. It fixes
/// `diag(0,1,2)` and sends its square `diag(0,1,4)` to `diag(0,2,4)`.
pub fn averaging_pinch_kraus() -> KrausSet {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    KrausSet::new(vec![
        ComplexMatrix::unit(3, 0, 0),
        ComplexMatrix::unit(3, 2, 2),
        ComplexMatrix::unit(3, 1, 0).scale_real(h),
        ComplexMatrix::unit(3, 1, 2).scale_real(h),
    ])
    .expect("fixed Kraus family")
}

pub fn averaging_pinch_choi() -> ChoiMatrix {
    choi_from_kraus(&averaging_pinch_kraus())
}

/// The same map evaluated entrywise, without Kraus or Choi machinery.
pub fn averaging_pinch_direct(a: &ComplexMatrix) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(3, 3);
    out[(0, 0)] = a[(0, 0)];
    out[(2, 2)] = a[(2, 2)];
    out[(1, 1)] = (a[(0, 0)] + a[(2, 2)]).scale(0.5);
    out
}

/// Random UCP map on `M_d` with `count` Kraus operators.
pub fn random_ucp(rng: &mut CounterRng, d: usize, count: usize) -> ChoiMatrix {
    choi_from_kraus(&KrausSet::random_unital(rng, d, count))
}

/// Ginibre matrix, redrawn until its generated algebra is all of `M_d`.
pub fn random_irreducible(rng: &mut CounterRng, d: usize) -> Result<ComplexMatrix> {
    loop {
        let t = rng.ginibre(d);
        if is_irreducible(&GeneratorSet::new(d, vec![t.clone()])?)? {
            return Ok(t);
        }
    }
}

/// `{T, T*T, TT*}`.
pub fn schwarz_triple(t: &ComplexMatrix) -> Vec<ComplexMatrix> {
    vec![t.clone(), t.adjoint_mul(t), t.matmul(&t.adjoint())]
}

/// A dilation whose range is coinvariant for `σ(S)` by construction.
#[derive(Debug, Clone)]
pub struct CoinvariantDilation {
    pub dilation: StinespringDilation,
    /// `S` on `C^d`; `σ(S) = S ⊗ I_r`.
    pub s: ComplexMatrix,
}

/// `S = U [[A, 0], [B, C]] U*` leaves the span `M` of the first `k` columns
/// of `U` invariant under `S*`, so `V = (U_M W) ⊗ ψ` with `W` unitary and
/// `ψ` a unit vector has range inside `M ⊗ ψ`, which `σ(S)*` preserves.
pub fn coinvariant_dilation(rng: &mut CounterRng, d: usize, k: usize, r: usize) -> Result<CoinvariantDilation> {
    assert!(0 < k && k <= d && r >= 1);
    let u = rng.haar_unitary(d);
    let mut block = rng.ginibre(d);
    for i in 0..k {
        for j in k..d {
            block[(i, j)] = num_complex::Complex64::new(0.0, 0.0);
        }
    }
    let s = &u * &(&block * &u.adjoint());
    let w = rng.haar_unitary(k);
    let um = ComplexMatrix::from_fn(d, k, |i, j| u[(i, j)]);
    let psi = rng.haar_unitary(r);
    let psi = ComplexMatrix::from_fn(r, 1, |i, _| psi[(i, 0)]);
    let v = kron(&um.matmul(&w), &psi);
    Ok(CoinvariantDilation { dilation: StinespringDilation::from_isometry(d, r, v)?, s })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cpmaps::coinvariance_block;
    use crate::linalg::op_norm;

    #[test]
    fn averaging_pinch_agrees_with_direct_evaluation() {
        let c = averaging_pinch_choi();
        assert!(c.is_ucp(1e-12));
        let mut rng = CounterRng::new(1);
        for _ in 0..10 {
            let a = rng.ginibre(3);
            assert!((&c.apply(&a).unwrap() - &averaging_pinch_direct(&a)).max_abs() < 1e-14);
        }
        let x = diagonal_x();
        assert!((&c.apply(&x).unwrap() - &x).max_abs() < 1e-15);
        let x2 = &x * &x;
        assert!((op_norm(&(&averaging_pinch_direct(&x2) - &x2)) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn constructed_dilations_are_coinvariant() {
        let mut rng = CounterRng::new(2);
        for (d, k, r) in [(2, 1, 1), (3, 2, 2), (4, 2, 3), (4, 4, 1)] {
            let cd = coinvariant_dilation(&mut rng, d, k, r).unwrap();
            let dil = &cd.dilation;
            assert!(dil.isometry_defect() < 1e-12);
            let img = dil.sigma(&cd.s);
            let block = coinvariance_block(dil, &img, &dil.compress(&cd.s)).unwrap();
            assert!(block.x_block_norm < 1e-12, "{block:?}");
        }
    }
}
