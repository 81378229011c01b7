//! Randomized properties of the UEP search that are too slow for unit tests.

use hyperlab::uep::{solve, validate_certificate, Status, UepProblem};
use hyperlab::{ComplexMatrix, CounterRng};

/// `U diag(λ) U*` with consecutive eigenvalue gaps of at least 1/2.
fn separated_hermitian(rng: &mut CounterRng, d: usize) -> ComplexMatrix {
    let mut lambda = Vec::with_capacity(d);
    let mut last = -1.0;
    for _ in 0..d {
        last += 0.5 + rng.uniform();
        lambda.push(last);
    }
    let u = rng.haar_unitary(d);
    &u * &(&ComplexMatrix::diag_real(&lambda) * &u.adjoint())
}

#[test]
fn three_distinct_eigenvalues_admit_violations() {
    let mut rng = CounterRng::new(0xd1a6);
    let mut worst = f64::INFINITY;
    for d in 3..=5 {
        for _ in 0..50 {
            let x = separated_hermitian(&mut rng, d);
            let p = UepProblem::new(d, vec![x]).unwrap().with_seed(rng.next_u64());
            let r = solve(&p).unwrap();
            assert_eq!(r.status, Status::ViolationFound, "d = {d}");
            let cert = r.certificate.as_ref().unwrap();
            assert!(validate_certificate(cert, &p));
            worst = worst.min(cert.deviation);
        }
    }
    assert!(worst >= 0.1, "smallest certified deviation {worst}");
}

#[test]
fn two_eigenvalues_are_unique() {
    // the algebra of a Hermitian matrix with two eigenvalues is spanned by
    // I and the matrix itself, both pinned
    let mut rng = CounterRng::new(77);
    for d in 2..=4 {
        let u = rng.haar_unitary(d);
        let lambda: Vec<f64> = (0..d).map(|i| if i == 0 { 1.0 } else { -1.0 }).collect();
        let x = &u * &(&ComplexMatrix::diag_real(&lambda) * &u.adjoint());
        let r = solve(&UepProblem::new(d, vec![x]).unwrap()).unwrap();
        assert_eq!(r.status, Status::UniqueEvidence);
    }
}
