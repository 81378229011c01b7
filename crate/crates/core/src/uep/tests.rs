use super::*;
use crate::fixtures::{averaging_pinch_choi, diagonal_x, schwarz_triple};
use crate::linalg::c64;

fn x3() -> ComplexMatrix {
    diagonal_x()
}

fn averaging_certificate(p: &UepProblem) -> ViolationCertificate {
    let a = &x3() * &x3();
    ViolationCertificate::assemble(p, averaging_pinch_choi(), a).unwrap()
}

#[test]
fn single_diagonal_generator_admits_a_violation() {
    let p = UepProblem::new(3, vec![x3()]).unwrap().with_seed(1);
    let r = solve(&p).unwrap();
    assert_eq!(r.status, Status::ViolationFound);
    let cert = r.certificate.as_ref().unwrap();
    assert!(cert.deviation >= 0.5, "deviation {}", cert.deviation);
    assert!(validate_certificate(cert, &p));
    assert!(r.probes.iter().all(|pr| pr.in_algebra));
}

#[test]
fn pinning_the_square_forces_uniqueness() {
    let x = x3();
    let p = UepProblem::new(3, vec![x.clone(), &x * &x]).unwrap().with_seed(2);
    let r = solve(&p).unwrap();
    assert_eq!(r.status, Status::UniqueEvidence);
    assert!(r.max_deviation() <= 1e-7);
}

#[test]
fn random_irreducible_generator_is_unique() {
    let mut rng = CounterRng::new(11);
    for d in [2, 3] {
        let t = rng.ginibre(d);
        let p = UepProblem::new(d, vec![t]).unwrap().with_seed(3);
        let r = solve(&p).unwrap();
        assert_eq!(r.status, Status::UniqueEvidence, "d = {d}");
        assert_eq!(r.algebra_dimension, d * d);
    }
}

#[test]
fn empty_generator_set_moves_nothing_in_the_scalars() {
    let p = UepProblem::new(2, vec![]).unwrap();
    let sys = build_constraints(&p).unwrap();
    // unitality alone: d² real equations
    assert_eq!(sys.rank, 4);
    assert_eq!(sys.full_dimension, 16);
    let r = solve(&p).unwrap();
    assert_eq!(r.status, Status::UniqueEvidence);
}

#[test]
fn probes_outside_the_algebra_are_labelled() {
    let p =
        UepProblem::new(3, vec![x3()]).unwrap().with_probes(vec![ComplexMatrix::unit(3, 0, 1).scale_real(1.0), x3()]);
    let r = solve(&p).unwrap();
    let outside = &r.probes[0];
    assert!(!outside.in_algebra);
    assert_eq!(outside.label.as_deref(), Some("extension freedom, not UEP violation"));
    assert!(r.probes[1].in_algebra);
    // X itself is pinned
    assert!(r.probes[1].deviation <= 1e-7);
}

#[test]
fn hand_certificate_validates() {
    let p = UepProblem::new(3, vec![x3()]).unwrap();
    let cert = averaging_certificate(&p);
    assert!((cert.deviation - 1.0).abs() < 1e-12);
    assert!(validate_certificate(&cert, &p));
}

#[test]
fn identity_certificate_is_rejected() {
    let p = UepProblem::new(3, vec![x3()]).unwrap();
    let cert = ViolationCertificate::assemble(&p, ChoiMatrix::identity(3), &x3() * &x3()).unwrap();
    assert!(!validate_certificate(&cert, &p));
}

#[test]
fn non_positive_certificate_is_rejected() {
    let p = UepProblem::new(3, vec![x3()]).unwrap();
    let mut cert = averaging_certificate(&p);
    let mut c = cert.choi.matrix().clone();
    // push one eigenvalue of a kernel direction to -0.01 while keeping the
    // partial trace: E_11 ⊗ E_00 is in the kernel (Φ(E_11) = 0)
    let i = 3;
    c[(i, i)] -= c64(0.01, 0.0);
    let j = 3 + 2;
    c[(j, j)] += c64(0.01, 0.0);
    cert.choi = ChoiMatrix::new(3, c).unwrap();
    assert!(cert.choi.validate_ucp().cp_defect >= 0.01 - 1e-12);
    assert!(!validate_certificate(&cert, &p));
}

#[test]
fn tampered_deviation_is_rejected() {
    let p = UepProblem::new(3, vec![x3()]).unwrap();
    let mut cert = averaging_certificate(&p);
    cert.deviation = 2.0;
    assert!(!validate_certificate(&cert, &p));
}

#[test]
fn reports_are_deterministic() {
    let p = UepProblem::new(3, vec![x3()]).unwrap().with_seed(9);
    let a = serde_json::to_string(&solve(&p).unwrap()).unwrap();
    let b = serde_json::to_string(&solve(&p).unwrap()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn pinned_triple_forces_word_agreement() {
    let mut rng = CounterRng::new(5);
    let p = UepProblem::new(3, schwarz_triple(&rng.ginibre(3))).unwrap();
    let r = solve(&p).unwrap();
    let check = schwarz_pinning_check(&p, &r.extremal_choi).unwrap();
    assert_eq!(check.pinned_triples, vec![0]);
    assert!(check.passes(1e-6, 1e-6), "{check:?}");
    assert_eq!(check.words_checked, 2 + 4 + 8 + 16);
}

#[test]
fn constraint_ranks() {
    let empty = build_constraints(&UepProblem::new(3, vec![]).unwrap()).unwrap();
    let unit = build_constraints(&UepProblem::new(3, vec![ComplexMatrix::identity(3)]).unwrap()).unwrap();
    assert_eq!(empty.rank, unit.rank);
    let x = x3();
    let one = build_constraints(&UepProblem::new(3, vec![x.clone()]).unwrap()).unwrap();
    let two = build_constraints(&UepProblem::new(3, vec![x.clone(), &x * &x]).unwrap()).unwrap();
    assert!(two.rank > one.rank && one.rank > empty.rank);
    assert_eq!(two.full_dimension, 81);
}

#[test]
fn unitary_generator_has_no_schwarz_defect() {
    let mut rng = CounterRng::new(21);
    let u = rng.haar_unitary(3);
    let p = UepProblem::new(3, vec![u]).unwrap();
    let r = solve(&p).unwrap();
    let check = schwarz_pinning_check(&p, &r.extremal_choi).unwrap();
    assert!(check.generators[0].left_norm <= 1e-8 && check.generators[0].right_norm <= 1e-8);
}

#[test]
fn violating_certificate_has_schwarz_defect() {
    let p = UepProblem::new(3, vec![x3()]).unwrap();
    let check = schwarz_pinning_check(&p, &averaging_pinch_choi()).unwrap();
    assert!(check.pinned_triples.is_empty());
    assert!(check.generators[0].left_norm > 0.5);
}
