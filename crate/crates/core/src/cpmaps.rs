//! Completely positive maps on matrix algebras: Choi matrices, Kraus
//! operators, Stinespring dilations and Schwarz-type defects.
//!
//! Convention: for `Φ: M_d → M_m` the Choi matrix is
//! `C = Σ_ij E_ij ⊗ Φ(E_ij)` on `C^d ⊗ C^m`, input index first, so
//! `Φ(E_ij)[k, l] = C[(i·m + k, j·m + l)]` and `Φ(A) = Tr_1[C (Aᵀ ⊗ I)]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{herm_eig, kron, op_norm, partial_trace_first, ComplexMatrix, ZERO};
use crate::rng::CounterRng;

/// Tolerance for the UCP predicate.
pub const UCP_TOL: f64 = 1e-9;
/// Looser tolerance used when an operation merely requires a UCP input; maps
/// produced by iterative solvers carry residuals around `1e-9 .. 1e-8`.
pub const UCP_PRECONDITION_TOL: f64 = 1e-7;
/// Eigenvalues below this fraction of the trace are dropped as numerical rank.
pub const KRAUS_RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix {
    d: usize,
    d_out: usize,
    c: ComplexMatrix,
}

#[derive(Serialize, Deserialize)]
struct ChoiLiteral {
    d: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    d_out: Option<usize>,
    convention: String,
    matrix: ComplexMatrix,
}

impl Serialize for ChoiMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ChoiLiteral {
            d: self.d,
            d_out: (self.d_out != self.d).then_some(self.d_out),
            convention: "input-first".into(),
            matrix: self.c.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ChoiMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let lit = ChoiLiteral::deserialize(de)?;
        if lit.convention != "input-first" {
            return Err(serde::de::Error::custom(format!("unsupported Choi convention {:?}", lit.convention)));
        }
        ChoiMatrix::rectangular(lit.d, lit.d_out.unwrap_or(lit.d), lit.matrix).map_err(serde::de::Error::custom)
    }
}

impl ChoiMatrix {
    /// Choi matrix of a map `M_d → M_d`.
    pub fn new(d: usize, c: ComplexMatrix) -> Result<Self> {
        Self::rectangular(d, d, c)
    }

    /// Choi matrix of a map `M_d → M_m`. The input must be Hermitian up to
    /// rounding; it is symmetrized.
    pub fn rectangular(d: usize, m: usize, c: ComplexMatrix) -> Result<Self> {
        if d == 0 || m == 0 {
            return Err(Error::invalid("Choi matrix: dimensions must be positive"));
        }
        if c.rows() != d * m || c.cols() != d * m {
            return Err(Error::invalid(format!(
                "Choi matrix for M_{d} -> M_{m} must be {0}x{0}, got {1}x{2}",
                d * m,
                c.rows(),
                c.cols()
            )));
        }
        if !c.is_finite() {
            return Err(Error::invalid("Choi matrix has non-finite entries"));
        }
        if c.hermiticity_defect() > 1e-9 * (1.0 + c.max_abs()) {
            return Err(Error::invalid(format!(
                "Choi matrix is not Hermitian (defect {:.3e})",
                c.hermiticity_defect()
            )));
        }
        Ok(ChoiMatrix { d, d_out: m, c: c.hermitian_part() })
    }

    /// `C = Σ E_ij ⊗ f(E_ij)`.
    pub fn from_map(d: usize, m: usize, f: impl Fn(&ComplexMatrix) -> ComplexMatrix) -> Result<Self> {
        let mut c = ComplexMatrix::zeros(d * m, d * m);
        for i in 0..d {
            for j in 0..d {
                let img = f(&ComplexMatrix::unit(d, i, j));
                if img.rows() != m || img.cols() != m {
                    return Err(Error::invalid("from_map: image has the wrong size"));
                }
                for k in 0..m {
                    for l in 0..m {
                        c[(i * m + k, j * m + l)] = img[(k, l)];
                    }
                }
            }
        }
        Self::rectangular(d, m, c)
    }

    /// Choi matrix of the identity map, `|Ω⟩⟨Ω|` with `Ω = Σ e_i ⊗ e_i`.
    pub fn identity(d: usize) -> Self {
        let mut c = ComplexMatrix::zeros(d * d, d * d);
        for i in 0..d {
            for j in 0..d {
                c[(i * d + i, j * d + j)] = crate::linalg::ONE;
            }
        }
        ChoiMatrix { d, d_out: d, c }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.c
    }

    /// `Φ(A) = Σ_ij A_ij Φ(E_ij)`.
    pub fn apply(&self, a: &ComplexMatrix) -> Result<ComplexMatrix> {
        let (d, m) = (self.d, self.d_out);
        if a.rows() != d || a.cols() != d {
            return Err(Error::invalid(format!("apply: expected a {d}x{d} input, got {}x{}", a.rows(), a.cols())));
        }
        let mut out = ComplexMatrix::zeros(m, m);
        for i in 0..d {
            for j in 0..d {
                let aij = a[(i, j)];
                if aij == ZERO {
                    continue;
                }
                for k in 0..m {
                    for l in 0..m {
                        out[(k, l)] += aij * self.c[(i * m + k, j * m + l)];
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn validate_ucp(&self) -> UcpDefects {
        let eig = herm_eig(&self.c).expect("Choi matrix is Hermitian by construction");
        let cp_defect = (-eig.min_value()).max(0.0);
        let unit = partial_trace_first(&self.c, self.d).expect("size checked at construction");
        let unital_defect = op_norm(&(&unit - &ComplexMatrix::identity(self.d_out)));
        UcpDefects { cp_defect, unital_defect }
    }

    pub fn is_ucp(&self, tol: f64) -> bool {
        let def = self.validate_ucp();
        def.cp_defect <= tol * self.c.trace().re.abs().max(1.0) && def.unital_defect <= tol
    }

    fn require_ucp(&self) -> Result<()> {
        let def = self.validate_ucp();
        if def.cp_defect <= UCP_PRECONDITION_TOL * self.c.trace().re.abs().max(1.0)
            && def.unital_defect <= UCP_PRECONDITION_TOL
        {
            Ok(())
        } else {
            Err(Error::NotUcp { cp_defect: def.cp_defect, unital_defect: def.unital_defect })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UcpDefects {
    pub cp_defect: f64,
    pub unital_defect: f64,
}

/// `Φ(A) = Σ K_α A K_α*` with `K_α: C^d → C^m` stored as `m x d` matrices.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KrausSet {
    pub d: usize,
    pub d_out: usize,
    pub operators: Vec<ComplexMatrix>,
}

impl KrausSet {
    pub fn new(operators: Vec<ComplexMatrix>) -> Result<Self> {
        let first = operators.first().ok_or_else(|| Error::invalid("empty Kraus set"))?;
        let (m, d) = (first.rows(), first.cols());
        if operators.iter().any(|k| k.rows() != m || k.cols() != d) {
            return Err(Error::invalid("Kraus operators have different shapes"));
        }
        Ok(KrausSet { d, d_out: m, operators })
    }

    pub fn apply(&self, a: &ComplexMatrix) -> Result<ComplexMatrix> {
        if a.rows() != self.d || a.cols() != self.d {
            return Err(Error::invalid("Kraus apply: input has the wrong size"));
        }
        let mut out = ComplexMatrix::zeros(self.d_out, self.d_out);
        for k in &self.operators {
            out += &k.matmul(a).matmul(&k.adjoint());
        }
        Ok(out)
    }

    /// `‖Σ K K* − I‖`.
    pub fn unital_defect(&self) -> f64 {
        let mut s = ComplexMatrix::zeros(self.d_out, self.d_out);
        for k in &self.operators {
            s += &k.matmul(&k.adjoint());
        }
        op_norm(&(&s - &ComplexMatrix::identity(self.d_out)))
    }

    /// A random unital Kraus family: Ginibre operators `G_α` rescaled to
    /// `S^{-1/2} G_α` with `S = Σ G_α G_α*`.
    pub fn random_unital(rng: &mut CounterRng, d: usize, count: usize) -> Self {
        let raw: Vec<ComplexMatrix> = (0..count).map(|_| rng.ginibre(d)).collect();
        let mut s = ComplexMatrix::zeros(d, d);
        for g in &raw {
            s += &g.matmul(&g.adjoint());
        }
        let inv_sqrt =
            herm_eig(&s.hermitian_part()).expect("Gram sum is Hermitian").reconstruct_with(|l| 1.0 / l.sqrt());
        let operators = raw.iter().map(|g| inv_sqrt.matmul(g)).collect();
        KrausSet { d, d_out: d, operators }
    }
}

/// `C = Σ_α v_α v_α*` with `v_α = Σ_i e_i ⊗ K_α e_i`.
pub fn choi_from_kraus(k: &KrausSet) -> ChoiMatrix {
    let (d, m) = (k.d, k.d_out);
    let mut c = ComplexMatrix::zeros(d * m, d * m);
    for op in &k.operators {
        let v: Vec<_> = (0..d * m).map(|idx| op[(idx % m, idx / m)]).collect();
        for (a, va) in v.iter().enumerate() {
            if *va == ZERO {
                continue;
            }
            for (b, vb) in v.iter().enumerate() {
                c[(a, b)] += va * vb.conj();
            }
        }
    }
    ChoiMatrix { d, d_out: m, c: c.hermitian_part() }
}

/// Kraus operators from the eigendecomposition of the Choi matrix.
pub fn kraus_from_choi(c: &ChoiMatrix) -> Result<KrausSet> {
    let (d, m) = (c.d, c.d_out);
    let eig = herm_eig(&c.c)?;
    let trace = c.c.trace().re.abs().max(f64::MIN_POSITIVE);
    if eig.min_value() < -UCP_TOL * trace.max(1.0) {
        return Err(Error::NotCompletelyPositive { min_eigenvalue: eig.min_value() });
    }
    let mut operators = Vec::new();
    for (idx, &lambda) in eig.values.iter().enumerate() {
        if lambda <= KRAUS_RANK_TOL * trace {
            continue;
        }
        let s = lambda.sqrt();
        operators.push(ComplexMatrix::from_fn(m, d, |k, i| eig.vectors[(i * m + k, idx)] * s));
    }
    if operators.is_empty() {
        operators.push(ComplexMatrix::zeros(m, d));
    }
    Ok(KrausSet { d, d_out: m, operators })
}

/// `Φ(a) = V* (a ⊗ I_r) V` with `V: C^m → C^d ⊗ C^r`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StinespringDilation {
    /// Input dimension; σ represents `M_d`.
    pub d: usize,
    /// Dimension of the space `V` is defined on.
    pub d_out: usize,
    pub r: usize,
    pub v: ComplexMatrix,
    pub minimal: bool,
}

impl StinespringDilation {
    /// Wraps an explicit isometry `V: C^m → C^d ⊗ C^r`.
    pub fn from_isometry(d: usize, r: usize, v: ComplexMatrix) -> Result<Self> {
        if d == 0 || r == 0 || v.rows() != d * r {
            return Err(Error::invalid("dilation: V must have d*r rows"));
        }
        let defect = (&v.adjoint_mul(&v) - &ComplexMatrix::identity(v.cols())).max_abs();
        if defect > UCP_PRECONDITION_TOL {
            return Err(Error::NotIsometry);
        }
        let minimal = is_minimal(d, r, &v);
        Ok(StinespringDilation { d, d_out: v.cols(), r, v, minimal })
    }

    /// `σ(a) = a ⊗ I_r`.
    pub fn sigma(&self, a: &ComplexMatrix) -> ComplexMatrix {
        kron(a, &ComplexMatrix::identity(self.r))
    }

    /// `V* σ(a) V`.
    pub fn compress(&self, a: &ComplexMatrix) -> ComplexMatrix {
        self.v.adjoint_mul(&self.sigma(a).matmul(&self.v))
    }

    pub fn isometry_defect(&self) -> f64 {
        (&self.v.adjoint_mul(&self.v) - &ComplexMatrix::identity(self.d_out)).max_abs()
    }
}

fn is_minimal(d: usize, r: usize, v: &ComplexMatrix) -> bool {
    let n = d * r;
    let mut span: Vec<Vec<num_complex::Complex64>> = Vec::new();
    'outer: for i in 0..d {
        for j in 0..d {
            let s = kron(&ComplexMatrix::unit(d, i, j), &ComplexMatrix::identity(r)).matmul(v);
            for col in 0..v.cols() {
                crate::linalg::gram_schmidt_extend(&mut span, &s.column(col), 1e-9);
                if span.len() == n {
                    break 'outer;
                }
            }
        }
    }
    span.len() == n
}

/// Stinespring dilation with `V = Σ_α K_α* ⊗ e_α`, built from the Kraus
/// operators of `c`. Since those are linearly independent the dilation is
/// minimal; the flag is nevertheless computed by a rank test.
pub fn stinespring(c: &ChoiMatrix) -> Result<StinespringDilation> {
    c.require_ucp()?;
    let k = kraus_from_choi(c)?;
    let (d, m, r) = (k.d, k.d_out, k.operators.len());
    let mut v = ComplexMatrix::zeros(d * r, m);
    for (alpha, op) in k.operators.iter().enumerate() {
        for i in 0..d {
            for xi in 0..m {
                v[(i * r + alpha, xi)] = op[(xi, i)].conj();
            }
        }
    }
    let minimal = is_minimal(d, r, &v);
    Ok(StinespringDilation { d, d_out: m, r, v, minimal })
}

#[derive(Debug, Clone, Serialize)]
pub struct SchwarzDefects {
    /// `Φ(a*a) − Φ(a)*Φ(a)`.
    pub left: ComplexMatrix,
    /// `Φ(aa*) − Φ(a)Φ(a)*`.
    pub right: ComplexMatrix,
    pub left_norm: f64,
    pub right_norm: f64,
}

pub fn schwarz_defects(c: &ChoiMatrix, a: &ComplexMatrix) -> Result<SchwarzDefects> {
    c.require_ucp()?;
    let pa = c.apply(a)?;
    let left = (&c.apply(&a.adjoint_mul(a))? - &pa.adjoint_mul(&pa)).hermitian_part();
    let right = (&c.apply(&a.matmul(&a.adjoint()))? - &pa.matmul(&pa.adjoint())).hermitian_part();
    Ok(SchwarzDefects { left_norm: op_norm(&left), right_norm: op_norm(&right), left, right })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CoinvarianceBlock {
    /// `‖P σ(S) (1 − P)‖` with `P = VV*` the projection onto `VH`.
    pub x_block_norm: f64,
    /// `‖V* σ(S) V − ρ(S)‖`, how far `rho_s` is from the compressed corner.
    pub corner_mismatch: f64,
}

/// Off-diagonal block of `σ(S)` in the decomposition `VH ⊕ (VH)⊥`.
pub fn coinvariance_block(
    dil: &StinespringDilation,
    s_img: &ComplexMatrix,
    rho_s: &ComplexMatrix,
) -> Result<CoinvarianceBlock> {
    let n = dil.d * dil.r;
    if s_img.rows() != n || s_img.cols() != n {
        return Err(Error::invalid(format!("coinvariance_block: σ(S) must be {n}x{n}")));
    }
    if rho_s.rows() != dil.d_out || rho_s.cols() != dil.d_out {
        return Err(Error::invalid(format!("coinvariance_block: ρ(S) must be {0}x{0}", dil.d_out)));
    }
    let p = dil.v.matmul(&dil.v.adjoint());
    let complement = &ComplexMatrix::identity(n) - &p;
    let x = p.matmul(s_img).matmul(&complement);
    let corner = dil.v.adjoint_mul(&s_img.matmul(&dil.v));
    Ok(CoinvarianceBlock { x_block_norm: op_norm(&x), corner_mismatch: op_norm(&(&corner - rho_s)) })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn depolarizing() -> ChoiMatrix {
        ChoiMatrix::from_map(2, 2, |a| ComplexMatrix::identity(2).scale(a.trace() * 0.5)).unwrap()
    }

    fn pauli_x() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])
    }

    #[test]
    fn identity_map_choi() {
        let c = choi_from_kraus(&KrausSet::new(vec![ComplexMatrix::identity(2)]).unwrap());
        assert_eq!(c, ChoiMatrix::identity(2));
        assert!((c.matrix().trace().re - 2.0).abs() < 1e-15);
        let eig = herm_eig(c.matrix()).unwrap();
        assert!((eig.values[0] - 2.0).abs() < 1e-12 && eig.values[1].abs() < 1e-12);
        let a = CounterRng::new(1).ginibre(2);
        assert!((&c.apply(&a).unwrap() - &a).max_abs() < 1e-15);
    }

    #[test]
    fn apply_matches_partial_trace_formula() {
        let mut rng = CounterRng::new(2);
        let k = KrausSet::random_unital(&mut rng, 3, 2);
        let c = choi_from_kraus(&k);
        let a = rng.ginibre(3);
        let direct = c.apply(&a).unwrap();
        let via_trace =
            partial_trace_first(&c.matrix().matmul(&kron(&a.transpose(), &ComplexMatrix::identity(3))), 3).unwrap();
        assert!((&direct - &via_trace).max_abs() < 1e-12);
        assert!((&direct - &k.apply(&a).unwrap()).max_abs() < 1e-10);
        assert!((&c.apply(&ComplexMatrix::identity(3)).unwrap() - &ComplexMatrix::identity(3)).max_abs() < 1e-9);
    }

    #[test]
    fn depolarizing_examples() {
        let c = depolarizing();
        assert_eq!(kraus_from_choi(&c).unwrap().operators.len(), 4);
        assert!(c.apply(&pauli_x()).unwrap().max_abs() < 1e-15);
        let st = stinespring(&c).unwrap();
        assert_eq!(st.r, 4);
        assert_eq!(st.v.rows(), 8);
        assert!(st.minimal);
        let sd = schwarz_defects(&c, &pauli_x()).unwrap();
        assert!((&sd.left - &ComplexMatrix::identity(2)).max_abs() < 1e-12);
        assert!((sd.left_norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn compression_to_one_dimension() {
        let v0 = ComplexMatrix::from_real_rows(&[&[1.0], &[0.0]]);
        let c = ChoiMatrix::from_map(2, 1, |a| v0.adjoint_mul(&a.matmul(&v0))).unwrap();
        let k = kraus_from_choi(&c).unwrap();
        assert_eq!(k.operators.len(), 1);
        let want = ComplexMatrix::from_real_rows(&[&[1.0, 0.0]]);
        let phase = k.operators[0][(0, 0)];
        assert!((&k.operators[0] - &want.scale(phase)).max_abs() < 1e-12);
        assert!((phase.norm() - 1.0).abs() < 1e-12);

        let st = stinespring(&c).unwrap();
        assert_eq!(st.r, 1);
        let ph = st.v[(0, 0)];
        assert!((&st.v - &v0.scale(ph)).max_abs() < 1e-12);

        // Φ(E_01 E_10) = 1 while Φ(E_01) = 0
        let e01 = ComplexMatrix::unit(2, 0, 1);
        let sd = schwarz_defects(&c, &e01).unwrap();
        assert!((sd.right_norm - 1.0).abs() < 1e-12);
        assert!(sd.left_norm < 1e-12);
        let sd = schwarz_defects(&c, &e01.adjoint()).unwrap();
        assert!((sd.left_norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ucp_defects() {
        assert_eq!(ChoiMatrix::identity(3).validate_ucp(), UcpDefects { cp_defect: 0.0, unital_defect: 0.0 });
        let transpose = ChoiMatrix::from_map(2, 2, |a| a.transpose()).unwrap();
        assert!((transpose.validate_ucp().cp_defect - 1.0).abs() < 1e-12);
        let half = choi_from_kraus(&KrausSet::new(vec![ComplexMatrix::identity(2).scale_real(0.5)]).unwrap());
        assert!((half.validate_ucp().unital_defect - 0.75).abs() < 1e-12);
        assert!(matches!(kraus_from_choi(&transpose), Err(Error::NotCompletelyPositive { .. })));
        assert!(matches!(stinespring(&half), Err(Error::NotUcp { .. })));
        assert!(matches!(schwarz_defects(&half, &pauli_x()), Err(Error::NotUcp { .. })));
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(ChoiMatrix::new(2, ComplexMatrix::zeros(3, 3)).is_err());
        assert!(ChoiMatrix::identity(2).apply(&ComplexMatrix::zeros(3, 3)).is_err());
        let nonherm = ComplexMatrix::unit(4, 0, 1);
        assert!(ChoiMatrix::new(2, nonherm).is_err());
    }

    #[test]
    fn trivial_dilation_has_no_off_diagonal_block() {
        let st = stinespring(&ChoiMatrix::identity(3)).unwrap();
        assert_eq!(st.r, 1);
        assert!(st.minimal);
        let s = CounterRng::new(4).ginibre(3);
        let blk = coinvariance_block(&st, &st.sigma(&s), &s).unwrap();
        assert!(blk.x_block_norm < 1e-12 && blk.corner_mismatch < 1e-12);
        assert!(coinvariance_block(&st, &ComplexMatrix::zeros(2, 2), &s).is_err());
    }

    #[test]
    fn depolarizing_block_is_large() {
        let st = stinespring(&depolarizing()).unwrap();
        let s = ComplexMatrix::unit(2, 0, 1);
        let rho = depolarizing().apply(&s).unwrap();
        let blk = coinvariance_block(&st, &st.sigma(&s), &rho).unwrap();
        assert!(blk.x_block_norm > 0.1);
        assert!(blk.corner_mismatch < 1e-12);
    }

    #[test]
    fn block_norm_squared_equals_schwarz_defect() {
        // X X* = V*σ(S)(1 − VV*)σ(S)*V = Φ(SS*) − Φ(S)Φ(S)*
        let mut rng = CounterRng::new(21);
        for trial in 0..50 {
            let d = 2 + trial % 3;
            let k = KrausSet::random_unital(&mut rng, d, 1 + trial % 3);
            let c = choi_from_kraus(&k);
            let st = stinespring(&c).unwrap();
            let s = rng.ginibre(d);
            let blk = coinvariance_block(&st, &st.sigma(&s), &c.apply(&s).unwrap()).unwrap();
            let sd = schwarz_defects(&c, &s.adjoint()).unwrap();
            assert!((blk.x_block_norm.powi(2) - sd.left_norm).abs() < 1e-9 * (1.0 + sd.left_norm));
        }
    }

    #[test]
    fn kadison_schwarz_and_roundtrips() {
        let mut rng = CounterRng::new(99);
        for trial in 0..1000 {
            let d = 1 + trial % 4;
            let k = KrausSet::random_unital(&mut rng, d, 1 + trial % 5);
            let c = choi_from_kraus(&k);
            let a = rng.ginibre(d);
            let sd = schwarz_defects(&c, &a).unwrap();
            assert!(herm_eig(&sd.left).unwrap().min_value() >= -1e-8);
            assert!(herm_eig(&sd.right).unwrap().min_value() >= -1e-8);
            if trial % 5 == 0 {
                let st = stinespring(&c).unwrap();
                assert!(st.isometry_defect() <= 1e-9);
                for i in 0..d {
                    for j in 0..d {
                        let e = ComplexMatrix::unit(d, i, j);
                        let err = (&c.apply(&e).unwrap() - &st.compress(&e)).max_abs();
                        assert!(err <= 1e-8, "trial {trial}: {err}");
                    }
                }
                let back = choi_from_kraus(&kraus_from_choi(&c).unwrap());
                assert!((back.matrix() - c.matrix()).max_abs() <= 1e-8);
            }
        }
    }

    #[test]
    fn serde_roundtrip() {
        let c = depolarizing();
        let text = serde_json::to_string(&c).unwrap();
        assert!(text.contains("\"convention\":\"input-first\""));
        let back: ChoiMatrix = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
        let bad = text.replace("input-first", "output-first");
        assert!(serde_json::from_str::<ChoiMatrix>(&bad).is_err());
    }
}
