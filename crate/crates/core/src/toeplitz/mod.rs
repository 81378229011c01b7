//! Exact arithmetic for Toeplitz operators with Laurent polynomial symbols
//! plus finitely supported corrections, acting on `ℓ²(ℕ)`.
//!
//! An element is `T(p) + K` where `T(p)_ij = c_{i−j}` for `i, j ≥ 0` and `K`
//! is a finite matrix living in the `N x N` corner. Products stay in this
//! class because `T(p)T(q) − T(pq)` has entries
//! `−Σ_{k<0} p_{i−k} q_{k−j}`, which vanish outside
//! `[0, deg⁺ p) x [0, deg⁻ q)`.

mod gaussian;
pub mod script;

use std::collections::BTreeMap;

use num_traits::Zero;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::linalg::{op_norm, ComplexMatrix};

pub use gaussian::{parse_rational, rational_string, rational_to_f64, GaussianRational};

/// Laurent polynomial `Σ c_k z^k` with no stored zero coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LaurentPoly {
    coeffs: BTreeMap<i64, GaussianRational>,
}

impl LaurentPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(0, GaussianRational::one())
    }

    pub fn monomial(k: i64, c: GaussianRational) -> Self {
        let mut p = Self::zero();
        p.add_term(k, c);
        p
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (i64, GaussianRational)>) -> Self {
        let mut p = Self::zero();
        for (k, c) in terms {
            p.add_term(k, c);
        }
        p
    }

    fn add_term(&mut self, k: i64, c: GaussianRational) {
        if c.is_zero() {
            return;
        }
        let slot = self.coeffs.entry(k).or_insert_with(GaussianRational::zero);
        *slot = &*slot + &c;
        if slot.is_zero() {
            self.coeffs.remove(&k);
        }
    }

    pub fn coeff(&self, k: i64) -> GaussianRational {
        self.coeffs.get(&k).cloned().unwrap_or_else(GaussianRational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &GaussianRational)> {
        self.coeffs.iter().map(|(&k, c)| (k, c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `max(0, highest degree)`.
    pub fn positive_degree(&self) -> usize {
        self.coeffs.keys().next_back().map_or(0, |&k| k.max(0) as usize)
    }

    /// `max(0, −lowest degree)`.
    pub fn negative_degree(&self) -> usize {
        self.coeffs.keys().next().map_or(0, |&k| (-k).max(0) as usize)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (a, ca) in &self.coeffs {
            for (b, cb) in &other.coeffs {
                out.add_term(a + b, ca * cb);
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, c) in &other.coeffs {
            out.add_term(*k, c.clone());
        }
        out
    }

    pub fn scale(&self, c: &GaussianRational) -> Self {
        Self::from_terms(self.coeffs.iter().map(|(&k, v)| (k, v * c)))
    }

    /// `(p*)_k = conj(c_{−k})`.
    pub fn adj(&self) -> Self {
        Self::from_terms(self.coeffs.iter().map(|(&k, c)| (-k, c.conj())))
    }
}

type Tail = BTreeMap<(usize, usize), GaussianRational>;

fn tail_add(tail: &mut Tail, i: usize, j: usize, v: GaussianRational) {
    if v.is_zero() {
        return;
    }
    let slot = tail.entry((i, j)).or_insert_with(GaussianRational::zero);
    *slot = &*slot + &v;
    if slot.is_zero() {
        tail.remove(&(i, j));
    }
}

/// `T(symbol) + tail`, with the tail supported in `[0, n)²`.
#[derive(Debug, Clone, Default)]
pub struct ToeplitzElement {
    symbol: LaurentPoly,
    tail: Tail,
    n: usize,
}

impl PartialEq for ToeplitzElement {
    fn eq(&self, other: &Self) -> bool {
        self.symbol == other.symbol && self.tail == other.tail
    }
}

impl Eq for ToeplitzElement {}

impl ToeplitzElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn identity() -> Self {
        Self::from_symbol(LaurentPoly::one())
    }

    /// The unilateral shift `e_n ↦ e_{n+1}`, symbol `z`.
    pub fn shift() -> Self {
        Self::from_symbol(LaurentPoly::monomial(1, GaussianRational::one()))
    }

    pub fn from_symbol(symbol: LaurentPoly) -> Self {
        ToeplitzElement { symbol, tail: Tail::new(), n: 0 }
    }

    /// `E_ij` as a pure tail.
    pub fn matrix_unit(i: usize, j: usize) -> Self {
        Self::from_tail([((i, j), GaussianRational::one())])
    }

    pub fn from_tail(entries: impl IntoIterator<Item = ((usize, usize), GaussianRational)>) -> Self {
        let mut tail = Tail::new();
        let mut n = 0;
        for ((i, j), v) in entries {
            n = n.max(i + 1).max(j + 1);
            tail_add(&mut tail, i, j, v);
        }
        ToeplitzElement { symbol: LaurentPoly::zero(), tail, n }
    }

    pub fn symbol(&self) -> &LaurentPoly {
        &self.symbol
    }

    pub fn tail(&self) -> impl Iterator<Item = ((usize, usize), &GaussianRational)> {
        self.tail.iter().map(|(&k, v)| (k, v))
    }

    /// Tracked support bound of the tail.
    pub fn support_bound(&self) -> usize {
        self.n
    }

    pub fn is_pure_tail(&self) -> bool {
        self.symbol.is_zero()
    }

    pub fn is_zero(&self) -> bool {
        self.symbol.is_zero() && self.tail.is_empty()
    }

    /// Largest `|i − j|` over the band of the symbol.
    pub fn bandwidth(&self) -> usize {
        self.symbol.positive_degree().max(self.symbol.negative_degree())
    }

    pub fn entry(&self, i: usize, j: usize) -> GaussianRational {
        let mut v = self.symbol.coeff(i as i64 - j as i64);
        if let Some(t) = self.tail.get(&(i, j)) {
            v = &v + t;
        }
        v
    }

    pub fn mul(&self, other: &Self) -> Self {
        let p = &self.symbol;
        let q = &other.symbol;
        let mut tail = Tail::new();

        for (a, pa) in p.terms().filter(|(a, _)| *a >= 1) {
            for (b, qb) in q.terms().filter(|(b, _)| *b <= -1) {
                for k in (-a).max(b)..0 {
                    let v = -(pa * qb);
                    tail_add(&mut tail, (a + k) as usize, (k - b) as usize, v);
                }
            }
        }
        for (&(k, j), v) in &other.tail {
            for (a, pa) in p.terms() {
                let i = k as i64 + a;
                if i >= 0 {
                    tail_add(&mut tail, i as usize, j, pa * v);
                }
            }
        }
        for (&(i, k), v) in &self.tail {
            for (b, qb) in q.terms() {
                let j = k as i64 - b;
                if j >= 0 {
                    tail_add(&mut tail, i, j as usize, v * qb);
                }
            }
        }
        for (&(i, k), v) in &self.tail {
            for (&(k2, j), w) in other.tail.range((k, 0)..(k + 1, 0)) {
                debug_assert_eq!(k, k2);
                tail_add(&mut tail, i, j, v * w);
            }
        }

        let mut n = p.positive_degree().max(q.negative_degree());
        if !other.tail.is_empty() {
            n = n.max(other.n + p.positive_degree());
        }
        if !self.tail.is_empty() {
            n = n.max(self.n + q.negative_degree());
        }
        debug_assert!(tail.keys().all(|&(i, j)| i < n && j < n));
        ToeplitzElement { symbol: p.mul(q), tail, n }
    }

    pub fn adj(&self) -> Self {
        let tail = self.tail.iter().map(|(&(i, j), v)| ((j, i), v.conj())).collect();
        ToeplitzElement { symbol: self.symbol.adj(), tail, n: self.n }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut tail = self.tail.clone();
        for (&(i, j), v) in &other.tail {
            tail_add(&mut tail, i, j, v.clone());
        }
        ToeplitzElement { symbol: self.symbol.add(&other.symbol), tail, n: self.n.max(other.n) }
    }

    pub fn scale(&self, c: &GaussianRational) -> Self {
        let mut tail = Tail::new();
        for (&(i, j), v) in &self.tail {
            tail_add(&mut tail, i, j, v * c);
        }
        ToeplitzElement { symbol: self.symbol.scale(c), tail, n: self.n }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-GaussianRational::one()))
    }

    /// `P_n A P_n` as a floating matrix.
    pub fn truncate(&self, n: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(n, n, |i, j| self.entry(i, j).to_complex())
    }

    /// Frobenius and operator norms of a pure-tail element.
    pub fn tail_norms(&self) -> Option<TailNorms> {
        if !self.is_pure_tail() {
            return None;
        }
        let frobenius_squared = self.tail.values().fold(num_rational::BigRational::zero(), |acc, v| acc + v.norm_sqr());
        let n = self.n.max(1);
        Some(TailNorms {
            frobenius_squared: gaussian::rational_string(&frobenius_squared),
            frobenius: gaussian::rational_to_f64(&frobenius_squared).sqrt(),
            operator: op_norm(&self.truncate(n)),
        })
    }

    pub fn to_json(&self) -> Value {
        let symbol: serde_json::Map<String, Value> =
            self.symbol.terms().map(|(k, c)| (k.to_string(), c.to_json())).collect();
        let tail: Vec<Value> = self.tail.iter().map(|(&(i, j), v)| json!([i, j, v.to_json()])).collect();
        json!({ "symbol": symbol, "tail": tail, "support": self.n })
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct TailNorms {
    /// Exact squared Frobenius norm as `"p/q"`.
    pub frobenius_squared: String,
    pub frobenius: f64,
    pub operator: f64,
}

#[derive(Debug, Clone)]
pub struct EssentialUnitarity {
    pub essentially_unitary: bool,
    /// `(I − A*A, I − AA*)`, both pure tails when `essentially_unitary`.
    pub witnesses: Option<(ToeplitzElement, ToeplitzElement)>,
}

/// Whether `p p* = 1` exactly, in which case `I − A*A` and `I − AA*` are
/// finitely supported and returned.
pub fn is_essentially_unitary(a: &ToeplitzElement) -> EssentialUnitarity {
    let unimodular = a.symbol.mul(&a.symbol.adj()) == LaurentPoly::one();
    if !unimodular {
        return EssentialUnitarity { essentially_unitary: false, witnesses: None };
    }
    let one = ToeplitzElement::identity();
    let left = one.sub(&a.adj().mul(a));
    let right = one.sub(&a.mul(&a.adj()));
    debug_assert!(left.is_pure_tail() && right.is_pure_tail());
    EssentialUnitarity { essentially_unitary: true, witnesses: Some((left, right)) }
}

#[derive(Debug, Clone)]
pub struct CompressionOutcome {
    pub probe: ToeplitzElement,
    /// `V* a V`.
    pub image: ToeplitzElement,
    /// `V* a V − a`.
    pub difference: ToeplitzElement,
    pub agrees: bool,
    pub difference_norms: Option<TailNorms>,
}

#[derive(Debug, Clone)]
pub struct CompressionReport {
    /// `Φ(V) = V` and `Φ(V*) = V*`.
    pub agrees_on_isometry: bool,
    pub outcomes: Vec<CompressionOutcome>,
}

/// Evaluates the UCP map `Φ(a) = V* a V` on each probe, exactly.
pub fn compression_counterexample(v: &ToeplitzElement, probes: &[ToeplitzElement]) -> Result<CompressionReport> {
    let vs = v.adj();
    if vs.mul(v) != ToeplitzElement::identity() {
        return Err(Error::NotIsometry);
    }
    let phi = |a: &ToeplitzElement| vs.mul(a).mul(v);
    let agrees_on_isometry = phi(v) == *v && phi(&vs) == vs;
    let outcomes = probes
        .iter()
        .map(|a| {
            let image = phi(a);
            let difference = image.sub(a);
            CompressionOutcome {
                probe: a.clone(),
                agrees: difference.is_zero(),
                difference_norms: difference.tail_norms(),
                image,
                difference,
            }
        })
        .collect();
    Ok(CompressionReport { agrees_on_isometry, outcomes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::CounterRng;

    fn s() -> ToeplitzElement {
        ToeplitzElement::shift()
    }

    fn gr(re: i64, im: i64) -> GaussianRational {
        GaussianRational::from_ints(re, im)
    }

    #[test]
    fn shift_identities() {
        let one = ToeplitzElement::identity();
        assert_eq!(s().adj().mul(&s()), one);
        let p = s().mul(&s().adj());
        assert_eq!(p, one.sub(&ToeplitzElement::matrix_unit(0, 0)));
        assert_eq!(p.tail().count(), 1);
        let s2 = s().mul(&s());
        assert_eq!(s2, ToeplitzElement::from_symbol(LaurentPoly::monomial(2, GaussianRational::one())));
        assert!(s2.tail().next().is_none());
    }

    #[test]
    fn adjoint_and_sums() {
        let sa = s().adj();
        assert_eq!(sa.symbol().terms().map(|(k, _)| k).collect::<Vec<_>>(), vec![-1]);
        assert!(s().add(&s().scale(&gr(-1, 0))).is_zero());
        let q = ToeplitzElement::identity().sub(&s().mul(&s().adj()));
        assert_eq!(q.adj(), q);
    }

    #[test]
    fn essential_unitarity() {
        let r = is_essentially_unitary(&s());
        assert!(r.essentially_unitary);
        let (left, right) = r.witnesses.unwrap();
        assert!(left.is_zero());
        assert_eq!(right, ToeplitzElement::matrix_unit(0, 0));

        let c = GaussianRational::parse("3/5", "4/5").unwrap();
        let mono = ToeplitzElement::from_symbol(LaurentPoly::monomial(2, c));
        assert!(is_essentially_unitary(&mono).essentially_unitary);

        let zp1 = ToeplitzElement::from_symbol(LaurentPoly::from_terms([(1, gr(1, 0)), (0, gr(1, 0))]));
        assert!(!is_essentially_unitary(&zp1).essentially_unitary);
    }

    #[test]
    fn shift_compression() {
        let probes = [s(), s().adj(), s().mul(&s().adj()), ToeplitzElement::identity()];
        let rep = compression_counterexample(&s(), &probes).unwrap();
        assert!(rep.agrees_on_isometry);
        let flags: Vec<bool> = rep.outcomes.iter().map(|o| o.agrees).collect();
        assert_eq!(flags, vec![true, true, false, true]);
        let ssa = &rep.outcomes[2];
        assert_eq!(ssa.image, ToeplitzElement::identity());
        assert_eq!(ssa.difference, ToeplitzElement::matrix_unit(0, 0));
        let norms = ssa.difference_norms.as_ref().unwrap();
        assert_eq!(norms.operator, 1.0);
        assert_eq!(norms.frobenius_squared, "1/1");
        assert!(matches!(compression_counterexample(&s().adj(), &probes), Err(Error::NotIsometry)));
    }

    #[test]
    fn truncations() {
        let t = s().truncate(3);
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j + 1 { 1.0 } else { 0.0 };
                assert_eq!(t[(i, j)].re, want);
                assert_eq!(t[(i, j)].im, 0.0);
            }
        }
        let q = ToeplitzElement::identity().sub(&s().mul(&s().adj()));
        assert_eq!(q.truncate(3), ComplexMatrix::unit(3, 0, 0));
        assert_eq!(ToeplitzElement::zero().truncate(4), ComplexMatrix::zeros(4, 4));
    }

    fn small_rational(rng: &mut CounterRng) -> GaussianRational {
        let mut pick = || {
            let num = (rng.next_u64() % 7) as i64 - 3;
            let den = 1 + (rng.next_u64() % 3) as i64;
            (num, den)
        };
        let (a, b) = pick();
        let (c, e) = pick();
        GaussianRational::from_fractions(a, b, c, e)
    }

    fn random_element(rng: &mut CounterRng) -> ToeplitzElement {
        let terms: Vec<_> = (0..3).map(|_| ((rng.next_u64() % 7) as i64 - 3, small_rational(rng))).collect();
        let mut e = ToeplitzElement::from_symbol(LaurentPoly::from_terms(terms));
        let entries = (rng.next_u64() % 4) as usize;
        let tail: Vec<_> = (0..entries)
            .map(|_| (((rng.next_u64() % 4) as usize, (rng.next_u64() % 4) as usize), small_rational(rng)))
            .collect();
        e = e.add(&ToeplitzElement::from_tail(tail));
        e
    }

    #[test]
    fn ring_and_star_laws() {
        let mut rng = CounterRng::new(31);
        for _ in 0..200 {
            let a = random_element(&mut rng);
            let b = random_element(&mut rng);
            let c = random_element(&mut rng);
            assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
            assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
            assert_eq!(a.add(&b).mul(&c), a.mul(&c).add(&b.mul(&c)));
            assert_eq!(a.mul(&b).adj(), b.adj().mul(&a.adj()));
            assert_eq!(a.adj().adj(), a);
        }
    }

    #[test]
    fn truncation_consistency() {
        let mut rng = CounterRng::new(32);
        for _ in 0..100 {
            let a = random_element(&mut rng);
            let b = random_element(&mut rng);
            let n = 6;
            let m = a.bandwidth() + b.bandwidth() + a.support_bound().max(b.support_bound());
            let big = a.truncate(n + m).matmul(&b.truncate(n + m));
            let prod = a.mul(&b).truncate(n);
            for i in 0..n {
                for j in 0..n {
                    assert!((prod[(i, j)] - big[(i, j)]).norm() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn semicommutator_support() {
        let mut rng = CounterRng::new(33);
        for _ in 0..40 {
            let mp = 1 + (rng.next_u64() % 3) as i64;
            let mq = 1 + (rng.next_u64() % 3) as i64;
            let p = LaurentPoly::from_terms((-mp..=mp).map(|k| (k, small_rational(&mut rng))));
            let q = LaurentPoly::from_terms((-mq..=mq).map(|k| (k, small_rational(&mut rng))));
            let tp = ToeplitzElement::from_symbol(p.clone());
            let tq = ToeplitzElement::from_symbol(q.clone());
            let n = 50;
            let dense = tp.truncate(n + 10).matmul(&tq.truncate(n + 10));
            let tpq = ToeplitzElement::from_symbol(p.mul(&q)).truncate(n);
            for i in 0..n {
                for j in 0..n {
                    let corr = dense[(i, j)] - tpq[(i, j)];
                    if i as i64 >= mp || j as i64 >= mq {
                        assert!(corr.norm() < 1e-12, "({i},{j}) {corr}");
                    }
                }
            }
            let prod = tp.mul(&tq);
            assert!(prod.tail().all(|((i, j), _)| (i as i64) < mp && (j as i64) < mq));
        }
    }
}
