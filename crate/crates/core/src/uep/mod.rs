//! Search for unital completely positive maps `Φ: M_d → M_d` that agree with
//! the identity on a generator set `G` but move some element of the algebra
//! generated by `G`.
//!
//! A UCP map on the generated algebra extends to all of `M_d`, so searching
//! Choi matrices on `M_d` pinned on `G` and measuring deviations only on
//! probes from the generated algebra loses nothing: the identity has the
//! unique extension property exactly when every feasible Choi matrix acts as
//! the identity on the algebra.
//!
//! The feasible set is a spectrahedron that contains the identity map, whose
//! Choi matrix has rank one, so it usually has empty interior. The solver
//! first shrinks it to its minimal face by facial reduction, then maximizes
//! random linear witnesses `Re⟨W, Φ(a)⟩` over that face with ADMM. The
//! maximized witness values lower-bound the largest possible deviation.

mod admm;
pub mod face;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cpmaps::{schwarz_defects, ChoiMatrix, UcpDefects};
use crate::error::{Error, Result};
use crate::linalg::{op_norm, ComplexMatrix};
use crate::opsys::{default_max_degree, generate_algebra, AlgebraBasis, GeneratorSet};
use crate::rng::CounterRng;

pub use face::ReductionStep;

pub const DEFAULT_TOL: f64 = 1e-7;
pub const DEFAULT_MAX_ITER: usize = 20_000;
pub const DEFAULT_WITNESSES: usize = 8;
/// Certificates must satisfy UCP and agreement conditions to this accuracy.
pub const CERTIFICATE_TOL: f64 = 1e-7;
/// Relative distance from the generated algebra below which a probe counts
/// as a member.
pub const MEMBERSHIP_TOL: f64 = 1e-9;
const ADAPTIVE_ROUNDS: usize = 3;
/// Witnesses whose objective provably varies by less than this fraction of
/// `tol` over the feasible set are not optimized.
const FLAT_FRACTION: f64 = 1e-3;
const EXTENSION_FREEDOM: &str = "extension freedom, not UEP violation";

#[derive(Debug, Clone)]
pub struct UepProblem {
    pub d: usize,
    pub generators: Vec<ComplexMatrix>,
    /// Defaults to a Hermitian basis of the generated algebra.
    pub probes: Option<Vec<ComplexMatrix>>,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub witnesses: usize,
    pub pin_adjoints: bool,
}

impl UepProblem {
    pub fn new(d: usize, generators: Vec<ComplexMatrix>) -> Result<Self> {
        let p = UepProblem {
            d,
            generators,
            probes: None,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            seed: 0,
            witnesses: DEFAULT_WITNESSES,
            pin_adjoints: true,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_probes(mut self, probes: Vec<ComplexMatrix>) -> Self {
        self.probes = Some(probes);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::invalid("problem dimension must be positive"));
        }
        let square = |m: &ComplexMatrix| m.rows() == self.d && m.cols() == self.d && m.is_finite();
        if !self.generators.iter().all(square) {
            return Err(Error::invalid(format!("generators must be finite {0}x{0} matrices", self.d)));
        }
        if let Some(p) = &self.probes {
            if !p.iter().all(square) {
                return Err(Error::invalid(format!("probes must be finite {0}x{0} matrices", self.d)));
            }
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) || self.max_iter == 0 || self.witnesses == 0 {
            return Err(Error::invalid("tol, max_iter and witnesses must be positive"));
        }
        Ok(())
    }

    /// `G ∪ G*`, without repeating Hermitian generators.
    pub fn generators_and_adjoints(&self) -> Vec<ComplexMatrix> {
        let mut out = self.generators.clone();
        out.extend(self.generators.iter().filter(|g| !g.is_hermitian()).map(ComplexMatrix::adjoint));
        out
    }

    /// Matrices whose images are pinned: the unit, `G`, and `G*` when
    /// `pin_adjoints` is set.
    pub fn pinned(&self) -> Vec<ComplexMatrix> {
        let mut out = vec![ComplexMatrix::identity(self.d)];
        if self.pin_adjoints {
            out.extend(self.generators_and_adjoints());
        } else {
            out.extend(self.generators.iter().cloned());
        }
        out
    }

    pub fn algebra(&self) -> Result<AlgebraBasis> {
        if self.generators.is_empty() {
            let d = self.d;
            let unit = ComplexMatrix::identity(d).scale_real(1.0 / (d as f64).sqrt());
            return Ok(AlgebraBasis { d, basis: vec![unit], word_degree_reached: 0, stabilized: true });
        }
        let g = GeneratorSet { d: self.d, generators: self.generators.clone(), include_unit: true };
        generate_algebra(&g, default_max_degree(self.d))
    }
}

/// `problem.json` as read by the command line.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub d: usize,
    pub generators: Vec<ComplexMatrix>,
    #[serde(default)]
    pub probes: Option<Vec<ComplexMatrix>>,
    #[serde(default = "default_pin")]
    pub pin_adjoints: bool,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub max_iter: Option<usize>,
    #[serde(default)]
    pub witnesses: Option<usize>,
}

fn default_pin() -> bool {
    true
}

impl ProblemConfig {
    pub fn into_problem(self, seed: u64) -> Result<UepProblem> {
        let p = UepProblem {
            d: self.d,
            generators: self.generators,
            probes: self.probes,
            tol: self.tol.unwrap_or(DEFAULT_TOL),
            max_iter: self.max_iter.unwrap_or(DEFAULT_MAX_ITER),
            seed,
            witnesses: self.witnesses.unwrap_or(DEFAULT_WITNESSES),
            pin_adjoints: self.pin_adjoints,
        };
        p.validate()?;
        Ok(p)
    }
}

/// Affine constraints on the Choi matrix: unitality and `Φ(g) = g`.
#[derive(Debug, Clone, Serialize)]
pub struct ConstraintSystem {
    pub d: usize,
    /// Number of independent real equations.
    pub rank: usize,
    /// Real dimension of the Hermitian `d² x d²` matrices.
    pub full_dimension: usize,
    #[serde(skip)]
    pub pinned: Vec<ComplexMatrix>,
}

pub fn build_constraints(p: &UepProblem) -> Result<ConstraintSystem> {
    p.validate()?;
    let pinned = p.pinned();
    let face = face::Face::full(p.d, &pinned);
    // the identity map satisfies every pinning condition by construction, so
    // only rounding can make the system inconsistent
    let id = ChoiMatrix::identity(p.d);
    for g in &pinned {
        let r = (&id.apply(g)? - g).max_abs();
        if r > 1e-12 * (1.0 + g.max_abs()) {
            return Err(Error::Infeasible(format!("identity map violates a pinning by {r:.3e}")));
        }
    }
    let n = p.d * p.d;
    Ok(ConstraintSystem { d: p.d, rank: face.rank(), full_dimension: n * n, pinned })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    #[serde(rename = "Unique-evidence")]
    UniqueEvidence,
    ViolationFound,
    NonConverged,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeReport {
    pub index: usize,
    /// Largest witness value `Re⟨W, Φ(a) − a⟩ / ‖W‖` found.
    pub deviation: f64,
    pub witness_deviations: Vec<f64>,
    /// Frobenius distance of the probe from the generated algebra.
    pub projection_residual: f64,
    pub in_algebra: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct Residuals {
    pub affine: f64,
    pub psd: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificateResiduals {
    pub cp_defect: f64,
    pub unital_defect: f64,
    /// `max ‖Φ(g) − g‖` over `G ∪ G*`.
    pub agreement: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ViolationCertificate {
    pub choi: ChoiMatrix,
    pub probe: ComplexMatrix,
    /// `‖Φ(a) − a‖` in operator norm.
    pub deviation: f64,
    pub residuals: CertificateResiduals,
}

impl ViolationCertificate {
    /// Computes deviation and residuals for `choi` from scratch.
    pub fn assemble(p: &UepProblem, choi: ChoiMatrix, probe: ComplexMatrix) -> Result<Self> {
        let UcpDefects { cp_defect, unital_defect } = choi.validate_ucp();
        let agreement = agreement_residual(p, &choi)?;
        let deviation = op_norm(&(&choi.apply(&probe)? - &probe));
        Ok(ViolationCertificate {
            choi,
            probe,
            deviation,
            residuals: CertificateResiduals { cp_defect, unital_defect, agreement },
        })
    }
}

fn agreement_residual(p: &UepProblem, c: &ChoiMatrix) -> Result<f64> {
    let mut worst = 0.0f64;
    for g in p.generators_and_adjoints() {
        worst = worst.max(op_norm(&(&c.apply(&g)? - &g)));
    }
    Ok(worst)
}

#[derive(Debug, Clone, Serialize)]
pub struct FaceSummary {
    /// Dimension `r` of the face `{B Z B* : Z ⪰ 0}` after each step.
    pub dimensions: Vec<usize>,
    pub steps: Vec<ReductionStep>,
    /// Whether the feasible set is the identity map alone.
    pub singleton: bool,
    /// Constraint rank on the final face.
    pub face_rank: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct UepReport {
    pub status: Status,
    /// Uniqueness is only ever numerical evidence, never a proof.
    pub claim: &'static str,
    pub d: usize,
    pub seed: u64,
    pub tol: f64,
    pub constraint_rank: usize,
    pub full_dimension: usize,
    /// `full_dimension − constraint_rank`.
    pub rank_margin: usize,
    pub algebra_dimension: usize,
    pub face: FaceSummary,
    pub probes: Vec<ProbeReport>,
    pub iterations: usize,
    pub residuals: Residuals,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<ViolationCertificate>,
    /// Feasible Choi matrix attaining the largest deviation seen.
    #[serde(skip)]
    pub extremal_choi: ChoiMatrix,
}

impl UepReport {
    pub fn max_deviation(&self) -> f64 {
        self.probes.iter().filter(|p| p.in_algebra).map(|p| p.deviation).fold(0.0, f64::max)
    }
}

struct ProbeOutcome {
    report: ProbeReport,
    best_z: Vec<f64>,
    residuals: Residuals,
}

fn witness(rng: &mut CounterRng, d: usize, hermitian: bool) -> ComplexMatrix {
    let w = if hermitian { rng.random_hermitian(d) } else { rng.ginibre(d) };
    let n = w.frobenius_norm();
    w.scale_real(1.0 / n)
}

fn witness_value(face: &face::Face, z: &[f64], a: &ComplexMatrix, w: &ComplexMatrix) -> Result<(f64, ComplexMatrix)> {
    let c = ChoiMatrix::new(face.d, face.choi(z))?;
    let diff = &c.apply(a)? - a;
    Ok((w.inner(&diff).re / w.frobenius_norm(), diff))
}

fn solve_probe(
    p: &UepProblem,
    face: &face::Face,
    index: usize,
    a: &ComplexMatrix,
    alg: &AlgebraBasis,
) -> Result<ProbeOutcome> {
    let mut rng = CounterRng::stream(p.seed, index as u64);
    let hermitian = a.is_hermitian();
    let mut devs = Vec::with_capacity(p.witnesses + ADAPTIVE_ROUNDS);
    let mut iterations = 0;
    let mut converged = true;
    let mut residuals = Residuals::default();
    let mut best: Option<(f64, Vec<f64>, ComplexMatrix)> = None;

    let mut run = |w: &ComplexMatrix, best: &mut Option<(f64, Vec<f64>, ComplexMatrix)>| -> Result<f64> {
        let g = face.objective(a, w);
        let res = admm::maximize(face, &g, p.max_iter, FLAT_FRACTION * p.tol);
        iterations += res.iterations;
        converged &= res.converged;
        residuals.affine = residuals.affine.max(res.affine_residual);
        residuals.psd = residuals.psd.max(res.psd_residual);
        let (dev, diff) = witness_value(face, &res.z, a, w)?;
        if best.as_ref().is_none_or(|b| dev > b.0) {
            *best = Some((dev, res.z, diff));
        }
        Ok(dev)
    };

    for _ in 0..p.witnesses {
        let w = witness(&mut rng, p.d, hermitian);
        devs.push(run(&w, &mut best)?);
    }
    // conditional-gradient rounds on the convex function ‖Φ(a) − a‖_F
    for _ in 0..ADAPTIVE_ROUNDS {
        let (bd, _, diff) = best.as_ref().expect("at least one witness");
        if *bd <= p.tol || diff.frobenius_norm() == 0.0 {
            break;
        }
        let w = diff.scale_real(1.0 / diff.frobenius_norm());
        let before = *bd;
        let dev = run(&w, &mut best)?;
        devs.push(dev);
        if dev <= before * (1.0 + 1e-9) {
            break;
        }
    }

    let (deviation, best_z, _) = best.expect("at least one witness");
    let projection_residual = alg.residual(a);
    let in_algebra = projection_residual <= MEMBERSHIP_TOL * (1.0 + a.frobenius_norm());
    Ok(ProbeOutcome {
        report: ProbeReport {
            index,
            deviation,
            witness_deviations: devs,
            projection_residual,
            in_algebra,
            label: (!in_algebra).then(|| EXTENSION_FREEDOM.to_string()),
            iterations,
            converged,
        },
        best_z,
        residuals,
    })
}

/// Runs `f` inside a pool capped by `HYPERLAB_THREADS` when that is set.
pub fn with_thread_cap<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    let cap = std::env::var("HYPERLAB_THREADS").ok().and_then(|v| v.parse::<usize>().ok());
    match cap {
        Some(n) if n >= 1 => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        },
        _ => f(),
    }
}

pub fn solve(p: &UepProblem) -> Result<UepReport> {
    let system = build_constraints(p)?;
    let alg = p.algebra()?;
    let probes = p.probes.clone().unwrap_or_else(|| alg.hermitian_basis());

    let (face, steps) = face::reduce(p.d, &system.pinned);
    let mut dimensions = vec![p.d * p.d];
    dimensions.extend(steps.iter().map(|s| s.dim_after));

    let outcomes: Vec<ProbeOutcome> = with_thread_cap(|| {
        probes.par_iter().enumerate().map(|(i, a)| solve_probe(p, &face, i, a, &alg)).collect::<Result<Vec<_>>>()
    })?;

    let mut residuals = Residuals::default();
    let mut iterations = 0;
    for o in &outcomes {
        residuals.affine = residuals.affine.max(o.residuals.affine);
        residuals.psd = residuals.psd.max(o.residuals.psd);
        iterations += o.report.iterations;
    }

    let extremal_idx =
        (0..outcomes.len()).filter(|&i| outcomes[i].report.in_algebra).fold(None, |acc: Option<usize>, i| match acc {
            Some(j) if outcomes[j].report.deviation >= outcomes[i].report.deviation => Some(j),
            _ => Some(i),
        });
    let extremal_z = extremal_idx.map_or_else(|| face.z_id.clone(), |i| outcomes[i].best_z.clone());
    let extremal_choi = ChoiMatrix::new(p.d, face.choi(&extremal_z))?;

    let violation = 10.0 * p.tol;
    let mut certificate = None;
    if let Some(i) = extremal_idx.filter(|&i| outcomes[i].report.deviation >= violation) {
        let z = admm::polish(&face, &outcomes[i].best_z);
        let choi = ChoiMatrix::new(p.d, face.choi(&z))?;
        let cert = ViolationCertificate::assemble(p, choi, probes[i].clone())?;
        if validate_certificate(&cert, p) {
            certificate = Some(cert);
        }
    }

    let in_alg = || outcomes.iter().map(|o| &o.report).filter(|r| r.in_algebra);
    let status = if certificate.is_some() {
        Status::ViolationFound
    } else if in_alg().all(|r| r.deviation <= p.tol && r.converged) {
        Status::UniqueEvidence
    } else {
        Status::NonConverged
    };

    let face_rank = face.rank();
    Ok(UepReport {
        status,
        claim: "evidence",
        d: p.d,
        seed: p.seed,
        tol: p.tol,
        constraint_rank: system.rank,
        full_dimension: system.full_dimension,
        rank_margin: system.full_dimension - system.rank,
        algebra_dimension: alg.dim(),
        face: FaceSummary { singleton: face.r == 1, dimensions, steps, face_rank },
        probes: outcomes.into_iter().map(|o| o.report).collect(),
        iterations,
        residuals,
        certificate,
        extremal_choi,
    })
}

/// Independent re-check of a certificate: UCP defects, agreement on
/// `G ∪ G*`, membership of the probe in the generated algebra and a
/// deviation that dominates both the residuals and the tolerance.
pub fn validate_certificate(cert: &ViolationCertificate, p: &UepProblem) -> bool {
    let check = || -> Result<bool> {
        if cert.choi.d() != p.d || cert.choi.d_out() != p.d {
            return Ok(false);
        }
        let UcpDefects { cp_defect, unital_defect } = cert.choi.validate_ucp();
        if cp_defect > CERTIFICATE_TOL || unital_defect > CERTIFICATE_TOL {
            return Ok(false);
        }
        let agreement = agreement_residual(p, &cert.choi)?;
        if agreement > CERTIFICATE_TOL {
            return Ok(false);
        }
        if !p.algebra()?.contains(&cert.probe, MEMBERSHIP_TOL) {
            return Ok(false);
        }
        let deviation = op_norm(&(&cert.choi.apply(&cert.probe)? - &cert.probe));
        if (deviation - cert.deviation).abs() > CERTIFICATE_TOL * (1.0 + deviation) {
            return Ok(false);
        }
        Ok(deviation >= 10.0 * agreement.max(p.tol))
    };
    check().unwrap_or(false)
}

#[derive(Debug, Clone, Serialize)]
pub struct GeneratorDefects {
    pub index: usize,
    pub left_norm: f64,
    pub right_norm: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PinningReport {
    pub generators: Vec<GeneratorDefects>,
    /// Generators `T` whose `T*T` and `TT*` are pinned as well.
    pub pinned_triples: Vec<usize>,
    /// Largest Schwarz defect over the generators of pinned triples.
    pub triple_defect: f64,
    /// Largest `‖Φ(w) − w‖` over words of length ≤ 4 in `{T, T*}`, `T` from
    /// the pinned triples (or from all generators if there are none).
    pub word_agreement: f64,
    pub words_checked: usize,
}

impl PinningReport {
    /// The checks that pinning a triple forces.
    pub fn passes(&self, defect_tol: f64, word_tol: f64) -> bool {
        self.triple_defect <= defect_tol && self.word_agreement <= word_tol
    }
}

const WORD_LENGTH: usize = 4;

fn close(a: &ComplexMatrix, b: &ComplexMatrix) -> bool {
    (a - b).max_abs() <= 1e-12 * (1.0 + a.max_abs().max(b.max_abs()))
}

pub fn schwarz_pinning_check(p: &UepProblem, c: &ChoiMatrix) -> Result<PinningReport> {
    let mut generators = Vec::new();
    for (index, g) in p.generators.iter().enumerate() {
        let sd = schwarz_defects(c, g)?;
        generators.push(GeneratorDefects { index, left_norm: sd.left_norm, right_norm: sd.right_norm });
    }
    let pinned_triples: Vec<usize> = p
        .generators
        .iter()
        .enumerate()
        .filter(|(_, t)| {
            let tt = t.adjoint_mul(t);
            let ttt = t.matmul(&t.adjoint());
            p.generators.iter().any(|g| close(g, &tt)) && p.generators.iter().any(|g| close(g, &ttt))
        })
        .map(|(i, _)| i)
        .collect();
    let triple_defect =
        pinned_triples.iter().map(|&i| generators[i].left_norm.max(generators[i].right_norm)).fold(0.0, f64::max);

    let sources: Vec<&ComplexMatrix> = if pinned_triples.is_empty() {
        p.generators.iter().collect()
    } else {
        pinned_triples.iter().map(|&i| &p.generators[i]).collect()
    };
    let mut word_agreement = 0.0f64;
    let mut words_checked = 0;
    for t in sources {
        let letters = [t.clone(), t.adjoint()];
        let mut level = vec![ComplexMatrix::identity(p.d)];
        for _ in 0..WORD_LENGTH {
            let mut next = Vec::with_capacity(level.len() * 2);
            for w in &level {
                for l in &letters {
                    let lw = l * w;
                    word_agreement = word_agreement.max(op_norm(&(&c.apply(&lw)? - &lw)));
                    words_checked += 1;
                    next.push(lw);
                }
            }
            level = next;
        }
    }
    Ok(PinningReport { generators, pinned_triples, triple_defect, word_agreement, words_checked })
}

#[cfg(test)]
mod tests;
