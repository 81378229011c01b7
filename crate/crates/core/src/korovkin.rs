//! Korovkin-type convergence runs: a sequence of positive unital maps is
//! evaluated on a test set and on probes, and each element gets a verdict.
//!
//! Functions on `[0,1]` live on a uniform grid and norms there are maxima
//! over grid points, which under-estimate the true sup norm. Matrix
//! deviations use the operator norm.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cpmaps::ChoiMatrix;
use crate::error::{Error, Result};
use crate::linalg::{c64, op_norm, ComplexMatrix};

pub const GRID_POINTS: usize = 1001;
pub const GRID_TOL: f64 = 1e-4;
pub const MATRIX_TOL: f64 = 1e-6;
/// UCP defects allowed for matrix family members.
pub const MEMBER_TOL: f64 = 1e-9;
/// Least-squares slope of `log dev` against `log n` over the last half of
/// the range at or below which an element counts as converging.
pub const DECAY_SLOPE: f64 = -0.25;
/// Slope above which a deviation bounded away from zero counts as flat.
pub const FLAT_SLOPE: f64 = -0.05;

/// `(B_n f)(x) = Σ_k f(k/n) C(n,k) x^k (1−x)^{n−k}` at every grid point.
///
/// `f` holds samples on a uniform grid of `[0,1]`; node values `f(k/n)` are
/// linearly interpolated. The polynomial is evaluated by de Casteljau's
/// scheme in the form `b + x (b' − b)`, so constants are reproduced exactly
/// and nonnegative data stays nonnegative.
pub fn bernstein_apply(n: usize, f: &[f64]) -> Result<Vec<f64>> {
    if n < 1 {
        return Err(Error::invalid("Bernstein degree must be at least 1"));
    }
    if f.len() < 2 {
        return Err(Error::invalid("grid function needs at least two samples"));
    }
    let nodes: Vec<f64> = (0..=n).map(|k| interpolate(f, k as f64 / n as f64)).collect();
    let m = f.len() - 1;
    let mut b = vec![0.0; n + 1];
    Ok((0..=m)
        .map(|j| {
            let x = j as f64 / m as f64;
            b.copy_from_slice(&nodes);
            for level in (1..=n).rev() {
                for k in 0..level {
                    b[k] += x * (b[k + 1] - b[k]);
                }
            }
            b[0]
        })
        .collect())
}

/// Piecewise linear interpolation of grid samples at `x ∈ [0,1]`.
fn interpolate(f: &[f64], x: f64) -> f64 {
    let m = f.len() - 1;
    let s = x * m as f64;
    let i = (s.floor() as usize).min(m - 1);
    let t = s - i as f64;
    if t == 0.0 {
        f[i]
    } else {
        f[i] + t * (f[i + 1] - f[i])
    }
}

/// Functions on `[0,1]` known by name: `1`, `x`, `x^k`, `|x-c|`,
/// `sqrt(x)`, `exp(x)`.
#[derive(Debug, Clone, PartialEq)]
pub enum GridFunction {
    Power(u32),
    AbsShift(f64),
    Sqrt,
    Exp,
}

impl GridFunction {
    pub fn parse(s: &str) -> Result<Self> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = || Error::invalid(format!("unknown grid function '{s}'"));
        match t.as_str() {
            "1" => return Ok(GridFunction::Power(0)),
            "x" => return Ok(GridFunction::Power(1)),
            "sqrt(x)" => return Ok(GridFunction::Sqrt),
            "exp(x)" => return Ok(GridFunction::Exp),
            _ => {}
        }
        if let Some(k) = t.strip_prefix("x^") {
            return k.parse().map(GridFunction::Power).map_err(|_| bad());
        }
        if let Some(inner) = t.strip_prefix("|x-").and_then(|r| r.strip_suffix('|')) {
            let c = crate::toeplitz::parse_rational(inner)
                .map(|q| crate::toeplitz::rational_to_f64(&q))
                .map_err(|_| bad())?;
            return Ok(GridFunction::AbsShift(c));
        }
        Err(bad())
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            GridFunction::Power(k) => x.powi(*k as i32),
            GridFunction::AbsShift(c) => (x - c).abs(),
            GridFunction::Sqrt => x.sqrt(),
            GridFunction::Exp => x.exp(),
        }
    }

    pub fn sample(&self, points: usize) -> Vec<f64> {
        let m = (points - 1) as f64;
        (0..points).map(|j| self.eval(j as f64 / m)).collect()
    }
}

/// An element of the test set or of the probes.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Element {
    /// A named grid function such as `"x^2"`.
    Function(String),
    Matrix {
        label: String,
        matrix: ComplexMatrix,
    },
}

impl Element {
    pub fn matrix(label: impl Into<String>, matrix: ComplexMatrix) -> Self {
        Element::Matrix { label: label.into(), matrix }
    }

    pub fn label(&self) -> &str {
        match self {
            Element::Function(s) => s,
            Element::Matrix { label, .. } => label,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum MapFamily {
    /// Bernstein operators `B_n` on a uniform grid.
    Bernstein {
        #[serde(default = "default_grid")]
        grid_points: usize,
    },
    /// `φ_n = Φ` for every `n`; the concrete failing sequence built from a
    /// violation certificate.
    ConstantCertificate { choi: ChoiMatrix },
    /// `φ_n(A) = U_n A U_n*` with `U_n` the rotation in the `(p, q)` plane
    /// with `cos = (1−t²)/(1+t²)`, `sin = 2t/(1+t²)`, `t = 1/(2n)`, an angle
    /// close to `1/n`.
    UnitaryConjugation {
        d: usize,
        #[serde(default)]
        p: usize,
        #[serde(default = "one")]
        q: usize,
    },
    /// `φ_n = (1 − s/n) id + (s/n) Δ`, `Δ` the diagonal pinching.
    Pinching { d: usize, strength: f64 },
}

fn default_grid() -> usize {
    GRID_POINTS
}

fn one() -> usize {
    1
}

impl MapFamily {
    pub fn kind(&self) -> &'static str {
        match self {
            MapFamily::Bernstein { .. } => "Bernstein",
            MapFamily::ConstantCertificate { .. } => "ConstantCertificate",
            MapFamily::UnitaryConjugation { .. } => "UnitaryConjugation",
            MapFamily::Pinching { .. } => "Pinching",
        }
    }

    /// Matrix size for matrix families, `None` for grid functions.
    pub fn matrix_dim(&self) -> Option<usize> {
        match self {
            MapFamily::Bernstein { .. } => None,
            MapFamily::ConstantCertificate { choi } => Some(choi.d()),
            MapFamily::UnitaryConjugation { d, .. } | MapFamily::Pinching { d, .. } => Some(*d),
        }
    }

    fn validate(&self, n_min: usize) -> Result<()> {
        match self {
            MapFamily::Bernstein { grid_points } if *grid_points < 2 => {
                Err(Error::invalid("Bernstein grid needs at least two points"))
            }
            MapFamily::ConstantCertificate { choi } if choi.d() != choi.d_out() => {
                Err(Error::invalid("certificate map must act on a single matrix algebra"))
            }
            MapFamily::UnitaryConjugation { d, p, q } if *p >= *d || *q >= *d || p == q => {
                Err(Error::invalid("rotation plane must be two distinct indices below d"))
            }
            MapFamily::Pinching { strength, .. } if !(*strength >= 0.0 && *strength <= n_min as f64) => {
                Err(Error::invalid("pinching strength must lie in [0, n_min]"))
            }
            MapFamily::UnitaryConjugation { d: 0, .. } | MapFamily::Pinching { d: 0, .. } => {
                Err(Error::invalid("matrix size must be positive"))
            }
            _ => Ok(()),
        }
    }

    /// Choi matrix of the `n`-th member of a matrix family.
    pub fn member(&self, n: usize) -> Result<ChoiMatrix> {
        match self {
            MapFamily::Bernstein { .. } => Err(Error::invalid("Bernstein members act on grid functions")),
            MapFamily::ConstantCertificate { choi } => Ok(choi.clone()),
            MapFamily::UnitaryConjugation { d, p, q } => {
                let u = plane_rotation(*d, *p, *q, n);
                ChoiMatrix::from_map(*d, *d, |a| &u * &(a * &u.adjoint()))
            }
            MapFamily::Pinching { d, strength } => {
                let w = strength / n as f64;
                ChoiMatrix::from_map(*d, *d, |a| {
                    ComplexMatrix::from_fn(*d, *d, |i, j| if i == j { a[(i, j)] } else { a[(i, j)].scale(1.0 - w) })
                })
            }
        }
    }
}

fn plane_rotation(d: usize, p: usize, q: usize, n: usize) -> ComplexMatrix {
    let t = 1.0 / (2.0 * n as f64);
    let c = (1.0 - t * t) / (1.0 + t * t);
    let s = 2.0 * t / (1.0 + t * t);
    let mut u = ComplexMatrix::identity(d);
    u[(p, p)] = c64(c, 0.0);
    u[(q, q)] = c64(c, 0.0);
    u[(p, q)] = c64(-s, 0.0);
    u[(q, p)] = c64(s, 0.0);
    u
}

/// A family together with its index range.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilyRun {
    pub family: MapFamily,
    pub n_min: usize,
    pub n_max: usize,
}

/// `family.json` as read by the command line.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KorovkinConfig {
    #[serde(flatten)]
    pub run: FamilyRun,
    pub test_set: Vec<Element>,
    #[serde(default)]
    pub probes: Vec<Element>,
    #[serde(default)]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Converges,
    Stalls,
    /// Neither decaying fast enough nor bounded away from zero.
    Inconclusive,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Converges => "converges",
            Verdict::Stalls => "stalls",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

/// Least-squares slope of `log dev` against `log n`.
fn log_slope(ns: &[usize], devs: &[f64]) -> Option<f64> {
    if ns.len() < 2 {
        return None;
    }
    let xs: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = devs.iter().map(|&d| d.max(1e-300).ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Some(sxy / sxx)
}

/// Converges when the last three deviations are within `tol`, or when the
/// deviations over the last half of the range decay at least like
/// `n^DECAY_SLOPE`. Stalls when the last half stays above `10 tol` with a
/// flat trend.
pub fn verdict(ns: &[usize], devs: &[f64], tol: f64) -> Verdict {
    let len = devs.len();
    if len == 0 {
        return Verdict::Inconclusive;
    }
    if devs[len.saturating_sub(3)..].iter().all(|&d| d <= tol) {
        return Verdict::Converges;
    }
    let half = len / 2;
    let slope = log_slope(&ns[half..], &devs[half..]);
    if slope.is_some_and(|s| s <= DECAY_SLOPE) {
        return Verdict::Converges;
    }
    let bounded = devs[half..].iter().all(|&d| d >= 10.0 * tol);
    if bounded && slope.is_none_or(|s| s > FLAT_SLOPE) {
        return Verdict::Stalls;
    }
    Verdict::Inconclusive
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub family: &'static str,
    pub n: Vec<usize>,
    pub test_labels: Vec<String>,
    pub probe_labels: Vec<String>,
    /// `test_deviations[i][j]`: element `j` of the test set at `n[i]`.
    pub test_deviations: Vec<Vec<f64>>,
    pub probe_deviations: Vec<Vec<f64>>,
    pub test_verdicts: Vec<Verdict>,
    pub probe_verdicts: Vec<Verdict>,
    pub tol: f64,
    /// Largest error of the linearly interpolated node values `f(k/n)`.
    pub interpolation_error: Option<f64>,
    pub norm: &'static str,
}

impl ConvergenceReport {
    /// `(n, max over G, max over probes)`.
    pub fn rows(&self) -> Vec<(usize, f64, f64)> {
        let max = |v: &Vec<f64>| v.iter().copied().fold(0.0, f64::max);
        (0..self.n.len()).map(|i| (self.n[i], max(&self.test_deviations[i]), max(&self.probe_deviations[i]))).collect()
    }

    fn column(&self, devs: &[Vec<f64>], j: usize) -> Vec<f64> {
        devs.iter().map(|row| row[j]).collect()
    }

    pub fn test_column(&self, j: usize) -> Vec<f64> {
        self.column(&self.test_deviations, j)
    }

    pub fn probe_column(&self, j: usize) -> Vec<f64> {
        self.column(&self.probe_deviations, j)
    }
}

enum Prepared {
    Grid { samples: Vec<Vec<f64>>, interp: f64 },
    Matrices(Vec<ComplexMatrix>),
}

fn prepare(family: &MapFamily, run: &FamilyRun, elems: &[Element]) -> Result<Prepared> {
    match family.matrix_dim() {
        None => {
            let MapFamily::Bernstein { grid_points } = family else { unreachable!() };
            let mut samples = Vec::with_capacity(elems.len());
            let mut interp = 0.0f64;
            for e in elems {
                let Element::Function(s) = e else {
                    return Err(Error::invalid(format!(
                        "'{}' is a matrix, the family acts on grid functions",
                        e.label()
                    )));
                };
                let f = GridFunction::parse(s)?;
                let sampled = f.sample(*grid_points);
                for n in run.n_min..=run.n_max {
                    for k in 0..=n {
                        let x = k as f64 / n as f64;
                        interp = interp.max((interpolate(&sampled, x) - f.eval(x)).abs());
                    }
                }
                samples.push(sampled);
            }
            Ok(Prepared::Grid { samples, interp })
        }
        Some(d) => elems
            .iter()
            .map(|e| match e {
                Element::Matrix { matrix, label } if matrix.rows() == d && matrix.cols() == d => Ok(matrix.clone()),
                _ => Err(Error::invalid(format!("'{}' is not a {d}x{d} matrix", e.label()))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Prepared::Matrices),
    }
}

fn grid_deviation(n: usize, f: &[f64]) -> Result<f64> {
    let b = bernstein_apply(n, f)?;
    Ok(b.iter().zip(f).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
}

pub fn run(run: &FamilyRun, tests: &[Element], probes: &[Element], tol: Option<f64>) -> Result<ConvergenceReport> {
    let family = &run.family;
    if run.n_min < 1 || run.n_max < run.n_min {
        return Err(Error::invalid("index range needs 1 <= n_min <= n_max"));
    }
    family.validate(run.n_min)?;
    let tp = prepare(family, run, tests)?;
    let pp = prepare(family, run, probes)?;
    let tol = tol.unwrap_or(if family.matrix_dim().is_some() { MATRIX_TOL } else { GRID_TOL });
    let ns: Vec<usize> = (run.n_min..=run.n_max).collect();

    let eval_n = |n: usize| -> Result<(Vec<f64>, Vec<f64>)> {
        match (&tp, &pp) {
            (Prepared::Grid { samples: ts, .. }, Prepared::Grid { samples: ps, .. }) => Ok((
                ts.iter().map(|f| grid_deviation(n, f)).collect::<Result<_>>()?,
                ps.iter().map(|f| grid_deviation(n, f)).collect::<Result<_>>()?,
            )),
            (Prepared::Matrices(ts), Prepared::Matrices(ps)) => {
                let c = family.member(n)?;
                let defects = c.validate_ucp();
                if defects.cp_defect > MEMBER_TOL || defects.unital_defect > MEMBER_TOL {
                    return Err(Error::NotUcp { cp_defect: defects.cp_defect, unital_defect: defects.unital_defect });
                }
                let dev = |a: &ComplexMatrix| c.apply(a).map(|pa| op_norm(&(&pa - a)));
                Ok((ts.iter().map(dev).collect::<Result<_>>()?, ps.iter().map(dev).collect::<Result<_>>()?))
            }
            _ => unreachable!("both sets are prepared against the same family"),
        }
    };
    let per_n: Vec<(Vec<f64>, Vec<f64>)> = ns.par_iter().map(|&n| eval_n(n)).collect::<Result<_>>()?;
    let (test_deviations, probe_deviations): (Vec<_>, Vec<_>) = per_n.into_iter().unzip();

    let verdicts = |devs: &Vec<Vec<f64>>, count: usize| -> Vec<Verdict> {
        (0..count).map(|j| verdict(&ns, &devs.iter().map(|r| r[j]).collect::<Vec<_>>(), tol)).collect()
    };
    let interpolation_error = match (&tp, &pp) {
        (Prepared::Grid { interp: a, .. }, Prepared::Grid { interp: b, .. }) => Some(a.max(*b)),
        _ => None,
    };
    Ok(ConvergenceReport {
        family: family.kind(),
        test_labels: tests.iter().map(|e| e.label().to_string()).collect(),
        probe_labels: probes.iter().map(|e| e.label().to_string()).collect(),
        test_verdicts: verdicts(&test_deviations, tests.len()),
        probe_verdicts: verdicts(&probe_deviations, probes.len()),
        n: ns,
        test_deviations,
        probe_deviations,
        tol,
        interpolation_error,
        norm: if interpolation_error.is_some() {
            "max over grid points (under-estimates the sup norm)"
        } else {
            "operator norm"
        },
    })
}

/// Header row, one row per `n`, then verdicts and notes as `#` lines.
pub fn csv_export(report: &ConvergenceReport) -> String {
    let mut out = String::from("n");
    for l in &report.test_labels {
        out.push_str(&format!(",g:{}", csv_field(l)));
    }
    for l in &report.probe_labels {
        out.push_str(&format!(",p:{}", csv_field(l)));
    }
    out.push('\n');
    for (i, n) in report.n.iter().enumerate() {
        out.push_str(&n.to_string());
        for v in report.test_deviations[i].iter().chain(&report.probe_deviations[i]) {
            let _ = write!(out, ",{v:.15e}");
        }
        out.push('\n');
    }
    for (l, v) in report.test_labels.iter().zip(&report.test_verdicts) {
        let _ = writeln!(out, "# verdict g:{} {}", l, v.as_str());
    }
    for (l, v) in report.probe_labels.iter().zip(&report.probe_verdicts) {
        let _ = writeln!(out, "# verdict p:{} {}", l, v.as_str());
    }
    let _ = writeln!(out, "# family {}", report.family);
    let _ = writeln!(out, "# tol {:e}", report.tol);
    let _ = writeln!(out, "# norm {}", report.norm);
    if let Some(e) = report.interpolation_error {
        let _ = writeln!(out, "# interpolation_error {e:.3e}");
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{averaging_pinch_choi, diagonal_x};
    use crate::rng::CounterRng;

    fn funcs(names: &[&str]) -> Vec<Element> {
        names.iter().map(|s| Element::Function(s.to_string())).collect()
    }

    fn bernstein(n_min: usize, n_max: usize) -> FamilyRun {
        FamilyRun { family: MapFamily::Bernstein { grid_points: GRID_POINTS }, n_min, n_max }
    }

    #[test]
    fn bernstein_closed_forms() {
        let x = GridFunction::Power(1).sample(GRID_POINTS);
        let bx = bernstein_apply(7, &x).unwrap();
        assert!(bx.iter().zip(&x).all(|(a, b)| (a - b).abs() < 1e-15));
        let one = GridFunction::Power(0).sample(GRID_POINTS);
        assert_eq!(bernstein_apply(13, &one).unwrap(), one);

        let x2 = GridFunction::Power(2).sample(GRID_POINTS);
        assert!((grid_deviation(1, &x2).unwrap() - 0.25).abs() < 1e-15);
        assert!((grid_deviation(100, &x2).unwrap() - 1.0 / 400.0).abs() < 1e-6);
        // against x² + x(1−x)/n pointwise
        for n in [1, 5, 37] {
            let b = bernstein_apply(n, &x2).unwrap();
            for (j, v) in b.iter().enumerate().step_by(50) {
                let t = j as f64 / 1000.0;
                assert!((v - (t * t + t * (1.0 - t) / n as f64)).abs() < 2e-6, "n={n} x={t}");
            }
        }
        assert!(bernstein_apply(0, &x2).is_err());
    }

    #[test]
    fn bernstein_is_positive() {
        let mut rng = CounterRng::new(4);
        for n in [1, 3, 20] {
            let f: Vec<f64> = (0..GRID_POINTS).map(|_| rng.uniform()).collect();
            assert!(bernstein_apply(n, &f).unwrap().iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn classical_korovkin_picture() {
        let r = run(&bernstein(1, 100), &funcs(&["1", "x", "x^2"]), &funcs(&["x^3", "|x-1/2|"]), None).unwrap();
        assert!(r.test_verdicts.iter().all(|v| *v == Verdict::Converges));
        assert!(r.probe_verdicts.iter().all(|v| *v == Verdict::Converges), "{:?}", r.probe_verdicts);
        assert!((r.test_column(2)[99] - 0.0025).abs() < 1e-6);
        assert_eq!(r.interpolation_error, Some(r.interpolation_error.unwrap().min(1e-6)));
        let csv = csv_export(&r);
        assert!(csv.starts_with("n,g:1,g:x,g:x^2,p:x^3,p:|x-1/2|\n"));
    }

    #[test]
    fn convex_combinations_of_tests_are_controlled() {
        let tests = funcs(&["1", "x", "x^2"]);
        let r = run(&bernstein(1, 30), &tests, &[], None).unwrap();
        let comb: Vec<f64> = {
            let s: Vec<Vec<f64>> = [0, 1, 2].iter().map(|&k| GridFunction::Power(k).sample(GRID_POINTS)).collect();
            (0..GRID_POINTS).map(|j| 0.2 * s[0][j] + 0.3 * s[1][j] + 0.5 * s[2][j]).collect()
        };
        for (i, &n) in r.n.iter().enumerate() {
            let eps = r.test_deviations[i].iter().copied().fold(0.0, f64::max);
            assert!(grid_deviation(n, &comb).unwrap() <= eps + 1e-15);
        }
    }

    #[test]
    fn constant_certificate_stalls_on_the_square() {
        let x = diagonal_x();
        let fam =
            FamilyRun { family: MapFamily::ConstantCertificate { choi: averaging_pinch_choi() }, n_min: 1, n_max: 20 };
        let r = run(&fam, &[Element::matrix("X", x.clone())], &[Element::matrix("X^2", &x * &x)], None).unwrap();
        assert!(r.test_column(0).iter().all(|&d| d < 1e-12));
        assert!(r.probe_column(0).iter().all(|&d| (d - 1.0).abs() < 1e-9));
        assert_eq!(r.test_verdicts, vec![Verdict::Converges]);
        assert_eq!(r.probe_verdicts, vec![Verdict::Stalls]);
    }

    #[test]
    fn rotations_and_pinchings_converge() {
        let mut rng = CounterRng::new(8);
        let probes: Vec<Element> = (0..3).map(|i| Element::matrix(format!("A{i}"), rng.ginibre(3))).collect();
        for family in [MapFamily::UnitaryConjugation { d: 3, p: 0, q: 2 }, MapFamily::Pinching { d: 3, strength: 1.0 }]
        {
            let fam = FamilyRun { family, n_min: 1, n_max: 400 };
            let r = run(&fam, &probes[..1], &probes, None).unwrap();
            assert!(r.probe_verdicts.iter().all(|v| *v == Verdict::Converges));
            let csv = csv_export(&r);
            assert_eq!(csv.lines().next().unwrap(), "n,g:A0,p:A0,p:A1,p:A2");
            assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 401);
        }
    }

    #[test]
    fn csv_without_probes_has_only_test_columns() {
        let r = run(&bernstein(1, 10), &funcs(&["x"]), &[], None).unwrap();
        let csv = csv_export(&r);
        let lines: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(lines[0], "n,g:x");
        assert_eq!(lines.len(), 11);
    }

    #[test]
    fn domain_mismatch_is_rejected() {
        let fam = FamilyRun { family: MapFamily::Pinching { d: 2, strength: 1.0 }, n_min: 1, n_max: 3 };
        assert!(run(&fam, &funcs(&["x"]), &[], None).is_err());
        assert!(run(&bernstein(1, 3), &[Element::matrix("I", ComplexMatrix::identity(2))], &[], None).is_err());
        assert!(run(&fam, &[Element::matrix("I", ComplexMatrix::identity(3))], &[], None).is_err());
        assert!(GridFunction::parse("sin(x)").is_err());
        assert_eq!(GridFunction::parse("|x - 1/2|").unwrap(), GridFunction::AbsShift(0.5));
    }

    #[test]
    fn verdict_rules() {
        let ns: Vec<usize> = (1..=20).collect();
        assert_eq!(verdict(&ns, &[0.0; 20], 1e-6), Verdict::Converges);
        assert_eq!(verdict(&ns, &[1.0; 20], 1e-6), Verdict::Stalls);
        let slow: Vec<f64> = ns.iter().map(|&n| 1.0 / (n as f64).sqrt()).collect();
        assert_eq!(verdict(&ns, &slow, 1e-6), Verdict::Converges);
        let creeping: Vec<f64> = ns.iter().map(|&n| (n as f64).powf(-0.1)).collect();
        assert_eq!(verdict(&ns, &creeping, 1e-6), Verdict::Inconclusive);
    }

    #[test]
    fn config_parses() {
        let cfg: KorovkinConfig = serde_json::from_str(
            r#"{"family":{"kind":"Bernstein"},"n_min":1,"n_max":5,"test_set":["1","x","x^2"],"probes":["x^3"]}"#,
        )
        .unwrap();
        assert_eq!(cfg.test_set.len(), 3);
        let cfg: KorovkinConfig = serde_json::from_str(
            r#"{"family":{"kind":"Pinching","d":2,"strength":0.5},"n_min":1,"n_max":5,
                "test_set":[{"label":"I","matrix":[[1,0],[0,1]]}]}"#,
        )
        .unwrap();
        assert!(matches!(cfg.test_set[0], Element::Matrix { .. }));
    }
}
