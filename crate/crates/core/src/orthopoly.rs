//! Orthonormal polynomials of a positive moment functional.
//!
//! Recurrence coefficients are computed exactly from the moments with the
//! Chebyshev form of the Stieltjes procedure (mixed moments `Λ(π_k u^l)` of
//! the monic orthogonal polynomials), so `a_n` and `b_n^2` are rational. Only
//! `b_n` itself, and everything evaluated at complex points, is floating point.
//!
//! Normalization: `P_n` is orthonormal for the unnormalized functional, so
//! `P_0 = 1/sqrt(s_0)` and `Q_1 = sqrt(s_0)/b_0`. For `s_0 = 1` these reduce to
//! `P_0 = 1`, `Q_1 = 1/b_0`. The recurrence coefficients do not depend on `s_0`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::measure::DiscreteMeasure;
use crate::poly::Poly;
use crate::scalar::{self, Rational};
use crate::sequence::MomentSequence;

/// Orders up to which `b_n` is cross-checked against `sqrt(D_{n-1} D_{n+1}) / D_n`.
pub const DETERMINANT_CROSS_CHECK_DEPTH: usize = 6;

/// Largest tolerated relative drift of `b_n` under input perturbation at the
/// declared precision of an approximate sequence.
pub const PRECISION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecurrenceCoefficients {
    /// `a_0, a_1, ...`
    pub a: Vec<f64>,
    /// `b_0, b_1, ...`, all positive.
    pub b: Vec<f64>,
    #[serde(skip)]
    pub a_exact: Vec<Rational>,
    #[serde(skip)]
    pub b_sq_exact: Vec<Rational>,
    #[serde(serialize_with = "crate::io::ser_rational")]
    pub s0: Rational,
    /// `Some(r)` when `D_r = 0`: the functional has exactly `r` points of increase.
    pub rank: Option<usize>,
    pub approximate: bool,
}

impl RecurrenceCoefficients {
    /// Builds coefficients directly from exact `a_n`, `b_n^2`.
    pub fn from_exact(s0: Rational, a: Vec<Rational>, b_sq: Vec<Rational>) -> Result<Self> {
        if !s0.is_positive() || b_sq.iter().any(|b| !b.is_positive()) {
            return Err(Error::InvalidArgument(
                "s0 and every b_n^2 must be positive".into(),
            ));
        }
        Ok(RecurrenceCoefficients {
            a: a.iter().map(scalar::to_f64).collect(),
            b: b_sq.iter().map(|v| scalar::to_f64(v).sqrt()).collect(),
            a_exact: a,
            b_sq_exact: b_sq,
            s0,
            rank: None,
            approximate: false,
        })
    }

    pub fn s0_f64(&self) -> f64 {
        scalar::to_f64(&self.s0)
    }

    /// Number of polynomials `P_0..P_n` that can be evaluated.
    pub fn max_poly_degree(&self) -> usize {
        self.a.len().min(self.b.len())
    }

    fn require(&self, n_a: usize, n_b: usize) -> Result<()> {
        if self.a.len() < n_a || self.b.len() < n_b {
            return Err(Error::InsufficientTerms {
                needed: n_a.max(n_b + 1),
                available: self.a.len().min(self.b.len() + 1),
            });
        }
        Ok(())
    }
}

struct Chebyshev {
    a: Vec<Rational>,
    b_sq: Vec<Rational>,
    rank: Option<usize>,
    /// Order at which `Λ(π_k^2)` came out negative.
    negative: Option<usize>,
}

/// Modified Chebyshev algorithm in exact arithmetic.
///
/// Runs while the data allow, stopping at `want_a` coefficients `a_n`. A
/// vanishing norm `Λ(π_k^2)` sets `rank = k`; a negative one stops with `negative = k`.
fn chebyshev(terms: &[Rational], want_a: usize, tol: Option<f64>) -> Result<Chebyshev> {
    let len = terms.len();
    let negligible = |norm: &Rational, k: usize| match tol {
        None => norm.is_zero(),
        Some(eps) => scalar::to_f64(norm).abs() <= eps * scalar::to_f64(&terms[2 * k]).abs(),
    };
    let mut out = Chebyshev {
        a: Vec::new(),
        b_sq: Vec::new(),
        rank: None,
        negative: None,
    };
    let s0 = &terms[0];
    if negligible(s0, 0) {
        out.rank = Some(0);
        return Ok(out);
    }
    if s0.is_negative() {
        out.negative = Some(0);
        return Ok(out);
    }
    let mut prev: Vec<Rational> = Vec::new();
    let mut cur: Vec<Rational> = terms.to_vec();
    let mut norms = vec![s0.clone()];
    if len >= 2 && want_a > 0 {
        out.a.push(&cur[1] / s0);
    }
    let mut k = 1;
    while out.a.len() < want_a && 2 * k < len {
        let a_prev = &out.a[k - 1];
        let beta_prev = if k >= 2 { Some(&out.b_sq[k - 2]) } else { None };
        let next: Vec<Rational> = (0..len - k)
            .map(|l| {
                let mut v = &cur[l + 1] - a_prev * &cur[l];
                if let Some(beta) = beta_prev {
                    v -= beta * &prev[l];
                }
                v
            })
            .collect();
        let norm = next[k].clone();
        if negligible(&norm, k) {
            out.rank = Some(k);
            break;
        }
        if norm.is_negative() {
            out.negative = Some(k);
            break;
        }
        out.b_sq.push(&norm / &norms[k - 1]);
        if 2 * k + 1 < len {
            let a_k = &next[k + 1] / &norm - &cur[k] / &norms[k - 1];
            out.a.push(a_k);
        } else {
            break;
        }
        norms.push(norm);
        prev = std::mem::replace(&mut cur, next);
        k += 1;
    }
    Ok(out)
}

/// `b_n^2` from Hankel determinants: `D_{n-1} D_{n+1} / D_n^2`.
pub fn b_squared_by_determinants(seq: &MomentSequence, n: usize) -> Result<Rational> {
    seq.require(2 * n + 3)?;
    let terms = seq.terms();
    let d = |m: usize| -> Rational {
        let h: Vec<Vec<Rational>> = (0..=m)
            .map(|i| (0..=m).map(|j| terms[i + j].clone()).collect())
            .collect();
        linalg::det(&h)
    };
    let dm1 = if n == 0 { Rational::one() } else { d(n - 1) };
    let dn = d(n);
    if dn.is_zero() {
        return Err(Error::NotPositiveDefinite { order: n });
    }
    Ok(dm1 * d(n + 1) / (&dn * &dn))
}

fn build(seq: &MomentSequence, cheb: Chebyshev) -> RecurrenceCoefficients {
    RecurrenceCoefficients {
        a: cheb.a.iter().map(scalar::to_f64).collect(),
        b: cheb.b_sq.iter().map(|v| scalar::to_f64(v).sqrt()).collect(),
        a_exact: cheb.a,
        b_sq_exact: cheb.b_sq,
        s0: seq.term(0).clone(),
        rank: cheb.rank,
        approximate: !seq.is_exact(),
    }
}

fn cross_check(seq: &MomentSequence, b_sq: &[Rational]) -> Result<()> {
    for (n, b) in b_sq.iter().enumerate().take(DETERMINANT_CROSS_CHECK_DEPTH) {
        if seq.len() < 2 * n + 3 {
            break;
        }
        let by_det = b_squared_by_determinants(seq, n)?;
        if &by_det != b {
            let rel = scalar::to_f64(&((&by_det - b) / b)).abs();
            if seq.is_exact() || rel > PRECISION_TOL {
                return Err(Error::PrecisionLoss {
                    depth: n,
                    discrepancy: rel,
                });
            }
        }
    }
    Ok(())
}

/// First depth at which `b_n` moves by more than [`PRECISION_TOL`] when the
/// terms are perturbed within their declared relative error.
fn sensitivity_limit(
    seq: &MomentSequence,
    b_sq: &[Rational],
    want_a: usize,
) -> Result<Option<(usize, f64)>> {
    let rel_tol = match seq.exactness() {
        crate::sequence::Exactness::Exact => return Ok(None),
        crate::sequence::Exactness::Approximate { rel_tol } => rel_tol,
    };
    let delta = scalar::from_f64(rel_tol)?;
    let keep_bits = (-rel_tol.log2()).ceil().max(0.0) as u32 + 64;
    let perturbed: Vec<Rational> = seq
        .terms()
        .iter()
        .enumerate()
        .map(|(k, t)| {
            // fixed pseudo-random relative perturbation in [-δ, δ]; a smooth
            // pattern would itself look like a moment sequence and hide instability
            let h = (k as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15) >> 40;
            let frac = Rational::new((h as i64 - (1 << 23)).into(), (1i64 << 23).into());
            // rounding far below δ keeps the rationals small
            scalar::round_to_bits(&(t * (Rational::one() + &delta * frac)), keep_bits)
        })
        .collect();
    let alt = chebyshev(&perturbed, want_a, None)?;
    for (n, (x, y)) in b_sq.iter().zip(&alt.b_sq).enumerate() {
        let rel = scalar::to_f64(&((x - y) / x)).abs();
        if rel > PRECISION_TOL {
            return Ok(Some((n, rel)));
        }
    }
    Ok(None)
}

/// `a_0..=a_{n_max}` and `b_0..=b_{n_max}`; the sequence must be positive
/// definite through order `n_max + 1`.
pub fn recurrence_coefficients(
    seq: &MomentSequence,
    n_max: usize,
) -> Result<RecurrenceCoefficients> {
    seq.require(2 * n_max + 3)?;
    let truncated = seq.truncated(2 * n_max + 3);
    let mut cheb = chebyshev(truncated.terms(), n_max + 2, seq.tolerance())?;
    cross_check(&truncated, &cheb.b_sq)?;
    if let Some((depth, discrepancy)) = sensitivity_limit(&truncated, &cheb.b_sq, n_max + 2)? {
        return Err(Error::PrecisionLoss { depth, discrepancy });
    }
    if let Some(r) = cheb.rank.or(cheb.negative) {
        return Err(Error::NotPositiveDefinite { order: r });
    }
    cheb.a.truncate(n_max + 1);
    cheb.b_sq.truncate(n_max + 1);
    Ok(build(seq, cheb))
}

/// As many coefficients as the terms determine.
///
/// For a sequence with exactly `r` points of increase this returns
/// `a_0..a_{r-1}`, `b_0..b_{r-2}` and `rank = Some(r)`. For approximate
/// sequences the output is cut at the first precision-limited depth.
pub fn recurrence_coefficients_partial(seq: &MomentSequence) -> Result<RecurrenceCoefficients> {
    let mut cheb = chebyshev(seq.terms(), seq.len(), seq.tolerance())?;
    cross_check(seq, &cheb.b_sq)?;
    match sensitivity_limit(seq, &cheb.b_sq, seq.len())? {
        Some((depth, _)) => {
            log::debug!("recurrence truncated at depth {depth} by input precision");
            cheb.b_sq.truncate(depth);
            cheb.a.truncate(depth + 1);
            cheb.rank = None;
        }
        None => {
            if let Some(order) = cheb.negative {
                return Err(Error::NotPositiveDefinite { order });
            }
        }
    }
    Ok(build(seq, cheb))
}

/// `(P_k(z), Q_k(z))` for `k = 0..=n` by forward recurrence.
pub fn evaluate_polys(
    coeffs: &RecurrenceCoefficients,
    z: Complex64,
    n: usize,
) -> Result<Vec<(Complex64, Complex64)>> {
    coeffs.require(n, n)?;
    let root = coeffs.s0_f64().sqrt();
    let mut out = Vec::with_capacity(n + 1);
    out.push((Complex64::new(1.0 / root, 0.0), Complex64::zero()));
    if n >= 1 {
        let p1 = (z - coeffs.a[0]) / (root * coeffs.b[0]);
        out.push((p1, Complex64::new(root / coeffs.b[0], 0.0)));
    }
    for k in 1..n {
        let (pk, qk) = out[k];
        let (pm, qm) = out[k - 1];
        let shift = z - coeffs.a[k];
        let p = (shift * pk - coeffs.b[k - 1] * pm) / coeffs.b[k];
        let q = (shift * qk - coeffs.b[k - 1] * qm) / coeffs.b[k];
        out.push((p, q));
    }
    Ok(out)
}

/// Monic orthogonal polynomial `π_n` and monic second-kind `ρ_n`, exactly.
pub fn monic_polys(coeffs: &RecurrenceCoefficients, n: usize) -> Result<(Poly, Poly)> {
    coeffs.require(n, n.saturating_sub(1))?;
    let u = Poly::monomial(Rational::one(), 1);
    let mut p = (Poly::zero(), Poly::constant(Rational::one()));
    let mut q = (Poly::zero(), Poly::zero());
    for k in 0..n {
        let shift = &u - &Poly::constant(coeffs.a_exact[k].clone());
        let mut p_next = &shift * &p.1;
        let mut q_next = if k == 0 {
            Poly::constant(Rational::one())
        } else {
            &shift * &q.1
        };
        if k >= 1 {
            let beta = &coeffs.b_sq_exact[k - 1];
            p_next = &p_next - &p.0.scale(beta);
            q_next = &q_next - &q.0.scale(beta);
        }
        p = (p.1, p_next);
        q = (q.1, q_next);
    }
    Ok((p.1, q.1))
}

/// Monomial-basis coefficients of `P_n` and `Q_n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolynomialPair {
    pub degree: usize,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
}

pub fn polynomial_pair(coeffs: &RecurrenceCoefficients, n: usize) -> Result<PolynomialPair> {
    let (pi, rho) = monic_polys(coeffs, n)?;
    let prod: f64 = coeffs.b[..n].iter().product();
    let root = coeffs.s0_f64().sqrt();
    let p_scale = 1.0 / (root * prod);
    let q_scale = root / prod;
    Ok(PolynomialPair {
        degree: n,
        p: pi
            .coeffs()
            .iter()
            .map(|c| scalar::to_f64(c) * p_scale)
            .collect(),
        q: rho
            .coeffs()
            .iter()
            .map(|c| scalar::to_f64(c) * q_scale)
            .collect(),
    })
}

/// Symmetric tridiagonal matrix with diagonal `a_0..a_{n-1}` and off-diagonal `b_0..b_{n-2}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JacobiMatrix {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl JacobiMatrix {
    pub fn new(coeffs: &RecurrenceCoefficients, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "Jacobi matrix order must be >= 1".into(),
            ));
        }
        coeffs.require(n, n - 1)?;
        Ok(JacobiMatrix {
            diag: coeffs.a[..n].to_vec(),
            off: coeffs.b[..n - 1].to_vec(),
        })
    }

    pub fn order(&self) -> usize {
        self.diag.len()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.order();
        DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                self.diag[i]
            } else if i + 1 == j {
                self.off[i]
            } else if j + 1 == i {
                self.off[j]
            } else {
                0.0
            }
        })
    }
}

/// Nodes and weights of the `n`-point Gauss rule, unsorted and unmerged.
pub fn gauss_nodes(coeffs: &RecurrenceCoefficients, n: usize) -> Result<Vec<(f64, f64)>> {
    let jacobi = JacobiMatrix::new(coeffs, n)?;
    let eigen = SymmetricEigen::new(jacobi.to_dense());
    let s0 = coeffs.s0_f64();
    let mut nodes: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eigen.eigenvectors[(0, i)];
            (eigen.eigenvalues[i], s0 * v0 * v0)
        })
        .collect();
    if nodes
        .iter()
        .any(|(x, w)| !x.is_finite() || !w.is_finite() || *w <= 0.0)
    {
        return Err(Error::EigenFailure(
            "non-finite node or nonpositive weight".into(),
        ));
    }
    nodes.sort_by(|a, b| a.0.total_cmp(&b.0));
    if nodes.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(Error::EigenFailure("coincident nodes".into()));
    }
    Ok(nodes)
}

/// Golub-Welsch: eigenvalues of the order-`n` Jacobi matrix are the atoms and
/// `s_0 v_0^2` the weights. The returned measure reproduces `s_0..s_{2n-1}`.
pub fn gauss_quadrature(coeffs: &RecurrenceCoefficients, n: usize) -> Result<DiscreteMeasure> {
    DiscreteMeasure::from_f64(&gauss_nodes(coeffs, n)?)
}

/// Gauss rule with rational nodes, when every node of `π_n` is rational.
///
/// Candidate nodes come from continued-fraction convergents of the floating
/// eigenvalues and are accepted only if they are exact roots of `π_n`; the
/// Christoffel weights `1 / Σ_k P_k(x)^2` are then rational as well.
pub fn exact_gauss_quadrature(
    coeffs: &RecurrenceCoefficients,
    n: usize,
) -> Result<Option<DiscreteMeasure>> {
    let nodes = gauss_nodes(coeffs, n)?;
    let (pi_n, _) = monic_polys(coeffs, n)?;
    let mut exact_nodes = Vec::with_capacity(n);
    for (x, _) in &nodes {
        let approx = scalar::from_f64(*x)?;
        let found = scalar::convergents(&approx)
            .into_iter()
            .take_while(|c| c.denom().bits() <= 64)
            .find(|c| {
                (scalar::to_f64(c) - x).abs() <= 1e-6 * x.abs().max(1.0)
                    && !exact_nodes.contains(c)
                    && pi_n.eval(c).is_zero()
            });
        match found {
            Some(c) => exact_nodes.push(c),
            None => return Ok(None),
        }
    }
    // Λ(π_k^2) = s0 Π_{j<k} b_j^2
    let mut norms = vec![coeffs.s0.clone()];
    for k in 1..n {
        let next = &norms[k - 1] * &coeffs.b_sq_exact[k - 1];
        norms.push(next);
    }
    let monics: Vec<Poly> = (0..n)
        .map(|k| monic_polys(coeffs, k).map(|p| p.0))
        .collect::<Result<_>>()?;
    let pairs = exact_nodes
        .into_iter()
        .map(|x| {
            let christoffel: Rational = monics
                .iter()
                .zip(&norms)
                .map(|(p, norm)| {
                    let v = p.eval(&x);
                    &v * &v / norm
                })
                .sum();
            (x, christoffel.recip())
        })
        .collect::<Vec<_>>();
    Ok(Some(DiscreteMeasure::new(pairs)?))
}
