//! Partial Hankel matrices and positive completion.
//!
//! A partial Hankel matrix specifies whole skew-diagonals `j ↦ s_j`. When the
//! specified indices form an arithmetic progression `j_k = k(d+1) + l0` with
//! `l0` even, positivity of the specified values is exactly what a completion
//! needs; [`complete_via_pullback`] builds one by lifting a representing
//! measure of the specified values through `u ↦ u^{d+1}`.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, MinorCertificate, PsdOutcome, RatMatrix};
use crate::measure::DiscreteMeasure;
use crate::orthopoly::{
    exact_gauss_quadrature, gauss_quadrature, monic_polys, RecurrenceCoefficients,
};
use crate::scalar::{self, Rational};
use crate::sequence::{hamburger_test, MomentSequence, PositivityKind, PositivityVerdict};

/// Relative tolerance on reproduced entries when the lift needs irrational roots.
pub const REPRODUCTION_TOL: f64 = 1e-10;

/// Deepest Hankel order checked on a completed sequence.
pub const MAX_CERTIFIED_DEPTH: usize = 8;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PartialHankel {
    specified: BTreeMap<usize, Rational>,
}

impl PartialHankel {
    pub fn new(specified: BTreeMap<usize, Rational>) -> Self {
        PartialHankel { specified }
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, Rational)>) -> Self {
        PartialHankel {
            specified: pairs.into_iter().collect(),
        }
    }

    /// Skew-diagonals `j_k = k(d+1) + l0` of `seq` for `k < count`.
    pub fn from_mask(seq: &MomentSequence, d: usize, l0: usize, count: usize) -> Result<Self> {
        let idx: Vec<usize> = (0..count).map(|k| k * (d + 1) + l0).collect();
        if let Some(&top) = idx.last() {
            seq.require(top + 1)?;
        }
        Ok(Self::from_pairs(
            idx.into_iter().map(|j| (j, seq.term(j).clone())),
        ))
    }

    pub fn specified(&self) -> &BTreeMap<usize, Rational> {
        &self.specified
    }

    pub fn get(&self, j: usize) -> Option<&Rational> {
        self.specified.get(&j)
    }

    pub fn len(&self) -> usize {
        self.specified.len()
    }

    pub fn is_empty(&self) -> bool {
        self.specified.is_empty()
    }

    pub fn max_index(&self) -> Option<usize> {
        self.specified.keys().next_back().copied()
    }

    /// Order-`m` matrix view; entry `(i, k)` is `Some` iff `i + k` is specified.
    pub fn matrix_view(&self, m: usize) -> Vec<Vec<Option<Rational>>> {
        (0..=m)
            .map(|i| (0..=m).map(|k| self.get(i + k).cloned()).collect())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Submatrix {
    #[serde(serialize_with = "crate::io::ser_rational_matrix")]
    pub matrix: RatMatrix,
    /// `α` is an arithmetic progression, so the submatrix is itself Hankel.
    pub is_hankel: bool,
    /// The first row index is even.
    pub even_start: bool,
    /// For Hankel submatrices, the subsequence `j_k = k(d+1) + l0` it is built from.
    pub pattern: Option<Pattern>,
}

fn common_difference(idx: &[usize]) -> std::result::Result<Option<usize>, (usize, usize, usize)> {
    if idx.len() < 2 {
        return Ok(None);
    }
    let step = idx[1] - idx[0];
    for w in idx.windows(3) {
        if w[2] - w[1] != step {
            return Err((w[0], w[1], w[2]));
        }
    }
    Ok(Some(step))
}

/// `H[α]` for the Hankel matrix of `seq`.
pub fn principal_submatrix(seq: &MomentSequence, alpha: &[usize]) -> Result<Submatrix> {
    if alpha.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(
            "index set must be strictly increasing".into(),
        ));
    }
    let Some(&last) = alpha.last() else {
        return Err(Error::InvalidArgument("index set is empty".into()));
    };
    if 2 * last >= seq.len() {
        return Err(Error::IndexOutOfRange {
            index: last,
            limit: (seq.len().saturating_sub(1)) / 2,
        });
    }
    let matrix = alpha
        .iter()
        .map(|&i| alpha.iter().map(|&k| seq.term(i + k).clone()).collect())
        .collect();
    let diff = common_difference(alpha);
    let pattern = match diff {
        Ok(Some(step)) => Some(Pattern::Affine {
            d: step - 1,
            l0: 2 * alpha[0],
        }),
        Ok(None) => Some(Pattern::Affine {
            d: 0,
            l0: 2 * alpha[0],
        }),
        Err(_) => None,
    };
    Ok(Submatrix {
        matrix,
        is_hankel: pattern.is_some(),
        even_start: alpha[0].is_multiple_of(2),
        pattern,
    })
}

/// Whether `H[α]` is positive semidefinite.
pub fn inheritance_check(seq: &MomentSequence, alpha: &[usize]) -> Result<bool> {
    let sub = principal_submatrix(seq, alpha)?;
    Ok(matches!(
        linalg::psd_check(&sub.matrix, seq.tolerance()),
        PsdOutcome::Psd { .. }
    ))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "pattern", rename_all = "snake_case")]
pub enum Pattern {
    /// `j_k = k(d+1) + l0`.
    Affine { d: usize, l0: usize },
    /// The first three consecutive indices with unequal gaps.
    NonAp { witness: (usize, usize, usize) },
}

pub fn detect_pattern(p: &PartialHankel) -> Result<Pattern> {
    let idx: Vec<usize> = p.specified.keys().copied().collect();
    if idx.len() < 2 {
        return Err(Error::TooFewIndices {
            needed: 2,
            found: idx.len(),
        });
    }
    Ok(match common_difference(&idx) {
        Ok(step) => Pattern::Affine {
            d: step.expect("two indices") - 1,
            l0: idx[0],
        },
        Err(witness) => Pattern::NonAp { witness },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum UnknownReason {
    /// Specified indices are not an arithmetic progression.
    PatternNotAffine { witness: (usize, usize, usize) },
    /// The progression starts at an odd index; specific sequences may still complete.
    PatternNotUniversal { l0: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Decision {
    CompletableInPrinciple {
        d: usize,
        l0: usize,
        verdict: PositivityVerdict,
    },
    /// The specified values already contain a negative principal minor.
    NotCompletable {
        d: usize,
        l0: usize,
        /// Rows of the full Hankel matrix spanning the failing minor.
        rows: Vec<usize>,
        certificate: MinorCertificate,
    },
    Unknown(UnknownReason),
}

impl Decision {
    pub fn is_completable(&self) -> bool {
        matches!(self, Decision::CompletableInPrinciple { .. })
    }
}

fn values_in_order(p: &PartialHankel) -> Vec<Rational> {
    p.specified.values().cloned().collect()
}

/// Three-way decision.
///
/// For `j_k = k(d+1) + l0` with `l0` even, the Hankel matrix of the specified
/// values is the principal submatrix of any completion on rows
/// `l0/2 + r(d+1)`, so it must be positive; conversely positivity suffices.
/// Other patterns are left undecided.
pub fn decide_completable(p: &PartialHankel, m_max: usize) -> Result<Decision> {
    let (d, l0) = match detect_pattern(p)? {
        Pattern::NonAp { witness } => {
            return Ok(Decision::Unknown(UnknownReason::PatternNotAffine {
                witness,
            }))
        }
        Pattern::Affine { d, l0 } => (d, l0),
    };
    if l0 % 2 == 1 {
        return Ok(Decision::Unknown(UnknownReason::PatternNotUniversal { l0 }));
    }
    let values = MomentSequence::new(values_in_order(p))?;
    let m = m_max.min((values.len() - 1) / 2);
    let verdict = hamburger_test(&values, m)?;
    Ok(match verdict.kind {
        PositivityKind::NotPositive { certificate, .. } => Decision::NotCompletable {
            d,
            l0,
            rows: certificate
                .indices
                .iter()
                .map(|r| l0 / 2 + r * (d + 1))
                .collect(),
            certificate,
        },
        _ => Decision::CompletableInPrinciple { d, l0, verdict },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PullbackTrace {
    /// Representing measure of the specified values.
    pub sub_measure: DiscreteMeasure,
    /// Lifted measure whose moments form the completion.
    pub measure: DiscreteMeasure,
    /// Every quadrature node and every root `y_i = x_i^{1/(d+1)}` was rational.
    pub exact_roots: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CompletionStatus {
    Completed {
        #[serde(serialize_with = "crate::io::ser_rational_vec")]
        sequence: Vec<Rational>,
        certified_depth: usize,
        exact: bool,
        /// Largest relative error on a specified entry (zero when exact).
        max_reproduction_error: f64,
    },
    NotCompletable {
        rows: Vec<usize>,
        certificate: MinorCertificate,
    },
    Unknown(UnknownReason),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompletionResult {
    pub status: CompletionStatus,
    pub trace: Option<PullbackTrace>,
}

impl CompletionResult {
    pub fn sequence(&self) -> Option<MomentSequence> {
        match &self.status {
            CompletionStatus::Completed { sequence, .. } => {
                MomentSequence::new(sequence.clone()).ok()
            }
            _ => None,
        }
    }
}

/// Representing measure of `values` with as few atoms as the data allow.
///
/// With `positive_support` every atom must be positive (or nonnegative when
/// `allow_zero`), which steers the free recurrence coefficient used when an
/// odd number of values is given. The flag reports whether the nodes are exact.
fn sub_measure(
    values: &MomentSequence,
    positive_support: bool,
    allow_zero: bool,
) -> Result<(DiscreteMeasure, bool)> {
    let coeffs = crate::orthopoly::recurrence_coefficients_partial(values)?;
    let (coeffs, n) = match coeffs.rank {
        Some(0) => return Err(Error::QuadratureFailure("s_0 vanishes".into())),
        Some(r) => (coeffs, r),
        None if coeffs.a_exact.len() > coeffs.b_sq_exact.len() => {
            let n = coeffs.a_exact.len();
            (coeffs, n)
        }
        None => {
            let n = coeffs.a_exact.len();
            let a_free = free_coefficient(&coeffs, n, positive_support, allow_zero)?;
            let mut a = coeffs.a_exact.clone();
            a.push(a_free);
            let extended = RecurrenceCoefficients::from_exact(
                coeffs.s0.clone(),
                a,
                coeffs.b_sq_exact.clone(),
            )?;
            (extended, n + 1)
        }
    };
    match exact_gauss_quadrature(&coeffs, n)? {
        Some(m) => Ok((m, true)),
        None => Ok((gauss_quadrature(&coeffs, n)?, false)),
    }
}

/// A value for `a_n` that closes the recurrence at `n + 1` nodes.
///
/// For positive support, `a_n` must exceed `b_{n-1}^2 (J_n^{-1})_{n-1,n-1}`,
/// the Schur-complement bound making the order-`n+1` Jacobi matrix positive
/// definite. Otherwise any value avoiding a node at zero will do.
fn free_coefficient(
    coeffs: &RecurrenceCoefficients,
    n: usize,
    positive_support: bool,
    allow_zero: bool,
) -> Result<Rational> {
    let b_last = &coeffs.b_sq_exact[n - 1];
    let det_jacobi = |k: usize| -> Result<Rational> {
        // det J_k = (-1)^k π_k(0)
        let v = monic_polys(coeffs, k)?.0.eval(&Rational::zero());
        Ok(if k.is_multiple_of(2) { v } else { -v })
    };
    if positive_support {
        let dets = (0..=n).map(det_jacobi).collect::<Result<Vec<_>>>()?;
        if dets.iter().any(|d| !d.is_positive()) {
            let nodes = gauss_quadrature(coeffs, n)?;
            let lowest = nodes.atoms()[0].position.clone();
            return Err(Error::NegativeAtomEvenRoot {
                atom: scalar::format(&lowest),
            });
        }
        let (det_n, det_nm1) = (&dets[n], &dets[n - 1]);
        let bound = b_last * det_nm1 / det_n;
        return Ok(bound.floor() + Rational::one());
    }
    let (pi_n, _) = monic_polys(coeffs, n)?;
    let (pi_nm1, _) = monic_polys(coeffs, n - 1)?;
    let at0 = (pi_n.eval(&Rational::zero()), pi_nm1.eval(&Rational::zero()));
    for k in 0..4i64 {
        let cand = scalar::int(if k % 2 == 0 { k / 2 } else { -(k + 1) / 2 });
        // π_{n+1}(0) = -a_n π_n(0) - b_{n-1}^2 π_{n-1}(0)
        let value = -&cand * &at0.0 - b_last * &at0.1;
        if allow_zero || !value.is_zero() {
            return Ok(cand);
        }
    }
    Ok(scalar::int(3))
}

/// Builds a completion from an `m`-th root lift, `m = d + 1`, of a representing
/// measure of the specified values.
///
/// The result holds `s_0..s_D` with `D = max(target_depth, max specified index)`.
/// Every specified entry is checked against the constructed sequence.
pub fn complete_via_pullback(p: &PartialHankel, target_depth: usize) -> Result<CompletionResult> {
    let decision = decide_completable(p, usize::MAX)?;
    let (d, l0) = match decision {
        Decision::CompletableInPrinciple { d, l0, .. } => (d, l0),
        Decision::NotCompletable {
            rows, certificate, ..
        } => {
            return Ok(CompletionResult {
                status: CompletionStatus::NotCompletable { rows, certificate },
                trace: None,
            })
        }
        Decision::Unknown(reason) => {
            return Ok(CompletionResult {
                status: CompletionStatus::Unknown(reason),
                trace: None,
            })
        }
    };
    let m = (d + 1) as u32;
    let values = MomentSequence::new(values_in_order(p))?;
    if values.terms().iter().all(|v| v.is_zero()) {
        return Ok(zero_data_completion(p, target_depth, l0));
    }
    let even_root = m.is_multiple_of(2);
    let (sub, exact_nodes) = sub_measure(&values, even_root, l0 == 0)?;

    let mut exact_roots = exact_nodes;
    let mut lifted = Vec::with_capacity(sub.len());
    for atom in sub.atoms() {
        let x = &atom.position;
        if even_root && x.is_negative() {
            return Err(Error::NegativeAtomEvenRoot {
                atom: scalar::format(x),
            });
        }
        let y = match scalar::nth_root_exact(x, m) {
            Some(y) => y,
            None => {
                exact_roots = false;
                let root = scalar::nth_root_f64(scalar::to_f64(x), m).ok_or_else(|| {
                    Error::NegativeAtomEvenRoot {
                        atom: scalar::format(x),
                    }
                })?;
                scalar::from_f64(root)?
            }
        };
        if l0 > 0 && y.is_zero() {
            return Err(Error::AtomAtZero);
        }
        let w = &atom.weight / scalar::pow(&y, l0);
        lifted.push((y, w));
    }
    let measure = DiscreteMeasure::new(lifted)?;
    let top = target_depth.max(p.max_index().unwrap_or(0));
    let completed = measure.moments(top + 1);

    let mut max_err = 0.0f64;
    for (j, v) in &p.specified {
        let got = completed.term(*j);
        if got == v {
            continue;
        }
        let scale = scalar::to_f64(v).abs().max(f64::MIN_POSITIVE);
        let err = scalar::to_f64(&(got - v)).abs() / scale;
        if exact_roots || err.is_nan() || err > REPRODUCTION_TOL {
            return Err(Error::QuadratureFailure(format!(
                "completion misses s_{j}: got {}, specified {}",
                scalar::to_f64(got),
                scalar::to_f64(v)
            )));
        }
        max_err = max_err.max(err);
    }
    let certified_depth = (top / 2).min(MAX_CERTIFIED_DEPTH);
    let verdict = hamburger_test(&completed, certified_depth)?;
    if !verdict.is_positive() {
        return Err(Error::QuadratureFailure(
            "completed sequence failed the Hankel test".into(),
        ));
    }
    let exact = exact_roots && max_err == 0.0;
    Ok(CompletionResult {
        status: CompletionStatus::Completed {
            sequence: completed.terms().to_vec(),
            certified_depth,
            exact,
            max_reproduction_error: max_err,
        },
        trace: Some(PullbackTrace {
            sub_measure: sub,
            measure,
            exact_roots,
        }),
    })
}

/// All specified values vanish: a unit atom at 0 when `s_0` is free, the zero sequence otherwise.
fn zero_data_completion(p: &PartialHankel, target_depth: usize, l0: usize) -> CompletionResult {
    let top = target_depth.max(p.max_index().unwrap_or(0));
    let mut sequence = vec![Rational::zero(); top + 1];
    let measure = if l0 > 0 {
        sequence[0] = Rational::one();
        DiscreteMeasure::new(vec![(Rational::zero(), Rational::one())]).ok()
    } else {
        None
    };
    CompletionResult {
        status: CompletionStatus::Completed {
            sequence,
            certified_depth: (top / 2).min(MAX_CERTIFIED_DEPTH),
            exact: true,
            max_reproduction_error: 0.0,
        },
        trace: measure.map(|measure| PullbackTrace {
            sub_measure: measure.clone(),
            measure,
            exact_roots: true,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, ratio};

    #[test]
    fn submatrix_examples() {
        let h = MomentSequence::hilbert(20);
        let full = principal_submatrix(&h, &[0, 1, 2, 3]).unwrap();
        assert!(full.is_hankel);
        assert_eq!(full.matrix[1][2], ratio(1, 4));
        let even = principal_submatrix(&h, &[0, 2, 4]).unwrap();
        assert_eq!(even.pattern, Some(Pattern::Affine { d: 1, l0: 0 }));
        assert_eq!(even.matrix[0], vec![int(1), ratio(1, 3), ratio(1, 5)]);
        assert!(!principal_submatrix(&h, &[0, 1, 3]).unwrap().is_hankel);
        assert!(matches!(
            principal_submatrix(&h, &[0, 10]),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn pattern_examples() {
        let p = |idx: &[usize]| PartialHankel::from_pairs(idx.iter().map(|&j| (j, int(1))));
        assert_eq!(
            detect_pattern(&p(&[0, 2, 4, 6])).unwrap(),
            Pattern::Affine { d: 1, l0: 0 }
        );
        assert_eq!(
            detect_pattern(&p(&[2, 5, 8])).unwrap(),
            Pattern::Affine { d: 2, l0: 2 }
        );
        assert_eq!(
            detect_pattern(&p(&[0, 1, 4])).unwrap(),
            Pattern::NonAp { witness: (0, 1, 4) }
        );
        assert!(matches!(
            detect_pattern(&p(&[3])),
            Err(Error::TooFewIndices { found: 1, .. })
        ));
    }

    #[test]
    fn decision_examples() {
        let h = MomentSequence::hilbert(20);
        let even = PartialHankel::from_mask(&h, 1, 0, 7).unwrap();
        assert!(decide_completable(&even, 3).unwrap().is_completable());

        let fact = PartialHankel::from_pairs([(0, int(1)), (1, ratio(1, 2)), (2, ratio(1, 6))]);
        match decide_completable(&fact, 1).unwrap() {
            Decision::NotCompletable { certificate, .. } => {
                assert_eq!(certificate.value, ratio(-1, 12))
            }
            other => panic!("{other:?}"),
        }
        let odd = PartialHankel::from_mask(&h, 1, 1, 3).unwrap();
        assert_eq!(
            decide_completable(&odd, 1).unwrap(),
            Decision::Unknown(UnknownReason::PatternNotUniversal { l0: 1 })
        );
    }

    #[test]
    fn pullback_examples() {
        let g = MomentSequence::geometric(ratio(1, 4), 20);
        let p =
            PartialHankel::from_mask(&MomentSequence::geometric(ratio(1, 2), 20), 1, 0, 5).unwrap();
        assert_eq!(p.get(2), Some(g.term(1)));
        let r = complete_via_pullback(&p, 9).unwrap();
        let seq = r.sequence().unwrap();
        for j in 0..10 {
            assert_eq!(*seq.term(j), scalar::pow(&ratio(1, 2), j));
        }

        let shifted =
            PartialHankel::from_mask(&MomentSequence::geometric(ratio(1, 2), 20), 1, 2, 4).unwrap();
        let r = complete_via_pullback(&shifted, 9).unwrap();
        let seq = r.sequence().unwrap();
        for (j, v) in shifted.specified() {
            assert_eq!(seq.term(*j), v);
        }
        assert!(matches!(
            r.status,
            CompletionStatus::Completed { exact: true, .. }
        ));

        let sym = PartialHankel::from_pairs(
            (0..4).map(|k| (2 * k, if k % 2 == 0 { int(1) } else { int(0) })),
        );
        // values (1, 0, 1, 0) are the moments of (δ_{-1} + δ_1)/2
        assert!(matches!(
            complete_via_pullback(&sym, 6),
            Err(Error::NegativeAtomEvenRoot { .. })
        ));
    }

    #[test]
    fn odd_count_positive_definite() {
        // three Hilbert values on even indices: one free coefficient
        let h = MomentSequence::hilbert(20);
        let p = PartialHankel::from_mask(&h, 1, 0, 3).unwrap();
        let r = complete_via_pullback(&p, 6).unwrap();
        let CompletionStatus::Completed {
            max_reproduction_error,
            ..
        } = r.status
        else {
            panic!("{:?}", r.status)
        };
        assert!(max_reproduction_error <= REPRODUCTION_TOL);
        let p = PartialHankel::from_mask(&h, 2, 0, 3).unwrap();
        assert!(complete_via_pullback(&p, 6).is_ok());
    }
}
