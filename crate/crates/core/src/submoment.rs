//! Sub-moment sequences: extraction masks, pattern-level validity and
//! per-sequence positivity of extracted subsequences.
//!
//! A mask `ℓ = (ℓ_0, ℓ_1, ...)` extracts `s̃_k = s_{k + ℓ_k}`. A mask is valid
//! for every positive sequence exactly when `[u^{ℓ_{i+j}}]` is positive
//! semidefinite for every real `u`; for affine masks this reduces to `ℓ_0`
//! being even.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, MinorCertificate, PsdOutcome};
use crate::measure::DiscreteMeasure;
use crate::orthopoly::recurrence_coefficients_partial;
use crate::poly::{self, Poly};
use crate::scalar::{self, Rational};
use crate::sequence::{hamburger_test, Generator, MomentSequence, PositivityVerdict};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtractionMask {
    /// `ℓ_k = k d + l0`, selecting `j_k = k (d + 1) + l0`.
    Affine {
        d: usize,
        l0: usize,
    },
    Explicit(Vec<usize>),
}

impl ExtractionMask {
    pub fn ell(&self, k: usize) -> Option<usize> {
        match self {
            ExtractionMask::Affine { d, l0 } => Some(k * d + l0),
            ExtractionMask::Explicit(ell) => ell.get(k).copied(),
        }
    }

    /// Number of entries, `None` for an affine mask.
    pub fn len(&self) -> Option<usize> {
        match self {
            ExtractionMask::Affine { .. } => None,
            ExtractionMask::Explicit(ell) => Some(ell.len()),
        }
    }

    /// `ℓ_0..ℓ_{count-1}`.
    pub fn ells(&self, count: usize) -> Result<Vec<usize>> {
        (0..count)
            .map(|k| {
                self.ell(k).ok_or(Error::InsufficientTerms {
                    needed: count,
                    available: k,
                })
            })
            .collect()
    }

    /// Selected indices `j_k = k + ℓ_k`.
    pub fn indices(&self, count: usize) -> Result<Vec<usize>> {
        Ok(self
            .ells(count)?
            .into_iter()
            .enumerate()
            .map(|(k, l)| k + l)
            .collect())
    }

    pub fn to_explicit(&self, count: usize) -> Result<ExtractionMask> {
        Ok(ExtractionMask::Explicit(self.ells(count)?))
    }

    /// The single mask equivalent to extracting with `self` and then with `then`.
    pub fn compose(&self, then: &ExtractionMask, count: usize) -> Result<ExtractionMask> {
        match (self, then) {
            (
                ExtractionMask::Affine { d: d1, l0: a1 },
                ExtractionMask::Affine { d: d2, l0: a2 },
            ) => Ok(ExtractionMask::Affine {
                d: (d1 + 1) * (d2 + 1) - 1,
                l0: a1 + a2 * (d1 + 1),
            }),
            _ => {
                let outer = then.indices(count)?;
                let inner = self.indices(outer.iter().max().map_or(0, |m| m + 1))?;
                Ok(ExtractionMask::Explicit(
                    outer
                        .iter()
                        .enumerate()
                        .map(|(k, &j)| inner[j] - k)
                        .collect(),
                ))
            }
        }
    }
}

/// `s̃_k = s_{k + ℓ_k}` for `k < count`.
pub fn extract(
    seq: &MomentSequence,
    mask: &ExtractionMask,
    count: usize,
) -> Result<MomentSequence> {
    let idx = mask.indices(count)?;
    if let Some(&top) = idx.last() {
        seq.require(top + 1)?;
    }
    let terms = idx.iter().map(|&j| seq.term(j).clone()).collect();
    Ok(MomentSequence::new(terms)?.with_exactness(seq.exactness()))
}

/// Hamburger test of the extracted subsequence through order `m_max`.
pub fn subsequence_positivity(
    seq: &MomentSequence,
    mask: &ExtractionMask,
    m_max: usize,
) -> Result<PositivityVerdict> {
    hamburger_test(&extract(seq, mask, 2 * m_max + 1)?, m_max)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "condition", rename_all = "snake_case")]
pub enum PatternFailure {
    /// `ℓ_i` odd at an even position: the diagonal entry `u^{ℓ_i}` changes sign.
    OddDiagonal { index: usize, ell: usize },
    /// `ℓ_i ≠ (ℓ_{i-1} + ℓ_{i+1})/2` at an odd position.
    Midpoint {
        index: usize,
        prev: usize,
        ell: usize,
        next: usize,
    },
    /// A principal minor of `[u^{ℓ_{i+j}}]` that is negative somewhere on the real line.
    NegativeMinor {
        rows: Vec<usize>,
        polynomial: String,
        #[serde(skip)]
        witness: Poly,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum UniversalVerdict {
    /// Valid for every positive sequence; `checked_order` is `None` for affine masks.
    ValidForAllPositiveSequences {
        checked_order: Option<usize>,
    },
    InvalidPattern {
        failure: PatternFailure,
    },
}

impl UniversalVerdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, UniversalVerdict::ValidForAllPositiveSequences { .. })
    }

    pub fn witness(&self) -> Option<&Poly> {
        match self {
            UniversalVerdict::InvalidPattern {
                failure: PatternFailure::NegativeMinor { witness, .. },
            } => Some(witness),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaskVerdict {
    pub universal: UniversalVerdict,
    pub per_sequence: Option<PositivityVerdict>,
}

/// Determinant of a polynomial matrix by fraction-free elimination.
fn poly_det(mut m: Vec<Vec<Poly>>) -> Poly {
    let n = m.len();
    let mut sign = false;
    let mut prev = Poly::constant(Rational::one());
    for k in 0..n {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                Some(i) => {
                    m.swap(k, i);
                    sign = !sign;
                }
                None => return Poly::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &(&m[i][j] * &m[k][k]) - &(&m[i][k] * &m[k][j]);
                m[i][j] = num.div_rem(&prev).0;
            }
        }
        prev = m[k][k].clone();
    }
    if sign {
        -&m[n - 1][n - 1]
    } else {
        m[n - 1][n - 1].clone()
    }
}

/// Principal index sets of `0..=m`: leading ones first, then the rest by size.
fn principal_sets(m: usize) -> Vec<Vec<usize>> {
    let mut sets: Vec<Vec<usize>> = (0..=m).map(|k| (0..=k).collect()).collect();
    let mut rest: Vec<Vec<usize>> = (1u64..1 << (m + 1))
        .map(|bits| (0..=m).filter(|i| bits >> i & 1 == 1).collect::<Vec<_>>())
        .filter(|s: &Vec<usize>| s.iter().copied().ne(0..s.len()))
        .collect();
    rest.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    sets.extend(rest);
    sets
}

/// Pattern-level validity of a mask.
///
/// Explicit masks are checked on the window `i, j ≤ m` with
/// `m = min(m_cap, (len − 1)/2)`: parity of even-position entries, the
/// midpoint condition at odd positions, then every principal minor of
/// `[u^{ℓ_{i+j}}]` as a polynomial.
pub fn mask_universal_check(mask: &ExtractionMask, m_cap: usize) -> UniversalVerdict {
    let ell = match mask {
        ExtractionMask::Affine { l0, .. } => {
            return if l0 % 2 == 0 {
                UniversalVerdict::ValidForAllPositiveSequences {
                    checked_order: None,
                }
            } else {
                UniversalVerdict::InvalidPattern {
                    failure: PatternFailure::OddDiagonal { index: 0, ell: *l0 },
                }
            };
        }
        ExtractionMask::Explicit(ell) => ell,
    };
    if ell.is_empty() {
        return UniversalVerdict::ValidForAllPositiveSequences {
            checked_order: Some(0),
        };
    }
    let m = m_cap.min((ell.len() - 1) / 2);
    for i in (0..=2 * m).step_by(2) {
        if ell[i] % 2 == 1 {
            return UniversalVerdict::InvalidPattern {
                failure: PatternFailure::OddDiagonal {
                    index: i,
                    ell: ell[i],
                },
            };
        }
    }
    for i in (1..2 * m).step_by(2) {
        if 2 * ell[i] != ell[i - 1] + ell[i + 1] {
            return UniversalVerdict::InvalidPattern {
                failure: PatternFailure::Midpoint {
                    index: i,
                    prev: ell[i - 1],
                    ell: ell[i],
                    next: ell[i + 1],
                },
            };
        }
    }
    for rows in principal_sets(m) {
        let sub: Vec<Vec<Poly>> = rows
            .iter()
            .map(|&i| {
                rows.iter()
                    .map(|&j| Poly::monomial(Rational::one(), ell[i + j]))
                    .collect()
            })
            .collect();
        let det = poly_det(sub);
        if !poly::is_nonnegative_on_reals(&det) {
            return UniversalVerdict::InvalidPattern {
                failure: PatternFailure::NegativeMinor {
                    polynomial: det.display_with("u"),
                    rows,
                    witness: det,
                },
            };
        }
    }
    UniversalVerdict::ValidForAllPositiveSequences {
        checked_order: Some(m),
    }
}

/// Pattern verdict together with the per-sequence verdict when a sequence is given.
pub fn mask_verdict(
    mask: &ExtractionMask,
    m_cap: usize,
    seq: Option<(&MomentSequence, usize)>,
) -> Result<MaskVerdict> {
    Ok(MaskVerdict {
        universal: mask_universal_check(mask, m_cap),
        per_sequence: seq
            .map(|(s, m_max)| subsequence_positivity(s, mask, m_max))
            .transpose()?,
    })
}

/// Which Hankel matrices constrain a perturbed term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationFamily {
    /// `H_m` for `m ≤ m_max`.
    #[default]
    Hamburger,
    /// `H_m` and the shifted `H^(1)_m` for `m ≤ m_max`.
    Stieltjes,
}

impl PerturbationFamily {
    fn max_index(self, m_max: usize) -> usize {
        match self {
            PerturbationFamily::Hamburger => 2 * m_max,
            PerturbationFamily::Stieltjes => 2 * m_max + 1,
        }
    }

    /// Largest matrices of the family; the smaller ones are their leading blocks.
    fn matrices(self, terms: &[Rational], m_max: usize) -> Vec<Vec<Vec<Rational>>> {
        let build = |shift: usize| {
            (0..=m_max)
                .map(|i| (0..=m_max).map(|j| terms[i + j + shift].clone()).collect())
                .collect()
        };
        match self {
            PerturbationFamily::Hamburger => vec![build(0)],
            PerturbationFamily::Stieltjes => vec![build(0), build(1)],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IntervalBound {
    Unbounded,
    /// The endpoint lies in the closed segment between `feasible` and `infeasible`.
    Bracket {
        #[serde(serialize_with = "crate::io::ser_rational")]
        feasible: Rational,
        #[serde(serialize_with = "crate::io::ser_rational")]
        infeasible: Rational,
    },
}

impl IntervalBound {
    pub fn feasible(&self) -> Option<&Rational> {
        match self {
            IntervalBound::Unbounded => None,
            IntervalBound::Bracket { feasible, .. } => Some(feasible),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerturbationInterval {
    pub order: usize,
    pub lower: IntervalBound,
    pub upper: IntervalBound,
    /// No feasible value other than the original was found.
    pub single_point: bool,
}

impl PerturbationInterval {
    /// Width between the feasible ends, `None` when unbounded.
    pub fn width(&self) -> Option<Rational> {
        Some(self.upper.feasible()? - self.lower.feasible()?)
    }

    pub fn contains(&self, tau: &Rational) -> bool {
        let above = match &self.lower {
            IntervalBound::Unbounded => true,
            IntervalBound::Bracket { feasible, .. } => tau >= feasible,
        };
        let below = match &self.upper {
            IntervalBound::Unbounded => true,
            IntervalBound::Bracket { feasible, .. } => tau <= feasible,
        };
        above && below
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerturbationReport {
    pub index: usize,
    pub family: PerturbationFamily,
    #[serde(serialize_with = "crate::io::ser_rational")]
    pub original: Rational,
    /// One interval per order at which the term is constrained, up to `m_max`.
    pub by_order: Vec<PerturbationInterval>,
    pub rigid: bool,
    /// The interval at `m_max` is strictly narrower than at the first constrained order.
    pub shrinking: bool,
}

impl PerturbationReport {
    pub fn interval(&self) -> &PerturbationInterval {
        self.by_order.last().expect("at least one order")
    }
}

/// Bisection steps used to bracket each endpoint.
pub const PERTURBATION_BISECTION_STEPS: usize = 64;

fn feasible(
    family: PerturbationFamily,
    terms: &[Rational],
    m: usize,
    n: usize,
    tau: &Rational,
    tol: Option<f64>,
) -> bool {
    let mut t = terms.to_vec();
    t[n] = tau.clone();
    family
        .matrices(&t, m)
        .iter()
        .all(|h| matches!(linalg::psd_check(h, tol), PsdOutcome::Psd { .. }))
}

fn off_diagonal(family: PerturbationFamily, m: usize, n: usize) -> Option<(usize, usize)> {
    let shifts: &[usize] = match family {
        PerturbationFamily::Hamburger => &[0],
        PerturbationFamily::Stieltjes => &[0, 1],
    };
    for &shift in shifts {
        if n < shift {
            continue;
        }
        let sum = n - shift;
        for i in 0..=m.min(sum) {
            let j = sum - i;
            if j <= m && i != j {
                return Some((2 * i + shift, 2 * j + shift));
            }
        }
    }
    None
}

fn interval_at(
    family: PerturbationFamily,
    terms: &[Rational],
    m: usize,
    n: usize,
    tol: Option<f64>,
) -> PerturbationInterval {
    let s_n = terms[n].clone();
    let bisect = |mut good: Rational, mut bad: Rational| {
        for _ in 0..PERTURBATION_BISECTION_STEPS {
            let mid = (&good + &bad) / scalar::int(2);
            if feasible(family, terms, m, n, &mid, tol) {
                good = mid;
            } else {
                bad = mid;
            }
        }
        IntervalBound::Bracket {
            feasible: good,
            infeasible: bad,
        }
    };
    let reach = match off_diagonal(family, m, n) {
        Some((a, b)) => (&terms[a] + &terms[b]) / scalar::int(2) + Rational::one(),
        None => &s_n.abs() + Rational::one(),
    };
    let upper = if off_diagonal(family, m, n).is_some() {
        bisect(s_n.clone(), &s_n + &reach + &reach)
    } else {
        IntervalBound::Unbounded
    };
    let lower = bisect(s_n.clone(), &s_n - &reach - &reach);
    let single_point = lower.feasible() == Some(&s_n) && upper.feasible() == Some(&s_n);
    PerturbationInterval {
        order: m,
        lower,
        upper,
        single_point,
    }
}

/// Replacement values for `s_n` that keep the family's Hankel matrices
/// through order `m_max` positive semidefinite.
///
/// The feasible set is an interval (a line through a convex cone); each
/// finite endpoint is bracketed by exact rational bisection.
pub fn perturbation_interval(
    seq: &MomentSequence,
    n: usize,
    m_max: usize,
    family: PerturbationFamily,
) -> Result<PerturbationReport> {
    let top = family.max_index(m_max);
    seq.require(top + 1)?;
    if n > top {
        return Err(Error::IndexOutOfRange {
            index: n,
            limit: top,
        });
    }
    let terms = &seq.terms()[..=top];
    let tol = seq.tolerance();
    if !feasible(family, terms, m_max, n, &terms[n], tol) {
        return Err(Error::NotPositive(format!(
            "input is not positive semidefinite through order {m_max}"
        )));
    }
    let first = match family {
        PerturbationFamily::Hamburger => n.div_ceil(2),
        PerturbationFamily::Stieltjes => n.saturating_sub(1).div_ceil(2),
    };
    let by_order: Vec<PerturbationInterval> = (first..=m_max)
        .map(|m| interval_at(family, terms, m, n, tol))
        .collect();
    let last = by_order
        .last()
        .expect("n <= top implies a constrained order");
    let shrinking = match (by_order[0].width(), last.width()) {
        (None, Some(_)) => true,
        (Some(a), Some(b)) => b < a,
        _ => {
            let lo = |iv: &PerturbationInterval| iv.lower.feasible().cloned();
            lo(last) > lo(&by_order[0])
        }
    };
    Ok(PerturbationReport {
        index: n,
        family,
        original: terms[n].clone(),
        rigid: last.single_point,
        shrinking,
        by_order,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCheck {
    #[serde(serialize_with = "crate::io::ser_rational")]
    pub lhs: Rational,
    #[serde(serialize_with = "crate::io::ser_rational")]
    pub rhs: Rational,
    pub satisfied: bool,
}

/// `Σ_q (s_{p_q} − τ_q)(p_q + 1) ≤ (m + 1)^2 s_0`, a necessary condition on
/// downward replacements.
pub fn perturbation_bound_check(
    seq: &MomentSequence,
    replaced: &[(usize, Rational)],
    m: usize,
) -> Result<BoundCheck> {
    let mut seen = std::collections::BTreeSet::new();
    let mut lhs = Rational::zero();
    for (p, tau) in replaced {
        if !seen.insert(*p) {
            return Err(Error::InvalidArgument(format!("index {p} replaced twice")));
        }
        seq.require(p + 1)?;
        let s = seq.term(*p);
        if tau > s {
            return Err(Error::InvalidArgument(format!(
                "replacement {} exceeds s_{p} = {}",
                scalar::format(tau),
                scalar::format(s)
            )));
        }
        lhs += (s - tau) * scalar::int(*p as i64 + 1);
    }
    let rhs = scalar::int(((m + 1) * (m + 1)) as i64) * seq.term(0);
    Ok(BoundCheck {
        satisfied: lhs <= rhs,
        lhs,
        rhs,
    })
}

/// The map `φ` whose powers generate a product-family sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PhiKind {
    Identity,
    Power {
        exponent: usize,
    },
    /// Values of `φ` at each atom position, as `(position, value)` pairs.
    Table {
        #[serde(with = "crate::io::rational_pairs")]
        values: Vec<(Rational, Rational)>,
    },
}

/// `s_k = Σ w_i φ(x_i)^k`, the moments of the `φ`-image of `μ`.
pub fn product_family_moments(
    mu: &DiscreteMeasure,
    phi: &PhiKind,
    count: usize,
) -> Result<MomentSequence> {
    mu.product_family_moments(
        |x| match phi {
            PhiKind::Identity => Ok(x.clone()),
            PhiKind::Power { exponent } => Ok(scalar::pow(x, *exponent)),
            PhiKind::Table { values } => values
                .iter()
                .find(|(p, _)| p == x)
                .map(|(_, v)| v.clone())
                .ok_or_else(|| {
                    Error::InvalidArgument(format!("φ undefined at {}", scalar::format(x)))
                }),
        },
        count,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModifiedMass {
    #[serde(serialize_with = "crate::io::ser_rational")]
    pub q: Rational,
    /// Number of terms `P_0(0)^2 .. P_{N}(0)^2` actually summed.
    pub terms_used: usize,
    pub s0: f64,
    pub kernel_sum: f64,
    pub modified_s0: f64,
    /// Geometric extrapolation of the omitted terms, when the last terms decay.
    pub tail_estimate: Option<f64>,
}

/// `s̃_0 = s_0 − 1/Σ_{n≤N} P_n(0)^2` for the Stieltjes-Wigert moments
/// `q^{-(k+1)^2/2}`.
///
/// `P_n(0)^2 = π_n(0)^2 / (s_0 b_0^2 ... b_{n-1}^2)` is computed from exact
/// recurrence data; if the working precision cannot resolve depth `N` the sum
/// stops early and `terms_used` says where.
pub fn stieltjes_wigert_modified_s0(
    q: &Rational,
    n_trunc: usize,
    bits: u32,
) -> Result<ModifiedMass> {
    let seq = MomentSequence::from_generator_with_bits(
        Generator::StieltjesWigert { q: q.clone() },
        2 * n_trunc + 2,
        bits,
    )?;
    let coeffs = recurrence_coefficients_partial(&seq)?;
    let depth = n_trunc
        .min(coeffs.b_sq_exact.len())
        .min(coeffs.a_exact.len());
    let mut pi_prev = Rational::zero();
    let mut pi = Rational::one();
    let mut norm = seq.term(0).clone();
    let mut summands = vec![&pi * &pi / &norm];
    for k in 0..depth {
        let next = -&coeffs.a_exact[k] * &pi
            - if k == 0 {
                Rational::zero()
            } else {
                &coeffs.b_sq_exact[k - 1] * &pi_prev
            };
        pi_prev = std::mem::replace(&mut pi, next);
        norm *= &coeffs.b_sq_exact[k];
        summands.push(&pi * &pi / &norm);
    }
    let total: Rational = summands.iter().sum();
    let s0 = scalar::to_f64(seq.term(0));
    let kernel_sum = scalar::to_f64(&total);
    let tail_estimate = match summands.as_slice() {
        [.., a, b] if !a.is_zero() => {
            let r = scalar::to_f64(&(b / a));
            (r < 1.0).then(|| scalar::to_f64(b) * r / (1.0 - r))
        }
        _ => None,
    };
    Ok(ModifiedMass {
        q: q.clone(),
        terms_used: summands.len(),
        s0,
        kernel_sum,
        modified_s0: s0 - 1.0 / kernel_sum,
        tail_estimate,
    })
}

/// Negative principal minor of the extracted Hankel matrix, if any.
pub fn extraction_certificate(
    seq: &MomentSequence,
    mask: &ExtractionMask,
    m_max: usize,
) -> Result<Option<MinorCertificate>> {
    Ok(subsequence_positivity(seq, mask, m_max)?
        .certificate()
        .cloned())
}
