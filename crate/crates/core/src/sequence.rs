//! Moment sequences, Hankel matrices and the classical positivity tests.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, MinorCertificate, PsdOutcome, RatMatrix};
use crate::scalar::{self, Rational, DEFAULT_PRECISION_BITS};

/// Default relative tolerance for zero decisions on approximate sequences.
pub const DEFAULT_APPROX_TOL: f64 = 1e-9;

/// Closed-form families a sequence can be tagged with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Generator {
    /// `s_k = 1/(k+1)`, the moments of Lebesgue measure on `[0, 1]`.
    Hilbert,
    /// `s_k = r^k`.
    Geometric {
        #[serde(with = "crate::io::rational_str")]
        r: Rational,
    },
    /// `s_k = 1/((k+1) e^{k+1})`.
    ExpDecay,
    /// `s_k = q^{-(k+1)^2/2}`, log-normal (Stieltjes-Wigert) moments.
    StieltjesWigert {
        #[serde(with = "crate::io::rational_str")]
        q: Rational,
    },
    /// Terms supplied by the user; nothing to regenerate.
    Custom { name: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Exactness {
    Exact,
    /// Terms are rational approximations with the given relative error bound.
    Approximate {
        rel_tol: f64,
    },
}

impl Generator {
    /// Generates `count` terms, approximating irrational values to `bits`
    /// significant bits.
    pub fn generate(&self, count: usize, bits: u32) -> Result<(Vec<Rational>, Exactness)> {
        let approx = Exactness::Approximate {
            rel_tol: 2f64.powi(-(bits.min(1000) as i32)).max(f64::MIN_POSITIVE),
        };
        match self {
            Generator::Hilbert => Ok((
                (0..count).map(|k| scalar::ratio(1, k as i64 + 1)).collect(),
                Exactness::Exact,
            )),
            Generator::Geometric { r } => Ok((
                (0..count).map(|k| scalar::pow(r, k)).collect(),
                Exactness::Exact,
            )),
            Generator::ExpDecay => {
                let e1 = scalar::exp_neg_one(bits + 16);
                let mut power = Rational::one();
                let terms = (0..count)
                    .map(|k| {
                        power *= &e1;
                        let t = &power / Rational::from_integer(BigInt::from(k + 1));
                        scalar::round_to_bits(&t, bits + 4)
                    })
                    .collect();
                Ok((terms, approx))
            }
            Generator::StieltjesWigert { q } => {
                if !(q.is_positive() && *q < Rational::one()) {
                    return Err(Error::InvalidArgument(
                        "Stieltjes-Wigert parameter must lie in (0, 1)".into(),
                    ));
                }
                let inv = q.recip();
                let half = scalar::sqrt_approx(&inv, bits + 16)?;
                let exact_half = scalar::nth_root_exact(&inv, 2).is_some();
                let terms = (0..count)
                    .map(|k| {
                        let e = (k + 1) * (k + 1);
                        let base = scalar::pow(&inv, e / 2);
                        if e % 2 == 0 {
                            base
                        } else if exact_half {
                            base * &half
                        } else {
                            scalar::round_to_bits(&(base * &half), bits + 4)
                        }
                    })
                    .collect();
                Ok((terms, if exact_half { Exactness::Exact } else { approx }))
            }
            Generator::Custom { name } => Err(Error::InvalidArgument(format!(
                "custom generator {name:?} has no closed form"
            ))),
        }
    }
}

/// A finite prefix `s_0, s_1, ...` of a moment sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSequence {
    terms: Vec<Rational>,
    exactness: Exactness,
    generator: Option<Generator>,
}

impl MomentSequence {
    pub fn new(terms: Vec<Rational>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidArgument(
                "a sequence needs at least one term".into(),
            ));
        }
        Ok(MomentSequence {
            terms,
            exactness: Exactness::Exact,
            generator: None,
        })
    }

    pub fn from_ints(terms: &[i64]) -> Result<Self> {
        Self::new(terms.iter().map(|&v| scalar::int(v)).collect())
    }

    pub fn with_exactness(mut self, exactness: Exactness) -> Self {
        self.exactness = exactness;
        self
    }

    pub fn with_generator(mut self, generator: Generator) -> Self {
        self.generator = Some(generator);
        self
    }

    pub fn from_generator(generator: Generator, count: usize) -> Result<Self> {
        Self::from_generator_with_bits(generator, count, DEFAULT_PRECISION_BITS)
    }

    pub fn from_generator_with_bits(generator: Generator, count: usize, bits: u32) -> Result<Self> {
        let (terms, exactness) = generator.generate(count, bits)?;
        Ok(Self::new(terms)?
            .with_exactness(exactness)
            .with_generator(generator))
    }

    pub fn hilbert(count: usize) -> Self {
        Self::from_generator(Generator::Hilbert, count).expect("hilbert generator")
    }

    pub fn geometric(r: Rational, count: usize) -> Self {
        Self::from_generator(Generator::Geometric { r }, count).expect("geometric generator")
    }

    pub fn terms(&self) -> &[Rational] {
        &self.terms
    }

    pub fn term(&self, k: usize) -> &Rational {
        &self.terms[k]
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn exactness(&self) -> Exactness {
        self.exactness
    }

    pub fn generator(&self) -> Option<&Generator> {
        self.generator.as_ref()
    }

    pub fn is_exact(&self) -> bool {
        self.exactness == Exactness::Exact
    }

    /// Zero-decision tolerance: `None` for exact sequences.
    pub fn tolerance(&self) -> Option<f64> {
        match self.exactness {
            Exactness::Exact => None,
            Exactness::Approximate { rel_tol } => Some(rel_tol.max(DEFAULT_APPROX_TOL)),
        }
    }

    pub fn require(&self, needed: usize) -> Result<()> {
        if self.terms.len() < needed {
            Err(Error::InsufficientTerms {
                needed,
                available: self.terms.len(),
            })
        } else {
            Ok(())
        }
    }

    /// Checks that the generator tag reproduces the stored terms.
    pub fn check_generator(&self) -> Result<()> {
        let Some(generator) = &self.generator else {
            return Ok(());
        };
        if matches!(generator, Generator::Custom { .. }) {
            return Ok(());
        }
        let (expected, exactness) = generator.generate(self.terms.len(), DEFAULT_PRECISION_BITS)?;
        for (k, (have, want)) in self.terms.iter().zip(&expected).enumerate() {
            let ok = match exactness {
                Exactness::Exact => have == want,
                Exactness::Approximate { .. } => {
                    let diff = scalar::to_f64(&(have - want)).abs();
                    diff <= DEFAULT_APPROX_TOL * scalar::to_f64(want).abs()
                }
            };
            if !ok {
                return Err(Error::InvalidArgument(format!(
                    "term {k} does not match the {generator:?} generator"
                )));
            }
        }
        Ok(())
    }

    /// The tail `s_shift, s_{shift+1}, ...`.
    pub fn shifted(&self, shift: usize) -> Result<MomentSequence> {
        self.require(shift + 1)?;
        Ok(MomentSequence {
            terms: self.terms[shift..].to_vec(),
            exactness: self.exactness,
            generator: None,
        })
    }

    pub fn truncated(&self, count: usize) -> MomentSequence {
        MomentSequence {
            terms: self.terms[..count.min(self.terms.len())].to_vec(),
            exactness: self.exactness,
            generator: self.generator.clone(),
        }
    }

    /// Term-wise combination over the common prefix.
    pub fn zip_with(
        &self,
        other: &MomentSequence,
        f: impl Fn(&Rational, &Rational) -> Rational,
    ) -> MomentSequence {
        let terms = self
            .terms
            .iter()
            .zip(&other.terms)
            .map(|(a, b)| f(a, b))
            .collect();
        let exactness = if self.is_exact() && other.is_exact() {
            Exactness::Exact
        } else {
            self.exactness
        };
        MomentSequence {
            terms,
            exactness,
            generator: None,
        }
    }

    /// Replaces `s_index` by `value`.
    pub fn with_term(&self, index: usize, value: Rational) -> MomentSequence {
        let mut out = self.clone();
        out.terms[index] = value;
        out.generator = None;
        out
    }
}

/// `H[i][j] = s_{i+j+shift}` for `0 <= i, j <= order`.
#[derive(Debug, Clone, PartialEq)]
pub struct HankelMatrix {
    pub order: usize,
    pub shift: usize,
    pub entries: RatMatrix,
}

impl HankelMatrix {
    pub fn size(&self) -> usize {
        self.order + 1
    }

    pub fn determinant(&self) -> Rational {
        linalg::det(&self.entries)
    }
}

fn hankel_from_terms(terms: &[Rational], m: usize, shift: usize) -> RatMatrix {
    (0..=m)
        .map(|i| (0..=m).map(|j| terms[i + j + shift].clone()).collect())
        .collect()
}

pub fn hankel(seq: &MomentSequence, m: usize, shift: usize) -> Result<HankelMatrix> {
    if shift > 1 {
        return Err(Error::InvalidArgument("shift must be 0 or 1".into()));
    }
    seq.require(2 * m + 1 + shift)?;
    Ok(HankelMatrix {
        order: m,
        shift,
        entries: hankel_from_terms(seq.terms(), m, shift),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PositivityKind {
    PositiveDefinite,
    PositiveSemidefinite {
        rank: usize,
    },
    NotPositive {
        /// Hankel order at which the failure is certified.
        order: usize,
        certificate: MinorCertificate,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PositivityVerdict {
    pub kind: PositivityKind,
    pub tested_up_to: usize,
    /// Leading Hankel determinants `D_0 ..= D_{tested_up_to}`.
    #[serde(serialize_with = "crate::io::ser_rational_vec")]
    pub determinants: Vec<Rational>,
    /// Set when the input terms are approximations and zero decisions used a tolerance.
    pub approximate: bool,
}

impl PositivityVerdict {
    /// Positive definite or positive semidefinite.
    pub fn is_positive(&self) -> bool {
        !matches!(self.kind, PositivityKind::NotPositive { .. })
    }

    pub fn is_positive_definite(&self) -> bool {
        matches!(self.kind, PositivityKind::PositiveDefinite)
    }

    pub fn rank(&self) -> Option<usize> {
        match self.kind {
            PositivityKind::PositiveSemidefinite { rank } => Some(rank),
            _ => None,
        }
    }

    pub fn certificate(&self) -> Option<&MinorCertificate> {
        match &self.kind {
            PositivityKind::NotPositive { certificate, .. } => Some(certificate),
            _ => None,
        }
    }
}

/// Positivity of `[terms_{i+j}]` for orders `0..=m_max`.
pub(crate) fn hankel_positivity(
    terms: &[Rational],
    m_max: usize,
    tol: Option<f64>,
) -> PositivityVerdict {
    let full = hankel_from_terms(terms, m_max, 0);
    let determinants = linalg::leading_minors(&full);
    let mut diag_scale = 1.0f64;
    let mut first_nonpositive = None;
    for (k, d) in determinants.iter().enumerate() {
        diag_scale *= scalar::to_f64(&terms[2 * k]).abs();
        let zero = match tol {
            None => d.is_zero(),
            Some(eps) => scalar::to_f64(d).abs() <= eps * diag_scale,
        };
        if zero || d.is_negative() {
            first_nonpositive = Some((k, zero));
            break;
        }
    }
    let kind = match first_nonpositive {
        None => PositivityKind::PositiveDefinite,
        Some((k, false)) => PositivityKind::NotPositive {
            order: k,
            certificate: MinorCertificate {
                indices: (0..=k).collect(),
                value: determinants[k].clone(),
            },
        },
        Some((k, true)) => match linalg::psd_check(&full, tol) {
            PsdOutcome::Psd { .. } => PositivityKind::PositiveSemidefinite { rank: k },
            PsdOutcome::NotPsd(certificate) => PositivityKind::NotPositive {
                order: *certificate.indices.iter().max().unwrap_or(&0),
                certificate,
            },
        },
    };
    PositivityVerdict {
        kind,
        tested_up_to: m_max,
        determinants,
        approximate: tol.is_some(),
    }
}

/// Hamburger positivity of the Hankel matrices `H_0, ..., H_{m_max}`.
///
/// Leading minors are computed exactly; when one vanishes the full matrix is
/// checked for semidefiniteness, so a `NotPositive` verdict always carries a
/// negative principal minor.
pub fn hamburger_test(seq: &MomentSequence, m_max: usize) -> Result<PositivityVerdict> {
    seq.require(2 * m_max + 1)?;
    Ok(hankel_positivity(seq.terms(), m_max, seq.tolerance()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StieltjesVerdict {
    pub hankel: PositivityVerdict,
    pub shifted: PositivityVerdict,
    pub solvable: bool,
}

/// Both determinant families `D_m` and `D_m^(1)` up to `m_max`.
pub fn stieltjes_test(seq: &MomentSequence, m_max: usize) -> Result<StieltjesVerdict> {
    seq.require(2 * m_max + 2)?;
    let hankel = hankel_positivity(seq.terms(), m_max, seq.tolerance());
    let shifted = hankel_positivity(&seq.terms()[1..], m_max, seq.tolerance());
    let solvable = hankel.is_positive() && shifted.is_positive();
    Ok(StieltjesVerdict {
        hankel,
        shifted,
        solvable,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HausdorffViolation {
    pub n: usize,
    pub k: usize,
    /// The offending value of `(-1)^n Δ^n s_k`.
    #[serde(serialize_with = "crate::io::ser_rational")]
    pub value: Rational,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HausdorffResult {
    pub completely_monotonic: bool,
    pub first_violation: Option<HausdorffViolation>,
    pub n_max: usize,
    pub k_max: usize,
}

/// `(-1)^n Δ^n s_k >= 0` for `n <= n_max`, `k <= k_max`.
pub fn hausdorff_test(seq: &MomentSequence, n_max: usize, k_max: usize) -> Result<HausdorffResult> {
    seq.require(n_max + k_max + 1)?;
    let tol = seq.tolerance();
    let s = seq.terms();
    for n in 0..=n_max {
        for k in 0..=k_max {
            // (-1)^n Δ^n s_k = Σ_i C(n,i) (-1)^i s_{i+k}
            let mut value = Rational::zero();
            let mut scale = 0.0;
            for i in 0..=n {
                let c = Rational::from_integer(scalar::binomial(n as u64, i as u64));
                let t = &c * &s[i + k];
                scale += scalar::to_f64(&t).abs();
                if i % 2 == 0 {
                    value += t;
                } else {
                    value -= t;
                }
            }
            let violated = match tol {
                None => value.is_negative(),
                Some(eps) => scalar::to_f64(&value) < -eps * scale,
            };
            if violated {
                return Ok(HausdorffResult {
                    completely_monotonic: false,
                    first_violation: Some(HausdorffViolation { n, k, value }),
                    n_max,
                    k_max,
                });
            }
        }
    }
    Ok(HausdorffResult {
        completely_monotonic: true,
        first_violation: None,
        n_max,
        k_max,
    })
}
