//! Finitely atomic measures used as ground truth for moment identities.

use num_complex::Complex64;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::scalar::{self, Rational};
use crate::sequence::MomentSequence;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    pub position: Rational,
    pub weight: Rational,
}

/// Positive weights at strictly increasing real positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscreteMeasure {
    atoms: Vec<Atom>,
}

impl DiscreteMeasure {
    /// Sorts the atoms and merges coincident positions; every weight must be positive.
    pub fn new(pairs: impl IntoIterator<Item = (Rational, Rational)>) -> Result<Self> {
        let mut atoms: Vec<Atom> = Vec::new();
        for (position, weight) in pairs {
            if !weight.is_positive() {
                return Err(Error::InvalidArgument(format!(
                    "atom weight {} is not positive",
                    scalar::format(&weight)
                )));
            }
            atoms.push(Atom { position, weight });
        }
        if atoms.is_empty() {
            return Err(Error::InvalidArgument(
                "a measure needs at least one atom".into(),
            ));
        }
        atoms.sort_by(|a, b| a.position.cmp(&b.position));
        let mut merged: Vec<Atom> = Vec::with_capacity(atoms.len());
        for atom in atoms {
            match merged.last_mut() {
                Some(last) if last.position == atom.position => last.weight += atom.weight,
                _ => merged.push(atom),
            }
        }
        Ok(DiscreteMeasure { atoms: merged })
    }

    /// Builds a measure from floating-point pairs, converting each value exactly.
    pub fn from_f64(pairs: &[(f64, f64)]) -> Result<Self> {
        let converted = pairs
            .iter()
            .map(|&(x, w)| Ok((scalar::from_f64(x)?, scalar::from_f64(w)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(converted)
    }

    pub fn dirac(position: Rational) -> Self {
        DiscreteMeasure {
            atoms: vec![Atom {
                position,
                weight: Rational::one(),
            }],
        }
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> Rational {
        self.atoms.iter().map(|a| &a.weight).sum()
    }

    pub fn moment(&self, k: usize) -> Rational {
        self.atoms
            .iter()
            .map(|a| &a.weight * scalar::pow(&a.position, k))
            .sum()
    }

    /// `s_k = Σ w_i x_i^k` for `k < count`, exactly.
    pub fn moments(&self, count: usize) -> MomentSequence {
        let count = count.max(1);
        let mut powers: Vec<Rational> = self.atoms.iter().map(|a| a.weight.clone()).collect();
        let mut terms = Vec::with_capacity(count);
        for _ in 0..count {
            terms.push(powers.iter().sum());
            for (p, a) in powers.iter_mut().zip(&self.atoms) {
                *p *= &a.position;
            }
        }
        MomentSequence::new(terms).expect("count >= 1")
    }

    /// Image under `u -> u^d` with density `u^{l0}`.
    ///
    /// Coincident images merge by weight addition. An atom at zero loses all its
    /// mass when `l0 > 0` and is dropped.
    pub fn pushforward(&self, d: u32, l0: u32) -> Result<DiscreteMeasure> {
        if d == 0 {
            return Err(Error::InvalidArgument(
                "pushforward exponent must be >= 1".into(),
            ));
        }
        if l0 % 2 == 1 {
            return Err(Error::InvalidArgument(
                "density exponent must be even".into(),
            ));
        }
        let mut pairs = Vec::with_capacity(self.atoms.len());
        for a in &self.atoms {
            let w = &a.weight * scalar::pow(&a.position, l0 as usize);
            if w.is_zero() {
                log::debug!("pushforward drops the atom at 0 (density u^{l0})");
                continue;
            }
            pairs.push((scalar::pow(&a.position, d as usize), w));
        }
        if pairs.is_empty() {
            return Err(Error::AtomAtZero);
        }
        DiscreteMeasure::new(pairs)
    }

    /// `Σ w_i / (x_i - λ)`.
    pub fn stieltjes_transform(&self, lambda: Complex64) -> Result<Complex64> {
        if lambda.im == 0.0 {
            return Err(Error::RealLambda);
        }
        Ok(self
            .atoms
            .iter()
            .map(|a| scalar::to_f64(&a.weight) / (scalar::to_f64(&a.position) - lambda))
            .sum())
    }

    /// `Σ w_i φ(x_i)^k` for `k < count`.
    pub fn product_family_moments(
        &self,
        phi: impl Fn(&Rational) -> Result<Rational>,
        count: usize,
    ) -> Result<MomentSequence> {
        let images = self
            .atoms
            .iter()
            .map(|a| Ok((phi(&a.position)?, a.weight.clone())))
            .collect::<Result<Vec<_>>>()?;
        let terms = (0..count.max(1))
            .map(|k| images.iter().map(|(y, w)| w * scalar::pow(y, k)).sum())
            .collect();
        MomentSequence::new(terms)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransformIdentity {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub residual: f64,
}

/// Compares the transform of the shifted measure `u^l dμ` with
/// `C + λ^l w_μ(λ)`, where `C = Σ_{i<l} λ^i s_{l-1-i}`.
pub fn shifted_transform_identity(
    mu: &DiscreteMeasure,
    l: u32,
    lambda: Complex64,
) -> Result<TransformIdentity> {
    if lambda.im == 0.0 {
        return Err(Error::RealLambda);
    }
    let lhs = mu.pushforward(1, l)?.stieltjes_transform(lambda)?;
    let moments = mu.moments(l as usize + 1);
    let c: Complex64 = (0..l as usize)
        .map(|i| lambda.powi(i as i32) * scalar::to_f64(moments.term(l as usize - 1 - i)))
        .sum();
    let rhs = c + lambda.powi(l as i32) * mu.stieltjes_transform(lambda)?;
    Ok(TransformIdentity {
        lhs,
        rhs,
        residual: (lhs - rhs).norm(),
    })
}

/// `∫ f(u^d) u^{l0} dμ - ∫ f dμ̃` with `μ̃ = pushforward(μ, d, l0)`; exactly zero.
pub fn integral_identity_check(
    mu: &DiscreteMeasure,
    d: u32,
    l0: u32,
    f: &Poly,
) -> Result<Rational> {
    let image = mu.pushforward(d, l0)?;
    let lhs: Rational = mu
        .atoms()
        .iter()
        .map(|a| {
            &a.weight
                * f.eval(&scalar::pow(&a.position, d as usize))
                * scalar::pow(&a.position, l0 as usize)
        })
        .sum();
    let rhs: Rational = image
        .atoms()
        .iter()
        .map(|a| &a.weight * f.eval(&a.position))
        .sum();
    Ok(lhs - rhs)
}
