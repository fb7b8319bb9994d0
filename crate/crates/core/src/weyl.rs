//! Weyl circles, Nevanlinna partial sums and determinacy diagnostics.
//!
//! All values here use the resolvent convention `w(λ) = ∫ dσ(u)/(u − λ)`,
//! which maps the upper half plane into itself.

use num_complex::Complex64;
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::DiscreteMeasure;
use crate::orthopoly::{evaluate_polys, RecurrenceCoefficients};
use crate::scalar::{self, Rational};
use crate::sequence::MomentSequence;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeylCircle {
    pub lambda: Complex64,
    pub n: usize,
    pub center: Complex64,
    pub radius: f64,
}

impl WeylCircle {
    /// Whether `w` lies in the closed disk, with slack `eps`.
    pub fn contains(&self, w: Complex64, eps: f64) -> bool {
        (w - self.center).norm() <= self.radius + eps
    }
}

fn check_lambda(lambda: Complex64) -> Result<()> {
    if lambda.im == 0.0 || !lambda.im.is_finite() || !lambda.re.is_finite() {
        return Err(Error::RealLambda);
    }
    Ok(())
}

/// The circle `K_n(λ)` traced by `w_n(λ, τ)` for real `τ`.
pub fn weyl_circle(
    coeffs: &RecurrenceCoefficients,
    lambda: Complex64,
    n: usize,
) -> Result<WeylCircle> {
    check_lambda(lambda)?;
    if n == 0 {
        return Err(Error::InvalidArgument("circle order must be >= 1".into()));
    }
    let vals = evaluate_polys(coeffs, lambda, n)?;
    let (pn, qn) = vals[n];
    let (pm, qm) = vals[n - 1];
    let numer = qn * pm.conj() - qm * pn.conj();
    let denom = pn * pm.conj() - pm * pn.conj();
    if denom.norm() == 0.0 || !denom.norm().is_finite() {
        return Err(Error::Degenerate("P_n conj(P_{n-1}) is real".into()));
    }
    let sum: f64 = vals[..n].iter().map(|(p, _)| p.norm_sqr()).sum();
    let radius = 1.0 / (2.0 * lambda.im.abs() * sum);
    if !radius.is_finite() || radius <= 0.0 {
        return Err(Error::Degenerate(format!("radius {radius}")));
    }
    Ok(WeylCircle {
        lambda,
        n,
        center: -numer / denom,
        radius,
    })
}

/// `w_n(λ, τ) = −(Q_n − τ Q_{n−1}) / (P_n − τ P_{n−1})` at `λ`.
pub fn circle_parametrization(
    coeffs: &RecurrenceCoefficients,
    lambda: Complex64,
    tau: f64,
    n: usize,
) -> Result<Complex64> {
    check_lambda(lambda)?;
    if n == 0 {
        return Err(Error::InvalidArgument("circle order must be >= 1".into()));
    }
    let vals = evaluate_polys(coeffs, lambda, n)?;
    let (pn, qn) = vals[n];
    let (pm, qm) = vals[n - 1];
    let denom = pn - tau * pm;
    if denom.norm() == 0.0 {
        return Err(Error::Pole);
    }
    Ok(-(qn - tau * qm) / denom)
}

/// `(w − w̄)/(λ − λ̄) − Σ_{k<n} |w P_k(λ) + Q_k(λ)|^2`.
///
/// Zero on `K_n(λ)`, positive inside, negative outside.
pub fn circle_equation_residual(
    coeffs: &RecurrenceCoefficients,
    lambda: Complex64,
    w: Complex64,
    n: usize,
) -> Result<f64> {
    check_lambda(lambda)?;
    let vals = evaluate_polys(coeffs, lambda, n.saturating_sub(1))?;
    let lead = w.im / lambda.im;
    let sum: f64 = vals
        .iter()
        .take(n)
        .map(|(p, q)| (w * p + q).norm_sqr())
        .sum();
    Ok(lead - sum)
}

/// `Σ w_i / (x_i − λ)` for a discrete measure.
pub fn stieltjes_point(measure: &DiscreteMeasure, lambda: Complex64) -> Result<Complex64> {
    check_lambda(lambda)?;
    measure.stieltjes_transform(lambda)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NevanlinnaQuad {
    pub n: usize,
    pub z: Complex64,
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl NevanlinnaQuad {
    /// `A D − B C`.
    pub fn determinant(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }
}

/// Partial sums
///
/// ```text
/// A_n(z) =      z Σ_{k<n} Q_k(0) Q_k(z)
/// B_n(z) = −1 + z Σ_{k<n} Q_k(0) P_k(z)
/// C_n(z) =  1 + z Σ_{k<n} P_k(0) Q_k(z)
/// D_n(z) =      z Σ_{k<n} P_k(0) P_k(z)
/// ```
pub fn nevanlinna_partial(
    coeffs: &RecurrenceCoefficients,
    z: Complex64,
    n: usize,
) -> Result<NevanlinnaQuad> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "partial sum order must be >= 1".into(),
        ));
    }
    let at_z = evaluate_polys(coeffs, z, n - 1)?;
    let at_0 = evaluate_polys(coeffs, Complex64::zero(), n - 1)?;
    let mut sums = [Complex64::zero(); 4];
    for ((p0, q0), (pz, qz)) in at_0.iter().zip(&at_z) {
        sums[0] += q0 * qz;
        sums[1] += q0 * pz;
        sums[2] += p0 * qz;
        sums[3] += p0 * pz;
    }
    Ok(NevanlinnaQuad {
        n,
        z,
        a: z * sums[0],
        b: z * sums[1] - 1.0,
        c: z * sums[2] + 1.0,
        d: z * sums[3],
    })
}

/// Parameter of the Nevanlinna transform: a real constant or the point at infinity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Phi {
    Constant(f64),
    Infinity,
}

/// `−(A φ − C)/(B φ − D)`; `−A/B` for `φ = ∞`.
pub fn nevanlinna_transform(quad: &NevanlinnaQuad, phi: Phi) -> Result<Complex64> {
    let (numer, denom) = match phi {
        Phi::Constant(t) => (quad.a * t - quad.c, quad.b * t - quad.d),
        Phi::Infinity => (quad.a, quad.b),
    };
    if denom.norm() == 0.0 {
        return Err(Error::Pole);
    }
    Ok(-numer / denom)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DeterminacyVerdict {
    DeterminateCertified,
    LikelyDeterminate,
    LikelyIndeterminate,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeterminacyOptions {
    /// Radii below this count as collapsed to a point.
    pub radius_threshold: f64,
    /// Minimal log-log slope of Carleman partial sums counted as divergence.
    pub slope_cutoff: f64,
    /// Last Carleman summand below this counts as summable.
    pub summand_cutoff: f64,
}

impl Default for DeterminacyOptions {
    fn default() -> Self {
        DeterminacyOptions {
            radius_threshold: 1e-8,
            slope_cutoff: 0.5,
            summand_cutoff: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeterminacyReport {
    pub carleman_b_partial: Vec<f64>,
    pub carleman_s_partial: Vec<f64>,
    pub carleman_s_slope: Option<f64>,
    pub probe: Complex64,
    pub radius_sequence: Vec<f64>,
    pub finite_rank: Option<usize>,
    pub verdict: DeterminacyVerdict,
}

/// Natural log of a positive rational that may exceed the `f64` range.
fn ln_rational(r: &Rational) -> f64 {
    fn ln_big(n: &num_bigint::BigInt) -> f64 {
        let bits = n.bits();
        let shift = bits.saturating_sub(60);
        let top: f64 = scalar::to_f64(&Rational::from_integer(n >> shift));
        top.ln() + shift as f64 * std::f64::consts::LN_2
    }
    ln_big(r.numer()) - ln_big(r.denom())
}

/// Least-squares slope of `ln y` against `ln x` over the second half of the data.
fn log_log_slope(ys: &[f64]) -> Option<f64> {
    let start = ys.len() / 2;
    let pts: Vec<(f64, f64)> = ys
        .iter()
        .enumerate()
        .skip(start)
        .filter(|(_, y)| **y > 0.0)
        .map(|(i, y)| (((i + 1) as f64).ln(), y.ln()))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}

pub fn determinacy_diagnostics(
    seq: &MomentSequence,
    coeffs: &RecurrenceCoefficients,
    probe: Complex64,
    n_max: usize,
) -> Result<DeterminacyReport> {
    determinacy_diagnostics_with(seq, coeffs, probe, n_max, &DeterminacyOptions::default())
}

pub fn determinacy_diagnostics_with(
    seq: &MomentSequence,
    coeffs: &RecurrenceCoefficients,
    probe: Complex64,
    n_max: usize,
    opts: &DeterminacyOptions,
) -> Result<DeterminacyReport> {
    check_lambda(probe)?;
    let mut carleman_s_partial = Vec::new();
    let mut acc = 0.0;
    let mut last_summand = None;
    for n in 1..=n_max {
        if 2 * n >= seq.len() {
            break;
        }
        let s = seq.term(2 * n);
        if !s.is_positive() {
            return Err(Error::NotPositive(format!("s_{} <= 0", 2 * n)));
        }
        let summand = (-ln_rational(s) / (2 * n) as f64).exp();
        acc += summand;
        last_summand = Some(summand);
        carleman_s_partial.push(acc);
    }
    let mut carleman_b_partial = Vec::new();
    let mut acc = 0.0;
    for b in coeffs.b.iter().take(n_max + 1) {
        acc += 1.0 / b;
        carleman_b_partial.push(acc);
    }
    let depth = coeffs.max_poly_degree().min(n_max);
    let radius_sequence = (1..=depth)
        .map(|n| weyl_circle(coeffs, probe, n).map(|c| c.radius))
        .collect::<Result<Vec<_>>>()?;
    let slope = log_log_slope(&carleman_s_partial);
    let verdict = if coeffs.rank.is_some() {
        DeterminacyVerdict::DeterminateCertified
    } else if slope.is_some_and(|s| s >= opts.slope_cutoff)
        || radius_sequence
            .last()
            .is_some_and(|r| *r < opts.radius_threshold)
    {
        DeterminacyVerdict::LikelyDeterminate
    } else if last_summand.is_some_and(|s| s < opts.summand_cutoff) {
        DeterminacyVerdict::LikelyIndeterminate
    } else {
        DeterminacyVerdict::Inconclusive
    };
    Ok(DeterminacyReport {
        carleman_b_partial,
        carleman_s_partial,
        carleman_s_slope: slope,
        probe,
        radius_sequence,
        finite_rank: coeffs.rank,
        verdict,
    })
}
