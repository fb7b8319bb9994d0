//! Exact dense linear algebra over the rationals.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::scalar::{self, Rational};

pub type RatMatrix = Vec<Vec<Rational>>;

/// Determinant by fraction-free Bareiss elimination.
///
/// Rows are first scaled to integers; elimination then runs over `BigInt`
/// with exact divisions only.
pub fn det(m: &[Vec<Rational>]) -> Rational {
    let n = m.len();
    if n == 0 {
        return Rational::one();
    }
    let mut scale = BigInt::one();
    let mut a: Vec<Vec<BigInt>> = m
        .iter()
        .map(|row| {
            let l = scalar::denominator_lcm(row.iter());
            scale *= &l;
            row.iter()
                .map(|v| (v * Rational::from_integer(l.clone())).to_integer())
                .collect()
        })
        .collect();

    let mut negate = false;
    let mut prev = BigInt::one();
    for k in 0..n {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(k, i);
                    negate = !negate;
                }
                None => return Rational::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    let d = Rational::new(a[n - 1][n - 1].clone(), scale);
    if negate {
        -d
    } else {
        d
    }
}

/// Leading principal minors `det(m[0..=k][0..=k])` for every `k`.
pub fn leading_minors(m: &[Vec<Rational>]) -> Vec<Rational> {
    (1..=m.len())
        .map(|k| det(&principal_submatrix(m, &(0..k).collect::<Vec<_>>())))
        .collect()
}

pub fn principal_submatrix(m: &[Vec<Rational>], idx: &[usize]) -> RatMatrix {
    idx.iter()
        .map(|&i| idx.iter().map(|&j| m[i][j].clone()).collect())
        .collect()
}

/// A principal minor witnessing that a symmetric matrix is not PSD.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinorCertificate {
    pub indices: Vec<usize>,
    #[serde(serialize_with = "crate::io::ser_rational")]
    pub value: Rational,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PsdOutcome {
    Psd { rank: usize },
    NotPsd(MinorCertificate),
}

/// Exact PSD test for a symmetric matrix by symmetric elimination.
///
/// A negative pivot, or a zero pivot with a nonzero entry in its row, yields a
/// principal minor that is negative; its index set and value are returned.
/// With `tol = Some(eps)` pivots and entries that are negligible relative to
/// the original diagonal are treated as zero (approximate inputs).
pub fn psd_check(m: &[Vec<Rational>], tol: Option<f64>) -> PsdOutcome {
    let n = m.len();
    let mut a: RatMatrix = m.to_vec();
    let diag: Vec<f64> = (0..n).map(|i| scalar::to_f64(&m[i][i]).abs()).collect();
    let negligible_pivot = |v: &Rational, k: usize| match tol {
        None => v.is_zero(),
        Some(eps) => scalar::to_f64(v).abs() <= eps * diag[k],
    };
    let negligible_offdiag = |v: &Rational, k: usize, j: usize| match tol {
        None => v.is_zero(),
        Some(eps) => {
            let x = scalar::to_f64(v);
            x * x <= eps * diag[k] * diag[j]
        }
    };

    let mut used: Vec<usize> = Vec::new();
    let mut product = Rational::one();
    for k in 0..n {
        let pivot = a[k][k].clone();
        if negligible_pivot(&pivot, k) {
            if let Some(j) = (k + 1..n).find(|&j| !negligible_offdiag(&a[k][j], k, j)) {
                let mut indices = used.clone();
                indices.push(k);
                indices.push(j);
                indices.sort_unstable();
                let schur = &a[k][k] * &a[j][j] - &a[k][j] * &a[j][k];
                return PsdOutcome::NotPsd(MinorCertificate {
                    indices,
                    value: &product * schur,
                });
            }
            continue;
        }
        if pivot.is_negative() {
            let mut indices = used.clone();
            indices.push(k);
            return PsdOutcome::NotPsd(MinorCertificate {
                indices,
                value: &product * &pivot,
            });
        }
        for i in k + 1..n {
            if a[i][k].is_zero() {
                continue;
            }
            let factor = &a[i][k] / &pivot;
            for j in k + 1..n {
                let delta = &factor * &a[k][j];
                a[i][j] -= delta;
            }
        }
        product *= &pivot;
        used.push(k);
    }
    PsdOutcome::Psd { rank: used.len() }
}

/// Solves `a x = b` exactly; `None` when `a` is singular.
pub fn solve(a: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let n = a.len();
    let mut m: RatMatrix = a
        .iter()
        .zip(b)
        .map(|(row, v)| {
            let mut r = row.clone();
            r.push(v.clone());
            r
        })
        .collect();
    for k in 0..n {
        let p = (k..n).find(|&i| !m[i][k].is_zero())?;
        m.swap(k, p);
        for i in 0..n {
            if i == k || m[i][k].is_zero() {
                continue;
            }
            let f = &m[i][k] / &m[k][k];
            for j in k..=n {
                let d = &f * &m[k][j];
                m[i][j] -= d;
            }
        }
    }
    Some((0..n).map(|i| &m[i][n] / &m[i][i]).collect())
}

pub fn is_symmetric(m: &[Vec<Rational>]) -> bool {
    (0..m.len()).all(|i| (0..i).all(|j| m[i][j] == m[j][i]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, ratio};

    fn cofactor_det(m: &[Vec<Rational>]) -> Rational {
        let n = m.len();
        if n == 0 {
            return Rational::one();
        }
        (0..n)
            .map(|j| {
                let minor: RatMatrix = m[1..]
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|&(c, _)| c != j)
                            .map(|(_, v)| v.clone())
                            .collect()
                    })
                    .collect();
                let term = &m[0][j] * cofactor_det(&minor);
                if j % 2 == 0 {
                    term
                } else {
                    -term
                }
            })
            .sum()
    }

    fn mat(rows: &[&[(i64, i64)]]) -> RatMatrix {
        rows.iter()
            .map(|r| r.iter().map(|&(p, q)| ratio(p, q)).collect())
            .collect()
    }

    #[test]
    fn bareiss_matches_cofactor_with_pivoting() {
        let m = mat(&[
            &[(0, 1), (1, 2), (3, 1)],
            &[(2, 3), (0, 1), (1, 1)],
            &[(5, 1), (-1, 7), (2, 1)],
        ]);
        assert_eq!(det(&m), cofactor_det(&m));
        let singular = mat(&[&[(1, 1), (2, 1)], &[(1, 2), (1, 1)]]);
        assert_eq!(det(&singular), int(0));
    }

    #[test]
    fn psd_certificates_are_real_minors() {
        // diag(1, 0, -1) style failure hidden behind a zero pivot
        let m = mat(&[
            &[(1, 1), (0, 1), (0, 1)],
            &[(0, 1), (0, 1), (1, 1)],
            &[(0, 1), (1, 1), (5, 1)],
        ]);
        match psd_check(&m, None) {
            PsdOutcome::NotPsd(c) => {
                assert_eq!(c.indices, vec![0, 1, 2]);
                assert_eq!(c.value, det(&principal_submatrix(&m, &c.indices)));
                assert!(c.value < int(0));
            }
            other => panic!("expected failure, got {other:?}"),
        }
        let rank_one = mat(&[&[(1, 1), (1, 2)], &[(1, 2), (1, 4)]]);
        assert_eq!(psd_check(&rank_one, None), PsdOutcome::Psd { rank: 1 });
    }

    #[test]
    fn solve_small_system() {
        let a = mat(&[&[(0, 1), (1, 1)], &[(2, 1), (1, 1)]]);
        let x = solve(&a, &[int(3), int(5)]).unwrap();
        assert_eq!(x, vec![int(1), int(3)]);
        let s = mat(&[&[(1, 1), (2, 1)], &[(2, 1), (4, 1)]]);
        assert!(solve(&s, &[int(1), int(1)]).is_none());
    }
}
