//! Acceptance suite: one pass/fail line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so the summary lines are always
//! printed; the process exits nonzero if any criterion fails.

mod common;

use std::time::{Duration, Instant};

use momentkit::completion::CompletionStatus;
use momentkit::measure::{integral_identity_check, shifted_transform_identity};
use momentkit::orthopoly::recurrence_coefficients_partial;
use momentkit::poly::Poly;
use momentkit::scalar::{self, int, ratio, Rational};
use momentkit::submoment::subsequence_positivity;
use momentkit::weyl::DeterminacyVerdict;
use momentkit::{
    circle_parametrization, complete_via_pullback, determinacy_diagnostics, gauss_quadrature,
    hamburger_test, mask_universal_check, recurrence_coefficients, stieltjes_point, submoment,
    weyl_circle, DiscreteMeasure, Error, ExtractionMask, Generator, MomentSequence, PartialHankel,
    RecurrenceCoefficients, WeylCircle,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let h = MomentSequence::hilbert(5);
    let v = hamburger_test(&h, 2).map_err(|e| e.to_string())?;
    check(v.is_positive_definite(), || {
        "hilbert not positive definite".into()
    })?;
    check(
        v.determinants[1] == ratio(1, 12) && v.determinants[2] == ratio(1, 2160),
        || format!("hilbert determinants {:?}", v.determinants),
    )?;

    let fact = MomentSequence::new(vec![int(1), ratio(1, 2), ratio(1, 6)]).unwrap();
    let v = hamburger_test(&fact, 1).map_err(|e| e.to_string())?;
    let cert = v.certificate().ok_or("factorial subsequence accepted")?;
    check(cert.value == ratio(-1, 12), || {
        format!("minor {}", scalar::format(&cert.value))
    })?;

    let verdict = mask_universal_check(&ExtractionMask::Explicit(vec![0, 1, 2, 4, 6]), 4);
    let w = verdict
        .witness()
        .ok_or("mask {0,1,2,4,6} not rejected by a minor")?;
    let expected = &Poly::monomial(int(-1), 6) * &Poly::linear(int(1)).pow(2);
    check(*w == expected || *w == -&expected, || {
        format!("witness {w}")
    })?;

    let ed = MomentSequence::from_generator(Generator::ExpDecay, 16).map_err(|e| e.to_string())?;
    let mask = ExtractionMask::Explicit(vec![0, 1, 3]);
    let v = subsequence_positivity(&ed, &mask, 1).map_err(|e| e.to_string())?;
    let d1 = scalar::to_f64(&v.determinants[1]);
    check(!v.is_positive() && d1 < -1e-6, || {
        format!("exp-decay D_1 = {d1:e}")
    })?;

    let elapsed = start.elapsed();
    check(elapsed < Duration::from_secs(1), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "D_2 = 1/2160, minor -1/12, witness {w}, exp-decay D_1 = {d1:.3e}, {elapsed:.2?}"
    ))
}

fn criterion_2(corpus: &[DiscreteMeasure]) -> Outcome {
    let start = Instant::now();
    let mut checked = 0;
    for (i, mu) in corpus.iter().enumerate() {
        let seq = mu.moments(8 * 5 + 6 + 1);
        for d in 0..=4 {
            for l0 in [0, 2, 4, 6] {
                let v = subsequence_positivity(&seq, &ExtractionMask::Affine { d, l0 }, 4)
                    .map_err(|e| format!("case {i}: {e}"))?;
                check(v.is_positive(), || {
                    format!("case {i}, d={d}, l0={l0}: {:?}", v.kind)
                })?;
                checked += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    check(elapsed < Duration::from_secs(60), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "{checked} extractions positive to depth 4, {elapsed:.2?}"
    ))
}

fn criterion_3() -> Outcome {
    let mask = ExtractionMask::Explicit(vec![1; 9]);
    let g = MomentSequence::geometric(ratio(1, 2), 12);
    let verdict = submoment::mask_verdict(&mask, 4, Some((&g, 4))).map_err(|e| e.to_string())?;
    check(!verdict.universal.is_valid(), || {
        "constant odd mask reported valid".into()
    })?;
    let per = verdict.per_sequence.ok_or("no per-sequence verdict")?;
    check(per.is_positive(), || {
        format!("geometric extraction {:?}", per.kind)
    })?;
    Ok("pattern invalid, geometric(1/2) extraction positive to depth 4".into())
}

/// `∫_0^1 du/(u − λ) = log((1 − λ)/(−λ))`.
fn hilbert_transform(lambda: Complex64) -> Complex64 {
    ((Complex64::new(1.0, 0.0) - lambda) / (-lambda)).ln()
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(common::CORPUS_SEED ^ 4);
    let mut sources: Vec<(MomentSequence, Option<DiscreteMeasure>)> = (0..6)
        .map(|_| {
            let atoms = rng.gen_range(9..=12);
            let mu = common::random_measure(&mut rng, atoms, -4, 4);
            (mu.moments(17), Some(mu))
        })
        .collect();
    sources.push((MomentSequence::hilbert(17), None));
    let coeffs: Vec<RecurrenceCoefficients> = sources
        .iter()
        .map(|(s, _)| recurrence_coefficients(s, 7).map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;

    let mut worst_on_circle = 0.0f64;
    for case in 0..100 {
        let k = rng.gen_range(0..sources.len());
        let im = 10f64.powf(rng.gen_range(-1.0..=1.0)) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let lambda = Complex64::new(rng.gen_range(-5.0..5.0), im);
        let n = rng.gen_range(1..=8);
        let tau = rng.gen_range(-1e3..=1e3);
        let c = &coeffs[k];
        let circles: Vec<WeylCircle> = (1..=8)
            .map(|j| weyl_circle(c, lambda, j).map_err(|e| format!("case {case}: {e}")))
            .collect::<Result<_, _>>()?;
        let w =
            circle_parametrization(c, lambda, tau, n).map_err(|e| format!("case {case}: {e}"))?;
        let circle = &circles[n - 1];
        // f64 points cannot resolve offsets finer than the point's own magnitude
        let scale = circle.radius.max(w.norm());
        let rel = ((w - circle.center).norm() - circle.radius).abs() / scale;
        worst_on_circle = worst_on_circle.max(rel);
        check(rel < 1e-9, || {
            format!("case {case}: parametrized point off circle by {rel:e}")
        })?;
        for pair in circles.windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            check(b.radius < a.radius, || {
                format!("case {case}: radius did not decrease at n={}", b.n)
            })?;
            let gap = (b.center - a.center).norm();
            check(gap <= a.radius - b.radius + 1e-9, || {
                format!("case {case}: disk {} not nested in disk {}", b.n, a.n)
            })?;
        }
        let point = match &sources[k].1 {
            Some(mu) => stieltjes_point(mu, lambda).map_err(|e| e.to_string())?,
            None => hilbert_transform(lambda),
        };
        for circle in &circles {
            check(circle.contains(point, 1e-9), || {
                format!("case {case}: transform outside disk {}", circle.n)
            })?;
        }
    }
    Ok(format!(
        "100 cases, worst relative circle residual {worst_on_circle:.1e}"
    ))
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(common::CORPUS_SEED ^ 5);
    for case in 0..500 {
        let atoms = rng.gen_range(1..=4);
        let mu = common::random_measure(&mut rng, atoms, -3, 3);
        if mu.atoms().iter().all(|a| a.position == int(0)) {
            continue;
        }
        let f = Poly::new(
            (0..rng.gen_range(1..=5))
                .map(|_| ratio(rng.gen_range(-9..=9), rng.gen_range(1..=5)))
                .collect(),
        );
        let d = rng.gen_range(1..=3);
        let l0 = [0, 2, 4][rng.gen_range(0..3)];
        let residual = match integral_identity_check(&mu, d, l0, &f) {
            Ok(r) => r,
            Err(Error::AtomAtZero) => continue,
            Err(e) => return Err(format!("case {case}: {e}")),
        };
        check(residual == Rational::from_integer(0.into()), || {
            format!("case {case}: residual {}", scalar::format(&residual))
        })?;
    }
    let lambda = Complex64::new(0.3, 0.7);
    let t = shifted_transform_identity(&DiscreteMeasure::dirac(int(1)), 2, lambda)
        .map_err(|e| e.to_string())?;
    let expected = Complex64::new(1.0, 0.0) / (Complex64::new(1.0, 0.0) - lambda);
    check(
        (t.lhs - expected).norm() < 1e-12 && (t.rhs - expected).norm() < 1e-12,
        || format!("dirac case: lhs {} rhs {}", t.lhs, t.rhs),
    )?;
    let mut worst = t.residual;
    for case in 0..99 {
        let atoms = rng.gen_range(1..=4);
        let mu = common::random_measure(&mut rng, atoms, -2, 2);
        let l = [0, 2, 4][rng.gen_range(0..3)];
        let lambda = Complex64::new(rng.gen_range(-3.0..3.0), rng.gen_range(0.2..3.0));
        let t = match shifted_transform_identity(&mu, l, lambda) {
            Ok(t) => t,
            Err(Error::AtomAtZero) => continue,
            Err(e) => return Err(format!("case {case}: {e}")),
        };
        worst = worst.max(t.residual);
        check(t.residual < 1e-12, || {
            format!("case {case}: residual {:e}", t.residual)
        })?;
    }
    Ok(format!(
        "500 exact integral identities, transform residual <= {worst:.1e}"
    ))
}

fn criterion_6(corpus: &[DiscreteMeasure]) -> Outcome {
    let mut done = 0;
    let mut exact = 0;
    for (i, mu) in corpus.iter().enumerate() {
        let seq = mu.moments(10 * 5 + 6 + 1);
        for d in 0..=4usize {
            if (d + 1) % 2 == 0 && mu.atoms().iter().any(|a| a.position <= int(0)) {
                continue;
            }
            for l0 in [0usize, 2, 4, 6] {
                let p = PartialHankel::from_mask(&seq, d, l0, 10).map_err(|e| e.to_string())?;
                let top = p.max_index().unwrap_or(0).max(8);
                let r = complete_via_pullback(&p, top)
                    .map_err(|e| format!("case {i}, d={d}, l0={l0}: {e}"))?;
                let CompletionStatus::Completed {
                    sequence,
                    exact: is_exact,
                    ..
                } = &r.status
                else {
                    return Err(format!("case {i}, d={d}, l0={l0}: {:?}", r.status));
                };
                for (j, v) in p.specified() {
                    let got = &sequence[*j];
                    let ok = got == v
                        || (!is_exact
                            && scalar::to_f64(&(got - v)).abs()
                                <= REPRODUCTION_TOL * scalar::to_f64(v).abs().max(1.0));
                    check(ok, || {
                        format!("case {i}, d={d}, l0={l0}: s_{j} not reproduced")
                    })?;
                }
                let completed = MomentSequence::new(sequence.clone()).unwrap();
                let v = hamburger_test(&completed, 4).map_err(|e| e.to_string())?;
                check(v.is_positive(), || {
                    format!("case {i}, d={d}, l0={l0}: completion not positive")
                })?;
                done += 1;
                exact += usize::from(*is_exact);
            }
        }
    }
    Ok(format!(
        "{done} completions reproduce their data ({exact} exactly), positive to depth 4"
    ))
}

const REPRODUCTION_TOL: f64 = momentkit::completion::REPRODUCTION_TOL;

fn criterion_7(corpus: &[DiscreteMeasure]) -> Outcome {
    let mut worst_atom = 0.0f64;
    let mut worst_moment = 0.0f64;
    for (i, mu) in corpus.iter().enumerate() {
        let r = mu.len();
        let seq = mu.moments(2 * r + 1);
        let coeffs = recurrence_coefficients_partial(&seq).map_err(|e| format!("case {i}: {e}"))?;
        let q = gauss_quadrature(&coeffs, r).map_err(|e| format!("case {i}: {e}"))?;
        check(q.len() == r, || {
            format!("case {i}: {} nodes for {r} atoms", q.len())
        })?;
        for (a, b) in q.atoms().iter().zip(mu.atoms()) {
            let dx = (scalar::to_f64(&a.position) - scalar::to_f64(&b.position)).abs();
            let dw = (scalar::to_f64(&a.weight) - scalar::to_f64(&b.weight)).abs();
            worst_atom = worst_atom.max(dx).max(dw);
            check(dx < 1e-8 && dw < 1e-8, || {
                format!("case {i}: atom error {dx:e}, weight error {dw:e}")
            })?;
        }
        for k in 0..2 * r {
            let want = scalar::to_f64(seq.term(k));
            let got = scalar::to_f64(&q.moment(k));
            let rel = (got - want).abs() / want.abs().max(1.0);
            worst_moment = worst_moment.max(rel);
            check(rel < 1e-10, || {
                format!("case {i}: moment {k} off by {rel:e}")
            })?;
        }
    }
    Ok(format!(
        "{} measures, worst atom/weight error {worst_atom:.1e}, worst moment error {worst_moment:.1e}",
        corpus.len()
    ))
}

fn criterion_8() -> Outcome {
    let probe = Complex64::new(0.0, 1.0);
    let g = MomentSequence::geometric(ratio(1, 2), 21);
    let c = recurrence_coefficients_partial(&g).map_err(|e| e.to_string())?;
    let r = determinacy_diagnostics(&g, &c, probe, 10).map_err(|e| e.to_string())?;
    check(
        r.verdict == DeterminacyVerdict::DeterminateCertified,
        || format!("geometric: {:?}", r.verdict),
    )?;

    let h = MomentSequence::hilbert(101);
    let c = recurrence_coefficients(&h, 20).map_err(|e| e.to_string())?;
    let r = determinacy_diagnostics(&h, &c, probe, 50).map_err(|e| e.to_string())?;
    let partial = *r.carleman_s_partial.last().ok_or("no Carleman sums")?;
    check(
        r.carleman_s_partial.len() == 50 && partial > 0.9 * 50.0,
        || {
            format!(
                "hilbert Carleman sum {partial} over {} terms",
                r.carleman_s_partial.len()
            )
        },
    )?;
    check(r.verdict == DeterminacyVerdict::LikelyDeterminate, || {
        format!("hilbert: {:?}", r.verdict)
    })?;

    let sw = MomentSequence::from_generator(Generator::StieltjesWigert { q: ratio(1, 2) }, 41)
        .map_err(|e| e.to_string())?;
    let c = recurrence_coefficients_partial(&sw).map_err(|e| e.to_string())?;
    let rep = determinacy_diagnostics(&sw, &c, probe, 20).map_err(|e| e.to_string())?;
    let sums = &rep.carleman_s_partial;
    let summand = sums[19] - sums[18];
    check(summand < 1e-3, || {
        format!("stieltjes-wigert summand at n=20: {summand:e}")
    })?;
    check(
        rep.verdict == DeterminacyVerdict::LikelyIndeterminate,
        || format!("stieltjes-wigert: {:?}", rep.verdict),
    )?;
    Ok(format!(
        "geometric certified, hilbert Carleman sum {partial:.2} at N=50, stieltjes-wigert summand {summand:.1e} at n=20"
    ))
}

fn main() {
    let corpus = common::corpus();
    let criteria: [(&str, Box<dyn Fn() -> Outcome>); 8] = [
        ("worked examples, exact", Box::new(criterion_1)),
        (
            "affine-mask soundness sweep",
            Box::new(|| criterion_2(&corpus)),
        ),
        ("constant odd mask discrimination", Box::new(criterion_3)),
        ("Weyl circle invariants", Box::new(criterion_4)),
        ("pushforward identities", Box::new(criterion_5)),
        ("completion round-trip", Box::new(|| criterion_6(&corpus))),
        ("quadrature oracle", Box::new(|| criterion_7(&corpus))),
        ("determinacy diagnostics", Box::new(criterion_8)),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(run))
            .unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("acceptance {} [{name}]: PASS ({detail})", i + 1),
            Err(why) => {
                failures += 1;
                println!("acceptance {} [{name}]: FAIL ({why})", i + 1);
            }
        }
    }
    if failures > 0 {
        std::process::exit(1);
    }
}
