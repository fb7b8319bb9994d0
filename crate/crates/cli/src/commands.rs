//! Subcommand implementations.

use std::path::{Path, PathBuf};

use clap::Subcommand;
use num_complex::Complex64;
use serde_json::{json, Value};

use momentkit::io::{
    parse_mask, parse_measure, parse_partial, parse_sequence_with_bits, sequence_to_json,
};
use momentkit::orthopoly::recurrence_coefficients_partial;
use momentkit::scalar::{self, DEFAULT_PRECISION_BITS};
use momentkit::submoment::subsequence_positivity;
use momentkit::weyl::DeterminacyVerdict;
use momentkit::{
    circle_parametrization, complete_via_pullback, decide_completable, determinacy_diagnostics,
    extract, hamburger_test, hausdorff_test, mask_universal_check, stieltjes_test, weyl_circle,
    CompletionStatus, Error, ExtractionMask, Generator, MomentSequence, Result,
};

use crate::report::{complex_text, to_value, Format, Report};
use crate::{Command, TestKind};

pub const PRECISION_ENV: &str = "MOMENTKIT_PRECISION";

#[derive(Subcommand, Debug)]
pub enum Family {
    /// `s_k = 1/(k+1)`.
    Hilbert,
    /// `s_k = r^k`.
    Geometric {
        #[arg(long, allow_hyphen_values = true)]
        r: String,
    },
    /// `s_k = 1/((k+1) e^{k+1})`.
    ExpDecay,
    /// `s_k = q^{-(k+1)^2/2}`.
    StieltjesWigert {
        #[arg(long)]
        q: String,
    },
    /// Moments of a measure file `{"atoms": [["x", "w"], ...]}`.
    Measure { measure_file: PathBuf },
}

/// Working precision in bits for irrational terms, from the environment.
pub fn precision_bits() -> Result<u32> {
    match std::env::var(PRECISION_ENV) {
        Err(_) => Ok(DEFAULT_PRECISION_BITS),
        Ok(v) => match v.trim().parse::<u32>() {
            Ok(b) if (8..=4096).contains(&b) => Ok(b),
            _ => Err(Error::InvalidArgument(format!(
                "{PRECISION_ENV} must be an integer number of bits in 8..=4096, got {v:?}"
            ))),
        },
    }
}

fn read(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))
}

fn text(bytes: &[u8], path: &Path) -> Result<String> {
    String::from_utf8(bytes.to_vec())
        .map_err(|_| Error::Parse(format!("{} is not UTF-8", path.display())))
}

fn load_sequence(
    bytes: &[u8],
    path: &Path,
    bits: u32,
    warnings: &mut Vec<String>,
) -> Result<MomentSequence> {
    let seq = parse_sequence_with_bits(&text(bytes, path)?, bits)?;
    if let Some(tol) = seq.tolerance() {
        warnings.push(format!("terms are approximate, relative tolerance {tol:e}"));
    }
    if let Err(e) = seq.check_generator() {
        warnings.push(format!("terms disagree with the declared generator: {e}"));
    }
    Ok(seq)
}

fn parse_complex(s: &str, what: &str) -> Result<Complex64> {
    let z: Complex64 = s
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("{what} {s:?} is not a complex number a+bi")))?;
    if z.im == 0.0 || !z.im.is_finite() || !z.re.is_finite() {
        return Err(Error::RealLambda);
    }
    Ok(z)
}

fn parse_orders(s: &str) -> Result<(usize, usize)> {
    let bad = || Error::Parse(format!("orders {s:?} must be n or n1..n2"));
    let (lo, hi) = match s.split_once("..") {
        Some((a, b)) => (a, b.trim_start_matches('=')),
        None => (s, s),
    };
    let lo: usize = lo.trim().parse().map_err(|_| bad())?;
    let hi: usize = hi.trim().parse().map_err(|_| bad())?;
    if lo == 0 || hi < lo {
        return Err(Error::InvalidArgument(format!(
            "orders {s:?} must satisfy 1 <= n1 <= n2"
        )));
    }
    Ok((lo, hi))
}

fn verdict_name<T: serde::Serialize>(kind: &T) -> Value {
    to_value(kind)["kind"].clone()
}

pub fn run(command: Command, format: Format, bits: u32) -> Result<u8> {
    if let Command::Generate {
        family,
        count,
        output,
    } = command
    {
        return generate(family, count, output.as_deref(), bits);
    }
    let report = match command {
        Command::Analyze {
            seq_file,
            depth,
            test,
        } => analyze(&seq_file, depth, test, bits)?,
        Command::Extract {
            seq_file,
            mask_file,
            count,
            check,
        } => extract_cmd(&seq_file, &mask_file, count, check, bits)?,
        Command::MaskCheck { mask_file, cap } => mask_check(&mask_file, cap, bits)?,
        Command::Weyl {
            seq_file,
            lambda,
            orders,
            tau,
        } => weyl(&seq_file, &lambda, orders.as_deref(), &tau, bits)?,
        Command::Determinacy {
            seq_file,
            depth,
            probe,
        } => determinacy(&seq_file, depth, &probe, bits)?,
        Command::Complete {
            partial_file,
            target_depth,
        } => complete(&partial_file, target_depth, bits)?,
        Command::Generate { .. } => unreachable!("handled above"),
    };
    print!("{}", report.render(format));
    Ok(report.exit_status as u8)
}

fn analyze(path: &Path, depth: Option<usize>, test: TestKind, bits: u32) -> Result<Report> {
    let bytes = read(path)?;
    let name = match test {
        TestKind::Hamburger => "hamburger",
        TestKind::Stieltjes => "stieltjes",
        TestKind::Hausdorff => "hausdorff",
    };
    let mut report = Report::new(
        "analyze",
        json!({ "depth": depth, "test": name }),
        &[&bytes],
        bits,
    );
    let seq = load_sequence(&bytes, path, bits, &mut report.warnings)?;
    let n = seq.len();
    let (results, positive) = match test {
        TestKind::Hamburger => {
            let m = depth.unwrap_or((n - 1) / 2);
            let v = hamburger_test(&seq, m)?;
            let positive = v.is_positive();
            (
                json!({ "verdict": verdict_name(&v.kind), "hankel": to_value(&v) }),
                positive,
            )
        }
        TestKind::Stieltjes => {
            let m = depth.unwrap_or(n.saturating_sub(2) / 2);
            let v = stieltjes_test(&seq, m)?;
            let verdict = if v.solvable {
                "solvable"
            } else {
                "not_positive"
            };
            (
                json!({ "verdict": verdict, "stieltjes": to_value(&v) }),
                v.solvable,
            )
        }
        TestKind::Hausdorff => {
            let m = depth.unwrap_or((n - 1) / 2);
            let k_max = n.checked_sub(m + 1).ok_or(Error::InsufficientTerms {
                needed: m + 1,
                available: n,
            })?;
            let v = hausdorff_test(&seq, m, k_max)?;
            let verdict = if v.completely_monotonic {
                "completely_monotonic"
            } else {
                "not_positive"
            };
            (
                json!({ "verdict": verdict, "hausdorff": to_value(&v) }),
                v.completely_monotonic,
            )
        }
    };
    report.results = results;
    report.exit_status = if positive { 0 } else { 1 };
    Ok(report)
}

/// Largest extraction length the sequence supports.
fn max_count(mask: &ExtractionMask, len: usize) -> usize {
    let limit = mask.len().unwrap_or(usize::MAX);
    (0..limit.min(len))
        .take_while(|&k| mask.ell(k).is_some_and(|l| k + l < len))
        .count()
}

fn extract_cmd(
    seq_path: &Path,
    mask_path: &Path,
    count: Option<usize>,
    check: bool,
    bits: u32,
) -> Result<Report> {
    let seq_bytes = read(seq_path)?;
    let mask_bytes = read(mask_path)?;
    let mut report = Report::new(
        "extract",
        json!({ "count": count, "check": check }),
        &[&seq_bytes, &mask_bytes],
        bits,
    );
    let seq = load_sequence(&seq_bytes, seq_path, bits, &mut report.warnings)?;
    let mask = parse_mask(&text(&mask_bytes, mask_path)?)?;
    let count = count.unwrap_or_else(|| max_count(&mask, seq.len()));
    if count == 0 {
        return Err(Error::InsufficientTerms {
            needed: 1,
            available: 0,
        });
    }
    let sub = extract(&seq, &mask, count)?;
    let mut results = json!({
        "indices": mask.indices(count)?,
        "terms": sub.terms().iter().map(scalar::format).collect::<Vec<_>>(),
    });
    if check {
        let m = (count - 1) / 2;
        let universal = mask_universal_check(&mask, m);
        let per_sequence = subsequence_positivity(&seq, &mask, m)?;
        if !per_sequence.is_positive() {
            report.exit_status = 1;
        }
        results["check"] = json!({
            "order": m,
            "universal": to_value(&universal),
            "verdict": verdict_name(&per_sequence.kind),
            "hankel": to_value(&per_sequence),
        });
    }
    report.results = results;
    Ok(report)
}

fn mask_check(path: &Path, cap: usize, bits: u32) -> Result<Report> {
    let bytes = read(path)?;
    let mut report = Report::new("mask-check", json!({ "cap": cap }), &[&bytes], bits);
    let mask = parse_mask(&text(&bytes, path)?)?;
    let verdict = mask_universal_check(&mask, cap);
    report.exit_status = if verdict.is_valid() { 0 } else { 1 };
    report.results = json!({ "mask": to_value(&mask), "universal": to_value(&verdict) });
    Ok(report)
}

fn weyl(
    path: &Path,
    lambda: &str,
    orders: Option<&str>,
    taus: &[f64],
    bits: u32,
) -> Result<Report> {
    let bytes = read(path)?;
    let mut report = Report::new(
        "weyl",
        json!({ "lambda": lambda, "orders": orders, "tau": taus }),
        &[&bytes],
        bits,
    );
    let seq = load_sequence(&bytes, path, bits, &mut report.warnings)?;
    let z = parse_complex(lambda, "lambda")?;
    let coeffs = recurrence_coefficients_partial(&seq)?;
    let available = coeffs.max_poly_degree();
    if available == 0 {
        return Err(Error::InsufficientTerms {
            needed: 3,
            available: seq.len(),
        });
    }
    let (lo, hi) = match orders {
        Some(s) => parse_orders(s)?,
        None => (1, available),
    };
    if hi > available {
        return Err(Error::InsufficientTerms {
            needed: 2 * hi + 1,
            available: seq.len(),
        });
    }
    if let Some(r) = coeffs.rank {
        report.warnings.push(format!(
            "finite rank {r}: circles exist only below order {r}"
        ));
    }
    let mut circles = Vec::new();
    let mut rows = Vec::new();
    for n in lo..=hi {
        let c = weyl_circle(&coeffs, z, n)?;
        let points = taus
            .iter()
            .map(|&t| {
                circle_parametrization(&coeffs, z, t, n)
                    .map(|w| json!({ "tau": t, "w": complex_text(w) }))
            })
            .collect::<Result<Vec<_>>>()?;
        circles.push(json!({
            "n": n,
            "center": complex_text(c.center),
            "radius": c.radius,
            "points": points,
        }));
        rows.push(c);
    }
    let nesting: Vec<Value> = rows
        .windows(2)
        .map(|w| {
            let gap = (w[1].center - w[0].center).norm();
            let drop = w[0].radius - w[1].radius;
            json!({ "n": w[0].n, "center_gap": gap, "radius_drop": drop, "nested": gap <= drop + 1e-9 })
        })
        .collect();
    report.results = json!({ "lambda": complex_text(z), "circles": circles, "nesting": nesting });
    Ok(report)
}

fn determinacy(path: &Path, depth: usize, probe: &str, bits: u32) -> Result<Report> {
    let bytes = read(path)?;
    let mut report = Report::new(
        "determinacy",
        json!({ "depth": depth, "probe": probe }),
        &[&bytes],
        bits,
    );
    let seq = load_sequence(&bytes, path, bits, &mut report.warnings)?;
    let z = parse_complex(probe, "probe")?;
    let coeffs = recurrence_coefficients_partial(&seq)?;
    if coeffs.rank.is_none() && coeffs.max_poly_degree() < depth {
        report.warnings.push(format!(
            "recurrence available only to depth {} of {depth}",
            coeffs.max_poly_degree()
        ));
    }
    let r = determinacy_diagnostics(&seq, &coeffs, z, depth)?;
    let verdict = to_value(&r.verdict);
    if r.verdict == DeterminacyVerdict::Inconclusive {
        report
            .warnings
            .push("diagnostics inconclusive at this depth".into());
    }
    report.results = json!({
        "verdict": verdict,
        "finite_rank": r.finite_rank,
        "probe": complex_text(r.probe),
        "carleman_s_partial": r.carleman_s_partial,
        "carleman_s_slope": r.carleman_s_slope,
        "carleman_b_partial": r.carleman_b_partial,
        "radius_sequence": r.radius_sequence,
    });
    Ok(report)
}

fn complete(path: &Path, target_depth: usize, bits: u32) -> Result<Report> {
    let bytes = read(path)?;
    let mut report = Report::new(
        "complete",
        json!({ "target_depth": target_depth }),
        &[&bytes],
        bits,
    );
    let partial = parse_partial(&text(&bytes, path)?)?;
    let decision = decide_completable(&partial, usize::MAX)?;
    let result = complete_via_pullback(&partial, target_depth)?;
    match &result.status {
        CompletionStatus::NotCompletable { .. } => report.exit_status = 1,
        CompletionStatus::Unknown(_) => report
            .warnings
            .push("pattern outside the decidable class".into()),
        CompletionStatus::Completed {
            exact: false,
            max_reproduction_error,
            ..
        } => report.warnings.push(format!(
            "irrational roots: specified values reproduced to {max_reproduction_error:e}"
        )),
        CompletionStatus::Completed { .. } => {}
    }
    report.results = json!({
        "decision": to_value(&decision),
        "completion": to_value(&result.status),
        "trace": to_value(&result.trace),
    });
    Ok(report)
}

fn generate(family: Family, count: usize, output: Option<&Path>, bits: u32) -> Result<u8> {
    if count == 0 {
        return Err(Error::InvalidArgument("count must be positive".into()));
    }
    let seq = match family {
        Family::Hilbert => {
            MomentSequence::from_generator_with_bits(Generator::Hilbert, count, bits)?
        }
        Family::Geometric { r } => MomentSequence::from_generator_with_bits(
            Generator::Geometric {
                r: scalar::parse(&r)?,
            },
            count,
            bits,
        )?,
        Family::ExpDecay => {
            MomentSequence::from_generator_with_bits(Generator::ExpDecay, count, bits)?
        }
        Family::StieltjesWigert { q } => MomentSequence::from_generator_with_bits(
            Generator::StieltjesWigert {
                q: scalar::parse(&q)?,
            },
            count,
            bits,
        )?,
        Family::Measure { measure_file } => {
            let bytes = read(&measure_file)?;
            parse_measure(&text(&bytes, &measure_file)?)?.moments(count)
        }
    };
    let body = sequence_to_json(&seq) + "\n";
    match output {
        Some(path) => std::fs::write(path, body)
            .map_err(|e| Error::InvalidArgument(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{body}"),
    }
    Ok(0)
}
