//! File formats.
//!
//! * sequence: JSON `{"terms": ["1", "1/2", ...], "generator": {...}}`, a
//!   bare JSON array of terms, or CSV with one rational per line (commas also
//!   separate). A JSON object with a `generator` and `count` but no `terms`
//!   generates the terms.
//! * measure: `{"atoms": [["-1", "1/2"], ["1", "1/2"]]}` as `[position, weight]`.
//! * mask: `{"affine": {"d": 1, "l0": 0}}` or `{"explicit": [0, 2, 4]}`.
//! * partial Hankel: `{"specified": {"0": "1", "2": "1/3"}}`.
//!
//! Rationals are written as `"p/q"` strings; on input integers, decimals and
//! JSON numbers are also accepted and converted exactly.

use std::collections::BTreeMap;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::completion::PartialHankel;
use crate::error::{Error, Result};
use crate::measure::DiscreteMeasure;
use crate::scalar::{self, Rational, DEFAULT_PRECISION_BITS};
use crate::sequence::{Exactness, Generator, MomentSequence};
use crate::submoment::ExtractionMask;

#[derive(Deserialize)]
#[serde(untagged)]
enum RawNumber {
    Text(String),
    Int(i64),
    Float(f64),
}

impl RawNumber {
    fn into_rational(self) -> Result<Rational> {
        match self {
            RawNumber::Text(s) => scalar::parse(&s),
            RawNumber::Int(i) => Ok(scalar::int(i)),
            RawNumber::Float(x) => scalar::parse(&x.to_string()),
        }
    }
}

/// `#[serde(with = "crate::io::rational_str")]` for a single rational.
pub mod rational_str {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&scalar::format(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        RawNumber::deserialize(d)?
            .into_rational()
            .map_err(D::Error::custom)
    }
}

/// `#[serde(with = "crate::io::rational_pairs")]` for `[[x, y], ...]`.
pub mod rational_pairs {
    use super::*;

    pub fn serialize<S: Serializer>(
        pairs: &[(Rational, Rational)],
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        let strs: Vec<[String; 2]> = pairs
            .iter()
            .map(|(a, b)| [scalar::format(a), scalar::format(b)])
            .collect();
        strs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Vec<(Rational, Rational)>, D::Error> {
        let raw: Vec<(RawNumber, RawNumber)> = Vec::deserialize(d)?;
        raw.into_iter()
            .map(|(a, b)| Ok((a.into_rational()?, b.into_rational()?)))
            .collect::<Result<_>>()
            .map_err(D::Error::custom)
    }
}

pub fn ser_rational<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    rational_str::serialize(r, s)
}

pub fn ser_rational_vec<S: Serializer>(
    v: &[Rational],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    v.iter()
        .map(scalar::format)
        .collect::<Vec<_>>()
        .serialize(s)
}

pub fn ser_rational_matrix<S: Serializer>(
    m: &[Vec<Rational>],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    m.iter()
        .map(|row| row.iter().map(scalar::format).collect::<Vec<_>>())
        .collect::<Vec<_>>()
        .serialize(s)
}

impl Serialize for DiscreteMeasure {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Out {
            #[serde(with = "rational_pairs")]
            atoms: Vec<(Rational, Rational)>,
        }
        Out {
            atoms: self
                .atoms()
                .iter()
                .map(|a| (a.position.clone(), a.weight.clone()))
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for DiscreteMeasure {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct In {
            #[serde(with = "rational_pairs")]
            atoms: Vec<(Rational, Rational)>,
        }
        let raw = In::deserialize(d)?;
        DiscreteMeasure::new(raw.atoms).map_err(D::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct SequenceFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    terms: Option<Vec<RawOrString>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    generator: Option<Generator>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    exactness: Option<Exactness>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    count: Option<usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawOrString {
    Text(String),
    Int(i64),
    Float(f64),
}

impl RawOrString {
    fn into_rational(self) -> Result<Rational> {
        match self {
            RawOrString::Text(s) => RawNumber::Text(s),
            RawOrString::Int(i) => RawNumber::Int(i),
            RawOrString::Float(x) => RawNumber::Float(x),
        }
        .into_rational()
    }
}

fn json_err(e: serde_json::Error) -> Error {
    Error::Parse(e.to_string())
}

/// Parses a sequence in any of the supported layouts.
pub fn parse_sequence(text: &str) -> Result<MomentSequence> {
    parse_sequence_with_bits(text, DEFAULT_PRECISION_BITS)
}

/// As [`parse_sequence`], generating irrational terms to `bits` bits when the
/// file only names a generator.
pub fn parse_sequence_with_bits(text: &str, bits: u32) -> Result<MomentSequence> {
    let trimmed = text.trim_start();
    if trimmed.is_empty() {
        return Err(Error::Parse("empty sequence input".into()));
    }
    if trimmed.starts_with('[') {
        let raw: Vec<RawOrString> = serde_json::from_str(text).map_err(json_err)?;
        let terms = raw
            .into_iter()
            .map(RawOrString::into_rational)
            .collect::<Result<_>>()?;
        return MomentSequence::new(terms);
    }
    if trimmed.starts_with('{') {
        let file: SequenceFile = serde_json::from_str(text).map_err(json_err)?;
        let seq = match (file.terms, &file.generator) {
            (Some(raw), _) => {
                let terms = raw
                    .into_iter()
                    .map(RawOrString::into_rational)
                    .collect::<Result<_>>()?;
                let mut seq = MomentSequence::new(terms)?;
                if let Some(g) = file.generator {
                    seq = seq.with_generator(g);
                }
                seq
            }
            (None, Some(g)) => {
                let count = file
                    .count
                    .ok_or_else(|| Error::Parse("generator without terms needs a count".into()))?;
                MomentSequence::from_generator_with_bits(g.clone(), count, bits)?
            }
            (None, None) => return Err(Error::Parse("sequence file has no terms".into())),
        };
        return Ok(match file.exactness {
            Some(e) => seq.with_exactness(e),
            None => seq,
        });
    }
    let terms = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(|l| l.split(','))
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(scalar::parse)
        .collect::<Result<Vec<_>>>()?;
    if terms.is_empty() {
        return Err(Error::Parse("no terms found".into()));
    }
    MomentSequence::new(terms)
}

pub fn sequence_to_json(seq: &MomentSequence) -> String {
    let file = SequenceFile {
        terms: Some(
            seq.terms()
                .iter()
                .map(|t| RawOrString::Text(scalar::format(t)))
                .collect(),
        ),
        generator: seq.generator().cloned(),
        exactness: match seq.exactness() {
            Exactness::Exact => None,
            e => Some(e),
        },
        count: None,
    };
    serde_json::to_string_pretty(&file).expect("sequence serializes")
}

pub fn sequence_to_csv(seq: &MomentSequence) -> String {
    seq.terms()
        .iter()
        .map(|t| scalar::format(t) + "\n")
        .collect()
}

pub fn parse_measure(text: &str) -> Result<DiscreteMeasure> {
    serde_json::from_str(text).map_err(json_err)
}

pub fn measure_to_json(mu: &DiscreteMeasure) -> String {
    serde_json::to_string_pretty(mu).expect("measure serializes")
}

pub fn parse_mask(text: &str) -> Result<ExtractionMask> {
    serde_json::from_str(text).map_err(json_err)
}

pub fn mask_to_json(mask: &ExtractionMask) -> String {
    serde_json::to_string(mask).expect("mask serializes")
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartialFile {
    specified: BTreeMap<String, RawOrString>,
}

pub fn parse_partial(text: &str) -> Result<PartialHankel> {
    let file: PartialFile = serde_json::from_str(text).map_err(json_err)?;
    let mut specified = BTreeMap::new();
    for (k, v) in file.specified {
        let j: usize = k.trim().parse().map_err(|_| {
            Error::Parse(format!(
                "skew-diagonal index {k:?} is not a nonnegative integer"
            ))
        })?;
        if specified.insert(j, v.into_rational()?).is_some() {
            return Err(Error::Parse(format!("index {j} given twice")));
        }
    }
    Ok(PartialHankel::new(specified))
}

pub fn partial_to_json(p: &PartialHankel) -> String {
    let file = PartialFile {
        specified: p
            .specified()
            .iter()
            .map(|(j, v)| (j.to_string(), RawOrString::Text(scalar::format(v))))
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("partial serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, ratio};

    #[test]
    fn sequence_layouts() {
        let json = parse_sequence(r#"{"terms": ["1", "1/2", 0.25, 3]}"#).unwrap();
        assert_eq!(json.terms(), &[int(1), ratio(1, 2), ratio(1, 4), int(3)]);
        let arr = parse_sequence(r#"[1, "1/2", "0.25", 3]"#).unwrap();
        assert_eq!(arr, json);
        let csv = parse_sequence("1\n1/2 # half\n0.25,3\n").unwrap();
        assert_eq!(csv.terms(), json.terms());
        assert!(parse_sequence("").is_err());
        assert!(parse_sequence("   \n").is_err());
        let gen = parse_sequence(r#"{"generator": {"kind": "hilbert"}, "count": 3}"#).unwrap();
        assert_eq!(gen.terms(), &[int(1), ratio(1, 2), ratio(1, 3)]);
    }

    #[test]
    fn round_trips() {
        let seq = MomentSequence::hilbert(5);
        assert_eq!(parse_sequence(&sequence_to_json(&seq)).unwrap(), seq);
        assert_eq!(
            parse_sequence(&sequence_to_csv(&seq)).unwrap().terms(),
            seq.terms()
        );

        let mu = parse_measure(r#"{"atoms": [["-1", "1/2"], ["1", "1/2"]]}"#).unwrap();
        assert_eq!(parse_measure(&measure_to_json(&mu)).unwrap(), mu);

        let mask = parse_mask(r#"{"affine": {"d": 1, "l0": 0}}"#).unwrap();
        assert_eq!(mask, ExtractionMask::Affine { d: 1, l0: 0 });
        assert_eq!(parse_mask(&mask_to_json(&mask)).unwrap(), mask);
        let explicit = parse_mask(r#"{"explicit": [0, 2, 4]}"#).unwrap();
        assert_eq!(explicit, ExtractionMask::Explicit(vec![0, 2, 4]));

        let p = parse_partial(r#"{"specified": {"0": "1", "2": "1/3"}}"#).unwrap();
        assert_eq!(p.get(2), Some(&ratio(1, 3)));
        assert_eq!(parse_partial(&partial_to_json(&p)).unwrap(), p);
    }
}
