mod common;

use common::measure_strategy;
use momentkit::io::{
    mask_to_json, measure_to_json, parse_mask, parse_measure, parse_partial, parse_sequence,
    partial_to_json, sequence_to_csv, sequence_to_json,
};
use momentkit::scalar::ratio;
use momentkit::sequence::Exactness;
use momentkit::{ExtractionMask, MomentSequence, PartialHankel};
use proptest::prelude::*;

#[test]
fn layouts_agree() {
    let json_obj = r#"{"terms": ["1", "1/2", 0.25, 3]}"#;
    let json_arr = r#"["1", "1/2", "1/4", 3]"#;
    let csv = "# comment\n1, 1/2\n0.25\n3\n";
    let a = parse_sequence(json_obj).unwrap();
    assert_eq!(a.terms(), parse_sequence(json_arr).unwrap().terms());
    assert_eq!(a.terms(), parse_sequence(csv).unwrap().terms());
    assert_eq!(a.term(1), &ratio(1, 2));
}

#[test]
fn generator_files_expand() {
    let s = parse_sequence(r#"{"generator": {"kind": "hilbert"}, "count": 5}"#).unwrap();
    assert_eq!(s.terms(), MomentSequence::hilbert(5).terms());
    let g =
        parse_sequence(r#"{"generator": {"kind": "stieltjes_wigert", "q": "1/2"}, "count": 6}"#)
            .unwrap();
    assert!(g.tolerance().is_some());
    assert!(matches!(g.exactness(), Exactness::Approximate { .. }));
    let back = parse_sequence(&sequence_to_json(&g)).unwrap();
    assert_eq!(back.exactness(), g.exactness());
    assert_eq!(back.terms(), g.terms());
}

#[test]
fn malformed_inputs_are_errors() {
    for bad in ["", "   ", "[1, \"x\"]", "{\"count\": 3}", "1, 2, banana"] {
        assert!(parse_sequence(bad).is_err(), "{bad:?}");
    }
    assert!(parse_partial(r#"{"specified": {"-1": 1}}"#).is_err());
    assert!(parse_partial(r#"{"specified": {"1": 1, "01": 2}}"#).is_err());
    assert!(parse_mask(r#"{"affine": {"d": 1}}"#).is_err());
}

#[test]
fn masks_round_trip() {
    for mask in [
        ExtractionMask::Affine { d: 2, l0: 4 },
        ExtractionMask::Explicit(vec![0, 1, 3, 2]),
    ] {
        assert_eq!(parse_mask(&mask_to_json(&mask)).unwrap(), mask);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sequences_round_trip(mu in measure_strategy(4, -4, 4), count in 1usize..12) {
        let s = mu.moments(count);
        let from_json = parse_sequence(&sequence_to_json(&s)).unwrap();
        let from_csv = parse_sequence(&sequence_to_csv(&s)).unwrap();
        prop_assert_eq!(from_json.terms(), s.terms());
        prop_assert_eq!(from_csv.terms(), s.terms());
    }

    #[test]
    fn measures_round_trip(mu in measure_strategy(5, -4, 4)) {
        prop_assert_eq!(parse_measure(&measure_to_json(&mu)).unwrap(), mu);
    }

    #[test]
    fn partials_round_trip(mu in measure_strategy(3, -2, 2), d in 0usize..3, l0 in 0usize..4, count in 2usize..6) {
        let s = mu.moments(count * (d + 1) + l0 + 1);
        let p = PartialHankel::from_mask(&s, d, l0, count).unwrap();
        prop_assert_eq!(parse_partial(&partial_to_json(&p)).unwrap(), p);
    }
}
