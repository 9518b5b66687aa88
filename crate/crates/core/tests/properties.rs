//! Randomized invariants across modules.

use ccrc_core::channel::{modulate, q_function};
use ccrc_core::convcode::conv_encode;
use ccrc_core::harness::{wilson_interval, FrameOutcome, FrameRecord, PointStats, Z95};
use ccrc_core::{ConvCode, CrcCode, FrameLayout, ListDecoder, TrellisCode, Verdict};
use proptest::prelude::*;

fn parts(cc: &str, crc: &str, k: usize) -> (TrellisCode, CrcCode, FrameLayout) {
    let c = ConvCode::from_octal(cc).unwrap();
    let p = CrcCode::from_hex(crc).unwrap();
    let l = FrameLayout::new(k, &p, &c).unwrap();
    (TrellisCode::new(c), p, l)
}

fn outcome(code: u8) -> FrameOutcome {
    match code % 3 {
        0 => FrameOutcome::Correct,
        1 => FrameOutcome::Erasure,
        _ => FrameOutcome::Undetected { error_index: None },
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn emitted_metrics_never_decrease(
        noise in prop::collection::vec(-1.5f64..1.5, 2 * (20 + 4 + 3)),
        msg in prop::collection::vec(0u8..2, 20),
    ) {
        let (t, crc, layout) = parts("13,17", "0x1B", 20);
        let coded = conv_encode(&crc.encode(&msg).unwrap(), &t).unwrap();
        let rx: Vec<f64> = modulate(&coded).iter().zip(&noise).map(|(s, z)| s + z).collect();
        let mut dec = ListDecoder::new(&t, &crc, layout).unwrap();
        let paths = dec.ranked_paths(&rx, 300).unwrap();
        prop_assert_eq!(paths.len(), 300);
        for w in paths.windows(2) {
            prop_assert!(w[1].metric >= w[0].metric - 1e-9);
            prop_assert!(w[1].inputs != w[0].inputs);
        }
    }

    #[test]
    fn accepted_messages_pass_the_crc(
        noise in prop::collection::vec(-2.0f64..2.0, 2 * (16 + 6 + 3)),
        list in 1u64..200,
    ) {
        let (t, crc, layout) = parts("13,17", "0x43", 16);
        let rx: Vec<f64> = modulate(&vec![0u8; layout.channel_bits()])
            .iter()
            .zip(&noise)
            .map(|(s, z)| s + z)
            .collect();
        let mut dec = ListDecoder::new(&t, &crc, layout).unwrap();
        let out = dec.decode(&rx, list).unwrap();
        prop_assert!(out.n_lva >= 1 && out.n_lva <= list);
        match out.verdict {
            Verdict::Message(m) => {
                prop_assert!(crc.check(&crc.encode(&m).unwrap()).unwrap());
                let paths = dec.ranked_paths(&rx, out.n_lva).unwrap();
                prop_assert_eq!(&paths.last().unwrap().inputs[..16], &m[..]);
                for p in &paths[..paths.len() - 1] {
                    prop_assert_ne!(crc.remainder(&p.inputs), 0);
                }
            }
            Verdict::Erasure => prop_assert_eq!(out.n_lva, list),
        }
    }

    #[test]
    fn stats_merge_is_associative(codes in prop::collection::vec((0u8..3, 1u64..50), 1..60), cut in 0usize..60) {
        let cut = cut.min(codes.len());
        let rec = |&(c, n): &(u8, u64)| FrameRecord { outcome: outcome(c), n_lva: n, insertions: 2 * n };
        let mut all = PointStats::new(0.0, 1, 64);
        let mut left = PointStats::new(0.0, 1, 64);
        let mut right = PointStats::new(0.0, 1, 64);
        for (i, c) in codes.iter().enumerate() {
            all.record(&rec(c));
            if i < cut { left.record(&rec(c)) } else { right.record(&rec(c)) }
        }
        let merged = right.merge(left);
        prop_assert_eq!(merged.frames, all.frames);
        prop_assert_eq!(merged.correct, all.correct);
        prop_assert_eq!(merged.erasures, all.erasures);
        prop_assert_eq!(merged.sum_n_lva, all.sum_n_lva);
        prop_assert_eq!(merged.max_n_lva, all.max_n_lva);
        prop_assert_eq!(merged.e_nlva().unwrap(), all.e_nlva().unwrap());
    }

    #[test]
    fn wilson_interval_brackets_the_estimate(n in 1u64..100_000, frac in 0.0f64..=1.0) {
        let s = (n as f64 * frac).round() as u64;
        let (lo, hi) = wilson_interval(s, n, Z95);
        let p = s as f64 / n as f64;
        prop_assert!(0.0 <= lo && lo <= p + 1e-12 && p <= hi + 1e-12 && hi <= 1.0);
    }

    #[test]
    fn q_function_is_decreasing(a in -8.0f64..8.0, b in 0.0f64..2.0) {
        prop_assert!(q_function(a + b) <= q_function(a));
        prop_assert!((q_function(a) + q_function(-a) - 1.0).abs() < 1e-14);
    }
}
