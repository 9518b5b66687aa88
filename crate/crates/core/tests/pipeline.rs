//! End-to-end behaviour of the simulation pipeline.

use ccrc_core::harness::{run_sweep, stats_to_csv, tradeoff_curves, PointStats, SimConfig};
use ccrc_core::rng::frame_rng;
use ccrc_core::{ConvCode, CrcCode, ListSize, MessageMode, Simulator, StoppingRule};
use rand::seq::SliceRandom;

fn simulator(crc: &str, k: usize, l: ListSize) -> Simulator {
    Simulator::new(
        &ConvCode::from_octal("13,17").unwrap(),
        &CrcCode::from_hex(crc).unwrap(),
        k,
        l,
    )
    .unwrap()
}

fn z(a: f64, b: f64, va: f64, vb: f64) -> f64 {
    let s = (va + vb).sqrt();
    if s == 0.0 {
        0.0
    } else {
        (a - b).abs() / s
    }
}

#[test]
fn same_seed_gives_identical_csv() {
    let mut cfg = SimConfig::new(
        ConvCode::from_octal("13,17").unwrap(),
        CrcCode::from_hex("0x9").unwrap(),
        24,
    );
    cfg.snr_db = vec![0.0, 2.0];
    cfg.stopping = StoppingRule::Frames(3_000);
    cfg.seed = 11;
    let a = stats_to_csv(&run_sweep(&cfg).unwrap(), &[]).unwrap();
    let b = stats_to_csv(&run_sweep(&cfg).unwrap(), &[]).unwrap();
    assert_eq!(a, b);
    cfg.seed = 12;
    assert_ne!(a, stats_to_csv(&run_sweep(&cfg).unwrap(), &[]).unwrap());
}

#[test]
fn random_and_all_zero_messages_agree() {
    let sim = simulator("0x1B", 32, ListSize::Fixed(16));
    let n = 40_000;
    let r = sim.run_frames(1.5, 5, 0, 0, n, MessageMode::Random).unwrap();
    let z0 = sim.run_frames(1.5, 6, 0, 0, n, MessageMode::AllZero).unwrap();
    let var = |p: f64| p * (1.0 - p) / n as f64;
    for (a, b) in [
        (r.p_ue().unwrap(), z0.p_ue().unwrap()),
        (r.p_nack().unwrap(), z0.p_nack().unwrap()),
    ] {
        assert!(z(a, b, var(a), var(b)) < 3.0, "{a} vs {b}");
    }
    let (ea, eb) = (r.e_nlva().unwrap(), z0.e_nlva().unwrap());
    let (va, vb) = (r.var_nlva().unwrap() / n as f64, z0.var_nlva().unwrap() / n as f64);
    assert!(z(ea, eb, va, vb) < 3.0, "{ea} vs {eb}");
}

#[test]
fn rank_histogram_matches_a_list_of_one_rerun() {
    let big = simulator("0x2D", 48, ListSize::Fixed(64));
    let one = simulator("0x2D", 48, ListSize::Fixed(1));
    let n = 30_000;
    let a = big.run_frames(2.0, 3, 0, 0, n, MessageMode::Random).unwrap();
    let b = one.run_frames(2.0, 3, 0, 0, n, MessageMode::Random).unwrap();
    // same frames, so the replay is exact, not just within CI
    assert_eq!(a.p_ue_at(1).unwrap(), b.p_ue().unwrap());
    assert_eq!(a.p_nack_at(1).unwrap(), b.p_nack().unwrap());
    let c = one.run_frames(2.0, 4, 0, 0, n, MessageMode::Random).unwrap();
    let p = a.p_ue_at(1).unwrap();
    let q = c.p_ue().unwrap();
    assert!(z(p, q, p * (1.0 - p) / n as f64, q * (1.0 - q) / n as f64) < 3.0);
}

#[test]
fn tradeoff_is_monotone_and_ends_without_erasures() {
    let sim = simulator("0x9", 16, ListSize::Max);
    let st = sim.run_frames(0.0, 2, 0, 0, 20_000, MessageMode::Random).unwrap();
    let curve = tradeoff_curves(&st, u64::MAX).unwrap();
    assert_eq!(curve.len() as u64, sim.list_size());
    for w in curve.windows(2) {
        assert!(w[1].p_nack <= w[0].p_nack);
        assert!(w[1].p_ue >= w[0].p_ue);
    }
    let last = curve.last().unwrap();
    assert_eq!(last.p_nack, 0.0);
    assert_eq!(last.p_ue, st.p_ue().unwrap());
    assert_eq!(curve[0].p_nack + curve[0].p_ue, st.p_ue_at(1).unwrap() + st.p_nack_at(1).unwrap());
}

#[test]
fn failure_identity_on_counts() {
    let sim = simulator("0x43", 32, ListSize::Fixed(4));
    let st: PointStats = sim.run_frames(1.0, 9, 0, 0, 10_000, MessageMode::Random).unwrap();
    assert_eq!(st.correct + st.undetected + st.erasures, st.frames);
    assert_eq!(st.failures(), st.undetected + st.erasures);
    assert!((st.fer().unwrap() - st.p_ue().unwrap() - st.p_nack().unwrap()).abs() < 1e-15);
}

/// Drawing codewords in uniformly random order, the first CRC codeword sits
/// at position `(N + 1) / (K + 1)` on average.
#[test]
fn random_order_model_for_decoding_attempts() {
    let crc = CrcCode::from_hex("0x9").unwrap();
    let n = 10;
    let words: Vec<Vec<u8>> = (0..1u32 << n)
        .map(|x| (0..n).map(|i| ((x >> (n - 1 - i)) & 1) as u8).collect())
        .collect();
    let trials = 20_000u64;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut order: Vec<usize> = (0..words.len()).collect();
    for t in 0..trials {
        order.shuffle(&mut frame_rng(1, 0, t));
        let pos = order.iter().position(|&i| crc.check(&words[i]).unwrap()).unwrap() + 1;
        sum += pos as f64;
        sum_sq += (pos * pos) as f64;
    }
    let mean = sum / trials as f64;
    let var = sum_sq / trials as f64 - mean * mean;
    let expect = (1024.0 + 1.0) / (128.0 + 1.0);
    assert!((mean - expect).abs() < 4.0 * (var / trials as f64).sqrt(), "{mean} vs {expect}");
}
