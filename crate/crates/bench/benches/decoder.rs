use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use ccrc_core::channel::{add_noise, modulate, ChannelConfig};
use ccrc_core::convcode::conv_encode;
use ccrc_core::rng::frame_rng;
use ccrc_core::slva::viterbi_forward;
use ccrc_core::spectrum::enumerate_spectrum;
use ccrc_core::{ConvCode, CrcCode, FrameLayout, ListDecoder, TrellisCode};

fn setup(cc: &str, crc: &str, k: usize) -> (TrellisCode, CrcCode, FrameLayout) {
    let code = ConvCode::from_octal(cc).unwrap();
    let crc = CrcCode::from_hex(crc).unwrap();
    let layout = FrameLayout::new(k, &crc, &code).unwrap();
    (TrellisCode::new(code), crc, layout)
}

/// Noisy observations of random messages at `snr_db`.
fn frames(t: &TrellisCode, crc: &CrcCode, k: usize, snr_db: f64, count: u64) -> Vec<Vec<f64>> {
    use rand::Rng;
    let ch = ChannelConfig::from_db(snr_db).unwrap();
    (0..count)
        .map(|f| {
            let mut rng = frame_rng(7, 0, f);
            let msg: Vec<u8> = (0..k).map(|_| rng.random_range(0..2)).collect();
            let coded = conv_encode(&crc.encode(&msg).unwrap(), t).unwrap();
            add_noise(&modulate(&coded), &ch, &mut rng)
        })
        .collect()
}

fn forward_pass(c: &mut Criterion) {
    let mut g = c.benchmark_group("viterbi_forward");
    for (cc, crc) in [("13,17", "0x43"), ("27,31", "0x709"), ("247,371", "0x9")] {
        let (t, crc, layout) = setup(cc, crc, 64);
        let rx = frames(&t, &crc, 64, 2.0, 1).remove(0);
        g.bench_with_input(BenchmarkId::from_parameter(cc), &rx, |b, rx| {
            b.iter(|| viterbi_forward(rx, &t, &layout).unwrap())
        });
    }
    g.finish();
}

fn list_decode(c: &mut Criterion) {
    let (t, crc, layout) = setup("27,31", "0x709", 64);
    let rx = frames(&t, &crc, 64, 1.0, 64);
    let mut g = c.benchmark_group("slva_decode_64_frames_1db");
    for l in [1u64, 16, 256] {
        g.bench_with_input(BenchmarkId::from_parameter(l), &l, |b, &l| {
            let mut dec = ListDecoder::new(&t, &crc, layout).unwrap();
            b.iter(|| {
                for r in &rx {
                    dec.decode(r, l).unwrap();
                }
            })
        });
    }
    g.finish();
}

fn spectrum(c: &mut Criterion) {
    let (t, crc, layout) = setup("13,17", "0x43", 256);
    let mut g = c.benchmark_group("spectrum");
    g.sample_size(10);
    g.bench_function("13,17+0x43_k256_d14", |b| {
        b.iter(|| enumerate_spectrum(&t, &crc, &layout, 14).unwrap())
    });
    g.finish();
}

criterion_group!(benches, forward_pass, list_decode, spectrum);
criterion_main!(benches);
