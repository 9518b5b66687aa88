//! Seeded Monte Carlo engine: encode, modulate, add noise, list-decode, count.
//!
//! Frame `f` of sweep point `p` draws its message and noise from
//! [`frame_rng`]`(seed, p, f)`, so the counts are identical however rayon
//! schedules the frames.

mod importance;
mod stats;

use rayon::prelude::*;
use rand::Rng;

pub use importance::{estimate_p_ue_importance, IsEstimate, IsOptions};
pub use stats::{
    tradeoff_curves, wilson_interval, FrameOutcome, FrameRecord, PointStats, TradeoffPoint, Z95,
};

use crate::channel::{add_noise_in_place, modulate_into, ChannelConfig};
use crate::convcode::{conv_encode, ConvCode, FrameLayout, TrellisCode};
use crate::error::{Error, Result};
use crate::gf2::CrcCode;
use crate::rng::frame_rng;
use crate::slva::{max_list_size, ListDecoder, Verdict};
use crate::spectrum::{spectrum_through_d_crc, DistanceSpectrum};

/// Largest distance searched when resolving `L = max`.
const CAP_SEARCH_DEPTH: usize = 48;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ListSize {
    Fixed(u64),
    /// The smallest list that can never erase, from the distance spectrum.
    Max,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MessageMode {
    /// Fresh uniform message per frame.
    Random,
    AllZero,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StoppingRule {
    Frames(u64),
    /// Run batches until the 95% interval on `P_Fail` is within `target`
    /// times the estimate, or `max_frames` is reached.
    RelativeCi {
        target: f64,
        batch: u64,
        max_frames: u64,
    },
}

#[derive(Clone, Debug)]
pub struct SimConfig {
    pub code: ConvCode,
    pub crc: CrcCode,
    pub k: usize,
    pub list_size: ListSize,
    pub snr_db: Vec<f64>,
    pub stopping: StoppingRule,
    pub seed: u64,
    pub message_mode: MessageMode,
}

impl SimConfig {
    pub fn new(code: ConvCode, crc: CrcCode, k: usize) -> Self {
        Self {
            code,
            crc,
            k,
            list_size: ListSize::Max,
            snr_db: vec![0.0],
            stopping: StoppingRule::Frames(10_000),
            seed: 1,
            message_mode: MessageMode::Random,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.snr_db.is_empty() {
            return Err(Error::EmptyInput("SNR grid"));
        }
        if self.snr_db.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("SNR values must be finite".into()));
        }
        if self.k == 0 {
            return Err(Error::InvalidArgument("k must be at least 1".into()));
        }
        match self.list_size {
            ListSize::Fixed(0) => {
                return Err(Error::InvalidArgument("list size must be at least 1".into()))
            }
            _ => {}
        }
        match self.stopping {
            StoppingRule::Frames(0) => Err(Error::EmptyStats),
            StoppingRule::RelativeCi {
                target,
                batch,
                max_frames,
            } if !(target > 0.0) || batch == 0 || max_frames == 0 => Err(Error::InvalidArgument(
                "relative-CI stopping needs a positive target, batch and frame cap".into(),
            )),
            _ => Ok(()),
        }
    }
}

/// A CC-CRC pair ready to simulate, with `L = max` resolved.
#[derive(Clone, Debug)]
pub struct Simulator {
    trellis: TrellisCode,
    crc: CrcCode,
    layout: FrameLayout,
    list_size: u64,
    spectrum: Option<DistanceSpectrum>,
}

impl Simulator {
    pub fn new(code: &ConvCode, crc: &CrcCode, k: usize, list_size: ListSize) -> Result<Self> {
        let trellis = TrellisCode::new(code.clone());
        let layout = FrameLayout::new(k, crc, code)?;
        let (list_size, spectrum) = match list_size {
            ListSize::Fixed(0) => {
                return Err(Error::InvalidArgument("list size must be at least 1".into()))
            }
            ListSize::Fixed(l) => (l, None),
            ListSize::Max => {
                let spec = spectrum_through_d_crc(&trellis, crc, &layout, CAP_SEARCH_DEPTH)?;
                let cap = max_list_size(&spec)?;
                (u64::try_from(cap).unwrap_or(u64::MAX), Some(spec))
            }
        };
        Ok(Self {
            trellis,
            crc: crc.clone(),
            layout,
            list_size,
            spectrum,
        })
    }

    pub fn from_config(cfg: &SimConfig) -> Result<Self> {
        cfg.validate()?;
        Self::new(&cfg.code, &cfg.crc, cfg.k, cfg.list_size)
    }

    pub fn trellis(&self) -> &TrellisCode {
        &self.trellis
    }

    pub fn crc(&self) -> &CrcCode {
        &self.crc
    }

    pub fn layout(&self) -> &FrameLayout {
        &self.layout
    }

    /// Resolved list size.
    pub fn list_size(&self) -> u64 {
        self.list_size
    }

    /// Spectrum through `d_crc`, present when `L = max` was requested.
    pub fn spectrum(&self) -> Option<&DistanceSpectrum> {
        self.spectrum.as_ref()
    }

    pub fn worker(&self) -> Result<FrameWorker<'_>> {
        FrameWorker::new(self)
    }

    /// Simulates frames `first..first + count` of point `point` at `snr_db`.
    pub fn run_frames(
        &self,
        snr_db: f64,
        seed: u64,
        point: u64,
        first: u64,
        count: u64,
        mode: MessageMode,
    ) -> Result<PointStats> {
        let channel = ChannelConfig::from_db(snr_db)?;
        // validate once so per-frame failures cannot happen
        self.worker()?;
        let stats = (first..first + count)
            .into_par_iter()
            .map_init(
                || self.worker().expect("worker validated"),
                |w, f| w.run(&channel, seed, point, f, mode),
            )
            .fold(
                || PointStats::new(snr_db, seed, self.list_size),
                |mut acc, r| {
                    acc.record(&r);
                    acc
                },
            )
            .reduce(|| PointStats::new(snr_db, seed, self.list_size), PointStats::merge);
        Ok(stats)
    }

    /// One SNR point under a stopping rule.
    pub fn run_point(
        &self,
        snr_db: f64,
        seed: u64,
        point: u64,
        stopping: StoppingRule,
        mode: MessageMode,
    ) -> Result<PointStats> {
        let stats = match stopping {
            StoppingRule::Frames(0) => return Err(Error::EmptyStats),
            StoppingRule::Frames(n) => self.run_frames(snr_db, seed, point, 0, n, mode)?,
            StoppingRule::RelativeCi {
                target,
                batch,
                max_frames,
            } => {
                let mut acc = PointStats::new(snr_db, seed, self.list_size);
                while acc.frames < max_frames {
                    let n = batch.min(max_frames - acc.frames);
                    let batch_stats = self.run_frames(snr_db, seed, point, acc.frames, n, mode)?;
                    acc = acc.merge(batch_stats);
                    let fer = acc.fer()?;
                    let (lo, hi) = acc.fer_ci();
                    if fer > 0.0 && (hi - lo) / 2.0 <= target * fer {
                        break;
                    }
                }
                acc
            }
        };
        if stats.frames == 0 {
            return Err(Error::EmptyStats);
        }
        Ok(stats)
    }
}

/// Runs every point of the configured sweep.
pub fn run_sweep(cfg: &SimConfig) -> Result<Vec<PointStats>> {
    let sim = Simulator::from_config(cfg)?;
    cfg.snr_db
        .iter()
        .enumerate()
        .map(|(i, &snr)| sim.run_point(snr, cfg.seed, i as u64, cfg.stopping, cfg.message_mode))
        .collect()
}

/// Convenience form: one point of a config, by index into its SNR grid.
pub fn run_point(cfg: &SimConfig, point: usize) -> Result<PointStats> {
    let snr = *cfg
        .snr_db
        .get(point)
        .ok_or_else(|| Error::InvalidArgument(format!("no SNR point {point}")))?;
    let sim = Simulator::from_config(cfg)?;
    sim.run_point(snr, cfg.seed, point as u64, cfg.stopping, cfg.message_mode)
}

/// Per-thread buffers and decoder.
pub struct FrameWorker<'a> {
    sim: &'a Simulator,
    decoder: ListDecoder,
    message: Vec<u8>,
    received: Vec<f64>,
}

impl<'a> FrameWorker<'a> {
    fn new(sim: &'a Simulator) -> Result<Self> {
        Ok(Self {
            sim,
            decoder: ListDecoder::new(&sim.trellis, &sim.crc, sim.layout)?,
            message: vec![0; sim.layout.k],
            received: vec![0.0; sim.layout.channel_bits()],
        })
    }

    /// The message sent in the most recent frame.
    pub fn message(&self) -> &[u8] {
        &self.message
    }

    pub fn run(
        &mut self,
        channel: &ChannelConfig,
        seed: u64,
        point: u64,
        frame: u64,
        mode: MessageMode,
    ) -> FrameRecord {
        let mut rng = frame_rng(seed, point, frame);
        match mode {
            MessageMode::Random => self.message.iter_mut().for_each(|b| *b = rng.random_range(0..2)),
            MessageMode::AllZero => self.message.fill(0),
        }
        let word = self.sim.crc.encode(&self.message).expect("k >= 1");
        let coded = conv_encode(&word, &self.sim.trellis).expect("word length matches layout");
        modulate_into(&coded, &mut self.received);
        add_noise_in_place(&mut self.received, channel, &mut rng);
        self.decode_received()
    }

    /// Decodes the current received buffer against the current message.
    fn decode_received(&mut self) -> FrameRecord {
        let out = self
            .decoder
            .decode(&self.received, self.sim.list_size)
            .expect("buffers sized from the layout");
        let outcome = match &out.verdict {
            Verdict::Erasure => FrameOutcome::Erasure,
            Verdict::Message(m) if *m == self.message => FrameOutcome::Correct,
            Verdict::Message(m) => FrameOutcome::Undetected {
                error_index: error_index(m, &self.message),
            },
        };
        FrameRecord {
            outcome,
            n_lva: out.n_lva,
            insertions: out.insertions,
        }
    }
}

/// `decoded XOR sent` as an integer, first bit most significant.
pub fn error_index(decoded: &[u8], sent: &[u8]) -> Option<u64> {
    if decoded.len() > 64 {
        return None;
    }
    Some(
        decoded
            .iter()
            .zip(sent)
            .fold(0u64, |acc, (&a, &b)| (acc << 1) | u64::from(a ^ b)),
    )
}

/// Column order of the simulation CSV.
pub const CSV_HEADER: &str = "snr_db,fer,p_ue,p_nack,e_nlva,var_nlva,e_ilva,frames,seed";

/// Simulation CSV with `#`-prefixed metadata lines before the header.
pub fn stats_to_csv(stats: &[PointStats], metadata: &[(String, String)]) -> Result<String> {
    let mut out = String::new();
    for (key, value) in metadata {
        out.push_str(&format!("# {key}: {value}\n"));
    }
    out.push_str(CSV_HEADER);
    out.push('\n');
    for s in stats {
        out.push_str(&format!(
            "{},{:e},{:e},{:e},{},{},{},{},{}\n",
            s.snr_db,
            s.fer()?,
            s.p_ue()?,
            s.p_nack()?,
            s.e_nlva()?,
            s.var_nlva()?,
            s.e_ilva()?,
            s.frames,
            s.seed
        ));
    }
    Ok(out)
}

/// Metadata lines describing a config and its resolved list size.
pub fn config_metadata(cfg: &SimConfig, sim: &Simulator) -> Vec<(String, String)> {
    let stopping = match cfg.stopping {
        StoppingRule::Frames(n) => format!("fixed {n} frames"),
        StoppingRule::RelativeCi {
            target,
            batch,
            max_frames,
        } => format!("relative CI {target} (batches of {batch}, at most {max_frames} frames)"),
    };
    let list = match cfg.list_size {
        ListSize::Fixed(l) => l.to_string(),
        ListSize::Max => format!("max ({})", sim.list_size),
    };
    vec![
        ("cc".into(), cfg.code.to_string()),
        ("crc".into(), cfg.crc.hex_label()),
        ("k".into(), cfg.k.to_string()),
        ("list_size".into(), list),
        ("channel_bits".into(), sim.layout.channel_bits().to_string()),
        ("stopping".into(), stopping),
        (
            "message".into(),
            match cfg.message_mode {
                MessageMode::Random => "random".into(),
                MessageMode::AllZero => "all-zero".into(),
            },
        ),
        ("seed".into(), cfg.seed.to_string()),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sim(cc: &str, crc: &str, k: usize, l: ListSize) -> Simulator {
        Simulator::new(
            &ConvCode::from_octal(cc).unwrap(),
            &CrcCode::from_hex(crc).unwrap(),
            k,
            l,
        )
        .unwrap()
    }

    #[test]
    fn max_list_size_for_k256() {
        let s = sim("13,17", "0x43", 256, ListSize::Max);
        assert_eq!(s.list_size(), 88_220);
        let none = sim("13,17", "0x1", 64, ListSize::Max);
        assert_eq!(none.list_size(), 1);
    }

    #[test]
    fn same_seed_same_counts() {
        let s = sim("13,17", "0x9", 32, ListSize::Fixed(8));
        let a = s.run_frames(1.0, 5, 0, 0, 500, MessageMode::Random).unwrap();
        let b = s.run_frames(1.0, 5, 0, 0, 500, MessageMode::Random).unwrap();
        assert_eq!(a, b);
        let split = s
            .run_frames(1.0, 5, 0, 0, 200, MessageMode::Random)
            .unwrap()
            .merge(s.run_frames(1.0, 5, 0, 200, 300, MessageMode::Random).unwrap());
        assert_eq!(split, a);
        assert_eq!(a.correct + a.undetected + a.erasures, a.frames);
    }

    #[test]
    fn zero_frames_is_an_error() {
        let s = sim("13,17", "0x9", 16, ListSize::Fixed(2));
        assert!(matches!(
            s.run_point(0.0, 1, 0, StoppingRule::Frames(0), MessageMode::Random),
            Err(Error::EmptyStats)
        ));
        let mut cfg = SimConfig::new(ConvCode::from_octal("13,17").unwrap(), CrcCode::none(), 8);
        cfg.snr_db.clear();
        assert!(run_sweep(&cfg).is_err());
    }

    #[test]
    fn high_snr_is_error_free() {
        let s = sim("13,17", "0x43", 64, ListSize::Max);
        let st = s.run_frames(12.0, 3, 0, 0, 2000, MessageMode::Random).unwrap();
        assert_eq!(st.correct, 2000);
        assert_eq!(st.e_nlva().unwrap(), 1.0);
    }

    #[test]
    fn relative_ci_rule_stops() {
        let s = sim("13,17", "0x9", 32, ListSize::Fixed(4));
        let rule = StoppingRule::RelativeCi {
            target: 0.2,
            batch: 1000,
            max_frames: 50_000,
        };
        let st = s.run_point(0.0, 9, 0, rule, MessageMode::Random).unwrap();
        let (lo, hi) = st.fer_ci();
        assert!((hi - lo) / 2.0 <= 0.2 * st.fer().unwrap() || st.frames == 50_000);
        assert_eq!(st.frames % 1000, 0);
    }

    #[test]
    fn csv_layout() {
        let s = sim("13,17", "0x9", 16, ListSize::Fixed(4));
        let st = s.run_frames(2.0, 11, 0, 0, 100, MessageMode::AllZero).unwrap();
        let mut cfg = SimConfig::new(ConvCode::from_octal("13,17").unwrap(), CrcCode::from_hex("0x9").unwrap(), 16);
        cfg.list_size = ListSize::Fixed(4);
        let csv = stats_to_csv(&[st], &config_metadata(&cfg, &s)).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert!(lines[0].starts_with("# cc: (13,17)"));
        let header = lines.iter().position(|l| !l.starts_with('#')).unwrap();
        assert_eq!(lines[header], CSV_HEADER);
        assert_eq!(lines[header + 1].split(',').count(), 9);
        assert!(lines[header + 1].ends_with(",100,11"));
    }

    #[test]
    fn error_index_is_msb_first() {
        assert_eq!(error_index(&[1, 0, 1], &[0, 0, 0]), Some(5));
        assert_eq!(error_index(&[1, 1], &[1, 0]), Some(1));
        assert_eq!(error_index(&[0; 65], &[0; 65]), None);
    }
}
