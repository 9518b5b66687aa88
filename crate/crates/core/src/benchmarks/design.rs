//! CC-CRC design sweep: SNR needed for a target FER, its gap to the normal
//! approximation, and the decoding cost at that SNR.

use rayon::prelude::*;

use super::complexity::{complexity_report, ComplexityParams};
use super::normal_approx::benchmark_snr_db;
use crate::convcode::ConvCode;
use crate::error::{Error, Result};
use crate::gf2::CrcCode;
use crate::harness::{ListSize, MessageMode, PointStats, Simulator};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DesignPair {
    pub code: ConvCode,
    pub crc: CrcCode,
}

impl DesignPair {
    pub fn label(&self) -> String {
        format!("({})+{}", self.code.octal_label(), self.crc.hex_label())
    }
}

/// Parses one pair per line, e.g. `13,17 0x43` or `13,17;0x43`. The CRC is
/// the last field; `none` or `0x1` selects plain Viterbi decoding. Blank
/// lines, `#` comments and a leading header line are skipped.
pub fn parse_pairs(text: &str) -> Result<Vec<DesignPair>> {
    let mut out = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() || (out.is_empty() && line.starts_with(|c: char| c.is_ascii_alphabetic())) {
            continue;
        }
        let cut = line
            .rfind(|c: char| c == ',' || c == ';' || c.is_whitespace())
            .ok_or_else(|| Error::InvalidArgument(format!("line {}: expected `<cc> <crc>`", no + 1)))?;
        let cc = line[..cut].trim_end_matches(|c: char| c == ',' || c == ';' || c.is_whitespace());
        let crc = line[cut + 1..].trim();
        let crc = if crc.eq_ignore_ascii_case("none") {
            CrcCode::none()
        } else {
            CrcCode::from_hex(crc)?
        };
        out.push(DesignPair {
            code: ConvCode::from_octal(cc)?,
            crc,
        });
    }
    if out.is_empty() {
        return Err(Error::EmptyInput("pair list"));
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DesignOptions {
    pub k: usize,
    pub target_fer: f64,
    pub list_size: ListSize,
    pub params: ComplexityParams,
    /// SNR window searched, in dB.
    pub snr_lo: f64,
    pub snr_hi: f64,
    /// Bisection stops once the bracket is narrower than this.
    pub tolerance_db: f64,
    pub batch: u64,
    /// Frame cap per bisection point; reaching it means the FER is
    /// statistically indistinguishable from the target there.
    pub max_frames: u64,
    /// Frames used to estimate the decoding cost at the final SNR.
    pub ops_frames: u64,
    pub seed: u64,
}

impl DesignOptions {
    pub fn new(k: usize, target_fer: f64) -> Self {
        Self {
            k,
            target_fer,
            list_size: ListSize::Max,
            params: ComplexityParams::default(),
            snr_lo: -2.0,
            snr_hi: 10.0,
            tolerance_db: 0.02,
            batch: 2_000,
            max_frames: 400_000,
            ops_frames: 20_000,
            seed: 1,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.target_fer >= 1e-4 && self.target_fer < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "target FER must lie in [1e-4, 1), got {}",
                self.target_fer
            )));
        }
        if !(self.snr_lo < self.snr_hi) || !(self.tolerance_db > 0.0) {
            return Err(Error::InvalidArgument("empty SNR window or tolerance".into()));
        }
        if self.batch == 0 || self.max_frames < self.batch || self.ops_frames == 0 {
            return Err(Error::InvalidArgument("frame counts must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DesignPoint {
    pub pair: DesignPair,
    pub snr_star: f64,
    pub benchmark_snr: f64,
    pub gap_db: f64,
    pub e_nlva: f64,
    pub e_ilva: f64,
    pub scaled_ops: f64,
    /// Set when the target was not crossed inside the SNR window; `snr_star`
    /// is then the violated window edge.
    pub flagged: bool,
}

/// Where the FER at one SNR sits relative to the target.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Side {
    Above,
    Below,
    Unresolved,
}

/// Batches frames until the 95% FER interval excludes the target or the cap
/// is reached. Frame indices restart at 0 for every SNR, so all points of a
/// bisection share messages and noise shapes.
fn classify(sim: &Simulator, snr_db: f64, opts: &DesignOptions) -> Result<(Side, PointStats)> {
    let mut acc = PointStats::new(snr_db, opts.seed, sim.list_size());
    while acc.frames < opts.max_frames {
        let n = opts.batch.min(opts.max_frames - acc.frames);
        let batch = sim.run_frames(snr_db, opts.seed, 0, acc.frames, n, MessageMode::Random)?;
        acc = acc.merge(batch);
        let (lo, hi) = acc.fer_ci();
        if lo > opts.target_fer {
            return Ok((Side::Above, acc));
        }
        if hi < opts.target_fer {
            return Ok((Side::Below, acc));
        }
    }
    Ok((Side::Unresolved, acc))
}

/// Bisects the SNR at which `sim` reaches the target FER. Returns the SNR
/// and whether the window failed to bracket the target.
pub fn snr_for_target_fer(sim: &Simulator, opts: &DesignOptions) -> Result<(f64, bool)> {
    opts.validate()?;
    let (lo, hi) = (opts.snr_lo, opts.snr_hi);
    match classify(sim, lo, opts)?.0 {
        Side::Below => return Ok((lo, true)),
        Side::Unresolved => return Ok((lo, false)),
        Side::Above => {}
    }
    match classify(sim, hi, opts)?.0 {
        Side::Above => return Ok((hi, true)),
        Side::Unresolved => return Ok((hi, false)),
        Side::Below => {}
    }
    let (mut lo, mut hi) = (lo, hi);
    while hi - lo >= opts.tolerance_db {
        let mid = 0.5 * (lo + hi);
        match classify(sim, mid, opts)?.0 {
            Side::Above => lo = mid,
            Side::Below => hi = mid,
            Side::Unresolved => return Ok((mid, false)),
        }
    }
    Ok((0.5 * (lo + hi), false))
}

/// Design point of one pair.
pub fn design_point(pair: &DesignPair, opts: &DesignOptions) -> Result<DesignPoint> {
    opts.validate()?;
    let sim = Simulator::new(&pair.code, &pair.crc, opts.k, opts.list_size)?;
    let (snr_star, flagged) = snr_for_target_fer(&sim, opts)?;
    let layout = sim.layout();
    let benchmark_snr = benchmark_snr_db(layout.channel_bits(), opts.k, opts.target_fer)?;
    let stats = sim.run_frames(snr_star, opts.seed, 1, 0, opts.ops_frames, MessageMode::Random)?;
    let e_nlva = stats.e_nlva()?;
    let e_ilva = stats.e_ilva()?;
    let report = complexity_report(layout, &opts.params, e_nlva, e_ilva)?;
    Ok(DesignPoint {
        pair: pair.clone(),
        snr_star,
        benchmark_snr,
        gap_db: snr_star - benchmark_snr,
        e_nlva,
        e_ilva,
        scaled_ops: report.scaled_ops,
        flagged,
    })
}

/// Design points of all pairs, sorted by gap and then by cost.
pub fn design_sweep(pairs: &[DesignPair], opts: &DesignOptions) -> Result<Vec<DesignPoint>> {
    opts.validate()?;
    let mut points = pairs
        .par_iter()
        .map(|p| design_point(p, opts))
        .collect::<Result<Vec<_>>>()?;
    points.sort_by(|a, b| {
        a.gap_db
            .total_cmp(&b.gap_db)
            .then_with(|| a.scaled_ops.total_cmp(&b.scaled_ops))
    });
    Ok(points)
}

pub const DESIGN_CSV_HEADER: &str = "cc,crc,m_plus_v,snr_star_db,benchmark_snr_db,gap_db,e_nlva,e_ilva,scaled_ops,flagged";

pub fn design_to_csv(points: &[DesignPoint]) -> String {
    let mut out = format!("{DESIGN_CSV_HEADER}\n");
    for p in points {
        out.push_str(&format!(
            "\"{}\",{},{},{:.4},{:.4},{:.4},{:.6},{:.6},{:.1},{}\n",
            p.pair.code.octal_label(),
            p.pair.crc.hex_label(),
            p.pair.crc.degree() + p.pair.code.memory(),
            p.snr_star,
            p.benchmark_snr,
            p.gap_db,
            p.e_nlva,
            p.e_ilva,
            p.scaled_ops,
            p.flagged
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_pair_files() {
        let text = "cc,crc\n# comment\n13,17 0x43\n27,31;0x709\n\n5,7,0x9  # trailing\n13,17 none\n";
        let pairs = parse_pairs(text).unwrap();
        let labels: Vec<String> = pairs.iter().map(DesignPair::label).collect();
        assert_eq!(labels, ["(13,17)+0x43", "(27,31)+0x709", "(5,7)+0x9", "(13,17)+0x1"]);
        assert!(parse_pairs("# nothing\n").is_err());
        assert!(parse_pairs("13,17 0xZZ").is_err());
    }

    #[test]
    fn bisection_lands_where_fer_crosses_the_target() {
        let pair = &parse_pairs("5,7 0x9").unwrap()[0];
        let mut opts = DesignOptions::new(32, 0.05);
        opts.tolerance_db = 0.1;
        opts.max_frames = 40_000;
        opts.ops_frames = 2_000;
        let p = design_point(pair, &opts).unwrap();
        assert!(!p.flagged);
        let sim = Simulator::new(&pair.code, &pair.crc, 32, ListSize::Max).unwrap();
        let below = sim.run_frames(p.snr_star - 0.5, 9, 0, 0, 20_000, MessageMode::Random).unwrap();
        let above = sim.run_frames(p.snr_star + 0.5, 9, 0, 0, 20_000, MessageMode::Random).unwrap();
        assert!(below.fer().unwrap() > 0.05 && above.fer().unwrap() < 0.05);
        assert!(p.gap_db.is_finite() && p.scaled_ops > 0.0);
    }

    #[test]
    fn unreachable_target_is_flagged() {
        let pair = &parse_pairs("5,7 0x9").unwrap()[0];
        let mut opts = DesignOptions::new(32, 1e-3);
        opts.snr_lo = -2.0;
        opts.snr_hi = -1.0;
        opts.ops_frames = 500;
        let p = design_point(pair, &opts).unwrap();
        assert!(p.flagged);
        assert_eq!(p.snr_star, -1.0);
    }
}
