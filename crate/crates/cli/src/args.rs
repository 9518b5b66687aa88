//! Value parsers shared by the subcommands.

use anyhow::{anyhow, bail, Result};
use ccrc_core::{ConvCode, CrcCode, ListSize};

/// `start:step:stop` (inclusive), a comma list, or a single value.
pub fn parse_snr_grid(s: &str) -> Result<Vec<f64>> {
    let s = s.trim();
    if s.contains(':') {
        let parts: Vec<f64> = s
            .split(':')
            .map(|p| p.trim().parse::<f64>().map_err(|e| anyhow!("bad SNR range {s:?}: {e}")))
            .collect::<Result<_>>()?;
        let [start, step, stop] = parts[..] else {
            bail!("SNR range must be start:step:stop, got {s:?}");
        };
        if !(step > 0.0) || stop < start {
            bail!("SNR range {s:?} needs step > 0 and stop >= start");
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        if count > 10_000 {
            bail!("SNR range {s:?} has too many points");
        }
        // round away float drift so 0.1 steps print cleanly
        return Ok((0..count)
            .map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9)
            .collect());
    }
    s.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| anyhow!("bad SNR value {p:?}: {e}")))
        .collect()
}

/// Parsed `--snr-db` value.
#[derive(Clone, Debug, PartialEq)]
pub struct SnrGrid(pub Vec<f64>);

pub fn snr_grid(s: &str) -> Result<SnrGrid> {
    parse_snr_grid(s).map(SnrGrid)
}

/// Parsed comma list of integers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct U64List(pub Vec<u64>);

pub fn u64_list(s: &str) -> Result<U64List> {
    parse_u64_list(s).map(U64List)
}

pub fn parse_list_size(s: &str) -> Result<ListSize> {
    if s.eq_ignore_ascii_case("max") {
        return Ok(ListSize::Max);
    }
    match s.parse::<u64>() {
        Ok(0) | Err(_) => bail!("list size must be a positive integer or `max`, got {s:?}"),
        Ok(l) => Ok(ListSize::Fixed(l)),
    }
}

pub fn parse_u64_list(s: &str) -> Result<Vec<u64>> {
    s.split(',')
        .map(|p| p.trim().parse::<u64>().map_err(|e| anyhow!("bad integer {p:?}: {e}")))
        .collect()
}

pub fn parse_cc(s: &str) -> Result<ConvCode> {
    Ok(ConvCode::from_octal(s)?)
}

/// Hex generator, or `none` for no CRC.
pub fn parse_crc(s: &str) -> Result<CrcCode> {
    if s.eq_ignore_ascii_case("none") {
        return Ok(CrcCode::none());
    }
    Ok(CrcCode::from_hex(s)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snr_grids() {
        assert_eq!(parse_snr_grid("0:1:3").unwrap(), [0.0, 1.0, 2.0, 3.0]);
        assert_eq!(parse_snr_grid("-1:0.5:0").unwrap(), [-1.0, -0.5, 0.0]);
        assert_eq!(parse_snr_grid("0:0.1:0.3").unwrap(), [0.0, 0.1, 0.2, 0.3]);
        assert_eq!(parse_snr_grid("3.7").unwrap(), [3.7]);
        assert_eq!(parse_snr_grid("1, 2,4").unwrap(), [1.0, 2.0, 4.0]);
        assert!(parse_snr_grid("0:0:3").is_err());
        assert!(parse_snr_grid("3:1:0").is_err());
        assert!(parse_snr_grid("0:1").is_err());
    }

    #[test]
    fn list_sizes() {
        assert_eq!(parse_list_size("max").unwrap(), ListSize::Max);
        assert_eq!(parse_list_size("8").unwrap(), ListSize::Fixed(8));
        assert!(parse_list_size("0").is_err());
        assert!(parse_list_size("-1").is_err());
    }

    #[test]
    fn codes() {
        assert_eq!(parse_crc("none").unwrap().degree(), 0);
        assert_eq!(parse_crc("0x43").unwrap().degree(), 6);
        assert_eq!(parse_cc("13,17").unwrap().memory(), 3);
        assert!(parse_cc("13,19").is_err());
    }
}
