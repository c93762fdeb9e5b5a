//! Flat `key = value` run configuration.
//!
//! ```text
//! # 2x2 SM with BCSK, selection combining
//! scheme = SM
//! N = 2
//! M = 2
//! r = 15um
//! Ts = 1s
//! snr_db = 0:2:20
//! detector = sc
//! ```
//!
//! Keys are case-sensitive (`d` is the link distance, `D` the diffusion
//! coefficient). Lengths default to micrometres when given without a unit,
//! durations to seconds. Anything not given takes its default: `D = 2.2e-9`,
//! `d = 20um`, `rho = 0.1um`, `r = 15um`, `Ts = 0.2s`, SNR `0:2:20` dB,
//! 2×2 SM with BCSK, 10⁵ symbols × 5 replications, seed 1.

use std::collections::HashMap;
use std::path::Path;

use crate::channel::SystemGeometry;
use crate::detection::{Combining, Detector, ThresholdPolicy};
use crate::engine::{default_detector, default_snr_grid, RunConfig, DEFAULT_REPLICATIONS, DEFAULT_SYMBOLS};
use crate::error::{Error, Result};
use crate::link::Impairments;
use crate::modulation::{Scheme, SchemeKind};

pub const DEFAULT_DIFFUSION: f64 = 2.2e-9;
pub const DEFAULT_LINK_DISTANCE: f64 = 20e-6;
pub const DEFAULT_RECEIVER_RADIUS: f64 = 0.1e-6;
pub const DEFAULT_SEPARATION: f64 = 15e-6;
pub const DEFAULT_SYMBOL_DURATION: f64 = 0.2;

/// Canonical key and its accepted spellings.
const KEYS: &[(&str, &[&str])] = &[
    ("scheme", &["scheme"]),
    ("n_links", &["n_links", "N"]),
    ("csk_order", &["csk_order", "M"]),
    ("link_distance", &["link_distance", "d"]),
    ("separation", &["separation", "r"]),
    ("receiver_radius", &["receiver_radius", "rho"]),
    ("diffusion_coeff", &["diffusion_coeff", "D"]),
    ("symbol_duration", &["symbol_duration", "Ts"]),
    ("snr_db", &["snr_db", "snr"]),
    ("symbols", &["symbols"]),
    ("replications", &["replications", "reps"]),
    ("seed", &["seed"]),
    ("detector", &["detector"]),
    ("threshold_policy", &["threshold_policy"]),
    ("levels", &["levels"]),
    ("noise", &["noise"]),
    ("interference", &["interference"]),
    ("noiseless", &["noiseless"]),
];

fn canonical(key: &str) -> Option<&'static str> {
    KEYS.iter()
        .find(|(_, aliases)| aliases.contains(&key))
        .map(|(k, _)| *k)
}

/// Command-line overrides applied after the file is parsed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub symbols: Option<u64>,
    pub replications: Option<u32>,
}

impl Overrides {
    pub fn apply(&self, config: &mut RunConfig) {
        if let Some(s) = self.seed {
            config.seed = s;
        }
        if let Some(n) = self.symbols {
            config.symbols = n;
        }
        if let Some(r) = self.replications {
            config.replications = r;
        }
    }
}

pub fn parse_config_file(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut values: HashMap<&'static str, &str> = HashMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::config(format!("line {}", lineno + 1), format!("expected `key = value`, got `{line}`"))
        })?;
        let key = key.trim();
        let canon = canonical(key).ok_or_else(|| Error::config(key, "unknown key"))?;
        if values.insert(canon, value.trim()).is_some() {
            return Err(Error::config(key, "given more than once"));
        }
    }
    build(&values)
}

fn build(values: &HashMap<&'static str, &str>) -> Result<RunConfig> {
    let get = |k: &str| values.get(k).copied();

    let kind = get("scheme").map(str::parse).transpose()?.unwrap_or(SchemeKind::Sm);
    let n = get("n_links")
        .map(|v| parse_int::<usize>("n_links", v))
        .transpose()?
        .unwrap_or(match kind {
            SchemeKind::SisoCsk => 1,
            _ => 2,
        });
    let m = get("csk_order")
        .map(|v| parse_int::<usize>("csk_order", v))
        .transpose()?
        .unwrap_or(match kind {
            SchemeKind::Ssk => 1,
            SchemeKind::SisoCsk => 4,
            _ => 2,
        });
    let scheme = Scheme::new(kind, n, m)?;

    let length = |k: &str, default: f64| get(k).map(|v| parse_length(k, v)).transpose().map(|x| x.unwrap_or(default));
    let geometry = SystemGeometry::new(
        n,
        length("link_distance", DEFAULT_LINK_DISTANCE)?,
        length("separation", DEFAULT_SEPARATION)?,
        length("receiver_radius", DEFAULT_RECEIVER_RADIUS)?,
        get("diffusion_coeff")
            .map(|v| parse_diffusion("diffusion_coeff", v))
            .transpose()?
            .unwrap_or(DEFAULT_DIFFUSION),
    )?;
    let ts = get("symbol_duration")
        .map(|v| parse_duration("symbol_duration", v))
        .transpose()?
        .unwrap_or(DEFAULT_SYMBOL_DURATION);

    let mut config = RunConfig::new(scheme, geometry, ts);
    config.snr_db = get("snr_db").map(|v| parse_grid("snr_db", v)).transpose()?.unwrap_or_else(default_snr_grid);
    config.symbols = get("symbols").map(|v| parse_int("symbols", v)).transpose()?.unwrap_or(DEFAULT_SYMBOLS);
    config.replications = get("replications")
        .map(|v| parse_int("replications", v))
        .transpose()?
        .unwrap_or(DEFAULT_REPLICATIONS);
    config.seed = get("seed").map(|v| parse_int("seed", v)).transpose()?.unwrap_or(1);
    config.detector = match get("detector") {
        Some(v) => v.parse()?,
        None => default_detector(&scheme),
    };
    if let Some(v) = get("threshold_policy") {
        let policy: ThresholdPolicy = v.parse()?;
        if scheme.kind() != SchemeKind::MimoOok {
            return Err(Error::config("threshold_policy", "only applies to MIMO_OOK"));
        }
        config.detector = Detector::Threshold(policy);
    }
    if let Some(v) = get("levels") {
        config.level_profile = Some(parse_list("levels", v)?);
    }
    let noiseless = get("noiseless").map(|v| parse_bool("noiseless", v)).transpose()?.unwrap_or(false);
    config.impairments = Impairments {
        noise: !noiseless && get("noise").map(|v| parse_bool("noise", v)).transpose()?.unwrap_or(true),
        interference: !noiseless
            && get("interference")
                .map(|v| parse_bool("interference", v))
                .transpose()?
                .unwrap_or(true),
    };
    config.validate()?;
    // surface profile problems (zero level for SM, wrong length, ...) now
    config.alphabet(config.snr_db[0])?;
    Ok(config)
}

fn parse_int<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    let cleaned = v.replace('_', "");
    if let Ok(x) = cleaned.parse::<T>() {
        return Ok(x);
    }
    // allow 1e5-style counts
    match cleaned.parse::<f64>() {
        Ok(f) if f >= 0.0 && f.fract() == 0.0 && f < 1.8e19 => format!("{}", f as u64)
            .parse::<T>()
            .map_err(|_| Error::config(key, format!("`{v}` out of range"))),
        _ => Err(Error::config(key, format!("expected an integer, got `{v}`"))),
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    v.trim()
        .parse::<f64>()
        .map_err(|_| Error::config(key, format!("expected a number, got `{v}`")))
}

fn split_unit(v: &str) -> (&str, &str) {
    let v = v.trim();
    let idx = v
        .char_indices()
        .find(|&(i, c)| (c.is_alphabetic() && !(matches!(c, 'e' | 'E') && starts_exponent(v, i))) || c == 'µ')
        .map_or(v.len(), |(i, _)| i);
    (v[..idx].trim(), v[idx..].trim())
}

fn starts_exponent(v: &str, i: usize) -> bool {
    let next = v[i + 1..].chars().next();
    i > 0 && matches!(next, Some(c) if c.is_ascii_digit() || c == '-' || c == '+')
}

/// Length in metres; bare numbers are micrometres.
pub fn parse_length(key: &str, v: &str) -> Result<f64> {
    let (num, unit) = split_unit(v);
    let x = parse_f64(key, num)?;
    // divide by the exact power of ten so that `20` maps to exactly `20e-6`
    let per_metre = match unit {
        "" | "um" | "µm" | "micron" => 1e6,
        "nm" => 1e9,
        "mm" => 1e3,
        "m" => 1.0,
        other => return Err(Error::config(key, format!("unknown length unit `{other}`"))),
    };
    positive(key, x / per_metre)
}

/// Duration in seconds; bare numbers are seconds.
pub fn parse_duration(key: &str, v: &str) -> Result<f64> {
    let (num, unit) = split_unit(v);
    let x = parse_f64(key, num)?;
    let per_second = match unit {
        "" | "s" => 1.0,
        "ms" => 1e3,
        other => return Err(Error::config(key, format!("unknown time unit `{other}`"))),
    };
    positive(key, x / per_second)
}

fn parse_diffusion(key: &str, v: &str) -> Result<f64> {
    let (num, unit) = split_unit(v);
    match unit {
        "" | "m2/s" | "m^2/s" | "m²/s" => positive(key, parse_f64(key, num)?),
        other => Err(Error::config(key, format!("unknown unit `{other}`, expected m^2/s"))),
    }
}

fn positive(key: &str, x: f64) -> Result<f64> {
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(Error::config(key, format!("must be positive, got {x}")))
    }
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(Error::config(key, format!("expected true/false, got `{v}`"))),
    }
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',').map(|s| parse_f64(key, s)).collect()
}

/// `start:step:stop` (inclusive) or a comma-separated list.
pub fn parse_grid(key: &str, v: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = v.split(':').collect();
    match parts.as_slice() {
        [start, step, stop] => {
            let (start, step, stop) = (parse_f64(key, start)?, parse_f64(key, step)?, parse_f64(key, stop)?);
            if !(step > 0.0) || stop < start {
                return Err(Error::config(key, "range needs step > 0 and stop >= start"));
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            if count > 10_000 {
                return Err(Error::config(key, "range has too many points"));
            }
            Ok((0..count).map(|k| start + step * k as f64).collect())
        }
        [_] => parse_list(key, v),
        _ => Err(Error::config(key, format!("cannot parse grid `{v}`"))),
    }
}

/// Detector label as used in file names: SSK's first-stage-only detector
/// reads as `argmax`.
pub fn detector_label(config: &RunConfig) -> &'static str {
    match (config.scheme.kind(), config.detector) {
        (SchemeKind::Ssk, Detector::Successive(_)) => "argmax",
        (_, Detector::Successive(Combining::EqualGain)) => "egc",
        (_, d) => d.as_str(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_is_defaults() {
        let c = parse_config("").unwrap();
        assert_eq!(c.geometry.diffusion_coeff(), 2.2e-9);
        assert_eq!(c.geometry.link_distance(), 20e-6);
        assert_eq!(c.geometry.receiver_radius(), 0.1e-6);
        assert_eq!(c.snr_db, (0..=10).map(|k| 2.0 * k as f64).collect::<Vec<_>>());
        assert_eq!(c.scheme, Scheme::sm(2, 2).unwrap());
        assert_eq!(c.symbols, 100_000);
        assert_eq!(c.replications, 5);
    }

    #[test]
    fn units() {
        let c = parse_config("d = 20um\nr = 0.0125mm\nTs = 150ms\nD = 2.2e-9 m^2/s").unwrap();
        assert!((c.geometry.link_distance() - 2.0e-5).abs() < 1e-20);
        assert!((c.geometry.separation() - 12.5e-6).abs() < 1e-18);
        assert!((c.symbol_duration - 0.15).abs() < 1e-15);
        assert_eq!(parse_length("d", "2e-5m").unwrap(), 2e-5);
        assert_eq!(parse_length("d", "20").unwrap(), 20e-6);
        assert_eq!(parse_length("d", "20 µm").unwrap(), 20e-6);
        assert!(parse_length("d", "20ft").is_err());
        assert!(parse_length("d", "-20um").is_err());
    }

    #[test]
    fn rejections_name_the_key() {
        let key_of = |text: &str| match parse_config(text) {
            Err(Error::Config { key, .. }) => key,
            other => panic!("expected config error, got {other:?}"),
        };
        assert_eq!(key_of("M = 3"), "csk_order");
        assert_eq!(key_of("colour = red"), "colour");
        assert_eq!(key_of("r = 0um"), "separation");
        assert_eq!(key_of("scheme = SM\nlevels = 0,1"), "levels");
        assert_eq!(key_of("N = 2\nn_links = 4"), "n_links");
        assert_eq!(key_of("scheme = SSK\nN = 4\ndetector = nearest"), "detector");
    }

    #[test]
    fn grids_and_flags() {
        assert_eq!(parse_grid("snr_db", "0:5:20").unwrap(), vec![0.0, 5.0, 10.0, 15.0, 20.0]);
        assert_eq!(parse_grid("snr_db", "3, 7").unwrap(), vec![3.0, 7.0]);
        assert!(parse_grid("snr_db", "0:-1:4").is_err());
        let c = parse_config("scheme = MIMO_OOK\nnoiseless = true\nsymbols = 1e4").unwrap();
        assert_eq!(c.impairments, Impairments::NONE);
        assert_eq!(c.symbols, 10_000);
        assert_eq!(c.detector, Detector::Threshold(ThresholdPolicy::Midpoint));
        let c = parse_config("scheme = SISO_CSK").unwrap();
        assert_eq!(c.scheme, Scheme::siso_csk(4).unwrap());
    }
}
