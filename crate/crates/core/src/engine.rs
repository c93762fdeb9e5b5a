//! Monte-Carlo SER estimation over SNR sweeps.
//!
//! Work is split into `(snr point, replication)` tasks, each driven by its
//! own ChaCha8 substream. The 256-bit key is expanded with SplitMix64 from
//! the master seed and the bit pattern of the SNR value, and the ChaCha
//! stream id is the replication index. Results therefore depend only on the
//! configuration and the master seed, never on the rayon worker count or on
//! where a point sits in the grid.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::analysis::{sm_ser_bound, ssk_ser, AnalyticKind, SerEstimate};
use crate::channel::{snapshot, ChannelSnapshot, SystemGeometry};
use crate::detection::{
    detect_mimo_ook, detect_ml_joint, detect_siso_csk, detect_successive, Combining, Detector,
    ThresholdPolicy,
};
use crate::error::{Error, Result};
use crate::link::{sample_received_into, Impairments};
use crate::modulation::{calibrate_with_profile, default_profile, CskAlphabet, Scheme, SchemeKind, Symbol};

pub type SimRng = ChaCha8Rng;

/// Smallest accepted sequence length.
pub const MIN_SYMBOLS: u64 = 1_000;
/// Two-sided 95 % normal quantile.
pub const Z95: f64 = 1.96;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scheme: Scheme,
    pub geometry: SystemGeometry<f64>,
    /// Symbol duration in seconds.
    pub symbol_duration: f64,
    pub snr_db: Vec<f64>,
    /// Symbols per replication.
    pub symbols: u64,
    pub replications: u32,
    pub seed: u64,
    pub detector: Detector,
    /// Relative level shape; the scheme default when `None`.
    pub level_profile: Option<Vec<f64>>,
    pub impairments: Impairments,
}

/// Desk-scale defaults: 10⁵ symbols × 5 replications.
pub const DEFAULT_SYMBOLS: u64 = 100_000;
pub const DEFAULT_REPLICATIONS: u32 = 5;
/// Full-scale run: 10⁶ symbols × 20 replications.
pub const FULL_SCALE_SYMBOLS: u64 = 1_000_000;
pub const FULL_SCALE_REPLICATIONS: u32 = 20;

pub fn default_snr_grid() -> Vec<f64> {
    (0..=10).map(|k| 2.0 * k as f64).collect()
}

pub fn default_detector(scheme: &Scheme) -> Detector {
    match scheme.kind() {
        SchemeKind::Sm | SchemeKind::Ssk => Detector::Successive(Combining::EqualGain),
        SchemeKind::MimoOok => Detector::Threshold(ThresholdPolicy::Midpoint),
        SchemeKind::SisoCsk => Detector::NearestLevel,
    }
}

impl RunConfig {
    /// Config with desk-scale defaults and the scheme's default detector.
    pub fn new(scheme: Scheme, geometry: SystemGeometry<f64>, symbol_duration: f64) -> Self {
        Self {
            scheme,
            geometry,
            symbol_duration,
            snr_db: default_snr_grid(),
            symbols: DEFAULT_SYMBOLS,
            replications: DEFAULT_REPLICATIONS,
            seed: 1,
            detector: default_detector(&scheme),
            level_profile: None,
            impairments: Impairments::FULL,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.geometry.n_links() != self.scheme.n_links() {
            return Err(Error::config(
                "n_links",
                format!(
                    "geometry has {} links, scheme needs {}",
                    self.geometry.n_links(),
                    self.scheme.n_links()
                ),
            ));
        }
        if !(self.symbol_duration.is_finite() && self.symbol_duration > 0.0) {
            return Err(Error::config("symbol_duration", "must be finite and > 0"));
        }
        if self.snr_db.is_empty() {
            return Err(Error::config("snr_db", "grid is empty"));
        }
        if self.snr_db.iter().any(|s| !s.is_finite()) {
            return Err(Error::config("snr_db", "grid contains a non-finite value"));
        }
        if self.symbols < MIN_SYMBOLS {
            return Err(Error::config(
                "symbols",
                format!("need at least {MIN_SYMBOLS} symbols per replication, got {}", self.symbols),
            ));
        }
        if self.replications == 0 {
            return Err(Error::config("replications", "need at least one replication"));
        }
        let ok = matches!(
            (self.scheme.kind(), self.detector),
            (SchemeKind::Sm | SchemeKind::Ssk, Detector::JointMl | Detector::Successive(_))
                | (SchemeKind::MimoOok, Detector::Threshold(_))
                | (SchemeKind::SisoCsk, Detector::NearestLevel)
        );
        if !ok {
            return Err(Error::config(
                "detector",
                format!("`{}` does not apply to {}", self.detector, self.scheme.kind()),
            ));
        }
        Ok(())
    }

    pub fn alphabet(&self, snr_db: f64) -> Result<CskAlphabet<f64>> {
        let profile = self
            .level_profile
            .clone()
            .unwrap_or_else(|| default_profile(&self.scheme));
        calibrate_with_profile(&self.scheme, &self.geometry, snr_db, &profile)
    }

    pub fn snapshot(&self) -> Result<ChannelSnapshot<f64>> {
        snapshot(&self.geometry, self.symbol_duration)
    }

    pub fn total_symbols(&self) -> u64 {
        self.symbols * self.replications as u64
    }
}

/// One point of an SER curve.
#[derive(Debug, Clone, PartialEq)]
pub struct SerPoint {
    pub snr_db: f64,
    /// Pooled simulated SER.
    pub ser_sim: f64,
    /// Half-width of the normal-approximation 95 % interval.
    pub ci95: f64,
    pub ser_analytic: Option<f64>,
    pub analytic_kind: Option<AnalyticKind>,
    pub errors: u64,
    /// Total symbols over all replications.
    pub symbols: u64,
}

impl SerPoint {
    /// Binomial standard error of `ser_sim`.
    pub fn std_error(&self) -> f64 {
        binomial_std_error(self.ser_sim, self.symbols)
    }
}

pub fn binomial_std_error(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SerCurve {
    pub config: RunConfig,
    pub points: Vec<SerPoint>,
}

/// A source of symbol errors that the engine can replicate.
pub trait ErrorProcess: Sync {
    /// Runs one sequence of `symbols` symbols and returns the error count.
    fn run_sequence(&self, rng: &mut SimRng, symbols: u64) -> Result<u64>;
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Random stream for one `(master seed, point key, replication)` task.
pub fn substream(master_seed: u64, point_key: u64, replication: u64) -> SimRng {
    let mut state = master_seed;
    let mixed = splitmix64(&mut state) ^ point_key;
    let mut state = mixed;
    let mut seed = [0u8; 32];
    for chunk in seed.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    let mut rng = SimRng::from_seed(seed);
    rng.set_stream(replication);
    rng
}

fn point_key(snr_db: f64) -> u64 {
    // +0.0 and -0.0 share a stream
    (snr_db + 0.0).to_bits()
}

/// Runs `replications` sequences of `process` and pools the errors.
pub fn estimate<P: ErrorProcess>(
    process: &P,
    symbols: u64,
    replications: u32,
    master_seed: u64,
    point_key: u64,
) -> Result<(u64, u64)> {
    let errors = (0..replications as u64)
        .into_par_iter()
        .map(|rep| process.run_sequence(&mut substream(master_seed, point_key, rep), symbols))
        .collect::<Result<Vec<u64>>>()?;
    Ok((errors.iter().sum(), symbols * replications as u64))
}

/// The physical link: random symbols, received samples, detector.
pub struct LinkSimulation {
    scheme: Scheme,
    geometry: SystemGeometry<f64>,
    snapshot: ChannelSnapshot<f64>,
    alphabet: CskAlphabet<f64>,
    detector: Detector,
    impairments: Impairments,
}

impl LinkSimulation {
    pub fn new(config: &RunConfig, snr_db: f64) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            scheme: config.scheme,
            geometry: config.geometry,
            snapshot: config.snapshot()?,
            alphabet: config.alphabet(snr_db)?,
            detector: config.detector,
            impairments: config.impairments,
        })
    }

    pub fn alphabet(&self) -> &CskAlphabet<f64> {
        &self.alphabet
    }

    pub fn snapshot(&self) -> &ChannelSnapshot<f64> {
        &self.snapshot
    }

    /// Decision from the current interval's samples only.
    pub fn decide(&self, y: &[f64]) -> Symbol {
        let (snap, alphabet) = (&self.snapshot, &self.alphabet);
        match self.detector {
            Detector::JointMl => detect_ml_joint(y, snap, alphabet),
            Detector::Successive(c) => detect_successive(y, snap, alphabet, c),
            Detector::Threshold(p) => detect_mimo_ook(y, snap, alphabet, p),
            Detector::NearestLevel => Symbol::indexed(0, detect_siso_csk(y[0], snap, alphabet)),
        }
    }

    /// Closed-form overlay where one exists for this scheme and detector.
    pub fn analytic(&self) -> Result<Option<SerEstimate<f64>>> {
        let (snap, geom, alphabet) = (&self.snapshot, &self.geometry, &self.alphabet);
        Ok(match (self.scheme.kind(), self.detector) {
            (SchemeKind::Ssk, Detector::Successive(_)) => Some(ssk_ser(snap, geom, alphabet)?),
            (SchemeKind::Sm, Detector::Successive(Combining::EqualGain)) => {
                Some(sm_ser_bound(snap, geom, alphabet)?)
            }
            _ => None,
        })
    }
}

impl ErrorProcess for LinkSimulation {
    fn run_sequence(&self, rng: &mut SimRng, symbols: u64) -> Result<u64> {
        let mut y = vec![0.0; self.snapshot.n_links()];
        let mut previous: Option<Symbol> = None;
        let mut errors = 0;
        for _ in 0..symbols {
            let current = self.scheme.draw_symbol(rng);
            sample_received_into(
                &self.scheme,
                &self.snapshot,
                &self.geometry,
                &self.alphabet,
                &current,
                previous.as_ref(),
                self.impairments,
                rng,
                &mut y,
            )?;
            if self.decide(&y) != current {
                errors += 1;
            }
            previous = Some(current);
        }
        Ok(errors)
    }
}

fn make_point(snr_db: f64, errors: u64, total: u64, analytic: Option<SerEstimate<f64>>) -> SerPoint {
    let ser = errors as f64 / total as f64;
    SerPoint {
        snr_db,
        ser_sim: ser,
        ci95: Z95 * binomial_std_error(ser, total),
        ser_analytic: analytic.map(|a| a.value),
        analytic_kind: analytic.map(|a| a.kind),
        errors,
        symbols: total,
    }
}

/// Simulates one SNR point.
pub fn run_point(config: &RunConfig, snr_db: f64) -> Result<SerPoint> {
    let sim = LinkSimulation::new(config, snr_db)?;
    let (errors, total) = estimate(&sim, config.symbols, config.replications, config.seed, point_key(snr_db))?;
    Ok(make_point(snr_db, errors, total, sim.analytic()?))
}

/// Simulates every point of the grid, parallel over points and replications.
pub fn run_sweep(config: &RunConfig) -> Result<SerCurve> {
    config.validate()?;
    let sims = config
        .snr_db
        .iter()
        .map(|&snr| LinkSimulation::new(config, snr))
        .collect::<Result<Vec<_>>>()?;
    let reps = config.replications as u64;
    let tasks: Vec<(usize, u64)> = (0..sims.len())
        .flat_map(|p| (0..reps).map(move |r| (p, r)))
        .collect();
    let counts = tasks
        .par_iter()
        .map(|&(p, rep)| {
            let mut rng = substream(config.seed, point_key(config.snr_db[p]), rep);
            sims[p].run_sequence(&mut rng, config.symbols)
        })
        .collect::<Result<Vec<u64>>>()?;
    let points = sims
        .iter()
        .zip(config.snr_db.iter())
        .enumerate()
        .map(|(p, (sim, &snr))| {
            let errors = counts[p * reps as usize..(p + 1) * reps as usize].iter().sum();
            Ok(make_point(snr, errors, config.total_symbols(), sim.analytic()?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SerCurve {
        config: config.clone(),
        points,
    })
}

/// Closed-form values only, without simulation.
pub fn analytic_sweep(config: &RunConfig) -> Result<Vec<(f64, SerEstimate<f64>)>> {
    config.validate()?;
    config
        .snr_db
        .iter()
        .map(|&snr| {
            let sim = LinkSimulation::new(config, snr)?;
            sim.analytic()?.map(|a| (snr, a)).ok_or_else(|| {
                Error::config(
                    "scheme",
                    format!(
                        "no closed form for {} with detector `{}`",
                        config.scheme.kind(),
                        config.detector
                    ),
                )
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn config(scheme: Scheme, r_um: f64, ts: f64) -> RunConfig {
        let g = SystemGeometry::new(scheme.n_links(), 20e-6, r_um * 1e-6, 0.1e-6, 2.2e-9).unwrap();
        let mut c = RunConfig::new(scheme, g, ts);
        c.symbols = 2_000;
        c.replications = 2;
        c
    }

    #[test]
    fn substreams_are_distinct_and_reproducible() {
        let a: u64 = substream(1, 2, 3).random();
        assert_eq!(a, substream(1, 2, 3).random::<u64>());
        assert_ne!(a, substream(1, 2, 4).random::<u64>());
        assert_ne!(a, substream(1, 5, 3).random::<u64>());
        assert_ne!(a, substream(7, 2, 3).random::<u64>());
    }

    #[test]
    fn validation() {
        let mut c = config(Scheme::sm(2, 2).unwrap(), 10.0, 0.2);
        assert!(c.validate().is_ok());
        c.symbols = 10;
        assert!(matches!(c.validate(), Err(Error::Config { ref key, .. }) if key == "symbols"));
        let mut c = config(Scheme::sm(2, 2).unwrap(), 10.0, 0.2);
        c.detector = Detector::NearestLevel;
        assert!(c.validate().is_err());
        c.detector = Detector::JointMl;
        c.snr_db.clear();
        assert!(c.validate().is_err());
    }

    #[test]
    fn singleton_sweep_equals_point() {
        let mut c = config(Scheme::ssk(2).unwrap(), 12.5, 0.8);
        c.snr_db = vec![4.0];
        let curve = run_sweep(&c).unwrap();
        assert_eq!(curve.points, vec![run_point(&c, 4.0).unwrap()]);
    }

    #[test]
    fn overlay_kinds() {
        let c = config(Scheme::ssk(4).unwrap(), 12.5, 0.8);
        assert_eq!(run_point(&c, 10.0).unwrap().analytic_kind, Some(AnalyticKind::Exact));
        let c = config(Scheme::sm(2, 2).unwrap(), 12.5, 0.8);
        assert_eq!(run_point(&c, 10.0).unwrap().analytic_kind, Some(AnalyticKind::UpperBound));
        let c = config(Scheme::mimo_ook(2).unwrap(), 12.5, 0.8);
        assert_eq!(run_point(&c, 10.0).unwrap().ser_analytic, None);
        assert!(analytic_sweep(&c).is_err());
    }
}
