//! Transmission schemes, their level alphabets, bit mapping and the SNR
//! conventions used to calibrate molecule counts.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::channel::{SystemGeometry, MAX_LINKS};
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    /// Spatial modulation: one active transmitter, CSK level on top.
    Sm,
    /// Space shift keying: one active transmitter, single pulse size.
    Ssk,
    /// Every link carries its own on-off keyed bit.
    MimoOok,
    /// Single link with M-ary concentration shift keying.
    SisoCsk,
}

impl SchemeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SchemeKind::Sm => "SM",
            SchemeKind::Ssk => "SSK",
            SchemeKind::MimoOok => "MIMO_OOK",
            SchemeKind::SisoCsk => "SISO_CSK",
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().replace('-', "_").as_str() {
            "SM" => Ok(SchemeKind::Sm),
            "SSK" => Ok(SchemeKind::Ssk),
            "MIMO_OOK" | "MIMO" => Ok(SchemeKind::MimoOok),
            "SISO_CSK" | "SISO" => Ok(SchemeKind::SisoCsk),
            other => Err(Error::config(
                "scheme",
                format!("unknown scheme `{other}` (expected SM, SSK, MIMO_OOK or SISO_CSK)"),
            )),
        }
    }
}

/// A scheme together with its array size `N` and CSK order `M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Scheme {
    kind: SchemeKind,
    n_links: usize,
    csk_order: usize,
}

impl Scheme {
    /// Validates the `(kind, N, M)` combination.
    ///
    /// SSK forces `M = 1`, MIMO-OOK forces `M = 2` and SISO forces `N = 1`.
    /// Wherever indices carry bits, `N` and `M` must be powers of two.
    pub fn new(kind: SchemeKind, n_links: usize, csk_order: usize) -> Result<Self> {
        if n_links == 0 || n_links > MAX_LINKS {
            return Err(Error::config(
                "n_links",
                format!("must be in 1..={MAX_LINKS}, got {n_links}"),
            ));
        }
        let pow2 = |key: &str, v: usize| -> Result<()> {
            if v.is_power_of_two() {
                Ok(())
            } else {
                Err(Error::config(key, format!("must be a power of 2 for {kind}, got {v}")))
            }
        };
        match kind {
            SchemeKind::Sm => {
                pow2("n_links", n_links)?;
                pow2("csk_order", csk_order)?;
                if csk_order < 2 {
                    return Err(Error::config("csk_order", "SM needs M >= 2 (M = 1 is SSK)"));
                }
            }
            SchemeKind::Ssk => {
                pow2("n_links", n_links)?;
                if csk_order != 1 {
                    return Err(Error::config("csk_order", "SSK has M = 1"));
                }
            }
            SchemeKind::MimoOok => {
                if csk_order != 2 {
                    return Err(Error::config("csk_order", "MIMO-OOK is binary per link (M = 2)"));
                }
            }
            SchemeKind::SisoCsk => {
                if n_links != 1 {
                    return Err(Error::config("n_links", "SISO has N = 1"));
                }
                pow2("csk_order", csk_order)?;
                if csk_order < 2 {
                    return Err(Error::config("csk_order", "SISO CSK needs M >= 2"));
                }
            }
        }
        Ok(Self {
            kind,
            n_links,
            csk_order,
        })
    }

    pub fn sm(n_links: usize, csk_order: usize) -> Result<Self> {
        Self::new(SchemeKind::Sm, n_links, csk_order)
    }
    pub fn ssk(n_links: usize) -> Result<Self> {
        Self::new(SchemeKind::Ssk, n_links, 1)
    }
    pub fn mimo_ook(n_links: usize) -> Result<Self> {
        Self::new(SchemeKind::MimoOok, n_links, 2)
    }
    pub fn siso_csk(csk_order: usize) -> Result<Self> {
        Self::new(SchemeKind::SisoCsk, 1, csk_order)
    }

    pub fn kind(&self) -> SchemeKind {
        self.kind
    }
    pub fn n_links(&self) -> usize {
        self.n_links
    }
    pub fn csk_order(&self) -> usize {
        self.csk_order
    }

    /// True for the single-active-transmitter schemes (SM, SSK).
    pub fn is_spatial(&self) -> bool {
        matches!(self.kind, SchemeKind::Sm | SchemeKind::Ssk)
    }

    fn space_bits(&self) -> usize {
        self.n_links.trailing_zeros() as usize
    }

    fn level_bits(&self) -> usize {
        self.csk_order.trailing_zeros() as usize
    }

    pub fn bits_per_symbol(&self) -> usize {
        match self.kind {
            SchemeKind::Sm => self.space_bits() + self.level_bits(),
            SchemeKind::Ssk => self.space_bits(),
            SchemeKind::MimoOok => self.n_links,
            SchemeKind::SisoCsk => self.level_bits(),
        }
    }

    /// Draws a symbol uniformly from the scheme's symbol set.
    pub fn draw_symbol<R: Rng + ?Sized>(&self, rng: &mut R) -> Symbol {
        match self.kind {
            SchemeKind::Sm | SchemeKind::Ssk => Symbol::Indexed {
                space: rng.random_range(0..self.n_links),
                level: rng.random_range(0..self.csk_order),
            },
            SchemeKind::SisoCsk => Symbol::Indexed {
                space: 0,
                level: rng.random_range(0..self.csk_order),
            },
            SchemeKind::MimoOok => Symbol::OnOff(rng.random::<u64>() & ook_mask(self.n_links)),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} N={} M={}", self.kind, self.n_links, self.csk_order)
    }
}

fn ook_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// One symbol interval's worth of transmitted information.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Symbol {
    /// Active transmitter `space` emitting level `level` (SM, SSK, SISO).
    Indexed { space: usize, level: usize },
    /// MIMO-OOK: bit `i` set means transmitter `i` emits `S_1`.
    OnOff(u64),
}

impl Symbol {
    pub fn indexed(space: usize, level: usize) -> Self {
        Symbol::Indexed { space, level }
    }

    /// Emission of transmitter `tx` as a level index, `None` when silent.
    #[inline]
    pub fn level_at(&self, tx: usize) -> Option<usize> {
        match *self {
            Symbol::Indexed { space, level } => (space == tx).then_some(level),
            Symbol::OnOff(bits) => ((bits >> tx) & 1 == 1).then_some(1),
        }
    }
}

/// Emission levels `S_0 < S_1 < … < S_{M-1}` in molecules per pulse.
#[derive(Debug, Clone, PartialEq)]
pub struct CskAlphabet<T> {
    levels: Vec<T>,
}

impl<T: Real> CskAlphabet<T> {
    /// Accepts any strictly increasing, finite, non-negative level list.
    pub fn new(levels: Vec<T>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::config("levels", "alphabet is empty"));
        }
        if levels.iter().any(|s| !s.is_finite() || *s < T::zero()) {
            return Err(Error::config("levels", "levels must be finite and non-negative"));
        }
        if levels.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::config("levels", "levels must be strictly increasing"));
        }
        Ok(Self { levels })
    }

    /// Like [`CskAlphabet::new`], plus the scheme's own constraints.
    pub fn for_scheme(scheme: &Scheme, levels: Vec<T>) -> Result<Self> {
        let alphabet = Self::new(levels)?;
        alphabet.check_scheme(scheme)?;
        Ok(alphabet)
    }

    fn check_scheme(&self, scheme: &Scheme) -> Result<()> {
        if self.levels.len() != scheme.csk_order {
            return Err(Error::config(
                "levels",
                format!(
                    "{} levels given, scheme needs M = {}",
                    self.levels.len(),
                    scheme.csk_order
                ),
            ));
        }
        match scheme.kind {
            SchemeKind::Sm | SchemeKind::Ssk if self.levels[0] <= T::zero() => Err(Error::config(
                "levels",
                "spatial schemes need every level > 0, otherwise the active transmitter is undetectable",
            )),
            SchemeKind::MimoOok if self.levels[0] != T::zero() => {
                Err(Error::config("levels", "OOK needs S_0 = 0"))
            }
            _ => Ok(()),
        }
    }

    pub fn levels(&self) -> &[T] {
        &self.levels
    }

    #[inline]
    pub fn level(&self, m: usize) -> T {
        self.levels[m]
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    fn mean(&self) -> T {
        self.levels.iter().copied().sum::<T>() / T::lit(self.levels.len() as f64)
    }
}

/// Relative level shapes used when none is configured:
/// SM `S_m = (m+1)·S_0` (so BCSK has `S_1 = 2·S_0`), SSK a single level,
/// MIMO-OOK `{0, S_1}`, SISO `S_m = m·S_1` (QCSK: `0, S_1, 2S_1, 3S_1`).
pub fn default_profile<T: Real>(scheme: &Scheme) -> Vec<T> {
    let m = scheme.csk_order;
    match scheme.kind {
        SchemeKind::Sm => (1..=m).map(|k| T::lit(k as f64)).collect(),
        SchemeKind::Ssk => vec![T::one()],
        SchemeKind::MimoOok => vec![T::zero(), T::one()],
        SchemeKind::SisoCsk => (0..m).map(|k| T::lit(k as f64)).collect(),
    }
}

/// `(3/(2πe))^{3/2}·V_RX/d³`, i.e. the paired peak CIR times the receiver
/// volume: expected molecules sensed per molecule emitted.
fn paired_gain<T: Real>(geom: &SystemGeometry<T>) -> T {
    let c = (T::lit(3.0) / (T::lit(2.0) * T::PI() * T::E())).powf(T::lit(1.5));
    c * geom.receiver_volume() / geom.link_distance().powi(3)
}

/// Linear SNR of an alphabet under the scheme's convention.
///
/// Single-active-transmitter schemes and SISO use the average received
/// power of the desired link per pulse. MIMO-OOK uses the per-link form in
/// which only half of the transmitters emit on average.
pub fn snr_linear<T: Real>(scheme: &Scheme, geom: &SystemGeometry<T>, alphabet: &CskAlphabet<T>) -> T {
    let g = paired_gain(geom);
    match scheme.kind {
        SchemeKind::Sm | SchemeKind::Ssk | SchemeKind::SisoCsk => g * alphabet.mean(),
        SchemeKind::MimoOok => {
            g * T::lit(2.0) / T::lit(scheme.n_links as f64) * alphabet.level(alphabet.len() - 1)
        }
    }
}

/// Per-link SNR of an `N×N` MIMO system where every link sends M-ary CSK
/// with all levels positive: `1/N` of the single-transmitter value.
pub fn mimo_csk_snr_linear<T: Real>(geom: &SystemGeometry<T>, alphabet: &CskAlphabet<T>) -> T {
    paired_gain(geom) * alphabet.mean() / T::lit(geom.n_links() as f64)
}

pub fn db_to_linear<T: Real>(db: T) -> T {
    T::lit(10.0).powf(db / T::lit(10.0))
}

pub fn linear_to_db<T: Real>(x: T) -> T {
    T::lit(10.0) * x.log10()
}

/// Scales the scheme's default level profile to hit `snr_db`.
pub fn calibrate_alphabet<T: Real>(
    scheme: &Scheme,
    geom: &SystemGeometry<T>,
    snr_db: T,
) -> Result<CskAlphabet<T>> {
    calibrate_with_profile(scheme, geom, snr_db, &default_profile(scheme))
}

/// Scales a relative level profile so that the scheme's SNR equals `snr_db`.
/// Levels stay real-valued.
pub fn calibrate_with_profile<T: Real>(
    scheme: &Scheme,
    geom: &SystemGeometry<T>,
    snr_db: T,
    profile: &[T],
) -> Result<CskAlphabet<T>> {
    if !snr_db.is_finite() {
        return Err(Error::config("snr_db", format!("must be finite, got {snr_db}")));
    }
    if geom.n_links() != scheme.n_links {
        return Err(Error::config(
            "n_links",
            format!("geometry has {} links, scheme {}", geom.n_links(), scheme.n_links),
        ));
    }
    let shape = CskAlphabet::for_scheme(scheme, profile.to_vec())?;
    let unit = snr_linear(scheme, geom, &shape);
    if !(unit > T::zero()) {
        return Err(Error::config("levels", "profile carries no signal energy"));
    }
    let k = db_to_linear(snr_db) / unit;
    CskAlphabet::for_scheme(scheme, shape.levels.iter().map(|&s| s * k).collect())
}

/// Maps a bit string (most significant bit first) to a symbol. For spatial
/// schemes the leading `log2 N` bits pick the transmitter and the rest the
/// level; MIMO-OOK maps bit `i` to transmitter `i`.
pub fn encode(scheme: &Scheme, bits: &[bool]) -> Result<Symbol> {
    let expected = scheme.bits_per_symbol();
    if bits.len() != expected {
        return Err(Error::arg(format!(
            "{scheme} takes {expected} bits per symbol, got {}",
            bits.len()
        )));
    }
    let to_index = |bs: &[bool]| bs.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
    Ok(match scheme.kind {
        SchemeKind::Sm | SchemeKind::Ssk => {
            let (space, level) = bits.split_at(scheme.space_bits());
            Symbol::indexed(to_index(space), to_index(level))
        }
        SchemeKind::SisoCsk => Symbol::indexed(0, to_index(bits)),
        SchemeKind::MimoOok => Symbol::OnOff(
            bits.iter()
                .enumerate()
                .fold(0u64, |acc, (i, &b)| acc | ((b as u64) << i)),
        ),
    })
}

/// Inverse of [`encode`].
pub fn decode(scheme: &Scheme, symbol: &Symbol) -> Result<Vec<bool>> {
    let from_index = |v: usize, width: usize| (0..width).rev().map(move |k| (v >> k) & 1 == 1);
    match (scheme.kind, *symbol) {
        (SchemeKind::Sm | SchemeKind::Ssk | SchemeKind::SisoCsk, Symbol::Indexed { space, level }) => {
            if space >= scheme.n_links || level >= scheme.csk_order {
                return Err(Error::arg(format!("symbol {symbol:?} out of range for {scheme}")));
            }
            let space_bits = if scheme.kind == SchemeKind::SisoCsk { 0 } else { scheme.space_bits() };
            Ok(from_index(space, space_bits)
                .chain(from_index(level, scheme.level_bits()))
                .collect())
        }
        (SchemeKind::MimoOok, Symbol::OnOff(bits)) => {
            if bits & !ook_mask(scheme.n_links) != 0 {
                return Err(Error::arg("OOK symbol has bits beyond N"));
            }
            Ok((0..scheme.n_links).map(|i| (bits >> i) & 1 == 1).collect())
        }
        _ => Err(Error::arg(format!("symbol {symbol:?} does not belong to {scheme}"))),
    }
}

/// Molecules released by each transmitter (length 1 for SISO).
pub fn emission_vector<T: Real>(scheme: &Scheme, symbol: &Symbol, alphabet: &CskAlphabet<T>) -> Vec<T> {
    (0..scheme.n_links)
        .map(|tx| symbol.level_at(tx).map_or(T::zero(), |m| alphabet.level(m)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geom(n: usize) -> SystemGeometry<f64> {
        SystemGeometry::new(n, 20e-6, 12.5e-6, 0.1e-6, 2.2e-9).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn rates() {
        assert_eq!(Scheme::sm(4, 2).unwrap().bits_per_symbol(), 3);
        assert_eq!(Scheme::sm(2, 2).unwrap().bits_per_symbol(), 2);
        assert_eq!(Scheme::sm(2, 4).unwrap().bits_per_symbol(), 3);
        assert_eq!(Scheme::ssk(16).unwrap().bits_per_symbol(), 4);
        assert_eq!(Scheme::ssk(8).unwrap().bits_per_symbol(), 3);
        assert_eq!(Scheme::ssk(4).unwrap().bits_per_symbol(), 2);
        assert_eq!(Scheme::siso_csk(4).unwrap().bits_per_symbol(), 2);
        assert_eq!(Scheme::mimo_ook(2).unwrap().bits_per_symbol(), 2);
    }

    #[test]
    fn scheme_validation() {
        assert!(Scheme::sm(4, 3).is_err());
        assert!(Scheme::sm(3, 2).is_err());
        assert!(Scheme::sm(2, 1).is_err());
        assert!(Scheme::new(SchemeKind::Ssk, 4, 2).is_err());
        assert!(Scheme::new(SchemeKind::SisoCsk, 2, 4).is_err());
        assert!(Scheme::mimo_ook(3).is_ok());
        assert!("qam".parse::<SchemeKind>().is_err());
        assert_eq!("mimo-ook".parse::<SchemeKind>().unwrap(), SchemeKind::MimoOok);
    }

    #[test]
    fn encode_examples() {
        let sm = Scheme::sm(4, 2).unwrap();
        assert_eq!(encode(&sm, &[false, false, false]).unwrap(), Symbol::indexed(0, 0));
        assert_eq!(encode(&sm, &[true, false, true]).unwrap(), Symbol::indexed(2, 1));
        assert!(encode(&sm, &[true, false]).is_err());
        let ook = Scheme::mimo_ook(4).unwrap();
        assert_eq!(encode(&ook, &[true, false, true, false]).unwrap(), Symbol::OnOff(0b0101));
    }

    #[test]
    fn emission_examples() {
        let sm = Scheme::sm(4, 2).unwrap();
        let a = CskAlphabet::for_scheme(&sm, vec![1.0, 2.0]).unwrap();
        assert_eq!(emission_vector(&sm, &Symbol::indexed(1, 1), &a), vec![0.0, 2.0, 0.0, 0.0]);
        let ook = Scheme::mimo_ook(4).unwrap();
        let b = CskAlphabet::for_scheme(&ook, vec![0.0, 5.0]).unwrap();
        let sym = encode(&ook, &[true, false, true, false]).unwrap();
        assert_eq!(emission_vector(&ook, &sym, &b), vec![5.0, 0.0, 5.0, 0.0]);
        let ssk = Scheme::ssk(4).unwrap();
        let c = CskAlphabet::for_scheme(&ssk, vec![7.0]).unwrap();
        assert_eq!(emission_vector(&ssk, &Symbol::indexed(0, 0), &c), vec![7.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn calibration_examples() {
        // paired gain h(t_p)·V_RX = 3.8545e-8 at d = 20 µm, ρ = 0.1 µm
        assert!(rel(paired_gain(&geom(2)), 3.8545e-8) < 1e-4);

        let ssk = Scheme::ssk(2).unwrap();
        let a = calibrate_alphabet(&ssk, &geom(2), 10.0).unwrap();
        assert!(rel(a.level(0), 2.594e8) < 1e-3);

        let sm = Scheme::sm(2, 2).unwrap();
        let a = calibrate_alphabet(&sm, &geom(2), 10.0).unwrap();
        assert!(rel(a.level(0), 1.7296e8) < 1e-3);
        assert!(rel(a.level(1), 3.459e8) < 1e-3);
        assert!(rel(a.level(1), 2.0 * a.level(0)) < 1e-15);

        let siso = Scheme::siso_csk(4).unwrap();
        let a = calibrate_alphabet(&siso, &geom(1), 10.0).unwrap();
        assert_eq!(a.level(0), 0.0);
        assert!(rel(a.level(1), 1.7296e8) < 1e-3);
        assert!(rel(a.level(2), 3.459e8) < 1e-3);
        assert!(rel(a.level(3), 5.189e8) < 1e-3);
    }

    #[test]
    fn ook_calibration_uses_half_activity() {
        let ook = Scheme::mimo_ook(2).unwrap();
        let a = calibrate_alphabet(&ook, &geom(2), 10.0).unwrap();
        // 2·V/(N d³) with N = 2 gives the same S_1 as the SSK single level
        assert!(rel(a.level(1), 2.594e8) < 1e-3);
        assert_eq!(a.level(0), 0.0);
    }

    #[test]
    fn mimo_csk_snr_is_one_nth() {
        let g = geom(4);
        let a = CskAlphabet::new(vec![1e8, 2e8]).unwrap();
        let sm = Scheme::sm(4, 2).unwrap();
        assert!(rel(4.0 * mimo_csk_snr_linear(&g, &a), snr_linear(&sm, &g, &a)) < 1e-14);
    }

    #[test]
    fn unsatisfiable_profiles() {
        let sm = Scheme::sm(2, 2).unwrap();
        assert!(calibrate_with_profile(&sm, &geom(2), 10.0, &[0.0, 1.0]).is_err());
        assert!(calibrate_with_profile(&sm, &geom(2), f64::NAN, &[1.0, 2.0]).is_err());
        let ook = Scheme::mimo_ook(2).unwrap();
        assert!(calibrate_with_profile(&ook, &geom(2), 10.0, &[0.5, 1.0]).is_err());
        assert!(calibrate_alphabet(&sm, &geom(4), 10.0).is_err());
    }

    #[test]
    fn decode_rejects_foreign_symbols() {
        let sm = Scheme::sm(2, 2).unwrap();
        assert!(decode(&sm, &Symbol::OnOff(1)).is_err());
        assert!(decode(&sm, &Symbol::indexed(2, 0)).is_err());
    }
}
