//! Received-signal model for one symbol interval.
//!
//! Receiver `i` senses the desired contribution of the current symbol, the
//! interference (inter-link interference of the current interval for
//! MIMO-OOK, plus residual from the previous emission of transmitter `i`),
//! and signal-dependent Gaussian noise whose variance is the mean divided by
//! the receiver volume.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::channel::{ChannelSnapshot, SystemGeometry};
use crate::error::{Error, Result};
use crate::modulation::{CskAlphabet, Scheme, SchemeKind, Symbol};
use crate::scalar::Real;

/// Switches for diagnostic runs. Both on is the physical model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Impairments {
    pub noise: bool,
    pub interference: bool,
}

impl Impairments {
    pub const FULL: Self = Self {
        noise: true,
        interference: true,
    };
    pub const NONE: Self = Self {
        noise: false,
        interference: false,
    };
}

impl Default for Impairments {
    fn default() -> Self {
        Self::FULL
    }
}

/// Sensed concentrations, one per receiver. Entries may be negative.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceivedVector<T> {
    pub y: Vec<T>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseStats<T> {
    pub mean: T,
    pub variance: T,
}

#[inline]
fn emitted<T: Real>(symbol: &Symbol, alphabet: &CskAlphabet<T>, tx: usize) -> T {
    symbol.level_at(tx).map_or(T::zero(), |m| alphabet.level(m))
}

/// Expected contribution of the current symbol that is not interference.
#[inline]
pub fn desired<T: Real>(
    scheme: &Scheme,
    snap: &ChannelSnapshot<T>,
    alphabet: &CskAlphabet<T>,
    current: &Symbol,
    i: usize,
) -> T {
    match (scheme.kind(), *current) {
        (SchemeKind::MimoOok, _) => snap.h(i, i) * emitted(current, alphabet, i),
        (_, Symbol::Indexed { space, level }) => alphabet.level(level) * snap.h(i, space),
        (_, Symbol::OnOff(_)) => T::zero(),
    }
}

/// Interference at receiver `i`.
///
/// Spatial schemes and SISO only see the residual of the previous pulse of
/// transmitter `i`. MIMO-OOK additionally sees the current emissions of
/// every other transmitter. Without a previous symbol the residual is zero.
pub fn interference<T: Real>(
    scheme: &Scheme,
    snap: &ChannelSnapshot<T>,
    alphabet: &CskAlphabet<T>,
    current: &Symbol,
    previous: Option<&Symbol>,
    i: usize,
) -> T {
    let isi = previous.map_or(T::zero(), |p| emitted(p, alphabet, i) * snap.h_prev_self());
    match scheme.kind() {
        SchemeKind::MimoOok => {
            let ili: T = (0..snap.n_links())
                .filter(|&j| j != i)
                .map(|j| snap.h(i, j) * emitted(current, alphabet, j))
                .sum();
            ili + isi
        }
        _ => isi,
    }
}

/// Mean and variance of the sensed concentration at receiver `i`.
pub fn receiver_stats<T: Real>(
    scheme: &Scheme,
    snap: &ChannelSnapshot<T>,
    geom: &SystemGeometry<T>,
    alphabet: &CskAlphabet<T>,
    current: &Symbol,
    previous: Option<&Symbol>,
    impairments: Impairments,
    i: usize,
) -> NoiseStats<T> {
    let mut mean = desired(scheme, snap, alphabet, current, i);
    if impairments.interference {
        mean += interference(scheme, snap, alphabet, current, previous, i);
    }
    let variance = if impairments.noise {
        mean / geom.receiver_volume()
    } else {
        T::zero()
    };
    NoiseStats { mean, variance }
}

/// Draws the received vector into `out` (length N).
#[allow(clippy::too_many_arguments)]
pub fn sample_received_into<T: Real, R: Rng + ?Sized>(
    scheme: &Scheme,
    snap: &ChannelSnapshot<T>,
    geom: &SystemGeometry<T>,
    alphabet: &CskAlphabet<T>,
    current: &Symbol,
    previous: Option<&Symbol>,
    impairments: Impairments,
    rng: &mut R,
    out: &mut [T],
) -> Result<()> {
    debug_assert_eq!(out.len(), snap.n_links());
    for (i, y) in out.iter_mut().enumerate() {
        let NoiseStats { mean, variance } =
            receiver_stats(scheme, snap, geom, alphabet, current, previous, impairments, i);
        if variance < T::zero() {
            return Err(Error::Internal(format!("negative noise variance {variance} at rx {i}")));
        }
        *y = if impairments.noise {
            let z: f64 = rng.sample(StandardNormal);
            mean + variance.sqrt() * T::lit(z)
        } else {
            mean
        };
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn sample_received<T: Real, R: Rng + ?Sized>(
    scheme: &Scheme,
    snap: &ChannelSnapshot<T>,
    geom: &SystemGeometry<T>,
    alphabet: &CskAlphabet<T>,
    current: &Symbol,
    previous: Option<&Symbol>,
    impairments: Impairments,
    rng: &mut R,
) -> Result<ReceivedVector<T>> {
    let mut y = vec![T::zero(); snap.n_links()];
    sample_received_into(scheme, snap, geom, alphabet, current, previous, impairments, rng, &mut y)?;
    Ok(ReceivedVector { y })
}
