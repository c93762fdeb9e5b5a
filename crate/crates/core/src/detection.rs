//! Receiver decision rules. All detectors are memoryless and assume perfect
//! knowledge of the channel snapshot. Ties always go to the smallest index.

use std::fmt;
use std::str::FromStr;

use crate::channel::ChannelSnapshot;
use crate::error::{Error, Result};
use crate::modulation::{CskAlphabet, Symbol};
use crate::scalar::{argmax, Real};

/// How the second stage of successive detection uses the receivers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Combining {
    /// Only the receiver paired with the detected transmitter.
    Selection,
    /// All receivers against the detected channel column.
    EqualGain,
}

/// MIMO-OOK per-receiver threshold rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ThresholdPolicy {
    /// `τ_i = S_1·h_ii / 2`, interference not accounted for.
    Midpoint,
}

impl FromStr for ThresholdPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "midpoint" => Ok(ThresholdPolicy::Midpoint),
            other => Err(Error::config(
                "threshold_policy",
                format!("unknown threshold policy `{other}`"),
            )),
        }
    }
}

/// Detector selection, as named in configuration files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Detector {
    /// Joint maximum-likelihood search over every (transmitter, level).
    JointMl,
    /// Energy comparison for the transmitter, then CSK demodulation.
    /// For SSK only the first stage runs.
    Successive(Combining),
    /// Per-link threshold (MIMO-OOK).
    Threshold(ThresholdPolicy),
    /// Nearest level on the single receiver (SISO).
    NearestLevel,
}

impl Detector {
    pub fn as_str(&self) -> &'static str {
        match self {
            Detector::JointMl => "ml",
            Detector::Successive(Combining::EqualGain) => "egc",
            Detector::Successive(Combining::Selection) => "sc",
            Detector::Threshold(ThresholdPolicy::Midpoint) => "midpoint",
            Detector::NearestLevel => "nearest",
        }
    }
}

impl fmt::Display for Detector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Detector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ml" => Ok(Detector::JointMl),
            "egc" | "argmax" => Ok(Detector::Successive(Combining::EqualGain)),
            "sc" => Ok(Detector::Successive(Combining::Selection)),
            "midpoint" | "threshold" => Ok(Detector::Threshold(ThresholdPolicy::Midpoint)),
            "nearest" => Ok(Detector::NearestLevel),
            other => Err(Error::config("detector", format!("unknown detector `{other}`"))),
        }
    }
}

/// Joint ML over all `N·M` hypotheses. Returns the decision and the number
/// of hypotheses evaluated.
pub fn detect_ml_joint_counted<T: Real>(
    y: &[T],
    snap: &ChannelSnapshot<T>,
    alphabet: &CskAlphabet<T>,
) -> (Symbol, usize) {
    let mut best = (0, 0);
    let mut best_metric = T::infinity();
    let mut evaluated = 0;
    for j in 0..snap.n_links() {
        for (m, &s) in alphabet.levels().iter().enumerate() {
            let metric = residual(y, snap, j, s);
            evaluated += 1;
            if metric < best_metric {
                best_metric = metric;
                best = (j, m);
            }
        }
    }
    (Symbol::indexed(best.0, best.1), evaluated)
}

pub fn detect_ml_joint<T: Real>(y: &[T], snap: &ChannelSnapshot<T>, alphabet: &CskAlphabet<T>) -> Symbol {
    detect_ml_joint_counted(y, snap, alphabet).0
}

#[inline]
fn residual<T: Real>(y: &[T], snap: &ChannelSnapshot<T>, j: usize, level: T) -> T {
    y.iter()
        .zip(snap.column(j))
        .map(|(&yi, h)| {
            let e = yi - level * h;
            e * e
        })
        .sum()
}

/// Receiver with the largest concentration.
pub fn detect_space<T: Real>(y: &[T]) -> usize {
    argmax(y)
}

fn nearest_level<T: Real>(sample: T, gain: T, alphabet: &CskAlphabet<T>) -> usize {
    let mut best = 0;
    let mut best_metric = T::infinity();
    for (m, &s) in alphabet.levels().iter().enumerate() {
        let e = sample - s * gain;
        let metric = e * e;
        if metric < best_metric {
            best_metric = metric;
            best = m;
        }
    }
    best
}

/// CSK decision from the detected receiver alone.
pub fn detect_csk_sc<T: Real>(
    y: &[T],
    space: usize,
    snap: &ChannelSnapshot<T>,
    alphabet: &CskAlphabet<T>,
) -> usize {
    nearest_level(y[space], snap.h(space, space), alphabet)
}

/// CSK decision from all receivers against column `space`.
pub fn detect_csk_egc<T: Real>(
    y: &[T],
    space: usize,
    snap: &ChannelSnapshot<T>,
    alphabet: &CskAlphabet<T>,
) -> usize {
    let mut best = 0;
    let mut best_metric = T::infinity();
    for (m, &s) in alphabet.levels().iter().enumerate() {
        let metric = residual(y, snap, space, s);
        if metric < best_metric {
            best_metric = metric;
            best = m;
        }
    }
    best
}

/// Two-stage detection; returns the decision and `N + M` evaluations
/// (`N` for single-level alphabets, where the second stage is skipped).
pub fn detect_successive_counted<T: Real>(
    y: &[T],
    snap: &ChannelSnapshot<T>,
    alphabet: &CskAlphabet<T>,
    combining: Combining,
) -> (Symbol, usize) {
    let space = detect_space(y);
    let n = y.len();
    if alphabet.len() == 1 {
        return (Symbol::indexed(space, 0), n);
    }
    let level = match combining {
        Combining::Selection => detect_csk_sc(y, space, snap, alphabet),
        Combining::EqualGain => detect_csk_egc(y, space, snap, alphabet),
    };
    (Symbol::indexed(space, level), n + alphabet.len())
}

pub fn detect_successive<T: Real>(
    y: &[T],
    snap: &ChannelSnapshot<T>,
    alphabet: &CskAlphabet<T>,
    combining: Combining,
) -> Symbol {
    detect_successive_counted(y, snap, alphabet, combining).0
}

/// Per-link OOK decisions, bit `i` of the result for receiver `i`.
pub fn detect_mimo_ook<T: Real>(
    y: &[T],
    snap: &ChannelSnapshot<T>,
    alphabet: &CskAlphabet<T>,
    policy: ThresholdPolicy,
) -> Symbol {
    let on = alphabet.level(alphabet.len() - 1);
    let mut bits = 0u64;
    for (i, &yi) in y.iter().enumerate() {
        let tau = match policy {
            ThresholdPolicy::Midpoint => on * snap.h(i, i) / T::lit(2.0),
        };
        if yi >= tau {
            bits |= 1 << i;
        }
    }
    Symbol::OnOff(bits)
}

pub fn detect_siso_csk<T: Real>(y: T, snap: &ChannelSnapshot<T>, alphabet: &CskAlphabet<T>) -> usize {
    nearest_level(y, snap.diag(), alphabet)
}
