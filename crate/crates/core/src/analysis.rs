//! Closed-form symbol error rates.
//!
//! Space detection (largest concentration wins) is evaluated by treating the
//! pairwise events `y_j > y_i` as independent, which gives a product of
//! Gaussian tail probabilities. SSK error is exact under that factorization;
//! for SM a union bound over CSK confusions is added on top.
//!
//! Symbols are passed as `(space, level)` index pairs. `previous = None`
//! means no residual from an earlier pulse.

use crate::channel::{ChannelSnapshot, SystemGeometry};
use crate::error::{Error, Result};
use crate::modulation::CskAlphabet;
use crate::scalar::Real;

/// `(transmitter, level)` indices of a single-active-transmitter symbol.
pub type SpaceSymbol = (usize, usize);

/// Standard normal tail probability, `Q(x) = erfc(x/√2)/2`.
///
/// In `f64` the relative error stays below 1e-12 as long as the result is a
/// normal float (x up to about 37.5); beyond that it decays into subnormals.
pub fn q_function<T: Real>(x: T) -> T {
    T::lit(0.5) * (x / T::SQRT_2()).erfc()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalGaussian<T> {
    pub mean: T,
    pub variance: T,
}

impl<T: Real> ConditionalGaussian<T> {
    /// `Pr[X > 0]`. A zero-variance law is treated as a point mass.
    pub fn prob_positive(&self) -> T {
        if self.variance > T::zero() {
            q_function(-self.mean / self.variance.sqrt())
        } else if self.mean > T::zero() {
            T::one()
        } else if self.mean < T::zero() {
            T::zero()
        } else {
            T::lit(0.5)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AnalyticKind {
    Exact,
    UpperBound,
}

impl AnalyticKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AnalyticKind::Exact => "exact",
            AnalyticKind::UpperBound => "bound",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SerEstimate<T> {
    pub value: T,
    pub kind: AnalyticKind,
}

fn saturate<T: Real>(p: T) -> T {
    p.max(T::zero()).min(T::one())
}

/// Expected concentration at receiver `i` given the current and previous
/// single-transmitter symbols.
fn receiver_mean<T: Real>(
    snap: &ChannelSnapshot<T>,
    alphabet: &CskAlphabet<T>,
    current: SpaceSymbol,
    previous: Option<SpaceSymbol>,
    i: usize,
) -> T {
    let (j, m) = current;
    let isi = match previous {
        Some((jp, mp)) if jp == i => alphabet.level(mp) * snap.h_prev_self(),
        _ => T::zero(),
    };
    alphabet.level(m) * snap.h(i, j) + isi
}

/// Law of `y_a − y_b` for arbitrary receivers `a ≠ b`.
fn difference_law<T: Real>(
    snap: &ChannelSnapshot<T>,
    geom: &SystemGeometry<T>,
    alphabet: &CskAlphabet<T>,
    current: SpaceSymbol,
    previous: Option<SpaceSymbol>,
    a: usize,
    b: usize,
) -> ConditionalGaussian<T> {
    let ma = receiver_mean(snap, alphabet, current, previous, a);
    let mb = receiver_mean(snap, alphabet, current, previous, b);
    ConditionalGaussian {
        mean: ma - mb,
        variance: (ma + mb) / geom.receiver_volume(),
    }
}

fn check_symbol<T: Real>(
    snap: &ChannelSnapshot<T>,
    alphabet: &CskAlphabet<T>,
    (j, m): SpaceSymbol,
) -> Result<()> {
    if j >= snap.n_links() || m >= alphabet.len() {
        return Err(Error::arg(format!(
            "symbol ({j}, {m}) out of range for N = {}, M = {}",
            snap.n_links(),
            alphabet.len()
        )));
    }
    Ok(())
}

/// Law of `y_j − y_i` for the active transmitter `j` and another receiver
/// `i`, in the three cases distinguished by where the previous pulse went.
pub fn cond_gaussian<T: Real>(
    snap: &ChannelSnapshot<T>,
    geom: &SystemGeometry<T>,
    alphabet: &CskAlphabet<T>,
    current: SpaceSymbol,
    previous: Option<SpaceSymbol>,
    i: usize,
) -> Result<ConditionalGaussian<T>> {
    check_symbol(snap, alphabet, current)?;
    if let Some(p) = previous {
        check_symbol(snap, alphabet, p)?;
    }
    let (j, m) = current;
    if i == j || i >= snap.n_links() {
        return Err(Error::arg(format!("receiver {i} must differ from the active transmitter {j}")));
    }
    let s = alphabet.level(m);
    let (hjj, hij) = (snap.h(j, j), snap.h(i, j));
    let v = geom.receiver_volume();
    let base_mean = s * (hjj - hij);
    let base_var = s * (hjj + hij);
    let (mean, var) = match previous {
        // residual lands on the competing receiver
        Some((jp, mp)) if i == jp && j != jp => {
            let isi = alphabet.level(mp) * snap.h_prev_self();
            (base_mean - isi, base_var + isi)
        }
        // residual lands on the active receiver
        Some((jp, mp)) if i != jp && j == jp => {
            let isi = alphabet.level(mp) * snap.h_prev_self();
            (base_mean + isi, base_var + isi)
        }
        _ => (base_mean, base_var),
    };
    Ok(ConditionalGaussian {
        mean,
        variance: var / v,
    })
}

/// Probability that the active receiver senses the largest concentration,
/// as a product of pairwise probabilities.
pub fn ssk_cond_correct<T: Real>(
    snap: &ChannelSnapshot<T>,
    geom: &SystemGeometry<T>,
    alphabet: &CskAlphabet<T>,
    current: SpaceSymbol,
    previous: Option<SpaceSymbol>,
) -> Result<T> {
    let mut p = T::one();
    for i in (0..snap.n_links()).filter(|&i| i != current.0) {
        p *= cond_gaussian(snap, geom, alphabet, current, previous, i)?.prob_positive();
    }
    Ok(saturate(p))
}

/// SSK symbol error rate averaged over uniform current and previous
/// transmitters. A multi-level alphabet is averaged over levels too.
pub fn ssk_ser<T: Real>(
    snap: &ChannelSnapshot<T>,
    geom: &SystemGeometry<T>,
    alphabet: &CskAlphabet<T>,
) -> Result<SerEstimate<T>> {
    let n = snap.n_links();
    let m = alphabet.len();
    let mut correct = T::zero();
    for cur in symbols(n, m) {
        for prev in symbols(n, m) {
            correct += ssk_cond_correct(snap, geom, alphabet, cur, Some(prev))?;
        }
    }
    let count = T::lit((n * m * n * m) as f64);
    Ok(SerEstimate {
        value: saturate(T::one() - correct / count),
        kind: AnalyticKind::Exact,
    })
}

fn symbols(n: usize, m: usize) -> impl Iterator<Item = SpaceSymbol> + Clone {
    (0..n).flat_map(move |j| (0..m).map(move |k| (j, k)))
}

/// Probability that receiver `k` senses the maximum, for every `k`,
/// normalized to sum to one.
pub fn space_detection_row<T: Real>(
    snap: &ChannelSnapshot<T>,
    geom: &SystemGeometry<T>,
    alphabet: &CskAlphabet<T>,
    current: SpaceSymbol,
    previous: Option<SpaceSymbol>,
) -> Result<Vec<T>> {
    check_symbol(snap, alphabet, current)?;
    if let Some(p) = previous {
        check_symbol(snap, alphabet, p)?;
    }
    let n = snap.n_links();
    let raw: Vec<T> = (0..n)
        .map(|k| {
            (0..n)
                .filter(|&i| i != k)
                .map(|i| difference_law(snap, geom, alphabet, current, previous, k, i).prob_positive())
                .fold(T::one(), |acc, p| acc * p)
        })
        .collect();
    let total: T = raw.iter().copied().sum();
    if !(total > T::zero()) {
        return Err(Error::Internal("space detection probabilities vanish".into()));
    }
    Ok(raw.into_iter().map(|p| p / total).collect())
}

/// Normalized probability that receiver `detected` wins the energy comparison.
pub fn space_miss_prob<T: Real>(
    snap: &ChannelSnapshot<T>,
    geom: &SystemGeometry<T>,
    alphabet: &CskAlphabet<T>,
    current: SpaceSymbol,
    previous: Option<SpaceSymbol>,
    detected: usize,
) -> Result<T> {
    if detected >= snap.n_links() {
        return Err(Error::arg(format!("receiver {detected} out of range")));
    }
    Ok(space_detection_row(snap, geom, alphabet, current, previous)?[detected])
}

/// Probability that equal-gain combining against column `detected` prefers
/// level `n` over the transmitted level.
///
/// The residual of the previous pulse reaches receiver `j̄` through the
/// paired-link CIR one symbol later, matching the link model.
pub fn csk_pairwise<T: Real>(
    snap: &ChannelSnapshot<T>,
    geom: &SystemGeometry<T>,
    alphabet: &CskAlphabet<T>,
    current: SpaceSymbol,
    previous: Option<SpaceSymbol>,
    n: usize,
    detected: usize,
) -> Result<T> {
    check_symbol(snap, alphabet, current)?;
    if let Some(p) = previous {
        check_symbol(snap, alphabet, p)?;
    }
    let (j, m) = current;
    if n == m || n >= alphabet.len() {
        return Err(Error::arg(format!("target level {n} must differ from {m} and be in range")));
    }
    if detected >= snap.n_links() {
        return Err(Error::arg(format!("receiver {detected} out of range")));
    }
    let (sm, sn) = (alphabet.level(m), alphabet.level(n));
    let v = geom.receiver_volume();
    let isi = previous.map_or(T::zero(), |(jp, mp)| {
        alphabet.level(mp) * snap.h(jp, detected) * snap.h_prev_self()
    });
    let mut cross = T::zero();
    let mut energy = T::zero();
    let mut spread = T::zero();
    for i in 0..snap.n_links() {
        let hd = snap.h(i, detected);
        cross += hd * snap.h(i, j);
        energy += hd * hd;
        spread += hd * hd * receiver_mean(snap, alphabet, current, previous, i) / v;
    }
    let arg = (-isi - sm * cross + (sm + sn) / T::lit(2.0) * energy) / spread.sqrt();
    Ok(if sm > sn {
        T::one() - q_function(arg)
    } else {
        q_function(arg)
    })
}

/// Union bound on the CSK error, weighting each possible space decision by
/// its (normalized) probability.
pub fn csk_error_bound<T: Real>(
    snap: &ChannelSnapshot<T>,
    geom: &SystemGeometry<T>,
    alphabet: &CskAlphabet<T>,
    current: SpaceSymbol,
    previous: Option<SpaceSymbol>,
) -> Result<T> {
    if alphabet.len() < 2 {
        return Ok(T::zero());
    }
    let row = space_detection_row(snap, geom, alphabet, current, previous)?;
    let mut total = T::zero();
    for n in (0..alphabet.len()).filter(|&n| n != current.1) {
        for (detected, &w) in row.iter().enumerate() {
            total += w * csk_pairwise(snap, geom, alphabet, current, previous, n, detected)?;
        }
    }
    Ok(total.min(T::one()))
}

/// Conditional SM error bound: space error plus CSK union bound, with the
/// product term dropped.
pub fn sm_cond_bound<T: Real>(
    snap: &ChannelSnapshot<T>,
    geom: &SystemGeometry<T>,
    alphabet: &CskAlphabet<T>,
    current: SpaceSymbol,
    previous: Option<SpaceSymbol>,
) -> Result<T> {
    let space_err = T::one() - ssk_cond_correct(snap, geom, alphabet, current, previous)?;
    let csk_err = csk_error_bound(snap, geom, alphabet, current, previous)?;
    Ok(saturate(space_err + csk_err))
}

/// Average SM SER bound over uniform current and previous symbols.
pub fn sm_ser_bound<T: Real>(
    snap: &ChannelSnapshot<T>,
    geom: &SystemGeometry<T>,
    alphabet: &CskAlphabet<T>,
) -> Result<SerEstimate<T>> {
    let n = snap.n_links();
    let m = alphabet.len();
    let mut total = T::zero();
    for cur in symbols(n, m) {
        for prev in symbols(n, m) {
            total += sm_cond_bound(snap, geom, alphabet, cur, Some(prev))?;
        }
    }
    Ok(SerEstimate {
        value: saturate(total / T::lit((n * m * n * m) as f64)),
        kind: AnalyticKind::UpperBound,
    })
}
