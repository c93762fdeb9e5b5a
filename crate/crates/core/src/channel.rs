//! Diffusion channel between a linear array of point transmitters and a
//! parallel array of passive spherical receivers in an unbounded 3-D medium.
//!
//! All quantities are SI: metres, seconds, m²/s, and CIR values in m⁻³.
//! Link indices are zero-based throughout the crate.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Largest supported number of links; the channel matrix is stored dense.
pub const MAX_LINKS: usize = 64;

/// Physical layout and medium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemGeometry<T> {
    n_links: usize,
    link_distance: T,
    separation: T,
    receiver_radius: T,
    diffusion_coeff: T,
}

impl<T: Real> SystemGeometry<T> {
    /// Validates and builds a geometry. The passive-receiver model needs the
    /// receiver to be small against the link, so `receiver_radius` is capped
    /// at a tenth of `link_distance`.
    pub fn new(
        n_links: usize,
        link_distance: T,
        separation: T,
        receiver_radius: T,
        diffusion_coeff: T,
    ) -> Result<Self> {
        if n_links == 0 || n_links > MAX_LINKS {
            return Err(Error::config(
                "n_links",
                format!("must be in 1..={MAX_LINKS}, got {n_links}"),
            ));
        }
        let positive = |key: &str, v: T| -> Result<()> {
            if v.is_finite() && v > T::zero() {
                Ok(())
            } else {
                Err(Error::config(key, format!("must be finite and > 0, got {v}")))
            }
        };
        positive("link_distance", link_distance)?;
        positive("separation", separation)?;
        positive("receiver_radius", receiver_radius)?;
        positive("diffusion_coeff", diffusion_coeff)?;
        if receiver_radius * T::lit(10.0) > link_distance {
            return Err(Error::config(
                "receiver_radius",
                format!("must be at most link_distance/10 ({receiver_radius} vs {link_distance})"),
            ));
        }
        Ok(Self {
            n_links,
            link_distance,
            separation,
            receiver_radius,
            diffusion_coeff,
        })
    }

    pub fn n_links(&self) -> usize {
        self.n_links
    }
    pub fn link_distance(&self) -> T {
        self.link_distance
    }
    pub fn separation(&self) -> T {
        self.separation
    }
    pub fn receiver_radius(&self) -> T {
        self.receiver_radius
    }
    pub fn diffusion_coeff(&self) -> T {
        self.diffusion_coeff
    }

    /// Same medium and spacing with a different number of links.
    pub fn with_links(&self, n_links: usize) -> Result<Self> {
        Self::new(
            n_links,
            self.link_distance,
            self.separation,
            self.receiver_radius,
            self.diffusion_coeff,
        )
    }

    /// V_RX = 4/3·π·ρ³.
    pub fn receiver_volume(&self) -> T {
        T::lit(4.0 / 3.0) * T::PI() * self.receiver_radius.powi(3)
    }

    pub fn peak_time(&self) -> T {
        peak_time(self.link_distance, self.diffusion_coeff)
    }
}

/// Distance from transmitter `j` to receiver `i`.
pub fn pairwise_distance<T: Real>(geom: &SystemGeometry<T>, j: usize, i: usize) -> Result<T> {
    let n = geom.n_links;
    if i >= n || j >= n {
        return Err(Error::arg(format!(
            "link index out of range: tx {j}, rx {i}, N = {n}"
        )));
    }
    Ok(distance_unchecked(geom, i.abs_diff(j)))
}

fn distance_unchecked<T: Real>(geom: &SystemGeometry<T>, offset: usize) -> T {
    if offset == 0 {
        geom.link_distance
    } else {
        let lateral = T::lit(offset as f64) * geom.separation;
        geom.link_distance.hypot(lateral)
    }
}

/// Point-source Green's function of the diffusion equation, i.e. the
/// probability density of a released molecule being at `distance` after `t`.
pub fn cir<T: Real>(distance: T, t: T, diffusion_coeff: T) -> Result<T> {
    if !(t > T::zero()) {
        return Err(Error::arg(format!("CIR needs t > 0, got {t}")));
    }
    if !(distance > T::zero()) || !(diffusion_coeff > T::zero()) {
        return Err(Error::arg("CIR needs positive distance and diffusion coefficient"));
    }
    Ok(cir_unchecked(distance, t, diffusion_coeff))
}

#[inline]
fn cir_unchecked<T: Real>(distance: T, t: T, diffusion_coeff: T) -> T {
    let four_dt = T::lit(4.0) * diffusion_coeff * t;
    (T::PI() * four_dt).powf(T::lit(-1.5)) * (-(distance * distance) / four_dt).exp()
}

/// Time at which the paired-link CIR peaks: d²/(6D).
pub fn peak_time<T: Real>(link_distance: T, diffusion_coeff: T) -> T {
    link_distance * link_distance / (T::lit(6.0) * diffusion_coeff)
}

/// Closed-form concentration at receiver `i` sampled at the peak time, for a
/// pulse of `molecules` from transmitter `j`.
///
/// Uses the general off-diagonal form for every pair. For `i == j` this
/// reduces to `S·(3/(2πe·d²))^{3/2}`; see [`paired_peak_concentration`].
pub fn peak_concentration<T: Real>(
    geom: &SystemGeometry<T>,
    molecules: T,
    i: usize,
    j: usize,
) -> Result<T> {
    if molecules < T::zero() {
        return Err(Error::arg("molecule count must be non-negative"));
    }
    let d = geom.link_distance;
    let dji = pairwise_distance(geom, j, i)?;
    let scale = (T::lit(3.0) / (T::lit(2.0) * T::PI() * d * d)).powf(T::lit(1.5));
    Ok(molecules * scale * (-T::lit(1.5) * dji * dji / (d * d)).exp())
}

/// Peak concentration at the paired receiver.
pub fn paired_peak_concentration<T: Real>(geom: &SystemGeometry<T>, molecules: T) -> T {
    let d = geom.link_distance;
    molecules * (T::lit(3.0) / (T::lit(2.0) * T::PI() * T::E() * d * d)).powf(T::lit(1.5))
}

/// Channel matrix at the sampling instant plus the paired-link CIR one
/// symbol later (the residual that causes inter-symbol interference).
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSnapshot<T> {
    n: usize,
    // row-major: h_now[i * n + j] is tx j -> rx i
    h_now: Vec<T>,
    h_prev_self: T,
    symbol_duration: T,
    peak_time: T,
}

impl<T: Real> ChannelSnapshot<T> {
    pub fn n_links(&self) -> usize {
        self.n
    }

    /// CIR from transmitter `j` to receiver `i` at the sampling instant.
    #[inline]
    pub fn h(&self, i: usize, j: usize) -> T {
        self.h_now[i * self.n + j]
    }

    /// Paired-link CIR, identical for every link.
    #[inline]
    pub fn diag(&self) -> T {
        self.h_now[0]
    }

    /// Paired-link CIR one symbol after the sampling instant.
    #[inline]
    pub fn h_prev_self(&self) -> T {
        self.h_prev_self
    }

    pub fn symbol_duration(&self) -> T {
        self.symbol_duration
    }

    pub fn peak_time(&self) -> T {
        self.peak_time
    }

    /// Column `j`: CIR from transmitter `j` to every receiver.
    pub fn column(&self, j: usize) -> impl Iterator<Item = T> + '_ {
        (0..self.n).map(move |i| self.h(i, j))
    }

    pub fn column_norm_sq(&self, j: usize) -> T {
        self.column(j).map(|h| h * h).sum()
    }

    /// Builds a snapshot from raw entries. Used by tests that need hand-made
    /// channels; entries must be finite and positive.
    pub fn from_parts(
        n: usize,
        h_now: Vec<T>,
        h_prev_self: T,
        symbol_duration: T,
        peak_time: T,
    ) -> Result<Self> {
        if n == 0 || h_now.len() != n * n {
            return Err(Error::arg("channel matrix must be N×N with N ≥ 1"));
        }
        if h_now
            .iter()
            .chain(std::iter::once(&h_prev_self))
            .any(|h| !(h.is_finite() && *h > T::zero()))
        {
            return Err(Error::arg("CIR entries must be finite and positive"));
        }
        Ok(Self {
            n,
            h_now,
            h_prev_self,
            symbol_duration,
            peak_time,
        })
    }
}

/// Samples the channel matrix at the paired-link peak time.
pub fn snapshot<T: Real>(geom: &SystemGeometry<T>, symbol_duration: T) -> Result<ChannelSnapshot<T>> {
    if !(symbol_duration.is_finite() && symbol_duration > T::zero()) {
        return Err(Error::config(
            "symbol_duration",
            format!("must be finite and > 0, got {symbol_duration}"),
        ));
    }
    let n = geom.n_links;
    let tp = geom.peak_time();
    let dc = geom.diffusion_coeff;
    // one value per |i - j| keeps the matrix exactly Toeplitz
    let by_offset: Vec<T> = (0..n)
        .map(|k| cir_unchecked(distance_unchecked(geom, k), tp, dc))
        .collect();
    let mut h_now = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            h_now.push(by_offset[i.abs_diff(j)]);
        }
    }
    let h_prev_self = cir_unchecked(geom.link_distance, tp + symbol_duration, dc);
    Ok(ChannelSnapshot {
        n,
        h_now,
        h_prev_self,
        symbol_duration,
        peak_time: tp,
    })
}
