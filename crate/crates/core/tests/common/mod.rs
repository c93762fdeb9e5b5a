//! Test-only oracles. None of these call into the analysis module except
//! where noted; they recompute the quantities from first principles.
#![allow(dead_code)]

use smmc::analysis::q_function;
use smmc::{ChannelSnapshot, RunConfig, Scheme, SystemGeometry};

pub const D: f64 = 2.2e-9;
pub const LINK: f64 = 20e-6;
pub const RHO: f64 = 0.1e-6;

pub fn geometry(n: usize, r_um: f64) -> SystemGeometry {
    SystemGeometry::new(n, LINK, r_um * 1e-6, RHO, D).unwrap()
}

pub fn config(scheme: Scheme, r_um: f64, ts: f64) -> RunConfig {
    RunConfig::new(scheme, geometry(scheme.n_links(), r_um), ts)
}

/// Nodes and weights of the n-point Gauss–Legendre rule on [-1, 1], by
/// Newton iteration on the Legendre polynomial.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for l in 2..=n {
                let p2 = ((2 * l - 1) as f64 * x * p1 - (l - 1) as f64 * p0) / l as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Composite Gauss–Legendre quadrature of `f` over [a, b].
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize, rule: &[(f64, f64)]) -> f64 {
    let w = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * w;
        let mut s = 0.0;
        for &(x, wt) in rule {
            s += wt * f(mid + 0.5 * w * x);
        }
        total += 0.5 * w * s;
    }
    total
}

/// Gaussian tail by quadrature. For x ≥ 0 the tail is written as
/// φ(x)·∫₀^∞ exp(−xu − u²/2) du, which keeps full relative accuracy deep
/// into the tail; negative arguments use the reflection.
pub fn q_oracle(x: f64) -> f64 {
    if x < 0.0 {
        return 1.0 - q_oracle(-x);
    }
    let rule = gauss_legendre(16);
    // x·U + U²/2 = 40
    let upper = -x + (x * x + 80.0).sqrt();
    let body = integrate(|u| (-x * u - 0.5 * u * u).exp(), 0.0, upper, 64, &rule);
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt() * body
}

fn normal_pdf(x: f64, mean: f64, sd: f64) -> f64 {
    let z = (x - mean) / sd;
    (-0.5 * z * z).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt())
}

/// Means and variances of every receiver for SSK/SM symbol `(j, S)` with the
/// previous pulse `S_prev` from transmitter `j_prev`, written out from the
/// channel gains.
pub fn spatial_moments(
    snap: &ChannelSnapshot,
    geom: &SystemGeometry,
    j: usize,
    level: f64,
    previous: Option<(usize, f64)>,
) -> Vec<(f64, f64)> {
    (0..snap.n_links())
        .map(|i| {
            let mut mean = level * snap.h(i, j);
            if let Some((jp, lp)) = previous {
                if jp == i {
                    mean += lp * snap.h_prev_self();
                }
            }
            (mean, mean / geom.receiver_volume())
        })
        .collect()
}

/// Exact probability that receiver `k` carries the largest of independent
/// Gaussians with the given moments: ∫ f_k(x) ∏_{i≠k} P(y_i < x) dx.
/// Uses the crate's Gaussian tail, which is itself checked against
/// [`q_oracle`].
pub fn prob_is_max(moments: &[(f64, f64)], k: usize) -> f64 {
    let (mk, vk) = moments[k];
    let sk = vk.sqrt();
    let rule = gauss_legendre(16);
    integrate(
        |x| {
            let mut p = normal_pdf(x, mk, sk);
            for (i, &(m, v)) in moments.iter().enumerate() {
                if i != k {
                    p *= q_function((m - x) / v.sqrt());
                }
            }
            p
        },
        mk - 12.0 * sk,
        mk + 12.0 * sk,
        400,
        &rule,
    )
}

/// Exact SSK symbol error rate of the argmax receiver, averaging over the
/// current and previous active transmitter.
pub fn ssk_ser_exact(snap: &ChannelSnapshot, geom: &SystemGeometry, level: f64) -> f64 {
    let n = snap.n_links();
    let mut correct = 0.0;
    for j in 0..n {
        for jp in 0..n {
            correct += prob_is_max(&spatial_moments(snap, geom, j, level, Some((jp, level))), j);
        }
    }
    1.0 - correct / (n * n) as f64
}

/// Exact SER of single-link CSK with nearest-level decisions and one symbol
/// of memory.
pub fn siso_ser_exact(levels: &[f64], gain: f64, isi_gain: f64, volume: f64) -> f64 {
    let m = levels.len();
    let thresholds: Vec<f64> = levels.windows(2).map(|w| 0.5 * (w[0] + w[1]) * gain).collect();
    let mut correct = 0.0;
    for cur in 0..m {
        for prev in 0..m {
            let mean = levels[cur] * gain + levels[prev] * isi_gain;
            let sd = (mean / volume).sqrt();
            let below = |t: f64| {
                if sd == 0.0 {
                    if mean <= t {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    1.0 - q_function((t - mean) / sd)
                }
            };
            let upper = if cur + 1 < m { below(thresholds[cur]) } else { 1.0 };
            let lower = if cur > 0 { below(thresholds[cur - 1]) } else { 0.0 };
            correct += upper - lower;
        }
    }
    1.0 - correct / (m * m) as f64
}

/// Normal-approximation z-score of the difference between two pooled
/// binomial estimates.
pub fn z_difference(p1: f64, n1: u64, p2: f64, n2: u64) -> f64 {
    let var = p1 * (1.0 - p1) / n1 as f64 + p2 * (1.0 - p2) / n2 as f64;
    (p1 - p2) / var.sqrt()
}

/// SNR at which a curve crosses `target`, interpolating log10(SER) linearly
/// between neighbouring grid points.
pub fn crossing_db(points: &[(f64, f64)], target: f64) -> Option<f64> {
    points.windows(2).find_map(|w| {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        if y0 >= target && y1 <= target && y0 > 0.0 && y1 > 0.0 && y0 != y1 {
            let (l0, l1, lt) = (y0.log10(), y1.log10(), target.log10());
            Some(x0 + (lt - l0) / (l1 - l0) * (x1 - x0))
        } else {
            None
        }
    })
}
