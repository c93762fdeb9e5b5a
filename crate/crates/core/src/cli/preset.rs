//! Figure presets: each expands to the set of curves of one SER figure.

use std::path::{Path, PathBuf};

use crate::channel::SystemGeometry;
use crate::cli::config::{detector_label, Overrides, DEFAULT_DIFFUSION, DEFAULT_LINK_DISTANCE, DEFAULT_RECEIVER_RADIUS};
use crate::cli::output::{write_curve_csv, write_dat, write_long_csv};
use crate::detection::{Combining, Detector};
use crate::engine::{run_sweep, RunConfig, FULL_SCALE_REPLICATIONS, FULL_SCALE_SYMBOLS};
use crate::error::{Error, Result};
use crate::modulation::Scheme;

pub const FIGURES: [&str; 6] = ["fig4", "fig5", "fig6", "fig7", "fig8", "fig9"];

#[derive(Debug, Clone, PartialEq)]
pub struct CurveSpec {
    pub label: String,
    pub config: RunConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigurePreset {
    pub name: String,
    pub curves: Vec<CurveSpec>,
}

fn curve(scheme: Scheme, r_um: f64, ts: f64, detector: Option<Detector>) -> Result<CurveSpec> {
    let geometry = SystemGeometry::new(
        scheme.n_links(),
        DEFAULT_LINK_DISTANCE,
        r_um * 1e-6,
        DEFAULT_RECEIVER_RADIUS,
        DEFAULT_DIFFUSION,
    )?;
    let mut config = RunConfig::new(scheme, geometry, ts);
    if let Some(d) = detector {
        config.detector = d;
    }
    let label = format!(
        "{}_N{}_M{}_Ts{}_r{}_{}",
        scheme.kind(),
        scheme.n_links(),
        scheme.csk_order(),
        ts,
        r_um,
        detector_label(&config)
    );
    Ok(CurveSpec { label, config })
}

/// Expands a figure name into its curves.
///
/// * `fig4`: BSSK and QSSK, r = 12.5 µm, Ts ∈ {0.1, 0.2, 0.8} s.
/// * `fig5`: BSSK and QSSK, Ts = 0.5 s, r ∈ {10, 12.5, 15} µm.
/// * `fig6`: 2×2 and 4×4 SM (BCSK), r = 10 µm, Ts ∈ {0.15, 0.3, 1} s.
/// * `fig7`: 2×2 and 4×4 SM (BCSK), Ts = 1 s, r ∈ {8, 10, 12} µm.
/// * `fig8`: SISO QCSK, 2×2 MIMO-OOK, QSSK and 2×2 SM (BCSK), all at
///   2 bits/symbol, Ts = 0.2 s, r ∈ {10, 15} µm.
/// * `fig9`: 2×2 and 4×4 SM (BCSK) with EGC and SC, Ts = 1 s,
///   r ∈ {10, 12.5, 15} µm.
pub fn figure_preset(name: &str, full_scale: bool, overrides: Overrides) -> Result<FigurePreset> {
    let mut curves = Vec::new();
    match name {
        "fig4" => {
            for ts in [0.1, 0.2, 0.8] {
                for n in [2, 4] {
                    curves.push(curve(Scheme::ssk(n)?, 12.5, ts, None)?);
                }
            }
        }
        "fig5" => {
            for r in [10.0, 12.5, 15.0] {
                for n in [2, 4] {
                    curves.push(curve(Scheme::ssk(n)?, r, 0.5, None)?);
                }
            }
        }
        "fig6" => {
            for ts in [0.15, 0.3, 1.0] {
                for n in [2, 4] {
                    curves.push(curve(Scheme::sm(n, 2)?, 10.0, ts, None)?);
                }
            }
        }
        "fig7" => {
            for r in [8.0, 10.0, 12.0] {
                for n in [2, 4] {
                    curves.push(curve(Scheme::sm(n, 2)?, r, 1.0, None)?);
                }
            }
        }
        "fig8" => {
            for r in [10.0, 15.0] {
                curves.push(curve(Scheme::siso_csk(4)?, r, 0.2, None)?);
                curves.push(curve(Scheme::mimo_ook(2)?, r, 0.2, None)?);
                curves.push(curve(Scheme::ssk(4)?, r, 0.2, None)?);
                curves.push(curve(Scheme::sm(2, 2)?, r, 0.2, None)?);
            }
        }
        "fig9" => {
            for r in [10.0, 12.5, 15.0] {
                for n in [2, 4] {
                    for c in [Combining::EqualGain, Combining::Selection] {
                        curves.push(curve(Scheme::sm(n, 2)?, r, 1.0, Some(Detector::Successive(c)))?);
                    }
                }
            }
        }
        other => {
            return Err(Error::config(
                "figure",
                format!("unknown figure `{other}` (expected one of {})", FIGURES.join(", ")),
            ))
        }
    }
    for c in &mut curves {
        if full_scale {
            c.config.symbols = FULL_SCALE_SYMBOLS;
            c.config.replications = FULL_SCALE_REPLICATIONS;
        }
        overrides.apply(&mut c.config);
        c.config.validate()?;
    }
    Ok(FigurePreset {
        name: name.to_string(),
        curves,
    })
}

/// Runs every curve of the preset and writes `<label>.csv` per curve plus
/// `<figure>_long.csv` with all curves. Returns the written paths.
pub fn run_figure(preset: &FigurePreset, out_dir: &Path, dat: bool) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    let mut all = Vec::new();
    for spec in &preset.curves {
        let curve = run_sweep(&spec.config)?;
        let path = out_dir.join(format!("{}_{}.csv", preset.name, spec.label));
        write_curve_csv(&path, &curve)?;
        written.push(path);
        if dat {
            let path = out_dir.join(format!("{}_{}.dat", preset.name, spec.label));
            write_dat(&path, &spec.label, &curve)?;
            written.push(path);
        }
        all.push((spec.label.clone(), detector_label(&spec.config), curve));
    }
    let long = out_dir.join(format!("{}_long.csv", preset.name));
    write_long_csv(&long, &all)?;
    written.push(long);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curve_counts() {
        let count = |name| figure_preset(name, false, Overrides::default()).unwrap().curves.len();
        assert_eq!(count("fig4"), 6);
        assert_eq!(count("fig5"), 6);
        assert_eq!(count("fig6"), 6);
        assert_eq!(count("fig7"), 6);
        assert_eq!(count("fig8"), 8);
        assert_eq!(count("fig9"), 12);
        assert!(figure_preset("fig10", false, Overrides::default()).is_err());
    }

    #[test]
    fn fig4_rows_and_parameters() {
        let p = figure_preset("fig4", false, Overrides::default()).unwrap();
        let rows: usize = p.curves.iter().map(|c| c.config.snr_db.len()).sum();
        assert_eq!(rows, 66);
        for c in &p.curves {
            assert!((c.config.geometry.separation() - 12.5e-6).abs() < 1e-18);
            assert!([0.1, 0.2, 0.8].contains(&c.config.symbol_duration));
        }
    }

    #[test]
    fn fig8_is_rate_matched() {
        let p = figure_preset("fig8", false, Overrides::default()).unwrap();
        for c in &p.curves {
            assert_eq!(c.config.scheme.bits_per_symbol(), 2, "{}", c.label);
        }
    }

    #[test]
    fn expansion_is_pure_and_overridable() {
        let o = Overrides {
            seed: Some(9),
            symbols: Some(5_000),
            replications: Some(3),
        };
        let a = figure_preset("fig9", false, o).unwrap();
        assert_eq!(a, figure_preset("fig9", false, o).unwrap());
        assert!(a.curves.iter().all(|c| c.config.seed == 9 && c.config.total_symbols() == 15_000));
        let full = figure_preset("fig6", true, Overrides::default()).unwrap();
        assert!(full.curves.iter().all(|c| c.config.total_symbols() == 20_000_000));
    }
}
