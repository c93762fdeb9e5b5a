use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use smmc::cli::config::detector_label;
use smmc::cli::output::{write_dat, write_rows, CsvRow};
use smmc::cli::{figure_preset, parse_config_file, run_figure, write_curve_csv, Overrides, OUT_DIR_ENV};
use smmc::engine::{analytic_sweep, run_sweep};
use smmc::Result;

#[derive(Parser)]
#[command(name = "smmc", version, about = "SER simulation and analysis for spatial-modulation molecular communication")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct RunArgs {
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Symbols per replication.
    #[arg(long)]
    symbols: Option<u64>,
    /// Number of replications.
    #[arg(long)]
    reps: Option<u32>,
    /// Also write gnuplot-friendly .dat files.
    #[arg(long)]
    dat: bool,
}

impl RunArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            symbols: self.symbols,
            replications: self.reps,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one configured curve.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Output directory.
        #[arg(long, env = OUT_DIR_ENV)]
        out: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Reproduce one SER figure (fig4 .. fig9).
    Figure {
        name: String,
        /// 10^6 symbols x 20 replications per point.
        #[arg(long)]
        full_scale: bool,
        /// Output directory.
        #[arg(long, env = OUT_DIR_ENV)]
        out: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Closed-form SER only (SSK exact, SM bound).
    Analytic {
        #[arg(long)]
        config: PathBuf,
        /// Output CSV file.
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { config, out, run } => {
            let mut config = parse_config_file(&config)?;
            run.overrides().apply(&mut config);
            config.validate()?;
            std::fs::create_dir_all(&out)?;
            let label = format!(
                "{}_N{}_M{}_{}",
                config.scheme.kind(),
                config.scheme.n_links(),
                config.scheme.csk_order(),
                detector_label(&config)
            );
            let curve = run_sweep(&config)?;
            let path = out.join(format!("{label}.csv"));
            write_curve_csv(&path, &curve)?;
            println!("{}", path.display());
            if run.dat {
                let path = out.join(format!("{label}.dat"));
                write_dat(&path, &label, &curve)?;
                println!("{}", path.display());
            }
        }
        Command::Figure {
            name,
            full_scale,
            out,
            run,
        } => {
            let preset = figure_preset(&name, full_scale, run.overrides())?;
            eprintln!("{}: {} curves", preset.name, preset.curves.len());
            for path in run_figure(&preset, &out, run.dat)? {
                println!("{}", path.display());
            }
        }
        Command::Analytic { config, out } => {
            let config = parse_config_file(&config)?;
            let rows: Vec<CsvRow> = analytic_sweep(&config)?
                .into_iter()
                .map(|(snr, est)| CsvRow::analytic_only(&config, snr, est.value, est.kind))
                .collect();
            if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)?;
            }
            write_rows(&out, &rows)?;
            println!("{}", out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
