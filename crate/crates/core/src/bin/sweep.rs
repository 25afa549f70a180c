use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use overpass_qkd::geometry::{max_elevation, OrbitGeometry, EARTH_RADIUS_KM};
use overpass_qkd::lossio::{
    generate_synthetic_profile, read_loss_file_with, system_loss_db, write_loss_file,
    EfficiencyUnit, DEFAULT_EFFICIENCY_COLUMN,
};
use overpass_qkd::sweep::{run_sweep, SweepConfig};

#[derive(Parser)]
#[command(name = "sweep", version, about = "Optimised finite-key SKL sweeps for satellite QKD passes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the sweep described by a TOML config file.
    Run {
        config: PathBuf,
        /// Override a config key, e.g. `--set seed=3 --set 'boundFunc="Hoeffding"'`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Write a synthetic circular-orbit loss profile.
    GenProfile {
        #[arg(long, default_value_t = 500.0)]
        h_sat: f64,
        #[arg(long, default_value_t = 0.0)]
        h_ogs: f64,
        #[arg(long, default_value_t = EARTH_RADIUS_KM)]
        earth_radius: f64,
        /// Orbit offset angle in degrees.
        #[arg(long, default_value_t = 0.0)]
        xi_deg: f64,
        /// Loss at closest approach, dB.
        #[arg(long, default_value_t = 30.0)]
        zenith_loss: f64,
        /// Number of one-second slots (odd).
        #[arg(long, default_value_t = 601)]
        slots: usize,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Check a loss file and summarise it.
    Validate {
        loss_file: PathBuf,
        /// Efficiency column, counting from 1.
        #[arg(long, default_value_t = DEFAULT_EFFICIENCY_COLUMN)]
        column: usize,
        /// The efficiency column holds loss in dB.
        #[arg(long)]
        db: bool,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sweep: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> overpass_qkd::Result<()> {
    match cli.command {
        Command::Run { config, overrides } => {
            let cfg = SweepConfig::load(&config, &overrides)?;
            let report = run_sweep(&cfg, &mut std::io::stdout().lock())?;
            for f in &report.files {
                println!("wrote {}", f.display());
            }
        }
        Command::GenProfile {
            h_sat,
            h_ogs,
            earth_radius,
            xi_deg,
            zenith_loss,
            slots,
            out,
        } => {
            let geom = OrbitGeometry {
                earth_radius,
                h_sat,
                h_ogs,
                xi_deg,
            };
            let profile = generate_synthetic_profile(&geom, zenith_loss, slots)?;
            write_loss_file(&profile, &out)?;
            println!(
                "wrote {} slots to {} (max elevation {:.4} deg)",
                profile.len(),
                out.display(),
                max_elevation(&geom)?
            );
        }
        Command::Validate {
            loss_file,
            column,
            db,
        } => {
            let unit = if db {
                EfficiencyUnit::Decibels
            } else {
                EfficiencyUnit::Linear
            };
            let p = read_loss_file_with(&loss_file, column, unit)?;
            let rows = p.rows();
            let peak = rows.iter().map(|r| r.elevation).fold(0.0, f64::max);
            println!("{}: ok", loss_file.display());
            println!("  slots           {}", p.len());
            println!("  slot duration   {} s", p.slot_duration());
            println!("  time span       {} .. {} s", rows[0].time, rows[rows.len() - 1].time);
            println!("  peak elevation  {peak} deg");
            println!("  system loss     {:.4} dB", system_loss_db(&p));
        }
    }
    Ok(())
}
