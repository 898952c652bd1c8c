use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gpsm_cli::config::OutputFormat;
use gpsm_cli::output::gnuplot_script;
use gpsm_cli::{compare_curves, emit_results, execute, parse_config, table, CliError, ConfigLayer};

#[derive(Parser)]
#[command(name = "gpsm", version = gpsm_cli::output::VERSION, about = "GPSM multiuser downlink BER simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a scenario over an SNR grid.
    Run(Box<RunArgs>),
    /// Print C_t, N_c, R and L for every N_iba.
    Table {
        /// Receive antennas per user; prints both 4 and 5 when omitted.
        #[arg(long)]
        rx_antennas: Option<usize>,
        #[arg(long, default_value_t = 4)]
        modulation: usize,
    },
    /// SNR gap (b minus a) in dB at a target BER.
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 1e-3)]
        target_ber: f64,
    },
}

#[derive(Args)]
struct RunArgs {
    /// TOML configuration file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// fig1a, fig1b, fig2, fig3 or fig4.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    users: Option<usize>,
    #[arg(long)]
    tx_antennas: Option<usize>,
    #[arg(long)]
    rx_antennas: Option<usize>,
    #[arg(long)]
    iba: Option<usize>,
    #[arg(long)]
    modulation: Option<usize>,
    /// Comma-separated SNR points in dB.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    snr_db: Option<Vec<f64>>,
    #[arg(long)]
    realizations: Option<usize>,
    #[arg(long)]
    vectors_per_frame: Option<usize>,
    /// fixed, random, optimized or optimized_notified.
    #[arg(long)]
    pattern_policy: Option<String>,
    #[arg(long)]
    fixed_set: Option<u64>,
    #[arg(long)]
    repetitions: Option<usize>,
    /// same_frame or pipelined.
    #[arg(long)]
    notification_timing: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated per-user energy fractions.
    #[arg(long, value_delimiter = ',')]
    eps: Option<Vec<f64>>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    enumeration_cap: Option<u64>,
    #[arg(long)]
    format: Option<OutputFormat>,
    /// Output file; records go to stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Also write a gnuplot script for the output file.
    #[arg(long)]
    gnuplot: Option<PathBuf>,
    /// Print the effective configuration and exit.
    #[arg(long)]
    echo_config: bool,
}

impl RunArgs {
    fn layer(&self) -> ConfigLayer {
        ConfigLayer {
            preset: self.preset.clone(),
            users: self.users,
            tx_antennas: self.tx_antennas,
            rx_antennas: self.rx_antennas,
            iba: self.iba,
            modulation: self.modulation,
            snr_db: self.snr_db.clone(),
            realizations: self.realizations,
            vectors_per_frame: self.vectors_per_frame,
            pattern_policy: self.pattern_policy.clone(),
            fixed_set: self.fixed_set,
            repetitions: self.repetitions,
            notification_timing: self.notification_timing.clone(),
            seed: self.seed,
            eps: self.eps.clone(),
            workers: self.workers,
            enumeration_cap: self.enumeration_cap,
            format: self.format,
            output: self.output.clone(),
            gnuplot: self.gnuplot.clone(),
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run(args) => {
            let cfg = parse_config(args.config.as_deref(), &args.layer())?;
            if args.echo_config {
                print!("{}", cfg.echo());
                return Ok(());
            }
            let (records, meta) = execute(&cfg)?;
            emit_results(&records, cfg.format, cfg.output.as_deref(), &meta)?;
            if let Some(script) = &cfg.gnuplot {
                let data = cfg.output.as_deref().ok_or_else(|| {
                    CliError::Config("key 'gnuplot' requires 'output' to be set".into())
                })?;
                std::fs::write(script, gnuplot_script(&[data]))
                    .map_err(|e| CliError::io(script, e))?;
            }
        }
        Command::Table {
            rx_antennas,
            modulation,
        } => {
            let sizes = rx_antennas.map_or(vec![4, 5], |n| vec![n]);
            for (i, n_r) in sizes.into_iter().enumerate() {
                if i > 0 {
                    println!();
                }
                print!("{}", table::render(n_r, modulation)?);
            }
        }
        Command::Compare { a, b, target_ber } => {
            println!("{:.4}", compare_curves(&a, &b, target_ber)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
