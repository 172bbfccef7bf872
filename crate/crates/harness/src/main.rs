use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use plasmosense_harness::{
    emit_csv, emit_samples, run_analyze, run_angle_scan, run_calibrate, run_concentration_scan,
    HarnessError, Result, ScenarioConfig,
};

#[derive(Parser)]
#[command(name = "plasmosense", version, about = "Quantum plasmonic refractometry simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate transmittance vs incidence angle for each analyte.
    AngleScan {
        #[command(flatten)]
        common: Common,
        /// Also write per-repetition samples (`<name>_samples.csv`).
        #[arg(long)]
        raw: bool,
    },
    /// Simulate a fixed-angle concentration series and fit dn/dC.
    ConcentrationScan {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        raw: bool,
    },
    /// Fit the gold film and analyte indices to measured angle scans.
    Calibrate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Summarize recorded per-repetition transmittances.
    Analyze {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `output_dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Use analytic expectations instead of sampled counts.
    #[arg(long)]
    zero_noise: bool,
}

impl Common {
    fn load(&self) -> Result<(ScenarioConfig, PathBuf)> {
        let mut config = ScenarioConfig::from_file(&self.config)?;
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        config.zero_noise |= self.zero_noise;
        let out = self
            .out
            .clone()
            .or_else(|| config.output_dir.clone())
            .unwrap_or_else(|| PathBuf::from("."));
        std::fs::create_dir_all(&out).map_err(|e| HarnessError::Io {
            path: out.clone(),
            source: e,
        })?;
        Ok((config, out))
    }
}

fn input_path(flag: &Option<PathBuf>, config: &ScenarioConfig) -> Result<PathBuf> {
    flag.clone()
        .or_else(|| config.input_csv.clone())
        .ok_or_else(|| HarnessError::Config {
            field: "input_csv".into(),
            line: None,
            message: "no input file; pass --input or set input_csv".into(),
        })
}

fn run(cli: Cli) -> Result<()> {
    let (report, out, raw) = match &cli.command {
        Command::AngleScan { common, raw } => {
            let (config, out) = common.load()?;
            (run_angle_scan(&config)?, out, *raw)
        }
        Command::ConcentrationScan { common, raw } => {
            let (config, out) = common.load()?;
            (run_concentration_scan(&config)?, out, *raw)
        }
        Command::Calibrate { common, input } => {
            let (config, out) = common.load()?;
            let path = input_path(input, &config)?;
            (run_calibrate(&config, &path)?, out, false)
        }
        Command::Analyze { common, input } => {
            let (config, out) = common.load()?;
            let path = input_path(input, &config)?;
            (run_analyze(&config, &path)?, out, false)
        }
    };
    let name = report.experiment.as_str();
    let csv_path = out.join(format!("{name}.csv"));
    let sidecar = emit_csv(&report, &csv_path)?;
    if raw {
        emit_samples(&report, &out.join(format!("{name}_samples.csv")))?;
    }
    for line in report.summary() {
        println!("{line}");
    }
    println!("wrote {} and {}", csv_path.display(), sidecar.display());
    report.status()
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
