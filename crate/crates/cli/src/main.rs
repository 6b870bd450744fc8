use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use hidden_inverse::lindblad::{ms_gate_channel, LindbladSpec};
use hidden_inverse_cli::compile::{compile_file, Pass};
use hidden_inverse_cli::{sweep, CliError, CliResult};

#[derive(Parser)]
#[command(name = "hinv", version, about = "Hidden-inverse sweeps, compiler passes and pulse-level PTMs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum PassName {
    Hidden,
    Rc,
    Sk1,
}

#[derive(Subcommand)]
enum Command {
    /// Run the sweep described by a TOML config and write its CSV.
    Sweep { config: PathBuf },
    /// Compile a circuit file with one pass and print the site report.
    Compile {
        input: PathBuf,
        output: PathBuf,
        #[arg(long, value_enum)]
        pass: PassName,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Largest |enclosed angle| (rad) for which the closing gate is inverted.
        #[arg(long, default_value_t = std::f64::consts::FRAC_PI_2, allow_negative_numbers = true)]
        threshold: f64,
    },
    /// Integrate a pulse-level spec and write its two-qubit PTM as CSV.
    Ptm { spec: PathBuf, output: PathBuf },
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Sweep { config } => {
            let out = sweep::run_file(&config)?;
            println!("wrote {}", out.display());
        }
        Command::Compile {
            input,
            output,
            pass,
            seed,
            threshold,
        } => {
            let pass = match pass {
                PassName::Hidden => Pass::Hidden { threshold },
                PassName::Rc => Pass::Rc { seed },
                PassName::Sk1 => Pass::Sk1,
            };
            print!("{}", compile_file(&input, &output, pass)?);
        }
        Command::Ptm { spec, output } => {
            let spec = LindbladSpec::from_file(&spec)?;
            let ptm = ms_gate_channel(&spec)?;
            std::fs::write(&output, ptm.to_csv())
                .map_err(|e| CliError::Config(format!("{}: {e}", output.display())))?;
            println!("wrote {}", output.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hinv: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
