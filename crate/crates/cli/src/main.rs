use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use trih_core::commands::{cmd_check, cmd_tables, cmd_verify, FanCycleFile, InputError, Options, Report, VerifySelection, Which};
use trih_core::ihomology::Structure;

#[derive(Parser)]
#[command(name = "trih", version, about = "Tropical intersection homology of compactified fan cycles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a fan-cycle file.
    Check {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Chow dimensions, pairing matrices and Num ranks.
    Chow {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Tropical cohomology table H^{p,q}.
    Hcoh {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Tropical intersection homology table IH^{p,q}.
    Ih {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Compare tables against the expected identities.
    Verify {
        file: PathBuf,
        #[arg(long)]
        all: bool,
        #[arg(long)]
        theorem61: bool,
        #[arg(long)]
        duality: bool,
        #[arg(long)]
        subdivision: bool,
        /// Second factor for the Künneth check.
        #[arg(long, value_name = "FILE")]
        kunneth: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// Also check that cones meet along common faces.
    #[arg(long)]
    geometric: bool,
    #[arg(long, value_enum, default_value_t = StructureArg::Barycentric)]
    structure: StructureArg,
    /// Largest accepted lattice rank.
    #[arg(long, default_value_t = 4)]
    max_dim: usize,
    /// Human-readable output instead of JSON.
    #[arg(long)]
    pretty: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum StructureArg {
    Native,
    Barycentric,
}

impl Common {
    fn options(&self) -> Options {
        let structure = match self.structure {
            StructureArg::Native => Structure::Native,
            StructureArg::Barycentric => Structure::Barycentric,
        };
        Options { structure, geometric: self.geometric, max_dim: self.max_dim }
    }
}

fn load(path: &PathBuf) -> Result<(FanCycleFile, String), InputError> {
    FanCycleFile::read(path)
}

fn run(cli: Cli) -> Result<(Report, bool), InputError> {
    match cli.command {
        Command::Check { file, common } => {
            let (f, dg) = load(&file)?;
            Ok((cmd_check(&f, &dg, &common.options())?, common.pretty))
        }
        Command::Chow { file, common } => tables(&file, Which::Chow, &common),
        Command::Hcoh { file, common } => tables(&file, Which::Hcoh, &common),
        Command::Ih { file, common } => tables(&file, Which::Ih, &common),
        Command::Verify { file, all, theorem61, duality, subdivision, kunneth, common } => {
            let (f, dg) = load(&file)?;
            let other = kunneth.as_ref().map(load).transpose()?;
            let none = !(theorem61 || duality || subdivision || kunneth.is_some());
            let sel = if all || none { VerifySelection::all() } else { VerifySelection { theorem61, duality, subdivision } };
            let r = cmd_verify(&f, &dg, sel, other.as_ref().map(|o| &o.0), &common.options())?;
            Ok((r, common.pretty))
        }
    }
}

fn tables(file: &PathBuf, which: Which, common: &Common) -> Result<(Report, bool), InputError> {
    let (f, dg) = load(file)?;
    Ok((cmd_tables(&f, &dg, which, &common.options())?, common.pretty))
}

fn threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("TRIH_THREADS") {
        let n: usize = v.parse().with_context(|| format!("TRIH_THREADS={v:?} is not a thread count"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(2);
    }
    match run(cli) {
        Ok((report, pretty)) => {
            if pretty {
                print!("{}", report.render());
            } else {
                println!("{}", report.to_json());
            }
            for c in report.checks.iter().filter(|c| !c.passed()) {
                eprintln!("check failed: {}: {}", c.name, c.details);
            }
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
