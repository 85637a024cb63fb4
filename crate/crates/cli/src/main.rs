use clap::{Parser, Subcommand};
use spin7_cli::commands::{self, LinearArgs, LinearView};
use spin7_cli::report::RunReport;
use spin7_cli::scenario::Scenario;
use spin7_cli::CliError;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

// stdout may be a closed pipe (`spin7 ... | head`); that is not an error
macro_rules! out {
    ($($t:tt)*) => {{
        use std::io::Write;
        let _ = write!(std::io::stdout(), $($t)*);
    }};
}

macro_rules! outln {
    ($($t:tt)*) => {{
        use std::io::Write;
        let _ = writeln!(std::io::stdout(), $($t)*);
    }};
}

#[derive(Parser)]
#[command(name = "spin7", version, about = "Numerical workbench for Spin(7) structures and Cayley 4-forms")]
struct Cli {
    /// Scenario file (JSON)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for report.json, flow.csv and snapshots
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Overrides the frame seed of the scenario; also seeds auxiliary draws
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for per-site loops
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Algebraic identities, lattice identities and convergence orders
    Verify,
    /// Field-equation residuals and their rewritings
    Residual,
    /// Explicit gradient flow; CSV on stdout and in flow.csv
    Flow,
    /// Quadratic kernels at one momentum
    Linear {
        #[arg(long, allow_negative_numbers = true)]
        kappa: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        rho: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        mu: Option<f64>,
        /// Eight momentum components; defaults to a generic direction
        #[arg(long, num_args = 1.., allow_negative_numbers = true, value_delimiter = ',')]
        p: Option<Vec<f64>>,
        #[arg(long, value_enum, default_value = "all")]
        report: LinearView,
    },
    /// The acceptance suite
    Report {
        /// Run a single criterion
        #[arg(long)]
        criterion: Option<u8>,
    },
}

fn scenario(cli: &Cli) -> Result<Scenario, CliError> {
    let path = cli.config.as_ref().ok_or_else(|| CliError::Config("--config is required for this command".into()))?;
    let mut sc = Scenario::load(path)?;
    if let Some(s) = cli.seed {
        sc.frame.with_seed(s);
        sc.validate()?;
    }
    Ok(sc)
}

fn write_report(rep: &RunReport, out: &Path, name: &str) -> Result<(), CliError> {
    std::fs::create_dir_all(out)?;
    std::fs::write(out.join(name), rep.to_json())?;
    Ok(())
}

fn set_threads(n: Option<usize>) -> Result<(), CliError> {
    let Some(n) = n else { return Ok(()) };
    if n == 0 {
        return Err(CliError::Config("--threads must be positive".into()));
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(())
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    set_threads(cli.threads)?;
    let report_name = "report.json";
    let rep = match &cli.command {
        Command::Verify => {
            let sc = scenario(cli)?;
            let rep = commands::verify(&sc)?;
            write_report(&rep, &cli.out, &sc.outputs.report)?;
            rep
        }
        Command::Residual => {
            let sc = scenario(cli)?;
            let rep = commands::residual(&sc, cli.seed.unwrap_or(0))?;
            write_report(&rep, &cli.out, &sc.outputs.report)?;
            rep
        }
        Command::Flow => {
            let sc = scenario(cli)?;
            std::fs::create_dir_all(&cli.out)?;
            let mut buf: Vec<u8> = Vec::new();
            let result = commands::flow(&sc, &cli.out, &mut buf);
            std::fs::write(cli.out.join(&sc.outputs.flow_csv), &buf)?;
            out!("{}", String::from_utf8_lossy(&buf));
            let rep = result?;
            write_report(&rep, &cli.out, &sc.outputs.report)?;
            for r in &rep.rows {
                eprintln!("{}", r.line());
            }
            return Ok(rep.pass);
        }
        Command::Linear { kappa, rho, mu, p, report } => {
            let p = match p {
                Some(v) if v.len() != 8 => return Err(CliError::Config(format!("--p takes 8 components, got {}", v.len()))),
                Some(v) => Some(std::array::from_fn(|i| v[i])),
                None => None,
            };
            let rep = commands::linear(&LinearArgs { kappa: *kappa, rho: *rho, mu: *mu, p, view: *report })?;
            write_report(&rep, &cli.out, report_name)?;
            outln!("{}", rep.to_json());
            return Ok(rep.pass);
        }
        Command::Report { criterion } => {
            let (rep, crits) = commands::acceptance(*criterion)?;
            write_report(&rep, &cli.out, report_name)?;
            for c in &crits {
                outln!("{}", c.line());
            }
            return Ok(rep.pass);
        }
    };
    for r in &rep.rows {
        outln!("{}", r.line());
    }
    outln!("{}", if rep.pass { "all checks passed" } else { "some checks FAILED" });
    Ok(rep.pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("spin7: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
