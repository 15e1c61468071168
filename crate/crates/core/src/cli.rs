//! Command-line front end. Exit code 0 means every check passed, 1 means a
//! check failed and 2 means the run could not be carried out.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exprs::parse;
use crate::report::{self, FullReport};
use crate::scenario::{AnsatzSpec, ConfigSpec, ConvergenceCheck, Scenario, ScenarioSummary};

/// Version of the JSON envelope written by every command.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Parser)]
#[command(name = "maxwell-hj", version, about = "Covariant and canonical Hamilton-Jacobi checks for free Maxwell fields")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample the covariant residual and symmetric constraint.
    VerifyDdw(Options),
    /// Audit the covariant-to-canonical split on one slice.
    Audit(Options),
    /// Characteristics evolution against the leapfrog reference.
    Evolve(Options),
    /// Refinement study of one check.
    Convergence(Options),
    /// Everything above in one document.
    Report(Options),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AnsatzKind {
    Zero,
    ConstantE,
    PlaneWave,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CheckKind {
    Audit,
    Gauss,
    ChainRule,
    Telescoping,
    Evolve,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Options {
    /// Scenario file; flags below override its values.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, conflicts_with = "table")]
    pub json: bool,
    #[arg(long)]
    pub table: bool,
    #[arg(long, value_enum)]
    pub ansatz: Option<AnsatzKind>,
    /// Field strength of the constant-E ansatz.
    #[arg(long = "E", alias = "e", allow_hyphen_values = true)]
    pub e: Option<f64>,
    /// Plane-wave amplitude.
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<f64>,
    /// Plane-wave mode number along x^1.
    #[arg(long, allow_hyphen_values = true)]
    pub m: Option<i64>,
    /// Plane-wave mode number along x^2.
    #[arg(long, allow_hyphen_values = true)]
    pub m2: Option<i64>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub h: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub t: Option<f64>,
    /// `zero`, `embedded`, `pure-gauge` or `csv:<path>`.
    #[arg(long)]
    pub config: Option<String>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    /// Gauge function used as `A_0` during evolution.
    #[arg(long)]
    pub gauge: Option<String>,
    #[arg(long)]
    pub levels: Option<usize>,
    #[arg(long, value_enum)]
    pub check: Option<CheckKind>,
    /// Write the characteristics trajectory as CSV.
    #[arg(long)]
    pub trajectory: Option<PathBuf>,
}

impl Options {
    /// The scenario file, if any, with flag overrides applied.
    pub fn scenario(&self) -> Result<Scenario> {
        let mut sc = match &self.scenario {
            Some(p) => Scenario::load(p)?,
            None => Scenario::default(),
        };
        if let Some(v) = self.seed {
            sc.seed = v;
        }
        if let Some(v) = self.dim {
            sc.dim = v;
        }
        if let Some(v) = self.n {
            sc.n = v;
        }
        if let Some(v) = self.h {
            sc.h = v;
        }
        if let Some(v) = self.t {
            sc.t = v;
        }
        if let Some(v) = self.dt {
            sc.dt = Some(v);
        }
        if let Some(v) = self.steps {
            sc.steps = v;
        }
        if let Some(v) = self.levels {
            sc.levels = v;
        }
        if let Some(g) = &self.gauge {
            sc.gauge = parse(g)?;
        }
        if let Some(c) = self.check {
            sc.check = match c {
                CheckKind::Audit => ConvergenceCheck::Audit,
                CheckKind::Gauss => ConvergenceCheck::Gauss,
                CheckKind::ChainRule => ConvergenceCheck::ChainRule,
                CheckKind::Telescoping => ConvergenceCheck::Telescoping,
                CheckKind::Evolve => ConvergenceCheck::Evolve,
            };
        }
        if let Some(c) = &self.config {
            sc.config = match c.as_str() {
                "zero" => ConfigSpec::Zero,
                "embedded" => ConfigSpec::Embedded,
                "pure-gauge" => ConfigSpec::PureGauge,
                s => match s.strip_prefix("csv:") {
                    Some(p) => {
                        sc.base_dir = None;
                        ConfigSpec::Csv(PathBuf::from(p))
                    }
                    None => return Err(Error::InvalidArgument(format!("unknown configuration '{s}'"))),
                },
            };
        }
        self.apply_ansatz(&mut sc)?;
        sc.validate()?;
        Ok(sc)
    }

    fn apply_ansatz(&self, sc: &mut Scenario) -> Result<()> {
        let kind = match self.ansatz {
            Some(k) => k,
            None => {
                // bare parameter flags adjust a builtin from the scenario
                match &mut sc.ansatz {
                    AnsatzSpec::ConstantElectric { e } => {
                        if let Some(v) = self.e {
                            *e = v;
                        }
                    }
                    AnsatzSpec::PlaneWave { amplitude, modes } => {
                        if let Some(v) = self.a {
                            *amplitude = v;
                        }
                        if let Some(v) = self.m {
                            modes[0] = v;
                        }
                        if let Some(v) = self.m2 {
                            modes.resize(1, 0);
                            modes.push(v);
                        }
                    }
                    _ => {}
                }
                return Ok(());
            }
        };
        sc.ansatz = match kind {
            AnsatzKind::Zero => AnsatzSpec::Zero,
            AnsatzKind::ConstantE => AnsatzSpec::ConstantElectric { e: self.e.unwrap_or(1.0) },
            AnsatzKind::PlaneWave => {
                let mut modes = vec![self.m.unwrap_or(1)];
                if let Some(m2) = self.m2 {
                    modes.push(m2);
                }
                AnsatzSpec::PlaneWave { amplitude: self.a.unwrap_or(0.1), modes }
            }
        };
        Ok(())
    }
}

#[derive(Debug, Serialize)]
struct Envelope<'a, T: Serialize> {
    schema: u32,
    command: &'a str,
    seed: u64,
    scenario: ScenarioSummary,
    passed: bool,
    result: &'a T,
}

/// Rendered output of one command.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub passed: bool,
    pub text: String,
}

fn render<T: Serialize>(
    command: &str,
    sc: &Scenario,
    opts: &Options,
    passed: bool,
    result: &T,
    table: impl FnOnce() -> String,
) -> Result<Outcome> {
    let text = if opts.table {
        table()
    } else {
        let env = Envelope { schema: SCHEMA_VERSION, command, seed: sc.seed, scenario: sc.summary(), passed, result };
        let mut s = serde_json::to_string_pretty(&env)?;
        s.push('\n');
        s
    };
    Ok(Outcome { passed, text })
}

/// Runs one command and renders its report without touching stdout.
pub fn execute(command: &Command) -> Result<Outcome> {
    let (name, opts) = match command {
        Command::VerifyDdw(o) => ("verify-ddw", o),
        Command::Audit(o) => ("audit", o),
        Command::Evolve(o) => ("evolve", o),
        Command::Convergence(o) => ("convergence", o),
        Command::Report(o) => ("report", o),
    };
    let sc = opts.scenario()?;
    let out = match command {
        Command::VerifyDdw(_) => {
            let r = report::run_verify_ddw(&sc)?;
            render(name, &sc, opts, r.passed, &r, || report::ddw_table(&r))?
        }
        Command::Audit(_) => {
            let r = report::run_scenario_audit(&sc)?;
            render(name, &sc, opts, r.passed(), &r, || r.to_table())?
        }
        Command::Evolve(_) => {
            let (r, traj) = report::run_evolve(&sc)?;
            if let Some(p) = &opts.trajectory {
                let f = std::fs::File::create(p)?;
                report::write_trajectory_csv(&traj, std::io::BufWriter::new(f))?;
            }
            render(name, &sc, opts, r.passed, &r, || report::evolve_table(&r))?
        }
        Command::Convergence(_) => {
            let r = report::convergence(&sc)?;
            render(name, &sc, opts, r.passed, &r, || report::convergence_table(&r))?
        }
        Command::Report(_) => {
            let r: FullReport = report::run_full(&sc)?;
            render(name, &sc, opts, r.passed, &r, || report::full_table(&r))?
        }
    };
    if let Some(p) = &opts.out {
        write_file(p, &out.text)?;
    }
    Ok(out)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text)?;
    Ok(())
}

/// Parses arguments, runs the command and maps the verdict to an exit code.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let to_stdout = match &cli.command {
        Command::VerifyDdw(o) | Command::Audit(o) | Command::Evolve(o) | Command::Convergence(o) | Command::Report(o) => {
            o.out.is_none()
        }
    };
    match execute(&cli.command) {
        Ok(out) => {
            if to_stdout {
                print!("{}", out.text);
            }
            if out.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
