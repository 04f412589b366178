use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use dde_bounds::input::{parse_history, parse_model, Range};
use dde_bounds::numfmt::to_json_string;
use dde_bounds::report::{self, SimulationSettings, SweepParam, Value};
use dde_bounds::{Error, MapModel};

/// Attractor bounds, delay thresholds and simulations for
/// x'(t) = -mu x(t) + f(x(t - tau)).
#[derive(Parser, Debug)]
#[command(name = "dde-bounds", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Equilibria, attractor intervals, delay thresholds and dichotomy case
    Analyze {
        #[command(flatten)]
        model: ModelArgs,
        /// delay at which to evaluate the delay-dependent conditions
        #[arg(long)]
        tau: Option<f64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Integrate the delay equation and check the tail against the bounds
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        tau: f64,
        /// final time (default max(50 tau, 200/mu))
        #[arg(long = "T")]
        t_end: Option<f64>,
        /// RK4 steps per delay interval (default max(100, tau/0.05))
        #[arg(long = "N")]
        steps: Option<usize>,
        /// initial history: const:<c> or eq-perturb
        #[arg(long)]
        history: Option<String>,
        /// fraction of the run discarded before collecting tail statistics
        #[arg(long, default_value_t = 0.8)]
        discard: f64,
        /// tolerance for the interval checks
        #[arg(long, default_value_t = 0.01)]
        tol: f64,
        /// keep every k-th trajectory point in the CSV
        #[arg(long, default_value_t = 1)]
        stride: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Tabulate the analysis over a range of mu or tau (CSV)
    Sweep {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_enum, default_value_t = Param::Mu)]
        param: Param,
        /// lo:hi:step
        #[arg(long)]
        range: String,
        /// worker threads (default: available cores)
        #[arg(long)]
        workers: Option<usize>,
        /// output file (default stdout)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recompute a published example and compare with the printed values
    Reproduce {
        /// dataset name
        name: String,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Args, Debug)]
struct ModelArgs {
    /// model file (JSON) or family name: nicholson, mackey_glass, custom
    #[arg(long, default_value = "nicholson")]
    model: String,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    n: Option<f64>,
    /// feedback f(x) for the custom family, e.g. "30*(x + x^2.5)/(2 + 35*x^3)"
    #[arg(long)]
    expr: Option<String>,
}

#[derive(Args, Debug)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// output file (default stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Param {
    Mu,
    Tau,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Lib(Error),
    Io(io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Lib(e) if e.is_inapplicable() => 2,
            Failure::Lib(e) if e.is_numerical() => 3,
            _ => 1,
        }
    }
}

const FAMILIES: [&str; 3] = ["nicholson", "mackey_glass", "custom"];

impl ModelArgs {
    fn build(&self, fallback_mu: Option<f64>) -> Result<MapModel, Failure> {
        if !FAMILIES.contains(&self.model.as_str()) {
            let text = fs::read_to_string(&self.model)
                .map_err(|e| Failure::Usage(format!("cannot read model file '{}': {e}", self.model)))?;
            let model = parse_model(&text)?;
            return Ok(match self.mu {
                Some(mu) => model.with_mu(mu)?,
                None => model,
            });
        }
        let mu = self
            .mu
            .or(fallback_mu)
            .ok_or_else(|| Failure::Usage("--mu is required".into()))?;
        let wrong = |flag: &str| Failure::Usage(format!("--{flag} does not apply to the {} family", self.model));
        Ok(match self.model.as_str() {
            "nicholson" => {
                if self.n.is_some() {
                    return Err(wrong("n"));
                }
                if self.expr.is_some() {
                    return Err(wrong("expr"));
                }
                MapModel::nicholson(self.p.unwrap_or(1.0), self.gamma.unwrap_or(1.0), mu)?
            }
            "mackey_glass" => {
                if self.gamma.is_some() {
                    return Err(wrong("gamma"));
                }
                if self.expr.is_some() {
                    return Err(wrong("expr"));
                }
                MapModel::mackey_glass(self.p.unwrap_or(2.0), self.n.unwrap_or(20.0), mu)?
            }
            _ => {
                if self.p.is_some() || self.gamma.is_some() || self.n.is_some() {
                    return Err(Failure::Usage("the custom family takes --expr only".into()));
                }
                let expr = self
                    .expr
                    .as_deref()
                    .ok_or_else(|| Failure::Usage("--expr is required for the custom family".into()))?;
                MapModel::expression(expr, mu)?
            }
        })
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}

fn render(v: &Value, format: Format) -> String {
    match format {
        Format::Json => to_json_string(v),
        Format::Text => report::to_text(v),
        Format::Csv => report::to_key_value_csv(v),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Analyze { model, tau, output } => {
            let model = model.build(None)?;
            let v = report::analysis_json(&model, tau)?;
            emit(output.out.as_deref(), &render(&v, output.format))
        }
        Command::Simulate { model, tau, t_end, steps, history, discard, tol, stride, output } => {
            if !(tau > 0.0 && tau.is_finite()) {
                return Err(Failure::Usage(format!("--tau must be positive, got {tau}")));
            }
            let model = model.build(None)?;
            let mut settings = SimulationSettings::new(tau);
            settings.t_end = t_end;
            settings.steps_per_delay = steps;
            settings.history = history.as_deref().map(parse_history).transpose()?;
            settings.discard_fraction = discard;
            settings.tol = tol;
            let (traj, v) = report::simulate(&model, &settings)?;
            let csv = report::trajectory_csv(&traj, stride);
            match (output.out.as_deref(), output.format) {
                (Some(path), format) => {
                    fs::write(path, csv)?;
                    let fmt = if format == Format::Csv { Format::Text } else { format };
                    emit(None, &render(&v, fmt))
                }
                (None, Format::Csv) => emit(None, &csv),
                (None, format) => emit(None, &render(&v, format)),
            }
        }
        Command::Sweep { model, param, range, workers, out } => {
            let range = Range::parse(&range)?;
            let values = range.points();
            let (model, param) = match param {
                Param::Mu => (model.build(values.first().copied())?, SweepParam::Mu),
                Param::Tau => (model.build(None)?, SweepParam::Tau),
            };
            let workers = workers
                .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
            if workers == 0 {
                return Err(Failure::Usage("--workers must be at least 1".into()));
            }
            let csv = report::sweep_csv(&model, param, &values, workers)?;
            emit(out.as_deref(), &csv)
        }
        Command::Reproduce { name, output } => {
            let v = report::reproduce_json(&name)?;
            let format = if output.format == Format::Text && output.out.is_some() { Format::Json } else { output.format };
            emit(output.out.as_deref(), &render(&v, format))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            let code = failure.exit_code();
            match failure {
                Failure::Usage(msg) => eprintln!("error: {msg}"),
                Failure::Lib(e) => eprintln!("error: {e}"),
                Failure::Io(e) => eprintln!("error: {e}"),
            }
            ExitCode::from(code)
        }
    }
}
