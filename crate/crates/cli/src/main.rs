use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use deepssm::convert::{
    collapse_dense, expand_coefficients, factorize_with_width, minimal_depth, minimal_width, reduce_normal,
    FactorizeOptions,
};
use deepssm::fit::{teacher_student_experiment, ImpulseSweep, TeacherStudentConfig};
use deepssm::io::{self, AnyModel};
use deepssm::{check_membership, kernel_closed_form, Error, Recurrence, ShallowRealization, StabilityPolicy};

#[derive(Parser)]
#[command(name = "deepssm", version, about = "Deep linear state-space model toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Io {
    /// Input file (model JSON, or experiment config JSON).
    #[arg(long)]
    input: PathBuf,
    /// Output file; standard output when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Fail instead of warning when a state matrix has spectral radius >= 1.
    #[arg(long)]
    strict_stability: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Sim,
    Closed,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Impulse response of a model as CSV (t,re,im).
    Kernel {
        #[command(flatten)]
        io: Io,
        #[arg(long, default_value_t = deepssm::DEFAULT_HORIZON)]
        horizon: usize,
        #[arg(long, value_enum, default_value = "sim")]
        method: Method,
    },
    /// Equivalent one-layer model of width l*m (dense state matrix).
    Collapse {
        #[command(flatten)]
        io: Io,
    },
    /// Deep diagonal model of depth l realizing a one-layer model.
    Factorize {
        #[command(flatten)]
        io: Io,
        #[arg(long)]
        depth: usize,
        /// Student width; defaults to the smallest that holds the teacher.
        #[arg(long)]
        width: Option<usize>,
        /// Where to write the norm certificate JSON; standard error when omitted.
        #[arg(long)]
        certificate: Option<PathBuf>,
        /// Jitter repeated or zero teacher eigenvalues instead of failing.
        #[arg(long)]
        allow_perturb: bool,
        /// Pad the teacher with zero-weight modes up to the student's capacity.
        #[arg(long)]
        pad: bool,
    },
    /// Per-eigenvalue coefficients of the equivalent one-layer model.
    Expand {
        #[command(flatten)]
        io: Io,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Membership report for the class with parameter bound c; exit 1 if outside.
    Verify {
        #[command(flatten)]
        io: Io,
        #[arg(long)]
        bound: f64,
    },
    /// Depth and width that bring a bound-c1 model under bound c2.
    PlanDepth {
        #[arg(long)]
        c1: f64,
        #[arg(long)]
        c2: f64,
        /// The teacher has up to K+1 modes.
        #[arg(long = "K", visible_alias = "k")]
        k: usize,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Fit impulse targets across depths at fixed effective width; records CSV.
    TrainImpulse {
        #[command(flatten)]
        io: Io,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        real_params: bool,
    },
    /// Factorize random teachers across depths and record parameter norms; CSV.
    TeacherStudent {
        #[command(flatten)]
        io: Io,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        real_params: bool,
        #[arg(long)]
        allow_perturb: bool,
    },
}

fn emit(output: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match output {
        Some(path) => io::write_atomic(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            std::io::stdout().lock().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn load(io: &Io) -> anyhow::Result<AnyModel> {
    let model = io::read_model(&io.input).with_context(|| format!("reading {}", io.input.display()))?;
    let policy = if io.strict_stability {
        StabilityPolicy::Strict
    } else {
        StabilityPolicy::Warn
    };
    match &model {
        AnyModel::Diagonal(m) => m.check_stability(policy)?,
        AnyModel::Dense(m) => m.check_stability(policy)?,
    }
    Ok(model)
}

fn read_config<T: serde::de::DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let config = serde_json::from_str(&text).map_err(Error::from)?;
    Ok(config)
}

/// Outcome of a verb that ran to completion.
enum Status {
    Done,
    NotMember,
}

fn run(cli: Cli) -> anyhow::Result<Status> {
    match cli.command {
        Command::Kernel { io, horizon, method } => {
            let model = load(&io)?;
            let kernel = match method {
                Method::Sim => model.to_dense().kernel_by_simulation(horizon)?,
                Method::Closed => {
                    let Some(diag) = model.as_diagonal() else {
                        bail!(Error::ShapeMismatch("the closed form needs diagonal state matrices".into()));
                    };
                    kernel_closed_form(&diag, horizon)?
                }
            };
            emit(io.output.as_deref(), &io::kernel_to_csv(&kernel)?)?;
        }
        Command::Collapse { io } => {
            let model = load(&io)?;
            emit(io.output.as_deref(), &io::dense_model_to_json(&collapse_dense(&model.to_dense())))?;
        }
        Command::Factorize {
            io,
            depth,
            width,
            certificate,
            allow_perturb,
            pad,
        } => {
            let teacher = match load(&io)? {
                AnyModel::Diagonal(m) => ShallowRealization::from_model(&m)?,
                AnyModel::Dense(m) => match m.as_diagonal() {
                    Some(d) => ShallowRealization::from_model(&d)?,
                    None => reduce_normal(&m)?,
                },
            };
            if depth == 0 {
                bail!(Error::Domain("--depth must be at least 1".into()));
            }
            let width = width.unwrap_or_else(|| minimal_width(teacher.width(), depth));
            let opts = FactorizeOptions {
                allow_perturb,
                allow_padding: pad,
            };
            let (student, cert) = factorize_with_width(&teacher, depth, width, opts)?;
            emit(io.output.as_deref(), &io::model_to_json(&student))?;
            match certificate {
                Some(path) => io::write_atomic(&path, &to_json(&cert))?,
                None => eprint!("{}", to_json(&cert)),
            }
        }
        Command::Expand { io, format } => {
            let Some(model) = load(&io)?.as_diagonal() else {
                bail!(Error::ShapeMismatch("expansion needs diagonal state matrices".into()));
            };
            let table = expand_coefficients(&model)?;
            let text = match format {
                Format::Csv => io::expansion_to_csv(&table)?,
                Format::Json => to_json(&table),
            };
            emit(io.output.as_deref(), &text)?;
        }
        Command::Verify { io, bound } => {
            let Some(model) = load(&io)?.as_diagonal() else {
                bail!(Error::ShapeMismatch("membership is defined for diagonal state matrices".into()));
            };
            let report = check_membership(&model, bound)?;
            emit(io.output.as_deref(), &to_json(&report))?;
            if !report.is_member {
                return Ok(Status::NotMember);
            }
        }
        Command::PlanDepth { c1, c2, k, output } => {
            let plan = minimal_depth(c1, c2, k)?;
            emit(output.as_deref(), &to_json(&plan))?;
        }
        Command::TrainImpulse { io, seed, real_params } => {
            let mut sweep: ImpulseSweep = read_config(&io.input)?;
            if let Some(seed) = seed {
                sweep.train.seed = seed;
            }
            sweep.train.real_params |= real_params;
            let records = sweep.run()?;
            emit(io.output.as_deref(), &io::records_to_csv(&records)?)?;
        }
        Command::TeacherStudent {
            io,
            seed,
            real_params,
            allow_perturb,
        } => {
            let mut config: TeacherStudentConfig = read_config(&io.input)?;
            if let Some(seed) = seed {
                config.seed = seed;
            }
            config.real_params |= real_params;
            config.allow_perturb |= allow_perturb;
            let records = teacher_student_experiment(&config)?;
            emit(io.output.as_deref(), &io::records_to_csv(&records)?)?;
        }
    }
    Ok(Status::Done)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(Status::Done) => ExitCode::SUCCESS,
        Ok(Status::NotMember) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            let numerical = err.chain().any(|e| e.downcast_ref::<Error>().is_some_and(Error::is_numerical));
            ExitCode::from(if numerical { 3 } else { 2 })
        }
    }
}
