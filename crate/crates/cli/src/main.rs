use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use hamlocal::ae::QaeMode;
use hamlocal::harness::{self, Command, Format, HamiltonianSource, Mode, RunConfig};
use hamlocal::lower_bound::TesterKind;
use hamlocal::oracle::AccessFlags;
use hamlocal::trials::{available_workers, WorkerPool};
use hamlocal::{Error, Result};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CommandArg {
    Test,
    Sweep,
    Verify,
    Lowerbound,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AlgorithmArg {
    Trotter,
    Ae,
    Baseline,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Montecarlo,
    Exact,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum QaeModeArg {
    Ideal,
    Kernel,
    Circuit,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, ValueEnum)]
enum Capability {
    Forward,
    Inverse,
    Controlled,
}

/// Property testing of Hamiltonian locality from time-evolution access.
#[derive(Debug, Parser)]
#[command(name = "hamlocal", version)]
struct Cli {
    command: CommandArg,

    /// Hamiltonian file: one `<pauli-word> <coefficient>` term per line, `#` comments.
    #[arg(long, conflicts_with = "generator")]
    hamiltonian: Option<PathBuf>,

    /// Generated Hamiltonian, e.g. `zchain:n=3,k-prime=3,eps=0.6` or
    /// `random-pauli:n=3,terms=10,seed=5,target-norm=1`.
    #[arg(long)]
    generator: Option<String>,

    #[arg(long, default_value_t = 0.0)]
    eps1: f64,
    #[arg(long, default_value_t = 0.6)]
    eps2: f64,
    #[arg(long, default_value_t = 1.0 / 3.0)]
    delta: f64,
    #[arg(long, default_value_t = 1)]
    k: usize,

    #[arg(long, value_enum, default_value = "trotter")]
    algorithm: AlgorithmArg,
    #[arg(long, value_enum, default_value = "montecarlo")]
    mode: ModeArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Oracle capabilities granted to the tester.
    #[arg(
        long,
        value_enum,
        value_delimiter = ',',
        default_value = "forward,inverse,controlled"
    )]
    access: Vec<Capability>,

    /// Norm constant for the amplitude-estimation thresholds.
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[arg(long, value_enum, default_value = "kernel")]
    qae_mode: QaeModeArg,

    /// Gap values for `sweep`, comma separated.
    #[arg(long, num_args = 0.., value_delimiter = ',')]
    gaps: Option<Vec<f64>>,
    #[arg(long, default_value_t = 200)]
    reps: u64,
    #[arg(long, default_value_t = 3)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    k_prime: usize,
    /// Evolution times for `lowerbound`, comma separated.
    #[arg(long, num_args = 0.., value_delimiter = ',')]
    times: Option<Vec<f64>>,

    #[arg(long, default_value_t = 50)]
    suite_size: usize,
    /// Scales the Trotter step in `verify` while keeping the nominal bounds.
    #[arg(long, default_value_t = 1.0, hide = true)]
    step_scale: f64,

    /// Defaults to csv for `sweep` and json otherwise.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    #[arg(long, env = "HAMLOCAL_WORKERS")]
    workers: Option<usize>,
    /// Write the report here instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

fn field<T: std::str::FromStr>(kind: &str, key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Usage(format!("{kind}: bad value {value:?} for {key}")))
}

fn parse_generator(text: &str) -> Result<HamiltonianSource> {
    let (kind, rest) = text.split_once(':').unwrap_or((text, ""));
    let mut n = None;
    let mut k_prime = None;
    let mut eps = None;
    let mut terms = None;
    let mut seed = 0;
    let mut target_norm = 1.0;
    for pair in rest.split(',').filter(|p| !p.is_empty()) {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| Error::Usage(format!("{kind}: expected key=value, got {pair:?}")))?;
        match key {
            "n" => n = Some(field(kind, key, value)?),
            "k-prime" => k_prime = Some(field(kind, key, value)?),
            "eps" => eps = Some(field(kind, key, value)?),
            "terms" => terms = Some(field(kind, key, value)?),
            "seed" => seed = field(kind, key, value)?,
            "target-norm" => target_norm = field(kind, key, value)?,
            _ => return Err(Error::Usage(format!("{kind}: unknown key {key:?}"))),
        }
    }
    let missing = |key: &str| Error::Usage(format!("{kind}: missing {key}"));
    match kind {
        "zchain" => Ok(HamiltonianSource::Zchain {
            n: n.ok_or_else(|| missing("n"))?,
            k_prime: k_prime.ok_or_else(|| missing("k-prime"))?,
            eps: eps.ok_or_else(|| missing("eps"))?,
        }),
        "random-pauli" => Ok(HamiltonianSource::RandomPauli {
            n: n.ok_or_else(|| missing("n"))?,
            terms: terms.ok_or_else(|| missing("terms"))?,
            seed,
            target_norm,
        }),
        _ => Err(Error::Usage(format!(
            "unknown generator {kind:?}; expected zchain or random-pauli"
        ))),
    }
}

fn resolve(cli: &Cli) -> Result<RunConfig> {
    let defaults = RunConfig::default();
    let command = match cli.command {
        CommandArg::Test => Command::Test,
        CommandArg::Sweep => Command::Sweep,
        CommandArg::Verify => Command::Verify,
        CommandArg::Lowerbound => Command::Lowerbound,
    };
    let hamiltonian = match (&cli.hamiltonian, &cli.generator) {
        (Some(path), _) => Some(HamiltonianSource::File {
            path: path.display().to_string(),
        }),
        (None, Some(g)) => Some(parse_generator(g)?),
        (None, None) => None,
    };
    let format = match cli.format {
        Some(FormatArg::Json) => Format::Json,
        Some(FormatArg::Csv) => Format::Csv,
        None if command == Command::Sweep => Format::Csv,
        None => Format::Json,
    };
    Ok(RunConfig {
        command,
        hamiltonian,
        eps1: cli.eps1,
        eps2: cli.eps2,
        delta: cli.delta,
        k: cli.k,
        algorithm: match cli.algorithm {
            AlgorithmArg::Trotter => TesterKind::Trotter,
            AlgorithmArg::Ae => TesterKind::Ae,
            AlgorithmArg::Baseline => TesterKind::Baseline,
        },
        mode: match cli.mode {
            ModeArg::Montecarlo => Mode::Montecarlo,
            ModeArg::Exact => Mode::Exact,
        },
        seed: cli.seed,
        access: AccessFlags {
            forward: cli.access.contains(&Capability::Forward),
            inverse: cli.access.contains(&Capability::Inverse),
            controlled: cli.access.contains(&Capability::Controlled),
        },
        c: cli.c,
        qae_mode: match cli.qae_mode {
            QaeModeArg::Ideal => QaeMode::Ideal,
            QaeModeArg::Kernel => QaeMode::Kernel,
            QaeModeArg::Circuit => QaeMode::Circuit,
        },
        gaps: cli.gaps.clone().unwrap_or(defaults.gaps),
        reps: cli.reps,
        n: cli.n,
        k_prime: cli.k_prime,
        times: cli.times.clone().unwrap_or(defaults.times),
        suite_size: cli.suite_size,
        step_scale: cli.step_scale,
        format,
    })
}

fn execute(cli: &Cli) -> Result<i32> {
    let cfg = resolve(cli)?;
    let pool = WorkerPool::new(cli.workers.unwrap_or_else(available_workers));
    let out = harness::run(&cfg, &pool)?;
    for note in &out.diagnostics {
        eprintln!("{note}");
    }
    match &cli.output {
        Some(path) => std::fs::write(path, &out.body)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            match stdout
                .write_all(out.body.as_bytes())
                .and_then(|()| stdout.flush())
            {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => return Err(e.into()),
                _ => {}
            }
        }
    }
    Ok(out.exit_code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match execute(&cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            harness::error_exit_code(&err)
        }
    };
    ExitCode::from(code as u8)
}
