use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use prophet_core::format::{dump_offline, dump_policy, emit_instance, parse_instance, parse_interim};
use prophet_core::model::{scale_interim, Budget, Instance};
use prophet_core::offline::solve_offline;
use prophet_core::online::{
    check_implementable_direct, check_implementable_sequential, solve_online,
    ImplementabilityCertificate,
};
use prophet_core::verify::{
    default_params, generate_instance, run_campaign, GeneratorParams, KindChoice, Law, Verdict,
};
use prophet_core::{parse_rational, Error, Rational};

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_BUDGET: u8 = 3;
/// The two implementability checks disagreed. Never expected.
const EXIT_INTERNAL: u8 = 4;

#[derive(Parser, Debug)]
#[command(version, about = "Exact LP laboratory for prophet inequalities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Mode {
    Offline,
    Online,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum KindArg {
    Matrix,
    Polymatroid,
    OnlinePolymatroid,
    Minkowski,
}

impl From<KindArg> for KindChoice {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Matrix => KindChoice::Matrix,
            KindArg::Polymatroid => KindChoice::Polymatroid,
            KindArg::OnlinePolymatroid => KindChoice::OnlinePolymatroid,
            KindArg::Minkowski => KindChoice::Minkowski,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print Z_off or Z_on exactly.
    Solve {
        instance: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Offline)]
        mode: Mode,
        /// Write the optimal allocation (by profile) or policy (by history) here
        #[arg(long, value_name = "PATH")]
        dump: Option<PathBuf>,
    },
    /// Run both implementability checks on λ·W* or on an explicit interim file.
    Check {
        instance: PathBuf,
        #[arg(long, value_name = "P/Q", conflicts_with = "interim", required_unless_present = "interim")]
        scale: Option<String>,
        #[arg(long, value_name = "PATH")]
        interim: Option<PathBuf>,
    },
    /// Run a randomized verification campaign and write report.json / report.txt.
    Verify {
        #[arg(long, value_parser = parse_law)]
        law: Law,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Generator parameters as a JSON file (defaults depend on the law)
        #[arg(long, value_name = "PATH")]
        params: Option<PathBuf>,
        #[arg(long, value_name = "DIR", default_value = ".")]
        out_dir: PathBuf,
    },
    /// Write one random instance.
    Generate {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Generator parameters as a JSON file; the flags below override it
        #[arg(long, value_name = "PATH")]
        params: Option<PathBuf>,
        #[arg(long, value_enum)]
        kind: Vec<KindArg>,
        #[arg(long)]
        n_min: Option<usize>,
        #[arg(long)]
        n_max: Option<usize>,
        #[arg(long)]
        support_max: Option<usize>,
        #[arg(long)]
        k_max: Option<usize>,
        #[arg(long)]
        joint: bool,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
}

fn parse_law(s: &str) -> Result<Law, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Failure of a command, mapped onto the exit-code contract.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Budget(String),
    Internal(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Budget { .. } => Failure::Budget(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<Instance, Failure> {
    let budget = Budget::from_env()?;
    parse_instance(&read(path)?, budget)
        .map_err(|e| Failure::from(e).context(&path.display().to_string()))
}

impl Failure {
    fn context(self, what: &str) -> Self {
        match self {
            Failure::Usage(m) => Failure::Usage(format!("{what}: {m}")),
            Failure::Budget(m) => Failure::Budget(format!("{what}: {m}")),
            Failure::Internal(m) => Failure::Internal(format!("{what}: {m}")),
        }
    }
}

fn solve(path: &Path, mode: Mode, dump: Option<&Path>) -> Result<u8, Failure> {
    let instance = load(path)?;
    let (value, doc) = match mode {
        Mode::Offline => {
            let r = solve_offline(&instance)?;
            (r.value, dump_offline(&instance.rewards, &r.allocation))
        }
        Mode::Online => {
            let r = solve_online(&instance)?;
            (r.value, dump_policy(&instance.rewards, &r.policy))
        }
    };
    println!("{value}");
    if let Some(out) = dump {
        let mut text = serde_json::to_string_pretty(&doc).expect("dumps serialize");
        text.push('\n');
        write(out, &text)?;
    }
    Ok(0)
}

fn check(path: &Path, scale: Option<&str>, interim: Option<&Path>) -> Result<u8, Failure> {
    let instance = load(path)?;
    let q = match (scale, interim) {
        (Some(s), _) => {
            let lambda: Rational = parse_rational(s)?;
            let off = solve_offline(&instance)?;
            scale_interim(&off.interim, &lambda)?
        }
        (None, Some(p)) => parse_interim(&read(p)?, &instance.rewards)?,
        (None, None) => return Err(Failure::Usage("need --scale or --interim".into())),
    };
    let direct = check_implementable_direct(&instance, &q)?;
    let sequential = match check_implementable_sequential(&instance, &q) {
        Ok(cert) => Some(cert),
        Err(Error::Unsupported(_)) => None,
        Err(Error::Structural(m)) => return Err(Failure::Internal(m)),
        Err(e) => return Err(e.into()),
    };
    match &sequential {
        Some(cert) if cert.is_implementable() != direct => {
            return Err(Failure::Internal(format!(
                "sequential check says {}, direct check says {}",
                cert.is_implementable(),
                direct
            )));
        }
        Some(_) => println!("checks agree: sequential and direct"),
        None => println!("sequential check not defined for joint rewards; direct check only"),
    }
    match sequential {
        Some(ImplementabilityCertificate::NotImplementable(f)) => {
            println!("NotImplementable");
            println!(
                "stage {}: reward {} needs Q = {} but h = {}",
                f.stage, f.reward, f.demand, f.capacity
            );
        }
        Some(ImplementabilityCertificate::Implementable(policy)) => {
            println!("Implementable");
            println!(
                "{}",
                serde_json::to_string_pretty(&dump_policy(&instance.rewards, &policy))
                    .expect("dumps serialize")
            );
        }
        None if direct => println!("Implementable"),
        None => println!("NotImplementable"),
    }
    Ok(0)
}

fn load_params(path: Option<&Path>, fallback: GeneratorParams) -> Result<GeneratorParams, Failure> {
    match path {
        Some(p) => serde_json::from_str(&read(p)?)
            .map_err(|e| Failure::Usage(format!("{}: {e}", p.display()))),
        None => Ok(fallback),
    }
}

fn verify(
    law: Law,
    trials: usize,
    seed: u64,
    params: Option<&Path>,
    out_dir: &Path,
) -> Result<u8, Failure> {
    let params = load_params(params, default_params(law))?;
    let report = run_campaign(law, trials, seed, &params)?;
    fs::create_dir_all(out_dir)
        .map_err(|e| Failure::Usage(format!("{}: {e}", out_dir.display())))?;
    write(&out_dir.join("report.json"), &report.to_json())?;
    write(&out_dir.join("report.txt"), &report.to_table())?;
    println!(
        "{}: {} trials, {} pass, {} fail, {} skip",
        law.name(),
        report.trials.len(),
        report.passed,
        report.failed,
        report.skipped
    );
    if report.failed == 0 {
        return Ok(0);
    }
    for t in report.trials.iter().filter(|t| t.verdict == Verdict::Fail) {
        let cx = t.counterexample.as_ref().expect("failing records carry a counterexample");
        let path = out_dir.join(format!("counterexample-{}.json", t.index));
        let mut text = serde_json::to_string_pretty(cx).expect("counterexamples serialize");
        text.push('\n');
        write(&path, &text)?;
        println!("FAIL trial {}: {} ({})", t.index, cx.violated, path.display());
    }
    Ok(EXIT_FAIL)
}

#[allow(clippy::too_many_arguments)]
fn generate(
    seed: u64,
    params: Option<&Path>,
    kinds: &[KindArg],
    n_min: Option<usize>,
    n_max: Option<usize>,
    support_max: Option<usize>,
    k_max: Option<usize>,
    joint: bool,
    out: Option<&Path>,
) -> Result<u8, Failure> {
    let mut p = load_params(params, GeneratorParams::default())?;
    p.seed = seed;
    if !kinds.is_empty() {
        p.kinds = kinds.iter().map(|&k| k.into()).collect();
    }
    if let Some(v) = n_min {
        p.n_min = v;
    }
    if let Some(v) = n_max {
        p.n_max = v;
    }
    if let Some(v) = support_max {
        p.support_max = v;
        p.support_min = p.support_min.min(v);
    }
    if let Some(v) = k_max {
        p.k_max = v;
        p.k_min = p.k_min.min(v);
    }
    p.joint |= joint;
    let instance = generate_instance(&p)?;
    let text = emit_instance(&instance);
    match out {
        Some(path) => write(path, &text)?,
        None => print!("{text}"),
    }
    Ok(0)
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Solve {
            instance,
            mode,
            dump,
        } => solve(&instance, mode, dump.as_deref()),
        Command::Check {
            instance,
            scale,
            interim,
        } => check(&instance, scale.as_deref(), interim.as_deref()),
        Command::Verify {
            law,
            trials,
            seed,
            params,
            out_dir,
        } => verify(law, trials, seed, params.as_deref(), &out_dir),
        Command::Generate {
            seed,
            params,
            kind,
            n_min,
            n_max,
            support_max,
            k_max,
            joint,
            out,
        } => generate(
            seed,
            params.as_deref(),
            &kind,
            n_min,
            n_max,
            support_max,
            k_max,
            joint,
            out.as_deref(),
        ),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Budget(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_BUDGET)
        }
        Err(Failure::Internal(m)) => {
            eprintln!("internal consistency failure: {m}");
            ExitCode::from(EXIT_INTERNAL)
        }
    }
}
