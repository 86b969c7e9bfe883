//! `plwe`: scan PLWE instances for small-order roots, run seeded attack
//! campaigns, print the analytic tables and replay recorded samples.
//!
//! Exit codes: 0 success, 2 config or input error, 3 precondition refused,
//! 1 anything else (i/o).

use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use plwe_core::analysis::f_of_r_csv;
use plwe_core::harness::{
    analyze, prepare, replay, run_campaign, AnalyzeOptions, AnalyzeReport, CampaignError, ConfigError,
    ExperimentConfig, OutputFormat, Validated,
};
use plwe_core::sampling::{read_samples, SamplerError};
use plwe_core::scan::{scan_instance, RootKind, VulnReport};

#[derive(Parser)]
#[command(name = "plwe", version, about = "Root-based PLWE scanner and attack runner")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Subcommand)]
enum Command {
    /// List small-order roots and which attacks apply to them.
    Scan,
    /// Run the configured attack over seeded PLWE/uniform trials.
    Attack {
        /// Write each trial's samples to DIR/trial_NNNNN.jsonl.
        #[arg(long, value_name = "DIR")]
        record_samples: Option<PathBuf>,
    },
    /// δ, Δ, distribution ratio and minimal-M tables per root.
    Analyze {
        /// Monte Carlo draws of real error polynomials per root (0 = skip).
        #[arg(long, default_value_t = 0)]
        mc_draws: u64,
        /// Also write f(r) on (0, 4√2] as CSV.
        #[arg(long, value_name = "PATH")]
        f_csv: Option<PathBuf>,
    },
    /// Re-run the configured attack on a recorded sample file.
    Replay {
        #[arg(long, value_name = "PATH")]
        samples: PathBuf,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Worker threads for the trial pool (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_name = "PATH")]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[arg(long, global = true)]
    honest_sampling: bool,
    /// Extra posterior target for the minimal-M table.
    #[arg(long = "min-M", global = true, value_name = "TARGET")]
    min_m: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

enum Failure {
    Config(String),
    Refused(String),
    Other(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Refused(_) => 3,
            Failure::Other(_) => 1,
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<CampaignError> for Failure {
    fn from(e: CampaignError) -> Self {
        match e {
            CampaignError::Refused { inequality } => Failure::Refused(inequality),
            CampaignError::Config(c) => c.into(),
            other => Failure::Other(other.to_string()),
        }
    }
}

impl From<SamplerError> for Failure {
    fn from(e: SamplerError) -> Self {
        match e {
            SamplerError::Io(msg) => Failure::Other(msg),
            other => Failure::Config(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Config(m) | Failure::Other(m) => eprintln!("error: {m}"),
                Failure::Refused(m) => eprintln!("precondition refused: {m}"),
            }
            ExitCode::from(f.code())
        }
    }
}

/// Loads the config and applies the flag overrides before validation.
fn load(c: &Common) -> Result<Validated, Failure> {
    let path = c
        .config
        .as_ref()
        .ok_or_else(|| Failure::Config("config: --config PATH is required".into()))?;
    let mut cfg = ExperimentConfig::from_path(path)?;
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if c.honest_sampling {
        cfg.honest_sampling = true;
    }
    if let Some(t) = c.trials {
        match cfg.attack.as_mut() {
            Some(a) => a.trials = t,
            None => return Err(Failure::Config("attack: --trials needs an attack block".into())),
        }
    }
    let out = cfg.output.get_or_insert_with(Default::default);
    if let Some(p) = &c.output {
        out.path = Some(p.clone());
    }
    if let Some(f) = c.format {
        out.format = match f {
            Format::Json => OutputFormat::Json,
            Format::Csv => OutputFormat::Csv,
        };
    }
    Ok(cfg.validate()?)
}

fn emit(v: &Validated, text: String) -> Result<(), Failure> {
    match &v.output.path {
        Some(p) => {
            std::fs::write(p, &text).map_err(|e| Failure::Other(format!("{}: {e}", p.display())))?;
            eprintln!("wrote {}", p.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn json<T: Serialize>(x: &T) -> String {
    let mut s = serde_json::to_string_pretty(x).expect("serializable");
    s.push('\n');
    s
}

fn csv_rows<R: Serialize>(rows: impl IntoIterator<Item = R>) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Failure::Other(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::Other(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(n) = cli.common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Other(e.to_string()))?;
    }
    let v = load(&cli.common)?;
    match cli.cmd {
        Command::Scan => cmd_scan(&v),
        Command::Attack { record_samples } => {
            let p = prepare(&v)?;
            let trials = v.plan.as_ref().map_or(1, |pl| pl.trials);
            eprintln!("precondition: {}", p.predicted.precondition);
            let rep = run_campaign(&v, &p, trials, record_samples.as_deref())?;
            let text = match v.output.format {
                OutputFormat::Json => json(&rep),
                OutputFormat::Csv => rep.to_csv()?,
            };
            let a = &rep.aggregate;
            eprintln!(
                "{} trials, {} failed: PLWE {}/{} correct, uniform {}/{} correct",
                rep.trials, a.failures, a.correct_on_plwe, a.plwe_trials, a.correct_on_uniform, a.uniform_trials
            );
            emit(&v, text)
        }
        Command::Analyze { mc_draws, f_csv } => {
            let rep = analyze(
                &v,
                &AnalyzeOptions {
                    min_m_target: cli.common.min_m,
                    mc_draws,
                },
            );
            for e in &rep.entries {
                if let Some(w) = &e.warning {
                    eprintln!("warning: {w}");
                }
                if let Some(r) = e.reference.as_ref().filter(|r| !r.reproduced) {
                    eprintln!("note: {}", r.note);
                }
            }
            if let Some(p) = f_csv {
                std::fs::write(&p, f_of_r_csv(4.0 * 2f64.sqrt(), 200))
                    .map_err(|e| Failure::Other(format!("{}: {e}", p.display())))?;
            }
            let text = match v.output.format {
                OutputFormat::Json => json(&rep),
                OutputFormat::Csv => analyze_csv(&rep)?,
            };
            emit(&v, text)
        }
        Command::Replay { samples } => {
            let p = prepare(&v)?;
            let f = File::open(&samples).map_err(|e| Failure::Config(format!("{}: {e}", samples.display())))?;
            let s = read_samples(BufReader::new(f), &v.ctx)?;
            let r = replay(&p, &v.ctx, &s)?;
            emit(&v, json(&r))
        }
    }
}

fn cmd_scan(v: &Validated) -> Result<(), Failure> {
    let rep = scan_instance(&v.ctx, &v.gauss, v.n_max);
    if rep.is_empty() {
        eprintln!("no exploitable roots up to extension degree {}", rep.n_max);
    }
    let text = match v.output.format {
        OutputFormat::Json => json(&rep),
        OutputFormat::Csv => scan_csv(&rep)?,
    };
    emit(v, text)
}

fn root_cols(r: &RootKind) -> (usize, u64, u64) {
    match r {
        RootKind::FqRoot { alpha, order } => (1, *alpha, *order),
        RootKind::Binomial { n, a, order } => (*n, *a, *order),
    }
}

fn scan_csv(rep: &VulnReport) -> Result<String, Failure> {
    #[derive(Serialize)]
    struct Row<'a> {
        n: usize,
        a: u64,
        order: u64,
        sigma_bar: f64,
        attack: String,
        applicable: bool,
        min_samples: Option<u64>,
        precondition: &'a str,
    }
    let rows = rep.entries.iter().flat_map(|e| {
        let (n, a, order) = root_cols(&e.root);
        e.attacks.iter().map(move |x| Row {
            n,
            a,
            order,
            sigma_bar: e.sigma_bar,
            attack: serde_json::to_value(x.attack).expect("enum").as_str().unwrap_or_default().to_string(),
            applicable: x.applicable,
            min_samples: x.min_samples,
            precondition: &x.precondition,
        })
    });
    csv_rows(rows)
}

fn analyze_csv(rep: &AnalyzeReport) -> Result<String, Failure> {
    #[derive(Serialize)]
    struct Row<'a> {
        n: usize,
        a: u64,
        order: u64,
        sigma_bar: f64,
        p_event: f64,
        delta: f64,
        big_delta: f64,
        ratio: f64,
        bound: &'a str,
        target: f64,
        min_m: Option<u64>,
    }
    let rows = rep.entries.iter().flat_map(|e| {
        let r = &e.root;
        let (n, a) = match r.alpha {
            Some(alpha) => (1, alpha),
            None => (r.n.unwrap_or(1), r.a.unwrap_or(0)),
        };
        e.min_m.iter().map(move |m| Row {
            n,
            a,
            order: r.order,
            sigma_bar: e.sigma_bar,
            p_event: e.probability.p_event,
            delta: e.probability.delta,
            big_delta: e.probability.big_delta,
            ratio: e.probability.ratio,
            bound: &m.bound,
            target: m.target,
            min_m: m.m,
        })
    });
    csv_rows(rows)
}
