use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use super::config::{env_threads, load_study_config};
use super::csv_input::{load_csv, load_table_csv, ColumnSpec, LoadedData};
use super::report::{
    num, simulation_csv, simulation_json, write_replicate_dump, EstimateReport, HetReport, Invocation, RrReport,
};
use crate::error::{Error, Result};
use crate::genius::{
    beta_a_fit, genius_fit_unchecked, het_variance_test, nie_genius, nie_interaction, product_estimate,
    BootstrapCi, BootstrapConfig, GeniusOptions, Inference, Method, ThetaSe,
};
use crate::mediation::{nie_naive, nie_oracle, rr_nie_plugin};
use crate::simulation::{run_study, Dag, StudyConfig};
use crate::stats::HcType;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_WEAK_ID: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "mediate", version, about = "Natural indirect effects under unmeasured confounding")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Estimate the natural indirect effect from a CSV file.
    Estimate(EstimateArgs),
    /// Run the Monte Carlo study and write the operating-characteristics table.
    Simulate(SimulateArgs),
    /// Test whether the mediator variance depends on exposure.
    HetTest(HetArgs),
    /// Plug-in risk-ratio indirect effect from a table of counts.
    Rr(RrArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Hc {
    Hc0,
    Hc1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SeKind {
    Stacked,
    PlugIn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CiKind {
    Percentile,
    Normal,
}

#[derive(Debug, Args)]
struct Columns {
    /// Input CSV with a header row.
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long, default_value = "y")]
    outcome: String,
    #[arg(long, default_value = "m")]
    mediator: String,
    #[arg(long, default_value = "a")]
    exposure: String,
    /// Comma-separated covariate columns.
    #[arg(long, value_delimiter = ',')]
    covariates: Vec<String>,
    #[arg(long)]
    latent_u: Option<String>,
    #[arg(long)]
    latent_w: Option<String>,
    /// Error-free mediator column (oracle only).
    #[arg(long)]
    true_m: Option<String>,
}

impl Columns {
    fn spec(&self) -> ColumnSpec {
        ColumnSpec {
            outcome: self.outcome.clone(),
            mediator: self.mediator.clone(),
            exposure: self.exposure.clone(),
            covariates: self.covariates.clone(),
            latent_u: self.latent_u.clone(),
            latent_w: self.latent_w.clone(),
            true_m: self.true_m.clone(),
        }
    }
}

#[derive(Debug, Args)]
struct Output {
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Write the report here instead of standard output.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    #[command(flatten)]
    columns: Columns,
    #[arg(long, default_value = "genius")]
    method: Method,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    a: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    a_star: f64,
    /// Bootstrap resamples (at least 100); omit for delta-method only.
    #[arg(long)]
    bootstrap: Option<usize>,
    #[arg(long, default_value_t = crate::simulation::DEFAULT_SEED)]
    seed: u64,
    #[arg(long, value_enum, default_value = "percentile")]
    ci: CiKind,
    #[arg(long, value_enum, default_value = "hc0")]
    hc: Hc,
    #[arg(long, value_enum, default_value = "stacked")]
    theta_se: SeKind,
    /// Add exposure-by-covariate terms to the mediator first stage.
    #[arg(long)]
    mediator_interactions: bool,
    #[command(flatten)]
    out: Output,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// TOML or JSON study configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Start from 2,000 replications with 2,000 bootstrap resamples.
    #[arg(long)]
    full_scale: bool,
    #[arg(long, value_delimiter = ',')]
    dags: Option<Vec<Dag>>,
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<Method>>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    replications: Option<usize>,
    /// Bootstrap resamples per replicate; 0 disables.
    #[arg(long)]
    bootstrap: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
    /// Read the mediator's second normal parameter as a variance.
    #[arg(long)]
    variance_param: bool,
    #[arg(long, value_enum)]
    theta_se: Option<SeKind>,
    #[command(flatten)]
    out: Output,
    /// Also write per-replicate estimates as CSV.
    #[arg(long)]
    dump: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct HetArgs {
    #[command(flatten)]
    columns: Columns,
    #[command(flatten)]
    out: Output,
}

#[derive(Debug, Args)]
struct RrArgs {
    /// Long-format counts with header `y,m,a[,c],count`.
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long, default_value = "1")]
    a: String,
    #[arg(long, default_value = "0")]
    a_star: String,
    /// Covariate level; every level when omitted.
    #[arg(long)]
    c: Option<String>,
    #[command(flatten)]
    out: Output,
}

fn se_kind(s: SeKind) -> ThetaSe {
    match s {
        SeKind::Stacked => ThetaSe::Stacked,
        SeKind::PlugIn => ThetaSe::PlugIn,
    }
}

fn emit(out: &Output, text: &str, stdout: &mut dyn Write) -> Result<()> {
    match &out.output {
        Some(path) => std::fs::write(path, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn load(columns: &Columns, stderr: &mut dyn Write) -> Result<LoadedData> {
    let loaded = load_csv(&columns.input, &columns.spec())?;
    for w in &loaded.warnings {
        let _ = writeln!(stderr, "warning: {w}");
    }
    Ok(loaded)
}

/// Parses `args` (without the program name) and runs one command. Returns
/// the process exit code: 0 on success, 2 on invalid input, 3 when the
/// GENIUS estimator is weakly identified.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let recorded: Vec<String> = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let cli = match Cli::try_parse_from(std::iter::once(OsString::from("mediate")).chain(args)) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    let result = match cli.command {
        Command::Estimate(a) => cmd_estimate(a, &recorded, stdout, stderr),
        Command::Simulate(a) => cmd_simulate(a, &recorded, stdout, stderr),
        Command::HetTest(a) => cmd_het_test(a, &recorded, stdout, stderr),
        Command::Rr(a) => cmd_rr(a, &recorded, stdout),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            if e.is_weak_identification() {
                EXIT_WEAK_ID
            } else {
                EXIT_VALIDATION
            }
        }
    }
}

fn cmd_estimate(args: EstimateArgs, recorded: &[String], stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    let loaded = load(&args.columns, stderr)?;
    let data = &loaded.dataset;
    let hc = match args.hc {
        Hc::Hc0 => HcType::Hc0,
        Hc::Hc1 => HcType::Hc1,
    };
    let opts = GeniusOptions {
        mediator_interactions: args.mediator_interactions,
        theta_se: se_kind(args.theta_se),
        hc,
        ..Default::default()
    };
    let inference = match args.bootstrap {
        Some(b) => {
            if b < 100 {
                return Err(Error::InvalidParameter(format!("bootstrap needs at least 100 resamples (got {b})")));
            }
            let ci = match args.ci {
                CiKind::Percentile => BootstrapCi::Percentile,
                CiKind::Normal => BootstrapCi::Normal,
            };
            Inference::Both(BootstrapConfig { replicates: b, seed: args.seed, ci })
        }
        None => Inference::Delta,
    };
    let (a, a_star) = (args.a, args.a_star);
    let outcome = match args.method {
        Method::Naive => nie_naive(data, a, a_star, inference, hc),
        Method::Oracle => nie_oracle(data, a, a_star, inference, hc),
        Method::Genius => nie_genius(data, a, a_star, inference, &opts),
        Method::GeniusInteraction => nie_interaction(data, a, a_star, inference, &opts),
    };
    let invocation = Invocation::new(recorded, args.bootstrap.map(|_| args.seed));
    let (mut report, code) = match outcome {
        Ok(est) => (EstimateReport::from_estimate(invocation, &est, data.n()), EXIT_OK),
        Err(e) if e.is_weak_identification() => {
            let _ = writeln!(stderr, "error: {e}");
            let fit = genius_fit_unchecked(data, &opts)?;
            let beta = beta_a_fit(data, hc)?;
            let est = product_estimate(args.method, (fit.theta_m, fit.se_theta), beta, (a, a_star));
            let mut r = EstimateReport::from_estimate(invocation, &est, data.n());
            r.weak_id = true;
            r.warnings.push(format!(
                "weak identification: theta_m is the raw ratio {} / {} and should not be interpreted",
                num(fit.numerator),
                num(fit.denominator)
            ));
            if args.method == Method::GeniusInteraction {
                r.warnings.push("interaction terms were not estimated".into());
            }
            (r, EXIT_WEAK_ID)
        }
        Err(e) => return Err(e),
    };
    if matches!(args.method, Method::Genius | Method::GeniusInteraction) {
        report.het_test = Some(het_variance_test(data)?);
    }
    report.rows_dropped = loaded.rows_dropped;
    report.warnings.splice(0..0, loaded.warnings.iter().cloned());
    let text = match args.out.format {
        Format::Json => report.to_json()?,
        Format::Csv => report.to_csv()?,
    };
    emit(&args.out, &text, stdout)?;
    Ok(code)
}

fn study_config(args: &SimulateArgs) -> Result<StudyConfig> {
    let mut cfg = match &args.config {
        Some(path) => load_study_config(path)?,
        None if args.full_scale => StudyConfig::full_scale(),
        None => StudyConfig::default(),
    };
    if args.config.is_some() && args.full_scale {
        return Err(Error::InvalidParameter("--full-scale cannot be combined with --config".into()));
    }
    if let Some(d) = &args.dags {
        cfg.dags = d.clone();
    }
    if let Some(m) = &args.methods {
        cfg.methods = m.clone();
    }
    if let Some(n) = args.n {
        cfg.n = n;
    }
    if let Some(r) = args.replications {
        cfg.replications = r;
    }
    if let Some(b) = args.bootstrap {
        cfg.bootstrap = (b > 0).then_some(b);
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if args.threads.is_some() {
        cfg.threads = args.threads;
    }
    if cfg.threads.is_none() {
        cfg.threads = env_threads()?;
    }
    if args.variance_param {
        cfg.sd_is_second_param = false;
    }
    if let Some(k) = args.theta_se {
        cfg.theta_se = se_kind(k);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_simulate(args: SimulateArgs, recorded: &[String], stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    let cfg = study_config(&args)?;
    let report = run_study(&cfg)?;
    let invocation = Invocation::new(recorded, Some(cfg.seed));
    for row in report.rows.iter().filter(|r| r.n_failed_replicates > 0) {
        let _ = writeln!(
            stderr,
            "warning: dag {} {}: {} failed replicate(s)",
            row.dag, row.method, row.n_failed_replicates
        );
    }
    let text = match args.out.format {
        Format::Json => simulation_json(&report, &invocation)?,
        Format::Csv => simulation_csv(&report, &invocation)?,
    };
    emit(&args.out, &text, stdout)?;
    if let Some(path) = &args.dump {
        write_replicate_dump(&report, std::fs::File::create(path)?)?;
    }
    Ok(EXIT_OK)
}

fn cmd_het_test(args: HetArgs, recorded: &[String], stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    let loaded = load(&args.columns, stderr)?;
    let report = HetReport {
        invocation: Invocation::new(recorded, None),
        result: het_variance_test(&loaded.dataset)?,
        rows_dropped: loaded.rows_dropped,
        warnings: loaded.warnings,
    };
    let text = match args.out.format {
        Format::Json => report.to_json()?,
        Format::Csv => report.to_csv()?,
    };
    emit(&args.out, &text, stdout)?;
    Ok(EXIT_OK)
}

fn cmd_rr(args: RrArgs, recorded: &[String], stdout: &mut dyn Write) -> Result<i32> {
    let table = load_table_csv(&args.input)?;
    let levels = match &args.c {
        Some(c) => vec![c.clone()],
        None => table.c_levels.clone(),
    };
    let estimates = levels
        .iter()
        .map(|c| rr_nie_plugin(&table, &args.a, &args.a_star, c))
        .collect::<Result<Vec<_>>>()?;
    let report = RrReport {
        invocation: Invocation::new(recorded, None),
        a: args.a.clone(),
        a_star: args.a_star.clone(),
        estimates,
    };
    let text = match args.out.format {
        Format::Json => report.to_json()?,
        Format::Csv => report.to_csv()?,
    };
    emit(&args.out, &text, stdout)?;
    Ok(EXIT_OK)
}
