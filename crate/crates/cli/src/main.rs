use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;
use thiserror::Error;

use robust_reinsurance::distributions::Distribution;
use robust_reinsurance::experiments::{self, sig6};
use robust_reinsurance::quadrature::GaussLegendre;
use robust_reinsurance::risk_measures::{rvar, rvar_quadrature, DEFAULT_NODES};
use robust_reinsurance::{asymptotic, Error, Indemnity, ObjectiveId, RiskLevels, Scenario, SearchConfig};

#[derive(Debug, Parser)]
#[command(name = "reinsure", version, about = "Optimal reinsurance layers under dependence uncertainty")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Scenario JSON file.
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,
    /// Output directory, created if absent.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Retention grid points per insurer.
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Gauss-Legendre nodes for the quadrature cross-check of `measure`.
    #[arg(long, global = true)]
    nodes: Option<usize>,
    /// Seed of the Monte Carlo check.
    #[arg(long, global = true, default_value_t = 20240601)]
    seed: u64,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate each marginal's RVaR at the insurer and reinsurer windows.
    Measure,
    /// Optimal capped layers for three level configurations under three dependence regimes.
    Table1,
    /// Optimal capped layers for two different marginals under the worst case.
    Table2,
    /// Optimal objective against the reinsurer level and against the insurer levels.
    Figures,
    /// Minimize one objective for the scenario.
    Optimize {
        /// One of G, R, Gbar, L, H, G1bar, K, TildeG.
        #[arg(long)]
        objective: String,
    },
    /// Kolmogorov-Smirnov distance of a standardized sum of layer payouts to the normal law.
    Clt {
        /// Layer retention.
        #[arg(long)]
        retention: f64,
        /// Layer cap.
        #[arg(long)]
        cap: f64,
        /// Number of summed risks.
        #[arg(long)]
        risks: usize,
        /// Number of simulated sums.
        #[arg(long, default_value_t = 100_000)]
        draws: usize,
    },
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Solver(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) => 2,
            Self::Solver(_) => 3,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Solver(_) | Error::Divergent(_) | Error::Size(_) => Self::Solver(e.to_string()),
            Error::Domain(_) | Error::Inadmissible(_) | Error::Config(_) => Self::Config(e.to_string()),
        }
    }
}

fn io_error(path: &Path, e: io::Error) -> CliError {
    CliError::Config(format!("{}: {e}", path.display()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = search_config(cli)?;
    if let Some(n) = cli.nodes {
        if n == 0 {
            return Err(CliError::Config("--nodes must be positive".into()));
        }
    }
    if let Some(w) = cli.workers {
        if w == 0 {
            return Err(CliError::Config("--workers must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    fs::create_dir_all(&cli.out).map_err(|e| io_error(&cli.out, e))?;
    match &cli.command {
        Command::Measure => measure(cli),
        Command::Table1 => {
            let rows = experiments::table1(&cfg)?;
            write_output(cli, "table1.csv", |w| experiments::write_table1(&rows, w))
        }
        Command::Table2 => {
            let rows = experiments::table2(&cfg)?;
            write_output(cli, "table2.csv", |w| experiments::write_table2(&rows, w))
        }
        Command::Figures => {
            let fig2 = experiments::figure2(&cfg)?;
            let fig3 = experiments::figure3(&cfg)?;
            write_output(cli, "figure2.csv", |w| experiments::write_figure(&fig2, w))?;
            write_output(cli, "figure3.csv", |w| experiments::write_figure(&fig3, w))
        }
        Command::Optimize { objective } => {
            let id: ObjectiveId = objective.parse()?;
            let s = load_scenario(cli)?;
            let result = robust_reinsurance::minimize(id, &s, &cfg)?;
            let name = format!("optimize_{}.json", id.name().to_ascii_lowercase());
            write_json(cli, &name, &result)
        }
        Command::Clt { retention, cap, risks, draws } => {
            let d = experiments::base_marginal();
            let f = Indemnity::layer(*retention, *cap)?;
            let ks = asymptotic::clt_check(&d, &f, *risks, *draws, cli.seed)?;
            let record = CltRecord { distribution: d, contract: f, risks: *risks, draws: *draws, seed: cli.seed, ks };
            write_json(cli, "clt.json", &record)
        }
    }
}

fn search_config(cli: &Cli) -> Result<SearchConfig, CliError> {
    let mut cfg = SearchConfig::default();
    if let Some(g) = cli.grid {
        if g < 2 {
            return Err(CliError::Config("--grid must be at least 2".into()));
        }
        cfg.retention_points = g;
    }
    Ok(cfg)
}

fn load_scenario(cli: &Cli) -> Result<Scenario, CliError> {
    let path = cli.scenario.as_ref().ok_or_else(|| CliError::Config("--scenario is required".into()))?;
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

#[derive(Serialize)]
struct MeasureRecord {
    marginal: usize,
    distribution: Distribution,
    holder: &'static str,
    levels: RiskLevels,
    value: f64,
    value_text: String,
    quadrature: f64,
    nodes: usize,
}

#[derive(Serialize)]
struct CltRecord {
    distribution: Distribution,
    contract: Indemnity,
    risks: usize,
    draws: usize,
    seed: u64,
    ks: f64,
}

fn measure(cli: &Cli) -> Result<(), CliError> {
    let s = load_scenario(cli)?;
    let nodes = cli.nodes.unwrap_or(DEFAULT_NODES);
    let rule = GaussLegendre::new(nodes);
    let mut records = Vec::new();
    for (i, d) in s.marginals.iter().enumerate() {
        for (holder, levels) in [("insurer", s.insurer_levels[i]), ("reinsurer", s.reinsurer_levels)] {
            let value = rvar(d, levels)?;
            let quadrature = rvar_quadrature(d, levels, &rule)?;
            records.push(MeasureRecord {
                marginal: i,
                distribution: d.clone(),
                holder,
                levels,
                value,
                value_text: sig6(value),
                quadrature,
                nodes,
            });
        }
    }
    write_json(cli, "measure.json", &records)
}

fn write_output<F>(cli: &Cli, name: &str, body: F) -> Result<(), CliError>
where
    F: FnOnce(&mut Vec<u8>) -> robust_reinsurance::Result<()>,
{
    let mut buf = Vec::new();
    body(&mut buf)?;
    let path = cli.out.join(name);
    fs::write(&path, &buf).map_err(|e| io_error(&path, e))?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn write_json<T: Serialize>(cli: &Cli, name: &str, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Config(e.to_string()))?;
    text.push('\n');
    io::stdout().write_all(text.as_bytes()).map_err(|e| CliError::Config(e.to_string()))?;
    write_output(cli, name, |w| {
        w.extend_from_slice(text.as_bytes());
        Ok(())
    })
}
