use std::path::PathBuf;
use std::process::ExitCode as ProcessExit;

use clap::{Args, Parser, Subcommand};

use rhoq_cli::commands::{self, SynthRequest};
use rhoq_cli::config::{parse_duration_ms, ConfigDraft, RunConfig};
use rhoq_cli::error::CliError;

/// Multiscale detrended cross-correlation analysis of return series.
#[derive(Parser)]
#[command(name = "rhoq", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Pearson correlation matrix with shuffle significance.
    Pearson(CommonArgs),
    /// Static rho_q(s) surfaces with surrogate bands.
    Rho(CommonArgs),
    /// Rolling-window rho_q(s) evolution.
    Rolling(CommonArgs),
    /// Cumulative-return traces around event anchors.
    Events(CommonArgs),
    /// Distributional diagnostics: Jarque-Bera and ARCH LM.
    Diag(CommonArgs),
    /// Generate synthetic series with known correlation structure.
    Synth(SynthArgs),
}

/// Flags shared by the analysis commands. Values given here override the
/// config file.
#[derive(Args)]
struct CommonArgs {
    /// Config file in the flat `key = value` format.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Instrument as `ID PATH` or `ID=PATH` (repeatable).
    #[arg(long = "instrument")]
    instruments: Vec<String>,
    /// Pair selection, e.g. `BTC:NQ100,ETH:NQ100`.
    #[arg(long)]
    pairs: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<String>,
    /// Master seed for every stochastic step.
    #[arg(long)]
    seed: Option<String>,
    /// Worker threads (0 = all cores). Never changes output bytes.
    #[arg(long)]
    workers: Option<String>,
    /// Output format: csv, json or both.
    #[arg(long)]
    format: Option<String>,
    /// Sampling interval, e.g. `10s`.
    #[arg(long)]
    dt: Option<String>,
    /// Session calendar: standard or 24x7.
    #[arg(long)]
    calendar: Option<String>,
    /// Drop returns spanning session breaks instead of keeping them.
    #[arg(long)]
    drop_breaks: bool,
    /// Detrending polynomial order.
    #[arg(long)]
    m: Option<String>,
    /// Comma-separated q values, e.g. `1,2,4`.
    #[arg(long)]
    q: Option<String>,
    /// Smallest scale.
    #[arg(long)]
    smin: Option<String>,
    /// Largest scale (default min(32000, T/4)).
    #[arg(long)]
    smax: Option<String>,
    /// Number of log-spaced scales.
    #[arg(long)]
    spoints: Option<String>,
    /// Surrogate realizations for significance bands (0 disables).
    #[arg(long)]
    surrogates: Option<String>,
    /// Significance band width multiplier k.
    #[arg(long)]
    band_k: Option<String>,
    /// Which series to shuffle in surrogates: both or first.
    #[arg(long)]
    shuffle: Option<String>,
    /// Rolling window length, e.g. `5d`.
    #[arg(long)]
    window: Option<String>,
    /// Rolling step, e.g. `1d`.
    #[arg(long)]
    step: Option<String>,
    /// Rolling scales, e.g. `12,360`.
    #[arg(long)]
    rolling_scales: Option<String>,
    /// Event anchor timestamp (repeatable), e.g. `2022-10-13T12:30:00Z`.
    #[arg(long = "anchor")]
    anchors: Vec<String>,
    /// Event window before the anchor, e.g. `60s`.
    #[arg(long)]
    before: Option<String>,
    /// Event window after the anchor, e.g. `300s`.
    #[arg(long)]
    after: Option<String>,
    /// ARCH LM lag order.
    #[arg(long)]
    lags: Option<String>,
}

impl CommonArgs {
    fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut draft = match &self.config {
            Some(path) => ConfigDraft::load(path)?,
            None => ConfigDraft::default(),
        };
        let mut overrides = ConfigDraft {
            instruments: self.instruments.clone(),
            anchors: self.anchors.clone(),
            ..ConfigDraft::default()
        };
        let mut set = |key: &str, value: &Option<String>| {
            if let Some(v) = value {
                overrides.set(key, v.clone());
            }
        };
        set("pairs", &self.pairs);
        set("out", &self.out);
        set("seed", &self.seed);
        set("workers", &self.workers);
        set("format", &self.format);
        set("dt", &self.dt);
        set("calendar", &self.calendar);
        set("m", &self.m);
        set("q", &self.q);
        set("smin", &self.smin);
        set("smax", &self.smax);
        set("spoints", &self.spoints);
        set("surrogates", &self.surrogates);
        set("band_k", &self.band_k);
        set("shuffle", &self.shuffle);
        set("window", &self.window);
        set("step", &self.step);
        set("rolling_scales", &self.rolling_scales);
        set("before", &self.before);
        set("after", &self.after);
        set("lags", &self.lags);
        if self.drop_breaks {
            overrides.set("drop_breaks", "true");
        }
        draft.merge(overrides);
        draft.resolve()
    }
}

#[derive(Args)]
struct SynthArgs {
    /// Generator: gaussian_pair, ar1, student_t, garch_like or two_regime_pair.
    #[arg(long)]
    kind: String,
    /// Series length.
    #[arg(long)]
    t: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Population correlation for gaussian_pair.
    #[arg(long)]
    rho0: Option<f64>,
    /// AR(1) coefficient.
    #[arg(long)]
    phi: Option<f64>,
    /// Student-t degrees of freedom (> 2).
    #[arg(long)]
    dof: Option<f64>,
    /// GARCH omega (default 0.1).
    #[arg(long)]
    omega: Option<f64>,
    /// GARCH alpha (default 0.2).
    #[arg(long)]
    alpha: Option<f64>,
    /// GARCH beta (default 0.7).
    #[arg(long)]
    beta: Option<f64>,
    /// Regime split index for two_regime_pair (default t/2).
    #[arg(long)]
    split: Option<usize>,
    /// Output instrument ids, comma separated.
    #[arg(long, default_value = "x,y")]
    ids: String,
    /// Sampling interval stamped into the output.
    #[arg(long, default_value = "10s")]
    dt: String,
    /// Grid origin stamped into the output.
    #[arg(long, default_value = "2022-01-03T00:00:00Z")]
    t0: String,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

impl SynthArgs {
    fn resolve(&self) -> Result<SynthRequest, CliError> {
        let dt_ms = parse_duration_ms(&self.dt)
            .ok_or_else(|| CliError::config(format!("unparseable dt `{}`", self.dt)))?;
        if dt_ms <= 0 || dt_ms % 1000 != 0 {
            return Err(CliError::config("dt must be a positive whole number of seconds"));
        }
        let t0_ms = rhoq_core::timebase::parse_timestamp(&self.t0)
            .ok_or_else(|| CliError::config(format!("unparseable t0 `{}`", self.t0)))?;
        Ok(SynthRequest {
            kind: self.kind.clone(),
            len: self.t,
            seed: self.seed,
            rho0: self.rho0,
            phi: self.phi,
            dof: self.dof,
            omega: self.omega,
            alpha: self.alpha,
            beta: self.beta,
            split: self.split,
            ids: self.ids.split(',').map(|s| s.trim().to_string()).collect(),
            dt_s: dt_ms / 1000,
            t0_ms,
            out_dir: self.out.clone(),
        })
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Pearson(args) => commands::cmd_pearson(&args.resolve()?)?,
        Command::Rho(args) => commands::cmd_rho(&args.resolve()?)?,
        Command::Rolling(args) => commands::cmd_rolling(&args.resolve()?)?,
        Command::Events(args) => commands::cmd_events(&args.resolve()?)?,
        Command::Diag(args) => commands::cmd_diag(&args.resolve()?)?,
        Command::Synth(args) => commands::cmd_synth(&args.resolve()?)?,
    };
    Ok(())
}

fn main() -> ProcessExit {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ProcessExit::SUCCESS,
        Err(e) => {
            eprintln!("rhoq: {e}");
            ProcessExit::from(e.exit_code() as u8)
        }
    }
}
