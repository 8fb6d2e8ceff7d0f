//! `gan-event`: the pipeline from synthetic data to evaluation reports.

mod commands;
mod outdir;
mod settings;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use outdir::OutDir;
use settings::{Settings, Usage};

#[derive(Parser)]
#[command(name = "gan-event", version, about = "Event-aware demand forecasting pipeline")]
struct Cli {
    /// Settings file with one `key = value` per line.
    #[arg(long, global = true, env = "GAN_EVENT_CONFIG")]
    config: Option<PathBuf>,
    /// Seed for every stochastic component.
    #[arg(long, global = true, env = "GAN_EVENT_SEED")]
    seed: Option<u64>,
    /// Output directory; inputs are read from here unless given explicitly.
    #[arg(long, global = true, env = "GAN_EVENT_OUT", default_value = "out")]
    out: PathBuf,
    /// Override any setting; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic event corpus, sales series and impulse sidecar.
    Synth(SynthArgs),
    /// Train the generator and discriminator on the event corpus.
    TrainGan(TrainGanArgs),
    /// Cache one embedding per day from the trained generator.
    EmbedDays(EmbedArgs),
    /// Run the rolling monthly forecast for each model.
    Forecast(ForecastArgs),
    /// Score predictions on the most anomalous days of the test year.
    Evaluate(EvaluateArgs),
    /// Render the series, decomposition and predictions as SVG.
    Plot(PlotArgs),
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, env = "GAN_EVENT_N_DAYS")]
    n_days: Option<usize>,
    #[arg(long, env = "GAN_EVENT_DIM")]
    dim: Option<usize>,
}

#[derive(Args)]
struct InputArgs {
    /// Event file (JSON lines). Defaults to the synth output.
    #[arg(long, env = "GAN_EVENT_EVENTS")]
    events: Option<PathBuf>,
    /// Sales file (`date,value`). Defaults to the synth output.
    #[arg(long, env = "GAN_EVENT_SALES")]
    sales: Option<PathBuf>,
}

#[derive(Args)]
struct TrainGanArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, env = "GAN_EVENT_EPOCHS")]
    epochs: Option<usize>,
    #[arg(long, env = "GAN_EVENT_LAMBDA_R")]
    lambda_r: Option<f64>,
    #[arg(long, env = "GAN_EVENT_LAMBDA_D")]
    lambda_d: Option<f64>,
    /// cosine, l1 or l2.
    #[arg(long, env = "GAN_EVENT_DISTANCE")]
    distance: Option<String>,
    #[arg(long, env = "GAN_EVENT_USE_HAUSDORFF")]
    use_hausdorff: Option<bool>,
    /// Continue from the training state in the output directory.
    #[arg(long)]
    resume: bool,
}

#[derive(Args)]
struct EmbedArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, env = "GAN_EVENT_START")]
    start: Option<String>,
    #[arg(long, env = "GAN_EVENT_END")]
    end: Option<String>,
}

#[derive(Args)]
struct ForecastArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Comma-separated: sales_only, gan_event, mean_pool_event, weighted_pool_event.
    #[arg(long, env = "GAN_EVENT_MODELS")]
    models: Option<String>,
    #[arg(long, env = "GAN_EVENT_TEST_YEAR")]
    test_year: Option<i32>,
    #[arg(long, env = "GAN_EVENT_EPOCHS")]
    epochs: Option<usize>,
    #[arg(long, env = "GAN_EVENT_WARM_START")]
    warm_start: Option<usize>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, env = "GAN_EVENT_MODELS")]
    models: Option<String>,
}

#[derive(Args)]
struct PlotArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, env = "GAN_EVENT_MODELS")]
    models: Option<String>,
    /// Number of anomalies to mark.
    #[arg(long, default_value_t = 10)]
    k: usize,
}

fn push<T: ToString>(v: &mut Vec<(&'static str, String)>, key: &'static str, x: &Option<T>) {
    if let Some(x) = x {
        v.push((key, x.to_string()));
    }
}

impl InputArgs {
    fn overrides(&self, v: &mut Vec<(&'static str, String)>) {
        push(v, "events", &self.events.as_ref().map(|p| p.display()));
        push(v, "sales", &self.sales.as_ref().map(|p| p.display()));
    }
}

impl Command {
    /// Named flags as settings keys.
    fn overrides(&self) -> Vec<(&'static str, String)> {
        let mut v = Vec::new();
        match self {
            Command::Synth(a) => {
                push(&mut v, "n_days", &a.n_days);
                push(&mut v, "dim", &a.dim);
            }
            Command::TrainGan(a) => {
                a.input.overrides(&mut v);
                push(&mut v, "gan_epochs", &a.epochs);
                push(&mut v, "lambda_r", &a.lambda_r);
                push(&mut v, "lambda_d", &a.lambda_d);
                push(&mut v, "distance", &a.distance);
                push(&mut v, "use_hausdorff", &a.use_hausdorff);
            }
            Command::EmbedDays(a) => {
                a.input.overrides(&mut v);
                push(&mut v, "embed_start", &a.start);
                push(&mut v, "embed_end", &a.end);
            }
            Command::Forecast(a) => {
                a.input.overrides(&mut v);
                push(&mut v, "models", &a.models);
                push(&mut v, "test_year", &a.test_year);
                push(&mut v, "forecast_epochs", &a.epochs);
                push(&mut v, "warm_start", &a.warm_start);
            }
            Command::Evaluate(a) => {
                a.input.overrides(&mut v);
                push(&mut v, "models", &a.models);
            }
            Command::Plot(a) => {
                a.input.overrides(&mut v);
                push(&mut v, "models", &a.models);
            }
        }
        v
    }
}

fn settings(cli: &Cli) -> anyhow::Result<Settings> {
    let mut s = Settings::default();
    if let Some(p) = &cli.config {
        s.apply_file(p)?;
    }
    s.apply_pairs(&cli.set)?;
    for (k, v) in cli.command.overrides() {
        s.set(k, &v)?;
    }
    if let Some(seed) = cli.seed {
        s.seed = seed;
    }
    Ok(s)
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    let s = settings(cli)?;
    let out = OutDir::lock(&cli.out)?;
    match &cli.command {
        Command::Synth(_) => commands::synth(&s, &out),
        Command::TrainGan(a) => commands::train_gan(&s, &out, a.resume),
        Command::EmbedDays(_) => commands::embed_days(&s, &out),
        Command::Forecast(_) => commands::forecast(&s, &out),
        Command::Evaluate(_) => commands::evaluate(&s, &out),
        Command::Plot(a) => commands::plot(&s, &out, a.k),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let is_usage = e.downcast_ref::<Usage>().is_some()
                || matches!(
                    e.downcast_ref::<gan_event_core::Error>(),
                    Some(gan_event_core::Error::Config(_))
                );
            ExitCode::from(if is_usage { 2 } else { 1 })
        }
    }
}
