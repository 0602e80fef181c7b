use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use cmpmix::{
    dataset::parse_support, flip_order, parse_axis, read_config, read_dataset, report::to_json,
    surface_to_text, svg_chart, text_chart, write_dataset, ComparisonJson, FitConfig, FitReport,
    Overlay, ReadOptions, ShapeJson, SurfaceJson,
};
use cmpmix_core::{
    compare, detect_shape_with, em_fit, fit_poisson_mixture, fit_single_cmp, fit_single_poisson,
    loglik_surface, preset, presets, sample_mixture, FitResult, FrequencyTable, MixtureParams,
    Support,
};

/// Fit mixtures of two truncated Conway-Maxwell-Poisson distributions to
/// bimodal count and rating data.
#[derive(Parser)]
#[command(name = "cmpmix", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit one model and print its JSON report.
    Fit(FitArgs),
    /// Fit the Poisson and CMP mixtures and print a comparison report.
    Compare(CompareArgs),
    /// Draw a sample from a preset or explicit mixture and print it as CSV.
    Simulate(SimulateArgs),
    /// Evaluate the log-likelihood on a (nu1, nu2) grid.
    Surface(SurfaceArgs),
    /// Print the modes and lodes of the observed counts.
    Shape(ShapeArgs),
}

#[derive(Args)]
struct DataArgs {
    /// CSV (`value,count`, `label,count`, `value,label,count`) or raw list.
    file: PathBuf,
    /// Declared support as `lower:upper`.
    #[arg(long, value_parser = parse_support)]
    support: Option<(u32, u32)>,
    /// Reverse the order of the values before fitting.
    #[arg(long)]
    flip: bool,
}

impl DataArgs {
    fn load(&self) -> Result<FrequencyTable> {
        let opts = ReadOptions {
            support: self.support,
        };
        let data = read_dataset(&self.file, &opts)
            .with_context(|| format!("reading {}", self.file.display()))?;
        Ok(if self.flip { flip_order(&data) } else { data })
    }
}

#[derive(Args)]
struct OutputArgs {
    /// Grid and EM settings file.
    #[arg(long)]
    grid: Option<PathBuf>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Write an SVG chart of observed and expected counts.
    #[arg(long)]
    chart: Option<PathBuf>,
    /// Print a text chart to stderr.
    #[arg(long)]
    chart_text: bool,
}

impl OutputArgs {
    fn config(&self) -> Result<FitConfig> {
        match &self.grid {
            Some(path) => read_config(path).with_context(|| format!("reading {}", path.display())),
            None => Ok(FitConfig::default()),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    /// CMP mixture (a single CMP when the data has one peak).
    Cmp,
    Poisson,
    /// Single truncated CMP.
    Single,
    SinglePoisson,
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, value_enum, default_value = "cmp")]
    model: Model,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct SimulateArgs {
    /// Named generator preset.
    #[arg(long, conflicts_with = "params", required_unless_present = "params")]
    preset: Option<String>,
    /// Explicit generator `p,lambda1,nu1,lambda2,nu2`.
    #[arg(long, requires = "support")]
    params: Option<String>,
    /// Support `lower:upper` for `--params`.
    #[arg(long, value_parser = parse_support)]
    support: Option<(u32, u32)>,
    /// Sample size; defaults to the preset's.
    #[arg(long)]
    n: Option<u64>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SurfaceFormat {
    Text,
    Json,
}

#[derive(Args)]
struct SurfaceArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    p: f64,
    #[arg(long)]
    lambda1: f64,
    #[arg(long)]
    lambda2: f64,
    /// `a,b,c` or `start:stop:step`.
    #[arg(long)]
    nu1_grid: String,
    #[arg(long)]
    nu2_grid: String,
    #[arg(long, value_enum, default_value = "text")]
    format: SurfaceFormat,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ShapeArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Skip rounding counts to integers first.
    #[arg(long)]
    no_round: bool,
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(stdout.flush()?)
        }
    }
}

fn charts(data: &FrequencyTable, fits: &[&FitResult], out: &OutputArgs) -> Result<()> {
    let overlays: Vec<Overlay> = fits
        .iter()
        .map(|f| Overlay {
            name: f.model_kind.as_str(),
            expected: &f.expected_counts,
        })
        .collect();
    if let Some(path) = &out.chart {
        let title = format!("Observed and expected counts (n = {})", data.n());
        emit(Some(path), &svg_chart(data, &overlays, &title))?;
    }
    if out.chart_text {
        eprint!("{}", text_chart(data, &overlays, 50));
    }
    Ok(())
}

fn run_fit(args: &FitArgs) -> Result<()> {
    let data = args.data.load()?;
    let cfg = args.out.config()?;
    let fit = match args.model {
        Model::Cmp => em_fit(&data, &cfg.grid, &cfg.em),
        Model::Poisson => fit_poisson_mixture(&data, &cfg.grid, &cfg.em),
        Model::Single => fit_single_cmp(&data, &cfg.grid),
        Model::SinglePoisson => fit_single_poisson(&data, &cfg.grid),
    }
    .context("fitting")?;
    if fit.benchmark_superior {
        eprintln!("warning: the Poisson-mixture benchmark reached a higher log-likelihood");
    }
    emit(args.out.json.as_deref(), &to_json(&FitReport::new(&fit))?)?;
    charts(&data, &[&fit], &args.out)
}

fn run_compare(args: &CompareArgs) -> Result<()> {
    let data = args.data.load()?;
    let cfg = args.out.config()?;
    let poisson = fit_poisson_mixture(&data, &cfg.grid, &cfg.em).context("fitting")?;
    let cmp = em_fit(&data, &cfg.grid, &cfg.em).context("fitting")?;
    let fits = [poisson, cmp];
    let report = compare(&data, &fits)?;
    emit(
        args.out.json.as_deref(),
        &to_json(&ComparisonJson::new(&report, &fits))?,
    )?;
    charts(&data, &[&fits[0], &fits[1]], &args.out)
}

fn run_simulate(args: &SimulateArgs) -> Result<()> {
    let (generator, support, n) = match (&args.preset, &args.params) {
        (Some(name), _) => {
            let p = preset(name).with_context(|| {
                let names: Vec<&str> = presets().iter().map(|p| p.name).collect();
                format!("known presets: {}", names.join(", "))
            })?;
            (p.generator, p.support, args.n.unwrap_or(p.n))
        }
        (None, Some(params)) => {
            let v: Vec<f64> = params
                .split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .context("parsing --params")?;
            let [p, l1, n1, l2, n2] = v[..] else {
                bail!("--params needs five values: p,lambda1,nu1,lambda2,nu2");
            };
            let (lo, hi) = args.support.context("--params requires --support")?;
            let Some(n) = args.n else {
                bail!("--params requires --n");
            };
            (
                MixtureParams::from_values(p, l1, n1, l2, n2)?,
                Support::new(lo, hi)?,
                n,
            )
        }
        (None, None) => bail!("give --preset or --params"),
    };
    let table = sample_mixture(&generator, &support, n, args.seed)?;
    emit(args.out.as_deref(), &write_dataset(&table)?)
}

fn run_surface(args: &SurfaceArgs) -> Result<()> {
    let data = args.data.load()?;
    let nu1 = parse_axis(&args.nu1_grid)
        .map_err(anyhow::Error::msg)
        .context("--nu1-grid")?;
    let nu2 = parse_axis(&args.nu2_grid)
        .map_err(anyhow::Error::msg)
        .context("--nu2-grid")?;
    let s = loglik_surface(&data, args.p, args.lambda1, args.lambda2, &nu1, &nu2)?;
    let text = match args.format {
        SurfaceFormat::Text => surface_to_text(&s),
        SurfaceFormat::Json => to_json(&SurfaceJson::from(&s))?,
    };
    emit(args.out.as_deref(), &text)
}

fn run_shape(args: &ShapeArgs) -> Result<()> {
    let data = args.data.load()?;
    let shape = detect_shape_with(&data.counts_f64(), !args.no_round);
    emit(None, &to_json(&ShapeJson::new(&shape, data.support()))?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Fit(a) => run_fit(a),
        Command::Compare(a) => run_compare(a),
        Command::Simulate(a) => run_simulate(a),
        Command::Surface(a) => run_surface(a),
        Command::Shape(a) => run_shape(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
