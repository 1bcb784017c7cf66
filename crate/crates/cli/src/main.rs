mod config;

use std::f64::consts::{FRAC_PI_3, FRAC_PI_4};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use clusterfid_core::bench::{
    bloch_map, disorder_histogram, min_fidelity_curve, threshold_crossing, SweepConfig, SweepMode, DEFAULT_BIN_WIDTH,
    DEFAULT_HISTOGRAM_SAMPLES, DEFAULT_MIN_CURVE_SAMPLES,
};
use clusterfid_core::refocus::{analyze, matched_theta, RefocusParams, DEFAULT_EPS_GRID};
use clusterfid_core::report::{self, RunHeader, Table};
use clusterfid_core::teleport::{refresh_teleport, teleport_fidelity};
use clusterfid_core::verify::{run_verify, Fault, VerifyOptions};
use clusterfid_core::{BlochOrientation, ChainSpec, ErrorModel, InteractionKind};

use config::{now, sidecar_path, Resolver, RunManifest};

#[derive(Parser)]
#[command(name = "clusterfid", version, about = "Teleportation fidelity of error-prone cluster-state chains")]
struct Cli {
    /// JSON object of option values; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for sample-parallel commands (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fidelity of one chain and input direction, as JSON.
    Teleport(TeleportArgs),
    /// Fidelity over sampled input directions, as CSV (theta0, phi0, x, y, z, fidelity).
    BlochMap(BlochMapArgs),
    /// Minimum fidelity over sampled directions versus uniform error, as CSV.
    MinCurve(MinCurveArgs),
    /// Fidelity histograms under Gaussian per-bond disorder, as CSV.
    Histogram(HistogramArgs),
    /// Error at which the minimum fidelity reaches 2/3, as CSV.
    Threshold(ThresholdArgs),
    /// Raw versus refocused gate infidelity, as JSON.
    Refocus(RefocusArgs),
    /// Runs the acceptance checks; exits non-zero if any fails.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct OutArg {
    /// Output file; stdout when absent. A `<out>.manifest.json` sidecar is written alongside.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TeleportArgs {
    #[arg(long)]
    kind: Option<InteractionKind>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    theta0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    phi0: Option<f64>,
    /// Uniform fractional error on every bond.
    #[arg(long, allow_negative_numbers = true, conflicts_with = "sigma")]
    eps: Option<f64>,
    /// Standard deviation of Gaussian per-bond errors.
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Simulate with at most this many live qubits.
    #[arg(long)]
    refresh_window: Option<usize>,
    /// Include every branch in the report.
    #[arg(long)]
    verbose: bool,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args)]
struct BlochMapArgs {
    #[arg(long)]
    kind: Option<InteractionKind>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    eps: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args)]
struct MinCurveArgs {
    #[arg(long)]
    kind: Option<InteractionKind>,
    /// Comma-separated odd chain lengths.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    /// Comma-separated uniform errors.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    eps: Option<Vec<f64>>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args)]
struct HistogramArgs {
    #[arg(long)]
    kind: Option<InteractionKind>,
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    /// Comma-separated standard deviations.
    #[arg(long, value_delimiter = ',')]
    sigma: Option<Vec<f64>>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    bin_width: Option<f64>,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args)]
struct ThresholdArgs {
    #[arg(long)]
    kind: Option<InteractionKind>,
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args)]
struct RefocusArgs {
    #[arg(long)]
    family: Option<InteractionKind>,
    /// Target action; CP: conditional phase. Defaults to 4 pi cos(angle) for ZZ/XY and pi/4 for CP.
    #[arg(long, allow_negative_numbers = true)]
    theta: Option<f64>,
    /// X-pulse angle for ZZ.
    #[arg(long, allow_negative_numbers = true)]
    delta: Option<f64>,
    /// Z-pulse angle for XY.
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    /// X-pulse angle for CP; defaults to arccos(theta / 16 pi).
    #[arg(long, allow_negative_numbers = true)]
    gamma: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    eps_grid: Option<Vec<f64>>,
    /// Print the pulse list in order of action and include it in the report.
    #[arg(long)]
    dump_sequence: bool,
    /// Fail unless slopes are 2 and 4 within 0.05.
    #[arg(long)]
    check: bool,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args)]
struct VerifyArgs {
    /// Group (teleport, analytics, refocus, refresh, bench, determinism) or criterion number; repeatable.
    #[arg(long, value_delimiter = ',')]
    only: Vec<String>,
    /// Inject a defect: byproduct-sign-flip or byproduct-swap.
    #[arg(long)]
    fault: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    min_samples: Option<usize>,
    #[arg(long)]
    histogram_samples: Option<usize>,
    #[arg(long)]
    json: bool,
}

struct Run {
    command: &'static str,
    resolver: Resolver,
    started_at: String,
}

impl Run {
    fn new(command: &'static str, config: Option<&Path>) -> Result<Self> {
        Ok(Run { command, resolver: Resolver::load(config)?, started_at: now() })
    }

    fn header(&self, seed: Option<u64>) -> RunHeader {
        RunHeader::new(self.command, seed, self.resolver.resolved())
    }

    /// Kept out of the echoed config so the same run written to two paths gives identical bytes.
    fn out_path(&mut self, flag: Option<PathBuf>) -> Result<Option<PathBuf>> {
        self.resolver.unrecorded("out", flag)
    }

    fn finish(&self, out: Option<&Path>, seed: Option<u64>, bytes: &[u8]) -> Result<()> {
        let Some(out) = out else {
            std::io::stdout().lock().write_all(bytes)?;
            return Ok(());
        };
        write_file(out, bytes)?;
        let manifest = RunManifest {
            tool: "clusterfid",
            version: env!("CARGO_PKG_VERSION"),
            command: self.command.into(),
            config: self.resolver.resolved(),
            seed,
            started_at: self.started_at.clone(),
            finished_at: now(),
            outputs: vec![out.to_path_buf()],
        };
        let mut json = serde_json::to_vec_pretty(&manifest)?;
        json.push(b'\n');
        write_file(&sidecar_path(out), &json)
    }

    fn csv(&self, out: Option<&Path>, seed: Option<u64>, table: &Table) -> Result<()> {
        let text = report::to_csv_string(&self.header(seed), table)?;
        self.finish(out, seed, text.as_bytes())
    }

    fn json<T: Serialize>(&self, out: Option<&Path>, seed: Option<u64>, body: &T) -> Result<()> {
        #[derive(Serialize)]
        struct Wrapped<'a, T> {
            manifest: RunHeader,
            #[serde(flatten)]
            body: &'a T,
        }
        let mut bytes = serde_json::to_vec_pretty(&Wrapped { manifest: self.header(seed), body })?;
        bytes.push(b'\n');
        self.finish(out, seed, &bytes)
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let file = File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
    let mut w = BufWriter::new(file);
    w.write_all(bytes)?;
    w.flush()?;
    Ok(())
}

fn teleport(a: TeleportArgs, cfg: Option<&Path>) -> Result<ExitCode> {
    let mut run = Run::new("teleport", cfg)?;
    let r = &mut run.resolver;
    let kind = r.require("kind", a.kind)?;
    let n = r.require("n", a.n)?;
    let theta0 = r.get("theta0", a.theta0, 0.0)?;
    let phi0 = r.get("phi0", a.phi0, 0.0)?;
    let sigma = r.opt("sigma", a.sigma)?;
    let (model, seed) = match sigma {
        Some(sigma) if a.eps.is_none() => {
            let seed = r.seed(a.seed)?;
            (ErrorModel::gaussian(sigma, seed), Some(seed))
        }
        _ => match r.opt("eps", a.eps)? {
            Some(eps) => (ErrorModel::uniform(eps), None),
            None => bail!("one of --eps or --sigma is required"),
        },
    };
    let window = r.opt("refresh_window", a.refresh_window)?;
    let out = run.out_path(a.out.out)?;
    let spec = ChainSpec::new(kind, n, model)?;
    let input = BlochOrientation::new(theta0, phi0)?;
    let mut rep = match window {
        Some(w) => refresh_teleport(&spec, input, w)?,
        None => teleport_fidelity(&spec, input)?,
    };
    if !a.verbose {
        rep.branches.clear();
    }
    run.json(out.as_deref(), seed, &rep)?;
    Ok(ExitCode::SUCCESS)
}

fn bloch_map_cmd(a: BlochMapArgs, cfg: Option<&Path>) -> Result<ExitCode> {
    let mut run = Run::new("bloch-map", cfg)?;
    let r = &mut run.resolver;
    let kind = r.require("kind", a.kind)?;
    let n = r.require("n", a.n)?;
    let eps = r.get("eps", a.eps, 0.0)?;
    let samples = r.get("samples", a.samples, DEFAULT_MIN_CURVE_SAMPLES)?;
    let seed = r.seed(a.seed)?;
    let out = run.out_path(a.out.out)?;
    let rows = bloch_map(kind, n, eps, samples, seed)?;
    run.csv(out.as_deref(), Some(seed), &report::bloch_map_table(&rows))?;
    Ok(ExitCode::SUCCESS)
}

fn default_eps_grid() -> Vec<f64> {
    (0..=20).map(|k| k as f64 * 0.05).collect()
}

fn min_curve(a: MinCurveArgs, cfg: Option<&Path>) -> Result<ExitCode> {
    let mut run = Run::new("min-curve", cfg)?;
    let r = &mut run.resolver;
    let sweep = SweepConfig {
        kind: r.require("kind", a.kind)?,
        ns: r.get("n", a.n, vec![3, 5, 7, 9])?,
        mode: SweepMode::Uniform,
        grid: r.get("eps", a.eps, default_eps_grid())?,
        samples: r.get("samples", a.samples, DEFAULT_MIN_CURVE_SAMPLES)?,
        seed: r.seed(a.seed)?,
        bin_width: DEFAULT_BIN_WIDTH,
    };
    let out = run.out_path(a.out.out)?;
    let rows = min_fidelity_curve(&sweep)?;
    run.csv(out.as_deref(), Some(sweep.seed), &report::min_curve_table(&rows, sweep.seed))?;
    Ok(ExitCode::SUCCESS)
}

fn histogram(a: HistogramArgs, cfg: Option<&Path>) -> Result<ExitCode> {
    let mut run = Run::new("histogram", cfg)?;
    let r = &mut run.resolver;
    let sweep = SweepConfig {
        kind: r.require("kind", a.kind)?,
        ns: r.get("n", a.n, vec![7])?,
        mode: SweepMode::Gaussian,
        grid: r.get("sigma", a.sigma, vec![0.1, 0.2])?,
        samples: r.get("samples", a.samples, DEFAULT_HISTOGRAM_SAMPLES)?,
        seed: r.seed(a.seed)?,
        bin_width: r.get("bin_width", a.bin_width, DEFAULT_BIN_WIDTH)?,
    };
    let out = run.out_path(a.out.out)?;
    let stats = disorder_histogram(&sweep)?;
    run.csv(out.as_deref(), Some(sweep.seed), &report::histogram_table(&stats, sweep.seed))?;
    Ok(ExitCode::SUCCESS)
}

fn threshold(a: ThresholdArgs, cfg: Option<&Path>) -> Result<ExitCode> {
    let mut run = Run::new("threshold", cfg)?;
    let r = &mut run.resolver;
    let kind = r.require("kind", a.kind)?;
    let ns = r.get("n", a.n, vec![3, 5, 7, 9])?;
    let out = run.out_path(a.out.out)?;
    let rows = ns.iter().map(|&n| threshold_crossing(kind, n)).collect::<Result<Vec<_>, _>>()?;
    run.csv(out.as_deref(), None, &report::threshold_table(&rows))?;
    Ok(ExitCode::SUCCESS)
}

fn refocus(a: RefocusArgs, cfg: Option<&Path>) -> Result<ExitCode> {
    let mut run = Run::new("refocus", cfg)?;
    let r = &mut run.resolver;
    let family = r.require("family", a.family)?;
    let params = match family {
        InteractionKind::Zz | InteractionKind::Xy => {
            let (key, flag) = if family == InteractionKind::Zz { ("delta", a.delta) } else { ("alpha", a.alpha) };
            let angle = r.get(key, flag, FRAC_PI_3)?;
            let theta = r.get("theta", a.theta, matched_theta(angle))?;
            RefocusParams { family, theta, angle }
        }
        InteractionKind::Cp => {
            let theta = r.get("theta", a.theta, FRAC_PI_4)?;
            let mut p = RefocusParams::cp(theta).or_else(|e| match a.gamma {
                Some(_) => Ok(RefocusParams { family, theta, angle: 0.0 }),
                None => Err(e),
            })?;
            if let Some(g) = r.opt("gamma", a.gamma)? {
                p.angle = g;
            }
            p
        }
    };
    let grid = r.get("eps_grid", a.eps_grid, DEFAULT_EPS_GRID.to_vec())?;
    let out = run.out_path(a.out.out)?;
    let mut rep = analyze(params, &grid)?;
    for w in &rep.warnings {
        eprintln!("warning: {w}");
    }
    if a.dump_sequence {
        for line in &rep.sequence {
            eprintln!("{line}");
        }
    } else {
        rep.sequence.clear();
    }
    #[derive(Serialize)]
    struct Body<'a> {
        #[serde(flatten)]
        report: &'a clusterfid_core::refocus::RefocusReport,
    }
    run.json(out.as_deref(), None, &Body { report: &rep })?;
    if a.check && rep.warnings.is_empty() {
        let ok = (rep.raw_slope - 2.0).abs() <= 0.05 && (rep.refocused_slope - 4.0).abs() <= 0.05;
        if !ok {
            eprintln!("slope check failed: raw {:.4}, refocused {:.4}", rep.raw_slope, rep.refocused_slope);
            return Ok(ExitCode::FAILURE);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn verify(a: VerifyArgs, cfg: Option<&Path>) -> Result<ExitCode> {
    let mut r = Resolver::load(cfg)?;
    let defaults = VerifyOptions::default();
    let fault = match a.fault.as_deref() {
        None => None,
        Some(name) => match Fault::parse(name) {
            Some(f) => Some(f),
            None => bail!("unknown fault '{name}' (expected byproduct-sign-flip or byproduct-swap)"),
        },
    };
    let opts = VerifyOptions {
        only: a.only,
        fault,
        seed: r.get("seed", a.seed, defaults.seed)?,
        min_curve_samples: r.get("min_samples", a.min_samples, defaults.min_curve_samples)?,
        histogram_samples: r.get("histogram_samples", a.histogram_samples, defaults.histogram_samples)?,
    };
    let results = run_verify(&opts);
    if results.is_empty() {
        bail!("--only matched no checks");
    }
    if a.json {
        println!("{}", serde_json::to_string_pretty(&results)?);
    } else {
        for res in &results {
            println!("{res}");
        }
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    println!("{} of {} checks passed", results.len() - failed, results.len());
    Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build_global() {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    }
    let cfg = cli.config.as_deref();
    let result = match cli.command {
        Command::Teleport(a) => teleport(a, cfg),
        Command::BlochMap(a) => bloch_map_cmd(a, cfg),
        Command::MinCurve(a) => min_curve(a, cfg),
        Command::Histogram(a) => histogram(a, cfg),
        Command::Threshold(a) => threshold(a, cfg),
        Command::Refocus(a) => refocus(a, cfg),
        Command::Verify(a) => verify(a, cfg),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
