use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use gfmlab::analysis::closed_loop::{build_closed_loop, LoopParams, Regime};
use gfmlab::analysis::linear::uniform_grid;
use gfmlab::analysis::metrics::DEFAULT_WINDOW;
use gfmlab::analysis::{analyze_trace, MetricsReport};
use gfmlab::engine::{builtin_scenarios, run_batch, run_scenario};
use gfmlab::{Error, Scenario, Trace};
use gfmlab_cli::config::{self, resolve};
use gfmlab_cli::output::write_atomic;
use gfmlab_cli::svg::{line_chart, Series};
use gfmlab_cli::trace_csv::{fmt_f64, read_table, trace_to_bytes, HEADER};
use serde::Serialize;

/// Simulate and analyse grid-forming converter control scenarios.
#[derive(Parser)]
#[command(name = "gfmlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario, write its trace CSV and print the metrics.
    Run {
        /// Built-in scenario name or path to a TOML config.
        scenario: String,
        /// Trace CSV path [default: <name>.csv].
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        sim: SimFlags,
    },
    /// Run a scenario once per value of one numeric parameter.
    Sweep {
        /// Built-in scenario name or path to a TOML config.
        scenario: String,
        /// Dotted field path such as `hybrid.h`, or `rocof` for the profile ramp rate.
        #[arg(short, long)]
        param: String,
        /// Comma-separated values.
        #[arg(short, long, allow_hyphen_values = true)]
        values: String,
        /// Output directory.
        #[arg(short, long, default_value = ".")]
        out: PathBuf,
        #[command(flatten)]
        sim: SimFlags,
    },
    /// Build the closed-loop power transfer function for a grid regime.
    Linear {
        /// weak, strong or exact.
        regime: String,
        /// Preset: table1 or a built-in scenario name.
        #[arg(long, default_value = "table1", conflicts_with = "config")]
        base: String,
        /// TOML config to take the gains from.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override the short-circuit ratio (x_g = 1/scr).
        #[arg(long)]
        scr: Option<f64>,
        /// Output directory for `<regime>_model.toml` and `<regime>_step.csv`.
        #[arg(short, long, default_value = ".")]
        out: PathBuf,
        /// Step response length, s.
        #[arg(long, default_value_t = 10.0)]
        t_end: f64,
        /// Step response spacing, s.
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
    },
    /// Render trace columns as an SVG line chart.
    Plot {
        /// Trace CSV.
        trace: PathBuf,
        /// Comma-separated column names.
        #[arg(short, long, default_value = "p_pu")]
        columns: String,
        /// SVG path [default: trace path with .svg].
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// List the built-in scenarios.
    List,
}

#[derive(Args)]
struct SimFlags {
    /// Integration step, s.
    #[arg(long)]
    dt: Option<f64>,
    /// Simulated time, s.
    #[arg(long)]
    t_end: Option<f64>,
    /// Accepted for scripts; every run is deterministic.
    #[arg(long)]
    seedless: bool,
    /// Drop the SoC power window and explicit power limits.
    #[arg(long)]
    no_limit_policy: bool,
    /// Trailing window for the metrics, s.
    #[arg(long, default_value_t = DEFAULT_WINDOW)]
    window: f64,
}

impl SimFlags {
    fn apply(&self, mut sc: Scenario) -> Result<Scenario> {
        if self.no_limit_policy {
            sc = sc.without_limit_policy();
        }
        if let Some(dt) = self.dt {
            sc.dt = dt;
            if sc.output_interval < dt {
                sc.output_interval = dt;
            }
        }
        if let Some(t) = self.t_end {
            sc.t_end = t;
        }
        sc.validate()?;
        Ok(sc)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Run { scenario, out, sim } => cmd_run(&scenario, out, &sim),
        Command::Sweep {
            scenario,
            param,
            values,
            out,
            sim,
        } => cmd_sweep(&scenario, &param, &values, &out, &sim),
        Command::Linear {
            regime,
            base,
            config,
            scr,
            out,
            t_end,
            dt,
        } => cmd_linear(&regime, &base, config.as_deref(), scr, &out, t_end, dt),
        Command::Plot { trace, columns, out } => cmd_plot(&trace, &columns, out),
        Command::List => cmd_list(),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

/// Metrics over the trailing `window`, shortened to the whole trace for short runs.
fn report(tr: &Trace, window: f64) -> Result<MetricsReport> {
    let d = tr.duration();
    let window = if window > d && d > 0.0 { d } else { window };
    Ok(analyze_trace(tr, window)?)
}

fn cmd_run(spec: &str, out: Option<PathBuf>, flags: &SimFlags) -> Result<ExitCode> {
    let sc = flags.apply(resolve(spec)?)?;
    let out = out.unwrap_or_else(|| PathBuf::from(format!("{}.csv", sc.name)));
    match run_scenario(&sc) {
        Ok(tr) => {
            write_atomic(&out, &trace_to_bytes(&tr)?)?;
            print!("{}", report(&tr, flags.window)?);
            Ok(ExitCode::SUCCESS)
        }
        Err(Error::Diverged { t, reason, partial }) => {
            write_atomic(&out, &trace_to_bytes(&partial)?)?;
            eprintln!(
                "simulation diverged at t = {t} s: {reason}; partial trace in {}",
                out.display()
            );
            if let Ok(m) = report(&partial, flags.window) {
                print!("{m}");
            }
            Ok(ExitCode::from(2))
        }
        Err(e) => Err(e.into()),
    }
}

fn parse_values(list: &str) -> Result<Vec<f64>> {
    let values = list
        .split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| v.parse::<f64>().with_context(|| format!("'{v}' is not a number")))
        .collect::<Result<Vec<_>>>()?;
    if values.is_empty() {
        bail!("empty value list");
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        bail!("value {v} is not finite");
    }
    Ok(values)
}

fn threads() -> Result<Option<usize>> {
    match std::env::var("GFMLAB_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => bail!("GFMLAB_THREADS must be a positive integer, got '{v}'"),
        },
        Err(_) => Ok(None),
    }
}

const SUMMARY_HEADER: [&str; 13] = [
    "value",
    "file",
    "status",
    "steady_state_mean",
    "peak_to_peak",
    "oscillation_detected",
    "pole_slip_count",
    "max_power",
    "soc_final",
    "soc_violated",
    "sync_held",
    "max_abs_p_after_event",
    "error",
];

fn metric_fields(m: &MetricsReport) -> Vec<String> {
    vec![
        fmt_f64(m.steady_state_mean),
        fmt_f64(m.peak_to_peak),
        m.oscillation_detected.to_string(),
        m.pole_slip_count.to_string(),
        fmt_f64(m.max_power),
        fmt_f64(m.soc_final),
        m.soc_violated.to_string(),
        m.sync_held.to_string(),
    ]
}

fn cmd_sweep(spec: &str, param: &str, values: &str, dir: &Path, flags: &SimFlags) -> Result<ExitCode> {
    let values = parse_values(values)?;
    let base = flags.apply(resolve(spec)?)?;
    let scenarios = values
        .iter()
        .map(|&v| config::with_parameter(&base, param, v).and_then(|sc| flags.apply(sc)))
        .collect::<Result<Vec<_>>>()?;
    let results = run_batch(&scenarios, threads()?);

    let mut summary = csv::Writer::from_writer(Vec::new());
    summary.write_record(SUMMARY_HEADER)?;
    let mut code = ExitCode::SUCCESS;
    for ((v, sc), res) in values.iter().zip(&scenarios).zip(results) {
        let file = format!("{}_{}_{}.csv", base.name, param, v);
        let (status, trace, err) = match res {
            Ok(tr) => ("ok", Some(tr), String::new()),
            Err(Error::Diverged { t, reason, partial }) => {
                code = ExitCode::from(2);
                ("diverged", Some(*partial), format!("diverged at t = {t} s: {reason}"))
            }
            Err(e) => {
                code = ExitCode::from(1);
                ("error", None, e.to_string())
            }
        };
        let mut row = vec![fmt_f64(*v), String::new(), status.to_string()];
        match &trace {
            Some(tr) => {
                write_atomic(&dir.join(&file), &trace_to_bytes(tr)?)?;
                row[1] = file;
                match report(tr, flags.window) {
                    Ok(m) => row.extend(metric_fields(&m)),
                    Err(_) => row.extend(std::iter::repeat_n(String::new(), 8)),
                }
                let start = sc.profile.event_start().unwrap_or(0.0);
                row.push(fmt_f64(tr.since(start).iter().map(|s| s.p.abs()).fold(0.0, f64::max)));
            }
            None => row.extend(std::iter::repeat_n(String::new(), 9)),
        }
        row.push(err);
        summary.write_record(&row)?;
    }
    let summary_path = dir.join(format!("{}_{}_summary.csv", base.name, param));
    write_atomic(&summary_path, &summary.into_inner()?)?;
    println!("wrote {} runs; summary in {}", values.len(), summary_path.display());
    Ok(code)
}

#[derive(Serialize)]
struct ModelFile {
    regime: String,
    num: Vec<f64>,
    den: Vec<f64>,
    dc_gain: f64,
    stable: bool,
    /// `[re, im]` pairs, rad/s.
    poles: Vec<[f64; 2]>,
}

fn cmd_linear(
    regime: &str,
    base: &str,
    config_path: Option<&Path>,
    scr: Option<f64>,
    dir: &Path,
    t_end: f64,
    dt: f64,
) -> Result<ExitCode> {
    let r: Regime = regime.parse()?;
    let mut sc = match config_path {
        Some(p) => config::load_config(p)?,
        None => {
            config::preset(base).with_context(|| format!("unknown base '{base}'; use table1 or {}", config::names()))?
        }
    };
    if let Some(scr) = scr {
        if !(scr.is_finite() && scr > 0.0) {
            bail!("scr must be positive, got {scr}");
        }
        sc.circuit.x_g = 1.0 / scr;
        sc.validate()?;
    }
    if !(t_end > 0.0 && dt > 0.0 && t_end.is_finite() && t_end / dt <= 1e7) {
        bail!("need t_end > 0 and 0 < dt with at most 1e7 samples");
    }
    let model = build_closed_loop(r, &LoopParams::from_scenario(&sc)?)?;
    let mut poles = model.poles();
    poles.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let stable = model.is_stable();
    let file = ModelFile {
        regime: regime.to_string(),
        num: model.num().to_vec(),
        den: model.den().to_vec(),
        dc_gain: model.dc_gain(),
        stable,
        poles: poles.iter().map(|p| [p.re, p.im]).collect(),
    };
    let step = model.step_response(&uniform_grid(t_end, dt))?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["time_s", "value"])?;
    for (t, v) in step.t.iter().zip(&step.values) {
        w.write_record([fmt_f64(*t), fmt_f64(*v)])?;
    }
    write_atomic(
        &dir.join(format!("{regime}_model.toml")),
        toml::to_string(&file)?.as_bytes(),
    )?;
    write_atomic(&dir.join(format!("{regime}_step.csv")), &w.into_inner()?)?;

    println!("regime={regime}");
    println!("order={}", model.order());
    println!("dc_gain={:.3}", file.dc_gain);
    for p in &poles {
        println!("pole={} {:+}j", p.re, p.im);
    }
    println!("final_value={:.4}", step.values.last().copied().unwrap_or(f64::NAN));
    println!("stable={stable}");
    Ok(ExitCode::SUCCESS)
}

fn cmd_plot(trace: &Path, columns: &str, out: Option<PathBuf>) -> Result<ExitCode> {
    let names: Vec<&str> = columns.split(',').map(str::trim).filter(|c| !c.is_empty()).collect();
    if names.is_empty() {
        bail!("no columns given");
    }
    for n in &names {
        if *n == "time_s" || !HEADER.contains(n) {
            bail!("unknown column '{n}'; choose from {}", HEADER[1..].join(", "));
        }
    }
    let file = std::fs::File::open(trace).with_context(|| format!("opening {}", trace.display()))?;
    let table = read_table(file).with_context(|| format!("reading {}", trace.display()))?;
    let series: Vec<Series> = names
        .iter()
        .map(|n| Series {
            name: n,
            values: table.column(n).unwrap(),
        })
        .collect();
    let svg = line_chart(table.column("time_s").unwrap(), &series, "time_s");
    let out = out.unwrap_or_else(|| trace.with_extension("svg"));
    write_atomic(&out, svg.as_bytes())?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_list() -> Result<ExitCode> {
    for b in builtin_scenarios() {
        let rocof = if b.rocof_set.is_empty() {
            String::new()
        } else {
            let v: Vec<String> = b.rocof_set.iter().map(|r| r.to_string()).collect();
            format!(" [rocof sweep: {}]", v.join(", "))
        };
        println!("{:<8} {}{rocof}", b.name, b.description);
    }
    Ok(ExitCode::SUCCESS)
}
