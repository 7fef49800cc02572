use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use serfati_core::euler3d;
use serfati_core::harness::rundir::{write_monitor_csv, MonitorRow};
use serfati_core::harness::{self, all_pass, Euler3dParams, Euler3dSuite, Experiment, InitSpec, RunConfig, Verdict};
use serfati_core::lp::{self, DyadicFamily};
use serfati_core::sqg::SqgMode;
use serfati_core::{fieldio, ul, Error, ScalarField};

/// Verification harness for kernel-split SQG and 3D Euler flows on a periodic box.
#[derive(Parser)]
#[command(name = "serfati-flows", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config into its output directory.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Print a norm of a field file as JSON.
    Analyze {
        file: PathBuf,
        #[arg(long, value_enum)]
        norm: NormKind,
        /// Hölder exponent for cr, crdot and holder.
        #[arg(long, default_value_t = 1.5)]
        r: f64,
        /// Sobolev index for hsul.
        #[arg(long, default_value_t = 1)]
        s: usize,
        /// Bump radius for hsul.
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
    },
    /// Run verification suites, or re-derive the verdicts of a run directory.
    Verify {
        /// Comma-separated suites or groups: all, lp, euler3d, or one of the suite names.
        #[arg(default_value = "all")]
        suite: String,
        /// Re-emit verdicts from an existing run directory instead.
        #[arg(long, conflicts_with = "suite")]
        rundir: Option<PathBuf>,
        /// Also write the verdicts as JSON here.
        #[arg(long)]
        json: Option<PathBuf>,
        /// List the suite names and exit.
        #[arg(long)]
        list: bool,
    },
    /// Integrate SQG and write a run directory.
    SqgRun {
        /// sine, radial, random[:SEED] or file:PATH
        #[arg(long, default_value = "random")]
        init: String,
        #[arg(long, value_enum, default_value_t = Mode::Spectral)]
        mode: Mode,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long = "T", default_value_t = 0.5)]
        t_end: f64,
        #[arg(long, default_value_t = 1.0 / 64.0)]
        dt: f64,
        /// Points per axis.
        #[arg(long, default_value_t = 128)]
        grid: usize,
        /// Box half-width; accepts a multiple of pi such as `4pi`.
        #[arg(long = "box", default_value = "4pi", value_parser = parse_length)]
        half_width: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.5)]
        amplitude: f64,
        #[arg(long, default_value_t = 4)]
        output_every: usize,
        #[arg(long, default_value_t = 1.5)]
        r: f64,
        #[arg(long, default_value_t = 3)]
        s: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one of the 3D identity checks and write verdicts and time series.
    Euler3dCheck {
        #[arg(long, value_enum)]
        suite: Check3d,
        #[arg(long, default_value_t = 32)]
        grid: usize,
        #[arg(long = "box", default_value = "pi", value_parser = parse_length)]
        half_width: f64,
        #[arg(long = "T", default_value_t = 0.25)]
        t_end: f64,
        #[arg(long, default_value_t = 1.0 / 32.0)]
        dt: f64,
        #[arg(long, default_value_t = 0.35)]
        lambda: f64,
        #[arg(long, default_value_t = 3)]
        seed: u64,
        #[arg(long, default_value_t = 0.5)]
        amplitude: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Localize and band-limit 3D initial data.
    PrepareData {
        /// Velocity field file; a random divergence-free field is drawn when absent.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 64)]
        grid: usize,
        #[arg(long = "box", default_value = "3pi", value_parser = parse_length)]
        half_width: f64,
        #[arg(long, default_value_t = 100)]
        seed: u64,
        /// Cutoff radius index.
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        s: usize,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        /// Output field file.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum NormKind {
    Cr,
    Crdot,
    Holder,
    L2ul,
    Hsul,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Spectral,
    Serfati,
}

#[derive(Clone, Copy, ValueEnum)]
enum Check3d {
    Bs,
    Stream,
    Pressure,
    Serfati,
    Ibp,
    Gronwall,
}

impl From<Check3d> for Euler3dSuite {
    fn from(c: Check3d) -> Self {
        match c {
            Check3d::Bs => Euler3dSuite::Bs,
            Check3d::Stream => Euler3dSuite::Stream,
            Check3d::Pressure => Euler3dSuite::Pressure,
            Check3d::Serfati => Euler3dSuite::Serfati,
            Check3d::Ibp => Euler3dSuite::Ibp,
            Check3d::Gronwall => Euler3dSuite::Gronwall,
        }
    }
}

fn parse_length(s: &str) -> Result<f64, String> {
    let t = s.trim().to_ascii_lowercase();
    let value = match t.strip_suffix("pi") {
        Some("") => std::f64::consts::PI,
        Some(m) => m.trim_end_matches('*').parse::<f64>().map_err(|e| e.to_string())? * std::f64::consts::PI,
        None => t.parse::<f64>().map_err(|e| e.to_string())?,
    };
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(format!("length must be positive, got {s}"))
    }
}

/// Errors the user can fix by changing the invocation.
fn is_usage(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        matches!(
            c.downcast_ref::<Error>(),
            Some(Error::Config(_) | Error::UnknownSuite(_) | Error::Precondition(_) | Error::InvalidGrid(_) | Error::LambdaTooLarge { .. })
        )
    })
}

fn configure_threads() -> Result<(), String> {
    if let Ok(v) = std::env::var("SERFATI_FLOWS_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| format!("SERFATI_FLOWS_THREADS must be a positive integer, got `{v}`"))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn report(verdicts: &[Verdict]) -> ExitCode {
    for v in verdicts {
        println!("{}", v.line());
    }
    let failed = verdicts.iter().filter(|v| !v.pass).count();
    println!("{} checks, {} failed", verdicts.len(), failed);
    if all_pass(verdicts) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn write_verdicts(path: &Path, verdicts: &[Verdict]) -> anyhow::Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(verdicts)?).with_context(|| format!("writing {}", path.display()))
}

fn read_components(path: &Path) -> anyhow::Result<Vec<ScalarField>> {
    let (comps, _) = fieldio::read_components(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(comps)
}

fn analyze(file: &Path, norm: NormKind, r: f64, s: usize, lambda: f64) -> anyhow::Result<serde_json::Value> {
    let comps = read_components(file)?;
    let grid = *comps[0].grid();
    Ok(match norm {
        NormKind::Cr | NormKind::Crdot => {
            let family = DyadicFamily::new(grid)?;
            let homogeneous = matches!(norm, NormKind::Crdot);
            let reports = comps
                .iter()
                .map(|c| family.holder_norm(c, r, homogeneous))
                .collect::<Result<Vec<_>, _>>()?;
            let value = reports.iter().map(|x| x.value).fold(0.0, f64::max);
            json!({ "norm": if homogeneous { "crdot" } else { "cr" }, "exponent": r, "value": value, "components": reports })
        }
        NormKind::Holder => {
            let values = comps.iter().map(|c| lp::classical_holder_norm(c, r)).collect::<Result<Vec<_>, _>>()?;
            let value = values.iter().copied().fold(0.0, f64::max);
            json!({ "norm": "holder", "exponent": r, "value": value, "components": values })
        }
        NormKind::L2ul => serde_json::to_value(ul::lp_ul_norm_with(&comps, 2.0, ul::DEFAULT_STRIDE)?)?,
        NormKind::Hsul => serde_json::to_value(ul::hs_ul_norm_with(&comps, s, lambda, ul::DEFAULT_STRIDE)?)?,
    })
}

fn euler3d_check(suite: Check3d, params: Euler3dParams, out: &Path) -> anyhow::Result<Vec<Verdict>> {
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let result = harness::euler3d_check(suite.into(), &params)?;
    write_verdicts(&out.join("verdicts.json"), &result.verdicts)?;
    let rows: Vec<MonitorRow> = result.series;
    write_monitor_csv(&out.join("timeseries.csv"), &rows)?;
    Ok(result.verdicts)
}

#[allow(clippy::too_many_arguments)]
fn prepare_data(
    input: Option<&Path>,
    grid: usize,
    half_width: f64,
    seed: u64,
    n: usize,
    s: usize,
    lambda: f64,
    out: &Path,
) -> anyhow::Result<Vec<Verdict>> {
    let u0 = match input {
        Some(p) => fieldio::read_vector(p).with_context(|| format!("reading {}", p.display()))?,
        None => {
            let g = serfati_core::Grid::new(3, half_width, grid)?;
            serfati_core::random::divergence_free(
                g,
                serfati_core::random::Band::new(0.3, 1.2),
                1.0,
                1.0,
                &mut serfati_core::random::rng(seed),
            )
        }
    };
    let family = DyadicFamily::new(*u0.grid())?;
    let start = std::time::Instant::now();
    let p = euler3d::prepare_initial_data(&u0, n, &family, s, lambda)?;
    let secs = start.elapsed().as_secs_f64();
    let provenance = format!("prepared data n {n} m_n {} s {s} lambda {lambda}", p.m_n);
    fieldio::write_vector(out, &p.u_n, &provenance)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&json!({
            "n": p.n,
            "m_n": p.m_n,
            "form_mismatch": p.form_mismatch,
            "divergence": p.divergence,
            "hs_ul": p.hs_ul,
            "hs_ul_ratio": p.hs_ul_ratio,
        }))?
    );
    Ok(vec![
        Verdict::new("prepare-data", "curl form equals product form", p.form_mismatch, 1e-10, secs),
        Verdict::new("prepare-data", "prepared data divergence-free", p.divergence, 1e-10, 0.0),
    ])
}

fn execute(cli: Cli) -> anyhow::Result<ExitCode> {
    Ok(match cli.command {
        Command::Run { config } => {
            let text = std::fs::read_to_string(&config).with_context(|| format!("reading {}", config.display()))?;
            let cfg = RunConfig::from_json(&text).with_context(|| format!("in {}", config.display()))?;
            report(&harness::run(&cfg)?.verdicts)
        }
        Command::Analyze {
            file,
            norm,
            r,
            s,
            lambda,
        } => {
            println!("{}", serde_json::to_string_pretty(&analyze(&file, norm, r, s, lambda)?)?);
            ExitCode::SUCCESS
        }
        Command::Verify {
            suite,
            rundir,
            json,
            list,
        } => {
            if list {
                for name in harness::SUITE_NAMES {
                    println!("{name}");
                }
                println!("groups: all, lp, euler3d");
                return Ok(ExitCode::SUCCESS);
            }
            let verdicts = match rundir {
                Some(dir) => harness::evaluate_run_dir(&dir)?,
                None => harness::verify(&suite)?,
            };
            if let Some(p) = json {
                write_verdicts(&p, &verdicts)?;
            }
            report(&verdicts)
        }
        Command::SqgRun {
            init,
            mode,
            lambda,
            t_end,
            dt,
            grid,
            half_width,
            seed,
            amplitude,
            output_every,
            r,
            s,
            out,
        } => {
            let mut cfg = RunConfig::default_for(Experiment::Sqg);
            cfg.init = init.parse::<InitSpec>()?;
            cfg.mode = match mode {
                Mode::Spectral => SqgMode::Spectral,
                Mode::Serfati => SqgMode::Serfati,
            };
            cfg.lambda = lambda;
            cfg.time.t_end = t_end;
            cfg.time.dt = dt;
            cfg.grid.n = grid;
            cfg.grid.half_width = half_width;
            cfg.seed = seed;
            cfg.amplitude = amplitude;
            cfg.output_every = output_every;
            cfg.r = r;
            cfg.s = s;
            cfg.out_dir = out;
            report(&harness::run(&cfg)?.verdicts)
        }
        Command::Euler3dCheck {
            suite,
            grid,
            half_width,
            t_end,
            dt,
            lambda,
            seed,
            amplitude,
            out,
        } => {
            let params = Euler3dParams {
                n: grid,
                half_width,
                t_end,
                dt,
                lambda,
                seed,
                amplitude,
            };
            report(&euler3d_check(suite, params, &out)?)
        }
        Command::PrepareData {
            input,
            grid,
            half_width,
            seed,
            n,
            s,
            lambda,
            out,
        } => report(&prepare_data(input.as_deref(), grid, half_width, seed, n, s, lambda, &out)?),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if is_usage(&e) { 2 } else { 1 })
        }
    }
}
