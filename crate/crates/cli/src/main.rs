//! `symcap`: symplectic spectra, capacities, non-squeezing batches, Maslov
//! indices and EBK levels from the command line.
//!
//! Exit codes: 0 success, 1 a verification failed, 2 bad input.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use symcap::ebk::{
    energy_levels, verify_energy_bound, ActionHamiltonian, ActionTable, Oscillator, PowerLaw,
};
use symcap::io::{
    matrix_rows, parse_point, CapacityReport, EbkSpectrumJson, LoopJson, MatrixJson, RegionJson,
    SpectrumJson,
};
use symcap::maslov::{maslov_index, torus_cycle_loop, transport_loop, LagrangianLoop};
use symcap::regions::capacity;
use symcap::selftest::{self, SelftestConfig};
use symcap::squeeze::{nonsqueeze_verify_with, SqueezeOptions};
use symcap::symcore::{
    flow_energy_drift, quad_propagator, random_symplectic, QuadraticHamiltonian,
};
use symcap::williamson::symplectic_spectrum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(
    name = "symcap",
    version,
    about = "Symplectic capacities, non-squeezing and EBK levels"
)]
struct Cli {
    /// Reduced Planck constant.
    #[arg(long, global = true, env = "SYMCAP_HBAR", default_value_t = 1.0)]
    hbar: f64,
    /// Relative tolerance of the numerical checks.
    #[arg(long, global = true, env = "SYMCAP_TOL", default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, global = true, env = "SYMCAP_SEED", default_value_t = 0)]
    seed: u64,
    /// Monte-Carlo samples per estimate.
    #[arg(
        long,
        global = true,
        env = "SYMCAP_SAMPLES",
        default_value_t = 1_000_000
    )]
    samples: usize,
    #[arg(long, global = true, env = "SYMCAP_FORMAT", value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report here instead of standard output.
    #[arg(long, global = true, env = "SYMCAP_OUT")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Symplectic spectrum of a positive-definite Hessian.
    Spectrum {
        /// `{"n", "rows"}` JSON, inline or a file path.
        #[arg(long)]
        hessian: String,
    },
    /// Capacity of a region.
    Capacity {
        /// Region JSON tagged by "variant", inline or a file path.
        #[arg(long)]
        region: String,
    },
    /// Shadow-area check of non-squeezing over random symplectic maps.
    Squeeze {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        /// Log-scale of the random maps.
        #[arg(long, default_value_t = 1.0)]
        spread: f64,
    },
    /// Maslov index of a loop file, or of a basic cycle on a torus.
    Maslov {
        /// `{"n", "frames"}` JSON, inline or a file path.
        #[arg(long = "loop", conflicts_with = "torus")]
        loop_json: Option<String>,
        /// Torus radii, comma separated.
        #[arg(long, value_delimiter = ',')]
        torus: Option<Vec<f64>>,
        /// 1-based cycle index on the torus.
        #[arg(long, default_value_t = 1)]
        cycle: usize,
        /// Frames sampled along the torus cycle.
        #[arg(long, default_value_t = 64)]
        points: usize,
        /// Transport the loop by a random symplectic map drawn from `--seed`.
        #[arg(long)]
        transport: bool,
    },
    /// EBK levels for an action Hamiltonian.
    Ebk {
        /// `oscillator:w1,w2,..`, `power:a` or `table:path` (CSV with header `I,E`).
        #[arg(long = "K")]
        k: String,
        #[arg(long, value_delimiter = ',', required = true)]
        maslov: Vec<i64>,
        #[arg(long = "Nmax", default_value_t = 3)]
        n_max: u32,
    },
    /// Propagator of a quadratic Hamiltonian.
    Flow {
        /// `{"n", "rows"}` JSON, inline or a file path.
        #[arg(long)]
        hessian: String,
        #[arg(long)]
        t: f64,
        /// Initial point as a JSON array `[x.., p..]`.
        #[arg(long)]
        point: Option<String>,
    },
    /// Runs the acceptance checks.
    Selftest,
}

enum Outcome {
    Ok,
    Failed,
}

struct Emit<'a> {
    format: Format,
    out: Option<&'a Path>,
}

impl Emit<'_> {
    fn write(&self, json: &impl Serialize, csv: impl FnOnce() -> Result<String>) -> Result<()> {
        let text = match self.format {
            Format::Json => serde_json::to_string_pretty(json)? + "\n",
            Format::Csv => csv()?,
        };
        match self.out {
            Some(path) => {
                fs::write(path, text).with_context(|| format!("writing {}", path.display()))
            }
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}

fn csv_table<I, R>(header: &[&str], rows: I) -> Result<String>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

/// Inline JSON, or the contents of the named file.
fn json_arg(arg: &str) -> Result<String> {
    let t = arg.trim_start();
    if t.starts_with('{') || t.starts_with('[') {
        return Ok(arg.to_string());
    }
    fs::read_to_string(arg).with_context(|| format!("reading {arg}"))
}

fn hessian_arg(arg: &str) -> Result<MatrixJson> {
    serde_json::from_str(&json_arg(arg)?).context("parsing Hessian JSON")
}

fn action_hamiltonian(spec: &str, dof: usize) -> Result<Box<dyn ActionHamiltonian<f64>>> {
    let (kind, arg) = spec.split_once(':').unwrap_or((spec, ""));
    match kind {
        "oscillator" => {
            let omega = arg
                .split(',')
                .map(|w| {
                    w.trim()
                        .parse::<f64>()
                        .with_context(|| format!("bad frequency {w:?}"))
                })
                .collect::<Result<Vec<_>>>()?;
            if omega.len() != dof {
                bail!("{} frequencies for {dof} Maslov indices", omega.len());
            }
            Ok(Box::new(Oscillator { omega }))
        }
        "power" => {
            let exponent: f64 = arg
                .trim()
                .parse()
                .with_context(|| format!("bad exponent {arg:?}"))?;
            Ok(Box::new(PowerLaw { dof, exponent }))
        }
        "table" => {
            if dof != 1 {
                bail!("an action table has one degree of freedom, got {dof} Maslov indices");
            }
            let mut rdr = csv::Reader::from_path(arg).with_context(|| format!("reading {arg}"))?;
            let (mut actions, mut energies) = (Vec::new(), Vec::new());
            for rec in rdr.deserialize::<(f64, f64)>() {
                let (i, e) = rec?;
                actions.push(i);
                energies.push(e);
            }
            Ok(Box::new(ActionTable::new(actions, energies)?))
        }
        _ => bail!("unknown K spec {spec:?}; expected oscillator:.., power:a or table:path"),
    }
}

#[derive(Serialize)]
struct EbkReport {
    #[serde(flatten)]
    spectrum: EbkSpectrumJson,
    /// `K(ħ/2, …, ħ/2)`; absent when `K` is not monotone.
    ground_bound: Option<f64>,
    bound_violations: usize,
}

#[derive(Serialize)]
struct MaslovReport {
    index: i64,
    raw_winding: f64,
    refinement_depth: usize,
    frames: usize,
}

#[derive(Serialize)]
struct FlowReport {
    t: f64,
    propagator: MatrixJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    image: Option<Vec<f64>>,
    /// Largest relative energy change over 64 evenly spaced times in `[0, t]`.
    #[serde(skip_serializing_if = "Option::is_none")]
    energy_drift: Option<f64>,
}

fn run(cli: &Cli) -> Result<Outcome> {
    if !(cli.hbar > 0.0 && cli.hbar.is_finite()) {
        bail!("--hbar must be positive");
    }
    if cli.tol.is_nan() || cli.tol <= 0.0 || cli.samples == 0 {
        bail!("--tol and --samples must be positive");
    }
    let emit = Emit {
        format: cli.format,
        out: cli.out.as_deref(),
    };
    match &cli.command {
        Command::Spectrum { hessian } => {
            let spec = symplectic_spectrum(&hessian_arg(hessian)?.to_matrix::<f64>()?)?;
            emit.write(&SpectrumJson::from(&spec), || Ok(spec.to_csv()?))?;
        }
        Command::Capacity { region } => {
            let parsed: RegionJson =
                serde_json::from_str(&json_arg(region)?).context("parsing region JSON")?;
            let report = CapacityReport::from(&capacity(&parsed.to_region::<f64>(cli.tol)?)?);
            emit.write(&report, || {
                let b = report
                    .bounds
                    .map(|[lo, hi]| (format!("{lo:e}"), format!("{hi:e}")));
                let (lo, hi) = b.unwrap_or_default();
                csv_table(
                    &["value", "exact", "lower", "upper"],
                    [[
                        format!("{:e}", report.value),
                        report.exact.to_string(),
                        lo,
                        hi,
                    ]],
                )
            })?;
        }
        Command::Squeeze {
            n,
            trials,
            radius,
            spread,
        } => {
            let opts = SqueezeOptions {
                radius: *radius,
                spread: *spread,
                tol: cli.tol,
            };
            let report = nonsqueeze_verify_with::<f64>(*n, *trials, cli.seed, &opts)?;
            emit.write(&report, || {
                csv_table(
                    &[
                        "n",
                        "trials",
                        "seed",
                        "violations",
                        "min_ratio",
                        "min_intersection_ratio",
                        "max_intersection_ratio",
                    ],
                    [[
                        report.n.to_string(),
                        report.trials.to_string(),
                        report.seed.to_string(),
                        report.violations.to_string(),
                        format!("{:e}", report.min_ratio),
                        format!("{:e}", report.min_intersection_ratio),
                        format!("{:e}", report.max_intersection_ratio),
                    ]],
                )
            })?;
            if report.violations > 0 {
                return Ok(Outcome::Failed);
            }
        }
        Command::Maslov {
            loop_json,
            torus,
            cycle,
            points,
            transport,
        } => {
            let lp: LagrangianLoop<f64> = match (loop_json, torus) {
                (Some(j), _) => serde_json::from_str::<LoopJson>(&json_arg(j)?)
                    .context("parsing loop JSON")?
                    .to_loop()?,
                (None, Some(radii)) => {
                    if *cycle == 0 {
                        bail!("--cycle counts from 1");
                    }
                    torus_cycle_loop(radii, cycle - 1, *points)?
                }
                (None, None) => bail!("give --loop or --torus"),
            };
            let lp = if *transport {
                transport_loop(&lp, &random_symplectic(lp.dof(), cli.seed, 0.5)?)?
            } else {
                lp
            };
            let m = maslov_index(&lp)?;
            let report = MaslovReport {
                index: m.index,
                raw_winding: m.raw_winding,
                refinement_depth: m.refinement_depth,
                frames: lp.frames().len(),
            };
            emit.write(&report, || {
                csv_table(
                    &["index", "raw_winding", "refinement_depth", "frames"],
                    [[
                        report.index.to_string(),
                        format!("{:e}", report.raw_winding),
                        report.refinement_depth.to_string(),
                        report.frames.to_string(),
                    ]],
                )
            })?;
        }
        Command::Ebk { k, maslov, n_max } => {
            let k = action_hamiltonian(k, maslov.len())?;
            let spectrum = energy_levels(k.as_ref(), maslov, *n_max, cli.hbar)?;
            let (ground_bound, bound_violations) = if k.is_monotone() {
                let b = verify_energy_bound(k.as_ref(), &spectrum)?;
                (Some(b.ground_bound), b.violations)
            } else {
                (None, 0)
            };
            let report = EbkReport {
                spectrum: EbkSpectrumJson::from_spectrum(&spectrum)?,
                ground_bound,
                bound_violations,
            };
            emit.write(&report, || Ok(report.spectrum.to_csv()?))?;
            if bound_violations > 0 || report.spectrum.levels.iter().any(|l| !l.satisfied) {
                return Ok(Outcome::Failed);
            }
        }
        Command::Flow { hessian, t, point } => {
            let h = QuadraticHamiltonian::new(hessian_arg(hessian)?.to_matrix::<f64>()?)?;
            let s = quad_propagator(&h, *t)?;
            let (image, energy_drift) = match point {
                Some(p) => {
                    let z0 = parse_point::<f64>(&json_arg(p)?)?;
                    let image = s.apply(&z0)?.as_vector().iter().copied().collect();
                    let times: Vec<f64> = (0..=64).map(|k| *t * k as f64 / 64.0).collect();
                    (Some(image), Some(flow_energy_drift(&h, &z0, &times)?))
                }
                None => (None, None),
            };
            let report = FlowReport {
                t: *t,
                propagator: MatrixJson::from_matrix(s.as_matrix())?,
                image,
                energy_drift,
            };
            emit.write(&report, || {
                let cols: Vec<String> = (1..=s.as_matrix().ncols())
                    .map(|c| format!("c{c}"))
                    .collect();
                let header: Vec<&str> = cols.iter().map(String::as_str).collect();
                csv_table(
                    &header,
                    matrix_rows(s.as_matrix())
                        .into_iter()
                        .map(|r| r.into_iter().map(|v| format!("{v:e}"))),
                )
            })?;
        }
        Command::Selftest => {
            let config = SelftestConfig {
                hbar: cli.hbar,
                tol: cli.tol,
                seed: cli.seed,
                samples: cli.samples,
            };
            let report = selftest::run(&config)?;
            for c in &report.criteria {
                log::info!(
                    "{} {} {}: {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.id,
                    c.name,
                    c.detail
                );
            }
            emit.write(&report, || {
                csv_table(
                    &["id", "name", "passed", "detail"],
                    report.criteria.iter().map(|c| {
                        [
                            c.id.to_string(),
                            c.name.to_string(),
                            c.passed.to_string(),
                            c.detail.clone(),
                        ]
                    }),
                )
            })?;
            if !report.passed {
                return Ok(Outcome::Failed);
            }
        }
    }
    Ok(Outcome::Ok)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Failed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
