//! Subcommand definitions and dispatch.
//!
//! Exit codes: 0 on success, 2 for configuration problems (unreadable
//! inputs, malformed JSON, inconsistent parameters), 1 for computation
//! failures and failed verification suites.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use polyhardy::almansi::{gauss_decompose, AlmansiTable, MultiPoly};
use polyhardy::bvp;
use polyhardy::cubature::{cubature, cubature_error_bound, PseudoPositiveMeasure};
use polyhardy::hardy::max_principle_bound;
use polyhardy::interp::{interpolation_error_bound, polyharmonic_interpolant, NodeSet};
use polyhardy::kernels::{
    cauchy_kernel, cauchy_kernel_series, hua_aronszajn_kernel, poisson_kernel_c, KernelPoint,
};
use polyhardy::sphere::eval_zonal;
use polyhardy::verify::{run_suite, Suite};

use crate::output;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Compute(String),
}

type CliResult<T> = Result<T, CliError>;

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl From<polyhardy::Error> for CliError {
    fn from(e: polyhardy::Error) -> Self {
        CliError::Compute(e.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "polyhardy",
    version,
    about = "Per-mode analysis on the quadric ball: decomposition, kernels, Dirichlet solving, interpolation, cubature"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Decompose a multivariate polynomial into a coefficient table.
    Decompose {
        /// Polynomial JSON: {"d":int,"terms":[{"alpha":[..],"c":[re,im]},..]}
        #[arg(long)]
        input: PathBuf,
        /// Output table JSON path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate a coefficient table on a CSV grid of (r, theta...) rows.
    Eval {
        #[arg(long)]
        table: PathBuf,
        /// CSV rows: r, theta_1, ..., theta_d
        #[arg(long)]
        grid: PathBuf,
        /// Output CSV path; rows gain re, im columns.
        #[arg(long)]
        out: PathBuf,
        /// Also print the certified sup bound over |z| <= q.
        #[arg(long = "sup-bound-q")]
        sup_bound_q: Option<f64>,
    },
    /// Evaluate a kernel on a list of points, with series residuals.
    Kernel {
        #[arg(long, value_enum)]
        kind: KernelKind,
        #[arg(long)]
        d: usize,
        /// JSON list: [{"zeta":[re,im],"z":[re,im],"theta":[..],"theta_prime":[..]},..]
        #[arg(long)]
        points: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 60)]
        kmax: usize,
        #[arg(long, default_value_t = 60)]
        jmax: usize,
    },
    /// Dirichlet problems for the iterated Laplacian.
    Bvp {
        #[command(subcommand)]
        action: BvpAction,
    },
    /// Per-mode interpolation of a coefficient table.
    Interp {
        /// Node set JSON: {"b":real,"nodes":[..]}
        #[arg(long)]
        nodes: PathBuf,
        /// Input table JSON.
        #[arg(long)]
        input: PathBuf,
        /// Interpolation degree; must match the node count minus one.
        #[arg(long = "N")]
        n: usize,
        /// Outer radius; must match the node set.
        #[arg(long)]
        b: f64,
        #[arg(long, default_value_t = 32)]
        kmax: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Per-mode interpolatory cubature of a coefficient table.
    Cubature {
        /// Measure JSON (components or product form).
        #[arg(long)]
        measure: PathBuf,
        /// Input table JSON.
        #[arg(long)]
        input: PathBuf,
        /// Node set JSON.
        #[arg(long)]
        nodes: PathBuf,
        #[arg(long = "N")]
        n: usize,
        #[arg(long)]
        kmax: usize,
        /// Output JSON path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the self-check suites; exit 0 only if every check passes.
    Verify {
        /// One of: sphere, basis, kernels, reproduce, bvp, interp,
        /// cubature, hardy, all.
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Subcommand)]
pub enum BvpAction {
    /// Boundary data of a table: (Laplacian^m u)|_{r=1} for m = 0..N-1.
    Forward {
        #[arg(long)]
        input: PathBuf,
        #[arg(long = "N")]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recover the table with the given boundary data.
    Solve {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sobolev-scale diagnostic of boundary data.
    Diagnose {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum KernelKind {
    Cauchy,
    Poisson,
    Hua,
}

fn ensure_distinct(paths: &[&Path]) -> CliResult<()> {
    for (i, a) in paths.iter().enumerate() {
        for b in paths.iter().skip(i + 1) {
            if a == b {
                return Err(config_err(format!(
                    "input and output paths must be distinct ({} given twice)",
                    a.display()
                )));
            }
        }
    }
    Ok(())
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path, what: &str) -> CliResult<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| config_err(format!("cannot read {what} {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| config_err(format!("malformed {what} {}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let text = output::to_json(value)
        .map_err(|e| CliError::Compute(format!("serialization failed: {e}")))?;
    fs::write(path, text)
        .map_err(|e| config_err(format!("cannot write {}: {e}", path.display())))
}

pub fn run(cli: Cli) -> CliResult<ExitCode> {
    match cli.command {
        Command::Decompose { input, out } => {
            ensure_distinct(&[&input, &out])?;
            let poly: MultiPoly = read_json(&input, "polynomial")?;
            let decomposition = gauss_decompose(&poly)?;
            write_json(&out, &decomposition.table)?;
            println!(
                "{}",
                output::to_json(&serde_json::json!({ "residual": decomposition.residual }))
                    .map_err(|e| CliError::Compute(e.to_string()))?
                    .trim_end()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Eval {
            table,
            grid,
            out,
            sup_bound_q,
        } => {
            ensure_distinct(&[&table, &grid, &out])?;
            let table: AlmansiTable = read_json(&table, "table")?;
            run_eval(&table, &grid, &out)?;
            if let Some(q) = sup_bound_q {
                let bound = max_principle_bound(&table, q)?;
                println!(
                    "{}",
                    output::to_json(&serde_json::json!({ "q": q, "sup_bound": bound }))
                        .map_err(|e| CliError::Compute(e.to_string()))?
                        .trim_end()
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Kernel {
            kind,
            d,
            points,
            out,
            kmax,
            jmax,
        } => {
            ensure_distinct(&[&points, &out])?;
            run_kernel(kind, d, &points, &out, kmax, jmax)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Bvp { action } => {
            match action {
                BvpAction::Forward { input, n, out } => {
                    ensure_distinct(&[&input, &out])?;
                    let table: AlmansiTable = read_json(&input, "table")?;
                    let data = bvp::forward_boundary(&table, n)?;
                    write_json(&out, &data)?;
                }
                BvpAction::Solve { input, out } => {
                    ensure_distinct(&[&input, &out])?;
                    let data: bvp::BoundaryData = read_json(&input, "boundary data")?;
                    let table = bvp::solve_dirichlet(&data)?;
                    write_json(&out, &table)?;
                }
                BvpAction::Diagnose { input, out } => {
                    ensure_distinct(&[&input, &out])?;
                    let data: bvp::BoundaryData = read_json(&input, "boundary data")?;
                    write_json(&out, &bvp::sobolev_diagnostic(&data))?;
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Interp {
            nodes,
            input,
            n,
            b,
            kmax,
            out,
        } => {
            ensure_distinct(&[&nodes, &input, &out])?;
            let ns: NodeSet = read_json(&nodes, "node set")?;
            if ns.degree() != n {
                return Err(config_err(format!(
                    "--N {n} does not match the node set (degree {})",
                    ns.degree()
                )));
            }
            if (ns.b() - b).abs() > 1e-15 {
                return Err(config_err(format!(
                    "--b {b} does not match the node set (b = {})",
                    ns.b()
                )));
            }
            let table: AlmansiTable = read_json(&input, "table")?;
            let result = polyharmonic_interpolant(&table, &ns, kmax)?;
            let mode_norms: BTreeMap<_, _> = table
                .entries()
                .keys()
                .map(|m| (*m, table.mode_norm(*m)))
                .collect();
            let error_bound = interpolation_error_bound(&mode_norms, &ns, table.d())?;
            #[derive(Serialize)]
            struct InterpOut {
                table: AlmansiTable,
                stability_constant: f64,
                norm_bound: f64,
                max_node_residual: f64,
                error_bound: f64,
            }
            write_json(
                &out,
                &InterpOut {
                    table: result.table,
                    stability_constant: result.stability_constant,
                    norm_bound: result.norm_bound,
                    max_node_residual: result.max_node_residual,
                    error_bound,
                },
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Cubature {
            measure,
            input,
            nodes,
            n,
            kmax,
            out,
        } => {
            let mut paths: Vec<&Path> = vec![&measure, &input, &nodes];
            if let Some(ref path) = out {
                paths.push(path);
            }
            ensure_distinct(&paths)?;
            let mu: PseudoPositiveMeasure = read_json(&measure, "measure")?;
            let table: AlmansiTable = read_json(&input, "table")?;
            let ns: NodeSet = read_json(&nodes, "node set")?;
            if ns.degree() != n {
                return Err(config_err(format!(
                    "--N {n} does not match the node set (degree {})",
                    ns.degree()
                )));
            }
            let result = cubature(&table, &mu, &ns, kmax, n)?;
            let error_bound = if ns.b().max(mu.b()) < 1.0 {
                let mode_norms: BTreeMap<_, _> = table
                    .entries()
                    .keys()
                    .filter(|m| m.k <= kmax)
                    .map(|m| (*m, table.mode_norm(*m)))
                    .collect();
                Some(cubature_error_bound(&mode_norms, &mu, &ns, table.d())?)
            } else {
                None
            };
            #[derive(Serialize)]
            struct NegativeWeightMode {
                k: usize,
                l: usize,
            }
            #[derive(Serialize)]
            struct CubatureOut {
                value: [f64; 2],
                error_bound: Option<f64>,
                dropped_bound: Option<f64>,
                negative_weight_modes: Vec<NegativeWeightMode>,
            }
            let payload = CubatureOut {
                value: [result.value.re, result.value.im],
                error_bound,
                dropped_bound: result.dropped_bound,
                negative_weight_modes: result
                    .negative_weight_modes
                    .iter()
                    .map(|m| NegativeWeightMode { k: m.k, l: m.ell })
                    .collect(),
            };
            match out {
                Some(path) => write_json(&path, &payload)?,
                None => println!(
                    "{}",
                    output::to_json(&payload)
                        .map_err(|e| CliError::Compute(e.to_string()))?
                        .trim_end()
                ),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { suite, seed } => run_verify(&suite, seed),
    }
}

fn run_eval(table: &AlmansiTable, grid: &Path, out: &Path) -> CliResult<()> {
    let d = table.d();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(grid)
        .map_err(|e| config_err(format!("cannot read grid {}: {e}", grid.display())))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| config_err(format!("grid row {}: {e}", i + 1)))?;
        if record.len() != d + 1 {
            return Err(config_err(format!(
                "grid row {} has {} fields, expected {} (r and {d} coordinates)",
                i + 1,
                record.len(),
                d + 1
            )));
        }
        let row: Vec<f64> = record
            .iter()
            .map(|f| f.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| config_err(format!("grid row {}: {e}", i + 1)))?;
        rows.push(row);
    }
    let mut writer = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(out)
        .map_err(|e| config_err(format!("cannot write {}: {e}", out.display())))?;
    for row in rows {
        let r = row[0];
        let theta = &row[1..];
        let value = table.evaluate(Complex64::new(r, 0.0), theta)?;
        let mut record: Vec<String> = row.iter().map(|&x| output::fmt_f64(x)).collect();
        record.push(output::fmt_f64(value.re));
        record.push(output::fmt_f64(value.im));
        writer
            .write_record(&record)
            .map_err(|e| config_err(format!("cannot write {}: {e}", out.display())))?;
    }
    writer
        .flush()
        .map_err(|e| config_err(format!("cannot write {}: {e}", out.display())))?;
    Ok(())
}

#[derive(Deserialize)]
struct KernelPointRaw {
    zeta: [f64; 2],
    z: [f64; 2],
    theta: Vec<f64>,
    theta_prime: Vec<f64>,
}

fn run_kernel(
    kind: KernelKind,
    d: usize,
    points: &Path,
    out: &Path,
    kmax: usize,
    jmax: usize,
) -> CliResult<()> {
    let raw_points: Vec<KernelPointRaw> = read_json(points, "kernel points")?;
    let mut writer = csv::WriterBuilder::new()
        .has_headers(true)
        .from_path(out)
        .map_err(|e| config_err(format!("cannot write {}: {e}", out.display())))?;
    writer
        .write_record([
            "zeta_re",
            "zeta_im",
            "z_re",
            "z_im",
            "cos_angle",
            "re",
            "im",
            "series_residual",
        ])
        .map_err(|e| config_err(e.to_string()))?;
    for raw in raw_points {
        let point = KernelPoint::new(
            Complex64::new(raw.zeta[0], raw.zeta[1]),
            raw.theta_prime,
            Complex64::new(raw.z[0], raw.z[1]),
            raw.theta,
        );
        let c = point.cos_angle(d)?;
        let (value, residual) = match kind {
            KernelKind::Cauchy => {
                let closed = cauchy_kernel(d, &point)?;
                let series = cauchy_kernel_series(d, &point, kmax, jmax)?;
                (closed, (closed - series).norm())
            }
            KernelKind::Poisson => {
                let w = point.zeta * point.z;
                let closed = poisson_kernel_c(d, w, c)?;
                let mut series = Complex64::new(0.0, 0.0);
                let mut pow = Complex64::new(1.0, 0.0);
                for k in 0..=kmax {
                    series += pow * eval_zonal(d, k, c)?;
                    pow *= w;
                }
                (closed, (closed - series).norm())
            }
            KernelKind::Hua => {
                let closed = hua_aronszajn_kernel(d, &point)?;
                let ratio_point = KernelPoint::new(
                    point.zeta / point.z,
                    point.theta_prime.clone(),
                    Complex64::new(1.0, 0.0),
                    point.theta.clone(),
                );
                // the zonal-folded series already carries 1/omega_d
                let series = cauchy_kernel_series(d, &ratio_point, kmax, jmax)? / point.z;
                (closed, (closed - series).norm())
            }
        };
        writer
            .write_record([
                output::fmt_f64(point.zeta.re),
                output::fmt_f64(point.zeta.im),
                output::fmt_f64(point.z.re),
                output::fmt_f64(point.z.im),
                output::fmt_f64(c),
                output::fmt_f64(value.re),
                output::fmt_f64(value.im),
                output::fmt_f64(residual),
            ])
            .map_err(|e| config_err(e.to_string()))?;
    }
    writer
        .flush()
        .map_err(|e| config_err(e.to_string()))?;
    Ok(())
}

fn run_verify(suite: &str, seed: u64) -> CliResult<ExitCode> {
    let suites: Vec<Suite> = if suite == "all" {
        Suite::ALL.to_vec()
    } else {
        vec![Suite::parse(suite).ok_or_else(|| {
            config_err(format!(
                "unknown suite {suite:?}; expected one of sphere, basis, kernels, reproduce, bvp, interp, cubature, hardy, all"
            ))
        })?]
    };
    let mut all_pass = true;
    for s in suites {
        for check in run_suite(s, seed) {
            let status = if check.pass() { "PASS" } else { "FAIL" };
            all_pass &= check.pass();
            println!(
                "{status}  [{}] {}  measured={:.3e}  tolerance={:.3e}",
                s.name(),
                check.name,
                check.measured,
                check.tolerance
            );
        }
    }
    Ok(if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}
