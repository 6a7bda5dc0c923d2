//! Command-line front end. Exit codes: 0 pass, 1 an asserted verdict
//! failed, 2 usage or input error.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::json;

use crate::config::{load_config, RunConfig};
use crate::experiments::domain::mode_decompositions;
use crate::experiments::powers::power_test_vectors;
use crate::experiments::{Report, Verdict};
use crate::indicial::{boundary_spectrum, resolvent_index_family, spectrum_roots, IndexSet};
use crate::io::{index_set_json, parse_index_set, parse_vector_csv, write_coo, write_vector_csv, CooMatrix};
use crate::model::ConeModel;
use crate::radial::{assemble_mode_operator, RadialOperator};
use crate::run::{run_experiment, EXPERIMENTS};
use crate::seeley::{analytic_continuation_power, analytic_continuation_power_k, continuation_order};
use crate::spaces::{inclusion_constant_sweep, standard_trial_set, NormSpec};
use crate::spectral::{eigendecompose, functional_power_apply, mass_norm, residual, resolvent_apply};

pub const WORKERS_ENV: &str = "CONELAB_WORKERS";

#[derive(Parser, Debug)]
#[command(name = "conelab", version, about = "Semiclassical cone Laplacian laboratory")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Contour,
    Eig,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScaleArg {
    Cone,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MatrixKind {
    Stiffness,
    Mass,
    Laplacian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum IndexOp {
    Union,
    ExtendedUnion,
    Sum,
    Saturate,
    Hat,
}

fn parse_complex(s: &str) -> Result<Complex64, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |t: &str| t.parse::<f64>().map_err(|_| format!("`{t}` is not a number"));
    match parts.as_slice() {
        [re] => Ok(Complex64::new(num(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(num(re)?, num(im)?)),
        _ => Err(format!("expected RE or RE,IM, got `{s}`")),
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Boundary spectrum and resolvent index family of the exact cone.
    Spectrum {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 3.0)]
        cutoff: f64,
        /// Largest spherical-harmonic degree (defaults to covering the cutoff).
        #[arg(long)]
        l_max: Option<usize>,
        /// Weight for the index family; defaults to −(n−2)/2.
        #[arg(long, allow_hyphen_values = true)]
        alpha: Option<f64>,
        /// Print the full JSON document instead of the text summary.
        #[arg(long)]
        json: bool,
    },
    /// Solve (A_h − λ)u = f for one mode.
    Resolvent {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        h: Option<f64>,
        #[arg(long, default_value_t = 0)]
        mode: usize,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        lambda: Complex64,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Eigenvalues (and optionally eigenvectors) of one mode.
    Eig {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        h: Option<f64>,
        #[arg(long, default_value_t = 0)]
        mode: usize,
        #[arg(long, default_value_t = 20)]
        count: usize,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        vectors: Option<PathBuf>,
    },
    /// Complex power A_h^w of one mode applied to a vector.
    Power {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        w: Complex64,
        #[arg(long)]
        h: Option<f64>,
        #[arg(long, default_value_t = 0)]
        mode: usize,
        #[arg(long, value_enum, default_value_t = Method::Both)]
        method: Method,
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Inclusion-constant sweep between the cone and b scales.
    Norms {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum, default_value_t = ScaleArg::Cone)]
        scale: ScaleArg,
        #[arg(long, allow_hyphen_values = true)]
        s: f64,
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long, allow_hyphen_values = true)]
        tau: f64,
        #[arg(long, default_value_t = 30)]
        eigs: usize,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Write a Galerkin matrix of one mode in coordinate text format.
    Export {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        h: Option<f64>,
        #[arg(long, default_value_t = 0)]
        mode: usize,
        #[arg(long, value_enum, default_value_t = MatrixKind::Stiffness)]
        matrix: MatrixKind,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Index-set operations on JSON inputs.
    Index {
        #[arg(long, value_enum)]
        op: IndexOp,
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: Option<PathBuf>,
    },
    /// Run one experiment and print its verdict report.
    Verify {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(EXPERIMENTS))]
        experiment: String,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Run every experiment listed in the config.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
}

/// Fatal input problems; all map to exit code 2.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] crate::config::ConfigError),
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: crate::io::ParseError },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Numerical(#[from] crate::experiments::ExperimentError),
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(|source| CliError::Io {
                path: dir.to_path_buf(),
                source,
            })?;
        }
    }
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn emit(out: &mut (dyn std::io::Write + Send), text: &str) {
    let _ = writeln!(out, "{text}");
}

fn mode_operator(cfg: &RunConfig, h: Option<f64>, mode: usize) -> Result<RadialOperator, CliError> {
    let (model, grid) = cfg.model_and_grid(None)?;
    let h = h.unwrap_or(cfg.h_values[0]);
    let m = *model
        .mode(mode)
        .ok_or_else(|| CliError::Usage(format!("model has no mode with index {mode}")))?;
    let op = assemble_mode_operator(&model, &grid, &m, h).map_err(crate::experiments::ExperimentError::from)?;
    Ok(op)
}

fn read_vector(path: &Path, dim: usize) -> Result<Vec<Complex64>, CliError> {
    let v = parse_vector_csv(&read(path)?).map_err(|source| CliError::Parse {
        path: path.to_path_buf(),
        source,
    })?;
    if v.len() != dim {
        return Err(CliError::Usage(format!(
            "{}: vector has {} rows, the grid has {dim} unknowns",
            path.display(),
            v.len()
        )));
    }
    Ok(v)
}

fn report_exit(reports: &[Report]) -> i32 {
    if reports.iter().any(|r| r.verdict == Verdict::Fail) {
        1
    } else {
        0
    }
}

fn spectrum_command(n: usize, cutoff: f64, l_max: Option<usize>, alpha: Option<f64>) -> Result<serde_json::Value, CliError> {
    if !(cutoff >= 0.0 && cutoff.is_finite()) {
        return Err(CliError::Usage(format!("cutoff must be a nonnegative number, got {cutoff}")));
    }
    // ν_{ℓ,−} = −iℓ, so degrees up to ⌈cutoff⌉ cover |Im ν| ≤ cutoff
    let l_max = l_max.unwrap_or(cutoff.ceil() as usize);
    let model = ConeModel::round(n, 1.0, l_max).map_err(|e| CliError::Usage(e.to_string()))?;
    let alpha = alpha.unwrap_or(-(n as f64 - 2.0) / 2.0);
    let spec = boundary_spectrum(&model, cutoff);
    let mut roots: Vec<_> = spectrum_roots(&model)
        .into_iter()
        .filter(|r| r.value.im.abs() <= cutoff + 1e-9)
        .collect();
    roots.sort_by(|a, b| {
        a.value
            .im
            .abs()
            .total_cmp(&b.value.im.abs())
            .then(b.value.im.total_cmp(&a.value.im))
            .then(a.mode.cmp(&b.mode))
    });
    let family = resolvent_index_family(&model, alpha, cutoff).map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(json!({
        "n": n,
        "cutoff": cutoff,
        "l_max": l_max,
        "pattern": ordered_pattern(&roots),
        "spectrum": spec.to_entries(),
        "roots": roots.iter().map(|r| json!({"mode": r.mode, "sign": r.sign.to_string(), "re": r.value.re, "im": r.value.im})).collect::<Vec<_>>(),
        "alpha": alpha,
        "family": {
            "lb": family.lb.to_entries(),
            "ff": family.ff.to_entries(),
            "rb": family.rb.to_entries(),
            "tf": family.tf.to_entries(),
        }
    }))
}

fn format_root(z: Complex64) -> String {
    let im = z.im;
    if im.abs() < 1e-12 {
        "0".into()
    } else if (im - 1.0).abs() < 1e-12 {
        "i".into()
    } else if (im + 1.0).abs() < 1e-12 {
        "-i".into()
    } else if (im - im.round()).abs() < 1e-12 {
        format!("{}i", im.round() as i64)
    } else {
        format!("{im}i")
    }
}

fn ordered_pattern(roots: &[crate::indicial::IndicialRoot]) -> String {
    let mut seen: Vec<Complex64> = Vec::new();
    for r in roots {
        if !seen.iter().any(|z| (z - r.value).norm() < 1e-9) {
            seen.push(r.value);
        }
    }
    seen.iter().map(|&z| format_root(z)).collect::<Vec<_>>().join(", ")
}

fn execute(cmd: Command, out: &mut (dyn std::io::Write + Send)) -> Result<i32, CliError> {
    match cmd {
        Command::Spectrum {
            n,
            cutoff,
            l_max,
            alpha,
            json,
        } => {
            let v = spectrum_command(n, cutoff, l_max, alpha)?;
            if json {
                emit(out, &serde_json::to_string_pretty(&v).unwrap());
            } else {
                emit(out, &format!("n = {n}, |Im nu| <= {cutoff}"));
                emit(out, &format!("roots: {}", v["pattern"].as_str().unwrap_or("")));
                for r in v["roots"].as_array().into_iter().flatten() {
                    emit(
                        out,
                        &format!("  mode {} nu{} = {}", r["mode"], r["sign"].as_str().unwrap_or("?"), format_root(Complex64::new(r["re"].as_f64().unwrap_or(0.0), r["im"].as_f64().unwrap_or(0.0)))),
                    );
                }
                for face in ["lb", "ff", "rb", "tf"] {
                    // one (z, max log order) pair per exponent
                    let mut entries: Vec<(String, u64)> = Vec::new();
                    for e in v["family"][face].as_array().into_iter().flatten() {
                        let z = format!("{}{:+}i", e["re"], e["im"].as_f64().unwrap_or(0.0)).replace("+0i", "");
                        let k = e["k"].as_u64().unwrap_or(0);
                        match entries.last_mut() {
                            Some((last, kk)) if *last == z => *kk = (*kk).max(k),
                            _ => entries.push((z, k)),
                        }
                    }
                    let entries: Vec<String> = entries.iter().map(|(z, k)| format!("({z}, {k})")).collect();
                    emit(out, &format!("E_{face} (alpha = {}): {}", v["alpha"], entries.join(" ")));
                }
            }
            Ok(0)
        }
        Command::Resolvent {
            config,
            h,
            mode,
            lambda,
            input,
            output,
        } => {
            let cfg = load_config(&config)?;
            let op = mode_operator(&cfg, h, mode)?;
            let f = read_vector(&input, op.dim())?;
            let u = resolvent_apply(&op, lambda, &f).map_err(crate::experiments::ExperimentError::from)?;
            let r = residual(&op, lambda, &u, &f);
            let rel = mass_norm(&op.mass, &r) / mass_norm(&op.mass, &f).max(f64::MIN_POSITIVE);
            if let Some(p) = output {
                write(&p, &write_vector_csv(&op.grid.dof_positions(), &u))?;
            }
            let v = json!({"mode": mode, "h": op.h, "lambda": [lambda.re, lambda.im],
                "relative_residual": rel, "norm": mass_norm(&op.mass, &u)});
            emit(out, &serde_json::to_string_pretty(&v).unwrap());
            Ok(0)
        }
        Command::Eig {
            config,
            h,
            mode,
            count,
            output,
            vectors,
        } => {
            let cfg = load_config(&config)?;
            let op = mode_operator(&cfg, h, mode)?;
            let dec = eigendecompose(&op).map_err(crate::experiments::ExperimentError::from)?;
            let k = count.min(dec.dim());
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["index", "mu", "kappa"]).unwrap();
            for j in 0..k {
                w.write_record([j.to_string(), dec.eigenvalues[j].to_string(), dec.laplacian_eigenvalues[j].to_string()])
                    .unwrap();
            }
            let table = String::from_utf8(w.into_inner().unwrap()).unwrap();
            match output {
                Some(p) => write(&p, &table)?,
                None => emit(out, table.trim_end()),
            }
            if let Some(p) = vectors {
                let xs = op.grid.dof_positions();
                let mut w = csv::Writer::from_writer(Vec::new());
                let mut head = vec!["node".to_string(), "x".to_string()];
                head.extend((0..k).map(|j| format!("v{j}")));
                w.write_record(&head).unwrap();
                for (i, x) in xs.iter().enumerate() {
                    let mut row = vec![i.to_string(), x.to_string()];
                    row.extend((0..k).map(|j| dec.vectors[j][i].to_string()));
                    w.write_record(&row).unwrap();
                }
                write(&p, &String::from_utf8(w.into_inner().unwrap()).unwrap())?;
            }
            Ok(0)
        }
        Command::Power {
            config,
            w,
            h,
            mode,
            method,
            input,
            output,
        } => {
            let cfg = load_config(&config)?;
            let op = mode_operator(&cfg, h, mode)?;
            let f = match &input {
                Some(p) => read_vector(p, op.dim())?,
                None => power_test_vectors(&op.grid, cfg.seed).swap_remove(0).1,
            };
            let err = crate::experiments::ExperimentError::from;
            let mut v = json!({"mode": mode, "h": op.h, "w": [w.re, w.im], "method": format!("{method:?}").to_lowercase()});
            let mut result = None;
            if method != Method::Contour {
                let dec = eigendecompose(&op).map_err(err)?;
                let e = functional_power_apply(&dec, w * 2.0, &f);
                v["eig_norm"] = json!(mass_norm(&op.mass, &e));
                result = Some(e);
            }
            if method != Method::Eig {
                let contour = cfg.contour.build().map_err(crate::experiments::ExperimentError::from)?;
                let k = continuation_order(w);
                let a = analytic_continuation_power(&op, &contour, w, &f).map_err(crate::experiments::ExperimentError::from)?;
                let b = analytic_continuation_power_k(&op, &contour, w, k + 1, &f)
                    .map_err(crate::experiments::ExperimentError::from)?;
                let na = mass_norm(&op.mass, &a);
                let dk: Vec<Complex64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
                v["contour_norm"] = json!(na);
                v["k"] = json!(k);
                v["k_defect"] = json!(mass_norm(&op.mass, &dk) / na);
                v["tail_bound"] = json!(contour.tail_bound(w - k as f64));
                v["contour_nodes"] = json!(contour.len());
                if let Some(e) = &result {
                    let d: Vec<Complex64> = a.iter().zip(e).map(|(x, y)| x - y).collect();
                    v["defect"] = json!(mass_norm(&op.mass, &d) / mass_norm(&op.mass, e));
                }
                result = Some(a);
            }
            if let (Some(p), Some(r)) = (output, &result) {
                write(&p, &write_vector_csv(&op.grid.dof_positions(), r))?;
            }
            emit(out, &serde_json::to_string_pretty(&v).unwrap());
            Ok(0)
        }
        Command::Norms {
            config,
            scale,
            s,
            alpha,
            tau,
            eigs,
            output,
        } => {
            let cfg = load_config(&config)?;
            let (model, grid) = cfg.model_and_grid(None)?;
            let h0 = cfg.h_values[0];
            let (from, to) = match scale {
                ScaleArg::Cone => (NormSpec::cone(s, alpha, tau, h0), NormSpec::b(s, alpha, h0)),
                ScaleArg::B => (NormSpec::b(s, alpha, h0), NormSpec::cone(s, alpha, tau, h0)),
            };
            let decs = mode_decompositions(&model, &grid)?;
            let lsq: Vec<f64> = model.angular_modes.iter().map(|m| m.lambda_sq).collect();
            let rows = inclusion_constant_sweep(&from, &to, &cfg.h_values, &grid, model.n, &lsq, |h| {
                let at: Vec<_> = decs.iter().map(|d| d.at_h(h)).collect();
                standard_trial_set(&grid, &at, eigs, h)
            })
            .map_err(crate::experiments::ExperimentError::from)?;
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["h", "ratio", "argmax_trial_id", "scaled_ratio", "predicted_power"])
                .unwrap();
            for r in &rows {
                w.write_record([
                    r.h.to_string(),
                    r.ratio.to_string(),
                    r.argmax.clone(),
                    r.scaled_ratio.to_string(),
                    r.predicted_power.to_string(),
                ])
                .unwrap();
            }
            let table = String::from_utf8(w.into_inner().unwrap()).unwrap();
            match output {
                Some(p) => write(&p, &table)?,
                None => emit(out, table.trim_end()),
            }
            Ok(0)
        }
        Command::Export {
            config,
            h,
            mode,
            matrix,
            output,
        } => {
            let cfg = load_config(&config)?;
            let op = mode_operator(&cfg, h, mode)?;
            let m = match matrix {
                MatrixKind::Stiffness => &op.stiffness,
                MatrixKind::Mass => &op.mass,
                MatrixKind::Laplacian => &op.laplacian,
            };
            let text = write_coo(&CooMatrix::from_tridiagonal(m));
            match output {
                Some(p) => write(&p, &text)?,
                None => emit(out, text.trim_end()),
            }
            Ok(0)
        }
        Command::Index { op, a, b } => {
            let load = |p: &Path| -> Result<IndexSet, CliError> {
                parse_index_set(&read(p)?).map_err(|source| CliError::Parse {
                    path: p.to_path_buf(),
                    source,
                })
            };
            let x = load(&a)?;
            let needs_b = matches!(op, IndexOp::Union | IndexOp::ExtendedUnion | IndexOp::Sum);
            let r = if needs_b {
                let p = b.ok_or_else(|| CliError::Usage(format!("--op {op:?} needs --b")))?;
                let y = load(&p)?;
                match op {
                    IndexOp::Union => x.union(&y),
                    IndexOp::ExtendedUnion => x.extended_union(&y),
                    _ => x.sum(&y),
                }
            } else {
                match op {
                    IndexOp::Saturate => x.saturated(),
                    _ => x.hat(),
                }
            };
            emit(out, &index_set_json(&r));
            Ok(0)
        }
        Command::Verify {
            experiment,
            config,
            output_dir,
        } => {
            let cfg = load_config(&config)?;
            let report = run_experiment(&experiment, &cfg);
            if let Some(dir) = output_dir.or(cfg.output_dir.clone()) {
                write(&dir.join(format!("{experiment}.json")), &report.to_json())?;
            }
            emit(out, &report.to_json());
            Ok(report_exit(std::slice::from_ref(&report)))
        }
        Command::Run { config, output_dir } => {
            let cfg = load_config(&config)?;
            if cfg.experiments.is_empty() {
                return Err(CliError::Usage("config lists no experiments".into()));
            }
            let dir = output_dir.or(cfg.output_dir.clone());
            let mut reports = Vec::new();
            for name in &cfg.experiments {
                let r = run_experiment(name, &cfg);
                if let Some(d) = &dir {
                    write(&d.join(format!("{name}.json")), &r.to_json())?;
                }
                emit(out, &format!("{name}: {}", r.verdict));
                reports.push(r);
            }
            Ok(report_exit(&reports))
        }
    }
}

fn worker_pool() -> Result<rayon::ThreadPool, String> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(WORKERS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| format!("{WORKERS_ENV} must be a positive integer, got `{v}`"))?;
        if n == 0 {
            return Err(format!("{WORKERS_ENV} must be a positive integer, got 0"));
        }
        b = b.num_threads(n);
    }
    b.build().map_err(|e| e.to_string())
}

/// Parse `args` and run, writing results to `out` and diagnostics to
/// `err`. Returns the process exit code.
pub fn run_with<I, T>(args: I, out: &mut (dyn std::io::Write + Send), err: &mut (dyn std::io::Write + Send)) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    let pool = match worker_pool() {
        Ok(p) => p,
        Err(m) => {
            let _ = writeln!(err, "error: {m}");
            return 2;
        }
    };
    match pool.install(|| execute(cli.command, out)) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}
