use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use selfsim::density::{singularity_report, solve_vn_split_with, solve_vn_with};
use selfsim::family::{scan, FamilySpec};
use selfsim::ifs::make_bernoulli;
use selfsim::moments::{moments_direct, moments_via_eigenpolys};
use selfsim::sampler::{chaos_game, histogram, RNG_ALGORITHM};
use selfsim::scalar::parse_exact;
use selfsim::spectral::{eigenpolys_bernoulli, eigenpolys_general};
use selfsim::ulam::{
    build_ulam_with, full_spectrum_with_cutoff, make_partition, stationary, stationary_density, Jitter,
};
use selfsim::{BigRational, EigenSystem, Execution, IfsModel, SampleConfig, Scalar, SolveOptions};
use serde_json::{json, Value};

use crate::output::{emit, fmt_f64, json_f64, json_scalar, json_text, Csv};
use crate::{Cli, Command, Common, Format, Method, UlamArgs};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Lib(selfsim::Error),
    Io(PathBuf, io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Lib(e) if e.is_numerical() => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => f.write_str(msg),
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Io(path, e) => write!(f, "{}: {e}", path.display()),
        }
    }
}

impl From<selfsim::Error> for CliError {
    fn from(e: selfsim::Error) -> Self {
        CliError::Lib(e)
    }
}

type CliResult<T = ()> = Result<T, CliError>;

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Usage(msg.into()))
}

pub fn dispatch(cli: &Cli) -> CliResult {
    let common = &cli.common;
    if common.format == Format::Bin && !matches!(cli.command, Command::Sample { bins: None, .. }) {
        return usage("--format bin is only available for raw `sample` output");
    }
    match &cli.command {
        Command::Eigenpoly { degree } => by_backend(common, |m| eigenpoly(common, m, *degree), |m| eigenpoly(common, m, *degree)),
        Command::Moments { degree, method } => by_backend(
            common,
            |m| moments(common, m, *degree, *method),
            |m| moments(common, m, *degree, *method),
        ),
        Command::Approx { degree, split, no_escalate, report } => {
            if *report && common.format != Format::Json {
                return usage("--report needs --format json");
            }
            let opts = SolveOptions { escalate: !no_escalate };
            by_backend(
                common,
                |m| approx(common, m, *degree, *split, opts, *report),
                |m| approx(common, m, *degree, *split, opts, *report),
            )
        }
        Command::Spectrum { grid, cutoff } => spectrum(common, &float_model(common)?, grid, *cutoff),
        Command::Stationary { grid, iters, tol } => stationary_cmd(common, &float_model(common)?, grid, *iters, *tol),
        Command::Sample { seed, count, burn_in, bins } => {
            let cfg = SampleConfig {
                seed: *seed,
                count: *count,
                burn_in: *burn_in,
                bins: bins.unwrap_or(1),
            };
            sample(common, &float_model(common)?, &cfg, bins.is_some())
        }
        Command::Family { degree, t_range, t_steps, x_range, x_steps } => {
            if common.bc.is_some() || common.ifs.is_some() {
                return usage("`family` scans Bernoulli parameters itself; drop --bc/--ifs");
            }
            let spec = FamilySpec {
                t_range: exact_range(t_range)?,
                t_steps: *t_steps,
                x_range: float_range(x_range)?,
                x_steps: *x_steps,
                degree: *degree,
                exact: common.exact,
            };
            family(common, &spec)
        }
    }
}

fn by_backend(
    common: &Common,
    exact: impl FnOnce(&IfsModel<BigRational>) -> CliResult,
    float: impl FnOnce(&IfsModel<f64>) -> CliResult,
) -> CliResult {
    if common.exact {
        exact(&load_model(common)?)
    } else {
        float(&load_model(common)?)
    }
}

fn load_model<T: Scalar>(common: &Common) -> CliResult<IfsModel<T>> {
    match (&common.bc, &common.ifs) {
        (Some(t), None) => {
            let Some(t) = parse_exact(t) else {
                return usage(format!("--bc: not a number: {t:?}"));
            };
            Ok(make_bernoulli(T::from_exact(&t))?)
        }
        (None, Some(path)) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::Io(path.clone(), e))?;
            Ok(IfsModel::from_json_str(&text)?)
        }
        _ => usage("select a model with --bc T or --ifs FILE"),
    }
}

fn float_model(common: &Common) -> CliResult<IfsModel<f64>> {
    if common.exact {
        return usage("--exact is not available for the Ulam and sampling commands");
    }
    load_model(common)
}

fn exact_range(text: &str) -> CliResult<(BigRational, BigRational)> {
    let parts: Vec<_> = text.split(':').collect();
    match parts[..] {
        [lo, hi] => match (parse_exact(lo), parse_exact(hi)) {
            (Some(lo), Some(hi)) => Ok((lo, hi)),
            _ => usage(format!("bad range {text:?}")),
        },
        _ => usage(format!("range must be LO:HI, got {text:?}")),
    }
}

fn float_range(text: &str) -> CliResult<(f64, f64)> {
    let (lo, hi) = exact_range(text)?;
    Ok((lo.to_f64(), hi.to_f64()))
}

fn write(common: &Common, bytes: &[u8]) -> CliResult {
    emit(common.out.as_deref(), bytes)
        .map_err(|e| CliError::Io(common.out.clone().unwrap_or_else(|| "<stdout>".into()), e))
}

fn eigensystem<T: Scalar>(model: &IfsModel<T>, degree: usize) -> CliResult<EigenSystem<T>> {
    Ok(match model.bernoulli_parameter() {
        Some(t) => eigenpolys_bernoulli(t, degree)?,
        None => eigenpolys_general(model, degree)?,
    })
}

fn eigenpoly<T: Scalar>(common: &Common, model: &IfsModel<T>, degree: usize) -> CliResult {
    let eig = eigensystem(model, degree)?;
    let text = match common.format {
        Format::Json => json_text(&json!({
            "backend": T::BACKEND,
            "degree": degree,
            "eigenvalues": eig.eigenvalues.iter().map(json_scalar).collect::<Vec<_>>(),
            "eigenpolys": (0..=degree)
                .map(|k| (0..=degree).map(|j| json_scalar(&eig.coeff(k, j))).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
        })),
        _ => {
            let mut header = vec!["k".to_string(), "lambda".to_string()];
            header.extend((0..=degree).map(|j| format!("a_{j}")));
            let mut csv = Csv::with_header(&header);
            for (k, lambda) in eig.eigenvalues.iter().enumerate() {
                let mut row = vec![k.to_string(), lambda.to_text()];
                row.extend((0..=degree).map(|j| eig.coeff(k, j).to_text()));
                csv.row(row);
            }
            csv.into_string()
        }
    };
    write(common, text.as_bytes())
}

fn moments<T: Scalar>(common: &Common, model: &IfsModel<T>, degree: usize, method: Method) -> CliResult {
    let via_eig = || -> CliResult<_> { Ok(moments_via_eigenpolys(&eigensystem(model, degree)?)) };
    let json_list = |m: &selfsim::MomentVector<T>| m.values().iter().map(json_scalar).collect::<Vec<_>>();
    let text = match method {
        Method::Eig | Method::Direct => {
            let m = if method == Method::Eig { via_eig()? } else { moments_direct(model, degree)? };
            match common.format {
                Format::Json => json_text(&json!({
                    "backend": T::BACKEND,
                    "degree": degree,
                    "moments": json_list(&m),
                })),
                _ => {
                    let mut csv = Csv::with_header(&["j", "m_j"]);
                    for (j, v) in m.values().iter().enumerate() {
                        csv.row([j.to_string(), v.to_text()]);
                    }
                    csv.into_string()
                }
            }
        }
        Method::Both => {
            let a = via_eig()?;
            let b = moments_direct(model, degree)?;
            let gap = a.max_discrepancy(&b);
            eprintln!("max discrepancy: {}", fmt_f64(gap));
            match common.format {
                Format::Json => json_text(&json!({
                    "backend": T::BACKEND,
                    "degree": degree,
                    "eig": json_list(&a),
                    "direct": json_list(&b),
                    "max_discrepancy": json_f64(gap),
                })),
                _ => {
                    let mut csv = Csv::with_header(&["j", "m_eig", "m_direct", "abs_diff"]);
                    for (j, (x, y)) in a.values().iter().zip(b.values()).enumerate() {
                        let diff = (x.clone() - y.clone()).abs();
                        csv.row([j.to_string(), x.to_text(), y.to_text(), diff.to_text()]);
                    }
                    csv.into_string()
                }
            }
        }
    };
    write(common, text.as_bytes())
}

fn approx<T: Scalar>(
    common: &Common,
    model: &IfsModel<T>,
    degree: usize,
    split: bool,
    opts: SolveOptions,
    report: bool,
) -> CliResult {
    let v = if split {
        solve_vn_split_with(model, degree, opts)?
    } else {
        solve_vn_with(model, degree, opts, None)?
    };
    if v.escalated {
        eprintln!("note: float system ill-conditioned, solved exactly");
    }
    let support = model.support();
    let text = match common.format {
        Format::Json => {
            let mut doc = json!({
                "backend": T::BACKEND,
                "degree": degree,
                "support": [json_scalar(&support.lo), json_scalar(&support.hi)],
                "coefficients": v.coeffs.iter().map(json_scalar).collect::<Vec<_>>(),
                "norm_sq": json_scalar(&v.norm_sq),
                "l2_norm": json_f64(v.l2_norm),
                "escalated": v.escalated,
            });
            if report {
                doc["diagnostics"] = serde_json::to_value(singularity_report(&v, &support))
                    .expect("report serialises");
            }
            json_text(&doc)
        }
        _ => {
            let mut csv = Csv::with_header(&["j", "u_j"]);
            for (j, c) in v.coeffs.iter().enumerate() {
                csv.row([j.to_string(), c.to_text()]);
            }
            csv.into_string()
        }
    };
    write(common, text.as_bytes())
}

fn ulam_operator(model: &IfsModel<f64>, grid: &UlamArgs) -> CliResult<selfsim::UlamOperator> {
    let support = model.support();
    if !support.is_interval {
        return Err(selfsim::Error::NotAnInterval.into());
    }
    let jitter = grid.jitter_seed.map(|seed| Jitter {
        seed,
        amplitude: grid.jitter_amplitude * support.width() / grid.n.max(1) as f64,
    });
    let partition = make_partition(&support, grid.n, jitter)?;
    Ok(build_ulam_with(model, &partition, Execution::Sequential)?)
}

fn complex_json(z: &selfsim::Complex64) -> Value {
    json!([json_f64(z.re), json_f64(z.im)])
}

fn spectrum(common: &Common, model: &IfsModel<f64>, grid: &UlamArgs, cutoff: f64) -> CliResult {
    let op = ulam_operator(model, grid)?;
    let result = full_spectrum_with_cutoff(&op, cutoff)?;
    let leading: Vec<Value> = result
        .leading_pairs
        .iter()
        .map(|p| {
            json!({
                "lambda": complex_json(&p.lambda),
                "left": p.left.iter().map(complex_json).collect::<Vec<_>>(),
                "right": p.right.iter().map(complex_json).collect::<Vec<_>>(),
            })
        })
        .collect();
    let meta = json!({
        "N": grid.n,
        "jitter_seed": grid.jitter_seed,
        "cutoff": cutoff,
        "cell_midpoints": op.partition.midpoints().into_iter().map(json_f64).collect::<Vec<_>>(),
        "leading": leading,
    });
    match common.format {
        Format::Json => {
            let mut doc = meta;
            doc["eigenvalues"] = result.eigenvalues.iter().map(complex_json).collect();
            write(common, json_text(&doc).as_bytes())
        }
        _ => {
            let mut csv = Csv::with_header(&["re", "im"]);
            for z in &result.eigenvalues {
                csv.row([fmt_f64(z.re), fmt_f64(z.im)]);
            }
            write(common, csv.into_string().as_bytes())?;
            if let Some(out) = &common.out {
                let side = sidecar_path(out);
                fs::write(&side, json_text(&meta)).map_err(|e| CliError::Io(side, e))?;
            }
            Ok(())
        }
    }
}

/// `spec.csv` → `spec.csv.json`.
fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".json");
    PathBuf::from(name)
}

fn stationary_cmd(common: &Common, model: &IfsModel<f64>, grid: &UlamArgs, iters: usize, tol: f64) -> CliResult {
    let op = ulam_operator(model, grid)?;
    let run = stationary(&op, iters, tol);
    let (iterations, last_step) = (run.iterations, run.last_step);
    let pi = run.into_converged()?;
    let dens = stationary_density(&op.partition, &pi);
    let text = match common.format {
        Format::Json => json_text(&json!({
            "N": grid.n,
            "jitter_seed": grid.jitter_seed,
            "iterations": iterations,
            "last_step": json_f64(last_step),
            "cell_midpoint": dens.iter().map(|(x, _)| json_f64(*x)).collect::<Vec<_>>(),
            "density": dens.iter().map(|(_, d)| json_f64(*d)).collect::<Vec<_>>(),
        })),
        _ => {
            let mut csv = Csv::with_header(&["cell_midpoint", "density"]);
            for (x, d) in dens {
                csv.row([fmt_f64(x), fmt_f64(d)]);
            }
            csv.into_string()
        }
    };
    write(common, text.as_bytes())
}

fn sample(common: &Common, model: &IfsModel<f64>, cfg: &SampleConfig, as_histogram: bool) -> CliResult {
    let points = chaos_game(model, cfg)?;
    if as_histogram {
        let support = model.support().to_f64();
        let hist = histogram(points, &support, cfg.bins);
        let text = match common.format {
            Format::Json => json_text(&json!({
                "seed": cfg.seed,
                "count": cfg.count,
                "burn_in": cfg.burn_in,
                "rng": RNG_ALGORITHM,
                "midpoint": hist.iter().map(|(x, _)| json_f64(*x)).collect::<Vec<_>>(),
                "density": hist.iter().map(|(_, d)| json_f64(*d)).collect::<Vec<_>>(),
            })),
            _ => {
                let mut csv = Csv::with_header(&["midpoint", "density"]);
                for (x, d) in hist {
                    csv.row([fmt_f64(x), fmt_f64(d)]);
                }
                csv.into_string()
            }
        };
        return write(common, text.as_bytes());
    }
    match common.format {
        Format::Bin => {
            let mut bytes = Vec::with_capacity(cfg.count * 8);
            for x in points {
                bytes.extend_from_slice(&x.to_le_bytes());
            }
            write(common, &bytes)
        }
        Format::Json => {
            let doc = json!({
                "seed": cfg.seed,
                "count": cfg.count,
                "burn_in": cfg.burn_in,
                "rng": RNG_ALGORITHM,
                "points": points.map(json_f64).collect::<Vec<_>>(),
            });
            write(common, json_text(&doc).as_bytes())
        }
        Format::Csv => {
            let mut csv = Csv::with_header(&["x"]);
            for x in points {
                csv.row([fmt_f64(x)]);
            }
            write(common, csv.into_string().as_bytes())
        }
    }
}

fn family(common: &Common, spec: &FamilySpec) -> CliResult {
    if common.threads == Some(0) {
        return usage("--threads must be at least 1");
    }
    let threads = common.threads.unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    let grid = pool.install(|| scan(spec, Execution::Parallel))?;
    for row in grid.rows.iter().filter(|r| r.failed()) {
        eprintln!("row t={} failed: {}", row.t, row.error.as_deref().unwrap_or(""));
    }
    let text = match common.format {
        Format::Json => json_text(&serde_json::to_value(&grid).expect("grid serialises")),
        _ => {
            let mut csv = Csv::with_header(&["t", "beta", "l2_norm", "x", "value"]);
            for row in &grid.rows {
                let norm = row.l2_norm.map_or("NaN".to_string(), fmt_f64);
                for (x, v) in grid.x_values.iter().zip(&row.values) {
                    csv.row([row.t.clone(), fmt_f64(row.beta), norm.clone(), fmt_f64(*x), fmt_f64(*v)]);
                }
            }
            csv.into_string()
        }
    };
    write(common, text.as_bytes())
}
