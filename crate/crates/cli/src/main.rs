mod manifest;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;
use thiserror::Error;

use manifest::{real, RunManifest};
use pesc::io::{quantize, read_kernel, read_pgm, save_trace, write_pgm};
use pesc::metrics::empirical_bsnr;
use pesc::{
    convolve_full, deconvolve, degrade, isnr, snr, trace_to_rows, CostKind, DegradationSpec,
    EpigraphConfig, EpigraphMethod, Image, ProjectionMode, SolverConfig, SolverFailure,
};

const EPS_ENV: &str = "PESC_DEFAULT_EPS";
const DEFAULT_EPS: f64 = 1e-3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Input { path: PathBuf, source: pesc::Error },
    #[error(transparent)]
    Core(#[from] pesc::Error),
    #[error("solver failed: {0}")]
    Solver(#[from] SolverFailure),
    #[error("{0}")]
    Usage(String),
    #[error("manifest: {0}")]
    Manifest(String),
}

impl CliError {
    fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Input {
            path: path.to_path_buf(),
            source: e.into(),
        }
    }

    fn exit_code(&self) -> u8 {
        let core = match self {
            CliError::Input { source, .. } => source,
            CliError::Core(e) => e,
            CliError::Solver(f) => &f.error,
            CliError::Usage(_) | CliError::Manifest(_) => return 2,
        };
        match core {
            pesc::Error::Numeric(_) => 1,
            _ => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "pesc",
    version,
    about = "Deconvolution by projections onto the epigraph of a convex cost"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Blur a clean image and add Gaussian noise at a target BSNR.
    Synth(SynthArgs),
    /// Restore a blurred image.
    Deconv(DeconvArgs),
    /// Print ISNR and SNR (and BSNR when the kernel is known).
    Metrics(MetricsArgs),
    /// Re-run every command recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long)]
    clean: PathBuf,
    #[arg(long)]
    kernel: PathBuf,
    /// Target BSNR in dB; `inf` for no noise.
    #[arg(long)]
    bsnr: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Sidecar with sigma and the achieved BSNR [default: <out>.sigma.txt]
    #[arg(long)]
    sigma_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Method {
    Single,
    Cutting,
}

#[derive(Debug, Args)]
struct DeconvArgs {
    #[arg(long)]
    blurred: PathBuf,
    #[arg(long)]
    kernel: PathBuf,
    #[arg(long, default_value = "tv")]
    cost: CostKind,
    /// Outer rounds K.
    #[arg(long, default_value_t = 10)]
    iters: usize,
    /// Epigraph stopping tolerance [default: $PESC_DEFAULT_EPS or 1e-3]
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long, default_value_t = 200)]
    max_inner: usize,
    /// Epigraph step: one supporting hyperplane at a time, or the exact
    /// cutting-plane projection.
    #[arg(long, value_enum, default_value_t = Method::Single)]
    method: Method,
    /// Push each epigraph result this far inside the epigraph.
    #[arg(long)]
    interior_margin: Option<f64>,
    /// Replace measurement hyperplanes by slabs of this half-width.
    #[arg(long)]
    slab_eps: Option<f64>,
    #[arg(long)]
    truth: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct MetricsArgs {
    #[arg(long)]
    orig: PathBuf,
    #[arg(long)]
    degraded: PathBuf,
    #[arg(long)]
    restored: PathBuf,
    /// Blur kernel of the degradation, needed for BSNR.
    #[arg(long)]
    kernel: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ReplayArgs {
    manifest: PathBuf,
}

fn load_image(path: &Path) -> Result<Image, CliError> {
    read_pgm(path).map_err(|source| CliError::Input {
        path: path.to_path_buf(),
        source,
    })
}

fn load_kernel(path: &Path) -> Result<pesc::Kernel, CliError> {
    read_kernel(path).map_err(|source| CliError::Input {
        path: path.to_path_buf(),
        source,
    })
}

fn store_image(path: &Path, img: &Image) -> Result<(), CliError> {
    write_pgm(path, img).map_err(|source| CliError::Input {
        path: path.to_path_buf(),
        source,
    })
}

fn absolute(p: &Path) -> Result<PathBuf, CliError> {
    std::path::absolute(p).map_err(|e| CliError::io(p, e))
}

/// What a written PGM will read back as.
fn as_written(img: &Image) -> Image {
    let data = quantize(img).into_iter().map(f64::from).collect();
    Image::new(img.width(), img.height(), data).expect("same shape")
}

fn db(v: f64) -> String {
    format!("{v:.4}")
}

fn default_eps() -> Result<f64, CliError> {
    match std::env::var(EPS_ENV) {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("{EPS_ENV}={s:?} is not a number"))),
        Err(_) => Ok(DEFAULT_EPS),
    }
}

fn synth(a: &SynthArgs) -> Result<(), CliError> {
    let clean = load_image(&a.clean)?;
    let kernel = load_kernel(&a.kernel)?;
    let spec = DegradationSpec {
        kernel,
        target_bsnr_db: a.bsnr,
        seed: a.seed,
    };
    let (z, sigma) = degrade(&clean, &spec)?;
    let z_tilde = convolve_full(&clean, &spec.kernel);
    let empirical = empirical_bsnr(&z_tilde, &z)?;
    let written = empirical_bsnr(&z_tilde, &as_written(&z))?;

    store_image(&a.out, &z)?;
    let sigma_out = a.sigma_out.clone().unwrap_or_else(|| {
        let mut s = a.out.as_os_str().to_owned();
        s.push(".sigma.txt");
        PathBuf::from(s)
    });
    let mut side = String::new();
    writeln!(side, "sigma={sigma:.17e}").unwrap();
    writeln!(side, "target_bsnr_db={}", a.bsnr).unwrap();
    writeln!(side, "empirical_bsnr_db={empirical:.17e}").unwrap();
    writeln!(side, "written_bsnr_db={written:.17e}").unwrap();
    fs::write(&sigma_out, side).map_err(|e| CliError::io(&sigma_out, e))?;

    let mut m = RunManifest::new("synth");
    m.input("clean", &absolute(&a.clean)?)
        .input("kernel", &absolute(&a.kernel)?)
        .param("bsnr", real(a.bsnr), format!("{:?}", a.bsnr))
        .param("seed", Value::from(a.seed), a.seed.to_string())
        .output("out", &absolute(&a.out)?)
        .output("sigma-out", &absolute(&sigma_out)?);
    manifest::write(&a.out, &m)?;

    println!("sigma={sigma:.6e} BSNR_dB={}", db(empirical));
    Ok(())
}

fn deconv(a: &DeconvArgs) -> Result<(), CliError> {
    let z = load_image(&a.blurred)?;
    let h = load_kernel(&a.kernel)?;
    let truth = a.truth.as_deref().map(load_image).transpose()?;
    if let Some(t) = &truth {
        z.ensure_same_shape(t)?;
    }
    let eps = match a.eps {
        Some(e) => e,
        None => default_eps()?,
    };
    let cfg = SolverConfig {
        outer_iters: a.iters,
        epigraph: EpigraphConfig {
            eps,
            max_iters: a.max_inner,
            mode: if a.interior_margin.is_some() {
                ProjectionMode::Interior
            } else {
                ProjectionMode::Boundary
            },
            interior_margin: a.interior_margin.unwrap_or(0.0),
            method: match a.method {
                Method::Single => EpigraphMethod::SingleHyperplane,
                Method::Cutting => EpigraphMethod::CuttingPlane,
            },
        },
        cost: a.cost,
        use_slabs: a.slab_eps.is_some(),
        slab_eps: a.slab_eps,
    };
    cfg.validate()?;

    let (out, trace) = match deconvolve(&z, &h, &cfg, truth.as_ref()) {
        Ok(r) => r,
        Err(fail) => {
            if let Some(p) = &a.trace {
                // keep whatever was recorded before the failure
                let _ = save_trace(p, &trace_to_rows(&fail.trace));
            }
            return Err(fail.into());
        }
    };
    store_image(&a.out, &out)?;
    if let Some(p) = &a.trace {
        save_trace(p, &trace_to_rows(&trace)).map_err(|source| CliError::Input {
            path: p.clone(),
            source,
        })?;
    }

    let mut m = RunManifest::new("deconv");
    m.input("blurred", &absolute(&a.blurred)?)
        .input("kernel", &absolute(&a.kernel)?)
        .param(
            "cost",
            Value::from(a.cost.name()),
            a.cost.name().to_string(),
        )
        .param("iters", Value::from(a.iters), a.iters.to_string())
        .param("eps", real(eps), format!("{eps:?}"))
        .param(
            "max-inner",
            Value::from(a.max_inner),
            a.max_inner.to_string(),
        );
    let method = match a.method {
        Method::Single => "single",
        Method::Cutting => "cutting",
    };
    m.param("method", Value::from(method), method.to_string());
    if let Some(v) = a.interior_margin {
        m.param("interior-margin", real(v), format!("{v:?}"));
    }
    if let Some(v) = a.slab_eps {
        m.param("slab-eps", real(v), format!("{v:?}"));
    }
    if let Some(t) = &a.truth {
        m.input("truth", &absolute(t)?);
    }
    m.output("out", &absolute(&a.out)?);
    if let Some(t) = &a.trace {
        m.output("trace", &absolute(t)?);
    }
    manifest::write(&a.out, &m)?;

    if let Some(t) = &truth {
        let restored = as_written(&out);
        println!(
            "ISNR_dB={} SNR_dB={}",
            db(isnr(&z, &restored, t)?),
            db(snr(&restored, t)?)
        );
    }
    Ok(())
}

fn metrics(a: &MetricsArgs) -> Result<(), CliError> {
    let orig = load_image(&a.orig)?;
    let degraded = load_image(&a.degraded)?;
    let restored = load_image(&a.restored)?;
    orig.ensure_same_shape(&degraded)?;
    orig.ensure_same_shape(&restored)?;
    if let Some(k) = &a.kernel {
        let h = load_kernel(k)?;
        println!(
            "BSNR_dB={}",
            db(empirical_bsnr(&convolve_full(&orig, &h), &degraded)?)
        );
    }
    println!("ISNR_dB={}", db(isnr(&degraded, &restored, &orig)?));
    println!("SNR_dB={}", db(snr(&restored, &orig)?));
    Ok(())
}

fn replay(a: &ReplayArgs) -> Result<(), CliError> {
    for m in manifest::read(&a.manifest)? {
        if m.command == "replay" {
            return Err(CliError::Manifest("a manifest cannot replay itself".into()));
        }
        let argv = std::iter::once("pesc".to_string()).chain(m.argv.iter().cloned());
        let cli = Cli::try_parse_from(argv).map_err(|e| CliError::Manifest(e.to_string()))?;
        run(&cli.command)?;
    }
    Ok(())
}

fn run(cmd: &Command) -> Result<(), CliError> {
    match cmd {
        Command::Synth(a) => synth(a),
        Command::Deconv(a) => deconv(a),
        Command::Metrics(a) => metrics(a),
        Command::Replay(a) => replay(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
