//! Command-line front end: loads TOML configuration, applies flat overrides,
//! runs one computation, and emits plot-ready CSV artifacts plus a
//! `run_meta.toml` record (resolved config + tool version) beside them.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure,
//! 4 I/O failure.

use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use biphoton::config::Config;
use biphoton::counting::{
    cauchy_schwarz, cauchy_schwarz_from_histogram, normalize_to_g2, simulate_histogram,
    CauchySchwarz, DetectionParams,
};
use biphoton::eigensystem::{
    classify_regime_with_tolerance, double_dressing_channels, eigenvalues, sweep_eigenvalues,
    SweepPoint,
};
use biphoton::fitting::{fit_waveform, FitData, FitOptions};
use biphoton::io;
use biphoton::params::FieldParams;
use biphoton::propagation::bandwidth;
use biphoton::susceptibility::{
    chi1, chi3, symmetric_grid, to_imaginary_basis, ComplexSpectrum, SpectrumAxis, SpectrumKind,
};
use biphoton::waveform::{
    ep_limit, g2_eq3, g2_eq4_with, g2_two_pole, synthesize_numeric, CorrelationWaveform,
    KappaSpectrum,
};
use biphoton::{Error, Result};
use biphoton_cli::{grid, table};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64 as C64;

/// Environment variable naming the default output directory.
const OUT_DIR_ENV: &str = "BIPHOTON_OUT_DIR";

#[derive(Parser)]
#[command(
    name = "biphoton",
    version,
    about = "Eigenvalues, susceptibilities, correlation waveforms, and \
             coincidence statistics of a dissipation-coupled photon-pair source"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML configuration file; built-in defaults apply when omitted.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Flat section.key=value override, applied after the config file.
    /// Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    /// Output directory (default: $BIPHOTON_OUT_DIR, then the working
    /// directory).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Write a gnuplot companion script beside each CSV.
    #[arg(long, global = true)]
    gnuplot: bool,
}

/// Shorthand field overrides; equivalent to `--set fields.<key>=<value>`.
#[derive(Args, Default)]
struct FieldFlags {
    /// Dressing Rabi frequency Ω3 (Γ41 units).
    #[arg(long)]
    omega3: Option<f64>,
    /// Dressing detuning Δ3 (Γ41 units).
    #[arg(long)]
    delta3: Option<f64>,
    /// Coupling Rabi frequency Ω2 (Γ41 units).
    #[arg(long)]
    omega2: Option<f64>,
    /// Coupling detuning Δ2 (Γ41 units).
    #[arg(long)]
    delta2: Option<f64>,
}

impl FieldFlags {
    fn apply(&self, cfg: &mut Config) -> Result<()> {
        let pairs = [
            ("omega3", self.omega3),
            ("delta3", self.delta3),
            ("omega2", self.omega2),
            ("delta2", self.delta2),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                // Debug formatting keeps a decimal point, so the override
                // always parses as a TOML float.
                cfg.apply_override(&format!("fields.{key}={v:?}"))?;
            }
        }
        Ok(())
    }
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalue pair and regime label at a single operating point.
    Eigen {
        #[command(flatten)]
        fields: FieldFlags,
    },
    /// Eigenvalue tables over Ω3/Δ3 grids, or the Ω2×Ω3 double-dressing
    /// surface when --omega2 is given. Ranges are start:stop[:step].
    Sweep {
        /// Ω3 range (default 0:2:0.01).
        #[arg(long, value_name = "RANGE")]
        omega3: Option<String>,
        /// Δ3 range (default: the configured single value).
        #[arg(long, value_name = "RANGE")]
        delta3: Option<String>,
        /// Ω2 range; switches to the three-channel dressing surface.
        #[arg(long, value_name = "RANGE")]
        omega2: Option<String>,
    },
    /// χ(1) or χ(3) spectrum on the real or imaginary δ axis.
    Spectra {
        /// Susceptibility order: 1 or 3.
        #[arg(long, default_value_t = 3)]
        chi: u8,
        #[arg(long, value_enum, default_value_t = Axis::Real)]
        axis: Axis,
        #[command(flatten)]
        fields: FieldFlags,
    },
    /// G²(τ) waveform on the configured τ grid.
    Waveform {
        #[arg(long, value_enum, default_value_t = Method::TwoPole)]
        method: Method,
        /// Overall amplitude factor W1.
        #[arg(long, default_value_t = 1.0)]
        w1: f64,
        #[command(flatten)]
        fields: FieldFlags,
    },
    /// Simulate a coincidence histogram; bit-reproducible per seed.
    Counts {
        /// RNG seed (required so reruns are reproducible by construction).
        #[arg(long)]
        seed: u64,
        /// Acquisition time in seconds.
        #[arg(long, default_value_t = 600.0)]
        duration: f64,
        /// Bin width in nanoseconds.
        #[arg(long, default_value_t = 0.2)]
        bin: f64,
        /// Expected counts in the peak bin.
        #[arg(long, default_value_t = 100.0)]
        peak_counts: f64,
        /// Expected accidental counts per bin.
        #[arg(long, default_value_t = 5.0)]
        bg_counts: f64,
        #[arg(long, value_enum, default_value_t = Method::TwoPole)]
        method: Method,
        #[command(flatten)]
        fields: FieldFlags,
    },
    /// Fit the closed-form waveform models to a histogram CSV.
    Fit {
        /// Input histogram CSV (as written by `counts`).
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
    },
    /// Cauchy–Schwarz R2 report from a histogram or explicit g² values.
    Csr {
        /// Input histogram CSV; alternatively give all three g² flags.
        #[arg(long = "in", value_name = "FILE")]
        input: Option<PathBuf>,
        /// Normalized cross-correlation peak g²_s,as(0).
        #[arg(long)]
        peak: Option<f64>,
        /// Stokes autocorrelation g²_s,s(0).
        #[arg(long)]
        g_ss: Option<f64>,
        /// Anti-Stokes autocorrelation g²_as,as(0).
        #[arg(long)]
        g_asas: Option<f64>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Axis {
    Real,
    Imaginary,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    /// Strong-regime oscillatory closed form (needs a real splitting).
    Eq3,
    /// Weak-regime two-exponential closed form.
    Eq4,
    /// Coalesced τ² e^{-2Γτ} limit.
    EpLimit,
    /// Two-pole closed form from the eigenvalue pair (any regime).
    TwoPole,
    /// Numeric spectral transform of the two-pole κ with Φ ≡ 1.
    Numeric,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) => 2,
        Error::Io(_) => 4,
        _ => 3,
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.common.config {
        Some(path) => Config::from_file(path)?,
        None => Config::default(),
    };
    for pair in &cli.common.overrides {
        cfg.apply_override(pair)?;
    }
    let out_dir = resolve_out_dir(&cli.common);
    fs::create_dir_all(&out_dir)?;
    let gp = cli.common.gnuplot;

    let (name, seed) = match cli.command {
        Command::Eigen { fields } => {
            fields.apply(&mut cfg)?;
            cfg.validate()?;
            cmd_eigen(&cfg, &out_dir, gp)?;
            ("eigen", None)
        }
        Command::Sweep {
            omega3,
            delta3,
            omega2,
        } => {
            cfg.validate()?;
            cmd_sweep(&cfg, &out_dir, gp, omega3, delta3, omega2)?;
            ("sweep", None)
        }
        Command::Spectra { chi, axis, fields } => {
            fields.apply(&mut cfg)?;
            cfg.validate()?;
            cmd_spectra(&cfg, &out_dir, gp, chi, axis)?;
            ("spectra", None)
        }
        Command::Waveform { method, w1, fields } => {
            fields.apply(&mut cfg)?;
            cfg.validate()?;
            cmd_waveform(&cfg, &out_dir, gp, method, w1)?;
            ("waveform", None)
        }
        Command::Counts {
            seed,
            duration,
            bin,
            peak_counts,
            bg_counts,
            method,
            fields,
        } => {
            fields.apply(&mut cfg)?;
            cfg.validate()?;
            cmd_counts(
                &cfg,
                &out_dir,
                gp,
                seed,
                duration,
                bin,
                peak_counts,
                bg_counts,
                method,
            )?;
            ("counts", Some(seed))
        }
        Command::Fit { input } => {
            cfg.validate()?;
            cmd_fit(&cfg, &out_dir, &input)?;
            ("fit", None)
        }
        Command::Csr {
            input,
            peak,
            g_ss,
            g_asas,
        } => {
            cfg.validate()?;
            cmd_csr(&cfg, &out_dir, input, peak, g_ss, g_asas)?;
            ("csr", None)
        }
    };
    write_run_meta(&out_dir, &cfg, name, seed)
}

fn resolve_out_dir(common: &Common) -> PathBuf {
    common
        .out
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

/// Writes an artifact and, when requested, a gnuplot companion script.
fn write_artifact(dir: &Path, name: &str, bytes: &[u8], plot: Option<&str>) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, bytes)?;
    println!("wrote {}", path.display());
    if let Some(plot) = plot {
        let script = format!(
            "set datafile separator ','\nset key autotitle columnhead\n{plot}\n"
        );
        let gp = path.with_extension("gp");
        fs::write(&gp, script)?;
        println!("wrote {}", gp.display());
    }
    Ok(())
}

fn write_run_meta(dir: &Path, cfg: &Config, command: &str, seed: Option<u64>) -> Result<()> {
    let mut text = String::new();
    text.push_str(&format!(
        "tool_version = \"{}\"\n",
        env!("CARGO_PKG_VERSION")
    ));
    text.push_str(&format!("command = \"{command}\"\n"));
    if let Some(seed) = seed {
        text.push_str(&format!("seed = {seed}\n"));
    }
    text.push('\n');
    text.push_str(&cfg.to_toml_string()?);
    fs::write(dir.join("run_meta.toml"), text)?;
    Ok(())
}

fn cmd_eigen(cfg: &Config, dir: &Path, gp: bool) -> Result<()> {
    let sys = cfg.system()?;
    let fields = cfg.field_params();
    let pair = eigenvalues(&sys, &fields)?;
    let bw = bandwidth(&sys, &fields, cfg.numerics.g2_factor)?;
    let label = classify_regime_with_tolerance(
        &sys,
        &fields,
        bw.approx,
        cfg.numerics.ep_tolerance,
    )?;
    let row = SweepPoint {
        omega3: fields.omega3,
        delta3: fields.delta3,
        delta_plus: pair.delta_plus,
        delta_minus: pair.delta_minus,
    };
    let mut buf = Vec::new();
    io::write_sweep_csv(&mut buf, &[row])?;
    write_artifact(dir, "eigen.csv", &buf, gp.then_some("plot 'eigen.csv' using 1:3, '' using 1:5"))?;
    println!("delta_plus = {}", pair.delta_plus);
    println!("delta_minus = {}", pair.delta_minus);
    println!("splitting = {:.6e}", pair.splitting_abs());
    println!("regime = {}", label.class);
    Ok(())
}

fn cmd_sweep(
    cfg: &Config,
    dir: &Path,
    gp: bool,
    omega3: Option<String>,
    delta3: Option<String>,
    omega2: Option<String>,
) -> Result<()> {
    let sys = cfg.system()?;
    let omega3_grid = grid::parse_range(omega3.as_deref().unwrap_or("0:2:0.01"))?;
    if let Some(omega2) = omega2 {
        let omega2_grid = grid::parse_range(&omega2)?;
        let base = cfg.field_params();
        let mut points = Vec::with_capacity(omega2_grid.len() * omega3_grid.len());
        for &o2 in &omega2_grid {
            for &o3 in &omega3_grid {
                let f = FieldParams {
                    omega2: o2,
                    omega3: o3,
                    ..base.clone()
                };
                let channels = double_dressing_channels(&sys, &f, cfg.numerics.g2_factor)?;
                points.push(table::ChannelPoint {
                    omega2: o2,
                    omega3: o3,
                    channels,
                });
            }
        }
        let mut buf = Vec::new();
        table::write_channels_csv(&mut buf, &points)?;
        write_artifact(
            dir,
            "channels.csv",
            &buf,
            gp.then_some("splot 'channels.csv' using 1:2:3, '' using 1:2:5, '' using 1:2:7"),
        )?;
        println!("{} surface points", points.len());
        return Ok(());
    }
    let delta3_grid = match delta3 {
        Some(r) => grid::parse_range(&r)?,
        None => vec![cfg.fields.delta3],
    };
    let points = sweep_eigenvalues(&sys, &omega3_grid, &delta3_grid)?;
    let mut buf = Vec::new();
    io::write_sweep_csv(&mut buf, &points)?;
    write_artifact(
        dir,
        "sweep.csv",
        &buf,
        gp.then_some(
            "plot 'sweep.csv' using 1:3 with lines, '' using 1:5 with lines, \
             '' using 1:4 with lines, '' using 1:6 with lines",
        ),
    )?;
    println!("{} sweep rows", points.len());
    Ok(())
}

/// Strictly positive δ_Im grid (0, span]; the imaginary axis starts at the
/// origin where several denominators are singular.
fn positive_grid(span: f64, n: usize) -> Vec<f64> {
    (1..=n).map(|i| i as f64 * span / n as f64).collect()
}

fn cmd_spectra(cfg: &Config, dir: &Path, gp: bool, chi: u8, axis: Axis) -> Result<()> {
    let sys = cfg.system()?;
    let fields = cfg.field_params();
    let doppler = cfg.doppler_model()?;
    let opts = cfg.chi_options();
    let n = cfg.numerics.n_delta.max(2);
    let span = cfg.numerics.delta_span;
    let kind = match chi {
        1 => SpectrumKind::Chi1,
        3 => SpectrumKind::Chi3,
        other => {
            return Err(Error::Config(format!("--chi must be 1 or 3, got {other}")));
        }
    };
    let (spec, name) = match (kind, axis) {
        (SpectrumKind::Chi1, Axis::Real) => (
            chi1(&symmetric_grid(span, n), &sys, &fields, &doppler, &opts)?,
            "chi1.csv",
        ),
        (SpectrumKind::Chi3, Axis::Real) => (
            chi3(&symmetric_grid(span, n), &sys, &fields, &doppler, &opts)?,
            "chi3.csv",
        ),
        (kind, Axis::Imaginary) => {
            let grid = positive_grid(span, n);
            let spec = to_imaginary_basis(kind, &grid, &sys, &fields, &doppler, &opts)?;
            let name = match kind {
                SpectrumKind::Chi1 => "chi1_imag.csv",
                SpectrumKind::Chi3 => "chi3_imag.csv",
            };
            (spec, name)
        }
    };
    let mut buf = Vec::new();
    io::write_spectrum_csv(&mut buf, &spec)?;
    let plot = format!("plot '{name}' using 1:(sqrt($2**2+$3**2)) with lines title '|chi|'");
    write_artifact(dir, name, &buf, gp.then_some(plot.as_str()))?;
    Ok(())
}

/// Uniform internal-unit τ grid over [0, tau_max_ns].
fn tau_grid(cfg: &Config) -> Result<Vec<f64>> {
    let sys = cfg.system()?;
    let n = cfg.numerics.n_tau.max(2);
    let tau_max = sys.time_from_ns(cfg.numerics.tau_max_ns);
    Ok((0..n)
        .map(|i| i as f64 * tau_max / (n - 1) as f64)
        .collect())
}

/// Evaluate the requested synthesis method on an internal-unit τ grid.
fn waveform_on_grid(
    cfg: &Config,
    method: Method,
    w1: f64,
    tau: &[f64],
) -> Result<CorrelationWaveform> {
    let sys = cfg.system()?;
    let fields = cfg.field_params();
    let pair = eigenvalues(&sys, &fields)?;
    let coalesced = pair.splitting_abs() < cfg.numerics.ep_tolerance;
    match method {
        Method::Eq3 => g2_eq3(tau, w1, sys.gamma_eff(), pair.omega_e, 1.0),
        Method::Eq4 => g2_eq4_with(
            tau,
            w1,
            sys.gamma_eff(),
            pair.splitting_abs(),
            1.0,
            cfg.numerics.eq4_verbatim,
        ),
        Method::EpLimit => Ok(ep_limit(tau, w1, sys.gamma_eff(), 1.0)),
        Method::TwoPole => {
            // The two-pole form degenerates to 0/0 at coalescence; hand off
            // to its analytic limit there.
            if coalesced {
                Ok(ep_limit(tau, w1, sys.gamma_eff(), 1.0))
            } else {
                Ok(g2_two_pole(tau, w1, &pair, 1.0))
            }
        }
        Method::Numeric => {
            let grid = symmetric_grid(cfg.numerics.delta_span, cfg.numerics.n_delta.max(2));
            let kappa = KappaSpectrum::two_pole(&grid, &pair, w1);
            let phi = ComplexSpectrum {
                delta_grid: grid.clone(),
                values: vec![C64::new(1.0, 0.0); grid.len()],
                axis: SpectrumAxis::RealDelta,
            };
            synthesize_numeric(&kappa, &phi, tau, sys.cell_length)
        }
    }
}

fn cmd_waveform(cfg: &Config, dir: &Path, gp: bool, method: Method, w1: f64) -> Result<()> {
    let sys = cfg.system()?;
    let tau = tau_grid(cfg)?;
    let wf = waveform_on_grid(cfg, method, w1, &tau)?;
    let mut buf = Vec::new();
    io::write_waveform_csv(&mut buf, &wf, sys.time_to_ns(1.0))?;
    write_artifact(
        dir,
        "waveform.csv",
        &buf,
        gp.then_some("plot 'waveform.csv' using 1:2 with lines"),
    )?;
    if let Some(leak) = wf.acausal_leakage {
        println!("acausal_leakage = {leak:.3e}");
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_counts(
    cfg: &Config,
    dir: &Path,
    gp: bool,
    seed: u64,
    duration: f64,
    bin_ns: f64,
    peak_counts: f64,
    bg_counts: f64,
    method: Method,
) -> Result<()> {
    if !(bin_ns > 0.0) || !(duration > 0.0) {
        return Err(Error::Config(
            "--bin and --duration must be positive".into(),
        ));
    }
    if peak_counts < 0.0 || bg_counts < 0.0 {
        return Err(Error::Config(
            "--peak-counts and --bg-counts must be nonnegative".into(),
        ));
    }
    let sys = cfg.system()?;
    let detection = DetectionParams {
        bin_width_s: bin_ns * 1e-9,
        acquisition_s: duration,
        ..DetectionParams::default()
    };
    detection.validate().map_err(|e| Error::Config(e.to_string()))?;
    let n = cfg.numerics.n_tau.max(2);
    let tau_ns: Vec<f64> = (0..n).map(|i| i as f64 * bin_ns).collect();
    let tau_internal: Vec<f64> = tau_ns.iter().map(|&t| sys.time_from_ns(t)).collect();
    let shape = waveform_on_grid(cfg, method, 1.0, &tau_internal)?.normalized();
    // Map the unit-peak shape onto expected counts per bin, then back to a
    // rate so the Poisson draw sees physical pairs/second.
    let gain = detection.pair_efficiency() * detection.bin_width_s * detection.acquisition_s;
    let rate = CorrelationWaveform {
        g2: shape
            .g2
            .iter()
            .map(|&s| (bg_counts + (peak_counts - bg_counts) * s) / gain)
            .collect(),
        tau_grid: tau_internal,
        ..shape
    };
    let tau_s: Vec<f64> = tau_ns.iter().map(|&t| t * 1e-9).collect();
    let hist = simulate_histogram(&rate, &tau_s, &detection, seed)?;
    let mut buf = Vec::new();
    io::write_histogram_csv(&mut buf, &hist)?;
    write_artifact(
        dir,
        "counts.csv",
        &buf,
        gp.then_some("plot 'counts.csv' using 1:2 with steps"),
    )?;
    let total: u64 = hist.counts.iter().sum();
    println!("total_counts = {total}");
    Ok(())
}

fn fmt_c64(z: C64) -> String {
    format!("{:.6e}{:+.6e}i", z.re, z.im)
}

fn cmd_fit(cfg: &Config, dir: &Path, input: &Path) -> Result<()> {
    let sys = cfg.system()?;
    let file = fs::File::open(input)?;
    let hist = io::read_histogram_csv(BufReader::new(file))?;
    let data = FitData::from_histogram(&hist, sys.gamma41_rad_s());
    let options = FitOptions {
        mask_initial_bins: cfg.numerics.mask_initial_bins,
        ..FitOptions::default()
    };
    let fit = fit_waveform(&data, &options)?;
    let entries = vec![
        ("model".to_string(), fit.model.to_string()),
        ("w1".to_string(), format!("{:.6e}", fit.params.w1)),
        (
            "gamma_eff".to_string(),
            format!("{:.6e}", fit.params.gamma_eff),
        ),
        (
            "gamma_eff_sigma".to_string(),
            format!("{:.6e}", fit.uncertainty.gamma_eff),
        ),
        (
            "splitting".to_string(),
            format!("{:.6e}", fit.params.splitting),
        ),
        (
            "splitting_sigma".to_string(),
            format!("{:.6e}", fit.uncertainty.splitting),
        ),
        (
            "background".to_string(),
            format!("{:.6e}", fit.params.background),
        ),
        ("tau0".to_string(), format!("{:.6e}", fit.params.tau0)),
        ("chi2".to_string(), format!("{:.6e}", fit.chi2)),
        ("n_points".to_string(), fit.n_points.to_string()),
        ("aicc".to_string(), format!("{:.6e}", fit.aicc)),
        (
            "selection_margin".to_string(),
            format!("{:.6e}", fit.selection_margin),
        ),
        ("ambiguous".to_string(), fit.ambiguous.to_string()),
        (
            "delta_plus".to_string(),
            fmt_c64(fit.derived.delta_plus),
        ),
        (
            "delta_minus".to_string(),
            fmt_c64(fit.derived.delta_minus),
        ),
    ];
    let mut buf = Vec::new();
    io::write_report(&mut buf, &entries)?;
    write_artifact(dir, "fit_report.txt", &buf, None)?;
    println!(
        "model = {}, gamma_eff = {:.4}, splitting = {:.4}",
        fit.model, fit.params.gamma_eff, fit.params.splitting
    );
    Ok(())
}

fn cmd_csr(
    cfg: &Config,
    dir: &Path,
    input: Option<PathBuf>,
    peak: Option<f64>,
    g_ss: Option<f64>,
    g_asas: Option<f64>,
) -> Result<()> {
    let _ = cfg;
    let cs: CauchySchwarz = match (input, peak, g_ss, g_asas) {
        (Some(path), None, None, None) => {
            let file = fs::File::open(&path)?;
            let hist = io::read_histogram_csv(BufReader::new(file))?;
            let norm = normalize_to_g2(&hist)?;
            cauchy_schwarz_from_histogram(&norm)?
        }
        (None, Some(peak), Some(g_ss), Some(g_asas)) => cauchy_schwarz(peak, g_ss, g_asas)?,
        _ => {
            return Err(Error::Config(
                "csr needs either --in, or all of --peak, --g-ss, --g-asas".into(),
            ));
        }
    };
    let entries = vec![
        ("r2".to_string(), format!("{:.6e}", cs.r2)),
        ("violation".to_string(), cs.violation.to_string()),
        ("peak_cross".to_string(), format!("{:.6e}", cs.peak_cross)),
        ("g_ss".to_string(), format!("{:.6e}", cs.g_ss)),
        ("g_asas".to_string(), format!("{:.6e}", cs.g_asas)),
    ];
    let mut buf = Vec::new();
    io::write_report(&mut buf, &entries)?;
    write_artifact(dir, "csr_report.txt", &buf, None)?;
    println!("R2 = {:.4}, violation = {}", cs.r2, cs.violation);
    Ok(())
}
