use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fedosov_lab::config::Command;
use fedosov_lab::{emit, run, ConfigError, Format, Levels, SuiteConfig};

#[derive(Parser)]
#[command(name = "fedosov-lab", version, about = "Exact Fedosov quantization and Berezin-Toeplitz verification suites")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

/// Options shared by every command. Anything set here overrides `--config`.
#[derive(Args, Clone, Default)]
struct Common {
    /// TOML file with the same keys as the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// flat:<n>, cp1-fs, fs:<n> or jet:<path>.
    #[arg(long)]
    geometry: Option<String>,
    /// zero, ricci or custom:<path>.
    #[arg(long)]
    alpha: Option<String>,
    /// "1..10" or "8,16,32,64".
    #[arg(long)]
    levels: Option<String>,
    /// Identity suites (comma separated or repeated).
    #[arg(long = "suite", value_delimiter = ',')]
    suites: Vec<String>,
    #[arg(long)]
    f: Option<String>,
    #[arg(long)]
    g: Option<String>,
    #[arg(long)]
    f0: Option<String>,
    /// Constant `c` in `f₀ − (ħ/4π)(Δf₀ + c)`.
    #[arg(long)]
    c: Option<String>,
    /// Skip the Killing precondition.
    #[arg(long)]
    force: bool,
    /// rot1, rot2, rot3 or ham:<expr>.
    #[arg(long)]
    field: Option<String>,
    #[arg(long)]
    action: Option<String>,
    /// json, csv or md.
    #[arg(long)]
    format: Option<String>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Write β_k and defect matrices as JSON (bt-verify).
    #[arg(long)]
    export_matrices: Option<PathBuf>,
    /// Omit runtime fields so identical configs give byte-identical reports.
    #[arg(long)]
    no_timings: bool,
}

#[derive(Args, Clone)]
struct Std {
    #[command(flatten)]
    common: Common,
    /// Truncation order N (at least 3).
    #[arg(long)]
    order: Option<u32>,
}

#[derive(Args, Clone)]
struct Asym {
    #[command(flatten)]
    common: Common,
    /// Number of star-product terms subtracted, N'.
    #[arg(long)]
    order: Option<usize>,
    /// Truncation order N of the Fedosov connection.
    #[arg(long)]
    truncation: Option<u32>,
}

#[derive(Args, Clone)]
struct ReportArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    order: Option<u32>,
    /// Commands to run (comma separated).
    #[arg(long, value_delimiter = ',')]
    commands: Vec<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Star-product coefficients C_i(f, g).
    StarProduct(Std),
    /// Fedosov residual and flat sections.
    FlatnessCheck(Std),
    /// Degree-1 classification of f₀ − (ħ/4π)(Δf₀ + c).
    #[command(name = "classify-degree1")]
    ClassifyDegree1(Std),
    /// Quantum Hamiltonian of a symmetry.
    QuantumHamiltonian(Std),
    /// Quantum moment map and its level-k values.
    MomentMap(Std),
    /// Exact operator identities on the Hilbert-space model.
    BtVerify(Std),
    /// Decay of ‖T_f T_g − Σ k^{-i} T_{C_i}‖ with k.
    BtAsymptotics(Asym),
    /// Several commands from one config.
    Report(ReportArgs),
}

fn flags(c: &Common) -> SuiteConfig {
    SuiteConfig {
        geometry: c.geometry.clone(),
        alpha: c.alpha.clone(),
        levels: c.levels.clone().map(Levels::Text),
        suites: (!c.suites.is_empty()).then(|| c.suites.clone()),
        f: c.f.clone(),
        g: c.g.clone(),
        f0: c.f0.clone(),
        c: c.c.clone(),
        force: c.force.then_some(true),
        field: c.field.clone(),
        action: c.action.clone(),
        output: c.output.clone(),
        export_matrices: c.export_matrices.clone(),
        no_timings: c.no_timings.then_some(true),
        ..Default::default()
    }
}

fn configure(cmd: &Cmd) -> Result<(Command, SuiteConfig), ConfigError> {
    let (command, common, mut fl) = match cmd {
        Cmd::StarProduct(a) => (Command::StarProduct, &a.common, SuiteConfig { order: a.order, ..flags(&a.common) }),
        Cmd::FlatnessCheck(a) => (Command::FlatnessCheck, &a.common, SuiteConfig { order: a.order, ..flags(&a.common) }),
        Cmd::ClassifyDegree1(a) => {
            (Command::ClassifyDegree1, &a.common, SuiteConfig { order: a.order, ..flags(&a.common) })
        }
        Cmd::QuantumHamiltonian(a) => {
            (Command::QuantumHamiltonian, &a.common, SuiteConfig { order: a.order, ..flags(&a.common) })
        }
        Cmd::MomentMap(a) => (Command::MomentMap, &a.common, SuiteConfig { order: a.order, ..flags(&a.common) }),
        Cmd::BtVerify(a) => (Command::BtVerify, &a.common, SuiteConfig { order: a.order, ..flags(&a.common) }),
        Cmd::BtAsymptotics(a) => (
            Command::BtAsymptotics,
            &a.common,
            SuiteConfig { order: a.truncation, asymptotic_order: a.order, ..flags(&a.common) },
        ),
        Cmd::Report(a) => (
            Command::Report,
            &a.common,
            SuiteConfig {
                order: a.order,
                commands: (!a.commands.is_empty()).then(|| a.commands.clone()),
                ..flags(&a.common)
            },
        ),
    };
    if let Some(f) = &common.format {
        fl.format = Some(Format::parse(f)?);
    }
    let file = match &common.config {
        Some(p) => SuiteConfig::load(p)?,
        None => SuiteConfig::default(),
    };
    Ok((command, file.overlay(fl)))
}

fn init_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("FEDOSOV_LAB_THREADS") else { return Ok(()) };
    let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| format!("FEDOSOV_LAB_THREADS={v:?} is not a positive integer"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_threads() {
        eprintln!("fedosov-lab: {e}");
        return ExitCode::from(2);
    }
    let resolved = configure(&cli.cmd).and_then(|(command, cfg)| cfg.resolve(command));
    let res = match resolved {
        Ok(r) => r,
        Err(e) => {
            eprintln!("fedosov-lab: {e}");
            return ExitCode::from(2);
        }
    };
    let report = match run(&res) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("fedosov-lab: {e}");
            return ExitCode::from(2);
        }
    };
    let bytes = match emit(&report, res.format) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("fedosov-lab: {e}");
            return ExitCode::from(2);
        }
    };
    match &res.echo.output {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &bytes) {
                eprintln!("fedosov-lab: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
            let (p, f, e) = report.counts();
            eprintln!("{p} pass, {f} fail, {e} error -> {}", path.display());
        }
        None => {
            use std::io::Write;
            let _ = std::io::stdout().write_all(&bytes);
        }
    }
    ExitCode::from(report.exit_code() as u8)
}
