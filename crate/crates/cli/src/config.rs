//! Suite configuration: a TOML file merged with command-line flags, then
//! validated into concrete inputs before anything is computed.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use fedosov_core::fedosov::Alpha;
use fedosov_core::geometry::Matrix;
use fedosov_core::hilbert::IdentitySuite;
use fedosov_core::{ChartFunction as CF, GeometrySpec, KahlerGeometry, RingCtx, Scalar};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{parse_constant, parse_expression, ParseError};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config: {0}")]
    Invalid(String),
    #[error("config: --{field}: {err}")]
    Expr { field: &'static str, err: ParseError },
    #[error("config: cannot read {path}: {msg}")]
    Io { path: String, msg: String },
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError::Invalid(msg.into()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Command {
    StarProduct,
    FlatnessCheck,
    ClassifyDegree1,
    QuantumHamiltonian,
    MomentMap,
    BtVerify,
    BtAsymptotics,
    Report,
}

impl Command {
    pub const RUNNABLE: [Command; 7] = [
        Command::StarProduct,
        Command::FlatnessCheck,
        Command::ClassifyDegree1,
        Command::QuantumHamiltonian,
        Command::MomentMap,
        Command::BtVerify,
        Command::BtAsymptotics,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Command::StarProduct => "star-product",
            Command::FlatnessCheck => "flatness-check",
            Command::ClassifyDegree1 => "classify-degree1",
            Command::QuantumHamiltonian => "quantum-hamiltonian",
            Command::MomentMap => "moment-map",
            Command::BtVerify => "bt-verify",
            Command::BtAsymptotics => "bt-asymptotics",
            Command::Report => "report",
        }
    }

    pub fn parse(s: &str) -> Result<Self, ConfigError> {
        Self::RUNNABLE
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| ConfigError::Invalid(format!("unknown command {s:?}")))
    }

    fn needs_cp1(&self) -> bool {
        matches!(self, Command::MomentMap | Command::BtVerify | Command::BtAsymptotics)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Md,
}

impl Format {
    pub fn parse(s: &str) -> Result<Self, ConfigError> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "md" | "markdown" => Ok(Format::Md),
            _ => invalid(format!("unknown format {s:?} (json, csv, md)")),
        }
    }
}

/// Level list as written: `"1..10"`, `"8,16,32,64"` or a TOML array.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Levels {
    List(Vec<u32>),
    Text(String),
}

impl Levels {
    pub fn resolve(&self) -> Result<Vec<u32>, ConfigError> {
        let v = match self {
            Levels::List(v) => v.clone(),
            Levels::Text(s) => parse_levels(s)?,
        };
        if v.is_empty() {
            return invalid("level list is empty");
        }
        if v[0] == 0 {
            return invalid("levels must be positive");
        }
        if v.windows(2).any(|w| w[0] >= w[1]) {
            return invalid(format!("levels must be strictly increasing, got {v:?}"));
        }
        Ok(v)
    }
}

fn parse_levels(s: &str) -> Result<Vec<u32>, ConfigError> {
    let num = |t: &str| t.trim().parse::<u32>().map_err(|_| ConfigError::Invalid(format!("bad level {t:?}")));
    if let Some((a, b)) = s.split_once("..") {
        let (a, b) = (num(a)?, num(b.trim_start_matches('='))?);
        if a > b {
            return invalid(format!("empty level range {s:?}"));
        }
        return Ok((a..=b).collect());
    }
    s.split(',').map(num).collect()
}

/// Everything a run can be configured with. Unset fields take per-command
/// defaults during [`SuiteConfig::resolve`]; the resolved copy is what reports echo.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub geometry: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub levels: Option<Levels>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub suites: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f0: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub force: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub action: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub asymptotic_order: Option<usize>,
    /// Commands run by `report`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub commands: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    #[serde(skip_serializing)]
    pub output: Option<PathBuf>,
    #[serde(skip_serializing)]
    pub export_matrices: Option<PathBuf>,
    #[serde(skip_serializing)]
    pub no_timings: Option<bool>,
}

/// Which field of the Lie algebra action, or the Hamiltonian field of a function.
#[derive(Clone, Debug)]
pub enum FieldSpec {
    Generator(usize),
    Hamiltonian(CF),
}

/// Validated inputs.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub command: Command,
    pub geom: Arc<KahlerGeometry>,
    pub alpha: Alpha,
    pub order: u32,
    pub levels: Vec<u32>,
    pub suites: Vec<IdentitySuite>,
    pub f: Option<CF>,
    pub g: Option<CF>,
    pub f0: Option<CF>,
    pub c: Scalar,
    pub force: bool,
    pub field: Option<FieldSpec>,
    pub asymptotic_order: usize,
    pub commands: Vec<Command>,
    pub format: Format,
    pub timings: bool,
    /// The configuration with defaults filled in, for the report.
    pub echo: SuiteConfig,
}

fn read(path: &Path) -> Result<String, ConfigError> {
    std::fs::read_to_string(path)
        .map_err(|e| ConfigError::Io { path: path.display().to_string(), msg: e.to_string() })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct JetFile {
    n: usize,
    order: u32,
    potential: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AlphaFile {
    /// `components[s][i][j]` is `a^{(s)}_{ij̄}`.
    components: Vec<Vec<Vec<String>>>,
}

pub fn parse_geometry(name: &str) -> Result<KahlerGeometry, ConfigError> {
    let spec = if let Some(path) = name.strip_prefix("jet:") {
        let text = read(Path::new(path))?;
        let jet: JetFile =
            toml::from_str(&text).map_err(|e| ConfigError::Invalid(format!("jet file {path}: {e}")))?;
        if jet.n == 0 || jet.n > fedosov_core::poly::MAX_DIM {
            return invalid(format!("jet file {path}: dimension {} out of range", jet.n));
        }
        let phi = parse_expression(&jet.potential, RingCtx::flat(jet.n))
            .map_err(|err| ConfigError::Expr { field: "geometry", err })?;
        GeometrySpec::PotentialJet { n: jet.n, potential: phi.numerator().clone(), order: jet.order }
    } else {
        GeometrySpec::parse(name).map_err(|e| ConfigError::Invalid(e.to_string()))?
    };
    KahlerGeometry::new(spec).map_err(|e| ConfigError::Invalid(e.to_string()))
}

fn parse_alpha(name: &str, geom: &KahlerGeometry) -> Result<Alpha, ConfigError> {
    match name {
        "zero" => Ok(Alpha::Zero),
        "ricci" => Ok(Alpha::Ricci),
        _ => {
            let Some(path) = name.strip_prefix("custom:") else {
                return invalid(format!("unknown alpha {name:?} (zero, ricci, custom:<path>)"));
            };
            let text = read(Path::new(path))?;
            let file: AlphaFile =
                toml::from_str(&text).map_err(|e| ConfigError::Invalid(format!("alpha file {path}: {e}")))?;
            let n = geom.n();
            let mut out = Vec::new();
            for m in &file.components {
                if m.len() != n || m.iter().any(|r| r.len() != n) {
                    return invalid(format!("alpha file {path}: every component must be {n}x{n}"));
                }
                let mat: Matrix = m
                    .iter()
                    .map(|r| {
                        r.iter()
                            .map(|s| parse_expression(s, geom.ctx).map_err(|err| ConfigError::Expr { field: "alpha", err }))
                            .collect::<Result<Vec<_>, _>>()
                    })
                    .collect::<Result<_, _>>()?;
                out.push(mat);
            }
            Ok(Alpha::Custom(out))
        }
    }
}

impl SuiteConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Invalid(format!("config file: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        Self::from_toml(&read(path)?)
    }

    /// Fields set in `flags` win over `self`.
    pub fn overlay(self, flags: SuiteConfig) -> SuiteConfig {
        SuiteConfig {
            geometry: flags.geometry.or(self.geometry),
            alpha: flags.alpha.or(self.alpha),
            order: flags.order.or(self.order),
            levels: flags.levels.or(self.levels),
            suites: flags.suites.or(self.suites),
            f: flags.f.or(self.f),
            g: flags.g.or(self.g),
            f0: flags.f0.or(self.f0),
            c: flags.c.or(self.c),
            force: flags.force.or(self.force),
            field: flags.field.or(self.field),
            action: flags.action.or(self.action),
            asymptotic_order: flags.asymptotic_order.or(self.asymptotic_order),
            commands: flags.commands.or(self.commands),
            format: flags.format.or(self.format),
            output: flags.output.or(self.output),
            export_matrices: flags.export_matrices.or(self.export_matrices),
            no_timings: flags.no_timings.or(self.no_timings),
        }
    }

    /// Check everything and parse every expression. No quantization work happens here.
    pub fn resolve(&self, command: Command) -> Result<Resolved, ConfigError> {
        let mut echo = self.clone();
        let commands = if command == Command::Report {
            let names = self.commands.clone().unwrap_or_else(|| {
                ["flatness-check", "moment-map", "bt-verify"].iter().map(|s| s.to_string()).collect()
            });
            if names.is_empty() {
                return invalid("report needs at least one command");
            }
            echo.commands = Some(names.clone());
            names.iter().map(|s| Command::parse(s)).collect::<Result<Vec<_>, _>>()?
        } else {
            if self.commands.is_some() {
                return invalid("`commands` only applies to the report command");
            }
            vec![command]
        };

        let geometry = self.geometry.clone().unwrap_or_else(|| "cp1-fs".into());
        let geom = Arc::new(parse_geometry(&geometry)?);
        echo.geometry = Some(geometry);
        if commands.iter().any(|c| c.needs_cp1()) && geom.spec != GeometrySpec::cp1() {
            return invalid(format!("the Hilbert-space model needs geometry cp1-fs, got {}", geom.name()));
        }

        let alpha_name = self.alpha.clone().unwrap_or_else(|| "ricci".into());
        let alpha = parse_alpha(&alpha_name, &geom)?;
        echo.alpha = Some(alpha_name);
        let needs_ricci = commands
            .iter()
            .any(|c| matches!(c, Command::ClassifyDegree1 | Command::MomentMap | Command::BtVerify));
        if needs_ricci && alpha != Alpha::Ricci {
            return invalid("degree-1 quantization and the Toeplitz comparison need alpha = ricci");
        }

        let order = self.order.unwrap_or(6);
        if order < 3 {
            return invalid(format!("truncation order must be at least 3, got {order}"));
        }
        echo.order = Some(order);

        let default_levels = if commands.contains(&Command::BtAsymptotics) {
            Levels::List(vec![8, 16, 32, 64])
        } else {
            Levels::Text("1..10".into())
        };
        let levels = self.levels.clone().unwrap_or(default_levels).resolve()?;
        echo.levels = Some(Levels::List(levels.clone()));
        if commands.contains(&Command::BtAsymptotics) && levels.len() < 3 {
            return invalid(format!("bt-asymptotics needs at least 3 levels, got {}", levels.len()));
        }

        let suites = match &self.suites {
            None => IdentitySuite::all().to_vec(),
            Some(names) => {
                if names.is_empty() {
                    return invalid("suite list is empty");
                }
                names
                    .iter()
                    .map(|s| IdentitySuite::parse(s).map_err(|e| ConfigError::Invalid(e.to_string())))
                    .collect::<Result<Vec<_>, _>>()?
            }
        };
        echo.suites = Some(suites.iter().map(|s| s.name().to_string()).collect());

        let ctx = geom.ctx;
        let expr = |field: &'static str, s: &Option<String>| -> Result<Option<CF>, ConfigError> {
            s.as_deref().map(|t| parse_expression(t, ctx).map_err(|err| ConfigError::Expr { field, err })).transpose()
        };
        let f = expr("f", &self.f)?;
        let g = expr("g", &self.g)?;
        let f0 = expr("f0", &self.f0)?;
        let c = match &self.c {
            Some(t) => parse_constant(t, ctx).map_err(|err| ConfigError::Expr { field: "c", err })?,
            None => Scalar::zero(),
        };
        let force = self.force.unwrap_or(false);
        let asymptotic_order = self.asymptotic_order.unwrap_or(1);

        let field = match self.field.as_deref() {
            None => None,
            Some(s) => Some(if let Some(rest) = s.strip_prefix("ham:") {
                FieldSpec::Hamiltonian(parse_expression(rest, ctx).map_err(|err| ConfigError::Expr { field: "field", err })?)
            } else {
                match s {
                    "rot1" | "rot2" | "rot3" => {
                        if geom.spec != GeometrySpec::cp1() {
                            return invalid(format!("field {s} needs geometry cp1-fs"));
                        }
                        FieldSpec::Generator(s[3..].parse::<usize>().unwrap() - 1)
                    }
                    _ => return invalid(format!("unknown field {s:?} (rot1, rot2, rot3, ham:<expr>)")),
                }
            }),
        };
        let action = self.action.clone().unwrap_or_else(|| "su2".into());
        if action != "su2" {
            return invalid(format!("unknown action {action:?} (su2)"));
        }

        for cmd in &commands {
            match cmd {
                Command::StarProduct | Command::BtAsymptotics => {
                    if f.is_none() || g.is_none() {
                        return invalid(format!("{} needs --f and --g", cmd.name()));
                    }
                }
                Command::ClassifyDegree1 if f0.is_none() => return invalid("classify-degree1 needs --f0"),
                Command::QuantumHamiltonian if field.is_none() => {
                    return invalid("quantum-hamiltonian needs --field")
                }
                _ => {}
            }
        }
        if commands.contains(&Command::BtAsymptotics) && asymptotic_order > (order / 2) as usize {
            return invalid(format!("asymptotic order {asymptotic_order} needs truncation order at least {}", 2 * asymptotic_order));
        }
        if commands.contains(&Command::MomentMap) || commands.contains(&Command::BtVerify) {
            echo.action = Some(action);
        }
        if commands.contains(&Command::BtAsymptotics) {
            echo.asymptotic_order = Some(asymptotic_order);
        }
        if commands.contains(&Command::ClassifyDegree1) {
            echo.force = Some(force);
        }
        let format = self.format.unwrap_or(Format::Json);
        echo.format = Some(format);

        Ok(Resolved {
            command,
            geom,
            alpha,
            order,
            levels,
            suites,
            f,
            g,
            f0,
            c,
            force,
            field,
            asymptotic_order,
            commands,
            format,
            timings: !self.no_timings.unwrap_or(false),
            echo,
        })
    }
}
