//! Run configuration (TOML). Unknown keys are rejected everywhere.

use std::path::{Path, PathBuf};

use faraday_qns::optics::{MeasurementBasis, SensorConfig};
use faraday_qns::quantum::InitialState;
use faraday_qns::snr::MaterialPreset;
use faraday_qns::trajectory::ClassicalFieldModel;
use faraday_qns::weak::{CouplingTime, ProtocolSpec, ShotSpec};
use faraday_qns::TargetModel;
use serde::Deserialize;

use crate::error::CliError;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub model: Option<ModelSpec>,
    pub protocol: Option<ProtocolConfig>,
    #[serde(default)]
    pub exact: ExactConfig,
    pub mc: Option<McConfig>,
    pub snr: Option<SnrConfig>,
    pub sweep: Option<SweepConfig>,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    Up,
    Down,
    Mixed,
    Thermal { beta: f64 },
}

impl From<InitialSpec> for InitialState {
    fn from(s: InitialSpec) -> Self {
        match s {
            InitialSpec::Up => InitialState::Up,
            InitialSpec::Down => InitialState::Down,
            InitialSpec::Mixed => InitialState::Mixed,
            InitialSpec::Thermal { beta } => InitialState::Thermal { beta },
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    /// `H = field·J`, `B = coupling·J` for a single spin `two_j/2`.
    Spin {
        two_j: usize,
        field: [f64; 3],
        coupling: [f64; 3],
        initial: InitialSpec,
    },
    IsingChain {
        sites: usize,
        exchange: f64,
        transverse_field: f64,
        coupling: f64,
        initial: InitialSpec,
    },
}

impl ModelSpec {
    pub fn build(&self) -> Result<TargetModel, CliError> {
        Ok(match *self {
            ModelSpec::Spin { two_j, field, coupling, initial } => TargetModel::single_spin(two_j, field, coupling, &initial.into())?,
            ModelSpec::IsingChain { sites, exchange, transverse_field, coupling, initial } => {
                TargetModel::ising_chain(sites, exchange, transverse_field, coupling, &initial.into())?
            }
        })
    }
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShotConfig {
    pub time: f64,
    pub basis: BasisName,
}

#[derive(Clone, Copy, Debug, Deserialize)]
pub enum BasisName {
    S2,
    S3,
}

impl From<BasisName> for MeasurementBasis {
    fn from(b: BasisName) -> Self {
        match b {
            BasisName::S2 => MeasurementBasis::S2,
            BasisName::S3 => MeasurementBasis::S3,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingTimeName {
    #[default]
    Start,
    Midpoint,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolConfig {
    pub alpha: f64,
    /// s
    pub tau: f64,
    pub shots: Vec<ShotConfig>,
    #[serde(default)]
    pub coupling_time: CouplingTimeName,
    #[serde(default)]
    pub swap_detectors: bool,
}

impl ProtocolConfig {
    pub fn build(&self) -> Result<ProtocolSpec, CliError> {
        let mut sensor = SensorConfig::new(self.alpha, self.tau)?;
        sensor.swap_detectors = self.swap_detectors;
        let shots = self.shots.iter().map(|s| ShotSpec::new(s.time, s.basis.into())).collect();
        let coupling_time = match self.coupling_time {
            CouplingTimeName::Start => CouplingTime::Start,
            CouplingTimeName::Midpoint => CouplingTime::Midpoint,
        };
        Ok(ProtocolSpec::new(shots, sensor)?.with_coupling_time(coupling_time))
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExactConfig {
    /// Also evaluate the all-orders path.
    #[serde(default)]
    pub unitary: bool,
    /// Per-mode photon cutoff; defaults to the smallest allowed value.
    pub n_max: Option<usize>,
    /// Scan the last shot over these times (s).
    pub last_shot_times: Option<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum McMode {
    KrausQuantum,
    SemiclassicalField,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSpec {
    Constant { value: f64 },
    OrnsteinUhlenbeck { amplitude: f64, correlation_time: f64 },
    Telegraph { amplitude: f64, correlation_time: f64 },
}

impl From<FieldSpec> for ClassicalFieldModel {
    fn from(f: FieldSpec) -> Self {
        match f {
            FieldSpec::Constant { value } => ClassicalFieldModel::Constant { value },
            FieldSpec::OrnsteinUhlenbeck { amplitude, correlation_time } => {
                ClassicalFieldModel::OrnsteinUhlenbeck { sigma: amplitude, correlation_time }
            }
            FieldSpec::Telegraph { amplitude, correlation_time } => ClassicalFieldModel::Telegraph { amplitude, correlation_time },
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    pub sequences: usize,
    pub mode: McMode,
    pub field: Option<FieldSpec>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnrConfig {
    /// Built-in preset name.
    pub preset: Option<String>,
    /// Preset file with the material schema, relative to the config file.
    pub preset_file: Option<PathBuf>,
    /// Inline material.
    pub material: Option<MaterialPreset>,
    pub orders: Vec<u32>,
    #[serde(default = "one")]
    pub sequences: f64,
    /// cm
    pub xi: Option<f64>,
}

fn one() -> f64 {
    1.0
}

impl SnrConfig {
    pub fn material(&self, base_dir: &Path) -> Result<MaterialPreset, CliError> {
        match (&self.preset, &self.preset_file, &self.material) {
            (Some(name), None, None) => match name.to_ascii_lowercase().as_str() {
                "lihof4" => Ok(MaterialPreset::lihof4()),
                other => Err(CliError::Config(format!("unknown material preset `{other}`"))),
            },
            (None, Some(path), None) => {
                let path = base_dir.join(path);
                let text = std::fs::read_to_string(&path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
                Ok(MaterialPreset::from_toml_str(&text)?)
            }
            (None, None, Some(m)) => {
                m.validate()?;
                Ok(m.clone())
            }
            _ => Err(CliError::Config("snr needs exactly one of preset, preset_file, material".into())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepCommand {
    Exact,
    Simulate,
    Snr,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub command: SweepCommand,
    /// Dotted path into this document, e.g. `protocol.tau` or `protocol.shots.1.time`.
    pub parameter: String,
    pub values: Vec<f64>,
}

/// Parses and validates a config document.
pub fn parse(text: &str) -> Result<(RunConfig, toml::Table), CliError> {
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
    let cfg: RunConfig = table.clone().try_into().map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
    Ok((cfg, table))
}

impl RunConfig {
    pub fn require_model(&self) -> Result<TargetModel, CliError> {
        self.model.as_ref().ok_or_else(|| CliError::Config("missing [model]".into()))?.build()
    }

    pub fn require_protocol(&self) -> Result<ProtocolSpec, CliError> {
        self.protocol.as_ref().ok_or_else(|| CliError::Config("missing [protocol]".into()))?.build()
    }

    pub fn require_seed(&self) -> Result<u64, CliError> {
        self.seed.ok_or_else(|| CliError::Config("missing `seed`; randomness is never seeded implicitly".into()))
    }
}

/// Replaces the numeric value at `path` and re-validates the document.
pub fn with_parameter(table: &toml::Table, path: &str, value: f64) -> Result<RunConfig, CliError> {
    let mut root = toml::Value::Table(table.clone());
    let mut node = &mut root;
    for part in path.split('.') {
        node = match node {
            toml::Value::Table(t) => t.get_mut(part),
            toml::Value::Array(a) => part.parse::<usize>().ok().and_then(|i| a.get_mut(i)),
            _ => None,
        }
        .ok_or_else(|| CliError::Config(format!("sweep parameter `{path}` does not resolve")))?;
    }
    *node = match node {
        toml::Value::Integer(_) if value.fract() == 0.0 && value.abs() < 9e15 => toml::Value::Integer(value as i64),
        toml::Value::Float(_) => toml::Value::Float(value),
        _ => return Err(CliError::Config(format!("sweep parameter `{path}` is not a numeric value"))),
    };
    root.try_into().map_err(|e: toml::de::Error| CliError::Config(e.to_string()))
}
