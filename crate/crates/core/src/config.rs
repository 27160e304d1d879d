//! Experiment configuration files.
//!
//! A config is a single TOML document with `noise`, `plan`, `run` and
//! optional `output`, `diagnose` blocks. Unknown keys are rejected. The JSON
//! schema in `docs/config.schema.json` is generated from these types.

use std::path::Path;

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bits::BitString;
use crate::channel::{LocalChannel, TwirledChannel};
use crate::error::{Error, Result};
use crate::matrix::AssignmentMatrix;
use crate::noise::{LocalReadout, PrepMode, PrepModel, QubitNoise, ReadoutModel};
use crate::sim::drift::{DriftSchedule, DriftSegment, Interpolation, NoiseOverride};
use crate::sim::engine::{Feedforward, SimConfig};
use crate::sim::plan::{ExecutionOrder, Scheme, SequencePlan};
use crate::sim::record::RecordFormat;

/// A value given once for every qubit, or per qubit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(untagged)]
pub enum PerQubit {
    Uniform(f64),
    List(Vec<f64>),
}

impl PerQubit {
    pub fn expand(&self, n: usize, what: &str) -> Result<Vec<f64>> {
        match self {
            Self::Uniform(v) => Ok(vec![*v; n]),
            Self::List(v) if v.len() == n => Ok(v.clone()),
            Self::List(v) => Err(Error::Config(format!(
                "{what} lists {} values for {n} qubits",
                v.len()
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct LocalFlips {
    pub p_0to1: f64,
    pub p_1to0: f64,
}

/// One term of a twirled readout channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct MaskWeight {
    /// Flip mask in qubit order, e.g. `"01"` flips qubit 1.
    pub mask: String,
    pub weight: f64,
}

fn channel_from(n: usize, terms: &[MaskWeight]) -> Result<TwirledChannel> {
    let terms = terms
        .iter()
        .map(|t| Ok((t.mask.parse::<BitString>()?, t.weight)))
        .collect::<Result<Vec<_>>>()?;
    TwirledChannel::new(n, terms, false)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case", tag = "kind", deny_unknown_fields)]
pub enum PrepSpec {
    Native,
    ConditionalReset,
    ParityReset { j: usize },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct OverrideSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<PerQubit>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_down: Option<PerQubit>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_up: Option<PerQubit>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel: Option<Vec<MaskWeight>>,
}

impl OverrideSpec {
    fn resolve(&self, n: usize) -> Result<NoiseOverride> {
        let expand = |v: &Option<PerQubit>, what: &str| v.as_ref().map(|v| v.expand(n, what)).transpose();
        Ok(NoiseOverride {
            epsilon: expand(&self.epsilon, "epsilon")?,
            gamma_down: expand(&self.gamma_down, "gamma_down")?,
            gamma_up: expand(&self.gamma_up, "gamma_up")?,
            channel: self.channel.as_ref().map(|c| channel_from(n, c)).transpose()?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct SegmentSpec {
    #[serde(default)]
    pub start: u64,
    /// Exclusive; defaults to the run's shot count.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end: Option<u64>,
    pub from: OverrideSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub to: Option<OverrideSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct DriftSpec {
    #[serde(default)]
    pub interpolation: InterpolationSpec,
    pub segments: Vec<SegmentSpec>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum InterpolationSpec {
    #[default]
    Step,
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    /// Symmetric per-qubit readout error. Exactly one of `epsilon`,
    /// `local`, `matrix` and `channel` must be given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<PerQubit>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub local: Option<Vec<LocalFlips>>,
    /// Full assignment matrix, `matrix[outcome][state]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel: Option<Vec<MaskWeight>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_down: Option<PerQubit>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_up: Option<PerQubit>,
    /// Preparation error per qubit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prep_x: Option<PerQubit>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prep: Option<PrepSpec>,
    #[serde(default)]
    pub reset_infidelity: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drift: Option<DriftSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct FeedforwardSpec {
    pub qubit: usize,
    pub a0: f64,
    pub a1: f64,
}

/// Approximate inverse applied before the parity tallies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct HybridSpec {
    /// Symmetric flip rates of the approximate readout model.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<PerQubit>,
    /// TOML or JSON file holding `channel = [{mask, weight}, ...]` for the
    /// approximate model, relative to the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask_file: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct PlanConfig {
    pub scheme: Scheme,
    pub j_max: usize,
    /// Mitigation order; defaults to `j_max`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default)]
    pub postselect_k: usize,
    #[serde(default)]
    pub twirl: bool,
    /// Prepared basis state in qubit order; its length fixes the qubit count.
    pub target: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feedforward: Option<FeedforwardSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hybrid: Option<HybridSpec>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum OrderSpec {
    /// One record set whose nested windows serve every level.
    #[default]
    Shared,
    Interleaved,
    Blocked,
}

impl OrderSpec {
    pub fn execution(self) -> Option<ExecutionOrder> {
        match self {
            Self::Shared => None,
            Self::Interleaved => Some(ExecutionOrder::Interleaved),
            Self::Blocked => Some(ExecutionOrder::Blocked),
        }
    }
}

fn default_resamples() -> usize {
    200
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub n_shots: u64,
    pub seed: u64,
    #[serde(default)]
    pub order: OrderSpec,
    /// Bootstrap resamples for shared-record uncertainties.
    #[serde(default = "default_resamples")]
    pub resamples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "lowercase")]
pub enum FormatSpec {
    Csv,
    Jsonl,
    Bin,
}

impl From<FormatSpec> for RecordFormat {
    fn from(f: FormatSpec) -> Self {
        match f {
            FormatSpec::Csv => RecordFormat::Csv,
            FormatSpec::Jsonl => RecordFormat::Jsonl,
            FormatSpec::Bin => RecordFormat::Bin,
        }
    }
}

fn default_formats() -> Vec<FormatSpec> {
    vec![FormatSpec::Jsonl]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Output directory, overridden by `--out`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    /// Record formats written by `simulate`; the first is read back.
    #[serde(default = "default_formats")]
    pub formats: Vec<FormatSpec>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: None,
            formats: default_formats(),
        }
    }
}

fn default_factor() -> f64 {
    5.0
}

fn default_bit() -> u8 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct DiagnoseConfig {
    /// Value of the first readout that a shot must show to enter the curve.
    #[serde(default = "default_bit")]
    pub post_select_bit: u8,
    /// Flag qubits whose rate is at least this multiple of the median.
    #[serde(default = "default_factor")]
    pub flag_factor: f64,
}

impl Default for DiagnoseConfig {
    fn default() -> Self {
        Self {
            post_select_bit: 1,
            flag_factor: 5.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub noise: NoiseConfig,
    pub plan: PlanConfig,
    pub run: RunConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub diagnose: DiagnoseConfig,
}

/// Pretty-printed JSON schema of [`ExperimentConfig`].
pub fn schema_json() -> String {
    let schema = schemars::schema_for!(ExperimentConfig);
    serde_json::to_string_pretty(&schema).expect("schema serializes") + "\n"
}

impl ExperimentConfig {
    /// Parses TOML; syntax and schema violations are `Error::Config`.
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }

    pub fn n_qubits(&self) -> usize {
        self.plan.target.len()
    }

    pub fn m(&self) -> usize {
        self.plan.m.unwrap_or(self.plan.j_max)
    }

    /// Structural checks beyond the schema: exactly one readout description,
    /// consistent widths, valid probabilities.
    pub fn check(&self) -> Result<()> {
        let n = self.n_qubits();
        if n == 0 {
            return Err(Error::Config("target must name at least one qubit".into()));
        }
        let given = [
            self.noise.epsilon.is_some(),
            self.noise.local.is_some(),
            self.noise.matrix.is_some(),
            self.noise.channel.is_some(),
        ]
        .iter()
        .filter(|b| **b)
        .count();
        if given != 1 {
            return Err(Error::Config(
                "noise needs exactly one of epsilon, local, matrix, channel".into(),
            ));
        }
        if self.m() > self.plan.j_max {
            return Err(Error::Config(format!(
                "m = {} exceeds j_max = {}",
                self.m(),
                self.plan.j_max
            )));
        }
        if self.run.n_shots == 0 {
            return Err(Error::Config("n_shots must be positive".into()));
        }
        if self.output.formats.is_empty() {
            return Err(Error::Config("output.formats must not be empty".into()));
        }
        if self.diagnose.post_select_bit > 1 {
            return Err(Error::Config("post_select_bit must be 0 or 1".into()));
        }
        if self.plan.postselect_k > 0 && self.noise.prep.as_ref().is_some_and(|p| *p != PrepSpec::Native) {
            return Err(Error::Config("post-selection requires native preparation".into()));
        }
        if self.run.order == OrderSpec::Shared && !self.plan.scheme.supports_shared() {
            return Err(Error::Config(format!(
                "scheme {} needs order interleaved or blocked",
                self.plan.scheme
            )));
        }
        if let Some(h) = &self.plan.hybrid {
            if h.epsilon.is_some() == h.mask_file.is_some() {
                return Err(Error::Config(
                    "hybrid needs exactly one of epsilon, mask_file".into(),
                ));
            }
            if matches!(self.plan.scheme, Scheme::Majority | Scheme::Weighted) {
                return Err(Error::Config(format!(
                    "hybrid correction is undefined for scheme {}",
                    self.plan.scheme
                )));
            }
        }
        let sim = self.sim_config().map_err(|e| Error::Config(e.to_string()))?;
        crate::sim::engine::Simulator::new(sim.clone(), self.plan())
            .map_err(|e| Error::Config(e.to_string()))?;
        sim.drift
            .validate(self.run.n_shots, n)
            .map_err(|e| Error::Config(e.to_string()))
    }

    pub fn plan(&self) -> SequencePlan {
        SequencePlan::new(self.plan.scheme, self.plan.j_max)
    }

    pub fn target(&self) -> Result<BitString> {
        self.plan.target.parse()
    }

    pub fn readout(&self) -> Result<ReadoutModel> {
        let n = self.n_qubits();
        let nz = &self.noise;
        if let Some(e) = &nz.epsilon {
            return Ok(ReadoutModel::symmetric(&e.expand(n, "epsilon")?));
        }
        if let Some(l) = &nz.local {
            if l.len() != n {
                return Err(Error::Config(format!(
                    "local lists {} qubits, target has {n}",
                    l.len()
                )));
            }
            return Ok(ReadoutModel::Local(
                l.iter()
                    .map(|f| LocalReadout {
                        p_0to1: f.p_0to1,
                        p_1to0: f.p_1to0,
                    })
                    .collect(),
            ));
        }
        if let Some(rows) = &nz.matrix {
            let m = AssignmentMatrix::from_rows(rows)?;
            if m.n_qubits() != n {
                return Err(Error::Config(format!(
                    "matrix acts on {} qubits, target has {n}",
                    m.n_qubits()
                )));
            }
            return Ok(ReadoutModel::Dense(m));
        }
        let terms = nz.channel.as_ref().expect("checked by caller");
        Ok(ReadoutModel::Twirled(channel_from(n, terms)?))
    }

    pub fn sim_config(&self) -> Result<SimConfig> {
        let n = self.n_qubits();
        let nz = &self.noise;
        let zeros = PerQubit::Uniform(0.0);
        let down = nz.gamma_down.as_ref().unwrap_or(&zeros).expand(n, "gamma_down")?;
        let up = nz.gamma_up.as_ref().unwrap_or(&zeros).expand(n, "gamma_up")?;
        let mut cfg = SimConfig::new(self.readout()?, QubitNoise::new(down, up)?, self.target()?);
        let x = nz.prep_x.as_ref().unwrap_or(&zeros).expand(n, "prep_x")?;
        let mode = match (&nz.prep, self.plan.postselect_k) {
            (_, k) if k > 0 => PrepMode::PostSelected { k },
            (None | Some(PrepSpec::Native), _) => PrepMode::Native,
            (Some(PrepSpec::ConditionalReset), _) => PrepMode::ConditionalReset,
            (Some(PrepSpec::ParityReset { j }), _) => PrepMode::ParityReset { j: *j },
        };
        cfg.prep = PrepModel::new(x, mode)?;
        cfg.twirl = self.plan.twirl;
        cfg.reset_infidelity = nz.reset_infidelity;
        cfg.feedforward = self.plan.feedforward.as_ref().map(|f| Feedforward {
            qubit: f.qubit,
            a0: f.a0,
            a1: f.a1,
        });
        if let Some(d) = &nz.drift {
            let segments = d
                .segments
                .iter()
                .map(|s| {
                    Ok(DriftSegment {
                        start: s.start,
                        end: s.end.unwrap_or(self.run.n_shots),
                        from: s.from.resolve(n)?,
                        to: s.to.as_ref().map(|t| t.resolve(n)).transpose()?,
                    })
                })
                .collect::<Result<_>>()?;
            cfg.drift = DriftSchedule {
                segments,
                interpolation: match d.interpolation {
                    InterpolationSpec::Step => Interpolation::Step,
                    InterpolationSpec::Linear => Interpolation::Linear,
                },
            };
        }
        Ok(cfg)
    }

    /// The approximate inverse for hybrid mitigation, if configured. Mask
    /// files are resolved relative to `base`.
    pub fn hybrid_inverse(&self, base: &Path) -> Result<Option<HybridInverse>> {
        let Some(h) = &self.plan.hybrid else {
            return Ok(None);
        };
        let n = self.n_qubits();
        if let Some(e) = &h.epsilon {
            return Ok(Some(HybridInverse::Local(LocalChannel::inverse_flips(
                &e.expand(n, "hybrid epsilon")?,
            )?)));
        }
        let path = base.join(h.mask_file.as_ref().expect("checked"));
        let text = std::fs::read_to_string(&path)?;
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct MaskFile {
            channel: Vec<MaskWeight>,
        }
        let file: MaskFile = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))?
        } else {
            toml::from_str(&text).map_err(|e| Error::Config(e.to_string()))?
        };
        Ok(Some(HybridInverse::Channel(
            channel_from(n, &file.channel)?.inverse()?,
        )))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum HybridInverse {
    Local(LocalChannel),
    Channel(TwirledChannel),
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[noise]
epsilon = 0.1

[plan]
scheme = "basic"
j_max = 1
target = "1"

[run]
n_shots = 100
seed = 7
"#;

    #[test]
    fn minimal_config_resolves() {
        let c = ExperimentConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(c.m(), 1);
        assert_eq!(c.run.resamples, 200);
        assert_eq!(c.output.formats, vec![FormatSpec::Jsonl]);
        let sim = c.sim_config().unwrap();
        assert_eq!(sim.readout, ReadoutModel::symmetric(&[0.1]));
        assert!(sim.noise.is_zero());
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        let typo = MINIMAL.replace("j_max", "jmax");
        assert!(matches!(
            ExperimentConfig::from_toml(&typo),
            Err(Error::Config(_))
        ));
        let extra = format!("{MINIMAL}\n[extra]\nx = 1\n");
        assert!(ExperimentConfig::from_toml(&extra).is_err());
        let bad_eps = MINIMAL.replace("epsilon = 0.1", "epsilon = 1.5");
        assert!(ExperimentConfig::from_toml(&bad_eps).is_err());
        let two = MINIMAL.replace(
            "epsilon = 0.1",
            "epsilon = 0.1\nmatrix = [[1.0, 0.0], [0.0, 1.0]]",
        );
        assert!(ExperimentConfig::from_toml(&two).is_err());
        let wide = MINIMAL.replace("epsilon = 0.1", "epsilon = [0.1, 0.2]");
        assert!(ExperimentConfig::from_toml(&wide).is_err());
        let m_big = MINIMAL.replace("j_max = 1", "j_max = 1\nm = 2");
        assert!(ExperimentConfig::from_toml(&m_big).is_err());
        let posterior = MINIMAL.replace("\"basic\"", "\"dummy-posterior\"");
        assert!(matches!(
            ExperimentConfig::from_toml(&posterior),
            Err(Error::Config(_))
        ));
        let hybrid = MINIMAL.replace("\"basic\"", "\"majority\"") + "\n[plan.hybrid]\nepsilon = 0.1\n";
        assert!(matches!(
            ExperimentConfig::from_toml(&hybrid),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn drift_segments_default_to_full_run() {
        let text = format!(
            "{MINIMAL}\n[noise.drift]\ninterpolation = \"linear\"\n[[noise.drift.segments]]\nfrom = {{ epsilon = 0.05 }}\nto = {{ epsilon = 0.15 }}\n"
        );
        let c = ExperimentConfig::from_toml(&text).unwrap();
        let sim = c.sim_config().unwrap();
        assert_eq!(sim.drift.segments[0].end, 100);
        assert_eq!(sim.drift.interpolation, Interpolation::Linear);
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = ExperimentConfig::from_toml(MINIMAL).unwrap();
        let b = ExperimentConfig::from_toml(&a.to_toml()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.hash(), b.hash());
        let mut c = a.clone();
        c.run.seed = 8;
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn published_schema_is_current() {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("docs/config.schema.json");
        if std::env::var_os("UPDATE_SCHEMA").is_some() {
            std::fs::write(&path, schema_json()).unwrap();
        }
        let on_disk = std::fs::read_to_string(path).unwrap_or_default();
        assert_eq!(on_disk, schema_json(), "rerun with UPDATE_SCHEMA=1");
    }
}
