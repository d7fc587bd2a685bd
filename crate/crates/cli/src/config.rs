//! Experiment configuration: a TOML document with one table per concern,
//! plus `key.path=value` overrides applied before deserialization.

use std::path::PathBuf;

use catforge_core::cat::CatFrame;
use catforge_core::dynamics::{AverageMode, DEFAULT_KAPPA, DEFAULT_SAMPLES};
use catforge_core::interaction::{CouplingConfig, DEFAULT_N_MAX};
use catforge_core::phase_space::GridSpec;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Conditional,
    Wigner,
    CatFit,
    Channels,
    NegativitySweep,
    Metrology,
    Loss,
    Fluctuation,
    Probability,
}

impl Scenario {
    pub const ALL: [Scenario; 9] = [
        Scenario::Conditional,
        Scenario::Wigner,
        Scenario::CatFit,
        Scenario::Channels,
        Scenario::NegativitySweep,
        Scenario::Metrology,
        Scenario::Loss,
        Scenario::Fluctuation,
        Scenario::Probability,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Conditional => "conditional",
            Scenario::Wigner => "wigner",
            Scenario::CatFit => "cat-fit",
            Scenario::Channels => "channels",
            Scenario::NegativitySweep => "negativity-sweep",
            Scenario::Metrology => "metrology",
            Scenario::Loss => "loss",
            Scenario::Fluctuation => "fluctuation",
            Scenario::Probability => "probability",
        }
    }

    pub fn from_name(name: &str) -> Option<Scenario> {
        Scenario::ALL.into_iter().find(|s| s.name() == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicsConfig {
    pub g_mag: f64,
    pub alpha_sq: f64,
    pub k: i64,
    pub n_max: usize,
    /// Electron-ladder window; adaptive when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_min: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_max: Option<i64>,
}

impl Default for PhysicsConfig {
    fn default() -> Self {
        PhysicsConfig {
            g_mag: 0.17,
            alpha_sq: 50.0,
            k: 0,
            n_max: DEFAULT_N_MAX,
            k_min: None,
            k_max: None,
        }
    }
}

impl PhysicsConfig {
    pub fn coupling(&self) -> CliResult<CouplingConfig> {
        if !(self.g_mag >= 0.0 && self.g_mag.is_finite()) {
            return Err(CliError::config(
                "physics.g_mag",
                "must be a non-negative number",
            ));
        }
        if !(self.alpha_sq >= 0.0 && self.alpha_sq.is_finite()) {
            return Err(CliError::config(
                "physics.alpha_sq",
                "must be a non-negative number",
            ));
        }
        let cfg = CouplingConfig::new(self.g_mag, self.alpha_sq).with_n_max(self.n_max);
        Ok(match (self.k_min, self.k_max) {
            (None, None) => cfg,
            (lo, hi) => {
                let (dlo, dhi) = cfg.k_range;
                cfg.with_k_range(lo.unwrap_or(dlo), hi.unwrap_or(dhi))
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepParameter {
    #[serde(rename = "g_mag")]
    GMag,
    #[serde(rename = "alpha_sq")]
    AlphaSq,
    #[serde(rename = "k")]
    K,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub parameter: SweepParameter,
    pub start: f64,
    pub stop: f64,
    /// Number of intervals; the sweep has `steps + 1` points.
    pub steps: usize,
}

impl SweepConfig {
    pub fn values(&self) -> Vec<f64> {
        (0..=self.steps)
            .map(|i| {
                if i == self.steps {
                    self.stop
                } else {
                    self.start + (self.stop - self.start) * i as f64 / self.steps as f64
                }
            })
            .collect()
    }

    /// The physics point for sweep value `v`.
    pub fn apply(&self, base: &PhysicsConfig, v: f64) -> PhysicsConfig {
        let mut p = base.clone();
        match self.parameter {
            SweepParameter::GMag => p.g_mag = v,
            SweepParameter::AlphaSq => p.alpha_sq = v,
            SweepParameter::K => p.k = v.round() as i64,
        }
        p
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub points: usize,
    pub half_width: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            points: 401,
            half_width: 6.0,
        }
    }
}

impl GridConfig {
    pub fn spec(&self) -> GridSpec {
        GridSpec::Auto {
            points: self.points,
            half_width: self.half_width,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FrameChoice {
    #[default]
    Axis,
    Centroid,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    pub frame: FrameChoice,
}

impl FitConfig {
    pub fn frame(&self) -> CatFrame {
        match self.frame {
            FrameChoice::Axis => CatFrame::Axis,
            FrameChoice::Centroid => CatFrame::Centroid,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LossConfig {
    /// Decay rate in μs⁻¹.
    pub kappa: f64,
    /// End of the time axis in μs.
    pub t_max: f64,
    pub steps: usize,
    /// Also locate the δ-extinction time.
    pub extinction: bool,
}

impl Default for LossConfig {
    fn default() -> Self {
        LossConfig {
            kappa: DEFAULT_KAPPA,
            t_max: 0.5,
            steps: 20,
            extinction: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeChoice {
    #[default]
    Metrics,
    DensityMatrix,
}

impl From<ModeChoice> for AverageMode {
    fn from(m: ModeChoice) -> Self {
        match m {
            ModeChoice::Metrics => AverageMode::Metrics,
            ModeChoice::DensityMatrix => AverageMode::DensityMatrix,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FluctuationConfig {
    pub delta_g: Vec<f64>,
    pub samples: usize,
    pub mode: ModeChoice,
}

impl Default for FluctuationConfig {
    fn default() -> Self {
        FluctuationConfig {
            delta_g: vec![0.0, 0.005, 0.01, 0.015, 0.02],
            samples: DEFAULT_SAMPLES,
            mode: ModeChoice::Metrics,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub csv: bool,
    pub svg: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: PathBuf::from("out"),
            csv: true,
            svg: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    #[serde(default)]
    pub physics: PhysicsConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub fit: FitConfig,
    #[serde(default)]
    pub loss: LossConfig,
    #[serde(default)]
    pub fluctuation: FluctuationConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

impl ExperimentConfig {
    pub fn new(scenario: Scenario) -> Self {
        ExperimentConfig {
            scenario,
            physics: PhysicsConfig::default(),
            sweep: None,
            grid: GridConfig::default(),
            fit: FitConfig::default(),
            loss: LossConfig::default(),
            fluctuation: FluctuationConfig::default(),
            output: OutputConfig::default(),
        }
    }

    /// Parses a config document, applying `key.path=value` overrides first.
    pub fn parse(text: &str, overrides: &[String]) -> CliResult<Self> {
        let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| {
            CliError::config(error_key(&e), e.message().to_string())
        })?;
        for item in overrides {
            apply_override(&mut table, item)?;
        }
        let config: ExperimentConfig = table.try_into().map_err(|e: toml::de::Error| {
            CliError::config(error_key(&e), e.message().to_string())
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn emit(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    pub fn validate(&self) -> CliResult<()> {
        self.physics.coupling()?;
        if let Some(s) = &self.sweep {
            if s.steps < 1 {
                return Err(CliError::config("sweep.steps", "must be at least 1"));
            }
            if !(s.start.is_finite() && s.stop.is_finite()) {
                return Err(CliError::config(
                    "sweep.start",
                    "sweep bounds must be finite",
                ));
            }
        }
        if self.grid.points < 2 || !(self.grid.half_width > 0.0) {
            return Err(CliError::config(
                "grid",
                "need points >= 2 and half_width > 0",
            ));
        }
        if !(self.loss.kappa > 0.0) {
            return Err(CliError::config("loss.kappa", "must be positive"));
        }
        if !(self.loss.t_max >= 0.0) || self.loss.steps < 1 {
            return Err(CliError::config("loss", "need t_max >= 0 and steps >= 1"));
        }
        if self.fluctuation.delta_g.iter().any(|d| !(*d >= 0.0)) {
            return Err(CliError::config(
                "fluctuation.delta_g",
                "spreads must be non-negative",
            ));
        }
        Ok(())
    }

    /// Every physics point of the run, in sweep order.
    pub fn points(&self) -> Vec<PhysicsConfig> {
        match &self.sweep {
            None => vec![self.physics.clone()],
            Some(s) => s
                .values()
                .into_iter()
                .map(|v| s.apply(&self.physics, v))
                .collect(),
        }
    }
}

fn error_key(e: &toml::de::Error) -> String {
    let msg = e.message();
    // serde messages quote the offending field as `name`.
    msg.split('`').nth(1).unwrap_or("config").to_string()
}

fn apply_override(table: &mut toml::Table, item: &str) -> CliResult<()> {
    let (path, raw) = item
        .split_once('=')
        .ok_or_else(|| CliError::config(item, "override must look like key.path=value"))?;
    let keys: Vec<&str> = path.trim().split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(CliError::config(path, "empty key segment"));
    }
    let value = parse_value(raw.trim());
    let (last, parents) = keys.split_last().expect("split yields at least one key");
    let mut node = table;
    for key in parents {
        let entry = node
            .entry(key.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        node = entry
            .as_table_mut()
            .ok_or_else(|| CliError::config(path, format!("`{key}` is not a table")))?;
    }
    node.insert(last.to_string(), value);
    Ok(())
}

/// A TOML literal when the text parses as one, otherwise a bare string.
fn parse_value(raw: &str) -> toml::Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_missing_sections() {
        let c = ExperimentConfig::parse("scenario = \"probability\"", &[]).unwrap();
        assert_eq!(c, ExperimentConfig::new(Scenario::Probability));
    }

    #[test]
    fn overrides_take_precedence_and_create_sections() {
        let text = "scenario = \"wigner\"\n[physics]\ng_mag = 0.3\n";
        let c = ExperimentConfig::parse(
            text,
            &[
                "physics.g_mag=0.5".into(),
                "sweep.parameter=g_mag".into(),
                "sweep.start=0".into(),
                "sweep.stop=1.0".into(),
                "sweep.steps=4".into(),
                "output.dir=results/run one".into(),
            ],
        )
        .unwrap();
        assert_eq!(c.physics.g_mag, 0.5);
        assert_eq!(
            c.sweep.as_ref().unwrap().values(),
            vec![0.0, 0.25, 0.5, 0.75, 1.0]
        );
        assert_eq!(c.output.dir, PathBuf::from("results/run one"));
    }

    #[test]
    fn errors_name_the_parameter() {
        let e = ExperimentConfig::parse("scenario = \"wigner\"\n[physics]\ng_mag = -1.0\n", &[])
            .unwrap_err();
        assert!(e.to_string().contains("physics.g_mag"), "{e}");
        assert_eq!(e.exit_code(), 1);
        let e = ExperimentConfig::parse("scenario = \"wigner\"\n[physics]\ng_mga = 1.0\n", &[])
            .unwrap_err();
        assert!(e.to_string().contains("g_mga"), "{e}");
        let e = ExperimentConfig::parse("scenario = \"nope\"", &[]).unwrap_err();
        assert!(e.to_string().contains("nope"), "{e}");
        let e = ExperimentConfig::parse("scenario = \"wigner\"", &["sweep.parameter=phase".into()])
            .unwrap_err();
        assert!(e.to_string().contains("phase"), "{e}");
    }

    #[test]
    fn k_sweeps_round_to_integers() {
        let s = SweepConfig {
            parameter: SweepParameter::K,
            start: -2.0,
            stop: 2.0,
            steps: 4,
        };
        let ks: Vec<i64> = s
            .values()
            .iter()
            .map(|v| s.apply(&PhysicsConfig::default(), *v).k)
            .collect();
        assert_eq!(ks, vec![-2, -1, 0, 1, 2]);
    }

    #[test]
    fn scenario_names_round_trip() {
        for s in Scenario::ALL {
            assert_eq!(Scenario::from_name(s.name()), Some(s));
        }
    }
}
