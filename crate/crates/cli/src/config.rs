//! JSON run configuration. Every energy is a string with an explicit unit.

use std::fmt;
use std::str::FromStr;

use plexsim::scenarios::{linspace, ChemicalScenario, Engine, OpticalScenario, SweepAxis, SweepParameter, SweepSpec};
use plexsim::{EmitterSpec, SystemSpec};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::CliError;

/// An energy normalized to eV, written as `"2 eV"` or `"350 meV"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Energy(pub f64);

impl Energy {
    pub fn ev(self) -> f64 {
        self.0
    }
}

impl FromStr for Energy {
    type Err = String;

    fn from_str(text: &str) -> Result<Self, String> {
        let text = text.trim();
        let (number, per_ev) = if let Some(n) = text.strip_suffix("meV") {
            (n, 1e3)
        } else if let Some(n) = text.strip_suffix("eV") {
            (n, 1.0)
        } else if text.ends_with(|c: char| c.is_ascii_alphabetic()) {
            return Err(format!("unknown energy unit in '{text}'; use eV or meV"));
        } else {
            return Err(format!("energy '{text}' has no unit; write e.g. \"2 eV\" or \"350 meV\""));
        };
        let number = number.trim_end();
        if number.ends_with(|c: char| c.is_ascii_alphabetic()) {
            return Err(format!("unknown energy unit in '{text}'; use eV or meV"));
        }
        let value: f64 = number.parse().map_err(|_| format!("energy '{text}' does not start with a number"))?;
        if !value.is_finite() {
            return Err(format!("energy '{text}' is not finite"));
        }
        Ok(Energy(value / per_ev))
    }
}

impl fmt::Display for Energy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} eV", self.0)
    }
}

impl Serialize for Energy {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Energy {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct EnergyVisitor;

        impl Visitor<'_> for EnergyVisitor {
            type Value = Energy;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an energy string with unit, e.g. \"2 eV\" or \"350 meV\"")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Energy, E> {
                v.parse().map_err(E::custom)
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Energy, E> {
                Err(E::custom(format!("energy {v} has no unit; write \"{v} eV\" or \"{v} meV\"")))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Energy, E> {
                self.visit_f64(v as f64)
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Energy, E> {
                self.visit_f64(v as f64)
            }
        }

        deserializer.deserialize_any(EnergyVisitor)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmitterConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub omega_e: Energy,
    pub gamma_e: Energy,
    pub g: Energy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub omega_c: Energy,
    pub kappa: Energy,
    /// Defaults to `omega_c`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drive_omega: Option<Energy>,
    /// Defaults to `kappa / 50`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drive_amplitude: Option<Energy>,
    #[serde(default)]
    pub emitters: Vec<EmitterConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub excitation_cap: Option<usize>,
}

impl SystemConfig {
    pub fn spec(&self) -> SystemSpec {
        let mut spec = SystemSpec::new(
            self.omega_c.ev(),
            self.kappa.ev(),
            self.drive_omega.unwrap_or(self.omega_c).ev(),
        )
        .with_excitation_cap(self.excitation_cap);
        if let Some(e) = self.drive_amplitude {
            spec.drive_amplitude = e.ev();
        }
        if let Some(n) = self.n_max {
            spec.n_max = n;
        }
        for (i, e) in self.emitters.iter().enumerate() {
            let label = e.label.clone().unwrap_or_else(|| format!("e{}", i + 1));
            spec.emitters.push(EmitterSpec::new(label, e.omega_e.ev(), e.gamma_e.ev(), e.g.ev()));
        }
        spec
    }
}

/// Either explicit `values` or an inclusive `start`/`stop`/`points` range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(deserialize = "T: Deserialize<'de>"))]
pub struct GridConfig<T> {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<T>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
}

impl<T: Copy> GridConfig<T> {
    pub fn resolve(&self, field: &str, to_f64: impl Fn(T) -> f64) -> Result<Vec<f64>, CliError> {
        match (&self.values, self.start, self.stop, self.points) {
            (Some(values), None, None, None) => Ok(values.iter().map(|&v| to_f64(v)).collect()),
            (None, Some(a), Some(b), Some(n)) => Ok(linspace(to_f64(a), to_f64(b), n)),
            _ => Err(CliError::Config(format!(
                "{field}: give either `values` or all of `start`, `stop`, `points`"
            ))),
        }
    }
}

impl GridConfig<Energy> {
    pub fn energies(&self, field: &str) -> Result<Vec<f64>, CliError> {
        self.resolve(field, Energy::ev)
    }
}

impl GridConfig<f64> {
    pub fn numbers(&self, field: &str) -> Result<Vec<f64>, CliError> {
        self.resolve(field, |v| v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisConfig {
    /// Parameter path such as `drive_omega` or `emitters[0].g`.
    pub parameter: String,
    pub grid: GridConfig<Energy>,
}

impl AxisConfig {
    pub fn axis(&self, field: &str) -> Result<SweepAxis, CliError> {
        let parameter: SweepParameter =
            self.parameter.parse().map_err(|e: plexsim::Error| CliError::Config(format!("{field}.parameter: {e}")))?;
        let values = self.grid.energies(&format!("{field}.grid"))?;
        SweepAxis::new(parameter, values).map_err(|e| CliError::Config(format!("{field}.grid: {e}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub axis1: AxisConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis2: Option<AxisConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelsConfig {
    pub max_manifold: usize,
}

/// Species fraction `f` against drive energy. Species energies and decay come
/// from the first two entries of `system.emitters` when present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChemicalConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub peak_coupling: Option<Energy>,
    pub fractions: GridConfig<f64>,
    pub omegas: GridConfig<Energy>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub excitation_cap: Option<usize>,
}

/// Polarization angle in degrees at fixed drive. The three emitters share the
/// energy and decay of `system.emitters[0]` when present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpticalConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub peak_coupling: Option<Energy>,
    pub angles_deg: GridConfig<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<Energy>,
}

/// Second emitter detuning against drive energy, added to a one-emitter system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SecondEmitterConfig {
    pub coupling: Energy,
    pub detunings: GridConfig<Energy>,
    pub omegas: GridConfig<Energy>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chemical: Option<ChemicalConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optical: Option<OpticalConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub second_emitter: Option<SecondEmitterConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    #[serde(default)]
    pub plot: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub engine: Option<Engine>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<GridConfig<Energy>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<LevelsConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<ScenarioConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputConfig>,
}

/// Parses and validates a JSON configuration. Errors name the offending field path.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let config: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        CliError::Config(if path == "." { e.inner().to_string() } else { format!("{path}: {}", e.inner()) })
    })?;
    config.system.spec().validate_structure().map_err(|e| CliError::Config(format!("system: {e}")))?;
    Ok(config)
}

pub fn to_json(config: &RunConfig) -> String {
    serde_json::to_string_pretty(config).expect("config serializes")
}

impl RunConfig {
    pub fn spec(&self) -> SystemSpec {
        self.system.spec()
    }

    pub fn sweep_spec(&self) -> Result<SweepSpec, CliError> {
        let sweep = self.sweep.as_ref().ok_or_else(|| CliError::Config("missing field `sweep`".into()))?;
        let mut spec = SweepSpec::new(self.spec(), sweep.axis1.axis("sweep.axis1")?);
        if let Some(axis2) = &sweep.axis2 {
            spec = spec.with_axis2(axis2.axis("sweep.axis2")?);
        }
        Ok(spec)
    }

    pub fn chemical(&self) -> Result<(ChemicalScenario, Vec<f64>, Vec<f64>), CliError> {
        let block = self
            .scenario
            .as_ref()
            .and_then(|s| s.chemical.as_ref())
            .ok_or_else(|| CliError::Config("missing field `scenario.chemical`".into()))?;
        let mut scenario = ChemicalScenario {
            omega_c: self.system.omega_c.ev(),
            kappa: self.system.kappa.ev(),
            ..ChemicalScenario::default()
        };
        if let Some(n) = self.system.n_max {
            scenario.n_max = n;
        }
        if let Some(e1) = self.system.emitters.first() {
            scenario.omega_e1 = e1.omega_e.ev();
            scenario.gamma_e = e1.gamma_e.ev();
        }
        if let Some(e2) = self.system.emitters.get(1) {
            scenario.omega_e2 = e2.omega_e.ev();
        }
        if let Some(p) = block.peak_coupling {
            scenario.peak_coupling = p.ev();
        }
        if block.excitation_cap.is_some() {
            scenario.excitation_cap = block.excitation_cap;
        }
        let fractions = block.fractions.numbers("scenario.chemical.fractions")?;
        let omegas = block.omegas.energies("scenario.chemical.omegas")?;
        Ok((scenario, fractions, omegas))
    }

    pub fn optical(&self) -> Result<(OpticalScenario, Vec<f64>, f64), CliError> {
        let block = self
            .scenario
            .as_ref()
            .and_then(|s| s.optical.as_ref())
            .ok_or_else(|| CliError::Config("missing field `scenario.optical`".into()))?;
        let mut scenario = OpticalScenario {
            omega_c: self.system.omega_c.ev(),
            kappa: self.system.kappa.ev(),
            ..OpticalScenario::default()
        };
        if let Some(n) = self.system.n_max {
            scenario.n_max = n;
        }
        if let Some(e) = self.system.emitters.first() {
            scenario.omega_e = e.omega_e.ev();
            scenario.gamma_e = e.gamma_e.ev();
        }
        if let Some(p) = block.peak_coupling {
            scenario.peak_coupling = p.ev();
        }
        let alphas = block.angles_deg.numbers("scenario.optical.angles_deg")?;
        let omega = block.omega.or(self.system.drive_omega).unwrap_or(self.system.omega_c).ev();
        Ok((scenario, alphas, omega))
    }

    pub fn second_emitter(&self) -> Result<(SecondEmitterConfig, Vec<f64>, Vec<f64>), CliError> {
        let block = self
            .scenario
            .as_ref()
            .and_then(|s| s.second_emitter.clone())
            .ok_or_else(|| CliError::Config("missing field `scenario.second_emitter`".into()))?;
        let detunings = block.detunings.energies("scenario.second_emitter.detunings")?;
        let omegas = block.omegas.energies("scenario.second_emitter.omegas")?;
        Ok((block, detunings, omegas))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn energies_need_units() {
        assert_eq!("350 meV".parse::<Energy>().unwrap().ev(), 0.35);
        assert_eq!("2eV".parse::<Energy>().unwrap().ev(), 2.0);
        assert_eq!("-40 meV".parse::<Energy>().unwrap().ev(), -0.04);
        assert_eq!("1.5e-1 eV".parse::<Energy>().unwrap().ev(), 0.15);
        assert!("2".parse::<Energy>().is_err());
        assert!("2 keV".parse::<Energy>().is_err());
        assert!("2 J".parse::<Energy>().is_err());
        assert!("eV".parse::<Energy>().is_err());
    }

    #[test]
    fn energy_display_round_trips() {
        for v in [0.35, 2.0, 1.795, 1e-12, -0.04] {
            let e = Energy(v);
            assert_eq!(e.to_string().parse::<Energy>().unwrap(), e);
        }
    }

    #[test]
    fn grid_needs_one_form() {
        let g: GridConfig<f64> = GridConfig { values: Some(vec![1.0]), start: Some(0.0), stop: None, points: None };
        assert!(g.numbers("x").is_err());
        let g: GridConfig<f64> = GridConfig { values: None, start: Some(0.0), stop: Some(1.0), points: Some(3) };
        assert_eq!(g.numbers("x").unwrap(), vec![0.0, 0.5, 1.0]);
    }
}
