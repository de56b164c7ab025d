//! Parameter sweeps and the prebuilt coupling scenarios.
//!
//! Grids are evaluated point by point in parallel and assembled in grid-major
//! order (first axis slowest). A failing point keeps its slot and carries the
//! error code instead of a result.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eom::{eom_solve, pathway_phase};
use crate::error::{Error, Result};
use crate::hilbert::{EmitterSpec, SystemSpec};
use crate::observables::{steady_correlations, CorrelationResult};

pub const DEFAULT_GRID_POINTS: usize = 81;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Engine {
    #[serde(rename = "master-equation")]
    MasterEquation,
    #[serde(rename = "eom")]
    Eom,
}

impl Engine {
    pub fn as_str(&self) -> &'static str {
        match self {
            Engine::MasterEquation => "master-equation",
            Engine::Eom => "eom",
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "master-equation" | "me" => Ok(Engine::MasterEquation),
            "eom" => Ok(Engine::Eom),
            other => Err(Error::InvalidArgument(format!("unknown engine '{other}'"))),
        }
    }
}

/// A scalar field of [`SystemSpec`] addressed by path, e.g. `emitters[1].g`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParameter {
    DriveOmega,
    CavityOmega,
    Kappa,
    DriveAmplitude,
    EmitterOmega(usize),
    EmitterGamma(usize),
    EmitterCoupling(usize),
    /// Emitter-cavity detuning `ω_e − ω_c`; sets `ω_e` relative to the current `ω_c`.
    EmitterDetuning(usize),
}

fn emitter_mut(spec: &mut SystemSpec, i: usize) -> Result<&mut EmitterSpec> {
    let sites = spec.n_emitters() + 1;
    spec.emitters.get_mut(i).ok_or(Error::SiteOutOfRange { site: i + 1, sites })
}

impl SweepParameter {
    pub fn apply(&self, spec: &mut SystemSpec, value: f64) -> Result<()> {
        match *self {
            SweepParameter::DriveOmega => spec.drive_omega = value,
            SweepParameter::CavityOmega => spec.omega_c = value,
            SweepParameter::Kappa => spec.kappa = value,
            SweepParameter::DriveAmplitude => spec.drive_amplitude = value,
            SweepParameter::EmitterOmega(i) => emitter_mut(spec, i)?.omega_e = value,
            SweepParameter::EmitterGamma(i) => emitter_mut(spec, i)?.gamma_e = value,
            SweepParameter::EmitterCoupling(i) => emitter_mut(spec, i)?.g = value,
            SweepParameter::EmitterDetuning(i) => {
                let omega_c = spec.omega_c;
                emitter_mut(spec, i)?.omega_e = omega_c + value;
            }
        }
        Ok(())
    }
}

impl fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SweepParameter::DriveOmega => f.write_str("drive_omega"),
            SweepParameter::CavityOmega => f.write_str("omega_c"),
            SweepParameter::Kappa => f.write_str("kappa"),
            SweepParameter::DriveAmplitude => f.write_str("drive_amplitude"),
            SweepParameter::EmitterOmega(i) => write!(f, "emitters[{i}].omega_e"),
            SweepParameter::EmitterGamma(i) => write!(f, "emitters[{i}].gamma_e"),
            SweepParameter::EmitterCoupling(i) => write!(f, "emitters[{i}].g"),
            SweepParameter::EmitterDetuning(i) => write!(f, "emitters[{i}].detuning"),
        }
    }
}

impl FromStr for SweepParameter {
    type Err = Error;

    fn from_str(path: &str) -> Result<Self> {
        let unknown = || Error::InvalidArgument(format!("unknown sweep parameter '{path}'"));
        match path {
            "drive_omega" | "omega" => return Ok(SweepParameter::DriveOmega),
            "omega_c" => return Ok(SweepParameter::CavityOmega),
            "kappa" => return Ok(SweepParameter::Kappa),
            "drive_amplitude" => return Ok(SweepParameter::DriveAmplitude),
            _ => {}
        }
        let rest = path.strip_prefix("emitters[").ok_or_else(unknown)?;
        let (index, field) = rest.split_once("].").ok_or_else(unknown)?;
        let i: usize = index.parse().map_err(|_| unknown())?;
        match field {
            "omega_e" => Ok(SweepParameter::EmitterOmega(i)),
            "gamma_e" => Ok(SweepParameter::EmitterGamma(i)),
            "g" => Ok(SweepParameter::EmitterCoupling(i)),
            "detuning" => Ok(SweepParameter::EmitterDetuning(i)),
            _ => Err(unknown()),
        }
    }
}

/// `n` evenly spaced values from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..n).map(|i| start + (stop - start) * i as f64 / (n - 1) as f64).collect(),
    }
}

fn check_grid(name: &str, values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::InvalidArgument(format!("axis '{name}' has an empty grid")));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(format!("axis '{name}' has non-finite values")));
    }
    let increasing = values.windows(2).all(|w| w[1] > w[0]);
    let decreasing = values.windows(2).all(|w| w[1] < w[0]);
    if !(increasing || decreasing) {
        return Err(Error::InvalidArgument(format!("axis '{name}' is not strictly monotone")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxis {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

impl SweepAxis {
    pub fn new(parameter: SweepParameter, values: Vec<f64>) -> Result<Self> {
        check_grid(&parameter.to_string(), &values)?;
        Ok(SweepAxis { parameter, values })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub base: SystemSpec,
    pub axis1: SweepAxis,
    pub axis2: Option<SweepAxis>,
}

impl SweepSpec {
    pub fn new(base: SystemSpec, axis1: SweepAxis) -> Self {
        SweepSpec { base, axis1, axis2: None }
    }

    pub fn with_axis2(mut self, axis: SweepAxis) -> Self {
        self.axis2 = Some(axis);
        self
    }

    pub fn len(&self) -> usize {
        self.axis1.values.len() * self.axis2.as_ref().map_or(1, |a| a.values.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub param1: f64,
    pub param2: Option<f64>,
    pub drive_omega: f64,
    pub result: Option<CorrelationResult>,
    pub error_code: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_message: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axis1: String,
    pub axis2: Option<String>,
    pub engine: Engine,
    pub points: Vec<SweepPoint>,
    pub wall_time_s: f64,
    pub metadata: BTreeMap<String, String>,
}

impl SweepResult {
    pub fn results(&self) -> impl Iterator<Item = Option<&CorrelationResult>> {
        self.points.iter().map(|p| p.result.as_ref())
    }

    pub fn failures(&self) -> usize {
        self.points.iter().filter(|p| p.result.is_none()).count()
    }

    /// Equality of everything except wall-time metadata.
    pub fn same_payload(&self, other: &SweepResult) -> bool {
        self.axis1 == other.axis1
            && self.axis2 == other.axis2
            && self.engine == other.engine
            && self.metadata == other.metadata
            && self.points.len() == other.points.len()
            && self.points.iter().zip(&other.points).all(|(a, b)| {
                let bits = |r: &Option<CorrelationResult>| {
                    r.as_ref().map(|r| {
                        (
                            r.g2.to_bits(),
                            r.g3.to_bits(),
                            r.mean_n.to_bits(),
                            r.delta_theta.map(f64::to_bits),
                            r.regime,
                        )
                    })
                };
                a.param1.to_bits() == b.param1.to_bits()
                    && a.param2.map(f64::to_bits) == b.param2.map(f64::to_bits)
                    && a.error_code == b.error_code
                    && bits(&a.result) == bits(&b.result)
            })
    }
}

/// Correlations of one spec with the chosen engine. Single-emitter results
/// carry the pathway phase when it is defined.
pub fn evaluate(spec: &SystemSpec, engine: Engine) -> Result<CorrelationResult> {
    let mut result = match engine {
        Engine::MasterEquation => steady_correlations(spec)?,
        Engine::Eom => {
            spec.validate_structure()?;
            let sol = eom_solve(spec)?;
            CorrelationResult::new(spec.drive_omega, sol.g2, sol.g3, sol.mean_n)
        }
    };
    if spec.n_emitters() == 1 {
        result.delta_theta = pathway_phase(spec, spec.drive_omega).ok();
    }
    Ok(result)
}

/// Runs `build` on every grid point in parallel, optionally with a bounded
/// worker count.
pub fn run_grid<F>(
    axis1: (&str, &[f64]),
    axis2: Option<(&str, &[f64])>,
    engine: Engine,
    threads: Option<usize>,
    build: F,
) -> Result<SweepResult>
where
    F: Fn(f64, Option<f64>) -> Result<SystemSpec> + Sync,
{
    check_grid(axis1.0, axis1.1)?;
    if let Some((name, values)) = axis2 {
        check_grid(name, values)?;
    }
    let coords: Vec<(f64, Option<f64>)> = match axis2 {
        Some((_, inner)) => axis1.1.iter().flat_map(|&a| inner.iter().map(move |&b| (a, Some(b)))).collect(),
        None => axis1.1.iter().map(|&a| (a, None)).collect(),
    };

    let start = Instant::now();
    let eval = |&(p1, p2): &(f64, Option<f64>)| {
        let spec = build(p1, p2);
        let drive_omega = spec.as_ref().map_or(f64::NAN, |s| s.drive_omega);
        match spec.and_then(|s| evaluate(&s, engine)) {
            Ok(r) => SweepPoint {
                param1: p1,
                param2: p2,
                drive_omega,
                result: Some(r),
                error_code: None,
                error_message: None,
            },
            Err(e) => SweepPoint {
                param1: p1,
                param2: p2,
                drive_omega,
                result: None,
                error_code: Some(e.code().to_string()),
                error_message: Some(e.to_string()),
            },
        }
    };
    let points: Vec<SweepPoint> = match threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
            pool.install(|| coords.par_iter().map(eval).collect())
        }
        None => coords.par_iter().map(eval).collect(),
    };

    Ok(SweepResult {
        axis1: axis1.0.to_string(),
        axis2: axis2.map(|(name, _)| name.to_string()),
        engine,
        points,
        wall_time_s: start.elapsed().as_secs_f64(),
        metadata: BTreeMap::new(),
    })
}

/// Evaluates the chosen engine over a one- or two-axis parameter grid.
pub fn sweep(spec: &SweepSpec, engine: Engine) -> Result<SweepResult> {
    sweep_with_threads(spec, engine, None)
}

pub fn sweep_with_threads(spec: &SweepSpec, engine: Engine, threads: Option<usize>) -> Result<SweepResult> {
    let name1 = spec.axis1.parameter.to_string();
    let name2 = spec.axis2.as_ref().map(|a| a.parameter.to_string());
    let axis2 = spec.axis2.as_ref().zip(name2.as_deref()).map(|(a, n)| (n, a.values.as_slice()));
    run_grid((&name1, &spec.axis1.values), axis2, engine, threads, |p1, p2| {
        let mut point = spec.base.clone();
        spec.axis1.parameter.apply(&mut point, p1)?;
        if let (Some(axis), Some(v)) = (&spec.axis2, p2) {
            axis.parameter.apply(&mut point, v)?;
        }
        Ok(point)
    })
}

/// Two emitter species, each at two sites, with couplings set by the species fraction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChemicalScenario {
    pub omega_c: f64,
    pub kappa: f64,
    pub omega_e1: f64,
    pub omega_e2: f64,
    pub gamma_e: f64,
    /// Coupling of a site fully occupied by one species.
    pub peak_coupling: f64,
    pub n_max: usize,
    /// Total-excitation cap of the four-emitter basis. States above it carry
    /// weight of order `⟨a†a⟩^(cap+1)` under weak drive.
    pub excitation_cap: Option<usize>,
}

impl Default for ChemicalScenario {
    fn default() -> Self {
        ChemicalScenario {
            omega_c: 2.0,
            kappa: 0.35,
            omega_e1: 2.0,
            omega_e2: 2.04,
            gamma_e: 0.06,
            peak_coupling: 0.1,
            n_max: 6,
            excitation_cap: Some(6),
        }
    }
}

impl ChemicalScenario {
    pub fn with_peak_coupling(mut self, peak: f64) -> Self {
        self.peak_coupling = peak;
        self
    }

    /// Per-site couplings `(g_e1, g_e2) = P·(√f, √(1−f))`.
    pub fn couplings(&self, fraction: f64) -> Result<(f64, f64)> {
        if !(0.0..=1.0).contains(&fraction) {
            return Err(Error::InvalidArgument(format!("species fraction must lie in [0, 1], got {fraction}")));
        }
        Ok((self.peak_coupling * fraction.sqrt(), self.peak_coupling * (1.0 - fraction).sqrt()))
    }

    /// Four-emitter spec `A1, B1, A2, B2` at the given fraction and drive.
    pub fn spec(&self, fraction: f64, omega: f64) -> Result<SystemSpec> {
        let (g1, g2) = self.couplings(fraction)?;
        Ok(SystemSpec::new(self.omega_c, self.kappa, omega)
            .with_n_max(self.n_max)
            .with_excitation_cap(self.excitation_cap)
            .with_emitter(EmitterSpec::new("A1", self.omega_e1, self.gamma_e, g1))
            .with_emitter(EmitterSpec::new("B1", self.omega_e1, self.gamma_e, g1))
            .with_emitter(EmitterSpec::new("A2", self.omega_e2, self.gamma_e, g2))
            .with_emitter(EmitterSpec::new("B2", self.omega_e2, self.gamma_e, g2)))
    }

    pub fn run(&self, fractions: &[f64], omegas: &[f64], threads: Option<usize>) -> Result<SweepResult> {
        let mut result = run_grid(
            ("fraction_e1", fractions),
            Some(("drive_omega", omegas)),
            Engine::MasterEquation,
            threads,
            |f, w| self.spec(f, w.expect("two-axis grid")),
        )?;
        result.metadata.insert("scenario".into(), "chemical".into());
        result.metadata.insert("peak_coupling_eV".into(), self.peak_coupling.to_string());
        if let Some(cap) = self.excitation_cap {
            result.metadata.insert("excitation_cap".into(), cap.to_string());
        }
        result.metadata.insert("coupling_model".into(), "per-site g_e1 = P*sqrt(f), g_e2 = P*sqrt(1-f)".into());
        result.metadata.insert(
            "collective_coupling".into(),
            "two identical sites per species couple collectively with sqrt(2)*g".into(),
        );
        result.metadata.insert(
            "collective_peak_coupling_eV".into(),
            (std::f64::consts::SQRT_2 * self.peak_coupling).to_string(),
        );
        Ok(result)
    }
}

/// Three resonant emitters whose couplings follow the drive polarization angle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpticalScenario {
    pub omega_c: f64,
    pub kappa: f64,
    pub omega_e: f64,
    pub gamma_e: f64,
    pub peak_coupling: f64,
    pub n_max: usize,
}

impl Default for OpticalScenario {
    fn default() -> Self {
        OpticalScenario { omega_c: 2.0, kappa: 0.35, omega_e: 2.0, gamma_e: 0.08, peak_coupling: 0.085, n_max: 6 }
    }
}

impl OpticalScenario {
    /// `(g_A, g_B, g_C) = P·(|cos α|, |cos(α − 60°)|, |cos(α + 60°)|)` with α in degrees.
    pub fn couplings(&self, alpha_deg: f64) -> [f64; 3] {
        let p = self.peak_coupling;
        [
            p * alpha_deg.to_radians().cos().abs(),
            p * (alpha_deg - 60.0).to_radians().cos().abs(),
            p * (alpha_deg + 60.0).to_radians().cos().abs(),
        ]
    }

    pub fn spec(&self, alpha_deg: f64, omega: f64) -> SystemSpec {
        let [ga, gb, gc] = self.couplings(alpha_deg);
        SystemSpec::new(self.omega_c, self.kappa, omega)
            .with_n_max(self.n_max)
            .with_emitter(EmitterSpec::new("A", self.omega_e, self.gamma_e, ga))
            .with_emitter(EmitterSpec::new("B", self.omega_e, self.gamma_e, gb))
            .with_emitter(EmitterSpec::new("C", self.omega_e, self.gamma_e, gc))
    }

    pub fn run(&self, alphas: &[f64], omega: f64, threads: Option<usize>) -> Result<SweepResult> {
        let mut result = run_grid(("alpha_deg", alphas), None, Engine::MasterEquation, threads, |a, _| {
            Ok(self.spec(a, omega))
        })?;
        result.metadata.insert("scenario".into(), "optical".into());
        result.metadata.insert("peak_coupling_eV".into(), self.peak_coupling.to_string());
        result.metadata.insert("drive_omega_eV".into(), omega.to_string());
        Ok(result)
    }
}

/// Decay rate of the added emitter in [`second_emitter_map`].
pub const SECOND_EMITTER_GAMMA: f64 = 0.06;

/// Adds a second emitter at detuning `Δ_e2,c` from the cavity with coupling `g_e2`.
pub fn with_second_emitter(base: &SystemSpec, detuning: f64, coupling: f64) -> SystemSpec {
    base.clone()
        .with_emitter(EmitterSpec::new("e2", base.omega_c + detuning, SECOND_EMITTER_GAMMA, coupling))
}

/// Two-axis map over second-emitter detuning and drive energy.
pub fn second_emitter_map(
    base: &SystemSpec,
    detunings: &[f64],
    omegas: &[f64],
    coupling: f64,
    engine: Engine,
    threads: Option<usize>,
) -> Result<SweepResult> {
    if base.n_emitters() != 1 {
        return Err(Error::InvalidArgument(format!(
            "second-emitter map starts from a one-emitter spec, got {}",
            base.n_emitters()
        )));
    }
    let mut result = run_grid(
        ("emitters[1].detuning", detunings),
        Some(("drive_omega", omegas)),
        engine,
        threads,
        |d, w| Ok(with_second_emitter(base, d, coupling).with_drive_omega(w.expect("two-axis grid"))),
    )?;
    result.metadata.insert("scenario".into(), "second-emitter".into());
    result.metadata.insert("g_e2_eV".into(), coupling.to_string());
    Ok(result)
}

/// Ready-made parameter sets.
pub mod presets {
    use super::*;

    /// Resonant cavity and emitter (unconventional blockade at 2 eV).
    pub fn resonant() -> SystemSpec {
        SystemSpec::new(2.0, 0.35, 2.0).with_emitter(EmitterSpec::new("e1", 2.0, 0.08, 0.08))
    }

    /// Emitter red-detuned by 205 meV (conventional blockade near 1.82 eV).
    pub fn detuned() -> SystemSpec {
        SystemSpec::new(2.0, 0.35, 1.82).with_emitter(EmitterSpec::new("e1", 1.795, 0.08, 0.08))
    }

    /// Resonant system plus a second emitter 40 meV above the cavity.
    pub fn two_emitter() -> SystemSpec {
        with_second_emitter(&resonant(), 0.04, 0.08)
    }

    /// Emitter detuning against drive energy for the resonant system.
    pub fn detuning_map(points: usize) -> Result<SweepSpec> {
        Ok(SweepSpec::new(
            resonant(),
            SweepAxis::new(SweepParameter::EmitterDetuning(0), linspace(-0.4, 0.4, points))?,
        )
        .with_axis2(SweepAxis::new(SweepParameter::DriveOmega, linspace(1.5, 2.5, points))?))
    }

    pub fn chemical() -> ChemicalScenario {
        ChemicalScenario::default()
    }

    pub fn optical() -> OpticalScenario {
        OpticalScenario::default()
    }
}
