//! Python bindings for plexsim.

use std::collections::BTreeMap;

use plexsim::scenarios::{self, presets, ChemicalScenario, Engine, OpticalScenario, SweepAxis, SweepParameter, SweepSpec};
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

create_exception!(plexsim, PlexsimError, PyValueError, "Raised by the solver; `args[1]` is the error code.");

fn to_py(err: plexsim::Error) -> PyErr {
    PlexsimError::new_err((err.to_string(), err.code()))
}

fn parse_engine(engine: &str) -> PyResult<Engine> {
    engine.parse().map_err(to_py)
}

#[pyclass(name = "EmitterSpec", module = "plexsim", from_py_object)]
#[derive(Clone)]
pub struct PyEmitterSpec {
    pub inner: plexsim::EmitterSpec,
}

#[pymethods]
impl PyEmitterSpec {
    #[new]
    #[pyo3(signature = (omega_e, gamma_e, g, label = "e"))]
    fn new(omega_e: f64, gamma_e: f64, g: f64, label: &str) -> Self {
        PyEmitterSpec { inner: plexsim::EmitterSpec::new(label, omega_e, gamma_e, g) }
    }

    #[getter]
    fn label(&self) -> String {
        self.inner.label.clone()
    }

    #[getter]
    fn omega_e(&self) -> f64 {
        self.inner.omega_e
    }

    #[getter]
    fn gamma_e(&self) -> f64 {
        self.inner.gamma_e
    }

    #[getter]
    fn g(&self) -> f64 {
        self.inner.g
    }

    fn __repr__(&self) -> String {
        let e = &self.inner;
        format!("EmitterSpec(omega_e={}, gamma_e={}, g={}, label={:?})", e.omega_e, e.gamma_e, e.g, e.label)
    }
}

/// Cavity, drive and emitters. Energies and rates in eV.
#[pyclass(name = "SystemSpec", module = "plexsim", from_py_object)]
#[derive(Clone)]
pub struct PySystemSpec {
    pub inner: plexsim::SystemSpec,
}

#[pymethods]
impl PySystemSpec {
    #[new]
    #[pyo3(signature = (omega_c, kappa, drive_omega, emitters = Vec::new(), drive_amplitude = None, n_max = 6, excitation_cap = None))]
    fn new(
        omega_c: f64,
        kappa: f64,
        drive_omega: f64,
        emitters: Vec<PyEmitterSpec>,
        drive_amplitude: Option<f64>,
        n_max: usize,
        excitation_cap: Option<usize>,
    ) -> Self {
        let mut spec = plexsim::SystemSpec::new(omega_c, kappa, drive_omega)
            .with_n_max(n_max)
            .with_excitation_cap(excitation_cap);
        if let Some(e) = drive_amplitude {
            spec.drive_amplitude = e;
        }
        spec.emitters = emitters.into_iter().map(|e| e.inner).collect();
        PySystemSpec { inner: spec }
    }

    #[getter]
    fn omega_c(&self) -> f64 {
        self.inner.omega_c
    }

    #[getter]
    fn kappa(&self) -> f64 {
        self.inner.kappa
    }

    #[getter]
    fn drive_omega(&self) -> f64 {
        self.inner.drive_omega
    }

    #[setter]
    fn set_drive_omega(&mut self, omega: f64) {
        self.inner.drive_omega = omega;
    }

    #[getter]
    fn drive_amplitude(&self) -> f64 {
        self.inner.drive_amplitude
    }

    #[setter]
    fn set_drive_amplitude(&mut self, amplitude: f64) {
        self.inner.drive_amplitude = amplitude;
    }

    #[getter]
    fn n_max(&self) -> usize {
        self.inner.n_max
    }

    #[setter]
    fn set_n_max(&mut self, n_max: usize) {
        self.inner.n_max = n_max;
    }

    #[getter]
    fn emitters(&self) -> Vec<PyEmitterSpec> {
        self.inner.emitters.iter().cloned().map(|inner| PyEmitterSpec { inner }).collect()
    }

    /// Copy of this spec with one more emitter.
    fn with_emitter(&self, emitter: PyEmitterSpec) -> Self {
        PySystemSpec { inner: self.inner.clone().with_emitter(emitter.inner) }
    }

    /// Copy of this spec driven at `omega`.
    fn at(&self, omega: f64) -> Self {
        PySystemSpec { inner: self.inner.clone().with_drive_omega(omega) }
    }

    fn full_dim(&self) -> usize {
        self.inner.full_dim()
    }

    fn __repr__(&self) -> String {
        let s = &self.inner;
        format!(
            "SystemSpec(omega_c={}, kappa={}, drive_omega={}, drive_amplitude={}, n_max={}, emitters={})",
            s.omega_c,
            s.kappa,
            s.drive_omega,
            s.drive_amplitude,
            s.n_max,
            s.emitters.len()
        )
    }
}

#[pyclass(name = "CorrelationResult", module = "plexsim", frozen, from_py_object)]
#[derive(Clone)]
pub struct PyCorrelationResult {
    #[pyo3(get)]
    drive_omega: f64,
    #[pyo3(get)]
    g2: f64,
    #[pyo3(get)]
    g3: f64,
    #[pyo3(get)]
    mean_n: f64,
    /// "PB", "UPB", "bunching" or "coherent".
    #[pyo3(get)]
    regime: &'static str,
    #[pyo3(get)]
    delta_theta: Option<f64>,
}

impl From<&plexsim::CorrelationResult> for PyCorrelationResult {
    fn from(r: &plexsim::CorrelationResult) -> Self {
        PyCorrelationResult {
            drive_omega: r.drive_omega,
            g2: r.g2,
            g3: r.g3,
            mean_n: r.mean_n,
            regime: r.regime.as_str(),
            delta_theta: r.delta_theta,
        }
    }
}

#[pymethods]
impl PyCorrelationResult {
    fn __repr__(&self) -> String {
        format!(
            "CorrelationResult(drive_omega={}, g2={}, g3={}, mean_n={}, regime={:?})",
            self.drive_omega, self.g2, self.g3, self.mean_n, self.regime
        )
    }
}

/// One row per grid point; failed points carry an error code instead of a result.
#[pyclass(name = "SweepPoint", module = "plexsim", frozen, from_py_object)]
#[derive(Clone)]
pub struct PySweepPoint {
    #[pyo3(get)]
    param1: f64,
    #[pyo3(get)]
    param2: Option<f64>,
    #[pyo3(get)]
    drive_omega: f64,
    #[pyo3(get)]
    result: Option<PyCorrelationResult>,
    #[pyo3(get)]
    error_code: Option<String>,
}

#[pyclass(name = "SweepResult", module = "plexsim", frozen)]
pub struct PySweepResult {
    #[pyo3(get)]
    axis1: String,
    #[pyo3(get)]
    axis2: Option<String>,
    #[pyo3(get)]
    engine: &'static str,
    #[pyo3(get)]
    points: Vec<PySweepPoint>,
    #[pyo3(get)]
    wall_time_s: f64,
    #[pyo3(get)]
    metadata: BTreeMap<String, String>,
}

impl From<plexsim::SweepResult> for PySweepResult {
    fn from(r: plexsim::SweepResult) -> Self {
        PySweepResult {
            axis1: r.axis1,
            axis2: r.axis2,
            engine: r.engine.as_str(),
            points: r
                .points
                .iter()
                .map(|p| PySweepPoint {
                    param1: p.param1,
                    param2: p.param2,
                    drive_omega: p.drive_omega,
                    result: p.result.as_ref().map(PyCorrelationResult::from),
                    error_code: p.error_code.clone(),
                })
                .collect(),
            wall_time_s: r.wall_time_s,
            metadata: r.metadata,
        }
    }
}

#[pymethods]
impl PySweepResult {
    fn __len__(&self) -> usize {
        self.points.len()
    }

    /// `(g2, g3)` per point, NaN where the point failed.
    fn correlations(&self) -> Vec<(f64, f64)> {
        self.points
            .iter()
            .map(|p| p.result.as_ref().map_or((f64::NAN, f64::NAN), |r| (r.g2, r.g3)))
            .collect()
    }
}

/// Master-equation steady-state g2(0), g3(0) and <n>.
#[pyfunction]
fn steady_correlations(py: Python<'_>, spec: &PySystemSpec) -> PyResult<PyCorrelationResult> {
    let spec = spec.inner.clone();
    py.detach(|| plexsim::observables::steady_correlations(&spec))
        .map(|r| PyCorrelationResult::from(&r))
        .map_err(to_py)
}

/// Correlations from `"master-equation"` or the weak-drive `"eom"` amplitudes.
#[pyfunction]
#[pyo3(signature = (spec, engine = "master-equation"))]
fn evaluate(py: Python<'_>, spec: &PySystemSpec, engine: &str) -> PyResult<PyCorrelationResult> {
    let engine = parse_engine(engine)?;
    let spec = spec.inner.clone();
    py.detach(|| scenarios::evaluate(&spec, engine))
        .map(|r| PyCorrelationResult::from(&r))
        .map_err(to_py)
}

/// Weak-drive amplitudes: returns `(g2, g3, mean_n)` for one or two emitters.
#[pyfunction]
fn eom_solve(spec: &PySystemSpec) -> PyResult<(f64, f64, f64)> {
    let s = plexsim::eom::eom_solve(&spec.inner).map_err(to_py)?;
    Ok((s.g2, s.g3, s.mean_n))
}

/// Phase difference of the two-photon pathways at drive energy `omega` (one emitter).
#[pyfunction]
fn pathway_phase(spec: &PySystemSpec, omega: f64) -> PyResult<f64> {
    plexsim::eom::pathway_phase(&spec.inner, omega).map_err(to_py)
}

/// Steady-state photon-number probabilities and their relative deviations from Poisson.
#[pyfunction]
fn photon_statistics(py: Python<'_>, spec: &PySystemSpec) -> PyResult<(Vec<f64>, Vec<f64>, f64)> {
    let spec = spec.inner.clone();
    let analysis = py.detach(|| plexsim::observables::analyze_steady_state(&spec)).map_err(to_py)?;
    let stats = analysis.statistics;
    Ok((stats.probabilities, stats.deltas, stats.mean_n))
}

/// Undriven eigenenergies keyed by excitation number.
#[pyfunction]
#[pyo3(signature = (spec, max_manifold = 3))]
fn energy_levels(spec: &PySystemSpec, max_manifold: usize) -> PyResult<BTreeMap<usize, Vec<f64>>> {
    plexsim::spectra::energy_levels(&spec.inner, max_manifold)
        .map(|d| d.manifolds)
        .map_err(to_py)
}

/// Weak-drive response kappa <n> / E^2 on a grid of drive energies.
#[pyfunction]
fn excitation_spectrum(py: Python<'_>, spec: &PySystemSpec, omegas: Vec<f64>) -> PyResult<Vec<f64>> {
    let spec = spec.inner.clone();
    py.detach(|| plexsim::spectra::excitation_spectrum(&spec, &omegas))
        .map(|s| s.response)
        .map_err(to_py)
}

/// Sweeps a spec field such as `"drive_omega"` or `"emitters[0].g"`, optionally against a second one.
#[pyfunction]
#[pyo3(signature = (spec, parameter, values, parameter2 = None, values2 = None, engine = "master-equation", threads = None))]
#[allow(clippy::too_many_arguments)]
fn sweep(
    py: Python<'_>,
    spec: &PySystemSpec,
    parameter: &str,
    values: Vec<f64>,
    parameter2: Option<&str>,
    values2: Option<Vec<f64>>,
    engine: &str,
    threads: Option<usize>,
) -> PyResult<PySweepResult> {
    let engine = parse_engine(engine)?;
    let axis1 = SweepAxis::new(parameter.parse::<SweepParameter>().map_err(to_py)?, values).map_err(to_py)?;
    let mut plan = SweepSpec::new(spec.inner.clone(), axis1);
    match (parameter2, values2) {
        (Some(p), Some(v)) => {
            plan = plan.with_axis2(SweepAxis::new(p.parse::<SweepParameter>().map_err(to_py)?, v).map_err(to_py)?)
        }
        (None, None) => {}
        _ => return Err(PyValueError::new_err("parameter2 and values2 go together")),
    }
    py.detach(|| scenarios::sweep_with_threads(&plan, engine, threads))
        .map(PySweepResult::from)
        .map_err(to_py)
}

/// Four emitters of two species; rows are species fraction by drive energy.
#[pyfunction]
#[pyo3(signature = (fractions, omegas, peak_coupling = 0.1, threads = None))]
fn chemical_scenario(
    py: Python<'_>,
    fractions: Vec<f64>,
    omegas: Vec<f64>,
    peak_coupling: f64,
    threads: Option<usize>,
) -> PyResult<PySweepResult> {
    let scenario = ChemicalScenario::default().with_peak_coupling(peak_coupling);
    py.detach(|| scenario.run(&fractions, &omegas, threads))
        .map(PySweepResult::from)
        .map_err(to_py)
}

/// Three emitters whose couplings follow the polarization angle in degrees.
#[pyfunction]
#[pyo3(signature = (alphas_deg, omega = 2.0, peak_coupling = 0.085, threads = None))]
fn optical_scenario(
    py: Python<'_>,
    alphas_deg: Vec<f64>,
    omega: f64,
    peak_coupling: f64,
    threads: Option<usize>,
) -> PyResult<PySweepResult> {
    let scenario = OpticalScenario { peak_coupling, ..OpticalScenario::default() };
    py.detach(|| scenario.run(&alphas_deg, omega, threads))
        .map(PySweepResult::from)
        .map_err(to_py)
}

/// Built-in one- and two-emitter specs: "resonant", "detuned", "two-emitter".
#[pyfunction]
fn preset(name: &str) -> PyResult<PySystemSpec> {
    let inner = match name {
        "resonant" => presets::resonant(),
        "detuned" => presets::detuned(),
        "two-emitter" => presets::two_emitter(),
        other => return Err(PyValueError::new_err(format!("unknown preset '{other}'"))),
    };
    Ok(PySystemSpec { inner })
}

#[pymodule]
#[pyo3(name = "plexsim")]
fn plexsim_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("PlexsimError", m.py().get_type::<PlexsimError>())?;
    m.add_class::<PyEmitterSpec>()?;
    m.add_class::<PySystemSpec>()?;
    m.add_class::<PyCorrelationResult>()?;
    m.add_class::<PySweepPoint>()?;
    m.add_class::<PySweepResult>()?;
    m.add_function(wrap_pyfunction!(steady_correlations, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(eom_solve, m)?)?;
    m.add_function(wrap_pyfunction!(pathway_phase, m)?)?;
    m.add_function(wrap_pyfunction!(photon_statistics, m)?)?;
    m.add_function(wrap_pyfunction!(energy_levels, m)?)?;
    m.add_function(wrap_pyfunction!(excitation_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(chemical_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(optical_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(preset, m)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn with_module(check: impl FnOnce(&Bound<'_, PyModule>)) {
        Python::initialize();
        Python::attach(|py| {
            let m = PyModule::new(py, "plexsim").unwrap();
            plexsim_module(&m).unwrap();
            check(&m);
        });
    }

    #[test]
    fn resonant_preset_solves_to_unconventional_blockade() {
        with_module(|m| {
            let spec = m.getattr("preset").unwrap().call1(("resonant",)).unwrap();
            let r = m.getattr("steady_correlations").unwrap().call1((spec,)).unwrap();
            let regime: String = r.getattr("regime").unwrap().extract().unwrap();
            let g2: f64 = r.getattr("g2").unwrap().extract().unwrap();
            assert_eq!(regime, "UPB");
            assert!(g2 < 1.0);
        });
    }

    #[test]
    fn solver_errors_raise_with_code() {
        with_module(|m| {
            let spec = m.getattr("SystemSpec").unwrap().call1((2.0, 0.35, 2.0)).unwrap();
            spec.setattr("n_max", 2usize).unwrap();
            let err = m.getattr("steady_correlations").unwrap().call1((spec,)).unwrap_err();
            let py = m.py();
            assert!(err.is_instance_of::<PlexsimError>(py));
            let code: String = err.value(py).getattr("args").unwrap().get_item(1).unwrap().extract().unwrap();
            assert_eq!(code, "invalid-truncation");
        });
    }

    #[test]
    fn unknown_engine_is_rejected() {
        with_module(|m| {
            let spec = m.getattr("preset").unwrap().call1(("resonant",)).unwrap();
            assert!(m.getattr("evaluate").unwrap().call1((spec, "runge-kutta")).is_err());
        });
    }
}
