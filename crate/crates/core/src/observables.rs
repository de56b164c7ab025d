//! Zero-delay correlation functions, photon-number statistics and regime
//! classification of a cavity steady state.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{HilbertSpace, OperatorMatrix, SystemSpec};
use crate::lindblad::{steady_state, system_liouvillian, DensityMatrix};

/// Half-width of the band around g = 1 treated as coherent light.
pub const DEFAULT_COHERENT_EPS: f64 = 0.01;
/// Below this mean photon number normalized correlations are undefined.
pub const MIN_MEAN_PHOTONS: f64 = 1e-15;
/// Highest photon number for which relative deviations are reported.
pub const DEFAULT_DELTA_MAX: usize = 3;
/// Boltzmann constant in eV/K.
pub const BOLTZMANN_EV_PER_K: f64 = 8.617_333_262e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    /// Conventional blockade: g²(0) < 1 and g³(0) < 1.
    #[serde(rename = "PB")]
    Blockade,
    /// Unconventional blockade: g²(0) < 1 and g³(0) > 1.
    #[serde(rename = "UPB")]
    Unconventional,
    #[serde(rename = "bunching")]
    Bunching,
    #[serde(rename = "coherent")]
    Coherent,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Blockade => "PB",
            Regime::Unconventional => "UPB",
            Regime::Bunching => "bunching",
            Regime::Coherent => "coherent",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "PB" => Ok(Regime::Blockade),
            "UPB" => Ok(Regime::Unconventional),
            "bunching" => Ok(Regime::Bunching),
            "coherent" => Ok(Regime::Coherent),
            other => Err(Error::InvalidArgument(format!("unknown regime '{other}'"))),
        }
    }
}

/// Classifies a correlation pair. Coherent wins inside the `eps` band.
pub fn classify(g2: f64, g3: f64, eps: f64) -> Regime {
    if (g2 - 1.0).abs() < eps && (g3 - 1.0).abs() < eps {
        Regime::Coherent
    } else if g2 < 1.0 && g3 < 1.0 {
        Regime::Blockade
    } else if g2 < 1.0 {
        Regime::Unconventional
    } else {
        Regime::Bunching
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub drive_omega: f64,
    pub g2: f64,
    pub g3: f64,
    pub mean_n: f64,
    pub regime: Regime,
    /// Two-photon pathway phase difference, when a single-emitter analysis applies.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_theta: Option<f64>,
}

impl CorrelationResult {
    pub fn new(drive_omega: f64, g2: f64, g3: f64, mean_n: f64) -> Self {
        CorrelationResult {
            drive_omega,
            g2,
            g3,
            mean_n,
            regime: classify(g2, g3, DEFAULT_COHERENT_EPS),
            delta_theta: None,
        }
    }
}

/// `⟨a†ⁿ aⁿ⟩`
fn normally_ordered_moment(rho: &DensityMatrix, a: &OperatorMatrix, order: usize) -> Result<f64> {
    let mut power = a.clone();
    for _ in 1..order {
        power = &power * a;
    }
    let moment = &power.adjoint() * &power;
    Ok(rho.expectation(&moment)?.re)
}

/// `g⁽ⁿ⁾(0) = ⟨a†ⁿ aⁿ⟩ / ⟨a†a⟩ⁿ` evaluated directly on the density matrix.
pub fn correlation(rho: &DensityMatrix, a: &OperatorMatrix, order: usize) -> Result<f64> {
    if order == 0 {
        return Err(Error::InvalidArgument("correlation order must be at least 1".into()));
    }
    let mean = normally_ordered_moment(rho, a, 1)?;
    if !(mean > MIN_MEAN_PHOTONS) {
        return Err(Error::UndefinedCorrelation(mean));
    }
    let moment = normally_ordered_moment(rho, a, order)?;
    Ok(moment / mean.powi(order as i32))
}

pub fn mean_photon_number(rho: &DensityMatrix, a: &OperatorMatrix) -> Result<f64> {
    normally_ordered_moment(rho, a, 1)
}

/// `𝒫_m = N^m e^{−N} / m!`
pub fn poissonian(mean: f64, m: usize) -> f64 {
    let mut p = (-mean).exp();
    for k in 1..=m {
        p *= mean / k as f64;
    }
    p
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhotonStatistics {
    /// `P_m` for m = 0..=n_max.
    pub probabilities: Vec<f64>,
    pub mean_n: f64,
    /// `δP_m` for m = 0..=min(3, n_max).
    pub deltas: Vec<f64>,
}

impl PhotonStatistics {
    /// Builds statistics from a photon-number distribution.
    pub fn from_probabilities(probabilities: Vec<f64>) -> Self {
        let mean_n = probabilities.iter().enumerate().map(|(m, p)| m as f64 * p).sum();
        let mut stats = PhotonStatistics { probabilities, mean_n, deltas: Vec::new() };
        let top = DEFAULT_DELTA_MAX.min(stats.n_max());
        stats.deltas = (0..=top).map(|m| stats.relative_deviation(m)).collect();
        stats
    }

    pub fn n_max(&self) -> usize {
        self.probabilities.len().saturating_sub(1)
    }

    /// `δP_m = (P_m − 𝒫_m) / 𝒫_m` against the Poissonian of equal mean; NaN when
    /// the Poissonian weight vanishes.
    pub fn relative_deviation(&self, m: usize) -> f64 {
        let reference = poissonian(self.mean_n, m);
        let p = self.probabilities.get(m).copied().unwrap_or(0.0);
        if reference == 0.0 {
            return f64::NAN;
        }
        (p - reference) / reference
    }

    pub fn total_probability(&self) -> f64 {
        self.probabilities.iter().sum()
    }
}

/// Photon-number distribution of the cavity after tracing out the emitters.
pub fn photon_distribution(rho: &DensityMatrix, spec: &SystemSpec) -> Result<PhotonStatistics> {
    let space = HilbertSpace::new(spec)?;
    if space.dim() != rho.dim() {
        return Err(Error::DimensionMismatch { expected: space.dim(), found: rho.dim() });
    }
    let mut probabilities = vec![0.0; spec.n_max + 1];
    for (i, state) in space.states().iter().enumerate() {
        probabilities[state.photons] += rho.get(i, i).re;
    }
    Ok(PhotonStatistics::from_probabilities(probabilities))
}

/// `g⁽ⁿ⁾(0) = Σ_{m≥n} m!/(m−n)! · P_m / ⟨N⟩ⁿ` from the stored distribution.
pub fn gn_from_distribution(stats: &PhotonStatistics, n: usize) -> Result<f64> {
    if n > stats.n_max() {
        return Err(Error::TruncationOrder { order: n, n_max: stats.n_max() });
    }
    if !(stats.mean_n > MIN_MEAN_PHOTONS) {
        return Err(Error::UndefinedCorrelation(stats.mean_n));
    }
    let falling = |m: usize| ((m - n + 1)..=m).map(|k| k as f64).product::<f64>();
    let sum: f64 = stats.probabilities.iter().enumerate().skip(n).map(|(m, p)| falling(m) * p).sum();
    Ok(sum / stats.mean_n.powi(n as i32))
}

/// Bose–Einstein occupation `1 / (exp(ω / k_B T) − 1)` with ω in eV and T in K.
pub fn thermal_occupation(omega: f64, temperature: f64) -> Result<f64> {
    if !(omega > 0.0 && omega.is_finite()) || !(temperature > 0.0 && temperature.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "thermal occupation needs positive energy and temperature, got {omega} eV, {temperature} K"
        )));
    }
    Ok(1.0 / (omega / (BOLTZMANN_EV_PER_K * temperature)).exp_m1())
}

/// Master-equation steady state of a system together with its photon statistics.
#[derive(Debug, Clone)]
pub struct SteadyStateAnalysis {
    pub rho: DensityMatrix,
    pub correlations: CorrelationResult,
    pub statistics: PhotonStatistics,
}

pub fn analyze_steady_state(spec: &SystemSpec) -> Result<SteadyStateAnalysis> {
    let (l, ops) = system_liouvillian(spec)?;
    let rho = steady_state(&l)?;
    let mean_n = mean_photon_number(&rho, &ops.a)?;
    let g2 = correlation(&rho, &ops.a, 2)?;
    let g3 = correlation(&rho, &ops.a, 3)?;
    let statistics = photon_distribution(&rho, spec)?;
    Ok(SteadyStateAnalysis {
        rho,
        correlations: CorrelationResult::new(spec.drive_omega, g2, g3, mean_n),
        statistics,
    })
}

/// g²(0), g³(0) and ⟨a†a⟩ of the master-equation steady state.
pub fn steady_correlations(spec: &SystemSpec) -> Result<CorrelationResult> {
    Ok(analyze_steady_state(spec)?.correlations)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{fock_annihilation, EmitterSpec};
    use approx::assert_abs_diff_eq;

    #[test]
    fn single_fock_state() {
        let a = fock_annihilation(4).unwrap();
        let rho = DensityMatrix::basis_state(5, 1);
        assert_eq!(correlation(&rho, &a, 2).unwrap(), 0.0);
        assert_eq!(correlation(&rho, &a, 3).unwrap(), 0.0);
    }

    #[test]
    fn two_photon_fock_state() {
        let a = fock_annihilation(4).unwrap();
        let rho = DensityMatrix::basis_state(5, 2);
        assert_abs_diff_eq!(correlation(&rho, &a, 2).unwrap(), 0.5, epsilon = 1e-14);
        assert_eq!(correlation(&rho, &a, 3).unwrap(), 0.0);
    }

    #[test]
    fn vacuum_correlation_is_undefined() {
        let a = fock_annihilation(4).unwrap();
        let rho = DensityMatrix::basis_state(5, 0);
        assert_eq!(correlation(&rho, &a, 2), Err(Error::UndefinedCorrelation(0.0)));
    }

    #[test]
    fn coherent_cavity_is_poissonian() {
        let spec = SystemSpec::new(2.0, 0.35, 2.05);
        let analysis = analyze_steady_state(&spec).unwrap();
        assert_abs_diff_eq!(analysis.correlations.g2, 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(analysis.correlations.g3, 1.0, epsilon = 1e-6);
        assert_eq!(analysis.correlations.regime, Regime::Coherent);
        for d in &analysis.statistics.deltas {
            assert!(d.abs() < 1e-4, "delta {d}");
        }
    }

    #[test]
    fn distribution_without_multiphoton_weight() {
        let stats = PhotonStatistics::from_probabilities(vec![0.9, 0.1, 0.0, 0.0, 0.0]);
        assert_abs_diff_eq!(stats.mean_n, 0.1, epsilon = 1e-15);
        assert_eq!(gn_from_distribution(&stats, 2).unwrap(), 0.0);
    }

    #[test]
    fn poissonian_distribution_gives_unit_correlations() {
        for mean in [0.01, 0.3, 1.5] {
            let n_max = 40;
            let probs: Vec<f64> = (0..=n_max).map(|m| poissonian(mean, m)).collect();
            let stats = PhotonStatistics::from_probabilities(probs);
            for n in 1..=4 {
                assert_abs_diff_eq!(gn_from_distribution(&stats, n).unwrap(), 1.0, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn distribution_order_beyond_truncation() {
        let stats = PhotonStatistics::from_probabilities(vec![0.9, 0.1, 0.0]);
        assert_eq!(gn_from_distribution(&stats, 3), Err(Error::TruncationOrder { order: 3, n_max: 2 }));
    }

    #[test]
    fn distribution_traces_out_emitters() {
        let spec = SystemSpec::new(2.0, 0.35, 2.0).with_emitter(EmitterSpec::new("e1", 2.0, 0.08, 0.08));
        let analysis = analyze_steady_state(&spec).unwrap();
        let stats = &analysis.statistics;
        assert_eq!(stats.probabilities.len(), 7);
        assert_abs_diff_eq!(stats.total_probability(), 1.0, epsilon = 1e-8);
        assert!(stats.probabilities.iter().all(|p| *p >= -1e-10 && *p <= 1.0));
        let g2 = gn_from_distribution(stats, 2).unwrap();
        assert_abs_diff_eq!(g2, analysis.correlations.g2, epsilon = 1e-8);
    }

    #[test]
    fn thermal_occupation_values() {
        let room = thermal_occupation(2.0, 300.0).unwrap();
        assert!(room > 1e-34 && room < 5e-34, "{room}");
        let t = 1.0 / BOLTZMANN_EV_PER_K;
        assert_abs_diff_eq!(thermal_occupation(1.0, t).unwrap(), 1.0 / (std::f64::consts::E - 1.0), epsilon = 1e-12);
        assert_abs_diff_eq!(thermal_occupation(1.0, 1e-3).unwrap(), 0.0);
        assert!(thermal_occupation(0.0, 300.0).is_err());
        assert!(thermal_occupation(1.0, -1.0).is_err());
    }

    #[test]
    fn classification_rules() {
        assert_eq!(classify(0.5, 0.4, DEFAULT_COHERENT_EPS), Regime::Blockade);
        assert_eq!(classify(0.6, 1.8, DEFAULT_COHERENT_EPS), Regime::Unconventional);
        assert_eq!(classify(1.4, 3.0, DEFAULT_COHERENT_EPS), Regime::Bunching);
        assert_eq!(classify(1.0, 1.0, DEFAULT_COHERENT_EPS), Regime::Coherent);
        assert_eq!(classify(0.995, 1.005, DEFAULT_COHERENT_EPS), Regime::Coherent);
        assert_eq!(classify(0.995, 1.02, DEFAULT_COHERENT_EPS), Regime::Unconventional);
        for r in [Regime::Blockade, Regime::Unconventional, Regime::Bunching, Regime::Coherent] {
            assert_eq!(r.as_str().parse::<Regime>().unwrap(), r);
        }
    }
}
