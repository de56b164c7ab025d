//! Energy-level diagrams and weak-drive excitation spectra.

use std::collections::BTreeMap;

use faer::Side;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{SystemOperators, SystemSpec, DEFAULT_DRIVE_FRACTION};
use crate::observables::steady_correlations;

pub const DEFAULT_MAX_MANIFOLD: usize = 3;

/// Note attached to every excitation spectrum.
pub const SPECTRUM_NORMALIZATION: &str =
    "S(omega) = kappa * <a^dag a>_ss / E_l^2 (steady-state cavity excitation spectrum, 1/eV)";

/// Undriven lab-frame eigenvalues grouped by total excitation number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelDiagram {
    pub manifolds: BTreeMap<usize, Vec<f64>>,
}

impl LevelDiagram {
    pub fn manifold(&self, excitations: usize) -> Option<&[f64]> {
        self.manifolds.get(&excitations).map(Vec::as_slice)
    }

    /// Smallest spacing between adjacent levels of a manifold, with the index
    /// of the lower level.
    pub fn min_gap(&self, excitations: usize) -> Option<(usize, f64)> {
        self.manifold(excitations)?
            .windows(2)
            .map(|w| w[1] - w[0])
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }
}

/// Eigenvalues of `H(E_l = 0)` in the lab frame, block by block in `N_exc`.
pub fn energy_levels(spec: &SystemSpec, max_manifold: usize) -> Result<LevelDiagram> {
    if max_manifold > spec.n_max {
        return Err(Error::TruncationOrder { order: max_manifold, n_max: spec.n_max });
    }
    if let Some(cap) = spec.excitation_cap {
        if max_manifold > cap {
            return Err(Error::TruncationOrder { order: max_manifold, n_max: cap });
        }
    }
    let lab = spec.clone().with_drive_omega(0.0).with_drive_amplitude(0.0);
    let ops = SystemOperators::new(&lab)?;
    let h = ops.hamiltonian(&lab)?;

    let mut manifolds = BTreeMap::new();
    for k in 0..=max_manifold {
        let block = h.submatrix(&ops.space.manifold_indices(k));
        let mut levels = block
            .as_mat()
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| Error::InvalidArgument(format!("eigen-decomposition failed: {e:?}")))?;
        levels.sort_by(f64::total_cmp);
        manifolds.insert(k, levels);
    }
    Ok(LevelDiagram { manifolds })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub omegas: Vec<f64>,
    pub response: Vec<f64>,
    pub normalization: String,
}

impl SpectrumResult {
    /// Interior local maxima as `(omega, response)`, in grid order.
    pub fn peaks(&self) -> Vec<(f64, f64)> {
        self.response
            .windows(3)
            .enumerate()
            .filter(|(_, w)| w[1] > w[0] && w[1] >= w[2])
            .map(|(i, w)| (self.omegas[i + 1], w[1]))
            .collect()
    }
}

/// Steady-state cavity response `κ⟨a†a⟩/E_l²` at each drive energy of `omega_grid`.
pub fn excitation_spectrum(spec: &SystemSpec, omega_grid: &[f64]) -> Result<SpectrumResult> {
    let limit = spec.kappa * DEFAULT_DRIVE_FRACTION;
    if !(spec.drive_amplitude > 0.0) || spec.drive_amplitude > limit * (1.0 + 1e-12) {
        return Err(Error::InvalidSpec(format!(
            "excitation spectrum needs 0 < E_l <= kappa/50 = {limit}, got {}",
            spec.drive_amplitude
        )));
    }
    let scale = spec.kappa / (spec.drive_amplitude * spec.drive_amplitude);
    let response = omega_grid
        .par_iter()
        .map(|&omega| {
            let point = spec.clone().with_drive_omega(omega);
            steady_correlations(&point).map(|c| scale * c.mean_n)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectrumResult {
        omegas: omega_grid.to_vec(),
        response,
        normalization: SPECTRUM_NORMALIZATION.to_string(),
    })
}
