//! Truncated Hilbert spaces, operators and rotating-frame Hamiltonians for a
//! single cavity mode coupled to N two-level emitters.
//!
//! Basis ordering is fixed for the whole crate: the cavity Fock index varies
//! slowest, followed by emitters in specification order (cavity ⊗ e₁ ⊗ … ⊗ e_N).
//! Each emitter uses `|g⟩ = 0`, `|e⟩ = 1`. Energies, rates and amplitudes are in
//! eV with ħ = 1.

use std::ops::{Add, Mul, Sub};

use faer::{c64, Mat};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_N_MAX: usize = 6;
/// Smallest truncation accepted for correlation work (third order needs headroom).
pub const MIN_PHYSICAL_N_MAX: usize = 4;
/// Default drive amplitude as a fraction of the cavity decay rate.
pub const DEFAULT_DRIVE_FRACTION: f64 = 1.0 / 50.0;
/// Drives at or below `kappa * WEAK_DRIVE_FRACTION` count as weak.
pub const WEAK_DRIVE_FRACTION: f64 = 1.0 / 20.0;
/// Maximum deviation from Hermiticity tolerated for operators flagged Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;

const MAX_EMITTERS: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmitterSpec {
    pub label: String,
    /// Transition energy.
    pub omega_e: f64,
    /// Population decay rate.
    pub gamma_e: f64,
    /// Coupling rate to the cavity mode.
    pub g: f64,
}

impl EmitterSpec {
    pub fn new(label: impl Into<String>, omega_e: f64, gamma_e: f64, g: f64) -> Self {
        EmitterSpec { label: label.into(), omega_e, gamma_e, g }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_e.is_finite() && self.omega_e > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "emitter '{}': omega_e must be positive, got {}",
                self.label, self.omega_e
            )));
        }
        if !(self.gamma_e.is_finite() && self.gamma_e >= 0.0) {
            return Err(Error::InvalidSpec(format!(
                "emitter '{}': gamma_e must be non-negative, got {}",
                self.label, self.gamma_e
            )));
        }
        if !(self.g.is_finite() && self.g >= 0.0) {
            return Err(Error::InvalidSpec(format!(
                "emitter '{}': g must be non-negative, got {}",
                self.label, self.g
            )));
        }
        Ok(())
    }
}

/// Full physical description of a driven cavity with attached emitters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    pub omega_c: f64,
    pub kappa: f64,
    /// Coherent drive amplitude E_l.
    pub drive_amplitude: f64,
    /// Laser energy ω; detunings are taken relative to it.
    pub drive_omega: f64,
    pub emitters: Vec<EmitterSpec>,
    /// Cavity Fock-space truncation (highest photon number kept).
    pub n_max: usize,
    /// Optional cap on the total excitation number of retained basis states.
    #[serde(default)]
    pub excitation_cap: Option<usize>,
}

impl SystemSpec {
    /// Bare cavity with the default weak drive `E_l = kappa / 50` and `n_max = 6`.
    pub fn new(omega_c: f64, kappa: f64, drive_omega: f64) -> Self {
        SystemSpec {
            omega_c,
            kappa,
            drive_amplitude: kappa * DEFAULT_DRIVE_FRACTION,
            drive_omega,
            emitters: Vec::new(),
            n_max: DEFAULT_N_MAX,
            excitation_cap: None,
        }
    }

    pub fn with_emitter(mut self, emitter: EmitterSpec) -> Self {
        self.emitters.push(emitter);
        self
    }

    pub fn with_drive_amplitude(mut self, amplitude: f64) -> Self {
        self.drive_amplitude = amplitude;
        self
    }

    pub fn with_drive_omega(mut self, omega: f64) -> Self {
        self.drive_omega = omega;
        self
    }

    pub fn with_n_max(mut self, n_max: usize) -> Self {
        self.n_max = n_max;
        self
    }

    pub fn with_excitation_cap(mut self, cap: Option<usize>) -> Self {
        self.excitation_cap = cap;
        self
    }

    pub fn n_emitters(&self) -> usize {
        self.emitters.len()
    }

    /// Δ_c = ω_c − ω
    pub fn cavity_detuning(&self) -> f64 {
        self.omega_c - self.drive_omega
    }

    /// Δ_ej = ω_ej − ω
    pub fn emitter_detuning(&self, j: usize) -> f64 {
        self.emitters[j].omega_e - self.drive_omega
    }

    /// Dimension of the untruncated tensor-product space, (n_max+1)·2^N.
    pub fn full_dim(&self) -> usize {
        (self.n_max + 1) << self.emitters.len()
    }

    pub fn is_weak_drive(&self) -> bool {
        self.drive_amplitude <= self.kappa * WEAK_DRIVE_FRACTION
    }

    /// Local dimension of a site: cavity is site 0, emitters follow.
    pub fn site_dim(&self, site: usize) -> Result<usize> {
        let sites = self.emitters.len() + 1;
        match site {
            0 => Ok(self.n_max + 1),
            s if s < sites => Ok(2),
            s => Err(Error::SiteOutOfRange { site: s, sites }),
        }
    }

    /// Checks the structural invariants needed to build operators.
    pub fn validate_structure(&self) -> Result<()> {
        if self.n_max < 1 {
            return Err(Error::InvalidTruncation(self.n_max));
        }
        if self.emitters.len() > MAX_EMITTERS {
            return Err(Error::InvalidSpec(format!(
                "at most {MAX_EMITTERS} emitters supported, got {}",
                self.emitters.len()
            )));
        }
        let finite = [self.omega_c, self.kappa, self.drive_amplitude, self.drive_omega];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSpec("non-finite cavity or drive parameter".into()));
        }
        if self.kappa < 0.0 {
            return Err(Error::InvalidSpec(format!("kappa must be non-negative, got {}", self.kappa)));
        }
        if self.drive_amplitude < 0.0 {
            return Err(Error::InvalidSpec(format!(
                "drive amplitude must be non-negative, got {}",
                self.drive_amplitude
            )));
        }
        if let Some(cap) = self.excitation_cap {
            if cap < 3 {
                return Err(Error::InvalidSpec(format!("excitation cap must be at least 3, got {cap}")));
            }
        }
        self.emitters.iter().try_for_each(EmitterSpec::validate)
    }

    /// Full validation for steady-state correlation work (`n_max >= 4`).
    pub fn validate(&self) -> Result<()> {
        self.validate_structure()?;
        if self.n_max < MIN_PHYSICAL_N_MAX {
            return Err(Error::InvalidTruncation(self.n_max));
        }
        Ok(())
    }
}

/// Complex square matrix acting on a (possibly truncated) Hilbert space.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    entries: Mat<c64>,
    hermitian_hint: bool,
}

impl OperatorMatrix {
    pub fn zeros(dim: usize) -> Self {
        OperatorMatrix { entries: Mat::zeros(dim, dim), hermitian_hint: true }
    }

    pub fn identity(dim: usize) -> Self {
        OperatorMatrix { entries: Mat::identity(dim, dim), hermitian_hint: true }
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> c64) -> Self {
        OperatorMatrix { entries: Mat::from_fn(dim, dim, f), hermitian_hint: false }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let mut op = OperatorMatrix::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            op.entries[(i, i)] = c64::new(d, 0.0);
        }
        op
    }

    /// Wraps a square matrix. Panics if it is not square.
    pub fn from_mat(entries: Mat<c64>) -> Self {
        assert_eq!(entries.nrows(), entries.ncols(), "operator matrix must be square");
        OperatorMatrix { entries, hermitian_hint: false }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> c64 {
        self.entries[(row, col)]
    }

    pub fn as_mat(&self) -> &Mat<c64> {
        &self.entries
    }

    pub fn into_mat(self) -> Mat<c64> {
        self.entries
    }

    pub fn hermitian_hint(&self) -> bool {
        self.hermitian_hint
    }

    /// Marks the operator Hermitian after checking it within [`HERMITIAN_TOL`].
    pub fn into_hermitian(mut self) -> Result<Self> {
        let err = self.hermiticity_error();
        if err >= HERMITIAN_TOL {
            return Err(Error::InvalidArgument(format!(
                "operator is not Hermitian (max |M - M†| = {err:.3e})"
            )));
        }
        self.hermitian_hint = true;
        Ok(self)
    }

    pub fn adjoint(&self) -> Self {
        OperatorMatrix {
            entries: self.entries.adjoint().to_owned(),
            hermitian_hint: self.hermitian_hint,
        }
    }

    pub fn scale(&self, factor: f64) -> Self {
        OperatorMatrix {
            entries: Mat::from_fn(self.dim(), self.dim(), |i, j| self.entries[(i, j)] * factor),
            hermitian_hint: self.hermitian_hint,
        }
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &OperatorMatrix) -> Self {
        let (m, n) = (self.dim(), other.dim());
        let entries = Mat::from_fn(m * n, m * n, |r, c| {
            self.entries[(r / n, c / n)] * other.entries[(r % n, c % n)]
        });
        OperatorMatrix { entries, hermitian_hint: self.hermitian_hint && other.hermitian_hint }
    }

    /// `[self, other] = self·other − other·self`
    pub fn commutator(&self, other: &OperatorMatrix) -> Self {
        let mut c = &(self * other) - &(other * self);
        c.hermitian_hint = false;
        c
    }

    pub fn max_abs(&self) -> f64 {
        let n = self.dim();
        let mut max = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                max = max.max(self.entries[(i, j)].norm());
            }
        }
        max
    }

    /// max |M − M†| over all elements.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim();
        let mut max = 0.0f64;
        for j in 0..n {
            for i in 0..=j {
                max = max.max((self.entries[(i, j)] - self.entries[(j, i)].conj()).norm());
            }
        }
        max
    }

    pub fn diagonal(&self) -> Vec<c64> {
        (0..self.dim()).map(|i| self.entries[(i, i)]).collect()
    }

    pub fn trace(&self) -> c64 {
        self.diagonal().into_iter().sum()
    }

    /// Non-zero entries as `(row, col, value)` in column-major order.
    pub fn nonzeros(&self) -> Vec<(usize, usize, c64)> {
        let n = self.dim();
        let mut out = Vec::new();
        for j in 0..n {
            for i in 0..n {
                let v = self.entries[(i, j)];
                if v.re != 0.0 || v.im != 0.0 {
                    out.push((i, j, v));
                }
            }
        }
        out
    }

    /// Principal submatrix on the given indices.
    pub fn submatrix(&self, indices: &[usize]) -> Self {
        let k = indices.len();
        OperatorMatrix {
            entries: Mat::from_fn(k, k, |i, j| self.entries[(indices[i], indices[j])]),
            hermitian_hint: self.hermitian_hint,
        }
    }
}

impl<'a> Mul<&'a OperatorMatrix> for &'a OperatorMatrix {
    type Output = OperatorMatrix;

    fn mul(self, rhs: &'a OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix { entries: &self.entries * &rhs.entries, hermitian_hint: false }
    }
}

impl<'a> Add<&'a OperatorMatrix> for &'a OperatorMatrix {
    type Output = OperatorMatrix;

    fn add(self, rhs: &'a OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix {
            entries: &self.entries + &rhs.entries,
            hermitian_hint: self.hermitian_hint && rhs.hermitian_hint,
        }
    }
}

impl<'a> Sub<&'a OperatorMatrix> for &'a OperatorMatrix {
    type Output = OperatorMatrix;

    fn sub(self, rhs: &'a OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix {
            entries: &self.entries - &rhs.entries,
            hermitian_hint: self.hermitian_hint && rhs.hermitian_hint,
        }
    }
}

/// Truncated bosonic annihilation operator with `M[n-1, n] = √n`.
///
/// The truncated creation operator is its adjoint, so `[a, a†] = 1` holds on
/// every Fock state except `|n_max⟩`.
pub fn fock_annihilation(n_max: usize) -> Result<OperatorMatrix> {
    if n_max < 1 {
        return Err(Error::InvalidTruncation(n_max));
    }
    let mut op = OperatorMatrix::zeros(n_max + 1);
    for n in 1..=n_max {
        op.entries[(n - 1, n)] = c64::new((n as f64).sqrt(), 0.0);
    }
    op.hermitian_hint = false;
    Ok(op)
}

/// Two-level lowering operator `|g⟩⟨e|` in the `(g, e)` basis.
pub fn sigma_minus() -> OperatorMatrix {
    let mut op = OperatorMatrix::zeros(2);
    op.entries[(0, 1)] = c64::new(1.0, 0.0);
    op.hermitian_hint = false;
    op
}

/// Lifts a single-site operator into the full tensor-product space.
///
/// Site 0 is the cavity, sites `1..=N` are the emitters in spec order.
pub fn embed(local_op: &OperatorMatrix, site_index: usize, spec: &SystemSpec) -> Result<OperatorMatrix> {
    spec.validate_structure()?;
    let local_dim = spec.site_dim(site_index)?;
    if local_op.dim() != local_dim {
        return Err(Error::DimensionMismatch { expected: local_dim, found: local_op.dim() });
    }
    let sites = spec.n_emitters() + 1;
    let mut out: Option<OperatorMatrix> = None;
    for site in 0..sites {
        let factor = if site == site_index {
            local_op.clone()
        } else {
            OperatorMatrix::identity(spec.site_dim(site)?)
        };
        out = Some(match out {
            None => factor,
            Some(acc) => acc.kron(&factor),
        });
    }
    Ok(out.expect("at least the cavity site exists"))
}

/// One product-basis state: cavity photon number plus emitter excitations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BasisState {
    pub photons: usize,
    /// Bit `N-1-j` is set when emitter `j` is excited.
    pub excited: u32,
}

impl BasisState {
    pub fn excitations(&self) -> usize {
        self.photons + self.excited.count_ones() as usize
    }
}

/// The retained product basis, optionally restricted by an excitation cap.
#[derive(Debug, Clone, PartialEq)]
pub struct HilbertSpace {
    n_max: usize,
    n_emitters: usize,
    states: Vec<BasisState>,
    /// Index of each retained state in the full tensor-product basis.
    full_index: Vec<usize>,
}

impl HilbertSpace {
    pub fn new(spec: &SystemSpec) -> Result<Self> {
        spec.validate_structure()?;
        let n_emitters = spec.n_emitters();
        let per_photon = 1usize << n_emitters;
        let mut states = Vec::new();
        let mut full_index = Vec::new();
        for idx in 0..spec.full_dim() {
            let state = BasisState { photons: idx / per_photon, excited: (idx % per_photon) as u32 };
            if !matches!(spec.excitation_cap, Some(cap) if state.excitations() > cap) {
                states.push(state);
                full_index.push(idx);
            }
        }
        Ok(HilbertSpace { n_max: spec.n_max, n_emitters, states, full_index })
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn n_emitters(&self) -> usize {
        self.n_emitters
    }

    pub fn states(&self) -> &[BasisState] {
        &self.states
    }

    pub fn is_full(&self) -> bool {
        self.states.len() == (self.n_max + 1) << self.n_emitters
    }

    /// Restricts a full-space operator to the retained basis.
    pub fn restrict(&self, op: &OperatorMatrix) -> Result<OperatorMatrix> {
        let full = (self.n_max + 1) << self.n_emitters;
        if op.dim() != full {
            return Err(Error::DimensionMismatch { expected: full, found: op.dim() });
        }
        if self.is_full() {
            return Ok(op.clone());
        }
        Ok(op.submatrix(&self.full_index))
    }

    /// Retained-basis indices grouped by total excitation number.
    pub fn manifold_indices(&self, excitations: usize) -> Vec<usize> {
        self.states
            .iter()
            .enumerate()
            .filter(|(_, s)| s.excitations() == excitations)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Cavity and emitter operators of a system, expressed in its retained basis.
#[derive(Debug, Clone)]
pub struct SystemOperators {
    pub space: HilbertSpace,
    pub a: OperatorMatrix,
    pub sigma_minus: Vec<OperatorMatrix>,
}

impl SystemOperators {
    pub fn new(spec: &SystemSpec) -> Result<Self> {
        let space = HilbertSpace::new(spec)?;
        let a = space.restrict(&embed(&fock_annihilation(spec.n_max)?, 0, spec)?)?;
        let sm = sigma_minus();
        let sigma_minus = (1..=spec.n_emitters())
            .map(|site| space.restrict(&embed(&sm, site, spec)?))
            .collect::<Result<Vec<_>>>()?;
        Ok(SystemOperators { space, a, sigma_minus })
    }

    pub fn number(&self) -> OperatorMatrix {
        let n = &self.a.adjoint() * &self.a;
        OperatorMatrix { hermitian_hint: true, ..n }
    }

    /// Collapse operators with their rates: the cavity first, then emitters.
    pub fn collapse_operators(&self, spec: &SystemSpec) -> Vec<(OperatorMatrix, f64)> {
        std::iter::once((self.a.clone(), spec.kappa))
            .chain(
                self.sigma_minus
                    .iter()
                    .zip(&spec.emitters)
                    .map(|(s, e)| (s.clone(), e.gamma_e)),
            )
            .collect()
    }

    /// Rotating-frame Hamiltonian
    /// `Δ_c a†a + Σ Δ_ej σ⁺σ⁻ + Σ g_j (a σ⁺_j + a† σ⁻_j) + E_l (a + a†)`.
    pub fn hamiltonian(&self, spec: &SystemSpec) -> Result<OperatorMatrix> {
        if spec.n_emitters() != self.sigma_minus.len() {
            return Err(Error::DimensionMismatch {
                expected: self.sigma_minus.len(),
                found: spec.n_emitters(),
            });
        }
        let a_dag = self.a.adjoint();
        let mut h = (&a_dag * &self.a).scale(spec.cavity_detuning());
        h = &h + &(&self.a + &a_dag).scale(spec.drive_amplitude);
        for (j, sm) in self.sigma_minus.iter().enumerate() {
            let sp = sm.adjoint();
            h = &h + &(&sp * sm).scale(spec.emitter_detuning(j));
            // a†σ⁻ lowers before raising, so the product stays inside an excitation cap
            let hop = &a_dag * sm;
            let exchange = &hop + &hop.adjoint();
            h = &h + &exchange.scale(spec.emitters[j].g);
        }
        h.into_hermitian()
    }

    /// `N_exc = a†a + Σ σ⁺σ⁻`, diagonal in the product basis.
    pub fn excitation_number(&self) -> OperatorMatrix {
        let diag: Vec<f64> = self.space.states().iter().map(|s| s.excitations() as f64).collect();
        OperatorMatrix::from_real_diagonal(&diag)
    }
}

/// Builds the rotating-frame Hamiltonian of `spec` in its retained basis.
pub fn build_hamiltonian(spec: &SystemSpec) -> Result<OperatorMatrix> {
    SystemOperators::new(spec)?.hamiltonian(spec)
}

pub fn excitation_number_operator(spec: &SystemSpec) -> Result<OperatorMatrix> {
    Ok(SystemOperators::new(spec)?.excitation_number())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn resonant(n_max: usize) -> SystemSpec {
        SystemSpec::new(2.0, 0.35, 2.0)
            .with_n_max(n_max)
            .with_emitter(EmitterSpec::new("e1", 2.0, 0.08, 0.08))
    }

    #[test]
    fn annihilation_two_level() {
        let a = fock_annihilation(1).unwrap();
        assert_eq!(a.dim(), 2);
        assert_eq!(a.get(0, 1), c64::new(1.0, 0.0));
        assert_eq!(a.get(0, 0), c64::new(0.0, 0.0));
        assert_eq!(a.get(1, 0), c64::new(0.0, 0.0));
        assert_eq!(a.get(1, 1), c64::new(0.0, 0.0));
    }

    #[test]
    fn annihilation_sqrt_rule() {
        let a = fock_annihilation(3).unwrap();
        assert_abs_diff_eq!(a.get(2, 3).re, 1.7320508, epsilon = 1e-7);
        let n = &a.adjoint() * &a;
        for k in 0..4 {
            assert_abs_diff_eq!(n.get(k, k).re, k as f64, epsilon = 1e-14);
        }
        assert!(n.hermiticity_error() < 1e-15);
    }

    #[test]
    fn annihilation_rejects_empty_truncation() {
        assert_eq!(fock_annihilation(0), Err(Error::InvalidTruncation(0)));
    }

    #[test]
    fn truncation_edge() {
        let n_max = 5;
        let a = fock_annihilation(n_max).unwrap();
        let ad = a.adjoint();
        // a|n_max⟩ = √n_max |n_max−1⟩, a†|n_max⟩ = 0
        assert_abs_diff_eq!(a.get(n_max - 1, n_max).re, (n_max as f64).sqrt(), epsilon = 1e-15);
        for row in 0..=n_max {
            assert_eq!(ad.get(row, n_max), c64::new(0.0, 0.0));
        }
        let comm = a.commutator(&ad);
        for k in 0..n_max {
            assert_abs_diff_eq!(comm.get(k, k).re, 1.0, epsilon = 1e-14);
        }
        assert_abs_diff_eq!(comm.get(n_max, n_max).re, -(n_max as f64), epsilon = 1e-13);
    }

    #[test]
    fn embed_sigma_on_single_emitter() {
        let spec = resonant(2);
        let lifted = embed(&sigma_minus(), 1, &spec).unwrap();
        assert_eq!(lifted.dim(), 6);
        let expected = OperatorMatrix::identity(3).kron(&sigma_minus());
        assert_eq!(lifted, expected);
        assert_eq!(lifted.get(0, 1), c64::new(1.0, 0.0));
        assert_eq!(lifted.get(4, 5), c64::new(1.0, 0.0));
    }

    #[test]
    fn embed_cavity_two_emitters() {
        let spec = resonant(4).with_emitter(EmitterSpec::new("e2", 2.04, 0.06, 0.08));
        let a = embed(&fock_annihilation(4).unwrap(), 0, &spec).unwrap();
        assert_eq!(a.dim(), 20);
    }

    #[test]
    fn embed_commutator_is_identity_below_truncation() {
        let spec = resonant(4).with_emitter(EmitterSpec::new("e2", 2.04, 0.06, 0.08));
        let a = embed(&fock_annihilation(4).unwrap(), 0, &spec).unwrap();
        let comm = a.commutator(&a.adjoint());
        let space = HilbertSpace::new(&spec).unwrap();
        for (i, si) in space.states().iter().enumerate() {
            for (j, _) in space.states().iter().enumerate() {
                if si.photons < 4 {
                    let expected = if i == j { 1.0 } else { 0.0 };
                    assert_abs_diff_eq!(comm.get(i, j).re, expected, epsilon = 1e-14);
                    assert_abs_diff_eq!(comm.get(i, j).im, 0.0, epsilon = 1e-14);
                }
            }
        }
    }

    #[test]
    fn embed_errors() {
        let spec = resonant(2);
        assert_eq!(
            embed(&sigma_minus(), 2, &spec),
            Err(Error::SiteOutOfRange { site: 2, sites: 2 })
        );
        assert_eq!(
            embed(&sigma_minus(), 0, &spec),
            Err(Error::DimensionMismatch { expected: 3, found: 2 })
        );
    }

    #[test]
    fn empty_undriven_hamiltonian_is_zero() {
        let spec = SystemSpec::new(2.0, 0.35, 2.0).with_drive_amplitude(0.0);
        let h = build_hamiltonian(&spec).unwrap();
        assert_eq!(h.max_abs(), 0.0);
    }

    #[test]
    fn hamiltonian_diagonal_uses_detunings() {
        // ω_c = 2, ω_e = 1.795, ω = 1.82
        let spec = SystemSpec::new(2.0, 0.35, 1.82)
            .with_emitter(EmitterSpec::new("e1", 1.795, 0.08, 0.08));
        let h = build_hamiltonian(&spec).unwrap();
        assert!(h.hermitian_hint());
        assert!(h.hermiticity_error() < HERMITIAN_TOL);
        // |0,e⟩ at index 1, |1,g⟩ at index 2
        assert_abs_diff_eq!(h.get(1, 1).re, -0.025, epsilon = 1e-12);
        assert_abs_diff_eq!(h.get(2, 2).re, 0.18, epsilon = 1e-12);
        assert_abs_diff_eq!(h.get(3, 3).re, 0.155, epsilon = 1e-12);
    }

    #[test]
    fn resonant_single_excitation_doublet() {
        let spec = resonant(6).with_drive_amplitude(0.0);
        let h = build_hamiltonian(&spec).unwrap();
        let ops = SystemOperators::new(&spec).unwrap();
        let block = h.submatrix(&ops.space.manifold_indices(1));
        let mut evals = block.as_mat().self_adjoint_eigenvalues(faer::Side::Lower).unwrap();
        evals.sort_by(f64::total_cmp);
        assert_abs_diff_eq!(evals[0], -0.08, epsilon = 1e-12);
        assert_abs_diff_eq!(evals[1], 0.08, epsilon = 1e-12);
    }

    #[test]
    fn excitation_number_ordering() {
        let spec = resonant(2);
        let n = excitation_number_operator(&spec).unwrap();
        let diag: Vec<f64> = n.diagonal().iter().map(|z| z.re).collect();
        assert_eq!(diag, vec![0.0, 1.0, 1.0, 2.0, 2.0, 3.0]);
    }

    #[test]
    fn excitation_number_conserved_only_without_drive() {
        let undriven = resonant(4).with_drive_amplitude(0.0);
        let n = excitation_number_operator(&undriven).unwrap();
        let h = build_hamiltonian(&undriven).unwrap();
        assert!(h.commutator(&n).max_abs() < 1e-12);

        let driven = resonant(4);
        let h = build_hamiltonian(&driven).unwrap();
        assert!(h.commutator(&n).max_abs() > 1e-3);
    }

    #[test]
    fn manifold_sizes_single_emitter() {
        let space = HilbertSpace::new(&resonant(5)).unwrap();
        let sizes: Vec<usize> = (0..=5).map(|k| space.manifold_indices(k).len()).collect();
        assert_eq!(sizes, vec![1, 2, 2, 2, 2, 2]);
    }

    #[test]
    fn excitation_cap_restricts_basis() {
        let spec = resonant(6).with_excitation_cap(Some(4));
        let space = HilbertSpace::new(&spec).unwrap();
        assert_eq!(space.dim(), 1 + 2 * 4);
        assert!(space.states().iter().all(|s| s.excitations() <= 4));
        let ops = SystemOperators::new(&spec).unwrap();
        assert_eq!(ops.a.dim(), space.dim());
    }

    #[test]
    fn capped_hamiltonian_is_projected_full_hamiltonian() {
        let full = resonant(5)
            .with_emitter(EmitterSpec::new("e2", 2.04, 0.06, 0.05))
            .with_emitter(EmitterSpec::new("e3", 1.98, 0.06, 0.03));
        let capped = full.clone().with_excitation_cap(Some(4));
        let h_full = build_hamiltonian(&full).unwrap();
        let h_cap = build_hamiltonian(&capped).unwrap();
        let projected = HilbertSpace::new(&capped).unwrap().restrict(&h_full).unwrap();
        assert!((&h_cap - &projected).max_abs() < 1e-15);
    }

    #[test]
    fn spec_validation() {
        assert!(resonant(6).validate().is_ok());
        assert_eq!(resonant(3).validate(), Err(Error::InvalidTruncation(3)));
        assert!(resonant(3).validate_structure().is_ok());
        let bad = SystemSpec::new(2.0, 0.35, 2.0).with_emitter(EmitterSpec::new("x", 2.0, -0.1, 0.0));
        assert!(matches!(bad.validate(), Err(Error::InvalidSpec(_))));
        let bad = SystemSpec::new(2.0, 0.35, 2.0).with_drive_amplitude(-1.0);
        assert!(matches!(bad.validate(), Err(Error::InvalidSpec(_))));
        assert!(resonant(6).is_weak_drive());
        assert!(!resonant(6).with_drive_amplitude(0.1).is_weak_drive());
        assert_eq!(resonant(6).full_dim(), 14);
    }
}
