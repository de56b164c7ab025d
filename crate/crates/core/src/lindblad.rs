//! Liouvillian superoperator and steady-state / time-evolution solvers.
//!
//! Density matrices are vectorized by column stacking: `vec(ρ)[i + j·d] = ρ[i, j]`.
//! The generator is
//!
//! ```text
//! ∂ρ/∂t = i[ρ, H] + Σ_k (r_k / 2) (2 o_k ρ o_k† − ρ o_k† o_k − o_k† o_k ρ)
//! ```
//!
//! so a collapse channel with rate `r` depopulates at exactly `r`.

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::{c64, Mat, Side};

use crate::error::{Error, Result};
use crate::hilbert::{OperatorMatrix, SystemOperators, SystemSpec};

pub const TRACE_TOL: f64 = 1e-10;
pub const HERMITICITY_TOL: f64 = 1e-10;
/// Smallest eigenvalue accepted for a numerically positive density matrix.
pub const POSITIVITY_TOL: f64 = -1e-8;
/// Relative residual `‖L vec(ρ)‖ / ‖L‖_F` required of a steady state.
pub const RESIDUAL_TOL: f64 = 1e-10;
/// Hilbert dimensions up to this size are solved with a dense LU.
pub const DENSE_SOLVE_MAX_DIM: usize = 16;
/// Largest admissible `‖L‖₁·dt` for explicit integration.
pub const MAX_STEP_NORM: f64 = 0.1;
/// Trace drift that aborts a time integration.
pub const MAX_TRACE_DRIFT: f64 = 1e-6;

const REFINEMENT_STEPS: usize = 2;

#[derive(Debug, Clone)]
pub struct Liouvillian {
    hilbert_dim: usize,
    matrix: SparseColMat<usize, c64>,
    frobenius_norm: f64,
    one_norm: f64,
    /// Expected magnitude of each basis amplitude, used to balance the
    /// steady-state solve.
    grading: Option<Vec<f64>>,
}

impl Liouvillian {
    /// Dimension of the superoperator, d².
    pub fn dim(&self) -> usize {
        self.hilbert_dim * self.hilbert_dim
    }

    pub fn hilbert_dim(&self) -> usize {
        self.hilbert_dim
    }

    pub fn matrix(&self) -> &SparseColMat<usize, c64> {
        &self.matrix
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.frobenius_norm
    }

    /// Maximum absolute column sum; bounds the spectral radius.
    pub fn one_norm(&self) -> f64 {
        self.one_norm
    }

    pub fn nnz(&self) -> usize {
        self.matrix.val().len()
    }

    /// Attaches per-basis-state amplitude scales `w_i`. The steady-state solve
    /// then works with `ρ_ij / (w_i w_j)`, so elements spanning many orders of
    /// magnitude under weak drive are all resolved to full relative precision.
    pub fn with_grading(mut self, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != self.hilbert_dim {
            return Err(Error::DimensionMismatch { expected: self.hilbert_dim, found: weights.len() });
        }
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::InvalidArgument("grading weights must be positive and finite".into()));
        }
        self.grading = Some(weights);
        Ok(self)
    }

    pub fn grading(&self) -> Option<&[f64]> {
        self.grading.as_deref()
    }

    /// `L · x`
    pub fn apply(&self, x: &[c64]) -> Vec<c64> {
        let mut y = vec![c64::new(0.0, 0.0); self.dim()];
        self.apply_into(x, &mut y);
        y
    }

    fn apply_into(&self, x: &[c64], y: &mut [c64]) {
        assert_eq!(x.len(), self.dim());
        y.iter_mut().for_each(|v| *v = c64::new(0.0, 0.0));
        let col_ptr = self.matrix.symbolic().col_ptr();
        let row_idx = self.matrix.symbolic().row_idx();
        let val = self.matrix.val();
        for (j, &xj) in x.iter().enumerate() {
            if xj.re == 0.0 && xj.im == 0.0 {
                continue;
            }
            for k in col_ptr[j]..col_ptr[j + 1] {
                y[row_idx[k]] += val[k] * xj;
            }
        }
    }

    /// `xᵀ · L`
    pub fn apply_left(&self, x: &[c64]) -> Vec<c64> {
        assert_eq!(x.len(), self.dim());
        let col_ptr = self.matrix.symbolic().col_ptr();
        let row_idx = self.matrix.symbolic().row_idx();
        let val = self.matrix.val();
        (0..self.dim())
            .map(|j| (col_ptr[j]..col_ptr[j + 1]).map(|k| x[row_idx[k]] * val[k]).sum())
            .collect()
    }

    pub fn to_dense(&self) -> Mat<c64> {
        self.matrix.to_dense()
    }

    /// Column-major triplets of `W⁻¹ L′ W`, where `L′` has the trace constraint
    /// substituted for row 0 (the equation for ρ₀₀, redundant under trace
    /// preservation) and `W` is the diagonal grading of `vec(ρ)`.
    fn trace_replaced_triplets(&self, weights: &[f64]) -> Vec<Triplet<usize, usize, c64>> {
        let d = self.hilbert_dim;
        let col_ptr = self.matrix.symbolic().col_ptr();
        let row_idx = self.matrix.symbolic().row_idx();
        let val = self.matrix.val();
        let mut out = Vec::with_capacity(val.len() + d);
        for j in 0..self.dim() {
            for k in col_ptr[j]..col_ptr[j + 1] {
                let i = row_idx[k];
                if i != 0 {
                    out.push(Triplet::new(i, j, val[k] * (weights[j] / weights[i])));
                }
            }
        }
        out.extend((0..d).map(|i| Triplet::new(0, i + i * d, c64::new(weights[i + i * d] / weights[0], 0.0))));
        out
    }

    /// Weights of `vec(ρ)`: `w_i w_j` for element `(i, j)`, or all ones.
    fn vector_weights(&self) -> Vec<f64> {
        let d = self.hilbert_dim;
        match &self.grading {
            Some(w) => (0..d * d).map(|k| w[k % d] * w[k / d]).collect(),
            None => vec![1.0; d * d],
        }
    }
}

/// Assembles the Lindblad generator from a Hamiltonian and `(operator, rate)` channels.
pub fn build_liouvillian(h: &OperatorMatrix, collapse: &[(OperatorMatrix, f64)]) -> Result<Liouvillian> {
    let d = h.dim();
    for (op, rate) in collapse {
        if op.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, found: op.dim() });
        }
        if !(rate.is_finite() && *rate >= 0.0) {
            return Err(Error::NegativeRate(*rate));
        }
    }

    let i_unit = c64::new(0.0, 1.0);
    let mut triplets: Vec<Triplet<usize, usize, c64>> = Vec::new();

    // −i(I ⊗ H) + i(Hᵀ ⊗ I), plus the anticommutator part of each dissipator,
    // which has the same shape with an effective non-Hermitian "H".
    let push_left_right = |m: &OperatorMatrix, left: c64, right: c64, out: &mut Vec<_>| {
        for (r, c, v) in m.nonzeros() {
            for k in 0..d {
                // (M ρ)[r, k] ← M[r, c] ρ[c, k]
                out.push(Triplet::new(r + k * d, c + k * d, left * v));
                // (ρ M)[k, c] ← ρ[k, r] M[r, c]
                out.push(Triplet::new(k + c * d, k + r * d, right * v));
            }
        }
    };
    push_left_right(h, -i_unit, i_unit, &mut triplets);

    for (op, rate) in collapse {
        if *rate == 0.0 {
            continue;
        }
        let nz = op.nonzeros();
        // r · o ρ o†: [o ρ o†]_{ij} = Σ o_ik ρ_kl conj(o_jl)
        for &(i, k, v1) in &nz {
            for &(j, l, v2) in &nz {
                triplets.push(Triplet::new(i + j * d, k + l * d, v1 * v2.conj() * *rate));
            }
        }
        let n = &op.adjoint() * op;
        let half = c64::new(-0.5 * rate, 0.0);
        push_left_right(&n, half, half, &mut triplets);
    }

    let dim = d * d;
    let matrix = SparseColMat::<usize, c64>::try_new_from_triplets(dim, dim, &triplets)
        .map_err(|e| Error::InvalidArgument(format!("sparse assembly failed: {e:?}")))?;

    let val = matrix.val();
    let frobenius_norm = val.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    let col_ptr = matrix.symbolic().col_ptr();
    let one_norm = (0..dim)
        .map(|j| val[col_ptr[j]..col_ptr[j + 1]].iter().map(|v| v.norm()).sum::<f64>())
        .fold(0.0, f64::max);

    Ok(Liouvillian { hilbert_dim: d, matrix, frobenius_norm, one_norm, grading: None })
}

/// Rough ratio between successive excitation-manifold amplitudes under
/// drive, `2E_l / max(κ, γ_j)`, kept within `[1e-8, 1]`.
fn amplitude_ratio(spec: &SystemSpec) -> Option<f64> {
    let rate = spec.emitters.iter().map(|e| e.gamma_e).fold(spec.kappa, f64::max);
    (spec.drive_amplitude > 0.0 && rate > 0.0).then(|| (2.0 * spec.drive_amplitude / rate).clamp(1e-8, 1.0))
}

/// Liouvillian of a full system specification, with the operators used to build it.
pub fn system_liouvillian(spec: &SystemSpec) -> Result<(Liouvillian, SystemOperators)> {
    spec.validate()?;
    let ops = SystemOperators::new(spec)?;
    let h = ops.hamiltonian(spec)?;
    let mut l = build_liouvillian(&h, &ops.collapse_operators(spec))?;
    if let Some(s) = amplitude_ratio(spec) {
        let weights = ops.space.states().iter().map(|st| s.powi(st.excitations() as i32)).collect();
        l = l.with_grading(weights)?;
    }
    Ok((l, ops))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: Mat<c64>,
}

impl DensityMatrix {
    /// Validates trace, Hermiticity and positivity.
    pub fn new(entries: Mat<c64>) -> Result<Self> {
        let rho = Self::new_unchecked(entries)?;
        rho.validate()?;
        Ok(rho)
    }

    fn new_unchecked(entries: Mat<c64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::DimensionMismatch { expected: entries.nrows(), found: entries.ncols() });
        }
        Ok(DensityMatrix { entries })
    }

    /// Projector onto a basis state.
    pub fn basis_state(dim: usize, index: usize) -> Self {
        let mut entries = Mat::zeros(dim, dim);
        entries[(index, index)] = c64::new(1.0, 0.0);
        DensityMatrix { entries }
    }

    /// `|ψ⟩⟨ψ|` for a normalized state vector.
    pub fn pure(state: &[c64]) -> Result<Self> {
        let n = state.len();
        Self::new(Mat::from_fn(n, n, |i, j| state[i] * state[j].conj()))
    }

    /// Reshapes a column-stacked vector.
    pub fn from_vector(v: &[c64]) -> Result<Self> {
        let d = (v.len() as f64).sqrt().round() as usize;
        if d * d != v.len() {
            return Err(Error::DimensionMismatch { expected: d * d, found: v.len() });
        }
        Self::new(Mat::from_fn(d, d, |i, j| v[i + j * d]))
    }

    pub fn to_vector(&self) -> Vec<c64> {
        let d = self.dim();
        let mut v = Vec::with_capacity(d * d);
        for j in 0..d {
            for i in 0..d {
                v.push(self.entries[(i, j)]);
            }
        }
        v
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &Mat<c64> {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> c64 {
        self.entries[(row, col)]
    }

    pub fn trace(&self) -> c64 {
        (0..self.dim()).map(|i| self.entries[(i, i)]).sum()
    }

    pub fn hermiticity_error(&self) -> f64 {
        let d = self.dim();
        let mut max = 0.0f64;
        for j in 0..d {
            for i in 0..=j {
                max = max.max((self.entries[(i, j)] - self.entries[(j, i)].conj()).norm());
            }
        }
        max
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        let evals = self
            .entries
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| Error::InvalidDensityMatrix(format!("eigen-decomposition failed: {e:?}")))?;
        Ok(evals.into_iter().fold(f64::INFINITY, f64::min))
    }

    pub fn validate(&self) -> Result<()> {
        let tr = self.trace();
        if (tr - c64::new(1.0, 0.0)).norm() >= TRACE_TOL {
            return Err(Error::InvalidDensityMatrix(format!("trace = {} + {}i", tr.re, tr.im)));
        }
        let herm = self.hermiticity_error();
        if herm >= HERMITICITY_TOL {
            return Err(Error::InvalidDensityMatrix(format!("max |ρ − ρ†| = {herm:.3e}")));
        }
        let min = self.min_eigenvalue()?;
        if min <= POSITIVITY_TOL {
            return Err(Error::InvalidDensityMatrix(format!("minimum eigenvalue {min:.3e}")));
        }
        Ok(())
    }

    /// `Tr(ρ O)`
    pub fn expectation(&self, op: &OperatorMatrix) -> Result<c64> {
        let d = self.dim();
        if op.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, found: op.dim() });
        }
        let mut acc = c64::new(0.0, 0.0);
        for (r, c, v) in op.nonzeros() {
            acc += self.entries[(c, r)] * v;
        }
        Ok(acc)
    }

    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        let d = self.dim();
        let mut max = 0.0f64;
        for j in 0..d {
            for i in 0..d {
                max = max.max((self.entries[(i, j)] - other.entries[(i, j)]).norm());
            }
        }
        max
    }

    /// `(ρ + ρ†) / 2`
    fn hermitized(mut self) -> Self {
        let d = self.dim();
        for j in 0..d {
            for i in 0..=j {
                let avg = (self.entries[(i, j)] + self.entries[(j, i)].conj()) * 0.5;
                self.entries[(i, j)] = avg;
                self.entries[(j, i)] = avg.conj();
            }
        }
        self
    }
}

fn residual_norm(l: &Liouvillian, x: &[c64]) -> f64 {
    l.apply(x).iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

enum Factorization {
    Dense(faer::linalg::solvers::PartialPivLu<c64>),
    Sparse(faer::sparse::linalg::solvers::Lu<usize, c64>),
}

impl Factorization {
    fn solve(&self, rhs: &Mat<c64>) -> Mat<c64> {
        match self {
            Factorization::Dense(lu) => lu.solve(rhs),
            Factorization::Sparse(lu) => lu.solve(rhs),
        }
    }
}

/// Stationary state from the trace-constrained linear system `L′ x = e₀`.
///
/// Dense LU for Hilbert dimension up to [`DENSE_SOLVE_MAX_DIM`], sparse LU
/// otherwise, each followed by iterative refinement against the constrained
/// system. With a grading attached the unknowns are rescaled first.
pub fn steady_state(l: &Liouvillian) -> Result<DensityMatrix> {
    let d = l.hilbert_dim();
    let n = l.dim();
    let weights = l.vector_weights();
    let triplets = l.trace_replaced_triplets(&weights);
    let constrained = SparseColMat::<usize, c64>::try_new_from_triplets(n, n, &triplets)
        .map_err(|e| Error::InvalidArgument(format!("sparse assembly failed: {e:?}")))?;

    let factor = if d <= DENSE_SOLVE_MAX_DIM {
        Factorization::Dense(constrained.to_dense().partial_piv_lu())
    } else {
        let lu = constrained.sp_lu().map_err(|_| Error::DegenerateSteadyState)?;
        Factorization::Sparse(lu)
    };

    let mut rhs = Mat::<c64>::zeros(n, 1);
    rhs[(0, 0)] = c64::new(1.0, 0.0);
    let mut y = factor.solve(&rhs);

    let scaled = Liouvillian {
        hilbert_dim: d,
        matrix: constrained,
        frobenius_norm: 0.0,
        one_norm: 0.0,
        grading: None,
    };
    for _ in 0..REFINEMENT_STEPS {
        let yv: Vec<c64> = (0..n).map(|i| y[(i, 0)]).collect();
        let ay = scaled.apply(&yv);
        let r = Mat::from_fn(n, 1, |i, _| rhs[(i, 0)] - ay[i]);
        let dy = factor.solve(&r);
        y = Mat::from_fn(n, 1, |i, _| y[(i, 0)] + dy[(i, 0)]);
    }
    let x = Mat::from_fn(n, 1, |i, _| y[(i, 0)] * weights[i]);

    let xv: Vec<c64> = (0..n).map(|i| x[(i, 0)]).collect();
    // A valid density matrix has all entries bounded by 1 in magnitude; blow-up
    // means the constrained system was singular.
    if xv.iter().any(|v| !v.re.is_finite() || !v.im.is_finite() || v.norm() > 1.0 + 1e-6) {
        return Err(Error::DegenerateSteadyState);
    }
    let residual = residual_norm(l, &xv) / l.frobenius_norm().max(f64::MIN_POSITIVE);
    if residual >= RESIDUAL_TOL {
        return Err(Error::SolverFailure { residual });
    }
    let rho = DensityMatrix::new_unchecked(Mat::from_fn(d, d, |i, j| xv[i + j * d]))?;
    rho.validate()?;
    Ok(rho.hermitized())
}

/// Integrates `vec(ρ̇) = L vec(ρ)` with classical fourth-order Runge–Kutta.
///
/// The step is shrunk so that an integer number of steps reaches `t_final`.
pub fn evolve(rho0: &DensityMatrix, l: &Liouvillian, t_final: f64, dt: f64) -> Result<DensityMatrix> {
    if rho0.dim() != l.hilbert_dim() {
        return Err(Error::DimensionMismatch { expected: l.hilbert_dim(), found: rho0.dim() });
    }
    if !(dt.is_finite() && dt > 0.0 && t_final.is_finite() && t_final >= 0.0) {
        return Err(Error::InvalidArgument(format!("invalid time grid: t_final = {t_final}, dt = {dt}")));
    }
    let step_norm = l.one_norm() * dt;
    if step_norm >= MAX_STEP_NORM {
        return Err(Error::StepTooLarge(step_norm));
    }
    let steps = (t_final / dt).ceil() as usize;
    if steps == 0 {
        return Ok(rho0.clone());
    }
    let h = t_final / steps as f64;
    let d = l.hilbert_dim();
    let n = l.dim();
    let trace_of = |v: &[c64]| (0..d).map(|i| v[i + i * d]).sum::<c64>();

    let mut y = rho0.to_vector();
    let tr0 = trace_of(&y);
    let zero = c64::new(0.0, 0.0);
    let (mut k1, mut k2, mut k3, mut k4) = (vec![zero; n], vec![zero; n], vec![zero; n], vec![zero; n]);
    let mut tmp = vec![zero; n];
    for step in 0..steps {
        l.apply_into(&y, &mut k1);
        for i in 0..n {
            tmp[i] = y[i] + k1[i] * (0.5 * h);
        }
        l.apply_into(&tmp, &mut k2);
        for i in 0..n {
            tmp[i] = y[i] + k2[i] * (0.5 * h);
        }
        l.apply_into(&tmp, &mut k3);
        for i in 0..n {
            tmp[i] = y[i] + k3[i] * h;
        }
        l.apply_into(&tmp, &mut k4);
        for i in 0..n {
            y[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
        }
        if step % 64 == 63 || step + 1 == steps {
            let drift = (trace_of(&y) - tr0).norm();
            if drift > MAX_TRACE_DRIFT {
                return Err(Error::TraceDrift(drift));
            }
        }
    }
    DensityMatrix::new(Mat::from_fn(d, d, |i, j| y[i + j * d]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{fock_annihilation, EmitterSpec};
    use approx::assert_abs_diff_eq;

    fn photon_number_rate(l: &Liouvillian, rho: &DensityMatrix, n_op: &OperatorMatrix) -> f64 {
        let drho = l.apply(&rho.to_vector());
        let d = rho.dim();
        let m = Mat::from_fn(d, d, |i, j| drho[i + j * d]);
        let mut acc = c64::new(0.0, 0.0);
        for (r, c, v) in n_op.nonzeros() {
            acc += m[(c, r)] * v;
        }
        acc.re
    }

    #[test]
    fn cavity_population_decays_at_kappa() {
        let kappa = 0.35;
        let a = fock_annihilation(4).unwrap();
        let h = OperatorMatrix::zeros(5);
        let l = build_liouvillian(&h, &[(a.clone(), kappa)]).unwrap();
        let rho = DensityMatrix::basis_state(5, 1);
        let n_op = &a.adjoint() * &a;
        assert_abs_diff_eq!(photon_number_rate(&l, &rho, &n_op), -kappa, epsilon = 1e-14);
    }

    #[test]
    fn pure_commutator_annihilates_commuting_states() {
        let a = fock_annihilation(4).unwrap();
        let h = (&a.adjoint() * &a).scale(0.3);
        let l = build_liouvillian(&h, &[]).unwrap();
        // any diagonal state commutes with the number operator
        let rho = DensityMatrix::new(Mat::from_fn(5, 5, |i, j| {
            if i == j { c64::new(0.2, 0.0) } else { c64::new(0.0, 0.0) }
        }))
        .unwrap();
        let out = l.apply(&rho.to_vector());
        assert!(out.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn trace_preservation_left_null_vector() {
        let spec = SystemSpec::new(2.0, 0.35, 1.95).with_emitter(EmitterSpec::new("e1", 2.0, 0.08, 0.08));
        let (l, _) = system_liouvillian(&spec).unwrap();
        let d = l.hilbert_dim();
        let mut id = vec![c64::new(0.0, 0.0); l.dim()];
        for i in 0..d {
            id[i + i * d] = c64::new(1.0, 0.0);
        }
        let left = l.apply_left(&id);
        assert!(left.iter().all(|v| v.norm() < 1e-10));
    }

    #[test]
    fn rejects_bad_channels() {
        let a = fock_annihilation(3).unwrap();
        let h = OperatorMatrix::zeros(4);
        assert_eq!(build_liouvillian(&h, &[(a.clone(), -0.1)]).unwrap_err(), Error::NegativeRate(-0.1));
        let small = fock_annihilation(2).unwrap();
        assert!(matches!(
            build_liouvillian(&h, &[(small, 0.1)]),
            Err(Error::DimensionMismatch { expected: 4, found: 3 })
        ));
    }

    #[test]
    fn coherent_steady_state_photon_number() {
        let spec = SystemSpec::new(2.0, 0.35, 2.1);
        let (l, ops) = system_liouvillian(&spec).unwrap();
        let rho = steady_state(&l).unwrap();
        let n = rho.expectation(&ops.number()).unwrap().re;
        let expected = spec.drive_amplitude.powi(2) / (0.1f64.powi(2) + 0.35f64.powi(2) / 4.0);
        assert_abs_diff_eq!(n / expected, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn lossless_system_is_degenerate() {
        // no dissipation: every eigenprojector of H is stationary
        let spec = SystemSpec::new(2.0, 0.0, 2.0)
            .with_drive_amplitude(0.0)
            .with_emitter(EmitterSpec::new("e1", 2.0, 0.0, 0.08));
        let (l, _) = system_liouvillian(&spec).unwrap();
        assert!(matches!(
            steady_state(&l),
            Err(Error::DegenerateSteadyState) | Err(Error::SolverFailure { .. }) | Err(Error::InvalidDensityMatrix(_))
        ));
    }

    #[test]
    fn evolve_with_zero_generator_is_identity() {
        let h = OperatorMatrix::zeros(3);
        let l = build_liouvillian(&h, &[]).unwrap();
        let rho0 = DensityMatrix::basis_state(3, 2);
        let rho = evolve(&rho0, &l, 5.0, 0.1).unwrap();
        assert_eq!(rho, rho0);
    }

    #[test]
    fn evolve_exponential_decay() {
        let kappa = 0.35;
        let a = fock_annihilation(3).unwrap();
        let l = build_liouvillian(&OperatorMatrix::zeros(4), &[(a, kappa)]).unwrap();
        let rho0 = DensityMatrix::basis_state(4, 1);
        let t = 3.0;
        let rho = evolve(&rho0, &l, t, 0.01).unwrap();
        assert_abs_diff_eq!(rho.get(1, 1).re, (-kappa * t).exp(), epsilon = 1e-9);
        assert_abs_diff_eq!(rho.get(0, 0).re, 1.0 - (-kappa * t).exp(), epsilon = 1e-9);
    }

    #[test]
    fn evolve_rejects_large_steps() {
        let a = fock_annihilation(3).unwrap();
        let l = build_liouvillian(&OperatorMatrix::zeros(4), &[(a, 0.35)]).unwrap();
        let rho0 = DensityMatrix::basis_state(4, 1);
        assert!(matches!(evolve(&rho0, &l, 1.0, 1.0), Err(Error::StepTooLarge(_))));
    }

    #[test]
    fn density_matrix_validation() {
        let bad_trace = Mat::from_fn(2, 2, |i, j| if i == j { c64::new(0.6, 0.0) } else { c64::new(0.0, 0.0) });
        assert!(DensityMatrix::new(bad_trace).is_err());
        let negative = Mat::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => c64::new(1.1, 0.0),
            (1, 1) => c64::new(-0.1, 0.0),
            _ => c64::new(0.0, 0.0),
        });
        assert!(DensityMatrix::new(negative).is_err());
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = DensityMatrix::pure(&[c64::new(s, 0.0), c64::new(0.0, s)]).unwrap();
        assert_abs_diff_eq!(plus.trace().re, 1.0, epsilon = 1e-15);
        assert!(plus.min_eigenvalue().unwrap() > -1e-15);
    }
}
