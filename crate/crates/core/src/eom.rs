//! Weak-drive perturbative solutions of the non-Hermitian equations of motion.
//!
//! Dissipation enters through complex detunings `Δ′ = Δ − i·rate/2`. The
//! steady amplitudes are solved tier by tier (0, 1, 2 and 3 excitations) with
//! `c₁ = 1`, and the correlations follow from the leading-order approximants
//! `g²(0) ≈ 2|c_{2ph}|²/|c₂|⁴` and `g³(0) ≈ 6|c_{3ph}|²/|c₂|⁶`.
//!
//! Amplitude numbering (1-based, as `c₁ … c₇` / `c₁ … c₁₂`):
//!
//! ```text
//! one emitter:  |0,0⟩ |1,0⟩ |0,1⟩ | |1,1⟩ |2,0⟩ | |2,1⟩ |3,0⟩
//! two emitters: |000⟩ | |100⟩ |010⟩ |001⟩ | |200⟩ |110⟩ |101⟩ |011⟩
//!               | |300⟩ |210⟩ |201⟩ |111⟩
//! ```

use std::f64::consts::{PI, SQRT_2};

use faer::c64;

use crate::error::{Error, Result};
use crate::hilbert::SystemSpec;

/// Magnitude below which an elimination denominator counts as zero.
pub const SINGULAR_TOL: f64 = 1e-12;

const SQRT_3: f64 = 1.732_050_807_568_877_2;

fn cz(re: f64) -> c64 {
    c64::new(re, 0.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexDetunings {
    /// Δ′_c = Δ_c − iκ/2
    pub cavity: c64,
    /// Δ′_ej = Δ_ej − iγ_ej/2
    pub emitters: Vec<c64>,
}

impl ComplexDetunings {
    pub fn from_spec(spec: &SystemSpec) -> Self {
        ComplexDetunings {
            cavity: c64::new(spec.cavity_detuning(), -spec.kappa / 2.0),
            emitters: (0..spec.n_emitters())
                .map(|j| c64::new(spec.emitter_detuning(j), -spec.emitters[j].gamma_e / 2.0))
                .collect(),
        }
    }

    /// Flips the sign of every imaginary part.
    pub fn conjugate(&self) -> Self {
        ComplexDetunings {
            cavity: self.cavity.conj(),
            emitters: self.emitters.iter().map(|z| z.conj()).collect(),
        }
    }
}

/// Pathway coefficients of the single-emitter two-excitation tier:
/// `c₄ = A₄₂c₂ + A₄₃c₃`, `c₅ = A₅₂c₂ + A₅₃c₃`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathwayCoefficients {
    pub a42: c64,
    pub a43: c64,
    pub a52: c64,
    pub a53: c64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeSet {
    amplitudes: Vec<c64>,
    tiers: Vec<std::ops::Range<usize>>,
    pub pathways: Option<PathwayCoefficients>,
}

impl AmplitudeSet {
    /// Amplitude `c_k` with 1-based `k`.
    pub fn c(&self, k: usize) -> c64 {
        self.amplitudes[k - 1]
    }

    pub fn amplitudes(&self) -> &[c64] {
        &self.amplitudes
    }

    /// Amplitudes grouped by excitation number 0..=3.
    pub fn tier(&self, excitations: usize) -> &[c64] {
        &self.amplitudes[self.tiers[excitations].clone()]
    }

    /// `max|tier k| / max|tier k+1|` for k = 0, 1, 2.
    pub fn hierarchy_ratios(&self) -> Vec<f64> {
        let peak = |k: usize| self.tier(k).iter().map(|z| z.norm()).fold(0.0, f64::max);
        (0..3).map(|k| peak(k) / peak(k + 1)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EomSolution {
    pub amplitudes: AmplitudeSet,
    /// Leading-order approximant of g²(0).
    pub g2: f64,
    /// Leading-order approximant of g³(0).
    pub g3: f64,
    /// `⟨a†a⟩` summed over the truncated wavefunction.
    pub mean_n: f64,
}

fn check_denominator(d: c64, what: &'static str) -> Result<c64> {
    if d.norm() < SINGULAR_TOL {
        Err(Error::SingularParameters(what))
    } else {
        Ok(d)
    }
}

fn approximants(c2: c64, two_photon: c64, three_photon: c64) -> Result<(f64, f64)> {
    let n1 = c2.norm_sqr();
    if !(n1 > 0.0) {
        return Err(Error::SingularParameters("vanishing one-photon amplitude"));
    }
    Ok((2.0 * two_photon.norm_sqr() / (n1 * n1), 6.0 * three_photon.norm_sqr() / (n1 * n1 * n1)))
}

/// Single-emitter closed-form cascade for arbitrary complex detunings.
pub fn single_emitter_amplitudes(det: &ComplexDetunings, g: f64, drive: f64) -> Result<AmplitudeSet> {
    if det.emitters.len() != 1 {
        return Err(Error::InvalidArgument(format!(
            "single-emitter equations need exactly one emitter, got {}",
            det.emitters.len()
        )));
    }
    let dc = det.cavity;
    let de = det.emitters[0];
    let (g, e) = (cz(g), cz(drive));

    let d1 = check_denominator(dc * de - g * g, "one-excitation denominator")?;
    let c2 = e * (-de) / d1;
    let c3 = e * g / d1;

    let d2 = check_denominator(dc * (dc + de) - g * g, "two-excitation denominator")?;
    let pathways = PathwayCoefficients {
        a42: e * g / d2,
        a43: e * (-dc) / d2,
        a52: e / SQRT_2 * (-(dc + de)) / d2,
        a53: e / SQRT_2 * g / d2,
    };
    let c4 = pathways.a42 * c2 + pathways.a43 * c3;
    let c5 = pathways.a52 * c2 + pathways.a53 * c3;

    let d3 = check_denominator(dc * (cz(2.0) * dc + de) - g * g, "three-excitation denominator")?;
    let c6 = e * (-(dc * SQRT_2) * c4 + g * c5) / d3;
    let c7 = e / SQRT_3 * (g * SQRT_2 * c4 - (cz(2.0) * dc + de) * c5) / d3;

    Ok(AmplitudeSet {
        amplitudes: vec![cz(1.0), c2, c3, c4, c5, c6, c7],
        tiers: vec![0..1, 1..3, 3..5, 5..7],
        pathways: Some(pathways),
    })
}

/// Equations-of-motion correlations for a one-emitter system.
pub fn eom_single(spec: &SystemSpec) -> Result<EomSolution> {
    if spec.n_emitters() != 1 {
        return Err(Error::InvalidArgument(format!(
            "eom_single needs exactly one emitter, got {}",
            spec.n_emitters()
        )));
    }
    let det = ComplexDetunings::from_spec(spec);
    let amplitudes = single_emitter_amplitudes(&det, spec.emitters[0].g, spec.drive_amplitude)?;
    let c = |k| amplitudes.c(k);
    let (g2, g3) = approximants(c(2), c(5), c(7))?;
    let mean_n = c(2).norm_sqr()
        + c(4).norm_sqr()
        + 2.0 * c(5).norm_sqr()
        + 2.0 * c(6).norm_sqr()
        + 3.0 * c(7).norm_sqr();
    Ok(EomSolution { amplitudes, g2, g3, mean_n })
}

/// Gaussian elimination with partial pivoting on a 4×4 complex system.
pub fn solve_4x4(mut m: [[c64; 4]; 4], mut b: [c64; 4]) -> Result<[c64; 4]> {
    for col in 0..4 {
        let pivot = (col..4)
            .max_by(|&i, &j| m[i][col].norm().total_cmp(&m[j][col].norm()))
            .expect("non-empty pivot range");
        if m[pivot][col].norm() < SINGULAR_TOL {
            return Err(Error::SingularParameters("singular 4x4 amplitude system"));
        }
        m.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..4 {
            let factor = m[row][col] / m[col][col];
            for k in col..4 {
                let sub = factor * m[col][k];
                m[row][k] -= sub;
            }
            let sub = factor * b[col];
            b[row] -= sub;
        }
    }
    let mut x = [cz(0.0); 4];
    for row in (0..4).rev() {
        let mut acc = b[row];
        for k in row + 1..4 {
            acc -= m[row][k] * x[k];
        }
        x[row] = acc / m[row][row];
    }
    Ok(x)
}

/// Two-emitter amplitudes: closed-form one-excitation tier, then two 4×4 solves.
pub fn double_emitter_amplitudes(det: &ComplexDetunings, couplings: [f64; 2], drive: f64) -> Result<AmplitudeSet> {
    if det.emitters.len() != 2 {
        return Err(Error::InvalidArgument(format!(
            "two-emitter equations need exactly two emitters, got {}",
            det.emitters.len()
        )));
    }
    let dc = det.cavity;
    let (d1, d2) = (det.emitters[0], det.emitters[1]);
    let (g1, g2, e) = (cz(couplings[0]), cz(couplings[1]), cz(drive));
    let (s2, s3) = (cz(SQRT_2), cz(SQRT_3));
    let zero = cz(0.0);

    let den = check_denominator(dc * d1 * d2 - g1 * g1 * d2 - g2 * g2 * d1, "one-excitation denominator")?;
    let c2 = e * (-d1 * d2) / den;
    let c3 = e * g1 * d2 / den;
    let c4 = e * g2 * d1 / den;

    let two = solve_4x4(
        [
            [cz(2.0) * dc, s2 * g1, s2 * g2, zero],
            [s2 * g1, dc + d1, zero, g2],
            [s2 * g2, zero, dc + d2, g1],
            [zero, g2, g1, d1 + d2],
        ],
        [-e * s2 * c2, -e * c3, -e * c4, zero],
    )?;
    let [c5, c6, c7, c8] = two;

    let three = solve_4x4(
        [
            [cz(3.0) * dc, s3 * g1, s3 * g2, zero],
            [s3 * g1, cz(2.0) * dc + d1, zero, s2 * g2],
            [s3 * g2, zero, cz(2.0) * dc + d2, s2 * g1],
            [zero, s2 * g2, s2 * g1, dc + d1 + d2],
        ],
        [-e * s3 * c5, -e * s2 * c6, -e * s2 * c7, -e * c8],
    )?;
    let [c9, c10, c11, c12] = three;

    Ok(AmplitudeSet {
        amplitudes: vec![cz(1.0), c2, c3, c4, c5, c6, c7, c8, c9, c10, c11, c12],
        tiers: vec![0..1, 1..4, 4..8, 8..12],
        pathways: None,
    })
}

/// Equations-of-motion correlations for a two-emitter system.
pub fn eom_double(spec: &SystemSpec) -> Result<EomSolution> {
    if spec.n_emitters() != 2 {
        return Err(Error::InvalidArgument(format!(
            "eom_double needs exactly two emitters, got {}",
            spec.n_emitters()
        )));
    }
    let det = ComplexDetunings::from_spec(spec);
    let amplitudes =
        double_emitter_amplitudes(&det, [spec.emitters[0].g, spec.emitters[1].g], spec.drive_amplitude)?;
    let c = |k| amplitudes.c(k);
    let (g2, g3) = approximants(c(2), c(5), c(9))?;
    let mean_n = c(2).norm_sqr()
        + 2.0 * c(5).norm_sqr()
        + c(6).norm_sqr()
        + c(7).norm_sqr()
        + 3.0 * c(9).norm_sqr()
        + 2.0 * c(10).norm_sqr()
        + 2.0 * c(11).norm_sqr()
        + c(12).norm_sqr();
    Ok(EomSolution { amplitudes, g2, g3, mean_n })
}

/// Dispatches on the emitter count (one or two emitters).
pub fn eom_solve(spec: &SystemSpec) -> Result<EomSolution> {
    match spec.n_emitters() {
        1 => eom_single(spec),
        2 => eom_double(spec),
        n => Err(Error::InvalidArgument(format!(
            "equations-of-motion analysis supports one or two emitters, got {n}"
        ))),
    }
}

/// Wraps an angle into (−π, π].
pub fn wrap_phase(angle: f64) -> f64 {
    let mut x = angle.rem_euclid(2.0 * PI);
    if x > PI {
        x -= 2.0 * PI;
    }
    x
}

/// Phase difference between the direct and emitter-assisted two-photon pathways.
pub fn pathway_phase_from(det: &ComplexDetunings, g: f64, drive: f64) -> Result<f64> {
    let amps = single_emitter_amplitudes(det, g, drive)?;
    let p = amps.pathways.expect("single-emitter amplitudes carry pathways");
    let direct = p.a52 * amps.c(2);
    let assisted = p.a53 * amps.c(3);
    if direct.norm() == 0.0 || assisted.norm() == 0.0 {
        return Err(Error::UndefinedPhase);
    }
    Ok(wrap_phase(direct.arg() - assisted.arg()))
}

/// `δθ = Arg(A₅₂c₂) − Arg(A₅₃c₃)` at drive energy `omega`, in (−π, π].
pub fn pathway_phase(spec: &SystemSpec, omega: f64) -> Result<f64> {
    if spec.n_emitters() != 1 {
        return Err(Error::InvalidArgument(format!(
            "pathway phase needs exactly one emitter, got {}",
            spec.n_emitters()
        )));
    }
    let spec = spec.clone().with_drive_omega(omega);
    pathway_phase_from(&ComplexDetunings::from_spec(&spec), spec.emitters[0].g, spec.drive_amplitude)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::EmitterSpec;
    use approx::assert_abs_diff_eq;

    fn resonant_at(omega: f64) -> SystemSpec {
        SystemSpec::new(2.0, 0.35, omega).with_emitter(EmitterSpec::new("e1", 2.0, 0.08, 0.08))
    }

    /// Direct solve of a 2×2 system by Cramer's rule.
    fn cramer2(m: [[c64; 2]; 2], b: [c64; 2]) -> [c64; 2] {
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        [(b[0] * m[1][1] - m[0][1] * b[1]) / det, (m[0][0] * b[1] - b[0] * m[1][0]) / det]
    }

    #[test]
    fn decoupled_emitter_is_coherent() {
        let mut spec = resonant_at(1.93);
        spec.emitters[0].g = 0.0;
        let sol = eom_single(&spec).unwrap();
        assert_abs_diff_eq!(sol.g2, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sol.g3, 1.0, epsilon = 1e-12);
        let dc = ComplexDetunings::from_spec(&spec).cavity;
        let expected = cz(spec.drive_amplitude.powi(2)) / (cz(SQRT_2) * dc * dc);
        assert_abs_diff_eq!((sol.amplitudes.c(5) - expected).norm(), 0.0, epsilon = 1e-16);
    }

    #[test]
    fn tiers_match_direct_truncated_solves() {
        for omega in [1.85, 2.0, 2.07] {
            let spec = resonant_at(omega);
            let det = ComplexDetunings::from_spec(&spec);
            let (dc, de) = (det.cavity, det.emitters[0]);
            let (g, e) = (cz(0.08), cz(spec.drive_amplitude));
            let amps = single_emitter_amplitudes(&det, 0.08, spec.drive_amplitude).unwrap();
            let c = |k| amps.c(k);

            let [c2, c3] = cramer2([[dc, g], [g, de]], [-e, cz(0.0)]);
            assert!((c2 - c(2)).norm() < 1e-12 * c2.norm());
            assert!((c3 - c(3)).norm() < 1e-12 * c3.norm());

            let [c4, c5] = cramer2(
                [[dc + de, cz(SQRT_2) * g], [cz(SQRT_2) * g, cz(2.0) * dc]],
                [-e * c(3), -cz(SQRT_2) * e * c(2)],
            );
            assert!((c4 - c(4)).norm() < 1e-12 * c4.norm());
            assert!((c5 - c(5)).norm() < 1e-12 * c5.norm());

            let [c6, c7] = cramer2(
                [[cz(2.0) * dc + de, cz(SQRT_3) * g], [cz(SQRT_3) * g, cz(3.0) * dc]],
                [-cz(SQRT_2) * e * c(4), -cz(SQRT_3) * e * c(5)],
            );
            assert!((c6 - c(6)).norm() < 1e-12 * c6.norm());
            assert!((c7 - c(7)).norm() < 1e-12 * c7.norm());
        }
    }

    #[test]
    fn pathway_decomposition_reconstructs_two_photon_amplitude() {
        let spec = resonant_at(1.97);
        let amps = single_emitter_amplitudes(&ComplexDetunings::from_spec(&spec), 0.08, spec.drive_amplitude).unwrap();
        let p = amps.pathways.unwrap();
        let rebuilt = (p.a52 * amps.c(2) + p.a53 * amps.c(3)).norm_sqr();
        assert!((rebuilt - amps.c(5).norm_sqr()).abs() <= 1e-12 * amps.c(5).norm_sqr());
    }

    #[test]
    fn weak_drive_hierarchy() {
        for omega in [1.9, 2.0, 2.1] {
            let sol = eom_single(&resonant_at(omega)).unwrap();
            for ratio in sol.amplitudes.hierarchy_ratios() {
                assert!(ratio >= 5.0, "ratio {ratio} at {omega}");
            }
        }
    }

    #[test]
    fn resonant_pathways_are_out_of_phase() {
        let phase = pathway_phase(&resonant_at(2.0), 2.0).unwrap();
        assert!((wrap_phase(phase - PI)).abs() < 1e-9, "{phase}");
    }

    #[test]
    fn far_detuned_phase_is_finite() {
        let phase = pathway_phase(&resonant_at(2.0), 1.0).unwrap();
        assert!(phase.is_finite() && phase > -PI && phase <= PI);
    }

    #[test]
    fn conjugation_flips_phase() {
        for omega in [1.8, 1.95, 2.03, 2.2] {
            let spec = resonant_at(omega);
            let det = ComplexDetunings::from_spec(&spec);
            let phase = pathway_phase_from(&det, 0.08, spec.drive_amplitude).unwrap();
            let flipped = pathway_phase_from(&det.conjugate(), 0.08, spec.drive_amplitude).unwrap();
            assert!(wrap_phase(phase + flipped).abs() < 1e-12, "{phase} {flipped}");
        }
    }

    #[test]
    fn decoupled_emitter_phase_is_undefined() {
        let mut spec = resonant_at(2.0);
        spec.emitters[0].g = 0.0;
        assert_eq!(pathway_phase(&spec, 1.9), Err(Error::UndefinedPhase));
    }

    #[test]
    fn singular_parameters_detected() {
        // lossless resonant emitter with vanishing coupling: Δ′_c Δ′_e − g² = 0
        let spec = SystemSpec::new(2.0, 0.0, 2.0).with_emitter(EmitterSpec::new("e1", 2.0, 0.0, 0.0));
        assert!(matches!(eom_single(&spec), Err(Error::SingularParameters(_))));
        let singular = [[cz(1.0), cz(2.0), cz(0.0), cz(0.0)], [cz(2.0), cz(4.0), cz(0.0), cz(0.0)], [cz(0.0); 4], [cz(0.0); 4]];
        assert!(solve_4x4(singular, [cz(1.0); 4]).is_err());
    }

    #[test]
    fn pivoted_solve_matches_known_solution() {
        let m = [
            [cz(0.0), cz(1.0), cz(2.0), c64::new(0.0, 1.0)],
            [cz(3.0), cz(0.5), cz(0.0), cz(1.0)],
            [c64::new(1.0, -1.0), cz(0.0), cz(4.0), cz(0.0)],
            [cz(0.0), cz(2.0), cz(1.0), cz(5.0)],
        ];
        let x = [c64::new(1.0, 2.0), cz(-1.0), c64::new(0.0, 0.5), cz(3.0)];
        let mut b = [cz(0.0); 4];
        for i in 0..4 {
            for k in 0..4 {
                b[i] += m[i][k] * x[k];
            }
        }
        let sol = solve_4x4(m, b).unwrap();
        for i in 0..4 {
            assert!((sol[i] - x[i]).norm() < 1e-13);
        }
    }

    #[test]
    fn decoupled_second_emitter_matches_single() {
        for omega in [1.8, 1.9, 2.0, 2.1, 2.2] {
            let single = eom_single(&resonant_at(omega)).unwrap();
            let double = eom_double(&resonant_at(omega).with_emitter(EmitterSpec::new("e2", 2.04, 0.06, 0.0))).unwrap();
            assert!((single.g2 - double.g2).abs() <= 1e-10 * single.g2);
            assert!((single.g3 - double.g3).abs() <= 1e-10 * single.g3);
        }
    }

    #[test]
    fn second_emitter_gives_blockade() {
        let spec = resonant_at(2.0).with_emitter(EmitterSpec::new("e2", 2.04, 0.06, 0.08));
        let sol = eom_double(&spec).unwrap();
        assert!(sol.g2 < 1.0 && sol.g3 < 1.0, "g2 = {}, g3 = {}", sol.g2, sol.g3);
    }

    #[test]
    fn emitter_count_checked() {
        assert!(eom_single(&SystemSpec::new(2.0, 0.35, 2.0)).is_err());
        assert!(eom_double(&resonant_at(2.0)).is_err());
        assert!(eom_solve(&SystemSpec::new(2.0, 0.35, 2.0)).is_err());
    }

    #[test]
    fn phase_wrapping() {
        assert_abs_diff_eq!(wrap_phase(PI), PI);
        assert_abs_diff_eq!(wrap_phase(-PI), PI);
        assert_abs_diff_eq!(wrap_phase(3.0 * PI / 2.0), -PI / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(wrap_phase(0.25), 0.25);
    }
}
