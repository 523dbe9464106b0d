//! Independent checks on constructed factors and the consolidated report.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::flip::{flip_both_detailed, flip_both_dual, flip_poles, FlipSpec};
use crate::kernel::{multiset_distance, Matrix};
use crate::realization::{check_admissible, eval_spectrum, eval_tf, poles, zeros, ReferenceFamily, StateSpaceModel};
use crate::riccati::{self, solve_q};

pub const DEFAULT_SAMPLES: usize = 64;
/// Spectral and transfer-function agreement tolerance (relative to 1 + ‖Φ‖).
pub const DEFAULT_SPECTRAL_TOL: f64 = 1e-7;
/// Relative tolerance for eigenvalue multiset comparisons.
pub const STRUCTURE_RTOL: f64 = 1e-8;
/// Absolute tolerance on the path disagreement of the commutative diagram.
pub const DIAGRAM_TOL: f64 = 1e-7;

const POLE_CLEARANCE: f64 = 1e-6;
const ANGLE_SHIFT: f64 = 1e-3;

/// θ_k = (2k+1)π/N, each shifted by +1e-3 rad while it lies within 1e-6 of a pole.
pub fn sample_angles(samples: usize, avoid: &[Complex64]) -> Vec<f64> {
    let n = samples.max(1);
    (0..n)
        .map(|k| {
            let mut theta = (2 * k + 1) as f64 * core::f64::consts::PI / n as f64;
            for _ in 0..16 {
                let z = Complex64::new(libm::cos(theta), libm::sin(theta));
                if avoid.iter().all(|p| (z - p).norm() > POLE_CLEARANCE) {
                    break;
                }
                theta += ANGLE_SHIFT;
            }
            theta
        })
        .collect()
}

fn all_poles(models: &[&StateSpaceModel]) -> Vec<Complex64> {
    models.iter().flat_map(|m| poles(m).unwrap_or_default()).collect()
}

/// max_k ‖Φ₁(e^{iθ_k}) − Φ₂(e^{iθ_k})‖_F.
pub fn spectra_match(m1: &StateSpaceModel, m2: &StateSpaceModel, samples: usize) -> f64 {
    if m1.outputs() != m2.outputs() {
        return f64::INFINITY;
    }
    let angles = sample_angles(samples, &all_poles(&[m1, m2]));
    angles
        .iter()
        .map(|&t| match (eval_spectrum(m1, t), eval_spectrum(m2, t)) {
            (Ok(a), Ok(b)) => (a - b).norm(),
            _ => f64::INFINITY,
        })
        .fold(0.0, f64::max)
}

/// max_k ‖Φ(e^{iθ_k})‖_F, the scale that spectral tolerances multiply.
pub fn spectrum_scale(m: &StateSpaceModel, samples: usize) -> f64 {
    sample_angles(samples, &all_poles(&[m]))
        .iter()
        .map(|&t| eval_spectrum(m, t).map(|p| p.norm()).unwrap_or(f64::INFINITY))
        .fold(0.0, f64::max)
}

/// max_k ‖W₁(e^{iθ_k}) − W₂(e^{iθ_k})‖_F.
pub fn transfer_match(m1: &StateSpaceModel, m2: &StateSpaceModel, samples: usize) -> f64 {
    if m1.outputs() != m2.outputs() {
        return f64::INFINITY;
    }
    sample_angles(samples, &all_poles(&[m1, m2]))
        .iter()
        .map(|&t| {
            let z = Complex64::new(libm::cos(t), libm::sin(t));
            match (eval_tf(m1, z), eval_tf(m2, z)) {
                (Ok(a), Ok(b)) => (a - b).norm(),
                _ => f64::INFINITY,
            }
        })
        .fold(0.0, f64::max)
}

/// Eigenvalues of A agree as multisets (relative [`STRUCTURE_RTOL`]).
pub fn same_pole_structure(m1: &StateSpaceModel, m2: &StateSpaceModel) -> bool {
    match (poles(m1), poles(m2)) {
        (Ok(a), Ok(b)) => multiset_distance(&a, &b) <= STRUCTURE_RTOL,
        _ => false,
    }
}

/// Eigenvalues of Γ agree as multisets (relative [`STRUCTURE_RTOL`]).
pub fn same_zero_structure(m1: &StateSpaceModel, m2: &StateSpaceModel) -> bool {
    match (zeros(m1), zeros(m2)) {
        (Ok(a), Ok(b)) => multiset_distance(&a, &b) <= STRUCTURE_RTOL,
        _ => false,
    }
}

fn predicted(eigs: &[Vec<Complex64>], keep: &[usize]) -> Vec<Complex64> {
    eigs.iter()
        .enumerate()
        .flat_map(|(k, ev)| {
            let kept = keep.contains(&k);
            ev.iter().map(move |&z| if kept { z } else { z.inv() })
        })
        .collect()
}

/// Kept zeros together with the reciprocals of the flipped ones.
pub fn predicted_zeros(fam: &ReferenceFamily, spec: &FlipSpec) -> Vec<Complex64> {
    let eigs: Vec<_> = fam.zero_structure().blocks().iter().map(|b| b.eigenvalues()).collect();
    predicted(&eigs, &spec.zero_keep)
}

/// Kept poles together with the reciprocals of the flipped ones.
pub fn predicted_poles(fam: &ReferenceFamily, spec: &FlipSpec) -> Vec<Complex64> {
    let eigs: Vec<_> = fam.pole_structure().blocks().iter().map(|b| b.eigenvalues()).collect();
    predicted(&eigs, &spec.pole_keep)
}

/// ‖P_{Q+}⁻¹ − Q₊ − P₊⁻¹‖_F with P_{Q+}⁻¹ taken from the Stein equation of
/// the fully pole-flipped factor's own reference family.
pub fn check_anchor_identity(fam: &ReferenceFamily) -> Result<f64> {
    let q_plus_inv = riccati::q_plus_inverse(fam)?;
    let q_plus = solve_q(fam, &fam.pole_structure().zero_subspace())?;
    let w = flip_poles(fam, &q_plus)?;
    let fam_q = check_admissible(&w)?;
    let pq_plus_inv = fam_q.p_plus_inv();
    if !crate::kernel::is_nonsingular(pq_plus_inv) || !crate::kernel::is_nonsingular(&q_plus_inv) {
        return Err(Error::SingularAnchor);
    }
    Ok((pq_plus_inv - &q_plus.matrix - fam.p_plus_inv()).norm())
}

/// Transfer-function disagreement of the two construction paths.
pub fn check_diagram(fam: &ReferenceFamily, spec: &FlipSpec, samples: usize) -> Result<f64> {
    let lower = crate::flip::flip_both(fam, spec)?;
    let upper = flip_both_dual(fam, spec)?;
    Ok(transfer_match(&lower, &upper, samples))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize), serde(rename_all = "lowercase"))]
pub enum Verdict {
    Pass,
    Fail,
}

/// Verification bundle for one constructed (or supplied) factor.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct FlipReport {
    pub spectral_error: f64,
    /// Threshold the spectral error was compared with.
    pub spectral_tolerance: f64,
    /// Relative residuals residual/(1 + ‖X‖) of P, Q and P_Q.
    pub riccati_residuals: BTreeMap<String, f64>,
    /// Eigenvalues of A of the candidate as [re, im].
    pub poles: Vec<[f64; 2]>,
    /// Eigenvalues of Γ of the candidate as [re, im].
    pub zeros: Vec<[f64; 2]>,
    #[cfg_attr(feature = "serde", serde(skip_serializing_if = "Option::is_none"))]
    pub diagram_error: Option<f64>,
    #[cfg_attr(feature = "serde", serde(skip_serializing_if = "Option::is_none"))]
    pub same_pole_structure: Option<bool>,
    #[cfg_attr(feature = "serde", serde(skip_serializing_if = "Option::is_none"))]
    pub same_zero_structure: Option<bool>,
    pub verdict: Verdict,
    pub failures: Vec<String>,
}

/// Settings for [`full_report`] and [`compare_report`].
#[derive(Debug, Clone, Copy)]
pub struct ReportConfig {
    pub samples: usize,
    /// Relative spectral tolerance: error ≤ tol·(1 + max‖Φ_ref‖).
    pub tol: f64,
    /// Also build the factor along the dual path and compare.
    pub check_diagram: bool,
}

impl Default for ReportConfig {
    fn default() -> Self {
        Self { samples: DEFAULT_SAMPLES, tol: DEFAULT_SPECTRAL_TOL, check_diagram: true }
    }
}

fn pairs(ev: &[Complex64]) -> Vec<[f64; 2]> {
    ev.iter().map(|z| [z.re, z.im]).collect()
}

impl FlipReport {
    fn empty() -> Self {
        Self {
            spectral_error: f64::NAN,
            spectral_tolerance: f64::NAN,
            riccati_residuals: BTreeMap::new(),
            poles: Vec::new(),
            zeros: Vec::new(),
            diagram_error: None,
            same_pole_structure: None,
            same_zero_structure: None,
            verdict: Verdict::Fail,
            failures: Vec::new(),
        }
    }

    fn settle(mut self) -> Self {
        self.verdict = if self.failures.is_empty() { Verdict::Pass } else { Verdict::Fail };
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// Run [`crate::flip::flip_both`] for `spec` and check everything about the result.
///
/// Failures are recorded in the report rather than returned. The constructed
/// model is returned alongside when the flip itself succeeded.
pub fn full_report(fam: &ReferenceFamily, spec: &FlipSpec, cfg: &ReportConfig) -> (FlipReport, Option<StateSpaceModel>) {
    let mut report = FlipReport::empty();
    let outcome = match flip_both_detailed(fam, spec) {
        Ok(o) => o,
        Err(e) => {
            report.failures.push(format!("flip: {}", e.name()));
            return (report.settle(), None);
        }
    };
    for (name, sol) in [("P", &outcome.p), ("Q", &outcome.q), ("P_Q", &outcome.p_q)] {
        let rel = sol.relative_residual();
        report.riccati_residuals.insert(name.to_string(), rel);
        if rel > crate::kernel::TOL_RESIDUAL {
            report.failures.push(format!("residual_{name}"));
        }
    }
    let model = outcome.model;
    record_spectrum(&mut report, fam.model(), &model, cfg);

    match check_admissible(&model) {
        Ok(_) => {}
        Err(e) => report.failures.push(format!("admissible: {}", e.name())),
    }
    let z = zeros(&model).unwrap_or_default();
    let p = poles(&model).unwrap_or_default();
    if multiset_distance(&z, &predicted_zeros(fam, spec)) > STRUCTURE_RTOL {
        report.failures.push("zero_structure".to_string());
    }
    if multiset_distance(&p, &predicted_poles(fam, spec)) > STRUCTURE_RTOL {
        report.failures.push("pole_structure".to_string());
    }
    report.zeros = pairs(&z);
    report.poles = pairs(&p);

    if cfg.check_diagram {
        match flip_both_dual(fam, spec) {
            Ok(dual) => {
                let err = transfer_match(&model, &dual, cfg.samples);
                report.diagram_error = Some(err);
                if !(err <= DIAGRAM_TOL) {
                    report.failures.push("diagram".to_string());
                }
            }
            Err(e) => report.failures.push(format!("dual_path: {}", e.name())),
        }
    }
    (report.settle(), Some(model))
}

fn record_spectrum(report: &mut FlipReport, reference: &StateSpaceModel, candidate: &StateSpaceModel, cfg: &ReportConfig) {
    let err = spectra_match(reference, candidate, cfg.samples);
    let tol = cfg.tol * (1.0 + spectrum_scale(reference, cfg.samples));
    report.spectral_error = err;
    report.spectral_tolerance = tol;
    if !(err <= tol) {
        report.failures.push("spectrum".to_string());
    }
}

/// Compare a candidate factor against a reference: spectra plus pole and
/// zero structure. Only the spectral check decides the verdict.
pub fn compare_report(reference: &StateSpaceModel, candidate: &StateSpaceModel, cfg: &ReportConfig) -> FlipReport {
    let mut report = FlipReport::empty();
    record_spectrum(&mut report, reference, candidate, cfg);
    report.poles = pairs(&poles(candidate).unwrap_or_default());
    report.zeros = pairs(&zeros(candidate).unwrap_or_default());
    report.same_pole_structure = Some(same_pole_structure(reference, candidate));
    report.same_zero_structure = Some(same_zero_structure(reference, candidate));
    report.settle()
}

/// Helper for negative controls: B scaled by (1 + `fraction`).
pub fn perturb_b(m: &StateSpaceModel, fraction: f64) -> StateSpaceModel {
    let b: Matrix = m.b() * (1.0 + fraction);
    m.with_b(b).expect("scaling keeps B finite")
}
