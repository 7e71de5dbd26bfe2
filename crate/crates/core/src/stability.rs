//! KdV-type eigenvalue problem `∂ₓL₊v = λv`, the instability index count,
//! and the stability verdict.

use faer::linalg::solvers::Solve;
use faer::{c64, Mat, Side};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::GrowthReport;
use crate::functionals::instability_margin;
use crate::grid::Field;
use crate::linearized::{analyze, assemble_lplus, derivative_matrix, LinearizedAnalysis};
use crate::solver::WaveProfile;

/// An eigenpair of `∂ₓL₊` with `Re λ > threshold`.
#[derive(Clone, Debug, PartialEq)]
pub struct UnstableMode {
    pub lambda: Complex64,
    /// Real and imaginary parts of the eigenvector (unit L² norm overall).
    pub re: Field,
    pub im: Field,
    /// `‖∂ₓL₊v − λv‖ / (|λ|‖v‖)`
    pub residual: f64,
    /// `|⟨v, φ⟩| / (‖v‖‖φ‖)`
    pub phi_overlap: f64,
    /// Eigenvector at `−λ`. Perturbations obey `v_t = −∂ₓL₊v`, so this is
    /// the direction that grows like `e^{λt}` under the flow.
    pub growing_re: Field,
    pub growing_im: Field,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectrumReport {
    #[serde(with = "pairs")]
    pub eigenvalues: Vec<Complex64>,
    pub max_real_part: f64,
    pub unstable_real: Vec<f64>,
    pub unstable_complex_pairs: usize,
    pub threshold: f64,
    /// `max_λ dist(−λ, σ) / max|λ|`
    pub reflection_defect: f64,
    /// `max_λ dist(λ̄, σ) / max|λ|`
    pub conjugation_defect: f64,
    /// Eigenvalue of smallest modulus and the cosine of its eigenvector with `φ′`.
    pub null_eigenvalue: f64,
    pub null_alignment: f64,
    /// Largest `|⟨v, φ⟩|/(‖v‖‖φ‖)` over unstable eigenvectors (0 when none).
    pub max_unstable_phi_overlap: f64,
    #[serde(skip)]
    pub unstable_modes: Vec<UnstableMode>,
}

mod pairs {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
        let v: Vec<[f64; 2]> = Vec::deserialize(d)?;
        Ok(v.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
    }
}

fn mirror_defect(ev: &[Complex64], map: impl Fn(Complex64) -> Complex64) -> f64 {
    let scale = ev.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    if scale == 0.0 {
        return 0.0;
    }
    ev.iter()
        .map(|&z| {
            let t = map(z);
            ev.iter().map(|&w| (w - t).norm()).fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
        / scale
}

/// Eigenvector of `K` for an (approximate) eigenvalue `lambda` by inverse
/// iteration on `K − λI`.
fn inverse_iteration(k: &Mat<f64>, lambda: Complex64) -> Vec<Complex64> {
    let n = k.nrows();
    // nudge off the computed eigenvalue so the factorization stays finite
    let shift = lambda + Complex64::new(1e-10 * (1.0 + lambda.norm()), 0.0);
    let shifted = Mat::<c64>::from_fn(n, n, |i, j| {
        let v = c64::new(k[(i, j)], 0.0);
        if i == j {
            v - c64::new(shift.re, shift.im)
        } else {
            v
        }
    });
    let lu = shifted.partial_piv_lu();
    let mut v = Mat::<c64>::from_fn(n, 1, |i, _| c64::new(1.0 + (i % 7) as f64 * 0.1, 0.0));
    for _ in 0..3 {
        v = lu.solve(&v);
        let nrm = (0..n).map(|i| v[(i, 0)].norm_sqr()).sum::<f64>().sqrt();
        for i in 0..n {
            v[(i, 0)] = v[(i, 0)] / nrm;
        }
    }
    // fix the phase so the largest entry is real and positive
    let jmax = (0..n)
        .max_by(|&a, &b| v[(a, 0)].norm().total_cmp(&v[(b, 0)].norm()))
        .unwrap_or(0);
    let ph = v[(jmax, 0)].conj() / v[(jmax, 0)].norm();
    (0..n)
        .map(|i| {
            let z = v[(i, 0)] * ph;
            Complex64::new(z.re, z.im)
        })
        .collect()
}

fn complex_cos(v: &[Complex64], f: &[f64]) -> f64 {
    let ip: Complex64 = v.iter().zip(f).map(|(a, b)| a.conj() * b).sum();
    let vv: f64 = v.iter().map(|a| a.norm_sqr()).sum();
    let ff: f64 = f.iter().map(|a| a * a).sum();
    ip.norm() / (vv * ff).sqrt()
}

/// Eigenvalues of the `n×n` product (spectral `∂ₓ`)·`L₊`, with unstable
/// eigenvectors. `threshold = None` uses `1e−6·max|λ(L₊)|`.
pub fn kdv_spectrum(w: &WaveProfile, threshold: Option<f64>) -> Result<SpectrumReport> {
    let a = assemble_lplus(w);
    let threshold = match threshold {
        Some(t) => t,
        None => {
            let vals = a
                .matrix()
                .self_adjoint_eigenvalues(Side::Lower)
                .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
            1e-6 * vals.iter().fold(0.0f64, |m, v| m.max(v.abs()))
        }
    };
    if !(threshold > 0.0) {
        return Err(Error::InvalidParams(format!("threshold = {threshold} must be positive")));
    }
    let g = *w.grid();
    let k = derivative_matrix(&g) * a.matrix();
    let eigenvalues: Vec<Complex64> = k
        .eigenvalues()
        .map_err(|e| Error::Eigensolver(format!("{e:?}")))?
        .into_iter()
        .map(|z| Complex64::new(z.re, z.im))
        .collect();
    let max_real_part = eigenvalues.iter().fold(f64::NEG_INFINITY, |m, z| m.max(z.re));
    let mut unstable_real: Vec<f64> = eigenvalues
        .iter()
        .filter(|z| z.re > threshold && z.im.abs() < threshold)
        .map(|z| z.re)
        .collect();
    unstable_real.sort_by(|a, b| b.total_cmp(a));
    let unstable_complex_pairs = eigenvalues
        .iter()
        .filter(|z| z.re > threshold && z.im >= threshold)
        .count();

    let dphi = g.derivative(w.phi.values());
    let null = eigenvalues
        .iter()
        .min_by(|a, b| a.norm().total_cmp(&b.norm()))
        .copied()
        .unwrap_or_default();
    // ∂ₓ also annihilates constants and the Nyquist mode, which adds the
    // kernel vectors L₊⁻¹1 and L₊⁻¹e_N; a rank-two correction acting only on
    // those two modes lifts them and leaves φ′ as the null direction.
    let n = g.n();
    let sign = |j: usize| if j % 2 == 0 { 1.0 } else { -1.0 };
    let lifted = Mat::from_fn(n, n, |i, j| {
        k[(i, j)] + (1.0 + sign(i) * sign(j)) / n as f64
    });
    let null_vec = inverse_iteration(&lifted, Complex64::new(0.0, 0.0));
    let null_alignment = complex_cos(&null_vec, &dphi);

    let mut unstable_modes = Vec::new();
    for &lambda in eigenvalues
        .iter()
        .filter(|z| z.re > threshold && z.im > -threshold)
    {
        let v = inverse_iteration(&k, lambda);
        let kv: Vec<Complex64> = (0..g.n())
            .map(|i| (0..g.n()).map(|j| v[j] * k[(i, j)]).sum())
            .collect();
        let residual = kv
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - lambda * b).norm_sqr())
            .sum::<f64>()
            .sqrt()
            / lambda.norm();
        let scale = 1.0 / g.dx().sqrt();
        let growing = inverse_iteration(&k, -lambda);
        unstable_modes.push(UnstableMode {
            lambda,
            re: Field::new(g, v.iter().map(|z| z.re * scale).collect())?,
            im: Field::new(g, v.iter().map(|z| z.im * scale).collect())?,
            residual,
            phi_overlap: complex_cos(&v, w.phi.values()),
            growing_re: Field::new(g, growing.iter().map(|z| z.re * scale).collect())?,
            growing_im: Field::new(g, growing.iter().map(|z| z.im * scale).collect())?,
        });
    }
    unstable_modes.sort_by(|a, b| b.lambda.re.total_cmp(&a.lambda.re));
    Ok(SpectrumReport {
        reflection_defect: mirror_defect(&eigenvalues, |z| -z),
        conjugation_defect: mirror_defect(&eigenvalues, |z| z.conj()),
        max_unstable_phi_overlap: unstable_modes
            .iter()
            .map(|m| m.phi_overlap)
            .fold(0.0, f64::max),
        null_eigenvalue: null.norm(),
        null_alignment,
        eigenvalues,
        max_real_part,
        unstable_real,
        unstable_complex_pairs,
        threshold,
        unstable_modes,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Stable,
    Unstable,
    Indeterminate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexReport {
    pub n_lplus: usize,
    /// Number of negative eigenvalues of the 1×1 matrix `⟨L₊⁻¹φ, φ⟩`.
    pub n_d: Option<usize>,
    pub rhs: Option<i64>,
    pub k_r_observed: usize,
    pub k_c_observed: usize,
    pub dprime: Option<f64>,
    pub verdict: Verdict,
    pub reason: String,
}

/// Index bookkeeping `k_r + 2k_c + 2k_i⁻ = n(L₊) − n(D)` from precomputed
/// pieces.
pub fn index_from(w: &WaveProfile, lin: &LinearizedAnalysis, spec: &SpectrumReport) -> IndexReport {
    let n_lplus = lin.ground.morse_index;
    let k_r_observed = spec.unstable_real.len();
    let k_c_observed = spec.unstable_complex_pairs;
    let phi_sq = w.phi.norm_sq();
    let (dprime, degenerate) = match &lin.dprime {
        Ok(d) => (Some(*d), d.abs() < 1e-8 * phi_sq),
        Err(_) => (None, true),
    };
    if degenerate {
        let reason = match &lin.dprime {
            Ok(d) => format!("⟨L₊⁻¹φ,φ⟩ = {d:.3e} is numerically zero; generalized kernel enlarges"),
            Err(e) => format!("⟨L₊⁻¹φ,φ⟩ unavailable: {e}"),
        };
        let verdict = if k_r_observed >= 1 {
            Verdict::Unstable
        } else {
            Verdict::Indeterminate
        };
        return IndexReport {
            n_lplus,
            n_d: None,
            rhs: None,
            k_r_observed,
            k_c_observed,
            dprime,
            verdict,
            reason,
        };
    }
    let d = dprime.unwrap_or_default();
    let n_d = usize::from(d < 0.0);
    let rhs = n_lplus as i64 - n_d as i64;
    let stable_spectrum = spec.max_real_part < spec.threshold;
    let (verdict, reason) = if k_r_observed >= 1 {
        (
            Verdict::Unstable,
            format!("{k_r_observed} real unstable eigenvalue(s); count bound n(L₊) − n(D) = {rhs}"),
        )
    } else if (rhs == 0 || lin.projected_positive()) && stable_spectrum {
        (
            Verdict::Stable,
            format!(
                "n(L₊) − n(D) = {rhs}, projected minimum {:.3e}, max Re λ = {:.3e}",
                lin.projected_min, spec.max_real_part
            ),
        )
    } else {
        (
            Verdict::Indeterminate,
            format!(
                "n(L₊) − n(D) = {rhs} with no real unstable eigenvalue observed; max Re λ = {:.3e}",
                spec.max_real_part
            ),
        )
    };
    IndexReport {
        n_lplus,
        n_d: Some(n_d),
        rhs: Some(rhs),
        k_r_observed,
        k_c_observed,
        dprime,
        verdict,
        reason,
    }
}

pub fn index_count(w: &WaveProfile) -> Result<IndexReport> {
    let lin = analyze(w, None)?;
    let spec = kdv_spectrum(w, Some(1e-6 * lin.max_abs_eigenvalue))?;
    Ok(index_from(w, &lin, &spec))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerdictReport {
    pub verdict: Verdict,
    pub projected_min: f64,
    pub projected_positive: bool,
    pub max_real_part: f64,
    pub threshold: f64,
    pub kernel_residual: f64,
    pub unstable_real: Vec<f64>,
    pub morse_index: usize,
    pub dprime: Option<f64>,
    pub instability_margin: f64,
    pub growth: Option<GrowthReport>,
    pub note: String,
}

pub fn verdict_from(
    w: &WaveProfile,
    lin: &LinearizedAnalysis,
    spec: &SpectrumReport,
    growth: Option<GrowthReport>,
) -> VerdictReport {
    let positive = lin.projected_positive();
    let (verdict, note) = if !spec.unstable_real.is_empty() {
        (
            Verdict::Unstable,
            format!("real eigenvalue λ = {:.6e} of ∂ₓL₊", spec.unstable_real[0]),
        )
    } else if positive && spec.max_real_part < spec.threshold {
        (
            Verdict::Stable,
            "L₊ is nonnegative on φ⊥ and the spectrum lies on the imaginary axis".to_string(),
        )
    } else {
        (
            Verdict::Indeterminate,
            "neither projected positivity nor a real unstable eigenvalue".to_string(),
        )
    };
    VerdictReport {
        verdict,
        projected_min: lin.projected_min,
        projected_positive: positive,
        max_real_part: spec.max_real_part,
        threshold: spec.threshold,
        kernel_residual: lin.kernel_residual,
        unstable_real: spec.unstable_real.clone(),
        morse_index: lin.ground.morse_index,
        dprime: lin.dprime.as_ref().ok().copied(),
        instability_margin: instability_margin(&w.params),
        growth,
        note,
    }
}

pub fn verdict(w: &WaveProfile) -> Result<VerdictReport> {
    let lin = analyze(w, None)?;
    let spec = kdv_spectrum(w, Some(1e-6 * lin.max_abs_eigenvalue))?;
    Ok(verdict_from(w, &lin, &spec, None))
}
