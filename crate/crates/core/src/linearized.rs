//! The linearized operator `L₊ = (D−1)² + ω − N′(φ)` as a dense symmetric
//! matrix, its spectrum, and the scalars the stability argument needs.

use faer::{Mat, Side};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{power_integral, WaveParams};
use crate::grid::{Field, Grid};
use crate::solver::WaveProfile;
use crate::symbols::shifted_square;

/// First column of the circulant matrix of an even real multiplier,
/// symmetrized so the matrix is exactly symmetric.
pub fn even_circulant_column<M: Fn(f64) -> f64>(grid: &Grid, m: M) -> Vec<f64> {
    let spec = grid.modes().iter().map(|&xi| m(xi).into()).collect();
    let c = grid.ifft_real(spec);
    let n = c.len();
    (0..n).map(|k| 0.5 * (c[k] + c[(n - k) % n])).collect()
}

/// Circulant matrix of the spectral derivative (antisymmetric, Nyquist dropped).
pub fn derivative_matrix(grid: &Grid) -> Mat<f64> {
    let n = grid.n();
    let c = grid.derivative(&unit_impulse(n));
    let c: Vec<f64> = (0..n).map(|k| 0.5 * (c[k] - c[(n - k) % n])).collect();
    Mat::from_fn(n, n, |i, j| c[(i + n - j) % n])
}

fn unit_impulse(n: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[0] = 1.0;
    e
}

#[derive(Clone, Debug)]
pub struct OperatorMatrix {
    matrix: Mat<f64>,
    params: WaveParams,
    grid: Grid,
    potential: Vec<f64>,
}

impl OperatorMatrix {
    pub fn size(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &Mat<f64> {
        &self.matrix
    }

    pub fn params(&self) -> &WaveParams {
        &self.params
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// `N′(φ)` at the grid points.
    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.size();
        (0..n)
            .map(|i| (0..n).map(|j| self.matrix[(i, j)] * v[j]).sum())
            .collect()
    }

    pub fn symmetry_defect(&self) -> f64 {
        let n = self.size();
        let mut d = 0.0f64;
        for i in 0..n {
            for j in 0..i {
                d = d.max((self.matrix[(i, j)] - self.matrix[(j, i)]).abs());
            }
        }
        d
    }

    pub fn eigen(&self) -> Result<SymmetricEigen> {
        let e = self
            .matrix
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
        let values: Vec<f64> = (0..self.size()).map(|i| e.S()[i]).collect();
        Ok(SymmetricEigen {
            values,
            vectors: e.U().to_owned(),
        })
    }
}

/// Eigenvalues in ascending order with orthonormal (Euclidean) eigenvectors
/// as columns.
#[derive(Clone, Debug)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: Mat<f64>,
}

impl SymmetricEigen {
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn default_kernel_tol(&self) -> f64 {
        1e-6 * self.max_abs()
    }

    pub fn column(&self, k: usize) -> Vec<f64> {
        (0..self.vectors.nrows()).map(|i| self.vectors[(i, k)]).collect()
    }

    pub fn kernel_indices(&self, kernel_tol: f64) -> Vec<usize> {
        (0..self.values.len())
            .filter(|&k| self.values[k].abs() < kernel_tol)
            .collect()
    }
}

/// Matrix-free `L₊v` for the profile `w`.
pub fn lplus_apply(w: &WaveProfile, v: &[f64]) -> Vec<f64> {
    let g = w.grid();
    let omega = w.params.omega();
    let lin = g.apply_real_multiplier(v, |xi| shifted_square(xi) + omega);
    lin.iter()
        .zip(v)
        .zip(w.phi.values())
        .map(|((l, x), &ph)| l - w.params.nonlinear_derivative(ph) * x)
        .collect()
}

pub fn assemble_lplus(w: &WaveProfile) -> OperatorMatrix {
    let g = *w.grid();
    let n = g.n();
    let omega = w.params.omega();
    let col = even_circulant_column(&g, |xi| shifted_square(xi) + omega);
    let potential = w.params.potential_values(w.phi.values());
    let matrix = Mat::from_fn(n, n, |i, j| {
        let c = col[(i + n - j) % n];
        if i == j {
            c - potential[i]
        } else {
            c
        }
    });
    OperatorMatrix {
        matrix,
        params: w.params,
        grid: g,
        potential,
    }
}

/// `‖L₊φ′‖ / ‖φ′‖`
pub fn kernel_residual(w: &WaveProfile) -> Result<f64> {
    let d = w.phi.derivative();
    let dn = d.norm();
    // a constant profile differentiates to roundoff, not to an exact zero
    if !(dn > 1e-12 * w.phi.norm()) {
        return Err(Error::InvalidField(
            "profile has zero derivative; not a localized wave".into(),
        ));
    }
    Ok(w.grid().norm(&lplus_apply(w, d.values())) / dn)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundStateReport {
    pub mu: f64,
    #[serde(skip)]
    pub psi0: Option<Field>,
    pub morse_index: usize,
    pub kernel_dim_estimate: usize,
    pub kernel_tol: f64,
    /// `‖L₊ψ₀ − μψ₀‖` with `ψ₀` of unit Euclidean norm.
    pub eigen_residual: f64,
}

pub fn morse_from(a: &OperatorMatrix, eig: &SymmetricEigen, kernel_tol: f64) -> GroundStateReport {
    let mu = eig.values[0];
    let v0 = eig.column(0);
    let av = a.apply(&v0);
    let eigen_residual = av
        .iter()
        .zip(&v0)
        .map(|(x, y)| (x - mu * y).powi(2))
        .sum::<f64>()
        .sqrt();
    let scale = 1.0 / a.grid().norm(&v0);
    GroundStateReport {
        mu,
        psi0: Some(Field::from_parts(*a.grid(), v0.iter().map(|v| v * scale).collect())),
        morse_index: eig.values.iter().filter(|&&l| l < -kernel_tol).count(),
        kernel_dim_estimate: eig.kernel_indices(kernel_tol).len(),
        kernel_tol,
        eigen_residual,
    }
}

/// Full symmetric eigendecomposition and negative/null eigenvalue counts.
/// `kernel_tol = None` uses `1e−6·max|λ|`.
pub fn morse_index(a: &OperatorMatrix, kernel_tol: Option<f64>) -> Result<GroundStateReport> {
    let eig = a.eigen()?;
    let tol = kernel_tol.unwrap_or_else(|| eig.default_kernel_tol());
    Ok(morse_from(a, &eig, tol))
}

fn euclid_cos(a: &[f64], b: &[f64]) -> f64 {
    let ab: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let aa: f64 = a.iter().map(|x| x * x).sum();
    let bb: f64 = b.iter().map(|x| x * x).sum();
    ab / (aa * bb).sqrt()
}

/// Largest |cosine| between a numerical kernel vector and `φ′`.
pub fn kernel_alignment(w: &WaveProfile, eig: &SymmetricEigen, kernel_tol: f64) -> f64 {
    let d = w.phi.derivative();
    eig.kernel_indices(kernel_tol)
        .into_iter()
        .map(|k| euclid_cos(&eig.column(k), d.values()).abs())
        .fold(0.0, f64::max)
}

/// `⟨w, rhs⟩` where `L₊w = rhs` is solved on the complement of the numerical
/// kernel. Fails when `rhs` has a kernel component above 1e−6 (relative).
pub fn dprime_with_rhs(
    grid: &Grid,
    eig: &SymmetricEigen,
    rhs: &[f64],
    kernel_tol: f64,
) -> Result<f64> {
    let n = rhs.len();
    let rn = rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
    let r = Mat::from_fn(n, 1, |i, _| rhs[i]);
    let coeffs = eig.vectors.transpose() * &r;
    let mut acc = 0.0;
    for k in 0..n {
        let c = coeffs[(k, 0)];
        if eig.values[k].abs() < kernel_tol {
            if c.abs() > 1e-6 * rn {
                return Err(Error::IllPosed(format!(
                    "right-hand side has kernel component {:.3e} (relative) along eigenvalue {:.3e}",
                    c.abs() / rn,
                    eig.values[k]
                )));
            }
            continue;
        }
        acc += c * c / eig.values[k];
    }
    Ok(acc * grid.dx())
}

/// `⟨L₊⁻¹φ, φ⟩` with kernel deflation.
pub fn dprime(w: &WaveProfile, kernel_tol: Option<f64>) -> Result<f64> {
    let a = assemble_lplus(w);
    let eig = a.eigen()?;
    let tol = kernel_tol.unwrap_or_else(|| eig.default_kernel_tol());
    dprime_with_rhs(w.grid(), &eig, w.phi.values(), tol)
}

/// Smallest eigenvalue of `L₊` restricted to `φ⊥`.
pub fn projected_min_eigenvalue(a: &OperatorMatrix, phi: &Field, shift: f64) -> Result<f64> {
    let n = a.size();
    let qn = phi.values().iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(qn > 0.0) {
        return Err(Error::InvalidField("projection direction is zero".into()));
    }
    let q: Vec<f64> = phi.values().iter().map(|v| v / qn).collect();
    let aq = a.apply(&q);
    let qaq: f64 = aq.iter().zip(&q).map(|(x, y)| x * y).sum();
    let m = a.matrix();
    // (I − qqᵀ)A(I − qqᵀ) + s·qqᵀ; the φ direction is parked at eigenvalue s.
    let pap = Mat::from_fn(n, n, |i, j| {
        m[(i, j)] - q[i] * aq[j] - aq[i] * q[j] + (qaq + shift) * q[i] * q[j]
    });
    let vals = pap
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
    Ok(vals[0])
}

/// `⟨L₊φ, φ⟩` against `(2−p)∫φN(φ)`; returns `(lhs, rhs, relative)`.
pub fn quadratic_identity(w: &WaveProfile) -> (f64, f64, f64) {
    let g = w.grid();
    let lhs = g.inner(&lplus_apply(w, w.phi.values()), w.phi.values());
    let rhs = (2.0 - w.params.p()) * power_integral(&w.phi, &w.params);
    (lhs, rhs, (lhs - rhs).abs() / rhs.abs())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EtaReport {
    /// `⟨L₊η, η⟩` by direct application, `η = xφ′ + φ/2`.
    pub numeric: f64,
    /// `(ω+1)‖φ‖² − (p/4 + 4/p − 3/2)∫φN(φ)`
    pub closed_form: f64,
    pub relative_gap: f64,
    /// Relative defect of the commutator formula for `L₊η`.
    pub lplus_eta_residual: f64,
    /// `|⟨η, φ⟩| / ‖φ‖²`
    pub orthogonality: f64,
    /// `max |xφ′|` over the two boundary cells relative to `max |φ|`.
    pub boundary_ratio: f64,
    pub truncation_limited: bool,
}

pub fn eta_test(w: &WaveProfile) -> Result<EtaReport> {
    let g = *w.grid();
    let phi = w.phi.values();
    let p = w.params.p();
    let omega = w.params.omega();
    let n = g.n();
    let jc = (0..n)
        .max_by(|&a, &b| phi[a].abs().total_cmp(&phi[b].abs()))
        .unwrap_or(g.center_index());
    let len = 2.0 * g.half_length();
    // sawtooth coordinate centred on the peak
    let x: Vec<f64> = (0..n)
        .map(|j| {
            let d = g.x(j) - g.x(jc);
            d - len * (d / len + 0.5).floor()
        })
        .collect();
    let dphi = g.derivative(phi);
    let xdphi: Vec<f64> = x.iter().zip(&dphi).map(|(a, b)| a * b).collect();
    let eta: Vec<f64> = xdphi.iter().zip(phi).map(|(a, b)| a + 0.5 * b).collect();
    let leta = lplus_apply(w, &eta);
    let numeric = g.inner(&leta, &eta);
    let l2 = g.inner(phi, phi);
    let pw = power_integral(&w.phi, &w.params);
    let closed_form = (omega + 1.0) * l2 - (p / 4.0 + 4.0 / p - 1.5) * pw;
    let d2 = g.apply_real_multiplier(phi, |xi| -xi * xi);
    let dz = g.apply_real_multiplier(phi, f64::abs);
    let formula: Vec<f64> = (0..n)
        .map(|j| {
            (p - 6.0) / 2.0 * d2[j] + (p - 4.0) * dz[j] - (p - 2.0) * (omega + 1.0) / 2.0 * phi[j]
        })
        .collect();
    let diff: Vec<f64> = leta.iter().zip(&formula).map(|(a, b)| a - b).collect();
    let lplus_eta_residual = g.norm(&diff) / g.norm(&leta);
    let orthogonality = g.inner(&eta, phi).abs() / l2;
    let edge = (jc + n / 2) % n;
    let peak = w.phi.max_abs();
    let boundary_ratio = [edge, (edge + n - 1) % n, (edge + 1) % n]
        .iter()
        .map(|&j| xdphi[j].abs())
        .fold(0.0, f64::max)
        / peak;
    Ok(EtaReport {
        numeric,
        closed_form,
        relative_gap: (numeric - closed_form).abs() / closed_form.abs(),
        lplus_eta_residual,
        orthogonality,
        boundary_ratio,
        truncation_limited: boundary_ratio > 1e-6,
    })
}

/// Everything the stability verdict needs from `L₊`, computed once.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LinearizedAnalysis {
    pub ground: GroundStateReport,
    pub kernel_tol: f64,
    pub max_abs_eigenvalue: f64,
    pub kernel_alignment: f64,
    pub kernel_residual: f64,
    pub symmetry_defect: f64,
    pub dprime: std::result::Result<f64, String>,
    pub projected_min: f64,
    pub quadratic_identity_gap: f64,
}

impl LinearizedAnalysis {
    /// `projected_min ≥ −1e−8·max|λ|`
    pub fn projected_positive(&self) -> bool {
        self.projected_min >= -1e-8 * self.max_abs_eigenvalue
    }
}

pub fn analyze(w: &WaveProfile, kernel_tol: Option<f64>) -> Result<LinearizedAnalysis> {
    let a = assemble_lplus(w);
    let eig = a.eigen()?;
    let tol = kernel_tol.unwrap_or_else(|| eig.default_kernel_tol());
    let ground = morse_from(&a, &eig, tol);
    let dprime = dprime_with_rhs(w.grid(), &eig, w.phi.values(), tol).map_err(|e| e.to_string());
    let projected_min = projected_min_eigenvalue(&a, &w.phi, eig.max_abs())?;
    Ok(LinearizedAnalysis {
        kernel_alignment: kernel_alignment(w, &eig, tol),
        kernel_residual: kernel_residual(w)?,
        symmetry_defect: a.symmetry_defect(),
        max_abs_eigenvalue: eig.max_abs(),
        quadratic_identity_gap: quadratic_identity(w).2,
        ground,
        kernel_tol: tol,
        dprime,
        projected_min,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn zero_profile(n: usize) -> WaveProfile {
        let g = Grid::new(n, 8.0 * PI).unwrap();
        WaveProfile::from_field(Field::zeros(g), WaveParams::new(0.7, 3.0).unwrap())
    }

    #[test]
    fn symbol_only_operator_is_positive() {
        let w = zero_profile(64);
        let a = assemble_lplus(&w);
        assert!(a.symmetry_defect() == 0.0);
        let r = morse_index(&a, None).unwrap();
        assert_eq!(r.morse_index, 0);
        assert!(r.mu >= 0.7 - 1e-12);
    }

    #[test]
    fn matrix_matches_matrix_free() {
        let g = Grid::new(64, 10.0).unwrap();
        let phi = Field::from_fn(g, |x| 1.3 / (1.0 + x * x) * (x).cos()).unwrap();
        let w = WaveProfile::from_field(phi, WaveParams::new(1.5, 4.0).unwrap());
        let a = assemble_lplus(&w);
        let v: Vec<f64> = (0..64).map(|j| ((j * 37 % 11) as f64 - 5.0) / 7.0).collect();
        let dense = a.apply(&v);
        let free = lplus_apply(&w, &v);
        for (x, y) in dense.iter().zip(&free) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn potential_free_row_at_a_node() {
        let g = Grid::new(32, 5.0).unwrap();
        let phi = Field::from_fn(g, |x| if x == 0.0 { 0.0 } else { (-x * x).exp() * x }).unwrap();
        let w = WaveProfile::from_field(phi, WaveParams::new(1.0, 3.0).unwrap());
        let a = assemble_lplus(&w);
        let plain = assemble_lplus(&WaveProfile::from_field(Field::zeros(g), w.params));
        let j = g.center_index();
        for k in 0..32 {
            assert_eq!(a.matrix()[(j, k)], plain.matrix()[(j, k)]);
        }
    }

    #[test]
    fn kernel_vector_is_ill_posed() {
        let w = zero_profile(32);
        let a = assemble_lplus(&w);
        let eig = a.eigen().unwrap();
        let v = eig.column(3);
        // a tolerance above λ₃ declares that direction kernel
        let tol = eig.values[3] * 1.0001;
        assert!(matches!(
            dprime_with_rhs(w.grid(), &eig, &v, tol),
            Err(Error::IllPosed(_))
        ));
    }

    #[test]
    fn derivative_matrix_is_antisymmetric() {
        let g = Grid::new(16, 3.0).unwrap();
        let d = derivative_matrix(&g);
        for i in 0..16 {
            for j in 0..16 {
                assert_eq!(d[(i, j)], -d[(j, i)]);
            }
        }
    }
}
