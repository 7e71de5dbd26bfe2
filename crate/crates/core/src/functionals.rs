//! Scalar functionals: norms and quadratic forms, the two variational
//! quotients, Pohozaev residuals, conserved quantities and speed formulas.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Field;
use crate::symbols::shifted_square;

/// Form of the nonlinearity `N(u)` in `(D−1)²φ + ωφ − N(φ) = 0`.
///
/// `Modulus` is `|u|^{p−2}u` (odd in `u`); `Power` is `u^{p−1}` for integer
/// `p`, the classical quadratic term when `p = 3`. The two coincide for even
/// integer `p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Nonlinearity {
    Modulus,
    Power,
}

impl Nonlinearity {
    pub fn default_for(p: f64) -> Nonlinearity {
        if p == 3.0 {
            Nonlinearity::Power
        } else {
            Nonlinearity::Modulus
        }
    }
}

#[derive(Deserialize)]
struct ParamSpec {
    omega: f64,
    p: f64,
    #[serde(default)]
    nonlinearity: Option<Nonlinearity>,
}

impl TryFrom<ParamSpec> for WaveParams {
    type Error = Error;
    fn try_from(s: ParamSpec) -> Result<WaveParams> {
        let w = WaveParams::new(s.omega, s.p)?;
        match s.nonlinearity {
            Some(k) => w.with_nonlinearity(k),
            None => Ok(w),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ParamSpec")]
pub struct WaveParams {
    omega: f64,
    p: f64,
    nonlinearity: Nonlinearity,
}

impl WaveParams {
    pub fn new(omega: f64, p: f64) -> Result<WaveParams> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::NoWaveRegime(format!(
                "ω = {omega}: travelling waves require ω > 0 (wave speed c > γ²/4)"
            )));
        }
        if !(p > 2.0 && p.is_finite()) {
            return Err(Error::InvalidParams(format!("p = {p} must exceed 2")));
        }
        Ok(WaveParams {
            omega,
            p,
            nonlinearity: Nonlinearity::default_for(p),
        })
    }

    pub fn with_nonlinearity(self, kind: Nonlinearity) -> Result<WaveParams> {
        if kind == Nonlinearity::Power && self.p.fract() != 0.0 {
            return Err(Error::InvalidParams(format!(
                "u^(p−1) needs integer p, got p = {}",
                self.p
            )));
        }
        Ok(WaveParams {
            nonlinearity: kind,
            ..self
        })
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn nonlinearity(&self) -> Nonlinearity {
        self.nonlinearity
    }

    pub fn with_omega(self, omega: f64) -> Result<WaveParams> {
        WaveParams::new(omega, self.p)?.with_nonlinearity(self.nonlinearity)
    }

    fn integer_exponent(&self) -> Option<i32> {
        (self.p.fract() == 0.0 && self.p < 64.0).then_some(self.p as i32)
    }

    /// `N(u)`
    #[inline]
    pub fn nonlinear(&self, u: f64) -> f64 {
        match (self.nonlinearity, self.integer_exponent()) {
            (Nonlinearity::Power, Some(m)) => u.powi(m - 1),
            (_, Some(m)) => u.abs().powi(m - 2) * u,
            _ if u == 0.0 => 0.0,
            _ => u.abs().powf(self.p - 2.0) * u,
        }
    }

    /// `N′(u)`, the potential of the linearized operator.
    #[inline]
    pub fn nonlinear_derivative(&self, u: f64) -> f64 {
        let q = self.p - 1.0;
        match (self.nonlinearity, self.integer_exponent()) {
            (Nonlinearity::Power, Some(m)) => q * u.powi(m - 2),
            (_, Some(m)) => q * u.abs().powi(m - 2),
            _ if u == 0.0 => 0.0,
            _ => q * u.abs().powf(self.p - 2.0),
        }
    }

    pub fn nonlinear_values(&self, u: &[f64]) -> Vec<f64> {
        u.iter().map(|&v| self.nonlinear(v)).collect()
    }

    pub fn potential_values(&self, u: &[f64]) -> Vec<f64> {
        u.iter().map(|&v| self.nonlinear_derivative(v)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub c: f64,
    pub gamma: f64,
}

/// `ω = 4c/γ² − 1`.
pub fn physical_to_normalized(pp: PhysicalParams) -> Result<f64> {
    if pp.gamma == 0.0 || !pp.gamma.is_finite() || !pp.c.is_finite() {
        return Err(Error::InvalidParams(format!(
            "γ = {} must be nonzero and finite",
            pp.gamma
        )));
    }
    let omega = 4.0 * pp.c / (pp.gamma * pp.gamma) - 1.0;
    if omega <= 0.0 {
        return Err(Error::NoWaveRegime(format!(
            "4c/γ² = {} ≤ 1: no travelling wave for c = {}, γ = {}",
            omega + 1.0,
            pp.c,
            pp.gamma
        )));
    }
    Ok(omega)
}

/// `‖u‖²`
pub fn l2_sq(u: &Field) -> f64 {
    u.norm_sq()
}

/// `‖(D−1)u‖²`
pub fn shifted_energy(u: &Field) -> f64 {
    u.grid().quadratic_form(u.values(), shifted_square)
}

/// `‖D^{1/2}u‖²`
pub fn half_derivative_energy(u: &Field) -> f64 {
    u.grid().quadratic_form(u.values(), f64::abs)
}

/// `‖u′‖²`
pub fn derivative_energy(u: &Field) -> f64 {
    u.grid().quadratic_form(u.values(), |xi| xi * xi)
}

/// `∫ u·N(u)`: equals `‖u‖_p^p` for the modulus form and `∫u³` for `u²`.
pub fn power_integral(u: &Field, params: &WaveParams) -> f64 {
    u.grid().dx()
        * u.values()
            .iter()
            .map(|&v| v * params.nonlinear(v))
            .sum::<f64>()
}

/// `‖u‖_p`
pub fn lp_norm(u: &Field, p: f64) -> f64 {
    let s: f64 = u.values().iter().map(|v| v.abs().powf(p)).sum();
    (u.grid().dx() * s).powf(1.0 / p)
}

/// `(D−1)²u + ωu − N(u)`
pub fn profile_operator(u: &Field, params: &WaveParams) -> Field {
    let g = *u.grid();
    let omega = params.omega();
    let lin = g.apply_real_multiplier(u.values(), |xi| shifted_square(xi) + omega);
    let values = lin
        .iter()
        .zip(u.values())
        .map(|(l, &v)| l - params.nonlinear(v))
        .collect();
    Field::from_parts(g, values)
}

/// `‖(D−1)²u + ωu − N(u)‖ / ‖u‖`
pub fn profile_residual(u: &Field, params: &WaveParams) -> f64 {
    let n = u.norm();
    if n == 0.0 {
        return 0.0;
    }
    profile_operator(u, params).norm() / n
}

fn require_nonzero(u: &Field) -> Result<()> {
    if u.is_zero() {
        return Err(Error::InvalidField("quotient of the zero field".into()));
    }
    Ok(())
}

/// `∫u·N(u) / (‖u‖^{p−2}(‖(D−1)u‖² + α‖u‖²))`.
///
/// The numerator follows the default nonlinearity for `p`, so at `p = 3` it
/// is the signed `∫u³`.
pub fn gn_quotient(u: &Field, alpha: f64, p: f64) -> Result<f64> {
    if !(p > 2.0 && p <= 6.0) {
        return Err(Error::Range(format!(
            "the Gagliardo–Nirenberg quotient is posed for p in (2, 6], got {p}"
        )));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParams(format!("α = {alpha} must be positive")));
    }
    require_nonzero(u)?;
    let params = WaveParams::new(1.0, p)?;
    let l2 = u.norm_sq();
    let num = power_integral(u, &params);
    Ok(num / (l2.powf((p - 2.0) / 2.0) * (shifted_energy(u) + alpha * l2)))
}

/// `(∫u·N(u))^{2/p} / (‖(D−1)u‖² + ω‖u‖²)` for the given wave parameters.
pub fn sobolev_quotient(u: &Field, params: &WaveParams) -> Result<f64> {
    sobolev_quotient_with(u, params.omega(), params.p(), params.nonlinearity())
}

/// [`sobolev_quotient`] without the `p > 2` restriction (`p ≥ 2`), used to
/// probe the quadratic limit. A negative power integral (possible only for
/// the signed `u²` form) yields a negative quotient.
pub fn sobolev_quotient_with(u: &Field, omega: f64, p: f64, kind: Nonlinearity) -> Result<f64> {
    if !(p >= 2.0 && p.is_finite()) || !(omega > 0.0) {
        return Err(Error::InvalidParams(format!(
            "Sobolev quotient needs p ≥ 2 and ω > 0, got p = {p}, ω = {omega}"
        )));
    }
    require_nonzero(u)?;
    let pi = if p == 2.0 {
        u.norm_sq()
    } else {
        let params = WaveParams::new(omega, p)?.with_nonlinearity(kind)?;
        power_integral(u, &params)
    };
    let num = pi.signum() * pi.abs().powf(2.0 / p);
    Ok(num / (shifted_energy(u) + omega * u.norm_sq()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PohozaevResiduals {
    pub r1: f64,
    pub r2: f64,
    pub relative: f64,
}

/// Residuals of the two Pohozaev identities
/// `‖φ′‖² − 2‖D^{1/2}φ‖² + (ω+1)‖φ‖² = P` and `‖φ′‖² − (ω+1)‖φ‖² + (2/p)P = 0`
/// with `P = ∫φ·N(φ)`; `relative` divides the larger one by `|P|`.
pub fn pohozaev_residuals(phi: &Field, params: &WaveParams) -> PohozaevResiduals {
    let d1 = derivative_energy(phi);
    let dh = half_derivative_energy(phi);
    let l2 = phi.norm_sq();
    let pw = power_integral(phi, params);
    let w1 = params.omega() + 1.0;
    let r1 = d1 - 2.0 * dh + w1 * l2 - pw;
    let r2 = d1 - w1 * l2 + (2.0 / params.p()) * pw;
    let big = r1.abs().max(r2.abs());
    let relative = if big == 0.0 { 0.0 } else { big / pw.abs() };
    PohozaevResiduals { r1, r2, relative }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Invariants {
    pub mass: f64,
    pub l2: f64,
    pub hamiltonian: f64,
}

/// `H[u] = ½‖(D−1)u‖² + (ω/2)‖u‖² − (1/p)∫u·N(u)`
pub fn hamiltonian(u: &Field, params: &WaveParams) -> f64 {
    0.5 * shifted_energy(u) + 0.5 * params.omega() * u.norm_sq()
        - power_integral(u, params) / params.p()
}

pub fn invariants(u: &Field, params: &WaveParams) -> Invariants {
    Invariants {
        mass: u.grid().dx() * u.values().iter().sum::<f64>(),
        l2: u.norm_sq(),
        hamiltonian: hamiltonian(u, params),
    }
}

/// `p/4 + 4/p − 1/ω − 5/2`; positive values guarantee instability.
pub fn instability_margin(params: &WaveParams) -> f64 {
    let p = params.p();
    p / 4.0 + 4.0 / p - 1.0 / params.omega() - 2.5
}

/// Speed parameter of the wave obtained by rescaling a maximizer of the
/// Gagliardo–Nirenberg quotient at constraint `α`.
pub fn omega_from_alpha(phi: &Field, alpha: f64, p: f64) -> Result<f64> {
    require_nonzero(phi)?;
    if !(p > 2.0 && p <= 6.0) {
        return Err(Error::Range(format!("p = {p} outside (2, 6]")));
    }
    let l2 = phi.norm_sq();
    let s = shifted_energy(phi);
    Ok(if p == 3.0 {
        alpha + (s + alpha * l2) / (2.0 * l2)
    } else {
        omega_from_ratio(alpha, p, s / l2)
    })
}

/// `pα/2 + ((p−2)/2)·‖(D−1)φ‖²/‖φ‖²`
pub fn omega_from_ratio(alpha: f64, p: f64, ratio: f64) -> f64 {
    p * alpha / 2.0 + (p - 2.0) / 2.0 * ratio
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalarParams {
    pub omega: Option<f64>,
    pub p: Option<f64>,
    pub alpha: Option<f64>,
}

/// JSON record for a single scalar output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalarRecord {
    pub name: String,
    pub value: f64,
    pub params: ScalarParams,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::symbols::spectral_bump;
    use std::f64::consts::PI;

    fn cos_on_pi() -> Field {
        Field::from_fn(Grid::new(64, PI).unwrap(), f64::cos).unwrap()
    }

    #[test]
    fn physical_map() {
        let pp = |c, gamma| PhysicalParams { c, gamma };
        assert!(matches!(
            physical_to_normalized(pp(1.0, 2.0)),
            Err(Error::NoWaveRegime(_))
        ));
        assert_eq!(physical_to_normalized(pp(1.0, 1.0)).unwrap(), 3.0);
        for gamma in [0.5, 1.0, 3.0] {
            let w = physical_to_normalized(pp(gamma * gamma / 2.0, gamma)).unwrap();
            assert!((w - 1.0).abs() < 1e-15);
        }
        assert!(physical_to_normalized(pp(1.0, 0.0)).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(WaveParams::new(-0.5, 3.0).is_err());
        assert!(WaveParams::new(0.0, 3.0).is_err());
        assert!(WaveParams::new(1.0, 2.0).is_err());
        let p = WaveParams::new(1.0, 3.5).unwrap();
        assert!(p.with_nonlinearity(Nonlinearity::Power).is_err());
        assert_eq!(WaveParams::new(1.0, 3.0).unwrap().nonlinearity(), Nonlinearity::Power);
        assert_eq!(WaveParams::new(1.0, 4.0).unwrap().nonlinearity(), Nonlinearity::Modulus);
    }

    #[test]
    fn nonlinearity_forms() {
        let sq = WaveParams::new(1.0, 3.0).unwrap();
        assert_eq!(sq.nonlinear(-2.0), 4.0);
        assert_eq!(sq.nonlinear_derivative(-2.0), -4.0);
        let md = sq.with_nonlinearity(Nonlinearity::Modulus).unwrap();
        assert_eq!(md.nonlinear(-2.0), -4.0);
        assert_eq!(md.nonlinear_derivative(-2.0), 4.0);
        let frac = WaveParams::new(1.0, 3.5).unwrap();
        assert_eq!(frac.nonlinear(0.0), 0.0);
        assert_eq!(frac.nonlinear_derivative(0.0), 0.0);
        assert!((frac.nonlinear(-4.0) + 32.0).abs() < 1e-12);
    }

    #[test]
    fn gn_quotient_cos_cubed_vanishes() {
        let q = gn_quotient(&cos_on_pi(), 1.0, 3.0).unwrap();
        assert!(q.abs() < 1e-14);
        assert!(gn_quotient(&cos_on_pi(), 1.0, 8.0).is_err());
        let z = Field::zeros(Grid::new(16, 1.0).unwrap());
        assert!(gn_quotient(&z, 1.0, 3.0).is_err());
    }

    #[test]
    fn pohozaev_zero_and_cos() {
        let params = WaveParams::new(1.7, 3.0).unwrap();
        let z = Field::zeros(Grid::new(32, 5.0).unwrap());
        let r = pohozaev_residuals(&z, &params);
        assert_eq!((r.r1, r.r2, r.relative), (0.0, 0.0, 0.0));

        let c = cos_on_pi();
        let md = params.with_nonlinearity(Nonlinearity::Modulus).unwrap();
        let r = pohozaev_residuals(&c, &md);
        // π − 2π + (ω+1)π − ∫|cos|³ = ωπ − 8/3
        let want = 1.7 * PI - 8.0 / 3.0;
        // the grid rule for |cos|³ is only algebraically accurate (kink)
        assert!((r.r1 - want).abs() < 1e-4, "{} vs {want}", r.r1);
        assert!((derivative_energy(&c) - PI).abs() < 1e-12);
        assert!((half_derivative_energy(&c) - PI).abs() < 1e-12);
        assert!((c.norm_sq() - PI).abs() < 1e-12);
    }

    #[test]
    fn margin_values() {
        let m = instability_margin(&WaveParams::new(10.0, 10.0).unwrap());
        assert!((m - 0.3).abs() < 1e-14);
        for p in [2.5, 3.0, 4.0, 6.0, 7.9] {
            for w in [0.1, 1.0, 1e6] {
                assert!(instability_margin(&WaveParams::new(w, p).unwrap()) < 0.0);
            }
        }
        let edge = instability_margin(&WaveParams::new(1e12, 8.0).unwrap());
        assert!(edge < 0.0 && edge > -1e-11);
    }

    #[test]
    fn omega_formulas() {
        // cos on L = π has ‖(D−1)u‖ = 0; use a field with unit ratio instead
        let g = Grid::new(64, PI).unwrap();
        let u = Field::from_fn(g, |x| (2.0 * x).cos()).unwrap();
        assert!((shifted_energy(&u) / u.norm_sq() - 1.0).abs() < 1e-12);
        let a = 0.8;
        let w3 = omega_from_alpha(&u, a, 3.0).unwrap();
        assert!((w3 - (a + (1.0 + a) / 2.0)).abs() < 1e-12);
        let w4 = omega_from_alpha(&u, a, 4.0).unwrap();
        assert!((w4 - (2.0 * a + 1.0)).abs() < 1e-12);
        assert!((w3 - omega_from_ratio(a, 3.0, 1.0)).abs() < 1e-12);
    }

    #[test]
    fn quadratic_sobolev_limit() {
        let g = Grid::new(16384, 800.0 * PI).unwrap();
        let omega = 0.5;
        let mut prev = 0.0;
        for eps in [0.1, 0.05, 0.025] {
            let u = spectral_bump(&g, eps).unwrap();
            let q = sobolev_quotient_with(&u, omega, 2.0, Nonlinearity::Modulus).unwrap();
            assert!(q > prev && q < 1.0 / omega);
            prev = q;
        }
        assert!((prev - 1.0 / omega).abs() < 0.01 / omega);
    }

    #[test]
    fn zero_invariants() {
        let params = WaveParams::new(1.0, 3.0).unwrap();
        let z = Field::zeros(Grid::new(32, 5.0).unwrap());
        let inv = invariants(&z, &params);
        assert_eq!((inv.mass, inv.l2, inv.hamiltonian), (0.0, 0.0, 0.0));
    }
}
