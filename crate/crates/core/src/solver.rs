//! Travelling-wave profiles by two independent routes: a Petviashvili
//! fixed-point iteration, and normalized ascent on the variational quotients
//! followed by the rescaling that turns a maximizer into a wave.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{
    omega_from_alpha, power_integral, profile_residual, shifted_energy, Nonlinearity,
    WaveParams,
};
use crate::grid::{Field, Grid};
use crate::io;
use crate::symbols::{greens_function, shifted_square, spectral_bump};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialGuess {
    GreenSeed,
    SpectralBumpSeed,
    FileSeed(PathBuf),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub max_iter: usize,
    pub tol: f64,
    /// Petviashvili exponent; `None` means `(p−1)/(p−2)`.
    pub stab_exponent: Option<f64>,
    pub init: InitialGuess,
    /// Initial step of the quotient ascent.
    pub damping: f64,
    /// Retry with quotient maximization when the fixed point stalls.
    pub fallback: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iter: 2000,
            tol: 1e-10,
            stab_exponent: None,
            init: InitialGuess::GreenSeed,
            damping: 0.1,
            fallback: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || self.max_iter == 0 {
            return Err(Error::InvalidParams(format!(
                "solver needs tol > 0 and max_iter ≥ 1 (got tol = {}, max_iter = {})",
                self.tol, self.max_iter
            )));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::InvalidParams(format!(
                "damping = {} must lie in (0, 1]",
                self.damping
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    FixedPoint,
    QuotientMax,
    /// Built from a user-supplied field, not solved here.
    Supplied,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WaveProfile {
    pub phi: Field,
    pub params: WaveParams,
    pub residual: f64,
    pub iterations: usize,
    pub route: Route,
}

impl WaveProfile {
    /// Wraps an arbitrary field; the residual is measured, not enforced.
    pub fn from_field(phi: Field, params: WaveParams) -> WaveProfile {
        let residual = profile_residual(&phi, &params);
        WaveProfile {
            phi,
            params,
            residual,
            iterations: 0,
            route: Route::Supplied,
        }
    }

    pub fn grid(&self) -> &Grid {
        self.phi.grid()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Problem {
    /// `sup ∫uN(u) / (‖u‖^{p−2}(‖(D−1)u‖² + α‖u‖²))`
    Gn { alpha: f64 },
    /// `sup (∫uN(u))^{2/p} / (‖(D−1)u‖² + ω‖u‖²)`
    Sobolev { omega: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct MaximizerReport {
    /// Maximizer normalized to unit L² norm.
    pub varphi: Field,
    pub quotient_value: f64,
    pub wave: WaveProfile,
    pub alpha: Option<f64>,
    pub omega: f64,
    /// Energy-norm size of the preconditioned gradient at exit.
    pub gradient_norm: f64,
    pub iterations: usize,
    pub route_detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub k_estimate: f64,
    pub window: (f64, f64),
    pub plateau_variation: f64,
    /// `plateau_variation > 0.25`: the tail is dominated by truncation.
    pub truncation_limited: bool,
}

fn seed(grid: &Grid, cfg: &SolverConfig, green_omega: f64) -> Result<Field> {
    match &cfg.init {
        InitialGuess::GreenSeed => greens_function(grid, green_omega),
        InitialGuess::SpectralBumpSeed => {
            let eps = (8.0 * grid.dxi()).max(0.05);
            spectral_bump(grid, eps.min(0.2))
        }
        InitialGuess::FileSeed(path) => {
            let f = io::read_field_csv(path)?;
            if f.grid() != grid {
                return Err(Error::InvalidField(format!(
                    "seed {} lives on n = {}, L = {}; solver grid is n = {}, L = {}",
                    path.display(),
                    f.grid().n(),
                    f.grid().half_length(),
                    grid.n(),
                    grid.half_length()
                )));
            }
            if f.is_zero() {
                return Err(Error::InvalidField("seed field is identically zero".into()));
            }
            Ok(f)
        }
    }
}

/// Rolls the peak of `|φ|` to `x = 0`, fixes the sign where the equation
/// allows it, and symmetrizes when the profile is already even to 1e−8.
pub fn canonicalize(phi: &Field, params: &WaveParams) -> Field {
    let g = *phi.grid();
    let v = phi.values();
    let jmax = (0..v.len())
        .max_by(|&a, &b| v[a].abs().total_cmp(&v[b].abs()))
        .unwrap_or(0);
    let mut out = phi.roll(g.center_index() as isize - jmax as isize);
    let odd_symmetric = params.nonlinearity() == Nonlinearity::Modulus
        || (params.p().fract() == 0.0 && (params.p() as i64) % 2 == 0);
    if odd_symmetric && out.values()[g.center_index()] < 0.0 {
        out = out.scale(-1.0);
    }
    let refl = out.reflect();
    let n = out.norm();
    if n > 0.0 {
        let asym = out.sub(&refl).map(|d| d.norm()).unwrap_or(f64::INFINITY) / n;
        if asym < 1e-8 {
            out = out.combine(0.5, &refl, 0.5).unwrap_or(out);
        }
    }
    out
}

struct FixedPointOutcome {
    phi: Field,
    iterations: usize,
}

fn petviashvili(
    params: &WaveParams,
    start: Field,
    cfg: &SolverConfig,
) -> std::result::Result<FixedPointOutcome, (Error, Field)> {
    let g = *start.grid();
    let omega = params.omega();
    let p = params.p();
    let gamma = cfg.stab_exponent.unwrap_or((p - 1.0) / (p - 2.0));
    let symbol: Vec<f64> = g.modes().iter().map(|&xi| shifted_square(xi) + omega).collect();
    let n = g.n();
    let dx = g.dx();
    let mut u = start.into_values();
    let mut residual = f64::INFINITY;
    for it in 1..=cfg.max_iter {
        let uh = g.fft(&u);
        let lin_form: f64 =
            uh.iter().zip(&symbol).map(|(c, s)| s * c.norm_sqr()).sum::<f64>() * dx / n as f64;
        let au = g.ifft_real(uh.iter().zip(&symbol).map(|(c, s)| c * s).collect());
        let nl = params.nonlinear_values(&u);
        let nl_form = dx * nl.iter().zip(&u).map(|(a, b)| a * b).sum::<f64>();
        let unorm = g.norm(&u);
        if !(unorm > 1e-12) || !unorm.is_finite() {
            return Err((Error::CollapseToZero { iterations: it }, Field::zeros(g)));
        }
        let diff: Vec<f64> = au.iter().zip(&nl).map(|(a, b)| a - b).collect();
        residual = g.norm(&diff) / unorm;
        if residual <= cfg.tol {
            return Ok(FixedPointOutcome {
                phi: Field::from_parts(g, u),
                iterations: it - 1,
            });
        }
        if !(nl_form > 0.0) || !nl_form.is_finite() {
            return Err((Error::CollapseToZero { iterations: it }, Field::zeros(g)));
        }
        let factor = (lin_form / nl_form).powf(gamma);
        let nh = g.fft(&nl);
        u = g.ifft_real(
            nh.iter()
                .zip(&symbol)
                .map(|(c, s)| c * (factor / s))
                .collect(),
        );
    }
    let last = Field::new(g, u).unwrap_or_else(|_| Field::zeros(g));
    Err((
        Error::NonConvergence {
            iterations: cfg.max_iter,
            residual,
        },
        last,
    ))
}

/// Solves `(D−1)²φ + ωφ − N(φ) = 0` by Petviashvili iteration, falling back
/// to maximization of the Sobolev quotient at the same `ω` if the iteration
/// stalls and `cfg.fallback` is set.
pub fn solve_profile(params: &WaveParams, grid: &Grid, cfg: &SolverConfig) -> Result<WaveProfile> {
    cfg.validate()?;
    let start = seed(grid, cfg, params.omega())?;
    match petviashvili(params, start, cfg) {
        Ok(out) => Ok(finish(out.phi, params, out.iterations, Route::FixedPoint)),
        Err((err, _)) if !cfg.fallback => Err(err),
        Err((err, _)) => {
            match maximize_impl(Problem::Sobolev { omega: params.omega() }, params, grid, cfg) {
                Ok(report) => Ok(report.wave),
                Err(_) => Err(err),
            }
        }
    }
}

fn finish(phi: Field, params: &WaveParams, iterations: usize, route: Route) -> WaveProfile {
    let phi = canonicalize(&phi, params);
    let residual = profile_residual(&phi, params);
    WaveProfile {
        phi,
        params: *params,
        residual,
        iterations,
        route,
    }
}

/// Shared state of the normalized ascent: `A = (D−1)² + c` with `c = α` for
/// the Gagliardo–Nirenberg quotient and `c = ω` for the Sobolev quotient.
struct Ascent<'a> {
    grid: Grid,
    params: &'a WaveParams,
    problem: Problem,
    symbol: Vec<f64>,
}

struct Eval {
    value: f64,
    /// Riesz (energy-space) ascent direction, divided by the quotient value.
    direction: Vec<f64>,
}

impl<'a> Ascent<'a> {
    fn energy(&self, u: &[f64]) -> f64 {
        let f = self.grid.fft(u);
        f.iter()
            .zip(&self.symbol)
            .map(|(c, s)| s * c.norm_sqr())
            .sum::<f64>()
            * self.grid.dx()
            / self.grid.n() as f64
    }

    fn resolve(&self, v: &[f64]) -> Vec<f64> {
        let f = self.grid.fft(v);
        self.grid
            .ifft_real(f.iter().zip(&self.symbol).map(|(c, s)| c / s).collect())
    }

    fn normalize(&self, u: Vec<f64>) -> Vec<f64> {
        let e = self.energy(&u).sqrt();
        u.into_iter().map(|v| v / e).collect()
    }

    fn value(&self, u: &[f64]) -> f64 {
        let f = Field::from_parts(self.grid, u.to_vec());
        let p = self.params.p();
        let pw = power_integral(&f, self.params);
        let q = self.energy(u);
        match self.problem {
            Problem::Gn { .. } => pw / (f.norm_sq().powf((p - 2.0) / 2.0) * q),
            Problem::Sobolev { .. } => pw.signum() * pw.abs().powf(2.0 / p) / q,
        }
    }

    fn eval(&self, u: &[f64]) -> Eval {
        let f = Field::from_parts(self.grid, u.to_vec());
        let p = self.params.p();
        let pw = power_integral(&f, self.params);
        let q = self.energy(u);
        let l2 = f.norm_sq();
        let rn = self.resolve(&self.params.nonlinear_values(u));
        let (value, direction) = match self.problem {
            Problem::Gn { .. } => {
                let ru = self.resolve(u);
                let d = rn
                    .iter()
                    .zip(&ru)
                    .zip(u)
                    .map(|((a, b), c)| p * a / pw - (p - 2.0) * b / l2 - 2.0 * c / q)
                    .collect();
                (pw / (l2.powf((p - 2.0) / 2.0) * q), d)
            }
            Problem::Sobolev { .. } => {
                let d = rn
                    .iter()
                    .zip(u)
                    .map(|(a, c)| 2.0 * a / pw - 2.0 * c / q)
                    .collect();
                (pw.signum() * pw.abs().powf(2.0 / p) / q, d)
            }
        };
        Eval { value, direction }
    }

    /// Rescales a maximizer into a solution of the profile equation.
    fn to_wave(&self, u: &[f64]) -> Result<(Field, WaveParams)> {
        let f = Field::from_parts(self.grid, u.to_vec());
        let p = self.params.p();
        let pw = power_integral(&f, self.params);
        let q = self.energy(u);
        match self.problem {
            Problem::Gn { alpha } => {
                let c = self.value(u);
                let s = (p / (2.0 * c * f.norm_sq().powf((p - 2.0) / 2.0))).powf(1.0 / (p - 2.0));
                let omega = if p == 3.0 {
                    omega_from_alpha(&f, alpha, p)?
                } else {
                    alpha * p / 2.0 + (p - 2.0) / 2.0 * shifted_energy(&f) / f.norm_sq()
                };
                Ok((f.scale(s), self.params.with_omega(omega)?))
            }
            Problem::Sobolev { .. } => {
                let s = (q / pw).powf(1.0 / (p - 2.0));
                Ok((f.scale(s), *self.params))
            }
        }
    }
}

/// Maximizes the Gagliardo–Nirenberg (`p ≤ 6`) or Sobolev quotient by
/// preconditioned normalized ascent with backtracking, then rescales the
/// maximizer into a wave.
pub fn maximize_quotient(
    problem: Problem,
    p: f64,
    grid: &Grid,
    cfg: &SolverConfig,
) -> Result<MaximizerReport> {
    let omega_hint = match problem {
        Problem::Gn { alpha } => alpha,
        Problem::Sobolev { omega } => omega,
    };
    if let Problem::Gn { .. } = problem {
        if !(p > 2.0 && p <= 6.0) {
            return Err(Error::Range(format!(
                "the Gagliardo–Nirenberg route needs p in (2, 6], got {p}"
            )));
        }
    }
    let params = WaveParams::new(omega_hint, p)?;
    maximize_impl(problem, &params, grid, cfg)
}

fn maximize_impl(
    problem: Problem,
    params: &WaveParams,
    grid: &Grid,
    cfg: &SolverConfig,
) -> Result<MaximizerReport> {
    cfg.validate()?;
    let c = match problem {
        Problem::Gn { alpha } => alpha,
        Problem::Sobolev { omega } => omega,
    };
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "quotient constraint must be positive, got {c}"
        )));
    }
    let asc = Ascent {
        grid: *grid,
        params,
        problem,
        symbol: grid.modes().iter().map(|&xi| shifted_square(xi) + c).collect(),
    };
    let start = seed(grid, cfg, c)?;
    let mut u = asc.normalize(start.into_values());
    let mut ev = asc.eval(&u);
    if !(ev.value > 0.0) {
        return Err(Error::InvalidField(
            "seed has non-positive quotient; ascent cannot start".into(),
        ));
    }
    let mut tau = cfg.damping;
    let mut iterations = 0;
    let mut residual = f64::INFINITY;
    let mut gradient_norm = f64::INFINITY;
    while iterations < cfg.max_iter {
        gradient_norm = asc.energy(&ev.direction).sqrt();
        let (wave, wparams) = asc.to_wave(&u)?;
        residual = profile_residual(&wave, &wparams);
        if residual <= cfg.tol {
            break;
        }
        iterations += 1;
        let mut accepted = false;
        for _ in 0..40 {
            let trial: Vec<f64> = u
                .iter()
                .zip(&ev.direction)
                .map(|(a, d)| a + tau * d)
                .collect();
            let trial = asc.normalize(trial);
            let tv = asc.value(&trial);
            if tv.is_finite() && tv >= ev.value * (1.0 - 8.0 * f64::EPSILON) {
                u = trial;
                ev = asc.eval(&u);
                tau = (tau * 1.25).min(1.0);
                accepted = true;
                break;
            }
            tau *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if residual > cfg.tol {
        return Err(Error::NonConvergence {
            iterations,
            residual,
        });
    }
    let (wave_field, wparams) = asc.to_wave(&u)?;
    let wave = finish(wave_field, &wparams, iterations, Route::QuotientMax);
    let unit = Field::from_parts(*grid, u);
    let unit = unit.scale(1.0 / unit.norm());
    let varphi = canonicalize(&unit, params);
    let (alpha, detail) = match problem {
        Problem::Gn { alpha } => (
            Some(alpha),
            format!("gagliardo-nirenberg quotient, alpha = {alpha}, omega from the speed formula"),
        ),
        Problem::Sobolev { omega } => (None, format!("sobolev quotient at omega = {omega}")),
    };
    Ok(MaximizerReport {
        varphi,
        quotient_value: ev.value,
        omega: wparams.omega(),
        wave,
        alpha,
        gradient_norm,
        iterations,
        route_detail: detail,
    })
}

/// Constraint `α` whose rescaled Gagliardo–Nirenberg maximizer has speed
/// parameter `omega`, by bisection on `α ↦ ω_α` (monotonicity checked on
/// every bracket update).
pub fn alpha_for_omega(
    omega: f64,
    p: f64,
    grid: &Grid,
    cfg: &SolverConfig,
    omega_tol: f64,
) -> Result<MaximizerReport> {
    // ω_α ≥ pα/2, so α ≤ 2ω/p; at α → 0 the speed tends to a positive limit.
    let mut lo = 1e-3 * omega.min(1.0);
    let mut hi = 2.0 * omega / p;
    let eval = |a: f64| maximize_quotient(Problem::Gn { alpha: a }, p, grid, cfg);
    let mut r_lo = eval(lo)?;
    let mut r_hi = eval(hi)?;
    if !(r_lo.omega <= omega && omega <= r_hi.omega) {
        return Err(Error::Range(format!(
            "target ω = {omega} outside bracket [{}, {}]",
            r_lo.omega, r_hi.omega
        )));
    }
    for _ in 0..200 {
        let best = if (r_lo.omega - omega).abs() < (r_hi.omega - omega).abs() {
            &r_lo
        } else {
            &r_hi
        };
        if (best.omega - omega).abs() <= omega_tol {
            return Ok(best.clone());
        }
        let mid = 0.5 * (lo + hi);
        let r = eval(mid)?;
        if !(r_lo.omega <= r.omega && r.omega <= r_hi.omega) {
            return Err(Error::Range(format!(
                "α ↦ ω_α not monotone on [{lo}, {hi}]: ω({mid}) = {}",
                r.omega
            )));
        }
        if r.omega < omega {
            lo = mid;
            r_lo = r;
        } else {
            hi = mid;
            r_hi = r;
        }
    }
    Err(Error::NonConvergence {
        iterations: 200,
        residual: (r_lo.omega - omega).abs(),
    })
}

/// Tail window `L/4 ≤ |x| ≤ L/2`.
pub fn tail_window(grid: &Grid) -> (f64, f64) {
    (grid.half_length() / 4.0, grid.half_length() / 2.0)
}

/// `max_{L/4 ≤ |x| ≤ L/2} |f(x)|·(1 + x²)`.
pub fn weighted_tail_max(f: &Field) -> f64 {
    let (lo, hi) = tail_window(f.grid());
    f.grid()
        .coords()
        .iter()
        .zip(f.values())
        .filter(|(x, _)| x.abs() >= lo && x.abs() <= hi)
        .map(|(x, v)| v.abs() * (1.0 + x * x))
        .fold(0.0, f64::max)
}

/// Plateau of `x²|f(x)|` over the tail window.
pub fn decay_of_field(f: &Field) -> Result<DecayReport> {
    let g = f.grid();
    let (lo, hi) = tail_window(g);
    let peak = f.max_abs();
    let outer = f
        .values()
        .iter()
        .zip(g.coords())
        .filter(|(_, x)| x.abs() >= lo)
        .fold(0.0f64, |m, (v, _)| m.max(v.abs()));
    if peak == 0.0 || outer > 0.1 * peak {
        return Err(Error::NotTailDominated(format!(
            "|f| beyond L/4 reaches {outer:.3e} against peak {peak:.3e}"
        )));
    }
    let w: Vec<f64> = g
        .coords()
        .iter()
        .zip(f.values())
        .filter(|(x, _)| x.abs() >= lo && x.abs() <= hi)
        .map(|(x, v)| x * x * v.abs())
        .collect();
    let max = w.iter().cloned().fold(0.0, f64::max);
    let min = w.iter().cloned().fold(f64::INFINITY, f64::min);
    let plateau_variation = if min > 0.0 { max / min - 1.0 } else { f64::INFINITY };
    Ok(DecayReport {
        k_estimate: w.iter().sum::<f64>() / w.len() as f64,
        window: (lo, hi),
        plateau_variation,
        truncation_limited: !(plateau_variation <= 0.25),
    })
}

pub fn decay_constant(w: &WaveProfile) -> Result<DecayReport> {
    decay_of_field(&w.phi)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub status: String,
    pub quotient: Option<f64>,
    pub norm: Option<f64>,
    pub omega: Option<f64>,
    pub iterations: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub p: f64,
    pub rows: Vec<SweepRow>,
    /// `None` when fewer than two rows converged.
    pub quotient_decreasing: Option<bool>,
    pub norm_increasing: Option<bool>,
    /// Reported only; not a guaranteed property.
    pub omega_increasing: Option<bool>,
}

fn strictly(values: &[f64], increasing: bool) -> Option<bool> {
    (values.len() >= 2).then(|| {
        values
            .windows(2)
            .all(|w| if increasing { w[1] > w[0] } else { w[1] < w[0] })
    })
}

/// `(α, C_α, ‖φ_α‖, ω_α)` rows for increasing `α`; row failures are recorded
/// and do not abort the sweep.
pub fn sweep_alpha(alphas: &[f64], p: f64, grid: &Grid, cfg: &SolverConfig) -> Result<SweepTable> {
    if alphas.is_empty() {
        return Err(Error::InvalidParams("sweep needs at least one α".into()));
    }
    if alphas.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParams("α values must be strictly increasing".into()));
    }
    if !(p > 2.0 && p <= 6.0) {
        return Err(Error::Range(format!("sweep needs p in (2, 6], got {p}")));
    }
    let mut rows = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let row = match maximize_quotient(Problem::Gn { alpha }, p, grid, cfg) {
            Ok(r) => SweepRow {
                alpha,
                status: "ok".into(),
                quotient: Some(r.quotient_value),
                norm: Some(r.wave.phi.norm()),
                omega: Some(r.omega),
                iterations: Some(r.iterations),
            },
            Err(e) => SweepRow {
                alpha,
                status: format!("error: {e}"),
                quotient: None,
                norm: None,
                omega: None,
                iterations: None,
            },
        };
        rows.push(row);
    }
    let ok: Vec<&SweepRow> = rows.iter().filter(|r| r.status == "ok").collect();
    let col = |f: fn(&SweepRow) -> Option<f64>| ok.iter().filter_map(|r| f(r)).collect::<Vec<_>>();
    Ok(SweepTable {
        p,
        quotient_decreasing: strictly(&col(|r| r.quotient), false),
        norm_increasing: strictly(&col(|r| r.norm), true),
        omega_increasing: strictly(&col(|r| r.omega), true),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::pohozaev_residuals;
    use std::f64::consts::PI;

    #[test]
    fn rejects_no_wave_regime() {
        assert!(matches!(WaveParams::new(-0.5, 3.0), Err(Error::NoWaveRegime(_))));
    }

    #[test]
    fn gn_route_range() {
        let g = Grid::new(256, 16.0 * PI).unwrap();
        let r = maximize_quotient(Problem::Gn { alpha: 1.0 }, 8.0, &g, &SolverConfig::default());
        assert!(matches!(r, Err(Error::Range(_))));
    }

    #[test]
    fn small_fixed_point_solve() {
        let params = WaveParams::new(1.0, 3.0).unwrap();
        let g = Grid::new(512, 16.0 * PI).unwrap();
        let w = solve_profile(&params, &g, &SolverConfig::default()).unwrap();
        assert_eq!(w.route, Route::FixedPoint);
        assert!(w.residual <= 1e-10);
        assert_eq!(w.phi.values()[g.center_index()], w.phi.max_abs());
        let min = w.phi.values().iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(min < 0.0, "wave should change sign");
        assert!(pohozaev_residuals(&w.phi, &params).relative < 1e-3);
    }

    #[test]
    fn collapse_and_nonconvergence_are_reported() {
        let params = WaveParams::new(1.0, 3.0).unwrap();
        let g = Grid::new(256, 16.0 * PI).unwrap();
        let cfg = SolverConfig {
            max_iter: 2,
            fallback: false,
            ..SolverConfig::default()
        };
        assert!(matches!(
            solve_profile(&params, &g, &cfg),
            Err(Error::NonConvergence { iterations: 2, .. })
        ));
    }

    #[test]
    fn decay_rejects_gaussian() {
        let g = Grid::new(1024, 64.0).unwrap();
        let f = Field::from_fn(g, |x| (-x * x).exp()).unwrap();
        let r = decay_of_field(&f).unwrap();
        assert!(r.plateau_variation > 1.0 && r.truncation_limited);
        let wide = Field::from_fn(g, |x| (-x * x / 400.0).exp()).unwrap();
        assert!(matches!(decay_of_field(&wide), Err(Error::NotTailDominated(_))));
    }

    #[test]
    fn sweep_validation() {
        let g = Grid::new(256, 16.0 * PI).unwrap();
        let cfg = SolverConfig::default();
        assert!(sweep_alpha(&[], 3.0, &g, &cfg).is_err());
        assert!(sweep_alpha(&[1.0, 0.5], 3.0, &g, &cfg).is_err());
    }
}
