//! Time integration of `u_t + ∂ₓ((D−1)²u + ωu − N(u)) = 0` by a fourth-order
//! integrating-factor Runge–Kutta scheme, plus perturbed-wave experiments
//! that measure growth rates modulo translation.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{invariants, Invariants, WaveParams};
use crate::grid::{Field, Grid};
use crate::solver::WaveProfile;
use crate::stability::UnstableMode;
use crate::symbols::shifted_square;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvolveConfig {
    pub dt: f64,
    pub t_final: f64,
    pub save_every: usize,
    pub cfl_safety: f64,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        EvolveConfig {
            dt: 1e-3,
            t_final: 1.0,
            save_every: 100,
            cfl_safety: 0.5,
        }
    }
}

impl EvolveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.t_final > 0.0 && self.dt.is_finite() && self.t_final.is_finite())
        {
            return Err(Error::InvalidParams(format!(
                "dt = {} and t_final = {} must be positive",
                self.dt, self.t_final
            )));
        }
        if self.save_every == 0 {
            return Err(Error::InvalidParams("save_every must be at least 1".into()));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return Err(Error::InvalidParams(format!(
                "cfl_safety = {} must lie in (0, 1]",
                self.cfl_safety
            )));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        ((self.t_final / self.dt).round() as usize).max(1)
    }
}

/// Step-size limit of the explicit stages: the RK4 stability interval on
/// the imaginary axis (`2√2`) over `ξ_max·max|N′(u)|`.
pub fn stability_bound(u: &Field, params: &WaveParams) -> f64 {
    let speed = u
        .values()
        .iter()
        .fold(0.0f64, |m, &v| m.max(params.nonlinear_derivative(v).abs()));
    if speed == 0.0 {
        return f64::INFINITY;
    }
    2.0 * std::f64::consts::SQRT_2 / (u.grid().max_wavenumber() * speed)
}

/// One integrating-factor RK4 step of fixed size, acting on Fourier
/// coefficients.
pub struct Stepper {
    grid: Grid,
    params: WaveParams,
    dt: f64,
    linear_only: bool,
    ik: Vec<Complex64>,
    e_full: Vec<Complex64>,
    e_half: Vec<Complex64>,
}

impl Stepper {
    pub fn new(grid: Grid, params: WaveParams, dt: f64, linear_only: bool) -> Stepper {
        let nyq = grid.nyquist_index();
        let ik: Vec<Complex64> = (0..grid.n())
            .map(|k| {
                if k == nyq {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(0.0, grid.wavenumber(k))
                }
            })
            .collect();
        let omega = params.omega();
        let lin: Vec<Complex64> = (0..grid.n())
            .map(|k| -ik[k] * (shifted_square(grid.wavenumber(k)) + omega))
            .collect();
        Stepper {
            grid,
            params,
            dt,
            linear_only,
            e_full: lin.iter().map(|l| (l * dt).exp()).collect(),
            e_half: lin.iter().map(|l| (l * (0.5 * dt)).exp()).collect(),
            ik,
        }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// `iξ·F[N(u)]`
    fn nonlinear(&self, uh: &[Complex64]) -> Vec<Complex64> {
        if self.linear_only {
            return vec![Complex64::new(0.0, 0.0); uh.len()];
        }
        let u = self.grid.ifft_real(uh.to_vec());
        let nl = self.grid.fft(&self.params.nonlinear_values(&u));
        nl.iter().zip(&self.ik).map(|(a, b)| a * b).collect()
    }

    pub fn step(&self, uh: &[Complex64]) -> Vec<Complex64> {
        let h = self.dt;
        let (e, e2) = (&self.e_full, &self.e_half);
        let n = uh.len();
        let k1 = self.nonlinear(uh);
        let u2: Vec<Complex64> = (0..n).map(|i| e2[i] * (uh[i] + 0.5 * h * k1[i])).collect();
        let k2 = self.nonlinear(&u2);
        let u3: Vec<Complex64> = (0..n).map(|i| e2[i] * uh[i] + 0.5 * h * k2[i]).collect();
        let k3 = self.nonlinear(&u3);
        let u4: Vec<Complex64> = (0..n).map(|i| e[i] * uh[i] + h * e2[i] * k3[i]).collect();
        let k4 = self.nonlinear(&u4);
        (0..n)
            .map(|i| {
                e[i] * uh[i]
                    + h / 6.0 * (e[i] * k1[i] + 2.0 * e2[i] * (k2[i] + k3[i]) + k4[i])
            })
            .collect()
    }

    /// Advances a real field by `steps` steps.
    pub fn advance(&self, u: &Field, steps: usize) -> Result<Field> {
        let mut uh = self.grid.fft(u.values());
        for _ in 0..steps {
            uh = self.step(&uh);
        }
        Field::new(self.grid, self.grid.ifft_real(uh))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HaltReason {
    BlowUp,
    NonFinite,
}

/// `max_t |Q(t) − Q(0)| / max(|Q(0)|, 1)` over saved frames.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DriftRecord {
    pub mass: f64,
    pub l2: f64,
    pub hamiltonian: f64,
}

#[derive(Clone, Debug)]
pub struct EvolveResult {
    pub times: Vec<f64>,
    pub frames: Vec<Field>,
    pub drift: DriftRecord,
    pub initial: Invariants,
    pub final_state: Field,
    pub final_time: f64,
    pub steps_taken: usize,
    pub halted: Option<HaltReason>,
}

/// Runs the stepper and calls `visit(t, u)` at `t = 0`, every `save_every`
/// steps, and at the end. `visit` returns `false` to stop early.
fn integrate<F>(u0: &Field, params: &WaveParams, cfg: &EvolveConfig, mut visit: F) -> Result<(Field, f64, usize, Option<HaltReason>)>
where
    F: FnMut(f64, &Field) -> bool,
{
    cfg.validate()?;
    let bound = stability_bound(u0, params);
    if cfg.dt > cfg.cfl_safety * bound {
        return Err(Error::Cfl {
            dt: cfg.dt,
            bound: cfg.cfl_safety * bound,
        });
    }
    let g = *u0.grid();
    let steps = cfg.steps();
    let dt = cfg.t_final / steps as f64;
    let stepper = Stepper::new(g, *params, dt, false);
    let cap = 1e6 * u0.max_abs().max(f64::MIN_POSITIVE);
    let mut uh = g.fft(u0.values());
    let mut current = u0.clone();
    if !visit(0.0, &current) {
        return Ok((current, 0.0, 0, None));
    }
    for s in 1..=steps {
        uh = stepper.step(&uh);
        let t = s as f64 * dt;
        if s % cfg.save_every == 0 || s == steps {
            let vals = g.ifft_real(uh.clone());
            if vals.iter().any(|v| !v.is_finite()) {
                return Ok((current, t, s, Some(HaltReason::NonFinite)));
            }
            current = Field::from_parts(g, vals);
            if current.max_abs() > cap {
                return Ok((current, t, s, Some(HaltReason::BlowUp)));
            }
            if !visit(t, &current) {
                return Ok((current, t, s, None));
            }
        }
    }
    Ok((current, cfg.t_final, steps, None))
}

fn rel_drift(q: f64, q0: f64) -> f64 {
    (q - q0).abs() / q0.abs().max(1.0)
}

pub fn evolve(u0: &Field, params: &WaveParams, cfg: &EvolveConfig) -> Result<EvolveResult> {
    let initial = invariants(u0, params);
    let mut times = Vec::new();
    let mut frames = Vec::new();
    let mut drift = DriftRecord::default();
    let (final_state, final_time, steps_taken, halted) = integrate(u0, params, cfg, |t, u| {
        let q = invariants(u, params);
        drift.mass = drift.mass.max(rel_drift(q.mass, initial.mass));
        drift.l2 = drift.l2.max(rel_drift(q.l2, initial.l2));
        drift.hamiltonian = drift.hamiltonian.max(rel_drift(q.hamiltonian, initial.hamiltonian));
        times.push(t);
        frames.push(u.clone());
        true
    })?;
    Ok(EvolveResult {
        times,
        frames,
        drift,
        initial,
        final_state,
        final_time,
        steps_taken,
        halted,
    })
}

/// Band-limited (`|ξ| ≤ ξ_max/4`) seeded noise of unit L² norm.
pub fn seeded_noise(grid: &Grid, seed: u64) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = grid.n();
    let cut = grid.max_wavenumber() / 4.0;
    let mut spec = vec![Complex64::new(0.0, 0.0); n];
    for k in 1..n / 2 {
        if grid.wavenumber(k) > cut {
            break;
        }
        let z = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        spec[k] = z;
        spec[n - k] = z.conj();
    }
    let f = Field::from_parts(*grid, grid.ifft_real(spec));
    f.scale(1.0 / f.norm())
}

#[derive(Clone, Debug, PartialEq)]
pub enum PerturbationMode {
    SeededNoise { seed: u64, amplitude: f64 },
    EigenDirection { amplitude: f64, mode: UnstableMode },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthVerdict {
    /// Exponential growth fitted with `r² > 0.99`.
    Growth,
    /// `d(t)` never left `3×` its initial level.
    NoGrowth,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub lambda_fit: Option<f64>,
    pub fit_window: Option<(f64, f64)>,
    pub fit_r2: Option<f64>,
    pub reference_lambda: Option<f64>,
    pub relative_error: Option<f64>,
    pub verdict: GrowthVerdict,
    pub d_initial: f64,
    pub d_max: f64,
    /// `(t, d(t))` with `d(t) = min_s ‖u(t, · − s) − φ‖`.
    pub series: Vec<(f64, f64)>,
}

fn linear_fit(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let stt: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let sty: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sty / stt;
    let r2 = if syy == 0.0 { 1.0 } else { sty * sty / (stt * syy) };
    (slope, r2)
}

/// Evolves `φ + ε·direction` and fits `log d(t)` over the window
/// `10·d(0) ≤ d ≤ ‖φ‖/100`; saturation is already visible near `‖φ‖/10`.
pub fn perturbation_experiment(
    w: &WaveProfile,
    mode: &PerturbationMode,
    cfg: &EvolveConfig,
) -> Result<GrowthReport> {
    let g = *w.grid();
    let (direction, amplitude, reference_lambda) = match mode {
        PerturbationMode::SeededNoise { seed, amplitude } => (seeded_noise(&g, *seed), *amplitude, None),
        PerturbationMode::EigenDirection { amplitude, mode } => {
            let dir = &mode.growing_re;
            if dir.grid() != &g {
                return Err(Error::InvalidField("eigenvector lives on another grid".into()));
            }
            let nrm = dir.norm();
            if !(nrm > 0.0) {
                return Err(Error::InvalidField("eigenvector has zero real part".into()));
            }
            (dir.scale(1.0 / nrm), *amplitude, Some(mode.lambda.re))
        }
    };
    let u0 = w.phi.combine(1.0, &direction, amplitude)?;
    let phi_norm = w.phi.norm();
    let floor = 1e-8 * phi_norm;
    let mut series: Vec<(f64, f64)> = Vec::new();
    let mut failure = None;
    integrate(&u0, &w.params, cfg, |t, u| match u.aligned_distance(&w.phi) {
        Ok((d, _)) => {
            series.push((t, d));
            d < 0.5 * phi_norm
        }
        Err(e) => {
            failure = Some(e);
            false
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    let d_initial = series.first().map(|p| p.1).unwrap_or(0.0);
    let d_max = series.iter().fold(0.0f64, |m, p| m.max(p.1));
    let base = d_initial.max(floor);
    let mut report = GrowthReport {
        lambda_fit: None,
        fit_window: None,
        fit_r2: None,
        reference_lambda,
        relative_error: None,
        verdict: GrowthVerdict::NoGrowth,
        d_initial,
        d_max,
        series: series.clone(),
    };
    if d_max <= 3.0 * base {
        return Ok(report);
    }
    let pts: Vec<(f64, f64)> = series
        .iter()
        .filter(|p| p.1 >= 10.0 * base && p.1 <= 0.01 * phi_norm)
        .map(|p| (p.0, p.1.ln()))
        .collect();
    if pts.len() < 5 {
        report.verdict = GrowthVerdict::Inconclusive;
        return Ok(report);
    }
    let (slope, r2) = linear_fit(&pts);
    report.lambda_fit = Some(slope);
    report.fit_r2 = Some(r2);
    report.fit_window = Some((pts[0].0, pts[pts.len() - 1].0));
    report.relative_error = reference_lambda.map(|l| (slope - l).abs() / l.abs());
    report.verdict = if r2 > 0.99 && slope > 0.0 {
        GrowthVerdict::Growth
    } else {
        GrowthVerdict::Inconclusive
    };
    Ok(report)
}
