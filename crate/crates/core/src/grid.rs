//! Periodic grid on `[−L, L)` and real fields sampled on it.
//!
//! Samples sit at `x_j = −L + j·dx`, so `x = 0` is the grid point `j = n/2`.
//! Spectral coefficients are stored in natural FFT order: index `k < n/2`
//! carries `ξ = πk/L`, index `k ≥ n/2` carries `ξ = π(k − n)/L`. The Nyquist
//! mode (`k = n/2`, `ξ = −πn/(2L)`) has no real-valued odd counterpart, so
//! odd multipliers (derivative, Hilbert) annihilate it.

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    })
}

#[derive(Deserialize)]
struct GridSpec {
    n: usize,
    half_length: f64,
}

impl TryFrom<GridSpec> for Grid {
    type Error = Error;
    fn try_from(s: GridSpec) -> Result<Grid> {
        Grid::new(s.n, s.half_length)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridSpec")]
pub struct Grid {
    n: usize,
    half_length: f64,
}

impl Grid {
    pub fn new(n: usize, half_length: f64) -> Result<Grid> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "n = {n} must be a power of two and at least 8"
            )));
        }
        if !(half_length > 0.0 && half_length.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "half_length = {half_length} must be positive and finite"
            )));
        }
        Ok(Grid { n, half_length })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_length / self.n as f64
    }

    /// Spacing of the wavenumber lattice, `π/L`.
    pub fn dxi(&self) -> f64 {
        std::f64::consts::PI / self.half_length
    }

    /// Signed integer mode number of FFT slot `k`.
    pub fn mode_index(&self, k: usize) -> i64 {
        if k < self.n / 2 {
            k as i64
        } else {
            k as i64 - self.n as i64
        }
    }

    pub fn wavenumber(&self, k: usize) -> f64 {
        self.mode_index(k) as f64 * self.dxi()
    }

    /// All wavenumbers in FFT order.
    pub fn modes(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.wavenumber(k)).collect()
    }

    pub fn nyquist_index(&self) -> usize {
        self.n / 2
    }

    /// Largest resolved |ξ|.
    pub fn max_wavenumber(&self) -> f64 {
        (self.n / 2) as f64 * self.dxi()
    }

    pub fn x(&self, j: usize) -> f64 {
        -self.half_length + j as f64 * self.dx()
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.x(j)).collect()
    }

    pub fn center_index(&self) -> usize {
        self.n / 2
    }

    /// Unnormalized forward DFT of real samples.
    pub fn fft(&self, values: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        plan(self.n, false).process(&mut buf);
        buf
    }

    pub fn fft_complex(&self, mut buf: Vec<Complex64>) -> Vec<Complex64> {
        plan(self.n, false).process(&mut buf);
        buf
    }

    /// Inverse DFT (with the 1/n factor), keeping the complex result.
    pub fn ifft_complex(&self, mut buf: Vec<Complex64>) -> Vec<Complex64> {
        plan(self.n, true).process(&mut buf);
        let s = 1.0 / self.n as f64;
        buf.iter_mut().for_each(|c| *c *= s);
        buf
    }

    /// Inverse DFT (with the 1/n factor), discarding the imaginary part.
    pub fn ifft_real(&self, mut buf: Vec<Complex64>) -> Vec<f64> {
        plan(self.n, true).process(&mut buf);
        let s = 1.0 / self.n as f64;
        buf.iter().map(|c| c.re * s).collect()
    }

    /// Whole-line-normalized transform `û(ξ_k) ≈ ∫ u e^{−iξx} dx`, FFT order.
    pub fn transform(&self, values: &[f64]) -> Vec<Complex64> {
        let dx = self.dx();
        let mut f = self.fft(values);
        for (k, c) in f.iter_mut().enumerate() {
            let sign = if self.mode_index(k) % 2 == 0 { 1.0 } else { -1.0 };
            *c *= sign * dx;
        }
        f
    }

    /// Inverse of [`Grid::transform`] (real part).
    pub fn inverse_transform(&self, spectrum: &[Complex64]) -> Vec<f64> {
        let dx = self.dx();
        let buf = spectrum
            .iter()
            .enumerate()
            .map(|(k, &c)| {
                let sign = if self.mode_index(k) % 2 == 0 { 1.0 } else { -1.0 };
                c * (sign / dx)
            })
            .collect();
        self.ifft_real(buf)
    }

    /// `ifft(m(ξ)·fft(u))` for a multiplier given per FFT slot.
    pub fn apply_multiplier<M>(&self, values: &[f64], m: M) -> Vec<f64>
    where
        M: Fn(usize, f64) -> Complex64,
    {
        let mut f = self.fft(values);
        for (k, c) in f.iter_mut().enumerate() {
            *c *= m(k, self.wavenumber(k));
        }
        self.ifft_real(f)
    }

    /// Same as [`Grid::apply_multiplier`] for a real multiplier of |ξ|.
    pub fn apply_real_multiplier<M>(&self, values: &[f64], m: M) -> Vec<f64>
    where
        M: Fn(f64) -> f64,
    {
        let mut f = self.fft(values);
        for (k, c) in f.iter_mut().enumerate() {
            *c *= m(self.wavenumber(k));
        }
        self.ifft_real(f)
    }

    /// `(1/2π)∫ m(ξ)|û|² dξ` on the grid, i.e. `(dx/n)·Σ m(ξ_k)|F_k|²`.
    pub fn quadratic_form<M>(&self, values: &[f64], m: M) -> f64
    where
        M: Fn(f64) -> f64,
    {
        let f = self.fft(values);
        let s: f64 = f
            .iter()
            .enumerate()
            .map(|(k, c)| m(self.wavenumber(k)) * c.norm_sqr())
            .sum();
        s * self.dx() / self.n as f64
    }

    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        self.dx() * a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>()
    }

    pub fn norm(&self, a: &[f64]) -> f64 {
        self.inner(a, a).sqrt()
    }

    /// Spectral derivative (Nyquist mode dropped).
    pub fn derivative(&self, values: &[f64]) -> Vec<f64> {
        let nyq = self.nyquist_index();
        self.apply_multiplier(values, |k, xi| {
            if k == nyq {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, xi)
            }
        })
    }
}

/// A finite real field on a grid. Operations return new fields.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Field> {
        if values.len() != grid.n() {
            return Err(Error::InvalidField(format!(
                "{} samples on a grid of {} points",
                values.len(),
                grid.n()
            )));
        }
        if let Some(j) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidField(format!(
                "non-finite sample {} at index {j}",
                values[j]
            )));
        }
        Ok(Field { grid, values })
    }

    pub fn zeros(grid: Grid) -> Field {
        Field {
            grid,
            values: vec![0.0; grid.n()],
        }
    }

    pub fn constant(grid: Grid, c: f64) -> Result<Field> {
        Field::new(grid, vec![c; grid.n()])
    }

    pub fn from_fn<F: Fn(f64) -> f64>(grid: Grid, f: F) -> Result<Field> {
        Field::new(grid, grid.coords().into_iter().map(f).collect())
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.grid.norm(&self.values)
    }

    pub fn norm_sq(&self) -> f64 {
        self.grid.inner(&self.values, &self.values)
    }

    pub fn dot(&self, other: &Field) -> f64 {
        self.grid.inner(&self.values, &other.values)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn scale(&self, a: f64) -> Field {
        Field {
            grid: self.grid,
            values: self.values.iter().map(|v| a * v).collect(),
        }
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &Field, b: f64) -> Result<Field> {
        self.check_same_grid(other)?;
        Field::new(
            self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        )
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.combine(1.0, other, 1.0)
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.combine(1.0, other, -1.0)
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Result<Field> {
        Field::new(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    /// Circular shift by whole grid cells: `result[j] = self[j − k]`.
    pub fn roll(&self, k: isize) -> Field {
        let n = self.len() as isize;
        let values = (0..n)
            .map(|j| self.values[(j - k).rem_euclid(n) as usize])
            .collect();
        Field {
            grid: self.grid,
            values,
        }
    }

    /// Spectral translation: returns `x ↦ u(x − s)`.
    pub fn translate(&self, s: f64) -> Field {
        let values = self.grid.apply_multiplier(&self.values, |_, xi| {
            Complex64::from_polar(1.0, -xi * s)
        });
        Field {
            grid: self.grid,
            values,
        }
    }

    /// Reflection `x ↦ u(−x)` about the grid centre.
    pub fn reflect(&self) -> Field {
        let n = self.len();
        let values = (0..n).map(|j| self.values[(n - j) % n]).collect();
        Field {
            grid: self.grid,
            values,
        }
    }

    pub fn derivative(&self) -> Field {
        Field {
            grid: self.grid,
            values: self.grid.derivative(&self.values),
        }
    }

    /// Translation `s` maximizing `⟨u(· − s), reference⟩`, found on the grid
    /// and refined by Newton steps on the trigonometric interpolant.
    pub fn best_shift(&self, reference: &Field) -> Result<f64> {
        self.check_same_grid(reference)?;
        let g = self.grid;
        let u = g.fft(&self.values);
        let r = g.fft(&reference.values);
        let z: Vec<Complex64> = u.iter().zip(&r).map(|(a, b)| a * b.conj()).collect();
        let corr = g.fft_complex(z.clone());
        let n = g.n();
        let jmax = (0..n)
            .max_by(|&a, &b| corr[a].re.total_cmp(&corr[b].re))
            .unwrap_or(0);
        let mut s = g.mode_index(jmax) as f64 * g.dx();
        let xis = g.modes();
        for _ in 0..20 {
            let (mut d1, mut d2) = (0.0, 0.0);
            for (zk, &xi) in z.iter().zip(&xis) {
                let e = zk * Complex64::from_polar(1.0, -xi * s);
                d1 += xi * e.im;
                d2 -= xi * xi * e.re;
            }
            if d2 >= 0.0 {
                break;
            }
            let step = -d1 / d2;
            let step = step.clamp(-g.dx(), g.dx());
            s += step;
            if step.abs() < 1e-15 * g.half_length() {
                break;
            }
        }
        Ok(s)
    }

    /// `min_s ‖u(· − s) − reference‖` together with the minimizing shift.
    pub fn aligned_distance(&self, reference: &Field) -> Result<(f64, f64)> {
        let s = self.best_shift(reference)?;
        let d = self.translate(s).sub(reference)?.norm();
        Ok((d, s))
    }

    pub(crate) fn check_same_grid(&self, other: &Field) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::InvalidField("fields live on different grids".into()));
        }
        Ok(())
    }

    pub(crate) fn from_parts(grid: Grid, values: Vec<f64>) -> Field {
        debug_assert_eq!(values.len(), grid.n());
        Field { grid, values }
    }
}
