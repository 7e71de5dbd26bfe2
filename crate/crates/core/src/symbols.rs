//! Fourier multipliers of the model and the two reference fields built from
//! them (the Green's function and the three-bump test function).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum SymbolKind {
    /// `|ξ|`
    Zygmund,
    /// `iξ`
    DxDerivative,
    /// `−i·sgn ξ`
    Hilbert,
    /// `(|ξ| − 1)²`
    ShiftedSquare,
    /// `1/((|ξ| − 1)² + ω)`
    Green(f64),
    /// `((D − 1)² + ω)⁻¹`; same multiplier as `Green`.
    Resolvent(f64),
}

impl SymbolKind {
    fn validate(&self) -> Result<()> {
        match *self {
            SymbolKind::Green(w) | SymbolKind::Resolvent(w) if !(w > 0.0 && w.is_finite()) => {
                Err(Error::InvalidParams(format!(
                    "Green/Resolvent multiplier needs ω > 0, got {w}"
                )))
            }
            _ => Ok(()),
        }
    }

    /// Multiplier at wavenumber `xi`. Odd symbols vanish on the Nyquist slot.
    pub fn multiplier(&self, xi: f64, nyquist: bool) -> Complex64 {
        let re = |v: f64| Complex64::new(v, 0.0);
        match *self {
            SymbolKind::Zygmund => re(xi.abs()),
            SymbolKind::DxDerivative if nyquist => re(0.0),
            SymbolKind::DxDerivative => Complex64::new(0.0, xi),
            SymbolKind::Hilbert if nyquist => re(0.0),
            SymbolKind::Hilbert => {
                let sgn = if xi > 0.0 { 1.0 } else if xi < 0.0 { -1.0 } else { 0.0 };
                Complex64::new(0.0, -sgn)
            }
            SymbolKind::ShiftedSquare => re(shifted_square(xi)),
            SymbolKind::Green(w) | SymbolKind::Resolvent(w) => re(1.0 / (shifted_square(xi) + w)),
        }
    }
}

#[inline]
pub fn shifted_square(xi: f64) -> f64 {
    let d = xi.abs() - 1.0;
    d * d
}

pub fn apply_symbol(f: &Field, s: SymbolKind) -> Result<Field> {
    s.validate()?;
    let g = *f.grid();
    let nyq = g.nyquist_index();
    Field::new(
        g,
        g.apply_multiplier(f.values(), |k, xi| s.multiplier(xi, k == nyq)),
    )
}

/// Green's function of `(D−1)² + ω`, centred at `x = 0`: its whole-line
/// transform equals `1/((|ξ|−1)² + ω)` on every mode.
pub fn greens_function(g: &Grid, omega: f64) -> Result<Field> {
    SymbolKind::Green(omega).validate()?;
    let spectrum: Vec<Complex64> = g
        .modes()
        .into_iter()
        .map(|xi| Complex64::new(1.0 / (shifted_square(xi) + omega), 0.0))
        .collect();
    Field::new(*g, g.inverse_transform(&spectrum))
}

/// Smooth cutoff with `bump(0) = 1`, supported in `|s| < 1`.
pub fn bump(s: f64) -> f64 {
    if s.abs() < 1.0 {
        (1.0 - 1.0 / (1.0 - s * s)).exp()
    } else {
        0.0
    }
}

/// Test function whose transform is `η((ξ−1)/ε) + η((ξ+1)/ε) + ε·η(ξ/ε)`.
pub fn spectral_bump(g: &Grid, eps: f64) -> Result<Field> {
    if !(eps > 0.0 && eps < 0.25) {
        return Err(Error::InvalidParams(format!("ε = {eps} must lie in (0, 1/4)")));
    }
    let per_bump = g
        .modes()
        .iter()
        .filter(|&&xi| (xi - 1.0).abs() < eps)
        .count();
    if per_bump < 8 {
        return Err(Error::InvalidGrid(format!(
            "only {per_bump} modes inside a bump of half-width {eps}; need at least 8 (increase L)"
        )));
    }
    if g.max_wavenumber() <= 1.0 + eps {
        return Err(Error::InvalidGrid("grid does not resolve |ξ| = 1".into()));
    }
    let spectrum: Vec<Complex64> = g
        .modes()
        .into_iter()
        .map(|xi| {
            let v = bump((xi - 1.0) / eps) + bump((xi + 1.0) / eps) + eps * bump(xi / eps);
            Complex64::new(v, 0.0)
        })
        .collect();
    Field::new(*g, g.inverse_transform(&spectrum))
}
