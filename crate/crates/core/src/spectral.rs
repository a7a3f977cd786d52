//! Algebraic spectra from the `(τ, R)` ladder and wavefunctions from the
//! ground-state formula plus repeated `A†`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::catalog::{Family, ParamSet};
use crate::error::{Result, SipError};
use crate::grid::{cumulative_integral, derivative, max_abs, NeumaierSum, UniformGrid};

/// Endpoint amplitude, relative to the peak, below which a state counts as
/// decayed at the boundary.
pub const DECAY_RATIO: f64 = 1e-4;

/// Largest accepted relative error estimate for the 6th-order derivative.
pub const DERIVATIVE_RTOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Algebraic,
    Oracle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub energies: Vec<f64>,
    pub provenance: Provenance,
    pub params: ParamSet,
    pub level_params: Vec<ParamSet>,
    pub truncated: bool,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    /// `E_n − E_0`.
    pub fn gaps(&self) -> Vec<f64> {
        let e0 = self.energies.first().copied().unwrap_or(0.0);
        self.energies.iter().map(|e| e - e0).collect()
    }

    pub fn with_offset(mut self, offset: f64) -> Self {
        self.energies.iter_mut().for_each(|e| *e += offset);
        self
    }

    /// `{energies, provenance, truncated}`.
    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({
            "energies": self.energies,
            "provenance": self.provenance,
            "truncated": self.truncated,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Wavefunction {
    pub grid: UniformGrid,
    pub values: Vec<f64>,
    pub level: usize,
    pub normalized: bool,
}

impl Wavefunction {
    pub fn points(&self) -> Vec<f64> {
        self.grid.points()
    }

    pub fn norm_squared(&self) -> f64 {
        trapezoid_product(&self.values, &self.values, self.grid.spacing())
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    /// Trapezoid `∫ ψ φ dx`; both must share the grid.
    pub fn inner(&self, other: &Wavefunction) -> f64 {
        trapezoid_product(&self.values, &other.values, self.grid.spacing())
    }

    pub fn normalize(mut self) -> Result<Self> {
        let n = self.norm();
        if !(n.is_finite() && n > 0.0) {
            return Err(SipError::NonNormalizable(format!("norm {n} at level {}", self.level)));
        }
        self.values.iter_mut().for_each(|v| *v /= n);
        self.normalized = true;
        fix_sign(&mut self.values);
        Ok(self)
    }

    /// Interior sign changes, ignoring amplitudes below `1e-6` of the peak.
    pub fn node_count(&self) -> usize {
        crate::grid::count_nodes(&self.values, 1e-6)
    }
}

fn trapezoid_product(a: &[f64], b: &[f64], h: f64) -> f64 {
    let n = a.len();
    let mut s = NeumaierSum::default();
    for i in 0..n {
        let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        s.add(w * a[i] * b[i]);
    }
    h * s.total()
}

/// Makes `ψ` positive at its leftmost interior maximum of `|ψ|`, skipping
/// lobes below `1e-2` of the peak.
pub fn fix_sign(values: &mut [f64]) {
    let peak = max_abs(values);
    if peak == 0.0 {
        return;
    }
    let n = values.len();
    for i in 1..n.saturating_sub(1) {
        let a = values[i].abs();
        if a >= 1e-2 * peak && a >= values[i - 1].abs() && a >= values[i + 1].abs() {
            if values[i] < 0.0 {
                values.iter_mut().for_each(|v| *v = -*v);
            }
            return;
        }
    }
}

/// `E_0 = 0`, `E_n = Σ_{k<n} R(τᵏ(p))`. The ladder stops, with
/// `truncated = true`, once `τⁿ(p)` leaves the valid parameter range.
pub fn algebraic_spectrum(family: Family, p: &ParamSet, n_levels: usize) -> Result<Spectrum> {
    if n_levels == 0 {
        return Err(SipError::InvalidInput("n_levels must be at least 1".into()));
    }
    family.validate(p)?;
    let mut energies = vec![0.0];
    let mut level_params = vec![p.clone()];
    let mut truncated = false;
    let mut acc = NeumaierSum::default();
    while energies.len() < n_levels {
        let current = level_params.last().unwrap();
        let next = family.step_unchecked(current);
        if family.validate(&next).is_err() {
            truncated = true;
            break;
        }
        acc.add(family.energy_shift(current)?);
        energies.push(acc.total());
        level_params.push(next);
    }
    Ok(Spectrum {
        energies,
        provenance: Provenance::Algebraic,
        params: p.clone(),
        level_params,
        truncated,
    })
}

/// `ψ₀ = exp(−∫_{x₀}^{x} W)` with `x₀` the grid midpoint, normalized. The
/// integral is accumulated interval by interval with adaptive Simpson, which
/// stays accurate next to `1/x` walls.
///
/// A state that has not decayed at an endpoint where `W` makes it grow
/// outward is rejected as non-normalizable; one that is merely cut off by a
/// hard wall (half-line grids) is accepted.
pub fn ground_state(w: impl Fn(f64) -> f64, grid: &UniformGrid) -> Result<Wavefunction> {
    let pts = grid.points();
    let wv: Vec<f64> = pts.iter().map(|&x| w(x)).collect();
    if let Some(i) = wv.iter().position(|v| !v.is_finite()) {
        return Err(SipError::NonFinite { what: "superpotential", x: pts[i] });
    }
    let integral = cumulative_integral(&w, grid, 1e-14);
    let mid = integral[grid.midpoint_index()];
    let log_psi: Vec<f64> = integral.iter().map(|v| -(v - mid)).collect();
    let top = log_psi.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let values: Vec<f64> = log_psi.iter().map(|l| (l - top).exp()).collect();
    let n = values.len();
    let grows_left = wv[0] >= 0.0 && values[0] > DECAY_RATIO;
    let grows_right = wv[n - 1] <= 0.0 && values[n - 1] > DECAY_RATIO;
    if grows_left || grows_right {
        let x = if grows_left { grid.lo } else { grid.hi };
        return Err(SipError::NonNormalizable(format!(
            "exp(-∫W) does not decay toward x = {x}"
        )));
    }
    Wavefunction { grid: *grid, values, level: 0, normalized: false }.normalize()
}

fn checked_derivative(psi: &Wavefunction) -> Result<Vec<f64>> {
    let h = psi.grid.spacing();
    let d = derivative(&psi.values, h);
    // compare with the same stencil at twice the spacing
    if psi.values.len() >= 2 * crate::grid::MIN_SAMPLES {
        let coarse: Vec<f64> = psi.values.iter().step_by(2).cloned().collect();
        let dc = derivative(&coarse, 2.0 * h);
        let scale = max_abs(&d).max(f64::MIN_POSITIVE);
        let est = dc
            .iter()
            .enumerate()
            .skip(3)
            .take(dc.len().saturating_sub(6))
            .map(|(i, v)| (v - d[2 * i]).abs() / 63.0)
            .fold(0.0, f64::max);
        if est > DERIVATIVE_RTOL * scale {
            return Err(SipError::InvalidGrid(format!(
                "derivative error estimate {est:e} exceeds {DERIVATIVE_RTOL:e} of max |ψ′| = {scale:e}"
            )));
        }
    }
    Ok(d)
}

fn apply(w: impl Fn(f64) -> f64, psi: &Wavefunction, sign: f64) -> Result<Wavefunction> {
    let d = checked_derivative(psi)?;
    let pts = psi.points();
    let mut values = Vec::with_capacity(pts.len());
    for (i, x) in pts.iter().enumerate() {
        let wx = w(*x);
        if !wx.is_finite() {
            return Err(SipError::NonFinite { what: "superpotential", x: *x });
        }
        values.push(sign * d[i] + wx * psi.values[i]);
    }
    Ok(Wavefunction { grid: psi.grid, values, level: psi.level, normalized: false })
}

/// `A ψ = ψ′ + W ψ`.
pub fn apply_a(w: impl Fn(f64) -> f64, psi: &Wavefunction) -> Result<Wavefunction> {
    apply(w, psi, 1.0)
}

/// `A† ψ = −ψ′ + W ψ`.
pub fn apply_adagger(w: impl Fn(f64) -> f64, psi: &Wavefunction) -> Result<Wavefunction> {
    apply(w, psi, -1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ladder {
    pub wavefunctions: Vec<Wavefunction>,
    pub truncated: bool,
}

/// `ψₙ` of `V⁻(·; p)`: the ground state at `τⁿ(p)` lifted by
/// `A†(τⁿ⁻¹(p)) ⋯ A†(p)`, normalized after every rung.
pub fn ladder_wavefunctions(
    family: Family,
    p: &ParamSet,
    n_levels: usize,
    grid: &UniformGrid,
) -> Result<Ladder> {
    let spectrum = algebraic_spectrum(family, p, n_levels)?;
    for q in &spectrum.level_params {
        let d = family.domain(q);
        d.check(grid.lo)?;
        d.check(grid.hi)?;
    }
    let mut wavefunctions = Vec::with_capacity(spectrum.len());
    for n in 0..spectrum.len() {
        let top = &spectrum.level_params[n];
        let mut psi = ground_state(|x| family.w(top, x), grid)?;
        for k in (0..n).rev() {
            let q = &spectrum.level_params[k];
            psi = apply_adagger(|x| family.w(q, x), &psi)?.normalize()?;
        }
        psi.level = n;
        wavefunctions.push(psi);
    }
    Ok(Ladder { wavefunctions, truncated: spectrum.truncated })
}

/// `level,energy` rows.
pub fn write_spectrum_csv(out: impl Write, spectrum: &Spectrum) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["level", "energy"])?;
    for (n, e) in spectrum.energies.iter().enumerate() {
        w.write_record([n.to_string(), format_number(*e)])?;
    }
    w.flush()?;
    Ok(())
}

/// `x, psi_0, psi_1, …` on the shared grid.
pub fn write_wavefunctions_csv(out: impl Write, wfs: &[Wavefunction]) -> Result<()> {
    let Some(first) = wfs.first() else {
        return Err(SipError::InvalidInput("no wavefunctions to export".into()));
    };
    if wfs.iter().any(|w| w.grid != first.grid) {
        return Err(SipError::InvalidGrid("wavefunctions must share one grid".into()));
    }
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["x".to_string()];
    header.extend(wfs.iter().map(|w| format!("psi_{}", w.level)));
    w.write_record(&header)?;
    for (i, x) in first.points().into_iter().enumerate() {
        let mut row = vec![format_number(x)];
        row.extend(wfs.iter().map(|w| format_number(w.values[i])));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// 12 significant digits.
pub fn format_number(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let exp = v.abs().log10().floor() as i32;
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let s = format!("{v:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        let s = format!("{v:.11e}");
        let (mantissa, exp) = s.split_once('e').unwrap_or((&s, "0"));
        let mantissa = if mantissa.contains('.') { mantissa.trim_end_matches('0').trim_end_matches('.') } else { mantissa };
        format!("{mantissa}e{exp}")
    }
}
