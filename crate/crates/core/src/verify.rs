//! Grid certification of shape invariance, the QHJ equation, the negation
//! condition and the generalized condition with an `x`-dependent source.
//!
//! Constancy is judged by the largest deviation from the mean, and the mean
//! is always re-estimated from the grid rather than taken from a closed form.

use serde::{Deserialize, Serialize};

use crate::catalog::{Family, ParamSet};
use crate::error::{Result, SipError};
use crate::grid::{NeumaierSum, UniformGrid};

/// Default tolerances.
pub struct Tolerance;

impl Tolerance {
    /// Inputs with analytic derivatives.
    pub const ANALYTIC: f64 = 1e-10;
    /// Any derivative taken by finite differences.
    pub const FINITE_DIFFERENCE: f64 = 1e-6;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub max_residual: f64,
    pub mean: f64,
    /// The fitted `R` (shape invariance) or `E` (QHJ).
    pub estimated_constant: f64,
    pub passed: bool,
    pub tolerance: f64,
    pub pole_exclusions: Vec<f64>,
}

impl VerificationReport {
    /// Report for a residual that should vanish; `max_residual = max |r|`.
    pub fn from_residuals(
        points: &[f64],
        residual: &[f64],
        estimated_constant: f64,
        tolerance: f64,
    ) -> Result<Self> {
        let mut sum = NeumaierSum::default();
        let mut worst = 0.0_f64;
        for (x, r) in points.iter().zip(residual) {
            if !r.is_finite() {
                return Err(SipError::NonFinite { what: "residual", x: *x });
            }
            sum.add(*r);
            worst = worst.max(r.abs());
        }
        Ok(Self {
            max_residual: worst,
            mean: sum.total() / residual.len().max(1) as f64,
            estimated_constant,
            passed: worst < tolerance,
            tolerance,
            pole_exclusions: Vec::new(),
        })
    }

    /// Report for a field that should be constant: the constant is its mean
    /// and `max_residual = max |d − mean|`.
    pub fn from_constancy(points: &[f64], d: &[f64], tolerance: f64) -> Result<Self> {
        let mut sum = NeumaierSum::default();
        for (x, v) in points.iter().zip(d) {
            if !v.is_finite() {
                return Err(SipError::NonFinite { what: "difference", x: *x });
            }
            sum.add(*v);
        }
        let mean = sum.total() / d.len().max(1) as f64;
        let worst = d.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
        Ok(Self {
            max_residual: worst,
            mean,
            estimated_constant: mean,
            passed: worst < tolerance,
            tolerance,
            pole_exclusions: Vec::new(),
        })
    }

    pub fn with_pole_exclusions(mut self, poles: Vec<f64>) -> Self {
        self.pole_exclusions = poles;
        self
    }
}

fn partner_difference(
    w: &impl Fn(&ParamSet, f64) -> f64,
    wp: &impl Fn(&ParamSet, f64) -> f64,
    p: &ParamSet,
    q: &ParamSet,
    x: f64,
) -> f64 {
    let (w0, w1) = (w(p, x), w(q, x));
    (w0 * w0 + wp(p, x)) - (w1 * w1 - wp(q, x))
}

/// `D(x) = V⁺(x; p) − V⁻(x; τ(p))` must be constant; its mean is `R`.
pub fn verify_shape_invariance(
    w: impl Fn(&ParamSet, f64) -> f64,
    wp: impl Fn(&ParamSet, f64) -> f64,
    p: &ParamSet,
    tau: impl Fn(&ParamSet) -> ParamSet,
    grid: &UniformGrid,
    tolerance: f64,
) -> Result<VerificationReport> {
    verify_generalized_si(w, wp, p, tau, |_| 0.0, grid, tolerance)
}

/// `D(x) = V⁺(x; p) − V⁻(x; τ(p)) − V₀(x)` must be constant.
pub fn verify_generalized_si(
    w: impl Fn(&ParamSet, f64) -> f64,
    wp: impl Fn(&ParamSet, f64) -> f64,
    p: &ParamSet,
    tau: impl Fn(&ParamSet) -> ParamSet,
    v0: impl Fn(f64) -> f64,
    grid: &UniformGrid,
    tolerance: f64,
) -> Result<VerificationReport> {
    let q = tau(p);
    let pts = grid.points();
    let d: Vec<f64> = pts.iter().map(|&x| partner_difference(&w, &wp, p, &q, x) - v0(x)).collect();
    VerificationReport::from_constancy(&pts, &d, tolerance)
}

/// Residual of `W² − W′ − V + E`; the estimated constant is the grid mean
/// of `V − W² + W′`, i.e. the fitted `E`.
pub fn verify_qhj(
    w: impl Fn(f64) -> f64,
    wp: impl Fn(f64) -> f64,
    v: impl Fn(f64) -> f64,
    e: f64,
    grid: &UniformGrid,
    tolerance: f64,
) -> Result<VerificationReport> {
    let pts = grid.points();
    let mut fitted = NeumaierSum::default();
    let residual: Vec<f64> = pts
        .iter()
        .map(|&x| {
            let wx = w(x);
            let r = wx * wx - wp(x) - v(x);
            fitted.add(-r);
            r + e
        })
        .collect();
    let e_fit = fitted.total() / pts.len() as f64;
    VerificationReport::from_residuals(&pts, &residual, e_fit, tolerance)
}

/// Residual of `W(x; τ(p)) + W(x; p)`.
pub fn verify_negation_condition(
    w: impl Fn(&ParamSet, f64) -> f64,
    p: &ParamSet,
    tau: impl Fn(&ParamSet) -> ParamSet,
    grid: &UniformGrid,
    tolerance: f64,
) -> Result<VerificationReport> {
    let q = tau(p);
    let pts = grid.points();
    let residual: Vec<f64> = pts.iter().map(|&x| w(&q, x) + w(p, x)).collect();
    let mean = residual.iter().sum::<f64>() / residual.len() as f64;
    VerificationReport::from_residuals(&pts, &residual, mean, tolerance)
}

/// Shape-invariance certificate of a catalog family on `n` points of its
/// verification interval, after checking parameters and domains.
pub fn verify_family(family: Family, p: &ParamSet, n: usize, tolerance: f64) -> Result<VerificationReport> {
    family.validate(p)?;
    let grid = family.verification_grid(p, n)?;
    verify_family_on(family, p, &grid, tolerance)
}

pub fn verify_family_on(
    family: Family,
    p: &ParamSet,
    grid: &UniformGrid,
    tolerance: f64,
) -> Result<VerificationReport> {
    family.validate(p)?;
    let q = family.step_unchecked(p);
    let (d0, d1) = (family.domain(p), family.domain(&q));
    for x in [grid.lo, grid.hi] {
        d0.check(x)?;
        d1.check(x)?;
    }
    verify_shape_invariance(
        |p, x| family.w(p, x),
        |p, x| family.w_prime(p, x),
        p,
        |p| family.step_unchecked(p),
        grid,
        tolerance,
    )
}
