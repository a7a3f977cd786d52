//! Axially symmetric 3D prepotentials `Ω = λ log χ(r, θ)`.
//!
//! With `F = log χ` the partners are `V± = λ² |∇F|² ± λ ∇²F`, and since
//! `|∇F|² + ∇²F = ∇²χ/χ`, a seed with `∇²χ + K χ = 0` gives
//! `V⁺(λ) − V⁻(λ − 1) = −(2λ − 1) K`, which vanishes for harmonic seeds.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SipError};
use crate::grid::NeumaierSum;
use crate::spectral::format_number;
use crate::verify::VerificationReport;

/// `P_n(x)` and `P_n′(x)` by the three-term recurrence.
pub fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    let (mut d0, mut d1) = (0.0, 1.0);
    if n == 0 {
        return (p0, d0);
    }
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        // (P_{k+1})′ = (P_{k−1})′ + (2k + 1) P_k
        let d2 = d0 + (2.0 * kf + 1.0) * p1;
        (p0, p1, d0, d1) = (p1, p2, d1, d2);
    }
    (p1, d1)
}

/// A field `χ(r, θ)` with analytic derivatives.
pub trait ScalarField2D {
    fn value(&self, r: f64, theta: f64) -> f64;
    fn d_r(&self, r: f64, theta: f64) -> f64;
    fn d_theta(&self, r: f64, theta: f64) -> f64;
    /// 3D Laplacian of an axially symmetric field.
    fn laplacian(&self, r: f64, theta: f64) -> f64;
    /// Separation constant in `∇²χ + K χ = 0`.
    fn k_sep(&self) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LegendreTerm {
    pub n: usize,
    pub a: f64,
    pub b: f64,
}

/// `χ = Σ (aₙ rⁿ + bₙ r^{−(n+1)}) Pₙ(cos θ)`, harmonic (`K = 0`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LegendreSeed {
    pub terms: Vec<LegendreTerm>,
}

impl LegendreSeed {
    /// Radial factor and its first two derivatives.
    fn radial(t: &LegendreTerm, r: f64) -> (f64, f64, f64) {
        let n = t.n as i32;
        let nf = t.n as f64;
        let m = -(n + 1);
        let mf = m as f64;
        let v = t.a * r.powi(n) + t.b * r.powi(m);
        let d1 = t.a * nf * r.powi(n - 1) + t.b * mf * r.powi(m - 1);
        let d2 = t.a * nf * (nf - 1.0) * r.powi(n - 2) + t.b * mf * (mf - 1.0) * r.powi(m - 2);
        (v, d1, d2)
    }
}

impl ScalarField2D for LegendreSeed {
    fn value(&self, r: f64, theta: f64) -> f64 {
        let c = theta.cos();
        self.terms.iter().map(|t| Self::radial(t, r).0 * legendre(t.n, c).0).sum()
    }

    fn d_r(&self, r: f64, theta: f64) -> f64 {
        let c = theta.cos();
        self.terms.iter().map(|t| Self::radial(t, r).1 * legendre(t.n, c).0).sum()
    }

    fn d_theta(&self, r: f64, theta: f64) -> f64 {
        let (c, s) = (theta.cos(), theta.sin());
        self.terms.iter().map(|t| -s * Self::radial(t, r).0 * legendre(t.n, c).1).sum()
    }

    fn laplacian(&self, r: f64, theta: f64) -> f64 {
        let c = theta.cos();
        self.terms
            .iter()
            .map(|t| {
                let (v, d1, d2) = Self::radial(t, r);
                let l = (t.n * (t.n + 1)) as f64;
                (d2 + 2.0 * d1 / r - l * v / (r * r)) * legendre(t.n, c).0
            })
            .sum()
    }

    fn k_sep(&self) -> f64 {
        0.0
    }
}

/// `χ = exp(k r cos θ) = e^{k z}`, with `∇²χ = k² χ`, i.e. `K = −k²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneExpSeed {
    pub k: f64,
}

impl ScalarField2D for PlaneExpSeed {
    fn value(&self, r: f64, theta: f64) -> f64 {
        (self.k * r * theta.cos()).exp()
    }

    fn d_r(&self, r: f64, theta: f64) -> f64 {
        self.k * theta.cos() * self.value(r, theta)
    }

    fn d_theta(&self, r: f64, theta: f64) -> f64 {
        -self.k * r * theta.sin() * self.value(r, theta)
    }

    fn laplacian(&self, r: f64, theta: f64) -> f64 {
        self.k * self.k * self.value(r, theta)
    }

    fn k_sep(&self) -> f64 {
        -self.k * self.k
    }
}

/// `χ = j₀(k r) = sin(k r)/(k r)`, with `K = k²`; positive for `k r < π`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphericalWaveSeed {
    pub k: f64,
}

impl ScalarField2D for SphericalWaveSeed {
    fn value(&self, r: f64, _theta: f64) -> f64 {
        let x = self.k * r;
        x.sin() / x
    }

    fn d_r(&self, r: f64, _theta: f64) -> f64 {
        let x = self.k * r;
        self.k * (x.cos() / x - x.sin() / (x * x))
    }

    fn d_theta(&self, _r: f64, _theta: f64) -> f64 {
        0.0
    }

    fn laplacian(&self, r: f64, theta: f64) -> f64 {
        -self.k * self.k * self.value(r, theta)
    }

    fn k_sep(&self) -> f64 {
        self.k * self.k
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub r_lo: f64,
    pub r_hi: f64,
    pub theta_lo: f64,
    pub theta_hi: f64,
}

impl Region {
    pub fn new(r_lo: f64, r_hi: f64, theta_lo: f64, theta_hi: f64) -> Result<Self> {
        let pi = std::f64::consts::PI;
        if !(r_lo > 0.0 && r_lo < r_hi && r_hi.is_finite()) {
            return Err(SipError::InvalidGrid(format!("radial range ({r_lo}, {r_hi}) must satisfy 0 < lo < hi")));
        }
        if !(theta_lo > 0.0 && theta_lo < theta_hi && theta_hi < pi) {
            return Err(SipError::InvalidGrid(format!(
                "polar range ({theta_lo}, {theta_hi}) must lie strictly inside (0, π)"
            )));
        }
        Ok(Self { r_lo, r_hi, theta_lo, theta_hi })
    }
}

pub const DEFAULT_GRID_SIZE: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid2D {
    pub region: Region,
    pub n_r: usize,
    pub n_theta: usize,
}

impl Grid2D {
    pub fn new(region: Region, n_r: usize, n_theta: usize) -> Result<Self> {
        if n_r < 2 || n_theta < 2 {
            return Err(SipError::InvalidGrid("2D grids need at least 2 points per axis".into()));
        }
        Ok(Self { region, n_r, n_theta })
    }

    pub fn with_default_size(region: Region) -> Self {
        Self { region, n_r: DEFAULT_GRID_SIZE, n_theta: DEFAULT_GRID_SIZE }
    }

    /// `(r, θ)` in row-major order, `θ` fastest.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let Region { r_lo, r_hi, theta_lo, theta_hi } = self.region;
        let dr = (r_hi - r_lo) / (self.n_r - 1) as f64;
        let dt = (theta_hi - theta_lo) / (self.n_theta - 1) as f64;
        let mut out = Vec::with_capacity(self.n_r * self.n_theta);
        for i in 0..self.n_r {
            let r = if i == self.n_r - 1 { r_hi } else { r_lo + i as f64 * dr };
            for j in 0..self.n_theta {
                let t = if j == self.n_theta - 1 { theta_hi } else { theta_lo + j as f64 * dt };
                out.push((r, t));
            }
        }
        out
    }
}

/// Validated harmonic seed. At least one coefficient must be nonzero.
pub fn laplace_seed(terms: Vec<LegendreTerm>) -> Result<LegendreSeed> {
    if terms.is_empty() || terms.iter().all(|t| t.a == 0.0 && t.b == 0.0) {
        return Err(SipError::InvalidInput("Legendre seed needs a nonzero coefficient".into()));
    }
    if let Some(t) = terms.iter().find(|t| !(t.a.is_finite() && t.b.is_finite())) {
        return Err(SipError::InvalidInput(format!("non-finite coefficient in term n = {}", t.n)));
    }
    Ok(LegendreSeed { terms })
}

/// Parses `"a0=2,a1=1,b0=0.5"` into Legendre terms.
pub fn parse_legendre_terms(spec: &str) -> Result<Vec<LegendreTerm>> {
    let mut terms: Vec<LegendreTerm> = Vec::new();
    for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let bad = || SipError::InvalidInput(format!("bad seed term `{item}`, expected aN=value or bN=value"));
        let (key, value) = item.split_once('=').ok_or_else(bad)?;
        let value: f64 = value.trim().parse().map_err(|_| bad())?;
        let key = key.trim();
        let (kind, n) = key.split_at(1);
        let n: usize = n.parse().map_err(|_| bad())?;
        let idx = match terms.iter().position(|t| t.n == n) {
            Some(i) => i,
            None => {
                terms.push(LegendreTerm { n, a: 0.0, b: 0.0 });
                terms.len() - 1
            }
        };
        match kind {
            "a" => terms[idx].a = value,
            "b" => terms[idx].b = value,
            _ => return Err(bad()),
        }
    }
    terms.sort_by_key(|t| t.n);
    Ok(terms)
}

/// Errors with the first grid point where `χ ≤ 0`.
pub fn check_positive(chi: &impl ScalarField2D, grid: &Grid2D) -> Result<()> {
    for (r, theta) in grid.points() {
        let v = chi.value(r, theta);
        if !(v > 0.0) {
            return Err(SipError::NonPositiveSeed { r, theta });
        }
    }
    Ok(())
}

/// `|∇F|²` and `∇²F` for `F = log χ`.
pub fn log_derivatives(chi: &impl ScalarField2D, r: f64, theta: f64) -> (f64, f64) {
    let v = chi.value(r, theta);
    let gr = chi.d_r(r, theta) / v;
    let gt = chi.d_theta(r, theta) / (r * v);
    let grad2 = gr * gr + gt * gt;
    (grad2, chi.laplacian(r, theta) / v - grad2)
}

/// `max |∇²χ + K χ| / max |χ|`.
pub fn helmholtz_residual(chi: &impl ScalarField2D, grid: &Grid2D) -> f64 {
    let k = chi.k_sep();
    let mut worst = 0.0_f64;
    let mut scale = 0.0_f64;
    for (r, t) in grid.points() {
        let v = chi.value(r, t);
        worst = worst.max((chi.laplacian(r, t) + k * v).abs());
        scale = scale.max(v.abs());
    }
    worst / scale.max(f64::MIN_POSITIVE)
}

/// `max | |∇F|² + ∇²F + K |` over the grid.
pub fn prepotential_riccati_residual(
    chi: &impl ScalarField2D,
    grid: &Grid2D,
    tolerance: f64,
) -> Result<VerificationReport> {
    check_positive(chi, grid)?;
    let k = chi.k_sep();
    let mut worst = 0.0_f64;
    let mut sum = NeumaierSum::default();
    let pts = grid.points();
    for &(r, t) in &pts {
        let (g2, lap) = log_derivatives(chi, r, t);
        let res = g2 + lap + k;
        sum.add(res);
        worst = worst.max(res.abs());
    }
    Ok(VerificationReport {
        max_residual: worst,
        mean: sum.total() / pts.len() as f64,
        estimated_constant: -k,
        passed: worst < tolerance,
        tolerance,
        pole_exclusions: Vec::new(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartnerFields {
    pub points: Vec<(f64, f64)>,
    pub lambda: f64,
    pub v_minus: Vec<f64>,
    pub v_plus: Vec<f64>,
}

pub fn partner_fields(chi: &impl ScalarField2D, lambda: f64, grid: &Grid2D) -> Result<PartnerFields> {
    check_positive(chi, grid)?;
    let points = grid.points();
    let (mut v_minus, mut v_plus) = (Vec::with_capacity(points.len()), Vec::with_capacity(points.len()));
    for &(r, t) in &points {
        let (g2, lap) = log_derivatives(chi, r, t);
        v_minus.push(lambda * lambda * g2 - lambda * lap);
        v_plus.push(lambda * lambda * g2 + lambda * lap);
    }
    Ok(PartnerFields { points, lambda, v_minus, v_plus })
}

/// `D = V⁺(λ) − V⁻(μ)` must be constant on the grid.
pub fn verify_3d_shape_invariance(
    chi: &impl ScalarField2D,
    lambda: f64,
    mu: f64,
    grid: &Grid2D,
    tolerance: f64,
) -> Result<VerificationReport> {
    check_positive(chi, grid)?;
    let pts = grid.points();
    let d: Vec<f64> = pts
        .iter()
        .map(|&(r, t)| {
            let (g2, lap) = log_derivatives(chi, r, t);
            (lambda * lambda - mu * mu) * g2 + (lambda + mu) * lap
        })
        .collect();
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    VerificationReport::from_constancy(&xs, &d, tolerance)
}

/// `r,theta,v_minus,v_plus` rows.
pub fn write_partner_csv(out: impl Write, fields: &PartnerFields) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["r", "theta", "v_minus", "v_plus"])?;
    for (i, (r, t)) in fields.points.iter().enumerate() {
        w.write_record([
            format_number(*r),
            format_number(*t),
            format_number(fields.v_minus[i]),
            format_number(fields.v_plus[i]),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `{terms, K, lambda, region}`.
pub fn seed_manifest(seed: &LegendreSeed, lambda: f64, region: &Region) -> serde_json::Value {
    serde_json::json!({
        "terms": seed.terms,
        "K": seed.k_sep(),
        "lambda": lambda,
        "region": region,
    })
}
