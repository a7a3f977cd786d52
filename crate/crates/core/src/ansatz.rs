//! Superpotentials built from the ansatz `W(x, λ) = λ F(x)`.
//!
//! Shape invariance under `λ → μ = λ − α` reduces, with `ξ = α x`, to the
//! Riccati equation `F̃² + F̃′ + K = 0`, linearized by `F̃ = u′/u` into the
//! free-particle equation `u″ + K u = 0`. Every seed `u` gives a family
//!
//! ```text
//! W(x) = λ F̃(α x) + φ(α x) + c / λ
//! ```
//!
//! where `φ` solves `φ′ + F̃ φ = C` (second-solution extension) and `c / λ`
//! is the constant-shift extension. With `F̃ = u′/u` the integrating factor
//! is `u` itself, so `φ = (C ∫u dξ + D) / u`.
//!
//! Sign/branch mapping: `sin → k cot`, `cos → −k tan`, `sinh → c coth`,
//! `cosh → c tanh`, `exp → c`; a negative `α` reflects the argument.

use serde::{Deserialize, Serialize};

use crate::catalog::{Family, ParamSet};
use crate::error::{Result, SipError};
use crate::grid::{
    cumulative_simpson, detect_poles, hermite, max_abs, second_derivative, SampledFunction,
    UniformGrid,
};
use crate::verify::{Tolerance, VerificationReport};

/// Relative tolerance for `k² = K` / `c² = −K` consistency.
const SEPARATION_RTOL: f64 = 1e-12;

/// Residual bound for accepting a sampled seed as a solution.
pub const SEED_RESIDUAL_TOL: f64 = 1e-6;

/// A sampled seed `u(ξ)` with its slope, e.g. from [`integrate_seed`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CustomSeed {
    pub grid: UniformGrid,
    pub u: Vec<f64>,
    pub du: Vec<f64>,
    /// `∫_{grid.lo}^{ξ} u` on the nodes.
    #[serde(skip)]
    antiderivative: Vec<f64>,
}

impl CustomSeed {
    pub fn new(grid: UniformGrid, u: Vec<f64>, du: Vec<f64>) -> Result<Self> {
        if u.len() != grid.n || du.len() != grid.n {
            return Err(SipError::InvalidGrid("custom seed arrays must match the grid".into()));
        }
        SampledFunction::new(grid, u.clone())?;
        SampledFunction::new(grid, du.clone())?;
        let antiderivative = cumulative_simpson(&u, grid.spacing());
        Ok(Self { grid, u, du, antiderivative })
    }

    fn value(&self, xi: f64) -> f64 {
        hermite(&self.grid, &self.u, &self.du, xi)
    }

    fn slope(&self, xi: f64) -> f64 {
        // slope of the Hermite interpolant of u′ is unknown; interpolate u′
        // linearly between the two O(h⁴)-accurate nodal slopes' cubic fit
        let h = self.grid.spacing();
        let t = ((xi - self.grid.lo) / h).clamp(0.0, (self.grid.n - 1) as f64);
        let i = (t.floor() as usize).min(self.grid.n - 2);
        let s = t - i as f64;
        if s == 0.0 {
            return self.du[i];
        }
        // cubic Lagrange through four neighbouring slopes
        let j = i.saturating_sub(1).min(self.grid.n - 4);
        let ts = t - j as f64;
        let d = &self.du[j..j + 4];
        let l0 = -(ts - 1.0) * (ts - 2.0) * (ts - 3.0) / 6.0;
        let l1 = ts * (ts - 2.0) * (ts - 3.0) / 2.0;
        let l2 = -ts * (ts - 1.0) * (ts - 3.0) / 2.0;
        let l3 = ts * (ts - 1.0) * (ts - 2.0) / 6.0;
        l0 * d[0] + l1 * d[1] + l2 * d[2] + l3 * d[3]
    }

    fn antiderivative(&mut self) -> &[f64] {
        if self.antiderivative.len() != self.grid.n {
            self.antiderivative = cumulative_simpson(&self.u, self.grid.spacing());
        }
        &self.antiderivative
    }

    fn integral(&self, xi: f64) -> f64 {
        let big_u = if self.antiderivative.len() == self.grid.n {
            std::borrow::Cow::Borrowed(&self.antiderivative)
        } else {
            std::borrow::Cow::Owned(cumulative_simpson(&self.u, self.grid.spacing()))
        };
        hermite(&self.grid, &big_u, &self.u, xi)
    }

    fn sign_changes(&self) -> Vec<f64> {
        let pts = self.grid.points();
        self.u
            .windows(2)
            .enumerate()
            .filter(|(_, w)| w[0].signum() != w[1].signum() || w[0] == 0.0)
            .map(|(i, _)| 0.5 * (pts[i] + pts[i + 1]))
            .collect()
    }
}

/// Named solutions of `u″ + K u = 0`, plus sampled custom seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SeedBranch {
    /// `u = A ξ + B`
    Linear { a: f64, b: f64 },
    /// `u = sin(k ξ)`
    Sin { k: f64 },
    /// `u = cos(k ξ)`
    Cos { k: f64 },
    /// `u = sinh(c ξ)`
    Sinh { c: f64 },
    /// `u = cosh(c ξ)`
    Cosh { c: f64 },
    /// `u = exp(c ξ) = cosh(c ξ) + sinh(c ξ)`
    Exp { c: f64 },
    Custom(CustomSeed),
}

impl SeedBranch {
    pub fn name(&self) -> &'static str {
        match self {
            SeedBranch::Linear { .. } => "linear",
            SeedBranch::Sin { .. } => "sin",
            SeedBranch::Cos { .. } => "cos",
            SeedBranch::Sinh { .. } => "sinh",
            SeedBranch::Cosh { .. } => "cosh",
            SeedBranch::Exp { .. } => "exp",
            SeedBranch::Custom(_) => "custom",
        }
    }

    /// Branch with unit constants for a given `K`: `A = 1, B = 0` for the
    /// linear case, `k = √K` or `c = √(−K)` otherwise.
    pub fn standard(name: &str, k_sep: f64) -> Result<Self> {
        let k = k_sep.abs().sqrt();
        Ok(match name {
            "linear" => SeedBranch::Linear { a: 1.0, b: 0.0 },
            "sin" => SeedBranch::Sin { k },
            "cos" => SeedBranch::Cos { k },
            "sinh" => SeedBranch::Sinh { c: k },
            "cosh" => SeedBranch::Cosh { c: k },
            "exp" => SeedBranch::Exp { c: k },
            other => return Err(SipError::InvalidInput(format!("unknown branch `{other}`"))),
        })
    }
}

/// A solution `u` of `u″ + K u = 0` (or of `u″ = (V₀ − K) u` for custom seeds).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedSolution {
    #[serde(rename = "K")]
    pub k_sep: f64,
    pub branch: SeedBranch,
}

impl SeedSolution {
    pub fn new(k_sep: f64, branch: SeedBranch) -> Result<Self> {
        let close = |s: f64, target: f64| (s - target).abs() <= SEPARATION_RTOL * target.abs().max(1.0);
        let ok = match &branch {
            SeedBranch::Linear { a, b } => k_sep == 0.0 && (*a != 0.0 || *b != 0.0),
            SeedBranch::Sin { k } | SeedBranch::Cos { k } => {
                k_sep > 0.0 && *k != 0.0 && close(k * k, k_sep)
            }
            SeedBranch::Sinh { c } | SeedBranch::Cosh { c } | SeedBranch::Exp { c } => {
                k_sep < 0.0 && *c != 0.0 && close(c * c, -k_sep)
            }
            SeedBranch::Custom(_) => true,
        };
        if !ok {
            return Err(SipError::BranchMismatch { branch: branch.name(), k: k_sep });
        }
        Ok(Self { k_sep, branch })
    }

    pub fn u(&self, xi: f64) -> f64 {
        match &self.branch {
            SeedBranch::Linear { a, b } => a * xi + b,
            SeedBranch::Sin { k } => (k * xi).sin(),
            SeedBranch::Cos { k } => (k * xi).cos(),
            SeedBranch::Sinh { c } => (c * xi).sinh(),
            SeedBranch::Cosh { c } => (c * xi).cosh(),
            SeedBranch::Exp { c } => (c * xi).exp(),
            SeedBranch::Custom(s) => s.value(xi),
        }
    }

    pub fn u_prime(&self, xi: f64) -> f64 {
        match &self.branch {
            SeedBranch::Linear { a, .. } => *a,
            SeedBranch::Sin { k } => k * (k * xi).cos(),
            SeedBranch::Cos { k } => -k * (k * xi).sin(),
            SeedBranch::Sinh { c } => c * (c * xi).cosh(),
            SeedBranch::Cosh { c } => c * (c * xi).sinh(),
            SeedBranch::Exp { c } => c * (c * xi).exp(),
            SeedBranch::Custom(s) => s.slope(xi),
        }
    }

    /// An antiderivative `∫ u dξ` (fixed integration constant per branch).
    pub fn integral(&self, xi: f64) -> f64 {
        match &self.branch {
            SeedBranch::Linear { a, b } => 0.5 * a * xi * xi + b * xi,
            SeedBranch::Sin { k } => -(k * xi).cos() / k,
            SeedBranch::Cos { k } => (k * xi).sin() / k,
            SeedBranch::Sinh { c } => (c * xi).cosh() / c,
            SeedBranch::Cosh { c } => (c * xi).sinh() / c,
            SeedBranch::Exp { c } => (c * xi).exp() / c,
            SeedBranch::Custom(s) => s.integral(xi),
        }
    }

    /// `F̃(ξ) = u′/u`.
    pub fn log_derivative(&self, xi: f64) -> f64 {
        match &self.branch {
            SeedBranch::Linear { a, b } => a / (a * xi + b),
            SeedBranch::Sin { k } => k / (k * xi).tan(),
            SeedBranch::Cos { k } => -k * (k * xi).tan(),
            SeedBranch::Sinh { c } => c / (c * xi).tanh(),
            SeedBranch::Cosh { c } => c * (c * xi).tanh(),
            SeedBranch::Exp { c } => *c,
            SeedBranch::Custom(s) => s.slope(xi) / s.value(xi),
        }
    }

    /// `dF̃/dξ`: `−K − F̃²` for named branches, a 5-point stencil on the
    /// interpolated `F̃` (seed spacing) for custom seeds.
    pub fn log_derivative_prime(&self, xi: f64) -> f64 {
        match &self.branch {
            SeedBranch::Custom(s) => {
                let h = s.grid.spacing();
                let f = |t: f64| s.slope(t) / s.value(t);
                crate::grid::stencil_derivative(f, xi, h)
            }
            _ => {
                let f = self.log_derivative(xi);
                -self.k_sep - f * f
            }
        }
    }

    /// Zeros of `u` inside `[lo, hi]` (poles of `F̃`).
    pub fn zeros_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        let periodic = |offset: f64, period: f64| -> Vec<f64> {
            let first = ((lo - offset) / period).ceil() as i64;
            let last = ((hi - offset) / period).floor() as i64;
            (first..=last).map(|n| offset + n as f64 * period).collect()
        };
        match &self.branch {
            SeedBranch::Linear { a, b } if *a != 0.0 => {
                let z = -b / a;
                if z >= lo && z <= hi {
                    vec![z]
                } else {
                    vec![]
                }
            }
            SeedBranch::Sin { k } => {
                let p = std::f64::consts::PI / k.abs();
                periodic(0.0, p)
            }
            SeedBranch::Cos { k } => {
                let p = std::f64::consts::PI / k.abs();
                periodic(0.5 * p, p)
            }
            SeedBranch::Sinh { .. } if lo <= 0.0 && hi >= 0.0 => vec![0.0],
            SeedBranch::Custom(s) => {
                s.sign_changes().into_iter().filter(|z| *z >= lo && *z <= hi).collect()
            }
            _ => vec![],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhiParams {
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "D")]
    pub d: f64,
}

/// The constant-shift term `g = c / λ`; `value` is stored for readers of the
/// JSON and recomputed whenever `λ` changes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantShift {
    pub c: f64,
    pub value: f64,
}

/// `W(x) = λ F̃(α x) + φ(α x) + c / λ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstructedSuperpotential {
    #[serde(flatten)]
    pub seed: SeedSolution,
    pub alpha: f64,
    pub lambda: f64,
    pub phi_params: Option<PhiParams>,
    pub g: Option<ConstantShift>,
}

impl ConstructedSuperpotential {
    pub fn xi(&self, x: f64) -> f64 {
        self.alpha * x
    }

    /// `F(x) = F̃(α x)`.
    pub fn f(&self, x: f64) -> f64 {
        self.seed.log_derivative(self.xi(x))
    }

    /// Second-solution term `φ(α x)`, zero when absent.
    pub fn phi(&self, x: f64) -> f64 {
        match self.phi_params {
            Some(PhiParams { c, d }) => {
                let xi = self.xi(x);
                (c * self.seed.integral(xi) + d) / self.seed.u(xi)
            }
            None => 0.0,
        }
    }

    fn phi_xi_prime(&self, x: f64) -> f64 {
        match self.phi_params {
            Some(PhiParams { c, .. }) => c - self.f(x) * self.phi(x),
            None => 0.0,
        }
    }

    pub fn g_value(&self) -> f64 {
        self.g.map_or(0.0, |g| g.c / self.lambda)
    }

    pub fn w(&self, x: f64) -> f64 {
        self.lambda * self.f(x) + self.phi(x) + self.g_value()
    }

    pub fn w_prime(&self, x: f64) -> f64 {
        let xi = self.xi(x);
        self.alpha * (self.lambda * self.seed.log_derivative_prime(xi) + self.phi_xi_prime(x))
    }

    /// The same construction at another point of the `λ` ladder.
    pub fn with_lambda(&self, lambda: f64) -> Self {
        let mut out = self.clone();
        out.lambda = lambda;
        if let Some(g) = out.g.as_mut() {
            g.value = g.c / lambda;
        }
        out
    }

    /// Next ladder parameter `λ − α`.
    pub fn stepped_lambda(&self) -> f64 {
        self.lambda - self.alpha
    }

    /// Parameter set `{lambda}` used by the generic verifiers.
    pub fn params(&self) -> ParamSet {
        ParamSet::new().with("lambda", self.lambda)
    }

    pub fn w_param(&self, p: &ParamSet, x: f64) -> f64 {
        self.with_lambda(p.get("lambda").unwrap_or(self.lambda)).w(x)
    }

    pub fn w_prime_param(&self, p: &ParamSet, x: f64) -> f64 {
        self.with_lambda(p.get("lambda").unwrap_or(self.lambda)).w_prime(x)
    }

    pub fn tau(&self, p: &ParamSet) -> ParamSet {
        let l = p.get("lambda").unwrap_or(self.lambda);
        ParamSet::new().with("lambda", l - self.alpha)
    }

    /// Poles of `W` inside `[lo, hi]` (zeros of `u(α x)`).
    pub fn poles_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        let (a, b) = (self.xi(lo).min(self.xi(hi)), self.xi(lo).max(self.xi(hi)));
        let mut p: Vec<f64> = self.seed.zeros_in(a, b).into_iter().map(|z| z / self.alpha).collect();
        p.sort_by(f64::total_cmp);
        p
    }

    /// Pole-free subintervals of `[lo, hi]`, each trimmed by
    /// `1e-3 · (hi − lo)` around every pole.
    pub fn working_intervals(&self, lo: f64, hi: f64) -> Vec<(f64, f64)> {
        let margin = 1e-3 * (hi - lo);
        let mut out = Vec::new();
        let mut start = lo;
        for p in self.poles_in(lo, hi) {
            if p - margin > start {
                out.push((start, p - margin));
            }
            start = p + margin;
        }
        if hi > start {
            out.push((start, hi));
        }
        out
    }

    /// `x ↦ α (λ + μ) V₀(α x)` with `μ = λ − α`: the source term a
    /// generalized construction carries in `V⁺(λ) − V⁻(μ)`.
    pub fn generalized_source<'a>(&self, v0: impl Fn(f64) -> f64 + 'a) -> impl Fn(f64) -> f64 + 'a {
        let alpha = self.alpha;
        let scale = alpha * (2.0 * self.lambda - alpha);
        move |x| scale * v0(alpha * x)
    }

    /// Expected constant of `V⁺(λ) − V⁻(μ) − source`: `−α (λ + μ) K`.
    pub fn expected_shift(&self) -> f64 {
        -self.alpha * (2.0 * self.lambda - self.alpha) * self.seed.k_sep
    }
}

/// Case I/II/III construction `W(x) = λ u′(α x)/u(α x)`.
pub fn construct_case(seed: SeedSolution, alpha: f64, lambda: f64) -> Result<ConstructedSuperpotential> {
    if alpha == 0.0 || !alpha.is_finite() {
        return Err(SipError::ZeroAlpha);
    }
    if matches!(seed.branch, SeedBranch::Custom(_)) {
        return Err(SipError::InvalidInput(
            "custom seeds go through construct_generalized".into(),
        ));
    }
    let seed = SeedSolution::new(seed.k_sep, seed.branch)?;
    Ok(ConstructedSuperpotential { seed, alpha, lambda, phi_params: None, g: None })
}

/// Residual `max |F̃² + F̃′ + K|` with `F̃′` from 4th-order differences.
/// Grids that straddle a pole are rejected with the pole locations.
pub fn verify_case_riccati(f: &SampledFunction, k_sep: f64) -> Result<VerificationReport> {
    let pts = f.points();
    let poles = detect_poles(&pts, &f.values);
    if !poles.is_empty() {
        return Err(SipError::Pole { locations: poles });
    }
    let df = f.derivative();
    let residual: Vec<f64> =
        f.values.iter().zip(&df).map(|(v, d)| v * v + d + k_sep).collect();
    VerificationReport::from_residuals(&pts, &residual, -k_sep, Tolerance::FINITE_DIFFERENCE)
}

/// Adds `φ` solving `φ′ + F̃ φ = C`: `φ = (C ∫u dξ + D)/u`.
pub fn extend_second_solution(
    base: &ConstructedSuperpotential,
    c: f64,
    d: f64,
) -> Result<ConstructedSuperpotential> {
    if base.phi_params.is_some() {
        return Err(SipError::InvalidInput("base already carries a second-solution term".into()));
    }
    let mut out = base.clone();
    if let SeedBranch::Custom(s) = &mut out.seed.branch {
        s.antiderivative();
        if !s.sign_changes().is_empty() {
            return Err(SipError::Pole { locations: s.sign_changes() });
        }
    }
    out.phi_params = Some(PhiParams { c, d });
    Ok(out)
}

/// Adds the constant `g = c / λ`.
pub fn extend_constant_shift(
    base: &ConstructedSuperpotential,
    c: f64,
) -> Result<ConstructedSuperpotential> {
    if base.lambda == 0.0 {
        return Err(SipError::ZeroLambda);
    }
    let mut out = base.clone();
    let total = base.g.map_or(0.0, |g| g.c) + c;
    out.g = Some(ConstantShift { c: total, value: total / base.lambda });
    Ok(out)
}

/// `max |χ² + 2 W χ + χ′ − K(λ)|`; `chi_prime` defaults to 4th-order
/// differences of `chi`.
pub fn isospectral_shift_residual(
    w: impl Fn(f64) -> f64,
    chi: &SampledFunction,
    chi_prime: Option<&[f64]>,
    k_lambda: f64,
) -> Result<VerificationReport> {
    let pts = chi.points();
    let poles = detect_poles(&pts, &chi.values);
    if !poles.is_empty() {
        return Err(SipError::Pole { locations: poles });
    }
    let fd;
    let (dchi, tol) = match chi_prime {
        Some(d) => (d, Tolerance::ANALYTIC),
        None => {
            fd = chi.derivative();
            (fd.as_slice(), Tolerance::FINITE_DIFFERENCE)
        }
    };
    let mut residual = Vec::with_capacity(pts.len());
    for ((x, c), dc) in pts.iter().zip(&chi.values).zip(dchi) {
        let wx = w(*x);
        if !wx.is_finite() {
            return Err(SipError::NonFinite { what: "superpotential", x: *x });
        }
        residual.push(c * c + 2.0 * wx * c + dc - k_lambda);
    }
    VerificationReport::from_residuals(&pts, &residual, k_lambda, tol)
}

/// RK4 solution of `u″ = (V₀(ξ) − K) u` on `n` nodes of `[lo, hi]` from
/// `u(lo) = u0`, `u′(lo) = du0`, with 8 internal substeps per grid interval.
pub fn integrate_seed(
    v0: impl Fn(f64) -> f64,
    k_sep: f64,
    lo: f64,
    hi: f64,
    n: usize,
    u0: f64,
    du0: f64,
) -> Result<SeedSolution> {
    let grid = UniformGrid::new(lo, hi, n)?;
    let substeps = 8;
    let h = grid.spacing() / substeps as f64;
    let rhs = |xi: f64, y: [f64; 2]| [y[1], (v0(xi) - k_sep) * y[0]];
    let mut y = [u0, du0];
    let mut u = Vec::with_capacity(n);
    let mut du = Vec::with_capacity(n);
    u.push(u0);
    du.push(du0);
    for i in 0..n - 1 {
        let mut xi = grid.point(i);
        for _ in 0..substeps {
            let k1 = rhs(xi, y);
            let k2 = rhs(xi + 0.5 * h, [y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]]);
            let k3 = rhs(xi + 0.5 * h, [y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]]);
            let k4 = rhs(xi + h, [y[0] + h * k3[0], y[1] + h * k3[1]]);
            for j in 0..2 {
                y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
            }
            xi += h;
        }
        u.push(y[0]);
        du.push(y[1]);
    }
    SeedSolution::new(k_sep, SeedBranch::Custom(CustomSeed::new(grid, u, du)?))
}

/// Largest `|u″ − (V₀ − K) u|` on the seed grid, `u″` by 4th-order differences.
pub fn seed_residual(seed: &CustomSeed, v0: impl Fn(f64) -> f64, k_sep: f64) -> f64 {
    let d2 = second_derivative(&seed.u, seed.grid.spacing());
    let pts = seed.grid.points();
    let r: Vec<f64> = (0..pts.len()).map(|i| d2[i] - (v0(pts[i]) - k_sep) * seed.u[i]).collect();
    max_abs(&r)
}

/// `W = λ u′/u` for a seed solving `u″ = (V₀ − K) u`, i.e. the Schrödinger
/// equation `−u″ + V₀ u = K u`. The resulting family satisfies
/// `V⁺(λ) − V⁻(λ − α) = α (2λ − α) (V₀(α x) − K)`; see
/// [`ConstructedSuperpotential::generalized_source`].
pub fn construct_generalized(
    v0: impl Fn(f64) -> f64,
    k_sep: f64,
    seed: SeedSolution,
    alpha: f64,
    lambda: f64,
) -> Result<ConstructedSuperpotential> {
    if alpha == 0.0 || !alpha.is_finite() {
        return Err(SipError::ZeroAlpha);
    }
    let custom = match &seed.branch {
        SeedBranch::Custom(s) => s.clone(),
        _ => {
            // named branches: sample them on a default grid for the checks below
            return Err(SipError::InvalidInput(
                "construct_generalized expects a sampled (custom) seed".into(),
            ));
        }
    };
    let zeros = custom.sign_changes();
    if !zeros.is_empty() {
        return Err(SipError::Pole { locations: zeros });
    }
    let residual = seed_residual(&custom, &v0, k_sep);
    if residual > SEED_RESIDUAL_TOL {
        return Err(SipError::NotASolution { residual, tolerance: SEED_RESIDUAL_TOL });
    }
    Ok(ConstructedSuperpotential {
        seed: SeedSolution { k_sep, branch: seed.branch },
        alpha,
        lambda,
        phi_params: None,
        g: None,
    })
}

/// A documented `(case, extension, shift)` route to a catalog family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recipe {
    pub family: Family,
    pub description: String,
    pub construction: ConstructedSuperpotential,
}

/// Rebuilds the catalog superpotential of `family` at `p` from the ansatz.
/// The ladder `λ → λ − α` of the result reproduces the family's `τ`.
pub fn reconstruct(family: Family, p: &ParamSet) -> Result<Recipe> {
    family.validate(p)?;
    let g = |n: &str| p.get(n).unwrap();
    let named = |name: &str, k: f64| SeedSolution::new(k, SeedBranch::standard(name, k)?);
    let (construction, description) = match family {
        Family::ShiftedOscillator => {
            let seed = SeedSolution::new(0.0, SeedBranch::Linear { a: 0.0, b: 1.0 })?;
            let base = construct_case(seed, 1.0, 1.0)?;
            (
                extend_second_solution(&base, 0.5 * g("omega"), -g("b"))?,
                "Case I with u = 1 (F = 0); second solution C = omega/2, D = -b".to_string(),
            )
        }
        Family::RadialOscillator => {
            let base = construct_case(named("linear", 0.0)?, 1.0, -(g("ell") + 1.0))?;
            (
                extend_second_solution(&base, g("omega"), 0.0)?,
                "Case I with u = xi, alpha = 1, lambda = -(ell+1); second solution C = omega, D = 0"
                    .to_string(),
            )
        }
        Family::Coulomb => {
            let base = construct_case(named("linear", 0.0)?, 1.0, -(g("ell") + 1.0))?;
            (
                extend_constant_shift(&base, -0.5 * g("e2"))?,
                "Case I with u = xi, alpha = 1, lambda = -(ell+1); shift c = -e2/2".to_string(),
            )
        }
        Family::Morse => {
            let base = construct_case(named("exp", -1.0)?, g("a"), g("A"))?;
            (
                extend_second_solution(&base, 0.0, -g("B"))?,
                "Case III with u = exp(xi), alpha = a, lambda = A; second solution C = 0, D = -B"
                    .to_string(),
            )
        }
        Family::ScarfIIHyperbolic => {
            let base = construct_case(named("cosh", -1.0)?, g("a"), g("A"))?;
            (
                extend_second_solution(&base, 0.0, g("B"))?,
                "Case III with u = cosh(xi), alpha = a, lambda = A; second solution C = 0, D = B"
                    .to_string(),
            )
        }
        Family::RosenMorseIIHyperbolic => {
            let base = construct_case(named("cosh", -1.0)?, g("a"), g("A"))?;
            (
                extend_constant_shift(&base, g("B"))?,
                "Case III with u = cosh(xi), alpha = a, lambda = A; shift c = B".to_string(),
            )
        }
        Family::Eckart => {
            let base = construct_case(named("sinh", -1.0)?, -g("a"), g("A"))?;
            (
                extend_constant_shift(&base, g("B"))?,
                "Case III with u = sinh(xi), alpha = -a, lambda = A; shift c = B".to_string(),
            )
        }
        Family::ScarfITrigonometric => {
            let base = construct_case(named("cos", 1.0)?, -g("a"), g("A"))?;
            (
                extend_second_solution(&base, 0.0, -g("B"))?,
                "Case II with u = cos(xi), alpha = -a, lambda = A; second solution C = 0, D = -B"
                    .to_string(),
            )
        }
        Family::GenPoschlTeller => {
            let base = construct_case(named("sinh", -1.0)?, g("a"), g("A"))?;
            (
                extend_second_solution(&base, 0.0, -g("B"))?,
                "Case III with u = sinh(xi), alpha = a, lambda = A; second solution C = 0, D = -B"
                    .to_string(),
            )
        }
        Family::RosenMorseITrigonometric => {
            let base = construct_case(named("sin", 1.0)?, -g("a"), g("A"))?;
            (
                extend_constant_shift(&base, -g("B"))?,
                "Case II with u = sin(xi), alpha = -a, lambda = A; shift c = -B".to_string(),
            )
        }
    };
    Ok(Recipe { family, description, construction })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::verify_shape_invariance;

    fn grid(lo: f64, hi: f64) -> UniformGrid {
        UniformGrid::new(lo, hi, 4097).unwrap()
    }

    #[test]
    fn case_examples() {
        let w = construct_case(SeedSolution::new(0.0, SeedBranch::Linear { a: 1.0, b: 0.0 }).unwrap(), 1.0, 1.0)
            .unwrap();
        for x in [0.5, 1.0, 3.0] {
            assert!((w.w(x) - 1.0 / x).abs() < 1e-15);
        }
        let w = construct_case(SeedSolution::new(1.0, SeedBranch::Cos { k: 1.0 }).unwrap(), 1.0, 1.0).unwrap();
        for x in [0.1, 0.7, 1.2] {
            assert!((w.w(x) + x.tan()).abs() < 1e-14);
        }
        let w = construct_case(SeedSolution::new(-1.0, SeedBranch::Cosh { c: 1.0 }).unwrap(), 1.0, 2.0).unwrap();
        for x in [-2.0, 0.0, 1.5] {
            assert!((w.w(x) - 2.0 * x.tanh()).abs() < 1e-15);
        }
    }

    #[test]
    fn branch_and_sign_mismatches_are_rejected() {
        assert!(matches!(
            SeedSolution::new(1.0, SeedBranch::Linear { a: 1.0, b: 0.0 }),
            Err(SipError::BranchMismatch { .. })
        ));
        assert!(SeedSolution::new(-1.0, SeedBranch::Sin { k: 1.0 }).is_err());
        assert!(SeedSolution::new(1.0, SeedBranch::Cosh { c: 1.0 }).is_err());
        assert!(SeedSolution::new(4.0, SeedBranch::Sin { k: 1.0 }).is_err());
        let s = SeedSolution::new(0.0, SeedBranch::Linear { a: 1.0, b: 0.0 }).unwrap();
        assert!(matches!(construct_case(s, 0.0, 1.0), Err(SipError::ZeroAlpha)));
    }

    #[test]
    fn case_riccati_examples() {
        let f = SampledFunction::from_fn(grid(1.0, 2.0), |x| 1.0 / x).unwrap();
        assert!(verify_case_riccati(&f, 0.0).unwrap().max_residual < 1e-8);
        let f = SampledFunction::from_fn(grid(0.0, 1.2), |x| -x.tan()).unwrap();
        assert!(verify_case_riccati(&f, 1.0).unwrap().max_residual < 1e-6);
        let f = SampledFunction::from_fn(grid(-3.0, 3.0), f64::tanh).unwrap();
        assert!(verify_case_riccati(&f, -1.0).unwrap().max_residual < 1e-6);
    }

    #[test]
    fn case_riccati_reports_poles() {
        let f = SampledFunction::from_fn(grid(0.0, 3.0), |x| -x.tan()).unwrap();
        match verify_case_riccati(&f, 1.0) {
            Err(SipError::Pole { locations }) => {
                assert_eq!(locations.len(), 1);
                assert!((locations[0] - std::f64::consts::FRAC_PI_2).abs() < 1e-3);
            }
            other => panic!("expected pole, got {other:?}"),
        }
    }

    #[test]
    fn every_named_case_satisfies_its_riccati_equation() {
        let cases = [
            (0.0, SeedBranch::Linear { a: 2.0, b: 1.0 }, 0.2, 3.0),
            (4.0, SeedBranch::Sin { k: 2.0 }, 0.1, 1.4),
            (4.0, SeedBranch::Cos { k: 2.0 }, -0.7, 0.7),
            (-2.25, SeedBranch::Sinh { c: 1.5 }, 0.2, 3.0),
            (-2.25, SeedBranch::Cosh { c: 1.5 }, -3.0, 3.0),
            (-2.25, SeedBranch::Exp { c: 1.5 }, -3.0, 3.0),
        ];
        for (k, branch, lo, hi) in cases {
            let seed = SeedSolution::new(k, branch).unwrap();
            let f = SampledFunction::from_fn(grid(lo, hi), |xi| seed.log_derivative(xi)).unwrap();
            let r = verify_case_riccati(&f, k).unwrap();
            assert!(r.max_residual < 1e-6, "{}: {}", seed.branch.name(), r.max_residual);
        }
    }

    #[test]
    fn second_solution_examples() {
        let base = construct_case(SeedSolution::new(-1.0, SeedBranch::Cosh { c: 1.0 }).unwrap(), 1.0, 3.0).unwrap();
        let ext = extend_second_solution(&base, 0.0, 1.0).unwrap();
        for x in [-2.0, 0.0, 0.3, 4.0] {
            assert!((ext.phi(x) - 1.0 / x.cosh()).abs() < 1e-15);
            assert!((ext.w(x) - (3.0 * x.tanh() + 1.0 / x.cosh())).abs() < 1e-14);
        }
        let base = construct_case(SeedSolution::new(0.0, SeedBranch::Linear { a: 1.0, b: 0.0 }).unwrap(), 1.0, 1.0).unwrap();
        let ext = extend_second_solution(&base, 0.0, 1.0).unwrap();
        assert!((ext.phi(2.0) - 0.5).abs() < 1e-15);
        let ext0 = extend_second_solution(&base, 0.0, 0.0).unwrap();
        for x in [0.5, 1.0, 2.0] {
            assert_eq!(ext0.w(x), base.w(x));
        }
        assert!(extend_second_solution(&ext, 1.0, 0.0).is_err());
    }

    #[test]
    fn second_solution_solves_its_linear_equation() {
        // |φ′ + F̃ φ − C| on a grid, φ′ by differences of φ(ξ)
        let seeds = [
            (SeedSolution::new(0.0, SeedBranch::Linear { a: 1.0, b: 0.5 }).unwrap(), 0.2, 3.0),
            (SeedSolution::new(1.0, SeedBranch::Sin { k: 1.0 }).unwrap(), 0.4, 2.7),
            (SeedSolution::new(1.0, SeedBranch::Cos { k: 1.0 }).unwrap(), -1.3, 1.3),
            (SeedSolution::new(-1.0, SeedBranch::Sinh { c: 1.0 }).unwrap(), 0.5, 3.0),
            (SeedSolution::new(-1.0, SeedBranch::Cosh { c: 1.0 }).unwrap(), -3.0, 3.0),
        ];
        for (seed, lo, hi) in seeds {
            let base = construct_case(seed, 1.0, 1.0).unwrap();
            let ext = extend_second_solution(&base, 0.7, -0.3).unwrap();
            let phi = SampledFunction::from_fn(grid(lo, hi), |x| ext.phi(x)).unwrap();
            let dphi = phi.derivative();
            let worst = phi
                .points()
                .iter()
                .zip(&phi.values)
                .zip(&dphi)
                .map(|((x, p), dp)| (dp + ext.f(*x) * p - 0.7).abs())
                .fold(0.0, f64::max);
            assert!(worst < 1e-8, "{}: {worst}", ext.seed.branch.name());
        }
    }

    #[test]
    fn constant_shift_examples() {
        let tanh = construct_case(SeedSolution::new(-1.0, SeedBranch::Cosh { c: 1.0 }).unwrap(), 1.0, 4.0).unwrap();
        let rm = extend_constant_shift(&tanh, 2.0).unwrap();
        assert!((rm.w(0.3) - (4.0 * 0.3_f64.tanh() + 0.5)).abs() < 1e-15);
        let coth = construct_case(SeedSolution::new(-1.0, SeedBranch::Sinh { c: 1.0 }).unwrap(), -1.0, 4.0).unwrap();
        let eck = extend_constant_shift(&coth, 2.0).unwrap();
        assert!((eck.w(0.8) - (-4.0 / 0.8_f64.tanh() + 0.5)).abs() < 1e-14);
        let same = extend_constant_shift(&tanh, 0.0).unwrap();
        assert_eq!(same.w(1.1), tanh.w(1.1));
        let zero = construct_case(SeedSolution::new(-1.0, SeedBranch::Cosh { c: 1.0 }).unwrap(), 1.0, 0.0).unwrap();
        assert!(matches!(extend_constant_shift(&zero, 1.0), Err(SipError::ZeroLambda)));
    }

    #[test]
    fn constructions_are_shape_invariant_along_the_lambda_ladder() {
        let seeds = [
            (SeedSolution::new(0.0, SeedBranch::Linear { a: 1.0, b: 0.0 }).unwrap(), 0.3, 4.0),
            (SeedSolution::new(1.0, SeedBranch::Cos { k: 1.0 }).unwrap(), -1.2, 1.2),
            (SeedSolution::new(-1.0, SeedBranch::Cosh { c: 1.0 }).unwrap(), -4.0, 4.0),
        ];
        for (seed, lo, hi) in seeds {
            let base = construct_case(seed, 1.0, 3.0).unwrap();
            for csp in [base.clone(), extend_constant_shift(&base, 1.5).unwrap()] {
                let g = UniformGrid::new(lo, hi, 512).unwrap();
                let r = verify_shape_invariance(
                    |p, x| csp.w_param(p, x),
                    |p, x| csp.w_prime_param(p, x),
                    &csp.params(),
                    |p| csp.tau(p),
                    &g,
                    1e-10,
                )
                .unwrap();
                assert!(r.passed, "{} {:?}", csp.seed.branch.name(), r);
            }
        }
    }

    #[test]
    fn working_intervals_skip_poles() {
        let csp = construct_case(SeedSolution::new(1.0, SeedBranch::Sin { k: 1.0 }).unwrap(), 1.0, 1.0).unwrap();
        let pi = std::f64::consts::PI;
        let poles = csp.poles_in(-1.0, 7.0);
        assert_eq!(poles.len(), 3);
        assert!((poles[1] - pi).abs() < 1e-15);
        let iv = csp.working_intervals(-1.0, 7.0);
        assert_eq!(iv.len(), 4);
        assert!(iv.iter().all(|(a, b)| a < b));
    }

    #[test]
    fn isospectral_shift_examples() {
        let g = UniformGrid::new(0.5, 3.0, 1024).unwrap();
        let zero = SampledFunction::from_fn(g, |_| 0.0).unwrap();
        assert_eq!(isospectral_shift_residual(|x| x, &zero, None, 0.0).unwrap().max_residual, 0.0);
        // χ = 1/x deforms W = x with K = 2
        let chi = SampledFunction::from_fn(g, |x| 1.0 / x).unwrap();
        assert!(isospectral_shift_residual(|x| x, &chi, None, 2.0).unwrap().max_residual < 1e-6);
        // χ = −x + 1/x gives −x² − 1, which is not constant
        let chi = SampledFunction::from_fn(g, |x| -x + 1.0 / x).unwrap();
        let r = isospectral_shift_residual(|x| x, &chi, None, -3.0).unwrap();
        assert!(!r.passed && r.max_residual > 1.0);
        let g = UniformGrid::new(-3.0, 3.0, 1024).unwrap();
        let c1 = SampledFunction::from_fn(g, |_| 1.0).unwrap();
        let r = isospectral_shift_residual(f64::tanh, &c1, None, 1.0).unwrap();
        assert!(r.max_residual > 1.0);
    }

    fn riccati_bessel_seed(lo: f64, hi: f64) -> SeedSolution {
        // u = ξ j₁(ξ) = sin ξ/ξ − cos ξ solves u″ = (2/ξ² − 1) u
        let u0 = lo.sin() / lo - lo.cos();
        let du0 = lo.cos() / lo - lo.sin() / (lo * lo) + lo.sin();
        integrate_seed(|xi| 2.0 / (xi * xi), 1.0, lo, hi, 8193, u0, du0).unwrap()
    }

    #[test]
    fn integrated_seed_matches_closed_form() {
        let seed = riccati_bessel_seed(0.5, 4.0);
        for xi in [0.5_f64, 1.0, 2.345, 4.0] {
            let exact = xi.sin() / xi - xi.cos();
            assert!((seed.u(xi) - exact).abs() < 1e-10, "{xi}");
        }
    }

    #[test]
    fn generalized_reductions() {
        // V0 ≡ 0, K = 0, u = ξ reduces to Case I
        let seed = integrate_seed(|_| 0.0, 0.0, 0.5, 3.0, 2049, 0.5, 1.0).unwrap();
        let gen = construct_generalized(|_| 0.0, 0.0, seed, 1.0, 2.0).unwrap();
        for x in [0.6, 1.0, 2.9] {
            assert!((gen.w(x) - 2.0 / x).abs() < 1e-10);
        }
        // constant V0 = c is absorbed into K' = K - c
        let c = 0.75;
        let k = (1.0_f64 - c).sqrt();
        let seed = integrate_seed(|_| c, 1.0, -1.0, 1.0, 2049, k.cos(), k * k.sin()).unwrap();
        let gen = construct_generalized(|_| c, 1.0, seed, 1.0, 2.0).unwrap();
        let case = construct_case(SeedSolution::new(1.0 - c, SeedBranch::Cos { k }).unwrap(), 1.0, 2.0).unwrap();
        for x in [-0.9, 0.0, 0.4] {
            assert!((gen.w(x) - case.w(x)).abs() < 1e-9);
        }
    }

    #[test]
    fn generalized_rejects_non_solutions_and_nodes() {
        let seed = riccati_bessel_seed(0.5, 4.0);
        assert!(matches!(
            construct_generalized(|_| 0.0, 1.0, seed, 1.0, 2.0),
            Err(SipError::NotASolution { .. })
        ));
        let seed = riccati_bessel_seed(0.5, 6.0);
        assert!(matches!(
            construct_generalized(|xi| 2.0 / (xi * xi), 1.0, seed, 1.0, 2.0),
            Err(SipError::Pole { .. })
        ));
    }

    #[test]
    fn every_family_is_reconstructed_and_its_ladder_matches_tau() {
        for fam in Family::ALL {
            let p = fam.reference_params();
            let recipe = reconstruct(fam, &p).unwrap();
            let csp = &recipe.construction;
            let g = fam.verification_grid(&p, 512).unwrap();
            let stepped = csp.with_lambda(csp.stepped_lambda());
            let q = fam.step_unchecked(&p);
            for x in g.points() {
                let (a, b) = (csp.w(x), fam.w(&p, x));
                assert!((a - b).abs() < 1e-10 * b.abs().max(1.0), "{fam} at {x}: {a} vs {b}");
                let (a, b) = (csp.w_prime(x), fam.w_prime(&p, x));
                assert!((a - b).abs() < 1e-9 * b.abs().max(1.0), "{fam} W' at {x}: {a} vs {b}");
                let (a, b) = (stepped.w(x), fam.w(&q, x));
                assert!((a - b).abs() < 1e-10 * b.abs().max(1.0), "{fam} ladder at {x}");
            }
        }
    }

    #[test]
    fn construction_json_has_expected_keys() {
        let r = reconstruct(Family::ScarfIIHyperbolic, &Family::ScarfIIHyperbolic.reference_params()).unwrap();
        let v = serde_json::to_value(&r.construction).unwrap();
        for key in ["branch", "K", "alpha", "lambda", "phi_params", "g"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(v["branch"]["kind"], "cosh");
        assert_eq!(v["phi_params"]["D"], 4.0);
        let back: ConstructedSuperpotential = serde_json::from_value(v).unwrap();
        assert_eq!(back, r.construction);
    }
}
