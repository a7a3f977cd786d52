//! Uniform grids, sampled functions and the fixed-order stencils and
//! quadratures shared by every numerical check in the crate.
//!
//! Derivatives are 4th order (5-point central, one-sided 5-point at the two
//! outermost nodes on each side). Cumulative integrals use composite Simpson
//! on even offsets and a single-interval 3-point rule on odd offsets, so the
//! global error is O(h^4) throughout.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SipError};

/// Smallest number of samples accepted by [`SampledFunction`].
pub const MIN_SAMPLES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformGrid {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl UniformGrid {
    pub fn new(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
            return Err(SipError::InvalidGrid(format!("need finite lo < hi, got [{lo}, {hi}]")));
        }
        if n < 6 {
            return Err(SipError::InvalidGrid(format!("need at least 6 points, got {n}")));
        }
        Ok(Self { lo, hi, n })
    }

    /// Grid of `n` nodes strictly inside `(lo, hi)`, spacing `(hi - lo) / (n + 1)`.
    /// This is the node set of a Dirichlet box whose walls sit at `lo` and `hi`.
    pub fn interior(lo: f64, hi: f64, n: usize) -> Result<Self> {
        let h = (hi - lo) / (n as f64 + 1.0);
        Self::new(lo + h, hi - h, n)
    }

    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / (self.n as f64 - 1.0)
    }

    pub fn point(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.hi
        } else {
            self.lo + i as f64 * self.spacing()
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.point(i)).collect()
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn midpoint_index(&self) -> usize {
        self.n / 2
    }

    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..self.n).map(|i| f(self.point(i))).collect()
    }
}

/// Function values on a [`UniformGrid`]; all values finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledFunction {
    pub grid: UniformGrid,
    pub values: Vec<f64>,
}

impl SampledFunction {
    pub fn new(grid: UniformGrid, values: Vec<f64>) -> Result<Self> {
        if grid.n < MIN_SAMPLES {
            return Err(SipError::InvalidGrid(format!(
                "sampled functions need at least {MIN_SAMPLES} points, got {}",
                grid.n
            )));
        }
        if values.len() != grid.n {
            return Err(SipError::InvalidGrid(format!(
                "{} values for a {}-point grid",
                values.len(),
                grid.n
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(SipError::NonFinite { what: "sample", x: grid.point(i) });
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: UniformGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.sample(f);
        Self::new(grid, values)
    }

    pub fn points(&self) -> Vec<f64> {
        self.grid.points()
    }

    pub fn derivative(&self) -> Vec<f64> {
        derivative(&self.values, self.grid.spacing())
    }

    pub fn second_derivative(&self) -> Vec<f64> {
        second_derivative(&self.values, self.grid.spacing())
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.values)
    }
}

pub fn max_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// 6th-order first derivative of uniformly spaced samples.
pub fn derivative(f: &[f64], h: f64) -> Vec<f64> {
    const EDGE: [[f64; 7]; 3] = [
        [-147.0, 360.0, -450.0, 400.0, -225.0, 72.0, -10.0],
        [-10.0, -77.0, 150.0, -100.0, 50.0, -15.0, 2.0],
        [2.0, -24.0, -35.0, 80.0, -30.0, 8.0, -1.0],
    ];
    const CENTRAL: [f64; 7] = [-1.0, 9.0, -45.0, 0.0, 45.0, -9.0, 1.0];
    let n = f.len();
    assert!(n >= 7, "derivative stencil needs 7 points");
    let c = 1.0 / (60.0 * h);
    let dot = |w: &[f64; 7], s: &[f64]| w.iter().zip(s).map(|(a, b)| a * b).sum::<f64>();
    let mut d = vec![0.0; n];
    for i in 3..n - 3 {
        d[i] = c * dot(&CENTRAL, &f[i - 3..=i + 3]);
    }
    let m = n - 1;
    for (k, w) in EDGE.iter().enumerate() {
        d[k] = c * dot(w, &f[..7]);
        let tail: Vec<f64> = f[n - 7..].iter().rev().cloned().collect();
        d[m - k] = -c * dot(w, &tail);
    }
    d
}

/// 4th-order second derivative of uniformly spaced samples.
pub fn second_derivative(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    assert!(n >= 6, "second-derivative stencil needs 6 points");
    let mut d = vec![0.0; n];
    let c = 1.0 / (12.0 * h * h);
    d[0] = c * (45.0 * f[0] - 154.0 * f[1] + 214.0 * f[2] - 156.0 * f[3] + 61.0 * f[4] - 10.0 * f[5]);
    d[1] = c * (10.0 * f[0] - 15.0 * f[1] - 4.0 * f[2] + 14.0 * f[3] - 6.0 * f[4] + f[5]);
    for i in 2..n - 2 {
        d[i] = c * (-f[i - 2] + 16.0 * f[i - 1] - 30.0 * f[i] + 16.0 * f[i + 1] - f[i + 2]);
    }
    let m = n - 1;
    d[m] = c
        * (45.0 * f[m] - 154.0 * f[m - 1] + 214.0 * f[m - 2] - 156.0 * f[m - 3] + 61.0 * f[m - 4]
            - 10.0 * f[m - 5]);
    d[m - 1] = c
        * (10.0 * f[m] - 15.0 * f[m - 1] - 4.0 * f[m - 2] + 14.0 * f[m - 3] - 6.0 * f[m - 4]
            + f[m - 5]);
    d
}

/// 5-point central derivative of a callable at `x` with step `h`.
pub fn stencil_derivative(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
}

/// Running integral `I[i] = ∫_{x_0}^{x_i} f`, composite Simpson on even
/// offsets, Simpson plus a one-interval 3-point rule on odd offsets.
pub fn cumulative_simpson(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    let mut out = vec![0.0; n];
    if n < 2 {
        return out;
    }
    if n == 2 {
        out[1] = 0.5 * h * (f[0] + f[1]);
        return out;
    }
    let mut even = 0.0;
    let mut i = 0;
    while i + 1 < n {
        // ∫_{x_i}^{x_{i+1}} using points i, i+1, i+2 (or i-1, i, i+1 at the end)
        let half = if i + 2 < n {
            h / 12.0 * (5.0 * f[i] + 8.0 * f[i + 1] - f[i + 2])
        } else {
            h / 12.0 * (-f[i - 1] + 8.0 * f[i] + 5.0 * f[i + 1])
        };
        out[i + 1] = even + half;
        if i + 2 < n {
            even += h / 3.0 * (f[i] + 4.0 * f[i + 1] + f[i + 2]);
            out[i + 2] = even;
        }
        i += 2;
    }
    out
}

/// Adaptive Simpson quadrature of `f` over `[a, b]`, refined until the
/// Richardson estimate falls below `tol`.
pub fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn step(f: &impl Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let diff = left + right - whole;
        if depth == 0 || diff.abs() <= 15.0 * tol {
            return left + right + diff / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 24)
}

/// Running integral `I[i] = ∫_{x_0}^{x_i} f` for a function known in
/// closed form, adaptive Simpson on every grid interval.
pub fn cumulative_integral(f: impl Fn(f64) -> f64, grid: &UniformGrid, tol: f64) -> Vec<f64> {
    let pts = grid.points();
    let mut out = Vec::with_capacity(pts.len());
    let mut acc = NeumaierSum::default();
    out.push(0.0);
    for w in pts.windows(2) {
        acc.add(adaptive_simpson(&f, w[0], w[1], tol));
        out.push(acc.total());
    }
    out
}

pub fn trapezoid(f: &[f64], h: f64) -> f64 {
    let n = f.len();
    if n < 2 {
        return 0.0;
    }
    let mut s = NeumaierSum::default();
    for v in &f[1..n - 1] {
        s.add(*v);
    }
    h * (s.total() + 0.5 * (f[0] + f[n - 1]))
}

/// Compensated summation; fixed order makes results bit-reproducible.
#[derive(Debug, Default, Clone, Copy)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

pub fn mean(values: &[f64]) -> f64 {
    let mut s = NeumaierSum::default();
    values.iter().for_each(|v| s.add(*v));
    s.total() / values.len() as f64
}

/// Locations where sampled values jump through infinity: a sign change
/// between neighbours with `max(|f_i|, |f_{i+1}|) * h > 0.5`, or a
/// non-finite sample.
pub fn detect_poles(points: &[f64], values: &[f64]) -> Vec<f64> {
    let mut poles = Vec::new();
    for (i, v) in values.iter().enumerate() {
        if !v.is_finite() {
            poles.push(points[i]);
        }
    }
    for i in 0..values.len().saturating_sub(1) {
        let (a, b) = (values[i], values[i + 1]);
        if !(a.is_finite() && b.is_finite()) {
            continue;
        }
        let h = points[i + 1] - points[i];
        if a.signum() != b.signum() && a.abs().max(b.abs()) * h > 0.5 {
            poles.push(0.5 * (points[i] + points[i + 1]));
        }
    }
    poles.sort_by(f64::total_cmp);
    poles
}

/// Sign changes of `values`, ignoring samples below `rel * max|values|`.
pub fn count_nodes(values: &[f64], rel: f64) -> usize {
    let floor = rel * max_abs(values);
    let mut last = 0.0_f64;
    let mut nodes = 0;
    for v in values.iter().filter(|v| v.abs() > floor) {
        if last != 0.0 && v.signum() != last.signum() {
            nodes += 1;
        }
        last = *v;
    }
    nodes
}

/// Cubic Hermite interpolation of `(value, slope)` samples on a uniform grid.
pub fn hermite(grid: &UniformGrid, values: &[f64], slopes: &[f64], x: f64) -> f64 {
    let h = grid.spacing();
    let t = ((x - grid.lo) / h).clamp(0.0, (grid.n - 1) as f64);
    let i = (t.floor() as usize).min(grid.n - 2);
    let s = t - i as f64;
    if s == 0.0 {
        return values[i];
    }
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    h00 * values[i] + h10 * h * slopes[i] + h01 * values[i + 1] + h11 * h * slopes[i + 1]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivative_is_exact_for_low_degree() {
        let g = UniformGrid::new(-1.0, 2.0, 64).unwrap();
        let d = derivative(&g.sample(|x| x.powi(6) - 3.0 * x * x + x), g.spacing());
        for (i, x) in g.points().into_iter().enumerate() {
            assert!((d[i] - (6.0 * x.powi(5) - 6.0 * x + 1.0)).abs() < 1e-8, "{i}");
        }
        let f = g.sample(|x| x.powi(4) - 3.0 * x * x + x);
        let dd = second_derivative(&f, g.spacing());
        for (i, x) in g.points().into_iter().enumerate() {
            assert!((dd[i] - (12.0 * x * x - 6.0)).abs() < 1e-7, "{i}");
        }
    }

    #[test]
    fn cumulative_simpson_matches_closed_form() {
        let g = UniformGrid::new(0.0, 3.0, 301).unwrap();
        let f = g.sample(f64::cos);
        let c = cumulative_simpson(&f, g.spacing());
        for (i, x) in g.points().into_iter().enumerate() {
            assert!((c[i] - x.sin()).abs() < 1e-9);
        }
        // even and odd node counts take different end paths
        let g = UniformGrid::new(0.0, 3.0, 300).unwrap();
        let c = cumulative_simpson(&g.sample(f64::cos), g.spacing());
        assert!((c[299] - 3.0_f64.sin()).abs() < 1e-9);
    }

    #[test]
    fn poles_are_located_not_clipped() {
        let g = UniformGrid::new(0.1, 3.0, 400).unwrap();
        let pts = g.points();
        let vals = g.sample(|x| -x.tan());
        let poles = detect_poles(&pts, &vals);
        assert_eq!(poles.len(), 1);
        assert!((poles[0] - std::f64::consts::FRAC_PI_2).abs() < g.spacing());
        // smooth zero crossings are not poles
        assert!(detect_poles(&pts, &g.sample(|x| x - 1.0)).is_empty());
    }

    #[test]
    fn node_count_ignores_tails() {
        let g = UniformGrid::new(-6.0, 6.0, 500).unwrap();
        let v = g.sample(|x| (4.0 * x * x - 2.0) * (-x * x / 2.0).exp());
        assert_eq!(count_nodes(&v, 1e-6), 2);
    }

    #[test]
    fn hermite_reproduces_cubics() {
        let g = UniformGrid::new(0.0, 1.0, 11).unwrap();
        let v = g.sample(|x| x * x * x - x);
        let s = g.sample(|x| 3.0 * x * x - 1.0);
        for x in [0.0, 0.033, 0.5, 0.777, 1.0] {
            assert!((hermite(&g, &v, &s, x) - (x * x * x - x)).abs() < 1e-14);
        }
    }

    #[test]
    fn sampled_function_rejects_short_or_nonfinite() {
        let g = UniformGrid::new(0.0, 1.0, 10).unwrap();
        assert!(SampledFunction::from_fn(g, |x| x).is_err());
        let g = UniformGrid::new(0.0, 1.0, 64).unwrap();
        assert!(SampledFunction::from_fn(g, |x| 1.0 / (x - 0.0)).is_err());
    }
}
