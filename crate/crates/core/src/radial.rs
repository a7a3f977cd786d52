//! Factorization of measure-weighted operators `−(1/f) d/dx f d/dx + V`,
//! applied to the radial equation with `f = r²`.
//!
//! With `B = d/dx + Q` and `C = −d/dx − f′/f + Q`, `C B` and `B C` carry
//! `V⁻ = Q² − Q′ − Q f′/f` and `V⁺ = Q² + Q′ − Q f′/f − (log f)″`
//! (product scheme). The weighted scheme uses `V± = Q² ± (Q′ + (f′/f) Q)`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::bessel::spherical_bessel_oracle;
use crate::error::{Result, SipError};
use crate::grid::{SampledFunction, UniformGrid};
use crate::spectral::format_number;
use crate::verify::VerificationReport;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MeasureWeight {
    /// `f ≡ 1`
    Unit,
    /// `f = x^p`, positive for `x > 0`
    Power { p: f64 },
}

impl MeasureWeight {
    pub fn f(&self, x: f64) -> f64 {
        match self {
            MeasureWeight::Unit => 1.0,
            MeasureWeight::Power { p } => x.powf(*p),
        }
    }

    /// `f′/f`
    pub fn log_f_prime(&self, x: f64) -> f64 {
        match self {
            MeasureWeight::Unit => 0.0,
            MeasureWeight::Power { p } => p / x,
        }
    }

    /// `(log f)″`
    pub fn log_f_second(&self, x: f64) -> f64 {
        match self {
            MeasureWeight::Unit => 0.0,
            MeasureWeight::Power { p } => -p / (x * x),
        }
    }

    pub fn check(&self, x: f64) -> Result<()> {
        if matches!(self, MeasureWeight::Power { .. }) && !(x > 0.0) {
            return Err(SipError::NonPositiveWeight(x));
        }
        let v = self.f(x);
        if !(v > 0.0 && v.is_finite()) {
            return Err(SipError::NonPositiveWeight(x));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Weighted,
    ProductCb,
}

pub struct GeneralizedFactorization<Q, Qp>
where
    Q: Fn(f64) -> f64,
    Qp: Fn(f64) -> f64,
{
    pub q: Q,
    pub q_prime: Qp,
    pub weight: MeasureWeight,
    pub scheme: Scheme,
}

/// `f = r²`, `Q = (ℓ + 1)/r`.
pub fn centrifugal(
    ell: f64,
    scheme: Scheme,
) -> GeneralizedFactorization<impl Fn(f64) -> f64, impl Fn(f64) -> f64> {
    let l1 = ell + 1.0;
    GeneralizedFactorization {
        q: move |r: f64| l1 / r,
        q_prime: move |r: f64| -l1 / (r * r),
        weight: MeasureWeight::Power { p: 2.0 },
        scheme,
    }
}

impl<Q, Qp> GeneralizedFactorization<Q, Qp>
where
    Q: Fn(f64) -> f64,
    Qp: Fn(f64) -> f64,
{
    fn check_grid(&self, grid: &UniformGrid) -> Result<Vec<f64>> {
        let pts = grid.points();
        for &x in &pts {
            self.weight.check(x)?;
            if !(self.q)(x).is_finite() {
                return Err(SipError::NonFinite { what: "Q", x });
            }
        }
        Ok(pts)
    }

    /// `(V⁻, V⁺)` at `x` for the selected scheme.
    pub fn partners_at(&self, x: f64) -> (f64, f64) {
        let (q, qp) = ((self.q)(x), (self.q_prime)(x));
        let lf = self.weight.log_f_prime(x);
        match self.scheme {
            Scheme::Weighted => {
                let t = qp + lf * q;
                (q * q - t, q * q + t)
            }
            Scheme::ProductCb => {
                (q * q - qp - q * lf, q * q + qp - q * lf - self.weight.log_f_second(x))
            }
        }
    }

    /// `B ψ = ψ′ + Q ψ`, `ψ′` by 4th-order differences.
    pub fn apply_b(&self, psi: &SampledFunction) -> Result<SampledFunction> {
        let pts = self.check_grid(&psi.grid)?;
        let d = psi.derivative();
        let values = pts.iter().enumerate().map(|(i, &x)| d[i] + (self.q)(x) * psi.values[i]).collect();
        SampledFunction::new(psi.grid, values)
    }

    /// `C ψ = −ψ′ − (f′/f) ψ + Q ψ`.
    pub fn apply_c(&self, psi: &SampledFunction) -> Result<SampledFunction> {
        let pts = self.check_grid(&psi.grid)?;
        let d = psi.derivative();
        let values = pts
            .iter()
            .enumerate()
            .map(|(i, &x)| -d[i] + ((self.q)(x) - self.weight.log_f_prime(x)) * psi.values[i])
            .collect();
        SampledFunction::new(psi.grid, values)
    }
}

/// Residual of `Q² − Q′ − (f′/f) Q − V + E`.
pub fn generalized_qhj_residual<Q, Qp>(
    fac: &GeneralizedFactorization<Q, Qp>,
    v: impl Fn(f64) -> f64,
    e: f64,
    grid: &UniformGrid,
    tolerance: f64,
) -> Result<VerificationReport>
where
    Q: Fn(f64) -> f64,
    Qp: Fn(f64) -> f64,
{
    let pts = fac.check_grid(grid)?;
    let residual: Vec<f64> = pts
        .iter()
        .map(|&x| {
            let q = (fac.q)(x);
            q * q - (fac.q_prime)(x) - fac.weight.log_f_prime(x) * q - v(x) + e
        })
        .collect();
    VerificationReport::from_residuals(&pts, &residual, e, tolerance)
}

/// Sampled `(V⁻, V⁺)` for the selected scheme.
pub fn generalized_partners<Q, Qp>(
    fac: &GeneralizedFactorization<Q, Qp>,
    grid: &UniformGrid,
) -> Result<(Vec<f64>, Vec<f64>)>
where
    Q: Fn(f64) -> f64,
    Qp: Fn(f64) -> f64,
{
    let pts = fac.check_grid(grid)?;
    Ok(pts.iter().map(|&x| fac.partners_at(x)).unzip())
}

/// `r^{−(ℓ+1)} d/dr (r^{ℓ+1} ψ) = ψ′ + ((ℓ + 1)/r) ψ`.
pub fn radial_intertwine(ell: usize, psi: &SampledFunction) -> Result<SampledFunction> {
    if psi.grid.lo <= 0.0 {
        return Err(SipError::InvalidGrid(format!("radial grid must start above r = 0, got {}", psi.grid.lo)));
    }
    centrifugal(ell as f64, Scheme::ProductCb).apply_b(psi)
}

/// Analytic intertwining residual `|j_ℓ′ + ((ℓ+1)/r) j_ℓ − j_{ℓ−1}|`, with
/// `j_ℓ′ = (ℓ/r) j_ℓ − j_{ℓ+1}` from the oracle.
pub fn bessel_recurrence_residual(ell: usize, r: f64) -> Result<f64> {
    if ell == 0 {
        return Err(SipError::InvalidInput("the lowering relation needs ell >= 1".into()));
    }
    let (dj, _) = crate::bessel::spherical_bessel_derivatives(ell, r)?;
    let (j, _) = spherical_bessel_oracle(ell, r)?;
    let (jm, _) = spherical_bessel_oracle(ell - 1, r)?;
    Ok((dj + (ell as f64 + 1.0) / r * j - jm).abs())
}

/// `r,psi_minus,b_psi_minus,reference` rows for `ψ⁻ = j_ℓ(k r)`, with
/// reference `k j_{ℓ−1}(k r)`.
pub fn write_recurrence_csv(out: impl Write, ell: usize, k: f64, grid: &UniformGrid) -> Result<f64> {
    if ell == 0 {
        return Err(SipError::InvalidInput("the lowering relation needs ell >= 1".into()));
    }
    let psi = SampledFunction::new(*grid, bessel_samples(ell, k, grid)?)?;
    let b = radial_intertwine(ell, &psi)?;
    let reference = bessel_samples(ell - 1, k, grid)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["r", "psi_minus", "b_psi_minus", "reference"])?;
    let mut worst = 0.0_f64;
    for (i, r) in grid.points().into_iter().enumerate() {
        let refv = k * reference[i];
        worst = worst.max((b.values[i] - refv).abs());
        w.write_record([format_number(r), format_number(psi.values[i]), format_number(b.values[i]), format_number(refv)])?;
    }
    w.flush()?;
    Ok(worst)
}

/// `j_ℓ(k r)` on the grid.
pub fn bessel_samples(ell: usize, k: f64, grid: &UniformGrid) -> Result<Vec<f64>> {
    grid.points().into_iter().map(|r| spherical_bessel_oracle(ell, k * r).map(|v| v.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::Family;

    fn grid(lo: f64, hi: f64, n: usize) -> UniformGrid {
        UniformGrid::new(lo, hi, n).unwrap()
    }

    #[test]
    fn qhj_examples() {
        for ell in [0.0, 1.0, 3.0] {
            let fac = centrifugal(ell, Scheme::ProductCb);
            let r = generalized_qhj_residual(&fac, |r| ell * (ell + 1.0) / (r * r), 0.0, &grid(0.5, 10.0, 256), 1e-12)
                .unwrap();
            assert!(r.passed, "{ell}");
        }
        let zero = GeneralizedFactorization {
            q: |_| 0.0,
            q_prime: |_| 0.0,
            weight: MeasureWeight::Power { p: 2.0 },
            scheme: Scheme::Weighted,
        };
        let r = generalized_qhj_residual(&zero, |_| 0.0, 0.0, &grid(0.5, 2.0, 64), 1e-15).unwrap();
        assert_eq!(r.max_residual, 0.0);
    }

    #[test]
    fn unit_weight_reduces_to_standard_partners() {
        for f in Family::ALL {
            let p = f.reference_params();
            let g = f.verification_grid(&p, 256).unwrap();
            for scheme in [Scheme::Weighted, Scheme::ProductCb] {
                let fac = GeneralizedFactorization {
                    q: |x| f.w(&p, x),
                    q_prime: |x| f.w_prime(&p, x),
                    weight: MeasureWeight::Unit,
                    scheme,
                };
                let r = generalized_qhj_residual(&fac, |x| f.v_minus(&p, x), 0.0, &g, 1e-12).unwrap();
                assert!(r.passed);
                let (vm, vp) = generalized_partners(&fac, &g).unwrap();
                for (i, x) in g.points().into_iter().enumerate() {
                    let want = f.partner_potentials(&p, x).unwrap();
                    assert!((vm[i] - want.minus).abs() <= 1e-12 * want.minus.abs().max(1.0));
                    assert!((vp[i] - want.plus).abs() <= 1e-12 * want.plus.abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn radial_partner_examples() {
        let g = grid(0.5, 5.0, 128);
        for ell in [1.0, 2.0, 4.0] {
            let (vm, vp) = generalized_partners(&centrifugal(ell, Scheme::ProductCb), &g).unwrap();
            let (wm, _) = generalized_partners(&centrifugal(ell, Scheme::Weighted), &g).unwrap();
            for (i, r) in g.points().into_iter().enumerate() {
                let r2 = r * r;
                assert!((vm[i] - ell * (ell + 1.0) / r2).abs() < 1e-12);
                assert!((vp[i] - ell * (ell - 1.0) / r2).abs() < 1e-12);
                assert!((wm[i] - ell * (ell + 1.0) / r2).abs() < 1e-12);
            }
        }
        assert!(matches!(
            generalized_partners(&centrifugal(1.0, Scheme::ProductCb), &grid(-1.0, 1.0, 64)),
            Err(SipError::NonPositiveWeight(_))
        ));
    }

    #[test]
    fn cb_reproduces_the_radial_hamiltonian() {
        // C B ψ = −ψ″ − (2/r) ψ′ + ℓ(ℓ+1)/r² ψ
        let g = grid(0.5, 6.0, 2048);
        let ell = 2.0;
        let fac = centrifugal(ell, Scheme::ProductCb);
        let psi = SampledFunction::from_fn(g, |r| (-0.3 * r * r).exp() * r.powi(2)).unwrap();
        let cb = fac.apply_c(&fac.apply_b(&psi).unwrap()).unwrap();
        let d1 = psi.derivative();
        let d2 = psi.second_derivative();
        for (i, r) in g.points().into_iter().enumerate().skip(8).take(2030) {
            let h = -d2[i] - 2.0 / r * d1[i] + ell * (ell + 1.0) / (r * r) * psi.values[i];
            assert!((cb.values[i] - h).abs() < 1e-6, "{r}");
        }
    }

    #[test]
    fn intertwining_lowers_bessel_order() {
        let g = grid(0.5, 20.0, 8192);
        let j1 = SampledFunction::new(g, bessel_samples(1, 1.0, &g).unwrap()).unwrap();
        let out = radial_intertwine(1, &j1).unwrap();
        for (i, r) in g.points().into_iter().enumerate() {
            let j0 = r.sin() / r;
            assert!((out.values[i] - j0).abs() < 1e-6 * j0.abs().max(1e-2), "{r}");
        }
        let n1 = SampledFunction::from_fn(g, |r| spherical_bessel_oracle(1, r).unwrap().1).unwrap();
        let out = radial_intertwine(1, &n1).unwrap();
        for (i, r) in g.points().into_iter().enumerate() {
            let n0 = -r.cos() / r;
            assert!((out.values[i] - n0).abs() < 1e-6 * n0.abs().max(1e-2), "{r}");
        }
        let kernel = SampledFunction::from_fn(grid(0.5, 5.0, 2048), |r| r.powi(-3)).unwrap();
        let out = radial_intertwine(2, &kernel).unwrap();
        assert!(out.max_abs() < 1e-6 * kernel.max_abs());
        let touching = SampledFunction::from_fn(grid(0.0, 1.0, 64), |r| r).unwrap();
        assert!(radial_intertwine(1, &touching).is_err());
    }

    #[test]
    fn bessel_recurrence_and_eigen_residual() {
        for ell in 1..=5 {
            for r in [0.5, 1.0, 2.0, 5.0, 10.0] {
                assert!(bessel_recurrence_residual(ell, r).unwrap() < 1e-8);
            }
        }
        // (−d²/dr² − (2/r) d/dr + ℓ(ℓ+1)/r²) j_ℓ(k r) = k² j_ℓ(k r)
        for k in [1.0, 2.0] {
            for ell in [1usize, 3] {
                let g = grid(0.5, 10.0, 4096);
                let psi = SampledFunction::new(g, bessel_samples(ell, k, &g).unwrap()).unwrap();
                let (d1, d2) = (psi.derivative(), psi.second_derivative());
                let l = (ell * (ell + 1)) as f64;
                for (i, r) in g.points().into_iter().enumerate() {
                    let h = -d2[i] - 2.0 / r * d1[i] + l / (r * r) * psi.values[i];
                    assert!((h - k * k * psi.values[i]).abs() < 1e-6, "{k} {ell} {r}");
                }
            }
        }
    }

    #[test]
    fn recurrence_csv() {
        let g = grid(0.5, 20.0, 4096);
        let mut buf = Vec::new();
        let worst = write_recurrence_csv(&mut buf, 3, 1.0, &g).unwrap();
        assert!(worst < 1e-6);
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next(), Some("r,psi_minus,b_psi_minus,reference"));
        assert_eq!(text.lines().count(), 4097);
    }
}
