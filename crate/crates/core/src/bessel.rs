//! Spherical Bessel functions `j_ℓ` (Miller's downward recurrence) and `n_ℓ`
//! (upward recurrence).

use crate::error::{Result, SipError};

pub const MAX_ELL: usize = 25;

const RESCALE: f64 = 1e200;

fn check(ell: usize, r: f64) -> Result<()> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(SipError::InvalidInput(format!("spherical Bessel functions need r > 0, got {r}")));
    }
    if ell > MAX_ELL {
        return Err(SipError::InvalidInput(format!("ell = {ell} exceeds {MAX_ELL}")));
    }
    Ok(())
}

/// `j_0 … j_{ell_max}` at `r`.
pub fn spherical_j_all(ell_max: usize, r: f64) -> Vec<f64> {
    let top = ell_max.max(1);
    let start = top + 16 + r.ceil() as usize;
    let mut out = vec![0.0; top + 1];
    let (mut above, mut current) = (0.0_f64, 1e-30_f64);
    for k in (1..=start).rev() {
        let below = (2 * k + 1) as f64 / r * current - above;
        above = current;
        current = below;
        if k - 1 <= top {
            out[k - 1] = current;
        }
        if current.abs() > RESCALE {
            above /= RESCALE;
            current /= RESCALE;
            out.iter_mut().for_each(|v| *v /= RESCALE);
        }
    }
    // normalize against whichever closed form is larger in magnitude
    let j0 = r.sin() / r;
    let j1 = r.sin() / (r * r) - r.cos() / r;
    let scale = if j0.abs() >= j1.abs() { j0 / out[0] } else { j1 / out[1] };
    out.iter_mut().for_each(|v| *v *= scale);
    out.truncate(ell_max + 1);
    out
}

/// `n_0 … n_{ell_max}` at `r`.
pub fn spherical_n_all(ell_max: usize, r: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(ell_max + 1);
    let n0 = -r.cos() / r;
    let n1 = -r.cos() / (r * r) - r.sin() / r;
    out.push(n0);
    if ell_max >= 1 {
        out.push(n1);
    }
    for k in 1..ell_max {
        let next = (2 * k + 1) as f64 / r * out[k] - out[k - 1];
        out.push(next);
    }
    out
}

/// `(j_ℓ(r), n_ℓ(r))`.
pub fn spherical_bessel_oracle(ell: usize, r: f64) -> Result<(f64, f64)> {
    check(ell, r)?;
    Ok((spherical_j_all(ell, r)[ell], spherical_n_all(ell + 1, r)[ell]))
}

/// `(j_ℓ′(r), n_ℓ′(r))` from `f_ℓ′ = (ℓ/r) f_ℓ − f_{ℓ+1}`.
pub fn spherical_bessel_derivatives(ell: usize, r: f64) -> Result<(f64, f64)> {
    check(ell, r)?;
    let j = spherical_j_all(ell + 1, r);
    let n = spherical_n_all(ell + 1, r);
    let l = ell as f64;
    Ok((l / r * j[ell] - j[ell + 1], l / r * n[ell] - n[ell + 1]))
}
