//! Brute-force finite-difference eigensolver for `−ψ″ + V ψ = E ψ` in a
//! Dirichlet box, independent of every superpotential construction.

use serde::{Deserialize, Serialize};

use crate::catalog::{DomainInterval, DomainKind, Family, ParamSet};
use crate::error::{Result, SipError};
use crate::grid::UniformGrid;
use crate::spectral::{fix_sign, Provenance, Spectrum, Wavefunction};
use crate::tridiag::{eigenvectors, lowest_eigenvalues};

pub const MIN_ORACLE_POINTS: usize = 500;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    #[serde(rename = "box")]
    pub domain: DomainInterval,
    /// Interior nodes; the walls carry `ψ = 0`.
    pub n_points: usize,
    pub n_levels: usize,
    /// Added to `V`.
    pub shift: f64,
    /// Refinement check: `|Eₙ(2N) − Eₙ(N)| ≤ tol · max(1, |Eₙ|)`.
    pub convergence_tol: f64,
    pub check_convergence: bool,
}

impl OracleConfig {
    pub fn new(lo: f64, hi: f64, n_points: usize, n_levels: usize) -> Self {
        Self {
            domain: DomainInterval::finite(lo, hi),
            n_points,
            n_levels,
            shift: 0.0,
            convergence_tol: 1e-3,
            check_convergence: true,
        }
    }

    pub fn with_shift(mut self, shift: f64) -> Self {
        self.shift = shift;
        self
    }

    pub fn without_convergence_check(mut self) -> Self {
        self.check_convergence = false;
        self
    }

    fn validate(&self) -> Result<()> {
        let d = &self.domain;
        if !(d.lo.is_finite() && d.hi.is_finite() && d.lo < d.hi) || d.kind != DomainKind::Finite {
            return Err(SipError::InvalidGrid(format!("oracle box ({}, {}) must be finite", d.lo, d.hi)));
        }
        if self.n_points < MIN_ORACLE_POINTS {
            return Err(SipError::InvalidGrid(format!(
                "oracle needs at least {MIN_ORACLE_POINTS} points, got {}",
                self.n_points
            )));
        }
        if self.n_levels == 0 || self.n_levels > self.n_points {
            return Err(SipError::InvalidInput(format!("cannot resolve {} levels", self.n_levels)));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<UniformGrid> {
        UniformGrid::interior(self.domain.lo, self.domain.hi, self.n_points)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSolution {
    pub spectrum: Spectrum,
    pub wavefunctions: Vec<Wavefunction>,
    /// `|Eₙ(2N) − Eₙ(N)|`, empty when the check is disabled.
    pub refinement_change: Vec<f64>,
    pub converged: bool,
}

fn energies(v: &impl Fn(f64) -> f64, grid: &UniformGrid, shift: f64, k: usize) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let h = grid.spacing();
    let inv_h2 = 1.0 / (h * h);
    let mut diag = Vec::with_capacity(grid.n);
    for x in grid.points() {
        let vx = v(x);
        if !vx.is_finite() {
            return Err(SipError::NonFinite { what: "potential", x });
        }
        diag.push(2.0 * inv_h2 + vx + shift);
    }
    let off = vec![-inv_h2; grid.n - 1];
    let e = lowest_eigenvalues(&diag, &off, k);
    Ok((e, diag, off))
}

/// Lowest `n_levels` eigenpairs of the second-difference Hamiltonian with
/// `2/h² + V(xᵢ)` on the diagonal and `−1/h²` off it. Eigenvectors are
/// normalized so that `h Σ ψᵢ² = 1` and signed like the ladder output.
pub fn eigensolve(v: impl Fn(f64) -> f64, cfg: &OracleConfig) -> Result<OracleSolution> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let h = grid.spacing();
    let (e, diag, off) = energies(&v, &grid, cfg.shift, cfg.n_levels)?;
    let vectors = eigenvectors(&diag, &off, &e);
    let wavefunctions = vectors
        .into_iter()
        .enumerate()
        .map(|(level, mut values)| {
            let s = h.sqrt();
            values.iter_mut().for_each(|x| *x /= s);
            fix_sign(&mut values);
            Wavefunction { grid, values, level, normalized: true }
        })
        .collect();

    let (refinement_change, converged) = if cfg.check_convergence {
        let fine = UniformGrid::interior(cfg.domain.lo, cfg.domain.hi, 2 * cfg.n_points + 1)?;
        let (ef, _, _) = energies(&v, &fine, cfg.shift, cfg.n_levels)?;
        let change: Vec<f64> = e.iter().zip(&ef).map(|(a, b)| (a - b).abs()).collect();
        let ok = change
            .iter()
            .zip(&e)
            .all(|(c, en)| *c <= cfg.convergence_tol * en.abs().max(1.0));
        (change, ok)
    } else {
        (Vec::new(), true)
    };

    Ok(OracleSolution {
        spectrum: Spectrum {
            energies: e,
            provenance: Provenance::Oracle,
            params: ParamSet::new(),
            level_params: Vec::new(),
            truncated: false,
        },
        wavefunctions,
        refinement_change,
        converged,
    })
}

/// Oracle run on `V⁻(·; p)` of a catalog family inside its documented box.
pub fn family_oracle(family: Family, p: &ParamSet, n_points: usize, n_levels: usize) -> Result<OracleSolution> {
    family.validate(p)?;
    let (lo, hi) = family.oracle_box(p);
    let mut sol = eigensolve(|x| family.v_minus(p, x), &OracleConfig::new(lo, hi, n_points, n_levels))?;
    sol.spectrum.params = p.clone();
    Ok(sol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CompareMode {
    Absolute,
    /// Subtracts each spectrum's `E₀` first.
    RelativeGap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumComparison {
    pub mode: CompareMode,
    pub deviations: Vec<f64>,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// The spectra differed in length; only the common prefix was compared.
    pub truncated: bool,
}

pub fn compare_spectra(a: &Spectrum, b: &Spectrum, mode: CompareMode, tolerance: f64) -> Result<SpectrumComparison> {
    if a.is_empty() || b.is_empty() {
        return Err(SipError::InvalidInput("cannot compare an empty spectrum".into()));
    }
    let (ea, eb) = match mode {
        CompareMode::Absolute => (a.energies.clone(), b.energies.clone()),
        CompareMode::RelativeGap => (a.gaps(), b.gaps()),
    };
    let deviations: Vec<f64> = ea.iter().zip(&eb).map(|(x, y)| (x - y).abs()).collect();
    let max_deviation = deviations.iter().cloned().fold(0.0, f64::max);
    Ok(SpectrumComparison {
        mode,
        passed: max_deviation < tolerance,
        deviations,
        max_deviation,
        tolerance,
        truncated: a.len() != b.len(),
    })
}
