//! The ten closed-form shape-invariant superpotential families.
//!
//! Units are ħ = 2m = 1 so that `H = p² + V` and the partner potentials are
//! `V∓ = W² ∓ W′`. Each family stores its superpotential, the analytic
//! derivative, the parameter step `τ` and the energy shift
//! `R(p) = V⁺(x; p) − V⁻(x; τ(p))` in closed form. [`Family::certify`]
//! re-checks the stored `τ`/`R` pair numerically.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SipError};
use crate::grid::{mean, UniformGrid};

/// Distance kept from open domain endpoints when building grids.
pub const ENDPOINT_MARGIN: f64 = 1e-6;

/// Named real parameters of a potential family.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParamSet(BTreeMap<String, f64>);

impl ParamSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, value: f64) -> Self {
        self.0.insert(name.to_string(), value);
        self
    }

    pub fn set(&mut self, name: &str, value: f64) {
        self.0.insert(name.to_string(), value);
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.0.get(name).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl<const N: usize> From<[(&str, f64); N]> for ParamSet {
    fn from(entries: [(&str, f64); N]) -> Self {
        Self(entries.iter().map(|(k, v)| (k.to_string(), *v)).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DomainKind {
    FullLine,
    HalfLine,
    Finite,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainInterval {
    pub lo: f64,
    pub hi: f64,
    pub kind: DomainKind,
}

impl DomainInterval {
    pub fn full_line() -> Self {
        Self { lo: f64::NEG_INFINITY, hi: f64::INFINITY, kind: DomainKind::FullLine }
    }

    pub fn half_line() -> Self {
        Self { lo: 0.0, hi: f64::INFINITY, kind: DomainKind::HalfLine }
    }

    pub fn finite(lo: f64, hi: f64) -> Self {
        Self { lo, hi, kind: DomainKind::Finite }
    }

    /// Open-interval membership.
    pub fn contains(&self, x: f64) -> bool {
        x > self.lo && x < self.hi
    }

    pub fn check(&self, x: f64) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(SipError::DomainViolation { x, lo: self.lo, hi: self.hi })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    ShiftedOscillator,
    RadialOscillator,
    Coulomb,
    Morse,
    #[serde(rename = "scarf-II-hyperbolic")]
    ScarfIIHyperbolic,
    #[serde(rename = "rosen-morse-II-hyperbolic")]
    RosenMorseIIHyperbolic,
    Eckart,
    #[serde(rename = "scarf-I-trigonometric")]
    ScarfITrigonometric,
    GenPoschlTeller,
    #[serde(rename = "rosen-morse-I-trigonometric")]
    RosenMorseITrigonometric,
}

/// Descriptor of one family parameter and its admissible range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterSpec {
    pub name: String,
    pub constraint: String,
}

/// JSON descriptor `{name, parameters:[{name, constraint}], domain:{lo,hi,kind}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyDescriptor {
    pub name: String,
    pub parameters: Vec<ParameterSpec>,
    pub domain: DomainDescriptor,
}

/// Domain endpoints as JSON-safe values (`"-inf"`/`"inf"` for infinities,
/// finite endpoints in units of `1/a` given as strings like `"pi/2a"`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainDescriptor {
    pub lo: String,
    pub hi: String,
    pub kind: DomainKind,
}

/// Pair of partner potentials at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Partners {
    pub minus: f64,
    pub plus: f64,
}

fn sech(x: f64) -> f64 {
    1.0 / x.cosh()
}

fn csch(x: f64) -> f64 {
    1.0 / x.sinh()
}

fn coth(x: f64) -> f64 {
    1.0 / x.tanh()
}

fn sec(x: f64) -> f64 {
    1.0 / x.cos()
}

fn csc(x: f64) -> f64 {
    1.0 / x.sin()
}

fn cot(x: f64) -> f64 {
    1.0 / x.tan()
}

impl Family {
    pub const ALL: [Family; 10] = [
        Family::ShiftedOscillator,
        Family::RadialOscillator,
        Family::Coulomb,
        Family::Morse,
        Family::ScarfIIHyperbolic,
        Family::RosenMorseIIHyperbolic,
        Family::Eckart,
        Family::ScarfITrigonometric,
        Family::GenPoschlTeller,
        Family::RosenMorseITrigonometric,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::ShiftedOscillator => "shifted-oscillator",
            Family::RadialOscillator => "radial-oscillator",
            Family::Coulomb => "coulomb",
            Family::Morse => "morse",
            Family::ScarfIIHyperbolic => "scarf-II-hyperbolic",
            Family::RosenMorseIIHyperbolic => "rosen-morse-II-hyperbolic",
            Family::Eckart => "eckart",
            Family::ScarfITrigonometric => "scarf-I-trigonometric",
            Family::GenPoschlTeller => "gen-poschl-teller",
            Family::RosenMorseITrigonometric => "rosen-morse-I-trigonometric",
        }
    }

    pub fn parameter_names(self) -> &'static [&'static str] {
        match self {
            Family::ShiftedOscillator => &["omega", "b"],
            Family::RadialOscillator => &["omega", "ell"],
            Family::Coulomb => &["e2", "ell"],
            _ => &["A", "B", "a"],
        }
    }

    fn constraints(self) -> &'static [&'static str] {
        match self {
            Family::ShiftedOscillator => &["omega > 0", "any"],
            Family::RadialOscillator => &["omega > 0", "ell >= 0"],
            Family::Coulomb => &["e2 > 0", "ell >= 0"],
            Family::Morse => &["A > 0", "B > 0", "a > 0"],
            Family::ScarfIIHyperbolic => &["A > 0", "any", "a > 0"],
            Family::RosenMorseIIHyperbolic => &["A > 0", "|B| < A^2", "a > 0"],
            Family::Eckart => &["A > 0", "B > A^2", "a > 0"],
            Family::ScarfITrigonometric => &["A > |B|", "|B| < A", "a > 0"],
            Family::GenPoschlTeller => &["A > 0", "B > A", "a > 0"],
            Family::RosenMorseITrigonometric => &["A > 0", "any", "a > 0"],
        }
    }

    pub fn domain(self, p: &ParamSet) -> DomainInterval {
        match self {
            Family::RadialOscillator | Family::Coulomb | Family::Eckart | Family::GenPoschlTeller => {
                DomainInterval::half_line()
            }
            Family::ScarfITrigonometric => {
                let a = p.get("a").unwrap_or(1.0);
                DomainInterval::finite(-FRAC_PI_2 / a, FRAC_PI_2 / a)
            }
            Family::RosenMorseITrigonometric => {
                let a = p.get("a").unwrap_or(1.0);
                DomainInterval::finite(0.0, std::f64::consts::PI / a)
            }
            _ => DomainInterval::full_line(),
        }
    }

    pub fn domain_kind(self) -> DomainKind {
        self.domain(&self.reference_params()).kind
    }

    pub fn descriptor(self) -> FamilyDescriptor {
        let parameters = self
            .parameter_names()
            .iter()
            .zip(self.constraints())
            .map(|(n, c)| ParameterSpec { name: n.to_string(), constraint: c.to_string() })
            .collect();
        let (lo, hi) = match self {
            Family::ScarfITrigonometric => ("-pi/2a", "pi/2a"),
            Family::RosenMorseITrigonometric => ("0", "pi/a"),
            f if f.domain_kind() == DomainKind::HalfLine => ("0", "inf"),
            _ => ("-inf", "inf"),
        };
        FamilyDescriptor {
            name: self.name().to_string(),
            parameters,
            domain: DomainDescriptor { lo: lo.into(), hi: hi.into(), kind: self.domain_kind() },
        }
    }

    /// Reference parameters used by tests and as CLI defaults.
    pub fn reference_params(self) -> ParamSet {
        match self {
            Family::ShiftedOscillator => ParamSet::from([("omega", 2.0), ("b", 0.0)]),
            Family::RadialOscillator => ParamSet::from([("omega", 2.0), ("ell", 0.0)]),
            Family::Coulomb => ParamSet::from([("e2", 2.0), ("ell", 0.0)]),
            Family::Eckart => ParamSet::from([("A", 1.0), ("B", 10.0), ("a", 1.0)]),
            Family::ScarfITrigonometric => ParamSet::from([("A", 4.0), ("B", 1.0), ("a", 1.0)]),
            Family::GenPoschlTeller => ParamSet::from([("A", 4.0), ("B", 6.0), ("a", 1.0)]),
            _ => ParamSet::from([("A", 4.0), ("B", 4.0), ("a", 1.0)]),
        }
    }

    fn param(self, p: &ParamSet, name: &str) -> Result<f64> {
        let v = p.get(name).ok_or_else(|| SipError::MissingParameter {
            family: self.name().into(),
            name: name.into(),
        })?;
        if !v.is_finite() {
            return Err(self.invalid(format!("{name} = {v} is not finite")));
        }
        Ok(v)
    }

    fn invalid(self, reason: String) -> SipError {
        SipError::InvalidParameters { family: self.name().into(), reason }
    }

    /// All values present and finite, and the family admits a normalizable
    /// ground state at `p`.
    pub fn validate(self, p: &ParamSet) -> Result<()> {
        let v: Vec<f64> =
            self.parameter_names().iter().map(|n| self.param(p, n)).collect::<Result<_>>()?;
        let fail = |cond: bool, msg: &str| if cond { Ok(()) } else { Err(self.invalid(msg.into())) };
        match self {
            Family::ShiftedOscillator => fail(v[0] > 0.0, "omega must be > 0"),
            Family::RadialOscillator => {
                fail(v[0] > 0.0, "omega must be > 0")?;
                fail(v[1] >= 0.0, "ell must be >= 0")
            }
            Family::Coulomb => {
                fail(v[0] > 0.0, "e2 must be > 0")?;
                fail(v[1] >= 0.0, "ell must be >= 0")
            }
            _ => {
                let (a_big, b_big, a) = (v[0], v[1], v[2]);
                fail(a > 0.0, "a must be > 0")?;
                fail(a_big > 0.0, "A must be > 0")?;
                match self {
                    Family::Morse => fail(b_big > 0.0, "B must be > 0"),
                    Family::RosenMorseIIHyperbolic => {
                        fail(b_big.abs() < a_big * a_big, "|B| must be < A^2")
                    }
                    Family::Eckart => fail(b_big > a_big * a_big, "B must be > A^2"),
                    Family::ScarfITrigonometric => fail(a_big > b_big.abs(), "A must be > |B|"),
                    Family::GenPoschlTeller => fail(b_big > a_big, "B must be > A"),
                    _ => Ok(()),
                }
            }
        }
    }

    /// Superpotential `W(x; p)`; no domain or parameter checks.
    pub fn w(self, p: &ParamSet, x: f64) -> f64 {
        let g = |n: &str| p.get(n).unwrap_or(f64::NAN);
        match self {
            Family::ShiftedOscillator => 0.5 * g("omega") * x - g("b"),
            Family::RadialOscillator => 0.5 * g("omega") * x - (g("ell") + 1.0) / x,
            Family::Coulomb => {
                let l1 = g("ell") + 1.0;
                g("e2") / (2.0 * l1) - l1 / x
            }
            Family::Morse => g("A") - g("B") * (-g("a") * x).exp(),
            Family::ScarfIIHyperbolic => {
                let ax = g("a") * x;
                g("A") * ax.tanh() + g("B") * sech(ax)
            }
            Family::RosenMorseIIHyperbolic => g("A") * (g("a") * x).tanh() + g("B") / g("A"),
            Family::Eckart => -g("A") * coth(g("a") * x) + g("B") / g("A"),
            Family::ScarfITrigonometric => {
                let ax = g("a") * x;
                g("A") * ax.tan() - g("B") * sec(ax)
            }
            Family::GenPoschlTeller => {
                let ax = g("a") * x;
                g("A") * coth(ax) - g("B") * csch(ax)
            }
            Family::RosenMorseITrigonometric => -g("A") * cot(g("a") * x) - g("B") / g("A"),
        }
    }

    /// Analytic `dW/dx`.
    pub fn w_prime(self, p: &ParamSet, x: f64) -> f64 {
        let g = |n: &str| p.get(n).unwrap_or(f64::NAN);
        match self {
            Family::ShiftedOscillator => 0.5 * g("omega"),
            Family::RadialOscillator => 0.5 * g("omega") + (g("ell") + 1.0) / (x * x),
            Family::Coulomb => (g("ell") + 1.0) / (x * x),
            Family::Morse => g("a") * g("B") * (-g("a") * x).exp(),
            Family::ScarfIIHyperbolic => {
                let (a, ax) = (g("a"), g("a") * x);
                a * g("A") * sech(ax).powi(2) - a * g("B") * sech(ax) * ax.tanh()
            }
            Family::RosenMorseIIHyperbolic => {
                let a = g("a");
                a * g("A") * sech(a * x).powi(2)
            }
            Family::Eckart => {
                let a = g("a");
                a * g("A") * csch(a * x).powi(2)
            }
            Family::ScarfITrigonometric => {
                let (a, ax) = (g("a"), g("a") * x);
                a * g("A") * sec(ax).powi(2) - a * g("B") * sec(ax) * ax.tan()
            }
            Family::GenPoschlTeller => {
                let (a, ax) = (g("a"), g("a") * x);
                -a * g("A") * csch(ax).powi(2) + a * g("B") * csch(ax) * coth(ax)
            }
            Family::RosenMorseITrigonometric => {
                let a = g("a");
                a * g("A") * csc(a * x).powi(2)
            }
        }
    }

    pub fn eval_superpotential(self, p: &ParamSet, x: f64) -> Result<f64> {
        self.validate(p)?;
        self.domain(p).check(x)?;
        Ok(self.w(p, x))
    }

    /// `V∓ = W² ∓ W′` at `x`.
    pub fn partner_potentials(self, p: &ParamSet, x: f64) -> Result<Partners> {
        self.validate(p)?;
        self.domain(p).check(x)?;
        Ok(self.partners_unchecked(p, x))
    }

    pub fn partners_unchecked(self, p: &ParamSet, x: f64) -> Partners {
        let w = self.w(p, x);
        let wp = self.w_prime(p, x);
        Partners { minus: w * w - wp, plus: w * w + wp }
    }

    pub fn v_minus(self, p: &ParamSet, x: f64) -> f64 {
        self.partners_unchecked(p, x).minus
    }

    /// `τ(p)` without validating the result.
    pub fn step_unchecked(self, p: &ParamSet) -> ParamSet {
        let mut q = p.clone();
        let shift = |q: &mut ParamSet, name: &str, by: f64| {
            let v = q.get(name).unwrap_or(f64::NAN);
            q.set(name, v + by);
        };
        let a = p.get("a").unwrap_or(f64::NAN);
        match self {
            Family::ShiftedOscillator => {}
            Family::RadialOscillator | Family::Coulomb => shift(&mut q, "ell", 1.0),
            Family::Morse
            | Family::ScarfIIHyperbolic
            | Family::RosenMorseIIHyperbolic
            | Family::GenPoschlTeller => shift(&mut q, "A", -a),
            Family::Eckart | Family::ScarfITrigonometric | Family::RosenMorseITrigonometric => {
                shift(&mut q, "A", a)
            }
        }
        q
    }

    /// `τ(p)`; fails when the stepped parameters leave the valid range,
    /// which is where a finite bound-state ladder terminates.
    pub fn parameter_step(self, p: &ParamSet) -> Result<ParamSet> {
        self.validate(p)?;
        let q = self.step_unchecked(p);
        self.validate(&q)?;
        Ok(q)
    }

    /// Closed-form `R(p) = V⁺(x; p) − V⁻(x; τ(p))`.
    pub fn energy_shift(self, p: &ParamSet) -> Result<f64> {
        self.validate(p)?;
        let g = |n: &str| p.get(n).unwrap_or(f64::NAN);
        let q = self.step_unchecked(p);
        let sq = |v: f64| v * v;
        Ok(match self {
            Family::ShiftedOscillator => g("omega"),
            Family::RadialOscillator => 2.0 * g("omega"),
            Family::Coulomb => {
                let l1 = g("ell") + 1.0;
                sq(g("e2")) / 4.0 * (1.0 / sq(l1) - 1.0 / sq(l1 + 1.0))
            }
            Family::Morse | Family::ScarfIIHyperbolic | Family::GenPoschlTeller => {
                sq(g("A")) - sq(q.get("A").unwrap())
            }
            Family::RosenMorseIIHyperbolic | Family::Eckart => {
                let (a0, a1, b) = (g("A"), q.get("A").unwrap(), g("B"));
                sq(a0) - sq(a1) + sq(b / a0) - sq(b / a1)
            }
            Family::ScarfITrigonometric => sq(q.get("A").unwrap()) - sq(g("A")),
            Family::RosenMorseITrigonometric => {
                let (a0, a1, b) = (g("A"), q.get("A").unwrap(), g("B"));
                sq(a1) - sq(a0) + sq(b / a0) - sq(b / a1)
            }
        })
    }

    /// Number of bound states, `None` when the ladder never terminates.
    pub fn max_levels(self, p: &ParamSet) -> Option<usize> {
        match self {
            Family::ShiftedOscillator
            | Family::RadialOscillator
            | Family::Coulomb
            | Family::ScarfITrigonometric
            | Family::RosenMorseITrigonometric => None,
            _ => {
                let mut q = p.clone();
                let mut n = 0;
                while self.validate(&q).is_ok() {
                    n += 1;
                    q = self.step_unchecked(&q);
                }
                Some(n)
            }
        }
    }

    /// Interval on which numerical certifications are run by default.
    /// Chosen so that partner potentials stay O(10³) or below.
    pub fn verification_interval(self, p: &ParamSet) -> (f64, f64) {
        let a = p.get("a").unwrap_or(1.0);
        match self {
            Family::ShiftedOscillator => {
                let omega = p.get("omega").unwrap_or(2.0);
                let centre = 2.0 * p.get("b").unwrap_or(0.0) / omega;
                let width = 10.0 / (0.5 * omega).sqrt();
                (centre - width, centre + width)
            }
            Family::RadialOscillator => {
                let omega = p.get("omega").unwrap_or(2.0);
                (0.1, 10.0 / (0.5 * omega).sqrt())
            }
            Family::Coulomb => (0.1, 10.0),
            Family::Morse => {
                let shift = (p.get("B").unwrap_or(1.0) / p.get("A").unwrap_or(1.0)).ln() / a;
                (shift - 2.0 / a, shift + 10.0 / a)
            }
            Family::ScarfIIHyperbolic | Family::RosenMorseIIHyperbolic => (-5.0 / a, 5.0 / a),
            Family::Eckart | Family::GenPoschlTeller => (0.1 / a, 8.0 / a),
            Family::ScarfITrigonometric => (-0.95 * FRAC_PI_2 / a, 0.95 * FRAC_PI_2 / a),
            Family::RosenMorseITrigonometric => {
                let pi = std::f64::consts::PI;
                (0.05 * pi / a, 0.95 * pi / a)
            }
        }
    }

    pub fn verification_grid(self, p: &ParamSet, n: usize) -> Result<UniformGrid> {
        let (lo, hi) = self.verification_interval(p);
        UniformGrid::new(lo, hi, n)
    }

    /// Dirichlet box for the finite-difference eigensolver. Half-line boxes
    /// start at the origin; the wall node itself is never evaluated.
    pub fn oracle_box(self, p: &ParamSet) -> (f64, f64) {
        let a = p.get("a").unwrap_or(1.0);
        match self {
            Family::ShiftedOscillator => {
                let omega = p.get("omega").unwrap_or(2.0);
                let centre = 2.0 * p.get("b").unwrap_or(0.0) / omega;
                let width = 10.0 / (0.5 * omega).sqrt();
                (centre - width, centre + width)
            }
            Family::RadialOscillator => (0.0, 10.0 / (0.5 * p.get("omega").unwrap_or(2.0)).sqrt()),
            Family::Coulomb => {
                let e2 = p.get("e2").unwrap_or(2.0);
                let l1 = p.get("ell").unwrap_or(0.0) + 1.0;
                (0.0, 120.0 * l1 / e2.max(1e-3))
            }
            Family::Morse => {
                let shift = (p.get("B").unwrap_or(1.0) / p.get("A").unwrap_or(1.0)).ln() / a;
                (shift - 3.0 / a, shift + 12.0 / a)
            }
            Family::ScarfIIHyperbolic | Family::RosenMorseIIHyperbolic => (-15.0 / a, 15.0 / a),
            Family::Eckart | Family::GenPoschlTeller => (0.0, 30.0 / a),
            _ => {
                let d = self.domain(p);
                (d.lo, d.hi)
            }
        }
    }

    /// Grid check of the stored `τ` and `R`: returns the largest deviation of
    /// `V⁺(x; p) − V⁻(x; τ(p))` from `R(p)` over `n` points of the
    /// verification interval.
    pub fn certify(self, p: &ParamSet, n: usize) -> Result<f64> {
        let q = self.parameter_step(p)?;
        let r = self.energy_shift(p)?;
        let grid = self.verification_grid(p, n)?;
        let mut worst = 0.0_f64;
        for x in grid.points() {
            let d = self.partners_unchecked(p, x).plus - self.partners_unchecked(&q, x).minus;
            if !d.is_finite() {
                return Err(SipError::NonFinite { what: "partner difference", x });
            }
            worst = worst.max((d - r).abs());
        }
        Ok(worst)
    }

    /// Mean of `V⁺(x; p) − V⁻(x; τ(p))` on the verification grid.
    pub fn grid_energy_shift(self, p: &ParamSet, n: usize) -> Result<f64> {
        let q = self.parameter_step(p)?;
        let grid = self.verification_grid(p, n)?;
        let d: Vec<f64> = grid
            .points()
            .into_iter()
            .map(|x| self.partners_unchecked(p, x).plus - self.partners_unchecked(&q, x).minus)
            .collect();
        Ok(mean(&d))
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = SipError;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| SipError::UnknownFamily(s.to_string()))
    }
}

/// `(name, parameter names, domain kind)` for every catalog family.
pub fn list_families() -> Vec<(&'static str, &'static [&'static str], DomainKind)> {
    Family::ALL.iter().map(|f| (f.name(), f.parameter_names(), f.domain_kind())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(entries: &[(&str, f64)]) -> ParamSet {
        let mut s = ParamSet::new();
        for (k, v) in entries {
            s.set(k, *v);
        }
        s
    }

    #[test]
    fn lists_the_ten_families() {
        let l = list_families();
        assert_eq!(l.len(), 10);
        assert!(l.iter().any(|(n, _, _)| *n == "morse"));
        let radial = l.iter().find(|(n, _, _)| *n == "radial-oscillator").unwrap();
        assert_eq!(radial.2, DomainKind::HalfLine);
        assert!(l.iter().all(|(_, ps, _)| !ps.is_empty()));
    }

    #[test]
    fn superpotential_examples() {
        let so = p(&[("omega", 2.0), ("b", 0.0)]);
        assert_eq!(Family::ShiftedOscillator.eval_superpotential(&so, 1.0).unwrap(), 1.0);
        let m = p(&[("A", 4.0), ("B", 4.0), ("a", 1.0)]);
        assert_eq!(Family::Morse.eval_superpotential(&m, 0.0).unwrap(), 0.0);
        let ro = p(&[("omega", 2.0), ("ell", 0.0)]);
        assert_eq!(Family::RadialOscillator.eval_superpotential(&ro, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn domain_and_parameter_errors() {
        let ro = p(&[("omega", 2.0), ("ell", 0.0)]);
        assert!(matches!(
            Family::RadialOscillator.eval_superpotential(&ro, -1.0),
            Err(SipError::DomainViolation { .. })
        ));
        let bad = p(&[("A", -1.0), ("B", 4.0), ("a", 1.0)]);
        assert!(matches!(
            Family::Morse.eval_superpotential(&bad, 0.0),
            Err(SipError::InvalidParameters { .. })
        ));
        assert!(matches!(
            Family::Morse.validate(&p(&[("A", 1.0)])),
            Err(SipError::MissingParameter { .. })
        ));
    }

    #[test]
    fn partner_examples() {
        let so = p(&[("omega", 2.0), ("b", 0.0)]);
        let v = Family::ShiftedOscillator.partner_potentials(&so, 0.0).unwrap();
        assert_eq!((v.minus, v.plus), (-1.0, 1.0));
        for x in [-3.0, 0.5, 7.0] {
            let v = Family::ShiftedOscillator.partner_potentials(&so, x).unwrap();
            assert!((v.plus - v.minus - 2.0).abs() < 1e-12);
        }
        let ro = p(&[("omega", 2.0), ("ell", 1.0)]);
        let v = Family::RadialOscillator.partner_potentials(&ro, 1.0).unwrap();
        assert!((v.minus + 2.0).abs() < 1e-14);
    }

    #[test]
    fn parameter_step_examples() {
        let ro = p(&[("omega", 2.0), ("ell", 1.0)]);
        assert_eq!(
            Family::RadialOscillator.parameter_step(&ro).unwrap(),
            p(&[("omega", 2.0), ("ell", 2.0)])
        );
        let so = p(&[("omega", 2.0), ("b", 0.0)]);
        assert_eq!(Family::ShiftedOscillator.parameter_step(&so).unwrap(), so);
        let m = p(&[("A", 4.0), ("B", 4.0), ("a", 1.0)]);
        assert_eq!(Family::Morse.parameter_step(&m).unwrap(), p(&[("A", 3.0), ("B", 4.0), ("a", 1.0)]));
        // the Morse ladder ends once A - n a <= 0
        let last = p(&[("A", 1.0), ("B", 4.0), ("a", 1.0)]);
        assert!(Family::Morse.parameter_step(&last).is_err());
        assert_eq!(Family::Morse.max_levels(&m), Some(4));
    }

    #[test]
    fn energy_shift_examples_match_grid_difference() {
        let cases = [
            (Family::ShiftedOscillator, p(&[("omega", 2.0), ("b", 0.0)]), 2.0),
            (Family::RadialOscillator, p(&[("omega", 2.0), ("ell", 0.0)]), 4.0),
            (Family::Morse, p(&[("A", 4.0), ("B", 4.0), ("a", 1.0)]), 7.0),
        ];
        for (fam, params, expected) in cases {
            assert_eq!(fam.energy_shift(&params).unwrap(), expected);
            let grid_r = fam.grid_energy_shift(&params, 512).unwrap();
            assert!((grid_r - expected).abs() < 1e-10, "{fam}: {grid_r}");
        }
    }

    #[test]
    fn every_family_certifies_at_reference_and_neighbouring_params() {
        for fam in Family::ALL {
            let p0 = fam.reference_params();
            assert!(fam.certify(&p0, 512).unwrap() < 1e-10, "{fam}");
        }
        for ell in [1.0, 2.0] {
            for fam in [Family::RadialOscillator, Family::Coulomb] {
                let mut q = fam.reference_params();
                q.set("ell", ell);
                assert!(fam.certify(&q, 512).unwrap() < 1e-10, "{fam} ell={ell}");
            }
        }
    }

    #[test]
    fn w_prime_matches_central_differences() {
        for fam in Family::ALL {
            let p0 = fam.reference_params();
            let grid = fam.verification_grid(&p0, 200).unwrap();
            let h = 1e-5;
            for x in grid.points().into_iter().skip(1).take(198) {
                let fd = (fam.w(&p0, x + h) - fam.w(&p0, x - h)) / (2.0 * h);
                let an = fam.w_prime(&p0, x);
                assert!((fd - an).abs() < 1e-6 * an.abs().max(1.0), "{fam} at {x}: {fd} vs {an}");
            }
        }
    }

    #[test]
    fn translation_steps_have_constant_increment() {
        for fam in Family::ALL {
            let p0 = fam.reference_params();
            let p1 = fam.step_unchecked(&p0);
            let p2 = fam.step_unchecked(&p1);
            for name in fam.parameter_names() {
                let d1 = p1.get(name).unwrap() - p0.get(name).unwrap();
                let d2 = p2.get(name).unwrap() - p1.get(name).unwrap();
                assert!((d1 - d2).abs() < 1e-15, "{fam} {name}");
            }
        }
    }

    #[test]
    fn half_line_families_diverge_like_centrifugal_term() {
        for fam in [Family::RadialOscillator, Family::Coulomb] {
            for ell in [0.0, 1.0, 2.0] {
                let mut q = fam.reference_params();
                q.set("ell", ell);
                let r = 1e-7;
                assert!((r * fam.w(&q, r) + (ell + 1.0)).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn names_round_trip_through_serde_and_from_str() {
        for fam in Family::ALL {
            let json = serde_json::to_string(&fam).unwrap();
            assert_eq!(json, format!("\"{}\"", fam.name()));
            assert_eq!(fam.name().parse::<Family>().unwrap(), fam);
        }
        assert!("hydrogen".parse::<Family>().is_err());
    }

    #[test]
    fn descriptor_json_shape() {
        let d = serde_json::to_value(Family::Morse.descriptor()).unwrap();
        assert_eq!(d["name"], "morse");
        assert_eq!(d["parameters"].as_array().unwrap().len(), 3);
        assert_eq!(d["domain"]["kind"], "full-line");
        assert_eq!(d["domain"]["lo"], "-inf");
    }
}
