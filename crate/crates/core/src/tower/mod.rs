//! Fields built as towers over `Q_p`.
//!
//! A tower is an ordered list of steps, each adjoining one generator:
//! an unramified root of a polynomial whose reduction is irreducible, a
//! Laurent variable `t` (giving `k{{t}}`), or a root of an Eisenstein
//! polynomial. Elements are nested coefficient lists mirroring the steps, see
//! [`Elem`].

mod elem;
mod parse;
mod residue;

use std::sync::OnceLock;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::padic::{is_prime, Valuation, DEFAULT_PRECISION};

pub use elem::Elem;
pub use parse::{parse_field_document, parse_poly, Poly};
pub use residue::{Residue, ResidueFieldDesc};

/// Default exponent window of a Laurent step.
pub const DEFAULT_WINDOW: (i64, i64) = (-32, 32);

/// One step of a declarative tower description.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum StepSpec {
    Unramified { var: String, poly: String },
    Laurent { var: String, window: (i64, i64) },
    Eisenstein { var: String, poly: String },
}

impl StepSpec {
    pub fn var(&self) -> &str {
        match self {
            StepSpec::Unramified { var, .. }
            | StepSpec::Laurent { var, .. }
            | StepSpec::Eisenstein { var, .. } => var,
        }
    }
}

/// Declarative description of a field `K` as a tower over `Q_p`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TowerSpec {
    pub p: u64,
    pub precision: u32,
    pub steps: Vec<StepSpec>,
}

impl TowerSpec {
    pub fn new(p: u64) -> Self {
        TowerSpec {
            p,
            precision: DEFAULT_PRECISION,
            steps: Vec::new(),
        }
    }

    pub fn laurent(mut self, var: &str) -> Self {
        self.steps.push(StepSpec::Laurent {
            var: var.into(),
            window: DEFAULT_WINDOW,
        });
        self
    }

    pub fn laurent_window(mut self, var: &str, window: (i64, i64)) -> Self {
        self.steps.push(StepSpec::Laurent {
            var: var.into(),
            window,
        });
        self
    }

    pub fn eisenstein(mut self, var: &str, poly: &str) -> Self {
        self.steps.push(StepSpec::Eisenstein {
            var: var.into(),
            poly: poly.into(),
        });
        self
    }

    pub fn unramified(mut self, var: &str, poly: &str) -> Self {
        self.steps.push(StepSpec::Unramified {
            var: var.into(),
            poly: poly.into(),
        });
        self
    }

    pub fn with_precision(mut self, precision: u32) -> Self {
        self.precision = precision;
        self
    }

    /// Parses and fully validates a field-description document.
    pub fn parse(text: &str) -> Result<Self> {
        let spec = parse_field_document(text)?;
        Tower::new(&spec)?;
        Ok(spec)
    }

    pub fn build(&self) -> Result<Tower> {
        Tower::new(self)
    }
}

/// Kind-specific data of a constructed layer.
#[derive(Debug, Clone)]
pub enum LayerKind {
    Laurent { lo: i64, hi: i64 },
    /// Non-leading coefficients `c_0..c_{n-1}` of the monic minimal polynomial,
    /// as elements of the level below.
    Eisenstein { min_poly: Vec<Elem> },
    Unramified { min_poly: Vec<Elem> },
}

#[derive(Debug)]
pub struct Layer {
    pub name: String,
    pub kind: LayerKind,
    /// Ramification index of the field up to and including this layer.
    pub ram: u32,
    /// Degree over `F_p` of the finite part of the residue field.
    pub residue_degree: u32,
    /// `(c_0 / uniformizer)^{-1}` in the level below, for Eisenstein layers.
    unit_part_inv: OnceLock<Result<Elem>>,
}

impl Layer {
    pub fn degree(&self) -> usize {
        match &self.kind {
            LayerKind::Laurent { .. } => 1,
            LayerKind::Eisenstein { min_poly } | LayerKind::Unramified { min_poly } => {
                min_poly.len()
            }
        }
    }

    pub fn is_laurent(&self) -> bool {
        matches!(self.kind, LayerKind::Laurent { .. })
    }
}

/// A validated tower together with everything needed for element arithmetic.
///
/// Level `0` is `Z_p`; level `k` is the ring of integers after the first `k`
/// steps. Generator `k` (0-based) is the variable adjoined by step `k`.
#[derive(Debug)]
pub struct Tower {
    p: u64,
    precision: u32,
    layers: Vec<Layer>,
    spec: TowerSpec,
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl Tower {
    pub fn new(spec: &TowerSpec) -> Result<Self> {
        if !is_prime(spec.p) {
            return Err(Error::NonPrimeP(spec.p));
        }
        if spec.precision == 0 {
            return Err(Error::Config("precision must be positive".into()));
        }
        let mut tower = Tower {
            p: spec.p,
            precision: spec.precision,
            layers: Vec::with_capacity(spec.steps.len()),
            spec: spec.clone(),
        };
        let mut seen_laurent = false;
        for step in &spec.steps {
            let var = step.var();
            if !is_identifier(var) || var == "X" {
                return Err(Error::Config(format!("invalid variable name `{var}`")));
            }
            if tower.layers.iter().any(|l| l.name == var) {
                return Err(Error::DuplicateVariable(var.into()));
            }
            let (ram, f) = tower
                .layers
                .last()
                .map_or((1, 1), |l| (l.ram, l.residue_degree));
            let layer = match step {
                StepSpec::Laurent { window: (lo, hi), .. } => {
                    if !(*lo < 0 && *hi > 0) {
                        return Err(Error::Config(format!(
                            "window [{lo}, {hi}] of `{var}` must contain -1 and 1"
                        )));
                    }
                    seen_laurent = true;
                    Layer::new(var, LayerKind::Laurent { lo: *lo, hi: *hi }, ram, f)
                }
                StepSpec::Unramified { poly, .. } => {
                    if seen_laurent {
                        return Err(Error::UnramifiedAfterLaurent(var.into()));
                    }
                    let min_poly = tower.monic_poly(var, poly)?;
                    tower.check_unramified(var, &min_poly)?;
                    let n = min_poly.len() as u32;
                    Layer::new(var, LayerKind::Unramified { min_poly }, ram, f * n)
                }
                StepSpec::Eisenstein { poly, .. } => {
                    let min_poly = tower.monic_poly(var, poly)?;
                    tower.check_eisenstein(var, &min_poly)?;
                    let n = min_poly.len() as u32;
                    Layer::new(var, LayerKind::Eisenstein { min_poly }, ram * n, f)
                }
            };
            tower.layers.push(layer);
        }
        Ok(tower)
    }

    /// Parses `text` over the current top level and returns the non-leading
    /// coefficients of the monic polynomial it denotes.
    fn monic_poly(&self, var: &str, text: &str) -> Result<Vec<Elem>> {
        let level = self.top();
        let mut poly = parse_poly(text, self)?;
        poly.trim(self, level);
        let n = poly.degree().ok_or_else(|| Error::NotMonic(var.into()))?;
        if n == 0 {
            return Err(Error::Config(format!("polynomial for `{var}` is constant")));
        }
        let lead = self.sub(level, &poly.coeffs[n], &self.one(level))?;
        if self.valuation(level, &lead).is_exact() {
            return Err(Error::NotMonic(var.into()));
        }
        poly.coeffs.truncate(n);
        Ok(poly.coeffs)
    }

    fn check_eisenstein(&self, var: &str, coeffs: &[Elem]) -> Result<()> {
        let level = self.top();
        let not = |reason: String| Error::NotEisenstein {
            var: var.into(),
            reason,
        };
        for (j, c) in coeffs.iter().enumerate() {
            let v = self.valuation(level, c);
            if j == 0 {
                match v {
                    Valuation::Exact(1) => {}
                    Valuation::AtLeast(b) if b <= 1 => {
                        return Err(Error::PrecisionExhausted(format!(
                            "constant term of `{var}` is indistinguishable from zero"
                        )))
                    }
                    v => return Err(not(format!("constant term has valuation {v}, expected 1"))),
                }
            } else if v.lower_bound() < 1 {
                if v.is_exact() {
                    return Err(not(format!("coefficient of X^{j} is a unit")));
                }
                return Err(Error::PrecisionExhausted(format!(
                    "coefficient of X^{j} in `{var}` is undetermined"
                )));
            }
        }
        Ok(())
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn spec(&self) -> &TowerSpec {
        &self.spec
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    /// Level of the full field `K`.
    pub fn top(&self) -> usize {
        self.layers.len()
    }

    pub(crate) fn layer(&self, level: usize) -> &Layer {
        &self.layers[level - 1]
    }

    /// Ramification index of the level over `Q_p`.
    pub fn ram(&self, level: usize) -> u32 {
        if level == 0 {
            1
        } else {
            self.layer(level).ram
        }
    }

    /// `e = v_K(p)`.
    pub fn ramification_index(&self) -> u32 {
        self.ram(self.top())
    }

    /// Valuation of `p^N` at the given level: nothing finer is representable.
    pub fn cap(&self, level: usize) -> u32 {
        self.precision.saturating_mul(self.ram(level))
    }

    /// Size of the finite part of the residue field at the given level.
    pub fn residue_size(&self, level: usize) -> Result<u64> {
        let f = if level == 0 {
            1
        } else {
            self.layer(level).residue_degree
        };
        self.p
            .checked_pow(f)
            .ok_or_else(|| Error::Config("residue field too large".into()))
    }

    /// Index of the step that adjoined `name`.
    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.layers.iter().position(|l| l.name == name)
    }

    /// Generator `name` as an element of `K`.
    pub fn var(&self, name: &str) -> Result<Elem> {
        let idx = self
            .var_index(name)
            .ok_or_else(|| Error::UnknownIdentifier(name.into()))?;
        let g = self.generator(idx + 1)?;
        Ok(self.lift(idx + 1, self.top(), g))
    }

    /// Integer constant as an element of `K`.
    pub fn int(&self, n: i64) -> Elem {
        self.from_int(self.top(), &BigInt::from(n))
    }

    /// Parses an expression without `X` into an element of `K`.
    pub fn element(&self, text: &str) -> Result<Elem> {
        let poly = parse_poly(text, self)?;
        match poly.coeffs.len() {
            0 => Ok(self.zero(self.top())),
            1 => Ok(poly.coeffs.into_iter().next().unwrap()),
            _ => {
                let mut poly = poly;
                poly.trim(self, self.top());
                if poly.coeffs.len() > 1 {
                    return Err(Error::Config(format!("`{text}` involves X")));
                }
                Ok(poly.coeffs.pop().unwrap_or_else(|| self.zero(self.top())))
            }
        }
    }

    /// `v_K` of an element of `K`.
    pub fn v(&self, x: &Elem) -> Valuation {
        self.valuation(self.top(), x)
    }

    fn unit_part_inv(&self, level: usize) -> Result<Elem> {
        let layer = self.layer(level);
        layer
            .unit_part_inv
            .get_or_init(|| {
                let LayerKind::Eisenstein { min_poly } = &layer.kind else {
                    unreachable!("only Eisenstein layers divide by their generator")
                };
                let w = self.div_uniformizer(level - 1, &min_poly[0])?;
                self.inverse_unit(level - 1, &w)
            })
            .clone()
    }
}

impl Layer {
    fn new(name: &str, kind: LayerKind, ram: u32, residue_degree: u32) -> Self {
        Layer {
            name: name.into(),
            kind,
            ram,
            residue_degree,
            unit_part_inv: OnceLock::new(),
        }
    }
}

#[cfg(test)]
mod tests;
