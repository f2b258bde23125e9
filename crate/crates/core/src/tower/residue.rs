//! Residue field `F = F_q((t_1))...((t_m))` of a tower and reduction of
//! integral elements into it.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Elem, LayerKind, Tower};
use crate::error::{Error, Result};
use crate::padic::Valuation;

/// Structural description of the residue field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidueFieldDesc {
    /// Cardinality of the finite constant field.
    pub q: u64,
    /// Residue Laurent variables in tower order; they form a p-basis of `F`.
    pub laurent_vars: Vec<String>,
}

impl ResidueFieldDesc {
    pub fn is_perfect(&self) -> bool {
        self.laurent_vars.is_empty()
    }
}

impl std::fmt::Display for ResidueFieldDesc {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "F_{}", self.q)?;
        for v in &self.laurent_vars {
            write!(f, "(({v}\u{0304}))")?;
        }
        Ok(())
    }
}

/// Element of the residue field, mirroring the tower layers that change it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Residue {
    Fp(u64),
    /// Coefficients over the basis `1, a, ..., a^{n-1}` of an unramified step.
    Poly(Vec<Residue>),
    /// Truncated Laurent data in a residue variable.
    Laurent(BTreeMap<i64, Residue>),
}

impl Residue {
    pub fn is_zero(&self) -> bool {
        match self {
            Residue::Fp(a) => *a == 0,
            Residue::Poly(c) => c.iter().all(Residue::is_zero),
            Residue::Laurent(m) => m.values().all(Residue::is_zero),
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Residue::Fp(a) => *a == 1,
            Residue::Poly(c) => {
                c.first().is_some_and(Residue::is_one) && c[1..].iter().all(Residue::is_zero)
            }
            Residue::Laurent(m) => {
                m.len() == 1 && m.get(&0).is_some_and(Residue::is_one)
            }
        }
    }
}

impl Tower {
    pub fn residue_field(&self) -> ResidueFieldDesc {
        ResidueFieldDesc {
            q: self.residue_size(self.top()).unwrap_or(u64::MAX),
            laurent_vars: self
                .layers
                .iter()
                .filter(|l| l.is_laurent())
                .map(|l| l.name.clone())
                .collect(),
        }
    }

    /// Image of an integral element in the residue field of `level`.
    pub fn residue(&self, level: usize, x: &Elem) -> Result<Residue> {
        let exhausted =
            || Error::PrecisionExhausted("reduction modulo the maximal ideal is undecidable".into());
        if x.tail() == Some(0) {
            return Err(exhausted());
        }
        match x {
            Elem::Base(a) => a.residue().map(Residue::Fp).ok_or_else(exhausted),
            Elem::Laurent { terms, .. } => {
                let mut m = BTreeMap::new();
                for (i, c) in terms {
                    let r = self.residue(level - 1, c)?;
                    if !r.is_zero() {
                        m.insert(*i, r);
                    }
                }
                Ok(Residue::Laurent(m))
            }
            Elem::Algebraic { coeffs, .. } => match self.layer(level).kind {
                LayerKind::Eisenstein { .. } => self.residue(level - 1, &coeffs[0]),
                _ => Ok(Residue::Poly(
                    coeffs
                        .iter()
                        .map(|c| self.residue(level - 1, c))
                        .collect::<Result<_>>()?,
                )),
            },
        }
    }

    /// Renders a residue using barred variable names.
    pub fn render_residue(&self, level: usize, r: &Residue) -> String {
        let terms = self.residue_terms(level, r);
        if terms.is_empty() {
            return "0".into();
        }
        terms.join(" + ")
    }

    fn residue_terms(&self, level: usize, r: &Residue) -> Vec<String> {
        // Eisenstein layers do not change the residue field
        let mut level = level;
        while level > 0 && matches!(self.layer(level).kind, LayerKind::Eisenstein { .. }) {
            level -= 1;
        }
        let with_var = |coef: Vec<String>, var: String| -> String {
            if coef.len() == 1 && coef[0] == "1" {
                var
            } else if coef.len() == 1 {
                format!("{}*{var}", coef[0])
            } else {
                format!("({})*{var}", coef.join(" + "))
            }
        };
        match r {
            Residue::Fp(0) => vec![],
            Residue::Fp(a) => vec![a.to_string()],
            Residue::Laurent(m) => {
                let lower = level - 1;
                let name = format!("{}\u{0304}", self.layer(level).name);
                let mut out = Vec::new();
                for (i, c) in m {
                    let coef = self.residue_terms(lower, c);
                    if coef.is_empty() {
                        continue;
                    }
                    match *i {
                        0 => out.extend(coef),
                        1 => out.push(with_var(coef, name.clone())),
                        i => out.push(with_var(coef, format!("{name}^{i}"))),
                    }
                }
                out
            }
            Residue::Poly(c) => {
                let name = format!("{}\u{0304}", self.layer(level).name);
                let mut out = Vec::new();
                for (j, cj) in c.iter().enumerate() {
                    let coef = self.residue_terms(level - 1, cj);
                    if coef.is_empty() {
                        continue;
                    }
                    match j {
                        0 => out.extend(coef),
                        1 => out.push(with_var(coef, name.clone())),
                        j => out.push(with_var(coef, format!("{name}^{j}"))),
                    }
                }
                out
            }
        }
    }

    /// Canonical lift of the residue class of `x` (base digits in `[0, p)`).
    /// Only valid below the first Laurent layer.
    fn canonical(&self, level: usize, x: &Elem) -> Result<Elem> {
        match x {
            Elem::Base(a) => {
                let r = a.residue().ok_or_else(|| {
                    Error::PrecisionExhausted("no residue digit is known".into())
                })?;
                Ok(self.from_int(0, &r.into()))
            }
            Elem::Algebraic { coeffs, .. } => match self.layer(level).kind {
                LayerKind::Eisenstein { .. } => {
                    let c0 = self.canonical(level - 1, &coeffs[0])?;
                    Ok(self.lift(level - 1, level, c0))
                }
                _ => Ok(Elem::Algebraic {
                    coeffs: coeffs
                        .iter()
                        .map(|c| self.canonical(level - 1, c))
                        .collect::<Result<_>>()?,
                    tail: None,
                }),
            },
            Elem::Laurent { .. } => unreachable!("finite residue arithmetic below Laurent steps"),
        }
    }

    /// Checks that `X^n + sum c_j X^j` reduces to an irreducible separable
    /// polynomial over the (finite) residue field of the current top level.
    pub(super) fn check_unramified(&self, var: &str, coeffs: &[Elem]) -> Result<()> {
        let ff = FiniteResidue {
            tower: self,
            level: self.top(),
            q: self.residue_size(self.top())?,
        };
        for (j, c) in coeffs.iter().enumerate() {
            if self.valuation(self.top(), c) == Valuation::AtLeast(0) {
                return Err(Error::PrecisionExhausted(format!(
                    "coefficient of X^{j} in `{var}` is undetermined"
                )));
            }
        }
        let mut f: Vec<Elem> = coeffs
            .iter()
            .map(|c| ff.canon(c))
            .collect::<Result<_>>()?;
        f.push(self.one(ff.level));
        let bad = |reason: &str| Error::NotUnramifiedSeparable {
            var: var.into(),
            reason: reason.into(),
        };
        let df = ff.derivative(&f)?;
        if df.is_empty() || ff.degree(&ff.gcd(&f, &df)?) != Some(0) {
            return Err(bad("reduction is inseparable"));
        }
        if !ff.is_irreducible(&f)? {
            return Err(bad("reduction is reducible"));
        }
        Ok(())
    }
}

/// Polynomial arithmetic over the finite residue field of a level, with
/// residue classes represented by canonical lifts.
pub(crate) struct FiniteResidue<'t> {
    pub tower: &'t Tower,
    pub level: usize,
    pub q: u64,
}

type FPoly = Vec<Elem>;

impl FiniteResidue<'_> {
    pub fn canon(&self, x: &Elem) -> Result<Elem> {
        self.tower.canonical(self.level, x)
    }

    fn is_zero(&self, x: &Elem) -> bool {
        x.is_structurally_zero()
    }

    fn add(&self, a: &Elem, b: &Elem) -> Result<Elem> {
        self.canon(&self.tower.add(self.level, a, b)?)
    }

    fn sub(&self, a: &Elem, b: &Elem) -> Result<Elem> {
        self.canon(&self.tower.sub(self.level, a, b)?)
    }

    fn mul(&self, a: &Elem, b: &Elem) -> Result<Elem> {
        self.canon(&self.tower.mul(self.level, a, b)?)
    }

    fn inv(&self, a: &Elem) -> Result<Elem> {
        self.canon(&self.tower.pow(self.level, a, self.q - 2)?)
    }

    fn trim(&self, mut a: FPoly) -> FPoly {
        while a.last().is_some_and(|c| self.is_zero(c)) {
            a.pop();
        }
        a
    }

    pub fn degree(&self, a: &FPoly) -> Option<usize> {
        self.trim(a.clone()).len().checked_sub(1)
    }

    fn derivative(&self, a: &FPoly) -> Result<FPoly> {
        let mut out = Vec::new();
        for (j, c) in a.iter().enumerate().skip(1) {
            out.push(self.canon(&self.tower.mul_int(self.level, c, j as i64)?)?);
        }
        Ok(self.trim(out))
    }

    fn rem(&self, a: &FPoly, m: &FPoly) -> Result<FPoly> {
        let m = self.trim(m.clone());
        let mut a = self.trim(a.clone());
        let dm = m.len() - 1;
        let lc_inv = self.inv(&m[dm])?;
        while a.len() > dm {
            let k = a.len() - 1;
            let c = self.mul(&a[k], &lc_inv)?;
            for (i, mi) in m.iter().enumerate() {
                let idx = k - dm + i;
                a[idx] = self.sub(&a[idx], &self.mul(&c, mi)?)?;
            }
            a = self.trim(a);
        }
        Ok(a)
    }

    fn mul_poly(&self, a: &FPoly, b: &FPoly) -> Result<FPoly> {
        if a.is_empty() || b.is_empty() {
            return Ok(vec![]);
        }
        let mut out = vec![self.tower.zero(self.level); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] = self.add(&out[i + j], &self.mul(x, y)?)?;
            }
        }
        Ok(self.trim(out))
    }

    fn powmod(&self, a: &FPoly, mut e: u64, m: &FPoly) -> Result<FPoly> {
        let mut acc = vec![self.tower.one(self.level)];
        let mut b = self.rem(a, m)?;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.rem(&self.mul_poly(&acc, &b)?, m)?;
            }
            e >>= 1;
            if e > 0 {
                b = self.rem(&self.mul_poly(&b, &b)?, m)?;
            }
        }
        Ok(acc)
    }

    fn sub_poly(&self, a: &FPoly, b: &FPoly) -> Result<FPoly> {
        let n = a.len().max(b.len());
        let zero = self.tower.zero(self.level);
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push(self.sub(a.get(i).unwrap_or(&zero), b.get(i).unwrap_or(&zero))?);
        }
        Ok(self.trim(out))
    }

    fn gcd(&self, a: &FPoly, b: &FPoly) -> Result<FPoly> {
        let mut a = self.trim(a.clone());
        let mut b = self.trim(b.clone());
        while !b.is_empty() {
            let r = self.rem(&a, &b)?;
            a = b;
            b = r;
        }
        Ok(a)
    }

    /// Rabin's test: `f` of degree `n` is irreducible iff `X^{q^n} = X mod f`
    /// and `gcd(X^{q^{n/d}} - X, f) = 1` for every prime `d | n`.
    fn is_irreducible(&self, f: &FPoly) -> Result<bool> {
        let n = self.degree(f).unwrap_or(0);
        if n <= 1 {
            return Ok(n == 1);
        }
        let x = vec![self.tower.zero(self.level), self.tower.one(self.level)];
        let mut frob = vec![self.rem(&x, f)?];
        for _ in 0..n {
            let prev = frob.last().unwrap();
            frob.push(self.powmod(prev, self.q, f)?);
        }
        if !self.sub_poly(&frob[n], &frob[0])?.is_empty() {
            return Ok(false);
        }
        for d in (2..=n).filter(|d| n.is_multiple_of(*d) && (2..*d).all(|k| d % k != 0)) {
            let h = self.sub_poly(&frob[n / d], &frob[0])?;
            if self.degree(&self.gcd(&h, f)?) != Some(0) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}
