use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::{LayerKind, Tower};
use crate::error::{Error, Result};
use crate::padic::{PAdicInt, Valuation};

/// Element of a level of a [`Tower`].
///
/// The nesting mirrors the tower: a Laurent layer maps exponents inside the
/// step's window to coefficients one level down, an algebraic layer of degree
/// `n` holds exactly `n` coefficients of `1, a, ..., a^{n-1}`.
///
/// `tail` is an unknown error term: the true element differs from the stored
/// one by something of valuation at least `tail` (measured at this level).
/// It is `None` when no information was discarded.
#[derive(Debug, Clone, PartialEq)]
pub enum Elem {
    Base(PAdicInt),
    Laurent {
        terms: BTreeMap<i64, Elem>,
        tail: Option<u32>,
    },
    Algebraic {
        coeffs: Vec<Elem>,
        tail: Option<u32>,
    },
}

fn min_tail(a: Option<u32>, b: Option<u32>) -> Option<u32> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

fn add_bound(v: u32, t: Option<u32>) -> Option<u32> {
    t.map(|t| t.saturating_add(v))
}

fn ceil_log2(n: u64) -> u32 {
    64 - n.saturating_sub(1).leading_zeros()
}

impl Elem {
    pub fn tail(&self) -> Option<u32> {
        match self {
            Elem::Base(_) => None,
            Elem::Laurent { tail, .. } | Elem::Algebraic { tail, .. } => *tail,
        }
    }

    fn set_tail(&mut self, t: Option<u32>) {
        match self {
            Elem::Base(_) => {}
            Elem::Laurent { tail, .. } | Elem::Algebraic { tail, .. } => *tail = t,
        }
    }

    /// True when no base digit is nonzero and no tail is recorded.
    pub fn is_structurally_zero(&self) -> bool {
        match self {
            Elem::Base(a) => a.is_structurally_zero(),
            Elem::Laurent { terms, tail } => {
                tail.is_none() && terms.values().all(Elem::is_structurally_zero)
            }
            Elem::Algebraic { coeffs, tail } => {
                tail.is_none() && coeffs.iter().all(Elem::is_structurally_zero)
            }
        }
    }

    /// True when the element is exact (no tails anywhere).
    pub fn is_exact(&self) -> bool {
        match self {
            Elem::Base(_) => true,
            Elem::Laurent { terms, tail } => tail.is_none() && terms.values().all(Elem::is_exact),
            Elem::Algebraic { coeffs, tail } => {
                tail.is_none() && coeffs.iter().all(Elem::is_exact)
            }
        }
    }

    fn as_base(&self) -> &PAdicInt {
        match self {
            Elem::Base(a) => a,
            _ => panic!("element does not live at level 0"),
        }
    }

    fn laurent_parts(&self) -> (&BTreeMap<i64, Elem>, Option<u32>) {
        match self {
            Elem::Laurent { terms, tail } => (terms, *tail),
            _ => panic!("element does not live at a Laurent level"),
        }
    }

    fn algebraic_parts(&self) -> (&[Elem], Option<u32>) {
        match self {
            Elem::Algebraic { coeffs, tail } => (coeffs, *tail),
            _ => panic!("element does not live at an algebraic level"),
        }
    }
}

impl Tower {
    pub fn zero(&self, level: usize) -> Elem {
        if level == 0 {
            return Elem::Base(PAdicInt::zero(self.p, self.precision));
        }
        match &self.layer(level).kind {
            LayerKind::Laurent { .. } => Elem::Laurent {
                terms: BTreeMap::new(),
                tail: None,
            },
            LayerKind::Eisenstein { min_poly } | LayerKind::Unramified { min_poly } => {
                Elem::Algebraic {
                    coeffs: vec![self.zero(level - 1); min_poly.len()],
                    tail: None,
                }
            }
        }
    }

    pub fn from_int(&self, level: usize, n: &BigInt) -> Elem {
        let base = Elem::Base(PAdicInt::from_bigint(self.p, n, self.precision));
        self.lift(0, level, base)
    }

    pub fn one(&self, level: usize) -> Elem {
        self.from_int(level, &BigInt::one())
    }

    /// Embeds an element of level `from` into level `to >= from`.
    pub fn lift(&self, from: usize, to: usize, x: Elem) -> Elem {
        let mut x = x;
        for level in from + 1..=to {
            x = match &self.layer(level).kind {
                LayerKind::Laurent { .. } => {
                    let mut terms = BTreeMap::new();
                    if !x.is_structurally_zero() {
                        terms.insert(0, x);
                    }
                    Elem::Laurent { terms, tail: None }
                }
                LayerKind::Eisenstein { min_poly } | LayerKind::Unramified { min_poly } => {
                    let mut coeffs = vec![self.zero(level - 1); min_poly.len()];
                    coeffs[0] = x;
                    Elem::Algebraic { coeffs, tail: None }
                }
            };
        }
        x
    }

    /// The variable adjoined at `level`, as an element of that level.
    pub fn generator(&self, level: usize) -> Result<Elem> {
        match &self.layer(level).kind {
            LayerKind::Laurent { .. } => self.monomial(level, 1, self.one(level - 1)),
            LayerKind::Eisenstein { min_poly } | LayerKind::Unramified { min_poly } => {
                let n = min_poly.len();
                let mut coeffs = vec![self.zero(level - 1); n];
                if n == 1 {
                    coeffs[0] = self.neg(level - 1, &min_poly[0]);
                } else {
                    coeffs[1] = self.one(level - 1);
                }
                Ok(Elem::Algebraic { coeffs, tail: None })
            }
        }
    }

    /// `c * t^i` at a Laurent level.
    pub fn monomial(&self, level: usize, i: i64, c: Elem) -> Result<Elem> {
        let LayerKind::Laurent { lo, hi } = self.layer(level).kind else {
            panic!("monomial requested at a non-Laurent level");
        };
        if i < lo || i > hi {
            return Err(Error::WindowOverflow(format!(
                "exponent {i} of `{}` outside window [{lo}, {hi}]",
                self.layer(level).name
            )));
        }
        let mut terms = BTreeMap::new();
        terms.insert(i, c);
        Ok(self.normalize_laurent(level, terms, None))
    }

    /// Drops zero Laurent coefficients, folding any lost precision into the tail.
    fn normalize_laurent(
        &self,
        level: usize,
        mut terms: BTreeMap<i64, Elem>,
        mut tail: Option<u32>,
    ) -> Elem {
        let lower_cap = self.cap(level - 1);
        terms.retain(|_, c| {
            if !c.is_structurally_zero() {
                return true;
            }
            let b = self.valuation(level - 1, c).lower_bound();
            if b < lower_cap {
                tail = min_tail(tail, Some(b));
            }
            false
        });
        Elem::Laurent { terms, tail }
    }

    pub fn add(&self, level: usize, a: &Elem, b: &Elem) -> Result<Elem> {
        if level == 0 {
            return Ok(Elem::Base(a.as_base().add(b.as_base())?));
        }
        match &self.layer(level).kind {
            LayerKind::Laurent { .. } => {
                let (ta, xa) = a.laurent_parts();
                let (tb, xb) = b.laurent_parts();
                let mut terms = ta.clone();
                for (i, c) in tb {
                    let s = match terms.get(i) {
                        Some(d) => self.add(level - 1, d, c)?,
                        None => c.clone(),
                    };
                    terms.insert(*i, s);
                }
                Ok(self.normalize_laurent(level, terms, min_tail(xa, xb)))
            }
            _ => {
                let (ca, xa) = a.algebraic_parts();
                let (cb, xb) = b.algebraic_parts();
                let coeffs = ca
                    .iter()
                    .zip(cb)
                    .map(|(x, y)| self.add(level - 1, x, y))
                    .collect::<Result<_>>()?;
                Ok(Elem::Algebraic {
                    coeffs,
                    tail: min_tail(xa, xb),
                })
            }
        }
    }

    #[allow(clippy::only_used_in_recursion)]
    pub fn neg(&self, level: usize, a: &Elem) -> Elem {
        match a {
            Elem::Base(x) => Elem::Base(x.neg()),
            Elem::Laurent { terms, tail } => Elem::Laurent {
                terms: terms
                    .iter()
                    .map(|(i, c)| (*i, self.neg(level - 1, c)))
                    .collect(),
                tail: *tail,
            },
            Elem::Algebraic { coeffs, tail } => Elem::Algebraic {
                coeffs: coeffs.iter().map(|c| self.neg(level - 1, c)).collect(),
                tail: *tail,
            },
        }
    }

    pub fn sub(&self, level: usize, a: &Elem, b: &Elem) -> Result<Elem> {
        self.add(level, a, &self.neg(level, b))
    }

    /// Error bound of a product of two uncertain factors.
    fn product_tail(&self, level: usize, a: &Elem, b: &Elem) -> Option<u32> {
        let (xa, xb) = (a.tail(), b.tail());
        if xa.is_none() && xb.is_none() {
            return None;
        }
        let va = self.valuation(level, a).lower_bound();
        let vb = self.valuation(level, b).lower_bound();
        let both = match (xa, xb) {
            (Some(x), Some(y)) => Some(x.saturating_add(y)),
            _ => None,
        };
        min_tail(min_tail(add_bound(va, xb), add_bound(vb, xa)), both)
    }

    pub fn mul(&self, level: usize, a: &Elem, b: &Elem) -> Result<Elem> {
        if level == 0 {
            return Ok(Elem::Base(a.as_base().mul(b.as_base())?));
        }
        let tail = self.product_tail(level, a, b);
        match &self.layer(level).kind {
            LayerKind::Laurent { lo, hi } => {
                let (ta, _) = a.laurent_parts();
                let (tb, _) = b.laurent_parts();
                let mut terms: BTreeMap<i64, Elem> = BTreeMap::new();
                let mut dropped: Option<u32> = None;
                let cap = self.cap(level);
                for (i, x) in ta {
                    for (j, y) in tb {
                        let k = i + j;
                        let prod = self.mul(level - 1, x, y)?;
                        if k < *lo || k > *hi {
                            if !prod.is_structurally_zero() || prod.tail().is_some() {
                                let v = self.valuation(level - 1, &prod).lower_bound();
                                if v < cap {
                                    dropped = min_tail(dropped, Some(v));
                                }
                            }
                            continue;
                        }
                        let s = match terms.get(&k) {
                            Some(d) => self.add(level - 1, d, &prod)?,
                            None => prod,
                        };
                        terms.insert(k, s);
                    }
                }
                Ok(self.normalize_laurent(level, terms, min_tail(tail, dropped)))
            }
            LayerKind::Eisenstein { min_poly } | LayerKind::Unramified { min_poly } => {
                let (ca, _) = a.algebraic_parts();
                let (cb, _) = b.algebraic_parts();
                let n = min_poly.len();
                let mut h = vec![self.zero(level - 1); 2 * n - 1];
                for (i, x) in ca.iter().enumerate() {
                    for (j, y) in cb.iter().enumerate() {
                        let prod = self.mul(level - 1, x, y)?;
                        h[i + j] = self.add(level - 1, &h[i + j], &prod)?;
                    }
                }
                // X^n = -sum c_j X^j
                for k in (n..2 * n - 1).rev() {
                    let top = std::mem::replace(&mut h[k], self.zero(level - 1));
                    if top.is_structurally_zero() && top.tail().is_none() {
                        continue;
                    }
                    for (j, c) in min_poly.iter().enumerate() {
                        let prod = self.mul(level - 1, &top, c)?;
                        h[k - n + j] = self.sub(level - 1, &h[k - n + j], &prod)?;
                    }
                }
                h.truncate(n);
                Ok(Elem::Algebraic { coeffs: h, tail })
            }
        }
    }

    pub fn pow(&self, level: usize, x: &Elem, mut k: u64) -> Result<Elem> {
        let mut acc = self.one(level);
        let mut base = x.clone();
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul(level, &acc, &base)?;
            }
            k >>= 1;
            if k > 0 {
                base = self.mul(level, &base, &base)?;
            }
        }
        Ok(acc)
    }

    pub fn mul_int(&self, level: usize, x: &Elem, n: i64) -> Result<Elem> {
        self.mul(level, x, &self.from_int(level, &BigInt::from(n)))
    }

    /// Normalized valuation at `level` (the uniformizer of that level has valuation 1).
    pub fn valuation(&self, level: usize, x: &Elem) -> Valuation {
        if level == 0 {
            return x.as_base().valuation();
        }
        let cap = self.cap(level);
        let v = match x {
            Elem::Base(_) => unreachable!(),
            Elem::Laurent { terms, .. } => {
                Valuation::min_of(terms.values().map(|c| self.valuation(level - 1, c)), cap)
            }
            Elem::Algebraic { coeffs, .. } => match &self.layer(level).kind {
                LayerKind::Eisenstein { min_poly } => {
                    let n = min_poly.len() as u32;
                    Valuation::min_of(
                        coeffs.iter().enumerate().map(|(j, c)| {
                            match self.valuation(level - 1, c) {
                                Valuation::Exact(w) => Valuation::Exact(n * w + j as u32),
                                Valuation::AtLeast(b) => Valuation::AtLeast(
                                    b.saturating_mul(n).saturating_add(j as u32),
                                ),
                            }
                        }),
                        cap,
                    )
                }
                _ => Valuation::min_of(coeffs.iter().map(|c| self.valuation(level - 1, c)), cap),
            },
        };
        let v = match v {
            Valuation::AtLeast(b) => Valuation::AtLeast(b.min(cap)),
            v => v,
        };
        v.with_tail(x.tail())
    }

    /// Divides by the uniformizer of `level`; requires `v(x) >= 1`.
    pub fn div_uniformizer(&self, level: usize, x: &Elem) -> Result<Elem> {
        match self.valuation(level, x) {
            Valuation::Exact(0) => {
                return Err(Error::Config("element is not divisible by the uniformizer".into()))
            }
            Valuation::AtLeast(0) => {
                return Err(Error::PrecisionExhausted(
                    "divisibility by the uniformizer is undecidable".into(),
                ))
            }
            _ => {}
        }
        if level == 0 {
            return Ok(Elem::Base(x.as_base().div_p()?));
        }
        let tail = x.tail().map(|t| t.saturating_sub(1));
        match (&self.layer(level).kind, x) {
            (LayerKind::Laurent { .. }, Elem::Laurent { terms, .. }) => {
                let terms = terms
                    .iter()
                    .map(|(i, c)| Ok((*i, self.div_uniformizer(level - 1, c)?)))
                    .collect::<Result<_>>()?;
                Ok(self.normalize_laurent(level, terms, tail))
            }
            (LayerKind::Unramified { .. }, Elem::Algebraic { coeffs, .. }) => {
                let coeffs = coeffs
                    .iter()
                    .map(|c| self.div_uniformizer(level - 1, c))
                    .collect::<Result<_>>()?;
                Ok(Elem::Algebraic { coeffs, tail })
            }
            (LayerKind::Eisenstein { min_poly }, Elem::Algebraic { coeffs, .. }) => {
                // 1/pi = -(pi^{n-1} + c_{n-1} pi^{n-2} + ... + c_1) / c_0
                let n = min_poly.len();
                let lower = level - 1;
                let s = self.mul(
                    lower,
                    &self.div_uniformizer(lower, &coeffs[0])?,
                    &self.unit_part_inv(level)?,
                )?;
                let mut out = Vec::with_capacity(n);
                for j in 0..n - 1 {
                    let sc = self.mul(lower, &s, &min_poly[j + 1])?;
                    out.push(self.sub(lower, &coeffs[j + 1], &sc)?);
                }
                out.push(self.neg(lower, &s));
                Ok(Elem::Algebraic { coeffs: out, tail })
            }
            _ => unreachable!("element shape does not match its level"),
        }
    }

    /// Inverse of a unit, by Newton iteration from a residue-level inverse.
    pub fn inverse_unit(&self, level: usize, u: &Elem) -> Result<Elem> {
        match self.valuation(level, u) {
            Valuation::Exact(0) => {}
            Valuation::AtLeast(0) => {
                return Err(Error::PrecisionExhausted(
                    "cannot decide whether the element is a unit".into(),
                ))
            }
            _ => return Err(Error::NotAUnit),
        }
        if level == 0 {
            return Ok(Elem::Base(u.as_base().invert()?));
        }
        let mut x = match (&self.layer(level).kind, u) {
            (LayerKind::Laurent { .. }, Elem::Laurent { terms, .. }) => {
                let (k, c) = terms
                    .iter()
                    .find(|(_, c)| self.valuation(level - 1, c).lower_bound() == 0)
                    .expect("a unit has a coefficient of valuation 0");
                let ci = self.inverse_unit(level - 1, c)?;
                self.monomial(level, -k, ci)?
            }
            (LayerKind::Eisenstein { .. }, Elem::Algebraic { coeffs, .. }) => {
                let a0 = self.inverse_unit(level - 1, &coeffs[0])?;
                self.lift(level - 1, level, a0)
            }
            (LayerKind::Unramified { .. }, _) => {
                // finite residue field of size q: u^(q-2) inverts u modulo the maximal ideal
                let q = self.residue_size(level)?;
                self.pow(level, u, q - 2)?
            }
            _ => unreachable!("element shape does not match its level"),
        };
        let cap = self.cap(level);
        let span: u64 = self
            .layers
            .iter()
            .take(level)
            .map(|l| match l.kind {
                LayerKind::Laurent { lo, hi } => (hi - lo) as u64,
                _ => 0,
            })
            .sum();
        let rounds = ceil_log2(cap as u64 + 1) + ceil_log2(span + 1) + 2;
        let one = self.one(level);
        let mut r = self.sub(level, &one, &self.mul(level, u, &x)?)?;
        // r is squared each round; once its bound stops growing (residue not
        // a monomial, or window losses) further rounds cannot help
        let mut prev = None;
        for _ in 0..rounds {
            let b = self.valuation(level, &r);
            if matches!(b, Valuation::AtLeast(b) if b >= cap) || prev >= Some(b.lower_bound()) {
                break;
            }
            prev = Some(b.lower_bound());
            x = self.add(level, &x, &self.mul(level, &x, &r)?)?;
            r = self.sub(level, &one, &self.mul(level, u, &x)?)?;
        }
        let b = self.valuation(level, &r).lower_bound();
        if b < cap {
            let t = min_tail(x.tail(), Some(b));
            x.set_tail(t);
        }
        Ok(x)
    }

    /// `b / a` for `v(b) >= v(a)`, with `v(a)` certified.
    pub fn div_exact(&self, level: usize, b: &Elem, a: &Elem) -> Result<Elem> {
        let w = match self.valuation(level, a) {
            Valuation::Exact(w) => w,
            Valuation::AtLeast(_) => {
                return Err(Error::PrecisionExhausted(
                    "divisor is indistinguishable from zero".into(),
                ))
            }
        };
        let vb = self.valuation(level, b);
        if vb.lower_bound() < w {
            return Err(match vb {
                Valuation::Exact(_) => Error::Config("quotient is not integral".into()),
                Valuation::AtLeast(_) => {
                    Error::PrecisionExhausted("integrality of a quotient is undecidable".into())
                }
            });
        }
        let mut aa = a.clone();
        let mut bb = b.clone();
        for _ in 0..w {
            aa = self.div_uniformizer(level, &aa)?;
            bb = self.div_uniformizer(level, &bb)?;
        }
        let inv = self.inverse_unit(level, &aa)?;
        self.mul(level, &bb, &inv)
    }

    /// True when `a` and `b` agree at working precision.
    pub fn eq_at_precision(&self, level: usize, a: &Elem, b: &Elem) -> bool {
        match self.sub(level, a, b) {
            Ok(d) => !self.valuation(level, &d).is_exact(),
            Err(_) => false,
        }
    }

    /// Human-readable rendering such as `3*pi^2 - 3*t`.
    pub fn render(&self, level: usize, x: &Elem) -> String {
        self.render_to(level, x, self.cap(level))
    }

    /// Like [`Tower::render`], but error terms of valuation `>= cutoff` are
    /// left out.
    pub fn render_to(&self, level: usize, x: &Elem, cutoff: u32) -> String {
        let mut terms = Vec::new();
        self.collect_terms(level, x, &mut Vec::new(), &mut terms);
        let mut out = String::new();
        for (coef, mono) in &terms {
            let neg = coef.is_negative();
            let mag = coef.abs();
            if out.is_empty() {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mono: Vec<String> = mono
                .iter()
                .map(|(name, e)| {
                    if *e == 1 {
                        name.clone()
                    } else {
                        format!("{name}^{e}")
                    }
                })
                .collect();
            if mono.is_empty() {
                let _ = write!(out, "{mag}");
            } else if mag.is_one() {
                out.push_str(&mono.join("*"));
            } else {
                let _ = write!(out, "{mag}*{}", mono.join("*"));
            }
        }
        if let Some(t) = self.error_bound(level, x).filter(|&t| t < cutoff) {
            if !out.is_empty() {
                out.push_str(" + ");
            }
            let _ = write!(out, "O(v>={t})");
        }
        if out.is_empty() {
            out.push('0');
        }
        out
    }

    /// Drops every term of valuation `>= bound`. Returns the truncated
    /// element, carrying a tail of `bound`, and whether anything was dropped;
    /// an element with nothing to drop comes back unchanged.
    pub fn truncate(&self, level: usize, x: &Elem, bound: u32) -> (Elem, bool) {
        match x {
            Elem::Base(a) => {
                if bound >= a.precision() {
                    return (x.clone(), false);
                }
                let t = a.with_precision(bound);
                if t.signed_value() == a.signed_value() {
                    (x.clone(), false)
                } else {
                    (Elem::Base(t), true)
                }
            }
            Elem::Laurent { terms, tail } => {
                let mut changed = false;
                let mut out = BTreeMap::new();
                for (i, c) in terms {
                    let (t, ch) = self.truncate(level - 1, c, bound);
                    changed |= ch;
                    if !t.is_structurally_zero() {
                        out.insert(*i, t);
                    }
                }
                let tail = if changed { min_tail(*tail, Some(bound)) } else { *tail };
                (Elem::Laurent { terms: out, tail }, changed)
            }
            Elem::Algebraic { coeffs, tail } => {
                let n = match &self.layer(level).kind {
                    LayerKind::Eisenstein { min_poly } => Some(min_poly.len() as u32),
                    _ => None,
                };
                let mut changed = false;
                let coeffs = coeffs
                    .iter()
                    .enumerate()
                    .map(|(j, c)| {
                        let inner = match n {
                            Some(n) => bound.saturating_sub(j as u32).div_ceil(n),
                            None => bound,
                        };
                        let (t, ch) = self.truncate(level - 1, c, inner);
                        changed |= ch;
                        t
                    })
                    .collect();
                let tail = if changed { min_tail(*tail, Some(bound)) } else { *tail };
                (Elem::Algebraic { coeffs, tail }, changed)
            }
        }
    }

    /// Valuation bound of everything not stored exactly in `x`: recorded
    /// tails and lost base digits, measured at `level`. `None` when the
    /// uncertainty is at or beyond the working precision.
    pub fn error_bound(&self, level: usize, x: &Elem) -> Option<u32> {
        let b = self.raw_error_bound(level, x)?;
        (b < self.cap(level)).then_some(b)
    }

    fn raw_error_bound(&self, level: usize, x: &Elem) -> Option<u32> {
        match x {
            Elem::Base(a) => (a.precision() < self.precision).then_some(a.precision()),
            Elem::Laurent { terms, tail } => terms
                .values()
                .map(|c| self.raw_error_bound(level - 1, c))
                .fold(*tail, min_tail),
            Elem::Algebraic { coeffs, tail } => {
                let scale = match &self.layer(level).kind {
                    LayerKind::Eisenstein { min_poly } => Some(min_poly.len() as u32),
                    _ => None,
                };
                coeffs
                    .iter()
                    .enumerate()
                    .map(|(j, c)| {
                        let b = self.raw_error_bound(level - 1, c)?;
                        Some(match scale {
                            Some(n) => b.saturating_mul(n).saturating_add(j as u32),
                            None => b,
                        })
                    })
                    .fold(*tail, min_tail)
            }
        }
    }

    fn collect_terms(
        &self,
        level: usize,
        x: &Elem,
        prefix: &mut Vec<(String, i64)>,
        out: &mut Vec<(BigInt, Vec<(String, i64)>)>,
    ) {
        match x {
            Elem::Base(a) => {
                let c = a.signed_value();
                if !c.is_zero() {
                    out.push((c, prefix.iter().rev().cloned().collect()));
                }
            }
            Elem::Laurent { terms, .. } => {
                let name = self.layer(level).name.clone();
                for (i, c) in terms {
                    if *i != 0 {
                        prefix.push((name.clone(), *i));
                    }
                    self.collect_terms(level - 1, c, prefix, out);
                    if *i != 0 {
                        prefix.pop();
                    }
                }
            }
            Elem::Algebraic { coeffs, .. } => {
                let name = self.layer(level).name.clone();
                for (j, c) in coeffs.iter().enumerate() {
                    if j != 0 {
                        prefix.push((name.clone(), j as i64));
                    }
                    self.collect_terms(level - 1, c, prefix, out);
                    if j != 0 {
                        prefix.pop();
                    }
                }
            }
        }
    }
}
