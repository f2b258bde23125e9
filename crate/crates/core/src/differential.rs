//! Presentation of the completed differential module of `O_K`.
//!
//! Generators are `d` of the tower variables, in tower order. Each algebraic
//! step contributes one relation: the total derivative of its minimal
//! polynomial evaluated at the generator.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::smith::MARGIN;
use crate::tower::{Elem, LayerKind, Tower};

/// Label of a generator column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "var")]
pub enum GenLabel {
    Algebraic(String),
    Laurent(String),
}

impl GenLabel {
    pub fn var(&self) -> &str {
        match self {
            GenLabel::Algebraic(v) | GenLabel::Laurent(v) => v,
        }
    }

    pub fn is_laurent(&self) -> bool {
        matches!(self, GenLabel::Laurent(_))
    }
}

impl fmt::Display for GenLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "d{}", self.var())
    }
}

/// Coefficients of a differential with respect to the generator labels,
/// as elements of `O_K`.
pub type DerivativeVector = Vec<Elem>;

#[derive(Debug, Clone)]
pub struct Presentation {
    pub generator_labels: Vec<GenLabel>,
    /// One row per algebraic step; entries live at the top level.
    pub relations: Vec<Vec<Elem>>,
}

impl Presentation {
    pub fn columns(&self) -> usize {
        self.generator_labels.len()
    }
}

pub fn generator_labels(tower: &Tower) -> Vec<GenLabel> {
    tower
        .layers()
        .iter()
        .map(|l| {
            if l.is_laurent() {
                GenLabel::Laurent(l.name.clone())
            } else {
                GenLabel::Algebraic(l.name.clone())
            }
        })
        .collect()
}

/// `dx` for an element of `K`, one coordinate per generator.
pub fn total_derivative(tower: &Tower, x: &Elem) -> Result<DerivativeVector> {
    derivative_at(tower, tower.top(), x)
}

/// `dx` for an element of the given level; the vector has `level` entries,
/// all at that level.
pub fn derivative_at(tower: &Tower, level: usize, x: &Elem) -> Result<DerivativeVector> {
    if !x.is_exact() {
        return Err(Error::WindowOverflow(
            "cannot differentiate an element with a truncated tail".into(),
        ));
    }
    deriv(tower, level, x)
}

fn deriv(tower: &Tower, level: usize, x: &Elem) -> Result<DerivativeVector> {
    if level == 0 {
        return Ok(Vec::new());
    }
    let below = level - 1;
    let mut out = vec![tower.zero(level); level];
    // (power of the generator, coefficient) pairs; the exponent drives the
    // new coordinate, the coefficient recurses
    let (parts, generator): (Vec<(i64, &Elem)>, Option<Elem>) = match x {
        Elem::Laurent { terms, .. } => (terms.iter().map(|(&i, c)| (i, c)).collect(), None),
        Elem::Algebraic { coeffs, .. } => (
            coeffs.iter().enumerate().map(|(j, c)| (j as i64, c)).collect(),
            Some(tower.generator(level)?),
        ),
        Elem::Base(_) => unreachable!("base element above level 0"),
    };
    let power = |i: i64| -> Result<Elem> {
        match &generator {
            None => tower.monomial(level, i, tower.one(below)),
            Some(g) => tower.pow(level, g, i as u64),
        }
    };
    for (i, c) in parts {
        if c.is_structurally_zero() {
            continue;
        }
        let gi = power(i)?;
        for (k, dc) in deriv(tower, below, c)?.into_iter().enumerate() {
            let term = tower.mul(level, &gi, &tower.lift(below, level, dc))?;
            out[k] = tower.add(level, &out[k], &term)?;
        }
        if i != 0 {
            let ic = tower.mul_int(level, &tower.lift(below, level, c.clone()), i)?;
            let term = tower.mul(level, &ic, &power(i - 1)?)?;
            out[below] = tower.add(level, &out[below], &term)?;
        }
    }
    Ok(out)
}

/// Relation rows of the presentation, one per algebraic step.
pub fn build_presentation(tower: &Tower) -> Result<Presentation> {
    let top = tower.top();
    let mut relations = Vec::new();
    for (s, layer) in tower.layers().iter().enumerate() {
        let min_poly = match &layer.kind {
            LayerKind::Laurent { .. } => continue,
            LayerKind::Eisenstein { min_poly } | LayerKind::Unramified { min_poly } => min_poly,
        };
        let level = s + 1;
        let n = min_poly.len();
        let alpha = tower.generator(level)?;
        let mut row = vec![tower.zero(level); level];
        // f'(alpha) = n alpha^{n-1} + sum j c_j alpha^{j-1}
        let mut fprime = tower.mul_int(level, &tower.pow(level, &alpha, n as u64 - 1)?, n as i64)?;
        for (j, c) in min_poly.iter().enumerate() {
            let c_up = tower.lift(s, level, c.clone());
            let aj = tower.pow(level, &alpha, j as u64)?;
            if j > 0 {
                let term = tower.mul(level, &c_up, &tower.pow(level, &alpha, j as u64 - 1)?)?;
                fprime = tower.add(level, &fprime, &tower.mul_int(level, &term, j as i64)?)?;
            }
            for (k, dc) in derivative_at(tower, s, c)?.into_iter().enumerate() {
                let term = tower.mul(level, &aj, &tower.lift(s, level, dc))?;
                row[k] = tower.add(level, &row[k], &term)?;
            }
        }
        row[s] = fprime;
        let mut row: Vec<Elem> = row.into_iter().map(|e| tower.lift(level, top, e)).collect();
        row.resize(top, tower.zero(top));
        relations.push(row);
    }
    Ok(Presentation {
        generator_labels: generator_labels(tower),
        relations,
    })
}

/// Renders a differential such as `dt - pi^2*dpi`, omitting zero coordinates.
/// Uncertainty beyond the Smith-form safety margin is not shown: nothing
/// reported downstream depends on it.
pub fn render_form(tower: &Tower, labels: &[GenLabel], g: &[Elem]) -> String {
    let top = tower.top();
    let cutoff = tower
        .cap(top)
        .saturating_sub(MARGIN * tower.ramification_index());
    let mut out = String::new();
    for (label, c) in labels.iter().zip(g) {
        if c.is_structurally_zero() {
            continue;
        }
        let coef = tower.render_to(top, c, cutoff);
        let (neg, body) = match coef.strip_prefix('-') {
            Some(rest) if !rest.contains([' ']) => (true, rest.to_string()),
            _ => (false, coef.clone()),
        };
        let term = match body.as_str() {
            "1" => label.to_string(),
            b if b.contains(' ') => format!("({b})*{label}"),
            b => format!("{b}*{label}"),
        };
        match (out.is_empty(), neg) {
            (true, true) => out.push_str(&format!("-{term}")),
            (true, false) => out.push_str(&term),
            (false, true) => out.push_str(&format!(" - {term}")),
            (false, false) => out.push_str(&format!(" + {term}")),
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::Valuation;
    use crate::tower::TowerSpec;
    use proptest::prelude::*;

    fn root_pt(p: u64) -> Tower {
        TowerSpec::new(p)
            .laurent("t")
            .eisenstein("pi", &format!("X^{p} - {p}*t"))
            .build()
            .unwrap()
    }

    fn same(k: &Tower, a: &[Elem], b: &[Elem]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| k.eq_at_precision(k.top(), x, y))
    }

    fn el(k: &Tower, s: &str) -> Elem {
        k.element(s).unwrap()
    }

    #[test]
    fn derivative_of_generators_and_constants() {
        let k = TowerSpec::new(3).laurent("t").build().unwrap();
        assert!(same(&k, &total_derivative(&k, &el(&k, "t")).unwrap(), &[el(&k, "1")]));
        let k = root_pt(3);
        let d = total_derivative(&k, &el(&k, "3*t")).unwrap();
        assert!(same(&k, &d, &[el(&k, "3"), el(&k, "0")]));
        assert!(same(&k, &total_derivative(&k, &el(&k, "7")).unwrap(), &[el(&k, "0"), el(&k, "0")]));
    }

    #[test]
    fn leibniz_by_hand() {
        // d(pi^2 t) = pi^2 dt + 2 pi t dpi, no reduction involved
        let k = root_pt(3);
        let d = total_derivative(&k, &el(&k, "pi^2*t")).unwrap();
        assert!(same(&k, &d, &[el(&k, "pi^2"), el(&k, "2*pi*t")]));
    }

    #[test]
    fn root_pt_row() {
        for p in [3, 5] {
            let k = root_pt(p);
            let pres = build_presentation(&k).unwrap();
            assert_eq!(
                pres.generator_labels,
                vec![GenLabel::Laurent("t".into()), GenLabel::Algebraic("pi".into())]
            );
            assert_eq!(pres.relations.len(), 1);
            let want = [el(&k, &format!("-{p}")), el(&k, &format!("{p}*pi^{}", p - 1))];
            assert!(same(&k, &pres.relations[0], &want));
            assert_eq!(render_form(&k, &pres.generator_labels, &pres.relations[0]), format!("-{p}*dt + {p}*pi^{}*dpi", p - 1));
        }
    }

    #[test]
    fn monogenic_row_is_derivative_of_min_poly() {
        let k = TowerSpec::new(3).eisenstein("pi", "X^2 - 3").build().unwrap();
        let pres = build_presentation(&k).unwrap();
        assert_eq!(pres.relations, vec![vec![el(&k, "2*pi")]]);
        assert_eq!(k.v(&pres.relations[0][0]), Valuation::Exact(1));
    }

    #[test]
    fn free_tower_has_no_relations() {
        let k = TowerSpec::new(3).laurent("t").build().unwrap();
        let pres = build_presentation(&k).unwrap();
        assert!(pres.relations.is_empty());
        assert_eq!(pres.columns(), 1);
    }

    #[test]
    fn lower_step_rows_are_padded() {
        let k = TowerSpec::new(5)
            .unramified("a", "X^2 - 2")
            .laurent("t")
            .eisenstein("pi", "X^2 - 5*a*t")
            .build()
            .unwrap();
        let pres = build_presentation(&k).unwrap();
        assert_eq!(pres.relations.len(), 2);
        assert!(same(&k, &pres.relations[0], &[el(&k, "2*a"), el(&k, "0"), el(&k, "0")]));
        assert!(same(
            &k,
            &pres.relations[1],
            &[el(&k, "-5*t"), el(&k, "-5*a"), el(&k, "2*pi")]
        ));
    }

    #[test]
    fn window_edge_overflows() {
        let k = TowerSpec::new(3).laurent_window("t", (-2, 2)).build().unwrap();
        let x = k.inverse_unit(1, &el(&k, "t^2")).unwrap();
        assert!(matches!(
            total_derivative(&k, &x),
            Err(Error::WindowOverflow(_))
        ));
    }

    fn small(k: &Tower, c: &[i64], e: &[i64], with_pi: bool) -> Elem {
        let mut x = k.zero(k.top());
        for (j, (&c, &e)) in c.iter().zip(e).enumerate() {
            let txt = if with_pi {
                format!("{c}*pi^{j}*t^{}", e + 3)
            } else {
                format!("{c}*t^{}", e + 3)
            };
            // shifted so the parser only sees nonnegative powers
            let m = k.mul(k.top(), &el(k, &txt), &inv_t3(k)).unwrap();
            x = k.add(k.top(), &x, &m).unwrap();
        }
        x
    }

    fn inv_t3(k: &Tower) -> Elem {
        k.inverse_unit(k.top(), &el(k, "t^3")).unwrap()
    }

    fn coeffs() -> impl Strategy<Value = (Vec<i64>, Vec<i64>)> {
        (
            prop::collection::vec(-9i64..=9, 3),
            prop::collection::vec(-3i64..=3, 3),
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn additive_and_leibniz_without_relations(a in coeffs(), b in coeffs()) {
            let k = TowerSpec::new(5).laurent("t").build().unwrap();
            let top = k.top();
            let (x, y) = (small(&k, &a.0, &a.1, false), small(&k, &b.0, &b.1, false));
            let (dx, dy) = (total_derivative(&k, &x).unwrap(), total_derivative(&k, &y).unwrap());
            let sum = total_derivative(&k, &k.add(top, &x, &y).unwrap()).unwrap();
            prop_assert!(same(&k, &sum, &[k.add(top, &dx[0], &dy[0]).unwrap()]));
            let prod = total_derivative(&k, &k.mul(top, &x, &y).unwrap()).unwrap();
            let want = k.add(top, &k.mul(top, &x, &dy[0]).unwrap(), &k.mul(top, &y, &dx[0]).unwrap()).unwrap();
            prop_assert!(same(&k, &prod, &[want]));
        }

        /// With an algebraic step the Leibniz defect is a multiple of the
        /// relation row, i.e. zero in the module.
        #[test]
        fn leibniz_modulo_relation(a in coeffs(), b in coeffs()) {
            let k = root_pt(3);
            let top = k.top();
            let (x, y) = (small(&k, &a.0, &a.1, true), small(&k, &b.0, &b.1, true));
            let (dx, dy) = (total_derivative(&k, &x).unwrap(), total_derivative(&k, &y).unwrap());
            let sum = total_derivative(&k, &k.add(top, &x, &y).unwrap()).unwrap();
            let want: Vec<Elem> = dx.iter().zip(&dy).map(|(u, v)| k.add(top, u, v).unwrap()).collect();
            prop_assert!(same(&k, &sum, &want));
            let prod = total_derivative(&k, &k.mul(top, &x, &y).unwrap()).unwrap();
            let defect: Vec<Elem> = (0..2).map(|i| {
                let l = k.add(top, &k.mul(top, &x, &dy[i]).unwrap(), &k.mul(top, &y, &dx[i]).unwrap()).unwrap();
                k.sub(top, &prod[i], &l).unwrap()
            }).collect();
            let row = &build_presentation(&k).unwrap().relations[0];
            // 2x2 minor of [defect; row] vanishes
            let minor = k.sub(top,
                &k.mul(top, &defect[0], &row[1]).unwrap(),
                &k.mul(top, &defect[1], &row[0]).unwrap()).unwrap();
            prop_assert!(!k.v(&minor).is_exact());
        }
    }
}
