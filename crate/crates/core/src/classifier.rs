//! Type I / type II: does the residue map kill the torsion of the
//! differential module?
//!
//! The residue map sends `dt_i` to `dt̄_i` and kills `d` of algebraic
//! generators (Eisenstein generators reduce to zero, unramified ones to
//! separable elements). Since the `dt̄_i` form a basis of the residue
//! differentials, a form maps to zero exactly when every Laurent coordinate
//! lies in the maximal ideal.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::differential::{build_presentation, render_form, GenLabel, Presentation};
use crate::error::{Error, InStage, Result, Stage, StageError};
use crate::padic::Valuation;
use crate::smith::{smith_normal_form, SnfResult};
use crate::tower::{Elem, Residue, Tower};

/// Image `Σ c̄_i dt̄_i` of a differential in the residue field's differentials.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidueForm {
    /// Nonzero coefficients only, keyed by Laurent variable.
    pub coefficients: BTreeMap<String, Residue>,
}

impl ResidueForm {
    pub fn is_zero(&self) -> bool {
        self.coefficients.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TypeKind {
    #[serde(rename = "I")]
    TypeI,
    #[serde(rename = "II")]
    TypeII,
}

impl fmt::Display for TypeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TypeKind::TypeI => "type I",
            TypeKind::TypeII => "type II",
        })
    }
}

/// A torsion generator with nonzero residue image.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Witness {
    pub generator: String,
    /// `v` of the cyclic summand `O_K/(pi^v)` the generator spans.
    pub torsion_valuation: u32,
    pub image: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TypeVerdict {
    pub kind: TypeKind,
    pub witness: Option<Witness>,
}

impl fmt::Display for TypeVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind)?;
        if let Some(w) = &self.witness {
            write!(f, "; witness: {} ↦ {} ≠ 0", w.generator, w.image)?;
        }
        Ok(())
    }
}

/// Reduces the Laurent coordinates of `g` modulo the maximal ideal.
pub fn residue_map(tower: &Tower, labels: &[GenLabel], g: &[Elem]) -> Result<ResidueForm> {
    let top = tower.top();
    let mut coefficients = BTreeMap::new();
    for (label, c) in labels.iter().zip(g) {
        if !label.is_laurent() {
            continue;
        }
        match tower.valuation(top, c) {
            Valuation::Exact(0) => {
                coefficients.insert(label.var().to_string(), tower.residue(top, c)?);
            }
            Valuation::AtLeast(0) => {
                return Err(Error::PrecisionExhausted(format!(
                    "cannot decide whether the d{} coefficient lies in the maximal ideal",
                    label.var()
                )))
            }
            _ => {}
        }
    }
    Ok(ResidueForm { coefficients })
}

pub fn render_residue_form(tower: &Tower, form: &ResidueForm) -> String {
    if form.is_zero() {
        return "0".into();
    }
    let terms: Vec<String> = form
        .coefficients
        .iter()
        .map(|(var, c)| {
            let d = format!("d{var}\u{0304}");
            let coef = tower.render_residue(tower.top(), c);
            if c.is_one() {
                d
            } else if coef.contains(' ') {
                format!("({coef})*{d}")
            } else {
                format!("{coef}*{d}")
            }
        })
        .collect();
    terms.join(" + ")
}

/// Everything computed on the way to a verdict.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub presentation: Presentation,
    pub snf: SnfResult,
    pub verdict: TypeVerdict,
    /// Index into `snf.torsion_generators` of the witness, if any.
    pub witness_index: Option<usize>,
}

/// Decides the type from a computed Smith form.
pub fn verdict_from(
    tower: &Tower,
    pres: &Presentation,
    snf: &SnfResult,
) -> Result<(TypeVerdict, Option<usize>)> {
    for (i, g) in snf.torsion_generators.iter().enumerate() {
        let form = residue_map(tower, &pres.generator_labels, g)?;
        if !form.is_zero() {
            // shown modulo pi^v: the summand is O_K/(pi^v), and a full
            // expansion of a quotient by a non-monomial unit is unreadable
            let v = snf.diag_valuations[i];
            let shown: Vec<Elem> = g
                .iter()
                .map(|c| tower.truncate(tower.top(), c, v).0)
                .collect();
            let witness = Witness {
                generator: pretty(&render_form(tower, &pres.generator_labels, &shown)),
                torsion_valuation: v,
                image: pretty(&render_residue_form(tower, &form)),
            };
            let verdict = TypeVerdict {
                kind: TypeKind::TypeII,
                witness: Some(witness),
            };
            return Ok((verdict, Some(i)));
        }
    }
    let verdict = TypeVerdict {
        kind: TypeKind::TypeI,
        witness: None,
    };
    Ok((verdict, None))
}

/// Presentation, Smith form and verdict, with errors tagged by stage.
pub fn analyze(tower: &Tower) -> std::result::Result<Analysis, StageError> {
    let presentation = build_presentation(tower).in_stage(Stage::Differential)?;
    let snf = smith_normal_form(tower, &presentation.relations, presentation.columns())
        .in_stage(Stage::Smith)?;
    let (verdict, witness_index) =
        verdict_from(tower, &presentation, &snf).in_stage(Stage::Classifier)?;
    Ok(Analysis {
        presentation,
        snf,
        verdict,
        witness_index,
    })
}

pub fn classify(tower: &Tower) -> Result<TypeVerdict> {
    analyze(tower).map(|a| a.verdict).map_err(|e| e.error)
}

/// Typographic form of a rendered expression: `pi` becomes `π`, exponents
/// become superscripts, `*` becomes `·` and minus signs become `−`.
pub fn pretty(s: &str) -> String {
    const SUP: [char; 10] = ['⁰', '¹', '²', '³', '⁴', '⁵', '⁶', '⁷', '⁸', '⁹'];
    let mut out = String::with_capacity(s.len());
    let chars: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            out.push_str(match word.as_str() {
                "pi" => "π",
                "dpi" => "dπ",
                w => w,
            });
            continue;
        }
        match c {
            '^' => {
                i += 1;
                if chars.get(i) == Some(&'-') {
                    out.push('⁻');
                    i += 1;
                }
                while let Some(d) = chars.get(i).and_then(|c| c.to_digit(10)) {
                    out.push(SUP[d as usize]);
                    i += 1;
                }
                continue;
            }
            '*' => out.push('·'),
            '-' => out.push('−'),
            c => out.push(c),
        }
        i += 1;
    }
    out
}
