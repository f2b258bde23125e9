//! Quantitative consequences of `(p, e, ell, type)`: surjectivity and
//! filtration thresholds for the Milnor K-groups, non-existence exponents for
//! cyclic extensions, Miki's criterion, and the graded pieces of `K_2` for the
//! family `pi^p = p t`.
//!
//! Nothing here does group arithmetic; the statements are imported facts
//! parameterized by the computed invariants.

use std::fmt::{self, Write as _};

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::classifier::{analyze, pretty, TypeKind, TypeVerdict};
use crate::error::{Error, InStage, Result, Stage, StageError};
use crate::smith::ModuleStructure;
use crate::tower::{LayerKind, Tower};

pub const SHARPNESS_CAVEAT: &str = "threshold sufficient, not claimed sharp";

pub const GR_INDEX_NOTE: &str =
    "the source table switches between the index names m and i; both are read as m";

/// Nonnegative rational in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rational {
    pub num: u64,
    pub den: u64,
}

impl Rational {
    pub fn new(num: u64, den: u64) -> Self {
        let g = num.gcd(&den).max(1);
        Rational {
            num: num / g,
            den: den / g,
        }
    }

    pub fn ceil(self) -> u64 {
        self.num.div_ceil(self.den)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RhoSource {
    #[serde(rename = "Ω_F^{q−1}")]
    QMinusOne,
    #[serde(rename = "Ω_F^{q−2}")]
    QMinusTwo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FiltrationStatement {
    UmEqualsVm,
    VmEqualsUmPlus1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CyclicKind {
    FerociouslyRamified,
    TotallyRamified,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    /// Milnor degree the statements are rendered for.
    pub q: u32,
    /// `ell + delta + 2e/(p-1)` with `delta = 1` for type I, `0` for type II.
    pub bound: Rational,
    pub rho_surjectivity_m0: u64,
    pub rho_source: RhoSource,
    pub rho_statement: String,
    pub filtration_statement: FiltrationStatement,
    pub filtration_text: String,
    pub filtration_caveat: String,
    pub cyclic_exponent_i0: u64,
    pub cyclic_kind: CyclicKind,
    pub cyclic_statement: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MikiCheck {
    pub applies: bool,
    pub statement: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RefinementKind {
    NoCyclicDegreeP3,
    MikiConstant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Refinement {
    pub kind: RefinementKind,
    pub statement: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GrStructure {
    #[serde(rename = "K2F_plus_Fstar")]
    K2FPlusFStar,
    #[serde(rename = "Omega1_F")]
    Omega1F,
    /// The paper names only "a certain quotient"; deliberately unresolved.
    #[serde(rename = "QuotientOf_Omega1F_mod_dF_plus_F")]
    QuotientOfOmega1FModDFPlusF,
    Zero,
    #[serde(rename = "F_mod_Fp")]
    FModFp,
    #[serde(rename = "F_pow_p_n_minus_2")]
    FPowPNMinus2,
}

impl GrStructure {
    fn text(self, n: Option<u32>) -> String {
        match self {
            GrStructure::K2FPlusFStar => "K₂(F) ⊕ F^*".into(),
            GrStructure::Omega1F => "Ω¹_F".into(),
            GrStructure::QuotientOfOmega1FModDFPlusF => {
                "a quotient of Ω¹_F/dF ⊕ F (unresolved)".into()
            }
            GrStructure::Zero => "0".into(),
            GrStructure::FModFp => "F/F^p".into(),
            GrStructure::FPowPNMinus2 => {
                format!("F^{{p^{{n−2}}}} with n = {}", n.unwrap_or_default())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrEntry {
    pub m: u32,
    pub structure: GrStructure,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub n: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub annotation: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrTable {
    pub p: u64,
    pub entries: Vec<GrEntry>,
    pub index_note: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldReport {
    pub p: u64,
    pub e: u32,
    pub ell: u32,
    #[serde(rename = "type")]
    pub verdict: TypeVerdict,
    pub omega: ModuleStructure,
    pub thresholds: Thresholds,
    pub miki: MikiCheck,
    pub refinements: Vec<Refinement>,
    pub gr_table: Option<GrTable>,
}

fn omega_power(q: u32, shift: u32) -> String {
    match q.checked_sub(shift) {
        Some(d) => format!("Ω_F^{d}"),
        None => "0".into(),
    }
}

/// Thresholds from the surjectivity theorem, its corollary, and the
/// cyclic-extension theorem. The rational bound is kept next to its ceiling,
/// the least integer satisfying the inequality.
pub fn theorem_bounds(p: u64, e: u32, ell: u32, kind: TypeKind, q: u32) -> Thresholds {
    let delta = u64::from(kind == TypeKind::TypeI);
    let den = p - 1;
    let bound = Rational::new((u64::from(ell) + delta) * den + 2 * u64::from(e), den);
    let m0 = bound.ceil();
    match kind {
        TypeKind::TypeI => Thresholds {
            q,
            bound,
            rho_surjectivity_m0: m0,
            rho_source: RhoSource::QMinusOne,
            rho_statement: format!(
                "ρ_m restricted to {} maps onto gr_m K_{q}(K) for every m ≥ {m0}",
                omega_power(q, 1)
            ),
            filtration_statement: FiltrationStatement::UmEqualsVm,
            filtration_text: format!("U_m K_{q}(K) = V_m K_{q}(K) for every m ≥ {m0}"),
            filtration_caveat: SHARPNESS_CAVEAT.into(),
            cyclic_exponent_i0: m0,
            cyclic_kind: CyclicKind::FerociouslyRamified,
            cyclic_statement: format!(
                "K has no ferociously ramified cyclic extension of degree p^i for i ≥ {m0}"
            ),
        },
        TypeKind::TypeII => Thresholds {
            q,
            bound,
            rho_surjectivity_m0: m0,
            rho_source: RhoSource::QMinusTwo,
            rho_statement: if q >= 2 {
                format!(
                    "ρ_m restricted to {} maps onto gr_m K_{q}(K) for every m ≥ {m0}",
                    omega_power(q, 2)
                )
            } else {
                format!("no surjectivity statement for q = {q}: the type II case needs q ≥ 2")
            },
            filtration_statement: FiltrationStatement::VmEqualsUmPlus1,
            filtration_text: format!("V_m K_{q}(K) = U_{{m+1}} K_{q}(K) for every m ≥ {m0}"),
            filtration_caveat: SHARPNESS_CAVEAT.into(),
            cyclic_exponent_i0: m0,
            cyclic_kind: CyclicKind::TotallyRamified,
            cyclic_statement: format!(
                "K has no totally ramified cyclic extension of degree p^i for i ≥ {m0}"
            ),
        },
    }
}

pub fn miki_check(p: u64, e: u32) -> MikiCheck {
    let applies = u64::from(e) < p - 1;
    let statement = if applies {
        format!(
            "e = {e} < p − 1 = {}: every cyclic extension of K has a separable residue field extension (Miki)",
            p - 1
        )
    } else {
        format!("e = {e} ≥ p − 1 = {}: Miki's criterion does not apply", p - 1)
    };
    MikiCheck { applies, statement }
}

/// True for `Q_p{{t}}(pi)` with `pi^p = p t`: one Laurent step followed by
/// one Eisenstein step with minimal polynomial exactly `X^p - p t`.
pub fn is_root_pt_family(tower: &Tower) -> bool {
    let [laurent, eis] = tower.layers() else {
        return false;
    };
    let LayerKind::Eisenstein { min_poly } = &eis.kind else {
        return false;
    };
    if !laurent.is_laurent() || min_poly.len() as u64 != tower.prime() {
        return false;
    }
    let Ok(t) = tower.generator(1) else {
        return false;
    };
    let Ok(pt) = tower.mul_int(1, &t, -(tower.prime() as i64)) else {
        return false;
    };
    tower.eq_at_precision(1, &min_poly[0], &pt)
        && min_poly[1..]
            .iter()
            .all(|c| tower.eq_at_precision(1, c, &tower.zero(1)))
}

pub fn known_refinements(tower: &Tower) -> Vec<Refinement> {
    let mut out = Vec::new();
    if tower.prime() > 2 && is_root_pt_family(tower) {
        out.push(Refinement {
            kind: RefinementKind::NoCyclicDegreeP3,
            statement: format!(
                "K = Q_{p}{{{{t}}}}(π) with π^{p} = {p}t has no cyclic extension of degree {p}³",
                p = tower.prime()
            ),
        });
    }
    out.push(Refinement {
        kind: RefinementKind::MikiConstant,
        statement: "there is a constant c, depending only on K, such that K has no \
                    ferociously ramified cyclic extension of degree p^i for i > c (Miki)"
            .into(),
    });
    out
}

/// The piecewise description of `gr_m K_2(K)` for the family `pi^p = p t`.
pub fn gr_k2_entries(p: u64, m_max: u32) -> Vec<GrEntry> {
    let p32 = p as u32;
    (0..=m_max)
        .map(|m| {
            let (structure, n, annotation) = if m == 0 {
                (GrStructure::K2FPlusFStar, None, None)
            } else if m < p32 || m == p32 + 1 {
                (GrStructure::Omega1F, None, None)
            } else if m == p32 {
                (GrStructure::QuotientOfOmega1FModDFPlusF, None, None)
            } else if m % p32 != 0 {
                (GrStructure::Zero, None, None)
            } else if m == 2 * p32 {
                (
                    GrStructure::FModFp,
                    None,
                    Some("x ↦ {1 + pπ^p x, π}".to_string()),
                )
            } else {
                (
                    GrStructure::FPowPNMinus2,
                    Some(m / p32),
                    Some("x ↦ {1 + p^n x, π}".to_string()),
                )
            };
            GrEntry {
                m,
                structure,
                n,
                annotation,
            }
        })
        .collect()
}

pub fn gr_k2_table(tower: &Tower, m_max: u32) -> Result<GrTable> {
    if !is_root_pt_family(tower) {
        return Err(Error::FamilyMismatch(
            "the graded table is known only for Q_p{{t}}(π) with π^p = p·t".into(),
        ));
    }
    if tower.prime() <= 2 {
        return Err(Error::PLeTwo);
    }
    Ok(GrTable {
        p: tower.prime(),
        entries: gr_k2_entries(tower.prime(), m_max),
        index_note: GR_INDEX_NOTE.into(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReportOptions {
    pub q: u32,
    /// Defaults to `3p + 1`.
    pub m_max: Option<u32>,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions { q: 2, m_max: None }
    }
}

pub fn full_report(tower: &Tower, opts: ReportOptions) -> std::result::Result<FieldReport, StageError> {
    let p = tower.prime();
    let e = tower.ramification_index();
    let analysis = analyze(tower)?;
    let omega = analysis.snf.structure();
    let thresholds = theorem_bounds(p, e, omega.ell, analysis.verdict.kind, opts.q);
    let m_max = opts.m_max.unwrap_or(3 * p as u32 + 1);
    let gr_table = match gr_k2_table(tower, m_max) {
        Ok(t) => Some(t),
        Err(Error::FamilyMismatch(_) | Error::PLeTwo) => None,
        Err(err) => return Err::<FieldReport, _>(err).in_stage(Stage::Report),
    };
    Ok(FieldReport {
        p,
        e,
        ell: omega.ell,
        verdict: analysis.verdict,
        omega,
        thresholds,
        miki: miki_check(p, e),
        refinements: known_refinements(tower),
        gr_table,
    })
}

/// `free rank 1; torsion O/(π³); ℓ = 3`
pub fn render_omega(m: &ModuleStructure) -> String {
    let torsion = if m.diag_valuations.is_empty() {
        "0".to_string()
    } else {
        m.diag_valuations
            .iter()
            .map(|v| pretty(&format!("O/(π^{v})")))
            .collect::<Vec<_>>()
            .join(" ⊕ ")
    };
    format!("free rank {}; torsion {torsion}; ℓ = {}", m.free_rank, m.ell)
}

pub fn render_gr_entry(e: &GrEntry) -> String {
    let mut s = format!("m = {}: {}", e.m, e.structure.text(e.n));
    if let Some(a) = &e.annotation {
        let _ = write!(s, "  [{a}]");
    }
    s
}

pub fn render_gr_table(t: &GrTable) -> String {
    let mut s = format!("gr_m K_2(K) for p = {}:\n", t.p);
    for e in &t.entries {
        let _ = writeln!(s, "  {}", render_gr_entry(e));
    }
    let _ = writeln!(s, "  note: {}", t.index_note);
    s
}

pub fn render_text(r: &FieldReport) -> String {
    let t = &r.thresholds;
    let delta = if r.verdict.kind == TypeKind::TypeI { " + 1" } else { "" };
    let mut s = String::new();
    let _ = writeln!(s, "p = {}, e = {}, ℓ = {}", r.p, r.e, r.ell);
    let _ = writeln!(s, "Ω̂¹: {}", render_omega(&r.omega));
    let _ = writeln!(s, "{}", r.verdict);
    let _ = writeln!(
        s,
        "threshold ℓ{delta} + 2e/(p−1) = {} → {} (q = {})",
        t.bound, t.rho_surjectivity_m0, t.q
    );
    let _ = writeln!(s, "  {}", t.rho_statement);
    let _ = writeln!(s, "  {} ({})", t.filtration_text, t.filtration_caveat);
    let _ = writeln!(s, "  {}", t.cyclic_statement);
    let _ = writeln!(s, "{}", r.miki.statement);
    for f in &r.refinements {
        let _ = writeln!(s, "known: {}", f.statement);
    }
    if let Some(g) = &r.gr_table {
        s.push_str(&render_gr_table(g));
    }
    s
}

#[cfg(test)]
mod tests;
