//! Smith normal form over the valuation ring `O_K`.
//!
//! Rows are relations, columns are generators. Pivots are chosen by minimal
//! certified valuation, so every elimination step divides exactly. Entries
//! whose valuation is only bounded below are never pivots; if one of them
//! could undercut the chosen pivot the computation stops instead of guessing.

use serde::{Deserialize, Serialize};

use crate::differential::{DerivativeVector, Presentation};
use crate::error::{Error, Result};
use crate::padic::Valuation;
use crate::tower::{Elem, Tower};

/// Invariant factors with valuation at or above `cap - MARGIN * e` are refused.
pub const MARGIN: u32 = 8;

pub type Matrix = Vec<Vec<Elem>>;

#[derive(Debug, Clone)]
pub struct SnfResult {
    /// Valuations of the non-unit pivots, nondecreasing.
    pub diag_valuations: Vec<u32>,
    /// Pivots of valuation 0; each kills one generator outright.
    pub unit_pivots: usize,
    pub free_rank: usize,
    /// `u * a * v` is diagonal with entries `diagonal`.
    pub u: Matrix,
    pub v: Matrix,
    pub v_inv: Matrix,
    /// All pivots in order, units included.
    pub diagonal: Vec<Elem>,
    /// Rows of `v_inv` for the non-unit pivots: generators of the cyclic
    /// torsion summands in the original coordinates.
    pub torsion_generators: Vec<DerivativeVector>,
}

impl SnfResult {
    pub fn rank(&self) -> usize {
        self.diagonal.len()
    }

    pub fn structure(&self) -> ModuleStructure {
        ModuleStructure {
            free_rank: self.free_rank,
            diag_valuations: self.diag_valuations.clone(),
            ell: self.diag_valuations.iter().sum(),
        }
    }
}

/// `free_rank` copies of `O_K` plus `O_K/(pi^v)` for each `v`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModuleStructure {
    pub free_rank: usize,
    pub diag_valuations: Vec<u32>,
    /// Length of the torsion part.
    pub ell: u32,
}

pub fn identity(tower: &Tower, n: usize) -> Matrix {
    let top = tower.top();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { tower.one(top) } else { tower.zero(top) })
                .collect()
        })
        .collect()
}

pub fn mat_mul(tower: &Tower, a: &Matrix, b: &Matrix) -> Result<Matrix> {
    let top = tower.top();
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    let mut acc = tower.zero(top);
                    for k in 0..inner {
                        acc = tower.add(top, &acc, &tower.mul(top, &row[k], &b[k][j])?)?;
                    }
                    Ok(acc)
                })
                .collect()
        })
        .collect()
}

/// Determinant by cofactor expansion; the matrices here are tiny.
pub fn determinant(tower: &Tower, a: &Matrix) -> Result<Elem> {
    let top = tower.top();
    match a.len() {
        0 => return Ok(tower.one(top)),
        1 => return Ok(a[0][0].clone()),
        _ => {}
    }
    let mut det = tower.zero(top);
    for (j, pivot) in a[0].iter().enumerate() {
        if pivot.is_structurally_zero() {
            continue;
        }
        let minor: Matrix = a[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|&(c, _)| c != j)
                    .map(|(_, x)| x.clone())
                    .collect()
            })
            .collect();
        let term = tower.mul(top, pivot, &determinant(tower, &minor)?)?;
        det = if j % 2 == 0 {
            tower.add(top, &det, &term)?
        } else {
            tower.sub(top, &det, &term)?
        };
    }
    Ok(det)
}

/// Checks `u * a * v` against the diagonal at working precision.
pub fn verify(tower: &Tower, a: &Matrix, res: &SnfResult) -> Result<bool> {
    let top = tower.top();
    let uav = mat_mul(tower, &mat_mul(tower, &res.u, a)?, &res.v)?;
    for (i, row) in uav.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            let want = match res.diagonal.get(i) {
                Some(d) if i == j => d.clone(),
                _ => tower.zero(top),
            };
            if !tower.eq_at_precision(top, x, &want) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

struct Work<'a> {
    tower: &'a Tower,
    a: Matrix,
    u: Matrix,
    v: Matrix,
    v_inv: Matrix,
}

impl Work<'_> {
    fn swap_rows(&mut self, i: usize, k: usize) {
        self.a.swap(i, k);
        self.u.swap(i, k);
    }

    fn swap_cols(&mut self, j: usize, k: usize) {
        for row in self.a.iter_mut().chain(self.v.iter_mut()) {
            row.swap(j, k);
        }
        self.v_inv.swap(j, k);
    }

    /// `row_i -= q * row_k`
    fn row_op(&mut self, i: usize, k: usize, q: &Elem) -> Result<()> {
        let top = self.tower.top();
        for m in [&mut self.a, &mut self.u] {
            for c in 0..m[i].len() {
                let d = self.tower.mul(top, q, &m[k][c])?;
                m[i][c] = self.tower.sub(top, &m[i][c], &d)?;
            }
        }
        Ok(())
    }

    /// `col_j -= q * col_k`, keeping `v_inv` in step.
    fn col_op(&mut self, j: usize, k: usize, q: &Elem) -> Result<()> {
        let top = self.tower.top();
        for m in [&mut self.a, &mut self.v] {
            for row in m.iter_mut() {
                let d = self.tower.mul(top, q, &row[k])?;
                row[j] = self.tower.sub(top, &row[j], &d)?;
            }
        }
        for c in 0..self.v_inv[k].len() {
            let d = self.tower.mul(top, q, &self.v_inv[j][c])?;
            self.v_inv[k][c] = self.tower.add(top, &self.v_inv[k][c], &d)?;
        }
        Ok(())
    }

    /// Position of the next pivot in the minor starting at `k`, or `None`
    /// when the minor is empty.
    fn pivot(&self, k: usize) -> Result<Option<(usize, usize, u32)>> {
        let top = self.tower.top();
        let rows = self.a.len();
        let cols = self.a.first().map_or(0, Vec::len);
        if k >= rows || k >= cols {
            return Ok(None);
        }
        let mut best: Option<(usize, usize, u32)> = None;
        let mut bound = u32::MAX;
        for i in k..rows {
            for j in k..cols {
                match self.tower.valuation(top, &self.a[i][j]) {
                    Valuation::Exact(w) if best.is_none_or(|(_, _, b)| w < b) => {
                        best = Some((i, j, w))
                    }
                    Valuation::Exact(_) => {}
                    Valuation::AtLeast(b) => bound = bound.min(b),
                }
            }
        }
        match best {
            None => Err(Error::PrecisionExhausted(format!(
                "the remaining {}x{} block is indistinguishable from zero",
                rows - k,
                cols - k
            ))),
            Some((_, _, w)) if w > bound => Err(Error::PrecisionExhausted(format!(
                "an entry known only to valuation >= {bound} might undercut pivot valuation {w}"
            ))),
            found => Ok(found),
        }
    }
}

/// Smith form of a `rows x cols` matrix; `cols` is explicit so that a
/// presentation without relations still has its generators.
pub fn smith_normal_form(tower: &Tower, a: &Matrix, cols: usize) -> Result<SnfResult> {
    let top = tower.top();
    let rows = a.len();
    if a.iter().any(|r| r.len() != cols) {
        return Err(Error::Config("ragged relation matrix".into()));
    }
    for x in a.iter().flatten() {
        if tower.valuation(top, x).lower_bound() == 0 && !tower.valuation(top, x).is_exact() {
            return Err(Error::PrecisionExhausted(
                "integrality of a matrix entry is undecidable".into(),
            ));
        }
    }
    let mut w = Work {
        tower,
        a: a.clone(),
        u: identity(tower, rows),
        v: identity(tower, cols),
        v_inv: identity(tower, cols),
    };
    let mut diagonal = Vec::new();
    let mut k = 0;
    while let Some((pi, pj, _)) = w.pivot(k)? {
        w.swap_rows(k, pi);
        w.swap_cols(k, pj);
        let pivot = w.a[k][k].clone();
        for i in k + 1..rows {
            if !w.a[i][k].is_structurally_zero() {
                let q = tower.div_exact(top, &w.a[i][k], &pivot)?;
                w.row_op(i, k, &q)?;
            }
        }
        for j in k + 1..cols {
            if !w.a[k][j].is_structurally_zero() {
                let q = tower.div_exact(top, &w.a[k][j], &pivot)?;
                w.col_op(j, k, &q)?;
            }
        }
        diagonal.push(pivot);
        k += 1;
    }

    let e = tower.ramification_index();
    let limit = tower.cap(top).saturating_sub(MARGIN * e);
    let mut diag_valuations = Vec::new();
    let mut torsion_generators = Vec::new();
    let mut unit_pivots = 0;
    for (i, d) in diagonal.iter().enumerate() {
        let Valuation::Exact(v) = tower.valuation(top, d) else {
            unreachable!("pivots have certified valuations")
        };
        if v >= limit {
            return Err(Error::PrecisionExhausted(format!(
                "invariant factor of valuation {v} is within the safety margin of the \
                 working precision (limit {limit})"
            )));
        }
        if v == 0 {
            unit_pivots += 1;
        } else {
            diag_valuations.push(v);
            torsion_generators.push(w.v_inv[i].clone());
        }
    }
    Ok(SnfResult {
        diag_valuations,
        unit_pivots,
        free_rank: cols - diagonal.len(),
        u: w.u,
        v: w.v,
        v_inv: w.v_inv,
        diagonal,
        torsion_generators,
    })
}

/// Free rank, invariant factors and torsion length of a presented module.
pub fn module_structure(tower: &Tower, pres: &Presentation) -> Result<ModuleStructure> {
    Ok(smith_normal_form(tower, &pres.relations, pres.columns())?.structure())
}
