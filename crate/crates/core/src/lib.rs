//! Exact computations for complete discrete valuation fields of mixed
//! characteristic `(0, p)` presented as towers over `Q_p`: the completed
//! differential module of the ring of integers, its torsion length, the
//! type I / type II classification, and the resulting filtration and
//! cyclic-extension thresholds.

pub mod classifier;
pub mod cli;
pub mod differential;
pub mod error;
pub mod padic;
pub mod report;
pub mod smith;
pub mod tower;

pub use error::{Error, Result, Stage, StageError};
pub use padic::{PAdicInt, Valuation};
pub use tower::{Elem, Tower, TowerSpec};
