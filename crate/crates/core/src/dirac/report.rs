use serde::{Deserialize, Serialize};

use crate::legendre::PhaseDensity;
use crate::symkernel::OpRat;

use super::{dirac_bracket, ConstraintSet, DiracError};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BracketEntry {
    pub left: String,
    pub right: String,
    pub kernel: OpRat,
}

impl BracketEntry {
    /// `[A0(y), A1(x)] = i (...) d_y delta(y-x)`; the `i` is a formal tag.
    pub fn commutator_text(&self) -> String {
        format!(
            "[{}(y), {}(x)] = i * ({})",
            self.left,
            self.right,
            self.kernel.kernel_text()
        )
    }
}

/// Nonvanishing Dirac brackets among canonical coordinates, one entry per
/// unordered pair (the swapped pair is `-k(-D)`).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BracketReport {
    pub entries: Vec<BracketEntry>,
}

impl BracketReport {
    pub fn get(&self, left: &str, right: &str) -> Option<OpRat> {
        self.entries.iter().find_map(|e| {
            if e.left == left && e.right == right {
                Some(e.kernel.clone())
            } else if e.left == right && e.right == left {
                Some(-&e.kernel.adjoint())
            } else {
                None
            }
        })
    }

    /// Kernel of `[left, right]`, zero when the pair is absent.
    pub fn kernel(&self, left: &str, right: &str) -> OpRat {
        self.get(left, right).unwrap_or_else(OpRat::zero)
    }
}

pub fn commutator_report(cs: &ConstraintSet) -> Result<BracketReport, DiracError> {
    let coords = cs.space.canonical_coords();
    let mut entries = Vec::new();
    for (i, &u) in coords.iter().enumerate() {
        for &v in &coords[i..] {
            let k = dirac_bracket(&PhaseDensity::coord(u), &PhaseDensity::coord(v), cs)?;
            if !k.is_zero() {
                entries.push(BracketEntry {
                    left: cs.space.name(u),
                    right: cs.space.name(v),
                    kernel: k,
                });
            }
        }
    }
    Ok(BracketReport { entries })
}
