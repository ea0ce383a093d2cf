//! Model language, validated model representation, and the built-in presets.

mod eval;
mod gauge;
mod parse;
mod presets;

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::symkernel::expr::{Pos, SyntaxError};
use crate::symkernel::{ParamRat, SymError};

pub use gauge::{parse_density, GaugeSpec};
pub use parse::{parse_model, print_model};
pub use presets::{preset_model, Preset, PRESET_NAMES};

/// Which of `f`, `dt(f)`, `dx(f)` a symbol stands for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Slot {
    Value,
    Time,
    Space,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Sym {
    pub field: usize,
    pub slot: Slot,
}

impl Sym {
    pub fn value(field: usize) -> Self {
        Sym {
            field,
            slot: Slot::Value,
        }
    }
    pub fn dt(field: usize) -> Self {
        Sym {
            field,
            slot: Slot::Time,
        }
    }
    pub fn dx(field: usize) -> Self {
        Sym {
            field,
            slot: Slot::Space,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SemanticKind {
    NonQuadratic,
    Linear,
    Constant,
    SecondDerivative,
    Undeclared,
    Duplicate,
    InvalidDerivative,
    NonParameterDivisor,
    DivisionByZero,
    UnknownFunction,
    MissingLagrangian,
    NonLinearDensity,
    TimeDerivative,
}

impl fmt::Display for SemanticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SemanticKind::NonQuadratic => "non-quadratic",
            SemanticKind::Linear => "linear",
            SemanticKind::Constant => "constant",
            SemanticKind::SecondDerivative => "second derivative",
            SemanticKind::Undeclared => "undeclared name",
            SemanticKind::Duplicate => "duplicate declaration",
            SemanticKind::InvalidDerivative => "derivative of a non-linear expression",
            SemanticKind::NonParameterDivisor => "non-parameter divisor",
            SemanticKind::DivisionByZero => "division by zero",
            SemanticKind::UnknownFunction => "unknown function",
            SemanticKind::MissingLagrangian => "missing lagrangian",
            SemanticKind::NonLinearDensity => "non-linear",
            SemanticKind::TimeDerivative => "time derivative",
        };
        write!(f, "{s}")
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("semantic error at {pos}: {kind} term '{term}'")]
    Semantic {
        pos: Pos,
        kind: SemanticKind,
        term: String,
    },
    #[error("unknown preset '{0}'")]
    UnknownPreset(String),
    #[error(transparent)]
    Sym(#[from] SymError),
}

impl ModelError {
    pub(crate) fn semantic(pos: Pos, kind: SemanticKind, term: impl Into<String>) -> Self {
        ModelError::Semantic {
            pos,
            kind,
            term: term.into(),
        }
    }

    pub fn kind(&self) -> Option<SemanticKind> {
        match self {
            ModelError::Semantic { kind, .. } => Some(*kind),
            _ => None,
        }
    }
}

/// A quadratic Lagrangian density in fields and their first derivatives.
///
/// `lagrangian[(s, t)]` with `s <= t` is the coefficient of the monomial `s*t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelIR {
    params: Vec<String>,
    fields: Vec<String>,
    lagrangian: BTreeMap<(Sym, Sym), ParamRat>,
}

impl ModelIR {
    /// Assemble a model, dropping zero coefficients and ordering keys.
    pub fn new(
        params: Vec<String>,
        fields: Vec<String>,
        terms: impl IntoIterator<Item = ((Sym, Sym), ParamRat)>,
    ) -> Self {
        let mut lagrangian: BTreeMap<(Sym, Sym), ParamRat> = BTreeMap::new();
        for ((s, t), c) in terms {
            let key = if s <= t { (s, t) } else { (t, s) };
            let sum = &lagrangian.get(&key).cloned().unwrap_or_default() + &c;
            if sum.is_zero() {
                lagrangian.remove(&key);
            } else {
                lagrangian.insert(key, sum);
            }
        }
        ModelIR {
            params,
            fields,
            lagrangian,
        }
    }

    pub fn params(&self) -> &[String] {
        &self.params
    }

    pub fn fields(&self) -> &[String] {
        &self.fields
    }

    pub fn n_fields(&self) -> usize {
        self.fields.len()
    }

    pub fn field_index(&self, name: &str) -> Option<usize> {
        self.fields.iter().position(|f| f == name)
    }

    pub fn lagrangian(&self) -> &BTreeMap<(Sym, Sym), ParamRat> {
        &self.lagrangian
    }

    pub fn coeff(&self, s: Sym, t: Sym) -> ParamRat {
        let key = if s <= t { (s, t) } else { (t, s) };
        self.lagrangian.get(&key).cloned().unwrap_or_default()
    }

    pub fn sym_name(&self, s: Sym) -> String {
        let f = &self.fields[s.field];
        match s.slot {
            Slot::Value => f.clone(),
            Slot::Time => format!("dt({f})"),
            Slot::Space => format!("dx({f})"),
        }
    }

    /// Specialize one parameter; it is removed from the parameter list.
    pub fn substitute(&self, param: &str, value: &BigRational) -> Result<ModelIR, SymError> {
        let terms = self
            .lagrangian
            .iter()
            .map(|(k, c)| Ok((*k, c.substitute(param, value)?)))
            .collect::<Result<Vec<_>, SymError>>()?;
        Ok(ModelIR::new(
            self.params
                .iter()
                .filter(|p| *p != param)
                .cloned()
                .collect(),
            self.fields.clone(),
            terms,
        ))
    }
}

impl fmt::Display for ModelIR {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", print_model(self))
    }
}
