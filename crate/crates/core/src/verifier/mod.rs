//! Floating-point cross-checks of the symbolic results: plane-wave residuals,
//! smeared bracket oracles and lattice evolution.

mod ansatz;
mod grid;
mod lattice;
mod oracle;

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::dirac::DiracError;
use crate::frontend::ModelIR;
use crate::symkernel::SymError;

pub use ansatz::{
    ansatz_fields, verify_ansatz, AnsatzFields, AnsatzReport, PlaneWaveConfig, SampleGrid, Wave,
    ANSATZ_TOLERANCE,
};
pub use grid::{spectral_derivative_matrix, TestFunction};
pub use lattice::{
    evolve_lattice, gradient_check, project_constraints, EvolveConfig, EvolveReport, LatticeState,
    LatticeSystem, CONSTRAINT_DRIFT_TOLERANCE, CURRENT_TOLERANCE, ENERGY_DRIFT_TOLERANCE,
    GRADIENT_TOLERANCE, HALVING_FACTOR, INITIAL_CONSTRAINT_TOLERANCE,
};
pub use oracle::{
    delta_oracle, dirac_bracket_oracle, dirac_oracle, smeared_bracket_oracle, OracleComparison,
    OracleConfig, ORACLE_TOLERANCE,
};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum VerifyError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("initial data violates the constraints (max |C| = {max:e})")]
    InitialData { max: f64 },
    #[error("unsupported by the lattice integrator: {0}")]
    Unsupported(String),
    #[error("parameter '{0}' has no numeric value")]
    MissingBinding(String),
    #[error(transparent)]
    Sym(#[from] SymError),
    #[error(transparent)]
    Dirac(#[from] DiracError),
}

/// One line of a verification report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub check: String,
    pub model: String,
    pub params: BTreeMap<String, f64>,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckRecord {
    pub fn new(
        check: impl Into<String>,
        model: impl Into<String>,
        params: BTreeMap<String, f64>,
        value: f64,
        tolerance: f64,
    ) -> Self {
        CheckRecord {
            check: check.into(),
            model: model.into(),
            params,
            value,
            tolerance,
            pass: value.is_finite() && value < tolerance,
        }
    }
}

pub fn all_pass(records: &[CheckRecord]) -> bool {
    records.iter().all(|r| r.pass)
}

/// Numeric parameter values: explicit ones first, then `a = 5/2`, `e = 3/2`
/// and `1` for anything else.
pub fn default_bindings(m: &ModelIR, explicit: &BTreeMap<String, f64>) -> HashMap<String, f64> {
    m.params()
        .iter()
        .map(|p| {
            let v = explicit.get(p).copied().unwrap_or(match p.as_str() {
                "a" => 2.5,
                "e" => 1.5,
                _ => 1.0,
            });
            (p.clone(), v)
        })
        .collect()
}

pub fn sorted_bindings(b: &HashMap<String, f64>) -> BTreeMap<String, f64> {
    b.iter().map(|(k, v)| (k.clone(), *v)).collect()
}
