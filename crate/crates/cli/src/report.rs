use std::collections::BTreeMap;
use std::fmt::Write;

use dirac_engine::dirac::{commutator_report, ConstraintSet, MultiplierState};
use dirac_engine::legendre::Legendre;
use dirac_engine::symkernel::{Entry, OpMatrix};
use serde::{Deserialize, Serialize};

pub const SCHEMA: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Momentum {
    pub name: String,
    pub definition: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstraintEntry {
    pub label: String,
    pub density: String,
    pub provenance: String,
    pub parent: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiplierEntry {
    pub name: String,
    pub state: String,
    /// Which constraint's time derivative fixed the state.
    pub source: Option<String>,
    /// For a determined multiplier: `coefficient * lambda = -(rest)`.
    pub relation: Option<String>,
}

/// A matrix of kernels as display strings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixView {
    pub labels: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl MatrixView {
    pub fn of<T: Entry>(m: &OpMatrix<T>) -> MatrixView {
        MatrixView {
            labels: m.row_labels().to_vec(),
            rows: (0..m.rows())
                .map(|i| m.row(i).iter().map(|e| e.to_string()).collect())
                .collect(),
        }
    }

    fn render(&self, out: &mut String, indent: &str) {
        let width = self
            .rows
            .iter()
            .flatten()
            .chain(&self.labels)
            .map(|s| s.chars().count())
            .max()
            .unwrap_or(1);
        let lw = self.labels.iter().map(|s| s.len()).max().unwrap_or(1);
        let _ = write!(out, "{indent}{:lw$}", "");
        for l in &self.labels {
            let _ = write!(out, "  {l:>width$}");
        }
        out.push('\n');
        for (l, row) in self.labels.iter().zip(&self.rows) {
            let _ = write!(out, "{indent}{l:lw$}");
            for e in row {
                let _ = write!(out, "  {e:>width$}");
            }
            out.push('\n');
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub delta: MatrixView,
    pub determinant: String,
    pub second_class: usize,
    /// Left-kernel vectors written as constraint combinations.
    pub first_class: Vec<String>,
    pub delta_inverse: Option<MatrixView>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Commutator {
    pub left: String,
    pub right: String,
    pub kernel: String,
    pub text: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema: u32,
    pub model: String,
    pub params: Vec<String>,
    pub bindings: BTreeMap<String, String>,
    pub fields: Vec<String>,
    pub momenta: Vec<Momentum>,
    pub hamiltonian: String,
    pub constraints: Vec<ConstraintEntry>,
    pub multipliers: Vec<MultiplierEntry>,
    pub gauge_conditions: Vec<String>,
    pub classification: Option<Classification>,
    /// Present only when every constraint is second class.
    pub commutators: Option<Vec<Commutator>>,
}

impl AnalysisReport {
    pub fn build(
        model: &str,
        params: Vec<String>,
        bindings: BTreeMap<String, String>,
        leg: &Legendre,
        cs: &ConstraintSet,
        gauge_sources: &[String],
    ) -> Result<AnalysisReport, dirac_engine::dirac::DiracError> {
        let space = &leg.space;
        let labels = cs.labels();
        let momenta = leg
            .momenta
            .iter()
            .enumerate()
            .map(|(i, d)| Momentum {
                name: format!("pi_{}", space.fields()[i]),
                definition: d.render(space),
            })
            .collect();
        let constraints = cs
            .constraints
            .iter()
            .map(|c| ConstraintEntry {
                label: c.label.clone(),
                density: c.density.render(space),
                provenance: c.provenance.to_string(),
                parent: c.parent.map(|p| labels[p].clone()),
            })
            .collect();
        let multipliers = cs
            .multipliers
            .iter()
            .enumerate()
            .map(|(a, st)| {
                let name = format!("lambda_{}", space.multipliers()[a]);
                let (state, source, relation) = match st {
                    MultiplierState::Free => ("free", None, None),
                    MultiplierState::SpatiallyConstant { source } => {
                        ("spatially-constant", Some(*source), None)
                    }
                    MultiplierState::Determined {
                        coefficient,
                        rest,
                        source,
                    } => (
                        "determined",
                        Some(*source),
                        Some(if coefficient.as_constant().is_some_and(|c| c.is_one()) {
                            format!("{name} = -({})", rest.render(space))
                        } else {
                            format!("({coefficient}) {name} = -({})", rest.render(space))
                        }),
                    ),
                    MultiplierState::Unresolved { condition, source } => (
                        "unresolved",
                        Some(*source),
                        Some(format!("{} = 0", condition.render(space))),
                    ),
                };
                MultiplierEntry {
                    name,
                    state: state.into(),
                    source: source.map(|s| labels[s].clone()),
                    relation,
                }
            })
            .collect();
        let classification = cs.delta().map(
            |d| -> Result<Classification, dirac_engine::dirac::DiracError> {
                Ok(Classification {
                    delta: MatrixView::of(d),
                    determinant: d.det()?.to_string(),
                    second_class: cs.second_class_count(),
                    first_class: cs
                        .first_class_basis()
                        .iter()
                        .map(|v| cs.render_combination(v))
                        .collect(),
                    delta_inverse: cs.delta_inverse().map(MatrixView::of),
                })
            },
        );
        let classification = classification.transpose()?;
        let commutators = if cs.delta_inverse().is_some() {
            Some(
                commutator_report(cs)?
                    .entries
                    .iter()
                    .map(|e| Commutator {
                        left: e.left.clone(),
                        right: e.right.clone(),
                        kernel: e.kernel.kernel_text(),
                        text: e.commutator_text(),
                    })
                    .collect(),
            )
        } else {
            None
        };
        Ok(AnalysisReport {
            schema: SCHEMA,
            model: model.to_string(),
            params,
            bindings,
            fields: space.fields().to_vec(),
            momenta,
            hamiltonian: leg.hamiltonian.render(),
            constraints,
            multipliers,
            gauge_conditions: gauge_sources.to_vec(),
            classification,
            commutators,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "model: {}", self.model);
        if !self.params.is_empty() {
            let _ = writeln!(out, "parameters: {}", self.params.join(" "));
        }
        for (k, v) in &self.bindings {
            let _ = writeln!(out, "  {k} = {v}");
        }
        let _ = writeln!(out, "fields: {}", self.fields.join(" "));
        out.push_str("\nmomenta:\n");
        for m in &self.momenta {
            let _ = writeln!(out, "  {} = {}", m.name, m.definition);
        }
        let _ = writeln!(out, "\nhamiltonian density:\n  {}", self.hamiltonian);
        out.push_str("\nconstraints:\n");
        for c in &self.constraints {
            let from = c
                .parent
                .as_ref()
                .map(|p| format!(" from {p}"))
                .unwrap_or_default();
            let _ = writeln!(
                out,
                "  {} [{}{}] = {}",
                c.label, c.provenance, from, c.density
            );
        }
        if !self.multipliers.is_empty() {
            out.push_str("\nmultipliers:\n");
            for m in &self.multipliers {
                let src = m
                    .source
                    .as_ref()
                    .map(|s| format!(" (from {s})"))
                    .unwrap_or_default();
                let _ = write!(out, "  {}: {}{}", m.name, m.state, src);
                if let Some(r) = &m.relation {
                    let _ = write!(out, "; {r}");
                }
                out.push('\n');
            }
        }
        if let Some(c) = &self.classification {
            out.push_str("\nbracket matrix:\n");
            c.delta.render(&mut out, "  ");
            let _ = writeln!(out, "  determinant: {}", c.determinant);
            let _ = writeln!(out, "  second class: {}", c.second_class);
            if c.first_class.is_empty() {
                out.push_str("  first class: none\n");
            } else {
                let _ = writeln!(out, "  first class: {}", c.first_class.join("; "));
            }
            if let Some(inv) = &c.delta_inverse {
                out.push_str("\ninverse bracket matrix:\n");
                inv.render(&mut out, "  ");
            }
        }
        if let Some(cs) = &self.commutators {
            out.push_str("\ncommutators:\n");
            for c in cs {
                let _ = writeln!(out, "  {}", c.text);
            }
        }
        out
    }
}
