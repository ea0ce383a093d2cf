use crate::frontend::ModelIR;
use crate::legendre::{legendre, Coord, Legendre, PhaseDensity};
use crate::symkernel::hermite::reduce_with;
use crate::symkernel::{hermite_form, OpPoly};

use super::{time_derivative, Constraint, ConstraintSet, DiracError, MultiplierState, Provenance};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ClosureOptions {
    /// Treat a multiplier that only appears differentiated as constant in space.
    pub spatially_constant_rule: bool,
}

impl Default for ClosureOptions {
    fn default() -> Self {
        ClosureOptions {
            spatially_constant_rule: true,
        }
    }
}

pub fn consistency_closure(m: &ModelIR) -> Result<ConstraintSet, DiracError> {
    consistency_closure_with(&legendre(m)?, ClosureOptions::default())
}

/// Replace `v(D) lambda_a` by `-q(D) rest` wherever `lambda_a` is determined by
/// `u lambda_a + rest = 0` and `v = q u`.
fn substitute_determined(expr: &PhaseDensity, states: &[MultiplierState]) -> PhaseDensity {
    let mut out = expr.clone();
    for (a, st) in states.iter().enumerate() {
        let MultiplierState::Determined {
            coefficient, rest, ..
        } = st
        else {
            continue;
        };
        let v = out.coeff(Coord::Multiplier(a));
        if v.is_zero() {
            continue;
        }
        if let Some(q) = v.div_exact(coefficient) {
            out = out
                .sub(&PhaseDensity::term(Coord::Multiplier(a), v))
                .sub(&rest.apply(&q));
        }
    }
    out
}

fn chain(constraints: &[Constraint], mut idx: usize) -> String {
    let mut labels = vec![constraints[idx].label.clone()];
    while let Some(p) = constraints[idx].parent {
        labels.push(constraints[p].label.clone());
        idx = p;
    }
    labels.reverse();
    labels.join(" -> ")
}

/// Depth-first consistency loop.
///
/// Each constraint's chain is followed to its end before the next primary is
/// examined. New constraints are the phase-space part of the time derivative
/// as found, without rescaling.
pub fn consistency_closure_with(
    leg: &Legendre,
    opts: ClosureOptions,
) -> Result<ConstraintSet, DiracError> {
    let space = leg.space.clone();
    let coords = space.canonical_coords();
    let eqs = leg.hamiltonian.equations();
    let mut constraints: Vec<Constraint> = leg
        .primaries
        .iter()
        .enumerate()
        .map(|(i, d)| Constraint {
            label: format!("C{}", i + 1),
            density: d.clone(),
            provenance: Provenance::Primary,
            parent: None,
        })
        .collect();
    let mut states = vec![MultiplierState::Free; leg.primaries.len()];
    let mut stack: Vec<usize> = (0..constraints.len()).rev().collect();
    let bound = 4 * coords.len();
    let mut iterations = 0;

    while let Some(idx) = stack.pop() {
        iterations += 1;
        if iterations > bound {
            return Err(DiracError::NonTermination {
                iterations: bound,
                chain: chain(&constraints, idx),
            });
        }
        let mut expr =
            substitute_determined(&time_derivative(&constraints[idx].density, &eqs), &states);

        let mut stop = false;
        let mult_terms: Vec<(usize, OpPoly)> = expr
            .terms()
            .filter_map(|(c, p)| match c {
                Coord::Multiplier(a) => Some((*a, p.clone())),
                _ => None,
            })
            .collect();
        for (a, u) in mult_terms {
            let only_derivatives = u.constant_term().is_zero();
            match &states[a] {
                MultiplierState::Free | MultiplierState::SpatiallyConstant { .. }
                    if !only_derivatives =>
                {
                    let rest = expr.sub(&PhaseDensity::term(Coord::Multiplier(a), u.clone()));
                    states[a] = MultiplierState::Determined {
                        coefficient: u,
                        rest,
                        source: idx,
                    };
                    stop = true;
                }
                MultiplierState::SpatiallyConstant { .. } => {
                    expr = expr.filter(|c| c != Coord::Multiplier(a));
                }
                MultiplierState::Free if opts.spatially_constant_rule => {
                    states[a] = MultiplierState::SpatiallyConstant { source: idx };
                    expr = expr.filter(|c| c != Coord::Multiplier(a));
                }
                // A determined multiplier whose coefficient did not divide out.
                MultiplierState::Determined { .. } | MultiplierState::Unresolved { .. } => {
                    stop = true
                }
                MultiplierState::Free => {
                    states[a] = MultiplierState::Unresolved {
                        condition: expr.clone(),
                        source: idx,
                    };
                    stop = true;
                }
            }
            if stop {
                break;
            }
        }
        if stop {
            continue;
        }

        let basis: Vec<Vec<OpPoly>> = constraints
            .iter()
            .map(|c| c.density.to_vector(&coords))
            .collect();
        let residual = reduce_with(&expr.to_vector(&coords), &hermite_form(&basis));
        if residual.iter().all(OpPoly::is_zero) {
            continue;
        }
        constraints.push(Constraint {
            label: format!("C{}", constraints.len() + 1),
            density: expr,
            provenance: Provenance::Secondary,
            parent: Some(idx),
        });
        stack.push(constraints.len() - 1);
    }

    let mut cs = ConstraintSet::new(space, constraints, states);
    cs.closed = true;
    cs.iterations = iterations;
    Ok(cs)
}

/// Multipliers the consistency loop left free or constant, now fixed by
/// requiring each gauge condition to be preserved in time.
pub fn fix_gauge_multipliers(leg: &Legendre, cs: &ConstraintSet) -> ConstraintSet {
    let eqs = leg.hamiltonian.equations();
    let mut out = cs.clone();
    for (idx, c) in cs.constraints.iter().enumerate() {
        if c.provenance != Provenance::Gauge {
            continue;
        }
        let expr = substitute_determined(&time_derivative(&c.density, &eqs), &out.multipliers);
        let pick = expr.terms().find_map(|(coord, p)| match coord {
            Coord::Multiplier(a)
                if matches!(
                    out.multipliers[*a],
                    MultiplierState::Free | MultiplierState::SpatiallyConstant { .. }
                ) && !p.constant_term().is_zero() =>
            {
                Some((*a, p.clone()))
            }
            _ => None,
        });
        if let Some((a, u)) = pick {
            let rest = expr.sub(&PhaseDensity::term(Coord::Multiplier(a), u.clone()));
            out.multipliers[a] = MultiplierState::Determined {
                coefficient: u,
                rest,
                source: idx,
            };
        }
    }
    out
}
