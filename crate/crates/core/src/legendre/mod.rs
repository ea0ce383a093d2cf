//! Momenta, primary constraints, and the Hamiltonian of a quadratic model.

mod hamiltonian;
mod phase;

use crate::frontend::{ModelIR, Slot, Sym};
use crate::symkernel::{OpPoly, ParamRat};

pub use hamiltonian::{QuadForm, QuadHamiltonian};
pub use phase::{Coord, PhaseDensity, PhaseSpace};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum LegendreError {
    #[error("internal error: {0}")]
    Internal(String),
}

/// `f`, `dx(f)` or `dt(f)` as a density over fields and velocities.
fn sym_density(s: Sym) -> PhaseDensity {
    match s.slot {
        Slot::Value => PhaseDensity::coord(Coord::Field(s.field)),
        Slot::Space => PhaseDensity::term(Coord::Field(s.field), OpPoly::d()),
        Slot::Time => PhaseDensity::coord(Coord::Velocity(s.field)),
    }
}

/// `pi_i = dL/d(dt f_i)` for every field, in fields and velocities.
pub fn compute_momenta(m: &ModelIR) -> Vec<PhaseDensity> {
    (0..m.n_fields())
        .map(|i| {
            let v = Sym::dt(i);
            let mut p = PhaseDensity::zero();
            for ((s, t), c) in m.lagrangian() {
                if *s == v && *t == v {
                    p = p.add(&sym_density(v).scale(&(c + c)));
                } else if *s == v {
                    p = p.add(&sym_density(*t).scale(c));
                } else if *t == v {
                    p = p.add(&sym_density(*s).scale(c));
                }
            }
            p
        })
        .collect()
}

/// Reduced row echelon form over the parameter field; returns pivot columns.
fn rref(a: &mut [Vec<ParamRat>]) -> Vec<usize> {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(p, r);
        let inv = a[r][c].recip().expect("pivot is nonzero");
        for k in 0..cols {
            a[r][k] = &a[r][k] * &inv;
        }
        for i in 0..rows {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for k in 0..cols {
                    let t = &f * &a[r][k];
                    a[i][k] = &a[i][k] - &t;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

fn invert(a: &[Vec<ParamRat>]) -> Vec<Vec<ParamRat>> {
    let n = a.len();
    let mut aug: Vec<Vec<ParamRat>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| {
                if i == j {
                    ParamRat::one()
                } else {
                    ParamRat::zero()
                }
            }));
            r
        })
        .collect();
    let piv = rref(&mut aug);
    assert_eq!(
        piv,
        (0..n).collect::<Vec<_>>(),
        "velocity block is invertible"
    );
    aug.into_iter().map(|r| r[n..].to_vec()).collect()
}

/// Everything the Legendre transform produces for one model.
#[derive(Clone, Debug, PartialEq)]
pub struct Legendre {
    pub space: PhaseSpace,
    /// Momentum definitions over fields and velocities.
    pub momenta: Vec<PhaseDensity>,
    /// One per null direction of the velocity Hessian, attached to multiplier `a`.
    pub primaries: Vec<PhaseDensity>,
    pub hamiltonian: QuadHamiltonian,
    /// Velocities that could not be solved for (set to zero in the Hamiltonian).
    pub null_velocities: Vec<usize>,
}

/// Velocity Hessian `W_ij = d^2 L / d(dt f_i) d(dt f_j)`.
pub fn velocity_hessian(m: &ModelIR, momenta: &[PhaseDensity]) -> Vec<Vec<ParamRat>> {
    let n = m.n_fields();
    momenta
        .iter()
        .map(|p| {
            (0..n)
                .map(|j| {
                    p.coeff(Coord::Velocity(j))
                        .as_constant()
                        .expect("velocities carry no derivatives")
                })
                .collect()
        })
        .collect()
}

pub fn legendre(m: &ModelIR) -> Result<Legendre, LegendreError> {
    let n = m.n_fields();
    let momenta = compute_momenta(m);
    let w = velocity_hessian(m, &momenta);
    let mut red = w.clone();
    let pivots = rref(&mut red);
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();

    let config = |p: &PhaseDensity| p.filter(|c| !matches!(c, Coord::Velocity(_)));

    // Primary constraints: sum_i n_i (pi_i - b_i) for each null vector n.
    let mut primaries = Vec::new();
    for &j in &free {
        let mut nv = vec![ParamRat::zero(); n];
        nv[j] = ParamRat::one();
        for (r, &pc) in pivots.iter().enumerate() {
            nv[pc] = -&red[r][j];
        }
        let mut c = PhaseDensity::zero();
        for (i, ni) in nv.iter().enumerate() {
            if ni.is_zero() {
                continue;
            }
            let u = PhaseDensity::coord(Coord::Momentum(i)).sub(&config(&momenta[i]));
            c = c.add(&u.scale(ni));
        }
        primaries.push(c);
    }

    // H = 1/2 (pi_S - b_S)^T W_SS^{-1} (pi_S - b_S) - V with null velocities at zero.
    let wss: Vec<Vec<ParamRat>> = pivots
        .iter()
        .map(|&i| pivots.iter().map(|&j| w[i][j].clone()).collect())
        .collect();
    let winv = invert(&wss);
    let u: Vec<PhaseDensity> = pivots
        .iter()
        .map(|&i| PhaseDensity::coord(Coord::Momentum(i)).sub(&config(&momenta[i])))
        .collect();
    let mut form = QuadForm::new();
    let half = ParamRat::ratio(1, 2);
    for (a, ua) in u.iter().enumerate() {
        for (b, ub) in u.iter().enumerate() {
            form.add_product(&(&half * &winv[a][b]), ua, ub);
        }
    }
    for ((s, t), c) in m.lagrangian() {
        if s.slot != Slot::Time && t.slot != Slot::Time {
            form.add_product(&-c, &sym_density(*s), &sym_density(*t));
        }
    }
    let space = PhaseSpace::new(
        m.fields().to_vec(),
        free.iter().map(|&j| m.fields()[j].clone()).collect(),
    );
    let hamiltonian = QuadHamiltonian::new(space.clone(), form, primaries.clone());
    if hamiltonian.kernel_coords().any(|c| !c.is_canonical()) {
        return Err(LegendreError::Internal(
            "a velocity survived elimination".into(),
        ));
    }
    Ok(Legendre {
        space,
        momenta,
        primaries,
        hamiltonian,
        null_velocities: free,
    })
}

pub fn primary_constraints(m: &ModelIR) -> Result<Vec<PhaseDensity>, LegendreError> {
    Ok(legendre(m)?.primaries)
}

pub fn canonical_hamiltonian(m: &ModelIR) -> Result<QuadHamiltonian, LegendreError> {
    Ok(legendre(m)?.hamiltonian)
}

pub fn hamilton_equations(h: &QuadHamiltonian) -> std::collections::BTreeMap<Coord, PhaseDensity> {
    h.equations()
}
