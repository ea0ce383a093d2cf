//! Poisson brackets of linear densities, the consistency loop, classification,
//! gauge fixing and Dirac brackets.

mod closure;
mod report;

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::frontend::GaugeSpec;
use crate::legendre::{Coord, LegendreError, PhaseDensity, PhaseSpace, QuadHamiltonian};
use crate::symkernel::{hermite_reduce, OpMatrix, OpPoly, OpRat, SymError};

pub use closure::{
    consistency_closure, consistency_closure_with, fix_gauge_multipliers, ClosureOptions,
};
pub use report::{commutator_report, BracketEntry, BracketReport};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum DiracError {
    #[error("consistency loop did not terminate after {iterations} steps (runaway chain {chain})")]
    NonTermination { iterations: usize, chain: String },
    #[error("bracket arguments must be densities over fields and momenta only")]
    CoordinateMismatch,
    #[error("gauge conditions leave {} first-class direction(s): {}", .kernel.len(), .kernel.join("; "))]
    GaugeIncomplete {
        kernel: Vec<String>,
        vectors: Vec<Vec<OpPoly>>,
    },
    #[error("constraint set has not been classified")]
    NotClassified,
    #[error("constraint bracket matrix is singular; first-class constraints remain")]
    SingularMatrix,
    #[error(transparent)]
    Sym(#[from] SymError),
    #[error(transparent)]
    Legendre(#[from] LegendreError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Primary,
    Secondary,
    Gauge,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Provenance::Primary => "primary",
            Provenance::Secondary => "secondary",
            Provenance::Gauge => "gauge",
        };
        write!(f, "{s}")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub label: String,
    pub density: PhaseDensity,
    pub provenance: Provenance,
    /// Index of the constraint whose time derivative produced this one.
    pub parent: Option<usize>,
}

/// What the consistency loop learned about one Lagrange multiplier.
#[derive(Clone, Debug, PartialEq)]
pub enum MultiplierState {
    Free,
    /// Only derivatives of the multiplier appeared; it is taken constant in space.
    SpatiallyConstant {
        source: usize,
    },
    /// `coefficient(D) lambda + rest = 0`, with `coefficient` formally invertible.
    Determined {
        coefficient: OpPoly,
        rest: PhaseDensity,
        source: usize,
    },
    /// The condition could not be split; recorded as found.
    Unresolved {
        condition: PhaseDensity,
        source: usize,
    },
}

impl MultiplierState {
    pub fn is_determined(&self) -> bool {
        matches!(self, MultiplierState::Determined { .. })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintSet {
    pub space: PhaseSpace,
    pub constraints: Vec<Constraint>,
    pub multipliers: Vec<MultiplierState>,
    pub closed: bool,
    pub iterations: usize,
    classification: Option<Classification>,
}

#[derive(Clone, Debug, PartialEq)]
struct Classification {
    delta: OpMatrix<OpPoly>,
    first_class: Vec<Vec<OpPoly>>,
    inverse: Option<OpMatrix<OpRat>>,
    weak_zero: Vec<(usize, usize)>,
}

impl ConstraintSet {
    pub fn new(
        space: PhaseSpace,
        constraints: Vec<Constraint>,
        multipliers: Vec<MultiplierState>,
    ) -> Self {
        ConstraintSet {
            space,
            constraints,
            multipliers,
            closed: false,
            iterations: 0,
            classification: None,
        }
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    pub fn labels(&self) -> Vec<String> {
        self.constraints.iter().map(|c| c.label.clone()).collect()
    }

    pub fn densities(&self) -> Vec<PhaseDensity> {
        self.constraints.iter().map(|c| c.density.clone()).collect()
    }

    pub fn is_classified(&self) -> bool {
        self.classification.is_some()
    }

    pub fn delta(&self) -> Option<&OpMatrix<OpPoly>> {
        self.classification.as_ref().map(|c| &c.delta)
    }

    pub fn delta_inverse(&self) -> Option<&OpMatrix<OpRat>> {
        self.classification
            .as_ref()
            .and_then(|c| c.inverse.as_ref())
    }

    /// Left-kernel vectors of the bracket matrix.
    pub fn first_class_basis(&self) -> &[Vec<OpPoly>] {
        self.classification.as_ref().map_or(&[], |c| &c.first_class)
    }

    /// Entries that are nonzero but vanish on the constraint surface. Brackets
    /// of linear densities are pure kernels, so this is empty for every model
    /// the engine accepts; kept so reports have a stable shape.
    pub fn weak_zero_entries(&self) -> &[(usize, usize)] {
        self.classification.as_ref().map_or(&[], |c| &c.weak_zero)
    }

    pub fn second_class_count(&self) -> usize {
        self.len() - self.first_class_basis().len()
    }

    pub fn is_second_class(&self) -> bool {
        self.is_classified() && self.first_class_basis().is_empty()
    }

    /// Kernel vector as a combination of constraint labels, e.g. `C2 + C3`.
    pub fn render_combination(&self, v: &[OpPoly]) -> String {
        let mut out = String::new();
        for (c, k) in self.constraints.iter().zip(v) {
            for (deg, coeff) in k.coeffs().iter().enumerate() {
                if coeff.is_zero() {
                    continue;
                }
                let mut basis = c.label.clone();
                for _ in 0..deg {
                    basis = format!("dx({basis})");
                }
                crate::symkernel::oppoly::push_term(&mut out, coeff, &basis, "*");
            }
        }
        if out.is_empty() {
            "0".into()
        } else {
            out
        }
    }
}

fn check_canonical(d: &PhaseDensity) -> Result<(), DiracError> {
    if d.is_canonical() {
        Ok(())
    } else {
        Err(DiracError::CoordinateMismatch)
    }
}

/// `{F(y), G(x)}` as a kernel on `delta(y - x)`.
pub fn poisson_bracket(f: &PhaseDensity, g: &PhaseDensity) -> Result<OpPoly, DiracError> {
    check_canonical(f)?;
    check_canonical(g)?;
    let mut out = OpPoly::zero();
    for (c, fc) in f.terms() {
        let (partner, sign) = match c {
            Coord::Field(i) => (Coord::Momentum(*i), 1),
            Coord::Momentum(i) => (Coord::Field(*i), -1),
            _ => unreachable!("checked canonical"),
        };
        let gp = g.coeff(partner);
        if gp.is_zero() {
            continue;
        }
        let t = fc * &gp.adjoint();
        out = if sign > 0 { &out + &t } else { &out - &t };
    }
    Ok(out)
}

/// `{F, H_E}` using the Hamilton equations of `h`.
pub fn bracket_with_hamiltonian(f: &PhaseDensity, h: &QuadHamiltonian) -> PhaseDensity {
    time_derivative(f, &h.equations())
}

pub(crate) fn time_derivative(
    f: &PhaseDensity,
    eqs: &BTreeMap<Coord, PhaseDensity>,
) -> PhaseDensity {
    f.terms().fold(PhaseDensity::zero(), |acc, (c, p)| {
        acc.add(&eqs[c].apply(p))
    })
}

/// Build the bracket matrix, its left kernel, and the inverse when it exists.
pub fn classify(cs: &ConstraintSet) -> Result<ConstraintSet, DiracError> {
    let n = cs.len();
    let mut rows = vec![vec![OpPoly::zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            rows[i][j] = poisson_bracket(&cs.constraints[i].density, &cs.constraints[j].density)?;
        }
    }
    let delta = OpMatrix::square(cs.labels(), rows)?;
    let first_class = delta.left_kernel();
    let inverse = if first_class.is_empty() {
        Some(delta.inverse()?)
    } else {
        None
    };
    let mut out = cs.clone();
    out.classification = Some(Classification {
        delta,
        first_class,
        inverse,
        weak_zero: Vec::new(),
    });
    Ok(out)
}

/// Append gauge conditions and reclassify; fails unless the result is fully
/// second class.
pub fn add_gauge_fixing(cs: &ConstraintSet, g: &GaugeSpec) -> Result<ConstraintSet, DiracError> {
    if g.is_empty() {
        return if cs.is_classified() {
            Ok(cs.clone())
        } else {
            classify(cs)
        };
    }
    let mut out = cs.clone();
    for d in g.densities() {
        check_canonical(d)?;
        let label = format!("C{}", out.constraints.len() + 1);
        out.constraints.push(Constraint {
            label,
            density: d.clone(),
            provenance: Provenance::Gauge,
            parent: None,
        });
    }
    let out = classify(&out)?;
    if !out.first_class_basis().is_empty() {
        let vectors = out.first_class_basis().to_vec();
        return Err(DiracError::GaugeIncomplete {
            kernel: vectors.iter().map(|v| out.render_combination(v)).collect(),
            vectors,
        });
    }
    Ok(out)
}

/// `[u, v]_D = {u, v} - {u, C_s} (Delta^-1)_{s s'} {C_s', v}`.
pub fn dirac_bracket(
    u: &PhaseDensity,
    v: &PhaseDensity,
    cs: &ConstraintSet,
) -> Result<OpRat, DiracError> {
    if !cs.is_classified() {
        return Err(DiracError::NotClassified);
    }
    let inv = cs.delta_inverse().ok_or(DiracError::SingularMatrix)?;
    let mut out = OpRat::from_poly(poisson_bracket(u, v)?);
    let left: Vec<OpRat> = cs
        .constraints
        .iter()
        .map(|c| poisson_bracket(u, &c.density).map(OpRat::from_poly))
        .collect::<Result<_, _>>()?;
    let right: Vec<OpRat> = cs
        .constraints
        .iter()
        .map(|c| poisson_bracket(&c.density, v).map(OpRat::from_poly))
        .collect::<Result<_, _>>()?;
    for (s, l) in left.iter().enumerate() {
        if l.is_zero() {
            continue;
        }
        for (t, r) in right.iter().enumerate() {
            if r.is_zero() || inv.get(s, t).is_zero() {
                continue;
            }
            out = &out - &(&(l * inv.get(s, t)) * r);
        }
    }
    Ok(out)
}

/// Residual of `d` modulo the local module spanned by `constraints`.
pub fn weak_residual(
    d: &PhaseDensity,
    constraints: &[PhaseDensity],
    space: &PhaseSpace,
) -> PhaseDensity {
    let coords = space.canonical_coords();
    let basis: Vec<Vec<OpPoly>> = constraints.iter().map(|c| c.to_vector(&coords)).collect();
    PhaseDensity::from_vector(&coords, &hermite_reduce(&d.to_vector(&coords), &basis))
}

impl ConstraintSet {
    /// Specialize one parameter everywhere; classification is recomputed.
    pub fn substitute(
        &self,
        param: &str,
        value: &BigRational,
    ) -> Result<ConstraintSet, DiracError> {
        let mut out = self.clone();
        for c in &mut out.constraints {
            c.density = c.density.substitute(param, value)?;
        }
        for m in &mut out.multipliers {
            *m = match &*m {
                MultiplierState::Determined {
                    coefficient,
                    rest,
                    source,
                } => MultiplierState::Determined {
                    coefficient: coefficient.substitute(param, value)?,
                    rest: rest.substitute(param, value)?,
                    source: *source,
                },
                MultiplierState::Unresolved { condition, source } => MultiplierState::Unresolved {
                    condition: condition.substitute(param, value)?,
                    source: *source,
                },
                other => other.clone(),
            };
        }
        out.classification = None;
        if self.is_classified() {
            out = classify(&out)?;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{parse_density, parse_model, preset_model, ModelIR};

    fn dens(src: &str, m: &ModelIR, cs: &ConstraintSet) -> PhaseDensity {
        parse_density(src, m.params(), &cs.space).unwrap()
    }

    fn analyzed(name: &str) -> (ModelIR, ConstraintSet) {
        let p = preset_model(name).unwrap();
        let cs = consistency_closure(&p.model).unwrap();
        let cs = match &p.gauge {
            Some(g) => add_gauge_fixing(&cs, g).unwrap(),
            None => classify(&cs).unwrap(),
        };
        (p.model, cs)
    }

    #[test]
    fn canonical_brackets() {
        let phi = PhaseDensity::coord(Coord::Field(0));
        let pi = PhaseDensity::coord(Coord::Momentum(0));
        assert_eq!(poisson_bracket(&phi, &pi).unwrap(), OpPoly::one());
        assert_eq!(poisson_bracket(&pi, &phi).unwrap(), OpPoly::int(-1));
        let dphi = PhaseDensity::term(Coord::Field(0), OpPoly::d());
        assert_eq!(poisson_bracket(&dphi, &pi).unwrap(), OpPoly::d());
        assert_eq!(poisson_bracket(&pi, &dphi).unwrap(), OpPoly::d());
        let lam = PhaseDensity::coord(Coord::Multiplier(0));
        assert_eq!(
            poisson_bracket(&lam, &pi),
            Err(DiracError::CoordinateMismatch)
        );
    }

    #[test]
    fn a1_chain() {
        let (m, cs) = analyzed("jr-a1");
        let expect = [
            ("pi_A0", Provenance::Primary),
            ("dx(pi_A1) + dx(phi) + pi_phi + A1", Provenance::Secondary),
            ("pi_A1", Provenance::Secondary),
            ("-pi_phi - dx(phi) - 2*A1 + A0", Provenance::Secondary),
        ];
        assert_eq!(cs.len(), 4);
        for (c, (src, prov)) in cs.constraints.iter().zip(expect) {
            assert_eq!(c.density, dens(src, &m, &cs), "{}", c.label);
            assert_eq!(c.provenance, prov);
        }
        assert_eq!(cs.constraints[3].parent, Some(2));
        assert!(cs.multipliers[0].is_determined());
        assert!(cs.is_second_class());
    }

    #[test]
    fn wz_first_class() {
        let (_, cs) = analyzed("jr-wz");
        assert_eq!(cs.len(), 4);
        assert_eq!(cs.delta().unwrap().det().unwrap(), OpRat::zero());
        let kernel: Vec<String> = cs
            .first_class_basis()
            .iter()
            .map(|v| cs.render_combination(v))
            .collect();
        assert_eq!(kernel, vec!["C1", "C2 + C3"]);
        assert_eq!(cs.second_class_count(), 2);
        assert!(cs.delta_inverse().is_none());
        assert!(matches!(cs.multipliers[0], MultiplierState::Free));
        assert!(cs.multipliers[1].is_determined());
    }

    #[test]
    fn one_gauge_condition_is_not_enough() {
        let p = preset_model("jr-wz").unwrap();
        let cs = classify(&consistency_closure(&p.model).unwrap()).unwrap();
        let g = GaugeSpec::parse("-dx(theta)", &p.model).unwrap();
        match add_gauge_fixing(&cs, &g) {
            Err(DiracError::GaugeIncomplete { kernel, vectors }) => {
                assert_eq!(kernel.len(), 1);
                assert_eq!(vectors[0].len(), 5);
            }
            other => panic!("expected GaugeIncomplete, got {other:?}"),
        }
    }

    #[test]
    fn gauge_fixed_is_second_class() {
        let (_, cs) = analyzed("jr-wz-gaugefixed");
        assert_eq!(cs.len(), 6);
        assert_eq!(cs.constraints[5].provenance, Provenance::Gauge);
        let det = cs.delta().unwrap().det().unwrap();
        assert_eq!(det, OpRat::from_poly(OpPoly::from_ints(&[0, 0, -1])));
        let inv = cs.delta_inverse().unwrap();
        let prod = cs.delta().unwrap().to_rat().mul(inv).unwrap();
        assert_eq!(prod, OpMatrix::identity(cs.labels()));
    }

    #[test]
    fn constraints_are_dirac_central() {
        for name in ["jr-symbolic", "jr-a1", "jr-wz-gaugefixed"] {
            let (_, cs) = analyzed(name);
            for c in &cs.constraints {
                for z in cs.space.canonical_coords() {
                    let k = dirac_bracket(&c.density, &PhaseDensity::coord(z), &cs).unwrap();
                    assert!(
                        k.is_zero(),
                        "{name}: [{}, {}] = {k}",
                        c.label,
                        cs.space.name(z)
                    );
                }
            }
        }
    }

    #[test]
    fn dirac_bracket_antisymmetric() {
        let (_, cs) = analyzed("jr-wz-gaugefixed");
        let coords = cs.space.canonical_coords();
        for &u in &coords {
            for &v in &coords {
                let uv =
                    dirac_bracket(&PhaseDensity::coord(u), &PhaseDensity::coord(v), &cs).unwrap();
                let vu =
                    dirac_bracket(&PhaseDensity::coord(v), &PhaseDensity::coord(u), &cs).unwrap();
                assert_eq!(uv, -&vu.adjoint());
            }
        }
    }

    #[test]
    fn needs_classification() {
        let p = preset_model("jr-a1").unwrap();
        let cs = consistency_closure(&p.model).unwrap();
        let x = PhaseDensity::coord(Coord::Field(0));
        assert_eq!(dirac_bracket(&x, &x, &cs), Err(DiracError::NotClassified));
        let (_, wz) = analyzed("jr-wz");
        assert_eq!(dirac_bracket(&x, &x, &wz), Err(DiracError::SingularMatrix));
    }

    #[test]
    fn spatially_constant_rule() {
        // The multiplier of pi_u - dx(q) only ever appears as its second derivative.
        let m = parse_model("fields q u; L = 1/2*dt(q)^2 + dt(u)*dx(q);").unwrap();
        let cs = consistency_closure(&m).unwrap();
        assert_eq!(cs.len(), 2);
        assert_eq!(
            cs.constraints[1].density,
            PhaseDensity::term(Coord::Momentum(0), OpPoly::from_ints(&[0, -1]))
        );
        assert!(matches!(
            cs.multipliers[0],
            MultiplierState::SpatiallyConstant { source: 1 }
        ));

        let leg = crate::legendre::legendre(&m).unwrap();
        let off = consistency_closure_with(
            &leg,
            ClosureOptions {
                spatially_constant_rule: false,
            },
        )
        .unwrap();
        assert!(matches!(
            off.multipliers[0],
            MultiplierState::Unresolved { .. }
        ));
    }

    #[test]
    fn weak_residual_of_combination() {
        let (m, cs) = analyzed("jr-a1");
        let combo = dens("pi_A0 + 2*pi_A1 + dx(pi_A1)", &m, &cs);
        assert!(weak_residual(&combo, &cs.densities(), &cs.space).is_zero());
        let free = dens("phi", &m, &cs);
        assert!(!weak_residual(&free, &cs.densities(), &cs.space).is_zero());
    }

    #[test]
    fn substitution_matches_a1() {
        use num_rational::BigRational;
        let (_, sym) = analyzed("jr-symbolic");
        let one = BigRational::from_integer(1.into());
        let s = sym.substitute("e", &one).unwrap();
        // a = 1 makes the bracket matrix singular.
        let s1 = s.substitute("a", &one).unwrap();
        assert!(s1.delta_inverse().is_none());
        assert_eq!(s1.first_class_basis().len(), 2);
    }
}
