use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::symkernel::oppoly::push_term;
use crate::symkernel::{OpPoly, ParamRat, SymError};

/// A phase-space coordinate. Velocities only appear in momentum definitions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Coord {
    Field(usize),
    Velocity(usize),
    Momentum(usize),
    Multiplier(usize),
    MultiplierMomentum(usize),
}

impl Coord {
    pub fn is_canonical(self) -> bool {
        matches!(self, Coord::Field(_) | Coord::Momentum(_))
    }

    pub fn is_multiplier(self) -> bool {
        matches!(self, Coord::Multiplier(_))
    }
}

/// Names and layout of the phase space of one model.
///
/// Multiplier `a` is named after the field whose velocity it replaces.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseSpace {
    fields: Vec<String>,
    multipliers: Vec<String>,
}

impl PhaseSpace {
    pub fn new(fields: Vec<String>, multipliers: Vec<String>) -> Self {
        PhaseSpace {
            fields,
            multipliers,
        }
    }

    pub fn fields(&self) -> &[String] {
        &self.fields
    }

    pub fn multipliers(&self) -> &[String] {
        &self.multipliers
    }

    pub fn n_fields(&self) -> usize {
        self.fields.len()
    }

    /// Fields then momenta, in declaration order.
    pub fn canonical_coords(&self) -> Vec<Coord> {
        let n = self.fields.len();
        (0..n)
            .map(Coord::Field)
            .chain((0..n).map(Coord::Momentum))
            .collect()
    }

    /// Canonical coordinates followed by multipliers and their momenta.
    pub fn all_coords(&self) -> Vec<Coord> {
        let m = self.multipliers.len();
        let mut v = self.canonical_coords();
        v.extend((0..m).map(Coord::Multiplier));
        v.extend((0..m).map(Coord::MultiplierMomentum));
        v
    }

    pub fn name(&self, c: Coord) -> String {
        match c {
            Coord::Field(i) => self.fields[i].clone(),
            Coord::Velocity(i) => format!("dt({})", self.fields[i]),
            Coord::Momentum(i) => format!("pi_{}", self.fields[i]),
            Coord::Multiplier(a) => format!("lambda_{}", self.multipliers[a]),
            Coord::MultiplierMomentum(a) => format!("p_lambda_{}", self.multipliers[a]),
        }
    }

    /// Inverse of [`PhaseSpace::name`] for plain identifiers.
    pub fn lookup(&self, name: &str) -> Option<Coord> {
        let field = |s: &str| self.fields.iter().position(|f| f == s);
        let mult = |s: &str| self.multipliers.iter().position(|f| f == s);
        if let Some(i) = field(name) {
            return Some(Coord::Field(i));
        }
        if let Some(rest) = name.strip_prefix("pi_") {
            return field(rest).map(Coord::Momentum);
        }
        if let Some(rest) = name.strip_prefix("p_lambda_") {
            return mult(rest).map(Coord::MultiplierMomentum);
        }
        if let Some(rest) = name.strip_prefix("lambda_") {
            return mult(rest).map(Coord::Multiplier);
        }
        None
    }

    /// The canonical partner of a field or momentum.
    pub fn conjugate(c: Coord) -> Option<Coord> {
        match c {
            Coord::Field(i) => Some(Coord::Momentum(i)),
            Coord::Momentum(i) => Some(Coord::Field(i)),
            Coord::Multiplier(a) => Some(Coord::MultiplierMomentum(a)),
            Coord::MultiplierMomentum(a) => Some(Coord::Multiplier(a)),
            Coord::Velocity(_) => None,
        }
    }
}

/// Linear local density `F(y) = sum_i c_i(D) z_i(y)`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct PhaseDensity {
    terms: BTreeMap<Coord, OpPoly>,
}

impl PhaseDensity {
    pub fn zero() -> Self {
        PhaseDensity::default()
    }

    pub fn coord(c: Coord) -> Self {
        PhaseDensity::term(c, OpPoly::one())
    }

    pub fn term(c: Coord, p: OpPoly) -> Self {
        let mut d = PhaseDensity::zero();
        d.add_term(c, &p);
        d
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Coord, OpPoly)>) -> Self {
        let mut d = PhaseDensity::zero();
        for (c, p) in terms {
            d.add_term(c, &p);
        }
        d
    }

    pub fn add_term(&mut self, c: Coord, p: &OpPoly) {
        let sum = &self.coeff(c) + p;
        if sum.is_zero() {
            self.terms.remove(&c);
        } else {
            self.terms.insert(c, sum);
        }
    }

    pub fn coeff(&self, c: Coord) -> OpPoly {
        self.terms.get(&c).cloned().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Coord, &OpPoly)> {
        self.terms.iter()
    }

    pub fn coords(&self) -> impl Iterator<Item = Coord> + '_ {
        self.terms.keys().copied()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, rhs: &PhaseDensity) -> PhaseDensity {
        let mut out = self.clone();
        for (c, p) in &rhs.terms {
            out.add_term(*c, p);
        }
        out
    }

    pub fn sub(&self, rhs: &PhaseDensity) -> PhaseDensity {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> PhaseDensity {
        self.apply(&OpPoly::int(-1))
    }

    pub fn scale(&self, k: &ParamRat) -> PhaseDensity {
        self.apply(&OpPoly::constant(k.clone()))
    }

    /// `p(D) F`: every coefficient multiplied by `p`.
    pub fn apply(&self, p: &OpPoly) -> PhaseDensity {
        PhaseDensity::from_terms(self.terms.iter().map(|(c, q)| (*c, p * q)))
    }

    /// Keep only the terms whose coordinate satisfies `pred`.
    pub fn filter(&self, pred: impl Fn(Coord) -> bool) -> PhaseDensity {
        PhaseDensity {
            terms: self
                .terms
                .iter()
                .filter(|(c, _)| pred(**c))
                .map(|(c, p)| (*c, p.clone()))
                .collect(),
        }
    }

    pub fn is_canonical(&self) -> bool {
        self.terms.keys().all(|c| c.is_canonical())
    }

    pub fn substitute(&self, param: &str, value: &BigRational) -> Result<PhaseDensity, SymError> {
        let mut out = PhaseDensity::zero();
        for (c, p) in &self.terms {
            out.add_term(*c, &p.substitute(param, value)?);
        }
        Ok(out)
    }

    /// Coefficients along `coords`; terms on other coordinates are dropped.
    pub fn to_vector(&self, coords: &[Coord]) -> Vec<OpPoly> {
        coords.iter().map(|c| self.coeff(*c)).collect()
    }

    pub fn from_vector(coords: &[Coord], v: &[OpPoly]) -> PhaseDensity {
        PhaseDensity::from_terms(coords.iter().copied().zip(v.iter().cloned()))
    }

    /// Expression text in the model language, e.g. `dx(pi_A1) + pi_phi + A1`.
    pub fn render(&self, space: &PhaseSpace) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut out = String::new();
        for (c, p) in &self.terms {
            let name = space.name(*c);
            for (k, coeff) in p.coeffs().iter().enumerate() {
                if coeff.is_zero() {
                    continue;
                }
                let mut basis = name.clone();
                for _ in 0..k {
                    basis = format!("dx({basis})");
                }
                push_term(&mut out, coeff, &basis, "*");
            }
        }
        out
    }

    pub fn display<'a>(&'a self, space: &'a PhaseSpace) -> impl fmt::Display + 'a {
        struct Shown<'a>(&'a PhaseDensity, &'a PhaseSpace);
        impl fmt::Display for Shown<'_> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}", self.0.render(self.1))
            }
        }
        Shown(self, space)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space() -> PhaseSpace {
        PhaseSpace::new(vec!["phi".into(), "A0".into()], vec!["A0".into()])
    }

    #[test]
    fn names_round_trip() {
        let s = space();
        for c in s.all_coords() {
            assert_eq!(s.lookup(&s.name(c)), Some(c));
        }
    }

    #[test]
    fn rendering() {
        let s = space();
        let d = PhaseDensity::from_terms([
            (Coord::Momentum(0), OpPoly::one()),
            (Coord::Field(0), OpPoly::from_ints(&[0, -2])),
            (Coord::Field(1), OpPoly::constant(ParamRat::ratio(1, 2))),
        ]);
        assert_eq!(d.render(&s), "-2*dx(phi) + 1/2*A0 + pi_phi");
    }

    #[test]
    fn cancellation_removes_terms() {
        let d = PhaseDensity::coord(Coord::Field(0));
        assert!(d.sub(&d).is_zero());
    }
}
