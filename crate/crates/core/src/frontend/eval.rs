//! Expansion of parsed expressions into polynomials over model symbols.

use std::collections::BTreeMap;

use crate::symkernel::expr::{Expr, ExprKind, Pos};
use crate::symkernel::ParamRat;

use super::{ModelError, SemanticKind};

/// Sum of monomials in symbols `S` with parameter coefficients. Keys are
/// sorted symbol lists, so `x*y` and `y*x` share a key.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Poly<S: Ord> {
    pub terms: BTreeMap<Vec<S>, ParamRat>,
}

impl<S: Ord + Clone> Poly<S> {
    pub fn zero() -> Self {
        Poly {
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: ParamRat) -> Self {
        let mut p = Poly::zero();
        p.add_term(Vec::new(), c);
        p
    }

    pub fn symbol(s: S) -> Self {
        let mut p = Poly::zero();
        p.add_term(vec![s], ParamRat::one());
        p
    }

    pub fn add_term(&mut self, mut key: Vec<S>, c: ParamRat) {
        key.sort();
        let sum = &self.terms.get(&key).cloned().unwrap_or_default() + &c;
        if sum.is_zero() {
            self.terms.remove(&key);
        } else {
            self.terms.insert(key, sum);
        }
    }

    pub fn add(&self, rhs: &Poly<S>) -> Poly<S> {
        let mut out = self.clone();
        for (k, c) in &rhs.terms {
            out.add_term(k.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, k: &ParamRat) -> Poly<S> {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c * k);
        }
        out
    }

    pub fn mul(&self, rhs: &Poly<S>) -> Poly<S> {
        let mut out = Poly::zero();
        for (a, ca) in &self.terms {
            for (b, cb) in &rhs.terms {
                let mut key = a.clone();
                key.extend(b.iter().cloned());
                out.add_term(key, ca * cb);
            }
        }
        out
    }

    /// `Some(c)` if the polynomial has no symbols.
    pub fn as_constant(&self) -> Option<ParamRat> {
        match self.terms.len() {
            0 => Some(ParamRat::zero()),
            1 => self.terms.get(&Vec::new()).cloned(),
            _ => None,
        }
    }
}

/// Name resolution and derivative rules for one expression language.
pub(crate) trait Atoms {
    type Sym: Ord + Clone;
    fn ident(&self, name: &str, pos: Pos) -> Result<Poly<Self::Sym>, ModelError>;
    fn call(
        &self,
        func: &str,
        arg: Poly<Self::Sym>,
        pos: Pos,
    ) -> Result<Poly<Self::Sym>, ModelError>;
    fn term_text(&self, key: &[Self::Sym]) -> String;
}

pub(crate) fn expand<A: Atoms>(atoms: &A, e: &Expr) -> Result<Poly<A::Sym>, ModelError> {
    Ok(match &e.kind {
        ExprKind::Num(n) => Poly::constant(ParamRat::from_rational(n.clone())),
        ExprKind::Ident(name) => atoms.ident(name, e.pos)?,
        ExprKind::Call(f, arg) => {
            let inner = expand(atoms, arg)?;
            atoms.call(f, inner, e.pos)?
        }
        ExprKind::Neg(x) => expand(atoms, x)?.scale(&ParamRat::int(-1)),
        ExprKind::Add(a, b) => expand(atoms, a)?.add(&expand(atoms, b)?),
        ExprKind::Sub(a, b) => expand(atoms, a)?.add(&expand(atoms, b)?.scale(&ParamRat::int(-1))),
        ExprKind::Mul(a, b) => expand(atoms, a)?.mul(&expand(atoms, b)?),
        ExprKind::Div(a, b) => {
            let num = expand(atoms, a)?;
            let den = expand(atoms, b)?;
            let Some(c) = den.as_constant() else {
                return Err(ModelError::semantic(
                    b.pos,
                    SemanticKind::NonParameterDivisor,
                    "divisor",
                ));
            };
            let inv = c.recip().map_err(|_| {
                ModelError::semantic(b.pos, SemanticKind::DivisionByZero, "divisor")
            })?;
            num.scale(&inv)
        }
        ExprKind::Pow(base, n) => {
            let b = expand(atoms, base)?;
            (0..*n).fold(Poly::constant(ParamRat::one()), |acc, _| acc.mul(&b))
        }
    })
}
