use std::collections::BTreeMap;

use num_rational::BigRational;

use crate::symkernel::oppoly::push_term;
use crate::symkernel::{OpPoly, ParamRat, SymError};

use super::{Coord, PhaseDensity, PhaseSpace};

/// Accumulates `integral of sum c * u * w` as a bilinear kernel `M` with
/// `integral z_a M_ab(D) z_b`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct QuadForm {
    m: BTreeMap<(Coord, Coord), OpPoly>,
}

impl QuadForm {
    pub fn new() -> Self {
        QuadForm::default()
    }

    /// Add `c * integral u(y) w(y) dy`; derivatives on `u` move onto `w` by parts.
    pub fn add_product(&mut self, c: &ParamRat, u: &PhaseDensity, w: &PhaseDensity) {
        if c.is_zero() {
            return;
        }
        for (cu, pu) in u.terms() {
            for (cw, pw) in w.terms() {
                let k = (&pu.adjoint() * pw).scale(c);
                let e = self.m.entry((*cu, *cw)).or_default();
                *e = &*e + &k;
            }
        }
    }

    /// Self-adjoint kernel `K = M + M^T(-D)`, so that the form is `1/2 z K z`.
    pub fn kernel(&self) -> BTreeMap<(Coord, Coord), OpPoly> {
        let mut k: BTreeMap<(Coord, Coord), OpPoly> = BTreeMap::new();
        for ((a, b), p) in &self.m {
            for (key, q) in [((*a, *b), p.clone()), ((*b, *a), p.adjoint())] {
                let e = k.entry(key).or_default();
                *e = &*e + &q;
            }
        }
        k.retain(|_, p| !p.is_zero());
        k
    }
}

/// `H = integral 1/2 z^T K(D) z` plus multiplier couplings `lambda_a * C_a`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadHamiltonian {
    space: PhaseSpace,
    kernel: BTreeMap<(Coord, Coord), OpPoly>,
    couplings: Vec<PhaseDensity>,
}

impl QuadHamiltonian {
    pub fn new(space: PhaseSpace, form: QuadForm, couplings: Vec<PhaseDensity>) -> Self {
        QuadHamiltonian {
            space,
            kernel: form.kernel(),
            couplings,
        }
    }

    pub fn space(&self) -> &PhaseSpace {
        &self.space
    }

    pub fn couplings(&self) -> &[PhaseDensity] {
        &self.couplings
    }

    pub fn kernel(&self) -> &BTreeMap<(Coord, Coord), OpPoly> {
        &self.kernel
    }

    pub fn kernel_entry(&self, a: Coord, b: Coord) -> OpPoly {
        self.kernel.get(&(a, b)).cloned().unwrap_or_default()
    }

    pub fn kernel_coords(&self) -> impl Iterator<Item = Coord> + '_ {
        self.kernel.keys().flat_map(|(a, b)| [*a, *b])
    }

    /// `K_ab(D) == K_ba(-D)` for all entries.
    pub fn is_self_adjoint(&self) -> bool {
        self.kernel
            .iter()
            .all(|((a, b), p)| self.kernel_entry(*b, *a) == p.adjoint())
    }

    /// `dH/dz_c` for the canonical part only.
    pub fn variation(&self, c: Coord) -> PhaseDensity {
        PhaseDensity::from_terms(
            self.kernel
                .iter()
                .filter(|((a, _), _)| *a == c)
                .map(|((_, b), p)| (*b, p.clone())),
        )
    }

    /// `dH_E/dz_c` including the multiplier couplings.
    pub fn extended_variation(&self, c: Coord) -> PhaseDensity {
        if let Coord::Multiplier(a) = c {
            return self.couplings[a].clone();
        }
        let mut v = self.variation(c);
        for (a, cpl) in self.couplings.iter().enumerate() {
            let k = cpl.coeff(c);
            if !k.is_zero() {
                v.add_term(Coord::Multiplier(a), &k.adjoint());
            }
        }
        v
    }

    /// `dz/dt = {z, H_E}` for every coordinate, multipliers included.
    pub fn equations(&self) -> BTreeMap<Coord, PhaseDensity> {
        let mut out = BTreeMap::new();
        for c in self.space.all_coords() {
            let rhs = match c {
                Coord::Field(i) => self.extended_variation(Coord::Momentum(i)),
                Coord::Momentum(i) => self.extended_variation(Coord::Field(i)).neg(),
                Coord::Multiplier(_) => PhaseDensity::zero(),
                Coord::MultiplierMomentum(a) => self.extended_variation(Coord::Multiplier(a)).neg(),
                Coord::Velocity(_) => continue,
            };
            out.insert(c, rhs);
        }
        out
    }

    pub fn substitute(
        &self,
        param: &str,
        value: &BigRational,
    ) -> Result<QuadHamiltonian, SymError> {
        let mut kernel = BTreeMap::new();
        for (k, p) in &self.kernel {
            let q = p.substitute(param, value)?;
            if !q.is_zero() {
                kernel.insert(*k, q);
            }
        }
        Ok(QuadHamiltonian {
            space: self.space.clone(),
            kernel,
            couplings: self
                .couplings
                .iter()
                .map(|c| c.substitute(param, value))
                .collect::<Result<_, _>>()?,
        })
    }

    /// Density text with odd derivatives moved onto the earlier coordinate,
    /// e.g. `1/2*pi_phi^2 + dx(A0)*pi_A1`.
    pub fn render(&self) -> String {
        let name = |c: Coord, k: usize| {
            let mut s = self.space.name(c);
            for _ in 0..k {
                s = format!("dx({s})");
            }
            s
        };
        let mut out = String::new();
        for ((a, b), p) in &self.kernel {
            if a > b {
                continue;
            }
            for (k, c) in p.coeffs().iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                if a == b {
                    // 1/2 c z D^k z with k even equals 1/2 c (-1)^(k/2) (D^(k/2) z)^2.
                    let j = k / 2;
                    let mut coeff = c * &ParamRat::ratio(1, 2);
                    if j % 2 == 1 {
                        coeff = -&coeff;
                    }
                    push_term(&mut out, &coeff, &format!("{}^2", name(*a, j)), "*");
                } else {
                    let coeff = if k % 2 == 1 { -c } else { c.clone() };
                    push_term(
                        &mut out,
                        &coeff,
                        &format!("{}*{}", name(*a, k), name(*b, 0)),
                        "*",
                    );
                }
            }
        }
        if out.is_empty() {
            out.push('0');
        }
        out
    }
}
