//! Sparse multivariate polynomials over the rationals.
//!
//! Variables are identified by name. Monomials are ordered lexicographically
//! with alphabetical variable priority, which is a proper monomial order, so
//! the usual leading-term division algorithm works for exact division.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// A power product such as `a^2*e`. Stored sorted by variable name with
/// strictly positive exponents.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Monomial(Vec<(String, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(name: &str) -> Self {
        Monomial(vec![(name.to_string(), 1)])
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn exponent(&self, var: &str) -> u32 {
        self.0
            .iter()
            .find(|(v, _)| v == var)
            .map(|(_, e)| *e)
            .unwrap_or(0)
    }

    pub fn vars(&self) -> impl Iterator<Item = &(String, u32)> {
        self.0.iter()
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    fn from_map(map: BTreeMap<String, u32>) -> Self {
        Monomial(map.into_iter().filter(|(_, e)| *e > 0).collect())
    }

    fn to_map(&self) -> BTreeMap<String, u32> {
        self.0.iter().cloned().collect()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut m = self.to_map();
        for (v, e) in &other.0 {
            *m.entry(v.clone()).or_insert(0) += e;
        }
        Monomial::from_map(m)
    }

    /// `self / other` if `other` divides `self`.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        let mut m = self.to_map();
        for (v, e) in &other.0 {
            let slot = m.get_mut(v)?;
            if *slot < *e {
                return None;
            }
            *slot -= e;
        }
        Some(Monomial::from_map(m))
    }

    /// Componentwise minimum (monomial gcd).
    pub fn gcd(&self, other: &Monomial) -> Monomial {
        let om = other.to_map();
        Monomial::from_map(
            self.0
                .iter()
                .filter_map(|(v, e)| om.get(v).map(|f| (v.clone(), (*e).min(*f))))
                .collect(),
        )
    }

    fn without(&self, var: &str) -> Monomial {
        Monomial(self.0.iter().filter(|(v, _)| v != var).cloned().collect())
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        let (mut i, mut j) = (0, 0);
        loop {
            match (self.0.get(i), other.0.get(j)) {
                (None, None) => return Ordering::Equal,
                (Some(_), None) => return Ordering::Greater,
                (None, Some(_)) => return Ordering::Less,
                (Some((va, ea)), Some((vb, eb))) => match va.cmp(vb) {
                    Ordering::Equal => match ea.cmp(eb) {
                        Ordering::Equal => {
                            i += 1;
                            j += 1;
                        }
                        o => return o,
                    },
                    // `va` is absent from `other`, so `self` has the larger exponent there.
                    Ordering::Less => return Ordering::Greater,
                    Ordering::Greater => return Ordering::Less,
                },
            }
        }
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (v, e) in &self.0 {
            if !first {
                write!(f, "*")?;
            }
            first = false;
            if *e == 1 {
                write!(f, "{v}")?;
            } else {
                write!(f, "{v}^{e}")?;
            }
        }
        if first {
            write!(f, "1")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct MPoly {
    terms: BTreeMap<Monomial, BigRational>,
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl MPoly {
    pub fn zero() -> Self {
        MPoly::default()
    }

    pub fn one() -> Self {
        MPoly::constant(rat(1))
    }

    pub fn constant(c: BigRational) -> Self {
        let mut p = MPoly::zero();
        if !c.is_zero() {
            p.terms.insert(Monomial::one(), c);
        }
        p
    }

    pub fn var(name: &str) -> Self {
        MPoly::monomial(Monomial::var(name), rat(1))
    }

    pub fn monomial(m: Monomial, c: BigRational) -> Self {
        let mut p = MPoly::zero();
        if !c.is_zero() {
            p.terms.insert(m, c);
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// The constant value, if the polynomial has no variables.
    pub fn as_constant(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => self.terms.get(&Monomial::one()).cloned(),
            _ => None,
        }
    }

    pub fn vars(&self) -> BTreeSet<String> {
        self.terms
            .keys()
            .flat_map(|m| m.0.iter().map(|(v, _)| v.clone()))
            .collect()
    }

    /// Leading term under the lex order.
    pub fn lead(&self) -> Option<(&Monomial, &BigRational)> {
        self.terms.iter().next_back()
    }

    pub fn leading_coeff(&self) -> BigRational {
        self.lead()
            .map(|(_, c)| c.clone())
            .unwrap_or_else(BigRational::zero)
    }

    pub fn degree_in(&self, var: &str) -> u32 {
        self.terms
            .keys()
            .map(|m| m.exponent(var))
            .max()
            .unwrap_or(0)
    }

    fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                *existing += c;
                if existing.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn add(&self, other: &MPoly) -> MPoly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &MPoly) -> MPoly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }

    pub fn neg(&self) -> MPoly {
        MPoly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), -c.clone()))
                .collect(),
        }
    }

    pub fn scale(&self, k: &BigRational) -> MPoly {
        if k.is_zero() {
            return MPoly::zero();
        }
        MPoly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect(),
        }
    }

    pub fn mul(&self, other: &MPoly) -> MPoly {
        let mut out = MPoly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> MPoly {
        let mut out = MPoly::one();
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    fn mul_term(&self, m: &Monomial, c: &BigRational) -> MPoly {
        MPoly {
            terms: self
                .terms
                .iter()
                .map(|(mm, cc)| (mm.mul(m), cc * c))
                .collect(),
        }
    }

    /// Exact quotient `self / divisor`, or `None` when the division leaves a remainder.
    pub fn div_exact(&self, divisor: &MPoly) -> Option<MPoly> {
        let (dm, dc) = divisor.lead()?;
        let (dm, dc) = (dm.clone(), dc.clone());
        let mut rem = self.clone();
        let mut quot = MPoly::zero();
        while let Some((rm, rc)) = rem.lead() {
            let tm = rm.div(&dm)?;
            let tc = rc / &dc;
            rem = rem.sub(&divisor.mul_term(&tm, &tc));
            quot.add_term(tm, tc);
        }
        Some(quot)
    }

    /// Coefficients with respect to `var`, indexed by degree.
    pub fn to_univariate(&self, var: &str) -> Vec<MPoly> {
        let deg = self.degree_in(var) as usize;
        let mut out = vec![MPoly::zero(); if self.is_zero() { 0 } else { deg + 1 }];
        for (m, c) in &self.terms {
            out[m.exponent(var) as usize].add_term(m.without(var), c.clone());
        }
        out
    }

    pub fn from_univariate(var: &str, coeffs: &[MPoly]) -> MPoly {
        let mut out = MPoly::zero();
        for (k, c) in coeffs.iter().enumerate() {
            let xk = Monomial::from_map([(var.to_string(), k as u32)].into_iter().collect());
            for (m, cc) in &c.terms {
                out.add_term(m.mul(&xk), cc.clone());
            }
        }
        out
    }

    /// Scale so the leading coefficient is one. Zero stays zero.
    pub fn monic(&self) -> MPoly {
        match self.lead() {
            None => MPoly::zero(),
            Some((_, c)) => {
                let inv = c.recip();
                self.scale(&inv)
            }
        }
    }

    pub fn substitute(&self, var: &str, value: &BigRational) -> MPoly {
        let mut out = MPoly::zero();
        for (m, c) in &self.terms {
            let e = m.exponent(var);
            let mut k = c.clone();
            for _ in 0..e {
                k *= value;
            }
            out.add_term(m.without(var), k);
        }
        out
    }

    /// Floating point evaluation; missing variables are an error reported by name.
    pub fn eval_f64(&self, bindings: &HashMap<String, f64>) -> Result<f64, String> {
        let mut acc = 0.0;
        for (m, c) in &self.terms {
            let mut t = c.to_f64().unwrap_or(f64::NAN);
            for (v, e) in &m.0 {
                let x = bindings.get(v).ok_or_else(|| v.clone())?;
                t *= x.powi(*e as i32);
            }
            acc += t;
        }
        Ok(acc)
    }

    /// Least common multiple of coefficient denominators.
    pub fn denominator_lcm(&self) -> BigInt {
        self.terms
            .values()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()))
    }

    /// Gcd of the (integer) numerators; meaningful after clearing denominators.
    pub fn numerator_gcd(&self) -> BigInt {
        self.terms
            .values()
            .fold(BigInt::zero(), |acc, c| acc.gcd(c.numer()))
    }

    /// Gcd of all monomials appearing in the polynomial.
    pub fn monomial_content(&self) -> Monomial {
        let mut it = self.terms.keys();
        match it.next() {
            None => Monomial::one(),
            Some(first) => it.fold(first.clone(), |acc, m| acc.gcd(m)),
        }
    }

    /// Monic greatest common divisor over Q.
    pub fn gcd(a: &MPoly, b: &MPoly) -> MPoly {
        if a.is_zero() {
            return b.monic();
        }
        if b.is_zero() {
            return a.monic();
        }
        if a.as_constant().is_some() || b.as_constant().is_some() {
            return MPoly::one();
        }
        let vars: BTreeSet<String> = a.vars().union(&b.vars()).cloned().collect();
        let x = vars
            .iter()
            .next()
            .expect("nonconstant polynomial has a variable")
            .clone();
        let ua = a.to_univariate(&x);
        let ub = b.to_univariate(&x);
        let ca = content(&ua);
        let cb = content(&ub);
        let g_content = MPoly::gcd(&ca, &cb);
        let pa = primitive(&ua, &ca);
        let pb = primitive(&ub, &cb);
        let g = univariate_prs_gcd(pa, pb);
        let g = MPoly::from_univariate(&x, &g);
        g_content.mul(&g).monic()
    }
}

fn content(coeffs: &[MPoly]) -> MPoly {
    coeffs
        .iter()
        .fold(MPoly::zero(), |acc, c| MPoly::gcd(&acc, c))
}

fn primitive(coeffs: &[MPoly], c: &MPoly) -> Vec<MPoly> {
    if c.is_zero() {
        return coeffs.to_vec();
    }
    coeffs
        .iter()
        .map(|k| k.div_exact(c).expect("content divides every coefficient"))
        .collect()
}

fn trim(v: &mut Vec<MPoly>) {
    while v.last().is_some_and(|c| c.is_zero()) {
        v.pop();
    }
}

/// Pseudo-remainder of univariate polynomials with polynomial coefficients.
fn prem(a: &[MPoly], b: &[MPoly]) -> Vec<MPoly> {
    let mut r = a.to_vec();
    trim(&mut r);
    let db = b.len() - 1;
    let lb = b[db].clone();
    while r.len() > db && !r.is_empty() {
        let dr = r.len() - 1;
        let lr = r[dr].clone();
        let shift = dr - db;
        for c in r.iter_mut() {
            *c = c.mul(&lb);
        }
        for (i, bc) in b.iter().enumerate() {
            r[i + shift] = r[i + shift].sub(&bc.mul(&lr));
        }
        trim(&mut r);
    }
    r
}

fn univariate_prs_gcd(a: Vec<MPoly>, b: Vec<MPoly>) -> Vec<MPoly> {
    let (mut a, mut b) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    trim(&mut a);
    trim(&mut b);
    if b.is_empty() {
        return a;
    }
    loop {
        let r = prem(&a, &b);
        if r.is_empty() {
            let c = content(&b);
            return primitive(&b, &c);
        }
        if r.len() == 1 {
            // Nonzero constant remainder in the main variable: coprime.
            return vec![MPoly::one()];
        }
        let c = content(&r);
        a = b;
        b = primitive(&r, &c);
    }
}

impl fmt::Display for MPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if m.is_one() {
                write!(f, "{abs}")?;
            } else if abs.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{abs}*{m}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a() -> MPoly {
        MPoly::var("a")
    }
    fn e() -> MPoly {
        MPoly::var("e")
    }
    fn c(n: i64) -> MPoly {
        MPoly::constant(rat(n))
    }

    #[test]
    fn lex_order_is_multiplicative() {
        let ma = Monomial::var("a");
        let me = Monomial::var("e");
        assert!(ma > me);
        assert!(ma.mul(&ma) > ma.mul(&me));
        assert!(ma.mul(&me) > me.mul(&me));
    }

    #[test]
    fn exact_division() {
        let p = a().sub(&c(1)).mul(&e().pow(2));
        let q = p.div_exact(&e()).unwrap();
        assert_eq!(q, a().sub(&c(1)).mul(&e()));
        assert!(p.div_exact(&a()).is_none());
    }

    #[test]
    fn gcd_of_difference_of_squares() {
        let p = a().pow(2).sub(&c(1)).mul(&e().pow(2));
        let q = a().sub(&c(1)).mul(&e());
        assert_eq!(MPoly::gcd(&p, &q), a().sub(&c(1)).mul(&e()));
    }

    #[test]
    fn gcd_coprime() {
        let p = a().add(&e());
        let q = a().sub(&e());
        assert_eq!(MPoly::gcd(&p, &q), MPoly::one());
    }

    #[test]
    fn display_descending() {
        let p = a().mul(&e().pow(2)).sub(&e().pow(2));
        assert_eq!(p.to_string(), "a*e^2 - e^2");
    }
}
