//! Exact rational functions in the model parameters.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::expr::{Expr, ExprKind, Parser, SyntaxError};
use super::mpoly::{MPoly, Monomial};
use super::SymError;

/// `numerator / denominator` in lowest terms.
///
/// Both parts have integer coefficients with no common integer factor, share
/// no polynomial factor, and the denominator's leading coefficient is
/// positive. Equality is therefore structural.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ParamRat {
    num: MPoly,
    den: MPoly,
}

impl ParamRat {
    pub fn new(num: MPoly, den: MPoly) -> Result<Self, SymError> {
        if den.is_zero() {
            return Err(SymError::DivisionByZero);
        }
        if num.is_zero() {
            return Ok(ParamRat::zero());
        }
        let g = MPoly::gcd(&num, &den);
        let mut num = num.div_exact(&g).expect("gcd divides numerator");
        let mut den = den.div_exact(&g).expect("gcd divides denominator");
        let l = num_integer::Integer::lcm(&num.denominator_lcm(), &den.denominator_lcm());
        let lr = BigRational::from_integer(l);
        num = num.scale(&lr);
        den = den.scale(&lr);
        let c = num_integer::Integer::gcd(&num.numerator_gcd(), &den.numerator_gcd());
        let mut k = BigRational::new(BigInt::one(), c);
        if den.leading_coeff().is_negative() {
            k = -k;
        }
        Ok(ParamRat {
            num: num.scale(&k),
            den: den.scale(&k),
        })
    }

    pub fn zero() -> Self {
        ParamRat {
            num: MPoly::zero(),
            den: MPoly::one(),
        }
    }

    pub fn one() -> Self {
        ParamRat::int(1)
    }

    pub fn int(n: i64) -> Self {
        ParamRat::from_rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        ParamRat::from_rational(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn from_rational(q: BigRational) -> Self {
        ParamRat::new(
            MPoly::constant(BigRational::from_integer(q.numer().clone())),
            MPoly::constant(BigRational::from_integer(q.denom().clone())),
        )
        .expect("rational denominator is nonzero")
    }

    pub fn var(name: &str) -> Self {
        ParamRat {
            num: MPoly::var(name),
            den: MPoly::one(),
        }
    }

    pub fn numerator(&self) -> &MPoly {
        &self.num
    }

    pub fn denominator(&self) -> &MPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num == self.den
    }

    /// Rational value when no parameter appears.
    pub fn as_rational(&self) -> Option<BigRational> {
        let n = self.num.as_constant()?;
        let d = self.den.as_constant()?;
        Some(n / d)
    }

    pub fn params(&self) -> std::collections::BTreeSet<String> {
        let mut v = self.num.vars();
        v.extend(self.den.vars());
        v
    }

    pub fn checked_div(&self, other: &ParamRat) -> Result<ParamRat, SymError> {
        if other.is_zero() {
            return Err(SymError::DivisionByZero);
        }
        ParamRat::new(self.num.mul(&other.den), self.den.mul(&other.num))
    }

    pub fn recip(&self) -> Result<ParamRat, SymError> {
        ParamRat::one().checked_div(self)
    }

    pub fn pow(&self, n: u32) -> ParamRat {
        (0..n).fold(ParamRat::one(), |acc, _| &acc * self)
    }

    /// Replace a parameter by a rational value.
    pub fn substitute(&self, var: &str, value: &BigRational) -> Result<ParamRat, SymError> {
        let den = self.den.substitute(var, value);
        if den.is_zero() {
            return Err(SymError::SingularSubstitution {
                param: var.to_string(),
                value: value.to_string(),
            });
        }
        ParamRat::new(self.num.substitute(var, value), den)
    }

    pub fn eval_f64(&self, bindings: &HashMap<String, f64>) -> Result<f64, SymError> {
        let unbound = |v: String| SymError::UnboundParameter(v);
        let n = self.num.eval_f64(bindings).map_err(unbound)?;
        let d = self.den.eval_f64(bindings).map_err(unbound)?;
        Ok(n / d)
    }

    /// Evaluate an already parsed expression whose identifiers are parameters.
    pub fn from_expr(e: &Expr) -> Result<ParamRat, SyntaxError> {
        let err = |m: &str| SyntaxError::new(e.pos, m);
        Ok(match &e.kind {
            ExprKind::Num(q) => ParamRat::from_rational(q.clone()),
            ExprKind::Ident(name) => ParamRat::var(name),
            ExprKind::Call(name, _) => {
                return Err(err(&format!(
                    "'{name}(...)' is not allowed in a coefficient"
                )))
            }
            ExprKind::Neg(x) => -&ParamRat::from_expr(x)?,
            ExprKind::Add(x, y) => &ParamRat::from_expr(x)? + &ParamRat::from_expr(y)?,
            ExprKind::Sub(x, y) => &ParamRat::from_expr(x)? - &ParamRat::from_expr(y)?,
            ExprKind::Mul(x, y) => &ParamRat::from_expr(x)? * &ParamRat::from_expr(y)?,
            ExprKind::Div(x, y) => ParamRat::from_expr(x)?
                .checked_div(&ParamRat::from_expr(y)?)
                .map_err(|_| err("division by zero"))?,
            ExprKind::Pow(x, n) => ParamRat::from_expr(x)?.pow(*n),
        })
    }
}

impl Default for ParamRat {
    fn default() -> Self {
        ParamRat::zero()
    }
}

impl<'a> Add<&'a ParamRat> for &'a ParamRat {
    type Output = ParamRat;
    fn add(self, rhs: &ParamRat) -> ParamRat {
        if self.den == rhs.den {
            return ParamRat::new(self.num.add(&rhs.num), self.den.clone())
                .expect("nonzero denominator");
        }
        ParamRat::new(
            self.num.mul(&rhs.den).add(&rhs.num.mul(&self.den)),
            self.den.mul(&rhs.den),
        )
        .expect("nonzero denominator")
    }
}

impl<'a> Sub<&'a ParamRat> for &'a ParamRat {
    type Output = ParamRat;
    fn sub(self, rhs: &ParamRat) -> ParamRat {
        self + &(-rhs)
    }
}

impl<'a> Mul<&'a ParamRat> for &'a ParamRat {
    type Output = ParamRat;
    fn mul(self, rhs: &ParamRat) -> ParamRat {
        if self.is_zero() || rhs.is_zero() {
            return ParamRat::zero();
        }
        ParamRat::new(self.num.mul(&rhs.num), self.den.mul(&rhs.den)).expect("nonzero denominator")
    }
}

impl Neg for &ParamRat {
    type Output = ParamRat;
    fn neg(self) -> ParamRat {
        ParamRat {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }
}

impl Neg for ParamRat {
    type Output = ParamRat;
    fn neg(self) -> ParamRat {
        -&self
    }
}

/// Sign, integer content, monomial content and primitive remainder.
struct Factored {
    negative: bool,
    scalar: BigInt,
    mono: Monomial,
    rest: MPoly,
}

fn factor(p: &MPoly) -> Factored {
    let mono = p.monomial_content();
    let stripped = p
        .div_exact(&MPoly::monomial(mono.clone(), BigRational::one()))
        .expect("monomial content divides");
    let scalar = stripped.numerator_gcd();
    let mut rest = stripped.scale(&BigRational::new(BigInt::one(), scalar.clone()));
    let negative = rest.leading_coeff().is_negative();
    if negative {
        rest = rest.neg();
    }
    Factored {
        negative,
        scalar,
        mono,
        rest,
    }
}

/// Returns the rendering and whether it is a single product (no top-level sum).
fn render_poly(p: &MPoly) -> (String, bool) {
    if p.is_zero() {
        return ("0".into(), true);
    }
    let f = factor(p);
    let mut parts: Vec<String> = Vec::new();
    let rest_is_one = f.rest.as_constant().is_some_and(|c| c.is_one());
    if !f.scalar.is_one() || (f.mono.is_one() && rest_is_one) {
        parts.push(f.scalar.to_string());
    }
    if !f.mono.is_one() {
        parts.push(f.mono.to_string());
    }
    let mut atomic = true;
    if !rest_is_one {
        if parts.is_empty() {
            atomic = f.rest.num_terms() == 1;
            parts.push(f.rest.to_string());
        } else {
            parts.push(format!("({})", f.rest));
        }
    }
    let body = parts.join("*");
    if f.negative {
        (
            format!("-{}", if atomic { body } else { format!("({body})") }),
            true,
        )
    } else {
        (body, atomic)
    }
}

impl fmt::Display for ParamRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (n, n_atomic) = render_poly(&self.num);
        if self.den.as_constant().is_some_and(|c| c.is_one()) {
            return write!(f, "{n}");
        }
        let (d, _) = render_poly(&self.den);
        let d_is_simple = self.den.num_terms() == 1 && !d.contains('*');
        let n = if n_atomic { n } else { format!("({n})") };
        if d_is_simple {
            write!(f, "{n}/{d}")
        } else {
            write!(f, "{n}/({d})")
        }
    }
}

impl FromStr for ParamRat {
    type Err = SyntaxError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut p = Parser::from_str(s)?;
        let e = p.parse_expr()?;
        p.expect_eof()?;
        ParamRat::from_expr(&e)
    }
}

impl Serialize for ParamRat {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ParamRat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> ParamRat {
        s.parse().unwrap()
    }

    #[test]
    fn canonical_equality() {
        assert_eq!(p("(a^2-1)/(a+1)"), p("a-1"));
        assert_eq!(p("2/4"), p("1/2"));
        assert_eq!(p("(-a)/(-e)"), p("a/e"));
        assert_eq!(p("1/(-a+1)"), p("-1/(a-1)"));
    }

    #[test]
    fn division_by_zero_is_an_error() {
        assert_eq!(
            p("a").checked_div(&ParamRat::zero()),
            Err(SymError::DivisionByZero)
        );
        assert!("1/(a-a)".parse::<ParamRat>().is_err());
    }

    #[test]
    fn display_round_trips() {
        for s in [
            "1/(e^2*(a - 1))",
            "-3/2",
            "(a - 1)*e^2",
            "-1/(a - 1)",
            "e/2",
            "(a + e)/(a - e)",
            "-e^2*(a - 1)",
            "0",
            "1",
        ] {
            let x = p(s);
            assert_eq!(x.to_string().parse::<ParamRat>().unwrap(), x, "{s} -> {x}");
        }
        assert_eq!(p("1/(e^2*(a-1))").to_string(), "1/(e^2*(a - 1))");
        assert_eq!(p("(a-1)*e^2").to_string(), "e^2*(a - 1)");
        assert_eq!(p("-3/2").to_string(), "-3/2");
    }

    #[test]
    fn substitution() {
        let x = p("1/(e^2*(a-1))");
        let two = BigRational::from_integer(2.into());
        let y = x
            .substitute("a", &two)
            .unwrap()
            .substitute("e", &two)
            .unwrap();
        assert_eq!(y, p("1/4"));
        assert!(x.substitute("a", &BigRational::one()).is_err());
    }
}
