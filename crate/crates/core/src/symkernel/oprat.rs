use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use num_rational::BigRational;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::oppoly::OpPoly;
use super::param::ParamRat;
use super::SymError;

/// Quotient `num(D) / den(D)` of operator polynomials.
///
/// Canonical form: common factors cancelled and `den` monic, so two equal
/// operators compare equal structurally. Zero is `0 / 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OpRat {
    num: OpPoly,
    den: OpPoly,
}

impl OpRat {
    pub fn new(num: OpPoly, den: OpPoly) -> Result<Self, SymError> {
        if den.is_zero() {
            return Err(SymError::DivisionByZero);
        }
        if num.is_zero() {
            return Ok(OpRat::zero());
        }
        let g = OpPoly::gcd(&num, &den);
        let num = num.div_exact(&g).expect("gcd divides numerator");
        let den = den.div_exact(&g).expect("gcd divides denominator");
        let lc = den.leading_coeff().recip()?;
        Ok(OpRat {
            num: num.scale(&lc),
            den: den.scale(&lc),
        })
    }

    pub fn zero() -> Self {
        OpRat {
            num: OpPoly::zero(),
            den: OpPoly::one(),
        }
    }

    pub fn one() -> Self {
        OpRat::from_poly(OpPoly::one())
    }

    pub fn from_poly(p: OpPoly) -> Self {
        OpRat {
            num: p,
            den: OpPoly::one(),
        }
    }

    pub fn constant(c: ParamRat) -> Self {
        OpRat::from_poly(OpPoly::constant(c))
    }

    pub fn num(&self) -> &OpPoly {
        &self.num
    }

    pub fn den(&self) -> &OpPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_local(&self) -> bool {
        self.den.degree() == Some(0)
    }

    /// The polynomial itself when the denominator is trivial.
    pub fn as_poly(&self) -> Option<OpPoly> {
        self.is_local().then(|| self.num.clone())
    }

    pub fn recip(&self) -> Result<OpRat, SymError> {
        OpRat::new(self.den.clone(), self.num.clone())
    }

    pub fn checked_div(&self, rhs: &OpRat) -> Result<OpRat, SymError> {
        Ok(self * &rhs.recip()?)
    }

    pub fn adjoint(&self) -> OpRat {
        OpRat::new(self.num.adjoint(), self.den.adjoint())
            .expect("adjoint keeps the denominator nonzero")
    }

    pub fn substitute(&self, param: &str, value: &BigRational) -> Result<OpRat, SymError> {
        let den = self.den.substitute(param, value)?;
        if den.is_zero() {
            return Err(SymError::SingularSubstitution {
                param: param.to_string(),
                value: value.to_string(),
            });
        }
        OpRat::new(self.num.substitute(param, value)?, den)
    }

    /// Symbol at `D = z`.
    pub fn eval(
        &self,
        bindings: &HashMap<String, f64>,
        z: Complex64,
    ) -> Result<Complex64, SymError> {
        Ok(self.num.eval(bindings, z)? / self.den.eval(bindings, z)?)
    }

    /// Kernel rendering; nonlocal entries print as `(num) (den)^-1 delta(y-x)`.
    pub fn kernel_text(&self) -> String {
        if self.is_local() {
            return self.num.kernel_text();
        }
        format!("({}) ({})^-1 delta(y-x)", self.num, self.den)
    }
}

impl Default for OpRat {
    fn default() -> Self {
        OpRat::zero()
    }
}

impl From<OpPoly> for OpRat {
    fn from(p: OpPoly) -> Self {
        OpRat::from_poly(p)
    }
}

impl<'a> Add<&'a OpRat> for &'a OpRat {
    type Output = OpRat;
    fn add(self, rhs: &OpRat) -> OpRat {
        if self.den == rhs.den {
            return OpRat::new(&self.num + &rhs.num, self.den.clone())
                .expect("nonzero denominator");
        }
        let num = &(&self.num * &rhs.den) + &(&rhs.num * &self.den);
        OpRat::new(num, &self.den * &rhs.den).expect("nonzero denominator")
    }
}

impl<'a> Sub<&'a OpRat> for &'a OpRat {
    type Output = OpRat;
    fn sub(self, rhs: &OpRat) -> OpRat {
        self + &(-rhs)
    }
}

impl<'a> Mul<&'a OpRat> for &'a OpRat {
    type Output = OpRat;
    fn mul(self, rhs: &OpRat) -> OpRat {
        OpRat::new(&self.num * &rhs.num, &self.den * &rhs.den).expect("nonzero denominator")
    }
}

impl Neg for &OpRat {
    type Output = OpRat;
    fn neg(self) -> OpRat {
        OpRat {
            num: -&self.num,
            den: self.den.clone(),
        }
    }
}

impl fmt::Display for OpRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_local() {
            write!(f, "{}", self.num)
        } else {
            let wrap = |s: String| if s.contains(' ') { format!("({s})") } else { s };
            write!(
                f,
                "{}/{}",
                wrap(self.num.to_string()),
                wrap(self.den.to_string())
            )
        }
    }
}

#[derive(Serialize, Deserialize)]
struct OpRatJson {
    num: OpPoly,
    den: OpPoly,
}

impl Serialize for OpRat {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        OpRatJson {
            num: self.num.clone(),
            den: self.den.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for OpRat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = OpRatJson::deserialize(d)?;
        OpRat::new(j.num, j.den).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cancels_common_factors() {
        let r = OpRat::new(OpPoly::from_ints(&[0, 0, 2]), OpPoly::from_ints(&[0, 4])).unwrap();
        assert_eq!(
            r,
            OpRat::from_poly(OpPoly::from_coeffs(vec![
                ParamRat::zero(),
                ParamRat::ratio(1, 2)
            ]))
        );
        assert!(r.is_local());
    }

    #[test]
    fn zero_denominator_rejected() {
        assert_eq!(
            OpRat::new(OpPoly::one(), OpPoly::zero()),
            Err(SymError::DivisionByZero)
        );
    }

    #[test]
    fn field_arithmetic() {
        let inv_d = OpRat::from_poly(OpPoly::d()).recip().unwrap();
        assert!(!inv_d.is_local());
        assert_eq!(&inv_d * &OpRat::from_poly(OpPoly::d()), OpRat::one());
        let half = &inv_d + &inv_d;
        assert_eq!(&half - &inv_d, inv_d);
    }

    #[test]
    fn json_round_trip() {
        let r = OpRat::new(OpPoly::one(), OpPoly::from_ints(&[1, 1])).unwrap();
        let j = serde_json::to_string(&r).unwrap();
        let back: OpRat = serde_json::from_str(&j).unwrap();
        assert_eq!(back, r);
    }
}
