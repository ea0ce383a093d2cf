use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use num_rational::BigRational;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::param::ParamRat;
use super::SymError;

/// Polynomial `c0 + c1 D + ... + cn D^n` in the spatial derivative `D = d/dy`.
///
/// As a kernel it stands for `sum_k c_k d_y^k delta(y - x)`. The coefficient
/// vector never ends in a zero.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct OpPoly {
    coeffs: Vec<ParamRat>,
}

impl OpPoly {
    pub fn zero() -> Self {
        OpPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        OpPoly::constant(ParamRat::one())
    }

    pub fn d() -> Self {
        OpPoly::monomial(ParamRat::one(), 1)
    }

    pub fn int(n: i64) -> Self {
        OpPoly::constant(ParamRat::int(n))
    }

    pub fn constant(c: ParamRat) -> Self {
        OpPoly::from_coeffs(vec![c])
    }

    pub fn monomial(c: ParamRat, k: usize) -> Self {
        let mut coeffs = vec![ParamRat::zero(); k + 1];
        coeffs[k] = c;
        OpPoly::from_coeffs(coeffs)
    }

    pub fn from_coeffs(mut coeffs: Vec<ParamRat>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        OpPoly { coeffs }
    }

    /// Shorthand for integer coefficient lists in ascending degree.
    pub fn from_ints(cs: &[i64]) -> Self {
        OpPoly::from_coeffs(cs.iter().map(|&c| ParamRat::int(c)).collect())
    }

    pub fn coeffs(&self) -> &[ParamRat] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> ParamRat {
        self.coeffs.get(k).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading_coeff(&self) -> ParamRat {
        self.coeffs.last().cloned().unwrap_or_default()
    }

    /// `Some(c)` when the polynomial has degree at most zero.
    pub fn as_constant(&self) -> Option<ParamRat> {
        match self.coeffs.len() {
            0 => Some(ParamRat::zero()),
            1 => Some(self.coeffs[0].clone()),
            _ => None,
        }
    }

    pub fn constant_term(&self) -> ParamRat {
        self.coeff(0)
    }

    pub fn scale(&self, k: &ParamRat) -> OpPoly {
        OpPoly::from_coeffs(self.coeffs.iter().map(|c| c * k).collect())
    }

    /// The formal adjoint: `D -> -D`, i.e. `c_k -> (-1)^k c_k`.
    pub fn adjoint(&self) -> OpPoly {
        OpPoly::from_coeffs(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| if k % 2 == 1 { -c } else { c.clone() })
                .collect(),
        )
    }

    pub fn pow(&self, n: u32) -> OpPoly {
        (0..n).fold(OpPoly::one(), |acc, _| &acc * self)
    }

    /// Euclidean division over the parameter field: `self = q * rhs + r`, `deg r < deg rhs`.
    pub fn div_rem(&self, rhs: &OpPoly) -> Result<(OpPoly, OpPoly), SymError> {
        let dr = rhs.degree().ok_or(SymError::DivisionByZero)?;
        let lc_inv = rhs.leading_coeff().recip()?;
        let mut rem = self.coeffs.clone();
        let mut quot = vec![ParamRat::zero(); self.coeffs.len().saturating_sub(dr)];
        while rem.len() > dr {
            let k = rem.len() - 1 - dr;
            let t = &rem[rem.len() - 1] * &lc_inv;
            if !t.is_zero() {
                for (i, c) in rhs.coeffs.iter().enumerate() {
                    rem[i + k] = &rem[i + k] - &(&t * c);
                }
            }
            quot[k] = t;
            rem.pop();
            while rem.last().is_some_and(|c| c.is_zero()) {
                rem.pop();
            }
        }
        Ok((OpPoly::from_coeffs(quot), OpPoly::from_coeffs(rem)))
    }

    /// `Some(q)` when `rhs` divides `self` exactly.
    pub fn div_exact(&self, rhs: &OpPoly) -> Option<OpPoly> {
        let (q, r) = self.div_rem(rhs).ok()?;
        r.is_zero().then_some(q)
    }

    /// Leading coefficient scaled to one; zero stays zero.
    pub fn monic(&self) -> OpPoly {
        if self.is_zero() {
            return OpPoly::zero();
        }
        let inv = self
            .leading_coeff()
            .recip()
            .expect("leading coefficient is nonzero");
        self.scale(&inv)
    }

    /// Monic gcd.
    pub fn gcd(a: &OpPoly, b: &OpPoly) -> OpPoly {
        let (mut x, mut y) = (a.clone(), b.clone());
        while !y.is_zero() {
            let (_, r) = x.div_rem(&y).expect("divisor is nonzero");
            x = y;
            y = r;
        }
        x.monic()
    }

    pub fn lcm(a: &OpPoly, b: &OpPoly) -> OpPoly {
        if a.is_zero() || b.is_zero() {
            return OpPoly::zero();
        }
        let g = OpPoly::gcd(a, b);
        (&a.div_exact(&g).expect("gcd divides") * b).monic()
    }

    pub fn substitute(&self, param: &str, value: &BigRational) -> Result<OpPoly, SymError> {
        Ok(OpPoly::from_coeffs(
            self.coeffs
                .iter()
                .map(|c| c.substitute(param, value))
                .collect::<Result<_, _>>()?,
        ))
    }

    /// Numerical symbol: the polynomial evaluated at `D = z`.
    pub fn eval(
        &self,
        bindings: &HashMap<String, f64>,
        z: Complex64,
    ) -> Result<Complex64, SymError> {
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = acc * z + c.eval_f64(bindings)?;
        }
        Ok(acc)
    }

    pub fn real_coeffs(&self, bindings: &HashMap<String, f64>) -> Result<Vec<f64>, SymError> {
        self.coeffs.iter().map(|c| c.eval_f64(bindings)).collect()
    }

    /// Render as a distribution, e.g. `2 d_y delta(y-x) - delta(y-x)`.
    pub fn kernel_text(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut out = String::new();
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let basis = match k {
                0 => "delta(y-x)".to_string(),
                1 => "d_y delta(y-x)".to_string(),
                _ => format!("d_y^{k} delta(y-x)"),
            };
            push_term(&mut out, c, &basis, " ");
        }
        out
    }
}

/// Append `coeff basis` to a running sum, folding signs into the separator.
pub(crate) fn push_term(out: &mut String, c: &ParamRat, basis: &str, joiner: &str) {
    let s = c.to_string();
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) if !has_top_level_sum(rest) => (true, rest.to_string()),
        _ => (false, s),
    };
    if out.is_empty() {
        if neg {
            out.push('-');
        }
    } else if neg {
        out.push_str(" - ");
    } else {
        out.push_str(" + ");
    }
    if body == "1" {
        out.push_str(basis);
    } else if body.contains(' ')
        || (body.contains('/') && (joiner == " " || body.contains(char::is_alphabetic)))
    {
        out.push_str(&format!("({body}){joiner}{basis}"));
    } else {
        out.push_str(&format!("{body}{joiner}{basis}"));
    }
}

pub(crate) fn has_top_level_sum(s: &str) -> bool {
    let mut depth = 0i32;
    let b = s.as_bytes();
    for (i, &c) in b.iter().enumerate() {
        match c {
            b'(' => depth += 1,
            b')' => depth -= 1,
            b'+' | b'-' if depth == 0 && i > 0 && b[i - 1] == b' ' => return true,
            _ => {}
        }
    }
    false
}

impl<'a> Add<&'a OpPoly> for &'a OpPoly {
    type Output = OpPoly;
    fn add(self, rhs: &OpPoly) -> OpPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        OpPoly::from_coeffs((0..n).map(|k| &self.coeff(k) + &rhs.coeff(k)).collect())
    }
}

impl<'a> Sub<&'a OpPoly> for &'a OpPoly {
    type Output = OpPoly;
    fn sub(self, rhs: &OpPoly) -> OpPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        OpPoly::from_coeffs((0..n).map(|k| &self.coeff(k) - &rhs.coeff(k)).collect())
    }
}

impl<'a> Mul<&'a OpPoly> for &'a OpPoly {
    type Output = OpPoly;
    fn mul(self, rhs: &OpPoly) -> OpPoly {
        if self.is_zero() || rhs.is_zero() {
            return OpPoly::zero();
        }
        let mut out = vec![ParamRat::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] = &out[i + j] + &(a * b);
            }
        }
        OpPoly::from_coeffs(out)
    }
}

impl Neg for &OpPoly {
    type Output = OpPoly;
    fn neg(self) -> OpPoly {
        OpPoly::from_coeffs(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl fmt::Display for OpPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut out = String::new();
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if k == 0 {
                out = c.to_string();
                continue;
            }
            let basis = if k == 1 {
                "D".to_string()
            } else {
                format!("D^{k}")
            };
            push_term(&mut out, c, &basis, "*");
        }
        write!(f, "{out}")
    }
}

#[derive(Serialize, Deserialize)]
struct OpPolyJson {
    coeffs: Vec<ParamRat>,
    var: String,
}

impl Serialize for OpPoly {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        OpPolyJson {
            coeffs: self.coeffs.clone(),
            var: "D".into(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for OpPoly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = OpPolyJson::deserialize(d)?;
        if j.var != "D" {
            return Err(serde::de::Error::custom(format!(
                "unknown operator variable '{}'",
                j.var
            )));
        }
        Ok(OpPoly::from_coeffs(j.coeffs))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_scaling() {
        assert_eq!(&OpPoly::one() * &OpPoly::d(), OpPoly::d());
        assert_eq!(
            &OpPoly::from_ints(&[0, 2]) * &OpPoly::int(3),
            OpPoly::from_ints(&[0, 6])
        );
        assert_eq!(&OpPoly::d() * &OpPoly::d(), OpPoly::from_ints(&[0, 0, 1]));
    }

    #[test]
    fn adjoint_examples() {
        assert_eq!(OpPoly::d().adjoint(), OpPoly::from_ints(&[0, -1]));
        let even = OpPoly::from_ints(&[1, 0, 2]);
        assert_eq!(even.adjoint(), even);
    }

    #[test]
    fn json_form() {
        let j = serde_json::to_string(&OpPoly::d()).unwrap();
        assert_eq!(j, r#"{"coeffs":["0","1"],"var":"D"}"#);
        let back: OpPoly = serde_json::from_str(&j).unwrap();
        assert_eq!(back, OpPoly::d());
    }

    #[test]
    fn kernel_rendering() {
        let k = OpPoly::constant("1/(e^2*(a-1))".parse().unwrap());
        let k = &k * &OpPoly::d();
        assert_eq!(k.kernel_text(), "(1/(e^2*(a - 1))) d_y delta(y-x)");
        assert_eq!(
            OpPoly::from_ints(&[-1, 2]).kernel_text(),
            "-delta(y-x) + 2 d_y delta(y-x)"
        );
    }

    #[test]
    fn division() {
        let p = OpPoly::from_ints(&[1, 0, 1]);
        let q = OpPoly::from_ints(&[1, 1]);
        let (quot, rem) = p.div_rem(&q).unwrap();
        assert_eq!(&(&quot * &q) + &rem, p);
        assert_eq!(rem, OpPoly::int(2));
    }
}
