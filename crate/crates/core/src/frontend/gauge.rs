use crate::legendre::{Coord, PhaseDensity, PhaseSpace};
use crate::symkernel::expr::{Parser, Pos, SyntaxError};
use crate::symkernel::{OpPoly, ParamRat};

use super::eval::{expand, Atoms, Poly};
use super::parse::power_product;
use super::{ModelError, ModelIR, SemanticKind};

struct DensityAtoms<'a> {
    params: &'a [String],
    space: &'a PhaseSpace,
}

impl Atoms for DensityAtoms<'_> {
    type Sym = (Coord, usize);

    fn ident(&self, name: &str, pos: Pos) -> Result<Poly<Self::Sym>, ModelError> {
        if self.params.iter().any(|p| p == name) {
            return Ok(Poly::constant(ParamRat::var(name)));
        }
        match self.space.lookup(name) {
            Some(c) if c.is_canonical() => Ok(Poly::symbol((c, 0))),
            _ => Err(ModelError::semantic(pos, SemanticKind::Undeclared, name)),
        }
    }

    fn call(
        &self,
        func: &str,
        arg: Poly<Self::Sym>,
        pos: Pos,
    ) -> Result<Poly<Self::Sym>, ModelError> {
        match func {
            "dx" => {}
            "dt" => {
                return Err(ModelError::semantic(
                    pos,
                    SemanticKind::TimeDerivative,
                    "dt",
                ))
            }
            _ => {
                return Err(ModelError::semantic(
                    pos,
                    SemanticKind::UnknownFunction,
                    func,
                ))
            }
        }
        let mut out = Poly::zero();
        for (key, c) in &arg.terms {
            match key.as_slice() {
                [] => {}
                [(coord, k)] => out.add_term(vec![(*coord, k + 1)], c.clone()),
                _ => {
                    let text = format!("dx({})", self.term_text(key));
                    return Err(ModelError::semantic(
                        pos,
                        SemanticKind::InvalidDerivative,
                        text,
                    ));
                }
            }
        }
        Ok(out)
    }

    fn term_text(&self, key: &[Self::Sym]) -> String {
        power_product(key, |(c, k)| {
            let mut s = self.space.name(*c);
            for _ in 0..*k {
                s = format!("dx({s})");
            }
            s
        })
    }
}

/// Parse a linear phase-space density such as `-pi_phi - dx(phi) + A0`.
pub fn parse_density(
    src: &str,
    params: &[String],
    space: &PhaseSpace,
) -> Result<PhaseDensity, ModelError> {
    let mut p = Parser::from_str(src)?;
    let e = p.parse_expr()?;
    p.eat_punct(';');
    p.expect_eof()?;
    let atoms = DensityAtoms { params, space };
    let poly = expand(&atoms, &e)?;
    let mut out = PhaseDensity::zero();
    for (key, c) in &poly.terms {
        match key.as_slice() {
            [(coord, k)] => out.add_term(*coord, &OpPoly::monomial(c.clone(), *k)),
            [] => {
                return Err(ModelError::semantic(
                    e.pos,
                    SemanticKind::Constant,
                    c.to_string(),
                ))
            }
            _ => {
                return Err(ModelError::semantic(
                    e.pos,
                    SemanticKind::NonLinearDensity,
                    atoms.term_text(key),
                ))
            }
        }
    }
    Ok(out)
}

/// Gauge-fixing conditions appended after the consistency loop.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct GaugeSpec {
    sources: Vec<String>,
    densities: Vec<PhaseDensity>,
}

impl GaugeSpec {
    pub fn new(sources: Vec<String>, densities: Vec<PhaseDensity>) -> Self {
        GaugeSpec { sources, densities }
    }

    /// One density per non-blank line; `#` starts a comment.
    pub fn parse(src: &str, model: &ModelIR) -> Result<GaugeSpec, ModelError> {
        let space = PhaseSpace::new(model.fields().to_vec(), Vec::new());
        let mut spec = GaugeSpec::default();
        for (lineno, line) in src.lines().enumerate() {
            let text = line.split('#').next().unwrap_or("").trim();
            if text.is_empty() {
                continue;
            }
            let fix = |pos: Pos| Pos {
                line: lineno + 1,
                col: pos.col + (line.len() - line.trim_start().len()),
            };
            let d = parse_density(text, model.params(), &space).map_err(|err| match err {
                ModelError::Syntax(e) => {
                    ModelError::Syntax(SyntaxError::new(fix(e.pos), e.message))
                }
                ModelError::Semantic { pos, kind, term } => ModelError::Semantic {
                    pos: fix(pos),
                    kind,
                    term,
                },
                other => other,
            })?;
            spec.sources
                .push(text.trim_end_matches(';').trim().to_string());
            spec.densities.push(d);
        }
        Ok(spec)
    }

    pub fn sources(&self) -> &[String] {
        &self.sources
    }

    pub fn densities(&self) -> &[PhaseDensity] {
        &self.densities
    }

    pub fn is_empty(&self) -> bool {
        self.densities.is_empty()
    }

    pub fn len(&self) -> usize {
        self.densities.len()
    }

    /// Keep only the first `n` conditions.
    pub fn truncated(&self, n: usize) -> GaugeSpec {
        GaugeSpec {
            sources: self.sources.iter().take(n).cloned().collect(),
            densities: self.densities.iter().take(n).cloned().collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space() -> PhaseSpace {
        PhaseSpace::new(vec!["phi".into(), "theta".into()], Vec::new())
    }

    #[test]
    fn parses_linear_density() {
        let d = parse_density("-pi_phi - dx(phi) + 2*dx(dx(theta))", &[], &space()).unwrap();
        assert_eq!(d.coeff(Coord::Momentum(0)), OpPoly::int(-1));
        assert_eq!(d.coeff(Coord::Field(0)), OpPoly::from_ints(&[0, -1]));
        assert_eq!(d.coeff(Coord::Field(1)), OpPoly::from_ints(&[0, 0, 2]));
    }

    #[test]
    fn rejects_products_and_time_derivatives() {
        let e = parse_density("phi*theta", &[], &space()).unwrap_err();
        assert_eq!(e.kind(), Some(SemanticKind::NonLinearDensity));
        let e = parse_density("dt(phi)", &[], &space()).unwrap_err();
        assert_eq!(e.kind(), Some(SemanticKind::TimeDerivative));
    }

    #[test]
    fn render_parses_back() {
        let s = space();
        let d = parse_density("(1/2)*dx(pi_theta) - 3*phi", &[], &s).unwrap();
        assert_eq!(parse_density(&d.render(&s), &[], &s).unwrap(), d);
    }
}
