use crate::symkernel::expr::{Parser, Pos, SyntaxError, Tok};
use crate::symkernel::oppoly::push_term;
use crate::symkernel::ParamRat;

use super::eval::{expand, Atoms, Poly};
use super::{ModelError, ModelIR, SemanticKind, Slot, Sym};

struct ModelAtoms<'a> {
    params: &'a [String],
    fields: &'a [String],
}

impl Atoms for ModelAtoms<'_> {
    type Sym = Sym;

    fn ident(&self, name: &str, pos: Pos) -> Result<Poly<Sym>, ModelError> {
        if self.params.iter().any(|p| p == name) {
            return Ok(Poly::constant(ParamRat::var(name)));
        }
        match self.fields.iter().position(|f| f == name) {
            Some(i) => Ok(Poly::symbol(Sym::value(i))),
            None => Err(ModelError::semantic(pos, SemanticKind::Undeclared, name)),
        }
    }

    fn call(&self, func: &str, arg: Poly<Sym>, pos: Pos) -> Result<Poly<Sym>, ModelError> {
        let slot = match func {
            "dt" => Slot::Time,
            "dx" => Slot::Space,
            _ => {
                return Err(ModelError::semantic(
                    pos,
                    SemanticKind::UnknownFunction,
                    func,
                ))
            }
        };
        let mut out = Poly::zero();
        for (key, c) in &arg.terms {
            match key.as_slice() {
                [] => {}
                [s] if s.slot == Slot::Value => out.add_term(
                    vec![Sym {
                        field: s.field,
                        slot,
                    }],
                    c.clone(),
                ),
                [_] => {
                    let text = format!("{func}({})", self.term_text(key));
                    return Err(ModelError::semantic(
                        pos,
                        SemanticKind::SecondDerivative,
                        text,
                    ));
                }
                _ => {
                    let text = format!("{func}({})", self.term_text(key));
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

    fn term_text(&self, key: &[Sym]) -> String {
        let name = |s: &Sym| {
            let f = &self.fields[s.field];
            match s.slot {
                Slot::Value => f.clone(),
                Slot::Time => format!("dt({f})"),
                Slot::Space => format!("dx({f})"),
            }
        };
        power_product(key, name)
    }
}

/// `x*x*y` rendered as `x^2*y`.
pub(crate) fn power_product<S: PartialEq>(key: &[S], name: impl Fn(&S) -> String) -> String {
    if key.is_empty() {
        return "1".into();
    }
    let mut parts: Vec<String> = Vec::new();
    let mut i = 0;
    while i < key.len() {
        let mut j = i;
        while j < key.len() && key[j] == key[i] {
            j += 1;
        }
        let n = j - i;
        parts.push(if n == 1 {
            name(&key[i])
        } else {
            format!("{}^{n}", name(&key[i]))
        });
        i = j;
    }
    parts.join("*")
}

fn name_list(p: &mut Parser, seen: &mut Vec<String>) -> Result<Vec<String>, ModelError> {
    let mut out = Vec::new();
    loop {
        let t = p.next();
        match t.tok {
            Tok::Ident(name) => {
                if seen.contains(&name) {
                    return Err(ModelError::semantic(t.pos, SemanticKind::Duplicate, name));
                }
                seen.push(name.clone());
                out.push(name);
            }
            Tok::Punct(';') => return Ok(out),
            Tok::Punct(',') => {}
            other => {
                return Err(SyntaxError::new(
                    t.pos,
                    format!("expected a name or ';', found {other}"),
                )
                .into())
            }
        }
    }
}

/// Parse and validate model source text.
///
/// ```text
/// params a e;
/// fields phi A0 A1;
/// L = 1/2*dt(phi)^2 - 1/2*dx(phi)^2 + ...;
/// ```
pub fn parse_model(src: &str) -> Result<ModelIR, ModelError> {
    let mut p = Parser::from_str(src)?;
    let mut params: Vec<String> = Vec::new();
    let mut fields: Vec<String> = Vec::new();
    let mut seen: Vec<String> = Vec::new();
    let mut lagrangian = None;
    while !p.at_eof() {
        let (kw, pos) = p.expect_ident()?;
        match kw.as_str() {
            "params" if params.is_empty() && lagrangian.is_none() => {
                params = name_list(&mut p, &mut seen)?
            }
            "fields" if fields.is_empty() && lagrangian.is_none() => {
                fields = name_list(&mut p, &mut seen)?;
                if fields.is_empty() {
                    return Err(SyntaxError::new(pos, "at least one field is required").into());
                }
            }
            "L" if lagrangian.is_none() => {
                p.expect_punct('=')?;
                let e = p.parse_expr()?;
                if !p.eat_punct(';') {
                    p.expect_eof()?;
                }
                lagrangian = Some(e);
            }
            "params" | "fields" | "L" => {
                return Err(SyntaxError::new(pos, format!("unexpected '{kw}' statement")).into());
            }
            _ => {
                return Err(SyntaxError::new(
                    pos,
                    format!("expected 'params', 'fields' or 'L', found '{kw}'"),
                )
                .into())
            }
        }
    }
    let Some(e) = lagrangian else {
        return Err(ModelError::semantic(
            p.peek().pos,
            SemanticKind::MissingLagrangian,
            "L",
        ));
    };
    let atoms = ModelAtoms {
        params: &params,
        fields: &fields,
    };
    let poly = expand(&atoms, &e)?;
    let mut terms = Vec::new();
    for (key, c) in &poly.terms {
        let kind = match key.len() {
            2 => {
                terms.push(((key[0], key[1]), c.clone()));
                continue;
            }
            0 => SemanticKind::Constant,
            1 => SemanticKind::Linear,
            _ => SemanticKind::NonQuadratic,
        };
        return Err(ModelError::semantic(e.pos, kind, atoms.term_text(key)));
    }
    Ok(ModelIR::new(params, fields, terms))
}

/// Source text that parses back to the same model.
pub fn print_model(m: &ModelIR) -> String {
    let mut out = String::new();
    if !m.params().is_empty() {
        out.push_str(&format!("params {};\n", m.params().join(" ")));
    }
    out.push_str(&format!("fields {};\n", m.fields().join(" ")));
    let mut body = String::new();
    for ((s, t), c) in m.lagrangian() {
        let mono = power_product(&[*s, *t], |x| m.sym_name(*x));
        push_term(&mut body, c, &mono, "*");
    }
    if body.is_empty() {
        body.push('0');
    }
    out.push_str(&format!("L = {body};\n"));
    out
}
