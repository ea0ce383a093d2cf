use crate::symkernel::ParamRat;

use super::gauge::GaugeSpec;
use super::parse::parse_model;
use super::{ModelError, ModelIR, Sym};

pub const PRESET_NAMES: [&str; 4] = ["jr-symbolic", "jr-a1", "jr-wz", "jr-wz-gaugefixed"];

pub const JR_A1_SRC: &str = "\
# Chiral Schwinger model, bosonized, at a = 1 and e = 1.
fields phi A0 A1;
L = 1/2*(dt(phi)^2 - dx(phi)^2) + (dt(phi) + dx(phi))*(A0 - A1)
  + 1/2*(dt(A1) - dx(A0))^2 + 1/2*(A0^2 - A1^2);
";

pub const JR_WZ_SRC: &str = "\
# The a = 1 model with a Wess-Zumino field theta restoring gauge invariance.
fields phi A0 A1 theta;
L = 1/2*(dt(phi)^2 - dx(phi)^2) + (dt(phi) + dx(phi))*(A0 - A1)
  + 1/2*(dt(A1) - dx(A0))^2 + 1/2*(A0^2 - A1^2)
  + dx(phi)*dt(theta) - dt(phi)*dx(theta) + dt(theta)*A1 - dx(theta)*A0;
";

pub const JR_WZ_GAUGE_SRC: &str = "\
-dx(theta)
-pi_phi - dx(phi) - 2*A1 + A0 + dx(theta)
";

#[derive(Clone, Debug, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub model: ModelIR,
    pub gauge: Option<GaugeSpec>,
}

/// Look up a built-in model by name.
pub fn preset_model(name: &str) -> Result<Preset, ModelError> {
    let (name, model, gauge) = match name {
        "jr-symbolic" => ("jr-symbolic", jr_symbolic(), None),
        "jr-a1" => ("jr-a1", parse_model(JR_A1_SRC)?, None),
        "jr-wz" => ("jr-wz", parse_model(JR_WZ_SRC)?, None),
        "jr-wz-gaugefixed" => {
            let m = parse_model(JR_WZ_SRC)?;
            let g = GaugeSpec::parse(JR_WZ_GAUGE_SRC, &m)?;
            ("jr-wz-gaugefixed", m, Some(g))
        }
        other => return Err(ModelError::UnknownPreset(other.to_string())),
    };
    Ok(Preset { name, model, gauge })
}

type Lin = Vec<(ParamRat, Sym)>;

/// Upper-index metric diag(1, -1).
fn g(mu: usize, nu: usize) -> ParamRat {
    match (mu, nu) {
        (0, 0) => ParamRat::one(),
        (1, 1) => ParamRat::int(-1),
        _ => ParamRat::zero(),
    }
}

/// Upper-index Levi-Civita symbol with eps^{01} = +1.
fn eps(mu: usize, nu: usize) -> ParamRat {
    match (mu, nu) {
        (0, 1) => ParamRat::one(),
        (1, 0) => ParamRat::int(-1),
        _ => ParamRat::zero(),
    }
}

fn d(mu: usize, field: usize) -> Sym {
    if mu == 0 {
        Sym::dt(field)
    } else {
        Sym::dx(field)
    }
}

fn add_product(terms: &mut Vec<((Sym, Sym), ParamRat)>, c: &ParamRat, x: &Lin, y: &Lin) {
    if c.is_zero() {
        return;
    }
    for (cx, sx) in x {
        for (cy, sy) in y {
            terms.push(((*sx, *sy), &(c * cx) * cy));
        }
    }
}

/// The bosonized chiral model with symbolic `a` and `e`, assembled from its
/// covariant form. Fields are `phi` and the lower components `A_0`, `A_1`.
fn jr_symbolic() -> ModelIR {
    const PHI: usize = 0;
    let a_field = |mu: usize| 1 + mu;
    let (a, e) = (ParamRat::var("a"), ParamRat::var("e"));
    let half = ParamRat::ratio(1, 2);
    let one = ParamRat::one();
    let mut terms = Vec::new();

    let dphi = |mu: usize| -> Lin { vec![(one.clone(), d(mu, PHI))] };
    let amu = |mu: usize| -> Lin { vec![(one.clone(), Sym::value(a_field(mu)))] };
    // F_{mu nu} = d_mu A_nu - d_nu A_mu
    let f = |mu: usize, nu: usize| -> Lin {
        vec![
            (one.clone(), d(mu, a_field(nu))),
            (ParamRat::int(-1), d(nu, a_field(mu))),
        ]
    };

    for mu in 0..2 {
        for nu in 0..2 {
            add_product(&mut terms, &(&half * &g(mu, nu)), &dphi(mu), &dphi(nu));
            add_product(
                &mut terms,
                &(&e * &(&g(mu, nu) - &eps(mu, nu))),
                &dphi(mu),
                &amu(nu),
            );
            let mass = &(&(&half * &a) * &e.pow(2)) * &g(mu, nu);
            add_product(&mut terms, &mass, &amu(mu), &amu(nu));
            for al in 0..2 {
                for be in 0..2 {
                    let c = &(&ParamRat::ratio(-1, 4) * &g(mu, al)) * &g(nu, be);
                    let fmn = f(mu, nu);
                    add_product(&mut terms, &c, &fmn, &f(al, be));
                }
            }
        }
    }
    ModelIR::new(
        vec!["a".into(), "e".into()],
        vec!["phi".into(), "A0".into(), "A1".into()],
        terms,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    #[test]
    fn symbolic_matches_expanded_component_form() {
        let expanded = parse_model(
            "params a e; fields phi A0 A1;
             L = 1/2*(dt(phi)^2 - dx(phi)^2) + e*(dt(phi) + dx(phi))*(A0 - A1)
               + 1/2*(dt(A1) - dx(A0))^2 + 1/2*a*e^2*(A0^2 - A1^2);",
        )
        .unwrap();
        assert_eq!(jr_symbolic(), expanded);
    }

    #[test]
    fn symbolic_at_unit_parameters_is_a1() {
        let one = BigRational::from_integer(1.into());
        let m = jr_symbolic()
            .substitute("a", &one)
            .unwrap()
            .substitute("e", &one)
            .unwrap();
        assert_eq!(m, preset_model("jr-a1").unwrap().model);
    }

    #[test]
    fn preset_shapes() {
        assert_eq!(preset_model("jr-a1").unwrap().model.n_fields(), 3);
        assert_eq!(
            preset_model("jr-wz").unwrap().model.fields(),
            ["phi", "A0", "A1", "theta"]
        );
        assert_eq!(
            preset_model("jr-wz-gaugefixed")
                .unwrap()
                .gauge
                .unwrap()
                .len(),
            2
        );
        assert!(matches!(
            preset_model("nope"),
            Err(ModelError::UnknownPreset(_))
        ));
    }
}
