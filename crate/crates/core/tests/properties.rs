//! Algebraic laws of the operator kernels and the bracket.

use dirac_engine::dirac::poisson_bracket;
use dirac_engine::legendre::{Coord, PhaseDensity};
use dirac_engine::symkernel::{OpMatrix, OpPoly, OpRat, ParamRat};
use proptest::prelude::*;

fn poly() -> impl Strategy<Value = OpPoly> {
    prop::collection::vec((-4i64..=4, 1i64..=3), 0..4).prop_map(|cs| {
        OpPoly::from_coeffs(cs.into_iter().map(|(n, d)| ParamRat::ratio(n, d)).collect())
    })
}

fn nonzero_poly() -> impl Strategy<Value = OpPoly> {
    poly().prop_filter("nonzero", |p| !p.is_zero())
}

fn coord() -> impl Strategy<Value = Coord> {
    (0usize..3, any::<bool>()).prop_map(|(i, m)| {
        if m {
            Coord::Momentum(i)
        } else {
            Coord::Field(i)
        }
    })
}

fn density() -> impl Strategy<Value = PhaseDensity> {
    prop::collection::vec((coord(), poly()), 0..4).prop_map(PhaseDensity::from_terms)
}

proptest! {
    #[test]
    fn ring_laws(a in poly(), b in poly(), c in poly()) {
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&(&a - &a), &OpPoly::zero());
    }

    #[test]
    fn adjoint_is_an_involution(a in poly(), b in poly()) {
        prop_assert_eq!(a.adjoint().adjoint(), a.clone());
        prop_assert_eq!((&a * &b).adjoint(), &a.adjoint() * &b.adjoint());
    }

    #[test]
    fn division_with_remainder(a in poly(), b in nonzero_poly()) {
        let (q, r) = a.div_rem(&b).unwrap();
        prop_assert_eq!(&(&q * &b) + &r, a);
        prop_assert!(r.degree() < b.degree() || r.is_zero());
    }

    #[test]
    fn fractions_are_canonical(a in nonzero_poly(), b in nonzero_poly(), c in nonzero_poly()) {
        let x = OpRat::new(&a * &c, &b * &c).unwrap();
        let y = OpRat::new(a.clone(), b.clone()).unwrap();
        prop_assert_eq!(&x, &y);
        prop_assert_eq!(x.to_string(), y.to_string());
        prop_assert_eq!(&x * &y.recip().unwrap(), OpRat::one());
    }

    #[test]
    fn bracket_is_antisymmetric(f in density(), g in density()) {
        let fg = poisson_bracket(&f, &g).unwrap();
        let gf = poisson_bracket(&g, &f).unwrap();
        prop_assert_eq!(fg, -&gf.adjoint());
    }

    #[test]
    fn bracket_is_bilinear(f in density(), g in density(), h in density()) {
        let lhs = poisson_bracket(&f.add(&g), &h).unwrap();
        let rhs = &poisson_bracket(&f, &h).unwrap() + &poisson_bracket(&g, &h).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn inverse_multiplies_back(a in nonzero_poly(), b in poly(), c in poly(), d in nonzero_poly()) {
        let m = OpMatrix::square(vec!["u".into(), "v".into()], vec![vec![a, b], vec![c, d]]).unwrap();
        if let Ok(inv) = m.inverse() {
            let id = OpMatrix::<OpRat>::identity(vec!["u".into(), "v".into()]);
            prop_assert_eq!(m.to_rat().mul(&inv).unwrap(), id);
        } else {
            prop_assert!(m.det().unwrap().is_zero());
        }
    }
}
