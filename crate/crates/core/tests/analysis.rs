//! Symbolic pipeline on the built-in models against hand-derived values.
//! Entries that are easy to get wrong by hand are also checked numerically
//! in `oracle.rs`.

use dirac_engine::dirac::{
    add_gauge_fixing, classify, commutator_report, consistency_closure, ConstraintSet,
    MultiplierState, Provenance,
};
use dirac_engine::frontend::{parse_density, parse_model, preset_model, ModelIR};
use dirac_engine::legendre::PhaseDensity;
use dirac_engine::symkernel::{OpMatrix, OpPoly, OpRat, ParamRat};

fn analyzed(name: &str) -> (ModelIR, ConstraintSet) {
    let p = preset_model(name).unwrap();
    let cs = consistency_closure(&p.model).unwrap();
    let cs = match &p.gauge {
        Some(g) => add_gauge_fixing(&cs, g).unwrap(),
        None => classify(&cs).unwrap(),
    };
    (p.model, cs)
}

fn dens(src: &str, m: &ModelIR, cs: &ConstraintSet) -> PhaseDensity {
    parse_density(src, m.params(), &cs.space).unwrap()
}

fn pr(s: &str) -> ParamRat {
    s.parse().unwrap()
}

/// Kernel `c0 delta + c1 d_y delta + ...`.
fn k(cs: &[&str]) -> OpRat {
    OpRat::from_poly(OpPoly::from_coeffs(cs.iter().map(|c| pr(c)).collect()))
}

fn assert_chain(name: &str, expected: &[(&str, Provenance)]) {
    let (m, cs) = analyzed(name);
    let found: Vec<_> = cs
        .constraints
        .iter()
        .filter(|c| c.provenance != Provenance::Gauge)
        .collect();
    assert_eq!(found.len(), expected.len(), "{name}: constraint count");
    for (c, (src, prov)) in found.iter().zip(expected) {
        let want = dens(src, &m, &cs);
        // Sign normalization: either orientation is the same constraint.
        assert!(
            c.density == want || c.density == want.neg(),
            "{name} {}: got {}, want {src}",
            c.label,
            c.density.render(&cs.space)
        );
        assert_eq!(c.provenance, *prov, "{name} {}", c.label);
    }
}

#[test]
fn a1_constraint_chain() {
    use Provenance::*;
    assert_chain(
        "jr-a1",
        &[
            ("pi_A0", Primary),
            ("dx(pi_A1) + dx(phi) + pi_phi + A1", Secondary),
            ("pi_A1", Secondary),
            ("-pi_phi - dx(phi) - 2*A1 + A0", Secondary),
        ],
    );
    let (_, cs) = analyzed("jr-a1");
    let parents: Vec<_> = cs.constraints.iter().map(|c| c.parent).collect();
    assert_eq!(parents, vec![None, Some(0), Some(1), Some(2)]);
}

#[test]
fn wz_constraint_chain() {
    use Provenance::*;
    assert_chain(
        "jr-wz",
        &[
            ("pi_A0", Primary),
            ("pi_theta - A1 - dx(phi)", Primary),
            ("dx(pi_A1) + pi_phi + dx(phi) + A1", Secondary),
            ("pi_A1", Secondary),
        ],
    );
}

#[test]
fn wz_theta_multiplier_is_determined_not_constant() {
    // The derivative of the theta multiplier cancels in the time derivative of
    // C3, so the loop fixes it algebraically from C4 instead.
    let (m, cs) = analyzed("jr-wz");
    assert_eq!(cs.multipliers[0], MultiplierState::Free);
    let MultiplierState::Determined {
        coefficient,
        rest,
        source,
    } = &cs.multipliers[1]
    else {
        panic!("theta multiplier: {:?}", cs.multipliers[1]);
    };
    assert_eq!(*source, 3);
    assert_eq!(*coefficient, OpPoly::one());
    assert_eq!(
        *rest,
        dens("-dx(phi) + A0 - 2*A1 - dx(theta) - pi_phi", &m, &cs)
    );
    assert!(!cs
        .multipliers
        .iter()
        .any(|s| matches!(s, MultiplierState::SpatiallyConstant { .. })));
}

#[test]
fn symbolic_chain_stops_at_two() {
    use Provenance::*;
    assert_chain(
        "jr-symbolic",
        &[
            ("pi_A0", Primary),
            (
                "dx(pi_A1) + e*dx(phi) + e*pi_phi + (a-1)*e^2*A0 + e^2*A1",
                Secondary,
            ),
        ],
    );
}

#[test]
fn a1_delta_matrix() {
    let (_, cs) = analyzed("jr-a1");
    let want = [
        ["0", "0", "0", "-1"],
        ["0", "0", "1", "0"],
        ["0", "-1", "0", "2"],
        ["1", "0", "-2", "2*D"],
    ];
    let delta = cs.delta().unwrap();
    for (i, row) in want.iter().enumerate() {
        for (j, w) in row.iter().enumerate() {
            let w = if *w == "2*D" {
                OpPoly::monomial(pr("2"), 1)
            } else {
                OpPoly::constant(pr(w))
            };
            assert_eq!(*delta.get(i, j), w, "Delta[{i}][{j}]");
        }
    }
    assert_eq!(cs.delta_inverse().unwrap().get(0, 0).to_string(), "2*D");
}

#[test]
fn symbolic_delta_and_inverse() {
    let (_, cs) = analyzed("jr-symbolic");
    let delta = cs.delta().unwrap();
    // -(a-1) e^2, not -(a^2-1) e^2.
    assert_eq!(*delta.get(0, 1), OpPoly::constant(pr("-(a-1)*e^2")));
    assert_eq!(*delta.get(1, 0), OpPoly::constant(pr("(a-1)*e^2")));
    let inv = cs.delta_inverse().unwrap();
    assert_eq!(*inv.get(0, 0), OpRat::zero());
    assert_eq!(*inv.get(0, 1), k(&["1/(e^2*(a-1))"]));
    assert_eq!(*inv.get(1, 0), k(&["-1/(e^2*(a-1))"]));
    assert_eq!(*inv.get(1, 1), OpRat::zero());
}

fn multiply_back(cs: &ConstraintSet) {
    let delta = cs.delta().unwrap().to_rat();
    let inv = cs.delta_inverse().unwrap();
    let id = OpMatrix::<OpRat>::identity(cs.labels());
    assert_eq!(delta.mul(inv).unwrap(), id);
    assert_eq!(inv.mul(&delta).unwrap(), id);
}

#[test]
fn every_inverse_multiplies_back() {
    for name in ["jr-symbolic", "jr-a1", "jr-wz-gaugefixed"] {
        multiply_back(&analyzed(name).1);
    }
}

#[test]
fn classification() {
    let (_, s) = analyzed("jr-symbolic");
    assert!(s.is_second_class());
    assert_eq!(s.second_class_count(), 2);

    let (_, wz) = analyzed("jr-wz");
    let det = wz.delta().unwrap().det().unwrap();
    assert!(det.is_zero());
    assert_eq!(wz.first_class_basis().len(), 2);
    assert_eq!(wz.second_class_count(), 2);
    assert!(wz.delta_inverse().is_none());
    // The row and column of C1 vanish identically.
    let d = wz.delta().unwrap();
    assert!((0..4).all(|j| d.get(0, j).is_zero() && d.get(j, 0).is_zero()));

    let (_, gf) = analyzed("jr-wz-gaugefixed");
    assert_eq!(gf.len(), 6);
    assert!(gf.is_second_class());
    assert_eq!(
        gf.delta().unwrap().det().unwrap(),
        OpRat::from_poly(OpPoly::monomial(pr("-1"), 2))
    );
}

#[test]
fn gauge_fixed_delta_matrix() {
    let (_, cs) = analyzed("jr-wz-gaugefixed");
    let want: [[&[&str]; 6]; 6] = [
        [&[], &[], &[], &[], &[], &["-1"]],
        [&[], &[], &[], &["-1"], &["0", "-1"], &["0", "2"]],
        [&[], &[], &[], &["1"], &[], &[]],
        [&[], &["1"], &["-1"], &[], &[], &["2"]],
        [&[], &["0", "-1"], &[], &[], &[], &[]],
        [&["1"], &["0", "2"], &[], &["-2"], &[], &["0", "2"]],
    ];
    let d = cs.delta().unwrap();
    for i in 0..6 {
        for j in 0..6 {
            assert_eq!(
                OpRat::from_poly(d.get(i, j).clone()),
                k(want[i][j]),
                "Delta[{i}][{j}]"
            );
        }
    }
}

fn check_table(name: &str, table: &[(&str, &str, &[&str])]) {
    let (_, cs) = analyzed(name);
    let rep = commutator_report(&cs).unwrap();
    for (l, r, want) in table {
        assert_eq!(rep.kernel(l, r), k(want), "{name}: [{l}, {r}]");
    }
    let listed: Vec<_> = table
        .iter()
        .map(|(l, r, _)| (l.to_string(), r.to_string()))
        .collect();
    for e in &rep.entries {
        let hit = listed
            .iter()
            .any(|(l, r)| (*l == e.left && *r == e.right) || (*l == e.right && *r == e.left));
        assert!(
            hit || e.kernel.is_zero(),
            "{name}: unexpected [{}, {}]",
            e.left,
            e.right
        );
    }
}

#[test]
fn symbolic_dirac_brackets() {
    check_table(
        "jr-symbolic",
        &[
            ("phi", "pi_phi", &["1"]),
            ("A1", "pi_A1", &["1"]),
            ("A0", "A1", &["0", "1/(e^2*(a-1))"]),
            ("A0", "phi", &["1/(e*(a-1))"]),
            ("A0", "pi_A1", &["-1/(a-1)"]),
            // sign confirmed by the oracle
            ("A0", "pi_phi", &["0", "-1/(e*(a-1))"]),
        ],
    );
}

#[test]
fn a1_dirac_brackets() {
    check_table(
        "jr-a1",
        &[
            ("A0", "phi", &["1"]),
            ("A1", "phi", &["1"]),
            ("phi", "pi_phi", &["1"]),
            ("A0", "pi_phi", &["0", "-1"]),
            ("A1", "pi_phi", &["0", "-1"]),
            ("A0", "A0", &["0", "2"]),
            ("A0", "A1", &["0", "2"]),
            ("A1", "A1", &["0", "2"]),
        ],
    );
}

#[test]
fn gauge_fixed_dirac_brackets() {
    check_table(
        "jr-wz-gaugefixed",
        &[
            ("A0", "phi", &["1"]),
            ("A1", "phi", &["1"]),
            ("phi", "pi_phi", &["1"]),
            ("A0", "pi_phi", &["0", "-1"]),
            ("A1", "pi_phi", &["0", "-1"]),
            ("A0", "A0", &["0", "2"]),
            ("A0", "A1", &["0", "2"]),
            ("A1", "A1", &["0", "2"]),
            // theta sector, engine values (see oracle.rs)
            ("pi_theta", "phi", &["1"]),
            ("A0", "pi_theta", &["0", "1"]),
            ("A1", "pi_theta", &["0", "1"]),
        ],
    );
}

#[test]
fn theta_sector_collapses() {
    let (_, cs) = analyzed("jr-wz-gaugefixed");
    let rep = commutator_report(&cs).unwrap();
    // theta is strongly constant once -dx(theta) is a second-class constraint.
    assert!(rep.kernel("theta", "pi_theta").is_zero());
    assert!(rep.kernel("pi_theta", "pi_phi").is_zero());
    assert!(rep.kernel("pi_theta", "pi_theta").is_zero());
    assert_ne!(rep.kernel("pi_theta", "phi"), k(&["-1"]));
}

#[test]
fn specializing_symbolic_reaches_a1() {
    let sym = preset_model("jr-symbolic").unwrap().model;
    let one = pr("1").as_rational().unwrap();
    let m = sym
        .substitute("a", &one)
        .unwrap()
        .substitute("e", &one)
        .unwrap();
    let a1 = preset_model("jr-a1").unwrap().model;
    assert_eq!(m.lagrangian(), a1.lagrangian());
    let lhs = consistency_closure(&m).unwrap();
    let rhs = consistency_closure(&a1).unwrap();
    assert_eq!(lhs.densities(), rhs.densities());
}

#[test]
fn model_files_match_presets() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/../../models");
    for name in ["jr-symbolic", "jr-a1", "jr-wz"] {
        let src = std::fs::read_to_string(format!("{dir}/{name}.lag")).unwrap();
        let m = parse_model(&src).unwrap();
        let p = preset_model(name).unwrap().model;
        assert_eq!(m.lagrangian(), p.lagrangian(), "{name}");
        assert_eq!(m.fields(), p.fields());
    }
}
