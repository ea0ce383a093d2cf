//! Numerical cross-checks of the symbolic brackets.

use std::collections::{BTreeMap, HashMap};

use dirac_engine::dirac::{
    add_gauge_fixing, classify, commutator_report, consistency_closure, ConstraintSet,
};
use dirac_engine::frontend::{parse_density, preset_model, ModelIR, PRESET_NAMES};
use dirac_engine::symkernel::{OpPoly, OpRat, ParamRat};
use dirac_engine::verifier::{
    default_bindings, delta_oracle, dirac_bracket_oracle, dirac_oracle, smeared_bracket_oracle,
    OracleConfig, ORACLE_TOLERANCE,
};

fn analyzed(name: &str) -> (ModelIR, ConstraintSet) {
    let p = preset_model(name).unwrap();
    let cs = consistency_closure(&p.model).unwrap();
    let cs = match &p.gauge {
        Some(g) => add_gauge_fixing(&cs, g).unwrap(),
        None => classify(&cs).unwrap(),
    };
    (p.model, cs)
}

fn bindings(m: &ModelIR) -> HashMap<String, f64> {
    default_bindings(m, &BTreeMap::new())
}

fn k(cs: &[&str]) -> OpRat {
    OpRat::from_poly(OpPoly::from_coeffs(
        cs.iter().map(|c| c.parse::<ParamRat>().unwrap()).collect(),
    ))
}

#[test]
fn every_delta_entry_matches() {
    for name in PRESET_NAMES {
        let (m, cs) = analyzed(name);
        let recs = delta_oracle(&cs, name, &bindings(&m), 512, &[1, 2, 3]).unwrap();
        assert_eq!(recs.len(), 3 * cs.len() * cs.len());
        for r in &recs {
            assert!(r.pass, "{name} {}: {:e}", r.check, r.value);
            assert_eq!(r.tolerance, ORACLE_TOLERANCE);
        }
    }
}

#[test]
fn delta_oracle_at_other_parameters() {
    let (_, cs) = analyzed("jr-symbolic");
    let b: HashMap<String, f64> = [("a".to_string(), 7.0), ("e".to_string(), -0.3)].into();
    assert!(delta_oracle(&cs, "jr-symbolic", &b, 256, &[9])
        .unwrap()
        .iter()
        .all(|r| r.pass));
}

#[test]
fn every_dirac_bracket_matches() {
    for name in ["jr-symbolic", "jr-a1", "jr-wz-gaugefixed"] {
        let (m, cs) = analyzed(name);
        let rep = commutator_report(&cs).unwrap();
        let n_coords = cs.space.canonical_coords().len();
        for seed in [1, 2] {
            let recs = dirac_oracle(&cs, &rep, name, &bindings(&m), 64, seed).unwrap();
            assert_eq!(recs.len(), n_coords * n_coords);
            for r in &recs {
                assert!(r.pass, "{name} {}: {:e}", r.check, r.value);
            }
        }
    }
}

/// Each entry against a plausible hand-derived alternative: the engine value
/// must pass and the alternative must not.
#[test]
fn disputed_entries() {
    let cases: &[(&str, &str, &str, &[&str], &[&str])] = &[
        (
            "jr-symbolic",
            "A0",
            "pi_phi",
            &["0", "-1/(e*(a-1))"],
            &["0", "1/(e*(a-1))"],
        ),
        ("jr-wz-gaugefixed", "theta", "pi_theta", &[], &["2"]),
        ("jr-wz-gaugefixed", "pi_theta", "phi", &["1"], &["-1"]),
        (
            "jr-wz-gaugefixed",
            "A0",
            "pi_theta",
            &["0", "1"],
            &["0", "2"],
        ),
        ("jr-wz-gaugefixed", "pi_theta", "pi_phi", &[], &["0", "1"]),
        (
            "jr-wz-gaugefixed",
            "pi_theta",
            "pi_theta",
            &[],
            &["0", "-2"],
        ),
    ];
    for (name, l, r, engine, other) in cases {
        let (m, cs) = analyzed(name);
        let u = parse_density(l, m.params(), &cs.space).unwrap();
        let v = parse_density(r, m.params(), &cs.space).unwrap();
        let b = bindings(&m);
        let rep = commutator_report(&cs).unwrap();
        assert_eq!(rep.kernel(l, r), k(engine), "{name} [{l},{r}]");
        for seed in [1, 2, 3] {
            let cfg = OracleConfig::new(64, seed);
            let good = dirac_bracket_oracle(&u, &v, &cs, &k(engine), &b, &cfg).unwrap();
            let bad = dirac_bracket_oracle(&u, &v, &cs, &k(other), &b, &cfg).unwrap();
            assert!(
                good.rel_error < ORACLE_TOLERANCE,
                "{name} [{l},{r}] engine {:e}",
                good.rel_error
            );
            assert!(
                bad.rel_error > 1e-3,
                "{name} [{l},{r}] alternative {:e}",
                bad.rel_error
            );
        }
    }
}

#[test]
fn disputed_delta_entry() {
    // {C1, C2} for the symbolic model: -(a-1) e^2 against -(a^2-1) e^2.
    let (m, cs) = analyzed("jr-symbolic");
    let f = &cs.constraints[0].density;
    let g = &cs.constraints[1].density;
    let b = bindings(&m);
    for seed in [1, 2, 3] {
        let cfg = OracleConfig::new(256, seed);
        let good = smeared_bracket_oracle(f, g, &k(&["-(a-1)*e^2"]), &b, &cfg).unwrap();
        let bad = smeared_bracket_oracle(f, g, &k(&["-(a^2-1)*e^2"]), &b, &cfg).unwrap();
        assert!(good.rel_error < ORACLE_TOLERANCE);
        assert!(bad.rel_error > 0.1);
    }
}

#[test]
fn oracle_is_deterministic() {
    let (m, cs) = analyzed("jr-a1");
    let a = delta_oracle(&cs, "jr-a1", &bindings(&m), 128, &[5]).unwrap();
    let b = delta_oracle(&cs, "jr-a1", &bindings(&m), 128, &[5]).unwrap();
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
}
