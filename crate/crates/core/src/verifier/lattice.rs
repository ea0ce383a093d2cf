use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dirac::{fix_gauge_multipliers, ConstraintSet, DiracError, MultiplierState};
use crate::frontend::ModelIR;
use crate::legendre::{legendre, Coord, PhaseDensity, PhaseSpace};
use crate::symkernel::{hermite_form, OpPoly};

use super::grid::TestFunction;
use super::VerifyError;

/// Periodic central-difference stencil `(offset, weight)`.
#[derive(Clone, Debug, Default, PartialEq)]
struct Stencil(Vec<(i64, f64)>);

impl Stencil {
    /// `sum_k c_k D^k` with `D z_j = (z_{j+1} - z_{j-1}) / (2 dx)`.
    fn from_coeffs(coeffs: &[f64], dx: f64) -> Stencil {
        let mut out: BTreeMap<i64, f64> = BTreeMap::new();
        let mut power: BTreeMap<i64, f64> = [(0, 1.0)].into();
        for c in coeffs {
            if *c != 0.0 {
                for (o, w) in &power {
                    *out.entry(*o).or_default() += c * w;
                }
            }
            let mut next: BTreeMap<i64, f64> = BTreeMap::new();
            for (o, w) in &power {
                *next.entry(o + 1).or_default() += w / (2.0 * dx);
                *next.entry(o - 1).or_default() -= w / (2.0 * dx);
            }
            power = next;
        }
        Stencil(out.into_iter().filter(|(_, w)| *w != 0.0).collect())
    }

    fn apply_add(&self, z: &[f64], out: &mut [f64]) {
        let n = z.len() as i64;
        for (j, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for &(off, w) in &self.0 {
                acc += w * z[(j as i64 + off).rem_euclid(n) as usize];
            }
            *o += acc;
        }
    }
}

/// `sum_c P_c(D) z_c` over the canonical coordinates, with polynomials
/// evaluated.
#[derive(Clone, Debug, Default, PartialEq)]
struct LinearOp(Vec<(usize, Stencil)>);

impl LinearOp {
    fn build(
        d: &PhaseDensity,
        coords: &[Coord],
        b: &HashMap<String, f64>,
        dx: f64,
    ) -> Result<LinearOp, VerifyError> {
        let mut out = Vec::new();
        for (c, p) in d.terms() {
            let idx = coords.iter().position(|x| x == c).ok_or_else(|| {
                VerifyError::Unsupported(format!("coordinate {c:?} has no lattice values"))
            })?;
            out.push((idx, Stencil::from_coeffs(&p.real_coeffs(b)?, dx)));
        }
        Ok(LinearOp(out))
    }

    fn apply(&self, z: &[Vec<f64>]) -> Vec<f64> {
        let mut out = vec![0.0; z[0].len()];
        for (c, s) in &self.0 {
            s.apply_add(&z[*c], &mut out);
        }
        out
    }
}

/// Field and momentum values on a periodic grid, in canonical coordinate order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeState {
    pub names: Vec<String>,
    pub data: Vec<Vec<f64>>,
    pub dx: f64,
    pub t: f64,
}

impl LatticeState {
    pub fn zeros(space: &PhaseSpace, n: usize, length: f64) -> Result<Self, VerifyError> {
        if n < 8 {
            return Err(VerifyError::InvalidConfig(format!(
                "lattice needs at least 8 points, got {n}"
            )));
        }
        let names: Vec<String> = space
            .canonical_coords()
            .into_iter()
            .map(|c| space.name(c))
            .collect();
        let data = vec![vec![0.0; n]; names.len()];
        Ok(LatticeState {
            names,
            data,
            dx: length / n as f64,
            t: 0.0,
        })
    }

    pub fn len(&self) -> usize {
        self.data.first().map_or(0, |v| v.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, name: &str) -> Option<&[f64]> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.data[i].as_slice())
    }

    pub fn set(&mut self, name: &str, values: Vec<f64>) -> Result<(), VerifyError> {
        let i =
            self.names.iter().position(|n| n == name).ok_or_else(|| {
                VerifyError::InvalidConfig(format!("no lattice coordinate '{name}'"))
            })?;
        if values.len() != self.len() {
            return Err(VerifyError::InvalidConfig(
                "array length differs from the lattice size".into(),
            ));
        }
        self.data[i] = values;
        Ok(())
    }

    /// Every coordinate drawn as a low-pass periodic function. Requires a
    /// `2 pi` domain.
    pub fn random_smooth(
        space: &PhaseSpace,
        n: usize,
        seed: u64,
        modes: usize,
    ) -> Result<Self, VerifyError> {
        let mut s = LatticeState::zeros(space, n, 2.0 * PI)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for v in &mut s.data {
            *v = TestFunction::random(&mut rng, modes)
                .sample(n)
                .iter()
                .copied()
                .collect();
        }
        Ok(s)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Discretized Hamilton equations, energy and constraints of one model.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeSystem {
    pub space: PhaseSpace,
    coords: Vec<Coord>,
    n: usize,
    dx: f64,
    /// Evolution with determined multipliers substituted.
    rhs: Vec<LinearOp>,
    /// Contribution of the free multipliers (constant in space).
    forcing: Vec<f64>,
    /// Pure canonical Hamilton equations, multipliers off.
    canonical_rhs: Vec<LinearOp>,
    energy: Vec<(usize, usize, Stencil)>,
    constraints: Vec<LinearOp>,
    constraint_densities: Vec<PhaseDensity>,
    bindings: HashMap<String, f64>,
}

/// Replace determined multipliers by their solutions. Fails when a
/// coefficient does not divide.
fn eliminate_multipliers(
    d: &PhaseDensity,
    states: &[MultiplierState],
) -> Result<PhaseDensity, VerifyError> {
    let mut out = d.clone();
    for _ in 0..=states.len() {
        let mut changed = false;
        for (a, st) in states.iter().enumerate() {
            let MultiplierState::Determined {
                coefficient, rest, ..
            } = st
            else {
                continue;
            };
            let v = out.coeff(Coord::Multiplier(a));
            if v.is_zero() {
                continue;
            }
            let q = v.div_exact(coefficient).ok_or_else(|| {
                VerifyError::Unsupported(format!("multiplier {a} enters through an operator that does not divide its coefficient"))
            })?;
            out = out
                .sub(&PhaseDensity::term(Coord::Multiplier(a), v))
                .sub(&rest.apply(&q));
            changed = true;
        }
        if !changed {
            return Ok(out);
        }
    }
    Err(VerifyError::Unsupported(
        "determined multipliers refer to each other cyclically".into(),
    ))
}

impl LatticeSystem {
    /// Domain `[0, length)` with `n` points.
    pub fn new(
        m: &ModelIR,
        cs: &ConstraintSet,
        bindings: &HashMap<String, f64>,
        n: usize,
        length: f64,
        free_multiplier: f64,
    ) -> Result<Self, VerifyError> {
        for p in m.params() {
            if !bindings.contains_key(p) {
                return Err(VerifyError::MissingBinding(p.clone()));
            }
        }
        if n < 8 {
            return Err(VerifyError::InvalidConfig(format!(
                "lattice needs at least 8 points, got {n}"
            )));
        }
        let leg = legendre(m).map_err(DiracError::from)?;
        let cs = &fix_gauge_multipliers(&leg, cs);
        let space = leg.space.clone();
        let coords = space.canonical_coords();
        let dx = length / n as f64;
        let eqs = leg.hamiltonian.equations();
        let mut rhs = Vec::new();
        let mut forcing = Vec::new();
        let mut canonical_rhs = Vec::new();
        for c in &coords {
            let e = eliminate_multipliers(&eqs[c], &cs.multipliers)?;
            let mut f = 0.0;
            for (k, p) in e.terms() {
                if let Coord::Multiplier(a) = k {
                    if matches!(cs.multipliers[*a], MultiplierState::Unresolved { .. }) {
                        return Err(VerifyError::Unsupported(format!(
                            "multiplier {a} is unresolved"
                        )));
                    }
                    // D annihilates the constant value.
                    f += p.constant_term().eval_f64(bindings)? * free_multiplier;
                }
            }
            forcing.push(f);
            rhs.push(LinearOp::build(
                &e.filter(|k| k.is_canonical()),
                &coords,
                bindings,
                dx,
            )?);
            canonical_rhs.push(LinearOp::build(
                &eqs[c].filter(|k| k.is_canonical()),
                &coords,
                bindings,
                dx,
            )?);
        }
        let mut energy = Vec::new();
        for ((a, b), p) in leg.hamiltonian.kernel() {
            let ia = coords
                .iter()
                .position(|x| x == a)
                .expect("canonical kernel");
            let ib = coords
                .iter()
                .position(|x| x == b)
                .expect("canonical kernel");
            energy.push((ia, ib, Stencil::from_coeffs(&p.real_coeffs(bindings)?, dx)));
        }
        let constraint_densities = cs.densities();
        let constraints = constraint_densities
            .iter()
            .map(|d| LinearOp::build(d, &coords, bindings, dx))
            .collect::<Result<_, _>>()?;
        Ok(LatticeSystem {
            space,
            coords,
            n,
            dx,
            rhs,
            forcing,
            canonical_rhs,
            energy,
            constraints,
            constraint_densities,
            bindings: bindings.clone(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    fn check_state(&self, s: &LatticeState) -> Result<(), VerifyError> {
        if s.data.len() != self.coords.len() || s.data.iter().any(|v| v.len() != self.n) {
            return Err(VerifyError::InvalidConfig(
                "state does not match the lattice system".into(),
            ));
        }
        Ok(())
    }

    fn linear(&self, z: &[Vec<f64>]) -> Vec<Vec<f64>> {
        self.rhs.iter().map(|op| op.apply(z)).collect()
    }

    pub fn time_derivative(&self, z: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let mut out = self.linear(z);
        for (v, f) in out.iter_mut().zip(&self.forcing) {
            if *f != 0.0 {
                v.iter_mut().for_each(|x| *x += f);
            }
        }
        out
    }

    /// `dx sum_j 1/2 z^T K(D) z`.
    pub fn energy(&self, z: &[Vec<f64>]) -> f64 {
        let mut total = 0.0;
        let mut buf = vec![0.0; self.n];
        for (a, b, s) in &self.energy {
            buf.iter_mut().for_each(|x| *x = 0.0);
            s.apply_add(&z[*b], &mut buf);
            total += z[*a].iter().zip(&buf).map(|(u, v)| u * v).sum::<f64>();
        }
        0.5 * self.dx * total
    }

    /// Largest pointwise constraint value.
    pub fn constraint_violation(&self, z: &[Vec<f64>]) -> f64 {
        self.constraints
            .iter()
            .flat_map(|c| c.apply(z))
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `d_nu J^nu` for the current `J^nu = d_mu F^{mu nu}` of the unit-charge
    /// model, rewritten through the field equations as
    /// `-(phi_tt - phi_xx + d_t A0 - d_x A1)`.
    fn current_divergence(&self, z: &[Vec<f64>]) -> Result<f64, VerifyError> {
        let find = |name: &str| {
            self.coords
                .iter()
                .position(|&c| self.space.name(c) == name)
                .ok_or_else(|| {
                    VerifyError::Unsupported(format!("current check needs a field '{name}'"))
                })
        };
        let (phi, a0, a1) = (find("phi")?, find("A0")?, find("A1")?);
        let zdot = self.time_derivative(z);
        let zddot = self.linear(&zdot);
        let d = Stencil::from_coeffs(&[0.0, 1.0], self.dx);
        let d2 = Stencil::from_coeffs(&[0.0, 0.0, 1.0], self.dx);
        let mut out = vec![0.0; self.n];
        d2.apply_add(&z[phi], &mut out);
        d.apply_add(&z[a1], &mut out);
        Ok(out
            .iter()
            .enumerate()
            .map(|(j, v)| (v - zddot[phi][j] - zdot[a0][j]).abs())
            .fold(0.0, f64::max))
    }

    fn rk4_step(&self, z: &[Vec<f64>], dt: f64) -> Vec<Vec<f64>> {
        let axpy = |z: &[Vec<f64>], k: &[Vec<f64>], h: f64| -> Vec<Vec<f64>> {
            z.iter()
                .zip(k)
                .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + h * y).collect())
                .collect()
        };
        let k1 = self.time_derivative(z);
        let k2 = self.time_derivative(&axpy(z, &k1, dt / 2.0));
        let k3 = self.time_derivative(&axpy(z, &k2, dt / 2.0));
        let k4 = self.time_derivative(&axpy(z, &k3, dt));
        z.iter()
            .enumerate()
            .map(|(c, v)| {
                v.iter()
                    .enumerate()
                    .map(|(j, x)| {
                        x + dt / 6.0 * (k1[c][j] + 2.0 * k2[c][j] + 2.0 * k3[c][j] + k4[c][j])
                    })
                    .collect()
            })
            .collect()
    }
}

/// Solve the constraints for dependent coordinates. Momenta are preferred as
/// pivots; when some pivot carries derivatives the projection falls back to a
/// dense least-squares correction.
pub fn project_constraints(
    sys: &LatticeSystem,
    s: &LatticeState,
) -> Result<LatticeState, VerifyError> {
    sys.check_state(s)?;
    let nf = sys.space.n_fields();
    let order: Vec<Coord> = (0..nf)
        .map(Coord::Momentum)
        .chain((0..nf).map(Coord::Field))
        .collect();
    let basis: Vec<Vec<OpPoly>> = sys
        .constraint_densities
        .iter()
        .map(|d| d.to_vector(&order))
        .collect();
    let form = hermite_form(&basis);
    let mut out = s.clone();
    if form.iter().all(|r| r.row[r.pivot].degree() == Some(0)) {
        let pivots: Vec<usize> = form.iter().map(|r| r.pivot).collect();
        // Pivot entries are 1 and vanish in every other row.
        for r in &form {
            let target = sys
                .coords
                .iter()
                .position(|&c| c == order[r.pivot])
                .expect("canonical");
            let rest = PhaseDensity::from_vector(&order, &r.row).filter(|c| c != order[r.pivot]);
            debug_assert!(rest
                .coords()
                .all(|c| !pivots.iter().any(|&p| order[p] == c)));
            let op = LinearOp::build(&rest, &sys.coords, &sys.bindings, sys.dx)?;
            out.data[target] = op.apply(&out.data).into_iter().map(|v| -v).collect();
        }
        return Ok(out);
    }
    let n = sys.n;
    let cols = sys.coords.len() * n;
    let mut l = DMatrix::<f64>::zeros(sys.constraints.len() * n, cols);
    for (s_idx, op) in sys.constraints.iter().enumerate() {
        for (c, st) in &op.0 {
            for j in 0..n {
                for &(off, w) in &st.0 {
                    let k = (j as i64 + off).rem_euclid(n as i64) as usize;
                    l[(s_idx * n + j, c * n + k)] += w;
                }
            }
        }
    }
    let z = DVector::from_iterator(cols, s.data.iter().flatten().copied());
    let pinv = l
        .clone()
        .pseudo_inverse(1e-10 * l.amax().max(1.0))
        .map_err(|e| VerifyError::InvalidConfig(format!("projection failed: {e}")))?;
    // A second pass mops up the rounding left by the first.
    let mut corrected = &z - &pinv * (&l * &z);
    corrected -= &pinv * (&l * &corrected);
    for (c, v) in out.data.iter_mut().enumerate() {
        v.copy_from_slice(corrected.rows(c * n, n).as_slice());
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolveConfig {
    pub dt: f64,
    pub steps: usize,
    /// Monitor the unit-charge current `d_nu J^nu`.
    pub current_check: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolveReport {
    pub steps: usize,
    pub dt: f64,
    pub t_end: f64,
    pub energy_initial: f64,
    /// Max over the run of `|E(t) - E(0)| / |E(0)|`.
    pub energy_drift: f64,
    /// Max over the run of the largest pointwise constraint value.
    pub constraint_drift: f64,
    /// Max `|z|` of the initial data.
    pub field_scale: f64,
    /// Max `|d_nu J^nu|` divided by `field_scale`.
    pub current_divergence: Option<f64>,
    pub warnings: Vec<String>,
    pub final_state: LatticeState,
}

/// Initial data must satisfy the constraints to `1e-12` of its own scale.
pub const INITIAL_CONSTRAINT_TOLERANCE: f64 = 1e-12;
pub const CONSTRAINT_DRIFT_TOLERANCE: f64 = 1e-6;
/// Relative to the initial energy.
pub const ENERGY_DRIFT_TOLERANCE: f64 = 1e-8;
/// Relative to the field scale.
pub const CURRENT_TOLERANCE: f64 = 1e-3;
pub const GRADIENT_TOLERANCE: f64 = 1e-6;
/// Halving `dt` must cut the energy drift by at least this factor.
pub const HALVING_FACTOR: f64 = 8.0;

/// RK4 integration of the discretized Hamilton equations.
pub fn evolve_lattice(
    sys: &LatticeSystem,
    init: &LatticeState,
    cfg: &EvolveConfig,
) -> Result<EvolveReport, VerifyError> {
    sys.check_state(init)?;
    if !(cfg.dt > 0.0 && cfg.dt.is_finite()) {
        return Err(VerifyError::InvalidConfig("dt must be positive".into()));
    }
    let scale = init.max_abs().max(f64::MIN_POSITIVE);
    let v0 = sys.constraint_violation(&init.data);
    if v0 > INITIAL_CONSTRAINT_TOLERANCE * scale.max(1.0) {
        return Err(VerifyError::InitialData { max: v0 });
    }
    let mut warnings = Vec::new();
    if cfg.dt > 0.5 * sys.dx {
        warnings.push(format!(
            "CFL: dt = {} exceeds 0.5*dx = {}",
            cfg.dt,
            0.5 * sys.dx
        ));
    }
    let e0 = sys.energy(&init.data);
    let mut z = init.data.clone();
    let mut energy_drift: f64 = 0.0;
    let mut constraint_drift = v0;
    let mut current = if cfg.current_check {
        Some(sys.current_divergence(&z)?)
    } else {
        None
    };
    for _ in 0..cfg.steps {
        z = sys.rk4_step(&z, cfg.dt);
        let e = sys.energy(&z);
        energy_drift = energy_drift.max((e - e0).abs() / e0.abs().max(f64::MIN_POSITIVE));
        constraint_drift = constraint_drift.max(sys.constraint_violation(&z));
        if let Some(c) = current.as_mut() {
            *c = c.max(sys.current_divergence(&z)?);
        }
    }
    let t_end = init.t + cfg.steps as f64 * cfg.dt;
    let mut final_state = init.clone();
    final_state.data = z;
    final_state.t = t_end;
    Ok(EvolveReport {
        steps: cfg.steps,
        dt: cfg.dt,
        t_end,
        energy_initial: e0,
        energy_drift,
        constraint_drift,
        field_scale: scale,
        current_divergence: current.map(|c| c / scale),
        warnings,
        final_state,
    })
}

/// Largest relative mismatch between the canonical lattice equations and
/// central differences of the lattice Hamiltonian.
pub fn gradient_check(sys: &LatticeSystem, s: &LatticeState, eps: f64) -> Result<f64, VerifyError> {
    sys.check_state(s)?;
    let flow: Vec<Vec<f64>> = sys
        .canonical_rhs
        .iter()
        .map(|op| op.apply(&s.data))
        .collect();
    let nf = sys.space.n_fields();
    let scale = flow
        .iter()
        .flatten()
        .fold(0.0_f64, |m, v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    let mut z = s.data.clone();
    let mut worst: f64 = 0.0;
    for c in 0..sys.coords.len() {
        // dz_q/dt = dH/dp / dx, dp/dt = -dH/dq / dx
        let (partner, sign) = if c < nf {
            (c + nf, 1.0)
        } else {
            (c - nf, -1.0)
        };
        for j in 0..sys.n {
            let orig = z[partner][j];
            z[partner][j] = orig + eps;
            let hp = sys.energy(&z);
            z[partner][j] = orig - eps;
            let hm = sys.energy(&z);
            z[partner][j] = orig;
            let fd = sign * (hp - hm) / (2.0 * eps) / sys.dx;
            worst = worst.max((fd - flow[c][j]).abs() / scale);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirac::consistency_closure;
    use crate::frontend::parse_model;

    #[test]
    fn stencil_powers() {
        let s = Stencil::from_coeffs(&[0.0, 0.0, 1.0], 0.5);
        assert_eq!(s.0, vec![(-2, 1.0), (0, -2.0), (2, 1.0)]);
        let z: Vec<f64> = (0..8).map(|j| (j as f64).powi(2)).collect();
        let mut out = vec![0.0; 8];
        Stencil::from_coeffs(&[1.0, 1.0], 1.0).apply_add(&z, &mut out);
        assert_eq!(out[3], 9.0 + (16.0 - 4.0) / 2.0);
    }

    fn free_scalar(n: usize) -> (LatticeSystem, LatticeState) {
        let m = parse_model("fields phi; L = 1/2*dt(phi)^2 - 1/2*dx(phi)^2;").unwrap();
        let cs = consistency_closure(&m).unwrap();
        let sys = LatticeSystem::new(&m, &cs, &HashMap::new(), n, 2.0 * PI, 0.0).unwrap();
        let s = LatticeState::random_smooth(&sys.space, n, 5, 4).unwrap();
        (sys, s)
    }

    #[test]
    fn free_scalar_energy_and_gradient() {
        let (sys, s) = free_scalar(32);
        assert!(gradient_check(&sys, &s, 1e-4).unwrap() < 1e-6);
        let r = evolve_lattice(
            &sys,
            &s,
            &EvolveConfig {
                dt: 0.01,
                steps: 200,
                current_check: false,
            },
        )
        .unwrap();
        assert!(r.energy_drift < 1e-6, "{}", r.energy_drift);
        assert!(r.warnings.is_empty());
    }

    #[test]
    fn cfl_warning() {
        let (sys, s) = free_scalar(16);
        let r = evolve_lattice(
            &sys,
            &s,
            &EvolveConfig {
                dt: 0.5,
                steps: 1,
                current_check: false,
            },
        )
        .unwrap();
        assert_eq!(r.warnings.len(), 1);
    }

    #[test]
    fn rejects_too_small() {
        let m = parse_model("fields phi; L = 1/2*dt(phi)^2;").unwrap();
        let cs = consistency_closure(&m).unwrap();
        assert!(LatticeSystem::new(&m, &cs, &HashMap::new(), 4, 1.0, 0.0).is_err());
    }
}
