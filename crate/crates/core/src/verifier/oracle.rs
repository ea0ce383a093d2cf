use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dirac::{BracketReport, ConstraintSet, DiracError};
use crate::legendre::{Coord, PhaseDensity};
use crate::symkernel::OpRat;

use super::grid::{apply_poly, poly_matrix, spectral_derivative_matrix, TestFunction};
use super::{sorted_bindings, CheckRecord, VerifyError};

pub const ORACLE_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub n: usize,
    pub seed: u64,
    pub modes: usize,
}

impl OracleConfig {
    pub fn new(n: usize, seed: u64) -> Self {
        OracleConfig { n, seed, modes: 8 }
    }

    fn check(&self) -> Result<(), VerifyError> {
        if self.n < 8 || self.n % 2 != 0 || 2 * self.modes >= self.n {
            return Err(VerifyError::InvalidConfig(format!(
                "grid of {} points cannot resolve {} modes",
                self.n, self.modes
            )));
        }
        Ok(())
    }

    fn draw(&self) -> (TestFunction, TestFunction) {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let f = TestFunction::random(&mut rng, self.modes);
        let g = TestFunction::random(&mut rng, self.modes);
        (f, g)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleComparison {
    pub numeric: f64,
    pub symbolic: f64,
    pub rel_error: f64,
}

/// `integral f(y) (k(D) g)(y) dy`, mode by mode.
fn smeared_kernel(
    k: &OpRat,
    f: &TestFunction,
    g: &TestFunction,
    b: &HashMap<String, f64>,
) -> Result<f64, VerifyError> {
    let mut acc = 0.0;
    for m in 1..=f.modes() {
        let km = k.eval(b, Complex64::new(0.0, m as f64))?;
        acc += PI * (f.amplitude(m) * (km * g.amplitude(m)).conj()).re;
    }
    Ok(acc)
}

fn compare(numeric: f64, symbolic: f64, f: &TestFunction, g: &TestFunction) -> OracleComparison {
    let scale = symbolic.abs().max(f.norm() * g.norm());
    OracleComparison {
        numeric,
        symbolic,
        rel_error: (numeric - symbolic).abs() / scale,
    }
}

/// Coefficient polynomial of `coord` in `d`, evaluated and adjointed: `P(-D)`.
fn adjoint_coeffs(
    d: &PhaseDensity,
    c: Coord,
    b: &HashMap<String, f64>,
) -> Result<Vec<f64>, VerifyError> {
    Ok(d.coeff(c).adjoint().real_coeffs(b)?)
}

fn canonical(d: &PhaseDensity) -> Result<(), VerifyError> {
    if d.is_canonical() {
        Ok(())
    } else {
        Err(DiracError::CoordinateMismatch.into())
    }
}

/// Compare `{F[f], G[g]}`, computed on a grid from the finite-dimensional
/// canonical bracket, with the claimed kernel smeared against `f` and `g`.
pub fn smeared_bracket_oracle(
    fd: &PhaseDensity,
    gd: &PhaseDensity,
    kernel: &OpRat,
    bindings: &HashMap<String, f64>,
    cfg: &OracleConfig,
) -> Result<OracleComparison, VerifyError> {
    cfg.check()?;
    canonical(fd)?;
    canonical(gd)?;
    let d = spectral_derivative_matrix(cfg.n);
    smeared_with(fd, gd, kernel, bindings, cfg, &d)
}

fn smeared_with(
    fd: &PhaseDensity,
    gd: &PhaseDensity,
    kernel: &OpRat,
    b: &HashMap<String, f64>,
    cfg: &OracleConfig,
    d: &DMatrix<f64>,
) -> Result<OracleComparison, VerifyError> {
    let (f, g) = cfg.draw();
    let (fv, gv) = (f.sample(cfg.n), g.sample(cfg.n));
    let dx = 2.0 * PI / cfg.n as f64;
    // dF/dz_c (x_j) = dx (P_c(-D) f)_j; the 1/dx of the lattice bracket leaves one dx.
    let grad =
        |dens: &PhaseDensity, c: Coord, v: &DVector<f64>| -> Result<DVector<f64>, VerifyError> {
            Ok(apply_poly(&adjoint_coeffs(dens, c, b)?, d, v))
        };
    let fields: Vec<usize> = fd
        .coords()
        .chain(gd.coords())
        .map(|c| match c {
            Coord::Field(i) | Coord::Momentum(i) => i,
            _ => unreachable!("checked canonical"),
        })
        .collect();
    let mut numeric = 0.0;
    let mut seen = Vec::new();
    for i in fields {
        if seen.contains(&i) {
            continue;
        }
        seen.push(i);
        let (q, p) = (Coord::Field(i), Coord::Momentum(i));
        numeric += dx * grad(fd, q, &fv)?.dot(&grad(gd, p, &gv)?);
        numeric -= dx * grad(fd, p, &fv)?.dot(&grad(gd, q, &gv)?);
    }
    Ok(compare(numeric, smeared_kernel(kernel, &f, &g, b)?, &f, &g))
}

/// Every entry of the constraint bracket matrix against the oracle, once per seed.
pub fn delta_oracle(
    cs: &ConstraintSet,
    model: &str,
    bindings: &HashMap<String, f64>,
    n: usize,
    seeds: &[u64],
) -> Result<Vec<CheckRecord>, VerifyError> {
    let delta = cs.delta().ok_or(DiracError::NotClassified)?;
    let d = spectral_derivative_matrix(n);
    let params = sorted_bindings(bindings);
    let mut out = Vec::new();
    for &seed in seeds {
        for (i, ci) in cs.constraints.iter().enumerate() {
            for (j, cj) in cs.constraints.iter().enumerate() {
                let cfg = OracleConfig::new(
                    n,
                    seed.wrapping_mul(1_000_003)
                        .wrapping_add((i * cs.len() + j) as u64),
                );
                cfg.check()?;
                let k = OpRat::from_poly(delta.get(i, j).clone());
                let c = smeared_with(&ci.density, &cj.density, &k, bindings, &cfg, &d)?;
                out.push(CheckRecord::new(
                    format!("delta-oracle {},{} seed {}", ci.label, cj.label, seed),
                    model,
                    params.clone(),
                    c.rel_error,
                    ORACLE_TOLERANCE,
                ));
            }
        }
    }
    Ok(out)
}

/// Discrete constraint surface on a spectral grid. Dirac brackets are formed
/// with the pseudo-inverse of the lattice bracket matrix, so zero-mean test
/// functions see the true inverse.
struct DiracLattice {
    n: usize,
    dx: f64,
    d: DMatrix<f64>,
    coords: Vec<Coord>,
    /// Constraint point values as rows over all canonical lattice variables.
    l: DMatrix<f64>,
    pinv: DMatrix<f64>,
}

impl DiracLattice {
    fn new(cs: &ConstraintSet, b: &HashMap<String, f64>, n: usize) -> Result<Self, VerifyError> {
        let d = spectral_derivative_matrix(n);
        let coords = cs.space.canonical_coords();
        let dx = 2.0 * PI / n as f64;
        let m = cs.len();
        let mut l = DMatrix::zeros(m * n, coords.len() * n);
        for (s, c) in cs.constraints.iter().enumerate() {
            for (ci, &coord) in coords.iter().enumerate() {
                let p = c.density.coeff(coord);
                if p.is_zero() {
                    continue;
                }
                let block = poly_matrix(&p.real_coeffs(b)?, &d);
                l.view_mut((s * n, ci * n), (n, n)).copy_from(&block);
            }
        }
        let jl = Self::apply_j(&coords, n, &l.transpose());
        let delta = &l * &jl / dx;
        let eps = 1e-10 * delta.amax().max(1.0);
        let pinv = delta
            .pseudo_inverse(eps)
            .map_err(|e| VerifyError::InvalidConfig(format!("pseudo-inverse failed: {e}")))?;
        Ok(DiracLattice {
            n,
            dx,
            d,
            coords,
            l,
            pinv,
        })
    }

    /// `J x` for the block symplectic form pairing `Field(i)` with `Momentum(i)`.
    fn apply_j(coords: &[Coord], n: usize, x: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(x.nrows(), x.ncols());
        for (ci, &c) in coords.iter().enumerate() {
            let (partner, sign) = match c {
                Coord::Field(i) => (Coord::Momentum(i), 1.0),
                Coord::Momentum(i) => (Coord::Field(i), -1.0),
                _ => continue,
            };
            let pj = coords
                .iter()
                .position(|&x| x == partner)
                .expect("canonical pairs");
            let rows = x.rows(pj * n, n) * sign;
            out.rows_mut(ci * n, n).copy_from(&rows);
        }
        out
    }

    /// Gradient of `integral f(y) D(y) dy` over the lattice variables.
    fn functional(
        &self,
        dens: &PhaseDensity,
        f: &DVector<f64>,
        b: &HashMap<String, f64>,
    ) -> Result<DMatrix<f64>, VerifyError> {
        let mut v = DMatrix::zeros(self.coords.len() * self.n, 1);
        for (ci, &c) in self.coords.iter().enumerate() {
            let p = dens.coeff(c);
            if p.is_zero() {
                continue;
            }
            let col = apply_poly(&p.adjoint().real_coeffs(b)?, &self.d, f) * self.dx;
            v.view_mut((ci * self.n, 0), (self.n, 1)).copy_from(&col);
        }
        Ok(v)
    }

    fn bracket(
        &self,
        u: &PhaseDensity,
        v: &PhaseDensity,
        f: &DVector<f64>,
        g: &DVector<f64>,
        b: &HashMap<String, f64>,
    ) -> Result<f64, VerifyError> {
        let au = self.functional(u, f, b)?;
        let av = self.functional(v, g, b)?;
        let jav = Self::apply_j(&self.coords, self.n, &av);
        let plain = (au.transpose() * &jav)[(0, 0)] / self.dx;
        let jau = Self::apply_j(&self.coords, self.n, &au);
        // {U, C} = -(J a_u)^T L^T / dx since J^T = -J
        let uc = -(&self.l * jau) / self.dx;
        let cv = &self.l * jav / self.dx;
        let corr = (uc.transpose() * &self.pinv * cv)[(0, 0)];
        Ok(plain - corr)
    }
}

/// Dirac bracket of two smeared densities on the lattice, against a claimed kernel.
pub fn dirac_bracket_oracle(
    u: &PhaseDensity,
    v: &PhaseDensity,
    cs: &ConstraintSet,
    kernel: &OpRat,
    bindings: &HashMap<String, f64>,
    cfg: &OracleConfig,
) -> Result<OracleComparison, VerifyError> {
    cfg.check()?;
    canonical(u)?;
    canonical(v)?;
    let lat = DiracLattice::new(cs, bindings, cfg.n)?;
    let (f, g) = cfg.draw();
    let num = lat.bracket(u, v, &f.sample(cfg.n), &g.sample(cfg.n), bindings)?;
    Ok(compare(
        num,
        smeared_kernel(kernel, &f, &g, bindings)?,
        &f,
        &g,
    ))
}

/// Every ordered pair of canonical coordinates, including vanishing entries.
pub fn dirac_oracle(
    cs: &ConstraintSet,
    report: &BracketReport,
    model: &str,
    bindings: &HashMap<String, f64>,
    n: usize,
    seed: u64,
) -> Result<Vec<CheckRecord>, VerifyError> {
    let lat = DiracLattice::new(cs, bindings, n)?;
    let params = sorted_bindings(bindings);
    let coords = cs.space.canonical_coords();
    let mut out = Vec::new();
    for (i, &u) in coords.iter().enumerate() {
        for (j, &v) in coords.iter().enumerate() {
            let cfg = OracleConfig::new(
                n,
                seed.wrapping_mul(1_000_003)
                    .wrapping_add((i * coords.len() + j) as u64),
            );
            cfg.check()?;
            let (f, g) = cfg.draw();
            let (un, vn) = (cs.space.name(u), cs.space.name(v));
            let k = report.kernel(&un, &vn);
            let num = lat.bracket(
                &PhaseDensity::coord(u),
                &PhaseDensity::coord(v),
                &f.sample(n),
                &g.sample(n),
                bindings,
            )?;
            let c = compare(num, smeared_kernel(&k, &f, &g, bindings)?, &f, &g);
            out.push(CheckRecord::new(
                format!("dirac-oracle [{un},{vn}] seed {seed}"),
                model,
                params.clone(),
                c.rel_error,
                ORACLE_TOLERANCE,
            ));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symkernel::{OpPoly, ParamRat};

    fn coord(c: Coord) -> PhaseDensity {
        PhaseDensity::coord(c)
    }

    #[test]
    fn canonical_pair() {
        let b = HashMap::new();
        let c = smeared_bracket_oracle(
            &coord(Coord::Field(0)),
            &coord(Coord::Momentum(0)),
            &OpRat::one(),
            &b,
            &OracleConfig::new(64, 7),
        )
        .unwrap();
        assert!(c.rel_error < 1e-8, "{c:?}");
        let wrong = smeared_bracket_oracle(
            &coord(Coord::Field(0)),
            &coord(Coord::Momentum(0)),
            &OpRat::constant(ParamRat::int(2)),
            &b,
            &OracleConfig::new(64, 7),
        )
        .unwrap();
        assert!(wrong.rel_error > 1e-3, "{wrong:?}");
    }

    #[test]
    fn derivative_kernel_sign() {
        // {dx(phi)(y), pi(x)} = d_y delta(y - x)
        let f = PhaseDensity::term(Coord::Field(0), OpPoly::d());
        let b = HashMap::new();
        let cfg = OracleConfig::new(64, 3);
        let ok = smeared_bracket_oracle(
            &f,
            &coord(Coord::Momentum(0)),
            &OpRat::from_poly(OpPoly::d()),
            &b,
            &cfg,
        )
        .unwrap();
        assert!(ok.rel_error < 1e-10, "{ok:?}");
        let flipped = OpRat::from_poly(OpPoly::from_ints(&[0, -1]));
        let bad =
            smeared_bracket_oracle(&f, &coord(Coord::Momentum(0)), &flipped, &b, &cfg).unwrap();
        assert!(bad.rel_error > 1e-3, "{bad:?}");
    }

    #[test]
    fn rejects_coarse_grid() {
        let cfg = OracleConfig::new(12, 0);
        assert!(cfg.check().is_err());
    }
}
