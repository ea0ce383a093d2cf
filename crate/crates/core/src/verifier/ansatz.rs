use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{CheckRecord, VerifyError};

/// `sum c cos(w t - k x) + s sin(w t - k x)`, differentiated exactly.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Wave {
    modes: Vec<[f64; 4]>,
}

impl Wave {
    pub fn cos(omega: f64, k: f64, amp: f64) -> Wave {
        Wave {
            modes: vec![[omega, k, amp, 0.0]],
        }
    }

    pub fn dt(&self) -> Wave {
        Wave {
            modes: self
                .modes
                .iter()
                .map(|&[w, k, c, s]| [w, k, s * w, -c * w])
                .collect(),
        }
    }

    pub fn dx(&self) -> Wave {
        Wave {
            modes: self
                .modes
                .iter()
                .map(|&[w, k, c, s]| [w, k, -s * k, c * k])
                .collect(),
        }
    }

    /// `dt^2 - dx^2`
    pub fn box_op(&self) -> Wave {
        self.dt().dt().sub(&self.dx().dx())
    }

    pub fn add(&self, rhs: &Wave) -> Wave {
        let mut modes = self.modes.clone();
        modes.extend_from_slice(&rhs.modes);
        Wave { modes }
    }

    pub fn sub(&self, rhs: &Wave) -> Wave {
        self.add(&rhs.scale(-1.0))
    }

    pub fn scale(&self, f: f64) -> Wave {
        Wave {
            modes: self
                .modes
                .iter()
                .map(|&[w, k, c, s]| [w, k, c * f, s * f])
                .collect(),
        }
    }

    pub fn eval(&self, t: f64, x: f64) -> f64 {
        self.modes
            .iter()
            .map(|&[w, k, c, s]| {
                let th = w * t - k * x;
                c * th.cos() + s * th.sin()
            })
            .sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlaneWaveConfig {
    pub a: f64,
    pub e: f64,
    pub k: f64,
    pub amp_sigma: f64,
    pub amp_h: f64,
}

impl PlaneWaveConfig {
    pub fn new(a: f64, e: f64, k: f64) -> Self {
        PlaneWaveConfig {
            a,
            e,
            k,
            amp_sigma: 1.0,
            amp_h: 0.5,
        }
    }

    pub fn validate(&self) -> Result<(), VerifyError> {
        if !(self.a.is_finite() && self.a > 1.0) {
            return Err(VerifyError::Domain(format!(
                "a = {} but the mass formula needs a > 1 (pole at a = 1)",
                self.a
            )));
        }
        if !self.e.is_finite() || self.e == 0.0 {
            return Err(VerifyError::Domain("e must be finite and nonzero".into()));
        }
        if !self.k.is_finite() {
            return Err(VerifyError::InvalidConfig("k must be finite".into()));
        }
        Ok(())
    }

    /// `a^2 e^2 / (a - 1)`
    pub fn mass_squared(&self) -> f64 {
        self.a * self.a * self.e * self.e / (self.a - 1.0)
    }
}

/// Sample points `t_i in [0, t_max]`, `x_j in [-x_max, x_max]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleGrid {
    pub nt: usize,
    pub nx: usize,
    pub t_max: f64,
    pub x_max: f64,
}

impl Default for SampleGrid {
    fn default() -> Self {
        SampleGrid {
            nt: 17,
            nx: 33,
            t_max: 2.0 * std::f64::consts::PI,
            x_max: std::f64::consts::PI,
        }
    }
}

impl SampleGrid {
    pub fn points(&self) -> Vec<(f64, f64)> {
        let step = |n: usize, span: f64, i: usize| {
            if n > 1 {
                span * i as f64 / (n - 1) as f64
            } else {
                0.0
            }
        };
        let mut out = Vec::with_capacity(self.nt * self.nx);
        for i in 0..self.nt {
            for j in 0..self.nx {
                out.push((
                    step(self.nt, self.t_max, i),
                    -self.x_max + step(self.nx, 2.0 * self.x_max, j),
                ));
            }
        }
        out
    }
}

/// Scalar, massless mode and upper-index gauge potential of the plane-wave
/// solution.
#[derive(Clone, Debug, PartialEq)]
pub struct AnsatzFields {
    pub cfg: PlaneWaveConfig,
    pub m2: f64,
    pub omega: f64,
    pub sigma: Wave,
    pub h: Wave,
    pub phi: Wave,
    /// `A^0`, `A^1`
    pub a_up: [Wave; 2],
}

impl AnsatzFields {
    /// Lower-index potential `A_0 = A^0`, `A_1 = -A^1`.
    pub fn a_down(&self) -> [Wave; 2] {
        [self.a_up[0].clone(), self.a_up[1].scale(-1.0)]
    }

    /// `F = eps^{mu nu} d_mu A_nu = d_t A_1 - d_x A_0`.
    pub fn field_strength(&self) -> Wave {
        let [a0, a1] = self.a_down();
        a1.dt().sub(&a0.dx())
    }
}

pub fn ansatz_fields(cfg: &PlaneWaveConfig) -> Result<AnsatzFields, VerifyError> {
    cfg.validate()?;
    let m2 = cfg.mass_squared();
    let omega = (cfg.k * cfg.k + m2).sqrt();
    let sigma = Wave::cos(omega, cfg.k, cfg.amp_sigma);
    let h = Wave::cos(cfg.k, cfg.k, cfg.amp_h);
    let phi = sigma.sub(&h);
    let (a, e) = (cfg.a, cfg.e);
    let pre = -1.0 / (a * e);
    // A^mu = -(1/(a e)) [d^mu phi + (1 - a) eps^{mu nu} d_nu phi - a eps^{mu nu} d_nu h]
    let a0 = phi
        .dt()
        .add(&phi.dx().scale(1.0 - a))
        .sub(&h.dx().scale(a))
        .scale(pre);
    let a1 = phi
        .dx()
        .scale(-1.0)
        .sub(&phi.dt().scale(1.0 - a))
        .add(&h.dt().scale(a))
        .scale(pre);
    Ok(AnsatzFields {
        cfg: *cfg,
        m2,
        omega,
        sigma,
        h,
        phi,
        a_up: [a0, a1],
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnsatzReport {
    pub m2: f64,
    pub omega: f64,
    pub records: Vec<CheckRecord>,
}

impl AnsatzReport {
    pub fn pass(&self) -> bool {
        super::all_pass(&self.records)
    }

    pub fn value(&self, check: &str) -> Option<f64> {
        self.records
            .iter()
            .find(|r| r.check == check)
            .map(|r| r.value)
    }
}

pub const ANSATZ_TOLERANCE: f64 = 1e-10;

/// Max over the grid of `|sum of terms|`, divided by the largest single term.
fn scaled_residual(grid: &SampleGrid, terms: &[Wave]) -> f64 {
    let mut res: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for (t, x) in grid.points() {
        let vals: Vec<f64> = terms.iter().map(|w| w.eval(t, x)).collect();
        res = res.max(vals.iter().sum::<f64>().abs());
        scale = vals.iter().fold(scale, |s, v| s.max(v.abs()));
    }
    if scale == 0.0 {
        res
    } else {
        res / scale
    }
}

/// Residuals of the field equations, the Klein-Gordon property of `F` and
/// `F = -a e (phi + h)` over the sample grid.
pub fn verify_ansatz(
    cfg: &PlaneWaveConfig,
    grid: &SampleGrid,
) -> Result<AnsatzReport, VerifyError> {
    let f = ansatz_fields(cfg)?;
    let (a, e) = (cfg.a, cfg.e);
    let [a0, a1] = f.a_down();
    let [u0, u1] = &f.a_up;

    // box phi + e (g^{mu nu} - eps^{mu nu}) d_mu A_nu
    let scalar = vec![
        f.phi.box_op(),
        a0.dt().scale(e),
        a1.dx().scale(-e),
        a1.dt().scale(-e),
        a0.dx().scale(e),
    ];
    // d_mu F^{mu nu} = box A^nu - d^nu (d_mu A^mu), plus e (g^{nu mu} + eps^{nu mu}) d_mu phi + a e^2 A^nu
    let div = u0.dt().add(&u1.dx());
    let maxwell0 = vec![
        u0.box_op(),
        div.dt().scale(-1.0),
        f.phi.dt().scale(e),
        f.phi.dx().scale(e),
        u0.scale(a * e * e),
    ];
    let maxwell1 = vec![
        u1.box_op(),
        div.dx(),
        f.phi.dx().scale(-e),
        f.phi.dt().scale(-e),
        u1.scale(a * e * e),
    ];
    let fs = f.field_strength();
    let kg = vec![fs.box_op(), fs.scale(f.m2)];
    let ident = vec![fs.clone(), f.phi.add(&f.h).scale(a * e)];

    let params: BTreeMap<String, f64> = [("a", a), ("e", e), ("k", cfg.k)]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
    let rec = |name: &str, terms: &[Wave]| {
        CheckRecord::new(
            name,
            "plane-wave",
            params.clone(),
            scaled_residual(grid, terms),
            ANSATZ_TOLERANCE,
        )
    };
    Ok(AnsatzReport {
        m2: f.m2,
        omega: f.omega,
        records: vec![
            rec("scalar-equation", &scalar),
            rec("maxwell-equation-0", &maxwell0),
            rec("maxwell-equation-1", &maxwell1),
            rec("klein-gordon-F", &kg),
            rec("F-identity", &ident),
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wave_derivatives() {
        let w = Wave::cos(2.0, 3.0, 1.0);
        let (t, x) = (0.3, -0.7);
        let th = 2.0 * t - 3.0 * x;
        assert!((w.dt().eval(t, x) + 2.0 * th.sin()).abs() < 1e-14);
        assert!((w.dx().eval(t, x) - 3.0 * th.sin()).abs() < 1e-14);
        assert!((w.box_op().eval(t, x) + (4.0 - 9.0) * th.cos()).abs() < 1e-13);
    }

    #[test]
    fn passes_at_a_two() {
        let r =
            verify_ansatz(&PlaneWaveConfig::new(2.0, 1.0, 0.7), &SampleGrid::default()).unwrap();
        assert_eq!(r.m2, 4.0);
        assert!(r.pass(), "{:?}", r.records);
    }

    #[test]
    fn mass_pole() {
        let err = verify_ansatz(&PlaneWaveConfig::new(1.0, 1.0, 0.5), &SampleGrid::default())
            .unwrap_err();
        assert!(matches!(err, VerifyError::Domain(_)));
        assert!(ansatz_fields(&PlaneWaveConfig::new(0.5, 1.0, 0.5)).is_err());
    }

    #[test]
    fn wrong_mass_fails() {
        // The Klein-Gordon residual is sensitive to the mass.
        let mut f = ansatz_fields(&PlaneWaveConfig::new(2.0, 1.0, 0.7)).unwrap();
        f.m2 = 3.9;
        let fs = f.field_strength();
        let r = scaled_residual(&SampleGrid::default(), &[fs.box_op(), fs.scale(f.m2)]);
        assert!(r > 1e-3);
    }
}
