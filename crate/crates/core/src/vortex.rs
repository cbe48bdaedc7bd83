//! Stationary two-fluid vortex: radial ODE for `(ρ₁, T)`, its RK4 solution
//! table, and sampling onto Cartesian grids.

use std::io::Write;
use std::path::Path;

use crate::eos::{MixtureEOS, PhaseParams};
use crate::error::{domain, Result, SolverError};
use crate::state::{BoundarySampler, Field, Grid, MachNumbers, State};

/// Profile constants and materials of the vortex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VortexParams {
    pub c_alpha: f64,
    pub alpha_c: f64,
    pub nu_alpha: f64,
    pub v_c1: f64,
    pub v_c2: f64,
    pub nu_v1: f64,
    pub nu_v2: f64,
    /// `ρ₂ = c_ρ ρ₁`
    pub c_rho: f64,
    pub rho1_0: f64,
    pub t_0: f64,
    pub phase1: PhaseParams,
    pub phase2: PhaseParams,
}

impl VortexParams {
    fn with_phases(phase1: PhaseParams, phase2: PhaseParams) -> Self {
        Self {
            c_alpha: 0.4,
            alpha_c: 1e-5,
            nu_alpha: 10.0,
            v_c1: 2e-6,
            v_c2: 2.5e-6,
            nu_v1: 15.0,
            nu_v2: 14.0,
            c_rho: 1.0,
            rho1_0: 1.0,
            t_0: 2.0,
            phase1,
            phase2,
        }
    }

    /// `γ = 7/5, 5/3`, `c_v = 1, 1`.
    pub fn compressible() -> Self {
        Self::with_phases(
            PhaseParams { gamma: 1.4, cv: 1.0 },
            PhaseParams {
                gamma: 5.0 / 3.0,
                cv: 1.0,
            },
        )
    }

    /// `γ = 2, 2.8`, `c_v = 20, 20`.
    pub fn weakly_compressible() -> Self {
        Self::with_phases(PhaseParams { gamma: 2.0, cv: 20.0 }, PhaseParams { gamma: 2.8, cv: 20.0 })
    }

    /// Homogeneous mixture (no relaxation) of the two materials.
    pub fn eos(&self) -> MixtureEOS {
        MixtureEOS::homogeneous(self.phase1, self.phase2)
    }

    /// `(α₁, dα₁/dr)`
    pub fn alpha(&self, r: f64) -> (f64, f64) {
        let e = self.alpha_c * (self.nu_alpha * (1.0 - r * r)).exp();
        (self.c_alpha + e, -2.0 * self.nu_alpha * r * e)
    }

    /// Angular velocity `v_θ,l / r` of both phases.
    pub fn omega(&self, r: f64) -> (f64, f64) {
        (
            self.v_c1 * (self.nu_v1 * (1.0 - r * r)).exp(),
            self.v_c2 * (self.nu_v2 * (1.0 - r * r)).exp(),
        )
    }

    /// `(v_θ,1, v_θ,2, dv_θ,1/dr, dv_θ,2/dr)`
    pub fn velocities(&self, r: f64) -> (f64, f64, f64, f64) {
        let (o1, o2) = self.omega(r);
        (
            r * o1,
            r * o2,
            o1 * (1.0 - 2.0 * self.nu_v1 * r * r),
            o2 * (1.0 - 2.0 * self.nu_v2 * r * r),
        )
    }
}

/// Right-hand side `(dρ₁/dr, dT/dr)` of the stationary radial balance.
pub fn vortex_rhs(r: f64, rho1: f64, t: f64, prm: &VortexParams) -> Result<[f64; 2]> {
    if !(rho1 > 0.0) {
        return Err(domain("rho1", rho1, "nonpositive density in vortex ODE"));
    }
    if !(t > 0.0) {
        return Err(domain("T", t, "nonpositive temperature in vortex ODE"));
    }
    let (p1, p2) = (&prm.phase1, &prm.phase2);
    let rho2 = prm.c_rho * rho1;
    let (a1, da) = prm.alpha(r);
    let a2 = 1.0 - a1;
    let (r1g, r2g) = (p1.r_gas(), p2.r_gas());
    let s1 = p1.entropy(rho1, t)?;
    let s2 = p2.entropy(rho2, t)?;
    let m = [
        [
            a1 * r1g * t + a2 * prm.c_rho * r2g * t,
            a1 * r1g * rho1 + a2 * r2g * rho2,
        ],
        [r1g * t / rho1 - prm.c_rho * r2g * t / rho2, (r1g - s1) - (r2g - s2)],
    ];
    let (v1, v2, dv1, dv2) = prm.velocities(r);
    let (o1, o2) = prm.omega(r);
    let rho = a1 * rho1 + a2 * rho2;
    let y1 = a1 * rho1 / rho;
    let v = y1 * v1 + (1.0 - y1) * v2;
    // (1/r) d(r w)/dr = w/r + dw/dr, with w/r finite at the axis
    let curl_w = (o1 - o2) + (dv1 - dv2);
    let b = [
        r * (a1 * rho1 * o1 * o1 + a2 * rho2 * o2 * o2) - (p1.pressure(rho1, t) - p2.pressure(rho2, t)) * da,
        -(v1 * dv1 - v2 * dv2) + v * curl_w,
    ];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let scale = m[0][0].abs().max(m[0][1].abs()) * m[1][0].abs().max(m[1][1].abs());
    if !(det.abs() > 1e-14 * scale) {
        return Err(domain("vortex ODE determinant", det, "singular system (coincident phases)"));
    }
    Ok([
        (b[0] * m[1][1] - m[0][1] * b[1]) / det,
        (m[0][0] * b[1] - m[1][0] * b[0]) / det,
    ])
}

/// Radial interpolation scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interp {
    Linear,
    CubicHermite,
}

/// RK4 solution table on a uniform radial grid.
#[derive(Debug, Clone)]
pub struct VortexProfile {
    pub params: VortexParams,
    pub dr: f64,
    pub r: Vec<f64>,
    pub rho1: Vec<f64>,
    pub t: Vec<f64>,
    /// derivatives at the nodes, for Hermite interpolation
    pub drho1: Vec<f64>,
    pub dt: Vec<f64>,
    pub interp: Interp,
}

fn integrate(prm: &VortexParams, r_max: f64, dr: f64) -> Result<(Vec<f64>, Vec<[f64; 2]>)> {
    let n = (r_max / dr).ceil() as usize;
    let mut r = Vec::with_capacity(n + 1);
    let mut y = Vec::with_capacity(n + 1);
    let mut cur = [prm.rho1_0, prm.t_0];
    r.push(0.0);
    y.push(cur);
    let f = |r: f64, y: [f64; 2]| vortex_rhs(r, y[0], y[1], prm);
    let add = |y: [f64; 2], h: f64, k: [f64; 2]| [y[0] + h * k[0], y[1] + h * k[1]];
    for i in 0..n {
        let r0 = i as f64 * dr;
        let k1 = f(r0, cur)?;
        let k2 = f(r0 + 0.5 * dr, add(cur, 0.5 * dr, k1))?;
        let k3 = f(r0 + 0.5 * dr, add(cur, 0.5 * dr, k2))?;
        let k4 = f(r0 + dr, add(cur, dr, k3))?;
        for c in 0..2 {
            cur[c] += dr / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
        }
        r.push((i + 1) as f64 * dr);
        y.push(cur);
    }
    Ok((r, y))
}

/// Integrate from the axis to `r_max` with step `dr` and check that halving
/// the step changes `T(r_max)` by less than `1e-10`.
pub fn build_profile(prm: &VortexParams, r_max: f64, dr: f64) -> Result<VortexProfile> {
    if !(r_max >= 2f64.sqrt()) {
        return Err(domain("r_max", r_max, "must cover the domain diagonal"));
    }
    if !(dr > 0.0 && dr < r_max) {
        return Err(domain("dr", dr, "step must lie in (0, r_max)"));
    }
    let (r, y) = integrate(prm, r_max, dr)?;
    let (_, yh) = integrate(prm, r_max, 0.5 * dr)?;
    let diff = (y.last().unwrap()[1] - yh.last().unwrap()[1]).abs();
    if !(diff < 1e-10) {
        return Err(SolverError::Accuracy(format!(
            "halving dr changes T(r_max) by {diff:e}"
        )));
    }
    let mut drho1 = Vec::with_capacity(r.len());
    let mut dt = Vec::with_capacity(r.len());
    for (ri, yi) in r.iter().zip(&y) {
        let d = vortex_rhs(*ri, yi[0], yi[1], prm)?;
        drho1.push(d[0]);
        dt.push(d[1]);
    }
    Ok(VortexProfile {
        params: *prm,
        dr,
        rho1: y.iter().map(|v| v[0]).collect(),
        t: y.iter().map(|v| v[1]).collect(),
        r,
        drho1,
        dt,
        interp: Interp::CubicHermite,
    })
}

impl VortexProfile {
    /// Default table: `r_max = 2.2`, `dr = 1e-4`.
    pub fn new(prm: &VortexParams) -> Result<Self> {
        build_profile(prm, 2.2, 1e-4)
    }

    /// `(ρ₁, T)` at radius `r`.
    pub fn lookup(&self, r: f64) -> Result<(f64, f64)> {
        let r_end = *self.r.last().unwrap();
        if !(r >= 0.0 && r <= r_end) {
            return Err(domain("r", r, "outside the vortex table"));
        }
        let k = ((r / self.dr) as usize).min(self.r.len() - 2);
        let s = (r - self.r[k]) / self.dr;
        let val = |y: &[f64], d: &[f64]| match self.interp {
            Interp::Linear => y[k] + s * (y[k + 1] - y[k]),
            Interp::CubicHermite => {
                let s2 = s * s;
                let s3 = s2 * s;
                (2.0 * s3 - 3.0 * s2 + 1.0) * y[k]
                    + (s3 - 2.0 * s2 + s) * self.dr * d[k]
                    + (-2.0 * s3 + 3.0 * s2) * y[k + 1]
                    + (s3 - s2) * self.dr * d[k + 1]
            }
        };
        Ok((val(&self.rho1, &self.drho1), val(&self.t, &self.dt)))
    }

    /// Exact state at a point of the plane.
    pub fn state_at(&self, x: [f64; 2]) -> Result<State> {
        let r = x[0].hypot(x[1]);
        let (rho1, t) = self.lookup(r)?;
        let prm = &self.params;
        let (a1, _) = prm.alpha(r);
        let (o1, o2) = prm.omega(r);
        // v_θ e_θ = (v_θ/r)(−y, x)
        let v1 = [-o1 * x[1], o1 * x[0]];
        let v2 = [-o2 * x[1], o2 * x[0]];
        State::from_phase_velocities(a1, rho1, prm.c_rho * rho1, v1, v2, t, &prm.eos())
    }

    /// Maximum Mach numbers over the table up to radius `r_lim`.
    pub fn max_mach(&self, r_lim: f64) -> Result<MachNumbers> {
        let prm = &self.params;
        let mut out = MachNumbers {
            m1: 0.0,
            m2: 0.0,
            mix: 0.0,
        };
        for (k, &r) in self.r.iter().enumerate().filter(|(_, &r)| r <= r_lim) {
            let (a1, _) = prm.alpha(r);
            let (v1, v2, _, _) = prm.velocities(r);
            let (rho1, t) = (self.rho1[k], self.t[k]);
            let rho2 = prm.c_rho * rho1;
            let y1 = a1 * rho1 / (a1 * rho1 + (1.0 - a1) * rho2);
            let c1 = prm.phase1.sound_speed_sq(t);
            let c2 = prm.phase2.sound_speed_sq(t);
            let v = y1 * v1 + (1.0 - y1) * v2;
            out.m1 = out.m1.max(v1.abs() / c1.sqrt());
            out.m2 = out.m2.max(v2.abs() / c2.sqrt());
            out.mix = out.mix.max(v.abs() / (y1 * c1 + (1.0 - y1) * c2).sqrt());
        }
        Ok(out)
    }

    /// CSV with columns `r, rho1, rho2, T, v_theta1, v_theta2, alpha1`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(w, "r,rho1,rho2,T,v_theta1,v_theta2,alpha1")?;
        let prm = &self.params;
        for (k, &r) in self.r.iter().enumerate() {
            let (v1, v2, _, _) = prm.velocities(r);
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                r,
                self.rho1[k],
                prm.c_rho * self.rho1[k],
                self.t[k],
                v1,
                v2,
                prm.alpha(r).0
            )?;
        }
        w.flush()?;
        Ok(())
    }
}

impl BoundarySampler for VortexProfile {
    fn sample(&self, x: [f64; 2]) -> Result<State> {
        self.state_at(x)
    }
}

/// Point values of the exact vortex at the cell centres of `grid`.
pub fn sample_field(profile: &VortexProfile, grid: &Grid) -> Result<Field> {
    Field::from_fn(grid, |x| profile.state_at(x))
}
