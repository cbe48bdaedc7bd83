//! Initial-condition library. Each case bundles a grid, the mixture closure
//! with its relaxation times, the final time and the initial field.

use std::f64::consts::PI;

use crate::eos::{MixtureEOS, PhaseParams};
use crate::error::{Result, SolverError};
use crate::imex::RunConfig;
use crate::state::{mach_numbers, Bc, BoundarySampler, Field, Grid, State};
use crate::vortex::{sample_field, VortexParams, VortexProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RiemannId {
    Rp1,
    Rp2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlphaProfile {
    Constant,
    Smooth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VortexKind {
    Compressible,
    WeaklyCompressible,
}

#[derive(Debug, Clone)]
pub struct CaseSpec {
    pub name: String,
    pub grid: Grid,
    pub eos: MixtureEOS,
    pub t_final: f64,
    /// Lower bound on the speed used in the CFL step.
    pub speed_floor: f64,
    pub initial: Field,
    /// Exact solution, when the case has one; also fills Dirichlet ghosts.
    pub exact: Option<VortexProfile>,
    /// Ratio of the phase Mach numbers the materials were chosen for.
    pub physical_mach_ratio: Option<f64>,
}

impl CaseSpec {
    pub fn sampler(&self) -> Option<&dyn BoundarySampler> {
        self.exact.as_ref().map(|p| p as &dyn BoundarySampler)
    }

    pub fn run_config(&self, order: u8, nu: f64) -> RunConfig {
        RunConfig {
            speed_floor: self.speed_floor,
            ..RunConfig::new(nu, self.t_final, order)
        }
    }
}

fn phases(g1: f64, cv1: f64, g2: f64, cv2: f64) -> Result<(PhaseParams, PhaseParams)> {
    Ok((PhaseParams::new(g1, cv1)?, PhaseParams::new(g2, cv2)?))
}

/// `c_v,2` that sets the phase sound-speed ratio to `C` at equal temperature.
pub fn cv2_for_mach_ratio(p1: &PhaseParams, gamma2: f64, c: f64) -> f64 {
    p1.gamma * (p1.gamma - 1.0) * p1.cv / (gamma2 * (gamma2 - 1.0)) * c * c
}

/// `ρ₂` in pressure equilibrium with `ρ₁` at equal temperature.
pub fn rho2_equilibrium(p1: &PhaseParams, p2: &PhaseParams, rho1: f64) -> f64 {
    p1.r_gas() / p2.r_gas() * rho1
}

/// RP1 and RP2 on `[0, 1]` with the jump at `x = 0.5`, transmissive ends and no relaxation.
pub fn riemann_case(id: RiemannId, n: usize) -> Result<CaseSpec> {
    if n < 8 {
        return Err(SolverError::Config(format!("Riemann case needs n >= 8, got {n}")));
    }
    let (p1, p2) = phases(1.4, 1.0, 2.0, 1.0)?;
    let eos = MixtureEOS::homogeneous(p1, p2);
    let grid = Grid::new_1d(n, 0.0, 1.0, Bc::Transmissive)?;
    // (α₁, ρ₁, ρ₂, v, T)
    let (left, right) = match id {
        RiemannId::Rp1 => ((0.3, 2.0, 1.2, 0.0, 1.2), (0.3, 2.0, 2.0, 0.0, 1.0)),
        RiemannId::Rp2 => ((0.7, 1.0, 2.0, -1.0, 1.0), (0.3, 1.0, 2.0, 1.0, 1.0)),
    };
    let initial = Field::from_fn(&grid, |x| {
        let (a, r1, r2, v, t) = if x[0] < 0.5 { left } else { right };
        State::from_phase_velocities(a, r1, r2, [v, 0.0], [v, 0.0], t, &eos)
    })?;
    Ok(CaseSpec {
        name: match id {
            RiemannId::Rp1 => "rp1".into(),
            RiemannId::Rp2 => "rp2".into(),
        },
        grid,
        eos,
        t_final: 0.2,
        speed_floor: 1.0,
        initial,
        exact: None,
        physical_mach_ratio: None,
    })
}

/// Bubble of phase 1 advected diagonally through phase 2 on the periodic unit square.
///
/// `τ_w = 1e-8` for `C ≤ 10` and `1e-12` above.
pub fn bubble_case(c: f64, n: usize) -> Result<CaseSpec> {
    if !(c > 0.0) {
        return Err(SolverError::Config(format!("Mach ratio must be positive, got {c}")));
    }
    let p1 = PhaseParams::new(1.4, 1.0)?;
    let p2 = PhaseParams::new(2.0, cv2_for_mach_ratio(&p1, 2.0, c))?;
    let tau_w = if c <= 10.0 { 1e-8 } else { 1e-12 };
    let eos = MixtureEOS::new(p1, p2, 1.0, 1e-16, tau_w)?;
    let grid = Grid::new_2d(n, n, [0.0, 0.0], [1.0, 1.0], Bc::Periodic)?;
    let rho1 = 2.0;
    let rho2 = rho2_equilibrium(&p1, &p2, rho1);
    let initial = Field::from_fn(&grid, |x| {
        State::from_phase_values(bubble_alpha(x), rho1, rho2, [1.0, 1.0], [0.0; 2], 2.0, &eos)
    })?;
    Ok(CaseSpec {
        name: format!("bubble-c{c}"),
        grid,
        eos,
        t_final: 1.0,
        speed_floor: 0.0,
        initial,
        exact: None,
        physical_mach_ratio: Some(c),
    })
}

/// Initial volume fraction of the bubble.
pub fn bubble_alpha(x: [f64; 2]) -> f64 {
    let (al, ar, theta, r0) = (0.9, 0.1, 2000.0, 0.2);
    let r = (x[0] - 0.5).hypot(x[1] - 0.5);
    (al - ar) * (-theta * (r - r0)).atan() / PI + 0.5 * (al + ar)
}

/// Piecewise-exponential shear-layer profile in `y` with plateaus `left`/`right`.
fn kh_profile(y: f64, left: f64, right: f64, m: f64) -> f64 {
    let l = 0.025;
    if y < 0.25 {
        left - m * ((y - 0.25) / l).exp()
    } else if y < 0.5 {
        right + m * (-(y - 0.25) / l).exp()
    } else if y < 0.75 {
        right + m * ((y - 0.75) / l).exp()
    } else {
        left - m * (-(y - 0.75) / l).exp()
    }
}

/// Mixture velocity of the shear flow.
pub fn kh_velocity(x: [f64; 2]) -> [f64; 2] {
    let (vl, vr) = (0.5, -0.5);
    [kh_profile(x[1], vl, vr, 0.5 * (vl - vr)), 1e-2 * (4.0 * PI * x[0]).sin()]
}

/// Volume fraction of the shear flow.
pub fn kh_alpha(x: [f64; 2]) -> f64 {
    let (al, ar) = (0.9, 0.2);
    kh_profile(x[1], al, ar, (ar - al) / 8.0)
}

/// Kelvin-Helmholtz shear layers with `c_v,1 = 1/ε²`. `τ_w` is the square of
/// the computed initial maximum mixture Mach number.
pub fn kelvin_helmholtz_case(eps: f64, n: usize) -> Result<CaseSpec> {
    if !(eps > 0.0) {
        return Err(SolverError::Config(format!("eps must be positive, got {eps}")));
    }
    let p1 = PhaseParams::new(2.0, 1.0 / (eps * eps))?;
    let p2 = PhaseParams::new(1.4, cv2_for_mach_ratio(&p1, 1.4, 1.0))?;
    let rho1 = 1.0;
    let rho2 = rho2_equilibrium(&p1, &p2, rho1);
    let t = 12.5;
    let grid = Grid::new_2d(n, n, [0.0, 0.0], [1.0, 1.0], Bc::Periodic)?;
    let hom = MixtureEOS::homogeneous(p1, p2);
    let mut m_max: f64 = 0.0;
    let initial = Field::from_fn(&grid, |x| {
        let q = State::from_phase_values(kh_alpha(x), rho1, rho2, kh_velocity(x), [0.0; 2], t, &hom)?;
        let m = mach_numbers(q.alpha1, &q.to_primitives(&hom)?, &hom)?;
        m_max = m_max.max(m.mix);
        Ok(q)
    })?;
    let eos = MixtureEOS::new(p1, p2, 1.0, 1e-16, m_max * m_max)?;
    Ok(CaseSpec {
        name: format!("kh-eps{eps}"),
        grid,
        eos,
        t_final: 3.0,
        speed_floor: 0.0,
        initial,
        exact: None,
        physical_mach_ratio: Some(1.0),
    })
}

/// Well-prepared low-Mach data: constant pressures `1/M²`, unit sound-speed
/// Mach scaling, divergence-free cellular velocity, `w = 0`, `τ_w = M²`.
pub fn well_prepared_case(mach: f64, alpha: AlphaProfile, n: usize) -> Result<CaseSpec> {
    if !(mach > 0.0 && mach <= 1.0) {
        return Err(SolverError::Config(format!("Mach number must lie in (0, 1], got {mach}")));
    }
    let (g1, g2) = (1.4, 2.0);
    let cv = |g: f64| 1.0 / (g * (g - 1.0) * mach * mach);
    let (p1, p2) = phases(g1, cv(g1), g2, cv(g2))?;
    let eos = MixtureEOS::new(p1, p2, 1.0, 1e-16, mach * mach)?;
    let grid = Grid::new_2d(n, n, [0.0, 0.0], [1.0, 1.0], Bc::Periodic)?;
    let initial = Field::from_fn(&grid, |x| {
        let (sx, cx) = (2.0 * PI * x[0]).sin_cos();
        let (sy, cy) = (2.0 * PI * x[1]).sin_cos();
        let a = match alpha {
            AlphaProfile::Constant => 0.5,
            AlphaProfile::Smooth => 0.5 + 0.2 * sx * sy,
        };
        // ρ_l = γ_l gives p_l = 1/M² at T = 1
        State::from_phase_values(a, g1, g2, [sx * cy, -cx * sy], [0.0; 2], 1.0, &eos)
    })?;
    Ok(CaseSpec {
        name: format!("well-prepared-m{mach}"),
        grid,
        eos,
        t_final: f64::INFINITY,
        speed_floor: 0.0,
        initial,
        exact: None,
        physical_mach_ratio: Some(1.0),
    })
}

/// Stationary vortex on `[−1, 1]²` with exact Dirichlet ghosts, `T_f = 1`.
pub fn vortex_case(kind: VortexKind, n: usize) -> Result<CaseSpec> {
    let prm = match kind {
        VortexKind::Compressible => VortexParams::compressible(),
        VortexKind::WeaklyCompressible => VortexParams::weakly_compressible(),
    };
    let profile = VortexProfile::new(&prm)?;
    let grid = Grid::new_2d(n, n, [-1.0, -1.0], [1.0, 1.0], Bc::DirichletExact)?;
    let initial = sample_field(&profile, &grid)?;
    Ok(CaseSpec {
        name: match kind {
            VortexKind::Compressible => "vortex-compressible".into(),
            VortexKind::WeaklyCompressible => "vortex-weakly-compressible".into(),
        },
        grid,
        eos: prm.eos(),
        t_final: 1.0,
        speed_floor: 0.0,
        initial,
        exact: Some(profile),
        physical_mach_ratio: None,
    })
}

/// Case by name, as used by the command line. Parameters not implied by the
/// name take the defaults of [`CaseParams`].
pub fn case_by_name(name: &str, n: usize, prm: &CaseParams) -> Result<CaseSpec> {
    match name {
        "rp1" => riemann_case(RiemannId::Rp1, n),
        "rp2" => riemann_case(RiemannId::Rp2, n),
        "bubble" => bubble_case(prm.mach_ratio, n),
        "kh" | "kelvin-helmholtz" => kelvin_helmholtz_case(prm.eps, n),
        "well-prepared" => well_prepared_case(prm.mach, AlphaProfile::Constant, n),
        "well-prepared-smooth" => well_prepared_case(prm.mach, AlphaProfile::Smooth, n),
        "vortex-compressible" => vortex_case(VortexKind::Compressible, n),
        "vortex-weakly-compressible" => vortex_case(VortexKind::WeaklyCompressible, n),
        other => Err(SolverError::Config(format!("unknown case '{other}'"))),
    }
}

/// Names accepted by [`case_by_name`].
pub const CASE_NAMES: &[&str] = &[
    "rp1",
    "rp2",
    "bubble",
    "kh",
    "well-prepared",
    "well-prepared-smooth",
    "vortex-compressible",
    "vortex-weakly-compressible",
];

/// Free parameters of the parametrized cases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaseParams {
    /// Bubble Mach ratio `C`.
    pub mach_ratio: f64,
    /// Kelvin-Helmholtz `ε`.
    pub eps: f64,
    /// Well-prepared Mach number.
    pub mach: f64,
}

impl Default for CaseParams {
    fn default() -> Self {
        Self {
            mach_ratio: 10.0,
            eps: 1.0,
            mach: 0.1,
        }
    }
}
