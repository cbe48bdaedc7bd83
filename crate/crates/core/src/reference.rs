//! Fully explicit second-order SSP-RK2 solver for the complete, unsplit
//! system. Used as the oracle for the Riemann problems.

use crate::eos::{eval_thermo, MixtureEOS};
use crate::error::{Result, SolverError};
use crate::explicit::{explicit_rhs, Axis, ExplicitConfig, FluxModel};
use crate::implicit::relax_alpha;
use crate::state::{apply_bc, BoundarySampler, Field, State};

/// Complete conservative flux in direction `n`, written out term by term.
pub fn full_flux(q: &State, n: [f64; 2], eos: &MixtureEOS) -> Result<State> {
    let p = q.to_primitives(eos)?;
    let th = eval_thermo(q.alpha1, p.rho1, p.rho2, p.t, eos)?;
    let mu = eos.mu_diff(&th);
    let (rho, y1, y2) = (p.rho, p.y1, p.y2);
    let dot = |a: [f64; 2], b: [f64; 2]| a[0] * b[0] + a[1] * b[1];
    let (v, w) = (p.v, q.w);
    let vn = dot(v, n);
    let wn = dot(w, n);
    let w2 = dot(w, w);
    let ryy = rho * y1 * y2;
    // total potential of the relative velocity equation
    let psi = dot(w, v) + (1.0 - 2.0 * y1) * 0.5 * w2 + mu;
    Ok(State {
        alpha1: 0.0,
        m1: q.m1 * dot(p.v1, n),
        m2: q.m2 * dot(p.v2, n),
        mom: [
            rho * v[0] * vn + th.p_mix * n[0] + ryy * w[0] * wn,
            rho * v[1] * vn + th.p_mix * n[1] + ryy * w[1] * wn,
        ],
        w: [psi * n[0], psi * n[1]],
        rho_e: (q.rho_e + th.p_mix) * vn + ryy * psi * wn,
    })
}

/// Bound `max_l(|v_l·n| + a_l) + |w·n|` on the characteristic speeds of the full system.
pub fn full_wave_speed(q: &State, n: [f64; 2], eos: &MixtureEOS) -> Result<f64> {
    let p = q.to_primitives(eos)?;
    let a1 = eos.phase1.sound_speed_sq(p.t).sqrt();
    let a2 = eos.phase2.sound_speed_sq(p.t).sqrt();
    let s1 = (p.v1[0] * n[0] + p.v1[1] * n[1]).abs() + a1;
    let s2 = (p.v2[0] * n[0] + p.v2[1] * n[1]).abs() + a2;
    Ok(s1.max(s2) + (q.w[0] * n[0] + q.w[1] * n[1]).abs())
}

/// Largest full-system speed over interior cells and active axes.
pub fn max_full_speed(f: &Field, eos: &MixtureEOS) -> Result<f64> {
    let axes: &[Axis] = if f.grid.dims() == 1 { &[Axis::X] } else { &[Axis::X, Axis::Y] };
    let mut s: f64 = 0.0;
    for q in f.interior_states() {
        for &a in axes {
            s = s.max(full_wave_speed(q, a.normal(), eos)?);
        }
    }
    Ok(s)
}

/// Acoustic time step `ν Δx / s_max`.
pub fn reference_dt(f: &Field, nu: f64, eos: &MixtureEOS) -> Result<f64> {
    let s = max_full_speed(f, eos)?;
    if !(s > 0.0) {
        return Err(SolverError::Config("reference solver needs a nonzero speed bound".into()));
    }
    Ok(nu * f.grid.min_spacing() / s)
}

fn euler_substep(
    f: &Field,
    dt: f64,
    cfg: &ExplicitConfig,
    eos: &MixtureEOS,
    exact: Option<&dyn BoundarySampler>,
) -> Result<Field> {
    let mut src = f.clone();
    apply_bc(&mut src, exact)?;
    let rate = explicit_rhs(&src, cfg, eos)?;
    let mut out = src;
    out.axpy(dt, &rate);
    // first-order split relaxation after each stage
    if eos.tau_alpha.is_finite() {
        relax_alpha(&mut out, dt, eos)?;
    }
    if eos.tau_w.is_finite() {
        for (i, j) in out.grid.clone().interior() {
            let q = out.at_mut(i, j);
            let rho = q.rho();
            let y1y2 = q.m1 * q.m2 / (rho * rho);
            let b = 1.0 / (1.0 + dt * y1y2 / eos.tau_w);
            // friction turns relative kinetic energy into heat, ρE is unchanged
            q.w = [b * q.w[0], b * q.w[1]];
        }
    }
    out.check_admissible()?;
    Ok(out)
}

/// One Heun-type SSP-RK2 step of the full system.
pub fn ssprk2_step(
    f: &Field,
    dt: f64,
    order: u8,
    eos: &MixtureEOS,
    exact: Option<&dyn BoundarySampler>,
) -> Result<Field> {
    let cfg = ExplicitConfig {
        order,
        alpha_dissipation: true,
        phase_speed_bound: false,
        model: FluxModel::Full,
    };
    let q1 = euler_substep(f, dt, &cfg, eos, exact)?;
    let q2 = euler_substep(&q1, dt, &cfg, eos, exact)?;
    let mut out = f.clone();
    for (o, b) in out.cells.iter_mut().zip(&q2.cells) {
        *o = 0.5 * (*o + *b);
    }
    out.check_admissible()?;
    Ok(out)
}

/// Integrate to `t_final` with the acoustic CFL `nu`. Returns the field and the step count.
pub fn run_reference(
    f0: &Field,
    t_final: f64,
    nu: f64,
    eos: &MixtureEOS,
    exact: Option<&dyn BoundarySampler>,
) -> Result<(Field, usize)> {
    let mut f = f0.clone();
    let mut t = 0.0;
    let mut steps = 0;
    while t < t_final {
        let mut dt = reference_dt(&f, nu, eos)?;
        if t + dt > t_final {
            dt = t_final - t;
        }
        f = ssprk2_step(&f, dt, 2, eos, exact).map_err(|e| SolverError::Step {
            step: steps,
            time: t,
            source: Box::new(e),
        })?;
        t += dt;
        steps += 1;
    }
    Ok((f, steps))
}
