//! Explicitly integrated subsystem: convective fluxes, the nonconservative
//! transport and curl terms, Rusanov fluxes and minmod-MUSCL reconstruction.

use crate::eos::MixtureEOS;
use crate::error::Result;
use crate::reference;
use crate::state::{apply_bc, BoundarySampler, Field, Grid, State, GHOST};

/// Coordinate axis of a face normal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X = 0,
    Y = 1,
}

impl Axis {
    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    #[inline]
    pub fn normal(self) -> [f64; 2] {
        match self {
            Axis::X => [1.0, 0.0],
            Axis::Y => [0.0, 1.0],
        }
    }
}

/// Which flux function the finite-volume engine uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FluxModel {
    /// Explicit part of the RS-IMEX splitting.
    Split,
    /// Complete system, used by the reference solver.
    Full,
}

/// Spatial discretization settings of the explicit operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExplicitConfig {
    /// 1 = piecewise constant, 2 = minmod-MUSCL.
    pub order: u8,
    /// Apply Rusanov dissipation to the volume-fraction equation.
    pub alpha_dissipation: bool,
    /// Widen the Rusanov speed to cover the phase velocities `|v_l·n|` as well.
    /// Off by default; the explicit eigenvalues alone do not bound the phase
    /// mass transport once `w ≠ 0`.
    pub phase_speed_bound: bool,
    pub model: FluxModel,
}

impl ExplicitConfig {
    pub fn split(order: u8) -> Self {
        Self {
            order,
            alpha_dissipation: true,
            phase_speed_bound: false,
            model: FluxModel::Split,
        }
    }
}

/// Characteristic speeds of the explicit subsystem in direction `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveSpeeds {
    pub lam0: f64,
    pub lam_v: f64,
    pub lam_w: f64,
}

impl WaveSpeeds {
    #[inline]
    pub fn max_abs(&self) -> f64 {
        self.lam_v.abs().max(self.lam_w.abs())
    }
}

#[inline]
fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

pub fn wave_speeds(q: &State, n: [f64; 2]) -> WaveSpeeds {
    let v = q.velocity();
    let y1 = q.m1 / q.rho();
    let c = 1.0 - 2.0 * y1;
    WaveSpeeds {
        lam0: 0.0,
        lam_v: dot(v, n),
        lam_w: dot([v[0] + c * q.w[0], v[1] + c * q.w[1]], n),
    }
}

/// `max_l |v_l·n|` with `v₁ = v + y₂w`, `v₂ = v − y₁w`.
pub fn phase_speed(q: &State, n: [f64; 2]) -> f64 {
    let v = dot(q.velocity(), n);
    let wn = dot(q.w, n);
    let y1 = q.m1 / q.rho();
    (v + (1.0 - y1) * wn).abs().max((v - y1 * wn).abs())
}

/// Relative-velocity potential `w·v + (1 − 2y₁)‖w‖²/2`.
#[inline]
pub fn w_potential(q: &State) -> f64 {
    let v = q.velocity();
    let y1 = q.m1 / q.rho();
    dot(q.w, v) + (1.0 - 2.0 * y1) * 0.5 * dot(q.w, q.w)
}

/// Explicit flux `f^ex(q)·n`. The α component is zero: its transport lives in B.
pub fn flux_ex(q: &State, n: [f64; 2]) -> State {
    let rho = q.rho();
    let v = q.velocity();
    let y1 = q.m1 / rho;
    let y2 = q.m2 / rho;
    let v1 = [v[0] + y2 * q.w[0], v[1] + y2 * q.w[1]];
    let v2 = [v[0] - y1 * q.w[0], v[1] - y1 * q.w[1]];
    let vn = dot(v, n);
    let wn = dot(q.w, n);
    let psi = w_potential(q);
    State {
        alpha1: 0.0,
        m1: q.m1 * dot(v1, n),
        m2: q.m2 * dot(v2, n),
        mom: [q.mom[0] * vn, q.mom[1] * vn],
        w: [psi * n[0], psi * n[1]],
        rho_e: rho * psi * y1 * y2 * wn,
    }
}

/// `B_axis(q)·dq`: α transport `v_axis dα` and the axis part of `(∇×w)×v`.
pub fn nonconservative_b(q: &State, dq: &State, axis: Axis) -> State {
    let v = q.velocity();
    let mut out = State::default();
    match axis {
        Axis::X => {
            out.alpha1 = v[0] * dq.alpha1;
            // ω ⊃ ∂x w_y ; (ω ẑ) × v = ω (−v_y, v_x)
            out.w = [-v[1] * dq.w[1], v[0] * dq.w[1]];
        }
        Axis::Y => {
            out.alpha1 = v[1] * dq.alpha1;
            // ω ⊃ −∂y w_x
            out.w = [v[1] * dq.w[0], -v[0] * dq.w[0]];
        }
    }
    out
}

/// Face contribution `½ B(q̃)(q_R − q_L)` with `q̃ = (q_L + q_R)/2`.
pub fn nonconservative_d(ql: &State, qr: &State, axis: Axis) -> State {
    let avg = 0.5 * (*ql + *qr);
    0.5 * nonconservative_b(&avg, &(*qr - *ql), axis)
}

/// Rusanov flux with the explicit wave speeds.
pub fn rusanov_flux(ql: &State, qr: &State, n: [f64; 2], alpha_dissipation: bool) -> State {
    let s = wave_speeds(ql, n).max_abs().max(wave_speeds(qr, n).max_abs());
    rusanov_with(flux_ex(ql, n), flux_ex(qr, n), ql, qr, s, alpha_dissipation)
}

/// `½(f_L + f_R) − ½ s (q_R − q_L)`.
pub fn rusanov_with(fl: State, fr: State, ql: &State, qr: &State, s: f64, alpha_dissipation: bool) -> State {
    let mut out = 0.5 * (fl + fr);
    let mut jump = *qr - *ql;
    if !alpha_dissipation {
        jump.alpha1 = 0.0;
    }
    out.axpy(-0.5 * s, &jump);
    out
}

#[inline]
fn minmod(a: f64, b: f64) -> f64 {
    if a * b <= 0.0 {
        0.0
    } else if a.abs() < b.abs() {
        a
    } else {
        b
    }
}

/// Minmod-limited face values `(left face, right face)` of the centre cell.
#[inline]
pub fn minmod_reconstruct(qm: f64, q0: f64, qp: f64) -> (f64, f64) {
    let slope = minmod(q0 - qm, qp - q0);
    (q0 - 0.5 * slope, q0 + 0.5 * slope)
}

/// Reconstruction variables `(α₁, ρ₁, ρ₂, v_x, v_y, w_x, w_y, T)`.
type Prim = [f64; 8];

fn to_prim(q: &State, eos: &MixtureEOS) -> Result<Prim> {
    let p = q.to_primitives(eos)?;
    Ok([q.alpha1, p.rho1, p.rho2, p.v[0], p.v[1], q.w[0], q.w[1], p.t])
}

fn from_prim(p: &Prim, eos: &MixtureEOS) -> Result<State> {
    State::from_phase_values(p[0], p[1], p[2], [p[3], p[4]], [p[5], p[6]], p[7], eos)
}

/// Flux and speed bound for the configured model.
#[inline]
fn model_flux(cfg: &ExplicitConfig, q: &State, n: [f64; 2], eos: &MixtureEOS) -> Result<(State, f64)> {
    match cfg.model {
        FluxModel::Split => {
            let mut s = wave_speeds(q, n).max_abs();
            if cfg.phase_speed_bound {
                s = s.max(phase_speed(q, n));
            }
            Ok((flux_ex(q, n), s))
        }
        FluxModel::Full => Ok((reference::full_flux(q, n, eos)?, reference::full_wave_speed(q, n, eos)?)),
    }
}

/// Spatial operator of the explicit part: returns the rate
/// `−Σ_faces (|∂Ω|/|Ω|)(F + D)·n` (plus the cell-interior nonconservative part
/// at second order). `f` must have its ghosts filled. Ghost entries of the
/// returned field are zero.
pub fn explicit_rhs(f: &Field, cfg: &ExplicitConfig, eos: &MixtureEOS) -> Result<Field> {
    let g = &f.grid;
    let mut rate = Field::zeros(g);
    let second = cfg.order >= 2;
    // primitive values over all storage cells that the stencils touch
    let prims: Vec<Prim> = if second {
        f.cells
            .iter()
            .enumerate()
            .map(|(k, q)| {
                if is_used(g, k) {
                    to_prim(q, eos)
                } else {
                    Ok([0.0; 8])
                }
            })
            .collect::<Result<_>>()?
    } else {
        Vec::new()
    };

    let axes: &[Axis] = if g.dims() == 1 { &[Axis::X] } else { &[Axis::X, Axis::Y] };
    for &axis in axes {
        let n = axis.normal();
        let (len, lines, h) = match axis {
            Axis::X => (g.nx, g.ny, g.dx),
            Axis::Y => (g.ny, g.nx, g.dy),
        };
        let step = match axis {
            Axis::X => 1usize,
            Axis::Y => g.stride(),
        };
        let inv_h = 1.0 / h;
        for line in 0..lines {
            // storage index of the first interior cell on this line
            let base = match axis {
                Axis::X => g.idx(0, line),
                Axis::Y => g.idx(line, 0),
            };
            // face states: for cell c (offset from base, −1..=len) its (minus, plus) face values
            let face_states = |c: isize| -> Result<(State, State)> {
                let k = (base as isize + c * step as isize) as usize;
                if second {
                    let pm = &prims[k - step];
                    let p0 = &prims[k];
                    let pp = &prims[k + step];
                    let mut lo = [0.0; 8];
                    let mut hi = [0.0; 8];
                    for v in 0..8 {
                        let (a, b) = minmod_reconstruct(pm[v], p0[v], pp[v]);
                        lo[v] = a;
                        hi[v] = b;
                    }
                    Ok((from_prim(&lo, eos)?, from_prim(&hi, eos)?))
                } else {
                    Ok((f.cells[k], f.cells[k]))
                }
            };
            let mut prev = face_states(-1)?;
            for c in 0..len as isize {
                let cur = face_states(c)?;
                // face between c−1 and c
                let (ql, qr) = (prev.1, cur.0);
                let (fl, sl) = model_flux(cfg, &ql, n, eos)?;
                let (fr, sr) = model_flux(cfg, &qr, n, eos)?;
                let flux = rusanov_with(fl, fr, &ql, &qr, sl.max(sr), cfg.alpha_dissipation);
                let d = nonconservative_d(&ql, &qr, axis);
                let k = (base as isize + c * step as isize) as usize;
                // cell c sees this face with outward normal −axis
                rate.cells[k].axpy(inv_h, &flux);
                rate.cells[k].axpy(-inv_h, &d);
                if c > 0 {
                    let km = k - step;
                    rate.cells[km].axpy(-inv_h, &flux);
                    rate.cells[km].axpy(-inv_h, &d);
                }
                if second {
                    let q0 = &f.cells[k];
                    let inner = nonconservative_b(q0, &(cur.1 - cur.0), axis);
                    rate.cells[k].axpy(-inv_h, &inner);
                }
                prev = cur;
            }
            // last face between len−1 and the ghost cell len
            let ghost = face_states(len as isize)?;
            let (ql, qr) = (prev.1, ghost.0);
            let (fl, sl) = model_flux(cfg, &ql, n, eos)?;
            let (fr, sr) = model_flux(cfg, &qr, n, eos)?;
            let flux = rusanov_with(fl, fr, &ql, &qr, sl.max(sr), cfg.alpha_dissipation);
            let d = nonconservative_d(&ql, &qr, axis);
            let k = base + (len - 1) * step;
            rate.cells[k].axpy(-inv_h, &flux);
            rate.cells[k].axpy(-inv_h, &d);
        }
    }
    Ok(rate)
}

/// Storage cells read by the second-order stencils: everything except the
/// 2D corner blocks.
fn is_used(g: &Grid, k: usize) -> bool {
    if g.ny == 1 {
        return true;
    }
    let s = g.stride();
    let (ii, jj) = (k % s, k / s);
    let in_x = ii >= GHOST && ii < GHOST + g.nx;
    let in_y = jj >= GHOST && jj < GHOST + g.ny;
    in_x || in_y
}

/// One forward-Euler step of the explicit subsystem.
pub fn explicit_update(
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
    out.check_admissible()?;
    Ok(out)
}

/// Largest explicit characteristic speed over interior cells and active axes.
pub fn max_explicit_speed(f: &Field) -> f64 {
    let axes: &[Axis] = if f.grid.dims() == 1 { &[Axis::X] } else { &[Axis::X, Axis::Y] };
    let mut s: f64 = 0.0;
    for q in f.interior_states() {
        for &a in axes {
            s = s.max(wave_speeds(q, a.normal()).max_abs());
        }
    }
    s
}
