//! Linearly implicit subsystem: the elliptic total-energy solve, the
//! successive relative-velocity and momentum updates, friction, and the
//! backward-Euler pressure relaxation of the volume fraction.

use crate::eos::{dmu_de, eval_thermo, phi_p, MixtureEOS};
use crate::error::{domain, Result, SolverError};
use crate::linsolve::{gmres, CsrMatrix, GmresConfig, SolveStats};
use crate::state::{fill_scalar_ghosts, Bc, Field, Grid, KahanSum, State, ALPHA_MIN};

/// Constant leading-order phase densities and internal energy densities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceState {
    pub rho1_rs: f64,
    pub rho2_rs: f64,
    pub rhoe1_rs: f64,
    pub rhoe2_rs: f64,
}

/// Reference quantities at one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RsPoint {
    /// `(ρE)_RS`
    pub rho_e: f64,
    /// `μ(q_RS)`
    pub mu: f64,
    /// `(∂μ/∂ρE)_RS`
    pub dmu: f64,
}

impl ReferenceState {
    pub fn new(rho1_rs: f64, rho2_rs: f64, rhoe1_rs: f64, rhoe2_rs: f64) -> Result<Self> {
        for (name, v) in [
            ("rho1_rs", rho1_rs),
            ("rho2_rs", rho2_rs),
            ("rhoe1_rs", rhoe1_rs),
            ("rhoe2_rs", rhoe2_rs),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(domain(name, v, "reference constants must be positive"));
            }
        }
        Ok(Self {
            rho1_rs,
            rho2_rs,
            rhoe1_rs,
            rhoe2_rs,
        })
    }

    /// Cell-volume averages of `ρ_l` and `ρ_l e_l` over the interior.
    pub fn from_field(f: &Field, eos: &MixtureEOS) -> Result<Self> {
        let mut acc = [0.0; 4];
        for q in f.interior_states() {
            let p = q.to_primitives(eos)?;
            acc[0] += p.rho1;
            acc[1] += p.rho2;
            acc[2] += p.rho1 * eos.phase1.cv * p.t;
            acc[3] += p.rho2 * eos.phase2.cv * p.t;
        }
        let n = f.grid.interior_len() as f64;
        Self::new(acc[0] / n, acc[1] / n, acc[2] / n, acc[3] / n)
    }

    /// Reference state of the cell holding `q`: same volume fraction and
    /// velocities, constant phase densities and internal energies.
    pub fn point(&self, q: &State, eos: &MixtureEOS) -> Result<RsPoint> {
        let a1 = q.alpha1;
        let a2 = 1.0 - a1;
        let m1 = a1 * self.rho1_rs;
        let m2 = a2 * self.rho2_rs;
        let rho0 = m1 + m2;
        let v = q.velocity();
        let (y1, y2) = (m1 / rho0, m2 / rho0);
        let ekin = 0.5 * (v[0] * v[0] + v[1] * v[1]) + 0.5 * y1 * y2 * (q.w[0] * q.w[0] + q.w[1] * q.w[1]);
        let eint = a1 * self.rhoe1_rs + a2 * self.rhoe2_rs;
        let t = eint / (m1 * eos.phase1.cv + m2 * eos.phase2.cv);
        let th = eval_thermo(a1, self.rho1_rs, self.rho2_rs, t, eos)?;
        Ok(RsPoint {
            rho_e: eint + rho0 * ekin,
            mu: eos.mu_diff(&th),
            dmu: dmu_de(&th, a1, a2, self.rho1_rs, self.rho2_rs, eos)?,
        })
    }
}

/// Which kinetic energy enters the pressure `P = h₁(ρE − ρE_kin)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KineticConvention {
    /// Kinetic energy of the frozen (previous-stage) state.
    Frozen,
    /// Kinetic energy of the explicit predictor.
    Predictor,
}

/// Where the potentials `μ` and `p` of the successive `w` and momentum
/// updates are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PotentialEvaluation {
    /// The linearization of the energy solve: `μ = h₂ρE_new + μ̂_RS + μ̄°`,
    /// `p = h₁(ρE_new − ρE_kin)`.
    Linearized,
    /// The equation of state at the new state (predictor masses and α,
    /// solved ρE, kinetic energy per [`KineticConvention`]).
    NewState,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImplicitConfig {
    pub gmres: GmresConfig,
    pub check_dominance: bool,
    pub kinetic: KineticConvention,
    pub potentials: PotentialEvaluation,
}

impl Default for ImplicitConfig {
    fn default() -> Self {
        Self {
            gmres: GmresConfig::default(),
            check_dominance: true,
            kinetic: KineticConvention::Frozen,
            potentials: PotentialEvaluation::NewState,
        }
    }
}

/// Per-cell coefficients of one implicit solve.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StageCoefficients {
    /// `(ρE + p)°/ρ_new`
    pub g1: f64,
    /// `φ_p° − 1`
    pub h1: f64,
    /// `μ° (ρy₁y₂)_new β`
    pub g2: f64,
    /// `(∂μ/∂ρE)_RS`
    pub h2: f64,
    /// friction factor `1/(1 + h (y₁y₂)_new/τ_w)`
    pub beta: f64,
    /// `h₁ ρE_kin`, so that `P = h₁ ρE − p0`
    pub p0: f64,
    /// `μ̂_RS + μ̄°`, so that `Φ = h₂ ρE + c_phi`
    pub c_phi: f64,
    /// `(ρy₁y₂)_new`
    pub rho_y1y2: f64,
    /// kinetic energy density entering `P`
    pub ekin: f64,
}

impl StageCoefficients {
    fn slot(&mut self, k: usize) -> &mut f64 {
        match k {
            0 => &mut self.g1,
            1 => &mut self.h1,
            2 => &mut self.g2,
            3 => &mut self.h2,
            4 => &mut self.beta,
            5 => &mut self.p0,
            6 => &mut self.c_phi,
            7 => &mut self.rho_y1y2,
            _ => &mut self.ekin,
        }
    }
}

/// Assembled energy system plus the cell data the later updates need.
#[derive(Debug, Clone)]
pub struct EllipticSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    /// Initial guess (the predictor energy).
    pub x0: Vec<f64>,
}

/// Intermediate data of one implicit stage on padded storage.
#[derive(Debug, Clone)]
pub struct StageWork {
    pub grid: Grid,
    pub h: f64,
    pub coeffs: Vec<StageCoefficients>,
    /// predictor momentum and relative velocity
    pub mom_star: Vec<[f64; 2]>,
    pub w_star: Vec<[f64; 2]>,
    /// predictor `(α₁, m₁, m₂)` for [`PotentialEvaluation::NewState`]
    pub phase_star: Vec<[f64; 3]>,
    pub potentials: PotentialEvaluation,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ImplicitStats {
    pub linear_iterations: usize,
    pub linear_residual: f64,
}

fn padded(g: &Grid, mut f: impl FnMut(usize, usize) -> f64) -> Vec<f64> {
    let mut a = vec![0.0; g.len()];
    for (i, j) in g.interior() {
        a[g.idx(i, j)] = f(i, j);
    }
    fill_scalar_ghosts(g, &mut a);
    a
}

fn padded_vec(g: &Grid, mut f: impl FnMut(usize, usize) -> [f64; 2]) -> Vec<[f64; 2]> {
    let mut x = vec![0.0; g.len()];
    let mut y = vec![0.0; g.len()];
    for (i, j) in g.interior() {
        let k = g.idx(i, j);
        let v = f(i, j);
        x[k] = v[0];
        y[k] = v[1];
    }
    fill_scalar_ghosts(g, &mut x);
    fill_scalar_ghosts(g, &mut y);
    x.into_iter().zip(y).map(|(a, b)| [a, b]).collect()
}

/// Centred divergence of a symmetric tensor field `(t_xx, t_xy, t_yy)` at an
/// interior cell.
fn tensor_div(g: &Grid, t: &[[f64; 3]], i: usize, j: usize) -> [f64; 2] {
    let xp = g.idx_off(i, j, 1, 0);
    let xm = g.idx_off(i, j, -1, 0);
    let mut d = [
        (t[xp][0] - t[xm][0]) / (2.0 * g.dx),
        (t[xp][1] - t[xm][1]) / (2.0 * g.dx),
    ];
    if g.dims() == 2 {
        let yp = g.idx_off(i, j, 0, 1);
        let ym = g.idx_off(i, j, 0, -1);
        d[0] += (t[yp][1] - t[ym][1]) / (2.0 * g.dy);
        d[1] += (t[yp][2] - t[ym][2]) / (2.0 * g.dy);
    }
    d
}

fn padded_tensor(g: &Grid, rho_y1y2: &[f64], w: &[[f64; 2]]) -> Vec<[f64; 3]> {
    let xx = padded(g, |i, j| {
        let k = g.idx(i, j);
        rho_y1y2[k] * w[k][0] * w[k][0]
    });
    let xy = padded(g, |i, j| {
        let k = g.idx(i, j);
        rho_y1y2[k] * w[k][0] * w[k][1]
    });
    let yy = padded(g, |i, j| {
        let k = g.idx(i, j);
        rho_y1y2[k] * w[k][1] * w[k][1]
    });
    (0..g.len()).map(|k| [xx[k], xy[k], yy[k]]).collect()
}

/// Centred gradient of a padded scalar at an interior cell.
fn grad_c(g: &Grid, a: &[f64], i: usize, j: usize) -> [f64; 2] {
    let gx = (a[g.idx_off(i, j, 1, 0)] - a[g.idx_off(i, j, -1, 0)]) / (2.0 * g.dx);
    let gy = if g.dims() == 2 {
        (a[g.idx_off(i, j, 0, 1)] - a[g.idx_off(i, j, 0, -1)]) / (2.0 * g.dy)
    } else {
        0.0
    };
    [gx, gy]
}

/// Per-cell coefficients from the frozen state `f_old` and the predictor `f_star`.
pub fn stage_coefficients(
    f_star: &Field,
    f_old: &Field,
    h: f64,
    rs: &ReferenceState,
    eos: &MixtureEOS,
    kinetic: KineticConvention,
) -> Result<Vec<StageCoefficients>> {
    let g = &f_star.grid;
    let mut c = vec![StageCoefficients::default(); g.len()];
    for (i, j) in g.interior() {
        let k = g.idx(i, j);
        let qo = f_old.at(i, j);
        let qs = f_star.at(i, j);
        let po = qo.to_primitives(eos).map_err(|e| cell_err(e, i, j))?;
        let th = eval_thermo(qo.alpha1, po.rho1, po.rho2, po.t, eos).map_err(|e| cell_err(e, i, j))?;
        let phip = phi_p(qo.alpha1, 1.0 - qo.alpha1, po.rho1, po.rho2, eos)?;
        let mu = eos.mu_diff(&th);
        let rho_new = qs.rho();
        let rho_y1y2 = qs.m1 * qs.m2 / rho_new;
        let y1y2 = rho_y1y2 / rho_new;
        let beta = if eos.tau_w.is_infinite() {
            1.0
        } else {
            1.0 / (1.0 + h * y1y2 / eos.tau_w)
        };
        let pt = rs.point(qo, eos).map_err(|e| cell_err(e, i, j))?;
        let ek = match kinetic {
            KineticConvention::Frozen => qo.kinetic_energy(),
            KineticConvention::Predictor => qs.kinetic_energy(),
        };
        let h1 = phip - 1.0;
        c[k] = StageCoefficients {
            g1: (qo.rho_e + th.p_mix) / rho_new,
            h1,
            g2: mu * rho_y1y2 * beta,
            h2: pt.dmu,
            beta,
            p0: h1 * ek,
            c_phi: mu - pt.dmu * qo.rho_e,
            rho_y1y2,
            ekin: ek,
        };
    }
    // mirror / wrap every coefficient into the ghost layers
    let mut tmp = vec![0.0; g.len()];
    for slot in 0..9 {
        for (t, s) in tmp.iter_mut().zip(c.iter_mut()) {
            *t = *s.slot(slot);
        }
        fill_scalar_ghosts(g, &mut tmp);
        for (t, s) in tmp.iter().zip(c.iter_mut()) {
            *s.slot(slot) = *t;
        }
    }
    Ok(c)
}

fn cell_err(e: SolverError, i: usize, j: usize) -> SolverError {
    match e {
        SolverError::Domain { field, value, reason } => SolverError::Admissibility {
            i,
            j,
            detail: format!("{field} = {value:e} ({reason})"),
        },
        other => other,
    }
}

/// Neighbour of interior cell `(i, j)` across the face in direction `(di, dj)`,
/// as an interior `(i, j)` pair, or `None` at a non-periodic boundary.
fn neighbour(g: &Grid, i: usize, j: usize, di: isize, dj: isize) -> Option<(usize, usize)> {
    let (ni, nj) = (i as isize + di, j as isize + dj);
    let wrap = |v: isize, n: usize, lo: Bc, hi: Bc| -> Option<usize> {
        if v < 0 {
            (lo == Bc::Periodic).then(|| (v + n as isize) as usize)
        } else if v >= n as isize {
            (hi == Bc::Periodic).then(|| (v - n as isize) as usize)
        } else {
            Some(v as usize)
        }
    };
    Some((wrap(ni, g.nx, g.bc[0], g.bc[1])?, wrap(nj, g.ny, g.bc[2], g.bc[3])?))
}

/// Assemble `(I − h²(𝓛 + 𝓚)) ρE = rhs` for the stage with effective step `h`.
pub fn assemble_energy_system(
    f_star: &Field,
    f_old: &Field,
    h: f64,
    rs: &ReferenceState,
    eos: &MixtureEOS,
    cfg: &ImplicitConfig,
) -> Result<(EllipticSystem, StageWork)> {
    let g = f_star.grid.clone();
    let coeffs = stage_coefficients(f_star, f_old, h, rs, eos, cfg.kinetic)?;
    let mom_star = padded_vec(&g, |i, j| f_star.at(i, j).mom);
    let w_star = padded_vec(&g, |i, j| f_star.at(i, j).w);
    let w_old = padded_vec(&g, |i, j| f_old.at(i, j).w);
    let ryy: Vec<f64> = coeffs.iter().map(|c| c.rho_y1y2).collect();
    let tens = padded_tensor(&g, &ryy, &w_old);
    // energy flux vector g₁ρv̂ + g₂w* on padded storage
    let flux = padded_vec(&g, |i, j| {
        let k = g.idx(i, j);
        let dv = tensor_div(&g, &tens, i, j);
        let c = &coeffs[k];
        let mv = [mom_star[k][0] - h * dv[0], mom_star[k][1] - h * dv[1]];
        [c.g1 * mv[0] + c.g2 * w_star[k][0], c.g1 * mv[1] + c.g2 * w_star[k][1]]
    });

    let n = g.interior_len();
    let mut rows = Vec::with_capacity(n);
    let mut rhs = vec![0.0; n];
    let mut x0 = vec![0.0; n];
    let dirs: &[(isize, isize)] = if g.dims() == 1 {
        &[(-1, 0), (1, 0)]
    } else {
        &[(-1, 0), (1, 0), (0, -1), (0, 1)]
    };
    for (i, j) in g.interior() {
        let r = j * g.nx + i;
        let k = g.idx(i, j);
        let ci = &coeffs[k];
        let rho_e_star = f_star.at(i, j).rho_e;
        x0[r] = rho_e_star;
        // centred flux divergence
        let mut b = rho_e_star - h * (flux[g.idx_off(i, j, 1, 0)][0] - flux[g.idx_off(i, j, -1, 0)][0]) / (2.0 * g.dx);
        if g.dims() == 2 {
            b -= h * (flux[g.idx_off(i, j, 0, 1)][1] - flux[g.idx_off(i, j, 0, -1)][1]) / (2.0 * g.dy);
        }
        let mut row = vec![(r, 1.0)];
        for &(di, dj) in dirs {
            let Some((ni, nj)) = neighbour(&g, i, j, di, dj) else {
                continue;
            };
            let d = if di != 0 { g.dx } else { g.dy };
            let c = h * h / (d * d);
            let ck = &coeffs[g.idx(ni, nj)];
            let g1f = 0.5 * (ci.g1 + ck.g1);
            let g2f = 0.5 * (ci.g2 + ck.g2);
            row[0].1 += c * (g1f * ci.h1 + g2f * ci.h2);
            row.push((nj * g.nx + ni, -c * (g1f * ck.h1 + g2f * ck.h2)));
            b += c * (g1f * (ci.p0 - ck.p0) + g2f * (ck.c_phi - ci.c_phi));
        }
        rows.push(row);
        rhs[r] = b;
    }
    let matrix = CsrMatrix::from_rows(rows);
    if cfg.check_dominance {
        let (column, margin) = matrix.column_dominance_margin();
        if !(margin > 0.0) {
            return Err(SolverError::NotDominant { column, margin });
        }
    }
    Ok((
        EllipticSystem { matrix, rhs, x0 },
        StageWork {
            grid: g,
            h,
            coeffs,
            mom_star,
            w_star,
            phase_star: f_star.cells.iter().map(|q| [q.alpha1, q.m1, q.m2]).collect(),
            potentials: cfg.potentials,
        },
    ))
}

/// Solve the assembled energy system by preconditioned GMRES.
///
/// The iterate is then shifted by a constant so that the residual sums to
/// zero. The matrix columns sum to one on periodic grids, so `ΣρE` is kept to
/// round-off instead of to the solver tolerance; the shift is of the size of
/// the residual.
pub fn solve_energy(sys: &EllipticSystem, cfg: &GmresConfig) -> Result<(Vec<f64>, SolveStats)> {
    let (mut x, stats) = gmres(&sys.matrix, &sys.rhs, &sys.x0, cfg)?;
    let n = x.len();
    let mut ax = vec![0.0; n];
    sys.matrix.matvec(&x, &mut ax);
    let mut ones = vec![0.0; n];
    sys.matrix.matvec(&vec![1.0; n], &mut ones);
    let (mut res, mut total) = (KahanSum::default(), KahanSum::default());
    for i in 0..n {
        res.add(sys.rhs[i] - ax[i]);
        total.add(ones[i]);
    }
    if total.value() != 0.0 {
        let d = res.value() / total.value();
        x.iter_mut().for_each(|v| *v += d);
    }
    Ok((x, stats))
}

fn pad_energy(g: &Grid, rho_e: &[f64]) -> Vec<f64> {
    padded(g, |i, j| rho_e[j * g.nx + i])
}

/// Padded `(Φ, P)`: relative-velocity potential and pressure at the solved energy.
fn potentials(work: &StageWork, rho_e_new: &[f64], eos: &MixtureEOS) -> Result<(Vec<f64>, Vec<f64>)> {
    let g = &work.grid;
    let e = pad_energy(g, rho_e_new);
    match work.potentials {
        PotentialEvaluation::Linearized => Ok((
            e.iter().zip(&work.coeffs).map(|(x, c)| c.h2 * x + c.c_phi).collect(),
            e.iter().zip(&work.coeffs).map(|(x, c)| c.h1 * x - c.p0).collect(),
        )),
        PotentialEvaluation::NewState => {
            let mut phi = vec![0.0; g.len()];
            let mut p = vec![0.0; g.len()];
            for (i, j) in g.interior() {
                let k = g.idx(i, j);
                let [a_star, m1, m2] = work.phase_star[k];
                let eint = e[k] - work.coeffs[k].ekin;
                // potentials of the pressure-relaxed state
                let a1 = relax_alpha_internal(a_star, m1, m2, eint, work.h, eos)
                    .map_err(|detail| SolverError::Newton { i, j, detail })?;
                let t = eint / (m1 * eos.phase1.cv + m2 * eos.phase2.cv);
                let th = eval_thermo(a1, m1 / a1, m2 / (1.0 - a1), t, eos).map_err(|e| cell_err(e, i, j))?;
                phi[k] = eos.mu_diff(&th);
                p[k] = th.p_mix;
            }
            fill_scalar_ghosts(g, &mut phi);
            fill_scalar_ghosts(g, &mut p);
            Ok((phi, p))
        }
    }
}

/// `w_new = β (w* − h ∇Φ)`. Returns interior values in row-major order.
pub fn update_w(work: &StageWork, rho_e_new: &[f64], eos: &MixtureEOS) -> Result<Vec<[f64; 2]>> {
    let g = &work.grid;
    let (phi, _) = potentials(work, rho_e_new, eos)?;
    Ok(g.interior()
        .map(|(i, j)| {
            let k = g.idx(i, j);
            let gp = grad_c(g, &phi, i, j);
            let b = work.coeffs[k].beta;
            [
                b * (work.w_star[k][0] - work.h * gp[0]),
                b * (work.w_star[k][1] - work.h * gp[1]),
            ]
        })
        .collect())
}

/// `ρv_new = ρv* − h ∇P − h div(ρy₁y₂ w_new ⊗ w_new)`.
pub fn update_momentum(
    work: &StageWork,
    rho_e_new: &[f64],
    w_new: &[[f64; 2]],
    eos: &MixtureEOS,
) -> Result<Vec<[f64; 2]>> {
    let g = &work.grid;
    let (_, p) = potentials(work, rho_e_new, eos)?;
    let wpad = padded_vec(g, |i, j| w_new[j * g.nx + i]);
    let ryy: Vec<f64> = work.coeffs.iter().map(|c| c.rho_y1y2).collect();
    let tens = padded_tensor(g, &ryy, &wpad);
    Ok(g.interior()
        .map(|(i, j)| {
            let k = g.idx(i, j);
            let gp = grad_c(g, &p, i, j);
            let dv = tensor_div(g, &tens, i, j);
            [
                work.mom_star[k][0] - work.h * (gp[0] + dv[0]),
                work.mom_star[k][1] - work.h * (gp[1] + dv[1]),
            ]
        })
        .collect())
}

/// Backward-Euler pressure relaxation of α₁ in one cell at fixed masses,
/// momentum, relative velocity and total energy.
///
/// Solves `α − α* − (h/τ)(p₁(α) − p₂(α))/ρ = 0` by Newton with a bisection
/// safeguard. The temperature does not depend on α here, so the residual is
/// strictly increasing and the root is unique.
pub fn relax_alpha_cell(q: &State, h: f64, eos: &MixtureEOS) -> std::result::Result<f64, String> {
    relax_alpha_internal(q.alpha1, q.m1, q.m2, q.rho_e - q.kinetic_energy(), h, eos)
}

/// Relaxed α₁ from the predictor `alpha_star`, the phase masses and the
/// internal energy density.
pub fn relax_alpha_internal(
    alpha_star: f64,
    m1: f64,
    m2: f64,
    eint: f64,
    h: f64,
    eos: &MixtureEOS,
) -> std::result::Result<f64, String> {
    if eos.tau_alpha.is_infinite() || h == 0.0 {
        return Ok(alpha_star);
    }
    let rho = m1 + m2;
    let t = eint / (m1 * eos.phase1.cv + m2 * eos.phase2.cv);
    if !(t > 0.0) {
        return Err(format!("temperature {t:e} not positive"));
    }
    let a1 = eos.phase1.r_gas() * m1 * t / rho;
    let a2 = eos.phase2.r_gas() * m2 * t / rho;
    let kk = h / eos.tau_alpha;
    let scale = 1.0 + kk * (a1 + a2);
    let res = |a: f64| (a - alpha_star - kk * (a1 / a - a2 / (1.0 - a))) / scale;
    let dres = |a: f64| (1.0 + kk * (a1 / (a * a) + a2 / ((1.0 - a) * (1.0 - a)))) / scale;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    // start from the better of the predictor and the equilibrium fraction
    let eq = a1 / (a1 + a2);
    let mut a = if res(eq).abs() < res(alpha_star.clamp(1e-12, 1.0 - 1e-12)).abs() {
        eq
    } else {
        alpha_star.clamp(1e-12, 1.0 - 1e-12)
    };
    for _ in 0..200 {
        let r = res(a);
        if r.abs() <= 1e-12 * 1e-2 {
            break;
        }
        if r > 0.0 {
            hi = a;
        } else {
            lo = a;
        }
        let mut next = a - r / dres(a);
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - a).abs() <= 1e-16 * a.max(1e-300) || hi - lo <= 1e-16 {
            a = next;
            break;
        }
        a = next;
    }
    let r = res(a);
    if !(r.abs() <= 1e-12) {
        return Err(format!("residual {r:e} after safeguarded Newton (alpha = {a})"));
    }
    if !(ALPHA_MIN..=1.0 - ALPHA_MIN).contains(&a) {
        return Err(format!("relaxed alpha1 = {a:e} outside admissible range"));
    }
    Ok(a)
}

/// Relax α₁ in every interior cell.
pub fn relax_alpha(f: &mut Field, h: f64, eos: &MixtureEOS) -> Result<()> {
    let g = f.grid.clone();
    for (i, j) in g.interior() {
        let q = f.at(i, j);
        let a = relax_alpha_cell(q, h, eos).map_err(|detail| SolverError::Newton { i, j, detail })?;
        f.at_mut(i, j).alpha1 = a;
    }
    Ok(())
}

/// Full implicit stage: solve `q = q* + h I(q)` with coefficients frozen at `f_old`.
pub fn implicit_stage(
    f_star: &Field,
    f_old: &Field,
    h: f64,
    rs: &ReferenceState,
    eos: &MixtureEOS,
    cfg: &ImplicitConfig,
) -> Result<(Field, ImplicitStats)> {
    let (sys, work) = assemble_energy_system(f_star, f_old, h, rs, eos, cfg)?;
    let (rho_e, stats) = solve_energy(&sys, &cfg.gmres)?;
    let g = f_star.grid.clone();
    let mut out = f_star.clone();
    for (i, j) in g.interior() {
        out.at_mut(i, j).rho_e = rho_e[j * g.nx + i];
    }
    let w_new = update_w(&work, &rho_e, eos)?;
    let mom_new = update_momentum(&work, &rho_e, &w_new, eos)?;
    for (i, j) in g.interior() {
        let r = j * g.nx + i;
        let q = out.at_mut(i, j);
        q.w = w_new[r];
        q.mom = mom_new[r];
    }
    relax_alpha(&mut out, h, eos)?;
    out.check_admissible()?;
    Ok((
        out,
        ImplicitStats {
            linear_iterations: stats.iterations,
            linear_residual: stats.residual,
        },
    ))
}

/// Flux of the implicit subsystem in direction `n`:
/// pressure and `ρy₁y₂ w⊗w` in momentum, `μ` in the relative-velocity
/// potential and `(ρE + p) v + μ ρy₁y₂ w` in energy.
pub fn implicit_flux(q: &State, n: [f64; 2], eos: &MixtureEOS) -> Result<State> {
    let p = q.to_primitives(eos)?;
    let th = eval_thermo(q.alpha1, p.rho1, p.rho2, p.t, eos)?;
    let mu = eos.mu_diff(&th);
    let ryy = q.m1 * q.m2 / p.rho;
    let wn = q.w[0] * n[0] + q.w[1] * n[1];
    let vn = p.v[0] * n[0] + p.v[1] * n[1];
    Ok(State {
        alpha1: 0.0,
        m1: 0.0,
        m2: 0.0,
        mom: [th.p_mix * n[0] + ryy * q.w[0] * wn, th.p_mix * n[1] + ryy * q.w[1] * wn],
        w: [mu * n[0], mu * n[1]],
        rho_e: (q.rho_e + th.p_mix) * vn + mu * ryy * wn,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eos::PhaseParams;
    use approx::assert_relative_eq;

    fn eos(tau_a: f64, tau_w: f64) -> MixtureEOS {
        MixtureEOS::new(
            PhaseParams::new(1.4, 1.0).unwrap(),
            PhaseParams::new(2.0, 1.0).unwrap(),
            1.0,
            tau_a,
            tau_w,
        )
        .unwrap()
    }

    #[test]
    fn equilibrium_is_fixed_point_of_relaxation() {
        let e = eos(1e-3, f64::INFINITY);
        // p1 = p2: 0.4 ρ1 = 1.0 ρ2
        let q = State::from_phase_values(0.3, 2.5, 1.0, [0.1, 0.0], [0.0; 2], 1.3, &e).unwrap();
        let a = relax_alpha_cell(&q, 0.1, &e).unwrap();
        assert_relative_eq!(a, 0.3, epsilon = 1e-13);
    }

    #[test]
    fn stiff_relaxation_reaches_pressure_equilibrium() {
        let e = eos(1e-16, f64::INFINITY);
        let mut q = State::from_phase_values(0.3, 2.0, 1.7, [0.2, 0.0], [0.0; 2], 1.3, &e).unwrap();
        q.alpha1 = relax_alpha_cell(&q, 1e-3, &e).unwrap();
        let p = q.to_primitives(&e).unwrap();
        let th = eval_thermo(q.alpha1, p.rho1, p.rho2, p.t, &e).unwrap();
        assert!((th.p1 - th.p2).abs() <= 1e-10 * th.p1);
    }

    #[test]
    fn relaxation_moves_towards_equilibrium() {
        // p1 > p2 ⇒ phase 1 expands
        let e = eos(1.0, f64::INFINITY);
        let q = State::from_phase_values(0.3, 2.0, 0.5, [0.0; 2], [0.0; 2], 1.0, &e).unwrap();
        let a = relax_alpha_cell(&q, 1e-3, &e).unwrap();
        assert!(a > 0.3);
    }

    #[test]
    fn infinite_tau_leaves_alpha() {
        let e = eos(f64::INFINITY, f64::INFINITY);
        let q = State::from_phase_values(0.3, 2.0, 0.5, [0.0; 2], [0.0; 2], 1.0, &e).unwrap();
        assert_eq!(relax_alpha_cell(&q, 1.0, &e).unwrap(), 0.3);
    }
}
