//! Conserved state, primitive variables, Cartesian grid with ghost layers and
//! boundary filling.

use std::ops::{Add, Mul, Sub};

use crate::eos::{eval_thermo, MixtureEOS};
use crate::error::{domain, Result, SolverError};

/// Volume fractions outside `[ALPHA_MIN, 1 − ALPHA_MIN]` are rejected.
pub const ALPHA_MIN: f64 = 1e-8;

/// Ghost-layer width used by every field.
pub const GHOST: usize = 2;

/// Number of scalar components in a [`State`].
pub const NVAR: usize = 8;

/// Conserved variables of one cell: `(α₁, α₁ρ₁, α₂ρ₂, ρv, w, ρE)`.
///
/// Vectors always carry two components; 1D runs keep the second at zero.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct State {
    pub alpha1: f64,
    pub m1: f64,
    pub m2: f64,
    pub mom: [f64; 2],
    pub w: [f64; 2],
    pub rho_e: f64,
}

impl State {
    pub fn to_array(&self) -> [f64; NVAR] {
        [
            self.alpha1,
            self.m1,
            self.m2,
            self.mom[0],
            self.mom[1],
            self.w[0],
            self.w[1],
            self.rho_e,
        ]
    }

    pub fn from_array(a: [f64; NVAR]) -> Self {
        Self {
            alpha1: a[0],
            m1: a[1],
            m2: a[2],
            mom: [a[3], a[4]],
            w: [a[5], a[6]],
            rho_e: a[7],
        }
    }

    #[inline]
    pub fn rho(&self) -> f64 {
        self.m1 + self.m2
    }

    /// `self += a·x`.
    #[inline]
    pub fn axpy(&mut self, a: f64, x: &State) {
        self.alpha1 += a * x.alpha1;
        self.m1 += a * x.m1;
        self.m2 += a * x.m2;
        self.mom[0] += a * x.mom[0];
        self.mom[1] += a * x.mom[1];
        self.w[0] += a * x.w[0];
        self.w[1] += a * x.w[1];
        self.rho_e += a * x.rho_e;
    }

    /// Mixture velocity `ρv/ρ`.
    #[inline]
    pub fn velocity(&self) -> [f64; 2] {
        let rho = self.rho();
        [self.mom[0] / rho, self.mom[1] / rho]
    }

    /// Kinetic energy density `ρ‖v‖²/2 + ρy₁y₂‖w‖²/2`.
    #[inline]
    pub fn kinetic_energy(&self) -> f64 {
        let rho = self.rho();
        let v2 = (self.mom[0] * self.mom[0] + self.mom[1] * self.mom[1]) / (rho * rho);
        let w2 = self.w[0] * self.w[0] + self.w[1] * self.w[1];
        0.5 * rho * v2 + 0.5 * self.m1 * self.m2 / rho * w2
    }

    /// Check the cell invariants. `(i, j)` is only used in the message.
    pub fn check_admissible(&self, i: usize, j: usize) -> Result<()> {
        let fail = |detail: String| Err(SolverError::Admissibility { i, j, detail });
        if !self.to_array().iter().all(|v| v.is_finite()) {
            return fail(format!("non-finite component in {self:?}"));
        }
        if !(self.alpha1 >= ALPHA_MIN && self.alpha1 <= 1.0 - ALPHA_MIN) {
            return fail(format!("alpha1 = {:e} outside [{ALPHA_MIN:e}, 1 - {ALPHA_MIN:e}]", self.alpha1));
        }
        if !(self.m1 > 0.0) {
            return fail(format!("m1 = {:e} not positive", self.m1));
        }
        if !(self.m2 > 0.0) {
            return fail(format!("m2 = {:e} not positive", self.m2));
        }
        let eint = self.rho_e - self.kinetic_energy();
        if !(eint > 0.0) {
            return fail(format!("internal energy {eint:e} not positive"));
        }
        Ok(())
    }

    /// Recover primitive variables. Temperature follows from the total energy.
    pub fn to_primitives(&self, eos: &MixtureEOS) -> Result<Primitives> {
        if !(self.alpha1 > 0.0 && self.alpha1 < 1.0) {
            return Err(domain("alpha1", self.alpha1, "must lie in (0, 1)"));
        }
        if !(self.m1 > 0.0) {
            return Err(domain("m1", self.m1, "must be positive"));
        }
        if !(self.m2 > 0.0) {
            return Err(domain("m2", self.m2, "must be positive"));
        }
        let alpha2 = 1.0 - self.alpha1;
        let rho = self.rho();
        let y1 = self.m1 / rho;
        let y2 = self.m2 / rho;
        let v = self.velocity();
        let w = self.w;
        let v1 = [v[0] + y2 * w[0], v[1] + y2 * w[1]];
        let v2 = [v[0] - y1 * w[0], v[1] - y1 * w[1]];
        let ekin = 0.5 * (v[0] * v[0] + v[1] * v[1]) + 0.5 * y1 * y2 * (w[0] * w[0] + w[1] * w[1]);
        let eint = self.rho_e - rho * ekin;
        let heat = self.m1 * eos.phase1.cv + self.m2 * eos.phase2.cv;
        let t = eint / heat;
        if !(t > 0.0) {
            return Err(domain("T", t, "internal energy must be positive"));
        }
        Ok(Primitives {
            rho1: self.m1 / self.alpha1,
            rho2: self.m2 / alpha2,
            rho,
            y1,
            y2,
            v,
            v1,
            v2,
            t,
            ekin,
        })
    }

    /// Inverse of [`State::to_primitives`]: uses `ρ₁, ρ₂, v, w (from v₁−v₂), T`.
    pub fn from_primitives(p: &Primitives, alpha1: f64, eos: &MixtureEOS) -> Result<State> {
        let w = [p.v1[0] - p.v2[0], p.v1[1] - p.v2[1]];
        State::from_phase_values(alpha1, p.rho1, p.rho2, p.v, w, p.t, eos)
    }

    /// Build a state from volume fraction, phase densities, mixture and
    /// relative velocity and temperature.
    pub fn from_phase_values(
        alpha1: f64,
        rho1: f64,
        rho2: f64,
        v: [f64; 2],
        w: [f64; 2],
        t: f64,
        eos: &MixtureEOS,
    ) -> Result<State> {
        if !(alpha1 > 0.0 && alpha1 < 1.0) {
            return Err(domain("alpha1", alpha1, "must lie in (0, 1)"));
        }
        if !(rho1 > 0.0) {
            return Err(domain("rho1", rho1, "must be positive"));
        }
        if !(rho2 > 0.0) {
            return Err(domain("rho2", rho2, "must be positive"));
        }
        if !(t > 0.0) {
            return Err(domain("T", t, "must be positive"));
        }
        let m1 = alpha1 * rho1;
        let m2 = (1.0 - alpha1) * rho2;
        let rho = m1 + m2;
        let mut q = State {
            alpha1,
            m1,
            m2,
            mom: [rho * v[0], rho * v[1]],
            w,
            rho_e: 0.0,
        };
        q.rho_e = (m1 * eos.phase1.cv + m2 * eos.phase2.cv) * t + q.kinetic_energy();
        Ok(q)
    }

    /// Same as [`State::from_phase_values`] with the phase velocities given.
    pub fn from_phase_velocities(
        alpha1: f64,
        rho1: f64,
        rho2: f64,
        v1: [f64; 2],
        v2: [f64; 2],
        t: f64,
        eos: &MixtureEOS,
    ) -> Result<State> {
        let m1 = alpha1 * rho1;
        let m2 = (1.0 - alpha1) * rho2;
        let y1 = m1 / (m1 + m2);
        let y2 = 1.0 - y1;
        let v = [y1 * v1[0] + y2 * v2[0], y1 * v1[1] + y2 * v2[1]];
        let w = [v1[0] - v2[0], v1[1] - v2[1]];
        State::from_phase_values(alpha1, rho1, rho2, v, w, t, eos)
    }
}

impl Add for State {
    type Output = State;
    fn add(mut self, rhs: State) -> State {
        self.axpy(1.0, &rhs);
        self
    }
}

impl Sub for State {
    type Output = State;
    fn sub(mut self, rhs: State) -> State {
        self.axpy(-1.0, &rhs);
        self
    }
}

impl Mul<State> for f64 {
    type Output = State;
    fn mul(self, rhs: State) -> State {
        State::from_array(rhs.to_array().map(|v| self * v))
    }
}

/// Derived per-cell quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Primitives {
    pub rho1: f64,
    pub rho2: f64,
    pub rho: f64,
    pub y1: f64,
    pub y2: f64,
    pub v: [f64; 2],
    pub v1: [f64; 2],
    pub v2: [f64; 2],
    pub t: f64,
    /// Specific kinetic content `‖v‖²/2 + y₁y₂‖w‖²/2`.
    pub ekin: f64,
}

/// Local Mach numbers of both phases and of the mixture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MachNumbers {
    pub m1: f64,
    pub m2: f64,
    pub mix: f64,
}

pub fn mach_numbers(alpha1: f64, p: &Primitives, eos: &MixtureEOS) -> Result<MachNumbers> {
    if !(p.t > 0.0) {
        return Err(domain("T", p.t, "Mach numbers need positive temperature"));
    }
    let th = eval_thermo(alpha1, p.rho1, p.rho2, p.t, eos)?;
    let norm = |v: [f64; 2]| (v[0] * v[0] + v[1] * v[1]).sqrt();
    Ok(MachNumbers {
        m1: norm(p.v1) / th.a1_sq.sqrt(),
        m2: norm(p.v2) / th.a2_sq.sqrt(),
        mix: norm(p.v) / th.a_mix_sq.sqrt(),
    })
}

/// Boundary treatment of one side of the domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bc {
    Periodic,
    Transmissive,
    DirichletExact,
}

/// Side index into [`Grid::bc`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left = 0,
    Right = 1,
    Bottom = 2,
    Top = 3,
}

/// Uniform Cartesian grid. `ny == 1` means a 1D grid without y-ghosts.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    pub x0: f64,
    pub y0: f64,
    pub dx: f64,
    pub dy: f64,
    pub bc: [Bc; 4],
}

impl Grid {
    pub fn new_1d(n: usize, x0: f64, x1: f64, bc: Bc) -> Result<Self> {
        if n < 4 {
            return Err(SolverError::Config(format!("need at least 4 cells, got {n}")));
        }
        if !(x1 > x0) {
            return Err(SolverError::Config("empty domain".into()));
        }
        Ok(Self {
            nx: n,
            ny: 1,
            x0,
            y0: 0.0,
            dx: (x1 - x0) / n as f64,
            dy: 1.0,
            bc: [bc, bc, bc, bc],
        })
    }

    pub fn new_2d(nx: usize, ny: usize, lo: [f64; 2], hi: [f64; 2], bc: Bc) -> Result<Self> {
        if nx < 4 || ny < 4 {
            return Err(SolverError::Config(format!("need at least 4 cells per axis, got {nx}x{ny}")));
        }
        if !(hi[0] > lo[0] && hi[1] > lo[1]) {
            return Err(SolverError::Config("empty domain".into()));
        }
        Ok(Self {
            nx,
            ny,
            x0: lo[0],
            y0: lo[1],
            dx: (hi[0] - lo[0]) / nx as f64,
            dy: (hi[1] - lo[1]) / ny as f64,
            bc: [bc; 4],
        })
    }

    #[inline]
    pub fn dims(&self) -> usize {
        if self.ny == 1 {
            1
        } else {
            2
        }
    }

    /// Ghost width along y (zero in 1D).
    #[inline]
    pub fn gy(&self) -> usize {
        if self.ny == 1 {
            0
        } else {
            GHOST
        }
    }

    #[inline]
    pub fn stride(&self) -> usize {
        self.nx + 2 * GHOST
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.ny + 2 * self.gy()
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.stride() * self.rows()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn interior_len(&self) -> usize {
        self.nx * self.ny
    }

    /// Storage index of interior cell `(i, j)`, with `i < nx`, `j < ny`.
    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        (j + self.gy()) * self.stride() + i + GHOST
    }

    /// Storage index with signed offsets from interior cell `(i, j)`.
    #[inline]
    pub fn idx_off(&self, i: usize, j: usize, di: isize, dj: isize) -> usize {
        let ii = (i + GHOST) as isize + di;
        let jj = (j + self.gy()) as isize + dj;
        jj as usize * self.stride() + ii as usize
    }

    /// Cell centre of storage position `(ii, jj)` counted from the ghost corner.
    #[inline]
    pub fn centre_raw(&self, ii: usize, jj: usize) -> [f64; 2] {
        let x = self.x0 + (ii as f64 - GHOST as f64 + 0.5) * self.dx;
        let y = if self.ny == 1 {
            0.0
        } else {
            self.y0 + (jj as f64 - GHOST as f64 + 0.5) * self.dy
        };
        [x, y]
    }

    #[inline]
    pub fn centre(&self, i: usize, j: usize) -> [f64; 2] {
        self.centre_raw(i + GHOST, j + self.gy())
    }

    pub fn cell_volume(&self) -> f64 {
        if self.ny == 1 {
            self.dx
        } else {
            self.dx * self.dy
        }
    }

    /// Smallest cell width over the active axes.
    pub fn min_spacing(&self) -> f64 {
        if self.ny == 1 {
            self.dx
        } else {
            self.dx.min(self.dy)
        }
    }

    pub fn all_periodic(&self) -> bool {
        let active: &[Bc] = if self.ny == 1 { &self.bc[..2] } else { &self.bc[..] };
        active.iter().all(|b| *b == Bc::Periodic)
    }

    /// Iterate interior `(i, j)` pairs in storage order.
    pub fn interior(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.ny).flat_map(move |j| (0..self.nx).map(move |i| (i, j)))
    }
}

/// Sampler for `DirichletExact` ghost cells.
pub trait BoundarySampler {
    fn sample(&self, x: [f64; 2]) -> Result<State>;
}

impl<F: Fn([f64; 2]) -> Result<State>> BoundarySampler for F {
    fn sample(&self, x: [f64; 2]) -> Result<State> {
        self(x)
    }
}

/// Cell values over interior and ghost cells of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub grid: Grid,
    pub cells: Vec<State>,
}

impl Field {
    pub fn zeros(grid: &Grid) -> Self {
        Self {
            cells: vec![State::default(); grid.len()],
            grid: grid.clone(),
        }
    }

    /// Fill interior cells from a function of the cell centre.
    pub fn from_fn(grid: &Grid, mut f: impl FnMut([f64; 2]) -> Result<State>) -> Result<Self> {
        let mut out = Self::zeros(grid);
        for (i, j) in grid.interior() {
            let k = grid.idx(i, j);
            out.cells[k] = f(grid.centre(i, j))?;
        }
        Ok(out)
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> &State {
        &self.cells[self.grid.idx(i, j)]
    }

    #[inline]
    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut State {
        let k = self.grid.idx(i, j);
        &mut self.cells[k]
    }

    /// `self += a·x` over all storage (ghosts included).
    pub fn axpy(&mut self, a: f64, x: &Field) {
        for (c, d) in self.cells.iter_mut().zip(&x.cells) {
            c.axpy(a, d);
        }
    }

    pub fn interior_states(&self) -> impl Iterator<Item = &State> + '_ {
        self.grid.interior().map(move |(i, j)| self.at(i, j))
    }

    /// Check every interior cell.
    pub fn check_admissible(&self) -> Result<()> {
        for (i, j) in self.grid.interior() {
            self.at(i, j).check_admissible(i, j)?;
        }
        Ok(())
    }

    /// Compensated interior sums of `(m1, m2, ρv_x, ρv_y, ρE)` times the cell volume.
    pub fn conserved_totals(&self) -> [f64; 5] {
        let mut acc = [KahanSum::default(); 5];
        for q in self.interior_states() {
            acc[0].add(q.m1);
            acc[1].add(q.m2);
            acc[2].add(q.mom[0]);
            acc[3].add(q.mom[1]);
            acc[4].add(q.rho_e);
        }
        let vol = self.grid.cell_volume();
        acc.map(|a| a.value() * vol)
    }
}

/// Neumaier compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Fill the ghost layers of `f` according to the grid's boundary tags.
///
/// Interior cells are never touched. x-ghosts are filled first for interior
/// rows, then y-ghosts for complete rows, which also fills the corners.
pub fn apply_bc(f: &mut Field, exact: Option<&dyn BoundarySampler>) -> Result<()> {
    let g = f.grid.clone();
    let needs_sampler = g.bc[..if g.ny == 1 { 2 } else { 4 }].contains(&Bc::DirichletExact);
    if needs_sampler && exact.is_none() {
        return Err(SolverError::Config("DirichletExact boundary without a sampler".into()));
    }
    let s = g.stride();
    let gy = g.gy();
    let nx = g.nx;
    for jj in gy..gy + g.ny {
        for k in 0..GHOST {
            // left ghost column k (0 = outermost)
            let dst_l = jj * s + k;
            let dst_r = jj * s + GHOST + nx + k;
            f.cells[dst_l] = match g.bc[Side::Left as usize] {
                Bc::Periodic => f.cells[jj * s + nx + k],
                Bc::Transmissive => f.cells[jj * s + GHOST],
                Bc::DirichletExact => exact.unwrap().sample(g.centre_raw(k, jj))?,
            };
            f.cells[dst_r] = match g.bc[Side::Right as usize] {
                Bc::Periodic => f.cells[jj * s + GHOST + k],
                Bc::Transmissive => f.cells[jj * s + GHOST + nx - 1],
                Bc::DirichletExact => exact.unwrap().sample(g.centre_raw(GHOST + nx + k, jj))?,
            };
        }
    }
    if g.ny > 1 {
        let ny = g.ny;
        for k in 0..GHOST {
            for ii in 0..s {
                let dst_b = k * s + ii;
                let dst_t = (GHOST + ny + k) * s + ii;
                f.cells[dst_b] = match g.bc[Side::Bottom as usize] {
                    Bc::Periodic => f.cells[(ny + k) * s + ii],
                    Bc::Transmissive => f.cells[GHOST * s + ii],
                    Bc::DirichletExact => exact.unwrap().sample(g.centre_raw(ii, k))?,
                };
                f.cells[dst_t] = match g.bc[Side::Top as usize] {
                    Bc::Periodic => f.cells[(GHOST + k) * s + ii],
                    Bc::Transmissive => f.cells[(GHOST + ny - 1) * s + ii],
                    Bc::DirichletExact => exact.unwrap().sample(g.centre_raw(ii, GHOST + ny + k))?,
                };
            }
        }
    }
    Ok(())
}

/// Ghost filling for a scalar array laid out like a field: periodic sides
/// wrap, every other side mirrors the adjacent interior value.
pub fn fill_scalar_ghosts(g: &Grid, a: &mut [f64]) {
    let s = g.stride();
    let gy = g.gy();
    let nx = g.nx;
    for jj in gy..gy + g.ny {
        for k in 0..GHOST {
            a[jj * s + k] = if g.bc[0] == Bc::Periodic {
                a[jj * s + nx + k]
            } else {
                a[jj * s + 2 * GHOST - 1 - k]
            };
            a[jj * s + GHOST + nx + k] = if g.bc[1] == Bc::Periodic {
                a[jj * s + GHOST + k]
            } else {
                a[jj * s + GHOST + nx - 1 - k]
            };
        }
    }
    if g.ny > 1 {
        let ny = g.ny;
        for k in 0..GHOST {
            for ii in 0..s {
                a[k * s + ii] = if g.bc[2] == Bc::Periodic {
                    a[(ny + k) * s + ii]
                } else {
                    a[(2 * GHOST - 1 - k) * s + ii]
                };
                a[(GHOST + ny + k) * s + ii] = if g.bc[3] == Bc::Periodic {
                    a[(GHOST + k) * s + ii]
                } else {
                    a[(GHOST + ny - 1 - k) * s + ii]
                };
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eos::PhaseParams;
    use approx::assert_relative_eq;

    fn eos() -> MixtureEOS {
        MixtureEOS::homogeneous(PhaseParams::new(1.4, 1.0).unwrap(), PhaseParams::new(2.0, 1.0).unwrap())
    }

    #[test]
    fn mixture_density_and_mass_fraction() {
        let e = eos();
        let q = State::from_phase_values(0.5, 2.0, 1.0, [0.0; 2], [0.0; 2], 1.0, &e).unwrap();
        let p = q.to_primitives(&e).unwrap();
        assert_relative_eq!(p.rho, 1.5, epsilon = 1e-15);
        assert_relative_eq!(p.y1, 2.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn temperature_at_rest() {
        let e = eos();
        let t0 = 1.7;
        let (a, r1, r2) = (0.3, 1.2, 0.8);
        let q = State {
            alpha1: a,
            m1: a * r1,
            m2: (1.0 - a) * r2,
            mom: [0.0; 2],
            w: [0.0; 2],
            rho_e: (a * r1 * 1.0 + (1.0 - a) * r2 * 1.0) * t0,
        };
        assert_relative_eq!(q.to_primitives(&e).unwrap().t, t0, epsilon = 1e-15);
    }

    #[test]
    fn nonpositive_internal_energy_is_rejected() {
        let e = eos();
        let mut q = State::from_phase_values(0.5, 1.0, 1.0, [1.0, 0.0], [0.0; 2], 1.0, &e).unwrap();
        q.rho_e = 0.1;
        assert!(q.to_primitives(&e).is_err());
        assert!(matches!(q.check_admissible(3, 4), Err(SolverError::Admissibility { i: 3, j: 4, .. })));
    }

    #[test]
    fn alpha_clip_is_a_hard_error() {
        let e = eos();
        let q = State::from_phase_values(1e-9, 1.0, 1.0, [0.0; 2], [0.0; 2], 1.0, &e).unwrap();
        assert!(q.check_admissible(0, 0).is_err());
    }

    #[test]
    fn zero_velocity_zero_mach() {
        let e = eos();
        let q = State::from_phase_values(0.5, 1.0, 1.0, [0.0; 2], [0.0; 2], 1.0, &e).unwrap();
        let m = mach_numbers(q.alpha1, &q.to_primitives(&e).unwrap(), &e).unwrap();
        assert_eq!((m.m1, m.m2, m.mix), (0.0, 0.0, 0.0));
    }

    fn tagged_field(g: &Grid) -> Field {
        let mut f = Field::zeros(g);
        for (i, j) in g.interior() {
            f.at_mut(i, j).alpha1 = (i + 100 * j) as f64;
        }
        f
    }

    #[test]
    fn periodic_1d_wraps() {
        let g = Grid::new_1d(4, 0.0, 1.0, Bc::Periodic).unwrap();
        let mut f = tagged_field(&g);
        apply_bc(&mut f, None).unwrap();
        let a: Vec<f64> = f.cells.iter().map(|c| c.alpha1).collect();
        // interior cells 0..4 carry tags 0,1,2,3; left ghosts hold the last two
        assert_eq!(a, vec![2.0, 3.0, 0.0, 1.0, 2.0, 3.0, 0.0, 1.0]);
    }

    #[test]
    fn transmissive_copies_neighbour() {
        let g = Grid::new_2d(4, 5, [0.0; 2], [1.0; 2], Bc::Transmissive).unwrap();
        let mut f = tagged_field(&g);
        apply_bc(&mut f, None).unwrap();
        for j in 0..5 {
            assert_eq!(f.cells[g.idx_off(0, j, -1, 0)].alpha1, f.at(0, j).alpha1);
            assert_eq!(f.cells[g.idx_off(0, j, -2, 0)].alpha1, f.at(0, j).alpha1);
            assert_eq!(f.cells[g.idx_off(3, j, 2, 0)].alpha1, f.at(3, j).alpha1);
        }
        for i in 0..4 {
            assert_eq!(f.cells[g.idx_off(i, 4, 0, 2)].alpha1, f.at(i, 4).alpha1);
        }
    }

    #[test]
    fn dirichlet_requires_sampler() {
        let g = Grid::new_1d(4, 0.0, 1.0, Bc::DirichletExact).unwrap();
        let mut f = tagged_field(&g);
        assert!(matches!(apply_bc(&mut f, None), Err(SolverError::Config(_))));
        let sampler = |x: [f64; 2]| -> Result<State> { Ok(State { alpha1: x[0], ..State::default() }) };
        apply_bc(&mut f, Some(&sampler)).unwrap();
        assert_relative_eq!(f.cells[0].alpha1, -1.5 * 0.25, epsilon = 1e-15);
        assert_relative_eq!(f.cells[7].alpha1, 1.0 + 1.5 * 0.25, epsilon = 1e-15);
    }

    #[test]
    fn kahan_sum_recovers_small_terms() {
        let mut k = KahanSum::default();
        k.add(1e16);
        for _ in 0..10 {
            k.add(1.0);
        }
        k.add(-1e16);
        assert_eq!(k.value(), 10.0);
    }
}
