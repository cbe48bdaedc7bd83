//! Post-processing: L1 errors and EOC, discrete divergence, conservation
//! sums, Mach extrema and entropy production.

use crate::eos::{entropy_production, eval_thermo, MixtureEOS};
use crate::error::{Result, SolverError};
use crate::state::{fill_scalar_ghosts, mach_numbers, BoundarySampler, Field, Grid, KahanSum, MachNumbers, State};

/// Variables of the error tables, in order.
pub const ERROR_VARS: [&str; 8] = ["alpha1", "rho1", "rho2", "v1x", "v2x", "v1y", "v2y", "T"];

/// Values of [`ERROR_VARS`] for one state.
pub fn error_vars(q: &State, eos: &MixtureEOS) -> Result<[f64; 8]> {
    let p = q.to_primitives(eos)?;
    Ok([q.alpha1, p.rho1, p.rho2, p.v1[0], p.v2[0], p.v1[1], p.v2[1], p.t])
}

fn l1_with(f: &Field, eos: &MixtureEOS, mut other: impl FnMut(usize, usize) -> Result<[f64; 8]>) -> Result<[f64; 8]> {
    let mut acc: [KahanSum; 8] = Default::default();
    for (i, j) in f.grid.interior() {
        let a = error_vars(f.at(i, j), eos)?;
        let b = other(i, j)?;
        for v in 0..8 {
            acc[v].add((a[v] - b[v]).abs());
        }
    }
    let vol = f.grid.cell_volume();
    Ok(acc.map(|s| s.value() * vol))
}

/// `Σ_I |q_I − q_I^ref| |Ω_I|` per variable against a field on the same grid.
pub fn l1_error(f: &Field, reference: &Field, eos: &MixtureEOS) -> Result<[f64; 8]> {
    let (a, b) = (&f.grid, &reference.grid);
    if a.nx != b.nx || a.ny != b.ny || a.x0 != b.x0 || a.y0 != b.y0 || a.dx != b.dx || a.dy != b.dy {
        return Err(SolverError::Config("l1_error: grids differ".into()));
    }
    l1_with(f, eos, |i, j| error_vars(reference.at(i, j), eos))
}

/// L1 error against point values of an exact solution at cell centres.
pub fn l1_error_sampled(f: &Field, exact: &dyn BoundarySampler, eos: &MixtureEOS) -> Result<[f64; 8]> {
    l1_with(f, eos, |i, j| error_vars(&exact.sample(f.grid.centre(i, j))?, eos))
}

/// `log₂(e_k / e_{k+1})` for errors at doubling resolutions. `None` where an
/// error is not positive.
pub fn eoc(errors: &[f64]) -> Vec<Option<f64>> {
    errors
        .windows(2)
        .map(|w| (w[0] > 0.0 && w[1] > 0.0).then(|| (w[0] / w[1]).log2()))
        .collect()
}

/// Centred divergence of the mixture velocity.
#[derive(Debug, Clone, PartialEq)]
pub struct Divergence {
    /// interior values, row-major
    pub cells: Vec<f64>,
    pub max: f64,
    /// `Σ |div v| |Ω_I|`
    pub l1: f64,
}

/// Velocity component `c` on padded storage with periodic or mirrored ghosts.
pub(crate) fn padded_velocity(f: &Field, c: usize) -> Vec<f64> {
    let g = &f.grid;
    let mut a = vec![0.0; g.len()];
    for (i, j) in g.interior() {
        a[g.idx(i, j)] = f.at(i, j).velocity()[c];
    }
    fill_scalar_ghosts(g, &mut a);
    a
}

/// Discrete divergence with the same centred operator the implicit stage uses.
pub fn discrete_divergence(f: &Field) -> Divergence {
    let g: &Grid = &f.grid;
    let vx = padded_velocity(f, 0);
    let vy = padded_velocity(f, 1);
    let mut cells = Vec::with_capacity(g.interior_len());
    let (mut max, mut l1) = (0.0f64, KahanSum::default());
    for (i, j) in g.interior() {
        let mut d = (vx[g.idx_off(i, j, 1, 0)] - vx[g.idx_off(i, j, -1, 0)]) / (2.0 * g.dx);
        if g.dims() == 2 {
            d += (vy[g.idx_off(i, j, 0, 1)] - vy[g.idx_off(i, j, 0, -1)]) / (2.0 * g.dy);
        }
        max = max.max(d.abs());
        l1.add(d.abs());
        cells.push(d);
    }
    Divergence {
        cells,
        max,
        l1: l1.value() * g.cell_volume(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyReport {
    /// `Σ (α₁ρ₁s₁ + α₂ρ₂s₂) |Ω_I|`
    pub total: f64,
    pub min_pi: f64,
    pub max_pi: f64,
}

/// Total mixture entropy and the range of the entropy production `Π`.
pub fn entropy_report(f: &Field, eos: &MixtureEOS) -> Result<EntropyReport> {
    let mut total = KahanSum::default();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (i, j) in f.grid.interior() {
        let q = f.at(i, j);
        let p = q.to_primitives(eos)?;
        let th = eval_thermo(q.alpha1, p.rho1, p.rho2, p.t, eos)?;
        total.add(q.m1 * th.s1 + q.m2 * th.s2);
        let pi = entropy_production(&th, p.rho, p.y1, q.w[0] * q.w[0] + q.w[1] * q.w[1], eos)?;
        lo = lo.min(pi);
        hi = hi.max(pi);
    }
    Ok(EntropyReport {
        total: total.value() * f.grid.cell_volume(),
        min_pi: lo,
        max_pi: hi,
    })
}

/// Componentwise maxima of the phase and mixture Mach numbers.
pub fn mach_extrema(f: &Field, eos: &MixtureEOS) -> Result<MachNumbers> {
    let mut m = MachNumbers {
        m1: 0.0,
        m2: 0.0,
        mix: 0.0,
    };
    for q in f.interior_states() {
        let c = mach_numbers(q.alpha1, &q.to_primitives(eos)?, eos)?;
        m.m1 = m.m1.max(c.m1);
        m.m2 = m.m2.max(c.m2);
        m.mix = m.mix.max(c.mix);
    }
    Ok(m)
}

/// `Σ |q_c| |Ω_I|` for the conserved components `(m1, m2, mom_x, mom_y, ρE)`.
pub fn absolute_totals(f: &Field) -> [f64; 5] {
    let mut acc: [KahanSum; 5] = Default::default();
    for q in f.interior_states() {
        for (a, v) in acc.iter_mut().zip([q.m1, q.m2, q.mom[0], q.mom[1], q.rho_e]) {
            a.add(v.abs());
        }
    }
    let vol = f.grid.cell_volume();
    acc.map(|s| s.value() * vol)
}

/// Change of the conserved totals relative to their absolute content.
pub fn conservation_drift(before: &Field, after: &Field) -> [f64; 5] {
    let a = before.conserved_totals();
    let b = after.conserved_totals();
    let s = absolute_totals(before);
    let mut out = [0.0; 5];
    for c in 0..5 {
        out[c] = if s[c] > 0.0 { (b[c] - a[c]).abs() / s[c] } else { (b[c] - a[c]).abs() };
    }
    out
}

/// One row of the run report.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldReport {
    pub step: usize,
    pub time: f64,
    pub dt: f64,
    pub linear_iterations: usize,
    pub totals: [f64; 5],
    pub div_max: f64,
    pub div_l1: f64,
    pub mach: MachNumbers,
    pub entropy: EntropyReport,
    pub l1: Option<[f64; 8]>,
}

impl FieldReport {
    pub fn compute(
        f: &Field,
        eos: &MixtureEOS,
        step: usize,
        time: f64,
        dt: f64,
        linear_iterations: usize,
        exact: Option<&dyn BoundarySampler>,
    ) -> Result<Self> {
        let div = discrete_divergence(f);
        Ok(Self {
            step,
            time,
            dt,
            linear_iterations,
            totals: f.conserved_totals(),
            div_max: div.max,
            div_l1: div.l1,
            mach: mach_extrema(f, eos)?,
            entropy: entropy_report(f, eos)?,
            l1: exact.map(|e| l1_error_sampled(f, e, eos)).transpose()?,
        })
    }

    pub fn csv_header() -> String {
        let mut h = String::from(
            "step,time,dt,linear_iterations,mass1,mass2,mom_x,mom_y,energy,div_max,div_l1,mach1,mach2,mach_mix,entropy,pi_min,pi_max",
        );
        for v in ERROR_VARS {
            h.push_str(",l1_");
            h.push_str(v);
        }
        h
    }

    pub fn csv_row(&self) -> String {
        let mut cols = vec![
            self.step.to_string(),
            format!("{:.16e}", self.time),
            format!("{:.16e}", self.dt),
            self.linear_iterations.to_string(),
        ];
        let nums = self.totals.iter().copied().chain([
            self.div_max,
            self.div_l1,
            self.mach.m1,
            self.mach.m2,
            self.mach.mix,
            self.entropy.total,
            self.entropy.min_pi,
            self.entropy.max_pi,
        ]);
        cols.extend(nums.map(|v| format!("{v:.16e}")));
        match &self.l1 {
            Some(e) => cols.extend(e.iter().map(|v| format!("{v:.16e}"))),
            None => cols.extend(std::iter::repeat_n(String::new(), ERROR_VARS.len())),
        }
        cols.join(",")
    }
}
