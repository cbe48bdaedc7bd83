//! IMEX Runge-Kutta driver: Butcher pairs, the stage loop, the material CFL
//! time step and the time-marching loop.

use crate::eos::MixtureEOS;
use crate::error::{Result, SolverError};
use crate::explicit::{explicit_rhs, max_explicit_speed, ExplicitConfig};
use crate::implicit::{implicit_stage, ImplicitConfig, ReferenceState};
use crate::state::{apply_bc, BoundarySampler, Field};

/// Explicit tableau `(Ã, b̃)` paired with the implicit tableau `(A, b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ButcherPair {
    pub name: &'static str,
    pub a_ex: Vec<Vec<f64>>,
    pub b_ex: Vec<f64>,
    pub a_im: Vec<Vec<f64>>,
    pub b_im: Vec<f64>,
}

impl ButcherPair {
    /// Forward/backward Euler written as a two-stage pair.
    pub fn euler() -> Self {
        Self {
            name: "euler",
            a_ex: vec![vec![0.0, 0.0], vec![1.0, 0.0]],
            b_ex: vec![1.0, 0.0],
            a_im: vec![vec![0.0, 0.0], vec![0.0, 1.0]],
            b_im: vec![0.0, 1.0],
        }
    }

    /// ARS(2,2,2) with `γ = 1 − 1/√2`, `δ = 1 − 1/(2γ)`.
    pub fn ars222() -> Self {
        let g = 1.0 - 1.0 / 2f64.sqrt();
        let d = 1.0 - 1.0 / (2.0 * g);
        Self {
            name: "ars222",
            a_ex: vec![vec![0.0, 0.0, 0.0], vec![g, 0.0, 0.0], vec![d, 1.0 - d, 0.0]],
            b_ex: vec![d, 1.0 - d, 0.0],
            a_im: vec![vec![0.0, 0.0, 0.0], vec![0.0, g, 0.0], vec![0.0, 1.0 - g, g]],
            b_im: vec![0.0, 1.0 - g, g],
        }
    }

    /// Pair matching a spatial order: Euler for 1, ARS(2,2,2) for 2.
    pub fn for_order(order: u8) -> Result<Self> {
        match order {
            1 => Ok(Self::euler()),
            2 => Ok(Self::ars222()),
            o => Err(SolverError::Config(format!("unsupported order {o}"))),
        }
    }

    pub fn stages(&self) -> usize {
        self.b_ex.len()
    }

    /// Last rows of both tableaux equal their weights.
    pub fn is_gsa(&self) -> bool {
        let s = self.stages();
        self.a_ex[s - 1] == self.b_ex && self.a_im[s - 1] == self.b_im
    }

    /// Shape and triangularity checks; with `require_gsa` also the GSA rows.
    pub fn validate(&self, require_gsa: bool) -> Result<()> {
        let s = self.stages();
        let bad = |m: String| Err(SolverError::Config(format!("tableau {}: {m}", self.name)));
        if s == 0 || self.b_im.len() != s || self.a_ex.len() != s || self.a_im.len() != s {
            return bad("inconsistent stage counts".into());
        }
        for k in 0..s {
            if self.a_ex[k].len() != s || self.a_im[k].len() != s {
                return bad(format!("row {k} has wrong length"));
            }
            if self.a_ex[k][k..].iter().any(|&v| v != 0.0) {
                return bad(format!("explicit row {k} is not strictly lower triangular"));
            }
            if self.a_im[k][k + 1..].iter().any(|&v| v != 0.0) {
                return bad(format!("implicit row {k} is not lower triangular"));
            }
        }
        if require_gsa && !self.is_gsa() {
            return bad("not globally stiffly accurate".into());
        }
        Ok(())
    }
}

/// A problem split into a nonstiff part integrated explicitly and a stiff
/// part solved implicitly, with the vector operations the stage loop needs.
pub trait SplitProblem {
    type Vector: Clone;

    /// Explicit rate `E(u)`.
    fn explicit_rate(&mut self, u: &Self::Vector) -> Result<Self::Vector>;

    /// Solve `q = star + h I(q)` with coefficients frozen at `frozen`.
    fn implicit_solve(&mut self, star: &Self::Vector, frozen: &Self::Vector, h: f64) -> Result<Self::Vector>;

    /// `y ← y + a x`
    fn axpy(y: &mut Self::Vector, a: f64, x: &Self::Vector);
}

/// One IMEX step. Stage errors are annotated with their stage index.
pub fn imex_step<P: SplitProblem>(p: &mut P, u: &P::Vector, dt: f64, tab: &ButcherPair) -> Result<P::Vector> {
    let s = tab.stages();
    let gsa = tab.is_gsa();
    let mut ex: Vec<Option<P::Vector>> = Vec::with_capacity(s);
    // implicit increments kept as `(q_k − q*_k, h_k)`, so that `I_k = inc / h_k`
    let mut im: Vec<Option<(P::Vector, f64)>> = Vec::with_capacity(s);
    let mut prev = u.clone();
    let wrap = |k: usize| move |e: SolverError| SolverError::Stage { stage: k, source: Box::new(e) };
    for k in 0..s {
        let mut star = u.clone();
        for i in 0..k {
            if let (Some(e), a) = (&ex[i], tab.a_ex[k][i]) {
                if a != 0.0 {
                    P::axpy(&mut star, dt * a, e);
                }
            }
            if let (Some((inc, h)), a) = (&im[i], tab.a_im[k][i]) {
                if a != 0.0 {
                    P::axpy(&mut star, dt * a / h, inc);
                }
            }
        }
        let akk = tab.a_im[k][k];
        let qk = if akk != 0.0 && dt != 0.0 {
            let h = akk * dt;
            let q = p.implicit_solve(&star, &prev, h).map_err(wrap(k))?;
            let mut inc = q.clone();
            P::axpy(&mut inc, -1.0, &star);
            im.push(Some((inc, h)));
            q
        } else {
            im.push(None);
            star
        };
        // the explicit rate of the last stage is only needed without GSA
        let needed = (k + 1..s).any(|r| tab.a_ex[r][k] != 0.0) || (!gsa && tab.b_ex[k] != 0.0);
        ex.push(if needed { Some(p.explicit_rate(&qk).map_err(wrap(k))?) } else { None });
        prev = qk;
    }
    if gsa {
        return Ok(prev);
    }
    let mut out = u.clone();
    for k in 0..s {
        if let Some(e) = &ex[k] {
            P::axpy(&mut out, dt * tab.b_ex[k], e);
        }
        if let Some((inc, h)) = &im[k] {
            P::axpy(&mut out, dt * tab.b_im[k] / h, inc);
        }
    }
    Ok(out)
}

/// The RS-IMEX finite-volume discretization as a [`SplitProblem`] on fields.
pub struct FieldProblem<'a> {
    pub eos: &'a MixtureEOS,
    pub rs: &'a ReferenceState,
    pub explicit: ExplicitConfig,
    pub implicit: ImplicitConfig,
    pub exact: Option<&'a dyn BoundarySampler>,
    /// Linear iterations accumulated since construction.
    pub linear_iterations: usize,
}

impl SplitProblem for FieldProblem<'_> {
    type Vector = Field;

    fn explicit_rate(&mut self, u: &Field) -> Result<Field> {
        let mut src = u.clone();
        apply_bc(&mut src, self.exact)?;
        src.check_admissible()?;
        explicit_rhs(&src, &self.explicit, self.eos)
    }

    fn implicit_solve(&mut self, star: &Field, frozen: &Field, h: f64) -> Result<Field> {
        star.check_admissible()?;
        let (q, st) = implicit_stage(star, frozen, h, self.rs, self.eos, &self.implicit)?;
        self.linear_iterations += st.linear_iterations;
        Ok(q)
    }

    fn axpy(y: &mut Field, a: f64, x: &Field) {
        y.axpy(a, x);
    }
}

/// Material CFL step `ν Δx_min / max(s_max, speed_floor)`, capped by `dt_max`.
pub fn compute_dt(f: &Field, nu: f64, speed_floor: f64, dt_max: f64) -> Result<f64> {
    let s = max_explicit_speed(f).max(speed_floor);
    let dt = if s > 0.0 { nu * f.grid.min_spacing() / s } else { f64::INFINITY };
    let dt = dt.min(dt_max);
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(SolverError::Config(format!(
            "no usable time step (max speed {s:e}, dt_max {dt_max:e})"
        )));
    }
    Ok(dt)
}

/// Time-marching controls.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub nu: f64,
    pub t_final: f64,
    pub order: u8,
    pub speed_floor: f64,
    pub dt_max: f64,
    /// Output times strictly inside `(0, t_final)`; the step is clipped to hit them.
    pub output_times: Vec<f64>,
    /// Stop after this many steps even if `t_final` is not reached.
    pub max_steps: Option<usize>,
}

impl RunConfig {
    pub fn new(nu: f64, t_final: f64, order: u8) -> Self {
        Self {
            nu,
            t_final,
            order,
            speed_floor: 0.0,
            dt_max: f64::INFINITY,
            output_times: Vec::new(),
            max_steps: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nu > 0.0 && self.nu <= 1.0) {
            return Err(SolverError::Config(format!("cfl nu = {} outside (0, 1]", self.nu)));
        }
        if !(self.t_final >= 0.0) || (self.t_final.is_infinite() && self.max_steps.is_none()) {
            return Err(SolverError::Config(format!(
                "t_final = {} invalid (an infinite final time needs max_steps)",
                self.t_final
            )));
        }
        if self.order != 1 && self.order != 2 {
            return Err(SolverError::Config(format!("order {} unsupported", self.order)));
        }
        Ok(())
    }
}

/// What the observer sees after each accepted step (and once at `t = 0`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInfo {
    pub step: usize,
    pub time: f64,
    pub dt: f64,
    pub linear_iterations: usize,
    /// Set at `t = 0`, at every output time and at the final time.
    pub output: bool,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub field: Field,
    pub steps: usize,
    pub time: f64,
    pub linear_iterations: usize,
    pub dts: Vec<f64>,
}

/// Complete solver setup for one case.
pub struct Solver<'a> {
    pub eos: MixtureEOS,
    pub rs: ReferenceState,
    pub tableau: ButcherPair,
    pub explicit: ExplicitConfig,
    pub implicit: ImplicitConfig,
    pub exact: Option<&'a dyn BoundarySampler>,
}

impl<'a> Solver<'a> {
    /// Standard setup for `order`: the reference state is taken from `f0`.
    pub fn new(f0: &Field, eos: MixtureEOS, order: u8, exact: Option<&'a dyn BoundarySampler>) -> Result<Self> {
        let tableau = ButcherPair::for_order(order)?;
        tableau.validate(true)?;
        Ok(Self {
            rs: ReferenceState::from_field(f0, &eos)?,
            eos,
            tableau,
            explicit: ExplicitConfig::split(order),
            implicit: ImplicitConfig::default(),
            exact,
        })
    }

    /// One IMEX step; returns the new field and the linear iterations spent.
    pub fn step(&self, f: &Field, dt: f64) -> Result<(Field, usize)> {
        let mut p = FieldProblem {
            eos: &self.eos,
            rs: &self.rs,
            explicit: self.explicit,
            implicit: self.implicit,
            exact: self.exact,
            linear_iterations: 0,
        };
        let out = imex_step(&mut p, f, dt, &self.tableau)?;
        Ok((out, p.linear_iterations))
    }

    /// March to `cfg.t_final`. The observer is called at `t = 0` and after every step.
    pub fn run(
        &self,
        f0: &Field,
        cfg: &RunConfig,
        mut observer: impl FnMut(&StepInfo, &Field) -> Result<()>,
    ) -> Result<RunSummary> {
        cfg.validate()?;
        let mut f = f0.clone();
        apply_bc(&mut f, self.exact)?;
        let mut t = 0.0;
        let mut steps = 0;
        let mut total_iters = 0;
        let mut dts = Vec::new();
        let mut outputs = cfg.output_times.iter().copied().filter(|&x| x > 0.0 && x < cfg.t_final).peekable();
        observer(
            &StepInfo {
                step: 0,
                time: 0.0,
                dt: 0.0,
                linear_iterations: 0,
                output: true,
            },
            &f,
        )?;
        while t < cfg.t_final && cfg.max_steps.is_none_or(|m| steps < m) {
            let mut dt = compute_dt(&f, cfg.nu, cfg.speed_floor, cfg.dt_max)?;
            let mut hit_output = false;
            if let Some(&next) = outputs.peek() {
                if t + dt >= next {
                    dt = next - t;
                    hit_output = true;
                }
            }
            let last = t + dt >= cfg.t_final;
            if last {
                dt = cfg.t_final - t;
            }
            let (nf, iters) = self.step(&f, dt).map_err(|e| SolverError::Step {
                step: steps,
                time: t,
                source: Box::new(e),
            })?;
            f = nf;
            t = if last { cfg.t_final } else { t + dt };
            if hit_output {
                outputs.next();
            }
            steps += 1;
            total_iters += iters;
            dts.push(dt);
            observer(
                &StepInfo {
                    step: steps,
                    time: t,
                    dt,
                    linear_iterations: iters,
                    output: hit_output || last,
                },
                &f,
            )?;
        }
        apply_bc(&mut f, self.exact)?;
        Ok(RunSummary {
            field: f,
            steps,
            time: t,
            linear_iterations: total_iters,
            dts,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `q' = λ_ex q + λ_im q` with the implicit part solved exactly.
    struct Linear {
        lam_ex: f64,
        lam_im: f64,
    }

    impl SplitProblem for Linear {
        type Vector = f64;
        fn explicit_rate(&mut self, u: &f64) -> Result<f64> {
            Ok(self.lam_ex * u)
        }
        fn implicit_solve(&mut self, star: &f64, _frozen: &f64, h: f64) -> Result<f64> {
            Ok(star / (1.0 - h * self.lam_im))
        }
        fn axpy(y: &mut f64, a: f64, x: &f64) {
            *y += a * x;
        }
    }

    fn integrate(tab: &ButcherPair, n: usize) -> f64 {
        let mut p = Linear { lam_ex: -0.7, lam_im: -2.0 };
        let dt = 1.0 / n as f64;
        let mut u = 1.0;
        for _ in 0..n {
            u = imex_step(&mut p, &u, dt, tab).unwrap();
        }
        u
    }

    #[test]
    fn tableaux_are_gsa() {
        ButcherPair::euler().validate(true).unwrap();
        ButcherPair::ars222().validate(true).unwrap();
    }

    #[test]
    fn rejects_non_gsa_when_required() {
        let mut t = ButcherPair::ars222();
        t.b_ex = vec![0.0, 0.5, 0.5];
        assert!(t.validate(true).is_err());
        assert!(t.validate(false).is_ok());
    }

    #[test]
    fn euler_pair_is_forward_then_backward() {
        let mut p = Linear { lam_ex: 3.0, lam_im: -5.0 };
        let u = imex_step(&mut p, &2.0, 0.1, &ButcherPair::euler()).unwrap();
        assert!((u - 2.0 * 1.3 / 1.5).abs() < 1e-15);
    }

    #[test]
    fn observed_orders() {
        let exact = (-2.7f64).exp();
        for (tab, lo) in [(ButcherPair::euler(), 0.95), (ButcherPair::ars222(), 1.9)] {
            let e1 = (integrate(&tab, 100) - exact).abs();
            let e2 = (integrate(&tab, 200) - exact).abs();
            let order = (e1 / e2).log2();
            assert!(order > lo, "{}: order {order}", tab.name);
        }
    }

    #[test]
    fn cfl_example() {
        use crate::eos::PhaseParams;
        use crate::state::{Bc, Grid, State};
        let g = Grid::new_1d(100, 0.0, 1.0, Bc::Periodic).unwrap();
        let e = MixtureEOS::homogeneous(PhaseParams::new(1.4, 1.0).unwrap(), PhaseParams::new(2.0, 1.0).unwrap());
        let f = Field::from_fn(&g, |_| State::from_phase_values(0.5, 1.0, 1.0, [2.0, 0.0], [0.0; 2], 1.0, &e)).unwrap();
        assert!((compute_dt(&f, 0.5, 0.0, f64::INFINITY).unwrap() - 0.0025).abs() < 1e-15);
        let rest = Field::from_fn(&g, |_| State::from_phase_values(0.5, 1.0, 1.0, [0.0; 2], [0.0; 2], 1.0, &e)).unwrap();
        assert_eq!(compute_dt(&rest, 0.5, 0.0, 0.1).unwrap(), 0.1);
        assert!(compute_dt(&rest, 0.5, 0.0, f64::INFINITY).is_err());
    }
}
