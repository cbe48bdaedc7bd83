//! Inputs for the stage benchmarks: a periodic bubble field at a material-CFL
//! step, its explicit predictor and the assembled energy system.

use rsimex::cases::bubble_case;
use rsimex::explicit::explicit_rhs;
use rsimex::imex::compute_dt;
use rsimex::implicit::{assemble_energy_system, EllipticSystem};
use rsimex::state::apply_bc;
use rsimex::{CaseSpec, ExplicitConfig, Field, ImplicitConfig, ReferenceState, Result};

pub struct Workload {
    pub case: CaseSpec,
    pub explicit: ExplicitConfig,
    pub implicit: ImplicitConfig,
    pub rs: ReferenceState,
    pub dt: f64,
    /// Forward-Euler predictor `q + Δt L_ex(q)`.
    pub star: Field,
}

impl Workload {
    pub fn bubble(n: usize) -> Result<Self> {
        let mut case = bubble_case(10.0, n)?;
        apply_bc(&mut case.initial, None)?;
        let explicit = ExplicitConfig::split(2);
        let rs = ReferenceState::from_field(&case.initial, &case.eos)?;
        let dt = compute_dt(&case.initial, 0.25, case.speed_floor, f64::INFINITY)?;
        let mut star = case.initial.clone();
        star.axpy(dt, &explicit_rhs(&case.initial, &explicit, &case.eos)?);
        apply_bc(&mut star, None)?;
        Ok(Self {
            case,
            explicit,
            implicit: ImplicitConfig::default(),
            rs,
            dt,
            star,
        })
    }

    pub fn energy_system(&self) -> Result<EllipticSystem> {
        let (sys, _) =
            assemble_energy_system(&self.star, &self.case.initial, self.dt, &self.rs, &self.case.eos, &self.implicit)?;
        Ok(sys)
    }
}
