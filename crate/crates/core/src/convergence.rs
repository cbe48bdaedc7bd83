//! Mesh-refinement studies against the exact vortex.

use crate::cases::{vortex_case, VortexKind};
use crate::diagnostics::{eoc, l1_error_sampled, ERROR_VARS};
use crate::error::{Result, SolverError};
use crate::imex::Solver;

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub errors: [f64; 8],
    pub steps: usize,
    pub linear_iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    /// EOC sequence of variable `v` (index into [`ERROR_VARS`]).
    pub fn eoc(&self, v: usize) -> Vec<Option<f64>> {
        let e: Vec<f64> = self.rows.iter().map(|r| r.errors[v]).collect();
        eoc(&e)
    }

    /// EOC of every variable between the two finest resolutions.
    pub fn finest_eoc(&self) -> Option<[Option<f64>; 8]> {
        if self.rows.len() < 2 {
            return None;
        }
        let mut out = [None; 8];
        for (v, o) in out.iter_mut().enumerate() {
            *o = *self.eoc(v).last().unwrap();
        }
        Some(out)
    }

    /// Variables as rows, resolutions as columns, each error followed by its EOC.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("variable");
        for r in &self.rows {
            s.push_str(&format!(",err_{0},eoc_{0}", r.n));
        }
        s.push('\n');
        for (v, name) in ERROR_VARS.iter().enumerate() {
            s.push_str(name);
            let orders = self.eoc(v);
            for (k, r) in self.rows.iter().enumerate() {
                s.push_str(&format!(",{:.6e},", r.errors[v]));
                if k > 0 {
                    if let Some(o) = orders[k - 1] {
                        s.push_str(&format!("{o:.4}"));
                    }
                }
            }
            s.push('\n');
        }
        s
    }
}

/// Run the vortex to its final time at every resolution, each from scratch.
pub fn vortex_convergence(kind: VortexKind, resolutions: &[usize], order: u8, nu: f64) -> Result<ConvergenceTable> {
    if resolutions.is_empty() {
        return Err(SolverError::Config("no resolutions given".into()));
    }
    let mut table = ConvergenceTable::default();
    for &n in resolutions {
        let case = vortex_case(kind, n)?;
        let solver = Solver::new(&case.initial, case.eos, order, case.sampler())?;
        let cfg = case.run_config(order, nu);
        let out = solver.run(&case.initial, &cfg, |_, _| Ok(()))?;
        let exact = case.exact.as_ref().expect("vortex has an exact solution");
        table.rows.push(ConvergenceRow {
            n,
            errors: l1_error_sampled(&out.field, exact, &case.eos)?,
            steps: out.steps,
            linear_iterations: out.linear_iterations,
        });
    }
    Ok(table)
}
