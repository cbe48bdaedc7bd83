//! Subcommand implementations.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context};
use rsimex::cases::VortexKind;
use rsimex::convergence::vortex_convergence;
use rsimex::diagnostics::conservation_drift;
use rsimex::io::{write_diagonal_csv, write_field_csv, write_reports_csv, write_vtk};
use rsimex::reference::run_reference;
use rsimex::{Field, FieldReport, MixtureEOS, Solver, State, VortexParams, VortexProfile};

use crate::config::{ConfigFile, Format};

/// What a finished run reports back.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub field: Field,
    pub eos: MixtureEOS,
    pub steps: usize,
    pub snapshots: usize,
    pub drift: [f64; 5],
}

fn write_snapshot(f: &Field, eos: &MixtureEOS, dir: &Path, k: usize, formats: &[Format]) -> anyhow::Result<()> {
    for fmt in formats {
        let (name, res) = match fmt {
            Format::Csv => (format!("field_{k:04}.csv"), write_field_csv(f, eos, &dir.join(format!("field_{k:04}.csv")))),
            Format::Vtk => (format!("field_{k:04}.vtk"), write_vtk(f, eos, &dir.join(format!("field_{k:04}.vtk")))),
            Format::Diagonal => {
                if f.grid.dims() != 2 {
                    continue;
                }
                let n = format!("diagonal_{k:04}.csv");
                (n.clone(), write_diagonal_csv(f, eos, &dir.join(n)))
            }
        };
        res.with_context(|| format!("writing {name}"))?;
    }
    Ok(())
}

/// Runs the configured case with the RS-IMEX scheme and writes snapshots and reports.
pub fn run(cfg: &ConfigFile) -> anyhow::Result<RunOutcome> {
    let case = cfg.build_case()?;
    let dir = cfg.output_dir();
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;

    let mut solver = Solver::new(&case.initial, case.eos, cfg.time.order, case.sampler())?;
    solver.explicit.phase_speed_bound = cfg.solver.phase_speed_bound;
    solver.explicit.alpha_dissipation = cfg.solver.alpha_dissipation;
    solver.implicit.gmres = cfg.gmres();
    solver.implicit.potentials = cfg.potentials();
    let rc = cfg.run_config(case.t_final, case.speed_floor);

    let start = Instant::now();
    let mut reports = Vec::new();
    let mut snapshots = 0;
    let out = solver.run(&case.initial, &rc, |info, f| {
        if info.output || info.step % cfg.output.cadence == 0 {
            reports.push(FieldReport::compute(
                f,
                &case.eos,
                info.step,
                info.time,
                info.dt,
                info.linear_iterations,
                case.sampler(),
            )?);
        }
        if info.output {
            write_snapshot(f, &case.eos, &dir, snapshots, &cfg.output.formats)
                .map_err(|e| rsimex::SolverError::Config(format!("{e:#}")))?;
            snapshots += 1;
        }
        Ok(())
    })?;
    write_reports_csv(&reports, &dir.join("reports.csv"))?;
    let drift = conservation_drift(&case.initial, &out.field);
    println!(
        "case {} n={} order {}: {} steps to t={:.6}, {} linear iterations, {:.2} s",
        case.name,
        cfg.grid.n,
        cfg.time.order,
        out.steps,
        out.time,
        out.linear_iterations,
        start.elapsed().as_secs_f64()
    );
    println!(
        "relative conservation drift (m1 m2 mom_x mom_y rhoE): {}",
        drift.iter().map(|d| format!("{d:.2e}")).collect::<Vec<_>>().join(" ")
    );
    println!("wrote {snapshots} snapshot(s) and reports.csv to {}", dir.display());
    Ok(RunOutcome {
        field: out.field,
        eos: case.eos,
        steps: out.steps,
        snapshots,
        drift,
    })
}

pub fn convergence(kind: VortexKind, resolutions: &[usize], order: u8, nu: f64, dir: &Path) -> anyhow::Result<PathBuf> {
    let table = vortex_convergence(kind, resolutions, order, nu)?;
    let csv = table.to_csv();
    std::fs::create_dir_all(dir)?;
    let path = dir.join("convergence.csv");
    std::fs::write(&path, &csv).with_context(|| format!("writing {}", path.display()))?;
    print!("{csv}");
    Ok(path)
}

/// Averages `k` consecutive cells of a 1D field in conserved variables.
fn restrict(f: &Field, k: usize) -> Vec<State> {
    let states: Vec<State> = f.interior_states().copied().collect();
    states
        .chunks(k)
        .map(|c| {
            let mut s = c[0];
            for q in &c[1..] {
                s.axpy(1.0, q);
            }
            (1.0 / k as f64) * s
        })
        .collect()
}

/// L1 distances in `ρ₁, ρ₂, v, T` between a run and the reference averaged onto its cells.
pub fn riemann_distance(run: &Field, reference: &Field, eos: &MixtureEOS) -> anyhow::Result<[f64; 4]> {
    let (n, m) = (run.grid.nx, reference.grid.nx);
    if m % n != 0 {
        bail!("reference resolution {m} is not a multiple of {n}");
    }
    let mut d = [0.0; 4];
    for (a, b) in run.interior_states().zip(restrict(reference, m / n)) {
        let (p, r) = (a.to_primitives(eos)?, b.to_primitives(eos)?);
        for (k, (x, y)) in [(p.rho1, r.rho1), (p.rho2, r.rho2), (p.v[0], r.v[0]), (p.t, r.t)].into_iter().enumerate() {
            d[k] += (x - y).abs() * run.grid.dx;
        }
    }
    Ok(d)
}

/// Runs the case with both solvers and writes `imex.csv` and `reference.csv`.
pub fn riemann_compare(cfg: &ConfigFile, ref_n: usize, ref_nu: f64) -> anyhow::Result<Option<[f64; 4]>> {
    let outcome = run(cfg)?;
    let dir = cfg.output_dir();
    let mut rcfg = cfg.clone();
    rcfg.grid.n = ref_n;
    let rcase = rcfg.build_case()?;
    let t_final = cfg.time.t_final.unwrap_or(rcase.t_final);
    let start = Instant::now();
    let (reference, steps) = run_reference(&rcase.initial, t_final, ref_nu, &rcase.eos, rcase.sampler())?;
    println!("reference n={ref_n}: {steps} steps, {:.2} s", start.elapsed().as_secs_f64());
    write_field_csv(&outcome.field, &outcome.eos, &dir.join("imex.csv"))?;
    write_field_csv(&reference, &rcase.eos, &dir.join("reference.csv"))?;
    if outcome.field.grid.dims() != 1 || !ref_n.is_multiple_of(cfg.grid.n) {
        return Ok(None);
    }
    let d = riemann_distance(&outcome.field, &reference, &outcome.eos)?;
    println!("L1 distance rho1 {:.3e} rho2 {:.3e} v {:.3e} T {:.3e}", d[0], d[1], d[2], d[3]);
    Ok(Some(d))
}

pub fn vortex_profile(kind: VortexKind, path: &Path) -> anyhow::Result<()> {
    let prm = match kind {
        VortexKind::Compressible => VortexParams::compressible(),
        VortexKind::WeaklyCompressible => VortexParams::weakly_compressible(),
    };
    let profile = VortexProfile::new(&prm)?;
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    profile.write_csv(path)?;
    let m = profile.max_mach(1.0)?;
    println!("max Mach phase 1 {:.4}, phase 2 {:.4}, mixture {:.4}", m.m1, m.m2, m.mix);
    Ok(())
}
