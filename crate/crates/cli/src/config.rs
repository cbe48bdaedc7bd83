//! Run configuration files. Every section and key is optional except
//! `[case] name`; unknown keys are rejected.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use rsimex::cases::{case_by_name, CaseParams, CASE_NAMES};
use rsimex::implicit::PotentialEvaluation;
use rsimex::linsolve::GmresConfig;
use rsimex::{CaseSpec, MixtureEOS, RunConfig};
use serde::{Deserialize, Serialize};

/// Environment variable that replaces the configured output directory.
pub const OUTPUT_DIR_ENV: &str = "RSIMEX_OUTPUT_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub case: CaseSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub time: TimeSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub physics: PhysicsSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseSection {
    pub name: String,
    /// Bubble Mach ratio `C`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mach_ratio: Option<f64>,
    /// Kelvin-Helmholtz `ε`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    /// Well-prepared Mach number.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mach: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        Self { n: 64 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    /// Defaults to the case's final time.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_final: Option<f64>,
    pub cfl_nu: f64,
    pub order: u8,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub output_times: Vec<f64>,
}

impl Default for TimeSection {
    fn default() -> Self {
        Self {
            t_final: None,
            cfl_nu: 0.25,
            order: 2,
            max_steps: None,
            output_times: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Potentials {
    NewState,
    Linearized,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub rtol: f64,
    pub max_iter: usize,
    pub restart: usize,
    pub potentials: Potentials,
    /// Widen the Rusanov speed by the phase velocities.
    pub phase_speed_bound: bool,
    pub alpha_dissipation: bool,
}

impl Default for SolverSection {
    fn default() -> Self {
        let g = GmresConfig::default();
        Self {
            rtol: g.rtol,
            max_iter: g.max_iter,
            restart: g.restart,
            potentials: Potentials::NewState,
            phase_speed_bound: false,
            alpha_dissipation: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Vtk,
    Diagonal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
    /// Report every this many steps; output times and the final step are always reported.
    pub cadence: usize,
    pub formats: Vec<Format>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            cadence: 1,
            formats: vec![Format::Csv],
        }
    }
}

/// Overrides of the case's relaxation times and splitting weight. The
/// material constants are part of each case's initial data and stay fixed.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau_alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau_w: Option<f64>,
    /// Weight `𝒞` of the phase-2 chemical potential.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_weight: Option<f64>,
}

impl ConfigFile {
    pub fn new(case: &str) -> Self {
        Self {
            case: CaseSection {
                name: case.to_string(),
                mach_ratio: None,
                eps: None,
                mach: None,
            },
            grid: GridSection::default(),
            time: TimeSection::default(),
            solver: SolverSection::default(),
            output: OutputSection::default(),
            physics: PhysicsSection::default(),
        }
    }

    pub fn parse(text: &str) -> anyhow::Result<Self> {
        let c: Self = toml::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn to_toml(&self) -> anyhow::Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if !CASE_NAMES.contains(&self.case.name.as_str()) {
            bail!("unknown case '{}', expected one of {}", self.case.name, CASE_NAMES.join(", "));
        }
        if self.output.cadence == 0 {
            bail!("output cadence must be at least 1");
        }
        if !(self.solver.rtol > 0.0) || self.solver.max_iter == 0 || self.solver.restart == 0 {
            bail!("solver needs rtol > 0, max_iter > 0 and restart > 0");
        }
        self.run_config(1.0, 0.0).validate()?;
        let probe = MixtureEOS::homogeneous(
            rsimex::PhaseParams::new(1.4, 1.0)?,
            rsimex::PhaseParams::new(1.4, 1.0)?,
        );
        self.apply_physics(probe)?;
        Ok(())
    }

    pub fn case_params(&self) -> CaseParams {
        let d = CaseParams::default();
        CaseParams {
            mach_ratio: self.case.mach_ratio.unwrap_or(d.mach_ratio),
            eps: self.case.eps.unwrap_or(d.eps),
            mach: self.case.mach.unwrap_or(d.mach),
        }
    }

    /// Builds the case with the physics overrides applied.
    pub fn build_case(&self) -> anyhow::Result<CaseSpec> {
        let mut c = case_by_name(&self.case.name, self.grid.n, &self.case_params())?;
        c.eos = self.apply_physics(c.eos)?;
        Ok(c)
    }

    fn apply_physics(&self, eos: MixtureEOS) -> anyhow::Result<MixtureEOS> {
        let p = &self.physics;
        Ok(MixtureEOS::new(
            eos.phase1,
            eos.phase2,
            p.c_weight.unwrap_or(eos.mach_ratio_c),
            p.tau_alpha.unwrap_or(eos.tau_alpha),
            p.tau_w.unwrap_or(eos.tau_w),
        )?)
    }

    /// `t_final` falls back to the case's final time.
    pub fn run_config(&self, case_t_final: f64, speed_floor: f64) -> RunConfig {
        RunConfig {
            speed_floor,
            output_times: self.time.output_times.clone(),
            max_steps: self.time.max_steps,
            ..RunConfig::new(self.time.cfl_nu, self.time.t_final.unwrap_or(case_t_final), self.time.order)
        }
    }

    pub fn gmres(&self) -> GmresConfig {
        GmresConfig {
            rtol: self.solver.rtol,
            max_iter: self.solver.max_iter,
            restart: self.solver.restart,
            ..GmresConfig::default()
        }
    }

    pub fn potentials(&self) -> PotentialEvaluation {
        match self.solver.potentials {
            Potentials::NewState => PotentialEvaluation::NewState,
            Potentials::Linearized => PotentialEvaluation::Linearized,
        }
    }

    /// The configured directory unless [`OUTPUT_DIR_ENV`] is set.
    pub fn output_dir(&self) -> PathBuf {
        match std::env::var_os(OUTPUT_DIR_ENV) {
            Some(d) if !d.is_empty() => PathBuf::from(d),
            _ => self.output.dir.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_takes_defaults() {
        let c = ConfigFile::parse("[case]\nname = \"rp1\"\n").unwrap();
        assert_eq!(c.grid.n, 64);
        assert_eq!(c.time.order, 2);
        assert_eq!(c.solver.potentials, Potentials::NewState);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(ConfigFile::parse("[case]\nname = \"rp1\"\ncolour = 1\n").is_err());
        assert!(ConfigFile::parse("[case]\nname = \"rp1\"\n[extra]\n").is_err());
    }

    #[test]
    fn invalid_values_are_rejected() {
        assert!(ConfigFile::parse("[case]\nname = \"nope\"\n").is_err());
        assert!(ConfigFile::parse("[case]\nname = \"rp1\"\n[time]\ncfl_nu = 1.5\norder = 2\n").is_err());
        assert!(ConfigFile::parse("[case]\nname = \"rp1\"\n[physics]\ntau_w = -1.0\n").is_err());
    }
}
