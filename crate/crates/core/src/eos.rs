//! Ideal-gas closures for the single-temperature two-fluid mixture.
//!
//! Each phase obeys `p = (γ−1) c_v ρ T`, `e = c_v T` and
//! `s = c_v ln((T/T0) ρ^{−(γ−1)})` with `T0 = 1/((γ−1) c_v)`.
//! The helpers here also provide the coefficients used to write the mixture
//! pressure and the chemical-potential difference as functions of `ρE`.

use crate::error::{domain, Result, SolverError};
use crate::implicit::ReferenceState;
use crate::state::State;

/// Smallest argument accepted by the entropy logarithm.
const LOG_FLOOR: f64 = 1e-300;

/// Closure constants for one phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseParams {
    pub gamma: f64,
    pub cv: f64,
}

impl PhaseParams {
    pub fn new(gamma: f64, cv: f64) -> Result<Self> {
        if !(gamma > 1.0) || !gamma.is_finite() {
            return Err(domain("gamma", gamma, "must exceed 1"));
        }
        if !(cv > 0.0) || !cv.is_finite() {
            return Err(domain("cv", cv, "must be positive"));
        }
        Ok(Self { gamma, cv })
    }

    /// Reference temperature `1/((γ−1) c_v)`, recomputed on every call.
    pub fn t0(&self) -> f64 {
        1.0 / ((self.gamma - 1.0) * self.cv)
    }

    /// `(γ−1) c_v`, the gas constant of the phase.
    #[inline]
    pub fn r_gas(&self) -> f64 {
        (self.gamma - 1.0) * self.cv
    }

    #[inline]
    pub fn pressure(&self, rho: f64, t: f64) -> f64 {
        self.r_gas() * rho * t
    }

    #[inline]
    pub fn sound_speed_sq(&self, t: f64) -> f64 {
        self.gamma * self.r_gas() * t
    }

    pub fn entropy(&self, rho: f64, t: f64) -> Result<f64> {
        if !(rho > LOG_FLOOR) {
            return Err(domain("rho", rho, "entropy needs positive density"));
        }
        if !(t > LOG_FLOOR) {
            return Err(domain("T", t, "entropy needs positive temperature"));
        }
        Ok(self.cv * ((t / self.t0()).ln() - (self.gamma - 1.0) * rho.ln()))
    }
}

/// Two-phase closure plus relaxation times.
///
/// Relaxation times may be `f64::INFINITY`, which switches the corresponding
/// source off.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureEOS {
    pub phase1: PhaseParams,
    pub phase2: PhaseParams,
    /// Weight 𝒞 of the phase-2 chemical potential in the splitting.
    pub mach_ratio_c: f64,
    pub tau_alpha: f64,
    pub tau_w: f64,
}

impl MixtureEOS {
    pub fn new(
        phase1: PhaseParams,
        phase2: PhaseParams,
        mach_ratio_c: f64,
        tau_alpha: f64,
        tau_w: f64,
    ) -> Result<Self> {
        if !(mach_ratio_c > 0.0) || !mach_ratio_c.is_finite() {
            return Err(domain("mach_ratio_c", mach_ratio_c, "must be positive"));
        }
        if !(tau_alpha > 0.0) {
            return Err(domain("tau_alpha", tau_alpha, "must be positive"));
        }
        if !(tau_w > 0.0) {
            return Err(domain("tau_w", tau_w, "must be positive"));
        }
        Ok(Self {
            phase1,
            phase2,
            mach_ratio_c,
            tau_alpha,
            tau_w,
        })
    }

    /// Mixture without relaxation sources and with unit splitting weight.
    pub fn homogeneous(phase1: PhaseParams, phase2: PhaseParams) -> Self {
        Self {
            phase1,
            phase2,
            mach_ratio_c: 1.0,
            tau_alpha: f64::INFINITY,
            tau_w: f64::INFINITY,
        }
    }

    #[inline]
    fn c2(&self) -> f64 {
        self.mach_ratio_c * self.mach_ratio_c
    }

    /// Weighted chemical-potential difference `μ₁ − 𝒞² μ₂`.
    #[inline]
    pub fn mu_diff(&self, th: &ThermoEval) -> f64 {
        th.mu1 - self.c2() * th.mu2
    }
}

/// Thermodynamic quantities at one `(ρ₁, ρ₂, T)` point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermoEval {
    pub p1: f64,
    pub p2: f64,
    pub p_mix: f64,
    pub s1: f64,
    pub s2: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub e1: f64,
    pub e2: f64,
    pub a1_sq: f64,
    pub a2_sq: f64,
    pub a_mix_sq: f64,
    pub t: f64,
}

/// Evaluate the closures. `alpha1` is needed for the mixture pressure and
/// mixture sound speed.
pub fn eval_thermo(alpha1: f64, rho1: f64, rho2: f64, t: f64, eos: &MixtureEOS) -> Result<ThermoEval> {
    if !(rho1 > 0.0) {
        return Err(domain("rho1", rho1, "nonpositive density"));
    }
    if !(rho2 > 0.0) {
        return Err(domain("rho2", rho2, "nonpositive density"));
    }
    if !(t > 0.0) {
        return Err(domain("T", t, "nonpositive temperature"));
    }
    let (ph1, ph2) = (&eos.phase1, &eos.phase2);
    let p1 = ph1.pressure(rho1, t);
    let p2 = ph2.pressure(rho2, t);
    let e1 = ph1.cv * t;
    let e2 = ph2.cv * t;
    let s1 = ph1.entropy(rho1, t)?;
    let s2 = ph2.entropy(rho2, t)?;
    let mu1 = e1 + p1 / rho1 - s1 * t;
    let mu2 = e2 + p2 / rho2 - s2 * t;
    let a1_sq = ph1.sound_speed_sq(t);
    let a2_sq = ph2.sound_speed_sq(t);
    let alpha2 = 1.0 - alpha1;
    let m1 = alpha1 * rho1;
    let m2 = alpha2 * rho2;
    let y1 = m1 / (m1 + m2);
    Ok(ThermoEval {
        p1,
        p2,
        p_mix: alpha1 * p1 + alpha2 * p2,
        s1,
        s2,
        mu1,
        mu2,
        e1,
        e2,
        a1_sq,
        a2_sq,
        a_mix_sq: y1 * a1_sq + (1.0 - y1) * a2_sq,
        t,
    })
}

/// `φ_p = Σ γ_l α_l ρ_l c_v,l / Σ α_l ρ_l c_v,l`, so that `p = (φ_p − 1)(ρE − ρE_kin)`.
pub fn phi_p(alpha1: f64, alpha2: f64, rho1: f64, rho2: f64, eos: &MixtureEOS) -> Result<f64> {
    let w1 = alpha1 * rho1 * eos.phase1.cv;
    let w2 = alpha2 * rho2 * eos.phase2.cv;
    let den = w1 + w2;
    if !(den > 0.0) {
        return Err(domain("phi_p denominator", den, "must be positive"));
    }
    Ok((eos.phase1.gamma * w1 + eos.phase2.gamma * w2) / den)
}

fn mu_denominator(alpha1: f64, alpha2: f64, rho1: f64, rho2: f64, eos: &MixtureEOS) -> Result<f64> {
    let den = alpha1 * rho1 * eos.phase1.cv + eos.c2() * alpha2 * rho2 * eos.phase2.cv;
    if !(den > 0.0) {
        return Err(domain("mu denominator", den, "must be positive"));
    }
    Ok(den)
}

/// `φ_μ` with `μ₁ − 𝒞²μ₂ = φ_μ (ρE − ρE_kin)`.
pub fn phi_mu(th: &ThermoEval, alpha1: f64, alpha2: f64, rho1: f64, rho2: f64, eos: &MixtureEOS) -> Result<f64> {
    let den = mu_denominator(alpha1, alpha2, rho1, rho2, eos)?;
    let (ph1, ph2) = (&eos.phase1, &eos.phase2);
    Ok((ph1.gamma * ph1.cv - th.s1 - eos.c2() * (ph2.gamma * ph2.cv - th.s2)) / den)
}

/// Derivative of `μ₁ − 𝒞²μ₂` with respect to `ρE` at fixed masses and kinetic content.
pub fn dmu_de(th: &ThermoEval, alpha1: f64, alpha2: f64, rho1: f64, rho2: f64, eos: &MixtureEOS) -> Result<f64> {
    let den = mu_denominator(alpha1, alpha2, rho1, rho2, eos)?;
    let (ph1, ph2) = (&eos.phase1, &eos.phase2);
    Ok((ph1.r_gas() - th.s1 - eos.c2() * (ph2.r_gas() - th.s2)) / den)
}

/// Split of the chemical-potential difference around the reference state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MuSplit {
    pub mu_hat_rs: f64,
    pub dmu_rs: f64,
    pub mu_bar: f64,
}

/// Linearize `μ = μ₁ − 𝒞²μ₂` in `ρE` around the reference state built from `q`.
///
/// `μ = μ̂_RS + ∂μ_RS·ρE + μ̄` holds by construction.
pub fn linearize_mu(q: &State, rs: &ReferenceState, eos: &MixtureEOS) -> Result<MuSplit> {
    let prim = q.to_primitives(eos)?;
    let th = eval_thermo(q.alpha1, prim.rho1, prim.rho2, prim.t, eos)?;
    let mu = eos.mu_diff(&th);
    let pt = rs.point(q, eos)?;
    let mu_hat_rs = pt.mu - pt.dmu * pt.rho_e;
    Ok(MuSplit {
        mu_hat_rs,
        dmu_rs: pt.dmu,
        mu_bar: mu - mu_hat_rs - pt.dmu * q.rho_e,
    })
}

/// Entropy production
/// `Π = (p₁−p₂)²/(T τ_α ρ²) + y₁²y₂²‖w‖²/(T τ_w ρ²)`.
pub fn entropy_production(
    th: &ThermoEval,
    rho: f64,
    y1: f64,
    w_sq: f64,
    eos: &MixtureEOS,
) -> Result<f64> {
    if !(th.t > 0.0) {
        return Err(SolverError::Domain {
            field: "T",
            value: th.t,
            reason: "entropy production needs positive temperature",
        });
    }
    let y2 = 1.0 - y1;
    let dp = th.p1 - th.p2;
    let a = dp * dp / (th.t * eos.tau_alpha * rho * rho);
    let b = y1 * y1 * y2 * y2 * w_sq / (th.t * eos.tau_w * rho * rho);
    Ok(a + b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn eos(g1: f64, g2: f64, c1: f64, c2: f64) -> MixtureEOS {
        MixtureEOS::homogeneous(PhaseParams::new(g1, c1).unwrap(), PhaseParams::new(g2, c2).unwrap())
    }

    #[test]
    fn closed_form_phase_values() {
        let e = eos(1.4, 2.0, 1.0, 1.0);
        let th = eval_thermo(0.5, 1.0, 1.0, 2.0, &e).unwrap();
        assert_relative_eq!(th.p1, 0.8, epsilon = 1e-15);
        assert_relative_eq!(th.e1, 2.0, epsilon = 1e-15);
    }

    #[test]
    fn symmetric_phases_agree() {
        let e = eos(1.4, 1.4, 2.0, 2.0);
        let th = eval_thermo(0.3, 1.7, 1.7, 0.9, &e).unwrap();
        assert_eq!(th.p1, th.p2);
        assert_eq!(th.mu1, th.mu2);
    }

    #[test]
    fn rejects_bad_inputs() {
        let e = eos(1.4, 2.0, 1.0, 1.0);
        match eval_thermo(0.5, -1.0, 1.0, 1.0, &e) {
            Err(SolverError::Domain { field, .. }) => assert_eq!(field, "rho1"),
            other => panic!("unexpected {other:?}"),
        }
        match eval_thermo(0.5, 1.0, 1.0, 0.0, &e) {
            Err(SolverError::Domain { field, .. }) => assert_eq!(field, "T"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(PhaseParams::new(1.0, 1.0).is_err());
        assert!(PhaseParams::new(1.4, 0.0).is_err());
    }

    #[test]
    fn phi_p_limits() {
        let e = eos(1.4, 2.0, 1.0, 1.0);
        // single phase
        assert_relative_eq!(phi_p(1.0, 0.0, 1.0, 1.0, &e).unwrap(), 1.4, epsilon = 1e-15);
        // equal weights
        assert_relative_eq!(phi_p(0.5, 0.5, 1.0, 1.0, &e).unwrap(), 1.7, epsilon = 1e-15);
        let same = eos(1.6, 1.6, 1.0, 3.0);
        assert_relative_eq!(phi_p(0.2, 0.8, 3.0, 0.4, &same).unwrap(), 1.6, epsilon = 1e-15);
    }

    #[test]
    fn identical_phases_have_no_mu_coupling() {
        let e = eos(1.4, 1.4, 1.0, 1.0);
        let th = eval_thermo(0.3, 2.0, 2.0, 1.3, &e).unwrap();
        assert_eq!(phi_mu(&th, 0.3, 0.7, 2.0, 2.0, &e).unwrap(), 0.0);
        assert_eq!(dmu_de(&th, 0.3, 0.7, 2.0, 2.0, &e).unwrap(), 0.0);
    }

    #[test]
    fn phi_mu_zero_numerator() {
        // pick densities so that s_l = γ_l c_v,l at T = 1
        let e = eos(1.4, 2.0, 1.0, 1.0);
        let t = 1.0;
        let rho_for = |ph: &PhaseParams| (t * (-ph.gamma).exp() / ph.t0()).powf(1.0 / (ph.gamma - 1.0));
        let (rho1, rho2) = (rho_for(&e.phase1), rho_for(&e.phase2));
        let th = eval_thermo(0.4, rho1, rho2, t, &e).unwrap();
        assert_relative_eq!(th.s1, 1.4, epsilon = 1e-13);
        assert_relative_eq!(th.s2, 2.0, epsilon = 1e-13);
        assert!(phi_mu(&th, 0.4, 0.6, rho1, rho2, &e).unwrap().abs() < 1e-13);
    }
}
