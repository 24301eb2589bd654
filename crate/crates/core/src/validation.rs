//! Self-check suite: closed forms, conservation laws, fast-versus-direct
//! quadrature and, optionally, the time-domain oracle. Fully deterministic.

use serde::Serialize;

use crate::emitter::EmitterParams;
use crate::error::Result;
use crate::numerics::{extrapolate_half_width, QuadratureRule, WavevectorGrid};
use crate::oracle::{self, OneExcitationState, TwoExcitationState};
use crate::pulses::SpectralAmplitude;
use crate::single_photon::{full_fidelity, lorentzian_closed_forms_one, scatter_one};
use crate::two_photon::{
    closed_form_p11_lorentzian, enhancement_factor, factored_outcome, linear_resonant_p11, nonlinear_term,
    nonlinear_term_direct, outcome_probabilities, product_input, scatter_two,
};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub reference: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    /// Passes when `|value - reference| ≤ tolerance`.
    pub fn near(name: impl Into<String>, value: f64, reference: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            reference,
            tolerance,
            passed: (value - reference).abs() <= tolerance,
        }
    }

    /// Passes when `value ≥ reference - tolerance`.
    pub fn at_least(name: impl Into<String>, value: f64, reference: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            reference,
            tolerance,
            passed: value >= reference - tolerance,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ValidationConfig {
    /// Replaces the built-in grids (and disables half-width extrapolation)
    /// for the grid-sensitive checks.
    pub grid: Option<(f64, usize)>,
    pub include_oracle: bool,
    /// Oracle time step.
    pub oracle_dt: f64,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        Self {
            grid: None,
            include_oracle: true,
            oracle_dt: 0.002,
        }
    }
}

fn measure(
    config: &ValidationConfig,
    half_width: f64,
    step: f64,
    eval: impl FnMut(&WavevectorGrid<f64>) -> Result<f64>,
) -> Result<f64> {
    let mut eval = eval;
    match config.grid {
        Some((k, n)) => eval(&WavevectorGrid::new(k, n)?),
        None => extrapolate_half_width(half_width, step, eval),
    }
}

fn fixed_grid(config: &ValidationConfig, half_width: f64, n: usize) -> Result<WavevectorGrid<f64>> {
    let (k, n) = config.grid.unwrap_or((half_width, n));
    WavevectorGrid::new(k, n)
}

pub fn run_validation(config: &ValidationConfig) -> Result<ValidationReport> {
    let mut checks = Vec::new();
    single_photon_checks(config, &mut checks)?;
    two_photon_checks(config, &mut checks)?;
    if config.include_oracle {
        oracle_checks(config, &mut checks)?;
    }
    Ok(ValidationReport { checks })
}

fn single_photon_checks(config: &ValidationConfig, checks: &mut Vec<Check>) -> Result<()> {
    for delta in [0.0, 0.5] {
        let params = EmitterParams::new(1.0, delta)?;
        for sigma in [0.5, 1.0, 2.0] {
            let (full_cf, prob_cf) = lorentzian_closed_forms_one(sigma, &params)?;
            let full = measure(config, 100.0, 0.05, |g| {
                let xi = SpectralAmplitude::lorentzian(sigma, g)?;
                full_fidelity(&scatter_one(&xi, &params), &xi)
            })?;
            let prob = measure(config, 100.0, 0.05, |g| {
                let xi = SpectralAmplitude::lorentzian(sigma, g)?;
                Ok(scatter_one(&xi, &params).probabilities().1)
            })?;
            checks.push(Check::near(
                format!("one_photon_f_full_lorentzian[sigma={sigma},delta={delta}]"),
                full,
                full_cf,
                1e-4,
            ));
            checks.push(Check::near(
                format!("one_photon_f_prob_lorentzian[sigma={sigma},delta={delta}]"),
                prob,
                prob_cf,
                1e-4,
            ));
        }
    }
    let g = fixed_grid(config, 40.0, 2049)?;
    let xi = SpectralAmplitude::gaussian(1.0, &g)?.normalized()?;
    let (p1, p2) = scatter_one(&xi, &EmitterParams::new(1.0, 0.5)?).probabilities();
    checks.push(Check::near(
        "one_photon_unitarity[gaussian,sigma=1,delta=0.5]",
        p1 + p2,
        1.0,
        1e-6,
    ));
    Ok(())
}

fn two_photon_checks(config: &ValidationConfig, checks: &mut Vec<Check>) -> Result<()> {
    let peak = 3f64.sqrt().recip();
    for (sigma, delta, nl) in [(peak, 0.0, true), (1.0, 0.0, false), (1.0, 0.5, true)] {
        let params = EmitterParams::new(1.0, delta)?;
        let p11 = measure(config, 20.0, 0.04, |g| {
            let xi = SpectralAmplitude::lorentzian(sigma, g)?;
            Ok(outcome_probabilities(&scatter_two(&product_input(&xi, &xi)?, &params, nl)?).p11)
        })?;
        let exact = closed_form_p11_lorentzian(sigma, &params, nl)?;
        checks.push(Check::near(
            format!("two_photon_p11_lorentzian[sigma={sigma:.6},delta={delta},nonlinear={nl}]"),
            p11,
            exact,
            1e-4,
        ));
    }

    let g = fixed_grid(config, 40.0, 801)?;
    let params = EmitterParams::default();
    let xi = SpectralAmplitude::gaussian(1.0, &g)?.normalized()?;
    let beta = product_input(&xi, &xi)?;
    let on = outcome_probabilities(&scatter_two(&beta, &params, true)?);
    checks.push(Check::near(
        "two_photon_unitarity[gaussian,sigma=1]",
        on.total(),
        1.0,
        1e-5,
    ));
    let off = outcome_probabilities(&scatter_two(&beta, &params, false)?);
    checks.push(Check::near(
        "two_photon_linear_a(1-a)[gaussian,sigma=1]",
        off.p11,
        linear_resonant_p11(&xi, &params)?,
        1e-6,
    ));

    let ratio = measure(config, 40.0, 0.02, |g| {
        let xi = SpectralAmplitude::lorentzian(0.5, g)?;
        let on = factored_outcome(&xi, &xi, &params, true)?.p11;
        let off = factored_outcome(&xi, &xi, &params, false)?.p11;
        Ok(on / off)
    })?;
    checks.push(Check::near(
        "enhancement_factor[lorentzian,sigma=0.5]",
        ratio,
        enhancement_factor(0.5, 1.0)?,
        1e-3,
    ));

    let small = WavevectorGrid::new(10.0, 129)?;
    let beta = product_input(
        &SpectralAmplitude::gaussian(1.0, &small)?,
        &SpectralAmplitude::gaussian(1.0, &small)?,
    )?;
    let fast = nonlinear_term(&beta, &params);
    let slow = nonlinear_term_direct(&beta, &params);
    let scale = slow.iter().fold(0.0f64, |m, v| m.max(v.norm()));
    let err = (&fast - &slow).iter().fold(0.0f64, |m, v| m.max(v.norm()));
    checks.push(Check::near(
        "bound_state_fast_vs_direct[relative]",
        err / scale,
        0.0,
        1e-6,
    ));
    Ok(())
}

fn oracle_checks(config: &ValidationConfig, checks: &mut Vec<Check>) -> Result<()> {
    let g = WavevectorGrid::with_rule(20.0, 257, QuadratureRule::Trapezoid)?;
    let params = EmitterParams::default();
    let xi = SpectralAmplitude::gaussian(1.0, &g)?;
    let z0 = oracle::launch_offset(1.0);
    let t = oracle::default_duration(z0, &params);
    let shifted = xi.with_launch_offset(z0).normalized()?;

    let one = oracle::evolve_one(&OneExcitationState::launch(&xi, z0)?, &params, t, config.oracle_dt)?;
    let c1 = oracle::compare_one(&one, &scatter_one(&shifted, &params), t)?;
    checks.push(Check::at_least(
        "oracle_one_overlap[gaussian,sigma=1]",
        c1.overlap,
        0.99,
        0.0,
    ));
    checks.push(Check::near(
        "oracle_one_delta_p2[gaussian,sigma=1]",
        c1.delta_p.1,
        0.0,
        0.02,
    ));

    let two = oracle::evolve_two(&TwoExcitationState::launch(&xi, &xi, z0)?, &params, t, config.oracle_dt)?;
    let predicted = scatter_two(&product_input(&shifted, &shifted)?, &params, true)?;
    let c2 = oracle::compare_two(&two, &predicted, t)?;
    checks.push(Check::at_least(
        "oracle_two_overlap[gaussian,sigma=1]",
        c2.overlap,
        0.99,
        0.0,
    ));
    checks.push(Check::near(
        "oracle_two_delta_p11[gaussian,sigma=1]",
        c2.delta_p.0,
        0.0,
        0.02,
    ));
    Ok(())
}
