//! Acceptance criteria. Runs without the libtest harness and prints one
//! PASS/FAIL line per criterion; exits non-zero if any criterion fails.
//!
//! `cargo test --test acceptance -- 3 7` runs a subset.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wgscatter::numerics::{extrapolate_half_width, QuadratureRule};
use wgscatter::oracle::{self, OneExcitationState, TwoExcitationState};
use wgscatter::single_photon::{full_fidelity, lorentzian_closed_forms_one};
use wgscatter::two_photon::{closed_form_p11_lorentzian, enhancement_factor, linear_resonant_p11};
use wgscatter::{
    factored_outcome, fidelities_one, fidelities_two, outcome_probabilities, product_input, scatter_one, scatter_two,
    Emitter, Grid, Pulse, PulseShape, ShiftSearch, TwoPhoton,
};
use wgscatter_conformance::{golden_max, log_sweep, wgscatter_binary, Res, Tally, Verdict};

fn two_photon_p11(sigma: f64, params: &Emitter, nl: bool, g: &Grid) -> wgscatter::Result<f64> {
    let xi = Pulse::lorentzian(sigma, g)?;
    Ok(outcome_probabilities(&scatter_two(&product_input(&xi, &xi)?, params, nl)?).p11)
}

fn criterion_1() -> Res<Verdict> {
    let start = Instant::now();
    let mut tally = Tally::new();
    let mut worst: f64 = 0.0;
    for delta in [0.0, 0.5] {
        let params = Emitter::new(1.0, delta)?;
        for sigma in [0.1, 0.5, 1.0, 2.0, 10.0] {
            let (full_cf, prob_cf) = lorentzian_closed_forms_one(sigma, &params)?;
            let (k, h) = (100.0 * sigma.max(1.0), sigma.min(1.0) / 20.0);
            let full = extrapolate_half_width(k, h, |g| {
                let xi = Pulse::lorentzian(sigma, g)?;
                full_fidelity(&scatter_one(&xi, &params), &xi)
            })?;
            let prob = extrapolate_half_width(k, h, |g| {
                let xi = Pulse::lorentzian(sigma, g)?;
                Ok(scatter_one(&xi, &params).probabilities().1)
            })?;
            worst = worst.max((full - full_cf).abs()).max((prob - prob_cf).abs());
        }
    }
    tally.check(worst <= 1e-4, format!("max |F - closed form| = {worst:.2e} (tol 1e-4)"));

    let mut unitarity: f64 = 0.0;
    for shape in PulseShape::NAMED {
        for delta in [0.0, 0.5] {
            let params = Emitter::new(1.0, delta)?;
            for sigma in [0.1f64, 1.0, 10.0] {
                let g =
                    Grid::with_step(40.0 * sigma.max(1.0), sigma.min(1.0) / 20.0)?.reweighted(shape.quadrature_rule());
                let xi = Pulse::from_shape(shape, sigma, &g)?.normalized()?;
                let (p1, p2) = scatter_one(&xi, &params).probabilities();
                unitarity = unitarity.max((p1 + p2 - 1.0).abs());
            }
        }
    }
    tally.check(
        unitarity <= 1e-6,
        format!("max |P1 + P2 - 1| = {unitarity:.2e} (tol 1e-6)"),
    );
    tally.runtime(start, Duration::from_secs(5));
    tally.done()
}

fn criterion_2() -> Res<Verdict> {
    let start = Instant::now();
    let mut tally = Tally::new();
    // (sigma, half width, spacing) of the coarser grid of each extrapolation pair.
    let grids = [
        (0.1, 10.0, 0.02),
        (0.5, 10.0, 0.1),
        (1.0, 15.0, 0.05),
        (2.0, 40.0, 0.1),
        (10.0, 150.0, 0.15),
    ];
    let mut worst: f64 = 0.0;
    for delta in [0.0, 0.5] {
        let params = Emitter::new(1.0, delta)?;
        for (sigma, k, h) in grids {
            let p11 = extrapolate_half_width(k, h, |g| two_photon_p11(sigma, &params, true, g))?;
            worst = worst.max((p11 - closed_form_p11_lorentzian(sigma, &params, true)?).abs());
        }
    }
    tally.check(
        worst <= 1e-4,
        format!("max |P11 - closed form| = {worst:.2e} (tol 1e-4)"),
    );

    let params = Emitter::default();
    let p11 = |sigma: f64| -> Res<f64> {
        Ok(extrapolate_half_width(10.0, 0.05, |g| {
            two_photon_p11(sigma, &params, true, g)
        })?)
    };
    let scan = (0..=12).map(|i| 0.45 + 0.025 * i as f64).collect::<Vec<_>>();
    let values = scan.iter().map(|&s| p11(s)).collect::<Res<Vec<_>>>()?;
    let best = values
        .iter()
        .enumerate()
        .fold(0, |b, (i, v)| if *v > values[b] { i } else { b });
    let lo = scan[best.saturating_sub(1)];
    let hi = scan[(best + 1).min(scan.len() - 1)];
    let (sigma_star, peak) = golden_max(p11, lo, hi, 1e-4)?;
    let target = 3f64.sqrt().recip();
    tally.check(
        (sigma_star - target).abs() <= 0.02,
        format!("sigma* = {sigma_star:.4} (expected {target:.4} +- 0.02)"),
    );
    tally.check(
        (peak - 0.40).abs() <= 0.005,
        format!("P11(sigma*) = {peak:.5} (F_prob {:.4})", 2.0 * peak),
    );
    tally.runtime(start, Duration::from_secs(60));
    tally.done()
}

fn random_symmetric_pulse(rng: &mut ChaCha8Rng, g: &Grid) -> Res<Pulse> {
    let bumps: Vec<(f64, f64, f64)> = (0..3)
        .map(|_| {
            (
                rng.random_range(0.0..2.0),
                rng.random_range(0.2..1.5),
                rng.random_range(0.2..1.0),
            )
        })
        .collect();
    let values = g
        .points()
        .iter()
        .map(|&k| {
            let magnitude: f64 = bumps
                .iter()
                .map(|&(c, w, a)| a * ((-(k - c).powi(2) / (w * w)).exp() + (-(k + c).powi(2) / (w * w)).exp()))
                .sum();
            Complex::from_polar(magnitude, rng.random_range(-3.0..3.0))
        })
        .collect();
    Ok(Pulse::custom(g, values)?.normalized()?)
}

fn criterion_3() -> Res<Verdict> {
    let mut tally = Tally::new();
    let params = Emitter::default();
    let f_prob = |sigma: f64| -> Res<f64> {
        Ok(extrapolate_half_width(40.0, 0.05, |g| {
            let xi = Pulse::lorentzian(sigma, g)?;
            Ok(outcome_probabilities(&scatter_two(&product_input(&xi, &xi)?, &params, false)?).f_prob())
        })?)
    };
    let (sigma_max, peak) = golden_max(f_prob, 0.5, 2.0, 1e-3)?;
    tally.check(
        (peak - 0.5).abs() <= 1e-4,
        format!("max F_prob = {peak:.6} (0.5 +- 1e-4)"),
    );
    tally.check((sigma_max - 1.0).abs() <= 0.05, format!("at sigma = {sigma_max:.3}"));

    let g = Grid::new(10.0, 401)?;
    let mut inputs = Vec::new();
    for shape in PulseShape::NAMED {
        for sigma in [0.3, 1.0, 3.0] {
            let g = g.reweighted(shape.quadrature_rule());
            inputs.push(Pulse::from_shape(shape, sigma, &g)?.normalized()?);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..6 {
        inputs.push(random_symmetric_pulse(&mut rng, &g)?);
    }
    let (mut largest, mut worst): (f64, f64) = (0.0, 0.0);
    for xi in &inputs {
        let p11 = outcome_probabilities(&scatter_two(&product_input(xi, xi)?, &params, false)?).p11;
        largest = largest.max(p11);
        worst = worst.max((p11 - linear_resonant_p11(xi, &params)?).abs());
    }
    tally.check(
        largest <= 0.25 + 1e-6,
        format!("max P11 over {} symmetric inputs = {largest:.6}", inputs.len()),
    );
    tally.check(worst <= 1e-6, format!("max |P11 - a(1-a)| = {worst:.2e} (tol 1e-6)"));
    tally.done()
}

fn factored_lorentzian(
    sigma: f64,
    params: &Emitter,
    nl: bool,
    k: f64,
    h: f64,
) -> Res<wgscatter::two_photon::FactoredOutcome<f64>> {
    let at = |g: &Grid| -> Res<_> {
        let xi = Pulse::lorentzian(sigma, g)?;
        Ok(factored_outcome(&xi, &xi, params, nl)?)
    };
    let near = at(&Grid::with_step(k, h)?)?;
    let far = at(&Grid::with_step(2.0 * k, h)?)?;
    let x = |a: f64, b: f64| 2.0 * b - a;
    Ok(wgscatter::two_photon::FactoredOutcome {
        p11: x(near.p11, far.p11),
        p12: x(near.p12, far.p12),
        p22: x(near.p22, far.p22),
        f_full: x(near.f_full, far.f_full),
        f_prob: x(near.f_prob, far.f_prob),
    })
}

fn criterion_4() -> Res<Verdict> {
    let mut tally = Tally::new();
    let params = Emitter::default();
    let mut worst: f64 = 0.0;
    let mut ratios = Vec::new();
    for sigma in [0.01f64, 0.5, 1.0, 5.0] {
        let (k, h) = (20.0 * sigma.max(1.0), sigma.min(1.0) / 20.0);
        let on = factored_lorentzian(sigma, &params, true, k, h)?.p11;
        let off = factored_lorentzian(sigma, &params, false, k, h)?.p11;
        let ratio = on / off;
        ratios.push(format!("{sigma}: {ratio:.4}"));
        worst = worst.max((ratio - enhancement_factor(sigma, 1.0)?).abs());
    }
    tally.check(
        worst <= 1e-3,
        format!(
            "max |ratio - 1 + 2/(1+3s)| = {worst:.2e} (tol 1e-3) [{}]",
            ratios.join(", ")
        ),
    );
    let limit: f64 = enhancement_factor(1e-9, 1.0)?;
    tally.check((limit - 3.0).abs() <= 1e-6, format!("sigma -> 0 limit {limit:.6}"));
    tally.done()
}

fn criterion_5() -> Res<Verdict> {
    let mut tally = Tally::new();
    let params = Emitter::default();
    let g = Grid::with_step(20.0, 0.01)?;
    let outcome = |sigma: f64| -> Res<_> {
        let xi = Pulse::gaussian(sigma, &g)?.normalized()?;
        Ok(factored_outcome(&xi, &xi, &params, true)?)
    };
    let (s_prob, f_prob) = golden_max(|s| Ok(outcome(s)?.f_prob), 0.2, 3.0, 1e-3)?;
    let (s_full, f_full) = golden_max(|s| Ok(outcome(s)?.f_full), 0.2, 3.0, 1e-3)?;
    tally.check(
        (f_prob - 0.90).abs() <= 0.02,
        format!("peak F_prob = {f_prob:.4} at sigma {s_prob:.3} (0.90 +- 0.02)"),
    );
    tally.check(
        (f_full - 0.80).abs() <= 0.03,
        format!("peak F_full = {f_full:.4} at sigma {s_full:.3} (0.80 +- 0.03)"),
    );
    tally.done()
}

fn criterion_6() -> Res<Verdict> {
    let mut tally = Tally::new();
    let params = Emitter::with_half_linewidth_detuning(1.0, 1.0)?;
    let sigma = 0.01;
    let lor = factored_lorentzian(sigma, &params, true, 10.0, 0.0005)?.f_prob;
    let g = Grid::with_step(1.0, 0.0002)?;
    let xi = Pulse::gaussian(sigma, &g)?.normalized()?;
    let gauss = factored_outcome(&xi, &xi, &params, true)?.f_prob;
    tally.check(lor >= 0.98, format!("lorentzian F_prob = {lor:.4}"));
    tally.check(gauss >= 0.98, format!("gaussian F_prob = {gauss:.4}"));
    tally.done()
}

fn criterion_7() -> Res<Verdict> {
    let mut tally = Tally::new();
    let tol = 1e-6;
    let (mut one_points, mut one_bad) = (0, 0);
    for shape in PulseShape::NAMED {
        for delta in [0.0, 0.5] {
            let params = Emitter::new(1.0, delta)?;
            let search = ShiftSearch::for_emitter(&params);
            for sigma in log_sweep(0.05, 20.0, 9) {
                let g =
                    Grid::with_step(40.0 * sigma.max(1.0), sigma.min(1.0) / 20.0)?.reweighted(shape.quadrature_rule());
                let xi = Pulse::from_shape(shape, sigma, &g)?.normalized()?;
                let f = fidelities_one(&scatter_one(&xi, &params), &xi, &search)?;
                let spat = f.f_spat.unwrap_or(f64::NAN);
                one_points += 1;
                if !(f.f_full <= f.f_int + tol && f.f_int <= f.f_prob + tol && spat <= f.f_int + tol) {
                    one_bad += 1;
                }
            }
        }
    }
    tally.check(
        one_bad == 0,
        format!("one photon: {one_bad} of {one_points} points out of order"),
    );

    let (mut two_points, mut two_bad) = (0, 0);
    for shape in PulseShape::NAMED {
        for delta in [0.0, 0.5] {
            let params = Emitter::new(1.0, delta)?;
            for sigma in log_sweep(0.1, 10.0, 5) {
                let k = 10.0 * sigma.max(1.0);
                let n = ((2.0 * k / (sigma.min(1.0) / 8.0)) as usize).clamp(201, 1201) | 1;
                let g = Grid::with_rule(k, n, shape.quadrature_rule())?;
                let xi = Pulse::from_shape(shape, sigma, &g)?.normalized()?;
                let beta = product_input(&xi, &xi)?;
                for nl in [true, false] {
                    let f = fidelities_two(&scatter_two(&beta, &params, nl)?, &beta)?;
                    two_points += 1;
                    if !(f.f_full <= f.f_int + tol && f.f_int <= f.f_prob + tol) {
                        two_bad += 1;
                    }
                }
            }
        }
    }
    tally.check(
        two_bad == 0,
        format!("two photons: {two_bad} of {two_points} points out of order"),
    );
    tally.done()
}

struct OracleRun {
    one_overlap: f64,
    one_dp: f64,
    two_overlap: f64,
    two_dp11: f64,
}

fn oracle_run(dt: f64) -> Res<OracleRun> {
    let g = Grid::with_rule(20.0, 257, QuadratureRule::Trapezoid)?;
    let params = Emitter::default();
    let xi = Pulse::gaussian(1.0, &g)?;
    let z0 = oracle::launch_offset(1.0);
    let t = oracle::default_duration(z0, &params);
    let shifted = xi.with_launch_offset(z0).normalized()?;

    let one = oracle::evolve_one(&OneExcitationState::launch(&xi, z0)?, &params, t, dt)?;
    let c1 = oracle::compare_one(&one, &scatter_one(&shifted, &params), t)?;
    let two = oracle::evolve_two(&TwoExcitationState::launch(&xi, &xi, z0)?, &params, t, dt)?;
    let c2 = oracle::compare_two(
        &two,
        &scatter_two(&product_input(&shifted, &shifted)?, &params, true)?,
        t,
    )?;
    Ok(OracleRun {
        one_overlap: c1.overlap,
        one_dp: c1.delta_p.1,
        two_overlap: c2.overlap,
        two_dp11: c2.delta_p.0,
    })
}

fn criterion_8() -> Res<Verdict> {
    let start = Instant::now();
    let mut tally = Tally::new();
    let a = oracle_run(0.002)?;
    tally.check(
        a.one_overlap >= 0.99,
        format!("one-excitation overlap {:.5}", a.one_overlap),
    );
    tally.check(a.one_dp.abs() <= 0.02, format!("|dP2| {:.2e}", a.one_dp.abs()));
    tally.check(
        a.two_overlap >= 0.99,
        format!("two-excitation overlap {:.5}", a.two_overlap),
    );
    tally.check(a.two_dp11.abs() <= 0.02, format!("|dP11| {:.2e}", a.two_dp11.abs()));
    let b = oracle_run(0.001)?;
    let change = [
        a.one_overlap - b.one_overlap,
        a.one_dp - b.one_dp,
        a.two_overlap - b.two_overlap,
        a.two_dp11 - b.two_dp11,
    ]
    .iter()
    .fold(0f64, |m, v| m.max(v.abs()));
    tally.check(
        change < 1e-4,
        format!("dt 0.002 -> 0.001 changes results by {change:.2e}"),
    );
    tally.runtime(start, Duration::from_secs(600));
    tally.done()
}

/// `sqrt(∬(a/‖a‖² - b/‖b‖²)²)` for two intensity maps on one grid.
fn spectral_distance(a: &TwoPhoton, b: &TwoPhoton) -> f64 {
    let w = a.grid().weights();
    let (ia, ib) = (a.intensity(), b.intensity());
    let (na, nb) = (a.norm_sqr(), b.norm_sqr());
    let mut acc = 0.0;
    for ((i, j), va) in ia.indexed_iter() {
        acc += w[i] * w[j] * (va / na - ib[[i, j]] / nb).powi(2);
    }
    acc.sqrt()
}

fn criterion_9() -> Res<Verdict> {
    let mut tally = Tally::new();
    let params = Emitter::default();
    let g = Grid::with_step(12.0, 0.04)?;
    let xi = Pulse::gaussian(4.0, &g)?.normalized()?;
    let s = scatter_two(&product_input(&xi, &xi)?, &params, true)?;
    let b12 = s.b12.intensity();
    let max = b12.iter().fold(0f64, |m, v| m.max(*v));
    let centre = b12[[g.zero_index(), g.zero_index()]];
    tally.check(
        centre < 0.05 * max,
        format!("sigma=4: |b12(0,0)|^2 = {:.3} of max (needs < 0.05)", centre / max),
    );

    let g = Grid::with_step(8.0, 0.04)?;
    let xi = Pulse::gaussian(1.0, &g)?.normalized()?;
    let beta = product_input(&xi, &xi)?;
    let on = scatter_two(&beta, &params, true)?;
    let off = scatter_two(&beta, &params, false)?;
    // The directionally correlated 11 part is the state the fidelities
    // compare with the input; the 12 figures are informational.
    let (d_on, d_off) = (spectral_distance(&on.b11, &beta), spectral_distance(&off.b11, &beta));
    tally.check(
        d_off > d_on,
        format!("sigma=1 11: L2 deviation off {d_off:.4} vs on {d_on:.4}"),
    );
    let (d_on, d_off) = (spectral_distance(&on.b12, &beta), spectral_distance(&off.b12, &beta));
    tally.note(format!("12: off {d_off:.4} vs on {d_on:.4}"));
    tally.done()
}

fn criterion_10() -> Res<Verdict> {
    let mut tally = Tally::new();
    let bin = wgscatter_binary()?;
    let run = || -> Res<(bool, Vec<u8>)> {
        let out = Command::new(&bin).args(["validate", "--format", "json"]).output()?;
        Ok((out.status.success(), out.stdout))
    };
    let (ok_a, a) = run()?;
    let (ok_b, b) = run()?;
    tally.check(
        ok_a && ok_b,
        format!("validate exit status {}", if ok_a && ok_b { "0" } else { "non-zero" }),
    );
    tally.check(
        !a.is_empty() && a == b,
        format!("two reports of {} bytes, identical: {}", a.len(), a == b),
    );
    tally.done()
}

type Criterion = (&'static str, &'static str, fn() -> Res<Verdict>);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("1", "single-photon closed forms and unitarity", criterion_1),
        ("2", "two-photon Lorentzian closed form and peak", criterion_2),
        ("3", "linear baseline", criterion_3),
        ("4", "enhancement factor", criterion_4),
        ("5", "Gaussian peaks", criterion_5),
        ("6", "detuned narrow-pulse limit", criterion_6),
        ("7", "fidelity ordering", criterion_7),
        ("8", "time-domain oracle agreement", criterion_8),
        ("9", "two-photon spectral features", criterion_9),
        ("10", "determinism of validate", criterion_10),
    ];
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--list") {
        for (id, _, _) in &criteria {
            println!("criterion_{id}: test");
        }
        return ExitCode::SUCCESS;
    }
    let selected: Vec<&String> = args.iter().filter(|a| !a.starts_with('-')).collect();

    let mut failed = Vec::new();
    for (id, title, run) in criteria {
        if !selected.is_empty() && !selected.iter().any(|s| *s == id) {
            continue;
        }
        let start = Instant::now();
        let verdict = run().unwrap_or_else(|e| Verdict {
            passed: false,
            detail: format!("error: {e}"),
        });
        let tag = if verdict.passed { "PASS" } else { "FAIL" };
        println!(
            "{tag} criterion {id} ({title}): {} [{:.1}s]",
            verdict.detail,
            start.elapsed().as_secs_f64()
        );
        if !verdict.passed {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all selected criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failing criteria {}", failed.join(", "));
        ExitCode::FAILURE
    }
}
