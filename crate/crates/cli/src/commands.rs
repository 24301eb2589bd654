//! One function per subcommand, each returning the tables to emit.

use rayon::prelude::*;
use wgscatter::numerics::QuadratureRule;
use wgscatter::single_photon::lorentzian_closed_forms_one;
use wgscatter::two_photon::{closed_form_p11_lorentzian, photon_density, PhotonDensity};
use wgscatter::validation::{run_validation, ValidationConfig};
use wgscatter::{
    factored_outcome, fidelities_one, fidelities_two, outcome_probabilities, product_input, scatter_one, scatter_two,
    Emitter, Grid, Pulse, PulseShape, ScatterError, ShiftSearch,
};

use crate::config::{Command, RunConfig};
use crate::table::{Cell, Table};

pub type Result<T> = std::result::Result<T, ScatterError>;

pub struct Outcome {
    pub tables: Vec<Table>,
    /// False only when `validate` found a failing check.
    pub passed: bool,
}

pub fn run(config: &RunConfig) -> Result<Outcome> {
    let tables = match config.command {
        Command::Pulse => cmd_pulse(config)?,
        Command::Scatter1 => cmd_scatter1(config)?,
        Command::Scatter2 => cmd_scatter2(config)?,
        Command::Spectrum2d => cmd_spectrum2d(config)?,
        Command::Density => cmd_density(config)?,
        Command::Validate => {
            let (table, passed) = cmd_validate(config)?;
            return Ok(Outcome {
                tables: vec![table],
                passed,
            });
        }
    };
    Ok(Outcome { tables, passed: true })
}

fn cols(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn emitter(config: &RunConfig, default_half_widths: f64) -> Result<Emitter> {
    Emitter::with_half_linewidth_detuning(1.0, config.delta.unwrap_or(default_half_widths))
}

/// Grid from the overrides, falling back to the automatic half width and
/// spacing for whatever was not given.
fn grid(config: &RunConfig, auto_half_width: f64, auto_step: f64, rule: QuadratureRule) -> Result<Grid> {
    let k = config.half_width.unwrap_or(auto_half_width);
    match config.n_points {
        Some(n) => Grid::with_rule(k, n, rule),
        None => Ok(Grid::with_step(k, auto_step)?.reweighted(rule)),
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let last = (n - 1) as f64;
    (0..n).map(|i| lo + (hi - lo) * i as f64 / last).collect()
}

fn fmt_sigma(sigma: f64) -> String {
    format!("sigma={sigma}")
}

pub fn cmd_pulse(config: &RunConfig) -> Result<Vec<Table>> {
    let shapes = config.shape.map_or(PulseShape::NAMED.to_vec(), |s| vec![s]);
    let mut tables = Vec::new();
    for &sigma in config.sigmas.as_deref().unwrap_or(&[1.0]) {
        let base = grid(
            config,
            40.0 * sigma.max(1.0),
            sigma.min(1.0) / 40.0,
            QuadratureRule::Simpson,
        )?;
        let pulses = shapes
            .iter()
            .map(|&s| Pulse::from_shape(s, sigma, &base.reweighted(s.quadrature_rule()))?.normalized())
            .collect::<Result<Vec<_>>>()?;

        let mut columns = vec!["k [Gamma/v_g]".to_string()];
        columns.extend(shapes.iter().map(|s| format!("|xi(k)|^2 {s} [v_g/Gamma]")));
        let mut spectrum = Table::new(format!("spectrum {}", fmt_sigma(sigma)), columns);
        let intensities: Vec<Vec<f64>> = pulses.iter().map(|p| p.intensity()).collect();
        for (i, &k) in base.points().iter().enumerate() {
            let mut row = vec![Cell::from(k)];
            row.extend(intensities.iter().map(|v| Cell::from(v[i])));
            spectrum.push(row);
        }

        let z = linspace(-20.0 / sigma, 20.0 / sigma, 801);
        let mut columns = vec!["z [v_g/Gamma]".to_string()];
        columns.extend(shapes.iter().map(|s| format!("|xi(z)|^2 {s} [Gamma/v_g]")));
        let mut space = Table::new(format!("space {}", fmt_sigma(sigma)), columns);
        let profiles: Vec<Vec<f64>> = pulses
            .iter()
            .map(|p| p.to_space(&z).iter().map(|v| v.norm_sqr()).collect())
            .collect();
        for (i, &zi) in z.iter().enumerate() {
            let mut row = vec![Cell::from(zi)];
            row.extend(profiles.iter().map(|v| Cell::from(v[i])));
            space.push(row);
        }
        tables.push(spectrum);
        tables.push(space);
    }
    Ok(tables)
}

/// Width sweep used by the figure commands when none is given.
fn default_sweep() -> Vec<f64> {
    let n = 25;
    (0..n).map(|i| 0.05 * 400f64.powf(i as f64 / (n - 1) as f64)).collect()
}

fn one_photon_grid(config: &RunConfig, shape: PulseShape, sigma: f64) -> Result<Grid> {
    grid(
        config,
        40.0 * sigma.max(1.0),
        sigma.min(1.0) / 20.0,
        shape.quadrature_rule(),
    )
}

pub fn cmd_scatter1(config: &RunConfig) -> Result<Vec<Table>> {
    let params = emitter(config, 0.0)?;
    let target = config.shape.unwrap_or(PulseShape::Lorentzian);
    let sigmas = config.sigmas.clone().unwrap_or_else(default_sweep);
    let search = ShiftSearch::for_emitter(&params);

    let mut columns = vec!["sigma [Gamma/v_g]".to_string()];
    columns.extend(PulseShape::NAMED.iter().map(|s| format!("P2 {s}")));
    for name in ["F_full", "F_int", "F_spat"] {
        columns.push(format!("{name} {target}"));
    }
    columns.push(format!("dz_opt {target} [v_g/Gamma]"));
    columns.push(format!("F_prob {target}"));
    columns.push("F_full closed-form lorentzian".into());
    columns.push("F_prob closed-form lorentzian".into());

    let rows = sigmas
        .par_iter()
        .map(|&sigma| -> Result<Vec<Cell>> {
            let mut row = vec![Cell::from(sigma)];
            for shape in PulseShape::NAMED {
                let xi = Pulse::from_shape(shape, sigma, &one_photon_grid(config, shape, sigma)?)?.normalized()?;
                row.push(scatter_one(&xi, &params).probabilities().1.into());
            }
            let xi = Pulse::from_shape(target, sigma, &one_photon_grid(config, target, sigma)?)?.normalized()?;
            let f = fidelities_one(&scatter_one(&xi, &params), &xi, &search)?;
            let (full_cf, prob_cf) = lorentzian_closed_forms_one(sigma, &params)?;
            row.extend([
                f.f_full.into(),
                f.f_int.into(),
                f.f_spat.unwrap_or(f64::NAN).into(),
                f.delta_z_opt.unwrap_or(f64::NAN).into(),
                f.f_prob.into(),
                full_cf.into(),
                prob_cf.into(),
            ]);
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut table = Table::new(format!("scatter1 delta={}", config.delta.unwrap_or(0.0)), columns);
    rows.into_iter().for_each(|r| table.push(r));
    Ok(vec![table])
}

struct TwoPhotonRow {
    p11: f64,
    p12: f64,
    p22: f64,
    f_full: f64,
    f_int: f64,
}

/// Probabilities and `F_full` from the factored route on a fine grid
/// (half-width extrapolated for Lorentzians); `F_int` from the full 2D
/// amplitude on a coarser grid. With an explicit grid everything uses it.
fn two_photon_point(
    config: &RunConfig,
    shape: PulseShape,
    sigma: f64,
    params: &Emitter,
    nl: bool,
) -> Result<TwoPhotonRow> {
    let rule = shape.quadrature_rule();
    let factored_at = |g: &Grid| -> Result<[f64; 4]> {
        let xi = Pulse::from_shape(shape, sigma, g)?.normalized()?;
        let o = factored_outcome(&xi, &xi, params, nl)?;
        Ok([o.p11, o.p12, o.p22, o.f_full])
    };
    let fine = grid(config, 20.0 * sigma.max(1.0), sigma.min(1.0) / 25.0, rule)?;
    let mut q = factored_at(&fine)?;
    if shape == PulseShape::Lorentzian && !config.grid_override() {
        let wide = Grid::with_step(2.0 * fine.half_width(), fine.step())?.reweighted(rule);
        let q2 = factored_at(&wide)?;
        for (a, b) in q.iter_mut().zip(q2) {
            *a = 2.0 * b - *a;
        }
    }

    let coarse = match config.grid_override() {
        true => fine,
        false => Grid::with_rule(10.0 * sigma.max(1.0), 801, rule)?,
    };
    let xi = Pulse::from_shape(shape, sigma, &coarse)?.normalized()?;
    let beta = product_input(&xi, &xi)?;
    let f = fidelities_two(&scatter_two(&beta, params, nl)?, &beta)?;
    Ok(TwoPhotonRow {
        p11: q[0],
        p12: q[1],
        p22: q[2],
        f_full: q[3],
        f_int: f.f_int,
    })
}

pub fn cmd_scatter2(config: &RunConfig) -> Result<Vec<Table>> {
    let shapes = config
        .shape
        .map_or(vec![PulseShape::Gaussian, PulseShape::Lorentzian], |s| vec![s]);
    let deltas = config.delta.map_or(vec![0.0, 1.0], |d| vec![d]);
    let toggles = config.nonlinearity.map_or(vec![true, false], |b| vec![b]);
    let sigmas = config.sigmas.clone().unwrap_or_else(default_sweep);

    let mut jobs = Vec::new();
    for &shape in &shapes {
        for &delta in &deltas {
            for &nl in &toggles {
                for &sigma in &sigmas {
                    jobs.push((shape, delta, nl, sigma));
                }
            }
        }
    }
    let rows = jobs
        .par_iter()
        .map(|&(shape, delta, nl, sigma)| -> Result<Vec<Cell>> {
            let params = Emitter::with_half_linewidth_detuning(1.0, delta)?;
            let r = two_photon_point(config, shape, sigma, &params, nl)?;
            let closed = match shape {
                PulseShape::Lorentzian => closed_form_p11_lorentzian(sigma, &params, nl)?,
                _ => f64::NAN,
            };
            Ok(vec![
                shape.name().into(),
                delta.into(),
                nl.into(),
                sigma.into(),
                r.p11.into(),
                r.p12.into(),
                r.p22.into(),
                (r.p11 + r.p22).into(),
                r.f_full.into(),
                r.f_int.into(),
                closed.into(),
            ])
        })
        .collect::<Result<Vec<_>>>()?;

    let mut table = Table::new(
        "scatter2",
        cols(&[
            "shape",
            "delta [Gamma/2]",
            "nonlinearity",
            "sigma [Gamma/v_g]",
            "P11",
            "P12",
            "P22",
            "F_prob",
            "F_full",
            "F_int",
            "P11 closed-form lorentzian",
        ]),
    );
    rows.into_iter().for_each(|r| table.push(r));
    Ok(vec![table])
}

pub fn cmd_spectrum2d(config: &RunConfig) -> Result<Vec<Table>> {
    let shape = config.shape.unwrap_or(PulseShape::Gaussian);
    let params = emitter(config, 0.0)?;
    let cases: Vec<(f64, bool)> = match (&config.sigmas, config.nonlinearity) {
        (None, None) => vec![(0.2, true), (1.0, true), (4.0, true), (1.0, false)],
        (None, Some(nl)) => [0.2, 1.0, 4.0].iter().map(|&s| (s, nl)).collect(),
        (Some(sigmas), None) => sigmas.iter().flat_map(|&s| [(s, true), (s, false)]).collect(),
        (Some(sigmas), Some(nl)) => sigmas.iter().map(|&s| (s, nl)).collect(),
    };

    let mut tables = Vec::new();
    for (sigma, nl) in cases {
        // Compute on a grid fine enough for the pulse, print about 151 points per axis.
        let (g, stride) = if config.grid_override() {
            (grid(config, 6.0, 0.04, shape.quadrature_rule())?, 1)
        } else {
            let k = 3.0 * sigma.max(2.0);
            let step = (sigma / 10.0).min(0.05);
            let stride = ((2.0 * k / step) / 150.0).ceil() as usize;
            (Grid::with_rule(k, 150 * stride + 1, shape.quadrature_rule())?, stride)
        };
        let xi = Pulse::from_shape(shape, sigma, &g)?.normalized()?;
        let beta = product_input(&xi, &xi)?;
        let s = scatter_two(&beta, &params, nl)?;
        let (bi, b12, b11) = (beta.intensity(), s.b12.intensity(), s.b11.intensity());

        let name = match nl {
            true => fmt_sigma(sigma),
            false => format!("{},no-nonlinearity", fmt_sigma(sigma)),
        };
        let mut table = Table::new(
            name,
            cols(&[
                "p [Gamma/v_g]",
                "p' [Gamma/v_g]",
                "|beta(p,p')|^2 [v_g^2/Gamma^2]",
                "|b12(p,p')|^2 [v_g^2/Gamma^2]",
                "|b11(p,p')|^2 [v_g^2/Gamma^2]",
            ]),
        );
        let k = g.points();
        for i in (0..g.len()).step_by(stride) {
            for j in (0..g.len()).step_by(stride) {
                table.push(vec![
                    k[i].into(),
                    k[j].into(),
                    bi[[i, j]].into(),
                    b12[[i, j]].into(),
                    b11[[i, j]].into(),
                ]);
            }
        }
        tables.push(table);
    }
    Ok(tables)
}

fn total(d: &PhotonDensity<f64>) -> Vec<f64> {
    d.mode1.iter().zip(&d.mode2).map(|(a, b)| a + b).collect()
}

pub fn cmd_density(config: &RunConfig) -> Result<Vec<Table>> {
    let shapes = config
        .shape
        .map_or(vec![PulseShape::Gaussian, PulseShape::Lorentzian], |s| vec![s]);
    let toggles = config.nonlinearity.map_or(vec![true, false], |b| vec![b]);
    let params = emitter(config, 0.0)?;

    let mut tables = Vec::new();
    for &sigma in config.sigmas.as_deref().unwrap_or(&[1.0]) {
        // The grid's spatial period 2π/Δk must exceed the printed window.
        let z_max = 10.0 / sigma + 20.0;
        let step = 2.0 * std::f64::consts::PI / (2.6 * z_max);
        let z = linspace(-z_max, z_max, 601);
        for &shape in &shapes {
            let g = grid(config, 20.0 * sigma.max(1.0), step, shape.quadrature_rule())?;
            let xi = Pulse::from_shape(shape, sigma, &g)?.normalized()?;
            let beta = product_input(&xi, &xi)?;

            let mut columns = vec!["z [v_g/Gamma]".to_string(), "N input [Gamma/v_g]".to_string()];
            let mut series = vec![total(&photon_density(&beta, &z))];
            for &nl in &toggles {
                let tag = if nl { "on" } else { "off" };
                let s = scatter_two(&beta, &params, nl)?;
                let p = outcome_probabilities(&s);
                let n11 = total(&photon_density(&s.b11, &z));
                let n12 = total(&photon_density(&s.b12, &z));
                let norm11: Vec<f64> = n11.iter().map(|v| v / p.p11).collect();
                let norm12: Vec<f64> = n12.iter().map(|v| v / p.p12).collect();
                for (label, data) in [("N11", n11), ("N12", n12), ("N11/P11", norm11), ("N12/P12", norm12)] {
                    columns.push(format!("{label} nonlinearity={tag} [Gamma/v_g]"));
                    series.push(data);
                }
            }
            let mut table = Table::new(format!("{shape} {}", fmt_sigma(sigma)), columns);
            for (i, &zi) in z.iter().enumerate() {
                let mut row = vec![Cell::from(zi)];
                row.extend(series.iter().map(|s| Cell::from(s[i])));
                table.push(row);
            }
            tables.push(table);
        }
    }
    Ok(tables)
}

pub fn cmd_validate(config: &RunConfig) -> Result<(Table, bool)> {
    let defaults = ValidationConfig::default();
    let grid = config
        .grid_override()
        .then(|| (config.half_width.unwrap_or(40.0), config.n_points.unwrap_or(801)));
    let report = run_validation(&ValidationConfig {
        grid,
        include_oracle: !config.skip_oracle,
        oracle_dt: config.oracle_dt.unwrap_or(defaults.oracle_dt),
    })?;
    let mut table = Table::new(
        "validation",
        cols(&["check", "value", "reference", "tolerance", "passed"]),
    );
    for c in &report.checks {
        table.push(vec![
            c.name.as_str().into(),
            c.value.into(),
            c.reference.into(),
            c.tolerance.into(),
            c.passed.into(),
        ]);
    }
    Ok((table, report.all_passed()))
}
