//! Single-photon scattering: transmitted and reflected wavepackets, their
//! probabilities, and fidelity measures against a desired reflected pulse.

use num_complex::Complex;
use serde::Serialize;

use crate::emitter::EmitterParams;
use crate::error::{Result, ScatterError};
use crate::numerics;
use crate::pulses::SpectralAmplitude;
use crate::scalar::{cplx, Scalar};

/// Long-time state after one photon in mode 1 meets the emitter.
#[derive(Clone, Debug, PartialEq)]
pub struct ScatteredOnePhoton<T> {
    /// `t̄_p ξ(p)`, still propagating in mode 1.
    pub transmitted: SpectralAmplitude<T>,
    /// `r̄_p ξ(p)`, now in mode 2.
    pub reflected: SpectralAmplitude<T>,
}

impl<T: Scalar> ScatteredOnePhoton<T> {
    /// `(P₁, P₂)`: transmission and reflection probabilities.
    pub fn probabilities(&self) -> (T, T) {
        (self.transmitted.norm_sqr(), self.reflected.norm_sqr())
    }
}

pub fn scatter_one<T: Scalar>(xi: &SpectralAmplitude<T>, params: &EmitterParams<T>) -> ScatteredOnePhoton<T> {
    ScatteredOnePhoton {
        transmitted: xi.scaled_by(|k| params.transmission(k)),
        reflected: xi.scaled_by(|k| params.reflection(k)),
    }
}

pub fn probabilities<T: Scalar>(scattered: &ScatteredOnePhoton<T>) -> (T, T) {
    scattered.probabilities()
}

/// Fidelity measures of a scattered state against a desired state.
///
/// Expected ordering: `f_full ≤ f_int ≤ f_prob ≤ 1` and `f_spat ≤ f_int`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FidelityReport<T> {
    pub f_full: T,
    pub f_int: T,
    /// Best spatial overlap after displacement; not computed for two photons.
    pub f_spat: Option<T>,
    pub f_prob: T,
    /// Displacement at which `f_spat` is attained.
    pub delta_z_opt: Option<T>,
}

/// Window over which the spatial fidelity is maximized: a uniform scan of
/// `points` displacements on `[min, max]` followed by golden-section
/// refinement around the best sample.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShiftSearch<T> {
    pub min: T,
    pub max: T,
    pub points: usize,
}

impl<T: Scalar> ShiftSearch<T> {
    /// `[-20/Γ̃, 20/Γ̃]` with 4001 samples; re-emission delays are `O(1/Γ̃)`.
    pub fn for_emitter(params: &EmitterParams<T>) -> Self {
        let reach = T::of(20.0) / params.gamma_tilde();
        Self {
            min: -reach,
            max: reach,
            points: 4001,
        }
    }
}

fn unit_desired<T: Scalar>(desired: &SpectralAmplitude<T>) -> Result<Vec<Complex<T>>> {
    let norm = desired.norm_sqr();
    if !(norm > T::zero()) {
        return Err(ScatterError::InvalidInput("desired state has zero norm".into()));
    }
    let scale = norm.sqrt().recip();
    Ok(desired.values().iter().map(|v| v * scale).collect())
}

fn overlap_integrand<T: Scalar>(
    scattered: &ScatteredOnePhoton<T>,
    desired: &SpectralAmplitude<T>,
) -> Result<Vec<Complex<T>>> {
    let grid = scattered.reflected.grid();
    grid.ensure_same(desired.grid())?;
    let d = unit_desired(desired)?;
    Ok(numerics::weighted_conj_product(
        &d,
        scattered.reflected.values(),
        grid.weights(),
    ))
}

/// `F_full = |⟨ξ_des|ξ⟩|²` for a desired state propagating in mode 2.
pub fn full_fidelity<T: Scalar>(scattered: &ScatteredOnePhoton<T>, desired: &SpectralAmplitude<T>) -> Result<T> {
    let integrand = overlap_integrand(scattered, desired)?;
    Ok(integrand
        .iter()
        .fold(cplx(T::zero(), T::zero()), |a, &b| a + b)
        .norm_sqr())
}

/// `F_int = (∫|ξ_des(p)| |ξ_scat(p)| dp)²`, phase-blind.
pub fn intensity_fidelity<T: Scalar>(scattered: &ScatteredOnePhoton<T>, desired: &SpectralAmplitude<T>) -> Result<T> {
    let integrand = overlap_integrand(scattered, desired)?;
    let total = integrand.iter().fold(T::zero(), |a, b| a + b.norm());
    Ok(total * total)
}

fn shifted_overlap<T: Scalar>(integrand: &[Complex<T>], points: &[T], shift: T) -> T {
    // ∫dz ξ*(z) ξ_scat(z - δz) = ∫dp ξ*(p) ξ_scat(p) e^{-ipδz}
    let mut phase = Complex::from_polar(T::one(), -points[0] * shift);
    let step = if points.len() > 1 {
        points[1] - points[0]
    } else {
        T::zero()
    };
    let advance = Complex::from_polar(T::one(), -step * shift);
    let mut acc = cplx(T::zero(), T::zero());
    for v in integrand {
        acc = acc + v * phase;
        phase = phase * advance;
    }
    acc.norm_sqr()
}

/// `F_spat = max_δz |∫dz ξ_des*(z) ξ_scat(z - δz)|²`, returned with the
/// maximizing displacement (positive for a delayed pulse).
pub fn spatial_fidelity<T: Scalar>(
    scattered: &ScatteredOnePhoton<T>,
    desired: &SpectralAmplitude<T>,
    search: &ShiftSearch<T>,
) -> Result<(T, T)> {
    if search.points < 2 || !(search.max > search.min) {
        return Err(ScatterError::InvalidParameter(
            "shift search needs a non-empty window".into(),
        ));
    }
    let integrand = overlap_integrand(scattered, desired)?;
    let points = scattered.reflected.grid().points();
    let f = |dz: T| shifted_overlap(&integrand, points, dz);

    let spacing = (search.max - search.min) / T::of_usize(search.points - 1);
    let (best, _) = (0..search.points)
        .map(|i| (i, f(search.min + spacing * T::of_usize(i))))
        .fold(
            (0, T::neg_infinity()),
            |(bi, bv), (i, v)| if v > bv { (i, v) } else { (bi, bv) },
        );
    let centre = search.min + spacing * T::of_usize(best);
    let lo = (centre - spacing).max(search.min);
    let hi = (centre + spacing).min(search.max);
    let (dz, value) = golden_section_max(f, lo, hi, spacing * T::of(1e-6));
    let at_centre = f(centre);
    Ok(if at_centre > value {
        (at_centre, centre)
    } else {
        (value, dz)
    })
}

/// Maximizes a unimodal function on `[lo, hi]`.
fn golden_section_max<T: Scalar>(f: impl Fn(T) -> T, mut lo: T, mut hi: T, tol: T) -> (T, T) {
    let ratio = (T::of(5.0).sqrt() - T::one()) / T::of(2.0);
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if (hi - lo).abs() <= tol {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = f(x1);
        }
    }
    let x = (lo + hi) / T::of(2.0);
    (x, f(x))
}

/// All four measures against a reflected copy of `desired`. The desired
/// amplitude is normalized before use. `F_prob` is the reflection
/// probability.
pub fn fidelities_one<T: Scalar>(
    scattered: &ScatteredOnePhoton<T>,
    desired: &SpectralAmplitude<T>,
    search: &ShiftSearch<T>,
) -> Result<FidelityReport<T>> {
    let (f_spat, dz) = spatial_fidelity(scattered, desired, search)?;
    Ok(FidelityReport {
        f_full: full_fidelity(scattered, desired)?,
        f_int: intensity_fidelity(scattered, desired)?,
        f_spat: Some(f_spat),
        f_prob: scattered.probabilities().1,
        delta_z_opt: Some(dz),
    })
}

/// Exact `(F_full, F_prob)` for a Lorentzian input of width `sigma` whose
/// desired state is its own reflection.
pub fn lorentzian_closed_forms_one<T: Scalar>(sigma: T, params: &EmitterParams<T>) -> Result<(T, T)> {
    if !(sigma > T::zero()) {
        return Err(ScatterError::InvalidParameter(format!(
            "spectral width must be positive, got {sigma}"
        )));
    }
    let gamma = params.gamma_tilde();
    let delta = params.delta();
    let denom = (gamma + sigma).powi(2) + T::of(4.0) * delta * delta;
    Ok((gamma * gamma / denom, (gamma + sigma) * gamma / denom))
}
