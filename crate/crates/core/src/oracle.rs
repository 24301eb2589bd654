//! Time-domain reference: the emitter–waveguide Hamiltonian evolved directly
//! in the one- and two-excitation sectors on a discretized continuum, for
//! comparison with the scattering-matrix results.
//!
//! Amplitudes are continuum-normalized on the grid: a photon amplitude `φ(k)`
//! contributes `Σ|φ|²Δk` to the norm, a two-photon amplitude `Σ|β|²Δk²`.
//! Identical-mode pair amplitudes follow the same normalization as the
//! scattered two-photon state, so `Σ|β₁₁|²Δk²` is the probability `P₁₁`.
//!
//! The discrete continuum revives after `2π/Δk`; evolution times beyond that
//! are rejected. The finite band `±K` also gives the emitter a frequency
//! dependent self-energy of relative size `Γ̃/(πK)`, which sets the leading
//! difference from the continuum prediction.

use ndarray::Array2;
use num_complex::Complex;
use serde::Serialize;

use crate::emitter::EmitterParams;
use crate::error::{Result, ScatterError};
use crate::numerics::WavevectorGrid;
use crate::pulses::SpectralAmplitude;
use crate::scalar::{cplx, Scalar};
use crate::single_photon::ScatteredOnePhoton;
use crate::two_photon::ScatteredTwoPhotonState;

/// Largest tolerated relative change of the total norm.
pub const NORM_DRIFT_LIMIT: f64 = 1e-4;

/// Emitter detuning and waveguide coupling seen by the integrator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleSystem<T> {
    pub delta: T,
    pub coupling: T,
}

impl<T: Scalar> OracleSystem<T> {
    pub fn from_params(params: &EmitterParams<T>) -> Self {
        Self {
            delta: params.delta(),
            coupling: params.coupling(),
        }
    }

    /// Emitter decoupled from the waveguide: free propagation only.
    pub fn uncoupled(delta: T) -> Self {
        Self {
            delta,
            coupling: T::zero(),
        }
    }
}

/// Launch position `z₀ = -10/σ`: the pulse starts well clear of the emitter.
pub fn launch_offset<T: Scalar>(sigma: T) -> T {
    -T::of(10.0) / sigma
}

/// `2|z₀| + 10/Γ̃`: both pulses have passed and the emitter has decayed.
pub fn default_duration<T: Scalar>(z0: T, params: &EmitterParams<T>) -> T {
    z0.abs() * T::of(2.0) + T::of(10.0) / params.gamma_tilde()
}

/// One photon in either mode, or the excited emitter with no photon.
#[derive(Clone, Debug, PartialEq)]
pub struct OneExcitationState<T> {
    grid: WavevectorGrid<T>,
    /// Photon amplitudes in mode 1 and mode 2.
    pub photons: [Vec<Complex<T>>; 2],
    /// Excited emitter, empty waveguide.
    pub emitter: Complex<T>,
}

impl<T: Scalar> OneExcitationState<T> {
    /// Pulse `ξ(k) e^{-ikz₀}` in mode 1, normalized under the grid measure.
    pub fn launch(xi: &SpectralAmplitude<T>, z0: T) -> Result<Self> {
        let grid = xi.grid().clone();
        let photon = unit_rectangle(&xi.with_launch_offset(z0), grid.step())?;
        let n = grid.len();
        Ok(Self {
            grid,
            photons: [photon, vec![zero(); n]],
            emitter: zero(),
        })
    }

    pub fn grid(&self) -> &WavevectorGrid<T> {
        &self.grid
    }

    /// `(P₁, P₂, P_e)`.
    pub fn probabilities(&self) -> (T, T, T) {
        let dk = self.grid.step();
        (
            sum_sqr(&self.photons[0]) * dk,
            sum_sqr(&self.photons[1]) * dk,
            self.emitter.norm_sqr(),
        )
    }

    pub fn norm_sqr(&self) -> T {
        let (a, b, c) = self.probabilities();
        a + b + c
    }

    fn pack(&self) -> Vec<Complex<T>> {
        let mut y = Vec::with_capacity(2 * self.grid.len() + 1);
        y.extend_from_slice(&self.photons[0]);
        y.extend_from_slice(&self.photons[1]);
        y.push(self.emitter);
        y
    }

    fn unpack(grid: &WavevectorGrid<T>, y: &[Complex<T>]) -> Self {
        let n = grid.len();
        Self {
            grid: grid.clone(),
            photons: [y[..n].to_vec(), y[n..2 * n].to_vec()],
            emitter: y[2 * n],
        }
    }
}

/// Two photons, or one photon plus the excited emitter.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoExcitationState<T> {
    grid: WavevectorGrid<T>,
    /// Both photons in mode 1; symmetric.
    pub beta11: Array2<Complex<T>>,
    /// Mode-1 photon at the row wavevector, mode-2 photon at the column.
    pub beta12: Array2<Complex<T>>,
    /// Both photons in mode 2; symmetric.
    pub beta22: Array2<Complex<T>>,
    /// Excited emitter plus one photon in mode 1 or mode 2.
    pub emitter_photon: [Vec<Complex<T>>; 2],
}

impl<T: Scalar> TwoExcitationState<T> {
    /// Counter-propagating product input `N[f⊗g + g⊗f]` with
    /// `f = ξ e^{-ikz₀}`, `g = ξ′ e^{-ikz₀}`: both photons start a distance
    /// `|z₀|` from the emitter on opposite sides.
    pub fn launch(xi: &SpectralAmplitude<T>, xi2: &SpectralAmplitude<T>, z0: T) -> Result<Self> {
        xi.grid().ensure_same(xi2.grid())?;
        let grid = xi.grid().clone();
        let dk = grid.step();
        let f = xi.with_launch_offset(z0);
        let g = xi2.with_launch_offset(z0);
        let (f, g) = (f.values(), g.values());
        let n = grid.len();
        let mut beta12 = Array2::from_shape_fn((n, n), |(i, j)| f[i] * g[j] + g[i] * f[j]);
        let norm = beta12.iter().fold(T::zero(), |a, v| a + v.norm_sqr()) * dk * dk;
        if !(norm > T::zero()) {
            return Err(ScatterError::InvalidInput("product state has zero norm".into()));
        }
        let scale = norm.sqrt().recip();
        beta12.mapv_inplace(|v| v * scale);
        Ok(Self {
            beta11: Array2::from_elem((n, n), zero()),
            beta22: Array2::from_elem((n, n), zero()),
            beta12,
            emitter_photon: [vec![zero(); n], vec![zero(); n]],
            grid,
        })
    }

    pub fn grid(&self) -> &WavevectorGrid<T> {
        &self.grid
    }

    /// `(P₁₁, P₁₂, P₂₂, P_e)`, the last being emitter excited plus one photon.
    pub fn probabilities(&self) -> (T, T, T, T) {
        let dk = self.grid.step();
        let two = |a: &Array2<Complex<T>>| a.iter().fold(T::zero(), |s, v| s + v.norm_sqr()) * dk * dk;
        (
            two(&self.beta11),
            two(&self.beta12),
            two(&self.beta22),
            (sum_sqr(&self.emitter_photon[0]) + sum_sqr(&self.emitter_photon[1])) * dk,
        )
    }

    pub fn norm_sqr(&self) -> T {
        let (a, b, c, d) = self.probabilities();
        a + b + c + d
    }

    fn pack(&self) -> Vec<Complex<T>> {
        let n = self.grid.len();
        let mut y = Vec::with_capacity(3 * n * n + 2 * n);
        for a in [&self.beta11, &self.beta12, &self.beta22] {
            y.extend(a.iter().copied());
        }
        y.extend_from_slice(&self.emitter_photon[0]);
        y.extend_from_slice(&self.emitter_photon[1]);
        y
    }

    fn unpack(grid: &WavevectorGrid<T>, y: &[Complex<T>]) -> Self {
        let n = grid.len();
        let nn = n * n;
        let block =
            |b: usize| Array2::from_shape_vec((n, n), y[b * nn..(b + 1) * nn].to_vec()).expect("block sized n²");
        Self {
            grid: grid.clone(),
            beta11: block(0),
            beta12: block(1),
            beta22: block(2),
            emitter_photon: [y[3 * nn..3 * nn + n].to_vec(), y[3 * nn + n..].to_vec()],
        }
    }
}

fn zero<T: Scalar>() -> Complex<T> {
    cplx(T::zero(), T::zero())
}

fn sum_sqr<T: Scalar>(v: &[Complex<T>]) -> T {
    v.iter().fold(T::zero(), |a, x| a + x.norm_sqr())
}

fn unit_rectangle<T: Scalar>(xi: &SpectralAmplitude<T>, dk: T) -> Result<Vec<Complex<T>>> {
    let norm = sum_sqr(xi.values()) * dk;
    if !(norm > T::zero()) {
        return Err(ScatterError::InvalidInput("pulse has zero norm".into()));
    }
    let scale = norm.sqrt().recip();
    Ok(xi.values().iter().map(|v| v * scale).collect())
}

/// `-i z`.
fn minus_i<T: Scalar>(z: Complex<T>) -> Complex<T> {
    cplx(z.im, -z.re)
}

fn check_schedule<T: Scalar>(grid: &WavevectorGrid<T>, t_final: T, dt: T) -> Result<usize> {
    if !(dt > T::zero()) || !(t_final >= T::zero()) || !dt.is_finite() || !t_final.is_finite() {
        return Err(ScatterError::InvalidParameter(format!(
            "need dt > 0 and t_final ≥ 0, got dt = {dt}, t_final = {t_final}"
        )));
    }
    let revival = T::PI() * T::of(2.0) / grid.step();
    if t_final >= revival {
        return Err(ScatterError::InvalidParameter(format!(
            "t_final = {t_final} reaches the grid revival time 2π/Δk = {revival}"
        )));
    }
    let steps = (t_final / dt).ceil().to_usize().unwrap_or(0);
    Ok(steps)
}

/// Classic fourth-order Runge–Kutta with preallocated stages. The norm is
/// checked every `check_every` steps and at the end.
fn rk4<T: Scalar>(
    y: &mut [Complex<T>],
    t_final: T,
    steps: usize,
    rhs: impl Fn(&[Complex<T>], &mut [Complex<T>]),
    norm: impl Fn(&[Complex<T>]) -> T,
) -> Result<()> {
    if steps == 0 {
        return Ok(());
    }
    let h = t_final / T::of_usize(steps);
    let len = y.len();
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) = (
        vec![zero(); len],
        vec![zero(); len],
        vec![zero(); len],
        vec![zero(); len],
        vec![zero(); len],
    );
    let initial = norm(y);
    let limit = T::of(NORM_DRIFT_LIMIT);
    let half = h / T::of(2.0);
    let sixth = h / T::of(6.0);
    let check_every = 100;
    for step in 1..=steps {
        rhs(y, &mut k1);
        for ((t, &a), &b) in tmp.iter_mut().zip(y.iter()).zip(&k1) {
            *t = a + b * half;
        }
        rhs(&tmp, &mut k2);
        for ((t, &a), &b) in tmp.iter_mut().zip(y.iter()).zip(&k2) {
            *t = a + b * half;
        }
        rhs(&tmp, &mut k3);
        for ((t, &a), &b) in tmp.iter_mut().zip(y.iter()).zip(&k3) {
            *t = a + b * h;
        }
        rhs(&tmp, &mut k4);
        for i in 0..len {
            y[i] = y[i] + (k1[i] + (k2[i] + k3[i]) * T::of(2.0) + k4[i]) * sixth;
        }
        if step % check_every == 0 || step == steps {
            let drift = ((norm(y) - initial) / initial).abs();
            if !(drift <= limit) {
                return Err(ScatterError::NormDrift {
                    time: (h * T::of_usize(step)).to_f64().unwrap_or(f64::NAN),
                    drift: drift.to_f64().unwrap_or(f64::NAN),
                    limit: NORM_DRIFT_LIMIT,
                });
            }
        }
    }
    Ok(())
}

/// Evolves for `t_final` with step close to `dt` under `params`.
pub fn evolve_one<T: Scalar>(
    initial: &OneExcitationState<T>,
    params: &EmitterParams<T>,
    t_final: T,
    dt: T,
) -> Result<OneExcitationState<T>> {
    evolve_one_in(initial, &OracleSystem::from_params(params), t_final, dt)
}

pub fn evolve_one_in<T: Scalar>(
    initial: &OneExcitationState<T>,
    system: &OracleSystem<T>,
    t_final: T,
    dt: T,
) -> Result<OneExcitationState<T>> {
    let grid = &initial.grid;
    let steps = check_schedule(grid, t_final, dt)?;
    let n = grid.len();
    let k = grid.points().to_vec();
    let dk = grid.step();
    let (g, delta) = (system.coupling, system.delta);
    let rhs = |y: &[Complex<T>], out: &mut [Complex<T>]| {
        let e = y[2 * n];
        let mut total = zero();
        for i in 0..n {
            out[i] = minus_i(y[i] * k[i] + e * g);
            out[n + i] = minus_i(y[n + i] * k[i] + e * g);
            total = total + y[i] + y[n + i];
        }
        out[2 * n] = minus_i(e * delta + total * (g * dk));
    };
    let norm = |y: &[Complex<T>]| sum_sqr(&y[..2 * n]) * dk + y[2 * n].norm_sqr();
    let mut y = initial.pack();
    rk4(&mut y, t_final, steps, rhs, norm)?;
    Ok(OneExcitationState::unpack(grid, &y))
}

/// Evolves for `t_final` with step close to `dt` under `params`.
pub fn evolve_two<T: Scalar>(
    initial: &TwoExcitationState<T>,
    params: &EmitterParams<T>,
    t_final: T,
    dt: T,
) -> Result<TwoExcitationState<T>> {
    evolve_two_in(initial, &OracleSystem::from_params(params), t_final, dt)
}

pub fn evolve_two_in<T: Scalar>(
    initial: &TwoExcitationState<T>,
    system: &OracleSystem<T>,
    t_final: T,
    dt: T,
) -> Result<TwoExcitationState<T>> {
    let grid = &initial.grid;
    let steps = check_schedule(grid, t_final, dt)?;
    let n = grid.len();
    let nn = n * n;
    let k = grid.points().to_vec();
    let dk = grid.step();
    let (g, delta) = (system.coupling, system.delta);
    let sqrt2 = T::of(2.0).sqrt();
    let g_pair = g / sqrt2;
    let g_back = g * dk;
    let rhs = |y: &[Complex<T>], out: &mut [Complex<T>]| {
        let (b11, rest) = y.split_at(nn);
        let (b12, rest) = rest.split_at(nn);
        let (b22, rest) = rest.split_at(nn);
        let (e1, e2) = rest.split_at(n);
        let (o11, rest) = out.split_at_mut(nn);
        let (o12, rest) = rest.split_at_mut(nn);
        let (o22, rest) = rest.split_at_mut(nn);
        let (oe1, oe2) = rest.split_at_mut(n);
        // column sums of β₁₁, β₂₂, β₁₂ and row sums of β₁₂
        let mut col11 = vec![zero(); n];
        let mut col12 = vec![zero(); n];
        let mut col22 = vec![zero(); n];
        let mut row12 = vec![zero(); n];
        for i in 0..n {
            let row = i * n;
            let mut acc = zero();
            for j in 0..n {
                let idx = row + j;
                let energy = k[i] + k[j];
                o11[idx] = minus_i(b11[idx] * energy + (e1[i] + e1[j]) * g_pair);
                o12[idx] = minus_i(b12[idx] * energy + (e1[i] + e2[j]) * g);
                o22[idx] = minus_i(b22[idx] * energy + (e2[i] + e2[j]) * g_pair);
                col11[j] = col11[j] + b11[idx];
                col12[j] = col12[j] + b12[idx];
                col22[j] = col22[j] + b22[idx];
                acc = acc + b12[idx];
            }
            row12[i] = acc;
        }
        for q in 0..n {
            let detuned = delta + k[q];
            oe1[q] = minus_i(e1[q] * detuned + (col11[q] * sqrt2 + row12[q]) * g_back);
            oe2[q] = minus_i(e2[q] * detuned + (col22[q] * sqrt2 + col12[q]) * g_back);
        }
    };
    let norm = |y: &[Complex<T>]| sum_sqr(&y[..3 * nn]) * dk * dk + sum_sqr(&y[3 * nn..]) * dk;
    let mut y = initial.pack();
    rk4(&mut y, t_final, steps, rhs, norm)?;
    Ok(TwoExcitationState::unpack(grid, &y))
}

/// Agreement between an evolved state and a scattering-matrix prediction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Comparison<T> {
    /// `|⟨ψ_S|ψ_oracle⟩|² / (‖ψ_S‖² ‖ψ_oracle‖²)`.
    pub overlap: T,
    /// Oracle minus prediction, per outcome: `(P₁, P₂)` for one photon,
    /// `(P₁₁, P₁₂)` for two (`P₂₂` mirrors `P₁₁`).
    pub delta_p: (T, T),
    /// Oracle `P₂₂` minus prediction; zero for one photon.
    pub delta_p22: T,
}

fn same_points<T: Scalar>(a: &WavevectorGrid<T>, b: &WavevectorGrid<T>) -> Result<()> {
    if a.len() == b.len() && a.half_width() == b.half_width() {
        Ok(())
    } else {
        Err(ScatterError::GridMismatch)
    }
}

fn free_phases<T: Scalar>(grid: &WavevectorGrid<T>, time: T) -> Vec<Complex<T>> {
    // undoes e^{-ikt}
    grid.points()
        .iter()
        .map(|&k| Complex::from_polar(T::one(), k * time))
        .collect()
}

/// Compares after removing the free phases `e^{-ikt}` accumulated over
/// `free_phase_time`. Both states are weighted with the uniform measure Δk.
pub fn compare_one<T: Scalar>(
    oracle: &OneExcitationState<T>,
    predicted: &ScatteredOnePhoton<T>,
    free_phase_time: T,
) -> Result<Comparison<T>> {
    same_points(&oracle.grid, predicted.reflected.grid())?;
    let dk = oracle.grid.step();
    let phase = free_phases(&oracle.grid, free_phase_time);
    let mut inner = zero();
    for (s, o) in [
        (predicted.transmitted.values(), &oracle.photons[0]),
        (predicted.reflected.values(), &oracle.photons[1]),
    ] {
        for ((a, b), p) in s.iter().zip(o).zip(&phase) {
            inner = inner + a.conj() * b * p;
        }
    }
    let p_s = (
        sum_sqr(predicted.transmitted.values()) * dk,
        sum_sqr(predicted.reflected.values()) * dk,
    );
    let (p1, p2, _) = oracle.probabilities();
    let overlap = (inner * dk).norm_sqr() / ((p_s.0 + p_s.1) * oracle.norm_sqr());
    Ok(Comparison {
        overlap,
        delta_p: (p1 - p_s.0, p2 - p_s.1),
        delta_p22: T::zero(),
    })
}

/// Two-excitation counterpart of [`compare_one`].
pub fn compare_two<T: Scalar>(
    oracle: &TwoExcitationState<T>,
    predicted: &ScatteredTwoPhotonState<T>,
    free_phase_time: T,
) -> Result<Comparison<T>> {
    same_points(&oracle.grid, predicted.b12.grid())?;
    let dk = oracle.grid.step();
    let phase = free_phases(&oracle.grid, free_phase_time);
    let mut inner = zero();
    let mut p_s = [T::zero(); 3];
    for (slot, (s, o)) in [
        (predicted.b11.values(), &oracle.beta11),
        (predicted.b12.values(), &oracle.beta12),
        (predicted.b22.values(), &oracle.beta22),
    ]
    .into_iter()
    .enumerate()
    {
        for ((idx, a), b) in s.indexed_iter().zip(o.iter()) {
            inner = inner + a.conj() * b * phase[idx.0] * phase[idx.1];
            p_s[slot] = p_s[slot] + a.norm_sqr();
        }
    }
    let area = dk * dk;
    let (p11, p12, p22, _) = oracle.probabilities();
    let total_s = (p_s[0] + p_s[1] + p_s[2]) * area;
    Ok(Comparison {
        overlap: (inner * area).norm_sqr() / (total_s * oracle.norm_sqr()),
        delta_p: (p11 - p_s[0] * area, p12 - p_s[1] * area),
        delta_p22: p22 - p_s[2] * area,
    })
}
