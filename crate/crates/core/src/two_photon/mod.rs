//! Two counter-propagating photons on one emitter: the scattered three-mode
//! state, the bound-state (four-wave mixing) term, outcome probabilities,
//! fidelities against a 50/50 beam-splitter output, and photon densities.
//!
//! Stored components are normalized so that `∬|β′|² dp dp′` is the outcome
//! probability of the respective mode pair.

mod factored;

pub use factored::{factored_outcome, FactoredOutcome};

use ndarray::{Array2, Zip};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::emitter::EmitterParams;
use crate::error::{Result, ScatterError};
use crate::numerics::{self, WavevectorGrid};
use crate::pulses::SpectralAmplitude;
use crate::scalar::{cplx, Scalar};
use crate::single_photon::FidelityReport;

/// Which waveguide modes the two photons occupy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModePair {
    /// Both photons in mode 1 (right-moving).
    #[serde(rename = "11")]
    Pair11,
    /// One photon per mode.
    #[serde(rename = "12")]
    Pair12,
    /// Both photons in mode 2 (left-moving).
    #[serde(rename = "22")]
    Pair22,
}

impl ModePair {
    pub fn label(self) -> &'static str {
        match self {
            ModePair::Pair11 => "11",
            ModePair::Pair12 => "12",
            ModePair::Pair22 => "22",
        }
    }

    fn identical_modes(self) -> bool {
        !matches!(self, ModePair::Pair12)
    }
}

/// `values = scale · (first ⊗ second + second ⊗ first)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductFactors<T> {
    pub first: Vec<Complex<T>>,
    pub second: Vec<Complex<T>>,
    pub scale: T,
}

/// Two-photon amplitude `β(k, k′)` on a square wavevector grid; row index is
/// the first argument.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoPhotonAmplitude<T> {
    grid: WavevectorGrid<T>,
    values: Array2<Complex<T>>,
    mode_pair: ModePair,
    factors: Option<ProductFactors<T>>,
}

fn max_asymmetry<T: Scalar>(values: &Array2<Complex<T>>) -> (T, T) {
    let n = values.nrows();
    let mut worst = T::zero();
    let mut peak = T::zero();
    for i in 0..n {
        for j in 0..n {
            peak = peak.max(values[[i, j]].norm());
            if j > i {
                worst = worst.max((values[[i, j]] - values[[j, i]]).norm());
            }
        }
    }
    (worst, peak)
}

impl<T: Scalar> TwoPhotonAmplitude<T> {
    /// General amplitude. Identical-mode pairs must be symmetric under
    /// `k ↔ k′` to within `1e-10` of the peak modulus.
    pub fn new(grid: &WavevectorGrid<T>, values: Array2<Complex<T>>, mode_pair: ModePair) -> Result<Self> {
        let n = grid.len();
        if values.dim() != (n, n) {
            return Err(ScatterError::LengthMismatch {
                expected: n,
                found: if values.nrows() != n {
                    values.nrows()
                } else {
                    values.ncols()
                },
            });
        }
        let amp = Self {
            grid: grid.clone(),
            values,
            mode_pair,
            factors: None,
        };
        if mode_pair.identical_modes() && !amp.is_symmetric(T::of(1e-10)) {
            return Err(ScatterError::InvalidInput(format!(
                "mode pair {} requires a symmetric amplitude",
                mode_pair.label()
            )));
        }
        Ok(amp)
    }

    pub fn grid(&self) -> &WavevectorGrid<T> {
        &self.grid
    }

    pub fn values(&self) -> &Array2<Complex<T>> {
        &self.values
    }

    pub fn mode_pair(&self) -> ModePair {
        self.mode_pair
    }

    /// Present when the amplitude was built by [`product_input`].
    pub fn factors(&self) -> Option<&ProductFactors<T>> {
        self.factors.as_ref()
    }

    /// `∬|β|² dk dk′`.
    pub fn norm_sqr(&self) -> T {
        weighted_inner_abs(&self.values, &self.values, self.grid.weights(), |a, _| a.norm_sqr())
    }

    /// `|β(k,k′) - β(k′,k)| ≤ tol · max|β|` everywhere.
    pub fn is_symmetric(&self, tol: T) -> bool {
        let (worst, peak) = max_asymmetry(&self.values);
        worst <= tol * peak
    }

    /// `|β(k,k′)|²`.
    pub fn intensity(&self) -> Array2<T> {
        self.values.mapv(|v| v.norm_sqr())
    }

    /// `β̃(z, z′) = (2π)⁻¹ ∬dk dk′ β(k,k′) e^{i(kz + k′z′)}` on `z × z`.
    pub fn to_space(&self, z_points: &[T]) -> Array2<Complex<T>> {
        let m = phase_matrix(&self.grid, z_points);
        m.dot(&self.values).dot(&m.t())
    }
}

/// `M(z, k) = (2π)^{-1/2} w_k e^{ikz}`.
fn phase_matrix<T: Scalar>(grid: &WavevectorGrid<T>, z_points: &[T]) -> Array2<Complex<T>> {
    let prefactor = (T::PI() * T::of(2.0)).sqrt().recip();
    Array2::from_shape_fn((z_points.len(), grid.len()), |(a, i)| {
        Complex::from_polar(prefactor * grid.weights()[i], grid.points()[i] * z_points[a])
    })
}

fn weighted_inner_abs<T: Scalar>(
    a: &Array2<Complex<T>>,
    b: &Array2<Complex<T>>,
    w: &[T],
    f: impl Fn(&Complex<T>, &Complex<T>) -> T,
) -> T {
    let mut total = T::zero();
    for (i, (ra, rb)) in a.rows().into_iter().zip(b.rows()).enumerate() {
        let row = ra
            .iter()
            .zip(rb.iter())
            .zip(w)
            .fold(T::zero(), |acc, ((x, y), &wj)| acc + f(x, y) * wj);
        total = total + row * w[i];
    }
    total
}

fn weighted_inner<T: Scalar>(a: &Array2<Complex<T>>, b: &Array2<Complex<T>>, w: &[T]) -> Complex<T> {
    let mut total = cplx(T::zero(), T::zero());
    for (i, (ra, rb)) in a.rows().into_iter().zip(b.rows()).enumerate() {
        let row = ra
            .iter()
            .zip(rb.iter())
            .zip(w)
            .fold(cplx(T::zero(), T::zero()), |acc, ((x, y), &wj)| acc + x.conj() * y * wj);
        total = total + row * w[i];
    }
    total
}

/// Symmetrized, normalized product `N[ξ(k)ξ′(k′) + ξ′(k)ξ(k′)]` with one
/// photon in each mode. Reduces to `ξ(k)ξ(k′)` for identical normalized
/// pulses.
pub fn product_input<T: Scalar>(
    xi: &SpectralAmplitude<T>,
    xi2: &SpectralAmplitude<T>,
) -> Result<TwoPhotonAmplitude<T>> {
    xi.grid().ensure_same(xi2.grid())?;
    let grid = xi.grid();
    let (f, g) = (xi.values(), xi2.values());
    // ∬|f⊗g + g⊗f|² = 2‖f‖²‖g‖² + 2|⟨f,g⟩|², exact under the product quadrature
    let overlap = xi.inner(xi2)?.norm_sqr();
    let norm = T::of(2.0) * (xi.norm_sqr() * xi2.norm_sqr() + overlap);
    if !(norm > T::zero()) {
        return Err(ScatterError::InvalidInput("product state has zero norm".into()));
    }
    let scale = norm.sqrt().recip();
    let n = grid.len();
    let values = Array2::from_shape_fn((n, n), |(i, j)| (f[i] * g[j] + g[i] * f[j]) * scale);
    Ok(TwoPhotonAmplitude {
        grid: grid.clone(),
        values,
        mode_pair: ModePair::Pair12,
        factors: Some(ProductFactors {
            first: f.to_vec(),
            second: g.to_vec(),
            scale,
        }),
    })
}

/// `C(E_m) = Σ_i w_i β(k_i, E_m - k_i) (s_i + s_{m-i})` on the sum grid.
pub(crate) fn bound_state_profile<T: Scalar>(
    beta12: &TwoPhotonAmplitude<T>,
    params: &EmitterParams<T>,
) -> Vec<Complex<T>> {
    let grid = &beta12.grid;
    let s: Vec<Complex<T>> = grid.points().iter().map(|&k| params.s_factor(k)).collect();
    match &beta12.factors {
        Some(fac) => product_profile(&fac.first, &fac.second, fac.scale, &s, grid),
        None => {
            let n = grid.len();
            let w = grid.weights();
            (0..2 * n - 1)
                .map(|m| {
                    let lo = m.saturating_sub(n - 1);
                    let hi = m.min(n - 1);
                    (lo..=hi).fold(cplx(T::zero(), T::zero()), |acc, i| {
                        acc + beta12.values[[i, m - i]] * (s[i] + s[m - i]) * w[i]
                    })
                })
                .collect()
        }
    }
}

pub(crate) fn product_profile<T: Scalar>(
    f: &[Complex<T>],
    g: &[Complex<T>],
    scale: T,
    s: &[Complex<T>],
    grid: &WavevectorGrid<T>,
) -> Vec<Complex<T>> {
    let times =
        |a: &[Complex<T>], b: &[Complex<T>]| -> Vec<Complex<T>> { a.iter().zip(b).map(|(x, y)| x * y).collect() };
    let (fs, gs) = (times(f, s), times(g, s));
    let terms = [
        numerics::convolve_on_sum(&fs, g, grid),
        numerics::convolve_on_sum(f, &gs, grid),
        numerics::convolve_on_sum(&gs, f, grid),
        numerics::convolve_on_sum(g, &fs, grid),
    ];
    let mut out = vec![cplx(T::zero(), T::zero()); 2 * grid.len() - 1];
    for term in terms {
        for (o, v) in out.iter_mut().zip(term.expect("factors sized to grid")) {
            *o = *o + v;
        }
    }
    out.into_iter().map(|v| v * scale).collect()
}

/// Bound-state term `b₁₂(p,p′) = ∫dk β₁₂(k, p+p′-k) B_{pp′k(p+p′-k)}`,
/// evaluated as `i(√Γ/π) s_p s_p′ C(p+p′)`.
///
/// `p + p′` always falls on the sum grid, so `C` needs no interpolation.
/// Product inputs use FFT convolutions; other inputs an anti-diagonal sum.
pub fn nonlinear_term<T: Scalar>(beta12: &TwoPhotonAmplitude<T>, params: &EmitterParams<T>) -> Array2<Complex<T>> {
    let profile = bound_state_profile(beta12, params);
    assemble_bound_state(&profile, &beta12.grid, params)
}

fn assemble_bound_state<T: Scalar>(
    profile: &[Complex<T>],
    grid: &WavevectorGrid<T>,
    params: &EmitterParams<T>,
) -> Array2<Complex<T>> {
    let s: Vec<Complex<T>> = grid.points().iter().map(|&k| params.s_factor(k)).collect();
    let pref = params.bound_state_prefactor();
    let n = grid.len();
    Array2::from_shape_fn((n, n), |(i, j)| (s[i] * s[j]) * pref * profile[i + j])
}

/// Reference `O(n³)` evaluation of [`nonlinear_term`] from the bound-state
/// element directly.
pub fn nonlinear_term_direct<T: Scalar>(
    beta12: &TwoPhotonAmplitude<T>,
    params: &EmitterParams<T>,
) -> Array2<Complex<T>> {
    let grid = &beta12.grid;
    let (k, w) = (grid.points(), grid.weights());
    let n = grid.len();
    Array2::from_shape_fn((n, n), |(i, j)| {
        let m = i + j;
        let lo = m.saturating_sub(n - 1);
        let hi = m.min(n - 1);
        (lo..=hi).fold(cplx(T::zero(), T::zero()), |acc, q| {
            acc + beta12.values[[q, m - q]] * params.b_element(k[i], k[j], k[q], k[m - q]) * w[q]
        })
    })
}

/// Scattered state; `b11`/`b22` hold `[(t̄r̄′ + r̄t̄′)β + b/4]/√2` and `b12`
/// holds `(t̄t̄′ + r̄r̄′)β + b/4`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScatteredTwoPhotonState<T> {
    pub b11: TwoPhotonAmplitude<T>,
    pub b12: TwoPhotonAmplitude<T>,
    pub b22: TwoPhotonAmplitude<T>,
    pub includes_nonlinearity: bool,
}

/// Scatters a symmetric one-photon-per-mode input. With
/// `include_nonlinearity = false` the bound-state term is dropped and only
/// independent single-photon scattering remains.
pub fn scatter_two<T: Scalar>(
    beta12: &TwoPhotonAmplitude<T>,
    params: &EmitterParams<T>,
    include_nonlinearity: bool,
) -> Result<ScatteredTwoPhotonState<T>> {
    if beta12.mode_pair != ModePair::Pair12 {
        return Err(ScatterError::InvalidInput(
            "input must have one photon in each mode".into(),
        ));
    }
    if beta12.factors.is_none() && !beta12.is_symmetric(T::of(1e-10)) {
        return Err(ScatterError::InvalidInput("input amplitude must be symmetric".into()));
    }
    let grid = &beta12.grid;
    let t: Vec<Complex<T>> = grid.points().iter().map(|&k| params.transmission(k)).collect();
    let r: Vec<Complex<T>> = grid.points().iter().map(|&k| params.reflection(k)).collect();
    let n = grid.len();
    let quarter = T::of(0.25);

    let mut x11 = Array2::from_shape_fn((n, n), |(i, j)| (t[i] * r[j] + r[i] * t[j]) * beta12.values[[i, j]]);
    let mut x12 = Array2::from_shape_fn((n, n), |(i, j)| (t[i] * t[j] + r[i] * r[j]) * beta12.values[[i, j]]);
    if include_nonlinearity {
        let b = nonlinear_term(beta12, params);
        Zip::from(&mut x11).and(&mut x12).and(&b).for_each(|a, c, &v| {
            *a = *a + v * quarter;
            *c = *c + v * quarter;
        });
    }
    let inv_sqrt2 = T::of(2.0).sqrt().recip();
    x11.mapv_inplace(|v| v * inv_sqrt2);
    let wrap = |values, mode_pair| TwoPhotonAmplitude {
        grid: grid.clone(),
        values,
        mode_pair,
        factors: None,
    };
    Ok(ScatteredTwoPhotonState {
        b22: wrap(x11.clone(), ModePair::Pair22),
        b11: wrap(x11, ModePair::Pair11),
        b12: wrap(x12, ModePair::Pair12),
        includes_nonlinearity: include_nonlinearity,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OutcomeProbabilities<T> {
    /// Both photons in mode 1.
    pub p11: T,
    /// One photon in each mode.
    pub p12: T,
    /// Both photons in mode 2.
    pub p22: T,
}

impl<T: Scalar> OutcomeProbabilities<T> {
    pub fn total(&self) -> T {
        self.p11 + self.p12 + self.p22
    }

    /// Probability that both photons leave in the same direction.
    pub fn f_prob(&self) -> T {
        self.p11 + self.p22
    }
}

pub fn outcome_probabilities<T: Scalar>(s: &ScatteredTwoPhotonState<T>) -> OutcomeProbabilities<T> {
    OutcomeProbabilities {
        p11: s.b11.norm_sqr(),
        p12: s.b12.norm_sqr(),
        p22: s.b22.norm_sqr(),
    }
}

/// Fidelities against the 50/50 beam-splitter output built from `input`:
/// equal real weights on `β` in modes 11 and 22. The spatial measure is not
/// defined here and is left unset.
pub fn fidelities_two<T: Scalar>(
    s: &ScatteredTwoPhotonState<T>,
    input: &TwoPhotonAmplitude<T>,
) -> Result<FidelityReport<T>> {
    s.b11.grid.ensure_same(&input.grid)?;
    let w = input.grid.weights();
    let norm = input.norm_sqr();
    if !(norm > T::zero()) {
        return Err(ScatterError::InvalidInput("input state has zero norm".into()));
    }
    // overlap of (β₁₁ + β₂₂)/√2 with the scattered state is ∬β* X₁₁ = √2 ∬β* b₁₁
    let sqrt2 = T::of(2.0).sqrt();
    let full = weighted_inner(&input.values, &s.b11.values, w) * (sqrt2 / norm.sqrt());
    let int = weighted_inner_abs(&input.values, &s.b11.values, w, |a, b| a.norm() * b.norm()) * (sqrt2 / norm.sqrt());
    Ok(FidelityReport {
        f_full: full.norm_sqr(),
        f_int: int * int,
        f_spat: None,
        f_prob: s.b11.norm_sqr() + s.b22.norm_sqr(),
        delta_z_opt: None,
    })
}

fn check_width<T: Scalar>(sigma: T) -> Result<()> {
    if sigma > T::zero() && sigma.is_finite() {
        Ok(())
    } else {
        Err(ScatterError::InvalidParameter(format!(
            "spectral width must be positive, got {sigma}"
        )))
    }
}

/// Exact `P₁₁` for two identical Lorentzian photons of width `sigma`.
pub fn closed_form_p11_lorentzian<T: Scalar>(
    sigma: T,
    params: &EmitterParams<T>,
    include_nonlinearity: bool,
) -> Result<T> {
    check_width(sigma)?;
    let g = params.gamma_tilde();
    let d2 = params.delta() * params.delta() * T::of(4.0);
    let (two, three) = (T::of(2.0), T::of(3.0));
    let detuned = d2 * g * (sigma + two * g);
    Ok(if include_nonlinearity {
        (three * g * sigma * (three * sigma + g) * (sigma + g) + detuned)
            / (((three * sigma + g).powi(2) + d2) * ((sigma + g).powi(2) + d2))
    } else {
        let base = (sigma + g).powi(2) + d2;
        (sigma * g * (sigma + g).powi(2) + detuned) / (base * base)
    })
}

/// On-resonance ratio of `P₁₁` with and without the bound-state term for
/// Lorentzian inputs, `1 + 2/(1 + 3σ/Γ̃)`.
pub fn enhancement_factor<T: Scalar>(sigma: T, gamma_tilde: T) -> Result<T> {
    check_width(sigma)?;
    Ok(T::one() + T::of(2.0) / (T::one() + T::of(3.0) * sigma / gamma_tilde))
}

/// `P₁₁ = a(1 - a)` with `a = ∫|r̄_p|²|ξ(p)|² dp`, valid without the
/// bound-state term for a resonant emitter and an intensity-symmetric pulse.
pub fn linear_resonant_p11<T: Scalar>(xi: &SpectralAmplitude<T>, params: &EmitterParams<T>) -> Result<T> {
    if params.delta() != T::zero() {
        return Err(ScatterError::InvalidParameter(
            "formula requires a resonant emitter".into(),
        ));
    }
    if !xi.is_intensity_symmetric(T::of(1e-8)) {
        return Err(ScatterError::InvalidInput("formula requires |ξ(-k)|² = |ξ(k)|²".into()));
    }
    let norm = xi.norm_sqr();
    if !(norm > T::zero()) {
        return Err(ScatterError::InvalidInput("pulse has zero norm".into()));
    }
    let weighted: Vec<T> = xi
        .values()
        .iter()
        .zip(xi.grid().points())
        .map(|(v, &k)| params.reflection(k).norm_sqr() * v.norm_sqr())
        .collect();
    let a = numerics::integrate_real(&weighted, xi.grid())? / norm;
    Ok(a * (T::one() - a))
}

/// Photon density per waveguide mode carried by one component.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhotonDensity<T> {
    pub z: Vec<T>,
    pub mode1: Vec<T>,
    pub mode2: Vec<T>,
}

impl<T: Scalar> PhotonDensity<T> {
    /// Photon numbers `(∫N₁ dz, ∫N₂ dz)` by the trapezoid rule on `z`.
    pub fn photon_numbers(&self) -> (T, T) {
        let trap = |v: &[T]| {
            self.z.windows(2).zip(v.windows(2)).fold(T::zero(), |acc, (z, y)| {
                acc + (z[1] - z[0]) * (y[0] + y[1]) / T::of(2.0)
            })
        };
        (trap(&self.mode1), trap(&self.mode2))
    }
}

/// `N(z) = ⟨a†(z)a(z)⟩` restricted to one component. For identical modes
/// `N(z) = 2∫dz′|β̃(z,z′)|²`; for one photon per mode `N₁(z) = ∫dz′|β̃(z,z′)|²`
/// and `N₂(z) = ∫dz|β̃(z,z′)|²`. The `z′` integral is taken in wavevector
/// space.
pub fn photon_density<T: Scalar>(component: &TwoPhotonAmplitude<T>, z_points: &[T]) -> PhotonDensity<T> {
    let grid = &component.grid;
    let m = phase_matrix(grid, z_points);
    let w = grid.weights();
    let marginal = |half: Array2<Complex<T>>| -> Vec<T> {
        half.rows()
            .into_iter()
            .map(|row| {
                row.iter()
                    .zip(w)
                    .fold(T::zero(), |acc, (v, &wk)| acc + v.norm_sqr() * wk)
            })
            .collect()
    };
    let first = marginal(m.dot(&component.values));
    let zeros = vec![T::zero(); z_points.len()];
    let (mode1, mode2) = match component.mode_pair {
        ModePair::Pair11 => (first.into_iter().map(|v| v * T::of(2.0)).collect(), zeros),
        ModePair::Pair22 => (zeros, first.into_iter().map(|v| v * T::of(2.0)).collect()),
        ModePair::Pair12 => (first, marginal(m.dot(&component.values.t()))),
    };
    PhotonDensity {
        z: z_points.to_vec(),
        mode1,
        mode2,
    }
}
