//! Transform-limited single-photon wavepackets `ξ(k)` sampled on a grid.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Result, ScatterError};
use crate::numerics::{self, QuadratureRule, WavevectorGrid};
use crate::scalar::{cplx, real, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PulseShape {
    Lorentzian,
    Gaussian,
    Square,
    Custom,
}

impl PulseShape {
    /// The three analytic shapes, in plotting order.
    pub const NAMED: [PulseShape; 3] = [PulseShape::Lorentzian, PulseShape::Gaussian, PulseShape::Square];

    /// Quadrature rule under which this spectrum converges fastest.
    pub fn quadrature_rule(self) -> QuadratureRule {
        match self {
            PulseShape::Square => QuadratureRule::Trapezoid,
            _ => QuadratureRule::Simpson,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PulseShape::Lorentzian => "lorentzian",
            PulseShape::Gaussian => "gaussian",
            PulseShape::Square => "square",
            PulseShape::Custom => "custom",
        }
    }
}

impl fmt::Display for PulseShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PulseShape {
    type Err = ScatterError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lorentzian" | "lor" => Ok(PulseShape::Lorentzian),
            "gaussian" | "gauss" => Ok(PulseShape::Gaussian),
            "square" | "step" => Ok(PulseShape::Square),
            other => Err(ScatterError::InvalidParameter(format!(
                "unknown pulse shape '{other}' (expected lorentzian, gaussian or square)"
            ))),
        }
    }
}

/// Gaussian amplitude width `σ'` giving an intensity FWHM of `sigma`.
pub fn gaussian_amplitude_width<T: Scalar>(sigma: T) -> T {
    sigma / (T::of(2.0) * T::LN_2().sqrt())
}

/// Single-photon wavepacket `ξ(k)` on a wavevector grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralAmplitude<T> {
    grid: WavevectorGrid<T>,
    values: Vec<Complex<T>>,
    shape: PulseShape,
    sigma: T,
}

fn check_sigma<T: Scalar>(sigma: T) -> Result<()> {
    if sigma > T::zero() && sigma.is_finite() {
        Ok(())
    } else {
        Err(ScatterError::InvalidParameter(format!(
            "spectral width must be positive and finite, got {sigma}"
        )))
    }
}

impl<T: Scalar> SpectralAmplitude<T> {
    /// `ξ(k) = √(σ/2π) / (k - iσ/2)`.
    ///
    /// The tails beyond the grid are lost, so the sampled amplitude is
    /// rescaled to unit norm under the grid quadrature. Tail mass outside
    /// `±K` is `1 - (2/π) arctan(2K/σ) ≈ σ/(πK)`.
    pub fn lorentzian(sigma: T, grid: &WavevectorGrid<T>) -> Result<Self> {
        check_sigma(sigma)?;
        let amp = (sigma / (T::PI() * T::of(2.0))).sqrt();
        let half = sigma / T::of(2.0);
        let values = grid.points().iter().map(|&k| real(amp) / cplx(k, -half)).collect();
        Self {
            grid: grid.clone(),
            values,
            shape: PulseShape::Lorentzian,
            sigma,
        }
        .normalized()
    }

    /// `ξ(k) = (πσ'²)^{-1/4} exp(-k²/2σ'²)` with `σ' = σ / (2√ln2)`.
    pub fn gaussian(sigma: T, grid: &WavevectorGrid<T>) -> Result<Self> {
        check_sigma(sigma)?;
        let width = gaussian_amplitude_width(sigma);
        let amp = (T::PI() * width * width).powf(T::of(-0.25));
        let values = grid
            .points()
            .iter()
            .map(|&k| real(amp * (-(k * k) / (T::of(2.0) * width * width)).exp()))
            .collect();
        Ok(Self {
            grid: grid.clone(),
            values,
            shape: PulseShape::Gaussian,
            sigma,
        })
    }

    /// `ξ(k) = σ^{-1/2} θ(σ/2 - |k|)`; grid points lying exactly on an edge
    /// carry `σ^{-1/2}/√2`.
    pub fn square(sigma: T, grid: &WavevectorGrid<T>) -> Result<Self> {
        check_sigma(sigma)?;
        if sigma <= grid.step() * T::of(2.0) {
            return Err(ScatterError::InvalidParameter(format!(
                "square pulse width {sigma} needs to exceed two grid spacings ({})",
                grid.step() * T::of(2.0)
            )));
        }
        let amp = sigma.sqrt().recip();
        let edge = sigma / T::of(2.0);
        let tol = grid.step() * T::of(1e-9);
        let values = grid
            .points()
            .iter()
            .map(|&k| {
                let d = k.abs() - edge;
                if d.abs() <= tol {
                    real(amp * T::FRAC_1_SQRT_2())
                } else if d < T::zero() {
                    real(amp)
                } else {
                    real(T::zero())
                }
            })
            .collect();
        Ok(Self {
            grid: grid.clone(),
            values,
            shape: PulseShape::Square,
            sigma,
        })
    }

    pub fn from_shape(shape: PulseShape, sigma: T, grid: &WavevectorGrid<T>) -> Result<Self> {
        match shape {
            PulseShape::Lorentzian => Self::lorentzian(sigma, grid),
            PulseShape::Gaussian => Self::gaussian(sigma, grid),
            PulseShape::Square => Self::square(sigma, grid),
            PulseShape::Custom => Err(ScatterError::InvalidParameter(
                "custom pulses are built from explicit samples".into(),
            )),
        }
    }

    /// Wraps explicit samples; the width is measured from `|ξ|²`.
    pub fn custom(grid: &WavevectorGrid<T>, values: Vec<Complex<T>>) -> Result<Self> {
        grid.check_len(values.len())?;
        let mut pulse = Self {
            grid: grid.clone(),
            values,
            shape: PulseShape::Custom,
            sigma: T::zero(),
        };
        pulse.sigma = pulse.fwhm().ok_or_else(|| {
            ScatterError::InvalidInput("custom spectrum has no resolvable half maximum on the grid".into())
        })?;
        Ok(pulse)
    }

    /// Same pulse launched from position `z0`: `ξ(k) e^{-ik z0}`.
    pub fn with_launch_offset(&self, z0: T) -> Self {
        let values = self
            .values
            .iter()
            .zip(self.grid.points())
            .map(|(v, &k)| v * Complex::from_polar(T::one(), -k * z0))
            .collect();
        Self {
            grid: self.grid.clone(),
            values,
            shape: PulseShape::Custom,
            sigma: self.sigma,
        }
    }

    /// Rescales to unit norm under the grid quadrature.
    pub fn normalized(mut self) -> Result<Self> {
        let norm = self.norm_sqr();
        if !(norm > T::zero()) {
            return Err(ScatterError::InvalidInput("pulse has zero norm on this grid".into()));
        }
        let scale = norm.sqrt().recip();
        for v in &mut self.values {
            *v = *v * scale;
        }
        Ok(self)
    }

    pub(crate) fn scaled_by(&self, factors: impl Fn(T) -> Complex<T>) -> Self {
        let values = self
            .values
            .iter()
            .zip(self.grid.points())
            .map(|(v, &k)| v * factors(k))
            .collect();
        Self {
            grid: self.grid.clone(),
            values,
            shape: PulseShape::Custom,
            sigma: self.sigma,
        }
    }

    pub fn grid(&self) -> &WavevectorGrid<T> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn shape(&self) -> PulseShape {
        self.shape
    }

    /// Nominal spectral FWHM (measured, for custom pulses).
    pub fn sigma(&self) -> T {
        self.sigma
    }

    pub fn intensity(&self) -> Vec<T> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }

    /// `∫|ξ(k)|² dk`.
    pub fn norm_sqr(&self) -> T {
        self.values
            .iter()
            .zip(self.grid.weights())
            .fold(T::zero(), |acc, (v, &w)| acc + v.norm_sqr() * w)
    }

    /// `∫ ξ*(k) χ(k) dk`.
    pub fn inner(&self, other: &Self) -> Result<Complex<T>> {
        self.grid.ensure_same(&other.grid)?;
        let prod = numerics::weighted_conj_product(&self.values, &other.values, self.grid.weights());
        Ok(prod.into_iter().fold(cplx(T::zero(), T::zero()), |a, b| a + b))
    }

    /// Intensity FWHM measured by scanning outward from the peak, with linear
    /// interpolation of the half-maximum crossings.
    pub fn fwhm(&self) -> Option<T> {
        let intensity = self.intensity();
        let k = self.grid.points();
        let (peak, max) = intensity.iter().enumerate().fold(
            (0, T::zero()),
            |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) },
        );
        if !(max > T::zero()) {
            return None;
        }
        let half = max / T::of(2.0);
        let crossing = |a: usize, b: usize| {
            let (ia, ib) = (intensity[a], intensity[b]);
            let frac = (ia - half) / (ia - ib);
            k[a] + (k[b] - k[a]) * frac
        };
        let right = (peak + 1..intensity.len())
            .find(|&i| intensity[i] < half)
            .map(|i| crossing(i - 1, i))?;
        let left = (0..peak)
            .rev()
            .find(|&i| intensity[i] < half)
            .map(|i| crossing(i + 1, i))?;
        Some(right - left)
    }

    /// Whether `|ξ(-k)|² = |ξ(k)|²` holds to `tol` relative to the peak.
    pub fn is_intensity_symmetric(&self, tol: T) -> bool {
        let intensity = self.intensity();
        let max = intensity.iter().fold(T::zero(), |a, &b| a.max(b));
        let n = intensity.len();
        (0..n / 2).all(|i| (intensity[i] - intensity[n - 1 - i]).abs() <= tol * max)
    }

    /// Position representation `ξ(z)` at the given positions.
    pub fn to_space(&self, z_points: &[T]) -> Vec<Complex<T>> {
        numerics::to_space(&self.values, &self.grid, z_points).expect("values sized to grid")
    }
}
