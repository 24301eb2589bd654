//! Wavevector grids, composite quadrature, Fourier transforms between
//! wavevector and position, and the sum-wavevector convolution used by the
//! two-photon bound-state term.

use num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Result, ScatterError};
use crate::scalar::Scalar;

/// Composite rule behind a grid's weights.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum QuadratureRule {
    /// Fourth order on smooth integrands.
    #[default]
    Simpson,
    /// Second order. Preferred for spectra with jumps (square pulses): the
    /// two-photon integrals then converge far faster than under Simpson,
    /// whose alternating weights interact badly with the jump positions.
    Trapezoid,
}

/// Uniform grid of rotating-frame wavevectors, symmetric about `k = 0`,
/// carrying composite quadrature weights (Simpson unless chosen otherwise).
///
/// The point count is odd so that the carrier (and, at zero detuning, the
/// emitter resonance) is sampled exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct WavevectorGrid<T> {
    half_width: T,
    step: T,
    points: Vec<T>,
    weights: Vec<T>,
    rule: QuadratureRule,
}

impl<T: Scalar> WavevectorGrid<T> {
    pub fn new(half_width: T, n_points: usize) -> Result<Self> {
        Self::with_rule(half_width, n_points, QuadratureRule::Simpson)
    }

    pub fn with_rule(half_width: T, n_points: usize, rule: QuadratureRule) -> Result<Self> {
        if !(half_width > T::zero()) || !half_width.is_finite() {
            return Err(ScatterError::InvalidGrid(format!(
                "half width must be positive and finite, got {half_width}"
            )));
        }
        if n_points < 3 || n_points.is_multiple_of(2) {
            return Err(ScatterError::InvalidGrid(format!(
                "point count must be odd and at least 3 so that k = 0 is sampled, got {n_points}"
            )));
        }
        let mid = n_points / 2;
        let step = half_width * T::of(2.0) / T::of_usize(n_points - 1);

        // Mirror the lower half so the grid is exactly symmetric.
        let mut points = vec![T::zero(); n_points];
        for i in 0..mid {
            let k = -half_width + T::of_usize(i) * step;
            points[i] = k;
            points[n_points - 1 - i] = -k;
        }

        let third = step / T::of(3.0);
        let weights = (0..n_points)
            .map(|i| {
                let end = i == 0 || i == n_points - 1;
                match rule {
                    QuadratureRule::Simpson if end => third,
                    QuadratureRule::Simpson if i % 2 == 1 => third * T::of(4.0),
                    QuadratureRule::Simpson => third * T::of(2.0),
                    QuadratureRule::Trapezoid if end => step / T::of(2.0),
                    QuadratureRule::Trapezoid => step,
                }
            })
            .collect();

        Ok(Self {
            half_width,
            step,
            points,
            weights,
            rule,
        })
    }

    /// Same points with a different weight rule.
    pub fn reweighted(&self, rule: QuadratureRule) -> Self {
        Self::with_rule(self.half_width, self.len(), rule).expect("existing grid is valid")
    }

    pub fn rule(&self) -> QuadratureRule {
        self.rule
    }

    /// Grid on `[-half_width, half_width]` whose spacing is as close to `step`
    /// as an odd point count allows.
    pub fn with_step(half_width: T, step: T) -> Result<Self> {
        Self::new(half_width, odd_point_count(half_width, step)?)
    }

    pub fn half_width(&self) -> T {
        self.half_width
    }

    /// Grid spacing Δk.
    pub fn step(&self) -> T {
        self.step
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[T] {
        &self.points
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Index of the grid point `k = 0`.
    pub fn zero_index(&self) -> usize {
        self.points.len() / 2
    }

    /// Wavevector sums `E_m = k_i + k_j` with `m = i + j`; `2n - 1` values
    /// with the same spacing, covering `[-2 half_width, 2 half_width]`.
    pub fn sum_points(&self) -> Vec<T> {
        let n = self.len();
        (0..2 * n - 1)
            .map(|m| {
                if m < n {
                    self.points[0] + self.points[m]
                } else {
                    self.points[m - n + 1] + self.points[n - 1]
                }
            })
            .collect()
    }

    pub fn ensure_same(&self, other: &Self) -> Result<()> {
        if self.len() == other.len() && self.half_width == other.half_width && self.rule == other.rule {
            Ok(())
        } else {
            Err(ScatterError::GridMismatch)
        }
    }

    pub(crate) fn check_len(&self, found: usize) -> Result<()> {
        if found == self.len() {
            Ok(())
        } else {
            Err(ScatterError::LengthMismatch {
                expected: self.len(),
                found,
            })
        }
    }
}

fn odd_point_count<T: Scalar>(half_width: T, step: T) -> Result<usize> {
    if !(step > T::zero()) || !step.is_finite() {
        return Err(ScatterError::InvalidGrid(format!(
            "step must be positive and finite, got {step}"
        )));
    }
    let intervals = (half_width * T::of(2.0) / step)
        .round()
        .to_usize()
        .ok_or_else(|| ScatterError::InvalidGrid("step too small for half width".into()))?;
    let intervals = intervals.max(2);
    Ok(if intervals % 2 == 0 {
        intervals + 1
    } else {
        intervals + 2
    })
}

/// Composite quadrature `Σ w_i f_i` of complex samples.
pub fn integrate<T: Scalar>(samples: &[Complex<T>], grid: &WavevectorGrid<T>) -> Result<Complex<T>> {
    grid.check_len(samples.len())?;
    Ok(samples
        .iter()
        .zip(grid.weights())
        .fold(Complex::new(T::zero(), T::zero()), |acc, (f, &w)| acc + f * w))
}

/// Composite quadrature of real samples.
pub fn integrate_real<T: Scalar>(samples: &[T], grid: &WavevectorGrid<T>) -> Result<T> {
    grid.check_len(samples.len())?;
    Ok(samples
        .iter()
        .zip(grid.weights())
        .fold(T::zero(), |acc, (&f, &w)| acc + f * w))
}

/// Position representation `ξ(z) = (2π)^{-1/2} ∫dk ξ(k) e^{ikz}` at arbitrary
/// positions, by direct quadrature.
pub fn to_space<T: Scalar>(values: &[Complex<T>], grid: &WavevectorGrid<T>, z_points: &[T]) -> Result<Vec<Complex<T>>> {
    grid.check_len(values.len())?;
    let prefactor = (T::PI() * T::of(2.0)).sqrt().recip();
    let weighted: Vec<Complex<T>> = values.iter().zip(grid.weights()).map(|(v, &w)| v * w).collect();
    let k0 = grid.points()[0];
    let step = grid.step();
    Ok(z_points
        .iter()
        .map(|&z| {
            // e^{ik_i z} = e^{ik_0 z} (e^{iΔk z})^i
            let mut phase = Complex::from_polar(T::one(), k0 * z);
            let advance = Complex::from_polar(T::one(), step * z);
            let mut acc = Complex::new(T::zero(), T::zero());
            for v in &weighted {
                acc = acc + v * phase;
                phase = phase * advance;
            }
            acc * prefactor
        })
        .collect())
}

/// Fast position representation on the reciprocal lattice
/// `z_j = 2π j / (m Δk)`, `j = -m/2 .. m/2`, via an `m`-point transform.
///
/// Returns positions in increasing order alongside the amplitudes.
pub fn to_space_lattice<T: Scalar>(
    values: &[Complex<T>],
    grid: &WavevectorGrid<T>,
    m: usize,
) -> Result<(Vec<T>, Vec<Complex<T>>)> {
    grid.check_len(values.len())?;
    if m < values.len() {
        return Err(ScatterError::InvalidParameter(format!(
            "transform length {m} shorter than grid ({})",
            values.len()
        )));
    }
    let mut buf: Vec<Complex<T>> = values
        .iter()
        .zip(grid.weights())
        .map(|(v, &w)| v * w)
        .chain(std::iter::repeat(Complex::new(T::zero(), T::zero())))
        .take(m)
        .collect();
    FftPlanner::new().plan_fft_inverse(m).process(&mut buf);

    let dz = T::PI() * T::of(2.0) / (T::of_usize(m) * grid.step());
    let prefactor = (T::PI() * T::of(2.0)).sqrt().recip();
    let k0 = grid.points()[0];
    let half = m / 2;
    let mut z = Vec::with_capacity(m);
    let mut out = Vec::with_capacity(m);
    // Indices above m/2 alias to negative positions.
    for j in (half..m).chain(0..half) {
        let zj = if j >= half {
            T::of_usize(j) * dz - T::of_usize(m) * dz
        } else {
            T::of_usize(j) * dz
        };
        z.push(zj);
        out.push(buf[j] * Complex::from_polar(T::one(), k0 * zj) * prefactor);
    }
    Ok((z, out))
}

/// Full linear convolution `(a * b)_m = Σ_i a_i b_{m-i}` of length
/// `a.len() + b.len() - 1`, via a zero-padded power-of-two transform.
pub fn linear_convolution<T: Scalar>(a: &[Complex<T>], b: &[Complex<T>]) -> Vec<Complex<T>> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let out_len = a.len() + b.len() - 1;
    let size = out_len.next_power_of_two();
    let zero = Complex::new(T::zero(), T::zero());
    let mut fa: Vec<Complex<T>> = a.iter().copied().chain(std::iter::repeat(zero)).take(size).collect();
    let mut fb: Vec<Complex<T>> = b.iter().copied().chain(std::iter::repeat(zero)).take(size).collect();

    let mut planner = FftPlanner::new();
    let forward = planner.plan_fft_forward(size);
    forward.process(&mut fa);
    forward.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x = *x * y;
    }
    planner.plan_fft_inverse(size).process(&mut fa);

    let scale = T::of_usize(size).recip();
    fa.truncate(out_len);
    for x in &mut fa {
        *x = *x * scale;
    }
    fa
}

/// `C(E) = ∫dk f(k) g(E - k)` on the sum grid `E_m = k_i + k_j` (see
/// [`WavevectorGrid::sum_points`]), with the grid weights on `f` and `g`
/// taken as zero outside the grid.
pub fn convolve_on_sum<T: Scalar>(
    f: &[Complex<T>],
    g: &[Complex<T>],
    grid: &WavevectorGrid<T>,
) -> Result<Vec<Complex<T>>> {
    grid.check_len(f.len())?;
    grid.check_len(g.len())?;
    let weighted: Vec<Complex<T>> = f.iter().zip(grid.weights()).map(|(v, &w)| v * w).collect();
    Ok(linear_convolution(&weighted, g))
}

/// Removes the leading `1/half_width` truncation error of a grid quantity.
///
/// Evaluates `eval` on `[-K, K]` and on `[-2K, 2K]` at the same spacing and
/// returns `2 v(2K) - v(K)`. Appropriate when integrands decay algebraically
/// (Lorentzian spectra), where the truncated tail mass scales as `1/K`.
pub fn extrapolate_half_width<T, F>(half_width: T, step: T, eval: F) -> Result<T>
where
    T: Scalar,
    F: FnMut(&WavevectorGrid<T>) -> Result<T>,
{
    extrapolate_half_width_with(QuadratureRule::Simpson, half_width, step, eval)
}

/// [`extrapolate_half_width`] on grids carrying `rule`.
pub fn extrapolate_half_width_with<T, F>(rule: QuadratureRule, half_width: T, step: T, mut eval: F) -> Result<T>
where
    T: Scalar,
    F: FnMut(&WavevectorGrid<T>) -> Result<T>,
{
    let n = odd_point_count(half_width, step)?;
    let coarse = WavevectorGrid::with_rule(half_width, n, rule)?;
    let fine = WavevectorGrid::with_rule(half_width * T::of(2.0), 2 * n - 1, rule)?;
    let near = eval(&coarse)?;
    let far = eval(&fine)?;
    Ok(far * T::of(2.0) - near)
}

pub(crate) fn weighted_conj_product<T: Scalar>(a: &[Complex<T>], b: &[Complex<T>], weights: &[T]) -> Vec<Complex<T>> {
    a.iter()
        .zip(b)
        .zip(weights)
        .map(|((x, y), &w)| x.conj() * y * w)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn three_point_grid() {
        let g = WavevectorGrid::<f64>::new(1.0, 3).unwrap();
        assert_eq!(g.points(), &[-1.0, 0.0, 1.0]);
        assert_eq!(g.step(), 1.0);
        assert_abs_diff_eq!(g.weights().iter().sum::<f64>(), 2.0, epsilon = 1e-15);
    }

    #[test]
    fn default_grid_centre_is_zero() {
        let g = WavevectorGrid::<f64>::new(40.0, 2049).unwrap();
        assert_eq!(g.points()[1024], 0.0);
        assert_eq!(g.zero_index(), 1024);
        assert_abs_diff_eq!(g.weights().iter().sum::<f64>(), 80.0, epsilon = 1e-11);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(matches!(
            WavevectorGrid::<f64>::new(40.0, 2048),
            Err(ScatterError::InvalidGrid(_))
        ));
        assert!(WavevectorGrid::<f64>::new(0.0, 11).is_err());
        assert!(WavevectorGrid::<f64>::new(-1.0, 11).is_err());
        assert!(WavevectorGrid::<f64>::new(1.0, 1).is_err());
        assert!(WavevectorGrid::<f64>::new(f64::NAN, 11).is_err());
    }

    #[test]
    fn with_step_keeps_odd_count() {
        let g = WavevectorGrid::<f64>::with_step(10.0, 0.1).unwrap();
        assert_eq!(g.len(), 201);
        let g = WavevectorGrid::<f64>::with_step(1.0, 0.3).unwrap();
        assert_eq!(g.len() % 2, 1);
    }

    #[test]
    fn constant_integrates_to_width() {
        let g = WavevectorGrid::<f64>::new(40.0, 2049).unwrap();
        let ones = vec![Complex::new(1.0, 0.0); g.len()];
        let v = integrate(&ones, &g).unwrap();
        assert_abs_diff_eq!(v.re, 80.0, epsilon = 1e-10);
        assert_eq!(v.im, 0.0);
    }

    #[test]
    fn odd_integrand_vanishes() {
        let g = WavevectorGrid::<f64>::new(40.0, 2049).unwrap();
        let f: Vec<f64> = g.points().iter().map(|&k| k * (-k * k).exp()).collect();
        assert!(integrate_real(&f, &g).unwrap().abs() < 1e-12);
    }

    #[test]
    fn simpson_exact_on_cubics() {
        let g = WavevectorGrid::<f64>::new(2.0, 9).unwrap();
        let f: Vec<f64> = g.points().iter().map(|&k| 1.0 + k + 3.0 * k * k - k * k * k).collect();
        // ∫_{-2}^{2} 1 + 3k² dk = 4 + 16
        assert_abs_diff_eq!(integrate_real(&f, &g).unwrap(), 20.0, epsilon = 1e-12);
    }

    #[test]
    fn trapezoid_weights() {
        let g = WavevectorGrid::<f64>::with_rule(2.0, 5, QuadratureRule::Trapezoid).unwrap();
        assert_eq!(g.weights(), &[0.5, 1.0, 1.0, 1.0, 0.5]);
        assert_eq!(g.rule(), QuadratureRule::Trapezoid);
        let s = g.reweighted(QuadratureRule::Simpson);
        assert_eq!(s.points(), g.points());
        assert_eq!(s.ensure_same(&g), Err(ScatterError::GridMismatch));
    }

    #[test]
    fn trapezoid_second_order_across_jump() {
        // ∫ e^k up to a jump placed on an odd node, sampled at its mean there
        let error = |n: usize, rule| {
            let g = WavevectorGrid::<f64>::with_rule(1.0, n, rule).unwrap();
            let edge = (3 * n / 4) | 1;
            let f: Vec<f64> = (0..n)
                .map(|i| match i.cmp(&edge) {
                    std::cmp::Ordering::Less => g.points()[i].exp(),
                    std::cmp::Ordering::Equal => 0.5 * g.points()[i].exp(),
                    std::cmp::Ordering::Greater => 0.0,
                })
                .collect();
            let exact = g.points()[edge].exp() - (-1.0f64).exp();
            (integrate_real(&f, &g).unwrap() - exact).abs()
        };
        for n in [25, 49, 97] {
            let coarse = error(n, QuadratureRule::Trapezoid);
            let fine = error(2 * n - 1, QuadratureRule::Trapezoid);
            assert!((3.5..4.5).contains(&(coarse / fine)), "ratio {}", coarse / fine);
        }
    }

    #[test]
    fn length_mismatch_is_reported() {
        let g = WavevectorGrid::<f64>::new(1.0, 5).unwrap();
        let err = integrate(&[Complex::new(1.0, 0.0); 4], &g).unwrap_err();
        assert_eq!(err, ScatterError::LengthMismatch { expected: 5, found: 4 });
    }

    #[test]
    fn sum_points_cover_doubled_range() {
        let g = WavevectorGrid::<f64>::new(3.0, 7).unwrap();
        let e = g.sum_points();
        assert_eq!(e.len(), 13);
        assert_abs_diff_eq!(e[0], -6.0, epsilon = 1e-15);
        assert_abs_diff_eq!(e[6], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(e[12], 6.0, epsilon = 1e-15);
        for w in e.windows(2) {
            assert_abs_diff_eq!(w[1] - w[0], g.step(), epsilon = 1e-14);
        }
    }

    #[test]
    fn lattice_transform_matches_direct() {
        let g = WavevectorGrid::<f64>::new(10.0, 201).unwrap();
        let xi: Vec<Complex<f64>> = g
            .points()
            .iter()
            .map(|&k| Complex::new((-k * k / 2.0).exp(), 0.3 * k * (-k * k).exp()))
            .collect();
        let (z, fast) = to_space_lattice(&xi, &g, 512).unwrap();
        let direct = to_space(&xi, &g, &z).unwrap();
        for (a, b) in fast.iter().zip(&direct) {
            assert!((a - b).norm() < 1e-12);
        }
        assert!(z.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn extrapolation_removes_inverse_width_error() {
        // v(K) = 1 - 1/K + 1/K³ → 1 with residual O(K⁻³)
        let v = extrapolate_half_width(50.0, 0.5, |g: &WavevectorGrid<f64>| {
            let k = g.half_width();
            Ok(1.0 - 1.0 / k + 1.0 / (k * k * k))
        })
        .unwrap();
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-5);
    }
}
