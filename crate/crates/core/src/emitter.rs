//! Scattering elements of a two-level emitter side-coupled to a waveguide.
//!
//! Units: group velocity `v_g = 1`; wavevectors, detuning and linewidths are
//! all measured in the same inverse-length unit, normally `Γ̃ = Γ/v_g`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Result, ScatterError};
use crate::scalar::{cplx, imag_unit, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmitterParams<T> {
    gamma_tilde: T,
    delta: T,
}

impl<T: Scalar> Default for EmitterParams<T> {
    fn default() -> Self {
        Self {
            gamma_tilde: T::one(),
            delta: T::zero(),
        }
    }
}

impl<T: Scalar> EmitterParams<T> {
    /// `gamma_tilde = Γ/v_g`, `delta = ω₀ - k_p v_g` expressed as a wavevector.
    pub fn new(gamma_tilde: T, delta: T) -> Result<Self> {
        if !(gamma_tilde > T::zero()) || !gamma_tilde.is_finite() {
            return Err(ScatterError::InvalidParameter(format!(
                "decay rate must be positive and finite, got {gamma_tilde}"
            )));
        }
        if !delta.is_finite() {
            return Err(ScatterError::InvalidParameter(format!(
                "detuning must be finite, got {delta}"
            )));
        }
        Ok(Self { gamma_tilde, delta })
    }

    /// Resonant emitter with linewidth `gamma_tilde`.
    pub fn resonant(gamma_tilde: T) -> Result<Self> {
        Self::new(gamma_tilde, T::zero())
    }

    /// Detuning given in units of half the linewidth, `Γ/(2v_g)`.
    pub fn with_half_linewidth_detuning(gamma_tilde: T, half_widths: T) -> Result<Self> {
        Self::new(gamma_tilde, half_widths * gamma_tilde / T::of(2.0))
    }

    pub fn gamma_tilde(&self) -> T {
        self.gamma_tilde
    }

    pub fn delta(&self) -> T {
        self.delta
    }

    /// Always one in internal units.
    pub fn group_velocity(&self) -> T {
        T::one()
    }

    /// Decay rate `Γ = Γ̃ v_g`.
    pub fn decay_rate(&self) -> T {
        self.gamma_tilde * self.group_velocity()
    }

    /// Waveguide coupling `g` with `Γ = 4πg²/v_g`.
    pub fn coupling(&self) -> T {
        (self.decay_rate() * self.group_velocity() / (T::PI() * T::of(4.0))).sqrt()
    }

    fn denominator(&self, k: T) -> Complex<T> {
        cplx(k - self.delta, self.gamma_tilde / T::of(2.0))
    }

    /// Single-photon transmission `t̄_k = (k-Δ)/(k-Δ+iΓ̃/2)`.
    pub fn transmission(&self, k: T) -> Complex<T> {
        cplx(k - self.delta, T::zero()) / self.denominator(k)
    }

    /// Single-photon reflection `r̄_k = -iΓ̃/2 / (k-Δ+iΓ̃/2)`; equals `t̄_k - 1`.
    pub fn reflection(&self, k: T) -> Complex<T> {
        cplx(T::zero(), -self.gamma_tilde / T::of(2.0)) / self.denominator(k)
    }

    /// Resonance factor `s_k = √Γ̃ / (k-Δ+iΓ̃/2)`.
    pub fn s_factor(&self, k: T) -> Complex<T> {
        cplx(self.gamma_tilde.sqrt(), T::zero()) / self.denominator(k)
    }

    /// Two-photon bound-state element `B = i(√Γ/π) s_p s_p' (s_k + s_k')`,
    /// for outgoing `p, p'` and incoming `k, k'`.
    pub fn b_element(&self, p: T, p2: T, k: T, k2: T) -> Complex<T> {
        self.bound_state_prefactor() * self.s_factor(p) * self.s_factor(p2) * (self.s_factor(k) + self.s_factor(k2))
    }

    /// `i√Γ/π`.
    pub fn bound_state_prefactor(&self) -> Complex<T> {
        imag_unit::<T>() * (self.decay_rate().sqrt() / T::PI())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn resonant() -> EmitterParams<f64> {
        EmitterParams::default()
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert!(EmitterParams::new(0.0, 0.0).is_err());
        assert!(EmitterParams::new(-1.0, 0.0).is_err());
        assert!(EmitterParams::new(1.0, f64::INFINITY).is_err());
    }

    #[test]
    fn coupling_matches_decay_rate() {
        let p = EmitterParams::new(2.5, 0.0).unwrap();
        let g = p.coupling();
        assert_abs_diff_eq!(4.0 * PI * g * g, 2.5, epsilon = 1e-14);
    }

    #[test]
    fn perfect_reflection_on_resonance() {
        let p = EmitterParams::new(1.0, 0.3).unwrap();
        assert_eq!(p.transmission(0.3).norm(), 0.0);
        // unit modulus, phase π
        let r = p.reflection(0.3);
        assert_abs_diff_eq!(r.re, -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.im, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn half_linewidth_transmission() {
        let t = resonant().transmission(0.5);
        assert_abs_diff_eq!(t.re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(t.im, -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(t.norm_sqr(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn far_detuned_limits() {
        let p = resonant();
        assert!((p.transmission(1e8) - Complex::new(1.0, 0.0)).norm() < 1e-7);
        assert!((p.transmission(-1e8) - Complex::new(1.0, 0.0)).norm() < 1e-7);
        assert!(p.reflection(1e8).norm() < 1e-7);
        assert!(p.s_factor(1e8).norm() < 1e-7);
    }

    #[test]
    fn reflection_phase_winds_by_pi() {
        let p = resonant();
        // phase taken in [0, 2π): π/2 far below resonance, π on it, 3π/2 far above
        let phase = |k: f64| p.reflection(k).arg().rem_euclid(2.0 * PI);
        assert_abs_diff_eq!(phase(-1e6), PI / 2.0, epsilon = 1e-5);
        assert_abs_diff_eq!(phase(0.0), PI, epsilon = 1e-12);
        assert_abs_diff_eq!(phase(1e6), 1.5 * PI, epsilon = 1e-5);
        let mut last = phase(-1e3);
        for i in -999..=1000 {
            let now = phase(i as f64);
            assert!(now >= last);
            last = now;
        }
    }

    #[test]
    fn s_factor_on_resonance() {
        let s = resonant().s_factor(0.0);
        assert_abs_diff_eq!(s.re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.im, -2.0, epsilon = 1e-15);
    }

    #[test]
    fn b_element_at_origin() {
        // i/π · (-2i)(-2i)(-4i) = -16/π, purely real
        let b = resonant().b_element(0.0, 0.0, 0.0, 0.0);
        let expected =
            Complex::new(0.0, 1.0 / PI) * Complex::new(0.0, -2.0) * Complex::new(0.0, -2.0) * Complex::new(0.0, -4.0);
        assert_abs_diff_eq!(b.re, expected.re, epsilon = 1e-13);
        assert_abs_diff_eq!(b.im, expected.im, epsilon = 1e-13);
        assert_abs_diff_eq!(b.re, -16.0 / PI, epsilon = 1e-13);
        assert_abs_diff_eq!(b.im, 0.0, epsilon = 1e-13);
    }

    #[test]
    fn b_element_vanishes_far_away() {
        let p = resonant();
        assert!(p.b_element(1e6, 0.0, 0.0, 0.0).norm() < 1e-5);
        assert!(p.b_element(0.0, 0.0, 1e6, 1e6).norm() < 1e-5);
    }

    #[test]
    fn detuning_in_half_linewidths() {
        let p = EmitterParams::with_half_linewidth_detuning(2.0, 1.0).unwrap();
        assert_eq!(p.delta(), 1.0);
    }

    #[test]
    fn works_in_single_precision() {
        let p = EmitterParams::<f32>::default();
        let (t, r) = (p.transmission(0.7), p.reflection(0.7));
        assert!((t.norm_sqr() + r.norm_sqr() - 1.0).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn unitarity_and_identities(k in -100.0f64..100.0, gamma in 0.01f64..10.0, delta in -5.0f64..5.0) {
            let p = EmitterParams::new(gamma, delta).unwrap();
            let (t, r, s) = (p.transmission(k), p.reflection(k), p.s_factor(k));
            prop_assert!((t.norm_sqr() + r.norm_sqr() - 1.0).abs() < 1e-12);
            prop_assert!((t - (r + 1.0)).norm() < 1e-12);
            let via_s = Complex::new(0.0, -gamma.sqrt() / 2.0) * s;
            prop_assert!((r - via_s).norm() < 1e-12);
            let lorentz = gamma / ((k - delta).powi(2) + gamma * gamma / 4.0);
            prop_assert!((s.norm_sqr() - lorentz).abs() < 1e-10 * lorentz.max(1.0));
        }

        #[test]
        fn b_element_exchange_symmetry(
            a in -10.0f64..10.0, b in -10.0f64..10.0, c in -10.0f64..10.0, d in -10.0f64..10.0,
            delta in -2.0f64..2.0,
        ) {
            let p = EmitterParams::new(1.0, delta).unwrap();
            let base = p.b_element(a, b, c, d);
            prop_assert!((base - p.b_element(b, a, c, d)).norm() <= 1e-12 * base.norm().max(1.0));
            prop_assert!((base - p.b_element(a, b, d, c)).norm() <= 1e-12 * base.norm().max(1.0));
        }
    }
}
