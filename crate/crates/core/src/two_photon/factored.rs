//! Exact one-dimensional evaluation of the two-photon outcome integrals for
//! product inputs, without forming any `n × n` array.
//!
//! Every scattered component is a short sum of terms `l(p) r(p′) S(p+p′)`,
//! with `S ≡ 1` for the single-photon parts and `S = C` for the bound-state
//! term. The weighted inner product of two such terms collapses to one
//! convolution on the sum grid, so results agree with the two-dimensional
//! quadrature to rounding.

use num_complex::Complex;
use serde::Serialize;

use super::product_profile;
use crate::emitter::EmitterParams;
use crate::error::{Result, ScatterError};
use crate::numerics;
use crate::pulses::SpectralAmplitude;
use crate::scalar::{cplx, Scalar};

struct Term<T> {
    left: Vec<Complex<T>>,
    right: Vec<Complex<T>>,
    coupling: Option<Vec<Complex<T>>>,
}

fn sum<T: Scalar>(v: &[Complex<T>]) -> Complex<T> {
    v.iter().fold(cplx(T::zero(), T::zero()), |a, &b| a + b)
}

fn inner<T: Scalar>(x: &Term<T>, y: &Term<T>, w: &[T]) -> Complex<T> {
    let a = numerics::weighted_conj_product(&x.left, &y.left, w);
    let b = numerics::weighted_conj_product(&x.right, &y.right, w);
    if x.coupling.is_none() && y.coupling.is_none() {
        return sum(&a) * sum(&b);
    }
    let one = cplx(T::one(), T::zero());
    let conv = numerics::linear_convolution(&a, &b);
    conv.iter()
        .enumerate()
        .fold(cplx(T::zero(), T::zero()), |acc, (m, &c)| {
            let sx = x.coupling.as_ref().map_or(one, |s| s[m]);
            let sy = y.coupling.as_ref().map_or(one, |s| s[m]);
            acc + sx.conj() * sy * c
        })
}

fn norm_sqr<T: Scalar>(field: &[Term<T>], w: &[T]) -> T {
    let mut total = T::zero();
    for (i, x) in field.iter().enumerate() {
        total = total + inner(x, x, w).re;
        for y in &field[i + 1..] {
            total = total + inner(x, y, w).re * T::of(2.0);
        }
    }
    total
}

fn overlap<T: Scalar>(a: &[Term<T>], b: &[Term<T>], w: &[T]) -> Complex<T> {
    a.iter()
        .flat_map(|x| b.iter().map(move |y| (x, y)))
        .fold(cplx(T::zero(), T::zero()), |acc, (x, y)| acc + inner(x, y, w))
}

fn times<T: Scalar>(a: &[Complex<T>], b: &[Complex<T>], scale: T) -> Vec<Complex<T>> {
    a.iter().zip(b).map(|(x, y)| x * y * scale).collect()
}

/// Outcome probabilities and the phase-sensitive fidelity measures of the
/// scattered product state. `F_int` involves moduli and has no factored
/// form.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FactoredOutcome<T> {
    pub p11: T,
    pub p12: T,
    pub p22: T,
    pub f_full: T,
    pub f_prob: T,
}

/// Same quantities as scattering `product_input(xi, xi2)` on the shared
/// grid, in `O(n log n)` memory and time per term pair.
pub fn factored_outcome<T: Scalar>(
    xi: &SpectralAmplitude<T>,
    xi2: &SpectralAmplitude<T>,
    params: &EmitterParams<T>,
    include_nonlinearity: bool,
) -> Result<FactoredOutcome<T>> {
    xi.grid().ensure_same(xi2.grid())?;
    let grid = xi.grid();
    let w = grid.weights();
    let (f, g) = (xi.values(), xi2.values());
    let norm = T::of(2.0) * (xi.norm_sqr() * xi2.norm_sqr() + xi.inner(xi2)?.norm_sqr());
    if !(norm > T::zero()) {
        return Err(ScatterError::InvalidInput("product state has zero norm".into()));
    }
    let scale = norm.sqrt().recip();
    let one = T::one();
    let k = grid.points();
    let t: Vec<Complex<T>> = k.iter().map(|&p| params.transmission(p)).collect();
    let r: Vec<Complex<T>> = k.iter().map(|&p| params.reflection(p)).collect();
    let s: Vec<Complex<T>> = k.iter().map(|&p| params.s_factor(p)).collect();

    let separable = |a: &[Complex<T>], b: &[Complex<T>], c: &[Complex<T>], d: &[Complex<T>]| Term {
        left: times(a, b, scale),
        right: times(c, d, one),
        coupling: None,
    };
    let mut x11 = vec![
        separable(&t, f, &r, g),
        separable(&t, g, &r, f),
        separable(&r, f, &t, g),
        separable(&r, g, &t, f),
    ];
    let mut x12 = vec![
        separable(&t, f, &t, g),
        separable(&t, g, &t, f),
        separable(&r, f, &r, g),
        separable(&r, g, &r, f),
    ];
    if include_nonlinearity {
        let profile = product_profile(f, g, scale, &s, grid);
        let pref = params.bound_state_prefactor() * T::of(0.25);
        let bound = || Term {
            left: s.iter().map(|v| v * pref).collect(),
            right: s.clone(),
            coupling: Some(profile.clone()),
        };
        x11.push(bound());
        x12.push(bound());
    }
    let beta = vec![
        Term {
            left: f.iter().map(|v| v * scale).collect(),
            right: g.to_vec(),
            coupling: None,
        },
        Term {
            left: g.iter().map(|v| v * scale).collect(),
            right: f.to_vec(),
            coupling: None,
        },
    ];

    let p11 = norm_sqr(&x11, w) / T::of(2.0);
    Ok(FactoredOutcome {
        p11,
        p12: norm_sqr(&x12, w),
        p22: p11,
        f_full: overlap(&beta, &x11, w).norm_sqr(),
        f_prob: p11 * T::of(2.0),
    })
}
