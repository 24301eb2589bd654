//! Scattering of one and two photons on a two-level emitter side-coupled to
//! a one-dimensional waveguide.
//!
//! Everything is generic over the floating-point type; the aliases below fix
//! it to `f64`. Units: `v_g = 1` and, by default, `Γ̃ = 1`, so wavevectors,
//! spectral widths and detunings are all in units of the emitter linewidth.
//!
//! ```
//! use wgscatter::{product_input, scatter_two, outcome_probabilities, Emitter, Grid, Pulse};
//!
//! let grid = Grid::new(40.0, 801).unwrap();
//! let xi = Pulse::gaussian(1.0, &grid).unwrap().normalized().unwrap();
//! let beta = product_input(&xi, &xi).unwrap();
//! let scattered = scatter_two(&beta, &Emitter::default(), true).unwrap();
//! let p = outcome_probabilities(&scattered);
//! assert!((p.total() - 1.0).abs() < 1e-5);
//! ```

pub mod emitter;
pub mod error;
pub mod numerics;
pub mod oracle;
pub mod pulses;
pub mod scalar;
pub mod single_photon;
pub mod two_photon;
pub mod validation;

pub use emitter::EmitterParams;
pub use error::{Result, ScatterError};
pub use numerics::{QuadratureRule, WavevectorGrid};
pub use pulses::{PulseShape, SpectralAmplitude};
pub use scalar::Scalar;
pub use single_photon::{fidelities_one, scatter_one, FidelityReport, ScatteredOnePhoton, ShiftSearch};
pub use two_photon::{
    factored_outcome, fidelities_two, outcome_probabilities, photon_density, product_input, scatter_two, ModePair,
    OutcomeProbabilities, ScatteredTwoPhotonState, TwoPhotonAmplitude,
};

pub type Grid = WavevectorGrid<f64>;
pub type Emitter = EmitterParams<f64>;
pub type Pulse = SpectralAmplitude<f64>;
pub type TwoPhoton = TwoPhotonAmplitude<f64>;
pub type ScatteredPair = ScatteredTwoPhotonState<f64>;
pub type ScatteredSingle = ScatteredOnePhoton<f64>;
