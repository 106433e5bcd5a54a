//! Simulator and analysis toolkit for the resonance-fluorescence spectrum of
//! a classically driven two-level atom coupled to a damped cavity.
//!
//! The coupled atom-cavity ladder makes dipole transitions only between
//! adjacent manifolds when the cavity is lossless; cavity damping spoils the
//! destructive interference behind that selection rule and new spectral
//! lines appear at multiples `sqrt(n) g'` of the modified coupling
//! `g' = g [1 - (2 Omega kappa / g^2)^2]^(3/4)`. The crate builds the model
//! ([`model`]), the Lindblad generator and its steady state
//! ([`liouvillian`]), the fluorescence spectrum by two independent routes
//! ([`spectrum`]), and peak detection plus parameter sweeps ([`analysis`]),
//! all on a dense truncated Fock space ([`hilbert`]). The `jcspec` binary
//! exposes the pipeline with deterministic CSV output ([`config`],
//! [`pipeline`]).
//!
//! Units: hbar = 1, frequencies and rates in units of the coupling g, and
//! `kappa` is always the cavity *field* decay rate (half the conventional
//! "cavity damping rate 2 kappa").

use blas_src as _;
use openblas_src as _;

pub mod analysis;
pub mod config;
pub mod error;
pub mod hilbert;
pub(crate) mod linalg;
pub mod liouvillian;
pub mod model;
pub mod pipeline;
pub mod spectrum;

pub use analysis::{
    classify_peaks, enhancement_sweep, find_peaks, Peak, PeakLabel, PeakSet, SweepOptions,
    SweepRatios, SweepVariable,
};
pub use config::{FrameChoice, MethodChoice, RunConfig};
pub use error::{Error, Result};
pub use hilbert::{
    annihilation, atomic_operators, creation, displacement, identity, number, AtomState,
    HilbertSpec, Ket, Operator,
};
pub use liouvillian::{
    apply_generator, build_liouvillian, propagate, steady_state, steady_state_auto, DensityMatrix,
    Frame, PropagationMethod, Superoperator,
};
pub use model::{
    channel_amplitudes, dressed_state_analytic, eigen, forbidden_strength, g_prime, hamiltonian,
    kappa_from_two_kappa_over_g, quasi_energy, transition_element, Branch, ChannelDecomposition,
    DressedState, Drive, EigenMode, ModelParams,
};
pub use spectrum::{
    delta_grid, max_relative_deviation, spectrum_fft, spectrum_resolvent, two_time_correlation,
    CorrelationSeries, Spectrum,
};
