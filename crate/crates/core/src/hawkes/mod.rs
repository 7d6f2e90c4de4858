//! Exact evaluation of multivariate Hawkes intensities, compensators,
//! kernel norms and log-likelihoods.
//!
//! Times are in hours since the window start. Intensities use the left-limit
//! convention: `lambda_i(t)` sums over events strictly before `t`.

mod compensator;
mod intensity;
mod likelihood;
mod model;
mod norms;

pub use compensator::{compensator, compensator_at_own_events, compensator_quadrature, compensators_at_horizon};
pub use intensity::{intensity_naive, intensity_recursive, RecursiveIntensities};
pub use likelihood::{log_likelihood, log_likelihood_gradient, LikelihoodGradient, INTENSITY_FLOOR};
pub use model::{Event, EventSequence, HawkesModel, KernelSpec, Matrix};
pub use norms::{kernel_norms, spectral_radius, stationary_rates, KernelNorms};

pub(crate) use intensity::ExcitationWalk;
