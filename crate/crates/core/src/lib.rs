//! Numerical spectral theory for one-frequency quasiperiodic Schrödinger
//! operators
//!
//! ```text
//! (H u)_n = u_{n+1} + u_{n-1} + V(x + n α) u_n,   V(x) = 2λ cos 2πx + ε v(x)
//! ```
//!
//! The crate is organised by the quantity being computed:
//!
//! * [`arithmetic`]: continued fractions of the frequency, Diophantine tests,
//!   the resonance sets `Θ^τ_γ` and the exponent `β(α)`.
//! * [`cocycle`]: potentials, Schrödinger matrices and renormalized transfer
//!   matrix products at real or complexified phase.
//! * [`lyapunov`]: (complexified) Lyapunov exponents, acceleration and the
//!   sub/critical/supercritical classification.
//! * [`rotation`]: fibered rotation number and `N = 1 - 2ρ`.
//! * [`spectrum`]: truncated eigenvalues, the integrated density of states,
//!   spectrum approximations and homogeneity profiles.
//! * [`green`]: the phase-averaged Green's function, Thouless formula,
//!   boundary values and the non-tangential maximal function.
//!
//! Every routine is a pure function of its inputs. Phase averages are
//! evaluated in parallel with rayon and reduced by a fixed pairwise tree, so
//! results are bit-identical for any worker count.

// `!(x > 0.0)` style checks are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod arithmetic;
pub mod cocycle;
pub mod error;
pub mod green;
pub mod lyapunov;
pub mod reduce;
pub mod rotation;
pub mod spectrum;

pub use arithmetic::{
    beta_exponent, continued_fraction, sdc_check, theta_membership, BetaEstimate, DiophantineKind, DiophantineReport,
    Frequency, FrequencyLiteral, ThetaMembership,
};
pub use cocycle::{schrodinger_matrix, transfer_product, CocyclePoint, Harmonic, Mat2, PotentialSpec};
pub use error::{Error, Result};
pub use green::{
    derivative_identity_residual, green_avg, green_from_ids, maximal_function, normal_boundary_re_g, thouless,
    BoundaryValue, Cone, GreenMethod, GreenValue, MaximalProfile,
};
pub use lyapunov::{acceleration, classify_regime, lyapunov, LyapunovProfile, RegimeLabel};
pub use rotation::{ids_from_rotation, rotation_number, RotationResult};
pub use spectrum::{
    homogeneity_profile, ids_counting, ids_rotation, spectrum_approx, truncated_eigenvalues, HomogeneityProfile,
    IdsMethod, IdsTable, SpectrumApprox, SpectrumSource,
};

pub use num_complex::Complex64;
