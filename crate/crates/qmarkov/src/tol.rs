//! Numerical tolerances.
//!
//! Every threshold used by a decision procedure lives here, with the default
//! values the test suites pin. All fields are overridable from a JSON config
//! file through the CLI (`--tol-config`).

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Hermiticity / trace / positivity slack for density matrices.
    pub density: f64,
    /// Unitality defect allowed for a Kraus channel.
    pub unitality: f64,
    /// Distance from the unit circle below which an eigenvalue counts as
    /// peripheral.
    pub peripheral: f64,
    /// Relative eigenpair residual accepted from the eigensolver.
    pub eig_residual: f64,
    /// Closure and containment slack for subalgebra spans.
    pub algebra: f64,
    /// Singular value above `1 − subspace` counts as a shared direction when
    /// intersecting subspaces.
    pub subspace: f64,
    /// Relative rank cutoff for support projections.
    pub rank: f64,
    /// Residual at which an invariance check passes.
    pub invariance: f64,
    /// Decision threshold for decay series ("→ 0" operationalized).
    pub decay: f64,
    /// Iteration horizon for decay series.
    pub horizon: usize,
    /// Condition number of the invariant state above which modular data is
    /// rejected.
    pub max_condition: f64,
    /// Total-dimension cap for dilation spaces and chain windows.
    pub budget: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            density: 1e-10,
            unitality: 1e-9,
            peripheral: 1e-8,
            eig_residual: 1e-9,
            algebra: 1e-9,
            subspace: 1e-9,
            rank: 1e-9,
            invariance: 1e-9,
            decay: 1e-7,
            horizon: 200,
            max_condition: 1e12,
            budget: 4096,
        }
    }
}
