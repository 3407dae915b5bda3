//! KMS (time-reversed) adjoint channel and modular commutation tests.
//!
//! For a faithful invariant state `ρ` the adjoint `τ̃` of a channel `τ` is
//! pinned by the bilinear relation
//!
//! ```text
//! tr(ρ^{1/2} x ρ^{1/2} τ(y)) = tr(ρ^{1/2} τ̃(x) ρ^{1/2} y)   for all x, y,
//! ```
//!
//! the finite-dimensional transcription of the adjoint relation between
//! `σ_{1/2}` and `σ_{−1/2}` insertions. The closed form
//! `m_k = ρ^{−1/2} l_k† ρ^{1/2}` is derived output and is checked against the
//! relation on construction; [`verify_adjoint_relation`] is the ground-truth
//! oracle.

use ndarray::Array2;
use num_traits::{Float, One, ToPrimitive, Zero};

use crate::channel::{DensityState, KrausChannel, Superoperator};
use crate::error::{Error, Result};
use crate::linalg::{
    adjoint, eigh_herm, fro_norm, matrix_unit_basis, orthonormalize_mats, span_containment_defect,
    trace,
};
use crate::scalar::ChanScalar;
use crate::tol::Tolerances;

/// A channel together with a faithful state and the square roots of the
/// state needed for modular data. Construction needs faithfulness only;
/// [`ModularPair::kms_adjoint`] additionally requires the state to be
/// invariant.
#[derive(Clone, Debug)]
pub struct ModularPair<A: ChanScalar> {
    channel: KrausChannel<A>,
    state: DensityState<A>,
    rho_half: Array2<A>,
    rho_minus_half: Array2<A>,
    condition: f64,
}

impl<A: ChanScalar> ModularPair<A> {
    pub fn new(channel: KrausChannel<A>, state: DensityState<A>, tol: &Tolerances) -> Result<Self> {
        if channel.dim() != state.dim() {
            return Err(Error::DimensionMismatch {
                expected: channel.dim(),
                found: state.dim(),
            });
        }
        let min_eig = state.min_eigenvalue()?;
        if min_eig <= A::real(state.tol()) {
            return Err(Error::StateNotFaithful {
                min_eig: min_eig.to_f64().unwrap_or(f64::NAN),
            });
        }
        let (w, v) = eigh_herm(state.matrix())?;
        let max_eig = w[w.len() - 1];
        let condition = (max_eig / min_eig).to_f64().unwrap_or(f64::INFINITY);
        if condition > tol.max_condition {
            return Err(Error::IllConditioned { cond: condition });
        }
        let n = state.dim();
        let mut rho_half = Array2::zeros((n, n));
        let mut rho_minus_half = Array2::zeros((n, n));
        for k in 0..n {
            let s = Float::sqrt(w[k].max(A::Real::zero()));
            let si = A::Real::one() / s;
            let col = v.column(k);
            for i in 0..n {
                for j in 0..n {
                    let outer = col[i] * col[j].conj();
                    rho_half[(i, j)] += outer * A::from_real(s);
                    rho_minus_half[(i, j)] += outer * A::from_real(si);
                }
            }
        }
        Ok(ModularPair {
            channel,
            state,
            rho_half,
            rho_minus_half,
            condition,
        })
    }

    pub fn channel(&self) -> &KrausChannel<A> {
        &self.channel
    }

    pub fn state(&self) -> &DensityState<A> {
        &self.state
    }

    pub fn rho_half(&self) -> &Array2<A> {
        &self.rho_half
    }

    pub fn rho_minus_half(&self) -> &Array2<A> {
        &self.rho_minus_half
    }

    pub fn condition(&self) -> f64 {
        self.condition
    }

    /// Residuals of `ρ^{1/2}·ρ^{1/2} = ρ` and `ρ^{1/2}·ρ^{−1/2} = 1`.
    pub fn square_root_residuals(&self) -> (f64, f64) {
        let sq = fro_norm(&(&self.rho_half.dot(&self.rho_half) - self.state.matrix()));
        let inv = fro_norm(
            &(&self.rho_half.dot(&self.rho_minus_half)
                - &crate::linalg::eye::<A>(self.state.dim())),
        );
        (
            sq.to_f64().unwrap_or(f64::NAN),
            inv.to_f64().unwrap_or(f64::NAN),
        )
    }

    /// The modular superoperator `Δ: x ↦ ρ x ρ^{−1}`.
    pub fn modular_superoperator(&self) -> Superoperator<A> {
        let rho_inv = self.rho_minus_half.dot(&self.rho_minus_half);
        Superoperator::sandwich(self.state.matrix(), &rho_inv)
    }

    /// KMS adjoint channel with Kraus operators `m_k = ρ^{−1/2} l_k† ρ^{1/2}`;
    /// the defining relation is re-checked on the constructed channel.
    /// Requires the state to be invariant.
    pub fn kms_adjoint(&self) -> Result<KrausChannel<A>> {
        let slack = crate::scalar::validation_tol::<A>();
        let inv_res = self.state.invariance_residual(&self.channel)?;
        if inv_res > A::real(f64::max(1e-9, slack)) {
            return Err(Error::StateNotInvariant {
                residual: inv_res.to_f64().unwrap_or(f64::NAN),
            });
        }
        let kraus = self
            .channel
            .kraus()
            .iter()
            .map(|l| self.rho_minus_half.dot(&adjoint(l)).dot(&self.rho_half))
            .collect::<Vec<_>>();
        let unitality = self
            .channel
            .unitality_tol()
            .max(1e-9)
            .max(slack * self.condition.sqrt());
        let adjoint_channel = KrausChannel::new(kraus, unitality)?;
        let residual = verify_adjoint_relation(self, &adjoint_channel)?;
        if residual > f64::max(1e-6, slack * 10.0) {
            return Err(Error::Eigensolver(format!(
                "KMS adjoint failed its defining relation: residual {residual:.3e}"
            )));
        }
        Ok(adjoint_channel)
    }
}

/// Max residual of the defining bilinear relation over a full matrix basis.
/// This is the ground-truth oracle for [`ModularPair::kms_adjoint`].
pub fn verify_adjoint_relation<A: ChanScalar>(
    pair: &ModularPair<A>,
    adjoint_channel: &KrausChannel<A>,
) -> Result<f64> {
    let n = pair.channel.dim();
    if adjoint_channel.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: adjoint_channel.dim(),
        });
    }
    let basis = matrix_unit_basis::<A>(n);
    let rh = &pair.rho_half;
    let mut worst = A::Real::zero();
    for x in &basis {
        let left_factor = rh.dot(x).dot(rh);
        let right_factor = rh.dot(&adjoint_channel.apply(x)?).dot(rh);
        for y in &basis {
            let lhs = trace(&left_factor.dot(&pair.channel.apply(y)?));
            let rhs = trace(&right_factor.dot(y));
            worst = worst.max((lhs - rhs).abs());
        }
    }
    Ok(worst.to_f64().unwrap_or(f64::NAN))
}

/// Defect `‖(Δ T − T Δ) x‖` for a single element.
pub fn modular_commutation_element<A: ChanScalar>(
    pair: &ModularPair<A>,
    x: &Array2<A>,
) -> Result<f64> {
    let t = pair.channel.superoperator();
    let delta = pair.modular_superoperator();
    let d = fro_norm(&(&delta.apply(&t.apply(x)) - &t.apply(&delta.apply(x))));
    Ok(d.to_f64().unwrap_or(f64::NAN))
}

/// Max of [`modular_commutation_element`] over a basis of a subspace.
pub fn modular_commutation_span<A: ChanScalar>(
    pair: &ModularPair<A>,
    basis: &[Array2<A>],
) -> Result<f64> {
    let mut worst = 0.0f64;
    for b in basis {
        worst = worst.max(modular_commutation_element(pair, b)?);
    }
    Ok(worst)
}

/// Symmetric Hilbert–Schmidt distance between the spans of two Kraus sets.
pub fn kraus_span_distance<A: ChanScalar>(a: &KrausChannel<A>, b: &KrausChannel<A>) -> f64 {
    let sa = orthonormalize_mats(a.kraus(), 1e-12);
    let sb = orthonormalize_mats(b.kraus(), 1e-12);
    let d1 = span_containment_defect(&sa, &sb);
    let d2 = span_containment_defect(&sb, &sa);
    d1.max(d2).to_f64().unwrap_or(f64::NAN)
}

/// Greedy matching distance between the spectrum of `b` and the conjugated
/// spectrum of `a`; small when the eigenvalue multisets are conjugate.
pub fn spectrum_conjugation_defect<A: ChanScalar>(
    a: &KrausChannel<A>,
    b: &KrausChannel<A>,
) -> Result<f64> {
    let (wa, _) = crate::linalg::eig_general(a.superoperator().matrix())?;
    let (wb, _) = crate::linalg::eig_general(b.superoperator().matrix())?;
    let target: Vec<A> = wa.iter().map(|l| l.conj()).collect();
    let mut used = vec![false; target.len()];
    let mut worst = A::Real::zero();
    for l in wb.iter() {
        let mut best = A::Real::infinity();
        let mut best_k = usize::MAX;
        for (k, t) in target.iter().enumerate() {
            if used[k] {
                continue;
            }
            let d = (*l - *t).abs();
            if d < best {
                best = d;
                best_k = k;
            }
        }
        if best_k == usize::MAX {
            return Err(Error::Eigensolver("spectrum size mismatch".into()));
        }
        used[best_k] = true;
        worst = worst.max(best);
    }
    Ok(worst.to_f64().unwrap_or(f64::NAN))
}
