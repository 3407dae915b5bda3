//! Invariant states, support projections, corner reductions, fixed-point and
//! multiplicative-domain algebras, and state-preserving conditional
//! expectations.
//!
//! The two distinguished subalgebras are
//!
//! * `G  = ker(τ̃ τ − id)`, the modular-covariant part of the multiplicative
//!   domain (both characterizations are computed and compared), and
//! * `G₀ = ∩_m τ^m(G)`, the largest subalgebra on which `τ` acts as a
//!   *-automorphism with `τ̃` as its inverse.
//!
//! Ergodicity and mixing of the full dynamics are equivalent to those of the
//! dynamics compressed to `G₀`, which is what the reduction checks in the
//! classifier rely on.

use ndarray::Array2;
use ndarray_linalg::SVD;
use num_traits::{Float, One, ToPrimitive, Zero};

use crate::channel::{DensityState, KrausChannel, Superoperator};
use crate::error::{Error, Result};
use crate::kms::ModularPair;
use crate::linalg::{
    adjoint, eigh_herm, eye, fixed_point_projector, fro_norm, hs_dot, intersect_spans_mats,
    min_eig_herm, null_space, orthonormalize_mats, residual_to_span_mats, span_containment_defect,
    trace, unvec_col, vec_col,
};
use crate::scalar::ChanScalar;
use crate::tol::Tolerances;

/// Hermitian idempotent with its rank.
#[derive(Clone, Debug)]
pub struct ProjectionMatrix<A: ChanScalar> {
    dim: usize,
    p: Array2<A>,
    rank: usize,
}

impl<A: ChanScalar> ProjectionMatrix<A> {
    pub fn new(p: Array2<A>, tol: f64) -> Result<Self> {
        let dim = p.nrows();
        let herm = fro_norm(&(&p - &adjoint(&p)));
        let idem = fro_norm(&(&p.dot(&p) - &p));
        if herm > A::real(tol) || idem > A::real(tol) {
            return Err(Error::InvalidInput(format!(
                "not a projection: hermiticity {:?}, idempotency {:?}",
                herm.to_f64(),
                idem.to_f64()
            )));
        }
        let rank = trace(&p).re().to_f64().unwrap_or(0.0).round() as usize;
        Ok(ProjectionMatrix { dim, p, rank })
    }

    pub fn identity(dim: usize) -> Self {
        ProjectionMatrix {
            dim,
            p: eye(dim),
            rank: dim,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &Array2<A> {
        &self.p
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Isometry `W: C^rank → C^dim` whose columns span the range.
    pub fn isometry(&self) -> Result<Array2<A>> {
        let (w, v) = eigh_herm(&self.p)?;
        let mut cols = Vec::new();
        for (k, lam) in w.iter().enumerate() {
            if *lam > A::real(0.5) {
                cols.push(k);
            }
        }
        if cols.len() != self.rank {
            return Err(Error::Eigensolver(format!(
                "projection rank mismatch: trace says {}, spectrum says {}",
                self.rank,
                cols.len()
            )));
        }
        let mut iso = Array2::zeros((self.dim, cols.len()));
        for (j, &k) in cols.iter().enumerate() {
            for i in 0..self.dim {
                iso[(i, j)] = v[(i, k)];
            }
        }
        Ok(iso)
    }
}

/// A *-subalgebra of matrices given by a Hilbert–Schmidt orthonormal basis.
#[derive(Clone, Debug)]
pub struct SubalgebraBasis<A: ChanScalar> {
    dim: usize,
    basis: Vec<Array2<A>>,
    contains_identity: bool,
}

impl<A: ChanScalar> SubalgebraBasis<A> {
    /// Orthonormalizes the spanning set and records whether the identity
    /// lies in the span.
    pub fn from_span(dim: usize, span: &[Array2<A>], tol: f64) -> Self {
        let basis = orthonormalize_mats(span, tol.max(1e-12));
        let id = eye::<A>(dim);
        let contains_identity = if basis.is_empty() {
            false
        } else {
            residual_to_span_mats(&basis, &id) <= A::real(1e-8) * fro_norm(&id)
        };
        SubalgebraBasis {
            dim,
            basis,
            contains_identity,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn basis(&self) -> &[Array2<A>] {
        &self.basis
    }

    pub fn span_dim(&self) -> usize {
        self.basis.len()
    }

    pub fn contains_identity(&self) -> bool {
        self.contains_identity
    }

    /// Worst projection defect of `b†` over basis elements.
    pub fn adjoint_closure_defect(&self) -> f64 {
        let mut worst = A::Real::zero();
        for b in &self.basis {
            worst = worst.max(residual_to_span_mats(&self.basis, &adjoint(b)));
        }
        worst.to_f64().unwrap_or(f64::NAN)
    }

    /// Worst projection defect of `b·c` over ordered basis pairs.
    pub fn product_closure_defect(&self) -> f64 {
        let mut worst = A::Real::zero();
        for b in &self.basis {
            for c in &self.basis {
                worst = worst.max(residual_to_span_mats(&self.basis, &b.dot(c)));
            }
        }
        worst.to_f64().unwrap_or(f64::NAN)
    }

    /// Validates *-closure and product closure within `tol`.
    pub fn validate_closure(&self, tol: f64) -> Result<()> {
        let a = self.adjoint_closure_defect();
        let p = self.product_closure_defect();
        if a > tol || p > tol {
            return Err(Error::InvalidInput(format!(
                "span is not a *-algebra: adjoint defect {a:.3e}, product defect {p:.3e}"
            )));
        }
        Ok(())
    }
}

/// Basis and representatives of the invariant-state space.
pub struct InvariantStates<A: ChanScalar> {
    /// Hermitian orthonormal basis of the fixed space of the predual.
    pub fixed_basis: Vec<Array2<A>>,
    /// Positive unit-trace representatives extracted from the fixed space.
    pub states: Vec<DensityState<A>>,
    /// Spectral projection of the maximally mixed state onto the fixed
    /// space: the maximum-entropy default used downstream. Its support
    /// dominates the support of every invariant state.
    pub cesaro: DensityState<A>,
    /// Whether a faithful invariant state exists.
    pub faithful_exists: bool,
}

/// Basis of the eigenvalue-1 eigenspace of the predual, post-processed into
/// positive unit-trace representatives.
pub fn invariant_states<A: ChanScalar>(
    channel: &KrausChannel<A>,
    tol: &Tolerances,
) -> Result<InvariantStates<A>> {
    let n = channel.dim();
    let s = channel.predual_superoperator();
    let shifted = s.matrix() - &eye::<A>(n * n);
    let kernel = null_space(&shifted, tol.subspace.max(1e-9))?;
    if kernel.is_empty() {
        return Err(Error::Eigensolver("predual has no fixed point".into()));
    }
    // the predual commutes with the adjoint, so the fixed space has a
    // Hermitian basis
    let mut herm_span = Vec::new();
    for v in &kernel {
        let y = unvec_col(v, n);
        let half = A::from_real(A::real(0.5));
        herm_span.push((&y + &adjoint(&y)).mapv(|z| z * half));
        let ih = A::complex(0.0, 0.5);
        herm_span.push((&y - &adjoint(&y)).mapv(|z| z * ih));
    }
    let fixed_basis = orthonormalize_mats(&herm_span, 1e-9);

    let mut states = Vec::new();
    for h in &fixed_basis {
        let (w, v) = eigh_herm(h)?;
        for sign in [1.0f64, -1.0] {
            let mut part: Array2<A> = Array2::zeros((n, n));
            let mut mass = A::Real::zero();
            for (k, lam) in w.iter().enumerate() {
                let val = if sign > 0.0 { *lam } else { -*lam };
                if val > A::real(1e-12) {
                    mass += val;
                    let col = v.column(k);
                    for i in 0..n {
                        for j in 0..n {
                            part[(i, j)] += col[i] * col[j].conj() * A::from_real(val);
                        }
                    }
                }
            }
            if mass > A::real(1e-9) {
                let rho = part.mapv(|z| z / A::from_real(mass));
                if let Ok(st) = DensityState::new(rho, 1e-8) {
                    if st.invariance_residual(channel)? <= A::real(1e-7) {
                        states.push(st);
                    }
                }
            }
        }
    }

    let cesaro = max_entropy_invariant_state(channel)?;
    let faithful_exists = cesaro.faithful();
    Ok(InvariantStates {
        fixed_basis,
        states,
        cesaro,
        faithful_exists,
    })
}

/// Spectral projection of the maximally mixed state onto the fixed space of
/// the predual.
pub fn max_entropy_invariant_state<A: ChanScalar>(
    channel: &KrausChannel<A>,
) -> Result<DensityState<A>> {
    let n = channel.dim();
    let s = channel.predual_superoperator();
    let p1 = fixed_point_projector(
        s.matrix(),
        f64::max(1e-9, crate::scalar::validation_tol::<A>()),
    )?;
    let mixed = eye::<A>(n) * A::from_real(A::real(1.0 / n as f64));
    let fixed = unvec_col(&p1.dot(&vec_col(&mixed)), n);
    let herm = (&fixed + &adjoint(&fixed)).mapv(|z| z * A::from_real(A::real(0.5)));
    let tr = trace(&herm);
    DensityState::new(herm.mapv(|z| z / tr), crate::scalar::validation_tol::<A>())
}

/// Spectral projection of `ρ` onto its strictly positive eigenvalues.
pub fn support_projection<A: ChanScalar>(state: &DensityState<A>) -> Result<ProjectionMatrix<A>> {
    let n = state.dim();
    let (w, v) = eigh_herm(state.matrix())?;
    let max_eig = w[w.len() - 1];
    let cut = A::real(1e-9) * max_eig.max(A::Real::epsilon());
    let mut p: Array2<A> = Array2::zeros((n, n));
    for (k, lam) in w.iter().enumerate() {
        if *lam > cut {
            let col = v.column(k);
            for i in 0..n {
                for j in 0..n {
                    p[(i, j)] += col[i] * col[j].conj();
                }
            }
        }
    }
    let proj = ProjectionMatrix::new(p, 1e-10)?;
    let sandwiched = proj.matrix().dot(state.matrix()).dot(proj.matrix());
    let res = fro_norm(&(&sandwiched - state.matrix()));
    if res > A::real(1e-8) {
        return Err(Error::Eigensolver(format!(
            "support projection does not absorb the state: residual {:?}",
            res.to_f64()
        )));
    }
    Ok(proj)
}

/// A channel compressed to the range of a sub-harmonic projection.
pub struct ReducedChannel<A: ChanScalar> {
    pub channel: KrausChannel<A>,
    /// Isometry from the corner onto the range of the projection.
    pub isometry: Array2<A>,
    /// Max norm of `(1−p) l_k† p`, which vanishes for sub-harmonic `p`.
    pub corner_identity_defect: f64,
}

/// Compression `x ↦ p τ(p x p) p` to the range of a sub-harmonic projection,
/// re-indexed to a rank(p)-dimensional space.
pub fn reduce_channel<A: ChanScalar>(
    channel: &KrausChannel<A>,
    p: &ProjectionMatrix<A>,
    tol: &Tolerances,
) -> Result<ReducedChannel<A>> {
    if p.dim() != channel.dim() {
        return Err(Error::DimensionMismatch {
            expected: channel.dim(),
            found: p.dim(),
        });
    }
    let tau_p = channel.apply(p.matrix())?;
    let min = min_eig_herm(&(&tau_p - p.matrix()))?;
    if min < A::real(-tol.invariance) {
        return Err(Error::NotSubharmonic {
            min_eig: min.to_f64().unwrap_or(f64::NAN),
        });
    }
    let n = channel.dim();
    let one_minus_p = &eye::<A>(n) - p.matrix();
    let mut corner_identity_defect = A::Real::zero();
    for l in channel.kraus() {
        let d = fro_norm(&one_minus_p.dot(&adjoint(l)).dot(p.matrix()));
        corner_identity_defect = corner_identity_defect.max(d);
    }
    let w = p.isometry()?;
    let kraus = channel
        .kraus()
        .iter()
        .map(|l| adjoint(&w).dot(l).dot(&w))
        .collect::<Vec<_>>();
    let reduced = KrausChannel::new(kraus, channel.unitality_tol().max(1e-9))?;
    Ok(ReducedChannel {
        channel: reduced,
        isometry: w,
        corner_identity_defect: corner_identity_defect.to_f64().unwrap_or(f64::NAN),
    })
}

/// Support reduction of a (channel, invariant state) pair to the faithful
/// corner.
pub struct FaithfulCorner<A: ChanScalar> {
    pub channel: KrausChannel<A>,
    pub state: DensityState<A>,
    pub support: ProjectionMatrix<A>,
    pub isometry: Array2<A>,
}

pub fn faithful_corner<A: ChanScalar>(
    channel: &KrausChannel<A>,
    state: &DensityState<A>,
    tol: &Tolerances,
) -> Result<FaithfulCorner<A>> {
    let res = state.invariance_residual(channel)?;
    if res > A::real(tol.invariance) {
        return Err(Error::StateNotInvariant {
            residual: res.to_f64().unwrap_or(f64::NAN),
        });
    }
    let support = support_projection(state)?;
    let reduced = reduce_channel(channel, &support, tol)?;
    let w = reduced.isometry.clone();
    let rho_corner = adjoint(&w).dot(state.matrix()).dot(&w);
    let corner_state = DensityState::new(rho_corner, 1e-8)?;
    Ok(FaithfulCorner {
        channel: reduced.channel,
        state: corner_state,
        support,
        isometry: w,
    })
}

/// Orthonormal basis of `ker(T − id)`, asserted to be a *-algebra (valid
/// because the invariant state is faithful).
pub fn fixed_point_algebra<A: ChanScalar>(
    channel: &KrausChannel<A>,
    state: &DensityState<A>,
    tol: &Tolerances,
) -> Result<SubalgebraBasis<A>> {
    let min_eig = state.min_eigenvalue()?;
    if min_eig <= A::real(state.tol()) {
        return Err(Error::StateNotFaithful {
            min_eig: min_eig.to_f64().unwrap_or(f64::NAN),
        });
    }
    let res = state.invariance_residual(channel)?;
    if res > A::real(tol.invariance) {
        return Err(Error::StateNotInvariant {
            residual: res.to_f64().unwrap_or(f64::NAN),
        });
    }
    let sub = fixed_space_of(&channel.superoperator(), channel.dim(), tol)?;
    sub.validate_closure(tol.algebra.max(1e-8))?;
    Ok(sub)
}

/// Orthonormal basis of the fixed space of an arbitrary superoperator.
pub fn fixed_space_of<A: ChanScalar>(
    sup: &Superoperator<A>,
    dim: usize,
    tol: &Tolerances,
) -> Result<SubalgebraBasis<A>> {
    let shifted = sup.matrix() - &eye::<A>(dim * dim);
    let kernel = null_space(&shifted, tol.subspace.max(1e-9))?;
    let mats: Vec<Array2<A>> = kernel.iter().map(|v| unvec_col(v, dim)).collect();
    Ok(SubalgebraBasis::from_span(dim, &mats, 1e-12))
}

/// The algebra `G = ker(τ̃ τ − id)`, cross-checked against the
/// multiplicative-domain/modular-commutant characterization.
pub fn compute_g<A: ChanScalar>(
    pair: &ModularPair<A>,
    tol: &Tolerances,
) -> Result<SubalgebraBasis<A>> {
    let n = pair.channel().dim();
    let t = pair.channel().superoperator();
    let adjoint_channel = pair.kms_adjoint()?;
    let t_tilde = adjoint_channel.superoperator();
    let composed = t_tilde.compose(&t);
    let g = fixed_space_of(&composed, n, tol)?;

    let md = multiplicative_domain_with_modular(pair, tol)?;
    let d1 = span_containment_defect(g.basis(), &md);
    let d2 = span_containment_defect(&md, g.basis());
    let thresh = A::real(1e-6);
    if g.span_dim() != md.len() || d1 > thresh || d2 > thresh {
        return Err(Error::Eigensolver(format!(
            "the two characterizations of G disagree: kernel dim {}, domain dim {}, defects {:?} {:?}",
            g.span_dim(),
            md.len(),
            d1.to_f64(),
            d2.to_f64()
        )));
    }
    g.validate_closure(tol.algebra.max(1e-7))?;
    Ok(g)
}

/// Joint kernel of the bimodule conditions `τ(x e_i) = τ(x) τ(e_i)`,
/// `τ(e_i x) = τ(e_i) τ(x)` and of the modular commutator: the
/// multiplicative domain intersected with the modular-covariant part.
fn multiplicative_domain_with_modular<A: ChanScalar>(
    pair: &ModularPair<A>,
    _tol: &Tolerances,
) -> Result<Vec<Array2<A>>> {
    let n = pair.channel().dim();
    let t = pair.channel().superoperator();
    let delta = pair.modular_superoperator();
    let mut blocks: Vec<Array2<A>> = Vec::new();

    let basis = crate::linalg::matrix_unit_basis::<A>(n);
    for e in &basis {
        let te = pair.channel().apply(e)?;
        // x ↦ τ(x e) − τ(x) τ(e)
        let right_mult = Superoperator::sandwich(&eye::<A>(n), e);
        let right_mult_te = Superoperator::sandwich(&eye::<A>(n), &te);
        let l_op = t.compose(&right_mult).sub(&right_mult_te.compose(&t));
        blocks.push(l_op.matrix().clone());
        // x ↦ τ(e x) − τ(e) τ(x)
        let left_mult = Superoperator::sandwich(e, &eye::<A>(n));
        let left_mult_te = Superoperator::sandwich(&te, &eye::<A>(n));
        let r_op = t.compose(&left_mult).sub(&left_mult_te.compose(&t));
        blocks.push(r_op.matrix().clone());
    }
    let commutator = delta.compose(&t).sub(&t.compose(&delta));
    blocks.push(commutator.matrix().clone());

    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut stacked = Array2::zeros((rows, n * n));
    let mut offset = 0;
    for b in &blocks {
        for i in 0..b.nrows() {
            for j in 0..n * n {
                stacked[(offset + i, j)] = b[(i, j)];
            }
        }
        offset += b.nrows();
    }
    let kernel = null_space(&stacked, 1e-7)?;
    Ok(kernel.iter().map(|v| unvec_col(v, n)).collect())
}

/// `G₀ = ∩_m τ^m(G)`: iterate `S ↦ τ(S) ∩ G` from `S = G` until the
/// dimension stabilizes, then verify that `τ` restricted to the result is a
/// *-automorphism.
pub fn compute_g0<A: ChanScalar>(
    pair: &ModularPair<A>,
    tol: &Tolerances,
) -> Result<SubalgebraBasis<A>> {
    let g = compute_g(pair, tol)?;
    let n = pair.channel().dim();
    let t = pair.channel().superoperator();
    let mut current: Vec<Array2<A>> = g.basis().to_vec();
    for _ in 0..(n * n + 1) {
        let image: Vec<Array2<A>> = current.iter().map(|b| t.apply(b)).collect();
        let image = orthonormalize_mats(&image, 1e-9);
        let next = intersect_spans_mats(&image, g.basis(), tol.subspace)?;
        if next.len() == current.len() {
            current = next;
            break;
        }
        current = next;
    }
    let g0 = SubalgebraBasis::from_span(n, &current, 1e-12);
    verify_automorphism_on(pair.channel(), &g0, tol)?;
    Ok(g0)
}

/// Checks that `τ` maps the span bijectively onto itself and is
/// multiplicative on it.
fn verify_automorphism_on<A: ChanScalar>(
    channel: &KrausChannel<A>,
    sub: &SubalgebraBasis<A>,
    tol: &Tolerances,
) -> Result<()> {
    let k = sub.span_dim();
    if k == 0 {
        return Err(Error::Eigensolver("G0 collapsed to the zero space".into()));
    }
    // matrix of τ restricted to the span in the orthonormal basis
    let mut restricted = Array2::zeros((k, k));
    for (j, b) in sub.basis().iter().enumerate() {
        let tb = channel.apply(b)?;
        let leak = residual_to_span_mats(sub.basis(), &tb);
        if leak > A::real(1e-7) {
            return Err(Error::Eigensolver(format!(
                "τ leaks out of G0: residual {:?}",
                leak.to_f64()
            )));
        }
        for (i, c) in sub.basis().iter().enumerate() {
            restricted[(i, j)] = hs_dot(c, &tb);
        }
    }
    let (_, s, _) = restricted.svd(false, false)?;
    let min_sv = s.iter().copied().fold(A::Real::infinity(), A::Real::min);
    if min_sv < A::real(1e-7) {
        return Err(Error::Eigensolver(format!(
            "τ is not bijective on G0: smallest singular value {:?}",
            min_sv.to_f64()
        )));
    }
    // multiplicativity on basis pairs
    let mut worst = A::Real::zero();
    for b in sub.basis() {
        for c in sub.basis() {
            let lhs = channel.apply(&b.dot(c))?;
            let rhs = channel.apply(b)?.dot(&channel.apply(c)?);
            worst = worst.max(fro_norm(&(&lhs - &rhs)));
        }
    }
    if worst > A::real(tol.algebra.max(1e-7)) {
        return Err(Error::Eigensolver(format!(
            "τ is not multiplicative on G0: defect {:?}",
            worst.to_f64()
        )));
    }
    Ok(())
}

/// Centralizer of the state: `{x : ρ x = x ρ}`.
pub fn modular_centralizer<A: ChanScalar>(
    state: &DensityState<A>,
    tol: &Tolerances,
) -> Result<Vec<Array2<A>>> {
    let n = state.dim();
    let left = Superoperator::sandwich(state.matrix(), &eye::<A>(n));
    let right = Superoperator::sandwich(&eye::<A>(n), state.matrix());
    let comm = left.sub(&right);
    let kernel = null_space(comm.matrix(), tol.subspace.max(1e-9))?;
    Ok(kernel.iter().map(|v| unvec_col(v, n)).collect())
}

/// The φ₀-preserving conditional expectation onto a modular-invariant
/// subalgebra, as a superoperator: the orthogonal projection in the GNS
/// inner product `⟨x, y⟩ = tr(ρ x† y)`.
pub fn conditional_expectation<A: ChanScalar>(
    sub: &SubalgebraBasis<A>,
    state: &DensityState<A>,
    tol: &Tolerances,
) -> Result<Superoperator<A>> {
    let n = state.dim();
    if sub.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: sub.dim(),
        });
    }
    let min_eig = state.min_eigenvalue()?;
    if min_eig <= A::real(state.tol()) {
        return Err(Error::StateNotFaithful {
            min_eig: min_eig.to_f64().unwrap_or(f64::NAN),
        });
    }
    // Takesaki's condition: the span must be invariant under Δ
    let (w, v) = eigh_herm(state.matrix())?;
    let mut rho_inv: Array2<A> = Array2::zeros((n, n));
    for (k, lam) in w.iter().enumerate() {
        let inv = A::Real::one() / *lam;
        let col = v.column(k);
        for i in 0..n {
            for j in 0..n {
                rho_inv[(i, j)] += col[i] * col[j].conj() * A::from_real(inv);
            }
        }
    }
    let mut defect = A::Real::zero();
    for b in sub.basis() {
        let db = state.matrix().dot(b).dot(&rho_inv);
        let nb = fro_norm(&db).max(A::Real::epsilon());
        defect = defect.max(residual_to_span_mats(sub.basis(), &db) / nb);
    }
    if defect > A::real(tol.algebra.max(1e-7)) {
        return Err(Error::NotModularInvariant {
            defect: defect.to_f64().unwrap_or(f64::NAN),
        });
    }

    let k = sub.span_dim();
    let mut gram = Array2::zeros((k, k));
    for (i, bi) in sub.basis().iter().enumerate() {
        for (j, bj) in sub.basis().iter().enumerate() {
            gram[(i, j)] = trace(&state.matrix().dot(&adjoint(bi)).dot(bj));
        }
    }
    let gram_inv = crate::linalg::inverse(&gram)?;
    let basis = sub.basis().to_vec();
    let rho = state.matrix().clone();
    let e = Superoperator::from_map(n, |x| {
        let mut out = Array2::zeros((n, n));
        for (i, bi) in basis.iter().enumerate() {
            let mut coeff = A::zero();
            for (j, bj) in basis.iter().enumerate() {
                coeff += gram_inv[(i, j)] * trace(&rho.dot(&adjoint(bj)).dot(x));
            }
            out = out + bi.mapv(|z| z * coeff);
        }
        out
    });

    // structural checks: idempotent, unital, state preserving
    let idem = fro_norm(&(e.compose(&e).matrix() - e.matrix()));
    if idem > A::real(1e-7) {
        return Err(Error::Eigensolver(format!(
            "conditional expectation is not idempotent: {:?}",
            idem.to_f64()
        )));
    }
    if sub.contains_identity() {
        let u = fro_norm(&(&e.apply(&eye::<A>(n)) - &eye::<A>(n)));
        if u > A::real(1e-7) {
            return Err(Error::Eigensolver(format!(
                "conditional expectation is not unital: {:?}",
                u.to_f64()
            )));
        }
    }
    let mut preserve = A::Real::zero();
    for x in crate::linalg::matrix_unit_basis::<A>(n) {
        let d = (state.expectation(&e.apply(&x)) - state.expectation(&x)).abs();
        preserve = preserve.max(d);
    }
    if preserve > A::real(1e-7) {
        return Err(Error::Eigensolver(format!(
            "conditional expectation does not preserve the state: {:?}",
            preserve.to_f64()
        )));
    }
    // positivity spot checks on squares of the first few basis directions
    for b in crate::linalg::hermitian_basis::<A>(n).iter().take(4) {
        let image = e.apply(&b.dot(b));
        let herm = (&image + &adjoint(&image)).mapv(|z| z * A::from_real(A::real(0.5)));
        let min = min_eig_herm(&herm)?;
        if min < A::real(-1e-7) {
            return Err(Error::Eigensolver(format!(
                "conditional expectation is not positive: min eigenvalue {:?}",
                min.to_f64()
            )));
        }
    }
    Ok(e)
}

/// Structure report for a (channel, state) pair.
#[derive(Clone, Debug, serde::Serialize)]
pub struct StructureReport {
    pub fixed_dim: usize,
    #[serde(rename = "G_dim")]
    pub g_dim: usize,
    #[serde(rename = "G0_dim")]
    pub g0_dim: usize,
    pub support_rank: usize,
    pub faithful: bool,
}

/// Computes the invariant-structure summary, reducing to the faithful corner
/// when the state is not faithful.
pub fn analyze<A: ChanScalar>(
    channel: &KrausChannel<A>,
    state: &DensityState<A>,
    tol: &Tolerances,
) -> Result<StructureReport> {
    let support = support_projection(state)?;
    let faithful = state.faithful();
    let (ch, st) = if faithful {
        (channel.clone(), state.clone())
    } else {
        let corner = faithful_corner(channel, state, tol)?;
        (corner.channel, corner.state)
    };
    let fixed = fixed_point_algebra(&ch, &st, tol)?;
    let pair = ModularPair::new(ch, st, tol)?;
    let g = compute_g(&pair, tol)?;
    let g0 = compute_g0(&pair, tol)?;
    Ok(StructureReport {
        fixed_dim: fixed.span_dim(),
        g_dim: g.span_dim(),
        g0_dim: g0.span_dim(),
        support_rank: support.rank(),
        faithful,
    })
}

/// Convenience wrappers taking a bare (channel, state) pair.
pub fn compute_g_for<A: ChanScalar>(
    channel: &KrausChannel<A>,
    state: &DensityState<A>,
    tol: &Tolerances,
) -> Result<SubalgebraBasis<A>> {
    let pair = ModularPair::new(channel.clone(), state.clone(), tol)?;
    compute_g(&pair, tol)
}

pub fn compute_g0_for<A: ChanScalar>(
    channel: &KrausChannel<A>,
    state: &DensityState<A>,
    tol: &Tolerances,
) -> Result<SubalgebraBasis<A>> {
    let pair = ModularPair::new(channel.clone(), state.clone(), tol)?;
    compute_g0(&pair, tol)
}

#[allow(unused_imports)]
use crate::kms::modular_commutation_element;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::C64;
    use ndarray::array;
    use ndarray_linalg::Scalar;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn tols() -> Tolerances {
        Tolerances::default()
    }

    /// Independent kernel oracle: eigendecomposition of the superoperator
    /// matrix, eigenvectors with |λ − 1| small.
    fn oracle_fixed_dim(sup: &Superoperator<C64>) -> usize {
        let (w, _) = crate::linalg::eig_general(sup.matrix()).unwrap();
        w.iter().filter(|l| (*l - c(1.0, 0.0)).abs() < 1e-8).count()
    }

    #[test]
    fn invariant_states_identity_channel() {
        let ch = corpus::identity_channel::<C64>(2);
        let inv = invariant_states(&ch, &tols()).unwrap();
        assert_eq!(inv.fixed_basis.len(), 4);
        assert!(inv.faithful_exists);
        assert!(inv.cesaro.faithful());
    }

    #[test]
    fn invariant_states_collapse_channel() {
        let ch = corpus::collapse_channel::<C64>();
        let inv = invariant_states(&ch, &tols()).unwrap();
        assert_eq!(inv.fixed_basis.len(), 1);
        assert!(!inv.faithful_exists);
        // the unique invariant state is |0><0|
        let rho = inv.cesaro.matrix();
        assert!((rho[(0, 0)] - c(1.0, 0.0)).abs() < 1e-9);
        assert!(rho[(1, 1)].abs() < 1e-9);
    }

    #[test]
    fn invariant_states_bitflip_mix() {
        // fixed space of the predual is spanned by I/2 ± tX/2
        let ch = corpus::bitflip_mix_channel::<C64>();
        let inv = invariant_states(&ch, &tols()).unwrap();
        assert_eq!(inv.fixed_basis.len(), 2);
        assert!(inv.faithful_exists);
        // the fixed space is span{1, X}: every state (1 + tX)/2 is invariant
        assert!(residual_to_span_mats(&inv.fixed_basis, &eye::<C64>(2)) < 1e-9);
        assert!(residual_to_span_mats(&inv.fixed_basis, &corpus::pauli_x::<C64>()) < 1e-9);
        for st in &inv.states {
            assert!(st.invariance_residual(&ch).unwrap() < 1e-7);
        }
    }

    #[test]
    fn support_projection_examples() {
        let full = DensityState::<C64>::maximally_mixed(2);
        let p = support_projection(&full).unwrap();
        assert_eq!(p.rank(), 2);

        let pure = DensityState::<C64>::pure(&corpus::basis_vector(2, 0)).unwrap();
        let p = support_projection(&pure).unwrap();
        assert_eq!(p.rank(), 1);
        assert!((p.matrix()[(0, 0)] - c(1.0, 0.0)).abs() < 1e-12);

        let rho = DensityState::new(
            array![
                [c(0.7, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
                [c(0.0, 0.0), c(0.3, 0.0), c(0.0, 0.0)],
                [c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]
            ],
            1e-10,
        )
        .unwrap();
        let p = support_projection(&rho).unwrap();
        assert_eq!(p.rank(), 2);
        assert!(p.matrix()[(2, 2)].abs() < 1e-12);
    }

    #[test]
    fn reduce_channel_examples() {
        // p = 1 leaves the channel unchanged
        let ch = corpus::bitflip_mix_channel::<C64>();
        let red = reduce_channel(&ch, &ProjectionMatrix::identity(2), &tols()).unwrap();
        assert_eq!(red.channel.dim(), 2);

        // collapse channel reduced to |0><0| is the identity on one dimension
        let ch = corpus::collapse_channel::<C64>();
        let pure = DensityState::<C64>::pure(&corpus::basis_vector(2, 0)).unwrap();
        let p = support_projection(&pure).unwrap();
        let red = reduce_channel(&ch, &p, &tols()).unwrap();
        assert_eq!(red.channel.dim(), 1);
        assert!(red.corner_identity_defect < 1e-12);
        let x = array![[c(3.0, 1.0)]];
        let out = red.channel.apply(&x).unwrap();
        assert!((out[(0, 0)] - c(3.0, 1.0)).abs() < 1e-12);

        // non-subharmonic projection is rejected
        let p_bad = ProjectionMatrix::new(
            array![[c(0.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]],
            1e-10,
        )
        .unwrap();
        assert!(matches!(
            reduce_channel(&ch, &p_bad, &tols()),
            Err(Error::NotSubharmonic { .. })
        ));
    }

    #[test]
    fn corner_unitality_on_random_reducible_channel() {
        // build a dim-3 channel with an invariant state of rank 2 by
        // embedding a random 2-dim channel as a block with a decaying corner
        let mut rng = corpus::seeded_rng(41);
        let (ch, _) = corpus::random_faithful_pair::<C64>(2, 2, &mut rng).unwrap();
        let mut kraus3 = Vec::new();
        for l in ch.kraus() {
            let mut m = Array2::<C64>::zeros((3, 3));
            for i in 0..2 {
                for j in 0..2 {
                    m[(i, j)] = l[(i, j)];
                }
            }
            kraus3.push(m);
        }
        // the extra operator |2><0| restores unitality and its predual
        // moves mass from |2> into the block
        let mut extra = Array2::<C64>::zeros((3, 3));
        extra[(2, 0)] = c(1.0, 0.0);
        kraus3.push(extra);
        let ch3 = KrausChannel::with_default_tol(kraus3).unwrap();
        let inv = invariant_states(&ch3, &tols()).unwrap();
        assert!(!inv.faithful_exists);
        let p = support_projection(&inv.cesaro).unwrap();
        assert_eq!(p.rank(), 2);
        let red = reduce_channel(&ch3, &p, &tols()).unwrap();
        assert!(red.channel.unitality_defect() < 1e-10);
        assert!(red.corner_identity_defect < 1e-9);
    }

    #[test]
    fn fixed_point_algebra_examples() {
        let mixed = DensityState::<C64>::maximally_mixed(2);

        let ch = corpus::identity_channel::<C64>(2);
        let f = fixed_point_algebra(&ch, &mixed, &tols()).unwrap();
        assert_eq!(f.span_dim(), 4);
        assert_eq!(f.span_dim(), oracle_fixed_dim(&ch.superoperator()));

        let ch = corpus::bitflip_mix_channel::<C64>();
        let f = fixed_point_algebra(&ch, &mixed, &tols()).unwrap();
        assert_eq!(f.span_dim(), 2);
        assert_eq!(f.span_dim(), oracle_fixed_dim(&ch.superoperator()));
        // span is {1, X}
        let x = corpus::pauli_x::<C64>();
        assert!(residual_to_span_mats(f.basis(), &x) < 1e-9);

        let ch = corpus::two_cycle_channel::<C64>();
        let f = fixed_point_algebra(&ch, &mixed, &tols()).unwrap();
        assert_eq!(f.span_dim(), 1);
        assert!(f.contains_identity());
    }

    #[test]
    fn compute_g_examples() {
        let tol = tols();
        let mixed = DensityState::<C64>::maximally_mixed(2);

        // automorphism: G is everything
        let u = corpus::hadamard::<C64>();
        let ch = corpus::unitary_conjugation_channel(u);
        let g = compute_g_for(&ch, &mixed, &tol).unwrap();
        assert_eq!(g.span_dim(), 4);

        // bitflip mix: G = span{1, X}
        let ch = corpus::bitflip_mix_channel::<C64>();
        let g = compute_g_for(&ch, &mixed, &tol).unwrap();
        assert_eq!(g.span_dim(), 2);
        assert!(residual_to_span_mats(g.basis(), &corpus::pauli_x::<C64>()) < 1e-8);

        // strictly contractive random channel: scalars only
        let mut rng = corpus::seeded_rng(43);
        let (ch, rho) = corpus::random_faithful_pair::<C64>(2, 4, &mut rng).unwrap();
        let spec = ch.spectrum(1e-8).unwrap();
        assert_eq!(spec.peripheral.len(), 1, "want a mixing random instance");
        let g = compute_g_for(&ch, &rho, &tol).unwrap();
        assert_eq!(g.span_dim(), 1);
    }

    #[test]
    fn compute_g0_examples() {
        let tol = tols();
        let mixed = DensityState::<C64>::maximally_mixed(2);

        let ch = corpus::unitary_conjugation_channel(corpus::hadamard::<C64>());
        let g0 = compute_g0_for(&ch, &mixed, &tol).unwrap();
        assert_eq!(g0.span_dim(), 4);

        // classical 2-cycle: G0 = span{1, Z}, τ acts as the period-2 flip
        let ch = corpus::two_cycle_channel::<C64>();
        let g0 = compute_g0_for(&ch, &mixed, &tol).unwrap();
        assert_eq!(g0.span_dim(), 2);
        assert!(residual_to_span_mats(g0.basis(), &corpus::pauli_z::<C64>()) < 1e-8);

        let mut rng = corpus::seeded_rng(47);
        let (ch, rho) = corpus::random_faithful_pair::<C64>(2, 4, &mut rng).unwrap();
        let g0 = compute_g0_for(&ch, &rho, &tol).unwrap();
        assert_eq!(g0.span_dim(), 1);
    }

    #[test]
    fn conditional_expectation_examples() {
        let tol = tols();
        let n = 2;

        // scalars: E(x) = tr(ρx)·1
        let rho = DensityState::new(
            array![[c(0.6, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.4, 0.0)]],
            1e-10,
        )
        .unwrap();
        let scalars = SubalgebraBasis::from_span(n, &[eye::<C64>(n)], 1e-12);
        let e = conditional_expectation(&scalars, &rho, &tol).unwrap();
        let x = corpus::random_hermitian::<C64>(2, &mut corpus::seeded_rng(53));
        let out = e.apply(&x);
        let expect = eye::<C64>(2) * rho.expectation(&x);
        assert!(fro_norm(&(&out - &expect)) < 1e-10);

        // diagonal algebra with diagonal ρ: E is the pinching, checked
        // against the Gram-matrix formula by hand
        let diag = SubalgebraBasis::from_span(
            n,
            &[
                crate::linalg::matrix_unit(n, 0, 0),
                crate::linalg::matrix_unit(n, 1, 1),
            ],
            1e-12,
        );
        let e = conditional_expectation(&diag, &rho, &tol).unwrap();
        let out = e.apply(&x);
        assert!((out[(0, 0)] - x[(0, 0)]).abs() < 1e-10);
        assert!((out[(1, 1)] - x[(1, 1)]).abs() < 1e-10);
        assert!(out[(0, 1)].abs() < 1e-12 && out[(1, 0)].abs() < 1e-12);

        // E commutes with τ when the subalgebra is G
        let mixed = DensityState::<C64>::maximally_mixed(2);
        let ch = corpus::bitflip_mix_channel::<C64>();
        let g = compute_g_for(&ch, &mixed, &tol).unwrap();
        let e = conditional_expectation(&g, &mixed, &tol).unwrap();
        let t = ch.superoperator();
        let comm = fro_norm(&(e.compose(&t).matrix() - t.compose(&e).matrix()));
        assert!(comm < 1e-9);
    }

    #[test]
    fn subharmonic_chain_is_monotone() {
        let ch = corpus::collapse_channel::<C64>();
        let pure = DensityState::<C64>::pure(&corpus::basis_vector(2, 0)).unwrap();
        let p = support_projection(&pure).unwrap();
        let mut prev = p.matrix().clone();
        for _ in 0..5 {
            let next = ch.apply(&prev).unwrap();
            let min = min_eig_herm(&(&next - &prev)).unwrap();
            assert!(min > -1e-9);
            prev = next;
        }
    }

    #[test]
    fn g_contains_fixed_centralizer_and_sits_in_domain() {
        let tol = tols();
        let mut rng = corpus::seeded_rng(59);
        for _ in 0..3 {
            let (ch, rho) = corpus::random_faithful_pair::<C64>(2, 2, &mut rng).unwrap();
            let pair = ModularPair::new(ch.clone(), rho.clone(), &tol).unwrap();
            let g = compute_g(&pair, &tol).unwrap();
            let fixed = fixed_point_algebra(&ch, &rho, &tol).unwrap();
            let centralizer = modular_centralizer(&rho, &tol).unwrap();
            let both = intersect_spans_mats(fixed.basis(), &centralizer, tol.subspace).unwrap();
            // fixed ∩ centralizer ⊆ G
            assert!(span_containment_defect(g.basis(), &both) < 1e-8);
            // G sits inside the multiplicative domain: multiplicativity holds
            for b in g.basis() {
                let lhs = ch.apply(&b.dot(&adjoint(b))).unwrap();
                let rhs = ch.apply(b).unwrap().dot(&ch.apply(&adjoint(b)).unwrap());
                assert!(fro_norm(&(&lhs - &rhs)) < 1e-7);
            }
        }
    }

    #[test]
    fn dual_tower_identity() {
        let tol = tols();
        let mixed = DensityState::<C64>::maximally_mixed(2);
        for ch in [
            corpus::two_cycle_channel::<C64>(),
            corpus::bitflip_mix_channel::<C64>(),
            corpus::mixing_random_unitary_channel::<C64>(),
        ] {
            let pair = ModularPair::new(ch.clone(), mixed.clone(), &tol).unwrap();
            let g0 = compute_g0(&pair, &tol).unwrap();
            let adj = pair.kms_adjoint().unwrap();
            let pair_t = ModularPair::new(adj, mixed.clone(), &tol).unwrap();
            let g0_t = compute_g0(&pair_t, &tol).unwrap();
            assert!(
                crate::linalg::spans_equal(g0.basis(), g0_t.basis(), 1e-8),
                "dual tower mismatch"
            );
        }
    }

    #[test]
    fn analyze_report() {
        let tol = tols();
        let ch = corpus::collapse_channel::<C64>();
        let pure = DensityState::<C64>::pure(&corpus::basis_vector(2, 0)).unwrap();
        let rep = analyze(&ch, &pure, &tol).unwrap();
        assert_eq!(rep.support_rank, 1);
        assert!(!rep.faithful);
        assert_eq!(rep.fixed_dim, 1);
        assert_eq!(rep.g_dim, 1);
        assert_eq!(rep.g0_dim, 1);
    }
}
