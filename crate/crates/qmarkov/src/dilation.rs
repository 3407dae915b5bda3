//! Truncated minimal weak Markov dilation of a discrete-time channel.
//!
//! The base fiber is the GNS space of the invariant state (dimension
//! `n · rank ρ`), the total space is `base ⊗ noise^{⊗N}`, and the embeddings
//!
//! ```text
//! u_m = (V_{N−m} at the base) ⊗ 1,   V: h ↦ Σ_k (l_k† h) ⊗ e_k,
//! ```
//!
//! realize the flow `j_m(x) = u_m (π(x) ⊗ 1) u_m†` and the increasing
//! filtration `F_{m]} = u_m u_m†` with `F_{0]}` the base fiber and
//! `F_{N]} = 1`. The dilation endomorphism appends a fresh noise slot at the
//! newest time and is implemented by a Cuntz family of shift isometries; it
//! is multiplicative on operators localized in the first `N−1` slots.

use ndarray::{Array1, Array2};
use ndarray_linalg::SVD;
use num_traits::{Float, ToPrimitive, Zero};
use serde::Serialize;

use crate::channel::{DensityState, KrausChannel};
use crate::error::{Error, Result};
use crate::linalg::{
    adjoint, eigh_herm, eye, fro_norm, hermitian_basis, kron, matrix_unit_basis, min_eig_herm,
    trace,
};
use crate::scalar::ChanScalar;
use crate::tol::Tolerances;

/// Truncated weak Markov process: fibers, isometries, flow operators and
/// filtration projections.
#[derive(Debug)]
pub struct DilationSpace<A: ChanScalar> {
    channel: KrausChannel<A>,
    base_dim: usize,
    noise_dim: usize,
    horizon: usize,
    total_dim: usize,
    /// Kraus operators of the GNS-amplified channel `π(l_k) = l_k ⊗ 1`.
    pi_kraus: Vec<Array2<A>>,
    /// `V_j: base → base ⊗ noise^{⊗j}`, `j = 0..=N`.
    v_words: Vec<Array2<A>>,
    /// `u_m: base ⊗ noise^{⊗m} → total`, `m = 0..=N`.
    u_embeds: Vec<Array2<A>>,
    /// Vacuum vector: the GNS vector of the state in the base fiber.
    omega: Array1<A>,
    /// Shift isometries; `α(X) = Σ_k θ_k X θ_k†`.
    thetas: Vec<Array2<A>>,
    /// GNS representation `π(x) = x ⊗ 1` of the original algebra.
    gns_factor: usize,
}

impl<A: ChanScalar> DilationSpace<A> {
    pub fn base_dim(&self) -> usize {
        self.base_dim
    }

    pub fn noise_dim(&self) -> usize {
        self.noise_dim
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    pub fn channel(&self) -> &KrausChannel<A> {
        &self.channel
    }

    pub fn omega(&self) -> &Array1<A> {
        &self.omega
    }

    /// `π(x) = x ⊗ 1_r` on the base fiber.
    pub fn represent(&self, x: &Array2<A>) -> Array2<A> {
        kron(x, &eye::<A>(self.gns_factor))
    }

    /// The one-step isometry `V`.
    pub fn step_isometry(&self) -> &Array2<A> {
        &self.v_words[1]
    }

    /// Flow operator `j_m(x)` for `x` in the original `n×n` algebra.
    pub fn flow(&self, m: usize, x: &Array2<A>) -> Array2<A> {
        self.flow_base(m, &self.represent(x))
    }

    /// Flow operator for an arbitrary base-fiber operator.
    pub fn flow_base(&self, m: usize, y: &Array2<A>) -> Array2<A> {
        let u = &self.u_embeds[m];
        let block = kron(y, &eye::<A>(self.noise_dim.pow(m as u32)));
        u.dot(&block).dot(&adjoint(u))
    }

    /// Filtration projection `F_{m]} = u_m u_m†`.
    pub fn filtration(&self, m: usize) -> Array2<A> {
        let u = &self.u_embeds[m];
        u.dot(&adjoint(u))
    }

    /// Base-fiber projection `P = F_{0]}`.
    pub fn base_projection(&self) -> Array2<A> {
        self.filtration(0)
    }

    /// The dilation endomorphism `α_1`.
    pub fn endo_apply(&self, x: &Array2<A>) -> Array2<A> {
        let mut out = Array2::zeros((self.total_dim, self.total_dim));
        for th in &self.thetas {
            out = out + th.dot(x).dot(&adjoint(th));
        }
        out
    }

    pub fn endo_apply_n(&self, x: &Array2<A>, m: usize) -> Array2<A> {
        let mut out = x.clone();
        for _ in 0..m {
            out = self.endo_apply(&out);
        }
        out
    }

    /// GNS-amplified channel action on base-fiber operators.
    pub fn base_channel_apply(&self, y: &Array2<A>) -> Array2<A> {
        let mut out = Array2::zeros((self.base_dim, self.base_dim));
        for l in &self.pi_kraus {
            out = out + l.dot(y).dot(&adjoint(l));
        }
        out
    }

    /// `‖V†V − 1‖` and the worst Stinespring residual
    /// `‖V†(π(x) ⊗ 1)V − π(τ(x))‖` over the matrix-unit basis.
    pub fn stinespring_residual(&self) -> Result<f64> {
        let v = &self.v_words[1];
        let mut worst = fro_norm(&(&adjoint(v).dot(v) - &eye::<A>(self.base_dim)));
        for x in matrix_unit_basis::<A>(self.channel.dim()) {
            let lifted = kron(&self.represent(&x), &eye::<A>(self.noise_dim));
            let compressed = adjoint(v).dot(&lifted).dot(v);
            let target = self.represent(&self.channel.apply(&x)?);
            worst = worst.max(fro_norm(&(&compressed - &target)));
        }
        Ok(worst.to_f64().unwrap_or(f64::NAN))
    }

    /// Vacuum expectation `⟨Ω, X Ω⟩`.
    pub fn vacuum_expectation(&self, x: &Array2<A>) -> A {
        let xo = x.dot(&self.omega);
        crate::linalg::vdot(&self.omega, &xo)
    }
}

/// Builds the truncated dilation; the memory budget caps the total
/// dimension `(n · rank ρ) · d^N`.
pub fn build_dilation<A: ChanScalar>(
    channel: &KrausChannel<A>,
    state: &DensityState<A>,
    horizon: usize,
    tol: &Tolerances,
) -> Result<DilationSpace<A>> {
    if horizon == 0 {
        return Err(Error::InvalidInput(
            "dilation horizon must be at least 1".into(),
        ));
    }
    let res = state.invariance_residual(channel)?;
    if res > A::real(tol.invariance) {
        return Err(Error::StateNotInvariant {
            residual: res.to_f64().unwrap_or(f64::NAN),
        });
    }
    let n = channel.dim();
    let d = channel.kraus().len();

    // GNS fiber of the state: C^n ⊗ C^r with r the support rank
    let (w, vecs) = eigh_herm(state.matrix())?;
    let max_eig = w.iter().copied().fold(A::Real::zero(), A::Real::max);
    let cut = A::real(tol.rank) * max_eig.max(A::Real::epsilon());
    let kept: Vec<usize> = (0..n).filter(|&k| w[k] > cut).collect();
    let r = kept.len();
    let base_dim = n * r;

    let mut total_dim = base_dim;
    for _ in 0..horizon {
        total_dim = total_dim.checked_mul(d).ok_or(Error::BudgetExceeded {
            required: usize::MAX,
            cap: tol.budget,
        })?;
        if total_dim > tol.budget {
            return Err(Error::BudgetExceeded {
                required: total_dim,
                cap: tol.budget,
            });
        }
    }

    // Ω_base = vec of ρ^{1/2} restricted to its support columns
    let mut omega_base: Array1<A> = Array1::zeros(base_dim);
    for (s, &k) in kept.iter().enumerate() {
        let scale = A::from_real(Float::sqrt(w[k].max(A::Real::zero())));
        for a in 0..n {
            omega_base[a * r + s] = vecs[(a, k)] * scale;
        }
    }
    let norm: A::Real = omega_base.iter().map(|z| z.square()).sum();
    let norm = Float::sqrt(norm);
    omega_base.mapv_inplace(|z| z / A::from_real(norm));

    let id_r = eye::<A>(r);
    let pi_kraus: Vec<Array2<A>> = channel.kraus().iter().map(|l| kron(l, &id_r)).collect();

    // V h = Σ_k (π(l_k)† h) ⊗ e_k
    let mut v = Array2::zeros((base_dim * d, base_dim));
    for (k, l) in pi_kraus.iter().enumerate() {
        let ldag = adjoint(l);
        for i in 0..base_dim {
            for j in 0..base_dim {
                v[(i * d + k, j)] = ldag[(i, j)];
            }
        }
    }

    let mut v_words: Vec<Array2<A>> = vec![eye::<A>(base_dim), v.clone()];
    for j in 2..=horizon {
        let prev = &v_words[j - 1];
        let lifted = kron(&v, &eye::<A>(d.pow((j - 1) as u32)));
        v_words.push(lifted.dot(prev));
    }

    let mut u_embeds = Vec::with_capacity(horizon + 1);
    for m in 0..=horizon {
        let id_m = eye::<A>(d.pow(m as u32));
        u_embeds.push(kron(&v_words[horizon - m], &id_m));
    }

    // shift isometries: θ_k appends e_k as the newest noise slot
    let u_last = &u_embeds[horizon - 1];
    let mut thetas = Vec::with_capacity(d);
    for k in 0..d {
        let mut append = Array2::zeros((total_dim, total_dim / d));
        for i in 0..total_dim / d {
            append[(i * d + k, i)] = A::one();
        }
        thetas.push(append.dot(&adjoint(u_last)));
    }

    let omega = u_embeds[0].dot(&omega_base);

    Ok(DilationSpace {
        channel: channel.clone(),
        base_dim,
        noise_dim: d,
        horizon,
        total_dim,
        pi_kraus,
        v_words,
        u_embeds,
        omega,
        thetas,
        gns_factor: r,
    })
}

/// Max residual of `F_{s]} j_t(x) F_{s]} = j_s(τ^{t−s}(x))` over all
/// `0 ≤ s ≤ t ≤ N` and matrix-unit basis elements.
pub fn verify_markov_property<A: ChanScalar>(space: &DilationSpace<A>) -> Result<f64> {
    let n = space.channel.dim();
    let basis = matrix_unit_basis::<A>(n);
    let mut worst = A::Real::zero();
    for s in 0..=space.horizon {
        let f = space.filtration(s);
        for t in s..=space.horizon {
            for x in &basis {
                let jt = space.flow(t, x);
                let lhs = f.dot(&jt).dot(&f);
                let rhs = space.flow(s, &space.channel.apply_n(x, t - s)?);
                worst = worst.max(fro_norm(&(&lhs - &rhs)));
            }
        }
    }
    Ok(worst.to_f64().unwrap_or(f64::NAN))
}

/// Deterministic enumeration of flow words
/// `X = j_{s_1}(x_1) ··· j_{s_r}(x_r)` with `r ≤ 3`, times below `max_time`,
/// over a Hermitian basis.
fn enumerate_words<A: ChanScalar>(space: &DilationSpace<A>, max_time: usize) -> Vec<Array2<A>> {
    let n = space.channel.dim();
    let basis = hermitian_basis::<A>(n);
    let times: Vec<usize> = (0..=max_time).collect();
    let mut words = Vec::new();
    // r = 1
    for &s in &times {
        for x in &basis {
            words.push(space.flow(s, x));
        }
    }
    // r = 2
    for &s1 in &times {
        for &s2 in &times {
            for (i, x1) in basis.iter().enumerate() {
                for (j, x2) in basis.iter().enumerate() {
                    if (i + j) % 2 == 0 {
                        words.push(space.flow(s1, x1).dot(&space.flow(s2, x2)));
                    }
                }
            }
        }
    }
    // r = 3: nondecreasing time triples, basis indices cycling
    for (a, &s1) in times.iter().enumerate() {
        for &s2 in &times[a..] {
            for &s3 in &times[a..] {
                for (i, x1) in basis.iter().enumerate() {
                    let x2 = &basis[(i + 1) % basis.len()];
                    let x3 = &basis[(i + 2) % basis.len()];
                    words.push(
                        space
                            .flow(s1, x1)
                            .dot(&space.flow(s2, x2))
                            .dot(&space.flow(s3, x3)),
                    );
                }
            }
        }
    }
    words
}

/// Max residual of the compression identity
/// `P α_m(X) P = j_0(τ_π^m(u_0† X u_0))` over the deterministic word
/// enumeration.
pub fn verify_compression<A: ChanScalar>(space: &DilationSpace<A>) -> Result<f64> {
    let p = space.base_projection();
    let u0 = &space.u_embeds[0];
    let mut worst = A::Real::zero();
    for m in 0..=space.horizon.min(2) {
        let max_time = space.horizon - m;
        for word in enumerate_words(space, max_time) {
            let lhs = p.dot(&space.endo_apply_n(&word, m)).dot(&p);
            let mut base_op = adjoint(u0).dot(&word).dot(u0);
            for _ in 0..m {
                base_op = space.base_channel_apply(&base_op);
            }
            let rhs = space.flow_base(0, &base_op);
            worst = worst.max(fro_norm(&(&lhs - &rhs)));
        }
    }
    Ok(worst.to_f64().unwrap_or(f64::NAN))
}

/// Smallest eigenvalue of `F_{m+1]} − F_{m]}` over the filtration, which is
/// nonnegative for an increasing filtration.
pub fn filtration_monotonicity<A: ChanScalar>(space: &DilationSpace<A>) -> Result<f64> {
    let mut worst = A::Real::infinity();
    for m in 0..space.horizon {
        let diff = &space.filtration(m + 1) - &space.filtration(m);
        worst = worst.min(min_eig_herm(&diff)?);
    }
    Ok(worst.to_f64().unwrap_or(f64::NAN))
}

/// Max residual of `α_m(P) = F_{m]}`.
pub fn endomorphism_filtration_residual<A: ChanScalar>(space: &DilationSpace<A>) -> f64 {
    let p = space.base_projection();
    let mut worst = A::Real::zero();
    for m in 0..=space.horizon {
        let lhs = space.endo_apply_n(&p, m);
        worst = worst.max(fro_norm(&(&lhs - &space.filtration(m))));
    }
    worst.to_f64().unwrap_or(f64::NAN)
}

/// Multiplicativity defect of `α_1` on products of flow operators localized
/// in the first `N−1` slots.
pub fn endomorphism_multiplicativity_defect<A: ChanScalar>(
    space: &DilationSpace<A>,
) -> Result<f64> {
    if space.horizon < 1 {
        return Ok(0.0);
    }
    let n = space.channel.dim();
    let basis = hermitian_basis::<A>(n);
    let max_time = space.horizon - 1;
    let mut worst = A::Real::zero();
    for s in 0..=max_time {
        for t in 0..=max_time {
            for (i, x) in basis.iter().enumerate() {
                let y = &basis[(i + 1) % basis.len()];
                let jx = space.flow(s, x);
                let jy = space.flow(t, y);
                let lhs = space.endo_apply(&jx.dot(&jy));
                let rhs = space.endo_apply(&jx).dot(&space.endo_apply(&jy));
                worst = worst.max(fro_norm(&(&lhs - &rhs)));
            }
        }
    }
    Ok(worst.to_f64().unwrap_or(f64::NAN))
}

/// Ranks of the span of time-ordered flow words applied to the vacuum
/// against the span of arbitrary words: equal ranks witness minimality of
/// the ordered family.
pub fn minimality_ranks<A: ChanScalar>(
    space: &DilationSpace<A>,
    max_len: usize,
) -> Result<(usize, usize)> {
    let n = space.channel.dim();
    let basis = hermitian_basis::<A>(n);
    let times: Vec<usize> = (0..=space.horizon).collect();

    let mut ordered: Vec<Array1<A>> = vec![space.omega.clone()];
    let mut arbitrary: Vec<Array1<A>> = vec![space.omega.clone()];

    // length-1 words
    let mut ordered_ops: Vec<(usize, Array2<A>)> = Vec::new();
    for &t in &times {
        for x in &basis {
            ordered_ops.push((t, space.flow(t, x)));
        }
    }
    for (_, op) in &ordered_ops {
        ordered.push(op.dot(&space.omega));
        arbitrary.push(op.dot(&space.omega));
    }
    // longer words: ordered requires nonincreasing times left to right
    let mut ordered_prev: Vec<(usize, Array1<A>)> = ordered_ops
        .iter()
        .map(|(t, op)| (*t, op.dot(&space.omega)))
        .collect();
    let mut arb_prev: Vec<Array1<A>> = ordered_prev.iter().map(|(_, v)| v.clone()).collect();
    for _ in 2..=max_len {
        let mut ordered_next = Vec::new();
        for (t_inner, vec) in &ordered_prev {
            for (t, op) in &ordered_ops {
                if *t >= *t_inner {
                    let w = op.dot(vec);
                    ordered.push(w.clone());
                    ordered_next.push((*t, w));
                }
            }
        }
        let mut arb_next = Vec::new();
        for vec in &arb_prev {
            for (_, op) in &ordered_ops {
                let w = op.dot(vec);
                arbitrary.push(w.clone());
                arb_next.push(w);
            }
        }
        ordered_prev = ordered_next;
        arb_prev = arb_next;
    }
    Ok((span_rank(&ordered)?, span_rank(&arbitrary)?))
}

fn span_rank<A: ChanScalar>(vecs: &[Array1<A>]) -> Result<usize> {
    if vecs.is_empty() {
        return Ok(0);
    }
    let rows = vecs[0].len();
    let mut m = Array2::zeros((rows, vecs.len()));
    for (j, v) in vecs.iter().enumerate() {
        for i in 0..rows {
            m[(i, j)] = v[i];
        }
    }
    let (_, s, _) = m.svd(false, false)?;
    let smax = s.iter().copied().fold(A::Real::zero(), A::Real::max);
    let cut = A::real(1e-8) * smax.max(A::Real::epsilon());
    Ok(s.iter().filter(|&&x| x > cut).count())
}

/// Two-point series evaluated through dilation inner products
/// `⟨j_m(x)Ω, P j_m(y)Ω⟩` and its max deviation from the direct
/// `φ₀(τ^m(x) τ^m(y))` evaluation.
pub struct DilationKolmogorov {
    pub series: Vec<f64>,
    pub max_deviation_from_direct: f64,
}

pub fn kolmogorov_series_via_dilation<A: ChanScalar>(
    channel: &KrausChannel<A>,
    state: &DensityState<A>,
    horizon: usize,
    tol: &Tolerances,
) -> Result<DilationKolmogorov> {
    let space = build_dilation(channel, state, horizon, tol)?;
    let n = channel.dim();
    let basis = hermitian_basis::<A>(n);
    let p = space.base_projection();
    let expectations: Vec<A> = basis.iter().map(|b| state.expectation(b)).collect();

    let mut series = Vec::with_capacity(horizon + 1);
    let mut deviation = A::Real::zero();
    let mut evolved: Vec<Array2<A>> = basis.clone();
    for m in 0..=horizon {
        let flows: Vec<Array2<A>> = basis.iter().map(|b| space.flow(m, b)).collect();
        let mut worst = A::Real::zero();
        for (i, jx) in flows.iter().enumerate() {
            let left = p.dot(&jx.dot(&space.omega));
            for (j, jy) in flows.iter().enumerate() {
                let right = p.dot(&jy.dot(&space.omega));
                let two_point = crate::linalg::vdot(&left, &right);
                // j_m(x)† = j_m(x) for Hermitian x, so this inner product is
                // ⟨Ω, j_m(x) P j_m(y) Ω⟩ = φ₀(τ^m(x) τ^m(y))
                let k_val = (two_point - expectations[i] * expectations[j]).abs();
                worst = worst.max(k_val);

                let direct = (state.expectation(&evolved[i].dot(&evolved[j]))
                    - expectations[i] * expectations[j])
                    .abs();
                deviation = deviation.max(Float::abs(k_val - direct));
            }
        }
        series.push(worst.to_f64().unwrap_or(f64::NAN));
        if m < horizon {
            for e in evolved.iter_mut() {
                *e = channel.apply(e)?;
            }
        }
    }
    Ok(DilationKolmogorov {
        series,
        max_deviation_from_direct: deviation.to_f64().unwrap_or(f64::NAN),
    })
}

/// Report emitted by the `dilate` subcommand.
#[derive(Clone, Debug, Serialize)]
pub struct DilationReport {
    pub base_dim: usize,
    pub total_dim: usize,
    pub stinespring_residual: f64,
    pub markov_residual: f64,
    pub compression_residual: f64,
    pub filtration_monotone: bool,
}

pub fn dilation_report<A: ChanScalar>(
    channel: &KrausChannel<A>,
    state: &DensityState<A>,
    horizon: usize,
    tol: &Tolerances,
) -> Result<DilationReport> {
    let space = build_dilation(channel, state, horizon, tol)?;
    Ok(DilationReport {
        base_dim: space.base_dim(),
        total_dim: space.total_dim(),
        stinespring_residual: space.stinespring_residual()?,
        markov_residual: verify_markov_property(&space)?,
        compression_residual: verify_compression(&space)?,
        filtration_monotone: filtration_monotonicity(&space)? > -1e-10,
    })
}

/// `tr(ρ x)` shortcut used by the vacuum tests.
pub fn state_moment<A: ChanScalar>(state: &DensityState<A>, x: &Array2<A>) -> A {
    trace(&state.matrix().dot(x))
}
