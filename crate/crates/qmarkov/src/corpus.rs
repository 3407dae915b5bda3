//! Named example channels and tuples, plus seeded random instances.
//!
//! These are the fixtures exercised by the selftest suite and the acceptance
//! tests: small channels whose spectra are known in closed form, the AKLT and
//! classical-Markov Popescu tuples, and Haar-like random unital channels with
//! reproducible seeding.

use ndarray::{Array1, Array2};
use ndarray_linalg::QR;
use num_traits::Zero;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::channel::{DensityState, KrausChannel};
use crate::error::Result;
use crate::fcs::PopescuTuple;
use crate::linalg::{adjoint, eye, fixed_point_projector, trace, unvec_col, vec_col};
use crate::scalar::ChanScalar;

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Dense matrix from rows of `(re, im)` pairs.
pub fn cmat<A: ChanScalar>(rows: &[&[(f64, f64)]]) -> Array2<A> {
    let r = rows.len();
    let c = rows[0].len();
    let mut m = Array2::zeros((r, c));
    for (i, row) in rows.iter().enumerate() {
        for (j, &(re, im)) in row.iter().enumerate() {
            m[(i, j)] = A::complex(re, im);
        }
    }
    m
}

pub fn pauli_x<A: ChanScalar>() -> Array2<A> {
    cmat(&[&[(0.0, 0.0), (1.0, 0.0)], &[(1.0, 0.0), (0.0, 0.0)]])
}

pub fn pauli_y<A: ChanScalar>() -> Array2<A> {
    cmat(&[&[(0.0, 0.0), (0.0, -1.0)], &[(0.0, 1.0), (0.0, 0.0)]])
}

pub fn pauli_z<A: ChanScalar>() -> Array2<A> {
    cmat(&[&[(1.0, 0.0), (0.0, 0.0)], &[(0.0, 0.0), (-1.0, 0.0)]])
}

/// Normalized 2×2 involution `(1/√2)[[1,1],[1,−1]]`.
pub fn hadamard<A: ChanScalar>() -> Array2<A> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    cmat(&[&[(s, 0.0), (s, 0.0)], &[(s, 0.0), (-s, 0.0)]])
}

/// Spin-1 `S_z` written in the Cartesian (x, y, z) site basis matched to the
/// AKLT tuple below.
pub fn spin1_sz_cartesian<A: ChanScalar>() -> Array2<A> {
    cmat(&[
        &[(0.0, 0.0), (0.0, -1.0), (0.0, 0.0)],
        &[(0.0, 1.0), (0.0, 0.0), (0.0, 0.0)],
        &[(0.0, 0.0), (0.0, 0.0), (0.0, 0.0)],
    ])
}

pub fn identity_channel<A: ChanScalar>(dim: usize) -> KrausChannel<A> {
    KrausChannel::with_default_tol(vec![eye(dim)]).expect("identity is unital")
}

/// Classical 2-cycle `{|0⟩⟨1|, |1⟩⟨0|}`: swaps the two diagonal entries.
pub fn two_cycle_channel<A: ChanScalar>() -> KrausChannel<A> {
    let k1 = cmat(&[&[(0.0, 0.0), (1.0, 0.0)], &[(0.0, 0.0), (0.0, 0.0)]]);
    let k2 = cmat(&[&[(0.0, 0.0), (0.0, 0.0)], &[(1.0, 0.0), (0.0, 0.0)]]);
    KrausChannel::with_default_tol(vec![k1, k2]).expect("unital")
}

/// `{|0⟩⟨0|, |1⟩⟨0|}`: every state collapses to `|0⟩⟨0|` in one step.
pub fn collapse_channel<A: ChanScalar>() -> KrausChannel<A> {
    let k1 = cmat(&[&[(1.0, 0.0), (0.0, 0.0)], &[(0.0, 0.0), (0.0, 0.0)]]);
    let k2 = cmat(&[&[(0.0, 0.0), (0.0, 0.0)], &[(1.0, 0.0), (0.0, 0.0)]]);
    KrausChannel::with_default_tol(vec![k1, k2]).expect("unital")
}

/// `{I/√2, X/√2}`: fixes `span{1, X}`, kills the rest.
pub fn bitflip_mix_channel<A: ChanScalar>() -> KrausChannel<A> {
    let s = A::from_real(A::real(std::f64::consts::FRAC_1_SQRT_2));
    let k1 = eye::<A>(2) * s;
    let k2 = pauli_x::<A>() * s;
    KrausChannel::with_default_tol(vec![k1, k2]).expect("unital")
}

/// Random-unitary mixture `(1/2)(H·H + S·S†)` with `S = diag(1, i)`: the
/// whole non-scalar spectrum sits strictly inside the unit circle, so the
/// channel is strongly mixing.
pub fn mixing_random_unitary_channel<A: ChanScalar>() -> KrausChannel<A> {
    let s = A::from_real(A::real(std::f64::consts::FRAC_1_SQRT_2));
    let k1 = hadamard::<A>() * s;
    let phase = cmat(&[&[(1.0, 0.0), (0.0, 0.0)], &[(0.0, 0.0), (0.0, 1.0)]]);
    let k2 = phase * s;
    KrausChannel::with_default_tol(vec![k1, k2]).expect("unital")
}

/// Mixture `(1/2)(X·X + H·H)` of two real involutions. Real conjugations
/// flip the sign of the imaginary Pauli direction, so −1 stays in the
/// peripheral spectrum: ergodic but not mixing.
pub fn involution_mix_channel<A: ChanScalar>() -> KrausChannel<A> {
    let s = A::from_real(A::real(std::f64::consts::FRAC_1_SQRT_2));
    let k1 = pauli_x::<A>() * s;
    let k2 = hadamard::<A>() * s;
    KrausChannel::with_default_tol(vec![k1, k2]).expect("unital")
}

/// Automorphism `x ↦ u x u†`.
pub fn unitary_conjugation_channel<A: ChanScalar>(u: Array2<A>) -> KrausChannel<A> {
    KrausChannel::with_default_tol(vec![u]).expect("unitary is unital")
}

pub fn random_complex_matrix<A: ChanScalar>(
    rows: usize,
    cols: usize,
    rng: &mut ChaCha8Rng,
) -> Array2<A> {
    let mut m = Array2::zeros((rows, cols));
    for i in 0..rows {
        for j in 0..cols {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            m[(i, j)] = A::complex(re, im);
        }
    }
    m
}

pub fn random_hermitian<A: ChanScalar>(n: usize, rng: &mut ChaCha8Rng) -> Array2<A> {
    let g = random_complex_matrix::<A>(n, n, rng);
    let h = &g + &adjoint(&g);
    h.mapv(|z| z * A::from_real(A::real(0.5)))
}

/// Haar-like random unitary via QR of a Ginibre matrix with the phases of
/// the R diagonal absorbed.
pub fn random_unitary<A: ChanScalar>(n: usize, rng: &mut ChaCha8Rng) -> Result<Array2<A>> {
    let g = random_complex_matrix::<A>(n, n, rng);
    let (q, r) = g.qr()?;
    let mut u = q;
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.abs() > A::Real::zero() {
            d / A::from_real(d.abs())
        } else {
            A::one()
        };
        for i in 0..n {
            u[(i, j)] *= phase.conj();
        }
    }
    Ok(u)
}

/// Random unital channel with `d` Kraus operators: the adjoint blocks of a
/// Haar-like random isometry from `C^n` to `C^n ⊗ C^d`.
pub fn random_unital_channel<A: ChanScalar>(
    n: usize,
    d: usize,
    rng: &mut ChaCha8Rng,
) -> Result<KrausChannel<A>> {
    let g = random_complex_matrix::<A>(n * d, n, rng);
    let (q, _) = g.qr()?;
    let mut kraus = Vec::with_capacity(d);
    for k in 0..d {
        let mut block = Array2::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                block[(i, j)] = q[(k * n + i, j)];
            }
        }
        kraus.push(adjoint(&block));
    }
    let tol = KrausChannel::<A>::DEFAULT_UNITALITY_TOL.max(crate::scalar::validation_tol::<A>());
    KrausChannel::new(kraus, tol)
}

/// Invariant state of the predual as the spectral projection of the
/// maximally mixed state onto the fixed space.
pub fn cesaro_invariant_state<A: ChanScalar>(channel: &KrausChannel<A>) -> Result<DensityState<A>> {
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
    let rho = herm.mapv(|z| z / tr);
    DensityState::new(rho, crate::scalar::validation_tol::<A>())
}

/// Seeded random channel together with a faithful invariant state; instances
/// whose invariant state is close to singular are resampled.
pub fn random_faithful_pair<A: ChanScalar>(
    n: usize,
    d: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(KrausChannel<A>, DensityState<A>)> {
    for _ in 0..64 {
        let ch = random_unital_channel::<A>(n, d, rng)?;
        if let Ok(state) = cesaro_invariant_state(&ch) {
            if state.min_eigenvalue()? > A::real(1e-4)
                && state.invariance_residual(&ch)? < A::real(1e-9)
            {
                return Ok((ch, state));
            }
        }
    }
    Err(crate::error::Error::Eigensolver(
        "failed to sample a channel with a faithful invariant state".into(),
    ))
}

/// Like [`random_faithful_pair`], additionally resampling until the
/// subperipheral spectral radius is at most `max_radius`. Decay-series
/// verdicts iterate a fixed horizon, so ensembles probing them need a gap
/// large enough for the series to resolve within that horizon.
pub fn random_classifiable_pair<A: ChanScalar>(
    n: usize,
    d: usize,
    max_radius: f64,
    rng: &mut ChaCha8Rng,
) -> Result<(KrausChannel<A>, DensityState<A>)> {
    for _ in 0..64 {
        let (ch, st) = random_faithful_pair::<A>(n, d, rng)?;
        let spec = ch.spectrum(1e-8)?;
        if spec.subperipheral_radius() <= A::real(max_radius) {
            return Ok((ch, st));
        }
    }
    Err(crate::error::Error::Eigensolver(
        "failed to sample a channel with the requested spectral gap".into(),
    ))
}

/// A named channel with its canonical invariant state.
pub struct NamedChannel<A: ChanScalar> {
    pub name: &'static str,
    pub channel: KrausChannel<A>,
    pub state: DensityState<A>,
}

/// The named corpus: identity, classical 2-cycle, `{1,X}/√2` mixture, the
/// mixing random-unitary channel, and the collapse channel (the only one
/// whose invariant state is not faithful).
pub fn named_channel_corpus<A: ChanScalar>() -> Vec<NamedChannel<A>> {
    let mixed2 = DensityState::maximally_mixed(2);
    vec![
        NamedChannel {
            name: "identity",
            channel: identity_channel(2),
            state: mixed2.clone(),
        },
        NamedChannel {
            name: "two-cycle",
            channel: two_cycle_channel(),
            state: mixed2.clone(),
        },
        NamedChannel {
            name: "bitflip-mix",
            channel: bitflip_mix_channel(),
            state: mixed2.clone(),
        },
        NamedChannel {
            name: "mixing-random-unitary",
            channel: mixing_random_unitary_channel(),
            state: mixed2.clone(),
        },
        NamedChannel {
            name: "involution-mix",
            channel: involution_mix_channel(),
            state: mixed2,
        },
        NamedChannel {
            name: "collapse",
            channel: collapse_channel(),
            state: DensityState::pure(&basis_vector::<A>(2, 0)).expect("unit vector"),
        },
    ]
}

pub fn basis_vector<A: ChanScalar>(dim: usize, k: usize) -> Array1<A> {
    let mut v = Array1::zeros(dim);
    v[k] = A::one();
    v
}

/// Product tuple on a 1-dimensional corner: `l_k = a_k` with `Σ |a_k|² = 1`.
pub fn product_tuple<A: ChanScalar>(amplitudes: &[f64]) -> Result<PopescuTuple<A>> {
    let kraus = amplitudes
        .iter()
        .map(|&a| {
            let mut m = Array2::zeros((1, 1));
            m[(0, 0)] = A::complex(a, 0.0);
            m
        })
        .collect();
    let mut rho = Array2::zeros((1, 1));
    rho[(0, 0)] = A::one();
    PopescuTuple::new(kraus, DensityState::new(rho, 1e-10)?, 1e-9)
}

/// Classical 2-state Markov chain with transition matrix
/// `[[1−p, p], [q, 1−q]]`, encoded through the rows of the entrywise square
/// root: `l_k = e_k (√T row k)†`. The Heisenberg action restricted to the
/// diagonal subalgebra is exactly the classical transition operator, and the
/// window-marginal diagonal entries reproduce the stationary pair
/// probabilities.
pub fn classical_markov_tuple<A: ChanScalar>(p: f64, q: f64) -> Result<PopescuTuple<A>> {
    let t = [[1.0 - p, p], [q, 1.0 - q]];
    let mut kraus = Vec::with_capacity(2);
    for k in 0..2 {
        let mut m = Array2::zeros((2, 2));
        for b in 0..2 {
            m[(k, b)] = A::complex(t[k][b].sqrt(), 0.0);
        }
        kraus.push(m);
    }
    let channel = KrausChannel::with_default_tol(kraus.clone())?;
    let state = cesaro_invariant_state(&channel)?;
    PopescuTuple::new(kraus, state, 1e-9)
}

/// The `p = q = 1` instance: the corner channel is the classical 2-cycle.
pub fn two_periodic_tuple<A: ChanScalar>() -> Result<PopescuTuple<A>> {
    classical_markov_tuple(1.0, 1.0)
}

/// AKLT tuple: `l_k = σ_k / √3`, site dimension 3, transfer spectrum
/// `{1, −1/3, −1/3, −1/3}`.
pub fn aklt_tuple<A: ChanScalar>() -> Result<PopescuTuple<A>> {
    let s = A::from_real(A::real(1.0 / 3.0f64.sqrt()));
    let kraus = vec![pauli_x::<A>() * s, pauli_y::<A>() * s, pauli_z::<A>() * s];
    PopescuTuple::new(kraus, DensityState::maximally_mixed(2), 1e-9)
}

/// A named tuple fixture.
pub struct NamedTuple<A: ChanScalar> {
    pub name: &'static str,
    pub tuple: PopescuTuple<A>,
}

pub fn named_tuple_corpus<A: ChanScalar>() -> Result<Vec<NamedTuple<A>>> {
    Ok(vec![
        NamedTuple {
            name: "product-10",
            tuple: product_tuple(&[1.0, 0.0])?,
        },
        NamedTuple {
            name: "product-uniform",
            tuple: product_tuple(&[0.6, 0.8])?,
        },
        NamedTuple {
            name: "classical-markov",
            tuple: classical_markov_tuple(0.3, 0.2)?,
        },
        NamedTuple {
            name: "two-periodic",
            tuple: two_periodic_tuple()?,
        },
        NamedTuple {
            name: "aklt",
            tuple: aklt_tuple()?,
        },
    ])
}
