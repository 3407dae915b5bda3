//! Decision procedures for ergodicity, strong mixing, strong ergodicity and
//! the Kolmogorov two-point property.
//!
//! Every verdict is double-sourced: a spectral certificate (exact up to the
//! eigensolver) and a direct iteration, with disagreements surfaced rather
//! than averaged. When the invariant state is not faithful, classification
//! is defined as classification of the reduced corner channel, with the
//! `τ^m(p) → 1` condition reported separately.

use ndarray::Array2;
use num_traits::{Float, ToPrimitive, Zero};
use serde::Serialize;

use crate::channel::{DensityState, KrausChannel, SpectralData};
use crate::error::{Error, Result};
use crate::kms::ModularPair;
use crate::linalg::{eye, fro_norm, hermitian_basis, min_eig_herm, trace_norm};
use crate::scalar::ChanScalar;
use crate::structure::{faithful_corner, fixed_space_of, support_projection};
use crate::tol::Tolerances;

fn corner_pair<A: ChanScalar>(
    channel: &KrausChannel<A>,
    state: &DensityState<A>,
    tol: &Tolerances,
) -> Result<(KrausChannel<A>, DensityState<A>, bool)> {
    if state.faithful() {
        Ok((channel.clone(), state.clone(), false))
    } else {
        let corner = faithful_corner(channel, state, tol)?;
        Ok((corner.channel, corner.state, true))
    }
}

/// Verdict plus the fixed-space certificate.
#[derive(Clone, Debug, Serialize)]
pub struct ErgodicityReport<A: ChanScalar> {
    pub verdict: bool,
    pub fixed_dim: usize,
    /// Whether the verdict was computed on the reduced corner.
    pub reduced: bool,
    /// Orthonormal basis of the fixed space, the certificate behind the
    /// verdict.
    #[serde(skip)]
    pub fixed_basis: Vec<ndarray::Array2<A>>,
}

/// True iff the fixed-point space of the (corner) channel is the scalars.
pub fn is_ergodic<A: ChanScalar>(
    channel: &KrausChannel<A>,
    state: &DensityState<A>,
    tol: &Tolerances,
) -> Result<ErgodicityReport<A>> {
    let (ch, _, reduced) = corner_pair(channel, state, tol)?;
    let fixed = fixed_space_of(&ch.superoperator(), ch.dim(), tol)?;
    Ok(ErgodicityReport {
        verdict: fixed.span_dim() == 1,
        fixed_dim: fixed.span_dim(),
        reduced,
        fixed_basis: fixed.basis().to_vec(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct MixingReport<A: ChanScalar> {
    pub verdict: bool,
    /// Peripheral eigenvalues as (re, im) pairs.
    pub peripheral: Vec<(f64, f64)>,
    /// Residual of `‖τ^N(e) − φ₀(e)·1‖` over a Hermitian basis at the
    /// gap-derived iteration count.
    pub iterate_residual: f64,
    pub iterate_steps: usize,
    /// Direct iteration agrees with the spectral verdict.
    pub consistent: bool,
    pub reduced: bool,
    /// Full spectral data of the (corner) superoperator, the certificate
    /// behind the verdict.
    #[serde(skip)]
    pub spectral: Option<SpectralData<A>>,
}

/// True iff the peripheral spectrum of the (corner) superoperator is exactly
/// `{1}` with a one-dimensional eigenspace; cross-validated by iterating the
/// channel on a matrix basis.
pub fn is_mixing<A: ChanScalar>(
    channel: &KrausChannel<A>,
    state: &DensityState<A>,
    tol: &Tolerances,
) -> Result<MixingReport<A>> {
    let (ch, st, reduced) = corner_pair(channel, state, tol)?;
    let spec = ch.spectrum(tol.peripheral)?;
    let verdict = spec.peripheral_is_trivial();

    let steps = iteration_count::<A>(&spec, 1e-8)
        .min(4 * tol.horizon.max(1))
        .max(8);
    let mut worst = A::Real::zero();
    let id = eye::<A>(ch.dim());
    for e in hermitian_basis::<A>(ch.dim()) {
        let evolved = ch.apply_n(&e, steps)?;
        let target = id.mapv(|z| z * st.expectation(&e));
        worst = worst.max(fro_norm(&(&evolved - &target)));
    }
    let iterate_residual = worst.to_f64().unwrap_or(f64::NAN);
    let iterate_ok = iterate_residual < 1e-6;
    Ok(MixingReport {
        verdict,
        peripheral: peripheral_pairs(&spec),
        iterate_residual,
        iterate_steps: steps,
        consistent: iterate_ok == verdict,
        reduced,
        spectral: Some(spec),
    })
}

fn peripheral_pairs<A: ChanScalar>(spec: &SpectralData<A>) -> Vec<(f64, f64)> {
    let mut v: Vec<(f64, f64)> = spec
        .peripheral_eigenvalues()
        .iter()
        .map(|l| {
            (
                l.re().to_f64().unwrap_or(f64::NAN),
                l.im().to_f64().unwrap_or(f64::NAN),
            )
        })
        .collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    v
}

/// Number of steps after which a spectral gap `1 − r` contracts transients
/// below `target`.
fn iteration_count<A: ChanScalar>(spec: &SpectralData<A>, target: f64) -> usize {
    let r = spec.subperipheral_radius().to_f64().unwrap_or(1.0);
    if r <= 1e-14 {
        return 8;
    }
    if r >= 1.0 - 1e-12 {
        return 64;
    }
    (target.ln() / r.ln()).ceil().max(8.0) as usize
}

/// Both sides of the discrete-time mixing equivalence: (a) strong mixing,
/// (b) ergodicity together with trivial peripheral point spectrum.
#[derive(Clone, Debug, Serialize)]
pub struct EquivalenceReport<A: ChanScalar> {
    pub mixing: MixingReport<A>,
    pub ergodic: ErgodicityReport<A>,
    pub peripheral_trivial: bool,
    /// `mixing.verdict == (ergodic.verdict && peripheral_trivial)`.
    pub agree: bool,
}

/// Computes both sides of the mixing ⇔ (ergodic ∧ trivial peripheral
/// spectrum) equivalence and reports whether they agree. Disagreement is a
/// hard failure of the build, not a runtime error.
pub fn check_equivalence<A: ChanScalar>(
    channel: &KrausChannel<A>,
    state: &DensityState<A>,
    tol: &Tolerances,
) -> Result<EquivalenceReport<A>> {
    let mixing = is_mixing(channel, state, tol)?;
    let ergodic = is_ergodic(channel, state, tol)?;
    let (ch, _, _) = corner_pair(channel, state, tol)?;
    let spec = ch.spectrum(tol.peripheral)?;
    let peripheral_trivial = spec
        .peripheral_eigenvalues()
        .iter()
        .all(|l| (*l - A::one()).abs() <= A::real(tol.peripheral));
    let rhs = ergodic.verdict && peripheral_trivial;
    Ok(EquivalenceReport {
        agree: mixing.verdict == rhs,
        mixing,
        ergodic,
        peripheral_trivial,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DecayStatus {
    /// Iteration fell below the threshold and the spectral certificate
    /// agrees.
    Converged,
    /// Neither route claims convergence.
    NoDecay,
    /// The spectral certificate predicts convergence but the horizon was too
    /// short for the iteration; both findings are reported.
    HorizonTooShort,
    /// The iteration converged although the spectral certificate says it
    /// should not have.
    SpectralMismatch,
}

/// A decay verdict with its series and both certificates.
#[derive(Clone, Debug, Serialize)]
pub struct DecayReport {
    pub verdict: bool,
    pub spectral: bool,
    pub converged_at: Option<usize>,
    pub status: DecayStatus,
    pub series: Vec<f64>,
    pub threshold: f64,
}

impl DecayReport {
    fn from_series(series: Vec<f64>, spectral: bool, threshold: f64) -> Self {
        let converged_at = series.iter().position(|&v| v < threshold).map(|k| k + 1);
        let status = match (spectral, converged_at.is_some()) {
            (true, true) => DecayStatus::Converged,
            (false, false) => DecayStatus::NoDecay,
            (true, false) => DecayStatus::HorizonTooShort,
            (false, true) => DecayStatus::SpectralMismatch,
        };
        DecayReport {
            verdict: spectral && converged_at.is_some(),
            spectral,
            converged_at,
            status,
            series,
            threshold,
        }
    }
}

/// Deterministic grid of extreme input states: the computational basis, all
/// two-level superpositions with ±1 and ±i phases, plus the maximally mixed
/// state.
fn state_grid<A: ChanScalar>(n: usize) -> Vec<Array2<A>> {
    let mut grid = Vec::new();
    let mut push_pure = |v: ndarray::Array1<A>| {
        let norm: A::Real = v.iter().map(|z| z.square()).sum();
        let mut rho = Array2::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                rho[(i, j)] = v[i] * v[j].conj() / A::from_real(norm);
            }
        }
        grid.push(rho);
    };
    for i in 0..n {
        let mut v = ndarray::Array1::zeros(n);
        v[i] = A::one();
        push_pure(v);
    }
    for i in 0..n {
        for j in (i + 1)..n {
            for phase in [
                A::one(),
                -A::one(),
                A::complex(0.0, 1.0),
                A::complex(0.0, -1.0),
            ] {
                let mut v: ndarray::Array1<A> = ndarray::Array1::zeros(n);
                v[i] = A::one();
                v[j] = phase;
                push_pure(v);
            }
        }
    }
    grid.push(eye::<A>(n) * A::from_real(A::real(1.0 / n as f64)));
    grid
}

/// Strong ergodicity: `‖φ ∘ τ^m − φ₀‖ → 0` for every normal state, probed on
/// the extreme-point grid in trace norm and certified spectrally (unique
/// peripheral eigenvalue 1, everything else strictly inside the circle).
pub fn strong_ergodicity<A: ChanScalar>(
    channel: &KrausChannel<A>,
    state: &DensityState<A>,
    tol: &Tolerances,
) -> Result<DecayReport> {
    let res = state.invariance_residual(channel)?;
    if res > A::real(tol.invariance) {
        return Err(Error::StateNotInvariant {
            residual: res.to_f64().unwrap_or(f64::NAN),
        });
    }
    let spec = channel.spectrum(tol.peripheral)?;
    let spectral = spec.peripheral_is_trivial();

    let mut states = state_grid::<A>(channel.dim());
    let mut series = Vec::with_capacity(tol.horizon);
    for _ in 1..=tol.horizon {
        let mut worst = A::Real::zero();
        for st in states.iter_mut() {
            *st = channel.predual_apply(st)?;
            worst = worst.max(trace_norm(&(&*st - state.matrix())));
        }
        series.push(worst.to_f64().unwrap_or(f64::NAN));
        if *series.last().unwrap() < tol.decay * 1e-3 {
            break;
        }
    }
    Ok(DecayReport::from_series(series, spectral, tol.decay))
}

/// The Kolmogorov two-point series
/// `K(m) = max_{x,y} |φ₀(τ^m(x) τ^m(y)) − φ₀(x) φ₀(y)|` over a Hermitian
/// orthonormal basis, evaluated on the faithful corner. The verdict is
/// cross-checked against strong ergodicity of the KMS-adjoint channel
/// (the duality shortcut); a mismatch surfaces in `duality_agrees`.
#[derive(Clone, Debug, Serialize)]
pub struct KolmogorovReport {
    pub decay: DecayReport,
    pub duality_agrees: bool,
    pub reduced: bool,
}

pub fn kolmogorov_two_point<A: ChanScalar>(
    channel: &KrausChannel<A>,
    state: &DensityState<A>,
    tol: &Tolerances,
) -> Result<KolmogorovReport> {
    let (ch, st, reduced) = corner_pair(channel, state, tol)?;
    let decay = kolmogorov_series(&ch, &st, tol)?;

    let pair = ModularPair::new(ch.clone(), st.clone(), tol)?;
    let adjoint_channel = pair.kms_adjoint()?;
    let dual = strong_ergodicity(&adjoint_channel, &st, tol)?;
    Ok(KolmogorovReport {
        duality_agrees: decay.verdict == dual.verdict,
        decay,
        reduced,
    })
}

/// The raw two-point series on a channel whose state is already faithful.
pub fn kolmogorov_series<A: ChanScalar>(
    channel: &KrausChannel<A>,
    state: &DensityState<A>,
    tol: &Tolerances,
) -> Result<DecayReport> {
    let spec = channel.spectrum(tol.peripheral)?;
    let spectral = spec.peripheral_is_trivial();

    let basis = hermitian_basis::<A>(channel.dim());
    let expectations: Vec<A> = basis.iter().map(|b| state.expectation(b)).collect();
    let mut evolved: Vec<Array2<A>> = basis.clone();
    let mut series = Vec::with_capacity(tol.horizon);
    for _ in 1..=tol.horizon {
        for e in evolved.iter_mut() {
            *e = channel.apply(e)?;
        }
        let mut worst = A::Real::zero();
        for (i, x) in evolved.iter().enumerate() {
            for (j, y) in evolved.iter().enumerate() {
                let two_point = state.expectation(&x.dot(y));
                let product = expectations[i] * expectations[j];
                worst = worst.max((two_point - product).abs());
            }
        }
        series.push(worst.to_f64().unwrap_or(f64::NAN));
        if *series.last().unwrap() < tol.decay * 1e-3 {
            break;
        }
    }
    Ok(DecayReport::from_series(series, spectral, tol.decay))
}

/// Multiplicativity defect `max_{i,j} ‖τ(e_i e_j) − τ(e_i) τ(e_j)‖` over the
/// matrix-unit basis; zero exactly for *-endomorphisms.
pub fn endomorphism_defect<A: ChanScalar>(channel: &KrausChannel<A>) -> Result<f64> {
    let basis = crate::linalg::matrix_unit_basis::<A>(channel.dim());
    let images: Vec<Array2<A>> = basis
        .iter()
        .map(|e| channel.apply(e))
        .collect::<Result<_>>()?;
    let mut worst = A::Real::zero();
    for (i, ei) in basis.iter().enumerate() {
        for (j, ej) in basis.iter().enumerate() {
            let lhs = channel.apply(&ei.dot(ej))?;
            let rhs = images[i].dot(&images[j]);
            worst = worst.max(fro_norm(&(&lhs - &rhs)));
        }
    }
    Ok(worst.to_f64().unwrap_or(f64::NAN))
}

pub fn is_endomorphism<A: ChanScalar>(channel: &KrausChannel<A>, tol: &Tolerances) -> Result<bool> {
    Ok(endomorphism_defect(channel)? <= tol.algebra.max(1e-8))
}

/// Whether `τ^m(p) → 1` for the support projection of the invariant state,
/// iterated up to the horizon.
pub fn support_reaches_identity<A: ChanScalar>(
    channel: &KrausChannel<A>,
    state: &DensityState<A>,
    tol: &Tolerances,
) -> Result<bool> {
    let p = support_projection(state)?;
    let mut current = p.matrix().clone();
    for _ in 0..tol.horizon {
        let gap = min_eig_herm(&(&eye::<A>(channel.dim()) - &current))?;
        if gap < A::real(1e-7) {
            return Ok(true);
        }
        current = channel.apply(&current)?;
    }
    Ok(false)
}

/// Peripheral point spectrum of the (corner) channel together with the group
/// checks of the faithful-state case: closure under multiplication and
/// conjugation, and the cyclic-group structure.
#[derive(Clone, Debug, Serialize)]
pub struct PeripheralGroupReport {
    pub eigenvalues: Vec<(f64, f64)>,
    pub closed_under_product: bool,
    pub cyclic: bool,
    pub order: usize,
}

pub fn peripheral_group<A: ChanScalar>(
    channel: &KrausChannel<A>,
    tol: &Tolerances,
) -> Result<PeripheralGroupReport> {
    let spec = channel.spectrum(tol.peripheral)?;
    let eigs = spec.peripheral_eigenvalues();
    let close = |a: f64, b: f64| {
        ((a - b + std::f64::consts::PI).rem_euclid(2.0 * std::f64::consts::PI)
            - std::f64::consts::PI)
            .abs()
            < 1e-6
    };
    // group structure is a property of the set of eigenvalues, so collapse
    // multiplicities first
    let mut angles: Vec<f64> = Vec::new();
    for l in &eigs {
        let theta = l
            .im()
            .to_f64()
            .unwrap_or(0.0)
            .atan2(l.re().to_f64().unwrap_or(1.0));
        if !angles.iter().any(|&a| close(a, theta)) {
            angles.push(theta);
        }
    }
    let contains = |theta: f64| angles.iter().any(|&a| close(a, theta));
    let mut closed = true;
    for &a in &angles {
        if !contains(-a) {
            closed = false;
        }
        for &b in &angles {
            if !contains(a + b) {
                closed = false;
            }
        }
    }
    let order = angles.len();
    // a finite subgroup of the circle is cyclic, generated by 2π/order
    let mut cyclic = closed;
    if closed {
        let step = 2.0 * std::f64::consts::PI / order as f64;
        for k in 0..order {
            if !contains(step * k as f64) {
                cyclic = false;
            }
        }
    }
    Ok(PeripheralGroupReport {
        eigenvalues: peripheral_pairs(&spec),
        closed_under_product: closed,
        cyclic,
        order,
    })
}

/// Full classification report for the CLI.
#[derive(Clone, Debug, Serialize)]
pub struct ClassifyReport {
    pub ergodic: bool,
    pub mixing: bool,
    pub strong_ergodic: bool,
    pub kolmogorov: bool,
    pub peripheral_eigenvalues: Vec<(f64, f64)>,
    pub equivalence_agrees: bool,
    pub duality_agrees: bool,
    pub reduced_to_corner: bool,
    pub support_rank: usize,
    pub support_reaches_identity: Option<bool>,
    pub kolmogorov_series: Vec<f64>,
    pub strong_ergodicity_series: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decay_series_csv_path: Option<String>,
}

pub fn classify<A: ChanScalar>(
    channel: &KrausChannel<A>,
    state: &DensityState<A>,
    tol: &Tolerances,
) -> Result<ClassifyReport> {
    let equivalence = check_equivalence(channel, state, tol)?;
    let strong = strong_ergodicity(channel, state, tol)?;
    let kolmogorov = kolmogorov_two_point(channel, state, tol)?;
    let (ch_corner, _, reduced) = corner_pair(channel, state, tol)?;
    let spec = ch_corner.spectrum(tol.peripheral)?;
    let support = support_projection(state)?;
    let reaches = if reduced {
        Some(support_reaches_identity(channel, state, tol)?)
    } else {
        None
    };
    Ok(ClassifyReport {
        ergodic: equivalence.ergodic.verdict,
        mixing: equivalence.mixing.verdict,
        strong_ergodic: strong.verdict,
        kolmogorov: kolmogorov.decay.verdict,
        peripheral_eigenvalues: peripheral_pairs(&spec),
        equivalence_agrees: equivalence.agree,
        duality_agrees: kolmogorov.duality_agrees,
        reduced_to_corner: reduced,
        support_rank: support.rank(),
        support_reaches_identity: reaches,
        kolmogorov_series: kolmogorov.decay.series.clone(),
        strong_ergodicity_series: strong.series.clone(),
        decay_series_csv_path: None,
    })
}
