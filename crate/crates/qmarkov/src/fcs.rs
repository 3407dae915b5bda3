//! Translation-invariant spin-chain states from Popescu tuples.
//!
//! A [`PopescuTuple`] is a family `l_1..l_d` of corner operators with
//! `Σ_k l_k l_k† = 1` and a faithful state `ρ` fixed by `Σ_k l_k† · l_k`.
//! It generates a translation-invariant state on the two-sided chain through
//! `ω(matrix unit e_I ⊗ e_J†) = tr(ρ l_I l_J†)`; the corner channel's
//! superoperator is the transfer operator whose spectrum controls
//! correlation decay, factoriality and the purity criterion.

use ndarray::Array2;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::channel::{DensityState, KrausChannel};
use crate::classify::{
    kolmogorov_two_point, peripheral_group, strong_ergodicity, DecayReport, KolmogorovReport,
    PeripheralGroupReport,
};
use crate::error::{Error, Result};
use crate::linalg::{adjoint, eye, fro_norm, hermitian_basis, trace};
use crate::scalar::ChanScalar;
use crate::structure::support_projection;
use crate::tol::Tolerances;

/// Corner operators and faithful invariant state generating a finitely
/// correlated chain state.
#[derive(Clone, Debug)]
pub struct PopescuTuple<A: ChanScalar> {
    corner_dim: usize,
    site_dim: usize,
    kraus: Vec<Array2<A>>,
    state: DensityState<A>,
}

impl<A: ChanScalar> PopescuTuple<A> {
    pub fn new(kraus: Vec<Array2<A>>, state: DensityState<A>, unitality_tol: f64) -> Result<Self> {
        let channel = KrausChannel::new(kraus, unitality_tol)?;
        if channel.dim() != state.dim() {
            return Err(Error::DimensionMismatch {
                expected: channel.dim(),
                found: state.dim(),
            });
        }
        let res = state.invariance_residual(&channel)?;
        if res > A::real(1e-8) {
            return Err(Error::StateNotInvariant {
                residual: res.to_f64().unwrap_or(f64::NAN),
            });
        }
        if !state.faithful() {
            return Err(Error::StateNotFaithful {
                min_eig: state.min_eigenvalue()?.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(PopescuTuple {
            corner_dim: channel.dim(),
            site_dim: channel.kraus().len(),
            kraus: channel.kraus().to_vec(),
            state,
        })
    }

    pub fn corner_dim(&self) -> usize {
        self.corner_dim
    }

    pub fn site_dim(&self) -> usize {
        self.site_dim
    }

    pub fn kraus(&self) -> &[Array2<A>] {
        &self.kraus
    }

    pub fn state(&self) -> &DensityState<A> {
        &self.state
    }

    pub fn corner_channel(&self) -> KrausChannel<A> {
        KrausChannel::with_default_tol(self.kraus.clone()).expect("validated at construction")
    }
}

/// Compresses a raw (not necessarily faithful) tuple to the support of its
/// invariant state, checking the corner identity `(1−Q) l_k† Q = 0` on the
/// way.
pub fn support_reduce<A: ChanScalar>(
    raw_kraus: Vec<Array2<A>>,
    raw_state: &DensityState<A>,
    tol: &Tolerances,
) -> Result<PopescuTuple<A>> {
    let channel = KrausChannel::new(raw_kraus, tol.unitality)?;
    let res = raw_state.invariance_residual(&channel)?;
    if res > A::real(tol.invariance) {
        return Err(Error::StateNotInvariant {
            residual: res.to_f64().unwrap_or(f64::NAN),
        });
    }
    if raw_state.faithful() {
        return PopescuTuple::new(channel.kraus().to_vec(), raw_state.clone(), tol.unitality);
    }
    let q = support_projection(raw_state)?;
    let n = channel.dim();
    let one_minus_q = &eye::<A>(n) - q.matrix();
    for l in channel.kraus() {
        let defect = fro_norm(&one_minus_q.dot(&adjoint(l)).dot(q.matrix()));
        if defect > A::real(1e-8) {
            return Err(Error::Eigensolver(format!(
                "support is not absorbing: ‖(1−Q) l† Q‖ = {:?}",
                defect.to_f64()
            )));
        }
    }
    let w = q.isometry()?;
    let corner_kraus: Vec<Array2<A>> = channel
        .kraus()
        .iter()
        .map(|l| adjoint(&w).dot(l).dot(&w))
        .collect();
    let rho = adjoint(&w).dot(raw_state.matrix()).dot(&w);
    let corner_state = DensityState::new(rho, 1e-8)?;
    PopescuTuple::new(corner_kraus, corner_state, tol.unitality.max(1e-9))
}

fn checked_window_dim(site_dim: usize, window: usize, budget: usize) -> Result<usize> {
    let mut dim = 1usize;
    for _ in 0..window {
        dim = dim.checked_mul(site_dim).ok_or(Error::BudgetExceeded {
            required: usize::MAX,
            cap: budget,
        })?;
        if dim > budget {
            return Err(Error::BudgetExceeded {
                required: dim,
                cap: budget,
            });
        }
    }
    Ok(dim)
}

/// All ordered products `l_I` for `|I| = window`, in lexicographic order
/// with site 1 as the most significant index.
fn word_products<A: ChanScalar>(tuple: &PopescuTuple<A>, window: usize) -> Vec<Array2<A>> {
    let mut products = vec![eye::<A>(tuple.corner_dim)];
    for _ in 0..window {
        let mut next = Vec::with_capacity(products.len() * tuple.site_dim);
        for p in &products {
            for l in &tuple.kraus {
                next.push(p.dot(l));
            }
        }
        products = next;
    }
    products
}

/// Window marginal `M[I, J] = tr(ρ l_I l_J†)` on `(C^d)^{⊗window}`.
pub fn chain_marginal<A: ChanScalar>(
    tuple: &PopescuTuple<A>,
    window: usize,
    tol: &Tolerances,
) -> Result<DensityState<A>> {
    let dim = checked_window_dim(tuple.site_dim, window, tol.budget)?;
    let words = word_products(tuple, window);
    let rho = tuple.state.matrix();
    let weighted: Vec<Array2<A>> = words.iter().map(|l| rho.dot(l)).collect();
    let mut m = Array2::zeros((dim, dim));
    for (i, _) in words.iter().enumerate() {
        for (j, lj) in words.iter().enumerate() {
            // tr(ρ l_I l_J†) = Σ_ab (ρ l_I)[a,b] conj(l_J[a,b])
            let mut acc = A::zero();
            for (p, q) in weighted[i].iter().zip(lj.iter()) {
                acc += *p * q.conj();
            }
            m[(i, j)] = acc;
        }
    }
    DensityState::new(m, 1e-8)
}

/// Residuals of the left and right consistency conditions: tracing out the
/// first or last site of the `window`-marginal reproduces the
/// `(window−1)`-marginal.
pub fn marginal_consistency<A: ChanScalar>(
    tuple: &PopescuTuple<A>,
    window: usize,
    tol: &Tolerances,
) -> Result<(f64, f64)> {
    if window == 0 {
        return Ok((0.0, 0.0));
    }
    let d = tuple.site_dim;
    let big = chain_marginal(tuple, window, tol)?;
    let small = chain_marginal(tuple, window - 1, tol)?;
    let sub = small.matrix();
    let dim_small = sub.nrows();
    let mbig = big.matrix();

    let mut last = Array2::<A>::zeros((dim_small, dim_small));
    for i in 0..dim_small {
        for j in 0..dim_small {
            for k in 0..d {
                last[(i, j)] += mbig[(i * d + k, j * d + k)];
            }
        }
    }
    let mut first = Array2::<A>::zeros((dim_small, dim_small));
    for i in 0..dim_small {
        for j in 0..dim_small {
            for k in 0..d {
                first[(i, j)] += mbig[(k * dim_small + i, k * dim_small + j)];
            }
        }
    }
    let right = fro_norm(&(&last - sub)).to_f64().unwrap_or(f64::NAN);
    let left = fro_norm(&(&first - sub)).to_f64().unwrap_or(f64::NAN);
    Ok((left, right))
}

fn window_of<A: ChanScalar>(tuple: &PopescuTuple<A>, observable: &Array2<A>) -> Result<usize> {
    let d = tuple.site_dim;
    let mut dim = observable.nrows();
    if dim != observable.ncols() {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: observable.ncols(),
        });
    }
    let mut w = 0;
    while dim > 1 {
        if !dim.is_multiple_of(d) {
            return Err(Error::InvalidInput(format!(
                "observable dimension {} is not a power of the site dimension {}",
                observable.nrows(),
                d
            )));
        }
        dim /= d;
        w += 1;
    }
    Ok(w)
}

/// `E_X(B) = Σ_{I,J} X[I,J] l_I B l_J†` for a window observable `X`.
fn window_insertion<A: ChanScalar>(
    tuple: &PopescuTuple<A>,
    observable: &Array2<A>,
    window: usize,
    b: &Array2<A>,
) -> Array2<A> {
    let words = word_products(tuple, window);
    let n = tuple.corner_dim;
    let mut out = Array2::zeros((n, n));
    for (i, li) in words.iter().enumerate() {
        for (j, lj) in words.iter().enumerate() {
            let x = observable[(i, j)];
            if x.abs() > A::Real::zero() {
                out = out + li.dot(b).dot(&adjoint(lj)).mapv(|z| z * x);
            }
        }
    }
    out
}

/// One correlation series `c_n = |ω(x λ_n(y)) − ω(x) ω(y)|`.
#[derive(Clone, Debug, Serialize)]
pub struct CorrelationSeries {
    /// `(n, c_n)` for `n` from the width of `x` up to `n_max`.
    pub series: Vec<(usize, f64)>,
    /// Log-linear decay rate fitted on the second half of the series, with
    /// its residual; informational only.
    pub fitted_rate: Option<(f64, f64)>,
    /// Second-largest eigenvalue modulus of the transfer operator.
    pub second_eigenvalue_modulus: f64,
}

/// Transfer-operator contraction of the two-point function: `n` counts the
/// shift applied to `y`, so the first admissible value is the width of `x`.
pub fn correlation_decay<A: ChanScalar>(
    tuple: &PopescuTuple<A>,
    x: &Array2<A>,
    y: &Array2<A>,
    n_max: usize,
    tol: &Tolerances,
) -> Result<CorrelationSeries> {
    let wx = window_of(tuple, x)?;
    let wy = window_of(tuple, y)?;
    checked_window_dim(tuple.site_dim, wx.max(wy), tol.budget)?;
    let channel = tuple.corner_channel();
    let rho = tuple.state.matrix();
    let id = eye::<A>(tuple.corner_dim);

    let ey = window_insertion(tuple, y, wy, &id);
    let mean_x = trace(&rho.dot(&window_insertion(tuple, x, wx, &id)));
    let mean_y = trace(&rho.dot(&ey));

    let mut series = Vec::new();
    let mut inner = ey;
    for n in wx..=n_max.max(wx) {
        // at n = wx the windows are adjacent: zero transfer powers between
        let correlated = trace(&rho.dot(&window_insertion(tuple, x, wx, &inner)));
        let c = (correlated - mean_x * mean_y)
            .abs()
            .to_f64()
            .unwrap_or(f64::NAN);
        series.push((n, c));
        inner = channel.apply(&inner)?;
    }

    let spec = channel.spectrum(tol.peripheral)?;
    let mut mods: Vec<f64> = spec
        .eigenvalues
        .iter()
        .map(|l| l.abs().to_f64().unwrap_or(0.0))
        .collect();
    mods.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let second = mods.get(1).copied().unwrap_or(0.0);

    let fitted_rate = fit_rate(&series);
    Ok(CorrelationSeries {
        series,
        fitted_rate,
        second_eigenvalue_modulus: second,
    })
}

/// Least-squares slope of `ln c_n` over the second half of the series.
fn fit_rate(series: &[(usize, f64)]) -> Option<(f64, f64)> {
    let tail: Vec<(f64, f64)> = series[series.len() / 2..]
        .iter()
        .filter(|(_, c)| *c > 1e-280)
        .map(|(n, c)| (*n as f64, c.ln()))
        .collect();
    if tail.len() < 3 {
        return None;
    }
    let n = tail.len() as f64;
    let sx: f64 = tail.iter().map(|(x, _)| x).sum();
    let sy: f64 = tail.iter().map(|(_, y)| y).sum();
    let sxx: f64 = tail.iter().map(|(x, _)| x * x).sum();
    let sxy: f64 = tail.iter().map(|(x, y)| x * y).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-12 {
        return None;
    }
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let resid = tail
        .iter()
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum::<f64>()
        .sqrt();
    Some((slope.exp(), resid))
}

/// Factoriality of the chain state: strong ergodicity of the corner channel,
/// cross-checked against direct cluster decay on one-site observables.
#[derive(Clone, Debug, Serialize)]
pub struct FactorReport {
    pub verdict: bool,
    pub strong_ergodicity: DecayReport,
    /// Sup over one-site basis pairs of the final cluster value.
    pub final_cluster_sup: f64,
    /// Direct cluster decay agrees with the strong-ergodicity verdict.
    pub cluster_agrees: bool,
}

pub fn factor_test<A: ChanScalar>(
    tuple: &PopescuTuple<A>,
    tol: &Tolerances,
) -> Result<FactorReport> {
    let channel = tuple.corner_channel();
    let strong = strong_ergodicity(&channel, &tuple.state, tol)?;

    let d = tuple.site_dim;
    let site_basis = hermitian_basis::<A>(d);
    let n_max = 64usize;
    let mut sup = 0.0f64;
    for x in &site_basis {
        for y in &site_basis {
            let series = correlation_decay(tuple, x, y, n_max, tol)?;
            let last = series.series.last().map(|(_, c)| *c).unwrap_or(0.0);
            sup = sup.max(last);
        }
    }
    let cluster_decayed = sup < tol.decay;
    Ok(FactorReport {
        verdict: strong.verdict,
        cluster_agrees: cluster_decayed == strong.verdict,
        strong_ergodicity: strong,
        final_cluster_sup: sup,
    })
}

/// Purity criterion for the translation-invariant chain state: the
/// Kolmogorov two-point property of the corner channel. The criterion is
/// sufficient, so a failed check reports "no conclusion", not impurity.
#[derive(Clone, Debug, Serialize)]
pub struct PurityReport {
    pub criterion_met: bool,
    pub conclusion: &'static str,
    /// Scope of the criterion: it is sufficient for purity; necessity is
    /// known only for lattice-symmetric states and is not decided here.
    pub note: &'static str,
    pub kolmogorov: KolmogorovReport,
}

pub fn purity_test<A: ChanScalar>(
    tuple: &PopescuTuple<A>,
    tol: &Tolerances,
) -> Result<PurityReport> {
    let channel = tuple.corner_channel();
    let kolmogorov = kolmogorov_two_point(&channel, &tuple.state, tol)?;
    let criterion_met = kolmogorov.decay.verdict;
    Ok(PurityReport {
        criterion_met,
        conclusion: if criterion_met {
            "criterion met: the chain state is pure"
        } else {
            "criterion not met: no purity conclusion"
        },
        note: "the two-point criterion is sufficient for purity; necessity is known only under lattice symmetry and is not decided here",
        kolmogorov,
    })
}

/// Peripheral point spectrum of the corner channel with its group structure;
/// reported alongside the gauge-stabilizer subgroup it shadows.
pub fn gauge_peripheral_group<A: ChanScalar>(
    tuple: &PopescuTuple<A>,
    tol: &Tolerances,
) -> Result<GaugeReport> {
    Ok(GaugeReport {
        group: peripheral_group(&tuple.corner_channel(), tol)?,
        note: "computable surrogate for the gauge stabilizer subgroup; the two are reported side by side, not equated",
    })
}

/// Peripheral group of the corner channel plus the informational relation
/// to the gauge stabilizer.
#[derive(Clone, Debug, Serialize)]
pub struct GaugeReport {
    #[serde(flatten)]
    pub group: PeripheralGroupReport,
    pub note: &'static str,
}

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

    #[test]
    fn product_tuple_marginal_is_pure_product() {
        let tuple = corpus::product_tuple::<C64>(&[1.0, 0.0]).unwrap();
        let m = chain_marginal(&tuple, 3, &tols()).unwrap();
        let rho = m.matrix();
        assert!((rho[(0, 0)] - c(1.0, 0.0)).abs() < 1e-14);
        for i in 1..8 {
            assert!(rho[(i, i)].abs() < 1e-14);
        }
    }

    #[test]
    fn classical_markov_pair_probabilities() {
        let (p, q) = (0.3, 0.2);
        let tuple = corpus::classical_markov_tuple::<C64>(p, q).unwrap();
        let m = chain_marginal(&tuple, 2, &tols()).unwrap();
        // classical oracle: stationary distribution of [[1−p, p], [q, 1−q]]
        let pi = [q / (p + q), p / (p + q)];
        let t = [[1.0 - p, p], [q, 1.0 - q]];
        for i in 0..2 {
            #[allow(clippy::needless_range_loop)]
            for j in 0..2 {
                let idx = i * 2 + j;
                let expect = pi[i] * t[i][j];
                assert!(
                    (m.matrix()[(idx, idx)] - c(expect, 0.0)).abs() < 1e-12,
                    "pair ({i},{j})"
                );
            }
        }
        // window 3 against the chain's triple probabilities
        let m3 = chain_marginal(&tuple, 3, &tols()).unwrap();
        for i in 0..2 {
            #[allow(clippy::needless_range_loop)]
            for j in 0..2 {
                for k in 0..2 {
                    let idx = (i * 2 + j) * 2 + k;
                    let expect = pi[i] * t[i][j] * t[j][k];
                    assert!((m3.matrix()[(idx, idx)] - c(expect, 0.0)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn marginals_are_consistent() {
        let tol = tols();
        for item in corpus::named_tuple_corpus::<C64>().unwrap() {
            for w in 1..=4 {
                let (l, r) = marginal_consistency(&item.tuple, w, &tol).unwrap();
                assert!(
                    l < 1e-10 && r < 1e-10,
                    "{} window {}: {l} {r}",
                    item.name,
                    w
                );
            }
        }
    }

    #[test]
    fn aklt_transfer_spectrum() {
        let tuple = corpus::aklt_tuple::<C64>().unwrap();
        let spec = tuple.corner_channel().spectrum(1e-8).unwrap();
        let mut eigs: Vec<f64> = spec.eigenvalues.iter().map(|l| l.re).collect();
        for l in &spec.eigenvalues {
            assert!(l.im.abs() < 1e-10);
        }
        eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let expect = [-1.0 / 3.0, -1.0 / 3.0, -1.0 / 3.0, 1.0];
        for (a, b) in eigs.iter().zip(expect.iter()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn aklt_correlation_decays_at_rate_three() {
        let tuple = corpus::aklt_tuple::<C64>().unwrap();
        let sz = corpus::spin1_sz_cartesian::<C64>();
        let series = correlation_decay(&tuple, &sz, &sz, 20, &tols()).unwrap();
        // c_n ∝ (1/3)^n: consecutive ratios sit at 3
        for w in series.series.windows(2) {
            let (_, c0) = w[0];
            let (_, c1) = w[1];
            assert!(c1 > 0.0);
            assert!((c0 / c1 - 3.0).abs() < 0.01 * 3.0, "ratio {}", c0 / c1);
        }
        let (rate, _) = series.fitted_rate.unwrap();
        assert!((rate - 1.0 / 3.0).abs() < 1e-3);
        assert!((series.second_eigenvalue_modulus - 1.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn aklt_adjacent_correlation_agrees_between_routes() {
        // two independent routes to ⟨Sz(1) Sz(2)⟩: the window-2 marginal
        // and the transfer contraction. The value itself is −4/9 (singlet
        // fraction 1/3 on adjacent sites).
        let tol = tols();
        let tuple = corpus::aklt_tuple::<C64>().unwrap();
        let sz = corpus::spin1_sz_cartesian::<C64>();
        let marg = chain_marginal(&tuple, 2, &tol).unwrap();
        let szsz = crate::linalg::kron(&sz, &sz);
        // the marginal follows M[I,J] = tr(ρ l_I l_J†) = ω(|e_I⟩⟨e_J|), so
        // expectations contract as Σ_IJ M[I,J] X[I,J]
        let mut via_marginal = C64::new(0.0, 0.0);
        for i in 0..9 {
            for j in 0..9 {
                via_marginal += marg.matrix()[(i, j)] * szsz[(i, j)];
            }
        }
        let series = correlation_decay(&tuple, &sz, &sz, 3, &tol).unwrap();
        let (n1, c1) = series.series[0];
        assert_eq!(n1, 1);
        assert!((via_marginal - C64::new(-4.0 / 9.0, 0.0)).abs() < 1e-12);
        // Sz has zero mean, so c_1 = |⟨Sz Sz⟩| on adjacent sites
        assert!((c1 - 4.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn two_site_window_observables_contract() {
        // the 2-site SzSz block has even parity, so its connected
        // correlations vanish identically for the AKLT tuple
        let tol = tols();
        let tuple = corpus::aklt_tuple::<C64>().unwrap();
        let sz = corpus::spin1_sz_cartesian::<C64>();
        let szsz = crate::linalg::kron(&sz, &sz);
        let series = correlation_decay(&tuple, &szsz, &szsz, 8, &tol).unwrap();
        assert_eq!(series.series[0].0, 2);
        for (_, cn) in &series.series {
            assert!(*cn < 1e-12, "got {cn}");
        }
    }

    #[test]
    fn product_tuple_has_zero_correlations() {
        let tuple = corpus::product_tuple::<C64>(&[0.6, 0.8]).unwrap();
        let x = corpus::pauli_z::<C64>();
        let series = correlation_decay(&tuple, &x, &x, 10, &tols()).unwrap();
        for (_, cn) in &series.series {
            assert!(*cn < 1e-13);
        }
    }

    #[test]
    fn two_periodic_correlations_do_not_decay() {
        let tuple = corpus::two_periodic_tuple::<C64>().unwrap();
        let z = corpus::pauli_z::<C64>();
        let series = correlation_decay(&tuple, &z, &z, 12, &tols()).unwrap();
        // hand oracle: the chain alternates deterministically, so the
        // centered correlation of the site parity observable has constant
        // modulus 1
        for (_, cn) in &series.series {
            assert!((cn - 1.0).abs() < 1e-10, "got {cn}");
        }
    }

    #[test]
    fn factor_examples() {
        let tol = tols();
        let rep = factor_test(&corpus::product_tuple::<C64>(&[0.6, 0.8]).unwrap(), &tol).unwrap();
        assert!(rep.verdict && rep.cluster_agrees);

        let rep = factor_test(&corpus::aklt_tuple::<C64>().unwrap(), &tol).unwrap();
        assert!(rep.verdict && rep.cluster_agrees);

        // direct sum of two inequivalent product tuples: fixed space dim ≥ 2
        let k1 = array![[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.0, 0.0)]];
        let k2 = array![[c(0.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]];
        let tuple =
            PopescuTuple::new(vec![k1, k2], DensityState::maximally_mixed(2), 1e-9).unwrap();
        let rep = factor_test(&tuple, &tol).unwrap();
        assert!(!rep.verdict && rep.cluster_agrees);
    }

    #[test]
    fn purity_examples() {
        let tol = tols();
        assert!(
            purity_test(&corpus::product_tuple::<C64>(&[1.0, 0.0]).unwrap(), &tol)
                .unwrap()
                .criterion_met
        );
        assert!(
            purity_test(&corpus::aklt_tuple::<C64>().unwrap(), &tol)
                .unwrap()
                .criterion_met
        );
        let rep = purity_test(&corpus::two_periodic_tuple::<C64>().unwrap(), &tol).unwrap();
        assert!(!rep.criterion_met);
        assert!(rep.conclusion.contains("no purity conclusion"));
        assert!(rep.kolmogorov.duality_agrees);
    }

    #[test]
    fn gauge_group_examples() {
        let tol = tols();
        let rep = gauge_peripheral_group(&corpus::aklt_tuple::<C64>().unwrap(), &tol).unwrap();
        assert_eq!(rep.group.order, 1);
        let rep =
            gauge_peripheral_group(&corpus::two_periodic_tuple::<C64>().unwrap(), &tol).unwrap();
        assert_eq!(rep.group.order, 2);
        assert!(rep.group.cyclic);
        let rep = gauge_peripheral_group(&corpus::product_tuple::<C64>(&[0.6, 0.8]).unwrap(), &tol)
            .unwrap();
        assert_eq!(rep.group.order, 1);
    }

    #[test]
    fn support_reduce_examples() {
        let tol = tols();
        // already faithful: unchanged corner dimension
        let tuple = corpus::classical_markov_tuple::<C64>(0.3, 0.2).unwrap();
        let reduced = support_reduce(tuple.kraus().to_vec(), tuple.state(), &tol).unwrap();
        assert_eq!(reduced.corner_dim(), 2);

        // collapse tuple with state |0><0| reduces to the scalar tuple (1, 0)
        let ch = corpus::collapse_channel::<C64>();
        let st = DensityState::<C64>::pure(&corpus::basis_vector(2, 0)).unwrap();
        let reduced = support_reduce(ch.kraus().to_vec(), &st, &tol).unwrap();
        assert_eq!(reduced.corner_dim(), 1);
        assert!((reduced.kraus()[0][(0, 0)] - c(1.0, 0.0)).abs() < 1e-12);
        assert!(reduced.kraus()[1][(0, 0)].abs() < 1e-12);

        // block tuple with state on one block reduces to that block
        let k1 = array![[c(0.6, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.0, 0.0)]];
        let k2 = array![[c(0.8, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]];
        let st = DensityState::<C64>::pure(&corpus::basis_vector(2, 0)).unwrap();
        let reduced = support_reduce(vec![k1, k2], &st, &tol).unwrap();
        assert_eq!(reduced.corner_dim(), 1);
        assert!((reduced.kraus()[0][(0, 0)] - c(0.6, 0.0)).abs() < 1e-12);
        assert!((reduced.kraus()[1][(0, 0)] - c(0.8, 0.0)).abs() < 1e-12);
    }

    #[test]
    fn endomorphism_corner_blocks_purity_criterion() {
        // the finite shadow of the Cuntz KMS example: a corner channel that
        // is an endomorphism with faithful state and dim > 1 never meets the
        // purity criterion
        let tol = tols();
        let u = corpus::hadamard::<C64>();
        let tuple = PopescuTuple::new(vec![u], DensityState::maximally_mixed(2), 1e-9).unwrap();
        assert!(crate::classify::is_endomorphism(&tuple.corner_channel(), &tol).unwrap());
        let rep = purity_test(&tuple, &tol).unwrap();
        assert!(!rep.criterion_met);
    }

    #[test]
    fn non_faithful_tuple_is_rejected() {
        let ch = corpus::collapse_channel::<C64>();
        let st = DensityState::<C64>::pure(&corpus::basis_vector(2, 0)).unwrap();
        let err = PopescuTuple::new(ch.kraus().to_vec(), st, 1e-9).unwrap_err();
        assert!(matches!(err, Error::StateNotFaithful { .. }));
    }

    #[test]
    fn budget_is_enforced() {
        let mut tol = tols();
        tol.budget = 8;
        let tuple = corpus::aklt_tuple::<C64>().unwrap();
        let err = chain_marginal(&tuple, 3, &tol).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { .. }));
    }
}
