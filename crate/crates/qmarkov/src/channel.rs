//! States, unital CP maps, superoperators and their spectra.
//!
//! A [`KrausChannel`] is kept in the Heisenberg picture: `τ(x) = Σ_k l_k x l_k†`
//! with `Σ_k l_k l_k† = 1`. Its predual `τ_*(y) = Σ_k l_k† y l_k` is then
//! trace preserving and acts on density matrices. The [`Superoperator`] is
//! the matrix of either action under column-stacking vectorization and is the
//! spectral workhorse for every asymptotic criterion in the crate.

use ndarray::{Array1, Array2};
use num_traits::{Float, One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::linalg::{
    adjoint, eig_general, eye, fro_norm, kron, matrix_unit, matrix_unit_basis, min_eig_herm, trace,
    unvec_col, vec_col,
};
use crate::scalar::ChanScalar;

/// A normal state as a positive unit-trace matrix.
#[derive(Clone, Debug)]
pub struct DensityState<A: ChanScalar> {
    dim: usize,
    rho: Array2<A>,
    tol: f64,
}

impl<A: ChanScalar> DensityState<A> {
    pub const DEFAULT_TOL: f64 = 1e-10;

    /// Validates Hermiticity, positivity and unit trace within `tol`.
    pub fn new(rho: Array2<A>, tol: f64) -> Result<Self> {
        let (r, c) = rho.dim();
        if r != c || r == 0 {
            return Err(Error::DimensionMismatch {
                expected: r,
                found: c,
            });
        }
        let herm = fro_norm(&(&rho - &adjoint(&rho)));
        if herm > A::real(tol) {
            return Err(Error::NotDensity {
                reason: "matrix is not Hermitian".into(),
                residual: herm.to_f64().unwrap_or(f64::NAN),
            });
        }
        let tr = trace(&rho);
        let tr_defect = (tr - A::one()).abs();
        if tr_defect > A::real(tol) {
            return Err(Error::NotDensity {
                reason: "trace is not 1".into(),
                residual: tr_defect.to_f64().unwrap_or(f64::NAN),
            });
        }
        let min = min_eig_herm(&rho)?;
        if min < A::real(-tol) {
            return Err(Error::NotDensity {
                reason: "matrix has a negative eigenvalue".into(),
                residual: min.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(DensityState { dim: r, rho, tol })
    }

    pub fn with_default_tol(rho: Array2<A>) -> Result<Self> {
        Self::new(rho, Self::DEFAULT_TOL)
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let rho = eye::<A>(dim) * A::from_real(A::real(1.0 / dim as f64));
        DensityState {
            dim,
            rho,
            tol: Self::DEFAULT_TOL,
        }
    }

    /// Pure state `|v⟩⟨v|` from a (not necessarily normalized) vector.
    pub fn pure(v: &Array1<A>) -> Result<Self> {
        let n2: A::Real = v.iter().map(|z| z.square()).sum();
        if n2 <= A::Real::zero() {
            return Err(Error::InvalidInput("zero vector for pure state".into()));
        }
        let dim = v.len();
        let mut rho = Array2::zeros((dim, dim));
        for i in 0..dim {
            for j in 0..dim {
                rho[(i, j)] = v[i] * v[j].conj() / A::from_real(n2);
            }
        }
        Ok(DensityState {
            dim,
            rho,
            tol: Self::DEFAULT_TOL,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &Array2<A> {
        &self.rho
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// `φ(x) = tr(ρ x)`.
    pub fn expectation(&self, x: &Array2<A>) -> A {
        trace(&self.rho.dot(x))
    }

    pub fn min_eigenvalue(&self) -> Result<A::Real> {
        min_eig_herm(&self.rho)
    }

    pub fn faithful(&self) -> bool {
        self.min_eigenvalue()
            .map(|m| m > A::real(self.tol))
            .unwrap_or(false)
    }

    /// Residual of invariance under the predual of `channel`.
    pub fn invariance_residual(&self, channel: &KrausChannel<A>) -> Result<A::Real> {
        if channel.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: channel.dim(),
            });
        }
        Ok(fro_norm(&(&channel.predual_apply(&self.rho)? - &self.rho)))
    }
}

/// A unital completely positive map given by Kraus operators.
#[derive(Clone, Debug)]
pub struct KrausChannel<A: ChanScalar> {
    dim: usize,
    kraus: Vec<Array2<A>>,
    unitality_tol: f64,
}

impl<A: ChanScalar> KrausChannel<A> {
    pub const DEFAULT_UNITALITY_TOL: f64 = 1e-9;

    pub fn new(kraus: Vec<Array2<A>>, unitality_tol: f64) -> Result<Self> {
        if kraus.is_empty() {
            return Err(Error::InvalidInput(
                "channel needs at least one Kraus operator".into(),
            ));
        }
        let dim = kraus[0].nrows();
        for k in &kraus {
            let (r, c) = k.dim();
            if r != dim || c != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: r.max(c),
                });
            }
        }
        let ch = KrausChannel {
            dim,
            kraus,
            unitality_tol,
        };
        let defect = ch.unitality_defect();
        if defect > unitality_tol {
            return Err(Error::NotUnital {
                defect,
                tol: unitality_tol,
            });
        }
        Ok(ch)
    }

    pub fn with_default_tol(kraus: Vec<Array2<A>>) -> Result<Self> {
        Self::new(kraus, Self::DEFAULT_UNITALITY_TOL)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kraus(&self) -> &[Array2<A>] {
        &self.kraus
    }

    pub fn unitality_tol(&self) -> f64 {
        self.unitality_tol
    }

    /// `‖Σ_k l_k l_k† − 1‖_F`.
    pub fn unitality_defect(&self) -> f64 {
        let mut s: Array2<A> = Array2::zeros((self.dim, self.dim));
        for l in &self.kraus {
            s = s + l.dot(&adjoint(l));
        }
        fro_norm(&(&s - &eye::<A>(self.dim)))
            .to_f64()
            .unwrap_or(f64::NAN)
    }

    fn check_dim(&self, x: &Array2<A>) -> Result<()> {
        let (r, c) = x.dim();
        if r != self.dim || c != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: r.max(c),
            });
        }
        Ok(())
    }

    /// Heisenberg action `τ(x) = Σ_k l_k x l_k†`.
    pub fn apply(&self, x: &Array2<A>) -> Result<Array2<A>> {
        self.check_dim(x)?;
        let mut out = Array2::zeros((self.dim, self.dim));
        for l in &self.kraus {
            out = out + l.dot(x).dot(&adjoint(l));
        }
        Ok(out)
    }

    /// Schrödinger action `τ_*(y) = Σ_k l_k† y l_k`.
    pub fn predual_apply(&self, y: &Array2<A>) -> Result<Array2<A>> {
        self.check_dim(y)?;
        let mut out = Array2::zeros((self.dim, self.dim));
        for l in &self.kraus {
            out = out + adjoint(l).dot(y).dot(l);
        }
        Ok(out)
    }

    pub fn apply_n(&self, x: &Array2<A>, n: usize) -> Result<Array2<A>> {
        let mut out = x.clone();
        for _ in 0..n {
            out = self.apply(&out)?;
        }
        Ok(out)
    }

    /// Superoperator of the Heisenberg action.
    pub fn superoperator(&self) -> Superoperator<A> {
        Superoperator::from_map(self.dim, |x| self.apply(x).expect("dims fixed"))
    }

    /// Superoperator of the predual action.
    pub fn predual_superoperator(&self) -> Superoperator<A> {
        Superoperator::from_map(self.dim, |y| self.predual_apply(y).expect("dims fixed"))
    }

    /// Choi matrix `Σ_ij e_ij ⊗ τ(e_ij)`.
    pub fn choi(&self) -> Result<Array2<A>> {
        let n = self.dim;
        let mut out = Array2::zeros((n * n, n * n));
        for i in 0..n {
            for j in 0..n {
                let t = self.apply(&matrix_unit(n, i, j))?;
                out = out + kron(&matrix_unit(n, i, j), &t);
            }
        }
        Ok(out)
    }

    /// Smallest eigenvalue of the (Hermitian) Choi matrix; complete
    /// positivity means this is nonnegative up to roundoff.
    pub fn choi_min_eigenvalue(&self) -> Result<A::Real> {
        min_eig_herm(&self.choi()?)
    }

    /// Full spectrum of the Heisenberg superoperator with the peripheral
    /// subset flagged.
    pub fn spectrum(&self, peripheral_tol: f64) -> Result<SpectralData<A>> {
        let sup = self.superoperator();
        let spec = sup.spectrum(peripheral_tol, 1e-9)?;
        // unitality pins the eigenvalue 1 with eigenvector 1
        let id = eye::<A>(self.dim);
        let r = fro_norm(&(&sup.apply(&id) - &id));
        if r > A::real(1e-8) {
            return Err(Error::Eigensolver(format!(
                "identity is not fixed by the superoperator: residual {:?}",
                r.to_f64()
            )));
        }
        Ok(spec)
    }
}

/// Matrix of a linear map on n×n matrices under column-stacking
/// vectorization.
#[derive(Clone, Debug)]
pub struct Superoperator<A: ChanScalar> {
    dim: usize,
    matrix: Array2<A>,
}

impl<A: ChanScalar> Superoperator<A> {
    pub fn identity(dim: usize) -> Self {
        Superoperator {
            dim,
            matrix: eye(dim * dim),
        }
    }

    pub fn from_matrix(dim: usize, matrix: Array2<A>) -> Result<Self> {
        if matrix.nrows() != dim * dim || matrix.ncols() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: matrix.nrows(),
            });
        }
        Ok(Superoperator { dim, matrix })
    }

    /// Matrix of an arbitrary map, one matrix unit at a time.
    pub fn from_map<F>(dim: usize, mut f: F) -> Self
    where
        F: FnMut(&Array2<A>) -> Array2<A>,
    {
        let mut m = Array2::zeros((dim * dim, dim * dim));
        for j in 0..dim {
            for i in 0..dim {
                let col = vec_col(&f(&matrix_unit(dim, i, j)));
                let idx = j * dim + i;
                for r in 0..dim * dim {
                    m[(r, idx)] = col[r];
                }
            }
        }
        Superoperator { dim, matrix: m }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &Array2<A> {
        &self.matrix
    }

    pub fn apply(&self, x: &Array2<A>) -> Array2<A> {
        unvec_col(&self.matrix.dot(&vec_col(x)), self.dim)
    }

    /// Composition `self ∘ other`.
    pub fn compose(&self, other: &Superoperator<A>) -> Superoperator<A> {
        Superoperator {
            dim: self.dim,
            matrix: self.matrix.dot(&other.matrix),
        }
    }

    pub fn add(&self, other: &Superoperator<A>) -> Superoperator<A> {
        Superoperator {
            dim: self.dim,
            matrix: &self.matrix + &other.matrix,
        }
    }

    pub fn scale(&self, c: A) -> Superoperator<A> {
        Superoperator {
            dim: self.dim,
            matrix: self.matrix.mapv(|z| z * c),
        }
    }

    pub fn sub(&self, other: &Superoperator<A>) -> Superoperator<A> {
        Superoperator {
            dim: self.dim,
            matrix: &self.matrix - &other.matrix,
        }
    }

    /// Conjugation superoperator `x ↦ a x b`.
    pub fn sandwich(a: &Array2<A>, b: &Array2<A>) -> Self {
        let dim = a.nrows();
        let bt = b.t().to_owned();
        Superoperator {
            dim,
            matrix: kron(&bt, a),
        }
    }

    /// Full eigendecomposition; eigenpairs whose residual exceeds
    /// `resid_tol` surface as an eigensolver diagnostic. Eigenvalues
    /// strictly inside the unit circle may be defective (nilpotent blocks
    /// are common in channel superoperators), where eigenvector residuals
    /// legitimately reach the square root of machine precision; only the
    /// peripheral pairs, which carry the verdicts and are semisimple for
    /// unital channels, are held to `resid_tol`.
    pub fn spectrum(&self, peripheral_tol: f64, resid_tol: f64) -> Result<SpectralData<A>> {
        let (w, v) = eig_general(&self.matrix)?;
        let interior_tol = resid_tol.max(1e-7);
        let mut eigenvalues = Vec::with_capacity(w.len());
        let mut right = Vec::with_capacity(w.len());
        for (k, lam) in w.iter().enumerate() {
            let col = v.column(k).to_owned();
            let x = unvec_col(&col, self.dim);
            let residual = fro_norm(&(&self.apply(&x) - &(x.clone() * *lam)));
            let nx = fro_norm(&x);
            let allowed = if lam.abs() >= A::real(1.0 - peripheral_tol) {
                A::real(resid_tol)
            } else {
                A::real(interior_tol)
            };
            if residual > allowed * nx.max(A::Real::one()) {
                return Err(Error::Eigensolver(format!(
                    "eigenpair residual {:?} exceeds tolerance for eigenvalue {:?}",
                    residual.to_f64(),
                    lam
                )));
            }
            eigenvalues.push(*lam);
            right.push(x);
        }
        Ok(SpectralData::new(eigenvalues, right, peripheral_tol))
    }
}

/// Eigendecomposition of a superoperator with the peripheral subset flagged.
#[derive(Clone, Debug)]
pub struct SpectralData<A: ChanScalar> {
    pub eigenvalues: Vec<A>,
    pub right_eigenvectors: Vec<Array2<A>>,
    /// Indices of eigenvalues with `|λ| ≥ 1 − peripheral_tol`.
    pub peripheral: Vec<usize>,
    pub peripheral_tol: f64,
}

impl<A: ChanScalar> SpectralData<A> {
    pub fn new(
        eigenvalues: Vec<A>,
        right_eigenvectors: Vec<Array2<A>>,
        peripheral_tol: f64,
    ) -> Self {
        let thresh = A::real(1.0 - peripheral_tol);
        let peripheral = eigenvalues
            .iter()
            .enumerate()
            .filter(|(_, l)| l.abs() >= thresh)
            .map(|(k, _)| k)
            .collect();
        SpectralData {
            eigenvalues,
            right_eigenvectors,
            peripheral,
            peripheral_tol,
        }
    }

    pub fn peripheral_eigenvalues(&self) -> Vec<A> {
        self.peripheral
            .iter()
            .map(|&k| self.eigenvalues[k])
            .collect()
    }

    /// True when the peripheral point spectrum is `{1}` with a
    /// one-dimensional eigenspace.
    pub fn peripheral_is_trivial(&self) -> bool {
        self.peripheral.len() == 1
            && (self.eigenvalues[self.peripheral[0]] - A::one()).abs()
                <= A::real(self.peripheral_tol)
    }

    /// Largest modulus among non-peripheral eigenvalues.
    pub fn subperipheral_radius(&self) -> A::Real {
        self.eigenvalues
            .iter()
            .enumerate()
            .filter(|(k, _)| !self.peripheral.contains(k))
            .map(|(_, l)| l.abs())
            .fold(A::Real::zero(), A::Real::max)
    }

    /// Largest modulus strictly inside the unit circle, taking the
    /// peripheral set at face value.
    pub fn spectral_gap(&self) -> A::Real {
        A::Real::one() - self.subperipheral_radius()
    }

    /// Max over listed pairs of `‖τ(x) − λx‖ / ‖x‖` against the given
    /// superoperator.
    pub fn max_residual(&self, sup: &Superoperator<A>) -> A::Real {
        self.eigenvalues
            .iter()
            .zip(self.right_eigenvectors.iter())
            .map(|(l, x)| {
                let r = fro_norm(&(&sup.apply(x) - &(x.clone() * *l)));
                r / fro_norm(x).max(A::Real::epsilon())
            })
            .fold(A::Real::zero(), A::Real::max)
    }
}

/// Max residual of the trace-pairing adjointness
/// `tr(y · τ(x)) = tr(τ_*(y) · x)` over the matrix-unit basis.
pub fn trace_pairing_defect<A: ChanScalar>(channel: &KrausChannel<A>) -> Result<A::Real> {
    let n = channel.dim();
    let basis = matrix_unit_basis::<A>(n);
    let mut worst = A::Real::zero();
    for x in &basis {
        let tx = channel.apply(x)?;
        for y in &basis {
            let lhs = trace(&y.dot(&tx));
            let rhs = trace(&channel.predual_apply(y)?.dot(x));
            worst = worst.max((lhs - rhs).abs());
        }
    }
    Ok(worst)
}

/// Max difference between Kraus application and superoperator application
/// over the matrix-unit basis.
pub fn superoperator_agreement_defect<A: ChanScalar>(channel: &KrausChannel<A>) -> Result<A::Real> {
    let sup = channel.superoperator();
    let mut worst = A::Real::zero();
    for e in matrix_unit_basis::<A>(channel.dim()) {
        let d = fro_norm(&(&channel.apply(&e)? - &sup.apply(&e)));
        worst = worst.max(d);
    }
    Ok(worst)
}

/// `tr(ρ x)` as a standalone helper for callers holding a bare matrix.
pub fn state_expectation<A: ChanScalar>(rho: &Array2<A>, x: &Array2<A>) -> A {
    trace(&rho.dot(x))
}

/// Hilbert–Schmidt adjoint of a superoperator matrix.
pub fn superoperator_adjoint<A: ChanScalar>(sup: &Superoperator<A>) -> Superoperator<A> {
    Superoperator {
        dim: sup.dim,
        matrix: adjoint(&sup.matrix),
    }
}

#[allow(unused_imports)]
use crate::linalg::vdot;

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

    /// Independent superoperator: explicit loops over entries, no reuse of
    /// `Superoperator::from_map`.
    fn oracle_superop(kraus: &[Array2<C64>]) -> Array2<C64> {
        let n = kraus[0].nrows();
        let mut t = Array2::<C64>::zeros((n * n, n * n));
        for l in kraus {
            for i in 0..n {
                for j in 0..n {
                    for a in 0..n {
                        for b in 0..n {
                            // x -> l x l†: coefficient of x_{ab} in out_{ij}
                            t[(j * n + i, b * n + a)] += l[(i, a)] * l[(j, b)].conj();
                        }
                    }
                }
            }
        }
        t
    }

    fn sorted_eigs(m: &Array2<C64>) -> Vec<C64> {
        let (w, _) = eig_general(m).unwrap();
        let mut v = w.to_vec();
        v.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
        v
    }

    #[test]
    fn identity_channel_is_identity_map() {
        let ch = corpus::identity_channel::<C64>(2);
        let x = array![[c(1.0, 2.0), c(0.5, 0.0)], [c(0.0, -1.0), c(3.0, 0.0)]];
        let out = ch.apply(&x).unwrap();
        assert!(fro_norm(&(&out - &x)) < 1e-15);
    }

    #[test]
    fn collapse_channel_matches_hand_expansion() {
        // kraus {|0⟩⟨0|, |1⟩⟨0|}: by hand, τ(x) = x00·I and τ*(y) = tr(y)|0⟩⟨0|
        let ch = corpus::collapse_channel::<C64>();
        let x = array![[c(2.0, 0.0), c(1.0, 1.0)], [c(1.0, -1.0), c(5.0, 0.0)]];
        let out = ch.apply(&x).unwrap();
        let expect = array![[c(2.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(2.0, 0.0)]];
        assert!(fro_norm(&(&out - &expect)) < 1e-14);

        let y = array![[c(0.3, 0.0), c(0.1, 0.2)], [c(0.1, -0.2), c(0.7, 0.0)]];
        let pre = ch.predual_apply(&y).unwrap();
        let expect = array![[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.0, 0.0)]];
        assert!(fro_norm(&(&pre - &expect)) < 1e-14);
    }

    #[test]
    fn bitflip_mix_kills_z() {
        let ch = corpus::bitflip_mix_channel::<C64>();
        let z = array![[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(-1.0, 0.0)]];
        let out = ch.apply(&z).unwrap();
        assert!(fro_norm(&out) < 1e-14);
    }

    #[test]
    fn predual_preserves_trace_on_random_hermitians() {
        let mut rng = corpus::seeded_rng(7);
        let ch = corpus::random_unital_channel::<C64>(3, 3, &mut rng).unwrap();
        for _ in 0..100 {
            let h = corpus::random_hermitian::<C64>(3, &mut rng);
            let out = ch.predual_apply(&h).unwrap();
            assert!((trace(&out) - trace(&h)).abs() < 1e-12);
        }
    }

    #[test]
    fn superoperator_matches_kraus_action() {
        let mut rng = corpus::seeded_rng(11);
        for n in 2..=4 {
            let ch = corpus::random_unital_channel::<C64>(n, 2, &mut rng).unwrap();
            assert!(superoperator_agreement_defect(&ch).unwrap() < 1e-12);
        }
    }

    #[test]
    fn superoperator_matches_oracle_matrix() {
        let mut rng = corpus::seeded_rng(13);
        let ch = corpus::random_unital_channel::<C64>(3, 2, &mut rng).unwrap();
        let t = ch.superoperator();
        let oracle = oracle_superop(ch.kraus());
        assert!(fro_norm(&(t.matrix() - &oracle)) < 1e-12);
    }

    #[test]
    fn spectrum_identity_channel() {
        let ch = corpus::identity_channel::<C64>(2);
        let spec = ch.spectrum(1e-8).unwrap();
        for l in &spec.eigenvalues {
            assert!((l - c(1.0, 0.0)).abs() < 1e-10);
        }
        assert_eq!(spec.peripheral.len(), 4);
    }

    #[test]
    fn spectrum_two_cycle_has_minus_one() {
        // oracle: independent 4x4 superoperator eigendecomposition
        let ch = corpus::two_cycle_channel::<C64>();
        let oracle = sorted_eigs(&oracle_superop(ch.kraus()));
        let spec = ch.spectrum(1e-8).unwrap();
        let mut got = spec.eigenvalues.clone();
        got.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
        for (a, b) in got.iter().zip(oracle.iter()) {
            assert!((a - b).abs() < 1e-10);
        }
        let mut periph = spec.peripheral_eigenvalues();
        periph.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        assert_eq!(periph.len(), 2);
        assert!((periph[0] - c(-1.0, 0.0)).abs() < 1e-10);
        assert!((periph[1] - c(1.0, 0.0)).abs() < 1e-10);

        // eigenvector for −1 is diag(1, −1) up to phase and scale
        let idx = spec
            .peripheral
            .iter()
            .copied()
            .find(|&k| (spec.eigenvalues[k] - c(-1.0, 0.0)).abs() < 1e-10)
            .unwrap();
        let v = &spec.right_eigenvectors[idx];
        let off = v[(0, 1)].abs() + v[(1, 0)].abs();
        assert!(off < 1e-10);
        assert!((v[(0, 0)] + v[(1, 1)]).abs() < 1e-10);
    }

    #[test]
    fn spectrum_bitflip_mix() {
        let ch = corpus::bitflip_mix_channel::<C64>();
        let spec = ch.spectrum(1e-8).unwrap();
        let mut mods: Vec<f64> = spec.eigenvalues.iter().map(|l| l.abs()).collect();
        mods.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!(mods[0] < 1e-10 && mods[1] < 1e-10);
        assert!((mods[2] - 1.0).abs() < 1e-10 && (mods[3] - 1.0).abs() < 1e-10);
        assert_eq!(spec.peripheral.len(), 2);
    }

    #[test]
    fn choi_of_random_channel_is_psd() {
        let mut rng = corpus::seeded_rng(17);
        for n in 2..=3 {
            let ch = corpus::random_unital_channel::<C64>(n, 2, &mut rng).unwrap();
            assert!(ch.choi_min_eigenvalue().unwrap() > -1e-10);
        }
    }

    #[test]
    fn trace_pairing_adjointness() {
        let mut rng = corpus::seeded_rng(19);
        let ch = corpus::random_unital_channel::<C64>(3, 2, &mut rng).unwrap();
        assert!(trace_pairing_defect(&ch).unwrap() < 1e-12);
    }

    #[test]
    fn non_unital_set_is_rejected() {
        let k = vec![array![
            [c(1.0, 0.0), c(0.0, 0.0)],
            [c(0.0, 0.0), c(0.5, 0.0)]
        ]];
        let err = KrausChannel::with_default_tol(k).unwrap_err();
        assert!(matches!(err, Error::NotUnital { .. }));
    }

    #[test]
    fn density_validation() {
        let bad = array![[c(0.9, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.3, 0.0)]];
        assert!(DensityState::with_default_tol(bad).is_err());
        let ok = array![[c(0.7, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.3, 0.0)]];
        let st = DensityState::with_default_tol(ok).unwrap();
        assert!(st.faithful());
        let pure = DensityState::<C64>::pure(&array![c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!(!pure.faithful());
    }
}
