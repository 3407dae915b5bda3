//! Cross-theorem consistency suite behind the `selftest` subcommand.
//!
//! Runs every structural identity the crate promises over the bundled corpus
//! of named channels and tuples plus seeded random instances, and reports
//! one pass/fail line with a residual per assertion.

use num_traits::ToPrimitive;
use serde::Serialize;

use crate::channel::{superoperator_agreement_defect, trace_pairing_defect, DensityState};
use crate::classify::{
    check_equivalence, is_endomorphism, kolmogorov_two_point, peripheral_group, strong_ergodicity,
    support_reaches_identity,
};
use crate::corpus;
use crate::dilation::{
    build_dilation, endomorphism_filtration_residual, endomorphism_multiplicativity_defect,
    filtration_monotonicity, kolmogorov_series_via_dilation, minimality_ranks, verify_compression,
    verify_markov_property,
};
use crate::error::Result;
use crate::fcs::{factor_test, gauge_peripheral_group, marginal_consistency, purity_test};
use crate::kms::{
    kraus_span_distance, spectrum_conjugation_defect, verify_adjoint_relation, ModularPair,
};
use crate::linalg::{
    eig_general, fro_norm, hs_dot, intersect_spans_mats, min_eig_herm, span_containment_defect,
    spans_equal,
};
use crate::structure::{
    compute_g, compute_g0, conditional_expectation, faithful_corner, fixed_point_algebra,
    modular_centralizer, support_projection,
};
use crate::tol::Tolerances;
use crate::{KrausChannel, C64};

#[derive(Clone, Debug, Serialize)]
pub struct SuiteItem {
    pub name: String,
    pub pass: bool,
    pub residual: f64,
    pub threshold: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub random_instances: usize,
    pub items: Vec<SuiteItem>,
    pub passed: usize,
    pub failed: usize,
    pub max_residual: f64,
}

struct Suite {
    items: Vec<SuiteItem>,
}

impl Suite {
    fn check(&mut self, name: impl Into<String>, residual: f64, threshold: f64) {
        self.items.push(SuiteItem {
            name: name.into(),
            pass: residual.is_finite() && residual <= threshold,
            residual,
            threshold,
        });
    }

    fn check_bool(&mut self, name: impl Into<String>, ok: bool) {
        self.items.push(SuiteItem {
            name: name.into(),
            pass: ok,
            residual: if ok { 0.0 } else { 1.0 },
            threshold: 0.5,
        });
    }
}

fn bool_res(ok: bool) -> f64 {
    if ok {
        0.0
    } else {
        1.0
    }
}

/// Runs the full invariant suite. Assertion failures are report content;
/// the process-level failure decision is left to the caller.
pub fn run_selftest(seed: u64, random_instances: usize, tol: &Tolerances) -> Result<SuiteReport> {
    let mut suite = Suite { items: Vec::new() };
    let mut rng = corpus::seeded_rng(seed);

    // assemble the working set: named corpus + seeded random channels
    let mut channels: Vec<(String, KrausChannel, DensityState<C64>)> =
        corpus::named_channel_corpus::<C64>()
            .into_iter()
            .map(|it| (format!("named/{}", it.name), it.channel, it.state))
            .collect();
    for i in 0..random_instances {
        let n = 2 + (i % 3);
        let (ch, st) = corpus::random_classifiable_pair::<C64>(n, 2, 0.9, &mut rng)?;
        channels.push((format!("random/dim{n}-{i}"), ch, st));
    }

    for (name, ch, st) in &channels {
        suite.check(
            format!("channel-core/super-vs-kraus/{name}"),
            superoperator_agreement_defect(ch)?,
            1e-12,
        );
        suite.check(
            format!("channel-core/trace-pairing/{name}"),
            trace_pairing_defect(ch)?,
            1e-12,
        );
        suite.check(
            format!("channel-core/choi-psd/{name}"),
            (-ch.choi_min_eigenvalue()?).max(0.0),
            1e-9,
        );
        let spec = ch.spectrum(tol.peripheral)?;
        suite.check(
            format!("channel-core/eigenpair-residuals/{name}"),
            spec.max_residual(&ch.superoperator()),
            tol.eig_residual,
        );
        suite.check(
            format!("structure/state-invariance/{name}"),
            st.invariance_residual(ch)?,
            1e-8,
        );

        // sub-harmonicity chain for the support of the invariant state
        let p = support_projection(st)?;
        let mut current = p.matrix().clone();
        let mut worst = 0.0f64;
        for _ in 0..5 {
            let next = ch.apply(&current)?;
            worst = worst.max((-min_eig_herm(&(&next - &current))?).max(0.0));
            current = next;
        }
        suite.check(format!("structure/subharmonic-chain/{name}"), worst, 1e-9);

        // the mixing equivalence (both sides computed independently)
        let eq = check_equivalence(ch, st, tol)?;
        suite.check_bool(format!("classifier/mixing-equivalence/{name}"), eq.agree);
        suite.check_bool(
            format!("classifier/mixing-iterate-consistent/{name}"),
            eq.mixing.consistent,
        );

        // Kolmogorov ⇔ strong ergodicity of the adjoint, plus monotonicity
        let k = kolmogorov_two_point(ch, st, tol)?;
        suite.check_bool(
            format!("classifier/kolmogorov-duality/{name}"),
            k.duality_agrees,
        );
        let mono_k = k
            .decay
            .series
            .windows(2)
            .map(|w| (w[1] - w[0]).max(0.0))
            .fold(0.0f64, f64::max);
        suite.check(format!("classifier/k-series-monotone/{name}"), mono_k, 1e-9);
        let s = strong_ergodicity(ch, st, tol)?;
        let mono_s = s
            .series
            .windows(2)
            .map(|w| (w[1] - w[0]).max(0.0))
            .fold(0.0f64, f64::max);
        suite.check(format!("classifier/s-series-monotone/{name}"), mono_s, 1e-9);

        // peripheral eigenvalues of a faithful-state channel form a group
        if st.faithful() {
            let group = peripheral_group(ch, tol)?;
            suite.check_bool(
                format!("classifier/peripheral-group/{name}"),
                group.closed_under_product && group.cyclic,
            );
        }

        // KMS block needs a faithful state
        let (corner_ch, corner_st) = if st.faithful() {
            (ch.clone(), st.clone())
        } else {
            let corner = faithful_corner(ch, st, tol)?;
            (corner.channel, corner.state)
        };
        let pair = ModularPair::new(corner_ch.clone(), corner_st.clone(), tol)?;
        let adj = pair.kms_adjoint()?;
        suite.check(
            format!("kms/adjoint-relation/{name}"),
            verify_adjoint_relation(&pair, &adj)?,
            1e-10,
        );
        let pair_back = ModularPair::new(adj.clone(), corner_st.clone(), tol)?;
        let double = pair_back.kms_adjoint()?;
        suite.check(
            format!("kms/involution/{name}"),
            kraus_span_distance(&double, &corner_ch),
            1e-9,
        );
        suite.check(
            format!("kms/spectrum-conjugation/{name}"),
            spectrum_conjugation_defect(&corner_ch, &adj)?,
            1e-8,
        );
        suite.check(
            format!("kms/adjoint-cp/{name}"),
            (-adj.choi_min_eigenvalue()?).max(0.0),
            1e-9,
        );

        // algebra structure on the faithful corner
        let fixed = fixed_point_algebra(&corner_ch, &corner_st, tol)?;
        let g = compute_g(&pair, tol)?;
        let g0 = compute_g0(&pair, tol)?;
        let centralizer = modular_centralizer(&corner_st, tol)?;
        let both = intersect_spans_mats(fixed.basis(), &centralizer, tol.subspace)?;
        suite.check(
            format!("structure/fixed-centralizer-in-g/{name}"),
            span_containment_defect(g.basis(), &both)
                .to_f64()
                .unwrap_or(f64::NAN),
            1e-8,
        );
        suite.check(
            format!("structure/g0-in-g/{name}"),
            span_containment_defect(g.basis(), g0.basis())
                .to_f64()
                .unwrap_or(f64::NAN),
            1e-8,
        );
        // τ(G0) = G0
        let image: Vec<_> = g0
            .basis()
            .iter()
            .map(|b| corner_ch.apply(b))
            .collect::<Result<_>>()?;
        suite.check(
            format!("structure/g0-tau-invariant/{name}"),
            span_containment_defect(g0.basis(), &image)
                .to_f64()
                .unwrap_or(f64::NAN),
            1e-8,
        );
        // dual tower: G0 computed from the adjoint agrees
        let g0_dual = compute_g0(&pair_back, tol)?;
        suite.check_bool(
            format!("structure/dual-tower/{name}"),
            spans_equal(g0.basis(), g0_dual.basis(), 1e-8),
        );

        // reduction check: mixing verdict unchanged on the G0-compressed
        // dynamics, with E∘τ = τ∘E
        let e = conditional_expectation(&g0, &corner_st, tol)?;
        let t = corner_ch.superoperator();
        suite.check(
            format!("structure/e-commutes-tau/{name}"),
            fro_norm(&(e.compose(&t).matrix() - t.compose(&e).matrix()))
                .to_f64()
                .unwrap_or(f64::NAN),
            1e-9,
        );
        let compressed = e.compose(&t);
        let k_dim = g0.span_dim();
        let mut restricted = ndarray::Array2::<C64>::zeros((k_dim, k_dim));
        for (j, b) in g0.basis().iter().enumerate() {
            let tb = compressed.apply(b);
            for (i, c) in g0.basis().iter().enumerate() {
                restricted[(i, j)] = hs_dot(c, &tb);
            }
        }
        let (eigs, _) = eig_general(&restricted)?;
        let peripheral: Vec<_> = eigs
            .iter()
            .filter(|l| l.norm() >= 1.0 - tol.peripheral)
            .collect();
        let compressed_mixing =
            peripheral.len() == 1 && (peripheral[0] - C64::new(1.0, 0.0)).norm() <= tol.peripheral;
        suite.check_bool(
            format!("reduction/mixing-via-g0/{name}"),
            compressed_mixing == eq.mixing.verdict,
        );

        // support reduction: when the support climbs to the identity, strong
        // ergodicity passes between the full and reduced dynamics
        if !st.faithful() && support_reaches_identity(ch, st, tol)? {
            let full = strong_ergodicity(ch, st, tol)?;
            let red = strong_ergodicity(&corner_ch, &corner_st, tol)?;
            suite.check_bool(
                format!("reduction/strong-ergodicity-corner/{name}"),
                full.verdict == red.verdict,
            );
        }
    }

    // weak Markov dilation identities on small channels
    for (name, ch, st) in channels
        .iter()
        .filter(|(_, ch, _)| ch.dim() <= 2 && ch.kraus().len() <= 2)
    {
        let horizon = 3.min(tol.budget.max(2));
        let space = build_dilation(ch, st, horizon.clamp(2, 3), tol)?;
        suite.check(
            format!("dilation/stinespring/{name}"),
            space.stinespring_residual()?,
            1e-12,
        );
        suite.check(
            format!("dilation/markov/{name}"),
            verify_markov_property(&space)?,
            1e-10,
        );
        suite.check(
            format!("dilation/compression/{name}"),
            verify_compression(&space)?,
            1e-9,
        );
        suite.check(
            format!("dilation/filtration-monotone/{name}"),
            (-filtration_monotonicity(&space)?).max(0.0),
            1e-10,
        );
        suite.check(
            format!("dilation/alpha-p-filtration/{name}"),
            endomorphism_filtration_residual(&space),
            1e-10,
        );
        suite.check(
            format!("dilation/alpha-multiplicative/{name}"),
            endomorphism_multiplicativity_defect(&space)?,
            1e-9,
        );
        let (ordered, arbitrary) = minimality_ranks(&space, 3)?;
        suite.check_bool(format!("dilation/minimality/{name}"), ordered == arbitrary);
        let two_point = kolmogorov_series_via_dilation(ch, st, 3, tol)?;
        suite.check(
            format!("dilation/two-point-vs-direct/{name}"),
            two_point.max_deviation_from_direct,
            1e-9,
        );
    }

    // spin-chain block
    for item in corpus::named_tuple_corpus::<C64>()? {
        let name = item.name;
        let tuple = item.tuple;
        let max_window = if tuple.site_dim() >= 3 { 4 } else { 5 };
        let mut worst = 0.0f64;
        for w in 1..=max_window {
            let (l, r) = marginal_consistency(&tuple, w, tol)?;
            worst = worst.max(l).max(r);
            let marg = crate::fcs::chain_marginal(&tuple, w, tol)?;
            worst = worst.max((-marg.min_eigenvalue()?).max(0.0));
        }
        suite.check(format!("fcs/marginal-consistency/{name}"), worst, 1e-10);

        let factor = factor_test(&tuple, tol)?;
        suite.check_bool(
            format!("fcs/factor-cluster-equivalence/{name}"),
            factor.cluster_agrees,
        );

        let purity = purity_test(&tuple, tol)?;
        suite.check_bool(
            format!("fcs/purity-duality/{name}"),
            purity.kolmogorov.duality_agrees,
        );

        let corner = tuple.corner_channel();
        if is_endomorphism(&corner, tol)? && corner.dim() > 1 {
            suite.check_bool(
                format!("fcs/endomorphism-blocks-purity/{name}"),
                !purity.criterion_met,
            );
        }

        let gauge = gauge_peripheral_group(&tuple, tol)?;
        suite.check_bool(
            format!("fcs/gauge-group/{name}"),
            gauge.group.closed_under_product && gauge.group.cyclic,
        );
    }

    // the finite shadow of the Cuntz KMS lesson on plain channels
    {
        let u = corpus::random_unitary::<C64>(3, &mut rng)?;
        let ch = corpus::unitary_conjugation_channel(u);
        let st = DensityState::maximally_mixed(3);
        let k = kolmogorov_two_point(&ch, &st, tol)?;
        suite.check(
            "classifier/endomorphism-never-kolmogorov/random-automorphism",
            bool_res(!k.decay.verdict && is_endomorphism(&ch, tol)?),
            0.5,
        );
    }

    let passed = suite.items.iter().filter(|i| i.pass).count();
    let failed = suite.items.len() - passed;
    let max_residual = suite
        .items
        .iter()
        .filter(|i| i.threshold < 0.5 || !i.pass)
        .map(|i| i.residual)
        .fold(0.0f64, f64::max);
    Ok(SuiteReport {
        seed,
        random_instances,
        items: suite.items,
        passed,
        failed,
        max_residual,
    })
}
