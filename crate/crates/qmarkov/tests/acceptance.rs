//! Acceptance suite: one test per criterion, each printing a pass/fail line.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use std::time::Instant;

use num_traits::ToPrimitive;
use qmarkov::channel::DensityState;
use qmarkov::classify::{
    check_equivalence, is_endomorphism, kolmogorov_two_point, strong_ergodicity,
};
use qmarkov::corpus;
use qmarkov::dilation::{build_dilation, verify_compression, verify_markov_property};
use qmarkov::fcs::{
    chain_marginal, correlation_decay, factor_test, marginal_consistency, purity_test, PopescuTuple,
};
use qmarkov::kms::{
    kraus_span_distance, spectrum_conjugation_defect, verify_adjoint_relation, ModularPair,
};
use qmarkov::linalg::{eig_general, fro_norm, hs_dot};
use qmarkov::structure::{compute_g0_for, conditional_expectation, faithful_corner};
use qmarkov::{Tolerances, C64};

fn report(id: u32, pass: bool, detail: &str) {
    println!(
        "ACCEPTANCE {id} [{}] {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {id} failed: {detail}");
}

fn faithful_pairs(count: usize, seed: u64) -> Vec<(qmarkov::KrausChannel, DensityState<C64>)> {
    let mut rng = corpus::seeded_rng(seed);
    (0..count)
        .map(|i| {
            let n = 2 + (i % 3);
            corpus::random_faithful_pair::<C64>(n, 2, &mut rng).expect("sampling failed")
        })
        .collect()
}

/// Ensemble for decay-series criteria: the horizon-200 / 1e-7 iteration can
/// only resolve convergence when the subperipheral radius stays below 0.9,
/// so the sampler rejects slower instances (they land in the documented
/// HorizonTooShort state instead of a verdict).
fn classifiable_pairs(count: usize, seed: u64) -> Vec<(qmarkov::KrausChannel, DensityState<C64>)> {
    let mut rng = corpus::seeded_rng(seed);
    (0..count)
        .map(|i| {
            let n = 2 + (i % 3);
            corpus::random_classifiable_pair::<C64>(n, 2, 0.9, &mut rng).expect("sampling failed")
        })
        .collect()
}

#[test]
fn criterion_1_mixing_equivalence() {
    let start = Instant::now();
    let tol = Tolerances::default();
    let mut total = 0usize;
    let mut agree = 0usize;
    for item in corpus::named_channel_corpus::<C64>() {
        let rep = check_equivalence(&item.channel, &item.state, &tol).unwrap();
        total += 1;
        agree += rep.agree as usize;
    }
    for (ch, st) in faithful_pairs(100, 0xA1) {
        let rep = check_equivalence(&ch, &st, &tol).unwrap();
        total += 1;
        agree += rep.agree as usize;
    }
    let elapsed = start.elapsed().as_secs_f64();
    report(
        1,
        agree == total && elapsed < 30.0,
        &format!("mixing ⇔ ergodic ∧ trivial peripheral: {agree}/{total} agree, {elapsed:.1}s"),
    );
}

#[test]
fn criterion_2_adjoint_relation() {
    let tol = Tolerances::default();
    let mut worst_relation = 0.0f64;
    let mut worst_involution = 0.0f64;
    let mut worst_conjugation = 0.0f64;
    for (ch, st) in faithful_pairs(50, 0xA2) {
        let pair = ModularPair::new(ch.clone(), st.clone(), &tol).unwrap();
        let adj = pair.kms_adjoint().unwrap();
        worst_relation = worst_relation.max(verify_adjoint_relation(&pair, &adj).unwrap());
        let back = ModularPair::new(adj.clone(), st, &tol)
            .unwrap()
            .kms_adjoint()
            .unwrap();
        worst_involution = worst_involution.max(kraus_span_distance(&back, &ch));
        worst_conjugation = worst_conjugation.max(spectrum_conjugation_defect(&ch, &adj).unwrap());
    }
    report(
        2,
        worst_relation <= 1e-10 && worst_involution <= 1e-9 && worst_conjugation <= 1e-8,
        &format!(
            "adjoint relation ≤ {worst_relation:.2e}, double adjoint ≤ {worst_involution:.2e}, spectrum conjugation ≤ {worst_conjugation:.2e} over 50 channels"
        ),
    );
}

#[test]
fn criterion_3_kolmogorov_duality() {
    let tol = Tolerances::default();
    assert_eq!(tol.horizon, 200);
    assert_eq!(tol.decay, 1e-7);
    let mut total = 0usize;
    let mut agree = 0usize;
    let mut check = |ch: &qmarkov::KrausChannel, st: &DensityState<C64>| {
        let k = kolmogorov_two_point(ch, st, &tol).unwrap();
        // recompute the dual side explicitly on the faithful corner
        let (cch, cst) = if st.faithful() {
            (ch.clone(), st.clone())
        } else {
            let c = faithful_corner(ch, st, &tol).unwrap();
            (c.channel, c.state)
        };
        let adj = ModularPair::new(cch, cst.clone(), &tol)
            .unwrap()
            .kms_adjoint()
            .unwrap();
        let dual = strong_ergodicity(&adj, &cst, &tol).unwrap();
        total += 1;
        agree += (k.decay.verdict == dual.verdict && k.duality_agrees) as usize;
    };
    for item in corpus::named_channel_corpus::<C64>() {
        check(&item.channel, &item.state);
    }
    for (ch, st) in classifiable_pairs(30, 0xA3) {
        check(&ch, &st);
    }
    report(
        3,
        agree == total,
        &format!("kolmogorov(τ) = strong ergodicity(τ̃): {agree}/{total} agree"),
    );
}

#[test]
fn criterion_4_dilation_identities() {
    let start = Instant::now();
    let tol = Tolerances::default();
    let mut pool: Vec<(String, qmarkov::KrausChannel, DensityState<C64>)> =
        corpus::named_channel_corpus::<C64>()
            .into_iter()
            .filter(|it| it.channel.dim() <= 2 && it.channel.kraus().len() <= 2)
            .map(|it| (it.name.to_string(), it.channel, it.state))
            .collect();
    let mut rng = corpus::seeded_rng(0xA4);
    for i in 0..3 {
        let (ch, st) = corpus::random_faithful_pair::<C64>(2, 2, &mut rng).unwrap();
        pool.push((format!("random-{i}"), ch, st));
    }
    let mut worst_markov = 0.0f64;
    let mut worst_compression = 0.0f64;
    for (_, ch, st) in &pool {
        for horizon in 1..=3 {
            let space = build_dilation(ch, st, horizon, &tol).unwrap();
            worst_markov = worst_markov.max(verify_markov_property(&space).unwrap());
            worst_compression = worst_compression.max(verify_compression(&space).unwrap());
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    report(
        4,
        worst_markov <= 1e-10 && worst_compression <= 1e-9 && elapsed < 60.0,
        &format!(
            "markov residual ≤ {worst_markov:.2e}, compression residual ≤ {worst_compression:.2e} over {} channels × N ≤ 3, {elapsed:.1}s",
            pool.len()
        ),
    );
}

#[test]
fn criterion_5_reduction_through_g0() {
    let tol = Tolerances::default();
    let mut total = 0usize;
    let mut agree = 0usize;
    let mut worst_commute = 0.0f64;
    for item in corpus::named_channel_corpus::<C64>() {
        if !item.state.faithful() {
            continue;
        }
        let direct = check_equivalence(&item.channel, &item.state, &tol)
            .unwrap()
            .mixing
            .verdict;
        let g0 = compute_g0_for(&item.channel, &item.state, &tol).unwrap();
        let e = conditional_expectation(&g0, &item.state, &tol).unwrap();
        let t = item.channel.superoperator();
        worst_commute = worst_commute.max(
            fro_norm(&(e.compose(&t).matrix() - t.compose(&e).matrix()))
                .to_f64()
                .unwrap(),
        );
        // matrix of the compressed dynamics E∘τ on the G0 basis
        let compressed = e.compose(&t);
        let k = g0.span_dim();
        let mut restricted = ndarray::Array2::<C64>::zeros((k, k));
        for (j, b) in g0.basis().iter().enumerate() {
            let tb = compressed.apply(b);
            for (i, c) in g0.basis().iter().enumerate() {
                restricted[(i, j)] = hs_dot(c, &tb);
            }
        }
        let (eigs, _) = eig_general(&restricted).unwrap();
        let peripheral: Vec<_> = eigs
            .iter()
            .filter(|l| l.norm() >= 1.0 - tol.peripheral)
            .collect();
        let compressed_mixing =
            peripheral.len() == 1 && (peripheral[0] - C64::new(1.0, 0.0)).norm() <= tol.peripheral;
        total += 1;
        agree += (compressed_mixing == direct) as usize;
    }
    report(
        5,
        agree == total && worst_commute <= 1e-9,
        &format!(
            "mixing via G0 compression: {agree}/{total} agree, ‖Eτ − τE‖ ≤ {worst_commute:.2e}"
        ),
    );
}

#[test]
fn criterion_6_spin_chain_oracles() {
    let tol = Tolerances::default();

    let aklt = corpus::aklt_tuple::<C64>().unwrap();
    let spec = aklt.corner_channel().spectrum(tol.peripheral).unwrap();
    let mut eigs: Vec<f64> = spec.eigenvalues.iter().map(|l| l.re).collect();
    eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let expect = [-1.0 / 3.0, -1.0 / 3.0, -1.0 / 3.0, 1.0];
    let spectrum_ok = eigs
        .iter()
        .zip(expect.iter())
        .all(|(a, b)| (a - b).abs() <= 1e-9)
        && spec.eigenvalues.iter().all(|l| l.im.abs() <= 1e-9);

    let sz = corpus::spin1_sz_cartesian::<C64>();
    let series = correlation_decay(&aklt, &sz, &sz, 16, &tol).unwrap();
    let mut ratios_ok = true;
    for w in series.series.windows(2) {
        let (n, c0) = w[0];
        let (_, c1) = w[1];
        if (5..15).contains(&n) {
            ratios_ok &= c1 > 0.0 && (c0 / c1 - 3.0).abs() <= 0.03;
        }
    }
    let factor_ok = factor_test(&aklt, &tol).unwrap().verdict;

    let (p, q) = (0.3, 0.2);
    let markov = corpus::classical_markov_tuple::<C64>(p, q).unwrap();
    let marg = chain_marginal(&markov, 2, &tol).unwrap();
    let pi = [q / (p + q), p / (p + q)];
    let t = [[1.0 - p, p], [q, 1.0 - q]];
    let mut pair_ok = true;
    for i in 0..2 {
        #[allow(clippy::needless_range_loop)]
        for j in 0..2 {
            let got = marg.matrix()[(i * 2 + j, i * 2 + j)];
            pair_ok &= (got - C64::new(pi[i] * t[i][j], 0.0)).norm() <= 1e-12;
        }
    }
    report(
        6,
        spectrum_ok && ratios_ok && factor_ok && pair_ok,
        &format!(
            "aklt spectrum {spectrum_ok}, decay ratio→3 {ratios_ok}, factor {factor_ok}, markov pair probabilities {pair_ok}"
        ),
    );
}

#[test]
fn criterion_7_purity_criterion() {
    let tol = Tolerances::default();
    let product_met = purity_test(&corpus::product_tuple::<C64>(&[1.0, 0.0]).unwrap(), &tol)
        .unwrap()
        .criterion_met
        && purity_test(&corpus::product_tuple::<C64>(&[0.6, 0.8]).unwrap(), &tol)
            .unwrap()
            .criterion_met;
    let aklt_met = purity_test(&corpus::aklt_tuple::<C64>().unwrap(), &tol)
        .unwrap()
        .criterion_met;
    let periodic = purity_test(&corpus::two_periodic_tuple::<C64>().unwrap(), &tol).unwrap();
    let periodic_not_met =
        !periodic.criterion_met && periodic.conclusion.contains("no purity conclusion");

    // endomorphism corners with faithful states and dim > 1: the
    // finite-dimensional shadow of the Cuntz KMS example
    let mut rng = corpus::seeded_rng(0xA7);
    let mut endo_ok = true;
    for n in [2usize, 3] {
        let u = corpus::random_unitary::<C64>(n, &mut rng).unwrap();
        let tuple = PopescuTuple::new(vec![u], DensityState::maximally_mixed(n), 1e-9).unwrap();
        assert!(is_endomorphism(&tuple.corner_channel(), &tol).unwrap());
        endo_ok &= !purity_test(&tuple, &tol).unwrap().criterion_met;
    }
    let h_tuple = PopescuTuple::new(
        vec![corpus::hadamard::<C64>()],
        DensityState::maximally_mixed(2),
        1e-9,
    )
    .unwrap();
    endo_ok &= !purity_test(&h_tuple, &tol).unwrap().criterion_met;

    report(
        7,
        product_met && aklt_met && periodic_not_met && endo_ok,
        &format!(
            "product {product_met}, aklt {aklt_met}, 2-periodic not-met {periodic_not_met}, endomorphism corners not-met {endo_ok}"
        ),
    );
}

#[test]
fn criterion_8_marginal_consistency() {
    let tol = Tolerances::default();
    let mut worst = 0.0f64;
    for item in corpus::named_tuple_corpus::<C64>().unwrap() {
        for window in 1..=6 {
            let marg = chain_marginal(&item.tuple, window, &tol).unwrap();
            let tr = marg.matrix().diag().sum();
            worst = worst.max((tr - C64::new(1.0, 0.0)).norm());
            worst = worst.max((-marg.min_eigenvalue().unwrap()).max(0.0));
            let (l, r) = marginal_consistency(&item.tuple, window, &tol).unwrap();
            worst = worst.max(l).max(r);
        }
    }
    report(
        8,
        worst <= 1e-10,
        &format!("marginal PSD/trace/consistency residual ≤ {worst:.2e} up to window 6"),
    );
}
