mod oracle;

use approx::assert_relative_eq;
use groupsim::compare::{group_terms, write_penalty_csv};
use groupsim::synth::{diagonal_normal, standard_normal};
use groupsim::{
    bayes_factor_similarity, corpus_model_selection, penalty_curve, similarity_bic,
    similarity_closed_gaussian, similarity_closed_vmf, similarity_ic, Criterion, ModelKind,
    NormalWishartPrior, ScoringOptions, SentenceSample,
};
use oracle::*;
use proptest::prelude::*;
use rand::Rng;

const OPTS: ScoringOptions = ScoringOptions {
    refine_kappa: false,
    tic_fallback: groupsim::TicFallback::Error,
};

fn one_d(xs: &[f64]) -> SentenceSample {
    SentenceSample::new(1, xs.to_vec()).unwrap()
}

#[test]
fn generic_matches_direct_composition() {
    let mut r = rng(31);
    for _ in 0..20 {
        let n = r.random_range(3..=10);
        let m = r.random_range(3..=10);
        let a = scaled_sample(&mut r, n, 3);
        let b = scaled_sample(&mut r, m, 3);
        for (model, name) in [(ModelKind::Diagonal, "diag"), (ModelKind::Spherical, "spherical")] {
            for (ic, ic_name) in [(Criterion::Aic, "aic"), (Criterion::Tic, "tic"), (Criterion::Bic, "bic")] {
                let lib = similarity_ic(&a, &b, model, ic, &OPTS).unwrap().value;
                let direct = similarity_direct(&a, &b, name, ic_name);
                assert_relative_eq!(lib, direct, max_relative = 1e-9);
            }
        }
        let ua = clustered_unit_sample(&mut r, n, 3, 0.6);
        let ub = clustered_unit_sample(&mut r, m, 3, 0.6);
        for (ic, ic_name) in [(Criterion::Aic, "aic"), (Criterion::Bic, "bic")] {
            let lib = similarity_ic(&ua, &ub, ModelKind::Vmf, ic, &OPTS).unwrap().value;
            assert_relative_eq!(lib, similarity_direct(&ua, &ub, "vmf", ic_name), max_relative = 1e-9);
        }
        let lib = similarity_ic(&ua, &ub, ModelKind::Vmf, Criterion::Tic, &OPTS).unwrap().value;
        let direct = similarity_direct(&ua, &ub, "vmf", "tic");
        assert!((lib - direct).abs() <= 1e-3 * direct.abs().max(1.0), "{lib} vs {direct}");
    }
}

#[test]
fn closed_forms_are_half_the_generic_score() {
    let mut r = rng(32);
    for _ in 0..50 {
        let n = r.random_range(2..=15);
        let m = r.random_range(2..=15);
        let d = r.random_range(2..=8);
        let a = scaled_sample(&mut r, n, d);
        let b = scaled_sample(&mut r, m, d);
        let generic = similarity_ic(&a, &b, ModelKind::Diagonal, Criterion::Tic, &OPTS).unwrap();
        let closed = similarity_closed_gaussian(&a, &b).unwrap();
        assert_relative_eq!(closed.value, generic.value / 2.0, max_relative = 1e-9);

        let ua = clustered_unit_sample(&mut r, n, d, 0.7);
        let ub = clustered_unit_sample(&mut r, m, d, 0.7);
        let generic = similarity_ic(&ua, &ub, ModelKind::Vmf, Criterion::Tic, &OPTS).unwrap();
        let closed = similarity_closed_vmf(&ua, &ub, &OPTS).unwrap();
        assert_relative_eq!(closed.value, generic.value / 2.0, max_relative = 1e-9);
    }
}

#[test]
fn identical_groups_give_twice_the_penalty() {
    let mut r = rng(33);
    let s = scaled_sample(&mut r, 12, 4);
    let fit = groupsim::fit_gaussian(&s, groupsim::GaussianKind::Diagonal);
    let expected = 4.0 / 2.0 + fit.kurt_hat.iter().sum::<f64>() / 2.0;
    let closed = similarity_closed_gaussian(&s, &s).unwrap().value;
    assert_relative_eq!(closed, expected, max_relative = 1e-9);
    let generic = similarity_ic(&s, &s, ModelKind::Diagonal, Criterion::Tic, &OPTS).unwrap().value;
    assert_relative_eq!(generic, 2.0 * expected, max_relative = 1e-9);
}

#[test]
fn bic_toy_ordering_and_penalty() {
    let d1 = one_d(&[0.0, 0.1]);
    let far = one_d(&[5.0, 5.1]);
    let near = one_d(&[0.05, 0.15]);
    let s_far = similarity_bic(&d1, &far, ModelKind::Diagonal, &OPTS).unwrap().value;
    let s_near = similarity_bic(&d1, &near, ModelKind::Diagonal, &OPTS).unwrap().value;
    assert!(s_far < s_near);
    let direct = similarity_direct(&d1, &far, "diag", "bic");
    assert_relative_eq!(s_far, direct, max_relative = 1e-9);

    // n = m: the penalty part is -k log(2/n)
    let mut r = rng(34);
    let a = scaled_sample(&mut r, 6, 3);
    let b = scaled_sample(&mut r, 6, 3);
    let br = similarity_bic(&a, &b, ModelKind::Spherical, &OPTS).unwrap().breakdown.unwrap();
    let penalty = 2.0 * (-br.penalty_joint + br.penalty_1 + br.penalty_2);
    assert_relative_eq!(penalty, -4.0 * (2.0f64 / 6.0).ln(), max_relative = 1e-12);
}

#[test]
fn evidence_matches_quadrature_in_one_dimension() {
    let mut r = rng(35);
    let prior = NormalWishartPrior::default_for(1).unwrap();
    for _ in 0..5 {
        let n = r.random_range(2..=5);
        let xs: Vec<f64> = (0..n).map(|_| 0.5 + 1.5 * normal(&mut r)).collect();
        let lib = prior.log_evidence(&one_d(&xs)).unwrap();
        let quad = quadrature_log_evidence_1d(&xs, 0.0, 1.0, 3.0, 1.0);
        assert!((lib - quad).abs() < 1e-4, "{lib} vs {quad}");
    }
    let custom = NormalWishartPrior::new(vec![0.7], 2.5, 4.2, nalgebra::DMatrix::from_element(1, 1, 0.6)).unwrap();
    let xs = [1.1, 0.3, 2.0];
    let lib = custom.log_evidence(&one_d(&xs)).unwrap();
    let quad = quadrature_log_evidence_1d(&xs, 0.7, 2.5, 4.2, 0.6);
    assert!((lib - quad).abs() < 1e-4, "{lib} vs {quad}");
}

#[test]
fn bayes_factor_drops_for_shifted_copy() {
    let mut r = rng(36);
    let a = scaled_sample(&mut r, 6, 3);
    let shifted = SentenceSample::from_rows(
        &a.rows().map(|x| x.iter().map(|v| v + 100.0).collect::<Vec<_>>()).collect::<Vec<_>>(),
    )
    .unwrap();
    let prior = NormalWishartPrior::default_for(3).unwrap();
    let same = bayes_factor_similarity(&a, &a, &prior).unwrap().value;
    let apart = bayes_factor_similarity(&a, &shifted, &prior).unwrap().value;
    assert!(apart < same);
}

fn heteroscedastic_corpus(r: &mut rand_chacha::ChaCha8Rng, sentences: usize, n: usize, d: usize) -> Vec<SentenceSample> {
    // log-uniform variances in [0.1, 10]
    let vars: Vec<f64> = (0..d).map(|_| 10f64.powf(r.random_range(-1.0..1.0))).collect();
    (0..sentences).map(|_| diagonal_normal(r, n, &vars).unwrap()).collect()
}

#[test]
fn model_selection_direction() {
    let mut r = rng(37);
    let candidates = [(ModelKind::Diagonal, Criterion::Aic), (ModelKind::Spherical, Criterion::Aic)];
    let hetero = heteroscedastic_corpus(&mut r, 30, 20, 10);
    let rows = corpus_model_selection(&hetero, &candidates, &OPTS).unwrap();
    assert_eq!(rows[0].model, ModelKind::Diagonal);
    let iso: Vec<SentenceSample> = (0..30).map(|_| standard_normal(&mut r, 200, 10).unwrap()).collect();
    let rows = corpus_model_selection(&iso, &candidates, &OPTS).unwrap();
    assert_eq!(rows[0].model, ModelKind::Spherical);
    assert!(rows[0].mean_ic <= rows[1].mean_ic);
}

#[test]
fn penalty_curve_shape() {
    let rows = penalty_curve(ModelKind::Diagonal, 10, &[20, 200, 2000], 10, 3).unwrap();
    assert!(rows[0].mean_penalty < rows[2].mean_penalty);
    assert!((rows[2].mean_penalty - 20.0).abs() < 1.5);
    let mut a = Vec::new();
    let mut b = Vec::new();
    write_penalty_csv(&rows, &mut a).unwrap();
    write_penalty_csv(&penalty_curve(ModelKind::Diagonal, 10, &[20, 200, 2000], 10, 3).unwrap(), &mut b).unwrap();
    assert_eq!(a, b);
}

fn permute(s: &SentenceSample, seed: u64) -> SentenceSample {
    let mut perm: Vec<usize> = (0..s.n()).collect();
    let mut r = rng(seed);
    for i in (1..perm.len()).rev() {
        perm.swap(i, r.random_range(0..=i));
    }
    s.permuted(&perm).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn all_scores_symmetric_and_order_free(seed in any::<u64>(), n in 2usize..12, m in 2usize..12, d in 2usize..6) {
        let mut r = rng(seed);
        let a = scaled_sample(&mut r, n, d);
        let b = scaled_sample(&mut r, m, d);
        let ua = clustered_unit_sample(&mut r, n, d, 0.8);
        let ub = clustered_unit_sample(&mut r, m, d, 0.8);
        let (pa, pb, pua, pub_) = (permute(&a, seed), permute(&b, seed ^ 1), permute(&ua, seed ^ 2), permute(&ub, seed ^ 3));
        let close = |x: f64, y: f64| (x - y).abs() <= 1e-9 * x.abs().max(1.0);
        for model in [ModelKind::Diagonal, ModelKind::Spherical, ModelKind::Vmf] {
            let (x, y, px, py) = if model == ModelKind::Vmf { (&ua, &ub, &pua, &pub_) } else { (&a, &b, &pa, &pb) };
            for ic in [Criterion::Tic, Criterion::Aic, Criterion::Bic] {
                let s = similarity_ic(x, y, model, ic, &OPTS).unwrap().value;
                let t = similarity_ic(y, x, model, ic, &OPTS).unwrap().value;
                let p = similarity_ic(px, py, model, ic, &OPTS).unwrap().value;
                prop_assert!(close(s, t), "{model} {ic}: {s} vs {t}");
                prop_assert!(close(s, p), "{model} {ic} permuted: {s} vs {p}");
            }
        }
        let prior = NormalWishartPrior::default_for(d).unwrap();
        let s = bayes_factor_similarity(&a, &b, &prior).unwrap().value;
        let t = bayes_factor_similarity(&b, &a, &prior).unwrap().value;
        let p = bayes_factor_similarity(&pa, &pb, &prior).unwrap().value;
        prop_assert!((s - t).abs() <= 1e-10 * s.abs().max(1.0));
        prop_assert!((s - p).abs() <= 1e-9 * s.abs().max(1.0));
    }

    #[test]
    fn closed_gaussian_translation_invariant(seed in any::<u64>(), n in 2usize..12, m in 2usize..12, shift in -20.0..20.0f64) {
        let mut r = rng(seed);
        let a = scaled_sample(&mut r, n, 3);
        let b = scaled_sample(&mut r, m, 3);
        let mv = |s: &SentenceSample| SentenceSample::from_rows(
            &s.rows().map(|x| x.iter().enumerate().map(|(k, v)| v + shift * (k as f64 - 1.0)).collect::<Vec<_>>()).collect::<Vec<_>>(),
        ).unwrap();
        let s = similarity_closed_gaussian(&a, &b).unwrap().value;
        let t = similarity_closed_gaussian(&mv(&a), &mv(&b)).unwrap().value;
        prop_assert!((s - t).abs() <= 1e-9 * s.abs().max(1.0));
    }

    #[test]
    fn group_ic_matches_direct(seed in any::<u64>(), n in 2usize..15, d in 1usize..5) {
        let mut r = rng(seed);
        let s = scaled_sample(&mut r, n, d);
        for (model, name) in [(ModelKind::Diagonal, "diag"), (ModelKind::Spherical, "spherical")] {
            for (ic, ic_name) in [(Criterion::Aic, "aic"), (Criterion::Tic, "tic"), (Criterion::Bic, "bic")] {
                let lib = group_terms(&s, model, ic, &OPTS).unwrap().ic();
                let direct = ic_direct(&s, name, ic_name);
                prop_assert!((lib - direct).abs() <= 1e-9 * direct.abs().max(1.0));
            }
        }
    }
}
