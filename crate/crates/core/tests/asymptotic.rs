use hetnet_core::netgen::{FixedBetaTable, ScheduledLinks};
use hetnet_core::precoder::PrecoderKind::{self, Mrt, Zft};
use hetnet_core::rates::asymptotic::{asymptotic_rates, Limit, ScalingLaw};
use hetnet_core::rates::bounds::bound;
use hetnet_core::scenario::Scenario;
use hetnet_core::training::{build_pilots, PilotPlan};

const K: usize = 20;
const L: usize = 4;
const S: usize = 8;

fn table(gamma: usize) -> (ScheduledLinks, PilotPlan) {
    (
        ScheduledLinks::fixed_table(&FixedBetaTable::default(), K, L, S),
        build_pilots(K, L, S, gamma).unwrap(),
    )
}

fn finite(l: Limit) -> f64 {
    match l {
        Limit::Finite(v) => v,
        other => panic!("expected a finite limit, got {other:?}"),
    }
}

fn close(a: f64, b: f64) {
    assert!((a - b).abs() < 1e-10 * b.abs().max(1.0), "{a} vs {b}");
}

fn log2_1p(x: f64) -> f64 {
    (1.0 + x).log2()
}

#[test]
fn single_user_unit_example() {
    let links = ScheduledLinks { beta_bm: vec![1.0], beta_sm: vec![], beta_bs: vec![], beta_ss: vec![] };
    let plan = build_pilots(1, 0, 0, 1).unwrap();
    let mut law = ScalingLaw::case_one(1.0, 1.0, 10.0);
    law.e_tau = 1e15;
    let r = asymptotic_rates(&links, &plan, &law, Mrt, 1.0).unwrap();
    assert!((finite(r.mue[0]) - 1.0).abs() < 1e-12);
}

/// Case I, χ = η = 1.
fn case_one_forms(kind: PrecoderKind, gamma: usize) -> (f64, f64) {
    let tau = (K + L * gamma) as f64;
    let (e_bs, e_sc) = (1.0, 1.0);
    let hat_bm = tau / (tau + 1.0);
    let copilots = (S / gamma - 1) as f64;
    let hat_own = tau * 25.0 / (tau * (5.0 + 0.6 * copilots) + 1.0);
    match kind {
        Mrt => {
            let mue = e_bs * hat_bm / K as f64;
            let sig = e_sc * hat_own / L as f64;
            let contamination = copilots * e_sc * (hat_own * 0.6).powi(2) / (L as f64 * hat_own * 25.0);
            (log2_1p(mue), log2_1p(sig / (1.0 + contamination)))
        }
        Zft => {
            let mue = e_bs / (K as f64 / hat_bm);
            let psi = L as f64 / hat_own;
            let contamination = copilots * e_sc * 0.36 / (psi * 25.0);
            (log2_1p(mue), log2_1p(e_sc / psi / (1.0 + contamination)))
        }
    }
}

#[test]
fn case_one_unit_exponents() {
    for gamma in [1, 2, 4, 8] {
        let (links, plan) = table(gamma);
        let law = ScalingLaw::case_one(1.0, 1.0, 10.0);
        for kind in [Mrt, Zft] {
            let r = asymptotic_rates(&links, &plan, &law, kind, 1.0).unwrap();
            let (mue, sue) = case_one_forms(kind, gamma);
            close(finite(r.mue[0]), mue);
            close(finite(r.sue[3][1]), sue);
        }
    }
}

#[test]
fn case_one_fixed_bs_power() {
    // χ = 1, η = 0: the MUE rate grows without bound, SUEs keep a BS residual
    let (links, plan) = table(8);
    let law = ScalingLaw::case_one(1.0, 0.0, 10.0);
    for kind in [Mrt, Zft] {
        let r = asymptotic_rates(&links, &plan, &law, kind, 1.0).unwrap();
        assert_eq!(r.mue[0], Limit::Divergent);
        let tau = (K + L * 8) as f64;
        let hat = tau * 25.0 / (tau * 5.0 + 1.0);
        // both precoders reduce to β̂/L without co-pilots
        close(finite(r.sue[0][0]), log2_1p(hat / L as f64 / (1.0 + 0.2)));
    }
}

#[test]
fn case_one_other_exponents() {
    let (links, plan) = table(2);
    let r = asymptotic_rates(&links, &plan, &ScalingLaw::case_one(1.5, 1.0, 10.0), Mrt, 1.0).unwrap();
    assert_eq!(r.sue[0][0], Limit::Vanishing);
    let r = asymptotic_rates(&links, &plan, &ScalingLaw::case_one(1.0, 1.2, 10.0), Zft, 1.0).unwrap();
    assert_eq!(r.mue[0], Limit::Vanishing);
    let r = asymptotic_rates(&links, &plan, &ScalingLaw::case_one(1.0, 0.5, 10.0), Zft, 1.0).unwrap();
    assert_eq!(r.mue[0], Limit::Divergent);
    assert_eq!(r.mue[0].value(), f64::INFINITY);
    // reuse caps the SUE rate at the contamination ceiling when χ < 1
    let (links8, plan8) = table(8);
    let r = asymptotic_rates(&links8, &plan8, &ScalingLaw::case_one(0.5, 1.0, 10.0), Mrt, 1.0).unwrap();
    assert_eq!(r.sue[0][0], Limit::Divergent);
    let r = asymptotic_rates(&links, &plan, &ScalingLaw::case_one(0.5, 1.0, 10.0), Mrt, 1.0).unwrap();
    close(finite(r.sue[0][0]), log2_1p(25.0 / (3.0 * 0.36)));
}

#[test]
fn case_two_partial_scaling_without_reuse() {
    let (links, plan) = table(8);
    let theta = 0.5;
    let lambda: f64 = 10.0;
    let law = ScalingLaw::case_two(theta, 1.0 - theta, 1.0 - theta, lambda);
    let tau = (K + L * 8) as f64;
    for kind in [Mrt, Zft] {
        let r = asymptotic_rates(&links, &plan, &law, kind, 1.0).unwrap();
        // all β_BM = 1: β⁴/Σβ² = 1/K and 1/Σβ⁻² = 1/K
        close(finite(r.mue[5]), log2_1p(lambda.powf(theta) * tau / K as f64));
        // own β = 5: β⁴/Σβ² = 625/100 and 1/Σβ⁻² = 25/4
        close(finite(r.sue[2][3]), log2_1p(tau * 6.25));
    }
}

#[test]
fn case_two_full_pilot_scaling() {
    let (links, plan) = table(8);
    let lambda = 10.0;
    let law = ScalingLaw::case_two(1.0, 0.0, 0.0, lambda);
    let tau = (K + L * 8) as f64;
    let rd_mue = 1.0 + 8.0 * 0.6;
    let rd_sue = 5.0 + 7.0 * 0.6 + 0.2;
    for kind in [Mrt, Zft] {
        let r = asymptotic_rates(&links, &plan, &law, kind, 1.0).unwrap();
        close(finite(r.mue[0]), log2_1p(lambda * tau / K as f64 / (rd_mue + 1.0)));
        close(finite(r.sue[0][0]), log2_1p(tau * 6.25 / (rd_sue + 1.0)));
    }
}

#[test]
fn case_two_with_reuse_vanishes() {
    for gamma in [1, 2, 4] {
        let (links, plan) = table(gamma);
        for theta in [0.3, 0.5, 1.0] {
            let law = ScalingLaw::case_two(theta, 1.0 - theta, 1.0 - theta, 10.0);
            for kind in [Mrt, Zft] {
                let r = asymptotic_rates(&links, &plan, &law, kind, 1.0).unwrap();
                assert!(r.sue.iter().flatten().all(|l| *l == Limit::Vanishing));
                assert!(matches!(r.mue[0], Limit::Finite(_)));
            }
        }
    }
}

#[test]
fn inadmissible_laws_rejected() {
    let (links, plan) = table(8);
    assert!(asymptotic_rates(&links, &plan, &ScalingLaw::case_one(1.0, 1.0, 0.5), Mrt, 1.0).is_err());
    assert!(asymptotic_rates(&links, &plan, &ScalingLaw::case_two(0.0, 1.0, 1.0, 10.0), Mrt, 1.0).is_err());
}

#[test]
fn bounds_approach_the_limit() {
    let law = ScalingLaw::case_one(1.0, 1.0, 10.0);
    for gamma in [2, 8] {
        let (links, plan) = table(gamma);
        for kind in [Mrt, Zft] {
            let lim = asymptotic_rates(&links, &plan, &law, kind, 1.0).unwrap();
            let mut prev_err = f64::INFINITY;
            for n_sc in [64, 256, 1024] {
                let powers = law.powers(n_sc, S, 1.0);
                let sc = Scenario::new(links.clone(), plan.clone(), powers, law.n_bs(n_sc), n_sc).unwrap();
                let b = bound(kind, &sc).unwrap().rates;
                let err = ((b.mue[0] - finite(lim.mue[0])) / finite(lim.mue[0])).abs()
                    .max(((b.sue[0][0] - finite(lim.sue[0][0])) / finite(lim.sue[0][0])).abs());
                assert!(err < prev_err);
                prev_err = err;
            }
            assert!(prev_err < 0.03, "{kind:?} γ={gamma}: {prev_err}");
        }
    }
}
