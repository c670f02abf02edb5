//! Independent cross-checks of the derived quantities: every closed form
//! is recomputed here by a second route (quadrature against the transition
//! density, direct Bessel-series densities, common-random-number Monte
//! Carlo, or measure-change weighting) and the two answers are compared.

mod support;

use bnpricing::mmm::{fair_put_delta, fair_put_price, MmmParams, PutContract};
use bnpricing::simulate::{
    mc_fair_price_under_p, path_rng, sample_sstar_q, simulate_p_path_with_rng, SimConfig,
};
use bnpricing::special::{
    bessel_i1, noncentral_chi2_cdf, sample_noncentral_chi2_4, sbp4_transition_density,
};
use support::{integrate, ks_statistic, ks_two_sample};

fn reference_params() -> MmmParams {
    MmmParams::new(2.15, 0.053, 0.0, 100.0).unwrap()
}

/// Direct noncentral chi-square(4) density via the Bessel series,
/// independent of the Poisson-mixture code path used by the CDF.
fn chi2_4_pdf(x: f64, lambda: f64) -> f64 {
    assert!(x > 0.0 && lambda > 0.0);
    0.5 * (-(x + lambda) / 2.0).exp() * (x / lambda).sqrt() * bessel_i1((lambda * x).sqrt())
}

#[test]
fn transition_density_matches_direct_bessel_formula() {
    let params = reference_params();
    let (t, maturity, s) = (0.0, 10.0, 100.0);
    let (p0, p1) = (params.phi(t), params.phi(maturity));
    let c = p1 - p0;
    let lambda = s / c;
    for y in [20.0, 60.0, 100.0, 180.0, 320.0, 500.0] {
        let lib = sbp4_transition_density(s, y, p0, p1).unwrap();
        let direct = chi2_4_pdf(y / c, lambda) / c;
        assert!(
            (lib - direct).abs() <= 1e-10 * direct.max(1e-300),
            "density mismatch at y={y}: {lib} vs {direct}"
        );
    }
}

#[test]
fn transition_density_integrates_to_one() {
    let params = reference_params();
    let (p0, p1) = (params.phi(0.0), params.phi(30.83));
    let s = 100.0;
    // The law has unbounded support; out to 80 activity spans the tail mass
    // is ~2e-12, below the quadrature tolerance.
    let upper = 80.0 * (p1 - p0);
    let mass = integrate(
        |y| sbp4_transition_density(s, y, p0, p1).unwrap(),
        1e-12,
        upper,
        1e-11,
    );
    assert!((mass - 1.0).abs() < 1e-8, "total mass {mass}");
}

#[test]
fn transition_density_mean_is_level_plus_four_spans() {
    let params = reference_params();
    let (p0, p1) = (params.phi(0.0), params.phi(30.83));
    let s = 100.0;
    let upper = 60.0 * (p1 - p0);
    let mean = integrate(
        |y| y * sbp4_transition_density(s, y, p0, p1).unwrap(),
        1e-12,
        upper,
        1e-9,
    );
    let expected = s + 4.0 * (p1 - p0);
    assert!((mean - expected).abs() < 1e-6 * expected, "mean {mean} vs {expected}");
    // Frozen reference computed with 50-digit arithmetic.
    assert!((expected - 241.625_434_348_566_8).abs() < 1e-10);
}

#[test]
fn noncentral_cdf_matches_density_quadrature() {
    for &(df_delta, lambda) in &[(4.0, 0.5), (4.0, 2.83), (4.0, 10.0)] {
        for &x in &[0.8, 3.0, 7.5, 14.0] {
            let cdf = noncentral_chi2_cdf(x, df_delta, lambda).unwrap();
            let quad = integrate(|u| chi2_4_pdf(u, lambda), 1e-13, x, 1e-12);
            assert!(
                (cdf - quad).abs() < 1e-9,
                "cdf({x}; 4, {lambda}) = {cdf} vs quadrature {quad}"
            );
        }
    }
}

#[test]
fn fair_put_equals_payoff_quadrature() {
    // Second route to the fair price: integrate the benchmarked payoff
    // s (K - y)+ / y against the transition density. Uses only the 4-df
    // density, never the zero-degree distribution the closed form relies on.
    let params = reference_params();
    for &(s, strike, maturity) in &[
        (100.0, 100.0, 30.83),
        (100.0, 100.0, 10.0),
        (100.0, 150.0, 10.0),
        (150.0, 100.0, 10.0),
        (80.0, 100.0, 20.0),
    ] {
        let contract = PutContract::new(strike, maturity).unwrap();
        let closed = fair_put_price(&params, 0.0, s, &contract).unwrap();
        let (p0, p1) = (params.phi(0.0), params.phi(maturity));
        let quad = integrate(
            |y| s * (strike - y) / y * sbp4_transition_density(s, y, p0, p1).unwrap(),
            1e-12,
            strike,
            1e-11,
        );
        assert!(
            (closed - quad).abs() < 1e-7 * (1.0 + closed),
            "s={s} K={strike} T={maturity}: closed {closed} vs quadrature {quad}"
        );
    }
}

#[test]
fn frozen_price_references_hold() {
    // References computed with 50-digit arithmetic from the distribution
    // functions directly.
    let params = reference_params();
    let long = PutContract::new(100.0, 30.83).unwrap();
    let fair = fair_put_price(&params, 0.0, 100.0, &long).unwrap();
    assert!((fair - 20.819408391642393).abs() < 1e-9);
    let mid = PutContract::new(150.0, 10.0).unwrap();
    let fair = fair_put_price(&params, 0.0, 100.0, &mid).unwrap();
    assert!((fair - 55.17615701287431).abs() < 1e-9);
}

#[test]
fn chi2_sampler_passes_kolmogorov_smirnov() {
    let lambda = 2.8243514439329085;
    let n = 100_000usize;
    let mut rng = path_rng(2024, 0);
    let mut draws: Vec<f64> =
        (0..n).map(|_| sample_noncentral_chi2_4(lambda, &mut rng)).collect();
    draws.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let stat = ks_statistic(&draws, |x| noncentral_chi2_cdf(x, 4.0, lambda).unwrap());
    // 1% critical value for the one-sample statistic.
    let critical = 1.6276 / (n as f64).sqrt();
    assert!(stat < critical, "KS statistic {stat} vs critical {critical}");
}

#[test]
fn closed_form_delta_matches_common_random_number_mc() {
    // Bump-and-revalue with shared normals: the terminal draw is smooth in
    // the noncentrality, so differencing paired estimates converges to the
    // derivative without the usual 1/h variance blowup.
    let params = reference_params();
    let contract = PutContract::new(100.0, 10.0).unwrap();
    let s = 100.0;
    let closed = fair_put_delta(&params, 0.0, s, &contract).unwrap();

    let c = params.phi(10.0) - params.phi(0.0);
    let h = 0.5;
    let n = 400_000usize;
    let mut rng = path_rng(77, 0);
    let mut sum = 0.0;
    let mut sumsq = 0.0;
    for _ in 0..n {
        let z: [f64; 4] = [
            rand_normal(&mut rng),
            rand_normal(&mut rng),
            rand_normal(&mut rng),
            rand_normal(&mut rng),
        ];
        let pay = |lvl: f64| -> f64 {
            let lam = lvl / c;
            let y = (z[0] + lam.sqrt()).powi(2) + z[1] * z[1] + z[2] * z[2] + z[3] * z[3];
            let st = c * y;
            lvl * (contract.strike - st).max(0.0) / st
        };
        let d = (pay(s + h) - pay(s - h)) / (2.0 * h);
        sum += d;
        sumsq += d * d;
    }
    let mean = sum / n as f64;
    let var = (sumsq / n as f64 - mean * mean).max(0.0);
    let stderr = (var / n as f64).sqrt();
    assert!(
        (closed - mean).abs() < 3.0 * stderr + 1e-4,
        "delta {closed} vs CRN-MC {mean} (stderr {stderr})"
    );
}

fn rand_normal(rng: &mut impl rand::Rng) -> f64 {
    rand_distr::StandardNormal.sample(rng)
}
use rand_distr::Distribution;

#[test]
fn real_world_weighted_pricing_agrees_with_closed_form() {
    // Bayes-rule route: simulate under the real-world law with a drift tilt,
    // weight benchmarked payoffs by the measure-change density. The tilt
    // must drop out of the price.
    let contract = PutContract::new(100.0, 5.0).unwrap();
    for lambda_bar in [0.5, 1.0] {
        let params = MmmParams::new(2.15, 0.053, lambda_bar, 100.0).unwrap();
        let closed = fair_put_price(&params, 0.0, 100.0, &contract).unwrap();
        let config = SimConfig::new(20_000, 99).with_dt(1.0 / 504.0);
        let est = mc_fair_price_under_p(&params, &contract, 0.0, 100.0, &config).unwrap();
        assert!(
            (est.value - closed).abs() < 3.0 * est.stderr + 0.02 * closed,
            "lambda_bar={lambda_bar}: weighted {for_msg} vs closed {closed} (stderr {se})",
            for_msg = est.value,
            se = est.stderr
        );
    }
}

#[test]
fn euler_terminal_law_matches_exact_transition_at_zero_tilt() {
    // With no drift tilt the real-world and pricing laws coincide, so the
    // Euler scheme's terminal level must match exact sampling in
    // distribution.
    let params = reference_params();
    let (t, horizon) = (0.0, 2.0);
    let n = 4_000usize;
    let mut euler = Vec::with_capacity(n);
    for i in 0..n {
        let mut rng = path_rng(555, i as u64);
        let path =
            simulate_p_path_with_rng(&params, t, 100.0, horizon, 1.0 / 1008.0, &mut rng)
                .unwrap();
        euler.push(*path.levels.last().unwrap());
    }
    let mut exact = Vec::with_capacity(n);
    let mut rng = path_rng(556, 0);
    for _ in 0..n {
        exact.push(sample_sstar_q(&params, t, 100.0, horizon, &mut rng).unwrap());
    }
    euler.sort_by(|a, b| a.partial_cmp(b).unwrap());
    exact.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let stat = ks_two_sample(&euler, &exact);
    let critical = 1.6276 * ((2 * n) as f64 / (n * n) as f64).sqrt();
    assert!(stat < critical, "two-sample KS {stat} vs critical {critical}");
}
