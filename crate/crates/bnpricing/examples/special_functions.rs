//! The noncentral chi-square machinery behind the pricing formulas:
//! CDF values, the origin mass of the zero-degree case, and a sampling
//! sanity check.

use bnpricing::simulate::path_rng;
use bnpricing::special::{
    noncentral_chi2_cdf, noncentral_chi2_cdf_positive_part, sample_noncentral_chi2_4,
};

fn main() {
    println!("noncentral chi-square CDF, 4 degrees of freedom:");
    println!("{:>8} {:>10} {:>14}", "x", "lambda", "P(X <= x)");
    for &(x, lambda) in &[(2.0, 0.5), (5.0, 2.83), (5.0, 10.0), (12.0, 10.0)] {
        let p = noncentral_chi2_cdf(x, 4.0, lambda).unwrap();
        println!("{x:>8.2} {lambda:>10.2} {p:>14.10}");
    }

    // Zero degrees of freedom: an atom of mass exp(-lambda/2) sits at the
    // origin; the positive-part CDF excludes it.
    println!("\nzero degrees of freedom, lambda = 2.83:");
    let lambda = 2.83;
    let atom = (-lambda / 2.0f64).exp();
    let full = noncentral_chi2_cdf(6.0, 0.0, lambda).unwrap();
    let positive = noncentral_chi2_cdf_positive_part(6.0, lambda).unwrap();
    println!("  origin atom          = {atom:.10}");
    println!("  P(X <= 6)            = {full:.10}");
    println!("  P(0 < X <= 6)        = {positive:.10}");
    println!("  atom + positive part = {:.10}", atom + positive);

    // Sampler agreement: empirical CDF at a few points vs the analytic one.
    let lambda = 5.0;
    let n = 200_000;
    let mut rng = path_rng(17, 0);
    let mut draws: Vec<f64> = (0..n).map(|_| sample_noncentral_chi2_4(lambda, &mut rng)).collect();
    draws.sort_by(|a, b| a.partial_cmp(b).unwrap());
    println!("\nsampler vs CDF, 4 df, lambda = {lambda}, n = {n}:");
    for &x in &[3.0, 6.0, 9.0, 15.0] {
        let empirical = draws.partition_point(|&d| d <= x) as f64 / n as f64;
        let analytic = noncentral_chi2_cdf(x, 4.0, lambda).unwrap();
        println!("  x = {x:>5.1}: empirical {empirical:.4}, analytic {analytic:.4}");
    }
}
