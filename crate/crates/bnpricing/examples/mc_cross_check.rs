//! Monte Carlo agreement with the closed-form fair put. Terminal index
//! values are drawn from the exact transition law, so the only error is
//! statistical; the estimate is deterministic for a fixed seed.

use bnpricing::mmm::{fair_put_price, MmmParams, PutContract};
use bnpricing::simulate::{mc_fair_price, SimConfig};

fn main() {
    let params = MmmParams::new(2.15, 0.053, 0.0, 100.0).unwrap();
    let contract = PutContract::new(100.0, 10.0).unwrap();
    let exact = fair_put_price(&params, 0.0, 100.0, &contract).unwrap();
    println!("closed form: {exact:.6}\n");

    println!("{:>10} {:>12} {:>10} {:>8}", "paths", "estimate", "stderr", "z");
    for n_paths in [10_000, 40_000, 160_000, 640_000] {
        let config = SimConfig::new(n_paths, 42);
        let est = mc_fair_price(&params, &contract, 0.0, 100.0, &config).unwrap();
        let z = (est.value - exact) / est.stderr;
        println!("{n_paths:>10} {:>12.6} {:>10.6} {z:>8.2}", est.value, est.stderr);
    }

    let config = SimConfig::new(640_000, 42).with_antithetic(true);
    let est = mc_fair_price(&params, &contract, 0.0, 100.0, &config).unwrap();
    println!("\nantithetic, 640000 paths: {:.6} (stderr {:.6})", est.value, est.stderr);
}
