//! Solve for growth-optimal weights in a small market, compare growth
//! rates against rival mixes, and extend the market by a savings account.

use bnpricing::market::{
    extend_by_savings_account, instantaneous_growth_rate, portfolio_sde, solve_gop, DVector,
    MarketCoefficients, DEFAULT_TOL,
};

fn main() {
    // Three primary accounts driven by two factors. Drifts are chosen so a
    // growth-optimal solution exists (mu = sigma sigma^T pi + lambda 1 for
    // some pi summing to one).
    let mu = [0.0829, 0.0412, 0.0390];
    let sigma = [
        vec![0.22, 0.05],
        vec![0.10, 0.12],
        vec![0.06, 0.09],
    ];
    let mkt = MarketCoefficients::from_rows(&mu, &sigma).unwrap();

    let gop = solve_gop(&mkt, DEFAULT_TOL).unwrap();
    println!("growth-optimal weights:");
    for (i, w) in gop.weights.iter().enumerate() {
        println!("  asset {i}: {w:+.6}");
    }
    println!("short-rate analogue lambda* = {:.6}", gop.lambda_star);
    println!("market price of risk |theta| = {:.6}", gop.theta.norm());
    println!("fit residual = {:.3e}", gop.residual);

    let g_star = instantaneous_growth_rate(&mkt, &gop.weights).unwrap();
    println!("\ninstantaneous growth rates:");
    println!("  GOP              : {g_star:+.6}");
    for pi in [vec![1.0, 0.0, 0.0], vec![0.2, 0.3, 0.5], vec![-0.5, 1.0, 0.5]] {
        let pi = DVector::from_vec(pi);
        let g = instantaneous_growth_rate(&mkt, &pi).unwrap();
        println!(
            "  [{:+.1} {:+.1} {:+.1}] : {g:+.6}  (shortfall {:.6})",
            pi[0], pi[1], pi[2], g_star - g
        );
    }

    let sde = portfolio_sde(&mkt, &gop, &gop.weights).unwrap();
    println!("\nGOP dynamics: drift {:.6}, |diffusion| {:.6}", sde.drift, sde.diffusion.norm());

    // With three assets on two factors a riskless combination already
    // exists, so a savings account is only consistent at the rate lambda*;
    // there it is redundant, anywhere else it is an arbitrage.
    let ext = extend_by_savings_account(&mkt, &gop, gop.lambda_star).unwrap();
    println!("\nsavings account at rate lambda*:");
    println!("  redundant      = {}", ext.redundant);
    println!("  savings weight = {:+.3e}", ext.p_star);
    println!("  |theta| change = {:.3e}", (ext.theta.norm() - gop.theta.norm()).abs());
    match extend_by_savings_account(&mkt, &gop, gop.lambda_star - 0.01) {
        Ok(_) => println!("unexpectedly extended"),
        Err(e) => println!("\nat 100bp below lambda* the solver flags it:\n  {e}"),
    }

    // Two assets on two independent factors leave no riskless combination,
    // so there a cheap savings account genuinely enlarges the market and
    // the extended GOP shorts it.
    let mkt2 = MarketCoefficients::from_rows(
        &[0.08, 0.04],
        &[vec![0.2, 0.0], vec![0.0, 0.1]],
    )
    .unwrap();
    let gop2 = solve_gop(&mkt2, DEFAULT_TOL).unwrap();
    let ext = extend_by_savings_account(&mkt2, &gop2, gop2.lambda_star - 0.01).unwrap();
    println!("\nincomplete two-asset market, savings 100bp below lambda* = {:.3}:", gop2.lambda_star);
    println!("  redundant      = {}", ext.redundant);
    println!("  savings weight = {:+.6}", ext.p_star);
    println!("  weights        = [{:+.4} {:+.4} {:+.4}]", ext.weights[0], ext.weights[1], ext.weights[2]);
    println!("  weights sum    = {:.12}", ext.weights.iter().sum::<f64>());
}
