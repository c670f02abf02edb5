//! Fair versus risk-neutral put prices. The two differ by the strike times
//! the savings-bond defect, which grows with maturity; for short maturities
//! they are indistinguishable.

use bnpricing::mmm::{
    fair_put_delta, fair_put_price, fair_zero_coupon, risk_neutral_put_price,
    savings_bond_defect, MmmParams, PutContract,
};

fn main() {
    let params = MmmParams::new(2.15, 0.053, 0.0, 100.0).unwrap();
    let s = 100.0;

    println!("index level {s}, strike grid, maturity 30.83 years:");
    println!("{:>8} {:>12} {:>14} {:>10}", "strike", "fair", "risk-neutral", "gap");
    for strike in [60.0, 80.0, 100.0, 120.0, 150.0] {
        let contract = PutContract::new(strike, 30.83).unwrap();
        let fair = fair_put_price(&params, 0.0, s, &contract).unwrap();
        let rn = risk_neutral_put_price(&params, 0.0, s, &contract).unwrap();
        println!("{strike:>8.0} {fair:>12.6} {rn:>14.6} {:>10.6}", rn - fair);
    }

    println!("\nat-the-money across maturities:");
    println!("{:>10} {:>12} {:>14} {:>12} {:>10}", "maturity", "fair", "risk-neutral", "defect", "delta");
    for maturity in [1.0, 5.0, 10.0, 20.0, 30.83] {
        let contract = PutContract::new(100.0, maturity).unwrap();
        let fair = fair_put_price(&params, 0.0, s, &contract).unwrap();
        let rn = risk_neutral_put_price(&params, 0.0, s, &contract).unwrap();
        let defect = savings_bond_defect(&params, 0.0, s, maturity).unwrap();
        let delta = fair_put_delta(&params, 0.0, s, &contract).unwrap();
        println!("{maturity:>10.2} {fair:>12.6} {rn:>14.6} {defect:>12.3e} {delta:>10.5}");
    }

    // The fair zero coupon bond is what a savings bond actually costs to
    // replicate; classical discounting overprices it by the defect.
    let maturity = 30.83;
    let zcb = fair_zero_coupon(&params, 0.0, s, maturity).unwrap();
    println!("\nfair zero coupon bond, T = {maturity}: {zcb:.6} (vs 1 under risk-neutral pricing)");

    // Put-call parity in fair terms uses the fair bond, not the unit bond.
    let contract = PutContract::new(100.0, maturity).unwrap();
    let fair_put = fair_put_price(&params, 0.0, s, &contract).unwrap();
    let fair_call = fair_put + s - 100.0 * zcb;
    println!("implied fair call from parity: {fair_call:.6}");
}
