//! Minimal market model for a diversified index in activity time.
//!
//! The index level follows a dimension-4 squared Bessel process when run
//! against the activity clock `phi(t) = exp(tau0 + a t)`; the exponential
//! trendline is the model's only structural assumption. The index volatility
//! is `theta = sqrt(4 phi a / s)`, and the market price of risk exceeds
//! `theta` by the drift tilt `lambda_bar * a / theta`, so the benchmarked
//! savings account is a strict supermartingale whenever `lambda_bar > 0`.
//!
//! Pricing is done under the index-neutral measure, where the terminal level
//! is a scaled noncentral chi-square with 4 degrees of freedom:
//! `S_T = c * chi2_4'(lambda)`, `c = phi(T) - phi(t)`, `lambda = s / c`.
//! The European put has the closed form
//!
//! ```text
//! p = K * (Psi(x; 0, lambda) - exp(-lambda/2)) - s * Psi(x; 4, lambda)
//! ```
//!
//! with `x = K / c`. The `exp(-lambda/2)` term is the mass the zero-df law
//! puts at the origin; it is exactly the gap between the minimal cost of
//! replicating the strike payment and the classical savings-account discount
//! bond, so the classically quoted put exceeds the minimal replication price
//! by `K * exp(-lambda/2)`. Calls follow from parity:
//! `call = put + s - K * (1 - exp(-lambda/2))`.
//!
//! The drift tilt `lambda_bar` never enters any of the pricing formulas; it
//! only matters for real-world simulation and calibration diagnostics.

use crate::special::{
    noncentral_chi2_cdf, noncentral_chi2_cdf_positive_part, SpecialError,
};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MmmError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error(transparent)]
    Special(#[from] SpecialError),
}

/// Trendline and drift parameters of the model, plus the index level at
/// time zero used by simulation and hedging entry points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MmmParams {
    /// Log activity level at time zero.
    pub tau0_bar: f64,
    /// Activity growth rate per year; must be positive.
    pub a_bar: f64,
    /// Real-world drift tilt; zero makes the real and pricing measures
    /// coincide.
    pub lambda_bar: f64,
    /// Index level at time zero.
    pub s0: f64,
}

impl MmmParams {
    pub fn new(tau0_bar: f64, a_bar: f64, lambda_bar: f64, s0: f64) -> Result<Self, MmmError> {
        if !tau0_bar.is_finite() {
            return Err(MmmError::Domain(format!("tau0_bar must be finite, got {tau0_bar}")));
        }
        if !(a_bar > 0.0) || !a_bar.is_finite() {
            return Err(MmmError::Domain(format!(
                "a_bar must be positive (the activity clock must advance), got {a_bar}"
            )));
        }
        if !(lambda_bar >= 0.0) || !lambda_bar.is_finite() {
            return Err(MmmError::Domain(format!("lambda_bar must be >= 0, got {lambda_bar}")));
        }
        if !(s0 > 0.0) || !s0.is_finite() {
            return Err(MmmError::Domain(format!("s0 must be positive, got {s0}")));
        }
        Ok(Self { tau0_bar, a_bar, lambda_bar, s0 })
    }

    /// Trendline of log activity: tau0 + a t.
    pub fn activity_time(&self, t: f64) -> f64 {
        self.tau0_bar + self.a_bar * t
    }

    /// Activity clock phi(t) = exp(tau0 + a t).
    pub fn phi(&self, t: f64) -> f64 {
        self.activity_time(t).exp()
    }

    /// Index volatility theta(t, s) = sqrt(4 phi(t) a / s).
    pub fn volatility_theta(&self, t: f64, s: f64) -> Result<f64, MmmError> {
        check_level(s)?;
        Ok((4.0 * self.phi(t) * self.a_bar / s).sqrt())
    }

    /// Volatility of the benchmarked-savings-account density process:
    /// lambda_bar * sqrt(a s / (4 phi)). Satisfies
    /// sigma * theta = lambda_bar * a identically.
    pub fn sigma_sstar(&self, t: f64, s: f64) -> Result<f64, MmmError> {
        check_level(s)?;
        let sig = self.lambda_bar * (self.a_bar * s / (4.0 * self.phi(t))).sqrt();
        debug_assert!({
            let theta = (4.0 * self.phi(t) * self.a_bar / s).sqrt();
            (sig * theta - self.lambda_bar * self.a_bar).abs()
                <= 1e-14 * (1.0 + self.lambda_bar * self.a_bar)
        });
        Ok(sig)
    }

    /// Noncentrality s / (phi(T) - phi(t)) of the terminal index level seen
    /// from (t, s). Requires t < T.
    pub fn noncentrality(&self, t: f64, s: f64, maturity: f64) -> Result<f64, MmmError> {
        check_level(s)?;
        if !(t < maturity) || !t.is_finite() || !maturity.is_finite() {
            return Err(MmmError::Domain(format!(
                "noncentrality requires t < maturity, got t={t}, maturity={maturity}"
            )));
        }
        Ok(s / (self.phi(maturity) - self.phi(t)))
    }
}

fn check_level(s: f64) -> Result<(), MmmError> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(MmmError::Domain(format!("index level must be positive, got {s}")));
    }
    Ok(())
}

/// European put specification. A zero strike is allowed and prices to zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PutContract {
    pub strike: f64,
    pub maturity: f64,
}

impl PutContract {
    pub fn new(strike: f64, maturity: f64) -> Result<Self, MmmError> {
        if !(strike >= 0.0) || !strike.is_finite() {
            return Err(MmmError::Domain(format!("strike must be >= 0, got {strike}")));
        }
        if !(maturity > 0.0) || !maturity.is_finite() {
            return Err(MmmError::Domain(format!("maturity must be positive, got {maturity}")));
        }
        Ok(Self { strike, maturity })
    }
}

fn check_pricing_time(t: f64, maturity: f64) -> Result<(), MmmError> {
    if !t.is_finite() || t > maturity {
        return Err(MmmError::Domain(format!(
            "pricing time {t} lies beyond maturity {maturity}"
        )));
    }
    Ok(())
}

/// Minimal replication price of the put seen from (t, s). At maturity this
/// is the intrinsic value.
pub fn fair_put_price(
    params: &MmmParams,
    t: f64,
    s: f64,
    contract: &PutContract,
) -> Result<f64, MmmError> {
    check_level(s)?;
    check_pricing_time(t, contract.maturity)?;
    let k = contract.strike;
    if t == contract.maturity {
        return Ok((k - s).max(0.0));
    }
    if k == 0.0 {
        return Ok(0.0);
    }
    let c = params.phi(contract.maturity) - params.phi(t);
    let lambda = s / c;
    let x = k / c;
    let strike_leg = noncentral_chi2_cdf_positive_part(x, lambda)?;
    let index_leg = noncentral_chi2_cdf(x, 4.0, lambda)?;
    let p = k * strike_leg - s * index_leg;
    // The exact value lies in [0, K]; tolerate rounding-level excursions and
    // flag anything larger as a numerical failure.
    let slack = 1e-9 * (1.0 + k);
    if p < -slack || p > k + slack {
        return Err(MmmError::Numerical(format!(
            "put value {p} escapes [0, {k}] at t={t}, s={s}"
        )));
    }
    Ok(p.clamp(0.0, k))
}

/// Gap exp(-lambda/2) between the classical discount bond and the minimal
/// cost of delivering 1 at `maturity`. Tends to zero at maturity.
pub fn savings_bond_defect(
    params: &MmmParams,
    t: f64,
    s: f64,
    maturity: f64,
) -> Result<f64, MmmError> {
    check_level(s)?;
    check_pricing_time(t, maturity)?;
    if t == maturity {
        return Ok(0.0);
    }
    let lambda = params.noncentrality(t, s, maturity)?;
    Ok((-lambda / 2.0).exp())
}

/// Minimal price of a payment of 1 at `maturity`: 1 - exp(-lambda/2).
pub fn fair_zero_coupon(
    params: &MmmParams,
    t: f64,
    s: f64,
    maturity: f64,
) -> Result<f64, MmmError> {
    Ok(1.0 - savings_bond_defect(params, t, s, maturity)?)
}

/// Classical risk-neutral put price: the fair price plus the strike times
/// the savings-bond defect.
pub fn risk_neutral_put_price(
    params: &MmmParams,
    t: f64,
    s: f64,
    contract: &PutContract,
) -> Result<f64, MmmError> {
    let fair = fair_put_price(params, t, s, contract)?;
    let defect = savings_bond_defect(params, t, s, contract.maturity)?;
    Ok(fair + contract.strike * defect)
}

/// Hedge ratio d(fair price)/ds by central differences with one Richardson
/// extrapolation step; the result is clamped to [-1, 0].
pub fn fair_put_delta(
    params: &MmmParams,
    t: f64,
    s: f64,
    contract: &PutContract,
) -> Result<f64, MmmError> {
    check_level(s)?;
    check_pricing_time(t, contract.maturity)?;
    let h = (1e-4 * s).max(1e-6);
    let central = |step: f64| -> Result<f64, MmmError> {
        let up = fair_put_price(params, t, s + step, contract)?;
        let dn = fair_put_price(params, t, (s - step).max(1e-12), contract)?;
        Ok((up - dn) / (s + step - (s - step).max(1e-12)))
    };
    let coarse = central(h)?;
    let fine = central(h / 2.0)?;
    let delta = (4.0 * fine - coarse) / 3.0;
    Ok(delta.clamp(-1.0, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn reference_params(lambda_bar: f64) -> MmmParams {
        MmmParams::new(2.15, 0.053, lambda_bar, 100.0).unwrap()
    }

    const T_LONG: f64 = 30.83;

    #[test]
    fn construction_validation() {
        assert!(matches!(
            MmmParams::new(2.15, 0.0, 1.0, 100.0),
            Err(MmmError::Domain(_))
        ));
        assert!(matches!(
            MmmParams::new(2.15, 0.053, -0.5, 100.0),
            Err(MmmError::Domain(_))
        ));
        assert!(matches!(
            MmmParams::new(2.15, 0.053, 1.0, 0.0),
            Err(MmmError::Domain(_))
        ));
        assert!(matches!(PutContract::new(-1.0, 1.0), Err(MmmError::Domain(_))));
        assert!(matches!(PutContract::new(100.0, 0.0), Err(MmmError::Domain(_))));
    }

    #[test]
    fn trendline_values() {
        let p = reference_params(1.0);
        assert!((p.activity_time(T_LONG) - 3.78399).abs() < 1e-12);
        assert!((p.phi(0.0) / 8.584_858_397_177_894 - 1.0).abs() < 1e-12);
        assert!((p.phi(T_LONG) / 43.991_216_984_319_596 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn volatility_and_density_process() {
        let p = reference_params(1.0);
        let theta = p.volatility_theta(0.0, 100.0).unwrap();
        assert!((theta / 0.134_907_004_273_377_65 - 1.0).abs() < 1e-12);
        // Product identity sigma * theta = lambda_bar * a_bar on a grid.
        let mut rng = StdRng::seed_from_u64(2);
        for _ in 0..100 {
            let t = rng.gen_range(0.0..40.0);
            let s = rng.gen_range(1.0..500.0);
            let sig = p.sigma_sstar(t, s).unwrap();
            let th = p.volatility_theta(t, s).unwrap();
            assert!((sig * th - p.lambda_bar * p.a_bar).abs() < 1e-14);
        }
        // Zero drift tilt kills the density volatility.
        let p0 = reference_params(0.0);
        assert_eq!(p0.sigma_sstar(3.0, 150.0).unwrap(), 0.0);
    }

    #[test]
    fn noncentrality_and_defect_values() {
        let p = reference_params(1.0);
        let lam = p.noncentrality(0.0, 100.0, T_LONG).unwrap();
        assert!((lam / 2.824_351_443_932_908_5 - 1.0).abs() < 1e-12);
        let defect = savings_bond_defect(&p, 0.0, 100.0, T_LONG).unwrap();
        assert!((defect / 0.243_612_672_689_054_85 - 1.0).abs() < 1e-12);
        let zcb = fair_zero_coupon(&p, 0.0, 100.0, T_LONG).unwrap();
        assert!((zcb - (1.0 - defect)).abs() < 1e-15);
        assert!(matches!(
            p.noncentrality(5.0, 100.0, 5.0),
            Err(MmmError::Domain(_))
        ));
    }

    #[test]
    fn fair_put_frozen_values() {
        // 50-digit references for the closed form.
        let p = reference_params(1.0);
        let c = PutContract::new(100.0, T_LONG).unwrap();
        let fair = fair_put_price(&p, 0.0, 100.0, &c).unwrap();
        assert!(
            (fair - 20.819_408_391_642_393).abs() < 1e-9,
            "fair = {fair}"
        );
        let rn = risk_neutral_put_price(&p, 0.0, 100.0, &c).unwrap();
        assert!((rn - 45.180_675_660_547_878).abs() < 1e-9, "rn = {rn}");
        let fair_mid = fair_put_price(&p, 10.0, 150.0, &c).unwrap();
        assert!(
            (fair_mid - 18.012_665_935_996_056).abs() < 1e-9,
            "fair_mid = {fair_mid}"
        );
        let c_short = PutContract::new(150.0, 10.0).unwrap();
        let fair_itm = fair_put_price(&p, 0.0, 100.0, &c_short).unwrap();
        assert!(
            (fair_itm - 55.176_157_012_874_31).abs() < 1e-9,
            "fair_itm = {fair_itm}"
        );
    }

    #[test]
    fn price_gap_is_strike_times_defect() {
        let mut rng = StdRng::seed_from_u64(77);
        for _ in 0..50 {
            let p = MmmParams::new(
                rng.gen_range(1.0..3.0),
                rng.gen_range(0.01..0.2),
                rng.gen_range(0.0..2.0),
                100.0,
            )
            .unwrap();
            let k = rng.gen_range(50.0..200.0);
            let maturity = rng.gen_range(1.0..40.0);
            let t = rng.gen_range(0.0..maturity * 0.9);
            let s = rng.gen_range(20.0..400.0);
            let c = PutContract::new(k, maturity).unwrap();
            let fair = fair_put_price(&p, t, s, &c).unwrap();
            let rn = risk_neutral_put_price(&p, t, s, &c).unwrap();
            let defect = savings_bond_defect(&p, t, s, maturity).unwrap();
            assert!(
                ((rn - fair) - k * defect).abs() < 1e-12,
                "gap identity off: {} vs {}",
                rn - fair,
                k * defect
            );
        }
    }

    #[test]
    fn drift_tilt_never_enters_prices() {
        let c = PutContract::new(100.0, T_LONG).unwrap();
        let p0 = reference_params(0.0);
        let p1 = reference_params(1.7);
        for (t, s) in [(0.0, 100.0), (5.0, 60.0), (20.0, 300.0)] {
            let a = fair_put_price(&p0, t, s, &c).unwrap();
            let b = fair_put_price(&p1, t, s, &c).unwrap();
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn maturity_boundary_and_domain() {
        let p = reference_params(1.0);
        let c = PutContract::new(100.0, 10.0).unwrap();
        assert_eq!(fair_put_price(&p, 10.0, 80.0, &c).unwrap(), 20.0);
        assert_eq!(fair_put_price(&p, 10.0, 130.0, &c).unwrap(), 0.0);
        assert_eq!(risk_neutral_put_price(&p, 10.0, 80.0, &c).unwrap(), 20.0);
        assert!(matches!(
            fair_put_price(&p, 10.5, 80.0, &c),
            Err(MmmError::Domain(_))
        ));
        assert!(matches!(
            fair_put_price(&p, 0.0, -5.0, &c),
            Err(MmmError::Domain(_))
        ));
        // Degenerate strike.
        let c0 = PutContract::new(0.0, 10.0).unwrap();
        assert_eq!(fair_put_price(&p, 0.0, 100.0, &c0).unwrap(), 0.0);
    }

    #[test]
    fn price_converges_to_intrinsic_near_maturity() {
        // Fixed levels on either side of the strike: the value collapses to
        // intrinsic as t -> T even though the noncentrality blows up past 1e9.
        let p = reference_params(1.0);
        let c = PutContract::new(100.0, 10.0).unwrap();
        let t = 10.0 - 1e-8;
        for (s, intrinsic) in [(80.0, 20.0), (99.0, 1.0), (120.0, 0.0)] {
            let fair = fair_put_price(&p, t, s, &c).unwrap();
            assert!(
                (fair - intrinsic).abs() < 1e-6,
                "s={s}: {fair} vs {intrinsic}"
            );
        }
    }

    #[test]
    fn fair_price_is_hump_shaped_in_level() {
        // Unlike the classical put, the fair put is not monotone in s: as
        // s -> 0 the noncentrality vanishes, the strike leg collapses to
        // K * (1 - 1) = 0, and protection on a worthless index is itself
        // nearly worthless. The value rises from 0, peaks below K, and then
        // decays for s >= K.
        let p = reference_params(1.0);
        let c = PutContract::new(100.0, T_LONG).unwrap();
        let tiny = fair_put_price(&p, 0.0, 0.05, &c).unwrap();
        assert!(tiny < 0.05, "tiny-level price should collapse, got {tiny}");
        let low = fair_put_price(&p, 0.0, 5.0, &c).unwrap();
        let atm = fair_put_price(&p, 0.0, 100.0, &c).unwrap();
        assert!(tiny < low && low < atm, "{tiny} {low} {atm}");
        let mut prev = atm;
        for i in 1..40 {
            let s = 100.0 + 20.0 * i as f64;
            let v = fair_put_price(&p, 0.0, s, &c).unwrap();
            assert!(v <= prev + 1e-12, "not decreasing at s={s}");
            prev = v;
        }
    }

    #[test]
    fn delta_frozen_value_and_range() {
        let p = reference_params(1.0);
        let c = PutContract::new(100.0, T_LONG).unwrap();
        let d = fair_put_delta(&p, 0.0, 100.0, &c).unwrap();
        assert!(
            (d - (-0.030_202_526_924_535_47)).abs() < 1e-7,
            "delta = {d}"
        );
        let mut rng = StdRng::seed_from_u64(8);
        for _ in 0..50 {
            let t = rng.gen_range(0.0..30.0);
            let s = rng.gen_range(10.0..400.0);
            let d = fair_put_delta(&p, t, s, &c).unwrap();
            assert!((-1.0..=0.0).contains(&d), "delta {d} out of range");
        }
        // At maturity the difference quotient of the intrinsic value is the
        // exact hedge on either side of the strike.
        let d_itm = fair_put_delta(&p, T_LONG, 50.0, &c).unwrap();
        let d_otm = fair_put_delta(&p, T_LONG, 150.0, &c).unwrap();
        assert!((d_itm + 1.0).abs() < 1e-12);
        assert!(d_otm.abs() < 1e-12);
    }
}
