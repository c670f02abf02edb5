//! Path generation and Monte Carlo estimation for the index model.
//!
//! Two sampling regimes coexist. Under the pricing measure the index is a
//! dimension-4 squared Bessel process in activity time, so transitions over
//! any horizon are exact draws from a scaled noncentral chi-square law; the
//! Monte Carlo fair-price estimator and the hedging backtests build on
//! those. Under the real-world measure the drift tilt `lambda_bar` destroys
//! the known transition law, so paths are generated by an Euler scheme on
//! `X = sqrt(S)`, whose diffusion coefficient is state-independent in
//! activity time and therefore nearly bias-free:
//!
//! ```text
//! dX = (lambda_bar a X / 2 + 3 phi(t) a / (2X)) dt + sqrt(phi(t) a) dW
//! ```
//!
//! Along every Euler path the log of the measure-change density is
//! accumulated with the same Brownian increments,
//! `d ln L = -sigma dW - sigma^2/2 dt` with `sigma = lambda_bar a X /
//! (2 sqrt(phi a))`; per step the discrete density update has conditional
//! mean exactly one, so the martingale diagnostic carries no discretization
//! bias.
//!
//! Determinism: every estimator seeds a counter-based generator per path
//! (`seed` fixes the key, the path index fixes the stream) and reduces
//! partial sums in fixed chunk order, so results are bit-identical across
//! runs and thread counts.

use crate::market::{instantaneous_growth_rate, MarketCoefficients, MarketError};
use crate::mmm::{MmmError, MmmParams, PutContract};
use crate::special::sample_noncentral_chi2_4;
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use thiserror::Error;

/// Default Euler step: a tenth of a trading day under the 252-day-year
/// convention.
pub const DEFAULT_DT: f64 = 1.0 / 2520.0;

/// Level at which the Euler scheme floors X = sqrt(S). The origin is
/// unreachable for the true process; floor hits indicate too coarse a step.
const X_FLOOR: f64 = 1e-8;

/// Fraction of floored steps beyond which a path is rejected.
const FLOOR_TOLERANCE: f64 = 1e-3;

const CHUNK: usize = 4096;

#[derive(Debug, Error)]
pub enum SimulateError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error(
        "Euler step too large: {floored} of {total} steps hit the sqrt-level floor; reduce dt"
    )]
    StepTooLarge { floored: usize, total: usize },
    #[error(transparent)]
    Model(#[from] MmmError),
    #[error(transparent)]
    Market(#[from] MarketError),
}

/// Monte Carlo run configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub n_paths: usize,
    pub seed: u64,
    /// Euler step in years; only real-world (P-measure) sampling uses it.
    pub dt: f64,
    /// Pair each exact draw with its sign-flipped Gaussian counterpart.
    pub antithetic: bool,
}

impl SimConfig {
    pub fn new(n_paths: usize, seed: u64) -> Self {
        Self { n_paths, seed, dt: DEFAULT_DT, antithetic: false }
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn with_antithetic(mut self, on: bool) -> Self {
        self.antithetic = on;
        self
    }

    fn validate(&self) -> Result<(), SimulateError> {
        if self.n_paths == 0 {
            return Err(SimulateError::Domain("n_paths must be at least 1".into()));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(SimulateError::Domain(format!("dt must be positive, got {}", self.dt)));
        }
        Ok(())
    }
}

/// Point estimate with its Monte Carlo standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    pub stderr: f64,
    pub n_paths: usize,
}

/// A simulated index trajectory. `floor_hits` counts Euler steps clipped at
/// the sqrt-level floor; exact sampling never floors.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedPath {
    pub times: Vec<f64>,
    pub levels: Vec<f64>,
    pub floor_hits: usize,
}

/// Generator for path `index` of the run keyed by `seed`: same key, one
/// independent stream per path.
pub fn path_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Exact draw of the index level at `maturity` seen from (t, s) under the
/// pricing measure: (phi(T) - phi(t)) times a noncentral chi-square(4)
/// variate with noncentrality s / (phi(T) - phi(t)).
pub fn sample_sstar_q<R: Rng + ?Sized>(
    params: &MmmParams,
    t: f64,
    s: f64,
    maturity: f64,
    rng: &mut R,
) -> Result<f64, SimulateError> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(SimulateError::Domain(format!("index level must be positive, got {s}")));
    }
    if !t.is_finite() || !maturity.is_finite() || t > maturity {
        return Err(SimulateError::Domain(format!(
            "transition requires t <= maturity, got t={t}, maturity={maturity}"
        )));
    }
    let c = params.phi(maturity) - params.phi(t);
    if !(c > 0.0) {
        // Degenerate transition: no activity elapses.
        return Ok(s);
    }
    Ok(c * sample_noncentral_chi2_4(s / c, rng))
}

/// Exact trajectory under the pricing measure along the given observation
/// times, chaining transition draws. `times` must be strictly increasing;
/// the path starts at (times[0], s0).
pub fn simulate_q_path<R: Rng + ?Sized>(
    params: &MmmParams,
    s0: f64,
    times: &[f64],
    rng: &mut R,
) -> Result<SimulatedPath, SimulateError> {
    if times.is_empty() {
        return Err(SimulateError::Domain("observation times must be nonempty".into()));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) || times.iter().any(|t| !t.is_finite()) {
        return Err(SimulateError::Domain(
            "observation times must be finite and strictly increasing".into(),
        ));
    }
    if !(s0 > 0.0) || !s0.is_finite() {
        return Err(SimulateError::Domain(format!("s0 must be positive, got {s0}")));
    }
    let mut levels = Vec::with_capacity(times.len());
    levels.push(s0);
    for w in times.windows(2) {
        let prev = *levels.last().unwrap();
        levels.push(sample_sstar_q(params, w[0], prev, w[1], rng)?);
    }
    Ok(SimulatedPath { times: times.to_vec(), levels, floor_hits: 0 })
}

/// Splits `n` items into fixed chunks, maps each chunk in parallel, then
/// combines partial results in chunk order: the reduction is associative by
/// construction and independent of scheduling.
fn ordered_partials<T: Send>(n: usize, f: impl Fn(usize, usize) -> T + Sync) -> Vec<T> {
    let n_chunks = n.div_ceil(CHUNK);
    (0..n_chunks)
        .into_par_iter()
        .map(|ci| f(ci * CHUNK, ((ci + 1) * CHUNK).min(n)))
        .collect()
}

fn mean_and_stderr(sum: f64, sumsq: f64, n: usize) -> (f64, f64) {
    let nf = n as f64;
    let mean = sum / nf;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = ((sumsq - sum * sum / nf) / (nf - 1.0)).max(0.0);
    (mean, (var / nf).sqrt())
}

/// Monte Carlo fair price of a put by exact sampling under the pricing
/// measure: averages s (K - S_T)+ / S_T, the payoff benchmarked by the
/// terminal index. Deterministic per seed. With `antithetic` the paths are
/// generated in sign-flipped Gaussian pairs and `n_paths` is rounded up to
/// even.
pub fn mc_fair_price(
    params: &MmmParams,
    contract: &PutContract,
    t: f64,
    s: f64,
    config: &SimConfig,
) -> Result<McEstimate, SimulateError> {
    config.validate()?;
    if !(s > 0.0) || !s.is_finite() {
        return Err(SimulateError::Domain(format!("index level must be positive, got {s}")));
    }
    if !t.is_finite() || t > contract.maturity {
        return Err(SimulateError::Domain(format!(
            "pricing time {t} lies beyond maturity {}",
            contract.maturity
        )));
    }
    let k = contract.strike;
    let c = params.phi(contract.maturity) - params.phi(t);
    if !(c > 0.0) {
        return Ok(McEstimate { value: (k - s).max(0.0), stderr: 0.0, n_paths: config.n_paths });
    }
    let lambda = s / c;
    let sqrt_lambda = lambda.sqrt();
    let payoff = |y: f64| -> f64 {
        let terminal = c * y;
        s * (k - terminal).max(0.0) / terminal
    };

    if config.antithetic {
        let pairs = config.n_paths.div_ceil(2);
        let partials = ordered_partials(pairs, |lo, hi| {
            let mut sum = 0.0;
            let mut sumsq = 0.0;
            for i in lo..hi {
                let mut rng = path_rng(config.seed, i as u64);
                let z: [f64; 4] = [
                    rng.sample(StandardNormal),
                    rng.sample(StandardNormal),
                    rng.sample(StandardNormal),
                    rng.sample(StandardNormal),
                ];
                let plus = (z[0] + sqrt_lambda).powi(2) + z[1] * z[1] + z[2] * z[2] + z[3] * z[3];
                let minus = (-z[0] + sqrt_lambda).powi(2) + z[1] * z[1] + z[2] * z[2] + z[3] * z[3];
                let y = 0.5 * (payoff(plus) + payoff(minus));
                sum += y;
                sumsq += y * y;
            }
            (sum, sumsq)
        });
        let (sum, sumsq) = partials.into_iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
        let (value, stderr) = mean_and_stderr(sum, sumsq, pairs);
        Ok(McEstimate { value, stderr, n_paths: 2 * pairs })
    } else {
        let partials = ordered_partials(config.n_paths, |lo, hi| {
            let mut sum = 0.0;
            let mut sumsq = 0.0;
            for i in lo..hi {
                let mut rng = path_rng(config.seed, i as u64);
                let y = payoff(sample_noncentral_chi2_4(lambda, &mut rng));
                sum += y;
                sumsq += y * y;
            }
            (sum, sumsq)
        });
        let (sum, sumsq) = partials.into_iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
        let (value, stderr) = mean_and_stderr(sum, sumsq, config.n_paths);
        Ok(McEstimate { value, stderr, n_paths: config.n_paths })
    }
}

/// Precomputed activity quantities along a uniform Euler grid; shared by all
/// paths of a run so the per-step work is a handful of multiplications.
struct EulerGrid {
    t0: f64,
    h: f64,
    sqrt_h: f64,
    n_steps: usize,
    /// phi(t_i) * a at the left endpoint of step i.
    phi_a: Vec<f64>,
    /// sqrt(phi(t_i) * a): diffusion coefficient of X.
    sqrt_phi_a: Vec<f64>,
}

impl EulerGrid {
    fn build(params: &MmmParams, t0: f64, horizon: f64, dt: f64) -> Self {
        let n_steps = ((horizon / dt).ceil() as usize).max(1);
        let h = horizon / n_steps as f64;
        let phi_a: Vec<f64> = (0..n_steps)
            .map(|i| params.phi(t0 + i as f64 * h) * params.a_bar)
            .collect();
        let sqrt_phi_a = phi_a.iter().map(|&v| v.sqrt()).collect();
        Self { t0, h, sqrt_h: h.sqrt(), n_steps, phi_a, sqrt_phi_a }
    }

    fn times(&self) -> Vec<f64> {
        (0..=self.n_steps).map(|i| self.t0 + i as f64 * self.h).collect()
    }
}

struct EulerOutcome {
    levels: Vec<f64>,
    floor_hits: usize,
    /// ln of the measure-change density at the horizon.
    log_lambda: f64,
}

/// One Euler path on X = sqrt(S), with the density log accumulated from the
/// same Brownian increments. `record_levels` controls whether the full
/// trajectory is kept or only the terminal level.
fn euler_path<R: Rng + ?Sized>(
    params: &MmmParams,
    grid: &EulerGrid,
    s0: f64,
    rng: &mut R,
    record_levels: bool,
) -> EulerOutcome {
    let half_tilt = 0.5 * params.lambda_bar * params.a_bar;
    let mut x = s0.sqrt();
    let mut log_lambda = 0.0;
    let mut floor_hits = 0;
    let mut levels = if record_levels {
        let mut v = Vec::with_capacity(grid.n_steps + 1);
        v.push(s0);
        v
    } else {
        Vec::new()
    };
    for i in 0..grid.n_steps {
        let z: f64 = rng.sample(StandardNormal);
        let bw = grid.sqrt_h * z;
        // sigma = lambda_bar * a * X / (2 sqrt(phi a)) is the density
        // volatility expressed through the current sqrt level.
        let sigma = half_tilt * x / grid.sqrt_phi_a[i];
        log_lambda -= sigma * bw + 0.5 * sigma * sigma * grid.h;
        let drift = half_tilt * x + 1.5 * grid.phi_a[i] / x;
        x += drift * grid.h + grid.sqrt_phi_a[i] * bw;
        if x < X_FLOOR {
            x = X_FLOOR;
            floor_hits += 1;
        }
        if record_levels {
            levels.push(x * x);
        }
    }
    if !record_levels {
        levels.push(x * x);
    }
    EulerOutcome { levels, floor_hits, log_lambda }
}

fn check_floor(floored: usize, total: usize) -> Result<(), SimulateError> {
    if (floored as f64) > FLOOR_TOLERANCE * (total as f64) {
        return Err(SimulateError::StepTooLarge { floored, total });
    }
    Ok(())
}

fn check_p_path_args(s0: f64, horizon: f64) -> Result<(), SimulateError> {
    if !(s0 > 0.0) || !s0.is_finite() {
        return Err(SimulateError::Domain(format!("s0 must be positive, got {s0}")));
    }
    if !(horizon >= 0.0) || !horizon.is_finite() {
        return Err(SimulateError::Domain(format!("horizon must be >= 0, got {horizon}")));
    }
    Ok(())
}

/// Real-world Euler path from (t0, s0) over `horizon` years using the
/// supplied generator.
pub fn simulate_p_path_with_rng<R: Rng + ?Sized>(
    params: &MmmParams,
    t0: f64,
    s0: f64,
    horizon: f64,
    dt: f64,
    rng: &mut R,
) -> Result<SimulatedPath, SimulateError> {
    check_p_path_args(s0, horizon)?;
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(SimulateError::Domain(format!("dt must be positive, got {dt}")));
    }
    if horizon == 0.0 {
        return Ok(SimulatedPath { times: vec![t0], levels: vec![s0], floor_hits: 0 });
    }
    let grid = EulerGrid::build(params, t0, horizon, dt);
    let outcome = euler_path(params, &grid, s0, rng, true);
    check_floor(outcome.floor_hits, grid.n_steps)?;
    Ok(SimulatedPath {
        times: grid.times(),
        levels: outcome.levels,
        floor_hits: outcome.floor_hits,
    })
}

/// Real-world Euler path using the run's seed (stream 0).
pub fn simulate_p_path(
    params: &MmmParams,
    t0: f64,
    s0: f64,
    horizon: f64,
    config: &SimConfig,
) -> Result<SimulatedPath, SimulateError> {
    config.validate()?;
    let mut rng = path_rng(config.seed, 0);
    simulate_p_path_with_rng(params, t0, s0, horizon, config.dt, &mut rng)
}

/// Estimates E[L_T] where L is the measure-change density accumulated along
/// real-world Euler paths started at (0, s0). The true process has mean
/// exactly one; so does the discrete scheme, so any deviation is pure Monte
/// Carlo noise. With `lambda_bar = 0` every path yields exactly 1.
pub fn check_lambda_martingale(
    params: &MmmParams,
    maturity: f64,
    config: &SimConfig,
) -> Result<McEstimate, SimulateError> {
    config.validate()?;
    if !(maturity >= 0.0) || !maturity.is_finite() {
        return Err(SimulateError::Domain(format!("maturity must be >= 0, got {maturity}")));
    }
    if maturity == 0.0 {
        return Ok(McEstimate { value: 1.0, stderr: 0.0, n_paths: config.n_paths });
    }
    let grid = EulerGrid::build(params, 0.0, maturity, config.dt);
    let partials = ordered_partials(config.n_paths, |lo, hi| {
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        let mut floored = 0usize;
        for i in lo..hi {
            let mut rng = path_rng(config.seed, i as u64);
            let outcome = euler_path(params, &grid, params.s0, &mut rng, false);
            floored += outcome.floor_hits;
            let l = outcome.log_lambda.exp();
            sum += l;
            sumsq += l * l;
        }
        (sum, sumsq, floored)
    });
    let (sum, sumsq, floored) =
        partials.into_iter().fold((0.0, 0.0, 0usize), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));
    check_floor(floored, grid.n_steps * config.n_paths)?;
    let (value, stderr) = mean_and_stderr(sum, sumsq, config.n_paths);
    Ok(McEstimate { value, stderr, n_paths: config.n_paths })
}

/// Fair put price estimated entirely under the real-world measure: Euler
/// paths from (t, s), payoffs benchmarked by the terminal level and weighted
/// by the measure-change density, self-normalized by the mean weight. Cross-
/// validates the exact-sampling estimator through the Bayes rule; slower and
/// Euler-biased, intended as a diagnostic.
pub fn mc_fair_price_under_p(
    params: &MmmParams,
    contract: &PutContract,
    t: f64,
    s: f64,
    config: &SimConfig,
) -> Result<McEstimate, SimulateError> {
    config.validate()?;
    if !(s > 0.0) || !s.is_finite() {
        return Err(SimulateError::Domain(format!("index level must be positive, got {s}")));
    }
    if !t.is_finite() || t > contract.maturity {
        return Err(SimulateError::Domain(format!(
            "pricing time {t} lies beyond maturity {}",
            contract.maturity
        )));
    }
    let horizon = contract.maturity - t;
    if horizon == 0.0 {
        return Ok(McEstimate {
            value: (contract.strike - s).max(0.0),
            stderr: 0.0,
            n_paths: config.n_paths,
        });
    }
    let grid = EulerGrid::build(params, t, horizon, config.dt);
    let k = contract.strike;
    let partials = ordered_partials(config.n_paths, |lo, hi| {
        let mut acc = [0.0f64; 5];
        let mut floored = 0usize;
        for i in lo..hi {
            let mut rng = path_rng(config.seed, i as u64);
            let outcome = euler_path(params, &grid, s, &mut rng, false);
            floored += outcome.floor_hits;
            let terminal = *outcome.levels.last().unwrap();
            let w = outcome.log_lambda.exp();
            let x = w * s * (k - terminal).max(0.0) / terminal;
            acc[0] += x;
            acc[1] += w;
            acc[2] += x * x;
            acc[3] += w * w;
            acc[4] += x * w;
        }
        (acc, floored)
    });
    let mut acc = [0.0f64; 5];
    let mut floored = 0usize;
    for (a, f) in partials {
        for (dst, src) in acc.iter_mut().zip(a) {
            *dst += src;
        }
        floored += f;
    }
    check_floor(floored, grid.n_steps * config.n_paths)?;
    let n = config.n_paths as f64;
    let (sx, sw, sxx, sww, sxw) = (acc[0], acc[1], acc[2], acc[3], acc[4]);
    let wbar = sw / n;
    let ratio = sx / sw;
    // Delta-method error for the ratio estimator: var(x - r w) / (n wbar^2).
    let stderr = if config.n_paths > 1 {
        let var_resid = ((sxx - 2.0 * ratio * sxw + ratio * ratio * sww) / (n - 1.0)).max(0.0);
        (var_resid / n).sqrt() / wbar
    } else {
        0.0
    };
    Ok(McEstimate { value: ratio, stderr, n_paths: config.n_paths })
}

/// Annualized log growth over a path: ln(S_end / S_start) / duration.
pub fn empirical_growth_rate(path: &SimulatedPath) -> Result<f64, SimulateError> {
    if path.times.len() < 2 || path.levels.len() != path.times.len() {
        return Err(SimulateError::Domain(
            "growth rate needs an aligned path with at least 2 points".into(),
        ));
    }
    let duration = path.times[path.times.len() - 1] - path.times[0];
    let (first, last) = (path.levels[0], path.levels[path.levels.len() - 1]);
    if !(duration > 0.0) || !(first > 0.0) || !(last > 0.0) {
        return Err(SimulateError::Domain(
            "growth rate needs positive duration and levels".into(),
        ));
    }
    Ok((last / first).ln() / duration)
}

/// Evolves constant-mix portfolios of a constant-coefficient market on a
/// shared Gaussian noise stream, one path per weight vector, all started at
/// level 1. Per step the log level advances by the exact lognormal
/// increment, so there is no discretization error; `config.dt` sets the
/// observation spacing.
pub fn simulate_constant_mix_paths(
    mkt: &MarketCoefficients,
    weight_sets: &[Vec<f64>],
    horizon: f64,
    config: &SimConfig,
) -> Result<Vec<SimulatedPath>, SimulateError> {
    config.validate()?;
    if weight_sets.is_empty() {
        return Err(SimulateError::Domain("need at least one weight vector".into()));
    }
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(SimulateError::Domain(format!("horizon must be positive, got {horizon}")));
    }
    let mut growth = Vec::with_capacity(weight_sets.len());
    let mut vols = Vec::with_capacity(weight_sets.len());
    for w in weight_sets {
        let pi = DVector::from_column_slice(w);
        growth.push(instantaneous_growth_rate(mkt, &pi)?);
        vols.push(mkt.sigma().transpose() * &pi);
    }
    let n_steps = ((horizon / config.dt).ceil() as usize).max(1);
    let h = horizon / n_steps as f64;
    let sqrt_h = h.sqrt();
    let n_factors = mkt.num_factors();
    let mut rng = path_rng(config.seed, 0);
    let mut log_levels = vec![0.0f64; weight_sets.len()];
    let mut paths: Vec<SimulatedPath> = (0..weight_sets.len())
        .map(|_| SimulatedPath {
            times: Vec::with_capacity(n_steps + 1),
            levels: Vec::with_capacity(n_steps + 1),
            floor_hits: 0,
        })
        .collect();
    let mut z = vec![0.0f64; n_factors];
    for i in 0..=n_steps {
        let t = i as f64 * h;
        if i > 0 {
            for zj in z.iter_mut() {
                *zj = rng.sample(StandardNormal);
            }
            for (p, (g, v)) in log_levels.iter_mut().zip(growth.iter().zip(&vols)) {
                let shock: f64 = v.iter().zip(&z).map(|(a, b)| a * b).sum();
                *p += g * h + shock * sqrt_h;
            }
        }
        for (path, &ll) in paths.iter_mut().zip(&log_levels) {
            path.times.push(t);
            path.levels.push(ll.exp());
        }
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mmm::fair_put_price;

    fn reference_params(lambda_bar: f64) -> MmmParams {
        MmmParams::new(2.15, 0.053, lambda_bar, 100.0).unwrap()
    }

    #[test]
    fn exact_sampler_mean_matches_dim4_identity() {
        let p = reference_params(1.0);
        let (t, s, maturity) = (0.0, 100.0, 10.0);
        let c = p.phi(maturity) - p.phi(t);
        let mut rng = path_rng(7, 0);
        let n = 200_000;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for _ in 0..n {
            let v = sample_sstar_q(&p, t, s, maturity, &mut rng).unwrap();
            assert!(v > 0.0);
            sum += v;
            sumsq += v * v;
        }
        let (mean, stderr) = mean_and_stderr(sum, sumsq, n);
        let expected = s + 4.0 * c;
        assert!(
            (mean - expected).abs() < 3.0 * stderr,
            "mean {mean} vs {expected} (stderr {stderr})"
        );
    }

    #[test]
    fn exact_sampler_degenerate_transition() {
        let p = reference_params(1.0);
        let mut rng = path_rng(1, 0);
        // Vanishing activity increment: the draw concentrates at s.
        let v = sample_sstar_q(&p, 5.0, 123.4, 5.0 + 1e-13, &mut rng).unwrap();
        assert!((v - 123.4).abs() < 1e-3, "v = {v}");
        assert_eq!(sample_sstar_q(&p, 5.0, 123.4, 5.0, &mut rng).unwrap(), 123.4);
        assert!(sample_sstar_q(&p, 5.0, 123.4, 4.0, &mut rng).is_err());
    }

    #[test]
    fn q_path_chaining_and_validation() {
        let p = reference_params(0.0);
        let times: Vec<f64> = (0..=40).map(|i| i as f64 * 0.25).collect();
        let mut rng = path_rng(3, 0);
        let path = simulate_q_path(&p, 100.0, &times, &mut rng).unwrap();
        assert_eq!(path.levels.len(), times.len());
        assert_eq!(path.levels[0], 100.0);
        assert!(path.levels.iter().all(|&v| v > 0.0));
        assert_eq!(path.floor_hits, 0);
        assert!(simulate_q_path(&p, 100.0, &[0.0, 0.0], &mut rng).is_err());
        assert!(simulate_q_path(&p, -1.0, &times, &mut rng).is_err());
    }

    #[test]
    fn mc_price_agrees_with_closed_form() {
        let p = reference_params(1.0);
        let c = PutContract::new(100.0, 10.0).unwrap();
        let exact = fair_put_price(&p, 0.0, 100.0, &c).unwrap();
        let est = mc_fair_price(&p, &c, 0.0, 100.0, &SimConfig::new(200_000, 42)).unwrap();
        assert!(est.stderr > 0.0);
        assert!(
            (est.value - exact).abs() < 3.0 * est.stderr,
            "mc {} vs exact {exact} (stderr {})",
            est.value,
            est.stderr
        );
    }

    #[test]
    fn mc_price_trivial_cases() {
        let p = reference_params(1.0);
        let zero_strike = PutContract::new(0.0, 10.0).unwrap();
        let est = mc_fair_price(&p, &zero_strike, 0.0, 100.0, &SimConfig::new(1000, 1)).unwrap();
        assert_eq!(est.value, 0.0);
        assert_eq!(est.stderr, 0.0);
        let c = PutContract::new(100.0, 10.0).unwrap();
        let at_maturity = mc_fair_price(&p, &c, 10.0, 80.0, &SimConfig::new(1000, 1)).unwrap();
        assert_eq!(at_maturity.value, 20.0);
        assert_eq!(at_maturity.stderr, 0.0);
    }

    #[test]
    fn mc_price_deterministic_and_seed_sensitive() {
        let p = reference_params(1.0);
        let c = PutContract::new(100.0, 10.0).unwrap();
        let cfg = SimConfig::new(50_000, 42);
        let a = mc_fair_price(&p, &c, 0.0, 100.0, &cfg).unwrap();
        let b = mc_fair_price(&p, &c, 0.0, 100.0, &cfg).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.stderr.to_bits(), b.stderr.to_bits());
        let other = mc_fair_price(&p, &c, 0.0, 100.0, &SimConfig::new(50_000, 43)).unwrap();
        assert_ne!(a.value.to_bits(), other.value.to_bits());
    }

    #[test]
    fn mc_price_stderr_scales_like_inverse_sqrt() {
        let p = reference_params(1.0);
        let c = PutContract::new(100.0, 10.0).unwrap();
        let e1 = mc_fair_price(&p, &c, 0.0, 100.0, &SimConfig::new(10_000, 9)).unwrap();
        let e2 = mc_fair_price(&p, &c, 0.0, 100.0, &SimConfig::new(40_000, 9)).unwrap();
        let e3 = mc_fair_price(&p, &c, 0.0, 100.0, &SimConfig::new(160_000, 9)).unwrap();
        for (hi, lo) in [(e1.stderr, e2.stderr), (e2.stderr, e3.stderr)] {
            let ratio = hi / lo;
            assert!((1.6..=2.4).contains(&ratio), "ratio {ratio}");
        }
    }

    #[test]
    fn mc_price_antithetic_consistent() {
        let p = reference_params(1.0);
        let c = PutContract::new(100.0, 10.0).unwrap();
        let plain = mc_fair_price(&p, &c, 0.0, 100.0, &SimConfig::new(80_000, 11)).unwrap();
        let anti = mc_fair_price(
            &p,
            &c,
            0.0,
            100.0,
            &SimConfig::new(80_000, 11).with_antithetic(true),
        )
        .unwrap();
        assert_eq!(anti.n_paths, 80_000);
        let tol = 6.0 * plain.stderr.hypot(anti.stderr);
        assert!(
            (plain.value - anti.value).abs() < tol,
            "plain {} anti {} tol {tol}",
            plain.value,
            anti.value
        );
    }

    #[test]
    fn p_path_shape_and_degenerate_horizon() {
        let p = reference_params(1.0);
        let cfg = SimConfig::new(1, 5).with_dt(1.0 / 252.0);
        let path = simulate_p_path(&p, 0.0, 100.0, 2.0, &cfg).unwrap();
        assert_eq!(path.times.len(), 505);
        assert_eq!(path.levels.len(), 505);
        assert_eq!(path.times[0], 0.0);
        assert!((path.times[504] - 2.0).abs() < 1e-12);
        assert_eq!(path.levels[0], 100.0);
        assert!(path.levels.iter().all(|&v| v > 0.0));
        assert_eq!(path.floor_hits, 0);
        let flat = simulate_p_path(&p, 1.0, 50.0, 0.0, &cfg).unwrap();
        assert_eq!(flat.times, vec![1.0]);
        assert_eq!(flat.levels, vec![50.0]);
    }

    #[test]
    fn p_path_qv_recovers_activity_increment() {
        let p = reference_params(0.0);
        let mut rng = path_rng(21, 0);
        let path =
            simulate_p_path_with_rng(&p, 0.0, 100.0, 10.0, DEFAULT_DT, &mut rng).unwrap();
        let qv: f64 = path
            .levels
            .windows(2)
            .map(|w| {
                let d = w[1].sqrt() - w[0].sqrt();
                d * d
            })
            .sum();
        let expected = p.phi(10.0) - p.phi(0.0);
        assert!(
            (qv / expected - 1.0).abs() < 0.05,
            "qv {qv} vs activity increment {expected}"
        );
    }

    #[test]
    fn p_path_terminal_mean_matches_exact_law_when_tilt_vanishes() {
        // lambda_bar = 0 makes the real-world and pricing measures coincide,
        // so the Euler terminal mean must match s0 + 4 (phi(T) - phi(0)).
        let p = reference_params(0.0);
        let grid = EulerGrid::build(&p, 0.0, 5.0, DEFAULT_DT);
        let n = 2000;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for i in 0..n {
            let mut rng = path_rng(31, i as u64);
            let o = euler_path(&p, &grid, 100.0, &mut rng, false);
            let s_t = *o.levels.last().unwrap();
            sum += s_t;
            sumsq += s_t * s_t;
        }
        let (mean, stderr) = mean_and_stderr(sum, sumsq, n);
        let expected = 100.0 + 4.0 * (p.phi(5.0) - p.phi(0.0));
        assert!(
            (mean - expected).abs() < 6.0 * stderr,
            "mean {mean} vs {expected} (stderr {stderr})"
        );
    }

    #[test]
    fn lambda_martingale_is_exactly_one_without_tilt() {
        let p = reference_params(0.0);
        let cfg = SimConfig::new(64, 2).with_dt(1.0 / 252.0);
        let est = check_lambda_martingale(&p, 3.0, &cfg).unwrap();
        assert_eq!(est.value, 1.0);
        assert_eq!(est.stderr, 0.0);
    }

    #[test]
    fn lambda_martingale_mean_one_with_tilt() {
        let p = reference_params(1.0);
        let cfg = SimConfig::new(4000, 17).with_dt(1.0 / 504.0);
        let est = check_lambda_martingale(&p, 5.0, &cfg).unwrap();
        assert!(est.stderr > 0.0);
        assert!(
            (est.value - 1.0).abs() < 3.0 * est.stderr,
            "mean {} stderr {}",
            est.value,
            est.stderr
        );
    }

    #[test]
    fn lambda_variance_grows_with_horizon() {
        let p = reference_params(1.0);
        let spread = |maturity: f64| {
            let grid = EulerGrid::build(&p, 0.0, maturity, 1.0 / 504.0);
            let n = 3000;
            let mut sum = 0.0;
            let mut sumsq = 0.0;
            for i in 0..n {
                let mut rng = path_rng(23, i as u64);
                let o = euler_path(&p, &grid, p.s0, &mut rng, false);
                let l = o.log_lambda.exp();
                sum += l;
                sumsq += l * l;
            }
            let nf = n as f64;
            (sumsq - sum * sum / nf) / (nf - 1.0)
        };
        let v5 = spread(5.0);
        let v10 = spread(10.0);
        assert!(v10 > v5, "var(L_10) = {v10} should exceed var(L_5) = {v5}");
    }

    #[test]
    fn p_weighted_price_matches_exact_sampling() {
        // Bayes-rule transfer: density-weighted real-world pricing equals
        // pricing-measure sampling for a genuinely tilted model.
        let p = reference_params(1.0);
        let c = PutContract::new(100.0, 5.0).unwrap();
        let exact = fair_put_price(&p, 0.0, 100.0, &c).unwrap();
        let cfg = SimConfig::new(4000, 13).with_dt(1.0 / 504.0);
        let est = mc_fair_price_under_p(&p, &c, 0.0, 100.0, &cfg).unwrap();
        assert!(
            (est.value - exact).abs() < 3.0 * est.stderr.max(1e-6),
            "weighted {} vs exact {exact} (stderr {})",
            est.value,
            est.stderr
        );
    }

    #[test]
    fn growth_rate_basics() {
        let flat = SimulatedPath {
            times: vec![0.0, 1.0, 2.0],
            levels: vec![7.0, 7.0, 7.0],
            floor_hits: 0,
        };
        assert_eq!(empirical_growth_rate(&flat).unwrap(), 0.0);
        let exp_path = SimulatedPath {
            times: (0..=10).map(|i| i as f64).collect(),
            levels: (0..=10).map(|i| (0.05 * i as f64).exp()).collect(),
            floor_hits: 0,
        };
        assert!((empirical_growth_rate(&exp_path).unwrap() - 0.05).abs() < 1e-12);
        let single = SimulatedPath { times: vec![0.0], levels: vec![1.0], floor_hits: 0 };
        assert!(empirical_growth_rate(&single).is_err());
    }

    #[test]
    fn constant_mix_shared_noise_growth_ordering() {
        // Two-asset diagonal market: the growth-optimal weights beat a
        // leveraged alternative in realized growth for most seeds; both
        // paths see the same shocks.
        let mkt = MarketCoefficients::from_rows(
            &[0.08, 0.04],
            &[vec![0.2, 0.0], vec![0.0, 0.1]],
        )
        .unwrap();
        let gop = vec![1.0, 0.0];
        let alt = vec![-1.0, 2.0];
        let mut wins = 0;
        for seed in 0..40 {
            let cfg = SimConfig::new(1, seed).with_dt(1.0 / 12.0);
            let paths =
                simulate_constant_mix_paths(&mkt, &[gop.clone(), alt.clone()], 200.0, &cfg)
                    .unwrap();
            let g_gop = empirical_growth_rate(&paths[0]).unwrap();
            let g_alt = empirical_growth_rate(&paths[1]).unwrap();
            if g_gop >= g_alt {
                wins += 1;
            }
        }
        assert!(wins >= 38, "GOP won only {wins}/40");
    }

    #[test]
    fn constant_mix_deterministic_exponential_without_noise() {
        // A market with zero volatilities degenerates to deterministic
        // exponential growth at rate pi^T mu.
        let mkt = MarketCoefficients::from_rows(
            &[0.05, 0.02],
            &[vec![0.0, 0.0], vec![0.0, 0.0]],
        )
        .unwrap();
        let cfg = SimConfig::new(1, 4).with_dt(0.25);
        let paths =
            simulate_constant_mix_paths(&mkt, &[vec![0.5, 0.5]], 8.0, &cfg).unwrap();
        let g = empirical_growth_rate(&paths[0]).unwrap();
        assert!((g - 0.035).abs() < 1e-12, "g = {g}");
        assert!(simulate_constant_mix_paths(&mkt, &[vec![0.5, 0.4]], 8.0, &cfg).is_err());
    }

    #[test]
    fn config_validation() {
        let p = reference_params(1.0);
        let c = PutContract::new(100.0, 10.0).unwrap();
        assert!(mc_fair_price(&p, &c, 0.0, 100.0, &SimConfig::new(0, 1)).is_err());
        assert!(
            mc_fair_price(&p, &c, 0.0, 100.0, &SimConfig::new(10, 1).with_dt(-1.0)).is_err()
        );
        assert!(mc_fair_price(&p, &c, 11.0, 100.0, &SimConfig::new(10, 1)).is_err());
    }
}
