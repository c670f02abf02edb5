//! Constant-coefficient market primitives: growth-optimal portfolio (GOP)
//! construction, locally riskless portfolios, and extension of a market by an
//! additional traded asset.
//!
//! A market holds expected returns `mu` (one per asset) and a volatility
//! matrix `sigma` (assets x driving factors). The GOP weights solve the block
//! system
//!
//! ```text
//! [ sigma sigma^T  1 ] [ pi     ]   [ mu ]
//! [ 1^T            0 ] [ lambda ] = [ 1  ]
//! ```
//!
//! which encodes first-order growth optimality under the full-investment
//! constraint. The system can be singular (redundant assets) or infeasible
//! (no GOP); both cases are classified by a tolerance on the least-squares
//! residual, and singular-but-consistent systems return the minimum-norm
//! solution. The drift component `lambda` and the volatility `theta =
//! sigma^T pi` are unique even when the weights are not.

pub use nalgebra::{DMatrix, DVector};
use thiserror::Error;

/// Default residual / rank tolerance for the solvers.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MarketError {
    #[error("no growth-optimal portfolio: drift constraints are infeasible (residual {residual:.3e} > {threshold:.3e})")]
    NoGop { residual: f64, threshold: f64 },
    #[error("no locally riskless portfolio: every zero-volatility combination has zero net weight")]
    NoLrp,
    #[error("no growth-optimal portfolio for the extended market (residual {residual:.3e} > {threshold:.3e})")]
    NoExtendedGop { residual: f64, threshold: f64 },
    #[error("degenerate extension: {0}")]
    Degenerate(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("inconsistent market inputs: {0}")]
    InconsistentMarket(String),
    #[error("invalid coefficients: {0}")]
    InvalidCoefficients(String),
    #[error("portfolio weights must sum to 1, got {0}")]
    UnnormalizedWeights(f64),
}

/// Expected returns and volatility loadings of the risky assets.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketCoefficients {
    mu: DVector<f64>,
    sigma: DMatrix<f64>,
}

impl MarketCoefficients {
    pub fn new(mu: DVector<f64>, sigma: DMatrix<f64>) -> Result<Self, MarketError> {
        if mu.is_empty() || sigma.ncols() == 0 {
            return Err(MarketError::InvalidCoefficients(
                "need at least one asset and one driving factor".into(),
            ));
        }
        if sigma.nrows() != mu.len() {
            return Err(MarketError::DimensionMismatch(format!(
                "mu has {} assets but sigma has {} rows",
                mu.len(),
                sigma.nrows()
            )));
        }
        if mu.iter().chain(sigma.iter()).any(|v| !v.is_finite()) {
            return Err(MarketError::InvalidCoefficients(
                "coefficients must be finite".into(),
            ));
        }
        Ok(Self { mu, sigma })
    }

    pub fn from_rows(mu: &[f64], sigma_rows: &[Vec<f64>]) -> Result<Self, MarketError> {
        if sigma_rows.is_empty() {
            return Err(MarketError::InvalidCoefficients("no volatility rows".into()));
        }
        let n = sigma_rows[0].len();
        if sigma_rows.iter().any(|r| r.len() != n) {
            return Err(MarketError::DimensionMismatch(
                "volatility rows have unequal lengths".into(),
            ));
        }
        let m = sigma_rows.len();
        let sigma = DMatrix::from_fn(m, n, |i, j| sigma_rows[i][j]);
        Self::new(DVector::from_column_slice(mu), sigma)
    }

    /// Number of primary assets (m).
    pub fn num_assets(&self) -> usize {
        self.mu.len()
    }

    /// Number of driving factors (n).
    pub fn num_factors(&self) -> usize {
        self.sigma.ncols()
    }

    pub fn mu(&self) -> &DVector<f64> {
        &self.mu
    }

    pub fn sigma(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    /// Plain-text snapshot: one line per asset, expected return followed by
    /// the volatility row, whitespace separated.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for i in 0..self.num_assets() {
            out.push_str(&format!("{}", self.mu[i]));
            for j in 0..self.num_factors() {
                out.push_str(&format!(" {}", self.sigma[(i, j)]));
            }
            out.push('\n');
        }
        out
    }

    /// Parses the [`to_text`](Self::to_text) format.
    pub fn from_text(text: &str) -> Result<Self, MarketError> {
        let mut mu = Vec::new();
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let vals: Result<Vec<f64>, _> =
                line.split_whitespace().map(|t| t.parse::<f64>()).collect();
            let vals = vals.map_err(|e| {
                MarketError::InvalidCoefficients(format!("line {}: {e}", lineno + 1))
            })?;
            if vals.len() < 2 {
                return Err(MarketError::InvalidCoefficients(format!(
                    "line {}: need an expected return and at least one volatility entry",
                    lineno + 1
                )));
            }
            mu.push(vals[0]);
            rows.push(vals[1..].to_vec());
        }
        Self::from_rows(&mu, &rows)
    }
}

/// Growth-optimal portfolio of a market.
#[derive(Debug, Clone, PartialEq)]
pub struct GopSolution {
    /// Portfolio fractions, summing to 1.
    pub weights: DVector<f64>,
    /// Drift parameter of the GOP dynamics (net growth rate).
    pub lambda_star: f64,
    /// GOP volatility vector theta = sigma^T pi.
    pub theta: DVector<f64>,
    /// Euclidean residual of the optimality system at the solution.
    pub residual: f64,
}

/// Locally riskless portfolio: a full-investment combination with zero
/// volatility in every driving factor.
#[derive(Debug, Clone, PartialEq)]
pub struct LrpSolution {
    pub weights: DVector<f64>,
    /// Deterministic short rate earned by the portfolio.
    pub short_rate: f64,
    /// Max-norm of sigma^T pi at the solution.
    pub residual: f64,
}

/// Result of extending a market by one asset with drift `alpha` and
/// volatility row `beta`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtensionSolution {
    /// Replicating combination of the primary assets (sums to 1).
    pub x_star: DVector<f64>,
    /// Weight of the new asset in the extended GOP.
    pub p_star: f64,
    /// Drift parameter of the extended GOP.
    pub lambda_star: f64,
    /// Extended GOP volatility vector.
    pub theta: DVector<f64>,
    /// Extended GOP weights over (primary assets..., new asset).
    pub weights: DVector<f64>,
    pub residual: f64,
    /// True when the new asset's drift already matches the no-arbitrage
    /// drift so the original GOP remains optimal.
    pub redundant: bool,
}

fn optimality_matrix(mkt: &MarketCoefficients) -> DMatrix<f64> {
    let m = mkt.num_assets();
    let cov = &mkt.sigma * mkt.sigma.transpose();
    let mut big = DMatrix::zeros(m + 1, m + 1);
    big.view_mut((0, 0), (m, m)).copy_from(&cov);
    for i in 0..m {
        big[(i, m)] = 1.0;
        big[(m, i)] = 1.0;
    }
    big
}

/// Minimum-norm least-squares solve via SVD; singular values below
/// `tol * max_sv` are treated as zero. Returns the solution and the Euclidean
/// residual.
fn min_norm_solve(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    tol: f64,
) -> Result<(DVector<f64>, f64), MarketError> {
    let svd = a.clone().svd(true, true);
    let max_sv = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let eps = if max_sv > 0.0 { tol * max_sv } else { tol };
    let x = svd
        .solve(b, eps)
        .map_err(|e| MarketError::InvalidCoefficients(e.to_string()))?;
    let mut x = DVector::from_column_slice(x.as_slice());
    // Iterative refinement: the decomposition's solve alone leaves ~1e-11
    // errors even on well-conditioned systems. Each pass applies the same
    // pseudo-inverse to the residual, so minimum-norm solutions stay
    // minimum-norm.
    let mut residual = (a * &x - b).norm();
    for _ in 0..3 {
        if residual <= 1e-15 * (1.0 + b.norm()) {
            break;
        }
        let r = b - a * &x;
        let Ok(dx) = svd.solve(&r, eps) else { break };
        let candidate = &x + DVector::from_column_slice(dx.as_slice());
        let cand_residual = (a * &candidate - b).norm();
        if cand_residual >= residual {
            break;
        }
        x = candidate;
        residual = cand_residual;
    }
    Ok((x, residual))
}

fn check_tol(tol: f64) -> Result<(), MarketError> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(MarketError::InvalidCoefficients(format!(
            "tolerance must be positive and finite, got {tol}"
        )));
    }
    Ok(())
}

/// Solves for the growth-optimal portfolio. Singular-but-consistent systems
/// yield the minimum-norm weights; infeasible systems yield [`MarketError::NoGop`].
pub fn solve_gop(mkt: &MarketCoefficients, tol: f64) -> Result<GopSolution, MarketError> {
    check_tol(tol)?;
    let m = mkt.num_assets();
    let big = optimality_matrix(mkt);
    let mut rhs = DVector::zeros(m + 1);
    rhs.rows_mut(0, m).copy_from(&mkt.mu);
    rhs[m] = 1.0;
    let (x, residual) = min_norm_solve(&big, &rhs, tol)?;
    let threshold = tol * (1.0 + rhs.norm());
    if residual > threshold {
        return Err(MarketError::NoGop { residual, threshold });
    }
    let weights = DVector::from(x.rows(0, m).clone_owned());
    let lambda_star = x[m];
    let theta = mkt.sigma.transpose() * &weights;
    Ok(GopSolution {
        weights,
        lambda_star,
        theta,
        residual,
    })
}

fn check_weights(mkt: &MarketCoefficients, pi: &DVector<f64>) -> Result<(), MarketError> {
    if pi.len() != mkt.num_assets() {
        return Err(MarketError::DimensionMismatch(format!(
            "portfolio has {} weights for {} assets",
            pi.len(),
            mkt.num_assets()
        )));
    }
    let sum: f64 = pi.iter().sum();
    if (sum - 1.0).abs() > 1e-8 {
        return Err(MarketError::UnnormalizedWeights(sum));
    }
    Ok(())
}

/// Drift and diffusion loadings of a fully invested portfolio expressed
/// against the GOP quantities: drift = lambda + (pi^T sigma) theta,
/// diffusion = sigma^T pi.
#[derive(Debug, Clone, PartialEq)]
pub struct PortfolioSde {
    pub drift: f64,
    pub diffusion: DVector<f64>,
}

pub fn portfolio_sde(
    mkt: &MarketCoefficients,
    gop: &GopSolution,
    pi: &DVector<f64>,
) -> Result<PortfolioSde, MarketError> {
    check_weights(mkt, pi)?;
    let diffusion = mkt.sigma.transpose() * pi;
    let drift = gop.lambda_star + diffusion.dot(&gop.theta);
    // The same drift must come out of the raw coefficients; a mismatch means
    // the supplied GOP does not belong to this market.
    let direct = pi.dot(&mkt.mu);
    let scale = 1.0 + direct.abs();
    if (direct - drift).abs() > 1e-8 * scale {
        return Err(MarketError::InconsistentMarket(format!(
            "portfolio drift {direct} disagrees with lambda + diffusion.theta = {drift}"
        )));
    }
    Ok(PortfolioSde { drift, diffusion })
}

/// Volatility of the portfolio denominated in the GOP: sigma^T pi - theta.
/// The benchmarked portfolio is driftless, which is what makes the GOP the
/// natural pricing numeraire.
pub fn benchmarked_volatility(
    mkt: &MarketCoefficients,
    gop: &GopSolution,
    pi: &DVector<f64>,
) -> Result<DVector<f64>, MarketError> {
    check_weights(mkt, pi)?;
    Ok(mkt.sigma.transpose() * pi - &gop.theta)
}

/// Instantaneous growth rate pi^T mu - |sigma^T pi|^2 / 2 of a fully
/// invested portfolio.
pub fn instantaneous_growth_rate(
    mkt: &MarketCoefficients,
    pi: &DVector<f64>,
) -> Result<f64, MarketError> {
    check_weights(mkt, pi)?;
    let vol = mkt.sigma.transpose() * pi;
    Ok(pi.dot(&mkt.mu) - 0.5 * vol.norm_squared())
}

/// Solves for the locally riskless portfolio: the normalized projection of
/// the ones vector onto the null space of sigma^T. Among unit kernel vectors
/// this maximizes the net weight |1^T k|, making the choice deterministic.
pub fn solve_lrp(mkt: &MarketCoefficients, tol: f64) -> Result<LrpSolution, MarketError> {
    check_tol(tol)?;
    let m = mkt.num_assets();
    // ker(sigma^T) is the orthogonal complement of the column space of sigma.
    let svd = mkt.sigma.clone().svd(true, false);
    let u = svd.u.as_ref().expect("requested U");
    let max_sv = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let cutoff = tol * max_sv.max(1.0);
    let ones = DVector::from_element(m, 1.0);
    let mut k = ones.clone();
    for (j, sv) in svd.singular_values.iter().enumerate() {
        if *sv > cutoff {
            let col = u.column(j);
            let coef = col.dot(&ones);
            k -= col * coef;
        }
    }
    let net = k.sum(); // equals |k|^2 for a projection of the ones vector
    if net.abs() <= tol * (m as f64) {
        return Err(MarketError::NoLrp);
    }
    let weights = k / net;
    let residual = (mkt.sigma.transpose() * &weights).amax();
    if residual > tol * (1.0 + max_sv) {
        return Err(MarketError::NoLrp);
    }
    let short_rate = weights.dot(&mkt.mu);
    Ok(LrpSolution {
        weights,
        short_rate,
        residual,
    })
}

/// Extends the market by an asset with drift `alpha` and volatility row
/// `beta`, returning the GOP of the enlarged market.
///
/// When `alpha` already equals the no-arbitrage drift `lambda + beta^T theta`
/// the new asset is redundant for growth and the original GOP carries over
/// with zero weight on it. Otherwise the replicating combination `x` solves
/// the same optimality system with right-hand side (sigma beta; 1), and the
/// new asset's weight is the drift gap divided by |beta - sigma^T x|^2.
pub fn extend_market(
    mkt: &MarketCoefficients,
    gop: &GopSolution,
    alpha: f64,
    beta: &DVector<f64>,
    tol: f64,
) -> Result<ExtensionSolution, MarketError> {
    check_tol(tol)?;
    let m = mkt.num_assets();
    let n = mkt.num_factors();
    if beta.len() != n {
        return Err(MarketError::DimensionMismatch(format!(
            "beta has {} entries for {} driving factors",
            beta.len(),
            n
        )));
    }
    if !alpha.is_finite() || beta.iter().any(|v| !v.is_finite()) {
        return Err(MarketError::InvalidCoefficients(
            "extension coefficients must be finite".into(),
        ));
    }
    let drift_gap = alpha - gop.lambda_star - beta.dot(&gop.theta);
    let scale = 1.0 + alpha.abs() + beta.norm() * (1.0 + gop.theta.norm());
    if drift_gap.abs() <= tol * scale {
        let mut weights = DVector::zeros(m + 1);
        weights.rows_mut(0, m).copy_from(&gop.weights);
        return Ok(ExtensionSolution {
            x_star: DVector::zeros(m),
            p_star: 0.0,
            lambda_star: gop.lambda_star,
            theta: gop.theta.clone(),
            weights,
            residual: 0.0,
            redundant: true,
        });
    }
    let big = optimality_matrix(mkt);
    let mut rhs = DVector::zeros(m + 1);
    rhs.rows_mut(0, m).copy_from(&(&mkt.sigma * beta));
    rhs[m] = 1.0;
    let (x, residual) = min_norm_solve(&big, &rhs, tol)?;
    let threshold = tol * (1.0 + rhs.norm());
    if residual > threshold {
        return Err(MarketError::NoExtendedGop { residual, threshold });
    }
    let x_star = DVector::from(x.rows(0, m).clone_owned());
    let v = beta - mkt.sigma.transpose() * &x_star;
    let q = v.norm_squared();
    if q <= tol * scale {
        return Err(MarketError::Degenerate(format!(
            "new asset is replicable (|beta - sigma^T x|^2 = {q:.3e}) but its drift gap {drift_gap:.3e} is nonzero"
        )));
    }
    let p_star = drift_gap / q;
    let theta = &gop.theta + &v * p_star;
    let lambda_star = gop.lambda_star - p_star * v.dot(&(mkt.sigma.transpose() * &x_star));
    let mut weights = DVector::zeros(m + 1);
    for i in 0..m {
        weights[i] = gop.weights[i] - p_star * x_star[i];
    }
    weights[m] = p_star;
    Ok(ExtensionSolution {
        x_star,
        p_star,
        lambda_star,
        theta,
        weights,
        residual,
        redundant: false,
    })
}

/// Extends the market by a zero-volatility account with deterministic growth
/// `rate` (a savings account).
pub fn extend_by_savings_account(
    mkt: &MarketCoefficients,
    gop: &GopSolution,
    rate: f64,
) -> Result<ExtensionSolution, MarketError> {
    let beta = DVector::zeros(mkt.num_factors());
    extend_market(mkt, gop, rate, &beta, DEFAULT_TOL)
}
