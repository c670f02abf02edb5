//! Activity-time calibration from a discounted index series.
//!
//! The model clock is observable: the quadratic variation of `sqrt(S)`
//! accumulated over `[t_0, t]` equals `phi(t) - phi(t_0)` path by path, so
//! `ln(Q_t + e^{tau(t_0)})` should sit on the straight line `tau0 + a t`.
//! Calibration therefore has two stages: [`realized_qv_sqrt`] turns the
//! observed levels into the cumulative quadratic variation `Q`, and
//! [`fit_trendline`] least-squares fits the intercept and slope of the log
//! activity. The intercept enters the objective inside a logarithm, so it
//! cannot be regressed linearly; we search it with a bracketed
//! golden-section scan and solve the slope in closed form at each trial
//! intercept.
//!
//! File plumbing reads and writes `date,value` CSV with ISO dates; times are
//! year fractions from the first observation using an actual/365.25 day
//! count.

use chrono::NaiveDate;
use std::path::Path;
use thiserror::Error;

/// Day-count convention used to turn dates into year fractions.
pub const DAYS_PER_YEAR: f64 = 365.25;

#[derive(Debug, Error)]
pub enum CalibrateError {
    #[error("series too short: need at least {needed} observations, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("line {line}: {message}")]
    ParseError { line: usize, message: String },
    #[error("line {line}: index value must be strictly positive")]
    NonPositiveValue { line: usize },
    #[error("line {line}: observation times must be strictly increasing")]
    NonMonotoneTime { line: usize },
    #[error("trendline fit failed: {0}")]
    FitFailed(String),
    #[error("i/o: {0}")]
    Io(String),
}

/// Observed discounted index path. Construction checks ordering and
/// positivity only; minimum-length requirements are imposed by the
/// operations that need them (quadratic variation needs 2 points, the
/// trendline fit needs 3).
#[derive(Debug, Clone, PartialEq)]
pub struct IndexSeries {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl IndexSeries {
    /// `times` in years, strictly increasing; `values` strictly positive.
    /// Error line numbers refer to 1-based positions in the input slices.
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self, CalibrateError> {
        if times.len() != values.len() {
            return Err(CalibrateError::ParseError {
                line: 0,
                message: format!(
                    "times and values lengths differ: {} vs {}",
                    times.len(),
                    values.len()
                ),
            });
        }
        if times.is_empty() {
            return Err(CalibrateError::TooShort { needed: 1, got: 0 });
        }
        for (i, (&t, &v)) in times.iter().zip(&values).enumerate() {
            if !t.is_finite() {
                return Err(CalibrateError::ParseError {
                    line: i + 1,
                    message: format!("non-finite time {t}"),
                });
            }
            if !(v > 0.0) || !v.is_finite() {
                return Err(CalibrateError::NonPositiveValue { line: i + 1 });
            }
            if i > 0 && t <= times[i - 1] {
                return Err(CalibrateError::NonMonotoneTime { line: i + 1 });
            }
        }
        Ok(Self { times, values })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Fitted trendline of the log activity together with the per-observation
/// activity estimates and fit quality.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationResult {
    /// Intercept of the log-activity trendline at t = 0.
    pub tau0_bar: f64,
    /// Slope of the log-activity trendline, per year; positive for a
    /// successful fit.
    pub a_bar: f64,
    /// Estimated log activity ln(Q_k + e^{tau(t_0)}) per observation;
    /// nondecreasing.
    pub tau_series: Vec<f64>,
    /// Cumulative quadratic variation of sqrt(S) per observation, Q_0 = 0.
    pub qv_series: Vec<f64>,
    /// Root-mean-square residual of the log-activity fit.
    pub rms_residual: f64,
}

/// Cumulative quadratic variation of the square root of the series:
/// Q_k = sum_{i<=k} (sqrt(v_i) - sqrt(v_{i-1}))^2 with Q_0 = 0.
pub fn realized_qv_sqrt(series: &IndexSeries) -> Result<Vec<f64>, CalibrateError> {
    if series.len() < 2 {
        return Err(CalibrateError::TooShort { needed: 2, got: series.len() });
    }
    let mut qv = Vec::with_capacity(series.len());
    qv.push(0.0);
    let mut acc = 0.0;
    let mut prev_root = series.values[0].sqrt();
    for &v in &series.values[1..] {
        let root = v.sqrt();
        let inc = root - prev_root;
        acc += inc * inc;
        qv.push(acc);
        prev_root = root;
    }
    Ok(qv)
}

const C_LO: f64 = -5.0;
const C_HI: f64 = 10.0;
const GRID_STEP: f64 = 0.025;
const GOLDEN_ITERS: usize = 80;

/// Fit (tau0, a) by minimizing sum_k (ln(Q_k + e^c) - (c + a (t_k - t_0)))^2
/// with a golden-section search over the intercept c on [-5, 10] and
/// closed-form least squares for the slope at each trial intercept. Here c
/// is the log activity at the first observation time; the reported tau0_bar
/// is shifted back to t = 0, so series not starting at time zero are handled
/// consistently.
pub fn fit_trendline(series: &IndexSeries) -> Result<CalibrationResult, CalibrateError> {
    if series.len() < 3 {
        return Err(CalibrateError::TooShort { needed: 3, got: series.len() });
    }
    let qv = realized_qv_sqrt(series)?;
    if !(*qv.last().unwrap() > 0.0) {
        return Err(CalibrateError::FitFailed(
            "series has zero quadratic variation; no activity to fit".into(),
        ));
    }
    let t0 = series.times[0];
    let u: Vec<f64> = series.times.iter().map(|&t| t - t0).collect();
    let uu: f64 = u.iter().map(|&x| x * x).sum();

    // Slope minimizing the objective at fixed intercept, and the objective
    // value itself. The k = 0 residual is identically zero by construction.
    let slope_at = |c: f64| -> f64 {
        let ec = c.exp();
        let num: f64 = u
            .iter()
            .zip(&qv)
            .map(|(&uk, &q)| uk * ((q + ec).ln() - c))
            .sum();
        num / uu
    };
    let objective = |c: f64| -> f64 {
        let ec = c.exp();
        let a = slope_at(c);
        u.iter()
            .zip(&qv)
            .map(|(&uk, &q)| {
                let r = (q + ec).ln() - (c + a * uk);
                r * r
            })
            .sum()
    };

    // The raw objective is not unimodal on the bracket: once e^c dwarfs the
    // accumulated QV, the log residuals collapse in scale like e^{-c} while
    // keeping their shape, so the objective decays monotonically toward the
    // upper boundary. The meaningful fit is the interior local minimum.
    // Scan a fixed grid, keep the deepest strictly interior dip, and refine
    // it by golden section; a scan without any interior dip is the
    // "objective non-improving across the bracket" failure.
    let n_grid = ((C_HI - C_LO) / GRID_STEP).round() as usize;
    let grid_vals: Vec<f64> = (0..=n_grid)
        .map(|k| objective(C_LO + k as f64 * GRID_STEP))
        .collect();
    if grid_vals.iter().any(|v| !v.is_finite()) {
        return Err(CalibrateError::FitFailed(
            "objective not finite on the search bracket".into(),
        ));
    }
    let mut best: Option<(usize, f64)> = None;
    for k in 1..n_grid {
        if grid_vals[k] < grid_vals[k - 1]
            && grid_vals[k] < grid_vals[k + 1]
            && best.is_none_or(|(_, v)| grid_vals[k] < v)
        {
            best = Some((k, grid_vals[k]));
        }
    }
    let Some((k_min, _)) = best else {
        return Err(CalibrateError::FitFailed(
            "objective has no interior minimum on the intercept bracket [-5, 10]".into(),
        ));
    };

    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut lo = C_LO + (k_min - 1) as f64 * GRID_STEP;
    let mut hi = C_LO + (k_min + 1) as f64 * GRID_STEP;
    let mut c1 = hi - INV_PHI * (hi - lo);
    let mut c2 = lo + INV_PHI * (hi - lo);
    let mut f1 = objective(c1);
    let mut f2 = objective(c2);
    for _ in 0..GOLDEN_ITERS {
        if f1 <= f2 {
            hi = c2;
            c2 = c1;
            f2 = f1;
            c1 = hi - INV_PHI * (hi - lo);
            f1 = objective(c1);
        } else {
            lo = c1;
            c1 = c2;
            f1 = f2;
            c2 = lo + INV_PHI * (hi - lo);
            f2 = objective(c2);
        }
    }
    let c_opt = 0.5 * (lo + hi);
    let a_bar = slope_at(c_opt);
    if !a_bar.is_finite() || a_bar <= 0.0 {
        return Err(CalibrateError::FitFailed(format!(
            "fitted activity slope {a_bar} is not positive; \
             the series carries no usable quadratic variation trend"
        )));
    }

    let ec = c_opt.exp();
    let tau_series: Vec<f64> = qv.iter().map(|&q| (q + ec).ln()).collect();
    let n = tau_series.len() as f64;
    let ss: f64 = tau_series
        .iter()
        .zip(&u)
        .map(|(&tau, &uk)| {
            let r = tau - (c_opt + a_bar * uk);
            r * r
        })
        .sum();
    Ok(CalibrationResult {
        tau0_bar: c_opt - a_bar * t0,
        a_bar,
        tau_series,
        qv_series: qv,
        rms_residual: (ss / n).sqrt(),
    })
}

/// Read a `date,value` CSV (ISO dates, strictly positive values) into an
/// [`IndexSeries`] with times as actual/365.25 year fractions from the first
/// row. Reported line numbers count the header as line 1.
pub fn load_series(path: &Path) -> Result<IndexSeries, CalibrateError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CalibrateError::Io(e.to_string()))?;
    {
        let headers = rdr
            .headers()
            .map_err(|e| CalibrateError::ParseError { line: 1, message: e.to_string() })?;
        let fields: Vec<String> =
            headers.iter().map(|h| h.to_ascii_lowercase()).collect();
        if fields != ["date", "value"] {
            return Err(CalibrateError::ParseError {
                line: 1,
                message: format!("expected header `date,value`, got `{}`", fields.join(",")),
            });
        }
    }
    let mut times = Vec::new();
    let mut values = Vec::new();
    let mut first_date: Option<NaiveDate> = None;
    let mut prev_date: Option<NaiveDate> = None;
    for (idx, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| CalibrateError::ParseError {
            line: e.position().map(|p| p.line() as usize).unwrap_or(idx + 2),
            message: e.to_string(),
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(idx + 2);
        if record.len() != 2 {
            return Err(CalibrateError::ParseError {
                line,
                message: format!("expected 2 fields, got {}", record.len()),
            });
        }
        let date = NaiveDate::parse_from_str(&record[0], "%Y-%m-%d").map_err(|e| {
            CalibrateError::ParseError {
                line,
                message: format!("bad date `{}`: {e}", &record[0]),
            }
        })?;
        let value: f64 = record[1].parse().map_err(|e| CalibrateError::ParseError {
            line,
            message: format!("bad value `{}`: {e}", &record[1]),
        })?;
        if !value.is_finite() {
            return Err(CalibrateError::ParseError {
                line,
                message: format!("value `{value}` is not finite"),
            });
        }
        if value <= 0.0 {
            return Err(CalibrateError::NonPositiveValue { line });
        }
        if let Some(prev) = prev_date {
            if date <= prev {
                return Err(CalibrateError::NonMonotoneTime { line });
            }
        }
        let base = *first_date.get_or_insert(date);
        times.push((date - base).num_days() as f64 / DAYS_PER_YEAR);
        values.push(value);
        prev_date = Some(date);
    }
    if times.is_empty() {
        return Err(CalibrateError::TooShort { needed: 1, got: 0 });
    }
    IndexSeries::new(times, values)
}

/// Write a series as `date,value` CSV, mapping each time to
/// `base_date + round(t * 365.25)` days. Values are printed with the
/// shortest representation that round-trips, so a load of the written file
/// reproduces the series bit-exactly.
pub fn save_series(
    path: &Path,
    series: &IndexSeries,
    base_date: NaiveDate,
) -> Result<(), CalibrateError> {
    let mut wtr = csv::Writer::from_path(path).map_err(|e| CalibrateError::Io(e.to_string()))?;
    wtr.write_record(["date", "value"])
        .map_err(|e| CalibrateError::Io(e.to_string()))?;
    for (&t, &v) in series.times.iter().zip(&series.values) {
        let days = (t * DAYS_PER_YEAR).round() as i64;
        let date = base_date + chrono::Duration::days(days);
        wtr.write_record([date.format("%Y-%m-%d").to_string(), format!("{v}")])
            .map_err(|e| CalibrateError::Io(e.to_string()))?;
    }
    wtr.flush().map_err(|e| CalibrateError::Io(e.to_string()))
}
