//! Command-line surface: calibrate, price, compare, hedge, simulate,
//! selftest.
//!
//! Exit codes: 0 on success, 2 for usage or input errors (bad flags,
//! unparseable or inconsistent data files, invalid parameters), 3 for
//! numerical failures (non-convergence, out-of-tolerance internal checks).
//! All commands are deterministic for fixed flags and seed; repeated runs
//! produce byte-identical CSV and SVG outputs.

use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use clap::{Parser, Subcommand, ValueEnum};

use crate::calibrate::{
    fit_trendline, load_series, realized_qv_sqrt, save_series, CalibrateError, IndexSeries,
    DAYS_PER_YEAR,
};
use crate::hedge::{backtest, HedgeError, InitialValueRule};
use crate::market::{solve_gop, MarketCoefficients, DEFAULT_TOL};
use crate::mmm::{
    fair_put_price, risk_neutral_put_price, savings_bond_defect, MmmError, MmmParams, PutContract,
};
use crate::plot::{line_chart, Series};
use crate::simulate::{
    mc_fair_price, path_rng, simulate_p_path_with_rng, simulate_q_path, SimConfig, SimulateError,
    DEFAULT_DT,
};
use crate::special::{bessel_i1, gamma_fn, noncentral_chi2_cdf, upper_incomplete_gamma};

#[derive(Parser)]
#[command(
    name = "bnpricing",
    version,
    about = "Growth-optimal portfolios, activity-time index calibration, \
             and real-world put pricing and hedging"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the activity trendline to a date,value CSV of discounted index levels
    Calibrate {
        /// Input CSV with header `date,value`
        #[arg(long)]
        data: PathBuf,
        /// Output CSV report `t,qv,tau,trend`
        #[arg(long)]
        out: PathBuf,
    },
    /// Price a European put: closed form, risk-neutral comparison, optional Monte Carlo
    Price {
        /// Trendline intercept of the log activity
        #[arg(long)]
        tau0: f64,
        /// Trendline slope of the log activity, per year
        #[arg(long)]
        a: f64,
        /// Index level at pricing time
        #[arg(long)]
        s0: f64,
        #[arg(long)]
        strike: f64,
        /// Maturity in years from pricing time
        #[arg(long)]
        maturity: f64,
        /// Cross-check with this many exact Monte Carlo paths
        #[arg(long)]
        mc: Option<usize>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Pair Monte Carlo draws antithetically
        #[arg(long)]
        antithetic: bool,
    },
    /// Emit fair and risk-neutral put price curves along an observed series
    Compare {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        strike: f64,
        /// Output CSV `t,s,fair,risk_neutral`; the chart lands next to it
        /// with extension .svg
        #[arg(long)]
        out: PathBuf,
        /// Override the fitted trendline intercept (requires --a)
        #[arg(long)]
        tau0: Option<f64>,
        /// Override the fitted trendline slope (requires --tau0)
        #[arg(long)]
        a: Option<f64>,
    },
    /// Delta-hedge a put along an observed series and report tracking error
    Hedge {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        strike: f64,
        /// Initial portfolio value rule
        #[arg(long)]
        rule: RuleArg,
        /// Output CSV `t,s,option_value,portfolio_value,delta`; chart lands
        /// next to it with extension .svg
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        tau0: Option<f64>,
        #[arg(long)]
        a: Option<f64>,
    },
    /// Simulate a daily real-world index path and write it as date,value CSV
    Simulate {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 2.15)]
        tau0: f64,
        #[arg(long, default_value_t = 0.053)]
        a: f64,
        /// Real-world drift tilt
        #[arg(long, default_value_t = 0.0)]
        lambda_bar: f64,
        #[arg(long, default_value_t = 100.0)]
        s0: f64,
        /// Path length in years
        #[arg(long, default_value_t = 10.0)]
        horizon: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Euler substep in years
        #[arg(long, default_value_t = DEFAULT_DT)]
        dt: f64,
        /// Calendar date of the first observation
        #[arg(long, default_value = "1984-01-02", value_parser = parse_date)]
        start_date: NaiveDate,
    },
    /// Run the built-in verification battery
    Selftest {
        /// Test hook: inject a small error to prove failures are caught
        #[arg(long, hide = true)]
        perturb: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum RuleArg {
    /// Start from the minimal replication price
    Fair,
    /// Start from the classical risk-neutral price
    Rn,
}

fn parse_date(s: &str) -> Result<NaiveDate, String> {
    NaiveDate::parse_from_str(s, "%Y-%m-%d").map_err(|e| format!("bad date `{s}`: {e}"))
}

struct Failure {
    code: i32,
    message: String,
}

fn input_error(message: impl Into<String>) -> Failure {
    Failure { code: 2, message: message.into() }
}

impl From<CalibrateError> for Failure {
    fn from(e: CalibrateError) -> Self {
        Failure { code: 2, message: e.to_string() }
    }
}

impl From<MmmError> for Failure {
    fn from(e: MmmError) -> Self {
        let code = match e {
            MmmError::Domain(_) => 2,
            MmmError::Numerical(_) | MmmError::Special(_) => 3,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<SimulateError> for Failure {
    fn from(e: SimulateError) -> Self {
        let code = match &e {
            SimulateError::Domain(_) | SimulateError::Market(_) => 2,
            SimulateError::StepTooLarge { .. } => 3,
            SimulateError::Model(m) => match m {
                MmmError::Domain(_) => 2,
                _ => 3,
            },
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<HedgeError> for Failure {
    fn from(e: HedgeError) -> Self {
        let code = match &e {
            HedgeError::Domain(_) | HedgeError::SeriesContractMismatch(_) => 2,
            HedgeError::Model(m) => match m {
                MmmError::Domain(_) => 2,
                _ => 3,
            },
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure { code: 2, message: format!("i/o: {e}") }
    }
}

/// Parses the process arguments, runs the selected command, and returns the
/// process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests land here too; clap picks the
            // stream and the code (0 for help, 2 for usage errors).
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Calibrate { data, out } => cmd_calibrate(&data, &out),
        Command::Price { tau0, a, s0, strike, maturity, mc, seed, antithetic } => {
            cmd_price(tau0, a, s0, strike, maturity, mc, seed, antithetic)
        }
        Command::Compare { data, strike, out, tau0, a } => {
            cmd_compare(&data, strike, &out, resolve_overrides(tau0, a)?)
        }
        Command::Hedge { data, strike, rule, out, tau0, a } => {
            cmd_hedge(&data, strike, rule, &out, resolve_overrides(tau0, a)?)
        }
        Command::Simulate { out, tau0, a, lambda_bar, s0, horizon, seed, dt, start_date } => {
            cmd_simulate(&out, tau0, a, lambda_bar, s0, horizon, seed, dt, start_date)
        }
        Command::Selftest { perturb } => cmd_selftest(perturb),
    }
}

fn resolve_overrides(tau0: Option<f64>, a: Option<f64>) -> Result<Option<(f64, f64)>, Failure> {
    match (tau0, a) {
        (Some(t), Some(a)) => Ok(Some((t, a))),
        (None, None) => Ok(None),
        _ => Err(input_error("provide both --tau0 and --a, or neither")),
    }
}

/// Trendline parameters for a loaded series: explicit overrides win,
/// otherwise fit from the data.
fn series_params(
    series: &IndexSeries,
    overrides: Option<(f64, f64)>,
) -> Result<MmmParams, Failure> {
    let (tau0, a) = match overrides {
        Some(pair) => pair,
        None => {
            let fit = fit_trendline(series)?;
            (fit.tau0_bar, fit.a_bar)
        }
    };
    Ok(MmmParams::new(tau0, a, 0.0, series.values()[0])?)
}

fn write_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<(), Failure> {
    let mut wtr = csv::Writer::from_path(path)
        .map_err(|e| input_error(format!("cannot write {}: {e}", path.display())))?;
    wtr.write_record(header).map_err(|e| input_error(e.to_string()))?;
    for row in rows {
        wtr.write_record(row.iter().map(|v| format!("{v}")))
            .map_err(|e| input_error(e.to_string()))?;
    }
    wtr.flush()?;
    Ok(())
}

fn cmd_calibrate(data: &Path, out: &Path) -> Result<(), Failure> {
    let series = load_series(data)?;
    let fit = fit_trendline(&series)?;
    let rows: Vec<Vec<f64>> = series
        .times()
        .iter()
        .zip(fit.qv_series.iter().zip(&fit.tau_series))
        .map(|(&t, (&qv, &tau))| vec![t, qv, tau, fit.tau0_bar + fit.a_bar * t])
        .collect();
    write_csv(out, &["t", "qv", "tau", "trend"], &rows)?;
    println!("tau0_bar={}", fit.tau0_bar);
    println!("a_bar={}", fit.a_bar);
    println!("rms={}", fit.rms_residual);
    println!("observations={}", series.len());
    println!("out={}", out.display());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_price(
    tau0: f64,
    a: f64,
    s0: f64,
    strike: f64,
    maturity: f64,
    mc: Option<usize>,
    seed: u64,
    antithetic: bool,
) -> Result<(), Failure> {
    let params = MmmParams::new(tau0, a, 0.0, s0)?;
    let contract = PutContract::new(strike, maturity)?;
    let fair = fair_put_price(&params, 0.0, s0, &contract)?;
    let rn = risk_neutral_put_price(&params, 0.0, s0, &contract)?;
    let defect = savings_bond_defect(&params, 0.0, s0, maturity)?;
    println!("fair={fair}");
    println!("risk_neutral={rn}");
    println!("defect={defect}");
    if let Some(n_paths) = mc {
        let config = SimConfig::new(n_paths, seed).with_antithetic(antithetic);
        let est = mc_fair_price(&params, &contract, 0.0, s0, &config)?;
        println!("mc_estimate={}", est.value);
        println!("mc_stderr={}", est.stderr);
        println!("mc_n_paths={}", est.n_paths);
    }
    Ok(())
}

fn svg_sibling(out: &Path) -> PathBuf {
    out.with_extension("svg")
}

fn cmd_compare(
    data: &Path,
    strike: f64,
    out: &Path,
    overrides: Option<(f64, f64)>,
) -> Result<(), Failure> {
    let series = load_series(data)?;
    let params = series_params(&series, overrides)?;
    let maturity = *series.times().last().unwrap();
    let contract = PutContract::new(strike, maturity)?;
    let mut rows = Vec::with_capacity(series.len());
    let mut fair_curve = Vec::with_capacity(series.len());
    let mut rn_curve = Vec::with_capacity(series.len());
    for (&t, &s) in series.times().iter().zip(series.values()) {
        let fair = fair_put_price(&params, t, s, &contract)?;
        let rn = risk_neutral_put_price(&params, t, s, &contract)?;
        fair_curve.push(fair);
        rn_curve.push(rn);
        rows.push(vec![t, s, fair, rn]);
    }
    write_csv(out, &["t", "s", "fair", "risk_neutral"], &rows)?;
    let svg_path = svg_sibling(out);
    let svg = line_chart(
        &format!("Put price along the index path (K={strike})"),
        "time (years)",
        "price",
        &[
            Series { label: "fair", color: "red", xs: series.times(), ys: &fair_curve },
            Series {
                label: "risk-neutral",
                color: "blue",
                xs: series.times(),
                ys: &rn_curve,
            },
        ],
    );
    fs::write(&svg_path, svg)?;
    println!("tau0_bar={}", params.tau0_bar);
    println!("a_bar={}", params.a_bar);
    println!("rows={}", rows.len());
    println!("fair_initial={}", fair_curve[0]);
    println!("risk_neutral_initial={}", rn_curve[0]);
    println!("csv={}", out.display());
    println!("svg={}", svg_path.display());
    Ok(())
}

fn cmd_hedge(
    data: &Path,
    strike: f64,
    rule: RuleArg,
    out: &Path,
    overrides: Option<(f64, f64)>,
) -> Result<(), Failure> {
    let series = load_series(data)?;
    let params = series_params(&series, overrides)?;
    let maturity = *series.times().last().unwrap();
    let contract = PutContract::new(strike, maturity)?;
    let rule_value = match rule {
        RuleArg::Fair => InitialValueRule::Fair,
        RuleArg::Rn => InitialValueRule::RiskNeutral,
    };
    let report = backtest(&params, &series, &contract, rule_value)?;
    let rows: Vec<Vec<f64>> = (0..report.times.len())
        .map(|i| {
            vec![
                report.times[i],
                report.index_levels[i],
                report.option_values[i],
                report.portfolio_values[i],
                report.deltas[i],
            ]
        })
        .collect();
    write_csv(out, &["t", "s", "option_value", "portfolio_value", "delta"], &rows)?;
    let svg_path = svg_sibling(out);
    let svg = line_chart(
        &format!("Delta hedge backtest (K={strike})"),
        "time (years)",
        "value",
        &[
            Series {
                label: "fair option value",
                color: "red",
                xs: &report.times,
                ys: &report.option_values,
            },
            Series {
                label: "hedge portfolio",
                color: "blue",
                xs: &report.times,
                ys: &report.portfolio_values,
            },
        ],
    );
    fs::write(&svg_path, svg)?;
    println!("rule={}", match rule {
        RuleArg::Fair => "fair",
        RuleArg::Rn => "rn",
    });
    println!("tau0_bar={}", params.tau0_bar);
    println!("a_bar={}", params.a_bar);
    println!("initial_value={}", report.portfolio_values[0]);
    println!("terminal_payoff={}", report.terminal_payoff);
    println!("tracking_error={}", report.tracking_error);
    println!("max_abs_gap={}", report.max_abs_gap);
    println!("rebalances={}", report.rebalance_count);
    println!("csv={}", out.display());
    println!("svg={}", svg_path.display());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    out: &Path,
    tau0: f64,
    a: f64,
    lambda_bar: f64,
    s0: f64,
    horizon: f64,
    seed: u64,
    dt: f64,
    start_date: NaiveDate,
) -> Result<(), Failure> {
    let params = MmmParams::new(tau0, a, lambda_bar, s0)?;
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(input_error(format!("horizon must be positive, got {horizon}")));
    }
    let n_days = (horizon * DAYS_PER_YEAR).floor() as usize;
    if n_days < 1 {
        return Err(input_error("horizon shorter than one day"));
    }
    let mut rng = path_rng(seed, 0);
    let mut times = Vec::with_capacity(n_days + 1);
    let mut values = Vec::with_capacity(n_days + 1);
    times.push(0.0);
    values.push(s0);
    let mut level = s0;
    for day in 1..=n_days {
        let t_prev = (day - 1) as f64 / DAYS_PER_YEAR;
        let t_now = day as f64 / DAYS_PER_YEAR;
        let leg =
            simulate_p_path_with_rng(&params, t_prev, level, t_now - t_prev, dt, &mut rng)?;
        level = *leg.levels.last().unwrap();
        times.push(t_now);
        values.push(level);
    }
    let series = IndexSeries::new(times, values)?;
    save_series(out, &series, start_date)?;
    let qv = realized_qv_sqrt(&series)?;
    println!("observations={}", series.len());
    println!("terminal_level={level}");
    println!("realized_qv={}", qv.last().unwrap());
    println!("out={}", out.display());
    Ok(())
}

struct Check {
    name: &'static str,
    outcome: Result<(), String>,
}

fn check(name: &'static str, f: impl FnOnce() -> Result<(), String>) -> Check {
    Check { name, outcome: f() }
}

fn expect(ok: bool, detail: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(detail())
    }
}

fn cmd_selftest(perturb: bool) -> Result<(), Failure> {
    // The perturbation hook shifts one pricing comparison off its frozen
    // reference, proving that the battery actually detects corruption.
    let offset = if perturb { 1e-6 } else { 0.0 };
    let started = std::time::Instant::now();
    let checks = vec![
        check("special_functions", selftest_special),
        check("gop_solver", selftest_gop),
        check("put_pricing", move || selftest_pricing(offset)),
        check("mc_cross_check", selftest_mc),
        check("calibration_recovery", selftest_calibration),
        check("hedge_backtest", selftest_hedge),
    ];
    let mut all_ok = true;
    for c in &checks {
        match &c.outcome {
            Ok(()) => println!("PASS {}", c.name),
            Err(detail) => {
                all_ok = false;
                println!("FAIL {}: {detail}", c.name);
            }
        }
    }
    println!("elapsed_seconds={:.2}", started.elapsed().as_secs_f64());
    println!("selftest_result={}", if all_ok { "pass" } else { "fail" });
    if all_ok {
        Ok(())
    } else {
        Err(Failure { code: 3, message: "selftest failed".into() })
    }
}

fn selftest_special() -> Result<(), String> {
    let g = gamma_fn(0.5).map_err(|e| e.to_string())?;
    expect((g - std::f64::consts::PI.sqrt()).abs() < 1e-12, || {
        format!("gamma(1/2) = {g}")
    })?;
    let u = upper_incomplete_gamma(3.0, 2.0).map_err(|e| e.to_string())?;
    let u_ref = 4.0 * (-3.0f64).exp();
    expect((u - u_ref).abs() < 1e-12, || format!("upper gamma(3;2) = {u}"))?;
    let i1 = bessel_i1(1.0);
    expect((i1 - 0.565_159_103_992_485).abs() < 1e-12, || format!("I1(1) = {i1}"))?;
    for i in 1..=8 {
        let x = 0.7 * i as f64;
        let cdf = noncentral_chi2_cdf(x, 2.0, 0.0).map_err(|e| e.to_string())?;
        let exact = 1.0 - (-x / 2.0).exp();
        expect((cdf - exact).abs() < 1e-12, || {
            format!("central chi2(2) cdf at {x}: {cdf} vs {exact}")
        })?;
    }
    for lam in [0.3, 2.83, 11.0] {
        let at_zero = noncentral_chi2_cdf(0.0, 0.0, lam).map_err(|e| e.to_string())?;
        let expected = (-lam / 2.0).exp();
        expect((at_zero - expected).abs() < 1e-12, || {
            format!("zero-df origin mass at lambda={lam}: {at_zero}")
        })?;
    }
    let psi = noncentral_chi2_cdf(5.0, 4.0, 2.83).map_err(|e| e.to_string())?;
    expect((psi - 0.403_262_614_658_795_2).abs() < 1e-11, || {
        format!("Psi(5;4,2.83) = {psi}")
    })
}

fn selftest_gop() -> Result<(), String> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    for trial in 0..50 {
        let m = rng.gen_range(1..=5usize);
        let n = rng.gen_range(1..=5usize);
        let mut sigma_rows = Vec::with_capacity(m);
        for _ in 0..m {
            sigma_rows.push((0..n).map(|_| rng.gen_range(-0.4..0.4)).collect::<Vec<_>>());
        }
        // Feasible by construction: mu = sigma sigma^T pi + lambda 1.
        let pi: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let lambda = rng.gen_range(0.0..0.1);
        let mut mu = vec![0.0; m];
        for i in 0..m {
            for j in 0..m {
                let dot: f64 =
                    (0..n).map(|k| sigma_rows[i][k] * sigma_rows[j][k]).sum();
                mu[i] += dot * pi[j];
            }
            mu[i] += lambda;
        }
        let mkt = MarketCoefficients::from_rows(&mu, &sigma_rows)
            .map_err(|e| format!("trial {trial}: {e}"))?;
        let gop = solve_gop(&mkt, DEFAULT_TOL).map_err(|e| format!("trial {trial}: {e}"))?;
        expect(gop.residual <= 1e-10, || {
            format!("trial {trial}: residual {}", gop.residual)
        })?;
        let sum: f64 = gop.weights.iter().sum();
        expect((sum - 1.0).abs() <= 1e-12, || {
            format!("trial {trial}: weights sum to {sum}")
        })?;
    }
    Ok(())
}

fn selftest_pricing(offset: f64) -> Result<(), String> {
    use rand::{Rng, SeedableRng};
    let params = MmmParams::new(2.15, 0.053, 0.0, 100.0).map_err(|e| e.to_string())?;
    let contract = PutContract::new(100.0, 30.83).map_err(|e| e.to_string())?;
    let fair =
        fair_put_price(&params, 0.0, 100.0, &contract).map_err(|e| e.to_string())? + offset;
    expect((fair - 20.819_408_391_642_393).abs() < 1e-9, || {
        format!("long-dated fair put = {fair}")
    })?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let p = MmmParams::new(
            rng.gen_range(1.0..3.0),
            rng.gen_range(0.01..0.15),
            0.0,
            100.0,
        )
        .map_err(|e| e.to_string())?;
        let k = rng.gen_range(50.0..200.0);
        let maturity = rng.gen_range(2.0..40.0);
        let s = rng.gen_range(30.0..300.0);
        let c = PutContract::new(k, maturity).map_err(|e| e.to_string())?;
        let fair = fair_put_price(&p, 0.0, s, &c).map_err(|e| e.to_string())?;
        let rn = risk_neutral_put_price(&p, 0.0, s, &c).map_err(|e| e.to_string())?;
        let defect = savings_bond_defect(&p, 0.0, s, maturity).map_err(|e| e.to_string())?;
        expect(((rn - fair) - k * defect).abs() < 1e-12, || {
            format!("gap identity violated: {} vs {}", rn - fair, k * defect)
        })?;
    }
    Ok(())
}

fn selftest_mc() -> Result<(), String> {
    let params = MmmParams::new(2.15, 0.053, 0.0, 100.0).map_err(|e| e.to_string())?;
    let contract = PutContract::new(100.0, 10.0).map_err(|e| e.to_string())?;
    let exact = fair_put_price(&params, 0.0, 100.0, &contract).map_err(|e| e.to_string())?;
    let est = mc_fair_price(&params, &contract, 0.0, 100.0, &SimConfig::new(100_000, 42))
        .map_err(|e| e.to_string())?;
    expect((est.value - exact).abs() < 4.0 * est.stderr, || {
        format!("mc {} vs closed form {exact} (stderr {})", est.value, est.stderr)
    })
}

fn selftest_calibration() -> Result<(), String> {
    let times: Vec<f64> = (0..=500).map(|k| k as f64 * 0.05).collect();
    let mut roots = vec![10.0f64];
    for (i, w) in times.windows(2).enumerate() {
        let q_hi = (2.15 + 0.053 * w[1]).exp() - (2.15f64).exp();
        let q_lo = (2.15 + 0.053 * w[0]).exp() - (2.15f64).exp();
        let step = (q_hi - q_lo).sqrt();
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        roots.push(roots[i] + sign * step);
    }
    let values: Vec<f64> = roots.iter().map(|r| r * r).collect();
    let series = IndexSeries::new(times, values).map_err(|e| e.to_string())?;
    let fit = fit_trendline(&series).map_err(|e| e.to_string())?;
    expect((fit.tau0_bar - 2.15).abs() < 1e-6, || format!("tau0 = {}", fit.tau0_bar))?;
    expect((fit.a_bar - 0.053).abs() < 1e-6, || format!("a = {}", fit.a_bar))
}

fn selftest_hedge() -> Result<(), String> {
    let params = MmmParams::new(2.15, 0.053, 0.0, 100.0).map_err(|e| e.to_string())?;
    let contract = PutContract::new(100.0, 2.0).map_err(|e| e.to_string())?;
    let n_obs = 504;
    let times: Vec<f64> = (0..=n_obs).map(|i| 2.0 * i as f64 / n_obs as f64).collect();
    let mut rng = path_rng(5, 0);
    let path = simulate_q_path(&params, 100.0, &times, &mut rng).map_err(|e| e.to_string())?;
    let series =
        IndexSeries::new(path.times, path.levels).map_err(|e| e.to_string())?;
    let report = backtest(&params, &series, &contract, InitialValueRule::Fair)
        .map_err(|e| e.to_string())?;
    expect(report.tracking_error < 2.0, || {
        format!("tracking error {}", report.tracking_error)
    })
}
