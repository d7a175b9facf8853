//! Acceptance suite: one PASS/FAIL line per criterion, printed straight to
//! stdout so the lines show up even when the test passes. The test fails if
//! any criterion fails.

use std::io::Write;
use std::time::Instant;

use fblsched::fbl::{
    capacity_residual, convexity_bound, energy, energy_derivative, energy_second_derivative,
    monotone_energy_bound, power_of_blocklength, shannon_energy, shannon_energy_derivative,
    shannon_phi, shannon_power, BlocklengthBounds, RateCurve,
};
use fblsched::offline::{
    brute_force_oracle, feasible_exact, grid_energy_bound, kkt_residual, phi, solve_mlwf,
    solve_sum, BoundMode, ProblemInstance, SolverConfig, SolverKind,
};
use fblsched::sim::{
    compare_policies, policy_config, run_sweep, ChannelModel, ExperimentConfig, ExperimentReport,
    SweepAxis, TrafficModel, TruncatedExponential, EPSILON_GRID, POLICY_SIGMAS,
};
use fblsched::{LinkParams, PacketSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Bound reproduction.
const G_E_RANGE: (f64, f64) = (1.35e4, 1.65e4);
const G_C_RANGE: (f64, f64) = (2.7e3, 3.3e3);
// Shannon reduction.
const SHANNON_TUPLES: usize = 100;
const SHANNON_REL: f64 = 1e-9;
// Derivative oracles.
const DERIVATIVE_POINTS: usize = 200;
const DERIVATIVE_REL: f64 = 1e-4;
// Solver optimality and KKT.
const ORACLE_INSTANCES: usize = 100;
const ORACLE_GRID: f64 = 1.0;
const MLWF_SUM_REL: f64 = 1e-3;
const KKT_TOL: f64 = 1e-5;
const KKT_EXTRA_INSTANCES: usize = 100;
// Monte Carlo experiments: 20 channel realizations × 20 packet generations.
const DESK_TRIALS: usize = 20;
const FIG4_EPSILON: f64 = 5e-4;
const FIG4_ENERGY: f64 = 26.17;
const FIG4_SHANNON: f64 = 23.93;
const FIG4_ENERGY_REL: f64 = 0.15;
const UNDERESTIMATION_PCT: (f64, f64) = (5.0, 15.0);
const TREND_EPSILONS: [f64; 3] = [5e-2, 5e-3, 5e-4];
const TREND_N: [f64; 3] = [8.0, 10.0, 12.0];
const TREND_NU: [f64; 3] = [4.0, 5.0, 6.0];
// Policy ordering.
const MIN_POLICY_RUNS: usize = 100;
const OFFLINE_AGREEMENT_REL: f64 = 5e-3;
const ORDERING_SLACK_REL: f64 = 1e-2;
const MYOPIC_SEPARATION_REL: f64 = 1e-2;
// Generators.
const GENERATOR_SAMPLES: usize = 100_000;
const GENERATOR_MEAN_REL: f64 = 1e-2;
/// Kolmogorov–Smirnov critical value at 1% significance, times `√n`.
const KS_CRITICAL_1PCT: f64 = 1.6276;

struct Report {
    failures: usize,
}

impl Report {
    fn line(&mut self, tag: &str, name: &str, detail: &str) {
        // Written to the raw handle to bypass the test harness capture.
        let mut out = std::io::stdout().lock();
        writeln!(out, "{tag} {name}: {detail}").unwrap();
        out.flush().unwrap();
    }

    fn check(&mut self, name: &str, pass: bool, detail: String) {
        if !pass {
            self.failures += 1;
        }
        self.line(if pass { "PASS" } else { "FAIL" }, name, &detail);
    }

    fn info(&mut self, name: &str, detail: String) {
        self.line("INFO", name, &detail);
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

fn bounds(r: &mut Report) {
    let start = Instant::now();
    let pkt = PacketSpec::new(1.2e4, 0.0, 1.0, 5e-4, 1.0).unwrap();
    let link = LinkParams::default();
    let g_e = monotone_energy_bound(&pkt, &link).unwrap();
    let g_c = convexity_bound(&pkt, &link).unwrap();
    let inside = |x: f64, (lo, hi): (f64, f64)| x >= lo && x <= hi;
    let ms = start.elapsed().as_secs_f64() * 1e3;
    r.check(
        "bounds g_E",
        inside(g_e, G_E_RANGE),
        format!(
            "g_E = {g_e:.4}, required [{}, {}] ({ms:.2} ms)",
            G_E_RANGE.0, G_E_RANGE.1
        ),
    );
    r.check(
        "bounds g_C",
        inside(g_c, G_C_RANGE),
        format!(
            "g_C = {g_c:.4}, required [{}, {}]",
            G_C_RANGE.0, G_C_RANGE.1
        ),
    );
}

fn shannon_reduction(r: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let link = LinkParams::default();
    let cfg = SolverConfig {
        eps1: 1e-9,
        ..SolverConfig::default()
    };
    let mut worst = [0.0f64; 5];
    let mut tuples = 0;
    while tuples < SHANNON_TUPLES {
        let bits = rng.random_range(1e3..2e4);
        let gain = log_uniform(&mut rng, 1.0, 1e3);
        let probe = PacketSpec::new(bits, 0.0, 1.0, 0.5, gain).unwrap();
        let lower = BlocklengthBounds::compute(&probe, &link).unwrap().lower;
        let m = rng.random_range(lower..4.0 * lower);
        let pkt = PacketSpec {
            deadline: 2.0 * m,
            ..probe
        };

        let p = power_of_blocklength(m, &pkt, &link, 1e-12).unwrap();
        let e = energy(m, &pkt, &link).unwrap();
        let d = energy_derivative(m, &pkt, &link).unwrap();
        let omega = shannon_energy_derivative(m, &pkt);
        let inverse = phi(omega, &pkt, &link, &cfg).unwrap();
        let errs = [
            rel(p, shannon_power(m, &pkt)),
            rel(e, shannon_energy(m, &pkt)),
            rel(d, omega),
            rel(inverse, shannon_phi(omega, &pkt).unwrap()),
            // The implicit rate equation itself, scaled by the rate N/m.
            capacity_residual(m, shannon_power(m, &pkt), &pkt)
                .unwrap()
                .abs()
                * m
                / bits,
        ];
        for (w, x) in worst.iter_mut().zip(errs) {
            *w = w.max(x);
        }
        tuples += 1;
    }
    let pass = worst.iter().all(|&w| w <= SHANNON_REL);
    r.check(
        "shannon reduction",
        pass,
        format!(
            "{tuples} tuples, worst rel. err power {:.1e}, energy {:.1e}, derivative {:.1e}, phi {:.1e}, \
             rate residual at the closed-form power {:.1e} (limit {SHANNON_REL:.0e})",
            worst[0], worst[1], worst[2], worst[3], worst[4]
        ),
    );
}

fn derivative_oracles(r: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let link = LinkParams::default();
    let (mut worst, mut sign_ok, mut points) = (0.0f64, 0, 0);
    while points < DERIVATIVE_POINTS {
        let bits = rng.random_range(4e3..1.6e4);
        let eps = log_uniform(&mut rng, 1e-6, 1e-1);
        let gain = log_uniform(&mut rng, 10.0, 1e3);
        let pkt = PacketSpec::new(bits, 0.0, 1.0, eps, gain).unwrap();
        let b = BlocklengthBounds::compute(&pkt, &link).unwrap();
        let Some(g_c) = b.convex_upper else { continue };
        let step = 0.02 * b.lower;
        if g_c - b.lower < 4.0 * step {
            continue;
        }
        let m = rng.random_range(b.lower + step..g_c - step);
        let curve = RateCurve::new(&pkt).unwrap();
        let e = |x: f64| curve.energy(x, link.max_power, 1e-13).unwrap();

        let h = 1e-3 * m;
        let fd = (e(m + h) - e(m - h)) / (2.0 * h);
        worst = worst.max(rel(energy_derivative(m, &pkt, &link).unwrap(), fd));

        let second = energy_second_derivative(m, &pkt, &link).unwrap();
        let fd2 = e(m + step) - 2.0 * e(m) + e(m - step);
        if second > 0.0 && fd2 > 0.0 {
            sign_ok += 1;
        }
        points += 1;
    }
    r.check(
        "derivative oracle E'",
        worst < DERIVATIVE_REL,
        format!("{points} points, worst rel. err vs central differences {worst:.2e} (limit {DERIVATIVE_REL:.0e})"),
    );
    r.check(
        "derivative oracle E'' sign",
        sign_ok == points,
        format!("{sign_ok}/{points} points on [lower, g_C] with E'' > 0 and a positive second difference"),
    );
}

/// Convex, feasible `k`-packet draws from the default traffic and channel.
fn random_instances(k: usize, count: usize, seed: u64) -> Vec<ProblemInstance> {
    let mut cfg = ExperimentConfig::default();
    cfg.traffic.packets = k;
    cfg.seed = seed;
    let link = cfg.link().unwrap();
    (0..)
        .filter_map(|g| {
            let packets = cfg.trial_packets(g % 64, g / 64).unwrap();
            let inst = ProblemInstance::new(packets, link, BoundMode::Convex).ok()?;
            feasible_exact(&inst).then_some(inst)
        })
        .take(count)
        .collect()
}

fn solver_optimality(r: &mut Report) {
    let start = Instant::now();
    let cfg = SolverConfig::default();
    let sum_cfg = cfg.with_solver(SolverKind::Sum);
    let (mut above_oracle, mut worst_gap, mut worst_sum) = (0, f64::NEG_INFINITY, 0.0f64);
    let mut kkt: Vec<f64> = Vec::new();
    let instances = random_instances(3, ORACLE_INSTANCES, 21);
    for inst in &instances {
        let mlwf = solve_mlwf(inst, &cfg).unwrap();
        let sum = solve_sum(inst, &sum_cfg).unwrap();
        let oracle = brute_force_oracle(inst, ORACLE_GRID).unwrap();
        let bound = grid_energy_bound(inst, ORACLE_GRID, cfg.eps2).unwrap();
        let (e, o) = (
            mlwf.total_energy_watt_symbols,
            oracle.total_energy_watt_symbols,
        );
        if e > o + bound {
            above_oracle += 1;
        }
        worst_gap = worst_gap.max((e - o) / bound);
        worst_sum = worst_sum.max(rel(sum.total_energy_watt_symbols, e));
        kkt.push(kkt_residual(inst, &mlwf));
    }
    r.check(
        "solver optimality vs oracle",
        above_oracle == 0,
        format!(
            "{} K=3 instances, {above_oracle} above oracle + grid bound, worst (MLWF − oracle)/bound {worst_gap:.3e} ({:.1} s)",
            instances.len(),
            start.elapsed().as_secs_f64()
        ),
    );
    r.check(
        "MLWF vs SUM",
        worst_sum <= MLWF_SUM_REL,
        format!("worst relative gap {worst_sum:.2e} (limit {MLWF_SUM_REL:.0e})"),
    );

    for inst in random_instances(10, KKT_EXTRA_INSTANCES, 22) {
        kkt.push(kkt_residual(&inst, &solve_mlwf(&inst, &cfg).unwrap()));
    }
    let worst_kkt = kkt.iter().cloned().fold(0.0, f64::max);
    r.check(
        "KKT certification",
        kkt.iter().all(|&k| k < KKT_TOL),
        format!("{} MLWF solutions (K=3 and K=10), worst residual {worst_kkt:.2e} (limit {KKT_TOL:.0e})", kkt.len()),
    );
}

fn desk_config() -> ExperimentConfig {
    ExperimentConfig {
        channel_realizations: DESK_TRIALS,
        packet_generations: DESK_TRIALS,
        ..ExperimentConfig::default()
    }
}

fn at(reports: &[ExperimentReport], value: f64) -> &ExperimentReport {
    reports.iter().find(|r| r.value == value).unwrap()
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn fig4_and_trends(r: &mut Report) {
    let start = Instant::now();
    let base = desk_config();
    let mut grid = EPSILON_GRID.to_vec();
    grid.push(0.5);
    let sweep = run_sweep(&base, SweepAxis::Epsilon, &grid).unwrap();

    let p = at(&sweep, FIG4_EPSILON);
    r.check(
        "fig4 preset: underestimation",
        p.underestimation_pct >= UNDERESTIMATION_PCT.0
            && p.underestimation_pct <= UNDERESTIMATION_PCT.1,
        format!(
            "{:.2}% at ε = {FIG4_EPSILON} over {} trials ({} excluded), required [{}, {}]%",
            p.underestimation_pct,
            p.included,
            p.excluded,
            UNDERESTIMATION_PCT.0,
            UNDERESTIMATION_PCT.1
        ),
    );
    let below: Vec<&ExperimentReport> = sweep.iter().filter(|x| x.value < 0.5).collect();
    r.check(
        "fig4 preset: underestimation positive",
        below.iter().all(|x| x.underestimated_joules > 0.0),
        below
            .iter()
            .map(|x| format!("ε={}: {:.4} J", x.value, x.underestimated_joules))
            .collect::<Vec<_>>()
            .join(", "),
    );
    let shannon_point = at(&sweep, 0.5);
    r.check(
        "fig4 preset: self-comparison",
        shannon_point.underestimated_joules.abs() < 1e-9,
        format!(
            "underestimation at ε = 0.5 is {:.2e} J",
            shannon_point.underestimated_joules
        ),
    );
    let within = |x: f64, target: f64| rel(x, target) <= FIG4_ENERGY_REL;
    r.info(
        "fig4 preset: absolute energy",
        format!(
            "FBL {:.3} J vs reference {FIG4_ENERGY} J ({}), Shannon {:.3} J vs reference {FIG4_SHANNON} J ({}); \
             not binding, the absolute scale depends on the gain convention",
            p.mean_energy_joules,
            if within(p.mean_energy_joules, FIG4_ENERGY) { "within 15%" } else { "outside 15%" },
            p.mean_shannon_joules,
            if within(p.mean_shannon_joules, FIG4_SHANNON) { "within 15%" } else { "outside 15%" },
        ),
    );

    let pct: Vec<f64> = TREND_EPSILONS
        .iter()
        .map(|&e| at(&sweep, e).underestimation_pct)
        .collect();
    r.check(
        "trend underestimation vs ε",
        pct.windows(2).all(|w| w[1] > w[0]),
        format!("ε {TREND_EPSILONS:?} → {pct:.3?} %"),
    );

    let eps = SweepAxis::Epsilon.apply(&base, FIG4_EPSILON);
    let by_n: Vec<f64> = run_sweep(&eps, SweepAxis::N, &TREND_N)
        .unwrap()
        .iter()
        .map(|x| x.mean_energy_joules)
        .collect();
    r.check(
        "trend energy vs n",
        strictly_decreasing(&by_n),
        format!("n {TREND_N:?} → {by_n:.4?} J"),
    );
    let by_nu: Vec<f64> = run_sweep(&eps, SweepAxis::Nu, &TREND_NU)
        .unwrap()
        .iter()
        .map(|x| x.mean_energy_joules)
        .collect();
    r.check(
        "trend energy vs ν",
        strictly_decreasing(&by_nu),
        format!(
            "ν {TREND_NU:?} → {by_nu:.4?} J ({:.1} s for the sweeps)",
            start.elapsed().as_secs_f64()
        ),
    );
}

fn policy_ordering(r: &mut Report) {
    let start = Instant::now();
    let base = ExperimentConfig {
        channel_realizations: DESK_TRIALS,
        packet_generations: DESK_TRIALS,
        ..policy_config()
    };
    let reports = compare_policies(&base, &POLICY_SIGMAS).unwrap();
    let min_included = reports.iter().map(|x| x.included).min().unwrap();
    r.check(
        "fig6 preset: run count",
        min_included >= MIN_POLICY_RUNS,
        format!(
            "{} runs per σ, at least {min_included} with every packet delivered by every policy (required {MIN_POLICY_RUNS})",
            base.trials()
        ),
    );
    let worst_offline = reports
        .iter()
        .map(|x| rel(x.mean_offline_sum, x.mean_offline_mlwf))
        .fold(0.0, f64::max);
    r.check(
        "fig6 preset: MLWF = SUM",
        worst_offline <= OFFLINE_AGREEMENT_REL,
        format!("worst relative gap {worst_offline:.2e} (limit {OFFLINE_AGREEMENT_REL:.0e})"),
    );
    let ordered = reports.iter().all(|x| {
        x.mean_offline_mlwf <= x.mean_rolling_window * (1.0 + ORDERING_SLACK_REL)
            && x.mean_rolling_window <= x.mean_myopic * (1.0 - MYOPIC_SEPARATION_REL)
    });
    r.check(
        "fig6 preset: ordering",
        ordered,
        reports
            .iter()
            .map(|x| {
                format!(
                    "σ={}: {:.4} ≤ {:.4} ≤ {:.4} J",
                    x.sigma, x.mean_offline_mlwf, x.mean_rolling_window, x.mean_myopic
                )
            })
            .collect::<Vec<_>>()
            .join("; "),
    );
    let series =
        |f: fn(&fblsched::sim::PolicyReport) -> f64| reports.iter().map(f).collect::<Vec<_>>();
    let decreasing = strictly_decreasing(&series(|x| x.mean_offline_mlwf))
        && strictly_decreasing(&series(|x| x.mean_offline_sum))
        && strictly_decreasing(&series(|x| x.mean_rolling_window))
        && strictly_decreasing(&series(|x| x.mean_myopic));
    r.check(
        "fig6 preset: energy decreasing in σ",
        decreasing,
        format!(
            "σ {POLICY_SIGMAS:?}, every policy's mean strictly decreasing ({:.1} s)",
            start.elapsed().as_secs_f64()
        ),
    );
}

/// Largest distance between the empirical CDF of `xs` and `cdf`.
fn ks_statistic(xs: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Truncated exponential CDF written out independently of the sampler.
fn truncated_exp_cdf(lo: f64, hi: f64, rate: f64, x: f64) -> f64 {
    let t = (x - lo).clamp(0.0, hi - lo);
    if rate == 0.0 {
        t / (hi - lo)
    } else {
        (-rate * t).exp_m1() / (-rate * (hi - lo)).exp_m1()
    }
}

fn generators(r: &mut Report) {
    let n = GENERATOR_SAMPLES;
    let ks_limit = KS_CRITICAL_1PCT / (n as f64).sqrt();
    let traffic = TrafficModel {
        packets: n + 1,
        ..TrafficModel::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let packets = traffic.sample(&mut rng).unwrap();
    let mut gaps: Vec<f64> = packets
        .windows(2)
        .map(|w| w[1].arrival - w[0].arrival)
        .collect();
    let mut lifetimes: Vec<f64> = packets.iter().take(n).map(|p| p.lifetime()).collect();
    let m = traffic.m_hat;
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let inside = |v: &[f64], lo: f64, hi: f64| v.iter().all(|&x| x >= lo && x <= hi);

    let (gap_lo, gap_hi) = ((traffic.nu - 1.0) * m, (traffic.nu + 1.0) * m);
    let (life_lo, life_hi) = ((traffic.n - 1.0) * m, (traffic.n + 1.0) * m);
    let (gap_mean, life_mean) = (mean(&gaps), mean(&lifetimes));
    r.check(
        "generator gap mean",
        rel(gap_mean, traffic.nu * m) <= GENERATOR_MEAN_REL && inside(&gaps, gap_lo, gap_hi),
        format!(
            "{n} gaps, mean {gap_mean:.2} vs νm̂ = {}, support [{gap_lo}, {gap_hi}]",
            traffic.nu * m
        ),
    );
    r.check(
        "generator lifetime mean",
        rel(life_mean, traffic.n * m) <= GENERATOR_MEAN_REL && inside(&lifetimes, life_lo, life_hi),
        format!(
            "{n} lifetimes, mean {life_mean:.2} vs nm̂ = {}, support [{life_lo}, {life_hi}]",
            traffic.n * m
        ),
    );
    let gap_law = traffic.gap_law().unwrap();
    let d_gap = ks_statistic(&mut gaps, |x| {
        truncated_exp_cdf(gap_lo, gap_hi, gap_law.rate(), x)
    });
    let d_life = ks_statistic(&mut lifetimes, |x| {
        truncated_exp_cdf(life_lo, life_hi, traffic.lifetime_law().unwrap().rate(), x)
    });

    // A skewed member of the family, so the tilted branch is exercised too.
    let skewed = TruncatedExponential::with_mean(0.0, 1.0, 0.3).unwrap();
    let mut draws: Vec<f64> = (0..n).map(|_| skewed.sample(&mut rng)).collect();
    let lambda = skewed.rate();
    let analytic_mean = 1.0 / lambda - 1.0 / lambda.exp_m1();
    let d_skew = ks_statistic(&mut draws, |x| truncated_exp_cdf(0.0, 1.0, lambda, x));
    r.check(
        "generator KS",
        d_gap < ks_limit && d_life < ks_limit && d_skew < ks_limit && rel(analytic_mean, 0.3) < 1e-9,
        format!(
            "D = {d_gap:.4} (gaps), {d_life:.4} (lifetimes), {d_skew:.4} (rate {lambda:.4}, mean 0.3); critical {ks_limit:.4}"
        ),
    );

    let channel = ChannelModel::default();
    let mut gains = channel.sample_gains(&mut rng, n);
    let target = 2.0 * channel.sigma * channel.sigma;
    let gain_mean = mean(&gains);
    let d_gain = ks_statistic(&mut gains, |h| -(-h / target).exp_m1());
    r.check(
        "generator squared Rayleigh",
        rel(gain_mean, target) <= GENERATOR_MEAN_REL && gains.iter().all(|&h| h > 0.0) && d_gain < ks_limit,
        format!("{n} gains, mean {gain_mean:.3} vs 2σ² = {target}, KS D = {d_gain:.4} (critical {ks_limit:.4})"),
    );
}

#[test]
fn acceptance() {
    let mut r = Report { failures: 0 };
    // The harness has already printed "test acceptance ... " without a newline.
    std::io::stdout().write_all(b"\n").unwrap();
    bounds(&mut r);
    shannon_reduction(&mut r);
    derivative_oracles(&mut r);
    solver_optimality(&mut r);
    fig4_and_trends(&mut r);
    policy_ordering(&mut r);
    generators(&mut r);
    assert_eq!(r.failures, 0, "{} acceptance criteria failed", r.failures);
}
