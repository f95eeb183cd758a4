//! Acceptance gate: runs the desk-scale study once and checks every
//! criterion, printing one PASS/FAIL line each. Exits non-zero on any FAIL.

use std::time::Instant;

use genius_mediation::genius::{
    genius_theta_m, nie_genius, BootstrapConfig, GeniusOptions, Inference, Method,
};
use genius_mediation::mediation::{nie_naive, rr_nie_plugin, DiscreteMediationTable};
use genius_mediation::simulation::{generate_dataset, run_study, Dag, DgpConfig, ReportRow, SimulationReport, StudyConfig};
use genius_mediation::stats::{ols_fit, standard_normal, DesignMatrix, HcType, RandomStream};
use genius_mediation::Dataset;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

mod common;

struct Gate {
    failed: Vec<usize>,
}

impl Gate {
    fn report(&mut self, id: usize, ok: bool, summary: &str, details: &[String]) {
        println!("{} criterion {id}: {summary}", if ok { "PASS" } else { "FAIL" });
        for d in details {
            println!("    {d}");
        }
        if !ok {
            self.failed.push(id);
        }
    }
}

/// Naive mediator-coefficient limit under the simulation mechanism with the
/// second normal parameter read as a standard deviation; `beta_a` tends to 1
/// so this is also the limit of the naive indirect effect.
fn naive_plim(dag: Dag) -> f64 {
    let s2 = [0.25_f64, 1.0];
    let u = if dag.has_u() { 1.0 } else { 0.0 };
    let me = if dag.has_measurement_error() { 1.0 } else { 0.0 };
    let cov: f64 = s2.iter().map(|s| 0.5 * s).sum();
    let var: f64 = s2.iter().map(|s| 0.5 * (s + u + me)).sum();
    cov / var
}

fn row(r: &SimulationReport, dag: Dag, m: Method) -> &ReportRow {
    r.row(dag, m).expect("row present")
}

fn fmt_row(r: &ReportRow) -> String {
    format!(
        "{} {:<7} bias {:+.4} var {:.4} mean_var {:.4} mse {:.4} cov_delta {:.3} cov_boot {}",
        r.dag,
        r.method.as_str(),
        r.bias,
        r.mc_variance,
        r.mean_var_estimate,
        r.mse,
        r.coverage_delta,
        r.coverage_bootstrap.map_or("-".into(), |c| format!("{c:.3}")),
    )
}

fn in_band(x: f64, lo: f64, hi: f64) -> bool {
    (lo..=hi).contains(&x)
}

fn criterion_1(g: &mut Gate, r: &SimulationReport) {
    let naive = row(r, Dag::A, Method::Naive);
    let gen = row(r, Dag::A, Method::Genius);
    let ok = [naive, gen]
        .iter()
        .all(|x| x.bias.abs() <= 0.03 && in_band(x.coverage_delta, 0.92, 0.98));
    g.report(1, ok, "DAG (a) naive and GENIUS unbiased with nominal coverage", &[fmt_row(naive), fmt_row(gen)]);
}

fn criterion_2(g: &mut Gate, r: &SimulationReport) {
    let gen = row(r, Dag::B, Method::Genius);
    let naive = row(r, Dag::B, Method::Naive);
    let plim = naive_plim(Dag::B);
    let naive_mean = 1.0 + naive.bias;
    let ok = gen.bias.abs() <= 0.05
        && in_band(gen.coverage_delta, 0.92, 0.98)
        && naive.bias <= -0.30
        && naive.coverage_delta <= 0.02
        && (naive_mean - plim).abs() <= 0.05;
    g.report(
        2,
        ok,
        "DAG (b) GENIUS valid, naive biased toward its analytic limit",
        &[fmt_row(gen), fmt_row(naive), format!("naive mean {naive_mean:.4} vs analytic limit {plim:.4}")],
    );
}

fn criterion_3(g: &mut Gate, r: &SimulationReport) {
    let gen = row(r, Dag::C, Method::Genius);
    let b = row(r, Dag::B, Method::Naive);
    let c = row(r, Dag::C, Method::Naive);
    let se = (b.mc_variance / b.n_replicates as f64 + c.mc_variance / c.n_replicates as f64).sqrt();
    let z = (b.bias - c.bias) / se;
    let ok = gen.bias.abs() <= 0.06
        && in_band(gen.coverage_delta, 0.92, 0.98)
        && z.abs() < 3.0
        && (b.coverage_delta - c.coverage_delta).abs() <= 0.02;
    g.report(
        3,
        ok,
        "DAG (c) GENIUS valid, naive row matches DAG (b)",
        &[fmt_row(gen), fmt_row(c), format!("naive bias difference b - c: z = {z:.2}")],
    );
}

fn criterion_4(g: &mut Gate, r: &SimulationReport) {
    let gen = row(r, Dag::D, Method::Genius);
    let naive = row(r, Dag::D, Method::Naive);
    let oracle = row(r, Dag::D, Method::Oracle);
    let ok = gen.bias.abs() <= 0.12
        && gen.coverage_delta >= 0.92
        && gen.coverage_bootstrap.is_some_and(|c| c >= 0.93)
        && naive.bias <= -0.45
        && oracle.bias.abs() <= 0.03;
    g.report(
        4,
        ok,
        "DAG (d) GENIUS robust to measurement error",
        &[fmt_row(gen), fmt_row(naive), fmt_row(oracle)],
    );
}

fn criterion_5(g: &mut Gate, r: &SimulationReport) {
    let worst_identity = r
        .rows
        .iter()
        .map(|x| (x.mse - (x.bias * x.bias + x.mc_variance)).abs())
        .fold(0.0_f64, f64::max);
    let mut details = vec![format!("max |mse - bias^2 - variance| over {} rows: {worst_identity:.2e}", r.rows.len())];
    let mut ok = worst_identity <= 1e-10;
    for x in r.rows.iter().filter(|x| x.method == Method::Genius) {
        let rel = x.mean_var_estimate / x.mc_variance - 1.0;
        let pass = rel.abs() <= 0.30;
        ok &= pass;
        details.push(format!(
            "{} genius mean_var {:.4} vs mc_variance {:.4}: {:+.1}% {}",
            x.dag,
            x.mean_var_estimate,
            x.mc_variance,
            100.0 * rel,
            if pass { "ok" } else { "outside 30%" }
        ));
    }
    g.report(5, ok, "mse identity and GENIUS variance calibration", &details);
}

fn criterion_6(g: &mut Gate) {
    let mut details = Vec::new();
    let mut ok = true;
    let mut check = |name: &str, pass: bool, note: String| {
        ok &= pass;
        details.push(format!("{name}: {} {note}", if pass { "ok" } else { "FAILED" }));
    };
    let opts = GeniusOptions::default();

    let mut worst = 0.0_f64;
    for s in 0..10 {
        let d = generate_dataset(&DgpConfig::new(Dag::B, 1000, 7).replicate(s)).unwrap();
        let fit = genius_theta_m(&d, &opts).unwrap();
        worst = worst.max((fit.theta_m - common::estimating_equation_root(&d)).abs());
    }
    check("closed form vs estimating-equation root", worst <= 1e-10, format!("max gap {worst:.1e}"));

    let d = generate_dataset(&DgpConfig::new(Dag::C, 1000, 9)).unwrap();
    let base = nie_genius(&d, 1.0, 0.0, Inference::Delta, &opts).unwrap();
    let mut scale_ok = true;
    for k in [0.01, 0.5, 3.0, 1e3] {
        let ys: Vec<f64> = d.y.iter().map(|v| k * v).collect();
        let ms: Vec<f64> = d.m.iter().map(|v| k * v).collect();
        let y_scaled = nie_genius(&Dataset::new(ys, d.m.clone(), d.a.clone()).unwrap(), 1.0, 0.0, Inference::Delta, &opts).unwrap();
        let m_scaled = nie_genius(&Dataset::new(d.y.clone(), ms, d.a.clone()).unwrap(), 1.0, 0.0, Inference::Delta, &opts).unwrap();
        scale_ok &= (y_scaled.nie / base.nie - k).abs() <= 1e-9 * k;
        scale_ok &= (y_scaled.theta_m / base.theta_m - k).abs() <= 1e-9 * k;
        scale_ok &= (m_scaled.nie / base.nie - 1.0).abs() <= 1e-9;
        scale_ok &= (m_scaled.theta_m * k / base.theta_m - 1.0).abs() <= 1e-9;
        scale_ok &= (m_scaled.beta_a / (k * base.beta_a) - 1.0).abs() <= 1e-9;
    }
    check("Y and M scale equivariance", scale_ok, String::new());

    let fx = Dataset::new(vec![0.0, 1.0, 2.0, 4.0], vec![0.0, 1.0, 1.0, 3.0], vec![0.0, 0.0, 1.0, 1.0]).unwrap();
    let fit = genius_theta_m(&fx, &opts).unwrap();
    check(
        "4-row fixture",
        (fit.theta_m - 1.0).abs() < 1e-12 && (fit.numerator - 0.75).abs() < 1e-12 && (fit.denominator - 0.75).abs() < 1e-12,
        format!("theta_m = {}", fit.theta_m),
    );

    let mut rng = ChaCha8Rng::seed_from_u64(2718);
    let mut worst = 0.0_f64;
    let tables = 25;
    for _ in 0..tables {
        let mut rows = Vec::new();
        let mut records = Vec::new();
        for y in 0..2u8 {
            for m in 0..2u8 {
                for a in 0..2u8 {
                    let k: u64 = rng.random_range(1..60);
                    records.push((y, m.to_string(), a.to_string(), "c0".to_string(), k));
                    rows.extend(std::iter::repeat_n((y, m, a), k as usize));
                }
            }
        }
        let t = DiscreteMediationTable::from_records(records).unwrap();
        let rr = rr_nie_plugin(&t, "1", "0", "c0").unwrap().rr;
        worst = worst.max((rr - common::brute_force_rr(&rows, 1, 0)).abs());
    }
    check(&format!("risk ratio vs enumeration on {tables} tables"), worst <= 1e-12, format!("max gap {worst:.1e}"));

    let cols: Vec<Vec<f64>> = (0..2).map(|j| standard_normal(RandomStream::new(5, j), 10)).collect();
    let y = standard_normal(RandomStream::new(5, 9), 10);
    let x = DesignMatrix::from_columns(10, true, &[("x1", cols[0].as_slice()), ("x2", cols[1].as_slice())]).unwrap();
    let b = ols_fit(&x, &y).unwrap().coefficients;
    let o = common::normal_equations(&common::rows(&x), &y);
    let gap = b.iter().zip(&o).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
    check("OLS vs normal equations (10x3)", gap <= 1e-10, format!("max gap {gap:.1e}"));

    let small = |threads| StudyConfig {
        dags: vec![Dag::B, Dag::D],
        replications: 8,
        n: 300,
        bootstrap: Some(100),
        threads,
        ..StudyConfig::default()
    };
    let one = run_study(&small(Some(1))).unwrap();
    let three = run_study(&small(Some(3))).unwrap();
    let boot = |t: usize| {
        let d = generate_dataset(&DgpConfig::new(Dag::D, 500, 4)).unwrap();
        rayon::ThreadPoolBuilder::new().num_threads(t).build().unwrap().install(|| {
            nie_genius(&d, 1.0, 0.0, Inference::Bootstrap(BootstrapConfig::new(200, 17)), &opts)
                .unwrap()
                .bootstrap
                .unwrap()
                .estimates
        })
    };
    check(
        "study and bootstrap determinism across thread counts",
        one.rows == three.rows && one.records == three.records && boot(1) == boot(4),
        String::new(),
    );

    g.report(6, ok, "property suite", &details);
}

fn criterion_7(g: &mut Gate) {
    let d = generate_dataset(&DgpConfig::new(Dag::D, 100_000, 31)).unwrap();
    let fit = genius_theta_m(&d, &GeniusOptions::default()).unwrap();
    let z_genius = (fit.theta_m - 1.0) / fit.se_theta;
    let naive = nie_naive(&d, 1.0, 0.0, Inference::Delta, HcType::Hc0).unwrap();
    let z_naive = (naive.theta_m - 1.0) / naive.se_theta;
    let ok = z_genius.abs() < 4.0 && z_naive.abs() > 10.0;
    g.report(
        7,
        ok,
        "measurement-error robustness at n = 100000",
        &[
            format!("GENIUS theta_m {:.4} (se {:.4}, z = {z_genius:+.2})", fit.theta_m, fit.se_theta),
            format!("naive coefficient on M* {:.4} (se {:.4}, z = {z_naive:+.1})", naive.theta_m, naive.se_theta),
        ],
    );
}

fn main() {
    let mut g = Gate { failed: Vec::new() };
    let cfg = StudyConfig::default();
    let start = Instant::now();
    let report = run_study(&cfg).expect("desk-scale study");
    println!(
        "desk-scale study: {} replications, n = {}, B = {}, seed {} ({:.0} s)",
        cfg.replications,
        cfg.n,
        cfg.bootstrap.unwrap_or(0),
        cfg.seed,
        start.elapsed().as_secs_f64()
    );
    criterion_1(&mut g, &report);
    criterion_2(&mut g, &report);
    criterion_3(&mut g, &report);
    criterion_4(&mut g, &report);
    criterion_5(&mut g, &report);
    criterion_6(&mut g);
    criterion_7(&mut g);
    if g.failed.is_empty() {
        println!("acceptance: all 7 criteria passed");
    } else {
        println!("acceptance: failed criteria {:?}", g.failed);
        std::process::exit(1);
    }
}
