//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured quantities (visible with `cargo test -- --nocapture`).

mod common;

use common::{joint_distribution_f64, rational};
use ford_core::exact::{
    cherry_pmf, correlation_sign, ford_variance_recursion_check, joint_pmf, limit_curve_extrema,
    mean_closed_form, moment_trace, second_moment_remainders,
};
use ford_core::montecarlo::{clt_check, run_campaign, two_sample_chi2, Engine, TrialConfig};
use ford_core::urn::{eigensystem, limit_summary, max_abs_diff_between, sigma_closed_form};
use ford_core::Alpha;

fn alpha(a: f64) -> Alpha {
    Alpha::new(a).unwrap()
}

/// Criterion 1: the n = 4 joint pmfs at alpha = 0 and alpha = 1/2 match the
/// exact-rational insertion-history oracle to 1e-12.
#[test]
fn criterion_01_small_n_pmf() {
    for (p, q) in [(0i64, 1i64), (1, 2)] {
        let oracle = joint_distribution_f64(4, &rational(p, q));
        let pmf = joint_pmf(4, alpha(p as f64 / q as f64)).unwrap();
        let mut worst = 0.0f64;
        for (&(a, c), &prob) in &oracle {
            worst = worst.max((pmf.prob(a, c) - prob).abs());
        }
        for (a, c, v) in pmf.cells() {
            if !oracle.contains_key(&(a, c)) {
                worst = worst.max(v.abs());
            }
        }
        assert!(worst <= 1e-12, "alpha = {p}/{q}: max err {worst:e}");
    }
    let pmf = joint_pmf(4, alpha(0.0)).unwrap();
    assert!((pmf.prob(1, 1) - 2.0 / 3.0).abs() <= 1e-12);
    assert!((pmf.prob(0, 2) - 1.0 / 3.0).abs() <= 1e-12);
    let pmf = joint_pmf(4, alpha(0.5)).unwrap();
    assert!((pmf.prob(1, 1) - 0.8).abs() <= 1e-12);
    assert!((pmf.prob(0, 2) - 0.2).abs() <= 1e-12);
    println!("ACCEPTANCE 1 PASS: joint_pmf(4) matches the rational oracle to 1e-12");
}

/// Criterion 2: oracle equivalence for every n <= 8 and the five alpha
/// values, max abs error <= 1e-12.
#[test]
fn criterion_02_oracle_equivalence() {
    let mut worst = 0.0f64;
    for (p, q) in [(0i64, 1i64), (1, 4), (1, 2), (3, 4), (1, 1)] {
        let a = alpha(p as f64 / q as f64);
        for n in 3..=8u64 {
            let oracle = joint_distribution_f64(n, &rational(p, q));
            let pmf = joint_pmf(n, a).unwrap();
            for (&(aa, c), &prob) in &oracle {
                worst = worst.max((pmf.prob(aa, c) - prob).abs());
            }
            for (aa, c, v) in pmf.cells() {
                if !oracle.contains_key(&(aa, c)) {
                    worst = worst.max(v.abs());
                }
            }
        }
    }
    assert!(worst <= 1e-12, "max abs error {worst:e}");
    println!("ACCEPTANCE 2 PASS: DP equals oracle for n <= 8 (max err {worst:.2e})");
}

/// Criterion 3: exact Yule means for every n in [4, 1e4], and closed-form
/// means equal to the recursion within 1e-10 relative for alpha in
/// {0.1, ..., 0.9} over the full range n <= 1e4.
#[test]
fn criterion_03_means() {
    let trace = moment_trace(10_000, alpha(0.0));
    for t in &trace {
        if t.n < 4 {
            continue;
        }
        let nf = t.n as f64;
        let rel_c = (t.ec - nf / 3.0).abs() / (nf / 3.0);
        let rel_a = (t.ea - nf / 6.0).abs() / (nf / 6.0);
        assert!(rel_c <= 1e-12, "n = {}: E[C] rel err {rel_c:e}", t.n);
        assert!(rel_a <= 1e-12, "n = {}: E[A] rel err {rel_a:e}", t.n);
    }

    for i in 1..=9u32 {
        let av = f64::from(i) / 10.0;
        let a = alpha(av);
        let trace = moment_trace(10_000, a);
        // The correction terms advanced factor by factor are the closed-form
        // products evaluated left to right.
        let d = 3.0 - 2.0 * av;
        let mut x = av / (2.0 * d);
        let mut y = 0.5;
        for t in &trace {
            let nf = t.n as f64;
            let mean_c = (1.0 - av) * nf / d + av / (2.0 * d) + x;
            let mean_a = (1.0 - av) * nf / (2.0 * d) + av / (2.0 * d) + y;
            assert!(
                ((mean_c - t.ec) / t.ec).abs() <= 1e-10,
                "alpha = {av}, n = {}: cherry mean",
                t.n
            );
            assert!(
                ((mean_a - t.ea) / t.ea).abs() <= 1e-10,
                "alpha = {av}, n = {}: pitchfork mean",
                t.n
            );
            y = ((nf - 3.0 + av) * y + (2.0 - av) * x) / (nf - av);
            x = x * (nf - 2.0 + av) / (nf - av);
        }
        // The public closed-form evaluator agrees on a spot grid.
        for &n in &[3u64, 7, 50, 300, 1_000, 10_000] {
            let cf = mean_closed_form(n, a);
            let t = &trace[(n - 3) as usize];
            assert!(((cf.mean_c - t.ec) / t.ec).abs() <= 1e-10);
            assert!(((cf.mean_a - t.ea) / t.ea).abs() <= 1e-10);
        }
    }
    println!("ACCEPTANCE 3 PASS: exact Yule means and closed-form/recursion agreement");
}

/// Criterion 4: the limiting constants at alpha = 0, 1/2, 1 to 1e-12.
#[test]
fn criterion_04_limiting_constants() {
    let s0 = limit_summary(alpha(0.0)).unwrap();
    assert!((s0.nu - 1.0 / 6.0).abs() <= 1e-12);
    assert!((s0.mu - 1.0 / 3.0).abs() <= 1e-12);
    assert!((s0.s[0][0] - 69.0 / 28.0 / 45.0).abs() <= 1e-12);
    assert!((s0.s[0][1] - (-1.0 / 45.0)).abs() <= 1e-12);
    assert!((s0.s[1][0] - (-1.0 / 45.0)).abs() <= 1e-12);
    assert!((s0.s[1][1] - 2.0 / 45.0).abs() <= 1e-12);

    let s5 = limit_summary(alpha(0.5)).unwrap();
    assert!((s5.nu - 1.0 / 8.0).abs() <= 1e-12);
    assert!((s5.mu - 1.0 / 4.0).abs() <= 1e-12);
    assert!((s5.s[0][0] - 3.0 / 64.0).abs() <= 1e-12);
    assert!(s5.s[0][1].abs() <= 1e-12);
    assert!((s5.s[1][1] - 4.0 / 64.0).abs() <= 1e-12);

    let s1 = limit_summary(alpha(1.0)).unwrap();
    assert!(s1.nu.abs() <= 1e-12 && s1.mu.abs() <= 1e-12);
    for i in 0..2 {
        for j in 0..2 {
            assert!(s1.s[i][j].abs() <= 1e-12);
        }
    }
    println!("ACCEPTANCE 4 PASS: limiting constants at alpha = 0, 1/2, 1");
}

/// Criterion 5: dual-route covariance agreement to 1e-9 and eigen residuals
/// to 1e-10 across alpha = 0.05, 0.10, ..., 0.95.
#[test]
fn criterion_05_dual_route_sigma() {
    let mut worst_sigma = 0.0f64;
    let mut worst_eigen = 0.0f64;
    for i in 1..=19u32 {
        let a = alpha(f64::from(i) * 0.05);
        let sys = eigensystem(a).unwrap();
        worst_eigen = worst_eigen
            .max(sys.identity_residual())
            .max(sys.diagonalization_residual());
        let spectral = sys.sigma_spectral().unwrap();
        let closed = sigma_closed_form(a);
        worst_sigma = worst_sigma.max(max_abs_diff_between(&spectral, &closed));
    }
    assert!(
        worst_sigma <= 1e-9,
        "sigma routes differ by {worst_sigma:e}"
    );
    assert!(worst_eigen <= 1e-10, "eigen residual {worst_eigen:e}");
    println!(
        "ACCEPTANCE 5 PASS: sigma routes within {worst_sigma:.2e}, eigen residual {worst_eigen:.2e}"
    );
}

/// Criterion 6: the scaled second-moment remainders
/// `|var - (c1 n + c0)| n^(2(1-alpha))` stay bounded between n = 1e3 and
/// n = 1e4 (ratio below 3, with a small floor for exactly-vanishing
/// remainders).
#[test]
fn criterion_06_second_moment_asymptotics() {
    const FLOOR: f64 = 1e-6;
    for &av in &[0.0, 0.3, 0.5, 0.7] {
        let a = alpha(av);
        let scale = |n: u64| (n as f64).powf(2.0 * (1.0 - av));
        let r3 = second_moment_remainders(1_000, a);
        let r4 = second_moment_remainders(10_000, a);
        let pairs = [
            ("var_c", r3.0, r4.0),
            ("cov", r3.1, r4.1),
            ("var_a", r3.2, r4.2),
        ];
        for (name, lo, hi) in pairs {
            let s3 = lo.abs() * scale(1_000);
            let s4 = hi.abs() * scale(10_000);
            assert!(
                s4 <= 3.0 * s3.max(FLOOR),
                "alpha = {av}, {name}: scaled remainder grew {s3:e} -> {s4:e}"
            );
        }
    }
    println!("ACCEPTANCE 6 PASS: scaled second-moment remainders bounded (ratio < 3)");
}

/// Criterion 7: correlation signs at n = 500 and the constant Yule
/// correlation -sqrt(14/69) for n >= 7.
#[test]
fn criterion_07_correlation_critical_value() {
    for &av in &[0.0, 0.25, 0.5 - 1e-6] {
        let (sign, rho) = correlation_sign(500, alpha(av)).unwrap();
        assert_eq!(sign, -1, "alpha = {av}: rho = {rho}");
    }
    for &av in &[0.6, 0.75, 0.9] {
        let (sign, rho) = correlation_sign(500, alpha(av)).unwrap();
        assert_eq!(sign, 1, "alpha = {av}: rho = {rho}");
    }
    let expect = -(14.0f64 / 69.0).sqrt();
    for &n in &[7u64, 20, 100, 500] {
        let (_, rho) = correlation_sign(n, alpha(0.0)).unwrap();
        assert!((rho - expect).abs() <= 1e-10, "n = {n}: rho = {rho}");
    }
    println!("ACCEPTANCE 7 PASS: correlation negative below 1/2, positive above; Yule rho fixed");
}

/// Criterion 8: curve extrema to four decimal places.
#[test]
fn criterion_08_extrema() {
    let e = limit_curve_extrema().unwrap();
    assert!((e.a0 - 0.7339).abs() <= 1e-4, "a0 = {}", e.a0);
    assert!((e.a1 - 0.8688).abs() <= 1e-4, "a1 = {}", e.a1);
    assert!(
        (e.sigma2_max - 0.0695).abs() <= 1e-4,
        "sigma2 max = {}",
        e.sigma2_max
    );
    assert!(
        (e.cov_max - 0.0225).abs() <= 1e-4,
        "cov max = {}",
        e.cov_max
    );
    println!(
        "ACCEPTANCE 8 PASS: a0 = {:.6}, a1 = {:.6}, sigma2 max = {:.6}, cov max = {:.6}",
        e.a0, e.a1, e.sigma2_max, e.cov_max
    );
}

/// Criterion 9: at n = 2000 with 1e5 trials per engine, tree and urn agree
/// (two-sample chi-square p > 1e-3) and the whitened CLT coverage of the
/// 0.9 chi-square(2) disc is within 0.9 +/- 0.015.
#[test]
fn criterion_09_engine_equivalence_and_clt() {
    for (i, &av) in [0.3, 0.5, 0.7].iter().enumerate() {
        let a = alpha(av);
        let seed = 9_000 + i as u64;
        let tree_cfg = TrialConfig {
            n: 2_000,
            alpha: a,
            trials: 100_000,
            seed,
            engine: Engine::Tree,
        };
        let urn_cfg = TrialConfig {
            engine: Engine::Urn,
            seed: seed + 500,
            ..tree_cfg
        };
        let tree = run_campaign(&tree_cfg).unwrap();
        let urn = run_campaign(&urn_cfg).unwrap();
        let two = two_sample_chi2(&tree, &urn).unwrap();
        assert!(
            two.p_value > 1e-3,
            "alpha = {av}: two-sample chi2 = {} (dof {}), p = {}",
            two.chi2_stat,
            two.dof,
            two.p_value
        );

        let limits = limit_summary(a).unwrap();
        let clt = clt_check(&tree_cfg, &limits).unwrap();
        let coverage = clt.coverage_at(0.9).unwrap();
        assert!(
            (coverage - 0.9).abs() <= 0.015,
            "alpha = {av}: 0.9-disc coverage = {coverage}"
        );
        println!(
            "  alpha = {av}: two-sample p = {:.4}, 0.9-disc coverage = {coverage:.4}",
            two.p_value
        );
    }
    println!("ACCEPTANCE 9 PASS: engines agree and CLT coverage within 0.9 +/- 0.015");
}

/// Criterion 10: cherry-variance recursion residual <= 1e-9 up to n = 1e3.
#[test]
fn criterion_10_variance_recursion() {
    for &av in &[0.0, 0.25, 0.5, 0.75, 1.0] {
        let res = ford_variance_recursion_check(1_000, alpha(av));
        assert!(res <= 1e-9, "alpha = {av}: residual {res:e}");
    }
    println!("ACCEPTANCE 10 PASS: variance recursion residual <= 1e-9");
}

/// Criterion 11: the univariate cherry recursion equals the joint-pmf
/// marginal to 1e-12 for every n <= 200.
#[test]
fn criterion_11_cherry_marginal() {
    let mut worst = 0.0f64;
    for &av in &[0.0, 0.5, 0.9] {
        let a = alpha(av);
        for n in 3..=200u64 {
            let joint = joint_pmf(n, a).unwrap().cherry_marginal();
            let direct = cherry_pmf(n, a);
            for (x, y) in joint.iter().zip(&direct) {
                worst = worst.max((x - y).abs());
            }
        }
    }
    assert!(worst <= 1e-12, "max abs error {worst:e}");
    println!("ACCEPTANCE 11 PASS: cherry marginal matches joint (max err {worst:.2e})");
}
