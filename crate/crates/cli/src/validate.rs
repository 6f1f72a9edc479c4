//! The `validate` subcommand: cross-checks the four computational routes
//! (tree simulation, urn simulation, exact DP, closed forms) against each
//! other at one `(n, alpha)`.

use ford_core::exact::{
    cherry_pmf, ford_variance_recursion_check, joint_pmf, mean_closed_form, moments_at,
};
use ford_core::montecarlo::{
    compare_exact, proportion_convergence, run_campaign, two_sample_chi2, Engine, TrialConfig,
};
use ford_core::urn::{eigensystem, limit_summary};
use ford_core::Alpha;
use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Serialize)]
pub struct ValidationReport {
    pub n: u64,
    pub alpha: Alpha,
    pub trials: u64,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub passed: bool,
}

fn check(name: &str, passed: bool, detail: String) -> Check {
    Check {
        name: name.into(),
        passed,
        detail,
    }
}

fn skipped(name: &str, why: &str) -> Check {
    Check {
        name: name.into(),
        passed: true,
        detail: format!("skipped: {why}"),
    }
}

pub fn run_validation(n: u64, alpha: Alpha, trials: u64, seed: u64) -> ValidationReport {
    let a = alpha.value();
    let mut checks = Vec::new();

    // Closed-form eigensystem residuals (interior alpha only).
    if a > 0.0 && a < 1.0 {
        checks.push(match eigensystem(alpha) {
            Ok(sys) => {
                let r = sys.identity_residual().max(sys.diagonalization_residual());
                check("eigensystem", r <= 1e-10, format!("max residual {r:.3e}"))
            }
            Err(e) => check("eigensystem", false, e.to_string()),
        });
    } else {
        checks.push(skipped(
            "eigensystem",
            "transform is singular at alpha = 0, 1",
        ));
    }

    // limit_summary internally enforces the dual covariance routes and the
    // S = Q' Sigma Q transform.
    let limits = match limit_summary(alpha) {
        Ok(l) => {
            checks.push(check(
                "covariance_routes",
                true,
                "closed form and spectral sum agree".into(),
            ));
            Some(l)
        }
        Err(e) => {
            checks.push(check("covariance_routes", false, e.to_string()));
            None
        }
    };

    // Exact DP normalization and marginal consistency.
    let pmf = match joint_pmf(n, alpha) {
        Ok(p) => {
            let drift = (p.total_mass() - 1.0).abs();
            checks.push(check(
                "pmf_normalization",
                drift <= 1e-9,
                format!("drift {drift:.3e}"),
            ));
            Some(p)
        }
        Err(e) => {
            checks.push(check("pmf_normalization", false, e.to_string()));
            None
        }
    };

    if let Some(pmf) = &pmf {
        let joint = pmf.cherry_marginal();
        let direct = cherry_pmf(n, alpha);
        let worst = joint
            .iter()
            .zip(&direct)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0f64, f64::max);
        checks.push(check(
            "cherry_marginal",
            worst <= 1e-10,
            format!("max abs diff {worst:.3e}"),
        ));

        let from_pmf = pmf.moments();
        let t = moments_at(n, alpha);
        let worst = [
            (from_pmf.ec, t.ec),
            (from_pmf.ea, t.ea),
            (from_pmf.ec2, t.ec2),
            (from_pmf.eac, t.eac),
            (from_pmf.ea2, t.ea2),
        ]
        .iter()
        .map(|(x, y)| ((x - y) / y.abs().max(1.0)).abs())
        .fold(0.0f64, f64::max);
        checks.push(check(
            "pmf_vs_recursion_moments",
            worst <= 1e-9,
            format!("max rel diff {worst:.3e}"),
        ));
    }

    // Closed-form means against the recursion.
    {
        let t = moments_at(n, alpha);
        let cf = mean_closed_form(n, alpha);
        let rel_c = ((cf.mean_c - t.ec) / t.ec).abs();
        let rel_a = ((cf.mean_a - t.ea) / t.ea).abs();
        let worst = rel_c.max(rel_a);
        checks.push(check(
            "closed_form_means",
            worst <= 1e-10,
            format!("max rel diff {worst:.3e}"),
        ));
    }

    // Cherry-variance recursion identity.
    {
        let cap = n.clamp(4, 1_000);
        let r = ford_variance_recursion_check(cap, alpha);
        checks.push(check(
            "variance_recursion",
            r <= 1e-9,
            format!("max residual {r:.3e} (n <= {cap})"),
        ));
    }

    // Long-run urn proportions against the limiting vector.
    if let Some(limits) = &limits {
        let cfg = TrialConfig {
            n: 100_000,
            alpha,
            trials: 1,
            seed,
            engine: Engine::Urn,
        };
        checks.push(match proportion_convergence(&cfg, limits) {
            Ok(r) => check(
                "urn_proportions",
                r.final_max_deviation < 0.05,
                format!(
                    "max deviation {:.4} after {} steps",
                    r.final_max_deviation, r.steps
                ),
            ),
            Err(e) => check("urn_proportions", false, e.to_string()),
        });
    }

    // Engine-vs-engine and engine-vs-exact agreement.
    let tree_cfg = TrialConfig {
        n,
        alpha,
        trials,
        seed,
        engine: Engine::Tree,
    };
    let urn_cfg = TrialConfig {
        engine: Engine::Urn,
        seed: seed ^ 0x9e37_79b9,
        ..tree_cfg
    };
    let tree = run_campaign(&tree_cfg);
    let urn = run_campaign(&urn_cfg);
    match (&tree, &urn) {
        (Ok(t), Ok(u)) => {
            checks.push(match two_sample_chi2(t, u) {
                Ok(r) => check(
                    "engine_equivalence",
                    r.p_value > 1e-3,
                    format!(
                        "chi2 {:.2} (dof {}), p = {:.4}",
                        r.chi2_stat, r.dof, r.p_value
                    ),
                ),
                Err(e) => check("engine_equivalence", false, e.to_string()),
            });
        }
        _ => checks.push(check("engine_equivalence", false, "campaign failed".into())),
    }
    if let (Ok(t), Some(pmf)) = (&tree, &pmf) {
        checks.push(match compare_exact(t, pmf) {
            Ok(r) => check(
                "simulation_vs_exact",
                r.z_mean_a.abs() <= 5.0 && r.z_mean_c.abs() <= 5.0 && r.p_value > 1e-4,
                format!(
                    "tv {:.5}, chi2 p = {:.4}, z_a = {:.2}, z_c = {:.2}",
                    r.tv_distance, r.p_value, r.z_mean_a, r.z_mean_c
                ),
            ),
            Err(e) => check("simulation_vs_exact", false, e.to_string()),
        });
    }

    let passed = checks.iter().all(|c| c.passed);
    ValidationReport {
        n,
        alpha,
        trials,
        seed,
        checks,
        passed,
    }
}
