//! A small tour of the four computational routes.
//!
//! Run with: cargo run -p ford-core --example tour

use ford_core::montecarlo::{self, Engine, TrialConfig};
use ford_core::{exact, tree, urn, Alpha};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), ford_core::Error> {
    let alpha = Alpha::new(0.3)?;

    // Exact joint law and moments at n = 100.
    let pmf = exact::joint_pmf(100, alpha)?;
    let trace = exact::moment_trace(100, alpha);
    let last = trace.last().unwrap();
    println!("E[C_100] = {:.6}, E[A_100] = {:.6}", last.ec, last.ea);

    // One random shape and its statistics.
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let t = tree::simulate_ford(100, alpha, &mut rng);
    let counts = t.count_stats();
    println!(
        "one sample: {} pitchforks, {} cherries",
        counts.pitchforks, counts.cherries
    );

    // A reproducible parallel campaign, compared against the exact law.
    let cfg = TrialConfig {
        n: 100,
        alpha,
        trials: 100_000,
        seed: 1,
        engine: Engine::Tree,
    };
    let summary = montecarlo::run_campaign(&cfg)?;
    let report = montecarlo::compare_exact(&summary, &pmf)?;
    println!(
        "campaign: tv = {:.5}, chi2 p = {:.4}, z_a = {:+.2}, z_c = {:+.2}",
        report.tv_distance, report.p_value, report.z_mean_a, report.z_mean_c
    );

    // Limit laws.
    let limits = urn::limit_summary(alpha)?;
    println!(
        "(nu, mu) = ({:.6}, {:.6}), sigma^2 = {:.6}",
        limits.nu, limits.mu, limits.s[1][1]
    );
    Ok(())
}
