//! Simulation campaigns over the tree and urn engines, with statistical
//! agreement tests against the exact pmf, engine-vs-engine two-sample
//! checks, CLT whitening diagnostics, and long-run proportion convergence.
//!
//! Reproducibility contract: each trial draws from its own counter-derived
//! stream (`ChaCha8` seeded by the campaign seed with the trial index as the
//! stream id), and aggregation uses exact integer accumulators, so a campaign
//! produces bit-identical output for any parallel schedule.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};

use crate::exact::JointPmf;
use crate::numerics::{chi2_2_quantile, chi2_sf};
use crate::tree::{simulate_ford, PairCounts};
use crate::urn::{initial_urn, limit_v, urn_to_ac, LimitSummary};
use crate::{Alpha, Error};

/// Which sampler realizes the Ford law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    /// Explicit tree-shape growth.
    Tree,
    /// The coupled six-colour urn.
    Urn,
}

impl std::str::FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "tree" => Ok(Engine::Tree),
            "urn" => Ok(Engine::Urn),
            other => Err(Error::InvalidConfig(format!("unknown engine {other:?}"))),
        }
    }
}

/// A reproducible campaign: identical configs give bit-identical results.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TrialConfig {
    /// Leaf count per tree (or, for [`proportion_convergence`], urn steps).
    pub n: u64,
    pub alpha: Alpha,
    pub trials: u64,
    pub seed: u64,
    pub engine: Engine,
}

impl TrialConfig {
    fn validate(&self) -> Result<(), Error> {
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be >= 1".into()));
        }
        if self.n < 2 {
            return Err(Error::InvalidConfig("n must be >= 2".into()));
        }
        Ok(())
    }
}

fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn one_trial(cfg: &TrialConfig, index: u64) -> PairCounts {
    let mut rng = trial_rng(cfg.seed, index);
    match cfg.engine {
        Engine::Tree => simulate_ford(cfg.n, cfg.alpha, &mut rng).count_stats(),
        Engine::Urn => {
            let mut urn = initial_urn();
            for _ in 0..cfg.n - 2 {
                urn.step(cfg.alpha, &mut rng);
            }
            urn_to_ac(&urn)
        }
    }
}

#[derive(Default)]
struct Accumulator {
    counts: BTreeMap<(u64, u64), u64>,
    sum_a: u128,
    sum_c: u128,
    sum_a2: u128,
    sum_c2: u128,
    sum_ac: u128,
}

impl Accumulator {
    fn record(mut self, p: PairCounts) -> Self {
        let (a, c) = (p.pitchforks, p.cherries);
        *self.counts.entry((a, c)).or_insert(0) += 1;
        self.sum_a += a as u128;
        self.sum_c += c as u128;
        self.sum_a2 += (a * a) as u128;
        self.sum_c2 += (c * c) as u128;
        self.sum_ac += (a * c) as u128;
        self
    }

    fn merge(mut self, other: Self) -> Self {
        for (k, v) in other.counts {
            *self.counts.entry(k).or_insert(0) += v;
        }
        self.sum_a += other.sum_a;
        self.sum_c += other.sum_c;
        self.sum_a2 += other.sum_a2;
        self.sum_c2 += other.sum_c2;
        self.sum_ac += other.sum_ac;
        self
    }
}

fn serialize_counts<S: Serializer>(
    counts: &BTreeMap<(u64, u64), u64>,
    s: S,
) -> Result<S::Ok, S::Error> {
    #[derive(Serialize)]
    struct Cell {
        a: u64,
        c: u64,
        count: u64,
    }
    let mut seq = s.serialize_seq(Some(counts.len()))?;
    for (&(a, c), &count) in counts {
        seq.serialize_element(&Cell { a, c, count })?;
    }
    seq.end()
}

/// Occurrence counts and sample statistics of one campaign.
///
/// Sample moments are derived from exact integer sums, so merging and
/// parallel scheduling cannot perturb them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalSummary {
    pub n: u64,
    pub alpha: Alpha,
    pub engine: Engine,
    pub trials: u64,
    #[serde(serialize_with = "serialize_counts")]
    pub counts: BTreeMap<(u64, u64), u64>,
    pub mean_a: f64,
    pub mean_c: f64,
    /// Unbiased sample variances and covariance.
    pub var_a: f64,
    pub var_c: f64,
    pub cov_ac: f64,
}

impl EmpiricalSummary {
    /// Builds a summary from raw occurrence counts.
    pub fn from_counts(
        n: u64,
        alpha: Alpha,
        engine: Engine,
        counts: BTreeMap<(u64, u64), u64>,
    ) -> Self {
        let mut acc = Accumulator::default();
        for (&(a, c), &k) in &counts {
            acc.sum_a += (a * k) as u128;
            acc.sum_c += (c * k) as u128;
            acc.sum_a2 += (a * a) as u128 * k as u128;
            acc.sum_c2 += (c * c) as u128 * k as u128;
            acc.sum_ac += (a * c) as u128 * k as u128;
        }
        acc.counts = counts;
        Self::finish(n, alpha, engine, acc)
    }

    fn finish(n: u64, alpha: Alpha, engine: Engine, acc: Accumulator) -> Self {
        let trials: u64 = acc.counts.values().sum();
        let t = trials as i128;
        let mean_a = acc.sum_a as f64 / trials as f64;
        let mean_c = acc.sum_c as f64 / trials as f64;
        // t * sum_x2 - sum_x^2 is exact in i128; one division at the end.
        let scaled =
            |sum2: u128, sum: u128| -> f64 { (t * sum2 as i128 - (sum as i128).pow(2)) as f64 };
        let denom = (trials as f64) * (trials.saturating_sub(1)) as f64;
        let (var_a, var_c, cov_ac) = if trials > 1 {
            (
                scaled(acc.sum_a2, acc.sum_a) / denom,
                scaled(acc.sum_c2, acc.sum_c) / denom,
                (t * acc.sum_ac as i128 - acc.sum_a as i128 * acc.sum_c as i128) as f64 / denom,
            )
        } else {
            (0.0, 0.0, 0.0)
        };
        EmpiricalSummary {
            n,
            alpha,
            engine,
            trials,
            counts: acc.counts,
            mean_a,
            mean_c,
            var_a,
            var_c,
            cov_ac,
        }
    }

    /// Empirical frequency of the pair `(a, c)`.
    pub fn frequency(&self, a: u64, c: u64) -> f64 {
        *self.counts.get(&(a, c)).unwrap_or(&0) as f64 / self.trials as f64
    }
}

/// Runs `cfg.trials` independent replicates on the configured engine.
///
/// Trials are distributed over the rayon pool; each derives its own random
/// stream from `(seed, trial index)`, so the result does not depend on the
/// execution schedule.
pub fn run_campaign(cfg: &TrialConfig) -> Result<EmpiricalSummary, Error> {
    cfg.validate()?;
    let acc = (0..cfg.trials)
        .into_par_iter()
        .fold(Accumulator::default, |acc, i| acc.record(one_trial(cfg, i)))
        .reduce(Accumulator::default, Accumulator::merge);
    Ok(EmpiricalSummary::finish(cfg.n, cfg.alpha, cfg.engine, acc))
}

/// Per-trial `(a, c)` pairs in trial order, for external analysis.
pub fn per_trial_pairs(cfg: &TrialConfig) -> Result<Vec<PairCounts>, Error> {
    cfg.validate()?;
    Ok((0..cfg.trials)
        .into_par_iter()
        .map(|i| one_trial(cfg, i))
        .collect())
}

/// Streams raw per-trial pairs as CSV rows `trial,a,c` (with header).
pub fn write_per_trial_csv<W: std::io::Write>(
    cfg: &TrialConfig,
    writer: &mut W,
) -> Result<(), Error> {
    let pairs = per_trial_pairs(cfg)?;
    let mut render = |line: String| {
        writer
            .write_all(line.as_bytes())
            .map_err(|e| Error::InvalidConfig(format!("write failed: {e}")))
    };
    render("trial,a,c\n".into())?;
    for (i, p) in pairs.iter().enumerate() {
        render(format!("{i},{},{}\n", p.pitchforks, p.cherries))?;
    }
    Ok(())
}

/// Agreement report between a campaign and the exact joint pmf.
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    pub n: u64,
    pub alpha: Alpha,
    pub trials: u64,
    /// Total-variation distance between empirical frequencies and the pmf.
    pub tv_distance: f64,
    /// Goodness-of-fit statistic over cells with expected count >= 5
    /// (smaller cells pooled).
    pub chi2_stat: f64,
    pub dof: u64,
    pub p_value: f64,
    /// Standardized mean errors with exact-variance standard errors.
    pub z_mean_a: f64,
    pub z_mean_c: f64,
}

const POOL_THRESHOLD: f64 = 5.0;

/// Compares empirical frequencies with the exact pmf at the same `(n, alpha)`.
pub fn compare_exact(
    summary: &EmpiricalSummary,
    pmf: &JointPmf,
) -> Result<ComparisonReport, Error> {
    if summary.n != pmf.n() || summary.alpha != pmf.alpha() {
        return Err(Error::Mismatch(format!(
            "summary is (n = {}, alpha = {}), pmf is (n = {}, alpha = {})",
            summary.n,
            summary.alpha,
            pmf.n(),
            pmf.alpha()
        )));
    }
    let trials = summary.trials as f64;

    let mut tv = 0.0;
    let mut chi2 = 0.0;
    let mut kept_cells = 0u64;
    let mut pooled_expected = 0.0;
    let mut pooled_observed = 0.0;
    for (a, c, p) in pmf.cells() {
        let observed = *summary.counts.get(&(a, c)).unwrap_or(&0) as f64;
        tv += (observed / trials - p).abs();
        let expected = trials * p;
        if expected >= POOL_THRESHOLD {
            chi2 += (observed - expected).powi(2) / expected;
            kept_cells += 1;
        } else {
            pooled_expected += expected;
            pooled_observed += observed;
        }
    }
    let tv_distance = 0.5 * tv;
    if pooled_expected > 0.0 {
        chi2 += (pooled_observed - pooled_expected).powi(2) / pooled_expected;
        kept_cells += 1;
    }
    let dof = kept_cells.saturating_sub(1).max(1);

    let exact = pmf.moments();
    let var_a = exact.ea2 - exact.ea * exact.ea;
    let var_c = exact.ec2 - exact.ec * exact.ec;
    let z = |sample: f64, mean: f64, var: f64| {
        if var > 0.0 {
            (sample - mean) / (var / trials).sqrt()
        } else {
            0.0
        }
    };

    Ok(ComparisonReport {
        n: summary.n,
        alpha: summary.alpha,
        trials: summary.trials,
        tv_distance,
        chi2_stat: chi2,
        dof,
        p_value: chi2_sf(chi2, dof as f64),
        z_mean_a: z(summary.mean_a, exact.ea, var_a),
        z_mean_c: z(summary.mean_c, exact.ec, var_c),
    })
}

/// Two-sample homogeneity report (tree engine vs urn engine).
#[derive(Debug, Clone, Serialize)]
pub struct TwoSampleReport {
    pub chi2_stat: f64,
    pub dof: u64,
    pub p_value: f64,
}

/// Chi-square homogeneity test between two campaigns of the same law.
/// Cells where either sample expects fewer than 5 under the pooled estimate
/// are merged into one bucket.
pub fn two_sample_chi2(
    s1: &EmpiricalSummary,
    s2: &EmpiricalSummary,
) -> Result<TwoSampleReport, Error> {
    if s1.n != s2.n || s1.alpha != s2.alpha {
        return Err(Error::Mismatch(
            "two-sample test needs equal (n, alpha)".into(),
        ));
    }
    let (n1, n2) = (s1.trials as f64, s2.trials as f64);
    let total = n1 + n2;

    let mut cells: BTreeMap<(u64, u64), (f64, f64)> = BTreeMap::new();
    for (&k, &v) in &s1.counts {
        cells.entry(k).or_insert((0.0, 0.0)).0 = v as f64;
    }
    for (&k, &v) in &s2.counts {
        cells.entry(k).or_insert((0.0, 0.0)).1 = v as f64;
    }

    let mut chi2 = 0.0;
    let mut kept = 0u64;
    let mut pool = (0.0f64, 0.0f64);
    for &(o1, o2) in cells.values() {
        let p_hat = (o1 + o2) / total;
        if n1 * p_hat >= POOL_THRESHOLD && n2 * p_hat >= POOL_THRESHOLD {
            chi2 +=
                (o1 - n1 * p_hat).powi(2) / (n1 * p_hat) + (o2 - n2 * p_hat).powi(2) / (n2 * p_hat);
            kept += 1;
        } else {
            pool.0 += o1;
            pool.1 += o2;
        }
    }
    if pool.0 + pool.1 > 0.0 {
        let p_hat = (pool.0 + pool.1) / total;
        chi2 += (pool.0 - n1 * p_hat).powi(2) / (n1 * p_hat)
            + (pool.1 - n2 * p_hat).powi(2) / (n2 * p_hat);
        kept += 1;
    }
    let dof = kept.saturating_sub(1).max(1);
    Ok(TwoSampleReport {
        chi2_stat: chi2,
        dof,
        p_value: chi2_sf(chi2, dof as f64),
    })
}

/// Weighted first four moments of one whitened coordinate.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MarginalStats {
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub kurtosis: f64,
}

/// CLT diagnostics for one campaign.
#[derive(Debug, Clone, Serialize)]
pub struct CltReport {
    pub n: u64,
    pub alpha: Alpha,
    pub trials: u64,
    /// `(nominal quantile, observed coverage)` of Mahalanobis discs.
    pub coverage: Vec<(f64, f64)>,
    pub whitened_a: MarginalStats,
    pub whitened_c: MarginalStats,
}

impl CltReport {
    /// Observed coverage of the disc at the given chi-square(2) quantile.
    pub fn coverage_at(&self, p: f64) -> Option<f64> {
        self.coverage
            .iter()
            .find(|(q, _)| (q - p).abs() < 1e-12)
            .map(|&(_, c)| c)
    }
}

/// Symmetric inverse square root of a 2x2 SPD matrix.
fn inv_sqrt_2x2(s: [[f64; 2]; 2]) -> Option<[[f64; 2]; 2]> {
    let det = s[0][0] * s[1][1] - s[0][1] * s[1][0];
    if det <= 0.0 {
        return None;
    }
    let sq = det.sqrt();
    let norm = (s[0][0] + s[1][1] + 2.0 * sq).sqrt();
    // sqrt(S) = (S + sqrt(det) I) / sqrt(tr + 2 sqrt(det)); invert it.
    let r = [
        [(s[0][0] + sq) / norm, s[0][1] / norm],
        [s[1][0] / norm, (s[1][1] + sq) / norm],
    ];
    let rdet = r[0][0] * r[1][1] - r[0][1] * r[1][0];
    Some([
        [r[1][1] / rdet, -r[0][1] / rdet],
        [-r[1][0] / rdet, r[0][0] / rdet],
    ])
}

/// Runs a campaign, standardizes each trial by the limiting centering
/// `n (nu, mu)` and scaling `sqrt(n)`, whitens with `S^{-1/2}`, and reports
/// disc coverage against chi-square(2) quantiles plus marginal moments.
///
/// Fails for the comb model, where `S` is singular.
pub fn clt_check(cfg: &TrialConfig, limits: &LimitSummary) -> Result<CltReport, Error> {
    if cfg.alpha != limits.alpha {
        return Err(Error::Mismatch(
            "config and limits use different alpha".into(),
        ));
    }
    let w = inv_sqrt_2x2(limits.s).ok_or(Error::EndpointAlpha(cfg.alpha.value()))?;
    let summary = run_campaign(cfg)?;

    let nf = cfg.n as f64;
    let sqrt_n = nf.sqrt();
    let quantiles = [0.5, 0.9, 0.95, 0.99];
    let radii: Vec<f64> = quantiles.iter().map(|&p| chi2_2_quantile(p)).collect();
    let mut inside = [0u64; 4];
    // Power sums of the whitened coordinates, weighted by multiplicity.
    let mut pw = [[0.0f64; 4]; 2];
    for (&(a, c), &count) in &summary.counts {
        let x = (a as f64 - nf * limits.nu) / sqrt_n;
        let y = (c as f64 - nf * limits.mu) / sqrt_n;
        let z1 = w[0][0] * x + w[0][1] * y;
        let z2 = w[1][0] * x + w[1][1] * y;
        let m2 = z1 * z1 + z2 * z2;
        let cf = count as f64;
        for (slot, &r) in radii.iter().enumerate() {
            if m2 <= r {
                inside[slot] += count;
            }
        }
        for (k, z) in [z1, z2].into_iter().enumerate() {
            pw[k][0] += cf * z;
            pw[k][1] += cf * z * z;
            pw[k][2] += cf * z * z * z;
            pw[k][3] += cf * z * z * z * z;
        }
    }
    let t = summary.trials as f64;
    let stats = |p: [f64; 4]| {
        let mean = p[0] / t;
        let var = p[1] / t - mean * mean;
        let m3 = p[2] / t - 3.0 * mean * p[1] / t + 2.0 * mean.powi(3);
        let m4 =
            p[3] / t - 4.0 * mean * p[2] / t + 6.0 * mean * mean * p[1] / t - 3.0 * mean.powi(4);
        MarginalStats {
            mean,
            variance: var,
            skewness: m3 / var.powf(1.5),
            kurtosis: m4 / (var * var),
        }
    };
    Ok(CltReport {
        n: cfg.n,
        alpha: cfg.alpha,
        trials: summary.trials,
        coverage: quantiles
            .iter()
            .zip(&inside)
            .map(|(&p, &k)| (p, k as f64 / t))
            .collect(),
        whitened_a: stats(pw[0]),
        whitened_c: stats(pw[1]),
    })
}

/// Long-run proportion check for a single urn trajectory.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub alpha: Alpha,
    pub steps: u64,
    /// `(step, max |U/step - v|)` at geometric checkpoints.
    pub checkpoints: Vec<(u64, f64)>,
    pub final_max_deviation: f64,
}

/// Runs one urn trajectory for `cfg.n` steps and records the sup-norm
/// distance of `U/step` from the limiting vector `v` at checkpoints.
pub fn proportion_convergence(
    cfg: &TrialConfig,
    limits: &LimitSummary,
) -> Result<ConvergenceReport, Error> {
    if cfg.engine != Engine::Urn {
        return Err(Error::InvalidConfig(
            "proportion convergence runs on the urn engine".into(),
        ));
    }
    if cfg.alpha != limits.alpha {
        return Err(Error::Mismatch(
            "config and limits use different alpha".into(),
        ));
    }
    let steps = cfg.n;
    if steps == 0 {
        return Err(Error::InvalidConfig("need at least one urn step".into()));
    }
    let v = limit_v(cfg.alpha);
    let mut rng = trial_rng(cfg.seed, 0);
    let mut urn = initial_urn();
    let mut checkpoints = Vec::new();
    let mut mark = (steps / 128).max(1);
    for step in 1..=steps {
        urn.step(cfg.alpha, &mut rng);
        if step == mark || step == steps {
            let dev = urn
                .counts()
                .iter()
                .zip(&v)
                .map(|(&u, &vi)| (u as f64 / step as f64 - vi).abs())
                .fold(0.0f64, f64::max);
            checkpoints.push((step, dev));
            mark = (mark * 2).min(steps);
        }
    }
    let final_max_deviation = checkpoints.last().map(|&(_, d)| d).unwrap_or(f64::NAN);
    Ok(ConvergenceReport {
        alpha: cfg.alpha,
        steps,
        checkpoints,
        final_max_deviation,
    })
}
