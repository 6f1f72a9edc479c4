//! Exact distribution of the pitchfork/cherry pair for a fixed leaf count:
//! joint pmf by dynamic programming over leaf insertions, the cherry
//! marginal, coupled moment recursions, closed-form means with their decaying
//! correction terms, second-moment expansions, and the limiting-curve
//! analysis in alpha.

use serde::Serialize;

use crate::numerics::{bisect_root, gamma_ratio_product, Dd};
use crate::urn::s_closed_form;
use crate::{Alpha, Error};

/// Exact joint law of `(A_n, C_n)` over the support
/// `{1 <= c, 0 <= a <= c, a + 2c <= n}`.
#[derive(Debug, Clone)]
pub struct JointPmf {
    n: u64,
    alpha: Alpha,
    a_max: usize,
    c_max: usize,
    /// Dense `(a_max + 1) x (c_max + 1)` table, row-major in `a`.
    table: Vec<f64>,
}

/// Raw moments read off a pmf table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawMoments {
    pub ec: f64,
    pub ea: f64,
    pub ec2: f64,
    pub eac: f64,
    pub ea2: f64,
}

const PMF_DRIFT_TOL: f64 = 1e-9;

/// Builds the joint pmf of `(A_n, C_n)` for `n >= 3` by iterating the
/// four-term level recursion from the point mass at `(1, 1)` for `n = 3`.
///
/// Total mass is checked after the final level; drift beyond 1e-9 signals a
/// coefficient bug and is reported as an error.
pub fn joint_pmf(n: u64, alpha: Alpha) -> Result<JointPmf, Error> {
    assert!(n >= 3, "the joint pmf starts at n = 3");
    let al = alpha.value();
    let a_max = (n / 3) as usize;
    let c_max = (n / 2) as usize;
    let width = c_max + 1;
    let mut cur = vec![0.0f64; (a_max + 1) * width];
    let mut nxt = cur.clone();
    cur[width + 1] = 1.0; // P(A_3 = 1, C_3 = 1) = 1

    let get = |buf: &[f64], a: i64, c: i64| -> f64 {
        if a < 0 || c < 0 || a as usize > a_max || c as usize > c_max {
            0.0
        } else {
            buf[a as usize * width + c as usize]
        }
    };

    for m in 3..n {
        let mf = m as f64;
        let inv = 1.0 / (mf - al);
        let lvl = m + 1;
        let lvl_a = a_max.min((lvl / 3) as usize);
        let lvl_c = c_max.min((lvl / 2) as usize);
        for a in 0..=lvl_a {
            let af = a as f64;
            for c in 1..=lvl_c {
                let cf = c as f64;
                let stay = (2.0 * af + al * (mf - af - cf - 1.0)) * get(&cur, a as i64, c as i64);
                let from_up = (1.0 - al) * (af + 1.0) * get(&cur, a as i64 + 1, c as i64 - 1);
                let from_left = (2.0 - al) * (cf - af + 1.0) * get(&cur, a as i64 - 1, c as i64);
                let from_below =
                    (1.0 - al) * (mf - af - 2.0 * cf + 2.0) * get(&cur, a as i64, c as i64 - 1);
                // + 0.0 folds the negative zero a negative coefficient can
                // leave on an empty source cell.
                nxt[a * width + c] = (stay + from_up + from_left + from_below) * inv + 0.0;
            }
        }
        std::mem::swap(&mut cur, &mut nxt);
    }

    let pmf = JointPmf {
        n,
        alpha,
        a_max,
        c_max,
        table: cur,
    };
    let drift = (pmf.total_mass() - 1.0).abs();
    if drift > PMF_DRIFT_TOL {
        return Err(Error::NormalizationDrift(drift));
    }
    Ok(pmf)
}

impl JointPmf {
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn alpha(&self) -> Alpha {
        self.alpha
    }

    /// `P(A_n = a, C_n = c)`; zero outside the support.
    pub fn prob(&self, a: u64, c: u64) -> f64 {
        if a as usize > self.a_max || c as usize > self.c_max {
            0.0
        } else {
            self.table[a as usize * (self.c_max + 1) + c as usize]
        }
    }

    /// All support cells `(a, c, prob)`, in lexicographic `(a, c)` order.
    pub fn cells(&self) -> impl Iterator<Item = (u64, u64, f64)> + '_ {
        let n = self.n;
        (0..=self.a_max as u64).flat_map(move |a| {
            (1..=self.c_max as u64)
                .filter(move |&c| a <= c && a + 2 * c <= n)
                .map(move |c| (a, c, self.prob(a, c)))
        })
    }

    pub fn total_mass(&self) -> f64 {
        self.table.iter().sum()
    }

    /// Raw moments by table summation.
    pub fn moments(&self) -> RawMoments {
        let (mut ec, mut ea, mut ec2, mut eac, mut ea2) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (a, c, p) in self.cells() {
            let (af, cf) = (a as f64, c as f64);
            ec += p * cf;
            ea += p * af;
            ec2 += p * cf * cf;
            eac += p * af * cf;
            ea2 += p * af * af;
        }
        RawMoments {
            ec,
            ea,
            ec2,
            eac,
            ea2,
        }
    }

    /// Marginal of the cherry count by row summation.
    pub fn cherry_marginal(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.c_max + 1];
        for (_, c, p) in self.cells() {
            out[c as usize] += p;
        }
        out
    }
}

/// Marginal pmf of the cherry count by the univariate recursion; `probs[k]`
/// is `P(C_n = k)` for `k = 0..=n/2`.
///
/// The `k - 1` source term reads the *previous* level (the functional
/// recursion forces `P(C_n = k - 1)` there); agreement with the
/// marginalized joint pmf is part of the validation suite.
pub fn cherry_pmf(n: u64, alpha: Alpha) -> Vec<f64> {
    assert!(n >= 3, "the cherry marginal starts at n = 3");
    let al = alpha.value();
    let c_max = (n / 2) as usize;
    let mut cur = vec![0.0f64; c_max + 1];
    let mut nxt = cur.clone();
    cur[1] = 1.0;
    for m in 3..n {
        let mf = m as f64;
        let inv = 1.0 / (mf - al);
        let lvl = m + 1;
        let lvl_c = c_max.min((lvl / 2) as usize);
        for k in 1..=lvl_c {
            let kf = k as f64;
            let stay = ((mf - 1.0) * al + 2.0 * (1.0 - al) * kf) * cur[k];
            let from_below = (1.0 - al) * (mf - 2.0 * kf + 2.0) * cur[k - 1];
            nxt[k] = (stay + from_below) * inv;
        }
        std::mem::swap(&mut cur, &mut nxt);
    }
    cur
}

/// Exact raw and central moments of `(A_n, C_n)` at one `n`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MomentTrace {
    pub n: u64,
    pub alpha: Alpha,
    pub ec: f64,
    pub ea: f64,
    pub ec2: f64,
    pub eac: f64,
    pub ea2: f64,
    pub var_c: f64,
    pub cov_ac: f64,
    pub var_a: f64,
    /// `None` when either variance vanishes (in particular the comb model).
    pub corr: Option<f64>,
}

fn trace_from_raw(n: u64, alpha: Alpha, m: RawMoments) -> MomentTrace {
    let var_c = m.ec2 - m.ec * m.ec;
    let var_a = m.ea2 - m.ea * m.ea;
    let cov_ac = m.eac - m.ea * m.ec;
    let corr = if var_c > 0.0 && var_a > 0.0 {
        Some(cov_ac / (var_c * var_a).sqrt())
    } else {
        None
    };
    MomentTrace {
        n,
        alpha,
        ec: m.ec,
        ea: m.ea,
        ec2: m.ec2,
        eac: m.eac,
        ea2: m.ea2,
        var_c,
        cov_ac,
        var_a,
        corr,
    }
}

/// Advances the five raw moments from level `m` to `m + 1`.
fn advance_raw(m: u64, al: f64, r: RawMoments) -> RawMoments {
    let mf = m as f64;
    let inv = 1.0 / (mf - al);
    let b = 1.0 - al;
    RawMoments {
        ec: ((mf - 2.0 + al) * r.ec + mf * b) * inv,
        ea: ((mf - 3.0 + al) * r.ea + (2.0 - al) * r.ec) * inv,
        ec2: ((mf - 4.0 + 3.0 * al) * r.ec2 + 2.0 * (mf - 1.0) * b * r.ec + mf * b) * inv,
        eac: ((mf - 5.0 + 3.0 * al) * r.eac + (mf - 1.0) * b * r.ea + (2.0 - al) * r.ec2) * inv,
        ea2: ((mf - 6.0 + 3.0 * al) * r.ea2 + 2.0 * (2.0 - al) * r.eac + (2.0 - al) * r.ec - r.ea)
            * inv,
    }
}

/// Iterates the five coupled moment recurrences from the `n = 3` initial
/// conditions (all five raw moments equal 1) and derives central moments.
pub fn moment_trace(n_max: u64, alpha: Alpha) -> Vec<MomentTrace> {
    assert!(n_max >= 3);
    let al = alpha.value();
    let mut raw = RawMoments {
        ec: 1.0,
        ea: 1.0,
        ec2: 1.0,
        eac: 1.0,
        ea2: 1.0,
    };
    let mut out = Vec::with_capacity((n_max - 2) as usize);
    out.push(trace_from_raw(3, alpha, raw));
    for m in 3..n_max {
        raw = advance_raw(m, al, raw);
        debug_assert!(raw.ec.is_finite() && raw.ea2.is_finite());
        out.push(trace_from_raw(m + 1, alpha, raw));
    }
    out
}

/// Moments at a single `n` without keeping the whole trace.
pub fn moments_at(n: u64, alpha: Alpha) -> MomentTrace {
    assert!(n >= 3);
    let al = alpha.value();
    let mut raw = RawMoments {
        ec: 1.0,
        ea: 1.0,
        ec2: 1.0,
        eac: 1.0,
        ea2: 1.0,
    };
    for m in 3..n {
        raw = advance_raw(m, al, raw);
    }
    trace_from_raw(n, alpha, raw)
}

/// Closed-form means: linear term plus the correction `x_n` (cherries)
/// or `y_n` (pitchforks), both `O(n^(-2(1-alpha)))`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MeanClosedForm {
    pub n: u64,
    pub alpha: Alpha,
    pub mean_c: f64,
    pub mean_a: f64,
    pub x_n: f64,
    pub y_n: f64,
}

/// Evaluates the closed-form means via explicit running products
/// (all factors lie in `(0, 1]`, so the direct product is stable).
pub fn mean_closed_form(n: u64, alpha: Alpha) -> MeanClosedForm {
    assert!(n >= 3);
    let a = alpha.value();
    let d = 3.0 - 2.0 * a;
    let nf = n as f64;

    let x_n = {
        let pref = a / (2.0 * d);
        if n == 3 {
            pref
        } else {
            pref * gamma_ratio_product(3, 2, 1, alpha, n).expect("factors positive")
        }
    };
    let y_n = if n == 3 {
        0.5
    } else {
        let pref = a * (2.0 * nf - 3.0 + a - nf * a) / (2.0 * d * (3.0 - a));
        if n == 4 {
            pref
        } else {
            pref * gamma_ratio_product(4, 3, 1, alpha, n).expect("factors positive")
        }
    };

    MeanClosedForm {
        n,
        alpha,
        mean_c: (1.0 - a) * nf / d + a / (2.0 * d) + x_n,
        mean_a: (1.0 - a) * nf / (2.0 * d) + a / (2.0 * d) + y_n,
        x_n,
        y_n,
    }
}

/// Linear-plus-constant truncations of the second central moments.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SecondMomentApprox {
    pub var_c: f64,
    pub cov_ac: f64,
    pub var_a: f64,
}

/// The explicit linear and constant coefficients of the second-moment
/// expansions; the dropped remainder is `O(n^(-2(1-alpha)))`.
pub fn second_moment_asymptotics(n: u64, alpha: Alpha) -> SecondMomentApprox {
    let a = alpha.value();
    let b = 1.0 - a;
    let nf = n as f64;
    let d = (3.0 - 2.0 * a).powi(2) * (5.0 - 4.0 * a);
    let d2 = 4.0 * (3.0 - 2.0 * a).powi(2) * (5.0 - 4.0 * a) * (7.0 - 4.0 * a);
    SecondMomentApprox {
        var_c: b * (2.0 - a) / d * nf - a * b * (2.0 - a) / d,
        cov_ac: -b * (2.0 - a) * (1.0 - 2.0 * a) / (2.0 * d) * nf - a * b * (2.0 - a) / d,
        var_a: b * (69.0 + a * (-135.0 + a * (96.0 - a * 24.0))) / d2 * nf
            + 3.0 * a * b * (1.0 - 2.0 * a) * (5.0 - 3.0 * a) / d2,
    }
}

/// Sign of the exact correlation of `(A_n, C_n)` together with its value.
///
/// Undefined for the comb model (both statistics are constants).
pub fn correlation_sign(n: u64, alpha: Alpha) -> Result<(i8, f64), Error> {
    if alpha.is_one() {
        return Err(Error::DegenerateCorrelation);
    }
    let t = moments_at(n, alpha);
    match t.corr {
        Some(r) => Ok((
            if r > 0.0 {
                1
            } else if r < 0.0 {
                -1
            } else {
                0
            },
            r,
        )),
        None => Err(Error::DegenerateCorrelation),
    }
}

/// Stationary points of the limiting variance and covariance curves.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CurveExtrema {
    /// Argmax of the limiting cherry variance `sigma^2(alpha)`.
    pub a0: f64,
    /// Argmax of the limiting covariance curve.
    pub a1: f64,
    /// `sigma^2(a0)`.
    pub sigma2_max: f64,
    /// Covariance at `a1`.
    pub cov_max: f64,
}

/// Locates the unique roots in `(0, 1)` of the two stationarity polynomials
/// by bisection and evaluates the limiting curves there.
pub fn limit_curve_extrema() -> Result<CurveExtrema, Error> {
    let cubic = |a: f64| 19.0 + a * (-48.0 + a * (36.0 - 8.0 * a));
    let quartic = |a: f64| -123.0 + a * (358.0 + a * (-370.0 + a * (160.0 - 24.0 * a)));
    let a0 = bisect_root(cubic, 0.0, 1.0, 1e-10)?;
    let a1 = bisect_root(quartic, 0.0, 1.0, 1e-10)?;
    let s0 = s_closed_form(Alpha::new(a0).expect("root inside (0,1)"));
    let s1 = s_closed_form(Alpha::new(a1).expect("root inside (0,1)"));
    Ok(CurveExtrema {
        a0,
        a1,
        sigma2_max: s0[1][1],
        cov_max: s1[0][1],
    })
}

// ---------------------------------------------------------------------------
// Compensated (double-double) evaluations
//
// The variance-recursion residual and the second-moment remainders sit ~10
// orders of magnitude below E[C_n^2] at n = 1e4, beneath plain f64 rounding;
// both are therefore evaluated in double-double arithmetic with coefficients
// assembled exactly from integer and alpha atoms.
// ---------------------------------------------------------------------------

struct DdMoments {
    ec: Dd,
    ea: Dd,
    ec2: Dd,
    eac: Dd,
    ea2: Dd,
}

// Coefficients are assembled from exact integer and alpha atoms so the
// recursion is followed to full double-double accuracy.
fn advance_raw_dd(m: u64, a: Dd, b: Dd, r: &DdMoments) -> DdMoments {
    let mf = Dd::from(m);
    let denom = mf - a;
    let two_minus_a = Dd::from(2.0) - a;
    let three_a = a * 3.0;
    DdMoments {
        ec: ((mf - 2.0 + a) * r.ec + mf * b) / denom,
        ea: ((mf - 3.0 + a) * r.ea + two_minus_a * r.ec) / denom,
        ec2: ((mf - 4.0 + three_a) * r.ec2 + (mf - 1.0) * b * 2.0 * r.ec + mf * b) / denom,
        eac: ((mf - 5.0 + three_a) * r.eac + (mf - 1.0) * b * r.ea + two_minus_a * r.ec2) / denom,
        ea2: ((mf - 6.0 + three_a) * r.ea2 + two_minus_a * 2.0 * r.eac + two_minus_a * r.ec - r.ea)
            / denom,
    }
}

fn dd_moments_at(n: u64, alpha: Alpha) -> DdMoments {
    let a = Dd::from(alpha.value());
    let b = Dd::ONE - a;
    let mut r = DdMoments {
        ec: Dd::ONE,
        ea: Dd::ONE,
        ec2: Dd::ONE,
        eac: Dd::ONE,
        ea2: Dd::ONE,
    };
    for m in 3..n {
        r = advance_raw_dd(m, a, b, &r);
    }
    r
}

/// Maximum residual of the cherry-variance recursion
/// `(n - a) s2_{n+1} - (n - 4 + 3a) s2_n = rhs(mu_n)` over `3 <= n < n_max`,
/// where the variance comes from the moment recursions.
///
/// Evaluated in double-double so the reported residual measures the algebra
/// (a wrong coefficient anywhere shows up at order one), not accumulated
/// f64 rounding.
pub fn ford_variance_recursion_check(n_max: u64, alpha: Alpha) -> f64 {
    assert!(n_max >= 4);
    let a = Dd::from(alpha.value());
    let b = Dd::ONE - a;
    let one_minus_2a = Dd::ONE - a * 2.0;
    let mut r = DdMoments {
        ec: Dd::ONE,
        ea: Dd::ONE,
        ec2: Dd::ONE,
        eac: Dd::ONE,
        ea2: Dd::ONE,
    };
    let mut worst = 0.0f64;
    for m in 3..n_max {
        let next = advance_raw_dd(m, a, b, &r);
        let mf = Dd::from(m);
        let mu = r.ec;
        let var = r.ec2 - r.ec * r.ec;
        let var_next = next.ec2 - next.ec * next.ec;
        let lhs = (mf - a) * var_next - (mf - 4.0 + a * 3.0) * var;
        // -4(1-a)^2 mu^2 + 2(1-a)[(1-2a)m + a] mu + a(1-a)m(m-1), over m - a.
        let rhs = (b * b * -4.0 * (mu * mu)
            + b * 2.0 * (one_minus_2a * mf + a) * mu
            + a * b * mf * (mf - 1.0))
            / (mf - a);
        worst = worst.max((lhs - rhs).to_f64().abs());
        r = next;
    }
    worst
}

/// Signed remainders `var(C_n) - approx`, `cov(A_n, C_n) - approx`,
/// `var(A_n) - approx` against the linear truncations, in compensated
/// precision (the remainders decay like `n^(-2(1-alpha))` and would
/// otherwise disappear under f64 cancellation).
pub fn second_moment_remainders(n: u64, alpha: Alpha) -> (f64, f64, f64) {
    let r = dd_moments_at(n, alpha);
    let a = Dd::from(alpha.value());
    let b = Dd::ONE - a;
    let nf = Dd::from(n);
    let two_minus_a = Dd::from(2.0) - a;
    let three_less = Dd::from(3.0) - a * 2.0;
    let five_less = Dd::from(5.0) - a * 4.0;
    let seven_less = Dd::from(7.0) - a * 4.0;
    let d = three_less * three_less * five_less;
    let d2 = d * seven_less * 4.0;

    let var_c = r.ec2 - r.ec * r.ec;
    let cov = r.eac - r.ea * r.ec;
    let var_a = r.ea2 - r.ea * r.ea;

    let lin_c = b * two_minus_a / d;
    let approx_c = lin_c * nf - a * lin_c;
    let approx_cov = lin_c * (Dd::ONE - a * 2.0) * -0.5 * nf - a * lin_c;
    // 69 - 135a + 96a^2 - 24a^3 in Horner form.
    let poly = Dd::from(69.0) + a * (Dd::from(-135.0) + a * (Dd::from(96.0) - a * 24.0));
    let lin_a = b * poly / d2;
    let const_a = a * b * 3.0 * (Dd::ONE - a * 2.0) * (Dd::from(5.0) - a * 3.0) / d2;
    let approx_a = lin_a * nf + const_a;

    (
        (var_c - approx_c).to_f64(),
        (cov - approx_cov).to_f64(),
        (var_a - approx_a).to_f64(),
    )
}
