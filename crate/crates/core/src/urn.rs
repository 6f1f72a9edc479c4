//! The six-colour urn process coupled to the Ford model, its diagonal
//! transform to a uniform urn, the closed-form eigensystem, and the limiting
//! proportion vectors and covariance matrices.
//!
//! One urn step corresponds to one leaf insertion: at time `n` the urn holds
//! `3 + 2n` balls describing the edge colours of a tree with `n + 2` leaves,
//! and the pitchfork/cherry pair is read off as
//! `(A, C) = (U_1 / 2, (U_1 + U_2) / 2)`.

use rand::Rng;
use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};

use crate::tree::PairCounts;
use crate::{Alpha, Error};

/// Replacement matrix of the urn: drawing colour `i` adds row `i` to the
/// counts. Balanced with row sum 2 (each insertion adds two edges).
pub const REPLACEMENT_MATRIX: [[i64; 6]; 6] = [
    [0, 0, 0, 1, 0, 1],
    [2, -2, 1, 0, -1, 2],
    [-2, 4, -1, 0, 2, -1],
    [0, 2, 0, -1, 1, 0],
    [2, -2, 1, 0, -1, 2],
    [0, 0, 0, 1, 0, 1],
];

/// Colour counts of the urn at a given time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct UrnState {
    counts: [u64; 6],
    time: u64,
}

/// The urn matching the 2-leaf tree: `(0, 2, 0, 0, 1, 0)` at time 0.
pub fn initial_urn() -> UrnState {
    UrnState {
        counts: [0, 2, 0, 0, 1, 0],
        time: 0,
    }
}

impl UrnState {
    pub fn counts(&self) -> [u64; 6] {
        self.counts
    }

    pub fn time(&self) -> u64 {
        self.time
    }

    /// Leaves of the coupled tree, `time + 2`.
    pub fn n_leaves(&self) -> u64 {
        self.time + 2
    }

    /// Total unnormalized selection weight `(1-alpha)(t+2) + alpha(t+1)`.
    fn total_weight(&self, alpha: Alpha) -> f64 {
        self.n_leaves() as f64 - alpha.value()
    }

    fn raw_weights(&self, alpha: Alpha) -> [f64; 6] {
        let mut w = [0.0; 6];
        for i in 0..4 {
            w[i] = alpha.beta() * self.counts[i] as f64;
        }
        for i in 4..6 {
            w[i] = alpha.value() * self.counts[i] as f64;
        }
        w
    }

    pub(crate) fn step(&mut self, alpha: Alpha, rng: &mut impl Rng) {
        let w = self.raw_weights(alpha);
        let total = self.total_weight(alpha);
        assert!(total > 0.0, "urn selection weight must be positive");
        let x = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut color = 5;
        for (i, wi) in w.iter().enumerate() {
            acc += wi;
            if x < acc {
                color = i;
                break;
            }
        }
        self.apply(color);
    }

    fn apply(&mut self, color: usize) {
        for j in 0..6 {
            let next = self.counts[j] as i64 + REPLACEMENT_MATRIX[color][j];
            assert!(next >= 0, "urn count for colour {} went negative", j + 1);
            self.counts[j] = next as u64;
        }
        self.time += 1;
        debug_assert!(self.invariants_hold());
    }

    /// Structural invariants: `3 + 2t` balls total, `t + 2` pendant and
    /// `t + 1` internal, and the parity forced by `(A, C)`.
    pub fn invariants_hold(&self) -> bool {
        let pendant: u64 = self.counts[..4].iter().sum();
        let internal: u64 = self.counts[4] + self.counts[5];
        pendant == self.time + 2
            && internal == self.time + 1
            && self.counts[0].is_multiple_of(2)
            && (self.counts[0] + self.counts[1]).is_multiple_of(2)
    }
}

/// Probability of drawing each colour: proportional to `(1 - alpha) U_i` for
/// the pendant colours 1..4 and `alpha U_i` for the internal colours 5..6.
pub fn selection_distribution(urn: &UrnState, alpha: Alpha) -> [f64; 6] {
    let mut w = urn.raw_weights(alpha);
    let total = urn.total_weight(alpha);
    for wi in &mut w {
        *wi /= total;
    }
    w
}

/// One urn transition: draw a colour, add its replacement row.
pub fn urn_step(urn: &UrnState, alpha: Alpha, rng: &mut impl Rng) -> UrnState {
    let mut u = *urn;
    u.step(alpha, rng);
    u
}

/// Reads the pitchfork/cherry pair `(U_1 / 2, (U_1 + U_2) / 2)` off the urn;
/// the counts refer to the coupled tree with `time + 2` leaves.
pub fn urn_to_ac(urn: &UrnState) -> PairCounts {
    let u = urn.counts;
    assert!(
        u[0].is_multiple_of(2) && (u[0] + u[1]).is_multiple_of(2),
        "urn parity violated"
    );
    PairCounts {
        pitchforks: u[0] / 2,
        cherries: (u[0] + u[1]) / 2,
    }
}

/// Diagonal transform `T_alpha = diag(1-a, 1-a, 1-a, 1-a, a, a)` sending the
/// nonuniform urn to a uniform one.
pub fn t_alpha(alpha: Alpha) -> [f64; 6] {
    let (a, b) = (alpha.value(), alpha.beta());
    [b, b, b, b, a, a]
}

/// Inverse of the diagonal transform; singular at the endpoints.
pub fn t_alpha_inv(alpha: Alpha) -> Result<[f64; 6], Error> {
    let (a, b) = (alpha.value(), alpha.beta());
    if a == 0.0 || a == 1.0 {
        return Err(Error::EndpointAlpha(a));
    }
    let s = 1.0 / (a * b);
    Ok([a * s, a * s, a * s, a * s, b * s, b * s])
}

/// Replacement matrix of the transformed uniform urn, `R_alpha = R T_alpha`.
/// Balanced with row sum 1 for every alpha.
pub fn r_alpha(alpha: Alpha) -> [[f64; 6]; 6] {
    let t = t_alpha(alpha);
    let mut m = [[0.0; 6]; 6];
    for i in 0..6 {
        for j in 0..6 {
            m[i][j] = REPLACEMENT_MATRIX[i][j] as f64 * t[j];
        }
    }
    m
}

/// Eigenvalues of `R_alpha`: `(1, 0, 0, 0, -2(1-a), -(3-2a))`.
pub fn eigenvalues(alpha: Alpha) -> [f64; 6] {
    let (a, b) = (alpha.value(), alpha.beta());
    [1.0, 0.0, 0.0, 0.0, -2.0 * b, -(3.0 - 2.0 * a)]
}

/// Limiting proportions of the untransformed urn, `U_n / n -> v`
/// (components sum to 2 because two balls arrive per time step).
pub fn limit_v(alpha: Alpha) -> [f64; 6] {
    let (a, b) = (alpha.value(), alpha.beta());
    let f = 1.0 / (2.0 * (3.0 - 2.0 * a));
    [
        2.0 * b * f,
        2.0 * b * f,
        b * f,
        (1.0 + a) * f,
        b * f,
        (5.0 - 3.0 * a) * f,
    ]
}

/// Principal left eigenvector of `R_alpha` (a probability vector); also the
/// limit of the transformed urn proportions.
pub fn limit_v_tilde(alpha: Alpha) -> [f64; 6] {
    let (a, b) = (alpha.value(), alpha.beta());
    let f = 1.0 / (2.0 * (3.0 - 2.0 * a));
    [
        2.0 * b * b * f,
        2.0 * b * b * f,
        b * b * f,
        (1.0 - a * a) * f,
        a * b * f,
        a * (5.0 - 3.0 * a) * f,
    ]
}

/// The six covariance polynomials in alpha (Horner form). For alpha in
/// (0, 1) the first three are negative and the last three positive.
pub fn phi_polynomials(alpha: Alpha) -> [f64; 6] {
    let a = alpha.value();
    [
        -23.0 + a * (45.0 + a * (-32.0 + a * 8.0)),
        -97.0 + a * (221.0 + a * (-164.0 + a * 40.0)),
        -181.0 + a * (367.0 + a * (-248.0 + a * 56.0)),
        13.0 + a * (37.0 + a * (-40.0 + a * 8.0)),
        181.0 + a * (-31.0 + a * (-112.0 + a * 40.0)),
        71.0 + a * (-71.0 + a * (4.0 + a * 8.0)),
    ]
}

// Sign pattern of the phi entries in the closed-form covariance matrices:
// entry (i, j) is sign[i][j] * mult[i][j] * phi[which[i][j] - 1].
const SIGMA_COEF: [[i32; 6]; 6] = [
    [-12, 4, -6, -2, 2, -2],
    [4, -4, 2, -2, -2, 2],
    [-6, 2, -3, -1, 1, -1],
    [-2, -2, -1, 1, -1, 1],
    [2, -2, 1, -1, -1, 1],
    [-2, 2, -1, 1, 1, -1],
];
const SIGMA_WHICH: [[usize; 6]; 6] = [
    [1, 2, 1, 4, 2, 2],
    [2, 3, 2, 6, 3, 3],
    [1, 2, 1, 4, 2, 2],
    [4, 6, 4, 5, 6, 6],
    [2, 3, 2, 6, 3, 3],
    [2, 3, 2, 6, 3, 3],
];

/// Limiting covariance of the untransformed urn (closed form).
pub fn sigma_closed_form(alpha: Alpha) -> [[f64; 6]; 6] {
    let (a, b) = (alpha.value(), alpha.beta());
    let phi = phi_polynomials(alpha);
    let f = b / (4.0 * (3.0 - 2.0 * a).powi(2) * (5.0 - 4.0 * a) * (7.0 - 4.0 * a));
    let mut m = [[0.0; 6]; 6];
    for i in 0..6 {
        for j in 0..6 {
            // + 0.0 folds any negative zero into plain zero.
            m[i][j] = f * SIGMA_COEF[i][j] as f64 * phi[SIGMA_WHICH[i][j] - 1] + 0.0;
        }
    }
    m
}

/// Limiting covariance of the transformed uniform urn: the same entries
/// weighted by `b^2`, `ab` or `a^2` according to the pendant/internal block.
pub fn sigma_tilde_closed_form(alpha: Alpha) -> [[f64; 6]; 6] {
    let (a, b) = (alpha.value(), alpha.beta());
    let t = [b, b, b, b, a, a];
    let mut m = sigma_closed_form(alpha);
    for i in 0..6 {
        for j in 0..6 {
            m[i][j] *= t[i] * t[j];
        }
    }
    m
}

/// Limiting covariance of `((A_n, C_n) - n(nu, mu)) / sqrt(n)`:
/// `S = [[tau^2, rho], [rho, sigma^2]]` in closed form.
pub fn s_closed_form(alpha: Alpha) -> [[f64; 2]; 2] {
    let (a, b) = (alpha.value(), alpha.beta());
    let f = b / ((3.0 - 2.0 * a).powi(2) * (5.0 - 4.0 * a));
    let tau2 = f * (69.0 + a * (-135.0 + a * (96.0 - a * 24.0))) / (4.0 * (7.0 - 4.0 * a)) + 0.0;
    let rho = f * (-(2.0 - a) * (1.0 - 2.0 * a) / 2.0) + 0.0;
    let sigma2 = f * (2.0 - a) + 0.0;
    [[tau2, rho], [rho, sigma2]]
}

/// Limiting per-leaf proportions `(nu, mu)` of pitchforks and cherries.
pub fn nu_mu(alpha: Alpha) -> (f64, f64) {
    let b = alpha.beta();
    let f = b / (2.0 * (3.0 - 2.0 * alpha.value()));
    (f, 2.0 * f)
}

/// Closed-form diagonalization `V R_alpha V^{-1} = Lambda` of the uniform
/// urn's replacement matrix, validated at construction.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub alpha: Alpha,
    /// Rows are left eigenvectors of `R_alpha`; the first row is the
    /// principal probability vector.
    pub v: [[f64; 6]; 6],
    /// Columns are right eigenvectors; the first column is all ones.
    pub v_inv: [[f64; 6]; 6],
    pub lambda: [f64; 6],
}

const EIGEN_TOL: f64 = 1e-10;

/// Builds the closed-form eigensystem for `alpha` strictly inside `(0, 1)`
/// and checks `V V^{-1} = I` and `V R_alpha V^{-1} = Lambda` to 1e-10.
pub fn eigensystem(alpha: Alpha) -> Result<EigenSystem, Error> {
    let a = alpha.value();
    if a == 0.0 || a == 1.0 {
        return Err(Error::EndpointAlpha(a));
    }
    let b = alpha.beta();
    let f = 1.0 / (2.0 * (3.0 - 2.0 * a));
    let scale = |row: [f64; 6]| row.map(|x| x * f);
    let v = [
        scale([
            2.0 * b * b,
            2.0 * b * b,
            b * b,
            (1.0 + a) * b,
            a * b,
            a * (5.0 - 3.0 * a),
        ]),
        scale([
            2.0 * b * (1.0 + a - a * a),
            -2.0 * b * b * b,
            -(2.0 - a) * b * b,
            (2.0 - a) * b * b,
            -a * b * b,
            -a * b * (5.0 - 3.0 * a),
        ]),
        scale([
            2.0 * a * b * b,
            2.0 * a * (2.0 - a) * b,
            a * b * b,
            -a * b * b,
            -a * (3.0 - a) * b,
            -3.0 * a * b * b,
        ]),
        scale([
            2.0 * a * (2.0 - a) * b,
            2.0 * a * b * b,
            a * (2.0 - a) * b,
            -a * (2.0 - a) * b,
            a * a * b,
            -3.0 * a * (2.0 - a) * b,
        ]),
        scale([
            2.0 * (2.0 - a) * b,
            -2.0 * b * b,
            (2.0 - a) * b,
            -(4.0 - a) * b,
            -a * b,
            a * b,
        ]),
        scale([-2.0 * b, 2.0 * b, -b, b, a, -a]),
    ];
    let v_inv = [
        [1.0, 1.0 / b, 0.0, 0.0, 1.0, 1.0 - a],
        [1.0, 0.0, 1.0 / b, 0.0, 1.0, 3.0 - a],
        [1.0, -2.0 / b, 0.0, 3.0 / b, -(2.0 - a) / b, -5.0 + a],
        [1.0, 0.0, 0.0, 1.0 / b, -(2.0 - a) / b, -3.0 + a],
        [1.0, 0.0, -2.0 / a, 1.0 / a, 1.0, 3.0 - a],
        [1.0, 0.0, 0.0, -1.0 / a, 1.0, 1.0 - a],
    ];
    let sys = EigenSystem {
        alpha,
        v,
        v_inv,
        lambda: eigenvalues(alpha),
    };
    let residual = sys.identity_residual().max(sys.diagonalization_residual());
    if residual > EIGEN_TOL {
        return Err(Error::EigenResidual {
            residual,
            tol: EIGEN_TOL,
        });
    }
    Ok(sys)
}

impl EigenSystem {
    /// `max |V V^{-1} - I|`.
    pub fn identity_residual(&self) -> f64 {
        let prod = mat_mul(&self.v, &self.v_inv);
        let mut worst = 0.0f64;
        for i in 0..6 {
            for j in 0..6 {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((prod[i][j] - target).abs());
            }
        }
        worst
    }

    /// `max |V R_alpha V^{-1} - Lambda|`.
    pub fn diagonalization_residual(&self) -> f64 {
        let prod = mat_mul(&mat_mul(&self.v, &r_alpha(self.alpha)), &self.v_inv);
        let mut worst = 0.0f64;
        for i in 0..6 {
            for j in 0..6 {
                let target = if i == j { self.lambda[i] } else { 0.0 };
                worst = worst.max((prod[i][j] - target).abs());
            }
        }
        worst
    }

    /// Covariance of the transformed urn by the spectral sum
    /// `sum_{i,j>=2} l_i l_j (u_i' diag(v1) u_j) / (1 - l_i - l_j) v_i' v_j`.
    pub fn sigma_tilde_spectral(&self) -> [[f64; 6]; 6] {
        let d = limit_v_tilde(self.alpha);
        let mut st = [[0.0; 6]; 6];
        for i in 1..6 {
            for j in 1..6 {
                let (li, lj) = (self.lambda[i], self.lambda[j]);
                if li == 0.0 || lj == 0.0 {
                    continue;
                }
                let weight: f64 = (0..6)
                    .map(|k| self.v_inv[k][i] * d[k] * self.v_inv[k][j])
                    .sum();
                let coef = li * lj * weight / (1.0 - li - lj);
                for r in 0..6 {
                    for c in 0..6 {
                        st[r][c] += coef * self.v[i][r] * self.v[j][c];
                    }
                }
            }
        }
        st
    }

    /// Covariance of the untransformed urn via the spectral route,
    /// `T_alpha^{-1} Sigma~ T_alpha^{-1}`.
    pub fn sigma_spectral(&self) -> Result<[[f64; 6]; 6], Error> {
        let tinv = t_alpha_inv(self.alpha)?;
        let mut m = self.sigma_tilde_spectral();
        for r in 0..6 {
            for c in 0..6 {
                m[r][c] *= tinv[r] * tinv[c];
            }
        }
        Ok(m)
    }
}

fn mat_mul(a: &[[f64; 6]; 6], b: &[[f64; 6]; 6]) -> [[f64; 6]; 6] {
    let mut out = [[0.0; 6]; 6];
    for i in 0..6 {
        for k in 0..6 {
            let aik = a[i][k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..6 {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

/// Entrywise max-norm distance between two 6x6 matrices.
pub fn max_abs_diff_between(a: &[[f64; 6]; 6], b: &[[f64; 6]; 6]) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..6 {
        for j in 0..6 {
            worst = worst.max((a[i][j] - b[i][j]).abs());
        }
    }
    worst
}

fn serialize_row_major_6<S: Serializer>(m: &[[f64; 6]; 6], s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(36))?;
    for row in m {
        for x in row {
            seq.serialize_element(x)?;
        }
    }
    seq.end()
}

fn serialize_row_major_2<S: Serializer>(m: &[[f64; 2]; 2], s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(4))?;
    for row in m {
        for x in row {
            seq.serialize_element(x)?;
        }
    }
    seq.end()
}

/// Every limiting quantity for one alpha. JSON serialization carries
/// `alpha, v, sigma (36 values, row-major), S (4 values), phi (6), nu, mu`.
#[derive(Debug, Clone, Serialize)]
pub struct LimitSummary {
    pub alpha: Alpha,
    /// Limit of `U_n / n`; components sum to 2.
    pub v: [f64; 6],
    /// Limiting covariance of `(U_n - n v) / sqrt(n)`.
    #[serde(serialize_with = "serialize_row_major_6")]
    pub sigma: [[f64; 6]; 6],
    /// Limiting covariance of `((A_n, C_n) - n (nu, mu)) / sqrt(n)`.
    #[serde(rename = "S", serialize_with = "serialize_row_major_2")]
    pub s: [[f64; 2]; 2],
    /// The six covariance polynomials evaluated at alpha.
    pub phi: [f64; 6],
    /// Limiting pitchforks per leaf.
    pub nu: f64,
    /// Limiting cherries per leaf.
    pub mu: f64,
    /// Limit of the transformed urn proportions (a probability vector).
    #[serde(skip)]
    pub v_tilde: [f64; 6],
    /// Limiting covariance of the transformed urn.
    #[serde(skip)]
    pub sigma_tilde: [[f64; 6]; 6],
}

const SIGMA_ROUTE_TOL: f64 = 1e-9;
const S_TRANSFORM_TOL: f64 = 1e-10;

/// Computes every limiting quantity for `alpha`.
///
/// For alpha strictly inside `(0, 1)` the covariance is computed both from
/// the closed form and from the spectral sum mapped back through
/// `T_alpha^{-1}`; disagreement beyond 1e-9 is an error. At the endpoints the
/// transform route degenerates and the closed form alone is used.
pub fn limit_summary(alpha: Alpha) -> Result<LimitSummary, Error> {
    let a = alpha.value();
    let sigma = sigma_closed_form(alpha);
    if a > 0.0 && a < 1.0 {
        let eig = eigensystem(alpha)?;
        let spectral = eig.sigma_spectral()?;
        let diff = max_abs_diff_between(&spectral, &sigma);
        if diff > SIGMA_ROUTE_TOL {
            return Err(Error::CovarianceMismatch(diff));
        }
    }

    let s = s_closed_form(alpha);
    // (A, C) = U Q maps Sigma to S; the closed forms must agree.
    let s_mapped = [
        [sigma[0][0] / 4.0, (sigma[0][0] + sigma[0][1]) / 4.0],
        [
            (sigma[0][0] + sigma[1][0]) / 4.0,
            (sigma[0][0] + sigma[1][0] + sigma[0][1] + sigma[1][1]) / 4.0,
        ],
    ];
    let mut s_diff = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            s_diff = s_diff.max((s[i][j] - s_mapped[i][j]).abs());
        }
    }
    if s_diff > S_TRANSFORM_TOL {
        return Err(Error::CovarianceMismatch(s_diff));
    }

    let (nu, mu) = nu_mu(alpha);
    Ok(LimitSummary {
        alpha,
        v: limit_v(alpha),
        sigma,
        s,
        phi: phi_polynomials(alpha),
        nu,
        mu,
        v_tilde: limit_v_tilde(alpha),
        sigma_tilde: sigma_tilde_closed_form(alpha),
    })
}
