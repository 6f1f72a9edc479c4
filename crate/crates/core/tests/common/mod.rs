//! Shared test support: independent brute-force oracles in exact rational
//! arithmetic. Everything here is deliberately written from scratch (its own
//! shape representation, its own urn transcription) so it cannot share a bug
//! with the library paths it validates.
//
// Each test binary compiles its own view of this module, so not every item
// is used everywhere.
#![allow(dead_code)]

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Unlabelled rooted binary shape; the implicit root edge sits above the
/// outermost node.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Shape {
    Leaf,
    Node(Box<Shape>, Box<Shape>),
}

pub fn rational(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

pub fn leaves(s: &Shape) -> u64 {
    match s {
        Shape::Leaf => 1,
        Shape::Node(l, r) => leaves(l) + leaves(r),
    }
}

/// Canonical nested-parenthesis encoding: larger subtree first, leaf = "".
/// Matches the library's shape serialization rule, so equal strings mean
/// equal shapes across both representations.
pub fn encode(s: &Shape) -> String {
    match s {
        Shape::Leaf => String::new(),
        Shape::Node(l, r) => {
            let (el, er) = (encode(l), encode(r));
            let (kl, kr) = ((leaves(l), el), (leaves(r), er));
            let (big, small) = if kl >= kr { (kl, kr) } else { (kr, kl) };
            format!("({},{})", big.1, small.1)
        }
    }
}

fn canonical(s: &Shape) -> Shape {
    match s {
        Shape::Leaf => Shape::Leaf,
        Shape::Node(l, r) => {
            let (cl, cr) = (canonical(l), canonical(r));
            let (kl, kr) = ((leaves(&cl), encode(&cl)), (leaves(&cr), encode(&cr)));
            if kl >= kr {
                Shape::Node(Box::new(cl), Box::new(cr))
            } else {
                Shape::Node(Box::new(cr), Box::new(cl))
            }
        }
    }
}

/// Every way to insert a leaf: one entry per edge (= per subtree position,
/// including the whole shape, whose edge is the root edge). The flag says
/// whether the subdivided edge was pendant.
fn insertions(s: &Shape) -> Vec<(bool, Shape)> {
    let mut out = Vec::new();
    out.push((
        matches!(s, Shape::Leaf),
        Shape::Node(Box::new(s.clone()), Box::new(Shape::Leaf)),
    ));
    if let Shape::Node(l, r) = s {
        for (pendant, nl) in insertions(l) {
            out.push((pendant, Shape::Node(Box::new(nl), r.clone())));
        }
        for (pendant, nr) in insertions(r) {
            out.push((pendant, Shape::Node(l.clone(), Box::new(nr))));
        }
    }
    out
}

/// Pitchforks and cherries: positions whose fringe has exactly 3 resp. 2
/// leaves (the whole shape is itself a position).
pub fn count_ac(s: &Shape) -> (u64, u64) {
    fn walk(s: &Shape, a: &mut u64, c: &mut u64) -> u64 {
        let n = match s {
            Shape::Leaf => 1,
            Shape::Node(l, r) => walk(l, a, c) + walk(r, a, c),
        };
        if n == 3 {
            *a += 1;
        } else if n == 2 {
            *c += 1;
        }
        n
    }
    let (mut a, mut c) = (0, 0);
    walk(s, &mut a, &mut c);
    (a, c)
}

/// Exact Ford-law distribution over canonical shapes with `n` leaves, by
/// expanding every weighted insertion history level by level.
pub fn shape_distribution(n: u64, alpha: &BigRational) -> BTreeMap<Shape, BigRational> {
    assert!(n >= 2);
    let beta = BigRational::one() - alpha;
    let t2 = Shape::Node(Box::new(Shape::Leaf), Box::new(Shape::Leaf));
    let mut dist: BTreeMap<Shape, BigRational> = BTreeMap::new();
    dist.insert(t2, BigRational::one());
    for m in 2..n {
        let total = BigRational::from(BigInt::from(m)) - alpha;
        let mut next: BTreeMap<Shape, BigRational> = BTreeMap::new();
        for (shape, p) in &dist {
            for (pendant, grown) in insertions(shape) {
                let w = if pendant { beta.clone() } else { alpha.clone() };
                if w.is_zero() {
                    continue;
                }
                let q = p * w / total.clone();
                *next
                    .entry(canonical(&grown))
                    .or_insert_with(BigRational::zero) += q;
            }
        }
        dist = next;
    }
    dist
}

/// Exact joint law of `(pitchforks, cherries)` at `n` leaves.
pub fn joint_distribution(n: u64, alpha: &BigRational) -> BTreeMap<(u64, u64), BigRational> {
    let mut out: BTreeMap<(u64, u64), BigRational> = BTreeMap::new();
    for (shape, p) in shape_distribution(n, alpha) {
        *out.entry(count_ac(&shape))
            .or_insert_with(BigRational::zero) += p;
    }
    out
}

/// Same law as an f64 map, for tolerance comparisons.
pub fn joint_distribution_f64(n: u64, alpha: &BigRational) -> BTreeMap<(u64, u64), f64> {
    joint_distribution(n, alpha)
        .into_iter()
        .map(|(k, v)| (k, v.to_f64().expect("rational fits f64")))
        .collect()
}

// Independent transcription of the urn replacement rows and selection
// weights, used to check the coupling against the tree oracle exactly.
const URN_ROWS: [[i64; 6]; 6] = [
    [0, 0, 0, 1, 0, 1],
    [2, -2, 1, 0, -1, 2],
    [-2, 4, -1, 0, 2, -1],
    [0, 2, 0, -1, 1, 0],
    [2, -2, 1, 0, -1, 2],
    [0, 0, 0, 1, 0, 1],
];

/// Exact distribution of `(A, C)` read off the urn after `steps` draws,
/// enumerating every colour path with its exact probability.
pub fn urn_joint_distribution(
    steps: u64,
    alpha: &BigRational,
) -> BTreeMap<(u64, u64), BigRational> {
    let beta = BigRational::one() - alpha;
    let mut dist: BTreeMap<[i64; 6], BigRational> = BTreeMap::new();
    dist.insert([0, 2, 0, 0, 1, 0], BigRational::one());
    for t in 0..steps {
        let total = BigRational::from(BigInt::from(t + 2)) - alpha;
        let mut next: BTreeMap<[i64; 6], BigRational> = BTreeMap::new();
        for (counts, p) in &dist {
            for color in 0..6 {
                let class = if color < 4 {
                    beta.clone()
                } else {
                    alpha.clone()
                };
                let weight = class * BigRational::from(BigInt::from(counts[color]));
                if weight.is_zero() {
                    continue;
                }
                let mut grown = *counts;
                for j in 0..6 {
                    grown[j] += URN_ROWS[color][j];
                    assert!(grown[j] >= 0, "urn oracle went negative");
                }
                *next.entry(grown).or_insert_with(BigRational::zero) += p * weight / total.clone();
            }
        }
        dist = next;
    }
    let mut out: BTreeMap<(u64, u64), BigRational> = BTreeMap::new();
    for (counts, p) in dist {
        assert!(counts[0] % 2 == 0 && (counts[0] + counts[1]) % 2 == 0);
        let key = ((counts[0] / 2) as u64, ((counts[0] + counts[1]) / 2) as u64);
        *out.entry(key).or_insert_with(BigRational::zero) += p;
    }
    out
}

/// The joint-pmf level recursion in exact rationals (same recursion as the
/// library's f64 dynamic program; used to bound float drift, not to replace
/// the insertion-history oracle).
pub fn dp_joint_rational(n: u64, alpha: &BigRational) -> BTreeMap<(u64, u64), BigRational> {
    assert!(n >= 3);
    let one = BigRational::one;
    let mut cur: BTreeMap<(u64, u64), BigRational> = BTreeMap::new();
    cur.insert((1, 1), one());
    let beta = BigRational::one() - alpha;
    let two_minus = BigRational::from(BigInt::from(2)) - alpha;
    for m in 3..n {
        let mf = BigRational::from(BigInt::from(m));
        let denom = mf.clone() - alpha;
        let mut next: BTreeMap<(u64, u64), BigRational> = BTreeMap::new();
        let mut add = |key: (u64, u64), val: BigRational| {
            if !val.is_zero() {
                *next.entry(key).or_insert_with(BigRational::zero) += val;
            }
        };
        for ((a, c), p) in &cur {
            let (af, cf) = (BigInt::from(*a), BigInt::from(*c));
            // Outgoing mass, grouped by destination edge class.
            let stay = BigRational::from(af.clone() * 2)
                + alpha * (mf.clone() - BigRational::from(af.clone() + cf.clone() + BigInt::one()));
            add((*a, *c), p * stay / denom.clone());
            if *a >= 1 {
                add(
                    (*a - 1, *c + 1),
                    p * beta.clone() * BigRational::from(af.clone()) / denom.clone(),
                );
            }
            add(
                (*a + 1, *c),
                p * two_minus.clone() * BigRational::from(cf.clone() - af.clone()) / denom.clone(),
            );
            add(
                (*a, *c + 1),
                p * beta.clone() * (mf.clone() - BigRational::from(af + cf * 2)) / denom.clone(),
            );
        }
        next.retain(|_, v| !v.is_zero() && !v.is_negative());
        cur = next;
    }
    cur
}
