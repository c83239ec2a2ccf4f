//! Instance families shared by the integration targets.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use srng_lab::fdivergence::Curve;
use srng_lab::probability::SourceModel;

pub fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Uniform over 4 letters, Bern(p) for p in {1/10, 1/4, 2/5} and n = 1..=8,
/// and two binary mixtures.
pub fn sources() -> Vec<(String, SourceModel)> {
    let mut out = Vec::new();
    for n in 1..=3 {
        out.push((format!("uniform4 n={n}"), SourceModel::iid(vec![q(1, 4); 4], n).unwrap()));
    }
    for (num, den) in [(1, 10), (1, 4), (2, 5)] {
        for n in 1..=8 {
            out.push((format!("bern({num}/{den}) n={n}"), SourceModel::bernoulli(q(num, den), n).unwrap()));
        }
    }
    for n in [3, 6] {
        out.push((
            format!("mix(1/2 bern(1/10), 1/2 bern(1/2)) n={n}"),
            SourceModel::mixture(vec![(q(1, 2), vec![q(9, 10), q(1, 10)]), (q(1, 2), vec![q(1, 2), q(1, 2)])], n)
                .unwrap(),
        ));
        out.push((
            format!("mix(1/3 bern(1/5), 2/3 bern(3/5)) n={n}"),
            SourceModel::mixture(vec![(q(1, 3), vec![q(4, 5), q(1, 5)]), (q(2, 3), vec![q(2, 5), q(3, 5)])], n)
                .unwrap(),
        ));
    }
    out
}

/// Variational, reverse KL, Hellinger and E_γ for γ in {1, 2, 5}.
pub fn sandwich_curves() -> Vec<Curve> {
    vec![
        Curve::Variational,
        Curve::ReverseKl,
        Curve::Hellinger,
        Curve::e_gamma(q(1, 1)).unwrap(),
        Curve::e_gamma(q(2, 1)).unwrap(),
        Curve::e_gamma(q(5, 1)).unwrap(),
    ]
}

pub const GAMMAS: [f64; 3] = [0.02, 0.1, 0.5];

/// Every size up to 16, then a doubling ladder with halfway points, always
/// ending at the support size.
pub fn codebook_ladder(support: usize) -> Vec<u64> {
    let support = support as u64;
    let mut sizes: Vec<u64> = (1..=support.min(16)).collect();
    let mut m = 16;
    while m < support {
        let mid = m + m / 2;
        m *= 2;
        for s in [mid, m] {
            if s < support {
                sizes.push(s);
            }
        }
    }
    if support > 16 {
        sizes.push(support);
    }
    sizes
}

/// Positive integer weight patterns of length 2..=14, normalized exactly.
pub fn weight_pmfs() -> Vec<Vec<BigRational>> {
    let mut out = Vec::new();
    for len in 2..=14i64 {
        for shift in 0..3i64 {
            let weights: Vec<i64> = (0..len).map(|k| (k * k + 3 * k + shift) % 7 + 1).collect();
            let total: i64 = weights.iter().sum();
            out.push(weights.iter().map(|&w| q(w, total)).collect());
        }
        out.push(vec![q(1, len); len as usize]);
    }
    out
}
