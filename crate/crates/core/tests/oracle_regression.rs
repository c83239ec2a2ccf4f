//! Frozen brute-force minima, computed independently by enumerating every
//! self-map of the support with at most `M` image points.

mod common;

use srng_lab::fdivergence::Curve;
use srng_lab::oracle::{min_fdiv_bruteforce, Candidates};
use srng_lab::probability::AtomicDistribution;

#[test]
fn minima_match_frozen_values() {
    let text = include_str!("fixtures/oracle_minima.csv");
    let mut rows = 0;
    for line in text.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        let weights: Vec<i64> = fields[0].split_whitespace().map(|w| w.parse().unwrap()).collect();
        let total: i64 = weights.iter().sum();
        let dist = AtomicDistribution::from_masses(weights.iter().map(|&w| common::q(w, total)).collect()).unwrap();
        let m: usize = fields[1].parse().unwrap();
        let curve = Curve::parse(fields[2]).unwrap();
        let expected: f64 = fields[3].parse().unwrap();
        let (value, _) = min_fdiv_bruteforce(&dist, m, &curve, Candidates::Support).unwrap();
        assert!((value - expected).abs() <= 1e-12, "{line}: got {value}");
        rows += 1;
    }
    assert_eq!(rows, 140);
}
