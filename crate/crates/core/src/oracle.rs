//! Exhaustive ground truth on tiny instances.
//!
//! Any `ψ ∘ φ` with `M` codewords aggregates the support into at most `M`
//! blocks and puts each block's mass on one representative, so the minimum
//! divergence over mapping pairs is a minimum over partitions (enumerated as
//! restricted-growth strings) and injective representative choices.

use rayon::prelude::*;
use serde::Serialize;

use crate::construction::MappingPair;
use crate::error::{Error, Result};
use crate::fdivergence::Curve;
use crate::mass::{reaches, Mass};
use crate::probability::AtomicDistribution;

pub const MAX_PARTITION_ATOMS: usize = 10;
pub const MAX_PARTITION_BLOCKS: usize = 4;
pub const MAX_SUBSET_ATOMS: usize = 14;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PartitionPlan {
    /// Disjoint blocks of support atoms covering the support.
    pub blocks: Vec<Vec<usize>>,
    /// `representatives[j]` receives the mass of `blocks[j]`.
    pub representatives: Vec<usize>,
}

impl PartitionPlan {
    /// The canonical mapping pair of the plan; atoms outside every block
    /// (zero mass) are encoded to codeword 0.
    pub fn to_mapping(&self, outcomes: usize, codebook_size: u64) -> Result<MappingPair> {
        let mut phi = vec![0; outcomes];
        for (j, block) in self.blocks.iter().enumerate() {
            for &x in block {
                phi[x] = j;
            }
        }
        MappingPair::new(phi, self.representatives.clone(), codebook_size)
    }
}

/// Where representatives may be placed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Candidates {
    Support,
    /// Every outcome, including zero-mass ones.
    AllOutcomes,
}

/// All restricted-growth strings of length `len` with at most `max_blocks`
/// distinct values, in lexicographic order.
pub fn restricted_growth_strings(len: usize, max_blocks: usize) -> Vec<Vec<usize>> {
    fn walk(prefix: &mut Vec<usize>, used: usize, len: usize, max_blocks: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == len {
            out.push(prefix.clone());
            return;
        }
        let top = if prefix.is_empty() { 1 } else { (used + 1).min(max_blocks) };
        for v in 0..top {
            prefix.push(v);
            walk(prefix, used.max(v + 1), len, max_blocks, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if len == 0 || max_blocks == 0 {
        return out;
    }
    walk(&mut Vec::with_capacity(len), 0, len, max_blocks, &mut out);
    out
}

struct Best {
    value: f64,
    partition: usize,
    representatives: Vec<usize>,
}

fn better(a: &Best, b: &Best) -> bool {
    a.value.total_cmp(&b.value).then(a.partition.cmp(&b.partition)).is_lt()
}

/// Enumerates ordered choices of `k` distinct candidates, lexicographically.
fn for_each_injection(k: usize, n: usize, visit: &mut impl FnMut(&[usize])) {
    fn go(chosen: &mut Vec<usize>, used: &mut [bool], k: usize, visit: &mut impl FnMut(&[usize])) {
        if chosen.len() == k {
            visit(chosen);
            return;
        }
        for c in 0..used.len() {
            if !used[c] {
                used[c] = true;
                chosen.push(c);
                go(chosen, used, k, visit);
                chosen.pop();
                used[c] = false;
            }
        }
    }
    if k <= n {
        go(&mut Vec::with_capacity(k), &mut vec![false; n], k, visit);
    }
}

/// Minimum of `D_f(P || Q)` over every mapping pair with `codebook_size`
/// codewords, with an optimal plan.
pub fn min_fdiv_bruteforce<M: Mass>(
    dist: &AtomicDistribution<M>,
    codebook_size: usize,
    curve: &Curve,
    candidates: Candidates,
) -> Result<(f64, PartitionPlan)> {
    let support = dist.support();
    let n_atoms = support.len();
    if codebook_size == 0 {
        return Err(Error::OutOfRange { what: "codebook size".into(), value: 0.0 });
    }
    if n_atoms > MAX_PARTITION_ATOMS {
        return Err(Error::CapExceeded { atoms: n_atoms as u128, cap: MAX_PARTITION_ATOMS as u128 });
    }
    let pool: Vec<usize> = match candidates {
        Candidates::Support => support.clone(),
        Candidates::AllOutcomes => (0..dist.len()).collect(),
    };
    if pool.len() > MAX_PARTITION_ATOMS {
        return Err(Error::CapExceeded { atoms: pool.len() as u128, cap: MAX_PARTITION_ATOMS as u128 });
    }
    let max_blocks = codebook_size.min(n_atoms);
    if codebook_size < n_atoms && codebook_size > MAX_PARTITION_BLOCKS {
        return Err(Error::CapExceeded { atoms: codebook_size as u128, cap: MAX_PARTITION_BLOCKS as u128 });
    }
    let p: Vec<f64> = pool.iter().map(|&x| dist.mass(x).to_f64()).collect();
    let slope = curve.slope_at_infinity();
    let partitions = restricted_growth_strings(n_atoms, max_blocks);

    let best = partitions
        .par_iter()
        .enumerate()
        .map(|(index, rgs)| {
            let k = rgs.iter().max().map_or(0, |&v| v + 1);
            let mut block_mass = vec![M::zero(); k];
            for (pos, &b) in rgs.iter().enumerate() {
                block_mass[b] = block_mass[b].add(dist.mass(support[pos]));
            }
            let q: Vec<f64> = block_mass.iter().map(Mass::to_f64).collect();
            let cost: Vec<Vec<f64>> =
                q.iter().map(|&qj| p.iter().map(|&py| qj * curve.eval(py / qj)).collect()).collect();
            let mut local = Best { value: f64::INFINITY, partition: index, representatives: Vec::new() };
            let mut first = true;
            for_each_injection(k, pool.len(), &mut |reps| {
                let mut value: f64 = reps.iter().enumerate().map(|(j, &c)| cost[j][c]).sum();
                if slope != 0.0 {
                    for (c, &py) in p.iter().enumerate() {
                        if py > 0.0 && !reps.contains(&c) {
                            value += py * slope;
                        }
                    }
                }
                if first || value < local.value {
                    first = false;
                    local.value = value;
                    local.representatives = reps.to_vec();
                }
            });
            local
        })
        .reduce_with(|a, b| if better(&b, &a) { b } else { a })
        .expect("at least one partition");

    let rgs = &partitions[best.partition];
    let k = best.representatives.len();
    let mut blocks = vec![Vec::new(); k];
    for (pos, &b) in rgs.iter().enumerate() {
        blocks[b].push(support[pos]);
    }
    let plan = PartitionPlan { blocks, representatives: best.representatives.iter().map(|&c| pool[c]).collect() };
    Ok((best.value, plan))
}

/// `min |A|` over subsets of the support with `Pr{A} >= 1 - δ`, by
/// enumeration, with the same tie rule as the greedy.
pub fn min_set_bruteforce<M: Mass>(dist: &AtomicDistribution<M>, delta: f64) -> Result<usize> {
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::OutOfRange { what: "delta".into(), value: delta });
    }
    let support = dist.support();
    if support.len() > MAX_SUBSET_ATOMS {
        return Err(Error::CapExceeded { atoms: support.len() as u128, cap: MAX_SUBSET_ATOMS as u128 });
    }
    let target = 1.0 - delta;
    let best = (0u32..1 << support.len())
        .into_par_iter()
        .filter_map(|mask| {
            let mass =
                M::sum(support.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &x)| dist.mass(x)));
            reaches(mass.to_f64(), target).then_some(mask.count_ones() as usize)
        })
        .min();
    Ok(best.unwrap_or(support.len()))
}

/// FNV-1a over the printed masses, for fixture files.
pub fn instance_hash<M: Mass>(dist: &AtomicDistribution<M>) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for m in dist.masses() {
        for byte in m.to_string().bytes().chain(std::iter::once(b';')) {
            h ^= u64::from(byte);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    format!("{h:016x}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::apply_mapping;
    use crate::fdivergence::divergence;
    use num_bigint::BigInt;
    use num_rational::BigRational;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn four() -> AtomicDistribution<BigRational> {
        AtomicDistribution::from_masses(vec![q(4, 10), q(3, 10), q(2, 10), q(1, 10)]).unwrap()
    }

    #[test]
    fn rgs_counts_are_bell_like() {
        // S(4,1)+S(4,2) = 1 + 7
        assert_eq!(restricted_growth_strings(4, 2).len(), 8);
        // Bell(5) = 52
        assert_eq!(restricted_growth_strings(5, 5).len(), 52);
        assert_eq!(restricted_growth_strings(3, 3)[1], vec![0, 0, 1]);
    }

    #[test]
    fn large_codebook_gives_zero() {
        let (v, plan) = min_fdiv_bruteforce(&four(), 4, &Curve::Hellinger, Candidates::Support).unwrap();
        assert!(v.abs() < 1e-15);
        assert_eq!(plan.blocks.len(), 4);
    }

    #[test]
    fn two_atoms_one_codeword_hellinger() {
        let d = AtomicDistribution::from_masses(vec![q(1, 2), q(1, 2)]).unwrap();
        let (v, plan) = min_fdiv_bruteforce(&d, 1, &Curve::Hellinger, Candidates::Support).unwrap();
        assert!((v - (1.0 - 0.5f64.sqrt())).abs() < 1e-15);
        assert_eq!(plan.representatives, vec![0]);
    }

    #[test]
    fn four_atoms_two_codewords_variational() {
        // best two-block plan keeps the mass on the two heaviest atoms:
        // Q = (0.4 + a, 0.3 + b) with a + b = 0.3, D = 0.3
        let (v, plan) = min_fdiv_bruteforce(&four(), 2, &Curve::Variational, Candidates::Support).unwrap();
        assert!((v - 0.3).abs() < 1e-15);
        let mapping = plan.to_mapping(4, 2).unwrap();
        let out = apply_mapping(&mapping, &four()).unwrap();
        assert!((divergence(&Curve::Variational, &four(), &out).unwrap() - v).abs() < 1e-15);
    }

    #[test]
    fn off_support_representatives_never_help() {
        let d = AtomicDistribution::from_masses(vec![q(1, 2), q(0, 1), q(1, 3), q(1, 6), q(0, 1)]).unwrap();
        for c in Curve::admissible_builtins() {
            for m in 1..=3 {
                let (a, _) = min_fdiv_bruteforce(&d, m, &c, Candidates::Support).unwrap();
                let (b, _) = min_fdiv_bruteforce(&d, m, &c, Candidates::AllOutcomes).unwrap();
                assert_eq!(a, b, "{c} M={m}");
            }
        }
    }

    #[test]
    fn caps_are_enforced() {
        let d = AtomicDistribution::from_masses(vec![q(1, 11); 11]).unwrap();
        assert!(matches!(
            min_fdiv_bruteforce(&d, 2, &Curve::Variational, Candidates::Support),
            Err(Error::CapExceeded { .. })
        ));
        let d = AtomicDistribution::from_masses(vec![q(1, 15); 15]).unwrap();
        assert!(matches!(min_set_bruteforce(&d, 0.1), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn min_set_examples() {
        let u = AtomicDistribution::from_masses(vec![q(1, 4); 4]).unwrap();
        assert_eq!(min_set_bruteforce(&u, 0.25).unwrap(), 3);
        assert_eq!(min_set_bruteforce(&four(), 0.35).unwrap(), 2);
        assert_eq!(min_set_bruteforce(&four(), 0.0).unwrap(), 4);
    }

    #[test]
    fn hash_is_stable() {
        assert_eq!(instance_hash(&four()), instance_hash(&four()));
        assert_ne!(instance_hash(&four()), instance_hash(&four().to_float()));
    }
}
