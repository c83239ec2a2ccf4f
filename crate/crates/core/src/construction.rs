//! Deterministic encoder/decoder pairs `(φ, ψ)` that approximate a source by
//! a function of itself, and the finite-n bounds on their f-divergence.
//!
//! Both constructions share one shape. A set of *anchor* atoms keeps its own
//! codeword and additionally absorbs low-probability atoms, up to the anchor's
//! mass under the distribution conditioned on the anchor set; a set of *kept*
//! atoms keeps its own codeword and absorbs nothing; every remaining atom is
//! *absorbed* by some anchor.
//!
//! * [`build_threshold_mapping`]: anchors are atoms with
//!   `P(x) >= e^{nγ}/M`, kept atoms have `1/M <= P(x) < e^{nγ}/M`.
//! * [`build_smooth_set_mapping`]: anchors are the smallest high-probability
//!   set with mass `>= f^{-1}(Δ)`, kept atoms fill the top `M` outcomes.
//!
//! Codeword indices are 0-based.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fdivergence::Curve;
use crate::mass::Mass;
use crate::probability::AtomicDistribution;
use crate::spectrum::{smooth_max_entropy, SpectrumSummary};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MappingPair {
    /// Outcome id → codeword index.
    phi: Vec<usize>,
    /// Codeword index → outcome id. Indices at or beyond `psi.len()` are
    /// never produced by `phi` and decode to `psi[0]`.
    psi: Vec<usize>,
    codebook_size: u64,
}

impl MappingPair {
    pub fn new(phi: Vec<usize>, psi: Vec<usize>, codebook_size: u64) -> Result<Self> {
        if psi.is_empty() || psi.len() as u64 > codebook_size {
            return Err(Error::InvalidDistribution(format!(
                "decoder lists {} codewords for a codebook of {codebook_size}",
                psi.len()
            )));
        }
        if let Some(&bad) = phi.iter().find(|&&i| i >= psi.len()) {
            return Err(Error::InvalidDistribution(format!("encoder emits unused codeword {bad}")));
        }
        if let Some(&bad) = psi.iter().find(|&&x| x >= phi.len()) {
            return Err(Error::DimensionMismatch(bad, phi.len()));
        }
        Ok(MappingPair { phi, psi, codebook_size })
    }

    pub fn identity(outcomes: usize) -> Self {
        MappingPair { phi: (0..outcomes).collect(), psi: (0..outcomes).collect(), codebook_size: outcomes as u64 }
    }

    pub fn phi(&self) -> &[usize] {
        &self.phi
    }

    pub fn psi(&self) -> &[usize] {
        &self.psi
    }

    pub fn codebook_size(&self) -> u64 {
        self.codebook_size
    }

    pub fn decode(&self, index: usize) -> usize {
        self.psi.get(index).copied().unwrap_or(self.psi[0])
    }

    /// `ψ(φ(x))`.
    pub fn reconstruct(&self, outcome: usize) -> usize {
        self.decode(self.phi[outcome])
    }
}

/// Pushforward of `dist` through `ψ ∘ φ`.
pub fn apply_mapping<M: Mass>(mapping: &MappingPair, dist: &AtomicDistribution<M>) -> Result<AtomicDistribution<M>> {
    if mapping.phi.len() != dist.len() {
        return Err(Error::DimensionMismatch(mapping.phi.len(), dist.len()));
    }
    let mut masses = vec![M::zero(); dist.len()];
    for (x, m) in dist.masses().iter().enumerate() {
        if m.is_zero() {
            continue;
        }
        let y = mapping.reconstruct(x);
        masses[y] = masses[y].add(m);
    }
    Ok(AtomicDistribution::from_parts(masses, dist.n(), dist.alphabet_size()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstructionKind {
    Threshold,
    SmoothSet,
    /// Anchors only; everything else goes to codeword 0.
    Baseline,
}

/// One greedy allocation step, masses printed in the run's arithmetic.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AllocationStep {
    pub representative: usize,
    /// Mass of the representative under the anchor-conditioned distribution.
    pub target: String,
    /// `P(x_i) + Σ_{A(i)} P` after the step.
    pub filled: String,
    pub target_f64: f64,
    pub filled_f64: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstructionTrace {
    pub kind: ConstructionKind,
    pub n: usize,
    pub codebook_size: u64,
    pub gamma: f64,
    /// Anchor atoms, descending probability.
    pub anchors: Vec<usize>,
    /// Atoms reproduced exactly that absorb nothing.
    pub kept: Vec<usize>,
    /// Atoms sent to some anchor's codeword.
    pub absorbed: Vec<usize>,
    /// `representatives[i]` is decoded from codeword `i`.
    pub representatives: Vec<usize>,
    /// `allocations[i]` lists the absorbed atoms encoded to codeword `i`.
    pub allocations: Vec<Vec<usize>>,
    /// 1-based index of the anchor that took the remainder (0 when there are
    /// no anchors).
    pub stop_index: usize,
    pub steps: Vec<AllocationStep>,
    /// Probability of the anchor set.
    pub anchor_mass: f64,
    pub degenerate: Option<String>,
    /// The codebook covers the whole support; the identity was returned.
    pub saturated: bool,
}

impl ConstructionTrace {
    fn empty(kind: ConstructionKind, n: usize, codebook_size: u64, gamma: f64) -> Self {
        ConstructionTrace {
            kind,
            n,
            codebook_size,
            gamma,
            anchors: Vec::new(),
            kept: Vec::new(),
            absorbed: Vec::new(),
            representatives: Vec::new(),
            allocations: Vec::new(),
            stop_index: 0,
            steps: Vec::new(),
            anchor_mass: 0.0,
            degenerate: None,
            saturated: false,
        }
    }
}

/// `ln P(x) >= nγ − ln M`, i.e. `(1/n) log 1/P(x) <= (1/n) log M − γ`.
pub fn anchor_ln_threshold(n: usize, codebook_size: u64, gamma: f64) -> f64 {
    n as f64 * gamma - (codebook_size as f64).ln()
}

/// `ln P(x) >= −ln M − nγ`, the high-probability set of the converse bound.
pub fn converse_ln_threshold(n: usize, codebook_size: u64, gamma: f64) -> f64 {
    -(codebook_size as f64).ln() - n as f64 * gamma
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma.is_finite() {
        Ok(())
    } else {
        Err(Error::OutOfRange { what: "gamma (needs > 0)".into(), value: gamma })
    }
}

fn check_codebook(codebook_size: u64) -> Result<()> {
    if codebook_size >= 1 {
        Ok(())
    } else {
        Err(Error::OutOfRange { what: "codebook size".into(), value: 0.0 })
    }
}

struct Allocation {
    sets: Vec<Vec<usize>>,
    stop_index: usize,
    steps: Vec<AllocationStep>,
}

/// Greedy first-fit in descending order: anchor `i` takes every remaining
/// atom that keeps `P(x_i) + Σ A(i) <= target_i`, which leaves the set
/// maximal. The first anchor after which nothing remains is the stop index;
/// if atoms are still left after the last anchor, that anchor takes them.
fn allocate<M: Mass>(dist: &AtomicDistribution<M>, anchors: &[usize], targets: &[M], pool: &[usize]) -> Allocation {
    let mut remaining: Vec<usize> = pool.to_vec();
    let mut sets = vec![Vec::new(); anchors.len()];
    let mut steps = Vec::new();
    let mut stop_index = 1;
    for (i, (&x, target)) in anchors.iter().zip(targets).enumerate() {
        let mut filled = dist.mass(x).clone();
        let mut rest = Vec::with_capacity(remaining.len());
        for &y in &remaining {
            let candidate = filled.add(dist.mass(y));
            if candidate.cmp_mass(target).is_le() {
                filled = candidate;
                sets[i].push(y);
            } else {
                rest.push(y);
            }
        }
        remaining = rest;
        let last = i + 1 == anchors.len();
        if last && !remaining.is_empty() {
            for &y in &remaining {
                filled = filled.add(dist.mass(y));
            }
            sets[i].append(&mut remaining);
        }
        steps.push(AllocationStep {
            representative: x,
            target: target.to_string(),
            filled: filled.to_string(),
            target_f64: target.to_f64(),
            filled_f64: filled.to_f64(),
        });
        if remaining.is_empty() {
            stop_index = i + 1;
            break;
        }
    }
    Allocation { sets, stop_index, steps }
}

fn assemble<M: Mass>(
    dist: &AtomicDistribution<M>,
    mut trace: ConstructionTrace,
    conditioned_on: &M,
) -> Result<(MappingPair, ConstructionTrace)> {
    let targets: Vec<M> = trace.anchors.iter().map(|&x| dist.mass(x).div(conditioned_on)).collect();
    let allocation = allocate(dist, &trace.anchors, &targets, &trace.absorbed);
    let mut representatives = trace.anchors.clone();
    representatives.extend_from_slice(&trace.kept);
    let mut phi = vec![usize::MAX; dist.len()];
    for (i, &x) in representatives.iter().enumerate() {
        phi[x] = i;
    }
    let mut allocations = allocation.sets;
    allocations.resize(representatives.len(), Vec::new());
    for (i, set) in allocations.iter().enumerate() {
        for &y in set {
            phi[y] = i;
        }
    }
    debug_assert!(phi.iter().all(|&i| i != usize::MAX));
    trace.representatives = representatives.clone();
    trace.allocations = allocations;
    trace.stop_index = allocation.stop_index;
    trace.steps = allocation.steps;
    trace.anchor_mass = conditioned_on.to_f64();
    let mapping = MappingPair::new(phi, representatives, trace.codebook_size)?;
    Ok((mapping, trace))
}

/// Sends every outcome to one representative codeword.
fn collapse<M: Mass>(
    dist: &AtomicDistribution<M>,
    mut trace: ConstructionTrace,
    representative: usize,
    note: &str,
) -> Result<(MappingPair, ConstructionTrace)> {
    let mapping = MappingPair::new(vec![0; dist.len()], vec![representative], trace.codebook_size)?;
    trace.representatives = vec![representative];
    trace.allocations = vec![(0..dist.len()).filter(|&x| x != representative).collect()];
    trace.degenerate = Some(note.to_string());
    Ok((mapping, trace))
}

/// Splits the outcomes into anchors (`P >= e^{nγ}/M`), kept atoms
/// (`1/M <= P < e^{nγ}/M`) and absorbed atoms (`P < 1/M`), then balances
/// absorbed atoms onto anchors.
///
/// Guarantees `|anchors| <= M e^{-nγ}` and `|anchors| + |kept| <= M`. When
/// there are no anchors, absorbed atoms go to the most probable kept atom,
/// or to the mode when nothing is kept either; `degenerate` records which.
pub fn build_threshold_mapping<M: Mass>(
    dist: &AtomicDistribution<M>,
    codebook_size: u64,
    gamma: f64,
) -> Result<(MappingPair, ConstructionTrace)> {
    check_codebook(codebook_size)?;
    check_gamma(gamma)?;
    let mut trace = ConstructionTrace::empty(ConstructionKind::Threshold, dist.n(), codebook_size, gamma);
    let ln_threshold = anchor_ln_threshold(dist.n(), codebook_size, gamma);
    let m = M::from_count(codebook_size);
    for x in dist.sort_descending() {
        let p = dist.mass(x);
        let reaches_codebook = !p.is_zero() && p.mul(&m).cmp_mass(&M::one()).is_ge();
        if reaches_codebook && p.ln() >= ln_threshold {
            trace.anchors.push(x);
        } else if reaches_codebook {
            trace.kept.push(x);
        } else {
            trace.absorbed.push(x);
        }
    }
    if trace.anchors.is_empty() {
        return match trace.kept.first() {
            Some(_) => {
                let mut trace = trace;
                let absorbed = std::mem::take(&mut trace.absorbed);
                let kept = trace.kept.clone();
                let mut phi = vec![0; dist.len()];
                for (i, &x) in kept.iter().enumerate() {
                    phi[x] = i;
                }
                let mut allocations = vec![Vec::new(); kept.len()];
                allocations[0] = absorbed.clone();
                trace.absorbed = absorbed;
                trace.representatives = kept.clone();
                trace.allocations = allocations;
                trace.degenerate = Some("no anchors: absorbed atoms go to the most probable kept atom".into());
                Ok((MappingPair::new(phi, kept, codebook_size)?, trace))
            }
            None => {
                let mode = dist.sort_descending()[0];
                collapse(dist, trace, mode, "no anchors or kept atoms: everything goes to the mode")
            }
        };
    }
    let anchor_mass = M::sum(trace.anchors.iter().map(|&x| dist.mass(x)));
    assemble(dist, trace, &anchor_mass)
}

/// Smallest high-probability set with mass `>= f^{-1}(Δ)` as anchors, the
/// next atoms up to `M = ⌈|B| e^{nγ}⌉` kept, the rest absorbed.
///
/// When `M` reaches the support size the identity on the support is
/// returned with `saturated` set.
pub fn build_smooth_set_mapping<M: Mass>(
    dist: &AtomicDistribution<M>,
    curve: &Curve,
    delta: f64,
    gamma: f64,
) -> Result<(MappingPair, ConstructionTrace)> {
    check_gamma(gamma)?;
    let level = curve.inverse(delta)?;
    let smooth = smooth_max_entropy(dist, (1.0 - level).max(0.0))?;
    let raw = smooth.set.len() as f64 * (dist.n() as f64 * gamma).exp();
    let codebook_size = if raw >= u64::MAX as f64 { u64::MAX } else { raw.ceil() as u64 };
    let mut trace = ConstructionTrace::empty(ConstructionKind::SmoothSet, dist.n(), codebook_size, gamma);
    let order = dist.sort_descending();
    let support = dist.support_size();
    if codebook_size >= support as u64 {
        let mut phi = vec![0; dist.len()];
        let psi: Vec<usize> = order[..support].to_vec();
        for (i, &x) in psi.iter().enumerate() {
            phi[x] = i;
        }
        trace.kept = psi.clone();
        trace.absorbed = order[support..].to_vec();
        trace.representatives = psi.clone();
        trace.allocations = vec![Vec::new(); psi.len()];
        if let Some(first) = trace.allocations.first_mut() {
            *first = trace.absorbed.clone();
        }
        trace.anchors = smooth.set;
        trace.saturated = true;
        return Ok((MappingPair::new(phi, psi, codebook_size)?, trace));
    }
    let top = codebook_size as usize;
    trace.anchors = smooth.set.clone();
    trace.kept = order[smooth.set.len()..top].to_vec();
    trace.absorbed = order[top..].to_vec();
    let anchor_mass = M::sum(trace.anchors.iter().map(|&x| dist.mass(x)));
    assemble(dist, trace, &anchor_mass)
}

/// Anchors keep their codewords and every other atom is sent to codeword 0.
/// Kept only as a comparison point for [`build_threshold_mapping`].
pub fn build_baseline_mapping<M: Mass>(
    dist: &AtomicDistribution<M>,
    codebook_size: u64,
    gamma: f64,
) -> Result<(MappingPair, ConstructionTrace)> {
    check_codebook(codebook_size)?;
    check_gamma(gamma)?;
    let mut trace = ConstructionTrace::empty(ConstructionKind::Baseline, dist.n(), codebook_size, gamma);
    let ln_threshold = anchor_ln_threshold(dist.n(), codebook_size, gamma);
    let m = M::from_count(codebook_size);
    for x in dist.sort_descending() {
        let p = dist.mass(x);
        let anchor = !p.is_zero() && p.mul(&m).cmp_mass(&M::one()).is_ge() && p.ln() >= ln_threshold;
        if anchor {
            trace.anchors.push(x);
        } else {
            trace.absorbed.push(x);
        }
    }
    if trace.anchors.is_empty() {
        let mode = dist.sort_descending()[0];
        return collapse(dist, trace, mode, "no anchors: everything goes to the mode");
    }
    let mut phi = vec![0; dist.len()];
    for (i, &x) in trace.anchors.iter().enumerate() {
        phi[x] = i;
    }
    trace.representatives = trace.anchors.clone();
    trace.allocations = vec![Vec::new(); trace.anchors.len()];
    trace.allocations[0] = trace.absorbed.clone();
    trace.stop_index = 1;
    trace.anchor_mass = M::sum(trace.anchors.iter().map(|&x| dist.mass(x))).to_f64();
    Ok((MappingPair::new(phi, trace.anchors.clone(), codebook_size)?, trace))
}

/// A bound value plus whether the curve argument had to be clamped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bound {
    pub value: f64,
    pub clamped: bool,
}

/// `f(F − e^{−nγ}) + e^{−nγ} f(1/M)` with `F` the mass of atoms with
/// `(1/n) log 1/P <= (1/n) log M − γ`. A nonpositive argument is clamped to
/// `f(0)` (possibly `+∞`).
pub fn achievability_bound(spec: &SpectrumSummary, curve: &Curve, codebook_size: u64, gamma: f64) -> Result<Bound> {
    check_codebook(codebook_size)?;
    check_gamma(gamma)?;
    let slack = (-(spec.n as f64) * gamma).exp();
    let anchor_mass = spec.mass_with_ln_prob_at_least(anchor_ln_threshold(spec.n, codebook_size, gamma));
    let argument = anchor_mass - slack;
    let (head, clamped) = if argument > 0.0 { (curve.eval(argument), false) } else { (curve.f_at_zero(), true) };
    let tail = slack * curve.eval(1.0 / codebook_size as f64);
    Ok(Bound { value: head + tail, clamped })
}

/// `f(F + e^{−nγ})` with `F` the mass of atoms with
/// `(1/n) log 1/P <= (1/n) log M + γ`; valid for every mapping with `M`
/// codewords. Arguments at or above 1 give `f(1) = 0`.
pub fn converse_bound(spec: &SpectrumSummary, curve: &Curve, codebook_size: u64, gamma: f64) -> Result<Bound> {
    check_codebook(codebook_size)?;
    check_gamma(gamma)?;
    let slack = (-(spec.n as f64) * gamma).exp();
    let covered = spec.mass_with_ln_prob_at_least(converse_ln_threshold(spec.n, codebook_size, gamma));
    let argument = covered + slack;
    if argument >= 1.0 {
        Ok(Bound { value: 0.0, clamped: true })
    } else {
        Ok(Bound { value: curve.eval(argument), clamped: false })
    }
}
