//! Information-spectrum quantities at finite blocklength.
//!
//! The spectrum of a source at blocklength `n` is the distribution of the
//! normalized self-information `(1/n) log 1/P(X^n)`. Every rate here is an
//! infimum over that discrete distribution, so it is returned as one of the
//! spectrum's support points rather than an interpolated real.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fdivergence::Curve;
use crate::mass::{reaches, within, Mass, TIE_TOLERANCE};
use crate::probability::{expand, AtomicDistribution, SourceModel, SourceVariant};

/// One level of the spectrum: every atom with this self-information.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumPoint {
    /// `(1/n) log 1/P(x)` in nats per symbol.
    pub value: f64,
    /// Total probability of the level.
    pub mass: f64,
    /// `ln` of the number of atoms at this level.
    pub ln_atoms: f64,
    /// `ln P(x)` of a single atom at this level.
    pub ln_atom_mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumSummary {
    pub n: usize,
    pub alphabet_size: usize,
    points: Vec<SpectrumPoint>,
    /// `cdf[k] = Pr{ value <= points[k].value }`.
    cdf: Vec<f64>,
    /// `tail[k] = Pr{ value > points[k].value }`.
    tail: Vec<f64>,
}

impl SpectrumSummary {
    fn from_levels<M: Mass>(n: usize, alphabet_size: usize, levels: Vec<(SpectrumPoint, M)>) -> Self {
        let k = levels.len();
        let (cdf, tail, points) = if M::EXACT {
            let mut cdf = Vec::with_capacity(k);
            let mut running = M::zero();
            for (_, m) in &levels {
                running = running.add(m);
                cdf.push(running.to_f64().min(1.0));
            }
            let mut tail = vec![0.0; k];
            let mut above = M::zero();
            for i in (0..k).rev() {
                tail[i] = above.to_f64();
                above = above.add(&levels[i].1);
            }
            (cdf, tail, levels.into_iter().map(|(p, _)| p).collect::<Vec<_>>())
        } else {
            // Float masses (type classes, approximately normalized rows) are
            // renormalized and summed with compensation so that prefix and
            // suffix sums agree to a few ulps.
            let raw: Vec<f64> = levels.iter().map(|(_, m)| m.to_f64()).collect();
            let total = compensated_sum(raw.iter().copied());
            let masses: Vec<f64> = raw.iter().map(|m| m / total).collect();
            let mut below = Neumaier::default();
            let cdf: Vec<f64> = masses.iter().map(|&m| below.add(m).min(1.0)).collect();
            let mut above = Neumaier::default();
            let mut tail = vec![0.0; k];
            for i in (0..k).rev() {
                tail[i] = above.value();
                above.add(masses[i]);
            }
            let points =
                levels.into_iter().zip(&masses).map(|((p, _), &m)| SpectrumPoint { mass: m, ..p }).collect::<Vec<_>>();
            (cdf, tail, points)
        };
        let mut cdf = cdf;
        if let Some(last) = cdf.last_mut() {
            *last = 1.0;
        }
        SpectrumSummary { n, alphabet_size, points, cdf, tail }
    }

    pub fn points(&self) -> &[SpectrumPoint] {
        &self.points
    }

    pub fn cdf(&self) -> &[f64] {
        &self.cdf
    }

    pub fn tail(&self) -> &[f64] {
        &self.tail
    }

    pub fn min_value(&self) -> f64 {
        self.points.first().map_or(0.0, |p| p.value)
    }

    pub fn max_value(&self) -> f64 {
        self.points.last().map_or(0.0, |p| p.value)
    }

    /// `F_n(R) = Pr{ (1/n) log 1/P(X^n) <= R }`.
    pub fn cdf_at(&self, rate: f64) -> f64 {
        let k = self.points.partition_point(|p| p.value <= rate);
        if k == 0 {
            0.0
        } else {
            self.cdf[k - 1]
        }
    }

    /// Mass of levels whose atoms satisfy `ln P(x) >= ln_threshold`.
    ///
    /// Membership is decided on `ln P(x)`, the same test the mapping
    /// constructions use, so bounds and constructions agree on every level.
    pub fn mass_with_ln_prob_at_least(&self, ln_threshold: f64) -> f64 {
        let k = self.points.partition_point(|p| p.ln_atom_mass >= ln_threshold);
        if k == 0 {
            0.0
        } else {
            self.cdf[k - 1]
        }
    }

    /// `Pr{ value >= rate }`, counting the level at `rate` itself.
    pub fn mass_at_or_above(&self, rate: f64) -> f64 {
        let k = self.points.partition_point(|p| p.value < rate);
        if k == 0 {
            1.0
        } else {
            self.tail[k - 1]
        }
    }
}

fn same_level<M: Mass>(a: &M, b: &M) -> bool {
    if M::EXACT {
        a == b
    } else {
        let (x, y) = (a.to_f64(), b.to_f64());
        (x - y).abs() <= 1e-12 * x.abs().max(y.abs())
    }
}

/// Groups equal self-information values of `dist`, ascending.
pub fn spectrum_cdf<M: Mass>(dist: &AtomicDistribution<M>) -> SpectrumSummary {
    let n = dist.n();
    let order: Vec<usize> = dist.sort_descending().into_iter().filter(|&i| !dist.mass(i).is_zero()).collect();
    let mut levels: Vec<(SpectrumPoint, M)> = Vec::new();
    let mut start = 0;
    while start < order.len() {
        let head = dist.mass(order[start]);
        let mut end = start + 1;
        while end < order.len() && same_level(head, dist.mass(order[end])) {
            end += 1;
        }
        let total = M::sum(order[start..end].iter().map(|&i| dist.mass(i)));
        let ln_atom_mass = head.ln();
        levels.push((
            SpectrumPoint {
                value: -ln_atom_mass / n as f64,
                mass: total.to_f64(),
                ln_atoms: ((end - start) as f64).ln(),
                ln_atom_mass,
            },
            total,
        ));
        start = end;
    }
    SpectrumSummary::from_levels(n, dist.alphabet_size(), levels)
}

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut table = vec![0.0; n + 1];
    for k in 1..=n {
        table[k] = table[k - 1] + (k as f64).ln();
    }
    table
}

fn compositions(n: usize, parts: usize, visit: &mut impl FnMut(&[usize])) {
    fn rec(left: usize, slot: usize, counts: &mut Vec<usize>, visit: &mut impl FnMut(&[usize])) {
        if slot + 1 == counts.len() {
            counts[slot] = left;
            visit(counts);
            return;
        }
        for k in 0..=left {
            counts[slot] = k;
            rec(left - k, slot + 1, counts, visit);
        }
    }
    let mut counts = vec![0; parts];
    rec(n, 0, &mut counts, visit);
}

/// Neumaier compensated running sum.
#[derive(Default)]
struct Neumaier {
    sum: f64,
    carry: f64,
}

impl Neumaier {
    fn add(&mut self, v: f64) -> f64 {
        let t = self.sum + v;
        self.carry += if self.sum.abs() >= v.abs() { (self.sum - t) + v } else { (v - t) + self.sum };
        self.sum = t;
        self.value()
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut acc = Neumaier::default();
    values.for_each(|v| {
        acc.add(v);
    });
    acc.value()
}

fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Spectrum of an i.i.d. source or a mixture of i.i.d. components, built
/// from type classes (symbol-count vectors) instead of the `|X|^n` atoms.
/// All members of a type class share one probability.
pub fn type_class_spectrum(model: &SourceModel) -> Result<SpectrumSummary> {
    model.validate()?;
    let n = model.n;
    let a = model.alphabet_size;
    let components: Vec<(f64, Vec<f64>)> = match &model.variant {
        SourceVariant::Iid { pmf } => vec![(0.0, pmf.iter().map(|p| p.ln()).collect())],
        SourceVariant::Mixture { components } => {
            components.iter().map(|(w, pmf)| (Mass::ln(w), pmf.iter().map(|p| p.ln()).collect())).collect()
        }
        SourceVariant::Markov { .. } => {
            return Err(Error::InvalidModel("type classes need an i.i.d. or mixture-of-i.i.d. source".into()))
        }
    };
    let lnf = ln_factorials(n);
    let mut classes: Vec<(f64, f64)> = Vec::new(); // (ln atom mass, ln count)
    compositions(n, a, &mut |counts| {
        let per_component: Vec<f64> = components
            .iter()
            .map(|(ln_w, ln_p)| {
                ln_w + counts.iter().zip(ln_p).map(|(&k, &lp)| if k == 0 { 0.0 } else { k as f64 * lp }).sum::<f64>()
            })
            .collect();
        let ln_mass = log_sum_exp(&per_component);
        if ln_mass.is_finite() {
            let ln_count = lnf[n] - counts.iter().map(|&k| lnf[k]).sum::<f64>();
            classes.push((ln_mass, ln_count));
        }
    });
    classes.sort_by(|x, y| y.0.total_cmp(&x.0));

    let mut levels: Vec<(SpectrumPoint, f64)> = Vec::new();
    let mut i = 0;
    while i < classes.len() {
        let head = classes[i].0;
        let mut j = i + 1;
        while j < classes.len() && (classes[j].0 - head).abs() <= 1e-12 * head.abs().max(1.0) {
            j += 1;
        }
        let ln_counts: Vec<f64> = classes[i..j].iter().map(|c| c.1).collect();
        let ln_atoms = log_sum_exp(&ln_counts);
        let mass = (ln_atoms + head).exp();
        levels.push((SpectrumPoint { value: -head / n as f64, mass, ln_atoms, ln_atom_mass: head }, mass));
        i = j;
    }
    Ok(SpectrumSummary::from_levels(n, a, levels))
}

/// Spectrum by full expansion when within `cap`, else by type classes.
pub fn source_spectrum(model: &SourceModel, cap: u128) -> Result<SpectrumSummary> {
    match model.outcome_count() {
        Some(atoms) if atoms <= cap => {
            if model.is_exactly_normalized() {
                Ok(spectrum_cdf(&expand::<num_rational::BigRational>(model, cap)?))
            } else {
                Ok(spectrum_cdf(&expand::<f64>(model, cap)?))
            }
        }
        _ => match model.variant {
            SourceVariant::Markov { .. } => {
                Err(Error::CapExceeded { atoms: model.outcome_count().unwrap_or(u128::MAX), cap })
            }
            _ => type_class_spectrum(model),
        },
    }
}

fn check_unit_interval(what: &str, value: f64) -> Result<()> {
    if (0.0..1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::OutOfRange { what: what.into(), value })
    }
}

/// Index of `min { v : Pr{ value > v } <= eps }`.
pub fn sup_entropy_quantile_index(spec: &SpectrumSummary, eps: f64) -> Result<usize> {
    check_unit_interval("eps", eps)?;
    Ok(spec.tail.iter().position(|&t| within(t, eps)).unwrap_or(spec.points.len().saturating_sub(1)))
}

/// Finite-n ε-spectral sup-entropy rate: the smallest spectrum value whose
/// upper tail has mass at most `eps`.
pub fn sup_entropy_quantile(spec: &SpectrumSummary, eps: f64) -> Result<f64> {
    let k = sup_entropy_quantile_index(spec, eps)?;
    Ok(spec.points.get(k).map_or(0.0, |p| p.value))
}

/// Index of `min { R : f(F_n(R)) <= Δ }`.
pub fn k_f_rate_index(spec: &SpectrumSummary, curve: &Curve, delta: f64) -> Result<usize> {
    if !curve.is_nonincreasing() {
        return Err(Error::NotAdmissible(curve.name()));
    }
    if !(delta >= 0.0 && delta < curve.f_at_zero()) {
        return Err(Error::OutOfRange { what: format!("Delta for {}", curve.name()), value: delta });
    }
    // ties are decided in probability space, as in the quantile: F reaches
    // f^{-1}(Δ) when F + tolerance does
    let found = spec.cdf.iter().position(|&f| curve.eval((f + TIE_TOLERANCE).min(1.0)) <= delta);
    // f(F_n(max)) = f(1) = 0 <= Δ, so the search always succeeds.
    Ok(found.expect("f(1) = 0 makes the largest spectrum value admissible"))
}

/// Finite-n `K_f(Δ)`: the smallest spectrum value `R` with `f(F_n(R)) <= Δ`.
pub fn k_f_rate(spec: &SpectrumSummary, curve: &Curve, delta: f64) -> Result<f64> {
    let k = k_f_rate_index(spec, curve, delta)?;
    Ok(spec.points.get(k).map_or(0.0, |p| p.value))
}

/// The smallest set with probability at least `1 - δ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmoothMaxEntropy {
    /// `H_0(δ|X^n) = log |B_n|` in nats (not normalized by n).
    pub nats: f64,
    pub n: usize,
    /// Outcome ids of the minimizing set, most probable first.
    pub set: Vec<usize>,
}

impl SmoothMaxEntropy {
    pub fn per_symbol(&self) -> f64 {
        self.nats / self.n as f64
    }
}

/// Greedy prefix of the descending order reaching mass `1 - δ`.
pub fn smooth_max_entropy<M: Mass>(dist: &AtomicDistribution<M>, delta: f64) -> Result<SmoothMaxEntropy> {
    check_unit_interval("delta", delta)?;
    let target = 1.0 - delta;
    let mut set = Vec::new();
    let mut cum = M::zero();
    for id in dist.sort_descending() {
        if dist.mass(id).is_zero() {
            break;
        }
        cum = cum.add(dist.mass(id));
        set.push(id);
        if reaches(cum.to_f64(), target) {
            break;
        }
    }
    Ok(SmoothMaxEntropy { nats: (set.len() as f64).ln(), n: dist.n(), set })
}

/// `H_0(δ|X^n)` in nats from a spectrum; works for type-class spectra where
/// the atoms are never materialized.
pub fn smooth_max_entropy_from_spectrum(spec: &SpectrumSummary, delta: f64) -> Result<f64> {
    check_unit_interval("delta", delta)?;
    let target = 1.0 - delta;
    let mut taken: Vec<f64> = Vec::new();
    let mut before = 0.0;
    for (k, point) in spec.points.iter().enumerate() {
        if reaches(spec.cdf[k], target) {
            // same stopping rule as the atom-level greedy: mass >= target - tolerance
            let remaining = target - TIE_TOLERANCE - before;
            let ln_needed = if remaining <= 0.0 { f64::NEG_INFINITY } else { remaining.ln() - point.ln_atom_mass };
            let ln_partial = if ln_needed < 36.0 {
                ln_needed.exp().ceil().max(1.0).ln().min(point.ln_atoms)
            } else {
                ln_needed.min(point.ln_atoms)
            };
            taken.push(ln_partial);
            return Ok(log_sum_exp(&taken));
        }
        taken.push(point.ln_atoms);
        before = spec.cdf[k];
    }
    Ok(log_sum_exp(&taken))
}

/// A computed rate with the parameters it was computed from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateReport {
    pub quantity: String,
    /// Nats per symbol.
    pub value: f64,
    pub n: usize,
    pub curve: Option<String>,
    pub delta: Option<f64>,
    pub eps: Option<f64>,
    pub smooth_delta: Option<f64>,
    pub gamma: Option<f64>,
    pub codebook_size: Option<u64>,
    pub provenance: String,
}

impl RateReport {
    fn new(quantity: &str, value: f64, n: usize, provenance: &str) -> Self {
        RateReport {
            quantity: quantity.into(),
            value,
            n,
            curve: None,
            delta: None,
            eps: None,
            smooth_delta: None,
            gamma: None,
            codebook_size: None,
            provenance: provenance.into(),
        }
    }

    pub fn quantile(spec: &SpectrumSummary, eps: f64) -> Result<Self> {
        let mut r = Self::new(
            "sup_entropy_quantile",
            sup_entropy_quantile(spec, eps)?,
            spec.n,
            "spectrum::sup_entropy_quantile",
        );
        r.eps = Some(eps);
        Ok(r)
    }

    pub fn k_f(spec: &SpectrumSummary, curve: &Curve, delta: f64) -> Result<Self> {
        let mut r = Self::new("k_f_rate", k_f_rate(spec, curve, delta)?, spec.n, "spectrum::k_f_rate");
        r.curve = Some(curve.name());
        r.delta = Some(delta);
        Ok(r)
    }

    /// `(1/n) H_0(δ|X^n)`.
    pub fn smooth_max_entropy(spec: &SpectrumSummary, delta: f64) -> Result<Self> {
        let nats = smooth_max_entropy_from_spectrum(spec, delta)?;
        let mut r = Self::new("smooth_max_entropy_rate", nats / spec.n as f64, spec.n, "spectrum::smooth_max_entropy");
        r.smooth_delta = Some(delta);
        Ok(r)
    }

    /// Whether the value lies in its admissible range: `[0, log |X|]` for
    /// the smooth max entropy (`|B| <= |X|^n`), `[min, max]` of the spectrum
    /// for quantiles and `K_f`, which can exceed `log |X|` at finite n.
    pub fn in_range(&self, spec: &SpectrumSummary) -> bool {
        let slack = 1e-9;
        if self.quantity == "smooth_max_entropy_rate" {
            self.value >= -slack && self.value <= (spec.alphabet_size as f64).ln() + slack
        } else {
            self.value >= spec.min_value() - slack && self.value <= spec.max_value() + slack
        }
    }
}

/// Column set of the sweep CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub nu: f64,
    pub delta: f64,
    pub quantity: String,
    pub value: f64,
    pub curve: String,
}

/// Per-n values of `(1/n) H_0(1 - f^{-1}(Δ + ν)|X^n)` and of `K_f(Δ)` at
/// finite n. Rows come out ordered by `(n, Δ, quantity, ν)`.
pub fn rate_convergence_sweep(
    model: &SourceModel,
    n_grid: &[usize],
    curve: &Curve,
    deltas: &[f64],
    nus: &[f64],
    cap: u128,
) -> Result<Vec<SweepRow>> {
    let per_n: Vec<Result<Vec<SweepRow>>> = n_grid
        .par_iter()
        .map(|&n| {
            let spec = source_spectrum(&model.with_n(n), cap)?;
            let mut rows = Vec::new();
            for &delta in deltas {
                rows.push(SweepRow {
                    n,
                    nu: 0.0,
                    delta,
                    quantity: "k_f_rate".into(),
                    value: k_f_rate(&spec, curve, delta)?,
                    curve: curve.name(),
                });
                for &nu in nus {
                    let level = delta + nu;
                    if level >= curve.f_at_zero() {
                        continue;
                    }
                    let smooth = 1.0 - curve.inverse(level)?;
                    rows.push(SweepRow {
                        n,
                        nu,
                        delta,
                        quantity: "smooth_max_entropy_rate".into(),
                        value: smooth_max_entropy_from_spectrum(&spec, smooth)? / n as f64,
                        curve: curve.name(),
                    });
                }
            }
            Ok(rows)
        })
        .collect();
    let mut rows = Vec::new();
    for chunk in per_n {
        rows.extend(chunk?);
    }
    rows.sort_by(|a, b| {
        a.n.cmp(&b.n).then(a.delta.total_cmp(&b.delta)).then(a.quantity.cmp(&b.quantity)).then(a.nu.total_cmp(&b.nu))
    });
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Trend {
    Nonincreasing,
    Nondecreasing,
    Constant,
    Mixed,
}

/// Classifies a sequence as monotone up to `noise` per step.
pub fn trend_flag(values: &[f64], noise: f64) -> Trend {
    let up = values.windows(2).all(|w| w[1] >= w[0] - noise);
    let down = values.windows(2).all(|w| w[1] <= w[0] + noise);
    match (up, down) {
        (true, true) => Trend::Constant,
        (false, true) => Trend::Nonincreasing,
        (true, false) => Trend::Nondecreasing,
        (false, false) => Trend::Mixed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probability::DEFAULT_ATOM_CAP;
    use num_bigint::BigInt;
    use num_rational::BigRational;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn bern(p: BigRational, n: usize) -> AtomicDistribution<BigRational> {
        expand(&SourceModel::bernoulli(p, n).unwrap(), DEFAULT_ATOM_CAP).unwrap()
    }

    #[test]
    fn uniform_spectrum_is_one_point() {
        let s = spectrum_cdf(&bern(q(1, 2), 3));
        assert_eq!(s.points().len(), 1);
        assert!((s.points()[0].value - 2f64.ln()).abs() < 1e-15);
        assert_eq!(s.points()[0].mass, 1.0);
    }

    #[test]
    fn bern_quarter_pair_has_three_levels() {
        let s = spectrum_cdf(&bern(q(1, 4), 2));
        let masses: Vec<f64> = s.points().iter().map(|p| p.mass).collect();
        assert_eq!(masses, vec![9.0 / 16.0, 6.0 / 16.0, 1.0 / 16.0]);
        let values: Vec<f64> = s.points().iter().map(|p| p.value).collect();
        assert!((values[0] - 0.5 * (16.0f64 / 9.0).ln()).abs() < 1e-15);
        assert!((values[1] - 0.5 * (16.0f64 / 3.0).ln()).abs() < 1e-15);
        assert!((values[2] - 4f64.ln() * 1.0).abs() < 1e-15);
        assert_eq!(s.tail(), &[7.0 / 16.0, 1.0 / 16.0, 0.0]);
    }

    #[test]
    fn quantile_examples() {
        let fair = spectrum_cdf(&bern(q(1, 2), 4));
        for eps in [0.0, 0.3, 0.99] {
            assert!((sup_entropy_quantile(&fair, eps).unwrap() - 2f64.ln()).abs() < 1e-15);
        }
        let s = spectrum_cdf(&bern(q(1, 4), 2));
        let v = s.points().iter().map(|p| p.value).collect::<Vec<_>>();
        // tail above the lowest level is 7/16 <= 1/2
        assert_eq!(sup_entropy_quantile(&s, 0.5).unwrap(), v[0]);
        // 7/16 > 0.4 but 1/16 <= 0.4
        assert_eq!(sup_entropy_quantile(&s, 0.4).unwrap(), v[1]);
        assert_eq!(sup_entropy_quantile(&s, 0.0).unwrap(), v[2]);
        assert_eq!(sup_entropy_quantile(&s, 0.999999).unwrap(), v[0]);
        assert!(sup_entropy_quantile(&s, 1.0).is_err());
    }

    #[test]
    fn k_f_examples() {
        let s = spectrum_cdf(&bern(q(1, 4), 2));
        for delta in [0.0, 0.05, 0.1, 0.4, 0.45, 0.9] {
            let tv = k_f_rate(&s, &Curve::Variational, delta).unwrap();
            assert_eq!(tv, sup_entropy_quantile(&s, delta).unwrap());
            for g in [1, 2, 5] {
                let e = k_f_rate(&s, &Curve::e_gamma(q(g, 1)).unwrap(), delta).unwrap();
                assert_eq!(e, tv);
            }
        }
        let eps = 1.0 - (-0.105f64).exp();
        assert!((eps - 0.0997).abs() < 1e-4);
        let rk = k_f_rate(&s, &Curve::ReverseKl, 0.105).unwrap();
        assert_eq!(rk, sup_entropy_quantile(&s, eps).unwrap());
        assert_eq!(rk, s.points()[1].value);
        assert!(k_f_rate(&s, &Curve::Kl, 0.1).is_err());
        assert!(k_f_rate(&s, &Curve::Hellinger, 1.0).is_err());
    }

    #[test]
    fn smooth_max_entropy_examples() {
        let u = AtomicDistribution::from_masses(vec![q(1, 4); 4]).unwrap();
        let h = smooth_max_entropy(&u, 0.25).unwrap();
        assert!((h.nats - 3f64.ln()).abs() < 1e-15);
        assert_eq!(h.set, vec![0, 1, 2]);
        let d = AtomicDistribution::from_masses(vec![q(4, 10), q(3, 10), q(2, 10), q(1, 10)]).unwrap();
        assert_eq!(smooth_max_entropy(&d, 0.0).unwrap().set.len(), 4);
        let h = smooth_max_entropy(&d, 0.35).unwrap();
        assert!((h.nats - 2f64.ln()).abs() < 1e-15);
        assert_eq!(h.set, vec![0, 1]);
        assert!(smooth_max_entropy(&d, 1.0).is_err());
    }

    #[test]
    fn spectrum_route_matches_atom_route() {
        for (p, n) in [(q(1, 4), 6), (q(1, 10), 8), (q(2, 5), 7), (q(1, 2), 5)] {
            let d = bern(p, n);
            let s = spectrum_cdf(&d);
            for k in 0..20 {
                let delta = k as f64 * 0.05;
                let a = smooth_max_entropy(&d, delta).unwrap().nats;
                let b = smooth_max_entropy_from_spectrum(&s, delta).unwrap();
                assert!((a - b).abs() < 1e-12, "n={n} delta={delta}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn type_classes_match_expansion() {
        let models = [
            SourceModel::bernoulli(q(1, 4), 7).unwrap(),
            SourceModel::iid(vec![q(1, 2), q(1, 3), q(1, 6)], 4).unwrap(),
            SourceModel::mixture(vec![(q(1, 3), vec![q(9, 10), q(1, 10)]), (q(2, 3), vec![q(1, 2), q(1, 2)])], 6)
                .unwrap(),
        ];
        for model in models {
            let a = spectrum_cdf(&expand::<BigRational>(&model, DEFAULT_ATOM_CAP).unwrap());
            let b = type_class_spectrum(&model).unwrap();
            assert_eq!(a.points().len(), b.points().len());
            for (x, y) in a.points().iter().zip(b.points()) {
                assert!((x.value - y.value).abs() < 1e-12);
                assert!((x.mass - y.mass).abs() < 1e-12);
                assert!((x.ln_atoms - y.ln_atoms).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn mixture_spectrum_is_bimodal_at_large_n() {
        let model =
            SourceModel::mixture(vec![(q(1, 2), vec![q(9, 10), q(1, 10)]), (q(1, 2), vec![q(1, 2), q(1, 2)])], 2000)
                .unwrap();
        let s = type_class_spectrum(&model).unwrap();
        let h01 = -(0.9f64 * 0.9f64.ln() + 0.1 * 0.1f64.ln());
        let near = |c: f64| -> f64 { s.points().iter().filter(|p| (p.value - c).abs() < 0.06).map(|p| p.mass).sum() };
        assert!((near(h01) - 0.5).abs() < 0.02, "{}", near(h01));
        assert!((near(2f64.ln()) - 0.5).abs() < 0.02);
    }

    #[test]
    fn trend_classification() {
        assert_eq!(trend_flag(&[3.0, 2.0, 2.001, 1.0], 0.005), Trend::Nonincreasing);
        assert_eq!(trend_flag(&[1.0, 1.0], 0.0), Trend::Constant);
        assert_eq!(trend_flag(&[1.0, 2.0, 1.0], 0.0), Trend::Mixed);
    }
}
