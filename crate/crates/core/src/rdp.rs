//! Rate-distortion-perception bounds.
//!
//! The lower bound is `max{ r(D), K_f(Δ) }`, with `r(D)` the single-letter
//! rate-distortion function of an i.i.d. source (Blahut–Arimoto) and `K_f`
//! taken at the instance's blocklength. Above the distortion threshold
//! `D_threshold = (1/n) ḡ_n Pr{ (1/n) log 1/P(X^n) >= K_f }` the threshold
//! mapping certifies `K_f` as an upper bound.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::config::Entries;
use crate::construction::MappingPair;
use crate::error::{Error, Result};
use crate::fdivergence::Curve;
use crate::mass::{parse_rational, rational_to_f64, Mass};
use crate::probability::{AtomicDistribution, Outcome};
use crate::spectrum::{k_f_rate, k_f_rate_index, spectrum_cdf, SpectrumSummary};

/// Per-letter distortion `g(a, b)`, extended additively to blocks unless a
/// per-sequence table is supplied.
#[derive(Debug, Clone, PartialEq)]
pub struct DistortionSpec {
    letters: Vec<Vec<BigRational>>,
    table: Option<Vec<Vec<BigRational>>>,
}

fn check_entries(rows: &[Vec<BigRational>], what: &str) -> Result<()> {
    let k = rows.len();
    for (a, row) in rows.iter().enumerate() {
        if row.len() != k {
            return Err(Error::DimensionMismatch(row.len(), k));
        }
        if row.iter().any(Signed::is_negative) {
            return Err(Error::InvalidModel(format!("{what}: negative distortion in row {a}")));
        }
        if !Zero::is_zero(&row[a]) {
            return Err(Error::InvalidModel(format!("{what}: g({a}, {a}) must be 0")));
        }
    }
    Ok(())
}

impl DistortionSpec {
    pub fn hamming(alphabet_size: usize) -> Self {
        let letters = (0..alphabet_size)
            .map(|a| {
                (0..alphabet_size)
                    .map(|b| if a == b { <BigRational as Zero>::zero() } else { <BigRational as One>::one() })
                    .collect()
            })
            .collect();
        DistortionSpec { letters, table: None }
    }

    pub fn from_matrix(letters: Vec<Vec<BigRational>>) -> Result<Self> {
        if letters.is_empty() {
            return Err(Error::InvalidModel("empty distortion matrix".into()));
        }
        check_entries(&letters, "distortion matrix")?;
        Ok(DistortionSpec { letters, table: None })
    }

    /// Replaces the additive extension by an explicit `g_n(x, y)` table over
    /// outcome ids.
    pub fn with_table(mut self, table: Vec<Vec<BigRational>>) -> Result<Self> {
        check_entries(&table, "distortion table")?;
        self.table = Some(table);
        Ok(self)
    }

    /// `distortion = hamming` (the default) or one `distortion_row = ...`
    /// line per source letter.
    pub fn from_entries(entries: &Entries, alphabet_size: usize) -> Result<Self> {
        let rows: Vec<(usize, &str)> = entries.all("distortion_row").collect();
        match entries.get("distortion") {
            Some((line, kind)) if kind != "hamming" => {
                return Err(Error::Config { line, msg: format!("unknown distortion `{kind}`") });
            }
            Some((line, _)) if !rows.is_empty() => {
                return Err(Error::Config { line, msg: "`distortion = hamming` conflicts with distortion_row".into() });
            }
            _ => {}
        }
        if rows.is_empty() {
            return Ok(Self::hamming(alphabet_size));
        }
        let last_line = rows.last().map_or(0, |r| r.0);
        if rows.len() != alphabet_size {
            return Err(Error::Config {
                line: last_line,
                msg: format!("{} distortion rows for an alphabet of {alphabet_size}", rows.len()),
            });
        }
        let mut letters = Vec::with_capacity(rows.len());
        for (line, text) in rows {
            let row = text
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|t| !t.is_empty())
                .map(|tok| parse_rational(tok).map_err(|e| Error::Config { line, msg: format!("distortion_row: {e}") }))
                .collect::<Result<Vec<_>>>()?;
            letters.push(row);
        }
        Self::from_matrix(letters).map_err(|e| Error::Config { line: last_line, msg: e.to_string() })
    }

    pub fn alphabet_size(&self) -> usize {
        self.letters.len()
    }

    pub fn letter(&self, a: usize, b: usize) -> &BigRational {
        &self.letters[a][b]
    }

    pub fn letters_f64(&self) -> Vec<Vec<f64>> {
        self.letters.iter().map(|row| row.iter().map(rational_to_f64).collect()).collect()
    }

    /// `g_n(x, y)` for outcome ids at blocklength `n`.
    pub fn block(&self, x: usize, y: usize, n: usize) -> BigRational {
        if let Some(table) = &self.table {
            return table[x][y].clone();
        }
        let k = self.alphabet_size();
        let xs = Outcome::from_id(x, n, k).symbols;
        let ys = Outcome::from_id(y, n, k).symbols;
        xs.iter().zip(&ys).fold(<BigRational as Zero>::zero(), |acc, (&a, &b)| acc + &self.letters[a][b])
    }

    /// `(1/n) ḡ_n`: the largest letter distortion for the additive extension,
    /// the largest table entry over `n` otherwise.
    pub fn normalized_max(&self, n: usize) -> BigRational {
        let max_of = |rows: &[Vec<BigRational>]| {
            rows.iter().flatten().fold(<BigRational as Zero>::zero(), |m, g| m.max(g.clone()))
        };
        match &self.table {
            Some(table) => max_of(table) / BigRational::from_integer(BigInt::from(n)),
            None => max_of(&self.letters),
        }
    }
}

/// `(1/n) E[ g_n(X, ψ(φ(X))) ]`.
pub fn mapping_distortion<M: Mass>(
    mapping: &MappingPair,
    dist: &AtomicDistribution<M>,
    g: &DistortionSpec,
) -> Result<M> {
    if mapping.phi().len() != dist.len() {
        return Err(Error::DimensionMismatch(mapping.phi().len(), dist.len()));
    }
    if g.table.is_none() && g.alphabet_size() != dist.alphabet_size() {
        return Err(Error::DimensionMismatch(g.alphabet_size(), dist.alphabet_size()));
    }
    let mut total = M::zero();
    for (x, p) in dist.masses().iter().enumerate() {
        let y = mapping.reconstruct(x);
        if p.is_zero() || x == y {
            continue;
        }
        total = total.add(&p.mul(&M::from_rational(&g.block(x, y, dist.n()))));
    }
    Ok(total.div(&M::from_count(dist.n() as u64)))
}

/// `(1/n) ḡ_n · Pr{ (1/n) log 1/P(X^n) >= K_f(Δ) }` at the instance's n.
///
/// The tail probability is summed exactly over atoms; an atom belongs to
/// the tail when its level is at or above the `K_f` level of the spectrum.
pub fn d_threshold<M: Mass>(dist: &AtomicDistribution<M>, g: &DistortionSpec, curve: &Curve, delta: f64) -> Result<M> {
    let spec = spectrum_cdf(dist);
    let k = k_f_rate_index(&spec, curve, delta)?;
    let level_ln = spec.points()[k].ln_atom_mass;
    let tolerance = 1e-12 * level_ln.abs().max(1.0);
    let tail = M::sum(dist.masses().iter().filter(|p| !p.is_zero() && p.ln() <= level_ln + tolerance));
    Ok(tail.mul(&M::from_rational(&g.normalized_max(dist.n()))))
}

/// Codebook size `⌈e^{n (K_f + γ)}⌉` at which the threshold mapping attains
/// distortion at most [`d_threshold`].
pub fn threshold_codebook_size(spec: &SpectrumSummary, curve: &Curve, delta: f64, gamma: f64) -> Result<u64> {
    let rate = k_f_rate(spec, curve, delta)?;
    let raw = (spec.n as f64 * (rate + gamma)).exp();
    Ok(if raw >= u64::MAX as f64 { u64::MAX } else { raw.ceil() as u64 })
}

fn entropy(pmf: &[f64]) -> f64 {
    pmf.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.ln()).sum()
}

/// `h(p) - h(D)` for a Bernoulli(p) source under Hamming distortion, `0` once
/// `D >= min(p, 1 - p)`.
pub fn binary_hamming_rd(p: f64, d: f64) -> f64 {
    let h = |x: f64| entropy(&[x, 1.0 - x]);
    if d >= p.min(1.0 - p) {
        0.0
    } else {
        h(p) - h(d.max(0.0))
    }
}

const BA_TOLERANCE: f64 = 1e-13;
const BA_MAX_ITERATIONS: usize = 100_000;

/// Blahut–Arimoto at slope `s`: returns `(D_s, R_s)`.
fn blahut_arimoto(pmf: &[f64], g: &[Vec<f64>], s: f64) -> (f64, f64) {
    let k = g[0].len();
    let mut q = vec![1.0 / k as f64; k];
    let weights: Vec<Vec<f64>> = g.iter().map(|row| row.iter().map(|&d| (-s * d).exp()).collect()).collect();
    let mut conditional = vec![vec![0.0; k]; pmf.len()];
    for _ in 0..BA_MAX_ITERATIONS {
        for (a, row) in conditional.iter_mut().enumerate() {
            let z: f64 = (0..k).map(|b| q[b] * weights[a][b]).sum();
            for b in 0..k {
                row[b] = q[b] * weights[a][b] / z;
            }
        }
        let next: Vec<f64> = (0..k).map(|b| pmf.iter().zip(&conditional).map(|(p, row)| p * row[b]).sum()).collect();
        let change = next.iter().zip(&q).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        q = next;
        if change < BA_TOLERANCE {
            break;
        }
    }
    let mut distortion = 0.0;
    let mut rate = 0.0;
    for (a, row) in conditional.iter().enumerate() {
        for b in 0..k {
            if row[b] > 0.0 && pmf[a] > 0.0 {
                distortion += pmf[a] * row[b] * g[a][b];
                rate += pmf[a] * row[b] * (row[b] / q[b]).ln();
            }
        }
    }
    (distortion, rate.max(0.0))
}

/// Single-letter rate-distortion function in nats per symbol.
///
/// Bisects the slope `s` until `D_s` brackets `D`, then reads the rate off
/// the supporting line, `R_s + s (D_s - D)`.
pub fn rd_function_iid(pmf: &[f64], g: &[Vec<f64>], d: f64) -> Result<f64> {
    if g.len() != pmf.len() {
        return Err(Error::DimensionMismatch(g.len(), pmf.len()));
    }
    if d.is_nan() || d < 0.0 {
        return Err(Error::OutOfRange { what: "distortion level".into(), value: d });
    }
    let k = g[0].len();
    let d_max = (0..k).map(|b| pmf.iter().zip(g).map(|(p, row)| p * row[b]).sum::<f64>()).fold(f64::INFINITY, f64::min);
    if d >= d_max {
        return Ok(0.0);
    }
    let distinct = g.iter().enumerate().all(|(a, row)| row.iter().enumerate().all(|(b, &x)| a == b || x > 0.0));
    if d == 0.0 && distinct && k == pmf.len() {
        return Ok(entropy(pmf));
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    while blahut_arimoto(pmf, g, hi).0 > d {
        lo = hi;
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::NoConvergence { lo, hi });
        }
    }
    let mut best = blahut_arimoto(pmf, g, hi);
    let mut slope = hi;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let (dm, rm) = blahut_arimoto(pmf, g, mid);
        if dm > d {
            lo = mid;
        } else {
            hi = mid;
            best = (dm, rm);
            slope = mid;
        }
        if (best.0 - d).abs() < 1e-13 || hi - lo < 1e-13 * hi.max(1.0) {
            break;
        }
    }
    let (ds, rs) = best;
    Ok((rs + slope * (ds - d)).max(0.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RdpBoundReport {
    pub d: f64,
    pub delta: f64,
    pub curve: String,
    pub n: usize,
    pub lower: f64,
    /// Present only when `D >= d_threshold`.
    pub upper: Option<f64>,
    pub d_threshold: f64,
    pub rd_value: f64,
    pub k_f_value: f64,
}

/// `max{ r(D), K_f(Δ) }`; with `Δ >= f(0)` the perception constraint is void
/// and the `K_f` leg is 0.
pub fn rdp_lower_bound(
    pmf: &[f64],
    spec: &SpectrumSummary,
    curve: &Curve,
    delta: f64,
    g: &DistortionSpec,
    d: f64,
) -> Result<(f64, f64, f64)> {
    let rd = rd_function_iid(pmf, &g.letters_f64(), d)?;
    let k_f = if delta >= curve.f_at_zero() { 0.0 } else { k_f_rate(spec, curve, delta)? };
    Ok((rd.max(k_f), rd, k_f))
}

/// Full report for one `(D, Δ)` cell.
pub fn rdp_report<M: Mass>(
    pmf: &[f64],
    dist: &AtomicDistribution<M>,
    curve: &Curve,
    delta: f64,
    g: &DistortionSpec,
    d: f64,
) -> Result<RdpBoundReport> {
    let spec = spectrum_cdf(dist);
    let (lower, rd_value, k_f_value) = rdp_lower_bound(pmf, &spec, curve, delta, g, d)?;
    let threshold = if delta >= curve.f_at_zero() { 0.0 } else { d_threshold(dist, g, curve, delta)?.to_f64() };
    Ok(RdpBoundReport {
        d,
        delta,
        curve: curve.name(),
        n: dist.n(),
        lower,
        upper: (d >= threshold && delta < curve.f_at_zero()).then_some(k_f_value),
        d_threshold: threshold,
        rd_value,
        k_f_value,
    })
}
