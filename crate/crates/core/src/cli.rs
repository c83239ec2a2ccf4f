//! Batch commands behind the `srng` binary.
//!
//! Each command turns a [`RunConfig`] into named text artifacts (CSV tables
//! and JSON reports) plus a list of invariant violations. Artifacts are
//! produced in grid order, so reruns are byte-identical.

use std::fmt::Write as _;

use serde::Serialize;

use crate::config::RunConfig;
use crate::construction::{
    achievability_bound, apply_mapping, build_baseline_mapping, build_smooth_set_mapping, build_threshold_mapping,
    converse_bound, ConstructionTrace,
};
use crate::error::{Error, Result};
use crate::fdivergence::{divergence, Curve};
use crate::mass::{within, Mass};
use crate::oracle::{instance_hash, min_fdiv_bruteforce, min_set_bruteforce, Candidates};
use crate::probability::{expand, AtomicDistribution, SourceVariant, DEFAULT_ATOM_CAP};
use crate::rdp::{rdp_report, RdpBoundReport};
use crate::spectrum::{rate_convergence_sweep, smooth_max_entropy, source_spectrum, spectrum_cdf, RateReport};

use num_rational::BigRational;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Units {
    Nats,
    Bits,
}

impl Units {
    fn rate(self, nats: f64) -> f64 {
        match self {
            Units::Nats => nats,
            Units::Bits => nats / std::f64::consts::LN_2,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Options {
    pub units: Units,
    /// Exact rational arithmetic (default) or `f64`.
    pub exact: bool,
    /// Largest outcome space that may be expanded atom by atom.
    pub cap: u128,
}

impl Default for Options {
    fn default() -> Self {
        Options { units: Units::Nats, exact: true, cap: DEFAULT_ATOM_CAP }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

#[derive(Debug, Clone, Default)]
pub struct CommandOutput {
    pub artifacts: Vec<Artifact>,
    pub violations: Vec<String>,
}

impl CommandOutput {
    fn push(&mut self, name: &str, contents: String) {
        self.artifacts.push(Artifact { name: name.into(), contents });
    }
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

/// Sandwich tolerance: none in exact mode.
fn slack(exact: bool) -> f64 {
    if exact {
        0.0
    } else {
        1e-10
    }
}

fn codebook_grid(cfg: &RunConfig, support: usize) -> Vec<u64> {
    cfg.codebook_sizes.clone().unwrap_or_else(|| (1..=support as u64).collect())
}

pub fn cmd_analyze(cfg: &RunConfig, opts: &Options) -> Result<CommandOutput> {
    let spec = source_spectrum(&cfg.source, opts.cap)?;
    let mut out = CommandOutput::default();
    let mut csv = String::from("value,mass,ln_atoms,cdf,tail\n");
    for (k, p) in spec.points().iter().enumerate() {
        writeln!(csv, "{},{},{},{},{}", opts.units.rate(p.value), p.mass, p.ln_atoms, spec.cdf()[k], spec.tail()[k])
            .unwrap();
    }
    out.push("spectrum.csv", csv);

    let mut reports = Vec::new();
    for &eps in &cfg.eps {
        reports.push(RateReport::quantile(&spec, eps)?);
    }
    for curve in &cfg.curves {
        if !curve.is_nonincreasing() {
            continue;
        }
        for &delta in &cfg.deltas {
            if delta < curve.f_at_zero() {
                reports.push(RateReport::k_f(&spec, curve, delta)?);
            }
        }
    }
    for &delta in &cfg.smooth {
        reports.push(RateReport::smooth_max_entropy(&spec, delta)?);
    }
    for r in &mut reports {
        if !r.in_range(&spec) {
            out.violations.push(format!("{} = {} outside its admissible range", r.quantity, r.value));
        }
        r.value = opts.units.rate(r.value);
    }
    out.push("rates.json", json(&reports));
    Ok(out)
}

#[derive(Serialize)]
struct TraceRecord<'a> {
    gamma: f64,
    codebook_size: u64,
    trace: &'a ConstructionTrace,
}

fn construct_with<M: Mass>(cfg: &RunConfig, opts: &Options) -> Result<CommandOutput> {
    let dist: AtomicDistribution<M> = expand(&cfg.source, opts.cap)?;
    let spec = spectrum_cdf(&dist);
    let tol = slack(opts.exact);
    let mut out = CommandOutput::default();
    let mut csv =
        String::from("curve,codebook_size,gamma,converse,exact,achievability,achievability_clamped,baseline,ok\n");
    let mut traces = Vec::new();
    for &m in &codebook_grid(cfg, dist.support_size()) {
        for &gamma in &cfg.gammas {
            let (mapping, trace) = build_threshold_mapping(&dist, m, gamma)?;
            let (baseline, _) = build_baseline_mapping(&dist, m, gamma)?;
            let q = apply_mapping(&mapping, &dist)?;
            let qb = apply_mapping(&baseline, &dist)?;
            for curve in &cfg.curves {
                let exact = divergence(curve, &dist, &q)?;
                let base = divergence(curve, &dist, &qb)?;
                let (lo, hi) = if curve.is_nonincreasing() {
                    let lo = converse_bound(&spec, curve, m, gamma)?;
                    let hi = achievability_bound(&spec, curve, m, gamma)?;
                    (Some(lo.value), Some(hi))
                } else {
                    (None, None)
                };
                let ok = lo.is_none_or(|l| l <= exact + tol) && hi.is_none_or(|h| within_tol(exact, h.value, tol));
                if !ok {
                    out.violations
                        .push(format!("sandwich violated: {curve} M={m} gamma={gamma}: {lo:?} <= {exact} <= {hi:?}"));
                }
                writeln!(
                    csv,
                    "{},{m},{gamma},{},{exact},{},{},{base},{ok}",
                    curve.name(),
                    opt(lo),
                    opt(hi.map(|h| h.value)),
                    hi.is_some_and(|h| h.clamped),
                )
                .unwrap();
            }
            traces.push((gamma, m, trace));
        }
    }
    out.push("construct.csv", csv);

    let mut smooth = String::from("curve,delta,gamma,codebook_size,saturated,divergence,anchor_bound,nu,ok\n");
    for curve in cfg.curves.iter().filter(|c| c.is_nonincreasing()) {
        for &delta in cfg.deltas.iter().filter(|&&d| d < curve.f_at_zero()) {
            for &gamma in &cfg.gammas {
                let (mapping, trace) = build_smooth_set_mapping(&dist, curve, delta, gamma)?;
                let q = apply_mapping(&mapping, &dist)?;
                let d = divergence(curve, &dist, &q)?;
                let (bound, nu) = smooth_set_bound(curve, &trace, gamma);
                let ok = trace.saturated || within_tol(d, bound, tol.max(1e-12));
                if !ok {
                    out.violations
                        .push(format!("smooth-set bound violated: {curve} delta={delta} gamma={gamma}: {d} > {bound}"));
                }
                writeln!(
                    smooth,
                    "{},{delta},{gamma},{},{},{d},{bound},{nu},{ok}",
                    curve.name(),
                    trace.codebook_size,
                    trace.saturated
                )
                .unwrap();
            }
        }
    }
    out.push("smooth_set.csv", smooth);
    let records: Vec<TraceRecord> =
        traces.iter().map(|(gamma, m, trace)| TraceRecord { gamma: *gamma, codebook_size: *m, trace }).collect();
    out.push("traces.json", json(&records));
    Ok(out)
}

fn within_tol(value: f64, limit: f64, tol: f64) -> bool {
    value <= limit + tol
}

/// `f(Pr B) + 2ν` with
/// `2ν = (P̄ + e^{−nγ}) f(P̄ Pr B / (P̄ + e^{−nγ})) − P̄ f(Pr B)` at the
/// anchor that took the remainder; returns the bound and `ν`.
pub fn smooth_set_bound(curve: &Curve, trace: &ConstructionTrace, gamma: f64) -> (f64, f64) {
    let pb = trace.anchor_mass;
    let e = (-(trace.n as f64) * gamma).exp();
    let conditioned = trace.stop_index.checked_sub(1).and_then(|i| trace.steps.get(i)).map_or(0.0, |s| s.target_f64);
    let two_nu = (conditioned + e) * curve.eval(conditioned * pb / (conditioned + e)) - conditioned * curve.eval(pb);
    let nu = (two_nu / 2.0).max(0.0);
    (curve.eval(pb) + 2.0 * nu, nu)
}

pub fn cmd_construct(cfg: &RunConfig, opts: &Options) -> Result<CommandOutput> {
    if opts.exact {
        construct_with::<BigRational>(cfg, opts)
    } else {
        construct_with::<f64>(cfg, opts)
    }
}

fn oracle_with<M: Mass>(cfg: &RunConfig, opts: &Options) -> Result<CommandOutput> {
    let dist: AtomicDistribution<M> = expand(&cfg.source, opts.cap)?;
    let spec = spectrum_cdf(&dist);
    let hash = instance_hash(&dist);
    let mut out = CommandOutput::default();
    let mut csv = String::from("instance,curve,codebook_size,gamma,converse,oracle,construction,ok,error\n");
    for curve in &cfg.curves {
        for &m in &codebook_grid(cfg, dist.support_size()) {
            let found = min_fdiv_bruteforce(&dist, m as usize, curve, Candidates::Support);
            let (best, _) = match found {
                Ok(v) => v,
                Err(e @ Error::CapExceeded { .. }) => {
                    writeln!(csv, "{hash},{},{m},,,,,,{e}", curve.name()).unwrap();
                    continue;
                }
                Err(e) => return Err(e),
            };
            for &gamma in &cfg.gammas {
                let (mapping, _) = build_threshold_mapping(&dist, m, gamma)?;
                let constructed = divergence(curve, &dist, &apply_mapping(&mapping, &dist)?)?;
                let lower =
                    if curve.is_nonincreasing() { Some(converse_bound(&spec, curve, m, gamma)?.value) } else { None };
                let ok = lower.is_none_or(|l| within(l, best)) && within(best, constructed);
                if !ok {
                    out.violations
                        .push(format!("oracle outside [converse, construction]: {curve} M={m} gamma={gamma}"));
                }
                writeln!(csv, "{hash},{},{m},{gamma},{},{best},{constructed},{ok},", curve.name(), opt(lower)).unwrap();
            }
        }
    }
    out.push("oracle.csv", csv);

    let mut sets = String::from("instance,delta,greedy,bruteforce,ok,error\n");
    for &delta in &cfg.smooth {
        let greedy = smooth_max_entropy(&dist, delta)?.set.len();
        match min_set_bruteforce(&dist, delta) {
            Ok(brute) => {
                if brute != greedy {
                    out.violations.push(format!("greedy set {greedy} != minimum {brute} at delta={delta}"));
                }
                writeln!(sets, "{hash},{delta},{greedy},{brute},{},", brute == greedy).unwrap();
            }
            Err(e @ Error::CapExceeded { .. }) => writeln!(sets, "{hash},{delta},{greedy},,,{e}").unwrap(),
            Err(e) => return Err(e),
        }
    }
    out.push("min_set.csv", sets);
    Ok(out)
}

pub fn cmd_oracle(cfg: &RunConfig, opts: &Options) -> Result<CommandOutput> {
    if opts.exact {
        oracle_with::<BigRational>(cfg, opts)
    } else {
        oracle_with::<f64>(cfg, opts)
    }
}

fn rdp_with<M: Mass>(cfg: &RunConfig, opts: &Options) -> Result<CommandOutput> {
    let SourceVariant::Iid { pmf } = &cfg.source.variant else {
        return Err(Error::InvalidModel("the rate-distortion leg needs an iid source".into()));
    };
    let pmf: Vec<f64> = pmf.iter().map(crate::mass::rational_to_f64).collect();
    let dist: AtomicDistribution<M> = expand(&cfg.source, opts.cap)?;
    let mut reports: Vec<RdpBoundReport> = Vec::new();
    for curve in cfg.curves.iter().filter(|c| c.is_nonincreasing()) {
        for &delta in &cfg.deltas {
            for &d in &cfg.distortion_levels {
                reports.push(rdp_report(&pmf, &dist, curve, delta, &cfg.distortion, d)?);
            }
        }
    }
    let mut out = CommandOutput::default();
    let mut csv = String::from("curve,delta,d,lower,upper,d_threshold,rd,k_f\n");
    for r in &mut reports {
        if r.upper.is_some_and(|u| u + 1e-12 < r.lower) {
            out.violations.push(format!("lower {} above upper {:?} at D={} delta={}", r.lower, r.upper, r.d, r.delta));
        }
        r.lower = opts.units.rate(r.lower);
        r.upper = r.upper.map(|u| opts.units.rate(u));
        r.rd_value = opts.units.rate(r.rd_value);
        r.k_f_value = opts.units.rate(r.k_f_value);
        writeln!(
            csv,
            "{},{},{},{},{},{},{},{}",
            r.curve,
            r.delta,
            r.d,
            r.lower,
            opt(r.upper),
            r.d_threshold,
            r.rd_value,
            r.k_f_value
        )
        .unwrap();
    }
    out.push("rdp.csv", csv);
    out.push("rdp.json", json(&reports));
    Ok(out)
}

pub fn cmd_rdp(cfg: &RunConfig, opts: &Options) -> Result<CommandOutput> {
    if opts.exact {
        rdp_with::<BigRational>(cfg, opts)
    } else {
        rdp_with::<f64>(cfg, opts)
    }
}

pub fn cmd_sweep(cfg: &RunConfig, opts: &Options) -> Result<CommandOutput> {
    let mut csv = String::from("curve,n,delta,nu,quantity,value\n");
    for curve in cfg.curves.iter().filter(|c| c.is_nonincreasing()) {
        let deltas: Vec<f64> = cfg.deltas.iter().copied().filter(|&d| d < curve.f_at_zero()).collect();
        for row in rate_convergence_sweep(&cfg.source, &cfg.n_grid, curve, &deltas, &cfg.nus, opts.cap)? {
            writeln!(
                csv,
                "{},{},{},{},{},{}",
                row.curve,
                row.n,
                row.delta,
                row.nu,
                row.quantity,
                opts.units.rate(row.value)
            )
            .unwrap();
        }
    }
    let mut out = CommandOutput::default();
    out.push("sweep.csv", csv);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const BERN: &str = "variant = iid\nn = 2\npmf = 3/4 1/4\ncurves = variational, hellinger, reverse_kl\n\
                        delta = 0.1 0.3\ngamma = 0.05 0.5\nsmooth = 0.1 0.35\nd = 0.05 0.2\neps = 0.5\n";

    #[test]
    fn analyze_fair_coin_has_one_level() {
        let cfg = RunConfig::parse("variant = iid\nn = 3\npmf = 1/2 1/2\n").unwrap();
        let out = cmd_analyze(&cfg, &Options::default()).unwrap();
        let csv = &out.artifacts[0].contents;
        assert_eq!(csv.lines().count(), 2);
        assert!(out.violations.is_empty());
    }

    #[test]
    fn analyze_bern_quarter_has_three_levels_in_bits() {
        let cfg = RunConfig::parse(BERN).unwrap();
        let opts = Options { units: Units::Bits, ..Options::default() };
        let out = cmd_analyze(&cfg, &opts).unwrap();
        let csv = &out.artifacts[0].contents;
        assert_eq!(csv.lines().count(), 4);
        assert!(csv.lines().nth(3).unwrap().starts_with('2'));
    }

    #[test]
    fn construct_and_oracle_have_no_violations() {
        let cfg = RunConfig::parse(BERN).unwrap();
        for exact in [true, false] {
            let opts = Options { exact, ..Options::default() };
            let out = cmd_construct(&cfg, &opts).unwrap();
            assert!(out.violations.is_empty(), "{:?}", out.violations);
            let out = cmd_oracle(&cfg, &opts).unwrap();
            assert!(out.violations.is_empty(), "{:?}", out.violations);
        }
    }

    #[test]
    fn rdp_and_sweep_run() {
        let cfg = RunConfig::parse(&format!("{BERN}n_grid = 1 2 4\n")).unwrap();
        let out = cmd_rdp(&cfg, &Options::default()).unwrap();
        assert!(out.violations.is_empty(), "{:?}", out.violations);
        let out = cmd_sweep(&cfg, &Options::default()).unwrap();
        assert!(out.artifacts[0].contents.lines().count() > 1);
    }

    #[test]
    fn reruns_are_identical() {
        let cfg = RunConfig::parse(BERN).unwrap();
        let a = cmd_construct(&cfg, &Options::default()).unwrap().artifacts;
        let b = cmd_construct(&cfg, &Options::default()).unwrap().artifacts;
        assert_eq!(a, b);
    }
}
