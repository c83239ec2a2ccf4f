//! f-divergences between atomic distributions.
//!
//! `D_f(P || Q) = Σ_z Q(z) f(P(z) / Q(z))` with the zero conventions
//!
//! * `Q = P = 0` contributes nothing,
//! * `Q = 0 < P = a` contributes `a · lim_{u→∞} f(u)/u`,
//! * `Q > 0 = P` contributes `Q · lim_{t→0} f(t)`.
//!
//! Infinite values are returned as `f64::INFINITY`, not as errors, so sweeps
//! that include unbounded curves keep going.
//!
//! | name          | f(t)                     | f(0) | f^{-1}(T)  |
//! |---------------|--------------------------|------|------------|
//! | `variational` | (1 − t)^+                | 1    | 1 − T      |
//! | `reverse_kl`  | −log t                   | ∞    | e^{−T}     |
//! | `hellinger`   | 1 − √t                   | 1    | (1 − T)²   |
//! | `e_gamma:γ`   | (γ − t)^+ + 1 − γ, γ ≥ 1 | 1    | 1 − T      |
//! | `kl`          | t log t                  | 0    | (not monotone) |
//!
//! All curves are continuous on `(0, ∞)`.

use std::fmt;

use num_rational::BigRational;
use num_traits::One;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mass::{parse_rational, rational_to_f64, Mass};
use crate::probability::AtomicDistribution;

#[derive(Debug, Clone, PartialEq)]
pub enum Curve {
    Variational,
    ReverseKl,
    Hellinger,
    /// `E_γ` in the `(γ − t)^+ + 1 − γ` form.
    EGamma {
        gamma: BigRational,
    },
    Kl,
}

impl Curve {
    /// Parses `variational`, `reverse_kl`, `hellinger`, `e_gamma:γ` or `kl`.
    pub fn parse(name: &str) -> Result<Self> {
        let name = name.trim();
        match name {
            "variational" => Ok(Curve::Variational),
            "reverse_kl" => Ok(Curve::ReverseKl),
            "hellinger" => Ok(Curve::Hellinger),
            "kl" => Ok(Curve::Kl),
            _ => {
                let gamma = name.strip_prefix("e_gamma:").ok_or_else(|| Error::UnknownCurve(name.to_string()))?;
                let gamma = parse_rational(gamma).map_err(|_| Error::UnknownCurve(name.to_string()))?;
                Curve::e_gamma(gamma)
            }
        }
    }

    pub fn e_gamma(gamma: BigRational) -> Result<Self> {
        if gamma < <BigRational as One>::one() {
            return Err(Error::OutOfRange {
                what: "E_gamma parameter (needs >= 1)".into(),
                value: rational_to_f64(&gamma),
            });
        }
        Ok(Curve::EGamma { gamma })
    }

    /// The curves that satisfy the monotone-decreasing family conditions.
    pub fn admissible_builtins() -> Vec<Curve> {
        vec![
            Curve::Variational,
            Curve::ReverseKl,
            Curve::Hellinger,
            Curve::EGamma { gamma: BigRational::from_integer(2.into()) },
        ]
    }

    pub fn name(&self) -> String {
        match self {
            Curve::Variational => "variational".into(),
            Curve::ReverseKl => "reverse_kl".into(),
            Curve::Hellinger => "hellinger".into(),
            Curve::EGamma { gamma } => format!("e_gamma:{gamma}"),
            Curve::Kl => "kl".into(),
        }
    }

    pub fn gamma(&self) -> Option<f64> {
        match self {
            Curve::EGamma { gamma } => Some(rational_to_f64(gamma)),
            _ => None,
        }
    }

    /// `f(t)` for `t >= 0`; `t = 0` gives the limit `f(0)`.
    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return self.f_at_zero();
        }
        match self {
            Curve::Variational => (1.0 - t).max(0.0),
            Curve::ReverseKl => -t.ln(),
            Curve::Hellinger => 1.0 - t.sqrt(),
            Curve::EGamma { gamma } => {
                let g = rational_to_f64(gamma);
                (g - t).max(0.0) + 1.0 - g
            }
            Curve::Kl => t * t.ln(),
        }
    }

    /// `f(e^{-x})` evaluated without forming `e^{-x}` where that would lose
    /// precision or underflow.
    pub fn eval_exp_neg(&self, x: f64) -> f64 {
        match self {
            Curve::Variational | Curve::EGamma { .. } if x >= 0.0 => -(-x).exp_m1(),
            Curve::ReverseKl => x,
            Curve::Hellinger => -(-x / 2.0).exp_m1(),
            Curve::Kl => -x * (-x).exp(),
            _ => self.eval((-x).exp()),
        }
    }

    /// Exact `f(t)` for the piecewise-linear curves.
    pub fn eval_exact<M: Mass>(&self, t: &M) -> Option<M> {
        match self {
            Curve::Variational => Some(M::one().sub(t).max_of(&M::zero())),
            Curve::EGamma { gamma } => {
                let g = M::from_rational(gamma);
                Some(g.sub(t).max_of(&M::zero()).add(&M::one()).sub(&g))
            }
            _ => None,
        }
    }

    /// `lim_{t→0} f(t)`.
    pub fn f_at_zero(&self) -> f64 {
        match self {
            Curve::Variational | Curve::Hellinger | Curve::EGamma { .. } => 1.0,
            Curve::ReverseKl => f64::INFINITY,
            Curve::Kl => 0.0,
        }
    }

    /// `lim_{u→∞} f(u)/u`.
    pub fn slope_at_infinity(&self) -> f64 {
        match self {
            Curve::Kl => f64::INFINITY,
            _ => 0.0,
        }
    }

    /// Analytic truth of the three admissibility conditions (monotone
    /// decrease, `f(e^{-nb})/e^{na} → 0`, `0·f(a/0) = 0`).
    pub fn analytic_conditions(&self) -> [bool; 3] {
        match self {
            Curve::Kl => [false, true, false],
            _ => [true, true, true],
        }
    }

    pub fn is_nonincreasing(&self) -> bool {
        self.analytic_conditions()[0]
    }

    /// `f^{-1}(T) = min { t : f(t) = T }` for `0 <= T < f(0)`.
    pub fn inverse(&self, level: f64) -> Result<f64> {
        self.check_inverse_range(level)?;
        Ok(match self {
            Curve::Variational | Curve::EGamma { .. } => 1.0 - level,
            Curve::ReverseKl => (-level).exp(),
            Curve::Hellinger => (1.0 - level) * (1.0 - level),
            Curve::Kl => unreachable!("rejected by check_inverse_range"),
        })
    }

    /// Bisection on `(0, 1]` to `1e-12`, for cross-checking the analytic
    /// inverses. Returns the smallest `t` reaching the level when `f` is flat.
    pub fn inverse_numeric(&self, level: f64) -> Result<f64> {
        self.check_inverse_range(level)?;
        bisect_nonincreasing(|t| self.eval(t), level)
    }

    fn check_inverse_range(&self, level: f64) -> Result<()> {
        if !self.is_nonincreasing() {
            return Err(Error::NotAdmissible(self.name()));
        }
        if !(level >= 0.0 && level < self.f_at_zero()) {
            return Err(Error::OutOfRange { what: format!("f^-1 of {}", self.name()), value: level });
        }
        Ok(())
    }
}

impl fmt::Display for Curve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Smallest `t ∈ (0, 1]` with `f(t) <= level` for nonincreasing `f`.
pub fn bisect_nonincreasing(f: impl Fn(f64) -> f64, level: f64) -> Result<f64> {
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    if f(hi) > level {
        return Err(Error::OutOfRange { what: "bisection level".into(), value: level });
    }
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if f(mid) <= level {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

fn term(curve: &Curve, p: f64, q: f64, ratio: impl FnOnce() -> f64) -> f64 {
    match (p > 0.0, q > 0.0) {
        (false, false) => 0.0,
        (true, false) => {
            let slope = curve.slope_at_infinity();
            if slope == 0.0 {
                0.0
            } else {
                p * slope
            }
        }
        (false, true) => {
            let f0 = curve.f_at_zero();
            if f0.is_infinite() {
                f0
            } else {
                q * f0
            }
        }
        (true, true) => q * curve.eval(ratio()),
    }
}

/// `D_f(p || q)` over two mass vectors on the same outcome set.
pub fn divergence_slices<M: Mass>(curve: &Curve, p: &[M], q: &[M]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch(p.len(), q.len()));
    }
    let mut total = 0.0;
    for (pz, qz) in p.iter().zip(q) {
        let (pf, qf) = (pz.to_f64(), qz.to_f64());
        let pf = if pf == 0.0 && !pz.is_zero() { f64::MIN_POSITIVE } else { pf };
        let qf = if qf == 0.0 && !qz.is_zero() { f64::MIN_POSITIVE } else { qf };
        total += term(curve, pf, qf, || pz.div(qz).to_f64());
    }
    Ok(total)
}

/// `D_f(P || Q)`; `p` is the source, `q` the approximating distribution.
pub fn divergence<M: Mass>(curve: &Curve, p: &AtomicDistribution<M>, q: &AtomicDistribution<M>) -> Result<f64> {
    divergence_slices(curve, p.masses(), q.masses())
}

/// Exact `D_f` for piecewise-linear curves (variational, `E_γ`), evaluated
/// term by term with the zero conventions. `None` for the other curves.
pub fn divergence_exact<M: Mass>(curve: &Curve, p: &[M], q: &[M]) -> Result<Option<M>> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch(p.len(), q.len()));
    }
    if curve.eval_exact(&M::one()).is_none() {
        return Ok(None);
    }
    let mut total = M::zero();
    for (pz, qz) in p.iter().zip(q) {
        let contribution = match (pz.is_zero(), qz.is_zero()) {
            (true, true) => M::zero(),
            // slope at infinity is zero for both piecewise-linear curves
            (false, true) => M::zero(),
            (true, false) => qz.mul(&curve.eval_exact(&M::zero()).expect("piecewise-linear")),
            (false, false) => qz.mul(&curve.eval_exact(&pz.div(qz)).expect("piecewise-linear")),
        };
        total = total.add(&contribution);
    }
    Ok(Some(total))
}

/// `Σ_{p > γq} (p − γq)`, the direct `E_γ` sum.
pub fn e_gamma_direct<M: Mass>(gamma: &BigRational, p: &[M], q: &[M]) -> Result<M> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch(p.len(), q.len()));
    }
    let g = M::from_rational(gamma);
    Ok(p.iter().zip(q).fold(M::zero(), |acc, (pz, qz)| {
        let excess = pz.sub(&g.mul(qz));
        if excess.cmp_mass(&M::zero()).is_gt() {
            acc.add(&excess)
        } else {
            acc
        }
    }))
}

/// `½ Σ |p − q|`.
pub fn half_l1<M: Mass>(p: &[M], q: &[M]) -> Result<M> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch(p.len(), q.len()));
    }
    let sum = p.iter().zip(q).fold(M::zero(), |acc, (a, b)| {
        let d = if a.cmp_mass(b).is_ge() { a.sub(b) } else { b.sub(a) };
        acc.add(&d)
    });
    Ok(sum.div(&M::from_count(2)))
}

/// Grid used by [`check_conditions`].
#[derive(Debug, Clone)]
pub struct GridSpec {
    pub t_grid: Vec<f64>,
    pub ab_grid: Vec<(f64, f64)>,
    pub n_grid: Vec<u32>,
    pub c2_threshold: f64,
    pub slope_probe: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        let t_grid = (1..=400).map(|k| k as f64 * 0.01).collect();
        let levels = [0.1, 0.5, 1.0, 2.0];
        let ab_grid = levels.iter().flat_map(|&a| levels.iter().map(move |&b| (a, b))).collect();
        let n_grid = (1..=20).map(|k| k * 50).collect();
        GridSpec { t_grid, ab_grid, n_grid, c2_threshold: 1e-6, slope_probe: 1e12 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct C2Witness {
    pub a: f64,
    pub b: f64,
    pub n: u32,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub curve: String,
    pub c1: bool,
    pub c2: bool,
    /// Worst `(a, b)` at the largest grid `n`.
    pub c2_witness: Option<C2Witness>,
    pub c3: bool,
    /// Whether the numeric checks agree with the analytic flags.
    pub numeric_agrees: bool,
}

/// Numeric checks of the three conditions. The analytic flags are reported;
/// the numeric results only have to agree with them.
pub fn check_conditions(curve: &Curve, grid: &GridSpec) -> ConditionReport {
    let mut ts = grid.t_grid.clone();
    ts.sort_by(f64::total_cmp);
    let c1_numeric = ts.windows(2).all(|w| curve.eval(w[0]) >= curve.eval(w[1]));

    let mut c2_numeric = true;
    let mut witness: Option<C2Witness> = None;
    if let Some(&n_max) = grid.n_grid.iter().max() {
        let mut n_sorted = grid.n_grid.clone();
        n_sorted.sort_unstable();
        for &(a, b) in &grid.ab_grid {
            let ratio = |n: u32| (curve.eval_exp_neg(n as f64 * b) * (-(n as f64) * a).exp()).abs();
            let tail: Vec<f64> = n_sorted.iter().rev().take(3).rev().map(|&n| ratio(n)).collect();
            let decreasing = tail.windows(2).all(|w| w[1] <= w[0]);
            let last = ratio(n_max);
            if !(decreasing && last < grid.c2_threshold) {
                c2_numeric = false;
            }
            if witness.as_ref().is_none_or(|w| last > w.value) {
                witness = Some(C2Witness { a, b, n: n_max, value: last });
            }
        }
    }

    let u = grid.slope_probe;
    let c3_numeric = (curve.eval(u) / u).abs() < 1e-6;

    let [c1, c2, c3] = curve.analytic_conditions();
    ConditionReport {
        curve: curve.name(),
        c1,
        c2,
        c2_witness: witness,
        c3,
        numeric_agrees: c1 == c1_numeric && c2 == c2_numeric && c3 == c3_numeric,
    }
}

/// `Σ b f(a/b) >= (Σ b) f(Σa / Σb)` with the zero conventions.
pub fn log_sum_check(curve: &Curve, a: &[f64], b: &[f64]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let lhs: f64 = a.iter().zip(b).map(|(&x, &y)| term(curve, x, y, || x / y)).sum();
    let (sa, sb): (f64, f64) = (a.iter().sum(), b.iter().sum());
    let rhs = term(curve, sa, sb, || sa / sb);
    if lhs.is_infinite() && lhs > 0.0 {
        return true;
    }
    lhs >= rhs - 1e-12 * (1.0 + rhs.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn all_curves() -> Vec<Curve> {
        vec![
            Curve::Variational,
            Curve::ReverseKl,
            Curve::Hellinger,
            Curve::e_gamma(q(1, 1)).unwrap(),
            Curve::e_gamma(q(2, 1)).unwrap(),
            Curve::e_gamma(q(5, 1)).unwrap(),
            Curve::Kl,
        ]
    }

    #[test]
    fn names_round_trip() {
        for c in all_curves() {
            assert_eq!(Curve::parse(&c.name()).unwrap(), c);
        }
        assert_eq!(Curve::parse("e_gamma:1.5").unwrap(), Curve::EGamma { gamma: q(3, 2) });
        assert!(matches!(Curve::parse("chi2"), Err(Error::UnknownCurve(_))));
        assert!(Curve::parse("e_gamma:0.5").is_err());
    }

    #[test]
    fn f_of_one_is_zero() {
        for c in all_curves() {
            assert_eq!(c.eval(1.0), 0.0, "{c}");
        }
    }

    #[test]
    fn divergence_examples() {
        let v = divergence_slices(&Curve::Variational, &[1.0, 0.0], &[0.5, 0.5]).unwrap();
        assert_eq!(v, 0.5);
        let h = divergence_slices(&Curve::Hellinger, &[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert_eq!(h, 1.0);
        let e1 = divergence_slices(&Curve::e_gamma(q(1, 1)).unwrap(), &[0.7, 0.3], &[0.5, 0.5]).unwrap();
        assert!((e1 - 0.2).abs() < 1e-15);
        let tv = divergence_slices(&Curve::Variational, &[0.7, 0.3], &[0.5, 0.5]).unwrap();
        assert!((e1 - tv).abs() < 1e-15);
        for c in all_curves() {
            let p = [0.2, 0.3, 0.5];
            assert_eq!(divergence_slices(&c, &p, &p).unwrap(), 0.0, "{c}");
        }
    }

    #[test]
    fn infinite_values_are_representable() {
        let r = divergence_slices(&Curve::ReverseKl, &[1.0, 0.0], &[0.5, 0.5]).unwrap();
        assert_eq!(r, f64::INFINITY);
        let kl = divergence_slices(&Curve::Kl, &[0.5, 0.5], &[1.0, 0.0]).unwrap();
        assert_eq!(kl, f64::INFINITY);
        assert!(matches!(divergence_slices(&Curve::Kl, &[1.0], &[0.5, 0.5]), Err(Error::DimensionMismatch(1, 2))));
    }

    #[test]
    fn exact_piecewise_divergences() {
        let p = [q(7, 10), q(3, 10), q(0, 1)];
        let r = [q(1, 2), q(0, 1), q(1, 2)];
        let tv = divergence_exact(&Curve::Variational, &p, &r).unwrap().unwrap();
        assert_eq!(tv, half_l1(&p, &r).unwrap());
        assert_eq!(tv, q(1, 2));
        let g = q(2, 1);
        let e = divergence_exact(&Curve::e_gamma(g.clone()).unwrap(), &p, &r).unwrap().unwrap();
        assert_eq!(e, e_gamma_direct(&g, &p, &r).unwrap());
        assert!(divergence_exact(&Curve::Hellinger, &p, &r).unwrap().is_none());
    }

    #[test]
    fn inverse_examples() {
        let delta = 0.3;
        assert!((1.0 - Curve::ReverseKl.inverse(delta).unwrap() - (1.0 - (-delta).exp())).abs() < 1e-15);
        assert!((1.0 - Curve::Hellinger.inverse(delta).unwrap() - (2.0 * delta - delta * delta)).abs() < 1e-15);
        assert_eq!(Curve::Variational.inverse(0.0).unwrap(), 1.0);
        assert!(matches!(Curve::Variational.inverse(1.0), Err(Error::OutOfRange { .. })));
        assert!(matches!(Curve::Hellinger.inverse(-0.1), Err(Error::OutOfRange { .. })));
        assert!(matches!(Curve::Kl.inverse(0.1), Err(Error::NotAdmissible(_))));
        assert!(Curve::ReverseKl.inverse(50.0).is_ok());
    }

    #[test]
    fn analytic_inverse_matches_bisection() {
        for c in Curve::admissible_builtins() {
            for k in 0..20 {
                let level = k as f64 * 0.049;
                let a = c.inverse(level).unwrap();
                let b = c.inverse_numeric(level).unwrap();
                assert!((a - b).abs() < 1e-11, "{c} level {level}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn inverse_undoes_eval_on_decreasing_range() {
        for c in Curve::admissible_builtins() {
            for k in 1..=100 {
                let t = k as f64 / 100.0;
                let back = c.inverse(c.eval(t)).unwrap();
                assert!((back - t).abs() < 1e-10, "{c} t={t}");
            }
        }
    }

    #[test]
    fn condition_reports() {
        let grid = GridSpec::default();
        for c in [
            Curve::Variational,
            Curve::ReverseKl,
            Curve::Hellinger,
            Curve::e_gamma(q(1, 1)).unwrap(),
            Curve::e_gamma(q(2, 1)).unwrap(),
        ] {
            let r = check_conditions(&c, &grid);
            assert!(r.c1 && r.c2 && r.c3, "{c}");
            assert!(r.numeric_agrees, "{c}: {r:?}");
        }
        let kl = check_conditions(&Curve::Kl, &grid);
        assert!(!kl.c1);
        assert!(!kl.c3);
        assert!(kl.numeric_agrees, "{kl:?}");
    }

    #[test]
    fn log_sum_examples() {
        for c in all_curves() {
            assert!(log_sum_check(&c, &[0.3, 0.2], &[0.3, 0.2]));
        }
        assert!(log_sum_check(&Curve::Hellinger, &[0.1, 0.3], &[0.2, 0.2]));
        let lhs = 0.2 * (1.0 - 0.5f64.sqrt()) + 0.2 * (1.0 - 1.5f64.sqrt());
        let rhs = 0.4 * (1.0 - 1.0f64.sqrt());
        assert!(lhs >= rhs);
    }
}
