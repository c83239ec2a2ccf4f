//! Finite-blocklength sources and the exact distributions they induce on `X^n`.
//!
//! Outcomes are enumerated in lexicographic order of their symbol strings,
//! first symbol most significant, so outcome `id` is the base-`alphabet`
//! number spelled by its symbols.

use std::cmp::Ordering;

use num_rational::BigRational;
use num_traits::{One, Signed};

use crate::config::Entries;
use crate::error::{Error, Result};
use crate::mass::{parse_rational, Mass};

/// Default cap on `alphabet_size^n`.
pub const DEFAULT_ATOM_CAP: u128 = 1 << 24;

const FLOAT_SUM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub id: usize,
    pub symbols: Vec<usize>,
}

impl Outcome {
    pub fn from_id(id: usize, n: usize, alphabet_size: usize) -> Self {
        let mut symbols = vec![0; n];
        let mut rest = id;
        for slot in symbols.iter_mut().rev() {
            *slot = rest % alphabet_size;
            rest /= alphabet_size;
        }
        Outcome { id, symbols }
    }

    pub fn from_symbols(symbols: Vec<usize>, alphabet_size: usize) -> Self {
        let id = symbols.iter().fold(0usize, |acc, &s| acc * alphabet_size + s);
        Outcome { id, symbols }
    }
}

/// An explicit pmf over `X^n`, indexed by [`Outcome::id`].
#[derive(Debug, Clone, PartialEq)]
pub struct AtomicDistribution<M> {
    masses: Vec<M>,
    n: usize,
    alphabet_size: usize,
}

impl<M: Mass> AtomicDistribution<M> {
    pub fn new(masses: Vec<M>, n: usize, alphabet_size: usize) -> Result<Self> {
        if n == 0 || alphabet_size == 0 {
            return Err(Error::InvalidDistribution("n and alphabet size must be positive".into()));
        }
        let expected = checked_outcomes(alphabet_size, n)
            .ok_or_else(|| Error::InvalidDistribution("outcome space overflows".into()))?;
        if masses.len() as u128 != expected {
            return Err(Error::InvalidDistribution(format!(
                "{} masses for an outcome space of {expected}",
                masses.len()
            )));
        }
        if let Some(pos) = masses.iter().position(|m| m.is_negative()) {
            return Err(Error::InvalidDistribution(format!("negative mass at outcome {pos}")));
        }
        let total = M::sum(&masses);
        let normalized = if M::EXACT { total == M::one() } else { (total.to_f64() - 1.0).abs() <= FLOAT_SUM_TOLERANCE };
        if !normalized {
            return Err(Error::InvalidDistribution(format!("masses sum to {total}, not 1")));
        }
        Ok(AtomicDistribution { masses, n, alphabet_size })
    }

    /// A single-letter distribution (`n = 1`, alphabet = number of masses).
    pub fn from_masses(masses: Vec<M>) -> Result<Self> {
        let len = masses.len();
        Self::new(masses, 1, len)
    }

    pub fn masses(&self) -> &[M] {
        &self.masses
    }

    pub fn mass(&self, id: usize) -> &M {
        &self.masses[id]
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn outcome(&self, id: usize) -> Outcome {
        Outcome::from_id(id, self.n, self.alphabet_size)
    }

    pub fn support_size(&self) -> usize {
        self.masses.iter().filter(|m| !m.is_zero()).count()
    }

    /// Ids with positive mass, ascending.
    pub fn support(&self) -> Vec<usize> {
        (0..self.masses.len()).filter(|&i| !self.masses[i].is_zero()).collect()
    }

    pub fn to_float(&self) -> AtomicDistribution<f64> {
        AtomicDistribution {
            masses: self.masses.iter().map(Mass::to_f64).collect(),
            n: self.n,
            alphabet_size: self.alphabet_size,
        }
    }

    /// Outcome ids ordered by strictly descending mass, ties by ascending id.
    pub fn sort_descending(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.masses.len()).collect();
        order.sort_by(|&a, &b| descending(&self.masses, a, b));
        order
    }

    /// `(1/n) log(1/P(x))` in nats per symbol.
    pub fn self_information(&self, id: usize) -> Result<f64> {
        let mass = self.masses.get(id).ok_or(Error::DimensionMismatch(id, self.masses.len()))?;
        if mass.is_zero() {
            return Err(Error::ZeroMassOutcome(id));
        }
        Ok(-mass.ln() / self.n as f64)
    }

    /// Builds a distribution that is known to be valid (used for pushforwards
    /// of valid distributions).
    pub(crate) fn from_parts(masses: Vec<M>, n: usize, alphabet_size: usize) -> Self {
        debug_assert_eq!(Some(masses.len() as u128), checked_outcomes(alphabet_size, n));
        AtomicDistribution { masses, n, alphabet_size }
    }
}

pub(crate) fn checked_outcomes(alphabet_size: usize, n: usize) -> Option<u128> {
    let mut total: u128 = 1;
    for _ in 0..n {
        total = total.checked_mul(alphabet_size as u128)?;
    }
    Some(total)
}

#[derive(Debug, Clone, PartialEq)]
pub enum SourceVariant {
    Iid { pmf: Vec<BigRational> },
    Markov { initial: Vec<BigRational>, transition: Vec<Vec<BigRational>> },
    Mixture { components: Vec<(BigRational, Vec<BigRational>)> },
}

/// A general source instantiated at blocklength `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceModel {
    pub variant: SourceVariant,
    pub alphabet_size: usize,
    pub n: usize,
}

impl SourceModel {
    pub fn iid(pmf: Vec<BigRational>, n: usize) -> Result<Self> {
        let model = SourceModel { alphabet_size: pmf.len(), variant: SourceVariant::Iid { pmf }, n };
        model.validate()?;
        Ok(model)
    }

    pub fn markov(initial: Vec<BigRational>, transition: Vec<Vec<BigRational>>, n: usize) -> Result<Self> {
        let model =
            SourceModel { alphabet_size: initial.len(), variant: SourceVariant::Markov { initial, transition }, n };
        model.validate()?;
        Ok(model)
    }

    pub fn mixture(components: Vec<(BigRational, Vec<BigRational>)>, n: usize) -> Result<Self> {
        let alphabet_size = components.first().map(|c| c.1.len()).unwrap_or(0);
        let model = SourceModel { alphabet_size, variant: SourceVariant::Mixture { components }, n };
        model.validate()?;
        Ok(model)
    }

    /// `Bern(p)` with `P(1) = p`.
    pub fn bernoulli(p: BigRational, n: usize) -> Result<Self> {
        let q = <BigRational as One>::one() - &p;
        Self::iid(vec![q, p], n)
    }

    pub fn with_n(&self, n: usize) -> Self {
        SourceModel { n, ..self.clone() }
    }

    /// Rows the model is built from, for validation.
    fn rows(&self) -> Vec<(&'static str, &[BigRational])> {
        match &self.variant {
            SourceVariant::Iid { pmf } => vec![("pmf", pmf.as_slice())],
            SourceVariant::Markov { initial, transition } => {
                let mut rows = vec![("initial", initial.as_slice())];
                rows.extend(transition.iter().map(|r| ("transition row", r.as_slice())));
                rows
            }
            SourceVariant::Mixture { components } => {
                components.iter().map(|(_, pmf)| ("component pmf", pmf.as_slice())).collect()
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: String| Err(Error::InvalidModel(msg));
        if self.n == 0 {
            return invalid("blocklength n must be at least 1".into());
        }
        if self.alphabet_size == 0 {
            return invalid("alphabet must be nonempty".into());
        }
        for (what, row) in self.rows() {
            if row.len() != self.alphabet_size {
                return invalid(format!("{what} has {} entries, alphabet has {}", row.len(), self.alphabet_size));
            }
            if row.iter().any(Signed::is_negative) {
                return invalid(format!("{what} has a negative entry"));
            }
            if !approximately_one(&row.iter().sum::<BigRational>()) {
                return invalid(format!("{what} does not sum to 1"));
            }
        }
        match &self.variant {
            SourceVariant::Markov { transition, .. } if transition.len() != self.alphabet_size => {
                return invalid(format!(
                    "transition matrix has {} rows, alphabet has {}",
                    transition.len(),
                    self.alphabet_size
                ));
            }
            SourceVariant::Mixture { components } => {
                if components.is_empty() {
                    return invalid("mixture needs at least one component".into());
                }
                if components.iter().any(|(w, _)| !w.is_positive()) {
                    return invalid("mixture weights must be positive".into());
                }
                let total: BigRational = components.iter().map(|(w, _)| w).sum();
                if !approximately_one(&total) {
                    return invalid("mixture weights do not sum to 1".into());
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// True when every row sums to exactly 1, so exact arithmetic is sound.
    pub fn is_exactly_normalized(&self) -> bool {
        let rows_exact = self.rows().iter().all(|(_, row)| row.iter().sum::<BigRational>().is_one());
        let weights_exact = match &self.variant {
            SourceVariant::Mixture { components } => components.iter().map(|(w, _)| w).sum::<BigRational>().is_one(),
            _ => true,
        };
        rows_exact && weights_exact
    }

    pub fn outcome_count(&self) -> Option<u128> {
        checked_outcomes(self.alphabet_size, self.n)
    }

    /// Parses the source keys of a run configuration:
    ///
    /// ```text
    /// variant = iid | markov | mixture
    /// alphabet = 2            # optional, inferred from the first row
    /// n = 4
    /// pmf = 3/4 1/4           # iid
    /// initial = 1/2 1/2       # markov
    /// transition = 9/10 1/10  # markov, one line per row
    /// component = 1/2 : 9/10 1/10   # mixture, one line per component
    /// ```
    pub fn from_entries(entries: &Entries) -> Result<Self> {
        let (variant_line, variant) = entries.require("variant")?;
        let (n_line, n_text) = entries.require("n")?;
        let n: usize = n_text.trim().parse().map_err(|_| Error::Config {
            line: n_line,
            msg: format!("n must be a positive integer, got `{n_text}`"),
        })?;
        let row = |line: usize, text: &str| -> Result<Vec<BigRational>> {
            text.split_whitespace()
                .map(|tok| parse_rational(tok).map_err(|e| Error::Config { line, msg: e.to_string() }))
                .collect()
        };
        let model_variant = match variant.trim() {
            "iid" => {
                let (line, text) = entries.require("pmf")?;
                SourceVariant::Iid { pmf: row(line, text)? }
            }
            "markov" => {
                let (line, text) = entries.require("initial")?;
                let initial = row(line, text)?;
                let transition =
                    entries.all("transition").map(|(line, text)| row(line, text)).collect::<Result<Vec<_>>>()?;
                SourceVariant::Markov { initial, transition }
            }
            "mixture" => {
                let components = entries
                    .all("component")
                    .map(|(line, text)| {
                        let (weight, pmf) = text
                            .split_once(':')
                            .ok_or_else(|| Error::Config { line, msg: "component must be `weight : pmf...`".into() })?;
                        let weight = parse_rational(weight).map_err(|e| Error::Config { line, msg: e.to_string() })?;
                        Ok((weight, row(line, pmf)?))
                    })
                    .collect::<Result<Vec<_>>>()?;
                SourceVariant::Mixture { components }
            }
            other => {
                return Err(Error::Config {
                    line: variant_line,
                    msg: format!("unknown variant `{other}` (expected iid, markov or mixture)"),
                })
            }
        };
        let inferred = match &model_variant {
            SourceVariant::Iid { pmf } => pmf.len(),
            SourceVariant::Markov { initial, .. } => initial.len(),
            SourceVariant::Mixture { components } => components.first().map(|c| c.1.len()).unwrap_or(0),
        };
        let alphabet_size = match entries.get("alphabet") {
            Some((line, text)) => text.trim().parse().map_err(|_| Error::Config {
                line,
                msg: format!("alphabet must be a positive integer, got `{text}`"),
            })?,
            None => inferred,
        };
        let model = SourceModel { variant: model_variant, alphabet_size, n };
        model.validate().map_err(|e| Error::Config { line: variant_line, msg: e.to_string() })?;
        Ok(model)
    }
}

fn approximately_one(total: &BigRational) -> bool {
    total.is_one() || (Mass::to_f64(total) - 1.0).abs() <= FLOAT_SUM_TOLERANCE
}

/// Materializes `P_{X^n}` for the model.
pub fn expand<M: Mass>(model: &SourceModel, cap: u128) -> Result<AtomicDistribution<M>> {
    model.validate()?;
    let atoms = model.outcome_count().unwrap_or(u128::MAX);
    if atoms > cap {
        return Err(Error::CapExceeded { atoms, cap });
    }
    let convert = |row: &[BigRational]| -> Vec<M> { row.iter().map(M::from_rational).collect() };
    let masses = match &model.variant {
        SourceVariant::Iid { pmf } => iid_masses(&convert(pmf), model.n),
        SourceVariant::Markov { initial, transition } => {
            let initial = convert(initial);
            let transition: Vec<Vec<M>> = transition.iter().map(|r| convert(r)).collect();
            markov_masses(&initial, &transition, model.n)
        }
        SourceVariant::Mixture { components } => {
            let mut total = vec![M::zero(); atoms as usize];
            for (weight, pmf) in components {
                let weight = M::from_rational(weight);
                for (acc, m) in total.iter_mut().zip(iid_masses(&convert(pmf), model.n)) {
                    *acc = acc.add(&weight.mul(&m));
                }
            }
            total
        }
    };
    if M::EXACT || model.is_exactly_normalized() {
        AtomicDistribution::new(masses, model.n, model.alphabet_size)
    } else {
        // Rows within tolerance of 1 but not exactly: renormalize so the
        // floating sum invariant holds regardless of n.
        let total = M::sum(&masses);
        let masses = masses.iter().map(|m| m.div(&total)).collect();
        AtomicDistribution::new(masses, model.n, model.alphabet_size)
    }
}

fn iid_masses<M: Mass>(pmf: &[M], n: usize) -> Vec<M> {
    let mut masses = vec![M::one()];
    for _ in 0..n {
        masses = masses.iter().flat_map(|prefix| pmf.iter().map(move |p| prefix.mul(p))).collect();
    }
    masses
}

fn markov_masses<M: Mass>(initial: &[M], transition: &[Vec<M>], n: usize) -> Vec<M> {
    let mut states: Vec<(M, usize)> = initial.iter().cloned().enumerate().map(|(s, m)| (m, s)).collect();
    for _ in 1..n {
        states = states
            .iter()
            .flat_map(|(m, last)| transition[*last].iter().enumerate().map(move |(s, p)| (m.mul(p), s)))
            .collect();
    }
    states.into_iter().map(|(m, _)| m).collect()
}

/// Orders two masses descending, ties by id; shared by every greedy routine.
pub(crate) fn descending<M: Mass>(masses: &[M], a: usize, b: usize) -> Ordering {
    masses[b].cmp_mass(&masses[a]).then_with(|| a.cmp(&b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn outcome_ids_are_lexicographic() {
        let o = Outcome::from_id(6, 3, 2);
        assert_eq!(o.symbols, vec![1, 1, 0]);
        assert_eq!(Outcome::from_symbols(vec![1, 1, 0], 2).id, 6);
        for id in 0..27 {
            let o = Outcome::from_id(id, 3, 3);
            assert_eq!(Outcome::from_symbols(o.symbols, 3).id, id);
        }
    }

    #[test]
    fn fair_coin_pair_is_uniform() {
        let d: AtomicDistribution<BigRational> =
            expand(&SourceModel::bernoulli(q(1, 2), 2).unwrap(), DEFAULT_ATOM_CAP).unwrap();
        assert_eq!(d.masses(), &[q(1, 4), q(1, 4), q(1, 4), q(1, 4)]);
    }

    #[test]
    fn single_letter_bernoulli_orders_by_symbol() {
        let d: AtomicDistribution<BigRational> =
            expand(&SourceModel::bernoulli(q(1, 4), 1).unwrap(), DEFAULT_ATOM_CAP).unwrap();
        assert_eq!(d.masses(), &[q(3, 4), q(1, 4)]);
    }

    #[test]
    fn mixture_mass_of_all_zeros() {
        let model =
            SourceModel::mixture(vec![(q(1, 2), vec![q(9, 10), q(1, 10)]), (q(1, 2), vec![q(6, 10), q(4, 10)])], 2)
                .unwrap();
        let d: AtomicDistribution<BigRational> = expand(&model, DEFAULT_ATOM_CAP).unwrap();
        assert_eq!(d.mass(0), &q(585, 1000));
        let f: AtomicDistribution<f64> = expand(&model, DEFAULT_ATOM_CAP).unwrap();
        assert!((f.mass(0) - 0.585).abs() < 1e-15);
    }

    #[test]
    fn markov_chain_masses() {
        let model =
            SourceModel::markov(vec![q(1, 2), q(1, 2)], vec![vec![q(9, 10), q(1, 10)], vec![q(1, 5), q(4, 5)]], 2)
                .unwrap();
        let d: AtomicDistribution<BigRational> = expand(&model, DEFAULT_ATOM_CAP).unwrap();
        assert_eq!(d.masses(), &[q(9, 20), q(1, 20), q(1, 10), q(2, 5)]);
    }

    #[test]
    fn cap_and_validation_errors() {
        let model = SourceModel::bernoulli(q(1, 2), 30).unwrap();
        assert!(matches!(expand::<f64>(&model, DEFAULT_ATOM_CAP), Err(Error::CapExceeded { .. })));
        assert!(SourceModel::iid(vec![q(1, 2), q(1, 3)], 2).is_err());
        assert!(SourceModel::iid(vec![q(3, 2), q(-1, 2)], 2).is_err());
        assert!(SourceModel::mixture(vec![(q(0, 1), vec![q(1, 1)]), (q(1, 1), vec![q(1, 1)])], 1).is_err());
        assert!(SourceModel::markov(vec![q(1, 1), q(0, 1)], vec![vec![q(1, 1), q(0, 1)]], 2).is_err());
        assert!(AtomicDistribution::from_masses(vec![0.5, 0.4]).is_err());
        assert!(AtomicDistribution::new(vec![0.5, 0.5, 0.0], 1, 2).is_err());
    }

    #[test]
    fn sort_descending_examples() {
        let d = AtomicDistribution::from_masses(vec![q(2, 10), q(5, 10), q(3, 10)]).unwrap();
        assert_eq!(d.sort_descending(), vec![1, 2, 0]);
        let u = AtomicDistribution::from_masses(vec![0.25; 4]).unwrap();
        assert_eq!(u.sort_descending(), vec![0, 1, 2, 3]);
        let b: AtomicDistribution<BigRational> =
            expand(&SourceModel::bernoulli(q(4, 10), 2).unwrap(), DEFAULT_ATOM_CAP).unwrap();
        assert_eq!(b.masses(), &[q(36, 100), q(24, 100), q(24, 100), q(16, 100)]);
        assert_eq!(b.sort_descending(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn self_information_examples() {
        let u = AtomicDistribution::new(vec![0.25; 4], 2, 2).unwrap();
        assert!((u.self_information(3).unwrap() - 2f64.ln()).abs() < 1e-15);
        let fair: AtomicDistribution<BigRational> =
            expand(&SourceModel::bernoulli(q(1, 2), 5).unwrap(), DEFAULT_ATOM_CAP).unwrap();
        for id in [0, 7, 31] {
            assert!((fair.self_information(id).unwrap() - 2f64.ln()).abs() < 1e-15);
        }
        let b: AtomicDistribution<BigRational> =
            expand(&SourceModel::bernoulli(q(1, 4), 2).unwrap(), DEFAULT_ATOM_CAP).unwrap();
        // P("01") = 3/4 * 1/4 = 3/16
        let expected = 0.5 * (16.0f64 / 3.0).ln();
        assert!((b.self_information(1).unwrap() - expected).abs() < 1e-15);
        assert!((expected - 0.83699).abs() < 1e-5);
        let z = AtomicDistribution::from_masses(vec![q(1, 1), q(0, 1)]).unwrap();
        assert_eq!(z.self_information(1), Err(Error::ZeroMassOutcome(1)));
    }
}
