//! Key-value run configuration.
//!
//! One `key = value` pair per line; `#` starts a comment. Keys may repeat
//! (`transition`, `component`, `distortion_row`); everything else takes the
//! last occurrence. Every error carries the 1-based line number.

use crate::error::{Error, Result};
use crate::fdivergence::Curve;
use crate::mass::parse_rational;
use crate::probability::SourceModel;
use crate::rdp::DistortionSpec;

#[derive(Debug, Clone, Default)]
pub struct Entries {
    items: Vec<(usize, String, String)>,
}

impl Entries {
    pub fn parse(text: &str) -> Result<Self> {
        let mut items = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| Error::Config { line, msg: format!("expected `key = value`, got `{content}`") })?;
            let key = key.trim();
            if key.is_empty() {
                return Err(Error::Config { line, msg: "empty key".into() });
            }
            items.push((line, key.to_string(), value.trim().to_string()));
        }
        Ok(Entries { items })
    }

    pub fn get(&self, key: &str) -> Option<(usize, &str)> {
        self.items.iter().rev().find(|(_, k, _)| k == key).map(|(line, _, v)| (*line, v.as_str()))
    }

    pub fn require(&self, key: &str) -> Result<(usize, &str)> {
        self.get(key).ok_or_else(|| Error::Config { line: 0, msg: format!("missing required key `{key}`") })
    }

    pub fn all<'a>(&'a self, key: &'a str) -> impl Iterator<Item = (usize, &'a str)> + 'a {
        self.items.iter().filter(move |(_, k, _)| k == key).map(|(line, _, v)| (*line, v.as_str()))
    }

    pub fn keys(&self) -> impl Iterator<Item = (usize, &str)> {
        self.items.iter().map(|(line, k, _)| (*line, k.as_str()))
    }

    fn reals(&self, key: &str) -> Result<Option<Vec<f64>>> {
        let Some((line, text)) = self.get(key) else { return Ok(None) };
        let values = split_list(text)
            .map(|tok| {
                parse_rational(tok)
                    .map(|r| crate::mass::rational_to_f64(&r))
                    .map_err(|e| Error::Config { line, msg: format!("{key}: {e}") })
            })
            .collect::<Result<Vec<_>>>()?;
        if values.is_empty() {
            return Err(Error::Config { line, msg: format!("{key}: grid must be nonempty") });
        }
        Ok(Some(values))
    }

    fn integers(&self, key: &str) -> Result<Option<Vec<u64>>> {
        let Some((line, text)) = self.get(key) else { return Ok(None) };
        let values = split_list(text)
            .map(|tok| {
                tok.parse::<u64>()
                    .map_err(|_| Error::Config { line, msg: format!("{key}: `{tok}` is not a nonnegative integer") })
            })
            .collect::<Result<Vec<_>>>()?;
        if values.is_empty() {
            return Err(Error::Config { line, msg: format!("{key}: grid must be nonempty") });
        }
        Ok(Some(values))
    }
}

fn split_list(text: &str) -> impl Iterator<Item = &str> {
    text.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty())
}

const KNOWN_KEYS: &[&str] = &[
    "variant",
    "alphabet",
    "n",
    "pmf",
    "initial",
    "transition",
    "component",
    "curves",
    "delta",
    "gamma",
    "eps",
    "smooth",
    "m",
    "n_grid",
    "nu",
    "distortion",
    "distortion_row",
    "d",
];

/// Parameter grids and inputs for a single CLI run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub source: SourceModel,
    pub curves: Vec<Curve>,
    /// Δ grid (perception / divergence levels).
    pub deltas: Vec<f64>,
    /// γ grid (slack of the threshold construction).
    pub gammas: Vec<f64>,
    /// ε grid for tail quantiles.
    pub eps: Vec<f64>,
    /// δ grid for smooth max entropy.
    pub smooth: Vec<f64>,
    /// Codebook sizes; `None` means 1..=support size.
    pub codebook_sizes: Option<Vec<u64>>,
    /// Blocklengths for sweeps.
    pub n_grid: Vec<usize>,
    pub nus: Vec<f64>,
    pub distortion: DistortionSpec,
    pub distortion_levels: Vec<f64>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let entries = Entries::parse(text)?;
        for (line, key) in entries.keys() {
            if !KNOWN_KEYS.contains(&key) {
                return Err(Error::Config { line, msg: format!("unknown key `{key}`") });
            }
        }
        let source = SourceModel::from_entries(&entries)?;
        let curves = match entries.get("curves") {
            Some((line, text)) => split_list(text)
                .map(|name| Curve::parse(name).map_err(|e| Error::Config { line, msg: e.to_string() }))
                .collect::<Result<Vec<_>>>()?,
            None => vec![Curve::Variational],
        };
        if curves.is_empty() {
            return Err(Error::Config { line: entries.get("curves").map_or(0, |e| e.0), msg: "no curves".into() });
        }
        let deltas = entries.reals("delta")?.unwrap_or_else(|| vec![0.1]);
        let gammas = entries.reals("gamma")?.unwrap_or_else(|| vec![0.1]);
        let eps = entries.reals("eps")?.unwrap_or_else(|| vec![0.1]);
        let smooth = entries.reals("smooth")?.unwrap_or_else(|| vec![0.1]);
        let nus = entries.reals("nu")?.unwrap_or_else(|| vec![0.0]);
        let distortion_levels = entries.reals("d")?.unwrap_or_else(|| vec![0.1]);
        let codebook_sizes = entries.integers("m")?;
        let n_grid = entries
            .integers("n_grid")?
            .map(|v| v.into_iter().map(|n| n as usize).collect())
            .unwrap_or_else(|| vec![source.n]);

        let line_of = |key: &str| entries.get(key).map_or(0, |e| e.0);
        let check = |ok: bool, key: &str, msg: &str| -> Result<()> {
            if ok {
                Ok(())
            } else {
                Err(Error::Config { line: line_of(key), msg: format!("{key}: {msg}") })
            }
        };
        check(deltas.iter().all(|&d| d >= 0.0), "delta", "values must be >= 0")?;
        check(gammas.iter().all(|&g| g > 0.0), "gamma", "values must be > 0")?;
        check(eps.iter().all(|&e| (0.0..1.0).contains(&e)), "eps", "values must lie in [0, 1)")?;
        check(smooth.iter().all(|&e| (0.0..1.0).contains(&e)), "smooth", "values must lie in [0, 1)")?;
        check(nus.iter().all(|&v| v >= 0.0), "nu", "values must be >= 0")?;
        check(distortion_levels.iter().all(|&v| v >= 0.0), "d", "values must be >= 0")?;
        check(n_grid.iter().all(|&n| n >= 1), "n_grid", "blocklengths must be >= 1")?;
        if let Some(sizes) = &codebook_sizes {
            check(sizes.iter().all(|&m| m >= 1), "m", "codebook sizes must be >= 1")?;
        }

        let distortion = DistortionSpec::from_entries(&entries, source.alphabet_size)?;
        Ok(RunConfig {
            source,
            curves,
            deltas,
            gammas,
            eps,
            smooth,
            codebook_sizes,
            n_grid,
            nus,
            distortion,
            distortion_levels,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_full_config() {
        let text = "\
# Bernoulli source
variant = iid
n = 2
pmf = 3/4 1/4
curves = variational, reverse_kl, e_gamma:2
delta = 0.1 0.2
gamma = 0.05
m = 1 2 3 4
distortion = hamming
d = 0.05, 0.1
";
        let cfg = RunConfig::parse(text).unwrap();
        assert_eq!(cfg.source.n, 2);
        assert_eq!(cfg.curves.len(), 3);
        assert_eq!(cfg.deltas, vec![0.1, 0.2]);
        assert_eq!(cfg.codebook_sizes, Some(vec![1, 2, 3, 4]));
        assert_eq!(cfg.distortion_levels, vec![0.05, 0.1]);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = RunConfig::parse("variant = iid\nn = 2\npmf = 1/2 1/2\nbogus = 1\n").unwrap_err();
        assert_eq!(err, Error::Config { line: 4, msg: "unknown key `bogus`".into() });
        let err = RunConfig::parse("variant = iid\nn = 2\npmf = 1/2 x\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: 3, .. }));
        let err = RunConfig::parse("variant = iid\nn = 2\npmf = 1/2 1/2\ngamma = 0\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: 4, .. }));
        let err = RunConfig::parse("no equals sign\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: 1, .. }));
        let err = RunConfig::parse("variant = iid\nn = 2\npmf = 1/2 1/3\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: 1, .. }));
    }
}
