use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{BlochError, Result};
use crate::rational::{parse, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Recipe {
    NomocThm14,
    NosuppThm15,
    RieszLemma53,
    ClarkProp52,
    AtomBaseline,
}

impl Recipe {
    pub const ALL: [Recipe; 5] =
        [Recipe::NomocThm14, Recipe::NosuppThm15, Recipe::RieszLemma53, Recipe::ClarkProp52, Recipe::AtomBaseline];

    pub fn as_str(self) -> &'static str {
        match self {
            Recipe::NomocThm14 => "nomoc-thm14",
            Recipe::NosuppThm15 => "nosupp-thm15",
            Recipe::RieszLemma53 => "riesz-lemma53",
            Recipe::ClarkProp52 => "clark-prop52",
            Recipe::AtomBaseline => "atom-baseline",
        }
    }
}

impl fmt::Display for Recipe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Recipe {
    type Err = BlochError;

    fn from_str(s: &str) -> Result<Self> {
        Recipe::ALL.into_iter().find(|r| r.as_str() == s).ok_or_else(|| {
            let names: Vec<&str> = Recipe::ALL.iter().map(|r| r.as_str()).collect();
            BlochError::InvalidArgument(format!("recipe: unknown recipe '{s}' (expected one of {})", names.join(", ")))
        })
    }
}

pub const KEYS: [&str; 11] = ["recipe", "majorant", "levels", "eta", "set", "depth", "quad", "points", "out-dir", "workers", "seed"];

/// Settings of a recipe run. Unset options fall back to per-recipe defaults.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub recipe: Recipe,
    pub majorant: Option<String>,
    pub levels: Option<u32>,
    pub eta: Option<Rational>,
    pub set: Option<PathBuf>,
    pub depth: Option<u32>,
    pub quad: Option<usize>,
    pub points: Option<usize>,
    pub out_dir: PathBuf,
    /// Thread count; `0` lets the pool decide.
    pub workers: usize,
    pub seed: u64,
}

/// Reads `key = value` lines; blank lines and lines starting with `#` are skipped.
pub fn read_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| BlochError::InvalidArgument(format!("config line {}: expected key=value, got '{line}'", n + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

pub fn read_config_file(path: &Path) -> Result<Vec<(String, String)>> {
    read_pairs(&std::fs::read_to_string(path)?)
}

fn value<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| BlochError::InvalidArgument(format!("{key}: cannot parse '{v}'")))
}

impl RunConfig {
    /// Builds a config from pairs in increasing priority: a later value for a key replaces an
    /// earlier one. Keys may be spelt with `-` or `_`.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (String, String)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (k, v) in pairs {
            let key = k.replace('_', "-");
            if !KEYS.contains(&key.as_str()) {
                return Err(BlochError::InvalidArgument(format!("{k}: unknown config key")));
            }
            map.insert(key, v);
        }
        let get = |k: &str| map.get(k).map(String::as_str);
        let recipe = get("recipe").ok_or_else(|| BlochError::InvalidArgument("recipe: no recipe given".into()))?.parse()?;
        let eta = get("eta").map(|v| parse(v).map_err(|_| BlochError::InvalidArgument(format!("eta: cannot parse '{v}'")))).transpose()?;
        Ok(Self {
            recipe,
            majorant: get("majorant").map(str::to_string),
            levels: get("levels").map(|v| value("levels", v)).transpose()?,
            eta,
            set: get("set").map(PathBuf::from),
            depth: get("depth").map(|v| value("depth", v)).transpose()?,
            quad: get("quad").map(|v| value("quad", v)).transpose()?,
            points: get("points").map(|v| value("points", v)).transpose()?,
            out_dir: get("out-dir").map(PathBuf::from).unwrap_or_else(|| PathBuf::from(".")),
            workers: get("workers").map(|v| value("workers", v)).transpose()?.unwrap_or(0),
            seed: get("seed").map(|v| value("seed", v)).transpose()?.unwrap_or(0),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs(items: &[(&str, &str)]) -> Vec<(String, String)> {
        items.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn later_values_win() {
        let mut p = read_pairs("# defaults\nrecipe = riesz-lemma53\neta=1/3\n\nout_dir = a\n").unwrap();
        p.extend(pairs(&[("eta", "1/2"), ("seed", "7")]));
        let c = RunConfig::from_pairs(p).unwrap();
        assert_eq!(c.recipe, Recipe::RieszLemma53);
        assert_eq!(c.eta, Some(crate::rational::ratio(1, 2)));
        assert_eq!(c.out_dir, PathBuf::from("a"));
        assert_eq!(c.seed, 7);
    }

    #[test]
    fn errors_name_the_key() {
        let e = RunConfig::from_pairs(pairs(&[("recipe", "atom-baseline"), ("colour", "red")])).unwrap_err();
        assert!(e.to_string().contains("colour"));
        let e = RunConfig::from_pairs(pairs(&[("recipe", "atom-baseline"), ("depth", "x")])).unwrap_err();
        assert!(e.to_string().contains("depth"));
        let e = RunConfig::from_pairs(Vec::new()).unwrap_err();
        assert!(e.to_string().contains("recipe"));
        assert!(read_pairs("recipe atom-baseline").is_err());
    }
}
