//! Flat `key=value` config files and flag/config/default resolution.
//!
//! Every tunable resolves through the same precedence chain: an explicit
//! command-line flag wins, then a key in the `--config` file, then the
//! built-in default. Config keys are spelled exactly like the long flag
//! they mirror (`trials`, `adv-frac`, `noise-only`).

use std::collections::HashMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use hybrid_mean::analytics::WeightRule;
use hybrid_mean::experiments::{EstimatorKind, SkewKinds};
use hybrid_mean::mechanisms::MechanismKind;
use hybrid_mean::{Error, Result};

/// Parsed config file: a flat string map, last assignment wins.
#[derive(Debug, Default)]
pub struct FileConfig {
    map: HashMap<String, String>,
}

impl FileConfig {
    pub fn empty() -> FileConfig {
        FileConfig::default()
    }

    /// Loads `key = value` lines; blank lines and `#` comments are skipped.
    pub fn load(path: Option<&Path>) -> Result<FileConfig> {
        let Some(path) = path else {
            return Ok(FileConfig::empty());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(format!("{}: {e}", path.display())))?;
        let mut map = HashMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::invalid(format!(
                    "{}:{}: expected key=value, got {line:?}",
                    path.display(),
                    idx + 1
                )));
            };
            map.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(FileConfig { map })
    }

    fn parse_as<T: FromStr>(&self, key: &str, raw: &str) -> Result<T>
    where
        T::Err: Display,
    {
        raw.parse()
            .map_err(|e| Error::invalid(format!("config key {key}: {e}")))
    }

    /// Typed lookup of a single value.
    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: Display,
    {
        match self.map.get(key) {
            Some(raw) => Ok(Some(self.parse_as(key, raw)?)),
            None => Ok(None),
        }
    }

    /// Typed lookup of a comma-separated list.
    pub fn get_list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>>
    where
        T::Err: Display,
    {
        match self.map.get(key) {
            Some(raw) => raw
                .split(',')
                .map(|item| self.parse_as(key, item.trim()))
                .collect::<Result<Vec<T>>>()
                .map(Some),
            None => Ok(None),
        }
    }
}

/// Flag value if given, else config value, else the default.
pub fn resolve<T: FromStr>(flag: Option<T>, cfg: &FileConfig, key: &str, default: T) -> Result<T>
where
    T::Err: Display,
{
    Ok(match flag {
        Some(v) => v,
        None => cfg.get(key)?.unwrap_or(default),
    })
}

/// Flag value if given, else config value, else an error naming the flag.
pub fn resolve_required<T: FromStr>(flag: Option<T>, cfg: &FileConfig, key: &str) -> Result<T>
where
    T::Err: Display,
{
    resolve_opt(flag, cfg, key)?
        .ok_or_else(|| Error::invalid(format!("missing required parameter --{key} (or config key {key})")))
}

/// Flag value if given, else config value, else `None`.
pub fn resolve_opt<T: FromStr>(flag: Option<T>, cfg: &FileConfig, key: &str) -> Result<Option<T>>
where
    T::Err: Display,
{
    Ok(match flag {
        Some(v) => Some(v),
        None => cfg.get(key)?,
    })
}

/// List-valued variant of [`resolve`].
pub fn resolve_list<T: FromStr>(
    flag: Option<Vec<T>>,
    cfg: &FileConfig,
    key: &str,
    default: Vec<T>,
) -> Result<Vec<T>>
where
    T::Err: Display,
{
    Ok(match flag {
        Some(v) => v,
        None => cfg.get_list(key)?.unwrap_or(default),
    })
}

/// List-valued variant of [`resolve_opt`].
pub fn resolve_opt_list<T: FromStr>(
    flag: Option<Vec<T>>,
    cfg: &FileConfig,
    key: &str,
) -> Result<Option<Vec<T>>>
where
    T::Err: Display,
{
    Ok(match flag {
        Some(v) => Some(v),
        None => cfg.get_list(key)?,
    })
}

/// Boolean switch: the flag turns it on; otherwise the config key decides.
pub fn resolve_switch(flag: bool, cfg: &FileConfig, key: &str) -> Result<bool> {
    if flag {
        return Ok(true);
    }
    Ok(cfg.get::<bool>(key)?.unwrap_or(false))
}

/// Iteration-budget grid: a single value `4`, a comma list `2,4,6`, or an
/// inclusive range `2..8`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TauSpec(pub Vec<u32>);

impl FromStr for TauSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<TauSpec> {
        let parse_one = |item: &str| -> Result<u32> {
            let tau: u32 = item
                .trim()
                .parse()
                .map_err(|e| Error::invalid(format!("tau value {item:?}: {e}")))?;
            if tau == 0 {
                return Err(Error::invalid("tau must be at least 1"));
            }
            Ok(tau)
        };
        if let Some((lo, hi)) = s.split_once("..") {
            let lo = parse_one(lo)?;
            let hi = parse_one(hi)?;
            if lo > hi {
                return Err(Error::invalid(format!(
                    "tau range must be nondecreasing, got {lo}..{hi}"
                )));
            }
            return Ok(TauSpec((lo..=hi).collect()));
        }
        let taus = s.split(',').map(parse_one).collect::<Result<Vec<u32>>>()?;
        Ok(TauSpec(taus))
    }
}

// clap value parsers for library types; clap wants Result<_, String>.

pub fn mech_parser(s: &str) -> std::result::Result<MechanismKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

pub fn weight_parser(s: &str) -> std::result::Result<WeightRule, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

pub fn estimator_parser(s: &str) -> std::result::Result<EstimatorKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

pub fn skew_parser(s: &str) -> std::result::Result<SkewKinds, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

pub fn tau_parser(s: &str) -> std::result::Result<TauSpec, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn tau_spec_parses_all_three_forms() {
        assert_eq!("4".parse::<TauSpec>().unwrap().0, vec![4]);
        assert_eq!("2,5,9".parse::<TauSpec>().unwrap().0, vec![2, 5, 9]);
        assert_eq!("2..6".parse::<TauSpec>().unwrap().0, vec![2, 3, 4, 5, 6]);
        assert!("0".parse::<TauSpec>().is_err());
        assert!("6..2".parse::<TauSpec>().is_err());
        assert!("a..b".parse::<TauSpec>().is_err());
    }

    #[test]
    fn config_file_round_trip_and_precedence() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "# comment line").unwrap();
        writeln!(file, "trials = 500").unwrap();
        writeln!(file, "eps = 0.5, 1.0").unwrap();
        writeln!(file, "trials=600").unwrap();
        file.flush().unwrap();

        let cfg = FileConfig::load(Some(file.path())).unwrap();
        // Last assignment wins.
        assert_eq!(resolve(None, &cfg, "trials", 1u64).unwrap(), 600);
        // A flag beats the file.
        assert_eq!(resolve(Some(7u64), &cfg, "trials", 1).unwrap(), 7);
        // Missing key falls back to the default.
        assert_eq!(resolve(None, &cfg, "seed", 42u64).unwrap(), 42);
        let eps: Vec<f64> = resolve_list(None, &cfg, "eps", vec![]).unwrap();
        assert_eq!(eps, vec![0.5, 1.0]);
        assert!(resolve_required::<u64>(None, &cfg, "n").is_err());
    }

    #[test]
    fn config_file_rejects_malformed_lines() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "just a bare word").unwrap();
        file.flush().unwrap();
        let err = FileConfig::load(Some(file.path())).unwrap_err();
        assert!(err.to_string().contains("key=value"), "{err}");
    }

    #[test]
    fn missing_config_path_is_an_io_error() {
        let err = FileConfig::load(Some(Path::new("/nonexistent/config.txt"))).unwrap_err();
        assert!(matches!(err, Error::Io(_)));
    }
}
