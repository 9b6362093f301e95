//! Run settings: flags, an optional flat TOML file, and defaults, merged in
//! that order of precedence.

use std::path::{Path, PathBuf};

use clap::{Args, Subcommand};
use serde::{Deserialize, Serialize};

use rotwave::lattice::LatticeIndex;
use rotwave::spectral::DEFAULT_PINNED;

pub const OUT_DIR_ENV: &str = "ROTWAVE_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Solve,
    Extend,
    Family,
    Spectrum,
    Linf,
    LambdaOmega,
    ValidateCoupling,
}

fn parse_index(s: &str) -> Result<LatticeIndex, String> {
    let (i, j) = s.split_once(',').ok_or_else(|| format!("expected 'i,j', got '{s}'"))?;
    let p = |t: &str| t.trim().parse::<i64>().map_err(|e| format!("'{t}': {e}"));
    Ok(LatticeIndex::new(p(i)?, p(j)?))
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Lattice half-width (the lattice is 2N × 2N)
    #[arg(long = "N", global = true)]
    pub n: Option<usize>,
    #[arg(long = "Nmin", global = true)]
    pub n_min: Option<usize>,
    #[arg(long = "Nmax", global = true)]
    pub n_max: Option<usize>,
    /// Longest witness ramp for the sup-norm check
    #[arg(long = "nmax", global = true)]
    pub ramp_max: Option<usize>,
    /// Residual tolerance (solve, extend, family) or eigen-residual tolerance (spectrum)
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Coupling function name
    #[arg(long, global = true)]
    pub coupling: Option<String>,
    /// Pinned cell as 'i,j'
    #[arg(long, global = true, value_parser = parse_index, allow_hyphen_values = true)]
    pub pinned: Option<LatticeIndex>,
    /// Truncation radii, comma separated
    #[arg(long = "R", global = true, value_delimiter = ',')]
    pub radii: Vec<usize>,
    /// Coupling strengths for the Lambda-Omega sweep, comma separated
    #[arg(long, global = true, value_delimiter = ',')]
    pub alpha: Vec<f64>,
    /// Oscillator frequency for the Lambda-Omega lattice
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub omega: Option<f64>,
    /// Simulated time for the Lambda-Omega lattice
    #[arg(long = "T", global = true)]
    pub t_end: Option<f64>,
    /// Output directory
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Flat TOML file with the same keys as the flags
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T> From<OneOrMany<T>> for Vec<T> {
    fn from(v: OneOrMany<T>) -> Self {
        match v {
            OneOrMany::One(x) => vec![x],
            OneOrMany::Many(xs) => xs,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    #[serde(rename = "N")]
    n: Option<usize>,
    #[serde(rename = "Nmin")]
    n_min: Option<usize>,
    #[serde(rename = "Nmax")]
    n_max: Option<usize>,
    nmax: Option<usize>,
    tol: Option<f64>,
    coupling: Option<String>,
    pinned: Option<String>,
    #[serde(rename = "R")]
    radii: Option<OneOrMany<usize>>,
    alpha: Option<OneOrMany<f64>>,
    omega: Option<f64>,
    #[serde(rename = "T")]
    t_end: Option<f64>,
    out: Option<PathBuf>,
    seed: Option<u64>,
    workers: Option<usize>,
}

/// Fully resolved settings; recorded verbatim in the manifest.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub coupling: String,
    #[serde(rename = "N")]
    pub n: Option<usize>,
    #[serde(rename = "Nmin")]
    pub n_min: usize,
    #[serde(rename = "Nmax")]
    pub n_max: Option<usize>,
    pub nmax: usize,
    pub tol: Option<f64>,
    pub pinned: LatticeIndex,
    #[serde(rename = "R")]
    pub radii: Vec<usize>,
    pub alpha: Vec<f64>,
    pub omega: f64,
    #[serde(rename = "T")]
    pub t_end: f64,
    #[serde(skip)]
    pub out: PathBuf,
    pub seed: u64,
    pub workers: usize,
}

impl RunConfig {
    /// Output directory from flags, the file, the environment, or `rotwave-out`.
    pub fn out_dir(flags: &Flags) -> PathBuf {
        flags
            .out
            .clone()
            .or_else(|| {
                flags
                    .config
                    .as_deref()
                    .and_then(|p| read_file(p).ok())
                    .and_then(|f| f.out)
            })
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("rotwave-out"))
    }

    pub fn resolve(command: Command, flags: &Flags) -> Result<Self, String> {
        let file = match &flags.config {
            Some(p) => read_file(p)?,
            None => FileConfig::default(),
        };
        let pinned = match (&flags.pinned, &file.pinned) {
            (Some(p), _) => *p,
            (None, Some(s)) => parse_index(s)?,
            (None, None) => DEFAULT_PINNED,
        };
        let cfg = RunConfig {
            command,
            coupling: flags
                .coupling
                .clone()
                .or(file.coupling)
                .unwrap_or_else(|| "sine".into()),
            n: flags.n.or(file.n),
            n_min: flags.n_min.or(file.n_min).unwrap_or(2),
            n_max: flags.n_max.or(file.n_max),
            nmax: flags.ramp_max.or(file.nmax).unwrap_or(20),
            tol: flags.tol.or(file.tol),
            pinned,
            radii: pick_vec(&flags.radii, file.radii).unwrap_or_else(|| vec![4, 6, 8]),
            alpha: pick_vec(&flags.alpha, file.alpha).unwrap_or_else(|| vec![0.2, 0.1, 0.05]),
            omega: flags.omega.or(file.omega).unwrap_or(1.0),
            t_end: flags.t_end.or(file.t_end).unwrap_or(200.0),
            out: Self::out_dir(flags),
            seed: flags.seed.or(file.seed).unwrap_or(0),
            workers: flags
                .workers
                .or(file.workers)
                .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), String> {
        if let Some(t) = self.tol {
            if !(t > 0.0) {
                return Err(format!("--tol must be positive, got {t}"));
            }
        }
        if self.workers == 0 {
            return Err("--workers must be at least 1".into());
        }
        if let Some(n) = self.n {
            if n < 2 {
                return Err(format!("--N must be at least 2, got {n}"));
            }
        }
        match self.command {
            Command::Solve | Command::Extend if self.n.is_none() => Err(format!("{} needs --N", self.command_name())),
            Command::Family => match self.n_max {
                None => Err("family needs --Nmax".into()),
                Some(hi) if self.n_min < 2 || self.n_min > hi => {
                    Err(format!("family needs 2 ≤ Nmin ≤ Nmax, got {}..{hi}", self.n_min))
                }
                _ => Ok(()),
            },
            Command::Spectrum if self.radii.iter().any(|&r| r < 2) => Err("--R values must be at least 2".into()),
            Command::Linf if self.nmax == 0 => Err("--nmax must be at least 1".into()),
            Command::LambdaOmega => {
                if self.coupling != "sine" {
                    Err("lambda-omega reduces to the sine coupling only".into())
                } else if self.alpha.is_empty() || self.alpha.iter().any(|&a| !(a > 0.0)) {
                    Err("--alpha values must be positive".into())
                } else if !(self.t_end > 0.0) {
                    Err("--T must be positive".into())
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    pub fn command_name(&self) -> &'static str {
        match self.command {
            Command::Solve => "solve",
            Command::Extend => "extend",
            Command::Family => "family",
            Command::Spectrum => "spectrum",
            Command::Linf => "linf",
            Command::LambdaOmega => "lambda-omega",
            Command::ValidateCoupling => "validate-coupling",
        }
    }
}

fn pick_vec<T: Clone>(flag: &[T], file: Option<OneOrMany<T>>) -> Option<Vec<T>> {
    if flag.is_empty() {
        file.map(Into::into)
    } else {
        Some(flag.to_vec())
    }
}

fn read_file(path: &Path) -> Result<FileConfig, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_parsing() {
        assert_eq!(parse_index("1,1").unwrap(), LatticeIndex::new(1, 1));
        assert_eq!(parse_index(" -2, 3").unwrap(), LatticeIndex::new(-2, 3));
        assert!(parse_index("3").is_err());
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(
            &path,
            "N = 5\ntol = 1e-9\nR = 6\nalpha = [0.3, 0.1]\npinned = \"0,1\"\n",
        )
        .unwrap();
        let flags = Flags {
            n: Some(3),
            config: Some(path),
            ..Flags::default()
        };
        let cfg = RunConfig::resolve(Command::Solve, &flags).unwrap();
        assert_eq!(cfg.n, Some(3));
        assert_eq!(cfg.tol, Some(1e-9));
        assert_eq!(cfg.radii, vec![6]);
        assert_eq!(cfg.alpha, vec![0.3, 0.1]);
        assert_eq!(cfg.pinned, LatticeIndex::new(0, 1));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "Nmaxx = 5\n").unwrap();
        let flags = Flags {
            config: Some(path),
            ..Flags::default()
        };
        assert!(RunConfig::resolve(Command::Linf, &flags).is_err());
    }

    #[test]
    fn required_fields() {
        let flags = Flags::default();
        assert!(RunConfig::resolve(Command::Solve, &flags).is_err());
        assert!(RunConfig::resolve(Command::Family, &flags).is_err());
        assert!(RunConfig::resolve(Command::Linf, &flags).is_ok());
        let bad_tol = Flags {
            n: Some(3),
            tol: Some(-1.0),
            ..Flags::default()
        };
        assert!(RunConfig::resolve(Command::Solve, &bad_tol).is_err());
    }
}
