//! Experiment configuration: a JSON file whose fields are overridden by flags, resolved
//! into one fully specified value that every report echoes.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use maxlab::geometry::omega::MEMBERSHIP_TOL;
use maxlab::{LatticeWindow, OmegaDescriptor, OmegaSpec, Variant};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// The body as given: a short name (`cube`, `l1`, `lp:3`, ...), a path to a descriptor
/// file, or an inline descriptor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OmegaChoice {
    Name(String),
    Descriptor(OmegaDescriptor),
}

impl OmegaChoice {
    pub fn descriptor(&self, dim: usize) -> Result<OmegaDescriptor> {
        match self {
            OmegaChoice::Descriptor(d) => Ok(d.clone()),
            OmegaChoice::Name(name) if name.ends_with(".json") || Path::new(name).is_file() => {
                let text = std::fs::read_to_string(name).with_context(|| format!("reading body descriptor {name}"))?;
                Ok(serde_json::from_str(&text).with_context(|| format!("parsing body descriptor {name}"))?)
            }
            OmegaChoice::Name(name) => Ok(OmegaDescriptor::from_name(name, dim)?),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Truncation {
    /// Box truncation of the summability functional.
    #[serde(rename = "T")]
    pub t: i64,
    /// Range of random sequence entries in the summability check.
    #[serde(rename = "J")]
    pub j: i64,
    /// Center refinement of the approximate non-centered operator.
    pub q: u32,
    /// Radius up to which `c1` is certified; `null` picks the library default.
    pub r_max: Option<f64>,
}

impl Default for Truncation {
    fn default() -> Self {
        Self { t: 1000, j: 100, q: 4, r_max: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Relative tolerance of gauge membership tests. Fixed by the library.
    pub membership: f64,
    /// Multiple of `eps_tail` allowed in the variation identity.
    pub identity: f64,
    /// Relative change that ends window doubling, and the required final continuity gap.
    pub convergence: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { membership: MEMBERSHIP_TOL, identity: 4.0, convergence: 1e-6 }
    }
}

/// Contents of a `--config` file. Every field is optional.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub omega: Option<OmegaChoice>,
    pub dim: Option<usize>,
    pub variant: Option<Variant>,
    pub window: Option<String>,
    pub truncation: Option<TruncationFile>,
    pub tolerances: Option<TolerancesFile>,
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub output: Option<OutputFile>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationFile {
    #[serde(rename = "T")]
    pub t: Option<i64>,
    #[serde(rename = "J")]
    pub j: Option<i64>,
    pub q: Option<u32>,
    pub r_max: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TolerancesFile {
    pub membership: Option<f64>,
    pub identity: Option<f64>,
    pub convergence: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputFile {
    pub path: Option<PathBuf>,
    pub format: Option<Format>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

/// Values given on the command line; `None` defers to the config file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub omega: Option<String>,
    pub dim: Option<usize>,
    pub variant: Option<Variant>,
    pub window: Option<String>,
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub truncation: Option<i64>,
    pub half_range: Option<i64>,
    pub refinement: Option<u32>,
    pub r_max: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputSpec {
    pub path: Option<PathBuf>,
    pub format: Option<Format>,
}

/// The fully resolved configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub omega: OmegaDescriptor,
    pub dim: usize,
    pub variant: Variant,
    pub window: Option<LatticeWindow>,
    pub truncation: Truncation,
    pub tolerances: Tolerances,
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub output: OutputSpec,
}

impl ExperimentConfig {
    pub fn resolve(file: Option<ConfigFile>, flags: Overrides) -> Result<Self> {
        let file = file.unwrap_or_default();
        let omega_choice = flags
            .omega
            .map(OmegaChoice::Name)
            .or(file.omega)
            .unwrap_or_else(|| OmegaChoice::Name("cube".into()));
        let explicit_dim = flags.dim.or(file.dim);
        let dim = match (&omega_choice, explicit_dim) {
            (OmegaChoice::Descriptor(d), _) => d.dim(),
            (_, Some(d)) => d,
            _ => 1,
        };
        if dim == 0 {
            bail!("dimension must be positive");
        }
        let omega = omega_choice.descriptor(dim)?;
        if let Some(d) = explicit_dim {
            if d != omega.dim() {
                bail!("--dim {d} does not match the {}-dimensional body", omega.dim());
            }
        }
        let dim = omega.dim();
        let window = flags
            .window
            .or(file.window)
            .map(|w| LatticeWindow::parse(&w, dim))
            .transpose()?;

        let tf = file.truncation.unwrap_or_default();
        let defaults = Truncation::default();
        let truncation = Truncation {
            t: flags.truncation.or(tf.t).unwrap_or(defaults.t),
            j: flags.half_range.or(tf.j).unwrap_or(defaults.j),
            q: flags.refinement.or(tf.q).unwrap_or(defaults.q),
            r_max: flags.r_max.or(tf.r_max).or(defaults.r_max),
        };
        if truncation.t < 1 || truncation.j < 1 || truncation.q < 1 {
            bail!("truncation T, J and q must be positive");
        }
        if truncation.r_max.is_some_and(|r| !(r > 0.0 && r.is_finite())) {
            bail!("r_max must be positive and finite");
        }

        let tol = file.tolerances.unwrap_or_default();
        let defaults = Tolerances::default();
        let tolerances = Tolerances {
            membership: tol.membership.unwrap_or(defaults.membership),
            identity: tol.identity.unwrap_or(defaults.identity),
            convergence: tol.convergence.unwrap_or(defaults.convergence),
        };
        for (name, v) in [
            ("membership", tolerances.membership),
            ("identity", tolerances.identity),
            ("convergence", tolerances.convergence),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                bail!("tolerance {name} must be positive and finite, got {v}");
            }
        }
        if tolerances.membership != MEMBERSHIP_TOL {
            bail!("the membership tolerance is fixed at {MEMBERSHIP_TOL:e}");
        }

        let out_file = file.output.unwrap_or_default();
        let trials = flags.trials.or(file.trials);
        if trials == Some(0) {
            bail!("trials must be at least 1");
        }
        Ok(Self {
            omega,
            dim,
            variant: flags.variant.or(file.variant).unwrap_or(Variant::Centered),
            window,
            truncation,
            tolerances,
            seed: flags.seed.or(file.seed),
            trials,
            output: OutputSpec {
                path: flags.out.or(out_file.path),
                format: flags.format.or(out_file.format),
            },
        })
    }

    pub fn omega_spec(&self) -> Result<OmegaSpec> {
        Ok(match self.truncation.r_max {
            Some(r) => OmegaSpec::with_certified_radius(&self.omega, r)?,
            None => OmegaSpec::from_descriptor(&self.omega)?,
        })
    }

    /// Randomized commands refuse to run without a seed.
    pub fn require_seed(&self) -> Result<u64> {
        self.seed.context("this command is randomized: pass --seed or set `seed` in the config")
    }

    pub fn trials_or(&self, default: u64) -> u64 {
        self.trials.unwrap_or(default)
    }

    pub fn format_or(&self, default: Format) -> Format {
        self.output.format.unwrap_or(default)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let file: ConfigFile = serde_json::from_str(
            r#"{"omega": "l1", "dim": 2, "seed": 3, "trials": 5, "truncation": {"T": 50}, "output": {"format": "json"}}"#,
        )
        .unwrap();
        let flags = Overrides { seed: Some(9), ..Overrides::default() };
        let c = ExperimentConfig::resolve(Some(file), flags).unwrap();
        assert_eq!(c.seed, Some(9));
        assert_eq!(c.trials, Some(5));
        assert_eq!(c.truncation.t, 50);
        assert_eq!(c.truncation.j, 100);
        assert_eq!(c.output.format, Some(Format::Json));
        assert_eq!(c.omega, OmegaDescriptor::from_name("l1", 2).unwrap());
    }

    #[test]
    fn inline_descriptor_sets_dimension() {
        let file: ConfigFile = serde_json::from_str(r#"{"omega": {"kind": "lp", "p": "inf", "d": 3}}"#).unwrap();
        assert!(matches!(file.omega, Some(OmegaChoice::Descriptor(_))));
        let c = ExperimentConfig::resolve(Some(file), Overrides::default()).unwrap();
        assert_eq!(c.dim, 3);
    }

    #[test]
    fn invalid_values_are_rejected() {
        let bad = |json: &str| {
            let file: ConfigFile = serde_json::from_str(json).unwrap();
            ExperimentConfig::resolve(Some(file), Overrides::default()).is_err()
        };
        assert!(bad(r#"{"tolerances": {"convergence": 0}}"#));
        assert!(bad(r#"{"tolerances": {"membership": 1e-9}}"#));
        assert!(bad(r#"{"truncation": {"T": 0}}"#));
        assert!(bad(r#"{"trials": 0}"#));
        assert!(bad(r#"{"omega": "l2", "dim": 0}"#));
        assert!(serde_json::from_str::<ConfigFile>(r#"{"sed": 1}"#).is_err());
    }
}
