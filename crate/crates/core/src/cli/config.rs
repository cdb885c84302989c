use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::{IntegrationPolicy, Integrator};
use crate::verify::{catalog_chain, ChainConfig, Check, GroupDef, GroupRegistry, RunSettings};

/// Report output formats.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Md,
    Csv,
}

fn d_order() -> usize {
    12
}
fn d_panels() -> usize {
    2
}
fn d_high_order() -> usize {
    7
}
fn d_one() -> usize {
    1
}
fn d_high_from() -> usize {
    5
}
fn d_scaling_extra() -> usize {
    2
}
fn d_true() -> bool {
    true
}
fn d_samples() -> usize {
    200
}

/// Quadrature and sampling settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSettings {
    /// Gauss–Legendre order below `high_dim_from` dimensions.
    #[serde(default = "d_order")]
    pub quad_order: usize,
    #[serde(default = "d_panels")]
    pub panels: usize,
    /// Gauss–Legendre order from `high_dim_from` dimensions on.
    #[serde(default = "d_high_order")]
    pub high_dim_order: usize,
    #[serde(default = "d_one")]
    pub high_dim_panels: usize,
    #[serde(default = "d_high_from")]
    pub high_dim_from: usize,
    /// Replaces the high-dimensional rule by Monte Carlo.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc_samples: Option<usize>,
    #[serde(default = "d_true")]
    pub estimate_error: bool,
    /// Extra Gauss points on scaling axes such as the diagonal of `borel3`.
    #[serde(default = "d_scaling_extra")]
    pub scaling_extra: usize,
    /// Random measures per exact finite check.
    #[serde(default = "d_samples")]
    pub finite_samples: usize,
}

impl Default for IntegratorSettings {
    fn default() -> IntegratorSettings {
        IntegratorSettings {
            quad_order: d_order(),
            panels: d_panels(),
            high_dim_order: d_high_order(),
            high_dim_panels: d_one(),
            high_dim_from: d_high_from(),
            mc_samples: None,
            estimate_error: true,
            scaling_extra: d_scaling_extra(),
            finite_samples: d_samples(),
        }
    }
}

impl IntegratorSettings {
    pub fn policy(&self, seed: u64) -> IntegrationPolicy {
        let high_dim = match self.mc_samples {
            Some(n) => Integrator::monte_carlo(n, seed),
            None => Integrator::gauss(self.high_dim_order, self.high_dim_panels),
        };
        IntegrationPolicy {
            low_dim: Integrator::gauss(self.quad_order, self.panels),
            high_dim,
            high_dim_from: self.high_dim_from,
            estimate_error: self.estimate_error,
            scaling_extra: self.scaling_extra,
        }
    }
}

/// A verification run: which chains, which checks, how to integrate and
/// where to write the reports.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Empty selects every check each chain supports.
    #[serde(default)]
    pub checks: Vec<Check>,
    /// Built-in chains by name.
    #[serde(default)]
    pub chains: Vec<String>,
    /// Overrides every check's relative tolerance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rel_tol: Option<f64>,
    #[serde(default)]
    pub integrator: IntegratorSettings,
    #[serde(default)]
    pub format: Format,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    /// Groups defined by formulas.
    #[serde(default, rename = "group", skip_serializing_if = "Vec::is_empty")]
    pub groups: Vec<GroupDef>,
    /// Inline chains.
    #[serde(default, rename = "chain", skip_serializing_if = "Vec::is_empty")]
    pub inline_chains: Vec<ChainConfig>,
}

impl RunConfig {
    pub fn parse(text: &str, origin: &str) -> Result<RunConfig> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config {
            path: origin.to_string(),
            message: e.to_string().trim_end().to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        RunConfig::parse(&text, &path.display().to_string())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |path: &str, message: String| Err(Error::Config { path: path.into(), message });
        if let Some(t) = self.rel_tol {
            if !(t.is_finite() && t > 0.0) {
                return bad("rel_tol", format!("must be positive, got {t}"));
            }
        }
        let i = &self.integrator;
        if i.quad_order < 2 || i.high_dim_order < 2 || i.panels < 1 || i.high_dim_panels < 1 {
            return bad("integrator", "orders must be at least 2 and panel counts at least 1".into());
        }
        if i.mc_samples.is_some_and(|n| n < 1000) {
            return bad("integrator.mc_samples", "need at least 1000 samples".into());
        }
        if i.finite_samples == 0 {
            return bad("integrator.finite_samples", "must be positive".into());
        }
        for name in &self.chains {
            if !self.inline_chains.iter().any(|c| &c.name == name) {
                catalog_chain(name).map_err(|_| Error::Config {
                    path: "chains".into(),
                    message: format!("unknown chain {name:?}"),
                })?;
            }
        }
        for (k, c) in self.inline_chains.iter().enumerate() {
            c.validate().map_err(|e| match e {
                Error::Config { path, message } => Error::Config { path: format!("chain[{k}]: {path}"), message },
                other => other,
            })?;
        }
        Ok(())
    }

    /// Inline chains, then the named catalog chains not shadowed by one.
    pub fn resolved_chains(&self) -> Result<Vec<ChainConfig>> {
        let mut out = self.inline_chains.clone();
        for name in &self.chains {
            if !out.iter().any(|c| &c.name == name) {
                out.push(catalog_chain(name)?);
            }
        }
        Ok(out)
    }

    pub fn registry(&self) -> Result<GroupRegistry> {
        let mut reg = GroupRegistry::new();
        for (k, g) in self.groups.iter().enumerate() {
            reg.register(g).map_err(|e| Error::Config { path: format!("group[{k}] ({})", g.name), message: e.to_string() })?;
        }
        Ok(reg)
    }

    pub fn settings(&self, seed: u64) -> RunSettings {
        RunSettings {
            policy: self.integrator.policy(seed),
            seed,
            rel_tol: self.rel_tol,
            finite_samples: self.integrator.finite_samples,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
seed = 11
checks = ["modular", "weil"]
chains = ["heis3-center"]

[integrator]
quad_order = 10

[[group]]
name = "plane"
dim = 2
domain = ["any", "any"]
identity = [0.0, 0.0]
mul = ["x0 + y0", "x1 + y1"]
inv = ["-x0", "-x1"]

[[chain]]
name = "plane-vertical"
group = "plane"
h_positions = [1]
n_positions = [1]
"#;

    #[test]
    fn parses_and_round_trips() {
        let cfg = RunConfig::parse(SAMPLE, "sample").unwrap();
        assert_eq!(cfg.integrator.quad_order, 10);
        assert_eq!(cfg.integrator.panels, 2);
        assert_eq!(cfg.resolved_chains().unwrap().len(), 2);
        let again = RunConfig::parse(&cfg.to_toml(), "dump").unwrap();
        assert_eq!(again, cfg);
        cfg.registry().unwrap();
    }

    #[test]
    fn errors_name_the_field() {
        let e = RunConfig::parse("seed = 1\n[integrator]\nquad_ordr = 3\n", "x.toml").unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("quad_ordr") && msg.contains("line 3"), "{msg}");
        let e = RunConfig::parse("chains = [\"nope\"]", "x.toml").unwrap_err();
        assert!(e.to_string().contains("chains"), "{e}");
        let e = RunConfig::parse("rel_tol = -1.0", "x.toml").unwrap_err();
        assert!(e.to_string().contains("rel_tol"));
        let e = RunConfig::parse("checks = [\"main9\"]", "x.toml").unwrap_err();
        assert!(e.to_string().contains("main9"), "{e}");
    }
}
