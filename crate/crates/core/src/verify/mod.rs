//! Identity checks over chains `N ⊂ H ⊂ G`, each producing a
//! [`VerificationReport`].
//!
//! Measure identities are tested weakly, against a finite family of bump
//! test functions (by default five seeded random bumps plus one fixed bump
//! at the centre of the chain's sampling region).

mod chain;
mod finite;
mod lie;
mod report;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use chain::{applicable_checks, catalog_chain, chain_catalog, ChainConfig, ChainInfo, FiniteChainSpec, GroupDef, GroupRegistry, CHAIN_CATALOG};
pub use finite::{verify_compose, FinChain};
pub use lie::LieChain;
pub use report::{digest, Diagnostics, Tolerance, VerificationReport};

use crate::error::{Error, Result};
use crate::integrate::IntegrationPolicy;

/// The checks a run can select.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    Main1,
    Main2,
    Main3,
    Main4,
    QuotientPushforward,
    Modular,
    RightTranslation,
    Weil,
    NormalRestriction,
    Compose,
    Invariants,
}

impl Check {
    pub const ALL: [Check; 11] = [
        Check::Main1,
        Check::Main2,
        Check::Main3,
        Check::Main4,
        Check::QuotientPushforward,
        Check::Modular,
        Check::RightTranslation,
        Check::Weil,
        Check::NormalRestriction,
        Check::Compose,
        Check::Invariants,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Check::Main1 => "main1",
            Check::Main2 => "main2",
            Check::Main3 => "main3",
            Check::Main4 => "main4",
            Check::QuotientPushforward => "quotient_pushforward",
            Check::Modular => "modular",
            Check::RightTranslation => "right_translation",
            Check::Weil => "weil",
            Check::NormalRestriction => "normal_restriction",
            Check::Compose => "compose",
            Check::Invariants => "invariants",
        }
    }

    /// Whether the check needs `N ◁ G`.
    pub fn needs_normal(self) -> bool {
        !matches!(self, Check::QuotientPushforward | Check::Compose | Check::Invariants | Check::Main1)
    }

    /// Default relative tolerance.
    pub fn default_rel_tol(self) -> f64 {
        match self {
            Check::Main3 | Check::RightTranslation => 1e-4,
            _ => 1e-5,
        }
    }

    /// Parses a comma-separated list; `all` selects everything.
    pub fn parse_list(src: &str) -> Result<Vec<Check>> {
        let mut out = Vec::new();
        for part in src.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            if part == "all" {
                return Ok(Check::ALL.to_vec());
            }
            let c: Check = part.parse()?;
            if !out.contains(&c) {
                out.push(c);
            }
        }
        Ok(out)
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Check {
    type Err = Error;
    fn from_str(s: &str) -> Result<Check> {
        Check::ALL
            .iter()
            .copied()
            .find(|c| c.id() == s)
            .ok_or_else(|| Error::Parse(format!("unknown check {s:?}; expected one of {}", Check::ALL.map(|c| c.id()).join(", "))))
    }
}

/// Settings shared by every check of a run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunSettings {
    pub policy: IntegrationPolicy,
    pub seed: u64,
    /// Overrides every check's relative tolerance.
    pub rel_tol: Option<f64>,
    /// Samples per exact finite check.
    pub finite_samples: usize,
}

impl Default for RunSettings {
    fn default() -> RunSettings {
        RunSettings { policy: IntegrationPolicy::default(), seed: 0, rel_tol: None, finite_samples: 200 }
    }
}

impl RunSettings {
    pub(crate) fn tol(&self, check: Check, chain_override: Option<f64>) -> f64 {
        self.rel_tol.or(chain_override).unwrap_or(check.default_rel_tol())
    }
}

/// Derives an independent seed for a named sub-task.
pub fn sub_seed(seed: u64, label: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(label.as_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("8 bytes"))
}

/// A built chain, ready to run checks.
#[derive(Debug)]
pub enum Chain {
    Lie(Box<LieChain>),
    Finite(Box<FinChain>),
}

impl Chain {
    pub fn build(cfg: &ChainConfig, registry: &GroupRegistry, settings: &RunSettings) -> Result<Chain> {
        if cfg.finite.is_some() {
            Ok(Chain::Finite(Box::new(FinChain::build(cfg)?)))
        } else {
            Ok(Chain::Lie(Box::new(LieChain::build(cfg, registry, settings)?)))
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Chain::Lie(c) => c.name(),
            Chain::Finite(c) => c.name(),
        }
    }

    /// Runs one check; a check may emit several reports.
    pub fn run(&self, check: Check, settings: &RunSettings) -> Result<Vec<VerificationReport>> {
        match self {
            Chain::Lie(c) => c.run(check, settings),
            Chain::Finite(c) => c.run(check, settings),
        }
    }

    pub fn run_all(&self, checks: &[Check], settings: &RunSettings) -> Result<Vec<VerificationReport>> {
        let mut out = Vec::new();
        for &c in checks {
            out.extend(self.run(c, settings)?);
        }
        Ok(out)
    }
}

/// Runs independent `(chain, check)` jobs concurrently; reports come back
/// in job order.
pub fn run_jobs(jobs: &[(&Chain, Check)], settings: &RunSettings) -> Result<Vec<VerificationReport>> {
    use rayon::prelude::*;
    let results: Vec<Result<Vec<VerificationReport>>> = jobs.par_iter().map(|(c, k)| c.run(*k, settings)).collect();
    let mut out = Vec::new();
    for r in results {
        out.extend(r?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn check_names_round_trip() {
        for c in Check::ALL {
            assert_eq!(c.id().parse::<Check>().unwrap(), c);
            assert_eq!(serde_json::to_string(&c).unwrap(), format!("\"{}\"", c.id()));
        }
        assert_eq!(Check::parse_list("modular, weil,modular").unwrap(), vec![Check::Modular, Check::Weil]);
        assert_eq!(Check::parse_list("all").unwrap().len(), 11);
        assert!(Check::parse_list("main5").is_err());
    }

    #[test]
    fn sub_seeds_differ() {
        assert_ne!(sub_seed(1, "a"), sub_seed(1, "b"));
        assert_ne!(sub_seed(1, "a"), sub_seed(2, "a"));
        assert_eq!(sub_seed(7, "x"), sub_seed(7, "x"));
    }
}
