use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::Check;
use crate::error::{Error, Result};
use crate::group_core::expr::ExprLaw;
use crate::group_core::{catalog, Bound, GroupChart};
use crate::measure::FunctionSpec;

fn yes() -> bool {
    true
}

fn five() -> usize {
    5
}

/// A group given by formulas in a run config. Variables are `x0, x1, …`
/// and `y0, y1, …`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupDef {
    pub name: String,
    pub dim: usize,
    /// One bound per coordinate, e.g. `"any"`, `"> 0"`, `"(-1, 1)"`.
    pub domain: Vec<String>,
    pub identity: Vec<f64>,
    pub mul: Vec<String>,
    pub inv: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embed: Option<Vec<Vec<String>>>,
}

impl GroupDef {
    pub fn build(&self) -> Result<GroupChart> {
        let law = ExprLaw::new(self.dim, &self.mul, &self.inv, self.embed.as_deref())?;
        if self.domain.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: self.domain.len() });
        }
        let domain = self.domain.iter().map(|s| Bound::parse(s)).collect::<Result<Vec<_>>>()?;
        GroupChart::new(self.name.clone(), Arc::new(law), domain, self.identity.clone())
    }
}

/// Built-in groups plus the groups defined in a run config.
#[derive(Clone, Debug, Default)]
pub struct GroupRegistry {
    custom: BTreeMap<String, GroupChart>,
}

impl GroupRegistry {
    pub fn new() -> GroupRegistry {
        GroupRegistry::default()
    }

    pub fn register(&mut self, def: &GroupDef) -> Result<()> {
        let chart = def.build()?;
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(0);
        chart.check_invariants(&mut rng, 200)?;
        self.custom.insert(def.name.clone(), chart);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<GroupChart> {
        match self.custom.get(name) {
            Some(c) => Ok(c.clone()),
            None => catalog::group(name),
        }
    }
}

/// Finite chains are given by a group and generators of `H` and `N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiniteChainSpec {
    /// A built-in name (`S4`, `A4`, `D4`, `Q8`, `Z/n`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
    /// A Cayley table file, used when `group` is absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cayley_file: Option<String>,
    pub h_generators: Vec<String>,
    pub n_generators: Vec<String>,
}

/// A chain `N ⊂ H ⊂ G` and the inputs its checks use.
///
/// Lie chains name a chart and give `H` and `N` as coordinate positions.
/// Test functions are bumps on `G`; a check on a homogeneous space uses
/// the same bump restricted to that space's base coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainConfig {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
    #[serde(default)]
    pub h_positions: Vec<usize>,
    #[serde(default)]
    pub n_positions: Vec<usize>,
    /// Whether `N` is declared normal; checks that need it are refused otherwise.
    #[serde(default = "yes")]
    pub normal: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub finite: Option<FiniteChainSpec>,
    /// Densities `φ` of the measures `μ = φ dg`.
    #[serde(default)]
    pub densities: Vec<FunctionSpec>,
    /// Extra test bumps on `G`, used before the random ones.
    #[serde(default)]
    pub test_functions: Vec<FunctionSpec>,
    #[serde(default = "five")]
    pub random_test_functions: usize,
    /// Region random bumps are drawn from.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_center: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_radius: Option<Vec<f64>>,
    /// Elements `h'` of `H`, in `H` coordinates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub right_translations: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rel_tol: Option<f64>,
    /// Absolute floor as a multiple of the largest compared magnitude.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abs_floor_factor: Option<f64>,
    /// Checks left out when a run does not name any.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub skip_checks: Vec<Check>,
}

impl ChainConfig {
    fn lie(name: &str, group: &str, h: &[usize], n: &[usize]) -> ChainConfig {
        ChainConfig {
            name: name.into(),
            group: Some(group.into()),
            h_positions: h.to_vec(),
            n_positions: n.to_vec(),
            normal: true,
            finite: None,
            densities: vec![],
            test_functions: vec![],
            random_test_functions: 5,
            sample_center: None,
            sample_radius: None,
            right_translations: None,
            rel_tol: None,
            abs_floor_factor: None,
            skip_checks: vec![],
        }
    }

    fn finite(name: &str, group: &str, h: &[&str], n: &[&str]) -> ChainConfig {
        ChainConfig {
            group: None,
            finite: Some(FiniteChainSpec {
                group: Some(group.into()),
                cayley_file: None,
                h_generators: h.iter().map(|s| s.to_string()).collect(),
                n_generators: n.iter().map(|s| s.to_string()).collect(),
            }),
            ..ChainConfig::lie(name, "", &[], &[])
        }
    }

    pub fn is_finite(&self) -> bool {
        self.finite.is_some()
    }

    pub fn floor_factor(&self) -> f64 {
        self.abs_floor_factor.unwrap_or(1e-12)
    }

    /// Field-level validation that does not need the group.
    pub fn validate(&self) -> Result<()> {
        let err = |field: &str, message: String| Error::Config { path: format!("chains.{}.{field}", self.name), message };
        if self.name.trim().is_empty() {
            return Err(Error::Config { path: "chains.name".into(), message: "empty chain name".into() });
        }
        if let Some(t) = self.rel_tol {
            if !(t.is_finite() && t > 0.0) {
                return Err(err("rel_tol", format!("must be positive, got {t}")));
            }
        }
        if let Some(t) = self.abs_floor_factor {
            if !(t.is_finite() && t >= 0.0) {
                return Err(err("abs_floor_factor", format!("must be non-negative, got {t}")));
            }
        }
        match (&self.finite, &self.group) {
            (Some(f), None) => {
                if f.group.is_none() == f.cayley_file.is_none() {
                    return Err(err("finite", "give exactly one of group, cayley_file".into()));
                }
            }
            (None, Some(_)) => {
                for (i, spec) in self.test_functions.iter().enumerate() {
                    if !matches!(spec, FunctionSpec::Bump { .. }) {
                        return Err(err(&format!("test_functions[{i}]"), "test functions must be bumps".into()));
                    }
                }
                if let Some(r) = &self.sample_radius {
                    if r.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                        return Err(err("sample_radius", "radii must be positive".into()));
                    }
                }
            }
            _ => return Err(err("group", "give exactly one of group, finite".into())),
        }
        Ok(())
    }
}

/// Catalog entry.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainInfo {
    pub name: String,
    pub group: String,
    pub description: String,
    pub checks: Vec<Check>,
}

/// Built-in chains and their descriptions.
pub const CHAIN_CATALOG: &[(&str, &str)] = &[
    ("s4-a4-v4", "S4 ⊃ A4 ⊃ V4, exact rational arithmetic"),
    ("z8-z4-z2", "Z/8 ⊃ Z/4 ⊃ Z/2, exact rational arithmetic"),
    ("heis3-center", "Heisenberg group with H = N = centre"),
    ("heis3-xz-center", "Heisenberg group, H = {(x, 0, z)}, N = centre"),
    ("borel3-aff-center", "upper-triangular B3, H = ⟨diag(a,1,1), I+tE13⟩, N = {I+tE13}"),
    ("borel3-unipotent", "upper-triangular B3 with H = N = unipotent radical"),
    ("aff1-diag", "Aff(1)+ with H = {(a, 0)}, N trivial"),
    ("r2-vertical", "R^2 with H = N = vertical axis"),
];

fn product(base_coords: Vec<usize>, base: FunctionSpec, fiber_coords: Vec<usize>, fiber: FunctionSpec) -> FunctionSpec {
    FunctionSpec::Product { base_coords, base: Box::new(base), fiber_coords, fiber: Box::new(fiber) }
}

fn one() -> FunctionSpec {
    FunctionSpec::Constant { value: [1.0, 0.0] }
}

pub fn catalog_chain(name: &str) -> Result<ChainConfig> {
    let mut c = match name {
        "s4-a4-v4" => ChainConfig::finite(name, "S4", &["(123)", "(12)(34)"], &["(12)(34)", "(13)(24)"]),
        "z8-z4-z2" => ChainConfig::finite(name, "Z/8", &["2"], &["4"]),
        "heis3-center" => {
            let mut c = ChainConfig::lie(name, "heis3", &[2], &[2]);
            c.densities = vec![
                FunctionSpec::bump(vec![0.1, -0.2, 0.3], vec![0.8, 0.9, 1.0]),
                product(vec![0, 1], one(), vec![2], FunctionSpec::bump(vec![0.2], vec![0.7])),
            ];
            c
        }
        "heis3-xz-center" => ChainConfig::lie(name, "heis3", &[0, 2], &[2]),
        "borel3-aff-center" => {
            let mut c = ChainConfig::lie(name, "borel3", &[0, 5], &[5]);
            c.sample_center = Some(vec![1.0, 1.0, 1.0, 0.0, 0.0, 0.0]);
            c.sample_radius = Some(vec![0.5, 0.5, 0.5, 1.0, 1.0, 1.0]);
            c.densities = vec![
                FunctionSpec::bump(vec![1.1, 0.9, 1.0, 0.1, -0.1, 0.2], vec![0.4, 0.35, 0.4, 0.8, 0.9, 0.8]),
                product(
                    vec![1, 2, 3, 4],
                    one(),
                    vec![0, 5],
                    FunctionSpec::bump(vec![1.0, 0.0], vec![0.4, 0.8]),
                ),
            ];
            c.right_translations = Some(vec![vec![2.0, 0.0], vec![0.5, 0.0]]);
            c.skip_checks = vec![Check::QuotientPushforward];
            c
        }
        "borel3-unipotent" => {
            let mut c = ChainConfig::lie(name, "borel3", &[3, 4, 5], &[3, 4, 5]);
            c.sample_center = Some(vec![1.0, 1.0, 1.0, 0.0, 0.0, 0.0]);
            // narrow on the diagonal, where the Haar density is not polynomial
            c.sample_radius = Some(vec![0.3, 0.3, 0.3, 1.0, 1.0, 1.0]);
            // every h' in N shears the bump supports against the a-axes
            c.skip_checks = vec![Check::QuotientPushforward, Check::RightTranslation];
            c
        }
        "aff1-diag" => {
            let mut c = ChainConfig::lie(name, "aff1", &[0], &[]);
            c.sample_center = Some(vec![1.0, 0.0]);
            c.sample_radius = Some(vec![0.6, 1.0]);
            c.densities = vec![
                FunctionSpec::bump(vec![1.0, 0.0], vec![0.5, 1.0]),
                product(vec![1], one(), vec![0], FunctionSpec::bump(vec![1.1], vec![0.5])),
            ];
            c
        }
        "r2-vertical" => ChainConfig::lie(name, "R^2", &[1], &[1]),
        _ => return Err(Error::UnknownChain(name.into())),
    };
    c.name = name.into();
    Ok(c)
}

/// Catalog entries whose name or group contains `filter`.
pub fn chain_catalog(filter: Option<&str>) -> Vec<ChainInfo> {
    CHAIN_CATALOG
        .iter()
        .filter_map(|(name, description)| {
            let cfg = catalog_chain(name).ok()?;
            let group = cfg
                .group
                .clone()
                .or_else(|| cfg.finite.as_ref().and_then(|f| f.group.clone()))
                .unwrap_or_default();
            let keep = filter.is_none_or(|f| name.contains(f) || group.contains(f));
            keep.then(|| ChainInfo {
                name: name.to_string(),
                group,
                description: description.to_string(),
                checks: applicable_checks(&cfg),
            })
        })
        .collect()
}

/// Checks a chain can run.
pub fn applicable_checks(cfg: &ChainConfig) -> Vec<Check> {
    Check::ALL
        .into_iter()
        .filter(|c| (cfg.normal || !c.needs_normal()) && !cfg.skip_checks.contains(c))
        .collect()
}
