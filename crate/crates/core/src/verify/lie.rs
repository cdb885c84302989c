use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::chain::{ChainConfig, GroupRegistry};
use super::report::ReportBuilder;
use super::{sub_seed, verify_compose, Check, RunSettings, VerificationReport};
use crate::error::{Error, Result};
use crate::group_core::GroupChart;
use crate::integrate::{integrate_box_axes, IntegralResult, IntegrationPolicy, Integrator};
use crate::measure::{check_membership, inclusion_check_mh_in_mn, pair, Density, FunctionSpec, TestFunction};
use crate::pushforward::{build_fiber_average, membership_after_pushforward, pushforward_density, pushforward_pair, PushforwardHandle};
use crate::subgroup_quotient::{
    descend_map, quotient_group, weil_integrals, weil_normalize, weil_scale_consistent, DescendedMaps, HomogeneousSpace,
    QuotientPresentation, Split, SubgroupEmbedding,
};

const LOG_GRID: [f64; 5] = [0.25, 0.5, 1.0, 2.0, 4.0];
const LIN_GRID: [f64; 5] = [-1.0, -0.5, 0.0, 0.5, 1.0];
const MC_SAMPLES: usize = 200_000;

/// A bump on `G`: centre, radius, amplitude.
#[derive(Clone, Debug, PartialEq)]
struct Bump {
    center: Vec<f64>,
    radius: Vec<f64>,
    amplitude: [f64; 2],
}

impl Bump {
    fn on(&self, idx: &[usize]) -> Result<TestFunction> {
        let spec = FunctionSpec::Bump {
            center: idx.iter().map(|&i| self.center[i]).collect(),
            radius: idx.iter().map(|&i| self.radius[i]).collect(),
            amplitude: self.amplitude,
        };
        TestFunction::from_spec(&spec, idx.len())
    }

    fn on_group(&self) -> Result<TestFunction> {
        self.on(&(0..self.center.len()).collect::<Vec<_>>())
    }
}

fn is_scaling(chart: &GroupChart, i: usize) -> bool {
    chart.is_scaling_axis(i)
}

/// Log grid on scaling coordinates, linear grid on the others.
fn element_grid(chart: &GroupChart) -> Vec<Vec<f64>> {
    let mut out = vec![vec![]];
    for i in 0..chart.dim() {
        let e = chart.identity()[i];
        let axis: Vec<f64> = if is_scaling(chart, i) {
            LOG_GRID.iter().map(|s| chart.domain()[i].lo + (e - chart.domain()[i].lo) * s).collect()
        } else {
            LIN_GRID.iter().map(|s| e + s).collect()
        };
        out = out
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    out
}

/// A Lie chain `N ⊂ H ⊂ G` on coordinate-aligned subgroups.
#[derive(Debug)]
pub struct LieChain {
    cfg: ChainConfig,
    g: GroupChart,
    h: SubgroupEmbedding,
    n: SubgroupEmbedding,
    g_mod_h: HomogeneousSpace,
    g_mod_n: HomogeneousSpace,
    quotient: Option<(QuotientPresentation, DescendedMaps)>,
    densities: Vec<Density>,
    center: Vec<f64>,
    radius: Vec<f64>,
    seed: u64,
}

fn subgroup(g: &GroupChart, positions: &[usize], what: &str) -> Result<SubgroupEmbedding> {
    if positions.iter().any(|&p| p >= g.dim()) {
        return Err(Error::Config {
            path: format!("{}_positions", what.to_lowercase()),
            message: format!("positions {positions:?} out of range for {}", g.name()),
        });
    }
    match positions.len() {
        0 => Ok(SubgroupEmbedding::trivial(g)),
        k if k == g.dim() => Ok(SubgroupEmbedding::whole(g)),
        _ => SubgroupEmbedding::named(g, positions.to_vec(), format!("{what}{positions:?}")),
    }
}

impl LieChain {
    /// Builds the chain: subgroups, `N ⊂ H`, the quotient and descended
    /// maps when `N` is normal, and the `M_H(G)` certificates of the
    /// configured densities.
    pub fn build(cfg: &ChainConfig, registry: &GroupRegistry, settings: &RunSettings) -> Result<LieChain> {
        cfg.validate()?;
        let path = |field: &str| format!("chains.{}.{field}", cfg.name);
        let gname = cfg.group.as_deref().ok_or_else(|| Error::Config { path: path("group"), message: "missing".into() })?;
        let g = registry.get(gname)?;
        let h = subgroup(&g, &cfg.h_positions, "H")?;
        let n = subgroup(&g, &cfg.n_positions, "N")?;
        if !n.is_contained_in(&h) {
            return Err(Error::ChainViolated);
        }
        let g_mod_h = HomogeneousSpace::new(&h)?;
        let g_mod_n = HomogeneousSpace::new(&n)?;
        let quotient = if cfg.normal {
            let q = quotient_group(&g, &n, &Split::from_fiber(g.dim(), n.positions()))?;
            let maps = descend_map(&q, &h)?;
            Some((q, maps))
        } else {
            None
        };

        let center = cfg.sample_center.clone().unwrap_or_else(|| g.identity().to_vec());
        let radius = cfg
            .sample_radius
            .clone()
            .unwrap_or_else(|| (0..g.dim()).map(|i| if is_scaling(&g, i) { 0.5 } else { 1.0 }).collect());
        if center.len() != g.dim() || radius.len() != g.dim() {
            return Err(Error::Config {
                path: path("sample_center"),
                message: format!("sampling region must have dimension {}", g.dim()),
            });
        }
        for i in 0..g.dim() {
            let b = g.domain()[i];
            if !(b.contains(center[i] - 1.1 * radius[i]) && b.contains(center[i] + 1.1 * radius[i])) {
                return Err(Error::Config {
                    path: path("sample_radius"),
                    message: format!("region along coordinate {i} leaves the domain of {}", g.name()),
                });
            }
        }

        let mut densities = Vec::new();
        for (i, spec) in cfg.densities.iter().enumerate() {
            let at = |e: Error| Error::Config { path: path(&format!("densities[{i}]")), message: e.to_string() };
            let d = Density::from_spec(&g, spec).map_err(at)?;
            check_membership(&d, &g_mod_h).map_err(at)?;
            densities.push(d);
        }
        let mut chain = LieChain { cfg: cfg.clone(), g, h, n, g_mod_h, g_mod_n, quotient, densities, center, radius, seed: settings.seed };
        if chain.densities.is_empty() {
            let d = Density::new(&chain.g, chain.fixed_bump().on_group()?)?;
            chain.densities.push(d);
        }
        Ok(chain)
    }

    pub fn name(&self) -> &str {
        &self.cfg.name
    }

    pub fn config(&self) -> &ChainConfig {
        &self.cfg
    }

    pub fn group(&self) -> &GroupChart {
        &self.g
    }

    pub fn h(&self) -> &SubgroupEmbedding {
        &self.h
    }

    pub fn n(&self) -> &SubgroupEmbedding {
        &self.n
    }

    pub fn quotient(&self) -> Option<&QuotientPresentation> {
        self.quotient.as_ref().map(|(q, _)| q)
    }

    pub fn descended_maps(&self) -> Option<&DescendedMaps> {
        self.quotient.as_ref().map(|(_, m)| m)
    }

    pub fn densities(&self) -> &[Density] {
        &self.densities
    }

    fn fixed_bump(&self) -> Bump {
        Bump { center: self.center.clone(), radius: self.radius.iter().map(|r| 0.7 * r).collect(), amplitude: [1.0, 0.0] }
    }

    fn random_bumps(&self, label: &str, count: usize) -> Vec<Bump> {
        let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(self.seed, &format!("{}/{label}", self.cfg.name)));
        (0..count)
            .map(|_| {
                let mut center = Vec::with_capacity(self.center.len());
                let mut radius = Vec::with_capacity(self.center.len());
                for (c, r) in self.center.iter().zip(&self.radius) {
                    center.push(c + rng.random_range(-0.3..0.3) * r);
                    radius.push(rng.random_range(0.45..0.8) * r);
                }
                Bump { center, radius, amplitude: [1.0, 0.0] }
            })
            .collect()
    }

    /// Configured bumps, the fixed bump, then the random ones.
    fn test_bumps(&self) -> Vec<Bump> {
        let mut out: Vec<Bump> = self
            .cfg
            .test_functions
            .iter()
            .filter_map(|s| match s {
                FunctionSpec::Bump { center, radius, amplitude } => {
                    Some(Bump { center: center.clone(), radius: radius.clone(), amplitude: *amplitude })
                }
                _ => None,
            })
            .collect();
        out.push(self.fixed_bump());
        out.extend(self.random_bumps("alpha", self.cfg.random_test_functions));
        out
    }

    /// Test functions on the space whose coordinates are `G` coordinates `idx`.
    fn alphas_on(&self, idx: &[usize]) -> Result<Vec<TestFunction>> {
        self.test_bumps().iter().map(|b| b.on(idx)).collect()
    }

    fn require_quotient(&self, check: Check) -> Result<(&QuotientPresentation, &DescendedMaps)> {
        self.quotient
            .as_ref()
            .map(|(q, m)| (q, m))
            .ok_or_else(|| Error::Unsupported(format!("{check} needs N normal in G for chain {}", self.cfg.name)))
    }

    fn builder(&self, id: &str, settings: &RunSettings) -> ReportBuilder {
        let mut b = ReportBuilder::new(id, &self.cfg.name, settings.policy.describe());
        b.input(serde_json::to_string(&self.cfg).unwrap_or_default());
        b.input(settings.policy.describe());
        b.input(settings.seed.to_string());
        b
    }

    fn finish(&self, b: ReportBuilder, check: Check, settings: &RunSettings) -> VerificationReport {
        b.finish(settings.tol(check, self.cfg.rel_tol), self.cfg.floor_factor())
    }

    /// `G`-coordinates of `Ḡ/H̄`.
    fn gbar_mod_hbar_coords(&self, q: &QuotientPresentation, m: &DescendedMaps) -> Vec<usize> {
        m.gbar_mod_hbar.base().iter().map(|&i| q.base()[i]).collect()
    }

    pub fn run(&self, check: Check, settings: &RunSettings) -> Result<Vec<VerificationReport>> {
        if check.needs_normal() && self.quotient.is_none() {
            return Err(Error::Unsupported(format!("{check} needs N normal in G for chain {}", self.cfg.name)));
        }
        match check {
            Check::Main1 => Ok(vec![self.main1(settings)?]),
            Check::Main2 => Ok(vec![self.main2(settings)?]),
            Check::Main3 => Ok(vec![self.main3(settings)?]),
            Check::Main4 => Ok(vec![self.main4(settings)?]),
            Check::QuotientPushforward => Ok(vec![self.quotient_pushforward(settings)?]),
            Check::Modular => Ok(vec![self.modular(settings)?]),
            Check::RightTranslation => self.right_translation(settings),
            Check::Weil => self.weil(settings),
            Check::NormalRestriction => Ok(vec![self.normal_restriction(settings)?]),
            Check::Compose => Ok(vec![verify_compose(settings.finite_samples, settings.seed)?]),
            Check::Invariants => Ok(vec![self.invariants(settings)]),
        }
    }

    fn main1(&self, settings: &RunSettings) -> Result<VerificationReport> {
        let mut b = self.builder("main1", settings);
        b.note("definability is verified for the certified support shapes only");
        for mu in &self.densities {
            b.input(mu.label());
            match check_membership(mu, &self.g_mod_h).and_then(|c| inclusion_check_mh_in_mn(&c, &self.g_mod_n).map(|d| (c, d))) {
                Ok((c, d)) => b.certify(true, format!("{}: {:?} for {}, {:?} for {}", mu.label(), c.kind, c.space, d.kind, d.space)),
                Err(e) => b.certify(false, format!("{}: {e}", mu.label())),
            }
        }
        Ok(self.finish(b, Check::Main1, settings))
    }

    fn main2(&self, settings: &RunSettings) -> Result<VerificationReport> {
        let (q, maps) = self.require_quotient(Check::Main2)?;
        let policy = &settings.policy;
        let mut b = self.builder("main2", settings);
        let alphas = self.alphas_on(self.g_mod_h.base())?;
        for mu in &self.densities {
            b.input(mu.label());
            let cert = check_membership(mu, &self.g_mod_h)?;
            let two = PushforwardHandle::new(mu.clone(), inclusion_check_mh_in_mn(&cert, q.space())?)
                .quotient(q, policy)?
                .map(&maps.gbar_to_g_mod_h)?;
            for a in &alphas {
                b.input(a.label());
                let one = pushforward_pair(mu, Some(&cert), std::slice::from_ref(&maps.g_to_g_mod_h), a, policy)?;
                let one = b.track(&one);
                let two = b.track(&two.pair(a, policy)?);
                b.compare(two, one);
            }
        }
        Ok(self.finish(b, Check::Main2, settings))
    }

    fn main3(&self, settings: &RunSettings) -> Result<VerificationReport> {
        let (q, maps) = self.require_quotient(Check::Main3)?;
        let policy = &settings.policy;
        let mut b = self.builder("main3", settings);
        let alphas = self.alphas_on(&self.gbar_mod_hbar_coords(q, maps))?;
        let route_a = [maps.g_to_g_mod_h.clone(), maps.g_mod_h_to_gbar_mod_hbar.clone()];
        for mu in &self.densities {
            b.input(mu.label());
            let cert = check_membership(mu, &self.g_mod_h)?;
            let route_b = PushforwardHandle::new(mu.clone(), inclusion_check_mh_in_mn(&cert, q.space())?)
                .quotient(q, policy)?
                .map(&maps.gbar_to_gbar_mod_hbar)?;
            for a in &alphas {
                b.input(a.label());
                let lhs = pushforward_pair(mu, Some(&cert), &route_a, a, policy)?;
                let lhs = b.track(&lhs);
                let rhs = b.track(&route_b.pair(a, policy)?);
                b.compare(lhs, rhs);
            }
        }
        Ok(self.finish(b, Check::Main3, settings))
    }

    fn main4(&self, settings: &RunSettings) -> Result<VerificationReport> {
        let (q, maps) = self.require_quotient(Check::Main4)?;
        let mut b = self.builder("main4", settings);
        for mu in &self.densities {
            b.input(mu.label());
            let outcome = check_membership(mu, &self.g_mod_h)
                .and_then(|c| inclusion_check_mh_in_mn(&c, q.space()))
                .and_then(|c| pushforward_density(mu, &c, q, &settings.policy))
                .and_then(|psi| membership_after_pushforward(&psi, &maps.gbar_mod_hbar));
            match outcome {
                Ok(c) => b.certify(true, format!("p_*({}): {:?} for {}", mu.label(), c.kind, c.space)),
                Err(e) => b.certify(false, format!("p_*({}): {e}", mu.label())),
            }
        }
        Ok(self.finish(b, Check::Main4, settings))
    }

    /// `∫_G ν(g) ∫_H φ(gh) Δ_G(h)/Δ_H(h) dh dg`.
    pub fn quotient_pushforward_rhs(&self, phi: &Density, nu: &TestFunction, policy: &IntegrationPolicy) -> Result<IntegralResult> {
        let mut outer = nu.support().clone();
        for &p in self.g_mod_h.base() {
            if let Some(iv) = phi.support().interval(p) {
                match outer.restrict(p, iv) {
                    Some(o) => outer = o,
                    None => return Ok(IntegralResult::zero()),
                }
            }
        }
        let bx = outer.to_coord_box()?;
        let inner: Integrator = policy.for_nested(self.g.dim(), self.h.dim()).clone();
        let (g, h, space) = (&self.g, &self.h, &self.g_mod_h);
        let weight = |x: &[f64]| match (g.modular(&h.include(x)), h.chart().modular(x)) {
            (Ok(a), Ok(b)) => a / b,
            _ => f64::NAN,
        };
        let f = |x: &[f64]| phi.phi().eval(x);
        let scale = phi.haar_scale();
        let nan = Complex64::new(f64::NAN, f64::NAN);
        let integrand = |x: &[f64]| {
            let v = nu.eval(x);
            if v.re == 0.0 && v.im == 0.0 {
                return v;
            }
            let w = space.fiber_integral(x, &f, phi.support(), Some(&weight), &inner).unwrap_or(nan);
            v * w * (scale * g.haar_density_unchecked(x))
        };
        let outer_rule = policy.for_nested(bx.dim(), self.h.dim());
        let extra = policy.scaling_boost(g, bx.dim());
        integrate_box_axes(&integrand, &bx, outer_rule, policy.estimate_error, &extra)
    }

    /// The `(φ, ν)` pairs: configured densities then random bump densities,
    /// each with its own random `ν`.
    fn quotient_pushforward_pairs(&self) -> Result<Vec<(Density, TestFunction)>> {
        let mut phis: Vec<Density> = self.cfg.densities.iter().zip(&self.densities).map(|(_, d)| d.clone()).collect();
        for bump in self.random_bumps("phi", self.cfg.random_test_functions.max(1)) {
            phis.push(Density::new(&self.g, bump.on_group()?)?);
        }
        let nus = self.random_bumps("nu", phis.len());
        phis.into_iter().zip(nus).map(|(p, n)| Ok((p, n.on_group()?))).collect()
    }

    fn quotient_pushforward(&self, settings: &RunSettings) -> Result<VerificationReport> {
        let policy = &settings.policy;
        let mut b = self.builder("quotient_pushforward", settings);
        let route = [crate::subgroup_quotient::CoordMap::pick("p^{G→G/H}", self.g.dim(), self.g_mod_h.base())];
        for (phi, nu) in self.quotient_pushforward_pairs()? {
            b.input(phi.label());
            b.input(nu.label());
            let cert = check_membership(&phi, &self.g_mod_h)?;
            let alpha = build_fiber_average(&nu, &self.g_mod_h, policy)?;
            let lhs = pushforward_pair(&phi, Some(&cert), &route, &alpha, policy)?;
            let lhs = b.track(&lhs);
            let rhs = b.track(&self.quotient_pushforward_rhs(&phi, &nu, policy)?);
            b.compare(lhs, rhs);
        }
        Ok(self.finish(b, Check::QuotientPushforward, settings))
    }

    fn modular(&self, settings: &RunSettings) -> Result<VerificationReport> {
        let (q, maps) = self.require_quotient(Check::Modular)?;
        let mut b = self.builder("modular", settings);
        b.diagnostics_integrator("jacobian");
        let hbar = &maps.hbar_in_gbar;
        for h in element_grid(self.h.chart()) {
            b.input(format!("{h:?}"));
            let hg = self.h.include(&h);
            let hq = q.project(&hg)?;
            let l = self.g.modular(&hg)? / q.quotient().modular(&hq)?;
            let r = self.h.chart().modular(&h)? / hbar.chart().modular(&hbar.restrict(&hq))?;
            b.compare(Complex64::new(l, 0.0), Complex64::new(r, 0.0));
        }
        Ok(self.finish(b, Check::Modular, settings))
    }

    fn right_translations(&self) -> Vec<Vec<f64>> {
        if let Some(t) = &self.cfg.right_translations {
            return t.clone();
        }
        let hc = self.h.chart();
        let doubled = (0..hc.dim()).map(|i| if is_scaling(hc, i) { 2.0 } else { hc.identity()[i] }).collect();
        vec![doubled, vec![0.5; hc.dim()]]
    }

    fn right_translation(&self, settings: &RunSettings) -> Result<Vec<VerificationReport>> {
        let (q, maps) = self.require_quotient(Check::RightTranslation)?;
        let policy = &settings.policy;
        let mut b = self.builder("right_translation", settings);
        let mut b0 = self.builder("right_translation_n_trivial", settings);
        let alphas = self.alphas_on(&self.gbar_mod_hbar_coords(q, maps))?;
        let alphas_gh = self.alphas_on(self.g_mod_h.base())?;
        let compact: Vec<&Density> = self.densities.iter().filter(|d| d.phi().is_compact()).collect();
        let fallback;
        let compact = if compact.is_empty() {
            fallback = Density::new(&self.g, self.fixed_bump().on_group()?)?;
            vec![&fallback]
        } else {
            compact
        };
        let to_gbar_mod_hbar = |mu: &Density| -> Result<PushforwardHandle> {
            let cert = check_membership(mu, q.space())?;
            PushforwardHandle::new(mu.clone(), cert).quotient(q, policy)?.map(&maps.gbar_to_gbar_mod_hbar)
        };
        for hp in self.right_translations() {
            self.h.chart().check(&hp)?;
            let hg = self.h.include(&hp);
            let hq = q.project(&hg)?;
            let scalar = maps.hbar_in_gbar.chart().modular(&maps.hbar_in_gbar.restrict(&hq))?
                / (q.quotient().modular(&hq)? * self.h.chart().modular(&hp)?);
            let scalar0 = 1.0 / self.g.modular(&hg)?;
            b.note(format!("h' = {hp:?}: scalar {scalar:.12}"));
            b0.note(format!("h' = {hp:?}: scalar 1/Δ_G(h') = {scalar0:.12}"));
            for mu in &compact {
                let moved = mu.right_translate(&hg)?;
                b.input(moved.label());
                b0.input(moved.label());
                let (orig, shifted) = (to_gbar_mod_hbar(mu)?, to_gbar_mod_hbar(&moved)?);
                let mut pairs = Vec::new();
                for a in &alphas {
                    let r = b.track(&orig.pair(a, policy)?);
                    let l = b.track(&shifted.pair(a, policy)?);
                    pairs.push((l, r));
                }
                informative(&mut b, &pairs, Complex64::new(scalar, 0.0), self.cfg.floor_factor());

                let c0 = check_membership(mu, &self.g_mod_h)?;
                let c1 = check_membership(&moved, &self.g_mod_h)?;
                let route = std::slice::from_ref(&maps.g_to_g_mod_h);
                let mut pairs = Vec::new();
                for a in &alphas_gh {
                    let r = b0.track(&pushforward_pair(mu, Some(&c0), route, a, policy)?);
                    let l = b0.track(&pushforward_pair(&moved, Some(&c1), route, a, policy)?);
                    pairs.push((l, r));
                }
                informative(&mut b0, &pairs, Complex64::new(scalar0, 0.0), self.cfg.floor_factor());
            }
        }
        let r0 = b0.finish(settings.rel_tol.or(self.cfg.rel_tol).unwrap_or(1e-5), self.cfg.floor_factor());
        Ok(vec![self.finish(b, Check::RightTranslation, settings), r0])
    }

    fn weil(&self, settings: &RunSettings) -> Result<Vec<VerificationReport>> {
        let (q, _) = self.require_quotient(Check::Weil)?;
        let policy = &settings.policy;
        let mut b = self.builder("weil", settings);
        let beta0 = self.fixed_bump().on_group()?;
        let c = weil_normalize(q, &beta0, policy)?;
        b.note(format!("normalized scale {c:.12} on {}; chart factor {:.12}", beta0.label(), q.weil_scale()));
        let fresh = self.random_bumps("weil", 3);
        let mut quad = Vec::new();
        for beta in &fresh {
            let beta = beta.on_group()?;
            b.input(beta.label());
            let (num, den) = weil_integrals(q, &beta, policy)?;
            let num = b.track(&num);
            let den = b.track(&den);
            b.compare(den * c, num);
            quad.push((beta, num));
        }
        let mut out = vec![self.finish(b, Check::Weil, settings)];
        if self.g.dim() >= policy.high_dim_from {
            let mut m = self.builder("weil_mc", settings);
            let mut sigma: f64 = 0.0;
            for (i, (beta, num)) in quad.iter().enumerate() {
                let mc = IntegrationPolicy {
                    high_dim: Integrator::monte_carlo(MC_SAMPLES, sub_seed(self.seed, &format!("weil_mc/{i}"))),
                    high_dim_from: 1,
                    ..policy.clone()
                };
                let est = pair(&Density::new(&self.g, beta.clone())?, &TestFunction::constant(self.g.dim(), Complex64::new(1.0, 0.0)), &mc)?;
                sigma = sigma.max(est.error_estimate);
                let v = m.track(&est);
                m.compare(v, *num);
            }
            m.diagnostics_integrator(&format!("mc(samples={MC_SAMPLES}) vs quadrature"));
            m.note(format!("pass band 3σ = {:.3e}", 3.0 * sigma));
            out.push(m.finish_abs(3.0 * sigma));
        }
        Ok(out)
    }

    /// `weil_normalize` on the fixed bump and `fresh` random ones; fails
    /// when they disagree beyond 1e-5.
    pub fn weil_normalizations(&self, policy: &IntegrationPolicy, fresh: usize) -> Result<Vec<f64>> {
        let (q, _) = self.require_quotient(Check::Weil)?;
        let mut betas = vec![self.fixed_bump().on_group()?];
        for b in self.random_bumps("weil", fresh) {
            betas.push(b.on_group()?);
        }
        weil_scale_consistent(q, &betas, policy, 1e-5)
    }

    fn normal_restriction(&self, settings: &RunSettings) -> Result<VerificationReport> {
        self.require_quotient(Check::NormalRestriction)?;
        let mut b = self.builder("normal_restriction", settings);
        b.diagnostics_integrator("jacobian");
        for n in element_grid(self.n.chart()) {
            b.input(format!("{n:?}"));
            let l = self.g.modular(&self.n.include(&n))?;
            let r = self.n.chart().modular(&n)?;
            b.compare(Complex64::new(l, 0.0), Complex64::new(r, 0.0));
        }
        Ok(self.finish(b, Check::NormalRestriction, settings))
    }

    fn invariants(&self, settings: &RunSettings) -> VerificationReport {
        let mut b = self.builder("invariants", settings);
        b.diagnostics_integrator("sampling");
        let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(self.seed, &format!("{}/invariants", self.cfg.name)));
        let mut record = |what: &str, r: Result<()>| match r {
            Ok(()) => b.certify(true, what.to_string()),
            Err(e) => b.certify(false, format!("{what}: {e}")),
        };
        record("group axioms of G", self.g.check_invariants(&mut rng, 1000));
        record("H is a subgroup", self.h.check_invariants(&mut rng, 200));
        record("N is a subgroup", self.n.check_invariants(&mut rng, 200));
        record("G/H section and projection", self.g_mod_h.check_invariants(&mut rng, 1000));
        if let Some((q, maps)) = &self.quotient {
            record("G/N quotient group", q.check_invariants(&mut rng, 1000));
            record("H/N inside G/N", maps.hbar_in_gbar.check_invariants(&mut rng, 200));
            record("commuting square", maps.check_square(q, &self.h, &mut rng, 1000));
        }
        self.finish(b, Check::Invariants, settings)
    }
}

/// Compares `l` with `scalar·r` where `|r|` clears the floor; at least
/// three such pairs are required.
fn informative(b: &mut ReportBuilder, pairs: &[(Complex64, Complex64)], scalar: Complex64, floor_factor: f64) {
    let scale = pairs.iter().map(|(_, r)| r.norm()).fold(0.0, f64::max);
    let mut used = 0;
    for &(l, r) in pairs {
        if r.norm() > floor_factor * scale && r.norm() > 0.0 {
            b.compare(l, scalar * r);
            used += 1;
        } else {
            b.note(format!("skipped near-zero pairing {r}"));
        }
    }
    b.note(format!("{used} informative pairings"));
    if used < 3 {
        b.fail(Error::TooFewInformative { found: used, required: 3 }.to_string());
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::catalog_chain;

    fn chain(name: &str) -> LieChain {
        LieChain::build(&catalog_chain(name).unwrap(), &GroupRegistry::new(), &RunSettings::default()).unwrap()
    }

    #[test]
    fn grid_is_log_on_scaling_coordinates() {
        let g = crate::group_core::catalog::group("aff1").unwrap();
        let grid = element_grid(&g);
        assert_eq!(grid.len(), 25);
        assert!(grid.contains(&vec![0.25, -1.0]) && grid.contains(&vec![4.0, 1.0]));
    }

    #[test]
    fn adversarial_density_refused_at_build() {
        // bounded along N = z but not along the H/N direction a1
        let mut cfg = catalog_chain("borel3-aff-center").unwrap();
        cfg.densities = vec![FunctionSpec::Product {
            base_coords: vec![1, 2, 3, 4],
            base: Box::new(FunctionSpec::Constant { value: [1.0, 0.0] }),
            fiber_coords: vec![5],
            fiber: Box::new(FunctionSpec::bump(vec![0.0], vec![1.0])),
        }];
        let err = LieChain::build(&cfg, &GroupRegistry::new(), &RunSettings::default()).unwrap_err();
        assert!(matches!(err, Error::Config { .. }), "{err}");
    }

    #[test]
    fn chain_violation_is_refused() {
        let mut cfg = catalog_chain("heis3-center").unwrap();
        cfg.h_positions = vec![0];
        cfg.n_positions = vec![2];
        assert!(LieChain::build(&cfg, &GroupRegistry::new(), &RunSettings::default()).is_err());
    }

    #[test]
    fn heisenberg_modular_and_restriction() {
        let c = chain("heis3-center");
        let s = RunSettings::default();
        for check in [Check::Modular, Check::NormalRestriction, Check::Main1, Check::Main4, Check::Invariants] {
            for r in c.run(check, &s).unwrap() {
                assert!(r.pass, "{check}: {r:?}");
            }
        }
    }

    #[test]
    fn borel_modular_matches_affine_line() {
        let c = chain("borel3-aff-center");
        let r = c.run(Check::Modular, &RunSettings::default()).unwrap().remove(0);
        assert!(r.pass, "{r:?}");
        assert_eq!(r.lhs.len(), 25);
        // independent oracle: the modular function of Aff(1)+ is 1/a
        let aff = crate::group_core::catalog::group("aff1").unwrap();
        for (h, v) in element_grid(c.h().chart()).iter().zip(&r.lhs) {
            assert!((v[0] - 1.0 / h[0]).abs() < 1e-9 * v[0]);
            assert!((aff.modular(h).unwrap() - v[0]).abs() < 1e-9 * v[0]);
        }
    }

    #[test]
    fn affine_quotient_pushforward() {
        let c = chain("aff1-diag");
        let r = c.run(Check::QuotientPushforward, &RunSettings::default()).unwrap().remove(0);
        assert!(r.pass, "{r:?}");
        assert_eq!(r.lhs.len(), 7);
    }

    #[test]
    fn heisenberg_main_items() {
        let c = chain("heis3-center");
        let s = RunSettings::default();
        for check in [Check::Main2, Check::Main3, Check::Weil, Check::RightTranslation] {
            for r in c.run(check, &s).unwrap() {
                assert!(r.pass, "{check}: {r:?}");
            }
        }
    }

    #[test]
    fn non_normal_chain_refuses_quotient_checks() {
        let mut cfg = catalog_chain("aff1-diag").unwrap();
        cfg.normal = false;
        let c = LieChain::build(&cfg, &GroupRegistry::new(), &RunSettings::default()).unwrap();
        assert!(matches!(c.run(Check::Modular, &RunSettings::default()), Err(Error::Unsupported(_))));
    }
}
