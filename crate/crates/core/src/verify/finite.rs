use std::collections::BTreeSet;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::chain::ChainConfig;
use super::report::ReportBuilder;
use super::{sub_seed, Check, RunSettings, VerificationReport};
use crate::error::{Error, Result};
use crate::finite_group::{cone, crational_to_f64, czero, fin_pushforward, CRational, Cosets, FinGroup, FinMap, FinMeasure};

fn to_c64(z: &CRational) -> num_complex::Complex64 {
    let (re, im) = crational_to_f64(z);
    num_complex::Complex64::new(re, im)
}

/// Records an exact comparison of two rational vectors.
fn compare_exact(b: &mut ReportBuilder, lhs: &[CRational], rhs: &[CRational], what: &str) {
    if lhs.len() != rhs.len() {
        b.fail(format!("{what}: lengths {} and {}", lhs.len(), rhs.len()));
        return;
    }
    for (l, r) in lhs.iter().zip(rhs) {
        b.compare(to_c64(l), to_c64(r));
        if l != r {
            b.fail(format!("{what}: {l} ≠ {r}"));
        }
    }
}

/// `Δ(h) = Σ_x f(x h⁻¹) / Σ_x f(x)` for the counting measure on the
/// subgroup `elems` of `g`.
fn counting_modular(g: &FinGroup, elems: &[usize], h: usize, f: &[CRational]) -> Result<CRational> {
    let pos = |x: usize| elems.iter().position(|&e| e == x).ok_or(Error::NotSubgroup);
    let hinv = g.inv(h);
    let mut num = czero();
    for &x in elems {
        num += &f[pos(g.mul(x, hinv))?];
    }
    let den = f.iter().fold(czero(), |a, v| a + v);
    if den.is_zero() {
        return Err(Error::DegenerateNormalizer);
    }
    Ok(num / den)
}

/// A positive rational function that separates right translates.
fn probe(rng: &mut ChaCha8Rng, n: usize) -> Vec<CRational> {
    (0..n).map(|_| crate::finite_group::crational((rng.random_range(1..=9), rng.random_range(1..=4)), (0, 1))).collect()
}

/// A finite chain `N ⊂ H ⊂ G`, checked in exact rational arithmetic.
#[derive(Debug)]
pub struct FinChain {
    name: String,
    g: FinGroup,
    h: Vec<usize>,
    n: Vec<usize>,
    g_mod_h: Cosets,
    quotient: Option<FinQuotient>,
}

#[derive(Debug)]
struct FinQuotient {
    gbar: FinGroup,
    g_mod_n: Cosets,
    hbar: Vec<usize>,
    gbar_mod_hbar: Cosets,
    gbar_to_g_mod_h: FinMap,
    g_mod_h_to_gbar_mod_hbar: FinMap,
}

/// A map out of a coset space defined on representatives, checked to be
/// independent of the representative.
fn descend(classes: &Cosets, target_size: usize, f: impl Fn(usize) -> usize, what: &str) -> Result<FinMap> {
    let mut assignment = Vec::with_capacity(classes.classes.len());
    for class in &classes.classes {
        let t = f(class[0]);
        if class.iter().any(|&x| f(x) != t) {
            return Err(Error::ChartInvariant(format!("{what} depends on the representative")));
        }
        assignment.push(t);
    }
    FinMap::new(classes.classes.len(), target_size, assignment)
}

impl FinChain {
    pub fn build(cfg: &ChainConfig) -> Result<FinChain> {
        cfg.validate()?;
        let spec = cfg.finite.as_ref().ok_or_else(|| Error::Unsupported("not a finite chain".into()))?;
        let g = match (&spec.group, &spec.cayley_file) {
            (Some(name), _) => FinGroup::catalog(name)?,
            (None, Some(path)) => FinGroup::parse_cayley(&std::fs::read_to_string(path)?)?,
            (None, None) => unreachable!("validated"),
        };
        let gens = |labels: &[String]| -> Result<Vec<usize>> {
            let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
            Ok(g.subgroup(&g.elements_by_label(&refs)?))
        };
        let h = gens(&spec.h_generators)?;
        let n = gens(&spec.n_generators)?;
        if !n.iter().all(|x| h.contains(x)) {
            return Err(Error::ChainViolated);
        }
        let g_mod_h = g.cosets(&h)?;
        let quotient = if cfg.normal {
            let (gbar, g_mod_n) = g.quotient_group(&n)?;
            let hbar: BTreeSet<usize> = h.iter().map(|&x| g_mod_n.projection.apply(x)).collect();
            let hbar: Vec<usize> = hbar.into_iter().collect();
            let gbar_mod_hbar = gbar.cosets(&hbar)?;
            let gbar_to_g_mod_h = descend(&g_mod_n, g_mod_h.classes.len(), |x| g_mod_h.projection.apply(x), "p^{Ḡ→G/H}")?;
            let g_mod_h_to_gbar_mod_hbar = descend(
                &g_mod_h,
                gbar_mod_hbar.classes.len(),
                |x| gbar_mod_hbar.projection.apply(g_mod_n.projection.apply(x)),
                "p^{G/H→Ḡ/H̄}",
            )?;
            Some(FinQuotient { gbar, g_mod_n, hbar, gbar_mod_hbar, gbar_to_g_mod_h, g_mod_h_to_gbar_mod_hbar })
        } else {
            None
        };
        Ok(FinChain { name: cfg.name.clone(), g, h, n, g_mod_h, quotient })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn group(&self) -> &FinGroup {
        &self.g
    }

    pub fn h(&self) -> &[usize] {
        &self.h
    }

    pub fn n(&self) -> &[usize] {
        &self.n
    }

    fn builder(&self, id: &str, settings: &RunSettings) -> ReportBuilder {
        let mut b = ReportBuilder::new(id, &self.name, "exact".into()).exact();
        b.input(self.g.to_cayley_text());
        b.input(format!("{:?}/{:?}", self.h, self.n));
        b.input(settings.seed.to_string());
        b.input(settings.finite_samples.to_string());
        b
    }

    fn rng(&self, check: &str, settings: &RunSettings) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(sub_seed(settings.seed, &format!("{}/{check}", self.name)))
    }

    fn require_quotient(&self, check: Check) -> Result<&FinQuotient> {
        self.quotient
            .as_ref()
            .ok_or_else(|| Error::Unsupported(format!("{check} needs N normal in G for chain {}", self.name)))
    }

    pub fn run(&self, check: Check, settings: &RunSettings) -> Result<Vec<VerificationReport>> {
        if check.needs_normal() {
            self.require_quotient(check)?;
        }
        let reports = match check {
            Check::Main1 => vec![self.main1(settings)],
            Check::Main2 => vec![self.main2(settings)?],
            Check::Main3 => vec![self.main3(settings)?],
            Check::Main4 => vec![self.main4(settings)],
            Check::QuotientPushforward => vec![self.quotient_pushforward(settings)?],
            Check::Modular => vec![self.modular(settings)?],
            Check::RightTranslation => self.right_translation(settings)?,
            Check::Weil => vec![self.weil(settings)?],
            Check::NormalRestriction => vec![self.normal_restriction(settings)?],
            Check::Compose => vec![verify_compose(settings.finite_samples, settings.seed)?],
            Check::Invariants => vec![self.invariants(settings)],
        };
        Ok(reports)
    }

    fn measures(&self, rng: &mut ChaCha8Rng, count: usize) -> Vec<FinMeasure> {
        (0..count).map(|_| FinMeasure::random(rng, self.g.order())).collect()
    }

    fn main1(&self, settings: &RunSettings) -> VerificationReport {
        let mut b = self.builder("main1", settings);
        // every map out of a finite set is proper
        b.certify(self.n.iter().all(|x| self.h.contains(x)), "N ⊂ H, so every measure in M_H(G) lies in M_N(G)");
        b.finish(0.0, 0.0)
    }

    fn main2(&self, settings: &RunSettings) -> Result<VerificationReport> {
        let q = self.require_quotient(Check::Main2)?;
        let mut b = self.builder("main2", settings);
        let mut rng = self.rng("main2", settings);
        for mu in self.measures(&mut rng, settings.finite_samples) {
            let one = fin_pushforward(&mu, &self.g_mod_h.projection)?;
            let two = fin_pushforward(&fin_pushforward(&mu, &q.g_mod_n.projection)?, &q.gbar_to_g_mod_h)?;
            compare_exact(&mut b, &two.weights, &one.weights, "two-step vs one-shot");
        }
        Ok(b.finish(0.0, 0.0))
    }

    fn main3(&self, settings: &RunSettings) -> Result<VerificationReport> {
        let q = self.require_quotient(Check::Main3)?;
        let mut b = self.builder("main3", settings);
        let mut rng = self.rng("main3", settings);
        for mu in self.measures(&mut rng, settings.finite_samples) {
            let a = fin_pushforward(&fin_pushforward(&mu, &self.g_mod_h.projection)?, &q.g_mod_h_to_gbar_mod_hbar)?;
            let c = fin_pushforward(&fin_pushforward(&mu, &q.g_mod_n.projection)?, &q.gbar_mod_hbar.projection)?;
            compare_exact(&mut b, &a.weights, &c.weights, "route through G/H vs route through Ḡ");
        }
        Ok(b.finish(0.0, 0.0))
    }

    fn main4(&self, settings: &RunSettings) -> VerificationReport {
        let mut b = self.builder("main4", settings);
        b.certify(true, "every measure on the finite group Ḡ lies in M_H̄(Ḡ)");
        b.finish(0.0, 0.0)
    }

    /// `Σ_{gH} α(gH) p_*(φ)(gH)` against `Σ_g ν(g) Σ_h φ(gh)`, with
    /// `α(gH) = Σ_h ν(gh)` and `Δ ≡ 1`.
    fn quotient_pushforward(&self, settings: &RunSettings) -> Result<VerificationReport> {
        let mut b = self.builder("quotient_pushforward", settings);
        let mut rng = self.rng("quotient_pushforward", settings);
        let reps = self.g_mod_h.representatives();
        for _ in 0..settings.finite_samples {
            let phi = FinMeasure::random(&mut rng, self.g.order());
            let nu = FinMeasure::random(&mut rng, self.g.order());
            let avg = |g: usize| self.h.iter().fold(czero(), |acc, &h| acc + &nu.weights[self.g.mul(g, h)]);
            let alpha: Vec<CRational> = reps.iter().map(|&r| avg(r)).collect();
            let lhs = fin_pushforward(&phi, &self.g_mod_h.projection)?.pair(&alpha);
            let mut rhs = czero();
            for g in 0..self.g.order() {
                let inner = self.h.iter().fold(czero(), |acc, &h| acc + &phi.weights[self.g.mul(g, h)]);
                rhs += &nu.weights[g] * inner;
            }
            compare_exact(&mut b, &[lhs], &[rhs], "Eq. pairing");
        }
        Ok(b.finish(0.0, 0.0))
    }

    fn modular(&self, settings: &RunSettings) -> Result<VerificationReport> {
        let q = self.require_quotient(Check::Modular)?;
        let mut b = self.builder("modular", settings);
        let mut rng = self.rng("modular", settings);
        let all: Vec<usize> = (0..self.g.order()).collect();
        let all_bar: Vec<usize> = (0..q.gbar.order()).collect();
        let (fg, fgbar, fh, fhbar) = (
            probe(&mut rng, all.len()),
            probe(&mut rng, all_bar.len()),
            probe(&mut rng, self.h.len()),
            probe(&mut rng, q.hbar.len()),
        );
        for &h in &self.h {
            let hb = q.g_mod_n.projection.apply(h);
            let l = counting_modular(&self.g, &all, h, &fg)? / counting_modular(&q.gbar, &all_bar, hb, &fgbar)?;
            let r = counting_modular(&self.g, &self.h, h, &fh)? / counting_modular(&q.gbar, &q.hbar, hb, &fhbar)?;
            compare_exact(&mut b, &[l], &[r], "Δ_G/Δ_Ḡ vs Δ_H/Δ_H̄");
        }
        Ok(b.finish(0.0, 0.0))
    }

    fn right_translation(&self, settings: &RunSettings) -> Result<Vec<VerificationReport>> {
        let q = self.require_quotient(Check::RightTranslation)?;
        let mut b = self.builder("right_translation", settings);
        let mut b0 = self.builder("right_translation_n_trivial", settings);
        let mut rng = self.rng("right_translation", settings);
        let all: Vec<usize> = (0..self.g.order()).collect();
        let all_bar: Vec<usize> = (0..q.gbar.order()).collect();
        let fg = probe(&mut rng, all.len());
        let fgbar = probe(&mut rng, all_bar.len());
        let fh = probe(&mut rng, self.h.len());
        let fhbar = probe(&mut rng, q.hbar.len());
        for mu in self.measures(&mut rng, settings.finite_samples) {
            let hp = self.h[rng.random_range(0..self.h.len())];
            let hb = q.g_mod_n.projection.apply(hp);
            let scalar = counting_modular(&q.gbar, &q.hbar, hb, &fhbar)?
                / (counting_modular(&q.gbar, &all_bar, hb, &fgbar)? * counting_modular(&self.g, &self.h, hp, &fh)?);
            let scalar0 = cone() / counting_modular(&self.g, &all, hp, &fg)?;
            let moved = FinMeasure { weights: (0..self.g.order()).map(|g| mu.weights[self.g.mul(g, hp)].clone()).collect() };
            let down = |m: &FinMeasure| -> Result<FinMeasure> {
                fin_pushforward(&fin_pushforward(m, &q.g_mod_n.projection)?, &q.gbar_mod_hbar.projection)
            };
            compare_exact(&mut b, &down(&moved)?.weights, &down(&mu)?.scaled(&scalar).weights, "translated vs scaled");
            let side = |m: &FinMeasure| fin_pushforward(m, &self.g_mod_h.projection);
            compare_exact(&mut b0, &side(&moved)?.weights, &side(&mu)?.scaled(&scalar0).weights, "translated vs scaled, N = {e}");
        }
        Ok(vec![b.finish(0.0, 0.0), b0.finish(0.0, 0.0)])
    }

    /// `Σ_ḡ Σ_n β(s(ḡ)n) = Σ_g β(g)` with counting measures.
    fn weil(&self, settings: &RunSettings) -> Result<VerificationReport> {
        let q = self.require_quotient(Check::Weil)?;
        let mut b = self.builder("weil", settings);
        let mut rng = self.rng("weil", settings);
        let reps = q.g_mod_n.representatives();
        for beta in self.measures(&mut rng, settings.finite_samples) {
            let mut lhs = czero();
            for &s in &reps {
                for &n in &self.n {
                    lhs += &beta.weights[self.g.mul(s, n)];
                }
            }
            compare_exact(&mut b, &[lhs], &[beta.total_mass()], "iterated vs total sum");
        }
        Ok(b.finish(0.0, 0.0))
    }

    fn normal_restriction(&self, settings: &RunSettings) -> Result<VerificationReport> {
        self.require_quotient(Check::NormalRestriction)?;
        let mut b = self.builder("normal_restriction", settings);
        let mut rng = self.rng("normal_restriction", settings);
        let all: Vec<usize> = (0..self.g.order()).collect();
        let (fg, fn_) = (probe(&mut rng, all.len()), probe(&mut rng, self.n.len()));
        for &n in &self.n {
            let l = counting_modular(&self.g, &all, n, &fg)?;
            let r = counting_modular(&self.g, &self.n, n, &fn_)?;
            compare_exact(&mut b, &[l], &[r], "Δ_G vs Δ_N");
        }
        Ok(b.finish(0.0, 0.0))
    }

    fn invariants(&self, settings: &RunSettings) -> VerificationReport {
        let mut b = self.builder("invariants", settings);
        let g = &self.g;
        b.certify(g.is_subgroup(&self.h), "H is a subgroup");
        b.certify(g.is_subgroup(&self.n), "N is a subgroup");
        b.certify(self.n.iter().all(|x| self.h.contains(x)), "N ⊂ H");
        b.certify(self.g_mod_h.classes.len() * self.h.len() == g.order(), "|G/H|·|H| = |G|");
        if let Some(q) = &self.quotient {
            b.certify(g.is_normal(&self.n), "N is normal");
            b.certify(q.gbar.order() * self.n.len() == g.order(), "|Ḡ|·|N| = |G|");
            let hom = (0..g.order())
                .all(|x| (0..g.order()).all(|y| q.g_mod_n.projection.apply(g.mul(x, y)) == q.gbar.mul(q.g_mod_n.projection.apply(x), q.g_mod_n.projection.apply(y))));
            b.certify(hom, "projection to Ḡ is a homomorphism");
            let square = (0..g.order()).all(|x| {
                q.gbar_mod_hbar.projection.apply(q.g_mod_n.projection.apply(x))
                    == q.g_mod_h_to_gbar_mod_hbar.apply(self.g_mod_h.projection.apply(x))
            });
            b.certify(square, "commuting square");
        }
        b.finish(0.0, 0.0)
    }
}

/// Pushforward along composed maps equals the composed pushforwards, on
/// random measures and random surjections between sets of at most 64
/// points; also checks the support inclusion `supp p_*μ ⊂ p(supp μ)` and
/// the identity and constant maps.
pub fn verify_compose(samples: usize, seed: u64) -> Result<VerificationReport> {
    let mut b = ReportBuilder::new("compose", "finite-maps", "exact".into()).exact();
    b.input(seed.to_string());
    b.input(samples.to_string());
    let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, "compose"));
    for _ in 0..samples {
        let n1 = rng.random_range(1..=64);
        let n2 = rng.random_range(1..=n1);
        let n3 = rng.random_range(1..=n2);
        let p12 = FinMap::random_surjection(&mut rng, n1, n2);
        let p23 = FinMap::random_surjection(&mut rng, n2, n3);
        let mu = FinMeasure::random(&mut rng, n1);
        let composed = fin_pushforward(&mu, &p23.after(&p12)?)?;
        let stepwise = fin_pushforward(&fin_pushforward(&mu, &p12)?, &p23)?;
        compare_exact(&mut b, &composed.weights, &stepwise.weights, "(p23∘p12)_* vs p23_*∘p12_*");
        // direct double sum
        let direct: Vec<CRational> = (0..n3)
            .map(|z| {
                (0..n1)
                    .filter(|&x| p23.apply(p12.apply(x)) == z)
                    .fold(czero(), |acc, x| acc + &mu.weights[x])
            })
            .collect();
        compare_exact(&mut b, &composed.weights, &direct, "pushforward vs direct sum");
        let image = p12.image(&mu.support());
        if !fin_pushforward(&mu, &p12)?.support().is_subset(&image) {
            b.fail("support of the pushforward leaves p(supp μ)");
        }
        compare_exact(&mut b, &fin_pushforward(&mu, &FinMap::identity(n1))?.weights, &mu.weights, "identity map");
        let point = fin_pushforward(&mu, &FinMap::constant(n1, 1, 0)?)?;
        compare_exact(&mut b, &point.weights, &[mu.total_mass()], "constant map");
    }
    Ok(b.finish(0.0, 0.0))
}
