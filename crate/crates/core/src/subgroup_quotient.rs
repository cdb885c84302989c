//! Closed subgroups, homogeneous spaces `G/H` and quotient groups `G/N`,
//! realized on coordinate splits.
//!
//! A subgroup occupies a set of coordinate positions of its parent, the
//! other positions held at their identity values. The section of a split
//! fixes the fiber coordinates at their identity values and the projection
//! keeps the base coordinates. Both facts are checked on samples whenever a
//! split is built, so a chart whose projection is not a coordinate pick is
//! rejected instead of producing wrong integrals.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::group_core::law::SliceLaw;
use crate::group_core::{map_jacobian_det, Dual, GroupChart, Scalar};
use crate::integrate::{image_box, integrate_value, CoordBox, Integrator, SupportBox};

const SAMPLE_SEED: u64 = 0x5eed_0f_c4a7;

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.iter().zip(b).all(|(p, q)| (p - q).abs() <= tol * (1.0 + q.abs()))
}

fn pick(x: &[f64], idx: &[usize]) -> Vec<f64> {
    idx.iter().map(|&i| x[i]).collect()
}

fn complement(dim: usize, positions: &[usize]) -> Vec<usize> {
    (0..dim).filter(|i| !positions.contains(i)).collect()
}

/// A subgroup of `parent` living on the coordinate `positions`.
#[derive(Clone)]
pub struct SubgroupEmbedding {
    parent: GroupChart,
    positions: Vec<usize>,
    chart: GroupChart,
}

impl fmt::Debug for SubgroupEmbedding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SubgroupEmbedding({} at {:?})", self.parent.name(), self.positions)
    }
}

impl SubgroupEmbedding {
    pub fn new(parent: &GroupChart, positions: Vec<usize>) -> Result<SubgroupEmbedding> {
        let name = format!("{}{:?}", parent.name(), positions);
        SubgroupEmbedding::named(parent, positions, name)
    }

    /// Builds the embedding and checks closure under products and inverses
    /// on 64 samples at 1e-9.
    pub fn named(parent: &GroupChart, mut positions: Vec<usize>, name: impl Into<String>) -> Result<SubgroupEmbedding> {
        positions.sort_unstable();
        positions.dedup();
        if let Some(&p) = positions.iter().find(|&&p| p >= parent.dim()) {
            return Err(Error::DimensionMismatch { expected: parent.dim(), got: p + 1 });
        }
        let law = SliceLaw {
            parent: parent.law().clone(),
            keep: positions.clone(),
            fill: parent.identity().to_vec(),
            homomorphic_embed: true,
        };
        let chart = GroupChart::new(
            name,
            Arc::new(law),
            pick_bounds(parent, &positions),
            pick(parent.identity(), &positions),
        )?;
        let sub = SubgroupEmbedding { parent: parent.clone(), positions, chart };
        sub.check_closure(&mut ChaCha8Rng::seed_from_u64(SAMPLE_SEED), 64)?;
        Ok(sub)
    }

    pub fn trivial(parent: &GroupChart) -> SubgroupEmbedding {
        SubgroupEmbedding::named(parent, vec![], "{e}").expect("trivial subgroup")
    }

    pub fn whole(parent: &GroupChart) -> SubgroupEmbedding {
        SubgroupEmbedding::named(parent, (0..parent.dim()).collect(), parent.name()).expect("whole group")
    }

    fn check_closure(&self, rng: &mut ChaCha8Rng, samples: usize) -> Result<()> {
        let e = self.parent.identity();
        let off = complement(self.parent.dim(), &self.positions);
        let outside = |g: &[f64]| !close(&pick(g, &off), &pick(e, &off), 1e-9);
        for _ in 0..samples {
            let x = self.include(&self.chart.sample(rng, 0.8));
            let y = self.include(&self.chart.sample(rng, 0.8));
            if outside(&self.parent.mul(&x, &y)) || outside(&self.parent.inv(&x)) {
                return Err(Error::NotSubgroup);
            }
        }
        Ok(())
    }

    pub fn parent(&self) -> &GroupChart {
        &self.parent
    }

    /// The subgroup's own chart.
    pub fn chart(&self) -> &GroupChart {
        &self.chart
    }

    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    pub fn dim(&self) -> usize {
        self.positions.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn include(&self, h: &[f64]) -> Vec<f64> {
        let mut g = self.parent.identity().to_vec();
        for (i, &p) in self.positions.iter().enumerate() {
            g[p] = h[i];
        }
        g
    }

    /// Subgroup coordinates of a parent element known to lie in the subgroup.
    pub fn restrict(&self, g: &[f64]) -> Vec<f64> {
        pick(g, &self.positions)
    }

    pub fn is_contained_in(&self, other: &SubgroupEmbedding) -> bool {
        self.positions.iter().all(|p| other.positions.contains(p))
    }

    /// Positions of `self` inside `other`'s chart, when contained.
    pub fn positions_within(&self, other: &SubgroupEmbedding) -> Option<Vec<usize>> {
        self.positions.iter().map(|p| other.positions.iter().position(|q| q == p)).collect()
    }

    /// Chart axioms of the subgroup, closure, `include(e) = e` and the
    /// matrix identity `embed_G(include(x)) = embed_H(x)` at 1e-10.
    pub fn check_invariants(&self, rng: &mut ChaCha8Rng, samples: usize) -> Result<()> {
        self.chart.check_invariants(rng, samples)?;
        self.check_closure(rng, samples)?;
        if self.include(self.chart.identity()) != self.parent.identity() {
            return Err(Error::ChartInvariant(format!("{}: include(e) != e", self.chart.name())));
        }
        for _ in 0..samples {
            let x = self.chart.sample(rng, 0.8);
            if let (Some(a), Some(b)) = (self.parent.embed(&self.include(&x)), self.chart.embed(&x)) {
                if (a - b).abs().max() > 1e-10 {
                    return Err(Error::ChartInvariant(format!("{}: embedding mismatch at {x:?}", self.chart.name())));
                }
            }
        }
        Ok(())
    }
}

fn pick_bounds(g: &GroupChart, idx: &[usize]) -> Vec<crate::group_core::Bound> {
    idx.iter().map(|&i| g.domain()[i]).collect()
}

/// `G/H` for a coordinate-aligned `H`: base coordinates are the positions
/// outside `H`.
#[derive(Clone, Debug)]
pub struct HomogeneousSpace {
    sub: SubgroupEmbedding,
    base: Vec<usize>,
}

impl HomogeneousSpace {
    /// Checks on 64 samples that `g = s(p(g))·h` with `h ∈ H` and that
    /// `p(g·h) = p(g)`, both at 1e-9.
    pub fn new(sub: &SubgroupEmbedding) -> Result<HomogeneousSpace> {
        let base = complement(sub.parent.dim(), &sub.positions);
        let space = HomogeneousSpace { sub: sub.clone(), base };
        space.check_decomposition(&mut ChaCha8Rng::seed_from_u64(SAMPLE_SEED ^ 1), 64)?;
        Ok(space)
    }

    fn check_decomposition(&self, rng: &mut ChaCha8Rng, samples: usize) -> Result<()> {
        let g_chart = &self.sub.parent;
        for _ in 0..samples {
            let g = g_chart.sample(rng, 0.8);
            self.decompose(&g)?;
            let h = self.sub.include(&self.sub.chart.sample(rng, 0.8));
            let gh = g_chart.mul(&g, &h);
            if !close(&self.project_unchecked(&gh), &self.project_unchecked(&g), 1e-9) {
                return Err(Error::NotDecomposable(format!(
                    "projection to {} is not constant on cosets at {g:?}",
                    self.name()
                )));
            }
        }
        Ok(())
    }

    pub fn name(&self) -> String {
        format!("{}/{}", self.sub.parent.name(), self.sub.chart.name())
    }

    pub fn group(&self) -> &GroupChart {
        &self.sub.parent
    }

    pub fn subgroup(&self) -> &SubgroupEmbedding {
        &self.sub
    }

    /// Coordinate indices of `G` that parametrize `G/H`.
    pub fn base(&self) -> &[usize] {
        &self.base
    }

    pub fn base_dim(&self) -> usize {
        self.base.len()
    }

    pub fn base_domain(&self) -> Vec<crate::group_core::Bound> {
        pick_bounds(&self.sub.parent, &self.base)
    }

    /// `s(b)`: base coordinates with fiber coordinates at the identity.
    pub fn section(&self, b: &[f64]) -> Vec<f64> {
        let mut g = self.sub.parent.identity().to_vec();
        for (i, &p) in self.base.iter().enumerate() {
            g[p] = b[i];
        }
        g
    }

    pub fn project(&self, g: &[f64]) -> Result<Vec<f64>> {
        self.sub.parent.check(g)?;
        Ok(self.project_unchecked(g))
    }

    pub fn project_unchecked(&self, g: &[f64]) -> Vec<f64> {
        pick(g, &self.base)
    }

    /// `(p(g), h)` with `g = s(p(g))·include(h)`.
    pub fn decompose(&self, g: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let gc = &self.sub.parent;
        gc.check(g)?;
        let b = self.project_unchecked(g);
        let r = gc.mul(&gc.inv(&self.section(&b)), g);
        let e = gc.identity();
        if !close(&pick(&r, &self.base), &pick(e, &self.base), 1e-9) {
            return Err(Error::NotDecomposable(format!("{g:?} in {}", self.name())));
        }
        Ok((b, self.sub.restrict(&r)))
    }

    /// Box in `H` coordinates containing every `h` with `k·h ∈ target`,
    /// or `None` when the coset `kH` misses `target`.
    pub fn fiber_box(&self, k: &[f64], target: &SupportBox) -> Result<Option<CoordBox>> {
        for &p in &self.base {
            if let Some((lo, hi)) = target.interval(p) {
                if k[p] < lo || k[p] > hi {
                    return Ok(None);
                }
            }
        }
        let pos = &self.sub.positions;
        let mut lo = Vec::with_capacity(pos.len());
        let mut hi = Vec::with_capacity(pos.len());
        for &p in pos {
            let (a, b) = target.interval(p).ok_or(Error::UnboundedDomain(p))?;
            lo.push(a);
            hi.push(b);
        }
        let gc = &self.sub.parent;
        let kinv = gc.inv(k);
        let mut x = k.to_vec();
        let (mut bx, _) = image_box(&CoordBox { lo, hi }, pos.len(), |f, out| {
            for (i, &p) in pos.iter().enumerate() {
                x[p] = f[i];
            }
            let r = gc.mul(&kinv, &x);
            for (i, &p) in pos.iter().enumerate() {
                out[i] = r[p];
            }
        });
        for (i, b) in self.sub.chart.domain().iter().enumerate() {
            bx.lo[i] = bx.lo[i].max(b.lo);
            bx.hi[i] = bx.hi[i].min(b.hi);
            if bx.lo[i] > bx.hi[i] {
                return Ok(None);
            }
        }
        Ok(Some(bx))
    }

    /// `∫_H f(k·h)·w(h) dh` over the part of `H` where `k·h` lies in
    /// `support`, with `dh` the left Haar measure of the subgroup chart.
    pub fn fiber_integral(
        &self,
        k: &[f64],
        f: &(dyn Fn(&[f64]) -> Complex64 + Sync),
        support: &SupportBox,
        weight: Option<&(dyn Fn(&[f64]) -> f64 + Sync)>,
        integrator: &Integrator,
    ) -> Result<Complex64> {
        let Some(bx) = self.coset_box(k, support)? else {
            return Ok(Complex64::new(0.0, 0.0));
        };
        // The coset kH is the set of points sharing k's base coordinates, so
        // the integral is taken over the fiber coordinates x of k·h, where
        // the support is a box, with h = k⁻¹x.
        let gc = &self.sub.parent;
        let hc = &self.sub.chart;
        let law = gc.law().as_ref();
        let pos = &self.sub.positions;
        let kinv = gc.inv(k);
        let a: SmallVec<[Dual; 8]> = kinv.iter().map(|&c| Dual::constant(c)).collect();
        let integrand = |t: &[f64]| {
            let mut g = k.to_vec();
            for (i, &p) in pos.iter().enumerate() {
                g[p] = t[i];
            }
            let v = f(&g);
            if v.re == 0.0 && v.im == 0.0 {
                return v;
            }
            let h = self.sub.restrict(&gc.mul(&kinv, &g));
            let jac = map_jacobian_det(t, |v, out| {
                let mut x: SmallVec<[Dual; 8]> = g.iter().map(|&c| Dual::constant(c)).collect();
                for (i, &p) in pos.iter().enumerate() {
                    x[p] = v[i];
                }
                let mut r: SmallVec<[Dual; 8]> = SmallVec::from_elem(Dual::constant(0.0), x.len());
                Dual::law_mul(law, &a, &x, &mut r);
                for (i, &p) in pos.iter().enumerate() {
                    out[i] = r[p];
                }
            });
            let w = weight.map_or(1.0, |w| w(&h));
            v * (hc.haar_density_unchecked(&h) * jac * w)
        };
        Ok(integrate_value(integrand, &bx, integrator))
    }

    /// Box of fiber coordinates of the points of `kH` inside `target`.
    fn coset_box(&self, k: &[f64], target: &SupportBox) -> Result<Option<CoordBox>> {
        for &p in &self.base {
            if let Some((lo, hi)) = target.interval(p) {
                if k[p] < lo || k[p] > hi {
                    return Ok(None);
                }
            }
        }
        let dom = self.sub.parent.domain();
        let (mut lo, mut hi) = (Vec::new(), Vec::new());
        for &p in &self.sub.positions {
            let (a, b) = target.interval(p).ok_or(Error::UnboundedDomain(p))?;
            let (a, b) = (a.max(dom[p].lo), b.min(dom[p].hi));
            if a >= b {
                return Ok(None);
            }
            lo.push(a);
            hi.push(b);
        }
        Ok(Some(CoordBox { lo, hi }))
    }

    pub fn check_invariants(&self, rng: &mut ChaCha8Rng, samples: usize) -> Result<()> {
        let gc = &self.sub.parent;
        for _ in 0..samples {
            let b = self.project_unchecked(&gc.sample(rng, 0.8));
            if self.project_unchecked(&self.section(&b)) != b {
                return Err(Error::ChartInvariant(format!("{}: section property fails", self.name())));
            }
        }
        self.check_decomposition(rng, samples)
    }
}

/// Partition of a chart's coordinates into base and fiber indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub base: Vec<usize>,
    pub fiber: Vec<usize>,
}

impl Split {
    pub fn from_fiber(dim: usize, fiber: &[usize]) -> Split {
        let mut f = fiber.to_vec();
        f.sort_unstable();
        Split { base: complement(dim, &f), fiber: f }
    }

    fn validate(&self, dim: usize) -> Result<()> {
        let mut all: Vec<usize> = self.base.iter().chain(&self.fiber).copied().collect();
        all.sort_unstable();
        if all != (0..dim).collect::<Vec<_>>() {
            return Err(Error::SplitNotTrivializing(format!(
                "base {:?} and fiber {:?} do not partition 0..{dim}",
                self.base, self.fiber
            )));
        }
        Ok(())
    }
}

/// `Ḡ = G/N` for a normal coordinate-aligned `N`, with its chart and the
/// cached Weil scale `c` (the quotient Haar measure is `c` times the
/// quotient chart's own Haar density).
#[derive(Clone, Debug)]
pub struct QuotientPresentation {
    space: HomogeneousSpace,
    quotient: GroupChart,
    weil_scale: f64,
}

/// Builds `G/N`, checking normality (`p(g n g⁻¹) = ē` at 1e-8), the
/// decomposition and the homomorphism property on samples. The Weil scale
/// is the change-of-variables factor of `(ḡ, n) ↦ s(ḡ)·n`, which must be
/// constant.
pub fn quotient_group(g: &GroupChart, n: &SubgroupEmbedding, split: &Split) -> Result<QuotientPresentation> {
    if n.parent.dim() != g.dim() || n.parent.name() != g.name() {
        return Err(Error::SpaceMismatch { expected: g.dim(), got: n.parent.dim() });
    }
    split.validate(g.dim())?;
    let mut fiber = split.fiber.clone();
    fiber.sort_unstable();
    if fiber != n.positions {
        return Err(Error::SplitNotTrivializing(format!(
            "fiber {:?} must be the coordinates of N {:?}",
            split.fiber, n.positions
        )));
    }
    let space = HomogeneousSpace::new(n).map_err(|e| match e {
        Error::NotDecomposable(m) => Error::SplitNotTrivializing(m),
        other => other,
    })?;
    let base = space.base.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(SAMPLE_SEED ^ 2);
    let e_base = pick(g.identity(), &base);
    for _ in 0..200 {
        let x = g.sample(&mut rng, 0.8);
        let m = n.include(&n.chart.sample(&mut rng, 0.8));
        let conj = g.mul(&g.mul(&x, &m), &g.inv(&x));
        if !close(&pick(&conj, &base), &e_base, 1e-8) {
            return Err(Error::NotNormalUnderSplit);
        }
    }
    let law = SliceLaw {
        parent: g.law().clone(),
        keep: base.clone(),
        fill: g.identity().to_vec(),
        homomorphic_embed: false,
    };
    let name = if n.is_trivial() { g.name().to_string() } else { format!("{}/{}", g.name(), n.chart.name()) };
    let quotient = GroupChart::new(name, Arc::new(law), pick_bounds(g, &base), e_base)?;
    let mut q = QuotientPresentation { space, quotient, weil_scale: 1.0 };
    q.check_homomorphism(&mut rng, 200)?;
    let mut factors = Vec::with_capacity(16);
    for _ in 0..16 {
        let x = g.sample(&mut rng, 0.8);
        let (b, h) = q.space.decompose(&x)?;
        factors.push(q.local_weil_factor(&b, &h));
    }
    let c = factors[0];
    let spread = factors.iter().map(|f| (f - c).abs() / c).fold(0.0, f64::max);
    if !(c.is_finite() && c > 0.0) || spread > 1e-8 {
        return Err(Error::WeilInconsistent { spread, tolerance: 1e-8 });
    }
    q.weil_scale = c;
    Ok(q)
}

impl QuotientPresentation {
    fn check_homomorphism(&self, rng: &mut ChaCha8Rng, samples: usize) -> Result<()> {
        let g = self.group();
        for _ in 0..samples {
            let x = g.sample(rng, 0.8);
            let y = g.sample(rng, 0.8);
            let lhs = self.project_unchecked(&g.mul(&x, &y));
            let rhs = self.quotient.mul(&self.project_unchecked(&x), &self.project_unchecked(&y));
            if !close(&lhs, &rhs, 1e-9) {
                return Err(Error::NotNormalUnderSplit);
            }
        }
        Ok(())
    }

    pub fn group(&self) -> &GroupChart {
        self.space.group()
    }

    pub fn normal_subgroup(&self) -> &SubgroupEmbedding {
        &self.space.sub
    }

    /// The chart of `Ḡ`.
    pub fn quotient(&self) -> &GroupChart {
        &self.quotient
    }

    /// The underlying fibration `G → G/N`.
    pub fn space(&self) -> &HomogeneousSpace {
        &self.space
    }

    pub fn weil_scale(&self) -> f64 {
        self.weil_scale
    }

    /// Base coordinate indices.
    pub fn base(&self) -> &[usize] {
        &self.space.base
    }

    pub fn project(&self, g: &[f64]) -> Result<Vec<f64>> {
        self.space.project(g)
    }

    pub fn project_unchecked(&self, g: &[f64]) -> Vec<f64> {
        self.space.project_unchecked(g)
    }

    pub fn section(&self, b: &[f64]) -> Vec<f64> {
        self.space.section(b)
    }

    /// `ρ_G(s(ḡ)n)·|det ∂(s(ḡ)n)/∂(ḡ,n)| / (ρ_Ḡ(ḡ)·ρ_N(n))`.
    pub fn local_weil_factor(&self, b: &[f64], n: &[f64]) -> f64 {
        let g = self.group();
        let base = &self.space.base;
        let pos = &self.space.sub.positions;
        let law = g.law().as_ref();
        let e = g.identity();
        let mut bn = b.to_vec();
        bn.extend_from_slice(n);
        let jac = map_jacobian_det(&bn, |v, out| {
            let mut s: Vec<Dual> = e.iter().map(|&c| Dual::cst(c)).collect();
            let mut m = s.clone();
            for (i, &p) in base.iter().enumerate() {
                s[p] = v[i];
            }
            for (i, &p) in pos.iter().enumerate() {
                m[p] = v[base.len() + i];
            }
            Dual::law_mul(law, &s, &m, out);
        });
        let x = g.mul(&self.section(b), &self.space.sub.include(n));
        g.haar_density_unchecked(&x) * jac
            / (self.quotient.haar_density_unchecked(b) * self.space.sub.chart.haar_density_unchecked(n))
    }

    /// Section property, homomorphism, decomposition and fiber invariance
    /// of the projection on `samples` random points.
    pub fn check_invariants(&self, rng: &mut ChaCha8Rng, samples: usize) -> Result<()> {
        self.quotient.check_invariants(rng, samples)?;
        self.space.check_invariants(rng, samples)?;
        self.check_homomorphism(rng, samples)
    }
}

/// Both sides of the Weil formula with the quotient chart's own Haar
/// density: `(∫_G β dg, ∫_Ḡ ∫_N β(s(ḡ)n) dn dḡ_raw)`.
pub fn weil_integrals(
    q: &QuotientPresentation,
    beta: &crate::measure::TestFunction,
    policy: &crate::integrate::IntegrationPolicy,
) -> Result<(crate::integrate::IntegralResult, crate::integrate::IntegralResult)> {
    use crate::measure::{certify, pair, Density, TestFunction};
    beta.support().to_coord_box()?;
    let g = q.group();
    let mu = Density::new(g, beta.clone())?;
    let one_g = TestFunction::constant(g.dim(), Complex64::new(1.0, 0.0));
    let num = pair(&mu, &one_g, policy)?;
    let cert = certify(&mu, &q.space().name(), q.normal_subgroup().positions())?;
    let psi = crate::pushforward::pushforward_density(&mu, &cert, q, policy)?;
    let raw = Density::with_scale(q.quotient(), psi.phi().clone(), 1.0)?;
    let one_q = TestFunction::constant(q.quotient().dim(), Complex64::new(1.0, 0.0));
    let den = pair(&raw, &one_q, policy)?;
    Ok((num, den))
}

/// `c = ∫_G β dg / ∫_Ḡ ∫_N β(s(ḡ)n) dn dḡ_raw`, by quadrature.
pub fn weil_normalize(
    q: &QuotientPresentation,
    beta: &crate::measure::TestFunction,
    policy: &crate::integrate::IntegrationPolicy,
) -> Result<f64> {
    let (num, den) = weil_integrals(q, beta, policy)?;
    let (num, den) = (num.value, den.value);
    if num.norm() < 1e-12 || den.norm() < 1e-300 {
        return Err(Error::DegenerateNormalizer);
    }
    let c = num / den;
    if !(c.re > 0.0 && c.im.abs() <= 1e-9 * c.re) {
        return Err(Error::DegenerateNormalizer);
    }
    Ok(c.re)
}

/// Runs [`weil_normalize`] on several functions and requires a relative
/// spread of at most `tolerance`.
pub fn weil_scale_consistent(
    q: &QuotientPresentation,
    betas: &[crate::measure::TestFunction],
    policy: &crate::integrate::IntegrationPolicy,
    tolerance: f64,
) -> Result<Vec<f64>> {
    let cs = betas.iter().map(|b| weil_normalize(q, b, policy)).collect::<Result<Vec<f64>>>()?;
    let c0 = cs.first().copied().ok_or(Error::DegenerateNormalizer)?;
    let spread = cs.iter().map(|c| (c - c0).abs() / c0).fold(0.0, f64::max);
    if spread > tolerance {
        return Err(Error::WeilInconsistent { spread, tolerance });
    }
    Ok(cs)
}

/// A map between coordinate spaces whose outputs are input coordinates or
/// constants. Every canonical map of a chain has this form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoordMap {
    pub name: String,
    pub source_dim: usize,
    pub outputs: Vec<Source>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Source {
    Coord(usize),
    Const(f64),
}

impl CoordMap {
    pub fn identity(name: impl Into<String>, dim: usize) -> CoordMap {
        CoordMap::pick(name, dim, &(0..dim).collect::<Vec<_>>())
    }

    pub fn pick(name: impl Into<String>, source_dim: usize, indices: &[usize]) -> CoordMap {
        CoordMap { name: name.into(), source_dim, outputs: indices.iter().map(|&i| Source::Coord(i)).collect() }
    }

    /// `x ↦ fill` with `fill[keep[i]] = x[i]`.
    pub fn lift(name: impl Into<String>, keep: &[usize], fill: &[f64]) -> CoordMap {
        let outputs = (0..fill.len())
            .map(|j| match keep.iter().position(|&k| k == j) {
                Some(i) => Source::Coord(i),
                None => Source::Const(fill[j]),
            })
            .collect();
        CoordMap { name: name.into(), source_dim: keep.len(), outputs }
    }

    pub fn target_dim(&self) -> usize {
        self.outputs.len()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.outputs
            .iter()
            .map(|s| match *s {
                Source::Coord(i) => x[i],
                Source::Const(c) => c,
            })
            .collect()
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &CoordMap) -> Result<CoordMap> {
        if next.source_dim != self.target_dim() {
            return Err(Error::SpaceMismatch { expected: next.source_dim, got: self.target_dim() });
        }
        let outputs = next
            .outputs
            .iter()
            .map(|s| match *s {
                Source::Coord(i) => self.outputs[i],
                c => c,
            })
            .collect();
        Ok(CoordMap { name: format!("{} ∘ {}", next.name, self.name), source_dim: self.source_dim, outputs })
    }

    /// Source coordinates the map forgets: its fiber directions.
    pub fn dropped(&self) -> Vec<usize> {
        (0..self.source_dim).filter(|i| !self.outputs.contains(&Source::Coord(*i))).collect()
    }
}

/// Composes a route of maps left to right.
pub fn compose_route(route: &[CoordMap]) -> Result<CoordMap> {
    let (first, rest) = route.split_first().ok_or_else(|| Error::Unsupported("empty route".into()))?;
    rest.iter().try_fold(first.clone(), |acc, m| acc.then(m))
}

/// The canonical maps of a chain `N ⊂ H ⊂ G` with `N ◁ G`, together with
/// `H̄ = H/N` inside `Ḡ` and the space `Ḡ/H̄`.
#[derive(Clone, Debug)]
pub struct DescendedMaps {
    pub g_to_gbar: CoordMap,
    pub g_to_g_mod_h: CoordMap,
    pub gbar_to_g_mod_h: CoordMap,
    pub g_mod_h_to_gbar_mod_hbar: CoordMap,
    pub gbar_to_gbar_mod_hbar: CoordMap,
    pub hbar_in_gbar: SubgroupEmbedding,
    pub gbar_mod_hbar: HomogeneousSpace,
}

/// `p^{Ḡ→G/H}`, `p^{G/H→Ḡ/H̄}`, `p^{Ḡ→Ḡ/H̄}`, each assembled from
/// sections and projections, plus a pointwise check of the commuting
/// square on 1000 samples.
pub fn descend_map(q: &QuotientPresentation, h: &SubgroupEmbedding) -> Result<DescendedMaps> {
    let g = q.group();
    let n = q.normal_subgroup();
    if !n.is_contained_in(h) {
        return Err(Error::ChainViolated);
    }
    let g_mod_h = HomogeneousSpace::new(h)?;
    let base_n = q.base();
    let hbar_pos: Vec<usize> = h
        .positions
        .iter()
        .filter(|p| !n.positions.contains(p))
        .map(|p| base_n.iter().position(|b| b == p).expect("base index"))
        .collect();
    let hbar_in_gbar = SubgroupEmbedding::named(q.quotient(), hbar_pos, format!("{}/N", h.chart.name()))?;
    let gbar_mod_hbar = HomogeneousSpace::new(&hbar_in_gbar)?;

    let g_to_gbar = CoordMap::pick("p^{G→Ḡ}", g.dim(), base_n);
    let g_to_g_mod_h = CoordMap::pick("p^{G→G/H}", g.dim(), g_mod_h.base());
    let gbar_to_gbar_mod_hbar = CoordMap::pick("p^{Ḡ→Ḡ/H̄}", base_n.len(), gbar_mod_hbar.base());
    let section_n = CoordMap::lift("s_N", base_n, g.identity());
    let gbar_to_g_mod_h = section_n.then(&g_to_g_mod_h)?;
    let section_h = CoordMap::lift("s_H", g_mod_h.base(), g.identity());
    let g_mod_h_to_gbar_mod_hbar = section_h.then(&g_to_gbar)?.then(&gbar_to_gbar_mod_hbar)?;

    let maps = DescendedMaps {
        g_to_gbar: named(g_to_gbar, "p^{G→Ḡ}"),
        g_to_g_mod_h: named(g_to_g_mod_h, "p^{G→G/H}"),
        gbar_to_g_mod_h: named(gbar_to_g_mod_h, "p^{Ḡ→G/H}"),
        g_mod_h_to_gbar_mod_hbar: named(g_mod_h_to_gbar_mod_hbar, "p^{G/H→Ḡ/H̄}"),
        gbar_to_gbar_mod_hbar: named(gbar_to_gbar_mod_hbar, "p^{Ḡ→Ḡ/H̄}"),
        hbar_in_gbar,
        gbar_mod_hbar,
    };
    maps.check_square(q, h, &mut ChaCha8Rng::seed_from_u64(SAMPLE_SEED ^ 3), 1000)?;
    Ok(maps)
}

fn named(mut m: CoordMap, name: &str) -> CoordMap {
    m.name = name.to_string();
    m
}

impl DescendedMaps {
    /// Pointwise commutativity `p^{Ḡ→Ḡ/H̄}∘p^{G→Ḡ} = p^{G/H→Ḡ/H̄}∘p^{G→G/H}`,
    /// representative independence of `p^{G/H→Ḡ/H̄}` and `p^{Ḡ→G/H}`, at 1e-9.
    pub fn check_square(
        &self,
        q: &QuotientPresentation,
        h: &SubgroupEmbedding,
        rng: &mut ChaCha8Rng,
        samples: usize,
    ) -> Result<()> {
        let g = q.group();
        let n = q.normal_subgroup();
        let fail = |what: &str, x: &[f64]| Err(Error::ChartInvariant(format!("{what} fails at {x:?}")));
        for _ in 0..samples {
            let x = g.sample(rng, 0.8);
            let a = self.gbar_to_gbar_mod_hbar.apply(&self.g_to_gbar.apply(&x));
            let b = self.g_mod_h_to_gbar_mod_hbar.apply(&self.g_to_g_mod_h.apply(&x));
            if !close(&a, &b, 1e-9) {
                return fail("commuting square", &x);
            }
            let xh = g.mul(&x, &h.include(&h.chart.sample(rng, 0.8)));
            let c = self.g_mod_h_to_gbar_mod_hbar.apply(&self.g_to_g_mod_h.apply(&xh));
            if !close(&c, &b, 1e-9) {
                return fail("representative independence of p^{G/H→Ḡ/H̄}", &x);
            }
            let xn = g.mul(&x, &n.include(&n.chart.sample(rng, 0.8)));
            let d = self.gbar_to_g_mod_h.apply(&q.project_unchecked(&xn));
            if !close(&d, &self.g_to_g_mod_h.apply(&x), 1e-9) {
                return fail("p^{Ḡ→G/H}∘p^{G→Ḡ} = p^{G→G/H}", &x);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group_core::catalog::group;

    fn quotient(name: &str, fiber: &[usize]) -> Result<QuotientPresentation> {
        let g = group(name)?;
        let n = SubgroupEmbedding::new(&g, fiber.to_vec())?;
        quotient_group(&g, &n, &Split::from_fiber(g.dim(), fiber))
    }

    #[test]
    fn heisenberg_mod_center_is_the_plane() {
        let q = quotient("heis3", &[2]).unwrap();
        let gbar = q.quotient();
        // addition oracle on R²
        assert_eq!(gbar.mul(&[1.5, -2.0], &[0.25, 4.0]), vec![1.75, 2.0]);
        assert!((q.weil_scale() - 1.0).abs() < 1e-12);
        assert!((gbar.modular(&[3.0, -1.0]).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(q.project(&[1.0, 2.0, 3.0]).unwrap(), vec![1.0, 2.0]);
    }

    #[test]
    fn trivial_quotient_is_the_group() {
        let q = quotient("aff1", &[]).unwrap();
        let x = [2.0, 1.0];
        let y = [3.0, 4.0];
        assert_eq!(q.quotient().mul(&x, &y), q.group().mul(&x, &y));
        assert_eq!(q.weil_scale(), 1.0);
    }

    #[test]
    fn borel_mod_corner_is_five_dimensional() {
        let q = quotient("borel3", &[5]).unwrap();
        assert_eq!(q.quotient().dim(), 5);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        q.check_invariants(&mut rng, 1000).unwrap();
        // z = a1·t for g = s(ḡ)·(I + tE13), so the pullback factor is 1
        assert!((q.weil_scale() - 1.0).abs() < 1e-12);
        // projection is constant on N-cosets
        let g = [0.7, 1.3, 2.0, 0.4, -0.2, 0.9];
        let gn = q.group().mul(&g, &q.normal_subgroup().include(&[1.7]));
        assert_eq!(q.project_unchecked(&gn), q.project_unchecked(&g));
        assert!((gn[5] - (0.9 + 0.7 * 1.7)).abs() < 1e-14);
        let dq = q.quotient().modular(&[2.0, 1.0, 0.5, 0.3, 0.1]).unwrap();
        assert!((dq - 0.25).abs() < 1e-12);
    }

    #[test]
    fn non_normal_and_bad_splits_are_rejected() {
        assert!(matches!(quotient("aff1", &[0]), Err(Error::NotNormalUnderSplit)));
        let g = group("heis3").unwrap();
        let n = SubgroupEmbedding::new(&g, vec![2]).unwrap();
        let bad = Split { base: vec![0, 2], fiber: vec![1] };
        assert!(matches!(quotient_group(&g, &n, &bad), Err(Error::SplitNotTrivializing(_))));
        // x-axis of the Heisenberg group is a subgroup but not normal
        assert!(matches!(quotient("heis3", &[0]), Err(Error::NotNormalUnderSplit)));
        // {(x, y, 0)} is not closed under the product
        assert!(matches!(SubgroupEmbedding::new(&g, vec![0, 1]), Err(Error::NotSubgroup)));
    }

    #[test]
    fn borel_chain_square_commutes() {
        let q = quotient("borel3", &[5]).unwrap();
        let h = SubgroupEmbedding::new(q.group(), vec![0, 5]).unwrap();
        let maps = descend_map(&q, &h).unwrap();
        assert_eq!(maps.hbar_in_gbar.positions(), &[0]);
        assert_eq!(maps.g_mod_h_to_gbar_mod_hbar.outputs, (0..4).map(Source::Coord).collect::<Vec<_>>());
        let space = HomogeneousSpace::new(&h).unwrap();
        let g = [0.7, 1.3, 2.0, 0.4, -0.2, 0.9];
        let (b, hh) = space.decompose(&g).unwrap();
        assert_eq!(b, vec![1.3, 2.0, 0.4, -0.2]);
        assert!((hh[0] - 0.7).abs() < 1e-15 && (hh[1] - 0.9).abs() < 1e-15);
    }

    #[test]
    fn chain_requires_n_inside_h() {
        let q = quotient("borel3", &[5]).unwrap();
        let h = SubgroupEmbedding::new(q.group(), vec![0]).unwrap();
        assert!(matches!(descend_map(&q, &h), Err(Error::ChainViolated)));
    }

    #[test]
    fn n_equal_h_makes_hbar_trivial() {
        let q = quotient("heis3", &[2]).unwrap();
        let maps = descend_map(&q, q.normal_subgroup()).unwrap();
        assert!(maps.hbar_in_gbar.is_trivial());
        assert_eq!(maps.gbar_to_g_mod_h.apply(&[1.0, 2.0]), vec![1.0, 2.0]);
    }

    #[test]
    fn fiber_box_follows_the_coset() {
        let q = quotient("borel3", &[5]).unwrap();
        let target = SupportBox(vec![Some((0.5, 1.5)); 3].into_iter().chain(vec![Some((-1.0, 1.0)); 3]).collect());
        let k = q.section(&[0.8, 1.0, 1.0, 0.0, 0.0]);
        let bx = q.space().fiber_box(&k, &target).unwrap().unwrap();
        // t ranges over z/a1
        assert!((bx.lo[0] + 1.25).abs() < 1e-14 && (bx.hi[0] - 1.25).abs() < 1e-14);
        let far = q.section(&[3.0, 1.0, 1.0, 0.0, 0.0]);
        assert!(q.space().fiber_box(&far, &target).unwrap().is_none());
    }

    #[test]
    fn weil_scale_by_quadrature() {
        use crate::integrate::IntegrationPolicy;
        use crate::measure::TestFunction;
        let p = IntegrationPolicy::default();
        let r2 = quotient("R^2", &[1]).unwrap();
        let b = TestFunction::bump(vec![0.1, 0.2], vec![0.7, 0.9]).unwrap();
        assert!((weil_normalize(&r2, &b, &p).unwrap() - 1.0).abs() < 1e-12);
        let h = quotient("heis3", &[2]).unwrap();
        let betas: Vec<TestFunction> = [(0.0, 0.6), (0.3, 0.9), (-0.2, 0.5)]
            .iter()
            .map(|&(c, r)| TestFunction::bump(vec![c, -c, 0.5 * c], vec![r, 1.1 * r, 0.9 * r]).unwrap())
            .collect();
        for c in weil_scale_consistent(&h, &betas, &p, 1e-5).unwrap() {
            assert!((c - 1.0).abs() < 1e-10);
        }
        let zero = TestFunction::from_spec(
            &crate::measure::FunctionSpec::Bump { center: vec![0.0; 2], radius: vec![1.0; 2], amplitude: [0.0, 0.0] },
            2,
        )
        .unwrap();
        assert!(matches!(weil_normalize(&r2, &zero, &p), Err(Error::DegenerateNormalizer)));
    }

    #[test]
    fn coord_map_composition() {
        let lift = CoordMap::lift("s", &[0, 2], &[1.0, 0.0, 0.0]);
        assert_eq!(lift.apply(&[5.0, 7.0]), vec![5.0, 0.0, 7.0]);
        let p = CoordMap::pick("p", 3, &[1, 2]);
        let c = lift.then(&p).unwrap();
        assert_eq!(c.outputs, vec![Source::Const(0.0), Source::Coord(1)]);
        assert_eq!(c.dropped(), vec![0]);
        assert!(p.then(&p).is_err());
    }
}
