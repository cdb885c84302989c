//! Continuous densities `μ = φ(g)dg`, compactly supported test functions,
//! and structural properness certificates.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group_core::GroupChart;
use crate::integrate::{image_box, integrate_box_axes, IntegralResult, IntegrationPolicy, SupportBox};
use crate::subgroup_quotient::{CoordMap, HomogeneousSpace, Source};

/// `(1 − t²)³` on `[−1, 1]`, zero outside.
pub fn bump_profile(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        let u = 1.0 - t * t;
        u * u * u
    }
}

fn unit_amplitude() -> [f64; 2] {
    [1.0, 0.0]
}

/// Declarative description of a function on a coordinate space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FunctionSpec {
    /// `amplitude · Π bump((xᵢ − centerᵢ)/radiusᵢ)`.
    Bump {
        center: Vec<f64>,
        radius: Vec<f64>,
        #[serde(default = "unit_amplitude")]
        amplitude: [f64; 2],
    },
    Constant {
        #[serde(default = "unit_amplitude")]
        value: [f64; 2],
    },
    /// `base(x[base_coords]) · fiber(x[fiber_coords])`; coordinates in
    /// neither list are left unconstrained.
    Product {
        base_coords: Vec<usize>,
        base: Box<FunctionSpec>,
        fiber_coords: Vec<usize>,
        fiber: Box<FunctionSpec>,
    },
}

type Eval = Arc<dyn Fn(&[f64]) -> Complex64 + Send + Sync>;

impl FunctionSpec {
    pub fn bump(center: Vec<f64>, radius: Vec<f64>) -> FunctionSpec {
        FunctionSpec::Bump { center, radius, amplitude: [1.0, 0.0] }
    }

    fn build(&self, dim: usize) -> Result<(Eval, SupportBox)> {
        match self {
            FunctionSpec::Bump { center, radius, amplitude } => {
                if center.len() != dim || radius.len() != dim {
                    return Err(Error::DimensionMismatch { expected: dim, got: center.len().max(radius.len()) });
                }
                if radius.iter().any(|r| !(r.is_finite() && *r > 0.0)) || center.iter().any(|c| !c.is_finite()) {
                    return Err(Error::Parse(format!("bump needs finite centre and positive radii, got {radius:?}")));
                }
                let support = SupportBox(center.iter().zip(radius).map(|(c, r)| Some((c - r, c + r))).collect());
                let (c, r) = (center.clone(), radius.clone());
                let a = Complex64::new(amplitude[0], amplitude[1]);
                let eval: Eval = Arc::new(move |x: &[f64]| {
                    let mut v = 1.0;
                    for i in 0..c.len() {
                        v *= bump_profile((x[i] - c[i]) / r[i]);
                        if v == 0.0 {
                            break;
                        }
                    }
                    a * v
                });
                Ok((eval, support))
            }
            FunctionSpec::Constant { value } => {
                let v = Complex64::new(value[0], value[1]);
                Ok((Arc::new(move |_: &[f64]| v), SupportBox::unbounded(dim)))
            }
            FunctionSpec::Product { base_coords, base, fiber_coords, fiber } => {
                let mut seen = vec![false; dim];
                for &i in base_coords.iter().chain(fiber_coords) {
                    if i >= dim || std::mem::replace(&mut seen[i], true) {
                        return Err(Error::Parse(format!(
                            "product coordinates {base_coords:?} / {fiber_coords:?} must be distinct and < {dim}"
                        )));
                    }
                }
                let (fb, sb) = base.build(base_coords.len())?;
                let (ff, sf) = fiber.build(fiber_coords.len())?;
                let mut support = SupportBox::unbounded(dim);
                for (k, &i) in base_coords.iter().enumerate() {
                    support.0[i] = sb.0[k];
                }
                for (k, &i) in fiber_coords.iter().enumerate() {
                    support.0[i] = sf.0[k];
                }
                let (bc, fc) = (base_coords.clone(), fiber_coords.clone());
                let eval: Eval = Arc::new(move |x: &[f64]| {
                    let xb: smallvec::SmallVec<[f64; 8]> = bc.iter().map(|&i| x[i]).collect();
                    let u = fb(&xb);
                    if u.re == 0.0 && u.im == 0.0 {
                        return u;
                    }
                    let xf: smallvec::SmallVec<[f64; 8]> = fc.iter().map(|&i| x[i]).collect();
                    u * ff(&xf)
                });
                Ok((eval, support))
            }
        }
    }
}

/// A continuous function on a coordinate space with a support box that
/// contains its support.
#[derive(Clone)]
pub struct TestFunction {
    eval: Eval,
    support: SupportBox,
    label: String,
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TestFunction({}, {:?})", self.label, self.support)
    }
}

impl TestFunction {
    pub fn new(
        label: impl Into<String>,
        support: SupportBox,
        eval: impl Fn(&[f64]) -> Complex64 + Send + Sync + 'static,
    ) -> TestFunction {
        TestFunction { eval: Arc::new(eval), support, label: label.into() }
    }

    pub fn from_spec(spec: &FunctionSpec, dim: usize) -> Result<TestFunction> {
        let (eval, support) = spec.build(dim)?;
        let label = serde_json::to_string(spec).map_err(|e| Error::Parse(e.to_string()))?;
        Ok(TestFunction { eval, support, label })
    }

    pub fn bump(center: Vec<f64>, radius: Vec<f64>) -> Result<TestFunction> {
        let dim = center.len();
        TestFunction::from_spec(&FunctionSpec::bump(center, radius), dim)
    }

    pub fn constant(dim: usize, value: Complex64) -> TestFunction {
        TestFunction::new(format!("constant({value})"), SupportBox::unbounded(dim), move |_| value)
    }

    pub fn zero(dim: usize) -> TestFunction {
        TestFunction::constant(dim, Complex64::new(0.0, 0.0))
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        (self.eval)(x)
    }

    pub fn support(&self) -> &SupportBox {
        &self.support
    }

    pub fn dim(&self) -> usize {
        self.support.dim()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_compact(&self) -> bool {
        self.support.is_bounded()
    }

    pub fn relabel(mut self, label: impl Into<String>) -> TestFunction {
        self.label = label.into();
        self
    }

    /// `f ∘ map` on the map's source, or `None` when it vanishes identically.
    pub fn pullback(&self, map: &CoordMap) -> Result<Option<TestFunction>> {
        if map.target_dim() != self.dim() {
            return Err(Error::SpaceMismatch { expected: map.target_dim(), got: self.dim() });
        }
        let mut support = SupportBox::unbounded(map.source_dim);
        for (j, src) in map.outputs.iter().enumerate() {
            let Some(iv) = self.support.interval(j) else { continue };
            match *src {
                Source::Coord(k) => match support.restrict(k, iv) {
                    Some(s) => support = s,
                    None => return Ok(None),
                },
                Source::Const(c) => {
                    if c < iv.0 || c > iv.1 {
                        return Ok(None);
                    }
                }
            }
        }
        let f = self.eval.clone();
        let outputs = map.outputs.clone();
        let eval = move |x: &[f64]| {
            let y: smallvec::SmallVec<[f64; 8]> = outputs
                .iter()
                .map(|s| match *s {
                    Source::Coord(i) => x[i],
                    Source::Const(c) => c,
                })
                .collect();
            f(&y)
        };
        Ok(Some(TestFunction::new(format!("({}) ∘ {}", self.label, map.name), support, eval)))
    }

    /// `Σ cᵢ fᵢ`, supported in the hull of the supports.
    pub fn linear_combination(terms: &[(Complex64, &TestFunction)]) -> Result<TestFunction> {
        let dim = terms.first().map(|t| t.1.dim()).ok_or_else(|| Error::Unsupported("empty combination".into()))?;
        if let Some(t) = terms.iter().find(|t| t.1.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: t.1.dim() });
        }
        let support = SupportBox(
            (0..dim)
                .map(|i| {
                    terms.iter().try_fold(None::<(f64, f64)>, |acc, t| {
                        let (a, b) = t.1.support.interval(i)?;
                        Some(Some(acc.map_or((a, b), |(l, h)| (l.min(a), h.max(b)))))
                    })?
                })
                .collect(),
        );
        let parts: Vec<(Complex64, Eval)> = terms.iter().map(|(c, f)| (*c, f.eval.clone())).collect();
        let label = terms.iter().map(|(c, f)| format!("({c})·{}", f.label)).collect::<Vec<_>>().join(" + ");
        Ok(TestFunction::new(label, support, move |x| parts.iter().map(|(c, f)| c * f(x)).sum()))
    }

    /// Checks `|f| ≤ 1e-12` on the faces of the support box.
    pub fn check_vanishing<R: Rng + ?Sized>(&self, rng: &mut R, samples: usize) -> Result<()> {
        let bounded = self.support.bounded_coords();
        if bounded.is_empty() {
            return Ok(());
        }
        let mut x = vec![0.0; self.dim()];
        for s in 0..samples {
            for (i, v) in x.iter_mut().enumerate() {
                *v = match self.support.interval(i) {
                    Some((a, b)) => rng.random_range(a..=b),
                    None => rng.random_range(-5.0..5.0),
                };
            }
            let i = bounded[s % bounded.len()];
            let (a, b) = self.support.interval(i).expect("bounded");
            x[i] = if rng.random_bool(0.5) { a } else { b };
            if self.eval(&x).norm() > 1e-12 {
                return Err(Error::ChartInvariant(format!("{} does not vanish at {x:?}", self.label)));
            }
        }
        Ok(())
    }
}

/// Support shape of a density.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    CompactBox,
    /// Bounded only along `bounded`.
    ProductForm { bounded: Vec<usize> },
}

/// `μ = haar_scale · φ(g) · ρ(g) dλ(g)` on a chart.
#[derive(Clone, Debug)]
pub struct Density {
    chart: GroupChart,
    phi: TestFunction,
    haar_scale: f64,
}

impl Density {
    /// Requires the bounded part of the support box to lie in the chart domain.
    pub fn new(chart: &GroupChart, phi: TestFunction) -> Result<Density> {
        Density::with_scale(chart, phi, 1.0)
    }

    pub fn with_scale(chart: &GroupChart, phi: TestFunction, haar_scale: f64) -> Result<Density> {
        if phi.dim() != chart.dim() {
            return Err(Error::DimensionMismatch { expected: chart.dim(), got: phi.dim() });
        }
        for (i, b) in chart.domain().iter().enumerate() {
            if let Some((lo, hi)) = phi.support.interval(i) {
                if !(b.contains(lo) && b.contains(hi)) {
                    return Err(Error::OutsideDomain { chart: chart.name().to_string(), coords: vec![lo, hi] });
                }
            }
        }
        Ok(Density { chart: chart.clone(), phi, haar_scale })
    }

    pub fn from_spec(chart: &GroupChart, spec: &FunctionSpec) -> Result<Density> {
        Density::new(chart, TestFunction::from_spec(spec, chart.dim())?)
    }

    pub fn chart(&self) -> &GroupChart {
        &self.chart
    }

    pub fn phi(&self) -> &TestFunction {
        &self.phi
    }

    pub fn support(&self) -> &SupportBox {
        &self.phi.support
    }

    pub fn haar_scale(&self) -> f64 {
        self.haar_scale
    }

    pub fn label(&self) -> &str {
        &self.phi.label
    }

    pub fn shape(&self) -> Shape {
        if self.phi.is_compact() {
            Shape::CompactBox
        } else {
            Shape::ProductForm { bounded: self.phi.support.bounded_coords() }
        }
    }

    /// The density `g ↦ φ(g·h)`; its support is `supp(φ)·h⁻¹`.
    pub fn right_translate(&self, h: &[f64]) -> Result<Density> {
        self.chart.check(h)?;
        let bx = self
            .phi
            .support
            .to_coord_box()
            .map_err(|_| Error::Unsupported("right translation of a density without compact support".into()))?;
        let hinv = self.chart.inv(h);
        let chart = self.chart.clone();
        let (img, _) = image_box(&bx, chart.dim(), |x, out| out.copy_from_slice(&chart.mul(x, &hinv)));
        let f = self.phi.eval.clone();
        let (c2, h2) = (self.chart.clone(), h.to_vec());
        let phi = TestFunction::new(
            format!("({})(·{h:?})", self.phi.label),
            SupportBox::from_box(&img),
            move |x| f(&c2.mul(x, &h2)),
        );
        Density::with_scale(&self.chart, phi, self.haar_scale)
    }

    pub fn linear_combination(terms: &[(Complex64, &Density)]) -> Result<Density> {
        let first = terms.first().ok_or_else(|| Error::Unsupported("empty combination".into()))?.1;
        let scaled: Vec<(Complex64, &TestFunction)> = terms
            .iter()
            .map(|(c, d)| (c * (d.haar_scale / first.haar_scale), &d.phi))
            .collect();
        Density::with_scale(&first.chart, TestFunction::linear_combination(&scaled)?, first.haar_scale)
    }
}

/// Kinds of structural properness certificate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertKind {
    CompactSupport,
    ProductFormCompactFiber,
}

/// Evidence that a projection restricted to `supp(μ)` is proper: the
/// support is bounded along every fiber coordinate of the projection.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropernessCert {
    pub space: String,
    pub fiber_coords: Vec<usize>,
    pub kind: CertKind,
}

/// Certifies `μ` for the projection forgetting `fiber_coords`.
pub fn certify(mu: &Density, space: &str, fiber_coords: &[usize]) -> Result<PropernessCert> {
    let kind = match mu.shape() {
        Shape::CompactBox => CertKind::CompactSupport,
        Shape::ProductForm { bounded } => {
            let open: Vec<usize> = fiber_coords.iter().copied().filter(|c| !bounded.contains(c)).collect();
            if !open.is_empty() {
                return Err(Error::NotCertifiable(format!(
                    "support of {} is unbounded along fiber coordinates {open:?} of {space}",
                    mu.label()
                )));
            }
            CertKind::ProductFormCompactFiber
        }
    };
    Ok(PropernessCert { space: space.to_string(), fiber_coords: fiber_coords.to_vec(), kind })
}

/// Membership of `μ` in `M_H(G)` for `space = G/H`.
pub fn check_membership(mu: &Density, space: &HomogeneousSpace) -> Result<PropernessCert> {
    let g = space.group();
    if mu.chart.dim() != g.dim() || mu.chart.name() != g.name() {
        return Err(Error::SpaceMismatch { expected: g.dim(), got: mu.chart.dim() });
    }
    certify(mu, &space.name(), space.subgroup().positions())
}

/// `M_H(G) ⊂ M_N(G)`: a certificate for `G/H` yields one for `G/N` when the
/// coordinates of `N` are among those of `H`.
pub fn inclusion_check_mh_in_mn(cert: &PropernessCert, n_space: &HomogeneousSpace) -> Result<PropernessCert> {
    let n_pos = n_space.subgroup().positions();
    if !n_pos.iter().all(|p| cert.fiber_coords.contains(p)) {
        return Err(Error::IncompatibleSplits);
    }
    Ok(PropernessCert { space: n_space.name(), fiber_coords: n_pos.to_vec(), kind: cert.kind })
}

/// `∫ f(g) dμ(g)` over the intersection of the supports.
pub fn pair(mu: &Density, f: &TestFunction, policy: &IntegrationPolicy) -> Result<IntegralResult> {
    if f.dim() != mu.chart.dim() {
        return Err(Error::SpaceMismatch { expected: mu.chart.dim(), got: f.dim() });
    }
    let Some(sup) = mu.support().intersect(f.support()) else {
        return Ok(IntegralResult::zero());
    };
    let bx = sup.to_coord_box()?;
    let chart = &mu.chart;
    let scale = mu.haar_scale;
    let (phi, fe) = (&mu.phi.eval, &f.eval);
    let integrand = |x: &[f64]| {
        let a = fe(x);
        if a.re == 0.0 && a.im == 0.0 {
            return a;
        }
        let b = phi(x);
        if b.re == 0.0 && b.im == 0.0 {
            return b;
        }
        a * b * (scale * chart.haar_density_unchecked(x))
    };
    let extra = policy.scaling_boost(chart, bx.dim());
    integrate_box_axes(&integrand, &bx, policy.for_dim(bx.dim()), policy.estimate_error, &extra)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group_core::catalog::group;
    use crate::integrate::{integrate_box, CoordBox, Integrator};
    use crate::subgroup_quotient::SubgroupEmbedding;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn bump_support_and_value() {
        let f = TestFunction::bump(vec![1.0, 0.0], vec![0.5, 2.0]).unwrap();
        assert_eq!(f.eval(&[1.0, 0.0]), c(1.0));
        assert_eq!(f.eval(&[1.5, 0.0]), c(0.0));
        assert!((f.eval(&[1.25, 1.0]).re - (0.75f64.powi(3) * 0.75f64.powi(3))).abs() < 1e-15);
        f.check_vanishing(&mut ChaCha8Rng::seed_from_u64(1), 200).unwrap();
        assert!(TestFunction::bump(vec![0.0], vec![0.0]).is_err());
    }

    #[test]
    fn spec_round_trips_through_toml() {
        let spec = FunctionSpec::Product {
            base_coords: vec![0, 1],
            base: Box::new(FunctionSpec::Constant { value: [1.0, 0.0] }),
            fiber_coords: vec![2],
            fiber: Box::new(FunctionSpec::bump(vec![0.0], vec![1.0])),
        };
        #[derive(Serialize, Deserialize)]
        struct W {
            f: FunctionSpec,
        }
        let text = toml::to_string(&W { f: spec.clone() }).unwrap();
        let back: W = toml::from_str(&text).unwrap();
        assert_eq!(back.f, spec);
        let f = TestFunction::from_spec(&spec, 3).unwrap();
        assert_eq!(f.support().bounded_coords(), vec![2]);
        assert_eq!(f.eval(&[100.0, -7.0, 0.0]), c(1.0));
    }

    #[test]
    fn membership_follows_fiber_compactness() {
        let g = group("heis3").unwrap();
        let center = HomogeneousSpace::new(&SubgroupEmbedding::new(&g, vec![2]).unwrap()).unwrap();
        let along_z = Density::from_spec(
            &g,
            &FunctionSpec::Product {
                base_coords: vec![0, 1],
                base: Box::new(FunctionSpec::Constant { value: [1.0, 0.0] }),
                fiber_coords: vec![2],
                fiber: Box::new(FunctionSpec::bump(vec![0.0], vec![1.0])),
            },
        )
        .unwrap();
        let cert = check_membership(&along_z, &center).unwrap();
        assert_eq!(cert.kind, CertKind::ProductFormCompactFiber);
        let along_xy = Density::from_spec(
            &g,
            &FunctionSpec::Product {
                base_coords: vec![0, 1],
                base: Box::new(FunctionSpec::bump(vec![0.0, 0.0], vec![1.0, 1.0])),
                fiber_coords: vec![2],
                fiber: Box::new(FunctionSpec::Constant { value: [1.0, 0.0] }),
            },
        )
        .unwrap();
        assert!(matches!(check_membership(&along_xy, &center), Err(Error::NotCertifiable(_))));
        let trivial = HomogeneousSpace::new(&SubgroupEmbedding::trivial(&g)).unwrap();
        assert!(check_membership(&along_xy, &trivial).is_ok());
        let bump = Density::from_spec(&g, &FunctionSpec::bump(vec![0.0; 3], vec![1.0; 3])).unwrap();
        assert_eq!(check_membership(&bump, &center).unwrap().kind, CertKind::CompactSupport);
    }

    #[test]
    fn inclusion_needs_nested_splits() {
        let g = group("borel3").unwrap();
        let h = HomogeneousSpace::new(&SubgroupEmbedding::new(&g, vec![0, 5]).unwrap()).unwrap();
        let n = HomogeneousSpace::new(&SubgroupEmbedding::new(&g, vec![5]).unwrap()).unwrap();
        let unip = HomogeneousSpace::new(&SubgroupEmbedding::new(&g, vec![3, 4, 5]).unwrap()).unwrap();
        let mu = Density::from_spec(
            &g,
            &FunctionSpec::Product {
                base_coords: vec![1, 2, 3, 4],
                base: Box::new(FunctionSpec::Constant { value: [1.0, 0.0] }),
                fiber_coords: vec![0, 5],
                fiber: Box::new(FunctionSpec::bump(vec![1.0, 0.0], vec![0.5, 1.0])),
            },
        )
        .unwrap();
        let cert = check_membership(&mu, &h).unwrap();
        let cn = inclusion_check_mh_in_mn(&cert, &n).unwrap();
        assert_eq!(cn.fiber_coords, vec![5]);
        assert_eq!(inclusion_check_mh_in_mn(&cert, &h).unwrap().fiber_coords, cert.fiber_coords);
        assert!(matches!(inclusion_check_mh_in_mn(&cert, &unip), Err(Error::IncompatibleSplits)));
    }

    #[test]
    fn pairing_basics() {
        let g = group("aff1").unwrap();
        let policy = IntegrationPolicy::default();
        let mu = Density::from_spec(&g, &FunctionSpec::bump(vec![1.0, 0.0], vec![0.5, 1.0])).unwrap();
        let one = TestFunction::constant(2, c(1.0));
        let total = pair(&mu, &one, &policy).unwrap();
        // oracle: ∫∫ b(a)b(t) a⁻² da dt with ∫b = 32/35, by 1-D quadrature
        let ia = integrate_box(
            |x| c(bump_profile((x[0] - 1.0) / 0.5) / (x[0] * x[0])),
            &CoordBox::new(vec![0.5], vec![1.5]).unwrap(),
            &Integrator::gauss(40, 4),
        )
        .unwrap()
        .value;
        assert!((total.value - ia * (32.0 / 35.0)).norm() < 1e-12);
        assert_eq!(pair(&mu, &TestFunction::zero(2), &policy).unwrap().value, c(0.0));
        let far = TestFunction::bump(vec![5.0, 0.0], vec![0.5, 1.0]).unwrap();
        assert_eq!(pair(&mu, &far, &policy).unwrap().value, c(0.0));
    }

    #[test]
    fn pairing_is_linear() {
        // supports are nested so every pairing integrates over the same box
        let g = group("heis3").unwrap();
        let policy = IntegrationPolicy::default();
        let m1 = Density::from_spec(&g, &FunctionSpec::bump(vec![0.0; 3], vec![2.0; 3])).unwrap();
        let m2 = Density::from_spec(&g, &FunctionSpec::bump(vec![0.3, -0.2, 0.1], vec![2.5, 2.2, 2.9])).unwrap();
        let small = TestFunction::bump(vec![0.2, 0.0, 0.0], vec![1.0, 1.0, 1.5]).unwrap();
        let (a, b) = (Complex64::new(0.7, -1.3), Complex64::new(-2.1, 0.4));
        let combo = Density::linear_combination(&[(a, &m1), (b, &m2)]).unwrap();
        let lhs = pair(&combo, &small, &policy).unwrap().value;
        let rhs = a * pair(&m1, &small, &policy).unwrap().value + b * pair(&m2, &small, &policy).unwrap().value;
        assert!((lhs - rhs).norm() <= 1e-10 * rhs.norm());

        let inner = Density::from_spec(&g, &FunctionSpec::bump(vec![0.1, 0.1, 0.0], vec![0.8, 0.9, 1.0])).unwrap();
        let f1 = TestFunction::bump(vec![0.2, 0.0, 0.0], vec![2.0, 2.0, 2.5]).unwrap();
        let f2 = TestFunction::bump(vec![-0.4, 0.3, 0.2], vec![2.1, 1.8, 2.0]).unwrap();
        let fc = TestFunction::linear_combination(&[(a, &f1), (b, &f2)]).unwrap();
        let lhs = pair(&inner, &fc, &policy).unwrap().value;
        let rhs = a * pair(&inner, &f1, &policy).unwrap().value + b * pair(&inner, &f2, &policy).unwrap().value;
        assert!((lhs - rhs).norm() <= 1e-10 * rhs.norm());
    }

    #[test]
    fn unbounded_pairing_is_an_error() {
        let g = group("R^2").unwrap();
        let mu = Density::from_spec(&g, &FunctionSpec::Constant { value: [1.0, 0.0] }).unwrap();
        let f = TestFunction::constant(2, c(1.0));
        assert!(matches!(pair(&mu, &f, &IntegrationPolicy::default()), Err(Error::UnboundedDomain(0))));
    }

    #[test]
    fn right_translation_moves_the_support() {
        let g = group("aff1").unwrap();
        let mu = Density::from_spec(&g, &FunctionSpec::bump(vec![1.0, 0.0], vec![0.5, 1.0])).unwrap();
        let t = mu.right_translate(&[2.0, 0.0]).unwrap();
        // (a, b)·(2, 0) = (2a, b): support a ∈ [0.25, 0.75]
        let s = t.support().interval(0).unwrap();
        assert!((s.0 - 0.25).abs() < 1e-15 && (s.1 - 0.75).abs() < 1e-15);
        assert_eq!(t.phi().eval(&[0.5, 0.0]), c(1.0));
        // ∫ φ(gh) dg = Δ(h)⁻¹ ∫ φ dg with Δ(2, 0) = 1/2
        let one = TestFunction::constant(2, c(1.0));
        let p = IntegrationPolicy::default();
        let ratio = pair(&t, &one, &p).unwrap().value / pair(&mu, &one, &p).unwrap().value;
        assert!((ratio.re - 2.0).abs() < 1e-10);
    }

    #[test]
    fn pullback_along_a_projection() {
        let alpha = TestFunction::bump(vec![0.0], vec![1.0]).unwrap();
        let p = CoordMap::pick("p", 3, &[2]);
        let f = alpha.pullback(&p).unwrap().unwrap();
        assert_eq!(f.support().bounded_coords(), vec![2]);
        assert_eq!(f.eval(&[9.0, 9.0, 0.0]), c(1.0));
        let lift = CoordMap::lift("s", &[], &[3.0]);
        assert!(alpha.pullback(&lift).unwrap().is_none());
    }
}
