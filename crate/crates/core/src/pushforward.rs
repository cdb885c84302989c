//! Pushforward of densities along canonical projections, in weak form
//! `∫ α d p_*(μ) = ∫ (α∘p) dμ` and, for quotients by normal subgroups, in
//! density form `ψ(ḡ) = ∫_N φ(s(ḡ)n) dn`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::integrate::{IntegralResult, IntegrationPolicy};
use crate::measure::{certify, check_membership, pair, Density, PropernessCert, TestFunction};
use crate::subgroup_quotient::{compose_route, CoordMap, HomogeneousSpace, QuotientPresentation};

/// `∫ α(route(g)) dμ(g)`. The certificate must cover every coordinate the
/// route forgets.
pub fn pushforward_pair(
    mu: &Density,
    cert: Option<&PropernessCert>,
    route: &[CoordMap],
    alpha: &TestFunction,
    policy: &IntegrationPolicy,
) -> Result<IntegralResult> {
    let map = if route.is_empty() {
        CoordMap::identity("id", mu.chart().dim())
    } else {
        compose_route(route)?
    };
    if map.source_dim != mu.chart().dim() {
        return Err(Error::SpaceMismatch { expected: mu.chart().dim(), got: map.source_dim });
    }
    if alpha.dim() != map.target_dim() {
        return Err(Error::SpaceMismatch { expected: map.target_dim(), got: alpha.dim() });
    }
    let dropped = map.dropped();
    let cert = cert.ok_or_else(|| Error::MissingCertificate(format!("no certificate for {}", map.name)))?;
    if let Some(c) = dropped.iter().find(|c| !cert.fiber_coords.contains(c)) {
        return Err(Error::MissingCertificate(format!(
            "{} forgets coordinate {c}, which the certificate for {} does not cover",
            map.name, cert.space
        )));
    }
    match alpha.pullback(&map)? {
        Some(f) => pair(mu, &f, policy),
        None => Ok(IntegralResult::zero()),
    }
}

/// `p_*^{G→Ḡ}(φ dg) = ψ dḡ` with `ψ(ḡ) = ∫_N φ(s(ḡ)n) dn` and `dḡ` the
/// Weil-normalized quotient measure.
pub fn pushforward_density(
    mu: &Density,
    cert: &PropernessCert,
    q: &QuotientPresentation,
    policy: &IntegrationPolicy,
) -> Result<Density> {
    let n_pos = q.normal_subgroup().positions();
    if let Some(c) = n_pos.iter().find(|c| !cert.fiber_coords.contains(c)) {
        return Err(Error::MissingCertificate(format!("certificate for {} does not cover coordinate {c} of N", cert.space)));
    }
    if mu.chart().name() != q.group().name() {
        return Err(Error::SpaceMismatch { expected: q.group().dim(), got: mu.chart().dim() });
    }
    let support = mu.support().pick(q.base());
    let phi = mu.phi().clone();
    let full_support = mu.support().clone();
    let scale = mu.haar_scale();
    let inner = policy.for_nested(q.base().len(), n_pos.len()).clone();
    let q2 = q.clone();
    let psi = TestFunction::new(format!("p_*({})", mu.label()), support, move |b| {
        let f = |g: &[f64]| phi.eval(g);
        q2.space()
            .fiber_integral(&q2.section(b), &f, &full_support, None, &inner)
            .map_or(Complex64::new(f64::NAN, f64::NAN), |v| v * scale)
    });
    Density::with_scale(q.quotient(), psi, q.weil_scale())
}

/// Certificate for `ψ ∈ M_{H̄}(Ḡ)` given `space = Ḡ/H̄`.
pub fn membership_after_pushforward(psi: &Density, space: &HomogeneousSpace) -> Result<PropernessCert> {
    check_membership(psi, space)
}

/// `α(gH) = ∫_H ν(g·h) dh`, evaluated at the section of each base point.
pub fn build_fiber_average(nu: &TestFunction, space: &HomogeneousSpace, policy: &IntegrationPolicy) -> Result<TestFunction> {
    if nu.dim() != space.group().dim() {
        return Err(Error::SpaceMismatch { expected: space.group().dim(), got: nu.dim() });
    }
    nu.support().to_coord_box()?;
    let support = nu.support().pick(space.base());
    let inner = policy.for_nested(space.base().len(), space.subgroup().dim()).clone();
    let (nu2, sp) = (nu.clone(), space.clone());
    Ok(TestFunction::new(format!("avg_H({})", nu.label()), support, move |b| {
        let f = |g: &[f64]| nu2.eval(g);
        sp.fiber_integral(&sp.section(b), &f, nu2.support(), None, &inner)
            .unwrap_or(Complex64::new(f64::NAN, f64::NAN))
    }))
}

/// A pushforward built step by step: leading quotient steps are realized as
/// densities, later steps stay in weak form.
#[derive(Clone, Debug)]
pub struct PushforwardHandle {
    source: Density,
    cert: PropernessCert,
    realized: Density,
    weak: Vec<CoordMap>,
    route: Vec<String>,
}

impl PushforwardHandle {
    pub fn new(mu: Density, cert: PropernessCert) -> PushforwardHandle {
        PushforwardHandle { realized: mu.clone(), source: mu, cert, weak: vec![], route: vec![] }
    }

    pub fn source(&self) -> &Density {
        &self.source
    }

    /// Names of the steps taken so far.
    pub fn route(&self) -> &[String] {
        &self.route
    }

    /// The pushforward as a density, present while every step is a quotient.
    pub fn realized_density(&self) -> Option<&Density> {
        self.weak.is_empty().then_some(&self.realized)
    }

    fn target_dim(&self) -> usize {
        self.weak.last().map_or(self.realized.chart().dim(), CoordMap::target_dim)
    }

    /// Density step along `G → G/N`.
    pub fn quotient(mut self, q: &QuotientPresentation, policy: &IntegrationPolicy) -> Result<PushforwardHandle> {
        if !self.weak.is_empty() {
            return Err(Error::Unsupported("density step after a weak step".into()));
        }
        let cert = if self.route.is_empty() {
            self.cert.clone()
        } else {
            certify(&self.realized, &q.space().name(), q.normal_subgroup().positions())?
        };
        self.realized = pushforward_density(&self.realized, &cert, q, policy)?;
        self.route.push(format!("p^{{{}→{}}}", q.group().name(), q.quotient().name()));
        Ok(self)
    }

    /// Weak step along a canonical map.
    pub fn map(mut self, m: &CoordMap) -> Result<PushforwardHandle> {
        if m.source_dim != self.target_dim() {
            return Err(Error::SpaceMismatch { expected: self.target_dim(), got: m.source_dim });
        }
        self.route.push(m.name.clone());
        self.weak.push(m.clone());
        Ok(self)
    }

    pub fn pair(&self, alpha: &TestFunction, policy: &IntegrationPolicy) -> Result<IntegralResult> {
        if self.weak.is_empty() {
            if alpha.dim() != self.realized.chart().dim() {
                return Err(Error::SpaceMismatch { expected: self.realized.chart().dim(), got: alpha.dim() });
            }
            return pair(&self.realized, alpha, policy);
        }
        let cert = if self.route.len() == self.weak.len() {
            self.cert.clone()
        } else {
            let dropped = compose_route(&self.weak)?.dropped();
            certify(&self.realized, "remaining route", &dropped)?
        };
        pushforward_pair(&self.realized, Some(&cert), &self.weak, alpha, policy)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group_core::catalog::group;
    use crate::integrate::{integrate_box, CoordBox, Integrator};
    use crate::measure::{bump_profile, FunctionSpec};
    use crate::subgroup_quotient::{quotient_group, Split, SubgroupEmbedding};

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm()
    }

    fn heis_center() -> QuotientPresentation {
        let g = group("heis3").unwrap();
        let n = SubgroupEmbedding::new(&g, vec![2]).unwrap();
        quotient_group(&g, &n, &Split::from_fiber(3, &[2])).unwrap()
    }

    fn z_product(g: &crate::group_core::GroupChart) -> Density {
        Density::from_spec(
            g,
            &FunctionSpec::Product {
                base_coords: vec![0, 1],
                base: Box::new(FunctionSpec::Constant { value: [1.0, 0.0] }),
                fiber_coords: vec![2],
                fiber: Box::new(FunctionSpec::bump(vec![0.2], vec![0.9])),
            },
        )
        .unwrap()
    }

    #[test]
    fn identity_route_is_plain_pairing() {
        let g = group("aff1").unwrap();
        let mu = Density::from_spec(&g, &FunctionSpec::bump(vec![1.0, 0.0], vec![0.5, 1.0])).unwrap();
        let cert = certify(&mu, "G", &[]).unwrap();
        let alpha = TestFunction::bump(vec![1.1, 0.2], vec![0.6, 0.8]).unwrap();
        let p = IntegrationPolicy::default();
        let a = pushforward_pair(&mu, Some(&cert), &[], &alpha, &p).unwrap().value;
        assert_eq!(a, pair(&mu, &alpha, &p).unwrap().value);
        assert!(matches!(
            pushforward_pair(&mu, None, &[], &alpha, &p),
            Err(Error::MissingCertificate(_))
        ));
    }

    #[test]
    fn separated_variables_on_heisenberg() {
        let q = heis_center();
        let g = q.group().clone();
        let mu = z_product(&g);
        let cert = check_membership(&mu, q.space()).unwrap();
        let alpha = TestFunction::bump(vec![0.3, -0.1], vec![0.8, 1.1]).unwrap();
        let p = IntegrationPolicy::default();
        let route = [CoordMap::pick("p", 3, &[0, 1])];
        let weak = pushforward_pair(&mu, Some(&cert), &route, &alpha, &p).unwrap().value;
        // oracle: (∫v dz)·(∫α dx dy) with ∫ bump = 32/35 per axis
        let want = (0.9 * 32.0 / 35.0) * (0.8 * 32.0 / 35.0) * (1.1 * 32.0 / 35.0);
        assert!(rel(weak, Complex64::new(want, 0.0)) < 1e-12);

        let psi = pushforward_density(&mu, &cert, &q, &p).unwrap();
        assert!((psi.phi().eval(&[5.0, -3.0]).re - 0.9 * 32.0 / 35.0).abs() < 1e-13);
        let strong = pair(&psi, &alpha, &p).unwrap().value;
        assert!(rel(strong, weak) < 1e-12);
    }

    #[test]
    fn missing_fiber_certificate_is_refused() {
        let q = heis_center();
        let g = q.group().clone();
        let mu = Density::from_spec(
            &g,
            &FunctionSpec::Product {
                base_coords: vec![0, 1],
                base: Box::new(FunctionSpec::bump(vec![0.0, 0.0], vec![1.0, 1.0])),
                fiber_coords: vec![2],
                fiber: Box::new(FunctionSpec::Constant { value: [1.0, 0.0] }),
            },
        )
        .unwrap();
        let trivial_cert = certify(&mu, "G", &[]).unwrap();
        let alpha = TestFunction::bump(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let route = [CoordMap::pick("p", 3, &[0, 1])];
        let p = IntegrationPolicy::default();
        assert!(matches!(
            pushforward_pair(&mu, Some(&trivial_cert), &route, &alpha, &p),
            Err(Error::MissingCertificate(_))
        ));
        assert!(matches!(pushforward_density(&mu, &trivial_cert, &q, &p), Err(Error::MissingCertificate(_))));
        let wrong = TestFunction::bump(vec![0.0], vec![1.0]).unwrap();
        let cert = certify(&mu, "G", &[0, 1, 2]).unwrap_err();
        assert!(matches!(cert, Error::NotCertifiable(_)));
        let full = certify(&Density::from_spec(&g, &FunctionSpec::bump(vec![0.0; 3], vec![1.0; 3])).unwrap(), "G", &[2]).unwrap();
        assert!(matches!(
            pushforward_pair(&mu, Some(&full), &route, &wrong, &p),
            Err(Error::SpaceMismatch { .. })
        ));
    }

    #[test]
    fn trivial_quotient_density_is_unchanged() {
        let g = group("aff1").unwrap();
        let q = quotient_group(&g, &SubgroupEmbedding::trivial(&g), &Split::from_fiber(2, &[])).unwrap();
        let mu = Density::from_spec(&g, &FunctionSpec::bump(vec![1.0, 0.0], vec![0.5, 1.0])).unwrap();
        let cert = certify(&mu, "G", &[]).unwrap();
        let psi = pushforward_density(&mu, &cert, &q, &IntegrationPolicy::default()).unwrap();
        for x in [[1.0, 0.0], [0.8, 0.3], [1.4, -0.9]] {
            assert_eq!(psi.phi().eval(&x), mu.phi().eval(&x));
        }
    }

    #[test]
    fn borel_density_and_weak_forms_agree() {
        let g = group("borel3").unwrap();
        let n = SubgroupEmbedding::new(&g, vec![5]).unwrap();
        let q = quotient_group(&g, &n, &Split::from_fiber(6, &[5])).unwrap();
        let mu = Density::from_spec(&g, &FunctionSpec::bump(vec![1.0, 1.0, 1.0, 0.0, 0.0, 0.0], vec![0.4; 6])).unwrap();
        let cert = check_membership(&mu, q.space()).unwrap();
        let p = IntegrationPolicy::default();
        let handle = PushforwardHandle::new(mu.clone(), cert.clone()).quotient(&q, &p).unwrap();
        let to_q = [CoordMap::pick("p", 6, q.base())];
        for (c, r) in [(0.0, 0.5), (0.1, 0.3), (-0.15, 0.35)] {
            let alpha =
                TestFunction::bump(vec![1.0 + c, 1.0 - c, 1.0, c, -c, 0.0].into_iter().take(5).collect(), vec![r; 5])
                    .unwrap();
            let weak = pushforward_pair(&mu, Some(&cert), &to_q, &alpha, &p).unwrap().value;
            let strong = handle.pair(&alpha, &p).unwrap().value;
            assert!(rel(strong, weak) < 1e-5, "{strong} vs {weak}");
        }
    }

    #[test]
    fn fiber_average_is_representative_independent() {
        let g = group("aff1").unwrap();
        let h = SubgroupEmbedding::new(&g, vec![0]).unwrap();
        let space = HomogeneousSpace::new(&h).unwrap();
        let nu = TestFunction::bump(vec![1.0, 0.2], vec![0.5, 0.7]).unwrap();
        let p = IntegrationPolicy::default();
        let alpha = build_fiber_average(&nu, &space, &p).unwrap();
        // α(b) = bump(b) · ∫ bump((a − 1)/0.5) da/a, with the a-integral as a 1-D oracle
        let ia = integrate_box(
            |x| Complex64::new(bump_profile((x[0] - 1.0) / 0.5) / x[0], 0.0),
            &CoordBox::new(vec![0.5], vec![1.5]).unwrap(),
            &Integrator::gauss(40, 4),
        )
        .unwrap()
        .value;
        for b in [0.2, 0.5, -0.3] {
            let want = ia * bump_profile((b - 0.2) / 0.7);
            assert!((alpha.eval(&[b]) - want).norm() < 1e-10);
            // g and g·h' give the same coset
            let gh = g.mul(&space.section(&[b]), &[1.7, 0.0]);
            assert_eq!(space.project_unchecked(&gh), vec![b]);
        }
        let trivial = HomogeneousSpace::new(&SubgroupEmbedding::trivial(&g)).unwrap();
        let same = build_fiber_average(&nu, &trivial, &p).unwrap();
        assert_eq!(same.eval(&[1.1, 0.3]), nu.eval(&[1.1, 0.3]));
        let zero = build_fiber_average(
            &TestFunction::from_spec(&FunctionSpec::Bump { center: vec![1.0, 0.0], radius: vec![0.5, 0.5], amplitude: [0.0, 0.0] }, 2).unwrap(),
            &space,
            &p,
        )
        .unwrap();
        assert_eq!(zero.eval(&[0.1]), Complex64::new(0.0, 0.0));
    }
}
