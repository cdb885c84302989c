//! Matrix Lie groups on a single global coordinate chart.
//!
//! A [`GroupChart`] owns a coordinate group law, its domain and the identity.
//! The left Haar density and the modular function are derived from the
//! differentials of left and right translations at the identity:
//!
//! * `ρ(g) = 1 / |det d(L_g)_e|`, so `dg = ρ(g) dλ` is left invariant with `ρ(e) = 1`;
//! * `Δ(h) = |det d(R_h)_e| / |det d(L_h)_e|`, which gives
//!   `∫ f(g h⁻¹) dg = Δ(h) ∫ f(g) dg`.

pub mod catalog;
pub mod dual;
pub mod expr;
pub mod law;
mod linalg;

use std::fmt;
use std::ops::Deref;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

pub use dual::{Dual, Scalar, LANES};
pub use law::{GenericLaw, GroupLaw};
pub(crate) use linalg::det_in_place;

use crate::error::{Error, Result};

/// Constraint on one chart coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bound {
    pub lo: f64,
    pub hi: f64,
    pub lo_open: bool,
    pub hi_open: bool,
}

impl Bound {
    pub const ANY: Bound = Bound {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
        lo_open: true,
        hi_open: true,
    };
    pub const POSITIVE: Bound = Bound {
        lo: 0.0,
        hi: f64::INFINITY,
        lo_open: true,
        hi_open: true,
    };

    pub fn contains(&self, v: f64) -> bool {
        if !v.is_finite() {
            return false;
        }
        let lo_ok = if self.lo_open { v > self.lo } else { v >= self.lo };
        let hi_ok = if self.hi_open { v < self.hi } else { v <= self.hi };
        lo_ok && hi_ok
    }

    /// Parses `any`, `> c`, `>= c`, `< c`, `<= c`, `(lo, hi)`, `[lo, hi]`
    /// (mixed brackets allowed).
    pub fn parse(src: &str) -> Result<Bound> {
        let s = src.trim();
        let num = |t: &str| -> Result<f64> {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad bound {src:?}")))
        };
        if s == "any" {
            return Ok(Bound::ANY);
        }
        if let Some(r) = s.strip_prefix(">=") {
            return Ok(Bound { lo: num(r)?, lo_open: false, ..Bound::ANY });
        }
        if let Some(r) = s.strip_prefix('>') {
            return Ok(Bound { lo: num(r)?, ..Bound::ANY });
        }
        if let Some(r) = s.strip_prefix("<=") {
            return Ok(Bound { hi: num(r)?, hi_open: false, ..Bound::ANY });
        }
        if let Some(r) = s.strip_prefix('<') {
            return Ok(Bound { hi: num(r)?, ..Bound::ANY });
        }
        let open_lo = s.starts_with('(');
        let open_hi = s.ends_with(')');
        if (open_lo || s.starts_with('[')) && (open_hi || s.ends_with(']')) {
            let inner = &s[1..s.len() - 1];
            let (a, b) = inner
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("bad bound {src:?}")))?;
            let (lo, hi) = (num(a)?, num(b)?);
            if lo >= hi {
                return Err(Error::Parse(format!("empty bound {src:?}")));
            }
            return Ok(Bound { lo, hi, lo_open: open_lo, hi_open: open_hi });
        }
        Err(Error::Parse(format!("bad bound {src:?}")))
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.lo.is_finite(), self.hi.is_finite()) {
            (false, false) => write!(f, "any"),
            (true, false) => write!(f, "{} {}", if self.lo_open { ">" } else { ">=" }, self.lo),
            (false, true) => write!(f, "{} {}", if self.hi_open { "<" } else { "<=" }, self.hi),
            (true, true) => write!(
                f,
                "{}{}, {}{}",
                if self.lo_open { '(' } else { '[' },
                self.lo,
                self.hi,
                if self.hi_open { ')' } else { ']' }
            ),
        }
    }
}

/// A point of a chart whose coordinates have been checked against the domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Element(Vec<f64>);

impl Element {
    pub fn coords(&self) -> &[f64] {
        &self.0
    }
    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for Element {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

/// A group realized on a coordinate domain.
#[derive(Clone)]
pub struct GroupChart {
    name: String,
    law: Arc<dyn GroupLaw>,
    domain: Vec<Bound>,
    identity: Vec<f64>,
}

impl fmt::Debug for GroupChart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GroupChart")
            .field("name", &self.name)
            .field("dim", &self.dim())
            .field("identity", &self.identity)
            .finish()
    }
}

impl GroupChart {
    pub fn new(
        name: impl Into<String>,
        law: Arc<dyn GroupLaw>,
        domain: Vec<Bound>,
        identity: Vec<f64>,
    ) -> Result<GroupChart> {
        let name = name.into();
        let dim = law.dim();
        if domain.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: domain.len() });
        }
        if identity.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: identity.len() });
        }
        let chart = GroupChart { name, law, domain, identity };
        chart.check(&chart.identity)?;
        let ee = chart.mul(&chart.identity, &chart.identity);
        if ee.iter().zip(&chart.identity).any(|(a, b)| (a - b).abs() > 1e-10) {
            return Err(Error::ChartInvariant(format!(
                "{}: identity is not idempotent",
                chart.name
            )));
        }
        Ok(chart)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.identity.len()
    }

    pub fn identity(&self) -> &[f64] {
        &self.identity
    }

    /// A half-line coordinate with the identity inside, like `a` in `aff1`.
    pub fn is_scaling_axis(&self, i: usize) -> bool {
        let b = self.domain()[i];
        b.lo.is_finite() && !b.hi.is_finite() && self.identity()[i] > b.lo
    }

    pub fn domain(&self) -> &[Bound] {
        &self.domain
    }

    pub fn law(&self) -> &Arc<dyn GroupLaw> {
        &self.law
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && x.iter().zip(&self.domain).all(|(v, b)| b.contains(*v))
    }

    pub fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        if !self.contains(x) {
            return Err(Error::OutsideDomain { chart: self.name.clone(), coords: x.to_vec() });
        }
        Ok(())
    }

    pub fn element(&self, coords: Vec<f64>) -> Result<Element> {
        self.check(&coords)?;
        Ok(Element(coords))
    }

    pub fn identity_element(&self) -> Element {
        Element(self.identity.clone())
    }

    /// Unchecked multiplication in coordinates.
    pub fn mul(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.law.mul_f64(x, y, &mut out);
        out
    }

    /// Unchecked inversion in coordinates.
    pub fn inv(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.law.inv_f64(x, &mut out);
        out
    }

    pub fn multiply(&self, x: &Element, y: &Element) -> Result<Element> {
        self.check(x)?;
        self.check(y)?;
        let z = self.mul(x, y);
        self.element(z)
    }

    pub fn inverse(&self, x: &Element) -> Result<Element> {
        self.check(x)?;
        self.element(self.inv(x))
    }

    pub fn embed(&self, x: &[f64]) -> Option<DMatrix<f64>> {
        self.law.embed(x)
    }

    /// Jacobian of `y ↦ g·y` (left) or `y ↦ y·g` (right) at `y = at`, by
    /// forward-mode dual numbers.
    pub fn translation_jacobian(&self, g: &[f64], side: Side, at: &[f64]) -> Result<DMatrix<f64>> {
        self.check(g)?;
        self.check(at)?;
        let d = self.dim();
        let mut jac = DMatrix::zeros(d, d);
        self.jacobian_columns(g, side, at, |col, row, v| jac[(row, col)] = v);
        Ok(jac)
    }

    fn jacobian_columns(&self, g: &[f64], side: Side, at: &[f64], mut put: impl FnMut(usize, usize, f64)) {
        let d = self.dim();
        let fixed: SmallVec<[Dual; 16]> = g.iter().map(|&v| Dual::constant(v)).collect();
        let mut out: SmallVec<[Dual; 16]> = SmallVec::from_elem(Dual::constant(0.0), d);
        let mut start = 0;
        while start < d {
            let stop = (start + LANES).min(d);
            let moving: SmallVec<[Dual; 16]> = at
                .iter()
                .enumerate()
                .map(|(i, &v)| {
                    if i >= start && i < stop {
                        Dual::variable(v, i - start)
                    } else {
                        Dual::constant(v)
                    }
                })
                .collect();
            match side {
                Side::Left => self.law.mul_dual(&fixed, &moving, &mut out),
                Side::Right => self.law.mul_dual(&moving, &fixed, &mut out),
            }
            for (row, o) in out.iter().enumerate() {
                for col in start..stop {
                    put(col, row, o.eps[col - start]);
                }
            }
            start = stop;
        }
    }

    /// `|det|` of the translation Jacobian, without domain checks or heap
    /// allocation for small charts.
    pub fn translation_det(&self, g: &[f64], side: Side, at: &[f64]) -> f64 {
        let d = self.dim();
        if d == 0 {
            return 1.0;
        }
        let mut m: SmallVec<[f64; 64]> = SmallVec::from_elem(0.0, d * d);
        self.jacobian_columns(g, side, at, |col, row, v| m[row * d + col] = v);
        det_in_place(&mut m, d).abs()
    }

    /// Central differences with one Richardson step; the step shrinks until
    /// the stencil stays inside the domain.
    pub fn translation_jacobian_fd(&self, g: &[f64], side: Side, at: &[f64]) -> Result<DMatrix<f64>> {
        self.check(g)?;
        self.check(at)?;
        let d = self.dim();
        let apply = |y: &[f64]| match side {
            Side::Left => self.mul(g, y),
            Side::Right => self.mul(y, g),
        };
        let mut jac = DMatrix::zeros(d, d);
        for j in 0..d {
            let mut h = 1e-3 * at[j].abs().max(1.0);
            loop {
                let ok = [-h, h].iter().all(|s| {
                    let mut y = at.to_vec();
                    y[j] += s;
                    self.contains(&y)
                });
                if ok {
                    break;
                }
                h *= 0.5;
                if h < 1e-12 {
                    return Err(Error::DifferentiationFailed { coords: at.to_vec() });
                }
            }
            let diff = |step: f64| -> Vec<f64> {
                let mut yp = at.to_vec();
                let mut ym = at.to_vec();
                yp[j] += step;
                ym[j] -= step;
                let fp = apply(&yp);
                let fm = apply(&ym);
                fp.iter().zip(&fm).map(|(a, b)| (a - b) / (2.0 * step)).collect()
            };
            let coarse = diff(h);
            let fine = diff(h / 2.0);
            for i in 0..d {
                jac[(i, j)] = (4.0 * fine[i] - coarse[i]) / 3.0;
            }
        }
        Ok(jac)
    }

    /// Left Haar density `ρ(g)` relative to coordinate Lebesgue measure.
    pub fn haar_density(&self, g: &[f64]) -> Result<f64> {
        self.check(g)?;
        let det = self.translation_det(g, Side::Left, &self.identity);
        if !(det.is_finite() && det > 0.0) {
            return Err(Error::DegenerateChart { coords: g.to_vec() });
        }
        Ok(1.0 / det)
    }

    /// `ρ(g)` without checks; NaN or infinite on degenerate points. Used
    /// inside integrands.
    pub fn haar_density_unchecked(&self, g: &[f64]) -> f64 {
        1.0 / self.translation_det(g, Side::Left, &self.identity)
    }

    /// Modular function `Δ(h)`.
    pub fn modular(&self, h: &[f64]) -> Result<f64> {
        self.check(h)?;
        let (right, left) = self.modular_parts(h);
        if !(left > 0.0 && right > 0.0 && left.is_finite() && right.is_finite()) {
            return Err(Error::DegenerateChart { coords: h.to_vec() });
        }
        Ok(right / left)
    }

    /// `(|det d(R_h)_e|, |det d(L_h)_e|)`.
    pub fn modular_parts(&self, h: &[f64]) -> (f64, f64) {
        (
            self.translation_det(h, Side::Right, &self.identity),
            self.translation_det(h, Side::Left, &self.identity),
        )
    }

    /// Draws a point near the identity: additive jitter on unbounded
    /// coordinates, multiplicative jitter on coordinates bounded below.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, spread: f64) -> Vec<f64> {
        loop {
            let x: Vec<f64> = self
                .identity
                .iter()
                .zip(&self.domain)
                .map(|(&e, b)| {
                    let u: f64 = rng.random_range(-spread..spread);
                    if b.lo.is_finite() && !b.hi.is_finite() && e > b.lo {
                        b.lo + (e - b.lo) * u.exp()
                    } else {
                        e + u
                    }
                })
                .collect();
            if self.contains(&x) {
                return x;
            }
        }
    }

    /// Checks the group axioms and the matrix homomorphism on random
    /// samples: identity and inverse at 1e-10, associativity at 1e-9.
    pub fn check_invariants<R: Rng + ?Sized>(&self, rng: &mut R, samples: usize) -> Result<()> {
        let close = |a: &[f64], b: &[f64], tol: f64| {
            a.iter().zip(b).all(|(p, q)| (p - q).abs() <= tol * (1.0 + q.abs()))
        };
        let fail = |what: &str, x: &[f64]| {
            Err(Error::ChartInvariant(format!("{}: {what} fails at {x:?}", self.name)))
        };
        for _ in 0..samples {
            let x = self.sample(rng, 0.8);
            let y = self.sample(rng, 0.8);
            let z = self.sample(rng, 0.8);
            if !close(&self.mul(&self.identity, &x), &x, 1e-10)
                || !close(&self.mul(&x, &self.identity), &x, 1e-10)
            {
                return fail("identity law", &x);
            }
            if !close(&self.mul(&x, &self.inv(&x)), &self.identity, 1e-10) {
                return fail("inverse law", &x);
            }
            let lhs = self.mul(&self.mul(&x, &y), &z);
            let rhs = self.mul(&x, &self.mul(&y, &z));
            if !close(&lhs, &rhs, 1e-9) {
                return fail("associativity", &x);
            }
            if !self.contains(&self.mul(&x, &y)) {
                return fail("closure", &x);
            }
            if let (Some(mx), Some(my), Some(mxy)) =
                (self.embed(&x), self.embed(&y), self.embed(&self.mul(&x, &y)))
            {
                if (mx * my - mxy).abs().max() > 1e-10 {
                    return fail("embedding homomorphism", &x);
                }
            }
        }
        Ok(())
    }
}

/// `|det|` of the Jacobian of a square map `Rᵈ → Rᵈ` at `x`, by dual numbers.
pub fn map_jacobian_det(x: &[f64], f: impl Fn(&[Dual], &mut [Dual])) -> f64 {
    let d = x.len();
    if d == 0 {
        return 1.0;
    }
    let mut m: SmallVec<[f64; 64]> = SmallVec::from_elem(0.0, d * d);
    let mut out: SmallVec<[Dual; 16]> = SmallVec::from_elem(Dual::constant(0.0), d);
    let mut start = 0;
    while start < d {
        let stop = (start + LANES).min(d);
        let input: SmallVec<[Dual; 16]> = x
            .iter()
            .enumerate()
            .map(|(i, &v)| if i >= start && i < stop { Dual::variable(v, i - start) } else { Dual::constant(v) })
            .collect();
        f(&input, &mut out);
        for (row, o) in out.iter().enumerate() {
            for col in start..stop {
                m[row * d + col] = o.eps[col - start];
            }
        }
        start = stop;
    }
    det_in_place(&mut m, d).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bound_parsing_round_trips() {
        for s in ["any", "> 0", ">= -1", "< 2", "(0, 1)", "[-1, 1]", "(0, 3]"] {
            let b = Bound::parse(s).unwrap();
            assert_eq!(Bound::parse(&b.to_string()).unwrap(), b, "{s}");
        }
        assert!(Bound::parse("(1, 0)").is_err());
        assert!(Bound::parse("positive").is_err());
        assert!(Bound::POSITIVE.contains(1e-300));
        assert!(!Bound::POSITIVE.contains(0.0));
    }

    #[test]
    fn affine_jacobian_and_density() {
        let g = catalog::group("aff1").unwrap();
        let jac = g.translation_jacobian(&[3.0, 5.0], Side::Left, g.identity()).unwrap();
        // y ↦ (3 a', 3 b' + 5): diag(3, 3)
        assert_eq!(jac, DMatrix::from_row_slice(2, 2, &[3.0, 0.0, 0.0, 3.0]));
        assert!((g.haar_density(&[3.0, 5.0]).unwrap() - 1.0 / 9.0).abs() < 1e-15);
        assert_eq!(g.haar_density(g.identity()).unwrap(), 1.0);
        assert!((g.modular(&[2.0, 0.0]).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn domain_violations_are_reported() {
        let g = catalog::group("aff1").unwrap();
        let bad = g.element(vec![-1.0, 0.0]);
        assert!(matches!(bad, Err(Error::OutsideDomain { .. })));
        assert!(g.haar_density(&[0.0, 1.0]).is_err());
        assert!(g.modular(&[1.0]).is_err());
    }

    #[test]
    fn fd_jacobian_respects_domain_edge() {
        let g = catalog::group("aff1").unwrap();
        let at = [1e-4, 0.0];
        let fd = g.translation_jacobian_fd(&[2.0, 1.0], Side::Right, &at).unwrap();
        let ad = g.translation_jacobian(&[2.0, 1.0], Side::Right, &at).unwrap();
        assert!((fd - ad).abs().max() < 1e-8);
    }

    #[test]
    fn catalog_charts_satisfy_group_axioms() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for name in ["R^n:3", "aff1", "heis3", "borel3", "aff1*heis3"] {
            let g = catalog::group(name).unwrap();
            g.check_invariants(&mut rng, 200).unwrap();
        }
    }
}
