//! Tensor-product Gauss–Legendre quadrature and seeded Monte Carlo over
//! coordinate boxes.
//!
//! Both integrators reduce in a fixed order, so serial and parallel runs
//! produce bitwise-identical results.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Closed axis-aligned box `[lo₀, hi₀] × … × [lo_{d−1}, hi_{d−1}]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoordBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl CoordBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<CoordBox> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch { expected: lo.len(), got: hi.len() });
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a.is_finite() && b.is_finite() && a <= b)) {
            return Err(Error::InvalidIntegrator(format!("invalid box {lo:?} .. {hi:?}")));
        }
        Ok(CoordBox { lo, hi })
    }

    pub fn cube(center: &[f64], radius: f64) -> CoordBox {
        CoordBox {
            lo: center.iter().map(|c| c - radius).collect(),
            hi: center.iter().map(|c| c + radius).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).product()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (a, b))| *v >= *a && *v <= *b)
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo.iter().zip(&self.hi).any(|(a, b)| b <= a)
    }
}

/// Per-coordinate closed intervals; `None` marks an unbounded coordinate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SupportBox(pub Vec<Option<(f64, f64)>>);

impl SupportBox {
    pub fn unbounded(dim: usize) -> SupportBox {
        SupportBox(vec![None; dim])
    }

    pub fn from_box(bx: &CoordBox) -> SupportBox {
        SupportBox(bx.lo.iter().zip(&bx.hi).map(|(&a, &b)| Some((a, b))).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn interval(&self, i: usize) -> Option<(f64, f64)> {
        self.0[i]
    }

    pub fn is_bounded(&self) -> bool {
        self.0.iter().all(Option::is_some)
    }

    pub fn bounded_coords(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.0[i].is_some()).collect()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.0.iter().zip(x).all(|(iv, &v)| iv.is_none_or(|(a, b)| v >= a && v <= b))
    }

    /// Intersection, or `None` when it is empty.
    pub fn intersect(&self, other: &SupportBox) -> Option<SupportBox> {
        let mut out = Vec::with_capacity(self.dim());
        for (a, b) in self.0.iter().zip(&other.0) {
            let iv = match (a, b) {
                (None, x) | (x, None) => *x,
                (Some((l1, h1)), Some((l2, h2))) => {
                    let (l, h) = (l1.max(*l2), h1.min(*h2));
                    if l > h {
                        return None;
                    }
                    Some((l, h))
                }
            };
            out.push(iv);
        }
        Some(SupportBox(out))
    }

    /// Restricts coordinate `i` to `iv`; `None` when the result is empty.
    pub fn restrict(&self, i: usize, iv: (f64, f64)) -> Option<SupportBox> {
        let mut other = SupportBox::unbounded(self.dim());
        other.0[i] = Some(iv);
        self.intersect(&other)
    }

    pub fn pick(&self, indices: &[usize]) -> SupportBox {
        SupportBox(indices.iter().map(|&i| self.0[i]).collect())
    }

    /// The bounded box, or the first unbounded coordinate as an error.
    pub fn to_coord_box(&self) -> Result<CoordBox> {
        let mut lo = Vec::with_capacity(self.dim());
        let mut hi = Vec::with_capacity(self.dim());
        for (i, iv) in self.0.iter().enumerate() {
            let (a, b) = iv.ok_or(Error::UnboundedDomain(i))?;
            lo.push(a);
            hi.push(b);
        }
        Ok(CoordBox { lo, hi })
    }
}

/// Bounding box of the image of `bx` under `f`.
///
/// When `f` is affine on the box (checked at the centre and face centres)
/// the corner hull is exact and the flag is `true`. Otherwise a grid of
/// samples is taken and the hull is widened by 5% per side.
pub fn image_box(bx: &CoordBox, out_dim: usize, mut f: impl FnMut(&[f64], &mut [f64])) -> (CoordBox, bool) {
    let d = bx.dim();
    let mut lo = vec![f64::INFINITY; out_dim];
    let mut hi = vec![f64::NEG_INFINITY; out_dim];
    let mut y = vec![0.0; out_dim];
    let mut x = vec![0.0; d];
    let mut corner_sum = vec![0.0; out_dim];
    let mut face_sums = vec![vec![0.0; out_dim]; 2 * d];
    let take = |y: &[f64], lo: &mut [f64], hi: &mut [f64]| {
        for k in 0..out_dim {
            lo[k] = lo[k].min(y[k]);
            hi[k] = hi[k].max(y[k]);
        }
    };
    for mask in 0..(1usize << d) {
        for i in 0..d {
            x[i] = if mask >> i & 1 == 1 { bx.hi[i] } else { bx.lo[i] };
        }
        f(&x, &mut y);
        take(&y, &mut lo, &mut hi);
        for k in 0..out_dim {
            corner_sum[k] += y[k];
        }
        for i in 0..d {
            let face = 2 * i + (mask >> i & 1);
            for k in 0..out_dim {
                face_sums[face][k] += y[k];
            }
        }
    }
    let scale = lo.iter().chain(&hi).fold(1.0f64, |m, v| m.max(v.abs()));
    let mut affine = true;
    let mid: Vec<f64> = bx.lo.iter().zip(&bx.hi).map(|(a, b)| 0.5 * (a + b)).collect();
    f(&mid, &mut y);
    let n_corners = (1usize << d) as f64;
    if (0..out_dim).any(|k| (y[k] - corner_sum[k] / n_corners).abs() > 1e-11 * scale) {
        affine = false;
    }
    for i in 0..d {
        for side in 0..2 {
            x.copy_from_slice(&mid);
            x[i] = if side == 1 { bx.hi[i] } else { bx.lo[i] };
            f(&x, &mut y);
            let want = &face_sums[2 * i + side];
            let n_face = n_corners / 2.0;
            if (0..out_dim).any(|k| (y[k] - want[k] / n_face).abs() > 1e-11 * scale) {
                affine = false;
            }
        }
    }
    if affine || d == 0 {
        return (CoordBox { lo, hi }, true);
    }
    let per_axis: usize = if d <= 4 { 9 } else { 5 };
    let mut idx = vec![0usize; d];
    for _ in 0..per_axis.pow(d as u32) {
        for i in 0..d {
            x[i] = bx.lo[i] + (bx.hi[i] - bx.lo[i]) * idx[i] as f64 / (per_axis - 1) as f64;
        }
        f(&x, &mut y);
        take(&y, &mut lo, &mut hi);
        for i in (0..d).rev() {
            idx[i] += 1;
            if idx[i] < per_axis {
                break;
            }
            idx[i] = 0;
        }
    }
    for k in 0..out_dim {
        let w = 0.05 * (hi[k] - lo[k]) + 1e-12 * scale;
        lo[k] -= w;
        hi[k] += w;
    }
    (CoordBox { lo, hi }, false)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Integrator {
    /// Gauss–Legendre with `order` nodes per panel and `panels` panels per axis.
    GaussTensor { order: usize, panels: usize },
    /// Uniform Monte Carlo with a counter-based stream per sample batch.
    MonteCarlo { samples: usize, seed: u64 },
}

impl Integrator {
    pub fn gauss(order: usize, panels: usize) -> Integrator {
        Integrator::GaussTensor { order, panels }
    }

    pub fn monte_carlo(samples: usize, seed: u64) -> Integrator {
        Integrator::MonteCarlo { samples, seed }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Integrator::GaussTensor { order, panels } if order < 2 || panels < 1 => Err(
                Error::InvalidIntegrator(format!("order {order} / panels {panels}: need order ≥ 2, panels ≥ 1")),
            ),
            Integrator::MonteCarlo { samples, .. } if samples < 1000 => Err(Error::InvalidIntegrator(
                format!("{samples} samples: need at least 1000"),
            )),
            _ => Ok(()),
        }
    }

    /// The same rule at twice the order (quadrature) or sixteen times the
    /// samples (Monte Carlo).
    pub fn doubled(&self) -> Integrator {
        match *self {
            Integrator::GaussTensor { order, panels } => Integrator::GaussTensor { order: 2 * order, panels },
            Integrator::MonteCarlo { samples, seed } => Integrator::MonteCarlo { samples: 16 * samples, seed },
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Integrator::GaussTensor { order, panels } => format!("gauss(order={order}, panels={panels})"),
            Integrator::MonteCarlo { samples, seed } => format!("mc(samples={samples}, seed={seed})"),
        }
    }
}

/// Chooses an integrator by integral dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegrationPolicy {
    pub low_dim: Integrator,
    pub high_dim: Integrator,
    /// Integrals of at least this dimension use `high_dim`.
    pub high_dim_from: usize,
    /// Whether outer integrals also report `|Q(order) − Q(order + 2)|`.
    pub estimate_error: bool,
    /// Extra Gauss points on scaling axes of high-dimensional flat
    /// integrals, where the Haar density is not polynomial.
    #[serde(default)]
    pub scaling_extra: usize,
}

impl Default for IntegrationPolicy {
    fn default() -> Self {
        IntegrationPolicy {
            low_dim: Integrator::gauss(12, 2),
            high_dim: Integrator::gauss(7, 1),
            high_dim_from: 5,
            estimate_error: true,
            scaling_extra: 2,
        }
    }
}

impl IntegrationPolicy {
    pub fn for_dim(&self, dim: usize) -> &Integrator {
        if dim >= self.high_dim_from {
            &self.high_dim
        } else {
            &self.low_dim
        }
    }

    /// Rule for the inner integral of an iterated one, chosen by the total
    /// dimension.
    pub fn for_nested(&self, outer: usize, inner: usize) -> &Integrator {
        self.for_dim(outer + inner)
    }

    /// Per-axis extra Gauss points for a flat integral over `chart`; only
    /// high-dimensional rules get them.
    pub fn scaling_boost(&self, chart: &crate::group_core::GroupChart, dim: usize) -> Vec<usize> {
        if dim < self.high_dim_from {
            return vec![];
        }
        (0..dim).map(|i| if chart.is_scaling_axis(i) { self.scaling_extra } else { 0 }).collect()
    }

    pub fn doubled(&self) -> IntegrationPolicy {
        IntegrationPolicy {
            low_dim: self.low_dim.doubled(),
            high_dim: self.high_dim.doubled(),
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.low_dim.validate()?;
        self.high_dim.validate()
    }

    pub fn describe(&self) -> String {
        format!(
            "low={} high(dim≥{})={}",
            self.low_dim.describe(),
            self.high_dim_from,
            self.high_dim.describe()
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegralResult {
    pub value: Complex64,
    /// Order-refinement delta for quadrature, standard error for Monte Carlo.
    pub error_estimate: f64,
    pub evaluations: u64,
}

impl IntegralResult {
    pub fn zero() -> IntegralResult {
        IntegralResult { value: Complex64::new(0.0, 0.0), error_estimate: 0.0, evaluations: 0 }
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

fn legendre_rule(n: usize) -> GaussRule {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp;
        loop {
            // three-term recurrence for P_n(x) and P_{n-1}(x)
            let (mut p, mut prev) = (1.0, 0.0);
            for j in 1..=n {
                let next = ((2 * j - 1) as f64 * x * p - (j - 1) as f64 * prev) / j as f64;
                prev = p;
                p = next;
            }
            dp = n as f64 * (x * p - prev) / (x * x - 1.0);
            let step = p / dp;
            x -= step;
            if step.abs() <= 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    GaussRule { nodes, weights }
}

/// Cached Gauss–Legendre rule with `n` nodes.
pub fn gauss_rule(n: usize) -> Arc<GaussRule> {
    static CACHE: OnceLock<RwLock<HashMap<usize, Arc<GaussRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(r) = cache.read().expect("rule cache poisoned").get(&n) {
        return r.clone();
    }
    let rule = Arc::new(legendre_rule(n));
    cache.write().expect("rule cache poisoned").entry(n).or_insert(rule).clone()
}

/// Per-axis composite nodes and weights.
fn axis_nodes(lo: f64, hi: f64, order: usize, panels: usize) -> (Vec<f64>, Vec<f64>) {
    let rule = gauss_rule(order);
    let w = (hi - lo) / panels as f64;
    let mut xs = Vec::with_capacity(order * panels);
    let mut ws = Vec::with_capacity(order * panels);
    for p in 0..panels {
        let a = lo + w * p as f64;
        for (t, wt) in rule.nodes.iter().zip(&rule.weights) {
            xs.push(a + 0.5 * w * (t + 1.0));
            ws.push(0.5 * w * wt);
        }
    }
    (xs, ws)
}

/// Tensor rule with `orders[k]` points per panel on axis `k`.
fn gauss_tensor<F>(f: &F, bx: &CoordBox, orders: &[usize], panels: usize) -> Result<(Complex64, u64)>
where
    F: Fn(&[f64]) -> Complex64 + Sync,
{
    let d = bx.dim();
    if d == 0 {
        let v = f(&[]);
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::NonFiniteIntegrand(vec![]));
        }
        return Ok((v, 1));
    }
    let axes: Vec<(Vec<f64>, Vec<f64>)> =
        (0..d).map(|k| axis_nodes(bx.lo[k], bx.hi[k], orders[k], panels)).collect();
    let m: Vec<usize> = orders.iter().map(|o| o * panels).collect();
    let inner_count: usize = m[1..].iter().product();
    let partials: Vec<Result<Complex64>> = (0..m[0])
        .into_par_iter()
        .map(|i0| {
            let mut x = vec![0.0; d];
            x[0] = axes[0].0[i0];
            let w0 = axes[0].1[i0];
            let mut idx = vec![0usize; d];
            let mut acc = Complex64::new(0.0, 0.0);
            for _ in 0..inner_count {
                let mut w = w0;
                for k in 1..d {
                    x[k] = axes[k].0[idx[k]];
                    w *= axes[k].1[idx[k]];
                }
                let v = f(&x);
                if !(v.re.is_finite() && v.im.is_finite()) {
                    return Err(Error::NonFiniteIntegrand(x.clone()));
                }
                acc += v * w;
                for k in (1..d).rev() {
                    idx[k] += 1;
                    if idx[k] < m[k] {
                        break;
                    }
                    idx[k] = 0;
                }
            }
            Ok(acc)
        })
        .collect();
    let mut total = Complex64::new(0.0, 0.0);
    for p in partials {
        total += p?;
    }
    Ok((total, (m[0] * inner_count) as u64))
}

const MC_BATCH: usize = 4096;

fn monte_carlo<F>(f: &F, bx: &CoordBox, samples: usize, seed: u64) -> Result<(Complex64, f64, u64)>
where
    F: Fn(&[f64]) -> Complex64 + Sync,
{
    let d = bx.dim();
    if d == 0 {
        let (v, n) = gauss_tensor(f, bx, &[], 1)?;
        return Ok((v, 0.0, n));
    }
    let batches = samples.div_ceil(MC_BATCH);
    let partials: Vec<Result<(Complex64, f64)>> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let count = MC_BATCH.min(samples - b * MC_BATCH);
            let mut x = vec![0.0; d];
            let mut sum = Complex64::new(0.0, 0.0);
            let mut sq = 0.0;
            for _ in 0..count {
                for k in 0..d {
                    x[k] = bx.lo[k] + (bx.hi[k] - bx.lo[k]) * rng.random::<f64>();
                }
                let v = f(&x);
                if !(v.re.is_finite() && v.im.is_finite()) {
                    return Err(Error::NonFiniteIntegrand(x.clone()));
                }
                sum += v;
                sq += v.norm_sqr();
            }
            Ok((sum, sq))
        })
        .collect();
    let mut sum = Complex64::new(0.0, 0.0);
    let mut sq = 0.0;
    for p in partials {
        let (s, q) = p?;
        sum += s;
        sq += q;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = ((sq / n) - mean.norm_sqr()).max(0.0) * n / (n - 1.0);
    let vol = bx.volume();
    Ok((mean * vol, vol * (var / n).sqrt(), samples as u64))
}

/// Integrates `f` over `bx`, with an error estimate.
pub fn integrate_box<F>(f: F, bx: &CoordBox, integrator: &Integrator) -> Result<IntegralResult>
where
    F: Fn(&[f64]) -> Complex64 + Sync,
{
    integrate_box_with(&f, bx, integrator, true)
}

/// As [`integrate_box`]; `estimate_error = false` skips the order+2 pass.
pub fn integrate_box_with<F>(
    f: &F,
    bx: &CoordBox,
    integrator: &Integrator,
    estimate_error: bool,
) -> Result<IntegralResult>
where
    F: Fn(&[f64]) -> Complex64 + Sync,
{
    integrate_box_axes(f, bx, integrator, estimate_error, &[])
}

/// As [`integrate_box_with`], with `extra[k]` more Gauss points on axis `k`
/// (missing entries count as zero). Monte Carlo ignores `extra`.
pub fn integrate_box_axes<F>(
    f: &F,
    bx: &CoordBox,
    integrator: &Integrator,
    estimate_error: bool,
    extra: &[usize],
) -> Result<IntegralResult>
where
    F: Fn(&[f64]) -> Complex64 + Sync,
{
    integrator.validate()?;
    if bx.is_degenerate() && bx.dim() > 0 {
        return Ok(IntegralResult::zero());
    }
    match *integrator {
        Integrator::GaussTensor { order, panels } => {
            let orders = |base: usize| -> Vec<usize> { (0..bx.dim()).map(|k| base + extra.get(k).copied().unwrap_or(0)).collect() };
            let (v, n) = gauss_tensor(f, bx, &orders(order), panels)?;
            if !estimate_error || bx.dim() == 0 {
                return Ok(IntegralResult { value: v, error_estimate: 0.0, evaluations: n });
            }
            let (v2, n2) = gauss_tensor(f, bx, &orders(order + 2), panels)?;
            Ok(IntegralResult { value: v, error_estimate: (v - v2).norm(), evaluations: n + n2 })
        }
        Integrator::MonteCarlo { samples, seed } => {
            let (v, e, n) = monte_carlo(f, bx, samples, seed)?;
            Ok(IntegralResult { value: v, error_estimate: e, evaluations: n })
        }
    }
}

/// Fixed-rule value for nested (inner) integrals; non-finite values
/// propagate as NaN so the enclosing integral reports the node.
pub fn integrate_value<F>(f: F, bx: &CoordBox, integrator: &Integrator) -> Complex64
where
    F: Fn(&[f64]) -> Complex64 + Sync,
{
    if bx.is_degenerate() && bx.dim() > 0 {
        return Complex64::new(0.0, 0.0);
    }
    let r = match *integrator {
        Integrator::GaussTensor { order, panels } => gauss_tensor_serial(&f, bx, order, panels),
        Integrator::MonteCarlo { samples, seed } => monte_carlo(&f, bx, samples, seed).map(|(v, _, _)| v),
    };
    r.unwrap_or(Complex64::new(f64::NAN, f64::NAN))
}

/// Serial variant for inner integrals, which already run inside a parallel
/// outer loop.
fn gauss_tensor_serial<F>(f: &F, bx: &CoordBox, order: usize, panels: usize) -> Result<Complex64>
where
    F: Fn(&[f64]) -> Complex64,
{
    let d = bx.dim();
    if d == 0 {
        return Ok(f(&[]));
    }
    let axes: Vec<(Vec<f64>, Vec<f64>)> =
        (0..d).map(|k| axis_nodes(bx.lo[k], bx.hi[k], order, panels)).collect();
    let m = order * panels;
    let mut idx = vec![0usize; d];
    let mut x = vec![0.0; d];
    let mut acc = Complex64::new(0.0, 0.0);
    for _ in 0..m.pow(d as u32) {
        let mut w = 1.0;
        for k in 0..d {
            x[k] = axes[k].0[idx[k]];
            w *= axes[k].1[idx[k]];
        }
        acc += f(&x) * w;
        for k in (0..d).rev() {
            idx[k] += 1;
            if idx[k] < m {
                break;
            }
            idx[k] = 0;
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn re(v: f64) -> Complex64 {
        Complex64::new(v, 0.0)
    }

    #[test]
    fn unit_square_volume() {
        let bx = CoordBox::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let r = integrate_box(|_| re(1.0), &bx, &Integrator::gauss(12, 2)).unwrap();
        assert!((r.value.re - 1.0).abs() < 1e-14);
        assert!(r.error_estimate < 1e-14);
    }

    #[test]
    fn per_axis_orders_are_exact_to_their_own_degree() {
        // x⁵ needs 3 points, y⁹ needs 5; ∫₀¹∫₀¹ x⁵y⁹ = 1/60.
        let bx = CoordBox::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let f = |x: &[f64]| re(x[0].powi(5) * x[1].powi(9));
        let r = integrate_box_axes(&f, &bx, &Integrator::gauss(3, 1), false, &[0, 2]).unwrap();
        assert!((r.value.re - 1.0 / 60.0).abs() < 1e-15);
        assert_eq!(r.evaluations, 15);
        let short = integrate_box_axes(&f, &bx, &Integrator::gauss(3, 1), false, &[]).unwrap();
        assert!((short.value.re - 1.0 / 60.0).abs() > 1e-6);
    }

    #[test]
    fn bump_integral_is_32_over_35() {
        // ∫₋₁¹ (1 − t²)³ dt = 2 − 2 + 6/5 − 2/7 = 32/35 by term-wise antiderivative.
        let bx = CoordBox::new(vec![-1.0], vec![1.0]).unwrap();
        let r = integrate_box(|x| re((1.0 - x[0] * x[0]).powi(3)), &bx, &Integrator::gauss(4, 1)).unwrap();
        assert!((r.value.re - 32.0 / 35.0).abs() < 1e-15);
    }

    #[test]
    fn rule_weights_sum_to_two() {
        for n in 1..40 {
            let r = gauss_rule(n);
            let s: f64 = r.weights.iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "n = {n}");
        }
    }

    #[test]
    fn zero_dimensional_box_evaluates_point() {
        let bx = CoordBox::new(vec![], vec![]).unwrap();
        let r = integrate_box(|x| re(x.len() as f64 + 3.0), &bx, &Integrator::gauss(4, 1)).unwrap();
        assert_eq!(r.value.re, 3.0);
    }

    #[test]
    fn non_finite_values_are_reported_with_node() {
        let bx = CoordBox::new(vec![0.0], vec![1.0]).unwrap();
        let r = integrate_box(|x| re(if x[0] > 0.5 { f64::NAN } else { 1.0 }), &bx, &Integrator::gauss(4, 1));
        match r {
            Err(Error::NonFiniteIntegrand(node)) => assert!(node[0] > 0.5),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn invalid_integrators_rejected() {
        let bx = CoordBox::new(vec![0.0], vec![1.0]).unwrap();
        assert!(integrate_box(|_| re(1.0), &bx, &Integrator::gauss(1, 1)).is_err());
        assert!(integrate_box(|_| re(1.0), &bx, &Integrator::monte_carlo(10, 1)).is_err());
    }

    #[test]
    fn monte_carlo_is_reproducible() {
        let bx = CoordBox::new(vec![0.0, 0.0], vec![1.0, 2.0]).unwrap();
        let f = |x: &[f64]| re(x[0] * x[1]);
        let a = integrate_box(f, &bx, &Integrator::monte_carlo(20_000, 9)).unwrap();
        let b = integrate_box(f, &bx, &Integrator::monte_carlo(20_000, 9)).unwrap();
        assert_eq!(a, b);
        assert!((a.value.re - 1.0).abs() < 4.0 * a.error_estimate);
    }
}
