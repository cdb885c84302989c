//! Group laws in coordinates.
//!
//! A law is written once, generically over [`Scalar`], by implementing
//! [`GenericLaw`]; the blanket impl turns it into the object-safe
//! [`GroupLaw`] that charts store behind an `Arc`.

use std::fmt::Debug;
use std::sync::Arc;

use nalgebra::DMatrix;
use smallvec::SmallVec;

use super::dual::{Dual, Scalar};

pub(crate) type Buf<S> = SmallVec<[S; 16]>;

/// Object-safe group law: multiplication and inversion in chart coordinates,
/// evaluated over `f64` or over dual numbers.
pub trait GroupLaw: Send + Sync + Debug {
    fn dim(&self) -> usize;
    fn mul_f64(&self, x: &[f64], y: &[f64], out: &mut [f64]);
    fn mul_dual(&self, x: &[Dual], y: &[Dual], out: &mut [Dual]);
    fn inv_f64(&self, x: &[f64], out: &mut [f64]);
    fn inv_dual(&self, x: &[Dual], out: &mut [Dual]);
    /// Matrix realization of a point, when the law has one.
    fn embed(&self, x: &[f64]) -> Option<DMatrix<f64>>;
}

/// A group law written once for every [`Scalar`].
pub trait GenericLaw: Send + Sync + Debug {
    fn dim(&self) -> usize;
    fn mul<S: Scalar>(&self, x: &[S], y: &[S], out: &mut [S]);
    fn inv<S: Scalar>(&self, x: &[S], out: &mut [S]);
    fn embed(&self, _x: &[f64]) -> Option<DMatrix<f64>> {
        None
    }
}

impl<T: GenericLaw> GroupLaw for T {
    fn dim(&self) -> usize {
        GenericLaw::dim(self)
    }
    fn mul_f64(&self, x: &[f64], y: &[f64], out: &mut [f64]) {
        self.mul(x, y, out)
    }
    fn mul_dual(&self, x: &[Dual], y: &[Dual], out: &mut [Dual]) {
        self.mul(x, y, out)
    }
    fn inv_f64(&self, x: &[f64], out: &mut [f64]) {
        self.inv(x, out)
    }
    fn inv_dual(&self, x: &[Dual], out: &mut [Dual]) {
        self.inv(x, out)
    }
    fn embed(&self, x: &[f64]) -> Option<DMatrix<f64>> {
        GenericLaw::embed(self, x)
    }
}

/// Additive group Rⁿ.
#[derive(Debug, Clone)]
pub struct Euclidean(pub usize);

impl GenericLaw for Euclidean {
    fn dim(&self) -> usize {
        self.0
    }
    fn mul<S: Scalar>(&self, x: &[S], y: &[S], out: &mut [S]) {
        for i in 0..self.0 {
            out[i] = x[i] + y[i];
        }
    }
    fn inv<S: Scalar>(&self, x: &[S], out: &mut [S]) {
        for i in 0..self.0 {
            out[i] = -x[i];
        }
    }
    fn embed(&self, x: &[f64]) -> Option<DMatrix<f64>> {
        let n = self.0;
        let mut m = DMatrix::identity(n + 1, n + 1);
        for i in 0..n {
            m[(i, n)] = x[i];
        }
        Some(m)
    }
}

/// Orientation-preserving affine maps of the line, `(a, b) ↦ [[a, b], [0, 1]]`, `a > 0`.
#[derive(Debug, Clone)]
pub struct AffineLine;

impl GenericLaw for AffineLine {
    fn dim(&self) -> usize {
        2
    }
    fn mul<S: Scalar>(&self, x: &[S], y: &[S], out: &mut [S]) {
        out[0] = x[0] * y[0];
        out[1] = x[0] * y[1] + x[1];
    }
    fn inv<S: Scalar>(&self, x: &[S], out: &mut [S]) {
        out[0] = S::cst(1.0) / x[0];
        out[1] = -x[1] / x[0];
    }
    fn embed(&self, x: &[f64]) -> Option<DMatrix<f64>> {
        Some(DMatrix::from_row_slice(2, 2, &[x[0], x[1], 0.0, 1.0]))
    }
}

/// Three-dimensional Heisenberg group, `(x, y, z) ↦ [[1, x, z], [0, 1, y], [0, 0, 1]]`.
#[derive(Debug, Clone)]
pub struct Heisenberg;

impl GenericLaw for Heisenberg {
    fn dim(&self) -> usize {
        3
    }
    fn mul<S: Scalar>(&self, x: &[S], y: &[S], out: &mut [S]) {
        out[0] = x[0] + y[0];
        out[1] = x[1] + y[1];
        out[2] = x[2] + y[2] + x[0] * y[1];
    }
    fn inv<S: Scalar>(&self, x: &[S], out: &mut [S]) {
        out[0] = -x[0];
        out[1] = -x[1];
        out[2] = x[0] * x[1] - x[2];
    }
    fn embed(&self, x: &[f64]) -> Option<DMatrix<f64>> {
        Some(DMatrix::from_row_slice(
            3,
            3,
            &[1.0, x[0], x[2], 0.0, 1.0, x[1], 0.0, 0.0, 1.0],
        ))
    }
}

/// Upper-triangular 3×3 matrices with positive diagonal.
///
/// Coordinates are `(a1, a2, a3, x, y, z)` for
/// `[[a1, x, z], [0, a2, y], [0, 0, a3]]`.
#[derive(Debug, Clone)]
pub struct Borel3;

impl GenericLaw for Borel3 {
    fn dim(&self) -> usize {
        6
    }
    fn mul<S: Scalar>(&self, p: &[S], q: &[S], out: &mut [S]) {
        let (a1, a2, a3, x, y, z) = (p[0], p[1], p[2], p[3], p[4], p[5]);
        let (b1, b2, b3, u, v, w) = (q[0], q[1], q[2], q[3], q[4], q[5]);
        out[0] = a1 * b1;
        out[1] = a2 * b2;
        out[2] = a3 * b3;
        out[3] = a1 * u + x * b2;
        out[4] = a2 * v + y * b3;
        out[5] = a1 * w + x * v + z * b3;
    }
    fn inv<S: Scalar>(&self, p: &[S], out: &mut [S]) {
        let (a1, a2, a3, x, y, z) = (p[0], p[1], p[2], p[3], p[4], p[5]);
        let one = S::cst(1.0);
        out[0] = one / a1;
        out[1] = one / a2;
        out[2] = one / a3;
        out[3] = -x / (a1 * a2);
        out[4] = -y / (a2 * a3);
        out[5] = (x * y - a2 * z) / (a1 * a2 * a3);
    }
    fn embed(&self, p: &[f64]) -> Option<DMatrix<f64>> {
        Some(DMatrix::from_row_slice(
            3,
            3,
            &[p[0], p[3], p[5], 0.0, p[1], p[4], 0.0, 0.0, p[2]],
        ))
    }
}

/// Direct product of two laws; coordinates are concatenated.
#[derive(Debug, Clone)]
pub struct ProductLaw {
    pub left: Arc<dyn GroupLaw>,
    pub right: Arc<dyn GroupLaw>,
}

impl GenericLaw for ProductLaw {
    fn dim(&self) -> usize {
        self.left.dim() + self.right.dim()
    }
    fn mul<S: Scalar>(&self, x: &[S], y: &[S], out: &mut [S]) {
        let k = self.left.dim();
        let (ol, or) = out.split_at_mut(k);
        S::law_mul(self.left.as_ref(), &x[..k], &y[..k], ol);
        S::law_mul(self.right.as_ref(), &x[k..], &y[k..], or);
    }
    fn inv<S: Scalar>(&self, x: &[S], out: &mut [S]) {
        let k = self.left.dim();
        let (ol, or) = out.split_at_mut(k);
        S::law_inv(self.left.as_ref(), &x[..k], ol);
        S::law_inv(self.right.as_ref(), &x[k..], or);
    }
    fn embed(&self, x: &[f64]) -> Option<DMatrix<f64>> {
        let k = self.left.dim();
        let a = self.left.embed(&x[..k])?;
        let b = self.right.embed(&x[k..])?;
        let n = a.nrows() + b.nrows();
        let mut m = DMatrix::zeros(n, n);
        m.view_mut((0, 0), (a.nrows(), a.ncols())).copy_from(&a);
        m.view_mut((a.nrows(), a.ncols()), (b.nrows(), b.ncols()))
            .copy_from(&b);
        Some(m)
    }
}

/// Restriction of a parent law to a subset of its coordinates, the remaining
/// coordinates held at their identity values.
///
/// This realizes both a coordinate-aligned subgroup (`keep` = subgroup
/// positions) and a quotient by a coordinate-aligned normal subgroup
/// (`keep` = base positions, the fill acting as the section).
#[derive(Debug, Clone)]
pub struct SliceLaw {
    pub parent: Arc<dyn GroupLaw>,
    pub keep: Vec<usize>,
    pub fill: Vec<f64>,
    /// Whether `embed` should restrict the parent's matrix realization.
    pub homomorphic_embed: bool,
}

impl SliceLaw {
    fn lift<S: Scalar>(&self, x: &[S]) -> Buf<S> {
        let mut full: Buf<S> = self.fill.iter().map(|&c| S::cst(c)).collect();
        for (i, &k) in self.keep.iter().enumerate() {
            full[k] = x[i];
        }
        full
    }
}

impl GenericLaw for SliceLaw {
    fn dim(&self) -> usize {
        self.keep.len()
    }
    fn mul<S: Scalar>(&self, x: &[S], y: &[S], out: &mut [S]) {
        let fx = self.lift(x);
        let fy = self.lift(y);
        let mut r: Buf<S> = fx.clone();
        S::law_mul(self.parent.as_ref(), &fx, &fy, &mut r);
        for (i, &k) in self.keep.iter().enumerate() {
            out[i] = r[k];
        }
    }
    fn inv<S: Scalar>(&self, x: &[S], out: &mut [S]) {
        let fx = self.lift(x);
        let mut r: Buf<S> = fx.clone();
        S::law_inv(self.parent.as_ref(), &fx, &mut r);
        for (i, &k) in self.keep.iter().enumerate() {
            out[i] = r[k];
        }
    }
    fn embed(&self, x: &[f64]) -> Option<DMatrix<f64>> {
        if !self.homomorphic_embed {
            return None;
        }
        self.parent.embed(&self.lift(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mul(law: &dyn GroupLaw, x: &[f64], y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; law.dim()];
        law.mul_f64(x, y, &mut out);
        out
    }

    #[test]
    fn affine_product_matches_matrix_product() {
        let law = AffineLine;
        let z = mul(&law, &[2.0, 1.0], &[3.0, 4.0]);
        assert_eq!(z, vec![6.0, 9.0]);
        let m = GroupLaw::embed(&law, &[2.0, 1.0]).unwrap() * GroupLaw::embed(&law, &[3.0, 4.0]).unwrap();
        assert_eq!(m, GroupLaw::embed(&law, &z).unwrap());
    }

    #[test]
    fn heisenberg_product_matches_unitriangular_product() {
        let law = Heisenberg;
        let (p, q) = ([1.5, -2.0, 0.25], [0.5, 3.0, -1.0]);
        let z = mul(&law, &p, &q);
        assert_eq!(z, vec![2.0, 1.0, -0.75 + 1.5 * 3.0]);
        let m = GroupLaw::embed(&law, &p).unwrap() * GroupLaw::embed(&law, &q).unwrap();
        assert!((m - GroupLaw::embed(&law, &z).unwrap()).abs().max() < 1e-14);
    }

    #[test]
    fn borel_inverse_is_matrix_inverse() {
        let law = Borel3;
        let p = [1.3, 0.7, 2.1, -0.4, 0.9, 1.7];
        let mut q = [0.0; 6];
        law.inv_f64(&p, &mut q);
        let m = GroupLaw::embed(&law, &p).unwrap() * GroupLaw::embed(&law, &q).unwrap();
        assert!((m - DMatrix::identity(3, 3)).abs().max() < 1e-14);
    }

    #[test]
    fn slice_of_borel_is_affine_line() {
        let slice = SliceLaw {
            parent: Arc::new(Borel3),
            keep: vec![0, 5],
            fill: vec![1.0, 1.0, 1.0, 0.0, 0.0, 0.0],
            homomorphic_embed: true,
        };
        let p = [1.7, -0.3];
        let q = [0.6, 2.2];
        assert_eq!(mul(&slice, &p, &q), mul(&AffineLine, &p, &q));
    }
}
