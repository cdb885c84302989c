//! Modular functions of the built-in groups, computed from chart Jacobians
//! and cross-checked against a right-translation integral.

use haarpush::group_core::catalog::group;
use haarpush::integrate::{integrate_box, CoordBox, Integrator};
use haarpush::measure::TestFunction;
use num_complex::Complex64;

fn main() -> haarpush::Result<()> {
    for (name, h) in [
        ("aff1", vec![2.0, 0.0]),
        ("aff1", vec![0.5, 3.0]),
        ("heis3", vec![1.0, -2.0, 0.5]),
        ("borel3", vec![2.0, 1.0, 1.0, 0.0, 0.0, 0.0]),
        ("borel3", vec![1.0, 1.0, 3.0, 0.2, -1.0, 0.4]),
    ] {
        let g = group(name)?;
        let (right, left) = g.modular_parts(&h);
        println!("{name:<7} h = {h:?}\n        |det dR_h| = {right:.6}  |det dL_h| = {left:.6}  Δ(h) = {:.6}", g.modular(&h)?);
    }

    // Δ(h) = ∫ f(g h⁻¹) dg / ∫ f dg on Aff(1)+, by quadrature
    let g = group("aff1")?;
    let h = [2.0, 0.0];
    let hinv = g.inv(&h);
    let f = TestFunction::bump(vec![1.0, 0.0], vec![0.5, 1.0])?;
    let rule = Integrator::gauss(16, 4);
    let haar = |x: &[f64]| g.haar_density_unchecked(x);
    let plain = integrate_box(|x: &[f64]| f.eval(x) * haar(x), &f.support().to_coord_box()?, &rule)?;
    // supp f(·h⁻¹) = supp(f)·h, here a ∈ [1, 3]
    let moved_box = CoordBox::new(vec![1.0, -1.0], vec![3.0, 1.0])?;
    let moved = integrate_box(|x: &[f64]| f.eval(&g.mul(x, &hinv)) * haar(x), &moved_box, &rule)?;
    let ratio: Complex64 = moved.value / plain.value;
    println!("\naff1: translation integral ratio {:.12}, Jacobian Δ {:.12}", ratio.re, g.modular(&h)?);
    Ok(())
}
