//! Fixes the quotient Haar measure of G/N by the Weil formula and checks
//! the constant against fresh bumps.

use haarpush::integrate::IntegrationPolicy;
use haarpush::measure::TestFunction;
use haarpush::subgroup_quotient::{quotient_group, weil_integrals, weil_normalize, Split, SubgroupEmbedding};
use haarpush::group_core::catalog::group;

fn main() -> haarpush::Result<()> {
    let policy = IntegrationPolicy::default();
    for (name, n_pos, center, radius) in [
        ("heis3", vec![2], vec![0.1, -0.2, 0.3], vec![0.8, 0.9, 1.0]),
        ("borel3", vec![5], vec![1.0, 1.0, 1.0, 0.0, 0.0, 0.0], vec![0.4, 0.4, 0.4, 0.8, 0.8, 0.8]),
    ] {
        let g = group(name)?;
        let n = SubgroupEmbedding::new(&g, n_pos.clone())?;
        let q = quotient_group(&g, &n, &Split::from_fiber(g.dim(), &n_pos))?;
        let beta = TestFunction::bump(center.clone(), radius.clone())?;
        let c = weil_normalize(&q, &beta, &policy)?;
        println!("{name}/N: c = {c:.12}");

        // a second bump, shifted and narrower
        let shifted: Vec<f64> = center.iter().zip(&radius).map(|(c, r)| c + 0.2 * r).collect();
        let narrow: Vec<f64> = radius.iter().map(|r| 0.6 * r).collect();
        let (num, den) = weil_integrals(&q, &TestFunction::bump(shifted, narrow)?, &policy)?;
        println!("    ∫_G β = {:.12}   c·∫∫ β = {:.12}", num.value.re, c * den.value.re);
    }
    Ok(())
}
