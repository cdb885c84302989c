//! Right translation of a density rescales every pairing by 1/Δ(h).

use haarpush::group_core::catalog::group;
use haarpush::integrate::IntegrationPolicy;
use haarpush::measure::{pair, Density, TestFunction};
use num_complex::Complex64;

fn main() -> haarpush::Result<()> {
    let policy = IntegrationPolicy::default();
    let g = group("aff1")?;
    let mu = Density::new(&g, TestFunction::bump(vec![1.0, 0.0], vec![0.5, 1.0])?)?;
    let one = TestFunction::constant(2, Complex64::new(1.0, 0.0));
    let mass = pair(&mu, &one, &policy)?.value.re;
    for h in [[2.0, 0.0], [0.5, 0.0], [1.5, -0.7]] {
        let moved = mu.right_translate(&h)?;
        let m = pair(&moved, &one, &policy)?.value.re;
        println!("h = {h:?}: mass ratio {:.10}, 1/Δ(h) = {:.10}", m / mass, 1.0 / g.modular(&h)?);
    }

    // the same check, reported by the chain runner on B3
    use haarpush::verify::{catalog_chain, Chain, Check, GroupRegistry, RunSettings};
    let settings = RunSettings::default();
    let mut cfg = catalog_chain("borel3-aff-center")?;
    cfg.right_translations = Some(vec![vec![2.0, 0.0]]);
    let chain = Chain::build(&cfg, &GroupRegistry::new(), &settings)?;
    for r in chain.run(Check::RightTranslation, &settings)? {
        println!("{:<28} {}  rel {:.2e}", r.check_id, if r.pass { "pass" } else { "FAIL" }, r.rel_error);
        for n in &r.diagnostics.notes {
            println!("    {n}");
        }
    }
    Ok(())
}
