//! The finite chain S4 ⊃ A4 ⊃ V4 in exact rational arithmetic.

use haarpush::finite_group::{fin_pushforward, FinGroup, FinMeasure};
use haarpush::verify::{catalog_chain, Chain, Check, GroupRegistry, RunSettings};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> haarpush::Result<()> {
    let s4 = FinGroup::symmetric(4)?;
    let a4 = s4.subgroup(&s4.elements_by_label(&["(123)", "(12)(34)"])?);
    let v4 = s4.subgroup(&s4.elements_by_label(&["(12)(34)", "(13)(24)"])?);
    println!("|S4| = {}, |A4| = {}, |V4| = {}", s4.order(), a4.len(), v4.len());
    println!("V4 normal in S4: {}", s4.is_normal(&v4));

    // push a random measure down to S4/V4 and check its total mass
    let (quot, cosets) = s4.quotient_group(&v4)?;
    let p = &cosets.projection;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mu = FinMeasure::random(&mut rng, s4.order());
    let pushed = fin_pushforward(&mu, p)?;
    println!("S4/V4 has order {}; mass {} = {}", quot.order(), mu.total_mass(), pushed.total_mass());

    let settings = RunSettings { finite_samples: 50, ..RunSettings::default() };
    let chain = Chain::build(&catalog_chain("s4-a4-v4")?, &GroupRegistry::new(), &settings)?;
    for check in [Check::Main2, Check::Main3, Check::Modular, Check::Weil] {
        for r in chain.run(check, &settings)? {
            println!("{:<28} {}  ({} exact comparisons)", r.check_id, if r.pass { "pass" } else { "FAIL" }, r.lhs.len());
        }
    }
    Ok(())
}
