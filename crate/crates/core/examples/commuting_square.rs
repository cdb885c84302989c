//! Two routes from G down to Ḡ/H̄ on the Heisenberg chain: through G/H, or
//! through the quotient group Ḡ = G/N.

use haarpush::integrate::IntegrationPolicy;
use haarpush::measure::{check_membership, inclusion_check_mh_in_mn, Density, FunctionSpec, TestFunction};
use haarpush::pushforward::{pushforward_pair, PushforwardHandle};
use haarpush::verify::{catalog_chain, GroupRegistry, LieChain, RunSettings};

fn main() -> haarpush::Result<()> {
    let settings = RunSettings::default();
    let chain = LieChain::build(&catalog_chain("heis3-xz-center")?, &GroupRegistry::new(), &settings)?;
    let policy = IntegrationPolicy::default();
    let q = chain.quotient().expect("N is normal");
    let maps = chain.descended_maps().expect("N is normal");
    let g_mod_h = haarpush::subgroup_quotient::HomogeneousSpace::new(chain.h())?;

    let mu = Density::from_spec(chain.group(), &FunctionSpec::bump(vec![0.2, 0.1, -0.3], vec![0.7, 0.8, 0.9]))?;
    let cert = check_membership(&mu, &g_mod_h)?;
    let route_a = [maps.g_to_g_mod_h.clone(), maps.g_mod_h_to_gbar_mod_hbar.clone()];
    let route_b = PushforwardHandle::new(mu.clone(), inclusion_check_mh_in_mn(&cert, q.space())?)
        .quotient(q, &policy)?
        .map(&maps.gbar_to_gbar_mod_hbar)?;
    println!("route B: {}", route_b.route().join(" → "));

    // Ḡ/H̄ is the y line here
    for (c, r) in [(0.0, 0.5), (0.3, 0.4), (-0.4, 0.6)] {
        let alpha = TestFunction::bump(vec![c], vec![r])?;
        let a = pushforward_pair(&mu, Some(&cert), &route_a, &alpha, &policy)?;
        let b = route_b.pair(&alpha, &policy)?;
        println!("α centred at {c:+.1}: via G/H {:.12}   via Ḡ {:.12}", a.value.re, b.value.re);
    }
    Ok(())
}
