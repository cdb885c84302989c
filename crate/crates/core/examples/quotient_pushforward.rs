//! Pushforward of φ dg to G/H paired against the fiber average of ν, versus
//! the direct double integral with the modular weight Δ_G/Δ_H.

use haarpush::integrate::IntegrationPolicy;
use haarpush::measure::{check_membership, Density, TestFunction};
use haarpush::pushforward::{build_fiber_average, pushforward_pair};
use haarpush::subgroup_quotient::CoordMap;
use haarpush::verify::{catalog_chain, GroupRegistry, LieChain, RunSettings};

fn main() -> haarpush::Result<()> {
    let settings = RunSettings::default();
    let chain = LieChain::build(&catalog_chain("aff1-diag")?, &GroupRegistry::new(), &settings)?;
    let policy = IntegrationPolicy::default();
    let g = chain.group();
    let space = haarpush::subgroup_quotient::HomogeneousSpace::new(chain.h())?;
    let route = [CoordMap::pick("p", g.dim(), space.base())];

    let pairs = [
        ([1.1, 0.2], [0.4, 0.8], [0.9, -0.1], [0.5, 0.6]),
        ([0.8, -0.3], [0.3, 0.5], [1.2, 0.4], [0.5, 1.0]),
    ];
    for (pc, pr, nc, nr) in pairs {
        let phi = Density::new(g, TestFunction::bump(pc.to_vec(), pr.to_vec())?)?;
        let nu = TestFunction::bump(nc.to_vec(), nr.to_vec())?;
        let cert = check_membership(&phi, &space)?;
        let alpha = build_fiber_average(&nu, &space, &policy)?;
        let lhs = pushforward_pair(&phi, Some(&cert), &route, &alpha, &policy)?;
        let rhs = chain.quotient_pushforward_rhs(&phi, &nu, &policy)?;
        println!("φ at {pc:?}, ν at {nc:?}: lhs {:.12}  rhs {:.12}", lhs.value.re, rhs.value.re);
    }
    Ok(())
}
