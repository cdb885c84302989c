//! Runs every applicable check on every built-in chain and prints one line
//! per report.

use std::time::Instant;

use haarpush::verify::{applicable_checks, catalog_chain, Chain, GroupRegistry, RunSettings, CHAIN_CATALOG};

fn main() -> haarpush::Result<()> {
    let settings = RunSettings::default();
    let registry = GroupRegistry::new();
    let only: Vec<String> = std::env::args().skip(1).collect();
    for (name, _) in CHAIN_CATALOG {
        if !only.is_empty() && !only.iter().any(|o| o == name) {
            continue;
        }
        let cfg = catalog_chain(name)?;
        let chain = Chain::build(&cfg, &registry, &settings)?;
        for check in applicable_checks(&cfg) {
            let t = Instant::now();
            for r in chain.run(check, &settings)? {
                println!(
                    "{:<18} {:<28} {}  rel {:.2e}  abs {:.2e}  ({:.1} s)",
                    r.chain,
                    r.check_id,
                    if r.pass { "pass" } else { "FAIL" },
                    r.rel_error,
                    r.abs_error,
                    t.elapsed().as_secs_f64()
                );
            }
        }
    }
    Ok(())
}
