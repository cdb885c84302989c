//! A group given by formulas in a run config, checked like a built-in one.

use haarpush::cli::RunConfig;
use haarpush::verify::{applicable_checks, Chain};

const CONFIG: &str = r#"
seed = 5
chains = []

# ax + b group written with a = exp(s)
[[group]]
name = "log-affine"
dim = 2
domain = ["any", "any"]
identity = [0.0, 0.0]
mul = ["x0 + y0", "x1 + exp(x0) * y1"]
inv = ["-x0", "-exp(-x0) * x1"]

[[chain]]
name = "log-affine-diag"
group = "log-affine"
h_positions = [0]
n_positions = []
sample_center = [0.0, 0.0]
sample_radius = [0.5, 1.0]
"#;

fn main() -> haarpush::Result<()> {
    let cfg = RunConfig::parse(CONFIG, "inline")?;
    let registry = cfg.registry()?;
    let g = registry.get("log-affine")?;
    for s in [-1.0, 0.0, 0.7] {
        println!("Δ(s = {s:+.1}) = {:.10}   (e^(-s) = {:.10})", g.modular(&[s, 0.0])?, (-s as f64).exp());
    }
    let settings = cfg.settings(cfg.seed.unwrap_or(0));
    for chain_cfg in cfg.resolved_chains()? {
        let chain = Chain::build(&chain_cfg, &registry, &settings)?;
        for r in chain.run_all(&applicable_checks(&chain_cfg), &settings)? {
            println!("{:<20} {:<28} {}  rel {:.2e}", r.chain, r.check_id, if r.pass { "pass" } else { "FAIL" }, r.rel_error);
        }
    }
    Ok(())
}
