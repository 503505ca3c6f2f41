//! Survival among Poisson traps with Pareto holding, moving particle against the origin.

use walkrange::kernels::IncrementPmf;
use walkrange::montecarlo::{simulate_trap_field, survival_via_identity, HoldingLaw, ParticlePath, TrapSimConfig};

fn main() -> walkrange::Result<()> {
    let holding = HoldingLaw::Pareto { shape: 0.8, scale: 1.0 };
    let particle = ParticlePath::zigzag(1, 1.0, 5.0);
    let config = TrapSimConfig::new(IncrementPmf::simple(1)?, holding, 5.0, particle, 10_000, 1)?;
    let direct = simulate_trap_field(&config)?;
    let identity = survival_via_identity(&config)?;
    println!("direct    S(X) {:.4} +- {:.4}  S(0) {:.4} +- {:.4}", direct.moving.estimate, direct.moving.stderr, direct.fixed.estimate, direct.fixed.stderr);
    println!("identity  S(X) {:.4} +- {:.4}  S(0) {:.4} +- {:.4}", identity.moving.estimate, identity.moving.stderr, identity.fixed.estimate, identity.fixed.stderr);
    for p in &direct.curve {
        println!("t = {:.1}  {:.4}  {:.4}", p.t, p.moving, p.fixed);
    }
    Ok(())
}
