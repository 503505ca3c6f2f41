//! Symmetric domination of the one-dimensional survival field along a random trap path.

use walkrange::engine::{domination_chain, EngineOptions};
use walkrange::kernels::IncrementPmf;
use walkrange::perturb::random_phi;

fn main() -> walkrange::Result<()> {
    let pmf = IncrementPmf::uniform3();
    let phi = random_phi(7, 16, &IncrementPmf::cube(1)?);
    let report = domination_chain(&pmf, &phi, 15, EngineOptions::exact())?;
    for v in &report.rows {
        println!("n = {:2}  min slack {}  at k = {}, x0 = {}", v.n, v.min_slack, v.witness_k, v.witness_x0);
    }
    println!("pass: {}", report.pass);
    Ok(())
}
