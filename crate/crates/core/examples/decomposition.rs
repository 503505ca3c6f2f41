//! First-passage decomposition and the recursive bound on the hit-mass margin.

use walkrange::engine::{verify_decomposition, verify_w_recursion, EngineOptions};
use walkrange::kernels::IncrementPmf;
use walkrange::perturb::random_phi;

fn main() -> walkrange::Result<()> {
    let pmf = IncrementPmf::simple(2)?;
    let phi = random_phi(3, 11, &IncrementPmf::cube(2)?);
    let dec = verify_decomposition(&pmf, &phi, 10, EngineOptions::exact())?;
    for r in &dec.rows {
        println!("n = {:2}  combined = {}  target = {}", r.n, r.combined, r.target);
    }
    let w = verify_w_recursion(&pmf, &phi, 10, EngineOptions::exact())?;
    for r in &w.rows {
        println!("n = {:2}  margin = {}  bound = {}", r.n, r.margin, r.bound);
    }
    println!("decomposition {}, recursion {}", dec.pass, w.pass);
    Ok(())
}
