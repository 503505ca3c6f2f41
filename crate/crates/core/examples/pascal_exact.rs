//! Hit-mass margins of a moving trap pair against the static one, in exact arithmetic.

use walkrange::engine::{verify_pascal, EngineOptions};
use walkrange::kernels::IncrementPmf;
use walkrange::perturb::alternating_phi;

fn main() -> walkrange::Result<()> {
    let pmf = IncrementPmf::simple(1)?;
    let report = verify_pascal(&pmf, &alternating_phi(21), 20, EngineOptions::exact())?;
    for row in &report.rows {
        println!("n = {:2}  W_phi = {}  W_0 = {}  margin = {}", row.n, row.w_phi, row.w_zero, row.margin);
    }
    println!("pass: {}, min margin {}", report.pass, report.min_margin);
    Ok(())
}
