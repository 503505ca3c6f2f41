//! Expected range of the held walk with an inserted path: exact, enumerated and sampled.

use walkrange::engine::{range_via_hits, EngineOptions};
use walkrange::kernels::IncrementPmf;
use walkrange::montecarlo::{enumerate_range, mc_range};
use walkrange::perturb::InsertionPath;

fn main() -> walkrange::Result<()> {
    let pmf = IncrementPmf::simple(1)?;
    let f = InsertionPath::random(5, 13, &IncrementPmf::cube(1)?);
    let exact = range_via_hits(&pmf, &f, 12, EngineOptions::exact())?;
    let enumerated = enumerate_range(&pmf, &f, 12)?;
    let mc = mc_range(&pmf, &f, 12, 100_000, 1)?;
    println!("hits {exact}  enumeration {enumerated}  sampled {:.4} +- {:.4}", mc.mean, mc.stderr);
    Ok(())
}
