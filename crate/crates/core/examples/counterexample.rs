//! Range of Z - phi against Z for phi alternating 0, 1: the ratio settles near one half.

use walkrange::montecarlo::counterexample_ratio;

fn main() -> walkrange::Result<()> {
    for n in [100, 1_000, 10_000] {
        let r = counterexample_ratio(n, 1_000, 1)?;
        println!("n = {n:6}  ratio {:.4} +- {:.4}  range [{:.3}, {:.3}]", r.mean_ratio, r.stderr, r.min_ratio, r.max_ratio);
    }
    Ok(())
}
