//! Exact n-step kernels, a Fourier cross-check and the paired monotonicity conditions.

use walkrange::kernels::{check_mono_conditions, fourier_crosscheck, n_step_kernel, IncrementPmf};
use walkrange::Site;

fn main() -> walkrange::Result<()> {
    let pmf = IncrementPmf::simple(2)?;
    for n in 0..=6 {
        let k = n_step_kernel(&pmf, n)?;
        println!("p_{n}(0) = {}", k.probability(&Site::ORIGIN));
    }
    println!("fourier gap at n = 8: {:.2e}", fourier_crosscheck(&pmf, 8, 19)?);
    let r = check_mono_conditions(&pmf, 12)?;
    println!("paired conditions up to n = 12 hold: {}", r.holds);
    Ok(())
}
