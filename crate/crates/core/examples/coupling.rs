//! Coordinate coupling of two simple random walks, checked exhaustively and by sampling.

use walkrange::coupling::{exhaustive_coupling_oracle, run_coupling};

fn main() -> walkrange::Result<()> {
    let oracle = exhaustive_coupling_oracle(&[2, 1], 5)?;
    println!(
        "{} paths, {} distinct Y paths, X hits {} <= Y hits {}, pass {}",
        oracle.paths, oracle.distinct_y_paths, oracle.x_hits, oracle.y_hits, oracle.pass
    );
    let run = run_coupling(&[2, 1], 5, 100_000, 1)?;
    println!(
        "P(X_5 = 0) ~ {:.4} (exact {})  P(Y_5 = 0) ~ {:.4} (exact {})",
        run.p_x_hat, run.p_x_exact, run.p_y_hat, run.p_y_exact
    );
    Ok(())
}
