//! Deterministic grid checks of the inequalities the samplers rely on.

use tsfp::validation::invariant_grid_suite;

fn main() -> tsfp::Result<()> {
    let report = invariant_grid_suite()?;
    print!("{report}");
    if !report.passed() {
        std::process::exit(1);
    }
    Ok(())
}
