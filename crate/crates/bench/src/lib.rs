//! Fixtures shared by the benchmarks in `benches/`.

use std::sync::Arc;

use mlap_core::{make_graded_grid, Domain, Grid1D, GridFunction, ProblemSpec};

/// Graded interval grid with the default exponent 3.
pub fn interval(n: usize) -> Arc<Grid1D> {
    Arc::new(make_graded_grid(n, 3.0, Domain::Interval01).expect("valid grid size"))
}

/// Constant source on `grid`.
pub fn unit_source(grid: Arc<Grid1D>) -> GridFunction {
    GridFunction::sample_dirichlet(grid, |_| 1.0)
}

/// One spec per regime: subcritical, critical, supercritical.
pub fn regime_specs() -> [(&'static str, ProblemSpec); 3] {
    [
        ("subcritical", ProblemSpec::new(2.0, 0.3, 0.3)),
        ("critical", ProblemSpec::new(2.0, 0.5, 0.5)),
        ("supercritical", ProblemSpec::new(2.0, 0.5, 1.0)),
    ]
}
