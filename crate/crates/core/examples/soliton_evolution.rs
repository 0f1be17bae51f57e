//! Evolves the vmKdV soliton `k = -2 sech x` and compares with the travelling
//! wave `-2 sech(x - t)`.

use airy_flow::grid::{CurvatureField, Grid};
use airy_flow::vmkdv::{evolve, FlowSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = Grid::periodic(1024, -20.0, 40.0);
    let sech = |x: f64| 1.0 / x.cosh();
    let k0 = CurvatureField::from_fn(grid, 2, 0.0, |x| vec![-2.0 * sech(x)]);
    let run = evolve(&k0, &FlowSpec { dt: 1e-3, ..FlowSpec::default() }, 1.0)?;
    let err =
        grid.xs().iter().enumerate().map(|(i, &x)| (run.final_state.components[0][i] + 2.0 * sech(x - 1.0)).abs()).fold(0.0, f64::max);
    println!("t = {}: max error against the travelling wave {err:.2e}", run.final_state.t);
    Ok(())
}
