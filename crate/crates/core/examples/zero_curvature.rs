//! Measures the zero-curvature residual of the Lax pair on exact soliton
//! samples and on the vacuum.

use airy_flow::grid::{CurvatureField, Grid};
use airy_flow::lax::zero_curvature_residual;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = Grid::line(2048, -20.0, 40.0 / 2047.0);
    let slices: Vec<CurvatureField> = (0..5)
        .map(|m| {
            let t = 0.25 + m as f64 * 1e-4;
            CurvatureField::from_fn(grid, 2, t, |x| vec![-2.0 / (x - t).cosh()])
        })
        .collect();
    println!("soliton residual {:.2e}", zero_curvature_residual(&slices, 2)?.max);
    let vacuum: Vec<CurvatureField> = (0..3).map(|m| CurvatureField::zeros(grid, 2, m as f64 * 0.1)).collect();
    println!("vacuum residual  {:e}", zero_curvature_residual(&vacuum, 2)?.max);
    Ok(())
}
