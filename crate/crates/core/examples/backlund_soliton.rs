//! Transforms the straight line into the one-soliton curve and checks the
//! curvature against `-2 s sech(s x - s^3 t)`.

use airy_flow::backlund::{bt_curvature, vacuum_slice, ProjectorSpec};
use airy_flow::grid::{CurvatureField, Grid};
use num_complex::Complex64;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = Grid::line(801, -20.0, 0.05);
    for s in [0.5, 1.0, 2.0] {
        let t = 0.3;
        let spec = ProjectorSpec::new(s, vec![0.0, -1.0])?;
        let out = bt_curvature(&vacuum_slice(grid, 2, 2, t, Complex64::new(0.0, -s)), &CurvatureField::zeros(grid, 2, t), &spec)?;
        let err = grid
            .xs()
            .iter()
            .enumerate()
            .map(|(i, &x)| (out.k.components[0][i] + 2.0 * s / (s * x - s.powi(3) * t).cosh()).abs())
            .fold(0.0, f64::max);
        println!("s = {s}: max error {err:.2e}, identity defect {:.2e}", out.identity_defect);
    }
    Ok(())
}
