//! Applies two transformations in both orders to the vacuum in R^3 and
//! compares the results with the algebraic two-soliton.

use airy_flow::backlund::{permute, vacuum_multi_soliton, vacuum_slice, ProjectorSpec};
use airy_flow::grid::{CurvatureField, Grid};
use num_complex::Complex64;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = Grid::line(401, -10.0, 0.05);
    let t = 0.1;
    let s1 = ProjectorSpec::normalized(1.0, vec![0.3, 0.9, -0.2])?;
    let s2 = ProjectorSpec::normalized(2.0, vec![-0.5, 0.1, 0.8])?;
    let slice = |s: f64| vacuum_slice(grid, 3, 2, t, Complex64::new(0.0, -s));
    let p = permute(&s1, &s2, &CurvatureField::zeros(grid, 3, t), &slice(1.0), &slice(2.0))?;
    let two = vacuum_multi_soliton(grid, 2, t, &[s1, s2])?;
    let diff =
        p.k12().components.iter().zip(&two.k.components).flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs())).fold(0.0, f64::max);
    println!("|u12 - u21| = {:.2e}, |u12 - two-soliton| = {diff:.2e}", p.mismatch);
    Ok(())
}
