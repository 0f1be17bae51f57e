//! Logs the conserved quantities of a random smooth curve in R^3 under vmKdV
//! and checks the Hamiltonian form of the first flows.

use airy_flow::grid::{CurvatureField, Grid};
use airy_flow::hamiltonian::{conserved_log, relative_drift, Hamiltonians};
use airy_flow::vmkdv::{evolve, random_smooth_field, rhs, FlowSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = Grid::periodic(512, 0.0, 2.0 * std::f64::consts::PI);
    let k0 = random_smooth_field(grid, 3, 42, 5, 0.6);
    let spec = FlowSpec { dt: 5e-4, snapshot_times: (1..=5).map(|m| m as f64 * 0.02).collect(), ..FlowSpec::default() };
    let run = evolve(&k0, &spec, 0.1)?;
    let history: Vec<CurvatureField> = std::iter::once(k0.clone()).chain(run.snapshots).collect();
    let log = conserved_log(&history)?;
    let drift = relative_drift(&log);
    println!("relative drift F1 {:.2e}, F3 {:.2e}, F5 {:.2e}", drift[0], drift[1], drift[2]);

    let hams = Hamiltonians::new(3, 3)?;
    for j in 1..=3 {
        let a = hams.hamiltonian_field(j, &k0)?;
        let b = rhs(j, &k0)?;
        let err = a.iter().zip(&b).flat_map(|(p, q)| p.iter().zip(q).map(|(x, y)| (x - y).abs())).fold(0.0, f64::max);
        println!("flow {j}: |Xi(grad F) - rhs| = {err:.2e}");
    }
    Ok(())
}
