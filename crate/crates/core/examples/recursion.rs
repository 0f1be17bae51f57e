//! Prints the first Lax coefficients of the hierarchy for curves in R^3 and
//! checks the recursion identities exactly.

use airy_flow::diffpoly::{compute_lax_coefficients, recursion_defects};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dim = 3;
    let qs = compute_lax_coefficients(dim, 4)?;
    for (i, q) in qs.iter().enumerate() {
        if let Some(y) = q.y() {
            println!("y{i} = {y}");
            for (a, eta) in q.eta().unwrap().iter().enumerate() {
                println!("  eta{i}[{}] = {eta}", a + 1);
            }
        } else {
            for (a, z) in q.z().unwrap().iter().enumerate() {
                println!("z{i}[{}] = {z}", a + 1);
            }
        }
    }
    println!("nonzero recursion defects: {}", recursion_defects(&qs, dim).len());
    Ok(())
}
