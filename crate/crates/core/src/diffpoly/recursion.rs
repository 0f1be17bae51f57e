//! The Lax-coefficient recursion `(Q_i)_x + [u, Q_i] + [a, Q_{i+1}] = 0`.
//!
//! With `u = Psi(k)` the coefficients split into blocks: odd `Q_i` carry a
//! scalar `y` and a vector `eta` in the first column, even `Q_i` carry a
//! vector `z` and a skew matrix `xi` in the lower-right corner. Each step is
//! either algebraic or a single exact integration.

use super::{dot, DiffPoly, DiffPolyError, Result};

/// Block content of one coefficient `Q_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LaxBlocks {
    Odd { y: DiffPoly, eta: Vec<DiffPoly> },
    Even { z: Vec<DiffPoly>, xi: Vec<Vec<DiffPoly>> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LaxCoefficient {
    pub index: usize,
    pub blocks: LaxBlocks,
}

impl LaxCoefficient {
    pub fn is_odd(&self) -> bool {
        self.index % 2 == 1
    }

    pub fn y(&self) -> Option<&DiffPoly> {
        match &self.blocks {
            LaxBlocks::Odd { y, .. } => Some(y),
            LaxBlocks::Even { .. } => None,
        }
    }

    pub fn eta(&self) -> Option<&[DiffPoly]> {
        match &self.blocks {
            LaxBlocks::Odd { eta, .. } => Some(eta),
            LaxBlocks::Even { .. } => None,
        }
    }

    pub fn z(&self) -> Option<&[DiffPoly]> {
        match &self.blocks {
            LaxBlocks::Even { z, .. } => Some(z),
            LaxBlocks::Odd { .. } => None,
        }
    }

    pub fn xi(&self) -> Option<&[Vec<DiffPoly>]> {
        match &self.blocks {
            LaxBlocks::Even { xi, .. } => Some(xi),
            LaxBlocks::Odd { .. } => None,
        }
    }

    /// The full `(n+1) x (n+1)` matrix `Q_i` with polynomial entries.
    pub fn matrix(&self, dim: usize) -> Vec<Vec<DiffPoly>> {
        let mut q = vec![vec![DiffPoly::zero(dim); dim + 1]; dim + 1];
        match &self.blocks {
            LaxBlocks::Odd { y, eta } => {
                q[1][0] = y.clone();
                q[0][1] = -y;
                for (i, e) in eta.iter().enumerate() {
                    q[2 + i][0] = e.clone();
                    q[0][2 + i] = -e;
                }
            }
            LaxBlocks::Even { z, xi } => {
                for (i, zi) in z.iter().enumerate() {
                    q[2 + i][1] = zi.clone();
                    q[1][2 + i] = -zi;
                    for (j, x) in xi[i].iter().enumerate() {
                        q[2 + i][2 + j] = x.clone();
                    }
                }
            }
        }
        q
    }
}

/// Runs the recursion for `Q_0, ..., Q_m` in ambient dimension `dim`, with
/// every integration constant set to zero.
pub fn compute_lax_coefficients(dim: usize, m: usize) -> Result<Vec<LaxCoefficient>> {
    if dim < 2 {
        return Err(DiffPolyError::InvalidDimension(dim));
    }
    let k = DiffPoly::jet_vector(dim, 0);
    let zero = DiffPoly::zero(dim);
    let mut z = k.clone();
    let mut xi = vec![vec![zero.clone(); dim - 1]; dim - 1];
    let mut y = zero.clone();
    let mut eta: Vec<DiffPoly> = Vec::new();
    let mut out = vec![LaxCoefficient { index: 0, blocks: LaxBlocks::Even { z: z.clone(), xi: xi.clone() } }];
    for index in 1..=m {
        if index % 2 == 1 {
            eta = (0..dim - 1)
                .map(|i| {
                    let rotated = xi[i].iter().zip(&k).fold(zero.clone(), |acc, (x, kl)| acc + x * kl);
                    rotated - z[i].derivative()
                })
                .collect();
            y = dot(&k, &eta).integrate()?;
            out.push(LaxCoefficient { index, blocks: LaxBlocks::Odd { y: y.clone(), eta: eta.clone() } });
        } else {
            z = eta.iter().zip(&k).map(|(e, ki)| e.derivative() + &y * ki).collect();
            xi = vec![vec![zero.clone(); dim - 1]; dim - 1];
            for i in 0..dim - 1 {
                for l in i + 1..dim - 1 {
                    let entry = (&(&k[i] * &z[l]) - &(&z[i] * &k[l])).integrate()?;
                    xi[l][i] = -&entry;
                    xi[i][l] = entry;
                }
            }
            out.push(LaxCoefficient { index, blocks: LaxBlocks::Even { z: z.clone(), xi: xi.clone() } });
        }
    }
    Ok(out)
}

/// The recursion output organized by flow: the `j`-th flow is
/// `k_t = (z_{2j-2})_x - xi_{2j-2} k`.
#[derive(Debug, Clone)]
pub struct Hierarchy {
    dim: usize,
    coefficients: Vec<LaxCoefficient>,
}

impl Hierarchy {
    /// Coefficients through `Q_{2 max_flow - 1}`, enough for the flows
    /// `1..=max_flow` and the Hamiltonians `F_1, ..., F_{2 max_flow - 1}`.
    pub fn new(dim: usize, max_flow: usize) -> Result<Hierarchy> {
        let max_flow = max_flow.max(1);
        Ok(Hierarchy { dim, coefficients: compute_lax_coefficients(dim, 2 * max_flow - 1)? })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn max_flow(&self) -> usize {
        self.coefficients.len() / 2
    }

    pub fn coefficients(&self) -> &[LaxCoefficient] {
        &self.coefficients
    }

    pub fn coefficient(&self, index: usize) -> Option<&LaxCoefficient> {
        self.coefficients.get(index)
    }

    /// Right-hand side of the `j`-th flow, one polynomial per component.
    pub fn flow_rhs(&self, j: usize) -> Option<Vec<DiffPoly>> {
        if j == 0 || j > self.max_flow() {
            return None;
        }
        let q = &self.coefficients[2 * j - 2];
        let (z, xi) = (q.z()?, q.xi()?);
        let k = DiffPoly::jet_vector(self.dim, 0);
        Some(
            (0..self.dim - 1)
                .map(|i| {
                    let rotated = xi[i].iter().zip(&k).fold(DiffPoly::zero(self.dim), |acc, (x, kl)| acc + x * kl);
                    z[i].derivative() - rotated
                })
                .collect(),
        )
    }

    /// `y_{2j-1}` for `j >= 1`.
    pub fn y(&self, j: usize) -> Option<&DiffPoly> {
        self.coefficients.get(2 * j - 1)?.y()
    }

    /// `z_{2j}` for `j >= 0`.
    pub fn z(&self, j: usize) -> Option<&[DiffPoly]> {
        self.coefficients.get(2 * j)?.z()
    }

    /// `xi_{2j}` for `j >= 0`.
    pub fn xi(&self, j: usize) -> Option<&[Vec<DiffPoly>]> {
        self.coefficients.get(2 * j)?.xi()
    }

    /// `eta_{2j-1}` for `j >= 1`.
    pub fn eta(&self, j: usize) -> Option<&[DiffPoly]> {
        self.coefficients.get(2 * j - 1)?.eta()
    }
}

fn matmul(a: &[Vec<DiffPoly>], b: &[Vec<DiffPoly>], dim: usize) -> Vec<Vec<DiffPoly>> {
    let size = a.len();
    (0..size).map(|i| (0..size).map(|j| (0..size).fold(DiffPoly::zero(dim), |acc, l| acc + &a[i][l] * &b[l][j])).collect()).collect()
}

fn bracket(a: &[Vec<DiffPoly>], b: &[Vec<DiffPoly>], dim: usize) -> Vec<Vec<DiffPoly>> {
    let ab = matmul(a, b, dim);
    let ba = matmul(b, a, dim);
    ab.iter().zip(&ba).map(|(r, s)| r.iter().zip(s).map(|(x, y)| x - y).collect()).collect()
}

/// Entries `(i, row, col, defect)` where `(Q_i)_x + [u, Q_i] + [a, Q_{i+1}]`
/// is not exactly zero, for consecutive coefficients in `coeffs`.
pub fn recursion_defects(coeffs: &[LaxCoefficient], dim: usize) -> Vec<(usize, usize, usize, DiffPoly)> {
    let Some(first) = coeffs.first() else { return Vec::new() };
    let u = first.matrix(dim);
    let mut a = vec![vec![DiffPoly::zero(dim); dim + 1]; dim + 1];
    a[1][0] = DiffPoly::constant(dim, super::rational(1, 1));
    a[0][1] = DiffPoly::constant(dim, super::rational(-1, 1));
    let mut out = Vec::new();
    for pair in coeffs.windows(2) {
        let qi = pair[0].matrix(dim);
        let next = pair[1].matrix(dim);
        let lhs1 = bracket(&u, &qi, dim);
        let lhs2 = bracket(&a, &next, dim);
        for r in 0..=dim {
            for c in 0..=dim {
                let total = &(&qi[r][c].derivative() + &lhs1[r][c]) + &lhs2[r][c];
                if !total.is_zero() {
                    out.push((pair[0].index, r, c, total));
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recursion_identity_holds_entrywise() {
        for dim in 2..=4 {
            let qs = compute_lax_coefficients(dim, 5).unwrap();
            let defects = recursion_defects(&qs, dim);
            assert!(defects.is_empty(), "dim {dim}: {:?}", defects.first());
        }
    }

    #[test]
    fn xi_blocks_are_skew() {
        let qs = compute_lax_coefficients(4, 6).unwrap();
        for q in qs.iter().filter(|q| !q.is_odd()) {
            let xi = q.xi().unwrap();
            for i in 0..3 {
                assert!(xi[i][i].is_zero());
                for j in 0..3 {
                    assert_eq!(xi[i][j], -&xi[j][i]);
                }
            }
        }
    }

    #[test]
    fn rejects_dimension_one() {
        assert_eq!(compute_lax_coefficients(1, 3).unwrap_err(), DiffPolyError::InvalidDimension(1));
    }
}
