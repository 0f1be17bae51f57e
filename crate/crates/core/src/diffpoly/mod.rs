//! Exact differential polynomials in the jet variables `k_i^{(m)}`.
//!
//! A [`DiffPoly`] is a finite sum of monomials in the jets of
//! `k = (k_1, ..., k_{n-1})` with exact rational coefficients. The algebra
//! supports the total `x`-derivative and its partial inverse
//! ([`DiffPoly::integrate`]), which is all the Lax-coefficient recursion in
//! [`recursion`] needs. Numeric evaluation on sampled curvatures lives in
//! [`eval`].

pub mod eval;
pub mod recursion;
mod text;

use std::collections::BTreeMap;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub use eval::{dp_evaluate, CompiledPoly, DerivativeScheme, Jets};
pub use recursion::{compute_lax_coefficients, recursion_defects, Hierarchy, LaxBlocks, LaxCoefficient};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiffPolyError {
    #[error("not an exact derivative (residue {residue})")]
    NotExactDerivative { residue: String },
    #[error("spectral derivatives require a periodic grid")]
    SchemeMismatch,
    #[error("ambient dimension must be at least 2, got {0}")]
    InvalidDimension(usize),
    #[error("dimension mismatch: {expected} vs {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("cannot parse differential polynomial: {0}")]
    Parse(String),
}

pub type Result<T, E = DiffPolyError> = std::result::Result<T, E>;

/// The jet variable `k_component^{(order)}`; components are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct JetVar {
    pub component: usize,
    pub order: usize,
}

impl JetVar {
    pub fn new(component: usize, order: usize) -> JetVar {
        assert!(component >= 1, "jet components are 1-based");
        JetVar { component, order }
    }

    pub fn derivative(self) -> JetVar {
        JetVar { component: self.component, order: self.order + 1 }
    }
}

/// Product of jet variables with positive exponents, sorted by variable.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(Vec<(JetVar, u32)>);

impl Monomial {
    pub fn one() -> Monomial {
        Monomial(Vec::new())
    }

    pub fn var(v: JetVar) -> Monomial {
        Monomial(vec![(v, 1)])
    }

    pub fn factors(&self) -> &[(JetVar, u32)] {
        &self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    pub fn max_order(&self) -> Option<usize> {
        self.0.iter().map(|(v, _)| v.order).max()
    }

    pub fn exponent(&self, v: JetVar) -> u32 {
        self.0.iter().find(|(w, _)| *w == v).map_or(0, |(_, e)| *e)
    }

    /// Total exponent carried by variables of the given derivative order.
    pub fn degree_in_order(&self, order: usize) -> u32 {
        self.0.iter().filter(|(v, _)| v.order == order).map(|(_, e)| e).sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut merged: Vec<(JetVar, u32)> = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() || j < other.0.len() {
            match (self.0.get(i), other.0.get(j)) {
                (Some(a), Some(b)) if a.0 == b.0 => {
                    merged.push((a.0, a.1 + b.1));
                    i += 1;
                    j += 1;
                }
                (Some(a), Some(b)) if a.0 < b.0 => {
                    merged.push(*a);
                    i += 1;
                }
                (Some(_), Some(b)) => {
                    merged.push(*b);
                    j += 1;
                }
                (Some(a), None) => {
                    merged.push(*a);
                    i += 1;
                }
                (None, Some(b)) => {
                    merged.push(*b);
                    j += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        Monomial(merged)
    }

    /// Divides out one factor of `v`, which must be present.
    fn without_one(&self, v: JetVar) -> Monomial {
        let mut out = self.0.clone();
        let pos = out.iter().position(|(w, _)| *w == v).expect("variable not present");
        if out[pos].1 == 1 {
            out.remove(pos);
        } else {
            out[pos].1 -= 1;
        }
        Monomial(out)
    }
}

/// Exact rational from a numerator/denominator pair.
pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// A differential polynomial in the jets of `k` for ambient dimension `dim`
/// (so `k` has `dim - 1` components). Zero coefficients are never stored, so
/// structural equality is polynomial equality.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiffPoly {
    dim: usize,
    terms: BTreeMap<Monomial, BigRational>,
}

impl DiffPoly {
    pub fn zero(dim: usize) -> DiffPoly {
        DiffPoly { dim, terms: BTreeMap::new() }
    }

    pub fn constant(dim: usize, c: BigRational) -> DiffPoly {
        let mut p = DiffPoly::zero(dim);
        p.add_term(Monomial::one(), c);
        p
    }

    /// The jet `k_component^{(order)}`.
    pub fn jet(dim: usize, component: usize, order: usize) -> DiffPoly {
        assert!(component >= 1 && component < dim, "component {component} outside 1..{dim}");
        let mut p = DiffPoly::zero(dim);
        p.add_term(Monomial::var(JetVar::new(component, order)), BigRational::one());
        p
    }

    /// The vector `(k_1^{(order)}, ..., k_{n-1}^{(order)})`.
    pub fn jet_vector(dim: usize, order: usize) -> Vec<DiffPoly> {
        (1..dim).map(|i| DiffPoly::jet(dim, i, order)).collect()
    }

    /// `||k||^2 = sum_i k_i^2`.
    pub fn norm_squared(dim: usize) -> DiffPoly {
        let k = DiffPoly::jet_vector(dim, 0);
        dot(&k, &k)
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial, BigRational)>>(dim: usize, terms: I) -> DiffPoly {
        let mut p = DiffPoly::zero(dim);
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, m: &Monomial) -> BigRational {
        self.terms.get(m).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Highest derivative order among all variables, `None` for constants and zero.
    pub fn max_order(&self) -> Option<usize> {
        self.terms.keys().filter_map(Monomial::max_order).max()
    }

    pub fn max_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    /// Terms of total degree one, i.e. the linearization at `k = 0`.
    pub fn linear_part(&self) -> DiffPoly {
        DiffPoly::from_terms(self.dim, self.terms.iter().filter(|(m, _)| m.degree() == 1).map(|(m, c)| (m.clone(), c.clone())))
    }

    pub fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get() + c;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn scale(&self, c: &BigRational) -> DiffPoly {
        if c.is_zero() {
            return DiffPoly::zero(self.dim);
        }
        DiffPoly { dim: self.dim, terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect() }
    }

    /// Total `x`-derivative (Leibniz rule, each jet order raised by one).
    pub fn derivative(&self) -> DiffPoly {
        let mut out = DiffPoly::zero(self.dim);
        for (m, c) in &self.terms {
            for &(v, e) in m.factors() {
                let rest = m.without_one(v);
                let term = rest.mul(&Monomial::var(v.derivative()));
                out.add_term(term, c * BigRational::from_integer(BigInt::from(e)));
            }
        }
        out
    }

    /// Antiderivative with zero constant term.
    ///
    /// Works top-down in derivative order: an exact derivative of order `m`
    /// must be linear in the order-`m` jets, `P = sum_i A_i k_i^{(m)} + B`, and
    /// its antiderivative's dependence on `u_i = k_i^{(m-1)}` is the radial
    /// integral of the one-form `sum_i A_i du_i`. Subtracting the derivative
    /// of that piece lowers the order; anything left at order zero (or a
    /// nonzero order-`m` residue) means `P` has no polynomial antiderivative.
    pub fn integrate(&self) -> Result<DiffPoly> {
        let mut rest = self.clone();
        let mut result = DiffPoly::zero(self.dim);
        while !rest.is_zero() {
            let not_exact = |r: &DiffPoly| DiffPolyError::NotExactDerivative { residue: r.to_string() };
            let top = match rest.max_order() {
                Some(m) if m >= 1 && !rest.terms.contains_key(&Monomial::one()) => m,
                _ => return Err(not_exact(&rest)),
            };
            let mut piece = DiffPoly::zero(self.dim);
            for (m, c) in &rest.terms {
                match m.degree_in_order(top) {
                    0 => continue,
                    1 => {}
                    _ => return Err(not_exact(&rest)),
                }
                let (v, _) = *m.factors().iter().find(|(v, _)| v.order == top).unwrap();
                let coeff_monomial = m.without_one(v);
                let u = JetVar::new(v.component, top - 1);
                let radial = coeff_monomial.degree_in_order(top - 1) as i64 + 1;
                piece.add_term(coeff_monomial.mul(&Monomial::var(u)), c * rational(1, radial));
            }
            let reduced = &rest - &piece.derivative();
            if reduced.max_order().is_some_and(|m| m >= top) {
                return Err(not_exact(&rest));
            }
            result += &piece;
            rest = reduced;
        }
        Ok(result)
    }

    /// Coefficients as `f64`, for numeric work.
    pub fn compile(&self) -> CompiledPoly {
        CompiledPoly::new(self.terms.iter().map(|(m, c)| (c.to_f64().expect("finite coefficient"), m.factors().to_vec())).collect())
    }

    fn check_dim(&self, other: &DiffPoly) {
        assert_eq!(self.dim, other.dim, "differential polynomials over different dimensions");
    }
}

impl Add<&DiffPoly> for &DiffPoly {
    type Output = DiffPoly;
    fn add(self, rhs: &DiffPoly) -> DiffPoly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for DiffPoly {
    type Output = DiffPoly;
    fn add(mut self, rhs: DiffPoly) -> DiffPoly {
        self += &rhs;
        self
    }
}

impl AddAssign<&DiffPoly> for DiffPoly {
    fn add_assign(&mut self, rhs: &DiffPoly) {
        self.check_dim(rhs);
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), c.clone());
        }
    }
}

impl SubAssign<&DiffPoly> for DiffPoly {
    fn sub_assign(&mut self, rhs: &DiffPoly) {
        self.check_dim(rhs);
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), -c.clone());
        }
    }
}

impl Sub<&DiffPoly> for &DiffPoly {
    type Output = DiffPoly;
    fn sub(self, rhs: &DiffPoly) -> DiffPoly {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Sub for DiffPoly {
    type Output = DiffPoly;
    fn sub(mut self, rhs: DiffPoly) -> DiffPoly {
        self -= &rhs;
        self
    }
}

impl Neg for &DiffPoly {
    type Output = DiffPoly;
    fn neg(self) -> DiffPoly {
        DiffPoly { dim: self.dim, terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect() }
    }
}

impl Neg for DiffPoly {
    type Output = DiffPoly;
    fn neg(self) -> DiffPoly {
        -&self
    }
}

impl Mul<&DiffPoly> for &DiffPoly {
    type Output = DiffPoly;
    fn mul(self, rhs: &DiffPoly) -> DiffPoly {
        self.check_dim(rhs);
        let mut out = DiffPoly::zero(self.dim);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }
}

impl Mul for DiffPoly {
    type Output = DiffPoly;
    fn mul(self, rhs: DiffPoly) -> DiffPoly {
        &self * &rhs
    }
}

/// `sum_i a_i b_i`.
pub fn dot(a: &[DiffPoly], b: &[DiffPoly]) -> DiffPoly {
    let dim = a.first().map_or(2, DiffPoly::dim);
    a.iter().zip(b).fold(DiffPoly::zero(dim), |acc, (x, y)| acc + x * y)
}

/// Largest absolute coefficient, as a float; handy in diagnostics.
pub fn max_abs_coefficient(p: &DiffPoly) -> f64 {
    p.terms().map(|(_, c)| c.abs().to_f64().unwrap_or(f64::INFINITY)).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k(i: usize, m: usize) -> DiffPoly {
        DiffPoly::jet(3, i, m)
    }

    #[test]
    fn derivative_of_a_jet() {
        assert_eq!(k(1, 0).derivative(), k(1, 1));
    }

    #[test]
    fn derivative_of_half_norm_squared() {
        let half = DiffPoly::norm_squared(3).scale(&rational(1, 2));
        let expected = &(&k(1, 0) * &k(1, 1)) + &(&k(2, 0) * &k(2, 1));
        assert_eq!(half.derivative(), expected);
    }

    #[test]
    fn cross_terms_cancel() {
        let p = &(&k(1, 1) * &k(2, 0)) - &(&k(1, 0) * &k(2, 1));
        let expected = &(&k(1, 2) * &k(2, 0)) - &(&k(1, 0) * &k(2, 2));
        assert_eq!(p.derivative(), expected);
    }

    #[test]
    fn integrate_minus_k_dot_kx() {
        let p = -(&(&k(1, 0) * &k(1, 1)) + &(&k(2, 0) * &k(2, 1)));
        let expected = DiffPoly::norm_squared(3).scale(&rational(-1, 2));
        assert_eq!(p.integrate().unwrap(), expected);
    }

    #[test]
    fn integrate_rejects_k_squared() {
        let p = &k(1, 0) * &k(1, 0);
        assert!(matches!(p.integrate(), Err(DiffPolyError::NotExactDerivative { .. })));
    }

    #[test]
    fn integrate_rejects_non_closed_top_form() {
        // k_1' k_2'' is not a total derivative: its top part is not closed.
        let p = &k(1, 1) * &k(2, 2);
        assert!(p.integrate().is_err());
        let q = &k(1, 1) * &k(2, 1);
        assert!(q.integrate().is_err());
    }

    #[test]
    fn integrate_rejects_constants() {
        assert!(DiffPoly::constant(3, rational(2, 1)).integrate().is_err());
    }

    #[test]
    fn integrate_mixed_orders() {
        // d/dx (k_1 k_1'' k_2 + k_2'^3) integrated back.
        let g = &(&(&k(1, 0) * &k(1, 2)) * &k(2, 0)) + &(&(&k(2, 1) * &k(2, 1)) * &k(2, 1));
        assert_eq!(g.derivative().integrate().unwrap(), g);
    }

    #[test]
    fn zero_integrates_to_zero() {
        assert!(DiffPoly::zero(3).integrate().unwrap().is_zero());
    }
}
