//! Canonical text form: `3/8*k[1]^(0)^4 - k[2]^(1)*k[1]^(3) + 1/2`.
//!
//! A factor is `k[i]^(m)` (component `i`, derivative order `m`), optionally
//! followed by `^e`. Terms appear in monomial order; the zero polynomial
//! prints as `0`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{DiffPoly, DiffPolyError, JetVar, Monomial};

impl fmt::Display for DiffPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (idx, (m, c)) in self.terms().enumerate() {
            let sign = if c.is_negative() { "-" } else { "+" };
            match (idx, sign) {
                (0, "-") => write!(f, "-")?,
                (0, _) => {}
                _ => write!(f, " {sign} ")?,
            }
            let mag = c.abs();
            let mut parts: Vec<String> = Vec::new();
            if !mag.is_one() || m.is_one() {
                parts.push(mag.to_string());
            }
            for &(v, e) in m.factors() {
                if e == 1 {
                    parts.push(format!("k[{}]^({})", v.component, v.order));
                } else {
                    parts.push(format!("k[{}]^({})^{}", v.component, v.order, e));
                }
            }
            write!(f, "{}", parts.join("*"))?;
        }
        Ok(())
    }
}

impl DiffPoly {
    /// Parses the canonical text form for ambient dimension `dim`.
    pub fn parse(dim: usize, text: &str) -> Result<DiffPoly, DiffPolyError> {
        let poly: DiffPoly = text.parse()?;
        let top = poly.terms().flat_map(|(m, _)| m.factors().iter().map(|(v, _)| v.component)).max().unwrap_or(0);
        if top >= dim {
            return Err(DiffPolyError::DimensionMismatch { expected: dim, found: top + 1 });
        }
        Ok(DiffPoly::from_terms(dim, poly.terms().map(|(m, c)| (m.clone(), c.clone()))))
    }
}

/// Parses text with the dimension inferred from the largest component seen.
impl FromStr for DiffPoly {
    type Err = DiffPolyError;

    fn from_str(text: &str) -> Result<DiffPoly, DiffPolyError> {
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(DiffPolyError::Parse("empty input".into()));
        }
        let mut terms: Vec<(Monomial, BigRational)> = Vec::new();
        let mut start = 0;
        let bytes = compact.as_bytes();
        let mut depth = 0usize;
        // Split on top-level signs that are not part of `^(` or leading.
        let mut pieces: Vec<(bool, &str)> = Vec::new();
        let mut negative = false;
        for (i, &b) in bytes.iter().enumerate() {
            match b {
                b'(' | b'[' => depth += 1,
                b')' | b']' => depth = depth.saturating_sub(1),
                b'+' | b'-' if depth == 0 => {
                    if i > start {
                        pieces.push((negative, &compact[start..i]));
                    } else if i != 0 {
                        return Err(DiffPolyError::Parse(format!("dangling sign at {i}")));
                    }
                    negative = b == b'-';
                    start = i + 1;
                }
                _ => {}
            }
        }
        if start >= compact.len() {
            return Err(DiffPolyError::Parse("trailing sign".into()));
        }
        pieces.push((negative, &compact[start..]));
        let mut max_component = 1;
        for (neg, piece) in pieces {
            let (m, c) = parse_term(piece)?;
            if let Some(top) = m.factors().iter().map(|(v, _)| v.component).max() {
                max_component = max_component.max(top);
            }
            terms.push((m, if neg { -c } else { c }));
        }
        Ok(DiffPoly::from_terms(max_component + 1, terms))
    }
}

fn parse_term(piece: &str) -> Result<(Monomial, BigRational), DiffPolyError> {
    let mut coeff = BigRational::one();
    let mut mono = Monomial::one();
    for factor in piece.split('*') {
        if let Some(rest) = factor.strip_prefix("k[") {
            let (v, e) = parse_factor(rest).ok_or_else(|| DiffPolyError::Parse(format!("bad factor `{factor}`")))?;
            for _ in 0..e {
                mono = mono.mul(&Monomial::var(v));
            }
        } else {
            coeff *= parse_rational(factor)?;
        }
    }
    if coeff.is_zero() {
        mono = Monomial::one();
    }
    Ok((mono, coeff))
}

/// Parses `i]^(m)` or `i]^(m)^e` (the `k[` prefix already stripped).
fn parse_factor(rest: &str) -> Option<(JetVar, u32)> {
    let (comp, rest) = rest.split_once("]^(")?;
    let (order, rest) = rest.split_once(')')?;
    let component: usize = comp.parse().ok()?;
    let order: usize = order.parse().ok()?;
    if component == 0 {
        return None;
    }
    let exponent = match rest {
        "" => 1,
        _ => rest.strip_prefix('^')?.parse().ok()?,
    };
    Some((JetVar::new(component, order), exponent))
}

fn parse_rational(text: &str) -> Result<BigRational, DiffPolyError> {
    let bad = || DiffPolyError::Parse(format!("bad coefficient `{text}`"));
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n, d),
        None => (text, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(num, den))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffpoly::rational;

    #[test]
    fn round_trip() {
        let k1 = DiffPoly::jet(3, 1, 0);
        let k2x = DiffPoly::jet(3, 2, 1);
        let p = &(&(&k1 * &k1) * &k2x).scale(&rational(-3, 8)) + &DiffPoly::constant(3, rational(5, 2));
        let text = p.to_string();
        assert_eq!(DiffPoly::parse(3, &text).unwrap(), p);
    }

    #[test]
    fn prints_canonical_form() {
        let k = DiffPoly::jet(2, 1, 0);
        let p = (&(&k * &k) * &(&k * &k)).scale(&rational(3, 8));
        assert_eq!(p.to_string(), "3/8*k[1]^(0)^4");
        assert_eq!(DiffPoly::zero(2).to_string(), "0");
    }

    #[test]
    fn rejects_garbage() {
        assert!("k[1]^(0) +".parse::<DiffPoly>().is_err());
        assert!("k[0]^(1)".parse::<DiffPoly>().is_err());
        assert!("1/0".parse::<DiffPoly>().is_err());
        assert!(DiffPoly::parse(2, "k[2]^(0)").is_err());
    }
}
