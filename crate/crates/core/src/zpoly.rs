//! Polynomials in `z` and `zbar` with complex double-precision coefficients.
//!
//! A [`ZPolynomial`] is one complex coordinate of a disk map `D -> C^2`. Exponents
//! are exact integers; coefficients are `Complex64`. The only normalisation is
//! dropping coefficients that are exactly zero, so a parsed polynomial prints back
//! to the same text.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("operation undefined on the zero polynomial")]
    ZeroPolynomial,
}

/// Which Wirtinger derivative to take.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Wirtinger {
    Dz,
    Dzbar,
}

/// Finite sum of monomials `c * z^j * zbar^k`.
///
/// Internally keyed by `(k, j)` so that terms sharing a power of `zbar` are
/// contiguous; every public accessor speaks in `(j, k)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ZPolynomial {
    terms: BTreeMap<(u32, u32), Complex64>,
}

impl ZPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    /// `c * z^j * zbar^k`.
    pub fn monomial(c: Complex64, j: u32, k: u32) -> Self {
        let mut p = Self::zero();
        p.add_term(j, k, c);
        p
    }

    pub fn z_pow(j: u32) -> Self {
        Self::monomial(Complex64::new(1.0, 0.0), j, 0)
    }

    pub fn zbar_pow(k: u32) -> Self {
        Self::monomial(Complex64::new(1.0, 0.0), 0, k)
    }

    pub fn from_terms<I: IntoIterator<Item = ((u32, u32), Complex64)>>(terms: I) -> Self {
        let mut p = Self::zero();
        for ((j, k), c) in terms {
            p.add_term(j, k, c);
        }
        p
    }

    /// Accumulates `c * z^j zbar^k`, removing the entry if it cancels to exactly zero.
    pub fn add_term(&mut self, j: u32, k: u32, c: Complex64) {
        let entry = self.terms.entry((k, j)).or_insert(Complex64::new(0.0, 0.0));
        *entry += c;
        if *entry == Complex64::new(0.0, 0.0) {
            self.terms.remove(&(k, j));
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of `z^j zbar^k` (zero when absent).
    pub fn coeff(&self, j: u32, k: u32) -> Complex64 {
        self.terms.get(&(k, j)).copied().unwrap_or_default()
    }

    /// Terms as `((j, k), c)`, sorted by total degree, then by `j` descending.
    pub fn terms(&self) -> Vec<((u32, u32), Complex64)> {
        let mut out: Vec<_> = self.terms.iter().map(|(&(k, j), &c)| ((j, k), c)).collect();
        out.sort_by(|a, b| {
            let da = a.0 .0 + a.0 .1;
            let db = b.0 .0 + b.0 .1;
            da.cmp(&db).then(b.0 .0.cmp(&a.0 .0))
        });
        out
    }

    /// Total degree; `-1` for the zero polynomial.
    pub fn degree(&self) -> i64 {
        self.terms.keys().map(|&(k, j)| (j + k) as i64).max().unwrap_or(-1)
    }

    /// Maximum power of `z` and of `zbar` appearing in any term.
    pub fn max_exponents(&self) -> (u32, u32) {
        self.terms.keys().fold((0, 0), |(mj, mk), &(k, j)| (mj.max(j), mk.max(k)))
    }

    /// Evaluates at `z`, Horner in `z` within each group of equal `zbar` power.
    pub fn evaluate(&self, z: Complex64) -> Complex64 {
        let zb = z.conj();
        let mut total = Complex64::new(0.0, 0.0);
        let mut iter = self.terms.iter().rev().peekable();
        while let Some((&(k, j_top), &c_top)) = iter.next() {
            // Horner over descending j for this k.
            let mut acc = c_top;
            let mut j_prev = j_top;
            while let Some(&(&(k2, j2), &c2)) = iter.peek() {
                if k2 != k {
                    break;
                }
                acc = acc * z.powu(j_prev - j2) + c2;
                j_prev = j2;
                iter.next();
            }
            acc *= z.powu(j_prev);
            total += acc * zb.powu(k);
        }
        total
    }

    /// Formal Wirtinger derivative.
    pub fn wirtinger(&self, which: Wirtinger) -> Self {
        let mut out = Self::zero();
        for (&(k, j), &c) in &self.terms {
            match which {
                Wirtinger::Dz if j > 0 => out.add_term(j - 1, k, c * j as f64),
                Wirtinger::Dzbar if k > 0 => out.add_term(j, k - 1, c * k as f64),
                _ => {}
            }
        }
        out
    }

    /// Lowest total degree and the homogeneous part of that degree.
    pub fn lowest_order(&self) -> Result<(u32, ZPolynomial), PolyError> {
        let deg = self.terms.keys().map(|&(k, j)| j + k).min().ok_or(PolyError::ZeroPolynomial)?;
        Ok((deg, self.homogeneous_part(deg)))
    }

    /// Sub-polynomial of terms with total degree exactly `deg`.
    pub fn homogeneous_part(&self, deg: u32) -> ZPolynomial {
        ZPolynomial {
            terms: self.terms.iter().filter(|(&(k, j), _)| j + k == deg).map(|(&key, &c)| (key, c)).collect(),
        }
    }

    /// Swaps `z` and `zbar` and conjugates every coefficient, so that
    /// `conj(p(z)) == p.conj_poly()(z)`.
    pub fn conj_poly(&self) -> Self {
        ZPolynomial { terms: self.terms.iter().map(|(&(k, j), &c)| ((j, k), c.conj())).collect() }
    }

    /// The polynomial `z -> p(nu * z)`.
    pub fn compose_scale(&self, nu: Complex64) -> Self {
        let nb = nu.conj();
        let mut out = Self::zero();
        for (&(k, j), &c) in &self.terms {
            out.add_term(j, k, c * nu.powu(j) * nb.powu(k));
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = Self::zero();
        for (&(k, j), &c) in &self.terms {
            out.add_term(j, k, c * s);
        }
        out
    }

    /// Value together with the real-coordinate derivatives `d/dx` and `d/dy`.
    pub fn eval_with_partials(&self, z: Complex64, dz: &Self, dzb: &Self) -> (Complex64, Complex64, Complex64) {
        let v = self.evaluate(z);
        let a = dz.evaluate(z);
        let b = dzb.evaluate(z);
        (v, a + b, Complex64::i() * (a - b))
    }
}

impl Add for &ZPolynomial {
    type Output = ZPolynomial;
    fn add(self, rhs: &ZPolynomial) -> ZPolynomial {
        let mut out = self.clone();
        for (&(k, j), &c) in &rhs.terms {
            out.add_term(j, k, c);
        }
        out
    }
}

impl Sub for &ZPolynomial {
    type Output = ZPolynomial;
    fn sub(self, rhs: &ZPolynomial) -> ZPolynomial {
        self + &(-rhs)
    }
}

impl Neg for &ZPolynomial {
    type Output = ZPolynomial;
    fn neg(self) -> ZPolynomial {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Mul for &ZPolynomial {
    type Output = ZPolynomial;
    fn mul(self, rhs: &ZPolynomial) -> ZPolynomial {
        let mut out = ZPolynomial::zero();
        for (&(k1, j1), &c1) in &self.terms {
            for (&(k2, j2), &c2) in &rhs.terms {
                out.add_term(j1 + j2, k1 + k2, c1 * c2);
            }
        }
        out
    }
}

fn fmt_real(x: f64) -> String {
    // `{}` on f64 is the shortest representation that parses back exactly.
    let s = format!("{x}");
    if s.contains('e') || s.contains("inf") || s.contains("NaN") {
        format!("{x:e}")
    } else {
        s
    }
}

/// Formats a coefficient so that the DSL parser reads back the same value.
/// Returns the literal and whether it must be negated (leading `-`).
fn fmt_coeff(c: Complex64) -> (bool, String) {
    if c.im == 0.0 {
        (c.re.is_sign_negative(), fmt_real(c.re.abs()))
    } else if c.re == 0.0 {
        let neg = c.im.is_sign_negative();
        let m = c.im.abs();
        if m == 1.0 {
            (neg, "i".to_string())
        } else {
            (neg, format!("({}i)", fmt_real(m)))
        }
    } else {
        let sign = if c.im.is_sign_negative() { '-' } else { '+' };
        (false, format!("({}{}{}i)", fmt_real(c.re), sign, fmt_real(c.im.abs())))
    }
}

impl fmt::Display for ZPolynomial {
    /// Prints in the `.sing` polynomial syntax.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (idx, ((j, k), c)) in self.terms().into_iter().enumerate() {
            let (neg, lit) = fmt_coeff(c);
            match (idx, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let mut factors: Vec<String> = Vec::new();
            if j + k == 0 || lit != "1" {
                factors.push(lit);
            }
            for (var, e) in [("z", j), ("zbar", k)] {
                match e {
                    0 => {}
                    1 => factors.push(var.to_string()),
                    _ => factors.push(format!("{var}^{e}")),
                }
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn evaluate_examples() {
        let p = ZPolynomial::z_pow(2);
        let v = p.evaluate(c(1.0, 1.0));
        assert!((v - c(0.0, 2.0)).norm() < 1e-15);

        let q = ZPolynomial::zbar_pow(3);
        assert!((q.evaluate(c(0.0, 1.0)) - c(0.0, 1.0)).norm() < 1e-15);

        assert_eq!(ZPolynomial::zero().evaluate(c(5.0, 0.0)), c(0.0, 0.0));
    }

    #[test]
    fn wirtinger_examples() {
        let p = ZPolynomial::z_pow(3);
        assert_eq!(p.wirtinger(Wirtinger::Dz), ZPolynomial::monomial(c(3.0, 0.0), 2, 0));
        assert!(p.wirtinger(Wirtinger::Dzbar).is_zero());

        let q = ZPolynomial::monomial(c(2.0, 0.0), 1, 2);
        assert_eq!(q.wirtinger(Wirtinger::Dzbar), ZPolynomial::monomial(c(4.0, 0.0), 1, 1));
    }

    #[test]
    fn lowest_order_examples() {
        let p = &ZPolynomial::z_pow(3) + &ZPolynomial::z_pow(5);
        let (d, lead) = p.lowest_order().unwrap();
        assert_eq!(d, 3);
        assert_eq!(lead, ZPolynomial::z_pow(3));

        let q = &ZPolynomial::zbar_pow(2) + &ZPolynomial::z_pow(2);
        let (d, lead) = q.lowest_order().unwrap();
        assert_eq!(d, 2);
        assert_eq!(lead, q);

        assert_eq!(ZPolynomial::zero().lowest_order(), Err(PolyError::ZeroPolynomial));
    }

    #[test]
    fn degree_of_zero_is_minus_one() {
        assert_eq!(ZPolynomial::zero().degree(), -1);
        assert_eq!(ZPolynomial::monomial(c(1.0, 0.0), 2, 3).degree(), 5);
    }

    #[test]
    fn cancellation_keeps_canonical_form() {
        let p = ZPolynomial::z_pow(2);
        assert!((&p - &p).is_zero());
    }

    #[test]
    fn display_examples() {
        let p = ZPolynomial::from_terms([((2, 0), c(1.0, 0.0)), ((0, 3), c(-2.5, 0.0)), ((1, 1), c(0.5, -1.0))]);
        assert_eq!(p.to_string(), "z^2 + (0.5-1i)*z*zbar - 2.5*zbar^3");
        assert_eq!(ZPolynomial::monomial(c(0.0, -1.0), 0, 0).to_string(), "-i");
    }

    fn arb_poly() -> impl Strategy<Value = ZPolynomial> {
        proptest::collection::vec(((0u32..=8), (0u32..=8), -2.0f64..2.0, -2.0f64..2.0), 0..8).prop_map(|ts| {
            ZPolynomial::from_terms(
                ts.into_iter().filter(|(j, k, _, _)| j + k <= 8).map(|(j, k, re, im)| ((j, k), c(re, im))),
            )
        })
    }

    fn naive_eval(p: &ZPolynomial, z: Complex64) -> Complex64 {
        p.terms().into_iter().map(|((j, k), a)| a * z.powu(j) * z.conj().powu(k)).sum()
    }

    proptest! {
        #[test]
        fn horner_matches_naive(p in arb_poly(), re in -1.0f64..1.0, im in -1.0f64..1.0) {
            let z = c(re, im);
            let scale = 1.0 + p.terms().iter().map(|t| t.1.norm()).sum::<f64>();
            prop_assert!((p.evaluate(z) - naive_eval(&p, z)).norm() < 1e-13 * scale);
        }

        #[test]
        fn dz_matches_finite_differences_on_real_axis(p in arb_poly(), x in -0.9f64..0.9) {
            // Along the real axis d/dx = dz + dzbar.
            let h = 1e-5;
            let fd = (p.evaluate(c(x + h, 0.0)) - p.evaluate(c(x - h, 0.0))) / (2.0 * h);
            let an = p.wirtinger(Wirtinger::Dz).evaluate(c(x, 0.0))
                + p.wirtinger(Wirtinger::Dzbar).evaluate(c(x, 0.0));
            let scale = 1.0 + p.terms().iter().map(|t| t.1.norm()).sum::<f64>() * 64.0;
            prop_assert!((fd - an).norm() < 1e-6 * scale);
        }

        #[test]
        fn dz_matches_holomorphic_difference(j in 1u32..8, re in -0.9f64..0.9, im in -0.9f64..0.9) {
            // For a purely holomorphic monomial the real-axis difference quotient is dz alone.
            let p = ZPolynomial::z_pow(j);
            let z = c(re, im);
            let h = 1e-6;
            let fd = (p.evaluate(z + h) - p.evaluate(z - h)) / (2.0 * h);
            let an = p.wirtinger(Wirtinger::Dz).evaluate(z);
            prop_assert!((fd - an).norm() <= 1e-6 * an.norm().max(1e-3));
        }

        #[test]
        fn evaluate_is_linear(p in arb_poly(), q in arb_poly(), re in -1.0f64..1.0, im in -1.0f64..1.0) {
            let z = c(re, im);
            let lhs = (&p + &q).evaluate(z);
            let rhs = p.evaluate(z) + q.evaluate(z);
            prop_assert!((lhs - rhs).norm() < 1e-12);
        }

        #[test]
        fn conj_poly_conjugates_values(p in arb_poly(), re in -1.0f64..1.0, im in -1.0f64..1.0) {
            let z = c(re, im);
            prop_assert!((p.evaluate(z).conj() - p.conj_poly().evaluate(z)).norm() < 1e-12);
        }
    }
}
