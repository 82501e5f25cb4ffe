//! Exact scalars: Gaussian rationals and Laurent polynomials in an opaque `π`.
//!
//! `π` never gets a numeric value inside exact computations. It is carried as a
//! formal generator so that identities mixing `2π`, `1/4π` and moment maps stay
//! exact; conversion to `f64` happens only at the very edge (spectral norms).

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Element of `ℚ(i)`.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct GaussRat {
    pub re: BigRational,
    pub im: BigRational,
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn fmt_rat(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl GaussRat {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussRat { re, im }
    }

    pub fn zero() -> Self {
        GaussRat { re: BigRational::zero(), im: BigRational::zero() }
    }

    pub fn one() -> Self {
        Self::int(1)
    }

    pub fn int(n: i64) -> Self {
        GaussRat { re: BigRational::from_integer(n.into()), im: BigRational::zero() }
    }

    pub fn frac(n: i64, d: i64) -> Self {
        GaussRat { re: rat(n, d), im: BigRational::zero() }
    }

    /// The imaginary unit `i`.
    pub fn i() -> Self {
        GaussRat { re: BigRational::zero(), im: BigRational::one() }
    }

    pub fn complex(re: (i64, i64), im: (i64, i64)) -> Self {
        GaussRat { re: rat(re.0, re.1), im: rat(im.0, im.1) }
    }

    pub fn from_rational(r: BigRational) -> Self {
        GaussRat { re: r, im: BigRational::zero() }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        GaussRat { re: self.re.clone(), im: -self.im.clone() }
    }

    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = self.norm_sqr();
        Some(GaussRat { re: &self.re / &n, im: -(&self.im / &n) })
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(self.re.to_f64().unwrap_or(f64::NAN), self.im.to_f64().unwrap_or(f64::NAN))
    }

    pub fn scale_int(&self, k: i64) -> Self {
        let k = BigRational::from_integer(k.into());
        GaussRat { re: &self.re * &k, im: &self.im * &k }
    }
}

impl fmt::Display for GaussRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", fmt_rat(&self.re)),
            (true, false) => write!(f, "{}*i", fmt_rat(&self.im)),
            (false, false) => {
                let sign = if self.im.is_negative() { "-" } else { "+" };
                write!(f, "{}{}{}*i", fmt_rat(&self.re), sign, fmt_rat(&self.im.abs()))
            }
        }
    }
}

impl<'a> Add<&'a GaussRat> for &'a GaussRat {
    type Output = GaussRat;
    fn add(self, o: &GaussRat) -> GaussRat {
        GaussRat { re: &self.re + &o.re, im: &self.im + &o.im }
    }
}

impl<'a> Sub<&'a GaussRat> for &'a GaussRat {
    type Output = GaussRat;
    fn sub(self, o: &GaussRat) -> GaussRat {
        GaussRat { re: &self.re - &o.re, im: &self.im - &o.im }
    }
}

impl<'a> Mul<&'a GaussRat> for &'a GaussRat {
    type Output = GaussRat;
    fn mul(self, o: &GaussRat) -> GaussRat {
        if self.im.is_zero() && o.im.is_zero() {
            return GaussRat { re: &self.re * &o.re, im: BigRational::zero() };
        }
        GaussRat {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }
}

impl<'a> Div<&'a GaussRat> for &'a GaussRat {
    type Output = GaussRat;
    fn div(self, o: &GaussRat) -> GaussRat {
        self * &o.inv().expect("division by zero Gaussian rational")
    }
}

impl Neg for GaussRat {
    type Output = GaussRat;
    fn neg(self) -> GaussRat {
        GaussRat { re: -self.re, im: -self.im }
    }
}

impl<'a> Neg for &'a GaussRat {
    type Output = GaussRat;
    fn neg(self) -> GaussRat {
        GaussRat { re: -self.re.clone(), im: -self.im.clone() }
    }
}

impl AddAssign<&GaussRat> for GaussRat {
    fn add_assign(&mut self, o: &GaussRat) {
        self.re += &o.re;
        self.im += &o.im;
    }
}

impl SubAssign<&GaussRat> for GaussRat {
    fn sub_assign(&mut self, o: &GaussRat) {
        self.re -= &o.re;
        self.im -= &o.im;
    }
}

/// Laurent polynomial in `π` with Gaussian-rational coefficients, i.e. an
/// element of `ℚ(i)[π, π⁻¹] ⊂ ℚ(i)(π)`.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Scalar {
    terms: BTreeMap<i32, GaussRat>,
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::default()
    }

    pub fn one() -> Self {
        Self::from_gauss(GaussRat::one())
    }

    pub fn int(n: i64) -> Self {
        Self::from_gauss(GaussRat::int(n))
    }

    pub fn frac(n: i64, d: i64) -> Self {
        Self::from_gauss(GaussRat::frac(n, d))
    }

    pub fn i() -> Self {
        Self::from_gauss(GaussRat::i())
    }

    /// `c·π^e`.
    pub fn monomial(c: GaussRat, e: i32) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(e, c);
        }
        Scalar { terms }
    }

    pub fn pi_pow(e: i32) -> Self {
        Self::monomial(GaussRat::one(), e)
    }

    pub fn from_gauss(c: GaussRat) -> Self {
        Self::monomial(c, 0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, &GaussRat)> {
        self.terms.iter().map(|(e, c)| (*e, c))
    }

    pub fn add_term(&mut self, e: i32, c: &GaussRat) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(e).or_insert_with(GaussRat::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&e);
        }
    }

    /// The value when no power of `π` other than `π⁰` is present.
    pub fn as_gauss(&self) -> Option<GaussRat> {
        match self.terms.len() {
            0 => Some(GaussRat::zero()),
            1 => self.terms.get(&0).cloned(),
            _ => None,
        }
    }

    /// Present as a single monomial `c·π^e` (needed to divide).
    pub fn as_monomial(&self) -> Option<(GaussRat, i32)> {
        if self.terms.len() == 1 {
            let (e, c) = self.terms.iter().next().unwrap();
            Some((c.clone(), *e))
        } else {
            None
        }
    }

    pub fn conj(&self) -> Self {
        Scalar { terms: self.terms.iter().map(|(e, c)| (*e, c.conj())).collect() }
    }

    pub fn scale(&self, c: &GaussRat) -> Self {
        let mut out = Scalar::zero();
        for (e, v) in &self.terms {
            out.add_term(*e, &(v * c));
        }
        out
    }

    /// Division by a unit of the Laurent ring; `None` if `o` is not `c·π^e`.
    pub fn checked_div(&self, o: &Scalar) -> Option<Scalar> {
        let (c, e) = o.as_monomial()?;
        let inv = c.inv()?;
        Some(Scalar { terms: self.terms.iter().map(|(k, v)| (k - e, v * &inv)).collect() })
    }

    pub fn to_complex(&self) -> Complex64 {
        self.terms
            .iter()
            .map(|(e, c)| c.to_complex() * std::f64::consts::PI.powi(*e))
            .sum()
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if *e == 0 {
                write!(f, "({c})")?;
            } else {
                write!(f, "({c})*pi^{e}")?;
            }
        }
        Ok(())
    }
}

impl<'a> Add<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn add(self, o: &Scalar) -> Scalar {
        let mut out = self.clone();
        for (e, c) in &o.terms {
            out.add_term(*e, c);
        }
        out
    }
}

impl<'a> Sub<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn sub(self, o: &Scalar) -> Scalar {
        let mut out = self.clone();
        for (e, c) in &o.terms {
            out.add_term(*e, &-c);
        }
        out
    }
}

impl<'a> Mul<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn mul(self, o: &Scalar) -> Scalar {
        let mut out = Scalar::zero();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                out.add_term(e1 + e2, &(c1 * c2));
            }
        }
        out
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar { terms: self.terms.iter().map(|(e, c)| (*e, -c)).collect() }
    }
}

impl AddAssign<&Scalar> for Scalar {
    fn add_assign(&mut self, o: &Scalar) {
        for (e, c) in &o.terms {
            self.add_term(*e, c);
        }
    }
}

/// Solve `A x = b` over `ℚ(i)` by Gaussian elimination. Returns any solution
/// (free variables set to zero), or `None` when the system is inconsistent.
pub fn solve_linear(mut a: Vec<Vec<GaussRat>>, mut b: Vec<GaussRat>) -> Option<Vec<GaussRat>> {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        b.swap(r, p);
        let inv = a[r][c].inv().unwrap();
        for j in c..cols {
            a[r][j] = &a[r][j] * &inv;
        }
        b[r] = &b[r] * &inv;
        for i in 0..rows {
            if i != r && !a[i][c].is_zero() {
                let factor = a[i][c].clone();
                for j in c..cols {
                    let t = &factor * &a[r][j];
                    a[i][j] -= &t;
                }
                let t = &factor * &b[r];
                b[i] -= &t;
            }
        }
        pivots.push(c);
        r += 1;
    }
    if b[r..].iter().any(|v| !v.is_zero()) {
        return None;
    }
    let mut x = vec![GaussRat::zero(); cols];
    for (row, &c) in pivots.iter().enumerate() {
        x[c] = b[row].clone();
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_arithmetic() {
        let a = GaussRat::complex((1, 2), (1, 3));
        let b = GaussRat::complex((-2, 1), (3, 4));
        let q = &(&a * &b) / &b;
        assert_eq!(q, a);
        assert_eq!(&GaussRat::i() * &GaussRat::i(), GaussRat::int(-1));
        assert_eq!(a.to_string(), "1/2+1/3*i");
        assert_eq!(GaussRat::complex((0, 1), (-1, 2)).to_string(), "-1/2*i");
    }

    #[test]
    fn pi_laurent() {
        let a = &Scalar::pi_pow(1) + &Scalar::frac(1, 2);
        let b = Scalar::pi_pow(-1);
        let p = &a * &b;
        assert_eq!(p, &Scalar::one() + &Scalar::monomial(GaussRat::frac(1, 2), -1));
        assert!(p.as_gauss().is_none());
        assert_eq!(p.checked_div(&b).unwrap(), a);
        assert!(Scalar::one().checked_div(&a).is_none());
        let v = Scalar::monomial(GaussRat::int(2), 1).to_complex();
        assert!((v.re - 2.0 * std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn linear_solve() {
        let a = vec![
            vec![GaussRat::int(1), GaussRat::int(2)],
            vec![GaussRat::int(3), GaussRat::i()],
        ];
        let x = vec![GaussRat::frac(1, 3), GaussRat::complex((1, 1), (-1, 2))];
        let b: Vec<_> = a
            .iter()
            .map(|row| row.iter().zip(&x).fold(GaussRat::zero(), |acc, (r, v)| &acc + &(r * v)))
            .collect();
        assert_eq!(solve_linear(a, b).unwrap(), x);
        let sing = vec![vec![GaussRat::int(1), GaussRat::int(1)], vec![GaussRat::int(2), GaussRat::int(2)]];
        assert!(solve_linear(sing, vec![GaussRat::int(1), GaussRat::int(3)]).is_none());
    }
}
