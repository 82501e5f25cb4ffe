//! Polynomials in `z^i`, `z̄^i` (and a formal `π^{±1}`) over `ℚ(i)`.

use std::collections::BTreeMap;
use std::fmt;

use crate::scalar::{GaussRat, Scalar};

/// Largest complex dimension supported by the exponent layout.
pub const MAX_DIM: usize = 4;

/// Monomial `π^pi Π z^z_i z̄^zb_i`. Field order gives a graded-lex order on the
/// `z, z̄` part, which is what exact division by `D` relies on.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Mono {
    deg: u16,
    pub z: [u8; MAX_DIM],
    pub zb: [u8; MAX_DIM],
    pub pi: i16,
}

impl Mono {
    pub fn new(z: [u8; MAX_DIM], zb: [u8; MAX_DIM], pi: i16) -> Self {
        let deg = z.iter().chain(zb.iter()).map(|&e| e as u16).sum();
        Mono { deg, z, zb, pi }
    }

    pub fn one() -> Self {
        Mono::default()
    }

    pub fn pi(e: i16) -> Self {
        Mono { pi: e, ..Mono::default() }
    }

    /// Total degree in `z, z̄`.
    pub fn degree(&self) -> u16 {
        self.deg
    }

    pub fn mul(&self, o: &Mono) -> Mono {
        let mut z = [0u8; MAX_DIM];
        let mut zb = [0u8; MAX_DIM];
        for i in 0..MAX_DIM {
            z[i] = self.z[i] + o.z[i];
            zb[i] = self.zb[i] + o.zb[i];
        }
        Mono { deg: self.deg + o.deg, z, zb, pi: self.pi + o.pi }
    }

    /// `self / o` when `o` divides the `z, z̄` part.
    pub fn div(&self, o: &Mono) -> Option<Mono> {
        let mut z = [0u8; MAX_DIM];
        let mut zb = [0u8; MAX_DIM];
        for i in 0..MAX_DIM {
            z[i] = self.z[i].checked_sub(o.z[i])?;
            zb[i] = self.zb[i].checked_sub(o.zb[i])?;
        }
        Some(Mono { deg: self.deg - o.deg, z, zb, pi: self.pi - o.pi })
    }

    pub fn conj(&self) -> Mono {
        Mono { deg: self.deg, z: self.zb, zb: self.z, pi: self.pi }
    }

    /// Exponent of coordinate `a` in the real-index convention
    /// `a < n → z^a`, `a ≥ n → z̄^{a-n}`.
    pub fn exp(&self, a: usize, n: usize) -> u8 {
        if a < n {
            self.z[a]
        } else {
            self.zb[a - n]
        }
    }

    fn with_exp(&self, a: usize, n: usize, e: u8) -> Mono {
        let mut z = self.z;
        let mut zb = self.zb;
        if a < n {
            z[a] = e;
        } else {
            zb[a - n] = e;
        }
        Mono::new(z, zb, self.pi)
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Poly {
    terms: BTreeMap<Mono, GaussRat>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn one() -> Self {
        Self::term(Mono::one(), GaussRat::one())
    }

    pub fn term(m: Mono, c: GaussRat) -> Self {
        let mut p = Poly::zero();
        p.add_term(m, &c);
        p
    }

    pub fn constant(c: GaussRat) -> Self {
        Self::term(Mono::one(), c)
    }

    pub fn from_scalar(s: &Scalar) -> Self {
        let mut p = Poly::zero();
        for (e, c) in s.terms() {
            p.add_term(Mono::pi(e as i16), c);
        }
        p
    }

    /// Coordinate `a` in the real-index convention (see [`Mono::exp`]).
    pub fn coord(a: usize, n: usize) -> Self {
        Self::term(Mono::one().with_exp(a, n, 1), GaussRat::one())
    }

    pub fn z(i: usize) -> Self {
        let mut z = [0; MAX_DIM];
        z[i] = 1;
        Self::term(Mono::new(z, [0; MAX_DIM], 0), GaussRat::one())
    }

    pub fn zb(i: usize) -> Self {
        let mut zb = [0; MAX_DIM];
        zb[i] = 1;
        Self::term(Mono::new([0; MAX_DIM], zb, 0), GaussRat::one())
    }

    /// `D = 1 + Σ_i z^i z̄^i`.
    pub fn fs_d(n: usize) -> Self {
        let mut p = Poly::one();
        for i in 0..n {
            p = p.add(&Poly::z(i).mul(&Poly::zb(i)));
        }
        p
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

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &GaussRat)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Mono) -> GaussRat {
        self.terms.get(m).cloned().unwrap_or_else(GaussRat::zero)
    }

    pub fn add_term(&mut self, m: Mono, c: &GaussRat) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c.clone());
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn max_degree(&self) -> u16 {
        self.terms.keys().map(|m| m.deg).max().unwrap_or(0)
    }

    pub fn min_degree(&self) -> Option<u16> {
        self.terms.keys().map(|m| m.deg).min()
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let (mut big, small) = if self.len() >= o.len() { (self.clone(), o) } else { (o.clone(), self) };
        for (m, c) in &small.terms {
            big.add_term(*m, c);
        }
        big
    }

    pub fn add_assign(&mut self, o: &Poly) {
        for (m, c) in &o.terms {
            self.add_term(*m, c);
        }
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(*m, &-c);
        }
        out
    }

    pub fn neg(&self) -> Poly {
        Poly { terms: self.terms.iter().map(|(m, c)| (*m, -c)).collect() }
    }

    pub fn scale(&self, c: &GaussRat) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(m, v)| (*m, v * c)).collect() }
    }

    pub fn mul_mono(&self, m: &Mono, c: &GaussRat) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(k, v)| (k.mul(m), v * c)).collect() }
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        self.mul_truncated(o, None)
    }

    /// Product keeping only monomials of total degree `≤ max_deg`.
    pub fn mul_truncated(&self, o: &Poly, max_deg: Option<u16>) -> Poly {
        let mut out = Poly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                if let Some(d) = max_deg {
                    if m1.deg + m2.deg > d {
                        continue;
                    }
                }
                out.add_term(m1.mul(m2), &(c1 * c2));
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut out = Poly::one();
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    pub fn truncate(&self, max_deg: u16) -> Poly {
        Poly { terms: self.terms.iter().filter(|(m, _)| m.deg <= max_deg).map(|(m, c)| (*m, c.clone())).collect() }
    }

    /// Partial derivative in real-index coordinate `a` (see [`Mono::exp`]).
    pub fn deriv(&self, a: usize, n: usize) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let e = m.exp(a, n);
            if e > 0 {
                out.add_term(m.with_exp(a, n, e - 1), &c.scale_int(e as i64));
            }
        }
        out
    }

    /// Complex conjugate: swaps `z ↔ z̄` and conjugates coefficients (`π` is real).
    pub fn conj(&self) -> Poly {
        Poly { terms: self.terms.iter().map(|(m, c)| (m.conj(), c.conj())).collect() }
    }

    /// Evaluate at the point with holomorphic coordinates `z`; `z̄` is the conjugate.
    pub fn eval(&self, z: &[GaussRat]) -> Scalar {
        let zb: Vec<GaussRat> = z.iter().map(|v| v.conj()).collect();
        let mut out = Scalar::zero();
        for (m, c) in &self.terms {
            let mut v = c.clone();
            for (i, zi) in z.iter().enumerate() {
                for _ in 0..m.z[i] {
                    v = &v * zi;
                }
                for _ in 0..m.zb[i] {
                    v = &v * &zb[i];
                }
            }
            out.add_term(m.pi as i32, &v);
        }
        out
    }

    /// Coefficients as a `π`-Laurent polynomial when the `z, z̄` part is trivial.
    pub fn as_scalar(&self) -> Option<Scalar> {
        let mut s = Scalar::zero();
        for (m, c) in &self.terms {
            if m.deg != 0 {
                return None;
            }
            s.add_term(m.pi as i32, c);
        }
        Some(s)
    }

    /// Exact quotient by a monic divisor whose leading monomial is `lead`.
    /// Returns `None` when the division leaves a remainder.
    pub fn div_exact(&self, divisor: &Poly) -> Option<Poly> {
        let (lead, lc) = divisor.terms.iter().next_back()?;
        if !lc.is_one() {
            let inv = lc.inv()?;
            return self.scale(&inv).div_exact(&divisor.scale(&inv));
        }
        let mut rem = self.clone();
        let mut quot = Poly::zero();
        while let Some((m, c)) = rem.terms.iter().next_back().map(|(m, c)| (*m, c.clone())) {
            let q = m.div(lead)?;
            quot.add_term(q, &c);
            for (dm, dc) in &divisor.terms {
                rem.add_term(dm.mul(&q), &-(dc * &c));
            }
        }
        Some(quot)
    }

    /// Fast necessary-and-sufficient test for divisibility by `1 + z z̄` in one
    /// variable: the numerator must vanish on `z̄ = -1/z`.
    pub fn divisible_by_d1(&self) -> bool {
        let mut acc: BTreeMap<(i16, i16), GaussRat> = BTreeMap::new();
        for (m, c) in &self.terms {
            let key = (m.z[0] as i16 - m.zb[0] as i16, m.pi);
            let v = if m.zb[0] % 2 == 1 { -c } else { c.clone() };
            *acc.entry(key).or_insert_with(GaussRat::zero) += &v;
        }
        acc.values().all(|v| v.is_zero())
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", format_poly(self, MAX_DIM))
    }
}

fn var_name(base: &str, i: usize, n: usize) -> String {
    if n == 1 {
        base.to_string()
    } else {
        format!("{base}{}", i + 1)
    }
}

/// Render in the expression syntax accepted by the command-line parser.
pub fn format_poly(p: &Poly, n: usize) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let mut parts = Vec::new();
    for (m, c) in p.terms.iter().rev() {
        let mut factors = Vec::new();
        for i in 0..n.min(MAX_DIM) {
            for (base, e) in [("z", m.z[i]), ("zbar", m.zb[i])] {
                match e {
                    0 => {}
                    1 => factors.push(var_name(base, i, n)),
                    _ => factors.push(format!("{}^{e}", var_name(base, i, n))),
                }
            }
        }
        match m.pi {
            0 => {}
            1 => factors.push("pi".into()),
            e => factors.push(format!("pi^{e}")),
        }
        let coeff = format!("({c})");
        if factors.is_empty() {
            parts.push(coeff);
        } else if c.is_one() {
            parts.push(factors.join("*"));
        } else {
            parts.push(format!("{coeff}*{}", factors.join("*")));
        }
    }
    parts.join(" + ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn arb_poly() -> impl Strategy<Value = Poly> {
        prop::collection::vec((0u8..3, 0u8..3, -1i16..2, -5i64..6, -5i64..6), 0..6).prop_map(|ts| {
            let mut p = Poly::zero();
            for (a, b, pi, re, im) in ts {
                p.add_term(
                    Mono::new([a, 0, 0, 0], [b, 0, 0, 0], pi),
                    &GaussRat::complex((re, 1), (im, 2)),
                );
            }
            p
        })
    }

    #[test]
    fn derivative_and_conj() {
        let z = Poly::z(0);
        let zb = Poly::zb(0);
        let p = z.pow(3).mul(&zb);
        assert_eq!(p.deriv(0, 1), z.pow(2).mul(&zb).scale(&GaussRat::int(3)));
        assert_eq!(p.deriv(1, 1), z.pow(3));
        assert_eq!(p.conj(), zb.pow(3).mul(&z));
    }

    proptest! {
        #[test]
        fn division_by_d_roundtrips(p in arb_poly()) {
            let d = Poly::fs_d(1);
            let q = p.mul(&d);
            prop_assert_eq!(q.div_exact(&d), Some(p.clone()));
            prop_assert!(q.divisible_by_d1());
            if !p.is_zero() && p.div_exact(&d).is_none() {
                prop_assert!(!p.divisible_by_d1());
            }
        }

        #[test]
        fn product_rule(p in arb_poly(), q in arb_poly()) {
            let lhs = p.mul(&q).deriv(0, 1);
            let rhs = p.deriv(0, 1).mul(&q).add(&p.mul(&q.deriv(0, 1)));
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn two_dim_division() {
        let d = Poly::fs_d(2);
        let p = Poly::z(1).mul(&Poly::zb(0)).add(&Poly::one());
        assert_eq!(p.mul(&d).div_exact(&d), Some(p.clone()));
        assert!(p.div_exact(&d).is_none());
    }
}
