//! The coefficient ring: `N(z, z̄) / D^m` with `D` fixed by the chart, or a
//! truncated Taylor jet at the origin.

use std::fmt;

use crate::poly::{format_poly, Mono, Poly};
use crate::scalar::{GaussRat, Scalar};

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Denominator {
    /// `D = 1`.
    One,
    /// `D = 1 + Σ z^i z̄^i`.
    Fs,
}

/// Shape shared by all coefficients of one geometry.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct RingCtx {
    pub n: usize,
    pub denom: Denominator,
}

impl RingCtx {
    pub fn flat(n: usize) -> Self {
        RingCtx { n, denom: Denominator::One }
    }

    pub fn fs(n: usize) -> Self {
        RingCtx { n, denom: Denominator::Fs }
    }

    pub fn d_poly(&self) -> Poly {
        match self.denom {
            Denominator::One => Poly::one(),
            Denominator::Fs => Poly::fs_d(self.n),
        }
    }
}

/// Exact function on a chart. Invariant: for `Fs`, either `dpow == 0` or the
/// numerator is not divisible by `D`; for jets, no stored monomial exceeds the
/// validity order.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct ChartFunction {
    num: Poly,
    dpow: u32,
    ctx: RingCtx,
    jet: Option<i32>,
}

impl ChartFunction {
    pub fn zero(ctx: RingCtx) -> Self {
        ChartFunction { num: Poly::zero(), dpow: 0, ctx, jet: None }
    }

    pub fn one(ctx: RingCtx) -> Self {
        Self::from_poly(ctx, Poly::one())
    }

    pub fn from_poly(ctx: RingCtx, num: Poly) -> Self {
        ChartFunction { num, dpow: 0, ctx, jet: None }
    }

    /// `num / D^dpow`, canonicalized.
    pub fn new(ctx: RingCtx, num: Poly, dpow: u32) -> Self {
        let mut f = ChartFunction { num, dpow, ctx, jet: None };
        if ctx.denom == Denominator::One {
            f.dpow = 0;
        }
        f.canonicalize();
        f
    }

    /// Truncated Taylor polynomial, exact through total degree `order`.
    pub fn jet(ctx: RingCtx, num: Poly, order: i32) -> Self {
        let mut f = ChartFunction { num, dpow: 0, ctx, jet: Some(order) };
        f.apply_jet();
        f
    }

    pub fn constant(ctx: RingCtx, c: &Scalar) -> Self {
        Self::from_poly(ctx, Poly::from_scalar(c))
    }

    pub fn gauss(ctx: RingCtx, c: GaussRat) -> Self {
        Self::from_poly(ctx, Poly::constant(c))
    }

    pub fn int(ctx: RingCtx, k: i64) -> Self {
        Self::gauss(ctx, GaussRat::int(k))
    }

    /// `D^{-m}`.
    pub fn d_inv_pow(ctx: RingCtx, m: u32) -> Self {
        Self::new(ctx, Poly::one(), m)
    }

    pub fn z(ctx: RingCtx, i: usize) -> Self {
        Self::from_poly(ctx, Poly::z(i))
    }

    pub fn zb(ctx: RingCtx, i: usize) -> Self {
        Self::from_poly(ctx, Poly::zb(i))
    }

    pub fn ctx(&self) -> RingCtx {
        self.ctx
    }

    pub fn numerator(&self) -> &Poly {
        &self.num
    }

    pub fn denom_power(&self) -> u32 {
        self.dpow
    }

    pub fn jet_order(&self) -> Option<i32> {
        self.jet
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// Zero with no accuracy bound attached. A jet zero `0 + O(|z|^m)` is not
    /// exact: dropping it would lose the bound.
    pub fn is_exact_zero(&self) -> bool {
        self.num.is_zero() && self.jet.is_none()
    }

    /// True when the jet validity has been used up by differentiation.
    pub fn jet_exhausted(&self) -> bool {
        matches!(self.jet, Some(v) if v < 0)
    }

    fn apply_jet(&mut self) {
        if let Some(v) = self.jet {
            if v < 0 {
                self.num = Poly::zero();
            } else if self.num.max_degree() > v as u16 {
                self.num = self.num.truncate(v as u16);
            }
        }
    }

    fn canonicalize(&mut self) {
        if self.ctx.denom == Denominator::One || self.dpow == 0 {
            return;
        }
        if self.num.is_zero() {
            self.dpow = 0;
            return;
        }
        let d = self.ctx.d_poly();
        while self.dpow > 0 {
            if self.ctx.n == 1 && !self.num.divisible_by_d1() {
                break;
            }
            match self.num.div_exact(&d) {
                Some(q) => {
                    self.num = q;
                    self.dpow -= 1;
                }
                None => break,
            }
        }
    }

    fn join_jet(a: Option<i32>, b: Option<i32>) -> Option<i32> {
        match (a, b) {
            (Some(x), Some(y)) => Some(x.min(y)),
            (x, None) => x,
            (None, y) => y,
        }
    }

    fn raised_num(&self, to: u32) -> Poly {
        if to == self.dpow {
            self.num.clone()
        } else {
            self.num.mul(&self.ctx.d_poly().pow(to - self.dpow))
        }
    }

    pub fn add(&self, o: &ChartFunction) -> ChartFunction {
        debug_assert_eq!(self.ctx, o.ctx);
        if o.is_zero() && o.jet.is_none() {
            return self.clone();
        }
        if self.is_zero() && self.jet.is_none() {
            return o.clone();
        }
        let m = self.dpow.max(o.dpow);
        let mut num = self.raised_num(m);
        num.add_assign(&o.raised_num(m));
        let mut f = ChartFunction { num, dpow: m, ctx: self.ctx, jet: Self::join_jet(self.jet, o.jet) };
        f.canonicalize();
        f.apply_jet();
        f
    }

    pub fn add_assign(&mut self, o: &ChartFunction) {
        if self.dpow == o.dpow && self.jet.is_none() && o.jet.is_none() {
            self.num.add_assign(&o.num);
            self.canonicalize();
        } else {
            *self = self.add(o);
        }
    }

    pub fn sub(&self, o: &ChartFunction) -> ChartFunction {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> ChartFunction {
        ChartFunction { num: self.num.neg(), ..self.clone() }
    }

    pub fn mul(&self, o: &ChartFunction) -> ChartFunction {
        debug_assert_eq!(self.ctx, o.ctx);
        let jet = Self::join_jet(self.jet, o.jet);
        let num = match jet {
            Some(v) if v >= 0 => self.num.mul_truncated(&o.num, Some(v as u16)),
            Some(_) => Poly::zero(),
            None => self.num.mul(&o.num),
        };
        let dpow = if num.is_zero() { 0 } else { self.dpow + o.dpow };
        let mut f = ChartFunction { num, dpow, ctx: self.ctx, jet };
        // D is irreducible, so only a polynomial factor (which may contain D)
        // can break canonical form.
        let poly_factor = |g: &ChartFunction| g.dpow == 0 && g.num.max_degree() >= 2;
        if dpow > 0 && (poly_factor(self) || poly_factor(o)) {
            f.canonicalize();
        }
        f
    }

    pub fn scale(&self, c: &GaussRat) -> ChartFunction {
        let num = self.num.scale(c);
        let dpow = if num.is_zero() { 0 } else { self.dpow };
        ChartFunction { num, dpow, ..self.clone() }
    }

    pub fn scale_int(&self, k: i64) -> ChartFunction {
        self.scale(&GaussRat::int(k))
    }

    pub fn mul_scalar(&self, s: &Scalar) -> ChartFunction {
        self.mul(&ChartFunction::constant(self.ctx, s))
    }

    /// Multiply by `π^e`.
    pub fn mul_pi(&self, e: i16) -> ChartFunction {
        ChartFunction { num: self.num.mul_mono(&Mono::pi(e), &GaussRat::one()), ..self.clone() }
    }

    pub fn pow(&self, e: u32) -> ChartFunction {
        let mut out = ChartFunction::one(self.ctx);
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    /// `∂/∂x^a` in the real-index convention: `a < n` is `z^a`, `a ≥ n` is `z̄^{a-n}`.
    pub fn deriv(&self, a: usize) -> ChartFunction {
        let n = self.ctx.n;
        let jet = self.jet.map(|v| v - 1);
        if self.dpow == 0 {
            let mut f = ChartFunction { num: self.num.deriv(a, n), dpow: 0, ctx: self.ctx, jet };
            f.apply_jet();
            return f;
        }
        // ∂(N/D^m) = (∂N·D − m·N·∂D) / D^{m+1}; stays canonical since D ∤ N·∂D.
        let d = self.ctx.d_poly();
        let m = self.dpow as i64;
        let num = self.num.deriv(a, n).mul(&d).sub(&self.num.mul(&d.deriv(a, n)).scale(&GaussRat::int(m)));
        let mut f = ChartFunction { num, dpow: self.dpow + 1, ctx: self.ctx, jet };
        f.canonicalize();
        f
    }

    pub fn dz(&self, i: usize) -> ChartFunction {
        self.deriv(i)
    }

    pub fn dzb(&self, i: usize) -> ChartFunction {
        self.deriv(i + self.ctx.n)
    }

    pub fn conj(&self) -> ChartFunction {
        ChartFunction { num: self.num.conj(), ..self.clone() }
    }

    pub fn is_real(&self) -> bool {
        *self == self.conj()
    }

    /// Value at a point; `None` on the polar locus of `D`.
    pub fn eval(&self, z: &[GaussRat]) -> Option<Scalar> {
        let num = self.num.eval(z);
        if self.dpow == 0 {
            return Some(num);
        }
        let d = self.ctx.d_poly().eval(z).as_gauss()?;
        let mut dm = GaussRat::one();
        for _ in 0..self.dpow {
            dm = &dm * &d;
        }
        let inv = dm.inv()?;
        Some(num.scale(&inv))
    }

    /// The constant value when the function does not depend on `z, z̄`.
    pub fn as_scalar(&self) -> Option<Scalar> {
        if self.dpow != 0 {
            return None;
        }
        self.num.as_scalar()
    }

    /// Holomorphic: all `∂/∂z̄` derivatives vanish.
    pub fn is_holomorphic(&self) -> bool {
        (0..self.ctx.n).all(|j| self.dzb(j).is_zero())
    }

    pub fn is_antiholomorphic(&self) -> bool {
        (0..self.ctx.n).all(|i| self.dz(i).is_zero())
    }

    /// Canonical text form, parseable by the command-line expression grammar.
    pub fn to_expr(&self) -> String {
        let num = format_poly(&self.num, self.ctx.n);
        match self.dpow {
            0 => num,
            m => format!("({num})*D^-{m}"),
        }
    }
}

impl fmt::Display for ChartFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_expr())?;
        if let Some(v) = self.jet {
            write!(f, " + O(|z|^{})", v + 1)?;
        }
        Ok(())
    }
}
