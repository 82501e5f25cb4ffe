//! Truncated Weyl algebra `W_{X,ℂ}` tensored with differential forms on a
//! chart: Wick product, symbol map, `δ`, `δ⁻¹`, the Levi-Civita connection,
//! contraction and Lie derivative along vector fields.
//!
//! Storage is bounded by the Fedosov weight `|y| = |ȳ| = 1`, `|ħ| = 2` (forms
//! weigh 0). At a fixed level `ħ = 1/k` there is no `ħ` generator and the
//! bound is the symmetric degree.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::chart::ChartFunction as CF;
use crate::geometry::{KahlerGeometry, VectorField};
use crate::poly::MAX_DIM;
use crate::scalar::{GaussRat, Scalar};

/// `ħ^h y^y ȳ^yb` times the form `dx^{form}`. Form bits `0..n` are `dz^i`,
/// bits `4..4+n` are `dz̄^j`; generators are ordered by bit index.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct WMono {
    pub h: u8,
    pub y: [u8; MAX_DIM],
    pub yb: [u8; MAX_DIM],
    pub form: u8,
}

pub const BAR: u8 = 4;

/// Bit of the real-index form generator `dx^a` (`a < n` holomorphic).
pub fn form_bit(a: usize, n: usize) -> u8 {
    if a < n {
        a as u8
    } else {
        BAR + (a - n) as u8
    }
}

/// Sign of `dx^{f1} ∧ dx^{f2}` relative to the sorted form, or `None` if they overlap.
pub fn wedge_sign(f1: u8, f2: u8) -> Option<i64> {
    if f1 & f2 != 0 {
        return None;
    }
    let mut swaps = 0;
    let mut rest = f2;
    while rest != 0 {
        let b = rest.trailing_zeros();
        rest &= rest - 1;
        swaps += (f1 >> (b + 1)).count_ones();
    }
    Some(if swaps % 2 == 0 { 1 } else { -1 })
}

impl WMono {
    pub fn one() -> Self {
        WMono::default()
    }

    pub fn sym_degree(&self) -> u32 {
        self.y.iter().chain(self.yb.iter()).map(|&e| e as u32).sum()
    }

    pub fn y_degree(&self) -> u32 {
        self.y.iter().map(|&e| e as u32).sum()
    }

    pub fn ybar_degree(&self) -> u32 {
        self.yb.iter().map(|&e| e as u32).sum()
    }

    pub fn form_degree(&self) -> u32 {
        self.form.count_ones()
    }

    pub fn fedosov_weight(&self) -> u32 {
        self.sym_degree() + 2 * self.h as u32
    }

    /// Weight with `|y| = 0`, `|ȳ| = |ħ| = 1`.
    pub fn quantizable_weight(&self) -> u32 {
        self.ybar_degree() + self.h as u32
    }

    pub fn holo_form_degree(&self) -> u32 {
        (self.form & 0x0f).count_ones()
    }

    pub fn anti_form_degree(&self) -> u32 {
        (self.form >> BAR).count_ones()
    }

    /// Exponent of the real-index symmetric generator `y^a` (`a ≥ n` is `ȳ^{a-n}`).
    pub fn sym_exp(&self, a: usize, n: usize) -> u8 {
        if a < n {
            self.y[a]
        } else {
            self.yb[a - n]
        }
    }

    fn with_sym_exp(mut self, a: usize, n: usize, e: u8) -> Self {
        if a < n {
            self.y[a] = e;
        } else {
            self.yb[a - n] = e;
        }
        self
    }

    fn format(&self, n: usize) -> String {
        let mut parts = Vec::new();
        if self.h > 0 {
            parts.push(if self.h == 1 { "hbar".to_string() } else { format!("hbar^{}", self.h) });
        }
        for (name, exps) in [("y", &self.y), ("ybar", &self.yb)] {
            for (i, &e) in exps.iter().enumerate().take(n) {
                match e {
                    0 => {}
                    1 => parts.push(format!("{name}{}", i + 1)),
                    _ => parts.push(format!("{name}{}^{e}", i + 1)),
                }
            }
        }
        for b in 0..8u8 {
            if self.form & (1 << b) != 0 {
                if b < BAR {
                    parts.push(format!("dz{}", b + 1));
                } else {
                    parts.push(format!("dzbar{}", b - BAR + 1));
                }
            }
        }
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join(" ")
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum HbarMode {
    Formal,
    /// `ħ = 1/k`.
    Level(u64),
}

/// Shared, immutable context: geometry, truncation order and `ħ` mode.
#[derive(Debug)]
pub struct WeylCtx {
    pub geom: Arc<KahlerGeometry>,
    pub order: u32,
    pub mode: HbarMode,
    /// `omega_up[i][j] = ω^{ij̄}`.
    omega_up: Vec<Vec<CF>>,
}

impl WeylCtx {
    pub fn new(geom: Arc<KahlerGeometry>, order: u32, mode: HbarMode) -> Arc<Self> {
        let n = geom.n();
        let omega_up = (0..n).map(|i| (0..n).map(|j| geom.omega_up(i, j)).collect()).collect();
        Arc::new(WeylCtx { geom, order, mode, omega_up })
    }

    pub fn formal(geom: Arc<KahlerGeometry>, order: u32) -> Arc<Self> {
        Self::new(geom, order, HbarMode::Formal)
    }

    pub fn n(&self) -> usize {
        self.geom.n()
    }

    pub fn with_order(&self, order: u32) -> Arc<Self> {
        Self::new(self.geom.clone(), order, self.mode)
    }

    pub fn with_mode(&self, mode: HbarMode) -> Arc<Self> {
        Self::new(self.geom.clone(), self.order, mode)
    }

    /// Storage weight of a monomial under this context.
    pub fn weight(&self, m: &WMono) -> u32 {
        match self.mode {
            HbarMode::Formal => m.fedosov_weight(),
            HbarMode::Level(_) => m.sym_degree(),
        }
    }

    fn same(&self, o: &WeylCtx) -> bool {
        Arc::ptr_eq(&self.geom, &o.geom) && self.order == o.order && self.mode == o.mode
    }
}

#[derive(Clone)]
pub struct WeylElement {
    ctx: Arc<WeylCtx>,
    terms: BTreeMap<WMono, CF>,
    jet_exhausted: bool,
}

impl PartialEq for WeylElement {
    fn eq(&self, o: &Self) -> bool {
        self.terms == o.terms
    }
}

impl fmt::Debug for WeylElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.debug_lines())
    }
}

fn factorial_ratio(a: u8, r: u8) -> i64 {
    // a! / (a − r)!
    ((a - r + 1)..=a).map(|x| x as i64).product()
}

fn factorial(m: u8) -> i64 {
    (1..=m as i64).product()
}

/// Contraction patterns between `a.y` and `b.yb`: `(matrix entries (i, j, count), total)`.
fn contractions(ay: &[u8; MAX_DIM], byb: &[u8; MAX_DIM], n: usize, max_total: u32) -> Vec<(Vec<(usize, usize, u8)>, u32)> {
    let mut out = Vec::new();
    let mut rows = *ay;
    let mut cols = *byb;
    let mut cur = Vec::new();
    fn rec(
        idx: usize,
        n: usize,
        rows: &mut [u8; MAX_DIM],
        cols: &mut [u8; MAX_DIM],
        cur: &mut Vec<(usize, usize, u8)>,
        total: u32,
        max_total: u32,
        out: &mut Vec<(Vec<(usize, usize, u8)>, u32)>,
    ) {
        if idx == n * n {
            out.push((cur.clone(), total));
            return;
        }
        let (i, j) = (idx / n, idx % n);
        let cap = rows[i].min(cols[j]).min((max_total - total) as u8);
        for c in 0..=cap {
            if c > 0 {
                cur.push((i, j, c));
            }
            rows[i] -= c;
            cols[j] -= c;
            rec(idx + 1, n, rows, cols, cur, total + c as u32, max_total, out);
            rows[i] += c;
            cols[j] += c;
            if c > 0 {
                cur.pop();
            }
        }
    }
    rec(0, n, &mut rows, &mut cols, &mut cur, 0, max_total, &mut out);
    out
}

impl WeylElement {
    pub fn zero(ctx: &Arc<WeylCtx>) -> Self {
        WeylElement { ctx: ctx.clone(), terms: BTreeMap::new(), jet_exhausted: false }
    }

    pub fn monomial(ctx: &Arc<WeylCtx>, m: WMono, c: CF) -> Self {
        let mut e = Self::zero(ctx);
        e.add_term(m, &c);
        e
    }

    pub fn function(ctx: &Arc<WeylCtx>, f: &CF) -> Self {
        Self::monomial(ctx, WMono::one(), f.clone())
    }

    /// `Σ_h ħ^h f_h` (formal mode) from coefficients indexed by `ħ` power.
    pub fn hbar_series(ctx: &Arc<WeylCtx>, fs: &[CF]) -> Self {
        let mut e = Self::zero(ctx);
        for (h, f) in fs.iter().enumerate() {
            e.add_hbar_term(WMono::one(), h as u8, f);
        }
        e
    }

    pub fn one(ctx: &Arc<WeylCtx>) -> Self {
        Self::function(ctx, &CF::one(ctx.geom.ctx))
    }

    pub fn y(ctx: &Arc<WeylCtx>, i: usize) -> Self {
        let mut m = WMono::one();
        m.y[i] = 1;
        Self::monomial(ctx, m, CF::one(ctx.geom.ctx))
    }

    pub fn ybar(ctx: &Arc<WeylCtx>, j: usize) -> Self {
        let mut m = WMono::one();
        m.yb[j] = 1;
        Self::monomial(ctx, m, CF::one(ctx.geom.ctx))
    }

    pub fn hbar(ctx: &Arc<WeylCtx>) -> Self {
        let mut e = Self::zero(ctx);
        e.add_hbar_term(WMono::one(), 1, &CF::one(ctx.geom.ctx));
        e
    }

    pub fn dz(ctx: &Arc<WeylCtx>, i: usize) -> Self {
        Self::monomial(ctx, WMono { form: 1 << i, ..WMono::one() }, CF::one(ctx.geom.ctx))
    }

    pub fn dzbar(ctx: &Arc<WeylCtx>, j: usize) -> Self {
        Self::monomial(ctx, WMono { form: 1 << (BAR as usize + j), ..WMono::one() }, CF::one(ctx.geom.ctx))
    }

    pub fn ctx(&self) -> &Arc<WeylCtx> {
        &self.ctx
    }

    pub fn geom(&self) -> &KahlerGeometry {
        &self.ctx.geom
    }

    pub fn terms(&self) -> impl Iterator<Item = (&WMono, &CF)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Every coefficient vanishes (jet zeros count as zero).
    pub fn is_zero(&self) -> bool {
        self.terms.values().all(|c| c.is_zero())
    }

    /// Monomials with a nonzero coefficient.
    fn support(&self) -> impl Iterator<Item = &WMono> {
        self.terms.iter().filter(|(_, c)| !c.is_zero()).map(|(m, _)| m)
    }

    pub fn coeff(&self, m: &WMono) -> CF {
        self.terms.get(m).cloned().unwrap_or_else(|| CF::zero(self.ctx.geom.ctx))
    }

    pub fn jet_exhausted(&self) -> bool {
        self.jet_exhausted
    }

    /// Add `c·m`, dropping terms beyond the truncation order.
    pub fn add_term(&mut self, m: WMono, c: &CF) {
        if c.jet_exhausted() {
            self.jet_exhausted = true;
        }
        if c.is_exact_zero() || self.ctx.weight(&m) > self.ctx.order {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c.clone());
            }
            Entry::Occupied(mut o) => {
                o.get_mut().add_assign(c);
                if o.get().is_exact_zero() {
                    o.remove();
                }
            }
        }
    }

    /// Add `ħ^h c·m`; at a fixed level `ħ^h` becomes the scalar `k^{-h}`.
    pub fn add_hbar_term(&mut self, mut m: WMono, h: u8, c: &CF) {
        match self.ctx.mode {
            HbarMode::Formal => {
                m.h += h;
                self.add_term(m, c);
            }
            HbarMode::Level(k) => {
                let s = GaussRat::frac(1, (k as i64).pow(h as u32));
                self.add_term(m, &c.scale(&s));
            }
        }
    }

    fn check_ctx(&self, o: &WeylElement) {
        assert!(self.ctx.same(&o.ctx), "Weyl elements from different contexts");
    }

    pub fn add(&self, o: &WeylElement) -> WeylElement {
        self.check_ctx(o);
        let mut out = self.clone();
        out.jet_exhausted |= o.jet_exhausted;
        for (m, c) in &o.terms {
            out.add_term(*m, c);
        }
        out
    }

    pub fn add_assign(&mut self, o: &WeylElement) {
        self.check_ctx(o);
        self.jet_exhausted |= o.jet_exhausted;
        for (m, c) in &o.terms {
            self.add_term(*m, c);
        }
    }

    pub fn sub(&self, o: &WeylElement) -> WeylElement {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> WeylElement {
        self.map_coeffs(|c| c.neg())
    }

    pub fn scale(&self, c: &GaussRat) -> WeylElement {
        self.map_coeffs(|x| x.scale(c))
    }

    pub fn mul_function(&self, f: &CF) -> WeylElement {
        self.map_coeffs(|x| x.mul(f))
    }

    pub fn mul_scalar(&self, s: &Scalar) -> WeylElement {
        let f = CF::constant(self.ctx.geom.ctx, s);
        self.mul_function(&f)
    }

    pub fn map_coeffs(&self, f: impl Fn(&CF) -> CF) -> WeylElement {
        let mut out = WeylElement::zero(&self.ctx);
        out.jet_exhausted = self.jet_exhausted;
        for (m, c) in &self.terms {
            out.add_term(*m, &f(c));
        }
        out
    }

    pub fn filter(&self, keep: impl Fn(&WMono) -> bool) -> WeylElement {
        let mut out = WeylElement::zero(&self.ctx);
        out.jet_exhausted = self.jet_exhausted;
        for (m, c) in &self.terms {
            if keep(m) {
                out.terms.insert(*m, c.clone());
            }
        }
        out
    }

    /// Re-home into another context (changing truncation order), truncating as needed.
    pub fn in_ctx(&self, ctx: &Arc<WeylCtx>) -> WeylElement {
        assert!(Arc::ptr_eq(&self.ctx.geom, &ctx.geom) && self.ctx.mode == ctx.mode);
        let mut out = WeylElement::zero(ctx);
        out.jet_exhausted = self.jet_exhausted;
        for (m, c) in &self.terms {
            out.add_term(*m, c);
        }
        out
    }

    /// Keep only terms of storage weight `≤ w`.
    pub fn truncate(&self, w: u32) -> WeylElement {
        let ctx = self.ctx.clone();
        self.filter(|m| ctx.weight(m) <= w)
    }

    pub fn max_ybar_degree(&self) -> u32 {
        self.support().map(|m| m.ybar_degree()).max().unwrap_or(0)
    }

    pub fn max_hbar_degree(&self) -> u32 {
        self.support().map(|m| m.h as u32).max().unwrap_or(0)
    }

    pub fn max_quantizable_weight(&self) -> u32 {
        self.support().map(|m| m.quantizable_weight()).max().unwrap_or(0)
    }

    /// Lowest storage weight carrying a nonzero term.
    pub fn min_weight(&self) -> Option<u32> {
        self.support().map(|m| self.ctx.weight(m)).min()
    }

    /// Only dz̄ form generators appear.
    pub fn is_type_01_forms(&self) -> bool {
        self.support().all(|m| m.form & 0x0f == 0)
    }

    /// The symbol: set `y = ȳ = 0` and drop form terms; indexed by `ħ` power.
    pub fn symbol(&self) -> Vec<CF> {
        let gctx = self.ctx.geom.ctx;
        let mut out: Vec<CF> = Vec::new();
        for (m, c) in &self.terms {
            if m.sym_degree() == 0 && m.form == 0 {
                let h = m.h as usize;
                while out.len() <= h {
                    out.push(CF::zero(gctx));
                }
                out[h].add_assign(c);
            }
        }
        while out.last().is_some_and(|c| c.is_zero()) {
            out.pop();
        }
        out
    }

    /// Core product loop. `min_m` skips contraction counts below it; when
    /// `over_hbar` is set the result is divided by `ħ` (so `min_m ≥ 1`).
    fn product_into(
        &self,
        ma: &WMono,
        ca: &CF,
        mb: &WMono,
        cb: &CF,
        min_m: u32,
        over_hbar: bool,
        sign: i64,
        out: &mut WeylElement,
    ) {
        let ctx = &self.ctx;
        let n = ctx.n();
        let Some(fsign) = wedge_sign(ma.form, mb.form) else {
            return;
        };
        let form = ma.form | mb.form;
        let base_h = ma.h as i32 + mb.h as i32 - over_hbar as i32;
        let base_sym = ma.sym_degree() + mb.sym_degree();
        let max_m = {
            let ry: u32 = ma.y.iter().map(|&e| e as u32).sum();
            let cy: u32 = mb.yb.iter().map(|&e| e as u32).sum();
            ry.min(cy)
        };
        if max_m < min_m {
            return;
        }
        // Formal weight is additive apart from the ħ⁻¹ shift.
        if let HbarMode::Formal = ctx.mode {
            let w = ma.fedosov_weight() + mb.fedosov_weight();
            if w as i64 - 2 * over_hbar as i64 > ctx.order as i64 {
                return;
            }
        } else if base_sym as i64 - 2 * min_m as i64 > ctx.order as i64 {
            return;
        }
        let mut cab: Option<CF> = None;
        for (pattern, m) in contractions(&ma.y, &mb.yb, n, max_m) {
            if m < min_m {
                continue;
            }
            let h = base_h + m as i32;
            if h < 0 {
                continue;
            }
            let mut res = WMono { h: 0, y: ma.y, yb: mb.yb, form };
            let mut coeff = GaussRat::int(sign * fsign);
            let mut factor: Option<CF> = None;
            let mut rows = [0u8; MAX_DIM];
            let mut cols = [0u8; MAX_DIM];
            for &(i, j, c) in &pattern {
                rows[i] += c;
                cols[j] += c;
                coeff = &coeff * &GaussRat::frac(1, factorial(c));
                let p = ctx.omega_up[i][j].pow(c as u32);
                factor = Some(match factor {
                    None => p,
                    Some(f) => f.mul(&p),
                });
            }
            for i in 0..n {
                coeff = coeff.scale_int(factorial_ratio(ma.y[i], rows[i]) * factorial_ratio(mb.yb[i], cols[i]));
                res.y[i] = ma.y[i] - rows[i] + mb.y[i];
                res.yb[i] = mb.yb[i] - cols[i] + ma.yb[i];
            }
            let cab = cab.get_or_insert_with(|| ca.mul(cb));
            let mut c = cab.scale(&coeff);
            if let Some(f) = factor {
                c = c.mul(&f);
            }
            match ctx.mode {
                HbarMode::Formal => {
                    res.h = h as u8;
                    out.add_term(res, &c);
                }
                HbarMode::Level(k) => {
                    // ħ^h ↦ k^{-h}; over_hbar already shifted h by −1.
                    let s = if h >= 0 { GaussRat::frac(1, (k as i64).pow(h as u32)) } else { GaussRat::int(k as i64) };
                    out.add_term(res, &c.scale(&s));
                }
            }
        }
    }

    /// Fiberwise Wick product `a ⋆ b` (graded by the form part).
    pub fn wick(&self, o: &WeylElement) -> WeylElement {
        self.check_ctx(o);
        let mut out = WeylElement::zero(&self.ctx);
        out.jet_exhausted = self.jet_exhausted || o.jet_exhausted;
        for (ma, ca) in &self.terms {
            for (mb, cb) in &o.terms {
                self.product_into(ma, ca, mb, cb, 0, false, 1, &mut out);
            }
        }
        out
    }

    /// Graded commutator `[a, b]_⋆ = a⋆b − (−1)^{|a||b|} b⋆a`.
    pub fn commutator(&self, o: &WeylElement) -> WeylElement {
        self.graded_commutator(o, false)
    }

    /// `(1/ħ)[a, b]_⋆`. The contraction-free parts cancel, so this is exact.
    pub fn commutator_over_hbar(&self, o: &WeylElement) -> WeylElement {
        self.graded_commutator(o, true)
    }

    fn graded_commutator(&self, o: &WeylElement, over_hbar: bool) -> WeylElement {
        self.check_ctx(o);
        let mut out = WeylElement::zero(&self.ctx);
        out.jet_exhausted = self.jet_exhausted || o.jet_exhausted;
        let min_m = if over_hbar { 1 } else { 0 };
        for (ma, ca) in &self.terms {
            for (mb, cb) in &o.terms {
                let odd = (ma.form_degree() * mb.form_degree()) % 2 == 1;
                self.product_into(ma, ca, mb, cb, min_m, over_hbar, 1, &mut out);
                self.product_into(mb, cb, ma, ca, min_m, over_hbar, if odd { 1 } else { -1 }, &mut out);
            }
        }
        out
    }

    /// `δ(c φ Y) = Σ_a dx^a ∧ φ ∂_{y^a} Y`.
    pub fn delta(&self) -> WeylElement {
        self.delta_part(true, true)
    }

    /// Restriction of `δ` to the `dz` (`holo`) and/or `dz̄` (`anti`) generators.
    pub fn delta_part(&self, holo: bool, anti: bool) -> WeylElement {
        let n = self.ctx.n();
        let mut out = WeylElement::zero(&self.ctx);
        out.jet_exhausted = self.jet_exhausted;
        for (m, c) in &self.terms {
            for a in 0..2 * n {
                if (a < n && !holo) || (a >= n && !anti) {
                    continue;
                }
                let e = m.sym_exp(a, n);
                if e == 0 {
                    continue;
                }
                let bit = form_bit(a, n);
                let Some(s) = wedge_sign(1 << bit, m.form) else { continue };
                let mut r = m.with_sym_exp(a, n, e - 1);
                r.form |= 1 << bit;
                out.add_term(r, &c.scale_int(s * e as i64));
            }
        }
        out
    }

    /// `δ⁻¹(c φ Y) = (1/(p+q)) Σ_a y^a ι_{∂_a} φ · Y`, zero when `p + q = 0`.
    pub fn delta_inv(&self) -> WeylElement {
        self.delta_inv_part(true, true)
    }

    /// Homotopy for `delta_part(holo, anti)`: only the selected generators are
    /// counted in `p + q`.
    pub fn delta_inv_part(&self, holo: bool, anti: bool) -> WeylElement {
        let n = self.ctx.n();
        let mut out = WeylElement::zero(&self.ctx);
        out.jet_exhausted = self.jet_exhausted;
        for (m, c) in &self.terms {
            let mut pq = 0u32;
            if holo {
                pq += m.y_degree() + m.holo_form_degree();
            }
            if anti {
                pq += m.ybar_degree() + m.anti_form_degree();
            }
            if pq == 0 {
                continue;
            }
            for a in 0..2 * n {
                if (a < n && !holo) || (a >= n && !anti) {
                    continue;
                }
                let bit = form_bit(a, n);
                if m.form & (1 << bit) == 0 {
                    continue;
                }
                let before = (m.form & ((1u8 << bit) - 1)).count_ones();
                let s = if before % 2 == 0 { 1 } else { -1 };
                let mut r = m.with_sym_exp(a, n, m.sym_exp(a, n) + 1);
                r.form &= !(1 << bit);
                out.add_term(r, &c.scale(&GaussRat::frac(s, pq as i64)));
            }
        }
        out
    }

    /// Levi-Civita connection: `∇(c φ Y) = Σ_a dx^a ∧ φ (∂_a c · Y + c ∇_a Y)`
    /// with `∇y^i = −Γ^i_{jk} dz^j y^k`, `∇ȳ^i = −Γ^{ī}_{j̄k̄} dz̄^j ȳ^k`.
    pub fn nabla(&self) -> WeylElement {
        self.nabla_part(true, true)
    }

    pub fn nabla_part(&self, holo: bool, anti: bool) -> WeylElement {
        let geom = &self.ctx.geom;
        let n = self.ctx.n();
        let mut out = WeylElement::zero(&self.ctx);
        out.jet_exhausted = self.jet_exhausted;
        for (m, c) in &self.terms {
            for a in 0..2 * n {
                if (a < n && !holo) || (a >= n && !anti) {
                    continue;
                }
                let bit = form_bit(a, n);
                let Some(s) = wedge_sign(1 << bit, m.form) else { continue };
                let mut base = *m;
                base.form |= 1 << bit;
                out.add_term(base, &c.deriv(a).scale_int(s));
                // Connection terms: y^i ↦ −Γ^i_{ak} y^k (holomorphic a), conjugate for ȳ.
                let holo_dir = a < n;
                let j = if holo_dir { a } else { a - n };
                for i in 0..n {
                    let e = if holo_dir { m.y[i] } else { m.yb[i] };
                    if e == 0 {
                        continue;
                    }
                    for k in 0..n {
                        let g = if holo_dir { geom.christoffel(i, j, k).clone() } else { geom.christoffel_bar(i, j, k) };
                        if g.is_exact_zero() {
                            continue;
                        }
                        let mut r = base;
                        if holo_dir {
                            r.y[i] -= 1;
                            r.y[k] += 1;
                        } else {
                            r.yb[i] -= 1;
                            r.yb[k] += 1;
                        }
                        out.add_term(r, &c.mul(&g).scale_int(-(s * e as i64)));
                    }
                }
            }
        }
        out
    }

    /// Contraction `ι_V` of the form part (left contraction).
    pub fn contract(&self, v: &VectorField) -> WeylElement {
        let n = self.ctx.n();
        let mut out = WeylElement::zero(&self.ctx);
        out.jet_exhausted = self.jet_exhausted;
        for (m, c) in &self.terms {
            for a in 0..2 * n {
                let bit = form_bit(a, n);
                if m.form & (1 << bit) == 0 {
                    continue;
                }
                let va = v.comp(a);
                if va.is_exact_zero() {
                    continue;
                }
                let before = (m.form & ((1u8 << bit) - 1)).count_ones();
                let s = if before % 2 == 0 { 1 } else { -1 };
                let mut r = *m;
                r.form &= !(1 << bit);
                out.add_term(r, &c.mul(va).scale_int(s));
            }
        }
        out
    }

    /// Lie derivative along `V`: on coefficients `V(c)`, and
    /// `L_V dx^a = ∂_b V^a dx^b`, `L_V y^a = ∂_b V^a y^b`.
    pub fn lie_derivative(&self, v: &VectorField) -> WeylElement {
        let n = self.ctx.n();
        let dv: Vec<Vec<CF>> = (0..2 * n).map(|a| (0..2 * n).map(|b| v.comp(a).deriv(b)).collect()).collect();
        let mut out = WeylElement::zero(&self.ctx);
        out.jet_exhausted = self.jet_exhausted;
        for (m, c) in &self.terms {
            out.add_term(*m, &v.apply(c));
            for a in 0..2 * n {
                let e = m.sym_exp(a, n);
                if e > 0 {
                    for b in 0..2 * n {
                        if dv[a][b].is_exact_zero() {
                            continue;
                        }
                        let r = m.with_sym_exp(a, n, e - 1);
                        let r = r.with_sym_exp(b, n, r.sym_exp(b, n) + 1);
                        out.add_term(r, &c.mul(&dv[a][b]).scale_int(e as i64));
                    }
                }
                let bit = form_bit(a, n);
                if m.form & (1 << bit) != 0 {
                    for b in 0..2 * n {
                        if dv[a][b].is_exact_zero() {
                            continue;
                        }
                        let nb = form_bit(b, n);
                        let rest = m.form & !(1 << bit);
                        if rest & (1 << nb) != 0 {
                            continue;
                        }
                        // Replace dx^a by dx^b in place.
                        let before_a = (m.form & ((1u8 << bit) - 1)).count_ones();
                        let before_b = (rest & ((1u8 << nb) - 1)).count_ones();
                        let s = if (before_a + before_b) % 2 == 0 { 1 } else { -1 };
                        let mut r = *m;
                        r.form = rest | (1 << nb);
                        out.add_term(r, &c.mul(&dv[a][b]).scale_int(s));
                    }
                }
            }
        }
        out
    }

    /// Substitute `ħ = 1/k` into a formal element.
    pub fn evaluate_level(&self, k: u64) -> WeylElement {
        assert_eq!(self.ctx.mode, HbarMode::Formal);
        let ctx = self.ctx.with_mode(HbarMode::Level(k));
        let mut out = WeylElement::zero(&ctx);
        out.jet_exhausted = self.jet_exhausted;
        for (m, c) in &self.terms {
            let mut r = *m;
            r.h = 0;
            out.add_hbar_term(r, m.h, c);
        }
        out
    }

    /// Sorted `monomial : coefficient` lines.
    pub fn debug_lines(&self) -> String {
        let n = self.ctx.n();
        let mut s = String::new();
        for (m, c) in &self.terms {
            s.push_str(&format!("{} : {}\n", m.format(n), c));
        }
        s
    }
}

/// The Weyl curvature `R` with `∇²a = (1/ħ)[R, a]`, read off from `∇²y^i = c^i_k y^k`
/// as `R = Σ c^i_k ω_{im̄} y^k ȳ^m`.
pub fn curvature_element(ctx: &Arc<WeylCtx>) -> WeylElement {
    let n = ctx.n();
    let geom = &ctx.geom;
    let mut r = WeylElement::zero(ctx);
    for i in 0..n {
        let nn = WeylElement::y(ctx, i).nabla().nabla();
        for (m, c) in nn.terms() {
            for mb in 0..n {
                let mut t = *m;
                t.yb[mb] += 1;
                r.add_term(t, &c.mul(geom.omega(i, mb)));
            }
        }
    }
    r
}
