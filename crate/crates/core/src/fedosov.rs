//! Wick-type Fedosov connections `D_α = ∇ − δ + (1/ħ)[I_α, −]_⋆`, their flat
//! sections and the induced star product.
//!
//! Forms are written in the normalization `(2π/i)β = Σ b_{ij̄} dz^i ∧ dz̄^j`,
//! so `ω ↦ ω_{ij̄}` and `Ric_X ↦ Ric_{ij̄}`. The connection solves
//!
//! `∇γ + (1/ħ)γ⋆γ + R_∇ = Ω`,  `Ω = −ω_{ij̄} dz^i∧dz̄^j + Σ_s ħ^{s+1} a^{(s)}_{ij̄} dz^i∧dz̄^j`
//!
//! with `γ = −θ + I`, `θ = ω_{ij̄}(dz^i ȳ^j − dz̄^j y^i)` and `I` of type (0,1).
//! `Ω` is `ħ` times the Karabegov form `K = −(1/ħ)ω + α`.

use std::sync::Arc;

use crate::chart::ChartFunction as CF;
use crate::error::{Error, Result};
use crate::geometry::{KahlerGeometry, Matrix};
use crate::weyl::{curvature_element, WMono, WeylCtx, WeylElement, BAR};

/// The closed (1,1)-form `α = Σ_s ħ^s α^{(s)}`, by components `a^{(s)}_{ij̄}`.
#[derive(Clone, Debug, PartialEq)]
pub enum Alpha {
    Zero,
    Ricci,
    Custom(Vec<Matrix>),
}

impl Alpha {
    pub fn components(&self, geom: &KahlerGeometry) -> Vec<Matrix> {
        match self {
            Alpha::Zero => Vec::new(),
            Alpha::Ricci => vec![geom.ricci_form_matrix()],
            Alpha::Custom(v) => v.clone(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Alpha::Zero => "zero",
            Alpha::Ricci => "ricci",
            Alpha::Custom(_) => "custom",
        }
    }
}

/// `dz^i ∧ dz̄^j` as a form bit pattern.
fn dzdzb(i: usize, j: usize) -> u8 {
    (1 << i) | (1 << (BAR as usize + j))
}

/// `Σ c_{ij̄} dz^i ∧ dz̄^j` times `ħ^h`.
fn two_form(ctx: &Arc<WeylCtx>, c: &Matrix, h: u8) -> WeylElement {
    let n = ctx.n();
    let mut e = WeylElement::zero(ctx);
    for i in 0..n {
        for j in 0..n {
            e.add_hbar_term(WMono { form: dzdzb(i, j), ..WMono::one() }, h, &c[i][j]);
        }
    }
    e
}

/// `θ = ω_{ij̄}(dz^i ȳ^j − dz̄^j y^i)`, so that `δ = (1/ħ)[θ, −]_⋆`.
pub fn theta(ctx: &Arc<WeylCtx>) -> WeylElement {
    let n = ctx.n();
    let g = ctx.geom.clone();
    let mut e = WeylElement::zero(ctx);
    for i in 0..n {
        for j in 0..n {
            let w = g.omega(i, j);
            let mut a = WMono { form: 1 << i, ..WMono::one() };
            a.yb[j] = 1;
            e.add_term(a, w);
            let mut b = WMono { form: 1 << (BAR as usize + j), ..WMono::one() };
            b.y[i] = 1;
            e.add_term(b, &w.neg());
        }
    }
    e
}

pub struct FedosovConnection {
    pub geom: Arc<KahlerGeometry>,
    pub alpha: Alpha,
    /// Weight bound `N` up to which every identity is certified.
    pub order: u32,
    /// Working context at order `N + 1`.
    pub ctx: Arc<WeylCtx>,
    pub gamma: WeylElement,
    pub i_alpha: WeylElement,
    /// `K` by `ħ` power starting at `ħ^{-1}`: `[−ω, a^{(0)}, a^{(1)}, ...]`.
    pub karabegov: Vec<Matrix>,
    pub residual: WeylElement,
    curvature: WeylElement,
}

impl FedosovConnection {
    pub fn n(&self) -> usize {
        self.geom.n()
    }

    /// `Ω = ħ K` as a Weyl-valued 2-form.
    pub fn omega_form(&self) -> WeylElement {
        omega_form(&self.ctx, &self.karabegov)
    }

    /// `D_α a = ∇a − δa + (1/ħ)[I_α, a]_⋆`.
    pub fn d(&self, a: &WeylElement) -> WeylElement {
        a.nabla().sub(&a.delta()).add(&self.i_alpha.commutator_over_hbar(a))
    }

    pub fn curvature(&self) -> &WeylElement {
        &self.curvature
    }

    /// Lift into the working context.
    pub fn lift(&self, a: &WeylElement) -> WeylElement {
        a.in_ctx(&self.ctx)
    }
}

fn omega_form(ctx: &Arc<WeylCtx>, k: &[Matrix]) -> WeylElement {
    let mut e = WeylElement::zero(ctx);
    for (s, m) in k.iter().enumerate() {
        e.add_assign(&two_form(ctx, m, s as u8));
    }
    e
}

/// `∇γ + (1/ħ)γ⋆γ + R_∇ − Ω`; for a 1-form `γ⋆γ = ½[γ, γ]_⋆`.
pub fn residual_of(gamma: &WeylElement, curvature: &WeylElement, omega: &WeylElement) -> WeylElement {
    let half = crate::scalar::GaussRat::frac(1, 2);
    gamma
        .nabla()
        .add(&gamma.commutator_over_hbar(gamma).scale(&half))
        .add(curvature)
        .sub(omega)
}

pub fn solve_fedosov(geom: Arc<KahlerGeometry>, alpha: Alpha, order: u32) -> Result<FedosovConnection> {
    if order < 3 {
        return Err(Error::OrderTooSmall(order));
    }
    let n = geom.n();
    let ctx = WeylCtx::formal(geom.clone(), order + 1);
    let a = alpha.components(&geom);
    for m in &a {
        if m.len() != n || m.iter().any(|r| r.len() != n) {
            return Err(Error::Mismatch("alpha component shape".into()));
        }
    }
    let omega: Matrix = (0..n).map(|i| (0..n).map(|j| geom.omega(i, j).neg()).collect()).collect();
    let mut karabegov = vec![omega];
    karabegov.extend(a.iter().cloned());
    let curvature = curvature_element(&ctx);
    // (1,1) part of the equation: δ^{1,0} I = ∇^{1,0} I + R − Σ ħ^{s+1} a^{(s)}.
    let mut source = curvature.clone();
    for (s, m) in a.iter().enumerate() {
        source = source.sub(&two_form(&ctx, m, s as u8 + 1));
    }
    let mut i_alpha = WeylElement::zero(&ctx);
    for _ in 0..=order + 1 {
        let rhs = i_alpha.nabla_part(true, false).add(&source);
        let next = rhs.delta_inv_part(true, false);
        if next == i_alpha {
            break;
        }
        i_alpha = next;
    }
    if i_alpha.jet_exhausted() {
        return Err(Error::JetExhausted("Fedosov recursion exceeded jet accuracy".into()));
    }
    let gamma = theta(&ctx).neg().add(&i_alpha);
    let residual = residual_of(&gamma, &curvature, &omega_form(&ctx, &karabegov)).truncate(order);
    if let Some(w) = residual.min_weight() {
        let weight = residual.terms().filter(|(m, _)| m.form == (m.form & 0xf0)).map(|(m, _)| m.fedosov_weight()).min();
        return Err(Error::TypeViolation { weight: weight.unwrap_or(w) });
    }
    Ok(FedosovConnection { geom, alpha, order, ctx, gamma, i_alpha, karabegov, residual, curvature })
}

/// Recompute the defect of the Fedosov equation (weights `≤ N`).
pub fn fedosov_residual(conn: &FedosovConnection) -> WeylElement {
    residual_of(&conn.gamma, &conn.curvature, &conn.omega_form()).truncate(conn.order)
}

#[derive(Clone, Debug)]
pub struct FlatSection {
    pub of: WeylElement,
    pub symbol_f: Vec<CF>,
    /// Highest weight at which `D_α O_f` was verified to vanish.
    pub residual_weight: u32,
}

impl FlatSection {
    pub fn ybar_degree(&self) -> u32 {
        self.of.max_ybar_degree()
    }

    pub fn hbar_degree(&self) -> u32 {
        self.of.max_hbar_degree()
    }
}

/// `O_f = f + δ⁻¹(∇O_f + (1/ħ)[I_α, O_f]_⋆)` by fixed-point iteration.
pub fn flat_section(conn: &FedosovConnection, f: &[CF]) -> Result<FlatSection> {
    let ctx = &conn.ctx;
    let base = WeylElement::hbar_series(ctx, f);
    let mut o = base.clone();
    let mut converged = false;
    for _ in 0..=conn.order + 2 {
        let next = base.add(&o.nabla().add(&conn.i_alpha.commutator_over_hbar(&o)).delta_inv());
        if next == o {
            converged = true;
            break;
        }
        o = next;
    }
    assert!(converged, "flat section iteration raises the weight each pass");
    if o.jet_exhausted() {
        return Err(Error::JetExhausted("flat section exceeded jet accuracy".into()));
    }
    let defect = conn.d(&o).truncate(conn.order);
    if !defect.is_zero() {
        return Err(Error::TypeViolation { weight: defect.min_weight().unwrap_or(0) });
    }
    let symbol_f = o.symbol();
    Ok(FlatSection { of: o, symbol_f, residual_weight: conn.order })
}

/// `C_i(f, g)` for `i = 0..=⌊N/2⌋`.
#[derive(Clone, Debug, PartialEq)]
pub struct StarExpansion {
    pub coeffs: Vec<CF>,
}

impl StarExpansion {
    pub fn c(&self, i: usize) -> CF {
        self.coeffs.get(i).cloned().unwrap_or_else(|| CF::zero(self.coeffs[0].ctx()))
    }
}

/// `f ⋆ g = symbol(O_f ⋆ O_g)`, valid through `ħ^{⌊N/2⌋}`.
pub fn star_product(conn: &FedosovConnection, f: &[CF], g: &[CF]) -> Result<StarExpansion> {
    let of = flat_section(conn, f)?;
    let og = flat_section(conn, g)?;
    Ok(star_of_sections(conn, &of.of, &og.of))
}

pub fn star_of_sections(conn: &FedosovConnection, a: &WeylElement, b: &WeylElement) -> StarExpansion {
    let prod = a.wick(b);
    let mut coeffs = prod.symbol();
    let len = (conn.order / 2 + 1) as usize;
    let gctx = conn.geom.ctx;
    coeffs.resize(len, CF::zero(gctx));
    StarExpansion { coeffs }
}
