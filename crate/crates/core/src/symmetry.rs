//! Quantum Hamiltonians and quantum moment maps for vector fields preserving
//! `J` and the Karabegov form.
//!
//! Quantum Hamiltonians are normalized so that `V(g) = (1/ħ)[μ_V, g]_⋆`; the
//! geometric moment map (`ι_Vω = dμ`) relates to them by the factor `2π/i`.

use std::sync::Arc;

use rayon::prelude::*;

use crate::chart::ChartFunction as CF;
use crate::error::{Error, Result};
use crate::fedosov::{flat_section, Alpha, FedosovConnection};
use crate::geometry::{KahlerGeometry, LieAlgebraAction, Matrix, VectorField};
use crate::quantizable::{degree1_formal, make_degree1, one_over_4pi, QuantizableFunction};
use crate::scalar::{GaussRat, Scalar};
use crate::weyl::{WMono, WeylCtx, WeylElement};

/// `2π/i`, the factor between geometric moment maps and quantum Hamiltonians.
pub fn two_pi_over_i() -> Scalar {
    Scalar::monomial(GaussRat::complex((0, 1), (-2, 1)), 1)
}

/// `L_V` preserves `J`, `ω` and every component of `α`.
pub fn is_star_derivation(geom: &KahlerGeometry, v: &VectorField, alpha: &Alpha) -> bool {
    let (omega_ok, j_ok) = geom.lie_compat(v);
    j_ok && omega_ok && alpha.components(geom).iter().all(|a| geom.lie_preserves_11(a, v))
}

#[derive(Clone, Debug)]
pub struct EtaSection {
    /// `η_{ij̄}`.
    pub components: Matrix,
    pub eta: WeylElement,
}

/// `∇_V a = ι_V ∇a` on form-degree-0 elements.
pub fn nabla_along(a: &WeylElement, v: &VectorField) -> WeylElement {
    a.nabla().contract(v)
}

/// Solve `(1/ħ)[η, y^k]_⋆ = (L_V − ∇_V) y^k` for `η = η_{ij̄} y^i ȳ^j`, then
/// verify the identity on every `y^k`, `ȳ^k`.
pub fn build_eta(ctx: &Arc<WeylCtx>, v: &VectorField) -> Result<EtaSection> {
    let geom = &ctx.geom;
    let n = geom.n();
    // (L_V − ∇_V) y^k = A^k_i y^i with A^k_i = ∂_i V^k + Γ^k_{ji} V^j, and
    // (1/ħ)[η, y^k] = −ω^{kj̄} η_{ij̄} y^i, so η_{im̄} = Σ_k ω_{km̄} A^k_i.
    let a = |k: usize, i: usize| -> CF {
        let mut s = v.v[k].dz(i);
        for j in 0..n {
            s.add_assign(&geom.christoffel(k, j, i).mul(&v.v[j]));
        }
        s
    };
    let mut components: Matrix = vec![vec![geom.zero(); n]; n];
    for i in 0..n {
        for k in 0..n {
            let aki = a(k, i);
            for m in 0..n {
                components[i][m].add_assign(&geom.omega(k, m).mul(&aki));
            }
        }
    }
    let mut eta = WeylElement::zero(ctx);
    for (i, row) in components.iter().enumerate() {
        for (j, c) in row.iter().enumerate() {
            let mut m = WMono::one();
            m.y[i] = 1;
            m.yb[j] = 1;
            eta.add_term(m, c);
        }
    }
    for k in 0..n {
        for g in [WeylElement::y(ctx, k), WeylElement::ybar(ctx, k)] {
            let lhs = eta.commutator_over_hbar(&g);
            let rhs = g.lie_derivative(v).sub(&nabla_along(&g, v));
            if lhs != rhs {
                return Err(Error::NotKilling("L_V − ∇_V is not inner by a (1,1) element".into()));
            }
        }
    }
    Ok(EtaSection { components, eta })
}

#[derive(Clone, Debug)]
pub struct QuantumHamiltonian {
    pub v: VectorField,
    /// `μ_V` by `ħ` power.
    pub mu_v: Vec<CF>,
    pub beta_v: WeylElement,
    pub eta: EtaSection,
}

impl QuantumHamiltonian {
    /// `μ_V + β_V`, the flat section representing `μ_V`.
    pub fn section(&self) -> WeylElement {
        WeylElement::hbar_series(self.beta_v.ctx(), &self.mu_v).add(&self.beta_v)
    }
}

/// `(2πħ/i) ι_V K = ι_V Ω` as a Weyl-valued 1-form.
pub fn iota_karabegov(conn: &FedosovConnection, v: &VectorField) -> WeylElement {
    conn.omega_form().contract(v)
}

pub fn quantum_hamiltonian(conn: &FedosovConnection, v: &VectorField) -> Result<QuantumHamiltonian> {
    let geom = &conn.geom;
    if !is_star_derivation(geom, v, &conn.alpha) {
        return Err(Error::NotKilling("vector field does not preserve J and the Karabegov form".into()));
    }
    let eta = build_eta(&conn.ctx, v)?;
    let beta_v = eta.eta.sub(&conn.gamma.contract(v));
    let target = iota_karabegov(conn, v);
    if conn.d(&beta_v).truncate(conn.order) != target.truncate(conn.order) {
        return Err(Error::Invalid("D_α(β_V) ≠ (2πħ/i) ι_V K".into()));
    }
    // dμ_V = −ι_V Ω, one ħ power at a time.
    let n = geom.n();
    let max_h = target.max_hbar_degree() as usize;
    let mut mu_v = Vec::new();
    for h in 0..=max_h {
        let form: Vec<CF> = (0..2 * n)
            .map(|a| {
                let bit = crate::weyl::form_bit(a, n);
                target.coeff(&WMono { h: h as u8, form: 1 << bit, ..WMono::one() }).neg()
            })
            .collect();
        let f = geom
            .antiderivative(&form)
            .map_err(|e| Error::Obstruction(format!("ħ^{h} component of ι_V K: {e}")))?;
        mu_v.push(f);
    }
    while mu_v.last().is_some_and(|c| c.is_zero()) {
        mu_v.pop();
    }
    let q = QuantumHamiltonian { v: v.clone(), mu_v, beta_v, eta };
    if !conn.d(&q.section()).truncate(conn.order).is_zero() {
        return Err(Error::Invalid("D_α(μ_V + β_V) ≠ 0".into()));
    }
    Ok(q)
}

/// `(1/ħ)[μ_V + β_V, O_g]_⋆ − O_{V(g)}` at weights `≤ N`.
pub fn bracket_defect(conn: &FedosovConnection, q: &QuantumHamiltonian, g: &CF) -> Result<WeylElement> {
    let og = flat_section(conn, &[g.clone()])?;
    let ovg = flat_section(conn, &[q.v.apply(g)])?;
    Ok(q.section().commutator_over_hbar(&og.of).sub(&ovg.of).truncate(conn.order))
}

#[derive(Clone, Debug)]
pub struct QuantumMomentMap {
    pub action: LieAlgebraAction,
    /// `μ_ħ(ξ_a) = μ_a − (ħ/4π)Δμ_a` by `ħ` power.
    pub mu_hbar: Vec<Vec<CF>>,
    pub sections: Vec<QuantizableFunction>,
    /// `(1/ħ)[μ̂_a, μ̂_b]_⋆ − μ̂([ξ_a, ξ_b])` for `a < b`, with `μ̂ = (2π/i)μ_ħ`, by `ħ` power.
    pub defects: Vec<((usize, usize), Vec<CF>)>,
    /// Highest `ħ` power at which the defects are exact.
    pub hbar_order: u32,
}

impl QuantumMomentMap {
    /// `μ_k(ξ_a) = μ_a − (1/4πk)Δμ_a`.
    pub fn mu_k(&self, a: usize, k: u64) -> CF {
        let m = &self.mu_hbar[a];
        m[0].add(&m[1].scale(&GaussRat::frac(1, k as i64)))
    }

    pub fn is_homomorphism(&self) -> bool {
        self.defects.iter().all(|(_, d)| d.iter().all(|c| c.is_zero()))
    }
}

pub fn quantum_moment_map(conn: &FedosovConnection, action: &LieAlgebraAction) -> Result<QuantumMomentMap> {
    if conn.alpha != Alpha::Ricci {
        return Err(Error::Invalid("quantum moment maps are built for alpha = Ric_X".into()));
    }
    let geom = &conn.geom;
    for v in &action.fields {
        if !is_star_derivation(geom, v, &conn.alpha) {
            return Err(Error::NotKilling("action field is not a star derivation".into()));
        }
    }
    let zero = Scalar::zero();
    let sections: Vec<QuantizableFunction> = action
        .moment
        .par_iter()
        .map(|m| make_degree1(conn, m, &zero, false))
        .collect::<Result<_>>()?;
    let mu_hbar: Vec<Vec<CF>> = action.moment.iter().map(|m| degree1_formal(geom, m, &zero)).collect();
    let norm = two_pi_over_i();
    let hbar_order = conn.order / 2;
    let keep = hbar_order as usize + 1;
    let pairs: Vec<(usize, usize)> =
        (0..action.dim()).flat_map(|a| ((a + 1)..action.dim()).map(move |b| (a, b))).collect();
    let defects: Vec<((usize, usize), Vec<CF>)> = pairs
        .par_iter()
        .map(|&(a, b)| {
            let oa = sections[a].section.of.mul_scalar(&norm);
            let ob = sections[b].section.of.mul_scalar(&norm);
            let mut lhs = oa.commutator_over_hbar(&ob).symbol();
            let coords = action.bracket_coords(a, b);
            let mut rhs = vec![geom.zero(); 2];
            for (d, c) in coords.iter().enumerate() {
                for (h, f) in mu_hbar[d].iter().enumerate() {
                    rhs[h].add_assign(&f.mul_scalar(&norm).scale(c));
                }
            }
            lhs.resize(keep.max(lhs.len()), geom.zero());
            let d: Vec<CF> = (0..keep)
                .map(|h| lhs[h].sub(rhs.get(h).unwrap_or(&geom.zero())))
                .collect();
            ((a, b), d)
        })
        .collect();
    let out = QuantumMomentMap { action: action.clone(), mu_hbar, sections, defects, hbar_order };
    if !out.is_homomorphism() {
        let msg = out
            .defects
            .iter()
            .filter(|(_, d)| d.iter().any(|c| !c.is_zero()))
            .map(|((a, b), d)| format!("[{a},{b}]: {}", d.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(", ")))
            .collect::<Vec<_>>()
            .join("; ");
        return Err(Error::HomomorphismDefect(msg));
    }
    Ok(out)
}

/// `μ_ħ(ξ) = μ(ξ) − (ħ/4π)Δμ(ξ)` for a single function.
pub fn canonical_quantum_hamiltonian(geom: &KahlerGeometry, mu: &CF) -> Vec<CF> {
    vec![mu.clone(), geom.laplacian(mu).mul_scalar(&one_over_4pi()).neg()]
}
