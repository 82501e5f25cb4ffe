//! Exact antiderivatives of closed 1-forms inside the coefficient ring.
//!
//! The ansatz `F = P / D^M` with `M = max(m_a) − 1` and an unknown polynomial
//! `P` turns `dF = form` into a linear system over `ℚ(i)`, one block per power
//! of `π` (since `D` does not involve `π`).

use std::collections::{BTreeMap, BTreeSet};

use crate::chart::{ChartFunction as CF, Denominator, RingCtx};
use crate::error::{Error, Result};
use crate::poly::{Mono, Poly, MAX_DIM};
use crate::scalar::{solve_linear, GaussRat};

/// All monomials in the `2n` coordinates of total degree `≤ max_deg`, with `π^pi`.
pub(crate) fn monomials(n: usize, max_deg: u16, pi: i16) -> Vec<Mono> {
    let mut out = Vec::new();
    let mut exps = vec![0u8; 2 * n];
    fn rec(a: usize, left: u16, exps: &mut Vec<u8>, n: usize, pi: i16, out: &mut Vec<Mono>) {
        if a == 2 * n {
            let mut z = [0u8; MAX_DIM];
            let mut zb = [0u8; MAX_DIM];
            z[..n].copy_from_slice(&exps[..n]);
            zb[..n].copy_from_slice(&exps[n..]);
            out.push(Mono::new(z, zb, pi));
            return;
        }
        for e in 0..=left {
            exps[a] = e as u8;
            rec(a + 1, left - e, exps, n, pi, out);
        }
        exps[a] = 0;
    }
    rec(0, max_deg, &mut exps, n, pi, &mut out);
    out
}

/// `F` with `dF = form` (real-index components), normalized by `F(0) = 0`.
pub fn antiderivative(ctx: RingCtx, form: &[CF]) -> Result<CF> {
    assert_eq!(form.len(), 2 * ctx.n);
    let full: Vec<Option<CF>> = form.iter().cloned().map(Some).collect();
    solve(ctx, &full)
}

/// Some `F` with `∂̄F = Σ b_j dz̄^j`, normalized by `F(0) = 0`. `F` is unique up to
/// a holomorphic function; free coefficients are set to zero.
pub fn dbar_antiderivative(ctx: RingCtx, b: &[CF]) -> Result<CF> {
    assert_eq!(b.len(), ctx.n);
    let mut form: Vec<Option<CF>> = vec![None; ctx.n];
    form.extend(b.iter().cloned().map(Some));
    solve(ctx, &form)
}

/// Components set to `None` are unconstrained.
fn solve(ctx: RingCtx, spec: &[Option<CF>]) -> Result<CF> {
    let n = ctx.n;
    let zero = CF::zero(ctx);
    let form: Vec<&CF> = spec.iter().map(|c| c.as_ref().unwrap_or(&zero)).collect();
    let active: Vec<bool> = spec.iter().map(|c| c.is_some()).collect();
    if form.iter().all(|c| c.is_zero()) {
        return Ok(CF::zero(ctx));
    }
    let jet = form.iter().filter_map(|c| c.jet_order()).min();
    if jet.is_some_and(|v| v < 0) {
        return Err(Error::JetExhausted("antiderivative of exhausted jet".into()));
    }
    let max_m = form.iter().map(|c| c.denom_power()).max().unwrap_or(0);
    let big_m = if ctx.denom == Denominator::One { 0 } else { max_m.saturating_sub(1) };
    let d = ctx.d_poly();
    // Target numerators over D^{M+1}.
    let targets: Vec<Poly> = form
        .iter()
        .map(|c| {
            let raise = big_m + 1 - c.denom_power();
            let raise = if ctx.denom == Denominator::One { 0 } else { raise };
            c.numerator().mul(&d.pow(raise))
        })
        .collect();
    let max_deg = targets.iter().map(|t| t.max_degree()).max().unwrap_or(0);
    let pis: BTreeSet<i16> = targets.iter().flat_map(|t| t.terms().map(|(m, _)| m.pi).collect::<Vec<_>>()).collect();
    let unknowns: Vec<Mono> = pis.iter().flat_map(|&pi| monomials(n, max_deg + 1, pi)).collect();

    // Image of each unknown monomial under P ↦ (∂_a P·D − M P ∂_a D) (or ∂_a P when D = 1).
    let m_scale = GaussRat::int(big_m as i64);
    let image = |p: &Poly, a: usize| -> Poly {
        if ctx.denom == Denominator::One {
            p.deriv(a, n)
        } else {
            p.deriv(a, n).mul(&d).sub(&p.mul(&d.deriv(a, n)).scale(&m_scale))
        }
    };
    let mut rows: BTreeMap<(usize, Mono), usize> = BTreeMap::new();
    let mut columns: Vec<Vec<(usize, GaussRat)>> = Vec::with_capacity(unknowns.len());
    let row_of = |key: (usize, Mono), rows: &mut BTreeMap<(usize, Mono), usize>| -> usize {
        let len = rows.len();
        *rows.entry(key).or_insert(len)
    };
    for u in &unknowns {
        let p = Poly::term(*u, GaussRat::one());
        let mut col = Vec::new();
        for a in (0..2 * n).filter(|&a| active[a]) {
            for (m, c) in image(&p, a).terms() {
                if let Some(v) = jet {
                    if m.degree() as i32 > v {
                        continue;
                    }
                }
                col.push((row_of((a, *m), &mut rows), c.clone()));
            }
        }
        columns.push(col);
    }
    let mut rhs_entries = Vec::new();
    for (a, t) in targets.iter().enumerate() {
        for (m, c) in t.terms() {
            rhs_entries.push((row_of((a, *m), &mut rows), c.clone()));
        }
    }
    let nrows = rows.len();
    let mut mat = vec![vec![GaussRat::zero(); unknowns.len()]; nrows];
    for (j, col) in columns.iter().enumerate() {
        for (r, c) in col {
            mat[*r][j] = c.clone();
        }
    }
    let mut rhs = vec![GaussRat::zero(); nrows];
    for (r, c) in rhs_entries {
        rhs[r] = c;
    }
    let sol = solve_linear(mat, rhs).ok_or_else(|| {
        Error::NotRepresentable("1-form has no antiderivative of the form P/D^M (not closed or outside the ring)".into())
    })?;
    let mut p = Poly::zero();
    for (u, c) in unknowns.iter().zip(sol) {
        p.add_term(*u, &c);
    }
    let mut f = match jet {
        Some(v) => CF::jet(ctx, p, v + 1),
        None => CF::new(ctx, p, big_m),
    };
    let origin = vec![GaussRat::zero(); n];
    let f0 = f.eval(&origin).expect("D(0) = 1");
    f = f.sub(&CF::constant(ctx, &f0));
    for (a, c) in form.iter().enumerate() {
        if active[a] && f.deriv(a) != **c {
            return Err(Error::NotRepresentable("antiderivative check failed".into()));
        }
    }
    Ok(f)
}
