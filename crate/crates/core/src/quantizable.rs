//! Degree-1 quantizable functions: the Killing criterion, the formal functions
//! `f = f₀ − (ħ/4π)(Δf₀ + c)`, their evaluation at `ħ = 1/k`, and recovery of
//! the formal function from a level-`k` section on a single chart.

use crate::antideriv::dbar_antiderivative;
use crate::chart::ChartFunction as CF;
use crate::error::{Error, Result};
use crate::fedosov::{flat_section, Alpha, FedosovConnection, FlatSection};
use crate::geometry::KahlerGeometry;
use crate::scalar::{GaussRat, Scalar};
use crate::weyl::{HbarMode, WMono, WeylCtx, WeylElement};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KillingCheck {
    /// `∇^{0,1}(∂f₀/∂z̄^j ȳ^j) = 0`.
    pub condition_holds: bool,
    /// `∂f₀/∂z̄^j ω^{ij̄}` holomorphic for every `i`.
    pub v10_holomorphic: bool,
    /// `∂̄(Δf₀/4π) = ι_{V^{1,0}} Ric_X`, i.e. `(1/4π) ∂_{l̄}Δf₀ = ∂_{j̄}f₀ ω^{j̄k} Ric_{kl̄}`.
    pub ricci_identity: bool,
}

/// `1/(4π)`.
pub fn one_over_4pi() -> Scalar {
    Scalar::monomial(GaussRat::frac(1, 4), -1)
}

pub fn check_killing_condition(geom: &KahlerGeometry, f0: &CF) -> KillingCheck {
    let n = geom.n();
    let ctx = WeylCtx::formal(std::sync::Arc::new(geom.clone()), 2);
    let mut beta = WeylElement::zero(&ctx);
    for j in 0..n {
        let mut m = WMono::one();
        m.yb[j] = 1;
        beta.add_term(m, &f0.dzb(j));
    }
    let condition_holds = beta.nabla_part(false, true).is_zero();
    let v10_holomorphic = (0..n).all(|i| {
        let mut s = geom.zero();
        for j in 0..n {
            s.add_assign(&f0.dzb(j).mul(&geom.omega_up(i, j)));
        }
        s.is_holomorphic()
    });
    let lap = geom.laplacian(f0).mul_scalar(&one_over_4pi());
    let ricci_identity = (0..n).all(|l| {
        let mut rhs = geom.zero();
        for j in 0..n {
            for k in 0..n {
                rhs.add_assign(&f0.dzb(j).mul(geom.omega_inv(j, k)).mul(&geom.ricci_form(k, l)));
            }
        }
        lap.dzb(l) == rhs
    });
    KillingCheck { condition_holds, v10_holomorphic, ricci_identity }
}

#[derive(Clone, Debug)]
pub struct QuantizableFunction {
    pub f0: CF,
    pub c: Scalar,
    /// `[f₀, −(1/4π)(Δf₀ + c)]` by `ħ` power.
    pub formal: Vec<CF>,
    pub section: FlatSection,
    pub ybar_degree: u32,
    pub hbar_degree: u32,
    pub killing: KillingCheck,
}

impl QuantizableFunction {
    pub fn is_degree1(&self) -> bool {
        self.ybar_degree <= 1 && self.hbar_degree <= 1
    }
}

/// `f₀ − (ħ/4π)(Δf₀ + c)` as an `ħ`-series.
pub fn degree1_formal(geom: &KahlerGeometry, f0: &CF, c: &Scalar) -> Vec<CF> {
    let f1 = geom.laplacian(f0).add(&geom.constant(c)).mul_scalar(&one_over_4pi()).neg();
    vec![f0.clone(), f1]
}

/// Build the degree-1 candidate for `f₀` and measure its flat section. With
/// `force` the Killing precondition is skipped so non-Killing inputs can be observed.
pub fn make_degree1(conn: &FedosovConnection, f0: &CF, c: &Scalar, force: bool) -> Result<QuantizableFunction> {
    if conn.alpha != Alpha::Ricci {
        return Err(Error::Invalid("degree-1 classification needs alpha = Ric_X".into()));
    }
    let killing = check_killing_condition(&conn.geom, f0);
    if !force && !killing.condition_holds {
        return Err(Error::NotKilling(format!("∇^{{0,1}}(∂̄f₀·ȳ) ≠ 0 for f₀ = {f0}")));
    }
    let formal = degree1_formal(&conn.geom, f0, c);
    let section = flat_section(conn, &formal)?;
    let ybar_degree = section.ybar_degree();
    let hbar_degree = section.hbar_degree();
    Ok(QuantizableFunction { f0: f0.clone(), c: c.clone(), formal, section, ybar_degree, hbar_degree, killing })
}

/// Level-`k` data: `I_α` and a section with `ħ = 1/k`, plus the symmetric
/// degree up to which the truncated evaluation is exact.
#[derive(Clone, Debug)]
pub struct LevelSection {
    pub k: u64,
    pub section: WeylElement,
    pub i_alpha: WeylElement,
    pub exact_degree: u32,
}

impl LevelSection {
    /// `D_{α,k} s = ∇s − δs + k[I_{α,k}, s]_⋆`, restricted to the exact range.
    pub fn defect(&self) -> WeylElement {
        let s = &self.section;
        s.nabla()
            .sub(&s.delta())
            .add(&self.i_alpha.commutator_over_hbar(s))
            .filter(|m| m.sym_degree() < self.exact_degree)
    }

    pub fn symbol(&self) -> CF {
        let s = self.section.symbol();
        s.into_iter().next().unwrap_or_else(|| self.section.geom().zero())
    }

    /// Coefficients of `ȳ^j` (no `y`, no forms).
    pub fn ybar_coefficients(&self) -> Vec<CF> {
        let n = self.section.ctx().n();
        (0..n)
            .map(|j| {
                let mut m = WMono::one();
                m.yb[j] = 1;
                self.section.coeff(&m)
            })
            .collect()
    }
}

/// Symmetric degree through which a formal element of weight bound `w` and
/// `ħ`-degree `h` determines its level evaluation.
fn exact_sym_degree(w: u32, h: u32) -> u32 {
    w.saturating_sub(2 * h)
}

/// Evaluate a formal section at `ħ = 1/k` against the evaluated connection.
pub fn evaluate_section(conn: &FedosovConnection, of: &WeylElement, k: u64) -> LevelSection {
    assert!(k >= 1);
    let w = conn.ctx.order;
    let h = of.max_hbar_degree().max(conn.i_alpha.max_hbar_degree());
    let m = of.max_ybar_degree().max(conn.i_alpha.max_ybar_degree()).max(1);
    let section = of.evaluate_level(k);
    let i_alpha = conn.i_alpha.evaluate_level(k);
    // The bracket with I contracts at most `m` pairs, each dropping two degrees.
    let exact_degree = exact_sym_degree(w, h).saturating_sub(2 * m);
    LevelSection { k, section, i_alpha, exact_degree }
}

pub fn evaluate_level(conn: &FedosovConnection, q: &QuantizableFunction, k: u64) -> LevelSection {
    evaluate_section(conn, &q.section.of, k)
}

/// Result of recovering a formal degree-1 function from a level section.
#[derive(Clone, Debug)]
pub struct Formalized {
    pub q: QuantizableFunction,
    /// Holomorphic `h` with `s = evaluate_level(q, k) + O_h|_{ħ=1/k}`.
    pub correction: CF,
}

pub fn formalize_level_section(conn: &FedosovConnection, s: &LevelSection) -> Result<Formalized> {
    if s.section.max_ybar_degree() > 1 {
        return Err(Error::Invalid("level section has ȳ-degree above 1".into()));
    }
    if !s.defect().is_zero() {
        return Err(Error::Invalid("level section is not flat".into()));
    }
    let geom = &conn.geom;
    let f0 = dbar_antiderivative(geom.ctx, &s.ybar_coefficients())?;
    let zero = Scalar::zero();
    let q = make_degree1(conn, &f0, &zero, false)?;
    let k = s.k;
    let level_symbol = degree1_formal(geom, &f0, &zero)[1]
        .scale(&GaussRat::frac(1, k as i64))
        .add(&f0);
    let correction = s.symbol().sub(&level_symbol);
    if !correction.is_holomorphic() {
        return Err(Error::NotRepresentable(format!("symbol correction {correction} is not holomorphic")));
    }
    Ok(Formalized { q, correction })
}

/// `evaluate_level(q, k) + O_h|_{ħ=1/k}`, for checking a round trip.
pub fn reassemble(conn: &FedosovConnection, f: &Formalized, k: u64) -> Result<LevelSection> {
    let oh = flat_section(conn, &[f.correction.clone()])?;
    let base = evaluate_level(conn, &f.q, k);
    let extra = oh.of.evaluate_level(k);
    Ok(LevelSection { section: base.section.add(&extra), ..base })
}

/// The level context used for evaluations of `conn` at `ħ = 1/k`.
pub fn level_ctx(conn: &FedosovConnection, k: u64) -> std::sync::Arc<WeylCtx> {
    conn.ctx.with_mode(HbarMode::Level(k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fedosov::solve_fedosov;
    use crate::geometry::su2_action;
    use crate::poly::Poly;
    use std::sync::Arc;

    fn bt(order: u32) -> FedosovConnection {
        solve_fedosov(Arc::new(KahlerGeometry::cp1()), Alpha::Ricci, order).unwrap()
    }

    fn non_killing(gc: crate::chart::RingCtx) -> CF {
        let z2 = Poly::z(0).pow(2).add(&Poly::zb(0).pow(2));
        CF::from_poly(gc, z2.mul(&Poly::z(0)).mul(&Poly::zb(0)))
    }

    #[test]
    fn killing_checks() {
        let g = KahlerGeometry::cp1();
        let mu = su2_action(&g).unwrap().moment;
        let all = KillingCheck { condition_holds: true, v10_holomorphic: true, ricci_identity: true };
        assert_eq!(check_killing_condition(&g, &mu[2]), all);
        let flat = KahlerGeometry::flat(1);
        let zzb = CF::from_poly(flat.ctx, Poly::z(0).mul(&Poly::zb(0)));
        assert_eq!(check_killing_condition(&flat, &zzb), all);
        let bad = check_killing_condition(&g, &non_killing(g.ctx));
        assert!(!bad.condition_holds && !bad.v10_holomorphic);
    }

    #[test]
    fn su2_moment_maps_are_degree1() {
        let conn = bt(6);
        let mu = su2_action(&conn.geom).unwrap().moment;
        for f0 in &mu {
            let q = make_degree1(&conn, f0, &Scalar::zero(), false).unwrap();
            assert_eq!((q.ybar_degree, q.hbar_degree), (1, 1), "{f0}");
            assert_eq!(q.section.symbol_f, q.formal);
        }
        let c = make_degree1(&conn, &CF::int(conn.geom.ctx, 3), &Scalar::zero(), false).unwrap();
        assert_eq!(c.section.of, WeylElement::function(&conn.ctx, &CF::int(conn.geom.ctx, 3)));
    }

    #[test]
    fn non_killing_control() {
        let conn = bt(6);
        let f0 = non_killing(conn.geom.ctx);
        assert!(matches!(make_degree1(&conn, &f0, &Scalar::zero(), false), Err(Error::NotKilling(_))));
        let q = make_degree1(&conn, &f0, &Scalar::zero(), true).unwrap();
        assert!(q.ybar_degree >= 2);
    }

    #[test]
    fn level_evaluation_is_flat() {
        let conn = bt(6);
        let mu = su2_action(&conn.geom).unwrap().moment;
        let q = make_degree1(&conn, &mu[2], &Scalar::zero(), false).unwrap();
        let lap = conn.geom.laplacian(&mu[2]);
        for k in [1u64, 2, 3] {
            let s = evaluate_level(&conn, &q, k);
            assert!(s.exact_degree >= 1);
            assert!(s.defect().is_zero());
            let want = mu[2].sub(&lap.mul_scalar(&one_over_4pi()).scale(&GaussRat::frac(1, k as i64)));
            assert_eq!(s.symbol(), want);
        }
        let s1 = evaluate_level(&conn, &q, 1).section;
        let s2 = evaluate_level(&conn, &q, 2).section;
        assert_ne!(s1, s2);
    }

    #[test]
    fn round_trip_recovers_moment_map() {
        let conn = bt(6);
        let mu = su2_action(&conn.geom).unwrap().moment;
        for f0 in &mu {
            let q = make_degree1(&conn, f0, &Scalar::zero(), false).unwrap();
            let s = evaluate_level(&conn, &q, 3);
            let back = formalize_level_section(&conn, &s).unwrap();
            assert!(back.q.f0.sub(f0).as_scalar().is_some());
            assert!(back.correction.as_scalar().is_some());
            assert_eq!(reassemble(&conn, &back, 3).unwrap().section, s.section);
        }
        let gc = conn.geom.ctx;
        let q = make_degree1(&conn, &CF::int(gc, 2), &Scalar::zero(), false).unwrap();
        let back = formalize_level_section(&conn, &evaluate_level(&conn, &q, 2)).unwrap();
        assert!(back.q.f0.is_zero());
        assert_eq!(back.correction, CF::int(gc, 2));
    }

    #[test]
    fn star_closure_of_degree1() {
        let conn = bt(6);
        let mu = su2_action(&conn.geom).unwrap().moment;
        let a = make_degree1(&conn, &mu[0], &Scalar::zero(), false).unwrap();
        let b = make_degree1(&conn, &mu[1], &Scalar::zero(), false).unwrap();
        assert!(a.section.of.wick(&b.section.of).max_ybar_degree() <= 2);
    }
}
