//! Exact geometric quantization of CP¹: the spaces `H_k` of holomorphic
//! sections of `L^k` with monomial basis `z^a e^k`, Toeplitz operators,
//! prequantum operators `β_k`, and the Bargmann-Fock action of degree-1
//! level sections.
//!
//! Hermitian data: `⟨e, e⟩ = e^ρ = 1/D`, volume `(1/π) D^{-2} dA` (total 1),
//! connection `∇e = ∂ρ ⊗ e`. Projections use Gram-weighted inner products
//! against the monomial basis, which is orthogonal.

use std::fmt;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::One;
use rayon::prelude::*;

use crate::chart::{ChartFunction as CF, Denominator};
use crate::error::{Error, Result};
use crate::fedosov::{star_product, Alpha, FedosovConnection};
use crate::geometry::{GeometrySpec, KahlerGeometry, LieAlgebraAction, VectorField};
use crate::poly::Poly;
use crate::quantizable::{evaluate_level, make_degree1, one_over_4pi};
use crate::scalar::{GaussRat, Scalar};
use crate::symmetry::two_pi_over_i;
use crate::weyl::WeylElement;

fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

/// `(1/π) ∫_ℂ z^p z̄^q (1+|z|²)^{-s} dA = δ_{pq} p!(s−p−2)!/(s−1)!`.
pub fn moment_integral(p: u32, q: u32, s: u32) -> Result<GaussRat> {
    if 2 * s <= p + q + 2 {
        return Err(Error::Divergent(format!("z^{p} z̄^{q} (1+|z|²)^-{s} is not integrable")));
    }
    if p != q {
        return Ok(GaussRat::zero());
    }
    let r = BigRational::new(factorial(p) * factorial(s - p - 2), factorial(s - 1));
    Ok(GaussRat::from_rational(r))
}

/// `H_k` on CP¹ with its (diagonal) Gram matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct HilbertModel {
    pub k: u32,
    pub gram: Vec<GaussRat>,
}

impl HilbertModel {
    pub fn dim(&self) -> usize {
        self.k as usize + 1
    }
}

pub fn gram(k: u32) -> HilbertModel {
    let gram = (0..=k).map(|a| moment_integral(a, a, k + 2).expect("convergent")).collect();
    HilbertModel { k, gram }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OperatorTag {
    Toeplitz(String),
    Beta(String),
    Bf(String),
    Nabla(String),
    Composite(String),
}

/// Matrix of an operator on `H_k` in the monomial basis: column `b` holds the
/// coordinates of the image of `z^b e^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    pub k: u32,
    pub entries: Vec<Vec<Scalar>>,
    pub tag: OperatorTag,
}

impl OperatorMatrix {
    pub fn zero(k: u32) -> Self {
        let d = k as usize + 1;
        OperatorMatrix { k, entries: vec![vec![Scalar::zero(); d]; d], tag: OperatorTag::Composite("0".into()) }
    }

    pub fn identity(k: u32) -> Self {
        let mut m = Self::zero(k);
        for a in 0..=k as usize {
            m.entries[a][a] = Scalar::one();
        }
        m.tag = OperatorTag::Composite("1".into());
        m
    }

    fn from_columns(k: u32, cols: Vec<Vec<Scalar>>, tag: OperatorTag) -> Self {
        let d = k as usize + 1;
        let entries = (0..d).map(|a| (0..d).map(|b| cols[b][a].clone()).collect()).collect();
        OperatorMatrix { k, entries, tag }
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, a: usize, b: usize) -> &Scalar {
        &self.entries[a][b]
    }

    fn zip(&self, o: &Self, f: impl Fn(&Scalar, &Scalar) -> Scalar, tag: String) -> Self {
        assert_eq!(self.k, o.k, "operators on different levels");
        let entries = self
            .entries
            .iter()
            .zip(&o.entries)
            .map(|(r, s)| r.iter().zip(s).map(|(x, y)| f(x, y)).collect())
            .collect();
        OperatorMatrix { k: self.k, entries, tag: OperatorTag::Composite(tag) }
    }

    pub fn add(&self, o: &Self) -> Self {
        self.zip(o, |x, y| x + y, "sum".into())
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.zip(o, |x, y| x - y, "difference".into())
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        let entries = self.entries.iter().map(|r| r.iter().map(|x| x * c).collect()).collect();
        OperatorMatrix { k: self.k, entries, tag: OperatorTag::Composite("scaled".into()) }
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.k, o.k, "operators on different levels");
        let d = self.dim();
        let mut entries = vec![vec![Scalar::zero(); d]; d];
        for (a, row) in self.entries.iter().enumerate() {
            for (c, x) in row.iter().enumerate() {
                if x.is_zero() {
                    continue;
                }
                for (b, y) in o.entries[c].iter().enumerate() {
                    if !y.is_zero() {
                        entries[a][b] += &(x * y);
                    }
                }
            }
        }
        OperatorMatrix { k: self.k, entries, tag: OperatorTag::Composite("product".into()) }
    }

    pub fn commutator(&self, o: &Self) -> Self {
        self.mul(o).sub(&o.mul(self))
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().flatten().all(Scalar::is_zero)
    }

    pub fn is_pi_free(&self) -> bool {
        self.entries.iter().flatten().all(|x| x.as_gauss().is_some())
    }

    pub fn require_pi_free(self) -> Result<Self> {
        if self.is_pi_free() {
            Ok(self)
        } else {
            Err(Error::StrayPi(format!("{:?} has entries outside ℚ(i)", self.tag)))
        }
    }

    /// First nonzero entry as `(a,b)=value`, or `0`.
    pub fn defect_string(&self) -> String {
        for (a, row) in self.entries.iter().enumerate() {
            for (b, x) in row.iter().enumerate() {
                if !x.is_zero() {
                    return format!("({a},{b})={x}");
                }
            }
        }
        "0".into()
    }

    /// `gram·M = (gram·M)^*`, i.e. self-adjointness for the `H_k` inner product.
    pub fn is_self_adjoint(&self, model: &HilbertModel) -> bool {
        let d = self.dim();
        let g = |a: usize| Scalar::from_gauss(model.gram[a].clone());
        (0..d).all(|a| (0..d).all(|b| &g(a) * &self.entries[a][b] == (&g(b) * &self.entries[b][a]).conj()))
    }

    pub fn to_complex(&self) -> DMatrix<Complex64> {
        let d = self.dim();
        DMatrix::from_fn(d, d, |a, b| self.entries[a][b].to_complex())
    }

    /// Operator 2-norm on `H_k`: the Euclidean norm of `G^{1/2} M G^{-1/2}`.
    pub fn spectral_norm(&self, model: &HilbertModel) -> f64 {
        let sq: Vec<f64> = model.gram.iter().map(|g| g.to_complex().re.sqrt()).collect();
        let m = self.to_complex();
        let d = self.dim();
        let w = DMatrix::from_fn(d, d, |a, b| m[(a, b)] * (sq[a] / sq[b]));
        w.singular_values().max()
    }

    /// Entries as exact strings, row-major.
    pub fn entry_strings(&self) -> Vec<Vec<String>> {
        self.entries.iter().map(|r| r.iter().map(|x| x.to_string()).collect()).collect()
    }
}

impl fmt::Display for OperatorMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in &self.entries {
            let cells: Vec<String> = row.iter().map(|x| x.to_string()).collect();
            writeln!(f, "[{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

fn require_cp1(geom: &KahlerGeometry) -> Result<()> {
    if geom.spec != GeometrySpec::Fs(1) {
        return Err(Error::OutOfScope(format!("the Hilbert model is CP¹ only, got {}", geom.name())));
    }
    Ok(())
}

fn chart_check(f: &CF) -> Result<()> {
    if f.jet_order().is_some() {
        return Err(Error::OutOfScope("Toeplitz operators need global functions, not jets".into()));
    }
    if f.ctx().n != 1 || (f.ctx().denom != Denominator::Fs && f.denom_power() > 0) {
        return Err(Error::UnsupportedGeometry("expected a CP¹ chart function".into()));
    }
    Ok(())
}

/// Coordinates of `Π_k(h e^k)` in the monomial basis.
fn project(model: &HilbertModel, h: &CF) -> Result<Vec<Scalar>> {
    chart_check(h)?;
    let k = model.k;
    let m = h.denom_power();
    let mut out = vec![Scalar::zero(); model.dim()];
    for (mono, c) in h.numerator().terms() {
        let (p, q) = (mono.z[0] as u32, mono.zb[0] as u32);
        // Integrable against every basis vector (z̄^k is the worst case).
        moment_integral(p, q + k, k + 2 + m)?;
        // ⟨z^p z̄^q D^{-m} e, z^a e⟩ vanishes unless a = p − q.
        let a = p as i64 - q as i64;
        if a < 0 || a > k as i64 {
            continue;
        }
        let a = a as usize;
        let v = moment_integral(p, q + a as u32, k + 2 + m)?;
        let v = &v / &model.gram[a];
        out[a].add_term(mono.pi as i32, &(c * &v));
    }
    Ok(out)
}

/// Coordinates of `h e^k` when `h` is a holomorphic polynomial of degree `≤ k`.
fn holomorphic_coords(h: &CF, k: u32) -> Option<Vec<Scalar>> {
    if h.denom_power() > 0 {
        return None;
    }
    let mut out = vec![Scalar::zero(); k as usize + 1];
    for (mono, c) in h.numerator().terms() {
        let a = mono.z[0] as usize;
        if mono.zb[0] != 0 || a > k as usize {
            return None;
        }
        out[a].add_term(mono.pi as i32, c);
    }
    Some(out)
}

fn basis(geom: &KahlerGeometry, b: u32) -> CF {
    CF::from_poly(geom.ctx, Poly::z(0).pow(b))
}

/// `T_{f,k} = Π_k ∘ m_f`.
pub fn toeplitz(geom: &KahlerGeometry, f: &CF, k: u32) -> Result<OperatorMatrix> {
    require_cp1(geom)?;
    let model = gram(k);
    let cols = (0..=k).map(|b| project(&model, &f.mul(&basis(geom, b)))).collect::<Result<Vec<_>>>()?;
    Ok(OperatorMatrix::from_columns(k, cols, OperatorTag::Toeplitz(f.to_expr())))
}

/// `∇^{⊗k}_V (z^b e^k) = (V(z^b) + k z^b ι_V ∂ρ) e^k`, before projection.
fn nabla_raw(geom: &KahlerGeometry, v: &VectorField, k: u32, b: u32) -> CF {
    let g = basis(geom, b);
    let conn = v.v[0].mul(geom.drho(0)).mul(&g).scale_int(k as i64);
    v.apply(&g).add(&conn)
}

/// `Π_k ∘ ∇^{⊗k}_V` on holomorphic sections.
pub fn nabla_operator(geom: &KahlerGeometry, v: &VectorField, k: u32) -> Result<OperatorMatrix> {
    require_cp1(geom)?;
    let model = gram(k);
    let cols = (0..=k).map(|b| project(&model, &nabla_raw(geom, v, k, b))).collect::<Result<Vec<_>>>()?;
    Ok(OperatorMatrix::from_columns(k, cols, OperatorTag::Nabla(format!("{:?}", v.v))))
}

/// `2πi`.
fn two_pi_i() -> Scalar {
    Scalar::monomial(GaussRat::complex((0, 1), (2, 1)), 1)
}

/// `β_k(ξ) = ∇^{⊗k}_{V_ξ} − 2πi k μ(ξ)` for `ξ = Σ xi_a ξ_a`. No projection is
/// applied: the image of every basis vector must already be holomorphic.
pub fn beta_operator(geom: &KahlerGeometry, action: &LieAlgebraAction, xi: &[GaussRat], k: u32) -> Result<OperatorMatrix> {
    require_cp1(geom)?;
    let v = LieAlgebraAction::combine(xi, &action.fields, VectorField::zero(geom.ctx), |acc, x, c| acc.add(&x.scale(c)));
    let mu = LieAlgebraAction::combine(xi, &action.moment, geom.zero(), |acc, x, c| acc.add(&x.scale(c)));
    let shift = mu.mul_scalar(&two_pi_i()).scale_int(k as i64);
    let cols = (0..=k)
        .map(|b| {
            let h = nabla_raw(geom, &v, k, b).sub(&shift.mul(&basis(geom, b)));
            holomorphic_coords(&h, k).ok_or_else(|| {
                Error::NotPrequantizable(format!("β_{k} maps z^{b} to the non-holomorphic {h}"))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    OperatorMatrix::from_columns(k, cols, OperatorTag::Beta(format!("{xi:?}"))).require_pi_free()
}

/// Bargmann-Fock action of a level-`k` Weyl section on `z^b e^k`. The flat
/// section of `z^b e^k` is `z^b + y^i(∂_i z^b + k z^b ∂_i ρ) + O(y²)`; a term
/// `y^I ȳ^J` acts as `(−1/k)^{|J|} ω^{pj̄}∂_{y^p} ∘ m_{y^I}` and is then
/// evaluated at `y = 0`, so only `1`, `ȳ^j` and `y^i ȳ^j` reach the result.
pub fn bf_operator(geom: &KahlerGeometry, section: &WeylElement, k: u32) -> Result<OperatorMatrix> {
    require_cp1(geom)?;
    if section.max_ybar_degree() >= 2 {
        return Err(Error::OutOfScope("Bargmann-Fock action for ȳ-degree ≥ 2".into()));
    }
    let n = geom.n();
    let minus_inv_k = GaussRat::frac(-1, k as i64);
    let mut f0 = geom.zero();
    let mut lin = vec![geom.zero(); n];
    let mut quad = geom.zero();
    for (m, c) in section.terms() {
        if m.form != 0 || m.h != 0 {
            continue;
        }
        match (m.y_degree(), m.ybar_degree()) {
            (0, 0) => f0 = f0.add(c),
            (0, 1) => {
                let j = (0..n).find(|&j| m.yb[j] == 1).unwrap();
                lin[j] = lin[j].add(c);
            }
            (1, 1) => {
                let i = (0..n).find(|&i| m.y[i] == 1).unwrap();
                let j = (0..n).find(|&j| m.yb[j] == 1).unwrap();
                quad = quad.add(&c.mul(&geom.omega_up(i, j)));
            }
            _ => {}
        }
    }
    let quad = quad.scale(&minus_inv_k);
    let cols = (0..=k)
        .map(|b| {
            let g = basis(geom, b);
            let mut h = f0.mul(&g).add(&quad.mul(&g));
            for (j, bj) in lin.iter().enumerate() {
                for p in 0..n {
                    let jet = g.dz(p).add(&g.mul(geom.drho(p)).scale_int(k as i64));
                    h = h.add(&bj.mul(&geom.omega_up(p, j)).mul(&jet).scale(&minus_inv_k));
                }
            }
            holomorphic_coords(&h, k)
                .ok_or_else(|| Error::NotRepresentable(format!("Bargmann-Fock image of z^{b} is {h}")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(OperatorMatrix::from_columns(k, cols, OperatorTag::Bf(format!("level {k}"))))
}

/// The level section of `k·μ_k(ξ)` with `μ_ħ = (2π/i)(μ − (ħ/4π)Δμ)`.
pub fn quantum_level_section(
    conn: &FedosovConnection,
    action: &LieAlgebraAction,
    xi: &[GaussRat],
    k: u32,
) -> Result<WeylElement> {
    if conn.alpha != Alpha::Ricci {
        return Err(Error::Invalid("level sections of μ_k need alpha = Ric_X".into()));
    }
    let geom = &conn.geom;
    let mu = LieAlgebraAction::combine(xi, &action.moment, geom.zero(), |acc, x, c| acc.add(&x.scale(c)));
    let q = make_degree1(conn, &mu, &Scalar::zero(), false)?;
    let s = evaluate_level(conn, &q, k as u64);
    // ȳ- and yȳ-coefficients (symmetric degree 2) must be inside the exact range.
    if s.exact_degree <= 2 || !s.defect().is_zero() {
        return Err(Error::Invalid(format!("truncation order {} too small for level sections", conn.order)));
    }
    let scale = two_pi_over_i().scale(&GaussRat::int(k as i64));
    Ok(s.section.mul_scalar(&scale))
}

/// `k·μ_k(ξ) = (2π/i)(kμ − Δμ/4π)` as a function.
pub fn level_moment(geom: &KahlerGeometry, mu: &CF, k: u32) -> CF {
    let lap = geom.laplacian(mu).mul_scalar(&one_over_4pi());
    mu.scale_int(k as i64).sub(&lap).mul_scalar(&two_pi_over_i())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum IdentitySuite {
    /// `Π∘∇_{V_f} = (i/2) Π∘m_{Δf}` for `f = μ_a`.
    Tuynman,
    /// `bf(k·μ_k(ξ)) = β_k(ξ)`.
    Diagram,
    /// `T_{k·μ_k(ξ)} = β_k(ξ)`.
    ToeplitzBeta,
    /// `[β_k(ξ_a), T_{μ_b}] = T_{V_a(μ_b)}`.
    Commutator,
    /// `[β_k(ξ_a), β_k(ξ_b)] = β_k([ξ_a, ξ_b])`.
    Representation,
}

impl IdentitySuite {
    pub fn name(&self) -> &'static str {
        match self {
            IdentitySuite::Tuynman => "tuynman",
            IdentitySuite::Diagram => "diagram",
            IdentitySuite::ToeplitzBeta => "toeplitz-beta",
            IdentitySuite::Commutator => "commutator",
            IdentitySuite::Representation => "representation",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::all()
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown identity suite {s:?}")))
    }

    pub fn all() -> [IdentitySuite; 5] {
        use IdentitySuite::*;
        [Tuynman, Diagram, ToeplitzBeta, Commutator, Representation]
    }
}

#[derive(Clone, Debug)]
pub struct IdentityRow {
    pub suite: IdentitySuite,
    pub case: String,
    pub k: u32,
    /// Left minus right side; `Err` when a side could not be built.
    pub defect: std::result::Result<OperatorMatrix, Error>,
}

impl IdentityRow {
    pub fn passed(&self) -> bool {
        matches!(&self.defect, Ok(m) if m.is_zero())
    }

    pub fn defect_string(&self) -> String {
        match &self.defect {
            Ok(m) => m.defect_string(),
            Err(e) => e.to_string(),
        }
    }
}

fn unit(dim: usize, a: usize) -> Vec<GaussRat> {
    (0..dim).map(|d| if d == a { GaussRat::one() } else { GaussRat::zero() }).collect()
}

fn identity_case(
    conn: &FedosovConnection,
    action: &LieAlgebraAction,
    suite: IdentitySuite,
    a: usize,
    b: usize,
    k: u32,
) -> Result<OperatorMatrix> {
    let geom = &conn.geom;
    let dim = action.dim();
    let mu = &action.moment[a];
    match suite {
        IdentitySuite::Tuynman => {
            let v = geom.hamiltonian_vf(mu);
            let lhs = nabla_operator(geom, &v, k)?;
            let rhs = toeplitz(geom, &geom.laplacian(mu), k)?.scale(&Scalar::from_gauss(GaussRat::complex((0, 1), (1, 2))));
            Ok(lhs.sub(&rhs))
        }
        IdentitySuite::Diagram => {
            let s = quantum_level_section(conn, action, &unit(dim, a), k)?;
            Ok(bf_operator(geom, &s, k)?.sub(&beta_operator(geom, action, &unit(dim, a), k)?))
        }
        IdentitySuite::ToeplitzBeta => {
            let t = toeplitz(geom, &level_moment(geom, mu, k), k)?.require_pi_free()?;
            Ok(t.sub(&beta_operator(geom, action, &unit(dim, a), k)?))
        }
        IdentitySuite::Commutator => {
            let beta = beta_operator(geom, action, &unit(dim, a), k)?;
            let f = &action.moment[b];
            let lhs = beta.commutator(&toeplitz(geom, f, k)?);
            Ok(lhs.sub(&toeplitz(geom, &action.fields[a].apply(f), k)?))
        }
        IdentitySuite::Representation => {
            let lhs = beta_operator(geom, action, &unit(dim, a), k)?
                .commutator(&beta_operator(geom, action, &unit(dim, b), k)?);
            Ok(lhs.sub(&beta_operator(geom, action, &action.bracket_coords(a, b), k)?))
        }
    }
}

/// Evaluate one identity family over all generators (and pairs where the
/// identity has two slots) and the given levels. Rows come back in
/// `(k, a, b)` order regardless of scheduling.
pub fn verify_identities(
    conn: &FedosovConnection,
    action: &LieAlgebraAction,
    suite: IdentitySuite,
    levels: &[u32],
) -> Result<Vec<IdentityRow>> {
    require_cp1(&conn.geom)?;
    let dim = action.dim();
    let pairs: Vec<(usize, usize)> = match suite {
        IdentitySuite::Commutator | IdentitySuite::Representation => {
            (0..dim).flat_map(|a| (0..dim).map(move |b| (a, b))).collect()
        }
        _ => (0..dim).map(|a| (a, a)).collect(),
    };
    let cases: Vec<(u32, usize, usize)> =
        levels.iter().flat_map(|&k| pairs.iter().map(move |&(a, b)| (k, a, b))).collect();
    let rows = cases
        .par_iter()
        .map(|&(k, a, b)| {
            let case = match suite {
                IdentitySuite::Commutator | IdentitySuite::Representation => {
                    format!("{}/{}", action.labels[a], action.labels[b])
                }
                _ => action.labels[a].clone(),
            };
            IdentityRow { suite, case, k, defect: identity_case(conn, action, suite, a, b, k) }
        })
        .collect();
    Ok(rows)
}

#[derive(Clone, Debug)]
pub struct Asymptotics {
    pub levels: Vec<u32>,
    pub errors: Vec<f64>,
    /// Least-squares slope of `log error` against `log k`; `None` when some error vanishes.
    pub slope: Option<f64>,
}

/// `‖T_f T_g − Σ_{i ≤ order} k^{-i} T_{C_i(f,g)}‖` over the levels, with `C_i`
/// from the Fedosov star product of `conn`.
pub fn bt_asymptotic_slope(
    conn: &FedosovConnection,
    f: &CF,
    g: &CF,
    levels: &[u32],
    order: usize,
) -> Result<Asymptotics> {
    require_cp1(&conn.geom)?;
    if levels.len() < 3 {
        return Err(Error::Invalid(format!("asymptotic fit needs at least 3 levels, got {}", levels.len())));
    }
    if levels.windows(2).any(|w| w[0] >= w[1]) || levels[0] == 0 {
        return Err(Error::Invalid("levels must be positive and strictly increasing".into()));
    }
    let star = star_product(conn, std::slice::from_ref(f), std::slice::from_ref(g))?;
    if order >= star.coeffs.len() {
        return Err(Error::Invalid(format!(
            "C_{order} needs a higher truncation order than {}",
            conn.order
        )));
    }
    let geom = &conn.geom;
    let errors = levels
        .par_iter()
        .map(|&k| {
            let mut m = toeplitz(geom, f, k)?.mul(&toeplitz(geom, g, k)?);
            for i in 0..=order {
                let c = star.c(i).scale(&GaussRat::frac(1, (k as i64).pow(i as u32)));
                m = m.sub(&toeplitz(geom, &c, k)?);
            }
            Ok(m.spectral_norm(&gram(k)))
        })
        .collect::<Result<Vec<f64>>>()?;
    let slope = if errors.iter().all(|e| *e > 0.0) {
        let xs: Vec<f64> = levels.iter().map(|&k| (k as f64).ln()).collect();
        let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
        let n = xs.len() as f64;
        let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
        Some(sxy / sxx)
    } else {
        None
    };
    Ok(Asymptotics { levels: levels.to_vec(), errors, slope })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fedosov::solve_fedosov;
    use crate::geometry::su2_action;
    use std::sync::Arc;

    fn g(n: i64, d: i64) -> GaussRat {
        GaussRat::frac(n, d)
    }

    /// `∫₀^∞ t^p (1+t)^{-s} dt = B(p+1, s−p−1)`, evaluated by the Gamma recursion.
    fn beta_oracle(p: u32, s: u32) -> GaussRat {
        let (x, y) = (p + 1, s - p - 1);
        let mut r = GaussRat::one();
        for i in 1..x {
            r = &r * &g(i as i64, 1);
        }
        for i in 1..y {
            r = &r * &g(i as i64, 1);
        }
        for i in 1..(x + y) {
            r = &r / &g(i as i64, 1);
        }
        r
    }

    #[test]
    fn moment_integrals() {
        assert_eq!(moment_integral(1, 1, 4).unwrap(), g(1, 6));
        assert_eq!(moment_integral(0, 0, 2).unwrap(), GaussRat::one());
        assert_eq!(moment_integral(2, 1, 5).unwrap(), GaussRat::zero());
        assert!(matches!(moment_integral(1, 1, 2), Err(Error::Divergent(_))));
        assert!(matches!(moment_integral(0, 3, 2), Err(Error::Divergent(_))));
        // (1/π)∫ |z|^{2p} D^{-s} dA = ∫₀^∞ t^p (1+t)^{-s} dt with t = r².
        for s in 2..9 {
            for p in 0..s - 1 {
                assert_eq!(moment_integral(p, p, s).unwrap(), beta_oracle(p, s));
            }
        }
    }

    #[test]
    fn gram_matrices() {
        assert_eq!(gram(1).gram, vec![g(1, 2), g(1, 2)]);
        assert_eq!(gram(2).gram, vec![g(1, 3), g(1, 6), g(1, 3)]);
        for k in [5, 17, 64] {
            let m = gram(k);
            for (a, x) in m.gram.iter().enumerate() {
                assert_eq!(*x, beta_oracle(a as u32, k + 2));
                assert!(x.to_complex().re > 0.0);
            }
        }
    }

    #[test]
    fn toeplitz_basics() {
        let geom = KahlerGeometry::cp1();
        for k in 1..5 {
            assert_eq!(toeplitz(&geom, &geom.constant(&Scalar::one()), k).unwrap().entries, OperatorMatrix::identity(k).entries);
        }
        let act = su2_action(&geom).unwrap();
        let t = toeplitz(&geom, &act.moment[2], 1).unwrap();
        // μ₃ = (1/4π)(1−zz̄)/D: diagonal (1/4π)(k−2a)/(k+2) = ±1/(12π).
        let e = |n: i64| Scalar::monomial(g(n, 12), -1);
        assert_eq!(t.entries, vec![vec![e(1), Scalar::zero()], vec![Scalar::zero(), e(-1)]]);
        let model = gram(3);
        for mu in &act.moment {
            let t = toeplitz(&geom, mu, 3).unwrap();
            assert!(t.is_self_adjoint(&model));
            let t1 = toeplitz(&geom, &geom.constant(&Scalar::one()), 3).unwrap();
            assert_eq!(t.mul(&t1).entries, t.entries);
        }
        let sum = act.moment[0].add(&act.moment[1].scale_int(3));
        let lin = toeplitz(&geom, &act.moment[0], 4).unwrap().add(&toeplitz(&geom, &act.moment[1], 4).unwrap().scale(&Scalar::int(3)));
        assert_eq!(toeplitz(&geom, &sum, 4).unwrap().entries, lin.entries);
        assert!(!toeplitz(&geom, &act.moment[0], 2).unwrap().is_pi_free());
    }

    #[test]
    fn toeplitz_rejects_divergence() {
        let geom = KahlerGeometry::cp1();
        let wild = CF::z(geom.ctx, 0).pow(4).mul(&CF::zb(geom.ctx, 0).pow(4));
        assert!(matches!(toeplitz(&geom, &wild, 1), Err(Error::Divergent(_))));
    }

    #[test]
    fn beta_examples() {
        let geom = KahlerGeometry::cp1();
        let act = su2_action(&geom).unwrap();
        for k in 1..6u32 {
            let b = beta_operator(&geom, &act, &unit(3, 2), k).unwrap();
            // ξ₃: z^a ↦ i(a − k/2) z^a.
            for a in 0..=k as usize {
                for c in 0..=k as usize {
                    let want = if a == c { Scalar::from_gauss(GaussRat::complex((0, 1), (2 * a as i64 - k as i64, 2))) } else { Scalar::zero() };
                    assert_eq!(*b.get(a, c), want);
                }
            }
            assert!(beta_operator(&geom, &act, &vec![GaussRat::zero(); 3], k).unwrap().is_zero());
        }
        // A rescaled moment map is not a prequantum normalization.
        let mut bad = act.clone();
        bad.moment[2] = bad.moment[2].scale_int(2);
        assert!(matches!(beta_operator(&geom, &bad, &unit(3, 2), 2), Err(Error::NotPrequantizable(_))));
    }

    #[test]
    fn nabla_examples() {
        let geom = KahlerGeometry::cp1();
        let act = su2_action(&geom).unwrap();
        assert!(nabla_operator(&geom, &VectorField::zero(geom.ctx), 3).unwrap().is_zero());
        // For a rotation, ∇_V z^b e = z^b(ib − ikzz̄/D)e; its projection is
        // diagonal with entries ib − ik(b+1)/(k+2).
        let k = 4u32;
        let m = nabla_operator(&geom, &act.fields[2], k).unwrap();
        for b in 0..=k as i64 {
            let want = GaussRat::complex((0, 1), (b * (k as i64 + 2) - k as i64 * (b + 1), k as i64 + 2));
            assert_eq!(*m.get(b as usize, b as usize), Scalar::from_gauss(want));
        }
    }

    fn bt_conn() -> FedosovConnection {
        solve_fedosov(Arc::new(KahlerGeometry::cp1()), Alpha::Ricci, 6).unwrap()
    }

    #[test]
    fn identities_small_levels() {
        let conn = bt_conn();
        let act = su2_action(&conn.geom).unwrap();
        for suite in IdentitySuite::all() {
            let rows = verify_identities(&conn, &act, suite, &[1, 2, 3]).unwrap();
            for r in &rows {
                assert!(r.passed(), "{} {} k={}: {}", suite.name(), r.case, r.k, r.defect_string());
            }
        }
    }

    #[test]
    fn bf_constant_and_principal_symbol() {
        let conn = bt_conn();
        let geom = &conn.geom;
        let k = 3u32;
        let ctx = crate::quantizable::level_ctx(&conn, k as u64);
        let c = Scalar::frac(5, 2);
        let s = WeylElement::function(&ctx, &geom.constant(&c));
        assert_eq!(bf_operator(geom, &s, k).unwrap().entries, OperatorMatrix::identity(k).scale(&c).entries);
        // Principal symbol: the ȳ-coefficient of k·μ_k(ξ₃) is ikz/D², so the
        // first-order part is (−1/k)ω^{11̄}(ikz/D²)∂_z = iz∂_z and the diagonal
        // grows by i per basis step.
        let act = su2_action(geom).unwrap();
        let q = quantum_level_section(&conn, &act, &unit(3, 2), k).unwrap();
        let ybar = {
            let mut m = crate::weyl::WMono::one();
            m.yb[0] = 1;
            q.coeff(&m)
        };
        let expect = CF::z(geom.ctx, 0).mul(&CF::d_inv_pow(geom.ctx, 2)).scale(&GaussRat::complex((0, 1), (k as i64, 1)));
        assert_eq!(ybar, expect);
        let bf = bf_operator(geom, &q, k).unwrap();
        for b in 1..=k as usize {
            assert_eq!(bf.get(b, b) - bf.get(b - 1, b - 1), Scalar::i());
        }
        let mut m2 = crate::weyl::WMono::one();
        m2.yb[0] = 2;
        let two = WeylElement::monomial(&ctx, m2, geom.constant(&Scalar::one()));
        assert!(matches!(bf_operator(geom, &two, k), Err(Error::OutOfScope(_))));
    }

    #[test]
    fn asymptotics_rejects_short_level_lists() {
        let conn = solve_fedosov(Arc::new(KahlerGeometry::cp1()), Alpha::Ricci, 4).unwrap();
        let one = conn.geom.constant(&Scalar::one());
        assert!(bt_asymptotic_slope(&conn, &one, &one, &[2, 4], 0).is_err());
        let a = bt_asymptotic_slope(&conn, &one, &one, &[2, 4, 8], 0).unwrap();
        assert!(a.errors.iter().all(|e| *e == 0.0));
        assert_eq!(a.slope, None);
    }
}
