//! Kähler chart data: metric, inverse, Christoffel symbols, curvature, Ricci
//! form, Laplacian, Hamiltonian vector fields and Lie-derivative checks.
//!
//! Conventions: `ω = (i/2π) ω_{ij̄} dz^i ∧ dz̄^j`, `ω^{j̄i}` is the matrix
//! inverse (`ω_{ij̄} ω^{j̄k} = δ_i^k`) and `ω^{ij̄} = −ω^{j̄i}`. The potential
//! satisfies `∂_i ∂_{j̄} ρ = −ω_{ij̄}`.

use crate::antideriv::antiderivative;
use crate::chart::{ChartFunction as CF, RingCtx};
use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::scalar::{solve_linear, GaussRat, Scalar};

pub type Matrix = Vec<Vec<CF>>;

#[derive(Clone, Debug, PartialEq)]
pub enum GeometrySpec {
    Flat(usize),
    /// Fubini–Study metric on the standard affine chart of `CPⁿ`.
    Fs(usize),
    /// Kähler potential `φ` (so `ω_{ij̄} = ∂_i∂_{j̄}φ`, `ρ = −φ`) known to total degree `order`.
    PotentialJet { n: usize, potential: Poly, order: u32 },
}

impl GeometrySpec {
    pub fn cp1() -> Self {
        GeometrySpec::Fs(1)
    }

    /// `flat:<n>`, `cp1-fs`, `fs:<n>`. Jet specs need file contents and are
    /// built by the caller.
    pub fn parse(name: &str) -> Result<Self> {
        if name == "cp1-fs" || name == "cp1_fs" {
            return Ok(GeometrySpec::Fs(1));
        }
        let parse_n = |s: &str| -> Result<usize> {
            let n: usize = s.parse().map_err(|_| Error::UnsupportedGeometry(name.into()))?;
            if n == 0 || n > crate::poly::MAX_DIM {
                return Err(Error::UnsupportedGeometry(name.into()));
            }
            Ok(n)
        };
        if let Some(n) = name.strip_prefix("flat:") {
            return Ok(GeometrySpec::Flat(parse_n(n)?));
        }
        if let Some(n) = name.strip_prefix("fs:") {
            return Ok(GeometrySpec::Fs(parse_n(n)?));
        }
        Err(Error::UnsupportedGeometry(name.into()))
    }
}

/// Complex vector field `V = V^i ∂_{z^i} + V^{ī} ∂_{z̄^i}`.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    pub v: Vec<CF>,
    pub vb: Vec<CF>,
}

impl VectorField {
    pub fn zero(ctx: RingCtx) -> Self {
        VectorField { v: vec![CF::zero(ctx); ctx.n], vb: vec![CF::zero(ctx); ctx.n] }
    }

    /// Real field `v ∂ + conj(v) ∂̄` from its holomorphic components.
    pub fn real_from(v: Vec<CF>) -> Self {
        let vb = v.iter().map(|c| c.conj()).collect();
        VectorField { v, vb }
    }

    pub fn n(&self) -> usize {
        self.v.len()
    }

    /// Component in the real-index convention.
    pub fn comp(&self, a: usize) -> &CF {
        let n = self.n();
        if a < n {
            &self.v[a]
        } else {
            &self.vb[a - n]
        }
    }

    pub fn is_real(&self) -> bool {
        self.v.iter().zip(&self.vb).all(|(a, b)| a.conj() == *b)
    }

    pub fn is_zero(&self) -> bool {
        self.v.iter().chain(&self.vb).all(|c| c.is_zero())
    }

    pub fn apply(&self, f: &CF) -> CF {
        let mut out = CF::zero(f.ctx());
        for a in 0..2 * self.n() {
            let c = self.comp(a);
            if !c.is_exact_zero() {
                out.add_assign(&c.mul(&f.deriv(a)));
            }
        }
        out
    }

    pub fn bracket(&self, o: &VectorField) -> VectorField {
        let n = self.n();
        let comp = |a: usize| self.apply(o.comp(a)).sub(&o.apply(self.comp(a)));
        VectorField { v: (0..n).map(comp).collect(), vb: (n..2 * n).map(comp).collect() }
    }

    pub fn add(&self, o: &VectorField) -> VectorField {
        VectorField {
            v: self.v.iter().zip(&o.v).map(|(a, b)| a.add(b)).collect(),
            vb: self.vb.iter().zip(&o.vb).map(|(a, b)| a.add(b)).collect(),
        }
    }

    pub fn scale(&self, c: &GaussRat) -> VectorField {
        VectorField { v: self.v.iter().map(|a| a.scale(c)).collect(), vb: self.vb.iter().map(|a| a.scale(c)).collect() }
    }
}

#[derive(Clone, Debug)]
pub struct KahlerGeometry {
    pub spec: GeometrySpec,
    pub ctx: RingCtx,
    omega: Matrix,
    /// `inv[j][k] = ω^{j̄k}`.
    inv: Matrix,
    /// `gamma[i][j][k] = Γ^i_{jk}`.
    gamma: Vec<Matrix>,
    ricci: Matrix,
    drho: Vec<CF>,
}

fn mat_mul(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    let ctx = a[0][0].ctx();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|k| {
                    let mut s = CF::zero(ctx);
                    for j in 0..n {
                        s.add_assign(&a[i][j].mul(&b[j][k]));
                    }
                    s
                })
                .collect()
        })
        .collect()
}

fn const_inverse(m: &[Vec<GaussRat>]) -> Option<Vec<Vec<GaussRat>>> {
    let n = m.len();
    let mut cols = Vec::new();
    for k in 0..n {
        let e: Vec<GaussRat> = (0..n).map(|i| if i == k { GaussRat::one() } else { GaussRat::zero() }).collect();
        cols.push(solve_linear(m.to_vec(), e)?);
    }
    // Verify uniqueness: singular systems may still be consistent.
    for i in 0..n {
        for k in 0..n {
            let mut s = GaussRat::zero();
            for j in 0..n {
                s += &(&m[i][j] * &cols[k][j]);
            }
            let want = if i == k { GaussRat::one() } else { GaussRat::zero() };
            if s != want {
                return None;
            }
        }
    }
    Some((0..n).map(|j| (0..n).map(|k| cols[k][j].clone()).collect()).collect())
}

impl KahlerGeometry {
    pub fn new(spec: GeometrySpec) -> Result<Self> {
        let (ctx, omega, inv, drho) = match &spec {
            GeometrySpec::Flat(n) => {
                let ctx = RingCtx::flat(*n);
                let id: Matrix = (0..*n)
                    .map(|i| (0..*n).map(|j| CF::int(ctx, (i == j) as i64)).collect())
                    .collect();
                let drho = (0..*n).map(|i| CF::zb(ctx, i).neg()).collect();
                (ctx, id.clone(), id, drho)
            }
            GeometrySpec::Fs(n) => {
                let ctx = RingCtx::fs(*n);
                let d = Poly::fs_d(*n);
                // ω_{ij̄} = (D δ_ij − z̄^i z^j) / D², ω^{j̄k} = D (δ_jk + z̄^j z^k).
                let omega = (0..*n)
                    .map(|i| {
                        (0..*n)
                            .map(|j| {
                                let mut p = Poly::zb(i).mul(&Poly::z(j)).neg();
                                if i == j {
                                    p = p.add(&d);
                                }
                                CF::new(ctx, p, 2)
                            })
                            .collect()
                    })
                    .collect();
                let dcf = CF::from_poly(ctx, d.clone());
                let inv = (0..*n)
                    .map(|j| {
                        (0..*n)
                            .map(|k| {
                                let mut p = Poly::zb(j).mul(&Poly::z(k));
                                if j == k {
                                    p = p.add(&Poly::one());
                                }
                                dcf.mul(&CF::from_poly(ctx, p))
                            })
                            .collect()
                    })
                    .collect();
                let drho = (0..*n).map(|i| CF::new(ctx, Poly::zb(i).neg(), 1)).collect();
                (ctx, omega, inv, drho)
            }
            GeometrySpec::PotentialJet { n, potential, order } => {
                if *order < 2 {
                    return Err(Error::Invalid(format!("jet order {order} < 2")));
                }
                let ctx = RingCtx::flat(*n);
                let phi = CF::jet(ctx, potential.clone(), *order as i32);
                let omega: Matrix =
                    (0..*n).map(|i| (0..*n).map(|j| phi.dz(i).dzb(j)).collect()).collect();
                let inv = Self::jet_inverse(&omega)?;
                let drho = (0..*n).map(|i| phi.dz(i).neg()).collect();
                (ctx, omega, inv, drho)
            }
        };
        let n = ctx.n;
        // Γ^i_{jk} = ω^{l̄i} ∂_j ω_{kl̄}
        let gamma: Vec<Matrix> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        (0..n)
                            .map(|k| {
                                let mut s = CF::zero(ctx);
                                for l in 0..n {
                                    s.add_assign(&inv[l][i].mul(&omega[k][l].dz(j)));
                                }
                                s
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        // Ric_{kl̄} = −∂_{l̄} Γ^i_{ik}
        let ricci = (0..n)
            .map(|k| {
                (0..n)
                    .map(|l| {
                        let mut s = CF::zero(ctx);
                        for i in 0..n {
                            s.add_assign(&gamma[i][i][k].dzb(l));
                        }
                        s.neg()
                    })
                    .collect()
            })
            .collect();
        Ok(KahlerGeometry { spec, ctx, omega, inv, gamma, ricci, drho })
    }

    pub fn flat(n: usize) -> Self {
        Self::new(GeometrySpec::Flat(n)).expect("flat geometry")
    }

    pub fn cp1() -> Self {
        Self::new(GeometrySpec::Fs(1)).expect("cp1 geometry")
    }

    fn jet_inverse(omega: &Matrix) -> Result<Matrix> {
        let n = omega.len();
        let ctx = omega[0][0].ctx();
        let valid = omega[0][0].jet_order().unwrap_or(0);
        let origin = vec![GaussRat::zero(); n];
        let mut a0 = vec![vec![GaussRat::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                let v = omega[i][j].eval(&origin).and_then(|s| s.as_gauss());
                a0[i][j] = v.ok_or_else(|| Error::NonKahler("metric at base point is not a rational".into()))?;
            }
        }
        // Hermitian positive definite at the base point (checked via leading minors).
        for i in 0..n {
            for j in 0..n {
                if a0[i][j] != a0[j][i].conj() {
                    return Err(Error::NonKahler("metric is not hermitian".into()));
                }
            }
        }
        let a0inv = const_inverse(&a0).ok_or_else(|| Error::NonKahler("degenerate metric".into()))?;
        if !leading_minors_positive(&a0) {
            return Err(Error::NonKahler("metric is not positive".into()));
        }
        let lift = |m: &Vec<Vec<GaussRat>>| -> Matrix {
            m.iter().map(|r| r.iter().map(|c| CF::jet(ctx, Poly::constant(c.clone()), valid)).collect()).collect()
        };
        let a0inv_cf = lift(&a0inv);
        // ω = A0 (1 + A0⁻¹E); E vanishes at the origin so the Neumann series terminates.
        let e: Matrix = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| omega[i][j].sub(&CF::jet(ctx, Poly::constant(a0[i][j].clone()), valid)))
                    .collect()
            })
            .collect();
        let x = mat_mul(&a0inv_cf, &e);
        let mut term = a0inv_cf.clone();
        let mut sum = a0inv_cf.clone();
        for step in 0..=valid.max(0) {
            term = mat_mul(&x, &term);
            let sign = if step % 2 == 0 { -1 } else { 1 };
            for i in 0..n {
                for j in 0..n {
                    sum[i][j] = sum[i][j].add(&term[i][j].scale_int(sign));
                }
            }
        }
        Ok(sum)
    }

    pub fn n(&self) -> usize {
        self.ctx.n
    }

    pub fn name(&self) -> String {
        match &self.spec {
            GeometrySpec::Flat(n) => format!("flat:{n}"),
            GeometrySpec::Fs(1) => "cp1-fs".into(),
            GeometrySpec::Fs(n) => format!("fs:{n}"),
            GeometrySpec::PotentialJet { n, order, .. } => format!("jet:{n}:{order}"),
        }
    }

    pub fn is_jet(&self) -> bool {
        matches!(self.spec, GeometrySpec::PotentialJet { .. })
    }

    pub fn zero(&self) -> CF {
        CF::zero(self.ctx)
    }

    pub fn constant(&self, s: &Scalar) -> CF {
        CF::constant(self.ctx, s)
    }

    /// `ω_{ij̄}`.
    pub fn omega(&self, i: usize, j: usize) -> &CF {
        &self.omega[i][j]
    }

    /// `ω^{j̄i}`.
    pub fn omega_inv(&self, j: usize, i: usize) -> &CF {
        &self.inv[j][i]
    }

    /// `ω^{ij̄} = −ω^{j̄i}`.
    pub fn omega_up(&self, i: usize, j: usize) -> CF {
        self.inv[j][i].neg()
    }

    /// `Γ^i_{jk}`; the conjugate symbols are `Γ^{ī}_{j̄k̄} = conj(Γ^i_{jk})`.
    pub fn christoffel(&self, i: usize, j: usize, k: usize) -> &CF {
        &self.gamma[i][j][k]
    }

    pub fn christoffel_bar(&self, i: usize, j: usize, k: usize) -> CF {
        self.gamma[i][j][k].conj()
    }

    /// Riemannian Ricci tensor `Ric_{kl̄} = −∂_{l̄} Γ^i_{ik} = −∂_k ∂_{l̄} log det ω`.
    pub fn ricci(&self, k: usize, l: usize) -> &CF {
        &self.ricci[k][l]
    }

    pub fn ricci_matrix(&self) -> Matrix {
        self.ricci.clone()
    }

    /// Components of `Ric_X` in the Karabegov normalization, `∂_k ∂_{l̄} log det ω = −Ric_{kl̄}`.
    /// This is the sign for which `−(1/ħ)ω + Ric_X` is the Berezin-Toeplitz class
    /// (on CP¹: `−2ω_{11̄}`).
    pub fn ricci_form(&self, k: usize, l: usize) -> CF {
        self.ricci[k][l].neg()
    }

    pub fn ricci_form_matrix(&self) -> Matrix {
        self.ricci.iter().map(|r| r.iter().map(CF::neg).collect()).collect()
    }

    /// `R_{ij̄kl̄}` normalized so that `ω^{kl̄} R_{ij̄kl̄} = Ric_{ij̄}`.
    pub fn curvature(&self, i: usize, j: usize, k: usize, l: usize) -> CF {
        let n = self.n();
        let mut s = self.omega[k][l].dz(i).dzb(j);
        for p in 0..n {
            for q in 0..n {
                let t = self.inv[p][q].mul(&self.omega[k][p].dz(i)).mul(&self.omega[q][l].dzb(j));
                s = s.sub(&t);
            }
        }
        s
    }

    /// `∂_i ρ`.
    pub fn drho(&self, i: usize) -> &CF {
        &self.drho[i]
    }

    /// `∂_{j̄} ρ` (ρ is real).
    pub fn drho_bar(&self, j: usize) -> CF {
        self.drho[j].conj()
    }

    /// `Δf = 4π ω^{j̄i} ∂_{j̄} ∂_i f` (on flat space `π(∂_x² + ∂_y²)`).
    pub fn laplacian(&self, f: &CF) -> CF {
        let n = self.n();
        let mut s = self.zero();
        for i in 0..n {
            let fi = f.dz(i);
            for j in 0..n {
                s.add_assign(&self.inv[j][i].mul(&fi.dzb(j)));
            }
        }
        s.scale_int(4).mul_pi(1)
    }

    /// `V_f = (2π/i)(∂_i f ω^{ij̄} ∂_{z̄^j} + ∂_{j̄} f ω^{j̄i} ∂_{z^i})`, so `ι_{V_f} ω = df`.
    pub fn hamiltonian_vf(&self, f: &CF) -> VectorField {
        let n = self.n();
        let two_pi_over_i = GaussRat::complex((0, 1), (-2, 1));
        let mut v = vec![self.zero(); n];
        let mut vb = vec![self.zero(); n];
        for i in 0..n {
            for j in 0..n {
                v[i].add_assign(&f.dzb(j).mul(&self.inv[j][i]));
                vb[j].add_assign(&f.dz(i).mul(&self.omega_up(i, j)));
            }
        }
        let fix = |c: &CF| c.scale(&two_pi_over_i).mul_pi(1);
        VectorField { v: v.iter().map(fix).collect(), vb: vb.iter().map(fix).collect() }
    }

    /// `{f, g} = −ω(V_f, V_g) = V_f(g)`.
    pub fn poisson(&self, f: &CF, g: &CF) -> CF {
        self.hamiltonian_vf(f).apply(g)
    }

    /// `df` in the real-index convention (`dz^i` then `dz̄^j`).
    pub fn differential(&self, f: &CF) -> Vec<CF> {
        (0..2 * self.n()).map(|a| f.deriv(a)).collect()
    }

    /// `ι_V ω = (i/2π) ω_{ij̄} (V^i dz̄^j − V^{j̄} dz^i)` in the real-index convention.
    pub fn iota_omega(&self, v: &VectorField) -> Vec<CF> {
        self.iota_11(&self.omega, v)
    }

    /// Contraction of `(i/2π) c_{ij̄} dz^i ∧ dz̄^j` with `V`.
    pub fn iota_11(&self, c: &Matrix, v: &VectorField) -> Vec<CF> {
        let n = self.n();
        let i_over_2pi = GaussRat::complex((0, 1), (1, 2));
        let mut out = vec![self.zero(); 2 * n];
        for i in 0..n {
            for j in 0..n {
                out[n + j].add_assign(&c[i][j].mul(&v.v[i]));
                out[i] = out[i].sub(&c[i][j].mul(&v.vb[j]));
            }
        }
        out.iter().map(|x| x.scale(&i_over_2pi).mul_pi(-1)).collect()
    }

    /// Whether `L_V` annihilates the (1,1)-form with components `c_{ij̄}`.
    pub fn lie_preserves_11(&self, c: &Matrix, v: &VectorField) -> bool {
        let n = self.n();
        // Full antisymmetric component matrix on the 2n real-index coordinates.
        let comp = |a: usize, b: usize| -> CF {
            if a < n && b >= n {
                c[a][b - n].clone()
            } else if a >= n && b < n {
                c[b][a - n].neg()
            } else {
                self.zero()
            }
        };
        for a in 0..2 * n {
            for b in (a + 1)..2 * n {
                let mut s = v.apply(&comp(a, b));
                for e in 0..2 * n {
                    let ca = comp(e, b);
                    if !ca.is_zero() {
                        s.add_assign(&ca.mul(&v.comp(e).deriv(a)));
                    }
                    let cb = comp(a, e);
                    if !cb.is_zero() {
                        s.add_assign(&cb.mul(&v.comp(e).deriv(b)));
                    }
                }
                if !s.is_zero() {
                    return false;
                }
            }
        }
        true
    }

    /// `(preserves_omega, preserves_J)`.
    pub fn lie_compat(&self, v: &VectorField) -> (bool, bool) {
        let n = self.n();
        let preserves_j = (0..n).all(|i| (0..n).all(|j| v.v[i].dzb(j).is_zero() && v.vb[i].dz(j).is_zero()));
        (self.lie_preserves_11(&self.omega, v), preserves_j)
    }

    /// `F` with `dF = form`, normalized by `F(0) = 0`.
    pub fn antiderivative(&self, form: &[CF]) -> Result<CF> {
        antiderivative(self.ctx, form)
    }

    /// First jet component whose accuracy has been used up, if any.
    pub fn check_jets(&self, fs: &[&CF], what: &str) -> Result<()> {
        if fs.iter().any(|f| f.jet_exhausted()) {
            return Err(Error::JetExhausted(what.into()));
        }
        Ok(())
    }
}

fn leading_minors_positive(a: &[Vec<GaussRat>]) -> bool {
    // Hermitian input: each leading minor is real; compute by exact elimination.
    let n = a.len();
    let mut m: Vec<Vec<GaussRat>> = a.to_vec();
    for k in 0..n {
        let p = m[k][k].clone();
        if !p.is_real() || p.re <= num_rational::BigRational::from_integer(0.into()) {
            return false;
        }
        let inv = p.inv().unwrap();
        for i in (k + 1)..n {
            let f = &m[i][k] * &inv;
            for j in k..n {
                let t = &f * &m[k][j];
                m[i][j] -= &t;
            }
        }
    }
    true
}

/// Hamiltonian `su(2)` action on a chart, with vector fields, structure
/// constants `[ξ_a, ξ_b] = Σ_d c_{ab}^d ξ_d` and equivariant moment maps.
#[derive(Clone, Debug)]
pub struct LieAlgebraAction {
    pub labels: Vec<String>,
    pub structure: Vec<Vec<Vec<GaussRat>>>,
    pub fields: Vec<VectorField>,
    pub moment: Vec<CF>,
}

impl LieAlgebraAction {
    pub fn dim(&self) -> usize {
        self.fields.len()
    }

    /// Coordinates of `[ξ_a, ξ_b]` in the basis.
    pub fn bracket_coords(&self, a: usize, b: usize) -> Vec<GaussRat> {
        self.structure[a][b].clone()
    }

    /// `Σ_d coeffs_d · items_d`.
    pub fn combine<T, F>(coeffs: &[GaussRat], items: &[T], zero: T, scale_add: F) -> T
    where
        F: Fn(&T, &T, &GaussRat) -> T,
    {
        let mut acc = zero;
        for (c, x) in coeffs.iter().zip(items) {
            if !c.is_zero() {
                acc = scale_add(&acc, x, c);
            }
        }
        acc
    }

    /// A single-generator sub-action (abelian), e.g. one rotation.
    pub fn restrict(&self, a: usize) -> LieAlgebraAction {
        LieAlgebraAction {
            labels: vec![self.labels[a].clone()],
            structure: vec![vec![vec![GaussRat::zero()]]],
            fields: vec![self.fields[a].clone()],
            moment: vec![self.moment[a].clone()],
        }
    }
}

/// The rotation action of `su(2)` on `CP¹` with `[ξ_a, ξ_b] = −ε_{abc} ξ_c`.
pub fn su2_action(geom: &KahlerGeometry) -> Result<LieAlgebraAction> {
    if geom.spec != GeometrySpec::Fs(1) {
        return Err(Error::UnsupportedGeometry(format!("su2 action needs cp1-fs, got {}", geom.name())));
    }
    let ctx = geom.ctx;
    let z = Poly::z(0);
    let z2 = z.mul(&z);
    let half = GaussRat::frac(1, 2);
    let half_i = GaussRat::complex((0, 1), (1, 2));
    let v1 = CF::from_poly(ctx, Poly::one().add(&z2).scale(&half));
    let v2 = CF::from_poly(ctx, Poly::one().sub(&z2).scale(&half_i));
    let v3 = CF::from_poly(ctx, z.scale(&GaussRat::i()));
    let fields: Vec<VectorField> = [v1, v2, v3].into_iter().map(|v| VectorField::real_from(vec![v])).collect();

    let mut structure = vec![vec![vec![GaussRat::zero(); 3]; 3]; 3];
    for (a, b, c) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
        structure[a][b][c] = GaussRat::int(-1);
        structure[b][a][c] = GaussRat::int(1);
    }
    for a in 0..3 {
        for b in 0..3 {
            let lhs = fields[a].bracket(&fields[b]);
            let rhs = LieAlgebraAction::combine(&structure[a][b], &fields, VectorField::zero(ctx), |acc, x, c| {
                acc.add(&x.scale(c))
            });
            assert_eq!(lhs, rhs, "su(2) structure constants");
        }
    }

    let raw: Vec<CF> =
        fields.iter().map(|v| geom.antiderivative(&geom.iota_omega(v))).collect::<Result<_>>()?;
    // Equivariance {μ_a, μ_b} = μ_{[a,b]} fixes the constants: μ_c = −{ν_a, ν_b}.
    let mut moment = vec![geom.zero(); 3];
    for (a, b, c) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
        moment[c] = geom.poisson(&raw[a], &raw[b]).neg();
    }
    for (v, mu) in fields.iter().zip(&moment) {
        assert_eq!(geom.iota_omega(v), geom.differential(mu), "moment map equation");
    }
    Ok(LieAlgebraAction { labels: vec!["rot1".into(), "rot2".into(), "rot3".into()], structure, fields, moment })
}
