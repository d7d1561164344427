//! The concrete Lie-theoretic setting: G = SO⁺(1,n+3) with
//! K = SO⁺(1,3)×SO(n), the involutions σ, τ, θ as conjugators, Cartan
//! projections, and the compact-dual coordinate change.

use num_complex::Complex64;

use crate::linalg::{c, CMat};
use crate::loops::{dual_conjugator, metric_mat, LaurentLoop, RealForm};
use crate::{Result, UnitonError};

/// The data the factorization layer works against: the diagonal bilinear
/// form preserved by the ambient complex loop group, the signature of the
/// noncompact real form, and the σ-twisting conjugator. The compact real
/// form always carries the definite metric.
#[derive(Clone, Debug, PartialEq)]
pub struct FormSpec {
    pub ambient: Vec<i8>,
    pub noncompact: Vec<i8>,
    pub twist: Vec<i8>,
}

impl FormSpec {
    /// The Willmore setting: ambient and noncompact metric I_{1,n+3},
    /// twist D = diag(−I₄, I_n).
    pub fn willmore(n: usize) -> Self {
        let dim = n + 4;
        let mut metric = vec![1i8; dim];
        metric[0] = -1;
        let mut twist = vec![1i8; dim];
        for t in twist.iter_mut().take(4) {
            *t = -1;
        }
        FormSpec { ambient: metric.clone(), noncompact: metric, twist }
    }

    /// Split-orthogonal coordinates (plain complex orthogonal loops) where a
    /// diagonal involution D both twists and fixes the noncompact signature.
    pub fn split_orthogonal(d: Vec<i8>) -> Self {
        FormSpec { ambient: vec![1; d.len()], noncompact: d.clone(), twist: d }
    }

    pub fn dim(&self) -> usize {
        self.ambient.len()
    }

    pub fn ambient_mat(&self) -> CMat {
        metric_mat(&self.ambient)
    }

    pub fn twist_mat(&self) -> CMat {
        metric_mat(&self.twist)
    }

    /// Reality data of the compact real form (definite target metric).
    pub fn compact_form(&self) -> RealForm {
        RealForm { ambient: self.ambient.clone(), target: vec![1; self.dim()] }
    }

    /// Reality data of the noncompact real form.
    pub fn noncompact_form(&self) -> RealForm {
        RealForm { ambient: self.ambient.clone(), target: self.noncompact.clone() }
    }

    /// Conjugator into compact-dual coordinates (squares to the ambient
    /// metric).
    pub fn dual_conjugator(&self) -> CMat {
        dual_conjugator(&self.ambient)
    }

    pub fn noncompact_is_definite(&self) -> bool {
        self.noncompact.iter().all(|&s| s > 0) || self.noncompact.iter().all(|&s| s < 0)
    }
}

/// The Willmore-surface Lie setting with matrices of size (n+4)×(n+4).
#[derive(Clone, Debug)]
pub struct LieSetting {
    pub n: usize,
}

impl LieSetting {
    pub fn new(n: usize) -> Result<Self> {
        if n < 1 {
            return Err(UnitonError::InvalidArgument("need n ≥ 1".into()));
        }
        Ok(LieSetting { n })
    }

    pub fn dim(&self) -> usize {
        self.n + 4
    }

    pub fn form(&self) -> FormSpec {
        FormSpec::willmore(self.n)
    }

    pub fn metric(&self) -> CMat {
        self.form().ambient_mat()
    }

    pub fn sigma(&self) -> CMat {
        self.form().twist_mat()
    }

    pub fn t_c(&self) -> CMat {
        self.form().dual_conjugator()
    }

    /// Residual of Xᵗ I_{1,n+3} + I_{1,n+3} X = 0 (membership in 𝔤^ℂ).
    pub fn algebra_residual(&self, x: &CMat) -> f64 {
        let m = self.metric();
        x.transpose().mul(&m).add(&m.mul(x)).max_abs()
    }

    /// Residual of additionally having real entries (membership in 𝔤).
    pub fn real_algebra_residual(&self, x: &CMat) -> f64 {
        self.algebra_residual(x).max(x.max_imag())
    }

    /// k-part residual: distance from commuting with D.
    pub fn k_residual(&self, x: &CMat) -> f64 {
        let (_, p) = self.split_k_p(x);
        p.max_abs()
    }

    pub fn p_residual(&self, x: &CMat) -> f64 {
        let (k, _) = self.split_k_p(x);
        k.max_abs()
    }

    fn split_k_p(&self, x: &CMat) -> (CMat, CMat) {
        let d = self.sigma();
        let dxd = d.mul(x).mul(&d); // D = D⁻¹
        let half = c(0.5, 0.0);
        let k = x.add(&dxd).scale(half);
        let p = x.sub(&dxd).scale(half);
        (k, p)
    }

    /// Cartan projection: X = ½(X + DXD⁻¹) + ½(X − DXD⁻¹).
    pub fn project_k_p(&self, x: &CMat, tol: f64) -> Result<(CMat, CMat)> {
        if self.algebra_residual(x) > tol * x.max_abs().max(1.0) {
            return Err(UnitonError::NotInAlgebra(format!(
                "residual {:.3e}",
                self.algebra_residual(x)
            )));
        }
        Ok(self.split_k_p(x))
    }

    /// Assemble α_λ = λ⁻¹α_𝔭' + α_𝔨 + λα_𝔭'' with eigenspace checks.
    pub fn alpha_lambda(
        &self,
        alpha_k: &CMat,
        alpha_p_10: &CMat,
        alpha_p_01: &CMat,
        tol: f64,
    ) -> Result<LaurentLoop> {
        if self.k_residual(alpha_k) > tol * alpha_k.max_abs().max(1.0) {
            return Err(UnitonError::NotInAlgebra("α_k not in 𝔨^ℂ".into()));
        }
        for (name, a) in [("α_p'", alpha_p_10), ("α_p''", alpha_p_01)] {
            if self.p_residual(a) > tol * a.max_abs().max(1.0) {
                return Err(UnitonError::NotInAlgebra(format!("{name} not in 𝔭^ℂ")));
            }
        }
        let mut l = LaurentLoop::zero(self.dim());
        l.set_coeff(-1, alpha_p_10.clone());
        l.set_coeff(0, alpha_k.clone());
        l.set_coeff(1, alpha_p_01.clone());
        Ok(l)
    }

    /// Map to compact-dual coordinates: Y = T_c X T_c⁻¹.
    pub fn to_compact_dual(&self, x: &CMat) -> CMat {
        let t = self.t_c();
        let t_inv = t.conj();
        t.mul(x).mul(&t_inv)
    }

    /// Basis of 𝔤^ℂ: metric-antisymmetric elementary matrices, ordered
    /// lexicographically by (a, b).
    pub fn algebra_basis(&self) -> Vec<CMat> {
        so_basis(&self.form().ambient)
    }

    pub fn k_basis(&self) -> Vec<CMat> {
        self.algebra_basis()
            .into_iter()
            .filter(|x| self.k_residual(x) < 1e-12)
            .collect()
    }

    pub fn p_basis(&self) -> Vec<CMat> {
        self.algebra_basis()
            .into_iter()
            .filter(|x| self.p_residual(x) < 1e-12)
            .collect()
    }
}

/// Basis of the complex orthogonal algebra for a diagonal ±1 metric M:
/// elements B_{ab} (a<b) with entry 1 at (a,b) and −M_a·M_b at (b,a).
pub fn so_basis(metric: &[i8]) -> Vec<CMat> {
    let n = metric.len();
    let mut basis = Vec::with_capacity(n * (n - 1) / 2);
    for a in 0..n {
        for b in a + 1..n {
            let mut x = CMat::zeros(n, n);
            x[(a, b)] = c(1.0, 0.0);
            x[(b, a)] = c(-(metric[a] as f64) * (metric[b] as f64), 0.0);
            basis.push(x);
        }
    }
    basis
}

/// Conjugate a whole loop into compact-dual coordinates.
pub fn loop_to_dual(x: &LaurentLoop, form: &FormSpec) -> LaurentLoop {
    let t = form.dual_conjugator();
    let t_inv = t.conj();
    x.lmul_const(&t).rmul_const(&t_inv)
}

pub fn loop_from_dual(y: &LaurentLoop, form: &FormSpec) -> LaurentLoop {
    let t = form.dual_conjugator();
    let t_inv = t.conj();
    y.lmul_const(&t_inv).rmul_const(&t)
}

/// Conjugate-mirror reality helper: a loop form is real on S¹ iff
/// conj(X_j) = X_{−j} for every coefficient.
pub fn reality_residual(l: &LaurentLoop) -> f64 {
    l.conj_flip().sub(l).max_abs()
}

pub type C64 = Complex64;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::span_rank;

    fn setting() -> LieSetting {
        LieSetting::new(4).unwrap()
    }

    #[test]
    fn involution_and_basis_dimensions() {
        let s = setting();
        let d = s.sigma();
        assert!(d.mul(&d).sub(&CMat::identity(8)).max_abs() == 0.0);
        // dim k = 6 + n(n−1)/2, dim p = 4n for n = 4
        let kb = s.k_basis();
        let pb = s.p_basis();
        assert_eq!(kb.len(), 6 + 4 * 3 / 2);
        assert_eq!(pb.len(), 16);
        assert_eq!(kb.len() + pb.len(), s.algebra_basis().len());
        let refs: Vec<&CMat> = kb.iter().chain(pb.iter()).collect();
        assert_eq!(span_rank(&refs, 1e-10), 28);
    }

    #[test]
    fn cartan_relations_on_basis() {
        let s = setting();
        let kb = s.k_basis();
        let pb = s.p_basis();
        for a in &kb {
            for b in &kb {
                assert!(s.k_residual(&a.commutator(b)) < 1e-12); // [k,k] ⊆ k
            }
            for p in &pb {
                assert!(s.p_residual(&a.commutator(p)) < 1e-12); // [k,p] ⊆ p
            }
        }
        for a in &pb {
            for b in &pb {
                assert!(s.k_residual(&a.commutator(b)) < 1e-12); // [p,p] ⊆ k
            }
        }
    }

    #[test]
    fn sigma_commutes_with_conjugation() {
        let s = setting();
        let d = s.sigma();
        for x in s.algebra_basis() {
            let lhs = d.mul(&x.conj()).mul(&d);
            let rhs = d.mul(&x).mul(&d).conj();
            assert!(lhs.sub(&rhs).max_abs() == 0.0);
        }
    }

    #[test]
    fn projections_recombine() {
        let s = setting();
        // random 𝔤^ℂ element as combination of basis
        let basis = s.algebra_basis();
        let mut x = CMat::zeros(8, 8);
        for (k, b) in basis.iter().enumerate() {
            let w = c(((k * 7 % 11) as f64 - 5.0) / 3.0, ((k * 5 % 13) as f64 - 6.0) / 4.0);
            x = x.add(&b.scale(w));
        }
        let (kp, pp) = s.project_k_p(&x, 1e-10).unwrap();
        assert!(kp.add(&pp).sub(&x).max_abs() < 1e-14);
        // block structure: k block-diagonal (4, n), p block-off-diagonal
        for i in 0..8 {
            for j in 0..8 {
                let in_diag_block = (i < 4) == (j < 4);
                if in_diag_block {
                    assert!(pp[(i, j)].norm() < 1e-14);
                } else {
                    assert!(kp[(i, j)].norm() < 1e-14);
                }
            }
        }
        // block-diagonal input → (x, 0); off-diagonal → (0, x)
        let (k2, p2) = s.project_k_p(&kp, 1e-10).unwrap();
        assert!(k2.sub(&kp).max_abs() < 1e-14 && p2.max_abs() < 1e-14);
    }

    #[test]
    fn compact_dual_map() {
        let s = setting();
        assert!(s.to_compact_dual(&CMat::identity(8)).sub(&CMat::identity(8)).max_abs() == 0.0);
        // a boost in SO+(1,7) maps to a complex orthogonal matrix
        let t = 0.4f64;
        let mut x = CMat::identity(8);
        x[(0, 0)] = c(t.cosh(), 0.0);
        x[(0, 5)] = c(t.sinh(), 0.0);
        x[(5, 0)] = c(t.sinh(), 0.0);
        x[(5, 5)] = c(t.cosh(), 0.0);
        let m = s.metric();
        assert!(x.transpose().mul(&m).mul(&x).sub(&m).max_abs() < 1e-12);
        let y = s.to_compact_dual(&x);
        assert!(y.transpose().mul(&y).sub(&CMat::identity(8)).max_abs() < 1e-12);
        // a rotation fixing e_0 stays real orthogonal
        let mut r = CMat::identity(8);
        r[(1, 1)] = c(t.cos(), 0.0);
        r[(1, 2)] = c(t.sin(), 0.0);
        r[(2, 1)] = c(-t.sin(), 0.0);
        r[(2, 2)] = c(t.cos(), 0.0);
        let y = s.to_compact_dual(&r);
        assert!(y.max_imag() < 1e-14);
        assert!(y.transpose().mul(&y).sub(&CMat::identity(8)).max_abs() < 1e-12);
    }

    #[test]
    fn alpha_lambda_structure() {
        let s = setting();
        let z = CMat::zeros(8, 8);
        let l = s.alpha_lambda(&z, &z, &z, 1e-10).unwrap();
        assert!(l.is_empty());
        // reality by construction: α_p'' = conj of α_p', α_k real
        let pb = s.p_basis();
        let ap = pb[0].add(&pb[3].scale(c(0.0, 0.5)));
        let app = ap.conj();
        let kb = s.k_basis();
        let ak = kb[0].add(&kb[2].scale(c(2.0, 0.0)));
        let l = s.alpha_lambda(&ak, &ap, &app, 1e-10).unwrap();
        assert!(reality_residual(&l) < 1e-15);
        // wrong eigenspace rejected
        assert!(s.alpha_lambda(&ap, &ak, &app, 1e-10).is_err());
    }
}
