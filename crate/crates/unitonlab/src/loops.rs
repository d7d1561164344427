//! Matrix-valued Laurent polynomials in the loop parameter λ, with the
//! twisting and reality predicates used by the factorization pipeline.

use std::collections::BTreeMap;


use crate::linalg::{c, CMat, C64};
use crate::{Result, UnitonError};

/// Coefficient-pruning threshold applied after arithmetic.
pub const PRUNE_TOL: f64 = 1e-14;

/// A finite Fourier series λ ↦ Σ_j X_j λ^j with square complex coefficients.
#[derive(Clone, PartialEq, Debug)]
pub struct LaurentLoop {
    dim: usize,
    coeffs: BTreeMap<i32, CMat>,
}

/// Loop classes with machine-checkable membership predicates.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum LoopClass {
    TwistedComplex,
    TwistedReal,
    PlusLoop,
    MinusLoopNormalized,
    BasedLoop,
    Algebraic(usize),
}

/// A real form of the ambient complex orthogonal group, described by the
/// diagonal metric the complex loops preserve (`ambient`) and the diagonal
/// metric of the real form (`target`). A loop x lies in the real form iff
/// T x T⁻¹ has real entries, where T = diag(i at slots where the two metrics
/// disagree); the conjugated matrix is then automatically target-orthogonal.
#[derive(Clone, Debug, PartialEq)]
pub struct RealForm {
    pub ambient: Vec<i8>,
    pub target: Vec<i8>,
}

impl RealForm {
    pub fn conjugator(&self) -> CMat {
        assert_eq!(self.ambient.len(), self.target.len());
        CMat::diag_c(
            &self
                .ambient
                .iter()
                .zip(&self.target)
                .map(|(&a, &t)| if a != t { c(0.0, 1.0) } else { c(1.0, 0.0) })
                .collect::<Vec<_>>(),
        )
    }
}

/// diag(i at metric-negative slots); squares to the metric.
pub fn dual_conjugator(metric: &[i8]) -> CMat {
    CMat::diag_c(
        &metric
            .iter()
            .map(|&s| if s < 0 { c(0.0, 1.0) } else { c(1.0, 0.0) })
            .collect::<Vec<_>>(),
    )
}

pub fn metric_mat(metric: &[i8]) -> CMat {
    CMat::diag_f64(&metric.iter().map(|&s| s as f64).collect::<Vec<_>>())
}

impl LaurentLoop {
    pub fn zero(dim: usize) -> Self {
        LaurentLoop { dim, coeffs: BTreeMap::new() }
    }

    pub fn identity(dim: usize) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(0, CMat::identity(dim));
        LaurentLoop { dim, coeffs }
    }

    pub fn constant(x: CMat) -> Self {
        assert!(x.is_square());
        let dim = x.rows();
        let mut l = LaurentLoop { dim, coeffs: BTreeMap::new() };
        l.set_coeff(0, x);
        l
    }

    pub fn single(exp: i32, x: CMat) -> Self {
        assert!(x.is_square());
        let dim = x.rows();
        let mut l = LaurentLoop { dim, coeffs: BTreeMap::new() };
        l.set_coeff(exp, x);
        l
    }

    pub fn from_coeffs(dim: usize, coeffs: BTreeMap<i32, CMat>) -> Self {
        let mut l = LaurentLoop { dim, coeffs };
        l.prune(PRUNE_TOL);
        l
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coeff(&self, exp: i32) -> CMat {
        self.coeffs
            .get(&exp)
            .cloned()
            .unwrap_or_else(|| CMat::zeros(self.dim, self.dim))
    }

    pub fn coeff_ref(&self, exp: i32) -> Option<&CMat> {
        self.coeffs.get(&exp)
    }

    pub fn set_coeff(&mut self, exp: i32, x: CMat) {
        if x.max_abs() <= PRUNE_TOL {
            self.coeffs.remove(&exp);
        } else {
            self.coeffs.insert(exp, x);
        }
    }

    pub fn exponents(&self) -> Vec<i32> {
        self.coeffs.keys().copied().collect()
    }

    pub fn lo(&self) -> i32 {
        self.coeffs.keys().next().copied().unwrap_or(0)
    }

    pub fn hi(&self) -> i32 {
        self.coeffs.keys().next_back().copied().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn prune(&mut self, tol: f64) {
        self.coeffs.retain(|_, x| x.max_abs() > tol);
    }

    pub fn pruned(mut self, tol: f64) -> Self {
        self.prune(tol);
        self
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.values().map(|x| x.max_abs()).fold(0.0, f64::max)
    }

    pub fn add(&self, o: &LaurentLoop) -> LaurentLoop {
        assert_eq!(self.dim, o.dim);
        let mut out = self.coeffs.clone();
        for (e, x) in &o.coeffs {
            match out.get_mut(e) {
                Some(y) => *y = y.add(x),
                None => {
                    out.insert(*e, x.clone());
                }
            }
        }
        LaurentLoop::from_coeffs(self.dim, out)
    }

    pub fn sub(&self, o: &LaurentLoop) -> LaurentLoop {
        self.add(&o.scale(c(-1.0, 0.0)))
    }

    pub fn scale(&self, s: C64) -> LaurentLoop {
        let coeffs = self.coeffs.iter().map(|(e, x)| (*e, x.scale(s))).collect();
        LaurentLoop::from_coeffs(self.dim, coeffs)
    }

    /// Exact convolution of coefficient series: (a·b)(λ) = a(λ)b(λ).
    pub fn mul(&self, o: &LaurentLoop) -> Result<LaurentLoop> {
        if self.dim != o.dim {
            return Err(UnitonError::DimensionMismatch(format!(
                "loop multiply {} vs {}",
                self.dim, o.dim
            )));
        }
        let mut out: BTreeMap<i32, CMat> = BTreeMap::new();
        for (e1, x1) in &self.coeffs {
            for (e2, x2) in &o.coeffs {
                let e = e1 + e2;
                let prod = x1.mul(x2);
                match out.get_mut(&e) {
                    Some(y) => *y = y.add(&prod),
                    None => {
                        out.insert(e, prod);
                    }
                }
            }
        }
        Ok(LaurentLoop::from_coeffs(self.dim, out))
    }

    /// Multiply by a constant matrix on the left.
    pub fn lmul_const(&self, m: &CMat) -> LaurentLoop {
        let coeffs = self.coeffs.iter().map(|(e, x)| (*e, m.mul(x))).collect();
        LaurentLoop::from_coeffs(self.dim, coeffs)
    }

    /// Multiply by a constant matrix on the right.
    pub fn rmul_const(&self, m: &CMat) -> LaurentLoop {
        let coeffs = self.coeffs.iter().map(|(e, x)| (*e, x.mul(m))).collect();
        LaurentLoop::from_coeffs(self.dim, coeffs)
    }

    /// Horner-style evaluation at λ0 ≠ 0 (λ0 = 0 allowed when lo ≥ 0).
    pub fn eval(&self, lambda: C64) -> Result<CMat> {
        if lambda.norm() == 0.0 && self.lo() < 0 {
            return Err(UnitonError::InvalidArgument(
                "evaluation at λ=0 with negative exponents".into(),
            ));
        }
        // nonnegative part by Horner from the top
        let mut plus = CMat::zeros(self.dim, self.dim);
        for e in (0..=self.hi().max(0)).rev() {
            plus = plus.scale(lambda);
            if let Some(x) = self.coeffs.get(&e) {
                plus = plus.add(x);
            }
        }
        if self.lo() >= 0 {
            return Ok(plus);
        }
        let mu = c(1.0, 0.0) / lambda;
        let mut minus = CMat::zeros(self.dim, self.dim);
        for e in (1..=(-self.lo())).rev() {
            minus = minus.scale(mu);
            if let Some(x) = self.coeffs.get(&(-e)) {
                minus = minus.add(x);
            }
        }
        minus = minus.scale(mu);
        Ok(plus.add(&minus))
    }

    /// λ ↦ −λ substitution: X_j picks up (−1)^j.
    pub fn flip_lambda(&self) -> LaurentLoop {
        let coeffs = self
            .coeffs
            .iter()
            .map(|(e, x)| {
                let s = if e.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                (*e, x.scale(c(s, 0.0)))
            })
            .collect();
        LaurentLoop::from_coeffs(self.dim, coeffs)
    }

    /// Coefficient-wise transpose (equals pointwise transpose).
    pub fn transpose(&self) -> LaurentLoop {
        let coeffs = self
            .coeffs
            .iter()
            .map(|(e, x)| (*e, x.transpose()))
            .collect();
        LaurentLoop::from_coeffs(self.dim, coeffs)
    }

    /// The involution x ↦ conj∘flip: coefficient at j becomes conj(X_{−j}).
    /// On S¹ this is λ ↦ overline{x(λ)} for series with real-form symmetry.
    pub fn conj_flip(&self) -> LaurentLoop {
        let coeffs = self
            .coeffs
            .iter()
            .map(|(e, x)| (-*e, x.conj()))
            .collect();
        LaurentLoop::from_coeffs(self.dim, coeffs)
    }

    /// Pointwise Hermitian adjoint on S¹ as a Laurent series:
    /// coefficient at j becomes adjoint(X_{−j}).
    pub fn star(&self) -> LaurentLoop {
        let coeffs = self
            .coeffs
            .iter()
            .map(|(e, x)| (-*e, x.adjoint()))
            .collect();
        LaurentLoop::from_coeffs(self.dim, coeffs)
    }

    /// Inverse of a loop that is orthogonal for the bilinear form `metric`
    /// (diagonal ±1): x⁻¹ = M⁻¹ xᵗ M, exact on coefficients. Returns the
    /// inverse and the verification residual ‖x·x⁻¹ − I‖.
    pub fn inverse_orthogonal(&self, metric: &[i8]) -> Result<(LaurentLoop, f64)> {
        if metric.len() != self.dim {
            return Err(UnitonError::DimensionMismatch("metric length".into()));
        }
        let m = metric_mat(metric);
        // M⁻¹ = M for diagonal ±1
        let inv_coeffs: BTreeMap<i32, CMat> = self
            .coeffs
            .iter()
            .map(|(e, x)| (*e, m.mul(&x.transpose()).mul(&m)))
            .collect();
        let inv = LaurentLoop::from_coeffs(self.dim, inv_coeffs);
        let res = self
            .mul(&inv)?
            .sub(&LaurentLoop::identity(self.dim))
            .max_abs();
        Ok((inv, res))
    }

    /// Inverse via Neumann series for x = I + N with N supported away from
    /// exponent-0-dominance (nilpotent in practice). Errors if the series
    /// does not vanish within `max_terms`.
    pub fn inverse_unipotent(&self, max_terms: usize) -> Result<LaurentLoop> {
        let ident = LaurentLoop::identity(self.dim);
        let n = self.sub(&ident);
        let mut term = ident.clone();
        let mut acc = ident.clone();
        for _ in 0..max_terms {
            term = term.mul(&n)?.scale(c(-1.0, 0.0));
            if term.is_empty() {
                return Ok(acc);
            }
            acc = acc.add(&term);
        }
        if term.max_abs() < PRUNE_TOL {
            Ok(acc)
        } else {
            Err(UnitonError::InvalidArgument(
                "loop is not unipotent: Neumann series did not terminate".into(),
            ))
        }
    }

    /// Pointwise numeric inverse for diagnostics.
    pub fn inverse_pointwise(&self, lambda: C64) -> Result<CMat> {
        self.eval(lambda)?.inverse()
    }

    /// σ-twisting test: D X_j D⁻¹ = (−1)^j X_j for all j, for an involution
    /// conjugator D (D² proportional to identity). Returns (flag, residual).
    pub fn is_twisted(&self, sigma: &CMat, tol: f64) -> Result<(bool, f64)> {
        let d_inv = sigma.inverse()?;
        let scale = self.max_abs().max(1.0);
        let mut worst = 0.0f64;
        for (e, x) in &self.coeffs {
            let sign = if e.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            let r = sigma
                .mul(x)
                .mul(&d_inv)
                .sub(&x.scale(c(sign, 0.0)))
                .max_abs();
            worst = worst.max(r / scale);
        }
        Ok((worst < tol, worst))
    }

    /// Reality test by sampling λ on S¹ (default 32 points): conjugate into
    /// the real form's coordinates, then require real entries and
    /// target-metric orthogonality at every sample.
    pub fn real_form_residual(&self, form: &RealForm, samples: usize) -> f64 {
        let n = if samples == 0 { 32 } else { samples };
        let t_c = form.conjugator();
        let t_inv = t_c.conj();
        let m_target = metric_mat(&form.target);
        let mut worst = 0.0f64;
        let scale = self.max_abs().max(1.0);
        for k in 0..n {
            let t = 2.0 * std::f64::consts::PI * (k as f64 + 0.37) / n as f64;
            let lam = c(t.cos(), t.sin());
            let x = match self.eval(lam) {
                Ok(x) => x,
                Err(_) => return f64::INFINITY,
            };
            let y = t_c.mul(&x).mul(&t_inv);
            let orth = y
                .transpose()
                .mul(&m_target)
                .mul(&y)
                .sub(&m_target)
                .max_abs();
            let r = orth.max(y.max_imag());
            worst = worst.max(r / scale);
        }
        worst
    }

    pub fn is_real_form(&self, form: &RealForm, tol: f64) -> (bool, f64) {
        let r = self.real_form_residual(form, 32);
        (r < tol, r)
    }

    /// Minimal k with Ad(x)-image of the algebra basis supported in [−k, k].
    /// `x_inv` must be the loop inverse of `x`.
    pub fn adjoint_degree(
        &self,
        x_inv: &LaurentLoop,
        algebra_basis: &[CMat],
        tol: f64,
    ) -> Result<usize> {
        let mut k = 0i32;
        for b in algebra_basis {
            let image = self.rmul_const(b).mul(x_inv)?;
            let scale = image.max_abs().max(1.0);
            for (e, x) in &image.coeffs {
                if x.max_abs() > tol * scale {
                    k = k.max(e.abs());
                }
            }
        }
        Ok(k as usize)
    }

    /// Membership test for the named loop classes.
    pub fn class_residual(&self, class: LoopClass, sigma: &CMat, tol: f64) -> Result<f64> {
        match class {
            LoopClass::TwistedComplex => Ok(self.is_twisted(sigma, tol)?.1),
            LoopClass::TwistedReal => {
                // twisting only; reality needs a RealForm and is reported by
                // real_form_residual
                Ok(self.is_twisted(sigma, tol)?.1)
            }
            LoopClass::PlusLoop => {
                let mut r = 0.0f64;
                for (e, x) in &self.coeffs {
                    if *e < 0 {
                        r = r.max(x.max_abs());
                    }
                }
                Ok(r)
            }
            LoopClass::MinusLoopNormalized => {
                let mut r = 0.0f64;
                for (e, x) in &self.coeffs {
                    if *e > 0 {
                        r = r.max(x.max_abs());
                    }
                }
                let c0 = self.coeff(0).sub(&CMat::identity(self.dim)).max_abs();
                Ok(r.max(c0))
            }
            LoopClass::BasedLoop => Ok(self
                .eval(c(1.0, 0.0))?
                .sub(&CMat::identity(self.dim))
                .max_abs()),
            LoopClass::Algebraic(_) => Ok(0.0),
        }
    }
}
