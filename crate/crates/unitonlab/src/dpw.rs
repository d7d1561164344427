//! Exact Picard integration of nilpotent normalized potentials: the
//! meromorphic frame F₋ solving dF₋ = F₋·η with F₋(z₀) = I, computed by
//! symbolic antidifferentiation over Gaussian rationals, plus
//! Maurer–Cartan verification.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::exact::{GaussQ, Ring};
use crate::linalg::CMat;
use crate::loops::LaurentLoop;
use crate::poly::PolyMat;
use crate::potentials::NormalizedPotential;
use crate::{Result, UnitonError};

/// The normalized meromorphic frame: a z-polynomial with loop values,
/// stored as λ-exponent → z-polynomial matrix (exact coefficients).
#[derive(Clone, Debug)]
pub struct MeromorphicFrame {
    pub dim: usize,
    pub base_point: Complex64,
    pub terms: BTreeMap<i32, PolyMat<GaussQ>>,
    pub steps_used: usize,
    /// Whether dF₋ = F₋·η holds coefficient-exactly in the rational
    /// representation.
    pub mc_exact: bool,
}

impl MeromorphicFrame {
    /// F₋(z) as a matrix Laurent loop.
    pub fn eval_loop(&self, z: Complex64) -> LaurentLoop {
        let mut coeffs = BTreeMap::new();
        for (e, pm) in &self.terms {
            coeffs.insert(*e, pm.eval_cmat(z));
        }
        LaurentLoop::from_coeffs(self.dim, coeffs)
    }

    /// F₋(z, λ) as a matrix.
    pub fn eval_at(&self, z: Complex64, lambda: Complex64) -> Result<CMat> {
        self.eval_loop(z).eval(lambda)
    }

    pub fn lambda_lo(&self) -> i32 {
        self.terms.keys().next().copied().unwrap_or(0)
    }

    pub fn z_degree(&self) -> usize {
        self.terms.values().map(|pm| pm.max_z_degree()).max().unwrap_or(0)
    }
}

/// Exact Picard integration: F₋ = I + Σ_k ∫…∫ η iterated integrals, halting
/// when the next term vanishes identically. Each step multiplies by λ⁻¹, so
/// term k sits at λ-exponent −k.
pub fn picard_integrate(
    eta: &NormalizedPotential,
    z0: Complex64,
    max_steps: usize,
) -> Result<MeromorphicFrame> {
    if !eta.poles.is_empty() {
        return Err(UnitonError::PoleOnDomain(format!(
            "{} pole(s) recorded on the potential",
            eta.poles.len()
        )));
    }
    let bound = match eta.certificate.step_bound() {
        Some(b) => {
            if max_steps == 0 {
                b
            } else {
                b.min(max_steps)
            }
        }
        None => {
            if max_steps == 0 {
                return Err(UnitonError::InvalidArgument(
                    "uncertified potential needs max_steps > 0".into(),
                ));
            }
            max_steps
        }
    };
    let z0q = GaussQ::from_c64(z0);
    let dim = eta.dim;
    let mut terms: BTreeMap<i32, PolyMat<GaussQ>> = BTreeMap::new();
    terms.insert(0, PolyMat::identity(dim));
    let mut current = PolyMat::<GaussQ>::identity(dim);
    let mut steps_used = 0usize;
    for k in 1..=bound + 1 {
        current = current.mul(&eta.eta).antiderivative_from(&z0q);
        if current.is_zero() {
            break;
        }
        if k > bound {
            return Err(UnitonError::PicardNoTermination { max_steps: bound });
        }
        terms.insert(-(k as i32), current.clone());
        steps_used = k;
    }
    // symbolic Maurer–Cartan verification: d/dz F_e = F_{e+1}·B per λ-level
    let mut mc_exact = true;
    for e in (-(steps_used as i32))..=0 {
        let lhs = terms
            .get(&e)
            .map(|pm| pm.derivative())
            .unwrap_or_else(|| PolyMat::zeros(dim));
        let rhs = terms
            .get(&(e + 1))
            .map(|pm| pm.mul(&eta.eta))
            .unwrap_or_else(|| PolyMat::zeros(dim));
        if !lhs.sub(&rhs).is_zero() {
            mc_exact = false;
        }
    }
    Ok(MeromorphicFrame { dim, base_point: z0, terms, steps_used, mc_exact })
}

/// Numeric Maurer–Cartan residual: max over sample z and λ ∈ S¹ of
/// |∂_z F(z,λ) − F(z,λ)·η₋₁(z)·λ⁻¹| with the z-derivative taken exactly on
/// the polynomial representation.
pub fn maurer_cartan_residual(frame: &MeromorphicFrame, eta: &NormalizedPotential) -> f64 {
    let mut worst = 0.0f64;
    let zs: Vec<Complex64> = (0..5)
        .flat_map(|a| {
            (0..5).map(move |b| Complex64::new(-0.8 + 0.4 * a as f64, -0.8 + 0.4 * b as f64))
        })
        .collect();
    for &z in &zs {
        let mut dcoeffs = BTreeMap::new();
        for (e, pm) in &frame.terms {
            dcoeffs.insert(*e, pm.derivative().eval_cmat(z));
        }
        let df = LaurentLoop::from_coeffs(frame.dim, dcoeffs);
        let f = frame.eval_loop(z);
        let feta = match f.mul(&eta.eval_loop(z)) {
            Ok(x) => x,
            Err(_) => return f64::INFINITY,
        };
        let defect = df.sub(&feta);
        for k in 0..8 {
            let t = 2.0 * std::f64::consts::PI * k as f64 / 8.0 + 0.05;
            let lam = Complex64::new(t.cos(), t.sin());
            if let Ok(m) = defect.eval(lam) {
                worst = worst.max(m.max_abs());
            }
        }
    }
    worst
}
