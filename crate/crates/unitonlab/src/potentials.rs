//! Construction and validation of normalized potentials η = λ⁻¹·η₋₁(z) dz:
//! generic nilpotent-valued potentials built from a canonical-element
//! grading, the Willmore column families, and the S⁴ representation family.

use num_complex::Complex64;

use crate::exact::{GaussQ, Ring};
use crate::liealg::FormSpec;
use crate::linalg::CMat;
use crate::loops::LaurentLoop;
use crate::poly::{Poly, PolyMat};
use crate::roots::CanonicalElement;
use crate::{Result, UnitonError};

/// Why the Picard iteration on this potential terminates.
#[derive(Clone, Debug, PartialEq)]
pub enum Certificate {
    /// Values in Σ_{j≥1} g^ξ_j for a canonical ξ; products of more than
    /// `steps` factors vanish (steps = 2·a₁ ≤ r(ξ)+1).
    GradedNilpotent { height: i32, steps: usize },
    /// Isotropic Willmore block structure: η₋₁³ = 0, so at most 2 steps.
    Isotropic,
    /// No certificate; integration must be capped by the caller.
    None,
}

impl Certificate {
    pub fn step_bound(&self) -> Option<usize> {
        match self {
            Certificate::GradedNilpotent { steps, .. } => Some(*steps),
            Certificate::Isotropic => Some(2),
            Certificate::None => None,
        }
    }
}

/// A λ⁻¹-weighted matrix-polynomial 1-form with nilpotent value space.
#[derive(Clone, Debug)]
pub struct NormalizedPotential {
    pub dim: usize,
    /// η₋₁(z): the coefficient of λ⁻¹, exact polynomial entries.
    pub eta: PolyMat<GaussQ>,
    pub certificate: Certificate,
    pub poles: Vec<Complex64>,
    /// Reality/twisting data when the potential belongs to a pipeline form.
    pub form: Option<FormSpec>,
    /// σ-conjugator for twisting checks (always available).
    pub twist_conjugator: CMat,
}

impl NormalizedPotential {
    /// η(z) as a loop: the single λ⁻¹ Fourier coefficient.
    pub fn eval_loop(&self, z: Complex64) -> LaurentLoop {
        LaurentLoop::single(-1, self.eta.eval_cmat(z))
    }

    pub fn eta_c64(&self) -> PolyMat<Complex64> {
        self.eta.to_c64()
    }

    /// Twisting residual of the loop-valued form at sample z: the λ⁻¹
    /// coefficient must anticommute with the σ-conjugator.
    pub fn twist_residual(&self, z: Complex64) -> f64 {
        let x = self.eta.eval_cmat(z);
        let d = &self.twist_conjugator;
        let d_inv = d.inverse().expect("involution conjugator invertible");
        d.mul(&x).mul(&d_inv).add(&x).max_abs()
    }

    /// Max residual of η₋₁(z) against the span of `basis` at the given
    /// sample points (least-squares projection).
    pub fn value_space_residual(&self, basis: &[CMat], samples: &[Complex64]) -> f64 {
        if basis.is_empty() {
            return samples
                .iter()
                .map(|&z| self.eta.eval_cmat(z).max_abs())
                .fold(0.0, f64::max);
        }
        let n2 = self.dim * self.dim;
        let a = CMat::from_fn(n2, basis.len(), |r, k| basis[k][(r / self.dim, r % self.dim)]);
        let mut worst = 0.0f64;
        for &z in samples {
            let x = self.eta.eval_cmat(z);
            let b = CMat::from_fn(n2, 1, |r, _| x[(r / self.dim, r % self.dim)]);
            let sol = match a.lstsq(&b) {
                Ok(s) => s,
                Err(_) => return f64::INFINITY,
            };
            worst = worst.max(a.mul(&sol).sub(&b).max_abs());
        }
        worst
    }
}

/// Coefficient data for one grading component: polynomials per basis element
/// of g^ξ_{j+1}.
#[derive(Clone, Debug)]
pub struct GradedCoefficient {
    /// Component index j (the coefficient multiplies g^ξ_{j+1}).
    pub j: usize,
    pub polys: Vec<Poly<GaussQ>>,
}

/// Assemble η = λ⁻¹ Σ_j A'_j(z) dz with A'_j valued in g^ξ_{j+1}.
/// In symmetric-space mode only odd target components g^ξ_{2j+1} are
/// permitted (even component indices j).
pub fn make_nilpotent_potential(
    xi: &CanonicalElement,
    coefficients: &[GradedCoefficient],
    symmetric_space: bool,
) -> Result<NormalizedPotential> {
    let r = xi.height;
    if r < 1 {
        return Err(UnitonError::InvalidArgument(
            "canonical element has height 0; no nilpotent components".into(),
        ));
    }
    let dim = xi.dim();
    let mut eta = PolyMat::<GaussQ>::zeros(dim);
    for coeff in coefficients {
        let j = coeff.j;
        if j as i32 > r - 1 {
            return Err(UnitonError::InvalidArgument(format!(
                "component index {j} exceeds r(ξ)−1 = {}",
                r - 1
            )));
        }
        if symmetric_space && j % 2 != 0 {
            return Err(UnitonError::InvalidArgument(format!(
                "even component g^ξ_{} supplied in symmetric-space mode",
                j + 1
            )));
        }
        let basis = xi.grading_basis(j as i32 + 1);
        if coeff.polys.len() != basis.len() {
            return Err(UnitonError::DimensionMismatch(format!(
                "component {j}: {} polynomials for a basis of size {}",
                coeff.polys.len(),
                basis.len()
            )));
        }
        for (p, b) in coeff.polys.iter().zip(basis) {
            if p.is_zero() {
                continue;
            }
            let bq = cmat_to_exact(b);
            for row in 0..dim {
                for col in 0..dim {
                    let w = &bq[row * dim + col];
                    if w.is_zero() {
                        continue;
                    }
                    let add = p.scale(w);
                    let cur = eta.get(row, col).clone();
                    eta.set(row, col, cur.add(&add));
                }
            }
        }
    }
    let two_a1 = (2 * xi.elem.num.iter().copied().max().unwrap_or(0) / xi.elem.den) as usize;
    let form = xi.involution_diag().map(FormSpec::split_orthogonal);
    Ok(NormalizedPotential {
        dim,
        eta,
        certificate: Certificate::GradedNilpotent { height: r, steps: two_a1.max(1) },
        poles: vec![],
        form,
        twist_conjugator: xi.exp_pi_xi(),
    })
}

fn cmat_to_exact(m: &CMat) -> Vec<GaussQ> {
    let mut out = Vec::with_capacity(m.rows() * m.cols());
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            out.push(GaussQ::from_c64(m[(i, j)]));
        }
    }
    out
}

/// One column pair of the Willmore B̂₁ matrix.
#[derive(Clone, Debug)]
pub enum ColumnPair {
    /// v = (h₁, h₁, h₃, ih₃)ᵗ, v̂ = (ĥ₁, ĥ₁, ĥ₃, iĥ₃)ᵗ.
    TypeI {
        h1: Poly<GaussQ>,
        h3: Poly<GaussQ>,
        h1_hat: Poly<GaussQ>,
        h3_hat: Poly<GaussQ>,
    },
    /// v = (h₁, h₂, h₃, h₄)ᵗ, v̂ = i·v.
    TypeII { h: [Poly<GaussQ>; 4] },
}

impl ColumnPair {
    fn columns(&self) -> ([Poly<GaussQ>; 4], [Poly<GaussQ>; 4]) {
        let i = GaussQ::imag_unit();
        match self {
            ColumnPair::TypeI { h1, h3, h1_hat, h3_hat } => (
                [h1.clone(), h1.clone(), h3.clone(), h3.scale(&i)],
                [h1_hat.clone(), h1_hat.clone(), h3_hat.clone(), h3_hat.scale(&i)],
            ),
            ColumnPair::TypeII { h } => (
                h.clone(),
                [h[0].scale(&i), h[1].scale(&i), h[2].scale(&i), h[3].scale(&i)],
            ),
        }
    }

    fn is_type_two(&self) -> bool {
        matches!(self, ColumnPair::TypeII { .. })
    }
}

/// Input for the Willmore column families: family f (1-based) has its first
/// f−1 pairs of type (ii) and the remaining pairs of type (i).
#[derive(Clone, Debug)]
pub struct WillmorePotentialSpec {
    pub m: usize,
    pub family: usize,
    pub pairs: Vec<ColumnPair>,
}

/// Build the 4×(2m−4) matrix B̂₁ from column pairs.
fn assemble_b1(pairs: &[ColumnPair]) -> Vec<[Poly<GaussQ>; 4]> {
    let mut cols = Vec::with_capacity(2 * pairs.len());
    for p in pairs {
        let (v, vhat) = p.columns();
        cols.push(v);
        cols.push(vhat);
    }
    cols
}

/// Exact isotropy check B̂₁ᵗ I_{1,3} B̂₁ = 0; returns the first offending
/// column pair (j, l) on failure.
fn isotropy_check(cols: &[[Poly<GaussQ>; 4]]) -> std::result::Result<(), (usize, usize)> {
    for j in 0..cols.len() {
        for l in j..cols.len() {
            let mut acc = Poly::<GaussQ>::zero();
            for row in 0..4 {
                let sign = if row == 0 {
                    GaussQ::from_ints(-1, 0)
                } else {
                    GaussQ::one()
                };
                acc = acc.add(&cols[j][row].mul(&cols[l][row]).scale(&sign));
            }
            if !acc.is_zero() {
                return Err((j, l));
            }
        }
    }
    Ok(())
}

/// η from a 4×(2m−4) isotropic B̂₁:
/// η₋₁ = [[0, B̂₁], [−B̂₁ᵗ I_{1,3}, 0]].
fn eta_from_b1(m: usize, cols: &[[Poly<GaussQ>; 4]]) -> PolyMat<GaussQ> {
    let dim = 2 * m;
    let ncols = 2 * m - 4;
    assert_eq!(cols.len(), ncols);
    let mut eta = PolyMat::<GaussQ>::zeros(dim);
    for (cidx, col) in cols.iter().enumerate() {
        for (row, p) in col.iter().enumerate() {
            // upper-right block B̂₁
            eta.set(row, 4 + cidx, p.clone());
            // lower-left block −B̂₁ᵗI_{1,3}: entry (4+cidx, row) carries the
            // metric sign −I_{1,3}[row] = (+1, −1, −1, −1)
            let sign = if row == 0 {
                GaussQ::one()
            } else {
                GaussQ::from_ints(-1, 0)
            };
            eta.set(4 + cidx, row, p.scale(&sign));
        }
    }
    eta
}

/// Build a Willmore normalized potential per the column-family patterns and
/// verify the isotropy identity B̂₁ᵗ I_{1,3} B̂₁ = 0 exactly.
pub fn make_willmore_potential(spec: &WillmorePotentialSpec) -> Result<NormalizedPotential> {
    let m = spec.m;
    if m < 3 {
        return Err(UnitonError::InvalidArgument("need m ≥ 3 (n = 2m−4 ≥ 2)".into()));
    }
    if spec.family < 1 || spec.family > m - 1 {
        return Err(UnitonError::InvalidArgument(format!(
            "family index must lie in 1..={}",
            m - 1
        )));
    }
    if spec.pairs.len() != m - 2 {
        return Err(UnitonError::DimensionMismatch(format!(
            "need {} column pairs, got {}",
            m - 2,
            spec.pairs.len()
        )));
    }
    for (idx, p) in spec.pairs.iter().enumerate() {
        let expect_two = idx < spec.family - 1;
        if p.is_type_two() != expect_two {
            return Err(UnitonError::InvalidArgument(format!(
                "family {} expects pair {} of type ({})",
                spec.family,
                idx + 1,
                if expect_two { "ii" } else { "i" }
            )));
        }
    }
    let cols = assemble_b1(&spec.pairs);
    if let Err((j, l)) = isotropy_check(&cols) {
        return Err(UnitonError::ConstraintViolated(format!(
            "isotropy B̂₁ᵗI_{{1,3}}B̂₁ = 0 fails at column pair ({j}, {l})"
        )));
    }
    let eta = eta_from_b1(m, &cols);
    let n = 2 * m - 4;
    Ok(NormalizedPotential {
        dim: 2 * m,
        eta,
        certificate: Certificate::Isotropic,
        poles: vec![],
        form: Some(FormSpec::willmore(n)),
        twist_conjugator: FormSpec::willmore(n).twist_mat(),
    })
}

/// The S⁴ family: B̂₁ built from f₁..f₄ (polynomials in z) under the
/// constraint f₁'f₄' + f₂'f₃' = 0.
pub fn make_s4_potential(f: &[Poly<GaussQ>; 4]) -> Result<NormalizedPotential> {
    let fp: Vec<Poly<GaussQ>> = f.iter().map(|p| p.derivative()).collect();
    let residual = fp[0].mul(&fp[3]).add(&fp[1].mul(&fp[2]));
    if !residual.is_zero() {
        return Err(UnitonError::ConstraintViolated(format!(
            "f₁'f₄' + f₂'f₃' ≠ 0; residual polynomial coefficients {:?}",
            residual
                .coeffs
                .iter()
                .map(|c| c.to_c64())
                .collect::<Vec<_>>()
        )));
    }
    let cols = s4_b1_columns(&fp);
    debug_assert!(isotropy_check(&cols).is_ok());
    let eta = eta_from_b1(3, &cols);
    Ok(NormalizedPotential {
        dim: 6,
        eta,
        certificate: Certificate::Isotropic,
        poles: vec![],
        form: Some(FormSpec::willmore(2)),
        twist_conjugator: FormSpec::willmore(2).twist_mat(),
    })
}

/// The two columns of the S⁴ B̂₁ in terms of the derivatives f'.
pub fn s4_b1_columns(fp: &[Poly<GaussQ>]) -> Vec<[Poly<GaussQ>; 4]> {
    let half = GaussQ::from_ratio(1, 2, 0, 1);
    let ihalf = GaussQ::from_ratio(0, 1, 1, 2);
    let a = fp[2].sub(&fp[1]); // f₃' − f₂'
    let b = fp[2].add(&fp[1]); // f₃' + f₂'
    let d = fp[3].sub(&fp[0]); // f₄' − f₁'
    let e = fp[3].add(&fp[0]); // f₄' + f₁'
    let col1 = [
        a.scale(&ihalf),
        b.scale(&ihalf),
        d.scale(&half),
        e.scale(&ihalf),
    ];
    let col2 = [
        a.scale(&half).neg(),
        b.scale(&half).neg(),
        d.scale(&ihalf),
        e.scale(&half).neg(),
    ];
    vec![col1, col2]
}

/// The explicit B̂₁ of the S⁶ Willmore two-sphere example:
/// ½ [[2iz, −2z, −i, 1], [−2iz, 2z, −i, 1], [−2, −2i, −z, −iz], [2i, −2, −iz, z]].
pub fn s6_example_potential() -> NormalizedPotential {
    let z = |re_num: i64, re_den: i64, im_num: i64, im_den: i64| {
        Poly::monomial(GaussQ::from_ratio(re_num, re_den, im_num, im_den), 1)
    };
    let k = |re_num: i64, re_den: i64, im_num: i64, im_den: i64| {
        Poly::constant(GaussQ::from_ratio(re_num, re_den, im_num, im_den))
    };
    // columns of ½·(display): rows listed top to bottom
    let cols: Vec<[Poly<GaussQ>; 4]> = vec![
        [z(0, 1, 1, 1), z(0, 1, -1, 1), k(-1, 1, 0, 1), k(0, 1, 1, 1)],
        [z(-1, 1, 0, 1), z(1, 1, 0, 1), k(0, 1, -1, 1), k(-1, 1, 0, 1)],
        [k(0, 1, -1, 2), k(0, 1, -1, 2), z(-1, 2, 0, 1), z(0, 1, -1, 2)],
        [k(1, 2, 0, 1), k(1, 2, 0, 1), z(0, 1, -1, 2), z(1, 2, 0, 1)],
    ];
    assert!(isotropy_check(&cols).is_ok(), "S⁶ example isotropy");
    let eta = eta_from_b1(4, &cols);
    NormalizedPotential {
        dim: 8,
        eta,
        certificate: Certificate::Isotropic,
        poles: vec![],
        form: Some(FormSpec::willmore(4)),
        twist_conjugator: FormSpec::willmore(4).twist_mat(),
    }
}
