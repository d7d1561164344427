//! Deterministic generators for randomized suites: certified nilpotent
//! potentials over canonical-element gradings, isotropic Willmore column
//! data, constraint-satisfying S⁴ quadruples, and twisted plus-loop
//! dressings.

use num_complex::Complex64;

use crate::exact::{GaussQ, Ring};
use crate::linalg::{c, CMat};
use crate::loops::LaurentLoop;
use crate::poly::Poly;
use crate::potentials::{
    make_nilpotent_potential, make_s4_potential, make_willmore_potential, ColumnPair,
    GradedCoefficient, NormalizedPotential, WillmorePotentialSpec,
};
use crate::roots::{CanonicalElement, RootSystem};
use crate::Result;

/// SplitMix64: deterministic, seedable, dependency-free.
pub struct Rng(u64);

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform in [−1, 1).
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }

    /// Small Gaussian integer with entries in {−2..2}.
    pub fn small_gauss(&mut self) -> GaussQ {
        let re = self.below(5) as i64 - 2;
        let im = self.below(5) as i64 - 2;
        GaussQ::from_ints(re, im)
    }

    /// Small nonzero dyadic complex number.
    pub fn small_complex(&mut self) -> Complex64 {
        loop {
            let re = (self.below(9) as f64 - 4.0) / 4.0;
            let im = (self.below(9) as f64 - 4.0) / 4.0;
            if re != 0.0 || im != 0.0 {
                return Complex64::new(re, im);
            }
        }
    }

    /// Random polynomial of degree ≤ max_deg with small Gaussian-integer
    /// coefficients (possibly zero).
    pub fn poly(&mut self, max_deg: usize) -> Poly<GaussQ> {
        let coeffs = (0..=max_deg).map(|_| self.small_gauss()).collect();
        Poly::from_coeffs(coeffs)
    }
}

/// Selectors whose canonical element has an integer coefficient vector
/// (so γ_ξ and exp(πξ) are honest matrix loops / diagonal involutions):
/// those containing both or neither of the two spinor nodes m−1, m.
pub fn integer_selectors(m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for mask in 1u32..(1 << m) {
        let sel: Vec<usize> = (1..=m).filter(|k| mask & (1 << (k - 1)) != 0).collect();
        let has_a = sel.contains(&(m - 1));
        let has_b = sel.contains(&m);
        if has_a == has_b {
            out.push(sel);
        }
    }
    out
}

pub fn all_selectors(m: usize) -> Vec<Vec<usize>> {
    (1u32..(1 << m))
        .map(|mask| (1..=m).filter(|k| mask & (1 << (k - 1)) != 0).collect())
        .collect()
}

/// Random certified potential with values in the positive grading of ξ
/// (odd components only in symmetric-space mode).
pub fn random_graded_potential(
    rng: &mut Rng,
    xi: &CanonicalElement,
    symmetric: bool,
    max_deg: usize,
) -> Result<NormalizedPotential> {
    let r = xi.height;
    let mut comps = Vec::new();
    for j in 0..r as usize {
        if symmetric && j % 2 != 0 {
            continue;
        }
        let basis_len = xi.grading_basis(j as i32 + 1).len();
        if basis_len == 0 {
            continue;
        }
        let polys = (0..basis_len).map(|_| rng.poly(max_deg)).collect();
        comps.push(GradedCoefficient { j, polys });
    }
    make_nilpotent_potential(xi, &comps, symmetric)
}

/// Random twisted plus loop exp(Σ_k λ^k B_k) with B_k in the positive
/// grading and D-parity matching (−1)^k, so the exponential terminates and
/// the loop is σ-twisted.
pub fn random_twisted_plus_loop(
    rng: &mut Rng,
    xi: &CanonicalElement,
    max_pow: usize,
) -> Result<LaurentLoop> {
    let dim = xi.dim();
    let mut exponent = LaurentLoop::zero(dim);
    for k in 1..=max_pow {
        let mut b = CMat::zeros(dim, dim);
        for j in 1..=xi.height {
            if (j.rem_euclid(2) == 0) != (k % 2 == 0) {
                continue;
            }
            for basis in xi.grading_basis(j) {
                if rng.below(3) == 0 {
                    let w = rng.small_complex() * 0.25;
                    b = b.add(&basis.scale(c(w.re, w.im)));
                }
            }
        }
        if b.max_abs() > 0.0 {
            exponent = exponent.add(&LaurentLoop::single(k as i32, b));
        }
    }
    // exponential by the series; positive grading makes it terminate
    let mut sum = LaurentLoop::identity(dim);
    let mut term = LaurentLoop::identity(dim);
    for k in 1..=(2 * dim) {
        term = term.mul(&exponent)?.scale(c(1.0 / k as f64, 0.0));
        if term.is_empty() {
            break;
        }
        sum = sum.add(&term);
    }
    Ok(sum)
}

/// The totally isotropic column plane of the Willmore normal forms:
/// u = (1, 1, 0, 0)ᵗ and w = (0, 0, 1, i)ᵗ satisfy uᵗI_{1,3}u = wᵗI_{1,3}w
/// = uᵗI_{1,3}w = 0, so any polynomial combinations give exactly isotropic
/// B̂₁ columns.
pub fn isotropic_type_two_pair(rng: &mut Rng, max_deg: usize) -> ColumnPair {
    let p = rng.poly(max_deg);
    let q = rng.poly(max_deg);
    let i = GaussQ::imag_unit();
    ColumnPair::TypeII {
        h: [p.clone(), p, q.clone(), q.scale(&i)],
    }
}

pub fn random_type_one_pair(rng: &mut Rng, max_deg: usize) -> ColumnPair {
    ColumnPair::TypeI {
        h1: rng.poly(max_deg),
        h3: rng.poly(max_deg),
        h1_hat: rng.poly(max_deg),
        h3_hat: rng.poly(max_deg),
    }
}

/// Random potential of the given column family at m (type-(ii) data drawn
/// from the isotropic plane, type-(i) data free).
pub fn random_willmore_potential(
    rng: &mut Rng,
    m: usize,
    family: usize,
    max_deg: usize,
) -> Result<NormalizedPotential> {
    let pairs = (0..m - 2)
        .map(|idx| {
            if idx < family - 1 {
                isotropic_type_two_pair(rng, max_deg)
            } else {
                random_type_one_pair(rng, max_deg)
            }
        })
        .collect();
    make_willmore_potential(&WillmorePotentialSpec { m, family, pairs })
}

/// Constraint-satisfying S⁴ quadruple: withderivative factors
/// f₁' = a·c, f₂' = a·d, f₃' = b·c, f₄' = −b·d the identity
/// f₁'f₄' + f₂'f₃' = 0 holds for any polynomials a, b, c, d.
pub fn random_s4_quadruple(rng: &mut Rng, factor_deg: usize) -> [Poly<GaussQ>; 4] {
    let nonzero_poly = |rng: &mut Rng| loop {
        let p = rng.poly(factor_deg);
        if !p.is_zero() {
            return p;
        }
    };
    let a = nonzero_poly(rng);
    let b = nonzero_poly(rng);
    let cc = nonzero_poly(rng);
    let d = nonzero_poly(rng);
    let z0 = GaussQ::zero();
    [
        a.mul(&cc).antiderivative_from(&z0),
        a.mul(&d).antiderivative_from(&z0),
        b.mul(&cc).antiderivative_from(&z0),
        b.mul(&d).neg().antiderivative_from(&z0),
    ]
}

/// Random S⁴ potential via the quadruple construction.
pub fn random_s4_potential(rng: &mut Rng, factor_deg: usize) -> Result<NormalizedPotential> {
    make_s4_potential(&random_s4_quadruple(rng, factor_deg))
}

/// Twisted plus-loop dressing for the Willmore form: exp(λB₁ + λ²B₁B₂)
/// with B's the p-block values of random isotropic potentials; all triple
/// products vanish because the columns share one isotropic plane.
pub fn random_willmore_dressing(rng: &mut Rng, m: usize, scale: f64) -> Result<LaurentLoop> {
    let pot1 = random_willmore_potential(rng, m, m - 1, 1)?;
    let pot2 = random_willmore_potential(rng, m, m - 1, 1)?;
    let z1 = rng.small_complex();
    let z2 = rng.small_complex();
    let b1 = pot1.eta.eval_cmat(z1).scale(c(scale, 0.0));
    let b2 = pot2.eta.eval_cmat(z2).scale(c(scale, 0.0));
    let dim = 2 * m;
    let mut exponent = LaurentLoop::single(1, b1.clone());
    exponent = exponent.add(&LaurentLoop::single(2, b1.mul(&b2)));
    let mut sum = LaurentLoop::identity(dim);
    let mut term = LaurentLoop::identity(dim);
    for k in 1..=(2 * dim) {
        term = term.mul(&exponent)?.scale(c(1.0 / k as f64, 0.0));
        if term.is_empty() {
            break;
        }
        sum = sum.add(&term);
    }
    Ok(sum)
}

/// Random integer-lattice canonical element for the factorization suites.
pub fn random_integer_canonical<'a>(
    rng: &mut Rng,
    sys: &'a RootSystem,
) -> Result<CanonicalElement> {
    let selectors = integer_selectors(sys.m);
    let sel = &selectors[rng.below(selectors.len())];
    sys.canonical_element(sel)
}
