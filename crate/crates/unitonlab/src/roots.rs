//! Root-space machinery for 𝔰𝔬(2m, ℂ), type D_m: maximal torus, roots
//! ±e_i±e_j, the dual basis ξ_k, canonical elements with their integer
//! gradings, heights, γ_ξ, the nilpotent spaces 𝔲⁰_ξ and (𝔲⁰_ξ)_T, and the
//! 𝔭𝔯 ⊕ 𝔮 split.
//!
//! Everything lives in the plain antisymmetric realization (Xᵗ = −X). The
//! torus is spanned by block-rotation generators J_k acting on the
//! coordinate pair (2k, 2k+1); torus elements are stored as exact rational
//! coefficient vectors, so root values and gradings are exact integers.

use std::collections::{BTreeMap, BTreeSet};

use crate::linalg::{c, CMat, C64};
use crate::loops::LaurentLoop;
use crate::{Result, UnitonError};

/// A root ±e_i ± e_j (i < j) of D_m together with its root vector.
#[derive(Clone, Debug)]
pub struct Root {
    pub i: usize,
    pub si: i8,
    pub j: usize,
    pub sj: i8,
    pub vector: CMat,
}

impl Root {
    /// Root value on a torus element with rational coefficient vector
    /// num/den: returns the numerator over the same denominator.
    fn value_num(&self, num: &[i64]) -> i64 {
        self.si as i64 * num[self.i] + self.sj as i64 * num[self.j]
    }
}

/// Torus element ξ = Σ_k (num_k / den) J_k.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TorusElement {
    pub num: Vec<i64>,
    pub den: i64,
}

impl TorusElement {
    fn reduce(mut self) -> Self {
        if self.den == 2 && self.num.iter().all(|n| n % 2 == 0) {
            for n in &mut self.num {
                *n /= 2;
            }
            self.den = 1;
        }
        self
    }
}

/// Maximal torus basis, root list, simple roots, and dual basis for D_m.
pub struct RootSystem {
    pub m: usize,
    pub torus: Vec<CMat>,
    pub roots: Vec<Root>,
}

/// The homomorphism loop λ = e^{it} ↦ exp(t·Σ a_k J_k) for an integer
/// coefficient vector: block rotation by a_k·arg λ on the pair (2k, 2k+1).
pub fn integer_torus_loop(a: &[i32]) -> LaurentLoop {
    let m = a.len();
    let n = 2 * m;
    let mut coeffs: BTreeMap<i32, CMat> = BTreeMap::new();
    for (k, &ak) in a.iter().enumerate() {
        if ak == 0 {
            let e = coeffs.entry(0).or_insert_with(|| CMat::zeros(n, n));
            e[(2 * k, 2 * k)] = c(1.0, 0.0);
            e[(2 * k + 1, 2 * k + 1)] = c(1.0, 0.0);
            continue;
        }
        // cos(a·t) = (λ^a + λ^{−a})/2, sin(a·t) = (λ^a − λ^{−a})/(2i)
        for (e, sgn) in [(ak, 1.0), (-ak, -1.0)] {
            let blk = coeffs.entry(e).or_insert_with(|| CMat::zeros(n, n));
            blk[(2 * k, 2 * k)] += c(0.5, 0.0);
            blk[(2 * k + 1, 2 * k + 1)] += c(0.5, 0.0);
            blk[(2 * k, 2 * k + 1)] += c(0.0, -0.5 * sgn);
            blk[(2 * k + 1, 2 * k)] -= c(0.0, -0.5 * sgn);
        }
    }
    LaurentLoop::from_coeffs(n, coeffs)
}

/// Block-rotation torus generator on the coordinate pair (2k, 2k+1).
fn torus_generator(m: usize, k: usize) -> CMat {
    let n = 2 * m;
    let mut j = CMat::zeros(n, n);
    j[(2 * k, 2 * k + 1)] = c(1.0, 0.0);
    j[(2 * k + 1, 2 * k)] = c(-1.0, 0.0);
    j
}

/// Eigenvector v_±^k = e_{2k} ± i e_{2k+1} of J_k with eigenvalue ±i.
fn pair_eigenvector(m: usize, k: usize, sign: i8) -> Vec<C64> {
    let n = 2 * m;
    let mut v = vec![c(0.0, 0.0); n];
    v[2 * k] = c(1.0, 0.0);
    v[2 * k + 1] = c(0.0, sign as f64);
    v
}

fn outer_antisym(v: &[C64], w: &[C64]) -> CMat {
    let n = v.len();
    CMat::from_fn(n, n, |a, b| v[a] * w[b] - w[a] * v[b])
}

/// Builds the torus basis, the D_m root list, the fundamental-chamber simple
/// roots and the dual basis data.
pub fn build_torus_and_roots(m: usize) -> Result<RootSystem> {
    if m < 2 {
        return Err(UnitonError::InvalidArgument("type D_m needs m ≥ 2".into()));
    }
    let torus = (0..m).map(|k| torus_generator(m, k)).collect();
    let mut roots = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            for (si, sj) in [(1i8, 1i8), (1, -1), (-1, 1), (-1, -1)] {
                let v = pair_eigenvector(m, i, si);
                let w = pair_eigenvector(m, j, sj);
                roots.push(Root { i, si, j, sj, vector: outer_antisym(&v, &w) });
            }
        }
    }
    Ok(RootSystem { m, torus, roots })
}

impl RootSystem {
    pub fn dim(&self) -> usize {
        2 * self.m
    }

    pub fn algebra_dim(&self) -> usize {
        self.m * (2 * self.m - 1)
    }

    /// Simple roots of the fundamental chamber a_1 ≥ … ≥ a_{m−1} ≥ |a_m|:
    /// θ_k = e_k − e_{k+1} for k = 1..m−1 and θ_m = e_{m−1} + e_m.
    /// Returned as (i, si, j, sj), 0-indexed coordinates.
    pub fn simple_roots(&self) -> Vec<(usize, i8, usize, i8)> {
        let m = self.m;
        let mut s: Vec<(usize, i8, usize, i8)> =
            (0..m - 1).map(|k| (k, 1i8, k + 1, -1i8)).collect();
        s.push((m - 2, 1, m - 1, 1));
        s
    }

    /// Dual basis ξ_1..ξ_m with θ_j(ξ_k) = √−1·δ_jk.
    pub fn dual_basis(&self) -> Vec<TorusElement> {
        let m = self.m;
        let mut out = Vec::with_capacity(m);
        for k in 1..=m {
            let elem = if k <= m - 2 {
                let mut num = vec![0i64; m];
                for n in num.iter_mut().take(k) {
                    *n = 1;
                }
                TorusElement { num, den: 1 }
            } else if k == m - 1 {
                let mut num = vec![1i64; m];
                num[m - 1] = -1;
                TorusElement { num, den: 2 }
            } else {
                TorusElement { num: vec![1i64; m], den: 2 }
            };
            out.push(elem);
        }
        out
    }

    /// ξ = Σ multipliers_k · ξ_k (selector weights over the dual basis).
    pub fn torus_element(&self, multipliers: &[i64]) -> Result<TorusElement> {
        if multipliers.len() != self.m {
            return Err(UnitonError::InvalidArgument(
                "multiplier vector length must equal m".into(),
            ));
        }
        let duals = self.dual_basis();
        let mut num = vec![0i64; self.m];
        // common denominator 2
        for (w, d) in multipliers.iter().zip(&duals) {
            let scale = if d.den == 1 { 2 } else { 1 };
            for (acc, n) in num.iter_mut().zip(&d.num) {
                *acc += w * n * scale;
            }
        }
        Ok(TorusElement { num, den: 2 }.reduce())
    }

    /// Canonical element for a nonempty selector ⊆ {1..m}.
    pub fn canonical_element(&self, selector: &[usize]) -> Result<CanonicalElement> {
        if selector.is_empty() {
            return Err(UnitonError::InvalidArgument("empty selector".into()));
        }
        let set: BTreeSet<usize> = selector.iter().copied().collect();
        if set.iter().any(|&k| k < 1 || k > self.m) {
            return Err(UnitonError::InvalidArgument(format!(
                "selector indices must lie in 1..={}",
                self.m
            )));
        }
        let mut mult = vec![0i64; self.m];
        for &k in &set {
            mult[k - 1] = 1;
        }
        let elem = self.torus_element(&mult)?;
        self.grade(elem, Some(set))
    }

    /// Grading data for an arbitrary integer combination of the dual basis.
    pub fn graded_element(&self, multipliers: &[i64]) -> Result<CanonicalElement> {
        let elem = self.torus_element(multipliers)?;
        self.grade(elem, None)
    }

    fn grade(
        &self,
        elem: TorusElement,
        selector: Option<BTreeSet<usize>>,
    ) -> Result<CanonicalElement> {
        // lattice test: every root value must be an integer
        let mut levels: BTreeMap<i32, Vec<CMat>> = BTreeMap::new();
        let mut root_levels: BTreeMap<i32, Vec<usize>> = BTreeMap::new();
        for (idx, r) in self.roots.iter().enumerate() {
            let vn = r.value_num(&elem.num);
            if vn % elem.den != 0 {
                return Err(UnitonError::InvalidArgument(format!(
                    "element is not in the integer lattice: root value {}/{}",
                    vn, elem.den
                )));
            }
            let j = (vn / elem.den) as i32;
            levels.entry(j).or_default().push(r.vector.clone());
            root_levels.entry(j).or_default().push(idx);
        }
        // torus sits in level 0
        for t in &self.torus {
            levels.entry(0).or_default().push(t.clone());
        }
        let height = *levels.keys().max().unwrap();
        Ok(CanonicalElement {
            m: self.m,
            selector,
            elem,
            levels,
            root_levels,
            height,
            torus_dim: self.m,
        })
    }
}

/// Kinds of graded subspaces derived from a canonical element.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SubspaceKind {
    /// 𝔣^ξ_j = ⊕_{k≤j} g^ξ_k
    FUpTo(i32),
    /// (𝔣^ξ_j)^⊥ = ⊕_{j<k≤r} g^ξ_k
    FPerp(i32),
    /// 𝔲⁰_ξ = ⊕_{0≤j<r} λ^j (𝔣^ξ_j)^⊥
    U0,
    /// (𝔲⁰_ξ)_T = ⊕_{0≤2j<r} λ^{2j} (𝔣^ξ_{2j})^⊥
    U0T,
    /// 𝔭𝔯 = Σ_{j≥0} g^ξ_j
    Pr,
    /// 𝔮 = Σ_{j<0} g^ξ_j
    Q,
}

/// Basis of a graded subspace; each element carries its λ-weight (zero for
/// the purely algebraic subspaces).
#[derive(Clone, Debug)]
pub struct GradedSubspace {
    pub kind: SubspaceKind,
    pub elements: Vec<(i32, CMat)>,
}

impl GradedSubspace {
    pub fn dim(&self) -> usize {
        self.elements.len()
    }

    pub fn basis_refs(&self) -> Vec<&CMat> {
        self.elements.iter().map(|(_, x)| x).collect()
    }
}

/// A torus element with its ad-grading of 𝔰𝔬(2m, ℂ).
pub struct CanonicalElement {
    pub m: usize,
    pub selector: Option<BTreeSet<usize>>,
    pub elem: TorusElement,
    levels: BTreeMap<i32, Vec<CMat>>,
    root_levels: BTreeMap<i32, Vec<usize>>,
    pub height: i32,
    torus_dim: usize,
}

impl CanonicalElement {
    pub fn dim(&self) -> usize {
        2 * self.m
    }

    /// Occupied grading levels.
    pub fn levels(&self) -> Vec<i32> {
        self.levels.keys().copied().collect()
    }

    pub fn grading_basis(&self, j: i32) -> &[CMat] {
        self.levels.get(&j).map(|v| v.as_slice()).unwrap_or(&[])
    }

    pub fn grading_dims(&self) -> BTreeMap<i32, usize> {
        self.levels.iter().map(|(j, v)| (*j, v.len())).collect()
    }

    /// Root indices (into the parent system) sitting at level j.
    pub fn root_indices(&self, j: i32) -> &[usize] {
        self.root_levels.get(&j).map(|v| v.as_slice()).unwrap_or(&[])
    }

    pub fn total_dim(&self) -> usize {
        self.levels.values().map(|v| v.len()).sum()
    }

    pub fn torus_dim(&self) -> usize {
        self.torus_dim
    }

    /// The matrix ξ itself.
    pub fn xi_matrix(&self) -> CMat {
        let n = self.dim();
        let mut x = CMat::zeros(n, n);
        for k in 0..self.m {
            let a = self.elem.num[k] as f64 / self.elem.den as f64;
            x[(2 * k, 2 * k + 1)] = c(a, 0.0);
            x[(2 * k + 1, 2 * k)] = c(-a, 0.0);
        }
        x
    }

    /// exp(tξ) as a matrix (closed-form block rotations).
    pub fn exp_t_xi(&self, t: f64) -> CMat {
        let n = self.dim();
        let mut x = CMat::zeros(n, n);
        for k in 0..self.m {
            let a = self.elem.num[k] as f64 / self.elem.den as f64;
            let (s, co) = (a * t).sin_cos();
            x[(2 * k, 2 * k)] = c(co, 0.0);
            x[(2 * k, 2 * k + 1)] = c(s, 0.0);
            x[(2 * k + 1, 2 * k)] = c(-s, 0.0);
            x[(2 * k + 1, 2 * k + 1)] = c(co, 0.0);
        }
        x
    }

    /// exp(πξ), exact from the integer data. Entries are 0, ±1.
    pub fn exp_pi_xi(&self) -> CMat {
        let n = self.dim();
        let mut x = CMat::zeros(n, n);
        for k in 0..self.m {
            // angle = π·num/den with den ∈ {1, 2}
            let q = if self.elem.den == 1 {
                (2 * self.elem.num[k]).rem_euclid(4)
            } else {
                self.elem.num[k].rem_euclid(4)
            };
            let (co, s) = match q {
                0 => (1.0, 0.0),
                1 => (0.0, 1.0),
                2 => (-1.0, 0.0),
                _ => (0.0, -1.0),
            };
            x[(2 * k, 2 * k)] = c(co, 0.0);
            x[(2 * k, 2 * k + 1)] = c(s, 0.0);
            x[(2 * k + 1, 2 * k)] = c(-s, 0.0);
            x[(2 * k + 1, 2 * k + 1)] = c(co, 0.0);
        }
        x
    }

    /// exp(πξ) as a diagonal ±1 involution, available when ξ has integer
    /// coefficients.
    pub fn involution_diag(&self) -> Option<Vec<i8>> {
        if self.elem.den != 1 {
            return None;
        }
        let mut d = Vec::with_capacity(self.dim());
        for k in 0..self.m {
            let s = if self.elem.num[k].rem_euclid(2) == 0 { 1i8 } else { -1i8 };
            d.push(s);
            d.push(s);
        }
        Some(d)
    }

    /// γ_ξ(λ) = exp(tξ), λ = e^{it}, as a matrix Laurent loop. Requires ξ to
    /// have integer coefficients (otherwise the loop lives in a cover).
    pub fn gamma_xi_loop(&self) -> Result<LaurentLoop> {
        if self.elem.den != 1 {
            return Err(UnitonError::InvalidArgument(
                "γ_ξ is not single-valued in λ: ξ has half-integer coefficients".into(),
            ));
        }
        let a: Vec<i32> = self.elem.num.iter().map(|&n| n as i32).collect();
        Ok(integer_torus_loop(&a))
    }

    /// Decompose x into its grading components via Lagrange projectors built
    /// from ad ξ. Returns level → component; the reconstruction is exact up
    /// to roundoff when x lies in the algebra.
    pub fn grade_components(&self, x: &CMat) -> BTreeMap<i32, CMat> {
        let xi = self.xi_matrix();
        let grades: Vec<i32> = self.levels();
        let mut out = BTreeMap::new();
        for &g in &grades {
            let mut y = x.clone();
            for &h in &grades {
                if h == g {
                    continue;
                }
                // y ← (ad ξ − i·h)(y) / (i(g − h))
                let ad = xi.mul(&y).sub(&y.mul(&xi));
                let shifted = ad.sub(&y.scale(c(0.0, h as f64)));
                y = shifted.scale(c(1.0, 0.0) / c(0.0, (g - h) as f64));
            }
            out.insert(g, y);
        }
        out
    }

    /// The single grading level x lives in (error if mixed or zero).
    pub fn grade_of(&self, x: &CMat, tol: f64) -> Result<i32> {
        let comps = self.grade_components(x);
        let scale = x.max_abs().max(1.0);
        let mut found = None;
        for (g, comp) in &comps {
            if comp.max_abs() > tol * scale {
                if found.is_some() {
                    return Err(UnitonError::NotInAlgebra(
                        "element is not in a single grading component".into(),
                    ));
                }
                found = Some(*g);
            }
        }
        found.ok_or_else(|| UnitonError::NotInAlgebra("element is zero".into()))
    }

    /// Conjugation by γ_ξ: an element of g^ξ_g maps to the loop λ^{−g}·x.
    pub fn gamma_conjugate(&self, x: &CMat, tol: f64) -> Result<LaurentLoop> {
        let g = self.grade_of(x, tol)?;
        Ok(LaurentLoop::single(-g, x.clone()))
    }

    /// 𝔭𝔯 ⊕ 𝔮 split.
    pub fn pr_q_split(&self) -> (GradedSubspace, GradedSubspace) {
        let mut pr = Vec::new();
        let mut q = Vec::new();
        for (&j, basis) in &self.levels {
            for b in basis {
                if j >= 0 {
                    pr.push((0, b.clone()));
                } else {
                    q.push((0, b.clone()));
                }
            }
        }
        (
            GradedSubspace { kind: SubspaceKind::Pr, elements: pr },
            GradedSubspace { kind: SubspaceKind::Q, elements: q },
        )
    }

    /// (𝔣^ξ_j)^⊥ = ⊕_{j<k≤r} g^ξ_k.
    pub fn f_perp(&self, j: i32) -> GradedSubspace {
        let mut elems = Vec::new();
        for (&k, basis) in &self.levels {
            if k > j && k <= self.height {
                for b in basis {
                    elems.push((0, b.clone()));
                }
            }
        }
        GradedSubspace { kind: SubspaceKind::FPerp(j), elements: elems }
    }

    /// 𝔲⁰_ξ with λ-weights; `symmetric` restricts to even λ-weights
    /// ((𝔲⁰_ξ)_T).
    pub fn u0_basis(&self, symmetric: bool) -> GradedSubspace {
        let mut elems = Vec::new();
        let mut j = 0;
        while j < self.height {
            if !symmetric || j % 2 == 0 {
                for (&k, basis) in &self.levels {
                    if k > j && k <= self.height {
                        for b in basis {
                            elems.push((j, b.clone()));
                        }
                    }
                }
            }
            j += 1;
        }
        GradedSubspace {
            kind: if symmetric { SubspaceKind::U0T } else { SubspaceKind::U0 },
            elements: elems,
        }
    }
}
