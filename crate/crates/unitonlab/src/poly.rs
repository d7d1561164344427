//! Univariate polynomials (in the surface parameter `z`) over a generic
//! scalar ring, plus square matrices of such polynomials. Both the floating
//! and the exact Gaussian-rational paths instantiate these.

use num_complex::Complex64;

use crate::exact::{GaussQ, Ring};

/// Polynomial with coefficients in ascending degree; trailing zeros trimmed.
#[derive(Clone, PartialEq, Debug)]
pub struct Poly<R: Ring> {
    pub coeffs: Vec<R>,
}

impl<R: Ring> Poly<R> {
    pub fn zero() -> Self {
        Poly { coeffs: vec![] }
    }

    pub fn constant(c: R) -> Self {
        let mut p = Poly { coeffs: vec![c] };
        p.trim();
        p
    }

    pub fn from_coeffs(coeffs: Vec<R>) -> Self {
        let mut p = Poly { coeffs };
        p.trim();
        p
    }

    /// The monomial `c·z^k`.
    pub fn monomial(c: R, k: usize) -> Self {
        let mut coeffs = vec![R::zero(); k + 1];
        coeffs[k] = c;
        let mut p = Poly { coeffs };
        p.trim();
        p
    }

    fn trim(&mut self) {
        while matches!(self.coeffs.last(), Some(c) if c.is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn add(&self, o: &Poly<R>) -> Poly<R> {
        let n = self.coeffs.len().max(o.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            let a = self.coeffs.get(k).cloned().unwrap_or_else(R::zero);
            let b = o.coeffs.get(k).cloned().unwrap_or_else(R::zero);
            out.push(a.add(&b));
        }
        Poly::from_coeffs(out)
    }

    pub fn sub(&self, o: &Poly<R>) -> Poly<R> {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Poly<R> {
        Poly { coeffs: self.coeffs.iter().map(|c| c.neg()).collect() }
    }

    pub fn scale(&self, s: &R) -> Poly<R> {
        let mut p = Poly { coeffs: self.coeffs.iter().map(|c| c.mul(s)).collect() };
        p.trim();
        p
    }

    pub fn mul(&self, o: &Poly<R>) -> Poly<R> {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![R::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].add(&a.mul(b));
            }
        }
        Poly::from_coeffs(out)
    }

    pub fn eval(&self, z: &R) -> R {
        let mut acc = R::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(z).add(c);
        }
        acc
    }

    pub fn derivative(&self) -> Poly<R> {
        if self.coeffs.len() <= 1 {
            return Poly::zero();
        }
        let coeffs = self.coeffs[1..]
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let mut s = R::zero();
                for _ in 0..=k {
                    s = s.add(c);
                }
                s
            })
            .collect();
        Poly::from_coeffs(coeffs)
    }

    /// Antiderivative vanishing at `z0`.
    pub fn antiderivative_from(&self, z0: &R) -> Poly<R> {
        let mut coeffs = vec![R::zero()];
        for (k, c) in self.coeffs.iter().enumerate() {
            coeffs.push(c.div_int((k + 1) as i64));
        }
        let mut p = Poly::from_coeffs(coeffs);
        let at_z0 = p.eval(z0);
        p = p.sub(&Poly::constant(at_z0));
        p
    }

    pub fn map<S: Ring>(&self, f: impl Fn(&R) -> S) -> Poly<S> {
        Poly::from_coeffs(self.coeffs.iter().map(f).collect())
    }
}

impl Poly<GaussQ> {
    pub fn to_c64_poly(&self) -> Poly<Complex64> {
        self.map(|c| c.to_c64())
    }
}

impl Poly<Complex64> {
    pub fn to_exact(&self) -> Poly<GaussQ> {
        self.map(|c| GaussQ::from_c64(*c))
    }
}

/// Square matrix with polynomial entries, row-major.
#[derive(Clone, PartialEq, Debug)]
pub struct PolyMat<R: Ring> {
    pub dim: usize,
    pub entries: Vec<Poly<R>>,
}

impl<R: Ring> PolyMat<R> {
    pub fn zeros(dim: usize) -> Self {
        PolyMat { dim, entries: vec![Poly::zero(); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = PolyMat::zeros(dim);
        for i in 0..dim {
            m.entries[i * dim + i] = Poly::constant(R::one());
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> &Poly<R> {
        &self.entries[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, p: Poly<R>) {
        self.entries[i * self.dim + j] = p;
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|p| p.is_zero())
    }

    pub fn add(&self, o: &PolyMat<R>) -> PolyMat<R> {
        assert_eq!(self.dim, o.dim);
        PolyMat {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&o.entries)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    pub fn sub(&self, o: &PolyMat<R>) -> PolyMat<R> {
        assert_eq!(self.dim, o.dim);
        PolyMat {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&o.entries)
                .map(|(a, b)| a.sub(b))
                .collect(),
        }
    }

    pub fn mul(&self, o: &PolyMat<R>) -> PolyMat<R> {
        assert_eq!(self.dim, o.dim);
        let n = self.dim;
        let mut out = PolyMat::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = o.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let prod = a.mul(b);
                    out.entries[i * n + j] = out.entries[i * n + j].add(&prod);
                }
            }
        }
        out
    }

    pub fn scale(&self, s: &R) -> PolyMat<R> {
        PolyMat {
            dim: self.dim,
            entries: self.entries.iter().map(|p| p.scale(s)).collect(),
        }
    }

    pub fn derivative(&self) -> PolyMat<R> {
        PolyMat {
            dim: self.dim,
            entries: self.entries.iter().map(|p| p.derivative()).collect(),
        }
    }

    pub fn antiderivative_from(&self, z0: &R) -> PolyMat<R> {
        PolyMat {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .map(|p| p.antiderivative_from(z0))
                .collect(),
        }
    }

    /// Evaluate all entries; returns a row-major scalar matrix.
    pub fn eval(&self, z: &R) -> Vec<R> {
        self.entries.iter().map(|p| p.eval(z)).collect()
    }

    pub fn max_z_degree(&self) -> usize {
        self.entries
            .iter()
            .filter_map(|p| p.degree())
            .max()
            .unwrap_or(0)
    }

    pub fn map<S: Ring>(&self, f: impl Fn(&R) -> S + Copy) -> PolyMat<S> {
        PolyMat {
            dim: self.dim,
            entries: self.entries.iter().map(|p| p.map(f)).collect(),
        }
    }
}

impl PolyMat<GaussQ> {
    pub fn eval_cmat(&self, z: Complex64) -> crate::linalg::CMat {
        let zq = GaussQ::from_c64(z);
        let vals = self.eval(&zq);
        crate::linalg::CMat::from_fn(self.dim, self.dim, |i, j| vals[i * self.dim + j].to_c64())
    }

    pub fn to_c64(&self) -> PolyMat<Complex64> {
        self.map(|c| c.to_c64())
    }
}
