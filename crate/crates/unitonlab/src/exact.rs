//! Exact Gaussian-rational arithmetic for the Picard integration path.
//!
//! `f64` inputs are dyadic rationals, so the conversion into `GaussQ` is
//! exact; the symbolic integration and Maurer–Cartan verification then run
//! without rounding and the termination test is an exact zero test.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

/// Scalar operations shared by the floating and exact coefficient types.
pub trait Ring: Clone + PartialEq + std::fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn imag_unit() -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    /// Exact division by a nonzero integer (used by antidifferentiation).
    fn div_int(&self, n: i64) -> Self;
    fn is_zero(&self) -> bool;
    fn from_c64(z: Complex64) -> Self;
    fn to_c64(&self) -> Complex64;
}

impl Ring for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn imag_unit() -> Self {
        Complex64::new(0.0, 1.0)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn div_int(&self, n: i64) -> Self {
        self / n as f64
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn from_c64(z: Complex64) -> Self {
        z
    }
    fn to_c64(&self) -> Complex64 {
        *self
    }
}

/// Gaussian rational: `re + im·i` with `BigRational` parts.
#[derive(Clone, PartialEq, Eq)]
pub struct GaussQ {
    pub re: BigRational,
    pub im: BigRational,
}

impl std::fmt::Debug for GaussQ {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}+{}i", self.re, self.im)
    }
}

impl GaussQ {
    pub fn from_ints(re: i64, im: i64) -> Self {
        GaussQ {
            re: BigRational::from_integer(BigInt::from(re)),
            im: BigRational::from_integer(BigInt::from(im)),
        }
    }

    pub fn from_ratio(re_num: i64, re_den: i64, im_num: i64, im_den: i64) -> Self {
        GaussQ {
            re: BigRational::new(BigInt::from(re_num), BigInt::from(re_den)),
            im: BigRational::new(BigInt::from(im_num), BigInt::from(im_den)),
        }
    }

    pub fn conj(&self) -> Self {
        GaussQ { re: self.re.clone(), im: -self.im.clone() }
    }

    /// Exact conversion of a finite f64 (dyadic rational).
    fn rational_from_f64(x: f64) -> BigRational {
        assert!(x.is_finite(), "cannot convert non-finite float exactly");
        BigRational::from_float(x).expect("finite float converts exactly")
    }
}

impl Ring for GaussQ {
    fn zero() -> Self {
        GaussQ { re: BigRational::zero(), im: BigRational::zero() }
    }
    fn one() -> Self {
        GaussQ::from_ints(1, 0)
    }
    fn imag_unit() -> Self {
        GaussQ::from_ints(0, 1)
    }
    fn add(&self, o: &Self) -> Self {
        GaussQ { re: &self.re + &o.re, im: &self.im + &o.im }
    }
    fn sub(&self, o: &Self) -> Self {
        GaussQ { re: &self.re - &o.re, im: &self.im - &o.im }
    }
    fn mul(&self, o: &Self) -> Self {
        GaussQ {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }
    fn neg(&self) -> Self {
        GaussQ { re: -self.re.clone(), im: -self.im.clone() }
    }
    fn div_int(&self, n: i64) -> Self {
        assert!(n != 0);
        let d = BigRational::from_integer(BigInt::from(n));
        GaussQ { re: &self.re / &d, im: &self.im / &d }
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    fn from_c64(z: Complex64) -> Self {
        GaussQ {
            re: GaussQ::rational_from_f64(z.re),
            im: GaussQ::rational_from_f64(z.im),
        }
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(
            rational_to_f64(&self.re),
            rational_to_f64(&self.im),
        )
    }
}

fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // extremely large terms do not occur in this pipeline, but fall back
        // to a sign-correct infinity rather than panic
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}
