//! Dense univariate polynomials with exact rational coefficients.
//!
//! Used for reliability polynomials R(r), their expansions around r = 1-e,
//! and composed multilevel reliabilities. Small degrees only, so the naive
//! representation is fine.

use crate::exact::Ratio;
use num_traits::{One, Zero};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatPoly {
    /// coeffs[i] multiplies x^i; no trailing zeros
    pub coeffs: Vec<Ratio>,
}

impl RatPoly {
    pub fn zero() -> Self {
        RatPoly { coeffs: vec![] }
    }

    pub fn constant(c: Ratio) -> Self {
        let mut p = RatPoly { coeffs: vec![c] };
        p.trim();
        p
    }

    pub fn x() -> Self {
        RatPoly {
            coeffs: vec![Ratio::zero(), Ratio::one()],
        }
    }

    pub fn from_coeffs(coeffs: Vec<Ratio>) -> Self {
        let mut p = RatPoly { coeffs };
        p.trim();
        p
    }

    fn trim(&mut self) {
        while self.coeffs.last().map_or(false, |c| c.is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn degree(&self) -> Option<usize> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn coeff(&self, i: usize) -> Ratio {
        self.coeffs.get(i).cloned().unwrap_or_else(Ratio::zero)
    }

    pub fn add(&self, rhs: &RatPoly) -> RatPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push(self.coeff(i) + rhs.coeff(i));
        }
        RatPoly::from_coeffs(out)
    }

    pub fn sub(&self, rhs: &RatPoly) -> RatPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push(self.coeff(i) - rhs.coeff(i));
        }
        RatPoly::from_coeffs(out)
    }

    pub fn mul(&self, rhs: &RatPoly) -> RatPoly {
        if self.coeffs.is_empty() || rhs.coeffs.is_empty() {
            return RatPoly::zero();
        }
        let mut out = vec![Ratio::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        RatPoly::from_coeffs(out)
    }

    pub fn scale(&self, c: &Ratio) -> RatPoly {
        RatPoly::from_coeffs(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn pow(&self, mut e: u32) -> RatPoly {
        let mut base = self.clone();
        let mut acc = RatPoly::constant(Ratio::one());
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// self(inner(x)) by Horner's rule over polynomials.
    pub fn compose(&self, inner: &RatPoly) -> RatPoly {
        let mut acc = RatPoly::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(inner).add(&RatPoly::constant(c.clone()));
        }
        acc
    }

    pub fn eval(&self, x: &Ratio) -> Ratio {
        let mut acc = Ratio::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for c in self.coeffs.iter().rev() {
            acc = acc * x + crate::exact::ratio_to_f64(c);
        }
        acc
    }

    /// Lowest-order nonzero term (exponent, coefficient), if any.
    pub fn leading_low_order(&self) -> Option<(usize, Ratio)> {
        self.coeffs
            .iter()
            .enumerate()
            .find(|(_, c)| !c.is_zero())
            .map(|(i, c)| (i, c.clone()))
    }
}

/// (1 - x)^n expanded exactly.
pub fn one_minus_x_pow(n: u32) -> RatPoly {
    RatPoly::from_coeffs(vec![Ratio::one(), -Ratio::one()]).pow(n)
}
