//! Truncated formal power series in the loop-counting parameter ħ.
//!
//! Coefficients are stored exactly as computed; ħ is only turned into a
//! number by [`HbarSeries::eval`].

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::ComplexField;
use num_traits::Zero;

use crate::scalar::{Cx, Real};

/// `Σ_{n=0}^{order} c_n ħ^n`, truncated at `order`.
#[derive(Debug, Clone, PartialEq)]
pub struct HbarSeries<S> {
    coeffs: Vec<S>,
}

impl<S> HbarSeries<S>
where
    S: Clone + Zero + Add<Output = S> + Sub<Output = S> + Mul<Output = S> + Neg<Output = S>,
{
    pub fn zero(order: usize) -> Self {
        Self { coeffs: vec![S::zero(); order + 1] }
    }

    /// Builds a series from `coeffs[n] = c_n`; the truncation order is
    /// `coeffs.len() - 1`.
    pub fn from_coeffs(coeffs: Vec<S>) -> Self {
        assert!(!coeffs.is_empty(), "series needs at least the constant term");
        Self { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn coeff(&self, n: usize) -> S {
        self.coeffs.get(n).cloned().unwrap_or_else(S::zero)
    }

    pub fn set(&mut self, n: usize, value: S) {
        if n < self.coeffs.len() {
            self.coeffs[n] = value;
        }
    }

    pub fn add_to(&mut self, n: usize, value: S) {
        if n < self.coeffs.len() {
            self.coeffs[n] = self.coeffs[n].clone() + value;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn truncate(&self, order: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(order + 1, S::zero());
        Self { coeffs }
    }

    /// Cauchy product truncated at the smaller of the two orders.
    pub fn mul_series(&self, other: &Self) -> Self {
        let order = self.order().min(other.order());
        let mut out = Self::zero(order);
        for (i, a) in self.coeffs.iter().enumerate().take(order + 1) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(order + 1 - i) {
                out.coeffs[i + j] = out.coeffs[i + j].clone() + a.clone() * b.clone();
            }
        }
        out
    }

    pub fn scale(&self, s: S) -> Self {
        Self { coeffs: self.coeffs.iter().map(|c| c.clone() * s.clone()).collect() }
    }

    /// Divides by ħ, dropping the constant term. Used for `(1/ħ)Γ`.
    pub fn div_hbar(&self) -> Self {
        if self.coeffs.len() == 1 {
            return Self::zero(0);
        }
        Self { coeffs: self.coeffs[1..].to_vec() }
    }

    /// Multiplies by ħ^k, keeping the truncation order.
    pub fn shift(&self, k: usize) -> Self {
        let mut out = Self::zero(self.order());
        for (n, c) in self.coeffs.iter().enumerate() {
            if n + k <= self.order() {
                out.coeffs[n + k] = c.clone();
            }
        }
        out
    }
}

impl<S> Add for HbarSeries<S>
where
    S: Clone + Zero + Add<Output = S>,
{
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let order = self.coeffs.len().min(rhs.coeffs.len());
        let coeffs = self
            .coeffs
            .into_iter()
            .zip(rhs.coeffs)
            .take(order)
            .map(|(a, b)| a + b)
            .collect();
        Self { coeffs }
    }
}

impl<S> Sub for HbarSeries<S>
where
    S: Clone + Zero + Sub<Output = S>,
{
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        let order = self.coeffs.len().min(rhs.coeffs.len());
        let coeffs = self
            .coeffs
            .into_iter()
            .zip(rhs.coeffs)
            .take(order)
            .map(|(a, b)| a - b)
            .collect();
        Self { coeffs }
    }
}

impl<T: Real> HbarSeries<Cx<T>> {
    /// Horner evaluation at a complex ħ.
    pub fn eval(&self, hbar: Cx<T>) -> Cx<T> {
        self.coeffs
            .iter()
            .rev()
            .fold(Cx::new(T::zero(), T::zero()), |acc, &c| acc * hbar + c)
    }

    /// Largest coefficient modulus difference.
    pub fn max_coeff_diff(&self, other: &Self) -> T {
        let n = self.coeffs.len().max(other.coeffs.len());
        (0..n).fold(T::zero(), |acc, i| acc.max((self.coeff(i) - other.coeff(i)).modulus()))
    }
}
