//! Scale evolution of quadratic effective interactions.
//!
//! For `I(φ) = φ·T(ħ)φ / 2 + c(ħ)` the connected diagrams with one
//! propagator window resum to `T' = T (1 + P T)^{-1}` (chains) and
//! `c' = c + (iħ/2) log det(1 + P T)` (loops).

use nalgebra::ComplexField;

use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, inverse, trace};
use crate::scalar::{CMatrix, Cx, Real};
use crate::series::HbarSeries;

/// Quadratic effective interaction with ħ-series kernel and constant term.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveQuadratic<T: Real> {
    /// `kernel[n]` is the ħ^n coefficient of `T(ħ)`.
    pub kernel: Vec<CMatrix<T>>,
    pub constant: HbarSeries<Cx<T>>,
}

impl<T: Real> EffectiveQuadratic<T> {
    /// `ħ T1` with no constant, truncated at `order`.
    pub fn first_order(t1: CMatrix<T>, order: usize) -> Self {
        let n = t1.nrows();
        let mut kernel = vec![CMatrix::zeros(n, n); order + 1];
        if order >= 1 {
            kernel[1] = t1;
        }
        Self { kernel, constant: HbarSeries::zero(order) }
    }

    pub fn order(&self) -> usize {
        self.kernel.len() - 1
    }

    pub fn dim(&self) -> usize {
        self.kernel[0].nrows()
    }

    pub fn is_zero(&self) -> bool {
        self.constant.is_zero() && self.kernel.iter().all(|m| m.iter().all(|z| z.modulus() == T::zero()))
    }

    /// Largest coefficient difference over kernel entries and constants.
    pub fn max_coeff_diff(&self, other: &Self) -> T {
        let k = self
            .kernel
            .iter()
            .zip(&other.kernel)
            .flat_map(|(a, b)| (a - b).iter().map(|z| z.modulus()).collect::<Vec<_>>())
            .fold(T::zero(), |a, b| a.max(b));
        k.max(self.constant.max_coeff_diff(&other.constant))
    }
}

fn series_mul<T: Real>(a: &[CMatrix<T>], b: &[CMatrix<T>], order: usize, n: usize) -> Vec<CMatrix<T>> {
    let mut out = vec![CMatrix::zeros(n, n); order + 1];
    for (i, ai) in a.iter().enumerate().take(order + 1) {
        for (j, bj) in b.iter().enumerate().take(order + 1 - i) {
            out[i + j] += ai * bj;
        }
    }
    out
}

/// Evolves `effective` across a window with propagator `p`.
pub fn rge_evolve<T: Real>(effective: &EffectiveQuadratic<T>, p: &CMatrix<T>) -> Result<EffectiveQuadratic<T>> {
    let n = effective.dim();
    let order = effective.order();
    if p.shape() != (n, n) {
        return Err(Error::Dimension(format!("propagator is {:?}, kernel is {n} x {n}", p.shape())));
    }
    let id = CMatrix::<T>::identity(n, n);
    let pt0 = p * &effective.kernel[0];
    let radius = eigenvalues(&pt0)?.iter().map(|z| z.modulus()).fold(T::zero(), |a, b| a.max(b));
    if radius >= T::one() {
        return Err(Error::NonConvergent { norm: radius.to_f64().unwrap_or(f64::INFINITY) });
    }
    let m0 = &id + &pt0;
    let m0_inv = inverse(&m0, "1 + P T")?;
    // log det(1 + P T0) as the sum of principal logs, i.e. the value of the
    // loop series Σ (-1)^{N+1} tr((P T0)^N) / N
    let c0 = eigenvalues(&m0)?
        .into_iter()
        .fold(Cx::new(T::zero(), T::zero()), |acc, z| acc + z.ln());

    // X = M0^{-1} P (T - T0) has no ħ^0 term
    let mut x = vec![CMatrix::zeros(n, n); order + 1];
    for k in 1..=order {
        x[k] = &m0_inv * p * &effective.kernel[k];
    }
    let mut inv_series = vec![CMatrix::zeros(n, n); order + 1];
    inv_series[0] = id.clone();
    let mut power = inv_series.clone();
    let mut logdet = HbarSeries::zero(order);
    logdet.set(0, c0);
    for j in 1..=order {
        power = series_mul(&power, &x, order, n);
        let sign = if j % 2 == 0 { T::one() } else { -T::one() };
        for k in 0..=order {
            inv_series[k] += power[k].map(|z| z * sign);
            let tr = trace(&power[k]) * (-sign) / Cx::new(T::from_usize(j).unwrap(), T::zero());
            logdet.add_to(k, tr);
        }
    }
    let resolvent: Vec<CMatrix<T>> = inv_series.iter().map(|m| m * &m0_inv).collect();
    let kernel = series_mul(&effective.kernel, &resolvent, order, n);
    let half_i = Cx::new(T::zero(), T::from_f64(0.5).unwrap());
    let loops = logdet.scale(half_i).shift(1).truncate(order);
    Ok(EffectiveQuadratic { kernel, constant: effective.constant.clone() + loops })
}
