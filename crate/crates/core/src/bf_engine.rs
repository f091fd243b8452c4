//! The perturbed BF theory at matrix scale.
//!
//! A [`MatrixBFModel`] is a block-diagonal [`ToyBFComplex`] whose blocks are
//! labelled by form degree. The quadratic perturbation `ħ F(A, B)` with
//! `F(A, B) = ⟨B, L^{-1} d A⟩` produces chain diagrams (Γ_int) and loop
//! diagrams (Γ_tr); the loops resum to the alternating determinant ratio
//! `Π_k (det(L_k + ħ) / det L_k)^{(-1)^k}`.

use nalgebra::ComplexField;

use crate::error::{Error, Result};
use crate::feynman::{FeynmanRules, Interaction, PropagatorKernel, Signature};
use crate::flat_zeta::{euler_product_log_zeta, log_zeta_k};
use crate::graded::{GradedOperator, ToyBFComplex};
use crate::linalg::{eigenvalues, expm, inverse, matrix_power, trace};
use crate::orbits::PrimeOrbit;
use crate::scalar::{lit, CMatrix, CVector, Cx, Real};
use crate::series::HbarSeries;
use crate::signs::{degree_sign, loop_sign, rank_sign};

const BLOCK_TOL: f64 = 1e-14;
const INVARIANCE_TOL: f64 = 1e-10;
const PROJECTION_TOL: f64 = 1e-10;

/// A contiguous block of basis indices carrying one form degree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DegreeBlock {
    pub degree: i32,
    pub offset: usize,
    pub size: usize,
}

/// Toy BF complex split into form-degree blocks, with a diagram truncation
/// order `K` (maximum number of vertices).
#[derive(Debug, Clone)]
pub struct MatrixBFModel<T: Real> {
    complex: ToyBFComplex<T>,
    split: Vec<DegreeBlock>,
    hbar_order: usize,
}

fn sub_block<T: Real>(m: &CMatrix<T>, b: &DegreeBlock) -> CMatrix<T> {
    m.view((b.offset, b.offset), (b.size, b.size)).into_owned()
}

fn off_block_defect<T: Real>(m: &CMatrix<T>, split: &[DegreeBlock]) -> T {
    let mut worst = T::zero();
    let block_of = |i: usize| split.iter().position(|b| i >= b.offset && i < b.offset + b.size);
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if block_of(i) != block_of(j) {
                worst = worst.max(m[(i, j)].modulus());
            }
        }
    }
    worst
}

impl<T: Real> MatrixBFModel<T> {
    /// `split` lists `(degree, size)` in basis order; `d` and `iota` must be
    /// block diagonal with respect to it.
    pub fn new(complex: ToyBFComplex<T>, split: &[(i32, usize)], hbar_order: usize) -> Result<Self> {
        if hbar_order == 0 {
            return Err(Error::InvalidArgument("truncation order K must be at least 1".into()));
        }
        let mut blocks = Vec::new();
        let mut offset = 0;
        for &(degree, size) in split {
            if blocks.iter().any(|b: &DegreeBlock| b.degree == degree) {
                return Err(Error::InvalidArgument(format!("degree {degree} listed twice")));
            }
            blocks.push(DegreeBlock { degree, offset, size });
            offset += size;
        }
        if offset != complex.dim() {
            return Err(Error::Dimension(format!(
                "degree blocks cover {offset} indices, the complex has {}",
                complex.dim()
            )));
        }
        for (name, m) in [("d", complex.d()), ("iota", complex.iota())] {
            let scale = m.iter().map(|z| z.modulus()).fold(T::one(), |a, b| a.max(b));
            if off_block_defect(m, &blocks) > lit::<T>(BLOCK_TOL) * scale {
                return Err(Error::Dimension(format!("{name} mixes form degrees")));
            }
        }
        Ok(Self { complex, split: blocks, hbar_order })
    }

    /// Single degree-0 block.
    pub fn ungraded(complex: ToyBFComplex<T>, hbar_order: usize) -> Result<Self> {
        let n = complex.dim();
        Self::new(complex, &[(0, n)], hbar_order)
    }

    /// Block-diagonal model from per-degree `(degree, d_k, iota_k)`.
    pub fn from_blocks(blocks: Vec<(i32, CMatrix<T>, CMatrix<T>)>, hbar_order: usize) -> Result<Self> {
        let n: usize = blocks.iter().map(|(_, d, _)| d.nrows()).sum();
        let mut d = CMatrix::zeros(n, n);
        let mut iota = CMatrix::zeros(n, n);
        let mut split = Vec::new();
        let mut offset = 0;
        for (degree, dk, ik) in &blocks {
            let s = dk.nrows();
            if dk.shape() != (s, s) || ik.shape() != (s, s) {
                return Err(Error::Dimension(format!("block of degree {degree} is not square of matching size")));
            }
            d.view_mut((offset, offset), (s, s)).copy_from(dk);
            iota.view_mut((offset, offset), (s, s)).copy_from(ik);
            split.push((*degree, s));
            offset += s;
        }
        Self::new(ToyBFComplex::new(d, iota)?, &split, hbar_order)
    }

    /// Model with `d_k = L_k` and `iota = I`.
    pub fn from_generators(blocks: Vec<(i32, CMatrix<T>)>, hbar_order: usize) -> Result<Self> {
        let blocks = blocks
            .into_iter()
            .map(|(k, l)| {
                let n = l.nrows();
                (k, l, CMatrix::identity(n, n))
            })
            .collect();
        Self::from_blocks(blocks, hbar_order)
    }

    pub fn complex(&self) -> &ToyBFComplex<T> {
        &self.complex
    }

    pub fn split(&self) -> &[DegreeBlock] {
        &self.split
    }

    pub fn hbar_order(&self) -> usize {
        self.hbar_order
    }

    pub fn with_hbar_order(&self, hbar_order: usize) -> Result<Self> {
        if hbar_order == 0 {
            return Err(Error::InvalidArgument("truncation order K must be at least 1".into()));
        }
        Ok(Self { hbar_order, ..self.clone() })
    }

    pub fn dim(&self) -> usize {
        self.complex.dim()
    }

    /// `L` on `V0` restricted to each degree block.
    pub fn generator_blocks(&self) -> Vec<(i32, CMatrix<T>)> {
        self.split.iter().map(|b| (b.degree, sub_block(self.complex.l0(), b))).collect()
    }

    /// `L` as a degree-preserving graded operator over the form degrees.
    pub fn graded_generator(&self) -> Result<GradedOperator<T>> {
        GradedOperator::degree_preserving(self.generator_blocks())
    }

    /// Smallest `|μ|` over the spectrum of `L`, the radius of the loop series.
    pub fn spectral_radius_of_convergence(&self) -> Result<T> {
        Ok(eigenvalues(self.complex.l0())?
            .iter()
            .map(|z| z.modulus())
            .fold(T::max_value().expect("bounded"), |a, b| a.min(b)))
    }

    /// `W = L^{-1} d : V0 -> V1`.
    pub fn w_operator(&self) -> Result<CMatrix<T>> {
        Ok(inverse(self.complex.l1(), "L on V1")? * self.complex.d())
    }

    /// `±1` per index of `V0 ⊕ V1`: the loop sign `(-1)^{k+1}` of its degree.
    pub fn loop_grading(&self) -> Vec<i8> {
        let mut g = vec![0i8; 2 * self.dim()];
        for b in &self.split {
            let s = loop_sign(i64::from(b.degree)) as i8;
            for i in b.offset..b.offset + b.size {
                g[i] = s;
                g[self.dim() + i] = s;
            }
        }
        g
    }
}

/// `F(A, B) = ⟨B, L^{-1} d A⟩` with the bilinear pairing.
pub fn perturbing_functional<T: Real>(model: &MatrixBFModel<T>, a: &CVector<T>, b: &CVector<T>) -> Result<Cx<T>> {
    check_len(model, a)?;
    check_len(model, b)?;
    let w = model.w_operator()?;
    Ok((b.transpose() * w * a)[(0, 0)])
}

fn check_len<T: Real>(model: &MatrixBFModel<T>, v: &CVector<T>) -> Result<()> {
    if v.len() != model.dim() {
        return Err(Error::Dimension(format!("field has length {}, expected {}", v.len(), model.dim())));
    }
    Ok(())
}

/// `∫_{L1}^{L2} e^{-λt} iota e^{-tL} dt` on `V1 -> V0`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularizedPropagator<T: Real> {
    pub l1: T,
    /// `None` is an infinite upper scale.
    pub l2: Option<T>,
    pub lambda: Cx<T>,
    pub matrix: CMatrix<T>,
}

impl<T: Real> RegularizedPropagator<T> {
    /// Symmetric kernel on `X = V0 ⊕ V1` pairing the `A` and `B` slots.
    pub fn field_kernel(&self) -> PropagatorKernel<T> {
        let n = self.matrix.nrows();
        let mut m = CMatrix::zeros(2 * n, 2 * n);
        m.view_mut((0, n), (n, n)).copy_from(&self.matrix);
        m.view_mut((n, 0), (n, n)).copy_from(&self.matrix.transpose());
        PropagatorKernel { matrix: m, window: (self.l1, self.l2), lambda: self.lambda }
    }
}

/// Closed form `iota (L + λ)^{-1} (e^{-L1 (L + λ)} - e^{-L2 (L + λ)})`.
pub fn regularized_propagator<T: Real>(
    model: &MatrixBFModel<T>,
    l1: T,
    l2: Option<T>,
    lambda: Cx<T>,
) -> Result<RegularizedPropagator<T>> {
    if l1 < T::zero() || l2.is_some_and(|b| b < l1) {
        return Err(Error::InvalidArgument("scale window must satisfy 0 <= L1 <= L2".into()));
    }
    let n = model.dim();
    let id = CMatrix::<T>::identity(n, n);
    let shifted = model.complex.l1() + id.map(|z| z * lambda);
    if l2.is_none() {
        let min_re = eigenvalues(&shifted)?.iter().map(|z| z.re).fold(T::max_value().expect("bounded"), |a, b| a.min(b));
        if min_re <= T::zero() {
            return Err(Error::IrDivergence { min_re: min_re.to_f64().unwrap_or(f64::NAN) });
        }
    }
    if l2 == Some(l1) {
        return Ok(RegularizedPropagator { l1, l2, lambda, matrix: CMatrix::zeros(n, n) });
    }
    let heat = |t: T| expm(&shifted.map(|z| z * (-t)));
    let window = match l2 {
        Some(b) => heat(l1) - heat(b),
        None => heat(l1),
    };
    let inv = inverse(&shifted, "L + λ")?;
    Ok(RegularizedPropagator { l1, l2, lambda, matrix: model.complex.iota() * inv * window })
}

/// `T = [[0, W^T], [W, 0]]` on `X`, so that `x·T x / 2 = F(A, B)`.
pub fn interaction_hessian<T: Real>(model: &MatrixBFModel<T>) -> Result<CMatrix<T>> {
    let n = model.dim();
    let w = model.w_operator()?;
    let mut t = CMatrix::zeros(2 * n, 2 * n);
    t.view_mut((0, n), (n, n)).copy_from(&w.transpose());
    t.view_mut((n, 0), (n, n)).copy_from(&w);
    Ok(t)
}

/// Feynman rules of the model on `X`, optionally with the loop grading.
pub fn feynman_rules<T: Real>(model: &MatrixBFModel<T>, propagator: &RegularizedPropagator<T>, graded: bool) -> Result<FeynmanRules<T>> {
    let interaction = Interaction::quadratic(&interaction_hessian(model)?)?;
    let rules = FeynmanRules::new(propagator.field_kernel(), interaction, Signature::Oscillatory)?;
    if graded {
        rules.with_grading(model.loop_grading())
    } else {
        Ok(rules)
    }
}

/// Embeds `(A, B)` into `X`.
pub fn field<T: Real>(a: &CVector<T>, b: &CVector<T>) -> CVector<T> {
    let n = a.len();
    CVector::from_fn(2 * n, |i, _| if i < n { a[i] } else { b[i - n] })
}

/// Chain diagrams: the `ħ^N` coefficient is
/// `(-1)^{N-1} i ⟨W^T B, M^{N-1} A⟩` with `M = P W`, for `N = 1..=K`.
pub fn gamma_int<T: Real>(
    model: &MatrixBFModel<T>,
    propagator: &RegularizedPropagator<T>,
    a: &CVector<T>,
    b: &CVector<T>,
    k: usize,
) -> Result<HbarSeries<Cx<T>>> {
    check_len(model, a)?;
    check_len(model, b)?;
    if k == 0 {
        return Err(Error::InvalidArgument("K must be at least 1".into()));
    }
    let w = model.w_operator()?;
    let m = &propagator.matrix * &w;
    let left = (b.transpose() * &w).transpose();
    let mut out = HbarSeries::zero(k);
    let mut v = a.clone();
    let i = Cx::new(T::zero(), T::one());
    for n in 1..=k {
        let sign = lit::<T>(degree_sign(n as i64 - 1) as f64);
        out.set(n, i * left.dot(&v) * sign);
        v = &m * v;
    }
    Ok(out)
}

/// Resummed chains `iħ ⟨W^T B, (1 + ħM)^{-1} A⟩`.
pub fn gamma_int_resummed<T: Real>(
    model: &MatrixBFModel<T>,
    propagator: &RegularizedPropagator<T>,
    a: &CVector<T>,
    b: &CVector<T>,
    hbar: Cx<T>,
) -> Result<Cx<T>> {
    let w = model.w_operator()?;
    let n = model.dim();
    let m = &propagator.matrix * &w;
    let resolvent = inverse(&(CMatrix::identity(n, n) + m.map(|z| z * hbar)), "1 + ħM")?;
    Ok(Cx::new(T::zero(), T::one()) * hbar * (b.transpose() * w * resolvent * a)[(0, 0)])
}

fn shifted_inverse_blocks<T: Real>(model: &MatrixBFModel<T>, lambda: Cx<T>) -> Result<Vec<(i32, CMatrix<T>)>> {
    let mut out = Vec::new();
    for (k, l) in model.generator_blocks() {
        let n = l.nrows();
        let shifted = l + CMatrix::<T>::identity(n, n).map(|z| z * lambda);
        if n > 0 {
            let min_re = eigenvalues(&shifted)?.iter().map(|z| z.re).fold(T::max_value().expect("bounded"), |a, b| a.min(b));
            if min_re <= T::zero() {
                return Err(Error::IrDivergence { min_re: min_re.to_f64().unwrap_or(f64::NAN) });
            }
        }
        out.push((k, inverse(&shifted, "L + λ")?));
    }
    Ok(out)
}

/// Loop diagrams: the `ħ^{N+1}` coefficient is
/// `(-1)^N / N Σ_k (-1)^{k+1} tr((L_k + λ)^{-N})` for `N = 1..=K`.
/// The series has order `K + 1`.
pub fn gamma_tr<T: Real>(model: &MatrixBFModel<T>, lambda: Cx<T>, k: usize) -> Result<HbarSeries<Cx<T>>> {
    if k == 0 {
        return Err(Error::InvalidArgument("K must be at least 1".into()));
    }
    let blocks = shifted_inverse_blocks(model, lambda)?;
    let mut out = HbarSeries::zero(k + 1);
    for (degree, inv) in &blocks {
        let s = lit::<T>(loop_sign(i64::from(*degree)) as f64);
        let mut power = inv.clone();
        for n in 1..=k {
            let c = trace(&power) * s * lit::<T>(degree_sign(n as i64) as f64) / lit::<T>(n as f64);
            out.add_to(n + 1, c);
            power = &power * inv;
        }
    }
    Ok(out)
}

/// `t^{N-1} / (N-1)!`, the volume of `{0 < t_1 < ... < t_{N-1} < t}`.
pub fn simplex_volume_check<T: Real>(n: usize, t: T) -> Result<T> {
    if n == 0 || !(t > T::zero()) {
        return Err(Error::InvalidArgument("need N >= 1 and t > 0".into()));
    }
    let mut v = T::one();
    for i in 1..n {
        v = v * t / lit(i as f64);
    }
    Ok(v)
}

/// Checks `tr(B L^{-1} iota d) = tr(B|im iota)` on the full space
/// `V0 ⊕ V1`, where `iota` maps `V1` onto `V0` and `L^{-1} iota d` is the
/// projector onto `im iota` along `im d`.
pub fn projection_lemma_check<T: Real>(model: &MatrixBFModel<T>, b_op: &CMatrix<T>) -> Result<bool> {
    let n = model.dim();
    if b_op.shape() != (2 * n, 2 * n) {
        return Err(Error::Dimension(format!("operator must act on V0 ⊕ V1 ({0}x{0})", 2 * n)));
    }
    let c = model.complex();
    let mut iota = CMatrix::zeros(2 * n, 2 * n);
    iota.view_mut((0, n), (n, n)).copy_from(c.iota());
    let mut d = CMatrix::zeros(2 * n, 2 * n);
    d.view_mut((n, 0), (n, n)).copy_from(c.d());
    let mut l = CMatrix::zeros(2 * n, 2 * n);
    l.view_mut((0, 0), (n, n)).copy_from(c.l0());
    l.view_mut((n, n), (n, n)).copy_from(c.l1());
    let projector = inverse(&l, "L")? * &iota * &d;

    let svd = iota.clone().svd(true, false);
    let u = svd.u.expect("requested");
    let top = svd.singular_values.iter().fold(T::zero(), |a, &b| a.max(b));
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s > top * lit(1e-12))
        .count();
    let q = u.columns(0, rank).into_owned();
    let residual = (CMatrix::<T>::identity(2 * n, 2 * n) - &q * q.adjoint()) * b_op * &q;
    let scale = b_op.iter().map(|z| z.modulus()).fold(T::one(), |a, b| a.max(b));
    let defect = residual.iter().map(|z| z.modulus()).fold(T::zero(), |a, b| a.max(b));
    if defect > lit::<T>(INVARIANCE_TOL) * scale {
        return Err(Error::NotInvariant { defect: defect.to_f64().unwrap_or(f64::NAN) });
    }
    let lhs = trace(&(b_op * projector));
    let rhs = trace(&(q.adjoint() * b_op * &q));
    Ok((lhs - rhs).modulus() < lit::<T>(PROJECTION_TOL) * scale.max(T::one()))
}

/// `Π_k (det(L_k + ħ) / det L_k)^{(-1)^k}`.
pub fn closed_form_expectation<T: Real>(model: &MatrixBFModel<T>, hbar: Cx<T>) -> Result<Cx<T>> {
    let l = model.graded_generator()?;
    let shifted = GradedOperator::degree_preserving(model.generator_blocks().into_iter().map(|(k, m)| {
        let n = m.nrows();
        (k, m + CMatrix::<T>::identity(n, n).map(|z| z * hbar))
    }))?;
    Ok(shifted.superdeterminant()? / l.superdeterminant()?)
}

/// Series and closed-form values of `⟨e^{iF}⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpectationReport<T> {
    pub hbar: Cx<T>,
    pub k: usize,
    /// `exp(Γ_tr(ħ) / ħ)` with `Γ_tr` truncated at `K` vertices.
    pub series_value: Cx<T>,
    pub closed_form: Cx<T>,
    pub defect: T,
    /// Rigorous bound on `|defect|` from the spectral radii of `L_k^{-1}`.
    pub truncation_bound: T,
}

/// `⟨e^{iF}⟩_L` at `ħ`: the closed form, with the resummed loop series
/// compared against it. Requires `|ħ| < min |spec L|`.
pub fn expectation_value<T: Real>(model: &MatrixBFModel<T>, hbar: Cx<T>) -> Result<ExpectationReport<T>> {
    let radius = model.spectral_radius_of_convergence()?;
    if hbar.modulus() >= radius {
        return Err(Error::OutsideRadius {
            hbar: hbar.modulus().to_f64().unwrap_or(f64::NAN),
            radius: radius.to_f64().unwrap_or(f64::NAN),
        });
    }
    let k = model.hbar_order();
    let exponent = gamma_tr(model, Cx::new(T::zero(), T::zero()), k)?.div_hbar();
    let series_value = exponent.eval(hbar).exp();
    let closed_form = closed_form_expectation(model, hbar)?;
    Ok(ExpectationReport {
        hbar,
        k,
        series_value,
        closed_form,
        defect: (series_value - closed_form).modulus(),
        truncation_bound: truncation_bound(model, hbar, exponent.eval(hbar), k)?,
    })
}

/// `|e^{S_K}| e^{|Δ|} |Δ|` with `|Δ| <= Σ_k dim_k (|ħ|ρ_k)^{K+1} / ((K+1)(1 - |ħ|ρ_k))`,
/// `ρ_k` the spectral radius of `L_k^{-1}`.
fn truncation_bound<T: Real>(model: &MatrixBFModel<T>, hbar: Cx<T>, s_k: Cx<T>, k: usize) -> Result<T> {
    let h = hbar.modulus();
    let mut delta = T::zero();
    for (_, l) in model.generator_blocks() {
        if l.nrows() == 0 {
            continue;
        }
        let rho = eigenvalues(&l)?
            .iter()
            .map(|z| T::one() / z.modulus())
            .fold(T::zero(), |a, b| a.max(b));
        let x = h * rho;
        delta += lit::<T>(l.nrows() as f64) * x.powi(k as i32 + 1) / (lit::<T>((k + 1) as f64) * (T::one() - x));
    }
    Ok(s_k.exp().modulus() * delta.exp() * delta)
}

/// Order of a defect sequence at `h, h/2, h/4`, fitting
/// `D(h) = a h^p + b h^{p+1}`: `q = 2^p` solves `2q² - 3 r2 q + r1 r2 = 0`
/// with `r1 = D1/D2`, `r2 = D2/D3`; the root nearer `r2` is taken.
pub fn richardson_order<T: Real>(d: [Cx<T>; 3]) -> T {
    let r1 = d[0] / d[1];
    let r2 = d[1] / d[2];
    let two = Cx::new(lit::<T>(2.0), T::zero());
    let three = Cx::new(lit::<T>(3.0), T::zero());
    let disc = (three * three * r2 * r2 - r1 * r2 * lit::<T>(8.0)).sqrt();
    let four = two * two;
    let roots = [(three * r2 + disc) / four, (three * r2 - disc) / four];
    let q = if (roots[0] - r2).modulus() <= (roots[1] - r2).modulus() { roots[0] } else { roots[1] };
    q.modulus().ln() / lit::<T>(2.0).ln()
}

/// Both sides of the zeta/expectation identity at a shifted base point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BridgeReport<T> {
    pub hbar: Cx<T>,
    pub base_point: Cx<T>,
    /// `exp[(-1)^m (log ζ(λ0 + ħ) - log ζ(λ0))]` from the Euler product.
    pub orbit_route: Cx<T>,
    /// `Π_k (det♭(L_k + λ0 + ħ) / det♭(L_k + λ0))^{(-1)^k}` from the flat
    /// determinants.
    pub det_route: Cx<T>,
    pub defect: T,
    /// Bound on `|orbit_route - det_route|` implied by the series tails.
    pub tail_bound: T,
    pub converged: bool,
}

/// `(ζ(λ0 + ħ) / ζ(λ0))^{(-1)^m}` by two independent truncated orbit sums.
pub fn zeta_expectation_bridge<T: Real>(
    orbits: &[PrimeOrbit<T>],
    m: usize,
    hbar: Cx<T>,
    base_point: Cx<T>,
    l_max: T,
) -> Result<BridgeReport<T>> {
    let at = base_point + hbar;
    let e1 = euler_product_log_zeta(orbits, at, l_max)?;
    let e0 = euler_product_log_zeta(orbits, base_point, l_max)?;
    let sign = lit::<T>(rank_sign(m) as f64);
    let orbit_route = ((e1.value - e0.value) * sign).exp();
    let mut log_det = Cx::new(T::zero(), T::zero());
    let mut tail = e1.tail_bound + e0.tail_bound;
    let mut converged = e1.converged && e0.converged;
    for k in 0..=2 * m {
        let z1 = log_zeta_k(orbits, k, at, l_max)?;
        let z0 = log_zeta_k(orbits, k, base_point, l_max)?;
        log_det += (z1.value - z0.value) * lit::<T>(degree_sign(k as i64) as f64);
        tail += z1.tail_bound + z0.tail_bound;
        converged &= z1.converged && z0.converged;
    }
    let det_route = log_det.exp();
    let tail_bound = if converged {
        orbit_route.modulus().max(det_route.modulus()) * (tail.exp() - T::one())
    } else {
        T::one() / T::zero()
    };
    Ok(BridgeReport {
        hbar,
        base_point,
        orbit_route,
        det_route,
        defect: (orbit_route - det_route).modulus(),
        tail_bound,
        converged,
    })
}

/// Gauge-fixed route per degree block:
/// `Π_k |det(iota_k (d_k + ħ L_k^{-1} d_k)) / det(iota_k d_k)|^{(-1)^k}`.
pub fn gauge_fixed_ratio<T: Real>(model: &MatrixBFModel<T>, hbar: Cx<T>) -> Result<T> {
    let c = model.complex();
    let gf = c.gauge_fixed_operator(hbar)?;
    let mut out = T::one();
    for b in model.split() {
        if b.size == 0 {
            continue;
        }
        let num = sub_block(&gf, b).determinant().modulus();
        let den = sub_block(c.l0(), b).determinant().modulus();
        let r = num / den;
        out *= if degree_sign(i64::from(b.degree)) > 0 { r } else { T::one() / r };
    }
    Ok(out)
}

/// `M^N` helper for callers comparing against graph weights.
pub fn window_operator<T: Real>(model: &MatrixBFModel<T>, propagator: &RegularizedPropagator<T>, power: u32) -> Result<CMatrix<T>> {
    Ok(matrix_power(&(&propagator.matrix * model.w_operator()?), power))
}
