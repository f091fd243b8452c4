//! Flat traces of hyperbolic evolution as atomic distributions, the
//! per-degree zeta factors, the Euler product and their alternating
//! assembly, and flat determinants.
//!
//! Every orbit sum runs over the same list of atoms `t = jℓ(γ)`, sorted by
//! time and then by orbit index, so results do not depend on how the work is
//! scheduled.

use itertools::Itertools;
use nalgebra::{ComplexField, DMatrix};

use crate::error::{Error, Result};
use crate::linalg::{determinant, eigenvalues, matrix_power, trace};
use crate::orbits::PrimeOrbit;
use crate::scalar::{lit, CMatrix, Cx, Real};
use crate::signs::{degree_sign, rank_sign};

const NON_TRANSVERSE_REL: f64 = 1e-12;
const CYCLICITY_TOL: f64 = 1e-10;
/// Relative slack on `t <= L_max`, so that atoms sitting exactly on the cutoff
/// survive rounding of `jℓ`.
const CUTOFF_SLACK: f64 = 1e-12;
/// Safety factor on the geometric tail estimate.
const TAIL_SAFETY: f64 = 2.0;

/// Dirac atoms `Σ w δ(t - t_a)` on `[t_min, ∞)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomicDistribution<T: Real> {
    atoms: Vec<(T, Cx<T>)>,
    t_min: T,
}

impl<T: Real> AtomicDistribution<T> {
    pub fn new(mut atoms: Vec<(T, Cx<T>)>, t_min: T) -> Result<Self> {
        if !(t_min > T::zero()) {
            return Err(Error::InvalidArgument("t_min must be positive".into()));
        }
        if let Some((t, _)) = atoms.iter().find(|(t, _)| *t < t_min || !t.is_finite()) {
            return Err(Error::InvalidArgument(format!("atom at {t:e} below t_min")));
        }
        if atoms.iter().any(|(_, w)| !w.re.is_finite() || !w.im.is_finite()) {
            return Err(Error::InvalidArgument("atom weight not finite".into()));
        }
        atoms.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite times"));
        Ok(Self { atoms, t_min })
    }

    pub fn atoms(&self) -> &[(T, Cx<T>)] {
        &self.atoms
    }

    pub fn t_min(&self) -> T {
        self.t_min
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// `-∫ t^{-1} e^{-λt} dμ(t)`, the log of the flat determinant. For atoms
    /// away from zero the `1/Γ(s)`-normalised Mellin derivative at `s = 0`
    /// reduces to exactly this sum.
    pub fn log_flat_det(&self, lambda: Cx<T>) -> Cx<T> {
        self.atoms.iter().fold(Cx::new(T::zero(), T::zero()), |acc, &(t, w)| {
            acc - w / Cx::new(t, T::zero()) * (-lambda * Cx::new(t, T::zero())).exp()
        })
    }
}

/// Truncated `log ζ` with its truncation data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZetaSeries<T> {
    pub lambda: Cx<T>,
    /// Form degree, or `None` for the full (Euler or assembled) zeta.
    pub k: Option<usize>,
    pub value: Cx<T>,
    pub l_max: T,
    /// Estimated modulus of the omitted terms; infinite when the terms do
    /// not decay at this `λ`.
    pub tail_bound: T,
    pub converged: bool,
}

/// Sum of the `k x k` principal minors of `p`, i.e. `tr Λ^k p`.
pub fn exterior_power_trace<T: Real>(p: &CMatrix<T>, k: usize) -> Result<Cx<T>> {
    if !p.is_square() {
        return Err(Error::Dimension("exterior power of a non-square matrix".into()));
    }
    let n = p.nrows();
    if k > n {
        return Err(Error::InvalidArgument(format!("degree {k} exceeds dimension {n}")));
    }
    let mut total = Cx::new(T::zero(), T::zero());
    for idx in (0..n).combinations(k) {
        total += minor_det(p, &idx)?;
    }
    Ok(total)
}

fn minor_det<T: Real>(p: &CMatrix<T>, idx: &[usize]) -> Result<Cx<T>> {
    let e = |i: usize, j: usize| p[(idx[i], idx[j])];
    Ok(match idx.len() {
        0 => Cx::new(T::one(), T::zero()),
        1 => e(0, 0),
        2 => e(0, 0) * e(1, 1) - e(0, 1) * e(1, 0),
        3 => {
            e(0, 0) * (e(1, 1) * e(2, 2) - e(1, 2) * e(2, 1)) - e(0, 1) * (e(1, 0) * e(2, 2) - e(1, 2) * e(2, 0))
                + e(0, 2) * (e(1, 0) * e(2, 1) - e(1, 1) * e(2, 0))
        }
        k => determinant(&CMatrix::from_fn(k, k, e))?.0,
    })
}

/// `Σ_k (-1)^k tr Λ^k p`, which is `det(I - p)`.
pub fn alternating_minor_sum<T: Real>(p: &CMatrix<T>) -> Result<Cx<T>> {
    let mut total = Cx::new(T::zero(), T::zero());
    for k in 0..=p.nrows() {
        let t = exterior_power_trace(p, k)?;
        total += t * lit::<T>(degree_sign(k as i64) as f64);
    }
    Ok(total)
}

/// One `(γ, j)` term of an orbit sum.
#[derive(Debug, Clone, PartialEq)]
struct Atom<T: Real> {
    t: T,
    orbit: usize,
    j: u32,
    /// `mult · tr ρ^j`.
    rho_trace: Cx<T>,
    /// `tr Λ^k P^j` for `k = 0..=dim P`.
    minors: Vec<Cx<T>>,
    /// `det(I - P^j)`, assembled from the minors.
    det: Cx<T>,
}

fn enumerate_atoms<T: Real>(orbits: &[PrimeOrbit<T>], t_max: T) -> Result<Vec<Atom<T>>> {
    let cutoff = t_max * (T::one() + lit(CUTOFF_SLACK));
    let mut atoms = Vec::new();
    for (index, orbit) in orbits.iter().enumerate() {
        if !(orbit.length > T::zero()) {
            return Err(Error::InvalidArgument(format!("orbit {index} has non-positive length")));
        }
        let p = orbit.poincare.map(|x| Cx::new(x, T::zero()));
        let dim = p.nrows();
        let mult = Cx::new(lit::<T>(orbit.multiplicity as f64), T::zero());
        let spectrum = eigenvalues(&p)?;
        let mut j = 1u32;
        loop {
            let t = lit::<T>(f64::from(j)) * orbit.length;
            if t > cutoff {
                break;
            }
            let pj = matrix_power(&p, j);
            let minors = if exact_integer_entries(&pj) {
                (0..=dim).map(|k| exterior_power_trace(&pj, k)).collect::<Result<Vec<_>>>()?
            } else {
                let powers: Vec<Cx<T>> = spectrum.iter().map(|z| z.powu(j)).collect();
                elementary_symmetric(&powers)
            };
            let det = minors
                .iter()
                .enumerate()
                .fold(Cx::new(T::zero(), T::zero()), |acc, (k, m)| {
                    acc + *m * lit::<T>(degree_sign(k as i64) as f64)
                });
            let scale = minors.iter().map(|z| z.modulus()).fold(T::zero(), |a, b| a + b);
            if det.modulus() < lit::<T>(NON_TRANSVERSE_REL) * scale {
                return Err(Error::NonTransverse { det: det.modulus().to_f64().unwrap_or(0.0) });
            }
            let rho_trace = trace(&matrix_power(&orbit.rho, j)) * mult;
            atoms.push(Atom { t, orbit: index, j, rho_trace, minors, det });
            j += 1;
        }
    }
    atoms.sort_by(|a, b| a.t.partial_cmp(&b.t).expect("finite").then(a.orbit.cmp(&b.orbit)));
    Ok(atoms)
}

/// Integer entries small enough that 3x3 minors are computed exactly.
fn exact_integer_entries<T: Real>(p: &CMatrix<T>) -> bool {
    let bound = lit::<T>(f64::from(1u32 << 17));
    p.iter().all(|z| z.im == T::zero() && z.re.fract() == T::zero() && z.re.abs() < bound)
}

/// `e_0, ..., e_n` of the given numbers.
fn elementary_symmetric<T: Real>(values: &[Cx<T>]) -> Vec<Cx<T>> {
    let mut e = vec![Cx::new(T::zero(), T::zero()); values.len() + 1];
    e[0] = Cx::new(T::one(), T::zero());
    for (i, &v) in values.iter().enumerate() {
        for k in (1..=i + 1).rev() {
            let prev = e[k - 1];
            e[k] += prev * v;
        }
    }
    e
}

fn shortest_length<T: Real>(orbits: &[PrimeOrbit<T>]) -> T {
    orbits.iter().map(|o| o.length).fold(T::max_value().expect("bounded"), |a, b| a.min(b))
}

/// Atoms of `tr♭ e^{-t L_k}` up to `t_max`: weight
/// `ℓ · tr ρ^j · tr Λ^k P^j / |det(I - P^j)|` at `t = jℓ`.
pub fn flat_trace_evolution<T: Real>(orbits: &[PrimeOrbit<T>], k: usize, t_max: T) -> Result<AtomicDistribution<T>> {
    if orbits.is_empty() {
        return Ok(AtomicDistribution { atoms: Vec::new(), t_min: T::one() });
    }
    check_degree(orbits, k)?;
    let atoms = enumerate_atoms(orbits, t_max)?;
    let list = atoms
        .iter()
        .map(|a| {
            let len = Cx::new(orbits[a.orbit].length, T::zero());
            (a.t, len * a.rho_trace * a.minors[k] / a.det.modulus())
        })
        .collect();
    AtomicDistribution::new(list, shortest_length(orbits))
}

fn check_degree<T: Real>(orbits: &[PrimeOrbit<T>], k: usize) -> Result<()> {
    for o in orbits {
        if k > o.poincare.nrows() {
            return Err(Error::InvalidArgument(format!(
                "degree {k} exceeds transverse dimension {}",
                o.poincare.nrows()
            )));
        }
    }
    Ok(())
}

/// Sums `Σ c_a e^{-λ t_a}` over atoms in order and estimates the tail.
fn accumulate<T: Real>(terms: &[(T, Cx<T>)], lambda: Cx<T>, l_max: T, t_min: T, k: Option<usize>) -> ZetaSeries<T> {
    let value = terms
        .iter()
        .fold(Cx::new(T::zero(), T::zero()), |acc, &(t, c)| acc + c * (-lambda * Cx::new(t, T::zero())).exp());
    let (tail_bound, converged) = tail_estimate(terms, lambda.re, t_min);
    ZetaSeries { lambda, k, value, l_max, tail_bound, converged }
}

/// Geometric tail estimate. Coefficient moduli are binned with width
/// `t_min`; the largest bin-to-bin growth rate `h` over the upper half of the
/// bins (floored at zero) extrapolates the last bin with ratio
/// `q = exp((h - Re λ) t_min)`.
fn tail_estimate<T: Real>(terms: &[(T, Cx<T>)], sigma: T, t_min: T) -> (T, bool) {
    if terms.is_empty() {
        return (T::zero(), true);
    }
    let mut bins: Vec<(i64, T)> = Vec::new();
    for &(t, c) in terms {
        let b = (t / t_min + lit(1e-9)).floor().to_i64().unwrap_or(i64::MAX);
        match bins.last_mut() {
            Some((last, acc)) if *last == b => *acc += c.modulus(),
            _ => bins.push((b, c.modulus())),
        }
    }
    let first_upper = bins.last().map_or(0, |b| b.0 / 2);
    let mut h = T::zero();
    for w in bins.windows(2) {
        let ((b0, c0), (b1, c1)) = (w[0], w[1]);
        if b1 < first_upper || c0 <= T::zero() || c1 <= T::zero() {
            continue;
        }
        let rate = (c1 / c0).ln() / (lit::<T>((b1 - b0) as f64) * t_min);
        h = h.max(rate);
    }
    let (b_last, c_last) = *bins.last().expect("non-empty");
    let log_q = (h - sigma) * t_min;
    if log_q >= T::zero() {
        return (T::one() / T::zero(), false);
    }
    let q = log_q.exp();
    let t_last = lit::<T>(b_last as f64) * t_min;
    let tail = lit::<T>(TAIL_SAFETY) * c_last * (-sigma * t_last).exp() * q / (T::one() - q);
    (tail, true)
}

/// Truncated `log ζ_{ρ,k}(λ) = -∫ t^{-1} e^{-λt} tr♭ e^{-t L_k} dt`.
pub fn log_zeta_k<T: Real>(orbits: &[PrimeOrbit<T>], k: usize, lambda: Cx<T>, l_max: T) -> Result<ZetaSeries<T>> {
    let dist = flat_trace_evolution(orbits, k, l_max)?;
    let terms: Vec<(T, Cx<T>)> = dist
        .atoms()
        .iter()
        .map(|&(t, w)| (t, -w / Cx::new(t, T::zero())))
        .collect();
    Ok(accumulate(&terms, lambda, l_max, dist.t_min(), Some(k)))
}

/// `Σ_γ log det(I - ρ(γ) e^{-λℓ})` expanded as `-Σ_j tr ρ^j e^{-jλℓ} / j`.
pub fn euler_product_log_zeta<T: Real>(orbits: &[PrimeOrbit<T>], lambda: Cx<T>, l_max: T) -> Result<ZetaSeries<T>> {
    let atoms = enumerate_atoms(orbits, l_max)?;
    let terms: Vec<(T, Cx<T>)> = atoms.iter().map(|a| (a.t, euler_coefficient(a))).collect();
    let mut series = accumulate(&terms, lambda, l_max, shortest_length(orbits), None);
    if orbits.iter().any(|o| {
        let r = eigenvalues(&o.rho).map(|e| e.iter().map(|z| z.modulus()).fold(T::zero(), |a, b| a.max(b)));
        r.map_or(true, |r| r * (-lambda.re * o.length).exp() >= T::one())
    }) {
        series.converged = false;
    }
    Ok(series)
}

fn euler_coefficient<T: Real>(a: &Atom<T>) -> Cx<T> {
    -a.rho_trace / Cx::new(lit(f64::from(a.j)), T::zero())
}

/// `(-1)^m Σ_k (-1)^k log ζ_{ρ,k}(λ)`, summed atom by atom so that each
/// `(γ, j)` contributes `(-1)^m sign det(I - P^j)` times its Euler term.
pub fn alternating_assembly<T: Real>(orbits: &[PrimeOrbit<T>], m: usize, lambda: Cx<T>, l_max: T) -> Result<ZetaSeries<T>> {
    for o in orbits {
        if o.poincare.nrows() != 2 * m {
            return Err(Error::Dimension(format!(
                "Poincaré map is {}x{}, transverse bundle has dimension {}",
                o.poincare.nrows(),
                o.poincare.ncols(),
                2 * m
            )));
        }
    }
    let atoms = enumerate_atoms(orbits, l_max)?;
    let sign = lit::<T>(rank_sign(m) as f64);
    let terms: Vec<(T, Cx<T>)> = atoms
        .iter()
        .map(|a| {
            let ratio = a.det / Cx::new(a.det.modulus(), T::zero());
            (a.t, euler_coefficient(a) * ratio * sign)
        })
        .collect();
    Ok(accumulate(&terms, lambda, l_max, shortest_length(orbits), None))
}

/// Signs `(-1)^m sign det(I - P^j)` of every atom up to `l_max`; the Euler
/// product and the assembly agree term by term exactly when all are `+1`.
pub fn assembly_sign_table<T: Real>(orbits: &[PrimeOrbit<T>], m: usize, l_max: T) -> Result<Vec<(T, i8)>> {
    let atoms = enumerate_atoms(orbits, l_max)?;
    Ok(atoms
        .iter()
        .map(|a| {
            let s = if a.det.re > T::zero() { 1 } else { -1 };
            (a.t, (s * rank_sign(m)) as i8)
        })
        .collect())
}

/// `det♭(L_k + λ) = exp(log ζ_{ρ,k}(λ))` through the atoms of the flat
/// trace.
pub fn flat_determinant_orbit<T: Real>(orbits: &[PrimeOrbit<T>], k: usize, lambda: Cx<T>, l_max: T) -> Result<(Cx<T>, ZetaSeries<T>)> {
    let series = log_zeta_k(orbits, k, lambda, l_max)?;
    Ok((series.value.exp(), series))
}

/// Zeta-regularised `det(B + λ)` for a matrix generator: the Mellin
/// transform `(1/Γ(s)) ∫ t^{s-1} e^{-λt} tr e^{-tB} dt = Σ_i (μ_i + λ)^{-s}`
/// has `s`-derivative `-Σ_i log(μ_i + λ)` at zero.
pub fn flat_det_via_f<T: Real>(b: &CMatrix<T>, lambda: Cx<T>) -> Result<Cx<T>> {
    if !b.is_square() {
        return Err(Error::Dimension("generator must be square".into()));
    }
    let mut log_det = Cx::new(T::zero(), T::zero());
    for mu in eigenvalues(b)? {
        let z = mu + lambda;
        if z.re <= T::zero() {
            return Err(Error::BranchCut { re: z.re.to_f64().unwrap_or(f64::NAN) });
        }
        log_det += z.ln();
    }
    Ok(log_det.exp())
}

/// `Σ_i (μ_i + λ)^{-s}` for real `s`, the Γ-normalised Mellin transform of
/// the heat trace.
pub fn spectral_zeta<T: Real>(b: &CMatrix<T>, s: T, lambda: Cx<T>) -> Result<Cx<T>> {
    let mut total = Cx::new(T::zero(), T::zero());
    for mu in eigenvalues(b)? {
        let z = mu + lambda;
        if z.re <= T::zero() {
            return Err(Error::BranchCut { re: z.re.to_f64().unwrap_or(f64::NAN) });
        }
        total += (-z.ln() * Cx::new(s, T::zero())).exp();
    }
    Ok(total)
}

/// `|tr(AB) - tr(BA)| < 1e-10`.
pub fn flat_trace_cyclicity_check<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> Result<bool> {
    if a.ncols() != b.nrows() || b.ncols() != a.nrows() {
        return Err(Error::Dimension(format!(
            "cannot form both products of {:?} and {:?}",
            a.shape(),
            b.shape()
        )));
    }
    let lhs = trace(&(a * b));
    let rhs = trace(&(b * a));
    Ok((lhs - rhs).modulus() < lit(CYCLICITY_TOL))
}

/// Real matrix helper for tests and callers holding real Poincaré data.
pub fn complex_of<T: Real>(p: &DMatrix<T>) -> CMatrix<T> {
    p.map(|x| Cx::new(x, T::zero()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orbits::{enumerate_prime_orbits, HyperbolicToralModel, Representation};

    fn cx(re: f64, im: f64) -> Cx<f64> {
        Cx::new(re, im)
    }

    fn cat(n_max: u32) -> Vec<PrimeOrbit<f64>> {
        enumerate_prime_orbits(&HyperbolicToralModel::cat_map(Representation::Trivial), n_max).unwrap()
    }

    #[test]
    fn exterior_power_defining_cases() {
        let p = CMatrix::from_row_slice(2, 2, &[cx(2.0, 0.0), cx(1.0, 0.0), cx(1.0, 0.0), cx(1.0, 0.0)]);
        assert_eq!(exterior_power_trace(&p, 0).unwrap(), cx(1.0, 0.0));
        assert_eq!(exterior_power_trace(&p, 1).unwrap(), cx(3.0, 0.0));
        assert_eq!(exterior_power_trace(&p, 2).unwrap(), cx(1.0, 0.0));
        assert!(exterior_power_trace(&p, 3).is_err());
    }

    #[test]
    fn single_atom_example() {
        let d = flat_trace_evolution(&cat(1), 0, 1.0).unwrap();
        assert_eq!(d.atoms(), &[(1.0, cx(1.0, 0.0))]);
        assert!(flat_trace_evolution::<f64>(&[], 0, 5.0).unwrap().is_empty());
    }

    #[test]
    fn single_orbit_euler_is_log_one_minus() {
        let orbit = PrimeOrbit {
            length: 1.0,
            period: Some(1),
            poincare: DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 1.0]),
            rho: CMatrix::from_element(1, 1, cx(1.0, 0.0)),
            multiplicity: 1,
        };
        let lambda = cx(2.0, 0.3);
        let s = euler_product_log_zeta(&[orbit], lambda, 60.0).unwrap();
        let exact = (cx(1.0, 0.0) - (-lambda).exp()).ln();
        assert!((s.value - exact).norm() < 1e-14);
        assert!(s.converged);
    }

    #[test]
    fn empty_orbits() {
        let s = log_zeta_k::<f64>(&[], 0, cx(1.0, 0.0), 10.0).unwrap();
        assert_eq!(s.value, cx(0.0, 0.0));
        let (det, _) = flat_determinant_orbit::<f64>(&[], 1, cx(1.0, 0.0), 10.0).unwrap();
        assert_eq!(det, cx(1.0, 0.0));
        assert_eq!(euler_product_log_zeta::<f64>(&[], cx(1.0, 0.0), 10.0).unwrap().value, cx(0.0, 0.0));
    }

    #[test]
    fn cat_assembly_is_termwise_euler() {
        let orbits = cat(12);
        for lambda in [2.5, 3.0, 4.0] {
            let e = euler_product_log_zeta(&orbits, cx(lambda, 0.0), 12.0).unwrap();
            let a = alternating_assembly(&orbits, 1, cx(lambda, 0.0), 12.0).unwrap();
            assert_eq!(e.value, a.value);
        }
        assert!(assembly_sign_table(&orbits, 1, 12.0).unwrap().iter().all(|&(_, s)| s == 1));
    }

    #[test]
    fn flat_det_examples() {
        let b = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![cx(1.0, 0.0), cx(2.0, 0.0)]));
        assert!((flat_det_via_f(&b, cx(0.0, 0.0)).unwrap() - cx(2.0, 0.0)).norm() < 1e-13);
        let z = CMatrix::<f64>::zeros(1, 1);
        assert!((flat_det_via_f(&z, cx(3.0, 0.0)).unwrap() - cx(3.0, 0.0)).norm() < 1e-13);
        assert!(matches!(flat_det_via_f(&z, cx(-1.0, 0.0)), Err(Error::BranchCut { .. })));
    }

    #[test]
    fn cyclicity_examples() {
        let a = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![cx(1.0, 0.0), cx(2.0, 0.0)]));
        let b = CMatrix::from_row_slice(2, 2, &[cx(0.0, 0.0), cx(1.0, 0.0), cx(0.0, 0.0), cx(0.0, 0.0)]);
        assert!(flat_trace_cyclicity_check(&a, &b).unwrap());
        assert_eq!(trace(&(&a * &b)), cx(0.0, 0.0));
        let c = CMatrix::<f64>::zeros(2, 3);
        assert!(flat_trace_cyclicity_check(&a, &c).is_err());
    }

    #[test]
    fn synthetic_two_atoms() {
        let d = AtomicDistribution::new(vec![(2.0, cx(0.5, 0.25)), (0.7, cx(-1.0, 0.0))], 0.5).unwrap();
        let lambda = cx(0.4, -1.1);
        let exact = -(cx(-1.0, 0.0) / 0.7 * (-lambda * 0.7).exp() + cx(0.5, 0.25) / 2.0 * (-lambda * 2.0).exp());
        assert!((d.log_flat_det(lambda) - exact).norm() < 1e-12);
    }
}
