//! Prime periodic orbits of explicit Anosov flows.
//!
//! Built-in models are suspensions of hyperbolic automorphisms of the
//! 2-torus with constant roof; other length spectra come in through
//! [`load_length_spectrum`].

use std::path::Path;

use nalgebra::{ComplexField, DMatrix};
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::linalg::eigenvalues;
use crate::scalar::{lit, CMatrix, Cx, Real};

/// Rank-one unitary representation of the fundamental group, evaluated on
/// an orbit by its winding around the suspension circle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Representation<T> {
    Trivial,
    /// `ρ(γ) = exp(iθ n)` for an orbit of winding `n`.
    Character(T),
}

impl<T: Real> Representation<T> {
    pub fn dimension(&self) -> usize {
        1
    }

    pub fn value(&self, winding: u64) -> Cx<T> {
        match *self {
            Representation::Trivial => Cx::new(T::one(), T::zero()),
            Representation::Character(theta) => {
                let phase = theta * lit::<T>(winding as f64);
                Cx::new(phase.cos(), phase.sin())
            }
        }
    }
}

/// Mapping torus of `A` acting on the 2-torus, with constant return time.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperbolicToralModel<T> {
    a: [[i64; 2]; 2],
    roof: T,
    rep: Representation<T>,
}

/// Outcome of the hyperbolicity test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnosovReport<T> {
    pub anosov: bool,
    /// Contraction rate `log|λ_u| / roof`; absent when not Anosov.
    pub theta: Option<T>,
}

impl<T: Real> HyperbolicToralModel<T> {
    pub fn new(a: [[i64; 2]; 2], roof: T, rep: Representation<T>) -> Result<Self> {
        let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        if det.abs() != 1 {
            return Err(Error::InvalidArgument(format!("det A = {det}, expected ±1")));
        }
        if !(roof > T::zero()) || !roof.is_finite() {
            return Err(Error::InvalidArgument("roof must be positive".into()));
        }
        Ok(Self { a, roof, rep })
    }

    /// The cat map `[[2,1],[1,1]]` with unit roof.
    pub fn cat_map(rep: Representation<T>) -> Self {
        Self::new([[2, 1], [1, 1]], T::one(), rep).expect("cat map is unimodular")
    }

    pub fn matrix(&self) -> [[i64; 2]; 2] {
        self.a
    }

    pub fn roof(&self) -> T {
        self.roof
    }

    pub fn representation(&self) -> Representation<T> {
        self.rep
    }

    /// Rank of the stable bundle; always 1 on the 2-torus.
    pub fn m(&self) -> usize {
        1
    }

    fn trace(&self) -> i64 {
        self.a[0][0] + self.a[1][1]
    }

    fn det(&self) -> i64 {
        self.a[0][0] * self.a[1][1] - self.a[0][1] * self.a[1][0]
    }

    fn real_matrix(&self) -> DMatrix<T> {
        DMatrix::from_fn(2, 2, |i, j| lit(self.a[i][j] as f64))
    }
}

/// Hyperbolicity of `A` decided on integers, plus the contraction rate.
pub fn anosov_check<T: Real>(model: &HyperbolicToralModel<T>) -> AnosovReport<T> {
    let (tr, det) = (model.trace(), model.det());
    let on_circle = (det == 1 && tr.abs() <= 2) || (det == -1 && tr == 0);
    if on_circle {
        return AnosovReport { anosov: false, theta: None };
    }
    let m = model.real_matrix().map(|x| Cx::new(x, T::zero()));
    let expanding = eigenvalues(&m)
        .expect("2x2 eigenvalues")
        .into_iter()
        .map(|z| z.modulus())
        .filter(|&r| r > T::one())
        .fold(None, |acc: Option<T>, r| Some(acc.map_or(r, |a| a.min(r))));
    AnosovReport {
        anosov: true,
        theta: expanding.map(|r| r.ln() / model.roof),
    }
}

fn big_power(a: [[i64; 2]; 2], n: u32) -> [[BigInt; 2]; 2] {
    let mul = |x: &[[BigInt; 2]; 2], y: &[[BigInt; 2]; 2]| {
        let e = |i: usize, j: usize| &x[i][0] * &y[0][j] + &x[i][1] * &y[1][j];
        [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]]
    };
    let mut result = [[BigInt::one(), BigInt::zero()], [BigInt::zero(), BigInt::one()]];
    let mut base = a.map(|row| row.map(BigInt::from));
    let mut e = n;
    while e > 0 {
        if e & 1 == 1 {
            result = mul(&result, &base);
        }
        e >>= 1;
        if e > 0 {
            base = mul(&base, &base);
        }
    }
    result
}

/// `det(I - A^n)` as an exact integer.
pub fn transverse_determinant<T: Real>(model: &HyperbolicToralModel<T>, n: u32) -> BigInt {
    let p = big_power(model.a, n);
    let tr = &p[0][0] + &p[1][1];
    let det = &p[0][0] * &p[1][1] - &p[0][1] * &p[1][0];
    BigInt::one() - tr + det
}

/// Number of fixed points of `A^n` on the torus, `|det(A^n - I)|`.
pub fn fixed_point_count<T: Real>(model: &HyperbolicToralModel<T>, n: u32) -> Result<BigUint> {
    if n == 0 {
        return Err(Error::InvalidArgument("period must be positive".into()));
    }
    if !anosov_check(model).anosov {
        return Err(Error::NotAnosov);
    }
    Ok(transverse_determinant(model, n).abs().to_biguint().expect("absolute value"))
}

/// Number of prime orbits of each period `1..=n_max`, by the sieve
/// `n·p(n) = F(n) - Σ_{d | n, d < n} d·p(d)`.
pub fn prime_orbit_counts<T: Real>(model: &HyperbolicToralModel<T>, n_max: u32) -> Result<Vec<BigUint>> {
    let mut counts: Vec<BigUint> = Vec::with_capacity(n_max as usize);
    for n in 1..=n_max {
        let mut rest = BigInt::from(fixed_point_count(model, n)?);
        for d in 1..n {
            if n % d == 0 {
                rest -= BigInt::from(d) * BigInt::from(counts[(d - 1) as usize].clone());
            }
        }
        let (q, r) = rest.div_rem(&BigInt::from(n));
        if !r.is_zero() || q.is_negative() {
            return Err(Error::SieveInconsistent { period: n });
        }
        counts.push(q.to_biguint().expect("non-negative"));
    }
    Ok(counts)
}

/// A prime closed orbit (or `multiplicity` orbits sharing the same data).
#[derive(Debug, Clone, PartialEq)]
pub struct PrimeOrbit<T: Real> {
    pub length: T,
    /// Map period for suspensions; absent for loaded spectra.
    pub period: Option<u32>,
    /// Linearized Poincaré map on the stable ⊕ unstable bundle, `2m x 2m`.
    pub poincare: DMatrix<T>,
    pub rho: CMatrix<T>,
    pub multiplicity: u64,
}

impl<T: Real> PrimeOrbit<T> {
    /// `m`, half the transverse dimension.
    pub fn m(&self) -> usize {
        self.poincare.nrows() / 2
    }
}

/// Prime orbits of periods `1..=n_max`, one record per period.
pub fn enumerate_prime_orbits<T: Real>(model: &HyperbolicToralModel<T>, n_max: u32) -> Result<Vec<PrimeOrbit<T>>> {
    if n_max == 0 {
        return Err(Error::InvalidArgument("n_max must be at least 1".into()));
    }
    let counts = prime_orbit_counts(model, n_max)?;
    let a = model.real_matrix();
    let mut power = DMatrix::<T>::identity(2, 2);
    let mut out = Vec::new();
    for (i, count) in counts.iter().enumerate() {
        let n = i as u32 + 1;
        power = &power * &a;
        if count.is_zero() {
            continue;
        }
        let multiplicity = count
            .to_u64()
            .ok_or_else(|| Error::InvalidArgument(format!("orbit count at period {n} exceeds 64 bits")))?;
        out.push(PrimeOrbit {
            length: lit::<T>(f64::from(n)) * model.roof,
            period: Some(n),
            poincare: power.clone(),
            rho: CMatrix::from_element(1, 1, model.rep.value(u64::from(n))),
            multiplicity,
        });
    }
    Ok(out)
}

/// Sign of `det(I - A^n)` for `n = 1..=n_max`.
pub fn transverse_sign_table<T: Real>(model: &HyperbolicToralModel<T>, n_max: u32) -> Vec<i8> {
    (1..=n_max)
        .map(|n| {
            let d = transverse_determinant(model, n);
            if d.is_positive() {
                1
            } else if d.is_negative() {
                -1
            } else {
                0
            }
        })
        .collect()
}

const SPECTRUM_HEADER: [&str; 6] = ["length", "multiplicity", "m", "P_entries", "rho_re", "rho_im"];
const UNIT_CIRCLE_TOL: f64 = 1e-9;

fn row_error(line: u64, message: impl Into<String>) -> Error {
    Error::SpectrumRow { line, message: message.into() }
}

fn parse_f64(field: &str, name: &str, line: u64) -> Result<f64> {
    let v: f64 = field
        .trim()
        .parse()
        .map_err(|_| row_error(line, format!("{name}: cannot parse '{field}'")))?;
    if !v.is_finite() {
        return Err(row_error(line, format!("{name} is not finite")));
    }
    Ok(v)
}

fn parse_count(field: &str, name: &str, line: u64) -> Result<u64> {
    let v = parse_f64(field, name, line)?;
    if v < 1.0 || v.fract() != 0.0 || v > u64::MAX as f64 {
        return Err(row_error(line, format!("{name} must be a positive integer")));
    }
    Ok(v as u64)
}

/// Reads a length spectrum in the CSV layout
/// `length,multiplicity,m,P_entries,rho_re,rho_im` (`P_entries` is a
/// `;`-separated row-major `2m x 2m` matrix; `#` starts a comment line).
/// Rows with identical data are merged and the result is sorted by length.
pub fn load_length_spectrum<T: Real>(path: impl AsRef<Path>) -> Result<Vec<PrimeOrbit<T>>> {
    let text = std::fs::read_to_string(path.as_ref())
        .map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
    parse_length_spectrum(&text)
}

/// [`load_length_spectrum`] on in-memory text.
pub fn parse_length_spectrum<T: Real>(text: &str) -> Result<Vec<PrimeOrbit<T>>> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| row_error(1, e.to_string()))?.clone();
    if header.iter().collect::<Vec<_>>() != SPECTRUM_HEADER {
        let line = header.position().map_or(1, |p| p.line());
        return Err(row_error(line, format!("header must be {}", SPECTRUM_HEADER.join(","))));
    }
    let mut rows: Vec<(PrimeOrbit<f64>, u64)> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            row_error(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != SPECTRUM_HEADER.len() {
            return Err(row_error(line, format!("expected 6 fields, found {}", record.len())));
        }
        let length = parse_f64(&record[0], "length", line)?;
        if length <= 0.0 {
            return Err(row_error(line, "length must be positive"));
        }
        let multiplicity = parse_count(&record[1], "multiplicity", line)?;
        let m = parse_count(&record[2], "m", line)? as usize;
        let entries = record[3]
            .split(';')
            .map(|s| parse_f64(s, "P_entries", line))
            .collect::<Result<Vec<f64>>>()?;
        let dim = 2 * m;
        if entries.len() != dim * dim {
            return Err(row_error(
                line,
                format!("P_entries has {} values, a {dim}x{dim} matrix needs {}", entries.len(), dim * dim),
            ));
        }
        let poincare = DMatrix::from_row_slice(dim, dim, &entries);
        let spectrum = eigenvalues(&poincare.map(|x| Cx::new(x, 0.0)))?;
        if spectrum.iter().any(|z| (z.norm() - 1.0).abs() < UNIT_CIRCLE_TOL) {
            return Err(row_error(line, "Poincaré map has an eigenvalue on the unit circle"));
        }
        let rho = Cx::new(parse_f64(&record[4], "rho_re", line)?, parse_f64(&record[5], "rho_im", line)?);
        if (rho.norm() - 1.0).abs() > UNIT_CIRCLE_TOL {
            return Err(row_error(line, "rho must have modulus 1"));
        }
        let orbit = PrimeOrbit {
            length,
            period: None,
            poincare,
            rho: CMatrix::from_element(1, 1, rho),
            multiplicity,
        };
        match rows.iter_mut().find(|(o, _)| o.length == length && o.poincare == orbit.poincare && o.rho == orbit.rho) {
            Some((o, _)) => {
                o.multiplicity = o
                    .multiplicity
                    .checked_add(multiplicity)
                    .ok_or_else(|| row_error(line, "multiplicity overflow"))?;
            }
            None => rows.push((orbit, line)),
        }
    }
    rows.sort_by(|a, b| a.0.length.total_cmp(&b.0.length).then(a.1.cmp(&b.1)));
    Ok(rows
        .into_iter()
        .map(|(o, _)| PrimeOrbit {
            length: lit(o.length),
            period: None,
            poincare: o.poincare.map(lit),
            rho: o.rho.map(|z| Cx::new(lit(z.re), lit(z.im))),
            multiplicity: o.multiplicity,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cat() -> HyperbolicToralModel<f64> {
        HyperbolicToralModel::cat_map(Representation::Trivial)
    }

    #[test]
    fn cat_map_counts() {
        let f: Vec<u64> = (1..=3).map(|n| fixed_point_count(&cat(), n).unwrap().to_u64().unwrap()).collect();
        assert_eq!(f, [1, 5, 16]);
        let p: Vec<u64> = prime_orbit_counts(&cat(), 3).unwrap().iter().map(|c| c.to_u64().unwrap()).collect();
        assert_eq!(p, [1, 2, 5]);
    }

    #[test]
    fn anosov_examples() {
        let r = anosov_check(&cat());
        assert!(r.anosov);
        assert!((r.theta.unwrap() - ((3.0 + 5f64.sqrt()) / 2.0).ln()).abs() < 1e-12);
        let id = HyperbolicToralModel::<f64>::new([[1, 0], [0, 1]], 1.0, Representation::Trivial).unwrap();
        assert!(!anosov_check(&id).anosov);
        let rot = HyperbolicToralModel::<f64>::new([[0, -1], [1, 0]], 1.0, Representation::Trivial).unwrap();
        assert!(!anosov_check(&rot).anosov);
        assert_eq!(fixed_point_count(&rot, 1), Err(Error::NotAnosov));
    }

    #[test]
    fn single_period_census() {
        let model = HyperbolicToralModel::new([[2, 1], [1, 1]], 1.0, Representation::Trivial).unwrap();
        let orbits = enumerate_prime_orbits(&model, 1).unwrap();
        assert_eq!(orbits.len(), 1);
        assert_eq!(orbits[0].length, 1.0);
        assert_eq!(orbits[0].poincare, DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 1.0]));
        assert_eq!(orbits[0].rho[(0, 0)], Cx::new(1.0, 0.0));
    }

    #[test]
    fn cat_map_sign_is_negative() {
        assert!(transverse_sign_table(&cat(), 30).iter().all(|&s| s == -1));
    }

    #[test]
    fn spectrum_header_only_is_empty() {
        let v: Vec<PrimeOrbit<f64>> = parse_length_spectrum("length,multiplicity,m,P_entries,rho_re,rho_im\n").unwrap();
        assert!(v.is_empty());
    }

    #[test]
    fn spectrum_rejects_bad_rows() {
        let text = "length,multiplicity,m,P_entries,rho_re,rho_im\n# note\n1.0,1,1,2;0;0;0.5,1,0\n1.0,1,1,1;0;0;1,1,0\n";
        match parse_length_spectrum::<f64>(text) {
            Err(Error::SpectrumRow { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
        let text = "length,multiplicity,m,P_entries,rho_re,rho_im\n1.0,x,1,2;0;0;0.5,1,0\n";
        assert!(matches!(parse_length_spectrum::<f64>(text), Err(Error::SpectrumRow { line: 2, .. })));
    }
}
