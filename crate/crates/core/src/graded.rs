//! Finite-dimensional graded linear algebra.
//!
//! A [`GradedOperator`] acts blockwise on a [`GradedVectorSpace`]; the block
//! at degree `k` maps `V^k -> V^{k + shift}`. Supertraces and
//! superdeterminants alternate over the degree, and [`ToyBFComplex`] is the
//! two-term complex `V0 --d--> V1 --iota--> V0` used as the matrix-scale
//! stand-in for the gauge-fixed theory.

use std::collections::BTreeMap;

use nalgebra::{Complex, ComplexField};

use crate::error::{Error, Result};
use crate::linalg::{determinant, eigenvalues, inverse, trace};
use crate::scalar::{lit, parity_sign, CMatrix, Cx, Real};

/// Degrees with their (non-negative) dimensions. Degrees are distinct by
/// construction since they key a map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradedVectorSpace {
    dims: BTreeMap<i32, usize>,
}

impl GradedVectorSpace {
    pub fn new(dims: impl IntoIterator<Item = (i32, usize)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (k, n) in dims {
            if map.insert(k, n).is_some() {
                return Err(Error::InvalidArgument(format!("degree {k} listed twice")));
            }
        }
        Ok(Self { dims: map })
    }

    pub fn dim(&self, degree: i32) -> usize {
        self.dims.get(&degree).copied().unwrap_or(0)
    }

    pub fn degrees(&self) -> impl Iterator<Item = i32> + '_ {
        self.dims.keys().copied()
    }

    pub fn total_dim(&self) -> usize {
        self.dims.values().sum()
    }

    pub fn contains(&self, degree: i32) -> bool {
        self.dims.contains_key(&degree)
    }
}

/// Block operator on a graded space with a fixed degree shift.
#[derive(Debug, Clone, PartialEq)]
pub struct GradedOperator<T: Real> {
    space: GradedVectorSpace,
    shift: i32,
    blocks: BTreeMap<i32, CMatrix<T>>,
}

impl<T: Real> GradedOperator<T> {
    /// Missing blocks are zero. Every supplied block must sit at a degree of
    /// the space and have shape `dim(k + shift) x dim(k)`.
    pub fn new(
        space: GradedVectorSpace,
        shift: i32,
        blocks: impl IntoIterator<Item = (i32, CMatrix<T>)>,
    ) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (k, m) in blocks {
            if !space.contains(k) {
                return Err(Error::Dimension(format!("block at degree {k} outside the space")));
            }
            let (rows, cols) = (space.dim(k + shift), space.dim(k));
            if m.shape() != (rows, cols) {
                return Err(Error::Dimension(format!(
                    "block at degree {k} has shape {:?}, expected ({rows}, {cols})",
                    m.shape()
                )));
            }
            map.insert(k, m);
        }
        for k in space.degrees() {
            map.entry(k)
                .or_insert_with(|| CMatrix::zeros(space.dim(k + shift), space.dim(k)));
        }
        Ok(Self { space, shift, blocks: map })
    }

    /// Degree-preserving operator from its diagonal blocks.
    pub fn degree_preserving(blocks: impl IntoIterator<Item = (i32, CMatrix<T>)>) -> Result<Self> {
        let blocks: Vec<_> = blocks.into_iter().collect();
        for (k, m) in &blocks {
            if !m.is_square() {
                return Err(Error::Dimension(format!("block at degree {k} is not square")));
            }
        }
        let space = GradedVectorSpace::new(blocks.iter().map(|(k, m)| (*k, m.nrows())))?;
        Self::new(space, 0, blocks)
    }

    pub fn identity(space: &GradedVectorSpace) -> Self {
        let blocks = space
            .degrees()
            .map(|k| (k, CMatrix::identity(space.dim(k), space.dim(k))))
            .collect::<Vec<_>>();
        Self::new(space.clone(), 0, blocks).expect("identity blocks are well-shaped")
    }

    pub fn space(&self) -> &GradedVectorSpace {
        &self.space
    }

    pub fn shift(&self) -> i32 {
        self.shift
    }

    pub fn block(&self, degree: i32) -> Option<&CMatrix<T>> {
        self.blocks.get(&degree)
    }

    pub fn blocks(&self) -> impl Iterator<Item = (i32, &CMatrix<T>)> {
        self.blocks.iter().map(|(k, m)| (*k, m))
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.space != other.space {
            return Err(Error::Dimension("composition of operators on different spaces".into()));
        }
        let shift = self.shift + other.shift;
        let mut blocks = Vec::new();
        for (k, inner) in &other.blocks {
            let mid = k + other.shift;
            let out = match self.blocks.get(&mid) {
                Some(outer) => outer * inner,
                None => CMatrix::zeros(self.space.dim(k + shift), self.space.dim(*k)),
            };
            blocks.push((*k, out));
        }
        Self::new(self.space.clone(), shift, blocks)
    }

    fn combine(&self, other: &Self, sign: Cx<T>) -> Result<Self> {
        if self.space != other.space || self.shift != other.shift {
            return Err(Error::Dimension("sum of incompatible graded operators".into()));
        }
        let blocks = self
            .blocks
            .iter()
            .map(|(k, a)| (*k, a + other.blocks[k].map(|z| z * sign)))
            .collect::<Vec<_>>();
        Self::new(self.space.clone(), self.shift, blocks)
    }

    /// Graded commutator `[a, b] = ab - (-1)^{|a||b|} ba`.
    pub fn graded_commutator(&self, other: &Self) -> Result<Self> {
        let ab = self.compose(other)?;
        let ba = other.compose(self)?;
        let s = parity_sign(i64::from(self.shift) * i64::from(other.shift));
        ab.combine(&ba, Complex::new(lit(-(s as f64)), T::zero()))
    }

    fn require_degree_preserving(&self) -> Result<()> {
        if self.shift != 0 {
            return Err(Error::NotDegreePreserving(self.shift));
        }
        Ok(())
    }

    /// `Σ_k (-1)^k tr(A_k)`.
    pub fn supertrace(&self) -> Result<Cx<T>> {
        self.require_degree_preserving()?;
        Ok(self.blocks.iter().fold(Complex::new(T::zero(), T::zero()), |acc, (k, m)| {
            let t = trace(m);
            if parity_sign(i64::from(*k)) > 0 {
                acc + t
            } else {
                acc - t
            }
        }))
    }

    /// `Π_k det(A_k)^{(-1)^k}`.
    pub fn superdeterminant(&self) -> Result<Cx<T>> {
        self.require_degree_preserving()?;
        let mut out = Complex::new(T::one(), T::zero());
        for (k, m) in &self.blocks {
            let (det, singular) = determinant(m)?;
            if singular {
                return Err(Error::SingularBlock { degree: *k });
            }
            if parity_sign(i64::from(*k)) > 0 {
                out *= det;
            } else {
                out /= det;
            }
        }
        Ok(out)
    }

    /// `|sdet(A)|^{-1/2}`; the phase `exp(iπ/4 sign A)` is not represented.
    pub fn gaussian_partition(&self) -> Result<T> {
        let sdet = self.superdeterminant()?;
        Ok(sdet.modulus().powf(lit(-0.5)))
    }
}

/// Two-term complex `V0 --d--> V1 --iota--> V0` with invertible
/// `L = iota d` on `V0` (and `d iota` on `V1`).
#[derive(Debug, Clone)]
pub struct ToyBFComplex<T: Real> {
    d: CMatrix<T>,
    iota: CMatrix<T>,
    l0: CMatrix<T>,
    l1: CMatrix<T>,
}

/// Both evaluation routes of the gauge-fixed partition function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartitionValue<T> {
    /// `|det(iota (d + ħ L^{-1} d))|` on `V0`.
    pub gauge_fixed: T,
    /// `|det(L + ħ)|`.
    pub direct: T,
    /// `-ħ` is (numerically) an eigenvalue of `L`.
    pub resonance: bool,
}

impl<T: Real> ToyBFComplex<T> {
    pub fn new(d: CMatrix<T>, iota: CMatrix<T>) -> Result<Self> {
        let n = d.nrows();
        if !d.is_square() || iota.shape() != (n, n) {
            return Err(Error::Dimension(format!(
                "d is {:?} and iota is {:?}; both must be n x n",
                d.shape(),
                iota.shape()
            )));
        }
        let l0 = &iota * &d;
        let l1 = &d * &iota;
        let (_, singular) = determinant(&l0)?;
        if singular {
            return Err(Error::ZeroResonance);
        }
        Ok(Self { d, iota, l0, l1 })
    }

    /// Complex with `iota = I`, so `L = d`.
    pub fn from_generator(l: CMatrix<T>) -> Result<Self> {
        let n = l.nrows();
        Self::new(l, CMatrix::identity(n, n))
    }

    pub fn dim(&self) -> usize {
        self.d.nrows()
    }

    pub fn d(&self) -> &CMatrix<T> {
        &self.d
    }

    pub fn iota(&self) -> &CMatrix<T> {
        &self.iota
    }

    /// `L` on `V0`, i.e. `iota d`.
    pub fn l0(&self) -> &CMatrix<T> {
        &self.l0
    }

    /// `L` on `V1`, i.e. `d iota`.
    pub fn l1(&self) -> &CMatrix<T> {
        &self.l1
    }

    fn space(&self) -> GradedVectorSpace {
        GradedVectorSpace::new([(0, self.dim()), (1, self.dim())]).expect("two distinct degrees")
    }

    /// `d` as a degree +1 operator.
    pub fn differential(&self) -> GradedOperator<T> {
        GradedOperator::new(self.space(), 1, [(0, self.d.clone())]).expect("shapes match")
    }

    /// `iota` as a degree -1 operator.
    pub fn contraction(&self) -> GradedOperator<T> {
        GradedOperator::new(self.space(), -1, [(1, self.iota.clone())]).expect("shapes match")
    }

    /// `L` as a degree-preserving operator on `V0 ⊕ V1`.
    pub fn generator(&self) -> GradedOperator<T> {
        GradedOperator::new(self.space(), 0, [(0, self.l0.clone()), (1, self.l1.clone())])
            .expect("shapes match")
    }

    /// `iota (d + ħ L^{-1} d)` restricted to `V0`.
    pub fn gauge_fixed_operator(&self, hbar: Cx<T>) -> Result<CMatrix<T>> {
        let l1_inv = inverse(&self.l1, "L on V1")?;
        let perturbed = &self.d + (&l1_inv * &self.d).map(|z| z * hbar);
        Ok(&self.iota * perturbed)
    }

    /// Values of ħ at which the gauge-fixed determinant vanishes, found as the
    /// eigenvalues of the pencil `iota d + ħ iota L^{-1} d`.
    pub fn critical_locus(&self) -> Result<Vec<Cx<T>>> {
        let l1_inv = inverse(&self.l1, "L on V1")?;
        let a = &self.iota * &self.d;
        let b = &self.iota * &l1_inv * &self.d;
        let b_inv = inverse(&b, "iota L^{-1} d")?;
        let pencil = -(b_inv * a);
        eigenvalues(&pencil)
    }
}

/// Partition function of the perturbed toy theory, `|det(L + ħ)|`, evaluated
/// through the gauge-fixed operator and cross-checked against the direct
/// determinant.
pub fn toy_bf_partition<T: Real>(complex: &ToyBFComplex<T>, hbar: Cx<T>) -> Result<PartitionValue<T>> {
    let (_, singular) = determinant(complex.l0())?;
    if singular {
        return Err(Error::ZeroResonance);
    }
    let gf = complex.gauge_fixed_operator(hbar)?;
    let (det_gf, _) = determinant(&gf)?;
    let shifted = complex.l0() + CMatrix::<T>::identity(complex.dim(), complex.dim()).map(|z: Cx<T>| z * hbar);
    let (det_direct, resonance) = determinant(&shifted)?;
    Ok(PartitionValue {
        gauge_fixed: det_gf.modulus(),
        direct: det_direct.modulus(),
        resonance,
    })
}
