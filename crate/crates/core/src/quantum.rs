//! Quantum states, measurements and channels.
//!
//! Everything here is generic over the numeric mode `R` ([`f64`] or
//! [`Rational`](crate::numeric::Rational)); amplitudes are `Complex<R>`.

use num_complex::Complex;
use num_traits::{One, Zero};
use rand::Rng;

use crate::error::{dim_err, Error, Result};
use crate::matrix::Matrix;
use crate::numeric::{Real, C64};

pub type CMatrix<R> = Matrix<Complex<R>>;

pub const VALIDATION_TOL: f64 = 1e-9;
pub const CONSERVATION_TOL: f64 = 1e-12;

/// Pure state `Σ α_i |q_i⟩` with unit norm.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector<R: Real> {
    amps: Vec<Complex<R>>,
}

impl<R: Real> StateVector<R> {
    /// Checks `|Σ|α_i|² - 1| <= tol`.
    pub fn new(amps: Vec<Complex<R>>, tol: f64) -> Result<Self> {
        if amps.is_empty() {
            return dim_err("state vector must have positive dimension");
        }
        let s = StateVector { amps };
        let defect = (s.norm_sqr().to_f64() - 1.0).abs();
        if defect > tol {
            return Err(Error::Validation {
                what: "state vector norm".into(),
                defect,
            });
        }
        Ok(s)
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(
            index < dim,
            "basis index {index} out of range for dimension {dim}"
        );
        let mut amps = vec![Complex::zero(); dim];
        amps[index] = Complex::one();
        StateVector { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex<R>] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> R {
        norm_sqr(&self.amps)
    }

    /// `U|ψ⟩`. The caller is responsible for `U` being unitary.
    pub fn apply(&self, u: &CMatrix<R>) -> Result<Self> {
        Ok(StateVector {
            amps: u.mul_vec(&self.amps)?,
        })
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn density(&self) -> DensityMatrix<R> {
        DensityMatrix {
            m: outer(&self.amps, &self.amps),
        }
    }
}

impl StateVector<f64> {
    /// Normalizes an arbitrary nonzero vector.
    pub fn normalized(amps: Vec<C64>) -> Result<Self> {
        let n = norm_sqr(&amps).sqrt();
        if n == 0.0 {
            return dim_err("cannot normalize the zero vector");
        }
        Ok(StateVector {
            amps: amps.into_iter().map(|a| a / n).collect(),
        })
    }
}

pub fn norm_sqr<R: Real>(v: &[Complex<R>]) -> R {
    v.iter().fold(R::zero(), |acc, a| acc + a.norm_sqr())
}

/// `|a⟩⟨b|`.
pub fn outer<R: Real>(a: &[Complex<R>], b: &[Complex<R>]) -> CMatrix<R> {
    Matrix::from_fn(a.len(), b.len(), |i, j| a[i].clone() * b[j].conj())
}

/// Hermitian, unit-trace matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix<R: Real> {
    m: CMatrix<R>,
}

impl<R: Real> DensityMatrix<R> {
    pub fn new(m: CMatrix<R>, tol: f64) -> Result<Self> {
        if !m.is_square() {
            return dim_err(format!("density matrix is {}x{}", m.rows(), m.cols()));
        }
        let herm = m.max_abs_diff(&m.adjoint())?;
        if herm > tol {
            return Err(Error::Validation {
                what: "density matrix hermiticity".into(),
                defect: herm,
            });
        }
        let tr = (crate::numeric::to_c64(&m.trace()) - C64::new(1.0, 0.0)).norm();
        if tr > tol {
            return Err(Error::Validation {
                what: "density matrix trace".into(),
                defect: tr,
            });
        }
        let rho = DensityMatrix { m };
        debug_assert!(rho.is_positive_semidefinite(VALIDATION_TOL));
        Ok(rho)
    }

    pub fn pure(dim: usize, index: usize) -> Self {
        StateVector::basis(dim, index).density()
    }

    pub fn dim(&self) -> usize {
        self.m.rows()
    }

    pub fn matrix(&self) -> &CMatrix<R> {
        &self.m
    }

    pub fn trace(&self) -> Complex<R> {
        self.m.trace()
    }

    /// Population `ρ[i,i]` (real part).
    pub fn population(&self, i: usize) -> R {
        self.m[(i, i)].re.clone()
    }

    /// Smallest-eigenvalue test `λ_min >= -tol`, done as a Cholesky attempt
    /// on `ρ + tol·I` in float arithmetic. Meant for debug and test paths.
    pub fn is_positive_semidefinite(&self, tol: f64) -> bool {
        let n = self.dim();
        let mut a = self.m.to_c64();
        for i in 0..n {
            a[(i, i)] += C64::new(tol, 0.0);
        }
        // in-place lower Cholesky factor
        let mut l = Matrix::<C64>::zeros(n, n);
        for j in 0..n {
            let mut d = a[(j, j)].re;
            for k in 0..j {
                d -= l[(j, k)].norm_sqr();
            }
            if d < 0.0 {
                return false;
            }
            let d = d.sqrt();
            l[(j, j)] = C64::new(d, 0.0);
            for i in j + 1..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)].conj();
                }
                l[(i, j)] = if d > 0.0 { s / d } else { C64::zero() };
                if d == 0.0 && s.norm() > tol {
                    return false;
                }
            }
        }
        true
    }
}

/// One Kraus operator, stored as `√weight · matrix`.
///
/// The split form keeps operators such as `√p |j⟩⟨i|` exact in rational
/// mode: only `weight · M ρ M†` is ever evaluated.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausOperator<R: Real> {
    pub weight: R,
    pub matrix: CMatrix<R>,
}

impl<R: Real> KrausOperator<R> {
    pub fn plain(matrix: CMatrix<R>) -> Self {
        KrausOperator {
            weight: R::one(),
            matrix,
        }
    }

    pub fn weighted(weight: R, matrix: CMatrix<R>) -> Self {
        KrausOperator { weight, matrix }
    }

    /// The operator as a single float matrix.
    pub fn to_c64(&self) -> Matrix<C64> {
        self.matrix
            .to_c64()
            .scale(&C64::new(self.weight.to_f64().sqrt(), 0.0))
    }

    /// `weight · M X M†`.
    pub fn conjugate(&self, x: &CMatrix<R>) -> Result<CMatrix<R>> {
        let y = self.matrix.matmul(x)?.matmul(&self.matrix.adjoint())?;
        Ok(y.scale(&crate::numeric::real(self.weight.clone())))
    }
}

/// Completely positive map `ρ ↦ Σ E_i ρ E_i†`.
#[derive(Clone, Debug, PartialEq)]
pub struct Superoperator<R: Real> {
    dim: usize,
    kraus: Vec<KrausOperator<R>>,
}

impl<R: Real> Superoperator<R> {
    /// Requires a nonempty list of square operators of equal dimension.
    /// Completeness is checked separately by [`validate_kraus`].
    pub fn new(kraus: Vec<KrausOperator<R>>) -> Result<Self> {
        let Some(first) = kraus.first() else {
            return dim_err("superoperator needs at least one Kraus operator");
        };
        let dim = first.matrix.rows();
        for (i, k) in kraus.iter().enumerate() {
            if k.matrix.rows() != dim || k.matrix.cols() != dim {
                return dim_err(format!(
                    "Kraus operator {i} is {}x{}, expected {dim}x{dim}",
                    k.matrix.rows(),
                    k.matrix.cols()
                ));
            }
            if k.weight < R::zero() {
                return Err(Error::InvalidParameter(format!(
                    "Kraus operator {i} has negative weight"
                )));
            }
        }
        Ok(Superoperator { dim, kraus })
    }

    pub fn from_matrices(ms: Vec<CMatrix<R>>) -> Result<Self> {
        Self::new(ms.into_iter().map(KrausOperator::plain).collect())
    }

    pub fn unitary(u: CMatrix<R>) -> Self {
        let dim = u.rows();
        Superoperator {
            dim,
            kraus: vec![KrausOperator::plain(u)],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::unitary(Matrix::identity(dim))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kraus(&self) -> &[KrausOperator<R>] {
        &self.kraus
    }

    /// `Σ E_i X E_i†` on an arbitrary square matrix.
    pub fn apply_matrix(&self, x: &CMatrix<R>) -> Result<CMatrix<R>> {
        if x.rows() != self.dim || x.cols() != self.dim {
            return dim_err(format!(
                "{}x{} operand for a {}-dim channel",
                x.rows(),
                x.cols(),
                self.dim
            ));
        }
        let mut acc = Matrix::zeros(self.dim, self.dim);
        for k in &self.kraus {
            acc = acc.add(&k.conjugate(x)?)?;
        }
        Ok(acc)
    }

    /// `max |Σ E_i†E_i - I|`.
    pub fn completeness_defect(&self) -> f64 {
        self.gram_defect(|m| m.adjoint().matmul(m))
    }

    /// `max |Σ E_iE_i† - I|`.
    pub fn unitality_defect(&self) -> f64 {
        self.gram_defect(|m| m.matmul(&m.adjoint()))
    }

    fn gram_defect(&self, f: impl Fn(&CMatrix<R>) -> Result<CMatrix<R>>) -> f64 {
        let mut acc = Matrix::zeros(self.dim, self.dim);
        for k in &self.kraus {
            let g = f(&k.matrix)
                .expect("square operators")
                .scale(&crate::numeric::real(k.weight.clone()));
            acc = acc.add(&g).expect("equal dimensions");
        }
        acc.identity_defect().expect("square")
    }
}

/// True iff `max |M†M - I| <= tol`.
pub fn validate_unitary<R: Real>(m: &CMatrix<R>, tol: f64) -> Result<bool> {
    Ok(unitary_defect(m)? <= tol)
}

pub fn unitary_defect<R: Real>(m: &CMatrix<R>) -> Result<f64> {
    if !m.is_square() {
        return dim_err(format!("{}x{} matrix is not square", m.rows(), m.cols()));
    }
    m.adjoint().matmul(m)?.identity_defect()
}

/// Completeness `Σ E_i†E_i = I` within `tol`.
pub fn validate_kraus<R: Real>(e: &Superoperator<R>, tol: f64) -> bool {
    e.completeness_defect() <= tol
}

/// Completeness plus unitality `Σ E_iE_i† = I`.
pub fn validate_bistochastic<R: Real>(e: &Superoperator<R>, tol: f64) -> bool {
    validate_kraus(e, tol) && e.unitality_defect() <= tol
}

pub fn apply_superoperator<R: Real>(
    e: &Superoperator<R>,
    rho: &DensityMatrix<R>,
) -> Result<DensityMatrix<R>> {
    Ok(DensityMatrix {
        m: e.apply_matrix(&rho.m)?,
    })
}

/// `Σ_j p_j |ψ_j⟩⟨ψ_j|`.
pub fn density_of_mixture<R: Real>(
    pairs: &[(R, StateVector<R>)],
    tol: f64,
) -> Result<DensityMatrix<R>> {
    let Some((_, first)) = pairs.first() else {
        return dim_err("empty mixture");
    };
    let dim = first.dim();
    let mut total = R::zero();
    let mut acc: CMatrix<R> = Matrix::zeros(dim, dim);
    for (i, (p, psi)) in pairs.iter().enumerate() {
        if *p < R::zero() {
            return Err(Error::InvalidParameter(format!(
                "mixture weight {i} is negative"
            )));
        }
        if psi.dim() != dim {
            return dim_err(format!("mixture component {i} has dimension {}", psi.dim()));
        }
        total = total + p.clone();
        acc = acc.add(&psi.density().m.scale(&crate::numeric::real(p.clone())))?;
    }
    let defect = (total.to_f64() - 1.0).abs();
    if defect > tol {
        return Err(Error::Validation {
            what: "mixture weights sum".into(),
            defect,
        });
    }
    Ok(DensityMatrix { m: acc })
}

/// Partition of basis indices into labelled disjoint blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct BasisPartition {
    dim: usize,
    blocks: Vec<(String, Vec<usize>)>,
}

impl BasisPartition {
    pub fn new(dim: usize, blocks: Vec<(String, Vec<usize>)>) -> Result<Self> {
        let mut seen = vec![false; dim];
        for (label, idx) in &blocks {
            for &i in idx {
                if i >= dim {
                    return dim_err(format!(
                        "block '{label}' holds index {i} beyond dimension {dim}"
                    ));
                }
                if std::mem::replace(&mut seen[i], true) {
                    return Err(Error::InvalidParameter(format!(
                        "index {i} appears in two blocks"
                    )));
                }
            }
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidParameter(format!(
                "index {i} is not covered by any block"
            )));
        }
        Ok(BasisPartition { dim, blocks })
    }

    /// One block per basis index, labelled by the index.
    pub fn singletons(dim: usize) -> Self {
        BasisPartition {
            dim,
            blocks: (0..dim).map(|i| (i.to_string(), vec![i])).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn blocks(&self) -> &[(String, Vec<usize>)] {
        &self.blocks
    }

    /// Index of the block containing basis state `i`.
    pub fn block_of(&self, i: usize) -> usize {
        self.blocks
            .iter()
            .position(|(_, b)| b.contains(&i))
            .expect("partition covers all indices")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementOutcome<R: Real> {
    pub label: String,
    pub probability: R,
    /// Unnormalized restriction of the state to the block.
    pub projected: Vec<Complex<R>>,
}

impl<R: Real> MeasurementOutcome<R> {
    /// Renormalized post-measurement state. Division by `√p` leaves the
    /// rationals, so this is a float state in either mode.
    pub fn post_state(&self) -> StateVector<f64> {
        let amps = self.projected.iter().map(crate::numeric::to_c64).collect();
        StateVector::normalized(amps).expect("outcome has nonzero probability")
    }
}

/// Measures `psi` with respect to `partition`. Blocks of probability zero
/// are omitted from the result.
pub fn partial_measure<R: Real>(
    psi: &StateVector<R>,
    partition: &BasisPartition,
) -> Result<Vec<MeasurementOutcome<R>>> {
    if psi.dim() != partition.dim {
        return dim_err(format!(
            "state of dimension {} against partition of {}",
            psi.dim(),
            partition.dim
        ));
    }
    let mut out = Vec::new();
    for (label, block) in &partition.blocks {
        let mut projected = vec![Complex::zero(); psi.dim()];
        for &i in block {
            projected[i] = psi.amps[i].clone();
        }
        let probability = norm_sqr(&projected);
        if !probability.is_zero() {
            out.push(MeasurementOutcome {
                label: label.clone(),
                probability,
                projected,
            });
        }
    }
    Ok(out)
}

/// Haar-ish random unitary: Gram–Schmidt of a matrix with Gaussian-like
/// entries.
pub fn random_unitary(dim: usize, rng: &mut impl Rng) -> Matrix<C64> {
    loop {
        let cols: Vec<Vec<C64>> = (0..dim)
            .map(|_| {
                (0..dim)
                    .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    .collect()
            })
            .collect();
        let q = orthonormalize(&cols, 1e-8);
        if q.len() == dim {
            return Matrix::from_fn(dim, dim, |i, j| q[j][i]);
        }
    }
}

/// Modified Gram–Schmidt; vectors whose residual norm falls below `tol`
/// are dropped.
pub fn orthonormalize(vectors: &[Vec<C64>], tol: f64) -> Vec<Vec<C64>> {
    let mut basis: Vec<Vec<C64>> = Vec::new();
    for v in vectors {
        let mut r = v.clone();
        for b in &basis {
            let proj: C64 = b.iter().zip(&r).map(|(x, y)| x.conj() * y).sum();
            for (ri, bi) in r.iter_mut().zip(b) {
                *ri -= proj * bi;
            }
        }
        let n = r.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if n > tol {
            basis.push(r.into_iter().map(|x| x / n).collect());
        }
    }
    basis
}

/// Random valid channel with `k` Kraus operators: blocks of a random
/// `k·dim`-dimensional isometry.
pub fn random_channel(dim: usize, k: usize, rng: &mut impl Rng) -> Superoperator<f64> {
    let u = random_unitary(dim * k, rng);
    let ops = (0..k)
        .map(|b| KrausOperator::plain(Matrix::from_fn(dim, dim, |i, j| u[(b * dim + i, j)])))
        .collect();
    Superoperator::new(ops).expect("consistent dimensions")
}
