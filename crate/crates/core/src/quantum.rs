//! Small dense quantum simulator: pure states, density operators, local
//! gates, projective and POVM measurements, partial traces.
//!
//! Everything is analytic; no sampling happens here. Composite systems are
//! described by a list of subsystem dimensions, with subsystem 0 the most
//! significant tensor factor. Total dimension is capped at [`MAX_DIM`].

use std::f64::consts::FRAC_1_SQRT_2;
use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;

use crate::{Error, Result};

pub type C64 = Complex64;

pub const MAX_DIM: usize = 64;

const STATE_TOL: f64 = 1e-12;
const POVM_TOL: f64 = 1e-10;
const PSD_FLOOR: f64 = -1e-10;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexVector(Vec<C64>);

impl ComplexVector {
    pub fn new(entries: Vec<C64>) -> Self {
        ComplexVector(entries)
    }

    pub fn from_real(entries: &[f64]) -> Self {
        ComplexVector(entries.iter().map(|&v| c(v)).collect())
    }

    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = vec![C64::default(); dim];
        v[i] = c(1.0);
        ComplexVector(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[C64] {
        &self.0
    }

    /// `<self|other>`, antilinear in `self`.
    pub fn inner(&self, other: &ComplexVector) -> C64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        ComplexVector(self.0.iter().map(|a| a / n).collect())
    }

    pub fn conj(&self) -> Self {
        ComplexVector(self.0.iter().map(|a| a.conj()).collect())
    }

    pub fn scale(&self, k: C64) -> Self {
        ComplexVector(self.0.iter().map(|a| a * k).collect())
    }

    pub fn kron(&self, other: &ComplexVector) -> Self {
        ComplexVector(self.0.iter().flat_map(|a| other.0.iter().map(move |b| a * b)).collect())
    }

    /// `|self><other|`.
    pub fn outer(&self, other: &ComplexVector) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.len(), other.len(), |r, col| self.0[r] * other.0[col].conj())
    }

    pub fn max_abs_diff(&self, other: &ComplexVector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Dense row-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            rows,
            cols,
            data: vec![C64::default(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |r, col| if r == col { c(1.0) } else { C64::default() })
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for col in 0..cols {
                data.push(f(r, col));
            }
        }
        ComplexMatrix { rows, cols, data }
    }

    pub fn diag(entries: &[C64]) -> Self {
        let n = entries.len();
        Self::from_fn(n, n, |r, col| if r == col { entries[r] } else { C64::default() })
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[ComplexVector]) -> Self {
        let rows = columns.first().map_or(0, ComplexVector::len);
        Self::from_fn(rows, columns.len(), |r, col| columns[col].0[r])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, col: usize) -> C64 {
        self.data[r * self.cols + col]
    }

    pub fn column(&self, col: usize) -> ComplexVector {
        ComplexVector((0..self.rows).map(|r| self.get(r, col)).collect())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, col| self.get(col, r).conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, col| self.get(col, r))
    }

    pub fn conj(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |r, col| self.get(r, col).conj())
    }

    pub fn scale(&self, k: C64) -> Self {
        ComplexMatrix {
            data: self.data.iter().map(|a| a * k).collect(),
            ..*self
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    pub fn kron(&self, other: &ComplexMatrix) -> Self {
        Self::from_fn(self.rows * other.rows, self.cols * other.cols, |r, col| {
            self.get(r / other.rows, col / other.cols) * other.get(r % other.rows, col % other.cols)
        })
    }

    pub fn apply(&self, v: &ComplexVector) -> ComplexVector {
        assert_eq!(self.cols, v.len());
        ComplexVector(
            (0..self.rows)
                .map(|r| {
                    self.data[r * self.cols..(r + 1) * self.cols]
                        .iter()
                        .zip(&v.0)
                        .map(|(a, b)| a * b)
                        .sum()
                })
                .collect(),
        )
    }

    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.rows == self.cols && self.max_abs_diff(&self.adjoint()) <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.rows == self.cols && (&self.adjoint() * self).max_abs_diff(&ComplexMatrix::identity(self.rows)) <= tol
    }

    fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_fn(self.rows, self.cols, |r, col| self.get(r, col))
    }

    fn from_nalgebra(m: &DMatrix<C64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |r, col| m[(r, col)])
    }

    /// Eigenvalues of a Hermitian matrix, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let eig = SymmetricEigen::new(self.to_nalgebra());
        let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        vals.sort_by(f64::total_cmp);
        vals
    }

    /// Principal square root of a positive semidefinite Hermitian matrix.
    pub fn psd_sqrt(&self) -> Self {
        let eig = SymmetricEigen::new(self.to_nalgebra());
        let roots: Vec<C64> = eig.eigenvalues.iter().map(|&l| c(l.max(0.0).sqrt())).collect();
        let v = ComplexMatrix::from_nalgebra(&eig.eigenvectors);
        &(&v * &ComplexMatrix::diag(&roots)) * &v.adjoint()
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix product shape mismatch");
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a == C64::default() {
                    continue;
                }
                for col in 0..rhs.cols {
                    out.data[r * rhs.cols + col] += a * rhs.get(k, col);
                }
            }
        }
        out
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
            ..*self
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
            ..*self
        }
    }
}

fn check_dims(dims: &[usize], len: usize) -> Result<()> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::Dimension(format!("invalid subsystem dims {dims:?}")));
    }
    let total: usize = dims.iter().product();
    if total != len {
        return Err(Error::Dimension(format!(
            "dims {dims:?} give {total}, but the state has dimension {len}"
        )));
    }
    if total > MAX_DIM {
        return Err(Error::Dimension(format!("dimension {total} exceeds {MAX_DIM}")));
    }
    Ok(())
}

/// `I ⊗ ... ⊗ op ⊗ ... ⊗ I` with `op` on `subsystem`.
fn embed(op: &ComplexMatrix, dims: &[usize], subsystem: usize) -> Result<ComplexMatrix> {
    if subsystem >= dims.len() {
        return Err(Error::Dimension(format!(
            "subsystem {subsystem} out of range for dims {dims:?}"
        )));
    }
    if op.rows != dims[subsystem] || op.cols != dims[subsystem] {
        return Err(Error::Dimension(format!(
            "{}x{} operator on subsystem of dimension {}",
            op.rows, op.cols, dims[subsystem]
        )));
    }
    let before: usize = dims[..subsystem].iter().product();
    let after: usize = dims[subsystem + 1..].iter().product();
    Ok(ComplexMatrix::identity(before)
        .kron(op)
        .kron(&ComplexMatrix::identity(after)))
}

/// Result of one measurement outcome; `post_state` is `None` when the
/// outcome has probability zero.
#[derive(Clone, Debug)]
pub struct Outcome<S> {
    pub probability: f64,
    pub post_state: Option<S>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amps: ComplexVector,
    dims: Vec<usize>,
}

impl PureState {
    pub fn new(amps: ComplexVector, dims: Vec<usize>) -> Result<Self> {
        check_dims(&dims, amps.len())?;
        let norm_sqr = amps.norm().powi(2);
        if (norm_sqr - 1.0).abs() > STATE_TOL {
            return Err(Error::Dimension(format!("state has squared norm {norm_sqr}")));
        }
        Ok(PureState { amps, dims })
    }

    pub fn amplitudes(&self) -> &ComplexVector {
        &self.amps
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn tensor(&self, other: &PureState) -> Result<PureState> {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        PureState::new(self.amps.kron(&other.amps), dims)
    }

    pub fn density(&self) -> DensityOperator {
        DensityOperator {
            matrix: self.amps.outer(&self.amps),
            dims: self.dims.clone(),
        }
    }

    /// Applies a unitary to one subsystem.
    pub fn apply_local(&self, op: &ComplexMatrix, subsystem: usize) -> Result<PureState> {
        if !op.is_unitary(1e-12) {
            return Err(Error::Dimension(
                "local operation on a pure state must be unitary".into(),
            ));
        }
        let full = embed(op, &self.dims, subsystem)?;
        Ok(PureState {
            amps: full.apply(&self.amps),
            dims: self.dims.clone(),
        })
    }

    /// Measures one subsystem with the Lüders instrument of `povm`.
    pub fn measure(&self, povm: &Povm, subsystem: usize) -> Result<Vec<Outcome<PureState>>> {
        povm.kraus
            .iter()
            .map(|k| {
                let full = embed(k, &self.dims, subsystem)?;
                let unnorm = full.apply(&self.amps);
                let probability = unnorm.norm().powi(2);
                let post_state = (probability > 0.0).then(|| PureState {
                    amps: unnorm.scale(c(1.0 / probability.sqrt())),
                    dims: self.dims.clone(),
                });
                Ok(Outcome {
                    probability,
                    post_state,
                })
            })
            .collect()
    }

    pub fn reduced(&self, keep: &[usize]) -> Result<DensityOperator> {
        partial_trace(&self.density(), keep)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
    dims: Vec<usize>,
}

impl DensityOperator {
    pub fn new(matrix: ComplexMatrix, dims: Vec<usize>) -> Result<Self> {
        if matrix.rows != matrix.cols {
            return Err(Error::Dimension("density operator must be square".into()));
        }
        check_dims(&dims, matrix.rows)?;
        if !matrix.is_hermitian(STATE_TOL) {
            return Err(Error::Dimension("density operator is not Hermitian".into()));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(Error::Dimension(format!("density operator has trace {tr}")));
        }
        let min = matrix.hermitian_eigenvalues()[0];
        if min < PSD_FLOOR {
            return Err(Error::Dimension(format!("density operator has eigenvalue {min}")));
        }
        Ok(DensityOperator { matrix, dims })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        DensityOperator {
            matrix: ComplexMatrix::identity(dim).scale(c(1.0 / dim as f64)),
            dims: vec![dim],
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn tensor(&self, other: &DensityOperator) -> Result<DensityOperator> {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        check_dims(&dims, self.matrix.rows * other.matrix.rows)?;
        Ok(DensityOperator {
            matrix: self.matrix.kron(&other.matrix),
            dims,
        })
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.matrix.hermitian_eigenvalues()[0]
    }

    /// `U rho U†` with `U` acting on one subsystem.
    pub fn apply_local(&self, op: &ComplexMatrix, subsystem: usize) -> Result<DensityOperator> {
        if !op.is_unitary(1e-12) {
            return Err(Error::Dimension("local operation must be unitary".into()));
        }
        let full = embed(op, &self.dims, subsystem)?;
        Ok(DensityOperator {
            matrix: &(&full * &self.matrix) * &full.adjoint(),
            dims: self.dims.clone(),
        })
    }

    pub fn measure(&self, povm: &Povm, subsystem: usize) -> Result<Vec<Outcome<DensityOperator>>> {
        povm.kraus
            .iter()
            .map(|k| {
                let full = embed(k, &self.dims, subsystem)?;
                let unnorm = &(&full * &self.matrix) * &full.adjoint();
                let probability = unnorm.trace().re;
                let post_state = (probability > 0.0).then(|| DensityOperator {
                    matrix: unnorm.scale(c(1.0 / probability)),
                    dims: self.dims.clone(),
                });
                Ok(Outcome {
                    probability,
                    post_state,
                })
            })
            .collect()
    }

    /// `Tr[(I ⊗ E ⊗ I) rho]` for every POVM element on `subsystem`.
    pub fn outcome_probabilities(&self, povm: &Povm, subsystem: usize) -> Result<Vec<f64>> {
        povm.elements
            .iter()
            .map(|e| {
                let full = embed(e, &self.dims, subsystem)?;
                Ok((&full * &self.matrix).trace().re)
            })
            .collect()
    }
}

fn multi_index(mut i: usize, dims: &[usize]) -> Vec<usize> {
    let mut idx = vec![0; dims.len()];
    for (slot, &d) in idx.iter_mut().zip(dims).rev() {
        *slot = i % d;
        i /= d;
    }
    idx
}

fn flat_index(idx: &[usize], dims: &[usize]) -> usize {
    idx.iter().zip(dims).fold(0, |acc, (&i, &d)| acc * d + i)
}

/// Traces out every subsystem not listed in `keep`. The kept subsystems stay
/// in their original order.
pub fn partial_trace(rho: &DensityOperator, keep: &[usize]) -> Result<DensityOperator> {
    let dims = &rho.dims;
    let mut keep: Vec<usize> = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if keep.is_empty() || keep.iter().any(|&k| k >= dims.len()) {
        return Err(Error::Dimension(format!("cannot keep subsystems {keep:?} of {dims:?}")));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|i| !keep.contains(i)).collect();
    let kept_dims: Vec<usize> = keep.iter().map(|&k| dims[k]).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&k| dims[k]).collect();
    let kd: usize = kept_dims.iter().product();
    let td: usize = traced_dims.iter().product();
    let mut out = ComplexMatrix::zeros(kd, kd);
    let mut full = vec![0; dims.len()];
    for r in 0..kd {
        let ri = multi_index(r, &kept_dims);
        for col in 0..kd {
            let ci = multi_index(col, &kept_dims);
            let mut acc = C64::default();
            for t in 0..td {
                let ti = multi_index(t, &traced_dims);
                for (slot, &k) in keep.iter().enumerate() {
                    full[k] = ri[slot];
                }
                for (slot, &k) in traced.iter().enumerate() {
                    full[k] = ti[slot];
                }
                let row = flat_index(&full, dims);
                for (slot, &k) in keep.iter().enumerate() {
                    full[k] = ci[slot];
                }
                let column = flat_index(&full, dims);
                acc += rho.matrix.get(row, column);
            }
            out.data[r * kd + col] = acc;
        }
    }
    Ok(DensityOperator {
        matrix: out,
        dims: kept_dims,
    })
}

/// Positive operator-valued measure; keeps the Lüders Kraus operators
/// `sqrt(E_k)` alongside the effects.
#[derive(Clone, Debug)]
pub struct Povm {
    elements: Vec<ComplexMatrix>,
    kraus: Vec<ComplexMatrix>,
}

impl Povm {
    pub fn new(elements: Vec<ComplexMatrix>) -> Result<Self> {
        let dim = elements
            .first()
            .ok_or_else(|| Error::Dimension("empty POVM".into()))?
            .rows;
        let mut sum = ComplexMatrix::zeros(dim, dim);
        for e in &elements {
            if e.rows != dim || e.cols != dim || !e.is_hermitian(POVM_TOL) {
                return Err(Error::Dimension("POVM element is not a Hermitian d×d matrix".into()));
            }
            if e.hermitian_eigenvalues()[0] < PSD_FLOOR {
                return Err(Error::Dimension("POVM element is not positive semidefinite".into()));
            }
            sum = &sum + e;
        }
        if sum.max_abs_diff(&ComplexMatrix::identity(dim)) > POVM_TOL {
            return Err(Error::Dimension("POVM elements do not sum to the identity".into()));
        }
        let kraus = elements.iter().map(ComplexMatrix::psd_sqrt).collect();
        Ok(Povm { elements, kraus })
    }

    /// Projective measurement given by projectors; they are their own Kraus
    /// operators.
    pub fn projective(projectors: Vec<ComplexMatrix>) -> Result<Self> {
        let mut povm = Povm::new(projectors)?;
        for p in &povm.elements {
            if (p * p).max_abs_diff(p) > POVM_TOL {
                return Err(Error::Dimension("PVM element is not a projector".into()));
            }
        }
        povm.kraus = povm.elements.clone();
        Ok(povm)
    }

    /// Rank-one projective measurement in an orthonormal basis.
    pub fn from_basis(basis: &[ComplexVector]) -> Result<Self> {
        Povm::projective(basis.iter().map(|v| v.outer(v)).collect())
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

pub fn ket_plus() -> ComplexVector {
    ComplexVector::from_real(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2])
}

pub fn ket_minus() -> ComplexVector {
    ComplexVector::from_real(&[FRAC_1_SQRT_2, -FRAC_1_SQRT_2])
}

/// `{|+><+|, |-><-|}`; outcome 0 is `|+>`.
pub fn plus_minus_measurement() -> Povm {
    Povm::from_basis(&[ket_plus(), ket_minus()]).expect("± basis is orthonormal")
}

/// `R(theta) = |0><0| + e^{i theta}|1><1|`.
pub fn phase_gate(theta: f64) -> ComplexMatrix {
    ComplexMatrix::diag(&[c(1.0), C64::from_polar(1.0, theta)])
}

/// `(1/sqrt d) sum_i |i>|i>`.
pub fn max_entangled(d: usize) -> Result<PureState> {
    if d < 2 {
        return Err(Error::Dimension(format!("entangled dimension must be >= 2, got {d}")));
    }
    let mut amps = vec![C64::default(); d * d];
    let a = c(1.0 / (d as f64).sqrt());
    for i in 0..d {
        amps[i * d + i] = a;
    }
    PureState::new(ComplexVector::new(amps), vec![d, d])
}

/// `(|00> + |11>)/sqrt 2`.
pub fn bell_pair() -> PureState {
    max_entangled(2).expect("d = 2")
}

/// Haar-random unitary via Gram–Schmidt on a complex Gaussian matrix.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    let mut gaussian = || {
        // Box–Muller
        let u1: f64 = 1.0 - rng.random::<f64>();
        let u2: f64 = rng.random::<f64>();
        let r = (-2.0 * u1.ln()).sqrt();
        let t = std::f64::consts::TAU * u2;
        C64::new(r * t.cos(), r * t.sin())
    };
    let mut cols: Vec<ComplexVector> = Vec::with_capacity(d);
    for _ in 0..d {
        let mut v = ComplexVector::new((0..d).map(|_| gaussian()).collect());
        for u in &cols {
            let proj = u.inner(&v);
            v = ComplexVector::new(v.0.iter().zip(&u.0).map(|(a, b)| a - proj * b).collect());
        }
        cols.push(v.normalized());
    }
    ComplexMatrix::from_columns(&cols)
}
