//! State algebra: labeled tensor layouts, density operators, pure vectors,
//! partial traces, purification and seeded random states.
//!
//! Tensor indices are row-major in layout order: for factors `(A, dA)`,
//! `(B, dB)` the basis vector `|a⟩⊗|b⟩` sits at index `a·dB + b`. No
//! operation reorders factors.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Hermiticity, trace and positivity window used when validating states.
pub const VALIDATION_TOL: f64 = 1e-10;
/// Eigenvalues below this are treated as exactly zero.
pub const RANK_CUTOFF: f64 = 1e-12;
/// Largest total dimension accepted from external input.
pub const MAX_TOTAL_DIM: usize = 4096;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SubsystemLayout {
    factors: Vec<(String, usize)>,
}

impl SubsystemLayout {
    pub fn new<S: Into<String>>(factors: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        let factors: Vec<(String, usize)> = factors.into_iter().map(|(l, d)| (l.into(), d)).collect();
        if factors.is_empty() {
            return Err(Error::InvalidLayout("no factors".into()));
        }
        let mut total: usize = 1;
        for (i, (label, dim)) in factors.iter().enumerate() {
            if label.is_empty() {
                return Err(Error::InvalidLayout("empty label".into()));
            }
            if *dim == 0 {
                return Err(Error::InvalidLayout(format!("factor `{label}` has dimension 0")));
            }
            if factors[..i].iter().any(|(l, _)| l == label) {
                return Err(Error::LabelCollision(label.clone()));
            }
            total = total.checked_mul(*dim).ok_or_else(|| Error::InvalidLayout("total dimension overflows".into()))?;
        }
        Ok(Self { factors })
    }

    pub fn single(label: &str, dim: usize) -> Result<Self> {
        Self::new([(label, dim)])
    }

    /// Two-factor layout `A ⊗ B`.
    pub fn bipartite(a: (&str, usize), b: (&str, usize)) -> Result<Self> {
        Self::new([a, b])
    }

    pub fn factors(&self) -> &[(String, usize)] {
        &self.factors
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.factors.iter().map(|(l, _)| l.as_str())
    }

    pub fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(|&(_, d)| d).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.factors.iter().map(|&(_, d)| d).product()
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.factors.iter().position(|(l, _)| l == label)
    }

    pub fn contains(&self, label: &str) -> bool {
        self.position(label).is_some()
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        self.position(label).map(|p| self.factors[p].1).ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn concat(&self, other: &SubsystemLayout) -> Result<SubsystemLayout> {
        if let Some(l) = other.labels().find(|l| self.contains(l)) {
            return Err(Error::LabelCollision(l.to_string()));
        }
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        Ok(Self { factors })
    }

    /// Layout with `from` renamed to `to`, keeping its position.
    pub fn relabel(&self, from: &str, to: &str) -> Result<SubsystemLayout> {
        let pos = self.position(from).ok_or_else(|| Error::UnknownLabel(from.to_string()))?;
        if from != to && self.contains(to) {
            return Err(Error::LabelCollision(to.to_string()));
        }
        let mut factors = self.factors.clone();
        factors[pos].0 = to.to_string();
        Ok(Self { factors })
    }

    /// Positions of `labels`, sorted in layout order. Fails on unknown or
    /// repeated labels.
    pub fn positions_of(&self, labels: &[&str]) -> Result<Vec<usize>> {
        let mut pos = Vec::with_capacity(labels.len());
        for l in labels {
            let p = self.position(l).ok_or_else(|| Error::UnknownLabel(l.to_string()))?;
            if pos.contains(&p) {
                return Err(Error::LabelOverlap(l.to_string()));
            }
            pos.push(p);
        }
        pos.sort_unstable();
        Ok(pos)
    }

    fn sub_layout(&self, positions: &[usize]) -> SubsystemLayout {
        SubsystemLayout { factors: positions.iter().map(|&p| self.factors[p].clone()).collect() }
    }

    /// For every basis index, its index within the kept factors and within
    /// the traced factors.
    fn split_indices(&self, keep: &[usize]) -> Vec<(usize, usize)> {
        let dims = self.dims();
        let total = self.total_dim();
        let mut out = Vec::with_capacity(total);
        let mut digits = vec![0usize; dims.len()];
        for _ in 0..total {
            let (mut k, mut t) = (0usize, 0usize);
            for (f, &d) in dims.iter().enumerate() {
                if keep.contains(&f) {
                    k = k * d + digits[f];
                } else {
                    t = t * d + digits[f];
                }
            }
            out.push((k, t));
            for f in (0..dims.len()).rev() {
                digits[f] += 1;
                if digits[f] < dims[f] {
                    break;
                }
                digits[f] = 0;
            }
        }
        out
    }
}

/// A validated density operator on a labeled tensor-product space.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    layout: SubsystemLayout,
    matrix: CMatrix,
}

/// Eigenvalues (descending) and matching eigenvector columns of a Hermitian
/// matrix. Only the Hermitian part of `m` is used.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let h = hermitian_part(m);
    let eig = SymmetricEigen::new(h);
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Eigenvalues of a Hermitian matrix in descending order.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut v: Vec<f64> = hermitian_part(m).symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

fn max_abs_entry(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Validates `matrix` as a density operator on `layout`.
///
/// The stored matrix is the Hermitian part of the input; eigenvalues that
/// fall in `[-VALIDATION_TOL, 0)` are clamped to zero and the trace
/// renormalized.
pub fn validate_state(matrix: CMatrix, layout: SubsystemLayout) -> Result<DensityOperator> {
    let dim = layout.total_dim();
    if matrix.nrows() != dim || matrix.ncols() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: matrix.nrows().max(matrix.ncols()) });
    }
    if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    let dev = max_abs_entry(&(&matrix - matrix.adjoint()));
    if dev > VALIDATION_TOL {
        return Err(Error::NotHermitian(dev));
    }
    let tr = matrix.trace().re;
    if (tr - 1.0).abs() > VALIDATION_TOL {
        return Err(Error::TraceNotOne(tr));
    }
    let herm = hermitian_part(&matrix);
    let (values, vectors) = hermitian_eigen(&herm);
    let min = values.last().copied().unwrap_or(0.0);
    if min < -VALIDATION_TOL {
        return Err(Error::NotPositive(min));
    }
    let matrix = if min < 0.0 {
        let clamped: Vec<f64> = values.iter().map(|&v| v.clamp(0.0, 1.0)).collect();
        let sum: f64 = clamped.iter().sum();
        let diag = CVector::from_iterator(clamped.len(), clamped.iter().map(|&v| Complex64::new(v / sum, 0.0)));
        &vectors * CMatrix::from_diagonal(&diag) * vectors.adjoint()
    } else {
        herm
    };
    Ok(DensityOperator { layout, matrix })
}

impl DensityOperator {
    /// Wraps a matrix already known to be a state. Used for internally
    /// constructed operators whose validity follows from construction.
    pub(crate) fn from_parts_unchecked(layout: SubsystemLayout, matrix: CMatrix) -> Self {
        debug_assert_eq!(matrix.nrows(), layout.total_dim());
        Self { layout, matrix: hermitian_part(&matrix) }
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.matrix)
    }

    pub fn maximally_mixed(layout: SubsystemLayout) -> Self {
        let d = layout.total_dim();
        let m = CMatrix::identity(d, d).scale(1.0 / d as f64);
        Self { layout, matrix: m }
    }

    pub fn from_pure(psi: &PureStateVector) -> Self {
        let v = psi.vector();
        Self { layout: psi.layout().clone(), matrix: v * v.adjoint() }
    }

    /// Same matrix on a different layout of equal total dimension.
    pub fn with_layout(&self, layout: SubsystemLayout) -> Result<Self> {
        if layout.total_dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: layout.total_dim() });
        }
        Ok(Self { layout, matrix: self.matrix.clone() })
    }

    pub fn relabel(&self, from: &str, to: &str) -> Result<Self> {
        Ok(Self { layout: self.layout.relabel(from, to)?, matrix: self.matrix.clone() })
    }

    pub fn tensor(&self, other: &DensityOperator) -> Result<DensityOperator> {
        let layout = self.layout.concat(&other.layout)?;
        Ok(Self { layout, matrix: self.matrix.kronecker(&other.matrix) })
    }

    /// Reduced state on `keep`, with kept factors in their original order.
    pub fn partial_trace(&self, keep: &[&str]) -> Result<DensityOperator> {
        if keep.is_empty() {
            return Err(Error::EmptyKeepSet);
        }
        let positions = self.layout.positions_of(keep)?;
        let sub = self.layout.sub_layout(&positions);
        if positions.len() == self.layout.len() {
            return Ok(self.clone());
        }
        let kept_dim = sub.total_dim();
        let split = self.layout.split_indices(&positions);
        let traced_dim = self.dim() / kept_dim;
        let mut groups: Vec<Vec<(usize, usize)>> = vec![Vec::with_capacity(kept_dim); traced_dim];
        for (full, &(k, t)) in split.iter().enumerate() {
            groups[t].push((full, k));
        }
        let mut out = CMatrix::zeros(kept_dim, kept_dim);
        for group in &groups {
            for &(i, ki) in group {
                for &(j, kj) in group {
                    out[(ki, kj)] += self.matrix[(i, j)];
                }
            }
        }
        Ok(Self { layout: sub, matrix: out })
    }

    /// Full-space operator acting as `op` on factor `label` and identity
    /// elsewhere.
    pub fn embed_operator(layout: &SubsystemLayout, label: &str, op: &CMatrix) -> Result<CMatrix> {
        let pos = layout.position(label).ok_or_else(|| Error::UnknownLabel(label.to_string()))?;
        let dims = layout.dims();
        if op.nrows() != dims[pos] || op.ncols() != dims[pos] {
            return Err(Error::DimensionMismatch { expected: dims[pos], found: op.nrows() });
        }
        let before: usize = dims[..pos].iter().product();
        let after: usize = dims[pos + 1..].iter().product();
        let left = CMatrix::identity(before, before).kronecker(op);
        Ok(left.kronecker(&CMatrix::identity(after, after)))
    }

    /// Unnormalized `(I⊗K) ρ (I⊗K)†` with `K` acting on `label`.
    pub fn conjugate_local(&self, label: &str, op: &CMatrix) -> Result<CMatrix> {
        let full = Self::embed_operator(&self.layout, label, op)?;
        Ok(&full * &self.matrix * full.adjoint())
    }
}

/// A normalized pure state on a labeled layout.
#[derive(Clone, Debug, PartialEq)]
pub struct PureStateVector {
    layout: SubsystemLayout,
    vector: CVector,
}

impl PureStateVector {
    pub fn new(vector: CVector, layout: SubsystemLayout) -> Result<Self> {
        if vector.len() != layout.total_dim() {
            return Err(Error::DimensionMismatch { expected: layout.total_dim(), found: vector.len() });
        }
        let n = vector.norm();
        if (n - 1.0).abs() > VALIDATION_TOL {
            return Err(Error::NotNormalized(n));
        }
        Ok(Self { layout, vector })
    }

    /// Normalizes `vector`; `None` when its norm is zero.
    pub fn normalized(vector: CVector, layout: SubsystemLayout) -> Option<Self> {
        let n = vector.norm();
        if n == 0.0 || !n.is_finite() {
            return None;
        }
        Some(Self { layout, vector: vector.unscale(n) })
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn vector(&self) -> &CVector {
        &self.vector
    }

    /// Reduced density matrix on `keep`, computed as `ΨΨ†` with `Ψ` the
    /// vector reshaped to (kept × traced).
    pub fn reduced(&self, keep: &[&str]) -> Result<DensityOperator> {
        if keep.is_empty() {
            return Err(Error::EmptyKeepSet);
        }
        let positions = self.layout.positions_of(keep)?;
        let sub = self.layout.sub_layout(&positions);
        let kept_dim = sub.total_dim();
        let traced_dim = self.vector.len() / kept_dim;
        let mut psi = CMatrix::zeros(kept_dim, traced_dim);
        for (full, (k, t)) in self.layout.split_indices(&positions).into_iter().enumerate() {
            psi[(k, t)] = self.vector[full];
        }
        Ok(DensityOperator::from_parts_unchecked(sub, &psi * psi.adjoint()))
    }
}

/// Purifies `rho` with a reference factor `ref_label` placed first.
///
/// The reference dimension is the number of eigenvalues above
/// [`RANK_CUTOFF`]; `|Ψ⟩ = Σ_i √λ_i |i⟩_ref ⊗ |e_i⟩` with `λ` descending.
pub fn purify(rho: &DensityOperator, ref_label: &str) -> Result<PureStateVector> {
    if rho.layout.contains(ref_label) {
        return Err(Error::LabelCollision(ref_label.to_string()));
    }
    let (values, vectors) = hermitian_eigen(&rho.matrix);
    let kept: Vec<(usize, f64)> = values.iter().copied().enumerate().filter(|&(_, v)| v > RANK_CUTOFF).collect();
    let rank = kept.len().max(1);
    let d = rho.dim();
    let layout = SubsystemLayout::single(ref_label, rank)?.concat(&rho.layout)?;
    let mut v = CVector::zeros(rank * d);
    for (r, &(col, lambda)) in kept.iter().enumerate() {
        let s = lambda.sqrt();
        for i in 0..d {
            v[r * d + i] = vectors[(i, col)] * s;
        }
    }
    // Dropping sub-cutoff eigenvalues shifts the norm by at most d·1e-12.
    let n = v.norm();
    Ok(PureStateVector { layout, vector: v.unscale(n) })
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub(crate) fn ginibre<R: rand::Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re * scale, im * scale)
    })
}

/// Haar-random unitary drawn from `rng`.
pub fn haar_unitary<R: rand::Rng + ?Sized>(rng: &mut R, dim: usize) -> CMatrix {
    let z = ginibre(rng, dim, dim);
    let qr = z.qr();
    let (q, r) = (qr.q(), qr.r());
    let mut u = q;
    for c in 0..dim {
        let d = r[(c, c)];
        let n = d.norm();
        let phase = if n > 0.0 { d / n } else { Complex64::new(1.0, 0.0) };
        for row in 0..dim {
            u[(row, c)] *= phase;
        }
    }
    u
}

/// Haar-random unitary of size `dim`, deterministic per seed.
pub fn random_unitary(seed: u64, dim: usize) -> CMatrix {
    haar_unitary(&mut seeded_rng(seed), dim)
}

/// Random state `GG†/tr(GG†)` with `G` a `dim × rank` Ginibre matrix.
pub fn random_density(seed: u64, layout: SubsystemLayout, rank: usize) -> Result<DensityOperator> {
    random_density_from_rng(&mut seeded_rng(seed), layout, rank)
}

pub fn random_density_from_rng<R: rand::Rng + ?Sized>(
    rng: &mut R,
    layout: SubsystemLayout,
    rank: usize,
) -> Result<DensityOperator> {
    let dim = layout.total_dim();
    if rank == 0 || rank > dim {
        return Err(Error::BadRank { rank, dim });
    }
    let g = ginibre(rng, dim, rank);
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    Ok(DensityOperator::from_parts_unchecked(layout, m.unscale(tr)))
}

/// Complex matrix as rows of `[re, im]` pairs.
pub type MatrixJson = Vec<Vec<[f64; 2]>>;

pub fn matrix_to_json(m: &CMatrix) -> MatrixJson {
    (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect()).collect()
}

/// Parses a square matrix of side `dim`.
pub fn matrix_from_json(rows: &MatrixJson, dim: usize) -> Result<CMatrix> {
    if rows.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: rows.len() });
    }
    if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
        return Err(Error::DimensionMismatch { expected: dim, found: bad.len() });
    }
    let m = CMatrix::from_fn(dim, dim, |r, c| Complex64::new(rows[r][c][0], rows[r][c][1]));
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(m)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateJson {
    labels: Vec<String>,
    dims: Vec<usize>,
    matrix: MatrixJson,
}

impl DensityOperator {
    /// Reads the JSON state format and validates the result.
    pub fn from_json_str(s: &str) -> Result<Self> {
        let raw: StateJson = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        if raw.labels.len() != raw.dims.len() {
            return Err(Error::InvalidLayout(format!("{} labels but {} dims", raw.labels.len(), raw.dims.len())));
        }
        let layout = SubsystemLayout::new(raw.labels.into_iter().zip(raw.dims))?;
        let dim = layout.total_dim();
        if dim > MAX_TOTAL_DIM {
            return Err(Error::InvalidLayout(format!("total dimension {dim} exceeds {MAX_TOTAL_DIM}")));
        }
        let m = matrix_from_json(&raw.matrix, dim)?;
        validate_state(m, layout)
    }

    pub fn to_json_string(&self) -> String {
        let raw = StateJson {
            labels: self.layout.labels().map(str::to_string).collect(),
            dims: self.layout.dims(),
            matrix: matrix_to_json(&self.matrix),
        };
        serde_json::to_string_pretty(&raw).expect("state serialization")
    }
}

/// `|i⟩⟨j|` on dimension `dim`.
pub fn ket_bra(dim: usize, i: usize, j: usize) -> CMatrix {
    let mut m = CMatrix::zeros(dim, dim);
    m[(i, j)] = Complex64::new(1.0, 0.0);
    m
}

/// Basis vector `|i⟩`.
pub fn basis_ket(dim: usize, i: usize) -> CVector {
    let mut v = CVector::zeros(dim);
    v[i] = Complex64::new(1.0, 0.0);
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn qubit(label: &str) -> SubsystemLayout {
        SubsystemLayout::single(label, 2).unwrap()
    }

    fn ab() -> SubsystemLayout {
        SubsystemLayout::bipartite(("A", 2), ("B", 2)).unwrap()
    }

    fn bell() -> DensityOperator {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v = CVector::from_vec(vec![c(s), c(0.0), c(0.0), c(s)]);
        DensityOperator::from_pure(&PureStateVector::new(v, ab()).unwrap())
    }

    fn max_diff(a: &CMatrix, b: &CMatrix) -> f64 {
        max_abs_entry(&(a - b))
    }

    #[test]
    fn maximally_mixed_qubit_is_valid() {
        let m = CMatrix::identity(2, 2).scale(0.5);
        let rho = validate_state(m, qubit("B")).unwrap();
        let ev = rho.eigenvalues();
        assert_abs_diff_eq!(ev[0], 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(ev[1], 0.5, epsilon = 1e-14);
    }

    #[test]
    fn validation_errors() {
        let m = CMatrix::identity(2, 2);
        assert!(matches!(validate_state(m, qubit("B")), Err(Error::TraceNotOne(_))));
        let m = CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.5), c(-0.5)]));
        assert!(matches!(validate_state(m, qubit("B")), Err(Error::NotPositive(_))));
        let mut m = CMatrix::identity(2, 2).scale(0.5);
        m[(0, 1)] = c(0.1);
        assert!(matches!(validate_state(m, qubit("B")), Err(Error::NotHermitian(_))));
        let m = CMatrix::identity(3, 3).scale(1.0 / 3.0);
        assert!(matches!(validate_state(m, qubit("B")), Err(Error::DimensionMismatch { .. })));
        let mut m = CMatrix::identity(2, 2).scale(0.5);
        m[(0, 0)] = Complex64::new(f64::NAN, 0.0);
        assert_eq!(validate_state(m, qubit("B")), Err(Error::NonFinite));
    }

    #[test]
    fn tiny_negative_eigenvalue_is_clamped() {
        let m = CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.0 + 5e-11), c(-5e-11)]));
        let rho = validate_state(m, qubit("B")).unwrap();
        assert!(rho.eigenvalues().iter().all(|&v| v >= 0.0));
        assert_abs_diff_eq!(rho.matrix().trace().re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn layout_rejects_duplicates_and_zero_dims() {
        assert!(matches!(SubsystemLayout::new([("A", 2), ("A", 2)]), Err(Error::LabelCollision(_))));
        assert!(matches!(SubsystemLayout::new([("A", 0)]), Err(Error::InvalidLayout(_))));
        assert!(SubsystemLayout::new(Vec::<(String, usize)>::new()).is_err());
        assert!(SubsystemLayout::new([("A", usize::MAX), ("B", 2)]).is_err());
    }

    #[test]
    fn tensor_of_basis_states() {
        let zero = validate_state(ket_bra(2, 0, 0), qubit("A")).unwrap();
        let one = validate_state(ket_bra(2, 1, 1), qubit("B")).unwrap();
        let t = zero.tensor(&one).unwrap();
        assert_eq!(t.dim(), 4);
        for r in 0..4 {
            for col in 0..4 {
                let expect = if (r, col) == (1, 1) { 1.0 } else { 0.0 };
                assert_eq!(t.matrix()[(r, col)], c(expect));
            }
        }
        let mixed =
            DensityOperator::maximally_mixed(qubit("A")).tensor(&DensityOperator::maximally_mixed(qubit("B"))).unwrap();
        assert!(max_diff(mixed.matrix(), &CMatrix::identity(4, 4).scale(0.25)) < 1e-15);
        assert!(matches!(one.tensor(&one), Err(Error::LabelCollision(l)) if l == "B"));
    }

    #[test]
    fn bell_marginal_is_maximally_mixed() {
        let b = bell().partial_trace(&["B"]).unwrap();
        assert!(max_diff(b.matrix(), &CMatrix::identity(2, 2).scale(0.5)) < 1e-15);
        assert_eq!(b.layout().labels().collect::<Vec<_>>(), vec!["B"]);
    }

    #[test]
    fn partial_trace_errors() {
        assert_eq!(bell().partial_trace(&[]), Err(Error::EmptyKeepSet));
        assert!(matches!(bell().partial_trace(&["Z"]), Err(Error::UnknownLabel(_))));
    }

    #[test]
    fn product_marginal_recovers_factor() {
        let a = random_density(3, qubit("A"), 2).unwrap();
        let b = random_density(4, SubsystemLayout::single("B", 3).unwrap(), 3).unwrap();
        let ab = a.tensor(&b).unwrap();
        assert!(max_diff(ab.partial_trace(&["A"]).unwrap().matrix(), a.matrix()) < 1e-12);
        assert!(max_diff(ab.partial_trace(&["B"]).unwrap().matrix(), b.matrix()) < 1e-12);
    }

    #[test]
    fn purify_maximally_mixed() {
        let rho = DensityOperator::maximally_mixed(qubit("B"));
        let psi = purify(&rho, "R").unwrap();
        assert_eq!(psi.layout().dim_of("R").unwrap(), 2);
        // Schmidt coefficients are the square roots of the reduced spectrum.
        let ev = psi.reduced(&["R"]).unwrap().eigenvalues();
        for e in ev {
            assert_abs_diff_eq!(e.sqrt(), std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-12);
        }
    }

    #[test]
    fn purify_pure_state_has_trivial_reference() {
        let rho = validate_state(ket_bra(2, 0, 0), qubit("B")).unwrap();
        let psi = purify(&rho, "R").unwrap();
        assert_eq!(psi.layout().dim_of("R").unwrap(), 1);
        assert_abs_diff_eq!(psi.vector()[0].norm(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(psi.vector()[1].norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn purify_diagonal_schmidt_coefficients() {
        let m = CMatrix::from_diagonal(&CVector::from_vec(vec![c(0.9), c(0.1)]));
        let rho = validate_state(m, qubit("B")).unwrap();
        let psi = purify(&rho, "R").unwrap();
        // |Ψ⟩ = √0.9 |0⟩|0⟩ + √0.1 |1⟩|1⟩ up to phases.
        assert_abs_diff_eq!(psi.vector()[0].norm(), 0.9f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(psi.vector()[3].norm(), 0.1f64.sqrt(), epsilon = 1e-12);
        assert!(matches!(purify(&rho, "B"), Err(Error::LabelCollision(_))));
    }

    #[test]
    fn purification_roundtrip_on_random_two_qubit_states() {
        for seed in 0..50 {
            let rank = 1 + (seed as usize % 4);
            let rho = random_density(seed, ab(), rank).unwrap();
            let psi = purify(&rho, "R").unwrap();
            let back = psi.reduced(&["A", "B"]).unwrap();
            let brute = DensityOperator::from_pure(&psi).partial_trace(&["A", "B"]).unwrap();
            // Entrywise comparison against the explicit sum over R.
            let mut manual = CMatrix::zeros(4, 4);
            let r = psi.layout().dim_of("R").unwrap();
            for k in 0..r {
                for i in 0..4 {
                    for j in 0..4 {
                        manual[(i, j)] += psi.vector()[k * 4 + i] * psi.vector()[k * 4 + j].conj();
                    }
                }
            }
            assert!(max_diff(&manual, rho.matrix()) < 1e-10, "seed {seed}");
            assert!(max_diff(back.matrix(), rho.matrix()) < 1e-10);
            assert!(max_diff(brute.matrix(), rho.matrix()) < 1e-10);
        }
    }

    #[test]
    fn random_density_properties() {
        let l = SubsystemLayout::single("S", 4).unwrap();
        let full = random_density(11, l.clone(), 4).unwrap();
        validate_state(full.matrix().clone(), l.clone()).unwrap();
        assert!(full.eigenvalues()[3] > 1e-6);
        let pure = random_density(11, l.clone(), 1).unwrap();
        let ev = pure.eigenvalues();
        assert_abs_diff_eq!(ev[0], 1.0, epsilon = 1e-12);
        let again = random_density(11, l.clone(), 4).unwrap();
        assert_eq!(full.matrix(), again.matrix());
        assert!(matches!(random_density(1, l.clone(), 0), Err(Error::BadRank { .. })));
        assert!(matches!(random_density(1, l, 5), Err(Error::BadRank { .. })));
    }

    #[test]
    fn random_unitary_properties() {
        let u1 = random_unitary(5, 1);
        assert_abs_diff_eq!(u1[(0, 0)].norm(), 1.0, epsilon = 1e-14);
        for dim in 2..6 {
            let u = random_unitary(dim as u64, dim);
            let res = max_diff(&(u.adjoint() * &u), &CMatrix::identity(dim, dim));
            assert!(res <= 1e-12, "residual {res}");
            let mut completeness = CMatrix::zeros(dim, dim);
            for col in u.column_iter() {
                completeness += col * col.adjoint();
            }
            assert!(max_diff(&completeness, &CMatrix::identity(dim, dim)) <= 1e-12);
        }
        assert_eq!(random_unitary(9, 3), random_unitary(9, 3));
    }

    #[test]
    fn json_roundtrip_and_errors() {
        let rho = random_density(2, ab(), 3).unwrap();
        let back = DensityOperator::from_json_str(&rho.to_json_string()).unwrap();
        assert!(max_diff(back.matrix(), rho.matrix()) < 1e-15);
        assert_eq!(back.layout(), rho.layout());
        assert!(matches!(DensityOperator::from_json_str("{"), Err(Error::Parse(_))));
        let bad = r#"{"labels":["A"],"dims":[2],"matrix":[[[1,0],[0,0]]]}"#;
        assert!(matches!(DensityOperator::from_json_str(bad), Err(Error::DimensionMismatch { .. })));
        let bad = r#"{"labels":["A","B"],"dims":[2],"matrix":[]}"#;
        assert!(matches!(DensityOperator::from_json_str(bad), Err(Error::InvalidLayout(_))));
        let huge = r#"{"labels":["A","B"],"dims":[100000,100000],"matrix":[]}"#;
        assert!(DensityOperator::from_json_str(huge).is_err());
    }
}
