//! Measurement instruments in Kraus form and the post-measurement
//! classical-quantum ensemble.
//!
//! A measurement on `B` of a state `ρ^AB` is modelled by purifying `ρ^AB`
//! into `|Ψ⟩^{RAB}` and, for each outcome `m`, forming
//!
//! ```text
//! |Υ_m⟩ ∝ Σ_k (I^{RA} ⊗ K_{m,k}) |Ψ⟩ ⊗ |k⟩^{Q''}
//! ```
//!
//! on `R ⊗ A ⊗ B' ⊗ Q''`. The apparatus register `Q''` records which Kraus
//! operator fired; the classical outcome `X` is kept implicit as the
//! ensemble index. This is the indirect measurement model with the
//! apparatus read out block-projectively; no explicit unitary on `BQ` is
//! ever formed.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::infotheory::{entropy, shannon_entropy, LogBase};
use crate::qstate::{
    haar_unitary, hermitian_eigenvalues, matrix_from_json, matrix_to_json, purify, seeded_rng, CMatrix, CVector,
    DensityOperator, MatrixJson, PureStateVector, SubsystemLayout, MAX_TOTAL_DIM,
};

/// Purifying reference system.
pub const REFERENCE: &str = "R";
/// Internal apparatus degrees of freedom left after readout.
pub const APPARATUS: &str = "Q''";
/// Classical outcome register.
pub const OUTCOME: &str = "X";

/// Completeness and projector checks.
pub const INSTRUMENT_TOL: f64 = 1e-10;
/// Outcomes with smaller probability are degenerate.
pub const DEGENERATE_PROB: f64 = 1e-14;
/// Cap on the number of Kraus operators accepted from external input.
pub const MAX_KRAUS: usize = 1024;

/// Label of the post-measurement copy of `measured`.
pub fn output_label(measured: &str) -> String {
    format!("{measured}'")
}

#[derive(Clone, Debug, PartialEq)]
pub struct KrausInstrument {
    dim: usize,
    outcomes: Vec<Vec<CMatrix>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstrumentClass {
    /// Every POVM element has rank one.
    pub rank1: bool,
    /// Every outcome has exactly one Kraus operator.
    pub single_kraus: bool,
}

impl InstrumentClass {
    /// Single-Kraus rank-1 instruments: the measurements for which
    /// information gain balances disturbance.
    pub fn is_good(&self) -> bool {
        self.rank1 && self.single_kraus
    }
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn numerical_rank(m: &CMatrix) -> usize {
    hermitian_eigenvalues(m).iter().filter(|&&v| v > INSTRUMENT_TOL).count()
}

impl KrausInstrument {
    pub fn new(outcomes: Vec<Vec<CMatrix>>) -> Result<Self> {
        let first =
            outcomes.iter().flatten().next().ok_or_else(|| Error::InvalidInstrument("no Kraus operators".into()))?;
        let dim = first.nrows();
        if dim == 0 {
            return Err(Error::InvalidInstrument("zero dimension".into()));
        }
        if outcomes.iter().any(|o| o.is_empty()) {
            return Err(Error::InvalidInstrument("outcome without Kraus operators".into()));
        }
        for k in outcomes.iter().flatten() {
            if k.nrows() != dim || k.ncols() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: k.nrows().max(k.ncols()) });
            }
            if k.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::NonFinite);
            }
        }
        let inst = Self { dim, outcomes };
        let residual = inst.completeness_residual();
        if residual.is_nan() || residual > INSTRUMENT_TOL {
            return Err(Error::IncompleteInstrument(residual));
        }
        Ok(inst)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn outcomes(&self) -> &[Vec<CMatrix>] {
        &self.outcomes
    }

    pub fn n_outcomes(&self) -> usize {
        self.outcomes.len()
    }

    pub fn kraus_counts(&self) -> Vec<usize> {
        self.outcomes.iter().map(Vec::len).collect()
    }

    pub fn max_kraus(&self) -> usize {
        self.outcomes.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// `E_m = Σ_k K_{m,k}† K_{m,k}`.
    pub fn povm_elements(&self) -> Vec<CMatrix> {
        self.outcomes
            .iter()
            .map(|ks| ks.iter().fold(CMatrix::zeros(self.dim, self.dim), |acc, k| acc + k.adjoint() * k))
            .collect()
    }

    pub fn completeness_residual(&self) -> f64 {
        let total = self.povm_elements().into_iter().fold(CMatrix::zeros(self.dim, self.dim), |acc, e| acc + e);
        max_abs(&(total - CMatrix::identity(self.dim, self.dim)))
    }

    pub fn classify(&self) -> InstrumentClass {
        InstrumentClass {
            rank1: self.povm_elements().iter().all(|e| numerical_rank(e) == 1),
            single_kraus: self.outcomes.iter().all(|o| o.len() == 1),
        }
    }

    /// Single-Kraus instrument whose Kraus operators are rank-1 orthogonal
    /// projectors.
    pub fn is_projective(&self) -> bool {
        self.outcomes.iter().all(|o| {
            o.len() == 1 && {
                let k = &o[0];
                max_abs(&(k - k.adjoint())) <= INSTRUMENT_TOL
                    && max_abs(&(k * k - k)) <= INSTRUMENT_TOL
                    && (k.trace().re - 1.0).abs() <= INSTRUMENT_TOL
            }
        })
    }

    /// Realization with several Kraus operators per outcome:
    /// `K ↦ {√w_j U_j K}` for weights summing to one and unitaries `U_j`.
    /// The POVM is unchanged.
    pub fn split_kraus(&self, mixers: &[(f64, CMatrix)]) -> Result<Self> {
        let outcomes = self
            .outcomes
            .iter()
            .map(|ks| ks.iter().flat_map(|k| mixers.iter().map(move |(w, u)| (u * k).scale(w.sqrt()))).collect())
            .collect();
        Self::new(outcomes)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let raw: InstrumentJson = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        if raw.dim == 0 || raw.dim > MAX_TOTAL_DIM {
            return Err(Error::InvalidInstrument(format!("dimension {} out of range", raw.dim)));
        }
        let total: usize = raw.outcomes.iter().map(Vec::len).sum();
        if total > MAX_KRAUS {
            return Err(Error::InvalidInstrument(format!("{total} Kraus operators exceed {MAX_KRAUS}")));
        }
        let outcomes = raw
            .outcomes
            .iter()
            .map(|o| o.iter().map(|m| matrix_from_json(m, raw.dim)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Self::new(outcomes)
    }

    pub fn to_json_string(&self) -> String {
        let raw = InstrumentJson {
            dim: self.dim,
            outcomes: self.outcomes.iter().map(|o| o.iter().map(matrix_to_json).collect()).collect(),
        };
        serde_json::to_string_pretty(&raw).expect("instrument serialization")
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstrumentJson {
    dim: usize,
    outcomes: Vec<Vec<MatrixJson>>,
}

pub fn make_instrument(kraus_lists: Vec<Vec<CMatrix>>) -> Result<(KrausInstrument, InstrumentClass)> {
    let inst = KrausInstrument::new(kraus_lists)?;
    let class = inst.classify();
    Ok((inst, class))
}

/// Measurement in the orthonormal basis given by the columns of `u`.
pub fn projective_from_unitary(u: &CMatrix) -> Result<KrausInstrument> {
    let d = u.nrows();
    if u.ncols() != d {
        return Err(Error::DimensionMismatch { expected: d, found: u.ncols() });
    }
    let residual = max_abs(&(u.adjoint() * u - CMatrix::identity(d, d)));
    if residual.is_nan() || residual > INSTRUMENT_TOL {
        return Err(Error::NotUnitary(residual));
    }
    let outcomes = u.column_iter().map(|c| vec![c * c.adjoint()]).collect();
    KrausInstrument::new(outcomes)
}

/// Qubit basis `{cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩, orthogonal complement}`.
pub fn qubit_basis(theta: f64, phi: f64) -> CMatrix {
    let (s, c) = (0.5 * theta).sin_cos();
    let e = Complex64::from_polar(1.0, phi);
    CMatrix::from_column_slice(2, 2, &[Complex64::new(c, 0.0), e * s, -e.conj() * s, Complex64::new(c, 0.0)])
}

pub fn qubit_projective(theta: f64, phi: f64) -> KrausInstrument {
    projective_from_unitary(&qubit_basis(theta, phi)).expect("qubit basis is unitary")
}

/// Canonical single-Kraus rank-1 POVM `K_m = w_m w_m† / ‖w_m‖` from a
/// `dim × n` matrix with orthonormal rows, `w_m` its columns.
pub fn rank1_povm_from_isometry(v: &CMatrix) -> Result<KrausInstrument> {
    let outcomes = v
        .column_iter()
        .map(|w| {
            let n = w.norm();
            let k = if n > 0.0 { (w * w.adjoint()).unscale(n) } else { CMatrix::zeros(v.nrows(), v.nrows()) };
            vec![k]
        })
        .collect();
    KrausInstrument::new(outcomes)
}

/// Rank-1 POVM from the first `dim` rows of an `n × n` Haar unitary.
pub fn random_rank1_povm(seed: u64, dim: usize, n_outcomes: usize) -> Result<KrausInstrument> {
    random_rank1_povm_from_rng(&mut seeded_rng(seed), dim, n_outcomes)
}

pub fn random_rank1_povm_from_rng<R: rand::Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    n_outcomes: usize,
) -> Result<KrausInstrument> {
    if dim == 0 || n_outcomes < dim {
        return Err(Error::BadOutcomeCount { outcomes: n_outcomes, dim });
    }
    let u = haar_unitary(rng, n_outcomes);
    rank1_povm_from_isometry(&u.rows(0, dim).into_owned())
}

/// Generic instrument with `kraus_counts[m]` Kraus operators for outcome
/// `m`, cut from a Haar isometry `C^dim → C^{dim·T}`.
pub fn random_instrument_from_rng<R: rand::Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    kraus_counts: &[usize],
) -> Result<KrausInstrument> {
    let total: usize = kraus_counts.iter().sum();
    if total == 0 || kraus_counts.contains(&0) {
        return Err(Error::InvalidInstrument("every outcome needs a Kraus operator".into()));
    }
    let u = haar_unitary(rng, dim * total);
    let mut blocks = (0..total).map(|j| u.view((j * dim, 0), (dim, dim)).into_owned());
    let outcomes = kraus_counts.iter().map(|&n| blocks.by_ref().take(n).collect()).collect();
    KrausInstrument::new(outcomes)
}

pub fn random_instrument(seed: u64, dim: usize, kraus_counts: &[usize]) -> Result<KrausInstrument> {
    random_instrument_from_rng(&mut seeded_rng(seed), dim, kraus_counts)
}

/// Applies `op` to the factor at `pos` of a vector on `layout`.
fn apply_local(v: &CVector, layout: &SubsystemLayout, pos: usize, op: &CMatrix) -> CVector {
    let dims = layout.dims();
    let d = dims[pos];
    let after: usize = dims[pos + 1..].iter().product();
    let before: usize = dims[..pos].iter().product();
    let mut out = CVector::zeros(v.len());
    for b in 0..before {
        for a in 0..after {
            for s_out in 0..d {
                let mut acc = Complex64::new(0.0, 0.0);
                for s_in in 0..d {
                    acc += op[(s_out, s_in)] * v[(b * d + s_in) * after + a];
                }
                out[(b * d + s_out) * after + a] = acc;
            }
        }
    }
    out
}

/// Outcome probabilities and normalized post-measurement states.
#[derive(Clone, Debug)]
pub struct InstrumentOutput {
    pub probs: Vec<f64>,
    /// `None` for degenerate outcomes.
    pub states: Vec<Option<DensityOperator>>,
}

fn check_measured(rho: &DensityOperator, label: &str, inst: &KrausInstrument) -> Result<()> {
    let d = rho.layout().dim_of(label)?;
    if d != inst.dim() {
        return Err(Error::DimensionMismatch { expected: d, found: inst.dim() });
    }
    Ok(())
}

pub fn apply_instrument(rho: &DensityOperator, measured: &str, inst: &KrausInstrument) -> Result<InstrumentOutput> {
    check_measured(rho, measured, inst)?;
    let mut probs = Vec::with_capacity(inst.n_outcomes());
    let mut states = Vec::with_capacity(inst.n_outcomes());
    for ks in inst.outcomes() {
        let mut acc = CMatrix::zeros(rho.dim(), rho.dim());
        for k in ks {
            acc += rho.conjugate_local(measured, k)?;
        }
        let p = acc.trace().re.max(0.0);
        probs.push(p);
        states.push(
            (p >= DEGENERATE_PROB).then(|| DensityOperator::from_parts_unchecked(rho.layout().clone(), acc.unscale(p))),
        );
    }
    Ok(InstrumentOutput { probs, states })
}

/// `Σ_m (I⊗Π_m) ρ (I⊗Π_m)` for a rank-1 projective measurement.
pub fn dephase(rho: &DensityOperator, measured: &str, inst: &KrausInstrument) -> Result<DensityOperator> {
    if !inst.is_projective() {
        return Err(Error::NotProjective);
    }
    check_measured(rho, measured, inst)?;
    let mut acc = CMatrix::zeros(rho.dim(), rho.dim());
    for ks in inst.outcomes() {
        acc += rho.conjugate_local(measured, &ks[0])?;
    }
    Ok(DensityOperator::from_parts_unchecked(rho.layout().clone(), acc))
}

/// `V = Σ_{m,k} K_{m,k} ⊗ |m,k⟩`, an isometry from the system into system ⊗
/// apparatus. Row `s·T + j` holds `K_j[s, ·]` where `j` enumerates the
/// Kraus operators outcome by outcome.
pub fn build_dilation_isometry(inst: &KrausInstrument) -> CMatrix {
    let d = inst.dim();
    let kraus: Vec<&CMatrix> = inst.outcomes().iter().flatten().collect();
    let t = kraus.len();
    CMatrix::from_fn(d * t, d, |row, col| kraus[row % t][(row / t, col)])
}

/// Post-measurement state `Σ_m p(m) Υ_m ⊗ |m⟩⟨m|^X` held blockwise.
#[derive(Clone, Debug)]
pub struct ConditionedEnsemble {
    input: DensityOperator,
    measured: String,
    layout: SubsystemLayout,
    probs: Vec<f64>,
    vectors: Vec<Option<PureStateVector>>,
    kraus_counts: Vec<usize>,
}

pub fn conditioned_ensemble(
    rho: &DensityOperator,
    measured: &str,
    inst: &KrausInstrument,
) -> Result<ConditionedEnsemble> {
    check_measured(rho, measured, inst)?;
    for reserved in [APPARATUS, OUTCOME] {
        if rho.layout().contains(reserved) {
            return Err(Error::LabelCollision(reserved.to_string()));
        }
    }
    let out_label = output_label(measured);
    let psi = purify(rho, REFERENCE)?;
    let pos = psi.layout().position(measured).expect("measured label present");
    let kmax = inst.max_kraus();
    let layout = psi.layout().relabel(measured, &out_label)?.concat(&SubsystemLayout::single(APPARATUS, kmax)?)?;

    let base = psi.vector().len();
    let mut probs = Vec::with_capacity(inst.n_outcomes());
    let mut vectors = Vec::with_capacity(inst.n_outcomes());
    for ks in inst.outcomes() {
        let mut ups = CVector::zeros(base * kmax);
        for (k, op) in ks.iter().enumerate() {
            let branch = apply_local(psi.vector(), psi.layout(), pos, op);
            for (i, z) in branch.iter().enumerate() {
                ups[i * kmax + k] = *z;
            }
        }
        let p = ups.norm_squared();
        probs.push(p);
        vectors.push(if p >= DEGENERATE_PROB { PureStateVector::normalized(ups, layout.clone()) } else { None });
    }
    Ok(ConditionedEnsemble {
        input: rho.clone(),
        measured: measured.to_string(),
        layout,
        probs,
        vectors,
        kraus_counts: inst.kraus_counts(),
    })
}

impl ConditionedEnsemble {
    pub fn input(&self) -> &DensityOperator {
        &self.input
    }

    pub fn measured_label(&self) -> &str {
        &self.measured
    }

    pub fn output_label(&self) -> String {
        output_label(&self.measured)
    }

    /// Layout of each `Υ_m`: `R`, the unmeasured input factors, `B'`, `Q''`.
    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    /// Input factors other than the measured one, in layout order.
    pub fn unmeasured_labels(&self) -> Vec<&str> {
        self.input.layout().labels().filter(|&l| l != self.measured).collect()
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn vectors(&self) -> &[Option<PureStateVector>] {
        &self.vectors
    }

    /// Per-outcome number of Kraus operators, i.e. the occupied part of `Q''`.
    pub fn apparatus_dims(&self) -> &[usize] {
        &self.kraus_counts
    }

    /// Marginal of `Υ_m` on `parties`; `None` for degenerate outcomes.
    pub fn outcome_marginal(&self, m: usize, parties: &[&str]) -> Result<Option<DensityOperator>> {
        match &self.vectors[m] {
            Some(v) => v.reduced(parties).map(Some),
            None => Ok(None),
        }
    }

    fn outcome_weights(&self) -> impl Iterator<Item = (f64, &PureStateVector)> {
        self.probs.iter().zip(&self.vectors).filter_map(|(&p, v)| v.as_ref().map(|v| (p, v)))
    }

    /// Entropy of the marginal on `parties`, which may include [`OUTCOME`].
    ///
    /// With `X` present this is `H(p) + Σ p(m) S(Υ_m|parties)`; without it,
    /// `S(Σ p(m) Υ_m|parties)`.
    pub fn entropy(&self, parties: &[&str]) -> Result<f64> {
        let with_x = parties.contains(&OUTCOME);
        let quantum: Vec<&str> = parties.iter().copied().filter(|&l| l != OUTCOME).collect();
        self.layout.positions_of(&quantum)?;
        if with_x {
            let mut s = shannon_entropy(&self.probs, LogBase::Two);
            if !quantum.is_empty() {
                for (p, v) in self.outcome_weights() {
                    s += p * entropy(&v.reduced(&quantum)?);
                }
            }
            Ok(s)
        } else if quantum.is_empty() {
            Ok(0.0)
        } else {
            let mut acc: Option<CMatrix> = None;
            let mut sub = None;
            for (p, v) in self.outcome_weights() {
                let r = v.reduced(&quantum)?;
                let scaled = r.matrix().scale(p);
                acc = Some(match acc {
                    Some(a) => a + scaled,
                    None => scaled,
                });
                sub.get_or_insert_with(|| r.layout().clone());
            }
            match (acc, sub) {
                (Some(m), Some(l)) => Ok(entropy(&DensityOperator::from_parts_unchecked(l, m))),
                _ => Ok(0.0),
            }
        }
    }

    pub fn mutual_information(&self, part1: &[&str], part2: &[&str]) -> Result<f64> {
        disjoint(part1, part2)?;
        Ok(self.entropy(part1)? + self.entropy(part2)? - self.entropy(&cat(&[part1, part2]))?)
    }

    pub fn conditional_mutual_information(&self, part1: &[&str], part2: &[&str], given: &[&str]) -> Result<f64> {
        disjoint(part1, part2)?;
        disjoint(part1, given)?;
        disjoint(part2, given)?;
        Ok(self.entropy(&cat(&[part1, given]))? + self.entropy(&cat(&[part2, given]))?
            - self.entropy(given)?
            - self.entropy(&cat(&[part1, part2, given]))?)
    }

    /// The full matrix `Σ_m p(m) |Υ_m⟩⟨Υ_m| ⊗ |m⟩⟨m|` on the ensemble layout
    /// followed by `X`.
    pub fn to_density(&self) -> Result<DensityOperator> {
        let n = self.probs.len();
        let layout = self.layout.concat(&SubsystemLayout::single(OUTCOME, n)?)?;
        let d = self.layout.total_dim();
        let mut m = CMatrix::zeros(d * n, d * n);
        for (x, (p, v)) in self.probs.iter().zip(&self.vectors).enumerate() {
            if let Some(v) = v {
                let v = v.vector();
                for i in 0..d {
                    for j in 0..d {
                        m[(i * n + x, j * n + x)] = v[i] * v[j].conj() * *p;
                    }
                }
            }
        }
        Ok(DensityOperator::from_parts_unchecked(layout, m))
    }
}

fn disjoint(a: &[&str], b: &[&str]) -> Result<()> {
    match a.iter().find(|l| b.contains(l)) {
        Some(l) => Err(Error::LabelOverlap(l.to_string())),
        None => Ok(()),
    }
}

fn cat<'a>(parts: &[&[&'a str]]) -> Vec<&'a str> {
    parts.iter().flat_map(|p| p.iter().copied()).collect()
}
