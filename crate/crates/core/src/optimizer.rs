//! Minimization of the discord functionals over measurement families.
//!
//! Qubit projective measurements are searched on a uniform `(θ, φ)` grid
//! and the best grid points are polished with Nelder–Mead. Higher
//! dimensional projective measurements and rank-1 POVMs are parametrized as
//! `U₀·exp(iH(x))` around seeded Haar-random starting points `U₀`.
//!
//! [`brute_force_oracle`] evaluates the conditional-entropy gap on a grid
//! with its own arithmetic and serves as ground truth for the qubit search.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::correlation::{conditional_entropy_gap, disturbance_gap, gain_gap, relent_gap};
use crate::error::{Error, Result};
use crate::measurement::{projective_from_unitary, qubit_basis, rank1_povm_from_isometry, KrausInstrument};
use crate::qstate::{
    haar_unitary, hermitian_eigen, matrix_to_json, seeded_rng, CMatrix, DensityOperator, MatrixJson, RANK_CUTOFF,
};

/// Largest spread tolerated between minimized expressions.
pub const EXPRESSION_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expression {
    /// `S(A|B_C) − S(A|B)`.
    CondEntropy,
    /// `δ(ρ^B) − δ(ρ^AB)`.
    DisturbanceGap,
    /// `ι(ρ^B) − ι(ρ^AB)` over single-Kraus measurements.
    GainGap,
    /// `D(ρ^AB‖deph) − D(ρ^B‖deph)`, projective measurements only.
    RelentGap,
}

impl Expression {
    pub const ALL: [Expression; 4] =
        [Expression::CondEntropy, Expression::DisturbanceGap, Expression::GainGap, Expression::RelentGap];

    pub fn name(self) -> &'static str {
        match self {
            Expression::CondEntropy => "cond_entropy",
            Expression::DisturbanceGap => "disturbance_gap",
            Expression::GainGap => "gain_gap",
            Expression::RelentGap => "relent_gap",
        }
    }

    /// Value of this expression for one measurement.
    pub fn evaluate(self, rho: &DensityOperator, measured: &str, inst: &KrausInstrument) -> Result<f64> {
        match self {
            Expression::CondEntropy => conditional_entropy_gap(rho, measured, inst),
            Expression::DisturbanceGap => disturbance_gap(rho, measured, inst),
            Expression::GainGap => {
                if !inst.classify().single_kraus {
                    return Err(Error::UnsupportedExpression("gain_gap"));
                }
                gain_gap(rho, measured, inst)
            }
            Expression::RelentGap => relent_gap(rho, measured, inst),
        }
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Expression {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Expression::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown expression `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasurementFamily {
    /// Qubit bases parametrized by Bloch angles.
    ProjectiveQubit,
    /// Orthonormal bases of any dimension.
    ProjectiveGeneral,
    /// Canonical single-Kraus rank-1 POVMs with a fixed outcome count.
    Rank1Povm { outcomes: usize },
}

impl fmt::Display for MeasurementFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeasurementFamily::ProjectiveQubit => f.write_str("projective_qubit"),
            MeasurementFamily::ProjectiveGeneral => f.write_str("projective_general"),
            MeasurementFamily::Rank1Povm { outcomes } => write!(f, "rank1_povm_{outcomes}"),
        }
    }
}

impl FromStr for MeasurementFamily {
    type Err = Error;

    /// `projective_qubit`, `projective_general` or `rank1_povm_<n>`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "projective_qubit" => Ok(MeasurementFamily::ProjectiveQubit),
            "projective_general" => Ok(MeasurementFamily::ProjectiveGeneral),
            _ => s
                .strip_prefix("rank1_povm_")
                .and_then(|n| n.parse().ok())
                .map(|outcomes| MeasurementFamily::Rank1Povm { outcomes })
                .ok_or_else(|| Error::Parse(format!("unknown measurement family `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub grid_theta: usize,
    pub grid_phi: usize,
    /// Nelder–Mead iteration cap per refinement.
    pub refine_iters: usize,
    /// Refinement stops once the simplex values differ by less than this.
    pub refine_tol: f64,
    /// Refinements started from the best grid points, or random starting
    /// measurements for the non-qubit families.
    pub restarts: usize,
    pub seed: u64,
    pub family: MeasurementFamily,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            grid_theta: 16,
            grid_phi: 32,
            refine_iters: 500,
            refine_tol: 1e-12,
            restarts: 3,
            seed: 0,
            family: MeasurementFamily::ProjectiveQubit,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_theta < 8 || self.grid_phi < 16 {
            return Err(Error::InvalidConfig(format!(
                "grid {}×{} below the 8×16 minimum",
                self.grid_theta, self.grid_phi
            )));
        }
        if self.refine_tol.is_nan() || self.refine_tol <= 0.0 {
            return Err(Error::InvalidConfig("refine_tol must be positive".into()));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidConfig("restarts must be at least 1".into()));
        }
        Ok(())
    }
}

/// Where the minimum was found.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeasurementParams {
    /// Qubit basis `cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩` and its complement.
    Angles { theta: f64, phi: f64 },
    /// Basis vectors are the columns.
    Unitary { matrix: MatrixJson },
    /// POVM vectors are the columns of a matrix with orthonormal rows.
    Isometry { matrix: MatrixJson },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscordResult {
    pub value: f64,
    pub argmin: MeasurementParams,
    pub per_expression: BTreeMap<Expression, f64>,
    pub residual_spread: f64,
    pub iterations: usize,
    pub evaluations: usize,
    /// `false` when some refinement hit `refine_iters`; `value` is then the
    /// best point found so far.
    pub converged: bool,
}

#[derive(Clone, Debug)]
enum Candidate {
    Angles(f64, f64),
    Unitary(CMatrix),
    Isometry(CMatrix),
}

impl Candidate {
    fn instrument(&self) -> Result<KrausInstrument> {
        match self {
            Candidate::Angles(t, p) => projective_from_unitary(&qubit_basis(*t, *p)),
            Candidate::Unitary(u) => projective_from_unitary(u),
            Candidate::Isometry(v) => rank1_povm_from_isometry(v),
        }
    }

    fn params(&self) -> MeasurementParams {
        match self {
            Candidate::Angles(t, p) => {
                MeasurementParams::Angles { theta: t.rem_euclid(2.0 * PI), phi: p.rem_euclid(2.0 * PI) }
            }
            Candidate::Unitary(u) => MeasurementParams::Unitary { matrix: matrix_to_json(u) },
            Candidate::Isometry(v) => MeasurementParams::Isometry { matrix: matrix_to_json(v) },
        }
    }
}

/// Hermitian matrix from `d²` real parameters: the diagonal, then real and
/// imaginary parts of the upper triangle.
fn hermitian_from_params(x: &[f64], d: usize) -> CMatrix {
    let mut h = CMatrix::zeros(d, d);
    let mut it = x.iter().copied();
    for i in 0..d {
        h[(i, i)] = Complex64::new(it.next().unwrap_or(0.0), 0.0);
    }
    for i in 0..d {
        for j in i + 1..d {
            let z = Complex64::new(it.next().unwrap_or(0.0), it.next().unwrap_or(0.0));
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
        }
    }
    h
}

/// `exp(iH)` through the spectral decomposition of `H`.
fn unitary_exp(h: &CMatrix) -> CMatrix {
    let (values, vectors) = hermitian_eigen(h);
    let phases = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        values.len(),
        values.iter().map(|&l| Complex64::from_polar(1.0, l)),
    ));
    &vectors * phases * vectors.adjoint()
}

struct NelderMeadOutcome {
    x: Vec<f64>,
    fx: f64,
    iterations: usize,
    evaluations: usize,
    converged: bool,
}

/// Nelder–Mead with standard coefficients. Stops when the spread of the
/// simplex values drops to `tol` or after `max_iters` iterations.
fn nelder_mead<F>(mut f: F, x0: &[f64], step: &[f64], max_iters: usize, tol: f64) -> Result<NelderMeadOutcome>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    const REFLECT: f64 = 1.0;
    const EXPAND: f64 = 2.0;
    const CONTRACT: f64 = 0.5;
    const SHRINK: f64 = 0.5;

    let n = x0.len();
    let mut evaluations = 0;
    let mut eval = |x: &[f64], evals: &mut usize| -> Result<f64> {
        *evals += 1;
        f(x)
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), eval(x0, &mut evaluations)?));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += step[i];
        let fx = eval(&x, &mut evaluations)?;
        simplex.push((x, fx));
    }

    let mut iterations = 0;
    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if simplex[n].1 - simplex[0].1 <= tol {
            let (x, fx) = simplex.swap_remove(0);
            return Ok(NelderMeadOutcome { x, fx, iterations, evaluations, converged: true });
        }
        if iterations >= max_iters {
            let (x, fx) = simplex.swap_remove(0);
            return Ok(NelderMeadOutcome { x, fx, iterations, evaluations, converged: false });
        }
        iterations += 1;

        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / n as f64;
            }
        }
        let toward = |coef: f64, from: &[f64]| -> Vec<f64> {
            centroid.iter().zip(from).map(|(c, w)| c + coef * (c - w)).collect()
        };
        let worst = simplex[n].0.clone();
        let reflected = toward(REFLECT, &worst);
        let fr = eval(&reflected, &mut evaluations)?;
        if fr < simplex[0].1 {
            let expanded = toward(EXPAND, &worst);
            let fe = eval(&expanded, &mut evaluations)?;
            simplex[n] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (reflected, fr);
            continue;
        }
        let (contracted, limit) =
            if fr < simplex[n].1 { (toward(CONTRACT, &worst), fr) } else { (toward(-CONTRACT, &worst), simplex[n].1) };
        let fc = eval(&contracted, &mut evaluations)?;
        if fc < limit {
            simplex[n] = (contracted, fc);
            continue;
        }
        let best = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let x: Vec<f64> = best.iter().zip(&vertex.0).map(|(b, v)| b + SHRINK * (v - b)).collect();
            let fx = eval(&x, &mut evaluations)?;
            *vertex = (x, fx);
        }
    }
}

struct SearchOutcome {
    best: Candidate,
    value: f64,
    iterations: usize,
    evaluations: usize,
    converged: bool,
}

fn objective(rho: &DensityOperator, measured: &str, expr: Expression, cand: &Candidate) -> Result<f64> {
    expr.evaluate(rho, measured, &cand.instrument()?)
}

fn search_qubit(
    rho: &DensityOperator,
    measured: &str,
    config: &OptimizerConfig,
    expr: Expression,
) -> Result<SearchOutcome> {
    let (nt, np) = (config.grid_theta, config.grid_phi);
    let dtheta = PI / (nt - 1) as f64;
    let dphi = 2.0 * PI / np as f64;
    let points: Vec<(usize, usize)> = (0..nt).flat_map(|i| (0..np).map(move |j| (i, j))).collect();
    let values = points
        .par_iter()
        .map(|&(i, j)| objective(rho, measured, expr, &Candidate::Angles(i as f64 * dtheta, j as f64 * dphi)))
        .collect::<Result<Vec<f64>>>()?;

    // Ties resolve to the lexicographically lowest (θ, φ) index.
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));

    let (gi, gj) = points[order[0]];
    let mut best = (Candidate::Angles(gi as f64 * dtheta, gj as f64 * dphi), values[order[0]]);
    let mut iterations = 0;
    let mut evaluations = values.len();
    let mut converged = true;
    for &idx in order.iter().take(config.restarts) {
        let (i, j) = points[idx];
        let start = [i as f64 * dtheta, j as f64 * dphi];
        let run = nelder_mead(
            |x| objective(rho, measured, expr, &Candidate::Angles(x[0], x[1])),
            &start,
            &[0.5 * dtheta, 0.5 * dphi],
            config.refine_iters,
            config.refine_tol,
        )?;
        iterations += run.iterations;
        evaluations += run.evaluations;
        converged &= run.converged;
        if run.fx < best.1 {
            best = (Candidate::Angles(run.x[0], run.x[1]), run.fx);
        }
    }
    Ok(SearchOutcome { best: best.0, value: best.1, iterations, evaluations, converged })
}

fn search_parametrized(
    rho: &DensityOperator,
    measured: &str,
    config: &OptimizerConfig,
    expr: Expression,
    dim: usize,
    size: usize,
) -> Result<SearchOutcome> {
    let povm = size != dim || matches!(config.family, MeasurementFamily::Rank1Povm { .. });
    let build = |base: &CMatrix, x: &[f64]| -> Candidate {
        let u = base * unitary_exp(&hermitian_from_params(x, size));
        if povm {
            Candidate::Isometry(u.rows(0, dim).into_owned())
        } else {
            Candidate::Unitary(u)
        }
    };
    let mut rng = seeded_rng(config.seed);
    // The computational basis is always the first start.
    let bases: Vec<CMatrix> = (0..config.restarts)
        .map(|r| if r == 0 { CMatrix::identity(size, size) } else { haar_unitary(&mut rng, size) })
        .collect();
    let runs = bases
        .par_iter()
        .map(|base| {
            let run = nelder_mead(
                |x| objective(rho, measured, expr, &build(base, x)),
                &vec![0.0; size * size],
                &vec![0.5; size * size],
                config.refine_iters,
                config.refine_tol,
            )?;
            Ok((build(base, &run.x), run))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut iterations = 0;
    let mut evaluations = 0;
    let mut converged = true;
    let mut best: Option<(Candidate, f64)> = None;
    for (cand, run) in runs {
        iterations += run.iterations;
        evaluations += run.evaluations;
        converged &= run.converged;
        if best.as_ref().is_none_or(|b| run.fx < b.1) {
            best = Some((cand, run.fx));
        }
    }
    let (best, value) = best.expect("at least one restart");
    Ok(SearchOutcome { best, value, iterations, evaluations, converged })
}

fn search(rho: &DensityOperator, measured: &str, config: &OptimizerConfig, expr: Expression) -> Result<SearchOutcome> {
    config.validate()?;
    let dim = rho.layout().dim_of(measured)?;
    match config.family {
        MeasurementFamily::ProjectiveQubit => {
            if dim != 2 {
                return Err(Error::UnsupportedDim(dim));
            }
            search_qubit(rho, measured, config, expr)
        }
        MeasurementFamily::ProjectiveGeneral => search_parametrized(rho, measured, config, expr, dim, dim),
        MeasurementFamily::Rank1Povm { outcomes } => {
            if expr == Expression::RelentGap {
                return Err(Error::UnsupportedExpression("relent_gap"));
            }
            if outcomes < dim {
                return Err(Error::BadOutcomeCount { outcomes, dim });
            }
            search_parametrized(rho, measured, config, expr, dim, outcomes)
        }
    }
}

/// Discord of `rho` with respect to measurements on `measured`, obtained by
/// minimizing `expression` over `config.family`.
pub fn discord(
    rho: &DensityOperator,
    measured: &str,
    config: &OptimizerConfig,
    expression: Expression,
) -> Result<DiscordResult> {
    let out = search(rho, measured, config, expression)?;
    Ok(DiscordResult {
        value: out.value,
        argmin: out.best.params(),
        per_expression: BTreeMap::from([(expression, out.value)]),
        residual_spread: 0.0,
        iterations: out.iterations,
        evaluations: out.evaluations,
        converged: out.converged,
    })
}

/// [`minimize_all_expressions`] that fails when the minima disagree by more
/// than [`EXPRESSION_TOL`].
pub fn discord_all_expressions(
    rho: &DensityOperator,
    measured: &str,
    config: &OptimizerConfig,
) -> Result<DiscordResult> {
    let result = minimize_all_expressions(rho, measured, config)?;
    if result.residual_spread > EXPRESSION_TOL {
        return Err(Error::ExpressionDisagreement(result.residual_spread));
    }
    Ok(result)
}

/// Minimizes all four expressions and then evaluates each of them at every
/// expression's minimizer, so all minima are taken over one candidate set.
/// The spread between the minima is reported, not checked.
pub fn minimize_all_expressions(
    rho: &DensityOperator,
    measured: &str,
    config: &OptimizerConfig,
) -> Result<DiscordResult> {
    if matches!(config.family, MeasurementFamily::Rank1Povm { .. }) {
        return Err(Error::UnsupportedExpression("relent_gap"));
    }
    let mut candidates = Vec::new();
    let mut iterations = 0;
    let mut evaluations = 0;
    let mut converged = true;
    for expr in Expression::ALL {
        let out = search(rho, measured, config, expr)?;
        iterations += out.iterations;
        evaluations += out.evaluations;
        converged &= out.converged;
        candidates.push(out.best);
    }

    let mut per_expression = BTreeMap::new();
    let mut argmin = None;
    for expr in Expression::ALL {
        let mut best: Option<(usize, f64)> = None;
        for (i, cand) in candidates.iter().enumerate() {
            let v = objective(rho, measured, expr, cand)?;
            evaluations += 1;
            if best.is_none_or(|b| v < b.1) {
                best = Some((i, v));
            }
        }
        let (i, v) = best.expect("four candidates");
        per_expression.insert(expr, v);
        if expr == Expression::CondEntropy {
            argmin = Some(candidates[i].params());
        }
    }
    let max = per_expression.values().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = per_expression.values().copied().fold(f64::INFINITY, f64::min);
    let spread = max - min;
    Ok(DiscordResult {
        value: per_expression[&Expression::CondEntropy],
        argmin: argmin.expect("cond_entropy evaluated"),
        per_expression,
        residual_spread: spread,
        iterations,
        evaluations,
        converged,
    })
}

fn spectrum_entropy(m: CMatrix) -> f64 {
    SymmetricEigen::new(m).eigenvalues.iter().filter(|&&l| l > RANK_CUTOFF).map(|&l| -l * l.log2()).sum()
}

/// Minimum of `S(A|B_C) − S(A|B)` over a `resolution × 2·resolution` grid
/// of qubit bases, `θ ∈ [0, π]`, `φ ∈ [0, 2π)`.
///
/// Conditional states are contracted by hand here; only the state
/// container and the eigensolver are shared with the rest of the crate.
pub fn brute_force_oracle(rho: &DensityOperator, measured: &str, resolution: usize) -> Result<f64> {
    let layout = rho.layout();
    let pos = layout.position(measured).ok_or_else(|| Error::UnknownLabel(measured.to_string()))?;
    let dims = layout.dims();
    if dims[pos] != 2 {
        return Err(Error::UnsupportedDim(dims[pos]));
    }
    if resolution < 2 {
        return Err(Error::InvalidConfig("oracle resolution must be at least 2".into()));
    }
    let da = rho.dim() / 2;
    let after: usize = dims[pos + 1..].iter().product();
    // Full index of (a, b), with `a` running over the unmeasured factors.
    let index = |a: usize, b: usize| (a / after * 2 + b) * after + a % after;
    let m = rho.matrix();

    let mut rho_b = CMatrix::zeros(2, 2);
    for a in 0..da {
        for b in 0..2 {
            for b2 in 0..2 {
                rho_b[(b, b2)] += m[(index(a, b), index(a, b2))];
            }
        }
    }
    let base = spectrum_entropy(m.clone()) - spectrum_entropy(rho_b);

    let n_phi = 2 * resolution;
    let conditional = |theta: f64, phi: f64| -> f64 {
        let (s, c) = (0.5 * theta).sin_cos();
        let e = Complex64::from_polar(1.0, phi);
        let kets = [[Complex64::new(c, 0.0), e * s], [-e.conj() * s, Complex64::new(c, 0.0)]];
        let mut total = 0.0;
        for ket in kets {
            let mut sigma = CMatrix::zeros(da, da);
            for a in 0..da {
                for a2 in 0..da {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for b in 0..2 {
                        for b2 in 0..2 {
                            acc += ket[b].conj() * m[(index(a, b), index(a2, b2))] * ket[b2];
                        }
                    }
                    sigma[(a, a2)] = acc;
                }
            }
            let p = sigma.trace().re;
            if p > 1e-14 {
                total += p * spectrum_entropy(sigma.unscale(p));
            }
        }
        total
    };
    let min = (0..resolution)
        .into_par_iter()
        .map(|i| {
            let theta = PI * i as f64 / (resolution - 1) as f64;
            (0..n_phi).map(|j| conditional(theta, 2.0 * PI * j as f64 / n_phi as f64)).fold(f64::INFINITY, f64::min)
        })
        .reduce(|| f64::INFINITY, f64::min);
    Ok(min - base)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{random_density, SubsystemLayout};
    use approx::assert_abs_diff_eq;

    #[test]
    fn nelder_mead_finds_quadratic_minimum() {
        let out = nelder_mead(
            |x| Ok((x[0] - 1.0).powi(2) + 3.0 * (x[1] + 0.5).powi(2)),
            &[0.0, 0.0],
            &[0.3, 0.3],
            1000,
            1e-16,
        )
        .unwrap();
        assert!(out.converged);
        assert_abs_diff_eq!(out.x[0], 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(out.x[1], -0.5, epsilon = 1e-6);
    }

    #[test]
    fn nelder_mead_reports_iteration_cap() {
        let out = nelder_mead(|x| Ok(x[0].powi(2) + x[1].powi(2)), &[5.0, 5.0], &[0.1, 0.1], 3, 1e-16).unwrap();
        assert!(!out.converged);
        assert_eq!(out.iterations, 3);
    }

    #[test]
    fn nelder_mead_propagates_errors() {
        let err = nelder_mead(|_| Err(Error::NotProjective), &[0.0], &[1.0], 10, 1e-9);
        assert!(matches!(err, Err(Error::NotProjective)));
    }

    #[test]
    fn unitary_exp_is_unitary() {
        let x: Vec<f64> = (0..9).map(|i| (i as f64 * 0.37).sin()).collect();
        let u = unitary_exp(&hermitian_from_params(&x, 3));
        let res = (u.adjoint() * &u - CMatrix::identity(3, 3)).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(res < 1e-12);
    }

    #[test]
    fn parse_names() {
        for e in Expression::ALL {
            assert_eq!(e.name().parse::<Expression>().unwrap(), e);
        }
        assert!("nope".parse::<Expression>().is_err());
        assert_eq!("rank1_povm_3".parse::<MeasurementFamily>().unwrap(), MeasurementFamily::Rank1Povm { outcomes: 3 });
        assert_eq!(MeasurementFamily::Rank1Povm { outcomes: 4 }.to_string(), "rank1_povm_4");
        assert!("rank1_povm_x".parse::<MeasurementFamily>().is_err());
    }

    #[test]
    fn config_validation() {
        let mut c = OptimizerConfig::default();
        assert!(c.validate().is_ok());
        c.grid_theta = 4;
        assert!(c.validate().is_err());
        let c = OptimizerConfig { refine_tol: 0.0, ..Default::default() };
        assert!(c.validate().is_err());
    }

    #[test]
    fn qubit_family_rejects_qutrits() {
        let l = SubsystemLayout::bipartite(("A", 2), ("B", 3)).unwrap();
        let rho = random_density(1, l, 6).unwrap();
        let err = discord(&rho, "B", &OptimizerConfig::default(), Expression::CondEntropy);
        assert_eq!(err.unwrap_err(), Error::UnsupportedDim(3));
        assert_eq!(brute_force_oracle(&rho, "B", 8).unwrap_err(), Error::UnsupportedDim(3));
    }

    #[test]
    fn povm_family_rejects_relent() {
        let l = SubsystemLayout::bipartite(("A", 2), ("B", 2)).unwrap();
        let rho = random_density(1, l, 4).unwrap();
        let config = OptimizerConfig { family: MeasurementFamily::Rank1Povm { outcomes: 3 }, ..Default::default() };
        assert!(matches!(discord(&rho, "B", &config, Expression::RelentGap), Err(Error::UnsupportedExpression(_))));
    }

    #[test]
    fn oracle_handles_measured_factor_first() {
        // Same state with the factors swapped: measuring the first factor
        // must give the value for measuring the second one of the original.
        let l = SubsystemLayout::bipartite(("A", 2), ("B", 2)).unwrap();
        let rho = random_density(21, l, 3).unwrap();
        let swap = CMatrix::from_fn(4, 4, |r, c| {
            let (a, b) = (r / 2, r % 2);
            if c == b * 2 + a {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let swapped = crate::qstate::validate_state(
            &swap * rho.matrix() * swap.adjoint(),
            SubsystemLayout::bipartite(("B", 2), ("A", 2)).unwrap(),
        )
        .unwrap();
        let v1 = brute_force_oracle(&rho, "B", 24).unwrap();
        let v2 = brute_force_oracle(&swapped, "B", 24).unwrap();
        assert_abs_diff_eq!(v1, v2, epsilon = 1e-12);
    }
}
