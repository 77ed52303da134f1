//! Information gain, disturbance and missing information of a measurement
//! on `B`, evaluated on the local state `ρ^B` and on the whole state
//! `ρ^AB`, and the gaps between the two that reproduce discord.
//!
//! Both scopes are read off one [`ConditionedEnsemble`] built from a single
//! purification `|Ψ⟩^{RAB}`: the purifier of `ρ^B` is `RA`, the purifier of
//! `ρ^AB` is `R`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::infotheory::{marginal_entropy, relative_entropy};
use crate::measurement::{
    apply_instrument, conditioned_ensemble, dephase, ConditionedEnsemble, InstrumentClass, KrausInstrument, APPARATUS,
    OUTCOME, REFERENCE,
};
use crate::qstate::DensityOperator;
use crate::IDENTITY_TOL;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    /// The measured subsystem `ρ^B`, purified by `RA`.
    Local,
    /// The whole state `ρ^AB`, purified by `R`.
    Whole,
}

struct Parties {
    purifier: Vec<String>,
    outputs: Vec<String>,
    input_labels: Vec<String>,
}

fn parties(ens: &ConditionedEnsemble, scope: Scope) -> Parties {
    let others: Vec<String> = ens.unmeasured_labels().into_iter().map(str::to_string).collect();
    let out = ens.output_label();
    match scope {
        Scope::Local => Parties {
            purifier: std::iter::once(REFERENCE.to_string()).chain(others).collect(),
            outputs: vec![out],
            input_labels: vec![ens.measured_label().to_string()],
        },
        Scope::Whole => Parties {
            purifier: vec![REFERENCE.to_string()],
            input_labels: ens.input().layout().labels().map(str::to_string).collect(),
            outputs: others.into_iter().chain(std::iter::once(out)).collect(),
        },
    }
}

fn refs(v: &[String]) -> Vec<&str> {
    v.iter().map(String::as_str).collect()
}

fn with(v: &[String], extra: &[&str]) -> Vec<String> {
    v.iter().cloned().chain(extra.iter().map(|s| s.to_string())).collect()
}

fn check(name: &'static str, lhs: f64, rhs: f64) -> Result<f64> {
    if (lhs - rhs).abs() <= IDENTITY_TOL {
        Ok(lhs)
    } else {
        Err(Error::InternalIdentityViolation { name, lhs, rhs })
    }
}

/// Two independent evaluations of the same quantity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoPaths {
    pub primary: f64,
    pub alternate: f64,
}

impl TwoPaths {
    pub fn residual(&self) -> f64 {
        (self.primary - self.alternate).abs()
    }
}

/// `ι = I(P : X)` with `P` the purifier of the scope.
pub fn information_gain(ens: &ConditionedEnsemble, scope: Scope) -> Result<f64> {
    let p = parties(ens, scope);
    ens.mutual_information(&refs(&p.purifier), &[OUTCOME])
}

/// Disturbance as `S(ρ) − I_coh(P → outputs X)` (primary) and as
/// `I(P : Q''X)` (alternate).
pub fn disturbance_paths(ens: &ConditionedEnsemble, scope: Scope) -> Result<TwoPaths> {
    let p = parties(ens, scope);
    let s_input = marginal_entropy(ens.input(), &refs(&p.input_labels))?;
    let outputs_x = with(&p.outputs, &[OUTCOME]);
    let all = with(&p.purifier, &refs(&outputs_x));
    let coherent = ens.entropy(&refs(&outputs_x))? - ens.entropy(&refs(&all))?;
    let mutual = ens.mutual_information(&refs(&p.purifier), &[APPARATUS, OUTCOME])?;
    Ok(TwoPaths { primary: s_input - coherent, alternate: mutual })
}

pub fn disturbance(ens: &ConditionedEnsemble, scope: Scope) -> Result<f64> {
    let d = disturbance_paths(ens, scope)?;
    check("disturbance", d.primary, d.alternate)
}

/// `Δ = I(P : Q'' | X)`, the correlation with apparatus degrees of freedom
/// the observer never sees.
pub fn missing_information(ens: &ConditionedEnsemble, scope: Scope) -> Result<f64> {
    let p = parties(ens, scope);
    ens.conditional_mutual_information(&refs(&p.purifier), &[APPARATUS], &[OUTCOME])
}

/// `|ι + Δ − δ|`.
pub fn tradeoff_check(ens: &ConditionedEnsemble, scope: Scope) -> Result<f64> {
    let gain = information_gain(ens, scope)?;
    let missing = missing_information(ens, scope)?;
    let dist = disturbance_paths(ens, scope)?.primary;
    Ok((gain + missing - dist).abs())
}

/// `δ(ρ^B) − δ(ρ^AB)` from the two disturbances (primary) and as
/// `I(A : Q''X | R)` (alternate).
pub fn disturbance_gap_paths(ens: &ConditionedEnsemble) -> Result<TwoPaths> {
    let local = disturbance_paths(ens, Scope::Local)?.primary;
    let whole = disturbance_paths(ens, Scope::Whole)?.primary;
    let a = ens.unmeasured_labels();
    let closed = ens.conditional_mutual_information(&a, &[APPARATUS, OUTCOME], &[REFERENCE])?;
    Ok(TwoPaths { primary: local - whole, alternate: closed })
}

/// `ι(ρ^B) − ι(ρ^AB)` as `S(ρ^B) − S(ρ^AB) + Σ p(m)[S(Υ_m^{AB'Q''}) − S(Υ_m^{B'Q''})]`
/// (primary) and as `I(A : X | R)` (alternate).
pub fn gain_gap_paths(ens: &ConditionedEnsemble) -> Result<TwoPaths> {
    let input = ens.input();
    let measured = ens.measured_label().to_string();
    let all_input: Vec<&str> = input.layout().labels().collect();
    let a = ens.unmeasured_labels();
    let out = ens.output_label();
    let complement_small = [out.as_str(), APPARATUS];
    let complement_big: Vec<&str> = a.iter().copied().chain(complement_small).collect();
    let mut avg = 0.0;
    for (m, &p) in ens.probabilities().iter().enumerate() {
        if let (Some(big), Some(small)) =
            (ens.outcome_marginal(m, &complement_big)?, ens.outcome_marginal(m, &complement_small)?)
        {
            avg += p * (crate::infotheory::entropy(&big) - crate::infotheory::entropy(&small));
        }
    }
    let primary = marginal_entropy(input, &[measured.as_str()])? - marginal_entropy(input, &all_input)? + avg;
    let closed = ens.conditional_mutual_information(&a, &[OUTCOME], &[REFERENCE])?;
    Ok(TwoPaths { primary, alternate: closed })
}

pub fn disturbance_gap_of(ens: &ConditionedEnsemble) -> Result<f64> {
    let g = disturbance_gap_paths(ens)?;
    check("disturbance_gap", g.primary, g.alternate)
}

pub fn gain_gap_of(ens: &ConditionedEnsemble) -> Result<f64> {
    let g = gain_gap_paths(ens)?;
    check("gain_gap", g.primary, g.alternate)
}

pub fn disturbance_gap(rho: &DensityOperator, measured: &str, inst: &KrausInstrument) -> Result<f64> {
    disturbance_gap_of(&conditioned_ensemble(rho, measured, inst)?)
}

pub fn gain_gap(rho: &DensityOperator, measured: &str, inst: &KrausInstrument) -> Result<f64> {
    gain_gap_of(&conditioned_ensemble(rho, measured, inst)?)
}

/// `S(A|B_C) − S(A|B) = Σ p(m) S(ρ_m^A) − S(ρ^AB) + S(ρ^B)`.
pub fn conditional_entropy_gap(rho: &DensityOperator, measured: &str, inst: &KrausInstrument) -> Result<f64> {
    let out = apply_instrument(rho, measured, inst)?;
    let all: Vec<&str> = rho.layout().labels().collect();
    let a: Vec<&str> = all.iter().copied().filter(|&l| l != measured).collect();
    let mut averaged = 0.0;
    for (p, state) in out.probs.iter().zip(&out.states) {
        if let Some(s) = state {
            averaged += p * marginal_entropy(s, &a)?;
        }
    }
    Ok(averaged - marginal_entropy(rho, &all)? + marginal_entropy(rho, &[measured])?)
}

/// `D(ρ^AB ‖ deph ρ^AB)` and `D(ρ^B ‖ deph ρ^B)`.
fn dephasing_distances(rho: &DensityOperator, measured: &str, inst: &KrausInstrument) -> Result<(f64, f64)> {
    let whole = relative_entropy(rho, &dephase(rho, measured, inst)?)?;
    let rho_b = rho.partial_trace(&[measured])?;
    let local = relative_entropy(&rho_b, &dephase(&rho_b, measured, inst)?)?;
    Ok((whole, local))
}

/// `D(ρ^AB ‖ Σ Π ρ^AB Π) − D(ρ^B ‖ Σ Π ρ^B Π)` for a rank-1 projective
/// measurement.
pub fn relent_gap(rho: &DensityOperator, measured: &str, inst: &KrausInstrument) -> Result<f64> {
    let (whole, local) = dephasing_distances(rho, measured, inst)?;
    Ok(whole - local)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColesResiduals {
    /// `|D(ρ^AB ‖ deph ρ^AB) − S(X|R)|`.
    pub decoherence: f64,
    /// `|[S(X|R) − S(X|RA)] − [I(RA:X) − I(R:X)]|`.
    pub gain: f64,
}

pub fn coles_identities(rho: &DensityOperator, measured: &str, inst: &KrausInstrument) -> Result<ColesResiduals> {
    if !inst.is_projective() {
        return Err(Error::NotProjective);
    }
    let ens = conditioned_ensemble(rho, measured, inst)?;
    coles_of(&ens, inst)
}

fn coles_of(ens: &ConditionedEnsemble, inst: &KrausInstrument) -> Result<ColesResiduals> {
    let rho = ens.input();
    let measured = ens.measured_label();
    let (whole, _) = dephasing_distances(rho, measured, inst)?;
    let mut ra = vec![REFERENCE];
    ra.extend(ens.unmeasured_labels());
    let ra_x: Vec<&str> = ra.iter().copied().chain([OUTCOME]).collect();
    let x_given_r = ens.entropy(&[REFERENCE, OUTCOME])? - ens.entropy(&[REFERENCE])?;
    let x_given_ra = ens.entropy(&ra_x)? - ens.entropy(&ra)?;
    let gain_diff = information_gain(ens, Scope::Local)? - information_gain(ens, Scope::Whole)?;
    Ok(ColesResiduals { decoherence: (whole - x_given_r).abs(), gain: ((x_given_r - x_given_ra) - gain_diff).abs() })
}

/// Every quantity for one (state, instrument) pair, with the residual of
/// each identity that applies to the instrument's class.
///
/// Residual names:
/// `tradeoff_local`, `tradeoff_whole`, `disturbance_local_two_path`,
/// `disturbance_whole_two_path`, `disturbance_gap_two_path`,
/// `gain_gap_two_path`, `gain_le_disturbance`, `disturbance_le_cond`;
/// for rank-1 instruments `rank1_cond_eq_disturbance`; for single-Kraus
/// rank-1 instruments `good_gain_eq_disturbance` and `good_missing`; for
/// projective instruments `relent_eq_cond`, `gain_eq_cond`, `coles_decoherence`
/// and `coles_gain`. Inequalities report their violation `max(0, lhs − rhs)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BalanceReport {
    pub class: InstrumentClass,
    pub projective: bool,
    pub gain_local: f64,
    pub gain_whole: f64,
    pub dist_local: f64,
    pub dist_whole: f64,
    pub missing_local: f64,
    pub missing_whole: f64,
    pub cond_gap: f64,
    pub disturbance_gap: f64,
    pub gain_gap: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relent_gap: Option<f64>,
    pub identity_residuals: BTreeMap<String, f64>,
}

impl BalanceReport {
    pub fn max_residual(&self) -> f64 {
        self.identity_residuals.values().copied().fold(0.0, f64::max)
    }

    pub fn holds(&self) -> bool {
        self.max_residual() <= IDENTITY_TOL
    }
}

/// Builds a [`BalanceReport`] without failing on identity violations, so
/// that a broken identity shows up as a residual.
pub fn balance_report(rho: &DensityOperator, measured: &str, inst: &KrausInstrument) -> Result<BalanceReport> {
    let ens = conditioned_ensemble(rho, measured, inst)?;
    let class = inst.classify();
    let projective = inst.is_projective();
    let mut res = BTreeMap::new();

    let dl = disturbance_paths(&ens, Scope::Local)?;
    let dw = disturbance_paths(&ens, Scope::Whole)?;
    res.insert("disturbance_local_two_path".into(), dl.residual());
    res.insert("disturbance_whole_two_path".into(), dw.residual());
    res.insert("tradeoff_local".into(), tradeoff_check(&ens, Scope::Local)?);
    res.insert("tradeoff_whole".into(), tradeoff_check(&ens, Scope::Whole)?);

    let dg = disturbance_gap_paths(&ens)?;
    let gg = gain_gap_paths(&ens)?;
    res.insert("disturbance_gap_two_path".into(), dg.residual());
    res.insert("gain_gap_two_path".into(), gg.residual());
    let cond = conditional_entropy_gap(rho, measured, inst)?;
    res.insert("gain_le_disturbance".into(), (gg.primary - dg.primary).max(0.0));
    res.insert("disturbance_le_cond".into(), (dg.primary - cond).max(0.0));

    let missing_local = missing_information(&ens, Scope::Local)?;
    let missing_whole = missing_information(&ens, Scope::Whole)?;
    if class.rank1 {
        res.insert("rank1_cond_eq_disturbance".into(), (cond - dg.primary).abs());
    }
    if class.is_good() {
        res.insert("good_gain_eq_disturbance".into(), (gg.primary - dg.primary).abs());
        res.insert("good_missing".into(), missing_local.abs().max(missing_whole.abs()));
    }
    let relent = if projective {
        let r = relent_gap(rho, measured, inst)?;
        res.insert("relent_eq_cond".into(), (r - cond).abs());
        res.insert("gain_eq_cond".into(), (gg.primary - cond).abs());
        let coles = coles_of(&ens, inst)?;
        res.insert("coles_decoherence".into(), coles.decoherence);
        res.insert("coles_gain".into(), coles.gain);
        Some(r)
    } else {
        None
    };

    Ok(BalanceReport {
        class,
        projective,
        gain_local: information_gain(&ens, Scope::Local)?,
        gain_whole: information_gain(&ens, Scope::Whole)?,
        dist_local: dl.primary,
        dist_whole: dw.primary,
        missing_local,
        missing_whole,
        cond_gap: cond,
        disturbance_gap: dg.primary,
        gain_gap: gg.primary,
        relent_gap: relent,
        identity_residuals: res,
    })
}
