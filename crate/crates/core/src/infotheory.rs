//! Entropic functionals of density operators, in bits unless a
//! [`LogBase`] says otherwise.

use crate::error::{Error, Result};
use crate::qstate::{hermitian_eigen, DensityOperator, RANK_CUTOFF};

/// Weight of `ρ` on a null eigenvector of `σ` above which `D(ρ‖σ) = +∞`.
pub const SUPPORT_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum LogBase {
    #[default]
    Two,
    E,
}

impl LogBase {
    fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Two => x.log2(),
            LogBase::E => x.ln(),
        }
    }
}

/// `-Σ p log p` over a list of weights, skipping weights below
/// [`RANK_CUTOFF`].
pub fn shannon_entropy(weights: &[f64], base: LogBase) -> f64 {
    weights.iter().filter(|&&p| p > RANK_CUTOFF).map(|&p| -p * base.log(p)).sum()
}

pub fn entropy(rho: &DensityOperator) -> f64 {
    entropy_with_base(rho, LogBase::Two)
}

pub fn entropy_with_base(rho: &DensityOperator, base: LogBase) -> f64 {
    shannon_entropy(&rho.eigenvalues(), base)
}

fn check_disjoint(a: &[&str], b: &[&str]) -> Result<()> {
    match a.iter().find(|l| b.contains(l)) {
        Some(l) => Err(Error::LabelOverlap(l.to_string())),
        None => Ok(()),
    }
}

fn union<'a>(parts: &[&[&'a str]]) -> Vec<&'a str> {
    parts.iter().flat_map(|p| p.iter().copied()).collect()
}

/// Entropy of the marginal on `labels`; the empty set has entropy 0.
pub fn marginal_entropy(rho: &DensityOperator, labels: &[&str]) -> Result<f64> {
    if labels.is_empty() {
        return Ok(0.0);
    }
    Ok(entropy(&rho.partial_trace(labels)?))
}

/// `S(target | given) = S(target ∪ given) − S(given)`.
pub fn conditional_entropy(rho: &DensityOperator, target: &[&str], given: &[&str]) -> Result<f64> {
    check_disjoint(target, given)?;
    let joint = marginal_entropy(rho, &union(&[target, given]))?;
    Ok(joint - marginal_entropy(rho, given)?)
}

pub fn mutual_information(rho: &DensityOperator, part1: &[&str], part2: &[&str]) -> Result<f64> {
    check_disjoint(part1, part2)?;
    Ok(marginal_entropy(rho, part1)? + marginal_entropy(rho, part2)? - marginal_entropy(rho, &union(&[part1, part2]))?)
}

pub fn conditional_mutual_information(
    rho: &DensityOperator,
    part1: &[&str],
    part2: &[&str],
    given: &[&str],
) -> Result<f64> {
    check_disjoint(part1, part2)?;
    check_disjoint(part1, given)?;
    check_disjoint(part2, given)?;
    Ok(marginal_entropy(rho, &union(&[part1, given]))? + marginal_entropy(rho, &union(&[part2, given]))?
        - marginal_entropy(rho, given)?
        - marginal_entropy(rho, &union(&[part1, part2, given]))?)
}

/// `I_coh(from → to) = S(to) − S(from ∪ to)`.
pub fn coherent_information(rho: &DensityOperator, from: &[&str], to: &[&str]) -> Result<f64> {
    check_disjoint(from, to)?;
    Ok(marginal_entropy(rho, to)? - marginal_entropy(rho, &union(&[from, to]))?)
}

/// `D(ρ‖σ) = tr ρ log ρ − tr ρ log σ`, or `+∞` when the support of `ρ` is
/// not contained in that of `σ`.
pub fn relative_entropy(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    relative_entropy_with_base(rho, sigma, LogBase::Two)
}

pub fn relative_entropy_with_base(rho: &DensityOperator, sigma: &DensityOperator, base: LogBase) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), found: sigma.dim() });
    }
    let (values, vectors) = hermitian_eigen(sigma.matrix());
    let rho_m = rho.matrix();
    let mut cross = 0.0;
    for (j, &lambda) in values.iter().enumerate() {
        let v = vectors.column(j);
        let weight = (v.adjoint() * rho_m * v)[(0, 0)].re;
        if lambda < RANK_CUTOFF {
            if weight > SUPPORT_TOL {
                return Ok(f64::INFINITY);
            }
            continue;
        }
        cross += weight * base.log(lambda);
    }
    Ok(-entropy_with_base(rho, base) - cross)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{ket_bra, random_density, validate_state, CMatrix, SubsystemLayout};
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;

    fn layout(labels: &[&str]) -> SubsystemLayout {
        SubsystemLayout::new(labels.iter().map(|&l| (l, 2))).unwrap()
    }

    fn from_real(m: &[f64], labels: &[&str]) -> DensityOperator {
        let d = (m.len() as f64).sqrt() as usize;
        let m = CMatrix::from_fn(d, d, |r, c| Complex64::new(m[r * d + c], 0.0));
        validate_state(m, layout(labels)).unwrap()
    }

    fn bell() -> DensityOperator {
        let mut m = vec![0.0; 16];
        for &(r, c) in &[(0, 0), (0, 3), (3, 0), (3, 3)] {
            m[r * 4 + c] = 0.5;
        }
        from_real(&m, &["A", "B"])
    }

    fn classical() -> DensityOperator {
        let mut m = vec![0.0; 16];
        m[0] = 0.5;
        m[15] = 0.5;
        from_real(&m, &["A", "B"])
    }

    #[test]
    fn entropy_examples() {
        assert_abs_diff_eq!(entropy(&DensityOperator::maximally_mixed(layout(&["A"]))), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(entropy(&bell()), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(entropy(&DensityOperator::maximally_mixed(layout(&["A", "B"]))), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn conditional_entropy_examples() {
        assert_abs_diff_eq!(conditional_entropy(&bell(), &["A"], &["B"]).unwrap(), -1.0, epsilon = 1e-12);
        let mixed = DensityOperator::maximally_mixed(layout(&["A", "B"]));
        assert_abs_diff_eq!(conditional_entropy(&mixed, &["A"], &["B"]).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(conditional_entropy(&classical(), &["A"], &["B"]).unwrap(), 0.0, epsilon = 1e-12);
        assert!(matches!(conditional_entropy(&bell(), &["A"], &["A"]), Err(Error::LabelOverlap(_))));
        assert!(matches!(conditional_entropy(&bell(), &["Z"], &["B"]), Err(Error::UnknownLabel(_))));
    }

    #[test]
    fn mutual_information_examples() {
        assert_abs_diff_eq!(mutual_information(&bell(), &["A"], &["B"]).unwrap(), 2.0, epsilon = 1e-12);
        let mixed = DensityOperator::maximally_mixed(layout(&["A", "B"]));
        assert_abs_diff_eq!(mutual_information(&mixed, &["A"], &["B"]).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(mutual_information(&classical(), &["A"], &["B"]).unwrap(), 1.0, epsilon = 1e-12);
        assert!(mutual_information(&bell(), &["A"], &["A", "B"]).is_err());
    }

    #[test]
    fn conditional_mutual_information_examples() {
        let a = random_density(1, layout(&["A"]), 2).unwrap();
        let b = random_density(2, layout(&["B"]), 2).unwrap();
        let c = random_density(3, layout(&["C"]), 2).unwrap();
        let prod = a.tensor(&b).unwrap().tensor(&c).unwrap();
        assert_abs_diff_eq!(
            conditional_mutual_information(&prod, &["A"], &["B"], &["C"]).unwrap(),
            0.0,
            epsilon = 1e-12
        );
        let mut m = vec![0.0; 64];
        m[0] = 0.5;
        m[63] = 0.5;
        let ghz_classical = from_real(&m, &["A", "B", "C"]);
        assert_abs_diff_eq!(
            conditional_mutual_information(&ghz_classical, &["A"], &["B"], &["C"]).unwrap(),
            0.0,
            epsilon = 1e-12
        );
        assert!(conditional_mutual_information(&prod, &["A"], &["B"], &["A"]).is_err());
    }

    #[test]
    fn strong_subadditivity_on_random_three_qubit_states() {
        for seed in 0..20 {
            let rho = random_density(seed, layout(&["A", "B", "C"]), 1 + seed as usize % 8).unwrap();
            let cmi = conditional_mutual_information(&rho, &["A"], &["B"], &["C"]).unwrap();
            assert!(cmi >= -1e-9, "seed {seed}: {cmi}");
        }
    }

    #[test]
    fn coherent_information_examples() {
        let mut m = vec![0.0; 16];
        for &(r, c) in &[(0, 0), (0, 3), (3, 0), (3, 3)] {
            m[r * 4 + c] = 0.5;
        }
        let rb = from_real(&m, &["R", "B"]);
        assert_abs_diff_eq!(coherent_information(&rb, &["R"], &["B"]).unwrap(), 1.0, epsilon = 1e-12);

        let s = random_density(4, layout(&["A"]), 2).unwrap();
        let t = random_density(5, layout(&["B"]), 2).unwrap();
        let st = s.tensor(&t).unwrap();
        assert_abs_diff_eq!(coherent_information(&st, &["A"], &["B"]).unwrap(), -entropy(&s), epsilon = 1e-12);

        let pure = random_density(6, layout(&["A", "B"]), 1).unwrap();
        assert_abs_diff_eq!(
            coherent_information(&pure, &["A"], &["B"]).unwrap(),
            entropy(&pure.partial_trace(&["B"]).unwrap()),
            epsilon = 1e-10
        );
    }

    #[test]
    fn relative_entropy_examples() {
        let l = layout(&["A", "B"]);
        for seed in 0..5 {
            let rho = random_density(seed, l.clone(), 1 + seed as usize % 4).unwrap();
            assert_abs_diff_eq!(relative_entropy(&rho, &rho).unwrap(), 0.0, epsilon = 1e-9);
            let mixed = DensityOperator::maximally_mixed(l.clone());
            assert_abs_diff_eq!(relative_entropy(&rho, &mixed).unwrap(), 2.0 - entropy(&rho), epsilon = 1e-10);
        }
        let zero = validate_state(ket_bra(2, 0, 0), layout(&["A"])).unwrap();
        let one = validate_state(ket_bra(2, 1, 1), layout(&["A"])).unwrap();
        assert_eq!(relative_entropy(&zero, &one).unwrap(), f64::INFINITY);
        let big = DensityOperator::maximally_mixed(layout(&["A", "B"]));
        assert!(matches!(relative_entropy(&zero, &big), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn klein_inequality() {
        let l = layout(&["A", "B"]);
        for seed in 0..30 {
            let rho = random_density(seed, l.clone(), 1 + seed as usize % 4).unwrap();
            let sigma = random_density(seed + 1000, l.clone(), 4).unwrap();
            let d = relative_entropy(&rho, &sigma).unwrap();
            assert!(d.is_finite() && d >= -1e-9);
        }
    }

    #[test]
    fn additivity_and_subadditivity() {
        for seed in 0..20 {
            let a = random_density(seed, layout(&["A"]), 2).unwrap();
            let b = random_density(seed + 100, layout(&["B"]), 2).unwrap();
            let ab = a.tensor(&b).unwrap();
            assert_abs_diff_eq!(entropy(&ab), entropy(&a) + entropy(&b), epsilon = 1e-9);
            let rho = random_density(seed, layout(&["A", "B"]), 1 + seed as usize % 4).unwrap();
            let sa = marginal_entropy(&rho, &["A"]).unwrap();
            let sb = marginal_entropy(&rho, &["B"]).unwrap();
            assert!(sa + sb >= entropy(&rho) - 1e-9);
        }
    }

    #[test]
    fn base_switch_rescales_both_sides() {
        // D(ρ‖I/d) = log d − S(ρ), evaluated in both bases.
        let l = layout(&["A", "B"]);
        let rho = random_density(42, l.clone(), 3).unwrap();
        let mixed = DensityOperator::maximally_mixed(l);
        let lhs2 = relative_entropy_with_base(&rho, &mixed, LogBase::Two).unwrap();
        let rhs2 = 2.0 - entropy_with_base(&rho, LogBase::Two);
        let lhse = relative_entropy_with_base(&rho, &mixed, LogBase::E).unwrap();
        let rhse = 4f64.ln() - entropy_with_base(&rho, LogBase::E);
        let ln2 = std::f64::consts::LN_2;
        assert_abs_diff_eq!(lhse, lhs2 * ln2, epsilon = 1e-12);
        assert_abs_diff_eq!(rhse, rhs2 * ln2, epsilon = 1e-12);
        assert_abs_diff_eq!(lhse, rhse, epsilon = 1e-10);
    }
}
