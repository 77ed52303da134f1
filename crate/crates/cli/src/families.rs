//! Parametrized two-party state families used by `compute`, `sweep` and
//! `generate`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use qdiscord::qstate::{basis_ket, ket_bra, random_density_from_rng, seeded_rng, validate_state};
use qdiscord::{CMatrix, DensityOperator, SubsystemLayout};
use rand::Rng;
use serde::Serialize;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Werner,
    BellDiagonal,
    Isotropic,
    ClassicalQuantum,
    Random,
}

impl Family {
    pub const ALL: [Family; 5] =
        [Family::Werner, Family::BellDiagonal, Family::Isotropic, Family::ClassicalQuantum, Family::Random];

    pub fn name(self) -> &'static str {
        match self {
            Family::Werner => "werner",
            Family::BellDiagonal => "bell_diagonal",
            Family::Isotropic => "isotropic",
            Family::ClassicalQuantum => "classical_quantum",
            Family::Random => "random",
        }
    }

    /// Accepted parameter names with their defaults.
    pub fn params(self) -> &'static [(&'static str, f64)] {
        match self {
            Family::Werner => &[("p", 0.5)],
            Family::BellDiagonal => &[("c1", 0.0), ("c2", 0.0), ("c3", 0.0)],
            Family::Isotropic => &[("p", 0.5), ("d", 2.0)],
            Family::ClassicalQuantum => &[("n", 2.0)],
            Family::Random => &[("rank", 4.0), ("da", 2.0), ("db", 2.0)],
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Family::ALL.into_iter().find(|f| f.name() == s).ok_or_else(|| CliError::Input(format!("unknown family `{s}`")))
    }
}

/// Parses `name=value`.
pub fn parse_param(s: &str) -> Result<(String, f64), CliError> {
    let (k, v) =
        s.split_once('=').ok_or_else(|| CliError::Input(format!("parameter `{s}` is not of the form name=value")))?;
    let v: f64 =
        v.trim().parse().map_err(|_| CliError::Input(format!("parameter `{k}` has non-numeric value `{v}`")))?;
    if !v.is_finite() {
        return Err(CliError::Input(format!("parameter `{k}` is not finite")));
    }
    Ok((k.trim().to_string(), v))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StateFamilySpec {
    pub family: Family,
    pub params: BTreeMap<String, f64>,
    pub seed: u64,
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn pauli() -> [CMatrix; 3] {
    let (o, i) = (c(0.0), Complex64::new(0.0, 1.0));
    [
        CMatrix::from_row_slice(2, 2, &[o, c(1.0), c(1.0), o]),
        CMatrix::from_row_slice(2, 2, &[o, -i, i, o]),
        CMatrix::from_row_slice(2, 2, &[c(1.0), o, o, c(-1.0)]),
    ]
}

fn qubits() -> SubsystemLayout {
    SubsystemLayout::bipartite(("A", 2), ("B", 2)).expect("static layout")
}

fn dimension(name: &str, v: f64) -> Result<usize, CliError> {
    if v >= 1.0 && v.fract() == 0.0 && v <= 64.0 {
        Ok(v as usize)
    } else {
        Err(CliError::Input(format!("parameter `{name}` must be an integer in 1..=64, got {v}")))
    }
}

fn probability(name: &str, v: f64) -> Result<f64, CliError> {
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(CliError::Input(format!("parameter `{name}` must lie in [0, 1], got {v}")))
    }
}

impl StateFamilySpec {
    /// Fills in defaults and rejects parameters the family does not know.
    pub fn new(family: Family, given: impl IntoIterator<Item = (String, f64)>, seed: u64) -> Result<Self, CliError> {
        let mut params: BTreeMap<String, f64> = family.params().iter().map(|(k, v)| (k.to_string(), *v)).collect();
        for (k, v) in given {
            match params.get_mut(&k) {
                Some(slot) => *slot = v,
                None => {
                    return Err(CliError::Input(format!("family `{family}` has no parameter `{k}`")));
                }
            }
        }
        Ok(Self { family, params, seed })
    }

    pub fn with_param(&self, name: &str, value: f64) -> Result<Self, CliError> {
        Self::new(self.family, self.params.clone().into_iter().chain([(name.to_string(), value)]), self.seed)
    }

    fn get(&self, name: &str) -> f64 {
        self.params[name]
    }

    pub fn build(&self) -> Result<DensityOperator, CliError> {
        let state = match self.family {
            Family::Werner => {
                // p|Ψ−⟩⟨Ψ−| + (1−p)I/4 is Bell-diagonal with c = (−p, −p, −p).
                let p = probability("p", self.get("p"))?;
                bell_diagonal([-p, -p, -p])?
            }
            Family::BellDiagonal => bell_diagonal([self.get("c1"), self.get("c2"), self.get("c3")])?,
            Family::Isotropic => {
                let p = probability("p", self.get("p"))?;
                let d = dimension("d", self.get("d"))?;
                let phi = (0..d)
                    .fold(qdiscord::CVector::zeros(d * d), |acc, k| acc + basis_ket(d, k).kronecker(&basis_ket(d, k)))
                    / c((d as f64).sqrt());
                let m =
                    (&phi * phi.adjoint()).scale(p) + CMatrix::identity(d * d, d * d).scale((1.0 - p) / (d * d) as f64);
                validate_state(m, SubsystemLayout::bipartite(("A", d), ("B", d))?)?
            }
            Family::ClassicalQuantum => {
                let da = dimension("n", self.get("n"))?;
                let mut rng = seeded_rng(self.seed);
                let w: [f64; 2] = [rng.random_range(0.05..1.0), rng.random_range(0.05..1.0)];
                let total = w[0] + w[1];
                let mut m = CMatrix::zeros(2 * da, 2 * da);
                for (b, wb) in w.iter().enumerate() {
                    let rho_b = random_density_from_rng(&mut rng, SubsystemLayout::single("A", da)?, da)?;
                    m += rho_b.matrix().kronecker(&ket_bra(2, b, b)).scale(wb / total);
                }
                validate_state(m, SubsystemLayout::bipartite(("A", da), ("B", 2))?)?
            }
            Family::Random => {
                let da = dimension("da", self.get("da"))?;
                let db = dimension("db", self.get("db"))?;
                let rank = dimension("rank", self.get("rank"))?;
                let layout = SubsystemLayout::bipartite(("A", da), ("B", db))?;
                random_density_from_rng(&mut seeded_rng(self.seed), layout, rank)?
            }
        };
        Ok(state)
    }
}

/// `¼(I⊗I + Σ cᵢ σᵢ⊗σᵢ)`; rejected when an eigenvalue is negative.
pub fn bell_diagonal(cs: [f64; 3]) -> Result<DensityOperator, CliError> {
    let [c1, c2, c3] = cs;
    let eigenvalues = [1.0 - c1 - c2 - c3, 1.0 - c1 + c2 + c3, 1.0 + c1 - c2 + c3, 1.0 + c1 + c2 - c3];
    if let Some(low) = eigenvalues.iter().copied().find(|&l| l < -1e-12) {
        return Err(CliError::Input(format!(
            "bell_diagonal({c1}, {c2}, {c3}) is not positive: eigenvalue {}",
            low / 4.0
        )));
    }
    let mut m = CMatrix::identity(4, 4);
    for (ci, s) in cs.iter().zip(pauli()) {
        m += s.kronecker(&s).scale(*ci);
    }
    Ok(validate_state(m.scale(0.25), qubits())?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use qdiscord::infotheory::entropy;

    fn build(family: Family, params: &[(&str, f64)], seed: u64) -> Result<DensityOperator, CliError> {
        StateFamilySpec::new(family, params.iter().map(|(k, v)| (k.to_string(), *v)), seed)?.build()
    }

    #[test]
    fn werner_endpoints() {
        let singlet = build(Family::Werner, &[("p", 1.0)], 0).unwrap();
        assert!(entropy(&singlet).abs() < 1e-10);
        let mixed = build(Family::Werner, &[("p", 0.0)], 0).unwrap();
        assert!((entropy(&mixed) - 2.0).abs() < 1e-10);
    }

    #[test]
    fn bell_diagonal_validity() {
        assert!(build(Family::BellDiagonal, &[("c1", 0.3), ("c2", 0.2), ("c3", 0.1)], 0).is_ok());
        assert!(build(Family::BellDiagonal, &[("c1", 1.0), ("c2", 1.0), ("c3", 1.0)], 0).is_err());
        assert!(build(Family::BellDiagonal, &[("c1", 1.0), ("c2", -1.0), ("c3", 1.0)], 0).is_ok());
    }

    #[test]
    fn isotropic_is_pure_at_p_one() {
        let rho = build(Family::Isotropic, &[("p", 1.0), ("d", 3.0)], 0).unwrap();
        assert_eq!(rho.dim(), 9);
        assert!(entropy(&rho).abs() < 1e-10);
    }

    #[test]
    fn seeded_families_are_reproducible() {
        for family in [Family::ClassicalQuantum, Family::Random] {
            let a = build(family, &[], 7).unwrap();
            let b = build(family, &[], 7).unwrap();
            let other = build(family, &[], 8).unwrap();
            assert_eq!(a.matrix(), b.matrix());
            assert_ne!(a.matrix(), other.matrix());
        }
    }

    #[test]
    fn parameter_errors() {
        assert!(build(Family::Werner, &[("q", 0.1)], 0).is_err());
        assert!(build(Family::Werner, &[("p", 1.5)], 0).is_err());
        assert!(build(Family::Random, &[("da", 2.5)], 0).is_err());
        assert!(parse_param("p").is_err());
        assert!(parse_param("p=abc").is_err());
        assert_eq!(parse_param("p=0.25").unwrap(), ("p".to_string(), 0.25));
        assert!("nope".parse::<Family>().is_err());
    }
}
