use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use qdiscord::correlation::{balance_report, tradeoff_check};
use qdiscord::infotheory::{conditional_mutual_information, entropy, mutual_information};
use qdiscord::measurement::{conditioned_ensemble, random_instrument, random_rank1_povm};
use qdiscord::qstate::{purify, random_density, random_unitary, validate_state};
use qdiscord::{Scope, SubsystemLayout};

fn two_qubits() -> SubsystemLayout {
    SubsystemLayout::bipartite(("A", 2), ("B", 2)).unwrap()
}

fn max_abs(m: &qdiscord::CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn partial_trace_undoes_tensor(s1 in any::<u64>(), s2 in any::<u64>(), r1 in 1usize..=2, r2 in 1usize..=3) {
        let a = random_density(s1, SubsystemLayout::single("A", 2).unwrap(), r1).unwrap();
        let b = random_density(s2, SubsystemLayout::single("B", 3).unwrap(), r2).unwrap();
        let ab = a.tensor(&b).unwrap();
        prop_assert!(max_abs(&(ab.partial_trace(&["A"]).unwrap().matrix() - a.matrix())) < 1e-12);
        prop_assert!(max_abs(&(ab.partial_trace(&["B"]).unwrap().matrix() - b.matrix())) < 1e-12);
    }

    #[test]
    fn keep_order_does_not_matter(seed in any::<u64>()) {
        let l = SubsystemLayout::new([("A", 2), ("B", 2), ("C", 2)]).unwrap();
        let rho = random_density(seed, l, 5).unwrap();
        let ac = rho.partial_trace(&["A", "C"]).unwrap();
        let ca = rho.partial_trace(&["C", "A"]).unwrap();
        prop_assert!(max_abs(&(ac.matrix() - ca.matrix())) < 1e-14);
        prop_assert!((ac.matrix().trace().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn purification_reproduces_state(seed in any::<u64>(), rank in 1usize..=4) {
        let rho = random_density(seed, two_qubits(), rank).unwrap();
        let psi = purify(&rho, "R").unwrap();
        prop_assert_eq!(psi.layout().dim_of("R").unwrap(), rank);
        let back = psi.reduced(&["A", "B"]).unwrap();
        prop_assert!(max_abs(&(back.matrix() - rho.matrix())) < 1e-10);
    }

    #[test]
    fn entropy_is_unitarily_invariant(seed in any::<u64>(), rank in 1usize..=4) {
        let rho = random_density(seed, two_qubits(), rank).unwrap();
        let u = random_unitary(seed ^ 0x5555, 4);
        let rotated = validate_state(&u * rho.matrix() * u.adjoint(), two_qubits()).unwrap();
        prop_assert!((entropy(&rho) - entropy(&rotated)).abs() < 1e-10);
    }

    #[test]
    fn strong_subadditivity(seed in any::<u64>(), rank in 1usize..=8) {
        let l = SubsystemLayout::new([("A", 2), ("B", 2), ("C", 2)]).unwrap();
        let rho = random_density(seed, l, rank).unwrap();
        prop_assert!(conditional_mutual_information(&rho, &["A"], &["C"], &["B"]).unwrap() >= -1e-9);
        prop_assert!(mutual_information(&rho, &["A"], &["B", "C"]).unwrap() >= -1e-9);
    }

    #[test]
    fn tradeoff_for_random_instruments(seed in any::<u64>(), rank in 1usize..=4, k0 in 1usize..=3, k1 in 1usize..=3) {
        let rho = random_density(seed, two_qubits(), rank).unwrap();
        let inst = random_instrument(seed.wrapping_add(1), 2, &[k0, k1]).unwrap();
        let ens = conditioned_ensemble(&rho, "B", &inst).unwrap();
        for scope in [Scope::Local, Scope::Whole] {
            prop_assert!(tradeoff_check(&ens, scope).unwrap() <= 1e-9);
        }
    }

    #[test]
    fn balance_report_holds(seed in any::<u64>(), rank in 1usize..=4, outcomes in 2usize..=4) {
        let rho = random_density(seed, two_qubits(), rank).unwrap();
        let inst = random_rank1_povm(seed.wrapping_mul(3), 2, outcomes).unwrap();
        let report = balance_report(&rho, "B", &inst).unwrap();
        prop_assert!(report.holds(), "{:?}", report.identity_residuals);
        prop_assert!(report.gain_gap <= report.disturbance_gap + 1e-9);
        prop_assert!(report.disturbance_gap <= report.cond_gap + 1e-9);
    }
}

#[test]
fn mutual_information_of_product_vanishes() {
    let a = random_density(3, SubsystemLayout::single("A", 3).unwrap(), 2).unwrap();
    let b = random_density(4, SubsystemLayout::single("B", 2).unwrap(), 2).unwrap();
    let ab = a.tensor(&b).unwrap();
    assert_abs_diff_eq!(mutual_information(&ab, &["A"], &["B"]).unwrap(), 0.0, epsilon = 1e-10);
}
