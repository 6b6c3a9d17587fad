mod common;

use backflow_core::conservation::{boundary_rates, ModeSuperposition, Quantity};
use backflow_core::scan::{run_sweep_with, SweepOptions, SweepPlan};
use backflow_core::scattering::{check_sewing, coefficients};
use backflow_core::{kernels, DefectKind, DefectSpec, Execution, GaussianTest, GridSpec};
use num_complex::Complex64;
use proptest::prelude::*;

fn strength() -> impl Strategy<Value = f64> {
    (1e-3f64..1e3, any::<bool>()).prop_map(|(m, neg)| if neg { -m } else { m })
}

fn defect() -> impl Strategy<Value = DefectSpec> {
    (0..4u8, strength()).prop_map(|(kind, s)| match kind {
        0 => DefectSpec::free(),
        1 => DefectSpec::delta(s).unwrap(),
        2 => DefectSpec::jump(s, false).unwrap(),
        _ => DefectSpec::jump(s, true).unwrap(),
    })
}

proptest! {
    #[test]
    fn scattering_is_unitary(d in defect(), k in 1e-3f64..1e3) {
        let c = coefficients(&d, k).unwrap();
        prop_assert!((c.t.norm_sqr() + c.r.norm_sqr() - 1.0).abs() <= 1e-13);
    }

    #[test]
    fn sewing_conditions_hold(d in defect(), k in 1e-3f64..1e3) {
        prop_assert!(check_sewing(&d, k).unwrap() <= 1e-12 * (1.0 + k * k));
    }

    #[test]
    fn kernel_is_hermitian(d in defect(), kp in 0.01f64..200.0, k in 0.01f64..200.0, x0 in -1.0f64..1.0) {
        let test = GaussianTest::new(x0, 0.1).unwrap();
        let a = kernels::kernel(&kernels::KernelPointRequest { k_prime: kp, k, defect: d, test }).unwrap();
        let b = kernels::kernel(&kernels::KernelPointRequest { k_prime: k, k: kp, defect: d, test }).unwrap();
        prop_assert!((a - b.conj()).norm() <= 1e-12 * (1.0 + a.norm()));
    }

    #[test]
    fn kernel_matches_oracle(d in defect(), kp in 0.01f64..60.0, k in 0.01f64..60.0, x0 in -0.9f64..0.9) {
        let test = GaussianTest::new(x0, 0.1).unwrap();
        let a = kernels::kernel(&kernels::KernelPointRequest { k_prime: kp, k, defect: d, test }).unwrap();
        prop_assert!((a - common::kernel(&d, kp, k, x0, 0.1)).norm() <= 1e-9);
    }

    #[test]
    fn jump_defect_conserves_everything(
        a in (0.01f64..10.0, any::<bool>()).prop_map(|(m, n)| if n { -m } else { m }),
        modes in prop::collection::btree_map(1u32..5000, (-1.0f64..1.0, -1.0f64..1.0), 2..4),
        t in 0.0f64..2.0,
    ) {
        let modes: Vec<(f64, Complex64)> = modes.into_iter().map(|(k, (re, im))| (k as f64 / 1000.0, Complex64::new(re, im))).collect();
        let s = ModeSuperposition::new(DefectSpec::jump(a, false).unwrap(), modes).unwrap();
        for q in Quantity::ALL {
            prop_assert!(boundary_rates(&s, q, t).unwrap().deviation() <= 1e-12);
        }
    }

    #[test]
    fn delta_rates_match(
        l in (0.01f64..10.0, any::<bool>()).prop_map(|(m, n)| if n { -m } else { m }),
        modes in prop::collection::btree_map(1u32..5000, (-1.0f64..1.0, -1.0f64..1.0), 1..4),
        t in 0.0f64..2.0,
    ) {
        let modes: Vec<(f64, Complex64)> = modes.into_iter().map(|(k, (re, im))| (k as f64 / 1000.0, Complex64::new(re, im))).collect();
        let s = ModeSuperposition::new(DefectSpec::delta(l).unwrap(), modes).unwrap();
        for q in Quantity::ALL {
            prop_assert!(boundary_rates(&s, q, t).unwrap().deviation() <= 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn sweep_order_ignores_input_order(mut strengths in prop::collection::hash_set(1i32..40, 1..4)
        .prop_map(|s| s.into_iter().map(|v| v as f64 / 4.0).collect::<Vec<_>>())) {
        let x0 = vec![0.3, -0.2];
        let grid = GridSpec::new(6, 12.0).unwrap();
        let opts = SweepOptions { exec: Execution::Serial, record_timing: false };
        let a = run_sweep_with(&SweepPlan::new(DefectKind::Delta, false, strengths.clone(), Some(x0.clone()), grid).unwrap(), &opts).unwrap();
        strengths.reverse();
        let b = run_sweep_with(&SweepPlan::new(DefectKind::Delta, false, strengths, Some(x0), grid).unwrap(), &opts).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!(a.windows(2).all(|w| (w[0].strength, w[0].x0) < (w[1].strength, w[1].x0)));
    }
}
