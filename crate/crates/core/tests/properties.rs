//! Cross-module invariants over random parameter triples.

use proptest::prelude::*;
use spin2mps::measures::vn_entropy;
use spin2mps::mpstate::{build_g, ModelParams, DEFAULT_L_MAX};
use spin2mps::numerics::eig_hermitian;
use spin2mps::oracle::{brute_correlator, finite_global_fidelity, mixed_trace_fidelity};
use spin2mps::transfer::{build_transfer, tdl_one_site_rdm, tm_finite_correlator, SpinOperator};

fn params() -> impl Strategy<Value = ModelParams> {
    (-3.0..3.0f64, -4.0..4.0f64, -3.0..3.0f64).prop_map(|(a, x, g)| ModelParams::new(a, x, g).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn transfer_matrix_is_real_symmetric_and_even_in_x(p in params()) {
        let f = build_transfer(&build_g(p)).entries;
        let q = ModelParams { x: -p.x, ..p };
        let fq = build_transfer(&build_g(q)).entries;
        let scale = f.max_abs().max(1.0);
        prop_assert!(f.is_real(1e-12 * scale));
        prop_assert!(f.hermitian_defect() <= 1e-12 * scale);
        prop_assert!(f.max_abs_diff(&fq) <= 1e-12 * scale);
    }

    #[test]
    fn tdl_rdm_is_a_density_matrix(p in params()) {
        let rho = match tdl_one_site_rdm(&build_g(p)) {
            Ok(r) => r,
            Err(_) => return Ok(()),
        };
        let m = rho.matrix();
        prop_assert!((m.trace().re - 1.0).abs() <= 1e-10);
        prop_assert!(eig_hermitian(m).unwrap().values[0] >= -1e-10);
        let s = vn_entropy(&rho).unwrap();
        prop_assert!((0.0..=5f64.log2() + 1e-10).contains(&s));
    }

    #[test]
    fn brute_force_matches_transfer_matrix(p in params(), r in 1usize..3) {
        let g = build_g(p);
        let op = SpinOperator::sz();
        let Ok(tm) = tm_finite_correlator(&g, &op, &op, r, 4) else { return Ok(()) };
        let brute = brute_correlator(p, &op, &op, r, 4, DEFAULT_L_MAX).unwrap();
        prop_assert!((brute - tm).norm() <= 1e-9 * tm.norm().max(1.0), "{brute} vs {tm}");
    }

    #[test]
    fn global_fidelity_matches_mixed_trace(p in params(), q in params()) {
        let Ok(brute) = finite_global_fidelity(p, q, 4, DEFAULT_L_MAX) else { return Ok(()) };
        let tm = mixed_trace_fidelity(p, q, 4);
        prop_assert!((brute - tm).abs() <= 1e-9, "{brute} vs {tm}");
        prop_assert!(brute <= 1.0 + 1e-12);
    }
}
