use ptmetric_core::dynamics::{eta_norm, Packet};
use ptmetric_core::eigensystem::{build_psi, Branch};
use ptmetric_core::grid::UniformGrid;
use ptmetric_core::hequiv::{h2_commutator_form, h2_kernel, omega_at, Expansion};
use ptmetric_core::metric::{block_kernel, eta1_kernel, Block};
use ptmetric_core::{Cx, PhysicalParams64};
use proptest::prelude::*;

#[test]
fn single_precision_builds() {
    let sol = build_psi(1.5_f32, 0.3, Branch::Plus).unwrap();
    assert!(sol.matching_residuals().max_jump() < 1e-4);
    let v: Cx<f32> = eta1_kernel(0.3_f32, -0.4);
    assert!((v - block_kernel(Block::Plus, Block::Minus, 0.3_f32, -0.4).unwrap()).norm() < 1e-6);
    let m = omega_at(0.5_f32, 4, Expansion::Origin);
    assert_eq!(m.omega.len(), 5);
}

#[test]
fn physical_defaults_are_consistent() {
    let p = PhysicalParams64::figure_defaults();
    assert!(p.validate().is_ok());
    assert_eq!(p.interaction_half_width(), 3.0);
    assert_eq!(p.x_to_dimless(p.x_from_dimless(0.7)), 0.7);
}

#[test]
fn eta_norm_of_free_packet_is_its_l2_norm() {
    let grid = UniformGrid::<f64>::symmetric(30, 10).unwrap();
    let packet = Packet { x0: -15.0, p0: 1.0, sigma: 1.5 };
    let psi = grid.sample(|x| packet.value(x));
    assert!((eta_norm(&grid, &psi, 0.0).re - 1.0).abs() < 1e-10);
}

proptest! {
    #[test]
    fn outer_kernels_saturate(x in 1.0f64..8.0, y in 1.0f64..8.0) {
        // x + y > 2 on the right half-line: g saturates and η₊₁ only keeps the sign
        let sign = if x > y { 1.0 } else if x < y { -1.0 } else { 0.0 };
        prop_assert!((eta1_kernel(x, y).im - 0.5 * sign).abs() < 1e-15);
        prop_assert_eq!(h2_kernel(x, y), 0.0);
    }

    #[test]
    fn h2_forms_agree(x in -5.0f64..5.0, y in -5.0f64..5.0) {
        prop_assert!((h2_commutator_form(x, y).re - h2_kernel(x, y)).abs() < 1e-15);
        prop_assert!(h2_commutator_form(x, y).im.abs() < 1e-15);
        prop_assert_eq!(h2_kernel(x, y), h2_kernel(y, x));
    }
}
